//! Central finite-difference gradient checking.

/// Central-difference gradient of a scalar function, with the step scaled by
/// each coordinate's magnitude.
pub fn central_difference_gradient<F>(f: F, point: &[f64], base_step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut grads = Vec::with_capacity(point.len());
    let mut x = point.to_vec();
    for i in 0..point.len() {
        let h = base_step * point[i].abs().max(1.0);
        x[i] = point[i] + h;
        let f_plus = f(&x);
        x[i] = point[i] - h;
        let f_minus = f(&x);
        x[i] = point[i];
        grads.push((f_plus - f_minus) / (2.0 * h));
    }
    grads
}

/// Largest relative error between an analytic gradient and its
/// finite-difference estimate, with the denominator floored to avoid blowups
/// near zero components.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}
