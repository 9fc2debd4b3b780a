//! Steepest-descent operators: the unit-ball direction maximizing the inner
//! product with the gradient, for the L∞ (sign), L1 (coordinate), and general
//! Lp geometries.

use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::scalar::{norm_lq, sign, Scalar};

/// How to scale the Lp steepest direction `sign(g) |g|^(q-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide by `‖g‖_q` once. This is the scaling the continuous-time flow
    /// uses; the output p-norm is `‖g‖_q^(q-2)`, unit only when q = 2.
    GradDualNorm,
    /// Divide by `‖g‖_q^(q-1)` so the output has unit Lp norm. Scale-invariant
    /// in `g`; the default for discrete stepping.
    UnitPNorm,
}

/// Norm exponent pair for the Lp steepest operator, `1/p + 1/q = 1`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SteepestConfig {
    pub p: f64,
    pub q: f64,
    pub normalization: Normalization,
}

impl SteepestConfig {
    /// Build from `p >= 1` (`f64::INFINITY` allowed); `q` is the dual exponent.
    pub fn new(p: f64, normalization: Normalization) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "steepest norm exponent p must be >= 1, got {p}"
            )));
        }
        let q = if p == 1.0 {
            f64::INFINITY
        } else if p.is_infinite() {
            1.0
        } else {
            p / (p - 1.0)
        };
        Ok(Self {
            p,
            q,
            normalization,
        })
    }

    pub fn unit_p_norm(p: f64) -> Result<Self> {
        Self::new(p, Normalization::UnitPNorm)
    }
}

/// Per-coordinate sign of the gradient (`sign(0) = 0`): the L∞ steepest
/// direction.
pub fn sign_step<T: Scalar>(_theta: &[T], grad: &[T]) -> Vec<T> {
    grad.iter().map(|g| sign(*g)).collect()
}

/// L1 steepest direction: `sign(g_i) e_i` for the largest `|g_i|`, ties broken
/// by lowest index. An all-zero gradient returns the zero vector.
pub fn coordinate_step<T: Scalar>(_theta: &[T], grad: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); grad.len()];
    let mut best_idx = None;
    let mut best_mag = T::zero();
    for (i, g) in grad.iter().enumerate() {
        let mag = g.abs();
        if mag > best_mag {
            best_mag = mag;
            best_idx = Some(i);
        }
    }
    if let Some(i) = best_idx {
        out[i] = sign(grad[i]);
    }
    out
}

/// Lp steepest direction for `1 < p < ∞`: `sign(g) |g|^(q-1)` scaled per
/// [`Normalization`]. A zero gradient returns the zero vector.
pub fn lp_step<T: Scalar>(_theta: &[T], grad: &[T], cfg: &SteepestConfig) -> Result<Vec<T>> {
    if !(cfg.p > 1.0) || cfg.p.is_infinite() {
        return Err(Error::InvalidArgument(format!(
            "lp_step requires 1 < p < inf (got p = {}); use sign_step or coordinate_step",
            cfg.p
        )));
    }
    let q = T::c(cfg.q);
    let qm1 = q - T::one();
    if grad.iter().all(|g| *g == T::zero()) {
        return Ok(vec![T::zero(); grad.len()]);
    }
    match cfg.normalization {
        Normalization::GradDualNorm => {
            let nq = norm_lq(grad, q);
            Ok(grad
                .iter()
                .map(|g| sign(*g) * g.abs().powf(qm1) / nq)
                .collect())
        }
        Normalization::UnitPNorm => {
            // Pre-scaling by ‖g‖∞ keeps the powers well conditioned and makes
            // the result independent of the gradient's magnitude.
            let ginf = grad.iter().fold(T::zero(), |a, g| a.max(g.abs()));
            let scaled: Vec<T> = grad.iter().map(|g| *g / ginf).collect();
            let raw: Vec<T> = scaled
                .iter()
                .map(|g| sign(*g) * g.abs().powf(qm1))
                .collect();
            let denom = norm_lq(&scaled, q).powf(qm1);
            Ok(raw.iter().map(|d| *d / denom).collect())
        }
    }
}

/// The sign operator as a composable [`Operator`].
pub fn sign_operator<T: Scalar>() -> Operator<T> {
    Operator::new("sign", |theta: &[T], g: &[T]| sign_step(theta, g))
}

/// The coordinate operator as a composable [`Operator`].
pub fn coordinate_operator<T: Scalar>() -> Operator<T> {
    Operator::new("coordinate", |theta: &[T], g: &[T]| {
        coordinate_step(theta, g)
    })
}

/// The Lp steepest operator as a composable [`Operator`].
///
/// Errors immediately for p outside (1, ∞); inside an operator chain a zero
/// gradient maps to the zero vector.
pub fn lp_operator<T: Scalar>(cfg: SteepestConfig) -> Result<Operator<T>> {
    lp_step::<T>(&[T::one()], &[T::one()], &cfg)?;
    let label = format!("steepest_l{}", cfg.p);
    Ok(Operator::new(label, move |theta: &[T], g: &[T]| {
        lp_step(theta, g, &cfg).expect("validated at construction")
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn sign_step_trivia() {
        assert_eq!(sign_step(&[0.0; 3], &[3.0, -2.0, 0.0]), vec![1.0, -1.0, 0.0]);
        assert_eq!(sign_step(&[0.0; 2], &[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn sign_step_is_scale_invariant_bit_exactly() {
        let g = [3.0, -2.0, 0.0];
        let scaled: Vec<f64> = g.iter().map(|x| x * 1e6).collect();
        assert_eq!(sign_step(&[0.0; 3], &g), sign_step(&[0.0; 3], &scaled));
    }

    #[test]
    fn coordinate_step_picks_largest_magnitude() {
        assert_eq!(
            coordinate_step(&[0.0; 3], &[0.5, -2.0, 1.0]),
            vec![0.0, -1.0, 0.0]
        );
    }

    #[test]
    fn coordinate_step_breaks_ties_by_lowest_index() {
        assert_eq!(coordinate_step(&[0.0; 2], &[2.0, -2.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn coordinate_step_zero_gradient_is_zero() {
        assert_eq!(coordinate_step(&[0.0; 3], &[0.0; 3]), vec![0.0; 3]);
    }

    #[test]
    fn lp_step_p2_is_normalized_gradient() {
        let cfg = SteepestConfig::unit_p_norm(2.0).unwrap();
        let d = lp_step(&[0.0f64; 2], &[3.0, 4.0], &cfg).unwrap();
        assert!((d[0] - 0.6).abs() < 1e-15);
        assert!((d[1] - 0.8).abs() < 1e-15);

        let dual = SteepestConfig::new(2.0, Normalization::GradDualNorm).unwrap();
        let d2 = lp_step(&[0.0f64; 2], &[3.0, 4.0], &dual).unwrap();
        assert!((d2[0] - 0.6).abs() < 1e-15);
        assert!((d2[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn lp_step_p3_has_unit_p_norm() {
        let cfg = SteepestConfig::unit_p_norm(3.0).unwrap();
        let d = lp_step(&[0.0f64; 2], &[1.0, 8.0], &cfg).unwrap();
        // Components proportional to |g|^(q-1) = |g|^0.5.
        assert!((d[1] / d[0] - 8f64.sqrt()).abs() < 1e-12);
        let p_norm = norm_lq(&d, 3.0);
        assert!((p_norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lp_step_rejects_out_of_range_p() {
        for p in [1.0, f64::INFINITY] {
            let cfg = SteepestConfig::unit_p_norm(p).unwrap();
            assert!(lp_step(&[0.0], &[1.0], &cfg).is_err());
        }
        assert!(SteepestConfig::unit_p_norm(0.5).is_err());
    }

    #[test]
    fn lp_step_zero_gradient_is_zero() {
        let cfg = SteepestConfig::unit_p_norm(3.0).unwrap();
        assert_eq!(lp_step(&[0.0; 2], &[0.0; 2], &cfg).unwrap(), vec![0.0; 2]);
    }

    #[test]
    fn lp_step_unit_norm_is_scale_invariant() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for p in [1.5, 2.0, 3.0, 4.0] {
            let cfg = SteepestConfig::unit_p_norm(p).unwrap();
            for _ in 0..50 {
                let g: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
                if g.iter().all(|x| *x == 0.0) {
                    continue;
                }
                let lambda: f64 = 10f64.powf(rng.random_range(-6.0..6.0));
                let scaled: Vec<f64> = g.iter().map(|x| x * lambda).collect();
                let d1 = lp_step(&[0.0; 4], &g, &cfg).unwrap();
                let d2 = lp_step(&[0.0; 4], &scaled, &cfg).unwrap();
                for (a, b) in d1.iter().zip(&d2) {
                    assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "p={p}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn dual_norm_scaling_grows_like_lambda_to_q_minus_2() {
        let cfg = SteepestConfig::new(3.0, Normalization::GradDualNorm).unwrap();
        let g = [1.0, -2.0, 0.5];
        let d1 = lp_step(&[0.0; 3], &g, &cfg).unwrap();
        let scaled: Vec<f64> = g.iter().map(|x| x * 16.0).collect();
        let d2 = lp_step(&[0.0; 3], &scaled, &cfg).unwrap();
        let factor = 16f64.powf(cfg.q - 2.0);
        for (a, b) in d1.iter().zip(&d2) {
            assert!((b - a * factor).abs() < 1e-12 * b.abs().max(1e-12));
        }
    }

    /// Draw a point uniformly-ish on the unit Lp sphere by normalizing a cube
    /// sample. Coverage, not uniformity, is what the check needs.
    fn random_lp_sphere_point(rng: &mut ChaCha12Rng, n: usize, p: f64) -> Vec<f64> {
        loop {
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = norm_lq(&u, p);
            if norm > 1e-6 {
                return u.iter().map(|x| x / norm).collect();
            }
        }
    }

    #[test]
    fn unit_p_norm_output_maximizes_inner_product_over_sampled_ball() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for p in [1.5, 2.0, 3.0] {
            let cfg = SteepestConfig::unit_p_norm(p).unwrap();
            for _ in 0..100 {
                let mut g: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                let n2 = crate::scalar::norm_l2(&g);
                if n2 < 1e-3 {
                    continue;
                }
                g.iter_mut().for_each(|x| *x /= n2);
                let d = lp_step(&[0.0; 3], &g, &cfg).unwrap();
                let ours: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
                let mut best = f64::NEG_INFINITY;
                for _ in 0..1_000 {
                    let s = random_lp_sphere_point(&mut rng, 3, p);
                    let v: f64 = g.iter().zip(&s).map(|(a, b)| a * b).sum();
                    best = best.max(v);
                }
                // The analytic direction must dominate every sampled one.
                assert!(
                    ours >= best - 1e-12,
                    "p={p}: sampled {best} beat analytic {ours}"
                );
            }
        }
    }

    #[test]
    fn brute_force_steepest_direction_check_dense_sampling() {
        // Denser version on a few gradients: the sampled max approaches the
        // analytic value from below and lands within 1e-3.
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for p in [1.5, 3.0] {
            let cfg = SteepestConfig::unit_p_norm(p).unwrap();
            for _ in 0..3 {
                let mut g: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                let n2 = crate::scalar::norm_l2(&g);
                g.iter_mut().for_each(|x| *x /= n2);
                let d = lp_step(&[0.0; 3], &g, &cfg).unwrap();
                let ours: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
                let mut best = f64::NEG_INFINITY;
                for _ in 0..100_000 {
                    let s = random_lp_sphere_point(&mut rng, 3, p);
                    let v: f64 = g.iter().zip(&s).map(|(a, b)| a * b).sum();
                    best = best.max(v);
                }
                assert!((ours - best).abs() < 1e-3, "p={p}: {ours} vs sampled {best}");
            }
        }
    }

    #[test]
    fn coordinate_step_is_the_l1_ball_maximizer() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..200 {
            let g: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
            let d = coordinate_step(&[0.0; 5], &g);
            let nonzero: Vec<usize> = (0..5).filter(|&i| d[i] != 0.0).collect();
            assert_eq!(nonzero.len(), 1);
            assert_eq!(d[nonzero[0]].abs(), 1.0);
            let ours: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            // On the L1 ball the best value is max_i |g_i|.
            let best = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            assert!((ours - best).abs() < 1e-15);
        }
    }
}
