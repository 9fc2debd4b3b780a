//! Separable mirror maps and the mirror operator.
//!
//! A mirror map is a convex potential `R(theta) = sum_i r(theta_i)` whose
//! inverse Hessian rescales the gradient: `M_R(theta, g) = (∇²R)⁻¹(theta) g`.
//! The rescaling is linear in `g` but, unlike a steepest direction, has no
//! built-in ceiling on its size.

use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::scalar::{norm_l2, Scalar};

/// Default shape parameter for the hyperbolic entropy map when a config does
/// not specify one.
pub const DEFAULT_GAMMA: f64 = 1e-2;

/// Coordinates with magnitude below this are clamped in the log-entropy
/// inverse-Hessian diagnostic.
const LOG_ENTROPY_CLAMP: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MirrorKind {
    /// `r = x²/2`: the mirror operator is the identity (plain gradient descent).
    Quadratic,
    /// `r = x·arcsinh(x/γ) − sqrt(x² + γ²)`: inverse Hessian `sqrt(x² + γ²)`,
    /// interpolating quadratic behavior (γ large) and multiplicative behavior
    /// (γ → 0).
    HyperbolicEntropy,
    /// `r = cosh(x)`: inverse Hessian `1/cosh(x)`, which vanishes for large
    /// `|x|` and therefore has no uniform coercivity constant.
    CoshEntropy,
    /// `∇r = ln(x)` on `x > 0`. Discretely realized as the sign-preserving
    /// multiplicative update in [`crate::optim`]; here the inverse Hessian is
    /// exposed as `|x|` (clamped away from 0) for diagnostics only.
    LogEntropy,
}

/// A separable mirror map: the potential, its per-coordinate derivative, and
/// the inverse-Hessian diagonal. Immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MirrorMap<T: Scalar> {
    pub kind: MirrorKind,
    pub gamma: T,
}

impl<T: Scalar> MirrorMap<T> {
    pub fn quadratic() -> Self {
        Self {
            kind: MirrorKind::Quadratic,
            gamma: T::one(),
        }
    }

    /// Panics if `gamma <= 0`.
    pub fn hyperbolic_entropy(gamma: T) -> Self {
        assert!(gamma > T::zero(), "hyperbolic entropy needs gamma > 0");
        Self {
            kind: MirrorKind::HyperbolicEntropy,
            gamma,
        }
    }

    pub fn cosh_entropy() -> Self {
        Self {
            kind: MirrorKind::CoshEntropy,
            gamma: T::one(),
        }
    }

    pub fn log_entropy() -> Self {
        Self {
            kind: MirrorKind::LogEntropy,
            gamma: T::one(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            MirrorKind::Quadratic => "quadratic",
            MirrorKind::HyperbolicEntropy => "hyperbolic_entropy",
            MirrorKind::CoshEntropy => "cosh_entropy",
            MirrorKind::LogEntropy => "log_entropy",
        }
    }

    /// Whether the potential (and hence the Bregman divergence) is defined at
    /// `x`. Only the log-entropy map restricts the domain.
    pub fn domain_contains(&self, x: T) -> bool {
        match self.kind {
            MirrorKind::LogEntropy => x > T::zero(),
            _ => true,
        }
    }

    /// Per-coordinate potential `r(x)`.
    pub fn potential(&self, x: T) -> T {
        match self.kind {
            MirrorKind::Quadratic => x * x * T::c(0.5),
            MirrorKind::HyperbolicEntropy => {
                let g = self.gamma;
                x * (x / g).asinh() - (x * x + g * g).sqrt()
            }
            MirrorKind::CoshEntropy => x.cosh(),
            MirrorKind::LogEntropy => x * x.ln() - x,
        }
    }

    /// Per-coordinate derivative `∇r(x)`.
    pub fn grad(&self, x: T) -> T {
        match self.kind {
            MirrorKind::Quadratic => x,
            MirrorKind::HyperbolicEntropy => (x / self.gamma).asinh(),
            MirrorKind::CoshEntropy => x.sinh(),
            MirrorKind::LogEntropy => x.ln(),
        }
    }

    /// Per-coordinate inverse Hessian `(∇²r)⁻¹(x) > 0`.
    pub fn inv_hessian_diag(&self, x: T) -> T {
        match self.kind {
            MirrorKind::Quadratic => T::one(),
            MirrorKind::HyperbolicEntropy => {
                let g = self.gamma;
                (x * x + g * g).sqrt()
            }
            MirrorKind::CoshEntropy => x.cosh().recip(),
            MirrorKind::LogEntropy => x.abs().max(T::c(LOG_ENTROPY_CLAMP)),
        }
    }

    /// The mirror operator as a composable [`Operator`].
    pub fn as_operator(&self) -> Operator<T> {
        let map = *self;
        Operator::new(map.name(), move |theta: &[T], g: &[T]| {
            theta
                .iter()
                .zip(g)
                .map(|(t, gi)| map.inv_hessian_diag(*t) * *gi)
                .collect()
        })
    }
}

/// Mirror operator step: per-coordinate `(∇²r)⁻¹(theta_i) · g_i`.
pub fn mirror_step<T: Scalar>(map: &MirrorMap<T>, theta: &[T], grad: &[T]) -> Result<Vec<T>> {
    if theta.len() != grad.len() {
        return Err(Error::DimensionMismatch {
            context: "mirror_step",
            left: theta.len(),
            right: grad.len(),
        });
    }
    Ok(theta
        .iter()
        .zip(grad)
        .map(|(t, g)| map.inv_hessian_diag(*t) * *g)
        .collect())
}

/// Bregman divergence `D_R(theta, xi) = R(theta) − R(xi) − ⟨∇R(xi), theta − xi⟩`,
/// summed per coordinate. Nonnegative for convex potentials.
pub fn bregman_divergence<T: Scalar>(map: &MirrorMap<T>, theta: &[T], xi: &[T]) -> Result<T> {
    if theta.len() != xi.len() {
        return Err(Error::DimensionMismatch {
            context: "bregman_divergence",
            left: theta.len(),
            right: xi.len(),
        });
    }
    let mut total = T::zero();
    for (i, (t, x)) in theta.iter().zip(xi).enumerate() {
        for v in [t, x] {
            if !map.domain_contains(*v) {
                return Err(Error::DomainViolation {
                    map: map.name(),
                    index: i,
                    value: v.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        total += map.potential(*t) - map.potential(*x) - map.grad(*x) * (*t - *x);
    }
    Ok(total)
}

/// Empirical lower estimate of the coercivity constant: the minimum over all
/// (sample, direction) pairs of `ξᵀ (∇²R(theta))⁻¹ ξ / ‖ξ‖₂²`. Zero-length
/// directions are skipped.
pub fn coercivity_probe<T: Scalar>(
    map: &MirrorMap<T>,
    samples: &[Vec<T>],
    directions: &[Vec<T>],
) -> Result<T> {
    if samples.is_empty() || directions.is_empty() {
        return Err(Error::InvalidArgument(
            "coercivity probe needs nonempty samples and directions".into(),
        ));
    }
    let mut min: Option<T> = None;
    for theta in samples {
        for xi in directions {
            if theta.len() != xi.len() {
                return Err(Error::DimensionMismatch {
                    context: "coercivity_probe",
                    left: theta.len(),
                    right: xi.len(),
                });
            }
            let denom = norm_l2(xi);
            if denom == T::zero() {
                continue;
            }
            let quad: T = theta
                .iter()
                .zip(xi)
                .map(|(t, x)| map.inv_hessian_diag(*t) * *x * *x)
                .sum();
            let value = quad / (denom * denom);
            min = Some(match min {
                Some(m) if m <= value => m,
                _ => value,
            });
        }
    }
    min.ok_or_else(|| Error::InvalidArgument("all probe directions were zero".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn all_maps() -> Vec<MirrorMap<f64>> {
        vec![
            MirrorMap::quadratic(),
            MirrorMap::hyperbolic_entropy(1.0),
            MirrorMap::hyperbolic_entropy(0.01),
            MirrorMap::cosh_entropy(),
            MirrorMap::log_entropy(),
        ]
    }

    #[test]
    fn quadratic_mirror_is_identity() {
        let map = MirrorMap::quadratic();
        let out = mirror_step(&map, &[5.0, -1.0], &[2.0, -1.0]).unwrap();
        assert_eq!(out, vec![2.0, -1.0]);
    }

    #[test]
    fn hyperbolic_mirror_at_origin_scales_by_gamma() {
        let map = MirrorMap::hyperbolic_entropy(1.0);
        let out = mirror_step(&map, &[0.0f64], &[2.0]).unwrap();
        assert!((out[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cosh_mirror_at_origin_is_identity() {
        let map = MirrorMap::cosh_entropy();
        let out = mirror_step(&map, &[0.0f64], &[3.0]).unwrap();
        assert!((out[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn bregman_quadratic_is_half_squared_distance() {
        let map = MirrorMap::quadratic();
        let d = bregman_divergence(&map, &[1.0f64, 2.0], &[0.0, 0.0]).unwrap();
        assert!((d - 2.5).abs() < 1e-15);
    }

    #[test]
    fn bregman_vanishes_at_equal_points() {
        for map in all_maps() {
            let theta = [0.7, 1.3];
            let d = bregman_divergence(&map, &theta, &theta).unwrap();
            assert!(d.abs() < 1e-15, "{}: {d}", map.name());
        }
    }

    #[test]
    fn bregman_hyperbolic_hand_value() {
        let map = MirrorMap::hyperbolic_entropy(1.0);
        let d = bregman_divergence(&map, &[1.0f64], &[0.0]).unwrap();
        let expected = 1f64.asinh() - 2f64.sqrt() + 1.0;
        assert!((d - expected).abs() < 1e-12, "{d} vs {expected}");
        assert!((expected - 0.4672).abs() < 1e-4);
    }

    #[test]
    fn bregman_nonnegative_and_definite_for_strictly_convex_maps() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for map in [MirrorMap::quadratic(), MirrorMap::hyperbolic_entropy(0.5)] {
            for _ in 0..500 {
                let theta: Vec<f64> = (0..3).map(|_| rng.random_range(-4.0..4.0)).collect();
                let xi: Vec<f64> = (0..3).map(|_| rng.random_range(-4.0..4.0)).collect();
                let d = bregman_divergence(&map, &theta, &xi).unwrap();
                assert!(d >= -1e-12, "{}: D = {d}", map.name());
                let far = theta.iter().zip(&xi).any(|(a, b)| (a - b).abs() > 1e-3);
                if far {
                    assert!(d > 1e-12, "{}: D = {d} for distinct points", map.name());
                }
            }
        }
    }

    #[test]
    fn log_entropy_bregman_requires_positive_coordinates() {
        let map = MirrorMap::log_entropy();
        assert!(bregman_divergence(&map, &[1.0], &[2.0]).is_ok());
        let err = bregman_divergence(&map, &[1.0, -1.0], &[2.0, 1.0]).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("coordinate 1"), "got: {msg}");
    }

    #[test]
    fn coercivity_of_quadratic_is_one() {
        let map = MirrorMap::quadratic();
        let samples: Vec<Vec<f64>> = vec![vec![0.0, 5.0], vec![-3.0, 1.0]];
        let dirs = vec![vec![1.0, 0.0], vec![0.3, -2.0]];
        let mu = coercivity_probe(&map, &samples, &dirs).unwrap();
        assert!((mu - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coercivity_of_hyperbolic_is_at_least_gamma() {
        let map = MirrorMap::hyperbolic_entropy(0.5);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let samples: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..4).map(|_| rng.random_range(-20.0..20.0)).collect())
            .collect();
        let dirs: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let mu = coercivity_probe(&map, &samples, &dirs).unwrap();
        assert!(mu >= 0.5 - 1e-12, "mu = {mu}");
    }

    #[test]
    fn cosh_coercivity_collapses_at_large_parameters() {
        let map = MirrorMap::cosh_entropy();
        let samples: Vec<Vec<f64>> = vec![vec![10.0, 10.0]];
        let dirs = vec![vec![1.0, 1.0]];
        let mu = coercivity_probe(&map, &samples, &dirs).unwrap();
        assert!(mu <= 1.0 / 10f64.cosh() + 1e-12);
        assert!(mu < 1e-4);
    }

    #[test]
    fn cosh_coercivity_drops_below_any_target() {
        // Include a sample past arccosh(1/mu) and the probe falls under mu.
        let map = MirrorMap::cosh_entropy();
        for mu_target in [0.5, 0.1, 1e-3] {
            let x = (1.0 / mu_target as f64).acosh() + 0.5;
            let samples = vec![vec![x]];
            let dirs = vec![vec![1.0]];
            let mu = coercivity_probe(&map, &samples, &dirs).unwrap();
            assert!(mu < mu_target, "target {mu_target}, got {mu}");
        }
    }

    #[test]
    fn coercivity_probe_rejects_empty_input() {
        let map = MirrorMap::<f64>::quadratic();
        assert!(coercivity_probe(&map, &[], &[vec![1.0]]).is_err());
        assert!(coercivity_probe(&map, &[vec![1.0]], &[]).is_err());
        assert!(coercivity_probe(&map, &[vec![1.0]], &[vec![0.0]]).is_err());
    }

    #[test]
    fn hyperbolic_inverse_hessian_is_at_least_gamma() {
        let map = MirrorMap::hyperbolic_entropy(0.25);
        for x in [-100.0, -1.0, 0.0, 0.3, 42.0] {
            assert!(map.inv_hessian_diag(x) >= 0.25);
        }
    }

    #[test]
    fn large_gamma_hyperbolic_approaches_quadratic() {
        let gamma = 1e6f64;
        let map = MirrorMap::hyperbolic_entropy(gamma);
        let theta = [0.9, -0.3, 0.0];
        let g = [1.0f64, -2.0, 0.5];
        let out = mirror_step(&map, &theta, &g).unwrap();
        for (o, gi) in out.iter().zip(&g) {
            let rel = (o / gamma - gi).abs() / gi.abs().max(1e-12);
            assert!(rel < 1e-6, "rel err {rel}");
        }
    }

    #[test]
    fn mirror_operator_is_linear_in_the_gradient() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for map in all_maps() {
            for _ in 0..200 {
                let theta: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
                let g: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
                let h: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
                let lambda: f64 = rng.random_range(-5.0..5.0);

                let sum: Vec<f64> = g.iter().zip(&h).map(|(a, b)| a + b).collect();
                let m_sum = mirror_step(&map, &theta, &sum).unwrap();
                let m_g = mirror_step(&map, &theta, &g).unwrap();
                let m_h = mirror_step(&map, &theta, &h).unwrap();
                for i in 0..4 {
                    let lhs = m_sum[i];
                    let rhs = m_g[i] + m_h[i];
                    assert!(
                        (lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0),
                        "{}: additivity {lhs} vs {rhs}",
                        map.name()
                    );
                }

                let scaled: Vec<f64> = g.iter().map(|x| lambda * x).collect();
                let m_scaled = mirror_step(&map, &theta, &scaled).unwrap();
                for i in 0..4 {
                    let rhs = lambda * m_g[i];
                    assert!(
                        (m_scaled[i] - rhs).abs() <= 1e-12 * rhs.abs().max(1.0),
                        "{}: homogeneity",
                        map.name()
                    );
                }
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6f64;
        let pts = [-2.3f64, -0.7, 0.4, 1.9, 3.1];
        for map in all_maps() {
            for &x in &pts {
                let x = if map.kind == MirrorKind::LogEntropy {
                    x.abs() + 0.1
                } else {
                    x
                };
                let fd_grad: f64 = (map.potential(x + h) - map.potential(x - h)) / (2.0 * h);
                let rel = (fd_grad - map.grad(x)).abs() / map.grad(x).abs().max(1e-3);
                assert!(rel < 1e-6, "{} grad at {x}: {rel}", map.name());

                let fd_hess = (map.grad(x + h) - map.grad(x - h)) / (2.0 * h);
                let inv = map.inv_hessian_diag(x);
                let rel = (fd_hess - 1.0 / inv).abs() / (1.0 / inv).max(1e-6);
                assert!(rel < 1e-5, "{} hessian at {x}: {rel}", map.name());
            }
        }
    }

    #[test]
    fn log_entropy_inverse_hessian_is_clamped_near_zero() {
        let map = MirrorMap::log_entropy();
        assert_eq!(map.inv_hessian_diag(0.0), 1e-30);
        assert_eq!(map.inv_hessian_diag(-2.0), 2.0);
    }
}
