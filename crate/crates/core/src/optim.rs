//! Discrete optimizers: SGD, SignSGD, Adam, AdamW, multiplicative
//! compositions (Exp-SGD, Exp-Adam, Adam-Exp), HAM, and HORST.
//!
//! The alternating optimizers take a half step with the base rule and then
//! apply a sign-preserving multiplicative update:
//!
//! ```text
//! theta_half = theta - u - eta*lambda*theta          u = base step (includes eta)
//! HORST: theta' = theta_half * exp(-alpha*sign(theta_half)*u      - eta*beta)
//! HAM:   theta' = theta_half * exp(-eta*(alpha*sign(theta_half)*g + beta))
//! ```
//!
//! Both reuse the single gradient evaluation of the half step. With
//! `alpha = beta = 0` the exponential factor is exactly 1 and the trajectory
//! is bit-identical to the base optimizer.

use crate::error::{Error, Result};
use crate::mirror::MirrorMap;
use crate::param::GradOracle;
use crate::scalar::{norm_l1, norm_l2, norm_linf, sign, Scalar};

/// Exponent clamp for all multiplicative updates. `exp(50)` is far beyond any
/// realistic accumulation; clamping preserves sign and monotonicity.
pub const EXP_CLAMP: f64 = 50.0;

// ---------------------------------------------------------------------------
// Adam state and primitive steps
// ---------------------------------------------------------------------------

/// Adam moment estimates with bias-correction step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T: Scalar> {
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub step_count: u64,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(n: usize) -> Self {
        Self::with_params(n, T::c(0.9), T::c(0.999), T::c(1e-8))
    }

    pub fn with_params(n: usize, beta1: T, beta2: T, epsilon: T) -> Self {
        Self {
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
            step_count: 0,
            beta1,
            beta2,
            epsilon,
        }
    }

    /// Reset the moments of the given coordinates to zero (used when a
    /// sparsity mask newly covers them).
    pub fn zero_moments(&mut self, indices: impl IntoIterator<Item = usize>) {
        for i in indices {
            self.m[i] = T::zero();
            self.v[i] = T::zero();
        }
    }
}

/// One Adam update. Advances the moments and step counter and returns the
/// displacement to subtract, `eta * m_hat / (sqrt(v_hat) + eps)`.
pub fn adam_step<T: Scalar>(state: &mut AdamState<T>, grad: &[T], eta: T) -> Vec<T> {
    debug_assert_eq!(state.m.len(), grad.len());
    state.step_count += 1;
    let t = state.step_count as i32;
    let bc1 = T::one() - state.beta1.powi(t);
    let bc2 = T::one() - state.beta2.powi(t);
    let one = T::one();
    let mut out = Vec::with_capacity(grad.len());
    for (i, g) in grad.iter().enumerate() {
        state.m[i] = state.beta1 * state.m[i] + (one - state.beta1) * *g;
        state.v[i] = state.beta2 * state.v[i] + (one - state.beta2) * *g * *g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        out.push(eta * m_hat / (v_hat.sqrt() + state.epsilon));
    }
    out
}

/// Plain gradient step `eta * g`.
pub fn sgd_step<T: Scalar>(_theta: &[T], grad: &[T], eta: T) -> Vec<T> {
    grad.iter().map(|g| eta * *g).collect()
}

/// Sign step `eta * sign(g)` with `sign(0) = 0`.
pub fn signsgd_step<T: Scalar>(_theta: &[T], grad: &[T], eta: T) -> Vec<T> {
    grad.iter().map(|g| eta * sign(*g)).collect()
}

/// Result of a multiplicative update: the new parameters and how many
/// exponents hit the clamp.
#[derive(Debug, Clone)]
pub struct ExpUpdate<T: Scalar> {
    pub theta: Vec<T>,
    pub clamped: usize,
}

/// Sign-preserving multiplicative update
/// `theta_i * exp(-alpha * sign(theta_i) * base_step_i - eta * beta)`.
///
/// The exponential is positive, so signs are preserved and zero coordinates
/// stay zero. Exponents are clamped to `[-EXP_CLAMP, EXP_CLAMP]`.
pub fn exp_update<T: Scalar>(
    theta: &[T],
    base_step: &[T],
    alpha: T,
    beta: T,
    eta: T,
) -> ExpUpdate<T> {
    debug_assert_eq!(theta.len(), base_step.len());
    let clamp = T::c(EXP_CLAMP);
    let mut clamped = 0usize;
    let theta = theta
        .iter()
        .zip(base_step)
        .map(|(t, u)| {
            let mut e = -alpha * sign(*t) * *u - eta * beta;
            if e > clamp || e < -clamp {
                clamped += 1;
                e = e.min(clamp).max(-clamp);
            }
            *t * e.exp()
        })
        .collect();
    ExpUpdate { theta, clamped }
}

/// HAM's multiplicative update: the exponent uses the raw gradient and
/// carries the learning rate, `theta_i * exp(-eta*(alpha*sign(theta_i)*g_i + beta))`.
pub fn ham_exp_update<T: Scalar>(
    theta: &[T],
    grad: &[T],
    alpha: T,
    beta: T,
    eta: T,
) -> ExpUpdate<T> {
    debug_assert_eq!(theta.len(), grad.len());
    let clamp = T::c(EXP_CLAMP);
    let mut clamped = 0usize;
    let theta = theta
        .iter()
        .zip(grad)
        .map(|(t, g)| {
            let mut e = -eta * (alpha * sign(*t) * *g + beta);
            if e > clamp || e < -clamp {
                clamped += 1;
                e = e.min(clamp).max(-clamp);
            }
            *t * e.exp()
        })
        .collect();
    ExpUpdate { theta, clamped }
}

/// Decoupled-weight-decay half step `theta - u - eta*lambda*theta`.
fn half_step<T: Scalar>(theta: &[T], u: &[T], eta: T, lambda: T) -> Vec<T> {
    theta
        .iter()
        .zip(u)
        .map(|(t, ui)| *t - *ui - eta * lambda * *t)
        .collect()
}

// ---------------------------------------------------------------------------
// Schedules and configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    Cosine,
    Triangular,
}

/// Learning-rate schedule: linear warmup to the peak, then the named decay
/// over the remaining steps.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub warmup: usize,
    pub total: usize,
}

impl Schedule {
    pub fn constant() -> Self {
        Self {
            kind: ScheduleKind::Constant,
            warmup: 0,
            total: 0,
        }
    }

    /// Multiplier in [0, 1] applied to the peak learning rate at `step`.
    pub fn factor(&self, step: usize) -> f64 {
        if self.warmup > 0 && step < self.warmup {
            return (step + 1) as f64 / self.warmup as f64;
        }
        match self.kind {
            ScheduleKind::Constant => 1.0,
            ScheduleKind::Cosine => {
                let span = self.total.saturating_sub(self.warmup).max(1);
                let p = (step - self.warmup).min(span) as f64 / span as f64;
                0.5 * (1.0 + (std::f64::consts::PI * p).cos())
            }
            ScheduleKind::Triangular => {
                let span = self.total.saturating_sub(self.warmup).max(1);
                let p = (step - self.warmup).min(span) as f64 / span as f64;
                1.0 - p
            }
        }
    }
}

/// Hyperparameters shared by the optimizer family.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OptimizerConfig {
    /// Peak learning rate.
    pub eta: f64,
    /// Decoupled weight decay strength.
    pub lambda: f64,
    /// Relative strength of the multiplicative update.
    pub alpha: f64,
    /// Extra regularization inside the exponential.
    pub beta: f64,
    pub schedule: Schedule,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            eta: 1e-2,
            lambda: 0.0,
            alpha: 0.0,
            beta: 0.0,
            schedule: Schedule::constant(),
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    /// HORST defaults: alpha = 5, beta = 0.
    pub fn horst_defaults() -> Self {
        Self::default().with_alpha(5.0)
    }

    /// HAM defaults: alpha = 200, beta = 0.
    pub fn ham_defaults() -> Self {
        Self::default().with_alpha(200.0)
    }

    pub fn eta_at(&self, step: usize) -> f64 {
        self.eta * self.schedule.factor(step)
    }
}

// ---------------------------------------------------------------------------
// Whole-step drivers
// ---------------------------------------------------------------------------

/// Per-step diagnostics returned by the stateful drivers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepInfo {
    /// Gradient evaluations consumed by this step (always 1).
    pub oracle_calls: u64,
    /// Coordinates whose exponent hit the clamp.
    pub exp_clamped: usize,
    /// Nonzero coordinates whose sign was flipped by the additive half step.
    pub sign_flips: usize,
}

fn count_sign_flips<T: Scalar>(before: &[T], after: &[T]) -> usize {
    before
        .iter()
        .zip(after)
        .filter(|(b, a)| **b != T::zero() && sign(**b) != sign(**a) && sign(**a) != T::zero())
        .count()
}

/// One HORST step. Evaluates the gradient once, advances the Adam moments
/// once, and reuses the Adam displacement in the exponent.
pub fn horst_step<T: Scalar>(
    theta: &mut [T],
    oracle: &mut GradOracle<'_, T>,
    state: &mut AdamState<T>,
    cfg: &OptimizerConfig,
    step: usize,
) -> StepInfo {
    let calls_before = oracle.call_count();
    let eta = T::c(cfg.eta_at(step));
    let grad = oracle.eval(theta);
    let u = adam_step(state, &grad, eta);
    let theta_half = half_step(theta, &u, eta, T::c(cfg.lambda));
    let sign_flips = count_sign_flips(theta, &theta_half);
    let upd = exp_update(&theta_half, &u, T::c(cfg.alpha), T::c(cfg.beta), eta);
    theta.copy_from_slice(&upd.theta);
    StepInfo {
        oracle_calls: oracle.call_count() - calls_before,
        exp_clamped: upd.clamped,
        sign_flips,
    }
}

/// One HAM step: same half step as HORST, but the exponent uses the raw
/// gradient and carries a factor eta to match the gradient's scale.
pub fn ham_step<T: Scalar>(
    theta: &mut [T],
    oracle: &mut GradOracle<'_, T>,
    state: &mut AdamState<T>,
    cfg: &OptimizerConfig,
    step: usize,
) -> StepInfo {
    let calls_before = oracle.call_count();
    let eta = T::c(cfg.eta_at(step));
    let grad = oracle.eval(theta);
    let u = adam_step(state, &grad, eta);
    let theta_half = half_step(theta, &u, eta, T::c(cfg.lambda));
    let sign_flips = count_sign_flips(theta, &theta_half);
    let upd = ham_exp_update(&theta_half, &grad, T::c(cfg.alpha), T::c(cfg.beta), eta);
    theta.copy_from_slice(&upd.theta);
    StepInfo {
        oracle_calls: oracle.call_count() - calls_before,
        exp_clamped: upd.clamped,
        sign_flips,
    }
}

// ---------------------------------------------------------------------------
// Unified optimizer for experiment loops
// ---------------------------------------------------------------------------

/// Base rule inside a composed optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    Sgd,
    SignSgd,
    Adam,
}

/// Order of a composed optimizer.
///
/// `ExpAfterBase` takes the base half step and applies the multiplicative
/// update to its output (the mirror-after-steepest order). `BaseAfterExp`
/// feeds the base rule the multiplicatively rescaled gradient `|theta| ⊙ g`
/// (the steepest-after-mirror order, which sign-like bases absorb).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComposeOrder {
    ExpAfterBase,
    BaseAfterExp,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerKind<T: Scalar> {
    Sgd,
    SignSgd,
    Adam,
    AdamW,
    Composed { order: ComposeOrder, base: BaseKind },
    Ham,
    Horst,
    /// Plain mirror descent `theta - eta * (∇²R)⁻¹(theta) ⊙ g`.
    MirrorDescent(MirrorMap<T>),
}

impl<T: Scalar> OptimizerKind<T> {
    pub fn exp_sgd() -> Self {
        Self::Composed {
            order: ComposeOrder::ExpAfterBase,
            base: BaseKind::Sgd,
        }
    }

    pub fn exp_adam() -> Self {
        Self::Composed {
            order: ComposeOrder::ExpAfterBase,
            base: BaseKind::Adam,
        }
    }

    pub fn adam_exp() -> Self {
        Self::Composed {
            order: ComposeOrder::BaseAfterExp,
            base: BaseKind::Adam,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Sgd => "sgd".into(),
            Self::SignSgd => "signsgd".into(),
            Self::Adam => "adam".into(),
            Self::AdamW => "adamw".into(),
            Self::Composed { order, base } => {
                let base = match base {
                    BaseKind::Sgd => "sgd",
                    BaseKind::SignSgd => "signsgd",
                    BaseKind::Adam => "adam",
                };
                match order {
                    ComposeOrder::ExpAfterBase => format!("exp_{base}"),
                    ComposeOrder::BaseAfterExp => format!("{base}_exp"),
                }
            }
            Self::Ham => "ham".into(),
            Self::Horst => "horst".into(),
            Self::MirrorDescent(map) => format!("mirror_{}", map.name()),
        }
    }

    fn uses_adam(&self) -> bool {
        matches!(
            self,
            Self::Adam
                | Self::AdamW
                | Self::Ham
                | Self::Horst
                | Self::Composed {
                    base: BaseKind::Adam,
                    ..
                }
        )
    }
}

/// A ready-to-step optimizer: kind, hyperparameters, and mutable state.
/// One instance per training run.
pub struct Optimizer<T: Scalar> {
    pub kind: OptimizerKind<T>,
    pub cfg: OptimizerConfig,
    adam: Option<AdamState<T>>,
    step_index: usize,
}

impl<T: Scalar> Optimizer<T> {
    pub fn new(kind: OptimizerKind<T>, cfg: OptimizerConfig, n: usize) -> Self {
        let adam = kind.uses_adam().then(|| {
            AdamState::with_params(n, T::c(cfg.beta1), T::c(cfg.beta2), T::c(cfg.epsilon))
        });
        Self {
            kind,
            cfg,
            adam,
            step_index: 0,
        }
    }

    pub fn adam_state(&self) -> Option<&AdamState<T>> {
        self.adam.as_ref()
    }

    pub fn adam_state_mut(&mut self) -> Option<&mut AdamState<T>> {
        self.adam.as_mut()
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// Advance the parameters by one step, consuming exactly one gradient
    /// evaluation.
    pub fn step(&mut self, theta: &mut [T], oracle: &mut GradOracle<'_, T>) -> Result<StepInfo> {
        let calls_before = oracle.call_count();
        let g = oracle.eval(theta);
        let info = self.step_with_grad(theta, &g)?;
        Ok(StepInfo {
            oracle_calls: oracle.call_count() - calls_before,
            ..info
        })
    }

    /// Advance the parameters using an externally computed gradient (for
    /// harnesses that post-process gradients, e.g. masking).
    pub fn step_with_grad(&mut self, theta: &mut [T], g: &[T]) -> Result<StepInfo> {
        let k = self.step_index;
        self.step_index += 1;
        let eta = T::c(self.cfg.eta_at(k));
        let lambda = T::c(self.cfg.lambda);
        let alpha = T::c(self.cfg.alpha);
        let beta = T::c(self.cfg.beta);

        let info = match &self.kind {
            OptimizerKind::Sgd => {
                let u = sgd_step(theta, g, eta);
                let next = half_step(theta, &u, eta, lambda);
                theta.copy_from_slice(&next);
                StepInfo::default()
            }
            OptimizerKind::SignSgd => {
                let u = signsgd_step(theta, g, eta);
                let next = half_step(theta, &u, eta, lambda);
                theta.copy_from_slice(&next);
                StepInfo::default()
            }
            OptimizerKind::Adam => {
                let u = adam_step(self.adam.as_mut().unwrap(), g, eta);
                let next = half_step(theta, &u, eta, T::zero());
                theta.copy_from_slice(&next);
                StepInfo::default()
            }
            OptimizerKind::AdamW => {
                let u = adam_step(self.adam.as_mut().unwrap(), g, eta);
                let next = half_step(theta, &u, eta, lambda);
                theta.copy_from_slice(&next);
                StepInfo::default()
            }
            OptimizerKind::Ham => {
                let u = adam_step(self.adam.as_mut().unwrap(), g, eta);
                let theta_half = half_step(theta, &u, eta, lambda);
                let sign_flips = count_sign_flips(theta, &theta_half);
                let upd = ham_exp_update(&theta_half, g, alpha, beta, eta);
                theta.copy_from_slice(&upd.theta);
                StepInfo {
                    oracle_calls: 0,
                    exp_clamped: upd.clamped,
                    sign_flips,
                }
            }
            OptimizerKind::Horst => {
                let u = adam_step(self.adam.as_mut().unwrap(), g, eta);
                let theta_half = half_step(theta, &u, eta, lambda);
                let sign_flips = count_sign_flips(theta, &theta_half);
                let upd = exp_update(&theta_half, &u, alpha, beta, eta);
                theta.copy_from_slice(&upd.theta);
                StepInfo {
                    oracle_calls: 0,
                    exp_clamped: upd.clamped,
                    sign_flips,
                }
            }
            OptimizerKind::Composed { order, base } => {
                let (order, base) = (*order, *base);
                match order {
                    ComposeOrder::ExpAfterBase => {
                        let u = match base {
                            BaseKind::Sgd => sgd_step(theta, g, eta),
                            BaseKind::SignSgd => signsgd_step(theta, g, eta),
                            BaseKind::Adam => adam_step(self.adam.as_mut().unwrap(), g, eta),
                        };
                        let theta_half = half_step(theta, &u, eta, lambda);
                        let sign_flips = count_sign_flips(theta, &theta_half);
                        let upd = exp_update(&theta_half, &u, alpha, beta, eta);
                        theta.copy_from_slice(&upd.theta);
                        StepInfo {
                            oracle_calls: 0,
                            exp_clamped: upd.clamped,
                            sign_flips,
                        }
                    }
                    ComposeOrder::BaseAfterExp => {
                        let rescaled: Vec<T> =
                            theta.iter().zip(g).map(|(t, gi)| t.abs() * *gi).collect();
                        let u = match base {
                            BaseKind::Sgd => sgd_step(theta, &rescaled, eta),
                            BaseKind::SignSgd => signsgd_step(theta, &rescaled, eta),
                            BaseKind::Adam => {
                                adam_step(self.adam.as_mut().unwrap(), &rescaled, eta)
                            }
                        };
                        let next = half_step(theta, &u, eta, lambda);
                theta.copy_from_slice(&next);
                        StepInfo::default()
                    }
                }
            }
            OptimizerKind::MirrorDescent(map) => {
                let u: Vec<T> = theta
                    .iter()
                    .zip(g)
                    .map(|(t, gi)| eta * map.inv_hessian_diag(*t) * *gi)
                    .collect();
                let next = half_step(theta, &u, eta, lambda);
                theta.copy_from_slice(&next);
                StepInfo::default()
            }
        };

        for (i, v) in theta.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!(
                    "{} step {k}: coordinate {i} is {v}",
                    self.kind.name()
                )));
            }
        }
        Ok(info)
    }
}

/// Per-iteration record kept by training harnesses.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct StepRecord {
    pub iteration: u64,
    pub loss: f64,
    pub grad_norms: (f64, f64, f64),
    pub update_norms: (f64, f64, f64),
    pub theta_snapshot_id: Option<u64>,
}

/// (L1, L2, L∞) norm triple used in [`StepRecord`].
pub fn norm_triple<T: Scalar>(v: &[T]) -> (f64, f64, f64) {
    (
        norm_l1(v).to_f64().unwrap_or(f64::NAN),
        norm_l2(v).to_f64().unwrap_or(f64::NAN),
        norm_linf(v).to_f64().unwrap_or(f64::NAN),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::GradOracle;

    #[test]
    fn adam_zero_gradient_gives_zero_update() {
        let mut state = AdamState::<f64>::new(2);
        let u = adam_step(&mut state, &[0.0, 0.0], 0.1);
        assert_eq!(u, vec![0.0, 0.0]);
        assert_eq!(state.step_count, 1);
    }

    #[test]
    fn adam_first_step_is_bias_corrected_sign_scaled() {
        let mut state = AdamState::<f64>::new(1);
        let u = adam_step(&mut state, &[1.0], 0.1);
        let expected = 0.1 / (1.0 + 1e-8);
        assert!((u[0] - expected).abs() < 1e-15, "{} vs {expected}", u[0]);
    }

    #[test]
    fn adam_constant_gradient_converges_to_eta_magnitude() {
        let mut state = AdamState::<f64>::new(1);
        let c = 3.7;
        let mut u = vec![0.0];
        for _ in 0..5_000 {
            u = adam_step(&mut state, &[c], 0.1);
        }
        assert!((u[0] - 0.1).abs() < 1e-6, "fixed point {}", u[0]);
    }

    #[test]
    fn sgd_and_signsgd_steps() {
        assert_eq!(sgd_step(&[0.0], &[2.0], 0.5), vec![1.0]);
        assert_eq!(signsgd_step(&[0.0; 2], &[2.0, -0.001], 0.1), vec![0.1, -0.1]);
        assert_eq!(signsgd_step(&[0.0; 2], &[0.0, 0.0], 0.1), vec![0.0, 0.0]);
    }

    #[test]
    fn exp_update_identity_at_zero_strength() {
        let theta = [1.5, -2.0, 0.0];
        let upd = exp_update(&theta, &[0.3, -0.4, 0.1], 0.0, 0.0, 0.1);
        assert_eq!(upd.theta, theta.to_vec());
        assert_eq!(upd.clamped, 0);
    }

    #[test]
    fn exp_update_worked_examples() {
        let upd = exp_update(&[1.0], &[0.1], 5.0, 0.0, 0.3);
        assert!((upd.theta[0] - (-0.5f64).exp()).abs() < 1e-12);
        assert!((upd.theta[0] - 0.6065).abs() < 1e-4);

        // Negative parameter, base step pushing toward zero: magnitude shrinks,
        // sign preserved.
        let upd = exp_update(&[-2.0], &[-0.1], 5.0, 0.0, 0.3);
        assert!((upd.theta[0] - (-2.0 * (-0.5f64).exp())).abs() < 1e-12);
        assert!((upd.theta[0] + 1.2131).abs() < 1e-4);
    }

    #[test]
    fn exp_update_clamps_and_counts() {
        let upd = exp_update(&[1.0, 1.0], &[100.0, 0.1], 5.0, 0.0, 0.1);
        assert_eq!(upd.clamped, 1);
        assert!((upd.theta[0] - (-50f64).exp()).abs() < 1e-60);
    }

    #[test]
    fn exp_update_preserves_zero_and_sign() {
        let theta = [0.0, -3.0, 2.0];
        let upd = exp_update(&theta, &[5.0, -5.0, 5.0], 2.0, 0.1, 0.1);
        assert_eq!(upd.theta[0], 0.0);
        assert!(upd.theta[1] < 0.0);
        assert!(upd.theta[2] > 0.0);
    }

    #[test]
    fn ham_exp_worked_example() {
        let upd = ham_exp_update(&[1.0], &[0.01], 200.0, 0.0, 0.1);
        assert!((upd.theta[0] - (-0.2f64).exp()).abs() < 1e-12);
        assert!((upd.theta[0] - 0.8187).abs() < 1e-4);
    }

    #[test]
    fn horst_single_step_worked_example() {
        let mut theta = vec![1.0];
        let mut oracle = GradOracle::new(|_: &[f64]| vec![1.0]);
        let mut state = AdamState::new(1);
        let cfg = OptimizerConfig::horst_defaults().with_eta(0.1);
        let info = horst_step(&mut theta, &mut oracle, &mut state, &cfg, 0);
        assert_eq!(info.oracle_calls, 1);
        // u ~= 0.1, half step 0.9, then times exp(-0.5).
        assert!((theta[0] - 0.5459).abs() < 1e-3, "theta = {}", theta[0]);
    }

    #[test]
    fn horst_zero_gradient_keeps_theta_constant() {
        let mut theta = vec![0.7, -0.3];
        let mut oracle = GradOracle::new(|t: &[f64]| vec![0.0; t.len()]);
        let mut state = AdamState::new(2);
        let cfg = OptimizerConfig::horst_defaults().with_eta(0.1);
        for _ in 0..10 {
            horst_step(&mut theta, &mut oracle, &mut state, &cfg, 0);
        }
        assert_eq!(theta, vec![0.7, -0.3]);
    }

    #[test]
    fn pure_shrinkage_is_exactly_geometric() {
        // Zero gradient, beta > 0: each coordinate is multiplied by
        // exp(-eta*beta) every step, exactly.
        let eta = 0.05;
        let beta = 2.0;
        let factor = (-eta * beta as f64).exp();
        let mut theta = vec![1.0, -0.5, 0.25];
        let mut oracle = GradOracle::new(|t: &[f64]| vec![0.0; t.len()]);
        let mut state = AdamState::new(3);
        let cfg = OptimizerConfig::default()
            .with_eta(eta)
            .with_alpha(3.0)
            .with_beta(beta);
        let start = theta.clone();
        for k in 1..=20u32 {
            horst_step(&mut theta, &mut oracle, &mut state, &cfg, 0);
            for (t, s) in theta.iter().zip(&start) {
                let expected = s * factor.powi(k as i32);
                assert!(
                    (t - expected).abs() <= 1e-15 * expected.abs(),
                    "step {k}: {t} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn horst_and_ham_reduce_to_adamw_bit_exactly() {
        let n = 8;
        let theta0: Vec<f64> = (0..n).map(|i| 0.3 * (i as f64 + 1.0) * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let grad_fn = |t: &[f64]| -> Vec<f64> {
            t.iter()
                .enumerate()
                .map(|(i, x)| (x - 0.1 * i as f64).sin() + 0.2 * x)
                .collect()
        };
        let cfg = OptimizerConfig::default().with_eta(0.01).with_lambda(0.1);

        for kind in [OptimizerKind::Horst, OptimizerKind::Ham] {
            let mut theta_a = theta0.clone();
            let mut theta_b = theta0.clone();
            let mut adamw = Optimizer::new(OptimizerKind::AdamW, cfg, n);
            let mut other = Optimizer::new(kind.clone(), cfg, n);
            let mut oracle_a = GradOracle::new(grad_fn);
            let mut oracle_b = GradOracle::new(grad_fn);
            for _ in 0..500 {
                adamw.step(&mut theta_a, &mut oracle_a).unwrap();
                other.step(&mut theta_b, &mut oracle_b).unwrap();
            }
            assert_eq!(theta_a, theta_b, "{} at alpha=beta=0 diverged from adamw", kind.name());
        }
    }

    #[test]
    fn each_optimizer_consumes_one_gradient_per_step() {
        let n = 4;
        let kinds: Vec<OptimizerKind<f64>> = vec![
            OptimizerKind::Sgd,
            OptimizerKind::SignSgd,
            OptimizerKind::Adam,
            OptimizerKind::AdamW,
            OptimizerKind::exp_sgd(),
            OptimizerKind::exp_adam(),
            OptimizerKind::adam_exp(),
            OptimizerKind::Ham,
            OptimizerKind::Horst,
            OptimizerKind::MirrorDescent(MirrorMap::hyperbolic_entropy(0.01)),
        ];
        for kind in kinds {
            let mut theta = vec![0.5, -0.5, 1.0, -1.0];
            let cfg = OptimizerConfig::horst_defaults().with_eta(0.01);
            let mut opt = Optimizer::new(kind.clone(), cfg, n);
            let mut oracle = GradOracle::new(|t: &[f64]| t.iter().map(|x| x.cos()).collect());
            for s in 1..=25u64 {
                let info = opt.step(&mut theta, &mut oracle).unwrap();
                assert_eq!(info.oracle_calls, 1, "{}", kind.name());
                assert_eq!(oracle.call_count(), s, "{}", kind.name());
            }
        }
    }

    #[test]
    fn signsgd_absorbs_the_mirror_rescaling() {
        // Feeding |theta| ⊙ g to a sign base gives the plain sign update
        // wherever theta is nonzero.
        let theta0 = vec![0.5, -2.0, 1.5];
        let cfg = OptimizerConfig::default().with_eta(0.1);
        let grad_fn = |t: &[f64]| -> Vec<f64> { t.iter().map(|x| x - 3.0).collect() };

        let mut plain = theta0.clone();
        let mut composed = theta0.clone();
        let mut opt_plain = Optimizer::new(OptimizerKind::<f64>::SignSgd, cfg, 3);
        let mut opt_comp = Optimizer::new(
            OptimizerKind::Composed {
                order: ComposeOrder::BaseAfterExp,
                base: BaseKind::SignSgd,
            },
            cfg,
            3,
        );
        let mut oracle_a = GradOracle::new(grad_fn);
        let mut oracle_b = GradOracle::new(grad_fn);
        for _ in 0..50 {
            opt_plain.step(&mut plain, &mut oracle_a).unwrap();
            opt_comp.step(&mut composed, &mut oracle_b).unwrap();
        }
        assert_eq!(plain, composed);
    }

    #[test]
    fn exp_after_adam_with_zero_alpha_is_plain_adam() {
        let theta0 = vec![0.4, -0.8];
        let cfg = OptimizerConfig::default().with_eta(0.05);
        let grad_fn = |t: &[f64]| -> Vec<f64> { t.iter().map(|x| 2.0 * x).collect() };
        let mut a = theta0.clone();
        let mut b = theta0.clone();
        let mut adam = Optimizer::new(OptimizerKind::<f64>::Adam, cfg, 2);
        let mut comp = Optimizer::new(OptimizerKind::<f64>::exp_adam(), cfg, 2);
        let mut oa = GradOracle::new(grad_fn);
        let mut ob = GradOracle::new(grad_fn);
        for _ in 0..100 {
            adam.step(&mut a, &mut oa).unwrap();
            comp.step(&mut b, &mut ob).unwrap();
        }
        assert_eq!(a, b);
    }

    #[test]
    fn schedule_shapes() {
        let cosine = Schedule {
            kind: ScheduleKind::Cosine,
            warmup: 10,
            total: 110,
        };
        assert!((cosine.factor(0) - 0.1).abs() < 1e-12);
        assert!((cosine.factor(9) - 1.0).abs() < 1e-12);
        assert!((cosine.factor(10) - 1.0).abs() < 1e-12);
        assert!(cosine.factor(110) < 1e-12);

        let tri = Schedule {
            kind: ScheduleKind::Triangular,
            warmup: 0,
            total: 100,
        };
        assert!((tri.factor(0) - 1.0).abs() < 1e-12);
        assert!((tri.factor(50) - 0.5).abs() < 1e-12);

        let constant = Schedule::constant();
        assert_eq!(constant.factor(12345), 1.0);
    }

    #[test]
    fn non_finite_updates_are_reported() {
        let mut theta = vec![1.0];
        let cfg = OptimizerConfig::default().with_eta(1.0);
        let mut opt = Optimizer::new(OptimizerKind::<f64>::Sgd, cfg, 1);
        let mut oracle = GradOracle::new(|_: &[f64]| vec![f64::INFINITY]);
        assert!(opt.step(&mut theta, &mut oracle).is_err());
    }
}
