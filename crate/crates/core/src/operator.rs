//! Optimizer update rules as composable operators.
//!
//! An operator maps a parameter vector and a gradient to a step direction,
//! `(theta, g) -> d`. Composition feeds one operator's output to another in
//! place of the gradient: `(A ∘ B)(theta, g) = A(theta, B(theta, g))`. The
//! composition order matters; [`commutator_residual`] measures by how much.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{norm_l2, Scalar};

/// A direction-producing map `(theta, g) -> d` with a human-readable label.
///
/// Operators are pure: all optimizer statefulness (moments, step counters)
/// lives in [`crate::optim`], not here.
#[derive(Clone)]
pub struct Operator<T: Scalar> {
    label: String,
    apply: Arc<dyn Fn(&[T], &[T]) -> Vec<T> + Send + Sync>,
}

impl<T: Scalar> Operator<T> {
    pub fn new(
        label: impl Into<String>,
        apply: impl Fn(&[T], &[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            apply: Arc::new(apply),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluate the operator. Errors on input length mismatch; the output
    /// length always equals the input length.
    pub fn apply(&self, theta: &[T], grad: &[T]) -> Result<Vec<T>> {
        if theta.len() != grad.len() {
            return Err(Error::DimensionMismatch {
                context: "operator apply",
                left: theta.len(),
                right: grad.len(),
            });
        }
        let out = (self.apply)(theta, grad);
        debug_assert_eq!(out.len(), theta.len(), "operator changed dimension");
        Ok(out)
    }
}

impl<T: Scalar> std::fmt::Debug for Operator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Operator({})", self.label)
    }
}

/// `compose(a, b)` returns the operator `(theta, g) -> a(theta, b(theta, g))`:
/// `b` produces a modified direction and `a` acts on it instead of the gradient.
pub fn compose<T: Scalar>(a: &Operator<T>, b: &Operator<T>) -> Operator<T> {
    let label = format!("{}∘{}", a.label, b.label);
    let fa = Arc::clone(&a.apply);
    let fb = Arc::clone(&b.apply);
    Operator {
        label,
        apply: Arc::new(move |theta, g| {
            let inner = fb(theta, g);
            fa(theta, &inner)
        }),
    }
}

/// `‖AB(theta,g) − BA(theta,g)‖₂`: zero exactly when the two operators commute
/// at this evaluation point.
pub fn commutator_residual<T: Scalar>(
    a: &Operator<T>,
    b: &Operator<T>,
    theta: &[T],
    grad: &[T],
) -> Result<T> {
    let ab = compose(a, b).apply(theta, grad)?;
    let ba = compose(b, a).apply(theta, grad)?;
    let diff: Vec<T> = ab.iter().zip(&ba).map(|(x, y)| *x - *y).collect();
    Ok(norm_l2(&diff))
}

/// Result of an empirical boundedness probe: the largest observed value of
/// `‖A(theta, g)‖₂ / (1 + ‖theta‖₂)` and the sample attaining it.
///
/// The probe uses the L2 norm; `dimension` is recorded so norm-equivalence
/// constants can be applied externally.
#[derive(Debug, Clone)]
pub struct BoundednessReport<T: Scalar> {
    pub max_ratio: T,
    pub witness_theta: Vec<T>,
    pub witness_grad: Vec<T>,
    pub sample_count: usize,
    pub dimension: usize,
}

/// Probe how the step norm scales with the parameter norm across samples.
/// A bounded operator keeps the ratio under a constant; an unbounded one
/// (e.g. a plain mirror rescaling fed growing gradients) does not.
pub fn boundedness_ratio<T: Scalar>(
    op: &Operator<T>,
    samples: &[(Vec<T>, Vec<T>)],
) -> Result<BoundednessReport<T>> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument(
            "boundedness probe needs at least one (theta, g) sample".into(),
        ));
    }
    let mut best: Option<(T, usize)> = None;
    for (i, (theta, grad)) in samples.iter().enumerate() {
        let d = op.apply(theta, grad)?;
        let ratio = norm_l2(&d) / (T::one() + norm_l2(theta));
        match best {
            Some((r, _)) if r >= ratio => {}
            _ => best = Some((ratio, i)),
        }
    }
    let (max_ratio, idx) = best.unwrap();
    Ok(BoundednessReport {
        max_ratio,
        witness_theta: samples[idx].0.clone(),
        witness_grad: samples[idx].1.clone(),
        sample_count: samples.len(),
        dimension: samples[idx].0.len(),
    })
}
