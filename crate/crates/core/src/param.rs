//! Flat parameter vectors with named segments, and gradient oracles.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A named contiguous slice of a parameter vector (one tensor's worth of
/// coordinates). Pruning thresholds are computed per segment.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Segment {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl Segment {
    pub fn new(name: impl Into<String>, start: usize, len: usize) -> Self {
        Self {
            name: name.into(),
            start,
            len,
        }
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Flat real parameter vector with named segments covering `[0, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector<T: Scalar> {
    values: Vec<T>,
    segments: Vec<Segment>,
}

impl<T: Scalar> ParamVector<T> {
    /// Single-segment vector named `"all"`.
    pub fn new(values: Vec<T>) -> Self {
        let len = values.len();
        Self {
            values,
            segments: vec![Segment::new("all", 0, len)],
        }
    }

    /// Vector with an explicit segment table. Segments must be disjoint,
    /// in order, and cover `[0, n)` exactly.
    pub fn with_segments(values: Vec<T>, segments: Vec<Segment>) -> Result<Self> {
        let mut cursor = 0usize;
        for seg in &segments {
            if seg.start != cursor {
                return Err(Error::InvalidArgument(format!(
                    "segment '{}' starts at {} but previous coverage ends at {}",
                    seg.name, seg.start, cursor
                )));
            }
            cursor = seg.start + seg.len;
        }
        if cursor != values.len() {
            return Err(Error::InvalidArgument(format!(
                "segments cover [0, {}) but vector has length {}",
                cursor,
                values.len()
            )));
        }
        Ok(Self { values, segments })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, name: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.name == name)
    }

    pub fn segment_values(&self, name: &str) -> Option<&[T]> {
        self.segment(name).map(|s| &self.values[s.range()])
    }

    /// Errors if any coordinate is NaN or infinite.
    pub fn check_finite(&self, context: &str) -> Result<()> {
        for (i, v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!(
                    "{context}: coordinate {i} is {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Gradient oracle `g : R^n -> R^n` with an evaluation counter.
///
/// The counter backs the one-evaluation-per-step contract of the alternating
/// optimizers.
pub struct GradOracle<'a, T: Scalar> {
    eval: Box<dyn FnMut(&[T]) -> Vec<T> + 'a>,
    pub deterministic: bool,
    pub seed: u64,
    calls: u64,
}

impl<'a, T: Scalar> GradOracle<'a, T> {
    pub fn new(eval: impl FnMut(&[T]) -> Vec<T> + 'a) -> Self {
        Self {
            eval: Box::new(eval),
            deterministic: true,
            seed: 0,
            calls: 0,
        }
    }

    pub fn stochastic(eval: impl FnMut(&[T]) -> Vec<T> + 'a, seed: u64) -> Self {
        Self {
            eval: Box::new(eval),
            deterministic: false,
            seed,
            calls: 0,
        }
    }

    pub fn eval(&mut self, theta: &[T]) -> Vec<T> {
        self.calls += 1;
        let g = (self.eval)(theta);
        debug_assert_eq!(g.len(), theta.len(), "oracle output length mismatch");
        g
    }

    pub fn call_count(&self) -> u64 {
        self.calls
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segments_must_tile_the_vector() {
        let segs = vec![Segment::new("a", 0, 2), Segment::new("b", 2, 3)];
        let pv = ParamVector::with_segments(vec![1.0f64; 5], segs).unwrap();
        assert_eq!(pv.segment_values("b").unwrap().len(), 3);

        let gap = vec![Segment::new("a", 0, 2), Segment::new("b", 3, 2)];
        assert!(ParamVector::with_segments(vec![1.0f64; 5], gap).is_err());

        let short = vec![Segment::new("a", 0, 2)];
        assert!(ParamVector::with_segments(vec![1.0f64; 5], short).is_err());
    }

    #[test]
    fn finite_check_flags_nan() {
        let mut pv = ParamVector::new(vec![1.0f64, 2.0]);
        assert!(pv.check_finite("test").is_ok());
        pv.values_mut()[1] = f64::NAN;
        assert!(pv.check_finite("test").is_err());
    }

    #[test]
    fn oracle_counts_calls() {
        let mut oracle = GradOracle::new(|theta: &[f64]| theta.to_vec());
        let theta = [1.0, 2.0];
        assert_eq!(oracle.call_count(), 0);
        let g = oracle.eval(&theta);
        assert_eq!(g, vec![1.0, 2.0]);
        assert_eq!(oracle.call_count(), 1);
        oracle.eval(&theta);
        assert_eq!(oracle.call_count(), 2);
    }

    #[test]
    fn repeated_eval_of_deterministic_oracle_is_identical() {
        let mut oracle = GradOracle::new(|theta: &[f64]| theta.iter().map(|x| x * 2.0).collect());
        let theta = [0.5, -1.5, 3.0];
        let a = oracle.eval(&theta);
        let b = oracle.eval(&theta);
        assert_eq!(a, b);
    }
}
