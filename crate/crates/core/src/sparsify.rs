//! Unstructured magnitude pruning, alternating dense/sparse training, and
//! weight-distribution diagnostics.
//!
//! Pruning is layerwise: the threshold is computed independently per
//! parameter segment, never globally, and each covered segment loses exactly
//! `floor(s * len)` entries.

use std::path::Path;

use crate::error::{Error, Result};
use crate::optim::{norm_triple, AdamState, Optimizer, OptimizerConfig, OptimizerKind, StepRecord};
use crate::param::{ParamVector, Segment};
use crate::problems::SupervisedTask;

// ---------------------------------------------------------------------------
// Masks
// ---------------------------------------------------------------------------

/// Provenance of a mask: which pruning event produced it.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MaskEvent {
    pub iteration: u64,
    pub rule: String,
}

/// Binary keep/zero mask over a parameter vector. Entries of uncovered
/// segments are always kept.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SparsityMask {
    /// true = keep, false = zero.
    pub bits: Vec<bool>,
    pub target_sparsity: f64,
    /// Names of the segments the mask covers.
    pub scope: Vec<String>,
    pub event: MaskEvent,
}

impl SparsityMask {
    pub fn all_ones(len: usize) -> Self {
        Self {
            bits: vec![true; len],
            target_sparsity: 0.0,
            scope: Vec::new(),
            event: MaskEvent {
                iteration: 0,
                rule: "identity".into(),
            },
        }
    }

    pub fn masked_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, keep)| !**keep)
            .map(|(i, _)| i)
    }

    pub fn zero_count(&self) -> usize {
        self.bits.iter().filter(|keep| !**keep).count()
    }

    pub fn zero_count_in(&self, segment: &Segment) -> usize {
        self.bits[segment.range()].iter().filter(|k| !**k).count()
    }

    /// True when every zero of `other` is also a zero here.
    pub fn contains_zeros_of(&self, other: &Self) -> bool {
        self.bits
            .iter()
            .zip(&other.bits)
            .all(|(mine, theirs)| *theirs || !*mine)
    }
}

/// Zero, per covered segment, the `floor(s * len)` entries of smallest
/// magnitude; ties go to the lowest index. Segments outside `scope` are
/// untouched.
pub fn magnitude_prune(
    theta: &ParamVector<f64>,
    sparsity: f64,
    scope: &[String],
    iteration: u64,
) -> Result<SparsityMask> {
    if !(0.0..1.0).contains(&sparsity) {
        return Err(Error::InvalidArgument(format!(
            "sparsity must be in [0, 1), got {sparsity}"
        )));
    }
    for name in scope {
        if theta.segment(name).is_none() {
            return Err(Error::InvalidArgument(format!(
                "unknown segment '{name}' in pruning scope"
            )));
        }
    }
    let mut bits = vec![true; theta.len()];
    for seg in theta.segments() {
        if !scope.iter().any(|s| s == &seg.name) {
            continue;
        }
        let k = (sparsity * seg.len as f64).floor() as usize;
        if k == 0 {
            continue;
        }
        let values = &theta.values()[seg.range()];
        let mut order: Vec<usize> = (0..seg.len).collect();
        order.sort_by(|&a, &b| {
            values[a]
                .abs()
                .partial_cmp(&values[b].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        for &local in order.iter().take(k) {
            bits[seg.start + local] = false;
        }
    }
    Ok(SparsityMask {
        bits,
        target_sparsity: sparsity,
        scope: scope.to_vec(),
        event: MaskEvent {
            iteration,
            rule: "magnitude".into(),
        },
    })
}

/// Elementwise product of the parameters with the mask.
pub fn apply_mask(theta: &mut ParamVector<f64>, mask: &SparsityMask) {
    for (v, keep) in theta.values_mut().iter_mut().zip(&mask.bits) {
        if !*keep {
            *v = 0.0;
        }
    }
}

/// Reset the Adam moments of every masked coordinate; called at pruning
/// events so stale momentum cannot revive pruned weights.
pub fn zero_masked_moments(state: &mut AdamState<f64>, mask: &SparsityMask) {
    state.zero_moments(mask.masked_indices());
}

// ---------------------------------------------------------------------------
// Alternating dense/sparse schedule
// ---------------------------------------------------------------------------

/// Phase layout: `warmup_dense` dense steps, then `pairs` blocks of
/// (sparse, dense) each `phase_length` long, then `final_sparse` sparse
/// steps. The identity `warmup + 2*pairs*phase + final == total` must hold.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AcdcSchedule {
    pub total_steps: usize,
    pub warmup_dense: usize,
    pub phase_length: usize,
    pub final_sparse: usize,
    pub pairs: usize,
    pub sparsity: f64,
}

/// What happens at the start of a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseEvent {
    /// A sparse phase starts: prune and freeze.
    Prune,
    /// A dense phase starts: release the mask.
    Release,
}

impl AcdcSchedule {
    pub fn new(
        total_steps: usize,
        warmup_dense: usize,
        phase_length: usize,
        final_sparse: usize,
        pairs: usize,
        sparsity: f64,
    ) -> Result<Self> {
        if pairs == 0 || phase_length == 0 {
            return Err(Error::Config(
                "alternation needs at least one (sparse, dense) pair of positive length".into(),
            ));
        }
        if warmup_dense + 2 * pairs * phase_length + final_sparse != total_steps {
            return Err(Error::Config(format!(
                "schedule does not tile: {warmup_dense} + 2*{pairs}*{phase_length} + {final_sparse} != {total_steps}"
            )));
        }
        if !(0.0..1.0).contains(&sparsity) {
            return Err(Error::Config(format!("sparsity {sparsity} out of range")));
        }
        Ok(Self {
            total_steps,
            warmup_dense,
            phase_length,
            final_sparse,
            pairs,
            sparsity,
        })
    }

    /// 10% dense warmup, five (sparse, dense) pairs, and a final sparse
    /// stretch absorbing the remainder (at least 20%).
    pub fn default_for(total_steps: usize, sparsity: f64) -> Result<Self> {
        let warmup = total_steps / 10;
        let final_base = total_steps / 5;
        let pairs = 5;
        let phase = (total_steps - warmup - final_base) / (2 * pairs);
        if phase == 0 {
            return Err(Error::Config(format!(
                "total_steps {total_steps} too small for the default layout"
            )));
        }
        let final_sparse = total_steps - warmup - 2 * pairs * phase;
        Self::new(total_steps, warmup, phase, final_sparse, pairs, sparsity)
    }

    /// Is `step` inside a sparse phase?
    pub fn is_sparse(&self, step: usize) -> bool {
        if step < self.warmup_dense {
            return false;
        }
        let r = step - self.warmup_dense;
        if r < 2 * self.pairs * self.phase_length {
            (r % (2 * self.phase_length)) < self.phase_length
        } else {
            true
        }
    }

    /// Phase-boundary event at the start of `step`, if any.
    pub fn event_at(&self, step: usize) -> Option<PhaseEvent> {
        if step == 0 {
            return None;
        }
        match (self.is_sparse(step - 1), self.is_sparse(step)) {
            (false, true) => Some(PhaseEvent::Prune),
            (true, false) => Some(PhaseEvent::Release),
            _ => None,
        }
    }
}

/// One recorded training step.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct AcdcRecord {
    #[serde(flatten)]
    pub step: StepRecord,
    pub sparse_phase: bool,
}

/// Result of an alternating dense/sparse run.
#[derive(Debug, Clone)]
pub struct AcdcRun {
    pub theta: ParamVector<f64>,
    pub history: Vec<AcdcRecord>,
    /// Steps at which a mask was created.
    pub prune_events: Vec<usize>,
    /// Steps at which the mask was released.
    pub release_events: Vec<usize>,
    pub final_mask: Option<SparsityMask>,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
    pub val_loss: f64,
}

/// Train with the alternating schedule: dense warmup, then per sparse phase a
/// fresh magnitude mask whose coordinates are frozen (gradients zeroed, mask
/// re-applied after every step), released again at each dense phase, ending
/// with sparse fine-tuning under the last mask.
pub fn acdc_train(
    task: &dyn SupervisedTask,
    kind: OptimizerKind<f64>,
    cfg: OptimizerConfig,
    sched: &AcdcSchedule,
    exempt_first_last: bool,
) -> Result<AcdcRun> {
    let mut theta = task.init_params();
    let mut scope = task.prunable_segments();
    if exempt_first_last && scope.len() > 2 {
        scope = scope[1..scope.len() - 1].to_vec();
    }
    if scope.is_empty() {
        return Err(Error::Config("nothing to prune: empty scope".into()));
    }
    for name in &scope {
        if theta.segment(name).is_none() {
            return Err(Error::Config(format!("scope names unknown segment '{name}'")));
        }
    }

    let mut opt = Optimizer::new(kind, cfg, theta.len());
    let mut mask: Option<SparsityMask> = None;
    let mut history = Vec::with_capacity(sched.total_steps);
    let mut prune_events = Vec::new();
    let mut release_events = Vec::new();

    for step in 0..sched.total_steps {
        match sched.event_at(step) {
            Some(PhaseEvent::Prune) => {
                let m = magnitude_prune(&theta, sched.sparsity, &scope, step as u64)?;
                apply_mask(&mut theta, &m);
                if let Some(state) = opt.adam_state_mut() {
                    zero_masked_moments(state, &m);
                }
                prune_events.push(step);
                mask = Some(m);
            }
            Some(PhaseEvent::Release) => {
                release_events.push(step);
                mask = None;
            }
            None => {
                if step == 0 && sched.is_sparse(0) {
                    return Err(Error::Config("schedule must begin dense".into()));
                }
            }
        }

        let (loss, mut grad) = task.train_loss_grad(theta.values());
        if let Some(m) = &mask {
            for i in m.masked_indices() {
                grad[i] = 0.0;
            }
        }
        let before = theta.values().to_vec();
        opt.step_with_grad(theta.values_mut(), &grad)?;
        if let Some(m) = &mask {
            apply_mask(&mut theta, m);
        }
        let update: Vec<f64> = before
            .iter()
            .zip(theta.values())
            .map(|(b, a)| b - a)
            .collect();
        history.push(AcdcRecord {
            step: StepRecord {
                iteration: step as u64,
                loss,
                grad_norms: norm_triple(&grad),
                update_norms: norm_triple(&update),
                theta_snapshot_id: None,
            },
            sparse_phase: sched.is_sparse(step),
        });
    }
    theta.check_finite("acdc_train")?;

    Ok(AcdcRun {
        train_accuracy: task.train_accuracy(theta.values()),
        val_accuracy: task.val_accuracy(theta.values()),
        val_loss: task.val_loss(theta.values()),
        theta,
        history,
        prune_events,
        release_events,
        final_mask: mask,
    })
}

// ---------------------------------------------------------------------------
// One-shot pruning evaluation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct PruneCurvePoint {
    pub sparsity: f64,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

/// Magnitude-prune a trained dense checkpoint at each grid sparsity and
/// evaluate; no fine-tuning, recovery, or calibration.
pub fn one_shot_prune_eval(
    theta_dense: &ParamVector<f64>,
    task: &dyn SupervisedTask,
    grid: &[f64],
) -> Result<Vec<PruneCurvePoint>> {
    let scope = task.prunable_segments();
    let mut curve = Vec::with_capacity(grid.len());
    for &s in grid {
        let mut theta = theta_dense.clone();
        let mask = magnitude_prune(&theta, s, &scope, 0)?;
        apply_mask(&mut theta, &mask);
        let (train_loss, _) = task.train_loss_grad(theta.values());
        curve.push(PruneCurvePoint {
            sparsity: s,
            train_loss,
            train_accuracy: task.train_accuracy(theta.values()),
            val_loss: task.val_loss(theta.values()),
            val_accuracy: task.val_accuracy(theta.values()),
        });
    }
    Ok(curve)
}

// ---------------------------------------------------------------------------
// Weight-distribution report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct WeightDistributionReport {
    /// Histogram of standardized weights over [-5, 5] (raw weights when
    /// degenerate); outliers land in the edge bins.
    pub histogram: Vec<u64>,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub mean: f64,
    pub std: f64,
    pub excess_kurtosis: f64,
    /// Fraction of weights within 0.1 standard deviations of zero.
    pub frac_near_zero: f64,
    /// `‖theta‖₁ / ‖theta‖₂`.
    pub l1_l2_ratio: f64,
    pub degenerate: bool,
}

pub fn weight_distribution_report(values: &[f64], bins: usize) -> Result<WeightDistributionReport> {
    if values.is_empty() || bins == 0 {
        return Err(Error::InvalidArgument(
            "distribution report needs values and at least one bin".into(),
        ));
    }
    let n = values.len() as f64;
    let l1: f64 = values.iter().map(|v| v.abs()).sum();
    let l2: f64 = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if l2 == 0.0 {
        return Err(Error::InvalidArgument(
            "distribution report needs a nonzero vector".into(),
        ));
    }
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = m2.sqrt();
    let degenerate = std == 0.0;

    let (lo, hi, samples): (f64, f64, Vec<f64>) = if degenerate {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min) - 0.5;
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 0.5;
        (lo, hi, values.to_vec())
    } else {
        (-5.0, 5.0, values.iter().map(|v| (v - mean) / std).collect())
    };
    let mut histogram = vec![0u64; bins];
    let width = (hi - lo) / bins as f64;
    for v in &samples {
        let idx = (((v - lo) / width).floor() as i64).clamp(0, bins as i64 - 1) as usize;
        histogram[idx] += 1;
    }
    let excess_kurtosis = if degenerate {
        0.0
    } else {
        let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
        m4 / (m2 * m2) - 3.0
    };
    let frac_near_zero = if degenerate {
        values.iter().filter(|v| **v == 0.0).count() as f64 / n
    } else {
        values.iter().filter(|v| v.abs() < 0.1 * std).count() as f64 / n
    };
    Ok(WeightDistributionReport {
        histogram,
        bin_lo: lo,
        bin_hi: hi,
        mean,
        std,
        excess_kurtosis,
        frac_near_zero,
        l1_l2_ratio: l1 / l2,
        degenerate,
    })
}

// ---------------------------------------------------------------------------
// Checkpoint and mask files
// ---------------------------------------------------------------------------

/// Sidecar written next to every checkpoint or mask file.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CheckpointMeta {
    pub segments: Vec<Segment>,
    pub seed: u64,
    pub optimizer_kind: Option<String>,
    pub optimizer: Option<OptimizerConfig>,
    pub schedule: Option<AcdcSchedule>,
    pub rng: String,
}

/// Write `<base>.bin` (little-endian f64) and `<base>.json`.
pub fn save_checkpoint(base: &Path, theta: &ParamVector<f64>, meta: &CheckpointMeta) -> Result<()> {
    let mut bytes = Vec::with_capacity(theta.len() * 8);
    for v in theta.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(base.with_extension("bin"), bytes)?;
    std::fs::write(
        base.with_extension("json"),
        serde_json::to_string_pretty(meta)?,
    )?;
    Ok(())
}

pub fn load_checkpoint(base: &Path) -> Result<(ParamVector<f64>, CheckpointMeta)> {
    let meta: CheckpointMeta =
        serde_json::from_str(&std::fs::read_to_string(base.with_extension("json"))?)?;
    let bytes = std::fs::read(base.with_extension("bin"))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::InvalidArgument("checkpoint length not a multiple of 8".into()));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let theta = ParamVector::with_segments(values, meta.segments.clone())?;
    Ok((theta, meta))
}

/// Write `<base>.maskbin` (bit-packed, LSB first) and `<base>.maskjson`.
pub fn save_mask(base: &Path, mask: &SparsityMask) -> Result<()> {
    let mut bytes = vec![0u8; mask.bits.len().div_ceil(8)];
    for (i, keep) in mask.bits.iter().enumerate() {
        if *keep {
            bytes[i / 8] |= 1 << (i % 8);
        }
    }
    std::fs::write(base.with_extension("maskbin"), bytes)?;
    let sidecar = serde_json::json!({
        "len": mask.bits.len(),
        "target_sparsity": mask.target_sparsity,
        "scope": mask.scope,
        "event": mask.event,
    });
    std::fs::write(
        base.with_extension("maskjson"),
        serde_json::to_string_pretty(&sidecar)?,
    )?;
    Ok(())
}

pub fn load_mask(base: &Path) -> Result<SparsityMask> {
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(base.with_extension("maskjson"))?)?;
    let len = sidecar["len"].as_u64().unwrap_or(0) as usize;
    let bytes = std::fs::read(base.with_extension("maskbin"))?;
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::InvalidArgument("mask bit length mismatch".into()));
    }
    let bits: Vec<bool> = (0..len).map(|i| bytes[i / 8] & (1 << (i % 8)) != 0).collect();
    Ok(SparsityMask {
        bits,
        target_sparsity: sidecar["target_sparsity"].as_f64().unwrap_or(0.0),
        scope: serde_json::from_value(sidecar["scope"].clone())?,
        event: serde_json::from_value(sidecar["event"].clone())?,
    })
}
