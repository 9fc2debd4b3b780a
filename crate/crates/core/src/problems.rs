//! Synthetic tasks with analytic gradients: sparse-teacher linear
//! classification, depth-p diagonal (Hadamard) reparameterizations, and a
//! small two-layer network for the sparsification harness.

use std::io::Write as _;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::flows::MarginProblem;
use crate::param::{ParamVector, Segment};

/// RNG used for all dataset and initialization sampling; the name is recorded
/// in experiment sidecars.
pub const RNG_ALGORITHM: &str = "ChaCha12";

// ---------------------------------------------------------------------------
// Sparse-teacher linear classification
// ---------------------------------------------------------------------------

/// Gaussian features labeled by a sparse teacher: `y = sign(<teacher, x>)`,
/// teacher supported on the first `s_star` coordinates.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SparseTeacherDataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub teacher: Vec<f64>,
    pub d: usize,
    pub n: usize,
    pub s_star: usize,
    pub seed: u64,
}

/// Teacher support magnitudes are uniform in [0.5, 1.5] with random signs:
/// bounded away from zero so the support is unambiguous.
pub fn make_sparse_teacher(d: usize, n: usize, s_star: usize, seed: u64) -> Result<SparseTeacherDataset> {
    if s_star == 0 || s_star > d || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= s_star <= d and n >= 1, got d={d}, n={n}, s_star={s_star}"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut teacher = vec![0.0f64; d];
    for t in teacher.iter_mut().take(s_star) {
        let mag: f64 = rng.random_range(0.5..1.5);
        let s: f64 = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        *t = s * mag;
    }
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    while x.len() < n {
        let row: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let m: f64 = teacher.iter().zip(&row).map(|(a, b)| a * b).sum();
        if m == 0.0 {
            continue;
        }
        y.push(m.signum());
        x.push(row);
    }
    Ok(SparseTeacherDataset {
        x,
        y,
        teacher,
        d,
        n,
        s_star,
        seed,
    })
}

impl SparseTeacherDataset {
    pub fn margins(&self, theta: &[f64]) -> Vec<f64> {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(xi, yi)| yi * xi.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    /// Log of the mean exponential loss, stable for any margin scale.
    pub fn exp_log_loss(&self, theta: &[f64]) -> f64 {
        let margins = self.margins(theta);
        let max = margins.iter().map(|m| -m).fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = margins.iter().map(|m| (-m - max).exp()).sum();
        max + sum.ln() - (self.n as f64).ln()
    }

    /// Mean exponential margin loss and its analytic full-batch gradient.
    pub fn exp_loss_and_grad(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let margins = self.margins(theta);
        let inv_n = 1.0 / self.n as f64;
        let mut grad = vec![0.0f64; self.d];
        for ((xi, yi), m) in self.x.iter().zip(&self.y).zip(&margins) {
            let w = (-m).exp() * inv_n;
            for (gj, xj) in grad.iter_mut().zip(xi) {
                *gj -= yi * w * xj;
            }
        }
        (self.exp_log_loss(theta).exp(), grad)
    }

    pub fn to_margin_problem(&self) -> MarginProblem {
        MarginProblem {
            x: self.x.clone(),
            y: self.y.clone(),
        }
    }

    /// Write `data.csv` (feature columns then the label) and a JSON sidecar
    /// with the generator parameters.
    pub fn export(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut csv = std::fs::File::create(dir.join("data.csv"))?;
        let header: Vec<String> = (0..self.d).map(|j| format!("x{j}")).collect();
        writeln!(csv, "{},y", header.join(","))?;
        for (row, label) in self.x.iter().zip(&self.y) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(csv, "{},{}", cells.join(","), label)?;
        }
        let sidecar = serde_json::json!({
            "seed": self.seed,
            "d": self.d,
            "n": self.n,
            "s_star": self.s_star,
            "teacher": self.teacher,
            "rng": RNG_ALGORITHM,
        });
        std::fs::write(dir.join("data.json"), serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }

    pub fn import(dir: &Path) -> Result<Self> {
        let sidecar: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join("data.json"))?)?;
        let d = sidecar["d"].as_u64().unwrap_or(0) as usize;
        let teacher: Vec<f64> = serde_json::from_value(sidecar["teacher"].clone())?;
        let text = std::fs::read_to_string(dir.join("data.csv"))?;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for line in text.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != d + 1 {
                return Err(Error::InvalidArgument(format!(
                    "csv row has {} cells, expected {}",
                    cells.len(),
                    d + 1
                )));
            }
            let row: std::result::Result<Vec<f64>, _> =
                cells[..d].iter().map(|c| c.parse::<f64>()).collect();
            let row = row.map_err(|e| Error::InvalidArgument(format!("bad csv number: {e}")))?;
            let label: f64 = cells[d]
                .parse()
                .map_err(|e| Error::InvalidArgument(format!("bad csv label: {e}")))?;
            x.push(row);
            y.push(label);
        }
        Ok(Self {
            n: x.len(),
            x,
            y,
            teacher,
            d,
            s_star: sidecar["s_star"].as_u64().unwrap_or(0) as usize,
            seed: sidecar["seed"].as_u64().unwrap_or(0),
        })
    }
}

// ---------------------------------------------------------------------------
// Support-recovery metrics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SupportMetrics {
    /// Are the teacher-support coordinates exactly the largest `s_star`
    /// entries of `|theta|`?
    pub top_k_hit: bool,
    /// Fraction of off-support coordinates with `|theta_j| / ‖theta‖∞ < 0.1`.
    pub spurious_quiet: f64,
    /// Fraction of all coordinates with `|theta_j| / ‖theta‖∞ > 0.9`.
    pub saturation: f64,
    /// Set when `‖theta‖∞ = 0`; all metrics are reported as 0.
    pub degenerate: bool,
}

pub fn support_recovery_metrics(theta: &[f64], teacher: &[f64]) -> SupportMetrics {
    assert_eq!(theta.len(), teacher.len());
    let linf = theta.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if linf == 0.0 {
        return SupportMetrics {
            top_k_hit: false,
            spurious_quiet: 0.0,
            saturation: 0.0,
            degenerate: true,
        };
    }
    let support: Vec<usize> = (0..teacher.len()).filter(|&j| teacher[j] != 0.0).collect();
    let min_on_support = support
        .iter()
        .map(|&j| theta[j].abs())
        .fold(f64::INFINITY, f64::min);
    let max_off_support = (0..theta.len())
        .filter(|j| teacher[*j] == 0.0)
        .map(|j| theta[j].abs())
        .fold(0.0f64, f64::max);
    let top_k_hit = !support.is_empty() && min_on_support >= max_off_support;

    let off_count = theta.len() - support.len();
    let spurious_quiet = if off_count == 0 {
        1.0
    } else {
        (0..theta.len())
            .filter(|j| teacher[*j] == 0.0 && theta[*j].abs() / linf < 0.1)
            .count() as f64
            / off_count as f64
    };
    let saturation = theta.iter().filter(|t| t.abs() / linf > 0.9).count() as f64
        / theta.len() as f64;
    SupportMetrics {
        top_k_hit,
        spurious_quiet,
        saturation,
        degenerate: false,
    }
}

// ---------------------------------------------------------------------------
// Hadamard (diagonal) reparameterizations
// ---------------------------------------------------------------------------

/// Depth-p elementwise product model: the effective predictor is
/// `theta_j = prod_i w_{i,j}` and the loss is the dataset's exponential loss
/// at `theta`.
#[derive(Debug, Clone, Copy)]
pub struct HadamardModel {
    pub depth: usize,
    pub dim: usize,
}

impl HadamardModel {
    pub fn new(depth: usize, dim: usize) -> Result<Self> {
        if depth < 2 {
            return Err(Error::InvalidArgument("hadamard depth must be >= 2".into()));
        }
        Ok(Self { depth, dim })
    }

    /// The depth-2 `u ⊙ v` model.
    pub fn diagonal_uv(dim: usize) -> Self {
        Self { depth: 2, dim }
    }

    pub fn param_len(&self) -> usize {
        self.depth * self.dim
    }

    pub fn effective_theta(&self, w: &[f64]) -> Vec<f64> {
        let mut theta = vec![1.0f64; self.dim];
        for i in 0..self.depth {
            for j in 0..self.dim {
                theta[j] *= w[i * self.dim + j];
            }
        }
        theta
    }

    /// Balanced factors with `|w_{i,j}| = |theta_j|^(1/depth)`; the first
    /// factor carries the sign.
    pub fn balanced_init(&self, theta0: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0f64; self.param_len()];
        for j in 0..self.dim {
            let mag = theta0[j].abs().powf(1.0 / self.depth as f64);
            for i in 0..self.depth {
                w[i * self.dim + j] = if i == 0 { theta0[j].signum() * mag } else { mag };
            }
        }
        w
    }

    /// Loss and gradient with respect to the factors.
    pub fn loss_grad(&self, dataset: &SparseTeacherDataset, w: &[f64]) -> (f64, Vec<f64>) {
        let theta = self.effective_theta(w);
        let (loss, gtheta) = dataset.exp_loss_and_grad(&theta);
        let mut grad = vec![0.0f64; self.param_len()];
        for j in 0..self.dim {
            for i in 0..self.depth {
                let mut others = 1.0f64;
                for l in 0..self.depth {
                    if l != i {
                        others *= w[l * self.dim + j];
                    }
                }
                grad[i * self.dim + j] = gtheta[j] * others;
            }
        }
        (loss, grad)
    }
}

// ---------------------------------------------------------------------------
// Two-layer classification task
// ---------------------------------------------------------------------------

/// Gaussian-cluster multiclass data; class means live in a low-dimensional
/// informative subspace so sparse solutions exist.
#[derive(Debug, Clone)]
pub struct ClusterDataset {
    pub x: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub classes: usize,
}

/// Two-layer GELU network with softmax cross-entropy and a hand-written
/// backward pass. Parameter layout: segments `w1` (d*h), `b1` (h), `w2`
/// (h*c), `b2` (c).
#[derive(Debug, Clone)]
pub struct TwoLayerTask {
    pub train: ClusterDataset,
    pub val: ClusterDataset,
    pub input_dim: usize,
    pub hidden: usize,
    pub classes: usize,
    pub seed: u64,
}

/// Tanh-form GELU.
fn gelu(x: f64) -> f64 {
    const C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
    const A: f64 = 0.044715;
    0.5 * x * (1.0 + (C * (x + A * x * x * x)).tanh())
}

fn gelu_derivative(x: f64) -> f64 {
    const C: f64 = 0.797_884_560_802_865_4;
    const A: f64 = 0.044715;
    let u = C * (x + A * x * x * x);
    let t = u.tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * C * (1.0 + 3.0 * A * x * x)
}

pub const TWO_LAYER_INPUT_DIM: usize = 20;
pub const TWO_LAYER_HIDDEN: usize = 64;
pub const TWO_LAYER_CLASSES: usize = 4;
pub const TWO_LAYER_TRAIN_N: usize = 2000;
pub const TWO_LAYER_VAL_N: usize = 500;
/// Class means are supported on this many leading coordinates.
pub const TWO_LAYER_INFORMATIVE: usize = 6;
/// Distance of each class mean from the origin.
pub const TWO_LAYER_RADIUS: f64 = 2.2;

/// Build the standard desk-scale task: 4 balanced Gaussian clusters in 20
/// dimensions whose means span a 6-dimensional informative subspace
/// (orthogonal directions, radius 3), 2000 train and 500 validation points.
pub fn two_layer_task(seed: u64) -> TwoLayerTask {
    let d = TWO_LAYER_INPUT_DIM;
    let c = TWO_LAYER_CLASSES;
    let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9).wrapping_add(17));

    // Orthonormal class directions inside the informative subspace.
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(c);
    while means.len() < c {
        let mut v: Vec<f64> = (0..TWO_LAYER_INFORMATIVE)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        for prev in &means {
            let proj: f64 = v.iter().zip(prev).map(|(a, b)| a * b).sum();
            for (vi, pi) in v.iter_mut().zip(prev) {
                *vi -= proj * pi;
            }
        }
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        means.push(v);
    }
    let radius = TWO_LAYER_RADIUS;

    let sample_split = |count_per_class: usize, rng: &mut ChaCha12Rng| -> ClusterDataset {
        let mut x = Vec::with_capacity(count_per_class * c);
        let mut labels = Vec::with_capacity(count_per_class * c);
        for class in 0..c {
            for _ in 0..count_per_class {
                let mut row: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                for (j, m) in means[class].iter().enumerate() {
                    row[j] += radius * m;
                }
                x.push(row);
                labels.push(class);
            }
        }
        ClusterDataset { x, labels, classes: c }
    };

    let train = sample_split(TWO_LAYER_TRAIN_N / c, &mut rng);
    let val = sample_split(TWO_LAYER_VAL_N / c, &mut rng);
    TwoLayerTask {
        train,
        val,
        input_dim: d,
        hidden: TWO_LAYER_HIDDEN,
        classes: c,
        seed,
    }
}

impl TwoLayerTask {
    pub fn param_len(&self) -> usize {
        self.input_dim * self.hidden + self.hidden + self.hidden * self.classes + self.classes
    }

    pub fn segments(&self) -> Vec<Segment> {
        let (d, h, c) = (self.input_dim, self.hidden, self.classes);
        vec![
            Segment::new("w1", 0, d * h),
            Segment::new("b1", d * h, h),
            Segment::new("w2", d * h + h, h * c),
            Segment::new("b2", d * h + h + h * c, c),
        ]
    }

    /// Seeded Gaussian initialization scaled by fan-in; biases start at zero.
    pub fn init_params(&self) -> ParamVector<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed.wrapping_mul(31).wrapping_add(101));
        let (d, h, c) = (self.input_dim, self.hidden, self.classes);
        let mut values = vec![0.0f64; self.param_len()];
        let w1_scale = 1.0 / (d as f64).sqrt();
        for v in values.iter_mut().take(d * h) {
            let z: f64 = rng.sample(StandardNormal);
            *v = w1_scale * z;
        }
        let w2_scale = 1.0 / (h as f64).sqrt();
        for v in values.iter_mut().skip(d * h + h).take(h * c) {
            let z: f64 = rng.sample(StandardNormal);
            *v = w2_scale * z;
        }
        ParamVector::with_segments(values, self.segments()).expect("fixed layout")
    }

    fn unpack<'a>(&self, theta: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64], &'a [f64]) {
        let (d, h, c) = (self.input_dim, self.hidden, self.classes);
        let w1 = &theta[..d * h];
        let b1 = &theta[d * h..d * h + h];
        let w2 = &theta[d * h + h..d * h + h + h * c];
        let b2 = &theta[d * h + h + h * c..d * h + h + h * c + c];
        (w1, b1, w2, b2)
    }

    /// Returns per-unit pre-activations and logits.
    fn forward_pre(&self, theta: &[f64], row: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (w1, b1, w2, b2) = self.unpack(theta);
        let (d, h, c) = (self.input_dim, self.hidden, self.classes);
        let mut pre = vec![0.0f64; h];
        for (i, xi) in row.iter().enumerate().take(d) {
            if *xi != 0.0 {
                for j in 0..h {
                    pre[j] += xi * w1[i * h + j];
                }
            }
        }
        for (p, b) in pre.iter_mut().zip(b1) {
            *p += b;
        }
        let mut logits = b2.to_vec();
        for j in 0..h {
            let a = gelu(pre[j]);
            if a != 0.0 {
                for k in 0..c {
                    logits[k] += a * w2[j * c + k];
                }
            }
        }
        (pre, logits)
    }

    fn forward(&self, theta: &[f64], row: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (pre, logits) = self.forward_pre(theta, row);
        (pre.into_iter().map(gelu).collect(), logits)
    }

    /// Mean softmax cross-entropy and its gradient over a dataset.
    pub fn loss_grad(&self, theta: &[f64], data: &ClusterDataset) -> (f64, Vec<f64>) {
        let (d, h, c) = (self.input_dim, self.hidden, self.classes);
        let (_, _, w2, _) = self.unpack(theta);
        let n = data.x.len() as f64;
        let inv_n = 1.0 / n;
        let mut loss = 0.0f64;
        let mut grad = vec![0.0f64; self.param_len()];
        let (gw1, rest) = grad.split_at_mut(d * h);
        let (gb1, rest) = rest.split_at_mut(h);
        let (gw2, gb2) = rest.split_at_mut(h * c);

        for (row, &label) in data.x.iter().zip(&data.labels) {
            let (pre, logits) = self.forward_pre(theta, row);
            let max = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let sum: f64 = logits.iter().map(|z| (z - max).exp()).sum();
            loss += inv_n * (max + sum.ln() - logits[label]);

            // dlogits = softmax - onehot, scaled by 1/n.
            let mut dlogits = vec![0.0f64; c];
            for k in 0..c {
                dlogits[k] = ((logits[k] - max).exp() / sum) * inv_n;
            }
            dlogits[label] -= inv_n;

            let mut dhidden = vec![0.0f64; h];
            for j in 0..h {
                let a = gelu(pre[j]);
                let mut acc = 0.0;
                for k in 0..c {
                    gw2[j * c + k] += a * dlogits[k];
                    acc += w2[j * c + k] * dlogits[k];
                }
                dhidden[j] = acc * gelu_derivative(pre[j]);
            }
            for k in 0..c {
                gb2[k] += dlogits[k];
            }
            for i in 0..d {
                let xi = row[i];
                if xi != 0.0 {
                    for j in 0..h {
                        gw1[i * h + j] += xi * dhidden[j];
                    }
                }
            }
            for j in 0..h {
                gb1[j] += dhidden[j];
            }
        }
        (loss, grad)
    }

    pub fn accuracy(&self, theta: &[f64], data: &ClusterDataset) -> f64 {
        let mut correct = 0usize;
        for (row, &label) in data.x.iter().zip(&data.labels) {
            let (_, logits) = self.forward(theta, row);
            let pred = logits
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
                .map(|(k, _)| k)
                .unwrap_or(0);
            if pred == label {
                correct += 1;
            }
        }
        correct as f64 / data.x.len() as f64
    }
}

// ---------------------------------------------------------------------------
// Task interface for training harnesses
// ---------------------------------------------------------------------------

/// What a training/sparsification harness needs from a task.
pub trait SupervisedTask {
    fn init_params(&self) -> ParamVector<f64>;
    fn train_loss_grad(&self, theta: &[f64]) -> (f64, Vec<f64>);
    fn train_accuracy(&self, theta: &[f64]) -> f64;
    fn val_loss(&self, theta: &[f64]) -> f64;
    fn val_accuracy(&self, theta: &[f64]) -> f64;
    /// Segments eligible for pruning.
    fn prunable_segments(&self) -> Vec<String>;
}

impl SupervisedTask for TwoLayerTask {
    fn init_params(&self) -> ParamVector<f64> {
        TwoLayerTask::init_params(self)
    }

    fn train_loss_grad(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        self.loss_grad(theta, &self.train)
    }

    fn train_accuracy(&self, theta: &[f64]) -> f64 {
        self.accuracy(theta, &self.train)
    }

    fn val_loss(&self, theta: &[f64]) -> f64 {
        let (d, h, c) = (self.input_dim, self.hidden, self.classes);
        let _ = (d, h, c);
        let n = self.val.x.len() as f64;
        let mut loss = 0.0;
        for (row, &label) in self.val.x.iter().zip(&self.val.labels) {
            let (_, logits) = self.forward(theta, row);
            let max = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let sum: f64 = logits.iter().map(|z| (z - max).exp()).sum();
            loss += (max + sum.ln() - logits[label]) / n;
        }
        loss
    }

    fn val_accuracy(&self, theta: &[f64]) -> f64 {
        self.accuracy(theta, &self.val)
    }

    fn prunable_segments(&self) -> Vec<String> {
        vec!["w1".into(), "w2".into()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::{central_difference_gradient, max_relative_error};
    use crate::flows::l1_max_margin;

    #[test]
    fn sparse_teacher_has_expected_shape_and_support() {
        let ds = make_sparse_teacher(100, 80, 2, 0).unwrap();
        assert_eq!(ds.x.len(), 80);
        assert_eq!(ds.x[0].len(), 100);
        let support: Vec<usize> = (0..100).filter(|&j| ds.teacher[j] != 0.0).collect();
        assert_eq!(support, vec![0, 1]);
        for j in support {
            assert!(ds.teacher[j].abs() >= 0.5 && ds.teacher[j].abs() <= 1.5);
        }
        // Labels match the teacher by construction.
        for m in ds.margins(&ds.teacher) {
            assert!(m > 0.0);
        }
    }

    #[test]
    fn dense_teacher_is_allowed() {
        let ds = make_sparse_teacher(5, 10, 5, 3).unwrap();
        assert!(ds.teacher.iter().all(|t| *t != 0.0));
    }

    #[test]
    fn dataset_generation_is_deterministic() {
        let a = make_sparse_teacher(20, 15, 2, 42).unwrap();
        let b = make_sparse_teacher(20, 15, 2, 42).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.y, b.y);
        assert_eq!(a.teacher, b.teacher);
        let c = make_sparse_teacher(20, 15, 2, 43).unwrap();
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn generated_datasets_are_separable() {
        for seed in [0u64, 1, 2] {
            let ds = make_sparse_teacher(12, 10, 2, seed).unwrap();
            let cert = l1_max_margin(&ds.to_margin_problem()).unwrap();
            assert!(cert.objective.is_finite());
        }
    }

    #[test]
    fn exp_loss_at_zero_is_one() {
        let ds = make_sparse_teacher(10, 8, 2, 1).unwrap();
        let (loss, _) = ds.exp_loss_and_grad(&vec![0.0; 10]);
        assert!((loss - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_datum_loss_is_hand_computable() {
        let ds = SparseTeacherDataset {
            x: vec![vec![1.0]],
            y: vec![1.0],
            teacher: vec![1.0],
            d: 1,
            n: 1,
            s_star: 1,
            seed: 0,
        };
        let t = 0.7;
        let (loss, grad) = ds.exp_loss_and_grad(&[t]);
        assert!((loss - (-t).exp()).abs() < 1e-15);
        assert!((grad[0] + (-t).exp()).abs() < 1e-15);
    }

    #[test]
    fn linear_gradient_matches_finite_differences() {
        let ds = make_sparse_teacher(8, 12, 2, 7).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for _ in 0..20 {
            let theta: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (_, analytic) = ds.exp_loss_and_grad(&theta);
            let numeric = central_difference_gradient(
                |t| {
                    let (l, _) = ds.exp_loss_and_grad(t);
                    l
                },
                &theta,
                1e-6,
            );
            assert!(max_relative_error(&analytic, &numeric, 1e-6) < 1e-6);
        }
    }

    #[test]
    fn hadamard_gradient_matches_finite_differences() {
        let ds = make_sparse_teacher(5, 8, 2, 11).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for depth in [2usize, 3] {
            let model = HadamardModel::new(depth, 5).unwrap();
            for _ in 0..10 {
                let w: Vec<f64> = (0..model.param_len())
                    .map(|_| rng.random_range(0.2..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })
                    .collect();
                let (_, analytic) = model.loss_grad(&ds, &w);
                let numeric = central_difference_gradient(
                    |wv| model.loss_grad(&ds, wv).0,
                    &w,
                    1e-6,
                );
                assert!(
                    max_relative_error(&analytic, &numeric, 1e-5) < 1e-5,
                    "depth {depth}"
                );
            }
        }
    }

    #[test]
    fn balanced_init_reproduces_theta() {
        let model = HadamardModel::new(3, 4).unwrap();
        let theta0 = [0.5, -0.2, 0.9, -1.4];
        let w = model.balanced_init(&theta0);
        let theta = model.effective_theta(&w);
        for (a, b) in theta.iter().zip(&theta0) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn support_metrics_on_exact_teacher() {
        let teacher = vec![1.2, -0.8, 0.0, 0.0, 0.0];
        let m = support_recovery_metrics(&teacher, &teacher);
        assert!(m.top_k_hit);
        assert_eq!(m.spurious_quiet, 1.0);
        assert!(!m.degenerate);
    }

    #[test]
    fn support_metrics_on_saturated_vector() {
        let teacher = vec![1.0, 1.0, 0.0, 0.0];
        let theta = vec![1.0, 1.0, 1.0, 1.0];
        let m = support_recovery_metrics(&theta, &teacher);
        assert_eq!(m.saturation, 1.0);
        assert_eq!(m.spurious_quiet, 0.0);
    }

    #[test]
    fn support_metrics_with_small_noise() {
        let teacher = vec![1.0, -1.0, 0.0, 0.0, 0.0, 0.0];
        let theta = vec![0.9, -1.1, 1e-3, -1e-3, 1e-3, 1e-3];
        let m = support_recovery_metrics(&theta, &teacher);
        assert!(m.top_k_hit);
        assert_eq!(m.spurious_quiet, 1.0);
    }

    #[test]
    fn support_metrics_degenerate_flag() {
        let m = support_recovery_metrics(&[0.0, 0.0], &[1.0, 0.0]);
        assert!(m.degenerate);
        assert!(!m.top_k_hit);
    }

    #[test]
    fn two_layer_task_is_balanced_and_deterministic() {
        let t1 = two_layer_task(0);
        let t2 = two_layer_task(0);
        assert_eq!(t1.train.x, t2.train.x);
        assert_eq!(t1.train.labels, t2.train.labels);
        assert_eq!(t1.train.x.len(), TWO_LAYER_TRAIN_N);
        assert_eq!(t1.val.x.len(), TWO_LAYER_VAL_N);
        for class in 0..t1.classes {
            let count = t1.train.labels.iter().filter(|&&l| l == class).count();
            assert_eq!(count, TWO_LAYER_TRAIN_N / 4);
        }
    }

    #[test]
    fn two_layer_gradient_matches_finite_differences() {
        // A shrunken instance keeps the finite-difference sweep cheap.
        let mut task = two_layer_task(5);
        task.train.x.truncate(16);
        task.train.labels.truncate(16);
        let theta = task.init_params();
        let (_, analytic) = task.loss_grad(theta.values(), &task.train);
        let numeric = central_difference_gradient(
            |t| task.loss_grad(t, &task.train).0,
            theta.values(),
            1e-5,
        );
        let err = max_relative_error(&analytic, &numeric, 1e-4);
        assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn dataset_export_import_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = make_sparse_teacher(6, 9, 2, 13).unwrap();
        ds.export(dir.path()).unwrap();
        let back = SparseTeacherDataset::import(dir.path()).unwrap();
        assert_eq!(ds.y, back.y);
        assert_eq!(ds.teacher, back.teacher);
        assert_eq!(ds.d, back.d);
        for (a, b) in ds.x.iter().zip(&back.x) {
            for (u, v) in a.iter().zip(b) {
                assert_eq!(u, v, "float round trip must be exact");
            }
        }
    }
}
