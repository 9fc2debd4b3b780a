//! Continuous-time steepest-mirror flows on separable classification and the
//! diagnostics that certify where they converge.
//!
//! The flow integrated here is the log-map specialization of the
//! steepest-mirror inclusion, in gradient-rescaled time:
//!
//! ```text
//! dtheta/dt = -|theta| ⊙ sign(∇L) ⊙ |∇L|^(q-1),      1/p + 1/q = 1,
//! ```
//!
//! with exponential loss `L(theta) = sum_i exp(-y_i <theta, x_i>)`. Its
//! normalized direction is compared against the L1 max-margin solution
//! computed by an exact simplex oracle.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::lp;
use crate::mirror::{MirrorKind, MirrorMap};
use crate::scalar::{norm_l1, norm_l2, norm_linf, sign};

// ---------------------------------------------------------------------------
// Margin problems
// ---------------------------------------------------------------------------

/// Binary classification instance with labels in {-1, +1}, assumed linearly
/// separable.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MarginProblem {
    /// K rows, each of length n.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl MarginProblem {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::InvalidArgument(
                "margin problem needs matching, nonempty rows and labels".into(),
            ));
        }
        let n = x[0].len();
        if x.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("ragged data matrix".into()));
        }
        if y.iter().any(|l| *l != 1.0 && *l != -1.0) {
            return Err(Error::InvalidArgument("labels must be +1 or -1".into()));
        }
        Ok(Self { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x[0].len()
    }

    pub fn count(&self) -> usize {
        self.x.len()
    }

    /// Margins `y_i <theta, x_i>`.
    pub fn margins(&self, theta: &[f64]) -> Vec<f64> {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(xi, yi)| yi * dot(theta, xi))
            .collect()
    }

    /// Log of the summed exponential loss, stable for large margins.
    pub fn log_loss(&self, theta: &[f64]) -> f64 {
        let margins = self.margins(theta);
        log_sum_exp(margins.iter().map(|m| -m))
    }

    /// Gradient of the summed exponential loss.
    pub fn grad(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        for (xi, (yi, m)) in self.x.iter().zip(self.y.iter().zip(self.margins(theta))) {
            let w = (-m).exp();
            for (gj, xj) in g.iter_mut().zip(xi) {
                *gj -= yi * w * xj;
            }
        }
        g
    }

    /// `min_i y_i <theta, x_i> / ‖theta‖₁`, the margin of the L1-normalized
    /// direction.
    pub fn normalized_margin(&self, theta: &[f64]) -> f64 {
        let l1 = norm_l1(theta);
        if l1 == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.margins(theta)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
            / l1
    }

    /// Random separable instance: a unit teacher vector labels standard
    /// normal rows; rows with tiny teacher margin are resampled so the
    /// instance is comfortably separable.
    pub fn random_separable(n: usize, k: usize, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut teacher: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = norm_l2(&teacher).max(1e-9);
        teacher.iter_mut().for_each(|t| *t /= norm);
        let mut x = Vec::with_capacity(k);
        let mut y = Vec::with_capacity(k);
        while x.len() < k {
            let row: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let m = dot(&teacher, &row);
            if m.abs() < 0.3 {
                continue;
            }
            y.push(m.signum());
            x.push(row);
        }
        Self { x, y }
    }

    /// Like [`Self::random_separable`], but re-seeds until the L1 max-margin
    /// solution is unique (needed when endpoint directions are compared).
    pub fn random_separable_unique(
        n: usize,
        k: usize,
        seed: u64,
    ) -> Result<(Self, KKTCertificate)> {
        for attempt in 0..64 {
            let problem = Self::random_separable(n, k, seed + 7919 * attempt);
            let cert = l1_max_margin(&problem)?;
            if cert.unique {
                return Ok((problem, cert));
            }
        }
        Err(Error::InvalidArgument(format!(
            "no unique-optimum instance found from seed {seed}"
        )))
    }

    /// Random separable instance conditioned for flow-vs-oracle comparisons:
    /// unique optimum, all support coordinates at least 10% of the largest,
    /// and at least 0.1 dual slack on every off-support coordinate. Near the
    /// excluded degeneracies the flow's directional convergence time grows
    /// beyond any floating-point horizon.
    pub fn random_separable_well_posed(
        n: usize,
        k: usize,
        seed: u64,
    ) -> Result<(Self, KKTCertificate)> {
        for attempt in 0..256 {
            let problem = Self::random_separable(n, k, seed + 6661 * attempt);
            let cert = l1_max_margin(&problem)?;
            if !cert.unique || !cert.dual_feasible {
                continue;
            }
            let linf = norm_linf(&cert.theta_star);
            let support_ok = cert
                .theta_star
                .iter()
                .all(|v| *v == 0.0 || v.abs() >= 0.1 * linf);
            let mut combo = vec![0.0; n];
            for ((xi, yi), nu) in problem.x.iter().zip(&problem.y).zip(&cert.duals) {
                for (cj, xj) in combo.iter_mut().zip(xi) {
                    *cj += nu * yi * xj;
                }
            }
            let slack_ok = cert
                .theta_star
                .iter()
                .zip(&combo)
                .all(|(v, c)| *v != 0.0 || c.abs() <= 0.9);
            if support_ok && slack_ok {
                return Ok((problem, cert));
            }
        }
        Err(Error::InvalidArgument(format!(
            "no well-posed instance found from seed {seed}"
        )))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

// ---------------------------------------------------------------------------
// L1 max-margin oracle
// ---------------------------------------------------------------------------

/// Exact solution of `min ‖theta‖₁ : y_i <theta, x_i> >= 1`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct KKTCertificate {
    pub theta_star: Vec<f64>,
    /// `‖theta_star‖₁`.
    pub objective: f64,
    /// Constraints active at the optimum (margin within 1e-6 of 1).
    pub active_set: Vec<usize>,
    pub dual_feasible: bool,
    /// One multiplier per constraint.
    pub duals: Vec<f64>,
    /// False when a perturbed re-solve lands on a different optimal vertex
    /// (non-singleton optimum face).
    pub unique: bool,
}

/// Solve the L1 max-margin program with the dense simplex via the split
/// `theta = theta_plus - theta_minus`.
pub fn l1_max_margin(problem: &MarginProblem) -> Result<KKTCertificate> {
    let n = problem.dim();
    let k = problem.count();
    let c = vec![1.0; 2 * n];
    let rows: Vec<Vec<f64>> = problem
        .x
        .iter()
        .zip(&problem.y)
        .map(|(xi, yi)| {
            let mut row = Vec::with_capacity(2 * n);
            row.extend(xi.iter().map(|v| yi * v));
            row.extend(xi.iter().map(|v| -yi * v));
            row
        })
        .collect();
    let h = vec![1.0; k];

    let sol = lp::solve_min(&c, &rows, &h)?;
    let theta_star: Vec<f64> = (0..n).map(|j| sol.z[j] - sol.z[n + j]).collect();
    let objective = norm_l1(&theta_star);

    let margins = problem.margins(&theta_star);
    let active_set: Vec<usize> = (0..k).filter(|&i| margins[i] <= 1.0 + 1e-6).collect();

    // Dual feasibility for the max-margin dual: nu >= 0, ‖X' diag(y) nu‖∞ <= 1,
    // complementary slackness, and strong duality.
    let mut combo = vec![0.0; n];
    for ((xi, yi), nu) in problem.x.iter().zip(&problem.y).zip(&sol.duals) {
        for (cj, xj) in combo.iter_mut().zip(xi) {
            *cj += nu * yi * xj;
        }
    }
    let dual_sum: f64 = sol.duals.iter().sum();
    let comp_slack = margins
        .iter()
        .zip(&sol.duals)
        .map(|(m, nu)| (nu * (m - 1.0)).abs())
        .fold(0.0, f64::max);
    let dual_feasible = sol.duals.iter().all(|d| *d >= -1e-8)
        && norm_linf(&combo) <= 1.0 + 1e-7
        && (dual_sum - objective).abs() <= 1e-6 * objective.max(1.0)
        && comp_slack <= 1e-6;

    // Uniqueness probe: re-solve under two opposite cost tilts; a
    // non-singleton optimum face moves the vertex under at least one of them.
    let mut unique = true;
    for ascending in [true, false] {
        let c_perturbed: Vec<f64> = (0..2 * n)
            .map(|j| {
                let rank = if ascending { j + 1 } else { 2 * n - j };
                1.0 + 1e-7 * rank as f64 / (2 * n) as f64
            })
            .collect();
        let sol2 = lp::solve_min(&c_perturbed, &rows, &h)?;
        let theta2: Vec<f64> = (0..n).map(|j| sol2.z[j] - sol2.z[n + j]).collect();
        unique &= theta_star
            .iter()
            .zip(&theta2)
            .all(|(a, b)| (a - b).abs() <= 1e-6 * a.abs().max(1.0));
    }

    Ok(KKTCertificate {
        theta_star,
        objective,
        active_set,
        dual_feasible,
        duals: sol.duals,
        unique,
    })
}

/// Exhaustive reference for [`l1_max_margin`]: enumerate every support
/// pattern and active-constraint subset of equal size, solve the square
/// system, and keep the best feasible candidate. Exponential in `n`; use at
/// desk scale only.
pub fn l1_max_margin_enumerate(problem: &MarginProblem) -> Result<f64> {
    let n = problem.dim();
    let k = problem.count();
    let mut best: Option<f64> = None;

    for m in 1..=n.min(k) {
        for support in combinations(n, m) {
            for active in combinations(k, m) {
                // Solve y_i <theta_S, x_{i,S}> = 1 for i in the active set.
                let mut a = vec![vec![0.0; m + 1]; m];
                for (r, &i) in active.iter().enumerate() {
                    for (cidx, &j) in support.iter().enumerate() {
                        a[r][cidx] = problem.y[i] * problem.x[i][j];
                    }
                    a[r][m] = 1.0;
                }
                let Some(solution) = solve_square(&mut a) else {
                    continue;
                };
                let mut theta = vec![0.0; n];
                for (&j, &v) in support.iter().zip(&solution) {
                    theta[j] = v;
                }
                let feasible = problem
                    .margins(&theta)
                    .iter()
                    .all(|margin| *margin >= 1.0 - 1e-9);
                if feasible {
                    let obj = norm_l1(&theta);
                    best = Some(match best {
                        Some(b) if b <= obj => b,
                        _ => obj,
                    });
                }
            }
        }
    }
    best.ok_or(Error::Infeasible)
}

fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        out.push(idx.clone());
        // Advance the rightmost index that can still move.
        let mut i = m;
        let moved = loop {
            if i == 0 {
                break false;
            }
            i -= 1;
            if idx[i] != i + n - m {
                break true;
            }
        };
        if !moved {
            return out;
        }
        idx[i] += 1;
        for j in i + 1..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Gaussian elimination with partial pivoting on an augmented `m x (m+1)`
/// system; `None` when singular.
fn solve_square(a: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let m = a.len();
    for col in 0..m {
        let pivot_row = (col..m).max_by(|&r1, &r2| {
            a[r1][col]
                .abs()
                .partial_cmp(&a[r2][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot_row][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot_row);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c2 in col..=m {
                        let v = a[col][c2];
                        a[r][c2] -= f * v;
                    }
                }
            }
        }
    }
    Some((0..m).map(|r| a[r][m] / a[r][r]).collect())
}

// ---------------------------------------------------------------------------
// Flow integration
// ---------------------------------------------------------------------------

/// Time variable used by the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScale {
    /// Keep the `1/‖∇L‖_q` factor: the inclusion's own clock. Step norms
    /// blow up as the gradient vanishes when q < 2; meant for short horizons.
    DualNormalized,
    /// Absorb `‖∇L‖_q` into the clock: `dtheta/dt = -|theta| sign(∇L) |∇L|^(q-1)`.
    /// The default; the trajectory path is identical, only the clock changes.
    Reparameterized,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FlowConfig {
    /// Steepest norm exponent, `p >= 2`.
    pub p: f64,
    pub time_scale: TimeScale,
    /// Initial step size; adapted by doubling on acceptance and halving on
    /// rejection.
    pub step_size: f64,
    pub max_time: f64,
    /// Hard budget on accepted steps (the margin-clustered step cap makes
    /// time advance additively, so `max_time` alone is no terminator).
    pub max_steps: u64,
    /// Stop once the normalized margin reaches this value (0 disables).
    pub stop_margin: f64,
    /// Direction tolerance: integration stops when consecutive geometric
    /// checkpoints move the L1-normalized direction by at most half of this.
    pub dir_tol: f64,
}

impl FlowConfig {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "flow exponent p must be finite and >= 2, got {p}"
            )));
        }
        Ok(Self {
            p,
            time_scale: TimeScale::Reparameterized,
            step_size: 0.01,
            max_time: 1e300,
            max_steps: 1_000_000,
            stop_margin: 0.0,
            dir_tol: 0.05,
        })
    }

    fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

/// State recorded at each geometric checkpoint.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FlowCheckpoint {
    pub t: f64,
    pub loss: f64,
    pub log_loss: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    /// L1-normalized direction `theta / ‖theta‖₁`.
    pub direction: Vec<f64>,
    pub normalized_margin: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Trajectory {
    pub checkpoints: Vec<FlowCheckpoint>,
    pub theta_final: Vec<f64>,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    /// True when the direction-Cauchy stop triggered before `max_time`.
    pub converged: bool,
}

impl Trajectory {
    pub fn final_direction(&self) -> Vec<f64> {
        let l1 = norm_l1(&self.theta_final).max(f64::MIN_POSITIVE);
        self.theta_final.iter().map(|v| v / l1).collect()
    }

    /// CSV with columns `t,loss,l1,l2,linf,dir_0..dir_{n-1}`.
    pub fn to_csv(&self) -> String {
        let n = self.theta_final.len();
        let mut out = String::from("t,loss,l1,l2,linf");
        for j in 0..n {
            out.push_str(&format!(",dir_{j}"));
        }
        out.push('\n');
        for cp in &self.checkpoints {
            out.push_str(&format!(
                "{},{},{},{},{}",
                cp.t, cp.loss, cp.l1, cp.l2, cp.linf
            ));
            for d in &cp.direction {
                out.push_str(&format!(",{d}"));
            }
            out.push('\n');
        }
        out
    }
}

const MAX_HALVINGS: u32 = 30;

/// Magnitudes are floored here instead of being absorbed at zero: the flow
/// multiplies magnitudes, so a coordinate can always regrow once the gradient
/// favors it again.
const MAGNITUDE_FLOOR: f64 = 1e-150;

/// Per-step bound on `h * rate` inside the multiplicative update.
const LOG_STEP_CLAMP: f64 = 200.0;

/// Logarithmic rate of each coordinate, `d log|theta_i| / dt`; `None` when
/// the gradient vanished.
///
/// In the reparameterized clock the gradient enters only through its
/// coordinate profile, so it is computed from margin-shifted sample weights
/// `exp(-(m_i - m_min))`. That absorbs the overall factor `exp(-m_min)` into
/// yet another monotone clock change (the path is unchanged) and keeps the
/// dynamics alive at margins far past the point where `exp(-m)` underflows.
fn flow_log_rates(
    problem: &MarginProblem,
    theta: &[f64],
    q: f64,
    time_scale: TimeScale,
) -> Option<Vec<f64>> {
    let grad = match time_scale {
        TimeScale::Reparameterized => {
            let margins = problem.margins(theta);
            let m_min = margins.iter().cloned().fold(f64::INFINITY, f64::min);
            if !m_min.is_finite() {
                return None;
            }
            let mut g = vec![0.0; problem.dim()];
            for ((xi, yi), m) in problem.x.iter().zip(&problem.y).zip(&margins) {
                let w = (-(m - m_min)).exp();
                if w > 0.0 {
                    for (gj, xj) in g.iter_mut().zip(xi) {
                        *gj -= yi * w * xj;
                    }
                }
            }
            g
        }
        TimeScale::DualNormalized => problem.grad(theta),
    };
    let ginf = norm_linf(&grad);
    if ginf == 0.0 || !ginf.is_finite() {
        return None;
    }
    // Work with g / ‖g‖∞ so the q-powers stay in range, then restore the
    // scale factor analytically.
    let scale = match time_scale {
        TimeScale::Reparameterized => ginf.powf(q - 1.0),
        TimeScale::DualNormalized => {
            let norm_rel: f64 = grad
                .iter()
                .map(|g| (g.abs() / ginf).powf(q))
                .sum::<f64>()
                .powf(1.0 / q);
            ginf.powf(q - 2.0) / norm_rel
        }
    };
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    Some(
        theta
            .iter()
            .zip(&grad)
            .map(|(t, g)| {
                let rel = g.abs() / ginf;
                -sign(*t) * sign(*g) * rel.powf(q - 1.0) * scale
            })
            .collect(),
    )
}

fn checkpoint_at(problem: &MarginProblem, theta: &[f64], t: f64) -> FlowCheckpoint {
    let log_loss = problem.log_loss(theta);
    let l1 = norm_l1(theta);
    let linf = norm_linf(theta);
    let dir: Vec<f64> = theta
        .iter()
        .map(|v| v / l1.max(f64::MIN_POSITIVE))
        .collect();
    // Scaled form: the parameters can legitimately reach magnitudes whose
    // squares overflow.
    let l2 = if linf > 0.0 {
        linf * theta.iter().map(|v| (v / linf) * (v / linf)).sum::<f64>().sqrt()
    } else {
        0.0
    };
    FlowCheckpoint {
        t,
        loss: log_loss.exp(),
        log_loss,
        l1,
        l2,
        linf,
        direction: dir,
        normalized_margin: problem.normalized_margin(theta),
    }
}

/// Integrate the steepest-mirror flow with backtracking Euler.
///
/// Each step must strictly decrease the loss; rejected steps halve the step
/// size (up to 30 times before erroring), accepted steps double it up to the
/// next geometric checkpoint at `t = 1, 2, 4, ...`. Coordinates that an Euler
/// step would push across zero are absorbed at zero, matching the flow's
/// behavior there.
pub fn integrate_steepest_mirror(
    problem: &MarginProblem,
    cfg: &FlowConfig,
    theta0: &[f64],
) -> Result<Trajectory> {
    if theta0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            context: "flow initialization",
            left: theta0.len(),
            right: problem.dim(),
        });
    }
    if theta0.iter().any(|t| t.abs() < 1e-6) {
        return Err(Error::InvalidArgument(
            "flow initialization needs |theta0_i| >= 1e-6 on every coordinate".into(),
        ));
    }
    let q = cfg.q();
    let mut theta = theta0.to_vec();
    let mut t = 0.0f64;
    let mut h = cfg.step_size;
    let mut log_loss = problem.log_loss(&theta);
    let mut next_checkpoint = 1.0f64;
    let mut accepted = 0u64;
    let mut rejected = 0u64;
    let mut checkpoints = vec![checkpoint_at(problem, &theta, 0.0)];
    let mut converged = false;
    // The stop rule is also probed at doubling accepted-step counts: with the
    // margin-clustered step cap, time advances too slowly for the geometric
    // time marks alone to see convergence promptly.
    let mut next_probe = 1024u64;
    let mut last_probe_dir: Option<Vec<f64>> = None;

    'outer: while t < cfg.max_time && accepted < cfg.max_steps {
        if norm_linf(&theta) > 1e250 {
            break;
        }
        let Some(rates) = flow_log_rates(problem, &theta, q, cfg.time_scale) else {
            break;
        };
        // Shrinking coordinates are floored relative to the current scale:
        // the exact flow keeps them positive, and if they fell further behind
        // their later regrowth would be invisible at f64 precision.
        let floor = MAGNITUDE_FLOOR.max(1e-12 * norm_linf(&theta));
        // Cap the trial step so each raw margin moves by O(1) per step: the
        // continuous flow keeps the active margins clustered, and a step that
        // multiplies the margin spread leaves its path entirely.
        let rate_max = rates.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        let margin_scale = problem
            .margins(&theta)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
            .abs()
            .max(1.0);
        let h_cap = if rate_max > 0.0 {
            1.0 / (rate_max * margin_scale)
        } else {
            f64::INFINITY
        };

        // Try progressively smaller steps until the loss decreases. Each
        // trial takes a predictor step and then applies the averaged
        // (Heun) rate, which damps the zigzag across margin crossovers.
        let step_with = |rv: &[f64], tr: f64| -> Vec<f64> {
            theta
                .iter()
                .zip(rv)
                .map(|(x, r)| {
                    let e = (tr * r).clamp(-LOG_STEP_CLAMP, LOG_STEP_CLAMP);
                    sign(*x) * (x.abs() * e.exp()).max(floor)
                })
                .collect()
        };
        let mut halvings = 0u32;
        let mut trial = h.min(h_cap).min(cfg.max_time - t);
        loop {
            let predictor = step_with(&rates, trial);
            let candidate = match flow_log_rates(problem, &predictor, q, cfg.time_scale) {
                Some(r1) => {
                    let avg: Vec<f64> = rates.iter().zip(&r1).map(|(a, b)| 0.5 * (a + b)).collect();
                    step_with(&avg, trial)
                }
                None => predictor,
            };
            let cand_loss = problem.log_loss(&candidate);
            if cand_loss.is_finite() && cand_loss < log_loss {
                theta = candidate;
                log_loss = cand_loss;
                t += trial;
                // Grow from the step actually taken so a capped or
                // backtracked step cannot leave h far above the stable scale.
                h = trial * 2.0;
                accepted += 1;
                break;
            }
            rejected += 1;
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::IntegrationFailure(format!(
                    "no loss decrease after {MAX_HALVINGS} halvings at t = {t} \
                     (log loss {log_loss:.6}, step {trial:.3e})"
                )));
            }
            trial /= 2.0;
        }

        // Record on crossing each geometric mark t = 1, 2, 4, ...
        if t >= next_checkpoint {
            let cp = checkpoint_at(problem, &theta, t);
            let stop_margin_ok = cfg.stop_margin <= 0.0 || cp.normalized_margin >= cfg.stop_margin;
            if let Some(prev) = checkpoints.last() {
                let dir_delta: f64 = cp
                    .direction
                    .iter()
                    .zip(&prev.direction)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if prev.t > 0.0 && dir_delta <= cfg.dir_tol / 2.0 && stop_margin_ok {
                    checkpoints.push(cp);
                    converged = true;
                    break 'outer;
                }
            }
            checkpoints.push(cp);
            while next_checkpoint <= t {
                next_checkpoint *= 2.0;
            }
        }

        if accepted >= next_probe {
            next_probe *= 2;
            let l1 = norm_l1(&theta).max(f64::MIN_POSITIVE);
            let dir: Vec<f64> = theta.iter().map(|v| v / l1).collect();
            let stop_margin_ok =
                cfg.stop_margin <= 0.0 || problem.normalized_margin(&theta) >= cfg.stop_margin;
            if let Some(prev) = &last_probe_dir {
                let dir_delta: f64 = dir
                    .iter()
                    .zip(prev)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if dir_delta <= cfg.dir_tol / 2.0 && stop_margin_ok {
                    checkpoints.push(checkpoint_at(problem, &theta, t));
                    converged = true;
                    break 'outer;
                }
            }
            last_probe_dir = Some(dir);
        }
    }

    if checkpoints.last().map(|cp| cp.t) != Some(t) {
        checkpoints.push(checkpoint_at(problem, &theta, t));
    }
    Ok(Trajectory {
        checkpoints,
        theta_final: theta,
        accepted_steps: accepted,
        rejected_steps: rejected,
        converged,
    })
}

// ---------------------------------------------------------------------------
// Factor-flow equivalence
// ---------------------------------------------------------------------------

/// Outcome of comparing the depth-p product flow against the direct flow.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FactorFlowReport {
    /// Max over checkpoints of the relative L∞ gap between the two
    /// trajectories.
    pub max_deviation: f64,
    /// Max over time, factors, and coordinates of `||w_i| - |theta|^(1/p)|`.
    pub max_balance_residual: f64,
    pub checkpoints: usize,
}

/// Integrate (a) the product flow `theta = prod_i w_i` with every factor
/// following the Lp steepest flow from a balanced start, and (b) the direct
/// flow at `p`-fold speed, with matched fixed Euler steps; report how far the
/// two `theta` trajectories drift apart and how well the balance relation
/// `|w_i| = |theta|^(1/p)` holds.
///
/// The product of p balanced factors moves p times as fast as the direct
/// flow in the same clock, so the direct side carries the factor `p`.
/// The first factor carries the sign of `theta0`; the rest start positive.
pub fn factor_flow_equivalence(
    problem: &MarginProblem,
    p: usize,
    theta0: &[f64],
    horizon: f64,
    step: f64,
) -> Result<FactorFlowReport> {
    if p < 2 {
        return Err(Error::InvalidArgument("factor depth p must be >= 2".into()));
    }
    if theta0.iter().any(|t| t.abs() < 1e-6) {
        return Err(Error::InvalidArgument(
            "balanced factorization needs |theta0_i| >= 1e-6".into(),
        ));
    }
    let n = problem.dim();
    let q = p as f64 / (p as f64 - 1.0);

    // Balanced initialization.
    let mag0: Vec<f64> = theta0
        .iter()
        .map(|t| t.abs().powf(1.0 / p as f64))
        .collect();
    let mut w: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            mag0.iter()
                .zip(theta0)
                .map(|(m, t)| if i == 0 { sign(*t) * *m } else { *m })
                .collect()
        })
        .collect();

    let mut theta_direct = theta0.to_vec();
    let steps = (horizon / step).round() as usize;
    let check_every = (steps / 64).max(1);

    let mut max_deviation = 0.0f64;
    let mut max_balance = 0.0f64;
    let mut checkpoints = 0usize;

    for k in 0..steps {
        // Product flow: each factor takes the rescaled Lp steepest step on
        // its own partial gradient.
        let theta_prod = product(&w, n);
        let grad = problem.grad(&theta_prod);
        let mut partials = vec![vec![0.0f64; n]; p];
        for j in 0..n {
            for i in 0..p {
                let mut others = 1.0f64;
                for (l, wl) in w.iter().enumerate() {
                    if l != i {
                        others *= wl[j];
                    }
                }
                partials[i][j] = grad[j] * others;
            }
        }
        for i in 0..p {
            for j in 0..n {
                let d = partials[i][j];
                w[i][j] -= step * sign(d) * d.abs().powf(q - 1.0);
            }
        }

        // Direct flow at p-fold speed (the product flow's clock).
        let g = problem.grad(&theta_direct);
        for j in 0..n {
            let vel = -(p as f64) * theta_direct[j].abs() * sign(g[j]) * g[j].abs().powf(q - 1.0);
            theta_direct[j] += step * vel;
        }

        if (k + 1) % check_every == 0 || k + 1 == steps {
            checkpoints += 1;
            let theta_prod = product(&w, n);
            let scale = norm_linf(&theta_direct).max(1e-12);
            for j in 0..n {
                max_deviation = max_deviation.max((theta_prod[j] - theta_direct[j]).abs() / scale);
                let target = theta_prod[j].abs().powf(1.0 / p as f64);
                for wi in &w {
                    max_balance = max_balance.max((wi[j].abs() - target).abs());
                }
            }
        }
    }

    Ok(FactorFlowReport {
        max_deviation,
        max_balance_residual: max_balance,
        checkpoints,
    })
}

fn product(w: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut theta = vec![1.0f64; n];
    for wi in w {
        for j in 0..n {
            theta[j] *= wi[j];
        }
    }
    theta
}

// ---------------------------------------------------------------------------
// Linear-convergence certification under coercive maps
// ---------------------------------------------------------------------------

/// `L(theta) = 0.5 ‖theta - theta_star‖²`: gradient-dominated with constant 1
/// and minimum 0.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    pub theta_star: Vec<f64>,
}

impl QuadraticObjective {
    pub fn loss(&self, theta: &[f64]) -> f64 {
        0.5 * theta
            .iter()
            .zip(&self.theta_star)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
    }

    pub fn grad(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .zip(&self.theta_star)
            .map(|(a, b)| a - b)
            .collect()
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PlCheckReport {
    pub passed: bool,
    /// `(t, observed loss, certified bound)` per checkpoint.
    pub checkpoints: Vec<(f64, f64, f64)>,
}

/// Integrate the mirror flow `dtheta = -(∇²R)⁻¹(theta) ∇L(theta) dt` on a
/// quadratic objective and certify the linear decay
/// `L(theta_t) <= L(theta_0) exp(-2 mu lambda_pl t)` at the checkpoints
/// `{horizon/4, horizon/2, horizon}`.
///
/// Rejects maps without a uniform coercivity constant (cosh and log entropy).
pub fn pl_convergence_check(
    map: &MirrorMap<f64>,
    objective: &QuadraticObjective,
    mu: f64,
    lambda_pl: f64,
    theta0: &[f64],
    horizon: f64,
) -> Result<PlCheckReport> {
    match map.kind {
        MirrorKind::Quadratic | MirrorKind::HyperbolicEntropy => {}
        MirrorKind::CoshEntropy | MirrorKind::LogEntropy => {
            return Err(Error::InvalidArgument(format!(
                "{} has no uniform coercivity constant; linear convergence is not certified",
                map.name()
            )));
        }
    }
    if mu <= 0.0 || lambda_pl <= 0.0 || horizon <= 0.0 {
        return Err(Error::InvalidArgument(
            "coercivity, gradient-dominance constant, and horizon must be positive".into(),
        ));
    }

    let step = 1e-4f64.min(horizon / 1_000.0);
    let steps = (horizon / step).ceil() as usize;
    let mut theta = theta0.to_vec();
    let loss0 = objective.loss(theta0);
    let check_times = [horizon / 4.0, horizon / 2.0, horizon];
    let tol = 0.01;

    let mut checkpoints = Vec::new();
    let mut passed = true;
    let mut next_check = 0usize;
    for k in 0..steps {
        let g = objective.grad(&theta);
        for (tj, gj) in theta.iter_mut().zip(&g) {
            *tj -= step * map.inv_hessian_diag(*tj) * gj;
        }
        let t = (k + 1) as f64 * step;
        while next_check < check_times.len() && t >= check_times[next_check] - step / 2.0 {
            let loss = objective.loss(&theta);
            let bound = loss0 * (-2.0 * mu * lambda_pl * check_times[next_check]).exp();
            if loss > bound * (1.0 + tol) {
                passed = false;
            }
            checkpoints.push((check_times[next_check], loss, bound));
            next_check += 1;
        }
    }
    Ok(PlCheckReport {
        passed,
        checkpoints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_aligned_margin_problem_has_unit_objective() {
        let problem =
            MarginProblem::new(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], vec![1.0, -1.0]).unwrap();
        let cert = l1_max_margin(&problem).unwrap();
        assert!((cert.objective - 1.0).abs() < 1e-9);
        assert!((cert.theta_star[0] - 1.0).abs() < 1e-9);
        assert!(cert.theta_star[1].abs() < 1e-9);
        assert!(cert.dual_feasible);
        assert!(cert.unique);
        assert_eq!(cert.active_set, vec![0, 1]);
    }

    #[test]
    fn degenerate_optimum_face_is_detected() {
        // theta_1 + theta_2 >= 1 twice: the optimum face is a segment; the
        // simplex returns a vertex and the perturbation re-solve flags it.
        let problem =
            MarginProblem::new(vec![vec![1.0, 1.0], vec![-1.0, -1.0]], vec![1.0, -1.0]).unwrap();
        let cert = l1_max_margin(&problem).unwrap();
        assert!((cert.objective - 1.0).abs() < 1e-9);
        let on_segment = (cert.theta_star[0] + cert.theta_star[1] - 1.0).abs() < 1e-9
            && cert.theta_star.iter().all(|v| *v >= -1e-9);
        assert!(on_segment, "vertex {:?}", cert.theta_star);
        assert!(!cert.unique);
    }

    #[test]
    fn infeasible_problem_is_reported() {
        let problem = MarginProblem::new(vec![vec![1.0], vec![1.0]], vec![1.0, -1.0]).unwrap();
        match l1_max_margin(&problem) {
            Err(Error::Infeasible) => {}
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn simplex_matches_enumeration_on_random_instances() {
        for seed in 0..40u64 {
            let n = 2 + (seed % 4) as usize;
            let k = 3 + (seed % 6) as usize;
            let problem = MarginProblem::random_separable(n, k, 1_000 + seed);
            let cert = l1_max_margin(&problem).unwrap();
            let brute = l1_max_margin_enumerate(&problem).unwrap();
            assert!(
                (cert.objective - brute).abs() <= 1e-6 * brute.max(1.0),
                "seed {seed}: simplex {} vs enumeration {brute}",
                cert.objective
            );
            assert!(cert.dual_feasible, "seed {seed}");
            for m in problem.margins(&cert.theta_star) {
                assert!(m >= 1.0 - 1e-9, "seed {seed}: margin {m}");
            }
        }
    }

    #[test]
    fn one_dimensional_flow_grows_monotonically() {
        let problem = MarginProblem::new(vec![vec![1.0]], vec![1.0]).unwrap();
        let mut cfg = FlowConfig::new(2.0).unwrap();
        cfg.max_time = 1e30;
        let traj = integrate_steepest_mirror(&problem, &cfg, &[0.1]).unwrap();
        let mut prev = 0.0;
        for cp in &traj.checkpoints {
            assert!(cp.l1 >= prev);
            prev = cp.l1;
        }
        let dir = traj.final_direction();
        assert!((dir[0] - 1.0).abs() < 1e-12);
        for pair in traj.checkpoints.windows(2) {
            assert!(pair[1].log_loss <= pair[0].log_loss, "loss not monotone");
        }
    }

    #[test]
    fn two_point_flow_finds_the_sparse_direction() {
        let problem =
            MarginProblem::new(vec![vec![1.0, 0.2], vec![1.0, -0.2]], vec![1.0, 1.0]).unwrap();
        let cfg = FlowConfig::new(2.0).unwrap();
        let traj = integrate_steepest_mirror(&problem, &cfg, &[0.1, 0.1]).unwrap();
        let dir = traj.final_direction();
        assert!((dir[0] - 1.0).abs() < 0.05, "direction {dir:?}");
        assert!(dir[1].abs() < 0.05, "direction {dir:?}");
    }

    #[test]
    fn flow_rejects_zero_initialization() {
        let problem = MarginProblem::new(vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        let cfg = FlowConfig::new(2.0).unwrap();
        assert!(integrate_steepest_mirror(&problem, &cfg, &[0.1, 0.0]).is_err());
    }

    #[test]
    fn factor_flow_matches_direct_flow_one_dimensional() {
        let problem = MarginProblem::new(vec![vec![1.0]], vec![1.0]).unwrap();
        let report = factor_flow_equivalence(&problem, 2, &[0.3], 2.0, 1e-4).unwrap();
        assert!(report.max_deviation <= 1e-3, "dev {}", report.max_deviation);
        assert!(
            report.max_balance_residual <= 1e-6,
            "balance {}",
            report.max_balance_residual
        );
    }

    #[test]
    fn factor_flow_matches_direct_flow_two_dimensional_p3() {
        let problem =
            MarginProblem::new(vec![vec![1.0, 0.3], vec![0.8, -0.4]], vec![1.0, 1.0]).unwrap();
        let report = factor_flow_equivalence(&problem, 3, &[0.2, -0.15], 2.0, 1e-4).unwrap();
        assert!(report.max_deviation <= 1e-3, "dev {}", report.max_deviation);
        assert!(
            report.max_balance_residual <= 1e-6,
            "balance {}",
            report.max_balance_residual
        );
    }

    #[test]
    fn quadratic_pl_flow_decays_at_the_exact_rate() {
        let map = MirrorMap::quadratic();
        let objective = QuadraticObjective {
            theta_star: vec![1.0, -2.0, 0.5],
        };
        let theta0 = vec![3.0, 1.0, -1.0];
        let report = pl_convergence_check(&map, &objective, 1.0, 1.0, &theta0, 2.0).unwrap();
        assert!(report.passed);
        let loss0 = objective.loss(&theta0);
        for (t, loss, bound) in &report.checkpoints {
            let exact = loss0 * (-2.0 * t).exp();
            assert!(
                (loss - exact).abs() <= 0.01 * exact,
                "t={t}: {loss} vs {exact}"
            );
            assert!((bound - exact).abs() <= 1e-12 * exact);
        }
    }

    #[test]
    fn hyperbolic_pl_bound_holds_with_slack() {
        let map = MirrorMap::hyperbolic_entropy(0.5);
        let objective = QuadraticObjective {
            theta_star: vec![0.4, -0.2],
        };
        let report = pl_convergence_check(&map, &objective, 0.5, 1.0, &[2.0, 2.0], 2.0).unwrap();
        assert!(report.passed);
        for (_, loss, bound) in &report.checkpoints {
            assert!(loss <= bound, "no slack: {loss} vs bound {bound}");
        }
    }

    #[test]
    fn cosh_map_is_rejected_by_the_pl_check() {
        let objective = QuadraticObjective {
            theta_star: vec![0.0],
        };
        let err = pl_convergence_check(
            &MirrorMap::cosh_entropy(),
            &objective,
            0.1,
            1.0,
            &[1.0],
            1.0,
        );
        assert!(err.is_err());
    }

    #[test]
    fn combinations_enumerates_choose_two() {
        let combos = combinations(4, 2);
        assert_eq!(combos.len(), 6);
        assert!(combos.contains(&vec![0, 3]));
        assert!(combos.contains(&vec![2, 3]));
    }

    #[test]
    fn trajectory_csv_has_expected_header() {
        let problem = MarginProblem::new(vec![vec![1.0, 0.5]], vec![1.0]).unwrap();
        let mut cfg = FlowConfig::new(2.0).unwrap();
        cfg.max_time = 16.0;
        let traj = integrate_steepest_mirror(&problem, &cfg, &[0.1, 0.1]).unwrap();
        let csv = traj.to_csv();
        assert!(csv.starts_with("t,loss,l1,l2,linf,dir_0,dir_1\n"));
        assert!(csv.lines().count() >= 3);
    }
}
