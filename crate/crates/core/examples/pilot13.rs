// Scratch diagnostics. Not part of the build.
use horst_core::flows::MarginProblem;
use horst_core::scalar::{norm_l1, norm_linf, sign};

fn rates(problem: &MarginProblem, theta: &[f64], q: f64) -> Option<Vec<f64>> {
    let margins = problem.margins(theta);
    let m_min = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut g = vec![0.0; problem.dim()];
    for ((xi, yi), m) in problem.x.iter().zip(&problem.y).zip(&margins) {
        let w = (-(m - m_min)).exp();
        if w > 0.0 {
            for (gj, xj) in g.iter_mut().zip(xi) {
                *gj -= yi * w * xj;
            }
        }
    }
    let ginf = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if ginf == 0.0 || !ginf.is_finite() {
        return None;
    }
    Some(
        theta
            .iter()
            .zip(&g)
            .map(|(t, gi)| -sign(*t) * sign(*gi) * (gi.abs() / ginf).powf(q - 1.0))
            .collect(),
    )
}

fn run(problem: &MarginProblem, oracle_dir: &[f64], q: f64, heun: bool, budget: u64, theta0: &[f64]) {
    let mut theta = theta0.to_vec();
    let mut h = 0.01f64;
    let mut log_loss = problem.log_loss(&theta);
    let mut accepted = 0u64;
    let mut rejected = 0u64;
    while accepted < budget {
        let Some(r0) = rates(problem, &theta, q) else { break };
        let m_scale = problem
            .margins(&theta)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
            .abs()
            .max(1.0);
        let rmax = r0.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let cap = 1.0 / (rmax * m_scale);
        let mut trial = h.min(cap);
        let mut halvings = 0;
        loop {
            let step_with = |rv: &[f64], tr: f64| -> Vec<f64> {
                theta
                    .iter()
                    .zip(rv)
                    .map(|(x, ri)| sign(*x) * (x.abs() * (tr * ri).clamp(-200.0, 200.0).exp()).max(1e-150))
                    .collect()
            };
            let cand = if heun {
                let pred = step_with(&r0, trial);
                match rates(problem, &pred, q) {
                    Some(r1) => {
                        let avg: Vec<f64> = r0.iter().zip(&r1).map(|(a, b)| 0.5 * (a + b)).collect();
                        step_with(&avg, trial)
                    }
                    None => pred,
                }
            } else {
                step_with(&r0, trial)
            };
            let cl = problem.log_loss(&cand);
            if cl.is_finite() && cl < log_loss {
                theta = cand;
                log_loss = cl;
                h = trial * 2.0;
                accepted += 1;
                break;
            }
            rejected += 1;
            halvings += 1;
            if halvings > 30 {
                println!("  stall");
                return;
            }
            trial /= 2.0;
        }
        if norm_linf(&theta) > 1e250 {
            break;
        }
    }
    let l1 = norm_l1(&theta);
    let gap = theta
        .iter()
        .zip(oracle_dir)
        .map(|(a, b)| (a / l1 - b).abs())
        .fold(0.0, f64::max);
    println!(
        "  heun={heun} acc={accepted} rej={rejected} gap={gap:.4} linf={:.1e}",
        norm_linf(&theta)
    );
}

fn main() {
    for inst in [0u64, 3, 5] {
        let n = 3 + (inst % 3) as usize;
        let (problem, cert) =
            MarginProblem::random_separable_well_posed(n, 6, 500 + inst).unwrap();
        let oracle_dir: Vec<f64> = cert.theta_star.iter().map(|v| v / cert.objective).collect();
        let theta0: Vec<f64> = (0..problem.dim())
            .map(|j| {
                let s = if cert.theta_star[j] != 0.0 {
                    cert.theta_star[j].signum()
                } else if j % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                0.1 * s
            })
            .collect();
        for q in [2.0, 1.5, 4.0 / 3.0] {
            println!("inst {inst} q={q:.3}:");
            run(&problem, &oracle_dir, q, false, 300_000, &theta0);
            run(&problem, &oracle_dir, q, true, 300_000, &theta0);
        }
    }
}
