// Scratch diagnostics. Not part of the build.
use horst_core::flows::MarginProblem;
use horst_core::scalar::{norm_l1, norm_linf, sign};

fn grad_shifted(problem: &MarginProblem, theta: &[f64]) -> Option<Vec<f64>> {
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
    if ginf == 0.0 || !ginf.is_finite() { return None; }
    for gj in g.iter_mut() { *gj /= ginf; }
    Some(g)
}

fn run(problem: &MarginProblem, oracle_dir: &[f64], p: f64, budget: u64, theta0: &[f64]) {
    let q = p / (p - 1.0);
    let mut theta = theta0.to_vec();
    let mut h = 0.01f64;
    let mut log_loss = problem.log_loss(&theta);
    let mut accepted = 0u64;
    let mut rejected = 0u64;
    let mut flips = 0u64;
    while accepted < budget && norm_linf(&theta) < 1e250 {
        let Some(g) = grad_shifted(&problem, &theta) else { break };
        // factor rates
        let rhat: Vec<f64> = theta
            .iter()
            .zip(&g)
            .map(|(t, gi)| sign(*t) * sign(*gi) * gi.abs().powf(q - 1.0))
            .collect();
        let m_scale = problem.margins(&theta).into_iter().fold(f64::INFINITY, f64::min).abs().max(1.0);
        let rmax = rhat.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let cap = 1.0 / (rmax * m_scale);
        let mut trial = h.min(cap);
        let mut halvings = 0;
        let floor = 1e-150f64.max(1e-12 * norm_linf(&theta));
        loop {
            let cand: Vec<f64> = theta
                .iter()
                .zip(&rhat)
                .map(|(x, r)| {
                    let u = x.abs().powf(1.0 / p);
                    let u2 = u * (1.0 - trial * r);
                    let s = sign(*x) * sign(u2).powi(p as i32); // p odd: flips
                    let mag = u2.abs().powf(p).max(floor);
                    if s == 0.0 { floor } else { s * mag }
                })
                .collect();
            let cl = problem.log_loss(&cand);
            if cl.is_finite() && cl < log_loss {
                for (a, b) in theta.iter().zip(&cand) {
                    if a * b < 0.0 { flips += 1; }
                }
                theta = cand;
                log_loss = cl;
                h = trial * 2.0;
                accepted += 1;
                break;
            }
            rejected += 1;
            halvings += 1;
            if halvings > 30 { println!("  p={p} stall at acc={accepted}"); return; }
            trial /= 2.0;
        }
    }
    let l1 = norm_l1(&theta);
    let gap = theta.iter().zip(oracle_dir).map(|(a, b)| (a / l1 - b).abs()).fold(0.0, f64::max);
    println!("  p={p}: acc={accepted} rej={rejected} flips={flips} gap={gap:.4} linf={:.1e}", norm_linf(&theta));
}

fn main() {
    for inst in 0..10u64 {
        let n = 3 + (inst % 3) as usize;
        let (problem, cert) = MarginProblem::random_separable_well_posed(n, 6, 500 + inst).unwrap();
        let oracle_dir: Vec<f64> = cert.theta_star.iter().map(|v| v / cert.objective).collect();
        // alternating-sign init, NOT oracle-aligned: factor crossings should fix signs
        let theta0: Vec<f64> = (0..problem.dim()).map(|j| if j % 2 == 0 { 0.1 } else { -0.1 }).collect();
        println!("inst {inst}:");
        for p in [2.0, 3.0, 4.0] {
            run(&problem, &oracle_dir, p, 300_000, &theta0);
        }
    }
}
