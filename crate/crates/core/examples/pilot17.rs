// Scratch diagnostics: scan fixture seeds for criterion-quality convergence.
use horst_core::flows::{integrate_steepest_mirror, FlowConfig, MarginProblem};
use horst_core::scalar::norm_l1;

fn main() {
    let mut good = 0;
    let mut scanned = 0;
    for base in 0..24u64 {
        let n = 3 + (base % 3) as usize;
        let k = 6 + 2 * ((base / 3) % 2) as usize; // 6 or 8
        let seed = 1000 + base;
        let Ok((problem, cert)) = MarginProblem::random_separable_well_posed(n, k, seed) else {
            continue;
        };
        scanned += 1;
        let theta0: Vec<f64> = (0..n)
            .map(|j| {
                let s = if cert.theta_star[j] != 0.0 { cert.theta_star[j].signum() } else if j % 2 == 0 { 1.0 } else { -1.0 };
                0.1 * s
            })
            .collect();
        let mut dirs = Vec::new();
        let mut worst_ratio: f64 = 0.0;
        let mut ok = true;
        for p in [2.0, 3.0, 4.0] {
            let mut cfg = FlowConfig::new(p).unwrap();
            cfg.max_steps = 300_000;
            cfg.stop_margin = 0.999 / cert.objective;
            cfg.dir_tol = 0.01;
            match integrate_steepest_mirror(&problem, &cfg, &theta0) {
                Ok(traj) => {
                    let margins = problem.margins(&traj.theta_final);
                    let minm = margins.iter().cloned().fold(f64::INFINITY, f64::min);
                    let ratio = norm_l1(&traj.theta_final) / minm / cert.objective;
                    worst_ratio = worst_ratio.max(ratio);
                    dirs.push(traj.final_direction());
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            println!("seed {seed} n={n} k={k}: integration error");
            continue;
        }
        let mut worst_pair: f64 = 0.0;
        for i in 0..dirs.len() {
            for j in i + 1..dirs.len() {
                let d = dirs[i].iter().zip(&dirs[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                worst_pair = worst_pair.max(d);
            }
        }
        let ok = worst_ratio <= 1.05 && worst_pair <= 0.05;
        if ok { good += 1; }
        println!("seed {seed} n={n} k={k}: ratio={worst_ratio:.4} pair={worst_pair:.4} {}", if ok { "OK" } else { "--" });
    }
    println!("good {good}/{scanned}");
}
