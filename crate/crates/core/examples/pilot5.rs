// Scratch diagnostics. Not part of the build.
use horst_core::flows::{l1_max_margin, MarginProblem};
use horst_core::lp;
use horst_core::optim::{Optimizer, OptimizerConfig, OptimizerKind};
use horst_core::param::GradOracle;
use horst_core::problems::{make_sparse_teacher, support_recovery_metrics};

fn profile(name: &str, theta: &[f64], teacher: &[f64]) {
    let m = support_recovery_metrics(theta, teacher);
    let mut mags: Vec<f64> = theta.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let max = mags[0];
    println!(
        "{name:22}: top6={:?} med/max={:.3} sat={:.3} quiet={:.3} top2={}",
        mags[..6].iter().map(|v| (v / max * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
        mags[50] / max,
        m.saturation,
        m.spurious_quiet,
        m.top_k_hit
    );
}

fn main() {
    for seed in [0u64, 1, 2] {
        println!("=== seed {seed} ===");
        let ds = make_sparse_teacher(100, 80, 2, seed).unwrap();
        let problem = ds.to_margin_problem();

        // L1 max margin
        let cert = l1_max_margin(&problem).unwrap();
        profile("L1 max-margin", &cert.theta_star, &ds.teacher);

        // Linf max margin: min t s.t. margins >= 1, theta+ + theta- <= t.
        let d = 100;
        let k = 80;
        let mut c = vec![0.0; 2 * d + 1];
        c[2 * d] = 1.0;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut h = Vec::new();
        for i in 0..k {
            let mut row = vec![0.0; 2 * d + 1];
            for j in 0..d {
                row[j] = ds.y[i] * ds.x[i][j];
                row[d + j] = -ds.y[i] * ds.x[i][j];
            }
            rows.push(row);
            h.push(1.0);
        }
        for j in 0..d {
            let mut row = vec![0.0; 2 * d + 1];
            row[j] = -1.0;
            row[d + j] = -1.0;
            row[2 * d] = 1.0;
            rows.push(row);
            h.push(0.0);
        }
        let sol = lp::solve_min(&c, &rows, &h).unwrap();
        let theta_inf: Vec<f64> = (0..d).map(|j| sol.z[j] - sol.z[d + j]).collect();
        profile("Linf max-margin", &theta_inf, &ds.teacher);

        // signSGD profile at T=1e4 (may freeze on underflow; that's fine).
        let mut theta = vec![0.0f64; 100];
        let mut opt = Optimizer::new(
            OptimizerKind::<f64>::SignSgd,
            OptimizerConfig::default().with_eta(1e-1),
            100,
        );
        let mut oracle = GradOracle::new(|t: &[f64]| ds.exp_loss_and_grad(t).1);
        for _ in 0..10_000 {
            opt.step(&mut theta, &mut oracle).unwrap();
        }
        profile("signsgd T=1e4", &theta, &ds.teacher);
    }
}
