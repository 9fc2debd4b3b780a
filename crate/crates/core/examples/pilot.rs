// Scratch pilot for calibrating experiment defaults. Not part of the build.

use horst_core::flows::{integrate_steepest_mirror, l1_max_margin, FlowConfig, MarginProblem};
use horst_core::mirror::MirrorMap;
use horst_core::optim::{Optimizer, OptimizerConfig, OptimizerKind};
use horst_core::param::GradOracle;
use horst_core::problems::{make_sparse_teacher, support_recovery_metrics, two_layer_task};
use horst_core::scalar::norm_l1;

fn train_linear(
    kind: OptimizerKind<f64>,
    cfg: OptimizerConfig,
    seed: u64,
    steps: usize,
) -> (Vec<f64>, f64) {
    let ds = make_sparse_teacher(100, 80, 2, seed).unwrap();
    let mut theta = vec![0.0f64; 100];
    // Multiplicative updates need nonzero starts.
    let needs_nonzero = matches!(
        kind,
        OptimizerKind::Composed { .. } | OptimizerKind::Horst | OptimizerKind::Ham
    );
    if needs_nonzero {
        theta = vec![1e-3; 100];
    }
    let mut opt = Optimizer::new(kind, cfg, 100);
    let mut oracle = GradOracle::new(|t: &[f64]| ds.exp_loss_and_grad(t).1);
    for _ in 0..steps {
        opt.step(&mut theta, &mut oracle).unwrap();
    }
    let (loss, _) = ds.exp_loss_and_grad(&theta);
    (theta, loss)
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "all".into());

    if which == "toy" || which == "all" {
        println!("=== implicit-bias toy (D=100, N=80, T=10000) ===");
        for seed in [0u64, 1, 2] {
            let ds = make_sparse_teacher(100, 80, 2, seed).unwrap();
            let t = 10_000;
            let adam = train_linear(
                OptimizerKind::Adam,
                OptimizerConfig::default().with_eta(1e-2),
                seed,
                t,
            );
            let exp_adam = train_linear(
                OptimizerKind::exp_adam(),
                OptimizerConfig::default().with_eta(1e-2).with_alpha(5.0),
                seed,
                t,
            );
            let adam_exp = train_linear(
                OptimizerKind::adam_exp(),
                OptimizerConfig::default().with_eta(1e-2).with_alpha(5.0),
                seed,
                t,
            );
            let ma = support_recovery_metrics(&adam.0, &ds.teacher);
            let me = support_recovery_metrics(&exp_adam.0, &ds.teacher);
            let mx = support_recovery_metrics(&adam_exp.0, &ds.teacher);
            println!(
                "seed {seed}: adam sat={:.3} quiet={:.3} | exp_adam top2={} quiet={:.3} sat={:.3} loss={:.2e} | adam_exp quiet={:.3}",
                ma.saturation, ma.spurious_quiet, me.top_k_hit, me.spurious_quiet, me.saturation, exp_adam.1, mx.spurious_quiet
            );
        }
    }

    if which == "sgd" || which == "all" {
        println!("=== sgd/exp_sgd/signsgd/mirrors ===");
        for seed in [0u64] {
            let ds = make_sparse_teacher(100, 80, 2, seed).unwrap();
            let t = 10_000;
            let sgd = train_linear(
                OptimizerKind::Sgd,
                OptimizerConfig::default().with_eta(1e-2),
                seed,
                t,
            );
            let exp_sgd = train_linear(
                OptimizerKind::exp_sgd(),
                OptimizerConfig::default().with_eta(1e-2).with_alpha(5.0),
                seed,
                t,
            );
            let signsgd = train_linear(
                OptimizerKind::SignSgd,
                OptimizerConfig::default().with_eta(1e-1),
                seed,
                t,
            );
            let hyp = train_linear(
                OptimizerKind::MirrorDescent(MirrorMap::hyperbolic_entropy(1e-2)),
                OptimizerConfig::default().with_eta(1e-2),
                seed,
                t,
            );
            let cosh = train_linear(
                OptimizerKind::MirrorDescent(MirrorMap::cosh_entropy()),
                OptimizerConfig::default().with_eta(0.9),
                seed,
                t,
            );
            let m_sgd = support_recovery_metrics(&sgd.0, &ds.teacher);
            let m_esgd = support_recovery_metrics(&exp_sgd.0, &ds.teacher);
            println!(
                "seed {seed}: sgd quiet={:.3} loss={:.2e} | exp_sgd top2={} quiet={:.3} loss={:.2e}",
                m_sgd.spurious_quiet, sgd.1, m_esgd.top_k_hit, m_esgd.spurious_quiet, exp_sgd.1
            );
            println!(
                "   signsgd loss={:.3e} | cosh loss={:.3e} (cosh should be worse) | hyp loss={:.3e}",
                signsgd.1, cosh.1, hyp.1
            );
        }
    }

    if which == "flow" || which == "all" {
        println!("=== flow vs oracle (10 instances, p in 2,3,4) ===");
        let mut worst_ratio = 0.0f64;
        let mut worst_pair = 0.0f64;
        for inst in 0..10u64 {
            let (problem, cert) =
                MarginProblem::random_separable_well_posed(3 + (inst % 3) as usize, 6, 500 + inst)
                    .unwrap();
            let mut dirs: Vec<Vec<f64>> = Vec::new();
            for p in [2.0, 3.0, 4.0] {
                let mut cfg = FlowConfig::new(p).unwrap();
                cfg.stop_margin = 0.995 / cert.objective;
                cfg.dir_tol = 0.02;
                // Multiplicative dynamics cannot flip signs; start in the
                // oracle's orthant with the default 0.1 magnitude.
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
                let traj = integrate_steepest_mirror(&problem, &cfg, &theta0).unwrap();
                let dir = traj.final_direction();
                // Rescale endpoint to unit min margin and compare L1 norms.
                let margins = problem.margins(&traj.theta_final);
                let min_m = margins.iter().cloned().fold(f64::INFINITY, f64::min);
                let scaled_l1 = norm_l1(&traj.theta_final) / min_m;
                let ratio = scaled_l1 / cert.objective;
                worst_ratio = worst_ratio.max(ratio);
                println!(
                    "  inst {inst} p={p}: ratio={ratio:.4} steps={} converged={} checkpoints={}",
                    traj.accepted_steps,
                    traj.converged,
                    traj.checkpoints.len()
                );
                dirs.push(dir);
            }
            for i in 0..dirs.len() {
                for j in i + 1..dirs.len() {
                    let diff = dirs[i]
                        .iter()
                        .zip(&dirs[j])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    if diff > 0.05 {
                        println!("  !! inst {inst} pair ({i},{j}) gap {diff:.4}");
                    }
                    worst_pair = worst_pair.max(diff);
                }
            }
        }
        println!("worst margin-scaled L1 ratio: {worst_ratio:.4} (need <= 1.05)");
        println!("worst cross-p direction gap: {worst_pair:.4} (need <= 0.05)");
    }

    if which == "two" || which == "all" {
        println!("=== two-layer dense training (2000 steps, eta 1e-3) ===");
        for seed in [0u64, 1, 2] {
            let task = two_layer_task(seed);
            let mut theta = task.init_params();
            let cfg = OptimizerConfig::default().with_eta(1e-3).with_lambda(0.0);
            let mut opt = Optimizer::new(OptimizerKind::AdamW, cfg, theta.len());
            for _ in 0..2000 {
                let (_, g) = task.loss_grad(theta.values(), &task.train);
                opt.step_with_grad(theta.values_mut(), &g).unwrap();
            }
            println!(
                "seed {seed}: train acc {:.4}, val acc {:.4}",
                task.accuracy(theta.values(), &task.train),
                task.accuracy(theta.values(), &task.val)
            );
        }
    }
}
