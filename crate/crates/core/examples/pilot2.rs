// Scratch diagnostics. Not part of the build.
use horst_core::optim::{Optimizer, OptimizerConfig, OptimizerKind};
use horst_core::param::GradOracle;
use horst_core::problems::{make_sparse_teacher, support_recovery_metrics};
use horst_core::scalar::{norm_l1, norm_linf};

fn main() {
    let ds = make_sparse_teacher(100, 80, 2, 0).unwrap();
    for (name, kind, cfg, theta0) in [
        ("adam", OptimizerKind::Adam, OptimizerConfig::default().with_eta(1e-2), vec![0.0f64; 100]),
        ("exp_adam", OptimizerKind::exp_adam(), OptimizerConfig::default().with_eta(1e-2).with_alpha(5.0), vec![1e-3f64; 100]),
    ] {
        println!("--- {name} ---");
        let mut theta = theta0;
        let mut opt = Optimizer::new(kind, cfg, 100);
        let mut oracle = GradOracle::new(|t: &[f64]| ds.exp_loss_and_grad(t).1);
        for step in 0..10_000usize {
            opt.step(&mut theta, &mut oracle).unwrap();
            if step % 2000 == 1999 || step == 99 {
                let (loss, g) = ds.exp_loss_and_grad(&theta);
                let m = support_recovery_metrics(&theta, &ds.teacher);
                // sorted |theta| profile summary
                let mut mags: Vec<f64> = theta.iter().map(|x| x.abs()).collect();
                mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
                println!(
                    "step {:5}: loss={:.3e} |g|inf={:.2e} |th|inf={:.3} l1={:.2} top5={:.3?} median={:.4} sat={:.2} quiet={:.2}",
                    step + 1, loss, norm_linf(&g), norm_linf(&theta), norm_l1(&theta),
                    &mags[..5], mags[50], m.saturation, m.spurious_quiet
                );
            }
        }
    }
}
