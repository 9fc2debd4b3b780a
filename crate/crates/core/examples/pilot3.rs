// Scratch diagnostics. Not part of the build.
use horst_core::optim::{Optimizer, OptimizerConfig, OptimizerKind};
use horst_core::param::GradOracle;
use horst_core::problems::{make_sparse_teacher, support_recovery_metrics};
use horst_core::scalar::{norm_l1, norm_linf};

fn main() {
    let ds = make_sparse_teacher(100, 80, 2, 0).unwrap();
    for (name, kind, cfg) in [
        ("signsgd", OptimizerKind::<f64>::SignSgd, OptimizerConfig::default().with_eta(1e-1)),
        ("adam_eta1e-3", OptimizerKind::Adam, OptimizerConfig::default().with_eta(1e-3)),
    ] {
        println!("--- {name} ---");
        let mut theta = vec![0.0f64; 100];
        let mut opt = Optimizer::new(kind, cfg, 100);
        let mut oracle = GradOracle::new(|t: &[f64]| ds.exp_loss_and_grad(t).1);
        for step in 0..10_000usize {
            opt.step(&mut theta, &mut oracle).unwrap();
            if step % 2500 == 2499 {
                let (loss, g) = ds.exp_loss_and_grad(&theta);
                let m = support_recovery_metrics(&theta, &ds.teacher);
                let mut mags: Vec<f64> = theta.iter().map(|x| x.abs()).collect();
                mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
                println!(
                    "step {:5}: loss={:.3e} |g|inf={:.2e} |th|inf={:.2} l1={:.1} p25={:.3} median={:.3} sat={:.2} quiet={:.2}",
                    step + 1, loss, norm_linf(&g), norm_linf(&theta), norm_l1(&theta),
                    mags[25] / mags[0], mags[50] / mags[0], m.saturation, m.spurious_quiet
                );
            }
        }
    }
}
