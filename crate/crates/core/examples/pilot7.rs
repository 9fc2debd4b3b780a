// Scratch diagnostics. Not part of the build.
use horst_core::optim::{Optimizer, OptimizerConfig, OptimizerKind};
use horst_core::param::GradOracle;
use horst_core::problems::{make_sparse_teacher, support_recovery_metrics};

fn main() {
    let ds = make_sparse_teacher(100, 80, 2, 0).unwrap();
    let mut theta = vec![0.0f64; 100];
    let mut opt = Optimizer::new(
        OptimizerKind::<f64>::Adam,
        OptimizerConfig::default().with_eta(1e-2),
        100,
    );
    let mut oracle = GradOracle::new(|t: &[f64]| ds.exp_loss_and_grad(t).1);
    for step in 0..1_000_000usize {
        opt.step(&mut theta, &mut oracle).unwrap();
        if [9_999, 99_999, 299_999, 999_999].contains(&step) {
            let m = support_recovery_metrics(&theta, &ds.teacher);
            let mut mags: Vec<f64> = theta.iter().map(|x| x.abs()).collect();
            mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let (loss, _) = ds.exp_loss_and_grad(&theta);
            println!(
                "T={:7}: sat={:.3} med/max={:.3} quiet={:.3} loss={:.2e}",
                step + 1, m.saturation, mags[50] / mags[0], m.spurious_quiet, loss
            );
        }
    }
}
