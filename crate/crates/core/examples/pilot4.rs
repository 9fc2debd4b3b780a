// Scratch diagnostics. Not part of the build.
use horst_core::optim::{Optimizer, OptimizerConfig, OptimizerKind};
use horst_core::param::GradOracle;
use horst_core::problems::{make_sparse_teacher, support_recovery_metrics};
use horst_core::scalar::norm_linf;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn run(name: &str, kind: OptimizerKind<f64>, cfg: OptimizerConfig, steps: usize, init: &str) {
    let ds = make_sparse_teacher(100, 80, 2, 0).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(777);
    let mut theta: Vec<f64> = match init {
        "zero" => vec![0.0; 100],
        "pos_small" => vec![1e-3; 100],
        "signed_01" => (0..100)
            .map(|_| 0.1 * if rng.random_bool(0.5) { 1.0 } else { -1.0f64 })
            .collect(),
        _ => unreachable!(),
    };
    let mut opt = Optimizer::new(kind, cfg, 100);
    let mut oracle = GradOracle::new(|t: &[f64]| ds.exp_loss_and_grad(t).1);
    for _ in 0..steps {
        opt.step(&mut theta, &mut oracle).unwrap();
    }
    let (loss, _) = ds.exp_loss_and_grad(&theta);
    let m = support_recovery_metrics(&theta, &ds.teacher);
    let mut mags: Vec<f64> = theta.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    println!(
        "{name:28} T={steps:6} init={init:9}: loss={loss:.2e} |th|inf={:.3} med/max={:.3} sat={:.2} quiet={:.2} top2={}",
        norm_linf(&theta), mags[50] / mags[0], m.saturation, m.spurious_quiet, m.top_k_hit
    );
}

fn main() {
    let base = OptimizerConfig::default().with_eta(1e-2);
    run("adam T1e4", OptimizerKind::Adam, base, 10_000, "zero");
    run("adam T1e5", OptimizerKind::Adam, base, 100_000, "zero");
    run("adam signed init", OptimizerKind::Adam, base, 10_000, "signed_01");
    run("adamw lam=0.1", OptimizerKind::AdamW, base.with_lambda(0.1), 10_000, "zero");
    run("adamw lam=0.01", OptimizerKind::AdamW, base.with_lambda(0.01), 10_000, "zero");
    let mut b2 = base;
    b2.beta2 = 0.95;
    run("adam b2=0.95", OptimizerKind::Adam, b2, 10_000, "zero");

    let ea = base.with_alpha(5.0);
    run("exp_adam a5 pos", OptimizerKind::exp_adam(), ea, 10_000, "pos_small");
    run("exp_adam a5 signed", OptimizerKind::exp_adam(), ea, 10_000, "signed_01");
    run("exp_adam a20 signed", OptimizerKind::exp_adam(), base.with_alpha(20.0), 10_000, "signed_01");
    run("exp_adam a5 T1e5", OptimizerKind::exp_adam(), ea, 100_000, "signed_01");
    run("adam_exp a5 signed", OptimizerKind::adam_exp(), ea, 10_000, "signed_01");
    run("horst a5 lam.01 signed", OptimizerKind::Horst, ea.with_lambda(0.01), 10_000, "signed_01");
}
