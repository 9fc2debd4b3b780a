// Scratch diagnostics. Not part of the build.
use horst_core::optim::{Optimizer, OptimizerConfig, OptimizerKind};
use horst_core::param::GradOracle;
use horst_core::problems::{make_sparse_teacher, support_recovery_metrics};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn run(kind: OptimizerKind<f64>, cfg: OptimizerConfig, steps: usize, init: &str, seed: u64) -> (bool, f64, f64) {
    let ds = make_sparse_teacher(100, 80, 2, seed).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xabcdef);
    let mut theta: Vec<f64> = match init {
        "zero" => vec![0.0; 100],
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
    let m = support_recovery_metrics(&theta, &ds.teacher);
    (m.top_k_hit, m.spurious_quiet, m.saturation)
}

fn main() {
    let base = OptimizerConfig::default().with_eta(1e-2);
    println!("per-seed at alpha=5, T=1e4:");
    for seed in [0u64, 1, 2] {
        let ea_signed = run(OptimizerKind::exp_adam(), base.with_alpha(5.0), 10_000, "signed_01", seed);
        let ea_zero = run(OptimizerKind::exp_adam(), base.with_alpha(5.0), 10_000, "zero", seed);
        let ax = run(OptimizerKind::adam_exp(), base.with_alpha(5.0), 10_000, "signed_01", seed);
        let es = run(OptimizerKind::exp_sgd(), base.with_alpha(5.0), 10_000, "signed_01", seed);
        let ad = run(OptimizerKind::Adam, base, 10_000, "zero", seed);
        println!("seed {seed}: exp_adam(signed)=(top2 {}, quiet {:.3}) exp_adam(zero)=(top2 {}, quiet {:.3}) adam_exp quiet {:.3} | exp_sgd (top2 {}, quiet {:.3}) | adam sat {:.3}",
            ea_signed.0, ea_signed.1, ea_zero.0, ea_zero.1, ax.1, es.0, es.1, ad.2);
    }
    println!("\nalpha sweep exp_adam signed init seed 0:");
    for alpha in [5.0, 10.0, 20.0, 50.0, 100.0, 200.0] {
        let r = run(OptimizerKind::exp_adam(), base.with_alpha(alpha), 10_000, "signed_01", 0);
        println!("alpha {alpha:5}: top2 {} quiet {:.3}", r.0, r.1);
    }
}
