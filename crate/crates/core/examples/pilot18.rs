// Scratch diagnostics: sparsification orderings on the two-layer task.
use horst_core::optim::{Optimizer, OptimizerConfig, OptimizerKind};
use horst_core::problems::{two_layer_task, SupervisedTask};
use horst_core::sparsify::{
    acdc_train, one_shot_prune_eval, weight_distribution_report, AcdcSchedule,
};

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "acdc".into());
    use horst_core::optim::{Schedule, ScheduleKind};
    let tri = Schedule { kind: ScheduleKind::Triangular, warmup: 100, total: 2000 };
    let adamw_cfg = OptimizerConfig::default()
        .with_eta(2e-3)
        .with_lambda(0.1)
        .with_schedule(tri);
    let horst_cfg = OptimizerConfig::horst_defaults()
        .with_eta(2e-3)
        .with_lambda(0.1)
        .with_beta(1e-2)
        .with_schedule(tri);

    if which == "acdc" {
        let sched = AcdcSchedule::default_for(2000, 0.9).unwrap();
        for seed in [0u64, 1, 2] {
            let task = two_layer_task(seed);
            let a = acdc_train(&task, OptimizerKind::AdamW, adamw_cfg, &sched, false).unwrap();
            let h = acdc_train(&task, OptimizerKind::Horst, horst_cfg, &sched, false).unwrap();
            println!(
                "seed {seed}: adamw val_acc={:.4} train_acc={:.4} | horst val_acc={:.4} train_acc={:.4}",
                a.val_accuracy, a.train_accuracy, h.val_accuracy, h.train_accuracy
            );
        }
    }

    if which == "oneshot" {
        let cos = Schedule { kind: ScheduleKind::Cosine, warmup: 240, total: 2000 };
        let adamw_dense = OptimizerConfig::default()
            .with_eta(1e-3)
            .with_lambda(0.1)
            .with_schedule(cos);
        let horst_dense = OptimizerConfig::horst_defaults()
            .with_eta(1e-3)
            .with_lambda(0.1)
            .with_schedule(cos);
        for seed in [0u64, 1, 2] {
            let task = two_layer_task(seed);
            let grid = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
            let mut results = Vec::new();
            for (name, kind, cfg) in [
                ("adamw", OptimizerKind::AdamW, adamw_dense),
                ("horst", OptimizerKind::Horst, horst_dense),
            ] {
                let mut theta = task.init_params();
                let mut opt = Optimizer::new(kind, cfg, theta.len());
                for _ in 0..2000 {
                    let (_, g) = task.train_loss_grad(theta.values());
                    opt.step_with_grad(theta.values_mut(), &g).unwrap();
                }
                let curve = one_shot_prune_eval(&theta, &task, &grid).unwrap();
                let weights: Vec<f64> = ["w1", "w2"]
                    .iter()
                    .flat_map(|s| theta.segment_values(s).unwrap().to_vec())
                    .collect();
                let report = weight_distribution_report(&weights, 50).unwrap();
                println!(
                    "seed {seed} {name}: dense val_loss={:.4} acc={:.4} | s=0.5 val_loss={:.4} acc={:.4} | frac_near_zero={:.4} kurt={:.2}",
                    curve[0].val_loss,
                    curve[0].val_accuracy,
                    curve[5].val_loss,
                    curve[5].val_accuracy,
                    report.frac_near_zero,
                    report.excess_kurtosis
                );
                results.push((name, curve));
            }
            let a50 = results[0].1[5].val_loss;
            let h50 = results[1].1[5].val_loss;
            println!("  -> s=0.5 ordering horst<adamw: {}", h50 < a50);
        }
    }
}
