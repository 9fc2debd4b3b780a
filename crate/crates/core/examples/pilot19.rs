// Scratch diagnostics: per-phase AC/DC trace for HORST.
use horst_core::optim::{Optimizer, OptimizerConfig, OptimizerKind};
use horst_core::problems::{two_layer_task, SupervisedTask};
use horst_core::sparsify::{apply_mask, magnitude_prune, zero_masked_moments, AcdcSchedule, PhaseEvent};

fn main() {
    let alpha: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5.0);
    let task = two_layer_task(2);
    let sched = AcdcSchedule::default_for(2000, 0.9).unwrap();
    use horst_core::optim::{Schedule, ScheduleKind};
    let beta: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let cfg = OptimizerConfig::default()
        .with_eta(2e-3)
        .with_lambda(0.1)
        .with_alpha(alpha)
        .with_beta(beta)
        .with_schedule(Schedule { kind: ScheduleKind::Triangular, warmup: 100, total: 2000 });
    let mut theta = task.init_params();
    let scope = task.prunable_segments();
    let mut opt = Optimizer::new(OptimizerKind::Horst, cfg, theta.len());
    let mut mask = None;
    let mut clamped_total = 0usize;
    for step in 0..sched.total_steps {
        match sched.event_at(step) {
            Some(PhaseEvent::Prune) => {
                let m = magnitude_prune(&theta, sched.sparsity, &scope, step as u64).unwrap();
                apply_mask(&mut theta, &m);
                zero_masked_moments(opt.adam_state_mut().unwrap(), &m);
                mask = Some(m);
                println!(
                    "step {step}: PRUNE -> train_acc={:.4} loss={:.4}",
                    task.train_accuracy(theta.values()),
                    task.train_loss_grad(theta.values()).0
                );
            }
            Some(PhaseEvent::Release) => {
                mask = None;
                println!(
                    "step {step}: RELEASE -> train_acc={:.4} loss={:.4}",
                    task.train_accuracy(theta.values()),
                    task.train_loss_grad(theta.values()).0
                );
            }
            None => {}
        }
        let (_, mut g) = task.train_loss_grad(theta.values());
        if let Some(m) = &mask {
            for i in m.masked_indices() {
                g[i] = 0.0;
            }
        }
        let info = opt.step_with_grad(theta.values_mut(), &g).unwrap();
        clamped_total += info.exp_clamped;
        if let Some(m) = &mask {
            apply_mask(&mut theta, m);
        }
        if step % 200 == 199 {
            let w1 = theta.segment_values("w1").unwrap();
            let absmax = w1.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            println!(
                "step {step}: acc={:.4} loss={:.4} |w1|max={:.3} clamped={clamped_total}",
                task.train_accuracy(theta.values()),
                task.train_loss_grad(theta.values()).0,
                absmax
            );
        }
    }
}
