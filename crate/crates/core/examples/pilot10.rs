// Scratch diagnostics. Not part of the build.
use horst_core::flows::{integrate_steepest_mirror, FlowConfig, MarginProblem};

fn main() {
    let (problem, cert) = MarginProblem::random_separable_unique(3, 6, 500).unwrap();
    for p in [2.0, 3.0, 4.0] {
        let mut cfg = FlowConfig::new(p).unwrap();
        cfg.stop_margin = 0.98 / cert.objective;
        let theta0: Vec<f64> = (0..problem.dim())
            .map(|j| if j % 2 == 0 { 0.1 } else { -0.1 })
            .collect();
        match integrate_steepest_mirror(&problem, &cfg, &theta0) {
            Ok(traj) => {
                let last = traj.checkpoints.last().unwrap();
                println!(
                    "p={p}: ok converged={} accepts={} rejects={} final logL={:.3} nm={:.4} dir={:?}",
                    traj.converged, traj.accepted_steps, traj.rejected_steps,
                    last.log_loss, last.normalized_margin,
                    traj.final_direction().iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>()
                );
            }
            Err(e) => println!("p={p}: ERR {e}"),
        }
    }
    println!("oracle dir: {:?}", cert.theta_star.iter().map(|x| (x / cert.objective * 1e4).round() / 1e4).collect::<Vec<_>>());
}
