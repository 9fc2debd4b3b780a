// Scratch diagnostics. Not part of the build.
use horst_core::flows::{integrate_steepest_mirror, FlowConfig, MarginProblem};

fn main() {
    for inst in 0..10u64 {
        let n = 3 + (inst % 3) as usize;
        let (problem, cert) = MarginProblem::random_separable_well_posed(n, 6, 500 + inst).unwrap();
        for p in [2.0, 3.0, 4.0] {
            let mut cfg = FlowConfig::new(p).unwrap();
            cfg.stop_margin = 0.995 / cert.objective;
            cfg.dir_tol = 0.02;
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
            let t0 = std::time::Instant::now();
            let r = integrate_steepest_mirror(&problem, &cfg, &theta0);
            let el = t0.elapsed().as_secs_f64();
            match r {
                Ok(traj) => {
                    let last = traj.checkpoints.last().unwrap();
                    let dir = traj.final_direction();
                    let gap = dir
                        .iter()
                        .zip(&cert.theta_star)
                        .map(|(a, b)| (a - b / cert.objective).abs())
                        .fold(0.0, f64::max);
                    eprintln!(
                        "inst {inst} p={p}: {el:.2}s acc={} rej={} conv={} t={:.1e} linf={:.1e} oracle_gap={gap:.4}",
                        traj.accepted_steps,
                        traj.rejected_steps,
                        traj.converged,
                        last.t,
                        last.linf
                    );
                }
                Err(e) => eprintln!("inst {inst} p={p}: {el:.2}s ERR {e}"),
            }
        }
    }
}
