// Scratch diagnostics. Not part of the build.
use horst_core::flows::{integrate_steepest_mirror, FlowConfig, MarginProblem, l1_max_margin};
use horst_core::scalar::norm_l1;

fn main() {
    let (problem, cert) = MarginProblem::random_separable_well_posed(3, 6, 503).unwrap();
    println!("x = {:?}", problem.x);
    println!("y = {:?}", problem.y);
    println!("theta* = {:?} obj = {}", cert.theta_star, cert.objective);
    println!("duals = {:?} active = {:?}", cert.duals, cert.active_set);

    let theta0: Vec<f64> = (0..3)
        .map(|j| {
            let s = if cert.theta_star[j] != 0.0 { cert.theta_star[j].signum() } else if j % 2 == 0 { 1.0 } else { -1.0 };
            0.1 * s
        })
        .collect();
    for p in [2.0, 3.0] {
        let mut cfg = FlowConfig::new(p).unwrap();
        cfg.max_steps = 400_000;
        cfg.dir_tol = 0.0; // no early stop
        let traj = integrate_steepest_mirror(&problem, &cfg, &theta0).unwrap();
        let dir = traj.final_direction();
        let margins = problem.margins(&traj.theta_final);
        let minm = margins.iter().cloned().fold(f64::INFINITY, f64::min);
        let norm_margins: Vec<f64> = margins.iter().map(|m| (m / minm * 1000.0).round() / 1000.0).collect();
        println!("p={p}: dir={dir:?}");
        println!("  margins/min = {norm_margins:?}");
        println!("  l1-scaled ratio = {}", norm_l1(&traj.theta_final) / minm / cert.objective);
    }
    // What does the p=3 point look like as an LP feasible point?
    let _ = l1_max_margin;
}
