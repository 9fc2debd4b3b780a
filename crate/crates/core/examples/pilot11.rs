// Scratch diagnostics. Not part of the build.
use horst_core::flows::{integrate_steepest_mirror, l1_max_margin, FlowConfig, MarginProblem};
use horst_core::scalar::norm_l1;

fn main() {
    let (problem, cert) = MarginProblem::random_separable_unique(5, 6, 502).unwrap();
    println!("n={} K={}", problem.dim(), problem.count());
    println!("theta* = {:?}", cert.theta_star);
    println!("objective = {}", cert.objective);
    println!("duals = {:?}", cert.duals);
    println!("active = {:?}", cert.active_set);
    println!("unique = {}", cert.unique);

    // Dual tightness per coordinate: |sum_i nu_i y_i x_ij| vs 1.
    let n = problem.dim();
    let mut combo = vec![0.0; n];
    for ((xi, yi), nu) in problem.x.iter().zip(&problem.y).zip(&cert.duals) {
        for (cj, xj) in combo.iter_mut().zip(xi) {
            *cj += nu * yi * xj;
        }
    }
    println!("dual combo (|.|<=1): {combo:?}");

    let mut cfg = FlowConfig::new(2.0).unwrap();
    cfg.stop_margin = 0.995 / cert.objective;
    cfg.dir_tol = 0.02;
    let theta0: Vec<f64> = (0..n)
        .map(|j| {
            let s = if cert.theta_star[j] != 0.0 {
                cert.theta_star[j].signum()
            } else if j % 2 == 0 { 1.0 } else { -1.0 };
            0.1 * s
        })
        .collect();
    let traj = integrate_steepest_mirror(&problem, &cfg, &theta0).unwrap();
    let last = traj.checkpoints.last().unwrap();
    println!("flow: t={:.2e} logL={:.2} margins={:?}", last.t, last.log_loss, problem.margins(&traj.theta_final).iter().map(|m| (m / problem.margins(&traj.theta_final).iter().cloned().fold(f64::INFINITY, f64::min) * 100.0).round() / 100.0).collect::<Vec<_>>());
    println!("flow dir      = {:?}", traj.final_direction());
    println!("oracle dir    = {:?}", cert.theta_star.iter().map(|v| v / cert.objective).collect::<Vec<_>>());
    let m = problem.margins(&traj.theta_final);
    let minm = m.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("scaled l1 ratio = {}", norm_l1(&traj.theta_final) / minm / cert.objective);
    let _ = l1_max_margin;
}
