// Scratch diagnostics. Not part of the build.
use horst_core::flows::{integrate_steepest_mirror, FlowConfig, MarginProblem};

fn main() {
    let (problem, cert) = MarginProblem::random_separable_well_posed(3, 6, 503).unwrap();
    let theta0: Vec<f64> = (0..3)
        .map(|j| {
            let s = if cert.theta_star[j] != 0.0 { cert.theta_star[j].signum() } else if j % 2 == 0 { 1.0 } else { -1.0 };
            0.1 * s
        })
        .collect();
    let mut cfg = FlowConfig::new(3.0).unwrap();
    cfg.max_steps = 400_000;
    cfg.dir_tol = 0.0;
    let traj = integrate_steepest_mirror(&problem, &cfg, &theta0).unwrap();
    let dir = traj.final_direction();
    println!("trapped dir (L1-normalized) = {dir:?}");

    // Solve combo_j = sign(theta_j) over the active set {1,2,3}.
    let act = [1usize, 2, 3];
    let mut a = vec![vec![0.0f64; 4]; 3];
    for (col, &i) in act.iter().enumerate() {
        for j in 0..3 {
            a[j][col] = problem.y[i] * problem.x[i][j];
        }
    }
    for j in 0..3 {
        a[j][3] = dir[j].signum();
    }
    // Gaussian elimination
    for c in 0..3 {
        let piv = (c..3).max_by(|&r1, &r2| a[r1][c].abs().partial_cmp(&a[r2][c].abs()).unwrap()).unwrap();
        a.swap(c, piv);
        for r in 0..3 {
            if r != c {
                let f = a[r][c] / a[c][c];
                for cc in c..4 {
                    let v = a[c][cc];
                    a[r][cc] -= f * v;
                }
            }
        }
    }
    let nu: Vec<f64> = (0..3).map(|r| a[r][3] / a[r][r]).collect();
    println!("nu solving combo=sign(theta) on active set {{1,2,3}}: {nu:?}");
    println!("(KKT requires all nu >= 0)");
}
