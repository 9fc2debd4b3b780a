// Scratch diagnostics. Not part of the build.
use horst_core::flows::MarginProblem;
use horst_core::scalar::{norm_l1, norm_linf, sign};

fn main() {
    // Reproduce instance 0 of the flow pilot.
    let (problem, cert) = MarginProblem::random_separable_unique(3, 6, 500).unwrap();
    println!("oracle objective {:.4}, theta* {:?}", cert.objective, cert.theta_star);
    let q: f64 = 2.0;
    let mut theta: Vec<f64> = (0..problem.dim())
        .map(|j| if j % 2 == 0 { 0.1 } else { -0.1 })
        .collect();
    let mut t = 0.0f64;
    let mut h = 0.01f64;
    let mut log_loss = problem.log_loss(&theta);
    let mut stall = 0;
    for step in 0..100_000usize {
        let grad = problem.grad(&theta);
        let ginf = norm_linf(&grad);
        let scale = ginf.powf(q - 1.0);
        let v: Vec<f64> = theta
            .iter()
            .zip(&grad)
            .map(|(x, g)| {
                if x.abs() < 1e-12 { 0.0 } else {
                    -x.abs() * sign(*g) * (g.abs() / ginf).powf(q - 1.0) * scale
                }
            })
            .collect();
        let mut halvings = 0;
        loop {
            let cand: Vec<f64> = theta
                .iter()
                .zip(&v)
                .map(|(x, vi)| {
                    let nx = x + h * vi;
                    if *x != 0.0 && nx * *x < 0.0 { 0.0 } else { nx }
                })
                .collect();
            let cl = problem.log_loss(&cand);
            if cl.is_finite() && cl < log_loss {
                theta = cand;
                log_loss = cl;
                t += h;
                h *= 2.0;
                break;
            }
            halvings += 1;
            h /= 2.0;
            if halvings > 40 {
                println!("STALL at step {step} t={t:.3} h={h:.2e} logL={log_loss:.6}");
                println!("theta = {theta:?}");
                println!("grad  = {grad:?}");
                println!("margins = {:?}", problem.margins(&theta));
                println!("dir = {:?}", theta.iter().map(|x| x / norm_l1(&theta)).collect::<Vec<_>>());
                stall = 1;
                break;
            }
        }
        if stall == 1 { break; }
        if step % 20_000 == 0 {
            println!("step {step}: t={t:.3e} h={h:.2e} logL={log_loss:.4} l1={:.3}", norm_l1(&theta));
        }
    }
}
