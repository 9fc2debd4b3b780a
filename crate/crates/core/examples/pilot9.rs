// Scratch diagnostics. Not part of the build.
use horst_core::flows::MarginProblem;
use horst_core::scalar::{norm_l1, sign};

fn rates(problem: &MarginProblem, theta: &[f64], q: f64) -> Option<Vec<f64>> {
    let grad = problem.grad(theta);
    let ginf = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    if ginf == 0.0 || !ginf.is_finite() {
        return None;
    }
    let scale = ginf.powf(q - 1.0);
    Some(
        theta
            .iter()
            .zip(&grad)
            .map(|(t, g)| -sign(*t) * sign(*g) * (g.abs() / ginf).powf(q - 1.0) * scale)
            .collect(),
    )
}

fn main() {
    let (problem, _cert) = MarginProblem::random_separable_unique(3, 6, 500).unwrap();
    let q = 2.0;
    let mut theta: Vec<f64> = vec![0.1, -0.1, 0.1];
    let mut h = 0.01f64;
    let mut t = 0.0f64;
    let mut log_loss = problem.log_loss(&theta);
    println!("t=0: logL={log_loss:.6} theta={theta:?}");
    for step in 0..2000usize {
        let Some(r) = rates(&problem, &theta, q) else { println!("rates gone"); break; };
        let mut halvings = 0;
        loop {
            let e: Vec<f64> = r.iter().map(|ri| (h * ri).clamp(-200.0, 200.0)).collect();
            let cand: Vec<f64> = theta
                .iter()
                .zip(&e)
                .map(|(x, ei)| sign(*x) * (x.abs() * ei.exp()).max(1e-150))
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
            if halvings > 35 {
                println!("STALL step {step} t={t:.4} logL={log_loss:.6}");
                println!("theta={theta:?}");
                println!("rates={r:?}");
                println!("grad={:?}", problem.grad(&theta));
                return;
            }
        }
        if step < 12 || step % 100 == 0 {
            println!(
                "step {step}: t={t:.4e} h={h:.2e} logL={log_loss:.6} theta={theta:?} l1={:.3e}",
                norm_l1(&theta)
            );
        }
    }
}
