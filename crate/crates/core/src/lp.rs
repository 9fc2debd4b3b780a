//! Dense two-phase simplex for small linear programs.
//!
//! Solves `min cᵀz` subject to `Gz >= h`, `z >= 0`, with Bland's rule for
//! anti-cycling and a fixed pivot tolerance. Sized for desk-scale problems
//! (tens of variables); everything is dense and recomputed per pivot.

use crate::error::{Error, Result};

/// Pivot / feasibility tolerance.
pub const PIVOT_TOL: f64 = 1e-10;

const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Primal solution for the structural variables.
    pub z: Vec<f64>,
    pub objective: f64,
    /// Dual multiplier per constraint row (nonnegative at optimality).
    pub duals: Vec<f64>,
}

/// `min cᵀz : Gz >= h, z >= 0` for a dense row-major `G` of shape
/// `(h.len(), c.len())`.
pub fn solve_min(c: &[f64], g_rows: &[Vec<f64>], h: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = h.len();
    if g_rows.len() != m || g_rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument(
            "constraint matrix shape does not match costs/rhs".into(),
        ));
    }

    // Equality form: G z - s = h with surplus s >= 0, rows flipped so the
    // right-hand side is nonnegative, plus one artificial per row.
    // Column layout: [z (n) | s (m) | a (m) | rhs].
    let total = n + 2 * m;
    let mut tab = vec![vec![0.0f64; total + 1]; m];
    for i in 0..m {
        let flip = if h[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            tab[i][j] = flip * g_rows[i][j];
        }
        tab[i][n + i] = -flip;
        tab[i][n + m + i] = 1.0;
        tab[i][total] = flip * h[i];
    }
    let mut basis: Vec<usize> = (0..m).map(|i| n + m + i).collect();

    // Phase 1: minimize the artificial sum.
    let mut phase1_cost = vec![0.0f64; total];
    for j in n + m..total {
        phase1_cost[j] = 1.0;
    }
    let p1 = run_simplex(&mut tab, &mut basis, &phase1_cost, total)?;
    if p1 > 1e-7 {
        return Err(Error::Infeasible);
    }
    drive_out_artificials(&mut tab, &mut basis, n + m);

    // Phase 2: real objective with artificial columns barred.
    let mut phase2_cost = vec![0.0f64; total];
    phase2_cost[..n].copy_from_slice(c);
    let restricted = n + m;
    let objective = run_simplex(&mut tab, &mut basis, &phase2_cost, restricted)?;

    let mut z = vec![0.0f64; n];
    for (row, &var) in basis.iter().enumerate() {
        if var < n {
            z[var] = tab[row][total];
        }
    }
    // Dual of row i is the reduced cost of its surplus column.
    let reduced = reduced_costs(&tab, &basis, &phase2_cost, total);
    let duals: Vec<f64> = (0..m).map(|i| reduced[n + i]).collect();

    Ok(LpSolution {
        z,
        objective,
        duals,
    })
}

fn reduced_costs(tab: &[Vec<f64>], basis: &[usize], cost: &[f64], width: usize) -> Vec<f64> {
    let rhs_col = tab[0].len() - 1;
    let mut reduced = cost[..width].to_vec();
    for (row, &var) in basis.iter().enumerate() {
        let cb = cost[var];
        if cb != 0.0 {
            for (j, r) in reduced.iter_mut().enumerate() {
                let _ = rhs_col;
                *r -= cb * tab[row][j];
            }
        }
    }
    reduced
}

/// Runs simplex iterations on the first `width` columns until optimal.
/// Returns the objective value of the current cost vector.
fn run_simplex(
    tab: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    width: usize,
) -> Result<f64> {
    let m = tab.len();
    let rhs_col = tab[0].len() - 1;
    for _ in 0..MAX_PIVOTS {
        let reduced = reduced_costs(tab, basis, cost, width);
        // Bland: lowest-index column with a negative reduced cost.
        let entering = (0..width).find(|&j| reduced[j] < -PIVOT_TOL);
        let Some(col) = entering else {
            let obj = basis
                .iter()
                .enumerate()
                .map(|(row, &var)| cost[var] * tab[row][rhs_col])
                .sum();
            return Ok(obj);
        };
        // Ratio test; ties broken by the lowest basis variable index.
        let mut leave: Option<(usize, f64)> = None;
        for row in 0..m {
            let a = tab[row][col];
            if a > PIVOT_TOL {
                let ratio = tab[row][rhs_col] / a;
                match leave {
                    None => leave = Some((row, ratio)),
                    Some((best_row, best_ratio)) => {
                        if ratio < best_ratio - PIVOT_TOL
                            || ((ratio - best_ratio).abs() <= PIVOT_TOL
                                && basis[row] < basis[best_row])
                        {
                            leave = Some((row, ratio));
                        }
                    }
                }
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::Unbounded);
        };
        pivot(tab, basis, row, col);
    }
    Err(Error::IntegrationFailure(
        "simplex exceeded the pivot budget".into(),
    ))
}

fn pivot(tab: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let width = tab[0].len();
    let p = tab[row][col];
    for j in 0..width {
        tab[row][j] /= p;
    }
    for r in 0..tab.len() {
        if r != row {
            let factor = tab[r][col];
            if factor != 0.0 {
                for j in 0..width {
                    tab[r][j] -= factor * tab[row][j];
                }
            }
        }
    }
    basis[row] = col;
}

/// After phase 1, pivot any basic artificial (necessarily at value 0) onto a
/// real column so phase 2 never reactivates it. Rows with no real pivot are
/// redundant and left in place with a zero artificial.
fn drive_out_artificials(tab: &mut [Vec<f64>], basis: &mut [usize], real_width: usize) {
    for row in 0..tab.len() {
        if basis[row] >= real_width {
            if let Some(col) = (0..real_width).find(|&j| tab[row][j].abs() > PIVOT_TOL) {
                pivot(tab, basis, row, col);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_two_variable_program() {
        // min x + y : x + y >= 2  ->  objective 2.
        let sol = solve_min(&[1.0, 1.0], &[vec![1.0, 1.0]], &[2.0]).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-9);
        assert!((sol.z[0] + sol.z[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn binding_mix_of_constraints() {
        // min 2x + 3y : x + y >= 4, x >= 1, y >= 1. Optimum at (3, 1): 9.
        let g = vec![vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let sol = solve_min(&[2.0, 3.0], &g, &[4.0, 1.0, 1.0]).unwrap();
        assert!((sol.objective - 9.0).abs() < 1e-9);
        assert!((sol.z[0] - 3.0).abs() < 1e-9);
        assert!((sol.z[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasibility() {
        // x >= 1 and -x >= 1 cannot both hold for x >= 0.
        let g = vec![vec![1.0], vec![-1.0]];
        match solve_min(&[1.0], &g, &[1.0, 1.0]) {
            Err(Error::Infeasible) => {}
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn detects_unboundedness() {
        // min -x : x >= 1 has no lower bound.
        match solve_min(&[-1.0], &[vec![1.0]], &[1.0]) {
            Err(Error::Unbounded) => {}
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn negative_rhs_rows_are_handled() {
        // min x : x >= -5 (vacuous for x >= 0) -> optimum 0.
        let sol = solve_min(&[1.0], &[vec![1.0]], &[-5.0]).unwrap();
        assert!(sol.objective.abs() < 1e-9);
    }

    #[test]
    fn duals_are_nonnegative_and_price_the_objective() {
        let g = vec![vec![1.0, 1.0], vec![2.0, 1.0]];
        let h = [2.0, 3.0];
        let c = [1.0, 1.0];
        let sol = solve_min(&c, &g, &h).unwrap();
        for d in &sol.duals {
            assert!(*d >= -1e-9);
        }
        // Strong duality: h' * duals == objective.
        let dual_obj: f64 = h.iter().zip(&sol.duals).map(|(a, b)| a * b).sum();
        assert!((dual_obj - sol.objective).abs() < 1e-8);
    }
}
