//! Classical continuous games on a finite move grid, and their embedding as
//! commuting (diagonal) quantum games.
//!
//! [`solve_classical`] shares no code with the quantum oracle: it is plain
//! vector fictitious play over probability simplices, so it can serve as an
//! independent check on the quantum solver.

use nalgebra::DMatrix;

use crate::energy::EnergyConstraint;
use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::payoff::PayoffKernel;
use crate::solver::{GameInstance, SolverParams};

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalGame {
    blue_moves: Vec<f64>,
    red_moves: Vec<f64>,
    payoff: DMatrix<f64>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyOperator);
    }
    match (1..grid.len()).find(|&i| !(grid[i] > grid[i - 1])) {
        Some(i) => Err(Error::NonIncreasingGrid(i)),
        None => Ok(()),
    }
}

impl ClassicalGame {
    pub fn new(blue_moves: Vec<f64>, red_moves: Vec<f64>, payoff: Vec<Vec<f64>>) -> Result<Self> {
        check_grid(&blue_moves)?;
        check_grid(&red_moves)?;
        let (k, m) = (blue_moves.len(), red_moves.len());
        if payoff.len() != k || payoff.iter().any(|r| r.len() != m) {
            return Err(Error::TableShape {
                rows: payoff.len(),
                cols: payoff.iter().map(Vec::len).max().unwrap_or(0),
                expected_rows: k,
                expected_cols: m,
            });
        }
        for (i, row) in payoff.iter().enumerate() {
            for (j, &z) in row.iter().enumerate() {
                if !(z >= 0.0) || !z.is_finite() {
                    return Err(Error::NegativeKernel {
                        lambda: blue_moves[i],
                        l: red_moves[j],
                        value: z,
                    });
                }
            }
        }
        let payoff = DMatrix::from_fn(k, m, |i, j| payoff[i][j]);
        Ok(Self {
            blue_moves,
            red_moves,
            payoff,
        })
    }

    /// Moves `0, 1, ..., k - 1` and `0, 1, ..., m - 1`.
    pub fn from_matrix(payoff: Vec<Vec<f64>>) -> Result<Self> {
        let k = payoff.len();
        let m = payoff.first().map_or(0, Vec::len);
        Self::new(
            (0..k).map(|i| i as f64).collect(),
            (0..m).map(|j| j as f64).collect(),
            payoff,
        )
    }

    pub fn blue_moves(&self) -> &[f64] {
        &self.blue_moves
    }

    pub fn red_moves(&self) -> &[f64] {
        &self.red_moves
    }

    pub fn payoff(&self) -> &DMatrix<f64> {
        &self.payoff
    }

    pub fn payoff_rows(&self) -> Vec<Vec<f64>> {
        (0..self.payoff.nrows())
            .map(|i| self.payoff.row(i).iter().copied().collect())
            .collect()
    }

    /// `p^T Z q`.
    pub fn evaluate(&self, p: &[f64], q: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, pi) in p.iter().enumerate() {
            for (j, qj) in q.iter().enumerate() {
                acc += pi * self.payoff[(i, j)] * qj;
            }
        }
        acc
    }

    /// `min_j (p^T Z)_j`: what Blue guarantees with `p`.
    pub fn guaranteed_lower(&self, p: &[f64]) -> f64 {
        (0..self.payoff.ncols())
            .map(|j| (0..p.len()).map(|i| p[i] * self.payoff[(i, j)]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// `max_i (Z q)_i`: what Red concedes at most with `q`.
    pub fn guaranteed_upper(&self, q: &[f64]) -> f64 {
        (0..self.payoff.nrows())
            .map(|i| (0..q.len()).map(|j| self.payoff[(i, j)] * q[j]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalSolution {
    pub value: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub gap: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

/// Vector fictitious play with pure best responses; the empirical mixtures
/// attaining the best lower and upper guarantees are returned.
pub fn solve_classical(g: &ClassicalGame, gap_tol: f64, max_iters: usize) -> ClassicalSolution {
    let (k, m) = g.payoff.shape();
    let mut blue_counts = vec![0.0; k];
    let mut red_counts = vec![0.0; m];
    // Cumulative payoffs: row_acc[i] = sum_s Z[i][j_s], col_acc[j] = sum_s Z[i_s][j].
    let mut row_acc = vec![0.0; k];
    let mut col_acc = vec![0.0; m];
    let (mut i_t, mut j_t) = (0, 0);
    let mut best_lower = (f64::NEG_INFINITY, vec![0.0; k]);
    let mut best_upper = (f64::INFINITY, vec![0.0; m]);
    let mut iterations = 0;
    let mut converged = false;

    for t in 1..=max_iters.max(1) {
        iterations = t;
        blue_counts[i_t] += 1.0;
        red_counts[j_t] += 1.0;
        for (i, a) in row_acc.iter_mut().enumerate() {
            *a += g.payoff[(i, j_t)];
        }
        for (j, a) in col_acc.iter_mut().enumerate() {
            *a += g.payoff[(i_t, j)];
        }
        let n = t as f64;
        let lower = col_acc.iter().fold(f64::INFINITY, |a, &x| a.min(x)) / n;
        let upper = row_acc.iter().fold(f64::NEG_INFINITY, |a, &x| a.max(x)) / n;
        if lower > best_lower.0 {
            best_lower = (lower, blue_counts.iter().map(|c| c / n).collect());
        }
        if upper < best_upper.0 {
            best_upper = (upper, red_counts.iter().map(|c| c / n).collect());
        }
        if best_upper.0 - best_lower.0 <= gap_tol {
            converged = true;
            break;
        }
        i_t = argmax(&row_acc);
        j_t = argmin(&col_acc);
    }

    let (lower, p) = best_lower;
    let (upper, q) = best_upper;
    ClassicalSolution {
        value: 0.5 * (lower + upper),
        p,
        q,
        gap: (upper - lower).max(0.0),
        converged,
        iterations,
    }
}

/// Diagonal operator with the grid as its spectrum: the truncated
/// multiplication operator `f(x) -> x f(x)`.
pub fn discretize_multiplication_operator(grid: &[f64]) -> Result<HermitianOperator> {
    check_grid(grid)?;
    HermitianOperator::from_real_diagonal(grid)
}

/// Commuting quantum game with the same moves and payoffs. Without explicit
/// constraints both sides get harmonic energies capped at the top level.
pub fn lift_to_quantum(
    g: &ClassicalGame,
    caps: Option<(EnergyConstraint, EnergyConstraint)>,
    params: SolverParams,
) -> Result<GameInstance> {
    let blue = discretize_multiplication_operator(&g.blue_moves)?;
    let red = discretize_multiplication_operator(&g.red_moves)?;
    let (cb, cr) = match caps {
        Some(c) => c,
        None => (
            EnergyConstraint::inactive(g.blue_moves.len())?,
            EnergyConstraint::inactive(g.red_moves.len())?,
        ),
    };
    GameInstance::new(blue, red, &PayoffKernel::Table(g.payoff_rows()), cb, cr, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve;

    #[test]
    fn one_by_one() {
        let g = ClassicalGame::from_matrix(vec![vec![3.5]]).unwrap();
        let s = solve_classical(&g, 1e-3, 1000);
        assert_eq!(s.value, 3.5);
        assert_eq!((s.p.clone(), s.q.clone()), (vec![1.0], vec![1.0]));
        let q = solve(&lift_to_quantum(&g, None, SolverParams::default()).unwrap()).unwrap();
        assert!((q.value - 3.5).abs() < 1e-12);
    }

    #[test]
    fn matching_pennies() {
        let g = ClassicalGame::from_matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let s = solve_classical(&g, 1e-3, 1_000_000);
        assert!(s.converged && s.gap <= 1e-3);
        assert!((s.value - 0.5).abs() < 1e-3);
        assert!((s.p[0] - 0.5).abs() < 1e-2 && (s.q[0] - 0.5).abs() < 1e-2);
        let q = solve(&lift_to_quantum(&g, None, SolverParams::default()).unwrap()).unwrap();
        assert!((q.value - s.value).abs() <= 2e-3);
    }

    #[test]
    fn two_by_two_closed_form() {
        // (ad - bc) / (a + d - b - c) = (6 - 1) / 3; p1 = (d - c) / 3, q1 = (d - b) / 3
        let g = ClassicalGame::from_matrix(vec![vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let s = solve_classical(&g, 1e-3, 1_000_000);
        assert!((s.value - 5.0 / 3.0).abs() < 1e-3);
        assert!((s.p[0] - 1.0 / 3.0).abs() < 1e-2);
        assert!((s.q[0] - 1.0 / 3.0).abs() < 1e-2);
        let q = solve(&lift_to_quantum(&g, None, SolverParams::default()).unwrap()).unwrap();
        assert!((q.value - 5.0 / 3.0).abs() <= 2e-3);
    }

    #[test]
    fn multiplication_operator_spectrum() {
        let a = discretize_multiplication_operator(&[-1.0, 0.0, 1.0]).unwrap();
        let d = crate::operator::spectral_decompose(&a, None).unwrap();
        assert_eq!(d.eigenvalues(), &[-1.0, 0.0, 1.0]);
        assert_eq!((d.lower_bound(), d.upper_bound()), (-1.0, 1.0));
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let a = discretize_multiplication_operator(&grid).unwrap();
        for (i, x) in grid.iter().enumerate() {
            assert_eq!(a.matrix()[(i, i)].re, *x);
        }
        assert_eq!(discretize_multiplication_operator(&[0.0, 0.0]), Err(Error::NonIncreasingGrid(1)));
    }

    #[test]
    fn validation() {
        assert!(matches!(
            ClassicalGame::new(vec![0.0], vec![0.0, 1.0], vec![vec![1.0]]),
            Err(Error::TableShape { .. })
        ));
        assert!(matches!(
            ClassicalGame::from_matrix(vec![vec![-1.0]]),
            Err(Error::NegativeKernel { .. })
        ));
    }
}
