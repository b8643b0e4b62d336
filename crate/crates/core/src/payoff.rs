//! Payoff kernels and the bilinear expected payoff
//! `K(rho, phi) = sum_ij Z(lambda_i, l_j) tr(rho P_i) tr(phi Q_j)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{HermitianOperator, SpectralDecomposition};
use crate::spectral::StepDistribution;

const GRID_MATCH_TOL: f64 = 1e-12;

/// A nonnegative payoff `Z(lambda, l)` to Blue.
#[derive(Clone)]
pub enum PayoffKernel {
    /// Values on the product of the two clustered spectra, row = Blue's move.
    Table(Vec<Vec<f64>>),
    /// `(lambda - l)^2 + shift`.
    SquaredDifference { shift: f64 },
    /// `lambda * l + shift`.
    ShiftedProduct { shift: f64 },
    /// Any side-effect-free evaluator.
    Function(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for PayoffKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Table(v) => f.debug_tuple("Table").field(v).finish(),
            Self::SquaredDifference { shift } => {
                f.debug_struct("SquaredDifference").field("shift", shift).finish()
            }
            Self::ShiftedProduct { shift } => {
                f.debug_struct("ShiftedProduct").field("shift", shift).finish()
            }
            Self::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl PayoffKernel {
    fn evaluate(&self, i: usize, j: usize, lambda: f64, l: f64) -> f64 {
        match self {
            Self::Table(v) => v[i][j],
            Self::SquaredDifference { shift } => (lambda - l).powi(2) + shift,
            Self::ShiftedProduct { shift } => lambda * l + shift,
            Self::Function(z) => z(lambda, l),
        }
    }
}

/// The kernel evaluated on `sigma(B) x sigma(R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffMatrix {
    rows: Vec<f64>,
    cols: Vec<f64>,
    values: DMatrix<f64>,
    zmax: f64,
    argmax: (usize, usize),
}

impl PayoffMatrix {
    /// Validates nonnegativity and that the grid is not identically zero.
    pub fn from_values(rows: Vec<f64>, cols: Vec<f64>, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != rows.len() || values.ncols() != cols.len() {
            return Err(Error::TableShape {
                rows: values.nrows(),
                cols: values.ncols(),
                expected_rows: rows.len(),
                expected_cols: cols.len(),
            });
        }
        let mut zmax = f64::NEG_INFINITY;
        let mut argmax = (0, 0);
        for i in 0..rows.len() {
            for j in 0..cols.len() {
                let z = values[(i, j)];
                if !(z >= 0.0) || !z.is_finite() {
                    return Err(Error::NegativeKernel {
                        lambda: rows[i],
                        l: cols[j],
                        value: z,
                    });
                }
                if z > zmax {
                    zmax = z;
                    argmax = (i, j);
                }
            }
        }
        if zmax <= 0.0 {
            return Err(Error::DegenerateKernel);
        }
        Ok(Self {
            rows,
            cols,
            values,
            zmax,
            argmax,
        })
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn cols(&self) -> &[f64] {
        &self.cols
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// `Z(lambda_0, l_0)`, the grid maximum.
    pub fn zmax(&self) -> f64 {
        self.zmax
    }

    /// `(lambda_0, l_0)`.
    pub fn argmax(&self) -> (f64, f64) {
        (self.rows[self.argmax.0], self.cols[self.argmax.1])
    }

    pub fn argmax_index(&self) -> (usize, usize) {
        self.argmax
    }

    /// `alpha Z + beta`.
    pub fn affine(&self, alpha: f64, beta: f64) -> Result<Self> {
        Self::from_values(
            self.rows.clone(),
            self.cols.clone(),
            self.values.map(|z| alpha * z + beta),
        )
    }

    /// `a_i = sum_j Z_ij q_j`.
    pub fn row_payoffs(&self, q: &[f64]) -> Vec<f64> {
        (0..self.rows.len())
            .map(|i| (0..self.cols.len()).map(|j| self.values[(i, j)] * q[j]).sum())
            .collect()
    }

    /// `b_j = sum_i Z_ij p_i`.
    pub fn col_payoffs(&self, p: &[f64]) -> Vec<f64> {
        (0..self.cols.len())
            .map(|j| (0..self.rows.len()).map(|i| self.values[(i, j)] * p[i]).sum())
            .collect()
    }

    fn check_row_support(&self, p: &StepDistribution) -> Result<()> {
        if !same_grid(p.support(), &self.rows) {
            return Err(Error::SupportMismatch("blue distribution vs payoff rows"));
        }
        Ok(())
    }

    fn check_col_support(&self, q: &StepDistribution) -> Result<()> {
        if !same_grid(q.support(), &self.cols) {
            return Err(Error::SupportMismatch("red distribution vs payoff columns"));
        }
        Ok(())
    }
}

fn same_grid(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= GRID_MATCH_TOL)
}

/// Evaluates `kernel` on the spectrum grid of the two players.
pub fn tabulate(
    kernel: &PayoffKernel,
    blue: &SpectralDecomposition,
    red: &SpectralDecomposition,
) -> Result<PayoffMatrix> {
    let (k, m) = (blue.len(), red.len());
    if let PayoffKernel::Table(t) = kernel {
        let cols = t.first().map_or(0, Vec::len);
        if t.len() != k || t.iter().any(|r| r.len() != cols) || cols != m {
            return Err(Error::TableShape {
                rows: t.len(),
                cols: t.iter().map(Vec::len).max().unwrap_or(0),
                expected_rows: k,
                expected_cols: m,
            });
        }
    }
    let rows = blue.eigenvalues().to_vec();
    let cols = red.eigenvalues().to_vec();
    let values = DMatrix::from_fn(k, m, |i, j| kernel.evaluate(i, j, rows[i], cols[j]));
    PayoffMatrix::from_values(rows, cols, values)
}

/// `K = sum_ij Z_ij p_i q_j`.
pub fn expected_payoff(pm: &PayoffMatrix, p: &StepDistribution, q: &StepDistribution) -> Result<f64> {
    Ok(fubini_swap_check(pm, p, q)?.0)
}

/// The double sum in both orders: `(sum_i sum_j, sum_j sum_i)`.
pub fn fubini_swap_check(
    pm: &PayoffMatrix,
    p: &StepDistribution,
    q: &StepDistribution,
) -> Result<(f64, f64)> {
    pm.check_row_support(p)?;
    pm.check_col_support(q)?;
    let (p, q) = (p.masses(), q.masses());
    let row_major = (0..p.len())
        .map(|i| p[i] * (0..q.len()).map(|j| pm.values[(i, j)] * q[j]).sum::<f64>())
        .sum();
    let col_major = (0..q.len())
        .map(|j| q[j] * (0..p.len()).map(|i| pm.values[(i, j)] * p[i]).sum::<f64>())
        .sum();
    Ok((row_major, col_major))
}

/// `M_B(q) = sum_i a_i P_i` with `a_i = sum_j Z_ij q_j`, so that
/// `tr(rho M_B(q)) = K(rho, phi)`.
pub fn response_operator_blue(
    pm: &PayoffMatrix,
    blue: &SpectralDecomposition,
    q: &StepDistribution,
) -> Result<HermitianOperator> {
    if !same_grid(blue.eigenvalues(), &pm.rows) {
        return Err(Error::SupportMismatch("blue decomposition vs payoff rows"));
    }
    pm.check_col_support(q)?;
    let a = pm.row_payoffs(q.masses());
    HermitianOperator::new(blue.apply_function(|i, _| a[i]))
}

/// `M_R(p) = sum_j b_j Q_j` with `b_j = sum_i Z_ij p_i`.
pub fn response_operator_red(
    pm: &PayoffMatrix,
    red: &SpectralDecomposition,
    p: &StepDistribution,
) -> Result<HermitianOperator> {
    if !same_grid(red.eigenvalues(), &pm.cols) {
        return Err(Error::SupportMismatch("red decomposition vs payoff columns"));
    }
    pm.check_row_support(p)?;
    let b = pm.col_payoffs(p.masses());
    HermitianOperator::new(red.apply_function(|j, _| b[j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{random_density, spectral_decompose, CMatrix, C64};
    use crate::spectral::spectral_masses;

    fn diag01() -> SpectralDecomposition {
        spectral_decompose(&HermitianOperator::from_real_diagonal(&[0.0, 1.0]).unwrap(), None).unwrap()
    }

    fn identity_table() -> PayoffKernel {
        PayoffKernel::Table(vec![vec![1.0, 0.0], vec![0.0, 1.0]])
    }

    fn dist(masses: &[f64]) -> StepDistribution {
        StepDistribution::probability(vec![0.0, 1.0], masses.to_vec()).unwrap()
    }

    #[test]
    fn constant_kernel_tabulates_to_ones() {
        let b = spectral_decompose(&HermitianOperator::from_real_diagonal(&[0.0, 2.0, 5.0]).unwrap(), None).unwrap();
        let pm = tabulate(&PayoffKernel::Function(Arc::new(|_, _| 1.0)), &b, &diag01()).unwrap();
        assert_eq!(pm.values(), &DMatrix::from_element(3, 2, 1.0));
        assert_eq!(pm.zmax(), 1.0);
    }

    #[test]
    fn squared_difference_grid() {
        let pm = tabulate(&PayoffKernel::SquaredDifference { shift: 0.0 }, &diag01(), &diag01()).unwrap();
        assert_eq!(pm.values(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert_eq!(pm.zmax(), 1.0);
    }

    #[test]
    fn table_identity_and_argmax() {
        let pm = tabulate(&identity_table(), &diag01(), &diag01()).unwrap();
        assert_eq!(pm.values(), &DMatrix::identity(2, 2));
        assert_eq!(pm.zmax(), 1.0);
        assert_eq!(pm.argmax(), (0.0, 0.0));
    }

    #[test]
    fn kernel_validation_errors() {
        let neg = tabulate(&PayoffKernel::ShiftedProduct { shift: -0.5 }, &diag01(), &diag01());
        assert_eq!(
            neg,
            Err(Error::NegativeKernel {
                lambda: 0.0,
                l: 0.0,
                value: -0.5
            })
        );
        let zero = tabulate(&PayoffKernel::Table(vec![vec![0.0; 2]; 2]), &diag01(), &diag01());
        assert_eq!(zero, Err(Error::DegenerateKernel));
        let shape = tabulate(&PayoffKernel::Table(vec![vec![1.0; 3]; 2]), &diag01(), &diag01());
        assert!(matches!(shape, Err(Error::TableShape { .. })));
    }

    #[test]
    fn expected_payoff_examples() {
        let pm = tabulate(&identity_table(), &diag01(), &diag01()).unwrap();
        // 1/2*1/2*1 + 1/2*1/2*1
        assert!((expected_payoff(&pm, &dist(&[0.5, 0.5]), &dist(&[0.5, 0.5])).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(expected_payoff(&pm, &dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap(), 0.0);
        let c = PayoffMatrix::from_values(vec![0.0, 1.0], vec![0.0, 1.0], DMatrix::from_element(2, 2, 2.5)).unwrap();
        assert!((expected_payoff(&c, &dist(&[0.3, 0.7]), &dist(&[0.9, 0.1])).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn fubini_orders_agree() {
        let pm = tabulate(&identity_table(), &diag01(), &diag01()).unwrap();
        let (a, b) = fubini_swap_check(&pm, &dist(&[0.5, 0.5]), &dist(&[0.5, 0.5])).unwrap();
        assert_eq!((a, b), (0.5, 0.5));
        let ones = PayoffMatrix::from_values(vec![0.0, 1.0], vec![0.0, 1.0], DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert_eq!(fubini_swap_check(&ones, &dist(&[0.25, 0.75]), &dist(&[0.5, 0.5])).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn support_mismatch_is_rejected() {
        let pm = tabulate(&identity_table(), &diag01(), &diag01()).unwrap();
        let off = StepDistribution::probability(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(expected_payoff(&pm, &off, &dist(&[0.5, 0.5])), Err(Error::SupportMismatch(_))));
    }

    #[test]
    fn response_operators() {
        let d = diag01();
        let pm = tabulate(&identity_table(), &d, &d).unwrap();
        let half = response_operator_blue(&pm, &d, &dist(&[0.5, 0.5])).unwrap();
        assert!((half.matrix() - CMatrix::identity(2, 2) * C64::new(0.5, 0.0)).norm() < 1e-15);
        let proj = response_operator_blue(&pm, &d, &dist(&[1.0, 0.0])).unwrap();
        assert!((proj.matrix() - &d.projectors()[0]).norm() < 1e-15);
        let red = response_operator_red(&pm, &d, &dist(&[0.0, 1.0])).unwrap();
        assert!((red.matrix() - &d.projectors()[1]).norm() < 1e-15);
        let red_half = response_operator_red(&pm, &d, &dist(&[0.5, 0.5])).unwrap();
        assert!((red_half.matrix() - CMatrix::identity(2, 2) * C64::new(0.5, 0.0)).norm() < 1e-15);

        let ones = PayoffMatrix::from_values(vec![0.0, 1.0], vec![0.0, 1.0], DMatrix::from_element(2, 2, 1.0)).unwrap();
        let id = response_operator_blue(&ones, &d, &dist(&[0.2, 0.8])).unwrap();
        assert!((id.matrix() - CMatrix::identity(2, 2)).norm() < 1e-15);
        let id = response_operator_red(&ones, &d, &dist(&[0.2, 0.8])).unwrap();
        assert!((id.matrix() - CMatrix::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn response_operator_reproduces_payoff() {
        let mut rng = rand::thread_rng();
        let b = crate::operator::random_hermitian(&mut rng, 4);
        let r = crate::operator::random_hermitian(&mut rng, 3);
        let (db, dr) = (spectral_decompose(&b, None).unwrap(), spectral_decompose(&r, None).unwrap());
        let pm = tabulate(&PayoffKernel::SquaredDifference { shift: 0.1 }, &db, &dr).unwrap();
        let rho = random_density(4, 1).unwrap();
        let phi = random_density(3, 2).unwrap();
        let (p, q) = (spectral_masses(&rho, &db).unwrap(), spectral_masses(&phi, &dr).unwrap());
        let k = expected_payoff(&pm, &p, &q).unwrap();
        let mb = response_operator_blue(&pm, &db, &q).unwrap();
        let mr = response_operator_red(&pm, &dr, &p).unwrap();
        assert!((mb.expectation(&rho) - k).abs() < 1e-11);
        assert!((mr.expectation(&phi) - k).abs() < 1e-11);
    }
}
