//! Distribution functions induced by a state on a player's spectrum.
//!
//! With atomic spectra, `F_rho(lambda) = tr rho E(lambda)` is a right-continuous
//! step function, stored as its jump masses on the clustered eigenvalues.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::operator::{trace_product, DensityOperator, SpectralDecomposition};

/// Supports that differ by at most this much are merged in [`difference`].
pub const SUPPORT_MERGE_TOL: f64 = 1e-12;

/// Jump masses of a step function on a strictly increasing support.
#[derive(Clone, Debug, PartialEq)]
pub struct StepDistribution {
    support: Vec<f64>,
    masses: Vec<f64>,
}

impl StepDistribution {
    /// Signed distribution; only the support ordering is checked.
    pub fn new(support: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if support.len() != masses.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                found: masses.len(),
            });
        }
        if let Some(i) = (1..support.len()).find(|&i| support[i] <= support[i - 1]) {
            return Err(Error::NonIncreasingGrid(i));
        }
        Ok(Self { support, masses })
    }

    /// Probability distribution: masses `>= -1e-10` summing to one within `1e-10`.
    pub fn probability(support: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        let s = Self::new(support, masses)?;
        if !s.is_probability() {
            return Err(Error::InvalidParameter(format!(
                "masses {:?} do not form a probability vector",
                s.masses
            )));
        }
        Ok(s)
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        self.masses.iter().all(|&w| w >= -1e-10) && (self.total_mass() - 1.0).abs() <= 1e-10
    }

    /// CSV rows `lambda,mass,cdf`, one per support point, with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,mass,cdf\n");
        let mut acc = 0.0;
        for (x, w) in self.support.iter().zip(&self.masses) {
            acc += w;
            let _ = writeln!(out, "{x:?},{w:?},{acc:?}");
        }
        out
    }
}

/// Masses `w_i = tr(rho P_i)` of `F_rho` on the clustered spectrum.
pub fn spectral_masses(rho: &DensityOperator, d: &SpectralDecomposition) -> Result<StepDistribution> {
    if rho.dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            found: rho.dim(),
        });
    }
    let masses = d
        .projectors()
        .iter()
        .map(|p| trace_product(rho.matrix(), p))
        .collect();
    Ok(StepDistribution {
        support: d.eigenvalues().to_vec(),
        masses,
    })
}

/// `F(lambda) = sum of masses at support points <= lambda`.
pub fn cdf(s: &StepDistribution, lambda: f64) -> f64 {
    s.support
        .iter()
        .zip(&s.masses)
        .take_while(|(x, _)| **x <= lambda)
        .map(|(_, w)| w)
        .sum()
}

/// Total variation of the step function: the sum of absolute jumps. For an
/// atomic measure this is the supremum over partitions.
pub fn total_variation(s: &StepDistribution) -> f64 {
    s.masses.iter().map(|w| w.abs()).sum()
}

/// `s1 - s2` on the union of supports. Points closer than
/// [`SUPPORT_MERGE_TOL`] are identified.
pub fn difference(s1: &StepDistribution, s2: &StepDistribution) -> StepDistribution {
    let mut support = Vec::with_capacity(s1.len() + s2.len());
    let mut masses = Vec::with_capacity(s1.len() + s2.len());
    let (mut i, mut j) = (0, 0);
    while i < s1.len() || j < s2.len() {
        let take_left = j >= s2.len() || (i < s1.len() && s1.support[i] < s2.support[j]);
        if i < s1.len() && j < s2.len() && (s1.support[i] - s2.support[j]).abs() <= SUPPORT_MERGE_TOL {
            support.push(s1.support[i]);
            masses.push(s1.masses[i] - s2.masses[j]);
            i += 1;
            j += 1;
        } else if take_left {
            support.push(s1.support[i]);
            masses.push(s1.masses[i]);
            i += 1;
        } else {
            support.push(s2.support[j]);
            masses.push(-s2.masses[j]);
            j += 1;
        }
    }
    StepDistribution { support, masses }
}
