//! Minimax value of an energy-capped quantum game by fictitious play.
//!
//! Each side best-responds to the running average of the other; averages stay
//! inside the convex sets `A(c)`. Every `check_interval` steps the bracket
//!
//! ```text
//! min_phi K(rho_bar, phi)  <=  value  <=  max_rho K(rho, phi_bar)
//! ```
//!
//! is recomputed with fresh oracle calls. The reported states are the
//! averages that attained the best lower and upper bounds, so the bracket is
//! a certificate for them.

use crate::energy::{best_response_max, best_response_min, EnergyConstraint, OracleResult, DEFAULT_ORACLE_GAP_TOL};
use crate::error::{Error, Result};
use crate::operator::{spectral_decompose, DensityOperator, HermitianOperator, SpectralDecomposition};
use crate::payoff::{
    expected_payoff, response_operator_blue, response_operator_red, tabulate, PayoffKernel,
    PayoffMatrix,
};
use crate::spectral::{spectral_masses, StepDistribution};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverParams {
    pub max_iters: usize,
    pub gap_tol: f64,
    pub check_interval: usize,
    pub seed: u64,
    /// Certified gap requested from every best-response call.
    pub oracle_gap_tol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            max_iters: 200_000,
            gap_tol: 1e-3,
            check_interval: 25,
            seed: 0,
            oracle_gap_tol: DEFAULT_ORACLE_GAP_TOL,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.check_interval == 0 {
            return Err(Error::InvalidParameter(
                "max_iters and check_interval must be at least 1".into(),
            ));
        }
        if !(self.gap_tol > 0.0) || !(self.oracle_gap_tol > 0.0) {
            return Err(Error::InvalidParameter("gap tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Operators, kernel, and strategy sets of one game.
#[derive(Clone, Debug)]
pub struct GameInstance {
    blue: HermitianOperator,
    red: HermitianOperator,
    blue_spectrum: SpectralDecomposition,
    red_spectrum: SpectralDecomposition,
    kernel: PayoffMatrix,
    constraint_blue: EnergyConstraint,
    constraint_red: EnergyConstraint,
    pub params: SolverParams,
}

impl GameInstance {
    /// Decomposes both players, tabulates the kernel on their spectra, and
    /// checks every dimension pairing.
    pub fn new(
        blue: HermitianOperator,
        red: HermitianOperator,
        kernel: &PayoffKernel,
        constraint_blue: EnergyConstraint,
        constraint_red: EnergyConstraint,
        params: SolverParams,
    ) -> Result<Self> {
        let blue_spectrum = spectral_decompose(&blue, None)?;
        let red_spectrum = spectral_decompose(&red, None)?;
        let table = tabulate(kernel, &blue_spectrum, &red_spectrum)?;
        Self::with_payoff(blue, red, blue_spectrum, red_spectrum, table, constraint_blue, constraint_red, params)
    }

    #[allow(clippy::too_many_arguments)]
    fn with_payoff(
        blue: HermitianOperator,
        red: HermitianOperator,
        blue_spectrum: SpectralDecomposition,
        red_spectrum: SpectralDecomposition,
        kernel: PayoffMatrix,
        constraint_blue: EnergyConstraint,
        constraint_red: EnergyConstraint,
        params: SolverParams,
    ) -> Result<Self> {
        params.validate()?;
        for (expected, found) in [
            (blue.dim(), constraint_blue.dim()),
            (red.dim(), constraint_red.dim()),
        ] {
            if expected != found {
                return Err(Error::DimensionMismatch { expected, found });
            }
        }
        Ok(Self {
            blue,
            red,
            blue_spectrum,
            red_spectrum,
            kernel,
            constraint_blue,
            constraint_red,
            params,
        })
    }

    /// Same game with kernel values replaced by `alpha Z + beta`.
    pub fn with_affine_payoff(&self, alpha: f64, beta: f64) -> Result<Self> {
        let mut g = self.clone();
        g.kernel = self.kernel.affine(alpha, beta)?;
        Ok(g)
    }

    /// Same game with different energy constraints.
    pub fn with_constraints(&self, blue: EnergyConstraint, red: EnergyConstraint) -> Result<Self> {
        Self::with_payoff(
            self.blue.clone(),
            self.red.clone(),
            self.blue_spectrum.clone(),
            self.red_spectrum.clone(),
            self.kernel.clone(),
            blue,
            red,
            self.params.clone(),
        )
    }

    pub fn blue(&self) -> &HermitianOperator {
        &self.blue
    }

    pub fn red(&self) -> &HermitianOperator {
        &self.red
    }

    pub fn blue_spectrum(&self) -> &SpectralDecomposition {
        &self.blue_spectrum
    }

    pub fn red_spectrum(&self) -> &SpectralDecomposition {
        &self.red_spectrum
    }

    pub fn kernel(&self) -> &PayoffMatrix {
        &self.kernel
    }

    pub fn constraint_blue(&self) -> &EnergyConstraint {
        &self.constraint_blue
    }

    pub fn constraint_red(&self) -> &EnergyConstraint {
        &self.constraint_red
    }

    /// `F_rho` on Blue's spectrum.
    pub fn blue_marginal(&self, rho: &DensityOperator) -> Result<StepDistribution> {
        spectral_masses(rho, &self.blue_spectrum)
    }

    /// `G_phi` on Red's spectrum.
    pub fn red_marginal(&self, phi: &DensityOperator) -> Result<StepDistribution> {
        spectral_masses(phi, &self.red_spectrum)
    }

    /// `K(rho, phi)`.
    pub fn payoff(&self, rho: &DensityOperator, phi: &DensityOperator) -> Result<f64> {
        expected_payoff(&self.kernel, &self.blue_marginal(rho)?, &self.red_marginal(phi)?)
    }

    /// Red's certified best response to `rho`.
    pub fn red_response(&self, rho: &DensityOperator) -> Result<OracleResult> {
        let m = response_operator_red(&self.kernel, &self.red_spectrum, &self.blue_marginal(rho)?)?;
        best_response_min(&m, &self.constraint_red, self.params.oracle_gap_tol)
    }

    /// Blue's certified best response to `phi`.
    pub fn blue_response(&self, phi: &DensityOperator) -> Result<OracleResult> {
        let m = response_operator_blue(&self.kernel, &self.blue_spectrum, &self.red_marginal(phi)?)?;
        best_response_max(&m, &self.constraint_blue, self.params.oracle_gap_tol)
    }
}

/// `min_phi K(rho, phi)` over Red's energy set.
pub fn lower_value(g: &GameInstance, rho: &DensityOperator) -> Result<f64> {
    Ok(g.red_response(rho)?.primal_value)
}

/// `max_rho K(rho, phi)` over Blue's energy set.
pub fn upper_value(g: &GameInstance, phi: &DensityOperator) -> Result<f64> {
    Ok(g.blue_response(phi)?.primal_value)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapRecord {
    pub iteration: usize,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct SaddleResult {
    pub value_lower: f64,
    pub value_upper: f64,
    pub value: f64,
    pub gap: f64,
    pub converged: bool,
    pub rho_star: DensityOperator,
    pub phi_star: DensityOperator,
    pub iterations: usize,
    /// Bounds at each check for the averages at that step.
    pub gap_history: Vec<GapRecord>,
}

impl SaddleResult {
    pub fn gap_history_csv(&self) -> String {
        let mut out = String::from("iteration,lower,upper,gap\n");
        for r in &self.gap_history {
            out.push_str(&format!("{},{:?},{:?},{:?}\n", r.iteration, r.lower, r.upper, r.gap));
        }
        out
    }
}

/// Runs fictitious play until the certified gap drops to `gap_tol` or
/// `max_iters` is reached. Non-convergence is reported through
/// [`SaddleResult::converged`], not as an error.
pub fn solve(g: &GameInstance) -> Result<SaddleResult> {
    let params = &g.params;
    let mut rho_bar = g.constraint_blue.minimum_energy_state();
    let mut phi_bar = g.constraint_red.minimum_energy_state();

    // Responses to the current averages, shared between the gap check and the
    // next step.
    let mut blue_resp = g.blue_response(&phi_bar)?;
    let mut red_resp = g.red_response(&rho_bar)?;

    let mut best_lower = (f64::NEG_INFINITY, rho_bar.clone());
    let mut best_upper = (f64::INFINITY, phi_bar.clone());
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for t in 1..=params.max_iters {
        iterations = t;
        let w = 1.0 / t as f64;
        rho_bar = rho_bar.mix(&blue_resp.state, w)?;
        phi_bar = phi_bar.mix(&red_resp.state, w)?;
        let (b, r) = respond_both(g, &rho_bar, &phi_bar)?;
        blue_resp = b;
        red_resp = r;

        if t % params.check_interval == 0 || t == params.max_iters {
            // The min oracle's dual bound is a guaranteed lower bound on
            // min_phi K(rho_bar, phi), and symmetrically for the upper.
            let lower = red_resp.dual_value;
            let upper = blue_resp.dual_value;
            history.push(GapRecord {
                iteration: t,
                lower,
                upper,
                gap: upper - lower,
            });
            if lower > best_lower.0 {
                best_lower = (lower, rho_bar.clone());
            }
            if upper < best_upper.0 {
                best_upper = (upper, phi_bar.clone());
            }
            if best_upper.0 - best_lower.0 <= params.gap_tol {
                converged = true;
                break;
            }
        }
    }

    let (value_lower, rho_star) = best_lower;
    let (value_upper, phi_star) = best_upper;
    let gap = (value_upper - value_lower).max(0.0);
    Ok(SaddleResult {
        value_lower,
        value_upper,
        value: 0.5 * (value_lower + value_upper),
        gap,
        converged,
        rho_star,
        phi_star,
        iterations,
        gap_history: history,
    })
}

fn respond_both(
    g: &GameInstance,
    rho_bar: &DensityOperator,
    phi_bar: &DensityOperator,
) -> Result<(OracleResult, OracleResult)> {
    // Independent calls; parallel only when the problem is big enough to pay
    // for the thread hop.
    if g.blue.dim() + g.red.dim() >= 16 {
        std::thread::scope(|s| {
            let red = s.spawn(|| g.red_response(rho_bar));
            let blue = g.blue_response(phi_bar);
            let red = red.join().expect("oracle thread panicked");
            Ok((blue?, red?))
        })
    } else {
        Ok((g.blue_response(phi_bar)?, g.red_response(rho_bar)?))
    }
}
