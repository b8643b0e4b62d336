//! Randomized checks of the quantitative bounds behind the minimax theorem,
//! run against a concrete game.
//!
//! Each suite draws `samples` random trials and records the largest excess
//! over its bound; a suite passes when that excess stays within its slack.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::random_feasible_state;
use crate::error::Result;
use crate::operator::{trace_norm, DensityOperator};
use crate::payoff::{fubini_swap_check, response_operator_blue, response_operator_red};
use crate::solver::{solve, GameInstance, SaddleResult};
use crate::spectral::{difference, total_variation};

pub const LIPSCHITZ_SLACK: f64 = 1e-9;
pub const TOTAL_VARIATION_SLACK: f64 = 1e-9;
pub const FUBINI_RTOL: f64 = 1e-12;
pub const BILINEARITY_TOL: f64 = 1e-10;
pub const RESPONSE_TOL: f64 = 1e-11;
pub const SADDLE_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub trials: usize,
    /// Largest `lhs - rhs` over all trials; negative means every trial had room.
    pub max_violation: f64,
    pub slack: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.max_violation <= self.slack
    }
}

struct Tally {
    name: &'static str,
    slack: f64,
    trials: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str, slack: f64) -> Self {
        Self {
            name,
            slack,
            trials: 0,
            worst: f64::NEG_INFINITY,
        }
    }

    fn push(&mut self, excess: f64) {
        self.trials += 1;
        // NaN must fail the suite.
        if excess.is_nan() {
            self.worst = f64::INFINITY;
        } else {
            self.worst = self.worst.max(excess);
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name,
            trials: self.trials,
            max_violation: self.worst,
            slack: self.slack,
        }
    }
}

fn blue_state(rng: &mut ChaCha8Rng, g: &GameInstance) -> DensityOperator {
    random_feasible_state(rng, g.constraint_blue())
}

fn red_state(rng: &mut ChaCha8Rng, g: &GameInstance) -> DensityOperator {
    random_feasible_state(rng, g.constraint_red())
}

/// `|K(rho, phi1) - K(rho, phi2)| <= zmax ||phi1 - phi2||_1`, and the same
/// with the roles swapped.
pub fn lipschitz_suite(g: &GameInstance, samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zmax = g.kernel().zmax();
    let mut t = Tally::new("lipschitz", LIPSCHITZ_SLACK);
    for _ in 0..samples {
        let rho = blue_state(&mut rng, g);
        let (phi1, phi2) = (red_state(&mut rng, g), red_state(&mut rng, g));
        let lhs = (g.payoff(&rho, &phi1)? - g.payoff(&rho, &phi2)?).abs();
        t.push(lhs - zmax * phi1.distance(&phi2)?);

        let phi = red_state(&mut rng, g);
        let (rho1, rho2) = (blue_state(&mut rng, g), blue_state(&mut rng, g));
        let lhs = (g.payoff(&rho1, &phi)? - g.payoff(&rho2, &phi)?).abs();
        t.push(lhs - zmax * rho1.distance(&rho2)?);
    }
    Ok(t.finish())
}

/// `V(G_phi1 - G_phi2) <= ||phi1 - phi2||_1` on both players' spectra.
pub fn total_variation_suite(g: &GameInstance, samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("total_variation", TOTAL_VARIATION_SLACK);
    for _ in 0..samples {
        let (phi1, phi2) = (red_state(&mut rng, g), red_state(&mut rng, g));
        let tv = total_variation(&difference(&g.red_marginal(&phi1)?, &g.red_marginal(&phi2)?));
        t.push(tv - trace_norm(&(phi1.matrix() - phi2.matrix()))?);

        let (rho1, rho2) = (blue_state(&mut rng, g), blue_state(&mut rng, g));
        let tv = total_variation(&difference(&g.blue_marginal(&rho1)?, &g.blue_marginal(&rho2)?));
        t.push(tv - trace_norm(&(rho1.matrix() - rho2.matrix()))?);
    }
    Ok(t.finish())
}

/// Row-major and column-major double sums agree within `1e-12 zmax`.
pub fn fubini_suite(g: &GameInstance, samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zmax = g.kernel().zmax();
    let mut t = Tally::new("fubini", FUBINI_RTOL * zmax);
    for _ in 0..samples {
        let p = g.blue_marginal(&blue_state(&mut rng, g))?;
        let q = g.red_marginal(&red_state(&mut rng, g))?;
        let (a, b) = fubini_swap_check(g.kernel(), &p, &q)?;
        t.push((a - b).abs());
    }
    Ok(t.finish())
}

/// `K` is affine in each argument under convex mixing.
pub fn bilinearity_suite(g: &GameInstance, samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("bilinearity", BILINEARITY_TOL);
    for _ in 0..samples {
        let s: f64 = rng.gen();
        let (rho1, rho2) = (blue_state(&mut rng, g), blue_state(&mut rng, g));
        let phi = red_state(&mut rng, g);
        let mixed = g.payoff(&rho1.mix(&rho2, s)?, &phi)?;
        let affine = (1.0 - s) * g.payoff(&rho1, &phi)? + s * g.payoff(&rho2, &phi)?;
        t.push((mixed - affine).abs());

        let (phi1, phi2) = (red_state(&mut rng, g), red_state(&mut rng, g));
        let rho = blue_state(&mut rng, g);
        let mixed = g.payoff(&rho, &phi1.mix(&phi2, s)?)?;
        let affine = (1.0 - s) * g.payoff(&rho, &phi1)? + s * g.payoff(&rho, &phi2)?;
        t.push((mixed - affine).abs());
    }
    Ok(t.finish())
}

/// `tr(rho M_B(q)) = K(rho, phi) = tr(phi M_R(p))`.
pub fn response_consistency_suite(g: &GameInstance, samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("response_consistency", RESPONSE_TOL);
    for _ in 0..samples {
        let rho = blue_state(&mut rng, g);
        let phi = red_state(&mut rng, g);
        let (p, q) = (g.blue_marginal(&rho)?, g.red_marginal(&phi)?);
        let k = g.payoff(&rho, &phi)?;
        let mb = response_operator_blue(g.kernel(), g.blue_spectrum(), &q)?;
        let mr = response_operator_red(g.kernel(), g.red_spectrum(), &p)?;
        t.push((mb.expectation(&rho) - k).abs());
        t.push((mr.expectation(&phi) - k).abs());
    }
    Ok(t.finish())
}

/// `K(rho, phi*) <= upper` and `K(rho*, phi) >= lower` for random feasible
/// deviations.
pub fn saddle_suite(
    g: &GameInstance,
    result: &SaddleResult,
    samples: usize,
    seed: u64,
) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("saddle_certificate", SADDLE_SLACK);
    for _ in 0..samples {
        let rho = blue_state(&mut rng, g);
        t.push(g.payoff(&rho, &result.phi_star)? - result.value_upper);
        let phi = red_state(&mut rng, g);
        t.push(result.value_lower - g.payoff(&result.rho_star, &phi)?);
    }
    Ok(t.finish())
}

/// Every suite, solving the game first for the saddle certificate.
pub fn run_all(g: &GameInstance, samples: usize, seed: u64) -> Result<(Vec<SuiteReport>, SaddleResult)> {
    let samples = samples.max(1);
    let result = solve(g)?;
    let reports = vec![
        lipschitz_suite(g, samples, seed)?,
        total_variation_suite(g, samples, seed.wrapping_add(1))?,
        fubini_suite(g, samples, seed.wrapping_add(2))?,
        bilinearity_suite(g, samples, seed.wrapping_add(3))?,
        response_consistency_suite(g, samples, seed.wrapping_add(4))?,
        saddle_suite(g, &result, samples, seed.wrapping_add(5))?,
    ];
    Ok((reports, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EnergyConstraint;
    use crate::operator::random_hermitian;
    use crate::payoff::PayoffKernel;
    use crate::solver::SolverParams;

    fn game() -> GameInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        GameInstance::new(
            random_hermitian(&mut rng, 3),
            random_hermitian(&mut rng, 4),
            &PayoffKernel::SquaredDifference { shift: 0.2 },
            EnergyConstraint::harmonic(3, 0.7).unwrap(),
            EnergyConstraint::harmonic(4, 1.1).unwrap(),
            SolverParams {
                gap_tol: 1e-2,
                ..SolverParams::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn all_suites_pass_on_random_game() {
        let (reports, result) = run_all(&game(), 100, 9).unwrap();
        assert!(result.converged);
        assert_eq!(reports.len(), 6);
        for r in &reports {
            assert!(r.passed(), "{r:?}");
            assert!(r.trials >= 100);
        }
    }

    #[test]
    fn single_sample_runs_every_suite() {
        let (reports, _) = run_all(&game(), 1, 0).unwrap();
        assert!(reports.iter().all(|r| r.trials >= 1 && r.passed()));
    }

    #[test]
    fn tally_flags_nan() {
        let mut t = Tally::new("x", 1.0);
        t.push(0.0);
        t.push(f64::NAN);
        assert!(!t.finish().passed());
    }
}
