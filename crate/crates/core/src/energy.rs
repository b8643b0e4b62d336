//! Energy-capped strategy sets `A(c) = { rho : tr(rho E) <= c }` and the exact
//! best-response oracle over them.
//!
//! The oracle maximizes the linear functional `tr(rho M)` over `A(c)` through
//! the one-multiplier Lagrangian dual
//!
//! ```text
//! g(mu) = lambda_max(M - mu E) + mu c,   mu >= 0,
//! ```
//!
//! which is convex and upper-bounds every feasible value. The multiplier is
//! located by bisection on the slope of the dual; a primal state is recovered as a mixture
//! of two top eigenvectors taken on either side of the minimizer whose
//! energies straddle the cap. The returned gap `g(mu) - tr(rho M)` is a
//! certificate, not an estimate.

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::operator::{
    eigh, expectation, random_density_with, rank_one_state, trace_product, CMatrix, CVector,
    DensityOperator, HermitianOperator, C64,
};

/// Feasibility slack used by [`membership`].
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Default certified gap for oracle calls.
pub const DEFAULT_ORACLE_GAP_TOL: f64 = 1e-9;

const TOP_SPACE_RTOL: f64 = 1e-11;
const MAX_DOUBLINGS: usize = 200;
const MAX_BISECTIONS: usize = 400;

/// `tr(rho E) <= c` for a Hermitian energy operator `E`.
#[derive(Clone, Debug)]
pub struct EnergyConstraint {
    energy: HermitianOperator,
    cap: f64,
    ground_energy: f64,
    ground_vector: CVector,
    scale: f64,
}

impl EnergyConstraint {
    /// Rejects caps below the ground energy, for which `A(c)` is empty.
    pub fn new(energy: HermitianOperator, cap: f64) -> Result<Self> {
        if !cap.is_finite() {
            return Err(Error::InvalidParameter(format!("energy cap must be finite, got {cap}")));
        }
        let (values, vectors) = eigh(energy.matrix())?;
        let ground = values[0];
        if ground > cap {
            return Err(Error::InfeasibleEnergy { cap, ground });
        }
        let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Ok(Self {
            energy,
            cap,
            ground_energy: ground,
            ground_vector: vectors.column(0).into_owned(),
            scale,
        })
    }

    /// Diagonal energy `sum_i c_i |e_i><e_i|` in the standard basis.
    pub fn diagonal(levels: &[f64], cap: f64) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(levels)?, cap)
    }

    /// Oscillator-like levels `0, 1, ..., dim - 1`.
    pub fn harmonic(dim: usize, cap: f64) -> Result<Self> {
        let levels: Vec<f64> = (0..dim).map(|i| i as f64).collect();
        Self::diagonal(&levels, cap)
    }

    /// Harmonic levels with the cap at the top level, so every state is feasible.
    pub fn inactive(dim: usize) -> Result<Self> {
        Self::harmonic(dim, dim.saturating_sub(1) as f64)
    }

    pub fn dim(&self) -> usize {
        self.energy.dim()
    }

    pub fn energy(&self) -> &HermitianOperator {
        &self.energy
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// `m(E)`.
    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    /// `tr(rho E)`.
    pub fn energy_of(&self, rho: &DensityOperator) -> f64 {
        trace_product(rho.matrix(), self.energy.matrix())
    }

    /// A pure ground state of `E`; always feasible.
    pub fn minimum_energy_state(&self) -> DensityOperator {
        let v: Vec<C64> = self.ground_vector.iter().copied().collect();
        rank_one_state(&v).expect("eigenvector is nonzero")
    }

    /// Same operator, different cap.
    pub fn with_cap(&self, cap: f64) -> Result<Self> {
        if cap < self.ground_energy {
            return Err(Error::InfeasibleEnergy {
                cap,
                ground: self.ground_energy,
            });
        }
        Ok(Self { cap, ..self.clone() })
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(())
    }
}

/// `tr(rho E) <= c + 1e-9`.
pub fn membership(rho: &DensityOperator, k: &EnergyConstraint) -> Result<bool> {
    k.check_dim(rho.dim())?;
    Ok(k.energy_of(rho) <= k.cap + MEMBERSHIP_TOL)
}

/// Output of a best-response call.
///
/// For maximization `primal_value <= dual_value`; for minimization the order is
/// reversed. `gap` is their distance in either case.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub state: DensityOperator,
    pub primal_value: f64,
    pub dual_value: f64,
    pub multiplier: f64,
    pub gap: f64,
}

/// Top eigenspace of `M - mu E` and its extreme-energy unit vectors.
struct Probe {
    mu: f64,
    dual: f64,
    low: (f64, CVector),
    high: (f64, CVector),
    /// Energy and vector of the single top eigenvector.
    top: (f64, CVector),
}

struct Lagrangian<'a> {
    m: &'a CMatrix,
    e: &'a CMatrix,
    cap: f64,
    m_scale: f64,
    e_scale: f64,
}

impl Lagrangian<'_> {
    fn probe(&self, mu: f64) -> Result<Probe> {
        let shifted = self.m - self.e.map(|z| z * mu);
        let (values, vectors) = eigh(&shifted)?;
        let n = values.len();
        let top = values[n - 1];
        let tol = TOP_SPACE_RTOL * (1.0 + self.m_scale + mu * self.e_scale);
        let k = values.iter().rev().take_while(|&&v| top - v <= tol).count();
        let basis = vectors.columns(n - k, k).into_owned();
        let (low, high) = extreme_energy_vectors(&basis, self.e)?;
        let v = vectors.column(n - 1).into_owned();
        Ok(Probe {
            mu,
            dual: top + mu * self.cap,
            low,
            high,
            top: (expectation(self.e, &v), v),
        })
    }
}

/// Minimum- and maximum-energy unit vectors inside `span(basis)`.
fn extreme_energy_vectors(basis: &CMatrix, e: &CMatrix) -> Result<((f64, CVector), (f64, CVector))> {
    if basis.ncols() == 1 {
        let v = basis.column(0).into_owned();
        let en = expectation(e, &v);
        return Ok(((en, v.clone()), (en, v)));
    }
    let projected = basis.adjoint() * e * basis;
    let (values, vectors) = eigh(&hermitize(projected))?;
    let k = values.len();
    let low = basis * vectors.column(0);
    let high = basis * vectors.column(k - 1);
    Ok(((values[0], low), (values[k - 1], high)))
}

fn hermitize(m: CMatrix) -> CMatrix {
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

struct Certificate {
    state: CMatrix,
    primal: f64,
    dual: f64,
    mu: f64,
}

impl Certificate {
    fn gap(&self) -> f64 {
        (self.dual - self.primal).max(0.0)
    }
}

/// Unit vector seen at multiplier `mu` with energy `energy`.
struct Anchor {
    mu: f64,
    energy: f64,
    v: CVector,
}

/// Mixture of `hi` (energy above the cap) and `lo` (below) with energy
/// exactly at the cap.
fn straddle(m: &CMatrix, cap: f64, hi: &Anchor, lo: &Anchor) -> (CMatrix, f64) {
    let t = if hi.energy - lo.energy > 0.0 {
        ((cap - lo.energy) / (hi.energy - lo.energy)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let primal = t * expectation(m, &hi.v) + (1.0 - t) * expectation(m, &lo.v);
    let state = (&hi.v * hi.v.adjoint()) * C64::new(t, 0.0) + (&lo.v * lo.v.adjoint()) * C64::new(1.0 - t, 0.0);
    (state, primal)
}

/// Straddle anchors on both sides of the cap: the largest multiplier seen
/// with energy at or above the cap, and the smallest with energy at or below.
#[derive(Default)]
struct AnchorPair {
    left: Option<Anchor>,
    right: Option<Anchor>,
}

impl AnchorPair {
    fn offer(&mut self, cap: f64, mu: f64, energy: f64, v: &CVector) -> bool {
        let mut changed = false;
        if energy >= cap && self.left.as_ref().is_none_or(|l| mu > l.mu) {
            self.left = Some(Anchor { mu, energy, v: v.clone() });
            changed = true;
        }
        if energy <= cap && self.right.as_ref().is_none_or(|r| mu < r.mu) {
            self.right = Some(Anchor { mu, energy, v: v.clone() });
            changed = true;
        }
        changed
    }

    fn straddle(&self, m: &CMatrix, cap: f64) -> Option<(CMatrix, f64)> {
        Some(straddle(m, cap, self.left.as_ref()?, self.right.as_ref()?))
    }
}

/// Tracks straddle anchors and the best dual bound. Two anchor pairs are
/// kept: extreme-energy vectors of the (tolerance-widened) top eigenspace,
/// and the single top eigenvector.
struct Search<'a> {
    lag: Lagrangian<'a>,
    space: AnchorPair,
    strict: AnchorPair,
    best_dual: (f64, f64),
    best: Option<Certificate>,
}

impl<'a> Search<'a> {
    fn new(lag: Lagrangian<'a>) -> Self {
        Self {
            lag,
            space: AnchorPair::default(),
            strict: AnchorPair::default(),
            best_dual: (f64::INFINITY, 0.0),
            best: None,
        }
    }

    fn record(&mut self, p: Probe) {
        if p.dual < self.best_dual.0 {
            self.best_dual = (p.dual, p.mu);
        }
        let cap = self.lag.cap;
        let mut changed = false;
        if p.high.0 >= cap {
            changed |= self.space.offer(cap, p.mu, p.high.0, &p.high.1);
        }
        if p.low.0 <= cap {
            changed |= self.space.offer(cap, p.mu, p.low.0, &p.low.1);
        }
        changed |= self.strict.offer(cap, p.mu, p.top.0, &p.top.1);
        if changed {
            for pair in [&self.space, &self.strict] {
                if let Some((state, primal)) = pair.straddle(self.lag.m, cap) {
                    if self.best.as_ref().is_none_or(|b| primal > b.primal) {
                        self.best = Some(Certificate {
                            state,
                            primal,
                            dual: self.best_dual.0,
                            mu: self.best_dual.1,
                        });
                    }
                }
            }
        }
        if let Some(b) = self.best.as_mut() {
            b.dual = self.best_dual.0;
            b.mu = self.best_dual.1;
        }
    }

    fn gap(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, Certificate::gap)
    }
}

/// Maximizes `tr(rho M)` over `A(c)` with a certified duality gap.
///
/// Among optimal states the minimum-energy one is preferred.
pub fn best_response_max(
    m: &HermitianOperator,
    k: &EnergyConstraint,
    gap_tol: f64,
) -> Result<OracleResult> {
    k.check_dim(m.dim())?;
    if !(gap_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("gap tolerance must be positive, got {gap_tol}")));
    }
    let mm = m.matrix();
    let em = k.energy.matrix();
    let cap = k.cap;
    let m_scale = m.matrix().iter().fold(0.0_f64, |a, z| a.max(z.norm())) * m.dim() as f64;
    let lag = Lagrangian {
        m: mm,
        e: em,
        cap,
        m_scale,
        e_scale: k.scale,
    };

    // Unconstrained optimum already feasible: mu = 0.
    let p0 = lag.probe(0.0)?;
    if p0.low.0 <= cap {
        let v = &p0.low.1;
        let primal = expectation(mm, v);
        let state = DensityOperator::from_trusted(v * v.adjoint());
        return Ok(finish_max(state, primal, p0.dual, 0.0));
    }

    if cap <= k.ground_energy {
        return boundary_response(mm, k);
    }

    let mut search = Search::new(lag);
    search.record(p0);

    // Bracket: double until the top eigenspace reaches energy <= cap.
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    loop {
        let p = search.lag.probe(hi)?;
        let below = p.low.0 <= cap;
        search.record(p);
        if below {
            break;
        }
        doublings += 1;
        if doublings > MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::Bracketing { doublings, mu: hi });
        }
        lo = hi;
        hi *= 2.0;
    }

    // Bisection on the sign of c - E(top eigenvector), the derivative of
    // the dual, which is nondecreasing in mu.
    let (mut a, mut b) = (lo, hi);
    for _ in 0..MAX_BISECTIONS {
        if search.gap() <= gap_tol || b - a <= f64::EPSILON * (1.0 + b) {
            break;
        }
        let mid = 0.5 * (a + b);
        let p = search.lag.probe(mid)?;
        let above = p.top.0 > cap;
        search.record(p);
        if above {
            a = mid;
        } else {
            b = mid;
        }
    }

    // Symmetric probes around the dual minimizer, narrowing or widening
    // until the straddle certifies.
    if search.gap() > gap_tol {
        let center = search.best_dual.1;
        let base = 1e-7 * (1.0 + center);
        let mut deltas: Vec<f64> = (0..10).map(|i| base * 10f64.powi(-i)).collect();
        deltas.extend((1..8).map(|i| base * 10f64.powi(i)));
        for delta in deltas {
            if search.gap() <= gap_tol {
                break;
            }
            let left = (center - delta).max(0.0);
            search.record(search.lag.probe(left)?);
            search.record(search.lag.probe(center + delta)?);
        }
    }

    let gap = search.gap();
    if gap > gap_tol {
        return Err(Error::NotCertified { gap, tol: gap_tol });
    }
    let cert = search.best.expect("certified search holds a certificate");
    Ok(finish_max(
        DensityOperator::from_trusted(cert.state),
        cert.primal,
        cert.dual,
        cert.mu,
    ))
}

/// Cap exactly at the ground energy: the feasible set is the ground
/// eigenspace of `E`, and the answer is the top eigenvector of `M`
/// compressed to it. The compressed eigenvalue is the certificate.
fn boundary_response(m: &CMatrix, k: &EnergyConstraint) -> Result<OracleResult> {
    let (values, vectors) = eigh(k.energy.matrix())?;
    let tol = TOP_SPACE_RTOL * (1.0 + k.scale);
    let g = values.iter().take_while(|&&v| v - values[0] <= tol).count();
    let ground = vectors.columns(0, g).into_owned();
    let compressed = hermitize(ground.adjoint() * m * &ground);
    let (cv, cvec) = eigh(&compressed)?;
    let v = &ground * cvec.column(g - 1);
    let primal = expectation(m, &v);
    let state = DensityOperator::from_trusted(&v * v.adjoint());
    Ok(finish_max(state, primal, cv[g - 1].max(primal), 0.0))
}

fn finish_max(state: DensityOperator, primal: f64, dual: f64, mu: f64) -> OracleResult {
    let dual = dual.max(primal);
    OracleResult {
        state,
        primal_value: primal,
        dual_value: dual,
        multiplier: mu,
        gap: dual - primal,
    }
}

/// Minimizes `tr(phi M)` over `A(c)`: the maximizer for `-M` with values negated.
pub fn best_response_min(
    m: &HermitianOperator,
    k: &EnergyConstraint,
    gap_tol: f64,
) -> Result<OracleResult> {
    let r = best_response_max(&m.scaled(-1.0), k, gap_tol)?;
    Ok(OracleResult {
        state: r.state,
        primal_value: -r.primal_value,
        dual_value: -r.dual_value,
        multiplier: r.multiplier,
        gap: r.gap,
    })
}

/// A random state of `A(c)`: a random mixed or pure state, pulled toward the
/// ground state of `E` just enough to be feasible, then optionally further.
pub fn random_feasible_state<R: Rng + ?Sized>(rng: &mut R, k: &EnergyConstraint) -> DensityOperator {
    let n = k.dim();
    let rho = if rng.gen_bool(0.5) {
        random_density_with(rng, n).expect("dim >= 1")
    } else {
        let g = crate::operator::random_gaussian_matrix(rng, n);
        let v: Vec<C64> = g.column(0).iter().copied().collect();
        rank_one_state(&v).expect("gaussian vector is nonzero")
    };
    let ground = k.minimum_energy_state();
    let e = k.energy_of(&rho);
    let eg = k.ground_energy;
    let mut s = if e > k.cap && e > eg {
        ((e - k.cap) / (e - eg)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    if rng.gen_bool(0.25) {
        s += (1.0 - s) * rng.gen::<f64>();
    }
    rho.mix(&ground, s).expect("same dimension")
}

/// `(1, 0, ..., 0)`-style real basis vector, handy for pure test states.
pub fn basis_state(dim: usize, index: usize) -> Result<DensityOperator> {
    let mut v = DVector::from_element(dim, C64::new(0.0, 0.0));
    if index >= dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: index,
        });
    }
    v[index] = C64::new(1.0, 0.0);
    rank_one_state(v.as_slice())
}
