//! JSON game descriptions and reports.
//!
//! Complex matrices are nested arrays of `[re, im]` pairs. Floats are written
//! in shortest round-trip form, so a report re-read from disk reproduces its
//! matrices bit for bit.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::classical::{lift_to_quantum, ClassicalGame};
use crate::energy::{EnergyConstraint, OracleResult};
use crate::error::Error;
use crate::operator::{CMatrix, DensityOperator, HermitianOperator, C64};
use crate::payoff::PayoffKernel;
use crate::solver::{GameInstance, SaddleResult, SolverParams};
use crate::spectral::StepDistribution;

pub type ComplexRows = Vec<Vec<[f64; 2]>>;

/// A problem in a game file, with the field it came from.
#[derive(Debug)]
pub enum SpecError {
    Io(std::io::Error),
    /// Syntax or schema error, with serde's line/column diagnostic.
    Parse(serde_json::Error),
    Invalid { field: String, source: Error },
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(e) => write!(f, "cannot read game file: {e}"),
            Self::Parse(e) => write!(f, "invalid game file: {e}"),
            Self::Invalid { field, source } => write!(f, "invalid field `{field}`: {source}"),
        }
    }
}

impl std::error::Error for SpecError {}

impl From<std::io::Error> for SpecError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

impl From<serde_json::Error> for SpecError {
    fn from(e: serde_json::Error) -> Self {
        Self::Parse(e)
    }
}

fn at<T>(field: &str, r: crate::Result<T>) -> Result<T, SpecError> {
    r.map_err(|source| SpecError::Invalid {
        field: field.to_string(),
        source,
    })
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    DenseHermitian { matrix: ComplexRows },
    Diagonal { eigenvalues: Vec<f64> },
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinKernel {
    SquaredDifference,
    ShiftedProduct,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Table {
        values: Vec<Vec<f64>>,
    },
    Builtin {
        name: BuiltinKernel,
        #[serde(default)]
        shift: f64,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EnergySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<ComplexRows>,
    pub cap: f64,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub gap_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub check_interval: Option<usize>,
    pub seed: Option<u64>,
}

impl SolverSpec {
    pub fn params(&self) -> SolverParams {
        let d = SolverParams::default();
        SolverParams {
            gap_tol: self.gap_tol.unwrap_or(d.gap_tol),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            check_interval: self.check_interval.unwrap_or(d.check_interval),
            seed: self.seed.unwrap_or(d.seed),
            oracle_gap_tol: d.oracle_gap_tol,
        }
    }
}

/// A quantum game: two operators, a kernel, and optional energy sets.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GameSpecFile {
    pub blue_operator: OperatorSpec,
    pub red_operator: OperatorSpec,
    pub payoff: KernelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_blue: Option<EnergySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_red: Option<EnergySpec>,
    #[serde(default)]
    pub solver: SolverSpec,
}

/// `{"type": "classical", ...}`: a matrix game on move grids.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSpecFile {
    #[serde(rename = "type")]
    pub kind: String,
    pub blue_moves: Vec<f64>,
    pub red_moves: Vec<f64>,
    pub payoff: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_blue: Option<EnergySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_red: Option<EnergySpec>,
    #[serde(default)]
    pub solver: SolverSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpecDocument {
    Quantum(GameSpecFile),
    Classical(ClassicalSpecFile),
}

/// Parses either document kind. Schema errors keep serde's line/column.
pub fn parse_document(text: &str) -> Result<SpecDocument, SpecError> {
    let value: Value = serde_json::from_str(text)?;
    if value.get("type").and_then(Value::as_str) == Some("classical") {
        Ok(SpecDocument::Classical(serde_json::from_str(text)?))
    } else {
        Ok(SpecDocument::Quantum(serde_json::from_str(text)?))
    }
}

pub fn read_document(path: &std::path::Path) -> Result<SpecDocument, SpecError> {
    parse_document(&std::fs::read_to_string(path)?)
}

pub fn complex_matrix(rows: &ComplexRows) -> crate::Result<CMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptyOperator);
    }
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::NotSquare {
            rows: n,
            cols: r.len(),
        });
    }
    Ok(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

pub fn complex_rows(m: &CMatrix) -> ComplexRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl OperatorSpec {
    pub fn build(&self) -> crate::Result<HermitianOperator> {
        match self {
            Self::DenseHermitian { matrix } => HermitianOperator::new(complex_matrix(matrix)?),
            Self::Diagonal { eigenvalues } => HermitianOperator::from_real_diagonal(eigenvalues),
        }
    }
}

impl KernelSpec {
    pub fn build(&self) -> PayoffKernel {
        match self {
            Self::Table { values } => PayoffKernel::Table(values.clone()),
            Self::Builtin { name: BuiltinKernel::SquaredDifference, shift } => {
                PayoffKernel::SquaredDifference { shift: *shift }
            }
            Self::Builtin { name: BuiltinKernel::ShiftedProduct, shift } => {
                PayoffKernel::ShiftedProduct { shift: *shift }
            }
        }
    }
}

impl EnergySpec {
    pub fn build(&self) -> crate::Result<EnergyConstraint> {
        match (&self.eigenvalues, &self.matrix) {
            (Some(levels), None) => EnergyConstraint::diagonal(levels, self.cap),
            (None, Some(m)) => EnergyConstraint::new(HermitianOperator::new(complex_matrix(m)?)?, self.cap),
            _ => Err(Error::InvalidParameter(
                "energy needs exactly one of `eigenvalues` or `matrix`".into(),
            )),
        }
    }
}

fn energy_or_default(spec: &Option<EnergySpec>, dim: usize, field: &str) -> Result<EnergyConstraint, SpecError> {
    let k = match spec {
        Some(s) => at(field, s.build())?,
        None => at(field, EnergyConstraint::inactive(dim))?,
    };
    if k.dim() != dim {
        return Err(SpecError::Invalid {
            field: field.to_string(),
            source: Error::DimensionMismatch {
                expected: dim,
                found: k.dim(),
            },
        });
    }
    Ok(k)
}

impl GameSpecFile {
    /// Validated game. Omitted energies default to inactive harmonic caps.
    pub fn build(&self) -> Result<GameInstance, SpecError> {
        let blue = at("blue_operator", self.blue_operator.build())?;
        let red = at("red_operator", self.red_operator.build())?;
        let cb = energy_or_default(&self.energy_blue, blue.dim(), "energy_blue")?;
        let cr = energy_or_default(&self.energy_red, red.dim(), "energy_red")?;
        at("solver", self.solver.params().validate())?;
        at(
            "payoff",
            GameInstance::new(blue, red, &self.payoff.build(), cb, cr, self.solver.params()),
        )
    }
}

impl ClassicalSpecFile {
    pub fn game(&self) -> Result<ClassicalGame, SpecError> {
        at(
            "payoff",
            ClassicalGame::new(self.blue_moves.clone(), self.red_moves.clone(), self.payoff.clone()),
        )
    }

    pub fn lift(&self) -> Result<GameInstance, SpecError> {
        let g = self.game()?;
        let cb = energy_or_default(&self.energy_blue, self.blue_moves.len(), "energy_blue")?;
        let cr = energy_or_default(&self.energy_red, self.red_moves.len(), "energy_red")?;
        at("solver", self.solver.params().validate())?;
        at("payoff", lift_to_quantum(&g, Some((cb, cr)), self.solver.params()))
    }
}

impl SpecDocument {
    pub fn solver(&self) -> &SolverSpec {
        match self {
            Self::Quantum(q) => &q.solver,
            Self::Classical(c) => &c.solver,
        }
    }

    pub fn solver_mut(&mut self) -> &mut SolverSpec {
        match self {
            Self::Quantum(q) => &mut q.solver,
            Self::Classical(c) => &mut c.solver,
        }
    }

    /// The quantum game; classical documents are lifted.
    pub fn build(&self) -> Result<GameInstance, SpecError> {
        match self {
            Self::Quantum(q) => q.build(),
            Self::Classical(c) => c.lift(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct MarginalReport {
    pub support: Vec<f64>,
    pub masses: Vec<f64>,
}

impl From<&StepDistribution> for MarginalReport {
    fn from(s: &StepDistribution) -> Self {
        Self {
            support: s.support().to_vec(),
            masses: s.masses().to_vec(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct GapRow {
    pub iteration: usize,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
}

/// Serialized [`SaddleResult`].
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct SaddleReport {
    pub value_lower: f64,
    pub value_upper: f64,
    pub value: f64,
    pub gap: f64,
    pub gap_tol: f64,
    pub converged: bool,
    pub iterations: usize,
    pub rho_star: ComplexRows,
    pub phi_star: ComplexRows,
    pub marginals_blue: MarginalReport,
    pub marginals_red: MarginalReport,
    pub gap_history: Vec<GapRow>,
    /// Seconds since the Unix epoch; the only field that varies between runs.
    pub timestamp: u64,
}

impl SaddleReport {
    pub fn new(g: &GameInstance, r: &SaddleResult, timestamp: u64) -> crate::Result<Self> {
        Ok(Self {
            value_lower: r.value_lower,
            value_upper: r.value_upper,
            value: r.value,
            gap: r.gap,
            gap_tol: g.params.gap_tol,
            converged: r.converged,
            iterations: r.iterations,
            rho_star: complex_rows(r.rho_star.matrix()),
            phi_star: complex_rows(r.phi_star.matrix()),
            marginals_blue: (&g.blue_marginal(&r.rho_star)?).into(),
            marginals_red: (&g.red_marginal(&r.phi_star)?).into(),
            gap_history: r
                .gap_history
                .iter()
                .map(|h| GapRow {
                    iteration: h.iteration,
                    lower: h.lower,
                    upper: h.upper,
                    gap: h.gap,
                })
                .collect(),
            timestamp,
        })
    }

    pub fn rho_star(&self) -> crate::Result<DensityOperator> {
        DensityOperator::new(complex_matrix(&self.rho_star)?)
    }

    pub fn phi_star(&self) -> crate::Result<DensityOperator> {
        DensityOperator::new(complex_matrix(&self.phi_star)?)
    }
}

/// Serialized [`OracleResult`].
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct OracleReport {
    pub side: String,
    pub value: f64,
    pub dual_value: f64,
    pub multiplier: f64,
    pub gap: f64,
    pub energy: f64,
    pub state: ComplexRows,
    pub marginals: MarginalReport,
}

impl OracleReport {
    pub fn new(side: &str, r: &OracleResult, energy: f64, marginals: &StepDistribution) -> Self {
        Self {
            side: side.to_string(),
            value: r.primal_value,
            dual_value: r.dual_value,
            multiplier: r.multiplier,
            gap: r.gap,
            energy,
            state: complex_rows(r.state.matrix()),
            marginals: marginals.into(),
        }
    }
}

/// An opponent state file: either a bare `[re, im]` matrix or `{"matrix": ...}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum StateFile {
    Bare(ComplexRows),
    Wrapped { matrix: ComplexRows },
}

pub fn parse_state(text: &str) -> Result<DensityOperator, SpecError> {
    let rows = match serde_json::from_str::<StateFile>(text)? {
        StateFile::Bare(m) | StateFile::Wrapped { matrix: m } => m,
    };
    at("state", complex_matrix(&rows).and_then(DensityOperator::new))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PENNIES: &str = r#"{
        "blue_operator": {"type": "diagonal", "eigenvalues": [0, 1]},
        "red_operator": {"type": "dense_hermitian", "matrix": [[[0,0],[0,0]],[[0,0],[1,0]]]},
        "payoff": {"type": "table", "values": [[1, 0], [0, 1]]},
        "energy_blue": {"eigenvalues": [0, 1], "cap": 10},
        "solver": {"gap_tol": 0.001}
    }"#;

    #[test]
    fn parses_quantum_document() {
        let doc = parse_document(PENNIES).unwrap();
        let SpecDocument::Quantum(q) = &doc else { panic!("expected quantum") };
        assert_eq!(q.solver.params().max_iters, 200_000);
        assert_eq!(q.solver.params().check_interval, 25);
        let g = doc.build().unwrap();
        assert_eq!(g.kernel().zmax(), 1.0);
        assert_eq!(g.constraint_red().cap(), 1.0);
    }

    #[test]
    fn parses_classical_document() {
        let text = r#"{"type": "classical", "blue_moves": [0, 1], "red_moves": [0, 1], "payoff": [[3, 1], [1, 2]]}"#;
        let doc = parse_document(text).unwrap();
        assert!(matches!(doc, SpecDocument::Classical(_)));
        assert_eq!(doc.build().unwrap().kernel().values()[(0, 0)], 3.0);
    }

    #[test]
    fn schema_errors_carry_position() {
        let err = parse_document("{\n \"blue_operator\": {\"type\": \"diagonal\"}\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line"), "{msg}");
        assert!(msg.contains("eigenvalues"), "{msg}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let text = PENNIES.replace("\"cap\": 10", "\"cap\": -1");
        let err = parse_document(&text).unwrap().build().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("energy_blue") && msg.contains("infeasible energy constraint"), "{msg}");

        let text = PENNIES.replace("[[1, 0], [0, 1]]", "[[1, 0], [0, -1]]");
        let err = parse_document(&text).unwrap().build().unwrap_err();
        assert!(err.to_string().contains("payoff"));
    }

    #[test]
    fn builtin_kernels() {
        let k: KernelSpec = serde_json::from_str(r#"{"type":"builtin","name":"shifted_product","shift":2.5}"#).unwrap();
        assert!(matches!(k.build(), PayoffKernel::ShiftedProduct { shift } if shift == 2.5));
        let k: KernelSpec = serde_json::from_str(r#"{"type":"builtin","name":"squared_difference"}"#).unwrap();
        assert!(matches!(k.build(), PayoffKernel::SquaredDifference { shift } if shift == 0.0));
        assert!(serde_json::from_str::<KernelSpec>(r#"{"type":"builtin","name":"cubic"}"#).is_err());
    }

    #[test]
    fn energy_needs_one_source() {
        let e = EnergySpec { eigenvalues: None, matrix: None, cap: 1.0 };
        assert!(e.build().is_err());
    }

    #[test]
    fn state_files() {
        let s = parse_state("[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]").unwrap();
        assert_eq!(s, DensityOperator::maximally_mixed(2).unwrap());
        let s = parse_state(r#"{"matrix": [[[1,0],[0,0]],[[0,0],[0,0]]]}"#).unwrap();
        assert_eq!(s.trace(), 1.0);
        let err = parse_state("[[[1,0],[0,0]],[[0,0],[1,0]]]").unwrap_err();
        assert!(err.to_string().contains("trace"));
    }
}
