//! Result documents: solve results (JSON, re-ingestible as warm starts), sweep
//! tables (CSV) and sweep summaries (JSON).

use crate::ci::{occupation_numbers, CIVector};
use crate::config::RunConfig;
use crate::coulomb::Hamiltonian;
use crate::energy::EnergyBreakdown;
use crate::limit::{kinetic_balance_residual, small_component_norm, PersistenceReport, SweepRecord, SweepSummary};
use crate::linalg::spectral_radius;
use crate::mchf::{default_gamma, occupation_floor, MchfResult};
use crate::solver::{Certificate, SolverReport, SplitState};
use crate::{Error, Result, CMat, C64, CVec};
use serde::{Deserialize, Serialize};

pub const RESULT_SCHEMA: &str = "mcdf-result/1";
pub const SWEEP_SCHEMA: &str = "mcdf-sweep/1";

/// Non-finite floats are written as `null` and read back as NaN.
pub mod lenient_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Column-major complex matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixData {
    pub fn from_matrix(m: &CMat) -> Self {
        Self { rows: m.nrows(), cols: m.ncols(), re: m.iter().map(|z| z.re).collect(), im: m.iter().map(|z| z.im).collect() }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let len = self.rows.checked_mul(self.cols).ok_or_else(|| Error::config("state", "matrix shape overflows"))?;
        if self.re.len() != len || self.im.len() != len {
            return Err(Error::config("state", format!("matrix data has {} / {} entries, shape needs {len}", self.re.len(), self.im.len())));
        }
        if self.re.iter().chain(&self.im).any(|x| !x.is_finite()) {
            return Err(Error::config("state", "matrix data must be finite"));
        }
        Ok(CMat::from_iterator(self.rows, self.cols, self.re.iter().zip(&self.im).map(|(r, i)| C64::new(*r, *i))))
    }
}

/// Everything needed to restart the solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateData {
    pub electrons: usize,
    pub orbitals: usize,
    pub ci_re: Vec<f64>,
    pub ci_im: Vec<f64>,
    pub psi_plus: MatrixData,
    pub psi_minus: MatrixData,
}

impl StateData {
    pub fn from_state(state: &SplitState) -> Self {
        let a = state.a.coeffs();
        Self {
            electrons: state.a.electrons(),
            orbitals: state.a.orbitals(),
            ci_re: a.iter().map(|z| z.re).collect(),
            ci_im: a.iter().map(|z| z.im).collect(),
            psi_plus: MatrixData::from_matrix(&state.psi_plus),
            psi_minus: MatrixData::from_matrix(&state.psi_minus),
        }
    }

    /// Rebuilds and validates the state against `ham`.
    pub fn to_state(&self, ham: &Hamiltonian) -> Result<SplitState> {
        if self.ci_re.len() != self.ci_im.len() || self.ci_re.iter().chain(&self.ci_im).any(|x| !x.is_finite()) {
            return Err(Error::config("state.ci", "CI coefficients must be finite and paired"));
        }
        let coeffs = CVec::from_iterator(self.ci_re.len(), self.ci_re.iter().zip(&self.ci_im).map(|(r, i)| C64::new(*r, *i)));
        let a = CIVector::new(self.orbitals, self.electrons, coeffs)?;
        SplitState::new(ham, a, self.psi_plus.to_matrix()?, self.psi_minus.to_matrix()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceData {
    /// MCHF minimum `I^K`
    pub energy: f64,
    pub min_occ: f64,
    pub occupation_floor: f64,
    pub default_gamma: f64,
    pub residual: f64,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

impl ReferenceData {
    pub fn from_result(r: &MchfResult) -> Self {
        Self {
            energy: r.energy,
            min_occ: r.min_occ,
            occupation_floor: occupation_floor(r),
            default_gamma: default_gamma(r),
            residual: r.residual,
            iterations: r.iterations,
            warnings: r.warnings.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionData {
    pub light_speed: f64,
    pub energy: EnergyBreakdown,
    /// `E − Nc²`
    pub energy_shifted: f64,
    pub ci_energy: f64,
    pub residual_df1: f64,
    pub residual_df2: f64,
    pub occupations: Vec<f64>,
    pub min_occ: f64,
    pub gamma_floor: f64,
    pub constraint_active: bool,
    pub iterations: usize,
    pub inner_iterations: usize,
    pub minus_c_norm: f64,
    pub small_component_norm: f64,
    pub kinetic_balance_residual: f64,
    pub lambda_band: f64,
    pub history: Vec<f64>,
}

impl SolutionData {
    pub fn from_report(ham: &Hamiltonian, report: &SolverReport) -> Self {
        Self {
            light_speed: ham.basis().light_speed(),
            energy: report.energy,
            energy_shifted: report.energy_shifted,
            ci_energy: report.ci_energy,
            residual_df1: report.residual_df1,
            residual_df2: report.residual_df2,
            occupations: occupation_numbers(&report.state.a),
            min_occ: report.min_occ,
            gamma_floor: report.gamma_floor,
            constraint_active: report.constraint_active,
            iterations: report.iterations,
            inner_iterations: report.inner_iterations,
            minus_c_norm: report.minus_c_norm,
            small_component_norm: small_component_norm(&report.psi_full),
            kinetic_balance_residual: kinetic_balance_residual(ham.basis(), &report.psi_full),
            lambda_band: spectral_radius(&report.lambda.lambda_shifted),
            history: report.history.clone(),
        }
    }
}

/// Output of `solve`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    pub schema: String,
    /// Resolved configuration (the occupation floor is always explicit).
    pub config: RunConfig,
    pub reference: ReferenceData,
    pub solution: SolutionData,
    pub certificate: Certificate,
    pub state: StateData,
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents serialize")
    }

    /// Parses and validates a document (schema, configuration, state shape).
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ResultDocument = serde_json::from_str(text)?;
        if doc.schema != RESULT_SCHEMA {
            return Err(Error::config("schema", format!("expected {RESULT_SCHEMA}, found {:?}", doc.schema)));
        }
        doc.config.validate()?;
        let p = &doc.config.problem;
        if doc.state.electrons != p.electrons || doc.state.orbitals != p.orbitals {
            return Err(Error::config("state", "CI shape disagrees with the embedded configuration"));
        }
        let rows = 4 * doc.config.modes_per_axis().pow(3);
        for m in [&doc.state.psi_plus, &doc.state.psi_minus] {
            if m.rows != rows || m.cols != p.orbitals {
                return Err(Error::config("state", format!("orbital block is {}×{}, expected {rows}×{}", m.rows, m.cols, p.orbitals)));
            }
        }
        Ok(doc)
    }
}

/// Output of `sweep` (the per-point rows also go to the CSV table).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub schema: String,
    pub config: RunConfig,
    pub reference: ReferenceData,
    pub records: Vec<SweepRecord>,
    pub errors: Vec<Option<String>>,
    pub summary: SweepSummary,
    pub persistence: PersistenceReport,
}

impl SweepDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep documents serialize")
    }
}

pub fn sweep_table(records: &[SweepRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
