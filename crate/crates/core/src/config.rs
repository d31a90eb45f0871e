//! Run configuration (TOML).
//!
//! ```toml
//! seed = 7
//!
//! [problem]
//! electrons = 2
//! orbitals = 4
//! box_length = 6.0
//! mode_bound = 2
//! light_speed = 40.0
//! light_speeds = [20.0, 40.0, 80.0, 160.0]
//!
//! [[problem.nuclei]]
//! charge = 2.0
//! position = [3.0, 3.0, 3.0]
//!
//! [solver]
//! gamma_floor = 0.002
//! ```

use crate::coulomb::{NuclearConfiguration, Nucleus};
use crate::limit::Problem;
use crate::mchf::MchfConfig;
use crate::solver::SolverConfig;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub mchf: MchfConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Seeds every random choice (MCHF multi-start perturbations).
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub electrons: usize,
    pub orbitals: usize,
    pub box_length: f64,
    /// Modes `k ∈ (2π/L)·{−m..m}³`; exclusive with `modes_per_axis`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_bound: Option<usize>,
    /// Raw mode count per axis (may be even); exclusive with `mode_bound`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes_per_axis: Option<usize>,
    /// Light speed for `solve`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub light_speed: Option<f64>,
    /// Increasing light speeds for `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub light_speeds: Option<Vec<f64>>,
    #[serde(default)]
    pub smearing: f64,
    pub nuclei: Vec<Nucleus>,
}

/// `[solver]` table: [`SolverConfig`] with an optional occupation floor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    /// Absent: half the occupation floor of the MCHF minimizer.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_floor: Option<f64>,
    pub tol_inner: f64,
    pub tol_outer: f64,
    pub max_iter_inner: usize,
    pub max_iter_outer: usize,
    pub energy_cap_enforced: bool,
    pub lbfgs_memory: usize,
    pub window_constant: f64,
    pub occupation_regularization: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            gamma_floor: None,
            tol_inner: d.tol_inner,
            tol_outer: d.tol_outer,
            max_iter_inner: d.max_iter_inner,
            max_iter_outer: d.max_iter_outer,
            energy_cap_enforced: d.energy_cap_enforced,
            lbfgs_memory: d.lbfgs_memory,
            window_constant: d.window_constant,
            occupation_regularization: d.occupation_regularization,
        }
    }
}

impl SolverSection {
    pub fn resolve(&self, gamma_floor: f64) -> SolverConfig {
        SolverConfig {
            gamma_floor,
            tol_inner: self.tol_inner,
            tol_outer: self.tol_outer,
            max_iter_inner: self.max_iter_inner,
            max_iter_outer: self.max_iter_outer,
            energy_cap_enforced: self.energy_cap_enforced,
            lbfgs_memory: self.lbfgs_memory,
            window_constant: self.window_constant,
            occupation_regularization: self.occupation_regularization,
        }
    }
}

/// File names inside the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: String,
    pub result: String,
    pub table: String,
    pub summary: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: "out".into(), result: "result.json".into(), table: "sweep.csv".into(), summary: "sweep.json".into() }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be a positive finite number, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::config("<document>", e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always representable in TOML")
    }

    pub fn modes_per_axis(&self) -> usize {
        match (self.problem.mode_bound, self.problem.modes_per_axis) {
            (Some(m), _) => 2 * m + 1,
            (None, Some(n)) => n,
            (None, None) => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.problem;
        if p.electrons == 0 {
            return Err(Error::config("problem.electrons", "need at least one electron"));
        }
        if p.orbitals < p.electrons {
            return Err(Error::config("problem.orbitals", format!("K = {} must be at least N = {}", p.orbitals, p.electrons)));
        }
        if p.orbitals > 64 {
            return Err(Error::config("problem.orbitals", "at most 64 orbitals are supported"));
        }
        positive("problem.box_length", p.box_length)?;
        match (p.mode_bound, p.modes_per_axis) {
            (Some(_), Some(_)) => return Err(Error::config("problem.mode_bound", "give either mode_bound or modes_per_axis, not both")),
            (None, None) => return Err(Error::config("problem.mode_bound", "missing (or give modes_per_axis)")),
            (Some(0), None) => return Err(Error::config("problem.mode_bound", "must be positive")),
            (None, Some(n)) if n < 2 => return Err(Error::config("problem.modes_per_axis", "need at least two modes per axis")),
            _ => {}
        }
        let dim = 2 * self.modes_per_axis().pow(3);
        if p.orbitals > dim {
            return Err(Error::config("problem.orbitals", format!("K = {} exceeds the 2-spinor basis dimension {dim}", p.orbitals)));
        }
        if let Some(c) = p.light_speed {
            positive("problem.light_speed", c)?;
        }
        if let Some(cs) = &p.light_speeds {
            if cs.is_empty() {
                return Err(Error::config("problem.light_speeds", "must not be empty"));
            }
            for (i, c) in cs.iter().enumerate() {
                positive(&format!("problem.light_speeds[{i}]"), *c)?;
            }
            if cs.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::config("problem.light_speeds", "must be strictly increasing"));
            }
        }
        if !(p.smearing >= 0.0 && p.smearing.is_finite()) {
            return Err(Error::config("problem.smearing", "must be a nonnegative finite width"));
        }
        if p.nuclei.is_empty() {
            return Err(Error::config("problem.nuclei", "need at least one nucleus (total charge Z > 0)"));
        }
        for (i, n) in p.nuclei.iter().enumerate() {
            positive(&format!("problem.nuclei[{i}].charge"), n.charge)?;
            if n.position.iter().any(|x| !(0.0..p.box_length).contains(x)) {
                return Err(Error::config(format!("problem.nuclei[{i}].position"), format!("{:?} lies outside the box [0, {})³", n.position, p.box_length)));
            }
        }
        let s = &self.solver;
        if let Some(g) = s.gamma_floor {
            let mean = p.electrons as f64 / p.orbitals as f64;
            if !(g >= 0.0) || g > mean {
                return Err(Error::config(
                    "solver.gamma_floor",
                    format!("γ = {g} is infeasible: the K = {} occupations lie in [0,1] and sum to N = {}, so their minimum is at most N/K = {mean}", p.orbitals, p.electrons),
                ));
            }
        }
        for (name, v) in [("solver.tol_inner", s.tol_inner), ("solver.tol_outer", s.tol_outer), ("solver.occupation_regularization", s.occupation_regularization)] {
            positive(name, v)?;
        }
        if !s.window_constant.is_finite() {
            return Err(Error::config("solver.window_constant", "must be finite"));
        }
        for (name, v) in [("solver.max_iter_inner", s.max_iter_inner), ("solver.max_iter_outer", s.max_iter_outer), ("solver.lbfgs_memory", s.lbfgs_memory)] {
            if v == 0 {
                return Err(Error::config(name, "must be positive"));
            }
        }
        let m = &self.mchf;
        positive("mchf.tolerance", m.tolerance)?;
        if m.max_iterations == 0 || m.lbfgs_memory == 0 || m.starts == 0 {
            return Err(Error::config("mchf", "max_iterations, lbfgs_memory and starts must be positive"));
        }
        if !(m.perturbation >= 0.0 && m.perturbation.is_finite()) {
            return Err(Error::config("mchf.perturbation", "must be a nonnegative finite number"));
        }
        for (name, v) in [("output.result", &self.output.result), ("output.table", &self.output.table), ("output.summary", &self.output.summary)] {
            if v.is_empty() || v.contains(['/', '\\']) {
                return Err(Error::config(name, "must be a plain file name"));
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem> {
        let p = &self.problem;
        Ok(Problem {
            box_length: p.box_length,
            modes_per_axis: self.modes_per_axis(),
            nuclei: NuclearConfiguration::new(p.nuclei.clone(), p.smearing)?,
            electrons: p.electrons,
            orbitals: p.orbitals,
        })
    }

    pub fn light_speed(&self) -> Result<f64> {
        self.problem.light_speed.ok_or_else(|| Error::config("problem.light_speed", "required by `solve`"))
    }

    pub fn light_speeds(&self) -> Result<Vec<f64>> {
        self.problem.light_speeds.clone().ok_or_else(|| Error::config("problem.light_speeds", "required by `sweep`"))
    }
}
