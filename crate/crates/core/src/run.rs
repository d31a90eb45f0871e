//! End-to-end drivers behind the `solve` and `sweep` commands.

use crate::config::RunConfig;
use crate::coulomb::{Hamiltonian, Model};
use crate::limit::{occupation_persistence, seed_from_mchf, summarize, sweep_c, transfer_state, SweepPoint};
use crate::mchf::{default_gamma, MchfResult};
use crate::report::{ReferenceData, ResultDocument, SolutionData, StateData, SweepDocument, RESULT_SCHEMA, SWEEP_SCHEMA};
use crate::solver::{certify_solution, outer_minimize, SolverConfig, SolverReport, SplitState, Tolerances};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// MCHF reference, the resolved solver settings and the configuration echo.
pub struct Prepared {
    pub reference: MchfResult,
    pub solver: SolverConfig,
    pub resolved: RunConfig,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    cfg.validate()?;
    let problem = cfg.problem()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let reference = problem.reference(&cfg.mchf, &mut rng)?;
    let gamma = cfg.solver.gamma_floor.unwrap_or_else(|| default_gamma(&reference));
    let solver = cfg.solver.resolve(gamma);
    solver.validate(problem.orbitals, problem.electrons)?;
    let mut resolved = cfg.clone();
    resolved.solver.gamma_floor = Some(gamma);
    Ok(Prepared { reference, solver, resolved })
}

pub struct SolveOutcome {
    pub document: ResultDocument,
    pub report: SolverReport,
    pub hamiltonian: Hamiltonian,
}

/// Restores the state stored in `warm` for the problem in `cfg`.
pub fn warm_state(cfg: &RunConfig, ham: &Hamiltonian, warm: &ResultDocument) -> Result<SplitState> {
    let (a, b) = (&cfg.problem, &warm.config.problem);
    let same = a.electrons == b.electrons
        && a.orbitals == b.orbitals
        && a.box_length == b.box_length
        && cfg.modes_per_axis() == warm.config.modes_per_axis()
        && a.nuclei == b.nuclei
        && a.smearing == b.smearing;
    if !same {
        return Err(Error::config("--warm-start", "the stored result belongs to a different problem"));
    }
    let stored_c = warm.solution.light_speed;
    if stored_c == ham.basis().light_speed() {
        warm.state.to_state(ham)
    } else {
        let stored_ham = cfg.problem()?.hamiltonian(stored_c, Model::Dirac)?;
        transfer_state(ham, &warm.state.to_state(&stored_ham)?)
    }
}

pub fn solve(cfg: &RunConfig, warm: Option<&ResultDocument>) -> Result<SolveOutcome> {
    let prep = prepare(cfg)?;
    let c = cfg.light_speed()?;
    let ham = cfg.problem()?.hamiltonian(c, Model::Dirac)?;
    let start = match warm {
        Some(doc) => warm_state(cfg, &ham, doc)?,
        None => seed_from_mchf(&ham, &prep.reference)?,
    };
    let report = outer_minimize(&ham, &start, &prep.solver)?;
    let certificate = certify_solution(&ham, &report, &Tolerances::from_config(&prep.solver), prep.solver.window_constant);
    let document = ResultDocument {
        schema: RESULT_SCHEMA.into(),
        config: prep.resolved,
        reference: ReferenceData::from_result(&prep.reference),
        solution: SolutionData::from_report(&ham, &report),
        certificate,
        state: StateData::from_state(&report.state),
    };
    Ok(SolveOutcome { document, report, hamiltonian: ham })
}

pub struct SweepOutcome {
    pub document: SweepDocument,
    pub points: Vec<SweepPoint>,
}

pub fn sweep(cfg: &RunConfig) -> Result<SweepOutcome> {
    let prep = prepare(cfg)?;
    let cs = cfg.light_speeds()?;
    let points = sweep_c(&cfg.problem()?, &cs, &prep.solver, &prep.reference)?;
    let records: Vec<_> = points.iter().map(|p| p.record.clone()).collect();
    let document = SweepDocument {
        schema: SWEEP_SCHEMA.into(),
        config: prep.resolved,
        reference: ReferenceData::from_result(&prep.reference),
        summary: summarize(&records),
        persistence: occupation_persistence(&records, prep.solver.gamma_floor)?,
        errors: points.iter().map(|p| p.error.clone()).collect(),
        records,
    };
    Ok(SweepOutcome { document, points })
}
