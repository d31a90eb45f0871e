//! Acceptance suite: one line per criterion, at the stated tolerance.
//!
//! Runs with `harness = false`. The process fails when a criterion fails,
//! unless the failure is an infeasibility that is verified on the spot.

mod common;

use common::*;
use mcdf_core::basis::{apply_dirac, mode_multiplier, project_spectral, BasisDescriptor, Components, Spectral, SpinorField};
use mcdf_core::ci::{gamma_matrix, group_action, min_occupation, CIVector};
use mcdf_core::config::RunConfig;
use mcdf_core::coulomb::{ci_hamiltonian, Hamiltonian, Model};
use mcdf_core::energy::{energy, energy_shifted, gradient_a, gradient_psi, normalize_g};
use mcdf_core::linalg::{hermitian_defect, hermitian_eigen, random_normal_c64, random_unitary, re_inner};
use mcdf_core::mchf::{full_ci_oracle, nested_minima, MchfConfig};
use mcdf_core::oracle::brute_force_ci_matrix;
use mcdf_core::run;
use mcdf_core::{CMat, CVec, Error, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

const HELIUM_K3: &str = include_str!("../../../configs/helium_k3.toml");
const HELIUM_K4: &str = include_str!("../../../configs/helium.toml");

#[derive(PartialEq)]
enum Verdict {
    Pass,
    Fail,
    /// failed, with the reason verified to be an empty feasible set
    Infeasible,
}

struct Line {
    id: &'static str,
    name: &'static str,
    verdict: Verdict,
    detail: String,
}

fn line(id: &'static str, name: &'static str, ok: bool, detail: String) -> Line {
    Line { id, name, verdict: if ok { Verdict::Pass } else { Verdict::Fail }, detail }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v) })
}

fn operator_identities() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = 1 + i % 7;
        let basis = BasisDescriptor::with_modes_per_axis(3.0 + 0.05 * i as f64, n, 1.0 + 3.0 * i as f64).unwrap();
        let f = SpinorField { coeffs: CVec::from_fn(basis.dim(Components::Dirac), |_, _| random_normal_c64(&mut rng)) };
        let norm = f.coeffs.norm();
        let col = |g: &SpinorField| CMat::from_column_slice(g.coeffs.len(), 1, g.coeffs.as_slice());
        let proj = |g: &SpinorField, s| project_spectral(g, s, &basis).unwrap();
        let plus = proj(&f, Spectral::Positive);
        let minus = proj(&f, Spectral::Negative);
        // D = E(P⁺ − P⁻) with E the per-mode |D| multiplier
        let direct = apply_dirac(&f, &basis).unwrap();
        let split = col(&plus) - col(&minus);
        let rebuilt = mode_multiplier(&basis, &split, Components::Dirac, |m| basis.dirac_energy(m));
        worst = worst.max((col(&direct) - rebuilt).norm() / direct.coeffs.norm());
        worst = worst.max((&plus.coeffs + &minus.coeffs - &f.coeffs).norm() / norm);
        worst = worst.max((proj(&plus, Spectral::Positive).coeffs - &plus.coeffs).norm() / norm);
        worst = worst.max((proj(&minus, Spectral::Negative).coeffs - &minus.coeffs).norm() / norm);
        worst = worst.max(proj(&plus, Spectral::Negative).coeffs.norm() / norm);
        worst = worst.max(plus.coeffs.dotc(&minus.coeffs).norm() / (norm * norm));
    }
    line("1", "operator identities (100 fields, up to 7³ modes)", worst <= 1e-12, format!("max rel {worst:.2e} ≤ 1e-12"))
}

fn ci_oracle() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let basis = BasisDescriptor::with_modes_per_axis(4.0, 2, 3.0).unwrap();
    let nuclei = molecule(4.0);
    let mut worst = 0.0f64;
    for model in [Model::Dirac, Model::Schrodinger] {
        let ham = Hamiltonian::new(&basis, &nuclei, model);
        for (k, n) in [(2, 2), (3, 2), (4, 2), (3, 3)] {
            let psi = smooth_orbitals(&basis, model, k, &mut rng);
            let h = ci_hamiltonian(&ham, &psi, n, 0.0).unwrap();
            let brute = brute_force_ci_matrix(&basis, &nuclei, model, &psi, n).unwrap();
            let entry = (0..h.len()).map(|i| (h[i] - brute[i]).norm()).fold(0.0, f64::max);
            worst = worst.max(entry);
        }
    }
    line("2", "Slater-Condon vs brute-force tensor contraction", worst <= 1e-10, format!("max entry diff {worst:.2e} ≤ 1e-10"))
}

fn energy_paths() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let basis = BasisDescriptor::new(5.0, 1, 4.0).unwrap();
    let nuclei = molecule(5.0);
    let shapes = [(2, 1), (2, 2), (3, 2), (4, 2), (4, 3)];
    let mut worst = 0.0f64;
    for i in 0..50 {
        let model = if i % 2 == 0 { Model::Dirac } else { Model::Schrodinger };
        let (k, n) = shapes[i % shapes.len()];
        let ham = Hamiltonian::new(&basis, &nuclei, model);
        let psi = random_orbitals(ham.dim(), k, &mut rng);
        let a = random_ci(k, n, &mut rng);
        let e = energy(&ham, &a, &psi).unwrap().total;
        let h = ci_hamiltonian(&ham, &psi, n, 0.0).unwrap();
        let q = a.coeffs().dotc(&(&h * a.coeffs())).re;
        worst = worst.max(rel(e, q));
    }
    line("3", "energy(a, Ψ) = a*·H_Ψ·a (50 inputs)", worst <= 1e-9, format!("max rel {worst:.2e} ≤ 1e-9"))
}

fn occupation_laws() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let shapes: Vec<(usize, usize)> = (1..=6).flat_map(|k| (1..=k.min(3)).map(move |n| (k, n))).collect();
    let (mut herm, mut neg, mut over, mut trace) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..10_000 {
        let (k, n) = shapes[i % shapes.len()];
        let g = gamma_matrix(&random_ci(k, n, &mut rng));
        herm = herm.max(hermitian_defect(&g));
        trace = trace.max((g.trace().re - n as f64).abs());
        let occ = hermitian_eigen(&g).0;
        neg = neg.max(-occ[0]);
        over = over.max(occ[k - 1] - 1.0);
    }
    let ok = herm <= 1e-10 && neg <= 1e-10 && over <= 1e-10 && trace <= 1e-10;
    line(
        "4",
        "occupation-matrix laws (10⁴ CI vectors, K ≤ 6, N ≤ 3)",
        ok,
        format!("hermitian {herm:.1e}, min eig −{:.1e}, max eig − 1 = {over:.1e}, trace {trace:.1e} ≤ 1e-10", neg.max(0.0)),
    )
}

fn group_invariance() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let basis = BasisDescriptor::new(5.0, 1, 4.0).unwrap();
    let ham = Hamiltonian::new(&basis, &molecule(5.0), Model::Dirac);
    let psi = smooth_orbitals(&basis, Model::Dirac, 4, &mut rng);
    let a = random_ci(4, 2, &mut rng);
    let e0 = energy(&ham, &a, &psi).unwrap().total;
    let worst = max_of((0..20).map(|_| {
        let (b, phi) = group_action(&random_unitary(4, &mut rng), &a, &psi).unwrap();
        rel(energy(&ham, &b, &phi).unwrap().total, e0)
    }));
    line("5", "group-action invariance of E (20 unitaries)", worst <= 1e-10, format!("max rel {worst:.2e} ≤ 1e-10"))
}

/// Central-difference error ratio when halving the step, and the finer error.
fn halving(f: &dyn Fn(f64) -> f64, exact: f64, h: f64) -> (f64, f64) {
    let central = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    let (e1, e2) = ((central(h) - exact).abs(), (central(0.5 * h) - exact).abs());
    (e1 / e2, e2)
}

fn gradients() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let basis = BasisDescriptor::new(5.0, 1, 4.0).unwrap();
    let ham = Hamiltonian::new(&basis, &molecule(5.0), Model::Dirac);
    let (k, n) = (3, 2);
    let psi = smooth_orbitals(&basis, Model::Dirac, k, &mut rng);
    let a = random_ci(k, n, &mut rng);
    let ga = gradient_a(&ham, &a, &psi).unwrap();
    let gp = gradient_psi(&ham, &a, &psi).unwrap();
    let (mut lo, mut hi, mut err) = (f64::INFINITY, 0.0f64, 0.0f64);
    let mut record = |(ratio, e2): (f64, f64)| {
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        err = err.max(e2);
    };
    for _ in 0..20 {
        let z = CVec::from_fn(a.len(), |_, _| random_normal_c64(&mut rng));
        let t = (&z - a.coeffs() * a.coeffs().dotc(&z)).normalize();
        let f = |s: f64| energy_shifted(&ham, &CIVector::normalized(k, n, a.coeffs() + &t * C64::new(s, 0.0)).unwrap(), &psi).unwrap().total;
        let exact: f64 = ga.iter().zip(t.iter()).map(|(x, y)| (x.conj() * y).re).sum();
        record(halving(&f, exact, 2e-2));

        let w = smooth_orbitals(&basis, Model::Dirac, k, &mut rng);
        let xi = (&w - &psi * (psi.adjoint() * &w)).normalize();
        let f = |s: f64| energy_shifted(&ham, &a, &normalize_g(&(&psi + &xi * C64::new(s, 0.0))).unwrap()).unwrap().total;
        record(halving(&f, re_inner(&gp, &xi), 2e-2));
    }
    let ok = lo >= 3.0 && hi <= 5.0;
    line("6", "Riemannian gradients vs central differences (20 directions each)", ok, format!("error ratio in [{lo:.3}, {hi:.3}] ⊂ [3, 5], finest error {err:.1e}"))
}

fn variational_chain() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let basis = BasisDescriptor::with_modes_per_axis(4.0, 2, 1.0).unwrap();
    let nuclei = molecule(4.0);
    let ham = Hamiltonian::new(&basis, &nuclei, Model::Schrodinger);
    let chain = nested_minima(&ham, 2, &[2, 3, 4], &MchfConfig::default(), &mut rng).unwrap();
    let fci = full_ci_oracle(2, &basis, &nuclei).unwrap();
    let e: Vec<f64> = chain.iter().map(|r| r.energy).collect();
    let slack = 1e-8;
    let ok = fci <= e[2] + slack && e[2] <= e[1] + slack && e[1] <= e[0] + slack;
    line("7", "variational chain full-CI ≤ I⁴ ≤ I³ ≤ I²", ok, format!("{fci:.10} ≤ {:.10} ≤ {:.10} ≤ {:.10} (slack 1e-8)", e[2], e[1], e[0]))
}

fn config(text: &str) -> RunConfig {
    RunConfig::from_toml_str(text).unwrap()
}

/// Largest smallest-occupation over random CI vectors; zero means `S_γ` is empty for γ > 0.
fn best_min_occupation(k: usize, n: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    (0..2000).map(|_| min_occupation(&random_ci(k, n, &mut rng))).fold(0.0, f64::max)
}

fn certificate_line(id: &'static str, name: &'static str, doc: &mcdf_core::report::ResultDocument) -> Line {
    let c = &doc.certificate;
    let s = &doc.solution;
    let ok = c.residual_df1 < 1e-8 && c.residual_df2 < 1e-8 && s.min_occ > s.gamma_floor && c.lambda_asymmetry <= 1e-9;
    line(
        id,
        name,
        ok,
        format!(
            "df1 {:.1e}, df2 {:.1e} < 1e-8; min_occ {:.3e} > γ = {:.3e}; Λ asym {:.1e} ≤ 1e-9; certificate {}",
            c.residual_df1, c.residual_df2, s.min_occ, s.gamma_floor, c.lambda_asymmetry, if c.passed { "passed" } else { "failed" }
        ),
    )
}

fn solve_certificate(lines: &mut Vec<Line>) -> Vec<String> {
    // as stated: K = 3 with a positive floor
    let mut stated = config(HELIUM_K3);
    stated.solver.gamma_floor = Some(0.05);
    match run::solve(&stated, None) {
        Err(Error::InfeasibleFloor { .. }) => {
            let best = best_min_occupation(3, 2);
            let verdict = if best <= 1e-12 { Verdict::Infeasible } else { Verdict::Fail };
            lines.push(Line {
                id: "8",
                name: "MCDF certificate, N=2 K=3 Z=2 5³ modes c=40, γ = 0.05",
                verdict,
                detail: format!("S_γ empty: max min_occ over 2000 random CI vectors {best:.1e}, a 3×3 antisymmetric coefficient matrix has rank ≤ 2"),
            });
        }
        other => lines.push(line("8", "MCDF certificate, N=2 K=3, γ = 0.05", false, format!("expected an infeasible floor, got {:?}", other.map(|o| o.document.solution.min_occ)))),
    }
    // K = 3 with γ = 0, the only feasible floor: residuals are measurable, min_occ > γ is not
    let k3 = config(HELIUM_K3);
    let doc = run::solve(&k3, None).unwrap().document;
    let mut l = certificate_line("8", "MCDF certificate, N=2 K=3, γ = 0", &doc);
    if l.verdict == Verdict::Fail && doc.certificate.residual_df1 < 1e-8 && doc.certificate.residual_df2 < 1e-8 && doc.solution.min_occ.abs() <= 1e-10 {
        l.verdict = Verdict::Infeasible;
    }
    lines.push(l);
    let k4 = run::solve(&config(HELIUM_K4), None).unwrap().document;
    lines.push(certificate_line("8+", "MCDF certificate, N=2 K=4 (γ = half the MCHF floor)", &k4));
    vec![doc.to_json(), k4.to_json()]
}

fn limit_lines(lines: &mut Vec<Line>, id9: &'static str, id10: &'static str, label: &'static str, text: &str) -> String {
    let doc = run::sweep(&config(text)).unwrap().document;
    let s = &doc.summary;
    let gaps: Vec<String> = doc.records.iter().map(|r| format!("{:.2e}", r.gap_to_ik.abs())).collect();
    let ok = s.gap_strictly_decreasing && s.scaled_small_component_band <= 2.0 && s.scaled_kinetic_balance_band <= 4.0;
    lines.push(line(
        id9,
        label,
        ok,
        format!(
            "|E − Nc² − I^K| = [{}] strictly decreasing: {}; c‖X‖ band {:.3} ≤ 2; c³‖X − LΦ/2c‖ band {:.3} ≤ 4",
            gaps.join(", "),
            s.gap_strictly_decreasing,
            s.scaled_small_component_band,
            s.scaled_kinetic_balance_band
        ),
    ));
    let bands: Vec<String> = doc.records.iter().map(|r| format!("{:.3}", r.lambda_band)).collect();
    lines.push(line(
        id10,
        "multiplier band ρ(Λ − c²Γ) over the sweep",
        s.lambda_band_growth <= 2.0,
        format!("ρ = [{}], growth {:.3} ≤ 2", bands.join(", "), s.lambda_band_growth),
    ));
    doc.to_json()
}

fn main() {
    let start = Instant::now();
    let mut lines = vec![operator_identities(), ci_oracle(), energy_paths(), occupation_laws(), group_invariance(), gradients(), variational_chain()];
    let solves = solve_certificate(&mut lines);
    let sweep_k3 = limit_lines(&mut lines, "9", "10", "nonrelativistic limit, K=3, c ∈ {20, 40, 80, 160}", HELIUM_K3);
    let sweep_k4 = limit_lines(&mut lines, "9+", "10+", "nonrelativistic limit, K=4, c ∈ {20, 40, 80, 160}", HELIUM_K4);

    let again = solve_certificate(&mut Vec::new());
    let mut scratch = Vec::new();
    let again_k3 = limit_lines(&mut scratch, "9", "10", "", HELIUM_K3);
    let again_k4 = limit_lines(&mut scratch, "9", "10", "", HELIUM_K4);
    let identical = solves == again && sweep_k3 == again_k3 && sweep_k4 == again_k4;
    let bytes: usize = solves.iter().map(String::len).sum::<usize>() + sweep_k3.len() + sweep_k4.len();
    lines.push(line("11", "determinism of criteria 8–9 documents", identical, format!("{bytes} bytes compared, byte-identical: {identical}")));

    for l in &lines {
        let tag = match l.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Infeasible => "FAIL (infeasible as stated)",
        };
        println!("{tag:<28} {:<4} {}: {}", l.id, l.name, l.detail);
    }
    let failed = lines.iter().filter(|l| l.verdict == Verdict::Fail).count();
    let infeasible = lines.iter().filter(|l| l.verdict == Verdict::Infeasible).count();
    println!(
        "acceptance: {} passed, {infeasible} infeasible as stated, {failed} failed ({:.1} s)",
        lines.len() - failed - infeasible,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
