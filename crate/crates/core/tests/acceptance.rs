//! Acceptance gate: twelve numbered criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p qesl-core --test acceptance`. Every reference value
//! below is computed here from its closed form or by an independent numerical
//! route (finite differences, explicit state-vector algebra), never by
//! re-calling the library routine under test. The process exits nonzero if
//! any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qesl_core::bounds::{bound_report, log_perturbation, BoundKind, BoundReport, ReportOptions};
use qesl_core::choi::{closest_separable_map_unitary, cnot, local_dephasing_channel, swap, QuantumChannel};
use qesl_core::dynamics::{gkls_evolve, unitary_trajectory, TimeGrid};
use qesl_core::linalg::{
    c, matrix_log_on_support, random_complex_gaussian, random_hermitian, random_unitary, tensor, trace_norm_hermitian,
    trace_product, unitary_propagator, CMatrix, CVector, RankTolerance,
};
use qesl_core::measures::{ree, relative_entropy, u_quantity, SolverConfig};
use qesl_core::scenarios::corpus::standard_corpus;
use qesl_core::scenarios::{
    dephasing_h, run_dephasing, xyz_hamiltonian, DephasingParams, NonlocalParams, ScenarioOptions,
};
use qesl_core::states::{random_density, BipartiteSplit, DensityMatrix};

mod tol {
    /// Entrywise agreement of propagated pure states with their closed form.
    pub const UNITARY_ENTRYWISE: f64 = 1e-9;
    /// Entrywise agreement of the RK4 dephasing flow with its closed form.
    pub const GKLS_ENTRYWISE: f64 = 1e-6;
    /// REE of a Schmidt state against its binary entropy, in nats.
    pub const REE_VALUE_NATS: f64 = 1e-3;
    /// Trace distance of the found CSS from the dephased Schmidt state.
    pub const REE_CSS_TRACE: f64 = 1e-2;
    /// Numeric relative entropy against the closed-form dephasing value.
    pub const DEPHASING_H: f64 = 1e-8;
    /// Least observed convergence order of the central difference.
    pub const FRECHET_ORDER: f64 = 1.9;
    /// Allowed excess of a finite-difference rate over its bound.
    pub const RATE_SLACK: f64 = 5e-6;
    /// Relative slack on `T_ESL ≤ T`, covering quadrature error on bounds
    /// that are saturated exactly.
    pub const ESL_RELATIVE_SLACK: f64 = 1e-4;
    /// Saturation a `p = 0` pair must reach to count as attaining.
    pub const PAIR_SATURATION: f64 = 0.9;
    pub const UNCERTAINTY_SLACK: f64 = 1e-9;
    pub const U_PURE_VARIANCE: f64 = 1e-10;
    pub const IDENTITY_MAP: f64 = 1e-10;
}

mod budget {
    use std::time::Duration;

    pub const UNITARY: Duration = Duration::from_secs(1);
    pub const GKLS: Duration = Duration::from_secs(5);
    pub const REE: Duration = Duration::from_secs(60);
    pub const DEPHASING_H: Duration = Duration::from_secs(10);
    pub const PAIRS: Duration = Duration::from_secs(120);
}

/// Grid steps over `[0, 2]` for the bound corpus; finer grids keep the
/// finite-difference error on exactly saturated bounds below the rate slack.
const CORPUS_STEPS: usize = 1600;
const CORPUS_SEED: u64 = 20_240_611;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn timed(budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    match budget {
        Some(b) => Outcome::new(
            out.pass && elapsed < b,
            format!("{}; {:.2}s of {}s", out.detail, elapsed.as_secs_f64(), b.as_secs()),
        ),
        None => Outcome::new(out.pass, format!("{}; {:.2}s", out.detail, elapsed.as_secs_f64())),
    }
}

fn max_entry_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn qubits() -> BipartiteSplit {
    BipartiteSplit::qubits()
}

/// `√p|00⟩ + √(1−p)|11⟩` as a density matrix, written out entry by entry.
fn schmidt_density(p: f64, coherence_factor: f64) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    let coh = (p * (1.0 - p)).sqrt() * coherence_factor;
    m[(0, 0)] = c(p, 0.0);
    m[(3, 3)] = c(1.0 - p, 0.0);
    m[(0, 3)] = c(coh, 0.0);
    m[(3, 0)] = c(coh, 0.0);
    m
}

fn dephased_schmidt(p: f64) -> CMatrix {
    schmidt_density(p, 0.0)
}

fn binary_entropy(p: f64) -> f64 {
    -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
}

/// On span{|00⟩, |11⟩} the coupling `μx XX + μy YY` acts as `δ σx` with
/// `δ = μx − μy`, so `Ψ_t = cos(δt)Ψ₀ − i sin(δt) σx Ψ₀`.
fn closed_form_psi(p: f64, delta: f64, t: f64) -> CMatrix {
    let (a, b) = (p.sqrt(), (1.0 - p).sqrt());
    let (cs, sn) = ((delta * t).cos(), (delta * t).sin());
    let mut psi = CVector::zeros(4);
    psi[0] = c(a * cs, -b * sn);
    psi[3] = c(b * cs, -a * sn);
    &psi * psi.adjoint()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let grid = TimeGrid::new(0.0, 2.0, 50).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p: f64 = rng.random_range(0.0..=1.0);
        let delta: f64 = rng.random_range(-2.0..2.0);
        let theta: f64 = rng.random_range(0.0..4.0);
        let params = NonlocalParams::new(p, delta, theta).unwrap();
        let rho0 = DensityMatrix::new(schmidt_density(p, 1.0), qubits()).unwrap();
        let traj = unitary_trajectory(&params.hamiltonian(), &rho0, grid).unwrap();
        for (k, rho) in traj.states.iter().enumerate() {
            worst = worst.max(max_entry_diff(rho.matrix(), &closed_form_psi(p, delta, grid.t(k))));
        }
    }
    Outcome::new(
        worst <= tol::UNITARY_ENTRYWISE,
        format!("max entry error {worst:.2e} (tol {:.0e})", tol::UNITARY_ENTRYWISE),
    )
}

fn criterion_2() -> Outcome {
    let grid = TimeGrid::new(0.0, 2.0, 399).unwrap();
    let mut worst: f64 = 0.0;
    for gamma in [0.2, 1.0] {
        for p in [0.25, 0.5] {
            let params = DephasingParams::new(p, gamma).unwrap();
            let rho0 = DensityMatrix::new(schmidt_density(p, 1.0), qubits()).unwrap();
            let traj = gkls_evolve(&params.model(), &rho0, grid).unwrap();
            for (k, rho) in traj.states.iter().enumerate() {
                let exact = schmidt_density(p, (-4.0 * gamma * grid.t(k)).exp());
                worst = worst.max(max_entry_diff(rho.matrix(), &exact));
            }
        }
    }
    Outcome::new(
        worst <= tol::GKLS_ENTRYWISE,
        format!(
            "400 nodes, max entry error {worst:.2e} (tol {:.0e})",
            tol::GKLS_ENTRYWISE
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut worst_value: f64 = 0.0;
    let mut worst_css: f64 = 0.0;
    for i in 1..=9 {
        let p = i as f64 / 10.0;
        let rho = DensityMatrix::new(schmidt_density(p, 1.0), qubits()).unwrap();
        let result = ree(
            &rho,
            &SolverConfig {
                seed: i,
                ..Default::default()
            },
        )
        .unwrap();
        worst_value = worst_value.max((result.value - binary_entropy(p)).abs());
        let dist = 0.5 * trace_norm_hermitian(&(result.css.matrix() - dephased_schmidt(p)));
        worst_css = worst_css.max(dist);
    }
    Outcome::new(
        worst_value <= tol::REE_VALUE_NATS && worst_css <= tol::REE_CSS_TRACE,
        format!(
            "max value error {worst_value:.2e} nats (tol {:.0e}), max CSS trace distance {worst_css:.2e} (tol {:.0e})",
            tol::REE_VALUE_NATS,
            tol::REE_CSS_TRACE
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let p = 0.05 + 0.1 * i as f64;
        let sigma = dephased_schmidt(p);
        for j in 0..10 {
            let gamma = 0.1 + 0.2 * j as f64;
            for k in 0..10 {
                let t = 0.2 * k as f64;
                let rho = DensityMatrix::new(schmidt_density(p, (-4.0 * gamma * t).exp()), qubits()).unwrap();
                let d = relative_entropy(&rho, &sigma, 1e-9).unwrap().value().unwrap();
                worst = worst.max((d - dephasing_h(p, t, gamma)).abs());
            }
        }
    }
    Outcome::new(
        worst <= tol::DEPHASING_H,
        format!(
            "1000 grid points, max |D − h| {worst:.2e} (tol {:.0e})",
            tol::DEPHASING_H
        ),
    )
}

/// Least-squares slope of `ln err` against `ln q`.
fn observed_order(qs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = qs.iter().map(|q| q.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let qs = [1e-3, 1e-4, 1e-5];
    let mut worst_order = f64::INFINITY;
    for i in 0..50 {
        let d = 2 + i % 3;
        let g = random_complex_gaussian(d, d, &mut rng);
        let a = (&g * g.adjoint()).scale(1.0 / d as f64) + CMatrix::identity(d, d).scale(0.2);
        // The central difference loses about 1e-11 to cancellation at
        // q = 1e-5; a direction of norm ~10 keeps the q² truncation term
        // above that floor while q‖B‖ stays well below λ_min(A) = 0.2.
        let b = random_hermitian(d, &mut rng).scale(8.0);
        let cm = random_hermitian(d, &mut rng);
        let f = |q: f64| {
            let log = matrix_log_on_support(&(&a + b.scale(q)), RankTolerance::default()).unwrap();
            trace_product(&cm, &log).re
        };
        let exact = trace_product(&cm, &log_perturbation(&a, &b).unwrap()).re;
        let errs: Vec<f64> = qs.iter().map(|&q| ((f(q) - f(-q)) / (2.0 * q) - exact).abs()).collect();
        worst_order = worst_order.min(observed_order(&qs, &errs));
    }
    Outcome::new(
        worst_order >= tol::FRECHET_ORDER,
        format!(
            "50 instances, lowest observed order {worst_order:.3} (need {})",
            tol::FRECHET_ORDER
        ),
    )
}

struct CorpusReports {
    trajectories: usize,
    reports: Vec<BoundReport>,
}

fn corpus_reports() -> CorpusReports {
    let grid = TimeGrid::new(0.0, 2.0, CORPUS_STEPS).unwrap();
    let corpus = standard_corpus(grid, CORPUS_SEED).unwrap();
    let mut reports = Vec::new();
    for entry in &corpus {
        for &kind in &entry.kinds {
            let report = bound_report(
                &entry.trajectory,
                &entry.id,
                ReportOptions {
                    kind,
                    hamiltonian: entry.hamiltonian.as_ref(),
                    ..Default::default()
                },
            )
            .unwrap();
            reports.push(report);
        }
    }
    CorpusReports {
        trajectories: corpus.len(),
        reports,
    }
}

fn criterion_6(corpus: &CorpusReports) -> Outcome {
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_id = String::new();
    for r in &corpus.reports {
        violations += r.violations(tol::RATE_SLACK).len();
        let n = r.samples.len();
        for s in &r.samples[1..n - 1] {
            let excess = s.lhs_rate - s.terms.total;
            if excess > worst {
                worst = excess;
                worst_id = format!("{} [{}]", r.trajectory_id, r.kind);
            }
        }
    }
    Outcome::new(
        corpus.trajectories >= 30 && violations == 0,
        format!(
            "{} trajectories, {} reports, {violations} violations; largest excess {worst:.2e} on {worst_id}",
            corpus.trajectories,
            corpus.reports.len()
        ),
    )
}

fn criterion_7(corpus: &CorpusReports) -> Outcome {
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    let mut kinds = std::collections::BTreeSet::new();
    for r in &corpus.reports {
        kinds.insert(r.kind.as_str());
        let t0 = r.samples[0].t;
        for (s, &esl) in r.samples.iter().zip(&r.limit.t_esl_cum).skip(1) {
            let elapsed = s.t - t0;
            worst = worst.max(esl / elapsed);
            if esl > elapsed * (1.0 + tol::ESL_RELATIVE_SLACK) {
                violations += 1;
            }
        }
    }
    Outcome::new(
        violations == 0 && kinds.len() == 4,
        format!(
            "kinds {kinds:?}, {violations} violations; max T_ESL/T {worst:.7} (slack {:.0e})",
            tol::ESL_RELATIVE_SLACK
        ),
    )
}

/// The two `p = 0` pairs run through the binary, so the emitted CSV and SVG
/// are the artifacts checked.
fn criterion_8(dir: &Path) -> Outcome {
    let mut best: Option<((f64, f64), f64, f64)> = None;
    let mut lines = Vec::new();
    let mut emitted = true;
    for (delta, theta) in [(0.1, 3.5), (0.0, 3.15)] {
        let csv = dir.join(format!("pair_{delta}_{theta}.csv"));
        let svg = dir.join(format!("pair_{delta}_{theta}.svg"));
        let status = Command::new(env!("CARGO_BIN_EXE_qesl"))
            .args(["scenario", "nonlocal", "--p", "0", "--t1", "2", "--steps", "400"])
            .args(["--delta", &delta.to_string(), "--theta", &theta.to_string()])
            .arg("--csv")
            .arg(&csv)
            .arg("--svg")
            .arg(&svg)
            .output()
            .unwrap();
        if !status.status.success() {
            emitted = false;
            continue;
        }
        let text = std::fs::read_to_string(&csv).unwrap();
        let svg_text = std::fs::read_to_string(&svg).unwrap();
        emitted &= svg_text.contains(r#"id="t-esl""#);
        let mut max_ratio: f64 = 0.0;
        let (mut saturated, mut nodes) = (0usize, 0usize);
        for row in text.lines().skip(1) {
            let cols: Vec<&str> = row.split(',').collect();
            let t: f64 = cols[0].parse().unwrap();
            let esl: f64 = cols[9].parse().unwrap();
            emitted &= esl.is_finite();
            if t > 0.0 {
                max_ratio = max_ratio.max(esl / t);
                nodes += 1;
                saturated += usize::from(esl / t >= 0.99);
            }
        }
        let fraction = saturated as f64 / nodes.max(1) as f64;
        lines.push(format!(
            "(δ={delta}, θ={theta}) max T_ESL/T {max_ratio:.4}, ≥0.99 on {:.1}% of T",
            100.0 * fraction
        ));
        // The attaining pair is the one that stays saturated longest.
        if best.map_or(true, |(_, _, f)| fraction > f) {
            best = Some(((delta, theta), max_ratio, fraction));
        }
    }
    let (pair, ratio, _) = best.unwrap_or(((f64::NAN, f64::NAN), 0.0, 0.0));
    Outcome::new(
        emitted && ratio >= tol::PAIR_SATURATION,
        format!(
            "{}; attaining pair (δ={}, θ={}) at {ratio:.4} (need {})",
            lines.join(", "),
            pair.0,
            pair.1,
            tol::PAIR_SATURATION
        ),
    )
}

fn criterion_9() -> Outcome {
    let grid = TimeGrid::new(0.0, 2.0, 400).unwrap();
    let opts = ScenarioOptions::with_kinds(&[BoundKind::Cptp]);
    let mut min_gap = f64::INFINITY;
    let mut at = (0.0, 0.0, 0.0);
    for p in [0.1, 0.25, 0.5, 0.75, 0.9] {
        for gamma in [0.2, 0.5, 1.0, 2.0] {
            let run = run_dephasing(&DephasingParams::new(p, gamma).unwrap(), grid, &opts).unwrap();
            let r = run.report(BoundKind::Cptp).unwrap();
            for (s, &esl) in r.samples.iter().zip(&r.limit.t_esl_cum).skip(1) {
                let gap = 1.0 - esl / s.t;
                if gap < min_gap {
                    min_gap = gap;
                    at = (p, gamma, s.t);
                }
            }
        }
    }
    Outcome::new(
        min_gap > 0.0,
        format!(
            "20 (p, γ) pairs, minimum gap 1 − T_ESL/T = {min_gap:.4} at p={}, γ={}, T={:.3}",
            at.0, at.1, at.2
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let splits = [qubits(), BipartiteSplit::new(2, 3).unwrap()];
    let mut worst_excess = f64::NEG_INFINITY;
    for i in 0..500 {
        let split = splits[i % 2];
        let n = split.dim();
        let rho = random_density(split, 1 + i % n, rng.random()).unwrap();
        let o1 = random_hermitian(n, &mut rng);
        let o2 = random_hermitian(n, &mut rng);
        let comm = &o1 * &o2 - &o2 * &o1;
        let lhs = 0.25 * trace_product(&comm, rho.matrix()).norm_sqr();
        let rhs = u_quantity(&rho, &o1).unwrap() * u_quantity(&rho, &o2).unwrap();
        worst_excess = worst_excess.max(lhs - rhs);
    }
    let mut worst_pure: f64 = 0.0;
    for i in 0..100 {
        let n = 2 + i % 5;
        let split = BipartiteSplit::new(1, n).unwrap();
        let psi = random_complex_gaussian(n, 1, &mut rng);
        let psi = psi.scale(1.0 / psi.norm());
        let rho = DensityMatrix::new(&psi * psi.adjoint(), split).unwrap();
        let o = random_hermitian(n, &mut rng);
        let mean = (psi.adjoint() * &o * &psi)[(0, 0)].re;
        let second = (psi.adjoint() * &o * &o * &psi)[(0, 0)].re;
        worst_pure = worst_pure.max((u_quantity(&rho, &o).unwrap() - (second - mean * mean)).abs());
    }
    Outcome::new(
        worst_excess <= tol::UNCERTAINTY_SLACK && worst_pure <= tol::U_PURE_VARIANCE,
        format!(
            "500 triples, max lhs − U1U2 {worst_excess:.2e} (tol {:.0e}); pure |U − V| {worst_pure:.2e} (tol {:.0e})",
            tol::UNCERTAINTY_SLACK,
            tol::U_PURE_VARIANCE
        ),
    )
}

fn criterion_11() -> Outcome {
    let q = qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = xyz_hamiltonian(0.9, 0.4, 0.2);
    let npt = [
        ("cnot", QuantumChannel::from_unitary(&cnot(), q).unwrap()),
        ("swap", QuantumChannel::from_unitary(&swap(), q).unwrap()),
        (
            "nonlocal-H",
            QuantumChannel::from_unitary(&unitary_propagator(h.matrix(), 0.7).unwrap(), q).unwrap(),
        ),
    ];
    let product = tensor(&random_unitary(2, &mut rng), &random_unitary(2, &mut rng));
    let ppt = [
        ("product-unitary", QuantumChannel::from_unitary(&product, q).unwrap()),
        ("dephasing", local_dephasing_channel(0.6, 0.8).unwrap()),
    ];
    let mut wrong = Vec::new();
    for (name, ch) in &npt {
        if ch.separability().is_ppt {
            wrong.push(*name);
        }
    }
    for (name, ch) in &ppt {
        if !ch.separability().is_ppt {
            wrong.push(*name);
        }
    }
    let map = closest_separable_map_unitary(&h, 0.0, q).unwrap();
    let id_err = max_entry_diff(map.choi(), QuantumChannel::identity(q).choi());
    Outcome::new(
        wrong.is_empty() && id_err <= tol::IDENTITY_MAP,
        format!(
            "misclassified {wrong:?}; closest separable map at t=0 differs from identity by {id_err:.2e} (tol {:.0e})",
            tol::IDENTITY_MAP
        ),
    )
}

const DETERMINISM_CONFIGS: [(&str, &str); 3] = [
    (
        "nonlocal",
        r#"{"scenario":"nonlocal","parameters":{"p":0.3,"delta":0.5,"theta":1.2},"grid":{"t1":1.5,"steps":200},"seed":7}"#,
    ),
    (
        "dephasing",
        r#"{"scenario":"dephasing","parameters":{"p":0.25,"gamma":0.7},"grid":{"t1":1,"steps":200},"seed":7}"#,
    ),
    (
        "custom-gkls",
        r#"{"scenario":"custom-gkls",
            "parameters":{
              "hamiltonian":[[0.3,0,0,0],[0,-0.1,0,0],[0,0,0.1,0],[0,0,0,-0.3]],
              "jumps":[[[0,0,0.4,0],[0,0,0,0.4],[0,0,0,0],[0,0,0,0]]],
              "state":[[0.4,0,0,0.3],[0,0.1,0,0],[0,0,0.1,0],[0.3,0,0,0.4]]},
            "grid":{"t1":1,"steps":100},
            "solver":{"restarts":6},
            "seed":42}"#,
    ),
];

fn criterion_12(dir: &Path) -> Outcome {
    let mut differing = Vec::new();
    for (name, config) in DETERMINISM_CONFIGS {
        let cfg_path = dir.join(format!("{name}.json"));
        std::fs::write(&cfg_path, config).unwrap();
        let mut outputs = Vec::new();
        for run in 0..2 {
            let csv = dir.join(format!("{name}_{run}.csv"));
            let out = Command::new(env!("CARGO_BIN_EXE_qesl"))
                .args(["run", "--config"])
                .arg(&cfg_path)
                .arg("--csv")
                .arg(&csv)
                .output()
                .unwrap();
            outputs.push(out.status.success().then(|| std::fs::read(&csv).unwrap()));
        }
        if outputs[0].is_none() || outputs[0] != outputs[1] {
            differing.push(name);
        }
    }
    Outcome::new(
        differing.is_empty(),
        format!(
            "{} configs run twice, differing or failed: {differing:?}",
            DETERMINISM_CONFIGS.len()
        ),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_start = Instant::now();
    let corpus = corpus_reports();
    let corpus_time = corpus_start.elapsed();
    println!("corpus of bound reports built in {:.2}s", corpus_time.as_secs_f64());

    let results = [
        ("unitary closed form", timed(Some(budget::UNITARY), criterion_1)),
        ("GKLS closed form", timed(Some(budget::GKLS), criterion_2)),
        ("REE calibration", timed(Some(budget::REE), criterion_3)),
        (
            "dephasing relative entropy",
            timed(Some(budget::DEPHASING_H), criterion_4),
        ),
        ("log Fréchet derivative", timed(None, criterion_5)),
        ("rate bounds on corpus", timed(None, || criterion_6(&corpus))),
        ("speed-limit validity", timed(None, || criterion_7(&corpus))),
        (
            "p = 0 pair saturation",
            timed(Some(budget::PAIRS), || criterion_8(dir.path())),
        ),
        ("dephasing non-attainability", timed(None, criterion_9)),
        ("uncertainty relation", timed(None, criterion_10)),
        ("Choi classification", timed(None, criterion_11)),
        ("CLI determinism", timed(None, || criterion_12(dir.path()))),
    ];

    let mut failed = 0;
    for (i, (name, out)) in results.iter().enumerate() {
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {:>2} {name}: {}", i + 1, out.detail);
        failed += usize::from(!out.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
