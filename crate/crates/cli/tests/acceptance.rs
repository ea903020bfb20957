//! Acceptance run: one PASS/FAIL line per criterion, followed by indented
//! details.
//!
//! Exits non-zero when any criterion fails, except those listed in
//! [`KNOWN_UNATTAINABLE`]. Those are still evaluated as written and still
//! print FAIL; they only stop gating the exit status.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::DVector;
use qfree_core::hilbert::{inner, re_inner, CMat, CVec, RMat};
use qfree_core::kg::kernel::{
    f_inequality_as_stated, f_inequality_corrected, f_majorant, g_inequality, kernel_bounds, ChiSpec, QuadratureSpec,
};
use qfree_core::kg::sweep::dyadic_masses;
use qfree_core::kg::{hs_sweep, one_dim_trace_probe, tomita_norm_probe, GridSpec, SweepCombo, TransformCache};
use qfree_core::quasifree::{equiv_pair, qdagger_q};
use qfree_core::random::{
    random_complex_vector, random_factor_subspace, random_standard_subspace, random_symplectomorphism, seeded,
};
use qfree_core::suite::{
    modular_identity_checks, pair_checks, representation_checks, Check, LOG_RADIUS, SYMPLECTIC_SCALE,
};
use qfree_core::{ComplexSpace, Error, StandardSubspace, Symplectomorphism, C64};

/// Criterion 6 asks for `m²(1+|q|)²/(m²+|q|²) ≤ 1`, which is false for every
/// `m > 0`: the left side peaks at `1 + m²` when `|q| = m²`. The surrounding
/// expression `(1+|q|²)/(1+|q|²/m²) ≤ 1` does hold and is reported alongside.
const KNOWN_UNATTAINABLE: &[u32] = &[6];

struct Outcome {
    passed: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { passed: true, details: Vec::new() }
    }

    fn require(&mut self, ok: bool, detail: String) {
        self.passed &= ok;
        let tag = if ok { "ok  " } else { "BAD " };
        self.details.push(format!("{tag}{detail}"));
    }

    fn note(&mut self, detail: String) {
        self.details.push(format!("    {detail}"));
    }
}

fn combo(n_basis: usize, m: usize, p: f64) -> SweepCombo {
    SweepCombo { n_basis, grid: GridSpec::new(m, p).unwrap() }
}

/// Worst residual per check name, and whether every check met its tolerance.
fn fold_checks(checks: &[Check], worst: &mut std::collections::BTreeMap<&'static str, (f64, f64, usize)>) {
    for c in checks {
        let e = worst.entry(c.name).or_insert((0.0, c.tolerance, 0));
        // a NaN residual must surface as the worst
        if c.residual > e.0 || c.residual.is_nan() {
            e.0 = c.residual;
        }
        if !c.passed() {
            e.2 += 1;
        }
    }
}

fn report_worst(out: &mut Outcome, worst: &std::collections::BTreeMap<&'static str, (f64, f64, usize)>) {
    for (name, (w, tol, failures)) in worst {
        out.require(*failures == 0, format!("{name}: worst {w:.2e} (tol {tol:.0e}), {failures} failures"));
    }
}

fn criterion_1() -> Outcome {
    let mut out = Outcome::new();
    let started = Instant::now();
    let mut rng = seeded(2024);
    let mut worst = Default::default();
    for t in 0..100 {
        let n = 1 + t % 8;
        match random_standard_subspace(n, LOG_RADIUS, &mut rng) {
            Ok(k) => fold_checks(&modular_identity_checks(&k), &mut worst),
            Err(e) => out.require(false, format!("subspace {t}: {e}")),
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    report_worst(&mut out, &worst);
    out.require(elapsed < 10.0, format!("runtime {elapsed:.2} s (< 10 s)"));
    out
}

/// `K★ = span_ℝ{u₁, u₂}`, `u₁ = (½, 1)`, `u₂ = (−i/2, i)`.
///
/// Hand arithmetic: `s` maps `uₖ ↦ uₖ` and `iuₖ ↦ −iuₖ`. With
/// `e₁ = u₁ + iu₂ = (1, 0)` and `e₂ = u₁ − iu₂ = (0, 2)`, `s` swaps `e₁` and
/// `e₂`, so `s = A∘C` with `A = [[0, ½], [2, 0]]` and `δ = s*s = AᵀA = diag(4, ¼)`.
/// `R = i(δ−1)(δ+1)⁻¹ = diag(3i/5, −3i/5)`.
/// `⟨u₁, u₂⟩ = ½·(−i/2) + 1·i = 3i/4`, and `R u₂ = (3/10, 3/5)` so
/// `Re⟨u₁, R u₂⟩ = 3/20 + 3/5 = 3/4`.
/// With `Q★ = diag(2, ½)` on `K★`: `Q†Q = diag(4, ¼)`,
/// `‖1 − Q†Q‖₂² = 9 + 9/16 = 153/16`.
fn criterion_2() -> Outcome {
    const TOL: f64 = 1e-10;
    let mut out = Outcome::new();
    let c = C64::new;
    let u1 = CVec::from_column_slice(&[c(0.5, 0.0), c(1.0, 0.0)]);
    let u2 = CVec::from_column_slice(&[c(0.0, -0.5), c(0.0, 1.0)]);
    let k = StandardSubspace::from_real_span(ComplexSpace::new(2).unwrap(), &[u1.clone(), u2.clone()]).unwrap();
    let m = k.modular_data();

    let spec = m.spectrum();
    let spec_err = (spec[0] - 0.25).abs().max((spec[1] - 4.0).abs());
    out.require(spec_err < TOL, format!("delta spectrum {spec:?}, expected [0.25, 4]"));

    let r_expected = CMat::from_diagonal(&DVector::from_vec(vec![c(0.0, 0.6), c(0.0, -0.6)]));
    let r_err = (m.r.matrix() - &r_expected).norm();
    out.require(r_err < TOL, format!("R = diag(3i/5, -3i/5): error {r_err:.2e}"));

    let im = inner(&u1, &u2).im;
    let re = re_inner(&u1, &m.r.apply(&u2));
    out.require(
        (im - 0.75).abs() < TOL && (re - 0.75).abs() < TOL,
        format!("Im<u1,u2> = {im:.12}, Re<u1,R u2> = {re:.12}, expected 0.75"),
    );

    let q = Symplectomorphism::new(k.clone(), k, RMat::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]))).unwrap();
    let qdq_err = (qdagger_q(&q) - RMat::from_diagonal(&DVector::from_vec(vec![4.0, 0.25]))).norm();
    out.require(qdq_err < TOL, format!("Q†Q = diag(4, 1/4): error {qdq_err:.2e}"));
    let expected = 153f64.sqrt() / 4.0;
    match equiv_pair(&q) {
        Ok((first, _)) => out.require(
            (first.hs_norm - expected).abs() < TOL,
            format!("||1 - Q†Q||_2 = {:.12}, expected sqrt(153)/4 = {expected:.12}", first.hs_norm),
        ),
        Err(e) => out.require(false, format!("criterion report failed: {e}")),
    }
    out
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = seeded(31);
    let lambdas = [C64::new(-2.0, 0.0), C64::new(-1.0, 2.0)];
    let mut worst = Default::default();
    for t in 0..50 {
        let n = 2 * (1 + t % 4);
        let pair = random_factor_subspace(n, LOG_RADIUS, &mut rng).and_then(|k1| {
            let k2 = random_factor_subspace(n, LOG_RADIUS, &mut rng)?;
            random_symplectomorphism(&k1, &k2, SYMPLECTIC_SCALE, &mut rng)
        });
        match pair {
            Ok(q) => fold_checks(&pair_checks(&q, &lambdas), &mut worst),
            Err(e) => out.require(false, format!("pair {t}: {e}")),
        }
    }
    report_worst(&mut out, &worst);
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = seeded(47);
    let mut worst = Default::default();
    for t in 0..1000 {
        let n = 1 + t % 8;
        match random_standard_subspace(n, LOG_RADIUS, &mut rng) {
            Ok(k) => {
                let x = random_complex_vector(n, &mut rng);
                let y = random_complex_vector(n, &mut rng);
                fold_checks(&representation_checks(&k, &x, &y), &mut worst);
            }
            Err(e) => out.require(false, format!("triple {t}: {e}")),
        }
    }
    report_worst(&mut out, &worst);
    out
}

/// Criteria 5 and 8 share their sweep points with criterion 9.
struct SweepData {
    eqt: Vec<(String, f64)>,
}

fn criterion_5(cache: &TransformCache, data: &mut SweepData) -> Outcome {
    let mut out = Outcome::new();
    let started = Instant::now();
    let masses = dyadic_masses(5);
    let base = combo(8, 128, 32.0);
    let fine = combo(8, 256, 64.0);
    let sweep = match hs_sweep(2, &masses, &[base], false, cache, None) {
        Ok(s) => s,
        Err(e) => {
            out.require(false, format!("sweep failed: {e}"));
            return out;
        }
    };
    let hs: Vec<f64> = sweep.records.iter().map(|r| r.hs_1mqdq).collect();
    for r in &sweep.records {
        out.note(format!("m = {:<7} ||1 - Q†Q||_2 = {:.6}", r.mass, r.hs_1mqdq));
        data.eqt.push((format!("d=2 m={} (128,32)", r.mass), r.eqt_residual));
    }
    let decreasing = hs.len() == masses.len() && hs.windows(2).all(|w| w[1] < w[0]);
    out.require(decreasing, "strictly decreasing along m = 1, 1/2, 1/4, 1/8, 1/16".into());
    let ratio = hs[hs.len() - 1] / hs[0];
    out.require(ratio < 0.25, format!("m=1/16 value is {:.1}% of m=1 (< 25%)", 100.0 * ratio));

    match hs_sweep(2, &[1.0], &[fine], false, cache, None) {
        Ok(s) => {
            let r = &s.records[0];
            data.eqt.push(("d=2 m=1 (256,64)".into(), r.eqt_residual));
            let change = (r.hs_1mqdq - hs[0]).abs() / hs[0];
            out.require(
                change < 0.10,
                format!(
                    "m=1 refinement (128,32) -> (256,64): {:.6} -> {:.6}, change {:.2}%",
                    hs[0],
                    r.hs_1mqdq,
                    100.0 * change
                ),
            );
        }
        Err(e) => out.require(false, format!("refined sweep failed: {e}")),
    }
    out.note(format!("runtime {:.1} s", started.elapsed().as_secs_f64()));
    out
}

fn criterion_6() -> Outcome {
    const SAMPLES: usize = 10_000;
    let mut out = Outcome::new();
    let masses = [1.0, 0.5, 0.25];
    match kernel_bounds(2, &masses, &ChiSpec::default(), &QuadratureSpec::default()) {
        Ok(bounds) => {
            for b in &bounds {
                out.require(
                    b.relative_change <= 0.01 && b.bound_phi.is_finite() && b.bound_pi.is_finite(),
                    format!(
                        "m = {:<5} phi bound {:.6}, pi bound {:.6}, last level change {:.3}% over {} levels",
                        b.mass,
                        b.bound_phi,
                        b.bound_pi,
                        100.0 * b.relative_change,
                        b.levels.len()
                    ),
                );
            }
            let decreasing =
                bounds.windows(2).all(|w| w[1].bound_phi < w[0].bound_phi && w[1].bound_pi < w[0].bound_pi);
            out.require(decreasing, "both bounds decrease with the mass".into());
        }
        Err(e) => out.require(false, format!("kernel quadrature failed: {e}")),
    }

    let small_masses = dyadic_masses(5);
    let stated: Vec<_> = small_masses.iter().map(|&m| f_inequality_as_stated(m, SAMPLES)).collect();
    let worst = stated.iter().max_by(|a, b| a.max_value.total_cmp(&b.max_value)).unwrap();
    out.require(
        stated.iter().all(|c| c.holds),
        format!(
            "m^2(1+|q|)^2/(m^2+|q|^2) <= 1 on {SAMPLES} samples for m in {{1,...,1/16}}: max {:.6} at |q| = {:.4e}, m = {}",
            worst.max_value, worst.argmax, worst.mass
        ),
    );
    let corrected = small_masses.iter().all(|&m| f_inequality_corrected(m, SAMPLES).holds);
    out.note(format!("(1+|q|^2)/(1+|q|^2/m^2) <= 1 holds on the same samples: {corrected}"));
    let majorant = small_masses.iter().all(|&m| f_majorant(m, SAMPLES).holds);
    out.note(format!("F(q)|q|(1+|q|)^2 <= 2 holds on the same samples: {majorant}"));
    let g = small_masses.iter().all(|&m| g_inequality(m, SAMPLES).holds);
    out.note(format!("pi-sector inequality holds on the same samples: {g}"));

    let d4 = kernel_bounds(4, &[1.0], &ChiSpec::default(), &QuadratureSpec::default());
    out.require(
        matches!(d4, Err(Error::ExplicitlyUnsupported(_))),
        format!("d = 4 request rejected: {}", d4.err().map(|e| e.to_string()).unwrap_or_else(|| "accepted".into())),
    );
    out
}

fn criterion_7(cache: &TransformCache) -> Outcome {
    let mut out = Outcome::new();
    let levels = [combo(2, 64, 16.0), combo(4, 128, 32.0), combo(8, 256, 64.0)];
    match tomita_norm_probe(2, 1.0, &levels, cache) {
        Ok(probe) => {
            for lv in &probe {
                out.note(format!(
                    "n = {}, (M, P) = ({}, {}): ||s|| = {:.4}",
                    lv.n_basis, lv.grid.points_per_axis, lv.grid.extent, lv.s_norm
                ));
            }
            let increasing = probe.windows(2).all(|w| w[1].s_norm > w[0].s_norm);
            out.require(increasing, "||s|| strictly increases across the 3 levels".into());
            let ratio = probe[2].s_norm / probe[0].s_norm;
            out.require(ratio > 2.0, format!("level-3/level-1 ratio {ratio:.2} (> 2)"));
        }
        Err(e) => out.require(false, format!("probe failed: {e}")),
    }
    out
}

fn criterion_8(cache: &TransformCache, data: &mut SweepData) -> Outcome {
    let mut out = Outcome::new();
    let grid = GridSpec::new(4096, 8.0).unwrap();
    match one_dim_trace_probe(1.0, 0.0, &[32, 64], grid, cache) {
        Ok(levels) => {
            for lv in &levels {
                out.note(format!(
                    "zero mean, n = {}: trace norm {:.6}, tail fraction {:.4}",
                    lv.n_basis, lv.trace_norm, lv.tail_fraction
                ));
                data.eqt.push((format!("d=1 zero-mean n={}", lv.n_basis), lv.eqt_residual));
            }
            let (a, b) = (&levels[0], &levels[1]);
            out.require(
                b.tail_fraction < 0.05,
                format!("tail share at n = 64 is {:.2}% (< 5%)", 100.0 * b.tail_fraction),
            );
            let change = (b.trace_norm - a.trace_norm).abs() / b.trace_norm;
            out.require(change < 0.10, format!("trace norm change n = 32 -> 64: {:.2}% (< 10%)", 100.0 * change));
        }
        Err(e) => out.require(false, format!("trace probe failed: {e}")),
    }

    let levels = [combo(4, 16, 4.0), combo(4, 32, 8.0), combo(4, 64, 16.0)];
    match hs_sweep(1, &[1.0], &levels, false, cache, None) {
        Ok(s) => {
            let mut recs = s.records.clone();
            recs.sort_by_key(|r| r.grid_points);
            for r in &recs {
                out.note(format!(
                    "non-zero mean, (M, P) = ({}, {}): ||1 - Q†Q||_2 = {:.6}",
                    r.grid_points, r.extent, r.hs_1mqdq
                ));
                data.eqt.push((format!("d=1 non-zero-mean ({},{})", r.grid_points, r.extent), r.eqt_residual));
            }
            for w in recs.windows(2) {
                let growth = w[1].hs_1mqdq / w[0].hs_1mqdq - 1.0;
                out.require(
                    growth > 0.25,
                    format!(
                        "growth ({}, {}) -> ({}, {}): {:.1}% (> 25%)",
                        w[0].grid_points,
                        w[0].extent,
                        w[1].grid_points,
                        w[1].extent,
                        100.0 * growth
                    ),
                );
            }
        }
        Err(e) => out.require(false, format!("IR sweep failed: {e}")),
    }
    out
}

fn criterion_9(data: &SweepData) -> Outcome {
    let mut out = Outcome::new();
    let (label, worst) =
        data.eqt.iter().max_by(|a, b| a.1.total_cmp(&b.1)).cloned().unwrap_or(("no points".into(), f64::INFINITY));
    let all = data.eqt.iter().all(|(_, r)| *r <= 1e-8);
    out.require(
        all && !data.eqt.is_empty(),
        format!("{} points, worst relative gap {worst:.2e} at {label} (tol 1e-8)", data.eqt.len()),
    );
    out
}

fn qfree(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qfree")).args(args).output().expect("qfree runs")
}

fn strip_runtime(csv: &str) -> String {
    csv.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head)).collect::<Vec<_>>().join("\n")
}

fn sweep_csv(dir: &Path, tag: &str) -> Result<String, String> {
    let config = format!(
        "[output]\ndir = \"{}\"\nname = \"{tag}\"\n\n[sweep]\ndim = 2\nmasses = [1.0, 0.5, 0.25]\nn_basis = [4, 6]\npoints_per_axis = [32, 64]\nextent = [8.0, 16.0]\n",
        dir.display()
    );
    let path = dir.join(format!("{tag}.toml"));
    std::fs::write(&path, config).map_err(|e| e.to_string())?;
    let run = qfree(&["kg-sweep", "--config", path.to_str().unwrap()]);
    if !run.status.success() {
        return Err(format!("kg-sweep exited with {:?}", run.status.code()));
    }
    std::fs::read_to_string(dir.join(format!("{tag}.csv"))).map_err(|e| e.to_string())
}

fn criterion_10() -> Outcome {
    let mut out = Outcome::new();
    let a = qfree(&["suite", "--seed", "42", "--trials", "100"]);
    let b = qfree(&["suite", "--seed", "42", "--trials", "100"]);
    out.require(
        a.status.success() && b.status.success(),
        format!("suite exit codes {:?}, {:?}", a.status.code(), b.status.code()),
    );
    out.require(
        !a.stdout.is_empty() && a.stdout == b.stdout,
        format!("suite summaries byte-identical ({} bytes)", a.stdout.len()),
    );

    let dir = tempfile::tempdir().expect("temp dir");
    match (sweep_csv(dir.path(), "first"), sweep_csv(dir.path(), "second")) {
        (Ok(x), Ok(y)) => {
            let rows = x.lines().count().saturating_sub(1);
            out.require(
                strip_runtime(&x) == strip_runtime(&y),
                format!("sweep CSV ({rows} rows) identical apart from runtime_ms"),
            );
        }
        (x, y) => out.require(false, format!("sweep runs failed: {:?} {:?}", x.err(), y.err())),
    }
    out
}

fn main() -> ExitCode {
    let cache = TransformCache::in_memory();
    let mut data = SweepData { eqt: Vec::new() };
    // evaluated in order: criterion 9 reads the points recorded by 5 and 8
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "modular identity suite", criterion_1()),
        (2, "K-star fixture", criterion_2()),
        (3, "criterion cross-validation on factorial pairs", criterion_3()),
        (4, "representation identity", criterion_4()),
        (5, "Klein-Gordon d=2 mass sweep", criterion_5(&cache, &mut data)),
        (6, "kernel bounds d=2", criterion_6()),
        (7, "Tomita operator unboundedness probe", criterion_7(&cache)),
        (8, "d=1 dichotomy", criterion_8(&cache, &mut data)),
        (9, "projection and Gram assemblies agree", criterion_9(&data)),
        (10, "CLI determinism", criterion_10()),
    ];

    let mut failed = 0;
    let mut gating = 0;
    for (n, title, outcome) in &results {
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        let known = !outcome.passed && KNOWN_UNATTAINABLE.contains(n);
        let suffix = if known { " (known unattainable as written)" } else { "" };
        println!("{status} criterion {n:>2}: {title}{suffix}");
        for d in &outcome.details {
            println!("        {d}");
        }
        failed += usize::from(!outcome.passed);
        gating += usize::from(!outcome.passed && !known);
    }
    println!("acceptance: {} passed, {failed} failed ({gating} unexpected)", results.len() - failed);
    if gating == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
