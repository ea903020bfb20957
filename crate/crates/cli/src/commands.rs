//! One function per subcommand. Each returns the text it would print and
//! leaves exit-code mapping to the caller.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;

use qfree_core::hilbert::C64;
use qfree_core::kg::kernel::{
    f_inequality_as_stated, f_inequality_corrected, f_majorant, g_inequality, kernel_bounds, InequalityCheck,
};
use qfree_core::kg::sweep::{hs_sweep, one_dim_trace_probe, TraceLevel, CSV_HEADER};
use qfree_core::kg::{GridSpec, TransformCache};
use qfree_core::subspace::{format_spec, parse_spec};
use qfree_core::suite::{modular_identity_checks, run_suite};
use qfree_core::{ComplexSpace, StandardSubspace};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Marker appended to a CSV cut short by Ctrl-C.
pub const TRUNCATION_MARKER: &str = "# TRUNCATED";

fn fmt_c(z: C64) -> String {
    format!("{:.10}{:+.10}i", z.re, z.im)
}

/// Text report on the standard subspace described by a spec file.
///
/// Returns the report and whether every invariant check passed.
pub fn modular_report(path: &Path) -> Result<(String, bool), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let (n, vectors) = parse_spec(&text)?;
    let k = StandardSubspace::from_real_span(ComplexSpace::new(n)?, &vectors)?;
    let md = k.modular_data();
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "subspace: {}", path.display()).unwrap();
    writeln!(w, "dimension: {n}").unwrap();
    writeln!(w, "standard: true").unwrap();
    let (factor, fixed) = k.is_factor();
    writeln!(w, "factor: {factor}").unwrap();
    writeln!(w, "fixed space dimension: {}", fixed.len()).unwrap();
    writeln!(w, "delta spectrum: {}", md.spectrum().iter().map(|l| format!("{l:.12}")).collect::<Vec<_>>().join(" "))
        .unwrap();
    writeln!(w, "delta condition number: {:.6e}", md.condition()).unwrap();
    if let Some(warn) = md.warning {
        writeln!(w, "warning: ill-conditioned modular operator (cond {:.3e})", warn.condition).unwrap();
    }
    writeln!(w, "norm of s: {:.12}", md.tomita_norm()).unwrap();
    let theta: Vec<String> = md
        .spectrum()
        .iter()
        .map(|&l| {
            if (l - 1.0).abs() <= md.eig_one_tol {
                format!("{:.12}", std::f64::consts::FRAC_PI_2)
            } else {
                format!("{:.12}", 2.0 * (-0.5 * l.ln().abs()).exp().atan())
            }
        })
        .collect();
    writeln!(w, "theta spectrum: {}", theta.join(" ")).unwrap();
    let gamma: Vec<String> = md
        .spectrum()
        .iter()
        .map(|&l| if (l - 1.0).abs() <= md.eig_one_tol { "0".into() } else { format!("{:+}", l.ln().signum()) })
        .collect();
    writeln!(w, "gamma spectrum: {}", gamma.join(" ")).unwrap();
    let r_norm = md.r.matrix().clone().singular_values().max();
    writeln!(w, "norm of R: {r_norm:.12}").unwrap();
    writeln!(w, "R (standard basis):").unwrap();
    for row in md.r.matrix().row_iter() {
        writeln!(w, "  {}", row.iter().map(|z| fmt_c(*z)).collect::<Vec<_>>().join("  ")).unwrap();
    }
    let kp = k.symplectic_complement()?;
    writeln!(w, "symplectic complement basis (spec-file format):").unwrap();
    for line in format_spec(kp.basis()).lines() {
        writeln!(w, "  {line}").unwrap();
    }
    writeln!(w, "invariant checks:").unwrap();
    let checks = modular_identity_checks(&k);
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        writeln!(w, "  {status} {:<28} residual {:.3e} tol {:.0e}", c.name, c.residual, c.tolerance).unwrap();
    }
    let ok = checks.iter().all(|c| c.passed());
    writeln!(w, "verdict: {}", if ok { "all checks passed" } else { "check failures" }).unwrap();
    Ok((out, ok))
}

/// The randomized suite summary and whether everything passed.
pub fn suite(seed: u64, trials: usize) -> Result<(String, bool), CliError> {
    let summary = run_suite(seed, trials)?;
    Ok((summary.to_string(), summary.all_passed()))
}

fn output_path(cfg: &ExperimentConfig, suffix: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&cfg.output.dir)?;
    Ok(cfg.output.dir.join(format!("{}{suffix}", cfg.output.name)))
}

fn cache_for(cfg: &ExperimentConfig) -> Result<TransformCache, CliError> {
    Ok(match &cfg.output.cache_dir {
        Some(dir) => TransformCache::on_disk(dir)?,
        None => TransformCache::in_memory(),
    })
}

/// Runs the `[sweep]` section, writing `<name>.csv` and, for `d = 1`
/// zero-mean sweeps, the companion `<name>_trace.csv`.
pub fn kg_sweep(cfg: &ExperimentConfig, cancel: Option<&AtomicBool>) -> Result<String, CliError> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| CliError::Input("config has no [sweep] section".into()))?;
    let combos = sweep.combos()?;
    let cache = cache_for(cfg)?;
    let outcome = hs_sweep(sweep.dim, &sweep.masses, &combos, sweep.zero_mean, &cache, cancel)?;

    let csv_path = output_path(cfg, ".csv")?;
    let mut csv = format!("{CSV_HEADER}\n");
    for r in &outcome.records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    let total = sweep.masses.len() * combos.len();
    if !outcome.complete {
        writeln!(csv, "{TRUNCATION_MARKER}: interrupted after {} of {total} points", outcome.records.len()).unwrap();
    }
    fs::write(&csv_path, &csv)?;
    let mut msg = format!("wrote {} rows to {}\n", outcome.records.len(), csv_path.display());
    if !outcome.complete {
        return Err(CliError::Interrupted(format!("{msg}sweep interrupted; partial CSV carries a truncation marker")));
    }

    let mut worst = outcome.records.iter().map(|r| r.eqt_residual).fold(0.0, f64::max);

    if sweep.dim == 1 && sweep.zero_mean {
        let probe = cfg.trace_probe.clone().unwrap_or_default();
        let grid = GridSpec::new(probe.points_per_axis, probe.extent)?;
        let levels = one_dim_trace_probe(probe.mass, probe.reference_mass, &probe.basis_sizes, grid, &cache)?;
        let path = output_path(cfg, "_trace.csv")?;
        fs::write(&path, trace_csv(&levels))?;
        writeln!(msg, "wrote trace decay table to {}", path.display()).unwrap();
        for lv in &levels {
            worst = worst.max(lv.eqt_residual);
            writeln!(
                msg,
                "  n={:<4} trace norm {:.6e} tail fraction {:.4}",
                lv.n_basis, lv.trace_norm, lv.tail_fraction
            )
            .unwrap();
        }
    }
    writeln!(msg, "projection vs Gram assembly of Q^dagger Q: worst relative gap {worst:.3e}").unwrap();
    if worst > cfg.tolerances.eqt {
        return Err(CliError::Invariant(format!(
            "{msg}projection and Gram assemblies disagree beyond {:.0e}",
            cfg.tolerances.eqt
        )));
    }
    Ok(msg)
}

/// Long-format decay table: one row per singular value.
pub fn trace_csv(levels: &[TraceLevel]) -> String {
    let mut s = String::from("n_basis,index,singular_value,partial_sum,trace_norm,tail_fraction\n");
    for lv in levels {
        for (i, (sv, ps)) in lv.singular_values.iter().zip(lv.partial_sums()).enumerate() {
            writeln!(
                s,
                "{},{},{:.12e},{:.12e},{:.12e},{:.6}",
                lv.n_basis,
                i + 1,
                sv,
                ps,
                lv.trace_norm,
                lv.tail_fraction
            )
            .unwrap();
        }
    }
    s
}

fn describe(label: &str, c: &InequalityCheck, bound: f64) -> String {
    let status = if c.holds { "holds" } else { "FAILS" };
    format!("  m={}: {label} <= {bound}: {status} (max {:.6} at |q| = {:.4e})\n", c.mass, c.max_value, c.argmax)
}

/// Runs the `[kernel]` section and writes `<name>.csv`.
pub fn kg_kernel(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let k = cfg.kernel.as_ref().ok_or_else(|| CliError::Input("config has no [kernel] section".into()))?;
    let bounds = kernel_bounds(k.dim, &k.masses, &k.chi(), &k.quadrature())?;
    let mut csv = String::from("dim,mass,bound_phi,bound_pi,levels,radial_nodes,angular,relative_change\n");
    let mut msg = String::new();
    for b in &bounds {
        let last = b.levels.last().expect("levels");
        writeln!(
            csv,
            "{},{},{:.12e},{:.12e},{},{},{},{:.3e}",
            b.dim,
            b.mass,
            b.bound_phi,
            b.bound_pi,
            b.levels.len(),
            last.radial_nodes,
            last.angular,
            b.relative_change
        )
        .unwrap();
        writeln!(
            msg,
            "m={}: phi bound {:.6e}, pi bound {:.6e} ({} levels, last change {:.2e})",
            b.mass,
            b.bound_phi,
            b.bound_pi,
            b.levels.len(),
            b.relative_change
        )
        .unwrap();
    }
    let path = output_path(cfg, ".csv")?;
    fs::write(&path, csv)?;
    writeln!(msg, "wrote {}", path.display()).unwrap();

    let decreasing = bounds
        .windows(2)
        .all(|w| w[0].mass <= w[1].mass || (w[1].bound_phi < w[0].bound_phi && w[1].bound_pi < w[0].bound_pi));
    writeln!(msg, "bounds decrease with mass: {decreasing}").unwrap();

    writeln!(msg, "pointwise inequalities on {} samples:", k.inequality_samples).unwrap();
    let mut required_ok = true;
    for &m in k.masses.iter().filter(|&&m| m <= 1.0) {
        let stated = f_inequality_as_stated(m, k.inequality_samples);
        msg.push_str(&describe("m^2(1+|q|)^2/(m^2+|q|^2)", &stated, 1.0));
        for (label, c, bound) in [
            ("(1+|q|^2)/(1+|q|^2/m^2)", f_inequality_corrected(m, k.inequality_samples), 1.0),
            ("F(q)|q|(1+|q|)^2", f_majorant(m, k.inequality_samples), 2.0),
            ("m(1+|q|^2)^(1/2)/(|q|+omega_m)", g_inequality(m, k.inequality_samples), 1.0),
        ] {
            required_ok &= c.holds;
            msg.push_str(&describe(label, &c, bound));
        }
    }
    msg.push_str(
        "note: the first inequality is quoted verbatim and is false (its maximum is 1 + m^2 at |q| = m^2); \
         the bounds rely only on the corrected forms\n",
    );
    if !required_ok || !decreasing {
        return Err(CliError::Invariant(format!("{msg}kernel-bound checks failed")));
    }
    Ok(msg)
}
