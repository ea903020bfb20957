//! Mass sweeps and refinement probes over Galerkin models.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use super::model::{
    mass_change_map, model_from_transforms, qdq_via_projections, GalerkinModel, ModelSpec, SectorTransforms,
};
use super::transform::TransformCache;
use crate::error::{Error, Result};
use crate::hilbert::{nuclear, RMat, C64};
use crate::quasifree::{ay_criterion, qdagger_q, resolvent_difference};
use crate::tol;

/// Column header of the sweep CSV.
pub const CSV_HEADER: &str =
    "dim,mass,n_basis,grid_points,hs_1mQdQ,hs_ay,trace_1mQdQ,hs_resolvent_m1,cond_delta,s_norm,runtime_ms";

/// One basis size on one grid; `n_basis` functions per sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCombo {
    pub n_basis: usize,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub dim: usize,
    pub mass: f64,
    pub n_basis: usize,
    /// Points per axis.
    pub grid_points: usize,
    pub extent: f64,
    pub hs_1mqdq: f64,
    pub hs_ay: f64,
    pub trace_1mqdq: f64,
    pub hs_resolvent_m1: f64,
    pub cond_delta: f64,
    pub s_norm: f64,
    pub runtime_ms: u128,
    /// Relative Frobenius gap between the projection and Gram assemblies of `Q†Q`.
    pub eqt_residual: f64,
}

impl SweepRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
            self.dim,
            self.mass,
            self.n_basis,
            self.grid_points,
            self.hs_1mqdq,
            self.hs_ay,
            self.trace_1mqdq,
            self.hs_resolvent_m1,
            self.cond_delta,
            self.s_norm,
            self.runtime_ms
        )
    }
}

/// Result of a sweep; `complete` is false when it was cancelled.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub complete: bool,
}

fn record_for(model_m: &GalerkinModel, model_0: &GalerkinModel, started: Instant) -> Result<SweepRecord> {
    let q = mass_change_map(model_m, model_0)?;
    let qdq = qdagger_q(&q);
    let n = qdq.nrows();
    let one_minus = RMat::identity(n, n) - &qdq;
    let eqt = qdq_via_projections(model_m, model_0)?;
    let eqt_residual = (&eqt - &qdq).norm() / qdq.norm();
    let ay = ay_criterion(&q)?;
    let resolvent = resolvent_difference(&q, C64::new(-1.0, 0.0))?;
    let md = model_m.subspace.modular_data();
    let spec = &model_m.spec;
    Ok(SweepRecord {
        dim: spec.dim,
        mass: spec.mass,
        n_basis: spec.n_phi,
        grid_points: spec.grid.points_per_axis,
        extent: spec.grid.extent,
        hs_1mqdq: one_minus.norm(),
        hs_ay: ay.hs_norm,
        trace_1mqdq: nuclear(&one_minus.map(|x| C64::new(x, 0.0))),
        hs_resolvent_m1: resolvent.hs_norm,
        cond_delta: md.condition(),
        s_norm: md.tomita_norm(),
        runtime_ms: started.elapsed().as_millis(),
        eqt_residual,
    })
}

fn combo_spec(dim: usize, combo: &SweepCombo, zero_mean: bool) -> ModelSpec {
    ModelSpec { dim, mass: 0.0, n_phi: combo.n_basis, n_pi: combo.n_basis, grid: combo.grid, zero_mean }
}

/// `‖1 − Q†Q‖₂` and companions for every `(mass, combo)`, each mass paired
/// with the massless model of the same discretisation.
///
/// Points run in parallel; rows come back ordered by mass descending, then
/// basis size, then grid. Setting `cancel` stops new points from starting.
pub fn hs_sweep(
    dim: usize,
    masses: &[f64],
    combos: &[SweepCombo],
    zero_mean: bool,
    cache: &TransformCache,
    cancel: Option<&AtomicBool>,
) -> Result<SweepOutcome> {
    if masses.is_empty() || combos.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one mass and one basis/grid combination".into()));
    }
    if let Some(&m) = masses.iter().find(|&&m| !(m > 0.0) || !m.is_finite()) {
        return Err(Error::InvalidInput(format!("sweep masses must be positive and finite, got {m}")));
    }
    let cancelled = || cancel.is_some_and(|c| c.load(Ordering::Relaxed));

    let bases: Vec<(Arc<SectorTransforms>, GalerkinModel)> = combos
        .par_iter()
        .map(|combo| {
            let spec = combo_spec(dim, combo, zero_mean);
            let transforms = Arc::new(SectorTransforms::new(&spec, cache)?);
            let massless = model_from_transforms(&spec, transforms.clone())?;
            Ok((transforms, massless))
        })
        .collect::<Result<_>>()?;

    let points: Vec<(usize, f64)> = (0..combos.len()).flat_map(|c| masses.iter().map(move |&m| (c, m))).collect();
    let results: Vec<Option<SweepRecord>> = points
        .par_iter()
        .map(|&(c, mass)| {
            if cancelled() {
                return Ok(None);
            }
            let started = Instant::now();
            let (transforms, massless) = &bases[c];
            let spec = combo_spec(dim, &combos[c], zero_mean).with_mass(mass);
            let model = model_from_transforms(&spec, transforms.clone())?;
            record_for(&model, massless, started).map(Some)
        })
        .collect::<Result<_>>()?;

    let complete = results.iter().all(Option::is_some);
    let mut records: Vec<SweepRecord> = results.into_iter().flatten().collect();
    records.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(b.mass.total_cmp(&a.mass))
            .then(a.n_basis.cmp(&b.n_basis))
            .then(a.grid_points.cmp(&b.grid_points))
            .then(a.extent.total_cmp(&b.extent))
    });
    Ok(SweepOutcome { records, complete })
}

/// The dyadic masses `1, ½, …, 2^{1−count}`.
pub fn dyadic_masses(count: usize) -> Vec<f64> {
    (0..count).map(|k| 0.5f64.powi(k as i32)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomitaLevel {
    pub n_basis: usize,
    pub grid: GridSpec,
    pub s_norm: f64,
    pub cond_delta: f64,
}

/// Largest singular value of the discretised Tomita operator along a
/// refinement sequence.
pub fn tomita_norm_probe(
    dim: usize,
    mass: f64,
    levels: &[SweepCombo],
    cache: &TransformCache,
) -> Result<Vec<TomitaLevel>> {
    if !(mass > 0.0) {
        return Err(Error::InvalidInput(format!("probe mass must be positive, got {mass}")));
    }
    levels
        .iter()
        .map(|lv| {
            let spec = combo_spec(dim, lv, false).with_mass(mass);
            let model = super::model::build_kg_model(&spec, cache)?;
            let md = model.subspace.modular_data();
            Ok(TomitaLevel { n_basis: lv.n_basis, grid: lv.grid, s_norm: md.tomita_norm(), cond_delta: md.condition() })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceLevel {
    /// Zero-mean test functions per sector.
    pub n_basis: usize,
    /// Singular values of `1 − T`, decreasing.
    pub singular_values: Vec<f64>,
    pub trace_norm: f64,
    /// Share of the trace norm beyond the largest `n_basis / 2` values.
    pub tail_fraction: f64,
    pub eqt_residual: f64,
}

impl TraceLevel {
    /// Running sums `σ₁ + … + σₖ`.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.singular_values
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect()
    }
}

/// `d = 1` zero-mean probe: spectrum of `1 − T` between masses `mass` and
/// `reference_mass` for growing basis sizes on a fixed grid.
pub fn one_dim_trace_probe(
    mass: f64,
    reference_mass: f64,
    basis_sizes: &[usize],
    grid: GridSpec,
    cache: &TransformCache,
) -> Result<Vec<TraceLevel>> {
    if !(mass > 0.0) {
        return Err(Error::InvalidInput(format!("probe mass must be positive, got {mass}")));
    }
    basis_sizes
        .par_iter()
        .map(|&n| {
            let spec = ModelSpec { dim: 1, mass, n_phi: n, n_pi: n, grid, zero_mean: true };
            let transforms = Arc::new(SectorTransforms::new(&spec, cache)?);
            let model_m = model_from_transforms(&spec, transforms.clone())?;
            let model_0 = model_from_transforms(&spec.with_mass(reference_mass), transforms)?;
            let q = mass_change_map(&model_m, &model_0)?;
            let qdq = qdagger_q(&q);
            let k = qdq.nrows();
            let eqt = qdq_via_projections(&model_m, &model_0)?;
            let eqt_residual = tol::rel_residual(&eqt, &qdq);
            let mut sv: Vec<f64> = (RMat::identity(k, k) - qdq).singular_values().iter().copied().collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            let trace_norm: f64 = sv.iter().sum();
            let tail: f64 = sv.iter().skip(n / 2).sum();
            let tail_fraction = if trace_norm > 0.0 { tail / trace_norm } else { 0.0 };
            Ok(TraceLevel { n_basis: n, singular_values: sv, trace_norm, tail_fraction, eqt_residual })
        })
        .collect()
}
