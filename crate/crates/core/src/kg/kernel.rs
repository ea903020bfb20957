//! Quadrature of the continuum Hilbert–Schmidt majorants of the mass
//! difference, for `d = 2, 3`.
//!
//! With `c = (2π)^{−d/2} χ̂` the momentum-space kernel of multiplication by
//! `χ`, the φ-sector majorant is
//!
//! `∫dq₁dq₂ F(q₁)F(q₂) A(q₁,q₂)²`, `A(q₁,q₂) = ∫dp ω_m(p)|c(p−q₁)||c(p−q₂)|`,
//!
//! with `F = 1/ω₀ − 1/ω_m`. The π-sector uses `1/ω_m` inside `A` and
//! `G = ω_m − ω₀`. Both are radial problems: `A` is expanded in angular
//! modes (Fourier in `d = 2`, Legendre in `d = 3`), which turns the angular
//! integrals into sums of squares.
//!
//! `χ` is the indicator of a ball mollified by a normalised radial bump, so
//! `χ̂` is the product of the ball transform (closed form) and the bump
//! transform, tabulated by one FFT of the bump's projection onto an axis.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::basis::bump;
use crate::error::{Error, Result};

/// Wording of the limitation in four space dimensions.
pub const D4_RATIONALE: &str = "the above proof does not work in d=4, which is compatible with the fact that the \
     massive and massless vacua are not locally quasi-equivalent in this case";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSpec {
    pub ball_radius: f64,
    pub mollifier_radius: f64,
}

impl Default for ChiSpec {
    fn default() -> Self {
        Self { ball_radius: 1.5, mollifier_radius: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Radial cutoff of every momentum integral; an even integer ≥ 4.
    pub r_max: f64,
    /// Gauss–Legendre nodes per radial panel at the first level.
    pub nodes_per_panel: usize,
    /// Angular samples at the first level (a power of two).
    pub angular: usize,
    pub max_levels: usize,
    /// Largest relative change between the last two levels.
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { r_max: 32.0, nodes_per_panel: 3, angular: 64, max_levels: 4, tolerance: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundConfig {
    pub dim: usize,
    pub mass: f64,
    #[serde(default)]
    pub chi: ChiSpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

/// Radial samples of `c(ρ) = (2π)^{−d/2} χ̂(ρ)`.
#[derive(Debug, Clone)]
pub struct ChiTable {
    pub dim: usize,
    pub step: f64,
    pub values: Vec<f64>,
    /// `max |χ(x) − 1|` over sampled `|x| ≤ 1`, from the inverse transform.
    pub one_on_ball_error: f64,
    /// Log–log slopes of the envelope of `|c|` over dyadic windows.
    pub decay_slopes: Vec<f64>,
}

/// Transform of the ball indicator with the `(2π)^{−d/2}` convention.
fn ball_transform(dim: usize, radius: f64, rho: f64) -> f64 {
    let x = radius * rho;
    match dim {
        2 if x < 1e-6 => 0.5 * radius * radius,
        2 => radius * libm::j1(x) / rho,
        3 if x < 1e-3 => (2.0 * PI).powf(-1.5) * 4.0 * PI * radius.powi(3) / 3.0,
        3 => (2.0 * PI).powf(-1.5) * 4.0 * PI * (x.sin() - x * x.cos()) / rho.powi(3),
        _ => unreachable!("dimension checked by caller"),
    }
}

/// Projection of the unnormalised radial bump `β(|x|/ε)` onto one axis.
fn bump_projection(dim: usize, eps: f64, x: f64, rule: &[(f64, f64)]) -> f64 {
    let top = (eps * eps - x * x).max(0.0).sqrt();
    if top == 0.0 {
        return 0.0;
    }
    let half = 0.5 * top;
    rule.iter()
        .map(|&(t, w)| {
            let s = half * (t + 1.0);
            let b = bump((x * x + s * s).sqrt() / eps);
            // transverse measure: 2 ds in d = 2, 2π s ds in d = 3
            let measure = if dim == 2 { 2.0 } else { 2.0 * PI * s };
            w * half * b * measure
        })
        .sum()
}

fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 3 => Ok(()),
        4 => Err(Error::ExplicitlyUnsupported(format!("kernel bounds in d=4: {D4_RATIONALE}"))),
        _ => Err(Error::InvalidInput(format!("kernel bounds need d = 2 or 3, got {dim}"))),
    }
}

impl ChiTable {
    /// Tabulates `c` up to `rho_max`, then checks `χ = 1` on the unit ball
    /// and the decay of `|c|`.
    pub fn new(dim: usize, chi: &ChiSpec, rho_max: f64) -> Result<Self> {
        check_dim(dim)?;
        let eps = chi.mollifier_radius;
        if !(eps > 0.0) || chi.ball_radius - eps < 1.0 {
            return Err(Error::InvalidInput(format!(
                "mollified ball must equal 1 on the unit ball: need radius − mollifier ≥ 1, got {} − {}",
                chi.ball_radius, eps
            )));
        }
        let dx = eps / 256.0;
        // table step of at most 1/64
        let n = ((2.0 * PI * 64.0 / dx).ceil() as usize).next_power_of_two();
        let step = 2.0 * PI / (n as f64 * dx);
        let rule = GaussLegendre::new(64).expect("degree ≥ 2").into_node_weight_pairs();

        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let reach = (eps / dx).ceil() as i64;
        for j in -reach..=reach {
            let x = j as f64 * dx;
            buf[j.rem_euclid(n as i64) as usize] = Complex64::new(bump_projection(dim, eps, x, &rule), 0.0);
        }
        let mass: f64 = buf.iter().map(|z| z.re).sum::<f64>() * dx;
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        // b̂ with the (2π)^{−d/2} convention and ∫b = 1
        let norm = dx / mass * (2.0 * PI).powf(-0.5 * dim as f64);
        let half = n / 2;
        let full: Vec<f64> =
            (0..half).map(|k| ball_transform(dim, chi.ball_radius, k as f64 * step) * buf[k].re * norm).collect();

        let one_on_ball_error = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&r| (inverse_radial(dim, &full, step, r) - 1.0).abs())
            .fold(0.0, f64::max);
        let decay_slopes = envelope_slopes(&full, step);

        let count = ((rho_max / step).ceil() as usize + 3).min(half);
        Ok(Self { dim, step, values: full[..count].to_vec(), one_on_ball_error, decay_slopes })
    }

    /// Catmull–Rom interpolation of `c`; zero past the table.
    pub fn eval(&self, rho: f64) -> f64 {
        let t = rho / self.step;
        let k = t.floor() as usize;
        if k + 2 >= self.values.len() {
            return 0.0;
        }
        let f = t - k as f64;
        // c is even in ρ
        let y0 = if k == 0 { self.values[1] } else { self.values[k - 1] };
        let (y1, y2, y3) = (self.values[k], self.values[k + 1], self.values[k + 2]);
        y1 + 0.5 * f * (y2 - y0 + f * (2.0 * y0 - 5.0 * y1 + 4.0 * y2 - y3 + f * (3.0 * (y1 - y2) + y3 - y0)))
    }

    /// Whether `χ = 1` on the unit ball to `tol` and the envelope decays
    /// faster than any fixed power over the table.
    pub fn verify(&self, tol: f64) -> Result<()> {
        if self.one_on_ball_error > tol {
            return Err(Error::IdentityCheckFailed {
                name: "chi equals one on the unit ball".into(),
                residual: self.one_on_ball_error,
                tolerance: tol,
            });
        }
        let s = &self.decay_slopes;
        let steepening = s.windows(2).all(|w| w[1] < w[0]);
        let last = *s.last().unwrap_or(&0.0);
        if !steepening || last > -6.0 {
            return Err(Error::IdentityCheckFailed {
                name: format!("superpolynomial decay of the cutoff transform (slopes {s:?})"),
                residual: last,
                tolerance: -6.0,
            });
        }
        Ok(())
    }
}

/// `χ(r) = ∫ c(p) e^{ipx} dp` for radial `c`, by the trapezoid rule.
fn inverse_radial(dim: usize, c: &[f64], step: f64, r: f64) -> f64 {
    let s: f64 = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &v)| {
            let rho = k as f64 * step;
            if dim == 2 {
                2.0 * PI * rho * v * libm::j0(rho * r)
            } else {
                let sinc = if r == 0.0 { 1.0 } else { (rho * r).sin() / (rho * r) };
                4.0 * PI * rho * rho * v * sinc
            }
        })
        .sum();
    s * step
}

/// Slopes of `log max|c|` over windows `[8·2ᵏ, 16·2ᵏ]` against `log ρ`,
/// while the envelope stays above the FFT noise floor.
fn envelope_slopes(c: &[f64], step: f64) -> Vec<f64> {
    let floor = 1e-12 * c[0].abs();
    let mut env = Vec::new();
    let mut lo = 8.0;
    while ((2.0 * lo) / step) as usize <= c.len() {
        let a = (lo / step) as usize;
        let b = ((2.0 * lo) / step) as usize;
        let m = c[a..b].iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if m < floor {
            break;
        }
        env.push(m);
        lo *= 2.0;
    }
    env.windows(2).map(|w| (w[1] / w[0]).ln() / 2f64.ln()).collect()
}

/// Composite Gauss–Legendre rule on `[0, r_max]`, graded towards the origin.
#[derive(Debug, Clone)]
pub struct RadialRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialRule {
    pub fn new(r_max: f64, nodes_per_panel: usize) -> Result<Self> {
        if r_max < 4.0 || r_max.fract() != 0.0 || !(r_max as usize).is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("radial cutoff must be an even integer ≥ 4, got {r_max}")));
        }
        let mut edges = vec![0.0];
        edges.extend((0..=6).rev().map(|k| 0.5f64.powi(k)));
        edges.push(2.0);
        let mut r = 4.0;
        while r <= r_max {
            edges.push(r);
            r += 2.0;
        }
        let rule = GaussLegendre::new(nodes_per_panel.max(2))
            .map_err(|e| Error::InvalidInput(e.to_string()))?
            .into_node_weight_pairs();
        let (mut nodes, mut weights) = (Vec::new(), Vec::new());
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            for &(t, wt) in &rule {
                nodes.push(0.5 * (b - a) * (t + 1.0) + a);
                weights.push(0.5 * (b - a) * wt);
            }
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Angular modes `a_ν(ρ, r)` of `a(|p − q|)` with `|p| = ρ`, `|q| = r`.
#[derive(Debug, Clone)]
pub struct RadialKernel {
    pub dim: usize,
    pub rule: RadialRule,
    /// One symmetric `R × R` matrix per mode.
    modes: Vec<DMatrix<f64>>,
}

fn legendre_all(lmax: usize, x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if lmax >= 1 {
        out[1] = x;
    }
    for l in 2..=lmax {
        out[l] = ((2 * l - 1) as f64 * x * out[l - 1] - (l - 1) as f64 * out[l - 2]) / l as f64;
    }
}

impl RadialKernel {
    /// `angular` samples per circle (`d = 2`, a power of two) or
    /// Gauss–Legendre nodes in `cos γ` (`d = 3`); modes up to `angular/2`.
    pub fn new<P: Fn(f64) -> f64 + Sync>(dim: usize, profile: P, rule: RadialRule, angular: usize) -> Result<Self> {
        check_dim(dim)?;
        if angular < 4 || !angular.is_power_of_two() {
            return Err(Error::InvalidInput(format!("angular resolution must be a power of two ≥ 4, got {angular}")));
        }
        let n = rule.len();
        let nmodes = angular / 2 + 1;
        let rows: Vec<Vec<f64>> = (0..n * n)
            .into_par_iter()
            .map_init(
                || {
                    let fft = FftPlanner::new().plan_fft_forward(angular);
                    let gl = GaussLegendre::new(angular).expect("degree ≥ 2").into_node_weight_pairs();
                    (fft, gl, vec![Complex64::new(0.0, 0.0); angular], vec![0.0; nmodes])
                },
                |(fft, gl, buf, pl), idx| {
                    let (i, j) = (idx / n, idx % n);
                    let (rho, r) = (rule.nodes[i], rule.nodes[j]);
                    let dist = |c: f64| (rho * rho + r * r - 2.0 * rho * r * c).max(0.0).sqrt();
                    if dim == 2 {
                        for (k, z) in buf.iter_mut().enumerate() {
                            let t = 2.0 * PI * k as f64 / angular as f64;
                            *z = Complex64::new(profile(dist(t.cos())), 0.0);
                        }
                        fft.process(buf);
                        buf[..nmodes].iter().map(|z| z.re / angular as f64).collect()
                    } else {
                        let mut out = vec![0.0; nmodes];
                        for &(x, w) in gl.iter() {
                            let a = profile(dist(x));
                            legendre_all(nmodes - 1, x, pl);
                            for (l, o) in out.iter_mut().enumerate() {
                                *o += w * a * pl[l];
                            }
                        }
                        for (l, o) in out.iter_mut().enumerate() {
                            *o *= (2 * l + 1) as f64 / 2.0;
                        }
                        out
                    }
                },
            )
            .collect();
        let modes = (0..nmodes).map(|nu| DMatrix::from_fn(n, n, |i, j| rows[i * n + j][nu])).collect();
        Ok(Self { dim, rule, modes })
    }

    /// `∫dq₁dq₂ u(q₁)u(q₂) A(q₁,q₂)²` with `A = ∫dp v(p)a(p−q₁)a(p−q₂)`,
    /// for radial `v` and `u`.
    pub fn squared_integral<V: Fn(f64) -> f64, U: Fn(f64) -> f64>(&self, v: V, u: U) -> f64 {
        let rule = &self.rule;
        let jac = |r: f64| r.powi(self.dim as i32 - 1);
        let inner: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(&r, &w)| w * jac(r) * v(r)).collect();
        let outer: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(&r, &w)| w * jac(r) * u(r)).collect();
        let last = self.modes.len() - 1;
        // collected before summing so the result does not depend on scheduling
        self.modes
            .par_iter()
            .enumerate()
            .map(|(nu, a)| {
                let mut scaled = a.clone();
                for (i, mut row) in scaled.row_iter_mut().enumerate() {
                    row *= inner[i];
                }
                let b = a.transpose() * scaled;
                let (prefactor, weight) = if self.dim == 2 {
                    // Fourier modes ±ν, Parseval over the relative angle
                    let mult = if nu == 0 || nu == last { 1.0 } else { 2.0 };
                    (2.0 * PI, 4.0 * PI * PI * mult)
                } else {
                    let l = (2 * nu + 1) as f64;
                    (4.0 * PI / l, 8.0 * PI * PI * 2.0 / l)
                };
                let mut s = 0.0;
                for j in 0..b.ncols() {
                    for i in 0..b.nrows() {
                        let x = prefactor * b[(i, j)];
                        s += outer[i] * outer[j] * x * x;
                    }
                }
                weight * s
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum()
    }
}

/// `F = 1/ω₀ − 1/ω_m`.
pub fn f_weight(mass: f64, q: f64) -> f64 {
    let wm = (mass * mass + q * q).sqrt();
    mass * mass / (q * wm * (q + wm))
}

/// `G = ω_m − ω₀`.
pub fn g_weight(mass: f64, q: f64) -> f64 {
    let wm = (mass * mass + q * q).sqrt();
    mass * mass / (wm + q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelValue {
    pub nodes_per_panel: usize,
    pub angular: usize,
    pub radial_nodes: usize,
    pub bound_phi: f64,
    pub bound_pi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBound {
    pub dim: usize,
    pub mass: f64,
    pub bound_phi: f64,
    pub bound_pi: f64,
    /// Every level evaluated, coarsest first.
    pub levels: Vec<LevelValue>,
    pub relative_change: f64,
}

fn relative_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Both bounds for one mass.
pub fn kernel_bound(config: &KernelBoundConfig) -> Result<KernelBound> {
    let mut out = kernel_bounds(config.dim, &[config.mass], &config.chi, &config.quadrature)?;
    Ok(out.remove(0))
}

/// Both bounds for several masses, sharing the cutoff table and angular
/// modes. Levels double radial and angular resolution until every bound
/// moves by at most the tolerance.
pub fn kernel_bounds(dim: usize, masses: &[f64], chi: &ChiSpec, quad: &QuadratureSpec) -> Result<Vec<KernelBound>> {
    check_dim(dim)?;
    if let Some(&m) = masses.iter().find(|&&m| !(m > 0.0) || !m.is_finite()) {
        return Err(Error::InvalidInput(format!("kernel bounds need positive finite masses, got {m}")));
    }
    if quad.max_levels < 2 {
        return Err(Error::InvalidInput("at least two quadrature levels are needed to certify convergence".into()));
    }
    let table = ChiTable::new(dim, chi, 2.0 * quad.r_max + 1.0)?;
    table.verify(1e-4)?;
    let profile = |rho: f64| table.eval(rho).abs();

    let mut history: Vec<Vec<LevelValue>> = vec![Vec::new(); masses.len()];
    for level in 0..quad.max_levels {
        let k = quad.nodes_per_panel << level;
        let angular = quad.angular << level;
        let rule = RadialRule::new(quad.r_max, k)?;
        let radial_nodes = rule.len();
        let kernel = RadialKernel::new(dim, profile, rule, angular)?;
        for (h, &m) in history.iter_mut().zip(masses) {
            let wm = |p: f64| (m * m + p * p).sqrt();
            let phi = kernel.squared_integral(wm, |q| f_weight(m, q)).sqrt();
            let pi = kernel.squared_integral(|p| 1.0 / wm(p), |q| g_weight(m, q)).sqrt();
            h.push(LevelValue { nodes_per_panel: k, angular, radial_nodes, bound_phi: phi, bound_pi: pi });
        }
        let converged = history.iter().all(|h| level > 0 && last_change(h) <= quad.tolerance);
        if converged {
            break;
        }
    }
    masses
        .iter()
        .zip(history)
        .map(|(&m, levels)| {
            let change = last_change(&levels);
            let last = *levels.last().expect("at least one level");
            if change > quad.tolerance || !last.bound_phi.is_finite() || !last.bound_pi.is_finite() {
                let prev = levels[levels.len() - 2];
                let (previous, current) = if relative_change(prev.bound_phi, last.bound_phi)
                    >= relative_change(prev.bound_pi, last.bound_pi)
                {
                    (prev.bound_phi, last.bound_phi)
                } else {
                    (prev.bound_pi, last.bound_pi)
                };
                return Err(Error::QuadratureNotConverged { previous, current, relative: change });
            }
            Ok(KernelBound {
                dim,
                mass: m,
                bound_phi: last.bound_phi,
                bound_pi: last.bound_pi,
                levels,
                relative_change: change,
            })
        })
        .collect()
}

fn last_change(levels: &[LevelValue]) -> f64 {
    match levels {
        [.., a, b] => relative_change(a.bound_phi, b.bound_phi).max(relative_change(a.bound_pi, b.bound_pi)),
        _ => f64::INFINITY,
    }
}

/// Largest sampled value of a pointwise inequality `lhs(q) ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub mass: f64,
    pub max_value: f64,
    pub argmax: f64,
    pub holds: bool,
}

fn sample_max<L: Fn(f64) -> f64>(mass: f64, samples: usize, bound: f64, lhs: L) -> InequalityCheck {
    // log-spaced |q| over [1e-6, 1e6]
    let (mut max_value, mut argmax) = (f64::NEG_INFINITY, 0.0);
    for k in 0..samples {
        let t = k as f64 / (samples.max(2) - 1) as f64;
        let q = 10f64.powf(-6.0 + 12.0 * t);
        let v = lhs(q);
        if v > max_value {
            max_value = v;
            argmax = q;
        }
    }
    InequalityCheck { mass, max_value, argmax, holds: max_value <= bound * (1.0 + 1e-12) }
}

/// `m²(1+|q|)²/(m²+|q|²) ≤ 1`, exactly as written in the proof.
pub fn f_inequality_as_stated(mass: f64, samples: usize) -> InequalityCheck {
    sample_max(mass, samples, 1.0, |q| mass * mass * (1.0 + q).powi(2) / (mass * mass + q * q))
}

/// `(1+|q|²)/(1+|q|²/m²) ≤ 1`, the middle expression of the proof's display.
pub fn f_inequality_corrected(mass: f64, samples: usize) -> InequalityCheck {
    sample_max(mass, samples, 1.0, |q| (1.0 + q * q) / (1.0 + q * q / (mass * mass)))
}

/// `F(q)|q|(1+|q|)² ≤ 2`, the constant that the corrected display supports.
pub fn f_majorant(mass: f64, samples: usize) -> InequalityCheck {
    sample_max(mass, samples, 2.0, |q| f_weight(mass, q) * q * (1.0 + q).powi(2))
}

/// `m²(1+|q|)/(|q|+ω_m) ≤ m(1+|q|)/(1+|q|²)^{1/2}`, as the ratio of the sides.
pub fn g_inequality(mass: f64, samples: usize) -> InequalityCheck {
    sample_max(mass, samples, 1.0, |q| {
        let wm = (mass * mass + q * q).sqrt();
        mass * (1.0 + q * q).sqrt() / (q + wm)
    })
}
