//! Fourier transforms of the bump profile on momentum grids, with a
//! write-once disk cache.
//!
//! Convention: `f̂(p) = (2π)^{−d/2} ∫ f(x) e^{−ip·x} dx`. A tensor bump of
//! radius `r` centred at `c` has `f̂(p) = Π_a b̂(p_a) e^{−i p_a c_a}` with the
//! real, even 1D profile `b̂(q) = (2π)^{−1/2} ∫ β(x/r) e^{−iqx} dx`.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::basis::{bump, BasisLayout};
use super::grid::{GridSpec, MomentumGrid};
use crate::error::{Error, Result};
use crate::hilbert::{CVec, C64};

const CACHE_VERSION: u32 = 1;

/// Oversampling of the FFT length relative to the momentum grid.
pub const OVERSAMPLING: usize = 8;
/// Minimum number of position samples per bump radius.
pub const SAMPLES_PER_RADIUS: f64 = 256.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileKey {
    pub version: u32,
    pub kind: String,
    pub radius: f64,
    pub points_per_axis: usize,
    pub extent: f64,
    pub fft_len: usize,
}

impl ProfileKey {
    pub fn new(radius: f64, grid: &GridSpec) -> Self {
        let period = 2.0 * grid.extent;
        let by_grid = OVERSAMPLING * grid.points_per_axis;
        let by_radius = (period * SAMPLES_PER_RADIUS / radius).ceil() as usize;
        Self {
            version: CACHE_VERSION,
            kind: "bump_profile".into(),
            radius,
            points_per_axis: grid.points_per_axis,
            extent: grid.extent,
            fft_len: by_grid.max(by_radius).next_power_of_two(),
        }
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("key serialises");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Profile `b̂` at the grid nodes by one FFT over a period `2π/Δ`.
///
/// Shifting the samples by `e^{−iΔx/2}` moves the DFT frequencies `mΔ` onto
/// the half-offset nodes `(m + ½)Δ`.
pub fn compute_profile(key: &ProfileKey) -> Vec<f64> {
    let grid = GridSpec { points_per_axis: key.points_per_axis, extent: key.extent };
    let n = key.fft_len;
    let delta = grid.spacing();
    let period = 2.0 * std::f64::consts::PI / delta;
    let dx = period / n as f64;
    let norm = dx / (2.0 * std::f64::consts::PI).sqrt();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let half = (n / 2) as i64;
    for s in -half..half {
        let x = s as f64 * dx;
        let b = bump(x / key.radius);
        if b != 0.0 {
            buf[s.rem_euclid(n as i64) as usize] = Complex64::from_polar(b * norm, -0.5 * delta * x);
        }
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let m = key.points_per_axis;
    let raw: Vec<f64> = (0..m)
        .map(|k| {
            let freq = k as i64 - (m / 2) as i64;
            buf[freq.rem_euclid(n as i64) as usize].re
        })
        .collect();
    (0..m).map(|k| 0.5 * (raw[k] + raw[m - 1 - k])).collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    key: ProfileKey,
    hash: String,
    dtype: String,
    len: usize,
}

/// In-memory memo backed by an optional directory of `<hash>.bin` /
/// `<hash>.json` pairs. Files are published by atomic rename and never
/// rewritten.
#[derive(Debug, Default)]
pub struct TransformCache {
    dir: Option<PathBuf>,
    memo: Mutex<HashMap<String, Arc<Vec<f64>>>>,
}

impl TransformCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn on_disk(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir: Some(dir), memo: Mutex::new(HashMap::new()) })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn profile(&self, radius: f64, grid: &GridSpec) -> Result<Arc<Vec<f64>>> {
        let key = ProfileKey::new(radius, grid);
        let hash = key.hash();
        if let Some(v) = self.memo.lock().expect("cache lock").get(&hash) {
            return Ok(v.clone());
        }
        let values = match self.load(&hash, &key)? {
            Some(v) => v,
            None => {
                let v = compute_profile(&key);
                self.store(&hash, &key, &v)?;
                v
            }
        };
        let values = Arc::new(values);
        self.memo.lock().expect("cache lock").entry(hash).or_insert_with(|| values.clone());
        Ok(values)
    }

    fn paths(&self, hash: &str) -> Option<(PathBuf, PathBuf)> {
        self.dir.as_ref().map(|d| (d.join(format!("{hash}.bin")), d.join(format!("{hash}.json"))))
    }

    fn load(&self, hash: &str, key: &ProfileKey) -> Result<Option<Vec<f64>>> {
        let Some((bin, json)) = self.paths(hash) else { return Ok(None) };
        if !bin.exists() || !json.exists() {
            return Ok(None);
        }
        let side: Sidecar = serde_json::from_slice(&fs::read(&json)?)?;
        let bytes = fs::read(&bin)?;
        if &side.key != key || side.len * 8 != bytes.len() {
            return Ok(None);
        }
        Ok(Some(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect()))
    }

    fn store(&self, hash: &str, key: &ProfileKey, values: &[f64]) -> Result<()> {
        let Some((bin, json)) = self.paths(hash) else { return Ok(()) };
        let dir = self.dir.as_ref().expect("paths implies dir");
        let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        publish(dir, &bin, &bytes)?;
        let side = Sidecar { key: key.clone(), hash: hash.to_string(), dtype: "f64le".into(), len: values.len() };
        publish(dir, &json, &serde_json::to_vec_pretty(&side)?)?;
        Ok(())
    }
}

fn publish(dir: &Path, target: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(target).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Transforms of every function of `layout` on `grid`.
#[allow(clippy::needless_range_loop)]
pub fn transform_layout(layout: &BasisLayout, grid: &MomentumGrid, cache: &TransformCache) -> Result<Vec<CVec>> {
    if layout.dim != grid.dim {
        return Err(Error::DimensionMismatch {
            expected: format!("basis of dimension {}", grid.dim),
            found: format!("{}", layout.dim),
        });
    }
    let profile = cache.profile(layout.radius, &grid.spec)?;
    let m = grid.spec.points_per_axis;
    let d = grid.dim;
    // per bump, per axis: b̂(p_k) e^{−i p_k c_a}
    let factors: Vec<Vec<Vec<C64>>> = layout
        .centers
        .iter()
        .map(|c| {
            c.iter().map(|&ca| (0..m).map(|k| C64::from_polar(profile[k], -grid.nodes[k] * ca)).collect()).collect()
        })
        .collect();
    let mut ax = vec![0usize; d];
    let mut out = vec![CVec::zeros(grid.len()); layout.len()];
    for i in 0..grid.len() {
        grid.axis_indices(i, &mut ax);
        for (f, terms) in layout.functions.iter().enumerate() {
            let mut z = C64::new(0.0, 0.0);
            for &(b, coeff) in terms {
                let mut prod = C64::new(coeff, 0.0);
                for a in 0..d {
                    prod *= factors[b][a][ax[a]];
                }
                z += prod;
            }
            out[f][i] = z;
        }
    }
    Ok(out)
}
