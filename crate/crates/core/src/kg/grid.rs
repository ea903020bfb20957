//! Symmetric cubic momentum grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `M` points per axis at `p = (k − M/2 + ½)·π/P`, `k = 0..M`.
///
/// The half-step offset keeps `p = 0` off the grid and makes the node set
/// symmetric under `p ↦ −p`. Doubling `M` and `P` together halves the spacing
/// and keeps the momentum extent `Mπ/(2P)` fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_per_axis: usize,
    pub extent: f64,
}

impl GridSpec {
    pub fn new(points_per_axis: usize, extent: f64) -> Result<Self> {
        if points_per_axis < 2 || !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 2 points per axis and positive extent, got M = {points_per_axis}, P = {extent}"
            )));
        }
        Ok(Self { points_per_axis, extent })
    }

    pub fn spacing(&self) -> f64 {
        std::f64::consts::PI / self.extent
    }

    /// Largest |p| along an axis.
    pub fn cutoff(&self) -> f64 {
        (self.points_per_axis as f64 - 1.0) * 0.5 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        let m = self.points_per_axis as f64;
        let h = self.spacing();
        (0..self.points_per_axis).map(|k| (k as f64 - 0.5 * m + 0.5) * h).collect()
    }

    /// `(2M, 2P)`
    pub fn refined(&self) -> Self {
        Self { points_per_axis: 2 * self.points_per_axis, extent: 2.0 * self.extent }
    }
}

/// A `d`-dimensional tensor grid with row-major point ordering.
#[derive(Debug, Clone)]
pub struct MomentumGrid {
    pub dim: usize,
    pub spec: GridSpec,
    pub nodes: Vec<f64>,
}

impl MomentumGrid {
    pub fn new(dim: usize, spec: GridSpec) -> Result<Self> {
        if !(1..=4).contains(&dim) {
            return Err(Error::InvalidInput(format!("spatial dimension must be 1..=4, got {dim}")));
        }
        let points = (spec.points_per_axis as f64).powi(dim as i32);
        if points > 5e7 {
            return Err(Error::InvalidInput(format!("grid with {points:.0} points is too large")));
        }
        Ok(Self { dim, spec, nodes: spec.nodes() })
    }

    pub fn len(&self) -> usize {
        self.spec.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight `Δ^d`.
    pub fn weight(&self) -> f64 {
        self.spec.spacing().powi(self.dim as i32)
    }

    /// Axis indices of point `idx`, last axis fastest.
    pub fn axis_indices(&self, mut idx: usize, out: &mut [usize]) {
        let m = self.spec.points_per_axis;
        for a in (0..self.dim).rev() {
            out[a] = idx % m;
            idx /= m;
        }
    }

    /// Index of `−p` for the point with index `idx`.
    pub fn mirror(&self, idx: usize) -> usize {
        self.len() - 1 - idx
    }

    /// `|p|²` at every point.
    pub fn norms_squared(&self) -> Vec<f64> {
        let mut ax = vec![0; self.dim];
        (0..self.len())
            .map(|i| {
                self.axis_indices(i, &mut ax);
                ax.iter().map(|&k| self.nodes[k] * self.nodes[k]).sum()
            })
            .collect()
    }

    /// `ω_m(p) = (m² + p²)^{1/2}` at every point.
    pub fn omega(&self, mass: f64) -> Vec<f64> {
        self.norms_squared().into_iter().map(|p2| (mass * mass + p2).sqrt()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_symmetric_and_avoid_zero() {
        let g = GridSpec::new(8, 2.0).unwrap();
        let n = g.nodes();
        for k in 0..8 {
            assert_eq!(n[k], -n[7 - k]);
            assert!(n[k].abs() >= 0.5 * g.spacing() - 1e-15);
        }
        let r = g.refined();
        assert!((r.cutoff() + 0.5 * r.spacing() - (g.cutoff() + 0.5 * g.spacing())).abs() < 1e-12);
    }

    #[test]
    fn mirror_negates() {
        let grid = MomentumGrid::new(2, GridSpec::new(6, 1.0).unwrap()).unwrap();
        let (mut a, mut b) = ([0; 2], [0; 2]);
        for i in 0..grid.len() {
            grid.axis_indices(i, &mut a);
            grid.axis_indices(grid.mirror(i), &mut b);
            for d in 0..2 {
                assert_eq!(grid.nodes[a[d]], -grid.nodes[b[d]]);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(GridSpec::new(1, 1.0).is_err());
        assert!(GridSpec::new(4, 0.0).is_err());
        assert!(MomentumGrid::new(5, GridSpec::new(4, 1.0).unwrap()).is_err());
    }
}
