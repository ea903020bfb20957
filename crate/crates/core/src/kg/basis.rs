//! Compactly supported test functions in the unit ball.
//!
//! Each function is a tensor product of scaled bumps `β(t) = exp(−1/(1−t²))`
//! centred on a cubic sub-lattice, or a difference of two neighbouring bumps
//! when zero mean is required.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `β(t) = exp(−1/(1 − t²))` on `|t| < 1`, zero outside.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisLayout {
    pub dim: usize,
    /// Half-width of each bump along every axis; also the lattice spacing.
    pub radius: f64,
    pub centers: Vec<Vec<f64>>,
    /// Each function is `Σ coeff · bump(centers[index])`.
    pub functions: Vec<Vec<(usize, f64)>>,
    pub zero_mean: bool,
}

/// Lattice points ordered by Euclidean norm, then lexicographically.
fn nearest_lattice_points(dim: usize, count: usize) -> Vec<Vec<i64>> {
    let mut reach = 0i64;
    loop {
        let side = (2 * reach + 1) as usize;
        let mut pts: Vec<Vec<i64>> = (0..side.pow(dim as u32))
            .map(|mut i| {
                (0..dim)
                    .map(|_| {
                        let c = (i % side) as i64 - reach;
                        i /= side;
                        c
                    })
                    .rev()
                    .collect()
            })
            .collect();
        let norm2 = |z: &Vec<i64>| z.iter().map(|c| c * c).sum::<i64>();
        pts.sort_by(|a, b| norm2(a).cmp(&norm2(b)).then_with(|| a.cmp(b)));
        // every point of norm ≤ reach is inside the cube, so the prefix is exact
        let exact = pts.iter().take_while(|z| norm2(z) <= reach * reach).count();
        if exact >= count {
            pts.truncate(count);
            return pts;
        }
        reach += 1;
    }
}

impl BasisLayout {
    /// `n` test functions in dimension `dim`, all supported in the unit ball.
    pub fn new(dim: usize, n: usize, zero_mean: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("basis size must be positive".into()));
        }
        let bumps = if zero_mean { n + 1 } else { n };
        let mut lattice = nearest_lattice_points(dim, bumps);
        let max_norm =
            lattice.iter().map(|z| (z.iter().map(|c| (c * c) as f64).sum::<f64>()).sqrt()).fold(0.0, f64::max);
        // support of a bump at a·z reaches |a z| + a √d ≤ 1
        let radius = 1.0 / (max_norm + (dim as f64).sqrt());
        let functions = if zero_mean {
            lattice.sort();
            (0..n).map(|k| vec![(k + 1, 1.0), (k, -1.0)]).collect()
        } else {
            (0..n).map(|k| vec![(k, 1.0)]).collect()
        };
        let centers = lattice.iter().map(|z| z.iter().map(|&c| c as f64 * radius).collect()).collect();
        Ok(Self { dim, radius, centers, functions, zero_mean })
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Position-space value of function `k` at `x`.
    pub fn eval(&self, k: usize, x: &[f64]) -> f64 {
        self.functions[k]
            .iter()
            .map(|&(b, c)| {
                c * self.centers[b].iter().zip(x).map(|(ci, xi)| bump((xi - ci) / self.radius)).product::<f64>()
            })
            .sum()
    }

    /// Largest `|x|` reached by any support.
    pub fn support_radius(&self) -> f64 {
        let reach = self.radius * (self.dim as f64).sqrt();
        self.centers.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt() + reach).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_order() {
        let z = nearest_lattice_points(2, 8);
        assert_eq!(z[0], vec![0, 0]);
        assert_eq!(&z[1..5], &[vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]]);
        assert_eq!(&z[5..8], &[vec![-1, -1], vec![-1, 1], vec![1, -1]]);
        let z = nearest_lattice_points(1, 5);
        assert_eq!(z, vec![vec![0], vec![-1], vec![1], vec![-2], vec![2]]);
    }

    #[test]
    fn supports_stay_in_unit_ball() {
        for dim in 1..=4 {
            for n in [1, 5, 8, 17] {
                for zm in [false, true] {
                    let b = BasisLayout::new(dim, n, zm).unwrap();
                    assert_eq!(b.len(), n);
                    assert!(b.support_radius() <= 1.0 + 1e-12, "d={dim} n={n}");
                }
            }
        }
    }

    #[test]
    fn zero_mean_functions_integrate_to_zero() {
        let b = BasisLayout::new(1, 6, true).unwrap();
        let h = 1e-4;
        for k in 0..b.len() {
            let s: f64 = (-10000..=10000).map(|i| b.eval(k, &[i as f64 * h]) * h).sum();
            assert!(s.abs() < 1e-12, "{s}");
        }
    }
}
