//! TOML experiment configuration.
//!
//! Sections are one level deep and unknown keys are rejected, so a config
//! file doubles as a complete record of the run.

use std::path::{Path, PathBuf};

use qfree_core::kg::kernel::{ChiSpec, QuadratureSpec};
use qfree_core::kg::sweep::{dyadic_masses, SweepCombo};
use qfree_core::kg::GridSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_probe: Option<TraceProbeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Stem of every file written by the run.
    pub name: String,
    /// Directory of the transform cache; in memory when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), name: "experiment".into(), cache_dir: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    /// Relative Frobenius gap allowed between the two `Q†Q` assemblies.
    pub eqt: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        Self { eqt: 1e-8 }
    }
}

/// Basis/grid combinations are given as parallel arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub dim: usize,
    pub masses: Vec<f64>,
    pub n_basis: Vec<usize>,
    pub points_per_axis: Vec<usize>,
    pub extent: Vec<f64>,
    #[serde(default)]
    pub zero_mean: bool,
}

impl SweepSection {
    pub fn combos(&self) -> Result<Vec<SweepCombo>, CliError> {
        let n = self.n_basis.len();
        if self.points_per_axis.len() != n || self.extent.len() != n {
            return Err(CliError::Input(format!(
                "[sweep] n_basis, points_per_axis and extent must have equal lengths, got {}, {}, {}",
                n,
                self.points_per_axis.len(),
                self.extent.len()
            )));
        }
        self.n_basis
            .iter()
            .zip(&self.points_per_axis)
            .zip(&self.extent)
            .map(|((&n_basis, &m), &p)| Ok(SweepCombo { n_basis, grid: GridSpec::new(m, p)? }))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceProbeSection {
    pub mass: f64,
    #[serde(default)]
    pub reference_mass: f64,
    pub basis_sizes: Vec<usize>,
    pub points_per_axis: usize,
    pub extent: f64,
}

impl Default for TraceProbeSection {
    fn default() -> Self {
        Self { mass: 1.0, reference_mass: 0.0, basis_sizes: vec![16, 32, 64], points_per_axis: 4096, extent: 8.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub dim: usize,
    pub masses: Vec<f64>,
    pub ball_radius: f64,
    pub mollifier_radius: f64,
    pub r_max: f64,
    pub nodes_per_panel: usize,
    pub angular: usize,
    pub max_levels: usize,
    pub tolerance: f64,
    /// Number of `|q|` samples for the pointwise inequalities.
    pub inequality_samples: usize,
}

impl KernelSection {
    pub fn chi(&self) -> ChiSpec {
        ChiSpec { ball_radius: self.ball_radius, mollifier_radius: self.mollifier_radius }
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            r_max: self.r_max,
            nodes_per_panel: self.nodes_per_panel,
            angular: self.angular,
            max_levels: self.max_levels,
            tolerance: self.tolerance,
        }
    }
}

impl Default for KernelSection {
    fn default() -> Self {
        let (chi, q) = (ChiSpec::default(), QuadratureSpec::default());
        Self {
            dim: 2,
            masses: vec![1.0, 0.5, 0.25],
            ball_radius: chi.ball_radius,
            mollifier_radius: chi.mollifier_radius,
            r_max: q.r_max,
            nodes_per_panel: q.nodes_per_panel,
            angular: q.angular,
            max_levels: q.max_levels,
            tolerance: q.tolerance,
            inequality_samples: 10_000,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn emit(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// `d = 2` sweep over five dyadic masses and four basis/grid combinations.
    pub fn default_d2_sweep() -> Self {
        Self {
            output: OutputSection { name: "kg_sweep_d2".into(), ..OutputSection::default() },
            tolerances: ToleranceSection::default(),
            sweep: Some(SweepSection {
                dim: 2,
                masses: dyadic_masses(5),
                n_basis: vec![8, 8, 8, 4],
                points_per_axis: vec![64, 128, 256, 128],
                extent: vec![16.0, 32.0, 64.0, 32.0],
                zero_mean: false,
            }),
            trace_probe: None,
            kernel: None,
        }
    }

    /// `d = 1` zero-mean sweep with the trace-class probe.
    pub fn default_d1_zero_mean() -> Self {
        Self {
            output: OutputSection { name: "kg_sweep_d1_zero_mean".into(), ..OutputSection::default() },
            tolerances: ToleranceSection::default(),
            sweep: Some(SweepSection {
                dim: 1,
                masses: dyadic_masses(5),
                n_basis: vec![8, 16],
                points_per_axis: vec![2048, 4096],
                extent: vec![8.0, 8.0],
                zero_mean: true,
            }),
            trace_probe: Some(TraceProbeSection::default()),
            kernel: None,
        }
    }

    pub fn default_kernel() -> Self {
        Self {
            output: OutputSection { name: "kg_kernel_d2".into(), ..OutputSection::default() },
            tolerances: ToleranceSection::default(),
            sweep: None,
            trace_probe: None,
            kernel: Some(KernelSection::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for cfg in [
            ExperimentConfig::default_d2_sweep(),
            ExperimentConfig::default_d1_zero_mean(),
            ExperimentConfig::default_kernel(),
        ] {
            let text = cfg.emit();
            assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg, "{text}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = ExperimentConfig::default_d2_sweep().emit().replace("zero_mean", "zero_means");
        assert!(matches!(ExperimentConfig::parse(&text), Err(CliError::Input(_))));
        assert!(ExperimentConfig::parse("[bogus]\nx = 1\n").is_err());
    }

    #[test]
    fn default_d2_has_twenty_points() {
        let cfg = ExperimentConfig::default_d2_sweep();
        let s = cfg.sweep.unwrap();
        assert_eq!(s.masses.len() * s.combos().unwrap().len(), 20);
    }

    #[test]
    fn ragged_combos_rejected() {
        let mut s = ExperimentConfig::default_d2_sweep().sweep.unwrap();
        s.extent.pop();
        assert!(s.combos().is_err());
    }
}
