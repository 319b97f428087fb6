//! TOML run configuration. Every field is optional; anything left out keeps
//! the reference-suite default.

use std::path::Path;

use serde::Deserialize;

use crate::docking::DestinationMetric;
use crate::harness::{calibrate_realistic, BenchConfig, HarnessError};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub policy: Option<String>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub detector: DetectorSection,
    #[serde(default)]
    pub matrix: MatrixSection,
    #[serde(default)]
    pub docking: DockingSection,
    #[serde(default)]
    pub suite: SuiteSection,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub gamma: Option<f64>,
    pub n_sim: Option<usize>,
    pub ucb_c: Option<f64>,
    pub max_depth: Option<usize>,
    pub min_particles: Option<usize>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub miss_rate: Option<f64>,
    pub fp_rate: Option<f64>,
    pub localization_noise: Option<usize>,
    /// Use the realistic recall with the false-positive rate calibrated to
    /// this precision on the loaded scenarios. Overrides the two rates.
    pub precision: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MatrixSection {
    pub targets: Option<usize>,
    pub starts: Option<usize>,
    pub repeats: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DockingSection {
    /// `euclidean` or `path`.
    pub metric: Option<String>,
    pub d_success: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SuiteSection {
    /// Generated maps per difficulty when no scenario files are given.
    pub per_tier: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Writes every set field over `cfg`. Detector calibration needs the
    /// scenarios it will run on.
    pub fn apply(&self, cfg: &mut BenchConfig, suite: &[Scenario]) -> Result<(), HarnessError> {
        let s = &self.solver;
        let solver = &mut cfg.solver;
        set(&mut solver.gamma, s.gamma);
        set(&mut solver.n_sim, s.n_sim);
        set(&mut solver.ucb_c, s.ucb_c);
        set(&mut solver.max_depth, s.max_depth);
        set(&mut solver.min_particles, s.min_particles);
        set(&mut solver.epsilon, s.epsilon);
        solver.validate()?;

        let d = &self.detector;
        if let Some(p) = d.precision {
            cfg.detector = calibrate_realistic(suite, p)?;
        } else {
            set(&mut cfg.detector.miss_rate, d.miss_rate);
            set(&mut cfg.detector.fp_rate, d.fp_rate);
        }
        set(&mut cfg.detector.localization_noise, d.localization_noise);
        cfg.detector.validate().map_err(HarnessError::Config)?;

        set(&mut cfg.matrix.targets, self.matrix.targets);
        set(&mut cfg.matrix.starts, self.matrix.starts);
        set(&mut cfg.matrix.repeats, self.matrix.repeats);

        if let Some(m) = &self.docking.metric {
            cfg.docking.metric = match m.as_str() {
                "euclidean" => DestinationMetric::Euclidean,
                "path" => DestinationMetric::PathLength,
                _ => {
                    return Err(HarnessError::Config(format!(
                        "unknown docking metric {m:?} (expected euclidean or path)"
                    )))
                }
            };
        }
        set(&mut cfg.docking.d_success, self.docking.d_success);
        Ok(())
    }
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Policy;

    #[test]
    fn empty_file_changes_nothing() {
        let cfg = RunConfig::from_toml("").unwrap();
        let mut bench = BenchConfig::reference(Policy::Pomp, 0);
        cfg.apply(&mut bench, &[]).unwrap();
        assert_eq!(bench, BenchConfig::reference(Policy::Pomp, 0));
    }

    #[test]
    fn sections_override_fields() {
        let cfg = RunConfig::from_toml(
            "seed = 9\n[solver]\nn_sim = 64\n[detector]\nfp_rate = 0.2\n[matrix]\nstarts = 2\n[docking]\nmetric = \"path\"\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(9));
        let mut bench = BenchConfig::reference(Policy::Pomp, 0);
        cfg.apply(&mut bench, &[]).unwrap();
        assert_eq!(bench.solver.n_sim, 64);
        assert_eq!(bench.detector.fp_rate, 0.2);
        assert_eq!(bench.matrix.starts, 2);
        assert_eq!(bench.docking.metric, DestinationMetric::PathLength);
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(RunConfig::from_toml("[solver]\nbogus = 1\n").is_err());
        let cfg = RunConfig::from_toml("[solver]\ngamma = 1.5\n").unwrap();
        assert!(cfg.apply(&mut BenchConfig::reference(Policy::Pomp, 0), &[]).is_err());
        let cfg = RunConfig::from_toml("[detector]\nmiss_rate = 2.0\n").unwrap();
        assert!(cfg.apply(&mut BenchConfig::reference(Policy::Pomp, 0), &[]).is_err());
    }
}
