//! Run configuration: one strict JSON document per run.

use serde::{Deserialize, Serialize};

use crate::geometry::{FiberPath, FramePolicy};
use crate::helicity::ScanGrid;
use crate::spin_algebra::Spin;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub path: FiberPath,
    #[serde(default)]
    pub frame: FramePolicy,
    #[serde(default = "default_spin")]
    pub spin_j: f64,
    pub wavenumber_k: f64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_oracle_steps")]
    pub oracle_steps: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputFormat>,
    #[serde(default)]
    pub simulate: SimulateBlock,
    #[serde(default)]
    pub verify: VerifyBlock,
    #[serde(default)]
    pub scan: Option<ScanGrid>,
}

/// Time window and row stride of the simulate report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateBlock {
    pub t_start: f64,
    /// End of the window; the whole trajectory when absent.
    pub t_end: Option<f64>,
    /// Emit every `stride`-th grid sample (the last sample is always kept).
    pub stride: usize,
}

impl Default for SimulateBlock {
    fn default() -> Self {
        Self { t_start: 0.0, t_end: None, stride: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyBlock {
    /// Evenly spaced times at which analytic and oracle propagators are compared.
    pub checkpoints: usize,
    /// Random anti-hermitian matrices tested for exp(M)exp(−M) = I.
    pub random_matrices: usize,
    pub seed: u64,
}

impl Default for VerifyBlock {
    fn default() -> Self {
        Self { checkpoints: 16, random_matrices: 32, seed: 0x5eed }
    }
}

fn default_spin() -> f64 {
    1.0
}

fn default_samples() -> usize {
    4096
}

fn default_oracle_steps() -> usize {
    65536
}

fn default_outputs() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv]
}

const MAX_SAMPLES: usize = 1 << 22;
const MAX_ORACLE_STEPS: usize = 1 << 26;

impl RunConfig {
    /// Parses and validates a JSON document. Unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        Spin::new(self.spin_j).map_err(|e| e.to_string())?;
        if !(self.wavenumber_k.is_finite() && self.wavenumber_k > 0.0) {
            return Err(format!("wavenumber_k must be positive and finite, got {}", self.wavenumber_k));
        }
        if !(16..=MAX_SAMPLES).contains(&self.n_samples) {
            return Err(format!("n_samples must be in [16, {MAX_SAMPLES}], got {}", self.n_samples));
        }
        if !(1..=MAX_ORACLE_STEPS).contains(&self.oracle_steps) {
            return Err(format!("oracle_steps must be in [1, {MAX_ORACLE_STEPS}], got {}", self.oracle_steps));
        }
        if self.outputs.is_empty() {
            return Err("outputs must name at least one format".into());
        }
        let sim = &self.simulate;
        if !sim.t_start.is_finite() || sim.t_start < 0.0 || sim.stride == 0 {
            return Err("simulate.t_start must be finite and >= 0, simulate.stride >= 1".into());
        }
        if let Some(end) = sim.t_end {
            if !end.is_finite() || end < sim.t_start {
                return Err(format!("simulate.t_end = {end} must be finite and >= t_start"));
            }
        }
        if self.verify.checkpoints == 0 {
            return Err("verify.checkpoints must be positive".into());
        }
        self.tolerances.validate()?;
        validate_path(&self.path)
    }

    pub fn spin(&self) -> Spin {
        Spin::new(self.spin_j).expect("validated")
    }
}

fn validate_path(path: &FiberPath) -> Result<(), String> {
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
    match path {
        FiberPath::Helix { radius, pitch, turns, .. } => {
            if !finite(&[*radius, *pitch, *turns]) || *radius <= 0.0 || *pitch < 0.0 || *turns <= 0.0 {
                return Err(format!("helix needs radius > 0, pitch >= 0, turns > 0; got {radius}, {pitch}, {turns}"));
            }
        }
        FiberPath::Samples { points, .. } => {
            if points.len() < 4 {
                return Err(format!("samples path needs at least 4 points, got {}", points.len()));
            }
            if !points.iter().all(|p| finite(p)) {
                return Err("samples path has non-finite coordinates".into());
            }
        }
        FiberPath::Segments { initial_direction, initial_normal, segments } => {
            if segments.is_empty() {
                return Err("segments path needs at least one segment".into());
            }
            if !finite(initial_direction) || initial_direction.iter().all(|&x| x == 0.0) {
                return Err("initial_direction must be finite and nonzero".into());
            }
            if let Some(n) = initial_normal {
                if !finite(n) {
                    return Err("initial_normal must be finite".into());
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"path":{"type":"helix","radius":1,"pitch":1,"turns":1},"wavenumber_k":10}"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.spin_j, 1.0);
        assert_eq!(cfg.n_samples, 4096);
        assert_eq!(cfg.oracle_steps, 65536);
        assert_eq!(cfg.outputs, vec![OutputFormat::Csv]);
        assert_eq!(cfg.frame, FramePolicy::Native);
        assert_eq!(cfg.tolerances, Tolerances::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("\"wavenumber_k\"", "\"colour\":1,\"wavenumber_k\"");
        assert!(RunConfig::from_json(&text).unwrap_err().contains("colour"));
        let nested = MINIMAL.replace("\"wavenumber_k\"", "\"tolerances\":{\"exactt\":1},\"wavenumber_k\"");
        assert!(RunConfig::from_json(&nested).is_err());
    }

    #[test]
    fn out_of_range_values_rejected() {
        for (from, to) in [
            ("\"wavenumber_k\":10", "\"wavenumber_k\":-1"),
            ("\"wavenumber_k\":10", "\"wavenumber_k\":10,\"spin_j\":0.3"),
            ("\"wavenumber_k\":10", "\"wavenumber_k\":10,\"n_samples\":4"),
            ("\"wavenumber_k\":10", "\"wavenumber_k\":10,\"oracle_steps\":0"),
            ("\"radius\":1", "\"radius\":0"),
            ("\"wavenumber_k\":10", "\"wavenumber_k\":10,\"outputs\":[]"),
        ] {
            let text = MINIMAL.replace(from, to);
            assert!(RunConfig::from_json(&text).is_err(), "{text}");
        }
    }

    #[test]
    fn scan_block_parses() {
        let text = MINIMAL.replace(
            "\"wavenumber_k\":10",
            r#""wavenumber_k":10,"scan":{"kind":"rate","gamma_dot_over_k":{"start":1,"stop":1e6,"count":7,"spacing":"log"},"lambda":[0.01,0.1]}"#,
        );
        let cfg = RunConfig::from_json(&text).unwrap();
        assert!(matches!(cfg.scan, Some(ScanGrid::Rate { .. })));
    }
}
