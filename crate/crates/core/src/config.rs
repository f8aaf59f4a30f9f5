//! Run configuration shared by the CLI scans.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::McOptions;
use crate::spectrum::default_epsilon;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Gauss orders are `scale · ℓ_max + pad` per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOrders {
    pub scale: usize,
    pub pad: usize,
}

impl Default for QuadratureOrders {
    fn default() -> Self {
        QuadratureOrders { scale: 2, pad: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub d: u32,
    pub k: u32,
    pub quadrature: QuadratureOrders,
    pub ell_max: f64,
    /// Inclusive range of cluster indices.
    pub i_range: (u32, u32),
    pub alphas: Vec<f64>,
    /// Regime threshold; `None` means `max{1/2, (k−1)/(d−1)}`.
    pub epsilon: Option<f64>,
    pub seeds: Vec<u64>,
    pub mc: McOptions,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            d: 2,
            k: 1,
            quadrature: QuadratureOrders::default(),
            ell_max: 80.0,
            i_range: (16, 128),
            alphas: vec![0.0],
            epsilon: None,
            seeds: vec![0],
            mc: McOptions::default(),
            output_dir: PathBuf::from("."),
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(1 <= self.k && self.k < self.d && self.d <= 6) {
            return bad(format!("need 1 <= k < d <= 6, got d = {}, k = {}", self.d, self.k));
        }
        if !(self.ell_max > 0.0 && self.ell_max <= 400.0) {
            return bad(format!("ell_max must lie in (0, 400], got {}", self.ell_max));
        }
        if !(1 <= self.i_range.0 && self.i_range.0 <= self.i_range.1) {
            return bad(format!("invalid i_range {:?}", self.i_range));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a >= 0.0)) {
            return bad(format!("alpha values must be nonnegative, got {a}"));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return bad(format!("epsilon must lie in (0, 1), got {e}"));
            }
        }
        if self.quadrature.scale == 0 {
            return bad("quadrature scale must be positive".into());
        }
        let mc = &self.mc;
        if !(mc.target_rel_err > 0.0 && mc.batch > 0 && mc.max_samples > 0 && mc.eps > 0.0) {
            return bad("Monte-Carlo tolerances must be positive".into());
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or_else(|| default_epsilon(self.d, self.k))
    }

    /// Canonical serialization used for hashing; fields keep declaration
    /// order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
