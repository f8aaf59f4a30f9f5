//! Calibrated pointwise envelopes for `X̃^d_{ℓ,m}`.
//!
//! The envelope has the shape
//!
//! * `ℓ^{(d−1)/2} exp(−c m)` where `y ≤ b_{ℓ,m}/(2e)`,
//! * `y^{−(d−2)/2} ((1+m)/ℓ² + |y² − b_{ℓ,m}²|)^{−1/4}` elsewhere,
//!
//! with `y = sqrt(1−x²)`, times a prefactor. The prefactor and `c` are not
//! known in closed form; they are fitted once per dimension by [`calibrate`]
//! and shipped as JSON.

use std::collections::BTreeMap;
use std::f64::consts::E;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::profile::{ProfileIndex, XtildeLadder};
use crate::error::{Error, Result};
use crate::numeric::{ls_slope, one_minus_sq};
use crate::spectrum::HalfInt;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub prefactor: f64,
    pub c_exp: f64,
}

/// Envelope constants keyed by the sphere dimension `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnvelopeCalibration {
    pub by_dim: BTreeMap<u32, EnvelopeParams>,
}

const EMBEDDED: &str = include_str!("envelope_calibration.json");

impl EnvelopeCalibration {
    /// The calibration shipped with the library.
    pub fn embedded() -> Self {
        serde_json::from_str(EMBEDDED).expect("embedded calibration is valid JSON")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn params(&self, d: u32) -> Result<EnvelopeParams> {
        self.by_dim
            .get(&d)
            .copied()
            .ok_or_else(|| Error::Config(format!("no envelope calibration for d = {d}")))
    }
}

/// Which branch of the envelope applies at `x`.
pub fn exponential_branch(p: ProfileIndex, x: f64) -> bool {
    one_minus_sq(x).sqrt() <= p.b() / (2.0 * E)
}

/// Envelope shape without the prefactor.
pub fn envelope_shape(p: ProfileIndex, x: f64, c_exp: f64) -> f64 {
    let y = one_minus_sq(x).sqrt();
    let ell = p.ell.value();
    let m = p.m.value();
    let b = p.b();
    let d = p.d as f64;
    if y <= b / (2.0 * E) {
        ell.powf((d - 1.0) / 2.0) * (-c_exp * m).exp()
    } else {
        let gap = (1.0 + m) / (ell * ell) + (y * y - b * b).abs();
        y.powf(-(d - 2.0) / 2.0) * gap.powf(-0.25)
    }
}

/// Calibrated upper bound for `|X̃^d_{ℓ,m}(x)|`.
pub fn envelope_bound(p: ProfileIndex, x: f64, calibration: &EnvelopeCalibration) -> Result<f64> {
    super::jacobi::check_unit_interval(x)?;
    let params = calibration.params(p.d)?;
    Ok(params.prefactor * envelope_shape(p, x, params.c_exp))
}

/// Sample points `x = cos θ` with `θ` uniform, which resolves the
/// oscillations near `±1` as well as in the bulk.
pub fn calibration_points(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Fits envelope constants for dimension `d` over all `(ℓ, m) ∈ I_d` with
/// `ℓ ≤ ell_max`, on `n_points` sample points.
///
/// `c` is the least-squares decay rate of `max |X̃| / ℓ^{(d−1)/2}` in `m`
/// over the exponential branch, clamped to `[0.01, ln 2]`; the prefactor is
/// `1.05` times the largest ratio `|X̃| / shape` observed.
pub fn calibrate(d: u32, ell_max: HalfInt, n_points: usize) -> Result<EnvelopeParams> {
    let xs = calibration_points(n_points);
    let ell_top = ell_max.value();
    let ms: Vec<HalfInt> = (0..)
        .map(|n| HalfInt::of_degree(d - 1, n))
        .take_while(|m| m.value() + 0.5 <= ell_top + 1e-9)
        .collect();

    // Per m: largest |X̃|/ℓ^{(d−1)/2} on the exponential branch, and the raw
    // table of values for the second pass.
    let mut exp_max: Vec<(f64, f64)> = Vec::new();
    let mut tables: Vec<Vec<Vec<f64>>> = Vec::with_capacity(ms.len());
    for &m in &ms {
        let mut table = Vec::with_capacity(xs.len());
        let mut best = 0.0f64;
        for &x in &xs {
            let vals = XtildeLadder::new(d, m, x)?.collect_to(ell_max);
            for (n, v) in vals.iter().enumerate() {
                let p = ProfileIndex::from_twice(d, m.twice + 1 + 2 * n as u32, m.twice)?;
                if m.twice > 0 && exponential_branch(p, x) {
                    best = best.max(v.abs() / p.ell.value().powf((d as f64 - 1.0) / 2.0));
                }
            }
            table.push(vals);
        }
        if best > 0.0 {
            exp_max.push((m.value(), best.ln()));
        }
        tables.push(table);
    }
    let c_exp = if exp_max.len() >= 2 {
        let (xs_m, ys): (Vec<f64>, Vec<f64>) = exp_max.iter().cloned().unzip();
        (-ls_slope(&xs_m, &ys)).clamp(0.01, std::f64::consts::LN_2)
    } else {
        std::f64::consts::LN_2
    };

    let mut worst = 0.0f64;
    for (mi, &m) in ms.iter().enumerate() {
        for (xi, &x) in xs.iter().enumerate() {
            for (n, v) in tables[mi][xi].iter().enumerate() {
                let p = ProfileIndex::from_twice(d, m.twice + 1 + 2 * n as u32, m.twice)?;
                let shape = envelope_shape(p, x, c_exp);
                if shape.is_finite() && shape > 0.0 {
                    worst = worst.max(v.abs() / shape);
                }
            }
        }
    }
    Ok(EnvelopeParams {
        prefactor: 1.05 * worst,
        c_exp,
    })
}
