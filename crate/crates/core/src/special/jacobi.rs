use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Degree and parameters of a Jacobi polynomial `P_j^{(α,β)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobiIndex {
    pub j: u32,
    pub alpha: f64,
    pub beta: f64,
}

impl JacobiIndex {
    pub fn new(j: u32, alpha: f64, beta: f64) -> Result<Self> {
        let idx = JacobiIndex { j, alpha, beta };
        idx.validate()?;
        Ok(idx)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > -1.0) || !self.alpha.is_finite() {
            return domain(format!("alpha must be > -1, got {}", self.alpha));
        }
        if !(self.beta > -1.0) || !self.beta.is_finite() {
            return domain(format!("beta must be > -1, got {}", self.beta));
        }
        Ok(())
    }
}

pub(crate) fn check_unit_interval(x: f64) -> Result<()> {
    if !(x.abs() <= 1.0) {
        return domain(format!("argument must satisfy |x| <= 1, got {x}"));
    }
    Ok(())
}

/// `P_j^{(α,β)}(x)` by the three-term recurrence in the degree.
pub fn jacobi_eval(idx: JacobiIndex, x: f64) -> Result<f64> {
    idx.validate()?;
    check_unit_interval(x)?;
    Ok(recurrence(idx.j, idx.alpha, idx.beta, x))
}

/// `(P_j^{(α,β)}(x), d/dx P_j^{(α,β)}(x))`.
pub fn jacobi_eval_with_derivative(idx: JacobiIndex, x: f64) -> Result<(f64, f64)> {
    idx.validate()?;
    check_unit_interval(x)?;
    Ok(value_and_derivative(idx.j, idx.alpha, idx.beta, x))
}

pub(crate) fn value_and_derivative(j: u32, a: f64, b: f64, x: f64) -> (f64, f64) {
    let p = recurrence(j, a, b, x);
    let dp = if j == 0 {
        0.0
    } else {
        0.5 * (j as f64 + a + b + 1.0) * recurrence(j - 1, a + 1.0, b + 1.0, x)
    };
    (p, dp)
}

/// Unchecked recurrence; also used for arguments slightly outside [−1, 1]
/// by Newton iterations in the quadrature module.
pub(crate) fn recurrence(j: u32, a: f64, b: f64, x: f64) -> f64 {
    if j == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = 0.5 * ((a + b + 2.0) * x + (a - b));
    let ab2 = a * a - b * b;
    for n in 2..=j {
        let n = n as f64;
        let c = 2.0 * n + a + b;
        let a1 = 2.0 * n * (n + a + b) * (c - 2.0);
        let a2 = (c - 1.0) * ab2;
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * c;
        let p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `P_n^{(α,β)}(x)` for all `n ≤ j`.
pub(crate) fn recurrence_all(j: u32, a: f64, b: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(j as usize + 1);
    out.push(1.0);
    if j == 0 {
        return out;
    }
    out.push(0.5 * ((a + b + 2.0) * x + (a - b)));
    let ab2 = a * a - b * b;
    for n in 2..=j {
        let nf = n as f64;
        let c = 2.0 * nf + a + b;
        let a1 = 2.0 * nf * (nf + a + b) * (c - 2.0);
        let a2 = (c - 1.0) * ab2;
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (nf + a - 1.0) * (nf + b - 1.0) * c;
        let n = n as usize;
        let p = ((a2 + a3 * x) * out[n - 1] - a4 * out[n - 2]) / a1;
        out.push(p);
    }
    out
}
