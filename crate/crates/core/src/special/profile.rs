//! The normalized profiles
//!
//! `X^d_{ℓ,m}(ψ) = c_{ℓm} (cos ψ)^{m−(d−2)/2} P_{ℓ−m−1/2}^{(m,m)}(sin ψ)` and
//! `X̃^d_{ℓ,m}(x) = c_{ℓm} (1−x²)^{m/2−(d−2)/4} P_{ℓ−m−1/2}^{(m,m)}(x)`,
//!
//! so that `X̃(sin ψ) = X(ψ)`. Since `m ∈ ℕ_{d−1}`, the exponent
//! `m − (d−2)/2` is a nonnegative integer and both are bounded on the closed
//! interval.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::jacobi::{check_unit_interval, recurrence};
use crate::error::{domain, Result};
use crate::numeric::{ln_gamma, one_minus_sq};
use crate::spectrum::HalfInt;

/// Index `(ℓ, m) ∈ I_d` of a profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProfileIndex {
    pub d: u32,
    pub ell: HalfInt,
    pub m: HalfInt,
}

impl ProfileIndex {
    pub fn new(d: u32, ell: HalfInt, m: HalfInt) -> Result<Self> {
        if d < 2 {
            return domain(format!("profiles need d >= 2, got {d}"));
        }
        if !ell.in_lattice(d) {
            return domain(format!("ell = {ell} is not in N_{d}"));
        }
        if !m.in_lattice(d - 1) {
            return domain(format!("m = {m} is not in N_{}", d - 1));
        }
        if ell < m {
            return domain(format!("need ell >= m, got ell = {ell}, m = {m}"));
        }
        Ok(ProfileIndex { d, ell, m })
    }

    pub fn from_twice(d: u32, ell_twice: u32, m_twice: u32) -> Result<Self> {
        Self::new(d, HalfInt::from_twice(ell_twice), HalfInt::from_twice(m_twice))
    }

    /// Jacobi degree `ℓ − m − 1/2`.
    pub fn degree(&self) -> u32 {
        (self.ell.twice - self.m.twice - 1) / 2
    }

    /// Exponent of `cos ψ`, `m − (d−2)/2`.
    pub fn cos_exponent(&self) -> u32 {
        (self.m.twice + 2 - self.d) / 2
    }

    /// Transition value `b_{ℓ,m} = m/ℓ`.
    pub fn b(&self) -> f64 {
        self.m.value() / self.ell.value()
    }

    /// Transition value `a_{ℓ,m} = sqrt(1 − b²)`.
    pub fn a(&self) -> f64 {
        let (l, m) = (self.ell.value(), self.m.value());
        ((l - m) * (l + m)).sqrt() / l
    }
}

/// `ln c_{ℓm}`.
pub fn ln_norm_constant(p: ProfileIndex) -> f64 {
    let l = p.ell.value();
    let m = p.m.value();
    0.5 * (l.ln() + ln_gamma(l - m + 0.5) + ln_gamma(l + m + 0.5))
        - m * std::f64::consts::LN_2
        - ln_gamma(l + 0.5)
}

/// `c_{ℓm} = sqrt(ℓ Γ(ℓ−m+½) Γ(ℓ+m+½)) / (2^m Γ(ℓ+½))`.
pub fn norm_constant(p: ProfileIndex) -> f64 {
    ln_norm_constant(p).exp()
}

/// `c · base^e · P` assembled in the log domain so that neither a tiny
/// prefactor nor a huge polynomial value overflows on its own.
fn assemble(ln_c: f64, base: f64, e: u32, poly: f64) -> f64 {
    if poly == 0.0 {
        return 0.0;
    }
    if e > 0 && base == 0.0 {
        return 0.0;
    }
    let ln_pref = if e == 0 { 0.0 } else { e as f64 * base.ln() };
    poly.signum() * (ln_c + ln_pref + poly.abs().ln()).exp()
}

/// `X^d_{ℓ,m}(ψ)` for `|ψ| ≤ π/2`.
pub fn profile_eval(p: ProfileIndex, psi: f64) -> Result<f64> {
    if !(psi.abs() <= FRAC_PI_2) {
        return domain(format!("psi must lie in [-pi/2, pi/2], got {psi}"));
    }
    let m = p.m.value();
    let poly = recurrence(p.degree(), m, m, psi.sin());
    let cos = psi.cos().max(0.0);
    Ok(assemble(ln_norm_constant(p), cos, p.cos_exponent(), poly))
}

/// `X̃^d_{ℓ,m}(x)` for `|x| ≤ 1`.
pub fn xtilde_eval(p: ProfileIndex, x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    let m = p.m.value();
    let poly = recurrence(p.degree(), m, m, x);
    let y = one_minus_sq(x).sqrt();
    Ok(assemble(ln_norm_constant(p), y, p.cos_exponent(), poly))
}

fn alpha_coeff(ell: f64, m: f64) -> f64 {
    let num = (ell - m + 0.5) * (ell + m + 0.5);
    if num <= 0.0 || ell <= 0.0 {
        return 0.0;
    }
    (num / (4.0 * ell * (ell + 1.0))).sqrt()
}

/// `α_{ℓ,m} = sqrt((ℓ−m+½)(ℓ+m+½) / (4ℓ(ℓ+1)))`, the coefficient of
/// `X̃_{ℓ+1,m}` in `x X̃_{ℓ,m} = α_{ℓ,m} X̃_{ℓ+1,m} + α_{ℓ−1,m} X̃_{ℓ−1,m}`.
pub fn recurrence_coeff(p: ProfileIndex) -> f64 {
    alpha_coeff(p.ell.value(), p.m.value())
}

/// `α_{ℓ−1,m}`, zero when `(ℓ−1, m) ∉ I_d`.
pub fn lower_recurrence_coeff(p: ProfileIndex) -> f64 {
    if p.ell.twice < p.m.twice + 3 {
        return 0.0;
    }
    alpha_coeff(p.ell.value() - 1.0, p.m.value())
}

/// Values `X̃^d_{ℓ,m}(x)` for fixed `(d, m, x)` and `ℓ = m+½, m+3/2, …`,
/// generated by the three-term recurrence in `ℓ`.
///
/// The iterates carry a separate logarithmic scale so the ladder neither
/// underflows at large `m` near `|x| = 1` nor overflows deep in `ℓ`.
#[derive(Clone, Debug)]
pub struct XtildeLadder {
    m: f64,
    x: f64,
    ell: f64,
    prev: f64,
    cur: f64,
    ln_scale: f64,
}

const RESCALE_HI: f64 = 1e150;
const RESCALE_LO: f64 = 1e-150;

impl XtildeLadder {
    /// Ladder at `x`, with `y = sqrt(1−x²)` supplied by the caller when it is
    /// known more accurately (for example `cos ψ` when `x = sin ψ`).
    pub fn with_y(d: u32, m: HalfInt, x: f64, y: f64) -> Result<Self> {
        if !m.in_lattice(d - 1) {
            return domain(format!("m = {m} is not in N_{}", d - 1));
        }
        let start = ProfileIndex::new(d, HalfInt::from_twice(m.twice + 1), m)?;
        let e = start.cos_exponent();
        let ln_c = ln_norm_constant(start);
        let (cur, ln_scale) = if e > 0 && y <= 0.0 {
            (0.0, 0.0)
        } else if e == 0 {
            (1.0, ln_c)
        } else {
            (1.0, ln_c + e as f64 * y.ln())
        };
        Ok(XtildeLadder {
            m: m.value(),
            x,
            ell: start.ell.value(),
            prev: 0.0,
            cur,
            ln_scale,
        })
    }

    pub fn new(d: u32, m: HalfInt, x: f64) -> Result<Self> {
        check_unit_interval(x)?;
        Self::with_y(d, m, x, one_minus_sq(x).sqrt())
    }

    /// Ladder at `x = sin ψ`, `y = cos ψ`, i.e. values of `X^d_{ℓ,m}(ψ)`.
    pub fn for_angle(d: u32, m: HalfInt, psi: f64) -> Result<Self> {
        if !(psi.abs() <= FRAC_PI_2) {
            return domain(format!("psi must lie in [-pi/2, pi/2], got {psi}"));
        }
        Self::with_y(d, m, psi.sin(), psi.cos().max(0.0))
    }

    /// Current `ℓ`.
    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// `X̃_{ℓ,m}(x)` at the current `ℓ`.
    pub fn value(&self) -> f64 {
        if self.cur == 0.0 {
            0.0
        } else {
            self.cur * self.ln_scale.exp()
        }
    }

    /// Advances `ℓ → ℓ + 1`.
    pub fn step(&mut self) {
        let a_up = alpha_coeff(self.ell, self.m);
        let a_down = if self.ell - 1.0 >= self.m {
            alpha_coeff(self.ell - 1.0, self.m)
        } else {
            0.0
        };
        let next = (self.x * self.cur - a_down * self.prev) / a_up;
        self.prev = self.cur;
        self.cur = next;
        self.ell += 1.0;
        let mag = self.cur.abs().max(self.prev.abs());
        if mag > RESCALE_HI || (mag < RESCALE_LO && mag > 0.0) {
            let s = mag.ln();
            self.prev /= mag;
            self.cur /= mag;
            self.ln_scale += s;
        }
    }

    /// Values for `ℓ = m+½, …` up to and including `ell_max` (empty if
    /// `ell_max < m+½`).
    pub fn collect_to(mut self, ell_max: HalfInt) -> Vec<f64> {
        let mut out = Vec::new();
        let top = ell_max.value();
        while self.ell <= top + 1e-9 {
            out.push(self.value());
            self.step();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    fn pi(d: u32, lt: u32, mt: u32) -> ProfileIndex {
        ProfileIndex::from_twice(d, lt, mt).unwrap()
    }

    #[test]
    fn index_validation() {
        assert!(ProfileIndex::from_twice(2, 1, 0).is_ok());
        assert!(ProfileIndex::from_twice(2, 2, 0).is_err());
        assert!(ProfileIndex::from_twice(2, 1, 1).is_err());
        assert!(ProfileIndex::from_twice(3, 2, 3).is_err());
        assert!(ProfileIndex::from_twice(1, 0, 0).is_err());
    }

    #[test]
    fn examples() {
        let p = pi(2, 1, 0);
        assert!((norm_constant(p) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((profile_eval(p, 0.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((xtilde_eval(p, 0.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let q = pi(2, 3, 0);
        assert!((recurrence_coeff(q) - (4.0f64 / 15.0).sqrt()).abs() < 1e-15);
        assert_eq!(lower_recurrence_coeff(pi(3, 6, 5)), 0.0);
    }

    #[test]
    fn log_domain_constant_matches_direct_gamma() {
        let p = pi(3, 10, 5);
        let (l, m) = (5.0f64, 2.5f64);
        let direct = (l * libm::tgamma(l - m + 0.5) * libm::tgamma(l + m + 0.5)).sqrt()
            / (2f64.powf(m) * libm::tgamma(l + 0.5));
        let got = norm_constant(p);
        assert!(got > 0.0);
        assert!((got - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn constant_is_finite_for_large_indices() {
        // In the middle of the range c_{ℓm} is far below the smallest double
        // (about e^{−2153} at ℓ ≈ 10⁴, m = ℓ/2); its logarithm stays finite.
        for lt in (1..=20001u32).step_by(500) {
            for mt in (0..lt).step_by(250) {
                assert!(ln_norm_constant(pi(2, lt, mt)).is_finite());
            }
        }
        for lt in (1..=801u32).step_by(2) {
            for mt in (0..lt).step_by(2) {
                let c = norm_constant(pi(2, lt, mt));
                assert!(c.is_finite() && c > 0.0, "{lt} {mt}");
            }
        }
    }

    #[test]
    fn normalization_by_quadrature() {
        let (nodes, weights) = gauss_legendre(200);
        for d in 2..=5u32 {
            for lt in ((d - 1)..60).step_by(2) {
                for mt in ((d - 2)..lt).step_by(2) {
                    let p = pi(d, lt, mt);
                    let mut s = 0.0;
                    for (t, w) in nodes.iter().zip(&weights) {
                        let psi = t * FRAC_PI_2;
                        let v = profile_eval(p, psi).unwrap();
                        s += w * FRAC_PI_2 * v * v * psi.cos().powi(d as i32 - 1);
                    }
                    assert!((s - 1.0).abs() < 1e-10, "d={d} {lt} {mt}: {s}");
                }
            }
        }
    }

    #[test]
    fn ladder_matches_direct_evaluation() {
        for d in 2..=5u32 {
            for mt in ((d - 2)..40).step_by(2) {
                let m = HalfInt::from_twice(mt);
                for &x in &[-0.999, -0.6, 0.0, 0.31, 0.9, 1.0] {
                    let vals = XtildeLadder::new(d, m, x)
                        .unwrap()
                        .collect_to(HalfInt::from_twice(mt + 81));
                    assert_eq!(vals.len(), 41);
                    for (n, v) in vals.iter().enumerate() {
                        let p = pi(d, mt + 1 + 2 * n as u32, mt);
                        let direct = xtilde_eval(p, x).unwrap();
                        let scale = direct.abs().max(1e-300).max(1e-12 * v.abs());
                        assert!(
                            (v - direct).abs() <= 1e-9 * scale.max(1.0),
                            "d={d} m={m} x={x} n={n}: {v} vs {direct}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn boundary_values_are_finite() {
        for d in 2..=6u32 {
            for lt in ((d - 1)..41).step_by(2) {
                for mt in ((d - 2)..lt).step_by(2) {
                    let p = pi(d, lt, mt);
                    for &x in &[-1.0, 1.0] {
                        let v = xtilde_eval(p, x).unwrap();
                        assert!(v.is_finite());
                        if p.cos_exponent() > 0 {
                            assert_eq!(v, 0.0);
                        }
                    }
                }
            }
        }
    }
}
