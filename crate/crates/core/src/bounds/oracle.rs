//! Brute-force cluster sums for cross-checking [`super::ClusterSum`].
//!
//! Nothing here touches the ladders, the chain enumerator or the log-gamma
//! normalization: chains come from plain nested loops, the normalization
//! constant from exact half-integer Gamma values, and the polynomials from
//! the exact [`jacobi_oracle`].

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::Result;
use crate::special::{jacobi_oracle, JacobiIndex};
use crate::spectrum::Regime;

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `Γ(twice/2)` as `q · √π^p` with `q` rational and `p ∈ {0, 1}`.
fn gamma_half(twice: u32) -> (BigRational, u32) {
    assert!(twice > 0);
    if twice % 2 == 0 {
        (BigRational::from_integer(factorial(twice / 2 - 1)), 0)
    } else {
        // Γ(n + ½) = (2n)! / (4ⁿ n!) √π.
        let n = (twice - 1) / 2;
        let num = factorial(2 * n);
        let den = BigInt::from(4u32).pow(n) * factorial(n);
        (BigRational::new(num, den), 1)
    }
}

/// `c_{ℓ,m}` from exact Gamma values; arguments are twice-values.
fn norm_constant_exact(ell_twice: u32, m_twice: u32) -> f64 {
    let (ga, pa) = gamma_half(ell_twice - m_twice + 1);
    let (gb, pb) = gamma_half(ell_twice + m_twice + 1);
    let (gl, pl) = gamma_half(ell_twice + 1);
    let ell = BigRational::new(BigInt::from(ell_twice), BigInt::from(2));
    let four_m = BigRational::from_integer(BigInt::from(2u32).pow(m_twice));
    let q = ell * ga * gb / (four_m * gl.clone() * gl);
    let sqrt_pi_power = pa as i32 + pb as i32 - 2 * pl as i32;
    q.to_f64().expect("finite").sqrt() * std::f64::consts::PI.powf(sqrt_pi_power as f64 / 4.0)
}

fn dim_sphere(k: u32, n: u32) -> f64 {
    let binom = |a: u32, b: u32| -> f64 {
        (1..=b).fold(1.0f64, |acc, i| acc * (a - b + i) as f64 / i as f64)
    };
    let low = if n >= 2 { binom(n + k - 2, n - 2) } else { 0.0 };
    binom(n + k, n) - low
}

/// Memoized brute-force cluster sums at one point `x = (x_{k+1}, …, x_d)`.
pub struct ClusterOracle {
    d: u32,
    k: u32,
    x: Vec<f64>,
    cache: HashMap<(u32, u32, u32), f64>,
}

impl ClusterOracle {
    pub fn new(d: u32, k: u32, x: &[f64]) -> Self {
        assert_eq!(x.len(), (d - k) as usize);
        ClusterOracle {
            d,
            k,
            x: x.to_vec(),
            cache: HashMap::new(),
        }
    }

    /// `X̃^r_{ℓ,m}(x_r)` with twice-valued indices.
    fn xtilde(&mut self, r: u32, ell_twice: u32, m_twice: u32) -> Result<f64> {
        if let Some(v) = self.cache.get(&(r, ell_twice, m_twice)) {
            return Ok(*v);
        }
        let x = self.x[(r - self.k - 1) as usize];
        let j = (ell_twice - m_twice - 1) / 2;
        let m = m_twice as f64 / 2.0;
        let p = jacobi_oracle(JacobiIndex::new(j, m, m)?, x)?;
        let e = (m_twice + 2 - r) / 2;
        let y2 = (1.0 - x) * (1.0 + x);
        let v = norm_constant_exact(ell_twice, m_twice) * y2.sqrt().powi(e as i32) * p;
        self.cache.insert((r, ell_twice, m_twice), v);
        Ok(v)
    }

    /// `Σ α_{ℓ_k}(S^k) 𝒳(x) (√λ/ℓ_d)^{2α}` over chains with
    /// `λ ∈ [i², (i+1)²)` in the given regime.
    pub fn sum(&mut self, i: u32, alpha: f64, regime: Regime, epsilon: f64) -> Result<f64> {
        let (d, k) = (self.d, self.k);
        let lo = (i * i) as f64;
        let hi = ((i + 1) * (i + 1)) as f64;
        let shift = ((d - 1) * (d - 1)) as f64 / 4.0 - ((k - 1) * (k - 1)) as f64 / 4.0;
        // λ ≥ (d−k)(ℓ_d − (d−k)/4) − shift, so ℓ_d stays below this bound.
        let ell_top = ((hi + shift) / (d - k) as f64 + (d - k) as f64 + 2.0).ceil() as u32;
        let mut chains: Vec<Vec<u32>> = vec![];
        let mut stack: Vec<Vec<u32>> = (0..=ell_top)
            .map(|n| vec![2 * n + d - 1])
            .collect();
        while let Some(prefix) = stack.pop() {
            let level = d + 1 - prefix.len() as u32;
            if level == k {
                chains.push(prefix);
                continue;
            }
            let upper = *prefix.last().unwrap();
            let base = level - 2;
            let mut t = base;
            while t <= upper {
                let mut next = prefix.clone();
                next.push(t);
                stack.push(next);
                t += 2;
            }
        }
        let mut terms = Vec::new();
        for c in chains {
            let l = c[0] as f64 / 2.0;
            let m = *c.last().unwrap() as f64 / 2.0;
            let lam = l * l - m * m - shift;
            if !(lam >= lo && lam < hi) {
                continue;
            }
            let tie = (m - epsilon * l).abs() <= 1e-12 * l.max(1.0);
            let admitted = match regime {
                Regime::All => true,
                Regime::Elliptic => tie || m < epsilon * l,
                Regime::Subelliptic => tie || m > epsilon * l,
            };
            if !admitted {
                continue;
            }
            let mut v = dim_sphere(k, (c[c.len() - 1] + 1 - k) / 2);
            for (pos, r) in (k + 1..=d).rev().enumerate() {
                let f = self.xtilde(r, c[pos], c[pos + 1])?;
                v *= f * f;
            }
            if alpha > 0.0 {
                v *= (lam / (l * l)).powf(alpha);
            }
            terms.push(v);
        }
        // Sorted ascending so the plain sum loses as little as possible.
        terms.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(terms.iter().sum())
    }
}
