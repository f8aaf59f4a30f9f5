//! Gauss rules on `[−1, 1]` and the product rules used for the spherical
//! measure in cylindrical coordinates.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{domain, Result};
use crate::numeric::{ln_gamma, one_minus_sq, sphere_area};
use crate::special::jacobi::{recurrence, value_and_derivative};

/// Nodes and weights of a one-dimensional rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        crate::numeric::compensated_sum(
            self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)),
        )
    }
}

/// Gauss–Legendre nodes and weights of order `n` on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

/// Gauss rule of order `n` for the weight `(1−x²)^a` on `[−1, 1]`, `a > −1`.
pub fn gauss_gegenbauer(n: usize, a: f64) -> Result<Rule> {
    if !(a > -1.0) {
        return domain(format!("Gegenbauer weight exponent must be > -1, got {a}"));
    }
    if n == 0 {
        return Ok(Rule {
            nodes: vec![],
            weights: vec![],
        });
    }
    let nf = n as f64;
    if a == 0.0 {
        let (nodes, weights) = gauss_legendre(n);
        return Ok(Rule { nodes, weights });
    }
    if a == -0.5 {
        let nodes = (0..n)
            .map(|i| (PI * (i as f64 + 0.5) / nf).cos())
            .collect();
        return Ok(Rule {
            nodes,
            weights: vec![PI / nf; n],
        });
    }
    if a == 0.5 {
        let (nodes, weights) = (1..=n)
            .map(|i| {
                let t = PI * i as f64 / (nf + 1.0);
                (t.cos(), PI / (nf + 1.0) * t.sin().powi(2))
            })
            .unzip();
        return Ok(Rule { nodes, weights });
    }

    // Golub–Welsch for the recurrence of the monic polynomials, then Newton
    // polish and analytic weights.
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let k = i as f64;
        let beta = k * (k + 2.0 * a) / (4.0 * (k + a + 0.5) * (k + a - 0.5));
        let off = beta.sqrt();
        jac[(i, i - 1)] = off;
        jac[(i - 1, i)] = off;
    }
    let eig = SymmetricEigen::new(jac);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    nodes.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = value_and_derivative(n as u32, a, a, *x);
            if dp == 0.0 {
                break;
            }
            *x -= p / dp;
        }
        // At a zero of P_n, (1−x²) P_n′ = (n+a) P_{n−1}.
        let q = recurrence(n as u32 - 1, a, a, *x);
        let s = one_minus_sq(*x);
        weights.push(s / ((nf + a) * (nf + a) * q * q));
    }
    // The weights are fixed up to the zeroth moment, which is known exactly;
    // this avoids the cancellation in the log-gamma form of the constant.
    let mu0 = ((2.0 * a + 1.0) * std::f64::consts::LN_2 + 2.0 * ln_gamma(a + 1.0)
        - ln_gamma(2.0 * a + 2.0))
    .exp();
    let total = crate::numeric::compensated_sum(weights.iter().cloned());
    for w in weights.iter_mut() {
        *w *= mu0 / total;
    }
    Ok(Rule { nodes, weights })
}

fn cache() -> &'static Mutex<HashMap<(usize, u64), Arc<Rule>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Memoized [`gauss_gegenbauer`].
pub fn gauss_gegenbauer_cached(n: usize, a: f64) -> Result<Arc<Rule>> {
    let key = (n, a.to_bits());
    if let Some(r) = cache().lock().unwrap().get(&key) {
        return Ok(r.clone());
    }
    let rule = Arc::new(gauss_gegenbauer(n, a)?);
    cache().lock().unwrap().insert(key, rule.clone());
    Ok(rule)
}

/// Rule on `(−π/2, π/2)` for `∫ f(ψ) cos^{r−1}ψ dψ`, the density factor
/// folded into the weights.
pub fn psi_rule(r: u32, n: usize) -> Result<Rule> {
    let base = gauss_gegenbauer_cached(n, 0.0)?;
    let (nodes, weights) = base
        .nodes
        .iter()
        .zip(&base.weights)
        .map(|(&t, &w)| {
            let psi = t * FRAC_PI_2;
            (psi, w * FRAC_PI_2 * psi.cos().powi(r as i32 - 1))
        })
        .unzip();
    Ok(Rule { nodes, weights })
}

/// Rule in `u = ⟨ω, ω′⟩` for `∫_{S^k} f(⟨ω, ω′⟩) dω`, i.e. the weight
/// `σ(S^{k−1}) (1−u²)^{(k−2)/2}` folded in.
pub fn zonal_rule(k: u32, n: usize) -> Result<Rule> {
    if k < 1 {
        return domain("zonal rules need k >= 1");
    }
    let a = (k as f64 - 2.0) / 2.0;
    let base = gauss_gegenbauer_cached(n, a)?;
    let s = sphere_area(k - 1);
    Ok(Rule {
        nodes: base.nodes.clone(),
        weights: base.weights.iter().map(|w| w * s).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moment(a: f64, p: u32) -> f64 {
        // ∫ x^p (1−x²)^a dx = B((p+1)/2, a+1) for even p.
        if p % 2 == 1 {
            return 0.0;
        }
        let h = (p as f64 + 1.0) / 2.0;
        (ln_gamma(h) + ln_gamma(a + 1.0) - ln_gamma(h + a + 1.0)).exp()
    }

    #[test]
    fn legendre_small_orders() {
        let (x, w) = gauss_legendre(2);
        let r = 1.0 / 3f64.sqrt();
        assert!((x[0] - r).abs() < 1e-15 && (x[1] + r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(3);
        assert_eq!(x[1], 0.0);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_exactness() {
        for &a in &[-0.5, 0.0, 0.5, 1.0, 1.5, 2.0] {
            for &n in &[5usize, 20, 64] {
                let rule = gauss_gegenbauer(n, a).unwrap();
                assert!(rule.weights.iter().all(|&w| w > 0.0));
                for p in 0..(2 * n as u32).min(40) {
                    let got = rule.integrate(|x| x.powi(p as i32));
                    let want = moment(a, p);
                    assert!((got - want).abs() < 1e-13 * want.max(1.0), "a={a} n={n} p={p}");
                }
            }
        }
    }

    #[test]
    fn high_order_rules() {
        for &a in &[0.0, 1.0, 1.5] {
            let rule = gauss_gegenbauer(600, a).unwrap();
            let total = rule.integrate(|_| 1.0);
            assert!((total - moment(a, 0)).abs() < 1e-12, "a={a} {total} {}", moment(a, 0));
            assert!(rule.nodes.windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn psi_rule_integrates_the_measure() {
        // ∫ cos^{r−1} ψ dψ = σ(S^r)/σ(S^{r−1}).
        for r in 1..=6 {
            let rule = psi_rule(r, 40).unwrap();
            let total: f64 = rule.weights.iter().sum();
            let want = sphere_area(r) / sphere_area(r - 1);
            assert!((total - want).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn zonal_rule_integrates_the_sphere() {
        for k in 1..=5 {
            let rule = zonal_rule(k, 30).unwrap();
            let total: f64 = rule.weights.iter().sum();
            assert!((total - sphere_area(k)).abs() < 1e-11, "k={k}");
        }
    }
}
