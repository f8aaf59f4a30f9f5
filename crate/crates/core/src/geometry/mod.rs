//! Cylindrical coordinates on `S^d` adapted to `S^k ⊂ S^d`.
//!
//! A point is written `(ω, ψ)` with `ω ∈ S^k` and `ψ = (ψ_{k+1}, …, ψ_d)`,
//! built by iterating `v ↦ (cos ψ_r · v, sin ψ_r)` for `r = k+1, …, d`.

pub mod sampling;

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub use sampling::{ball_volume, weighted_decay_integral, McEstimate, McOptions};

/// Default threshold between the near and far branches of [`distance_surrogate`].
pub const DEFAULT_BRANCH_EPS: f64 = std::f64::consts::FRAC_PI_4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylPoint {
    /// Unit vector in `R^{k+1}`.
    pub omega: Vec<f64>,
    /// `(ψ_{k+1}, …, ψ_d)`, each in `(−π/2, π/2)`.
    pub psi: Vec<f64>,
}

impl CylPoint {
    pub fn new(omega: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        if omega.len() < 2 {
            return domain("omega must lie on S^k with k >= 1");
        }
        if psi.is_empty() {
            return domain("need at least one psi coordinate (k < d)");
        }
        let norm = omega.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return domain(format!("omega must be a unit vector, |omega| = {norm}"));
        }
        if let Some(bad) = psi.iter().find(|p| !(p.abs() < FRAC_PI_2)) {
            return domain(format!("psi coordinates must lie in (-pi/2, pi/2), got {bad}"));
        }
        Ok(CylPoint { omega, psi })
    }

    /// Point with `ω = e_0` and the given `ψ`.
    pub fn on_meridian(k: u32, psi: Vec<f64>) -> Result<Self> {
        let mut omega = vec![0.0; k as usize + 1];
        omega[0] = 1.0;
        Self::new(omega, psi)
    }

    pub fn k(&self) -> u32 {
        self.omega.len() as u32 - 1
    }

    pub fn d(&self) -> u32 {
        self.k() + self.psi.len() as u32
    }

    /// `ψ_r` for `k < r ≤ d`.
    pub fn psi_at(&self, r: u32) -> f64 {
        self.psi[(r - self.k() - 1) as usize]
    }

    /// Euclidean norm `|ψ|`.
    pub fn psi_norm(&self) -> f64 {
        self.psi.iter().map(|p| p * p).sum::<f64>().sqrt()
    }
}

/// The ambient unit vector in `R^{d+1}`.
pub fn cyl_to_ambient(p: &CylPoint) -> Vec<f64> {
    let mut v = p.omega.clone();
    for &psi in &p.psi {
        let (s, c) = psi.sin_cos();
        for x in v.iter_mut() {
            *x *= c;
        }
        v.push(s);
    }
    v
}

/// Inverse of [`cyl_to_ambient`] for a unit vector off the singular set
/// `{|ψ_r| = π/2}`.
pub fn ambient_to_cyl(z: &[f64], k: u32) -> Result<CylPoint> {
    let k = k as usize;
    if z.len() < k + 2 {
        return domain("ambient dimension must exceed k + 1");
    }
    let mut psi = vec![0.0; z.len() - k - 1];
    let mut head_sq: f64 = z[..=k].iter().map(|v| v * v).sum();
    for r in (k + 1)..z.len() {
        psi[r - k - 1] = z[r].atan2(head_sq.sqrt());
        head_sq += z[r] * z[r];
    }
    let head = z[..=k].iter().map(|v| v * v).sum::<f64>().sqrt();
    if head == 0.0 {
        return domain("point lies on the singular set of the chart");
    }
    let omega = z[..=k].iter().map(|v| v / head).collect();
    Ok(CylPoint { omega, psi })
}

/// `Π_{r=k+1}^{d} cos^{r−1} ψ_r`, the density of `dσ` against `dω dψ`.
pub fn measure_density(p: &CylPoint) -> f64 {
    let k = p.k();
    p.psi
        .iter()
        .enumerate()
        .map(|(i, psi)| psi.cos().powi((k + i as u32) as i32))
        .product()
}

/// `V(ψ) = Π (1 + tan² ψ_j) − 1`.
pub fn potential(psi: &[f64]) -> Result<f64> {
    if let Some(bad) = psi.iter().find(|p| !(p.abs() < FRAC_PI_2)) {
        return domain(format!("potential is singular at |psi| = pi/2, got {bad}"));
    }
    // Π sec² − 1 via expm1/ln1p keeps full relative accuracy near ψ = 0.
    let ln_prod: f64 = psi.iter().map(|p| p.tan().powi(2).ln_1p()).sum();
    Ok(ln_prod.exp_m1())
}

/// Angle between two unit vectors.
///
/// Uses the half-chord `2 asin(|u ∓ v|/2)`, which keeps full relative accuracy
/// near `0` and `π` where `acos` of the inner product does not.
pub fn angle(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let chord = |sign: f64| {
        u.iter().zip(v).map(|(a, b)| (a - sign * b).powi(2)).sum::<f64>().sqrt()
    };
    if dot >= 0.0 {
        2.0 * (chord(1.0) / 2.0).min(1.0).asin()
    } else {
        PI - 2.0 * (chord(-1.0) / 2.0).min(1.0).asin()
    }
}

/// Riemannian distance on `S^d`.
pub fn riemannian_distance(p: &CylPoint, q: &CylPoint) -> f64 {
    angle(&cyl_to_ambient(p), &cyl_to_ambient(q))
}

/// Explicit surrogate `Φ` for the sub-Riemannian distance of `L_{d,k}`.
///
/// When `max{|ψ|, |ψ′|} ≤ eps` this is
/// `|ψ − ψ′| + min{ρ^{1/2}, ρ / max{|ψ|, |ψ′|}}` with `ρ` the distance on
/// `S^k` and `ρ/0 = ∞`; otherwise it is the Riemannian distance on `S^d`.
pub fn distance_surrogate(p: &CylPoint, q: &CylPoint, eps: f64) -> f64 {
    let big = p.psi_norm().max(q.psi_norm());
    if big > eps {
        return riemannian_distance(p, q);
    }
    let dpsi = p
        .psi
        .iter()
        .zip(&q.psi)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let rho = angle(&p.omega, &q.omega);
    let tail = if rho == 0.0 {
        0.0
    } else if big == 0.0 {
        rho.sqrt()
    } else {
        rho.sqrt().min(rho / big)
    };
    dpsi + tail
}

/// `ϖ_r(p, q) = |ψ_p| / max{r, |ψ_q|}`.
pub fn weight(r: f64, p: &CylPoint, q: &CylPoint) -> f64 {
    p.psi_norm() / r.max(q.psi_norm())
}

/// `τ(p) = Σ_r |sin ψ_r|`.
pub fn tau(p: &CylPoint) -> f64 {
    p.psi.iter().map(|v| v.sin().abs()).sum()
}

/// Comparison profile `min{1, r^d max{r, |ψ|}^k}` for ball volumes.
pub fn volume_model(d: u32, k: u32, r: f64, psi_norm: f64) -> f64 {
    (r.powi(d as i32) * r.max(psi_norm).powi(k as i32)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::sphere_area;
    use crate::quadrature::psi_rule;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn random_point(rng: &mut ChaCha8Rng, d: u32, k: u32) -> CylPoint {
        let z: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let z: Vec<f64> = z.iter().map(|v| v / n).collect();
        ambient_to_cyl(&z, k).unwrap()
    }

    #[test]
    fn chart_examples() {
        let p = CylPoint::new(vec![0.6, 0.8], vec![0.0]).unwrap();
        assert_eq!(cyl_to_ambient(&p), vec![0.6, 0.8, 0.0]);
        let p = CylPoint::new(vec![1.0, 0.0], vec![FRAC_PI_4]).unwrap();
        let z = cyl_to_ambient(&p);
        let h = 0.5f64.sqrt();
        assert!((z[0] - h).abs() < 1e-15 && z[1] == 0.0 && (z[2] - h).abs() < 1e-15);
    }

    #[test]
    fn chart_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            let d = rng.random_range(2..=6u32);
            let k = rng.random_range(1..d);
            let p = random_point(&mut rng, d, k);
            let z = cyl_to_ambient(&p);
            let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            let q = ambient_to_cyl(&z, k).unwrap();
            for (a, b) in p.psi.iter().zip(&q.psi).chain(p.omega.iter().zip(&q.omega)) {
                worst = worst.max((a - b).abs());
            }
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn density_integrates_to_sphere_area() {
        for d in 2..=5u32 {
            for k in 1..d {
                let mut total = 1.0;
                for r in (k + 1)..=d {
                    total *= psi_rule(r, 32).unwrap().weights.iter().sum::<f64>();
                }
                let want = sphere_area(d) / sphere_area(k);
                assert!((total - want).abs() < 1e-8 * want, "d={d} k={k}");
            }
        }
        let p = CylPoint::on_meridian(1, vec![0.0]).unwrap();
        assert_eq!(measure_density(&p), 1.0);
        let a = CylPoint::on_meridian(1, vec![0.3, -0.7]).unwrap();
        let b = CylPoint::on_meridian(1, vec![-0.3, 0.7]).unwrap();
        assert_eq!(measure_density(&a), measure_density(&b));
    }

    #[test]
    fn potential_examples() {
        assert_eq!(potential(&[0.0, 0.0]).unwrap(), 0.0);
        assert!((potential(&[FRAC_PI_4]).unwrap() - 1.0).abs() < 1e-15);
        assert!(potential(&[FRAC_PI_2]).is_err());
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..2000 {
            let n = rng.random_range(1..=4);
            let dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let t = rng.random_range(1e-6..1.0);
            let psi: Vec<f64> = dir.iter().map(|v| v / len * t).collect();
            let ratio = potential(&psi).unwrap() / (t * t);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        assert!(lo >= 0.9 && hi <= 4.0, "{lo} {hi}");
    }

    #[test]
    fn surrogate_basics() {
        let p = CylPoint::new(vec![1.0, 0.0], vec![0.0]).unwrap();
        let q = CylPoint::new(vec![0.0, 1.0], vec![0.0]).unwrap();
        assert_eq!(distance_surrogate(&p, &p, FRAC_PI_4), 0.0);
        assert!((distance_surrogate(&p, &q, FRAC_PI_4) - (PI / 2.0).sqrt()).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let a = random_point(&mut rng, 3, 1);
            let b = random_point(&mut rng, 3, 1);
            assert_eq!(
                distance_surrogate(&a, &b, FRAC_PI_4),
                distance_surrogate(&b, &a, FRAC_PI_4)
            );
        }
    }

    #[test]
    fn surrogate_quasi_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut worst = 0.0f64;
        for _ in 0..20_000 {
            let shrink = rng.random_range(0.0..1.0f64).powi(3);
            let mut pts = Vec::new();
            for _ in 0..3 {
                let mut p = random_point(&mut rng, 2, 1);
                p.psi[0] *= shrink;
                pts.push(p);
            }
            let lhs = distance_surrogate(&pts[0], &pts[2], FRAC_PI_4);
            let rhs = distance_surrogate(&pts[0], &pts[1], FRAC_PI_4)
                + distance_surrogate(&pts[1], &pts[2], FRAC_PI_4);
            if rhs > 0.0 {
                worst = worst.max(lhs / rhs);
            }
        }
        assert!(worst < 4.0, "{worst}");
    }

    #[test]
    fn weight_and_tau_examples() {
        let p = CylPoint::on_meridian(1, vec![0.5]).unwrap();
        let q = CylPoint::on_meridian(1, vec![0.1]).unwrap();
        assert_eq!(weight(0.25, &p, &q), 2.0);
        let z = CylPoint::on_meridian(1, vec![0.0]).unwrap();
        assert_eq!(weight(0.25, &z, &q), 0.0);
        assert_eq!(tau(&z), 0.0);
        let t = CylPoint::on_meridian(1, vec![PI / 6.0, PI / 6.0]).unwrap();
        assert!((tau(&t) - 1.0).abs() < 1e-15);
    }
}
