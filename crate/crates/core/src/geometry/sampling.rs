//! Monte-Carlo integrals over `S^d` concentrated near a centre.
//!
//! Balls of the distance surrogate are tiny and anisotropic for small radii,
//! so plain uniform sampling is useless. Samples are drawn from a defensive
//! mixture of
//!
//! * chart boxes around the centre (a box in `ψ` times a cap in `ω`),
//! * Riemannian caps around the centre,
//! * the uniform distribution on the whole sphere,
//!
//! and each draw is weighted by the inverse mixture density, which is known
//! in closed form because every component is uniform on a set of known area.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ambient_to_cyl, angle, cyl_to_ambient, distance_surrogate, weight, CylPoint};
use crate::error::{domain, Result};
use crate::numeric::sphere_area;
use crate::quadrature::gauss_gegenbauer_cached;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    /// Stop once the relative standard error drops below this.
    pub target_rel_err: f64,
    pub batch: usize,
    pub max_samples: usize,
    /// Branch threshold of the distance surrogate.
    pub eps: f64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            target_rel_err: 0.01,
            batch: 20_000,
            max_samples: 2_000_000,
            eps: super::DEFAULT_BRANCH_EPS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn rel_err(&self) -> f64 {
        if self.value == 0.0 {
            f64::INFINITY
        } else {
            self.stderr / self.value.abs()
        }
    }
}

/// `∫_0^θ sin^{n−1} t dt`.
fn sine_power_integral(n: u32, theta: f64) -> f64 {
    if n == 1 {
        return theta;
    }
    let rule = gauss_gegenbauer_cached(48, 0.0).expect("Legendre rule");
    let h = theta / 2.0;
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * h * (h * (x + 1.0)).sin().powi(n as i32 - 1))
        .sum()
}

/// Area of a geodesic cap of angular radius `theta` on `S^n`.
fn cap_area(n: u32, theta: f64) -> f64 {
    if theta >= PI {
        return sphere_area(n);
    }
    sphere_area(n - 1) * sine_power_integral(n, theta)
}

/// `∫_a^b cos^p ψ dψ`.
fn cos_power_integral(p: u32, a: f64, b: f64) -> f64 {
    if p == 0 {
        return b - a;
    }
    let rule = gauss_gegenbauer_cached(48, 0.0).expect("Legendre rule");
    let h = (b - a) / 2.0;
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * h * (a + h * (x + 1.0)).cos().powi(p as i32))
        .sum()
}

fn gaussian_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-12 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

/// Uniform point in the cap of angle `theta` about the unit vector `c` in
/// `R^{n+1}`.
fn sample_cap(rng: &mut ChaCha8Rng, c: &[f64], theta: f64) -> Vec<f64> {
    let n = c.len() as u32 - 1;
    let theta = theta.min(PI);
    let bound = if n == 1 {
        1.0
    } else {
        theta.min(FRAC_PI_2).sin().powi(n as i32 - 1)
    };
    let t = loop {
        let t = rng.random_range(0.0..theta);
        if n == 1 || rng.random::<f64>() * bound <= t.sin().powi(n as i32 - 1) {
            break t;
        }
    };
    // Direction orthogonal to c.
    let dir = loop {
        let mut v: Vec<f64> = (0..c.len()).map(|_| rng.sample(StandardNormal)).collect();
        let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
        for (x, ci) in v.iter_mut().zip(c) {
            *x -= dot * ci;
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-12 {
            break v.into_iter().map(|x| x / len).collect::<Vec<_>>();
        }
    };
    let (s, co) = t.sin_cos();
    c.iter().zip(&dir).map(|(a, b)| co * a + s * b).collect()
}

/// One component of the sampling mixture.
#[derive(Clone, Debug)]
enum Component {
    /// `|ψ_r − ψ′_r| ≤ h` for every r, and `ω` within angle `theta` of `ω′`.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
        theta: f64,
        area: f64,
    },
    /// Riemannian cap of radius `radius` about the centre.
    Cap { radius: f64, area: f64 },
    Uniform { area: f64 },
}

struct Mixture {
    center: CylPoint,
    center_ambient: Vec<f64>,
    components: Vec<(f64, Component)>,
}

impl Mixture {
    fn new(center: &CylPoint, parts: Vec<(f64, ComponentSpec)>) -> Self {
        let d = center.d();
        let k = center.k();
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        let components = parts
            .into_iter()
            .map(|(w, spec)| {
                let comp = match spec {
                    ComponentSpec::Box { h, theta } => {
                        let lo: Vec<f64> = center.psi.iter().map(|p| (p - h).max(-FRAC_PI_2)).collect();
                        let hi: Vec<f64> = center.psi.iter().map(|p| (p + h).min(FRAC_PI_2)).collect();
                        let mut area = cap_area(k, theta.min(PI));
                        for (i, (a, b)) in lo.iter().zip(&hi).enumerate() {
                            area *= cos_power_integral(k + i as u32, *a, *b);
                        }
                        Component::Box {
                            lo,
                            hi,
                            theta: theta.min(PI),
                            area,
                        }
                    }
                    ComponentSpec::Cap { radius } => Component::Cap {
                        radius: radius.min(PI),
                        area: cap_area(d, radius.min(PI)),
                    },
                    ComponentSpec::Uniform => Component::Uniform {
                        area: sphere_area(d),
                    },
                };
                (w / total, comp)
            })
            .collect();
        Mixture {
            center: center.clone(),
            center_ambient: cyl_to_ambient(center),
            components,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> CylPoint {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = &self.components.last().unwrap().1;
        for (w, c) in &self.components {
            acc += w;
            if u < acc {
                pick = c;
                break;
            }
        }
        let k = self.center.k();
        loop {
            let z = match pick {
                Component::Box { lo, hi, theta, .. } => {
                    let omega = sample_cap(rng, &self.center.omega, *theta);
                    let psi: Vec<f64> = lo
                        .iter()
                        .zip(hi)
                        .enumerate()
                        .map(|(i, (a, b))| sample_cos_power(rng, k + i as u32, *a, *b))
                        .collect();
                    CylPoint { omega, psi }
                }
                Component::Cap { radius, .. } => {
                    match ambient_to_cyl(&sample_cap(rng, &self.center_ambient, *radius), k) {
                        Ok(p) => p,
                        Err(_) => continue,
                    }
                }
                Component::Uniform { .. } => {
                    match ambient_to_cyl(&gaussian_unit(rng, self.center_ambient.len()), k) {
                        Ok(p) => p,
                        Err(_) => continue,
                    }
                }
            };
            if z.psi.iter().all(|p| p.abs() < FRAC_PI_2) {
                return z;
            }
        }
    }

    /// Mixture density with respect to `σ` at `z`.
    fn density(&self, z: &CylPoint) -> f64 {
        let mut q = 0.0;
        let mut ambient: Option<Vec<f64>> = None;
        for (w, c) in &self.components {
            let inside = match c {
                Component::Box { lo, hi, theta, area } => {
                    let ok = z
                        .psi
                        .iter()
                        .zip(lo.iter().zip(hi))
                        .all(|(p, (a, b))| *a <= *p && *p <= *b)
                        && angle(&z.omega, &self.center.omega) <= *theta;
                    ok.then_some(*area)
                }
                Component::Cap { radius, area } => {
                    let amb = ambient.get_or_insert_with(|| cyl_to_ambient(z));
                    (angle(amb, &self.center_ambient) <= *radius).then_some(*area)
                }
                Component::Uniform { area } => Some(*area),
            };
            if let Some(area) = inside {
                q += w / area;
            }
        }
        q
    }

    /// Importance-sampled `∫ f dσ`, batched until the target accuracy.
    fn integrate<F>(&self, f: F, opts: &McOptions, seed: u64) -> McEstimate
    where
        F: Fn(&CylPoint) -> f64 + Sync,
    {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut n = 0usize;
        let mut round = 0u64;
        let per_round = 4usize;
        loop {
            let partials: Vec<(f64, f64)> = (0..per_round as u64)
                .into_par_iter()
                .map(|b| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(round * per_round as u64 + b);
                    let mut s = 0.0;
                    let mut s2 = 0.0;
                    for _ in 0..opts.batch {
                        let z = self.sample(&mut rng);
                        let v = f(&z) / self.density(&z);
                        s += v;
                        s2 += v * v;
                    }
                    (s, s2)
                })
                .collect();
            for (s, s2) in partials {
                sum += s;
                sum_sq += s2;
            }
            n += per_round * opts.batch;
            round += 1;
            let mean = sum / n as f64;
            let var = (sum_sq / n as f64 - mean * mean).max(0.0);
            let stderr = (var / n as f64).sqrt();
            let est = McEstimate {
                value: mean,
                stderr,
                samples: n,
            };
            if (mean != 0.0 && est.rel_err() <= opts.target_rel_err) || n >= opts.max_samples {
                return est;
            }
        }
    }
}

enum ComponentSpec {
    Box { h: f64, theta: f64 },
    Cap { radius: f64 },
    Uniform,
}

/// Sample from the density `∝ cos^p ψ` on `[a, b] ⊂ [−π/2, π/2]`.
fn sample_cos_power(rng: &mut ChaCha8Rng, p: u32, a: f64, b: f64) -> f64 {
    if p == 0 {
        return rng.random_range(a..=b);
    }
    let peak = if a <= 0.0 && b >= 0.0 {
        1.0
    } else {
        a.abs().min(b.abs()).cos()
    };
    loop {
        let t = rng.random_range(a..=b);
        if rng.random::<f64>() * peak <= t.cos().powi(p as i32) {
            return t;
        }
    }
}

/// Angular extent in `ω` of a surrogate ball of radius `r` about a centre
/// with `|ψ′| = psi_norm`.
fn omega_extent(r: f64, psi_norm: f64) -> f64 {
    (r * (psi_norm + r)).min(PI)
}

/// Monte-Carlo estimate of `σ{z : Φ(z, center) < r}`.
pub fn ball_volume(center: &CylPoint, r: f64, opts: &McOptions, seed: u64) -> Result<McEstimate> {
    if !(r > 0.0) {
        return domain(format!("ball radius must be positive, got {r}"));
    }
    let theta = omega_extent(r, center.psi_norm());
    let mixture = Mixture::new(
        center,
        vec![
            (0.6, ComponentSpec::Box { h: r, theta }),
            (0.3, ComponentSpec::Cap { radius: r }),
            (0.1, ComponentSpec::Uniform),
        ],
    );
    let eps = opts.eps;
    Ok(mixture.integrate(
        |z| {
            if distance_surrogate(z, center, eps) < r {
                1.0
            } else {
                0.0
            }
        },
        opts,
        seed,
    ))
}

/// Monte-Carlo estimate of `∫ (1 + Φ(z, z′)/r)^{−β} (1 + ϖ_r(z, z′))^{−α} dσ(z)`.
pub fn weighted_decay_integral(
    center: &CylPoint,
    r: f64,
    alpha: f64,
    beta: f64,
    opts: &McOptions,
    seed: u64,
) -> Result<McEstimate> {
    if !(r > 0.0) {
        return domain(format!("radius must be positive, got {r}"));
    }
    // Boxes and caps at radii r·2^s until they cover the sphere.
    let mut parts = Vec::new();
    let mut h = r;
    loop {
        let theta = omega_extent(h, center.psi_norm());
        parts.push((1.0, ComponentSpec::Box { h, theta }));
        parts.push((0.5, ComponentSpec::Cap { radius: h }));
        if h >= PI {
            break;
        }
        h *= 2.0;
    }
    let n = parts.len() as f64;
    parts.push((0.1 * n, ComponentSpec::Uniform));
    let mixture = Mixture::new(center, parts);
    let eps = opts.eps;
    Ok(mixture.integrate(
        |z| {
            let phi = distance_surrogate(z, center, eps);
            (1.0 + phi / r).powf(-beta) * (1.0 + weight(r, z, center)).powf(-alpha)
        },
        opts,
        seed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_areas() {
        assert!((cap_area(2, PI / 2.0) - 2.0 * PI).abs() < 1e-12);
        assert!((cap_area(1, 0.3) - 0.6).abs() < 1e-15);
        assert!((cap_area(3, PI) - sphere_area(3)).abs() < 1e-12);
        // Spherical cap on S²: 2π(1 − cos θ).
        assert!((cap_area(2, 0.4) - 2.0 * PI * (1.0 - 0.4f64.cos())).abs() < 1e-13);
    }

    #[test]
    fn mixture_density_is_normalized() {
        // ∫ 1 dσ estimated through the mixture is exactly σ(S^d) in
        // expectation; the estimator must reproduce it.
        let c = CylPoint::on_meridian(1, vec![0.2]).unwrap();
        let mix = Mixture::new(
            &c,
            vec![
                (0.5, ComponentSpec::Box { h: 0.1, theta: 0.05 }),
                (0.3, ComponentSpec::Cap { radius: 0.2 }),
                (0.2, ComponentSpec::Uniform),
            ],
        );
        let opts = McOptions {
            target_rel_err: 0.003,
            ..McOptions::default()
        };
        let est = mix.integrate(|_| 1.0, &opts, 5);
        let want = sphere_area(2);
        assert!((est.value - want).abs() < 4.0 * est.stderr.max(1e-3 * want), "{est:?}");
    }

    #[test]
    fn large_ball_is_whole_sphere() {
        for (d, k) in [(2u32, 1u32), (3, 2)] {
            let c = CylPoint::on_meridian(k, vec![0.05; (d - k) as usize]).unwrap();
            let est = ball_volume(&c, 10.0, &McOptions::default(), 1).unwrap();
            let want = sphere_area(d);
            assert!((est.value - want).abs() < 4.0 * est.stderr + 1e-9, "{est:?} vs {want}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let c = CylPoint::on_meridian(1, vec![0.0]).unwrap();
        let opts = McOptions::default();
        let a = ball_volume(&c, 0.1, &opts, 9).unwrap();
        let b = ball_volume(&c, 0.1, &opts, 9).unwrap();
        assert_eq!(a, b);
    }
}
