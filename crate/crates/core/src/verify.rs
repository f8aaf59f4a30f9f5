//! Acceptance harness shared by the integration tests and `grushin verify`.
//!
//! Each criterion returns a [`CriterionOutcome`] holding one or more
//! [`Check`]s and the wall-clock time; it passes when every check passes.
//! The runtime budget is itself a check.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds::oracle::ClusterOracle;
use crate::bounds::{
    det_even_subsets, plancherel_check, riesz_check, scaling_probe, ClusterSum,
};
use crate::error::Result;
use crate::geometry::{
    ambient_to_cyl, ball_volume, distance_surrogate, volume_model, weight,
    weighted_decay_integral, CylPoint, McOptions, DEFAULT_BRANCH_EPS,
};
use crate::kernels::{apply_grushin_residual, l1_operator_norm, zonal_kernel, MultiplierSpec};
use crate::numeric::{sphere_area, spread};
use crate::quadrature::psi_rule;
use crate::special::profile::{lower_recurrence_coeff, recurrence_coeff};
use crate::special::{jacobi_eval, jacobi_oracle, profile_eval, xtilde_eval, JacobiIndex, ProfileIndex};
use crate::spectrum::{chains_below, default_epsilon, sphere_dim, ChainIndex, HalfInt, Regime, SpectralWindow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub bound: f64,
    pub kind: Bound,
    pub passed: bool,
}

impl Check {
    pub fn at_most(label: impl Into<String>, measured: f64, bound: f64) -> Self {
        Check {
            label: label.into(),
            measured,
            bound,
            kind: Bound::AtMost,
            passed: measured <= bound,
        }
    }

    pub fn at_least(label: impl Into<String>, measured: f64, bound: f64) -> Self {
        Check {
            label: label.into(),
            measured,
            bound,
            kind: Bound::AtLeast,
            passed: measured >= bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub seconds: f64,
    pub checks: Vec<Check>,
    /// Free-form measurements kept for the report.
    pub notes: Vec<String>,
}

impl CriterionOutcome {
    fn finish(
        id: u32,
        name: &str,
        start: Instant,
        limit_s: f64,
        mut checks: Vec<Check>,
        notes: Vec<String>,
    ) -> Self {
        let seconds = start.elapsed().as_secs_f64();
        checks.push(Check::at_most("runtime_s", seconds, limit_s));
        CriterionOutcome {
            id,
            name: name.to_string(),
            passed: checks.iter().all(|c| c.passed),
            seconds,
            checks,
            notes,
        }
    }

    /// One line: status, id, name and every check.
    pub fn summary_line(&self) -> String {
        let parts: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                let op = match c.kind {
                    Bound::AtMost => "<=",
                    Bound::AtLeast => ">=",
                };
                let mark = if c.passed { "" } else { " !" };
                format!("{} = {:.4e} {op} {:.4e}{mark}", c.label, c.measured, c.bound)
            })
            .collect();
        format!(
            "criterion {:>2} {} {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            parts.join("; ")
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Smaller grids for the expensive criteria.
    pub quick: bool,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            quick: false,
            seed: 20240917,
        }
    }
}

pub const CRITERIA: [u32; 13] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13];

pub fn run_criterion(id: u32, opts: &VerifyOptions) -> Result<CriterionOutcome> {
    match id {
        1 => criterion_1(opts),
        2 => criterion_2(opts),
        3 => criterion_3(opts),
        4 => criterion_4(opts),
        5 => criterion_5(opts),
        6 => criterion_6(opts),
        7 => criterion_7(opts),
        8 => criterion_8(opts),
        9 => criterion_9(opts),
        10 => criterion_10(opts),
        11 => criterion_11(opts),
        12 => criterion_12(opts),
        13 => criterion_13(opts),
        _ => crate::error::domain(format!("unknown criterion {id}")),
    }
}

/// Runs every criterion; errors become failed outcomes.
pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionOutcome> {
    CRITERIA
        .iter()
        .map(|&id| {
            run_criterion(id, opts).unwrap_or_else(|e| CriterionOutcome {
                id,
                name: "error".into(),
                passed: false,
                seconds: 0.0,
                checks: vec![],
                notes: vec![e.to_string()],
            })
        })
        .collect()
}

fn rng(opts: &VerifyOptions, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(opts.seed);
    r.set_stream(stream);
    r
}

/// `binom(j + a, j)` for real `a`.
fn binom_real(j: u32, a: f64) -> f64 {
    (1..=j).map(|i| (a + i as f64) / i as f64).product()
}

/// Recurrence against the exact oracle, with the error measured against the
/// local oscillation amplitude `sqrt(P² + (1−x²) P′² / (j(j+2m+1)))` so that
/// points next to a zero are not scored by an arbitrarily small `|P|`.
pub fn criterion_1(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut rng = rng(opts, 1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let j: u32 = rng.random_range(0..=60);
        let m = rng.random_range(0..=120u32) as f64 / 2.0;
        let x: f64 = rng.random_range(-1.0..=1.0);
        let idx = JacobiIndex::new(j, m, m)?;
        let fast = jacobi_eval(idx, x)?;
        let exact = jacobi_oracle(idx, x)?;
        let amp = if j == 0 {
            exact.abs().max(1.0)
        } else {
            let n = j as f64;
            let dp = (n + 2.0 * m + 1.0) / 2.0 * jacobi_oracle(JacobiIndex::new(j - 1, m + 1.0, m + 1.0)?, x)?;
            (exact * exact + (1.0 - x * x) * dp * dp / (n * (n + 2.0 * m + 1.0))).sqrt()
        };
        worst = worst.max((fast - exact).abs() / amp);
    }
    let mut endpoint = 0.0f64;
    for j in 0..=60 {
        for mt in 0..=120u32 {
            let a = mt as f64 / 2.0;
            let want = binom_real(j, a);
            let got = jacobi_eval(JacobiIndex::new(j, a, a)?, 1.0)?;
            endpoint = endpoint.max((got - want).abs() / want);
        }
    }
    Ok(CriterionOutcome::finish(
        1,
        "special-function correctness",
        start,
        10.0,
        vec![
            Check::at_most("max_rel_err_vs_oracle", worst, 1e-12),
            Check::at_most("max_rel_err_endpoint", endpoint, 1e-12),
        ],
        vec![],
    ))
}

pub fn criterion_2(_opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut notes = vec![];
    for (d, m_twice) in [(2u32, 0u32), (3, 3), (4, 2)] {
        let ells: Vec<ProfileIndex> = (0..)
            .map(|n| ProfileIndex::from_twice(d, m_twice + 1 + 2 * n, m_twice))
            .take_while(|p| p.as_ref().map(|p| p.ell.value() <= 60.0).unwrap_or(false))
            .collect::<Result<_>>()?;
        let rule = psi_rule(d, 2 * 60 + 16)?;
        let table: Vec<Vec<f64>> = ells
            .iter()
            .map(|p| rule.nodes.iter().map(|&t| profile_eval(*p, t)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let mut local = 0.0f64;
        for a in 0..ells.len() {
            for b in a..ells.len() {
                let g: f64 = (0..rule.len())
                    .map(|i| rule.weights[i] * table[a][i] * table[b][i])
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                local = local.max((g - want).abs());
            }
        }
        notes.push(format!("d={d} m={}: {} profiles, max |G-I| = {local:.3e}", m_twice as f64 / 2.0, ells.len()));
        worst = worst.max(local);
    }
    Ok(CriterionOutcome::finish(
        2,
        "orthonormality",
        start,
        30.0,
        vec![Check::at_most("max_gram_deviation", worst, 1e-10)],
        notes,
    ))
}

pub fn criterion_3(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut rng = rng(opts, 3);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let d: u32 = rng.random_range(2..=6);
        let lt = d - 1 + 2 * rng.random_range(0..=((200 - (d - 1)) / 2));
        let mt = d - 2 + 2 * rng.random_range(0..=((lt - 1 - (d - 2)) / 2));
        let x: f64 = rng.random_range(-1.0..=1.0);
        let p = ProfileIndex::from_twice(d, lt, mt)?;
        let up = ProfileIndex::from_twice(d, lt + 2, mt)?;
        let here = xtilde_eval(p, x)?;
        let mut rhs = recurrence_coeff(p) * xtilde_eval(up, x)?;
        let down = lower_recurrence_coeff(p);
        if down != 0.0 {
            rhs += down * xtilde_eval(ProfileIndex::from_twice(d, lt - 2, mt)?, x)?;
        }
        worst = worst.max((x * here - rhs).abs() / here.abs().max(1.0));
    }
    Ok(CriterionOutcome::finish(
        3,
        "three-term recurrence",
        start,
        10.0,
        vec![Check::at_most("max_rel_residual", worst, 1e-10)],
        vec![],
    ))
}

pub fn criterion_4(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut rng = rng(opts, 4);
    let pools: Vec<(u32, u32, Vec<ChainIndex>)> = [(2u32, 1u32), (3, 2)]
        .iter()
        .map(|&(d, k)| {
            let cap = HalfInt::from_twice(if d % 2 == 0 { 39 } else { 40 });
            let lam = crate::spectrum::laplace_eigenvalue(d, cap)?;
            let chains = chains_below(d, k, lam, Some(cap))?
                .into_iter()
                .filter(|c| c.eigenvalue_int() > 0)
                .collect();
            Ok((d, k, chains))
        })
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    let mut min_ratio = f64::INFINITY;
    let mut notes = vec![];
    for n in 0..20 {
        let (_, _, pool) = &pools[n % 2];
        let c = &pool[rng.random_range(0..pool.len())];
        let psi: Vec<f64> = (0..(c.d - c.k)).map(|_| rng.random_range(-1.2..=1.2)).collect();
        let r1 = apply_grushin_residual(c, &psi, 1e-3)?;
        let r2 = apply_grushin_residual(c, &psi, 5e-4)?;
        worst = worst.max(r1);
        min_ratio = min_ratio.min(r1 / r2);
        notes.push(format!("{c} psi={psi:.3?}: r(h)={r1:.3e} r(h/2)={r2:.3e}"));
    }
    Ok(CriterionOutcome::finish(
        4,
        "eigenfunction PDE residual",
        start,
        60.0,
        vec![
            Check::at_most("max_residual_h1e-3", worst, 1e-4),
            Check::at_least("min_refinement_ratio", min_ratio, 3.5),
        ],
        notes,
    ))
}

/// Legendre polynomial coefficients of `P_n` in increasing powers.
fn legendre_coeffs(n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n + 1];
    let binom = |a: usize, b: usize| -> f64 {
        (1..=b).fold(1.0, |acc, i| acc * (a - b + i) as f64 / i as f64)
    };
    for j in 0..=n / 2 {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        c[n - 2 * j] = sign * binom(n, j) * binom(2 * n - 2 * j, n) / 2f64.powi(n as i32);
    }
    c
}

/// `(1−x²)^{m/2} dᵐ/dxᵐ P_n(x)`.
fn assoc_legendre(n: usize, m: usize, x: f64) -> f64 {
    let mut c = legendre_coeffs(n);
    for _ in 0..m {
        c = c.iter().enumerate().skip(1).map(|(i, v)| v * i as f64).collect();
    }
    let poly = c.iter().rev().fold(0.0, |acc, v| acc * x + v);
    (1.0 - x * x).max(0.0).powf(m as f64 / 2.0) * poly
}

/// `Σ Y(ω) Y(ω′)` over a real orthonormal basis of `H^n(S^k)`, `k ∈ {1, 2}`.
pub fn harmonic_basis_sum(k: u32, n: usize, a: &[f64], b: &[f64]) -> f64 {
    match k {
        1 => {
            let (ta, tb) = (a[1].atan2(a[0]), b[1].atan2(b[0]));
            if n == 0 {
                1.0 / (2.0 * PI)
            } else {
                let nf = n as f64;
                ((nf * ta).cos() * (nf * tb).cos() + (nf * ta).sin() * (nf * tb).sin()) / PI
            }
        }
        2 => {
            let (za, zb) = (a[2].clamp(-1.0, 1.0), b[2].clamp(-1.0, 1.0));
            let (pa, pb) = (a[1].atan2(a[0]), b[1].atan2(b[0]));
            let nf = n as f64;
            let mut s = (2.0 * nf + 1.0) / (4.0 * PI) * assoc_legendre(n, 0, za) * assoc_legendre(n, 0, zb);
            for m in 1..=n {
                let ratio: f64 = ((n - m + 1)..=(n + m)).map(|i| 1.0 / i as f64).product();
                let norm = (2.0 * nf + 1.0) / (2.0 * PI) * ratio;
                let mf = m as f64;
                let ang = (mf * pa).cos() * (mf * pb).cos() + (mf * pa).sin() * (mf * pb).sin();
                s += norm * assoc_legendre(n, m, za) * assoc_legendre(n, m, zb) * ang;
            }
            s
        }
        _ => panic!("basis sums implemented for k <= 2"),
    }
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

pub fn criterion_5(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut diag = 0.0f64;
    for k in 1..=3u32 {
        for n in 0..=8 {
            let m = HalfInt::of_degree(k, n);
            let want = sphere_dim(k, m)? as f64 / sphere_area(k);
            diag = diag.max((zonal_kernel(k, m, 1.0)? - want).abs() / want);
        }
    }
    let mut rng = rng(opts, 5);
    let mut interior = 0.0f64;
    for k in 1..=2u32 {
        for n in 0..=4usize {
            for _ in 0..20 {
                let a = random_unit(&mut rng, k as usize + 1);
                let b = random_unit(&mut rng, k as usize + 1);
                let u: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
                let z = zonal_kernel(k, HalfInt::of_degree(k, n as u32), u.clamp(-1.0, 1.0))?;
                let brute = harmonic_basis_sum(k, n, &a, &b);
                interior = interior.max((z - brute).abs());
            }
        }
    }
    Ok(CriterionOutcome::finish(
        5,
        "addition-theorem diagonal",
        start,
        30.0,
        vec![
            Check::at_most("max_rel_err_diagonal", diag, 1e-10),
            Check::at_most("max_err_vs_basis_sum", interior, 1e-9),
        ],
        vec![],
    ))
}

pub fn criterion_6(_opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &(d, k) in &[(2u32, 1u32), (3, 1), (3, 2)] {
        let eps = default_epsilon(d, k);
        for xv in [0.0, 0.3, -0.77, 1.0] {
            let x = vec![xv; (d - k) as usize];
            let mut oracle = ClusterOracle::new(d, k, &x);
            for i in 1..=8 {
                for (regime, alpha) in [
                    (Regime::Elliptic, 0.0),
                    (Regime::Subelliptic, 0.0),
                    (Regime::Subelliptic, 0.4 * k as f64),
                ] {
                    let lib = ClusterSum::new(d, k, SpectralWindow::new(i, regime, eps)?)?.eval(alpha, &x)?;
                    let brute = oracle.sum(i, alpha, regime, eps)?;
                    let err = if brute == 0.0 {
                        lib.abs()
                    } else {
                        (lib - brute).abs() / brute.abs()
                    };
                    worst = worst.max(err);
                    cases += 1;
                }
            }
        }
    }
    Ok(CriterionOutcome::finish(
        6,
        "cluster-sum oracle equivalence",
        start,
        60.0,
        vec![Check::at_most("max_rel_err", worst, 1e-10)],
        vec![format!("{cases} window/regime/x cases")],
    ))
}

/// Slope of elliptic + weighted-subelliptic sums at `x = 0` (with `α = 0`)
/// and the fitted `x`-exponent of the subelliptic sum at `i = 64`.
pub fn criterion_7(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let is: Vec<u32> = if opts.quick {
        vec![16, 24, 32, 48, 64, 96, 128]
    } else {
        (16..=128).collect()
    };
    let mut checks = vec![];
    let mut notes = vec![];
    for &(d, k) in &[(2u32, 1u32), (3, 1), (3, 2), (4, 2)] {
        let pair_start = Instant::now();
        let eps = default_epsilon(d, k);
        let all = scaling_probe(d, k, 0.0, Regime::All, eps, &is, &[0.0])?;
        let slope = all.slope_at_zero().unwrap_or(f64::NAN);
        let target = d as f64 - 1.0;
        checks.push(Check::at_most(format!("slope_dev({d},{k})"), (slope - target).abs(), 0.15));
        let ell = scaling_probe(d, k, 0.0, Regime::Elliptic, eps, &is, &[0.0])?;
        let sub = scaling_probe(d, k, 0.0, Regime::Subelliptic, eps, &is, &[0.0])?;
        notes.push(format!(
            "({d},{k}) slope at x=0: total {slope:.4}, elliptic {:.4}, subelliptic {:.4}, target {target}",
            ell.slope_at_zero().unwrap_or(f64::NAN),
            sub.slope_at_zero().unwrap_or(f64::NAN)
        ));
        for alpha in [0.0, 0.4 * k as f64] {
            let scan = scaling_probe(d, k, alpha, Regime::Subelliptic, eps, &[64], &[1.0 / 64.0, 1.0 / 8.0])?;
            let gamma = scan.x_exponent(64).unwrap_or(f64::NAN);
            let want = k as f64 - 2.0 * alpha;
            checks.push(Check::at_most(format!("xexp_dev({d},{k},a={alpha:.1})"), (gamma - want).abs(), 0.25));
            notes.push(format!("({d},{k}) alpha={alpha:.1}: x-exponent {gamma:.4}, target {want:.2}"));
        }
        checks.push(Check::at_most(format!("runtime_s({d},{k})"), pair_start.elapsed().as_secs_f64(), 300.0));
    }
    Ok(CriterionOutcome::finish(7, "cluster scaling", start, 4.0 * 300.0, checks, notes))
}

pub fn criterion_8(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut checks = vec![];
    let mut notes = vec![];
    for n in [1u32, 2] {
        let seeds: Vec<u64> = (0..50).map(|j| opts.seed.wrapping_mul(1000).wrapping_add(j)).collect();
        let max_at = |ell: f64| -> Result<f64> {
            let mut m = 0.0f64;
            for &s in &seeds {
                m = m.max(riesz_check(2, 1, n, s, ell)?);
            }
            Ok(m)
        };
        let (a, b) = (max_at(40.0)?, max_at(80.0)?);
        checks.push(Check::at_most(format!("max_ratio_finite(N={n})"), if a.is_finite() && b.is_finite() { 0.0 } else { 1.0 }, 0.0));
        checks.push(Check::at_most(format!("rel_change(N={n})"), (b / a - 1.0).abs(), 0.2));
        notes.push(format!("N={n}: max ratio {a:.4} at ell_max 40, {b:.4} at 80"));
    }
    Ok(CriterionOutcome::finish(8, "Riesz bound", start, 120.0, checks, notes))
}

pub fn criterion_9(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let ns: Vec<u32> = if opts.quick { vec![4, 8, 16, 32] } else { vec![4, 8, 16, 32, 64] };
    let centers: Vec<CylPoint> = [0.0, 0.05, 0.3]
        .iter()
        .map(|&p| CylPoint::on_meridian(1, vec![p]))
        .collect::<Result<_>>()?;
    let family = |n: u32| MultiplierSpec::Indicator {
        lo: n as f64 / 4.0,
        hi: 3.0 * n as f64 / 4.0,
    };
    let mut ratios = vec![];
    let mut noisy = 0;
    let mut notes = vec![];
    for alpha in [0.0, 0.4] {
        let rows = plancherel_check(alpha, &ns, family, &centers, &McOptions::default(), opts.seed)?;
        for r in rows {
            notes.push(format!(
                "alpha={alpha} N={} psi'={:.2}: lhs {:.4e} rhs {:.4e} ratio {:.4}",
                r.n, r.psi_norm, r.lhs, r.rhs, r.ratio
            ));
            noisy += r.noisy as u32;
            ratios.push(r.ratio);
        }
    }
    Ok(CriterionOutcome::finish(
        9,
        "weighted Plancherel",
        start,
        300.0,
        vec![
            Check::at_most("ratio_spread", spread(&ratios), 10.0),
            Check::at_most("noisy_volume_rows", noisy as f64, 0.0),
        ],
        notes,
    ))
}

const VOLUME_PSI: [f64; 3] = [0.0, 0.05, 0.3];

fn volume_grid(quick: bool) -> Vec<(u32, u32, f64, f64)> {
    let js: Vec<i32> = if quick { vec![1, 3, 5, 7] } else { (1..=7).collect() };
    let mut out = vec![];
    for &(d, k) in &[(2u32, 1u32), (3, 2)] {
        for &p in &VOLUME_PSI {
            for &j in &js {
                out.push((d, k, 2f64.powi(-j), p));
            }
        }
    }
    out
}

pub fn criterion_10(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mc = McOptions {
        target_rel_err: 0.02,
        ..McOptions::default()
    };
    let mut ratios = vec![];
    let mut worst_err = 0.0f64;
    let mut notes = vec![];
    for (n, (d, k, r, p)) in volume_grid(opts.quick).into_iter().enumerate() {
        let mut psi = vec![0.0; (d - k) as usize];
        psi[0] = p;
        let c = CylPoint::on_meridian(k, psi)?;
        let v = ball_volume(&c, r, &mc, opts.seed.wrapping_add(n as u64))?;
        let ratio = v.value / (sphere_area(d) * volume_model(d, k, r, p));
        worst_err = worst_err.max(v.rel_err());
        ratios.push(ratio);
        notes.push(format!("({d},{k}) r={r} |psi|={p}: V={:.4e} rel_err {:.4} ratio {ratio:.4}", v.value, v.rel_err()));
    }
    Ok(CriterionOutcome::finish(
        10,
        "volume comparability",
        start,
        300.0,
        vec![
            Check::at_most("ratio_spread", spread(&ratios), 20.0),
            Check::at_most("max_mc_rel_err", worst_err, 0.03),
        ],
        notes,
    ))
}

/// A random pair for the weight growth inequality: `z′` has `ψ′` scaled
/// toward the singular set by `r` half of the time, and `z` is either
/// uniform or a small perturbation of `z′`.
pub fn weight_pair(rng: &mut ChaCha8Rng, d: u32, k: u32, r: f64) -> Result<(CylPoint, CylPoint)> {
    let uniform = |rng: &mut ChaCha8Rng| ambient_to_cyl(&random_unit(rng, d as usize + 1), k);
    let mut zp = uniform(rng)?;
    if rng.random_bool(0.5) {
        let s = r * rng.random_range(0.0..4.0);
        for v in zp.psi.iter_mut() {
            *v = (*v * s).clamp(-1.5, 1.5);
        }
    }
    let z = if rng.random_bool(0.5) {
        uniform(rng)?
    } else {
        let scale = r * rng.random_range(0.0..8.0);
        let psi = zp
            .psi
            .iter()
            .map(|v| (v + scale * rng.random_range(-1.0..1.0)).clamp(-1.5, 1.5))
            .collect();
        let mut omega: Vec<f64> = zp
            .omega
            .iter()
            .map(|v| v + scale * rng.random_range(-1.0..1.0))
            .collect();
        let n = omega.iter().map(|v| v * v).sum::<f64>().sqrt();
        omega.iter_mut().for_each(|v| *v /= n);
        CylPoint::new(omega, psi)?
    };
    Ok((z, zp))
}

/// `(1 + ϖ_r(z, z′)) / (1 + Φ(z, z′)/r)` over `count` random pairs, cycling
/// through `(d, k) ∈ {(2,1), (3,1), (3,2)}` with `r = 2^{−j}`, `j ≤ 7`.
pub fn growth_ratios(rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<f64>> {
    (0..count)
        .map(|n| {
            let (d, k) = [(2u32, 1u32), (3, 1), (3, 2)][n % 3];
            let r = 2f64.powi(-rng.random_range(1..=7));
            let (z, zp) = weight_pair(rng, d, k, r)?;
            let lhs = 1.0 + weight(r, &z, &zp);
            let rhs = 1.0 + distance_surrogate(&z, &zp, DEFAULT_BRANCH_EPS) / r;
            Ok(lhs / rhs)
        })
        .collect()
}

pub fn criterion_11(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mc = McOptions {
        target_rel_err: 0.02,
        ..McOptions::default()
    };
    let mut ratios = vec![];
    let mut notes = vec![];
    for (n, (d, k, r, p)) in volume_grid(opts.quick).into_iter().enumerate() {
        let alpha = 0.5 * (d - k).min(k) as f64;
        let beta = (d + k + 1) as f64 - alpha + 0.5;
        let mut psi = vec![0.0; (d - k) as usize];
        psi[0] = p;
        let c = CylPoint::on_meridian(k, psi)?;
        let seed = opts.seed.wrapping_add(1000 + n as u64);
        let integral = weighted_decay_integral(&c, r, alpha, beta, &mc, seed)?;
        let vol = ball_volume(&c, r, &mc, seed ^ 0x5555)?;
        let ratio = integral.value / vol.value;
        ratios.push(ratio);
        notes.push(format!("({d},{k}) r={r} |psi|={p} alpha={alpha} beta={beta}: ratio {ratio:.4}"));
    }
    let count = 10_000;
    let mut fit_rng = rng(opts, 11);
    let fitted = growth_ratios(&mut fit_rng, count)?.into_iter().fold(0.0f64, f64::max);
    let mut check_rng = rng(opts, 12);
    let held_out = growth_ratios(&mut check_rng, count)?.into_iter().fold(0.0f64, f64::max);
    notes.push(format!("growth constant fitted {fitted:.4}, held-out max {held_out:.4}"));
    Ok(CriterionOutcome::finish(
        11,
        "weight lemma",
        start,
        180.0,
        vec![
            Check::at_most("integrability_ratio_spread", spread(&ratios), 20.0),
            Check::at_most("held_out_growth_over_fitted", held_out / fitted, 1.5),
        ],
        notes,
    ))
}

/// Centres for the Bochner-Riesz probe.
pub const BR_CENTERS: [f64; 3] = [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3];

pub fn criterion_12(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let centers: Vec<CylPoint> = BR_CENTERS
        .iter()
        .map(|&p| CylPoint::on_meridian(1, vec![p]))
        .collect::<Result<_>>()?;
    let probe = |delta: f64, lm: f64| -> Result<f64> {
        let f = MultiplierSpec::BochnerRiesz {
            t: 1.0 / (lm * lm),
            delta,
        };
        Ok(l1_operator_norm(&f, lm, &centers)?.0)
    };
    let (lo, hi) = (16.0, if opts.quick { 64.0 } else { 128.0 });
    let mut notes = vec![];
    let mut values = vec![];
    for delta in [0.0, 1.0] {
        let mut row = vec![];
        for lm in [16.0, 32.0, 64.0, 128.0] {
            if lm > hi {
                break;
            }
            row.push(probe(delta, lm)?);
        }
        notes.push(format!("delta={delta}: L1 column norms {row:.4?} for lambda_max 16, 32, ..."));
        values.push(row);
    }
    let growth = values[0].last().unwrap() / values[0][0];
    let variation = spread(&values[1]);
    notes.push(format!("lambda_max range {lo}..{hi}"));
    Ok(CriterionOutcome::finish(
        12,
        "Bochner-Riesz trend",
        start,
        300.0,
        vec![
            Check::at_least("growth_delta0", growth, 3.0),
            Check::at_most("variation_delta1", variation, 2.0),
        ],
        notes,
    ))
}

pub fn criterion_13(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut rng = rng(opts, 13);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=8usize);
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let (det, sum) = det_even_subsets(&w)?;
        worst = worst.max((det - sum).abs() / sum.abs().max(1.0));
    }
    Ok(CriterionOutcome::finish(
        13,
        "determinant lemma",
        start,
        5.0,
        vec![Check::at_most("max_rel_disagreement", worst, 1e-12)],
        vec![],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_examples() {
        assert!((assoc_legendre(2, 0, 0.0) + 0.5).abs() < 1e-15);
        assert!((assoc_legendre(3, 0, 0.5) + 0.4375).abs() < 1e-15);
        // P_2^1(x) = 3x sqrt(1−x²).
        assert!((assoc_legendre(2, 1, 0.6) - 3.0 * 0.6 * 0.8).abs() < 1e-14);
    }

    #[test]
    fn basis_sum_diagonal_is_dimension() {
        let a = [0.0, 0.6, 0.8];
        for n in 0..5 {
            let s = harmonic_basis_sum(2, n, &a, &a);
            assert!((s - (2 * n + 1) as f64 / (4.0 * PI)).abs() < 1e-13);
        }
    }

    #[test]
    fn summary_line_marks_failures() {
        let o = CriterionOutcome::finish(
            99,
            "demo",
            Instant::now(),
            1.0,
            vec![Check::at_least("x", 1.0, 2.0)],
            vec![],
        );
        assert!(!o.passed);
        assert!(o.summary_line().contains("FAIL"));
        assert!(o.summary_line().contains(" !"));
    }
}
