//! Weighted spectral-cluster sums and the empirical checks built on them.
//!
//! Every bound probed here holds only up to an unspecified constant, so the
//! checks report ratios, spreads and fitted slopes rather than absolute
//! inequalities.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{ball_volume, CylPoint, McOptions};
use crate::kernels::{norm_nq, AxisPlan, ChainSeries, ColumnExpansion, MultiplierSpec, DEFAULT_PRUNE};
use crate::numeric::{compensated_sum, ls_slope, spread, CompensatedSum};
use crate::special::profile::XtildeLadder;
use crate::spectrum::{
    chains_below, enumerate_chains, laplace_eigenvalue, sphere_dim, ChainIndex, HalfInt, Regime,
    SpectralWindow,
};

pub mod oracle;

/// `Ξ(a, s, t) = (s + |a − t|)^{−1/2}`.
pub fn xi(a: f64, s: f64, t: f64) -> f64 {
    (s + (a - t).abs()).powf(-0.5)
}

#[derive(Clone, Debug)]
struct ClusterTerm {
    idx: Vec<usize>,
    dim: f64,
    /// `λ^{d,k} / ℓ_d²`.
    ratio_sq: f64,
}

/// The chains of one spectral window, planned for repeated evaluation of
/// `Σ α_{ℓ_k}(S^k) 𝒳(x) (√λ/ℓ_d)^{2α}` at different `x`.
///
/// `x = (x_{k+1}, …, x_d)` is ordered like the `ψ` coordinates, and
/// `𝒳(x) = Π_r |X̃^r_{ℓ_r, ℓ_{r−1}}(x_r)|²`.
#[derive(Clone, Debug)]
pub struct ClusterSum {
    pub d: u32,
    pub k: u32,
    pub window: SpectralWindow,
    axes: Vec<AxisPlan>,
    terms: Vec<ClusterTerm>,
}

impl ClusterSum {
    pub fn new(d: u32, k: u32, window: SpectralWindow) -> Result<Self> {
        let chains: Vec<ChainIndex> = enumerate_chains(d, k, &window)?.collect();
        let refs: Vec<&ChainIndex> = chains.iter().collect();
        let axes: Vec<AxisPlan> = ((k + 1)..=d).map(|r| AxisPlan::build(r, &refs)).collect();
        let terms = chains
            .iter()
            .map(|c| {
                let l = c.top().value();
                ClusterTerm {
                    idx: axes.iter().map(|a| a.index(c)).collect(),
                    dim: sphere_dim(k, c.bottom()).expect("valid") as f64,
                    ratio_sq: c.eigenvalue() / (l * l),
                }
            })
            .collect();
        Ok(ClusterSum {
            d,
            k,
            window,
            axes,
            terms,
        })
    }

    /// Number of chains in the window.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, alpha: f64, x: &[f64]) -> Result<f64> {
        if x.len() != (self.d - self.k) as usize {
            return domain(format!("expected {} x coordinates, got {}", self.d - self.k, x.len()));
        }
        if let Some(bad) = x.iter().find(|v| !(v.abs() <= 1.0)) {
            return domain(format!("x coordinates must lie in [-1, 1], got {bad}"));
        }
        if !(alpha >= 0.0) {
            return domain("weight exponent alpha must be nonnegative");
        }
        let tables: Vec<Vec<f64>> = self
            .axes
            .iter()
            .zip(x)
            .map(|(a, &xr)| a.table_x(xr))
            .collect();
        let mut acc = CompensatedSum::new();
        for t in &self.terms {
            let mut v = t.dim;
            for (tab, &i) in tables.iter().zip(&t.idx) {
                v *= tab[i] * tab[i];
            }
            if alpha > 0.0 {
                v *= t.ratio_sq.powf(alpha);
            }
            acc.add(v);
        }
        Ok(acc.value())
    }
}

/// Subelliptic cluster sum over chains with `ℓ_k ≥ εℓ_d` and
/// `λ ∈ [i², (i+1)²)`, weighted by `(√λ/ℓ_d)^{2α}`.
pub fn cluster_sum_subelliptic(
    d: u32,
    k: u32,
    i: u32,
    alpha: f64,
    epsilon: f64,
    x: &[f64],
) -> Result<f64> {
    if !(alpha >= 0.0 && alpha < k as f64 / 2.0) {
        return domain(format!("alpha must lie in [0, k/2) = [0, {}), got {alpha}", k as f64 / 2.0));
    }
    let w = SpectralWindow::new(i, Regime::Subelliptic, epsilon)?;
    ClusterSum::new(d, k, w)?.eval(alpha, x)
}

/// Elliptic cluster sum over chains with `ℓ_k ≤ εℓ_d` and
/// `λ ∈ [i², (i+1)²)`, unweighted.
pub fn cluster_sum_elliptic(d: u32, k: u32, i: u32, epsilon: f64, x: &[f64]) -> Result<f64> {
    let w = SpectralWindow::new(i, Regime::Elliptic, epsilon)?;
    ClusterSum::new(d, k, w)?.eval(0.0, x)
}

/// `x` with all coordinates equal and Euclidean norm `norm`.
pub fn x_on_diagonal(d: u32, k: u32, norm: f64) -> Vec<f64> {
    let n = (d - k) as usize;
    vec![norm / (n as f64).sqrt(); n]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterRow {
    pub i: u32,
    pub x_norm: f64,
    pub sum: f64,
    pub predicted: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterScanResult {
    pub d: u32,
    pub k: u32,
    pub alpha: f64,
    pub regime: Regime,
    pub epsilon: f64,
    pub rows: Vec<ClusterRow>,
}

impl ClusterScanResult {
    /// Log-log slope of the sum against `i` at `x = 0`.
    pub fn slope_at_zero(&self) -> Option<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .rows
            .iter()
            .filter(|r| r.x_norm == 0.0 && r.sum > 0.0)
            .map(|r| ((r.i as f64).ln(), r.sum.ln()))
            .unzip();
        (xs.len() >= 2).then(|| ls_slope(&xs, &ys))
    }

    /// Exponent `γ` in `sum ∝ |x|^{−γ}` fitted at fixed `i` over `|x| > 0`.
    pub fn x_exponent(&self, i: u32) -> Option<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .rows
            .iter()
            .filter(|r| r.i == i && r.x_norm > 0.0 && r.sum > 0.0)
            .map(|r| (r.x_norm.ln(), r.sum.ln()))
            .unzip();
        (xs.len() >= 2).then(|| -ls_slope(&xs, &ys))
    }

    /// `max ratio / min ratio` over all rows.
    pub fn ratio_spread(&self) -> f64 {
        let r: Vec<f64> = self.rows.iter().map(|r| r.ratio).collect();
        spread(&r)
    }
}

/// Cluster sums over a grid of windows `i` and norms `|x|` (with `x` on the
/// diagonal, see [`x_on_diagonal`]), compared with
/// `i^{d−1} min{i, 1/|x|}^{k−2α}`, or `i^{d−1}` for the elliptic regime.
///
/// `Regime::All` adds the elliptic sum and the weighted subelliptic sum.
pub fn scaling_probe(
    d: u32,
    k: u32,
    alpha: f64,
    regime: Regime,
    epsilon: f64,
    i_values: &[u32],
    x_norms: &[f64],
) -> Result<ClusterScanResult> {
    if !(alpha >= 0.0 && alpha < k as f64 / 2.0) {
        return domain(format!("alpha must lie in [0, k/2) = [0, {}), got {alpha}", k as f64 / 2.0));
    }
    if let Some(bad) = i_values.iter().find(|&&i| i < 2) {
        return domain(format!("scaling probes need i >= 2, got {bad}"));
    }
    let rows: Vec<Vec<ClusterRow>> = i_values
        .par_iter()
        .map(|&i| -> Result<Vec<ClusterRow>> {
            let parts: Vec<(ClusterSum, f64)> = match regime {
                Regime::Elliptic => vec![(
                    ClusterSum::new(d, k, SpectralWindow::new(i, Regime::Elliptic, epsilon)?)?,
                    0.0,
                )],
                Regime::Subelliptic => vec![(
                    ClusterSum::new(d, k, SpectralWindow::new(i, Regime::Subelliptic, epsilon)?)?,
                    alpha,
                )],
                Regime::All => vec![
                    (
                        ClusterSum::new(d, k, SpectralWindow::new(i, Regime::Elliptic, epsilon)?)?,
                        0.0,
                    ),
                    (
                        ClusterSum::new(d, k, SpectralWindow::new(i, Regime::Subelliptic, epsilon)?)?,
                        alpha,
                    ),
                ],
            };
            x_norms
                .iter()
                .map(|&s| {
                    let x = x_on_diagonal(d, k, s);
                    let mut sum = 0.0;
                    for (cs, a) in &parts {
                        sum += cs.eval(*a, &x)?;
                    }
                    let fi = i as f64;
                    let predicted = if regime == Regime::Elliptic {
                        fi.powi(d as i32 - 1)
                    } else {
                        let m = if s > 0.0 { fi.min(1.0 / s) } else { fi };
                        fi.powi(d as i32 - 1) * m.powf(k as f64 - 2.0 * alpha)
                    };
                    Ok(ClusterRow {
                        i,
                        x_norm: s,
                        sum,
                        predicted,
                        ratio: sum / predicted,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(ClusterScanResult {
        d,
        k,
        alpha,
        regime,
        epsilon,
        rows: rows.into_iter().flatten().collect(),
    })
}

/// `‖τ^N f‖₂ / ‖(L/Δ_{k+1})^{N/2} f‖₂` for a random `f` with standard normal
/// coefficients on every chain with `ℓ_d ≤ ell_max` and `λ^{k+1}_{ℓ_{k+1}} > 0`.
///
/// `f = Σ_c a_c X_c ⊗ Y_{ℓ_k}` with one unit-norm harmonic `Y_m` per degree,
/// so `|f|²` integrated over `S^k` is `Σ_m |Σ_{ℓ_k = m} a_c X_c|²`.
pub fn riesz_check(d: u32, k: u32, n_exp: u32, coeff_seed: u64, ell_max: f64) -> Result<f64> {
    let coefficients = riesz_coefficients(d, k, coeff_seed, ell_max)?;
    riesz_ratio(d, k, n_exp, &coefficients)
}

/// The random coefficients used by [`riesz_check`].
pub fn riesz_coefficients(
    d: u32,
    k: u32,
    coeff_seed: u64,
    ell_max: f64,
) -> Result<Vec<(ChainIndex, f64)>> {
    if !(ell_max >= (d as f64 + 1.0) / 2.0) {
        return domain(format!("ell_max = {ell_max} leaves no chain with positive Delta_(k+1) eigenvalue"));
    }
    // Largest element of N_d not above ell_max.
    let base = d - 1;
    let top = (2.0 * ell_max).floor() as u32;
    let cap = HalfInt::from_twice(top - (top - base) % 2);
    let lam_top = laplace_eigenvalue(d, cap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(coeff_seed);
    Ok(chains_below(d, k, lam_top, Some(cap))?
        .into_iter()
        .filter(|c| c.level_eigenvalue(k + 1) > 0.0)
        .map(|c| {
            let a: f64 = StandardNormal.sample(&mut rng);
            (c, a)
        })
        .collect())
}

/// Riesz ratio for explicit coefficients.
pub fn riesz_ratio(d: u32, k: u32, n_exp: u32, coefficients: &[(ChainIndex, f64)]) -> Result<f64> {
    if coefficients.iter().any(|(c, _)| c.level_eigenvalue(k + 1) <= 0.0) {
        return domain("coefficients must avoid the kernel of Delta_(k+1)");
    }
    let den = compensated_sum(coefficients.iter().map(|(c, a)| {
        a * a * (c.eigenvalue() / c.level_eigenvalue(k + 1)).powi(n_exp as i32)
    }));
    if !(den > 0.0) {
        return Err(Error::DegenerateDenominator(
            "all coefficients sit on the zero eigenvalue".into(),
        ));
    }
    let series = ChainSeries::new(d, k, coefficients)?;
    let rules = series.psi_rules(2, 2 * n_exp as usize + 16)?;
    let parts = series.map_psi_grid(&rules, |psi, w, g| {
        let tau: f64 = psi.iter().map(|p| p.sin().abs()).sum();
        w * tau.powi(2 * n_exp as i32) * compensated_sum(g.iter().map(|v| v * v))
    });
    Ok((compensated_sum(parts) / den).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlancherelRow {
    pub n: u32,
    pub center: usize,
    pub psi_norm: f64,
    pub alpha: f64,
    pub lhs: f64,
    pub volume: f64,
    pub volume_rel_err: f64,
    pub f_norm: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Monte-Carlo relative error of the volume above 5%.
    pub noisy: bool,
}

/// `‖(1+ϖ_{1/N}(·,z′))^α K_{F(√L)}(·,z′)‖₂ / (V(z′,1/N)^{−1/2} ‖F(N·)‖_{N,2})`
/// for every `N` and centre `z′`, with `F = family(N)` supported in `[0, N]`.
pub fn plancherel_check<G>(
    alpha: f64,
    n_values: &[u32],
    family: G,
    centers: &[CylPoint],
    mc: &McOptions,
    seed: u64,
) -> Result<Vec<PlancherelRow>>
where
    G: Fn(u32) -> MultiplierSpec,
{
    let mut rows = Vec::new();
    for &n in n_values {
        if n < 1 {
            return domain("N must be >= 1");
        }
        let f = family(n);
        let nf = n as f64;
        let f_norm = norm_nq(|x| f.eval(nf * x), n, 2.0, 64)?;
        for (ci, q) in centers.iter().enumerate() {
            let k = q.k();
            if !(alpha >= 0.0 && alpha < k as f64 / 2.0) {
                return domain(format!("alpha must lie in [0, k/2), got {alpha}"));
            }
            let col = ColumnExpansion::new(&f, q, nf, DEFAULT_PRUNE)?;
            let lhs = if col.series.is_empty() {
                0.0
            } else {
                let rules = col.series.psi_rules(2, 16)?;
                let denom = (1.0 / nf).max(q.psi_norm());
                col.weighted_l2_sq(&rules, |psi| {
                    let varpi = psi.iter().map(|p| p * p).sum::<f64>().sqrt() / denom;
                    (1.0 + varpi).powf(2.0 * alpha)
                })
                .sqrt()
            };
            let vol_seed = seed ^ ((n as u64) << 32) ^ ci as u64;
            let vol = ball_volume(q, 1.0 / nf, mc, vol_seed)?;
            let rhs = f_norm / vol.value.sqrt();
            rows.push(PlancherelRow {
                n,
                center: ci,
                psi_norm: q.psi_norm(),
                alpha,
                lhs,
                volume: vol.value,
                volume_rel_err: vol.rel_err(),
                f_norm,
                rhs,
                ratio: lhs / rhs,
                noisy: vol.rel_err() > 0.05,
            });
        }
    }
    Ok(rows)
}

/// The matrix with ones on the diagonal, `w_i` below and `−w_i` above it.
pub fn determinant_matrix(w: &[f64]) -> DMatrix<f64> {
    let n = w.len();
    DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Greater => w[i],
        std::cmp::Ordering::Less => -w[i],
    })
}

/// `(det M(w), Σ_{|S| even} Π_{j∈S} w_j)`.
pub fn det_even_subsets(w: &[f64]) -> Result<(f64, f64)> {
    if w.len() > 10 {
        return domain(format!("determinant check supports n <= 10, got {}", w.len()));
    }
    let det = determinant_matrix(w).determinant();
    let subsets = compensated_sum((0u32..(1 << w.len())).filter(|s| s.count_ones() % 2 == 0).map(
        |s| {
            w.iter()
                .enumerate()
                .filter(|(j, _)| s & (1 << j) != 0)
                .map(|(_, v)| v)
                .product::<f64>()
        },
    ));
    Ok((det, subsets))
}

/// `sup_{ℓ ≤ ell_max, x} ℓ^{1−d} Σ_{m ≤ ℓ} m^{d−2} |X̃^d_{ℓ,m}(x)|²` over the
/// sample points, with `0^0 = 1`.
pub fn sup_sum_check(d: u32, ell_max: HalfInt, x_samples: &[f64]) -> Result<f64> {
    if d < 2 {
        return domain("sup-sum check needs d >= 2");
    }
    if !ell_max.in_lattice(d) {
        return domain(format!("ell_max = {ell_max} is not in N_{d}"));
    }
    let n_ell = ell_max.degree(d)? as usize + 1;
    let sups: Vec<f64> = x_samples
        .par_iter()
        .map(|&x| -> Result<f64> {
            let mut sums = vec![CompensatedSum::new(); n_ell];
            let mut m = HalfInt::base(d - 1);
            while m.twice < ell_max.twice {
                let w = if d == 2 { 1.0 } else { m.value().powi(d as i32 - 2) };
                let vals = XtildeLadder::new(d, m, x)?.collect_to(ell_max);
                // ℓ = m + ½ + j sits at lattice degree ℓ − (d−1)/2.
                let first = (m.twice + 1 - (d - 1)) as usize / 2;
                for (j, v) in vals.iter().enumerate() {
                    sums[first + j].add(w * v * v);
                }
                m = HalfInt::from_twice(m.twice + 2);
            }
            Ok(sums
                .iter()
                .enumerate()
                .map(|(n, s)| {
                    let ell = HalfInt::of_degree(d, n as u32).value();
                    s.value() / ell.powi(d as i32 - 1)
                })
                .fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    Ok(sups.into_iter().fold(0.0, f64::max))
}
