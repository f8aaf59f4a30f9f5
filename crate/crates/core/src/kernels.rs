//! Zonal kernels, tensor eigenfunctions, and integral kernels of
//! `F(√L_{d,k})`.
//!
//! The joint eigenfunctions are `X_c(ψ) Z(ω)`, with
//! `X_c(ψ) = Π_{r=k+1}^{d} X^r_{ℓ_r, ℓ_{r−1}}(ψ_r)` for a chain `c` and
//! `Z ∈ H^{ℓ_k}(S^k)`. Summing over an orthonormal basis of `H^{ℓ_k}(S^k)` by
//! the addition theorem, the kernel of `F(√L)` is
//!
//! `K(z, z′) = Σ_c F(√λ_c) X_c(ψ) X_c(ψ′) Z_{ℓ_k}(⟨ω, ω′⟩)`
//!
//! with `Z_m` the zonal kernel of `H^m(S^k)`.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::{angle, potential, CylPoint};
use crate::numeric::{compensated_sum, sphere_area};
use crate::quadrature::{psi_rule, zonal_rule, Rule};
use crate::special::jacobi::recurrence_all;
use crate::special::profile::{profile_eval, ProfileIndex, XtildeLadder};
use crate::spectrum::{chains_below, sphere_dim, ChainIndex, HalfInt};

/// A scalar multiplier `F` on `[0, ∞)`, applied as `F(√L)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MultiplierSpec {
    /// `F(s) = exp(−t s²)`, i.e. the heat semigroup `e^{−tL}`.
    Heat { t: f64 },
    /// `F(s) = (1 − t s²)_+^δ`.
    BochnerRiesz { t: f64, delta: f64 },
    /// Indicator of the closed interval `[lo, hi]`.
    Indicator { lo: f64, hi: f64 },
    /// Piecewise-linear interpolation of `(s, F(s))` samples, zero outside
    /// the sampled range.
    Table { points: Vec<(f64, f64)> },
}

impl MultiplierSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            MultiplierSpec::Heat { t } if !(*t > 0.0) => domain("heat time must be positive"),
            MultiplierSpec::BochnerRiesz { t, delta } if !(*t > 0.0 && *delta >= 0.0) => {
                domain("Bochner-Riesz needs t > 0 and delta >= 0")
            }
            MultiplierSpec::Indicator { lo, hi } if !(lo <= hi) => {
                domain("indicator needs lo <= hi")
            }
            MultiplierSpec::Table { points } => {
                if points.is_empty() {
                    return domain("table multiplier needs at least one sample");
                }
                if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
                    return domain("table abscissae must be strictly increasing");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            MultiplierSpec::Heat { t } => (-t * s * s).exp(),
            MultiplierSpec::BochnerRiesz { t, delta } => {
                let base = 1.0 - t * s * s;
                if base <= 0.0 {
                    0.0
                } else if *delta == 0.0 {
                    1.0
                } else {
                    base.powf(*delta)
                }
            }
            MultiplierSpec::Indicator { lo, hi } => {
                if *lo <= s && s <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            MultiplierSpec::Table { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if s < first.0 || s > last.0 {
                    return 0.0;
                }
                let i = points.partition_point(|p| p.0 <= s);
                if i == 0 {
                    return first.1;
                }
                if i == points.len() {
                    return last.1;
                }
                let (x0, y0) = points[i - 1];
                let (x1, y1) = points[i];
                y0 + (y1 - y0) * (s - x0) / (x1 - x0)
            }
        }
    }

    /// `sup_{s > s0} |F(s)|`: the part of the spectrum discarded when the
    /// expansion is truncated at `s0`.
    pub fn tail_sup(&self, s0: f64) -> f64 {
        match self {
            MultiplierSpec::Heat { t } => (-t * s0 * s0).exp(),
            MultiplierSpec::BochnerRiesz { .. } => self.eval(s0).abs(),
            MultiplierSpec::Indicator { hi, .. } => {
                if *hi > s0 {
                    1.0
                } else {
                    0.0
                }
            }
            MultiplierSpec::Table { points } => points
                .iter()
                .filter(|p| p.0 > s0)
                .map(|p| p.1.abs())
                .fold(self.eval(s0).abs(), f64::max),
        }
    }
}

/// `binom(n + a, n)` for real `a`.
fn binom_shifted(n: u32, a: f64) -> f64 {
    (1..=n).map(|i| (a + i as f64) / i as f64).product()
}

/// Zonal kernels `Z_m(u)` of `H^m(S^k)` for all degrees `m′ = 0..=n_max`,
/// with `m = m′ + (k−1)/2`.
pub fn zonal_all(k: u32, n_max: u32, u: f64) -> Vec<f64> {
    let a = (k as f64 - 2.0) / 2.0;
    let sigma = sphere_area(k);
    let p = recurrence_all(n_max, a, a, u);
    p.iter()
        .enumerate()
        .map(|(n, v)| {
            let n = n as u32;
            let dim = sphere_dim(k, HalfInt::of_degree(k, n)).expect("valid degree") as f64;
            dim / sigma * v / binom_shifted(n, a)
        })
        .collect()
}

/// Reproducing kernel of `H^m(S^k)` as a function of `u = ⟨ω, ω′⟩`,
/// normalized so that its diagonal value is `α_m(S^k)/σ(S^k)`.
pub fn zonal_kernel(k: u32, m: HalfInt, u: f64) -> Result<f64> {
    if k < 1 {
        return domain("zonal kernels need k >= 1");
    }
    let n = m.degree(k)?;
    if !(u.abs() <= 1.0) {
        return domain(format!("cos_theta must satisfy |u| <= 1, got {u}"));
    }
    Ok(zonal_all(k, n, u)[n as usize])
}

fn check_psi(d: u32, k: u32, psi: &[f64]) -> Result<()> {
    if psi.len() != (d - k) as usize {
        return domain(format!("expected {} psi coordinates, got {}", d - k, psi.len()));
    }
    if let Some(bad) = psi.iter().find(|p| !(p.abs() <= FRAC_PI_2)) {
        return domain(format!("psi coordinates must lie in [-pi/2, pi/2], got {bad}"));
    }
    Ok(())
}

fn factor_index(c: &ChainIndex, r: u32) -> ProfileIndex {
    ProfileIndex {
        d: r,
        ell: c.at(r),
        m: c.at(r - 1),
    }
}

/// `X_c(ψ) = Π_r X^r_{ℓ_r, ℓ_{r−1}}(ψ_r)` with `ψ = (ψ_{k+1}, …, ψ_d)`.
pub fn chain_eigenfunction(c: &ChainIndex, psi: &[f64]) -> Result<f64> {
    check_psi(c.d, c.k, psi)?;
    let mut v = 1.0;
    for r in (c.k + 1)..=c.d {
        v *= profile_eval(factor_index(c, r), psi[(r - c.k - 1) as usize])?;
    }
    Ok(v)
}

/// `L_{d,k}` applied to `X_c ⊗ Z` by finite differences in `ψ`, the `Δ_k`
/// factor through its exact eigenvalue. Returns
/// `|L f − λ f| / (|λ| |f| + 1)` at `ψ`.
///
/// Each `Y_r^+ Y_r` is discretized in the single-variable divergence form
/// `−g_r² cos^{1−r}ψ_r ∂_r(cos^{r−1}ψ_r ∂_r)` with half-step central
/// differences, which is second order in `h`.
pub fn apply_grushin_residual(c: &ChainIndex, psi: &[f64], h: f64) -> Result<f64> {
    check_psi(c.d, c.k, psi)?;
    if let Some(bad) = psi.iter().find(|p| !(p.abs() + h < FRAC_PI_2)) {
        return domain(format!("psi = {bad} is too close to the boundary for step {h}"));
    }
    if !(h > 0.0) {
        return domain("finite-difference step must be positive");
    }
    let k = c.k;
    let factors: Vec<f64> = ((k + 1)..=c.d)
        .map(|r| profile_eval(factor_index(c, r), psi[(r - k - 1) as usize]))
        .collect::<Result<_>>()?;
    let f0: f64 = factors.iter().product();
    let mut lf = 0.0;
    for r in (k + 1)..=c.d {
        let i = (r - k - 1) as usize;
        let others: f64 = factors
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| v)
            .product();
        let p = factor_index(c, r);
        let x = psi[i];
        let f = |t: f64| profile_eval(p, t).map(|v| v * others);
        let (fm, fp) = (f(x - h)?, f(x + h)?);
        let w = |t: f64| t.cos().powi(r as i32 - 1);
        let d_plus = w(x + 0.5 * h) * (fp - f0) / h;
        let d_minus = w(x - 0.5 * h) * (f0 - fm) / h;
        let second = (d_plus - d_minus) / h / w(x);
        let g_sq: f64 = psi[i + 1..].iter().map(|t| 1.0 / (t.cos() * t.cos())).product();
        lf -= g_sq * second;
    }
    lf += potential(psi)? * c.level_eigenvalue(k) * f0;
    let lambda = c.eigenvalue();
    Ok((lf - lambda * f0).abs() / (lambda.abs() * f0.abs() + 1.0))
}

/// Ladder tables for one `ψ_r` axis: every `(ℓ_r, ℓ_{r−1})` pair used by a
/// set of chains, laid out contiguously per `ℓ_{r−1}`.
#[derive(Clone, Debug)]
pub(crate) struct AxisPlan {
    r: u32,
    /// `(2ℓ_{r−1}, offset, length)`.
    slots: Vec<(u32, usize, usize)>,
    total: usize,
}

impl AxisPlan {
    pub(crate) fn build(r: u32, chains: &[&ChainIndex]) -> Self {
        let mut need: std::collections::BTreeMap<u32, u32> = Default::default();
        for c in chains {
            let m = c.at(r - 1).twice;
            let l = c.at(r).twice;
            let e = need.entry(m).or_insert(l);
            *e = (*e).max(l);
        }
        let mut slots = Vec::with_capacity(need.len());
        let mut total = 0;
        for (m, l) in need {
            let len = ((l - m - 1) / 2 + 1) as usize;
            slots.push((m, total, len));
            total += len;
        }
        AxisPlan { r, slots, total }
    }

    pub(crate) fn index(&self, c: &ChainIndex) -> usize {
        let m = c.at(self.r - 1).twice;
        let l = c.at(self.r).twice;
        let pos = self.slots.partition_point(|s| s.0 < m);
        self.slots[pos].1 + ((l - m - 1) / 2) as usize
    }

    /// `X^r_{ℓ,m}(ψ)` for every planned pair.
    pub(crate) fn table(&self, psi: f64) -> Vec<f64> {
        self.fill(|m| XtildeLadder::for_angle(self.r, m, psi))
    }

    /// `X̃^r_{ℓ,m}(x)` for every planned pair.
    pub(crate) fn table_x(&self, x: f64) -> Vec<f64> {
        self.fill(|m| XtildeLadder::new(self.r, m, x))
    }

    fn fill(&self, start: impl Fn(HalfInt) -> Result<XtildeLadder>) -> Vec<f64> {
        let mut out = vec![0.0; self.total];
        for &(m, base, len) in &self.slots {
            let mut ladder = start(HalfInt::from_twice(m)).expect("planned indices are valid");
            for slot in out[base..base + len].iter_mut() {
                *slot = ladder.value();
                ladder.step();
            }
        }
        out
    }

    fn ell_max(&self) -> f64 {
        self.slots
            .iter()
            .map(|&(m, _, len)| (m + 1 + 2 * (len as u32 - 1)) as f64 / 2.0)
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
struct Term {
    coef: f64,
    /// Flat table index per axis, innermost axis first.
    idx: Vec<usize>,
    group: usize,
}

/// Default relative threshold below which chain coefficients are dropped.
pub const DEFAULT_PRUNE: f64 = 1e-14;

/// A finite sum `Σ_c a_c X_c(ψ) Y_{ℓ_k}(ω)`, stored grouped by `ℓ_k` so that
/// the `ψ` part `G_m(ψ) = Σ_{c : ℓ_k = m} a_c X_c(ψ)` can be evaluated with
/// one ladder per `(axis, ℓ_{r−1})` pair.
#[derive(Clone, Debug)]
pub struct ChainSeries {
    pub d: u32,
    pub k: u32,
    /// Distinct `ℓ_k` values present, ascending.
    pub groups: Vec<HalfInt>,
    axes: Vec<AxisPlan>,
    terms: Vec<Term>,
}

impl ChainSeries {
    /// Builds the series from `(chain, a_c)` pairs. Chains must share `(d, k)`.
    pub fn new(d: u32, k: u32, coefficients: &[(ChainIndex, f64)]) -> Result<Self> {
        if let Some((c, _)) = coefficients.iter().find(|(c, _)| c.d != d || c.k != k) {
            return domain(format!("chain {c} does not belong to (d, k) = ({d}, {k})"));
        }
        let refs: Vec<&ChainIndex> = coefficients.iter().map(|(c, _)| c).collect();
        let axes: Vec<AxisPlan> = ((k + 1)..=d).map(|r| AxisPlan::build(r, &refs)).collect();
        let mut groups: Vec<HalfInt> = coefficients.iter().map(|(c, _)| c.bottom()).collect();
        groups.sort();
        groups.dedup();
        let terms = coefficients
            .iter()
            .map(|(c, coef)| Term {
                coef: *coef,
                idx: axes.iter().map(|a| a.index(c)).collect(),
                group: groups.binary_search(&c.bottom()).expect("present"),
            })
            .collect();
        Ok(ChainSeries {
            d,
            k,
            groups,
            axes,
            terms,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `ℓ_r` per axis, innermost first.
    pub fn ell_max_per_axis(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.ell_max()).collect()
    }

    /// Largest zonal degree `ℓ_k − (k−1)/2`.
    pub fn zonal_degree_max(&self) -> u32 {
        self.groups
            .last()
            .map(|m| m.degree(self.k).expect("valid"))
            .unwrap_or(0)
    }

    fn g_from_tables(&self, tables: &[&[f64]]) -> Vec<f64> {
        let mut g = vec![0.0; self.groups.len()];
        for t in &self.terms {
            let mut v = t.coef;
            for (i, tab) in tables.iter().enumerate() {
                v *= tab[t.idx[i]];
            }
            g[t.group] += v;
        }
        g
    }

    /// `G_m(ψ)` for every group.
    pub fn g_at(&self, psi: &[f64]) -> Vec<f64> {
        let tables: Vec<Vec<f64>> = self
            .axes
            .iter()
            .enumerate()
            .map(|(i, a)| a.table(psi[i]))
            .collect();
        let refs: Vec<&[f64]> = tables.iter().map(|t| t.as_slice()).collect();
        self.g_from_tables(&refs)
    }

    /// Zonal kernels `Z_m(u)` for every group.
    pub fn zonal_row(&self, u: f64) -> Vec<f64> {
        let all = zonal_all(self.k, self.zonal_degree_max(), u);
        self.groups
            .iter()
            .map(|m| all[m.degree(self.k).expect("valid") as usize])
            .collect()
    }

    /// Visits every node of the product `ψ` grid, passing the node, its
    /// weight, and the group values `G_m` there. Results are returned in
    /// node order.
    pub fn map_psi_grid<T, F>(&self, rules: &[Rule], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[f64], f64, &[f64]) -> T + Sync,
    {
        let n_axes = self.axes.len();
        assert_eq!(rules.len(), n_axes);
        let outer = n_axes - 1;
        // Inner axes are tabulated once; the outermost axis is streamed.
        let inner_tables: Vec<Vec<Vec<f64>>> = (0..outer)
            .map(|i| rules[i].nodes.iter().map(|&x| self.axes[i].table(x)).collect())
            .collect();
        let inner_sizes: Vec<usize> = (0..outer).map(|i| rules[i].len()).collect();
        let inner_count: usize = inner_sizes.iter().product();
        let per_outer: Vec<Vec<T>> = (0..rules[outer].len())
            .into_par_iter()
            .map(|jo| {
                let xo = rules[outer].nodes[jo];
                let wo = rules[outer].weights[jo];
                let outer_table = self.axes[outer].table(xo);
                let mut out = Vec::with_capacity(inner_count);
                let mut idx = vec![0usize; outer];
                for _ in 0..inner_count {
                    let mut psi = Vec::with_capacity(n_axes);
                    let mut w = wo;
                    let mut tabs: Vec<&[f64]> = Vec::with_capacity(n_axes);
                    for i in 0..outer {
                        psi.push(rules[i].nodes[idx[i]]);
                        w *= rules[i].weights[idx[i]];
                        tabs.push(&inner_tables[i][idx[i]]);
                    }
                    psi.push(xo);
                    tabs.push(&outer_table);
                    let g = self.g_from_tables(&tabs);
                    out.push(f(&psi, w, &g));
                    for i in 0..outer {
                        idx[i] += 1;
                        if idx[i] < inner_sizes[i] {
                            break;
                        }
                        idx[i] = 0;
                    }
                }
                out
            })
            .collect();
        per_outer.into_iter().flatten().collect()
    }

    /// Gauss rules on every `ψ` axis with order `scale·ℓ_max + pad`.
    pub fn psi_rules(&self, scale: usize, pad: usize) -> Result<Vec<Rule>> {
        self.axes
            .iter()
            .map(|a| psi_rule(a.r, scale * a.ell_max().ceil() as usize + pad))
            .collect()
    }

    /// Zonal rule of order `scale·(max degree) + pad`.
    pub fn u_rule(&self, scale: usize, pad: usize) -> Result<Rule> {
        zonal_rule(self.k, scale * self.zonal_degree_max() as usize + pad)
    }
}

/// The column `z ↦ K_{F(√L)}(z, q)` expanded over chains, with coefficients
/// `a_c = F(√λ_c) X_c(ψ_q)` and `Y_m = Z_m(⟨·, ω_q⟩)`.
#[derive(Clone, Debug)]
pub struct ColumnExpansion {
    pub q: CylPoint,
    pub series: ChainSeries,
    /// `Σ |a_c|² α_{ℓ_k}(S^k) / σ(S^k)`, the squared column norm.
    pub closed_l2_sq: f64,
    /// Sup of `|F|` beyond the truncation, see [`MultiplierSpec::tail_sup`].
    pub tail_sup: f64,
}

impl ColumnExpansion {
    /// Expansion over chains with `λ ≤ lambda_max²`, dropping coefficients
    /// below `prune · max |a_c|`.
    pub fn new(f: &MultiplierSpec, q: &CylPoint, lambda_max: f64, prune: f64) -> Result<Self> {
        f.validate()?;
        let (d, k) = (q.d(), q.k());
        if !(lambda_max >= 0.0) {
            return domain("lambda_max must be nonnegative");
        }
        let all: Vec<(ChainIndex, f64)> = chains_below(d, k, lambda_max * lambda_max, None)?
            .into_iter()
            .map(|c| {
                let fv = f.eval(c.eigenvalue().sqrt());
                (c, fv)
            })
            .filter(|(_, fv)| *fv != 0.0)
            .collect();
        let probe = ChainSeries::new(d, k, &all)?;
        let tables: Vec<Vec<f64>> = probe
            .axes
            .iter()
            .enumerate()
            .map(|(i, a)| a.table(q.psi[i]))
            .collect();
        let coefs: Vec<f64> = probe
            .terms
            .iter()
            .map(|t| t.coef * t.idx.iter().zip(&tables).map(|(i, tab)| tab[*i]).product::<f64>())
            .collect();
        let biggest = coefs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let kept: Vec<(ChainIndex, f64)> = all
            .into_iter()
            .zip(coefs)
            .filter(|(_, coef)| *coef != 0.0 && coef.abs() > prune * biggest)
            .map(|((c, _), coef)| (c, coef))
            .collect();
        let sigma = sphere_area(k);
        let closed = compensated_sum(kept.iter().map(|(c, coef)| {
            coef * coef * sphere_dim(k, c.bottom()).expect("valid") as f64 / sigma
        }));
        Ok(ColumnExpansion {
            q: q.clone(),
            series: ChainSeries::new(d, k, &kept)?,
            closed_l2_sq: closed,
            tail_sup: f.tail_sup(lambda_max),
        })
    }

    pub fn chain_count(&self) -> usize {
        self.series.len()
    }

    /// `K(p, q)`.
    pub fn eval(&self, p: &CylPoint) -> Result<f64> {
        if p.d() != self.series.d || p.k() != self.series.k {
            return domain("point and kernel dimensions differ");
        }
        let g = self.series.g_at(&p.psi);
        let u = angle(&p.omega, &self.q.omega).cos().clamp(-1.0, 1.0);
        let z = self.series.zonal_row(u);
        Ok(compensated_sum(g.iter().zip(&z).map(|(a, b)| a * b)))
    }

    /// `∫ w(ψ) |K(z, q)|² dσ(z)` for a weight depending only on `ψ`, using
    /// orthogonality of the zonal kernels on `S^k`.
    pub fn weighted_l2_sq<W>(&self, rules: &[Rule], weight: W) -> f64
    where
        W: Fn(&[f64]) -> f64 + Sync,
    {
        let s = &self.series;
        let sigma = sphere_area(s.k);
        let dims: Vec<f64> = s
            .groups
            .iter()
            .map(|m| sphere_dim(s.k, *m).expect("valid") as f64 / sigma)
            .collect();
        let parts = s.map_psi_grid(rules, |psi, w, g| {
            let v = compensated_sum(g.iter().zip(&dims).map(|(v, a)| a * v * v));
            w * weight(psi) * v
        });
        compensated_sum(parts)
    }

    /// `∫ |K(z, q)|^p dσ(z)` by a full product rule in `(ψ, u)`.
    pub fn column_lp(&self, p: f64, psi_rules: &[Rule], u_rule: &Rule) -> f64 {
        let s = &self.series;
        let z: Vec<Vec<f64>> = u_rule.nodes.iter().map(|&u| s.zonal_row(u)).collect();
        let parts = s.map_psi_grid(psi_rules, |_, w, g| {
            let v = compensated_sum(z.iter().zip(&u_rule.weights).map(|(row, wu)| {
                let kv: f64 = row.iter().zip(g).map(|(a, b)| a * b).sum();
                wu * kv.abs().powf(p)
            }));
            w * v
        });
        compensated_sum(parts)
    }
}

/// `K_{F(√L)}(p, q)` summed over chains with `λ ≤ lambda_max²`.
pub fn multiplier_kernel(
    f: &MultiplierSpec,
    lambda_max: f64,
    p: &CylPoint,
    q: &CylPoint,
) -> Result<f64> {
    ColumnExpansion::new(f, q, lambda_max, 0.0)?.eval(p)
}

/// Closed-form `‖K(·, q)‖₂` from the eigenvalue sum.
pub fn kernel_column_l2(f: &MultiplierSpec, q: &CylPoint, lambda_max: f64) -> Result<f64> {
    Ok(ColumnExpansion::new(f, q, lambda_max, 0.0)?.closed_l2_sq.sqrt())
}

/// Direct quadrature of `‖K(·, q)‖₂`, independent of the orthogonality used
/// by [`kernel_column_l2`].
pub fn kernel_column_l2_quadrature(
    f: &MultiplierSpec,
    q: &CylPoint,
    lambda_max: f64,
) -> Result<f64> {
    let col = ColumnExpansion::new(f, q, lambda_max, 0.0)?;
    let rules = col.series.psi_rules(2, 16)?;
    let u = col.series.u_rule(2, 16)?;
    Ok(col.column_lp(2.0, &rules, &u).sqrt())
}

/// `‖G‖_{N,q} = (N^{−1} Σ_i sup_{[(i−1)/N, i/N]} |G|^q)^{1/q}` on `[0, 1]`,
/// each sup taken over `samples_per_cell ≥ 64` points including the cell
/// endpoints. `q = ∞` gives the global sup.
pub fn norm_nq<G: Fn(f64) -> f64>(g: G, n: u32, q: f64, samples_per_cell: usize) -> Result<f64> {
    if n < 1 {
        return domain("N must be >= 1");
    }
    if !(q >= 1.0) {
        return domain("exponent q must be >= 1");
    }
    let s = samples_per_cell.max(64);
    let nf = n as f64;
    let sups: Vec<f64> = (0..n)
        .map(|i| {
            (0..=s)
                .map(|j| g((i as f64 + j as f64 / s as f64) / nf).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    if q.is_infinite() {
        return Ok(sups.iter().cloned().fold(0.0, f64::max));
    }
    Ok((sups.iter().map(|v| v.powf(q)).sum::<f64>() / nf).powf(1.0 / q))
}

/// `‖F‖_{N,q}` for a multiplier restricted to `[0, 1]`.
pub fn norm_nq_spec(f: &MultiplierSpec, n: u32, q: f64) -> Result<f64> {
    f.validate()?;
    norm_nq(|x| f.eval(x), n, q, 64)
}

/// `max_q ∫ |K(·, q)| dσ` over the given centres, a lower bound for the
/// `L¹ → L¹` norm of `F(√L)` truncated at `lambda_max`. Also returns the
/// per-centre values.
pub fn l1_operator_norm(
    f: &MultiplierSpec,
    lambda_max: f64,
    centers: &[CylPoint],
) -> Result<(f64, Vec<f64>)> {
    let mut values = Vec::with_capacity(centers.len());
    for q in centers {
        let col = ColumnExpansion::new(f, q, lambda_max, DEFAULT_PRUNE)?;
        if col.series.is_empty() {
            values.push(0.0);
            continue;
        }
        let rules = col.series.psi_rules(4, 32)?;
        let u = col.series.u_rule(4, 32)?;
        values.push(col.column_lp(1.0, &rules, &u));
    }
    Ok((values.iter().cloned().fold(0.0, f64::max), values))
}
