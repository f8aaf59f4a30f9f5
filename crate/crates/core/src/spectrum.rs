//! Index lattices, eigenvalues, eigenspace dimensions and chain enumeration.
//!
//! Every index lives in a shifted lattice `ℕ_j = ℕ + (j−1)/2` and is stored as
//! an exact twice-value integer. Eigenvalues `λ^j_ℓ = ℓ² − ((j−1)/2)²` are
//! then always integers, so all spectral bookkeeping is exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// A nonnegative half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInt {
    pub twice: u32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };

    pub const fn from_twice(twice: u32) -> Self {
        HalfInt { twice }
    }

    pub const fn from_int(n: u32) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// Smallest element of `ℕ_d`, namely `(d−1)/2`.
    pub const fn base(d: u32) -> Self {
        HalfInt { twice: d - 1 }
    }

    /// Whether the value lies in `ℕ_d`.
    pub fn in_lattice(self, d: u32) -> bool {
        d >= 1 && self.twice >= d - 1 && (self.twice - (d - 1)) % 2 == 0
    }

    /// The degree `ℓ′ = ℓ − (d−1)/2` of an index in `ℕ_d`.
    pub fn degree(self, d: u32) -> Result<u32> {
        if !self.in_lattice(d) {
            return domain(format!("{self} is not in N_{d}"));
        }
        Ok((self.twice - (d - 1)) / 2)
    }

    /// The element of `ℕ_d` of degree `n`.
    pub const fn of_degree(d: u32, n: u32) -> Self {
        HalfInt {
            twice: d - 1 + 2 * n,
        }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// `λ^d_ℓ · 1` as an exact integer.
fn laplace_eigenvalue_int(d: u32, twice_ell: u32) -> i64 {
    let l = twice_ell as i64;
    let b = d as i64 - 1;
    (l * l - b * b) / 4
}

/// Eigenvalue `λ^d_ℓ = ℓ² − ((d−1)/2)²` of the Laplace–Beltrami operator on `S^d`.
pub fn laplace_eigenvalue(d: u32, ell: HalfInt) -> Result<f64> {
    ell.degree(d)?;
    Ok(laplace_eigenvalue_int(d, ell.twice) as f64)
}

/// Whether `(ℓ, m)` belongs to `I_d^{(k)}`.
pub fn in_grushin_lattice(d: u32, k: u32, ell: HalfInt, m: HalfInt) -> bool {
    k >= 1
        && k < d
        && ell.in_lattice(d)
        && m.in_lattice(k)
        && ell.twice >= m.twice + (d - k)
}

/// Exact Grushin eigenvalue `λ^d_ℓ − λ^k_m` as an integer.
pub fn grushin_eigenvalue_int(d: u32, k: u32, ell: HalfInt, m: HalfInt) -> Result<i64> {
    if !in_grushin_lattice(d, k, ell, m) {
        return domain(format!(
            "({ell}, {m}) is not an admissible index pair for (d, k) = ({d}, {k})"
        ));
    }
    Ok(laplace_eigenvalue_int(d, ell.twice) - laplace_eigenvalue_int(k, m.twice))
}

/// Eigenvalue `λ^{d,k}_{ℓ,m} = λ^d_ℓ − λ^k_m` of `L_{d,k}`.
pub fn grushin_eigenvalue(d: u32, k: u32, ell: HalfInt, m: HalfInt) -> Result<f64> {
    grushin_eigenvalue_int(d, k, ell, m).map(|v| v as f64)
}

fn binom_u128(n: u64, r: u64) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // Exact at every step: acc · (n−i) is divisible by (i+1).
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension `α_ℓ(S^d)` of the space of spherical harmonics of degree
/// `ℓ − (d−1)/2` on `S^d`.
pub fn sphere_dim(d: u32, ell: HalfInt) -> Result<u128> {
    let n = ell.degree(d)? as u64;
    let d = d as u64;
    let top = binom_u128(n + d, n);
    let low = if n >= 2 { binom_u128(n + d - 2, n - 2) } else { 0 };
    Ok(top - low)
}

/// A decreasing chain `ℓ_d ≥ ℓ_{d−1} ≥ … ≥ ℓ_k` with `ℓ_j ∈ ℕ_j`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChainIndex {
    pub d: u32,
    pub k: u32,
    /// Entries ordered `ℓ_d, ℓ_{d−1}, …, ℓ_k`.
    pub ell: Vec<HalfInt>,
}

impl ChainIndex {
    pub fn new(d: u32, k: u32, ell: Vec<HalfInt>) -> Result<Self> {
        if !(1 <= k && k < d) {
            return domain(format!("need 1 <= k < d, got (d, k) = ({d}, {k})"));
        }
        if ell.len() != (d - k + 1) as usize {
            return domain(format!(
                "chain for (d, k) = ({d}, {k}) needs {} entries, got {}",
                d - k + 1,
                ell.len()
            ));
        }
        for (pos, l) in ell.iter().enumerate() {
            let j = d - pos as u32;
            if !l.in_lattice(j) {
                return domain(format!("chain entry {l} is not in N_{j}"));
            }
        }
        if ell.windows(2).any(|w| w[0] < w[1]) {
            return domain("chain entries must be nonincreasing");
        }
        Ok(ChainIndex { d, k, ell })
    }

    /// The chain of minimal indices, `ℓ_j = (j−1)/2`.
    pub fn minimal(d: u32, k: u32) -> Self {
        ChainIndex {
            d,
            k,
            ell: (k..=d).rev().map(HalfInt::base).collect(),
        }
    }

    /// `ℓ_j` for `k ≤ j ≤ d`.
    pub fn at(&self, j: u32) -> HalfInt {
        self.ell[(self.d - j) as usize]
    }

    pub fn top(&self) -> HalfInt {
        self.ell[0]
    }

    pub fn bottom(&self) -> HalfInt {
        *self.ell.last().expect("chains are nonempty")
    }

    /// Exact eigenvalue of `L_{d,k}` on this chain.
    pub fn eigenvalue_int(&self) -> i64 {
        laplace_eigenvalue_int(self.d, self.top().twice)
            - laplace_eigenvalue_int(self.k, self.bottom().twice)
    }

    pub fn eigenvalue(&self) -> f64 {
        self.eigenvalue_int() as f64
    }

    /// `λ^j_{ℓ_j}` for a level `j` of the chain.
    pub fn level_eigenvalue(&self, j: u32) -> f64 {
        laplace_eigenvalue_int(j, self.at(j).twice) as f64
    }

    /// CSV row `d,k,2ℓ_d,…,2ℓ_k,λ`.
    pub fn csv_row(&self) -> String {
        let mut s = format!("{},{}", self.d, self.k);
        for l in &self.ell {
            s.push_str(&format!(",{}", l.twice));
        }
        s.push_str(&format!(",{}", self.eigenvalue_int()));
        s
    }
}

impl fmt::Display for ChainIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.ell.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    All,
    /// `ℓ_k ≤ εℓ_d`.
    Elliptic,
    /// `ℓ_k ≥ εℓ_d`.
    Subelliptic,
}

impl Regime {
    /// Regime membership. Ties `ℓ_k = εℓ_d` belong to both restricted regimes.
    pub fn admits(self, ell: HalfInt, m: HalfInt, epsilon: f64) -> bool {
        let l = ell.value();
        let m = m.value();
        let gap = m - epsilon * l;
        let tie = gap.abs() <= 1e-12 * l.max(1.0);
        match self {
            Regime::All => true,
            Regime::Elliptic => tie || gap < 0.0,
            Regime::Subelliptic => tie || gap > 0.0,
        }
    }
}

/// Default regime threshold `max{1/2, (k−1)/(d−1)}`.
pub fn default_epsilon(d: u32, k: u32) -> f64 {
    f64::max(0.5, (k as f64 - 1.0) / (d as f64 - 1.0))
}

/// Eigenvalues of `L_{d,k}` in `[i², (i+span)²)`, restricted to a regime.
///
/// `span = 1` is the unit spectral cluster. The window is closed on the left
/// and open on the right so adjacent windows tile the spectrum exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub i: u32,
    pub span: u32,
    pub regime: Regime,
    pub epsilon: f64,
}

impl SpectralWindow {
    pub fn new(i: u32, regime: Regime, epsilon: f64) -> Result<Self> {
        Self::with_span(i, 1, regime, epsilon)
    }

    pub fn with_span(i: u32, span: u32, regime: Regime, epsilon: f64) -> Result<Self> {
        if i < 1 {
            return domain("spectral window index must be >= 1");
        }
        if span < 1 {
            return domain("spectral window span must be >= 1");
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return domain(format!("regime epsilon must lie in (0, 1), got {epsilon}"));
        }
        Ok(SpectralWindow {
            i,
            span,
            regime,
            epsilon,
        })
    }

    /// Closed integer range of admissible eigenvalues.
    pub fn eigen_range(&self) -> (i64, i64) {
        let lo = self.i as i64;
        let hi = (self.i + self.span) as i64;
        (lo * lo, hi * hi - 1)
    }

    pub fn contains(&self, c: &ChainIndex) -> bool {
        let (lo, hi) = self.eigen_range();
        let lam = c.eigenvalue_int();
        lo <= lam && lam <= hi && self.regime.admits(c.top(), c.bottom(), self.epsilon)
    }
}

/// All chains of `J_d^{(k)}` whose eigenvalue lies in a spectral window,
/// in lexicographic order of `(ℓ_d, ℓ_{d−1}, …, ℓ_k)`.
pub fn enumerate_chains(
    d: u32,
    k: u32,
    window: &SpectralWindow,
) -> Result<impl Iterator<Item = ChainIndex>> {
    let (lo, hi) = window.eigen_range();
    let w = *window;
    Ok(chains_in_range(d, k, lo, hi, None)?
        .filter(move |c| w.regime.admits(c.top(), c.bottom(), w.epsilon)))
}

/// All chains with `λ^{d,k} ≤ lambda_sq_max`, optionally capping `ℓ_d`.
pub fn chains_below(
    d: u32,
    k: u32,
    lambda_sq_max: f64,
    ell_cap: Option<HalfInt>,
) -> Result<Vec<ChainIndex>> {
    if !(lambda_sq_max >= 0.0) {
        return domain("eigenvalue cap must be nonnegative");
    }
    let hi = lambda_sq_max.floor() as i64;
    Ok(chains_in_range(d, k, 0, hi, ell_cap)?.collect())
}

/// All chains with `lo ≤ λ^{d,k} ≤ hi`.
pub fn chains_in_range(
    d: u32,
    k: u32,
    lo: i64,
    hi: i64,
    ell_cap: Option<HalfInt>,
) -> Result<impl Iterator<Item = ChainIndex>> {
    if !(1 <= k && k < d) {
        return domain(format!("need 1 <= k < d, got (d, k) = ({d}, {k})"));
    }
    let gap = (d - k) as i64;
    let bd = d as i64 - 1;
    let bk = k as i64 - 1;
    // 4λ at the smallest admissible m for a given L = 2ℓ_d is the largest λ for
    // that ℓ_d; at the largest m it is the smallest and it grows with L, which
    // bounds the outer loop.
    let min_four_lambda = move |big_l: i64| {
        let big_m = big_l - gap;
        big_l * big_l - bd * bd - big_m * big_m + bk * bk
    };
    let cap = ell_cap.map(|c| c.twice as i64).unwrap_or(i64::MAX);
    let tops = (0..)
        .map(move |n: i64| bd + 2 * n)
        .take_while(move |&big_l| big_l <= cap && min_four_lambda(big_l) <= 4 * hi);
    Ok(tops.flat_map(move |big_l| {
        // Admissible M = 2ℓ_k for this L: 4lo ≤ L² − bd² − M² + bk² ≤ 4hi.
        let base = big_l * big_l - bd * bd + bk * bk;
        let m_max_sq = base - 4 * lo;
        let m_min_sq = base - 4 * hi;
        let mut m_lo = bk;
        while m_lo * m_lo < m_min_sq {
            m_lo += 2;
        }
        let mut m_hi = big_l - gap;
        while m_hi >= m_lo && m_hi * m_hi > m_max_sq {
            m_hi -= 2;
        }
        let mut out = Vec::new();
        if m_hi >= m_lo {
            let mut stack = vec![HalfInt::from_twice(big_l as u32)];
            fill_interior(d, k, d - 1, m_lo, m_hi, &mut stack, &mut out);
        }
        out.into_iter()
    }))
}

/// Extends a partial chain `ℓ_d, …, ℓ_{j+1}` by all admissible `ℓ_j, …, ℓ_k`
/// with `m_lo ≤ 2ℓ_k ≤ m_hi`.
fn fill_interior(
    d: u32,
    k: u32,
    j: u32,
    m_lo: i64,
    m_hi: i64,
    stack: &mut Vec<HalfInt>,
    out: &mut Vec<ChainIndex>,
) {
    let prev = stack.last().unwrap().twice as i64;
    // Entries at level j have parity j−1 and sit at least (j−k)/2 above ℓ_k.
    let lowest = (j as i64 - 1).max(m_lo + (j - k) as i64);
    let highest = if j == k { m_hi.min(prev - 1) } else { prev - 1 };
    let mut t = lowest;
    if (t - (j as i64 - 1)).rem_euclid(2) != 0 {
        t += 1;
    }
    while t <= highest {
        stack.push(HalfInt::from_twice(t as u32));
        if j == k {
            out.push(ChainIndex {
                d,
                k,
                ell: stack.clone(),
            });
        } else {
            fill_interior(d, k, j - 1, m_lo, m_hi, stack, out);
        }
        stack.pop();
        t += 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(twice: u32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(laplace_eigenvalue(3, h(2)).unwrap(), 0.0);
        assert_eq!(laplace_eigenvalue(2, h(3)).unwrap(), 2.0);
        assert_eq!(laplace_eigenvalue(5, h(8)).unwrap(), 12.0);
        assert!(laplace_eigenvalue(2, h(2)).is_err());
        assert_eq!(grushin_eigenvalue(2, 1, h(1), h(0)).unwrap(), 0.25 - 0.25);
        assert_eq!(grushin_eigenvalue(3, 1, h(4), h(2)).unwrap(), 2.0);
        assert!(grushin_eigenvalue(3, 1, h(2), h(2)).is_err());
    }

    #[test]
    fn zero_eigenvalue_only_on_constants() {
        for d in 2..=5 {
            for k in 1..d {
                let zeros: Vec<_> = chains_below(d, k, 0.0, None).unwrap();
                assert_eq!(zeros, vec![ChainIndex::minimal(d, k)]);
            }
        }
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(sphere_dim(2, HalfInt::of_degree(2, 3)).unwrap(), 7);
        assert_eq!(sphere_dim(3, HalfInt::of_degree(3, 2)).unwrap(), 9);
        assert_eq!(sphere_dim(1, HalfInt::of_degree(1, 0)).unwrap(), 1);
        assert_eq!(sphere_dim(1, HalfInt::of_degree(1, 5)).unwrap(), 2);
    }

    /// Dimension of degree-n harmonic polynomials in `dim` variables, counted
    /// as monomials of degree n minus monomials of degree n−2.
    fn harmonic_count(dim: u32, n: u32) -> u128 {
        fn monomials(vars: u32, deg: i64) -> u128 {
            if deg < 0 {
                return 0;
            }
            if vars == 1 {
                return 1;
            }
            (0..=deg).map(|e| monomials(vars - 1, deg - e)).sum()
        }
        monomials(dim, n as i64) - monomials(dim, n as i64 - 2)
    }

    #[test]
    fn dimension_matches_monomial_count() {
        for d in 1..=5 {
            for n in 0..12 {
                assert_eq!(
                    sphere_dim(d, HalfInt::of_degree(d, n)).unwrap(),
                    harmonic_count(d + 1, n),
                    "d={d} n={n}"
                );
            }
        }
    }

    #[test]
    fn dimension_growth_is_polynomial() {
        for d in 2..=6u32 {
            let ratios: Vec<f64> = (10..=200)
                .map(|n| {
                    let ell = HalfInt::of_degree(d, n);
                    sphere_dim(d, ell).unwrap() as f64 / ell.value().powi(d as i32 - 1)
                })
                .collect();
            let max = ratios.iter().cloned().fold(0.0, f64::max);
            let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min > 0.0 && max / min < 4.0, "d={d}: {min} {max}");
        }
    }

    fn brute_force(d: u32, k: u32, w: &SpectralWindow, max_twice: u32) -> Vec<ChainIndex> {
        fn rec(
            d: u32,
            k: u32,
            j: u32,
            max_twice: u32,
            stack: &mut Vec<HalfInt>,
            out: &mut Vec<ChainIndex>,
        ) {
            for t in 0..=max_twice {
                let l = h(t);
                if !l.in_lattice(j) || stack.last().is_some_and(|p| *p < l) {
                    continue;
                }
                stack.push(l);
                if j == k {
                    out.push(ChainIndex::new(d, k, stack.clone()).unwrap());
                } else {
                    rec(d, k, j - 1, max_twice, stack, out);
                }
                stack.pop();
            }
        }
        let mut all = Vec::new();
        rec(d, k, d, max_twice, &mut Vec::new(), &mut all);
        all.retain(|c| w.contains(c));
        all.sort();
        all
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for &(d, k) in &[(2, 1), (3, 1), (3, 2), (4, 2)] {
            for i in 1..=16 {
                for regime in [Regime::All, Regime::Elliptic, Regime::Subelliptic] {
                    let w = SpectralWindow::new(i, regime, default_epsilon(d, k)).unwrap();
                    let fast: Vec<_> = enumerate_chains(d, k, &w).unwrap().collect();
                    let mut sorted = fast.clone();
                    sorted.sort();
                    assert_eq!(fast, sorted, "lexicographic order");
                    // ℓ_d ≤ λ + const in every window, so this cap is generous.
                    let cap = 2 * ((i + 1) * (i + 1) + d) + 2;
                    assert_eq!(fast, brute_force(d, k, &w, cap), "d={d} k={k} i={i}");
                }
            }
        }
    }

    #[test]
    fn window_example_d2_i4() {
        let w = SpectralWindow::new(4, Regime::All, 0.5).unwrap();
        let fast = enumerate_chains(2, 1, &w).unwrap().count();
        let mut brute = 0;
        for lt in (1..=100u32).step_by(2) {
            for mt in (0..lt).step_by(2) {
                let lam = grushin_eigenvalue(2, 1, h(lt), h(mt)).unwrap();
                if (16.0..25.0).contains(&lam) {
                    brute += 1;
                }
            }
        }
        assert_eq!(fast, brute);
        assert!(fast > 0);
    }

    #[test]
    fn regimes_cover_all() {
        for &(d, k) in &[(2, 1), (3, 1), (3, 2), (4, 2)] {
            let eps = default_epsilon(d, k);
            for i in 1..=20 {
                let count = |r| {
                    enumerate_chains(d, k, &SpectralWindow::new(i, r, eps).unwrap())
                        .unwrap()
                        .count()
                };
                let all = count(Regime::All);
                let ell = count(Regime::Elliptic);
                let sub = count(Regime::Subelliptic);
                assert!(ell + sub >= all);
                let ties = enumerate_chains(d, k, &SpectralWindow::new(i, Regime::All, eps).unwrap())
                    .unwrap()
                    .filter(|c| (c.bottom().value() - eps * c.top().value()).abs() < 1e-12)
                    .count();
                assert_eq!(ell + sub, all + ties);
            }
        }
    }

    #[test]
    fn level_eigenvalues_decrease_along_chains() {
        for &(d, k) in &[(3, 1), (4, 1), (5, 2), (6, 3)] {
            for c in chains_below(d, k, 200.0, None).unwrap() {
                for j in (k + 1)..=d {
                    assert!(c.level_eigenvalue(j) >= c.level_eigenvalue(j - 1), "{c}");
                }
            }
        }
    }

    #[test]
    fn csv_row_layout() {
        let c = ChainIndex::new(3, 1, vec![h(4), h(3), h(2)]).unwrap();
        assert_eq!(c.csv_row(), "3,1,4,3,2,2");
        assert_eq!(c.to_string(), "(2, 3/2, 1)");
    }
}
