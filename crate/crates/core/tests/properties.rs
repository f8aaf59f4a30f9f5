use grushin::bounds::{det_even_subsets, ClusterSum};
use grushin::geometry::{ambient_to_cyl, distance_surrogate, CylPoint, DEFAULT_BRANCH_EPS};
use grushin::kernels::{multiplier_kernel, MultiplierSpec};
use grushin::numeric::CompensatedSum;
use grushin::special::profile::{lower_recurrence_coeff, recurrence_coeff};
use grushin::special::{jacobi_eval, jacobi_oracle, xtilde_eval, JacobiIndex, ProfileIndex};
use grushin::spectrum::{chains_in_range, sphere_dim, HalfInt, Regime, SpectralWindow};
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = (u32, u32)> {
    prop_oneof![Just((2u32, 1u32)), Just((3, 1)), Just((3, 2)), Just((4, 2))]
}

fn unit_vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, dim)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-4)
        .prop_map(|v| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ultraspherical_parity(j in 0u32..=60, m2 in 0u32..=120, x in -1.0f64..=1.0) {
        let idx = JacobiIndex::new(j, m2 as f64 / 2.0, m2 as f64 / 2.0).unwrap();
        let a = jacobi_eval(idx, x).unwrap();
        let b = jacobi_eval(idx, -x).unwrap();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((a - sign * b).abs() <= 1e-13 * a.abs().max(1.0), "{a} {b}");
    }

    #[test]
    fn recurrence_matches_oracle_for_general_parameters(
        j in 0u32..=40, a4 in -3i32..=80, b4 in -3i32..=80, xn in -1024i32..=1024,
    ) {
        let idx = JacobiIndex::new(j, a4 as f64 / 4.0, b4 as f64 / 4.0).unwrap();
        let x = xn as f64 / 1024.0;
        let fast = jacobi_eval(idx, x).unwrap();
        let exact = jacobi_oracle(idx, x).unwrap();
        // Scale by the endpoint value so interior zeros do not dominate.
        let scale = jacobi_oracle(idx, 1.0).unwrap().abs().max(jacobi_oracle(idx, -1.0).unwrap().abs()).max(1.0);
        prop_assert!((fast - exact).abs() <= 1e-12 * scale, "{fast} {exact}");
    }

    #[test]
    fn profile_recurrence_identity(d in 2u32..=6, n in 0u32..=90, j in 0u32..=40, x in -1.0f64..=1.0) {
        let m2 = d - 2 + 2 * j;
        let l2 = m2 + 1 + 2 * n;
        let p = ProfileIndex::from_twice(d, l2, m2).unwrap();
        let lhs = x * xtilde_eval(p, x).unwrap();
        let mut rhs = recurrence_coeff(p) * xtilde_eval(ProfileIndex::from_twice(d, l2 + 2, m2).unwrap(), x).unwrap();
        if n > 0 {
            rhs += lower_recurrence_coeff(p) * xtilde_eval(ProfileIndex::from_twice(d, l2 - 2, m2).unwrap(), x).unwrap();
        }
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn chain_levels_are_monotone((d, k) in dims(), lo in 0i64..400) {
        for c in chains_in_range(d, k, lo, lo + 20, None).unwrap() {
            for j in k..d {
                prop_assert!(c.level_eigenvalue(j + 1) >= c.level_eigenvalue(j), "{c}");
            }
        }
    }

    #[test]
    fn cluster_sums_are_even_and_nonnegative(
        (d, k) in dims(), i in 1u32..=24, s in 0.0f64..=1.0, alpha in 0.0f64..0.45,
    ) {
        let n = (d - k) as usize;
        let x = vec![s / (n as f64).sqrt(); n];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        for regime in [Regime::Elliptic, Regime::Subelliptic] {
            let cs = ClusterSum::new(d, k, SpectralWindow::new(i, regime, 0.5).unwrap()).unwrap();
            let a = cs.eval(alpha, &x).unwrap();
            let b = cs.eval(alpha, &neg).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
    }

    #[test]
    fn kernel_is_symmetric(
        w1 in unit_vector(2), w2 in unit_vector(2), p1 in -1.3f64..1.3, p2 in -1.3f64..1.3, t in 0.01f64..0.5,
    ) {
        let p = CylPoint::new(w1, vec![p1]).unwrap();
        let q = CylPoint::new(w2, vec![p2]).unwrap();
        let f = MultiplierSpec::Heat { t };
        let a = multiplier_kernel(&f, 12.0, &p, &q).unwrap();
        let b = multiplier_kernel(&f, 12.0, &q, &p).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} {b}");
    }

    #[test]
    fn surrogate_is_symmetric_and_vanishes_on_the_diagonal(
        (d, k) in dims(), z1 in unit_vector(5), z2 in unit_vector(5),
    ) {
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let a: Vec<f64> = z1[..=d as usize].to_vec();
        let b: Vec<f64> = z2[..=d as usize].to_vec();
        prop_assume!(norm(&a) > 1e-3 && norm(&b) > 1e-3);
        let a: Vec<f64> = a.iter().map(|x| x / norm(&z1[..=d as usize])).collect();
        let b: Vec<f64> = b.iter().map(|x| x / norm(&z2[..=d as usize])).collect();
        let (p, q) = match (ambient_to_cyl(&a, k), ambient_to_cyl(&b, k)) {
            (Ok(p), Ok(q)) => (p, q),
            _ => return Ok(()),
        };
        let pq = distance_surrogate(&p, &q, DEFAULT_BRANCH_EPS);
        let qp = distance_surrogate(&q, &p, DEFAULT_BRANCH_EPS);
        prop_assert!((pq - qp).abs() <= 1e-12 * pq.max(1.0));
        prop_assert!(distance_surrogate(&p, &p, DEFAULT_BRANCH_EPS).abs() <= 1e-12);
    }

    #[test]
    fn determinant_duality(w in proptest::collection::vec(-1.0f64..=1.0, 1..=10)) {
        let (det, sum) = det_even_subsets(&w).unwrap();
        prop_assert!((det - sum).abs() <= 1e-12 * sum.abs().max(1.0));
    }

    #[test]
    fn compensated_sums_ignore_chunking(
        v in proptest::collection::vec(-1e6f64..1e6, 1..400), chunk in 1usize..64,
    ) {
        let mut whole = CompensatedSum::new();
        v.iter().for_each(|&x| whole.add(x));
        let merged = v
            .chunks(chunk)
            .map(|c| {
                let mut s = CompensatedSum::new();
                c.iter().for_each(|&x| s.add(x));
                s
            })
            .fold(CompensatedSum::new(), CompensatedSum::merge);
        let scale = v.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((whole.value() - merged.value()).abs() <= 1e-12 * scale);
    }
}

#[test]
fn sphere_dimension_is_comparable_to_a_power() {
    for d in 2..=6u32 {
        let ratios: Vec<f64> = (10..=200)
            .map(|n| {
                let ell = HalfInt::of_degree(d, n);
                sphere_dim(d, ell).unwrap() as f64 / ell.value().powi(d as i32 - 1)
            })
            .collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(lo > 0.0 && hi / lo < 4.0, "d = {d}: {lo} .. {hi}");
    }
}

/// `max |X̃^d_{ℓ,m}| m^{(d−2)/2} / ℓ^{(d−1)/2}` over `ℓ ≤ ell_top` on a
/// Chebyshev-type grid.
fn sup_ratio(d: u32, ell_top: u32) -> f64 {
    use grushin::special::XtildeLadder;
    let xs: Vec<f64> = (0..=400).map(|i| (std::f64::consts::PI * i as f64 / 400.0).cos()).collect();
    let cap = HalfInt::from_twice(if (2 * ell_top + 1 - d) % 2 == 0 { 2 * ell_top } else { 2 * ell_top - 1 });
    let mut worst = 0.0f64;
    let mut m = HalfInt::base(d - 1);
    while m.twice < cap.twice {
        let mw = if d == 2 { 1.0 } else { m.value().powf((d as f64 - 2.0) / 2.0) };
        for &x in &xs {
            let vals = XtildeLadder::new(d, m, x).unwrap().collect_to(cap);
            for (j, v) in vals.iter().enumerate() {
                let ell = m.value() + 0.5 + j as f64;
                worst = worst.max(v.abs() * mw / ell.powf((d as f64 - 1.0) / 2.0));
            }
        }
        m = HalfInt::from_twice(m.twice + 2);
    }
    worst
}

#[test]
fn uniform_sup_bound_has_a_single_constant() {
    for d in 2..=6u32 {
        let half = sup_ratio(d, 100);
        let full = sup_ratio(d, 200);
        assert!(full.is_finite() && full <= 1.1 * half, "d = {d}: {half} -> {full}");
    }
}

#[test]
fn parseval_on_random_columns() {
    use grushin::kernels::{kernel_column_l2, kernel_column_l2_quadrature};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    for case in 0..20 {
        let (d, k) = [(2u32, 1u32), (3, 1), (3, 2)][case % 3];
        let lm: f64 = rng.random_range(3.0..8.0);
        let f = match case % 4 {
            0 => MultiplierSpec::Heat { t: rng.random_range(0.01..0.3) },
            1 => MultiplierSpec::BochnerRiesz { t: 1.0 / (lm * lm), delta: rng.random_range(0.0..2.0) },
            2 => MultiplierSpec::Indicator { lo: rng.random_range(0.0..2.0), hi: rng.random_range(2.0..lm) },
            _ => MultiplierSpec::Table {
                points: vec![(0.0, 1.0), (lm / 2.0, rng.random_range(-1.0..1.0)), (lm, 0.0)],
            },
        };
        let mut omega: Vec<f64> = (0..=k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = omega.iter().map(|v| v * v).sum::<f64>().sqrt();
        omega.iter_mut().for_each(|v| *v /= n);
        let psi: Vec<f64> = (k..d).map(|_| rng.random_range(-1.2..1.2)).collect();
        let q = CylPoint::new(omega, psi).unwrap();
        let closed = kernel_column_l2(&f, &q, lm).unwrap();
        let quad = kernel_column_l2_quadrature(&f, &q, lm).unwrap();
        assert!((closed - quad).abs() <= 1e-6 * closed.max(1e-300), "case {case} {f:?}: {closed} {quad}");
    }
}
