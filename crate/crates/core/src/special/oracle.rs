//! Exact evaluation of Jacobi polynomials from the explicit finite sum
//!
//! `P_j^{(α,β)}(x) = Σ_s C(j+α, j−s) C(j+β, s) ((x−1)/2)^s ((x+1)/2)^{j−s}`.
//!
//! Every finite `f64` is a dyadic rational, so the sum is evaluated exactly in
//! big-integer arithmetic and rounded once at the end. This is the reference
//! against which the recurrence is tested; it shares no code with it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{float::FloatCore, One, ToPrimitive, Zero};

use super::jacobi::{check_unit_interval, JacobiIndex};
use crate::error::Result;

/// `v = num / 2^shift` exactly.
struct Dyadic {
    num: BigInt,
    shift: u32,
}

fn dyadic(v: f64) -> Dyadic {
    let (mant, exp, sign) = FloatCore::integer_decode(v);
    let mut num = BigInt::from(mant) * BigInt::from(sign);
    if mant == 0 {
        return Dyadic {
            num: BigInt::zero(),
            shift: 0,
        };
    }
    // Strip trailing zero bits to keep the integers short.
    let tz = mant.trailing_zeros() as i32;
    let mut e = exp as i32 + tz;
    num >>= tz as usize;
    if e >= 0 {
        num <<= e as usize;
        e = 0;
    }
    Dyadic {
        num,
        shift: (-e) as u32,
    }
}

/// Exact `P_j^{(α,β)}(x)`, correctly rounded to `f64`.
pub fn jacobi_oracle(idx: JacobiIndex, x: f64) -> Result<f64> {
    idx.validate()?;
    check_unit_interval(x)?;
    let value = jacobi_oracle_exact(idx.j, idx.alpha, idx.beta, x);
    Ok(value.to_f64().unwrap_or(f64::NAN))
}

/// The exact rational value of `P_j^{(α,β)}(x)`.
pub fn jacobi_oracle_exact(j: u32, alpha: f64, beta: f64, x: f64) -> BigRational {
    let j = j as usize;
    let a = dyadic(alpha);
    let b = dyadic(beta);
    let xd = dyadic(x);
    let one = BigInt::one();
    let da = &one << a.shift as usize;
    let db = &one << b.shift as usize;
    let dx = &one << xd.shift as usize;
    let jb = BigInt::from(j);

    // C(j+α, n) = na[n] / (da^n n!) with na[n] = Π_{t<n} ((j−t)·da + A).
    let falling = |num: &BigInt, den: &BigInt| {
        let mut out = Vec::with_capacity(j + 1);
        out.push(BigInt::one());
        for t in 0..j {
            let factor = (&jb - BigInt::from(t)) * den + num;
            let next = out[t].clone() * factor;
            out.push(next);
        }
        out
    };
    let na = falling(&a.num, &da);
    let nb = falling(&b.num, &db);

    // ((x−1)/2)^s = (X − dx)^s / (2dx)^s and similarly for x+1.
    let lo = &xd.num - &dx;
    let hi = &xd.num + &dx;
    let powers = |base: &BigInt| {
        let mut out = Vec::with_capacity(j + 1);
        out.push(BigInt::one());
        for s in 0..j {
            let next = &out[s] * base;
            out.push(next);
        }
        out
    };
    let lo_pow = powers(&lo);
    let hi_pow = powers(&hi);
    let da_pow = powers(&da);
    let db_pow = powers(&db);

    // Over the common denominator da^j db^j j! (2dx)^j, the s-th term has
    // numerator C(j,s) na[j−s] nb[s] da^s db^{j−s} lo^s hi^{j−s}.
    let mut total = BigInt::zero();
    let mut binom = BigInt::one();
    for s in 0..=j {
        let n = j - s;
        let term = &binom * &na[n] * &nb[s] * &da_pow[s] * &db_pow[n] * &lo_pow[s] * &hi_pow[n];
        total += term;
        binom = binom * BigInt::from(j - s) / BigInt::from(s + 1);
    }
    let mut fact = BigInt::one();
    for t in 2..=j {
        fact *= BigInt::from(t);
    }
    let den = &da_pow[j] * &db_pow[j] * fact * (BigInt::one() << j) * powers(&dx)[j].clone();
    BigRational::new(total, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(j: u32, a: f64, b: f64, x: f64) -> f64 {
        jacobi_oracle(JacobiIndex::new(j, a, b).unwrap(), x).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(o(0, 0.3, 4.0, -0.7), 1.0);
        assert_eq!(o(3, 0.0, 0.0, 0.5), -0.4375);
        assert_eq!(o(2, 0.0, 0.0, 0.0), -0.5);
        assert_eq!(o(1, 1.0, 1.0, 1.0), 2.0);
    }

    #[test]
    fn legendre_closed_forms() {
        // P_4(x) = (35x⁴ − 30x² + 3)/8 is exact at dyadic points.
        for &x in &[0.0, 0.25, -0.5, 0.75, 1.0] {
            let exact = (35.0 * x * x * x * x - 30.0 * x * x + 3.0) / 8.0;
            assert_eq!(o(4, 0.0, 0.0, x), exact);
        }
    }

    #[test]
    fn endpoint_is_binomial() {
        // P_j^{(α,β)}(1) = C(j+α, j) = Γ(j+α+1)/(Γ(α+1) j!).
        for j in 0..30 {
            for &a in &[0.0, 0.5, 3.0, 7.25] {
                let want = (libm::lgamma(j as f64 + a + 1.0)
                    - libm::lgamma(a + 1.0)
                    - libm::lgamma(j as f64 + 1.0))
                .exp();
                let got = o(j, a, 1.5, 1.0);
                assert!((got - want).abs() <= 1e-12 * want, "j={j} a={a}");
            }
        }
    }
}
