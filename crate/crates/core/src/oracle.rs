//! Independent oracles: exact-rational series computations and brute-force
//! counts used to cross-check the modular pipelines. Nothing here feeds the
//! implementations it checks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact coefficients of log(1+pt) up to the given degree:
/// c_n = (-1)^(n+1) p^n / n.
pub fn log_series_exact(p: u64, degree: usize) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(degree + 1);
    out.push(BigRational::zero());
    let mut pn = BigInt::one();
    for n in 1..=degree {
        pn *= p;
        let mut c = BigRational::new(pn.clone(), BigInt::from(n));
        if n % 2 == 0 {
            c = -c;
        }
        out.push(c);
    }
    out
}

/// Multiply an exact series by (1 + p t)^k.
pub fn mul_one_plus_pt_pow(series: &[BigRational], p: u64, k: u32) -> Vec<BigRational> {
    let mut cur = series.to_vec();
    for _ in 0..k {
        let mut next = vec![BigRational::zero(); cur.len()];
        for (n, c) in cur.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            next[n] += c;
            if n + 1 < cur.len() {
                next[n + 1] += c * BigRational::from_integer(BigInt::from(p));
            }
        }
        cur = next;
    }
    cur
}

/// Certificate that log(1+pt) admits no primitive of the form
/// poly / (1+pt)^k with k <= max_k and poly degree below the cap: multiplying
/// by (1+pt)^k must leave a nonzero tail everywhere past degree k.
pub fn log_series_not_algebraic(p: u64, degree: usize, max_k: u32) -> bool {
    let base = log_series_exact(p, degree);
    for k in 0..=max_k {
        let prod = mul_one_plus_pt_pow(&base, p, k);
        for (n, c) in prod.iter().enumerate() {
            if n > k as usize && c.is_zero() {
                return false;
            }
        }
    }
    true
}

/// Exact p-adic valuation of the log-series coefficient at degree n:
/// n - v_p(n).
pub fn log_coefficient_valuation(p: u64, n: u64) -> i64 {
    let mut v = 0i64;
    let mut m = n;
    while m.is_multiple_of(p) {
        m /= p;
        v += 1;
    }
    n as i64 - v
}

/// Valuation profile of the formal primitive of the ladder form
/// sum p^(c i) t^(p^(e i)) dlog t: the coefficient at t^(p^(e i)) has
/// valuation c i - e i.
pub fn ladder_primitive_valuations(
    coefficient_step: i64,
    exponent_step: u32,
    terms: u32,
) -> Vec<(u32, i64)> {
    (0..terms)
        .map(|i| {
            (
                exponent_step * i,
                (coefficient_step - exponent_step as i64) * i as i64,
            )
        })
        .collect()
}

/// Positivity of the beta-function tail coefficients: used as a sanity
/// check of the non-algebraicity certificate for small sizes.
pub fn tail_coefficient_sign_check(p: u64, degree: usize, k: u32) -> bool {
    let prod = mul_one_plus_pt_pow(&log_series_exact(p, degree), p, k);
    prod.iter()
        .enumerate()
        .skip(k as usize + 1)
        .all(|(n, c)| if n % 2 == 0 { c.is_negative() } else { c.is_positive() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_series_values() {
        let s = log_series_exact(5, 6);
        assert_eq!(s[1], BigRational::new(BigInt::from(5), BigInt::from(1)));
        assert_eq!(s[2], BigRational::new(BigInt::from(-25), BigInt::from(2)));
        assert_eq!(s[5], BigRational::new(BigInt::from(625), BigInt::from(1)));
        assert_eq!(log_coefficient_valuation(5, 5), 4);
        assert_eq!(log_coefficient_valuation(5, 25), 23);
    }

    #[test]
    fn non_algebraicity_small() {
        assert!(log_series_not_algebraic(5, 160, 4));
        assert!(tail_coefficient_sign_check(5, 60, 2));
    }

    #[test]
    fn ladder_valuations() {
        // sum p^i t^{p^{2i}}: valuations -i (slope one-half ladder)
        let v = ladder_primitive_valuations(1, 2, 4);
        assert_eq!(v, vec![(0, 0), (2, -1), (4, -2), (6, -3)]);
        // sum p^{3i} t^{p^{2i}}: valuations +i
        let v2 = ladder_primitive_valuations(3, 2, 3);
        assert_eq!(v2, vec![(0, 0), (2, 1), (4, 2)]);
    }
}
