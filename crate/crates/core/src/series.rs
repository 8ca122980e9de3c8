//! Truncated (Laurent) power series over Z/p^N with per-coefficient
//! precision ledgers, term-wise integration, and valuation growth scans.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;

use crate::padic::{
    int_valuation, OnExhaustion, PadicApprox, PadicError, PrecisionPolicy, Valuation,
};

pub type Rat = Ratio<i64>;

/// Which 1-form basis a series coefficient vector refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormBasis {
    /// f(t) dt
    Dt,
    /// f(t) dlog t = f(t) dt/t
    Dlog,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    prime: u64,
    coeffs: BTreeMap<i64, PadicApprox>,
    policy: PrecisionPolicy,
}

/// Per-degree precision loss recorded by integration.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LossLedger {
    pub entries: Vec<(i64, u32)>,
}

impl LossLedger {
    pub fn total(&self) -> u32 {
        self.entries.iter().map(|&(_, l)| l).sum()
    }

    pub fn max(&self) -> u32 {
        self.entries.iter().map(|&(_, l)| l).max().unwrap_or(0)
    }
}

/// Outcome of a linear-growth scan val(a_n) >= c*n - d over the stored window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthCertificate {
    pub slope: Rat,
    pub offset: Rat,
    pub verified_range: (i64, i64),
    pub violations: Vec<i64>,
}

impl GrowthCertificate {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

impl TruncatedSeries {
    pub fn zero(prime: u64, policy: PrecisionPolicy) -> Self {
        TruncatedSeries {
            prime,
            coeffs: BTreeMap::new(),
            policy,
        }
    }

    pub fn from_coeffs<I: IntoIterator<Item = (i64, i64)>>(
        prime: u64,
        policy: PrecisionPolicy,
        coeffs: I,
    ) -> Self {
        let mut s = Self::zero(prime, policy);
        for (deg, val) in coeffs {
            s.set(deg, PadicApprox::new(prime, val, policy.cap_n));
        }
        s
    }

    pub fn one(prime: u64, policy: PrecisionPolicy) -> Self {
        Self::from_coeffs(prime, policy, [(0, 1)])
    }

    pub fn monomial(prime: u64, policy: PrecisionPolicy, degree: i64, value: i64) -> Self {
        Self::from_coeffs(prime, policy, [(degree, value)])
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn policy(&self) -> PrecisionPolicy {
        self.policy
    }

    pub fn coeff(&self, degree: i64) -> PadicApprox {
        self.coeffs
            .get(&degree)
            .copied()
            .unwrap_or_else(|| PadicApprox::exact_zero(self.prime, self.policy.cap_n))
    }

    pub fn set(&mut self, degree: i64, value: PadicApprox) {
        assert!(
            degree >= self.policy.low_degree && degree <= self.policy.cap_degree,
            "degree {degree} outside policy window"
        );
        if value.is_exact_zero() {
            self.coeffs.remove(&degree);
        } else {
            self.coeffs.insert(degree, value);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &PadicApprox)> {
        self.coeffs.iter().map(|(&d, c)| (d, c))
    }

    pub fn support(&self) -> Vec<i64> {
        self.coeffs.keys().copied().collect()
    }

    pub fn is_zero_at_precision(&self) -> bool {
        self.coeffs.values().all(|c| c.is_zero())
    }

    /// Minimum absolute precision over stored coefficients (cap when empty).
    pub fn min_precision(&self) -> u32 {
        self.coeffs
            .values()
            .map(|c| c.precision())
            .min()
            .unwrap_or(self.policy.cap_n)
    }

    pub fn truncate_precision(&self, precision: u32) -> Self {
        let mut out = Self::zero(self.prime, self.policy);
        for (&d, c) in &self.coeffs {
            out.coeffs.insert(d, c.truncate(precision));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, PadicError> {
        if self.prime != other.prime {
            return Err(PadicError::PrimeMismatch(self.prime, other.prime));
        }
        if !self.policy.compatible(&other.policy) {
            return Err(PadicError::PolicyMismatch(
                "series policies disagree on the degree window".into(),
            ));
        }
        let mut out = self.clone();
        for (&d, c) in &other.coeffs {
            let merged = out.coeff(d).add(c)?;
            out.coeffs.insert(d, merged);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &PadicApprox) -> Result<Self, PadicError> {
        let mut out = Self::zero(self.prime, self.policy);
        for (&d, c) in &self.coeffs {
            out.coeffs.insert(d, c.mul(k)?);
        }
        Ok(out)
    }

    pub fn mul_p_pow(&self, k: u32) -> Self {
        let mut out = Self::zero(self.prime, self.policy);
        for (&d, c) in &self.coeffs {
            out.coeffs.insert(d, c.mul_p_pow(k));
        }
        out
    }

    pub fn divide_p_pow(&self, k: u32) -> Result<Self, PadicError> {
        let mut out = Self::zero(self.prime, self.policy);
        for (&d, c) in &self.coeffs {
            if c.is_zero() && !c.is_exact_zero() && c.precision() <= k {
                return Err(PadicError::PrecisionExhausted(format!(
                    "coefficient at degree {d} has no precision left after /p^{k}"
                )));
            }
            if !c.is_exact_zero() {
                out.coeffs.insert(d, c.divide_p_pow(k)?);
            }
        }
        Ok(out)
    }

    /// Convolution truncated to the policy window. The result precision is
    /// the minimum of the operand precisions.
    pub fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        if self.prime != other.prime {
            return Err(PadicError::PrimeMismatch(self.prime, other.prime));
        }
        if !self.policy.compatible(&other.policy) {
            return Err(PadicError::PolicyMismatch(
                "series policies disagree on the degree window".into(),
            ));
        }
        let prec = self.min_precision().min(other.min_precision());
        let mut out = Self::zero(self.prime, self.policy);
        for (&d1, c1) in &self.coeffs {
            if c1.is_exact_zero() {
                continue;
            }
            for (&d2, c2) in &other.coeffs {
                if c2.is_exact_zero() {
                    continue;
                }
                let d = d1 + d2;
                if d > self.policy.cap_degree || d < self.policy.low_degree {
                    match self.policy.on_exhaustion {
                        OnExhaustion::Saturate => continue,
                        OnExhaustion::Error => {
                            return Err(PadicError::PrecisionExhausted(format!(
                                "product degree {d} escapes window [{}, {}]",
                                self.policy.low_degree, self.policy.cap_degree
                            )))
                        }
                    }
                }
                let term = c1.truncate(prec).mul(&c2.truncate(prec))?;
                let merged = out.coeff(d).truncate(prec).add(&term)?;
                out.coeffs.insert(d, merged);
            }
        }
        Ok(out)
    }

    /// Substitute t -> t^k (the Frobenius lift on coordinates for k = p).
    pub fn compose_power(&self, k: u32) -> Self {
        let mut out = Self::zero(self.prime, self.policy);
        for (&d, c) in &self.coeffs {
            let nd = d * k as i64;
            if nd > self.policy.cap_degree || nd < self.policy.low_degree {
                continue;
            }
            out.coeffs.insert(nd, *c);
        }
        out
    }

    /// d(g) expressed in the requested basis: Dt gives sum n*b_n t^{n-1},
    /// Dlog gives sum n*b_n t^n.
    pub fn differentiate(&self, basis: FormBasis) -> Self {
        let mut out = Self::zero(self.prime, self.policy);
        for (&d, c) in &self.coeffs {
            if d == 0 {
                continue;
            }
            let scaled = c.mul_i64(d);
            let target = match basis {
                FormBasis::Dt => d - 1,
                FormBasis::Dlog => d,
            };
            if target > self.policy.cap_degree || target < self.policy.low_degree {
                continue;
            }
            if !scaled.is_exact_zero() {
                out.coeffs.insert(target, scaled);
            }
        }
        out
    }

    /// Formal valuation of the primitive coefficient for each stored degree:
    /// val(a_n) - v_p(n+1) (Dt) or val(a_n) - v_p(n) (Dlog). Degrees whose
    /// coefficient vanishes at precision are reported with the precision cap
    /// as the valuation floor.
    pub fn primitive_valuations(&self, basis: FormBasis) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for (&d, c) in &self.coeffs {
            if c.is_exact_zero() {
                continue;
            }
            let divisor = match basis {
                FormBasis::Dt => d + 1,
                FormBasis::Dlog => d,
            };
            if divisor == 0 {
                continue; // residue term; handled separately
            }
            let target = match basis {
                FormBasis::Dt => d + 1,
                FormBasis::Dlog => d,
            };
            let loss = int_valuation(self.prime, divisor) as i64;
            let val = match c.valuation() {
                Valuation::Finite(v) => v as i64,
                Valuation::Infinite => continue,
            };
            out.push((target, val - loss));
        }
        out
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", emit_series(self))
    }
}

/// Term-wise antidifferentiation. In the Dt basis the input is f(t) dt and
/// g satisfies dg = f dt; in the Dlog basis the input is f(t) dlog t.
/// Division by the degree consumes v_p(degree) digits of precision, recorded
/// in the ledger.
pub fn integrate_form(
    f: &TruncatedSeries,
    basis: FormBasis,
) -> Result<(TruncatedSeries, LossLedger), PadicError> {
    let prime = f.prime;
    let mut ledger = LossLedger::default();
    let mut g = TruncatedSeries::zero(prime, f.policy);

    // Residue precondition: the coefficient pairing with dlog t (or t^-1 dt)
    // must vanish at working precision.
    let residue = match basis {
        FormBasis::Dlog => f.coeff(0),
        FormBasis::Dt => f.coeff(-1),
    };
    if !residue.is_zero() {
        return Err(PadicError::ResidueObstruction {
            residue: residue.value(),
            precision: residue.precision(),
        });
    }

    for (&d, c) in &f.coeffs {
        if c.is_exact_zero() {
            continue;
        }
        let (divisor, target) = match basis {
            FormBasis::Dt => (d + 1, d + 1),
            FormBasis::Dlog => (d, d),
        };
        if divisor == 0 {
            continue; // residue already checked to vanish
        }
        if target > f.policy.cap_degree || target < f.policy.low_degree {
            match f.policy.on_exhaustion {
                OnExhaustion::Saturate => continue,
                OnExhaustion::Error => {
                    return Err(PadicError::PrecisionExhausted(format!(
                        "primitive degree {target} escapes the window"
                    )))
                }
            }
        }
        let loss = int_valuation(prime, divisor);
        if c.is_zero() {
            // Invisible at precision: the primitive coefficient is zero at the
            // reduced precision; keep the ledger honest.
            if c.precision() <= loss {
                return Err(PadicError::PrecisionExhausted(format!(
                    "coefficient at degree {d} has no precision left dividing by {divisor}"
                )));
            }
            if loss > 0 {
                ledger.entries.push((target, loss));
            }
            g.set(target, PadicApprox::from_u64(prime, 0, c.precision() - loss));
            continue;
        }
        let val = c.valuation().finite().unwrap_or(0);
        if (val as i64) < loss as i64 {
            return Err(PadicError::ValuationUnderflow {
                degree: target,
                valuation: val as i64 - loss as i64,
            });
        }
        let (q, lost) = c.divide_int(divisor)?;
        if lost > 0 {
            ledger.entries.push((target, lost));
        }
        if q.precision() < 1 {
            return Err(PadicError::PrecisionExhausted(format!(
                "degree {target}: precision dropped below 1"
            )));
        }
        g.set(target, q);
    }
    Ok((g, ledger))
}

/// Scan for violations of val(a_n) >= c*n - d over the stored support.
pub fn growth_check(g: &TruncatedSeries, c: Rat, d: Rat) -> GrowthCertificate {
    let pairs: Vec<(i64, Option<i64>)> = g
        .coeffs
        .iter()
        .map(|(&n, a)| {
            let v = match a.valuation() {
                Valuation::Finite(v) => Some(v as i64),
                Valuation::Infinite => None,
            };
            (n, v)
        })
        .collect();
    growth_check_profile(&pairs, c, d, growth_range(g))
}

fn growth_range(g: &TruncatedSeries) -> (i64, i64) {
    let lo = g.coeffs.keys().next().copied().unwrap_or(0);
    let hi = g.coeffs.keys().last().copied().unwrap_or(0);
    (lo, hi)
}

/// Growth scan over an explicit valuation profile; None means valuation
/// +infinity (never a violation).
pub fn growth_check_profile(
    profile: &[(i64, Option<i64>)],
    c: Rat,
    d: Rat,
    range: (i64, i64),
) -> GrowthCertificate {
    let mut violations = Vec::new();
    for &(n, val) in profile {
        let bound = c * Rat::from_integer(n) - d;
        if let Some(v) = val {
            if Rat::from_integer(v) < bound {
                violations.push(n);
            }
        }
    }
    violations.sort_unstable();
    GrowthCertificate {
        slope: c,
        offset: d,
        verified_range: range,
        violations,
    }
}

/// Series literal: `p=<prime> N=<cap> D=<deg> ; <degree>:<integer>, ...`
/// An optional `L=<low>` field after D carries a Laurent floor.
pub fn emit_series(s: &TruncatedSeries) -> String {
    let prec = s.min_precision();
    let mut head = format!(
        "p={} N={} D={}",
        s.prime, prec, s.policy.cap_degree
    );
    if s.policy.low_degree != 0 {
        head.push_str(&format!(" L={}", s.policy.low_degree));
    }
    let mut parts = Vec::new();
    for (&d, c) in &s.coeffs {
        let t = c.truncate(prec);
        if !t.is_zero() {
            parts.push(format!("{}:{}", d, t.value()));
        }
    }
    format!("{head} ; {}", parts.join(", "))
}

pub fn parse_series(input: &str) -> Result<TruncatedSeries, PadicError> {
    let (head, tail) = input
        .split_once(';')
        .ok_or_else(|| PadicError::PolicyMismatch("series literal lacks ';'".into()))?;
    let mut prime = None;
    let mut cap_n = None;
    let mut cap_d = None;
    let mut low = 0i64;
    for field in head.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| PadicError::PolicyMismatch(format!("bad field {field:?}")))?;
        match k {
            "p" => prime = Some(parse_num(v)? as u64),
            "N" => cap_n = Some(parse_num(v)? as u32),
            "D" => cap_d = Some(parse_num(v)?),
            "L" => low = parse_num(v)?,
            _ => {
                return Err(PadicError::PolicyMismatch(format!(
                    "unknown series field {k:?}"
                )))
            }
        }
    }
    let prime = prime.ok_or_else(|| PadicError::PolicyMismatch("missing p=".into()))?;
    let cap_n = cap_n.ok_or_else(|| PadicError::PolicyMismatch("missing N=".into()))?;
    let cap_d = cap_d.ok_or_else(|| PadicError::PolicyMismatch("missing D=".into()))?;
    let policy = PrecisionPolicy::new(cap_n, cap_d).with_low(low);
    let mut s = TruncatedSeries::zero(prime, policy);
    for term in tail.split(',') {
        let term = term.trim();
        if term.is_empty() {
            continue;
        }
        let (d, c) = term
            .split_once(':')
            .ok_or_else(|| PadicError::PolicyMismatch(format!("bad term {term:?}")))?;
        let degree = parse_num(d.trim())?;
        let coeff = parse_num(c.trim())?;
        s.set(degree, PadicApprox::new(prime, coeff, cap_n));
    }
    Ok(s)
}

fn parse_num(v: &str) -> Result<i64, PadicError> {
    v.parse()
        .map_err(|_| PadicError::PolicyMismatch(format!("bad number {v:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::split_p_part;

    fn policy(n: u32, d: i64) -> PrecisionPolicy {
        PrecisionPolicy::new(n, d)
    }

    /// Geometric series 1/(1+pt) = sum (-p)^n t^n up to the window cap.
    fn geometric_inverse(prime: u64, pol: PrecisionPolicy) -> TruncatedSeries {
        let mut s = TruncatedSeries::zero(prime, pol);
        let mut c = PadicApprox::one(prime, pol.cap_n);
        for n in 0..=pol.cap_degree {
            s.set(n, c);
            c = c.mul_i64(-(prime as i64));
        }
        s
    }

    #[test]
    fn inverse_pair_multiplies_to_one() {
        let pol = policy(8, 40);
        let one_plus_pt = TruncatedSeries::from_coeffs(5, pol, [(0, 1), (1, 5)]);
        let inv = geometric_inverse(5, pol);
        let prod = one_plus_pt.mul(&inv).unwrap();
        assert_eq!(prod.coeff(0).value(), 1);
        for n in 1..=39 {
            assert!(prod.coeff(n).is_zero(), "degree {n} should cancel");
        }
    }

    #[test]
    fn laurent_inverse_monomials() {
        let pol = PrecisionPolicy::laurent(6, 10);
        let t = TruncatedSeries::monomial(5, pol, 1, 1);
        let tinv = TruncatedSeries::monomial(5, pol, -1, 1);
        let prod = t.mul(&tinv).unwrap();
        assert_eq!(prod.coeff(0).value(), 1);
        assert_eq!(prod.support(), vec![0]);
    }

    #[test]
    fn square_of_one_plus_t() {
        let pol = policy(6, 10);
        let s = TruncatedSeries::from_coeffs(7, pol, [(0, 1), (1, 1)]);
        let sq = s.mul(&s).unwrap();
        assert_eq!(sq.coeff(0).value(), 1);
        assert_eq!(sq.coeff(1).value(), 2);
        assert_eq!(sq.coeff(2).value(), 1);
    }

    #[test]
    fn integrate_constant_dt() {
        let pol = policy(6, 10);
        let f = TruncatedSeries::one(5, pol);
        let (g, ledger) = integrate_form(&f, FormBasis::Dt).unwrap();
        assert_eq!(g.coeff(1).value(), 1);
        assert_eq!(ledger.entries.len(), 0);
    }

    /// Term-wise antidifferentiation oracle for p/(1+pt) dt: the primitive is
    /// the alternating series with coefficient (-1)^(n+1) p^n / n at degree n.
    #[test]
    fn integrate_matches_log_series_oracle() {
        let p: u64 = 5;
        let n_cap: u32 = 12;
        let d_cap: i64 = 60;
        let pol = policy(n_cap, d_cap);
        // f = p * (1/(1+pt)) = sum p*(-p)^n t^n
        let f = geometric_inverse(p, pol)
            .scale(&PadicApprox::new(p, p as i64, n_cap))
            .unwrap();
        let (g, ledger) = integrate_form(&f, FormBasis::Dt).unwrap();
        // Oracle: coefficient at degree n is (-1)^(n+1) p^n / n, computed
        // independently by modular arithmetic on the split n = p^v * u.
        for n in 1..=d_cap {
            let (v, u) = split_p_part(p, n);
            let expect_prec = n_cap - v;
            let c = g.coeff(n);
            assert_eq!(c.precision(), expect_prec, "precision at degree {n}");
            let m = crate::padic::pow_checked(p, expect_prec).unwrap();
            // (-1)^(n+1) p^(n-v) * u^{-1} mod p^expect_prec
            let mut expect: u64 = 1;
            for _ in 0..(n - v as i64) {
                expect = expect * p % m;
            }
            let uinv = PadicApprox::new(p, u, expect_prec).inverse().unwrap();
            expect = (expect as u128 * uinv.value() as u128 % m as u128) as u64;
            if n % 2 == 0 {
                expect = if expect == 0 { 0 } else { m - expect };
            }
            assert_eq!(c.value(), expect, "coefficient at degree {n}");
        }
        assert!(ledger.entries.iter().all(|&(d, l)| {
            l == int_valuation(p, d)
        }));
    }

    /// The ladder series: integrating sum p^{3i} t^{p^{2i}} dlog t yields
    /// sum p^i t^{p^{2i}}.
    #[test]
    fn integrate_ladder_series_dlog() {
        let p: u64 = 5;
        let pol = policy(10, 700);
        let mut f = TruncatedSeries::zero(p, pol);
        let mut deg = 1i64; // p^0
        let mut coeff = 1i64; // p^(3*0)
        for _ in 0..2 {
            f.set(deg, PadicApprox::new(p, coeff, 10));
            deg *= (p * p) as i64;
            coeff *= (p * p * p) as i64;
        }
        let (g, _) = integrate_form(&f, FormBasis::Dlog).unwrap();
        assert_eq!(g.coeff(1).value(), 1);
        // p^3 / p^2 = p at degree p^2
        assert_eq!(g.coeff((p * p) as i64).valuation(), Valuation::Finite(1));
    }

    #[test]
    fn residue_obstruction_dlog() {
        let pol = policy(6, 10);
        let f = TruncatedSeries::one(5, pol); // dlog t itself
        let err = integrate_form(&f, FormBasis::Dlog).unwrap_err();
        assert!(matches!(err, PadicError::ResidueObstruction { .. }));
    }

    #[test]
    fn growth_certificate_examples() {
        let p: u64 = 5;
        let pol = policy(8, 30);
        // sum p^n t^n: val = n >= 1*n - 0
        let mut s = TruncatedSeries::zero(p, pol);
        let mut c = PadicApprox::one(p, 8);
        for n in 0..8 {
            s.set(n, c);
            c = c.mul_i64(p as i64);
        }
        let cert = growth_check(&s, Rat::from_integer(1), Rat::from_integer(0));
        assert!(cert.holds());

        // log-series profile val = n - v_p(n) against c=1/2, d=2 up to 500
        let profile: Vec<(i64, Option<i64>)> = (1..=500)
            .map(|n| (n, Some(n - int_valuation(p, n) as i64)))
            .collect();
        let cert = growth_check_profile(&profile, Rat::new(1, 2), Rat::from_integer(2), (1, 500));
        assert!(cert.holds());

        // formal primitive of the slope-half class: valuations -i at p^{2i}
        let profile: Vec<(i64, Option<i64>)> = (0..5)
            .map(|i| ((p as i64).pow(2 * i as u32), Some(-(i as i64))))
            .collect();
        let cert = growth_check_profile(&profile, Rat::new(1, 100), Rat::from_integer(0), (1, 400));
        assert!(!cert.holds());
    }

    #[test]
    fn erroring_policy_rejects_window_escape() {
        let pol = policy(6, 4).erroring();
        let a = TruncatedSeries::monomial(5, pol, 3, 1);
        let b = TruncatedSeries::monomial(5, pol, 2, 1);
        assert!(matches!(
            a.mul(&b),
            Err(PadicError::PrecisionExhausted(_))
        ));
        // saturating policy silently drops the escaping term
        let pol2 = policy(6, 4);
        let a2 = TruncatedSeries::monomial(5, pol2, 3, 1);
        let b2 = TruncatedSeries::monomial(5, pol2, 2, 1);
        assert!(a2.mul(&b2).unwrap().is_zero_at_precision());
    }

    #[test]
    fn literal_roundtrip() {
        let lit = "p=5 N=8 D=300 ; 0:1, 1:4, 7:124";
        let s = parse_series(lit).unwrap();
        assert_eq!(emit_series(&s), lit);
        let lit2 = "p=7 N=6 D=20 L=-20 ; -3:2, 0:6";
        let s2 = parse_series(lit2).unwrap();
        assert_eq!(emit_series(&s2), lit2);
    }

    #[test]
    fn integrate_then_differentiate_recovers() {
        let p: u64 = 5;
        let pol = policy(10, 25);
        let f = TruncatedSeries::from_coeffs(p, pol, [(1, 3), (2, 50), (4, 7), (10, 125)]);
        let (g, ledger) = integrate_form(&f, FormBasis::Dlog).unwrap();
        let back = g.differentiate(FormBasis::Dlog);
        for (d, c) in f.terms() {
            let lost = ledger
                .entries
                .iter()
                .find(|&&(t, _)| t == d)
                .map(|&(_, l)| l)
                .unwrap_or(0);
            let prec = c.precision() - lost;
            assert_eq!(
                back.coeff(d).truncate(prec).value(),
                c.truncate(prec).value(),
                "degree {d}"
            );
        }
    }
}
