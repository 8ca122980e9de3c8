//! Arithmetic in Z/p^N with explicit absolute-precision tracking.
//!
//! Every value carries the modulus exponent it is known at. An `exact_zero`
//! flag distinguishes the genuine zero (valuation +infinity) from a residue
//! that merely vanishes at working precision.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum PadicError {
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("policy mismatch: {0}")]
    PolicyMismatch(String),
    #[error("p^{exp} does not fit the 64-bit value carrier (p = {prime})")]
    ModulusOverflow { prime: u64, exp: u32 },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("residue obstruction: constant term {residue} is a unit at precision {precision}")]
    ResidueObstruction { residue: u64, precision: u32 },
    #[error("valuation underflow at degree {degree}: formal valuation {valuation}")]
    ValuationUnderflow { degree: i64, valuation: i64 },
}

/// p-adic valuation, capped at the working precision for inexact values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Valuation {
    Finite(u32),
    /// Sentinel for the exact zero.
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn at_least(self, bound: u32) -> bool {
        match self {
            Valuation::Finite(v) => v >= bound,
            Valuation::Infinite => true,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Largest N with p^N representable in the 64-bit carrier. Exact integer
/// constants are created at this precision so they never limit a
/// computation's precision.
pub fn max_precision(prime: u64) -> u32 {
    let mut n = 0;
    let mut acc: u64 = 1;
    while let Some(next) = acc.checked_mul(prime) {
        acc = next;
        n += 1;
    }
    n
}

/// p^exp as u64, or an error when it overflows the carrier.
pub fn pow_checked(prime: u64, exp: u32) -> Result<u64, PadicError> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc
            .checked_mul(prime)
            .ok_or(PadicError::ModulusOverflow { prime, exp })?;
    }
    Ok(acc)
}

/// Residue in Z/p^N with its absolute precision N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadicApprox {
    prime: u64,
    value: u64,
    precision: u32,
    exact_zero: bool,
}

impl PadicApprox {
    pub fn new(prime: u64, value: i64, precision: u32) -> Self {
        assert!(prime >= 2, "prime must be at least 2");
        assert!(precision >= 1, "precision must be positive");
        let m = pow_checked(prime, precision).expect("modulus overflow");
        let v = value.rem_euclid(m as i64) as u64;
        PadicApprox {
            prime,
            value: v,
            precision,
            exact_zero: false,
        }
    }

    pub fn from_u64(prime: u64, value: u64, precision: u32) -> Self {
        let m = pow_checked(prime, precision).expect("modulus overflow");
        PadicApprox {
            prime,
            value: value % m,
            precision,
            exact_zero: false,
        }
    }

    /// The exact zero: zero at every precision.
    pub fn exact_zero(prime: u64, precision: u32) -> Self {
        PadicApprox {
            prime,
            value: 0,
            precision,
            exact_zero: true,
        }
    }

    pub fn one(prime: u64, precision: u32) -> Self {
        PadicApprox::from_u64(prime, 1, precision)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> u64 {
        pow_checked(self.prime, self.precision).expect("modulus overflow")
    }

    pub fn is_exact_zero(&self) -> bool {
        self.exact_zero
    }

    /// Zero at working precision (including the exact zero).
    pub fn is_zero(&self) -> bool {
        self.exact_zero || self.value == 0
    }

    pub fn valuation(&self) -> Valuation {
        if self.exact_zero {
            return Valuation::Infinite;
        }
        if self.value == 0 {
            return Valuation::Finite(self.precision);
        }
        let mut v = 0;
        let mut x = self.value;
        while x.is_multiple_of(self.prime) {
            x /= self.prime;
            v += 1;
        }
        Valuation::Finite(v)
    }

    /// Drop to a lower absolute precision.
    pub fn truncate(&self, precision: u32) -> Self {
        assert!(precision >= 1);
        if precision >= self.precision {
            return *self;
        }
        let m = pow_checked(self.prime, precision).expect("modulus overflow");
        PadicApprox {
            prime: self.prime,
            value: self.value % m,
            precision,
            exact_zero: self.exact_zero,
        }
    }

    fn check(&self, other: &Self) -> Result<(), PadicError> {
        if self.prime != other.prime {
            return Err(PadicError::PrimeMismatch(self.prime, other.prime));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, PadicError> {
        self.check(other)?;
        if self.exact_zero && other.exact_zero {
            return Ok(Self::exact_zero(self.prime, self.precision.min(other.precision)));
        }
        if self.exact_zero {
            return Ok(other.truncate(other.precision.min(self.precision)));
        }
        if other.exact_zero {
            return Ok(self.truncate(self.precision.min(other.precision)));
        }
        let prec = self.precision.min(other.precision);
        let m = pow_checked(self.prime, prec)? as u128;
        let v = ((self.value as u128 % m) + (other.value as u128 % m)) % m;
        Ok(PadicApprox {
            prime: self.prime,
            value: v as u64,
            precision: prec,
            exact_zero: false,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        if self.exact_zero {
            return *self;
        }
        let m = self.modulus();
        PadicApprox {
            prime: self.prime,
            value: if self.value == 0 { 0 } else { m - self.value },
            precision: self.precision,
            exact_zero: false,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        self.check(other)?;
        if self.exact_zero || other.exact_zero {
            return Ok(Self::exact_zero(self.prime, self.precision.min(other.precision)));
        }
        let prec = self.precision.min(other.precision);
        let m = pow_checked(self.prime, prec)? as u128;
        let v = (self.value as u128 % m) * (other.value as u128 % m) % m;
        Ok(PadicApprox {
            prime: self.prime,
            value: v as u64,
            precision: prec,
            exact_zero: false,
        })
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        let m = self.modulus() as i128;
        let kk = (k as i128).rem_euclid(m) as u64;
        let other = PadicApprox {
            prime: self.prime,
            value: kk,
            precision: self.precision,
            exact_zero: false,
        };
        if k == 0 {
            return Self::exact_zero(self.prime, self.precision);
        }
        self.mul(&other).expect("same prime")
    }

    /// Multiplicative inverse of a unit.
    pub fn inverse(&self) -> Result<Self, PadicError> {
        if self.is_zero() || self.value.is_multiple_of(self.prime) {
            return Err(PadicError::PrecisionExhausted(format!(
                "inverse of non-unit {} mod {}^{}",
                self.value, self.prime, self.precision
            )));
        }
        // Hensel lift of the mod-p inverse.
        let m = self.modulus() as u128;
        let mut inv = mod_inverse_prime(self.value % self.prime, self.prime) as u128;
        let x = self.value as u128;
        loop {
            let r = (x * inv) % m;
            if r == 1 {
                break;
            }
            // inv <- inv * (2 - x*inv)
            let two_minus = (2 + m - r) % m;
            inv = (inv * two_minus) % m;
        }
        Ok(PadicApprox {
            prime: self.prime,
            value: inv as u64,
            precision: self.precision,
            exact_zero: false,
        })
    }

    /// Exact division by p^k; the precision drops by k.
    /// Fails when the value is not divisible at working precision.
    pub fn divide_p_pow(&self, k: u32) -> Result<Self, PadicError> {
        if k == 0 {
            return Ok(*self);
        }
        if self.exact_zero {
            return Ok(Self::exact_zero(self.prime, self.precision.saturating_sub(k).max(1)));
        }
        if k >= self.precision {
            return Err(PadicError::PrecisionExhausted(format!(
                "division by {}^{} at precision {}",
                self.prime, k, self.precision
            )));
        }
        let pk = pow_checked(self.prime, k)?;
        if !self.value.is_multiple_of(pk) {
            return Err(PadicError::PrecisionExhausted(format!(
                "value {} not divisible by {}^{}",
                self.value, self.prime, k
            )));
        }
        Ok(PadicApprox {
            prime: self.prime,
            value: self.value / pk,
            precision: self.precision - k,
            exact_zero: false,
        })
    }

    /// Multiply by p^k (no precision change in absolute terms above the shift).
    pub fn mul_p_pow(&self, k: u32) -> Self {
        if self.exact_zero {
            return *self;
        }
        let m = self.modulus() as u128;
        let pk = pow_checked(self.prime, k.min(self.precision)).expect("bounded") as u128;
        PadicApprox {
            prime: self.prime,
            value: ((self.value as u128 * pk) % m) as u64,
            precision: self.precision,
            exact_zero: false,
        }
    }

    /// p^shift * value carried at the raised absolute precision
    /// min(target, shift + self.precision): the shift widens the modulus
    /// instead of wrapping inside the old one.
    pub fn raise_mul_p_pow(&self, shift: u32, target: u32) -> Self {
        if self.exact_zero {
            return Self::exact_zero(self.prime, target);
        }
        let new_prec = target.min(shift + self.precision).max(1);
        let m = pow_checked(self.prime, new_prec).expect("modulus fits") as u128;
        let pk = pow_checked(self.prime, shift.min(new_prec)).expect("bounded") as u128;
        PadicApprox {
            prime: self.prime,
            value: ((self.value as u128 % m) * pk % m) as u64,
            precision: new_prec,
            exact_zero: false,
        }
    }

    /// Division by an arbitrary nonzero integer n = p^v * u: consumes v digits
    /// of precision, returns the lost amount.
    pub fn divide_int(&self, n: i64) -> Result<(Self, u32), PadicError> {
        assert!(n != 0);
        let (v, unit) = split_p_part(self.prime, n);
        let divided = self.divide_p_pow(v)?;
        let inv = PadicApprox::new(self.prime, unit, divided.precision).inverse()?;
        Ok((divided.mul(&inv)?, v))
    }
}

impl fmt::Display for PadicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exact_zero {
            write!(f, "0 (exact)")
        } else {
            write!(f, "{} mod {}^{}", self.value, self.prime, self.precision)
        }
    }
}

/// n = p^v * u with u coprime to p; returns (v, u).
pub fn split_p_part(prime: u64, n: i64) -> (u32, i64) {
    assert!(n != 0);
    let mut v = 0;
    let mut u = n;
    while u % (prime as i64) == 0 && u != 0 {
        u /= prime as i64;
        v += 1;
    }
    (v, u)
}

/// p-adic valuation of a nonzero integer.
pub fn int_valuation(prime: u64, n: i64) -> u32 {
    split_p_part(prime, n).0
}

fn mod_inverse_prime(a: u64, p: u64) -> u64 {
    // Fermat: a^(p-2) mod p.
    let mut base = a % p;
    let mut exp = p - 2;
    let mut acc: u128 = 1;
    let m = p as u128;
    let mut b = base as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    base = acc as u64;
    base
}

/// Lower bound information about a valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValBound {
    Exact(i64),
    /// Vanishes modulo p^bound; the true valuation is >= bound.
    AtLeast(i64),
    Infinite,
}

impl ValBound {
    pub fn lower(&self) -> Option<i64> {
        match self {
            ValBound::Exact(v) | ValBound::AtLeast(v) => Some(*v),
            ValBound::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScaledInner {
    ExactZero,
    /// Indistinguishable from zero: known to vanish mod p^abs.
    ApproxZero { abs: i64 },
    Value { exp: i64, unit: PadicApprox },
}

/// p^exp * unit with the unit tracked at relative precision. The carrier for
/// Frobenius-matrix entries, where valuations may be negative. Cancellation
/// that exhausts precision degrades to an approximate zero which remembers
/// the modulus it vanishes at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaledPadic {
    inner: ScaledInner,
    prime: u64,
}

impl ScaledPadic {
    pub fn zero(prime: u64) -> Self {
        ScaledPadic {
            inner: ScaledInner::ExactZero,
            prime,
        }
    }

    pub fn approx_zero(prime: u64, abs: i64) -> Self {
        ScaledPadic {
            inner: ScaledInner::ApproxZero { abs },
            prime,
        }
    }

    /// Build p^exp * unit, normalizing so the unit part has valuation 0.
    pub fn new(exp: i64, unit: PadicApprox) -> Self {
        let prime = unit.prime();
        if unit.is_exact_zero() {
            return Self::zero(prime);
        }
        if unit.is_zero() {
            return Self::approx_zero(prime, exp + unit.precision() as i64);
        }
        let v = unit.valuation().finite().expect("nonzero");
        if v == 0 {
            return ScaledPadic {
                inner: ScaledInner::Value { exp, unit },
                prime,
            };
        }
        let shifted = unit.divide_p_pow(v).expect("valuation checked");
        ScaledPadic {
            inner: ScaledInner::Value {
                exp: exp + v as i64,
                unit: shifted,
            },
            prime,
        }
    }

    pub fn from_int(prime: u64, n: i64, rel_precision: u32) -> Self {
        if n == 0 {
            return Self::zero(prime);
        }
        let (v, u) = split_p_part(prime, n);
        ScaledPadic::new(v as i64, PadicApprox::new(prime, u, rel_precision))
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        !matches!(self.inner, ScaledInner::Value { .. })
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.inner, ScaledInner::ExactZero)
    }

    pub fn val_bound(&self) -> ValBound {
        match self.inner {
            ScaledInner::ExactZero => ValBound::Infinite,
            ScaledInner::ApproxZero { abs } => ValBound::AtLeast(abs),
            ScaledInner::Value { exp, .. } => ValBound::Exact(exp),
        }
    }

    /// Valuation as an integer; None when not exactly determined.
    pub fn valuation(&self) -> Option<i64> {
        match self.inner {
            ScaledInner::Value { exp, .. } => Some(exp),
            _ => None,
        }
    }

    pub fn unit(&self) -> Option<PadicApprox> {
        match self.inner {
            ScaledInner::Value { unit, .. } => Some(unit),
            _ => None,
        }
    }

    /// Absolute precision: the value is determined modulo p^(this).
    pub fn abs_precision(&self) -> Option<i64> {
        match self.inner {
            ScaledInner::ExactZero => None,
            ScaledInner::ApproxZero { abs } => Some(abs),
            ScaledInner::Value { exp, unit } => Some(exp + unit.precision() as i64),
        }
    }

    pub fn neg(&self) -> Self {
        match self.inner {
            ScaledInner::Value { exp, unit } => ScaledPadic {
                inner: ScaledInner::Value {
                    exp,
                    unit: unit.neg(),
                },
                prime: self.prime,
            },
            _ => *self,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        if self.prime != other.prime {
            return Err(PadicError::PrimeMismatch(self.prime, other.prime));
        }
        use ScaledInner::*;
        Ok(match (self.inner, other.inner) {
            (ExactZero, _) | (_, ExactZero) => Self::zero(self.prime),
            (ApproxZero { abs: a }, ApproxZero { abs: b }) => Self::approx_zero(self.prime, a + b),
            (ApproxZero { abs }, Value { exp, .. }) | (Value { exp, .. }, ApproxZero { abs }) => {
                Self::approx_zero(self.prime, abs + exp)
            }
            (Value { exp: e1, unit: u1 }, Value { exp: e2, unit: u2 }) => {
                ScaledPadic::new(e1 + e2, u1.mul(&u2)?)
            }
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, PadicError> {
        if self.prime != other.prime {
            return Err(PadicError::PrimeMismatch(self.prime, other.prime));
        }
        use ScaledInner::*;
        Ok(match (self.inner, other.inner) {
            (ExactZero, _) => *other,
            (_, ExactZero) => *self,
            (ApproxZero { abs: a }, ApproxZero { abs: b }) => {
                Self::approx_zero(self.prime, a.min(b))
            }
            (ApproxZero { abs }, Value { exp, unit })
            | (Value { exp, unit }, ApproxZero { abs }) => {
                if exp >= abs {
                    Self::approx_zero(self.prime, abs)
                } else {
                    // Value survives; its absolute precision is capped by abs.
                    let rel = ((abs - exp) as u32).min(unit.precision()).max(1);
                    ScaledPadic::new(exp, unit.truncate(rel))
                }
            }
            (Value { exp: e1, unit: u1 }, Value { exp: e2, unit: u2 }) => {
                let e = e1.min(e2);
                let abs = (e1 + u1.precision() as i64).min(e2 + u2.precision() as i64);
                let rel = ((abs - e) as u32).max(1);
                let a = u1.raise_mul_p_pow((e1 - e) as u32, rel);
                let b = u2.raise_mul_p_pow((e2 - e) as u32, rel);
                let sum = a.add(&b)?;
                ScaledPadic::new(e, sum)
            }
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        self.add(&other.neg())
    }

    pub fn inverse(&self) -> Result<Self, PadicError> {
        match self.inner {
            ScaledInner::Value { exp, unit } => Ok(ScaledPadic {
                inner: ScaledInner::Value {
                    exp: -exp,
                    unit: unit.inverse()?,
                },
                prime: self.prime,
            }),
            _ => Err(PadicError::PrecisionExhausted(
                "inverse of (approximate) zero".into(),
            )),
        }
    }

    /// Multiply by p^k for k of either sign.
    pub fn shift(&self, k: i64) -> Self {
        match self.inner {
            ScaledInner::ExactZero => *self,
            ScaledInner::ApproxZero { abs } => Self::approx_zero(self.prime, abs + k),
            ScaledInner::Value { exp, unit } => ScaledPadic {
                inner: ScaledInner::Value { exp: exp + k, unit },
                prime: self.prime,
            },
        }
    }

    /// Literal form `<valuation>:<unit residue>`; zero prints as `0:0`.
    pub fn to_literal(&self) -> String {
        match self.inner {
            ScaledInner::Value { exp, unit } => format!("{}:{}", exp, unit.value()),
            _ => "0:0".to_string(),
        }
    }

    pub fn from_literal(prime: u64, rel_precision: u32, s: &str) -> Result<Self, PadicError> {
        let (e, u) = s
            .split_once(':')
            .ok_or_else(|| PadicError::PolicyMismatch(format!("bad scaled literal {s:?}")))?;
        let exp: i64 = e
            .trim()
            .parse()
            .map_err(|_| PadicError::PolicyMismatch(format!("bad valuation in {s:?}")))?;
        let unit: i64 = u
            .trim()
            .parse()
            .map_err(|_| PadicError::PolicyMismatch(format!("bad unit in {s:?}")))?;
        if unit == 0 {
            return Ok(Self::zero(prime));
        }
        Ok(ScaledPadic::new(exp, PadicApprox::new(prime, unit, rel_precision)))
    }
}

impl fmt::Display for ScaledPadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.inner {
            ScaledInner::ExactZero => write!(f, "0"),
            ScaledInner::ApproxZero { abs } => write!(f, "O(p^{abs})"),
            ScaledInner::Value { exp, unit } => write!(f, "p^{}*{}", exp, unit.value()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OnExhaustion {
    Error,
    Saturate,
}

/// Caps for series arithmetic: modulus exponent, degree window, and the
/// response when a computation pushes terms outside the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub cap_n: u32,
    pub cap_degree: i64,
    pub low_degree: i64,
    pub on_exhaustion: OnExhaustion,
}

impl PrecisionPolicy {
    pub fn new(cap_n: u32, cap_degree: i64) -> Self {
        assert!(cap_n >= 1);
        PrecisionPolicy {
            cap_n,
            cap_degree,
            low_degree: 0,
            on_exhaustion: OnExhaustion::Saturate,
        }
    }

    pub fn laurent(cap_n: u32, cap_degree: i64) -> Self {
        assert!(cap_n >= 1);
        PrecisionPolicy {
            cap_n,
            cap_degree,
            low_degree: -cap_degree,
            on_exhaustion: OnExhaustion::Saturate,
        }
    }

    pub fn with_low(mut self, low: i64) -> Self {
        assert!(self.cap_degree >= low);
        self.low_degree = low;
        self
    }

    pub fn erroring(mut self) -> Self {
        self.on_exhaustion = OnExhaustion::Error;
        self
    }

    pub fn compatible(&self, other: &Self) -> bool {
        self.cap_degree == other.cap_degree && self.low_degree == other.low_degree
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_and_exact_zero() {
        let p = PadicApprox::new(5, 50, 6);
        assert_eq!(p.valuation(), Valuation::Finite(2));
        let z = PadicApprox::exact_zero(5, 6);
        assert_eq!(z.valuation(), Valuation::Infinite);
        let soft = PadicApprox::new(5, 0, 6);
        assert_eq!(soft.valuation(), Valuation::Finite(6));
        assert!(!soft.is_exact_zero());
    }

    #[test]
    fn add_mul_precision_floor() {
        let a = PadicApprox::new(5, 7, 6);
        let b = PadicApprox::new(5, 3, 4);
        let s = a.add(&b).unwrap();
        assert_eq!(s.precision(), 4);
        assert_eq!(s.value(), 10);
        let m = a.mul(&b).unwrap();
        assert_eq!(m.precision(), 4);
        assert_eq!(m.value(), 21);
    }

    #[test]
    fn inverse_is_hensel_exact() {
        let a = PadicApprox::new(7, 3, 8);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap().value(), 1);
        assert!(PadicApprox::new(7, 14, 8).inverse().is_err());
    }

    #[test]
    fn divide_int_tracks_loss() {
        let a = PadicApprox::new(5, 50, 6);
        let (q, loss) = a.divide_int(25).unwrap();
        assert_eq!(loss, 2);
        assert_eq!(q.precision(), 4);
        assert_eq!(q.value(), 2);
    }

    #[test]
    fn scaled_addition_aligns_exponents() {
        // p^-1 * 2 + p^0 * 3 = p^-1 * (2 + 3p)
        let a = ScaledPadic::new(-1, PadicApprox::new(5, 2, 6));
        let b = ScaledPadic::new(0, PadicApprox::new(5, 3, 6));
        let s = a.add(&b).unwrap();
        assert_eq!(s.valuation(), Some(-1));
        assert_eq!(s.unit().unwrap().value(), 2 + 3 * 5);
    }

    #[test]
    fn scaled_literal_roundtrip() {
        let x = ScaledPadic::from_literal(5, 8, "-2:13").unwrap();
        assert_eq!(x.to_literal(), "-2:13");
        assert_eq!(ScaledPadic::zero(5).to_literal(), "0:0");
    }

    #[test]
    fn valuation_multiplicativity() {
        let a = PadicApprox::new(5, 75, 8);
        let b = PadicApprox::new(5, 10, 8);
        let prod = a.mul(&b).unwrap();
        assert_eq!(
            prod.valuation(),
            Valuation::Finite(
                a.valuation().finite().unwrap() + b.valuation().finite().unwrap()
            )
        );
    }
}
