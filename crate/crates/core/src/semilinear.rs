//! Finite-dimensional Frobenius modules over Q_p with the residue field F_p,
//! so the semilinear structure is plain linear algebra: Newton slopes, Tate
//! twists, the alpha/iota comparison maps, tensor decompositions, and cyclic
//! amplification.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::padic::{max_precision, pow_checked, PadicApprox, PadicError, ScaledPadic, ValBound};
use crate::series::Rat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SemilinearError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("indeterminate valuation of characteristic coefficient {index}: hull needs {needed}, only known to vanish mod p^{known}")]
    IndeterminateValuation {
        index: usize,
        needed: String,
        known: i64,
    },
    #[error("precision too low: elementary divisor p^{divisor} within margin {margin} of working precision {precision}")]
    PrecisionTooLow {
        divisor: u32,
        precision: u32,
        margin: u32,
    },
    #[error("matrix not invertible at working precision")]
    NotInvertible,
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// Slopes with multiplicities, sorted ascending; multiplicities sum to dim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeMultiset {
    pub slopes: Vec<(Rat, usize)>,
}

impl SlopeMultiset {
    pub fn dim(&self) -> usize {
        self.slopes.iter().map(|&(_, m)| m).sum()
    }

    /// Shift every slope by delta, scale every multiplicity by factor.
    pub fn shifted(&self, delta: Rat, factor: usize) -> Self {
        SlopeMultiset {
            slopes: self
                .slopes
                .iter()
                .map(|&(s, m)| (s + delta, m * factor))
                .collect(),
        }
    }
}

impl fmt::Display for SlopeMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .slopes
            .iter()
            .map(|(s, m)| format!("{}x{}", s, m))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Invertible linear Frobenius operator on a finite-dimensional p-adic space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrobeniusMatrix {
    prime: u64,
    dim: usize,
    entries: Vec<ScaledPadic>,
}

/// Tate twist parameters (r, s) with gamma = r/s.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwistParams {
    pub r: i64,
    pub s: u32,
}

impl TwistParams {
    pub fn new(r: i64, s: u32) -> Self {
        assert!(s >= 1, "s must be positive");
        TwistParams { r, s }
    }

    pub fn gamma(&self) -> Rat {
        Ratio::new(self.r, self.s as i64)
    }

    pub fn coprime(&self) -> bool {
        self.r.unsigned_abs().gcd(&(self.s as u64)) == 1
    }
}

impl FrobeniusMatrix {
    pub fn new(prime: u64, dim: usize, entries: Vec<ScaledPadic>) -> Self {
        assert_eq!(entries.len(), dim * dim);
        FrobeniusMatrix {
            prime,
            dim,
            entries,
        }
    }

    pub fn zero(prime: u64, dim: usize) -> Self {
        FrobeniusMatrix {
            prime,
            dim,
            entries: vec![ScaledPadic::zero(prime); dim * dim],
        }
    }

    pub fn identity(prime: u64, dim: usize, rel_precision: u32) -> Self {
        let mut m = Self::zero(prime, dim);
        for i in 0..dim {
            m.set(i, i, ScaledPadic::from_int(prime, 1, rel_precision));
        }
        m
    }

    /// Build from integer entries.
    pub fn from_ints(prime: u64, dim: usize, rel_precision: u32, data: &[i64]) -> Self {
        assert_eq!(data.len(), dim * dim);
        FrobeniusMatrix {
            prime,
            dim,
            entries: data
                .iter()
                .map(|&n| ScaledPadic::from_int(prime, n, rel_precision))
                .collect(),
        }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> ScaledPadic {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ScaledPadic) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn scale(&self, k: &ScaledPadic) -> Result<Self, SemilinearError> {
        let mut out = Self::zero(self.prime, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(i, j, self.get(i, j).mul(k)?);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, SemilinearError> {
        if self.dim != other.dim {
            return Err(SemilinearError::DimensionMismatch(self.dim, other.dim));
        }
        let mut out = Self::zero(self.prime, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(i, j, self.get(i, j).add(&other.get(i, j))?);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SemilinearError> {
        if self.dim != other.dim {
            return Err(SemilinearError::DimensionMismatch(self.dim, other.dim));
        }
        let mut out = Self::zero(self.prime, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(i, j, self.get(i, j).sub(&other.get(i, j))?);
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SemilinearError> {
        if self.dim != other.dim {
            return Err(SemilinearError::DimensionMismatch(self.dim, other.dim));
        }
        let mut out = Self::zero(self.prime, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut acc = ScaledPadic::zero(self.prime);
                for k in 0..self.dim {
                    acc = acc.add(&self.get(i, k).mul(&other.get(k, j))?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Self, SemilinearError> {
        let mut acc = Self::identity(self.prime, self.dim, max_precision(self.prime));
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn apply(&self, v: &[ScaledPadic]) -> Result<Vec<ScaledPadic>, SemilinearError> {
        if v.len() != self.dim {
            return Err(SemilinearError::DimensionMismatch(v.len(), self.dim));
        }
        let mut out = vec![ScaledPadic::zero(self.prime); self.dim];
        for i in 0..self.dim {
            let mut acc = ScaledPadic::zero(self.prime);
            for k in 0..self.dim {
                acc = acc.add(&self.get(i, k).mul(&v[k])?)?;
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Division-free characteristic polynomial det(xI - M); returns the
    /// coefficient vector c with c[0] = 1 and char = sum c[i] x^(n-i).
    pub fn char_poly(&self) -> Result<Vec<ScaledPadic>, SemilinearError> {
        let n = self.dim;
        let prime = self.prime;
        if n == 0 {
            return Ok(vec![ScaledPadic::from_int(prime, 1, 8)]);
        }
        let one = ScaledPadic::from_int(prime, 1, max_precision(prime));
        // Berkowitz iteration over leading principal minors.
        let mut prev = vec![one, self.get(0, 0).neg()];
        for r in 1..n {
            // v = [1, -a, -R S, -R A S, ..., -R A^{r-1} S]
            let a = self.get(r, r);
            let row: Vec<ScaledPadic> = (0..r).map(|j| self.get(r, j)).collect();
            let col: Vec<ScaledPadic> = (0..r).map(|i| self.get(i, r)).collect();
            let mut v = Vec::with_capacity(r + 2);
            v.push(one);
            v.push(a.neg());
            let mut w = col.clone();
            for _ in 0..r {
                // -R w
                let mut dot = ScaledPadic::zero(prime);
                for k in 0..r {
                    dot = dot.add(&row[k].mul(&w[k])?)?;
                }
                v.push(dot.neg());
                // w <- A_r w (leading r x r block)
                let mut nw = vec![ScaledPadic::zero(prime); r];
                for i in 0..r {
                    let mut acc = ScaledPadic::zero(prime);
                    for k in 0..r {
                        acc = acc.add(&self.get(i, k).mul(&w[k])?)?;
                    }
                    nw[i] = acc;
                }
                w = nw;
            }
            // Toeplitz product: next[i] = sum_j v[i-j] * prev[j]
            let mut next = vec![ScaledPadic::zero(prime); r + 2];
            for (i, slot) in next.iter_mut().enumerate() {
                let mut acc = ScaledPadic::zero(prime);
                for (j, pj) in prev.iter().enumerate() {
                    if i >= j && i - j < v.len() {
                        acc = acc.add(&v[i - j].mul(pj)?)?;
                    }
                }
                *slot = acc;
            }
            prev = next;
        }
        Ok(prev)
    }

    /// Matrix literal: JSON array-of-arrays of `"<valuation>:<unit>"` strings.
    pub fn to_literal(&self) -> String {
        let rows: Vec<Vec<String>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).to_literal()).collect())
            .collect();
        serde_json::to_string(&rows).expect("serializable")
    }

    pub fn from_literal(prime: u64, rel_precision: u32, s: &str) -> Result<Self, SemilinearError> {
        let rows: Vec<Vec<String>> = serde_json::from_str(s)
            .map_err(|e| PadicError::PolicyMismatch(format!("bad matrix literal: {e}")))?;
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(SemilinearError::DimensionMismatch(row.len(), dim));
            }
            for cell in row {
                entries.push(ScaledPadic::from_literal(prime, rel_precision, cell)?);
            }
        }
        Ok(FrobeniusMatrix::new(prime, dim, entries))
    }
}

/// Newton slopes read from the lower convex hull of the characteristic
/// polynomial's coefficient valuations.
pub fn newton_slopes(m: &FrobeniusMatrix) -> Result<SlopeMultiset, SemilinearError> {
    let coeffs = m.char_poly()?;
    newton_slopes_of_char_poly(&coeffs)
}

pub fn newton_slopes_of_char_poly(
    coeffs: &[ScaledPadic],
) -> Result<SlopeMultiset, SemilinearError> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(SlopeMultiset { slopes: vec![] });
    }
    // Points (i, val(c_i)); the hull endpoints must be exactly determined.
    let mut exact: Vec<(i64, i64)> = Vec::new();
    let mut pending: Vec<(usize, i64)> = Vec::new(); // AtLeast points
    for (i, c) in coeffs.iter().enumerate() {
        match c.val_bound() {
            ValBound::Exact(v) => exact.push((i as i64, v)),
            ValBound::AtLeast(b) => pending.push((i, b)),
            ValBound::Infinite => {}
        }
    }
    if exact.first().map(|&(x, _)| x) != Some(0) {
        return Err(SemilinearError::IndeterminateValuation {
            index: 0,
            needed: "leading coefficient".into(),
            known: 0,
        });
    }
    let det_exact = exact.last().map(|&(x, _)| x) == Some(n as i64);
    let inf_det = coeffs[n].val_bound() == ValBound::Infinite;
    if !det_exact || inf_det {
        return Err(SemilinearError::IndeterminateValuation {
            index: n,
            needed: "determinant valuation".into(),
            known: coeffs[n].val_bound().lower().unwrap_or(0),
        });
    }
    // Lower convex hull (monotone chain) over the exact points.
    let hull = lower_hull(&exact);
    // Soundness: every point only known as AtLeast(b) must lie on or above
    // the hull, i.e. hull(i) <= b.
    for &(i, b) in &pending {
        let h = hull_value(&hull, i as i64);
        if h > Rat::from_integer(b) {
            return Err(SemilinearError::IndeterminateValuation {
                index: i,
                needed: format!("hull height {h}"),
                known: b,
            });
        }
    }
    let mut slopes = Vec::new();
    for w in hull.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        let run = (x1 - x0) as usize;
        let slope = Ratio::new(y1 - y0, x1 - x0);
        slopes.push((slope, run));
    }
    // Merge equal adjacent slopes.
    let mut merged: Vec<(Rat, usize)> = Vec::new();
    for (s, m) in slopes {
        if let Some(last) = merged.last_mut() {
            if last.0 == s {
                last.1 += m;
                continue;
            }
        }
        merged.push((s, m));
    }
    Ok(SlopeMultiset { slopes: merged })
}

fn lower_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Keep b only if it turns left (strictly below segment a-p).
            let cross = (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

fn hull_value(hull: &[(i64, i64)], x: i64) -> Rat {
    for w in hull.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if x >= x0 && x <= x1 {
            return Rat::from_integer(y0)
                + Ratio::new(y1 - y0, x1 - x0) * Rat::from_integer(x - x0);
        }
    }
    // Outside the hull span (can only happen past the last exact point).
    Rat::from_integer(i64::MAX / 4)
}

/// Block matrix of F acting on V(r,s) = V^{(+)s}: component 0 receives
/// p^(-r) F(v_{s-1}) and component i >= 1 receives F(v_{i-1}).
pub fn twist(m: &FrobeniusMatrix, tp: TwistParams) -> Result<FrobeniusMatrix, SemilinearError> {
    let n = m.dim();
    let s = tp.s as usize;
    let prime = m.prime();
    let mut out = FrobeniusMatrix::zero(prime, n * s);
    for block in 0..s {
        let src = (block + s - 1) % s;
        for i in 0..n {
            for j in 0..n {
                let mut e = m.get(i, j);
                if block == 0 {
                    e = e.shift(-tp.r);
                }
                out.set(block * n + i, src * n + j, e);
            }
        }
    }
    Ok(out)
}

/// alpha: v -> (v, F v, ..., F^{s-1} v) into V(r,s).
pub fn alpha_map(
    m: &FrobeniusMatrix,
    tp: TwistParams,
    v: &[ScaledPadic],
) -> Result<Vec<ScaledPadic>, SemilinearError> {
    if v.len() != m.dim() {
        return Err(SemilinearError::DimensionMismatch(v.len(), m.dim()));
    }
    let mut out = Vec::with_capacity(m.dim() * tp.s as usize);
    let mut cur = v.to_vec();
    for k in 0..tp.s {
        if k > 0 {
            cur = m.apply(&cur)?;
        }
        out.extend(cur.iter().copied());
    }
    Ok(out)
}

/// Operators whose kernels the rank certification understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelOperator {
    /// F^s - p^r on the underlying space.
    FsMinusPr(TwistParams),
    /// F - 1 on the (r,s)-twist.
    FMinusOneOnTwist(TwistParams),
    /// F - 1 on the space itself.
    FMinusOne,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankCertificate {
    pub operator: String,
    pub clearing_factor: i64,
    pub elementary_divisors: Vec<String>,
    pub dim: usize,
    pub precision: u32,
}

#[derive(Debug, Clone)]
pub struct KernelResult {
    pub dim: usize,
    pub basis: Vec<Vec<ScaledPadic>>,
    pub certificate: RankCertificate,
}

/// Margin below working precision at which elementary divisors are deemed
/// unreliable.
pub const RANK_MARGIN: u32 = 2;

/// Kernel dimension at certified precision via p-adic diagonalization.
pub fn kernel_dim(
    m: &FrobeniusMatrix,
    operator: KernelOperator,
    precision: u32,
) -> Result<KernelResult, SemilinearError> {
    let (op_matrix, name) = operator_matrix(m, operator)?;
    kernel_of_matrix(&op_matrix, &name, precision)
}

pub fn operator_matrix(
    m: &FrobeniusMatrix,
    operator: KernelOperator,
) -> Result<(FrobeniusMatrix, String), SemilinearError> {
    let prime = m.prime();
    let rel = max_precision(prime);
    match operator {
        KernelOperator::FsMinusPr(tp) => {
            let fs = m.pow(tp.s)?;
            let pr = FrobeniusMatrix::identity(prime, m.dim(), rel)
                .scale(&ScaledPadic::from_int(prime, 1, rel).shift(tp.r))?;
            Ok((fs.sub(&pr)?, format!("F^{} - p^{}", tp.s, tp.r)))
        }
        KernelOperator::FMinusOneOnTwist(tp) => {
            let tw = twist(m, tp)?;
            let id = FrobeniusMatrix::identity(prime, tw.dim(), rel);
            Ok((
                tw.sub(&id)?,
                format!("F - 1 on V({},{})", tp.r, tp.s),
            ))
        }
        KernelOperator::FMinusOne => {
            let id = FrobeniusMatrix::identity(prime, m.dim(), rel);
            Ok((m.sub(&id)?, "F - 1".to_string()))
        }
    }
}

/// Kernel of an arbitrary ScaledPadic matrix at certified precision.
pub fn kernel_of_matrix(
    a: &FrobeniusMatrix,
    operator_name: &str,
    precision: u32,
) -> Result<KernelResult, SemilinearError> {
    let prime = a.prime();
    let n = a.dim();
    // Clearing exponent: smallest valuation lower bound among entries.
    let mut min_exp: i64 = 0;
    for e in &a.entries {
        if let Some(l) = e.val_bound().lower() {
            min_exp = min_exp.min(l);
        }
    }
    let clearing = -min_exp;
    let w = precision;
    let modulus = pow_checked(prime, w).map_err(SemilinearError::Padic)?;
    let mut data = vec![0u64; n * n];
    for i in 0..n {
        for j in 0..n {
            let e = a.get(i, j).shift(clearing);
            data[i * n + j] = scaled_to_residue(&e, prime, w, modulus)?;
        }
    }
    let (divisors, colops) = smith_divisors(prime, w, n, &mut data);
    // Certify: divisors near the precision cap (but determined) are unsafe.
    for &d in &divisors {
        if d < w && d + RANK_MARGIN >= w {
            return Err(SemilinearError::PrecisionTooLow {
                divisor: d,
                precision: w,
                margin: RANK_MARGIN,
            });
        }
    }
    let dim = divisors.iter().filter(|&&d| d >= w).count();
    let mut basis = Vec::new();
    for (k, &d) in divisors.iter().enumerate() {
        if d >= w {
            let col: Vec<ScaledPadic> = (0..n)
                .map(|i| {
                    let v = colops[i * n + k];
                    if v == 0 {
                        ScaledPadic::zero(prime)
                    } else {
                        ScaledPadic::new(0, PadicApprox::from_u64(prime, v, w))
                    }
                })
                .collect();
            basis.push(col);
        }
    }
    let certificate = RankCertificate {
        operator: operator_name.to_string(),
        clearing_factor: clearing,
        elementary_divisors: divisors
            .iter()
            .map(|&d| {
                if d >= w {
                    format!(">=p^{w}")
                } else {
                    format!("p^{d}")
                }
            })
            .collect(),
        dim,
        precision: w,
    };
    Ok(KernelResult {
        dim,
        basis,
        certificate,
    })
}

/// Kernel dimension of a square residue matrix over Z/p^w; counts the
/// elementary divisors that vanish at the working precision.
pub fn residue_kernel_dim(prime: u64, w: u32, n: usize, data: &[u64]) -> (usize, Vec<u32>) {
    let mut work = data.to_vec();
    let (divisors, _) = smith_divisors(prime, w, n, &mut work);
    let dim = divisors.iter().filter(|&&d| d >= w).count();
    (dim, divisors)
}

fn scaled_to_residue(
    e: &ScaledPadic,
    prime: u64,
    w: u32,
    modulus: u64,
) -> Result<u64, SemilinearError> {
    match e.val_bound() {
        ValBound::Infinite => Ok(0),
        ValBound::AtLeast(b) => {
            if b < w as i64 {
                Err(SemilinearError::PrecisionTooLow {
                    divisor: b.max(0) as u32,
                    precision: w,
                    margin: RANK_MARGIN,
                })
            } else {
                Ok(0)
            }
        }
        ValBound::Exact(v) => {
            if v < 0 {
                return Err(SemilinearError::NotInvertible);
            }
            let unit = e.unit().expect("exact value");
            if (unit.precision() as i64) < (w as i64 - v) {
                return Err(SemilinearError::PrecisionTooLow {
                    divisor: v as u32,
                    precision: w,
                    margin: RANK_MARGIN,
                });
            }
            let pv = pow_checked(prime, (v as u32).min(w)).map_err(SemilinearError::Padic)?;
            Ok((unit.value() as u128 * pv as u128 % modulus as u128) as u64)
        }
    }
}

fn val_of(prime: u64, x: u64, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let mut v = 0;
    let mut y = x;
    while y.is_multiple_of(prime) {
        y /= prime;
        v += 1;
    }
    v
}

/// Smith-style diagonalization over Z/p^w. Returns the elementary divisor
/// valuations (ascending) and the accumulated column transform V with
/// A*V = row-equivalent diagonal, so columns of V at divisors >= w span the
/// kernel at precision.
pub(crate) fn smith_divisors(
    prime: u64,
    w: u32,
    n: usize,
    data: &mut [u64],
) -> (Vec<u32>, Vec<u64>) {
    let modulus = pow_checked(prime, w).expect("modulus fits");
    let mut v = vec![0u64; n * n];
    for i in 0..n {
        v[i * n + i] = 1;
    }
    let mut divisors = vec![w; n];
    for k in 0..n {
        // Find the entry of minimal valuation in the trailing block.
        let mut best: Option<(usize, usize, u32)> = None;
        for i in k..n {
            for j in k..n {
                let val = val_of(prime, data[i * n + j], w);
                if val < w && best.map(|(_, _, bv)| val < bv).unwrap_or(true) {
                    best = Some((i, j, val));
                }
            }
        }
        let Some((pi, pj, pval)) = best else {
            break; // all remaining entries vanish at precision
        };
        // Move pivot to (k, k).
        swap_rows(data, n, k, pi);
        swap_cols(data, &mut v, n, k, pj);
        divisors[k] = pval;
        let pivot = data[k * n + k];
        let pv = pow_checked(prime, pval).expect("bounded");
        let unit = pivot / pv;
        let unit_inv = mod_inverse(prime, unit, modulus);
        // Eliminate the rest of column k (row ops; no transform tracking
        // needed) and row k (column ops applied to v as well).
        for i in (k + 1)..n {
            let e = data[i * n + k];
            if e == 0 {
                continue;
            }
            let factor = (e / pv) as u128 * unit_inv as u128 % modulus as u128;
            for j in k..n {
                let sub = factor * data[k * n + j] as u128 % modulus as u128;
                data[i * n + j] = ((data[i * n + j] as u128 + modulus as u128 - sub)
                    % modulus as u128) as u64;
            }
        }
        for j in (k + 1)..n {
            let e = data[k * n + j];
            if e == 0 {
                continue;
            }
            let factor = (e / pv) as u128 * unit_inv as u128 % modulus as u128;
            for i in k..n {
                let sub = factor * data[i * n + k] as u128 % modulus as u128;
                data[i * n + j] = ((data[i * n + j] as u128 + modulus as u128 - sub)
                    % modulus as u128) as u64;
            }
            for i in 0..n {
                let sub = factor * v[i * n + k] as u128 % modulus as u128;
                v[i * n + j] =
                    ((v[i * n + j] as u128 + modulus as u128 - sub) % modulus as u128) as u64;
            }
        }
    }
    divisors.sort_unstable();
    (divisors, v)
}

fn swap_rows(data: &mut [u64], n: usize, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..n {
        data.swap(a * n + j, b * n + j);
    }
}

fn swap_cols(data: &mut [u64], v: &mut [u64], n: usize, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..n {
        data.swap(i * n + a, i * n + b);
        v.swap(i * n + a, i * n + b);
    }
}

fn mod_inverse(prime: u64, a: u64, modulus: u64) -> u64 {
    // Hensel lift from the mod-p inverse; a must be a unit.
    let a = a as u128;
    let m = modulus as u128;
    let mut seed: u128 = 1;
    {
        let mut b = a % prime as u128;
        let mut e = prime - 2;
        while e > 0 {
            if e & 1 == 1 {
                seed = seed * b % prime as u128;
            }
            b = b * b % prime as u128;
            e >>= 1;
        }
    }
    let mut x = seed;
    loop {
        let r = a * x % m;
        if r == 1 {
            break;
        }
        x = x * ((2 + m - r) % m) % m;
    }
    x as u64
}

/// Solve A x = b over Z/p^w, when every elementary divisor of A is a unit
/// (valuation 0). Used for the bijectivity-transfer checks.
pub fn solve_unit_system(
    a: &FrobeniusMatrix,
    b: &[ScaledPadic],
    precision: u32,
) -> Result<Vec<ScaledPadic>, SemilinearError> {
    let prime = a.prime();
    let n = a.dim();
    // Clear denominators jointly: A' = p^c A, b' = p^c b.
    let mut min_exp: i64 = 0;
    for e in &a.entries {
        if let Some(l) = e.val_bound().lower() {
            min_exp = min_exp.min(l);
        }
    }
    for e in b {
        if let Some(l) = e.val_bound().lower() {
            min_exp = min_exp.min(l);
        }
    }
    let clearing = -min_exp;
    let w = precision;
    let modulus = pow_checked(prime, w).map_err(SemilinearError::Padic)?;
    let mut m = vec![0u64; n * (n + 1)];
    for i in 0..n {
        for j in 0..n {
            m[i * (n + 1) + j] =
                scaled_to_residue(&a.get(i, j).shift(clearing), prime, w, modulus)?;
        }
        m[i * (n + 1) + n] = scaled_to_residue(&b[i].shift(clearing), prime, w, modulus)?;
    }
    // Gaussian elimination with unit pivots.
    let cols = n + 1;
    for k in 0..n {
        let Some(pr) = (k..n).find(|&r| !m[r * cols + k].is_multiple_of(prime)) else {
            return Err(SemilinearError::NotInvertible);
        };
        for j in 0..cols {
            m.swap(k * cols + j, pr * cols + j);
        }
        let inv = mod_inverse(prime, m[k * cols + k], modulus);
        for j in 0..cols {
            m[k * cols + j] = (m[k * cols + j] as u128 * inv as u128 % modulus as u128) as u64;
        }
        for r in 0..n {
            if r != k && m[r * cols + k] != 0 {
                let f = m[r * cols + k] as u128;
                for j in 0..cols {
                    let sub = f * m[k * cols + j] as u128 % modulus as u128;
                    m[r * cols + j] = ((m[r * cols + j] as u128 + modulus as u128 - sub)
                        % modulus as u128) as u64;
                }
            }
        }
    }
    Ok((0..n)
        .map(|i| {
            let val = m[i * (n + 1) + n];
            if val == 0 {
                ScaledPadic::approx_zero(prime, w as i64)
            } else {
                ScaledPadic::new(0, PadicApprox::from_u64(prime, val, w))
            }
        })
        .collect())
}

/// Tensor decomposition parameters: lcm/gcd bookkeeping plus the structural
/// check that Q_p(r,s) (x) Q_p(r',s') and the sum of gcd copies of Q_p(n,m)
/// agree in slopes and fixed points.
#[derive(Debug, Clone, Serialize)]
pub struct TensorDecomposition {
    pub n: i64,
    pub m: u32,
    pub d: u32,
}

/// F on Q_p(r,s): rank-s companion with t^s = p^(-r).
pub fn tate_twist_matrix(prime: u64, tp: TwistParams, rel: u32) -> FrobeniusMatrix {
    let s = tp.s as usize;
    let mut m = FrobeniusMatrix::zero(prime, s);
    for i in 0..s {
        let target = (i + 1) % s;
        let mut e = ScaledPadic::from_int(prime, 1, rel);
        if i + 1 == s {
            e = e.shift(-tp.r);
        }
        m.set(target, i, e);
    }
    m
}

/// F on the tensor product Q_p(r,s) (x) Q_p(r',s').
pub fn tate_tensor_matrix(
    prime: u64,
    t1: TwistParams,
    t2: TwistParams,
    rel: u32,
) -> FrobeniusMatrix {
    let s1 = t1.s as usize;
    let s2 = t2.s as usize;
    let dim = s1 * s2;
    let mut m = FrobeniusMatrix::zero(prime, dim);
    for i in 0..s1 {
        for j in 0..s2 {
            let ti = (i + 1) % s1;
            let tj = (j + 1) % s2;
            let mut e = ScaledPadic::from_int(prime, 1, rel);
            if i + 1 == s1 {
                e = e.shift(-t1.r);
            }
            if j + 1 == s2 {
                e = e.shift(-t2.r);
            }
            m.set(ti * s2 + tj, i * s2 + j, e);
        }
    }
    m
}

pub fn decompose_tensor(
    prime: u64,
    t1: TwistParams,
    t2: TwistParams,
    precision: u32,
) -> Result<TensorDecomposition, SemilinearError> {
    let s = t1.s as i64;
    let sp = t2.s as i64;
    let m = s.lcm(&sp);
    let d = s.gcd(&sp);
    let n = (m / s) * t1.r + (m / sp) * t2.r;
    // Entries carry p-powers up to |n|; the kernel certification needs that
    // much headroom above the claimed precision.
    let rel = precision + n.unsigned_abs() as u32 + 6;
    let lhs = tate_tensor_matrix(prime, t1, t2, rel);
    let block = tate_twist_matrix(prime, TwistParams::new(n, m as u32), rel);
    let mut rhs = FrobeniusMatrix::zero(prime, (m * d) as usize);
    for copy in 0..d as usize {
        let off = copy * m as usize;
        for i in 0..m as usize {
            for j in 0..m as usize {
                rhs.set(off + i, off + j, block.get(i, j));
            }
        }
    }
    let sl = newton_slopes(&lhs)?;
    let sr = newton_slopes(&rhs)?;
    if sl != sr {
        return Err(SemilinearError::IndeterminateValuation {
            index: 0,
            needed: format!("slope multisets agree ({sl} vs {sr})"),
            known: 0,
        });
    }
    let solve_prec = precision + n.unsigned_abs() as u32 + 3;
    let kl = kernel_dim(&lhs, KernelOperator::FMinusOne, solve_prec)?;
    let kr = kernel_dim(&rhs, KernelOperator::FMinusOne, solve_prec)?;
    if kl.dim != kr.dim {
        return Err(SemilinearError::IndeterminateValuation {
            index: 0,
            needed: format!("fixed-point dimensions agree ({} vs {})", kl.dim, kr.dim),
            known: 0,
        });
    }
    Ok(TensorDecomposition {
        n,
        m: m as u32,
        d: d as u32,
    })
}

/// Pairing Q_p(-r,s) (x) Q_p(r,s) -> Q_p(0,1), t^i (x) t^j -> delta_ij,
/// applied to a vector in the tensor basis.
pub fn duality_pairing(prime: u64, s: u32, v: &[ScaledPadic]) -> Result<ScaledPadic, SemilinearError> {
    let s = s as usize;
    if v.len() != s * s {
        return Err(SemilinearError::DimensionMismatch(v.len(), s * s));
    }
    let mut acc = ScaledPadic::zero(prime);
    for i in 0..s {
        acc = acc.add(&v[i * s + i])?;
    }
    Ok(acc)
}

/// Unit of the duality: 1 -> sum t^i (x) t^i.
pub fn duality_unit(prime: u64, s: u32, rel: u32) -> Vec<ScaledPadic> {
    let s = s as usize;
    let mut v = vec![ScaledPadic::zero(prime); s * s];
    for i in 0..s {
        v[i * s + i] = ScaledPadic::from_int(prime, 1, rel);
    }
    v
}

/// E^(d): cyclic block shift composed with F:
/// (v_0,...,v_{d-1}) -> (F v_{d-1}, F v_0, ..., F v_{d-2}).
pub fn cyclic_amplify(m: &FrobeniusMatrix, d: u32) -> Result<FrobeniusMatrix, SemilinearError> {
    assert!(d >= 1);
    let n = m.dim();
    let dd = d as usize;
    let prime = m.prime();
    let mut out = FrobeniusMatrix::zero(prime, n * dd);
    for block in 0..dd {
        let src = (block + dd - 1) % dd;
        for i in 0..n {
            for j in 0..n {
                out.set(block * n + i, src * n + j, m.get(i, j));
            }
        }
    }
    Ok(out)
}

/// Slope multiset as a map for comparisons independent of merge structure.
pub fn slope_map(sm: &SlopeMultiset) -> BTreeMap<Rat, usize> {
    let mut m = BTreeMap::new();
    for &(s, mult) in &sm.slopes {
        *m.entry(s).or_insert(0) += mult;
    }
    m
}
