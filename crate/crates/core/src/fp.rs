//! Dense polynomials over F_p and small F_p linear algebra.

use std::fmt;

/// Polynomial over F_p, dense coefficient vector, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpPoly {
    pub p: u64,
    coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn zero(p: u64) -> Self {
        FpPoly { p, coeffs: vec![] }
    }

    pub fn from_coeffs(p: u64, coeffs: &[i64]) -> Self {
        let mut c: Vec<u64> = coeffs
            .iter()
            .map(|&x| x.rem_euclid(p as i64) as u64)
            .collect();
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { p, coeffs: c }
    }

    pub fn monomial(p: u64, deg: usize, c: u64) -> Self {
        let c = c % p;
        if c == 0 {
            return Self::zero(p);
        }
        let mut coeffs = vec![0; deg + 1];
        coeffs[deg] = c;
        FpPoly { p, coeffs }
    }

    pub fn one(p: u64) -> Self {
        Self::monomial(p, 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    fn normalize(mut self) -> Self {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut c = vec![0u64; n];
        for i in 0..n {
            c[i] = (self.coeff(i) + other.coeff(i)) % self.p;
        }
        FpPoly { p: self.p, coeffs: c }.normalize()
    }

    pub fn neg(&self) -> Self {
        let c = self
            .coeffs
            .iter()
            .map(|&x| if x == 0 { 0 } else { self.p - x })
            .collect();
        FpPoly { p: self.p, coeffs: c }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.p);
        }
        let mut c = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] = ((c[i + j] as u128 + a as u128 * b as u128) % self.p as u128) as u64;
            }
        }
        FpPoly { p: self.p, coeffs: c }.normalize()
    }

    pub fn scale(&self, k: u64) -> Self {
        let k = k % self.p;
        let c = self
            .coeffs
            .iter()
            .map(|&x| x * k % self.p)
            .collect();
        FpPoly { p: self.p, coeffs: c }.normalize()
    }

    /// Frobenius: x -> x^p applied to the variable, i.e. f(t) -> f(t)^p = f(t^p).
    pub fn frobenius(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![0u64; (self.coeffs.len() - 1) * self.p as usize + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            c[i * self.p as usize] = a;
        }
        FpPoly { p: self.p, coeffs: c }
    }

    /// Drop monomials of degree > cap.
    pub fn truncate_degree(&self, cap: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.truncate(cap + 1);
        FpPoly { p: self.p, coeffs: c }.normalize()
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero(self.p);
        }
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &a)| a * (i as u64 % self.p) % self.p)
            .collect();
        FpPoly { p: self.p, coeffs: c }.normalize()
    }

    /// Euclidean division: (quotient, remainder) by a nonzero divisor.
    pub fn divrem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero());
        let p = self.p;
        let dd = divisor.degree().unwrap();
        let lead_inv = inv_mod_p(divisor.coeff(dd), p);
        let mut rem = self.coeffs.clone();
        let mut quo = vec![0u64; self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd {
            let k = rem.len() - 1 - dd;
            let c = *rem.last().unwrap() % p;
            if c != 0 {
                let q = c * lead_inv % p;
                quo[k] = q;
                for i in 0..=dd {
                    let sub = q * divisor.coeff(i) % p;
                    rem[k + i] = (rem[k + i] + p - sub) % p;
                }
            }
            rem.pop();
        }
        (
            FpPoly { p, coeffs: quo }.normalize(),
            FpPoly { p, coeffs: rem }.normalize(),
        )
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        if let Some(d) = a.degree() {
            let inv = inv_mod_p(a.coeff(d), a.p);
            a = a.scale(inv);
        }
        a
    }

    /// Extended gcd: (g, u, v) with u*self + v*other = g.
    pub fn xgcd(&self, other: &Self) -> (Self, Self, Self) {
        let p = self.p;
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (FpPoly::one(p), FpPoly::zero(p));
        let (mut t0, mut t1) = (FpPoly::zero(p), FpPoly::one(p));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let ns = s0.sub(&q.mul(&s1));
            let nt = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = ns;
            t0 = t1;
            t1 = nt;
        }
        if let Some(d) = r0.degree() {
            let inv = inv_mod_p(r0.coeff(d), p);
            r0 = r0.scale(inv);
            s0 = s0.scale(inv);
            t0 = t0.scale(inv);
        }
        (r0, s0, t0)
    }

    pub fn is_squarefree(&self) -> bool {
        if self.is_zero() {
            return false;
        }
        let g = self.gcd(&self.derivative());
        g.degree() == Some(0)
    }
}

impl fmt::Display for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 if c == 1 => write!(f, "t")?,
                1 => write!(f, "{c}t")?,
                _ if c == 1 => write!(f, "t^{i}")?,
                _ => write!(f, "{c}t^{i}")?,
            }
        }
        Ok(())
    }
}

pub fn inv_mod_p(a: u64, p: u64) -> u64 {
    // Fermat inverse; p prime, a nonzero mod p.
    let mut acc: u128 = 1;
    let mut b = (a % p) as u128;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p as u128;
        }
        b = b * b % p as u128;
        e >>= 1;
    }
    acc as u64
}

/// Dense matrix over F_p in row-major order.
#[derive(Debug, Clone)]
pub struct FpMatrix {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl FpMatrix {
    pub fn zero(p: u64, rows: usize, cols: usize) -> Self {
        FpMatrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.p;
    }

    /// Row-echelon reduction; returns the rank.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.echelonize().len()
    }

    /// In-place echelonization; returns pivot column indices.
    pub fn echelonize(&mut self) -> Vec<usize> {
        let p = self.p;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row >= self.rows {
                break;
            }
            let Some(pr) = (row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            self.swap_rows(row, pr);
            let inv = inv_mod_p(self.get(row, col), p);
            for j in col..self.cols {
                let v = self.get(row, j) * inv % p;
                self.set(row, j, v);
            }
            for r in 0..self.rows {
                if r != row && self.get(r, col) != 0 {
                    let f = self.get(r, col);
                    for j in col..self.cols {
                        let v = (self.get(r, j) + (p - f) * self.get(row, j)) % p;
                        self.set(r, j, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Basis of the right kernel.
    pub fn kernel_basis(&self) -> Vec<Vec<u64>> {
        let mut m = self.clone();
        let pivots = m.echelonize();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = Vec::new();
        for &fc in &free {
            let mut v = vec![0u64; self.cols];
            v[fc] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                // pivot row r: x_pc = -sum over free columns
                let coeff = m.get(r, fc);
                if coeff != 0 {
                    v[pc] = self.p - coeff;
                }
            }
            basis.push(v);
        }
        basis
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_divrem_and_gcd() {
        let p = 5;
        let f = FpPoly::from_coeffs(p, &[1, 1, 0, 1]); // x^3 + x + 1
        let fd = f.derivative(); // 3x^2 + 1
        assert_eq!(fd, FpPoly::from_coeffs(p, &[1, 0, 3]));
        let (g, u, v) = f.xgcd(&fd);
        assert_eq!(g.degree(), Some(0));
        let lhs = u.mul(&f).add(&v.mul(&fd));
        assert_eq!(lhs, g);
        assert!(f.is_squarefree());
        let sq = f.mul(&f);
        assert!(!sq.is_squarefree());
    }

    #[test]
    fn matrix_rank_and_kernel() {
        let mut m = FpMatrix::zero(5, 2, 3);
        m.set(0, 0, 1);
        m.set(0, 1, 2);
        m.set(0, 2, 3);
        m.set(1, 0, 2);
        m.set(1, 1, 4);
        m.set(1, 2, 2);
        assert_eq!(m.rank(), 2);
        let ker = m.kernel_basis();
        assert_eq!(ker.len(), 1);
        // verify m * k = 0
        let k = &ker[0];
        for i in 0..2 {
            let s: u64 = (0..3).map(|j| m.get(i, j) * k[j] % 5).sum::<u64>() % 5;
            assert_eq!(s, 0);
        }
    }
}
