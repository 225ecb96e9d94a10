//! Exact multivariate polynomial arithmetic over the integers in the
//! variables T_1..T_d, together with the cyclotomic-type polynomials
//! w_n(T) = (1+T)^{p^n} - 1, norm-element polynomials, reduction modulo
//! level ideals, and the iota reversal of univariate generators.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A level vector n = (n_1, ..., n_d) indexing the open subgroup
/// U_n = (p^{n_1} Z_p) x ... x (p^{n_d} Z_p).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LevelVector(pub Vec<u32>);

impl LevelVector {
    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn le(&self, other: &LevelVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// |G/U_n| = p^{n_1 + ... + n_d}.
    pub fn group_order(&self, p: u64) -> u128 {
        self.0
            .iter()
            .map(|&n| (p as u128).pow(n))
            .product()
    }

    pub fn sum(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl fmt::Display for LevelVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// Polynomial element of the Iwasawa algebra Z_p[[T_1..T_d]], stored with
/// exact integer coefficients keyed by exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaPolynomial {
    pub p: u64,
    pub vars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl LambdaPolynomial {
    pub fn zero(p: u64, vars: usize) -> Self {
        LambdaPolynomial {
            p,
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(p: u64, vars: usize, c: BigInt) -> Self {
        let mut poly = Self::zero(p, vars);
        poly.add_term(vec![0; vars], c);
        poly
    }

    pub fn monomial(p: u64, vars: usize, exps: Vec<u32>, c: BigInt) -> Self {
        assert_eq!(exps.len(), vars);
        let mut poly = Self::zero(p, vars);
        poly.add_term(exps, c);
        poly
    }

    /// Variable T_i.
    pub fn variable(p: u64, vars: usize, i: usize) -> Self {
        let mut exps = vec![0; vars];
        exps[i] = 1;
        Self::monomial(p, vars, exps, BigInt::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &[u32]) -> BigInt {
        self.terms.get(exps).cloned().unwrap_or_else(BigInt::zero)
    }

    fn add_term(&mut self, exps: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            // re-fetch key ownership via retain to drop the zero
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.p, self.vars), (other.p, other.vars));
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.p, self.vars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), -c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!((self.p, self.vars), (other.p, other.vars));
        let mut out = Self::zero(self.p, self.vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let exps: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(exps, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        let mut out = Self::zero(self.p, self.vars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[var]).max()
    }

    /// Total evaluation at integer points (test support).
    pub fn evaluate(&self, point: &[BigInt]) -> BigInt {
        assert_eq!(point.len(), self.vars);
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in point.iter().zip(e) {
                term *= x.pow(k);
            }
            acc += term;
        }
        acc
    }

    /// Univariate coefficient vector (lowest degree first). Requires d = 1.
    pub fn univariate_coeffs(&self) -> Result<Vec<BigInt>> {
        if self.vars != 1 {
            return Err(Error::Precondition("polynomial is not univariate".into()));
        }
        let deg = self.degree_in(0).unwrap_or(0) as usize;
        let mut coeffs = vec![BigInt::zero(); deg + 1];
        for (e, c) in &self.terms {
            coeffs[e[0] as usize] = c.clone();
        }
        Ok(coeffs)
    }

    pub fn from_univariate_coeffs(p: u64, coeffs: &[BigInt]) -> Self {
        let mut out = Self::zero(p, 1);
        for (k, c) in coeffs.iter().enumerate() {
            out.add_term(vec![k as u32], c.clone());
        }
        out
    }

    /// Minimal p-valuation over all coefficients (mu) and the lowest degree
    /// carrying a unit coefficient after removing p^mu (lambda). Requires a
    /// nonzero univariate polynomial.
    pub fn mu_lambda(&self) -> Result<(u32, u32)> {
        let coeffs = self.univariate_coeffs()?;
        if self.is_zero() {
            return Err(Error::Precondition("mu/lambda of the zero polynomial".into()));
        }
        let p = BigInt::from(self.p);
        let val = |c: &BigInt| -> u32 {
            let mut v = 0;
            let mut x = c.clone();
            while !x.is_zero() && (&x % &p).is_zero() {
                x /= &p;
                v += 1;
            }
            v
        };
        let mu = self
            .terms
            .values()
            .map(val)
            .min()
            .unwrap();
        let lambda = coeffs
            .iter()
            .position(|c| !c.is_zero() && val(c) == mu)
            .unwrap() as u32;
        Ok((mu, lambda))
    }
}

impl fmt::Display for LambdaPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    write!(f, "*T{}^{}", i + 1, k)?;
                }
            }
        }
        Ok(())
    }
}

/// w_n(T_i) = (1+T_i)^{p^n} - 1, expanded with exact binomial coefficients.
pub fn w_poly(p: u64, n: u32, var: usize, vars: usize) -> LambdaPolynomial {
    let e = (p as u64).pow(n);
    let mut out = LambdaPolynomial::zero(p, vars);
    // (1+T)^e = sum_k C(e,k) T^k; skip k = 0 to subtract the 1
    let mut binom = BigInt::from(e);
    for k in 1..=e {
        let mut exps = vec![0; vars];
        exps[var] = k as u32;
        out.add_term(exps, binom.clone());
        binom = binom * BigInt::from(e - k) / BigInt::from(k + 1);
    }
    out
}

/// The exact quotient w_{n'} / w_n in the variable T_i, i.e. the norm
/// element of the subquotient: sum_{j < p^{n'-n}} (1+T)^{j p^n}.
pub fn norm_poly(p: u64, n: u32, n_to: u32, var: usize, vars: usize) -> Result<LambdaPolynomial> {
    if n > n_to {
        return Err(Error::Precondition(format!(
            "norm_poly requires n <= n', got {n} > {n_to}"
        )));
    }
    let step = (p as u64).pow(n);
    let count = (p as u64).pow(n_to - n);
    let mut out = LambdaPolynomial::zero(p, vars);
    let one = {
        let mut t = LambdaPolynomial::constant(p, vars, BigInt::one());
        let mut exps = vec![0; vars];
        exps[var] = 1;
        t.add_term(exps, BigInt::one());
        t // 1 + T_var
    };
    // (1+T)^{j p^n} computed incrementally
    let mut base = LambdaPolynomial::constant(p, vars, BigInt::one());
    let mut step_pow = LambdaPolynomial::constant(p, vars, BigInt::one());
    for _ in 0..step {
        step_pow = step_pow.mul(&one);
    }
    for _ in 0..count {
        out = out.add(&base);
        base = base.mul(&step_pow);
    }
    Ok(out)
}

/// Product over coordinates of the univariate norm polynomials; the
/// transition element for U_{n'} <= U_n. Equals 1 when n = n'.
pub fn multi_norm(p: u64, from: &LevelVector, to: &LevelVector) -> Result<LambdaPolynomial> {
    if !from.le(to) {
        return Err(Error::Precondition(format!(
            "multi_norm requires componentwise {from} <= {to}"
        )));
    }
    let d = from.d();
    let mut out = LambdaPolynomial::constant(p, d, BigInt::one());
    for i in 0..d {
        if from.0[i] != to.0[i] {
            out = out.mul(&norm_poly(p, from.0[i], to.0[i], i, d)?);
        }
    }
    Ok(out)
}

/// The polynomial realization of the iota twist on a univariate generator:
/// f^iota(T) = (1+T)^{deg f} * f((1+T)^{-1} - 1), unit-normalized by
/// stripping (1+T) factors and fixing the sign of the leading coefficient.
pub fn iota_reversal(f: &LambdaPolynomial) -> Result<LambdaPolynomial> {
    if f.is_zero() {
        return Err(Error::Precondition("iota_reversal of the zero polynomial".into()));
    }
    let coeffs = f.univariate_coeffs()?;
    let p = f.p;
    let deg = coeffs.len() - 1;
    let one_plus_t = LambdaPolynomial::from_univariate_coeffs(p, &[BigInt::one(), BigInt::one()]);
    let minus_t = LambdaPolynomial::from_univariate_coeffs(p, &[BigInt::zero(), BigInt::from(-1)]);
    // sum_k c_k (-T)^k (1+T)^{deg-k}
    let mut out = LambdaPolynomial::zero(p, 1);
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut term = LambdaPolynomial::constant(p, 1, c.clone());
        for _ in 0..k {
            term = term.mul(&minus_t);
        }
        for _ in 0..(deg - k) {
            term = term.mul(&one_plus_t);
        }
        out = out.add(&term);
    }
    // strip (1+T)-unit factors
    loop {
        match divide_univariate_monic(&out, &one_plus_t) {
            Some((q, r)) if r.is_zero() && !q.is_zero() => out = q,
            _ => break,
        }
    }
    // sign normalization: positive leading coefficient
    let lead = out.univariate_coeffs()?.last().cloned().unwrap();
    if lead.is_negative() {
        out = out.neg();
    }
    Ok(out)
}

/// Division with remainder by a monic univariate polynomial (exact integer
/// arithmetic). Returns None if the divisor is not monic univariate.
pub fn divide_univariate_monic(
    f: &LambdaPolynomial,
    g: &LambdaPolynomial,
) -> Option<(LambdaPolynomial, LambdaPolynomial)> {
    let gc = g.univariate_coeffs().ok()?;
    if gc.last()? != &BigInt::one() {
        return None;
    }
    let mut rc = f.univariate_coeffs().ok()?;
    let gdeg = gc.len() - 1;
    if rc.len() <= gdeg {
        return Some((LambdaPolynomial::zero(f.p, 1), f.clone()));
    }
    let mut qc = vec![BigInt::zero(); rc.len() - gdeg];
    for k in (gdeg..rc.len()).rev() {
        let c = rc[k].clone();
        if c.is_zero() {
            continue;
        }
        qc[k - gdeg] = c.clone();
        for (j, gj) in gc.iter().enumerate() {
            let idx = k - gdeg + j;
            rc[idx] = &rc[idx] - &c * gj;
        }
    }
    Some((
        LambdaPolynomial::from_univariate_coeffs(f.p, &qc),
        LambdaPolynomial::from_univariate_coeffs(f.p, &rc[..gdeg.max(1)]),
    ))
}

/// Canonical representative of f modulo the level ideal
/// (w_{n_1}(T_1), ..., w_{n_d}(T_d)): every T_i-degree below p^{n_i}.
pub fn reduce_mod_level(f: &LambdaPolynomial, n: &LevelVector) -> LambdaPolynomial {
    assert_eq!(f.vars, n.d());
    let p = f.p;
    let mut out = f.clone();
    for i in 0..f.vars {
        let cap = (p as u64).pow(n.0[i]) as u32;
        let w = w_poly(p, n.0[i], i, f.vars);
        loop {
            // highest T_i-exponent term at or above the cap
            let target = out
                .terms
                .iter()
                .filter(|(e, _)| e[i] >= cap)
                .max_by_key(|(e, _)| e[i])
                .map(|(e, c)| (e.clone(), c.clone()));
            let Some((exps, coeff)) = target else { break };
            // T_i^{e} = T_i^{e-cap} * (T_i^{cap}); substitute T_i^{cap} = w - (w - T_i^{cap})
            let mut rest = exps.clone();
            rest[i] -= cap;
            let cofactor = LambdaPolynomial::monomial(p, f.vars, rest, coeff);
            // subtracting cofactor * w cancels the target term exactly and
            // introduces only lower T_i-degrees (w is monic of degree cap)
            out = out.sub(&cofactor.mul(&w));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn upoly(p: u64, coeffs: &[i64]) -> LambdaPolynomial {
        LambdaPolynomial::from_univariate_coeffs(
            p,
            &coeffs.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>(),
        )
    }

    #[test]
    fn w_poly_examples() {
        assert_eq!(w_poly(2, 0, 0, 1), upoly(2, &[0, 1]));
        assert_eq!(w_poly(2, 1, 0, 1), upoly(2, &[0, 2, 1]));
        assert_eq!(w_poly(3, 1, 0, 1), upoly(3, &[0, 3, 3, 1]));
    }

    #[test]
    fn norm_poly_examples() {
        assert_eq!(norm_poly(2, 0, 1, 0, 1).unwrap(), upoly(2, &[2, 1]));
        assert_eq!(norm_poly(2, 1, 2, 0, 1).unwrap(), upoly(2, &[2, 2, 1]));
        assert_eq!(norm_poly(3, 0, 1, 0, 1).unwrap(), upoly(3, &[3, 3, 1]));
        assert!(norm_poly(2, 2, 1, 0, 1).is_err());
    }

    #[test]
    fn norm_times_w_reproduces_w() {
        for p in [2u64, 3, 5] {
            for n in 0..=3u32 {
                for n_to in n..=3u32 {
                    let lhs = norm_poly(p, n, n_to, 0, 1)
                        .unwrap()
                        .mul(&w_poly(p, n, 0, 1));
                    assert_eq!(lhs, w_poly(p, n_to, 0, 1), "p={p} {n}->{n_to}");
                }
            }
        }
    }

    #[test]
    fn norm_chain_consistency() {
        for p in [2u64, 3] {
            for n in 0..=2u32 {
                for n1 in n..=2u32 {
                    for n2 in n1..=2u32 {
                        let lhs = norm_poly(p, n, n1, 0, 1)
                            .unwrap()
                            .mul(&norm_poly(p, n1, n2, 0, 1).unwrap());
                        assert_eq!(lhs, norm_poly(p, n, n2, 0, 1).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn norm_at_zero_is_index() {
        for p in [2u64, 3, 5] {
            for (n, n_to) in [(0u32, 1u32), (0, 2), (1, 2)] {
                let v = norm_poly(p, n, n_to, 0, 1)
                    .unwrap()
                    .evaluate(&[BigInt::zero()]);
                assert_eq!(v, BigInt::from(p).pow(n_to - n));
            }
        }
    }

    #[test]
    fn multi_norm_examples() {
        let n00 = LevelVector(vec![0, 0]);
        let n10 = LevelVector(vec![1, 0]);
        let n11 = LevelVector(vec![1, 1]);
        assert_eq!(
            multi_norm(2, &n00, &n00).unwrap(),
            LambdaPolynomial::constant(2, 2, BigInt::one())
        );
        let t1_plus_2 = {
            let mut f = LambdaPolynomial::constant(2, 2, BigInt::from(2));
            f = f.add(&LambdaPolynomial::variable(2, 2, 0));
            f
        };
        assert_eq!(multi_norm(2, &n00, &n10).unwrap(), t1_plus_2);
        let t2_plus_2 = {
            let mut f = LambdaPolynomial::constant(2, 2, BigInt::from(2));
            f = f.add(&LambdaPolynomial::variable(2, 2, 1));
            f
        };
        assert_eq!(
            multi_norm(2, &n00, &n11).unwrap(),
            t1_plus_2.mul(&t2_plus_2)
        );
        assert!(multi_norm(2, &n10, &n00).is_err());
    }

    #[test]
    fn iota_examples() {
        assert_eq!(iota_reversal(&upoly(2, &[0, 1])).unwrap(), upoly(2, &[0, 1]));
        assert_eq!(
            iota_reversal(&upoly(3, &[-3, 1])).unwrap(),
            upoly(3, &[3, 4])
        );
        for p in [2u64, 3] {
            for n in 0..=2u32 {
                let w = w_poly(p, n, 0, 1);
                assert_eq!(iota_reversal(&w).unwrap(), w);
            }
        }
        assert!(iota_reversal(&LambdaPolynomial::zero(2, 1)).is_err());
    }

    #[test]
    fn iota_preserves_mu_lambda_and_degree() {
        for f in [
            upoly(3, &[-3, 1]),
            upoly(3, &[9, 0, 3, 1]),
            upoly(2, &[2, 4, 1]),
            upoly(5, &[25, 5, 0, 1]),
        ] {
            let g = iota_reversal(&f).unwrap();
            assert_eq!(f.degree_in(0), g.degree_in(0));
            assert_eq!(f.mu_lambda().unwrap(), g.mu_lambda().unwrap());
        }
    }

    #[test]
    fn reduce_examples() {
        let n1 = LevelVector(vec![1]);
        assert!(reduce_mod_level(&w_poly(2, 1, 0, 1), &n1).is_zero());
        // T^2 = w_1 - 2T so T^2 == -2T mod (T^2 + 2T)
        assert_eq!(
            reduce_mod_level(&upoly(2, &[0, 0, 1]), &n1),
            upoly(2, &[0, -2])
        );
        let c = upoly(3, &[7]);
        assert_eq!(reduce_mod_level(&c, &LevelVector(vec![2])), c);
    }

    #[test]
    fn reduce_idempotent_and_ring_hom() {
        let n = LevelVector(vec![1]);
        let f = upoly(2, &[1, 3, 5, 7, 2]);
        let g = upoly(2, &[-2, 0, 1, 4]);
        let rf = reduce_mod_level(&f, &n);
        let rg = reduce_mod_level(&g, &n);
        assert_eq!(reduce_mod_level(&rf, &n), rf);
        assert_eq!(
            reduce_mod_level(&f.mul(&g), &n),
            reduce_mod_level(&rf.mul(&rg), &n)
        );
        assert_eq!(reduce_mod_level(&f.add(&g), &n), rf.add(&rg));
    }
}
