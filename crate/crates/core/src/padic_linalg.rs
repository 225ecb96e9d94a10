//! Exact linear algebra over the integers and over Z/p^N.
//!
//! Everything here is dense and exact: integer matrices carry
//! arbitrary-precision entries, residue matrices carry canonical
//! representatives in `[0, p^N)`. No floating point anywhere.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A prime-power modulus p^N, with N >= 1 and p^N < 2^63 so that
/// products of two residues fit in a u128.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Modulus {
    pub p: u64,
    pub exponent: u32,
    pub value: u128,
}

impl Modulus {
    pub fn new(p: u64, exponent: u32) -> Result<Modulus> {
        if exponent == 0 {
            return Err(Error::Precondition("modulus exponent must be >= 1".into()));
        }
        let mut value: u128 = 1;
        for _ in 0..exponent {
            value = value
                .checked_mul(p as u128)
                .filter(|v| *v < (1u128 << 63))
                .ok_or(Error::PrecisionOverflow)?;
        }
        Ok(Modulus { p, exponent, value })
    }

    /// Largest exponent usable for this prime under the 2^63 bound.
    pub fn max_exponent(p: u64) -> u32 {
        let mut value: u128 = 1;
        let mut e = 0;
        while let Some(v) = value.checked_mul(p as u128).filter(|v| *v < (1u128 << 63)) {
            value = v;
            e += 1;
        }
        e
    }

    pub fn pow_p(&self, e: u32) -> u128 {
        (self.p as u128).pow(e)
    }

    pub fn reduce_u128(&self, x: u128) -> u128 {
        x % self.value
    }

    pub fn reduce_bigint(&self, x: &BigInt) -> u128 {
        let m = BigInt::from(self.value);
        let mut r = x % &m;
        if r.is_negative() {
            r += &m;
        }
        let (_, digits) = r.to_u64_digits();
        match digits.len() {
            0 => 0,
            1 => digits[0] as u128,
            2 => (digits[0] as u128) | ((digits[1] as u128) << 64),
            _ => unreachable!("residue exceeds modulus"),
        }
    }

    pub fn add(&self, a: u128, b: u128) -> u128 {
        (a + b) % self.value
    }

    pub fn sub(&self, a: u128, b: u128) -> u128 {
        (a + self.value - b % self.value) % self.value
    }

    pub fn mul(&self, a: u128, b: u128) -> u128 {
        (a * b) % self.value
    }

    pub fn neg(&self, a: u128) -> u128 {
        (self.value - a % self.value) % self.value
    }

    /// p-adic valuation of a residue, capped at the exponent N (a zero
    /// residue reports N, meaning "indistinguishable from zero").
    pub fn valuation(&self, x: u128) -> u32 {
        if x == 0 {
            return self.exponent;
        }
        let mut v = 0;
        let mut y = x;
        while y % self.p as u128 == 0 {
            y /= self.p as u128;
            v += 1;
        }
        v.min(self.exponent)
    }

    /// Inverse of a unit residue. Errors on non-units.
    pub fn inv(&self, x: u128) -> Result<u128> {
        if self.valuation(x) != 0 {
            return Err(Error::Precondition(format!(
                "{x} is not a unit mod {}^{}",
                self.p, self.exponent
            )));
        }
        // extended Euclid on i128; all intermediates bounded by the modulus
        let (mut r0, mut r1) = (self.value as i128, x as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        let m = self.value as i128;
        Ok(((t0 % m + m) % m) as u128)
    }
}

/// Dense matrix with exact integer entries, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zero(rows: usize, cols: usize) -> IntegerMatrix {
        IntegerMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> BigInt>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        IntegerMatrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> IntegerMatrix {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                BigInt::one()
            } else {
                BigInt::zero()
            }
        })
    }

    pub fn at(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> IntegerMatrix {
        Self::from_fn(self.cols, self.rows, |r, c| self.at(c, r).clone())
    }

    pub fn reduce(&self, modulus: Modulus) -> ResidueMatrix {
        ResidueMatrix::from_fn(modulus, self.rows, self.cols, |r, c| {
            modulus.reduce_bigint(self.at(r, c))
        })
    }
}

/// Rank over the rationals by fraction-free (Bareiss) elimination.
pub fn rank_exact(a: &IntegerMatrix) -> usize {
    let mut m = a.clone();
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut col = 0;
    while rank < m.rows && col < m.cols {
        let pivot_row = (rank..m.rows).find(|&r| !m.at(r, col).is_zero());
        let Some(pr) = pivot_row else {
            col += 1;
            continue;
        };
        if pr != rank {
            for c in 0..m.cols {
                let x = m.at(rank, c).clone();
                let y = m.at(pr, c).clone();
                m.set(rank, c, y);
                m.set(pr, c, x);
            }
        }
        let pivot = m.at(rank, col).clone();
        for r in rank + 1..m.rows {
            let lead = m.at(r, col).clone();
            for c in col..m.cols {
                let v = (m.at(r, c) * &pivot - m.at(rank, c) * &lead) / &prev;
                m.set(r, c, v);
            }
        }
        prev = pivot;
        rank += 1;
        col += 1;
    }
    rank
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn det_exact(a: &IntegerMatrix) -> BigInt {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.clone();
    let mut prev = BigInt::one();
    let mut sign = BigInt::one();
    for k in 0..n - 1 {
        if m.at(k, k).is_zero() {
            let Some(pr) = (k + 1..n).find(|&r| !m.at(r, k).is_zero()) else {
                return BigInt::zero();
            };
            for c in 0..n {
                let x = m.at(k, c).clone();
                let y = m.at(pr, c).clone();
                m.set(k, c, y);
                m.set(pr, c, x);
            }
            sign = -sign;
        }
        let pivot = m.at(k, k).clone();
        for r in k + 1..n {
            let lead = m.at(r, k).clone();
            for c in k..n {
                let v = (m.at(r, c) * &pivot - m.at(k, c) * &lead) / &prev;
                m.set(r, c, v);
            }
        }
        prev = pivot;
    }
    sign * m.at(n - 1, n - 1)
}

/// Dense matrix of residues mod p^N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueMatrix {
    pub modulus: Modulus,
    pub rows: usize,
    pub cols: usize,
    data: Vec<u128>,
}

impl ResidueMatrix {
    pub fn zero(modulus: Modulus, rows: usize, cols: usize) -> ResidueMatrix {
        ResidueMatrix {
            modulus,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> u128>(
        modulus: Modulus,
        rows: usize,
        cols: usize,
        mut f: F,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c) % modulus.value);
            }
        }
        ResidueMatrix {
            modulus,
            rows,
            cols,
            data,
        }
    }

    pub fn identity(modulus: Modulus, n: usize) -> ResidueMatrix {
        Self::from_fn(modulus, n, n, |r, c| u128::from(r == c))
    }

    pub fn at(&self, r: usize, c: usize) -> u128 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u128) {
        self.data[r * self.cols + c] = v % self.modulus.value;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &ResidueMatrix) -> ResidueMatrix {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.modulus, other.modulus);
        let m = self.modulus;
        let mut out = ResidueMatrix::zero(m, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let v = m.add(out.at(r, c), m.mul(a, other.at(k, c)));
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u128]) -> Vec<u128> {
        assert_eq!(self.cols, v.len());
        let m = self.modulus;
        (0..self.rows)
            .map(|r| {
                let mut acc = 0u128;
                for c in 0..self.cols {
                    acc = m.add(acc, m.mul(self.at(r, c), v[c] % m.value));
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> ResidueMatrix {
        Self::from_fn(self.modulus, self.cols, self.rows, |r, c| self.at(c, r))
    }

    /// Reinterpret the entries under a smaller modulus of the same prime.
    pub fn reduce_to(&self, modulus: Modulus) -> ResidueMatrix {
        assert_eq!(self.modulus.p, modulus.p);
        assert!(modulus.exponent <= self.modulus.exponent);
        ResidueMatrix::from_fn(modulus, self.rows, self.cols, |r, c| {
            modulus.reduce_u128(self.at(r, c))
        })
    }

    /// Inverse over the local ring Z/p^N. A matrix is invertible iff its
    /// reduction mod p is, so unit pivots always exist for invertible input.
    pub fn inverse(&self) -> Result<ResidueMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let m = self.modulus;
        let mut a = self.clone();
        let mut inv = ResidueMatrix::identity(m, n);
        for k in 0..n {
            let pivot_row = (k..n).find(|&r| m.valuation(a.at(r, k)) == 0);
            let Some(pr) = pivot_row else {
                return Err(Error::Precondition("matrix not invertible mod p^N".into()));
            };
            if pr != k {
                for c in 0..n {
                    let (x, y) = (a.at(k, c), a.at(pr, c));
                    a.set(k, c, y);
                    a.set(pr, c, x);
                    let (x, y) = (inv.at(k, c), inv.at(pr, c));
                    inv.set(k, c, y);
                    inv.set(pr, c, x);
                }
            }
            let scale = m.inv(a.at(k, k))?;
            for c in 0..n {
                a.set(k, c, m.mul(a.at(k, c), scale));
                inv.set(k, c, m.mul(inv.at(k, c), scale));
            }
            for r in 0..n {
                if r == k {
                    continue;
                }
                let f = a.at(r, k);
                if f == 0 {
                    continue;
                }
                for c in 0..n {
                    let v = m.sub(a.at(r, c), m.mul(f, a.at(k, c)));
                    a.set(r, c, v);
                    let v = m.sub(inv.at(r, c), m.mul(f, inv.at(k, c)));
                    inv.set(r, c, v);
                }
            }
        }
        Ok(inv)
    }
}

/// Smith normal form over Z/p^N: `left * A * right` is diagonal with
/// ascending p-power exponents. An exponent equal to N means "zero at this
/// precision" and sets the `saturated` flag.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub exponents: Vec<u32>,
    pub left: ResidueMatrix,
    pub right: ResidueMatrix,
    pub saturated: bool,
}

/// Pivot rule: minimal p-valuation, ties broken by smallest (row, col).
pub fn snf_mod_prime_power(a: &ResidueMatrix) -> SmithForm {
    let m = a.modulus;
    let n_exp = m.exponent;
    let mut w = a.clone();
    let mut left = ResidueMatrix::identity(m, a.rows);
    let mut right = ResidueMatrix::identity(m, a.cols);
    let k_max = a.rows.min(a.cols);
    let mut exponents = Vec::with_capacity(k_max);

    for k in 0..k_max {
        // locate the minimal-valuation pivot in the trailing submatrix
        let mut best: Option<(u32, usize, usize)> = None;
        for r in k..a.rows {
            for c in k..a.cols {
                let v = m.valuation(w.at(r, c));
                if best.map_or(true, |(bv, _, _)| v < bv) {
                    best = Some((v, r, c));
                }
            }
        }
        let (val, pr, pc) = best.unwrap();
        if val == n_exp {
            // submatrix is zero at this precision
            for _ in k..k_max {
                exponents.push(n_exp);
            }
            break;
        }
        if pr != k {
            swap_rows(&mut w, k, pr);
            swap_rows(&mut left, k, pr);
        }
        if pc != k {
            swap_cols(&mut w, k, pc);
            swap_cols(&mut right, k, pc);
        }
        // normalize the pivot to exactly p^val
        let p_val = m.pow_p(val);
        let unit = w.at(k, k) / p_val;
        let scale = m.inv(unit).expect("unit part of pivot is a unit");
        for c in 0..w.cols {
            w.set(k, c, m.mul(w.at(k, c), scale));
        }
        for c in 0..left.cols {
            left.set(k, c, m.mul(left.at(k, c), scale));
        }
        // clear the pivot column, then the pivot row
        for r in k + 1..w.rows {
            let x = w.at(r, k);
            if x == 0 {
                continue;
            }
            let f = x / p_val; // exact: valuation >= val
            for c in 0..w.cols {
                let v = m.sub(w.at(r, c), m.mul(f, w.at(k, c)));
                w.set(r, c, v);
            }
            for c in 0..left.cols {
                let v = m.sub(left.at(r, c), m.mul(f, left.at(k, c)));
                left.set(r, c, v);
            }
        }
        for c in k + 1..w.cols {
            let x = w.at(k, c);
            if x == 0 {
                continue;
            }
            let f = x / p_val;
            for r in 0..w.rows {
                let v = m.sub(w.at(r, c), m.mul(f, w.at(r, k)));
                w.set(r, c, v);
            }
            for r in 0..right.rows {
                let v = m.sub(right.at(r, c), m.mul(f, right.at(r, k)));
                right.set(r, c, v);
            }
        }
        exponents.push(val);
    }
    let saturated = exponents.iter().any(|&e| e == n_exp);
    SmithForm {
        exponents,
        left,
        right,
        saturated,
    }
}

fn swap_rows(m: &mut ResidueMatrix, a: usize, b: usize) {
    for c in 0..m.cols {
        let (x, y) = (m.at(a, c), m.at(b, c));
        m.set(a, c, y);
        m.set(b, c, x);
    }
}

fn swap_cols(m: &mut ResidueMatrix, a: usize, b: usize) {
    for r in 0..m.rows {
        let (x, y) = (m.at(r, a), m.at(r, b));
        m.set(r, a, y);
        m.set(r, b, x);
    }
}

/// One particular solution of `A x = b` together with generators of the
/// solution kernel, all mod p^N.
#[derive(Clone, Debug)]
pub struct LinearSolution {
    pub particular: Vec<u128>,
    pub kernel: Vec<Vec<u128>>,
}

pub fn solve_linear_mod(a: &ResidueMatrix, b: &[u128]) -> Option<LinearSolution> {
    assert_eq!(a.rows, b.len());
    let m = a.modulus;
    let snf = snf_mod_prime_power(a);
    let c = snf.left.mul_vec(b);
    let k0 = snf.exponents.len();
    let mut y = vec![0u128; a.cols];
    for i in 0..a.rows {
        if i < k0 {
            let e = snf.exponents[i];
            if e == m.exponent {
                if c[i] != 0 {
                    return None;
                }
            } else {
                if m.valuation(c[i]) < e {
                    return None;
                }
                y[i] = c[i] / m.pow_p(e);
            }
        } else if c[i] != 0 {
            return None;
        }
    }
    let mut kernel_y: Vec<Vec<u128>> = Vec::new();
    for (i, &e) in snf.exponents.iter().enumerate() {
        if e > 0 {
            let mut g = vec![0u128; a.cols];
            g[i] = m.pow_p(m.exponent - e.min(m.exponent));
            kernel_y.push(g);
        }
    }
    for j in k0..a.cols {
        let mut g = vec![0u128; a.cols];
        g[j] = 1;
        kernel_y.push(g);
    }
    Some(LinearSolution {
        particular: snf.right.mul_vec(&y),
        kernel: kernel_y.iter().map(|g| snf.right.mul_vec(g)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn res(p: u64, n: u32, entries: &[&[i64]]) -> ResidueMatrix {
        let m = Modulus::new(p, n).unwrap();
        ResidueMatrix::from_fn(m, entries.len(), entries[0].len(), |r, c| {
            m.reduce_bigint(&BigInt::from(entries[r][c]))
        })
    }

    fn int(entries: &[&[i64]]) -> IntegerMatrix {
        IntegerMatrix::from_fn(entries.len(), entries[0].len(), |r, c| {
            BigInt::from(entries[r][c])
        })
    }

    #[test]
    fn snf_already_diagonal() {
        let f = snf_mod_prime_power(&res(2, 4, &[&[1, 0], &[0, 4]]));
        assert_eq!(f.exponents, vec![0, 2]);
        assert!(!f.saturated);
    }

    #[test]
    fn snf_rank_one_mod_8() {
        let f = snf_mod_prime_power(&res(2, 3, &[&[2, 2], &[2, 2]]));
        assert_eq!(f.exponents, vec![1, 3]);
        assert!(f.saturated);
    }

    #[test]
    fn snf_zero_entry_mod_9() {
        let f = snf_mod_prime_power(&res(3, 2, &[&[0]]));
        assert_eq!(f.exponents, vec![2]);
        assert!(f.saturated);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_exact(&IntegerMatrix::identity(5)), 5);
        assert_eq!(rank_exact(&IntegerMatrix::zero(3, 4)), 0);
        assert_eq!(rank_exact(&int(&[&[2, 4], &[1, 2]])), 1);
    }

    #[test]
    fn det_examples() {
        assert_eq!(det_exact(&IntegerMatrix::identity(4)), BigInt::one());
        assert_eq!(det_exact(&int(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
        assert_eq!(det_exact(&int(&[&[2, 4], &[1, 2]])), BigInt::zero());
        // 3x3 with known determinant 1*(5*9-6*8) - 2*(4*9-6*7) + 3*(4*8-5*7) = 0
        assert_eq!(
            det_exact(&int(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]])),
            BigInt::zero()
        );
        assert_eq!(
            det_exact(&int(&[&[2, 0, 1], &[1, 3, 0], &[0, 1, 4]])),
            BigInt::from(2 * 12 + 1)
        );
    }

    #[test]
    fn solve_examples() {
        let a = res(2, 2, &[&[2]]);
        let s = solve_linear_mod(&a, &[2]).unwrap();
        assert_eq!(s.particular, vec![1]);
        assert_eq!(s.kernel, vec![vec![2]]);
        assert!(solve_linear_mod(&a, &[1]).is_none());

        let id = res(3, 3, &[&[1, 0], &[0, 1]]);
        let s = solve_linear_mod(&id, &[5, 7]).unwrap();
        assert_eq!(s.particular, vec![5, 7]);
        assert!(s.kernel.is_empty());
    }

    #[test]
    fn solve_matches_brute_force_small() {
        // exhaustive comparison for moduli <= 27 and <= 3 unknowns
        let cases: Vec<(u64, u32, Vec<Vec<i64>>, Vec<i64>)> = vec![
            (3, 3, vec![vec![3, 6], vec![9, 3]], vec![6, 12]),
            (2, 3, vec![vec![2, 4, 6], vec![4, 0, 2]], vec![6, 4]),
            (5, 2, vec![vec![5, 10], vec![15, 5]], vec![5, 10]),
            (3, 3, vec![vec![2, 1], vec![1, 2]], vec![1, 1]),
        ];
        for (p, n, rows, b) in cases {
            let m = Modulus::new(p, n).unwrap();
            let a = ResidueMatrix::from_fn(m, rows.len(), rows[0].len(), |r, c| {
                m.reduce_bigint(&BigInt::from(rows[r][c]))
            });
            let bv: Vec<u128> = b.iter().map(|&x| m.reduce_bigint(&BigInt::from(x))).collect();
            // brute force the full solution set
            let mut expected = std::collections::BTreeSet::new();
            let total = (m.value as usize).pow(a.cols as u32);
            for mut idx in 0..total {
                let mut x = vec![0u128; a.cols];
                for xi in x.iter_mut() {
                    *xi = (idx % m.value as usize) as u128;
                    idx /= m.value as usize;
                }
                if a.mul_vec(&x) == bv {
                    expected.insert(x);
                }
            }
            match solve_linear_mod(&a, &bv) {
                None => assert!(expected.is_empty()),
                Some(sol) => {
                    // span the reported solutions and compare as sets
                    let mut got = std::collections::BTreeSet::new();
                    let kdims: Vec<usize> = sol
                        .kernel
                        .iter()
                        .map(|_| m.value as usize)
                        .collect();
                    let combos: usize = kdims.iter().product::<usize>().max(1);
                    for mut idx in 0..combos {
                        let mut x = sol.particular.clone();
                        for g in &sol.kernel {
                            let coeff = (idx % m.value as usize) as u128;
                            idx /= m.value as usize;
                            for (xi, gi) in x.iter_mut().zip(g) {
                                *xi = m.add(*xi, m.mul(coeff, *gi));
                            }
                        }
                        got.insert(x);
                    }
                    assert_eq!(got, expected);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn snf_transforms_diagonalize(
            p in prop::sample::select(vec![2u64, 3, 5]),
            n in 1u32..=6,
            rows in 1usize..=6,
            cols in 1usize..=6,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let m = Modulus::new(p, n).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = ResidueMatrix::from_fn(m, rows, cols, |_, _| rng.gen_range(0..m.value));
            let f = snf_mod_prime_power(&a);
            let d = f.left.mul(&a).mul(&f.right);
            for r in 0..rows {
                for c in 0..cols {
                    if r == c {
                        let e = f.exponents[r];
                        let expect = if e == n { 0 } else { m.pow_p(e) };
                        prop_assert_eq!(d.at(r, c), expect);
                    } else {
                        prop_assert_eq!(d.at(r, c), 0);
                    }
                }
            }
            let mut sorted = f.exponents.clone();
            sorted.sort_unstable();
            prop_assert_eq!(&sorted, &f.exponents);
            prop_assert!(f.left.inverse().is_ok());
            prop_assert!(f.right.inverse().is_ok());
        }

        #[test]
        fn rank_transpose_invariant(
            rows in 1usize..=5,
            cols in 1usize..=5,
            vals in prop::collection::vec(-20i64..=20, 25),
        ) {
            let a = IntegerMatrix::from_fn(rows, cols, |r, c| BigInt::from(vals[r * 5 + c]));
            prop_assert_eq!(rank_exact(&a), rank_exact(&a.transpose()));
        }
    }
}
