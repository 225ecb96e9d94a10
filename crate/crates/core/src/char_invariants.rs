//! d = 1 characteristic-ideal data from square presentations: the exact
//! determinant generator, its (mu, lambda) invariants, and the
//! Weierstrass-style distinguished part computed by Hensel lifting of the
//! factorization h = P * E from mod p to mod p^N.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lambda_poly::{iota_reversal, LambdaPolynomial};
use crate::limit_systems::{char_generator, GrowthData};
use crate::module_core::ModulePresentation;
use crate::padic_linalg::Modulus;

/// Internal working precision for distinguished-part coefficients. Fixed
/// (rather than tied to the caller's initial precision) so characteristic
/// data is identical regardless of how the coinvariant pipeline was tuned.
pub const CHAR_PRECISION: u32 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharIdealData {
    pub p: u64,
    /// Exact determinant of the presentation (integer coefficients).
    pub generator: LambdaPolynomial,
    pub mu: u32,
    pub lambda: u32,
    /// Monic of degree lambda, lower coefficients divisible by p, reduced
    /// into [0, p^precision).
    pub distinguished: LambdaPolynomial,
    pub precision: u32,
}

pub fn char_from_square_presentation(m: &ModulePresentation) -> Result<CharIdealData> {
    let generator = char_generator(m)?;
    char_from_generator(m.p, &generator)
}

/// Characteristic data of the principal ideal (g), g a nonzero univariate
/// integer polynomial.
pub fn char_from_generator(p: u64, g: &LambdaPolynomial) -> Result<CharIdealData> {
    if g.is_zero() {
        return Err(Error::ZeroDeterminant);
    }
    let (mu, lambda) = g.mu_lambda()?;
    // h = g / p^mu has some unit coefficient; its first one sits at lambda
    let p_mu = BigInt::from(p).pow(mu);
    let h: Vec<BigInt> = g
        .univariate_coeffs()?
        .iter()
        .map(|c| c / &p_mu)
        .collect();
    let distinguished = distinguished_part(p, &h, lambda)?;
    Ok(CharIdealData {
        p,
        generator: g.clone(),
        mu,
        lambda,
        distinguished,
        precision: CHAR_PRECISION,
    })
}

/// The iota-reversed characteristic data: reverse the generator and
/// re-extract. mu and lambda are preserved.
pub fn char_iota(c: &CharIdealData) -> Result<CharIdealData> {
    let reversed = iota_reversal(&c.generator)?;
    let out = char_from_generator(c.p, &reversed)?;
    if out.mu != c.mu || out.lambda != c.lambda {
        return Err(Error::Precondition(
            "iota reversal changed (mu, lambda); generator arithmetic is broken".into(),
        ));
    }
    Ok(out)
}

/// True iff the independently computed growth exponents match the
/// structural invariants.
pub fn cross_check_growth(c: &CharIdealData, g: &GrowthData) -> bool {
    use num_rational::BigRational;
    g.mu == BigRational::from_integer(BigInt::from(c.mu))
        && g.lambda == BigRational::from_integer(BigInt::from(c.lambda))
}

// --- dense univariate arithmetic mod p^N on u128 coefficient vectors ---

fn trim(v: &mut Vec<u128>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_mul(m: Modulus, a: &[u128], b: &[u128]) -> Vec<u128> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = m.add(out[i + j], m.mul(x, y));
        }
    }
    trim(&mut out);
    out
}

fn poly_sub(m: Modulus, a: &[u128], b: &[u128]) -> Vec<u128> {
    let n = a.len().max(b.len());
    let mut out = vec![0u128; n];
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out[i] = m.sub(x, y);
    }
    trim(&mut out);
    out
}

fn poly_add_scaled(m: Modulus, a: &mut Vec<u128>, b: &[u128], scale: u128) {
    if a.len() < b.len() {
        a.resize(b.len(), 0);
    }
    for (i, &y) in b.iter().enumerate() {
        a[i] = m.add(a[i], m.mul(scale, y));
    }
    trim(a);
}

/// Extended Euclid in F_p[T]: returns (u, v) with u*a + v*b = 1. Requires
/// gcd(a, b) = 1.
fn bezout_mod_p(m: Modulus, a: &[u128], b: &[u128]) -> (Vec<u128>, Vec<u128>) {
    debug_assert_eq!(m.exponent, 1);
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    let (mut u0, mut u1) = (vec![1u128], Vec::new());
    let (mut v0, mut v1) = (Vec::new(), vec![1u128]);
    while !r1.is_empty() {
        // divide r0 by r1 in F_p[T]
        let mut rem = r0.clone();
        let mut q: Vec<u128> = vec![0; rem.len().saturating_sub(r1.len() - 1).max(1)];
        let lead_inv = m.inv(*r1.last().unwrap()).expect("field element");
        while rem.len() >= r1.len() && !rem.is_empty() {
            let shift = rem.len() - r1.len();
            let coef = m.mul(*rem.last().unwrap(), lead_inv);
            if q.len() <= shift {
                q.resize(shift + 1, 0);
            }
            q[shift] = m.add(q[shift], coef);
            for (i, &y) in r1.iter().enumerate() {
                rem[shift + i] = m.sub(rem[shift + i], m.mul(coef, y));
            }
            trim(&mut rem);
        }
        trim(&mut q);
        let next_u = poly_sub(m, &u0, &poly_mul(m, &q, &u1));
        let next_v = poly_sub(m, &v0, &poly_mul(m, &q, &v1));
        (r0, r1) = (r1, rem);
        (u0, u1) = (u1, next_u);
        (v0, v1) = (v1, next_v);
    }
    // r0 is a nonzero constant gcd; normalize to 1
    assert_eq!(r0.len(), 1, "inputs are not coprime mod p");
    let s = m.inv(r0[0]).expect("unit");
    let scale = |v: &[u128]| v.iter().map(|&c| m.mul(s, c)).collect::<Vec<_>>();
    (scale(&u0), scale(&v0))
}

/// Distinguished part of h (integer coefficients, some coefficient a unit,
/// first unit at index lambda): the monic degree-lambda factor P with
/// h = P * E, E a unit power series, computed mod p^CHAR_PRECISION.
fn distinguished_part(p: u64, h: &[BigInt], lambda: u32) -> Result<LambdaPolynomial> {
    let n = CHAR_PRECISION;
    let lam = lambda as usize;
    let m = Modulus::new(p, n)?;
    let mp = Modulus::new(p, 1)?;
    let h_mod: Vec<u128> = h.iter().map(|c| m.reduce_bigint(c)).collect();
    if lam == 0 {
        // unit generator: distinguished part is 1
        return Ok(LambdaPolynomial::from_univariate_coeffs(p, &[BigInt::from(1)]));
    }
    // initial factorization mod p: P0 = T^lambda, E0 = upper part of h
    let mut pp = vec![0u128; lam + 1];
    pp[lam] = 1;
    let mut e: Vec<u128> = h_mod[lam..].to_vec();
    trim(&mut e);
    let e_bar: Vec<u128> = e.iter().map(|&c| mp.reduce_u128(c)).collect();
    let mut t_lam = vec![0u128; lam + 1];
    t_lam[lam] = 1;
    let (u, v) = bezout_mod_p(mp, &t_lam, &e_bar);
    for k in 1..n {
        let pk = m.pow_p(k);
        let defect = poly_sub(m, &h_mod, &poly_mul(m, &pp, &e));
        if defect.is_empty() {
            break;
        }
        // defect = p^k * delta with delta taken mod p
        let delta: Vec<u128> = defect
            .iter()
            .map(|&c| {
                debug_assert_eq!(c % pk, 0, "Hensel defect divisibility");
                mp.reduce_u128(c / pk)
            })
            .collect();
        // split delta = alpha*E + beta*P mod p with deg alpha < lambda:
        // alpha = v*delta mod T^lambda, beta = u*delta + q*E_bar
        let vd = poly_mul(mp, &v, &delta);
        let alpha: Vec<u128> = vd.iter().take(lam).copied().collect();
        let q: Vec<u128> = vd.iter().skip(lam).copied().collect();
        let mut beta = poly_mul(mp, &u, &delta);
        poly_add_scaled(mp, &mut beta, &poly_mul(mp, &q, &e_bar), 1);
        poly_add_scaled(m, &mut pp, &alpha, pk);
        poly_add_scaled(m, &mut e, &beta, pk);
    }
    // final verification at full precision
    let check = poly_sub(m, &h_mod, &poly_mul(m, &pp, &e));
    if !check.is_empty() {
        return Err(Error::Precondition("Hensel lifting failed to converge".into()));
    }
    debug_assert_eq!(pp.len(), lam + 1);
    debug_assert_eq!(*pp.last().unwrap(), 1);
    let coeffs: Vec<BigInt> = pp.iter().map(|&c| BigInt::from(c as i128)).collect();
    // all sub-leading coefficients must be divisible by p
    for c in &coeffs[..lam] {
        if !(c % BigInt::from(p)).is_zero() {
            return Err(Error::Precondition(
                "distinguished part has a unit sub-leading coefficient".into(),
            ));
        }
    }
    Ok(LambdaPolynomial::from_univariate_coeffs(p, &coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit_systems::growth_invariants;
    use crate::module_core::DEFAULT_PRECISION;

    fn upoly(p: u64, coeffs: &[i64]) -> LambdaPolynomial {
        LambdaPolynomial::from_univariate_coeffs(
            p,
            &coeffs.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>(),
        )
    }

    fn cyclic(p: u64, f: LambdaPolynomial) -> ModulePresentation {
        ModulePresentation::new(p, 1, vec![vec![f]]).unwrap()
    }

    #[test]
    fn char_basic_examples() {
        // T - p
        let c = char_from_square_presentation(&cyclic(3, upoly(3, &[-3, 1]))).unwrap();
        assert_eq!((c.mu, c.lambda), (0, 1));
        assert_eq!(c.distinguished, upoly(3, &[6561 - 3, 1]));
        // p^2
        let c = char_from_square_presentation(&cyclic(3, upoly(3, &[9]))).unwrap();
        assert_eq!((c.mu, c.lambda), (2, 0));
        assert_eq!(c.distinguished, upoly(3, &[1]));
        // diag(p, T): det = pT
        let m = ModulePresentation::new(
            3,
            1,
            vec![
                vec![upoly(3, &[3]), upoly(3, &[0])],
                vec![upoly(3, &[0]), upoly(3, &[0, 1])],
            ],
        )
        .unwrap();
        let c = char_from_square_presentation(&m).unwrap();
        assert_eq!((c.mu, c.lambda), (1, 1));
        assert_eq!(c.distinguished, upoly(3, &[0, 1]));
    }

    #[test]
    fn distinguished_part_with_unit_cofactor() {
        // (T - 3)(1 + T): lifting must strip the unit factor
        let c = char_from_generator(3, &upoly(3, &[-3, -2, 1])).unwrap();
        assert_eq!((c.mu, c.lambda), (0, 1));
        assert_eq!(c.distinguished, upoly(3, &[6561 - 3, 1]));
        // an already distinguished cubic is its own distinguished part
        let g = upoly(3, &[9, -3, -3, 1]); // (T-3)(T^2-3)
        let c = char_from_generator(3, &g).unwrap();
        assert_eq!((c.mu, c.lambda), (0, 3));
        let expect = upoly(3, &[9, 6561 - 3, 6561 - 3, 1]);
        assert_eq!(c.distinguished, expect);
    }

    #[test]
    fn char_iota_t_minus_three() {
        // iota(T - 3) = 4T + 3 whose distinguished part is T + 3*4^{-1};
        // 4^{-1} = 4921 mod 3^8, so the sub-leading coefficient is 1641
        let c = char_from_square_presentation(&cyclic(3, upoly(3, &[-3, 1]))).unwrap();
        let ci = char_iota(&c).unwrap();
        assert_eq!((ci.mu, ci.lambda), (0, 1));
        assert_eq!(ci.distinguished, upoly(3, &[1641, 1]));
        assert_eq!(ci.distinguished.coefficient(&[0]) % BigInt::from(9), BigInt::from(3));
        // involution up to normalization
        let cii = char_iota(&ci).unwrap();
        assert_eq!(cii.distinguished, c.distinguished);
        assert_eq!((cii.mu, cii.lambda), (c.mu, c.lambda));
    }

    #[test]
    fn char_iota_w1_fixed() {
        let w1 = crate::lambda_poly::w_poly(2, 1, 0, 1);
        let c = char_from_square_presentation(&cyclic(2, w1.clone())).unwrap();
        assert_eq!((c.mu, c.lambda), (0, 2));
        assert_eq!(c.distinguished, upoly(2, &[0, 2, 1]));
        let ci = char_iota(&c).unwrap();
        assert_eq!(ci.distinguished, c.distinguished);
    }

    #[test]
    fn growth_cross_checks() {
        for (p, f) in [
            (2u64, upoly(2, &[2])),
            (3, upoly(3, &[-3, 1])),
            (3, upoly(3, &[-9, 3])),
            (5, upoly(5, &[-5, 1])),
        ] {
            let m = cyclic(p, f);
            let c = char_from_square_presentation(&m).unwrap();
            let g = growth_invariants(&m, 2, DEFAULT_PRECISION).unwrap();
            assert!(cross_check_growth(&c, &g), "p={p}: char=({},{}) growth=({},{})",
                c.mu, c.lambda, g.mu, g.lambda);
        }
    }

    #[test]
    fn zero_determinant_rejected() {
        assert!(matches!(
            char_from_generator(2, &LambdaPolynomial::zero(2, 1)),
            Err(Error::ZeroDeterminant)
        ));
    }
}
