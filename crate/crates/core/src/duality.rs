//! Equivariant Hom spaces into the dualizing module at finite level.
//!
//! For a finite-level module X = M_{U_n} of exponent p^t, the space
//! Hom_{Z_p[G/U]}(X, (Q_p/Z_p)[G/U]) is computed exactly as the kernel of
//! a linear constraint system mod p^t. Coefficients of (Q_p/Z_p)[G/U] are
//! scaled by p^t, so every hom is an integer matrix of group-ring
//! coefficients. The evaluation-at-identity map eta compares this space
//! with the plain Pontryagin dual of X, and rho is the transition map
//! between levels compatible with the norm maps of coinvariants.

use crate::error::{Error, Result};
use crate::lambda_poly::LevelVector;
use crate::module_core::{FiniteLevelModule, FiniteMorphism};
use crate::padic_linalg::{snf_mod_prime_power, solve_linear_mod, Modulus, ResidueMatrix};

/// The finite group ring coefficient lattice: elements of Z/p^t[G/U_n] in
/// the group basis gamma^a = prod gamma_i^{a_i}, 0 <= a_i < p^{n_i},
/// indexed in mixed radix with the last coordinate fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRing {
    pub p: u64,
    pub level: LevelVector,
    pub torsion: u32,
    pub modulus: Modulus,
    caps: Vec<u64>,
    pub size: usize,
}

impl GroupRing {
    pub fn new(p: u64, level: &LevelVector, torsion: u32) -> Result<GroupRing> {
        let caps: Vec<u64> = level.0.iter().map(|&n| p.pow(n)).collect();
        let size = caps.iter().map(|&c| c as usize).product();
        Ok(GroupRing {
            p,
            level: level.clone(),
            torsion,
            modulus: Modulus::new(p, torsion.max(1))?,
            caps,
            size,
        })
    }

    pub fn index(&self, a: &[u64]) -> usize {
        let mut idx = 0usize;
        for (i, &ai) in a.iter().enumerate() {
            idx = idx * self.caps[i] as usize + (ai % self.caps[i]) as usize;
        }
        idx
    }

    pub fn exponents(&self, mut idx: usize) -> Vec<u64> {
        let mut a = vec![0u64; self.caps.len()];
        for i in (0..self.caps.len()).rev() {
            a[i] = (idx % self.caps[i] as usize) as u64;
            idx /= self.caps[i] as usize;
        }
        a
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    /// Index of gamma_i^by * gamma^a.
    pub fn shift(&self, idx: usize, i: usize, by: u64) -> usize {
        let mut a = self.exponents(idx);
        a[i] = (a[i] + by) % self.caps[i];
        self.index(&a)
    }

    /// Multiply a coefficient vector by gamma_i (cyclic index shift).
    pub fn mul_gamma(&self, coeffs: &[u128], i: usize) -> Vec<u128> {
        let mut out = vec![0u128; self.size];
        for (idx, &c) in coeffs.iter().enumerate() {
            out[self.shift(idx, i, 1)] = c;
        }
        out
    }

    /// Ring projection onto a coarser quotient: coefficients summed over
    /// the exponent fibers a mod p^{m_i}.
    pub fn project_to(&self, coarser: &GroupRing, coeffs: &[u128]) -> Vec<u128> {
        let mut out = vec![0u128; coarser.size];
        for (idx, &c) in coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let a = self.exponents(idx);
            let j = coarser.index(&a);
            out[j] = self.modulus.add(out[j], c);
        }
        out
    }
}

/// An element of Hom_{Z_p[G/U]}(X, (Q_p/Z_p)[G/U]), stored as one
/// group-ring coefficient vector per divisor-basis generator of X, all
/// scaled into Z/p^t.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivariantHom {
    pub ring: GroupRing,
    pub values: Vec<Vec<u128>>,
}

impl EquivariantHom {
    pub fn zero(ring: &GroupRing, generators: usize) -> EquivariantHom {
        EquivariantHom {
            ring: ring.clone(),
            values: vec![vec![0; ring.size]; generators],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.iter().all(|&c| c == 0))
    }

    pub fn add(&self, other: &EquivariantHom) -> EquivariantHom {
        let m = self.ring.modulus;
        EquivariantHom {
            ring: self.ring.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| m.add(x, y)).collect())
                .collect(),
        }
    }

    pub fn scale(&self, c: u128) -> EquivariantHom {
        let m = self.ring.modulus;
        EquivariantHom {
            ring: self.ring.clone(),
            values: self
                .values
                .iter()
                .map(|v| v.iter().map(|&x| m.mul(c, x)).collect())
                .collect(),
        }
    }

    /// f(x) for x in divisor coordinates: sum_j x_j * f(e_j).
    pub fn evaluate(&self, x: &[u128]) -> Vec<u128> {
        let m = self.ring.modulus;
        let mut out = vec![0u128; self.ring.size];
        for (xj, v) in x.iter().zip(&self.values) {
            if *xj == 0 {
                continue;
            }
            for (o, &c) in out.iter_mut().zip(v) {
                *o = m.add(*o, m.mul(*xj % m.value, c));
            }
        }
        out
    }

    /// Validate the order and equivariance constraints against X.
    pub fn validate(&self, x: &FiniteLevelModule) -> Result<()> {
        let m = self.ring.modulus;
        let t = self.ring.torsion;
        if self.values.len() != x.rank() {
            return Err(Error::Precondition("hom has wrong generator count".into()));
        }
        for (j, v) in self.values.iter().enumerate() {
            let order = m.pow_p(t.min(x.divisors[j]).min(m.exponent));
            let killer = m.value / order; // p^{t - e_j}
            for &c in v {
                if m.mul(c, m.reduce_u128(killer)) != 0 && killer > 1 {
                    return Err(Error::Precondition(format!(
                        "hom violates the order constraint on generator {j}"
                    )));
                }
            }
        }
        for i in 0..x.actions.len() {
            let a = &x.actions[i];
            for j in 0..x.rank() {
                // f(gamma_i e_j) vs gamma_i f(e_j)
                let mut lhs = vec![0u128; self.ring.size];
                for k in 0..x.rank() {
                    let coef = a.at(k, j);
                    if coef == 0 {
                        continue;
                    }
                    for (o, &c) in lhs.iter_mut().zip(&self.values[k]) {
                        *o = m.add(*o, m.mul(coef % m.value, c));
                    }
                }
                let rhs = self.ring.mul_gamma(&self.values[j], i);
                if lhs != rhs {
                    return Err(Error::Precondition(format!(
                        "hom is not gamma_{}-equivariant at generator {j}",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A basis of the equivariant Hom space with the exact subgroup structure.
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub ring: GroupRing,
    pub generators: Vec<EquivariantHom>,
    /// Order exponent of each generator: generator i has order p^{orders[i]}.
    pub orders: Vec<u32>,
    /// log_p of the total number of homs.
    pub log_order: u64,
}

fn constraint_matrix(x: &FiniteLevelModule, ring: &GroupRing) -> ResidueMatrix {
    let m = ring.modulus;
    let k = x.rank();
    let size = ring.size;
    let unknowns = k * size;
    let t = ring.torsion;
    // order rows (only where the constraint is non-vacuous), then
    // equivariance rows for each group generator
    let order_rows: Vec<usize> = (0..k).filter(|&j| x.divisors[j] < t).collect();
    let d = x.actions.len();
    let rows = order_rows.len() * size + d * unknowns;
    let mut mat = ResidueMatrix::zero(m, rows, unknowns);
    let mut r = 0;
    for &j in &order_rows {
        let pe = m.pow_p(x.divisors[j]);
        for a in 0..size {
            mat.set(r, j * size + a, pe);
            r += 1;
        }
    }
    for i in 0..d {
        let act = &x.actions[i];
        for j in 0..k {
            for a in 0..size {
                // sum_k A[k][j] c_{k,a} - c_{j, a - delta_i} = 0
                for kk in 0..k {
                    let coef = act.at(kk, j) % m.value;
                    if coef != 0 {
                        mat.set(r, kk * size + a, m.add(mat.at(r, kk * size + a), coef));
                    }
                }
                let prev = ring.shift(a, i, ring.caps[i] - 1);
                mat.set(
                    r,
                    j * size + prev,
                    m.sub(mat.at(r, j * size + prev), 1),
                );
                r += 1;
            }
        }
    }
    debug_assert_eq!(r, rows);
    mat
}

/// log_p of the number of solutions of A x = 0 mod p^t.
fn kernel_log_order(a: &ResidueMatrix) -> u64 {
    let t = a.modulus.exponent as u64;
    let snf = snf_mod_prime_power(a);
    let diag = snf.exponents.len();
    let free = a.cols - diag;
    snf.exponents.iter().map(|&e| e as u64).sum::<u64>() + free as u64 * t
}

/// Compute the full equivariant Hom space of X into the scaled group ring.
pub fn hom_space(x: &FiniteLevelModule) -> Result<HomSpace> {
    let t = x.exponent();
    let ring = GroupRing::new(x.p, &x.level, t)?;
    if x.is_trivial() || t == 0 {
        return Ok(HomSpace {
            ring,
            generators: Vec::new(),
            orders: Vec::new(),
            log_order: 0,
        });
    }
    let mat = constraint_matrix(x, &ring);
    let sol = solve_linear_mod(&mat, &vec![0u128; mat.rows])
        .expect("homogeneous system always has the zero solution");
    let m = ring.modulus;
    let mut generators = Vec::new();
    let mut orders = Vec::new();
    for g in sol.kernel {
        let minval = g.iter().map(|&c| m.valuation(c)).min().unwrap_or(t);
        if minval >= t {
            continue; // zero generator
        }
        let order = t - minval;
        let values: Vec<Vec<u128>> = (0..x.rank())
            .map(|j| g[j * ring.size..(j + 1) * ring.size].to_vec())
            .collect();
        let hom = EquivariantHom {
            ring: ring.clone(),
            values,
        };
        hom.validate(x)?;
        generators.push(hom);
        orders.push(order);
    }
    let log_order = kernel_log_order(&mat);
    debug_assert_eq!(log_order, orders.iter().map(|&o| o as u64).sum::<u64>());
    Ok(HomSpace {
        ring,
        generators,
        orders,
        log_order,
    })
}

/// Evaluation at the identity component: eta(f)(x) = f(x)_1, as the dual
/// coordinate vector (phi(e_j) scaled by p^t) of X.
pub fn eta(f: &EquivariantHom) -> Vec<u128> {
    let id = f.ring.identity_index();
    f.values.iter().map(|v| v[id]).collect()
}

/// The inverse of eta: f(x) = sum_sigma phi(sigma^{-1} x) sigma.
pub fn eta_inverse(x: &FiniteLevelModule, phi: &[u128]) -> Result<EquivariantHom> {
    let t = x.exponent();
    let ring = GroupRing::new(x.p, &x.level, t)?;
    if x.is_trivial() || t == 0 {
        return Ok(EquivariantHom::zero(&ring, x.rank()));
    }
    let m = ring.modulus;
    let k = x.rank();
    // inverse action matrices, entries lifted to Z/p^t (rows only matter
    // mod p^{e_row}, so any lift is sound)
    let invs: Vec<ResidueMatrix> = x
        .actions
        .iter()
        .map(|a| {
            a.inverse()
                .expect("action matrices are automorphisms")
                .reduce_to_compatible(m)
        })
        .collect();
    let mut values = vec![vec![0u128; ring.size]; k];
    for idx in 0..ring.size {
        let a = ring.exponents(idx);
        // gamma^{-a} as a matrix on X
        let mut g = ResidueMatrix::identity(m, k);
        for (i, &ai) in a.iter().enumerate() {
            for _ in 0..ai {
                g = g.mul(&invs[i]);
            }
        }
        // c_{j, idx} = phi(gamma^{-a} e_j) = sum_k phi_k g[k][j]
        for j in 0..k {
            let mut acc = 0u128;
            for kk in 0..k {
                acc = m.add(acc, m.mul(phi[kk] % m.value, g.at(kk, j)));
            }
            values[j][idx] = acc;
        }
    }
    let hom = EquivariantHom { ring, values };
    hom.validate(x)?;
    Ok(hom)
}

/// Outcome of the finite-level duality check at one level.
#[derive(Clone, Debug)]
pub struct DualityReport {
    pub level: LevelVector,
    pub hom_log_order: u64,
    pub dual_log_order: u64,
    pub eta_kernel_log_order: u64,
    pub bijective: bool,
}

/// Check that eta is a bijection from the equivariant Hom space onto the
/// Pontryagin dual of X: matching group orders plus trivial eta-kernel,
/// both certified by exact Smith computations mod p^t.
pub fn duality_check(x: &FiniteLevelModule) -> Result<DualityReport> {
    let t = x.exponent();
    let dual_log_order = x.order_exponent();
    if x.is_trivial() || t == 0 {
        return Ok(DualityReport {
            level: x.level.clone(),
            hom_log_order: 0,
            dual_log_order,
            eta_kernel_log_order: 0,
            bijective: dual_log_order == 0,
        });
    }
    let ring = GroupRing::new(x.p, &x.level, t)?;
    let mat = constraint_matrix(x, &ring);
    let hom_log_order = kernel_log_order(&mat);
    // augment with rows forcing the identity components to vanish; the
    // solutions of the augmented system are exactly ker(eta)
    let k = x.rank();
    let m = ring.modulus;
    let id = ring.identity_index();
    let mut aug = ResidueMatrix::zero(m, mat.rows + k, mat.cols);
    for r in 0..mat.rows {
        for c in 0..mat.cols {
            let v = mat.at(r, c);
            if v != 0 {
                aug.set(r, c, v);
            }
        }
    }
    for j in 0..k {
        aug.set(mat.rows + j, j * ring.size + id, 1);
    }
    let eta_kernel_log_order = kernel_log_order(&aug);
    Ok(DualityReport {
        level: x.level.clone(),
        hom_log_order,
        dual_log_order,
        eta_kernel_log_order,
        bijective: hom_log_order == dual_log_order && eta_kernel_log_order == 0,
    })
}

/// Transition map between Hom spaces along the tower: given h at the finer
/// level (source of `projection`), produce the induced hom at the coarser
/// level by section-and-coset-sum. `projection` must be the canonical
/// projection M_{V} -> M_{U} and h a hom at the V-level.
pub fn rho(h: &EquivariantHom, projection: &FiniteMorphism) -> Result<EquivariantHom> {
    let fine = &projection.source;
    let coarse = &projection.target;
    if h.values.len() != fine.rank() {
        return Err(Error::Precondition("rho input has wrong generator count".into()));
    }
    let t_fine = h.ring.torsion;
    let t_coarse = coarse.exponent();
    if t_coarse > t_fine {
        return Err(Error::Precondition(
            "coarser level has larger exponent than finer level".into(),
        ));
    }
    let ring_coarse = GroupRing::new(coarse.p, &coarse.level, t_coarse)?;
    if coarse.is_trivial() || t_coarse == 0 {
        return Ok(EquivariantHom::zero(&ring_coarse, coarse.rank()));
    }
    // sections of the projection: solve proj(s_j) = e_j with rows scaled
    // to a common modulus p^{t_coarse}
    let m_c = Modulus::new(coarse.p, t_coarse)?;
    let scaled = {
        let p = coarse.p as u128;
        ResidueMatrix::from_fn(m_c, coarse.rank(), fine.rank(), |r, c| {
            let scale = p.pow(t_coarse - coarse.divisors[r]);
            m_c.reduce_u128(projection.matrix.at(r, c) % m_c.value * scale)
        })
    };
    let m_f = h.ring.modulus;
    let renorm = (coarse.p as u128).pow(t_fine - t_coarse);
    let mut values = Vec::with_capacity(coarse.rank());
    for j in 0..coarse.rank() {
        let mut b = vec![0u128; coarse.rank()];
        b[j] = m_c.reduce_u128((coarse.p as u128).pow(t_coarse - coarse.divisors[j]));
        let section = solve_linear_mod(&scaled, &b)
            .ok_or_else(|| Error::Precondition("projection admits no section".into()))?
            .particular;
        let y = h.evaluate(&fine.canonicalize(&section));
        let summed = h.ring.project_to(&ring_coarse, &y);
        // renormalize 1/p^{t_fine} coefficients to 1/p^{t_coarse}
        let mut v = Vec::with_capacity(ring_coarse.size);
        for &c in &summed {
            if c % renorm != 0 {
                return Err(Error::Precondition(
                    "rho image not divisible by the exponent gap".into(),
                ));
            }
            v.push(m_f.reduce_u128(c / renorm) % ring_coarse.modulus.value);
        }
        values.push(v);
    }
    let out = EquivariantHom {
        ring: ring_coarse,
        values,
    };
    out.validate(coarse)?;
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct NaturalityReport {
    pub fine_level: LevelVector,
    pub coarse_level: LevelVector,
    pub checked_generators: usize,
    pub natural: bool,
}

/// Verify eta o rho = (norm)^* o eta on every generator of the Hom space
/// at the fine level: the square relating the Hom-space transition to the
/// dual of the norm map of coinvariants commutes.
pub fn verify_eta_natural(
    homs: &HomSpace,
    norm: &FiniteMorphism,
    projection: &FiniteMorphism,
) -> Result<NaturalityReport> {
    let coarse = &projection.target;
    let fine = &projection.source;
    if norm.source.level != coarse.level || norm.target.level != fine.level {
        return Err(Error::Precondition(
            "norm and projection must connect the same pair of levels".into(),
        ));
    }
    let t_fine = homs.ring.torsion;
    let t_coarse = coarse.exponent();
    let renorm = (coarse.p as u128).pow(t_fine - t_coarse);
    let m_f = homs.ring.modulus;
    let mut natural = true;
    for h in &homs.generators {
        let lhs = eta(&rho(h, projection)?);
        // rhs: phi = eta(h), then phi(N e_j) with the same renormalization
        let phi = eta(h);
        let mut rhs = Vec::with_capacity(coarse.rank());
        for j in 0..coarse.rank() {
            let mut acc = 0u128;
            for k in 0..fine.rank() {
                acc = m_f.add(acc, m_f.mul(norm.matrix.at(k, j) % m_f.value, phi[k]));
            }
            if acc % renorm != 0 {
                natural = false;
                rhs.push(0);
                continue;
            }
            rhs.push((acc / renorm) % (coarse.p as u128).pow(t_coarse.max(1)));
        }
        if lhs != rhs {
            natural = false;
        }
    }
    Ok(NaturalityReport {
        fine_level: fine.level.clone(),
        coarse_level: coarse.level.clone(),
        checked_generators: homs.generators.len(),
        natural,
    })
}
