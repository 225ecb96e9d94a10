//! Finitely presented modules over the Iwasawa algebra and their
//! finite-level coinvariants.
//!
//! A module M is the cokernel of a matrix of integer-coefficient
//! polynomials A: Lambda^s -> Lambda^r. At a level vector n the
//! coinvariants M_{U_n} are computed by flattening A over the monomial
//! basis of Z_p[T]/(w_{n_1}(T_1), ..., w_{n_d}(T_d)) and taking a Smith
//! normal form mod p^N, with N auto-raised whenever the form saturates.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lambda_poly::{multi_norm, reduce_mod_level, LambdaPolynomial, LevelVector};
use crate::padic_linalg::{
    rank_exact, snf_mod_prime_power, IntegerMatrix, Modulus, ResidueMatrix,
};

/// M = cokernel of an r x s matrix of Lambda-polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModulePresentation {
    pub p: u64,
    pub d: usize,
    pub generators: usize,
    pub relations: usize,
    entries: Vec<LambdaPolynomial>, // row-major r x s
}

impl ModulePresentation {
    pub fn new(
        p: u64,
        d: usize,
        rows: Vec<Vec<LambdaPolynomial>>,
    ) -> Result<ModulePresentation> {
        let generators = rows.len();
        let relations = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(generators * relations);
        for row in &rows {
            if row.len() != relations {
                return Err(Error::Precondition("ragged presentation matrix".into()));
            }
            for poly in row {
                if poly.p != p || poly.vars != d {
                    return Err(Error::Precondition(
                        "presentation entry with mismatched prime or variable count".into(),
                    ));
                }
                entries.push(poly.clone());
            }
        }
        Ok(ModulePresentation {
            p,
            d,
            generators,
            relations,
            entries,
        })
    }

    /// The zero module (no generators).
    pub fn zero_module(p: u64, d: usize) -> ModulePresentation {
        ModulePresentation {
            p,
            d,
            generators: 0,
            relations: 0,
            entries: Vec::new(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &LambdaPolynomial {
        &self.entries[i * self.relations + j]
    }

    pub fn is_square(&self) -> bool {
        self.generators == self.relations && self.generators > 0
    }

    pub fn rows(&self) -> Vec<Vec<LambdaPolynomial>> {
        (0..self.generators)
            .map(|i| (0..self.relations).map(|j| self.entry(i, j).clone()).collect())
            .collect()
    }
}

/// The group algebra Z_p[G/U_n] realized as Z_p[T_1..T_d] modulo the level
/// ideal, with the lexicographically ordered monomial basis T^a,
/// 0 <= a_i < p^{n_i}.
#[derive(Clone, Debug)]
pub struct GroupAlgebraLevel {
    pub p: u64,
    pub d: usize,
    pub level: LevelVector,
    pub basis: Vec<Vec<u32>>,
}

impl GroupAlgebraLevel {
    pub fn new(p: u64, level: &LevelVector) -> GroupAlgebraLevel {
        let d = level.d();
        let caps: Vec<u32> = level.0.iter().map(|&n| (p as u64).pow(n) as u32).collect();
        let size: usize = caps.iter().map(|&c| c as usize).product();
        let mut basis = Vec::with_capacity(size);
        let mut cur = vec![0u32; d];
        loop {
            basis.push(cur.clone());
            // lexicographic increment, last coordinate fastest
            let mut i = d;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < caps[i] {
                    break;
                }
                cur[i] = 0;
                if i == 0 {
                    return GroupAlgebraLevel {
                        p,
                        d,
                        level: level.clone(),
                        basis,
                    };
                }
            }
            if d == 0 {
                return GroupAlgebraLevel {
                    p,
                    d,
                    level: level.clone(),
                    basis,
                };
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn monomial_index(&self, exps: &[u32]) -> usize {
        let mut idx = 0usize;
        for (i, &e) in exps.iter().enumerate() {
            let cap = (self.p as u64).pow(self.level.0[i]) as usize;
            idx = idx * cap + e as usize;
        }
        idx
    }

    /// Coordinates of a fully reduced polynomial on the monomial basis.
    pub fn coordinates(&self, f: &LambdaPolynomial) -> Vec<BigInt> {
        let mut coords = vec![BigInt::zero(); self.dim()];
        for (e, c) in f.terms() {
            coords[self.monomial_index(e)] = c.clone();
        }
        coords
    }

    /// The matrix of multiplication by f on this group algebra, exact
    /// integer entries.
    pub fn multiplication_matrix(&self, f: &LambdaPolynomial) -> IntegerMatrix {
        self.map_matrix(f, self)
    }

    /// The matrix of x -> reduce(f * x) from this level into `target`
    /// (columns indexed by this basis, rows by the target basis).
    pub fn map_matrix(&self, f: &LambdaPolynomial, target: &GroupAlgebraLevel) -> IntegerMatrix {
        let mut out = IntegerMatrix::zero(target.dim(), self.dim());
        for (j, exps) in self.basis.iter().enumerate() {
            let mono = LambdaPolynomial::monomial(self.p, self.d, exps.clone(), BigInt::one());
            let prod = reduce_mod_level(&f.mul(&mono), &target.level);
            for (e, c) in prod.terms() {
                out.set(target.monomial_index(e), j, c.clone());
            }
        }
        out
    }
}

/// Flatten the presentation matrix over the monomial basis at a level:
/// an exact integer matrix of shape (r * m) x (s * m).
pub fn flatten_presentation(m: &ModulePresentation, level: &LevelVector) -> IntegerMatrix {
    let gal = GroupAlgebraLevel::new(m.p, level);
    let dim = gal.dim();
    let mut out = IntegerMatrix::zero(m.generators * dim, m.relations * dim);
    for i in 0..m.generators {
        for j in 0..m.relations {
            let reduced = reduce_mod_level(m.entry(i, j), level);
            let block = gal.multiplication_matrix(&reduced);
            for a in 0..dim {
                for b in 0..dim {
                    out.set(i * dim + a, j * dim + b, block.at(a, b).clone());
                }
            }
        }
    }
    out
}

/// All levels n with 0 <= n <= bound componentwise, lexicographically.
pub fn levels_up_to(bound: &LevelVector) -> Vec<LevelVector> {
    let d = bound.d();
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    loop {
        out.push(LevelVector(cur.clone()));
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] <= bound.0[i] {
                break;
            }
            cur[i] = 0;
            if i == 0 {
                return out;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScfLevel {
    pub level: LevelVector,
    pub rank: usize,
    pub required: usize,
    pub finite: bool,
}

/// Per-level finiteness certificate for the coinvariants M_{U_n}, n <= bound.
#[derive(Clone, Debug)]
pub struct ScfCertificate {
    pub per_level: Vec<ScfLevel>,
    pub verdict: bool,
}

/// M_{U_n} is finite iff the flattened presentation has full row rank over
/// the rationals; this is an exact certificate, not precision-limited.
pub fn is_scf(m: &ModulePresentation, bound: &LevelVector) -> ScfCertificate {
    let mut per_level = Vec::new();
    for level in levels_up_to(bound) {
        let flat = flatten_presentation(m, &level);
        let rank = rank_exact(&flat);
        let required = flat.rows;
        per_level.push(ScfLevel {
            level,
            rank,
            required,
            finite: rank == required,
        });
    }
    let verdict = per_level.iter().all(|l| l.finite);
    ScfCertificate { per_level, verdict }
}

fn is_finite_at(m: &ModulePresentation, level: &LevelVector) -> bool {
    let flat = flatten_presentation(m, level);
    rank_exact(&flat) == flat.rows
}

/// The coinvariants M_{U_n} as an abstract finite p-group with the action
/// of the group generators gamma_i = 1 + T_i.
#[derive(Clone, Debug)]
pub struct FiniteLevelModule {
    pub parent: ModulePresentation,
    pub p: u64,
    pub level: LevelVector,
    /// Ascending elementary-divisor exponents e_1 <= ... <= e_k (all > 0);
    /// the group is the direct sum of Z/p^{e_j}.
    pub divisors: Vec<u32>,
    /// Action of gamma_i on the divisor basis, entries normalized to
    /// [0, p^{e_row}) inside a mod-p^{e_max} matrix.
    pub actions: Vec<ResidueMatrix>,
    /// Precision p^N used by the underlying Smith computation.
    pub precision: u32,
    left: ResidueMatrix,
    left_inv: ResidueMatrix,
    kept: Vec<usize>,
}

impl FiniteLevelModule {
    pub fn rank(&self) -> usize {
        self.divisors.len()
    }

    /// Exponent of the group: the largest divisor exponent (0 for trivial).
    pub fn exponent(&self) -> u32 {
        self.divisors.last().copied().unwrap_or(0)
    }

    /// log_p of the group order.
    pub fn order_exponent(&self) -> u64 {
        self.divisors.iter().map(|&e| e as u64).sum()
    }

    pub fn is_trivial(&self) -> bool {
        self.divisors.is_empty()
    }

    /// The group order, if it fits in a u128.
    pub fn order(&self) -> Option<u128> {
        let mut acc: u128 = 1;
        for &e in &self.divisors {
            for _ in 0..e {
                acc = acc.checked_mul(self.p as u128)?;
            }
        }
        Some(acc)
    }

    /// Working modulus p^{e_max} for endomorphism matrices.
    pub fn matrix_modulus(&self) -> Modulus {
        Modulus::new(self.p, self.exponent().max(1)).expect("exponent within range")
    }

    /// Canonical representative: component j reduced mod p^{e_j}.
    pub fn canonicalize(&self, x: &[u128]) -> Vec<u128> {
        x.iter()
            .zip(&self.divisors)
            .map(|(&v, &e)| v % (self.p as u128).pow(e))
            .collect()
    }

    /// All group elements in divisor coordinates. Caller is responsible for
    /// checking the order first.
    pub fn enumerate_elements(&self) -> Vec<Vec<u128>> {
        let mut out = vec![vec![0u128; self.divisors.len()]];
        for (j, &e) in self.divisors.iter().enumerate() {
            let cap = (self.p as u128).pow(e);
            let mut next = Vec::with_capacity(out.len() * cap as usize);
            for x in &out {
                for v in 0..cap {
                    let mut y = x.clone();
                    y[j] = v;
                    next.push(y);
                }
            }
            out = next;
        }
        out
    }

    /// Apply an endomorphism matrix (row-normalized convention).
    pub fn apply_matrix(&self, mat: &ResidueMatrix, x: &[u128]) -> Vec<u128> {
        let raw = mat.mul_vec(x);
        self.canonicalize(&raw)
    }

    pub fn apply_action(&self, i: usize, x: &[u128]) -> Vec<u128> {
        self.apply_matrix(&self.actions[i], x)
    }

    /// Divisor coordinates of the image of a flattened vector.
    pub fn project_flat(&self, flat: &[u128]) -> Vec<u128> {
        let full = self.left.mul_vec(flat);
        self.canonicalize(&self.kept.iter().map(|&i| full[i]).collect::<Vec<_>>())
    }

    pub(crate) fn left(&self) -> &ResidueMatrix {
        &self.left
    }

    pub(crate) fn left_inv(&self) -> &ResidueMatrix {
        &self.left_inv
    }

    pub(crate) fn kept(&self) -> &[usize] {
        &self.kept
    }
}

/// Normalize an endomorphism-style matrix so each row r lies in
/// [0, p^{e_r}); the canonical representative of a map into a product of
/// cyclic groups of distinct orders.
fn normalize_rows(mat: &mut ResidueMatrix, row_divisors: &[u32]) {
    let p = mat.modulus.p as u128;
    for r in 0..mat.rows {
        let cap = p.pow(row_divisors[r]);
        for c in 0..mat.cols {
            mat.set(r, c, mat.at(r, c) % cap);
        }
    }
}

/// Well-definedness: p^{e_col} * entry must vanish mod p^{e_row}.
fn matrix_well_defined(mat: &ResidueMatrix, row_div: &[u32], col_div: &[u32]) -> bool {
    let p = mat.modulus.p as u128;
    for r in 0..mat.rows {
        let cap = p.pow(row_div[r]);
        for c in 0..mat.cols {
            if (mat.at(r, c) * p.pow(col_div[c])) % cap != 0 {
                return false;
            }
        }
    }
    true
}

/// Equality of two maps into the same graded target: rowwise mod p^{e_row}.
fn matrices_equal_graded(a: &ResidueMatrix, b: &ResidueMatrix, row_div: &[u32]) -> bool {
    let p = a.modulus.p as u128;
    if a.rows != b.rows || a.cols != b.cols {
        return false;
    }
    for r in 0..a.rows {
        let cap = p.pow(row_div[r]);
        for c in 0..a.cols {
            if (a.at(r, c) % cap) != (b.at(r, c) % cap) {
                return false;
            }
        }
    }
    true
}

fn coinvariants_at_precision(
    m: &ModulePresentation,
    level: &LevelVector,
    precision: u32,
) -> Result<(FiniteLevelModule, bool)> {
    let modulus = Modulus::new(m.p, precision)?;
    let gal = GroupAlgebraLevel::new(m.p, level);
    let dim = gal.dim();
    let rm = m.generators * dim;
    let flat = flatten_presentation(m, level).reduce(modulus);
    let snf = snf_mod_prime_power(&flat);
    if snf.saturated {
        return Ok((
            FiniteLevelModule {
                parent: m.clone(),
                p: m.p,
                level: level.clone(),
                divisors: Vec::new(),
                actions: Vec::new(),
                precision,
                left: snf.left.clone(),
                left_inv: snf.left.clone(),
                kept: Vec::new(),
            },
            true,
        ));
    }
    debug_assert_eq!(snf.exponents.len(), rm.min(m.relations * dim));
    let kept: Vec<usize> = snf
        .exponents
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, _)| i)
        .collect();
    let divisors: Vec<u32> = kept.iter().map(|&i| snf.exponents[i]).collect();
    let left_inv = snf.left.inverse()?;
    let mut module = FiniteLevelModule {
        parent: m.clone(),
        p: m.p,
        level: level.clone(),
        divisors,
        actions: Vec::new(),
        precision,
        left: snf.left,
        left_inv,
        kept,
    };
    // action of gamma_i = 1 + T_i: block-diagonal multiplication matrix
    // conjugated into the divisor basis
    let mat_mod = module.matrix_modulus();
    let k = module.divisors.len();
    let mut actions = Vec::with_capacity(m.d);
    for i in 0..m.d {
        let gamma_poly = LambdaPolynomial::variable(m.p, m.d, i)
            .add(&LambdaPolynomial::constant(m.p, m.d, BigInt::one()));
        let block = gal
            .multiplication_matrix(&reduce_mod_level(&gamma_poly, level))
            .reduce(modulus);
        let mut big = ResidueMatrix::zero(modulus, rm, rm);
        for g in 0..m.generators {
            for a in 0..dim {
                for b in 0..dim {
                    big.set(g * dim + a, g * dim + b, block.at(a, b));
                }
            }
        }
        let conj = module.left.mul(&big).mul(&module.left_inv);
        let mut action = ResidueMatrix::from_fn(mat_mod, k, k, |r, c| {
            mat_mod.reduce_u128(conj.at(module.kept[r], module.kept[c]))
        });
        normalize_rows(&mut action, &module.divisors);
        actions.push(action);
    }
    module.actions = actions;
    validate_module(&module)?;
    Ok((module, false))
}

fn validate_module(x: &FiniteLevelModule) -> Result<()> {
    let k = x.divisors.len();
    if k == 0 {
        return Ok(());
    }
    let mat_mod = x.matrix_modulus();
    let id = ResidueMatrix::identity(mat_mod, k);
    for (i, a) in x.actions.iter().enumerate() {
        if !matrix_well_defined(a, &x.divisors, &x.divisors) {
            return Err(Error::Precondition(format!(
                "action matrix gamma_{} is not well-defined",
                i + 1
            )));
        }
        // gamma_i^{p^{n_i}} = identity
        let reps = (x.p as u64).pow(x.level.0[i]);
        let mut pow = id.clone();
        for _ in 0..reps {
            pow = pow.mul(a);
        }
        if !matrices_equal_graded(&pow, &id, &x.divisors) {
            return Err(Error::Precondition(format!(
                "gamma_{} does not have order dividing p^{}",
                i + 1,
                x.level.0[i]
            )));
        }
        if a.inverse().is_err() {
            return Err(Error::Precondition(format!(
                "gamma_{} action is not invertible",
                i + 1
            )));
        }
        for b in x.actions.iter().skip(i + 1) {
            if !matrices_equal_graded(&a.mul(b), &b.mul(a), &x.divisors) {
                return Err(Error::Precondition("action matrices do not commute".into()));
            }
        }
    }
    Ok(())
}

/// Default initial precision for coinvariant computations.
pub const DEFAULT_PRECISION: u32 = 4;

/// Compute M_{U_n}. Errors if the level is not coinvariant-finite. The
/// working precision starts at `initial_precision` and doubles until the
/// Smith form is unsaturated, which exact integer input always allows.
pub fn coinvariants(
    m: &ModulePresentation,
    level: &LevelVector,
    initial_precision: u32,
) -> Result<FiniteLevelModule> {
    if !is_finite_at(m, level) {
        return Err(Error::NotCoinvariantFinite(level.clone()));
    }
    coinvariants_trusted(m, level, initial_precision)
}

/// Same as `coinvariants` but skips the (exact, and expensive) finiteness
/// certificate; for callers that have already run `is_scf`.
pub fn coinvariants_trusted(
    m: &ModulePresentation,
    level: &LevelVector,
    initial_precision: u32,
) -> Result<FiniteLevelModule> {
    let cap = Modulus::max_exponent(m.p);
    let mut precision = initial_precision.max(1);
    loop {
        let (module, saturated) = coinvariants_at_precision(m, level, precision)?;
        if !saturated {
            return Ok(module);
        }
        if precision >= cap {
            return Err(Error::PrecisionOverflow);
        }
        precision = (precision * 2).min(cap);
    }
}

/// Compute coinvariants at several levels with one shared precision, so
/// that morphisms between any two of them are directly comparable.
pub fn coinvariants_tower(
    m: &ModulePresentation,
    levels: &[LevelVector],
    initial_precision: u32,
) -> Result<Vec<FiniteLevelModule>> {
    let mut modules = Vec::with_capacity(levels.len());
    for level in levels {
        modules.push(coinvariants(m, level, initial_precision)?);
    }
    let common = modules.iter().map(|x| x.precision).max().unwrap_or(initial_precision);
    for module in modules.iter_mut() {
        if module.precision != common {
            let (redone, saturated) = coinvariants_at_precision(m, &module.level, common)?;
            debug_assert!(!saturated);
            *module = redone;
        }
    }
    Ok(modules)
}

/// An equivariant map between finite-level modules, as a matrix from the
/// source divisor basis to the target divisor basis.
#[derive(Clone, Debug)]
pub struct FiniteMorphism {
    pub source: FiniteLevelModule,
    pub target: FiniteLevelModule,
    /// Entries normalized to [0, p^{e_row(target)}).
    pub matrix: ResidueMatrix,
}

impl FiniteMorphism {
    fn build(
        source: &FiniteLevelModule,
        target: &FiniteLevelModule,
        mut matrix: ResidueMatrix,
    ) -> Result<FiniteMorphism> {
        normalize_rows(&mut matrix, &target.divisors);
        let morphism = FiniteMorphism {
            source: source.clone(),
            target: target.clone(),
            matrix,
        };
        morphism.validate()?;
        Ok(morphism)
    }

    pub fn validate(&self) -> Result<()> {
        if !matrix_well_defined(&self.matrix, &self.target.divisors, &self.source.divisors) {
            return Err(Error::Precondition("morphism matrix is not well-defined".into()));
        }
        // equivariance: W * gamma_i^src == gamma_i^tgt * W in the target grading
        for i in 0..self.source.actions.len() {
            let lhs = self
                .matrix
                .mul(&self.source.actions[i].reduce_to_compatible(self.matrix.modulus));
            let rhs = self.target.actions[i]
                .reduce_to_compatible(self.matrix.modulus)
                .mul(&self.matrix);
            if !matrices_equal_graded(&lhs, &rhs, &self.target.divisors) {
                return Err(Error::Precondition(format!(
                    "morphism does not commute with gamma_{}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: &[u128]) -> Vec<u128> {
        self.target.canonicalize(&self.matrix.mul_vec(x))
    }

    pub fn is_zero(&self) -> bool {
        let p = self.matrix.modulus.p as u128;
        (0..self.matrix.rows).all(|r| {
            let cap = p.pow(self.target.divisors[r]);
            (0..self.matrix.cols).all(|c| self.matrix.at(r, c) % cap == 0)
        })
    }

    /// Injectivity by exhausting the kernel of the matrix over the graded
    /// groups; only for small sources.
    pub fn is_injective_exhaustive(&self) -> bool {
        self.source
            .enumerate_elements()
            .into_iter()
            .all(|x| x.iter().all(|&v| v == 0) || self.apply(&x).iter().any(|&v| v != 0))
    }

    pub fn is_identity(&self) -> bool {
        let p = self.matrix.modulus.p as u128;
        self.matrix.rows == self.matrix.cols
            && (0..self.matrix.rows).all(|r| {
                let cap = p.pow(self.target.divisors[r]);
                (0..self.matrix.cols)
                    .all(|c| self.matrix.at(r, c) % cap == u128::from(r == c))
            })
    }

    /// self o other (other first).
    pub fn compose(&self, other: &FiniteMorphism) -> Result<FiniteMorphism> {
        if self.source.level != other.target.level {
            return Err(Error::Precondition("composition level mismatch".into()));
        }
        let modulus = self.matrix.modulus;
        let inner = other.matrix.reduce_to_compatible(modulus);
        FiniteMorphism::build(&other.source, &self.target, self.matrix.mul(&inner))
    }
}

impl ResidueMatrix {
    /// Change to a modulus of the same prime, reducing or lifting entries.
    /// Lifting is only sound when the caller knows the entries are
    /// well-defined at the larger modulus (graded maps: entries at row r
    /// matter only mod p^{e_r} <= both moduli).
    pub(crate) fn reduce_to_compatible(&self, modulus: Modulus) -> ResidueMatrix {
        if modulus.exponent <= self.modulus.exponent {
            self.reduce_to(modulus)
        } else {
            ResidueMatrix::from_fn(modulus, self.rows, self.cols, |r, c| self.at(r, c))
        }
    }
}

/// Build a morphism from a map of flattened representative spaces.
fn morphism_from_flat(
    source: &FiniteLevelModule,
    target: &FiniteLevelModule,
    flat_map: &IntegerMatrix,
) -> Result<FiniteMorphism> {
    if source.parent != target.parent {
        return Err(Error::Precondition("morphism endpoints from different modules".into()));
    }
    if source.precision != target.precision {
        return Err(Error::Precondition(
            "morphism endpoints at different precisions; build them via coinvariants_tower".into(),
        ));
    }
    let modulus = Modulus::new(source.p, source.precision)?;
    let conj = target
        .left()
        .mul(&flat_map.reduce(modulus))
        .mul(source.left_inv());
    let mat_mod = target.matrix_modulus();
    let restricted = ResidueMatrix::from_fn(
        mat_mod,
        target.kept().len(),
        source.kept().len(),
        |r, c| mat_mod.reduce_u128(conj.at(target.kept()[r], source.kept()[c])),
    );
    FiniteMorphism::build(source, target, restricted)
}

/// The norm map N_{U/V}: M_{U_n} -> M_{U_{n'}} for n <= n', multiplication
/// by the norm element on representatives.
pub fn norm_morphism(
    source: &FiniteLevelModule,
    target: &FiniteLevelModule,
) -> Result<FiniteMorphism> {
    if !source.level.le(&target.level) {
        return Err(Error::Precondition(format!(
            "norm requires source level {} <= target level {}",
            source.level, target.level
        )));
    }
    let m = &source.parent;
    let nu = multi_norm(m.p, &source.level, &target.level)?;
    let from_gal = GroupAlgebraLevel::new(m.p, &source.level);
    let to_gal = GroupAlgebraLevel::new(m.p, &target.level);
    let block = from_gal.map_matrix(&nu, &to_gal);
    morphism_from_flat(source, target, &block_diagonal(m.generators, &block))
}

/// The canonical projection M_{U_{n'}} -> M_{U_n} for n <= n'.
pub fn projection_morphism(
    source: &FiniteLevelModule,
    target: &FiniteLevelModule,
) -> Result<FiniteMorphism> {
    if !target.level.le(&source.level) {
        return Err(Error::Precondition(format!(
            "projection requires target level {} <= source level {}",
            target.level, source.level
        )));
    }
    let m = &source.parent;
    let one = LambdaPolynomial::constant(m.p, m.d, BigInt::one());
    let from_gal = GroupAlgebraLevel::new(m.p, &source.level);
    let to_gal = GroupAlgebraLevel::new(m.p, &target.level);
    let block = from_gal.map_matrix(&one, &to_gal);
    morphism_from_flat(source, target, &block_diagonal(m.generators, &block))
}

fn block_diagonal(copies: usize, block: &IntegerMatrix) -> IntegerMatrix {
    let mut out = IntegerMatrix::zero(copies * block.rows, copies * block.cols);
    for g in 0..copies {
        for a in 0..block.rows {
            for b in 0..block.cols {
                out.set(g * block.rows + a, g * block.cols + b, block.at(a, b).clone());
            }
        }
    }
    out
}

/// Pontryagin dual: same divisors, action transposed into the dual basis
/// with the order-correcting p-power scaling.
pub fn dual(x: &FiniteLevelModule) -> FiniteLevelModule {
    let k = x.divisors.len();
    if k == 0 {
        return x.clone();
    }
    let mat_mod = x.matrix_modulus();
    let p = x.p as u128;
    let actions = x
        .actions
        .iter()
        .map(|a| {
            let mut out = ResidueMatrix::zero(mat_mod, k, k);
            for r in 0..k {
                for c in 0..k {
                    // D[r][c] = A[c][r] * p^{e_r - e_c}, exact by the
                    // well-definedness of A
                    let (er, ec) = (x.divisors[r], x.divisors[c]);
                    let v = if er >= ec {
                        mat_mod.reduce_u128(a.at(c, r) * p.pow(er - ec))
                    } else {
                        let val = a.at(c, r);
                        let div = p.pow(ec - er);
                        debug_assert_eq!(val % div, 0, "dual scaling not exact");
                        val / div
                    };
                    out.set(r, c, v % p.pow(er));
                }
            }
            out
        })
        .collect();
    FiniteLevelModule {
        actions,
        ..x.clone()
    }
}

/// The iota twist: same group, each gamma_i replaced by its inverse.
pub fn iota_twist(x: &FiniteLevelModule) -> FiniteLevelModule {
    if x.divisors.is_empty() {
        return x.clone();
    }
    let actions = x
        .actions
        .iter()
        .map(|a| {
            let mut inv = a.inverse().expect("action matrices are automorphisms");
            normalize_rows(&mut inv, &x.divisors);
            inv
        })
        .collect();
    FiniteLevelModule {
        actions,
        ..x.clone()
    }
}
