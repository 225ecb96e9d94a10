//! The verification pipeline: hypothesis check, per-level duality,
//! naturality along the tower, limit analysis, and d = 1 invariants.

use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use iwalab_core::char_invariants::{char_from_square_presentation, char_iota, cross_check_growth};
use iwalab_core::duality::{duality_check, eta, hom_space, rho, verify_eta_natural, HomSpace};
use iwalab_core::error::Result;
use iwalab_core::lambda_poly::LevelVector;
use iwalab_core::limit_systems::{
    adjoint_divisors, build_direct_system, colimit_analysis, diagonal_chain,
    dual_pseudo_order_check, growth_invariants, pseudo_null_verdict,
};
use iwalab_core::module_core::{
    coinvariants_tower, is_scf, levels_up_to, norm_morphism, projection_morphism,
    FiniteLevelModule, ModulePresentation,
};
use iwalab_core::padic_linalg::Modulus;

use crate::report::{
    CharData, DualPseudo, DualityLevel, Growth, Hypothesis, HypothesisLevel, LevelReport,
    LimitReport, ModuleIdentity, NaturalityReport, Parameters, PseudoNull, Report, D1Report,
};

pub const VERDICT_PASS: &str = "pass";
pub const VERDICT_FAIL: &str = "fail";
pub const VERDICT_HYPOTHESIS: &str = "hypothesis-failure";

/// Exhaustive pointwise naturality below this group order; sampled above.
const EXHAUSTIVE_LIMIT: u128 = 10_000;
const SAMPLE_SIZE: usize = 64;

#[derive(Clone, Copy)]
pub struct Checks {
    pub duality: bool,
    pub naturality: bool,
    pub colimit: bool,
    pub growth: bool,
    pub char: bool,
}

impl Checks {
    pub fn all() -> Checks {
        Checks {
            duality: true,
            naturality: true,
            colimit: true,
            growth: true,
            char: true,
        }
    }

    pub fn none() -> Checks {
        Checks {
            duality: false,
            naturality: false,
            colimit: false,
            growth: false,
            char: false,
        }
    }

    pub fn enabled_names(&self) -> Vec<String> {
        [
            ("duality", self.duality),
            ("naturality", self.naturality),
            ("colimit", self.colimit),
            ("growth", self.growth),
            ("char", self.char),
        ]
        .iter()
        .filter(|(_, on)| *on)
        .map(|(n, _)| n.to_string())
        .collect()
    }
}

pub struct VerifyOptions {
    pub max_level: LevelVector,
    pub precision: u32,
    pub seed: u64,
    pub checks: Checks,
}

pub fn exit_code(verdict: &str) -> i32 {
    match verdict {
        VERDICT_PASS => 0,
        VERDICT_HYPOTHESIS => 2,
        _ => 1,
    }
}

fn identity(name: &str, m: &ModulePresentation) -> ModuleIdentity {
    ModuleIdentity {
        name: name.to_string(),
        p: m.p,
        d: m.d,
        generators: m.generators,
        relations: m.relations,
        presentation: m
            .rows()
            .iter()
            .map(|row| row.iter().map(|f| f.to_string()).collect())
            .collect(),
    }
}

/// Evaluate the dual pairing <phi, x> = sum_j phi_j x_j in Z/p^t, where
/// phi is an eta-image (coordinates scaled by p^t).
fn pair(x_mod: &FiniteLevelModule, phi: &[u128], x: &[u128]) -> u128 {
    let t = x_mod.exponent();
    if t == 0 {
        return 0;
    }
    let m = Modulus::new(x_mod.p, t).expect("exponent within range");
    let mut acc = 0u128;
    for j in 0..x_mod.rank() {
        acc = m.add(acc, m.mul(phi[j] % m.value, x[j] % m.value));
    }
    acc
}

fn sample_elements(x: &FiniteLevelModule, seed: u64) -> (String, Vec<Vec<u128>>) {
    match x.order() {
        Some(order) if order <= EXHAUSTIVE_LIMIT => ("exhaustive".into(), x.enumerate_elements()),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let caps: Vec<u128> = x.divisors.iter().map(|&e| (x.p as u128).pow(e)).collect();
            let elements = (0..SAMPLE_SIZE)
                .map(|_| caps.iter().map(|&c| rng.gen_range(0..c)).collect())
                .collect();
            ("sampled".into(), elements)
        }
    }
}

fn naturality_for_pair(
    fine: &FiniteLevelModule,
    coarse: &FiniteLevelModule,
    homs: &HomSpace,
    seed: u64,
) -> Result<(NaturalityReport, Vec<String>)> {
    let norm = norm_morphism(coarse, fine)?;
    let projection = projection_morphism(fine, coarse)?;
    let square = verify_eta_natural(homs, &norm, &projection)?;
    let mut failures = Vec::new();
    if !square.natural {
        failures.push(format!(
            "naturality square fails between levels {} and {}",
            fine.level, coarse.level
        ));
    }
    // pointwise cross-check of the same square on explicit elements:
    // eta_V(h)(N x) = p^{t_V - t_U} eta_U(rho h)(x) in Z/p^{t_V}
    let (mode, elements) = sample_elements(coarse, seed);
    let t_fine = fine.exponent();
    let t_coarse = coarse.exponent();
    let renorm = (coarse.p as u128).pow(t_fine - t_coarse);
    let m_fine = Modulus::new(fine.p, t_fine.max(1)).expect("exponent within range");
    let mut pointwise_ok = true;
    let mut witness: Option<String> = None;
    for (g, h) in homs.generators.iter().enumerate() {
        let rho_h = rho(h, &projection)?;
        let phi_coarse = eta(&rho_h);
        let phi_fine = eta(h);
        for x in &elements {
            let lhs = m_fine.reduce_u128(pair(coarse, &phi_coarse, x) * renorm);
            let rhs = pair(fine, &phi_fine, &norm.apply(x));
            if lhs != rhs {
                pointwise_ok = false;
                witness.get_or_insert_with(|| {
                    format!(
                        "generator {g}, element {x:?}: eta(rho h)(x) scales to {lhs} \
                         but eta(h)(Nx) = {rhs}"
                    )
                });
            }
        }
    }
    if let Some(w) = witness {
        failures.push(format!(
            "pointwise naturality disagreement between levels {} and {} ({w})",
            fine.level, coarse.level
        ));
    }
    Ok((
        NaturalityReport {
            coarse_level: coarse.level.0.clone(),
            fine_level: fine.level.0.clone(),
            generators_checked: homs.generators.len(),
            square_commutes: square.natural,
            pointwise_mode: mode,
            pointwise_elements: elements.len(),
            pointwise_ok,
        },
        failures,
    ))
}

fn is_small_nonneg_integer(x: &num_rational::BigRational) -> Option<u32> {
    if !x.is_integer() || x.is_negative() {
        return None;
    }
    x.to_integer().to_u32()
}

pub fn run_verify(name: &str, m: &ModulePresentation, opts: &VerifyOptions) -> Result<Report> {
    let mut failures: Vec<String> = Vec::new();

    let cert = is_scf(m, &opts.max_level);
    let hypothesis = Hypothesis {
        per_level: cert
            .per_level
            .iter()
            .map(|l| HypothesisLevel {
                level: l.level.0.clone(),
                rank: l.rank,
                required: l.required,
                finite: l.finite,
            })
            .collect(),
        systematically_finite: cert.verdict,
    };
    let parameters = Parameters {
        max_level: opts.max_level.0.clone(),
        seed: opts.seed,
        checks: opts.checks.enabled_names(),
    };
    if !cert.verdict {
        for l in &cert.per_level {
            if !l.finite {
                failures.push(format!(
                    "infinite coinvariants at level {} (rank {} of {})",
                    l.level, l.rank, l.required
                ));
            }
        }
        return Ok(Report {
            module: identity(name, m),
            parameters,
            hypothesis,
            levels: None,
            naturality: None,
            limit: None,
            d1: None,
            failures,
            verdict: VERDICT_HYPOTHESIS.into(),
        });
    }

    let levels = levels_up_to(&opts.max_level);
    let modules = coinvariants_tower(m, &levels, opts.precision)?;
    let homs: Vec<HomSpace> = modules.iter().map(hom_space).collect::<Result<_>>()?;

    let mut level_reports = Vec::with_capacity(modules.len());
    for (x, h) in modules.iter().zip(&homs) {
        let duality = if opts.checks.duality {
            let rep = duality_check(x)?;
            let mut hom_divisors = h.orders.clone();
            hom_divisors.sort_unstable();
            let divisors_match = hom_divisors == x.divisors;
            if !(rep.bijective && divisors_match) {
                failures.push(format!(
                    "duality fails at level {}: |Hom| = p^{}, |M| = p^{}, |ker eta| = p^{}",
                    x.level, rep.hom_log_order, rep.dual_log_order, rep.eta_kernel_log_order
                ));
            }
            Some(DualityLevel {
                hom_log_order: rep.hom_log_order,
                dual_log_order: rep.dual_log_order,
                eta_kernel_log_order: rep.eta_kernel_log_order,
                hom_generator_orders: hom_divisors,
                divisors_match,
                bijective: rep.bijective,
            })
        } else {
            None
        };
        level_reports.push(LevelReport {
            level: x.level.0.clone(),
            divisors: x.divisors.clone(),
            duality,
        });
    }

    let naturality = if opts.checks.naturality {
        let mut pairs = Vec::new();
        for (i, coarse) in modules.iter().enumerate() {
            for (j, fine) in modules.iter().enumerate() {
                if i == j || !coarse.level.le(&fine.level) {
                    continue;
                }
                let (rep, errs) = naturality_for_pair(fine, coarse, &homs[j], opts.seed)?;
                failures.extend(errs);
                pairs.push(rep);
            }
        }
        Some(pairs)
    } else {
        None
    };

    let diag_bound = opts.max_level.0.iter().copied().min().unwrap_or(0);
    let limit = if opts.checks.colimit {
        let chain = diagonal_chain(m.d, diag_bound);
        let system = build_direct_system(m, &chain, opts.precision)?;
        let col = colimit_analysis(&system)?;
        let pn = pseudo_null_verdict(m, diag_bound, opts.precision)?;
        if !pn.consistent {
            failures.push(
                "colimit evidence disagrees with the bounded-order criterion".into(),
            );
        }
        Some(LimitReport {
            levels: col.levels.iter().map(|l| l.0.clone()).collect(),
            per_step_image_divisors: col.per_step_image_divisors,
            stabilized_image_divisors: col.stabilized_image_divisors,
            zero_through_bound: col.zero_through_bound,
            pseudo_null: PseudoNull {
                colimit_zero: pn.colimit_zero,
                d1_bounded_orders: pn.d1_bounded_orders,
                consistent: pn.consistent,
            },
        })
    } else {
        None
    };

    let d1 = if m.d == 1 && (opts.checks.growth || opts.checks.char) {
        let bound = diag_bound;
        let growth = if opts.checks.growth && bound >= 2 {
            Some(growth_invariants(m, bound, opts.precision)?)
        } else {
            None
        };
        let fitted = growth.as_ref().and_then(|g| {
            if g.residual.is_zero() {
                Some((is_small_nonneg_integer(&g.mu)?, is_small_nonneg_integer(&g.lambda)?))
            } else {
                None
            }
        });
        let char_data = if opts.checks.char && m.is_square() {
            Some(char_from_square_presentation(m)?)
        } else {
            None
        };
        let char_iota_data = match &char_data {
            Some(c) => Some(char_iota(c)?),
            None => None,
        };
        let growth_matches_char = match (&char_data, &growth) {
            (Some(c), Some(g)) => {
                let matches = cross_check_growth(c, g);
                // a fit taken before the tower reaches its asymptotic
                // shape is reported but not held against the verdict
                if !matches && fitted.is_some() {
                    failures.push(format!(
                        "growth fit (mu, lambda) = ({}, {}) contradicts char ({}, {})",
                        g.mu, g.lambda, c.mu, c.lambda
                    ));
                }
                Some(matches)
            }
            _ => None,
        };
        let dual_pseudo = if opts.checks.char && m.is_square() {
            let rep = dual_pseudo_order_check(m, bound)?;
            if !rep.pass {
                failures.push("iota twist changes coinvariant orders".into());
            }
            Some(DualPseudo {
                generator: rep.generator.to_string(),
                iota_generator: rep.iota_generator.to_string(),
                module_orders: rep.module_orders,
                iota_orders: rep.iota_orders,
                pass: rep.pass,
            })
        } else {
            None
        };
        let adjoint = if opts.checks.colimit {
            Some(adjoint_divisors(m, bound, opts.precision)?)
        } else {
            None
        };
        let to_char = |c: &iwalab_core::char_invariants::CharIdealData| CharData {
            generator: c.generator.to_string(),
            mu: c.mu,
            lambda: c.lambda,
            distinguished: c.distinguished.to_string(),
        };
        Some(D1Report {
            growth: growth.map(|g| {
                let pre_asymptotic = fitted.is_none();
                Growth {
                    orders: g.orders,
                    mu: g.mu.to_string(),
                    lambda: g.lambda.to_string(),
                    nu: g.nu.to_string(),
                    residual: g.residual.to_string(),
                    pre_asymptotic,
                }
            }),
            char_data: char_data.as_ref().map(to_char),
            char_iota: char_iota_data.as_ref().map(to_char),
            growth_matches_char,
            dual_pseudo,
            adjoint_divisors: adjoint,
        })
    } else {
        None
    };

    let verdict = if failures.is_empty() {
        VERDICT_PASS
    } else {
        VERDICT_FAIL
    };
    Ok(Report {
        module: identity(name, m),
        parameters,
        hypothesis,
        levels: Some(level_reports),
        naturality,
        limit,
        d1,
        failures,
        verdict: verdict.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog_module;

    fn opts(levels: Vec<u32>) -> VerifyOptions {
        VerifyOptions {
            max_level: LevelVector(levels),
            precision: 4,
            seed: 0,
            checks: Checks::all(),
        }
    }

    #[test]
    fn t_minus_p_passes() {
        let m = catalog_module("lambda-mod-t-minus-p", 3).unwrap();
        let r = run_verify("lambda-mod-t-minus-p", &m, &opts(vec![2])).unwrap();
        assert_eq!(r.verdict, VERDICT_PASS, "failures: {:?}", r.failures);
        let d1 = r.d1.unwrap();
        assert_eq!(d1.char_data.as_ref().unwrap().mu, 0);
        assert_eq!(d1.char_data.as_ref().unwrap().lambda, 1);
        assert_eq!(d1.growth_matches_char, Some(true));
    }

    #[test]
    fn w1_reports_hypothesis_failure() {
        let m = catalog_module("lambda-mod-w1", 2).unwrap();
        let r = run_verify("lambda-mod-w1", &m, &opts(vec![1])).unwrap();
        assert_eq!(r.verdict, VERDICT_HYPOTHESIS);
        assert!(r.levels.is_none());
        assert!(!r.hypothesis.systematically_finite);
    }

    #[test]
    fn zero_module_passes_trivially() {
        let m = catalog_module("zero-module", 2).unwrap();
        let r = run_verify("zero-module", &m, &opts(vec![2])).unwrap();
        assert_eq!(r.verdict, VERDICT_PASS, "failures: {:?}", r.failures);
    }

    #[test]
    fn check_gating_prunes_sections() {
        let m = catalog_module("lambda-mod-p", 2).unwrap();
        let mut o = opts(vec![2]);
        o.checks = Checks {
            duality: true,
            ..Checks::none()
        };
        let r = run_verify("lambda-mod-p", &m, &o).unwrap();
        assert!(r.naturality.is_none());
        assert!(r.limit.is_none());
        assert!(r.d1.is_none());
        assert_eq!(r.verdict, VERDICT_PASS);
    }
}
