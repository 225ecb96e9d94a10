//! Built-in module catalog, parameterized by the prime.

use num_bigint::BigInt;

use iwalab_core::lambda_poly::{w_poly, LambdaPolynomial};
use iwalab_core::module_core::ModulePresentation;

pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "lambda-mod-p",
        description: "Lambda/(p): mu = 1, lambda = 0; orders grow like p^(p^n)",
    },
    CatalogEntry {
        name: "lambda-mod-p2",
        description: "Lambda/(p^2): mu = 2, lambda = 0",
    },
    CatalogEntry {
        name: "lambda-mod-t-minus-p",
        description: "Lambda/(T - p): mu = 0, lambda = 1; coinvariants Z/p^(n+1)",
    },
    CatalogEntry {
        name: "lambda-mod-p-t-minus-p",
        description: "Lambda/(p(T - p)): mu = 1, lambda = 1",
    },
    CatalogEntry {
        name: "lambda-mod-w1",
        description: "Lambda/(w_1): coinvariants infinite at every level (hypothesis failure)",
    },
    CatalogEntry {
        name: "lambda-mod-p-t",
        description: "Lambda/(p, T): pseudo-null; constant order p along the tower",
    },
    CatalogEntry {
        name: "pseudo-null-d2",
        description: "Lambda_2/(p, T_1): pseudo-null over the two-variable algebra",
    },
    CatalogEntry {
        name: "counterexample-d2",
        description: "Lambda_2/(T_1, T_2): not coinvariant-finite at any level",
    },
    CatalogEntry {
        name: "zero-module",
        description: "the zero module (degenerate base case)",
    },
];

pub fn catalog_list() -> String {
    let width = CATALOG.iter().map(|e| e.name.len()).max().unwrap_or(0);
    CATALOG
        .iter()
        .map(|e| format!("{:width$}  {}", e.name, e.description))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn catalog_module(name: &str, p: u64) -> Option<ModulePresentation> {
    let big_p = BigInt::from(p);
    let t_minus_p = |d: usize, i: usize| {
        LambdaPolynomial::variable(p, d, i).sub(&LambdaPolynomial::constant(p, d, big_p.clone()))
    };
    let pres = |d: usize, rows: Vec<Vec<LambdaPolynomial>>| {
        Some(ModulePresentation::new(p, d, rows).expect("catalog presentations are well-formed"))
    };
    match name {
        "lambda-mod-p" => pres(1, vec![vec![LambdaPolynomial::constant(p, 1, big_p)]]),
        "lambda-mod-p2" => pres(1, vec![vec![LambdaPolynomial::constant(p, 1, &big_p * &big_p)]]),
        "lambda-mod-t-minus-p" => pres(1, vec![vec![t_minus_p(1, 0)]]),
        "lambda-mod-p-t-minus-p" => pres(1, vec![vec![t_minus_p(1, 0).scale(&big_p)]]),
        "lambda-mod-w1" => pres(1, vec![vec![w_poly(p, 1, 0, 1)]]),
        "lambda-mod-p-t" => pres(
            1,
            vec![vec![
                LambdaPolynomial::constant(p, 1, big_p),
                LambdaPolynomial::variable(p, 1, 0),
            ]],
        ),
        "pseudo-null-d2" => pres(
            2,
            vec![vec![
                LambdaPolynomial::constant(p, 2, big_p),
                LambdaPolynomial::variable(p, 2, 0),
            ]],
        ),
        "counterexample-d2" => pres(
            2,
            vec![vec![
                LambdaPolynomial::variable(p, 2, 0),
                LambdaPolynomial::variable(p, 2, 1),
            ]],
        ),
        "zero-module" => Some(ModulePresentation::zero_module(p, 1)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_instantiates() {
        for e in CATALOG {
            for p in [2, 3, 5] {
                assert!(catalog_module(e.name, p).is_some(), "{} at p={p}", e.name);
            }
        }
        assert!(catalog_module("no-such-module", 2).is_none());
    }

    #[test]
    fn listing_mentions_every_name() {
        let listing = catalog_list();
        for e in CATALOG {
            assert!(listing.contains(e.name));
        }
    }
}
