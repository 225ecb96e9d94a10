//! Serializable verification reports. Field order is fixed by the struct
//! declarations, so `serde_json::to_string_pretty` is deterministic.

use serde::Serialize;

#[derive(Serialize)]
pub struct Report {
    pub module: ModuleIdentity,
    pub parameters: Parameters,
    pub hypothesis: Hypothesis,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<LevelReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub naturality: Option<Vec<NaturalityReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<LimitReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d1: Option<D1Report>,
    pub failures: Vec<String>,
    pub verdict: String,
}

#[derive(Serialize)]
pub struct ModuleIdentity {
    pub name: String,
    pub p: u64,
    pub d: usize,
    pub generators: usize,
    pub relations: usize,
    pub presentation: Vec<Vec<String>>,
}

#[derive(Serialize)]
pub struct Parameters {
    pub max_level: Vec<u32>,
    pub seed: u64,
    pub checks: Vec<String>,
}

#[derive(Serialize)]
pub struct Hypothesis {
    pub per_level: Vec<HypothesisLevel>,
    pub systematically_finite: bool,
}

#[derive(Serialize)]
pub struct HypothesisLevel {
    pub level: Vec<u32>,
    pub rank: usize,
    pub required: usize,
    pub finite: bool,
}

#[derive(Serialize)]
pub struct LevelReport {
    pub level: Vec<u32>,
    pub divisors: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duality: Option<DualityLevel>,
}

#[derive(Serialize)]
pub struct DualityLevel {
    pub hom_log_order: u64,
    pub dual_log_order: u64,
    pub eta_kernel_log_order: u64,
    pub hom_generator_orders: Vec<u32>,
    pub divisors_match: bool,
    pub bijective: bool,
}

#[derive(Serialize)]
pub struct NaturalityReport {
    pub coarse_level: Vec<u32>,
    pub fine_level: Vec<u32>,
    pub generators_checked: usize,
    pub square_commutes: bool,
    pub pointwise_mode: String,
    pub pointwise_elements: usize,
    pub pointwise_ok: bool,
}

#[derive(Serialize)]
pub struct LimitReport {
    pub levels: Vec<Vec<u32>>,
    pub per_step_image_divisors: Vec<Vec<u32>>,
    pub stabilized_image_divisors: Vec<Vec<u32>>,
    pub zero_through_bound: bool,
    pub pseudo_null: PseudoNull,
}

#[derive(Serialize)]
pub struct PseudoNull {
    pub colimit_zero: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d1_bounded_orders: Option<bool>,
    pub consistent: bool,
}

#[derive(Serialize)]
pub struct D1Report {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth: Option<Growth>,
    #[serde(rename = "char", skip_serializing_if = "Option::is_none")]
    pub char_data: Option<CharData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub char_iota: Option<CharData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_matches_char: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_pseudo: Option<DualPseudo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjoint_divisors: Option<Vec<Vec<u32>>>,
}

#[derive(Serialize)]
pub struct Growth {
    pub orders: Vec<u64>,
    pub mu: String,
    pub lambda: String,
    pub nu: String,
    pub residual: String,
    pub pre_asymptotic: bool,
}

#[derive(Serialize)]
pub struct CharData {
    pub generator: String,
    pub mu: u32,
    pub lambda: u32,
    pub distinguished: String,
}

#[derive(Serialize)]
pub struct DualPseudo {
    pub generator: String,
    pub iota_generator: String,
    pub module_orders: Vec<Option<u64>>,
    pub iota_orders: Vec<Option<u64>>,
    pub pass: bool,
}

pub fn to_json(r: &Report) -> String {
    serde_json::to_string_pretty(r).expect("report serialization cannot fail")
}

fn level_str(l: &[u32]) -> String {
    format!(
        "({})",
        l.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
    )
}

fn divisor_str(d: &[u32]) -> String {
    if d.is_empty() {
        "trivial".into()
    } else {
        d.iter()
            .map(|e| format!("p^{e}"))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

pub fn to_text(r: &Report) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    line(format!(
        "module {} (p = {}, d = {}, {} generators, {} relations)",
        r.module.name, r.module.p, r.module.d, r.module.generators, r.module.relations
    ));
    for row in &r.module.presentation {
        line(format!("  [ {} ]", row.join(" | ")));
    }
    line(format!(
        "max level {}, seed {}, checks: {}",
        level_str(&r.parameters.max_level),
        r.parameters.seed,
        r.parameters.checks.join(",")
    ));
    line(String::new());
    line("hypothesis: finite coinvariants at every level".into());
    for l in &r.hypothesis.per_level {
        line(format!(
            "  level {:8} rank {}/{}  {}",
            level_str(&l.level),
            l.rank,
            l.required,
            if l.finite { "finite" } else { "INFINITE" }
        ));
    }
    line(format!(
        "  verdict: {}",
        if r.hypothesis.systematically_finite {
            "holds through the horizon"
        } else {
            "FAILS"
        }
    ));
    if let Some(levels) = &r.levels {
        line(String::new());
        line("finite levels".into());
        for l in levels {
            let mut row = format!(
                "  level {:8} M = {}",
                level_str(&l.level),
                divisor_str(&l.divisors)
            );
            if let Some(d) = &l.duality {
                row.push_str(&format!(
                    "  |Hom| = p^{}, |M| = p^{}, ker eta = p^{}  {}",
                    d.hom_log_order,
                    d.dual_log_order,
                    d.eta_kernel_log_order,
                    if d.bijective && d.divisors_match {
                        "eta bijective"
                    } else {
                        "ETA FAILS"
                    }
                ));
            }
            line(row);
        }
    }
    if let Some(pairs) = &r.naturality {
        line(String::new());
        line("naturality of eta along the tower".into());
        for n in pairs {
            line(format!(
                "  {} -> {}: {} generators, square {}, {} on {} elements {}",
                level_str(&n.fine_level),
                level_str(&n.coarse_level),
                n.generators_checked,
                if n.square_commutes { "commutes" } else { "FAILS" },
                n.pointwise_mode,
                n.pointwise_elements,
                if n.pointwise_ok { "agree" } else { "DISAGREE" }
            ));
        }
    }
    if let Some(l) = &r.limit {
        line(String::new());
        line("direct system along the diagonal chain".into());
        for (j, lev) in l.levels.iter().enumerate() {
            line(format!(
                "  level {:8} image below = {}, stable image above = {}",
                level_str(lev),
                divisor_str(&l.per_step_image_divisors[j]),
                divisor_str(&l.stabilized_image_divisors[j])
            ));
        }
        line(format!(
            "  colimit zero through horizon: {}",
            l.zero_through_bound
        ));
        let pn = &l.pseudo_null;
        line(format!(
            "  pseudo-null evidence: colimit_zero = {}, bounded orders = {}, consistent = {}",
            pn.colimit_zero,
            pn.d1_bounded_orders
                .map(|b| b.to_string())
                .unwrap_or_else(|| "n/a".into()),
            pn.consistent
        ));
    }
    if let Some(d1) = &r.d1 {
        line(String::new());
        line("d = 1 invariants".into());
        if let Some(g) = &d1.growth {
            line(format!(
                "  orders: {:?}  fit mu = {}, lambda = {}, nu = {}, residual = {}{}",
                g.orders,
                g.mu,
                g.lambda,
                g.nu,
                g.residual,
                if g.pre_asymptotic { " (pre-asymptotic)" } else { "" }
            ));
        }
        if let Some(c) = &d1.char_data {
            line(format!(
                "  char: ({})  mu = {}, lambda = {}, distinguished part {}",
                c.generator, c.mu, c.lambda, c.distinguished
            ));
        }
        if let Some(c) = &d1.char_iota {
            line(format!(
                "  char of iota twist: ({})  mu = {}, lambda = {}, distinguished part {}",
                c.generator, c.mu, c.lambda, c.distinguished
            ));
        }
        if let Some(b) = d1.growth_matches_char {
            line(format!("  growth matches char invariants: {b}"));
        }
        if let Some(dp) = &d1.dual_pseudo {
            let fmt = |v: &[Option<u64>]| {
                v.iter()
                    .map(|o| o.map(|x| x.to_string()).unwrap_or_else(|| "inf".into()))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            line(format!(
                "  order comparison with iota twist: [{}] vs [{}]  {}",
                fmt(&dp.module_orders),
                fmt(&dp.iota_orders),
                if dp.pass { "equal" } else { "UNEQUAL" }
            ));
        }
        if let Some(adj) = &d1.adjoint_divisors {
            for (n, d) in adj.iter().enumerate() {
                line(format!("  adjoint shadow at horizon {n}: {}", divisor_str(d)));
            }
        }
    }
    line(String::new());
    for f in &r.failures {
        line(format!("failure: {f}"));
    }
    line(format!("verdict: {}", r.verdict));
    out
}
