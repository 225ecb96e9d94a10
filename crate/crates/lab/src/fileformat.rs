//! JSON module-description files.
//!
//! ```json
//! {
//!   "p": 3,
//!   "d": 1,
//!   "name": "my-module",
//!   "presentation": [
//!     [ [[ -3, 1 ], [ 1, 0 ]] ]
//!   ]
//! }
//! ```
//!
//! Each polynomial is a list of `[coefficient, e_1, ..., e_d]` tuples;
//! coefficients may be JSON integers or decimal strings (for values beyond
//! the double-precision-safe range).

use num_bigint::BigInt;
use serde_json::Value;

use iwalab_core::lambda_poly::LambdaPolynomial;
use iwalab_core::module_core::ModulePresentation;

#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for InputError {}

fn err<T>(msg: impl Into<String>) -> Result<T, InputError> {
    Err(InputError(msg.into()))
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= p {
        if p % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

fn parse_bigint(v: &Value, at: &str) -> Result<BigInt, InputError> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else {
                err(format!("{at}: coefficient is not an integer"))
            }
        }
        Value::String(s) => s
            .parse::<BigInt>()
            .map_err(|_| InputError(format!("{at}: cannot parse integer string {s:?}"))),
        _ => err(format!("{at}: expected an integer or integer string")),
    }
}

fn parse_u64(v: &Value, at: &str) -> Result<u64, InputError> {
    v.as_u64()
        .ok_or_else(|| InputError(format!("{at}: expected a nonnegative integer")))
}

#[derive(Debug)]
pub struct ModuleFile {
    pub name: Option<String>,
    pub presentation: ModulePresentation,
}

pub fn parse_module_file(text: &str) -> Result<ModuleFile, InputError> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| InputError(format!("invalid JSON: {e}")))?;
    let obj = root
        .as_object()
        .ok_or_else(|| InputError("top level must be an object".into()))?;
    let p = parse_u64(obj.get("p").ok_or_else(|| InputError("missing field \"p\"".into()))?, "p")?;
    if !is_prime(p) {
        return err(format!("p = {p} is not prime"));
    }
    let d = parse_u64(obj.get("d").ok_or_else(|| InputError("missing field \"d\"".into()))?, "d")?
        as usize;
    if d == 0 || d > 4 {
        return err(format!("d = {d} out of the supported range 1..=4"));
    }
    let name = obj.get("name").and_then(|v| v.as_str()).map(String::from);
    let pres = obj
        .get("presentation")
        .ok_or_else(|| InputError("missing field \"presentation\"".into()))?
        .as_array()
        .ok_or_else(|| InputError("presentation must be an array of rows".into()))?;
    let mut rows = Vec::with_capacity(pres.len());
    for (i, row) in pres.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| InputError(format!("presentation[{i}] must be an array")))?;
        let mut out_row = Vec::with_capacity(row.len());
        for (j, poly) in row.iter().enumerate() {
            let at = format!("presentation[{i}][{j}]");
            let terms = poly
                .as_array()
                .ok_or_else(|| InputError(format!("{at} must be an array of terms")))?;
            let mut out = LambdaPolynomial::zero(p, d);
            for (k, term) in terms.iter().enumerate() {
                let at = format!("{at}[{k}]");
                let tuple = term
                    .as_array()
                    .ok_or_else(|| InputError(format!("{at} must be [coeff, e_1..e_d]")))?;
                if tuple.len() != d + 1 {
                    return err(format!(
                        "{at}: expected {} entries (coefficient plus {d} exponents), got {}",
                        d + 1,
                        tuple.len()
                    ));
                }
                let coeff = parse_bigint(&tuple[0], &at)?;
                let mut exps = Vec::with_capacity(d);
                for e in &tuple[1..] {
                    let v = parse_u64(e, &at)?;
                    if v > 10_000 {
                        return err(format!("{at}: exponent {v} is unreasonably large"));
                    }
                    exps.push(v as u32);
                }
                out = out.add(&LambdaPolynomial::monomial(p, d, exps, coeff));
            }
            out_row.push(out);
        }
        rows.push(out_row);
    }
    let presentation = ModulePresentation::new(p, d, rows)
        .map_err(|e| InputError(format!("invalid presentation: {e}")))?;
    Ok(ModuleFile { name, presentation })
}

/// Serialize a polynomial back to the tuple form used in module files.
pub fn poly_to_json(f: &LambdaPolynomial) -> Value {
    let terms: Vec<Value> = f
        .terms()
        .map(|(e, c)| {
            let mut tuple = vec![Value::String(c.to_string())];
            tuple.extend(e.iter().map(|&x| Value::from(x)));
            Value::Array(tuple)
        })
        .collect();
    Value::Array(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_valid_file() {
        let f = parse_module_file(
            r#"{"p": 3, "d": 1, "name": "tm3",
                "presentation": [[[[-3, 0], [1, 1]]]]}"#,
        )
        .unwrap();
        assert_eq!(f.name.as_deref(), Some("tm3"));
        assert_eq!(f.presentation.generators, 1);
        assert_eq!(f.presentation.relations, 1);
        assert_eq!(
            f.presentation.entry(0, 0).coefficient(&[1]),
            BigInt::from(1)
        );
    }

    #[test]
    fn parses_string_coefficients() {
        let f = parse_module_file(
            r#"{"p": 2, "d": 1,
                "presentation": [[[["18446744073709551617", 0]]]]}"#,
        )
        .unwrap();
        assert_eq!(
            f.presentation.entry(0, 0).coefficient(&[0]).to_string(),
            "18446744073709551617"
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_module_file("{").is_err());
        assert!(parse_module_file(r#"{"p": 4, "d": 1, "presentation": []}"#).is_err());
        // exponent tuple of the wrong length
        let e = parse_module_file(
            r#"{"p": 2, "d": 2, "presentation": [[[[1, 0]]]]}"#,
        )
        .unwrap_err();
        assert!(e.0.contains("presentation[0][0][0]"), "{}", e.0);
    }
}
