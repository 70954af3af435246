//! JSON readers and writers.
//!
//! Formats:
//!
//! * distribution: `{"probs": [...]}`
//! * reference: `{"weights": [...]}` or `{"energies": [...], "beta": x}`
//! * density matrix: `{"dims": [dA, dB], "re": [[...]], "im": [[...]]}`
//!   (`dims` and `im` optional)
//!
//! Decimal input is parsed with correct rounding. Every real written out has
//! 17 significant digits; non-finite values are written as the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::qstates::DensityMatrix;
use crate::spectra::{GibbsSpec, ProbVec};

/// A real at 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// A real as a JSON value: a 17-digit number, or a string when non-finite.
pub fn real(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&format_real(x)).expect("valid literal"))
    } else {
        Value::String(format_real(x))
    }
}

/// `serialize_with` helper for fields that may hold non-finite values.
pub fn serialize_real<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    real(*x).serialize(s)
}

fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => real(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, normalize(v))).collect())
        }
        other => other,
    }
}

/// Serializes `value` with every real rewritten at 17 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<Value> {
    let v = serde_json::to_value(value).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(normalize(v))
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(&to_json(value)?).map_err(|e| Error::Internal(e.to_string()))
}

fn parse_value(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Parse(format!("missing field `{key}`")))
}

fn as_object(v: &Value) -> Result<&Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::Parse("expected a JSON object".into()))
}

fn as_real(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("`{n}` is not a real number"))),
        Value::String(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            _ => Err(Error::Parse(format!("`{s}` is not a real number"))),
        },
        other => Err(Error::Parse(format!("expected a number, found {other}"))),
    }
}

fn as_reals(v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| Error::Parse("expected an array of numbers".into()))?
        .iter()
        .map(as_real)
        .collect()
}

fn as_rows(v: &Value) -> Result<Vec<Vec<f64>>> {
    v.as_array()
        .ok_or_else(|| Error::Parse("expected an array of rows".into()))?
        .iter()
        .map(as_reals)
        .collect()
}

pub fn prob_vec_from_json(v: &Value) -> Result<ProbVec> {
    ProbVec::new(as_reals(field(as_object(v)?, "probs")?)?)
}

pub fn parse_prob_vec(text: &str) -> Result<ProbVec> {
    prob_vec_from_json(&parse_value(text)?)
}

pub fn prob_vec_to_json(p: &ProbVec) -> Value {
    let mut m = Map::new();
    m.insert(
        "probs".into(),
        Value::Array(p.as_slice().iter().map(|&x| real(x)).collect()),
    );
    Value::Object(m)
}

pub fn gibbs_from_json(v: &Value) -> Result<GibbsSpec> {
    let obj = as_object(v)?;
    match (obj.get("weights"), obj.get("energies")) {
        (Some(w), None) => GibbsSpec::from_weights(as_reals(w)?),
        (None, Some(e)) => GibbsSpec::from_energies(&as_reals(e)?, as_real(field(obj, "beta")?)?),
        (Some(_), Some(_)) => Err(Error::Parse(
            "give either `weights` or `energies`, not both".into(),
        )),
        (None, None) => Err(Error::Parse("missing field `weights` or `energies`".into())),
    }
}

pub fn parse_gibbs(text: &str) -> Result<GibbsSpec> {
    gibbs_from_json(&parse_value(text)?)
}

pub fn gibbs_to_json(g: &GibbsSpec) -> Value {
    let mut m = Map::new();
    m.insert(
        "weights".into(),
        Value::Array(g.weights().as_slice().iter().map(|&x| real(x)).collect()),
    );
    Value::Object(m)
}

pub fn density_from_json(v: &Value) -> Result<DensityMatrix> {
    let obj = as_object(v)?;
    let re = as_rows(field(obj, "re")?)?;
    let im = match obj.get("im") {
        Some(v) => as_rows(v)?,
        None => re.iter().map(|r| vec![0.0; r.len()]).collect(),
    };
    let dims = match obj.get("dims") {
        None | Some(Value::Null) => None,
        Some(d) => {
            let d = d
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::Parse("`dims` must be [dA, dB]".into()))?;
            let get = |k: usize| {
                d[k].as_u64()
                    .map(|x| x as usize)
                    .ok_or_else(|| Error::Parse("`dims` entries must be positive integers".into()))
            };
            Some((get(0)?, get(1)?))
        }
    };
    DensityMatrix::from_parts(&re, &im, dims)
}

pub fn parse_density(text: &str) -> Result<DensityMatrix> {
    density_from_json(&parse_value(text)?)
}

pub fn density_to_json(rho: &DensityMatrix) -> Value {
    let n = rho.dim();
    let rows = |f: &dyn Fn(usize, usize) -> f64| -> Value {
        Value::Array(
            (0..n)
                .map(|i| Value::Array((0..n).map(|j| real(f(i, j))).collect()))
                .collect(),
        )
    };
    let mut m = Map::new();
    if let Some((a, b)) = rho.dims() {
        m.insert("dims".into(), Value::Array(vec![a.into(), b.into()]));
    }
    m.insert("re".into(), rows(&|i, j| rho.get(i, j).re));
    m.insert("im".into(), rows(&|i, j| rho.get(i, j).im));
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_have_seventeen_digits() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(format_real(1.0), "1.0000000000000000e0");
        assert_eq!(format_real(f64::INFINITY), "inf");
        assert_eq!(real(0.25).to_string(), "2.5000000000000000e-1");
        assert_eq!(real(f64::NEG_INFINITY), Value::String("-inf".into()));
    }

    #[test]
    fn prob_vec_round_trip_is_bit_exact() {
        let p = ProbVec::new(vec![0.84, 0.10, 0.06]).unwrap();
        let text = prob_vec_to_json(&p).to_string();
        let back = parse_prob_vec(&text).unwrap();
        assert_eq!(back, p);
        let q = ProbVec::new(vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert_eq!(
            parse_prob_vec(&prob_vec_to_json(&q).to_string()).unwrap(),
            q
        );
    }

    #[test]
    fn prob_vec_errors() {
        assert!(matches!(
            parse_prob_vec("{\"probs\":[0.5,0.6]}"),
            Err(Error::NotNormalized(_))
        ));
        assert!(matches!(
            parse_prob_vec("{\"p\":[1]}"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(parse_prob_vec("not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn gibbs_formats() {
        let g = parse_gibbs("{\"energies\":[0,1,2],\"beta\":0}").unwrap();
        assert!(g.is_uniform());
        let g = parse_gibbs("{\"weights\":[0.25,0.75]}").unwrap();
        assert_eq!(parse_gibbs(&gibbs_to_json(&g).to_string()).unwrap(), g);
        assert!(parse_gibbs("{\"weights\":[1,0]}").is_err());
        assert!(parse_gibbs("{\"energies\":[0,1]}").is_err());
    }

    #[test]
    fn density_round_trip() {
        let text = r#"{"dims":[2,2],"re":[[0.5,0,0,0.5],[0,0,0,0],[0,0,0,0],[0.5,0,0,0.5]]}"#;
        let rho = parse_density(text).unwrap();
        assert_eq!(rho.dims(), Some((2, 2)));
        let back = parse_density(&density_to_json(&rho).to_string()).unwrap();
        assert_eq!(back, rho);
        assert!(parse_density(r#"{"re":[[1,0],[0,0]],"dims":[3,1]}"#).is_err());
    }

    #[test]
    fn serialized_structs_use_long_form() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            #[serde(serialize_with = "serialize_real")]
            b: f64,
            n: u32,
        }
        let v = to_json(&S {
            a: 0.5,
            b: f64::INFINITY,
            n: 3,
        })
        .unwrap();
        assert_eq!(
            v.to_string(),
            r#"{"a":5.0000000000000000e-1,"b":"inf","n":3}"#
        );
    }
}
