//! Parameter-file ingestion: system and target descriptions as JSON.

use num_bigint::BigUint;
use num_rational::BigRational;
use sadic::realize::{ExpTarget, OdoSpec, TargetSpec};
use sadic::word::{Alphabet, SadicSystem, Substitution, TauParams, TauSource, Word};
use serde_json::Value;
use std::collections::BTreeMap;
use std::str::FromStr;

pub fn parse_system(text: &str) -> Result<SadicSystem, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = v.as_object().ok_or("top level must be an object")?;

    let pi_val = obj.get("pi").ok_or("missing \"pi\"")?;
    let images: Vec<String> = match pi_val {
        Value::Array(a) if a.len() == 2 => a
            .iter()
            .map(|x| x.as_str().map(str::to_owned).ok_or("pi images must be strings"))
            .collect::<Result<_, _>>()?,
        _ => return Err("\"pi\" must be an array of two image strings".into()),
    };

    // Display alphabet: the distinct characters of the images, in first-use order.
    let mut chars: Vec<char> = Vec::new();
    for img in &images {
        for c in img.chars() {
            if !chars.contains(&c) {
                chars.push(c);
            }
        }
    }
    let alphabet = Alphabet::new(chars);
    let words: Vec<Word> = images
        .iter()
        .map(|s| alphabet.parse(s).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let pi = Substitution::new(words).map_err(|e| e.to_string())?;

    let taus = if let Some(rule) = obj.get("rule") {
        let r = rule.as_object().ok_or("\"rule\" must be an object")?;
        let omega1 = parse_triple(r.get("omega1").ok_or("rule needs \"omega1\"")?, 0)?;
        let omega2 = parse_triple(r.get("omega2").ok_or("rule needs \"omega2\"")?, 1)?;
        TauSource::Rule { omega1, omega2 }
    } else {
        let list_val = obj
            .get("taus")
            .and_then(Value::as_array)
            .ok_or("missing \"taus\" array (or a \"rule\" object)")?;
        let mut list = Vec::with_capacity(list_val.len());
        for (i, t) in list_val.iter().enumerate() {
            list.push(parse_triple(t, i)?);
        }
        let repeat_last = match obj.get("repeat") {
            None => false,
            Some(Value::String(s)) if s == "last" => true,
            Some(other) => return Err(format!("unsupported \"repeat\": {other}")),
        };
        TauSource::Explicit { list, repeat_last }
    };

    SadicSystem::new(pi, taus, alphabet).map_err(|e| e.to_string())
}

fn parse_triple(v: &Value, position: usize) -> Result<TauParams, String> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or_else(|| format!("tau entry {position} must be [m, n, r]"))?;
    let get = |i: usize| -> Result<BigUint, String> {
        match &arr[i] {
            Value::Number(n) if n.as_u64().is_some() => Ok(BigUint::from(n.as_u64().unwrap())),
            Value::String(s) => {
                BigUint::from_str(s).map_err(|_| format!("bad integer in tau entry {position}"))
            }
            _ => Err(format!("bad integer in tau entry {position}")),
        }
    };
    TauParams::new_at(get(0)?, get(1)?, get(2)?, position).map_err(|e| e.to_string())
}

pub fn parse_target(text: &str) -> Result<TargetSpec, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = v.as_object().ok_or("top level must be an object")?;

    let odometer = match obj.get("odometer").ok_or("missing \"odometer\"")? {
        Value::Array(a) => OdoSpec::Finite(parse_factors(a)?),
        Value::Object(o) => {
            let rep = o
                .get("repeat")
                .and_then(Value::as_array)
                .ok_or("odometer object needs a \"repeat\" array")?;
            OdoSpec::Repeat(parse_factors(rep)?)
        }
        _ => return Err("\"odometer\" must be an array or {\"repeat\": [...]}".into()),
    };

    let mut nil_exponents = BTreeMap::new();
    if let Some(arr) = obj.get("nil_exponents").and_then(Value::as_array) {
        for pair in arr {
            let p = pair
                .get(0)
                .and_then(Value::as_u64)
                .ok_or("nil_exponents entries are [prime, exponent|\"inf\"]")?;
            let e = match pair.get(1) {
                Some(Value::Number(n)) if n.as_u64().is_some() => {
                    ExpTarget::Finite(n.as_u64().unwrap() as u32)
                }
                Some(Value::String(s)) if s == "inf" => ExpTarget::Inf,
                _ => return Err("nil exponent must be a number or \"inf\"".into()),
            };
            nil_exponents.insert(p, e);
        }
    }

    let delta = match obj.get("delta") {
        None => BigRational::from_integer(0.into()),
        Some(Value::String(s)) => {
            sadic::rat::rational_from_str(s).ok_or(format!("bad rational {s:?}"))?
        }
        Some(Value::Number(n)) if n.as_u64().is_some() => {
            BigRational::from_integer(n.as_u64().unwrap().into())
        }
        Some(other) => return Err(format!("bad \"delta\": {other}")),
    };

    let target = TargetSpec {
        odometer,
        nil_exponents,
        delta,
    };
    target.validate().map_err(|e| e.to_string())?;
    Ok(target)
}

fn parse_factors(a: &[Value]) -> Result<Vec<u64>, String> {
    a.iter()
        .map(|x| x.as_u64().ok_or_else(|| "odometer factors must be integers".to_string()))
        .collect()
}
