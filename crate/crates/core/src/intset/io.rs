//! Text and JSON encodings of integer sets.
//!
//! Text: one integer per line; `#` starts a comment; blank lines are ignored.
//! JSON: an array whose entries are numbers, or decimal strings for values
//! outside the `i64` range.

use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::Value;

use super::FiniteIntSet;
use crate::error::{Error, Result};

fn parse_int(tok: &str) -> Result<BigInt> {
    tok.parse::<BigInt>()
        .map_err(|_| Error::Parse(format!("bad integer '{tok}'")))
}

pub fn parse_text(text: &str) -> Result<FiniteIntSet> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if !line.is_empty() {
            out.push(parse_int(line)?);
        }
    }
    Ok(FiniteIntSet::from_bigints(out))
}

pub fn to_text(a: &FiniteIntSet) -> String {
    let mut s = String::new();
    for x in a.iter() {
        s.push_str(&x.to_string());
        s.push('\n');
    }
    s
}

/// Parses a comma- or whitespace-separated inline list such as `0,1,2`.
pub fn parse_inline(text: &str) -> Result<FiniteIntSet> {
    let text = text.trim().trim_start_matches('{').trim_end_matches('}');
    let vals = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(parse_int)
        .collect::<Result<Vec<_>>>()?;
    Ok(FiniteIntSet::from_bigints(vals))
}

pub fn to_json_value(a: &FiniteIntSet) -> Value {
    Value::Array(
        a.iter()
            .map(|x| match x.to_i64() {
                Some(small) => Value::from(small),
                None => Value::from(x.to_string()),
            })
            .collect(),
    )
}

pub fn from_json_value(v: &Value) -> Result<FiniteIntSet> {
    let Value::Array(items) = v else {
        return Err(Error::Parse("expected a JSON array of integers".into()));
    };
    let vals = items
        .iter()
        .map(|item| match item {
            Value::Number(n) => parse_int(&n.to_string()),
            Value::String(s) => parse_int(s),
            other => Err(Error::Parse(format!("bad set element {other}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FiniteIntSet::from_bigints(vals))
}

pub fn to_json(a: &FiniteIntSet) -> String {
    to_json_value(a).to_string()
}

pub fn from_json(text: &str) -> Result<FiniteIntSet> {
    from_json_value(&serde_json::from_str(text)?)
}

/// Reads a set file, choosing JSON when the content starts with `[`.
pub fn read_set(path: impl AsRef<Path>) -> Result<FiniteIntSet> {
    let text = fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    if text.trim_start().starts_with('[') {
        from_json(&text)
    } else {
        parse_text(&text)
    }
}

/// Serde adapter storing a [`FiniteIntSet`] as a JSON array.
pub mod set_json {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        a: &FiniteIntSet,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        to_json_value(a).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<FiniteIntSet, D::Error> {
        let v = Value::deserialize(d)?;
        from_json_value(&v).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter storing a [`BigInt`] as a decimal string.
pub mod bigint_string {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
