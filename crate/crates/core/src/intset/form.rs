use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integer linear form `u_1 x_1 + ... + u_n x_n` with nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct LinearForm {
    coeffs: Vec<i64>,
}

impl LinearForm {
    pub fn new(coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid(
                "a linear form needs at least one coefficient",
            ));
        }
        if coeffs.contains(&0) {
            return Err(Error::invalid(format!(
                "linear form coefficients must be nonzero, got {coeffs:?}"
            )));
        }
        if coeffs.contains(&i64::MIN) {
            return Err(Error::invalid("coefficient out of range"));
        }
        Ok(LinearForm { coeffs })
    }

    pub fn binary(u: i64, v: i64) -> Result<Self> {
        Self::new(vec![u, v])
    }

    /// `x + y`.
    pub fn sum() -> Self {
        LinearForm { coeffs: vec![1, 1] }
    }

    /// `x - y`.
    pub fn difference() -> Self {
        LinearForm {
            coeffs: vec![1, -1],
        }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn arity(&self) -> usize {
        self.coeffs.len()
    }

    /// `(u, v)` for a binary form.
    pub fn as_binary(&self) -> Option<(i64, i64)> {
        match self.coeffs[..] {
            [u, v] => Some((u, v)),
            _ => None,
        }
    }

    /// Height: the sum of the absolute values of the coefficients.
    pub fn height(&self) -> u128 {
        self.coeffs.iter().map(|c| c.unsigned_abs() as u128).sum()
    }

    /// `u ≥ |v| ≥ 1`, `gcd(u, v) = 1`.
    pub fn is_normalized(&self) -> bool {
        match self.as_binary() {
            Some((u, v)) => u > 0 && u >= v.abs() && u.gcd(&v) == 1,
            None => false,
        }
    }

    pub fn eval(&self, xs: &[i64]) -> i128 {
        self.coeffs
            .iter()
            .zip(xs)
            .map(|(&u, &x)| u as i128 * x as i128)
            .sum()
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Parses comma-separated coefficients such as `2,1` or `(1,-1)`.
impl FromStr for LinearForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let coeffs = inner
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Parse(format!("bad coefficient '{}'", tok.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        LinearForm::new(coeffs)
    }
}

impl TryFrom<Vec<i64>> for LinearForm {
    type Error = Error;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        LinearForm::new(v)
    }
}

impl From<LinearForm> for Vec<i64> {
    fn from(f: LinearForm) -> Self {
        f.coeffs
    }
}

/// One cardinality-preserving move applied by [`normalize_form`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationStep {
    DivideByGcd(i64),
    Swap,
    Negate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationTrace {
    pub original: LinearForm,
    pub normalized: LinearForm,
    pub steps: Vec<NormalizationStep>,
}

/// Reduces a binary form to `u ≥ |v| ≥ 1`, `gcd(u, v) = 1`.
///
/// Dividing by the gcd, swapping variables and negating the whole form all
/// leave `|f(A)|` unchanged for every `A`.
pub fn normalize_form(f: &LinearForm) -> Result<NormalizationTrace> {
    let (mut u, mut v) = f
        .as_binary()
        .ok_or_else(|| Error::invalid(format!("{f} is not a binary form")))?;
    let mut steps = Vec::new();
    let g = u.gcd(&v);
    if g > 1 {
        u /= g;
        v /= g;
        steps.push(NormalizationStep::DivideByGcd(g));
    }
    if u.abs() < v.abs() {
        std::mem::swap(&mut u, &mut v);
        steps.push(NormalizationStep::Swap);
    }
    if u < 0 {
        u = -u;
        v = -v;
        steps.push(NormalizationStep::Negate);
    }
    Ok(NormalizationTrace {
        original: f.clone(),
        normalized: LinearForm::binary(u, v)?,
        steps,
    })
}
