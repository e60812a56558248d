//! Small explicit sets separating pairs of binary forms: the exceptional
//! 3-element sets of a form, 3-, 4- and 5-element witnesses, and intervals on
//! which a form and its conjugate agree.
//!
//! Every witness recomputes its cardinalities before returning, so a formula
//! that does not deliver what it promises shows up as
//! [`Error::Verification`].

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intset::{equivalence_key, image_cardinality, FiniteIntSet, LinearForm};

fn card(f: &LinearForm, a: &FiniteIntSet) -> usize {
    image_cardinality(f, a).expect("witness sets are nonempty")
}

fn require_normalized(f: &LinearForm) -> Result<(i64, i64)> {
    if !f.is_normalized() {
        return Err(Error::invalid(format!(
            "{f} is not a normalized binary form"
        )));
    }
    Ok(f.as_binary().expect("normalized forms are binary"))
}

/// Exceptional triples of a normalized form, up to affine equivalence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleClassification {
    pub form: LinearForm,
    pub bound: i64,
    /// Equivalence-class keys of the triples with `|f(A)| < 9` and their image sizes.
    pub exceptional: Vec<ExceptionalTriple>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionalTriple {
    #[serde(with = "crate::intset::io::set_json")]
    pub set: FiniteIntSet,
    pub cardinality: usize,
}

impl TripleClassification {
    pub fn sets(&self) -> Vec<FiniteIntSet> {
        self.exceptional.iter().map(|t| t.set.clone()).collect()
    }
}

/// Default enumeration bound `u + |v|`: every exceptional triple is
/// equivalent to one inside `[0, u + |v|]`.
pub fn default_triple_bound(f: &LinearForm) -> Result<i64> {
    let (u, v) = require_normalized(f)?;
    Ok(u + v.abs())
}

/// Enumerates canonical triples `{0, a, b}`, `0 < a < b <= bound`,
/// `gcd(a, b) = 1`, one per affine class, and keeps those with `|f(A)| < 9`.
///
/// The result is sorted by set and does not depend on the thread count.
pub fn classify_triples(f: &LinearForm, bound: i64) -> Result<TripleClassification> {
    let (u, v) = require_normalized(f)?;
    if bound < u + v.abs() {
        return Err(Error::invalid(format!(
            "bound {bound} is below u + |v| = {}",
            u + v.abs()
        )));
    }
    let mut exceptional: Vec<ExceptionalTriple> = (1..bound)
        .into_par_iter()
        .flat_map_iter(|a| {
            (a + 1..=bound).filter_map(move |b| {
                if a.gcd(&b) != 1 {
                    return None;
                }
                let set = FiniteIntSet::from([0, a, b]);
                // keep only the representative of each reflection pair
                if equivalence_key(&set).ok()? != set {
                    return None;
                }
                let cardinality = card(f, &set);
                (cardinality < 9).then_some(ExceptionalTriple { set, cardinality })
            })
        })
        .collect();
    exceptional.sort_by(|x, y| x.set.cmp(&y.set));
    Ok(TripleClassification {
        form: f.clone(),
        bound,
        exceptional,
    })
}

/// The exceptional triples the classification theorem predicts, as
/// equivalence keys with their image sizes, sorted by set.
pub fn predicted_exceptional_triples(f: &LinearForm) -> Result<Vec<ExceptionalTriple>> {
    let (u, v) = require_normalized(f)?;
    let w = v.abs();
    let mut out: Vec<ExceptionalTriple> = if u == 2 {
        vec![([0, 1, 2], 7), ([0, 1, 3], 8)]
            .into_iter()
            .map(|(s, c)| ExceptionalTriple {
                set: FiniteIntSet::from(s),
                cardinality: c,
            })
            .collect()
    } else if u >= 3 {
        [[0, w, u], [0, w, u + w]]
            .into_iter()
            .map(|s| ExceptionalTriple {
                set: equivalence_key(&FiniteIntSet::from(s)).expect("three elements"),
                cardinality: 8,
            })
            .collect()
    } else {
        return Err(Error::invalid("the triple classification needs u >= 2"));
    };
    out.sort_by(|x, y| x.set.cmp(&y.set));
    Ok(out)
}

/// Two sets on which a pair of forms compare in opposite directions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessPair {
    pub f: LinearForm,
    pub g: LinearForm,
    #[serde(with = "crate::intset::io::set_json")]
    pub a: FiniteIntSet,
    #[serde(with = "crate::intset::io::set_json")]
    pub b: FiniteIntSet,
    pub f_a: usize,
    pub g_a: usize,
    pub f_b: usize,
    pub g_b: usize,
}

impl WitnessPair {
    fn measure(f: &LinearForm, g: &LinearForm, a: FiniteIntSet, b: FiniteIntSet) -> Self {
        WitnessPair {
            f_a: card(f, &a),
            g_a: card(g, &a),
            f_b: card(f, &b),
            g_b: card(g, &b),
            f: f.clone(),
            g: g.clone(),
            a,
            b,
        }
    }

    /// The comparisons on `A` and `B` are strict and opposite.
    pub fn separates(&self) -> bool {
        let on_a = self.f_a.cmp(&self.g_a);
        let on_b = self.f_b.cmp(&self.g_b);
        on_a.is_ne() && on_b == on_a.reverse()
    }

    fn checked(self) -> Result<Self> {
        if self.separates() {
            Ok(self)
        } else {
            Err(Error::Verification(format!(
                "{} vs {}: |f(A)|={} |g(A)|={} |f(B)|={} |g(B)|={}",
                self.f, self.g, self.f_a, self.g_a, self.f_b, self.g_b
            )))
        }
    }
}

/// Three-element sets `A`, `B` with `|f(A)| < |g(A)|` and `|f(B)| > |g(B)|`
/// for normalized forms with `u ≥ 2` and `(u_1, |v_1|) ≠ (u_2, |v_2|)`.
pub fn three_set_witness(f: &LinearForm, g: &LinearForm) -> Result<WitnessPair> {
    let (u1, v1) = require_normalized(f)?;
    let (u2, v2) = require_normalized(g)?;
    if u1 < 2 || u2 < 2 {
        return Err(Error::invalid("both forms need u >= 2"));
    }
    let (w1, w2) = (v1.abs(), v2.abs());
    if (u1, w1) == (u2, w2) {
        return Err(Error::invalid(format!(
            "{f} and {g} have the same exceptional triples"
        )));
    }
    if (u1, w1) > (u2, w2) {
        let swapped = three_set_witness(g, f)?;
        return WitnessPair::measure(f, g, swapped.b, swapped.a).checked();
    }
    let (a, b) = if u1 < u2 && u2 != u1 + w1 {
        ([0, w1, u1], [0, w2, u2])
    } else if u1 < u2 {
        ([0, w1, u1], [0, w2, u2 + w2])
    } else {
        ([0, w1, u1 + w1], [0, w2, u2 + w2])
    };
    WitnessPair::measure(f, g, FiniteIntSet::from(a), FiniteIntSet::from(b)).checked()
}

fn require_coprime_pair(u: i64, v: i64) -> Result<()> {
    if !(u > v && v >= 1 && u.gcd(&v) == 1) {
        return Err(Error::invalid(format!(
            "need gcd(u, v) = 1 and u > v >= 1, got ({u}, {v})"
        )));
    }
    Ok(())
}

/// Four-element sets separating `f = ux + vy` from its conjugate `g = ux - vy`.
///
/// For `u = 2` the image sizes are `13 > 12` on `A` and `13 < 14` on `B`; for
/// `u ≥ 3` they are `14 > 13` and `13 < 14`.
pub fn conjugate_four_set_witness(u: i64, v: i64) -> Result<WitnessPair> {
    require_coprime_pair(u, v)?;
    let f = LinearForm::binary(u, v)?;
    let g = LinearForm::binary(u, -v)?;
    let (a, b, expect) = if u == 2 {
        ([0, 3, 4, 6], [0, 4, 6, 7], (13, 12, 13, 14))
    } else {
        let (uu, vv, uv) = (u * u, v * v, u * v);
        (
            [0, uu - vv, uu, uu + uv],
            [0, uu - uv, uu - vv, uu],
            (14, 13, 13, 14),
        )
    };
    let w = WitnessPair::measure(&f, &g, FiniteIntSet::from(a), FiniteIntSet::from(b)).checked()?;
    if (w.f_a, w.g_a, w.f_b, w.g_b) != expect {
        return Err(Error::Verification(format!(
            "({u},{v}): got {:?}, expected {expect:?}",
            (w.f_a, w.g_a, w.f_b, w.g_b)
        )));
    }
    Ok(w)
}

/// A five-element set with `|f(A)| < |A - A|` for `f = ux + vy`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiveSetWitness {
    pub f: LinearForm,
    #[serde(with = "crate::intset::io::set_json")]
    pub set: FiniteIntSet,
    pub f_card: usize,
    pub d_card: usize,
}

/// `A = {0, v³, v³+v²u, v³+v²u+vu², v³+v²u+vu²+u³}`, a Sidon set, so
/// `|A - A| = 21` while at least six pairs collide under `f`, giving
/// `|f(A)| ≤ 19`.
pub fn five_set_witness(u: i64, v: i64) -> Result<FiveSetWitness> {
    require_coprime_pair(u, v)?;
    let steps = [v * v * v, v * v * u, v * u * u, u * u * u];
    let mut set = vec![0i64];
    for s in steps {
        set.push(set[set.len() - 1] + s);
    }
    let f = LinearForm::binary(u, v)?;
    let set = FiniteIntSet::from_i64s(set);
    let f_card = card(&f, &set);
    let d_card = card(&LinearForm::difference(), &set);
    if d_card != 21 || f_card > 19 {
        return Err(Error::Verification(format!(
            "({u},{v}): |f(A)| = {f_card}, |A-A| = {d_card}"
        )));
    }
    Ok(FiveSetWitness {
        f,
        set,
        f_card,
        d_card,
    })
}

/// `[0, t - 1]`, on which `ux + vy` and `ux - vy` both have `t²` values
/// provided `t ≤ u`.
pub fn ap_equality_set(u: i64, v: i64, t: i64) -> Result<FiniteIntSet> {
    require_coprime_pair(u, v)?;
    if t < 1 || t > u {
        return Err(Error::invalid(format!(
            "need 1 <= t <= u = {u}, got t = {t}"
        )));
    }
    let set = FiniteIntSet::interval(0, t - 1);
    let expect = (t * t) as usize;
    for g in [LinearForm::binary(u, v)?, LinearForm::binary(u, -v)?] {
        let got = card(&g, &set);
        if got != expect {
            return Err(Error::Verification(format!(
                "|{g}([0,{}])| = {got}, expected {expect}",
                t - 1
            )));
        }
    }
    Ok(set)
}
