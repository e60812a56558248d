//! Finite integer sets, linear forms and their images.

mod form;
pub mod io;
mod kernel;
mod set;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use form::{normalize_form, LinearForm, NormalizationStep, NormalizationTrace};
pub use kernel::Strategy;
pub use set::FiniteIntSet;

fn require_nonempty(a: &FiniteIntSet) -> Result<()> {
    if a.is_empty() {
        Err(Error::invalid("set must be nonempty"))
    } else {
        Ok(())
    }
}

/// Checks that every partial sum of `f` over `a` fits in an `i64` and returns
/// the word view of `a` if so.
fn word_view<'a>(f: &LinearForm, a: &'a FiniteIntSet) -> Option<&'a [i64]> {
    let xs = a.as_i64s()?;
    let max_abs = xs[0].unsigned_abs().max(xs[xs.len() - 1].unsigned_abs()) as u128;
    let bound = f.height().checked_mul(max_abs)?;
    (bound <= i64::MAX as u128).then_some(xs)
}

fn dilate_i64(u: i64, xs: &[i64]) -> Vec<i64> {
    if u > 0 {
        xs.iter().map(|&x| u * x).collect()
    } else {
        xs.iter().rev().map(|&x| u * x).collect()
    }
}

fn dilate_big(u: &BigInt, xs: &[BigInt]) -> Vec<BigInt> {
    let mut out: Vec<BigInt> = xs.iter().map(|x| u * x).collect();
    if u.is_negative() {
        out.reverse();
    }
    out
}

fn image_big(f: &LinearForm, a: &FiniteIntSet, strategy: Strategy) -> Vec<BigInt> {
    let xs = a.to_bigints();
    let mut coeffs = f.coeffs().iter().map(|&u| BigInt::from(u));
    let mut acc = dilate_big(&coeffs.next().expect("nonempty form"), &xs);
    for u in coeffs {
        let d = dilate_big(&u, &xs);
        acc = match strategy {
            Strategy::Merge => kernel::sumset_merge(&acc, &d),
            _ => kernel::sumset_pairs(&acc, &d),
        };
    }
    acc
}

/// `f(A) = {u_1 a_1 + ... + u_n a_n : a_i ∈ A}` with an automatically chosen
/// kernel.
pub fn image(f: &LinearForm, a: &FiniteIntSet) -> Result<FiniteIntSet> {
    image_with(f, a, Strategy::Auto)
}

/// [`image`] with an explicit kernel choice. Arbitrary-precision inputs ignore
/// a `Bitset` request.
pub fn image_with(f: &LinearForm, a: &FiniteIntSet, strategy: Strategy) -> Result<FiniteIntSet> {
    require_nonempty(a)?;
    let Some(xs) = word_view(f, a) else {
        return Ok(FiniteIntSet::from_bigints(image_big(f, a, strategy)));
    };
    let coeffs = f.coeffs();
    let mut acc = dilate_i64(coeffs[0], xs);
    for &u in &coeffs[1..] {
        acc = kernel::sumset_i64(&acc, &dilate_i64(u, xs), strategy);
    }
    Ok(FiniteIntSet::from_sorted_i64s(acc))
}

/// `|f(A)|`. When the bitset kernel handles the last step the image is
/// never materialized.
pub fn image_cardinality(f: &LinearForm, a: &FiniteIntSet) -> Result<usize> {
    image_cardinality_with(f, a, Strategy::Auto)
}

pub fn image_cardinality_with(
    f: &LinearForm,
    a: &FiniteIntSet,
    strategy: Strategy,
) -> Result<usize> {
    require_nonempty(a)?;
    let Some(xs) = word_view(f, a) else {
        return Ok(image_big(f, a, strategy).len());
    };
    let coeffs = f.coeffs();
    let mut acc = dilate_i64(coeffs[0], xs);
    let Some((&last, middle)) = coeffs[1..].split_last() else {
        return Ok(acc.len());
    };
    for &u in middle {
        acc = kernel::sumset_i64(&acc, &dilate_i64(u, xs), strategy);
    }
    Ok(kernel::sumset_len_i64(
        &acc,
        &dilate_i64(last, xs),
        strategy,
    ))
}

/// `u * A = {u a : a ∈ A}`.
pub fn dilate(u: i64, a: &FiniteIntSet) -> Result<FiniteIntSet> {
    if u == 0 {
        return Err(Error::invalid("dilation factor must be nonzero"));
    }
    require_nonempty(a)?;
    Ok(scale(&BigInt::from(u), a))
}

fn scale(u: &BigInt, a: &FiniteIntSet) -> FiniteIntSet {
    FiniteIntSet::from_bigints(a.iter().map(|x| u * x).collect())
}

/// `A + B = {a + b : a ∈ A, b ∈ B}`.
pub fn sumset(a: &FiniteIntSet, b: &FiniteIntSet) -> Result<FiniteIntSet> {
    require_nonempty(a)?;
    require_nonempty(b)?;
    if let (Some(xs), Some(ys)) = (a.as_i64s(), b.as_i64s()) {
        let fits = |v: &[i64]| v[0].unsigned_abs().max(v[v.len() - 1].unsigned_abs()) as u128;
        if fits(xs) + fits(ys) <= i64::MAX as u128 {
            return Ok(FiniteIntSet::from_sorted_i64s(kernel::sumset_i64(
                xs,
                ys,
                Strategy::Auto,
            )));
        }
    }
    Ok(FiniteIntSet::from_bigints(kernel::sumset_pairs(
        &a.to_bigints(),
        &b.to_bigints(),
    )))
}

/// The representative `A'` of the affine class of `A` under positive
/// scalings: `min A' = 0` and the nonzero elements of `A'` are coprime.
pub fn affine_canonical(a: &FiniteIntSet) -> Result<FiniteIntSet> {
    if a.len() < 2 {
        return Err(Error::invalid(
            "affine canonical form needs at least two elements",
        ));
    }
    let xs = a.to_bigints();
    let shifted: Vec<BigInt> = xs.iter().map(|x| x - &xs[0]).collect();
    let g = shifted.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    Ok(FiniteIntSet::from_bigints(
        shifted.into_iter().map(|x| x / &g).collect(),
    ))
}

/// Key for full affine equivalence (negative scalings allowed): the
/// lexicographically smaller of the canonical forms of `A` and `-A`.
pub fn equivalence_key(a: &FiniteIntSet) -> Result<FiniteIntSet> {
    let direct = affine_canonical(a)?;
    let reflected = affine_canonical(&a.reflect())?;
    Ok(direct.min(reflected))
}

/// Whether `B = u*A + v` for some rational `u ≠ 0` and `v`.
pub fn affinely_equivalent(a: &FiniteIntSet, b: &FiniteIntSet) -> Result<bool> {
    if a.len() != b.len() {
        return Ok(false);
    }
    if a.len() == 1 {
        return Ok(true);
    }
    Ok(equivalence_key(a)? == equivalence_key(b)?)
}

/// Output of [`amplify`]: the multiplier `M` and `A_M = A + M*A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Amplification {
    #[serde(with = "io::bigint_string")]
    pub multiplier: BigInt,
    #[serde(with = "io::set_json")]
    pub set: FiniteIntSet,
}

/// Builds `A_M = A + M*A` with the smallest `M > 2 max(|s| : s ∈ A ∪ f(A) ∪ g(A))`.
///
/// Every sum in `f(A_M)` then has a unique base-`M` style decomposition, so
/// `|A_M| = |A|^2`, `|f(A_M)| = |f(A)|^2` and `|g(A_M)| = |g(A)|^2`.
pub fn amplify(f: &LinearForm, g: &LinearForm, a: &FiniteIntSet) -> Result<Amplification> {
    require_nonempty(a)?;
    let m = [a.clone(), image(f, a)?, image(g, a)?]
        .iter()
        .map(FiniteIntSet::max_abs)
        .max()
        .expect("three candidates");
    let multiplier = m * 2 + 1;
    let set = sumset(a, &scale(&multiplier, a))?;
    Ok(Amplification { multiplier, set })
}
