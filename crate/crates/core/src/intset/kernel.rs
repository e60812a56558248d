//! Sumset kernels. A linear-form image is an iterated sumset of dilates,
//! `f(A) = u_1*A + ... + u_n*A`, so everything here works on two sorted,
//! duplicate-free inputs.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::hash::Hash;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// How an image is computed. All strategies produce identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Picks the bitset kernel when the value range is dense enough, else pairs.
    #[default]
    Auto,
    /// Every pair sum goes through a hash set.
    Pairs,
    /// k-way merge of the sorted rows `x + B`.
    Merge,
    /// Shift-or over a bitset spanning the value range. Only available on the
    /// machine-word path; arbitrary-precision inputs fall back to `Pairs`.
    Bitset,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "pairs" => Ok(Strategy::Pairs),
            "merge" => Ok(Strategy::Merge),
            "bitset" => Ok(Strategy::Bitset),
            other => Err(Error::Parse(format!("unknown strategy '{other}'"))),
        }
    }
}

/// Largest bitset either strategy choice will allocate, in bits.
const BITSET_MAX_BITS: u128 = 1 << 34;

pub(crate) fn sumset_pairs<T>(a: &[T], b: &[T]) -> Vec<T>
where
    T: Hash + Eq + Ord + Clone,
    for<'x> &'x T: Add<&'x T, Output = T>,
{
    let mut seen = HashSet::with_capacity((a.len() * b.len()).min(1 << 24));
    for x in a {
        for y in b {
            seen.insert(x + y);
        }
    }
    let mut out: Vec<T> = seen.into_iter().collect();
    out.sort_unstable();
    out
}

pub(crate) fn sumset_merge<T>(a: &[T], b: &[T]) -> Vec<T>
where
    T: Ord + Clone,
    for<'x> &'x T: Add<&'x T, Output = T>,
{
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let (rows, cols) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut heap: BinaryHeap<Reverse<(T, usize, usize)>> = rows
        .iter()
        .enumerate()
        .map(|(i, x)| Reverse((x + &cols[0], i, 0)))
        .collect();
    let mut out: Vec<T> = Vec::new();
    while let Some(Reverse((value, row, col))) = heap.pop() {
        if out.last() != Some(&value) {
            out.push(value);
        }
        if col + 1 < cols.len() {
            heap.push(Reverse((&rows[row] + &cols[col + 1], row, col + 1)));
        }
    }
    out
}

/// A bitset over `[offset, offset + 64 * words.len())`.
pub(crate) struct RangeBits {
    offset: i64,
    words: Vec<u64>,
}

impl RangeBits {
    fn from_sorted(xs: &[i64]) -> Self {
        let offset = xs[0];
        let width = (xs[xs.len() - 1] - offset) as usize + 1;
        let mut words = vec![0u64; width.div_ceil(64)];
        for &x in xs {
            let i = (x - offset) as usize;
            words[i / 64] |= 1 << (i % 64);
        }
        RangeBits { offset, words }
    }

    pub(crate) fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn to_sorted(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.count());
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let bit = w.trailing_zeros() as i64;
                out.push(self.offset + wi as i64 * 64 + bit);
                w &= w - 1;
            }
        }
        out
    }
}

/// `dst |= src << shift` on word vectors; `dst` must be long enough.
#[inline]
fn or_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    let (word, bit) = (shift / 64, shift % 64);
    if bit == 0 {
        for (d, s) in dst[word..].iter_mut().zip(src) {
            *d |= *s;
        }
    } else {
        for (i, &s) in src.iter().enumerate() {
            dst[word + i] |= s << bit;
            dst[word + i + 1] |= s >> (64 - bit);
        }
    }
}

/// Shift-or sumset. Inputs must be nonempty and the span of the result must
/// fit in memory (see [`choose`]).
pub(crate) fn sumset_bitset(a: &[i64], b: &[i64]) -> RangeBits {
    // shift the wider set by each element of the smaller one
    let (shifts, base) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let src = RangeBits::from_sorted(base);
    let lo = src.offset + shifts[0];
    let width = bitset_width(a, b) as usize;
    let mut words = vec![0u64; width.div_ceil(64) + 1];
    for &s in shifts {
        or_shifted(&mut words, &src.words, (s - shifts[0]) as usize);
    }
    // clear bits past the true span (the extra guard word and tail)
    let last = width - 1;
    for (wi, w) in words.iter_mut().enumerate().skip(last / 64) {
        let start = wi * 64;
        if start > last {
            *w = 0;
        } else if last - start < 63 {
            *w &= (1u64 << (last - start + 1)) - 1;
        }
    }
    RangeBits { offset: lo, words }
}

/// Number of integers in `[min A + min B, max A + max B]`.
pub(crate) fn bitset_width(a: &[i64], b: &[i64]) -> u128 {
    let span = |v: &[i64]| (v[v.len() - 1] as i128 - v[0] as i128) as u128;
    span(a) + span(b) + 1
}

fn prefer_bitset(a: &[i64], b: &[i64]) -> bool {
    let width = bitset_width(a, b);
    if width > BITSET_MAX_BITS {
        return false;
    }
    let small = a.len().min(b.len()) as u128;
    let words = width / 64 + 1;
    // word operations are several times cheaper than hash inserts
    small * words <= 4 * (a.len() as u128) * (b.len() as u128)
}

/// Resolves `Auto` for a concrete pair of word-sized inputs. An explicit
/// `Bitset` request over a span too wide to allocate becomes `Pairs`.
pub(crate) fn choose(strategy: Strategy, a: &[i64], b: &[i64]) -> Strategy {
    match strategy {
        Strategy::Auto if prefer_bitset(a, b) => Strategy::Bitset,
        Strategy::Auto => Strategy::Pairs,
        Strategy::Bitset if bitset_width(a, b) > BITSET_MAX_BITS => Strategy::Pairs,
        s => s,
    }
}

/// Sumset of sorted word inputs with a concrete strategy. Sums must not
/// overflow `i64`; callers check the bound.
pub(crate) fn sumset_i64(a: &[i64], b: &[i64], strategy: Strategy) -> Vec<i64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    match choose(strategy, a, b) {
        Strategy::Bitset => sumset_bitset(a, b).to_sorted(),
        Strategy::Merge => sumset_merge(a, b),
        _ => sumset_pairs(a, b),
    }
}

pub(crate) fn sumset_len_i64(a: &[i64], b: &[i64], strategy: Strategy) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    match choose(strategy, a, b) {
        Strategy::Bitset => sumset_bitset(a, b).count(),
        s => sumset_i64(a, b, s).len(),
    }
}
