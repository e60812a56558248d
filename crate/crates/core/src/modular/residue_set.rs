use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intset::{FiniteIntSet, LinearForm};
use crate::numtheory::{mul_mod, reduce};

/// A nonempty set of congruence classes modulo `m ≥ 2`, stored as sorted
/// least nonnegative residues.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawResidueSet", into = "RawResidueSet")]
pub struct ResidueSet {
    modulus: u64,
    classes: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawResidueSet {
    modulus: u64,
    classes: Vec<u64>,
}

impl TryFrom<RawResidueSet> for ResidueSet {
    type Error = Error;

    fn try_from(raw: RawResidueSet) -> Result<Self> {
        ResidueSet::new(raw.modulus, raw.classes)
    }
}

impl From<ResidueSet> for RawResidueSet {
    fn from(r: ResidueSet) -> Self {
        RawResidueSet {
            modulus: r.modulus,
            classes: r.classes,
        }
    }
}

impl ResidueSet {
    /// Classes must already lie in `[0, m - 1]`; duplicates are merged.
    pub fn new(modulus: u64, mut classes: Vec<u64>) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::invalid(format!(
                "modulus {modulus} must be at least 2"
            )));
        }
        if let Some(bad) = classes.iter().find(|&&c| c >= modulus) {
            return Err(Error::invalid(format!(
                "class {bad} is not below the modulus {modulus}"
            )));
        }
        classes.sort_unstable();
        classes.dedup();
        if classes.is_empty() {
            return Err(Error::invalid("a residue set needs at least one class"));
        }
        Ok(ResidueSet { modulus, classes })
    }

    /// Reduces arbitrary integers modulo `m`.
    pub fn from_integers<I: IntoIterator<Item = i128>>(modulus: u64, xs: I) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::invalid(format!(
                "modulus {modulus} must be at least 2"
            )));
        }
        Self::new(
            modulus,
            xs.into_iter().map(|x| reduce(x, modulus)).collect(),
        )
    }

    /// All of `Z/mZ`.
    pub fn full(modulus: u64) -> Result<Self> {
        Self::new(modulus, (0..modulus).collect())
    }

    pub(crate) fn from_sorted_unchecked(modulus: u64, classes: Vec<u64>) -> Self {
        debug_assert!(classes.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(classes.last().is_some_and(|&c| c < modulus));
        ResidueSet { modulus, classes }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn classes(&self) -> &[u64] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.classes.len() as u64 == self.modulus
    }

    pub fn contains(&self, class: u64) -> bool {
        self.classes.binary_search(&class).is_ok()
    }
}

/// `m: c1,c2,...`
impl fmt::Display for ResidueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.classes.iter().map(u64::to_string).collect();
        write!(f, "{}: {}", self.modulus, parts.join(","))
    }
}

impl FromStr for ResidueSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (m, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected 'm: c1,c2,...', got '{s}'")))?;
        let num = |tok: &str| {
            tok.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad residue '{}'", tok.trim())))
        };
        let modulus = num(m)?;
        let classes = rest
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(num)
            .collect::<Result<Vec<_>>>()?;
        ResidueSet::new(modulus, classes)
    }
}

/// Bitset over `Z/mZ`.
struct ModBits {
    m: usize,
    words: Vec<u64>,
}

impl ModBits {
    fn new(m: u64) -> Self {
        let m = m as usize;
        ModBits {
            m,
            words: vec![0; m.div_ceil(64)],
        }
    }

    fn set(&mut self, i: u64) {
        let i = i as usize;
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn to_classes(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.count());
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push((wi * 64) as u64 + w.trailing_zeros() as u64);
                w &= w - 1;
            }
        }
        out
    }

    /// Two back-to-back copies of the set, so any window of length `m`
    /// reads a rotation.
    fn doubled(&self) -> Vec<u64> {
        let mut out = vec![0u64; (2 * self.m).div_ceil(64) + 1];
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let i = wi * 64 + w.trailing_zeros() as usize;
                for j in [i, i + self.m] {
                    out[j / 64] |= 1 << (j % 64);
                }
                w &= w - 1;
            }
        }
        out
    }

    /// `self |= doubled >> start` over the first `m` bits.
    fn or_window(&mut self, doubled: &[u64], start: usize) {
        let (w0, b) = (start / 64, start % 64);
        for (i, dst) in self.words.iter_mut().enumerate() {
            let lo = doubled[w0 + i];
            *dst |= if b == 0 {
                lo
            } else {
                (lo >> b) | (doubled[w0 + i + 1] << (64 - b))
            };
        }
        let tail = self.m % 64;
        if tail != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << tail) - 1;
        }
    }
}

/// `acc + u*R (mod m)` as a bitset.
fn add_dilate(acc: &ModBits, u: u64, r: &[u64], m: u64) -> ModBits {
    let mut out = ModBits::new(m);
    let acc_len = acc.count();
    // rotation costs m/64 word ops per shift, enumeration costs |acc| per shift
    if (m as usize) / 64 < acc_len {
        let doubled = acc.doubled();
        let mut shifts: Vec<u64> = r.iter().map(|&x| mul_mod(u, x, m)).collect();
        shifts.sort_unstable();
        shifts.dedup();
        for s in shifts {
            // bit i of the result is acc[i - s]
            out.or_window(&doubled, ((m - s) % m) as usize);
        }
    } else {
        let members = acc.to_classes();
        for &x in r {
            let s = mul_mod(u, x, m);
            for &a in &members {
                let v = a + s;
                out.set(if v >= m { v - m } else { v });
            }
        }
    }
    out
}

fn image_bits(f: &LinearForm, r: &ResidueSet) -> ModBits {
    let m = r.modulus;
    let us: Vec<u64> = f.coeffs().iter().map(|&u| reduce(u as i128, m)).collect();
    let mut acc = ModBits::new(m);
    for &x in &r.classes {
        acc.set(mul_mod(us[0], x, m));
    }
    for &u in &us[1..] {
        acc = add_dilate(&acc, u, &r.classes, m);
    }
    acc
}

/// `f(R) = {u_1 r_1 + ... + u_n r_n mod m : r_i ∈ R}`.
pub fn modular_image(f: &LinearForm, r: &ResidueSet) -> ResidueSet {
    ResidueSet::from_sorted_unchecked(r.modulus, image_bits(f, r).to_classes())
}

/// `|f(R)|`.
pub fn modular_image_cardinality(f: &LinearForm, r: &ResidueSet) -> usize {
    image_bits(f, r).count()
}

/// Largest CRT product [`crt_product`] will materialize.
pub const CRT_PRODUCT_CAP: u128 = 100_000_000;

fn require_pairwise_coprime(moduli: &[u64]) -> Result<()> {
    for (i, &a) in moduli.iter().enumerate() {
        for &b in &moduli[..i] {
            if a.gcd(&b) != 1 {
                return Err(Error::NotCoprime(b.to_string(), a.to_string()));
            }
        }
    }
    Ok(())
}

/// Combined modulus of pairwise coprime moduli, as an arbitrary-precision
/// integer. Fails if two moduli share a factor.
pub fn combined_modulus(moduli: &[u64]) -> Result<BigInt> {
    require_pairwise_coprime(moduli)?;
    Ok(moduli.iter().map(|&m| BigInt::from(m)).product())
}

/// All classes modulo `m = m_1 ⋯ m_r` whose reduction modulo each `m_i` lies
/// in `R_{m_i}`. Needs pairwise coprime moduli, `m` within `u64` and at most
/// [`CRT_PRODUCT_CAP`] classes.
pub fn crt_product(locals: &[ResidueSet]) -> Result<ResidueSet> {
    let Some(first) = locals.first() else {
        return Err(Error::invalid("crt_product needs at least one residue set"));
    };
    let moduli: Vec<u64> = locals.iter().map(ResidueSet::modulus).collect();
    let m_total = combined_modulus(&moduli)?;
    let m_total = m_total
        .to_u64()
        .ok_or_else(|| Error::invalid(format!("combined modulus {m_total} exceeds 64 bits")))?;
    let size: u128 = locals.iter().map(|r| r.len() as u128).product();
    if size > CRT_PRODUCT_CAP {
        return Err(Error::invalid(format!(
            "CRT product has {size} classes, above the cap {CRT_PRODUCT_CAP}"
        )));
    }
    let mut classes = first.classes.clone();
    let mut m = first.modulus;
    for r in &locals[1..] {
        let mi = r.modulus;
        // m * inv ≡ 1 (mod mi)
        let inv = reduce((m as i128).extended_gcd(&(mi as i128)).x, mi);
        let mut next = Vec::with_capacity(classes.len() * r.len());
        for &a in &classes {
            for &b in &r.classes {
                let t = mul_mod(reduce(b as i128 - a as i128, mi), inv, mi);
                next.push(a + m * t);
            }
        }
        classes = next;
        m *= mi;
    }
    debug_assert_eq!(m, m_total);
    classes.sort_unstable();
    Ok(ResidueSet::from_sorted_unchecked(m, classes))
}

/// One integer per class of `R`, taken from `[window_start, window_start + m - 1]`.
///
/// For every linear form `f` with height `h_f` the result `A` satisfies
/// `|f(R)| ≤ |f(A)| ≤ 2 h_f |f(R)|` (see [`sandwich_bounds`]).
pub fn rectify(r: &ResidueSet, window_start: i64) -> FiniteIntSet {
    let m = r.modulus as i128;
    let s = window_start as i128;
    let reps = r.classes.iter().map(|&c| s + (c as i128 - s).rem_euclid(m));
    match reps
        .clone()
        .map(i64::try_from)
        .collect::<std::result::Result<Vec<_>, _>>()
    {
        Ok(small) => FiniteIntSet::from_i64s(small),
        Err(_) => FiniteIntSet::new(reps),
    }
}

/// `(|f(R)|, 2 h_f |f(R)|)`: the range any rectification's image size lies in.
pub fn sandwich_bounds(f: &LinearForm, r: &ResidueSet) -> (u128, u128) {
    let local = modular_image_cardinality(f, r) as u128;
    (local, 2 * f.height() * local)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intset::image_cardinality;

    fn brute_image(f: &LinearForm, r: &ResidueSet) -> Vec<u64> {
        let m = r.modulus() as i128;
        let mut acc: std::collections::BTreeSet<i128> = [0].into();
        for &u in f.coeffs() {
            acc = acc
                .iter()
                .flat_map(|s| {
                    r.classes()
                        .iter()
                        .map(move |&x| (s + u as i128 * x as i128).rem_euclid(m))
                })
                .collect();
        }
        acc.into_iter().map(|x| x as u64).collect()
    }

    fn form(u: i64, v: i64) -> LinearForm {
        LinearForm::binary(u, v).unwrap()
    }

    #[test]
    fn validation() {
        assert!(ResidueSet::new(1, vec![0]).is_err());
        assert!(ResidueSet::new(5, vec![]).is_err());
        assert!(ResidueSet::new(5, vec![5]).is_err());
        let r = ResidueSet::from_integers(7, [-1, 8, 1]).unwrap();
        assert_eq!(r.classes(), &[1, 6]);
    }

    #[test]
    fn text_format() {
        let r: ResidueSet = "13: 0,1,6,7,9,11".parse().unwrap();
        assert_eq!(r.to_string(), "13: 0,1,6,7,9,11");
        assert_eq!(r.to_string().parse::<ResidueSet>().unwrap(), r);
        assert!("13 0,1".parse::<ResidueSet>().is_err());
        assert!("13: 0,x".parse::<ResidueSet>().is_err());
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"{"modulus":13,"classes":[0,1,6,7,9,11]}"#);
        assert!(serde_json::from_str::<ResidueSet>(r#"{"modulus":3,"classes":[4]}"#).is_err());
    }

    #[test]
    fn image_examples() {
        let r: ResidueSet = "13: 0,1,6,7,9,11".parse().unwrap();
        let img = modular_image(&form(2, 1), &r);
        assert_eq!(img.len(), 12);
        assert!(!img.contains(4));
        assert!(modular_image(&form(1, 1), &r).is_full());
        assert!(modular_image(&form(1, 1), &ResidueSet::full(10).unwrap()).is_full());
    }

    #[test]
    fn image_kernels_match_brute_force() {
        // moduli on both sides of the rotation/enumeration switch
        for m in [2u64, 13, 64, 65, 200, 1000] {
            let r =
                ResidueSet::from_integers(m, (0..40).map(|i| (i * i * 7 + 3 * i) as i128)).unwrap();
            for f in [
                form(2, 1),
                form(1, -1),
                form(5, -3),
                LinearForm::new(vec![1, 1, 1]).unwrap(),
            ] {
                assert_eq!(
                    modular_image(&f, &r).classes(),
                    &brute_image(&f, &r)[..],
                    "m={m} f={f}"
                );
            }
        }
    }

    #[test]
    fn crt_product_examples() {
        let a = ResidueSet::full(4).unwrap();
        let b = ResidueSet::full(9).unwrap();
        assert_eq!(crt_product(&[a, b]).unwrap(), ResidueSet::full(36).unwrap());
        let a = ResidueSet::new(3, vec![0]).unwrap();
        let b = ResidueSet::new(5, vec![0]).unwrap();
        assert_eq!(
            crt_product(&[a, b]).unwrap(),
            ResidueSet::new(15, vec![0]).unwrap()
        );
        let a = ResidueSet::new(4, vec![1]).unwrap();
        let b = ResidueSet::new(6, vec![1]).unwrap();
        assert!(matches!(crt_product(&[a, b]), Err(Error::NotCoprime(..))));
    }

    #[test]
    fn crt_product_reduces_correctly() {
        let a: ResidueSet = "7: 1,2,4".parse().unwrap();
        let b: ResidueSet = "9: 0,5".parse().unwrap();
        let c = crt_product(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(c.modulus(), 63);
        assert_eq!(c.len(), 6);
        let expect: Vec<u64> = (0..63)
            .filter(|x| a.contains(x % 7) && b.contains(x % 9))
            .collect();
        assert_eq!(c.classes(), &expect[..]);
    }

    #[test]
    fn rectify_windows() {
        let r: ResidueSet = "13: 0,1,6".parse().unwrap();
        assert_eq!(rectify(&r, 0), FiniteIntSet::from([0, 1, 6]));
        assert_eq!(rectify(&r, 1), FiniteIntSet::from([1, 6, 13]));
        assert_eq!(rectify(&r, -13), FiniteIntSet::from([-13, -12, -7]));
    }

    #[test]
    fn sandwich_holds() {
        let r: ResidueSet = "19: 0,1,11,12,14,16,18".parse().unwrap();
        for f in [form(2, 1), form(1, 1), form(7, -3)] {
            let (lo, hi) = sandwich_bounds(&f, &r);
            for start in [0, 1] {
                let n = image_cardinality(&f, &rectify(&r, start)).unwrap() as u128;
                assert!(lo <= n && n <= hi, "{f} start {start}: {lo} <= {n} <= {hi}");
            }
        }
    }
}
