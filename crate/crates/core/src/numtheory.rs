//! Exact integer and modular arithmetic: Jacobi symbols, deterministic
//! primality, prime search in arithmetic progressions, CRT, and q-th power
//! residue tests.
//!
//! Primes handled here are machine words (`u64`). Quantities that grow without
//! bound, like CRT moduli, are [`BigInt`].

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound for [`find_primes`].
pub const DEFAULT_SEARCH_LIMIT: u64 = 1_000_000;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Least nonnegative residue of `a` modulo `m`.
#[inline]
pub fn reduce(a: i128, m: u64) -> u64 {
    a.rem_euclid(m as i128) as u64
}

/// Least nonnegative residue of an arbitrary-precision `a` modulo `m`.
pub fn reduce_big(a: &BigInt, m: u64) -> u64 {
    a.mod_floor(&BigInt::from(m))
        .to_u64()
        .expect("residue is below the modulus")
}

/// Jacobi symbol `(a|n)` for odd `n >= 1`. For prime `n` this is the Legendre
/// symbol.
pub fn jacobi(a: i128, n: u64) -> Result<i8> {
    if n == 0 || n % 2 == 0 {
        return Err(Error::invalid(format!(
            "Jacobi symbol needs an odd positive modulus, got {n}"
        )));
    }
    let mut a = reduce(a, n);
    let mut n = n;
    let mut sign = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    Ok(if n == 1 { sign } else { 0 })
}

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality test for every `u64`.
///
/// Miller-Rabin with the first twelve primes as witnesses has no false
/// positives below 3.3 * 10^24, which covers the whole `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL_PRIMES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Extra condition a candidate prime must satisfy in [`find_primes`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrimePredicate {
    /// `jacobi(a, p) == value`.
    Jacobi { a: i128, value: i8 },
    /// `a` is not a q-th power modulo `p`. Candidates with `p | a` fail.
    NotQthPower { a: BigInt, q: u64 },
    /// `p` does not divide `n`.
    NotDividing { n: BigInt },
}

impl PrimePredicate {
    pub fn holds(&self, p: u64) -> bool {
        match self {
            PrimePredicate::Jacobi { a, value } => p % 2 == 1 && jacobi(*a, p).ok() == Some(*value),
            PrimePredicate::NotQthPower { a, q } => {
                matches!(is_qth_power_residue(a, *q, p), Ok(false))
            }
            PrimePredicate::NotDividing { n } => reduce_big(n, p) != 0,
        }
    }
}

impl fmt::Display for PrimePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimePredicate::Jacobi { a, value } => write!(f, "jacobi({a}, p) = {value}"),
            PrimePredicate::NotQthPower { a, q } => write!(f, "{a} is not a {q}-th power mod p"),
            PrimePredicate::NotDividing { n } => write!(f, "p does not divide {n}"),
        }
    }
}

/// Description of a bounded prime search: congruence conditions, an exclusive
/// lower bound, an inclusive upper bound and extra predicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSearchSpec {
    /// `(r, n)` pairs meaning `p ≡ r (mod n)`.
    pub residue_conditions: Vec<(u64, u64)>,
    pub lower_bound: u64,
    pub predicates: Vec<PrimePredicate>,
    pub search_limit: u64,
}

impl Default for PrimeSearchSpec {
    fn default() -> Self {
        PrimeSearchSpec {
            residue_conditions: Vec::new(),
            lower_bound: 0,
            predicates: Vec::new(),
            search_limit: DEFAULT_SEARCH_LIMIT,
        }
    }
}

impl PrimeSearchSpec {
    pub fn congruent(mut self, r: u64, n: u64) -> Self {
        self.residue_conditions.push((r, n));
        self
    }

    pub fn above(mut self, lower_bound: u64) -> Self {
        self.lower_bound = lower_bound;
        self
    }

    pub fn with(mut self, predicate: PrimePredicate) -> Self {
        self.predicates.push(predicate);
        self
    }

    pub fn limit(mut self, search_limit: u64) -> Self {
        self.search_limit = search_limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for &(r, n) in &self.residue_conditions {
            if n < 2 {
                return Err(Error::invalid(format!("modulus {n} must be at least 2")));
            }
            if r.gcd(&n) != 1 {
                return Err(Error::invalid(format!(
                    "residue {r} is not coprime to modulus {n}"
                )));
            }
        }
        if self.lower_bound >= self.search_limit {
            return Err(Error::invalid(format!(
                "lower bound {} must be below the search limit {}",
                self.lower_bound, self.search_limit
            )));
        }
        Ok(())
    }
}

/// Result of [`find_primes`]. Fewer primes than requested means the search
/// limit was hit first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSearchOutcome {
    pub primes: Vec<u64>,
    pub requested: usize,
}

impl PrimeSearchOutcome {
    pub fn shortfall(&self) -> usize {
        self.requested.saturating_sub(self.primes.len())
    }

    pub fn is_complete(&self) -> bool {
        self.shortfall() == 0
    }
}

/// Merges congruences `x ≡ r (mod n)` whose moduli need not be coprime.
/// Returns `None` when they are inconsistent.
fn merge_congruences(conds: &[(u64, u64)]) -> Option<(u128, u128)> {
    let mut r: i128 = 0;
    let mut m: i128 = 1;
    for &(r2, m2) in conds {
        let (r2, m2) = (r2 as i128 % m2 as i128, m2 as i128);
        let g = m.gcd(&m2);
        if (r2 - r) % g != 0 {
            return None;
        }
        let ext = (m / g).extended_gcd(&(m2 / g));
        // x = r + m * t with m*t ≡ r2 - r (mod m2)
        let step = m2 / g;
        let t = (((r2 - r) / g) % step * (ext.x % step)).rem_euclid(step);
        r += m * t;
        m *= step;
        r = r.rem_euclid(m);
    }
    Some((r as u128, m as u128))
}

/// Returns the `count` smallest primes `p` with `lower_bound < p <= search_limit`
/// satisfying every congruence and predicate, in increasing order.
pub fn find_primes(spec: &PrimeSearchSpec, count: usize) -> Result<PrimeSearchOutcome> {
    spec.validate()?;
    let (r, m) =
        merge_congruences(&spec.residue_conditions).ok_or(Error::InconsistentCongruences)?;
    let mut primes = Vec::with_capacity(count);
    let lower = spec.lower_bound as u128;
    // first member of the progression strictly above lower_bound
    let mut candidate = if lower < r {
        r
    } else {
        r + ((lower - r) / m + 1) * m
    };
    while primes.len() < count && candidate <= spec.search_limit as u128 {
        let p = candidate as u64;
        if is_prime(p) && spec.predicates.iter().all(|pred| pred.holds(p)) {
            primes.push(p);
        }
        candidate += m;
    }
    Ok(PrimeSearchOutcome {
        primes,
        requested: count,
    })
}

/// Chinese remainder combination of `(residue, modulus)` pairs with pairwise
/// coprime moduli. Returns the residue in `[0, M)` and `M`, the product of the
/// moduli.
pub fn crt_combine(pairs: &[(BigInt, BigInt)]) -> Result<(BigInt, BigInt)> {
    let mut r = BigInt::zero();
    let mut m = BigInt::one();
    for (i, (ri, mi)) in pairs.iter().enumerate() {
        if mi < &BigInt::from(2) {
            return Err(Error::invalid(format!("modulus {mi} must be at least 2")));
        }
        for (_, mj) in &pairs[..i] {
            if !mi.gcd(mj).is_one() {
                return Err(Error::NotCoprime(mj.to_string(), mi.to_string()));
            }
        }
        let ext = m.extended_gcd(mi);
        // m * ext.x ≡ 1 (mod mi)
        let t = ((ri - &r) * ext.x).mod_floor(mi);
        r += &m * t;
        m *= mi;
    }
    Ok((r.mod_floor(&m), m))
}

/// Whether `a` is a q-th power modulo the prime `p`, where `q` is a prime
/// dividing `p - 1` and `p ∤ a`.
///
/// Uses Euler's criterion `a^((p-1)/q) ≡ 1`. Under these hypotheses a negative
/// answer also means `x^q - a` is irreducible over `F_p`.
pub fn is_qth_power_residue(a: &BigInt, q: u64, p: u64) -> Result<bool> {
    if !is_prime(p) || !is_prime(q) {
        return Err(Error::invalid(format!("{q} and {p} must both be prime")));
    }
    if (p - 1) % q != 0 {
        return Err(Error::invalid(format!("{q} does not divide {p} - 1")));
    }
    let a = reduce_big(a, p);
    if a == 0 {
        return Err(Error::invalid(format!("{p} divides the base")));
    }
    Ok(pow_mod(a, (p - 1) / q, p) == 1)
}

/// Whether `a` is a perfect k-th power of an integer (negative roots allowed
/// for odd `k`).
pub fn is_perfect_power(a: &BigInt, k: u32) -> bool {
    assert!(k >= 1);
    if a.is_negative() {
        return k % 2 == 1 && is_perfect_power(&-a, k);
    }
    let root = a.nth_root(k);
    root.pow(k) == *a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi(-1, 13).unwrap(), 1);
        assert_eq!(jacobi(0, 7).unwrap(), 0);
        assert_eq!(jacobi(2, 13).unwrap(), -1);
        assert!((1..13u64).all(|x| x * x % 13 != 2));
    }

    #[test]
    fn jacobi_rejects_even_modulus() {
        assert!(jacobi(3, 8).is_err());
        assert!(jacobi(3, 0).is_err());
    }

    #[test]
    fn legendre_counts_half_the_classes() {
        for p in (3..=997u64).filter(|&p| trial_division(p)) {
            let residues = (1..p)
                .filter(|&a| jacobi(a as i128, p).unwrap() == 1)
                .count();
            assert_eq!(residues as u64, (p - 1) / 2, "p = {p}");
            let squares: std::collections::BTreeSet<u64> = (1..p).map(|x| x * x % p).collect();
            for a in 1..p {
                assert_eq!(squares.contains(&a), jacobi(a as i128, p).unwrap() == 1);
            }
        }
    }

    #[test]
    fn primality_matches_trial_division() {
        assert!(is_prime(13));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert_eq!(is_prime(59281), trial_division(59281));
        for n in 0..20_000u64 {
            assert_eq!(is_prime(n), trial_division(n), "n = {n}");
        }
        // strong pseudoprimes to several small bases
        for n in [
            3_215_031_751u64,
            2_152_302_898_747,
            3_474_749_660_383,
            341_550_071_728_321,
        ] {
            assert!(!is_prime(n), "{n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn find_primes_in_progressions() {
        let spec = PrimeSearchSpec::default().congruent(5, 8);
        assert_eq!(find_primes(&spec, 3).unwrap().primes, vec![5, 13, 29]);

        let spec = PrimeSearchSpec::default()
            .congruent(1, 4)
            .above(5)
            .with(PrimePredicate::Jacobi { a: -2, value: -1 });
        assert_eq!(find_primes(&spec, 1).unwrap().primes, vec![13]);

        let spec = PrimeSearchSpec::default()
            .congruent(1, 3)
            .above(81)
            .with(PrimePredicate::NotQthPower { a: big(-4), q: 3 });
        assert_eq!(find_primes(&spec, 1).unwrap().primes, vec![97]);
        assert_eq!(pow_mod(reduce(-4, 97), 32, 97), 61);
    }

    #[test]
    fn find_primes_reports_shortfall() {
        let spec = PrimeSearchSpec::default().congruent(1, 4).limit(30);
        let out = find_primes(&spec, 10).unwrap();
        assert_eq!(out.primes, vec![5, 13, 17, 29]);
        assert_eq!(out.shortfall(), 6);
    }

    #[test]
    fn find_primes_rejects_bad_specs() {
        let spec = PrimeSearchSpec::default().congruent(1, 4).congruent(3, 8);
        assert_eq!(find_primes(&spec, 1), Err(Error::InconsistentCongruences));
        let spec = PrimeSearchSpec::default().congruent(2, 4);
        assert!(find_primes(&spec, 1).is_err());
        let spec = PrimeSearchSpec::default().above(100).limit(50);
        assert!(find_primes(&spec, 1).is_err());
    }

    #[test]
    fn find_primes_with_compatible_noncoprime_moduli() {
        let spec = PrimeSearchSpec::default().congruent(1, 4).congruent(5, 8);
        assert_eq!(find_primes(&spec, 2).unwrap().primes, vec![5, 13]);
    }

    #[test]
    fn crt_examples() {
        let pairs = |v: &[(i64, i64)]| v.iter().map(|&(r, m)| (big(r), big(m))).collect::<Vec<_>>();
        assert_eq!(
            crt_combine(&pairs(&[(0, 13), (0, 15)])).unwrap(),
            (big(0), big(195))
        );
        let (r, m) = crt_combine(&pairs(&[(1, 13), (0, 15), (0, 16), (0, 19)])).unwrap();
        assert_eq!(m, big(59280));
        assert_eq!(r, big(18240));
        for (res, md) in [(1, 13), (0, 15), (0, 16), (0, 19)] {
            assert_eq!(r.mod_floor(&big(md)), big(res));
        }
        assert!(matches!(
            crt_combine(&pairs(&[(2, 4), (1, 6)])),
            Err(Error::NotCoprime(..))
        ));
    }

    #[test]
    fn qth_power_examples() {
        assert!(is_qth_power_residue(&big(1), 3, 13).unwrap());
        assert!(!is_qth_power_residue(&big(-4), 3, 97).unwrap());
        assert!(is_qth_power_residue(&big(8), 3, 13).unwrap());
        assert!(is_qth_power_residue(&big(8), 3, 11).is_err());
        assert!(is_qth_power_residue(&big(13), 3, 13).is_err());
    }

    #[test]
    fn qth_power_matches_enumeration() {
        for p in (3..=500u64).filter(|&p| is_prime(p)) {
            for q in (3..p).filter(|&q| is_prime(q) && (p - 1) % q == 0) {
                let powers: std::collections::BTreeSet<u64> =
                    (1..p).map(|x| pow_mod(x, q, p)).collect();
                for a in 1..p {
                    assert_eq!(
                        is_qth_power_residue(&big(a as i64), q, p).unwrap(),
                        powers.contains(&a),
                        "a={a} q={q} p={p}"
                    );
                }
            }
        }
    }

    #[test]
    fn perfect_powers() {
        assert!(is_perfect_power(&big(-64), 3));
        assert!(!is_perfect_power(&big(-4), 3));
        assert!(!is_perfect_power(&big(-64), 2));
        assert!(is_perfect_power(&big(4096), 2));
        assert!(!is_perfect_power(&big(4096), 5));
    }
}
