//! Local solutions built from multiplicative subgroups of `F_p^×`: quadratic
//! residues and, more generally, the subgroup of k-th powers.
//!
//! For `p > k^4` every nonzero residue is `u h_1 + v h_2` with `h_1, h_2` in
//! the k-th power subgroup `H` (assuming `p ∤ uv`). So `|f(H)|` is `p - 1` or
//! `p`, depending only on whether `0 ∈ f(H)`, and `0 ∈ f(H)` holds exactly when
//! `-u^{k-1} v` is a k-th power mod `p`. Prime searches pick `p` so that this
//! fails for `f` and holds for `g`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intset::LinearForm;
use crate::modular::{modular_image_cardinality, LocalSolution, ResidueSet};
use crate::numtheory::{
    find_primes, is_perfect_power, is_prime, jacobi, mul_mod, pow_mod, reduce, PrimePredicate,
    PrimeSearchSpec,
};

/// Subgroups up to this order have their images enumerated; above it the
/// coverage theorem plus a zero-membership test decide the image size.
pub const ENUMERATION_LIMIT: usize = 10_000;

/// The subgroup `{x^k : x ∈ F_p^×}` of order `(p - 1)/k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerSubgroup {
    pub p: u64,
    pub k: u64,
    /// Sorted elements.
    pub classes: Vec<u64>,
    /// A generator of the subgroup.
    pub generator: u64,
}

impl PowerSubgroup {
    pub fn order(&self) -> usize {
        self.classes.len()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.classes.binary_search(&x).is_ok()
    }

    pub fn to_residue_set(&self) -> ResidueSet {
        ResidueSet::new(self.p, self.classes.clone()).expect("subgroup classes lie in [1, p-1]")
    }

    fn membership(&self) -> Vec<bool> {
        let mut member = vec![false; self.p as usize];
        for &h in &self.classes {
            member[h as usize] = true;
        }
        member
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest primitive root modulo the prime `p`.
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let factors = prime_factors(p - 1);
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("every prime has a primitive root")
}

/// The k-th power subgroup of `F_p^×`; `k` must divide `p - 1`.
pub fn power_subgroup(p: u64, k: u64) -> Result<PowerSubgroup> {
    if !is_prime(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    if k == 0 || (p - 1) % k != 0 {
        return Err(Error::invalid(format!("{k} does not divide {p} - 1")));
    }
    let generator = pow_mod(primitive_root(p), k, p);
    let order = (p - 1) / k;
    let mut classes = Vec::with_capacity(order as usize);
    let mut x = 1;
    for _ in 0..order {
        classes.push(x);
        x = mul_mod(x, generator, p);
    }
    debug_assert_eq!(x, 1);
    classes.sort_unstable();
    Ok(PowerSubgroup {
        p,
        k,
        classes,
        generator,
    })
}

/// The nonzero quadratic residues modulo an odd prime.
pub fn quadratic_residues(p: u64) -> Result<PowerSubgroup> {
    if p == 2 {
        return Err(Error::invalid("quadratic residues need an odd prime"));
    }
    power_subgroup(p, 2)
}

fn binary_coeffs(f: &LinearForm) -> Result<(i64, i64)> {
    f.as_binary()
        .ok_or_else(|| Error::invalid(format!("{f} is not a binary form")))
}

fn require_coprime_to_form(f: &LinearForm, p: u64) -> Result<(u64, u64)> {
    let (u, v) = binary_coeffs(f)?;
    let (ur, vr) = (reduce(u as i128, p), reduce(v as i128, p));
    if ur == 0 || vr == 0 {
        return Err(Error::invalid(format!("{p} divides a coefficient of {f}")));
    }
    Ok((ur, vr))
}

fn inverse(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Whether `0 ∈ f(H)`, by checking each `h_2 ∈ H` for a partner `h_1 = -v h_2 / u`.
pub fn zero_in_image(f: &LinearForm, h: &PowerSubgroup) -> Result<bool> {
    let (u, v) = require_coprime_to_form(f, h.p)?;
    let p = h.p;
    let factor = mul_mod(p - v, inverse(u, p), p);
    let member = h.membership();
    Ok(h.classes
        .iter()
        .any(|&h2| member[mul_mod(factor, h2, p) as usize]))
}

/// `s(R_p) = d(R_p) = Z/pZ` for the quadratic residues `R_p`, checked by
/// enumeration. Needs a prime `p ≡ 1 (mod 4)` with `p > 5`.
pub fn qr_sum_diff_full(p: u64) -> Result<bool> {
    if !is_prime(p) || p % 4 != 1 || p <= 5 {
        return Err(Error::invalid(format!(
            "need a prime p ≡ 1 (mod 4) above 5, got {p}"
        )));
    }
    let r = quadratic_residues(p)?.to_residue_set();
    Ok([LinearForm::sum(), LinearForm::difference()]
        .iter()
        .all(|g| modular_image_cardinality(g, &r) as u64 == p))
}

/// Whether `0 ∈ f(R_p)` for `f = ux + vy` and the quadratic residues `R_p`.
/// This holds exactly when `jacobi(-uv, p) = 1`.
pub fn zero_in_f_of_qr(u: i64, v: i64, p: u64) -> Result<bool> {
    if p == 2 || !is_prime(p) {
        return Err(Error::invalid(format!("{p} is not an odd prime")));
    }
    zero_in_image(&LinearForm::binary(u, v)?, &quadratic_residues(p)?)
}

/// Representation counts of a binary form on a power subgroup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub form: LinearForm,
    pub p: u64,
    pub k: u64,
    pub order: usize,
    /// `F_p^× ⊆ f(H)`.
    pub covered_nonzero: bool,
    pub zero_covered: bool,
    /// `r(x) = #{(h_1, h_2) ∈ H² : f(h_1, h_2) = x}`, indexed by `x`.
    pub representation_counts: Vec<u64>,
    /// Subgroup generator, used by [`CoverageReport::coset_constant`].
    pub generator: u64,
}

impl CoverageReport {
    pub fn total(&self) -> u64 {
        self.representation_counts.iter().sum()
    }

    /// `r(x) = r(xh)` for all `x ≠ 0` and `h ∈ H`. Checking the generator of
    /// the cyclic group `H` suffices.
    pub fn coset_constant(&self) -> bool {
        (1..self.p).all(|x| {
            self.representation_counts[x as usize]
                == self.representation_counts[mul_mod(x, self.generator, self.p) as usize]
        })
    }
}

/// Enumerates `r(x)` over `H × H`. When `p > k^4` the coverage theorem
/// guarantees `F_p^× ⊆ f(H)`; a report contradicting it is an
/// [`Error::Verification`].
pub fn coverage(f: &LinearForm, h: &PowerSubgroup) -> Result<CoverageReport> {
    let (u, v) = require_coprime_to_form(f, h.p)?;
    if h.order() < 2 {
        return Err(Error::invalid(
            "coverage needs a subgroup of order at least 2",
        ));
    }
    let p = h.p;
    let vh: Vec<u64> = h.classes.iter().map(|&x| mul_mod(v, x, p)).collect();
    let counts = h
        .classes
        .par_iter()
        .fold(
            || vec![0u64; p as usize],
            |mut acc, &h1| {
                let base = mul_mod(u, h1, p);
                for &y in &vh {
                    let s = base + y;
                    acc[(if s >= p { s - p } else { s }) as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; p as usize],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let report = CoverageReport {
        form: f.clone(),
        p,
        k: h.k,
        order: h.order(),
        covered_nonzero: counts[1..].iter().all(|&c| c > 0),
        zero_covered: counts[0] > 0,
        representation_counts: counts,
        generator: h.generator,
    };
    if (p as u128) > (h.k as u128).pow(4) && !report.covered_nonzero {
        return Err(Error::Verification(format!(
            "{f} misses a nonzero class on the {}-th powers mod {p}",
            h.k
        )));
    }
    Ok(report)
}

/// `|f(H)|` with how it was obtained: enumeration for subgroups up to
/// [`ENUMERATION_LIMIT`], otherwise the coverage theorem (which needs
/// `p > k^4`) plus [`zero_in_image`].
pub fn subgroup_image_card(f: &LinearForm, h: &PowerSubgroup) -> Result<(u64, bool)> {
    require_coprime_to_form(f, h.p)?;
    if h.order() <= ENUMERATION_LIMIT || (h.p as u128) <= (h.k as u128).pow(4) {
        return Ok((
            modular_image_cardinality(f, &h.to_residue_set()) as u64,
            true,
        ));
    }
    Ok((h.p - 1 + zero_in_image(f, h)? as u64, false))
}

fn local_solution(f: &LinearForm, g: &LinearForm, h: &PowerSubgroup) -> Result<LocalSolution> {
    let (f_card, f_enum) = subgroup_image_card(f, h)?;
    let (g_card, g_enum) = subgroup_image_card(g, h)?;
    let residues = h.to_residue_set();
    Ok(if f_enum && g_enum {
        LocalSolution {
            residues,
            f_card,
            g_card,
            certification: crate::modular::Certification::Enumerated,
        }
    } else {
        LocalSolution::certified(residues, f_card, g_card)
    })
}

/// Local solutions from one prime search, with the shortfall if the search
/// limit was reached first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalBatch {
    pub solutions: Vec<LocalSolution>,
    pub requested: usize,
    /// The exponent `k` of the subgroups used.
    pub k: u64,
    /// The integer whose non-residuosity modulo each prime keeps `0 ∉ f(H)`.
    #[serde(with = "crate::intset::io::bigint_string")]
    pub excluded_base: BigInt,
}

impl LocalBatch {
    pub fn shortfall(&self) -> usize {
        self.requested.saturating_sub(self.solutions.len())
    }

    pub fn primes(&self) -> Vec<u64> {
        self.solutions.iter().map(LocalSolution::modulus).collect()
    }
}

fn check_f_misses_zero(f: &LinearForm, sol: &LocalSolution) -> Result<()> {
    let p = sol.modulus();
    if sol.f_card != p - 1 {
        return Err(Error::Verification(format!(
            "{f} has {} classes on the subgroup mod {p}, expected {}",
            sol.f_card,
            p - 1
        )));
    }
    Ok(())
}

/// Quadratic-residue local solutions for a normalized `f = ux + vy` with `|uv|`
/// not a perfect square: primes `p ≡ 1 (mod 4)`, `p > 5`, with
/// `jacobi(-uv, p) = -1`, so `0 ∉ f(R_p)` and `|f(R_p)| = p - 1`.
pub fn qr_local_solutions(
    f: &LinearForm,
    g: &LinearForm,
    count: usize,
    search_limit: u64,
) -> Result<LocalBatch> {
    if !f.is_normalized() {
        return Err(Error::invalid(format!("{f} is not normalized")));
    }
    let (u, v) = binary_coeffs(f)?;
    let uv = u as i128 * v as i128;
    if is_perfect_power(&BigInt::from(uv.abs()), 2) {
        return Err(Error::invalid(format!(
            "|uv| = {} is a perfect square",
            uv.abs()
        )));
    }
    let spec = PrimeSearchSpec::default()
        .congruent(1, 4)
        .above(5)
        .with(PrimePredicate::Jacobi { a: -uv, value: -1 })
        .limit(search_limit);
    let found = find_primes(&spec, count)?;
    let solutions = found
        .primes
        .par_iter()
        .map(|&p| {
            debug_assert_eq!(jacobi(-uv, p).ok(), Some(-1));
            let sol = local_solution(f, g, &quadratic_residues(p)?)?;
            check_f_misses_zero(f, &sol)?;
            Ok(sol)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalBatch {
        solutions,
        requested: count,
        k: 2,
        excluded_base: BigInt::from(-uv),
    })
}

/// Smallest odd prime `q` for which `a = -u^{q-1} v` is not a perfect q-th
/// power, together with `a`.
pub fn select_exponent(u: i64, v: i64) -> Result<(u64, BigInt)> {
    if u.abs() < 2 {
        return Err(Error::invalid("exponent selection needs |u| >= 2"));
    }
    let (ub, vb) = (BigInt::from(u), BigInt::from(v));
    for q in (3u64..10_000).step_by(2).filter(|&q| is_prime(q)) {
        let a = -(ub.pow((q - 1) as u32)) * &vb;
        if !is_perfect_power(&a, q as u32) {
            return Ok((q, a));
        }
    }
    Err(Error::Verification(format!(
        "-u^(q-1) v is a q-th power for every odd prime q below 10^4 with (u, v) = ({u}, {v})"
    )))
}

/// k-th power local solutions for a normalized `f = ux + vy` with `u > |v|`.
///
/// With `q` from [`select_exponent`], takes primes `p ≡ 1 (mod q)`, `p > q^4`,
/// `p ∤ uv`, for which `a = -u^{q-1} v` is not a q-th power mod `p`. Then
/// `0 ∉ f(H)` while every nonzero class is covered, so `|f(H)| = p - 1`.
pub fn kth_power_local_solutions(
    f: &LinearForm,
    g: &LinearForm,
    count: usize,
    search_limit: u64,
) -> Result<LocalBatch> {
    if !f.is_normalized() {
        return Err(Error::invalid(format!("{f} is not normalized")));
    }
    let (u, v) = binary_coeffs(f)?;
    if u <= v.abs() {
        return Err(Error::invalid(format!("need u > |v|, got {f}")));
    }
    let (q, a) = select_exponent(u, v)?;
    let lower = (q as u128)
        .pow(4)
        .to_u64()
        .ok_or_else(|| Error::invalid("exponent too large"))?;
    let spec = PrimeSearchSpec::default()
        .congruent(1, q)
        .above(lower)
        .with(PrimePredicate::NotDividing {
            n: BigInt::from(u) * v,
        })
        .with(PrimePredicate::NotQthPower { a: a.clone(), q })
        .limit(search_limit);
    let found = find_primes(&spec, count)?;
    let solutions = found
        .primes
        .par_iter()
        .map(|&p| {
            let sol = local_solution(f, g, &power_subgroup(p, q)?)?;
            check_f_misses_zero(f, &sol)?;
            Ok(sol)
        })
        .collect::<Result<Vec<_>>>()?;
    debug_assert!(solutions.iter().all(|s| s.modulus().gcd(&q) == 1));
    Ok(LocalBatch {
        solutions,
        requested: count,
        k: q,
        excluded_base: a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(u: i64, v: i64) -> LinearForm {
        LinearForm::binary(u, v).unwrap()
    }

    #[test]
    fn subgroup_examples() {
        assert_eq!(
            quadratic_residues(13).unwrap().classes,
            vec![1, 3, 4, 9, 10, 12]
        );
        assert_eq!(quadratic_residues(5).unwrap().classes, vec![1, 4]);
        assert_eq!(power_subgroup(13, 3).unwrap().classes, vec![1, 5, 8, 12]);
        assert_eq!(
            power_subgroup(13, 1).unwrap().classes,
            (1..13).collect::<Vec<_>>()
        );
        assert_eq!(power_subgroup(97, 3).unwrap().order(), 32);
        assert!(power_subgroup(13, 5).is_err());
        assert!(power_subgroup(15, 2).is_err());
        assert!(quadratic_residues(2).is_err());
    }

    #[test]
    fn qr_membership_matches_jacobi() {
        let h = quadratic_residues(29).unwrap();
        for a in 1..29u64 {
            assert_eq!(h.contains(a), jacobi(a as i128, 29).unwrap() == 1);
        }
    }

    #[test]
    fn sum_diff_full() {
        assert!(qr_sum_diff_full(13).unwrap());
        assert!(qr_sum_diff_full(17).unwrap());
        assert!(qr_sum_diff_full(5).is_err());
        assert!(qr_sum_diff_full(19).is_err());
    }

    #[test]
    fn zero_membership_examples() {
        assert!(!zero_in_f_of_qr(2, 1, 13).unwrap());
        assert!(zero_in_f_of_qr(1, 1, 13).unwrap());
        for p in [3, 7, 11, 13, 101] {
            assert!(zero_in_f_of_qr(1, -1, p).unwrap());
        }
        assert!(zero_in_f_of_qr(3, 1, 3).is_err());
    }

    #[test]
    fn coverage_examples() {
        let h = power_subgroup(97, 3).unwrap();
        let rep = coverage(&form(2, 1), &h).unwrap();
        assert!(rep.covered_nonzero);
        assert!(!rep.zero_covered);
        assert_eq!(rep.total(), 32 * 32);
        assert!(rep.coset_constant());

        assert!(coverage(&form(1, 1), &h).unwrap().zero_covered);
        let h = power_subgroup(13, 3).unwrap();
        assert!(
            coverage(&LinearForm::difference(), &h)
                .unwrap()
                .zero_covered
        );
        assert!(coverage(&form(13, 1), &h).is_err());
    }

    #[test]
    fn exponent_selection() {
        assert_eq!(select_exponent(2, 1).unwrap(), (3, BigInt::from(-4)));
        assert_eq!(select_exponent(3, 2).unwrap(), (3, BigInt::from(-18)));
        assert_eq!(select_exponent(2, -1).unwrap(), (3, BigInt::from(4)));
        // -8^2 * 1 = -64 is a cube, so q moves on to 5
        assert_eq!(select_exponent(8, 1).unwrap().0, 5);
    }

    #[test]
    fn qr_locals_for_2_1() {
        let batch = qr_local_solutions(&form(2, 1), &LinearForm::sum(), 3, 1_000_000).unwrap();
        assert_eq!(batch.primes(), vec![13, 29, 37]);
        for sol in &batch.solutions {
            let p = sol.modulus();
            assert_eq!(p % 8, 5);
            assert_eq!((sol.f_card, sol.g_card), (p - 1, p));
        }
        assert!(qr_local_solutions(&form(4, 1), &LinearForm::sum(), 1, 1000).is_err());
    }

    #[test]
    fn qr_locals_for_3_1() {
        let batch =
            qr_local_solutions(&form(3, 1), &LinearForm::difference(), 4, 1_000_000).unwrap();
        for p in batch.primes() {
            assert_eq!(p % 4, 1);
            assert_eq!(jacobi(-3, p).unwrap(), -1);
            assert_eq!(jacobi(p as i128, 3).unwrap(), -1);
        }
    }

    #[test]
    fn kth_power_locals() {
        let batch = kth_power_local_solutions(&form(2, 1), &LinearForm::difference(), 2, 1_000_000)
            .unwrap();
        assert_eq!(batch.k, 3);
        assert_eq!(batch.primes()[0], 97);
        for sol in &batch.solutions {
            assert_eq!((sol.f_card, sol.g_card), (sol.modulus() - 1, sol.modulus()));
        }
        let batch =
            kth_power_local_solutions(&form(3, 2), &LinearForm::sum(), 1, 1_000_000).unwrap();
        let p = batch.primes()[0];
        assert!(p > 81 && p % 3 == 1);
        let rep = coverage(&form(3, 2), &power_subgroup(p, 3).unwrap()).unwrap();
        assert!(rep.covered_nonzero && !rep.zero_covered);
        assert!(kth_power_local_solutions(&form(1, 1), &LinearForm::sum(), 1, 1000).is_err());
    }

    #[test]
    fn shortfall_is_reported() {
        let batch = qr_local_solutions(&form(2, 1), &LinearForm::sum(), 10, 60).unwrap();
        assert_eq!(batch.primes(), vec![13, 29, 37, 53]);
        assert_eq!(batch.shortfall(), 6);
    }

    #[test]
    fn large_subgroups_use_the_theorem() {
        // order (p-1)/2 above the enumeration limit
        let p = 20_029;
        assert!(is_prime(p) && p % 8 == 5);
        let h = quadratic_residues(p).unwrap();
        assert!(h.order() > ENUMERATION_LIMIT);
        let (card, enumerated) = subgroup_image_card(&form(2, 1), &h).unwrap();
        assert!(!enumerated);
        assert_eq!(card, p - 1);
        let exact = modular_image_cardinality(&form(2, 1), &h.to_residue_set()) as u64;
        assert_eq!(card, exact);
    }
}
