//! Local-to-global construction: combine local solutions by CRT, rectify to
//! integers, and compare the two forms on the resulting set.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::residue_set::{crt_product, modular_image_cardinality, rectify, ResidueSet};
use crate::error::{Error, Result};
use crate::intset::{image_cardinality, FiniteIntSet, LinearForm};

/// How the local image sizes of a [`LocalSolution`] were established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certification {
    /// Both images enumerated.
    Enumerated,
    /// Sizes follow from a coverage theorem plus an explicit zero-membership test.
    Theorem,
}

/// A residue set together with `|f(R_m)|` and `|g(R_m)|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalSolution {
    pub residues: ResidueSet,
    pub f_card: u64,
    pub g_card: u64,
    pub certification: Certification,
}

impl LocalSolution {
    /// Enumerates both images.
    pub fn measure(f: &LinearForm, g: &LinearForm, residues: ResidueSet) -> Self {
        LocalSolution {
            f_card: modular_image_cardinality(f, &residues) as u64,
            g_card: modular_image_cardinality(g, &residues) as u64,
            residues,
            certification: Certification::Enumerated,
        }
    }

    pub(crate) fn certified(residues: ResidueSet, f_card: u64, g_card: u64) -> Self {
        LocalSolution {
            residues,
            f_card,
            g_card,
            certification: Certification::Theorem,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.residues.modulus()
    }

    /// `|f(R)| / |g(R)|`.
    pub fn ratio(&self) -> BigRational {
        BigRational::new(self.f_card.into(), self.g_card.into())
    }
}

/// When [`build_separating_set`] stops consuming local solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop once `Π |f(R_i)|/|g(R_i)| < 1/(2 h_f)`, which forces `|f(A)| < |g(A)|`.
    #[default]
    Threshold,
    /// Combine every given local solution and compare the integer images
    /// directly, whatever the ratio product is.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub stop: StopRule,
    /// Start of the representative window `[start, start + m - 1]`.
    pub window_start: i64,
    /// Largest global set that will be materialized.
    pub materialize_cap: u64,
    /// Largest estimated kernel cost (pair sums or bitset word operations)
    /// spent on integer images of the global set.
    pub image_work_cap: u128,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            stop: StopRule::Threshold,
            window_start: 0,
            materialize_cap: 10_000_000,
            image_work_cap: 20_000_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// The global set was built and `|f(A)| < |g(A)|` was computed directly.
    Separated,
    /// The ratio product fell below `1/(2 h_f)`, so
    /// `|f(A)| ≤ 2 h_f |f(R)| < |g(R)| ≤ |g(A)|` without building `A`.
    Certified,
    /// The global set was built but `|f(A)| ≥ |g(A)|`.
    NotSeparated,
    /// Local solutions ran out before the ratio product reached the threshold.
    Exhausted,
    /// Direct comparison was requested but `A` is too large to build.
    TooLarge,
}

impl Outcome {
    pub fn is_success(self) -> bool {
        matches!(self, Outcome::Separated | Outcome::Certified)
    }
}

/// Everything known about one run of [`build_separating_set`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub form_f: LinearForm,
    pub form_g: LinearForm,
    pub stop: StopRule,
    pub locals: Vec<LocalSolution>,
    #[serde(with = "crate::intset::io::bigint_string")]
    pub combined_modulus: BigInt,
    /// `[start, start + m - 1]`.
    #[serde(with = "window_serde")]
    pub representative_window: (BigInt, BigInt),
    /// `|A| = Π |R_i|`.
    #[serde(with = "crate::intset::io::bigint_string")]
    pub set_size: BigInt,
    #[serde(skip)]
    pub set: Option<FiniteIntSet>,
    /// `|f(A)|`, when `A` was built.
    pub f_card: Option<u64>,
    /// `|g(A)|`, when `A` was built.
    pub g_card: Option<u64>,
    /// `2 h_f Π |f(R_i)|`, an upper bound for `|f(A)|`.
    #[serde(with = "crate::intset::io::bigint_string")]
    pub f_card_upper: BigInt,
    /// `Π |g(R_i)|`, a lower bound for `|g(A)|`.
    #[serde(with = "crate::intset::io::bigint_string")]
    pub g_card_lower: BigInt,
    #[serde(with = "rational_string")]
    pub ratio_product: BigRational,
    #[serde(with = "rational_string")]
    pub target_threshold: BigRational,
    pub threshold_met: bool,
    pub outcome: Outcome,
}

impl ConstructionReport {
    pub fn is_success(&self) -> bool {
        self.outcome.is_success()
    }

    pub fn moduli(&self) -> Vec<u64> {
        self.locals.iter().map(LocalSolution::modulus).collect()
    }
}

/// `1/(2 h_f)`.
pub fn target_threshold(f: &LinearForm) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2 * f.height()))
}

/// Estimated kernel cost of `|f(A)|` for a set of `n` elements spread over a
/// window of length `m`.
fn image_work(f: &LinearForm, n: u128, m: u128) -> u128 {
    let pairs = n.saturating_pow(f.arity() as u32);
    let bitset = n.saturating_mul(f.height().saturating_mul(m) / 64 + 1);
    pairs.min(bitset)
}

/// Consumes local solutions in order, combines them by CRT and rectifies the
/// product to an integer set `A` with `|f(A)| < |g(A)|` when possible.
///
/// With [`StopRule::Threshold`] consumption stops as soon as the exact ratio
/// product drops below `1/(2 h_f)`; running out first gives
/// [`Outcome::Exhausted`]. With [`StopRule::Direct`] every local solution is
/// used and the integer images decide. A materialized set that contradicts a
/// met threshold is reported as [`Error::Verification`].
pub fn build_separating_set<I>(
    f: &LinearForm,
    g: &LinearForm,
    locals: I,
    options: &BuildOptions,
) -> Result<ConstructionReport>
where
    I: IntoIterator<Item = LocalSolution>,
{
    if f.arity() != g.arity() {
        return Err(Error::invalid(format!(
            "{f} and {g} have different arities"
        )));
    }
    let threshold = target_threshold(f);
    let mut used: Vec<LocalSolution> = Vec::new();
    let mut product = BigRational::one();
    let mut threshold_met = false;
    for local in locals {
        if let Some(prev) = used
            .iter()
            .find(|u| num_integer::gcd(u.modulus(), local.modulus()) != 1)
        {
            return Err(Error::NotCoprime(
                prev.modulus().to_string(),
                local.modulus().to_string(),
            ));
        }
        if local.g_card == 0 {
            return Err(Error::invalid("local solution with empty g-image"));
        }
        product *= local.ratio();
        used.push(local);
        if options.stop == StopRule::Threshold && product < threshold {
            threshold_met = true;
            break;
        }
    }
    if options.stop == StopRule::Direct {
        threshold_met = product < threshold;
    }
    if used.is_empty() {
        return Err(Error::invalid("no local solutions given"));
    }

    let combined_modulus: BigInt = used.iter().map(|l| BigInt::from(l.modulus())).product();
    let set_size: BigInt = used
        .iter()
        .map(|l| BigInt::from(l.residues.len()))
        .product();
    let f_local: BigInt = used.iter().map(|l| BigInt::from(l.f_card)).product();
    let g_card_lower: BigInt = used.iter().map(|l| BigInt::from(l.g_card)).product();
    let start = BigInt::from(options.window_start);
    let window = (start.clone(), &start + &combined_modulus - 1);

    let mut report = ConstructionReport {
        form_f: f.clone(),
        form_g: g.clone(),
        stop: options.stop,
        locals: Vec::new(),
        f_card_upper: f_local * BigInt::from(2 * f.height()),
        g_card_lower,
        combined_modulus,
        representative_window: window,
        set_size,
        set: None,
        f_card: None,
        g_card: None,
        ratio_product: product,
        target_threshold: threshold,
        threshold_met,
        outcome: Outcome::Exhausted,
    };

    if options.stop == StopRule::Threshold && !threshold_met {
        report.locals = used;
        return Ok(report);
    }

    let size = report
        .set_size
        .to_u64()
        .filter(|&n| n <= options.materialize_cap);
    let modulus = report.combined_modulus.to_u64();
    let buildable = match (size, modulus) {
        (Some(n), Some(m)) => {
            let work = image_work(f, n as u128, m as u128).max(image_work(g, n as u128, m as u128));
            work <= options.image_work_cap && options.window_start.checked_add_unsigned(m).is_some()
        }
        _ => false,
    };
    if buildable {
        let residues: Vec<ResidueSet> = used.iter().map(|l| l.residues.clone()).collect();
        let a = rectify(&crt_product(&residues)?, options.window_start);
        let fa = image_cardinality(f, &a)? as u64;
        let ga = image_cardinality(g, &a)? as u64;
        report.f_card = Some(fa);
        report.g_card = Some(ga);
        report.set = Some(a);
        report.outcome = if fa < ga {
            Outcome::Separated
        } else {
            Outcome::NotSeparated
        };
        if threshold_met && fa >= ga {
            return Err(Error::Verification(format!(
                "ratio product {} is below the threshold but |f(A)| = {fa} >= |g(A)| = {ga}",
                report.ratio_product
            )));
        }
    } else if threshold_met {
        debug_assert!(report.f_card_upper < report.g_card_lower);
        report.outcome = Outcome::Certified;
    } else {
        report.outcome = Outcome::TooLarge;
    }
    report.locals = used;
    Ok(report)
}

pub(crate) mod rational_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

mod window_serde {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(w: &(BigInt, BigInt), s: S) -> Result<S::Ok, S::Error> {
        [w.0.to_string(), w.1.to_string()].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(BigInt, BigInt), D::Error> {
        let [a, b] = <[String; 2]>::deserialize(d)?;
        let parse = |s: String| s.parse::<BigInt>().map_err(serde::de::Error::custom);
        Ok((parse(a)?, parse(b)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(u: i64, v: i64) -> LinearForm {
        LinearForm::binary(u, v).unwrap()
    }

    #[test]
    fn full_rings_exhaust() {
        let (f, g) = (form(1, 1), form(1, 1));
        let locals =
            [5u64, 7, 11].map(|m| LocalSolution::measure(&f, &g, ResidueSet::full(m).unwrap()));
        let report = build_separating_set(&f, &g, locals, &BuildOptions::default()).unwrap();
        assert_eq!(report.outcome, Outcome::Exhausted);
        assert!(report.ratio_product.is_one());
        assert_eq!(
            report.target_threshold,
            BigRational::new(1.into(), 4.into())
        );
        assert!(!report.is_success());
    }

    #[test]
    fn rejects_shared_factors() {
        let f = form(2, 1);
        let locals =
            [6u64, 9].map(|m| LocalSolution::measure(&f, &f, ResidueSet::full(m).unwrap()));
        assert!(matches!(
            build_separating_set(&f, &f, locals, &BuildOptions::default()),
            Err(Error::NotCoprime(..))
        ));
    }

    #[test]
    fn threshold_certificate_without_building() {
        // artificial local solutions: f hits one class, g covers everything
        let (f, g) = (form(2, 1), form(1, 1));
        let locals: Vec<LocalSolution> = [7u64, 11, 13]
            .iter()
            .map(|&m| LocalSolution::certified(ResidueSet::full(m).unwrap(), 1, m))
            .collect();
        let opts = BuildOptions {
            materialize_cap: 5,
            ..BuildOptions::default()
        };
        let report = build_separating_set(&f, &g, locals.clone(), &opts).unwrap();
        // 1/7 is already below 1/6
        assert_eq!(report.locals.len(), 1);
        assert!(report.threshold_met);
        assert_eq!(report.outcome, Outcome::Certified);
        assert!(report.f_card_upper < report.g_card_lower);

        // the same bogus cards on a set small enough to build are caught
        assert!(matches!(
            build_separating_set(&f, &g, locals, &BuildOptions::default()),
            Err(Error::Verification(_))
        ));
    }

    #[test]
    fn report_json_round_trip() {
        let (f, g) = (form(2, 1), form(1, 1));
        let locals = vec![LocalSolution::measure(
            &f,
            &g,
            "13: 0,1,6,7,9,11".parse().unwrap(),
        )];
        let opts = BuildOptions {
            stop: StopRule::Direct,
            ..BuildOptions::default()
        };
        let report = build_separating_set(&f, &g, locals, &opts).unwrap();
        assert_eq!(report.ratio_product, BigRational::new(12.into(), 13.into()));
        let json = serde_json::to_string(&report).unwrap();
        let mut back: ConstructionReport = serde_json::from_str(&json).unwrap();
        back.set = report.set.clone();
        assert_eq!(back, report);
    }
}
