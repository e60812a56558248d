//! Named reproduction checks with runtime budgets, shared by the `verify-paper`
//! command and the acceptance tests, plus the construction pipeline that
//! feeds local solutions into [`build_separating_set`].

use std::time::{Duration, Instant};

use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intset::{amplify, image_cardinality, FiniteIntSet, LinearForm};
use crate::modular::{
    build_separating_set, crt_product, modular_image_cardinality, rectify, sandwich_bounds,
    BuildOptions, ConstructionReport, LocalSolution, ResidueSet, StopRule,
};
use crate::numtheory::{is_prime, jacobi, DEFAULT_SEARCH_LIMIT};
use crate::residue_constructions::{
    coverage, kth_power_local_solutions, power_subgroup, qr_local_solutions, qr_sum_diff_full,
    zero_in_f_of_qr,
};
use crate::small_sets::{
    ap_equality_set, classify_triples, conjugate_four_set_witness, default_triple_bound,
    five_set_witness, predicted_exceptional_triples,
};

const FOUR_MODULI_JSON: &str = include_str!("../data/four_moduli_locals.json");

/// Where the construction pipeline takes its local solutions from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source", content = "residues")]
pub enum LocalSource {
    /// Quadratic residues modulo primes found by search.
    Qr,
    /// k-th power subgroups modulo primes found by search.
    Kpower,
    /// Explicit residue sets, measured by enumeration.
    Given(Vec<ResidueSet>),
}

/// Report of one pipeline run; `shortfall` counts primes the search did not
/// find within its limit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub report: ConstructionReport,
    pub requested: usize,
    pub shortfall: usize,
    /// Subgroup exponent for searched sources.
    pub k: Option<u64>,
}

pub const DEFAULT_PIPELINE_COUNT: usize = 40;

pub fn construct(
    f: &LinearForm,
    g: &LinearForm,
    source: &LocalSource,
    count: usize,
    options: &BuildOptions,
) -> Result<PipelineReport> {
    let (locals, requested, shortfall, k) = match source {
        LocalSource::Given(sets) => {
            let locals: Vec<LocalSolution> = sets
                .iter()
                .map(|r| LocalSolution::measure(f, g, r.clone()))
                .collect();
            (locals, sets.len(), 0, None)
        }
        LocalSource::Qr | LocalSource::Kpower => {
            let batch = if *source == LocalSource::Qr {
                qr_local_solutions(f, g, count, DEFAULT_SEARCH_LIMIT)?
            } else {
                kth_power_local_solutions(f, g, count, DEFAULT_SEARCH_LIMIT)?
            };
            let shortfall = batch.shortfall();
            (batch.solutions, count, shortfall, Some(batch.k))
        }
    };
    let report = build_separating_set(f, g, locals, options)?;
    Ok(PipelineReport {
        report,
        requested,
        shortfall,
        k,
    })
}

/// Inputs the checks read from outside the code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    /// `R_13, R_15, R_16, R_19` for `f = 2x + y` against `x + y`.
    pub four_moduli: Vec<ResidueSet>,
    /// Local solutions requested from each searched source in the pipeline check.
    pub pipeline_count: usize,
    /// Seed for the randomized checks.
    pub seed: u64,
}

impl Fixture {
    pub fn with_four_moduli_json(text: &str) -> Result<Self> {
        Ok(Fixture {
            four_moduli: serde_json::from_str(text)?,
            ..Fixture::default()
        })
    }
}

impl Default for Fixture {
    fn default() -> Self {
        Fixture {
            four_moduli: serde_json::from_str(FOUR_MODULI_JSON).expect("bundled fixture parses"),
            pipeline_count: DEFAULT_PIPELINE_COUNT,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Check {
    pub id: u8,
    pub group: &'static str,
    pub name: &'static str,
    pub budget: Duration,
}

const fn check(id: u8, group: &'static str, name: &'static str, budget_ms: u64) -> Check {
    Check {
        id,
        group,
        name,
        budget: Duration::from_millis(budget_ms),
    }
}

pub const CHECKS: [Check; 11] = [
    check(1, "mstd", "more sums than differences", 1),
    check(2, "four-moduli", "four-moduli cardinalities", 5_000),
    check(3, "triples", "exceptional triples", 10_000),
    check(4, "four-sets", "conjugate four-element witnesses", 1_000),
    check(5, "five-sets", "five-element witnesses", 5_000),
    check(6, "intervals", "intervals with equal images", 1_000),
    check(
        7,
        "amplification",
        "amplification squares image sizes",
        5_000,
    ),
    check(
        8,
        "crt",
        "CRT multiplicativity and rectification sandwich",
        5_000,
    ),
    check(9, "quadratic-residues", "quadratic residue images", 30_000),
    check(10, "coverage", "subgroup coverage", 60_000),
    check(11, "pipeline", "end-to-end construction", 120_000),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: u8,
    pub group: String,
    pub name: String,
    /// The mathematical claim held.
    pub holds: bool,
    pub elapsed_ms: f64,
    pub budget_ms: u64,
    pub detail: String,
}

impl CheckResult {
    pub fn within_budget(&self) -> bool {
        self.elapsed_ms <= self.budget_ms as f64
    }

    pub fn passed(&self) -> bool {
        self.holds && self.within_budget()
    }

    /// One line: status, id, group, name, timing and detail.
    pub fn line(&self) -> String {
        let status = match (self.holds, self.within_budget()) {
            (true, true) => "PASS",
            (true, false) => "FAIL (over budget)",
            _ => "FAIL",
        };
        format!(
            "{status} [{:>2}] {:<18} {} ({:.1} ms of {} ms): {}",
            self.id, self.group, self.name, self.elapsed_ms, self.budget_ms, self.detail
        )
    }
}

type Outcome = std::result::Result<String, String>;

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn card(f: &LinearForm, a: &FiniteIntSet) -> std::result::Result<usize, String> {
    image_cardinality(f, a).map_err(fail)
}

fn form(u: i64, v: i64) -> LinearForm {
    LinearForm::binary(u, v).expect("nonzero coefficients")
}

fn check_mstd() -> Outcome {
    let a = FiniteIntSet::from([0, 2, 3, 4, 7, 11, 12, 14]);
    let d = card(&LinearForm::difference(), &a)?;
    let s = card(&LinearForm::sum(), &a)?;
    let detail = format!("|A-A| = {d}, |A+A| = {s}");
    if (d, s) == (25, 26) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn check_four_moduli(fixture: &Fixture) -> Outcome {
    let r = crt_product(&fixture.four_moduli).map_err(fail)?;
    let a = rectify(&r, 1);
    let f = card(&form(2, 1), &a)?;
    let s = card(&LinearForm::sum(), &a)?;
    let detail = format!("|A| = {}, |f(A)| = {f}, |A+A| = {s}", a.len());
    if r.modulus() == 59280 && (a.len(), f, s) == (2646, 108014, 114575) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Normalized binary forms `ux + vy` with `u` in the given range.
fn normalized_forms(us: std::ops::RangeInclusive<i64>) -> Vec<LinearForm> {
    us.flat_map(|u| {
        (-u..=u)
            .filter(move |&v| v != 0 && u.gcd(&v) == 1)
            .map(move |v| form(u, v))
    })
    .collect()
}

fn check_triples() -> Outcome {
    let forms = normalized_forms(2..=10);
    for f in &forms {
        // twice the bound the classifier needs, so the search also covers
        // triples the theorem says cannot be exceptional
        let bound = 2 * default_triple_bound(f).map_err(fail)?;
        let got = classify_triples(f, bound).map_err(fail)?.exceptional;
        let want = predicted_exceptional_triples(f).map_err(fail)?;
        if got != want {
            return Err(format!("{f}: found {got:?}, expected {want:?}"));
        }
        let cards: Vec<usize> = got.iter().map(|t| t.cardinality).collect();
        let shape_ok = match f.as_binary() {
            Some((2, _)) => {
                got.iter().map(|t| t.set.clone()).collect::<Vec<_>>()
                    == vec![FiniteIntSet::from([0, 1, 2]), FiniteIntSet::from([0, 1, 3])]
                    && cards == vec![7, 8]
            }
            _ => cards == vec![8, 8],
        };
        if !shape_ok {
            return Err(format!("{f}: unexpected exceptional triples {got:?}"));
        }
    }
    Ok(format!("{} forms classified", forms.len()))
}

fn coprime_pairs(max_u: i64) -> impl Iterator<Item = (i64, i64)> {
    (2..=max_u).flat_map(|u| (1..u).filter(move |&v| u.gcd(&v) == 1).map(move |v| (u, v)))
}

fn check_four_sets() -> Outcome {
    let mut n = 0;
    for (u, v) in coprime_pairs(20) {
        let w = conjugate_four_set_witness(u, v).map_err(fail)?;
        let (f, g) = (form(u, v), form(u, -v));
        let got = (
            card(&f, &w.a)?,
            card(&g, &w.a)?,
            card(&f, &w.b)?,
            card(&g, &w.b)?,
        );
        let want = if u == 2 {
            (13, 12, 13, 14)
        } else {
            (14, 13, 13, 14)
        };
        if got != want || w.a.len() != 4 || w.b.len() != 4 {
            return Err(format!("({u},{v}): got {got:?}, expected {want:?}"));
        }
        n += 1;
    }
    Ok(format!("{n} pairs"))
}

fn check_five_sets() -> Outcome {
    let mut n = 0;
    let mut worst = 0;
    for (u, v) in coprime_pairs(50) {
        let w = five_set_witness(u, v).map_err(fail)?;
        let d = card(&LinearForm::difference(), &w.set)?;
        let f = card(&form(u, v), &w.set)?;
        if w.set.len() != 5 || d != 21 || f > 19 {
            return Err(format!("({u},{v}): |f(A)| = {f}, |A-A| = {d}"));
        }
        worst = worst.max(f);
        n += 1;
    }
    Ok(format!("{n} pairs, largest |f(A)| = {worst}"))
}

fn check_intervals() -> Outcome {
    let mut n = 0;
    for (u, v) in coprime_pairs(12) {
        for t in 1..=u {
            let a = ap_equality_set(u, v, t).map_err(fail)?;
            let want = (t * t) as usize;
            let got = (card(&form(u, v), &a)?, card(&form(u, -v), &a)?);
            if got != (want, want) {
                return Err(format!("({u},{v}), t = {t}: got {got:?}, expected {want}"));
            }
            n += 1;
        }
    }
    Ok(format!("{n} (u, v, t) triples"))
}

fn random_coeff(rng: &mut ChaCha8Rng, max: i64) -> i64 {
    let c = rng.gen_range(1..=max);
    if rng.gen_bool(0.5) {
        -c
    } else {
        c
    }
}

fn check_amplification(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..20 {
        let f = form(random_coeff(&mut rng, 5), random_coeff(&mut rng, 5));
        let g = form(random_coeff(&mut rng, 5), random_coeff(&mut rng, 5));
        let size = rng.gen_range(1..=12);
        let a: FiniteIntSet = (0..size).map(|_| rng.gen_range(-40i64..=40)).collect();
        let amp = amplify(&f, &g, &a).map_err(fail)?;
        let (fa, ga) = (card(&f, &a)?, card(&g, &a)?);
        let (fm, gm) = (card(&f, &amp.set)?, card(&g, &amp.set)?);
        if (fm, gm) != (fa * fa, ga * ga) {
            return Err(format!(
                "instance {i}: {f}, {g} on {a}: ({fm}, {gm}) vs squares of ({fa}, {ga})"
            ));
        }
    }
    Ok("20 instances".into())
}

fn random_residues(rng: &mut ChaCha8Rng, m: u64) -> ResidueSet {
    let size = rng.gen_range(1..=m as usize);
    let mut all: Vec<u64> = (0..m).collect();
    all.shuffle(rng);
    all.truncate(size);
    ResidueSet::new(m, all).expect("classes below the modulus")
}

fn check_crt(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    while done < 100 {
        let k = rng.gen_range(2..=3);
        let mut moduli: Vec<u64> = Vec::new();
        while moduli.len() < k {
            let m = rng.gen_range(2..=30u64);
            if moduli.iter().all(|&x| x.gcd(&m) == 1) {
                moduli.push(m);
            }
        }
        let f = form(random_coeff(&mut rng, 5), random_coeff(&mut rng, 5));
        let locals: Vec<ResidueSet> = moduli
            .iter()
            .map(|&m| random_residues(&mut rng, m))
            .collect();
        let r = crt_product(&locals).map_err(fail)?;
        let product: usize = locals
            .iter()
            .map(|l| modular_image_cardinality(&f, l))
            .product();
        let got = modular_image_cardinality(&f, &r);
        if got != product {
            return Err(format!(
                "{f} on moduli {moduli:?}: |f(R)| = {got}, product {product}"
            ));
        }
        done += 1;
    }
    for i in 0..100 {
        let m = rng.gen_range(2..=60u64);
        let f = form(random_coeff(&mut rng, 5), random_coeff(&mut rng, 5));
        let r = random_residues(&mut rng, m);
        let (lo, hi) = sandwich_bounds(&f, &r);
        for start in [0, 1] {
            let fa = card(&f, &rectify(&r, start))? as u128;
            if fa < lo || fa > hi {
                return Err(format!(
                    "instance {i}: {f} on {r}, window {start}: {fa} outside [{lo}, {hi}]"
                ));
            }
        }
    }
    Ok("100 CRT products, 100 sandwiches in both windows".into())
}

fn check_quadratic_residues() -> Outcome {
    let mut primes = 0;
    for p in (13..=997u64).filter(|&p| p % 4 == 1 && is_prime(p)) {
        if !qr_sum_diff_full(p).map_err(fail)? {
            return Err(format!(
                "s or d misses a class on the quadratic residues mod {p}"
            ));
        }
        primes += 1;
    }
    let mut cases = 0;
    for p in (3..=200u64).filter(|&p| is_prime(p)) {
        for u in 1..=10i64 {
            for v in (-u..=u).filter(|&v| v != 0 && u.gcd(&v) == 1) {
                if (u * v).unsigned_abs() % p == 0 {
                    continue;
                }
                let zero = zero_in_f_of_qr(u, v, p).map_err(fail)?;
                let j = jacobi(-(u as i128) * v as i128, p).map_err(fail)?;
                if zero != (j == 1) {
                    return Err(format!("({u},{v}) mod {p}: zero {zero}, jacobi {j}"));
                }
                cases += 1;
            }
        }
    }
    Ok(format!(
        "{primes} primes with full s and d, {cases} zero-membership cases"
    ))
}

fn check_coverage() -> Outcome {
    let forms: [(i64, i64); 4] = [(1, 1), (1, -1), (2, 1), (3, 2)];
    let mut reports = 0;
    for k in [2u64, 3] {
        for p in (k.pow(4) + 1..=2000).filter(|&p| p % k == 1 && is_prime(p)) {
            let h = power_subgroup(p, k).map_err(fail)?;
            for (u, v) in forms {
                if (u * v).unsigned_abs() % p == 0 {
                    continue;
                }
                let rep = coverage(&form(u, v), &h).map_err(fail)?;
                let n = h.order() as u64;
                if !rep.covered_nonzero || !rep.coset_constant() || rep.total() != n * n {
                    return Err(format!(
                        "({u},{v}) on {k}-th powers mod {p}: covered {}, coset constant {}, total {}",
                        rep.covered_nonzero,
                        rep.coset_constant(),
                        rep.total()
                    ));
                }
                reports += 1;
            }
        }
    }
    Ok(format!("{reports} coverage reports"))
}

fn describe(label: &str, run: &PipelineReport) -> String {
    let r = &run.report;
    let ratio = r.ratio_product.numer().to_f64().unwrap_or(f64::NAN)
        / r.ratio_product.denom().to_f64().unwrap_or(f64::NAN);
    let cards = match (r.f_card, r.g_card) {
        (Some(f), Some(g)) => format!(", |f(A)| = {f}, |g(A)| = {g}"),
        _ => String::new(),
    };
    format!(
        "{label}: {:?} after {} locals, ratio product {ratio:.4} vs {}{cards}",
        r.outcome,
        r.locals.len(),
        r.target_threshold
    )
}

/// Largest combined modulus for which the pipeline check also builds `A`
/// from a prefix of the local solutions and compares images directly.
pub const DIRECT_MODULUS_CAP: u64 = 10_000_000;

fn pipeline_case(
    label: &str,
    f: &LinearForm,
    g: &LinearForm,
    source: LocalSource,
    count: usize,
) -> (bool, String) {
    let run = match construct(f, g, &source, count, &BuildOptions::default()) {
        Ok(run) => run,
        Err(e) => return (false, format!("{label}: {e}")),
    };
    let mut detail = describe(label, &run);
    if run.report.is_success() {
        return (true, detail);
    }
    let mut modulus = 1u64;
    let prefix: Vec<LocalSolution> = run
        .report
        .locals
        .iter()
        .take_while(|l| match modulus.checked_mul(l.modulus()) {
            Some(m) if m <= DIRECT_MODULUS_CAP => {
                modulus = m;
                true
            }
            _ => false,
        })
        .cloned()
        .collect();
    if prefix.is_empty() {
        return (false, detail);
    }
    let options = BuildOptions {
        stop: StopRule::Direct,
        ..BuildOptions::default()
    };
    match build_separating_set(f, g, prefix, &options) {
        Ok(direct) => {
            let cards = match (direct.f_card, direct.g_card) {
                (Some(fa), Some(ga)) => format!("|f(A)| = {fa}, |g(A)| = {ga}"),
                _ => "not built".into(),
            };
            detail.push_str(&format!(
                "; direct on moduli {:?}: {:?}, {cards}",
                direct.moduli(),
                direct.outcome
            ));
            (direct.is_success(), detail)
        }
        Err(e) => (false, format!("{detail}; direct: {e}")),
    }
}

fn check_pipeline(fixture: &Fixture) -> Outcome {
    let n = fixture.pipeline_count;
    let (qr_ok, qr) = pipeline_case("qr", &form(2, 1), &LinearForm::sum(), LocalSource::Qr, n);
    let (kp_ok, kp) = pipeline_case(
        "kpower",
        &form(2, 1),
        &LinearForm::difference(),
        LocalSource::Kpower,
        n,
    );
    let detail = format!("{qr}; {kp}");
    if qr_ok && kp_ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Runs one check by id and times it.
pub fn run_check(check: &Check, fixture: &Fixture) -> CheckResult {
    let start = Instant::now();
    let outcome = match check.id {
        1 => check_mstd(),
        2 => check_four_moduli(fixture),
        3 => check_triples(),
        4 => check_four_sets(),
        5 => check_five_sets(),
        6 => check_intervals(),
        7 => check_amplification(fixture.seed),
        8 => check_crt(fixture.seed),
        9 => check_quadratic_residues(),
        10 => check_coverage(),
        11 => check_pipeline(fixture),
        id => Err(format!("no check with id {id}")),
    };
    let elapsed = start.elapsed();
    let (holds, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CheckResult {
        id: check.id,
        group: check.group.into(),
        name: check.name.into(),
        holds,
        elapsed_ms: elapsed.as_secs_f64() * 1e3,
        budget_ms: check.budget.as_millis() as u64,
        detail,
    }
}

/// Looks up a check by group name or numeric id.
pub fn find_check(key: &str) -> Option<&'static Check> {
    CHECKS
        .iter()
        .find(|c| c.group == key || key.parse::<u8>().ok() == Some(c.id))
}

/// Runs the selected checks (all when `only` is empty) in order.
pub fn run(fixture: &Fixture, only: &[String]) -> Result<Vec<CheckResult>> {
    let selected: Vec<&Check> = if only.is_empty() {
        CHECKS.iter().collect()
    } else {
        only.iter()
            .map(|k| find_check(k).ok_or_else(|| Error::invalid(format!("unknown check '{k}'"))))
            .collect::<Result<_>>()?
    };
    Ok(selected
        .into_iter()
        .map(|c| run_check(c, fixture))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        assert_eq!(find_check("mstd").unwrap().id, 1);
        assert_eq!(find_check("10").unwrap().group, "coverage");
        assert!(find_check("sec4").is_none());
        assert!(run(&Fixture::default(), &["nope".into()]).is_err());
    }

    #[test]
    fn corrupted_fixture_fails_by_name() {
        let json = FOUR_MODULI_JSON.replace("[0, 1, 6, 7, 9, 11]", "[0, 1, 6, 7, 9, 12]");
        let fixture = Fixture::with_four_moduli_json(&json).unwrap();
        let res = run(&fixture, &["four-moduli".into()]).unwrap();
        assert_eq!(res.len(), 1);
        assert!(!res[0].holds);
        assert!(res[0].line().contains("four-moduli cardinalities"));
    }

    #[test]
    fn given_source_reproduces_the_fixture() {
        let options = BuildOptions {
            stop: StopRule::Direct,
            window_start: 1,
            ..BuildOptions::default()
        };
        let run = construct(
            &form(2, 1),
            &LinearForm::sum(),
            &LocalSource::Given(Fixture::default().four_moduli),
            0,
            &options,
        )
        .unwrap();
        assert_eq!(run.report.f_card, Some(108014));
        assert_eq!(run.report.g_card, Some(114575));
        assert!(run.report.is_success());
    }
}
