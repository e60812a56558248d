use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::construct::LocalSolution;
use super::residue_set::{modular_image_cardinality, ResidueSet};
use crate::error::{Error, Result};
use crate::intset::LinearForm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Total local moves, split evenly over the restarts.
    pub moves: usize,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            moves: 10_000,
            seed: 0,
            restarts: 4,
        }
    }
}

struct Walker<'a> {
    f: &'a LinearForm,
    g: &'a LinearForm,
    m: u64,
    member: Vec<bool>,
}

impl Walker<'_> {
    fn classes(&self) -> Vec<u64> {
        (0..self.m).filter(|&c| self.member[c as usize]).collect()
    }

    /// `|f(R)|` if `R` is nonempty and `g(R) = Z/mZ`.
    fn score(&self) -> Option<usize> {
        let classes = self.classes();
        if classes.is_empty() {
            return None;
        }
        let r = ResidueSet::from_sorted_unchecked(self.m, classes);
        (modular_image_cardinality(self.g, &r) as u64 == self.m)
            .then(|| modular_image_cardinality(self.f, &r))
    }
}

fn run_restart(
    f: &LinearForm,
    g: &LinearForm,
    m: u64,
    moves: usize,
    seed: u64,
) -> Option<(usize, Vec<u64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Walker {
        f,
        g,
        m,
        member: vec![true; m as usize],
    };
    let mut current = w.score()?;

    // greedy seeding: drop classes one at a time while that does not hurt
    let mut order: Vec<u64> = (0..m).collect();
    order.shuffle(&mut rng);
    for c in order {
        w.member[c as usize] = false;
        match w.score() {
            Some(s) if s <= current => current = s,
            _ => w.member[c as usize] = true,
        }
    }

    let mut best = (current, w.classes());
    for _ in 0..moves {
        let inside: Vec<u64> = (0..m).filter(|&c| w.member[c as usize]).collect();
        let outside: Vec<u64> = (0..m).filter(|&c| !w.member[c as usize]).collect();
        let mut flipped = Vec::with_capacity(2);
        match rng.gen_range(0..3) {
            0 if inside.len() > 1 => flipped.push(*inside.choose(&mut rng).unwrap()),
            1 if !outside.is_empty() => flipped.push(*outside.choose(&mut rng).unwrap()),
            _ if !outside.is_empty() => {
                flipped.push(*inside.choose(&mut rng).unwrap());
                flipped.push(*outside.choose(&mut rng).unwrap());
            }
            _ => continue,
        }
        for &c in &flipped {
            w.member[c as usize] ^= true;
        }
        match w.score() {
            // sideways moves let the walk cross plateaus
            Some(s) if s <= current => {
                current = s;
                let classes = w.classes();
                if (s, &classes) < (best.0, &best.1) {
                    best = (s, classes);
                }
            }
            _ => {
                for &c in &flipped {
                    w.member[c as usize] ^= true;
                }
            }
        }
    }
    Some(best)
}

/// Heuristic search for `R ⊆ Z/mZ` with `g(R) = Z/mZ` and `|f(R)|` as small
/// as possible.
///
/// Each restart seeds greedily from the full ring and then walks with random
/// add, remove and swap moves, accepting any move that keeps `g(R)` full and
/// does not grow `f(R)`. Restarts run in parallel and are merged by smallest
/// `|f(R)|`, then lexicographically smallest `R`, so the result depends only on
/// the budget. If `g` does not cover `Z/mZ` even on the full ring, the full
/// ring is returned with its own ratio.
pub fn local_ratio_search(
    f: &LinearForm,
    g: &LinearForm,
    m: u64,
    budget: &SearchBudget,
) -> Result<LocalSolution> {
    if m < 2 {
        return Err(Error::invalid(format!("modulus {m} must be at least 2")));
    }
    let restarts = budget.restarts.max(1);
    let per_restart = budget.moves / restarts;
    let best = (0..restarts as u64)
        .into_par_iter()
        .filter_map(|i| run_restart(f, g, m, per_restart, budget.seed.wrapping_add(i)))
        .min();
    let residues = match best {
        Some((_, classes)) => ResidueSet::from_sorted_unchecked(m, classes),
        None => ResidueSet::full(m)?,
    };
    Ok(LocalSolution::measure(f, g, residues))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn form(u: i64, v: i64) -> LinearForm {
        LinearForm::binary(u, v).unwrap()
    }

    #[test]
    fn finds_the_hand_built_ratios() {
        let (f, g) = (form(2, 1), form(1, 1));
        let sol = local_ratio_search(&f, &g, 13, &SearchBudget::default()).unwrap();
        assert_eq!(sol.g_card, 13);
        assert!(sol.ratio() <= BigRational::new(12.into(), 13.into()));

        let sol = local_ratio_search(&f, &g, 16, &SearchBudget::default()).unwrap();
        assert_eq!(sol.g_card, 16);
        assert!(sol.ratio() <= BigRational::new(15.into(), 16.into()));
    }

    #[test]
    fn equal_forms_give_ratio_one() {
        let f = form(3, -1);
        let sol = local_ratio_search(&f, &f, 11, &SearchBudget::default()).unwrap();
        assert_eq!(sol.f_card, sol.g_card);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let (f, g) = (form(2, 1), form(1, -1));
        let budget = SearchBudget {
            moves: 2_000,
            seed: 7,
            restarts: 3,
        };
        let a = local_ratio_search(&f, &g, 15, &budget).unwrap();
        let b = local_ratio_search(&f, &g, 15, &budget).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| local_ratio_search(&f, &g, 15, &budget).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn infeasible_g_returns_full_ring() {
        // 2x + 2y only reaches even classes modulo 8
        let sol =
            local_ratio_search(&form(1, 1), &form(2, 2), 8, &SearchBudget::default()).unwrap();
        assert!(sol.residues.is_full());
        assert_eq!(sol.g_card, 4);
    }
}
