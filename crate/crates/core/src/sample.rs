//! Seeded random markets and allocations.
//!
//! All sampled numbers are dyadic (levels `k/32`, masses `k/8`, index
//! fractions `k/4`, wages `k/64`), so they are exact in both backends and
//! float runs see the same instances as exact runs.
//!
//! Each trial draws from `ChaCha8Rng::seed_from_u64(seed)` with the stream set
//! to the trial id, which makes a trial reproducible on its own.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::index_set::IndexSet;
use crate::market::{Allocation, Firm, FirmAllocation, MarketPopulation, Offer, OfferMenu};
use crate::scalar::{self, Exact, Scalar};

/// The generator used for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn q(n: i64, d: i64) -> Exact {
    Exact::ratio(n, d)
}

/// What kind of allocation to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationKind {
    /// Full employment at productivity with random splits.
    Bertrand,
    /// A Bertrand allocation with one level perturbed.
    NearBertrand,
    /// Independent random shares and wages, repaired to be monotone.
    Scrambled,
}

/// `n` distinct positive levels from the grid `k/32`, with masses `k/8`.
pub fn random_population<R: Rng>(rng: &mut R, n: usize) -> MarketPopulation<Exact> {
    assert!((1..=32).contains(&n), "between 1 and 32 levels");
    let mut ks: Vec<usize> = sample(rng, 32, n).into_iter().map(|i| i + 1).collect();
    ks.sort_unstable();
    let levels = ks.iter().map(|&k| q(k as i64, 32)).collect();
    let masses = (0..n).map(|_| q(rng.gen_range(1..=8), 8)).collect();
    MarketPopulation::new(levels, masses).expect("sampled population is valid")
}

fn quarter(k: i64) -> Exact {
    q(k, 4)
}

/// Firm 1 takes `[0, a)`, firm 2 takes `[1 - b, 1)`.
fn layout(a: i64, b: i64) -> (IndexSet<Exact>, IndexSet<Exact>) {
    let left = IndexSet::interval(q(0, 1), quarter(a)).expect("quarter in range");
    let right = IndexSet::interval(q(1, 1) - quarter(b), q(1, 1)).expect("quarter in range");
    (left, right)
}

pub fn random_bertrand<R: Rng>(rng: &mut R, pop: &MarketPopulation<Exact>) -> Allocation<Exact> {
    let mut firms = [FirmAllocation::vacant(pop.len()), FirmAllocation::vacant(pop.len())];
    for k in 0..pop.len() {
        let a = rng.gen_range(0..=4);
        let (left, right) = layout(a, 4 - a);
        let v = pop.level(k).clone();
        if !left.is_empty() {
            firms[0].set(k, left, v.clone());
        }
        if !right.is_empty() {
            firms[1].set(k, right, v);
        }
    }
    let [f1, f2] = firms;
    Allocation::new(f1, f2)
}

fn random_wage<R: Rng>(rng: &mut R, v: &Exact) -> Exact {
    match rng.gen_range(0..4) {
        0 | 1 => v.clone(),
        2 => q(rng.gen_range(0..=64), 64),
        _ => {
            let below = (v.clone() * q(64, 1)).floor();
            let below = below.to_integer().try_into().unwrap_or(0i64);
            q(rng.gen_range(0..=below.max(0)), 64)
        }
    }
}

/// Raises wages to the running maximum over the hired support.
pub fn repair_monotone<S: Scalar>(fa: &mut FirmAllocation<S>) {
    let mut floor = S::zero();
    for k in 0..fa.len() {
        if !fa.is_employed(k) {
            continue;
        }
        if *fa.wage(k) < floor {
            let hired = fa.hired(k).clone();
            fa.set(k, hired, floor.clone());
        } else {
            floor = fa.wage(k).clone();
        }
    }
}

pub fn random_scrambled<R: Rng>(rng: &mut R, pop: &MarketPopulation<Exact>) -> Allocation<Exact> {
    let mut firms = [FirmAllocation::vacant(pop.len()), FirmAllocation::vacant(pop.len())];
    for k in 0..pop.len() {
        let a = rng.gen_range(0..=4);
        let b = rng.gen_range(0..=4 - a);
        let (left, right) = layout(a, b);
        let v = pop.level(k).clone();
        for (i, set) in [left, right].into_iter().enumerate() {
            if !set.is_empty() {
                let w = random_wage(rng, &v);
                firms[i].set(k, set, w);
            }
        }
    }
    for fa in &mut firms {
        repair_monotone(fa);
    }
    let [f1, f2] = firms;
    Allocation::new(f1, f2)
}

/// A Bertrand allocation with one level changed: a wage lowered or raised,
/// or part of one firm's workers released.
pub fn random_near_bertrand<R: Rng>(rng: &mut R, pop: &MarketPopulation<Exact>) -> Allocation<Exact> {
    let mut alloc = random_bertrand(rng, pop);
    let k = rng.gen_range(0..pop.len());
    let firm = if alloc.firm(Firm::One).is_employed(k) {
        Firm::One
    } else {
        Firm::Two
    };
    let fa = alloc.firm_mut(firm);
    let v = pop.level(k).clone();
    let hired = fa.hired(k).clone();
    match rng.gen_range(0..3) {
        0 => {
            let w = scalar::max(q(0, 1), v - q(rng.gen_range(1..=8), 64));
            fa.set(k, hired, w);
        }
        1 => fa.set(k, hired, v + q(rng.gen_range(1..=8), 64)),
        _ => {
            let (kept, _) = hired.split_leftmost(&q(rng.gen_range(0..=3), 4));
            if kept.is_empty() {
                fa.set(k, IndexSet::empty(), q(0, 1));
            } else {
                fa.set(k, kept, v);
            }
        }
    }
    repair_monotone(fa);
    alloc
}

pub fn random_allocation<R: Rng>(
    rng: &mut R,
    pop: &MarketPopulation<Exact>,
    kind: AllocationKind,
) -> Allocation<Exact> {
    match kind {
        AllocationKind::Bertrand => random_bertrand(rng, pop),
        AllocationKind::NearBertrand => random_near_bertrand(rng, pop),
        AllocationKind::Scrambled => random_scrambled(rng, pop),
    }
}

/// Draws the kind with weights 1:2:2 (Bertrand, near, scrambled).
pub fn random_kind<R: Rng>(rng: &mut R) -> AllocationKind {
    match rng.gen_range(0..5) {
        0 => AllocationKind::Bertrand,
        1 | 2 => AllocationKind::NearBertrand,
        _ => AllocationKind::Scrambled,
    }
}

/// A monotone menu: each level offered with probability 3/4 on a random
/// quarter-aligned interval, at wages drawn from `k/64` and repaired upward.
pub fn random_menu<R: Rng>(rng: &mut R, pop: &MarketPopulation<Exact>) -> OfferMenu<Exact> {
    let mut floor = q(0, 1);
    let mut slots = Vec::with_capacity(pop.len());
    for _ in 0..pop.len() {
        if rng.gen_range(0..4) == 0 {
            slots.push(Offer::none());
            continue;
        }
        let a = rng.gen_range(0..4);
        let b = rng.gen_range(a + 1..=4);
        let offered = IndexSet::interval(quarter(a), quarter(b)).expect("quarter in range");
        let w = scalar::max(floor.clone(), q(rng.gen_range(0..=64), 64));
        floor = w.clone();
        slots.push(Offer { offered, wage: w });
    }
    OfferMenu::new(slots).expect("repaired menu is monotone")
}
