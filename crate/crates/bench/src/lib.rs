//! Workloads shared by the benchmarks in `benches/`.

use bertrand_core::sample::{random_allocation, random_menu, random_population, trial_rng, AllocationKind};
use bertrand_core::{Allocation, Exact, MarketPopulation, OfferMenu};

/// `count` scrambled allocations on `n`-level markets.
pub fn allocations(n: usize, count: u64, seed: u64) -> Vec<(MarketPopulation<Exact>, Allocation<Exact>)> {
    (0..count)
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let pop = random_population(&mut rng, n);
            let alloc = random_allocation(&mut rng, &pop, AllocationKind::Scrambled);
            (pop, alloc)
        })
        .collect()
}

/// `count` random rival menus on `n`-level markets.
pub fn rival_menus(n: usize, count: u64, seed: u64) -> Vec<(MarketPopulation<Exact>, OfferMenu<Exact>)> {
    (0..count)
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let pop = random_population(&mut rng, n);
            let menu = random_menu(&mut rng, &pop);
            (pop, menu)
        })
        .collect()
}
