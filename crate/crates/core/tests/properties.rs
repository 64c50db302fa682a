use bertrand_core::sample::{random_allocation, random_kind, random_menu, random_population, trial_rng};
use bertrand_core::*;
use proptest::prelude::*;
use rand::Rng;

fn q(n: i64, d: i64) -> Exact {
    Exact::ratio(n, d)
}

fn market(seed: u64, n: usize) -> (MarketPopulation<Exact>, Allocation<Exact>) {
    let mut rng = trial_rng(seed, n as u64);
    let pop = random_population(&mut rng, n);
    let kind = random_kind(&mut rng);
    let alloc = random_allocation(&mut rng, &pop, kind);
    (pop, alloc)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn block_alternatives_are_valid_allocations(seed in any::<u64>(), n in 1usize..=10) {
        let (pop, alloc) = market(seed, n);
        if let Ok(Some(p)) = find_block(&alloc, &pop, &BlockConfig::new(q(0, 1))) {
            prop_assert!(p.alternative.violations(p.blocker, &pop).is_empty());
        }
    }

    #[test]
    fn induced_allocations_are_valid(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = trial_rng(seed, 0);
        let pop = random_population(&mut rng, n);
        let profile = OfferProfile::new(random_menu(&mut rng, &pop), random_menu(&mut rng, &pop));
        let theta = q(rng.gen_range(0..=4), 4);
        let policy = TiePolicy::new(theta, rng.gen_bool(0.5)).unwrap();
        let alloc = induce_allocation(&profile, &pop, &policy).unwrap();
        prop_assert!(validate_allocation(&alloc, &pop).is_empty());
    }

    #[test]
    fn best_responses_are_monotone_and_nonnegative(seed in any::<u64>(), n in 1usize..=12) {
        let mut rng = trial_rng(seed, 1);
        let pop = random_population(&mut rng, n);
        let rival = random_menu(&mut rng, &pop);
        let params = BestResponseParams::new(q(1, 1024)).unwrap();
        for firm in Firm::BOTH {
            let br = best_response(firm, &rival, &pop, &params);
            prop_assert!(br.menu.is_monotone());
            prop_assert!(br.profit >= q(0, 1));
        }
    }

    #[test]
    fn unemployment_gain_dominates_interval_bound(seed in any::<u64>(), n in 2usize..=10) {
        let (pop, alloc) = market(seed, n);
        let case = CaseLabel::UnderemployedAtProductivity;
        if let Ok(Some(p)) = find_block_in_case(&alloc, &pop, &BlockConfig::new(q(0, 1)), case) {
            let get = |k: &str| p.parameter(k).unwrap().clone();
            let pm = get("p") * get("mu_interval");
            let bound = get("delta") * pm.clone() * get("epsilon") + q(1, 2) * pm.clone() * pm * get("epsilon");
            prop_assert!(verify_block(&alloc, &p, &pop).gain() >= bound);
        }
    }

    #[test]
    fn duopsony_gain_dominates_its_bound(seed in any::<u64>(), n in 2usize..=10) {
        let (pop, alloc) = market(seed, n);
        let case = CaseLabel::DuopsonyUnderpay;
        if let Ok(Some(p)) = find_block_in_case(&alloc, &pop, &BlockConfig::new(q(0, 1)), case) {
            let get = |k: &str| p.parameter(k).unwrap().clone();
            let (e, e1) = (get("epsilon"), get("epsilon_prime"));
            let bound = (e.clone() - e1.clone()) * e * get("mass_flagged") - e1 * get("payroll");
            prop_assert!(verify_block(&alloc, &p, &pop).gain() >= bound);
        }
    }
}
