use bertrand_core::sample::{random_allocation, random_kind, random_menu, random_population, trial_rng};
use bertrand_core::*;
use proptest::prelude::*;
use rand::Rng;

fn sampled(seed: u64, n: usize) -> Scenario<Exact> {
    let mut rng = trial_rng(seed, 0);
    let pop = random_population(&mut rng, n);
    let kind = random_kind(&mut rng);
    let alloc = random_allocation(&mut rng, &pop, kind);
    let profile = OfferProfile::new(random_menu(&mut rng, &pop), random_menu(&mut rng, &pop));
    let theta = Exact::ratio(rng.gen_range(0..=4), 4);
    let mut s = Scenario::new(pop).with_allocation(alloc).with_profile(&profile);
    s.policy = TiePolicy::new(theta, rng.gen_bool(0.5)).unwrap();
    s
}

proptest! {
    #[test]
    fn exact_round_trip_is_identical(seed in any::<u64>(), n in 1usize..=12) {
        let s = sampled(seed, n);
        let back = Scenario::<Exact>::parse(&s.to_toml()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn float_round_trip_is_identical(seed in any::<u64>(), n in 1usize..=12) {
        let e = sampled(seed, n);
        let mut s = Scenario::new(e.population.convert::<f64>())
            .with_allocation(e.allocation.as_ref().unwrap().convert())
            .with_profile(&e.profile().unwrap().unwrap().convert());
        s.policy = e.policy.convert();
        let back = Scenario::<f64>::parse(&s.to_toml()).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn non_dyadic_rationals_survive() {
    let third = Exact::ratio(1, 3);
    let pop = MarketPopulation::new(vec![third.clone(), Exact::ratio(2, 3)], vec![Exact::ratio(1, 7); 2]).unwrap();
    let f1 = FirmAllocation::vacant(2).with(1, IndexSet::interval(third.clone(), Exact::ratio(5, 6)).unwrap(), third);
    let s = Scenario::new(pop).with_allocation(Allocation::new(f1, FirmAllocation::vacant(2)));
    let text = s.to_toml();
    assert!(text.contains("\"1/3\""), "{text}");
    assert_eq!(Scenario::<Exact>::parse(&text).unwrap(), s);
}

#[test]
fn invalid_allocation_parses_and_is_diagnosed() {
    let text = r#"
version = 1
[population]
levels = ["1/4", "1/2"]
masses = [1, 1]
[[allocation.firm1]]
level = "1/4"
wage = "1/4"
intervals = [[0, 1]]
[[allocation.firm1]]
level = "1/2"
wage = "1/8"
intervals = [[0, 1]]
[[menu.firm2]]
level = "1/4"
wage = "1/2"
intervals = [[0, 1]]
[[menu.firm2]]
level = "1/2"
wage = "1/4"
intervals = [[0, 1]]
"#;
    let s = Scenario::<Exact>::parse(text).unwrap();
    let violations = validate_allocation(s.allocation.as_ref().unwrap(), &s.population);
    assert!(violations.iter().any(|v| v.level() == Some(1)));
    assert_eq!(s.menu_violations(), vec![(Firm::Two, 1)]);
    assert!(s.profile().unwrap().is_err());
}
