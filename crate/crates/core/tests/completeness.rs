use bertrand_core::sample::{random_allocation, random_kind, random_population, trial_rng};
use bertrand_core::*;
use rand::Rng;

fn check<S: Scalar>(alloc: &Allocation<S>, pop: &MarketPopulation<S>, tol: S) -> Result<(), String> {
    assert!(validate_allocation(alloc, pop).is_empty());
    let bertrand = is_bertrand(alloc, pop, &tol).holds();
    let cfg = BlockConfig::new(tol.clone());
    match find_block(alloc, pop, &cfg) {
        Ok(None) if bertrand => Ok(()),
        Ok(Some(p)) if !bertrand => {
            let v = verify_block(alloc, &p, pop);
            if v.valid {
                Ok(())
            } else {
                Err(format!("unverified {} proposal", p.case_label))
            }
        }
        other => Err(format!(
            "bertrand={bertrand} outcome={:?} hits={:?}",
            other.map(|o| o.map(|p| p.case_label)),
            classify_non_bertrand(alloc, pop, &tol)
        )),
    }
}

#[test]
fn find_block_is_sound_and_complete_on_random_allocations() {
    for trial in 0..1500u64 {
        let mut rng = trial_rng(11, trial);
        let n = rng.gen_range(2..=16);
        let pop = random_population(&mut rng, n);
        let kind = random_kind(&mut rng);
        let alloc = random_allocation(&mut rng, &pop, kind);
        let res = if trial % 2 == 0 {
            check(&alloc, &pop, Exact::ratio(0, 1))
        } else {
            check(&alloc.convert::<f64>(), &pop.convert::<f64>(), 1e-9)
        };
        if let Err(e) = res {
            panic!(
                "trial {trial} ({kind:?}, n={n}): {e}\npop={:?}\nalloc={:?}",
                pop.levels(),
                alloc
            );
        }
    }
}
