//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bertrand_core::fixtures::{all_case_fixtures, case_config, fixture_populations, unemployment_family};
use bertrand_core::sample::{random_bertrand, random_menu, random_population, trial_rng};
use bertrand_core::*;
use rand::Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn q(n: i64, d: i64) -> Exact {
    Exact::ratio(n, d)
}

fn oracle_eta() -> Exact {
    q(1, 1_000_000_000)
}

/// Block completeness on sampled allocations.
fn random_completeness(report: &ExperimentReport, elapsed: Duration) -> Outcome {
    let s = &report.summary;
    let detail = format!(
        "{} trials ({} non-Bertrand, {} Bertrand), blocks {}/{}, no-block {}/{}, {:.1}s",
        s.trials,
        s.non_bertrand,
        s.bertrand,
        s.block_found_on_non_bertrand,
        s.non_bertrand,
        s.no_block_on_bertrand,
        s.bertrand,
        elapsed.as_secs_f64()
    );
    let mixed = report.rows.iter().any(|r| r.numeric == "exact") && report.rows.iter().any(|r| r.numeric == "float");
    let sizes = report.rows.iter().map(|r| r.n);
    let spans = sizes.clone().min() == Some(2) && sizes.max() == Some(16);
    if !s.failures.is_empty() {
        let first: Vec<_> = s.failures.iter().take(5).collect();
        return Err(format!("{detail}; failing trials {first:?}"));
    }
    if s.trials < 1000 || s.bertrand == 0 || s.non_bertrand == 0 || !mixed || !spans {
        return Err(format!("{detail}; sample does not cover the required range"));
    }
    if elapsed > Duration::from_secs(60) {
        return Err(format!("{detail}; over the 60 s budget"));
    }
    Ok(detail)
}

/// Per-level `(fraction1, fraction2, wage1, wage2)` choices on the lattice.
fn level_options(wages: &[Exact]) -> Vec<[(Exact, Exact); 2]> {
    let half = q(1, 2);
    let pairs = [
        (q(0, 1), q(0, 1)),
        (q(0, 1), half.clone()),
        (q(0, 1), q(1, 1)),
        (half.clone(), q(0, 1)),
        (half.clone(), half.clone()),
        (q(1, 1), q(0, 1)),
    ];
    let mut out = Vec::new();
    for (f1, f2) in pairs {
        let w1s: Vec<Exact> = if f1 > q(0, 1) { wages.to_vec() } else { vec![q(0, 1)] };
        let w2s: Vec<Exact> = if f2 > q(0, 1) { wages.to_vec() } else { vec![q(0, 1)] };
        for w1 in &w1s {
            for w2 in &w2s {
                out.push([(f1.clone(), w1.clone()), (f2.clone(), w2.clone())]);
            }
        }
    }
    out
}

fn lattice_allocations(pop: &MarketPopulation<Exact>, wages: &[Exact]) -> Vec<Allocation<Exact>> {
    let opts = level_options(wages);
    let n = pop.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let mut a = Allocation::vacant(n);
        for (k, &i) in idx.iter().enumerate() {
            let [(f1, w1), (f2, w2)] = &opts[i];
            if *f1 > q(0, 1) {
                a.firm_mut(Firm::One)
                    .set(k, IndexSet::interval(q(0, 1), f1.clone()).unwrap(), w1.clone());
            }
            if *f2 > q(0, 1) {
                let set = IndexSet::interval(f1.clone(), f1.clone() + f2.clone()).unwrap();
                a.firm_mut(Firm::Two).set(k, set, w2.clone());
            }
        }
        if validate_allocation(&a, pop).is_empty() {
            out.push(a);
        }
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            idx[k] += 1;
            if idx[k] < opts.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Oracle agreement on the exhaustive small lattice.
fn oracle_agreement() -> Outcome {
    let started = Instant::now();
    let wages = [q(0, 1), q(1, 4), q(1, 2), q(3, 4), q(1, 1)];
    let grids: [&[Exact]; 3] = [&[q(1, 2)], &[q(1, 2), q(1, 1)], &[q(1, 4), q(1, 2), q(3, 4)]];
    let mut total = 0usize;
    let mut bertrand = 0usize;
    let mut mismatches = Vec::new();
    for levels in grids {
        let n = levels.len();
        let pop = MarketPopulation::new(levels.to_vec(), vec![q(1, n as i64); n]).unwrap();
        let allocs = lattice_allocations(&pop, &wages);
        let results: Vec<(bool, Result<bool, OracleError>)> = allocs
            .par_iter()
            .map(|a| {
                let b = is_bertrand(a, &pop, &q(0, 1)).holds();
                let lattice = SearchLattice::for_allocation(a, &pop, &oracle_eta());
                (b, oracle_is_core(a, &pop, &lattice))
            })
            .collect();
        for (a, (b, core)) in allocs.iter().zip(results) {
            total += 1;
            bertrand += b as usize;
            match core {
                Ok(c) if c == b => {}
                other => mismatches.push(format!("n={n} bertrand={b} oracle={other:?} alloc={a:?}")),
            }
        }
    }
    let detail = format!(
        "{total} lattice allocations ({bertrand} Bertrand), {} mismatches, {:.1}s",
        mismatches.len(),
        started.elapsed().as_secs_f64()
    );
    if !mismatches.is_empty() {
        return Err(format!("{detail}; first: {}", mismatches[0]));
    }
    if started.elapsed() > Duration::from_secs(300) {
        return Err(format!("{detail}; over the 5 min budget"));
    }
    Ok(detail)
}

/// No lattice proposal blocks a Bertrand allocation.
fn bertrand_unblockable() -> Outcome {
    let cases: Vec<(MarketPopulation<Exact>, Allocation<Exact>)> = (0..50u64)
        .map(|t| {
            let mut rng = trial_rng(31, t);
            let n = rng.gen_range(1..=3);
            let pop = random_population(&mut rng, n);
            let alloc = random_bertrand(&mut rng, &pop);
            (pop, alloc)
        })
        .collect();
    let splits: std::collections::BTreeSet<String> = cases
        .iter()
        .flat_map(|(pop, a)| (0..pop.len()).map(|k| a.firm(Firm::One).share(k).render()))
        .collect();
    let results: Vec<Result<(usize, usize), String>> = cases
        .par_iter()
        .enumerate()
        .map(|(t, (pop, alloc))| {
            if !is_bertrand(alloc, pop, &q(0, 1)).holds() {
                return Err(format!("sample {t} is not Bertrand"));
            }
            let lattice = SearchLattice::for_allocation(alloc, pop, &oracle_eta());
            let (mut seen, mut feasible) = (0, 0);
            let mut bad = None;
            for firm in Firm::BOTH {
                enumerate_proposals(alloc, pop, &lattice, firm, |p| {
                    seen += 1;
                    let v = verify_block(alloc, p, pop);
                    let conditions_hold = v.failing_levels().is_empty() && v.alternative_valid;
                    if conditions_hold {
                        feasible += 1;
                        if v.profit_after > v.profit_before {
                            bad = Some(format!("sample {t}: {firm} gains {}", v.gain()));
                        }
                    }
                    if v.valid {
                        bad = Some(format!("sample {t}: {firm} proposal validated"));
                    }
                    bad.is_some()
                })
                .map_err(|e| e.to_string())?;
            }
            match bad {
                Some(b) => Err(b),
                None => Ok((seen, feasible)),
            }
        })
        .collect();
    let mut seen = 0;
    let mut feasible = 0;
    for r in results {
        let (s, f) = r?;
        seen += s;
        feasible += f;
    }
    Ok(format!(
        "50 Bertrand allocations ({} distinct firm-1 shares), {seen} proposals, {feasible} condition-feasible, none profitable",
        splits.len()
    ))
}

/// The canonical profile is an η-equilibrium.
fn canonical_equilibrium() -> Outcome {
    let eta = q(1, 1_000_000);
    let params = BestResponseParams::new(eta.clone()).unwrap();
    let mut worst = q(0, 1);
    let pops = fixture_populations();
    for (i, pop) in pops.iter().enumerate() {
        let bound = eta.clone() * pop.total_mass().clone();
        let report = verify_equilibrium(&OfferProfile::canonical_bertrand(pop), pop, &params, &bound)
            .map_err(|e| e.to_string())?;
        for firm in Firm::BOTH {
            let gain = report.firm(firm).gain.clone();
            if gain > bound {
                return Err(format!("population {i}: {firm} gains {gain} > {bound}"));
            }
            if gain > worst {
                worst = gain;
            }
        }
        if !report.is_equilibrium {
            return Err(format!("population {i}: not an equilibrium"));
        }
    }
    Ok(format!("{} fixture populations, largest gain {worst}", pops.len()))
}

/// Each case block becomes a menu deviation reproducing it.
fn deviations_reproduce_blocks() -> Outcome {
    let mut lines = Vec::new();
    for (case, fx) in all_case_fixtures() {
        let cfg = case_config(case);
        let p = find_block_in_case(&fx.alloc, &fx.pop, &cfg, case)
            .map_err(|e| e.to_string())?
            .ok_or(format!("{case}: no block"))?;
        let verdict = verify_block(&fx.alloc, &p, &fx.pop);
        let profile = OfferProfile::from_allocation(&fx.alloc).map_err(|e| e.to_string())?;
        let dev = block_to_deviation(&p, &profile, &fx.pop, &TiePolicy::default(), &oracle_eta())
            .map_err(|e| format!("{case}: {e}"))?;
        if !dev.menu.is_monotone() {
            return Err(format!("{case}: deviation menu not monotone"));
        }
        if dev.realized != p.alternative {
            return Err(format!("{case}: induced allocation differs from the block"));
        }
        if dev.gain() != verdict.gain() {
            return Err(format!("{case}: gain {} vs verified {}", dev.gain(), verdict.gain()));
        }
        lines.push(format!("{}:{}", case.number(), dev.gain()));
    }
    Ok(format!("six fixtures, gains {}", lines.join(" ")))
}

/// The constructive gain dominates the interval bound.
fn unemployment_bound() -> Outcome {
    let sigmas = [q(1, 8), q(1, 4), q(3, 8), q(1, 2), q(3, 4), q(7, 8)];
    let mut checked = 0;
    let mut tightest: Option<Exact> = None;
    for n in 3..=8 {
        for low in 0..=2.min(n - 2) {
            for sigma in &sigmas {
                for alternate in [false, true] {
                    let fx = unemployment_family(n, low, sigma, alternate);
                    let cfg = BlockConfig::new(q(0, 1));
                    let case = CaseLabel::UnderemployedAtProductivity;
                    let p = find_block_in_case(&fx.alloc, &fx.pop, &cfg, case)
                        .map_err(|e| format!("n={n} low={low} σ={sigma}: {e}"))?
                        .ok_or(format!("n={n} low={low} σ={sigma}: no block"))?;
                    let get = |k: &str| p.parameter(k).cloned().ok_or(format!("missing parameter {k}"));
                    let (delta, pr, mu, eps) = (get("delta")?, get("p")?, get("mu_interval")?, get("epsilon")?);
                    let pm = pr * mu;
                    let bound = delta * pm.clone() * eps.clone() + q(1, 2) * pm.clone() * pm * eps;
                    let gain = verify_block(&fx.alloc, &p, &fx.pop).gain();
                    if gain < bound {
                        return Err(format!(
                            "n={n} low={low} σ={sigma} alt={alternate}: gain {gain} < bound {bound}"
                        ));
                    }
                    let slack = gain - bound;
                    if tightest.as_ref().is_none_or(|t| slack < *t) {
                        tightest = Some(slack);
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!(
        "{checked} family members, smallest gain - bound = {}",
        tightest.unwrap_or_else(|| q(0, 1))
    ))
}

/// The dynamic program matches exhaustive search exactly.
fn best_response_optimality() -> Outcome {
    let results: Vec<Result<bool, String>> = (0..200u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(47, t);
            let n = rng.gen_range(1..=4);
            let pop = random_population(&mut rng, n);
            let rival = random_menu(&mut rng, &pop);
            let firm = if rng.gen_bool(0.5) { Firm::One } else { Firm::Two };
            let policy = TiePolicy::new(q(rng.gen_range(0..=4), 4), rng.gen_bool(0.5)).unwrap();
            let eta = oracle_eta();
            let params = BestResponseParams::new(eta.clone())
                .unwrap()
                .with_policy(policy.clone());
            let dp = best_response(firm, &rival, &pop, &params);
            let lattice = SearchLattice::for_rival_menu(&rival, &pop, &eta);
            let (_, oracle) = oracle_best_response(firm, &rival, &pop, &lattice, &policy).map_err(|e| e.to_string())?;
            if dp.profit != oracle {
                return Err(format!("instance {t}: dp {} vs oracle {oracle}", dp.profit));
            }
            Ok(dp.profit > q(0, 1))
        })
        .collect();
    let mut positive = 0;
    for r in results {
        positive += r? as usize;
    }
    Ok(format!("200 instances agree exactly ({positive} with positive profit)"))
}

/// Equilibrium profiles earn (almost) nothing.
fn zero_profit(report: &ExperimentReport) -> Outcome {
    let s = &report.summary;
    let eq: Vec<_> = report.rows.iter().filter(|r| r.is_equilibrium).collect();
    let detail = format!(
        "{} equilibrium profiles in {} trials, {} outside band, max violation {:e}",
        eq.len(),
        s.trials,
        s.zero_profit_violations,
        s.max_violation
    );
    if eq.is_empty() {
        return Err(format!("{detail}; no equilibria sampled"));
    }
    if let Some(r) = eq.iter().find(|r| !r.zero_profit_ok) {
        return Err(format!(
            "{detail}; trial {} profits {} / {}",
            r.trial, r.profit1, r.profit2
        ));
    }
    Ok(detail)
}

fn main() -> ExitCode {
    let started = Instant::now();
    let report = run_experiment(&ExperimentConfig::standard(7, 1000)).expect("standard config is valid");
    let elapsed = started.elapsed();

    let results: Vec<(&str, Outcome)> = vec![
        (
            "block completeness on random allocations",
            random_completeness(&report, elapsed),
        ),
        ("oracle agreement on the exhaustive lattice", oracle_agreement()),
        ("Bertrand allocations admit no block", bertrand_unblockable()),
        ("canonical profile is an equilibrium", canonical_equilibrium()),
        ("blocks become menu deviations", deviations_reproduce_blocks()),
        ("unemployment interval bound", unemployment_bound()),
        ("best-response DP matches the oracle", best_response_optimality()),
        ("zero profit in equilibrium", zero_profit(&report)),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
