use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bertrand_core::experiment::ExperimentConfig;
use bertrand_core::*;
use serde_json::{json, Value};

use crate::report;
use crate::GlobalOpts;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Falsified,
    InputError,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(match s {
            Status::Ok => 0,
            Status::Falsified => 1,
            Status::InputError => 2,
        })
    }
}

type CmdResult = Result<Status, String>;

macro_rules! dispatch {
    ($any:expr, $s:ident => $body:expr) => {
        match $any {
            AnyScenario::Exact($s) => $body,
            AnyScenario::Float($s) => $body,
        }
    };
}

fn load(path: &Path) -> Result<AnyScenario, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_scenario(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn scalar_opt<S: Scalar>(text: &Option<String>, name: &str, default: S, positive: bool) -> Result<S, String> {
    let Some(t) = text else {
        return Ok(default);
    };
    let x = S::parse(t).ok_or_else(|| format!("--{name}: cannot read {t:?}"))?;
    if !x.is_finite() || x < S::zero() || (positive && x.is_zero()) {
        return Err(format!(
            "--{name} must be {}",
            if positive { "positive" } else { "non-negative" }
        ));
    }
    Ok(x)
}

fn tol<S: Scalar>(g: &GlobalOpts) -> Result<S, String> {
    scalar_opt(&g.tol, "tol", BlockConfig::<S>::default().tol, false)
}

fn eta<S: Scalar>(g: &GlobalOpts) -> Result<S, String> {
    scalar_opt(&g.eta, "eta", S::ratio(1, 1_000_000_000), true)
}

fn emit(json_out: bool, value: Value, text: Vec<String>) {
    if json_out {
        println!("{}", serde_json::to_string_pretty(&value).expect("report serializes"));
    } else {
        for line in text {
            println!("{line}");
        }
    }
}

fn valid_allocation<S: Scalar>(s: &Scenario<S>) -> Result<&Allocation<S>, String> {
    let alloc = s.allocation.as_ref().ok_or("scenario has no [allocation] block")?;
    let problems = validate_allocation(alloc, &s.population);
    if let Some(v) = problems.first() {
        return Err(format!("invalid allocation: {}", v.describe(&s.population)));
    }
    Ok(alloc)
}

fn valid_profile<S: Scalar>(s: &Scenario<S>) -> Result<OfferProfile<S>, String> {
    match s.profile() {
        None => Err("scenario has no [menu] block".into()),
        Some(Err(e)) => Err(format!("invalid menu: {e}")),
        Some(Ok(p)) => Ok(p),
    }
}

pub fn validate(path: &Path, g: &GlobalOpts) -> CmdResult {
    dispatch!(load(path)?, s => validate_in(&s, g))
}

fn validate_in<S: Scalar>(s: &Scenario<S>, g: &GlobalOpts) -> CmdResult {
    let pop = &s.population;
    let mut diagnostics = Vec::new();
    if let Some(alloc) = &s.allocation {
        diagnostics.extend(
            validate_allocation(alloc, pop)
                .iter()
                .map(|v| format!("allocation: {}", v.describe(pop))),
        );
    }
    diagnostics.extend(
        s.menu_violations()
            .iter()
            .map(|(firm, k)| format!("menu: {firm}: wage decreases at level {}", pop.level(*k))),
    );
    for d in &diagnostics {
        eprintln!("{d}");
    }
    let valid = diagnostics.is_empty();
    emit(
        g.json,
        json!({
            "valid": valid,
            "levels": pop.len(),
            "has_allocation": s.allocation.is_some(),
            "has_menus": s.menus.is_some(),
            "diagnostics": diagnostics,
        }),
        vec![if valid {
            "valid".to_string()
        } else {
            format!("invalid: {} problem(s)", diagnostics.len())
        }],
    );
    Ok(if valid { Status::Ok } else { Status::Falsified })
}

pub struct BlockOpts {
    pub oracle: bool,
    pub case: Option<u8>,
    pub epsilon_cap: Option<String>,
    pub inject_mismatch: bool,
}

pub fn find_block(path: &Path, g: &GlobalOpts, opts: &BlockOpts) -> CmdResult {
    dispatch!(load(path)?, s => find_block_in(&s, g, opts))
}

fn find_block_in<S: Scalar>(s: &Scenario<S>, g: &GlobalOpts, opts: &BlockOpts) -> CmdResult {
    let pop = &s.population;
    let alloc = valid_allocation(s)?;
    let tol: S = tol(g)?;
    let mut cfg = BlockConfig::new(tol.clone());
    if opts.epsilon_cap.is_some() {
        cfg = cfg.with_epsilon_cap(scalar_opt(&opts.epsilon_cap, "epsilon-cap", S::one(), true)?);
    }
    let bertrand = is_bertrand(alloc, pop, &tol).holds();
    let hits = classify_non_bertrand(alloc, pop, &tol);
    let case = opts.case.and_then(CaseLabel::from_number);
    let outcome = match case {
        Some(c) => bertrand_core::find_block_in_case(alloc, pop, &cfg, c),
        None => bertrand_core::find_block(alloc, pop, &cfg),
    };
    let verdict = match &outcome {
        Ok(Some(p)) => Some(verify_block(alloc, p, pop)),
        _ => None,
    };

    // A block must exist exactly when the allocation is not Bertrand; with
    // --case, a case whose predicate does not hold is simply not applicable.
    let expect_bertrand = bertrand != opts.inject_mismatch;
    let case_applies = case.is_none_or(|c| hits.iter().any(|h| h.case == c));
    let consistent = match (&outcome, expect_bertrand) {
        (Ok(None), true) => true,
        (Ok(Some(_)), true) => false,
        (Ok(Some(_)), false) => verdict.as_ref().is_some_and(|v| v.valid),
        (Ok(None), false) => !case_applies,
        (Err(_), _) => false,
    };

    let mut text = Vec::new();
    let mut oracle_json = Value::Null;
    let mut oracle_ok = true;
    if opts.oracle {
        let lattice = SearchLattice::for_allocation(alloc, pop, &eta::<S>(g)?);
        match oracle_is_core(alloc, pop, &lattice) {
            Ok(core) => {
                oracle_ok = core == bertrand;
                text.push(format!(
                    "oracle: {} ({})",
                    if core {
                        "no lattice block"
                    } else {
                        "lattice block found"
                    },
                    if oracle_ok { "agrees" } else { "DISAGREES" }
                ));
                oracle_json = json!({"core": core, "agrees": oracle_ok});
            }
            Err(e) => {
                eprintln!("warning: oracle skipped ({e}); constructive result only");
                oracle_json = json!({"skipped": e.to_string()});
            }
        }
    }

    match &outcome {
        Ok(None) if bertrand => text.insert(0, "no block; allocation is Bertrand".into()),
        Ok(None) => text.insert(
            0,
            format!(
                "no block from case {}; its predicate does not hold",
                opts.case.unwrap_or_default()
            ),
        ),
        Ok(Some(p)) => {
            let v = verdict.as_ref().expect("verdict computed for proposals");
            let mut head = vec![
                format!(
                    "block: case {} ({}) by {} at levels [{}]",
                    p.case_label.number(),
                    p.case_label,
                    p.blocker,
                    p.levels
                        .iter()
                        .map(|&k| pop.level(k).to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
                format!(
                    "  profit {} -> {} (gain {}), verified {}",
                    v.profit_before,
                    v.profit_after,
                    v.gain(),
                    v.valid
                ),
            ];
            for (k, x) in &p.parameters {
                head.push(format!("  {k} = {x}"));
            }
            let lines = report::allocation_lines(&p.alternative, pop);
            head.push(format!(
                "  alternative:{}",
                if lines.is_empty() { " no hires" } else { "" }
            ));
            head.extend(lines);
            text.splice(0..0, head);
        }
        Err(e) => text.insert(0, format!("construction failed: {e}")),
    }
    if !consistent {
        text.push("MISMATCH: outcome contradicts the Bertrand test".into());
    }

    let value = json!({
        "bertrand": bertrand,
        "cases": hits.iter().map(|h| json!({
            "case": h.case.number(),
            "name": h.case.name(),
            "firm": h.firm.to_string(),
            "levels": h.levels.iter().map(|&k| report::num(pop.level(k))).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "proposal": match &outcome { Ok(Some(p)) => report::proposal(p, pop), _ => Value::Null },
        "verdict": verdict.as_ref().map_or(Value::Null, |v| report::verdict(v, pop)),
        "error": match &outcome { Err(e) => json!(e.to_string()), _ => Value::Null },
        "consistent": consistent,
        "oracle": oracle_json,
    });
    emit(g.json, value, text);
    Ok(if consistent && oracle_ok {
        Status::Ok
    } else {
        Status::Falsified
    })
}

pub fn verify_eq(path: &Path, g: &GlobalOpts) -> CmdResult {
    dispatch!(load(path)?, s => verify_eq_in(&s, g))
}

fn verify_eq_in<S: Scalar>(s: &Scenario<S>, g: &GlobalOpts) -> CmdResult {
    let pop = &s.population;
    let profile = valid_profile(s)?;
    let tol: S = tol(g)?;
    let params = BestResponseParams::new(eta::<S>(g)?)
        .map_err(|e| e.to_string())?
        .with_policy(s.policy.clone());
    let r = verify_equilibrium(&profile, pop, &params, &tol).map_err(|e| e.to_string())?;
    let induced_bertrand = is_bertrand(&r.allocation, pop, &tol).holds();

    let mut text = vec![format!(
        "{} (induced allocation {}Bertrand)",
        if r.is_equilibrium {
            "equilibrium"
        } else {
            "not an equilibrium"
        },
        if induced_bertrand { "" } else { "not " }
    )];
    let mut firms = Vec::new();
    for firm in Firm::BOTH {
        let fr = r.firm(firm);
        text.push(format!(
            "{firm}: profit {} best response {} gain {}",
            fr.current_profit, fr.best_profit, fr.gain
        ));
        if !r.is_equilibrium && fr.gain > tol {
            text.extend(report::menu_lines(&fr.witness, pop));
        }
        firms.push(json!({
            "firm": firm.to_string(),
            "profit": report::num(&fr.current_profit),
            "best_profit": report::num(&fr.best_profit),
            "gain": report::num(&fr.gain),
            "witness": report::menu(&fr.witness, pop),
        }));
    }
    let value = json!({
        "is_equilibrium": r.is_equilibrium,
        "induced_bertrand": induced_bertrand,
        "max_gain": report::num(&r.max_gain()),
        "firms": firms,
        "allocation": {
            "firm1": report::firm_allocation(r.allocation.firm(Firm::One), pop),
            "firm2": report::firm_allocation(r.allocation.firm(Firm::Two), pop),
        },
    });
    emit(g.json, value, text);
    Ok(if r.is_equilibrium {
        Status::Ok
    } else {
        Status::Falsified
    })
}

pub fn best_response(path: &Path, g: &GlobalOpts, firm: u8, oracle: bool) -> CmdResult {
    let firm = Firm::from_number(firm).ok_or("--firm must be 1 or 2")?;
    dispatch!(load(path)?, s => best_response_in(&s, g, firm, oracle))
}

fn best_response_in<S: Scalar>(s: &Scenario<S>, g: &GlobalOpts, firm: Firm, oracle: bool) -> CmdResult {
    let pop = &s.population;
    let profile = valid_profile(s)?;
    let eta: S = eta(g)?;
    let params = BestResponseParams::new(eta.clone())
        .map_err(|e| e.to_string())?
        .with_policy(s.policy.clone());
    let rival = profile.menu(firm.other());
    let br = bertrand_core::best_response(firm, rival, pop, &params);

    let mut text = vec![format!("{firm} best response: profit {}", br.profit)];
    text.extend(report::menu_lines(&br.menu, pop));
    let mut agrees = true;
    let mut oracle_json = Value::Null;
    if oracle {
        let lattice = SearchLattice::for_rival_menu(rival, pop, &eta);
        match oracle_best_response(firm, rival, pop, &lattice, &s.policy) {
            Ok((_, profit)) => {
                let diff = bertrand_core::scalar::abs(br.profit.clone() - profit.clone());
                agrees = diff <= S::slack();
                text.push(format!(
                    "oracle profit {profit} ({})",
                    if agrees { "agrees" } else { "DISAGREES" }
                ));
                oracle_json = json!({"profit": report::num(&profit), "agrees": agrees});
            }
            Err(e) => {
                eprintln!("warning: oracle skipped ({e})");
                oracle_json = json!({"skipped": e.to_string()});
            }
        }
    }
    let value = json!({
        "firm": firm.to_string(),
        "profit": report::num(&br.profit),
        "menu": report::menu(&br.menu, pop),
        "oracle": oracle_json,
    });
    emit(g.json, value, text);
    Ok(if agrees { Status::Ok } else { Status::Falsified })
}

pub fn oracle(path: &Path, g: &GlobalOpts, cap: Option<u128>) -> CmdResult {
    dispatch!(load(path)?, s => oracle_in(&s, g, cap))
}

fn oracle_in<S: Scalar>(s: &Scenario<S>, g: &GlobalOpts, cap: Option<u128>) -> CmdResult {
    let pop = &s.population;
    let alloc = valid_allocation(s)?;
    let tol: S = tol(g)?;
    let mut lattice = SearchLattice::for_allocation(alloc, pop, &eta::<S>(g)?);
    if let Some(c) = cap {
        lattice = lattice.with_cap(c);
    }
    let found = oracle_find_block(alloc, pop, &lattice).map_err(|e| e.to_string())?;
    let bertrand = is_bertrand(alloc, pop, &tol).holds();
    let agrees = found.is_none() == bertrand;

    let mut text = Vec::new();
    let mut value = json!({
        "bertrand": bertrand,
        "core": found.is_none(),
        "agrees": agrees,
        "lattice_size": lattice.proposal_count().to_string(),
    });
    match &found {
        None => text.push("no lattice block".into()),
        Some(p) => {
            let v = verify_block(alloc, p, pop);
            text.push(format!("lattice block by {} (gain {})", p.blocker, v.gain()));
            text.extend(report::allocation_lines(&p.alternative, pop));
            value["proposal"] = report::proposal(p, pop);
            value["verdict"] = report::verdict(&v, pop);
        }
    }
    text.push(format!(
        "allocation is {}Bertrand ({})",
        if bertrand { "" } else { "not " },
        if agrees { "agrees" } else { "DISAGREES" }
    ));
    emit(g.json, value, text);
    Ok(if agrees { Status::Ok } else { Status::Falsified })
}

pub fn experiment(
    path: &Path,
    g: &GlobalOpts,
    seed: Option<u64>,
    trials: Option<u64>,
    rows: Option<PathBuf>,
    summary: Option<PathBuf>,
) -> CmdResult {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut cfg = ExperimentConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    let float = |t: &Option<String>, name: &str| -> Result<Option<f64>, String> {
        t.as_ref()
            .map(|t| t.parse::<f64>().map_err(|_| format!("--{name}: cannot read {t:?}")))
            .transpose()
    };
    if let Some(x) = float(&g.tol, "tol")? {
        cfg.tolerances.tol = x;
    }
    if let Some(x) = float(&g.eta, "eta")? {
        cfg.tolerances.eta = x;
    }
    let report = run_experiment(&cfg).map_err(|e| e.to_string())?;

    if let Some(out) = rows.or(cfg.output.rows.clone()) {
        let mut w = csv::Writer::from_path(&out).map_err(|e| format!("{}: {e}", out.display()))?;
        for r in &report.rows {
            w.serialize(r).map_err(|e| format!("{}: {e}", out.display()))?;
        }
        w.flush().map_err(|e| format!("{}: {e}", out.display()))?;
    }
    let summary_json = serde_json::to_string_pretty(&report.summary).expect("summary serializes");
    if let Some(out) = summary.or(cfg.output.summary.clone()) {
        fs::write(&out, format!("{summary_json}\n")).map_err(|e| format!("{}: {e}", out.display()))?;
    }

    let s = &report.summary;
    let cases = |m: &std::collections::BTreeMap<String, u64>| {
        m.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    };
    if g.json {
        println!("{summary_json}");
    } else {
        println!(
            "trials {} (seed {}): {} Bertrand, {} not",
            s.trials, s.seed, s.bertrand, s.non_bertrand
        );
        println!(
            "blocks found on non-Bertrand: {}/{} ({:.1}%)",
            s.block_found_on_non_bertrand,
            s.non_bertrand,
            100.0 * s.block_rate
        );
        println!("no block on Bertrand: {}/{}", s.no_block_on_bertrand, s.bertrand);
        println!("case predicates: {}", cases(&s.case_hits));
        println!("blocking cases: {}", cases(&s.block_cases));
        println!(
            "equilibria: {}, zero-profit violations: {}, max violation {:e}",
            s.equilibria, s.zero_profit_violations, s.max_violation
        );
        if !s.failures.is_empty() {
            println!("failing trials: {:?}", s.failures);
        }
    }
    Ok(if s.failures.is_empty() && s.zero_profit_violations == 0 {
        Status::Ok
    } else {
        Status::Falsified
    })
}
