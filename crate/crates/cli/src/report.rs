//! JSON and text rendering of model values.

use bertrand_core::{BlockProposal, BlockVerdict, FirmAllocation, IndexSet, MarketPopulation, OfferMenu, Scalar};
use serde_json::{json, Map, Value};

/// Exact values become strings (`"3/20"`), floats stay numbers.
pub fn num<S: Scalar>(x: &S) -> Value {
    if S::EXACT {
        Value::String(x.render())
    } else {
        json!(x.to_f64())
    }
}

pub fn set<S: Scalar>(s: &IndexSet<S>) -> Value {
    Value::Array(s.to_pairs().iter().map(|(a, b)| json!([num(a), num(b)])).collect())
}

/// Employed levels only.
pub fn firm_allocation<S: Scalar>(fa: &FirmAllocation<S>, pop: &MarketPopulation<S>) -> Value {
    Value::Array(
        (0..fa.len())
            .filter(|&k| fa.is_employed(k))
            .map(|k| json!({"level": num(pop.level(k)), "wage": num(fa.wage(k)), "intervals": set(fa.hired(k))}))
            .collect(),
    )
}

/// Offered levels only.
pub fn menu<S: Scalar>(m: &OfferMenu<S>, pop: &MarketPopulation<S>) -> Value {
    Value::Array(
        m.slots()
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_active())
            .map(|(k, o)| json!({"level": num(pop.level(k)), "wage": num(&o.wage), "intervals": set(&o.offered)}))
            .collect(),
    )
}

pub fn proposal<S: Scalar>(p: &BlockProposal<S>, pop: &MarketPopulation<S>) -> Value {
    let params: Map<String, Value> = p.parameters.iter().map(|(k, v)| (k.clone(), num(v))).collect();
    json!({
        "blocker": p.blocker.to_string(),
        "case": p.case_label.name(),
        "case_number": p.case_label.number(),
        "levels": p.levels.iter().map(|&k| num(pop.level(k))).collect::<Vec<_>>(),
        "parameters": params,
        "alternative": firm_allocation(&p.alternative, pop),
    })
}

pub fn verdict<S: Scalar>(v: &BlockVerdict<S>, pop: &MarketPopulation<S>) -> Value {
    let conditions: Vec<Value> = v
        .per_level_condition
        .iter()
        .enumerate()
        .map(|(k, cs)| json!({"level": num(pop.level(k)), "conditions": cs.iter().map(|c| c.number()).collect::<Vec<_>>()}))
        .collect();
    json!({
        "valid": v.valid,
        "alternative_valid": v.alternative_valid,
        "profit_before": num(&v.profit_before),
        "profit_after": num(&v.profit_after),
        "gain": num(&v.gain()),
        "per_level_conditions": conditions,
    })
}

/// `level wage [a, b) ∪ ...` lines for human output.
pub fn menu_lines<S: Scalar>(m: &OfferMenu<S>, pop: &MarketPopulation<S>) -> Vec<String> {
    m.slots()
        .iter()
        .enumerate()
        .filter(|(_, o)| o.is_active())
        .map(|(k, o)| format!("  v={} wage={} offered={}", pop.level(k), o.wage, o.offered))
        .collect()
}

pub fn allocation_lines<S: Scalar>(fa: &FirmAllocation<S>, pop: &MarketPopulation<S>) -> Vec<String> {
    (0..fa.len())
        .filter(|&k| fa.is_employed(k))
        .map(|k| format!("  v={} wage={} hired={}", pop.level(k), fa.wage(k), fa.hired(k)))
        .collect()
}
