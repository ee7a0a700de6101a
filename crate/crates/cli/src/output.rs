//! JSON rendering of rule outcomes and certificates.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use veto_core::core::CoreCertificate;
use veto_core::election::Election;
use veto_core::ratio;
use veto_core::rules::{EliminationTrace, RuleOutcome};

pub fn print_json(value: &Value, pretty: bool) {
    if pretty {
        println!("{}", serde_json::to_string_pretty(value).expect("valid json"));
    } else {
        println!("{}", serde_json::to_string(value).expect("valid json"));
    }
}

fn winner_names(e: &Election, winners: impl IntoIterator<Item = usize>) -> Vec<String> {
    winners
        .into_iter()
        .map(|c| e.candidate_name(c).to_string())
        .collect()
}

fn trace_json(e: &Election, trace: &EliminationTrace) -> Value {
    let events: Vec<Value> = trace
        .events
        .iter()
        .map(|ev| {
            let weights: BTreeMap<String, String> = (0..e.num_candidates())
                .map(|c| {
                    (
                        e.candidate_name(c).to_string(),
                        ratio::to_string(&ev.weights[c]),
                    )
                })
                .collect();
            json!({
                "time": ratio::to_string(&ev.time),
                "eliminated": winner_names(e, ev.eliminated.iter().copied()),
                "weights": weights,
            })
        })
        .collect();
    json!(events)
}

pub fn rule_outcome_json(
    e: &Election,
    rule: &str,
    out: &RuleOutcome,
    include_trace: bool,
) -> Value {
    let mut doc = serde_json::Map::new();
    doc.insert("rule".into(), json!(rule));
    doc.insert(
        "winners".into(),
        json!(winner_names(e, out.winners.winners.iter().copied())),
    );
    doc.insert("witness".into(), out.witness.to_json(e));
    if include_trace && !out.trace.is_empty() {
        doc.insert("trace".into(), trace_json(e, &out.trace));
    }
    doc.into()
}

pub fn core_json(e: &Election, certificates: &BTreeMap<usize, CoreCertificate>) -> Value {
    let core: Vec<String> = certificates
        .iter()
        .filter(|(_, cert)| matches!(cert, CoreCertificate::Member(_)))
        .map(|(&c, _)| e.candidate_name(c).to_string())
        .collect();
    let mut certs = serde_json::Map::new();
    for (&c, cert) in certificates {
        let value = match cert {
            CoreCertificate::Member(matching) => json!({ "matching": matching.to_json(e) }),
            CoreCertificate::Blocked(pair) => {
                let coalition: Vec<usize> = pair.coalition().iter().map(|&v| v + 1).collect();
                json!({
                    "blocking": {
                        "coalition": coalition,
                        "witness": winner_names(e, pair.witness().iter().copied()),
                        "margin": ratio::to_string(pair.margin()),
                    }
                })
            }
        };
        certs.insert(e.candidate_name(c).to_string(), value);
    }
    json!({ "core": core, "certificates": certs })
}
