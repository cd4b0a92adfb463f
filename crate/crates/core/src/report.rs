//! Text and JSON renderings shared by the command line and the tests.

use serde_json::{json, Value};

use crate::exactalg::Poly;
use crate::invariant::{Invariant, InvariantResult};

/// `(2, 1, 3/2, 0)` with trailing zero pairs dropped.
pub fn format_invariant(inv: &Invariant) -> String {
    let t = inv.trimmed();
    if t.is_empty() {
        return "(0)".to_string();
    }
    let parts: Vec<String> = t.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

/// Blocks listing such as `{x}:3/2 {y}:1 | residual {}`.
pub fn format_blocks(res: &InvariantResult) -> String {
    let ring = res.filtration.ring().clone();
    let names = |vs: &[usize]| -> String {
        let n: Vec<&str> = vs.iter().map(|&v| ring.name(v)).collect();
        format!("{{{}}}", n.join(","))
    };
    let mut parts: Vec<String> = res
        .filtration
        .blocks()
        .iter()
        .map(|b| format!("{}:{}", names(&b.vars), b.weight))
        .collect();
    if !res.filtration.residual().is_empty() {
        parts.push(format!("residual {}", names(res.filtration.residual())));
    }
    parts.join(" ")
}

pub fn invariant_json(res: &InvariantResult) -> Value {
    let ring = res.coord_change.target();
    let coords: serde_json::Map<String, Value> = res
        .coord_change
        .inverse()
        .map(|inv| {
            inv.iter()
                .enumerate()
                .filter(|(i, p)| **p != Poly::var(ring, *i))
                .map(|(i, p)| (ring.name(i).to_string(), Value::String(p.to_string())))
                .collect()
        })
        .unwrap_or_default();
    json!({
        "invariant": res.invariant,
        "filtration": res.filtration,
        "coordinates": coords,
        "generators": res.generators.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "trace": res.trace,
        "witnesses": res.witnesses.iter().map(|w| json!({
            "s": w.s,
            "block_weights": w.block_weights,
            "d": w.d,
            "solution": w.solution,
        })).collect::<Vec<_>>(),
        "stats": res.stats,
    })
}
