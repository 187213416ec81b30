use serde_json::{json, Value as Json};

use starcyl::io::format_row;
use starcyl::{Const, Literal, Query, StarCylinder, StarTuple, Value};

fn header(q: &Query) -> Vec<String> {
    q.head.iter().map(|v| format!("x{v}")).collect()
}

/// The answer in file row syntax, one row per line, under a header naming
/// the answer variables.
pub fn table(q: &Query, answer: &StarCylinder, show_conditions: bool) -> String {
    let mut out = header(q).join(", ");
    out.push('\n');
    for t in answer {
        let row = if show_conditions {
            format_row(t)
        } else {
            format_row(&strip(t))
        };
        out.push_str(&row);
        out.push('\n');
    }
    out
}

fn strip(t: &StarTuple) -> StarTuple {
    StarTuple::new(t.entries().to_vec(), Vec::<Literal>::new())
        .ok()
        .flatten()
        .unwrap_or_else(|| t.clone())
}

fn value(v: &Value) -> Json {
    match v {
        Value::Const(a) => json!(a.as_str()),
        Value::Null(k) => json!(format!("?{k}")),
        Value::Star => json!("*"),
    }
}

pub fn json(q: &Query, answer: &StarCylinder) -> Json {
    let rows: Vec<Json> = answer
        .iter()
        .map(|t| {
            json!({
                "values": t.entries().iter().map(value).collect::<Vec<_>>(),
                "conditions": t.conditions().iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "columns": header(q),
        "flavor": answer.flavor().name(),
        "rows": rows,
    })
}

pub fn plain(t: &[Const]) -> String {
    t.iter().map(Const::as_str).collect::<Vec<_>>().join(", ")
}
