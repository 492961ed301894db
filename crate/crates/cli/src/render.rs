use std::fmt::Write;

use serde_json::Value;

use crate::Report;

/// One `path = value` line per leaf, in sorted key order.
fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) if !m.is_empty() => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            for k in keys {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&p, &m[k], out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => {
            let _ = writeln!(out, "  {prefix} = {s}");
        }
        other => {
            let _ = writeln!(out, "  {prefix} = {other}");
        }
    }
}

pub(crate) fn text(r: &Report) -> String {
    let mut out = format!("maxsing {}: {} (exit {})\n", r.command, r.status(), r.exit_code);
    if let Some(e) = &r.error {
        flatten("error", e, &mut out);
    }
    if let Some(v) = &r.result {
        flatten("", v, &mut out);
    }
    let _ = writeln!(out, "elapsed: {:.3}s", r.elapsed.as_secs_f64());
    out
}
