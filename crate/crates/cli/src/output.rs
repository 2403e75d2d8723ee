use serde_json::Value;

use gibbs_core::VerificationRecord;

/// 17 significant digits, enough to round-trip any f64.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Arrays without objects that fit on one line stay on one line.
const INLINE_WIDTH: usize = 100;

fn scalar(value: &Value) -> String {
    match value {
        Value::Number(n) if n.is_f64() => float(n.as_f64().expect("f64 number")),
        other => serde_json::to_string(other).expect("JSON values serialize"),
    }
}

fn inline(value: &Value) -> Option<String> {
    match value {
        Value::Object(_) => None,
        Value::Array(items) => {
            let parts = items.iter().map(inline).collect::<Option<Vec<_>>>()?;
            let text = format!("[{}]", parts.join(", "));
            (text.len() <= INLINE_WIDTH).then_some(text)
        }
        other => Some(scalar(other)),
    }
}

fn write(value: &Value, indent: usize, out: &mut String) {
    if let Some(text) = inline(value) {
        out.push_str(&text);
        return;
    }
    let pad = " ".repeat(indent + 2);
    match value {
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad);
                write(item, indent + 2, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&" ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&serde_json::to_string(k).expect("keys serialize"));
                out.push_str(": ");
                write(v, indent + 2, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&" ".repeat(indent));
            out.push('}');
        }
        _ => unreachable!("scalars are always inline"),
    }
}

/// Pretty JSON with every float printed to 17 significant digits.
pub fn render_json(value: &Value) -> String {
    let mut out = String::new();
    write(value, 0, &mut out);
    out.push('\n');
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn records_csv(records: &[VerificationRecord]) -> String {
    let mut out = String::from("check,parameters,measured,bound,pass,note\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&r.check),
            csv_field(&r.parameters),
            float(r.measured),
            float(r.bound),
            r.pass,
            csv_field(r.note.as_deref().unwrap_or("")),
        ));
    }
    out
}
