//! Versioned JSON report envelopes.

use serde_json::{json, Map, Value};

pub const SCHEMA: &str = "cf-forge/1";

/// `{"schema": ..., "command": ..., ...body}`. Object bodies are merged,
/// anything else lands under `"result"`.
pub fn report(command: &str, body: Value) -> Value {
    let mut out = Map::new();
    out.insert("schema".into(), json!(SCHEMA));
    out.insert("command".into(), json!(command));
    match body {
        Value::Object(m) => out.extend(m),
        other => {
            out.insert("result".into(), other);
        }
    }
    Value::Object(out)
}

/// Pretty-printed with sorted keys and a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}
