//! Recovering placements from free-form model output.
//!
//! The cascade tries a whole-text JSON parse first, then scans for balanced
//! bracketed arrays and applies small repairs, and finally gives up with
//! per-stage diagnostics. [`judge_extract`] puts a second model in front of
//! the same cascade.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::geometry::PlacedRect;
use crate::layoutgen::TransistorSpec;
use crate::modelclient::{CompletionClient, CompletionRequest};

const JUDGE_TEMPLATE: &str = include_str!("../assets/templates/judge_extract.txt");

/// Field-by-field tolerance used by [`validate_against_input`].
pub const FIELD_TOLERANCE: f64 = 1e-6;

/// Longest input the scanner looks at, in bytes.
pub const MAX_SCAN_BYTES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedTransistor {
    pub id: String,
    #[serde(rename = "type")]
    pub ttype: String,
    #[serde(rename = "x")]
    pub width: f64,
    #[serde(rename = "y")]
    pub height: f64,
    #[serde(rename = "c_x", alias = "cx")]
    pub cx: f64,
    #[serde(rename = "c_y", alias = "cy")]
    pub cy: f64,
}

impl PlacedTransistor {
    pub fn rect(&self) -> PlacedRect {
        PlacedRect {
            cx: self.cx,
            cy: self.cy,
            width: self.width,
            height: self.height,
        }
    }

    pub fn spec(&self) -> TransistorSpec {
        TransistorSpec {
            id: self.id.clone(),
            ttype: self.ttype.clone(),
            width: self.width,
            height: self.height,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMethod {
    DirectJson,
    ScanRepair,
    Judge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub placements: Vec<PlacedTransistor>,
    pub method: ExtractionMethod,
    /// Notes from stages that were tried and did not succeed.
    pub diagnostics: Vec<String>,
}

// ------------------------------------------------------------ schema

fn field<'a>(obj: &'a Map<String, Value>, names: &[&str]) -> Option<&'a Value> {
    names.iter().find_map(|n| obj.get(*n))
}

fn num(obj: &Map<String, Value>, index: usize, names: &[&'static str]) -> Result<f64> {
    let schema = |problem| Error::Schema {
        index,
        field: names[0].to_string(),
        problem,
    };
    let v = match field(obj, names) {
        None | Some(Value::Null) => return Err(schema("missing")),
        Some(Value::Number(n)) => n.as_f64().ok_or_else(|| schema("non-finite"))?,
        Some(Value::String(s)) => s.trim().parse::<f64>().map_err(|_| schema("non-numeric"))?,
        Some(_) => return Err(schema("non-numeric")),
    };
    if !v.is_finite() {
        return Err(schema("non-finite"));
    }
    Ok(v)
}

fn text(obj: &Map<String, Value>, index: usize, names: &[&'static str]) -> Result<String> {
    match field(obj, names) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Number(n)) => Ok(n.to_string()),
        Some(Value::Null) | None => Err(Error::Schema {
            index,
            field: names[0].to_string(),
            problem: "missing",
        }),
        Some(_) => Err(Error::Schema {
            index,
            field: names[0].to_string(),
            problem: "non-string",
        }),
    }
}

/// Converts a JSON array of objects into placements.
pub fn placements_from_value(v: &Value) -> Result<Vec<PlacedTransistor>> {
    let items = v
        .as_array()
        .ok_or_else(|| Error::InvalidRecord("expected a JSON list".into()))?;
    if items.is_empty() {
        return Err(Error::InvalidRecord("empty placement list".into()));
    }
    let mut out = Vec::with_capacity(items.len());
    for (index, item) in items.iter().enumerate() {
        let obj = item.as_object().ok_or(Error::Schema {
            index,
            field: "element".into(),
            problem: "non-object",
        })?;
        let p = PlacedTransistor {
            id: text(obj, index, &["id"])?,
            ttype: text(obj, index, &["type"])?,
            width: num(obj, index, &["x", "width"])?,
            height: num(obj, index, &["y", "height"])?,
            cx: num(obj, index, &["c_x", "cx"])?,
            cy: num(obj, index, &["c_y", "cy"])?,
        };
        for (name, val) in [("x", p.width), ("y", p.height)] {
            if val <= 0.0 {
                return Err(Error::Schema {
                    index,
                    field: name.into(),
                    problem: "non-positive",
                });
            }
        }
        out.push(p);
    }
    Ok(out)
}

fn is_object_array(v: &Value) -> bool {
    matches!(v, Value::Array(a) if !a.is_empty() && a.iter().all(Value::is_object))
}

// ------------------------------------------------------------ scanning

fn prev_significant(bytes: &[u8], i: usize) -> Option<u8> {
    bytes[..i].iter().rev().copied().find(|b| !b.is_ascii_whitespace())
}

/// Whether a quote at `i` opens a string in a JSON-like position.
fn opens_string(bytes: &[u8], i: usize, start: usize) -> bool {
    match bytes[i] {
        b'"' => true,
        b'\'' => i > start && matches!(prev_significant(bytes, i), Some(b'{' | b'[' | b',' | b':')),
        _ => false,
    }
}

/// End (exclusive) of the bracket group opened at `start`, if it closes.
fn match_bracket(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut i = start;
    while i < bytes.len() {
        let b = bytes[i];
        if opens_string(bytes, i, start) {
            let q = b;
            i += 1;
            while i < bytes.len() && bytes[i] != q {
                if bytes[i] == b'\\' {
                    i += 2;
                    continue;
                }
                if q == b'\'' && bytes[i] == b'\n' {
                    return None;
                }
                i += 1;
            }
        } else if b == b'[' || b == b'{' {
            depth += 1;
        } else if b == b']' || b == b'}' {
            depth = depth.checked_sub(1)?;
            if depth == 0 {
                return (b == b']').then_some(i + 1);
            }
        }
        i += 1;
    }
    None
}

/// Balanced `[...]` spans in the text, in start order.
pub fn bracket_spans(text: &str) -> Vec<(usize, usize)> {
    let bytes = &text.as_bytes()[..text.len().min(MAX_SCAN_BYTES)];
    bytes
        .iter()
        .enumerate()
        .filter(|(_, b)| **b == b'[')
        .filter_map(|(i, _)| match_bracket(bytes, i).map(|e| (i, e)))
        .collect()
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

/// Rewrites common JSON-adjacent syntax into JSON: single-quoted strings,
/// bare object keys, Python literals and trailing commas.
pub fn repair_json(src: &str) -> String {
    let chars: Vec<char> = src.chars().collect();
    let mut out = String::with_capacity(src.len() + 16);
    let mut i = 0;
    let last_sig = |out: &String| out.chars().rev().find(|c| !c.is_whitespace());
    while i < chars.len() {
        let c = chars[i];
        match c {
            '"' | '\'' => {
                out.push('"');
                i += 1;
                while i < chars.len() && chars[i] != c {
                    match chars[i] {
                        '\\' if i + 1 < chars.len() => {
                            if chars[i + 1] == '\'' {
                                out.push('\'');
                            } else {
                                out.push('\\');
                                out.push(chars[i + 1]);
                            }
                            i += 2;
                            continue;
                        }
                        '"' => out.push_str("\\\""),
                        '\n' => out.push_str("\\n"),
                        ch => out.push(ch),
                    }
                    i += 1;
                }
                out.push('"');
                i += 1;
            }
            ']' | '}' => {
                let trimmed = out.trim_end().len();
                if out[..trimmed].ends_with(',') {
                    out.truncate(trimmed - 1);
                }
                out.push(c);
                i += 1;
            }
            c if is_ident_start(c) => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let mut j = i;
                while j < chars.len() && chars[j].is_whitespace() {
                    j += 1;
                }
                let is_key = matches!(last_sig(&out), Some('{' | ',')) && chars.get(j) == Some(&':');
                if is_key {
                    out.push('"');
                    out.push_str(&word);
                    out.push('"');
                } else {
                    out.push_str(match word.as_str() {
                        "True" => "true",
                        "False" => "false",
                        "None" => "null",
                        w => w,
                    });
                }
            }
            _ => {
                out.push(c);
                i += 1;
            }
        }
    }
    out
}

fn parse_lenient(span: &str) -> Option<(Value, bool)> {
    if let Ok(v) = serde_json::from_str::<Value>(span) {
        return Some((v, false));
    }
    serde_json::from_str::<Value>(&repair_json(span))
        .ok()
        .map(|v| (v, true))
}

// ------------------------------------------------------------ cascade

fn direct_stage(raw: &str) -> std::result::Result<Result<Vec<PlacedTransistor>>, String> {
    match serde_json::from_str::<Value>(raw.trim()) {
        Ok(v @ Value::Array(_)) => match &v {
            Value::Array(a) if a.is_empty() => Err("direct: empty list".into()),
            _ => Ok(placements_from_value(&v)),
        },
        Ok(_) => Err("direct: top-level value is not a list".into()),
        Err(e) => Err(format!("direct: {e}")),
    }
}

fn scan_stage(raw: &str) -> std::result::Result<Result<Vec<PlacedTransistor>>, String> {
    let spans = bracket_spans(raw);
    if spans.is_empty() {
        return Err("scan: no balanced list found".into());
    }
    let mut candidates: Vec<(usize, usize, Value)> = spans
        .into_iter()
        .filter_map(|(s, e)| parse_lenient(&raw[s..e]).map(|(v, _)| (s, e, v)))
        .filter(|(_, _, v)| is_object_array(v))
        .collect();
    if candidates.is_empty() {
        return Err("scan: no list of objects found".into());
    }
    // Last to finish wins; among equal ends the outermost.
    candidates.sort_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
    let mut first_err = None;
    for (_, _, v) in candidates.iter().rev() {
        match placements_from_value(v) {
            Ok(p) => return Ok(Ok(p)),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Ok(Err(first_err.expect("at least one candidate")))
}

/// Runs the deterministic cascade. Fails with [`Error::Schema`] when a list
/// is found but does not carry the required fields.
pub fn extract_placements(raw: &str) -> Result<ExtractionResult> {
    let mut diagnostics = Vec::new();
    match direct_stage(raw) {
        Ok(r) => {
            return r.map(|placements| ExtractionResult {
                placements,
                method: ExtractionMethod::DirectJson,
                diagnostics,
            })
        }
        Err(d) => diagnostics.push(d),
    }
    match scan_stage(raw) {
        Ok(r) => r.map(|placements| ExtractionResult {
            placements,
            method: ExtractionMethod::ScanRepair,
            diagnostics,
        }),
        Err(d) => {
            diagnostics.push(d);
            Err(Error::ExtractionFailed { diagnostics })
        }
    }
}

fn flatten(stage: &str, e: Error) -> Vec<String> {
    match e {
        Error::ExtractionFailed { diagnostics } => diagnostics.into_iter().map(|d| format!("{stage}/{d}")).collect(),
        other => vec![format!("{stage}: {other}")],
    }
}

pub fn render_judge_prompt(raw: &str) -> String {
    crate::promptio::template(JUDGE_TEMPLATE).replace("@@RAW@@", raw)
}

/// Asks `client` to restate `raw` as a clean list, then runs the cascade on
/// the reply.
pub fn judge_extract(raw: &str, client: &dyn CompletionClient, model: &str) -> Result<ExtractionResult> {
    let req = CompletionRequest::new(model, render_judge_prompt(raw));
    let reply = client.complete(&req).map_err(|e| Error::ExtractionFailed {
        diagnostics: vec![format!("judge: transport: {e}")],
    })?;
    match extract_placements(&reply) {
        Ok(mut r) => {
            r.method = ExtractionMethod::Judge;
            r.diagnostics = r.diagnostics.into_iter().map(|d| format!("judge/{d}")).collect();
            Ok(r)
        }
        Err(e) => Err(Error::ExtractionFailed {
            diagnostics: flatten("judge", e),
        }),
    }
}

/// Cascade first; the judge only sees outputs the cascade could not read.
pub fn extract_with_fallback(
    raw: &str,
    client: Option<&dyn CompletionClient>,
    model: &str,
) -> Result<ExtractionResult> {
    let first = match extract_placements(raw) {
        Ok(r) => return Ok(r),
        Err(e) => e,
    };
    let Some(client) = client else {
        return Err(first);
    };
    match judge_extract(raw, client, model) {
        Ok(mut r) => {
            let mut diags = flatten("cascade", first);
            diags.append(&mut r.diagnostics);
            r.diagnostics = diags;
            Ok(r)
        }
        Err(e) => {
            let mut diags = flatten("cascade", first);
            diags.extend(
                flatten("judge", e)
                    .into_iter()
                    .map(|d| d.replacen("judge/judge", "judge", 1)),
            );
            Err(Error::ExtractionFailed { diagnostics: diags })
        }
    }
}

// ------------------------------------------------------------ validation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    LengthMismatch {
        expected: usize,
        got: usize,
    },
    OrderMismatch {
        index: usize,
        expected: String,
        got: String,
    },
    Hallucinated {
        id: String,
    },
    Missing {
        id: String,
    },
    FieldMutated {
        id: String,
        field: String,
        expected: String,
        got: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationVerdict {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Checks that `placements` restate `specs` exactly, in order.
pub fn validate_against_input(placements: &[PlacedTransistor], specs: &[TransistorSpec]) -> ValidationVerdict {
    let mut violations = Vec::new();
    if placements.len() != specs.len() {
        violations.push(Violation::LengthMismatch {
            expected: specs.len(),
            got: placements.len(),
        });
    }
    for p in placements {
        if !specs.iter().any(|s| s.id == p.id) {
            violations.push(Violation::Hallucinated { id: p.id.clone() });
        }
    }
    for s in specs {
        if !placements.iter().any(|p| p.id == s.id) {
            violations.push(Violation::Missing { id: s.id.clone() });
        }
    }
    for (index, (p, s)) in placements.iter().zip(specs).enumerate() {
        if p.id != s.id {
            violations.push(Violation::OrderMismatch {
                index,
                expected: s.id.clone(),
                got: p.id.clone(),
            });
        }
    }
    for p in placements {
        let Some(s) = specs.iter().find(|s| s.id == p.id) else {
            continue;
        };
        if p.ttype != s.ttype {
            violations.push(Violation::FieldMutated {
                id: p.id.clone(),
                field: "type".into(),
                expected: s.ttype.clone(),
                got: p.ttype.clone(),
            });
        }
        for (name, want, got) in [("x", s.width, p.width), ("y", s.height, p.height)] {
            if (want - got).abs() > FIELD_TOLERANCE {
                violations.push(Violation::FieldMutated {
                    id: p.id.clone(),
                    field: name.into(),
                    expected: want.to_string(),
                    got: got.to_string(),
                });
            }
        }
    }
    ValidationVerdict {
        ok: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLEAN: &str = r#"[{"x": 3.92, "y": 8.36, "id": "sb2", "type": "P", "c_x": 8.0, "c_y": 4.18}]"#;

    #[test]
    fn direct_json() {
        let r = extract_placements(CLEAN).unwrap();
        assert_eq!(r.method, ExtractionMethod::DirectJson);
        assert_eq!(r.placements[0].cx, 8.0);
        assert_eq!(r.placements[0].width, 3.92);
    }

    #[test]
    fn prose_and_fence() {
        let raw = format!("Sure! Here is the layout:\n```json\n{CLEAN}\n```\nLet me know.");
        let r = extract_placements(&raw).unwrap();
        assert_eq!(r.method, ExtractionMethod::ScanRepair);
        assert_eq!(r.placements.len(), 1);
        assert!(r.diagnostics[0].starts_with("direct:"));
    }

    #[test]
    fn trailing_comma_single_quotes_bare_keys() {
        let raw = "result: [{id: 'sb1', type: 'N', x: 1, y: 2, cx: 3, cy: 4,},]";
        let r = extract_placements(raw).unwrap();
        assert_eq!(r.placements[0].id, "sb1");
        assert_eq!(r.placements[0].cy, 4.0);
    }

    #[test]
    fn last_list_wins() {
        let raw = r#"draft: [{"id":"a","type":"P","x":1,"y":1,"c_x":0,"c_y":0}]
final: [{"id":"a","type":"P","x":1,"y":1,"c_x":5,"c_y":5}]"#;
        assert_eq!(extract_placements(raw).unwrap().placements[0].cx, 5.0);
    }

    #[test]
    fn missing_center_is_schema_error() {
        let raw = r#"[{"id":"a","type":"P","x":1,"y":1,"c_y":0}]"#;
        match extract_placements(raw) {
            Err(Error::Schema { index, field, problem }) => {
                assert_eq!((index, field.as_str(), problem), (0, "c_x", "missing"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nothing_recoverable() {
        match extract_placements("I cannot place these [sorry.") {
            Err(Error::ExtractionFailed { diagnostics }) => {
                assert_eq!(diagnostics.len(), 2);
                assert!(diagnostics[0].starts_with("direct:"));
                assert!(diagnostics[1].starts_with("scan:"));
            }
            other => panic!("{other:?}"),
        }
        assert!(extract_placements("[]").is_err());
    }

    #[test]
    fn apostrophes_in_prose_do_not_confuse_scanner() {
        let raw = format!("Here's what I'd do: {CLEAN} and that's it.");
        assert_eq!(extract_placements(&raw).unwrap().placements.len(), 1);
    }

    #[test]
    fn validation_catches_each_violation() {
        let specs = vec![
            TransistorSpec {
                id: "a".into(),
                ttype: "P".into(),
                width: 1.0,
                height: 2.0,
            },
            TransistorSpec {
                id: "b".into(),
                ttype: "N".into(),
                width: 1.0,
                height: 2.0,
            },
        ];
        let mk = |id: &str, t: &str, w: f64| PlacedTransistor {
            id: id.into(),
            ttype: t.into(),
            width: w,
            height: 2.0,
            cx: 0.0,
            cy: 0.0,
        };
        assert!(validate_against_input(&[mk("a", "P", 1.0), mk("b", "N", 1.0)], &specs).ok);
        let v = validate_against_input(&[mk("b", "N", 1.0), mk("a", "P", 1.5)], &specs);
        assert!(v
            .violations
            .iter()
            .any(|x| matches!(x, Violation::OrderMismatch { .. })));
        assert!(v
            .violations
            .iter()
            .any(|x| matches!(x, Violation::FieldMutated { field, .. } if field == "x")));
        let v = validate_against_input(&[mk("a", "P", 1.0), mk("z", "N", 1.0)], &specs);
        assert!(v.violations.contains(&Violation::Hallucinated { id: "z".into() }));
        assert!(v.violations.contains(&Violation::Missing { id: "b".into() }));
        let v = validate_against_input(&[mk("a", "P", 1.0)], &specs);
        assert!(v
            .violations
            .contains(&Violation::LengthMismatch { expected: 2, got: 1 }));
    }

    #[test]
    fn serde_names() {
        let p: PlacedTransistor = serde_json::from_str(r#"{"id":"a","type":"P","x":1,"y":2,"cx":3,"cy":4}"#).unwrap();
        let back = serde_json::to_value(&p).unwrap();
        assert_eq!(back["c_x"], 3.0);
        assert_eq!(back["type"], "P");
    }
}
