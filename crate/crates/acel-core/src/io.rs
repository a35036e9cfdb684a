//! File formats: newline-delimited JSON event streams, JSON schemas, and
//! the one-line-per-complex-event result format.
//!
//! Stream line: a JSON object of attribute values, e.g.
//! `{"type":"SELL","name":"MSFT","price":101}`; the event's time is its
//! zero-based line index. Schema file: `{"TYPE":["attr",…]}`. Result line:
//! `{"start":0,"end":4,"valuation":{"msft":[{"time":0,"attrs":{…}}]}}` with
//! bag members in canonical order, so equal result sets serialize to
//! byte-identical output.

use std::collections::BTreeMap;

use serde_json::{json, Map, Number};

use crate::error::StreamViolation;
use crate::model::{ComplexEvent, Event, EventBag, Schema, Stream, Value};

/// Converts a JSON scalar into a value. Non-finite floats use the tagged
/// form `{"$float":"inf"|"-inf"|"nan"}` since JSON has no literal for them.
pub fn value_from_json(v: &serde_json::Value) -> Result<Value, String> {
    match v {
        serde_json::Value::Null => Ok(Value::Null),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Value::Int(i))
            } else if let Some(f) = n.as_f64() {
                Ok(Value::Float(f))
            } else {
                Err(format!("number {n} fits neither i64 nor f64"))
            }
        }
        serde_json::Value::String(s) => Ok(Value::text(s.clone())),
        serde_json::Value::Object(m) => match m.get("$float").and_then(|x| x.as_str()) {
            Some("inf") => Ok(Value::Float(f64::INFINITY)),
            Some("-inf") => Ok(Value::Float(f64::NEG_INFINITY)),
            Some("nan") => Ok(Value::Float(f64::NAN)),
            _ => Err(format!("unsupported value {v}")),
        },
        other => Err(format!("unsupported value {other}")),
    }
}

/// Inverse of [`value_from_json`]. Engine-internal pair values are not
/// serializable and report an error.
pub fn value_to_json(v: &Value) -> Result<serde_json::Value, String> {
    match v {
        Value::Null => Ok(serde_json::Value::Null),
        Value::Int(i) => Ok(json!(i)),
        Value::Float(f) if f.is_finite() => Ok(serde_json::Value::Number(
            Number::from_f64(*f).expect("finite float"),
        )),
        Value::Float(f) if f.is_nan() => Ok(json!({"$float": "nan"})),
        Value::Float(f) if *f > 0.0 => Ok(json!({"$float": "inf"})),
        Value::Float(_) => Ok(json!({"$float": "-inf"})),
        Value::Text(s) => Ok(json!(s)),
        Value::Pair(..) => Err("internal pair value cannot be serialized".into()),
    }
}

/// Parses a newline-delimited JSON stream; blank lines are skipped, events
/// take their line order as time.
pub fn parse_stream(text: &str) -> Result<Stream, StreamViolation> {
    let mut events = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let index = events.len();
        let fail = |reason: String| StreamViolation { index, reason };
        let parsed: serde_json::Value =
            serde_json::from_str(line).map_err(|e| fail(format!("malformed JSON: {e}")))?;
        let obj = parsed
            .as_object()
            .ok_or_else(|| fail("event line is not a JSON object".into()))?;
        let mut attrs = BTreeMap::new();
        for (k, v) in obj {
            attrs.insert(k.clone(), value_from_json(v).map_err(fail)?);
        }
        events.push(Event::new(index as u64, attrs));
    }
    Ok(Stream::new(events))
}

/// Parses a `{"TYPE": ["attr", …]}` schema document.
pub fn parse_schema(text: &str) -> Result<Schema, String> {
    let parsed: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("malformed schema JSON: {e}"))?;
    let obj = parsed.as_object().ok_or("schema is not a JSON object")?;
    let mut types = BTreeMap::new();
    for (ty, attrs) in obj {
        let list = attrs
            .as_array()
            .ok_or_else(|| format!("attributes of {ty} are not an array"))?;
        let mut set = std::collections::BTreeSet::new();
        for a in list {
            let name = a
                .as_str()
                .ok_or_else(|| format!("attribute of {ty} is not a string"))?;
            set.insert(name.to_string());
        }
        types.insert(ty.clone(), set);
    }
    Ok(Schema::new(types))
}

pub fn schema_to_json(schema: &Schema) -> serde_json::Value {
    let mut obj = Map::new();
    for (ty, attrs) in schema.iter() {
        obj.insert(
            ty.to_string(),
            serde_json::Value::Array(attrs.iter().map(|a| json!(a)).collect()),
        );
    }
    serde_json::Value::Object(obj)
}

/// Derives a schema from a stream: each type's attribute set is taken from
/// its first occurrence (validation catches later mismatches).
pub fn infer_schema(stream: &Stream) -> Schema {
    let mut types: BTreeMap<String, std::collections::BTreeSet<String>> = BTreeMap::new();
    for (_, e) in stream.iter() {
        if let Some(t) = e.event_type() {
            types.entry(t.to_string()).or_insert_with(|| {
                e.attr_names()
                    .filter(|a| *a != crate::model::TYPE_ATTR)
                    .map(str::to_string)
                    .collect()
            });
        }
    }
    Schema::new(types)
}

fn event_to_json(e: &Event) -> Result<serde_json::Value, String> {
    let mut attrs = Map::new();
    for (k, v) in e.attrs() {
        attrs.insert(k.clone(), value_to_json(v)?);
    }
    Ok(json!({"time": e.time(), "attrs": attrs}))
}

fn event_from_json(v: &serde_json::Value) -> Result<Event, String> {
    let obj = v.as_object().ok_or("event is not a JSON object")?;
    let time = obj
        .get("time")
        .and_then(|t| t.as_u64())
        .ok_or("event has no numeric time")?;
    let attrs_obj = obj
        .get("attrs")
        .and_then(|a| a.as_object())
        .ok_or("event has no attrs object")?;
    let mut attrs = BTreeMap::new();
    for (k, raw) in attrs_obj {
        attrs.insert(k.clone(), value_from_json(raw)?);
    }
    Ok(Event::new(time, attrs))
}

/// Serializes one complex event as a single JSON line (no trailing
/// newline). Bags print in their canonical order.
pub fn complex_to_line(c: &ComplexEvent) -> Result<String, String> {
    let mut valuation = Map::new();
    for (var, bag) in c.valuation() {
        let events: Result<Vec<_>, _> = bag.iter().map(event_to_json).collect();
        valuation.insert(var.clone(), serde_json::Value::Array(events?));
    }
    Ok(json!({"start": c.start(), "end": c.end(), "valuation": valuation}).to_string())
}

/// Parses a line produced by [`complex_to_line`].
pub fn complex_from_line(line: &str) -> Result<ComplexEvent, String> {
    let parsed: serde_json::Value =
        serde_json::from_str(line).map_err(|e| format!("malformed result line: {e}"))?;
    let obj = parsed.as_object().ok_or("result line is not a JSON object")?;
    let start = obj
        .get("start")
        .and_then(|v| v.as_u64())
        .ok_or("result has no numeric start")? as usize;
    let end = obj
        .get("end")
        .and_then(|v| v.as_u64())
        .ok_or("result has no numeric end")? as usize;
    let valuation_obj = obj
        .get("valuation")
        .and_then(|v| v.as_object())
        .ok_or("result has no valuation object")?;
    let mut valuation = BTreeMap::new();
    for (var, arr) in valuation_obj {
        let list = arr.as_array().ok_or_else(|| format!("bag of {var} is not an array"))?;
        let mut bag = EventBag::empty();
        for ev in list {
            bag.insert(event_from_json(ev)?);
        }
        valuation.insert(var.clone(), bag);
    }
    Ok(ComplexEvent::new(start, end, valuation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_stream, TYPE_ATTR};

    const STREAM: &str = r#"
        {"type":"SELL","name":"MSFT","price":101}
        {"type":"BUY","name":"INTC","price":80}
    "#;

    #[test]
    fn stream_lines_become_indexed_events() {
        let s = parse_stream(STREAM).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.get(0).unwrap().get("name"), Value::text("MSFT"));
        assert_eq!(s.get(1).unwrap().time(), 1);
    }

    #[test]
    fn malformed_line_reports_its_index() {
        let err = parse_stream("{\"type\":\"A\"}\nnot json").unwrap_err();
        assert_eq!(err.index, 1);
    }

    #[test]
    fn schema_round_trip_and_inference() {
        let schema = parse_schema(r#"{"SELL":["name","price"],"BUY":["name","price"]}"#).unwrap();
        assert_eq!(schema.attrs_of("SELL").unwrap().len(), 2);
        let s = parse_stream(STREAM).unwrap();
        let inferred = infer_schema(&s);
        assert_eq!(inferred, schema);
        assert!(validate_stream(&s, &inferred).is_ok());
        let back = parse_schema(&schema_to_json(&schema).to_string()).unwrap();
        assert_eq!(back, schema);
    }

    #[test]
    fn result_line_round_trips() {
        let e = Event::from_pairs(
            4,
            [
                (TYPE_ATTR, Value::text("SELL")),
                ("price", Value::Int(80)),
                ("f", Value::Float(1.5)),
                ("n", Value::Null),
            ],
        );
        let c = ComplexEvent::singleton(4, "intel", e);
        let line = complex_to_line(&c).unwrap();
        assert_eq!(complex_from_line(&line).unwrap(), c);
    }

    #[test]
    fn non_finite_floats_round_trip() {
        let e = Event::from_pairs(0, [("v", Value::Float(f64::NEG_INFINITY))]);
        let c = ComplexEvent::singleton(0, "x", e);
        let line = complex_to_line(&c).unwrap();
        assert!(line.contains("$float"));
        assert_eq!(complex_from_line(&line).unwrap(), c);
    }

    #[test]
    fn pair_values_refuse_serialization() {
        let e = Event::from_pairs(0, [("v", Value::pair(Value::Int(1), Value::Int(2)))]);
        let c = ComplexEvent::singleton(0, "x", e);
        assert!(complex_to_line(&c).is_err());
    }
}
