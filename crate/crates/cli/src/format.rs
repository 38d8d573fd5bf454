//! Fixed, locale-free number formatting shared by every output writer.

use std::fmt::Write as _;

use nalgebra::Vector3;

/// 17 significant digits in scientific notation; `null` when not finite.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        // adding zero folds −0 into +0
        format!("{:.16e}", x + 0.0)
    } else {
        "null".to_string()
    }
}

pub fn vec3(v: &Vector3<f64>) -> String {
    format!("[{},{},{}]", num(v.x), num(v.y), num(v.z))
}

pub fn vec3_list(vs: &[Vector3<f64>]) -> String {
    let items: Vec<String> = vs.iter().map(vec3).collect();
    format!("[{}]", items.join(","))
}

/// A single output value, rendered identically for JSON lines and CSV apart
/// from `null`, which CSV leaves empty.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(u64),
    Num(f64),
    Bool(bool),
    Null,
    Raw(String),
}

impl Value {
    pub fn opt(x: Option<f64>) -> Self {
        x.map_or(Value::Null, Value::Num)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(i) => Some(i as f64),
            Value::Num(x) => x.is_finite().then_some(x),
            Value::Bool(b) => Some(if b { 1.0 } else { 0.0 }),
            _ => None,
        }
    }

    fn json(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Num(x) => num(*x),
            Value::Bool(b) => b.to_string(),
            Value::Null => "null".to_string(),
            Value::Raw(s) => s.clone(),
        }
    }

    fn csv(&self) -> String {
        match self {
            Value::Null => String::new(),
            Value::Raw(s) => format!("\"{}\"", s.replace('"', "\"\"")),
            Value::Num(x) if !x.is_finite() => String::new(),
            other => other.json(),
        }
    }
}

pub type Record = Vec<(&'static str, Value)>;

pub fn json_line(record: &Record) -> String {
    let mut out = String::from("{");
    for (k, (name, value)) in record.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        let _ = write!(out, "\"{name}\":{}", value.json());
    }
    out.push('}');
    out
}

pub fn csv_header(record: &Record) -> String {
    record.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(",")
}

pub fn csv_row(record: &Record) -> String {
    record.iter().map(|(_, v)| v.csv()).collect::<Vec<_>>().join(",")
}
