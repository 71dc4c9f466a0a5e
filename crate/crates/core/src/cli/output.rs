//! Artifact writers. JSON floats carry 17 significant digits; CSV files start
//! with `#` metadata lines followed by one fixed header row.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// `{:.16e}` for every float, pretty layout otherwise.
struct FloatFormatter<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FloatFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

pub fn to_json_string<T: Serialize>(value: &T) -> io::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FloatFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(io::Error::other)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(io::Error::other)
}

/// Single-line form used inside CSV metadata.
fn to_json_line(value: &Value) -> String {
    to_json_string(value)
        .map(|s| s.lines().map(str::trim).collect::<Vec<_>>().join(" "))
        .unwrap_or_default()
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => format_float(*x),
            Cell::I(i) => i.to_string(),
            Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::S(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// `field,value` rows for every scalar leaf of a JSON value.
    pub fn fields(value: &Value) -> Self {
        let mut t = Self::new(&["field", "value"]);
        flatten("", value, &mut t.rows);
        t
    }
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<Vec<Cell>>) {
    let leaf = |c: Cell| vec![Cell::S(prefix.to_string()), c];
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, rows);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, rows);
            }
        }
        Value::Null => rows.push(leaf(Cell::S(String::new()))),
        Value::Bool(b) => rows.push(leaf(Cell::S(b.to_string()))),
        Value::String(s) => rows.push(leaf(Cell::S(s.clone()))),
        Value::Number(n) => rows.push(leaf(match n.as_i64() {
            Some(i) if !n.is_f64() => Cell::I(i),
            _ => Cell::F(n.as_f64().unwrap_or(f64::NAN)),
        })),
    }
}

/// Everything an artifact carries besides its payload.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    pub schema_version: u32,
    pub command: String,
    pub config: Value,
    pub system: Option<Value>,
    pub validation: Option<Value>,
    pub warnings: Vec<String>,
    pub exit_status: u8,
}

#[derive(Serialize)]
struct JsonArtifact<'a> {
    #[serde(flatten)]
    envelope: &'a Envelope,
    result: &'a Value,
}

pub fn render_json(envelope: &Envelope, result: &Value) -> io::Result<String> {
    to_json_string(&JsonArtifact { envelope, result })
}

pub fn render_csv(envelope: &Envelope, table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&format!("# schema_version: {}\n", envelope.schema_version));
    out.push_str(&format!("# command: {}\n", envelope.command));
    out.push_str(&format!("# config: {}\n", to_json_line(&envelope.config)));
    if let Some(s) = &envelope.system {
        out.push_str(&format!("# system: {}\n", to_json_line(s)));
    }
    if let Some(v) = &envelope.validation {
        out.push_str(&format!("# validation: {}\n", to_json_line(v)));
    }
    for w in &envelope.warnings {
        out.push_str(&format!("# warning: {w}\n"));
    }
    out.push_str(&format!("# exit_status: {}\n", envelope.exit_status));
    out.push_str(&table.headers.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
