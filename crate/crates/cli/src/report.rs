//! CSV series and JSON summaries. Every float is written with 17
//! significant digits, enough to round-trip an `f64`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};

/// One PASS/FAIL decision, naming the invariant and the tolerance it used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub invariant: String,
    pub tolerance: Value,
    pub value: Value,
    pub passed: bool,
}

impl Verdict {
    pub fn new(name: &str, invariant: &str, tolerance: Value, value: Value, passed: bool) -> Self {
        Self {
            name: name.to_string(),
            invariant: invariant.to_string(),
            tolerance,
            value,
            passed,
        }
    }

    /// `value <= bound`.
    pub fn at_most(name: &str, invariant: &str, value: f64, bound: f64) -> Self {
        Self::new(name, invariant, json!(bound), json!(value), value <= bound)
    }

    /// `value >= bound`.
    pub fn at_least(name: &str, invariant: &str, value: f64, bound: f64) -> Self {
        Self::new(name, invariant, json!(bound), json!(value), value >= bound)
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// Results of one experiment before they are written out.
#[derive(Debug, Clone)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub results: Value,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
            results: Value::Object(Map::new()),
            verdicts: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.columns.len());
            for (i, &x) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{}", sig17(x)).expect("write to string");
            }
            out.push('\n');
        }
        out
    }
}

/// `x` with 17 significant digits; non-finite values as `nan`, `inf`, `-inf`.
pub fn sig17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// Pretty JSON with every float at 17 significant digits. Non-finite
/// floats never reach it: `serde_json` maps them to `null` first.
struct Sig17Formatter(PrettyFormatter<'static>);

impl Formatter for Sig17Formatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(sig17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// `value` as pretty JSON with 17-digit floats and a trailing newline.
pub fn to_json_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("json values serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report types serialize")
}

pub struct SummaryHeader<'a> {
    pub name: &'a str,
    pub experiment: &'a str,
    pub config: Value,
}

pub fn summary_json(header: &SummaryHeader<'_>, report: &Report) -> String {
    let summary = json!({
        "schema_version": crate::config::SCHEMA_VERSION,
        "solver_version": env!("CARGO_PKG_VERSION"),
        "name": header.name,
        "experiment": header.experiment,
        "config": header.config,
        "results": report.results,
        "verdicts": report.verdicts,
        "notes": report.notes,
        "passed": report.passed(),
    });
    to_json_string(&summary)
}

pub struct Written {
    pub csv: PathBuf,
    pub summary: PathBuf,
}

pub fn emit(out_dir: &Path, header: &SummaryHeader<'_>, report: &Report) -> io::Result<Written> {
    fs::create_dir_all(out_dir)?;
    let csv = out_dir.join(format!("{}.csv", header.name));
    let summary = out_dir.join(format!("{}.summary.json", header.name));
    fs::write(&csv, report.csv())?;
    fs::write(&summary, summary_json(header, report))?;
    Ok(Written { csv, summary })
}
