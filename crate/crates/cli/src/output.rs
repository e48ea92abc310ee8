//! Output documents.
//!
//! JSON reals carry 17 significant digits so that they read back to the same
//! double; CSV reals carry 12. Non-finite values are written as `null` (JSON)
//! or an empty field (CSV).

use fundmat::fmt::format_significant;
use fundmat::{Error, Report};
use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

pub const JSON_DIGITS: usize = 17;
pub const CSV_DIGITS: usize = 12;

/// A real written with [`JSON_DIGITS`] significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format_significant(self.0, JSON_DIGITS))
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub fn nums(v: &DVector<f64>) -> Vec<Num> {
    v.iter().map(|&x| Num(x)).collect()
}

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<Num>> {
    m.row_iter()
        .map(|r| r.iter().map(|&x| Num(x)).collect())
        .collect()
}

pub fn csv_num(x: f64) -> String {
    if x.is_finite() {
        format_significant(x, CSV_DIGITS)
    } else {
        String::new()
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string(doc).expect("documents serialize");
    s.push('\n');
    s
}

/// CSV text with a header line; fields holding separators or quotes are quoted.
pub fn csv_table(header: &[&str], records: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for rec in records {
        let fields: Vec<String> = rec
            .into_iter()
            .map(|f| {
                if f.contains([',', '"', '\n']) {
                    format!("\"{}\"", f.replace('"', "\"\""))
                } else {
                    f
                }
            })
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: &'a str,
    detail: String,
    message: String,
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: ErrorBody<'a>,
}

pub fn error_json(code: &str, detail: String, message: String) -> String {
    to_json(&ErrorDoc {
        error: ErrorBody {
            code,
            detail,
            message,
        },
    })
}

pub fn library_error_json(e: &Error) -> String {
    error_json(e.code(), e.summary(), e.to_string())
}

#[derive(Serialize)]
struct CheckDoc<'a> {
    name: &'a str,
    status: &'static str,
    residual: Num,
    tolerance: Num,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    passed: bool,
    checks: Vec<CheckDoc<'a>>,
}

pub fn report_json(report: &Report) -> String {
    to_json(&ReportDoc {
        passed: report.passed(),
        checks: report
            .checks
            .iter()
            .map(|c| CheckDoc {
                name: &c.name,
                status: c.status.as_str(),
                residual: Num(c.residual),
                tolerance: Num(c.tolerance),
            })
            .collect(),
    })
}

pub fn report_csv(report: &Report) -> String {
    csv_table(
        &["check", "status", "residual", "tolerance"],
        report.checks.iter().map(|c| {
            vec![
                c.name.clone(),
                c.status.as_str().to_string(),
                csv_num(c.residual),
                csv_num(c.tolerance),
            ]
        }),
    )
}
