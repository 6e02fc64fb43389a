//! Sweep records and their CSV / JSON encodings.
//!
//! Floats are written with 12 significant digits in the shortest of fixed
//! or exponent notation (like C's `%.12g`). Missing values are `NaN` in CSV
//! and `null` in JSON.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{PhaseError, Result};

pub const CSV_HEADER: &str =
    "gamma,h,omega,state,b_value,theta,total,dynamical,geometric_closed,geometric_numeric,residual";

/// One cyclic state at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub gamma: f64,
    pub h: f64,
    pub omega: f64,
    pub state: String,
    pub b_value: f64,
    pub theta: f64,
    pub total: f64,
    pub dynamical: f64,
    pub geometric_closed: f64,
    pub geometric_numeric: f64,
    /// Circle distance between the two geometric phases.
    pub residual: f64,
}

impl SweepRecord {
    fn floats(&self) -> [(&'static str, f64); 10] {
        [
            ("gamma", self.gamma),
            ("h", self.h),
            ("omega", self.omega),
            ("b_value", self.b_value),
            ("theta", self.theta),
            ("total", self.total),
            ("dynamical", self.dynamical),
            ("geometric_closed", self.geometric_closed),
            ("geometric_numeric", self.geometric_numeric),
            ("residual", self.residual),
        ]
    }
}

/// `%.12g`-style formatting.
pub fn format_float(x: f64) -> String {
    format_sig(x, 12)
}

/// Shortest of fixed or exponent notation with `sig` significant digits,
/// trailing zeros removed.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn io_err(e: std::io::Error) -> PhaseError {
    PhaseError::Output(e.to_string())
}

pub fn write_csv<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}").map_err(io_err)?;
    for r in records {
        let f = |x: f64| format_float(x);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            f(r.gamma),
            f(r.h),
            f(r.omega),
            csv_field(&r.state),
            f(r.b_value),
            f(r.theta),
            f(r.total),
            f(r.dynamical),
            f(r.geometric_closed),
            f(r.geometric_numeric),
            f(r.residual)
        )
        .map_err(io_err)?;
    }
    Ok(())
}

fn json_number(x: f64) -> String {
    if x.is_finite() {
        format_float(x)
    } else {
        "null".into()
    }
}

/// JSON array of objects, one per record, keys in CSV column order.
pub fn write_json<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    if records.is_empty() {
        return writeln!(out, "[]").map_err(io_err);
    }
    writeln!(out, "[").map_err(io_err)?;
    for (i, r) in records.iter().enumerate() {
        let floats = r.floats();
        let mut fields: Vec<String> = floats[..3]
            .iter()
            .map(|(k, v)| format!("\"{k}\": {}", json_number(*v)))
            .collect();
        let label =
            serde_json::to_string(&r.state).map_err(|e| PhaseError::Output(e.to_string()))?;
        fields.push(format!("\"state\": {label}"));
        fields.extend(
            floats[3..]
                .iter()
                .map(|(k, v)| format!("\"{k}\": {}", json_number(*v))),
        );
        let sep = if i + 1 == records.len() { "" } else { "," };
        writeln!(out, "  {{{}}}{sep}", fields.join(", ")).map_err(io_err)?;
    }
    writeln!(out, "]").map_err(io_err)
}

pub fn to_csv_string(records: &[SweepRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8")
}

pub fn to_json_string(records: &[SweepRecord]) -> String {
    let mut buf = Vec::new();
    write_json(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8")
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| PhaseError::Output(e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if headers != CSV_HEADER {
        return Err(PhaseError::Output(format!("unexpected header {headers}")));
    }
    reader
        .deserialize()
        .map(|row| row.map_err(|e| PhaseError::Output(e.to_string())))
        .collect()
}

#[derive(Deserialize)]
struct JsonRecord {
    gamma: Option<f64>,
    h: Option<f64>,
    omega: Option<f64>,
    state: String,
    b_value: Option<f64>,
    theta: Option<f64>,
    total: Option<f64>,
    dynamical: Option<f64>,
    geometric_closed: Option<f64>,
    geometric_numeric: Option<f64>,
    residual: Option<f64>,
}

pub fn parse_json(text: &str) -> Result<Vec<SweepRecord>> {
    let rows: Vec<JsonRecord> =
        serde_json::from_str(text).map_err(|e| PhaseError::Output(e.to_string()))?;
    let n = |x: Option<f64>| x.unwrap_or(f64::NAN);
    Ok(rows
        .into_iter()
        .map(|r| SweepRecord {
            gamma: n(r.gamma),
            h: n(r.h),
            omega: n(r.omega),
            state: r.state,
            b_value: n(r.b_value),
            theta: n(r.theta),
            total: n(r.total),
            dynamical: n(r.dynamical),
            geometric_closed: n(r.geometric_closed),
            geometric_numeric: n(r.geometric_numeric),
            residual: n(r.residual),
        })
        .collect())
}

/// Largest per-field difference between two record lists; NaN matches NaN.
/// `None` when labels or lengths differ.
pub fn max_field_difference(a: &[SweepRecord], b: &[SweepRecord]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut worst = 0.0_f64;
    for (x, y) in a.iter().zip(b) {
        if x.state != y.state {
            return None;
        }
        for ((_, u), (_, v)) in x.floats().iter().zip(y.floats().iter()) {
            if u.is_nan() && v.is_nan() {
                continue;
            }
            if u.is_nan() != v.is_nan() {
                return None;
            }
            worst = worst.max((u - v).abs());
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(x: f64) -> SweepRecord {
        SweepRecord {
            gamma: 0.5,
            h: 0.3,
            omega: 0.1,
            state: "P+1".into(),
            b_value: -0.123456789012345,
            theta: std::f64::consts::PI,
            total: x,
            dynamical: -2.5e-7,
            geometric_closed: f64::NAN,
            geometric_numeric: 1e13,
            residual: f64::NAN,
        }
    }

    #[test]
    fn formatting_matches_g12() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_float(-0.920151185), "-0.920151185");
        assert_eq!(format_float(1e-5), "1e-05");
        assert_eq!(format_float(1.5e-4), "0.00015");
        assert_eq!(format_float(123456789012.0), "123456789012");
        assert_eq!(format_float(1234567890123.0), "1.23456789012e+12");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn empty_csv_is_header_only() {
        assert_eq!(to_csv_string(&[]), format!("{CSV_HEADER}\n"));
        assert_eq!(to_json_string(&[]), "[]\n");
    }

    #[test]
    fn one_record_round_trips() {
        let rs = vec![record(1.0 / 3.0)];
        let csv = to_csv_string(&rs);
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.ends_with('\n'));
        let back = parse_csv(&csv).unwrap();
        assert!(max_field_difference(&rs, &back).unwrap() < 1e-11 * 1e13);
        let json = to_json_string(&rs);
        let back = parse_json(&json).unwrap();
        assert!(max_field_difference(&rs, &back).unwrap() < 1e-11 * 1e13);
    }

    #[test]
    fn labels_with_commas_are_quoted() {
        let mut r = record(0.0);
        r.state = "a,b".into();
        let back = parse_csv(&to_csv_string(&[r.clone()])).unwrap();
        assert_eq!(back[0].state, "a,b");
    }

    proptest! {
        #[test]
        fn round_trip_relative_precision(x in -1e6f64..1e6) {
            let parsed: f64 = format_float(x).parse().unwrap();
            prop_assert!((parsed - x).abs() <= 1e-11 * x.abs().max(1.0));
        }

        #[test]
        fn csv_round_trip(xs in proptest::collection::vec(-10.0f64..10.0, 0..6)) {
            let rs: Vec<SweepRecord> = xs.iter().map(|&x| record(x)).collect();
            let back = parse_csv(&to_csv_string(&rs)).unwrap();
            let back_json = parse_json(&to_json_string(&rs)).unwrap();
            prop_assert_eq!(back.len(), rs.len());
            for (a, b) in rs.iter().zip(back.iter().chain(back_json.iter())) {
                prop_assert!((a.total - b.total).abs() < 1e-11);
            }
        }
    }
}
