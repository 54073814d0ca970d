//! JSON and CSV emission for estimator results.

pub mod ext;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::calculus::{LimitEstimate, TraceRow, Verdict};
use crate::error::Result;
use crate::moduli::RegularityReport;
use crate::setmap::HolderOrder;

pub use ext::ExtReal;

/// Pretty JSON with non-finite floats spelled as strings, newline terminated.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&ExtReal(value))?;
    s.push('\n');
    Ok(s)
}

/// A JSON value with non-finite floats spelled as strings.
pub fn to_value<T: Serialize + ?Sized>(value: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(ExtReal(value))?)
}

/// Quantities a report can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    NormLower,
    NormOuter,
    NormStar,
    SubderivativeNorm,
    StrongSubregularity,
    IsolatedCalmness,
    SharpMinimum,
}

impl Quantity {
    /// Where the quantity is defined, in words.
    pub fn anchor(self) -> &'static str {
        match self {
            Quantity::NormLower => "lower norm of a positively homogeneous map: inf of |y|/|x|^q over its graph",
            Quantity::NormOuter => "outer norm of a positively homogeneous map: sup of |y|/|x|^q over its graph",
            Quantity::NormStar => "positive-definiteness modulus: best lambda with <y,x> >= lambda |x|^(q+1)",
            Quantity::SubderivativeNorm => "inf over unit directions of the positive part of the Hadamard subderivative",
            Quantity::StrongSubregularity => "strong metric subregularity modulus of order q",
            Quantity::IsolatedCalmness => "isolated calmness modulus of order q",
            Quantity::SharpMinimum => "sharp minimizer modulus of order q",
        }
    }
}

/// Serialized form of a [`LimitEstimate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub quantity: Quantity,
    pub anchor: &'static str,
    pub q: f64,
    pub value: f64,
    pub verdict: Verdict,
    pub converged: bool,
    pub per_scale: Vec<(f64, f64)>,
}

impl LimitReport {
    pub fn new(quantity: Quantity, q: HolderOrder, e: &LimitEstimate) -> Self {
        LimitReport {
            quantity,
            anchor: quantity.anchor(),
            q: q.get(),
            value: e.value,
            verdict: e.verdict,
            converged: e.converged,
            per_scale: e.per_scale.clone(),
        }
    }
}

/// Serialized form of a [`RegularityReport`] with its anchor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusReport<'a> {
    /// Carried by the flattened report under the same key.
    #[serde(skip)]
    pub quantity: Quantity,
    pub anchor: &'static str,
    #[serde(flatten)]
    pub report: &'a RegularityReport,
}

impl<'a> ModulusReport<'a> {
    pub fn new(quantity: Quantity, report: &'a RegularityReport) -> Self {
        ModulusReport {
            quantity,
            anchor: quantity.anchor(),
            report,
        }
    }
}

pub const CSV_HEADER: &str = "direction_index,t,value\n";

fn csv_value(v: f64) -> String {
    match ext::float_token(v) {
        Some(t) => t.to_owned(),
        None => format!("{v}"),
    }
}

/// `direction_index,t,value` rows with LF endings.
pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.direction_index, csv_value(r.t), csv_value(r.value));
    }
    out
}

/// CSV of an estimate: its trace when recorded, else the per-scale values
/// under direction index 0.
pub fn estimate_csv(e: &LimitEstimate) -> String {
    if e.trace.is_empty() {
        trace_csv(&per_scale_rows(&e.per_scale))
    } else {
        trace_csv(&e.trace)
    }
}

pub fn per_scale_rows(per_scale: &[(f64, f64)]) -> Vec<TraceRow> {
    per_scale
        .iter()
        .map(|&(t, value)| TraceRow {
            direction_index: 0,
            t,
            value,
        })
        .collect()
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("report");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Tolerances;

    #[test]
    fn limit_report_json() {
        let e = LimitEstimate::from_scales(vec![(0.1, 10.0), (0.05, f64::INFINITY)], &Tolerances::default());
        let r = LimitReport::new(Quantity::NormLower, HolderOrder::new(3.0).unwrap(), &e);
        let v: serde_json::Value = serde_json::from_str(&to_json(&r).unwrap()).unwrap();
        assert_eq!(v["quantity"], "norm_lower");
        assert_eq!(v["value"], "inf");
        assert_eq!(v["verdict"], "infinite");
        assert_eq!(v["per_scale"][1][1], "inf");
    }

    #[test]
    fn modulus_report_has_one_quantity_key() {
        use crate::moduli::sharp_minimum_modulus;
        use crate::settings::Settings;
        use crate::setmap::ScalarFn;
        let s = Settings::default();
        let f = ScalarFn::new(1, |x| x[0] * x[0]);
        let q = HolderOrder::new(2.0).unwrap();
        let r = sharp_minimum_modulus(&f, &[0.0], q, &s.radii, &s.grid(1).unwrap(), &s.tol).unwrap();
        let text = to_json(&ModulusReport::new(Quantity::SharpMinimum, &r)).unwrap();
        assert_eq!(text.matches("\"quantity\"").count(), 1, "{text}");
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["quantity"], "sharp_minimum");
        assert_eq!(v["anchor"], Quantity::SharpMinimum.anchor());
    }

    #[test]
    fn csv_schema() {
        let rows = [
            TraceRow {
                direction_index: 0,
                t: 0.1,
                value: 2.5,
            },
            TraceRow {
                direction_index: 1,
                t: 1e-7,
                value: f64::INFINITY,
            },
        ];
        assert_eq!(trace_csv(&rows), "direction_index,t,value\n0,0.1,2.5\n1,0.0000001,inf\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("holder-reg-report-{}", std::process::id()));
        let p = dir.join("nested").join("r.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
