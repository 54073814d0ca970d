//! Property suites cross-checking the estimators against one another and
//! against closed-form values.

mod calculus;
mod lsip;
mod moduli;
mod penalty;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calculus::{HomogeneousSampler, LimitEstimate};
use crate::error::{Error, Result};
use crate::moduli::checks::Magnitude;
use crate::settings::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Calculus,
    Moduli,
    Lsip,
    Penalty,
    All,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Calculus => "calculus",
            Suite::Moduli => "moduli",
            Suite::Lsip => "lsip",
            Suite::Penalty => "penalty",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "calculus" => Ok(Suite::Calculus),
            "moduli" => Ok(Suite::Moduli),
            "lsip" => Ok(Suite::Lsip),
            "penalty" => Ok(Suite::Penalty),
            "all" => Ok(Suite::All),
            other => Err(Error::usage(format!("unknown suite {other:?}"))),
        }
    }
}

/// One checked property instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub property_id: String,
    /// The statement being checked, in words.
    pub statement: String,
    pub pass: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl PropertyResult {
    fn new(id: impl Into<String>, statement: &str, pass: bool, lhs: f64, rhs: f64, slack: f64) -> Self {
        PropertyResult {
            property_id: id.into(),
            statement: statement.to_owned(),
            pass,
            lhs,
            rhs,
            slack,
            detail: None,
        }
    }

    fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    /// A property whose evaluation raised an error counts as failed.
    fn errored(id: impl Into<String>, statement: &str, err: &Error) -> Self {
        PropertyResult::new(id, statement, false, f64::NAN, f64::NAN, 0.0).with_detail(err.to_string())
    }
}

/// Knobs for a verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub settings: Settings,
    /// Relative bias injected into every lower-norm estimate. Nonzero only
    /// to confirm that the suites detect a corrupted estimator.
    pub norm_lower_bias: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            settings: Settings::default(),
            norm_lower_bias: 0.0,
        }
    }
}

pub(crate) struct Ctx<'a> {
    pub s: &'a Settings,
    pub bias: f64,
    pub out: Vec<PropertyResult>,
}

impl Ctx<'_> {
    pub fn lower(&self, h: &HomogeneousSampler) -> LimitEstimate {
        let mut e = h.clone().with_tolerances(self.s.tol).norm_lower();
        if self.bias != 0.0 {
            let k = 1.0 + self.bias;
            e.value *= k;
            for p in &mut e.per_scale {
                p.1 *= k;
            }
        }
        e
    }

    pub fn push(&mut self, r: PropertyResult) {
        self.out.push(r);
    }

    /// Records the result of a fallible property evaluation.
    pub fn record(&mut self, id: String, statement: &str, r: Result<PropertyResult>) {
        let res = match r {
            Ok(mut p) => {
                p.property_id = id;
                p
            }
            Err(e) => PropertyResult::errored(id, statement, &e),
        };
        self.out.push(res);
    }
}

/// `a` and `b` agree within relative slack, zero and infinite classes
/// matching exactly.
pub(crate) fn magnitudes_agree(a: Magnitude, b: Magnitude, slack: f64) -> bool {
    crate::moduli::checks::agree(a, b, slack)
}

/// `|a - b| <= rel·max(|a|,|b|) + abs`, with equal infinities accepted.
pub(crate) fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Vec<PropertyResult> {
    let mut ctx = Ctx {
        s: &opts.settings,
        bias: opts.norm_lower_bias,
        out: Vec::new(),
    };
    let all = suite == Suite::All;
    if all || suite == Suite::Calculus {
        calculus::run(&mut ctx);
    }
    if all || suite == Suite::Moduli {
        moduli::run(&mut ctx);
    }
    if all || suite == Suite::Lsip {
        lsip::run(&mut ctx);
    }
    if all || suite == Suite::Penalty {
        penalty::run(&mut ctx);
    }
    ctx.out
}

pub fn all_pass(results: &[PropertyResult]) -> bool {
    !results.is_empty() && results.iter().all(|r| r.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn failures(r: &[PropertyResult]) -> Vec<String> {
        r.iter()
            .filter(|p| !p.pass)
            .map(|p| format!("{} lhs={} rhs={} {:?}", p.property_id, p.lhs, p.rhs, p.detail))
            .collect()
    }

    #[test]
    fn every_suite_passes() {
        let r = run_suite(Suite::All, &VerifyOptions::default());
        assert!(all_pass(&r), "{:#?}", failures(&r));
        for suite in ["calculus.", "moduli.", "lsip.", "penalty."] {
            assert!(r.iter().any(|p| p.property_id.starts_with(suite)), "{suite}");
        }
        let mut ids: Vec<&str> = r.iter().map(|p| p.property_id.as_str()).collect();
        ids.sort_unstable();
        let n = ids.len();
        ids.dedup();
        assert_eq!(ids.len(), n, "property ids are unique");
    }

    #[test]
    fn biased_lower_norm_is_caught() {
        let opts = VerifyOptions {
            norm_lower_bias: 0.1,
            ..VerifyOptions::default()
        };
        let r = run_suite(Suite::Moduli, &opts);
        assert!(failures(&r).iter().any(|f| f.starts_with("moduli.srg_equals_lower")));
        assert!(!all_pass(&run_suite(Suite::Calculus, &opts)));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Calculus, Suite::Moduli, Suite::Lsip, Suite::Penalty, Suite::All] {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("everything".parse::<Suite>(), Err(Error::Usage(_))));
    }
}
