use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Values below this are reported as zero.
    pub eps_pos: f64,
    /// Values at or above this on the finest rung are reported as infinite.
    pub eps_inf: f64,
    /// Relative change between the two finest rungs accepted as converged.
    pub converge_rel: f64,
    /// Relative slack for single-estimator comparisons.
    pub slack: f64,
    /// Relative slack for comparisons chaining two estimators.
    pub chained_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_pos: 1e-6,
            eps_inf: 1e6,
            converge_rel: 1e-2,
            slack: 0.05,
            chained_slack: 0.10,
        }
    }
}

/// Growth ratio between consecutive rungs signalling a power-law blow-up.
const GROWTH_RATIO: f64 = 1.075;
/// Decay ratio between consecutive rungs signalling a power-law collapse.
const DECAY_RATIO: f64 = 0.93;
/// Number of consecutive ratios inspected by the trend test.
const TREND_SPAN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Zero,
    Positive,
    Negative,
    Infinite,
    Divergent,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Zero => "zero",
            Verdict::Positive => "positive",
            Verdict::Negative => "negative",
            Verdict::Infinite => "infinite",
            Verdict::Divergent => "divergent",
        }
    }

    /// Strictly positive, possibly infinite.
    pub fn is_positive(self) -> bool {
        matches!(self, Verdict::Positive | Verdict::Infinite)
    }
}

/// One `(direction, scale, value)` sample behind an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub direction_index: usize,
    pub t: f64,
    pub value: f64,
}

/// Estimate of a limit (or liminf) from values along a scale ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub value: f64,
    /// `(t_k, value_k)` from coarse to fine.
    pub per_scale: Vec<(f64, f64)>,
    pub converged: bool,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
}

impl LimitEstimate {
    pub fn from_scales(per_scale: Vec<(f64, f64)>, tol: &Tolerances) -> Self {
        let values: Vec<f64> = per_scale.iter().map(|p| p.1).collect();
        let (value, verdict, converged) = classify(&values, tol);
        LimitEstimate {
            value,
            per_scale,
            converged,
            verdict,
            trace: Vec::new(),
        }
    }

    /// An exactly known value, classified by thresholds only.
    pub fn exact(value: f64, tol: &Tolerances) -> Self {
        LimitEstimate::from_scales(vec![(0.0, value)], tol)
    }

    pub fn with_trace(mut self, trace: Vec<TraceRow>) -> Self {
        self.trace = trace;
        self
    }

    pub fn is_infinite(&self) -> bool {
        self.verdict == Verdict::Infinite
    }

    pub fn is_zero(&self) -> bool {
        self.verdict == Verdict::Zero
    }
}

/// Classifies a per-scale sequence (finest last) into value, verdict and a
/// convergence flag.
pub fn classify(values: &[f64], tol: &Tolerances) -> (f64, Verdict, bool) {
    let Some(&last) = values.last() else {
        return (f64::NAN, Verdict::Divergent, false);
    };
    if last == f64::INFINITY || last >= tol.eps_inf {
        let converged = values.len() >= 2 && values[values.len() - 2] >= tol.eps_inf;
        return (f64::INFINITY, Verdict::Infinite, converged);
    }
    if last == f64::NEG_INFINITY || last <= -tol.eps_inf {
        return (f64::NEG_INFINITY, Verdict::Divergent, false);
    }

    let tail = &values[values.len().saturating_sub(TREND_SPAN + 1)..];
    if tail.len() == TREND_SPAN + 1 && tail.iter().all(|v| v.is_finite() && *v != 0.0) {
        let same_sign = tail.iter().all(|v| *v > 0.0) || tail.iter().all(|v| *v < 0.0);
        if same_sign {
            let ratios: Vec<f64> = tail.windows(2).map(|w| w[1] / w[0]).collect();
            if ratios.iter().all(|r| *r >= GROWTH_RATIO) {
                return if last > 0.0 {
                    (f64::INFINITY, Verdict::Infinite, false)
                } else {
                    (f64::NEG_INFINITY, Verdict::Divergent, false)
                };
            }
            if ratios.iter().all(|r| *r <= DECAY_RATIO) {
                return (0.0, Verdict::Zero, false);
            }
        }
    }

    let (value, converged) = match values.len() {
        1 => (last, true),
        k => {
            let prev = values[k - 2];
            if prev.is_finite() {
                let scale = prev.abs().max(last.abs());
                let close = (prev - last).abs() <= tol.converge_rel * scale || scale < tol.eps_pos;
                (prev.min(last), close)
            } else {
                (last, false)
            }
        }
    };
    let verdict = if value.abs() < tol.eps_pos {
        Verdict::Zero
    } else if value > 0.0 {
        Verdict::Positive
    } else {
        Verdict::Negative
    };
    (value, verdict, converged)
}
