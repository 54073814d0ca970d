use serde::{Deserialize, Serialize};

use crate::calculus::{LimitEstimate, Verdict};
use crate::setmap::HolderOrder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularityVerdict {
    Holds,
    Fails,
    Inconclusive,
}

impl RegularityVerdict {
    /// Maps a classified limit onto the holds/fails trichotomy. A finite
    /// positive modulus needs a converged trace to count as holding.
    pub fn from_limit(limit: &LimitEstimate) -> Self {
        match limit.verdict {
            Verdict::Infinite => RegularityVerdict::Holds,
            Verdict::Positive if limit.converged => RegularityVerdict::Holds,
            Verdict::Positive => RegularityVerdict::Inconclusive,
            Verdict::Zero | Verdict::Negative | Verdict::Divergent => RegularityVerdict::Fails,
        }
    }
}

/// Output record of the direct modulus estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub quantity: String,
    pub modulus: f64,
    pub q: HolderOrder,
    /// Outer radius of the finest neighbourhood inspected.
    pub radius: f64,
    /// Point attaining the smallest quotient in the two finest annuli.
    pub witness: Option<Vec<f64>>,
    /// `(outer radius, infimum over the annulus)` from coarse to fine.
    pub per_radius: Vec<(f64, f64)>,
    pub converged: bool,
    pub limit_verdict: Verdict,
    pub verdict: RegularityVerdict,
    /// Whether the base point is isolated in its fibre, for calmness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isolated: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl RegularityReport {
    pub fn holds(&self) -> bool {
        self.verdict == RegularityVerdict::Holds
    }
}
