//! Storage and caching decisions: online replacement policies, offline greedy selection
//! of answers by captured information, and the scale-aware threshold rule.

pub mod cache;
pub mod greedy;
pub mod plan;
pub mod threshold;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cache::{cache_step, Cache, StepOutcome};
pub use greedy::truemi_select;
pub use plan::{Capacity, StoragePlan, StoredItem};
pub use threshold::{stratify_queries, threshold_decide, threshold_plan, Stratum};

/// Default per-step decay of the FreqDepth frequency counter.
pub const DEFAULT_DECAY: f64 = 0.99;

/// Where FreqDepth takes query frequencies from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "source")]
pub enum FrequencySource {
    /// Online counter multiplied by `decay` after every access.
    Decayed { decay: f64 },
    /// The true query probabilities; the cache is preloaded with the best entries.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "policy")]
pub enum PolicyKind {
    Lru,
    Lfu,
    #[serde(rename = "truemi")]
    TrueMi,
    #[serde(rename = "freqdepth")]
    FreqDepth { frequency: FrequencySource },
    Threshold { tau_scale: f64 },
}

impl PolicyKind {
    pub fn freq_depth() -> Self {
        PolicyKind::FreqDepth {
            frequency: FrequencySource::Decayed { decay: DEFAULT_DECAY },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PolicyKind::Threshold { tau_scale } if !(tau_scale.is_finite() && tau_scale > 0.0) => {
                Err(Error::invalid(format!("tau_scale must be positive, got {tau_scale}")))
            }
            PolicyKind::FreqDepth {
                frequency: FrequencySource::Decayed { decay },
            } if !(decay > 0.0 && decay <= 1.0) => Err(Error::invalid(format!("decay must be in (0, 1], got {decay}"))),
            _ => Ok(()),
        }
    }

    /// Short name used in reports and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Lru => "lru",
            PolicyKind::Lfu => "lfu",
            PolicyKind::TrueMi => "truemi",
            PolicyKind::FreqDepth { .. } => "freqdepth",
            PolicyKind::Threshold { .. } => "threshold",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    /// Parses a policy name with default parameters (`tau_scale = 1`, decay 0.99).
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lru" => Ok(PolicyKind::Lru),
            "lfu" => Ok(PolicyKind::Lfu),
            "truemi" => Ok(PolicyKind::TrueMi),
            "freqdepth" => Ok(PolicyKind::freq_depth()),
            "threshold" => Ok(PolicyKind::Threshold { tau_scale: 1.0 }),
            other => Err(Error::invalid(format!(
                "unknown policy `{other}` (expected lru, lfu, truemi, freqdepth or threshold)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Storage,
    Compute,
    Hybrid,
}

/// How a query is answered under a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingDecision {
    pub route: Route,
}

impl RoutingDecision {
    /// Storage when the answer is stored, hybrid when some proof atom is stored, compute
    /// otherwise.
    pub fn for_query(plan: &StoragePlan, target: crate::kb::AtomId, trace_atoms: &[crate::kb::AtomId]) -> Self {
        let route = if plan.has_answer(target) {
            Route::Storage
        } else if trace_atoms.iter().any(|&a| plan.covers_atom(a)) {
            Route::Hybrid
        } else {
            Route::Compute
        };
        RoutingDecision { route }
    }
}
