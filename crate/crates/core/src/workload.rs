//! Query distributions and seeded access streams.
//!
//! Streams are drawn with ChaCha8 (a counter-based generator with published test vectors)
//! by inverting the cumulative distribution on a uniform `f64` taken from the top 53 bits of
//! each output word, so a given `(distribution, length, seed)` yields the same stream on
//! every platform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kb::Query;
use crate::num::unit_interval;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum DistKind {
    Uniform,
    Zipf { alpha: f64 },
}

/// Workload section of an experiment config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    #[serde(flatten)]
    pub kind: DistKind,
    pub query_count: usize,
    pub stream_length: usize,
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn zipf(alpha: f64, query_count: usize, stream_length: usize, seed: u64) -> Self {
        WorkloadSpec {
            kind: DistKind::Zipf { alpha },
            query_count,
            stream_length,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.query_count == 0 {
            return Err(Error::invalid("query_count must be >= 1"));
        }
        if let DistKind::Zipf { alpha } = self.kind {
            if !(0.5..=3.0).contains(&alpha) {
                return Err(Error::invalid(format!("zipf alpha {alpha} outside [0.5, 3.0]")));
            }
        }
        Ok(())
    }
}

/// Probability weights over a query set. Queries are kept in ascending `query_id` order and
/// rank `i` (1-based) of a Zipf law is bound to the `i`-th query in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryDistribution {
    kind: DistKind,
    queries: Vec<Query>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl QueryDistribution {
    /// Builds a distribution from explicit weights, which are normalised to sum to one.
    pub fn from_weights(queries: Vec<Query>, weights: Vec<f64>, kind: DistKind) -> Result<Self> {
        if queries.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if queries.len() != weights.len() {
            return Err(Error::invalid("queries and weights differ in length"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("weights must be finite and strictly positive"));
        }
        let mut pairs: Vec<(Query, f64)> = queries.into_iter().zip(weights).collect();
        pairs.sort_by_key(|(q, _)| q.query_id);
        let total: f64 = pairs.iter().map(|(_, w)| w).sum();
        let (queries, weights): (Vec<Query>, Vec<f64>) =
            pairs.into_iter().map(|(q, w)| (q, w / total)).unzip();
        let cumulative = cumulative(&weights);
        Ok(QueryDistribution {
            kind,
            queries,
            weights,
            cumulative,
        })
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (Query, f64)> + '_ {
        self.queries.iter().copied().zip(self.weights.iter().copied())
    }

    /// Position of `query_id` in [`Self::queries`].
    pub fn position(&self, query_id: u32) -> Option<usize> {
        self.queries.binary_search_by_key(&query_id, |q| q.query_id).ok()
    }

    pub fn probability(&self, query_id: u32) -> f64 {
        self.position(query_id).map_or(0.0, |i| self.weights[i])
    }

    /// Index of the query whose cumulative interval contains `u ∈ [0, 1)`.
    pub fn invert(&self, u: f64) -> usize {
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.queries.len() - 1)
    }
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

/// `f_i ∝ i^(−α)` over ranks for Zipf, `1/n` for uniform.
pub fn build_distribution(spec: &WorkloadSpec, queries: &[Query]) -> Result<QueryDistribution> {
    if queries.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let mut sorted = queries.to_vec();
    sorted.sort_by_key(|q| q.query_id);
    let weights: Vec<f64> = match spec.kind {
        DistKind::Uniform => vec![1.0; sorted.len()],
        DistKind::Zipf { alpha } => (1..=sorted.len()).map(|rank| (rank as f64).powf(-alpha)).collect(),
    };
    QueryDistribution::from_weights(sorted, weights, spec.kind)
}

/// `length` i.i.d. draws from `dist`, reproducible from `seed`.
pub fn sample_stream(dist: &QueryDistribution, length: usize, seed: u64) -> Vec<Query> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..length)
        .map(|_| dist.queries[dist.invert(unit_interval(rng.next_u64()))])
        .collect()
}
