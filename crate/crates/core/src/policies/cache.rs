//! Answer caches keyed by query id.
//!
//! Online caches admit every miss and evict according to their policy. Fixed caches hold a
//! precomputed set of answers and never change.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use super::{FrequencySource, PolicyKind};
use crate::error::{Error, Result};
use crate::kb::Query;

/// Decayed increments are renormalised before they leave the comfortable `f64` range.
const RESCALE_AT: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub hit: bool,
    pub admitted: bool,
    pub evicted: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Score(f64);

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Debug, Clone)]
enum Inner {
    Lru {
        order: BTreeSet<(u64, u32)>,
        last: HashMap<u32, u64>,
    },
    Lfu {
        // (hits since admission, last access, query id); counts restart on readmission.
        order: BTreeSet<(u64, u64, u32)>,
        meta: HashMap<u32, (u64, u64)>,
    },
    FreqDepth {
        decay: f64,
        increment: f64,
        // Global counters, scaled by decay^(-t) so that decaying is implicit.
        weight: HashMap<u32, f64>,
        depth: HashMap<u32, u64>,
        order: BTreeSet<(Score, u32)>,
    },
    Fixed {
        stored: BTreeSet<u32>,
    },
}

/// A single-owner cache of query answers.
#[derive(Debug, Clone)]
pub struct Cache {
    capacity: usize,
    clock: u64,
    inner: Inner,
}

impl Cache {
    /// An empty online cache for `policy`, which must be LRU, LFU or decayed FreqDepth.
    pub fn new(policy: PolicyKind, capacity: usize) -> Result<Self> {
        policy.validate()?;
        if capacity == 0 {
            return Err(Error::invalid("online cache capacity must be >= 1"));
        }
        let inner = match policy {
            PolicyKind::Lru => Inner::Lru {
                order: BTreeSet::new(),
                last: HashMap::new(),
            },
            PolicyKind::Lfu => Inner::Lfu {
                order: BTreeSet::new(),
                meta: HashMap::new(),
            },
            PolicyKind::FreqDepth {
                frequency: FrequencySource::Decayed { decay },
            } => Inner::FreqDepth {
                decay,
                increment: 1.0,
                weight: HashMap::new(),
                depth: HashMap::new(),
                order: BTreeSet::new(),
            },
            other => {
                return Err(Error::invalid(format!(
                    "{other} is an offline policy; build a fixed cache from its plan"
                )))
            }
        };
        Ok(Cache {
            capacity,
            clock: 0,
            inner,
        })
    }

    /// A cache that holds exactly `stored` and never changes.
    pub fn fixed(stored: impl IntoIterator<Item = u32>) -> Self {
        let stored: BTreeSet<u32> = stored.into_iter().collect();
        Cache {
            capacity: stored.len(),
            clock: 0,
            inner: Inner::Fixed { stored },
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        match &self.inner {
            Inner::Lru { last, .. } => last.len(),
            Inner::Lfu { meta, .. } => meta.len(),
            Inner::FreqDepth { depth, .. } => depth.len(),
            Inner::Fixed { stored } => stored.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, query_id: u32) -> bool {
        match &self.inner {
            Inner::Lru { last, .. } => last.contains_key(&query_id),
            Inner::Lfu { meta, .. } => meta.contains_key(&query_id),
            Inner::FreqDepth { depth, .. } => depth.contains_key(&query_id),
            Inner::Fixed { stored } => stored.contains(&query_id),
        }
    }

    /// Cached query ids in ascending order.
    pub fn contents(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = match &self.inner {
            Inner::Lru { last, .. } => last.keys().copied().collect(),
            Inner::Lfu { meta, .. } => meta.keys().copied().collect(),
            Inner::FreqDepth { depth, .. } => depth.keys().copied().collect(),
            Inner::Fixed { stored } => return stored.iter().copied().collect(),
        };
        ids.sort_unstable();
        ids
    }

    /// Decayed access count of `query_id` under FreqDepth, `None` for other policies.
    pub fn decayed_frequency(&self, query_id: u32) -> Option<f64> {
        match &self.inner {
            Inner::FreqDepth { weight, increment, .. } => Some(weight.get(&query_id).copied().unwrap_or(0.0) / increment),
            _ => None,
        }
    }

    fn step(&mut self, query_id: u32, depth: u64) -> StepOutcome {
        self.clock += 1;
        let now = self.clock;
        let capacity = self.capacity;
        match &mut self.inner {
            Inner::Fixed { stored } => StepOutcome {
                hit: stored.contains(&query_id),
                admitted: false,
                evicted: None,
            },
            Inner::Lru { order, last } => {
                if let Some(prev) = last.insert(query_id, now) {
                    order.remove(&(prev, query_id));
                    order.insert((now, query_id));
                    return StepOutcome {
                        hit: true,
                        admitted: false,
                        evicted: None,
                    };
                }
                let evicted = if last.len() > capacity {
                    let (_, victim) = order.pop_first().expect("cache is non-empty");
                    last.remove(&victim);
                    Some(victim)
                } else {
                    None
                };
                order.insert((now, query_id));
                StepOutcome {
                    hit: false,
                    admitted: true,
                    evicted,
                }
            }
            Inner::Lfu { order, meta } => {
                if let Some((count, prev)) = meta.get(&query_id).copied() {
                    order.remove(&(count, prev, query_id));
                    order.insert((count + 1, now, query_id));
                    meta.insert(query_id, (count + 1, now));
                    return StepOutcome {
                        hit: true,
                        admitted: false,
                        evicted: None,
                    };
                }
                let evicted = if meta.len() >= capacity {
                    let (_, _, victim) = order.pop_first().expect("cache is non-empty");
                    meta.remove(&victim);
                    Some(victim)
                } else {
                    None
                };
                order.insert((1, now, query_id));
                meta.insert(query_id, (1, now));
                StepOutcome {
                    hit: false,
                    admitted: true,
                    evicted,
                }
            }
            Inner::FreqDepth {
                decay,
                increment,
                weight,
                depth: depths,
                order,
            } => {
                *increment /= *decay;
                if *increment > RESCALE_AT {
                    let r = 1.0 / *increment;
                    for w in weight.values_mut() {
                        *w *= r;
                    }
                    *increment = 1.0;
                    *order = depths
                        .iter()
                        .map(|(&q, &d)| (Score(weight[&q] * d as f64), q))
                        .collect();
                }
                let w = weight.entry(query_id).or_insert(0.0);
                let old = *w;
                *w += *increment;
                let new = *w;
                if let Some(&d) = depths.get(&query_id) {
                    order.remove(&(Score(old * d as f64), query_id));
                    order.insert((Score(new * d as f64), query_id));
                    return StepOutcome {
                        hit: true,
                        admitted: false,
                        evicted: None,
                    };
                }
                let evicted = if depths.len() >= capacity {
                    let (_, victim) = order.pop_first().expect("cache is non-empty");
                    depths.remove(&victim);
                    Some(victim)
                } else {
                    None
                };
                depths.insert(query_id, depth);
                order.insert((Score(new * depth as f64), query_id));
                StepOutcome {
                    hit: false,
                    admitted: true,
                    evicted,
                }
            }
        }
    }
}

/// Serves `q` from `cache`, admitting it on a miss and evicting per the cache's policy.
pub fn cache_step(cache: &mut Cache, q: Query, depth: u64) -> StepOutcome {
    cache.step(q.query_id, depth)
}
