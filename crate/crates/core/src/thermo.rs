//! Landauer energies, capacity limits and the economic cost model of storing versus
//! deriving answers.
//!
//! Energy formulas are generic over [`Scalar`]; the pure cost arithmetic is generic over
//! [`num_traits::Num`] so it can be evaluated exactly on rationals.

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;

pub const BOLTZMANN: f64 = 1.38e-23;
pub const DEFAULT_TEMPERATURE: f64 = 300.0;

/// Physical parameters. Times are in simulator time units (one inference step) unless a
/// caller supplies seconds consistently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "S: Scalar + Deserialize<'de>"))]
pub struct ThermoParams<S> {
    pub k_b: S,
    pub temperature: S,
    pub t_refresh: S,
    /// Mean query inter-arrival time, if time is measured in seconds.
    pub t_avg: Option<S>,
    /// Constant inside the triality lower bound.
    pub omega: S,
}

impl<S: Scalar> Default for ThermoParams<S> {
    fn default() -> Self {
        ThermoParams {
            k_b: S::lit(BOLTZMANN),
            temperature: S::lit(DEFAULT_TEMPERATURE),
            t_refresh: S::one(),
            t_avg: None,
            omega: S::one(),
        }
    }
}

impl<S: Scalar> ThermoParams<S> {
    pub fn at_temperature(temperature: S) -> Self {
        ThermoParams {
            temperature,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: S| x.is_finite() && x > S::zero();
        if !(positive(self.k_b) && positive(self.temperature) && positive(self.t_refresh) && positive(self.omega)) {
            return Err(Error::invalid("k_b, temperature, t_refresh and omega must be positive"));
        }
        if matches!(self.t_avg, Some(t) if !positive(t)) {
            return Err(Error::invalid("t_avg must be positive"));
        }
        Ok(())
    }

    /// `k_B T ln 2`, joules per bit.
    pub fn landauer_unit(&self) -> S {
        self.k_b * self.temperature * S::LN_2()
    }
}

pub fn landauer_compute_energy<S: Scalar>(depth: u64, p: &ThermoParams<S>) -> S {
    S::from_count(depth) * p.landauer_unit()
}

/// `bits · k_B T ln 2 · t / t_refresh`.
pub fn storage_maintenance_energy<S: Scalar>(bits: S, t: S, p: &ThermoParams<S>) -> Result<S> {
    if p.t_refresh <= S::zero() {
        return Err(Error::invalid("t_refresh must be positive"));
    }
    if bits < S::zero() || t < S::zero() {
        return Err(Error::invalid("bits and t must be non-negative"));
    }
    Ok(bits * p.landauer_unit() * (t / p.t_refresh))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityBounds<S> {
    pub min_carrier_bits: S,
    pub max_mutual_info_bits: S,
}

/// Smallest carrier and largest transferable information for an ontology with
/// `ontology_states` states under an erasure budget of `energy` joules.
pub fn capacity_bounds<S: Scalar>(ontology_states: S, energy: S, p: &ThermoParams<S>) -> Result<CapacityBounds<S>> {
    if !(ontology_states >= S::one()) {
        return Err(Error::invalid("ontology_states must be >= 1"));
    }
    if !(energy >= S::zero()) {
        return Err(Error::invalid("energy must be non-negative"));
    }
    let budget_bits = energy / p.landauer_unit();
    Ok(CapacityBounds {
        min_carrier_bits: (ontology_states.log2() - budget_bits).max(S::zero()),
        max_mutual_info_bits: budget_bits,
    })
}

/// `|S| / f_q + H_derive(q|S)` with `f_q` read as the query's share of accesses.
pub fn amortized_access_cost<N: Num + Copy + PartialOrd>(storage: N, f_q: N, h_derive: N) -> Result<N> {
    if f_q <= N::zero() {
        return Err(Error::invalid("f_q must be positive"));
    }
    Ok(storage / f_q + h_derive)
}

/// `|S| / accesses + H_derive`: storage amortised over an absolute number of accesses.
pub fn amortized_over_accesses<N: Num + Copy + PartialOrd + FromPrimitive>(
    storage: N,
    accesses: u64,
    h_derive: N,
) -> Result<N> {
    if accesses == 0 {
        return Err(Error::invalid("accesses must be >= 1"));
    }
    let n = N::from_u64(accesses).ok_or_else(|| Error::invalid("access count not representable"))?;
    Ok(storage / n + h_derive)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiQueryCosts<N> {
    /// `|S|/N + Σ f_q h_q`.
    pub expected_correct: N,
    /// `|S|·|Q| + Σ f_q h_q`, the result of averaging per-query amortised costs.
    pub naive_invalid: N,
    /// `naive_invalid / expected_correct`; absent when the correct cost is zero.
    pub ratio: Option<N>,
}

pub fn multi_query_costs<N: Num + Copy + PartialOrd + FromPrimitive>(
    storage: N,
    n_accesses: u64,
    probs: &[N],
    h_derive: &[N],
) -> Result<MultiQueryCosts<N>> {
    if n_accesses == 0 {
        return Err(Error::invalid("n_accesses must be >= 1"));
    }
    if probs.len() != h_derive.len() {
        return Err(Error::invalid("probabilities and derivation entropies differ in length"));
    }
    if probs.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let expected_h = probs
        .iter()
        .zip(h_derive)
        .fold(N::zero(), |acc, (&f, &h)| acc + f * h);
    let n = N::from_u64(n_accesses).ok_or_else(|| Error::invalid("access count not representable"))?;
    let q = N::from_usize(probs.len()).ok_or_else(|| Error::invalid("query count not representable"))?;
    let expected_correct = storage / n + expected_h;
    let naive_invalid = storage * q + expected_h;
    let ratio = (expected_correct != N::zero()).then(|| naive_invalid / expected_correct);
    Ok(MultiQueryCosts {
        expected_correct,
        naive_invalid,
        ratio,
    })
}

/// `1 + 1/(c ln atom_count)`.
pub fn critical_frequency<S: Scalar>(atom_count: S, c: S) -> Result<S> {
    if !(atom_count >= S::lit(2.0)) || !(c > S::zero()) {
        return Err(Error::invalid("critical frequency needs atom_count >= 2 and c > 0"));
    }
    Ok(S::one() + S::one() / (c * atom_count.ln()))
}

/// `H(Q) / log₂(E_budget / (H(Q|K) k_B T ln 2))`, in bits.
pub fn critical_storage<S: Scalar>(h_q_total: S, e_budget: S, h_q_given_k: S, p: &ThermoParams<S>) -> Result<S> {
    if !(h_q_total > S::zero() && e_budget > S::zero() && h_q_given_k > S::zero()) {
        return Err(Error::invalid("critical storage inputs must be positive"));
    }
    let ratio = e_budget / (h_q_given_k * p.landauer_unit());
    if !(ratio > S::one()) {
        return Err(Error::invalid(format!(
            "energy budget {e_budget} J is below the maintenance floor {} J",
            h_q_given_k * p.landauer_unit()
        )));
    }
    Ok(h_q_total / ratio.log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialityCheck<S> {
    pub product: S,
    pub bound: S,
    pub satisfied: bool,
}

/// `E · T / M ≥ Ω · H(Q|K) · k_B T ln 2`.
pub fn triality_check<S: Scalar>(
    energy: S,
    time: S,
    storage_bits: S,
    h_q_given_k_bits: S,
    p: &ThermoParams<S>,
) -> Result<TrialityCheck<S>> {
    if !(storage_bits > S::zero()) {
        return Err(Error::invalid("triality check needs positive storage"));
    }
    let product = energy * time / storage_bits;
    let bound = p.omega * h_q_given_k_bits * p.landauer_unit();
    Ok(TrialityCheck {
        product,
        bound,
        satisfied: product >= bound,
    })
}

/// `I(S;q) / T`.
pub fn entropy_production_min<S: Scalar>(mi_nats: S, p: &ThermoParams<S>) -> Result<S> {
    if mi_nats < S::zero() {
        return Err(Error::invalid("mutual information must be non-negative"));
    }
    Ok(mi_nats / p.temperature)
}

/// `H(Q) / (E[depth] ln 2)`.
pub fn phase_alpha_critical<S: Scalar>(h_q_bits: S, mean_depth: S) -> Result<S> {
    if !(mean_depth > S::zero()) {
        return Err(Error::invalid("mean depth must be positive"));
    }
    Ok(h_q_bits / (mean_depth * S::LN_2()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradientRegime {
    /// `α < α_c`: marginal storage benefit decays exponentially.
    Exponential,
    /// `α ≥ α_c`: marginal benefit falls off as `1/M`.
    InverseStorage,
}

pub fn gradient_regime<S: Scalar>(alpha: S, alpha_c: S) -> GradientRegime {
    if alpha < alpha_c {
        GradientRegime::Exponential
    } else {
        GradientRegime::InverseStorage
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights<N> {
    pub w_e: N,
    pub w_t: N,
    pub w_s: N,
}

impl<N: Num + Copy + PartialOrd> CostWeights<N> {
    pub fn new(w_e: N, w_t: N, w_s: N) -> Result<Self> {
        let w = CostWeights { w_e, w_t, w_s };
        if [w_e, w_t, w_s].iter().any(|&x| x < N::zero()) {
            return Err(Error::invalid("cost weights must be non-negative"));
        }
        if [w_e, w_t, w_s].iter().all(|&x| x == N::zero()) {
            return Err(Error::invalid("at least one cost weight must be positive"));
        }
        Ok(w)
    }
}

pub fn weighted_strategy_cost<N: Num + Copy>(energy: N, time: N, storage_bits: N, w: &CostWeights<N>) -> N {
    w.w_e * energy + w.w_t * time + w.w_s * storage_bits
}

/// Itemised cost of one strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown<S> {
    pub energy: S,
    pub time: S,
    pub storage_bits: S,
    pub storage_term: S,
    pub compute_term: S,
    pub amortized: S,
}

impl<S: Scalar> CostBreakdown<S> {
    pub fn new(energy: S, time: S, storage_bits: S, storage_term: S, compute_term: S) -> Result<Self> {
        if [energy, time, storage_bits, storage_term, compute_term]
            .iter()
            .any(|x| !(*x >= S::zero()))
        {
            return Err(Error::invalid("cost components must be non-negative"));
        }
        Ok(CostBreakdown {
            energy,
            time,
            storage_bits,
            storage_term,
            compute_term,
            amortized: storage_term + compute_term,
        })
    }

    pub fn weighted(&self, w: &CostWeights<S>) -> S {
        weighted_strategy_cost(self.energy, self.time, self.storage_bits, w)
    }
}
