//! One-factor sensitivity of the optimal storage fraction.
//!
//! Each cell stores answers in decreasing order of `f_q · depth / H_q` and evaluates
//!
//! ```text
//! cost(k) = Σ_{stored} H_q / N + Σ_{unstored} f_q · depth · ln 2      (nats per access)
//! ```
//!
//! for every prefix length `k`, where `N` is the amortization window. The optimum is
//! compared against `Σ f_q H_q / (c ln m)`.

use rayon::prelude::*;
use serde_json::json;

use super::report::{Cell, ExperimentReport};
use super::{derive_seed, r_squared, ExperimentConfig};
use crate::error::{Error, Result};
use crate::kb::{generate_kb, KbGenParams};
use crate::metrics::{entropy_of, ContentIndex};
use crate::num::InfoUnit;
use crate::workload::{build_distribution, WorkloadSpec};

pub const COLUMNS: [&str; 15] = [
    "seed",
    "sweep",
    "alpha",
    "target_depth",
    "entities",
    "queries",
    "mean_depth",
    "beta_star",
    "min_cost",
    "theoretical",
    "ratio",
    "entropy_bits",
    "cost_no_storage",
    "cost_full_storage",
    "stored",
];

/// Per-query inputs of the cost curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostItem {
    pub query_id: u32,
    pub f_q: f64,
    pub depth: u64,
    /// Nats.
    pub h_q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostCurve {
    /// `costs[k]` stores the first `k` items of the ranking.
    pub costs: Vec<f64>,
    pub best_k: usize,
}

impl CostCurve {
    pub fn beta_star(&self) -> f64 {
        let n = self.costs.len() - 1;
        if n == 0 {
            0.0
        } else {
            self.best_k as f64 / n as f64
        }
    }

    pub fn min_cost(&self) -> f64 {
        self.costs[self.best_k]
    }
}

/// Ranks `items` by `f · depth / H` (ties to the lower query id) and evaluates the cost of
/// every prefix. The smallest minimising prefix wins.
pub fn cost_curve(items: &[CostItem], window: f64) -> Result<CostCurve> {
    if !(window > 0.0) {
        return Err(Error::invalid("amortization window must be positive"));
    }
    let score = |it: &CostItem| {
        if it.h_q > 0.0 {
            it.f_q * it.depth as f64 / it.h_q
        } else {
            f64::INFINITY
        }
    };
    let mut ranked = items.to_vec();
    ranked.sort_by(|a, b| score(b).total_cmp(&score(a)).then(a.query_id.cmp(&b.query_id)));
    let compute = |it: &CostItem| it.f_q * it.depth as f64 * std::f64::consts::LN_2;
    let mut cost: f64 = ranked.iter().map(compute).sum();
    let mut costs = Vec::with_capacity(ranked.len() + 1);
    costs.push(cost);
    for it in &ranked {
        cost += it.h_q / window - compute(it);
        costs.push(cost);
    }
    let best_k = costs
        .iter()
        .enumerate()
        .fold(0, |best, (k, &c)| if c < costs[best] { k } else { best });
    Ok(CostCurve { costs, best_k })
}

/// `Σ f_q H_q / (c ln m)`.
pub fn theoretical_cost(items: &[CostItem], atoms: usize, c: f64) -> f64 {
    items.iter().map(|it| it.f_q * it.h_q).sum::<f64>() / (c * (atoms.max(2) as f64).ln())
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cellspec {
    sweep: &'static str,
    alpha: f64,
    depth: f64,
    entities: usize,
}

fn cells(cfg: &ExperimentConfig) -> Vec<Cellspec> {
    let e = &cfg.exp4;
    let base = Cellspec {
        sweep: "",
        alpha: e.base_alpha,
        depth: e.base_depth,
        entities: e.base_entities,
    };
    let mut out = Vec::new();
    out.extend(e.alphas.iter().map(|&alpha| Cellspec {
        sweep: "alpha",
        alpha,
        ..base
    }));
    out.extend(e.depths.iter().map(|&depth| Cellspec {
        sweep: "depth",
        depth,
        ..base
    }));
    out.extend(e.entities.iter().map(|&entities| Cellspec {
        sweep: "entities",
        entities,
        ..base
    }));
    out
}

struct CellResult {
    queries: usize,
    mean_depth: f64,
    curve: CostCurve,
    theoretical: f64,
    entropy_bits: f64,
}

fn run_cell(cfg: &ExperimentConfig, cell: Cellspec) -> Result<CellResult> {
    let e = &cfg.exp4;
    let kb = generate_kb(&KbGenParams::new(
        cell.entities,
        (cell.entities as f64 * e.rules_per_atom).round() as usize,
        cell.depth,
        e.max_arity,
        derive_seed(cfg.seed, 4, 0),
    ))?;
    let queries = kb.answerable_queries();
    let dist = build_distribution(&WorkloadSpec::zipf(cell.alpha, queries.len(), 1, 0), &queries)?;
    let model = cfg.info.model(kb.atom_count());
    let index = ContentIndex::build(&kb, &queries, &model)?;
    let items: Vec<CostItem> = index
        .profiles()
        .iter()
        .map(|p| CostItem {
            query_id: p.query.query_id,
            f_q: dist.probability(p.query.query_id),
            depth: p.depth,
            h_q: p.h_q,
        })
        .collect();
    let curve = cost_curve(&items, e.amortization_window)?;
    let n = items.len().max(1) as f64;
    Ok(CellResult {
        queries: items.len(),
        mean_depth: items.iter().map(|it| it.depth as f64).sum::<f64>() / n,
        theoretical: theoretical_cost(&items, kb.atom_count(), model.c),
        entropy_bits: entropy_of(dist.weights(), InfoUnit::Bits)?,
        curve,
    })
}

pub fn exp4_sensitivity(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let specs = cells(cfg);
    let results = specs
        .par_iter()
        .map(|&c| run_cell(cfg, c))
        .collect::<Result<Vec<_>>>()?;

    let mut report = ExperimentReport::new("exp4", cfg.seed, cfg.to_json()?, &COLUMNS);
    let mut ln_n = Vec::new();
    let mut h = Vec::new();
    for (c, r) in specs.iter().zip(&results) {
        let ratio = r.curve.min_cost() / r.theoretical;
        if c.sweep == "entities" {
            ln_n.push((c.entities as f64).ln());
            h.push(r.entropy_bits);
        }
        report.push(vec![
            Cell::from(cfg.seed),
            c.sweep.into(),
            c.alpha.into(),
            c.depth.into(),
            c.entities.into(),
            r.queries.into(),
            r.mean_depth.into(),
            r.curve.beta_star().into(),
            r.curve.min_cost().into(),
            r.theoretical.into(),
            ratio.into(),
            r.entropy_bits.into(),
            r.curve.costs[0].into(),
            r.curve.costs[r.curve.costs.len() - 1].into(),
            r.curve.best_k.into(),
        ])?;
    }
    report.set_meta("entropy_vs_ln_entities_r2", json!(r_squared(&ln_n, &h)))?;
    Ok(report)
}
