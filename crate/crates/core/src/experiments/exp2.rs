//! Latency against storage fraction, with transition detection per Zipf exponent.

use serde_json::json;

use super::report::{Cell, ExperimentReport};
use super::{derive_seed, ExperimentConfig};
use crate::error::Result;
use crate::kb::generate_kb;
use crate::metrics::{shannon_entropy, ContentIndex};
use crate::num::InfoUnit;
use crate::simulator::{sweep_storage, SimConfig, SimContext, StorageSize};
use crate::thermo::{gradient_regime, phase_alpha_critical};
use crate::workload::{build_distribution, sample_stream, WorkloadSpec};

pub const COLUMNS: [&str; 14] = [
    "seed",
    "alpha",
    "beta",
    "capacity",
    "latency",
    "gradient",
    "hit_rate",
    "storage_bits",
    "compute_steps",
    "energy",
    "amortized_cost",
    "triality_product",
    "triality_bound",
    "triality_satisfied",
];

/// Sweeps every configured Zipf exponent over the same knowledge base and query set.
///
/// The `gradient` cell of a row is `ΔL/Δβ` towards the next grid point and is empty on the
/// last row of each exponent.
pub fn exp2_phase(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let e = &cfg.exp2;
    let kb = generate_kb(&e.kb.params(derive_seed(cfg.seed, 2, 0)))?;
    let queries = kb.sample_queries(e.query_count, derive_seed(cfg.seed, 21, 0));
    let model = cfg.info.model(kb.atom_count());
    let index = ContentIndex::build(&kb, &queries, &model)?;
    let betas = e.betas();
    let template = SimConfig {
        warmup_fraction: e.warmup_fraction,
        thermo: cfg.thermo,
        ..SimConfig::new(e.policy, StorageSize::Fraction(0.0))
    };

    let mut report = ExperimentReport::new("exp2", cfg.seed, cfg.to_json()?, &COLUMNS);
    let mut transitions = serde_json::Map::new();
    let mut critical = serde_json::Map::new();
    for (i, &alpha) in e.alphas.iter().enumerate() {
        let dist = build_distribution(&WorkloadSpec::zipf(alpha, queries.len(), e.stream_length, 0), &queries)?;
        let stream = sample_stream(&dist, e.stream_length, derive_seed(cfg.seed, 22, i as u64));
        let ctx = SimContext::from_parts(index.clone(), dist, stream)?;
        let sweep = sweep_storage(&ctx, &template, &betas, e.noise_floor)?;

        let h_bits = shannon_entropy(ctx.dist(), InfoUnit::Bits)?;
        let alpha_c = phase_alpha_critical(h_bits, ctx.mean_depth())?;
        critical.insert(
            format!("{alpha:?}"),
            json!({
                "alpha_c": alpha_c,
                "regime": format!("{:?}", gradient_regime(alpha, alpha_c)),
                "entropy_bits": h_bits,
                "mean_depth": ctx.mean_depth(),
            }),
        );
        transitions.insert(format!("{alpha:?}"), json!(sweep.transition_beta));

        for (j, pt) in sweep.points.iter().enumerate() {
            let m = &pt.metrics;
            let tri = m.triality.as_ref();
            report.push(vec![
                Cell::from(cfg.seed),
                alpha.into(),
                pt.beta.into(),
                m.capacity.into(),
                m.mean_latency.into(),
                sweep.gradient.get(j).copied().into(),
                m.hit_rate.into(),
                m.plan_bits.into(),
                m.total_compute_steps.into(),
                m.energy.into(),
                m.amortized_cost.into(),
                tri.map(|t| t.product).into(),
                tri.map(|t| t.bound).into(),
                tri.map(|t| t.satisfied).into(),
            ])?;
        }
    }
    report.set_meta("transition_beta", transitions)?;
    report.set_meta("alpha_critical", critical)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::KbSpec;

    #[test]
    fn small_sweep_shape() {
        let mut cfg = ExperimentConfig::default();
        cfg.exp2.kb = KbSpec {
            atom_count: 300,
            ..KbSpec::default()
        };
        cfg.exp2.query_count = 100;
        cfg.exp2.alphas = vec![1.2];
        cfg.exp2.grid_points = 6;
        cfg.exp2.stream_length = 2000;
        let r = exp2_phase(&cfg).unwrap();
        assert_eq!(r.rows.len(), 6);
        let betas = r.numbers("beta");
        assert_eq!(betas.first(), Some(&0.0));
        assert_eq!(betas.last(), Some(&1.0));
        // Five gradients for six points.
        assert_eq!(r.numbers("gradient").len(), 5);
        assert!(r.numbers("gradient").iter().all(|&g| g <= 1e-12));
        assert!(r.metadata["transition_beta"].get("1.2").is_some());
    }
}
