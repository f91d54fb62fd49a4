//! Small-scale runs of every experiment: schema agreement with the docs and determinism.

use std::collections::BTreeMap;

use derivd_core::experiments::{
    emit_report, exp1, exp2, exp3, exp4, run_experiment, ExperimentConfig, ExperimentId, ExperimentReport, KbSpec,
};

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.exp1.atom_counts = vec![200, 400, 800];
    cfg.exp1.queries_per_kb = 20;
    let kb = KbSpec {
        atom_count: 300,
        ..KbSpec::default()
    };
    cfg.exp2.kb = kb;
    cfg.exp2.query_count = 100;
    cfg.exp2.stream_length = 3000;
    cfg.exp2.grid_points = 6;
    cfg.exp3.kb = kb;
    cfg.exp3.query_count = 100;
    cfg.exp3.stream_length = 3000;
    cfg.exp3.seeds = 2;
    cfg.exp3.cache_sizes = vec![5, 20];
    cfg.exp3.highlight_size = 5;
    cfg.exp4.entities = vec![100, 200, 400];
    cfg.exp4.base_entities = 200;
    cfg
}

/// Column names listed in each `## expN.csv` section of the schema document.
fn documented_columns() -> BTreeMap<String, Vec<String>> {
    let doc = include_str!("../../../docs/schemas.md");
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for line in doc.lines() {
        if let Some(h) = line.strip_prefix("## ") {
            current = h.strip_suffix(".csv").map(str::to_string);
            continue;
        }
        let Some(exp) = &current else { continue };
        if let Some(rest) = line.strip_prefix("| `") {
            let name = rest.split('`').next().unwrap().to_string();
            out.entry(exp.clone()).or_default().push(name);
        }
    }
    out
}

#[test]
fn documented_schemas_match_the_code() {
    let docs = documented_columns();
    assert_eq!(docs["exp1"], exp1::COLUMNS);
    assert_eq!(docs["exp2"], exp2::COLUMNS);
    assert_eq!(docs["exp3"], exp3::COLUMNS);
    assert_eq!(docs["exp4"], exp4::COLUMNS);
}

#[test]
fn reports_carry_seed_and_config() {
    let cfg = small_config();
    for id in ExperimentId::ALL {
        let r = run_experiment(id, &cfg).unwrap();
        assert_eq!(r.experiment, id.name());
        assert_eq!(r.columns[0], "seed");
        assert!(!r.rows.is_empty());
        assert!(r.numbers("seed").iter().all(|&s| s == cfg.seed as f64));
        let echoed: ExperimentConfig = serde_json::from_value(r.config.clone()).unwrap();
        assert_eq!(echoed, cfg);
        let back = ExperimentReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = small_config();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for id in ExperimentId::ALL {
        let pa = emit_report(&run_experiment(id, &cfg).unwrap(), a.path()).unwrap();
        let pb = emit_report(&run_experiment(id, &cfg).unwrap(), b.path()).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
        }
    }
}

#[test]
fn seeds_change_results() {
    let cfg = small_config();
    let other = ExperimentConfig { seed: 7, ..cfg.clone() };
    let a = run_experiment(ExperimentId::Exp3, &cfg).unwrap();
    let b = run_experiment(ExperimentId::Exp3, &other).unwrap();
    assert_ne!(a.numbers("hit_rate"), b.numbers("hit_rate"));
}

#[test]
fn exp2_latency_is_monotone_in_storage() {
    let r = run_experiment(ExperimentId::Exp2, &small_config()).unwrap();
    let (a, l) = (r.column("alpha").unwrap(), r.column("latency").unwrap());
    for w in r.rows.windows(2) {
        if w[0][a] == w[1][a] {
            assert!(w[1][l].as_f64().unwrap() <= w[0][l].as_f64().unwrap() + 1e-12);
        }
    }
    let sat = r.column("triality_satisfied").unwrap();
    let beta = r.column("beta").unwrap();
    for row in &r.rows {
        if row[beta].as_f64().unwrap() > 0.0 {
            assert_eq!(row[sat], derivd_core::experiments::Cell::Bool(true));
        }
    }
}
