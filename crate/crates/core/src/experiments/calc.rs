//! Closed-form calculators behind `derivd calc`.

use std::fmt;

use crate::error::{Error, Result};
use crate::thermo::{
    amortized_access_cost, capacity_bounds, critical_frequency, critical_storage, entropy_production_min,
    gradient_regime, landauer_compute_energy, multi_query_costs, phase_alpha_critical, triality_check, ThermoParams,
};

#[derive(Debug, Clone, PartialEq)]
pub enum CalcRequest {
    CriticalStorage {
        h_q_total_bits: f64,
        energy_budget_j: f64,
        h_q_given_k_bits: f64,
        temperature: f64,
    },
    CriticalFrequency {
        atoms: f64,
        c: f64,
    },
    Landauer {
        depth: u64,
        temperature: f64,
    },
    Triality {
        energy_j: f64,
        time_s: f64,
        storage_bits: f64,
        h_q_given_k_bits: f64,
        temperature: f64,
        omega: f64,
    },
    Capacity {
        states: f64,
        energy_j: f64,
        temperature: f64,
    },
    Amortized {
        storage_bits: f64,
        f_q: f64,
        h_derive_bits: f64,
    },
    MultiCost {
        storage_bits: f64,
        accesses: u64,
        probs: Vec<f64>,
        h_derive_bits: Vec<f64>,
    },
    AlphaCritical {
        entropy_bits: f64,
        mean_depth: f64,
        alpha: Option<f64>,
    },
    EntropyProduction {
        mi_nats: f64,
        temperature: f64,
    },
}

impl CalcRequest {
    pub fn name(&self) -> &'static str {
        match self {
            CalcRequest::CriticalStorage { .. } => "critical-storage",
            CalcRequest::CriticalFrequency { .. } => "critical-frequency",
            CalcRequest::Landauer { .. } => "landauer",
            CalcRequest::Triality { .. } => "triality",
            CalcRequest::Capacity { .. } => "capacity",
            CalcRequest::Amortized { .. } => "amortized",
            CalcRequest::MultiCost { .. } => "multi-cost",
            CalcRequest::AlphaCritical { .. } => "alpha-critical",
            CalcRequest::EntropyProduction { .. } => "entropy-production",
        }
    }
}

/// A named quantity with its unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub unit: &'static str,
}

fn q(name: &str, value: f64, unit: &'static str) -> Quantity {
    Quantity {
        name: name.to_string(),
        value,
        unit,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalcOutput {
    pub name: &'static str,
    pub formula: &'static str,
    pub inputs: Vec<Quantity>,
    pub results: Vec<Quantity>,
    /// Free-form qualitative results, such as a regime label.
    pub notes: Vec<String>,
}

impl CalcOutput {
    pub fn result(&self, name: &str) -> Option<f64> {
        self.results.iter().find(|r| r.name == name).map(|r| r.value)
    }
}

/// Plain decimals for moderate magnitudes, scientific notation otherwise.
pub fn format_value(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-3..1e6).contains(&a) {
        let s = format!("{x:.6}");
        let s = s.trim_end_matches('0');
        s.trim_end_matches('.').to_string()
    } else {
        format!("{x:.4e}")
    }
}

impl fmt::Display for CalcOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.name)?;
        writeln!(f, "formula: {}", self.formula)?;
        let line = |f: &mut fmt::Formatter<'_>, kind: &str, x: &Quantity| {
            let unit = if x.unit.is_empty() { String::new() } else { format!(" [{}]", x.unit) };
            writeln!(f, "{kind:<7}{} = {}{unit}", x.name, format_value(x.value))
        };
        for x in &self.inputs {
            line(f, "input", x)?;
        }
        for x in &self.results {
            line(f, "result", x)?;
        }
        for n in &self.notes {
            writeln!(f, "note   {n}")?;
        }
        Ok(())
    }
}

pub fn calc(req: &CalcRequest) -> Result<CalcOutput> {
    let thermo = |t: f64| -> Result<ThermoParams<f64>> {
        let p = ThermoParams::at_temperature(t);
        p.validate()?;
        Ok(p)
    };
    let out = |formula, inputs, results| CalcOutput {
        name: req.name(),
        formula,
        inputs,
        results,
        notes: Vec::new(),
    };
    Ok(match *req {
        CalcRequest::CriticalStorage {
            h_q_total_bits,
            energy_budget_j,
            h_q_given_k_bits,
            temperature,
        } => {
            let p = thermo(temperature)?;
            let m = critical_storage(h_q_total_bits, energy_budget_j, h_q_given_k_bits, &p)?;
            out(
                "M_c = H(Q) / log2(E_budget / (H(Q|K) k_B T ln 2))",
                vec![
                    q("H(Q)", h_q_total_bits, "bits"),
                    q("E_budget", energy_budget_j, "J"),
                    q("H(Q|K)", h_q_given_k_bits, "bits"),
                    q("T", temperature, "K"),
                ],
                vec![q("M_c", m, "bits")],
            )
        }
        CalcRequest::CriticalFrequency { atoms, c } => out(
            "f_c = 1 + 1/(c ln |Atom(K)|)",
            vec![q("atoms", atoms, "atoms"), q("c", c, "")],
            vec![q("f_c", critical_frequency(atoms, c)?, "accesses")],
        ),
        CalcRequest::Landauer { depth, temperature } => {
            let p = thermo(temperature)?;
            out(
                "E_compute >= L_d(q|K) k_B T ln 2",
                vec![q("depth", depth as f64, "steps"), q("T", temperature, "K")],
                vec![q("E_compute", landauer_compute_energy(depth, &p), "J")],
            )
        }
        CalcRequest::Triality {
            energy_j,
            time_s,
            storage_bits,
            h_q_given_k_bits,
            temperature,
            omega,
        } => {
            let p = ThermoParams {
                omega,
                ..thermo(temperature)?
            };
            p.validate()?;
            let t = triality_check(energy_j, time_s, storage_bits, h_q_given_k_bits, &p)?;
            let mut o = out(
                "E T / M >= Omega H(Q|K) k_B T ln 2",
                vec![
                    q("E", energy_j, "J"),
                    q("T_time", time_s, "s"),
                    q("M", storage_bits, "bits"),
                    q("H(Q|K)", h_q_given_k_bits, "bits"),
                    q("T", temperature, "K"),
                    q("Omega", omega, ""),
                ],
                vec![q("product", t.product, "J*s/bit"), q("bound", t.bound, "J*s/bit")],
            );
            o.notes.push(format!("satisfied = {}", t.satisfied));
            o
        }
        CalcRequest::Capacity {
            states,
            energy_j,
            temperature,
        } => {
            let p = thermo(temperature)?;
            let b = capacity_bounds(states, energy_j, &p)?;
            out(
                "M >= log2 N_states - E/(k_B T ln 2); I(S;Q) <= E/(k_B T ln 2)",
                vec![q("states", states, "states"), q("E", energy_j, "J"), q("T", temperature, "K")],
                vec![
                    q("min_carrier", b.min_carrier_bits, "bits"),
                    q("max_mutual_info", b.max_mutual_info_bits, "bits"),
                ],
            )
        }
        CalcRequest::Amortized {
            storage_bits,
            f_q,
            h_derive_bits,
        } => out(
            "Cost_amort = |S| / f_q + H_derive(q|S)",
            vec![
                q("|S|", storage_bits, "bits"),
                q("f_q", f_q, "accesses"),
                q("H_derive", h_derive_bits, "bits"),
            ],
            vec![q("cost", amortized_access_cost(storage_bits, f_q, h_derive_bits)?, "bits/access")],
        ),
        CalcRequest::MultiCost {
            storage_bits,
            accesses,
            ref probs,
            ref h_derive_bits,
        } => {
            let m = multi_query_costs(storage_bits, accesses, probs, h_derive_bits)?;
            let mut inputs = vec![q("|S|", storage_bits, "bits"), q("N", accesses as f64, "accesses")];
            for (i, (p, h)) in probs.iter().zip(h_derive_bits).enumerate() {
                inputs.push(q(&format!("P[{i}]"), *p, ""));
                inputs.push(q(&format!("h[{i}]"), *h, "bits"));
            }
            let mut results = vec![
                q("expected_correct", m.expected_correct, "bits/access"),
                q("naive_invalid", m.naive_invalid, "bits/access"),
            ];
            if let Some(r) = m.ratio {
                results.push(q("ratio", r, "x"));
            }
            out(
                "correct = |S|/N + sum P_q h_q; naive = |S| |Q| + sum P_q h_q",
                inputs,
                results,
            )
        }
        CalcRequest::AlphaCritical {
            entropy_bits,
            mean_depth,
            alpha,
        } => {
            let a_c = phase_alpha_critical(entropy_bits, mean_depth)?;
            let mut inputs = vec![q("H(Q)", entropy_bits, "bits"), q("E[depth]", mean_depth, "steps")];
            let mut o_notes = Vec::new();
            if let Some(a) = alpha {
                inputs.push(q("alpha", a, ""));
                o_notes.push(format!("regime = {:?}", gradient_regime(a, a_c)));
            }
            let mut o = out("alpha_c = H(Q) / (E[depth] ln 2)", inputs, vec![q("alpha_c", a_c, "")]);
            o.notes = o_notes;
            o
        }
        CalcRequest::EntropyProduction { mi_nats, temperature } => {
            let p = thermo(temperature)?;
            out(
                "dS/dt >= I(S;q) / T",
                vec![q("I(S;q)", mi_nats, "nats"), q("T", temperature, "K")],
                vec![q("entropy_production", entropy_production_min(mi_nats, &p)?, "nats/K")],
            )
        }
    })
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("bad number `{x}`: {e}")))
        })
        .collect()
}
