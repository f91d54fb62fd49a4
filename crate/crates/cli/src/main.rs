use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use derivd_core::experiments::calc::parse_list;
use derivd_core::experiments::{calc, emit_report, run_experiment, CalcRequest, ExperimentConfig, ExperimentId};
use derivd_core::policies::{FrequencySource, PolicyKind};
use derivd_core::thermo::DEFAULT_TEMPERATURE;

#[derive(Parser)]
#[command(name = "derivd", version, about = "Storage-versus-computation experiments for Horn knowledge bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Duality bound under pure storage across knowledge base sizes.
    Exp1(ExpArgs),
    /// Latency against storage fraction and transition detection.
    Exp2(ExpArgs),
    /// Caching policies across cache sizes and seeds.
    Exp3(ExpArgs),
    /// Sensitivity of the optimal storage fraction.
    Exp4(ExpArgs),
    /// Evaluate a closed-form formula.
    #[command(subcommand)]
    Calc(CalcCmd),
}

#[derive(Args)]
struct ExpArgs {
    /// TOML configuration; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: config `output_dir`, else ./results].
    #[arg(long, env = "DERIVD_OUT")]
    out: Option<PathBuf>,
    /// Policy to run; repeat to list several (exp2 takes exactly one).
    #[arg(long = "policy", value_name = "lru|lfu|truemi|freqdepth|threshold")]
    policies: Vec<String>,
    /// Threshold scale for the `threshold` policy.
    #[arg(long)]
    tau_scale: Option<f64>,
    /// Decay of the online frequency counter for `freqdepth`.
    #[arg(long)]
    decay: Option<f64>,
}

#[derive(Subcommand)]
enum CalcCmd {
    /// Critical storage for an energy budget.
    CriticalStorage {
        /// Total query entropy H(Q), bits.
        #[arg(long)]
        h_q: f64,
        /// Energy budget, joules.
        #[arg(long)]
        energy: f64,
        /// Conditional entropy H(Q|K), bits.
        #[arg(long)]
        h_q_given_k: f64,
        #[arg(long, default_value_t = DEFAULT_TEMPERATURE)]
        temp: f64,
    },
    /// Access frequency above which storing pays off.
    CriticalFrequency {
        #[arg(long)]
        atoms: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Landauer energy of a derivation.
    Landauer {
        /// Inference steps; scientific notation accepted.
        #[arg(long)]
        depth: f64,
        #[arg(long, default_value_t = DEFAULT_TEMPERATURE)]
        temp: f64,
    },
    /// Energy-time-storage product against its lower bound.
    Triality {
        /// Joules.
        #[arg(long)]
        energy: f64,
        /// Seconds.
        #[arg(long)]
        time: f64,
        /// Bits.
        #[arg(long)]
        storage: f64,
        /// Bits.
        #[arg(long)]
        h_q_given_k: f64,
        #[arg(long, default_value_t = DEFAULT_TEMPERATURE)]
        temp: f64,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
    },
    /// Carrier size and transferable information under an energy budget.
    Capacity {
        #[arg(long)]
        states: f64,
        /// Joules.
        #[arg(long)]
        energy: f64,
        #[arg(long, default_value_t = DEFAULT_TEMPERATURE)]
        temp: f64,
    },
    /// Single-query amortized cost.
    Amortized {
        /// Bits.
        #[arg(long)]
        storage: f64,
        /// Accesses.
        #[arg(long)]
        freq: f64,
        /// Bits.
        #[arg(long, default_value_t = 0.0)]
        h_derive: f64,
    },
    /// Expected per-access cost over a query mix, and the naive average.
    MultiCost {
        /// Bits.
        #[arg(long)]
        storage: f64,
        #[arg(long)]
        accesses: u64,
        /// Comma-separated probabilities.
        #[arg(long)]
        probs: String,
        /// Comma-separated derivation entropies, bits.
        #[arg(long)]
        h: String,
    },
    /// Critical Zipf exponent of the latency curve.
    AlphaCritical {
        /// H(Q), bits.
        #[arg(long)]
        entropy: f64,
        #[arg(long)]
        mean_depth: f64,
        /// Report the regime of this exponent.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Minimum entropy production rate.
    EntropyProduction {
        /// I(S;q), nats.
        #[arg(long)]
        mi: f64,
        #[arg(long, default_value_t = DEFAULT_TEMPERATURE)]
        temp: f64,
    },
}

fn parse_policy(name: &str, args: &ExpArgs) -> Result<PolicyKind> {
    let mut p: PolicyKind = name.parse()?;
    match &mut p {
        PolicyKind::Threshold { tau_scale } => {
            if let Some(t) = args.tau_scale {
                *tau_scale = t;
            }
        }
        PolicyKind::FreqDepth { frequency } => {
            if let Some(d) = args.decay {
                *frequency = FrequencySource::Decayed { decay: d };
            }
        }
        _ => {}
    }
    p.validate()?;
    Ok(p)
}

fn experiment_config(id: ExperimentId, args: &ExpArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(declared) = cfg.experiment {
        if declared != id {
            bail!("config is for {declared}, not {id}");
        }
    }
    cfg.experiment = Some(id);
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if !args.policies.is_empty() {
        let policies = args
            .policies
            .iter()
            .map(|n| parse_policy(n, args))
            .collect::<Result<Vec<_>>>()?;
        match id {
            ExperimentId::Exp2 => {
                let [p] = policies[..] else {
                    bail!("exp2 sweeps a single policy");
                };
                cfg.exp2.policy = p;
            }
            ExperimentId::Exp3 => cfg.exp3.policies = policies,
            _ => bail!("--policy applies to exp2 and exp3 only"),
        }
    }
    if let Some(out) = &args.out {
        cfg.output_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_exp(id: ExperimentId, args: &ExpArgs) -> Result<()> {
    let cfg = experiment_config(id, args)?;
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("results"));
    log::info!("running {id} with seed {}", cfg.seed);
    let report = run_experiment(id, &cfg).with_context(|| format!("{id} failed"))?;
    for path in emit_report(&report, &dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn calc_request(cmd: CalcCmd) -> Result<CalcRequest> {
    Ok(match cmd {
        CalcCmd::CriticalStorage {
            h_q,
            energy,
            h_q_given_k,
            temp,
        } => CalcRequest::CriticalStorage {
            h_q_total_bits: h_q,
            energy_budget_j: energy,
            h_q_given_k_bits: h_q_given_k,
            temperature: temp,
        },
        CalcCmd::CriticalFrequency { atoms, c } => CalcRequest::CriticalFrequency { atoms, c },
        CalcCmd::Landauer { depth, temp } => {
            if !(depth >= 0.0 && depth.fract() == 0.0 && depth <= u64::MAX as f64) {
                bail!("--depth must be a non-negative integer, got {depth}");
            }
            CalcRequest::Landauer {
                depth: depth as u64,
                temperature: temp,
            }
        }
        CalcCmd::Triality {
            energy,
            time,
            storage,
            h_q_given_k,
            temp,
            omega,
        } => CalcRequest::Triality {
            energy_j: energy,
            time_s: time,
            storage_bits: storage,
            h_q_given_k_bits: h_q_given_k,
            temperature: temp,
            omega,
        },
        CalcCmd::Capacity { states, energy, temp } => CalcRequest::Capacity {
            states,
            energy_j: energy,
            temperature: temp,
        },
        CalcCmd::Amortized {
            storage,
            freq,
            h_derive,
        } => CalcRequest::Amortized {
            storage_bits: storage,
            f_q: freq,
            h_derive_bits: h_derive,
        },
        CalcCmd::MultiCost {
            storage,
            accesses,
            probs,
            h,
        } => CalcRequest::MultiCost {
            storage_bits: storage,
            accesses,
            probs: parse_list(&probs)?,
            h_derive_bits: parse_list(&h)?,
        },
        CalcCmd::AlphaCritical {
            entropy,
            mean_depth,
            alpha,
        } => CalcRequest::AlphaCritical {
            entropy_bits: entropy,
            mean_depth,
            alpha,
        },
        CalcCmd::EntropyProduction { mi, temp } => CalcRequest::EntropyProduction {
            mi_nats: mi,
            temperature: temp,
        },
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Exp1(a) => run_exp(ExperimentId::Exp1, &a),
        Command::Exp2(a) => run_exp(ExperimentId::Exp2, &a),
        Command::Exp3(a) => run_exp(ExperimentId::Exp3, &a),
        Command::Exp4(a) => run_exp(ExperimentId::Exp4, &a),
        Command::Calc(cmd) => {
            let out = calc(&calc_request(cmd)?)?;
            print!("{out}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
