//! `fogaudit` command-line front end.
//!
//! ```bash
//! # Three key pairs under ./keys
//! fogaudit keygen --count 3 --out keys
//!
//! # Walk through the handshake between two of them
//! fogaudit demo-auth --iot-key keys/key-0.json --fog-key keys/key-1.json
//!
//! # Audit-cost comparison of the scheduling policies
//! fogaudit simulate cost --cluster 5 --cluster 25 --trials 1000 --seed 7 --out results
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use fogaudit::ledger::{Call, Ledger, Params, Reputation};
use fogaudit::protocol::{echo_service, mutual_authenticate, AuthFailure, FogAgent, IotAgent, Link};
use fogaudit::scheduling::Policy;
use fogaudit::simulation::{self, ScenarioConfig, SimulationError};
use fogaudit::{KeyPair, SecretKey};

#[derive(Parser, Debug)]
#[command(name = "fogaudit", version, about = "Fog-node authentication, payment and audit toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate secp256k1 key pairs as JSON files.
    Keygen {
        /// Number of key pairs.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        count: u32,
        /// Output directory.
        #[arg(long, default_value = "keys")]
        out: PathBuf,
        /// Derive keys from this seed instead of the OS generator.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Register an IoT device and a fog node and run the mutual handshake.
    DemoAuth(DemoAuthArgs),
    /// Run a Monte-Carlo scenario and write CSVs plus a gnuplot script.
    Simulate {
        scenario: Scenario,
        #[command(flatten)]
        args: SimulateArgs,
    },
}

#[derive(Args, Debug)]
struct DemoAuthArgs {
    /// IoT key file written by `keygen`; generated from --seed if absent.
    #[arg(long)]
    iot_key: Option<PathBuf>,
    /// Fog key file written by `keygen`; generated from --seed if absent.
    #[arg(long)]
    fog_key: Option<PathBuf>,
    /// Reputation the fog node starts with.
    #[arg(long, default_value_t = Params::default().r_init, allow_negative_numbers = true)]
    fog_reputation: Reputation,
    /// Lowest fog reputation the IoT device accepts.
    #[arg(long, default_value_t = 5, allow_negative_numbers = true)]
    threshold: Reputation,
    /// Leave one party out of the ledger.
    #[arg(long)]
    unregistered: Option<Party>,
    /// Seed for generated keys and handshake nonces.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the frame-level transcript as JSON after the steps.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Party {
    Iot,
    Fog,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Scenario {
    /// Audits needed to expel every misbehaving fog.
    Cost,
    /// Malicious rate, reputation and population over time.
    State,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// TOML file with scenario fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Restrict to one policy; all three run by default.
    #[arg(long)]
    policy: Option<Policy>,
    /// Cluster size; repeat for several (cost scenario).
    #[arg(long)]
    cluster: Vec<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Service payments per audit round (recorded in the ledger parameters).
    #[arg(long)]
    eta: Option<u64>,
    /// Oracle fee in parts per million of each payment.
    #[arg(long)]
    fee_rate: Option<u64>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Simulation(#[from] SimulationError),
    #[error("authentication failed: {0:?}")]
    Auth(AuthFailure),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 3,
            CliError::Config(_) | CliError::Simulation(SimulationError::InvalidConfig(_)) => 4,
            CliError::Simulation(SimulationError::NonTerminating { .. }) => 5,
            CliError::Auth(AuthFailure::IoTNotRegistered) => 10,
            CliError::Auth(AuthFailure::FogNotRegistered) => 11,
            CliError::Auth(AuthFailure::ReputationBelowThreshold { .. }) => 12,
            CliError::Auth(AuthFailure::BadSignature) => 13,
            CliError::Auth(_) | CliError::Simulation(_) | CliError::Other(_) => 6,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Keygen { count, out, seed } => keygen(count, &out, seed),
        Command::DemoAuth(args) => demo_auth(&args),
        Command::Simulate { scenario, args } => simulate(scenario, &args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct KeyFile {
    secret: String,
    public: String,
    address: String,
}

fn keygen(count: u32, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let mut rng = match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    };
    for i in 0..count {
        let keys = KeyPair::generate(&mut rng);
        let file = KeyFile {
            secret: keys.secret().to_hex(),
            public: keys.public().to_hex(),
            address: keys.address().to_string(),
        };
        let path = out.join(format!("key-{i}.json"));
        let text = serde_json::to_string_pretty(&file).expect("plain strings");
        fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
        println!("{} {}", path.display(), file.address);
    }
    Ok(())
}

fn load_key(path: &Path) -> Result<KeyPair, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: KeyFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let secret = SecretKey::from_hex(&file.secret)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let keys = KeyPair::from_secret(secret);
    if keys.address().to_string() != file.address {
        return Err(CliError::Config(format!(
            "{}: address does not match the secret key",
            path.display()
        )));
    }
    Ok(keys)
}

fn register(ledger: &mut Ledger, keys: &KeyPair, call: Call) -> Result<(), CliError> {
    let tx = call.sign(keys.secret()).map_err(|e| CliError::Other(e.to_string()))?;
    ledger.submit(&tx).map_err(|e| CliError::Other(e.to_string()))?;
    Ok(())
}

fn demo_auth(args: &DemoAuthArgs) -> Result<(), CliError> {
    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    let iot_keys = match &args.iot_key {
        Some(p) => load_key(p)?,
        None => KeyPair::generate(&mut rng),
    };
    let fog_keys = match &args.fog_key {
        Some(p) => load_key(p)?,
        None => KeyPair::generate(&mut rng),
    };
    let params = Params {
        r_init: args.fog_reputation,
        ..Params::default()
    };
    let mut ledger = Ledger::initialize(params).map_err(|e| CliError::Config(e.to_string()))?;
    if !matches!(args.unregistered, Some(Party::Iot)) {
        register(&mut ledger, &iot_keys, Call::IotRegistration { deposit: 100 })?;
    }
    if !matches!(args.unregistered, Some(Party::Fog)) {
        let deposit = ledger.params().deposit;
        register(&mut ledger, &fog_keys, Call::FogRegistration { deposit })?;
    }

    let iot = IotAgent::new(iot_keys, args.threshold);
    let mut fog = FogAgent::new(fog_keys, echo_service());
    let mut link = Link::default();
    let outcome = mutual_authenticate(&iot, &mut fog, &ledger, &mut link, &mut rng);
    for s in &link.transcript().steps {
        println!("step {}: {}", s.step, s.text);
    }
    if args.json {
        println!("{}", link.transcript().to_json());
    }
    match outcome {
        Ok(session) => {
            println!(
                "session established between {} and {}",
                session.iot_address, session.fog_address
            );
            Ok(())
        }
        Err(e) => Err(CliError::Auth(e)),
    }
}

/// Scenario defaults overlaid with the config file, then with flags.
fn scenario_config(scenario: Scenario, args: &SimulateArgs) -> Result<ScenarioConfig, CliError> {
    let defaults = match scenario {
        Scenario::Cost => ScenarioConfig::default(),
        Scenario::State => ScenarioConfig::state_defaults(),
    };
    let mut cfg = match &args.config {
        None => defaults,
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            let overlay: toml::Table =
                toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let mut table = toml::Table::try_from(&defaults).expect("config serializes");
            table.extend(overlay);
            table
                .try_into()
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(policy) = args.policy {
        cfg.policy = policy;
    }
    if let Some(&c) = args.cluster.first() {
        cfg.cluster_size = c;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(eta) = args.eta {
        cfg.eta = eta;
    }
    if let Some(f) = args.fee_rate {
        cfg.fee_rate_ppm = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(dir: &Path, name: &str, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory");
    let path = dir.join(name);
    fs::write(&path, buf).map_err(|e| io_err(&path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn simulate(scenario: Scenario, args: &SimulateArgs) -> Result<(), CliError> {
    let cfg = scenario_config(scenario, args)?;
    let policies: Vec<Policy> = match args.policy {
        Some(p) => vec![p],
        None => Policy::ALL.to_vec(),
    };
    let out = &args.out;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    match scenario {
        Scenario::Cost => {
            let clusters = if args.cluster.is_empty() {
                vec![cfg.cluster_size]
            } else {
                args.cluster.clone()
            };
            let results = simulation::run_cost_experiment(&cfg, &policies, &clusters)?;
            write_file(out, "cost.csv", |w| simulation::write_cost_csv(&results, w))?;
            write_file(out, "cost_summary.csv", |w| simulation::write_cost_summary_csv(&results, w))?;
            write_file(out, "cost.gp", |w| simulation::write_cost_plot(&results, "cost_summary.csv", w))?;
            println!("{:<10} {:>7} {:>12} {:>14} {:>10}", "policy", "cluster", "mean", "variance", "std_err");
            for r in &results.runs {
                println!(
                    "{:<10} {:>7} {:>12.3} {:>14.3} {:>10.3}",
                    r.policy.name(),
                    r.cluster_size,
                    r.summary.mean,
                    r.summary.variance,
                    r.summary.std_error
                );
            }
        }
        Scenario::State => {
            let results = simulation::run_state_experiment(&cfg, &policies)?;
            write_file(out, "state_series.csv", |w| simulation::write_state_series_csv(&results, w))?;
            write_file(out, "state_trials.csv", |w| simulation::write_state_trials_csv(&results, w))?;
            write_file(out, "state_summary.csv", |w| simulation::write_state_summary_csv(&results, w))?;
            write_file(out, "state.gp", |w| simulation::write_state_plot(&results, "state_series.csv", w))?;
            println!(
                "{:<10} {:>10} {:>10} {:>10} {:>12}",
                "policy", "final_m", "final_R", "live", "recovery"
            );
            for r in &results.runs {
                let last = r.mean_m.len() - 1;
                println!(
                    "{:<10} {:>10.4} {:>10.4} {:>10.2} {:>12.1}",
                    r.policy.name(),
                    r.mean_m[last],
                    r.mean_r[last],
                    r.mean_live[last],
                    r.mean_recovery_step()
                );
            }
        }
    }
    Ok(())
}
