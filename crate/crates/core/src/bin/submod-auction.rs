use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use submod_auction::harness::bench::{run_bench, BenchConfig};
use submod_auction::harness::dataset::{fetch_dataset, gen_instance, InstanceOrigin};
use submod_auction::harness::experiment::{run_experiment, to_csv, write_report, ExperimentFile};
use submod_auction::harness::lowerbound::lower_bound;
use submod_auction::harness::verify::{run_suite, Suite, VerifyConfig};
use submod_auction::harness::{exit_code, GraphSource, SyntheticSpec};
use submod_auction::{Error, Result};

/// Procurement auctions from regularized submodular maximization.
#[derive(Parser)]
#[command(name = "submod-auction", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a mechanism × rule × instance matrix and write CSV reports.
    Experiment(ExperimentArgs),
    /// Run a property suite; exits 1 on any violation.
    Verify(VerifyArgs),
    /// Compare oracle queries and wall time of naive, cached and lazy greedy.
    Bench(BenchArgs),
    /// Run the adversarial family under both demand oracles.
    Lowerbound(LowerboundArgs),
    /// Write a coverage instance with costs as JSON.
    GenInstance(GenArgs),
    /// Download and decompress the wiki-Vote edge list.
    FetchDataset(FetchArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Record CSV path; overrides the config.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    record_timing: bool,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    suite: String,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Deviation grid size for the IC suites.
    #[arg(long)]
    grid: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated sizes; overrides the config.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct LowerboundArgs {
    #[arg(long = "l", short = 'L')]
    l: usize,
    /// Price step; defaults to 1/(2L).
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample from this edge list instead of the small random family.
    #[arg(long, conflicts_with = "synthetic")]
    dataset: Option<PathBuf>,
    /// Sample from the default synthetic graph.
    #[arg(long)]
    synthetic: bool,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long, default_value_t = 0)]
    index: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FetchArgs {
    #[arg(long, default_value = "data")]
    dir: PathBuf,
}

fn emit(text: &str, path: Option<&PathBuf>) -> Result<()> {
    match path {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

/// Returns whether every checked property held.
fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Experiment(a) => {
            let mut cfg = ExperimentFile::from_path(&a.config)?;
            if let Some(o) = a.output {
                cfg.output = Some(o);
            }
            if let Some(i) = a.instances {
                cfg.instances = i;
            }
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            cfg.record_timing |= a.record_timing;
            if let Some(t) = a.threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .map_err(|e| Error::Internal(e.to_string()))?;
            }
            let report = run_experiment(&cfg)?;
            match &cfg.output {
                Some(p) => {
                    let summary = write_report(&report, p)?;
                    eprintln!("wrote {} and {}", p.display(), summary.display());
                }
                None => print!("{}", report.records_csv()?),
            }
            for o in &report.ordering {
                let ok = 3 * o.buckets_ordered >= 2 * o.buckets_compared;
                eprintln!(
                    "{} n={} {}: ordering holds in {}/{} buckets",
                    if ok { "ok" } else { "warning" },
                    o.n,
                    o.mechanism,
                    o.buckets_ordered,
                    o.buckets_compared
                );
            }
            for (n, rho) in &report.spearman_s_active {
                eprintln!("n={} spearman(s, active fraction) = {:.4}", n, rho);
            }
            Ok(true)
        }
        Cmd::Verify(a) => {
            let suite: Suite = a.suite.parse()?;
            let mut cfg = VerifyConfig::for_suite(suite, a.trials, a.seed);
            if let Some(g) = a.grid {
                cfg.grid = g;
            }
            let report = run_suite(suite, &cfg)?;
            emit(&(serde_json::to_string_pretty(&report)? + "\n"), a.report.as_ref())?;
            eprintln!(
                "{} {}: {} checks, {} failures",
                if report.passed() { "PASS" } else { "FAIL" },
                suite,
                report.checks,
                report.failures
            );
            Ok(report.passed())
        }
        Cmd::Bench(a) => {
            let mut cfg = match &a.config {
                Some(p) => {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| Error::Input(format!("cannot read config {}: {}", p.display(), e)))?;
                    serde_json::from_str(&text)?
                }
                None => BenchConfig::default(),
            };
            if let Some(n) = a.n {
                cfg.n = n;
            }
            emit(&to_csv(&run_bench(&cfg)?)?, a.output.as_ref())?;
            Ok(true)
        }
        Cmd::Lowerbound(a) => {
            let eps = a.epsilon.unwrap_or(1.0 / (2.0 * a.l as f64));
            let r = lower_bound(a.l, eps)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(r.separation_holds())
        }
        Cmd::GenInstance(a) => {
            let origin = match (a.dataset, a.synthetic) {
                (Some(p), _) => InstanceOrigin::Graph { source: GraphSource::Dataset(p), n: a.n, s: a.s, index: a.index },
                (None, true) => InstanceOrigin::Graph {
                    source: GraphSource::Synthetic(SyntheticSpec::default()),
                    n: a.n,
                    s: a.s,
                    index: a.index,
                },
                (None, false) => InstanceOrigin::Random { n: a.n },
            };
            emit(&(gen_instance(&origin, a.seed)?.to_json()? + "\n"), a.output.as_ref())?;
            Ok(true)
        }
        Cmd::FetchDataset(a) => {
            println!("{}", fetch_dataset(&a.dir)?.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
