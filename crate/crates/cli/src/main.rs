//! `predsched`: scheduling experiments with untrusted permutation predictions.

use clap::{Args, Parser, Subcommand};
use predsched_core::experiments::{
    from_csv, generate_instance, run_online_learning, run_sensitivity, to_svg, verify_suite,
    write_csv, write_svg, EnvKind, ExperimentConfig, ExperimentKind,
};
use predsched_core::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "predsched", version, about = "Preemptive scheduling with permutation predictions: experiments, verification and plots")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random instance and print or save its text form.
    Generate(GenerateArgs),
    /// Run the prediction-noise sensitivity experiment and write a CSV.
    Sensitivity(ExperimentArgs),
    /// Run the online-learning experiment and write a CSV.
    Online(ExperimentArgs),
    /// Run a verification suite (lemmas | dual | props | all).
    Verify(VerifyArgs),
    /// Render an SVG chart from an experiment CSV.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Length distribution: pareto | exponential | weibull.
    #[arg(long, default_value = "pareto")]
    dist: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Machine environment: single | identical | unrelated.
    #[arg(long, default_value = "single")]
    env: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Config file with one `key = value` per line (same keys as the flags).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Length distribution: pareto | exponential | weibull.
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Machine environment: single | identical | unrelated.
    #[arg(long)]
    env: Option<String>,
    /// Comma-separated policies, e.g. `rr,wdeq,pts(wspt,rr,0.3)`.
    #[arg(long)]
    algos: Option<String>,
    /// Comma-separated trust levels; each adds a pts policy with the
    /// environment's default constituents.
    #[arg(long)]
    lambdas: Option<String>,
    /// Comma-separated noise levels for the sensitivity experiment.
    #[arg(long)]
    omegas: Option<String>,
    /// Relative noise level for the online-learning experiment.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Also render the chart to this SVG path.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name: lemmas | dual | props | all.
    #[arg(default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct PlotArgs {
    /// Input CSV produced by `sensitivity` or `online`.
    #[arg(long)]
    input: PathBuf,
    /// Output SVG path.
    #[arg(long)]
    out: PathBuf,
}

impl ExperimentArgs {
    fn build_config(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        // The environment fixes the default policy list, so resolve it first.
        let file_text = match &self.config {
            Some(path) => Some(std::fs::read_to_string(path)?),
            None => None,
        };
        let mut env = EnvKind::Single;
        if let Some(text) = &file_text {
            for line in text.lines() {
                let line = line.split('#').next().unwrap();
                if let Some((k, v)) = line.split_once('=') {
                    if k.trim() == "env" {
                        env = v.trim().parse()?;
                    }
                }
            }
        }
        if let Some(e) = &self.env {
            env = e.parse()?;
        }
        let mut cfg = ExperimentConfig::new(kind, env);
        if env != EnvKind::Single && self.m.is_none() {
            // keep the constructor default m
        }
        if let Some(text) = &file_text {
            cfg.apply_file(text)?;
        }
        let flags: [(&str, Option<String>); 10] = [
            ("dist", self.dist.clone()),
            ("n", self.n.map(|v| v.to_string())),
            ("m", self.m.map(|v| v.to_string())),
            ("env", Some(env.to_string())),
            ("algos", self.algos.clone()),
            ("lambdas", self.lambdas.clone()),
            ("omegas", self.omegas.clone()),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("rounds", self.rounds.map(|v| v.to_string())),
            ("runs", self.runs.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.apply(key, &v)?;
            }
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn x_label(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Sensitivity => "omega",
        ExperimentKind::Online => "round",
    }
}

fn run_experiment_cmd(args: &ExperimentArgs, kind: ExperimentKind) -> Result<()> {
    let cfg = args.build_config(kind)?;
    let records = match kind {
        ExperimentKind::Sensitivity => run_sensitivity(&cfg)?,
        ExperimentKind::Online => run_online_learning(&cfg)?.records,
    };
    write_csv(&args.out, &records)?;
    if let Some(svg) = &args.svg {
        write_svg(svg, &records, x_label(kind))?;
    }
    eprintln!("wrote {} records to {}", records.len(), args.out.display());
    Ok(())
}

fn run_cmd(cmd: &Cmd) -> Result<bool> {
    match cmd {
        Cmd::Generate(args) => {
            let env: EnvKind = args.env.parse()?;
            let mut cfg = ExperimentConfig::new(ExperimentKind::Sensitivity, env);
            cfg.apply("dist", &args.dist)?;
            cfg.n = args.n;
            if env != EnvKind::Single {
                cfg.m = args.m;
            }
            cfg.validate()?;
            let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
            let inst = generate_instance(&cfg, &mut rng);
            match &args.out {
                Some(path) => std::fs::write(path, inst.to_text())?,
                None => print!("{}", inst.to_text()),
            }
            Ok(true)
        }
        Cmd::Sensitivity(args) => {
            run_experiment_cmd(args, ExperimentKind::Sensitivity)?;
            Ok(true)
        }
        Cmd::Online(args) => {
            run_experiment_cmd(args, ExperimentKind::Online)?;
            Ok(true)
        }
        Cmd::Verify(args) => {
            let reports = verify_suite(&args.suite, args.seed)?;
            let mut ok = true;
            for report in &reports {
                println!("{}", report.summary());
                ok &= report.passed();
            }
            Ok(ok)
        }
        Cmd::Plot(args) => {
            let records = from_csv(&std::fs::read_to_string(&args.input)?)?;
            let label = if records.iter().any(|r| r.experiment == "online") {
                "round"
            } else {
                "omega"
            };
            std::fs::write(&args.out, to_svg(&records, label))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_cmd(&cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
