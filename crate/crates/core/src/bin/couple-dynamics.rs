use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use couple_dynamics::config::{KernelLevel, RunConfig};
use couple_dynamics::output;
use couple_dynamics::{
    absorbing_states, evolve_trace, garden_of_eden_states, run_sweep, sample_trajectory, self_consistent_run, CoupleKernel,
    Distribution16, Error, IndividualKernel,
};

#[derive(Parser)]
#[command(name = "couple-dynamics", version, about = "Stochastic two-partner couple dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one stochastic trajectory.
    Trajectory(Common),
    /// Exact evolution of the couple distribution.
    Evolve(Common),
    /// Scan the (p1, p2) plane for one scenario.
    Sweep(SweepArgs),
    /// Dump the nonzero transition entries.
    AuditKernel(AuditArgs),
    /// Run the self-consistent feedback loop for one couple.
    Feedback(FeedbackArgs),
    /// List absorbing and garden-of-Eden states.
    Structure(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat TOML config file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// 1 (aggressiveness) or 2 (support).
    #[arg(long)]
    model: Option<u8>,
    #[arg(long, visible_aliases = ["a1", "s1"], allow_hyphen_values = true)]
    p1: Option<f64>,
    #[arg(long, visible_aliases = ["a2", "s2"], allow_hyphen_values = true)]
    p2: Option<f64>,
    /// Initial couple state, e.g. `1,0` or `upset,normal`.
    #[arg(long, allow_hyphen_values = true)]
    start: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; results go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct Engines {
    /// exact or monte-carlo.
    #[arg(long)]
    engine: Option<String>,
    /// Trajectories per Monte Carlo estimate.
    #[arg(long)]
    ensemble: Option<usize>,
    #[arg(long)]
    vc: Option<f64>,
    #[arg(long)]
    inner_steps: Option<usize>,
    #[arg(long)]
    turns: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    engines: Engines,
    /// model1-plain, model1-sc-blind, model1-sc-gender, model2-plain, ...
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    /// Also write PGM heatmaps.
    #[arg(long)]
    pgm: bool,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    common: Common,
    /// Parameter of the individual table (same as --p1).
    #[arg(long)]
    param: Option<f64>,
    /// individual or couple.
    #[arg(long)]
    level: Option<String>,
}

#[derive(Args)]
struct FeedbackArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    engines: Engines,
    /// blind or specific.
    #[arg(long)]
    gender: Option<String>,
}

impl Common {
    fn overrides(&self) -> RunConfig {
        RunConfig {
            model: self.model,
            p1: self.p1,
            p2: self.p2,
            start: self.start.clone(),
            steps: self.steps,
            seed: self.seed,
            out: self.out.clone(),
            threads: self.threads,
            ..Default::default()
        }
    }

    fn resolve(&self, extra: RunConfig) -> Result<RunConfig, Error> {
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(file.merged(self.overrides().merged(extra)))
    }
}

impl Engines {
    fn overrides(&self) -> RunConfig {
        RunConfig {
            engine: self.engine.clone(),
            ensemble: self.ensemble,
            vc: self.vc,
            inner_steps: self.inner_steps,
            turns: self.turns,
            ..Default::default()
        }
    }
}

fn emit(out: Option<&Path>, name: &str, bytes: &[u8]) -> io::Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), bytes)
        }
        None => io::stdout().write_all(bytes),
    }
}

fn echo_config(cfg: &RunConfig) -> io::Result<()> {
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.toml"), cfg.to_toml())?;
    }
    Ok(())
}

fn setup_threads(cfg: &RunConfig) -> Result<(), Error> {
    if let Some(n) = cfg.threads {
        if n == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        // fails only if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn cmd_trajectory(cfg: &RunConfig) -> Result<(), Error> {
    let params = cfg.model_params()?;
    let start = cfg.start_state()?;
    let kernel = CoupleKernel::new(params)?;
    let traj = sample_trajectory(start, &kernel, cfg.steps.unwrap_or(20), cfg.seed());
    let text = traj.trace_text();
    match cfg.out.as_deref() {
        Some(dir) => {
            emit(Some(dir), "trajectory.txt", text.as_bytes())?;
            let mut csv = Vec::new();
            output::write_trajectory_csv(&traj, &mut csv)?;
            emit(Some(dir), "trajectory.csv", &csv)?;
            echo_config(cfg)?;
        }
        None => emit(None, "", text.as_bytes())?,
    }
    Ok(())
}

fn cmd_evolve(cfg: &RunConfig) -> Result<(), Error> {
    let params = cfg.model_params()?;
    let kernel = CoupleKernel::new(params)?;
    let trace = evolve_trace(&Distribution16::delta(cfg.start_state()?), &kernel, cfg.steps.unwrap_or(20));
    let mut csv = Vec::new();
    output::write_distribution_trace_csv(&trace, &mut csv)?;
    emit(cfg.out.as_deref(), "evolve.csv", &csv)?;
    Ok(echo_config(cfg)?)
}

fn cmd_sweep(cfg: &RunConfig) -> Result<(), Error> {
    let spec = cfg.sweep_spec()?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(format!("sweep-{}", spec.scenario)));
    let grid = run_sweep(&spec)?;
    let written = output::write_grid_outputs(&grid, &out, cfg.pgm.unwrap_or(false))?;
    let echoed = RunConfig { out: Some(out.clone()), ..cfg.clone() };
    echo_config(&echoed)?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_audit(cfg: &RunConfig) -> Result<(), Error> {
    let mut csv = Vec::new();
    match cfg.level()? {
        KernelLevel::Individual => {
            let param = cfg.p1.ok_or_else(|| Error::Config("missing --param".into()))?;
            let kernel = IndividualKernel::new(cfg.model()?, param)?;
            output::write_individual_kernel_csv(&kernel, &mut csv)?;
        }
        KernelLevel::Couple => {
            let kernel = CoupleKernel::new(cfg.model_params()?)?;
            output::write_couple_kernel_csv(&kernel, &mut csv)?;
        }
    }
    emit(cfg.out.as_deref(), "kernel.csv", &csv)?;
    Ok(echo_config(cfg)?)
}

fn cmd_feedback(cfg: &RunConfig) -> Result<(), Error> {
    let params = cfg.model_params()?;
    let fb = cfg.feedback_config()?;
    let trace = self_consistent_run(params, &fb, cfg.start_state()?, cfg.seed())?;
    let mut csv = Vec::new();
    output::write_feedback_trace_csv(&trace, &mut csv)?;
    emit(cfg.out.as_deref(), "feedback.csv", &csv)?;
    Ok(echo_config(cfg)?)
}

fn cmd_structure(cfg: &RunConfig) -> Result<(), Error> {
    let kernel = CoupleKernel::new(cfg.model_params()?)?;
    let list = |set: std::collections::BTreeSet<couple_dynamics::CoupleState>| {
        set.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
    };
    let text = format!(
        "absorbing: {}\nself_trapping: {}\ngarden_of_eden: {}\n",
        list(absorbing_states(&kernel)),
        list(kernel.fixed_states()),
        list(garden_of_eden_states(&kernel, false)),
    );
    emit(cfg.out.as_deref(), "structure.txt", text.as_bytes())?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = match &cli.command {
        Command::Trajectory(c) | Command::Evolve(c) | Command::Structure(c) => c.resolve(RunConfig::default())?,
        Command::Sweep(a) => a.common.resolve(RunConfig {
            scenario: a.scenario.clone(),
            resolution: a.resolution,
            runs: a.runs,
            pgm: a.pgm.then_some(true),
            ..a.engines.overrides()
        })?,
        Command::AuditKernel(a) => a.common.resolve(RunConfig {
            p1: a.param.or(a.common.p1),
            level: a.level.clone(),
            ..Default::default()
        })?,
        Command::Feedback(a) => a.common.resolve(RunConfig { gender: a.gender.clone(), ..a.engines.overrides() })?,
    };
    setup_threads(&cfg)?;
    match cli.command {
        Command::Trajectory(_) => cmd_trajectory(&cfg),
        Command::Evolve(_) => cmd_evolve(&cfg),
        Command::Sweep(_) => cmd_sweep(&cfg),
        Command::AuditKernel(_) => cmd_audit(&cfg),
        Command::Feedback(_) => cmd_feedback(&cfg),
        Command::Structure(_) => cmd_structure(&cfg),
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 3,
        Error::ImpossibleTransition { .. } | Error::InvalidDistribution(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
