use std::path::PathBuf;
use std::process::ExitCode;

use bdsim_cli::config::ExperimentConfig;
use bdsim_cli::runner;
use bdsim_core::Error;
use clap::{Args, Parser, Subcommand};

/// Event-driven Monte Carlo experiments for branching-selection particle
/// systems (N-BBM, Brownian Bees, L-BBM) with drift.
#[derive(Parser)]
#[command(name = "bdsim", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: CommandKind,
}

#[derive(Subcommand)]
enum CommandKind {
    /// Simulate one trajectory and dump per-event particle positions.
    Simulate(Flags),
    /// Estimate the asymptotic speed X_1(t)/t.
    Speed(Flags),
    /// E[diam_t]/t over an increasing horizon grid.
    Diameter(Flags),
    /// Two-particle renewal increments: direct composition vs extraction
    /// from simulation.
    #[command(name = "renewal-n2")]
    RenewalN2(Flags),
    /// First passage of discrete random sums over a level grid.
    #[command(name = "random-sum")]
    RandomSum(Flags),
    /// Hitting-time linearity in the level R.
    Hitting(Flags),
    /// Escape velocity of supercritical bees with drift.
    Escape(Flags),
    /// Stationarity proxy: KS distances of summary statistics between two
    /// initial conditions.
    Stationarity(Flags),
    /// Count returns of bees-with-drift to the origin.
    Recurrence(Flags),
    /// Population-monotonicity coupling with per-event invariant checks.
    #[command(name = "couple-monotone")]
    CoupleMonotone(Flags),
    /// Kill-from-right domination coupling for bees with drift.
    #[command(name = "couple-killright")]
    CoupleKillright(Flags),
    /// Many-to-one identity check for free branching Brownian motion.
    #[command(name = "bbm-many-to-one")]
    BbmManyToOne(Flags),
    /// Tail profile of the running radius of free branching Brownian motion.
    #[command(name = "bbm-radius")]
    BbmRadius(Flags),
    /// Run one command across a single grid axis with derived per-point
    /// seeds.
    Sweep(Flags),
}

impl CommandKind {
    fn name(&self) -> &'static str {
        match self {
            CommandKind::Simulate(_) => "simulate",
            CommandKind::Speed(_) => "speed",
            CommandKind::Diameter(_) => "diameter",
            CommandKind::RenewalN2(_) => "renewal-n2",
            CommandKind::RandomSum(_) => "random-sum",
            CommandKind::Hitting(_) => "hitting",
            CommandKind::Escape(_) => "escape",
            CommandKind::Stationarity(_) => "stationarity",
            CommandKind::Recurrence(_) => "recurrence",
            CommandKind::CoupleMonotone(_) => "couple-monotone",
            CommandKind::CoupleKillright(_) => "couple-killright",
            CommandKind::BbmManyToOne(_) => "bbm-many-to-one",
            CommandKind::BbmRadius(_) => "bbm-radius",
            CommandKind::Sweep(_) => "sweep",
        }
    }

    fn flags(self) -> Flags {
        match self {
            CommandKind::Simulate(f)
            | CommandKind::Speed(f)
            | CommandKind::Diameter(f)
            | CommandKind::RenewalN2(f)
            | CommandKind::RandomSum(f)
            | CommandKind::Hitting(f)
            | CommandKind::Escape(f)
            | CommandKind::Stationarity(f)
            | CommandKind::Recurrence(f)
            | CommandKind::CoupleMonotone(f)
            | CommandKind::CoupleKillright(f)
            | CommandKind::BbmManyToOne(f)
            | CommandKind::BbmRadius(f)
            | CommandKind::Sweep(f) => f,
        }
    }
}

#[derive(Args)]
struct Flags {
    /// JSON config file with the same (kebab-case) keys as the flags;
    /// explicit flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Master seed (64-bit).
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (default: machine parallelism). Results are
    /// byte-identical for any value.
    #[arg(long)]
    threads: Option<usize>,

    /// Output directory (default: $BDSIM_OUTPUT_DIR or ./runs/<cmd>-seed<seed>).
    #[arg(long)]
    output_dir: Option<PathBuf>,

    /// Population size N.
    #[arg(long)]
    n: Option<usize>,

    /// Larger population N' for couple-monotone.
    #[arg(long)]
    n_prime: Option<usize>,

    /// State dimension d (d > 1 supports the bees rule only).
    #[arg(long)]
    dimension: Option<usize>,

    /// Selection rule: kill-left, kill-right, bees, lbbm:L (L in position
    /// units).
    #[arg(long)]
    rule: Option<String>,

    /// Drift in position units per time unit (first coordinate for d > 1).
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,

    /// Run horizon in time units.
    #[arg(long)]
    horizon: Option<f64>,

    /// Number of replicates.
    #[arg(long)]
    reps: Option<usize>,

    /// Comma-separated level grid R (position units).
    #[arg(long, value_delimiter = ',')]
    r_grid: Option<Vec<f64>>,

    /// Comma-separated drift grid (position units per time unit).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu_grid: Option<Vec<f64>>,

    /// Comma-separated population grid.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,

    /// Comma-separated horizon grid (time units, increasing).
    #[arg(long, value_delimiter = ',')]
    horizon_grid: Option<Vec<f64>>,

    /// Comma-separated radius levels x (position units, increasing).
    #[arg(long, value_delimiter = ',')]
    xs: Option<Vec<f64>>,

    /// Time argument t (time units).
    #[arg(long)]
    t: Option<f64>,

    /// Horizon law for bbm-radius: fixed or exponential.
    #[arg(long)]
    t_law: Option<String>,

    /// Horizon parameter: the fixed time, or the exponential rate (1/time
    /// units).
    #[arg(long)]
    t_param: Option<f64>,

    /// Path functional: constant-one, terminal-exceeds:x, sup-exceeds:x.
    #[arg(long)]
    functional: Option<String>,

    /// Increment law: constant:c, shifted-normal:m, renewal-n2:mu.
    #[arg(long)]
    law: Option<String>,

    /// Hitting experiment kind: nbbm (level R above the start) or bees
    /// (start at R, hit the origin).
    #[arg(long)]
    kind: Option<String>,

    /// Burn-in before snapshots (time units).
    #[arg(long)]
    burn_in: Option<f64>,

    /// Gap between snapshots (time units).
    #[arg(long)]
    sample_gap: Option<f64>,

    /// Number of snapshots (stationarity) or extracted renewals
    /// (renewal-n2).
    #[arg(long)]
    samples: Option<usize>,

    /// First chain's common initial position (position units).
    #[arg(long, allow_negative_numbers = true)]
    init_a: Option<f64>,

    /// Second chain's common initial position (position units).
    #[arg(long, allow_negative_numbers = true)]
    init_b: Option<f64>,

    /// Explicit initial positions, comma separated, n*dimension values
    /// (position units).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init: Option<Vec<f64>>,

    /// Direct-composition sample count (renewal-n2).
    #[arg(long)]
    steps: Option<usize>,

    /// Events per coupled run.
    #[arg(long)]
    events: Option<u64>,

    /// Number of independent seeds for coupling checks.
    #[arg(long)]
    seeds: Option<u64>,

    /// Branching population safety cap.
    #[arg(long)]
    cap: Option<usize>,

    /// Events dumped to couple_debug.csv for the first seed.
    #[arg(long)]
    dump_events: Option<u64>,

    /// Write a Newick tree of one replicate (bbm-radius).
    #[arg(long)]
    newick: bool,

    /// Inner command for sweep: speed, recurrence, or escape.
    #[arg(long)]
    sweep_command: Option<String>,
}

fn build_config(name: &str, flags: Flags) -> Result<ExperimentConfig, Error> {
    let mut c = ExperimentConfig::new(name);
    c.threads = flags.threads;
    c.output_dir = flags.output_dir.map(|p| p.display().to_string());
    c.n = flags.n;
    c.n_prime = flags.n_prime;
    c.dimension = flags.dimension;
    c.rule = flags.rule;
    c.mu = flags.mu;
    c.horizon = flags.horizon;
    c.reps = flags.reps;
    c.r_grid = flags.r_grid;
    c.mu_grid = flags.mu_grid;
    c.n_grid = flags.n_grid;
    c.horizon_grid = flags.horizon_grid;
    c.xs = flags.xs;
    c.t = flags.t;
    c.t_law = flags.t_law;
    c.t_param = flags.t_param;
    c.functional = flags.functional;
    c.law = flags.law;
    c.kind = flags.kind;
    c.burn_in = flags.burn_in;
    c.sample_gap = flags.sample_gap;
    c.samples = flags.samples;
    c.init_a = flags.init_a;
    c.init_b = flags.init_b;
    c.init = flags.init;
    c.steps = flags.steps;
    c.events = flags.events;
    c.seeds = flags.seeds;
    c.cap = flags.cap;
    c.dump_events = flags.dump_events;
    c.newick = if flags.newick { Some(true) } else { None };
    c.sweep_command = flags.sweep_command;

    if let Some(path) = flags.config {
        let file = ExperimentConfig::load(&path)?;
        c.seed = flags.seed.unwrap_or(file.seed);
        c.merge_under(file)?;
    } else if let Some(seed) = flags.seed {
        c.seed = seed;
    }
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let flags = cli.command.flags();
    let result = build_config(name, flags).and_then(runner::execute);
    match result {
        Ok(out) => {
            println!("wrote {} files to {}", out.files.len(), out.dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (kind, code) = match &e {
                Error::Configuration(_) | Error::ParameterDomain(_) | Error::Unsupported(_) => {
                    ("config-error", 2)
                }
                Error::Precondition(_) => ("precondition-error", 3),
                Error::ResourceCap(_) => ("resource-cap", 4),
            };
            eprintln!("bdsim: {kind}: {e}");
            ExitCode::from(code)
        }
    }
}
