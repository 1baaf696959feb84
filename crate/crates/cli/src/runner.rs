//! Command dispatch: resolve defaults, run the experiment inside a sized
//! worker pool, and persist manifest + result tables.
//!
//! Replicates are merged by replicate index, never completion order, so any
//! `--threads` value produces byte-identical result files.

use std::path::{Path, PathBuf};
use std::time::Instant;

use bdsim_core::bbm::{self, HorizonLaw, PathFunctional};
use bdsim_core::coupling;
use bdsim_core::estimators::{self, HittingKind, IncrementLaw};
use bdsim_core::rng::{mix64, RandomSource};
use bdsim_core::system::{DriftSpec, ParticleSystem, PathObserver, ScoreRule, TrajectoryRecorder};
use bdsim_core::{Error, Result};

use crate::config::ExperimentConfig;
use crate::manifest::RunManifest;
use crate::output::{fmt_f64, write_file, CsvTable};

/// Files produced by one run.
#[derive(Debug, Clone)]
pub struct RunOutputs {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

struct RunBody {
    tables: Vec<(String, CsvTable)>,
    summary: Vec<String>,
    extra_text: Vec<(String, String)>,
}

impl RunBody {
    fn new() -> RunBody {
        RunBody { tables: Vec::new(), summary: Vec::new(), extra_text: Vec::new() }
    }
}

/// Execute a resolved configuration: validates, runs, writes
/// `manifest.json`, `config.json`, result CSVs and `summary.txt`.
pub fn execute(mut config: ExperimentConfig) -> Result<RunOutputs> {
    config.validate()?;
    let dir = resolve_output_dir(&config)?;
    std::fs::create_dir_all(&dir)
        .map_err(|e| Error::Configuration(format!("cannot create {}: {e}", dir.display())))?;

    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Configuration(format!("cannot build worker pool: {e}")))?;
    let body = pool.install(|| dispatch(&mut config))?;
    let duration = started.elapsed().as_secs_f64();

    let mut manifest = RunManifest::new(config.clone(), duration);
    let mut files = Vec::new();

    let config_json = serde_json::to_string_pretty(&config).expect("config serializes");
    manifest.record_output("config.json", config_json.as_bytes());
    write_file(&dir, "config.json", config_json.as_bytes())?;
    files.push("config.json".to_string());

    for (name, table) in &body.tables {
        let bytes = table.to_bytes();
        manifest.record_output(name, &bytes);
        write_file(&dir, name, &bytes)?;
        files.push(name.clone());
    }
    for (name, text) in &body.extra_text {
        manifest.record_output(name, text.as_bytes());
        write_file(&dir, name, text.as_bytes())?;
        files.push(name.clone());
    }

    let mut summary = String::new();
    summary.push_str(&format!("command: {}\nseed: {}\n", config.command, config.seed));
    for line in &body.summary {
        summary.push_str(line);
        summary.push('\n');
    }
    manifest.record_output("summary.txt", summary.as_bytes());
    write_file(&dir, "summary.txt", summary.as_bytes())?;
    files.push("summary.txt".to_string());

    write_file(&dir, "manifest.json", manifest.to_json().as_bytes())?;
    files.push("manifest.json".to_string());

    Ok(RunOutputs { dir, files })
}

fn resolve_output_dir(config: &ExperimentConfig) -> Result<PathBuf> {
    if let Some(d) = &config.output_dir {
        return Ok(PathBuf::from(d));
    }
    let base = std::env::var("BDSIM_OUTPUT_DIR").unwrap_or_else(|_| "runs".to_string());
    Ok(Path::new(&base).join(format!("{}-seed{}", config.command, config.seed)))
}

fn parse_rule(config: &ExperimentConfig, default: ScoreRule) -> Result<ScoreRule> {
    match &config.rule {
        None => Ok(default),
        Some(s) => s.parse(),
    }
}

fn root_source(config: &ExperimentConfig) -> RandomSource {
    RandomSource::new(config.seed, 0)
}

fn dispatch(config: &mut ExperimentConfig) -> Result<RunBody> {
    match config.command.as_str() {
        "simulate" => run_simulate(config),
        "speed" => run_speed(config),
        "diameter" => run_diameter(config),
        "renewal-n2" => run_renewal_n2(config),
        "random-sum" => run_random_sum(config),
        "hitting" => run_hitting(config),
        "escape" => run_escape(config),
        "stationarity" => run_stationarity(config),
        "recurrence" => run_recurrence(config),
        "couple-monotone" => run_couple(config, true),
        "couple-killright" => run_couple(config, false),
        "bbm-many-to-one" => run_many_to_one(config),
        "bbm-radius" => run_bbm_radius(config),
        "sweep" => run_sweep(config),
        other => Err(Error::Configuration(format!("unknown command {other:?}"))),
    }
}

fn run_simulate(config: &mut ExperimentConfig) -> Result<RunBody> {
    let n = *config.n.get_or_insert(2);
    let dim = *config.dimension.get_or_insert(1);
    let rule = parse_rule(config, ScoreRule::KillLeft)?;
    config.rule.get_or_insert_with(|| rule.to_string());
    let mu = *config.mu.get_or_insert(0.0);
    let horizon = *config.horizon.get_or_insert(10.0);

    let init: Vec<Vec<f64>> = match &config.init {
        None => vec![vec![0.0; dim]; n],
        Some(flat) => {
            if flat.len() != n * dim {
                return Err(Error::Configuration(format!(
                    "init has {} values, expected n*dimension = {}",
                    flat.len(),
                    n * dim
                )));
            }
            flat.chunks(dim).map(|c| c.to_vec()).collect()
        }
    };
    // drift acts along the first coordinate
    let mut drift = vec![0.0; dim];
    drift[0] = mu;

    let mut sys = ParticleSystem::new(n, dim, &init, rule, DriftSpec::vector(drift), root_source(config))?;
    let mut recorder = TrajectoryRecorder::new(sys.state());
    let summary = {
        let mut obs: [&mut dyn PathObserver; 1] = [&mut recorder];
        sys.simulate_until(horizon, &mut obs)?
    };
    recorder.finish(sys.state());

    let mut cols = vec!["time".to_string(), "event_index".to_string(), "particle_index".to_string(), "position".to_string()];
    for d in 1..dim {
        cols.push(format!("position_dim{}", d + 1));
    }
    let col_refs: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
    let mut table = CsvTable::new(&col_refs);
    for (time, event, slot, pos) in &recorder.rows {
        let mut row = vec![fmt_f64(*time), event.to_string(), slot.to_string()];
        row.extend(pos.iter().map(|&x| fmt_f64(x)));
        table.push_row(&row);
    }

    let mut body = RunBody::new();
    body.summary.push(format!("events: {}", summary.event_count));
    body.summary.push(format!("noop_events: {}", summary.noop_count));
    body.summary.push(format!("final_time: {}", summary.final_time));
    body.summary.push(format!("final_diameter: {}", summary.diameter));
    body.tables.push(("trajectory.csv".to_string(), table));
    Ok(body)
}

fn run_speed(config: &mut ExperimentConfig) -> Result<RunBody> {
    let n = *config.n.get_or_insert(2);
    let rule = parse_rule(config, ScoreRule::KillLeft)?;
    config.rule.get_or_insert_with(|| rule.to_string());
    let mu = *config.mu.get_or_insert(0.0);
    let horizon = *config.horizon.get_or_insert(2000.0);
    let reps = *config.reps.get_or_insert(200);

    let report = estimators::estimate_speed(n, rule, mu, horizon, reps, root_source(config))?;
    let mut table = CsvTable::new(&[
        "n", "rule", "mu", "horizon", "reps", "point_estimate", "standard_error", "ci_lo",
        "ci_hi", "xn_over_t_mean",
    ]);
    table.push_row(&[
        n.to_string(),
        rule.to_string(),
        fmt_f64(mu),
        fmt_f64(horizon),
        reps.to_string(),
        fmt_f64(report.point_estimate),
        fmt_f64(report.standard_error),
        fmt_f64(report.ci95.0),
        fmt_f64(report.ci95.1),
        fmt_f64(report.diagnostics["xn_over_t_mean"].parse::<f64>().unwrap_or(f64::NAN)),
    ]);

    let mut body = RunBody::new();
    body.summary.push(format!(
        "speed estimate: {:.6} +/- {:.6} (95% CI [{:.6}, {:.6}])",
        report.point_estimate, report.standard_error, report.ci95.0, report.ci95.1
    ));
    body.tables.push(("speed.csv".to_string(), table));
    Ok(body)
}

fn run_diameter(config: &mut ExperimentConfig) -> Result<RunBody> {
    let n = *config.n.get_or_insert(4);
    let grid = config
        .horizon_grid
        .get_or_insert_with(|| vec![250.0, 500.0, 1000.0, 2000.0])
        .clone();
    let reps = *config.reps.get_or_insert(100);

    let t = estimators::diameter_decay(n, &grid, reps, root_source(config))?;
    let mut table = CsvTable::new(&["horizon", "diam_over_t_mean", "se", "mean_diameter"]);
    for row in &t.rows {
        table.push_row(&[
            fmt_f64(row.horizon),
            fmt_f64(row.diam_over_t.mean),
            fmt_f64(row.diam_over_t.se),
            fmt_f64(row.mean_diameter),
        ]);
    }
    let mut body = RunBody::new();
    let monotone = t.rows.windows(2).all(|w| w[1].diam_over_t.mean < w[0].diam_over_t.mean);
    body.summary.push(format!("diam/t decreasing across grid: {monotone}"));
    body.tables.push(("diameter.csv".to_string(), table));
    Ok(body)
}

fn run_renewal_n2(config: &mut ExperimentConfig) -> Result<RunBody> {
    let mu = *config.mu.get_or_insert(0.0);
    let direct = *config.steps.get_or_insert(1_000_000);
    let extracted = *config.samples.get_or_insert(100_000);

    let s = estimators::n2_renewal_chain(mu, direct, extracted, root_source(config))?;
    let ks = bdsim_core::stats::ks_two_sample(&s.direct, &s.extracted);
    let d = bdsim_core::stats::Summary::from_slice(&s.direct);
    let e = bdsim_core::stats::Summary::from_slice(&s.extracted);
    let g = bdsim_core::stats::Summary::from_slice(&s.gaps);

    let mut table = CsvTable::new(&["metric", "value"]);
    for (k, v) in [
        ("direct_count", d.n as f64),
        ("direct_mean", d.mean),
        ("direct_se", d.se),
        ("extracted_count", e.n as f64),
        ("extracted_mean", e.mean),
        ("extracted_se", e.se),
        ("gap_mean", g.mean),
        ("ks_direct_vs_extracted", ks),
    ] {
        table.push_row(&[k.to_string(), fmt_f64(v)]);
    }
    let mut body = RunBody::new();
    body.summary.push(format!("direct-composition mean: {:.6} +/- {:.6}", d.mean, d.se));
    body.summary.push(format!("simulation-extracted mean: {:.6} +/- {:.6}", e.mean, e.se));
    body.summary.push(format!("KS(direct, extracted): {ks:.5}"));
    body.tables.push(("renewal_n2.csv".to_string(), table));
    Ok(body)
}

fn run_random_sum(config: &mut ExperimentConfig) -> Result<RunBody> {
    let law: IncrementLaw = config
        .law
        .get_or_insert_with(|| "renewal-n2:0".to_string())
        .parse()?;
    let grid = config.r_grid.get_or_insert_with(|| vec![5.0, 10.0, 20.0, 40.0]).clone();
    let reps = *config.reps.get_or_insert(10_000);

    let t = estimators::random_sum_first_passage(law, &grid, reps, root_source(config))?;
    let mut table = CsvTable::new(&["r", "mean_steps", "se"]);
    for row in &t.rows {
        table.push_row(&[fmt_f64(row.r), fmt_f64(row.mean_steps.mean), fmt_f64(row.mean_steps.se)]);
    }
    let mut body = RunBody::new();
    body.summary.push(format!(
        "fit: steps ~ {:.5} + {:.5} R (r2 {:.6}); increment mean {:.5}",
        t.fit.intercept, t.fit.slope, t.fit.r2, t.empirical_mean
    ));
    body.tables.push(("random_sum.csv".to_string(), table));
    Ok(body)
}

fn run_hitting(config: &mut ExperimentConfig) -> Result<RunBody> {
    let kind = match config.kind.get_or_insert_with(|| "nbbm".to_string()).as_str() {
        "nbbm" => HittingKind::NbbmDrift,
        "bees" => HittingKind::BeesDrift,
        other => {
            return Err(Error::Configuration(format!(
                "unknown hitting kind {other:?} (expected nbbm or bees)"
            )))
        }
    };
    let n = *config.n.get_or_insert(2);
    let mu = *config.mu.get_or_insert(0.0);
    let grid = config.r_grid.get_or_insert_with(|| vec![5.0, 10.0, 20.0, 40.0]).clone();
    let reps = *config.reps.get_or_insert(500);

    let t = estimators::hitting_time_linearity(kind, n, mu, &grid, reps, root_source(config))?;
    let mut table = CsvTable::new(&["r", "mean_tau", "se"]);
    for row in &t.rows {
        table.push_row(&[fmt_f64(row.r), fmt_f64(row.tau.mean), fmt_f64(row.tau.se)]);
    }
    let mut body = RunBody::new();
    body.summary.push(format!(
        "fit: tau ~ {:.4} + {:.4} R (r2 {:.6}); v_hat {:.5} +/- {:.5}",
        t.fit.intercept, t.fit.slope, t.fit.r2, t.gate.v_hat, t.gate.se
    ));
    body.tables.push(("hitting.csv".to_string(), table));
    Ok(body)
}

fn run_escape(config: &mut ExperimentConfig) -> Result<RunBody> {
    let n = *config.n.get_or_insert(2);
    let mu = *config.mu.get_or_insert(0.5);
    let horizon = *config.horizon.get_or_insert(2000.0);
    let reps = *config.reps.get_or_insert(200);

    let report = estimators::escape_velocity(n, mu, horizon, reps, root_source(config))?;
    let mut table = CsvTable::new(&[
        "n", "mu", "horizon", "reps", "point_estimate", "standard_error", "ci_lo", "ci_hi",
        "predicted_escape_velocity", "v_hat",
    ]);
    table.push_row(&[
        n.to_string(),
        fmt_f64(mu),
        fmt_f64(horizon),
        reps.to_string(),
        fmt_f64(report.point_estimate),
        fmt_f64(report.standard_error),
        fmt_f64(report.ci95.0),
        fmt_f64(report.ci95.1),
        fmt_f64(report.diagnostics["predicted_escape_velocity"].parse::<f64>().unwrap_or(f64::NAN)),
        fmt_f64(report.diagnostics["v_hat"].parse::<f64>().unwrap_or(f64::NAN)),
    ]);
    let mut body = RunBody::new();
    body.summary.push(format!(
        "escape velocity: {:.6} +/- {:.6} (theorem formula with estimated speed: {})",
        report.point_estimate,
        report.standard_error,
        report.diagnostics["predicted_escape_velocity"]
    ));
    body.tables.push(("escape.csv".to_string(), table));
    Ok(body)
}

fn run_stationarity(config: &mut ExperimentConfig) -> Result<RunBody> {
    let n = *config.n.get_or_insert(2);
    let mu = *config.mu.get_or_insert(0.1);
    let burn_in = *config.burn_in.get_or_insert(500.0);
    let gap = *config.sample_gap.get_or_insert(20.0);
    let samples = *config.samples.get_or_insert(1000);
    let init_a = *config.init_a.get_or_insert(0.0);
    let init_b = *config.init_b.get_or_insert(50.0);

    let rep = estimators::stationarity_diagnostic(
        n,
        mu,
        burn_in,
        gap,
        samples,
        init_a,
        init_b,
        root_source(config),
    )?;
    let mut table = CsvTable::new(&["statistic", "ks_distance", "critical_1pct", "samples"]);
    for (stat, d) in &rep.ks {
        table.push_row(&[
            stat.clone(),
            fmt_f64(*d),
            fmt_f64(rep.critical_1pct),
            rep.samples.to_string(),
        ]);
    }
    let mut body = RunBody::new();
    for (stat, d) in &rep.ks {
        body.summary.push(format!(
            "{stat}: KS {d:.5} ({}reject at 1%)",
            if *d > rep.critical_1pct { "" } else { "fail to " }
        ));
    }
    body.summary.push(
        "note: KS on summary statistics is a desk-scale proxy for total-variation convergence"
            .to_string(),
    );
    body.tables.push(("stationarity.csv".to_string(), table));
    Ok(body)
}

fn run_recurrence(config: &mut ExperimentConfig) -> Result<RunBody> {
    let n = *config.n.get_or_insert(2);
    let mu = *config.mu.get_or_insert(0.1);
    let horizon = *config.horizon.get_or_insert(10_000.0);
    let reps = *config.reps.get_or_insert(200);

    let s = estimators::recurrence_experiment(n, mu, horizon, reps, root_source(config))?;
    let mut table = recurrence_table();
    push_recurrence_row(&mut table, None, n, &s);
    let mut body = RunBody::new();
    body.summary.push(format!(
        "mean returns {:.2} (first half {:.2}); terminated fraction {:.3}; min returns {}",
        s.mean_returns, s.mean_returns_first_half, s.terminated_fraction, s.min_returns
    ));
    body.tables.push(("recurrence.csv".to_string(), table));
    Ok(body)
}

fn recurrence_table() -> CsvTable {
    CsvTable::new(&[
        "point",
        "n",
        "mu",
        "horizon",
        "reps",
        "mean_returns",
        "mean_returns_first_half",
        "terminated_fraction",
        "min_returns",
    ])
}

fn push_recurrence_row(
    table: &mut CsvTable,
    point: Option<usize>,
    n: usize,
    s: &estimators::RecurrenceSummary,
) {
    table.push_row(&[
        point.map_or_else(|| "-".to_string(), |p| p.to_string()),
        n.to_string(),
        fmt_f64(s.mu),
        fmt_f64(s.horizon),
        s.reps.to_string(),
        fmt_f64(s.mean_returns),
        fmt_f64(s.mean_returns_first_half),
        fmt_f64(s.terminated_fraction),
        s.min_returns.to_string(),
    ]);
}

fn run_couple(config: &mut ExperimentConfig, monotone: bool) -> Result<RunBody> {
    let n = *config.n.get_or_insert(2);
    let events = *config.events.get_or_insert(100_000);
    let seeds = *config.seeds.get_or_insert(50);
    let dump_events = *config.dump_events.get_or_insert(1000);
    let root = root_source(config);

    let (mut table, mut debug, mut violations) = (
        CsvTable::new(&["seed", "events", "violated", "violation_event", "violation_rank"]),
        CsvTable::new(&["event_index", "rank", "value_a", "value_b", "slack"]),
        0u64,
    );
    let n_prime = if monotone { *config.n_prime.get_or_insert(4) } else { n };
    let mu = if monotone { 0.0 } else { *config.mu.get_or_insert(0.0) };

    for seed_idx in 0..seeds {
        let src = root.substream(seed_idx);
        let mut pair = if monotone {
            coupling::couple_monotone(n, n_prime, &vec![0.0; n], &vec![0.0; n_prime], src)?
        } else {
            coupling::couple_bees_to_killright(n, mu, &vec![0.0; n], src)?
        };
        if seed_idx == 0 && dump_events > 0 {
            pair.enable_debug_dump();
        }
        for _ in 0..events {
            pair.advance_event()?;
        }
        let (ok, v) = coupling::assert_coupling_invariant(&pair);
        if !ok {
            violations += 1;
        }
        table.push_row(&[
            seed_idx.to_string(),
            events.to_string(),
            if ok { "0".into() } else { "1".into() },
            v.map_or_else(|| "-".to_string(), |r| r.event_index.to_string()),
            v.map_or_else(|| "-".to_string(), |r| r.rank.to_string()),
        ]);
        if let Some(rows) = &pair.debug_rows {
            for row in rows.iter().take((dump_events as usize) * n) {
                debug.push_row(&[
                    row.event_index.to_string(),
                    row.rank.to_string(),
                    fmt_f64(row.value_a),
                    fmt_f64(row.value_b),
                    fmt_f64(row.slack),
                ]);
            }
        }
    }

    let name = if monotone { "couple_monotone.csv" } else { "couple_killright.csv" };
    let mut body = RunBody::new();
    body.summary.push(format!(
        "seeds with violations: {violations}/{seeds} over {events} events each"
    ));
    body.tables.push((name.to_string(), table));
    body.tables.push(("couple_debug.csv".to_string(), debug));
    Ok(body)
}

fn run_many_to_one(config: &mut ExperimentConfig) -> Result<RunBody> {
    let functional: PathFunctional = config
        .functional
        .get_or_insert_with(|| "constant-one".to_string())
        .parse()?;
    let t = *config.t.get_or_insert(1.0);
    let reps = *config.reps.get_or_insert(100_000);

    let c = bbm::many_to_one_check(functional, t, reps, root_source(config))?;
    let mut table =
        CsvTable::new(&["functional", "t", "reps", "lhs", "lhs_se", "rhs", "rhs_se", "z"]);
    table.push_row(&[
        config.functional.clone().unwrap(),
        fmt_f64(t),
        reps.to_string(),
        fmt_f64(c.lhs),
        fmt_f64(c.lhs_se),
        fmt_f64(c.rhs),
        fmt_f64(c.rhs_se),
        fmt_f64(c.z_score),
    ]);
    let mut body = RunBody::new();
    body.summary.push(format!(
        "branching sum {:.5} vs e^t single-path {:.5}: z = {:.3}",
        c.lhs, c.rhs, c.z_score
    ));
    body.tables.push(("bbm_many_to_one.csv".to_string(), table));
    Ok(body)
}

fn run_bbm_radius(config: &mut ExperimentConfig) -> Result<RunBody> {
    let law = match (
        config.t_law.get_or_insert_with(|| "exponential".to_string()).as_str(),
        *config.t_param.get_or_insert(1.0),
    ) {
        ("fixed", p) => HorizonLaw::Fixed(p),
        ("exponential", p) => HorizonLaw::Exponential(p),
        (other, _) => {
            return Err(Error::Configuration(format!(
                "unknown t-law {other:?} (expected fixed or exponential)"
            )))
        }
    };
    let xs = config.xs.get_or_insert_with(|| vec![1.0, 2.0, 3.0, 4.0, 6.0]).clone();
    let reps = *config.reps.get_or_insert(100_000);
    let cap = *config.cap.get_or_insert(bbm::DEFAULT_POPULATION_CAP);

    let t = bbm::radius_tail_profile(law, &xs, reps, root_source(config), cap)?;
    let mut table = CsvTable::new(&["x", "empirical_tail", "stderr"]);
    for row in &t.rows {
        table.push_row(&[fmt_f64(row.x), fmt_f64(row.tail), fmt_f64(row.stderr)]);
    }
    let mut body = RunBody::new();
    body.summary.push(format!("replicates: {} (cap overflows: {})", t.reps, t.overflow));
    body.tables.push(("bbm_radius.csv".to_string(), table));

    if config.newick.unwrap_or(false) {
        let t_tree = match law {
            HorizonLaw::Fixed(t) => t.min(5.0),
            HorizonLaw::Exponential(_) => 2.0,
        };
        let mut tree_src = root_source(config).substream(u64::MAX - 7);
        let forest = bbm::simulate_bbm(t_tree, &mut tree_src, cap)?;
        body.extra_text.push(("tree.newick".to_string(), forest.newick()));
    }
    Ok(body)
}

fn run_sweep(config: &mut ExperimentConfig) -> Result<RunBody> {
    let inner = config
        .sweep_command
        .clone()
        .ok_or_else(|| Error::Configuration("sweep requires --sweep-command".into()))?;
    let axes = usize::from(config.mu_grid.is_some()) + usize::from(config.n_grid.is_some());
    if axes != 1 {
        return Err(Error::Configuration(
            "sweep requires exactly one grid axis (--mu-grid or --n-grid)".into(),
        ));
    }
    let points: Vec<(usize, Option<f64>, Option<usize>)> = if let Some(mus) = &config.mu_grid {
        if mus.is_empty() {
            return Err(Error::Configuration("empty sweep grid".into()));
        }
        mus.iter().enumerate().map(|(i, &m)| (i, Some(m), None)).collect()
    } else {
        let ns = config.n_grid.as_ref().unwrap();
        if ns.is_empty() {
            return Err(Error::Configuration("empty sweep grid".into()));
        }
        ns.iter().enumerate().map(|(i, &n)| (i, None, Some(n))).collect()
    };

    let mut body = RunBody::new();
    match inner.as_str() {
        "speed" => {
            let rule = parse_rule(config, ScoreRule::KillLeft)?;
            let horizon = *config.horizon.get_or_insert(2000.0);
            let reps = *config.reps.get_or_insert(200);
            let mut table = CsvTable::new(&[
                "point", "n", "mu", "point_estimate", "standard_error", "ci_lo", "ci_hi",
            ]);
            for (i, mu_i, n_i) in points {
                let n = n_i.or(config.n).unwrap_or(2);
                let mu = mu_i.or(config.mu).unwrap_or(0.0);
                let seed_i = config.seed ^ mix64(i as u64);
                let r = estimators::estimate_speed(
                    n,
                    rule,
                    mu,
                    horizon,
                    reps,
                    RandomSource::new(seed_i, 0),
                )?;
                table.push_row(&[
                    i.to_string(),
                    n.to_string(),
                    fmt_f64(mu),
                    fmt_f64(r.point_estimate),
                    fmt_f64(r.standard_error),
                    fmt_f64(r.ci95.0),
                    fmt_f64(r.ci95.1),
                ]);
                body.summary.push(format!(
                    "point {i}: n={n} mu={mu}: {:.5} +/- {:.5}",
                    r.point_estimate, r.standard_error
                ));
            }
            body.tables.push(("sweep.csv".to_string(), table));
        }
        "recurrence" => {
            let n = *config.n.get_or_insert(2);
            let horizon = *config.horizon.get_or_insert(10_000.0);
            let reps = *config.reps.get_or_insert(200);
            let mut table = recurrence_table();
            for (i, mu_i, n_i) in points {
                let n_pt = n_i.unwrap_or(n);
                let mu = mu_i.or(config.mu).unwrap_or(0.1);
                let seed_i = config.seed ^ mix64(i as u64);
                let s = estimators::recurrence_experiment(
                    n_pt,
                    mu,
                    horizon,
                    reps,
                    RandomSource::new(seed_i, 0),
                )?;
                push_recurrence_row(&mut table, Some(i), n_pt, &s);
                body.summary.push(format!(
                    "point {i}: mu={mu}: mean returns {:.2}, terminated fraction {:.3}",
                    s.mean_returns, s.terminated_fraction
                ));
            }
            body.tables.push(("sweep.csv".to_string(), table));
        }
        "escape" => {
            let n = *config.n.get_or_insert(2);
            let horizon = *config.horizon.get_or_insert(2000.0);
            let reps = *config.reps.get_or_insert(200);
            let mut table = CsvTable::new(&[
                "point", "n", "mu", "point_estimate", "standard_error", "predicted",
            ]);
            for (i, mu_i, n_i) in points {
                let n_pt = n_i.unwrap_or(n);
                let mu = mu_i.or(config.mu).unwrap_or(1.0);
                let seed_i = config.seed ^ mix64(i as u64);
                let r = estimators::escape_velocity(
                    n_pt,
                    mu,
                    horizon,
                    reps,
                    RandomSource::new(seed_i, 0),
                )?;
                table.push_row(&[
                    i.to_string(),
                    n_pt.to_string(),
                    fmt_f64(mu),
                    fmt_f64(r.point_estimate),
                    fmt_f64(r.standard_error),
                    r.diagnostics["predicted_escape_velocity"].clone(),
                ]);
            }
            body.tables.push(("sweep.csv".to_string(), table));
        }
        other => {
            return Err(Error::Configuration(format!(
                "sweep does not support inner command {other:?} (expected speed, recurrence, escape)"
            )))
        }
    }
    Ok(body)
}
