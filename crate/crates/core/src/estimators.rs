//! Replicated Monte Carlo estimators: asymptotic speeds, diameter decay,
//! the 2-particle renewal chain, discrete random-sum first passage, hitting
//! times, escape velocity, stationarity and recurrence diagnostics.
//!
//! Replicates are embarrassingly parallel; replicate `r` draws from
//! `src.substream(r)` and results are merged in replicate order, so output
//! is independent of the worker schedule. Standard errors always come from
//! replicate-level values, never within-path pseudo-replication.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::stats::{ks_two_sample, linear_fit, LinearFit, Summary};
use crate::system::{ParticleSystem, ScoreRule};

/// Point estimate with replicate-level uncertainty and free-form notes.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub point_estimate: f64,
    pub standard_error: f64,
    pub replicate_count: usize,
    pub horizon: f64,
    pub ci95: (f64, f64),
    pub diagnostics: BTreeMap<String, String>,
}

impl EstimateReport {
    fn from_summary(s: Summary, horizon: f64) -> EstimateReport {
        EstimateReport {
            point_estimate: s.mean,
            standard_error: s.se,
            replicate_count: s.n,
            horizon,
            ci95: s.ci95(),
            diagnostics: BTreeMap::new(),
        }
    }

    fn note(&mut self, key: &str, value: String) {
        self.diagnostics.insert(key.to_string(), value);
    }
}

/// Observed drift regime relative to an estimated critical speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftRegime {
    Subcritical,
    Supercritical,
    /// |mu| within two standard errors of the estimate: rejected as
    /// ambiguous rather than classified.
    Ambiguous,
}

/// Cached estimate of the critical speed v_N (the kill-left asymptotic
/// speed), used to gate drift-dependent estimators.
#[derive(Debug, Clone, Copy)]
pub struct CriticalSpeedEstimate {
    pub n: usize,
    pub v_hat: f64,
    pub se: f64,
    pub horizon: f64,
    pub reps: usize,
}

pub const SPEED_GATE_HORIZON: f64 = 2000.0;
pub const SPEED_GATE_REPS: usize = 100;

impl CriticalSpeedEstimate {
    pub fn classify(&self, mu: f64) -> DriftRegime {
        let a = mu.abs();
        if a < self.v_hat - 2.0 * self.se {
            DriftRegime::Subcritical
        } else if a > self.v_hat + 2.0 * self.se {
            DriftRegime::Supercritical
        } else {
            DriftRegime::Ambiguous
        }
    }

    fn require(&self, mu: f64, wanted: DriftRegime) -> Result<()> {
        let got = self.classify(mu);
        if got == wanted {
            return Ok(());
        }
        Err(Error::Configuration(format!(
            "drift mu = {mu} classified as {got:?} against v_hat = {:.4} +/- {:.4} \
             (n = {}); this estimator requires {wanted:?}",
            self.v_hat, self.se, self.n
        )))
    }
}

/// Estimate v_N once per population size (kill-left rule, horizon 2000).
pub fn critical_speed(n: usize, src: RandomSource) -> Result<CriticalSpeedEstimate> {
    let report =
        estimate_speed(n, ScoreRule::KillLeft, 0.0, SPEED_GATE_HORIZON, SPEED_GATE_REPS, src)?;
    Ok(CriticalSpeedEstimate {
        n,
        v_hat: report.point_estimate,
        se: report.standard_error,
        horizon: SPEED_GATE_HORIZON,
        reps: SPEED_GATE_REPS,
    })
}

fn run_replicates<T: Send>(
    reps: usize,
    src: RandomSource,
    f: impl Fn(RandomSource) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..reps)
        .into_par_iter()
        .map(|r| f(src.substream(r as u64)))
        .collect::<Result<Vec<T>>>()
}

/// Mean and SE of X_1(horizon)/horizon across replicates started from the
/// origin; diagnostics carry the rightmost particle's speed as well.
pub fn estimate_speed(
    n: usize,
    rule: ScoreRule,
    mu: f64,
    horizon: f64,
    reps: usize,
    src: RandomSource,
) -> Result<EstimateReport> {
    if !(horizon >= 100.0) {
        return Err(Error::Configuration(format!(
            "horizon must be >= 100 to suppress transient bias, got {horizon}"
        )));
    }
    if reps < 30 {
        return Err(Error::Configuration(format!("need at least 30 replicates, got {reps}")));
    }
    let ends = run_replicates(reps, src, |rep_src| {
        let mut sys = ParticleSystem::new_1d_uniform_start(n, 0.0, rule, mu, rep_src)?;
        let summary = sys.simulate_until(horizon, &mut [])?;
        Ok((
            summary.final_positions[0] / horizon,
            summary.final_positions[n - 1] / horizon,
        ))
    })?;
    let lows: Vec<f64> = ends.iter().map(|e| e.0).collect();
    let highs: Vec<f64> = ends.iter().map(|e| e.1).collect();
    let s = Summary::from_slice(&lows);
    let mut report = EstimateReport::from_summary(s, horizon);
    report.note("estimand", "x1_over_t".into());
    report.note("xn_over_t_mean", format!("{}", Summary::from_slice(&highs).mean));
    report.note("rule", rule.to_string());
    report.note("mu", format!("{mu}"));
    report.note("n", format!("{n}"));
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct DiameterRow {
    pub horizon: f64,
    pub mean_diameter: f64,
    pub diam_over_t: Summary,
}

#[derive(Debug, Clone)]
pub struct DiameterDecayTable {
    pub rows: Vec<DiameterRow>,
    /// Replicate-major diam/t values aligned with `rows`, for paired tests.
    pub per_replicate: Vec<Vec<f64>>,
}

/// E[diam_t]/t on an increasing horizon grid, one trajectory per replicate
/// snapshotted at each grid point.
pub fn diameter_decay(
    n: usize,
    horizon_grid: &[f64],
    reps: usize,
    src: RandomSource,
) -> Result<DiameterDecayTable> {
    if horizon_grid.is_empty()
        || horizon_grid[0] <= 0.0
        || horizon_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::Configuration("horizon grid must be positive and increasing".into()));
    }
    if reps < 2 {
        return Err(Error::Configuration("need at least two replicates".into()));
    }
    let per_replicate = run_replicates(reps, src, |rep_src| {
        let mut sys =
            ParticleSystem::new_1d_uniform_start(n, 0.0, ScoreRule::KillLeft, 0.0, rep_src)?;
        let mut vals = Vec::with_capacity(horizon_grid.len());
        for &t in horizon_grid {
            let summary = sys.simulate_until(t, &mut [])?;
            vals.push(summary.diameter / t);
        }
        Ok(vals)
    })?;
    let rows = horizon_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let col: Vec<f64> = per_replicate.iter().map(|v| v[j]).collect();
            let s = Summary::from_slice(&col);
            DiameterRow { horizon: t, mean_diameter: s.mean * t, diam_over_t: s }
        })
        .collect();
    Ok(DiameterDecayTable { rows, per_replicate })
}

/// The 2-particle renewal chain: direct-composition samples of the
/// increment law (max of two Laplace(sqrt 2) draws minus mu times an
/// Exp(1) draw) next to increments extracted from full simulation at the
/// collapse events.
#[derive(Debug, Clone)]
pub struct RenewalChainSample {
    pub direct: Vec<f64>,
    pub extracted: Vec<f64>,
    /// Inter-renewal gaps from the simulation, strictly positive.
    pub gaps: Vec<f64>,
    pub mean_direct: f64,
    pub mean_extracted: f64,
}

pub const LAPLACE_SQRT2_SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// One direct-composition draw of the increment law.
pub fn renewal_increment_draw(mu: f64, src: &mut RandomSource) -> f64 {
    let a = src.laplace(LAPLACE_SQRT2_SCALE).expect("fixed positive scale");
    let b = src.laplace(LAPLACE_SQRT2_SCALE).expect("fixed positive scale");
    let t = src.exponential_gap(1.0).expect("fixed positive rate");
    a.max(b) - mu * t
}

pub fn n2_renewal_chain(
    mu: f64,
    direct_count: usize,
    extracted_count: usize,
    src: RandomSource,
) -> Result<RenewalChainSample> {
    if direct_count == 0 || extracted_count == 0 {
        return Err(Error::Configuration("need at least one renewal sample".into()));
    }
    let mut direct_src = src.substream(0);
    let direct: Vec<f64> =
        (0..direct_count).map(|_| renewal_increment_draw(mu, &mut direct_src)).collect();

    // extraction: the 2-particle kill-left system collapses to a point at
    // every non-noop event; those are the renewals
    let mut sys =
        ParticleSystem::new_1d_uniform_start(2, 0.0, ScoreRule::KillLeft, 0.0, src.substream(1))?;
    let mut extracted = Vec::with_capacity(extracted_count);
    let mut gaps = Vec::with_capacity(extracted_count);
    let (mut prev_pos, mut prev_t) = (0.0_f64, 0.0_f64);
    while extracted.len() < extracted_count {
        let rec = sys.advance_to_next_event()?;
        if !rec.was_noop {
            let pos = sys.state().positions_1d()[0];
            extracted.push((pos - mu * rec.time) - (prev_pos - mu * prev_t));
            gaps.push(rec.time - prev_t);
            prev_pos = pos;
            prev_t = rec.time;
        }
    }
    let mean_direct = Summary::from_slice(&direct).mean;
    let mean_extracted = Summary::from_slice(&extracted).mean;
    Ok(RenewalChainSample { direct, extracted, gaps, mean_direct, mean_extracted })
}

/// Increment laws for discrete random-sum first passage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IncrementLaw {
    Constant(f64),
    ShiftedNormal { shift: f64 },
    /// Direct-composition 2-particle renewal increments.
    RenewalN2 { mu: f64 },
}

impl IncrementLaw {
    pub fn draw(&self, src: &mut RandomSource) -> f64 {
        match self {
            IncrementLaw::Constant(c) => *c,
            IncrementLaw::ShiftedNormal { shift } => src.standard_normal() + shift,
            IncrementLaw::RenewalN2 { mu } => renewal_increment_draw(*mu, src),
        }
    }
}

impl std::str::FromStr for IncrementLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<IncrementLaw> {
        if let Some(rest) = s.strip_prefix("constant:") {
            return Ok(IncrementLaw::Constant(rest.parse().map_err(|_| {
                Error::Configuration(format!("bad constant increment {rest:?}"))
            })?));
        }
        if let Some(rest) = s.strip_prefix("shifted-normal:") {
            return Ok(IncrementLaw::ShiftedNormal {
                shift: rest.parse().map_err(|_| {
                    Error::Configuration(format!("bad normal shift {rest:?}"))
                })?,
            });
        }
        if let Some(rest) = s.strip_prefix("renewal-n2:") {
            return Ok(IncrementLaw::RenewalN2 {
                mu: rest.parse().map_err(|_| {
                    Error::Configuration(format!("bad renewal drift {rest:?}"))
                })?,
            });
        }
        Err(Error::Configuration(format!(
            "unknown increment law {s:?} (expected constant:c, shifted-normal:m, renewal-n2:mu)"
        )))
    }
}

#[derive(Debug, Clone)]
pub struct RandomSumRow {
    pub r: f64,
    pub mean_steps: Summary,
}

#[derive(Debug, Clone)]
pub struct RandomSumTable {
    pub rows: Vec<RandomSumRow>,
    pub fit: LinearFit,
    pub empirical_mean: f64,
}

/// E[inf{n : S_n >= R}] over a grid of levels, with a least-squares line.
/// The increment law must have positive mean (checked empirically).
pub fn random_sum_first_passage(
    law: IncrementLaw,
    r_grid: &[f64],
    reps: usize,
    src: RandomSource,
) -> Result<RandomSumTable> {
    if r_grid.len() < 2 || r_grid.iter().any(|&r| r < 0.0) {
        return Err(Error::Configuration(
            "level grid needs at least two nonnegative points".into(),
        ));
    }
    if reps == 0 {
        return Err(Error::Configuration("need at least one replicate".into()));
    }
    let mut pilot_src = src.substream(u64::MAX);
    let pilot: Vec<f64> = (0..10_000).map(|_| law.draw(&mut pilot_src)).collect();
    let empirical_mean = Summary::from_slice(&pilot).mean;
    if empirical_mean <= 0.0 {
        return Err(Error::Precondition(format!(
            "increment law has non-positive empirical mean {empirical_mean}"
        )));
    }

    let mut rows = Vec::with_capacity(r_grid.len());
    for (j, &r) in r_grid.iter().enumerate() {
        let steps = run_replicates(reps, src.substream(j as u64), |mut rep_src| {
            let mut s = 0.0_f64;
            let mut n = 0u64;
            while s < r {
                s += law.draw(&mut rep_src);
                n += 1;
                if n > 100_000_000 {
                    return Err(Error::ResourceCap(format!(
                        "first passage to {r} exceeded 1e8 steps"
                    )));
                }
            }
            Ok(n as f64)
        })?;
        rows.push(RandomSumRow { r, mean_steps: Summary::from_slice(&steps) });
    }
    let xs: Vec<f64> = rows.iter().map(|row| row.r).collect();
    let ys: Vec<f64> = rows.iter().map(|row| row.mean_steps.mean).collect();
    let fit = linear_fit(&xs, &ys);
    Ok(RandomSumTable { rows, fit, empirical_mean })
}

/// Which continuous-time hitting experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HittingKind {
    /// Kill-left system from the origin; tau = first event time with
    /// X_1(t) - mu t >= R.
    NbbmDrift,
    /// Bees with drift started at R_0; tau = first touch of the origin.
    BeesDrift,
}

#[derive(Debug, Clone)]
pub struct HittingRow {
    pub r: f64,
    pub tau: Summary,
}

#[derive(Debug, Clone)]
pub struct HittingTable {
    pub rows: Vec<HittingRow>,
    pub fit: LinearFit,
    pub gate: CriticalSpeedEstimate,
}

pub fn hitting_time_linearity(
    kind: HittingKind,
    n: usize,
    mu: f64,
    r_grid: &[f64],
    reps: usize,
    src: RandomSource,
) -> Result<HittingTable> {
    if r_grid.len() < 2 || r_grid.iter().any(|&r| r < 0.0) {
        return Err(Error::Configuration(
            "level grid needs at least two nonnegative points".into(),
        ));
    }
    if reps == 0 {
        return Err(Error::Configuration("need at least one replicate".into()));
    }
    if kind == HittingKind::NbbmDrift && mu < 0.0 {
        return Err(Error::Configuration("nbbm hitting requires mu >= 0".into()));
    }
    let gate = critical_speed(n, src.substream(u64::MAX))?;
    gate.require(mu, DriftRegime::Subcritical)?;

    let mut rows = Vec::with_capacity(r_grid.len());
    for (j, &r) in r_grid.iter().enumerate() {
        let taus = run_replicates(reps, src.substream(j as u64), |rep_src| match kind {
            HittingKind::NbbmDrift => {
                if r == 0.0 {
                    return Ok(0.0);
                }
                let mut sys = ParticleSystem::new_1d_uniform_start(
                    n,
                    0.0,
                    ScoreRule::KillLeft,
                    0.0,
                    rep_src,
                )?;
                // detection at event times: the detection lag is O(1) in R,
                // so it shifts the intercept but not the slope
                let mut events = 0u64;
                loop {
                    let rec = sys.advance_to_next_event()?;
                    if sys.state().positions_1d()[0] - mu * rec.time >= r {
                        return Ok(rec.time);
                    }
                    events += 1;
                    if events > 50_000_000 {
                        return Err(Error::ResourceCap(format!(
                            "no passage to {r} within 5e7 events"
                        )));
                    }
                }
            }
            HittingKind::BeesDrift => {
                let mut sys =
                    ParticleSystem::new_1d_uniform_start(n, r, ScoreRule::Bees, mu, rep_src)?;
                let mut obs = rep_src.substream(u64::MAX - 1);
                match sys.barrier_hit_time(0.0, 1e6, &mut obs, 1e-6)? {
                    Some(t) => Ok(t),
                    None => Err(Error::ResourceCap(format!(
                        "no origin hit from {r} by t = 1e6"
                    ))),
                }
            }
        })?;
        rows.push(HittingRow { r, tau: Summary::from_slice(&taus) });
    }
    let xs: Vec<f64> = rows.iter().map(|row| row.r).collect();
    let ys: Vec<f64> = rows.iter().map(|row| row.tau.mean).collect();
    let fit = linear_fit(&xs, &ys);
    Ok(HittingTable { rows, fit, gate })
}

/// Mean of Y_1(horizon)/horizon for supercritical bees with drift.
pub fn escape_velocity(
    n: usize,
    mu: f64,
    horizon: f64,
    reps: usize,
    src: RandomSource,
) -> Result<EstimateReport> {
    if !(horizon >= 100.0) {
        return Err(Error::Configuration(format!("horizon must be >= 100, got {horizon}")));
    }
    if reps < 30 {
        return Err(Error::Configuration(format!("need at least 30 replicates, got {reps}")));
    }
    let gate = critical_speed(n, src.substream(u64::MAX))?;
    gate.require(mu, DriftRegime::Supercritical)?;

    let ends = run_replicates(reps, src, |rep_src| {
        let mut sys = ParticleSystem::new_1d_uniform_start(n, 0.0, ScoreRule::Bees, mu, rep_src)?;
        let summary = sys.simulate_until(horizon, &mut [])?;
        Ok(summary.final_positions[0] / horizon)
    })?;
    let s = Summary::from_slice(&ends);
    let mut report = EstimateReport::from_summary(s, horizon);
    let predicted = (1.0 - gate.v_hat / mu.abs()) * mu;
    report.note("estimand", "y1_over_t".into());
    report.note("predicted_escape_velocity", format!("{predicted}"));
    report.note("v_hat", format!("{}", gate.v_hat));
    report.note("v_hat_se", format!("{}", gate.se));
    report.note("mu", format!("{mu}"));
    report.note("n", format!("{n}"));
    Ok(report)
}

/// Snapshot statistics compared between two initial conditions.
pub const STATIONARITY_STATISTICS: [&str; 3] = ["center_of_mass", "diameter", "min_abs"];

#[derive(Debug, Clone)]
pub struct StationarityReport {
    /// KS distance per summary statistic between the two chains.
    pub ks: BTreeMap<String, f64>,
    /// Critical KS distance at the 1% level for the sample sizes used.
    pub critical_1pct: f64,
    pub samples: usize,
}

/// Total-variation convergence proxy: KS distances of low-dimensional
/// summary statistics between chains started from two initial conditions.
pub fn stationarity_diagnostic(
    n: usize,
    mu: f64,
    burn_in: f64,
    sample_gap: f64,
    samples: usize,
    init_a: f64,
    init_b: f64,
    src: RandomSource,
) -> Result<StationarityReport> {
    if samples < 10 {
        return Err(Error::Configuration("need at least 10 snapshots".into()));
    }
    if !(sample_gap > 0.0) || !(burn_in >= 0.0) {
        return Err(Error::Configuration("invalid burn-in or sample gap".into()));
    }
    let gate = critical_speed(n, src.substream(u64::MAX))?;
    gate.require(mu, DriftRegime::Subcritical)?;

    let run = |start: f64, stream: RandomSource| -> Result<[Vec<f64>; 3]> {
        snapshot_chain(n, mu, start, burn_in, sample_gap, samples, stream)
    };
    let a = run(init_a, src.substream(1))?;
    let b = run(init_b, src.substream(2))?;
    let mut ks = BTreeMap::new();
    for (i, name) in STATIONARITY_STATISTICS.iter().enumerate() {
        ks.insert(name.to_string(), ks_two_sample(&a[i], &b[i]));
    }
    Ok(StationarityReport {
        ks,
        critical_1pct: crate::stats::ks_critical(0.01, samples, samples),
        samples,
    })
}

/// One bees-with-drift chain: snapshots of (center of mass, diameter,
/// min |Y|) every `sample_gap` after `burn_in`. Exposed so callers can
/// build shared-randomness controls.
pub fn snapshot_chain(
    n: usize,
    mu: f64,
    start: f64,
    burn_in: f64,
    sample_gap: f64,
    samples: usize,
    stream: RandomSource,
) -> Result<[Vec<f64>; 3]> {
    let mut sys = ParticleSystem::new_1d_uniform_start(n, start, ScoreRule::Bees, mu, stream)?;
    sys.simulate_until(burn_in, &mut [])?;
    let mut out = [Vec::with_capacity(samples), Vec::with_capacity(samples), Vec::with_capacity(samples)];
    let mut t = burn_in;
    for _ in 0..samples {
        t += sample_gap;
        sys.simulate_until(t, &mut [])?;
        let xs = sys.state().positions_1d();
        out[0].push(xs.iter().sum::<f64>() / n as f64);
        out[1].push(xs[n - 1] - xs[0]);
        out[2].push(xs.iter().fold(f64::INFINITY, |m, x| m.min(x.abs())));
    }
    Ok(out)
}

/// Zero-return statistics for one bees-with-drift replicate.
#[derive(Debug, Clone, Copy)]
pub struct ReturnStats {
    pub returns: u64,
    pub returns_first_half: u64,
    pub last_return: Option<f64>,
    pub horizon: f64,
}

/// Count disjoint returns of the system to the origin over one trajectory.
/// A return is a barrier touch (resolved by exact bridge coins per segment)
/// while the system was entirely on one side; the counter re-arms at the
/// next event time with all particles strictly on one side.
pub fn recurrence_return_counter(
    n: usize,
    mu: f64,
    horizon: f64,
    src: RandomSource,
) -> Result<ReturnStats> {
    if !(horizon >= 0.0) {
        return Err(Error::ParameterDomain(format!("horizon must be >= 0, got {horizon}")));
    }

    #[derive(Default)]
    struct SegmentCapture {
        dt: f64,
        starts: Vec<f64>,
        ends: Vec<f64>,
    }
    impl crate::system::PathObserver for SegmentCapture {
        fn on_segment(&mut self, _t0: f64, dt: f64, _dim: usize, starts: &[f64], ends: &[f64]) {
            self.dt = dt;
            self.starts.clear();
            self.starts.extend_from_slice(starts);
            self.ends.clear();
            self.ends.extend_from_slice(ends);
        }
    }

    let mut sys = ParticleSystem::new_1d_uniform_start(n, 0.0, ScoreRule::Bees, mu, src)?;
    let mut coin_src = src.substream(u64::MAX - 2);
    let mut armed = false;
    let mut stats =
        ReturnStats { returns: 0, returns_first_half: 0, last_return: None, horizon };
    let half = horizon / 2.0;

    while sys.state().time() < horizon {
        let mut cap = SegmentCapture::default();
        {
            let mut obs: [&mut dyn crate::system::PathObserver; 1] = [&mut cap];
            sys.advance_one_step(horizon, &mut obs)?;
        }
        if cap.dt > 0.0 {
            // coins are consumed for every slot regardless of the armed
            // state so the draw pattern does not depend on history
            let mut touched = false;
            for (&a, &b) in cap.starts.iter().zip(&cap.ends) {
                let p = crate::bridge::crossing_probability(a, b, cap.dt, 0.0, 1.0);
                if coin_src.uniform() < p {
                    touched = true;
                }
            }
            if armed && touched {
                stats.returns += 1;
                if sys.state().time() <= half {
                    stats.returns_first_half += 1;
                }
                stats.last_return = Some(sys.state().time());
                armed = false;
            }
        }
        if !armed {
            let xs = sys.state().positions_1d();
            let one_side = xs.iter().all(|&x| x > 0.0) || xs.iter().all(|&x| x < 0.0);
            if one_side {
                armed = true;
            }
        }
    }
    Ok(stats)
}

/// Aggregated recurrence experiment over replicates.
#[derive(Debug, Clone)]
pub struct RecurrenceSummary {
    pub mu: f64,
    pub horizon: f64,
    pub reps: usize,
    pub mean_returns: f64,
    pub mean_returns_first_half: f64,
    /// Fraction of replicates whose last return happened before horizon/2
    /// (no returns counts as terminated).
    pub terminated_fraction: f64,
    pub min_returns: u64,
}

pub fn recurrence_experiment(
    n: usize,
    mu: f64,
    horizon: f64,
    reps: usize,
    src: RandomSource,
) -> Result<RecurrenceSummary> {
    if reps == 0 {
        return Err(Error::Configuration("need at least one replicate".into()));
    }
    let all = run_replicates(reps, src, |rep_src| {
        recurrence_return_counter(n, mu, horizon, rep_src)
    })?;
    let mean_returns = all.iter().map(|s| s.returns as f64).sum::<f64>() / reps as f64;
    let mean_first = all.iter().map(|s| s.returns_first_half as f64).sum::<f64>() / reps as f64;
    let terminated = all
        .iter()
        .filter(|s| s.last_return.map_or(true, |t| t < horizon / 2.0))
        .count();
    let min_returns = all.iter().map(|s| s.returns).min().unwrap_or(0);
    Ok(RecurrenceSummary {
        mu,
        horizon,
        reps,
        mean_returns,
        mean_returns_first_half: mean_first,
        terminated_fraction: terminated as f64 / reps as f64,
        min_returns,
    })
}
