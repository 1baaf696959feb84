//! The branching-selection particle system.
//!
//! N particles diffuse with drift mu between the jumps of a rate-N Poisson
//! clock. At each jump a uniformly chosen particle is duplicated and the
//! particle of minimal score is removed (equivalently: the victim jumps to
//! the duplicated particle's position). Score rules: kill-left s(x)=x,
//! kill-right s(x)=-x, bees s(x)=-||x||, and an L-diameter culling rule.
//!
//! Ordering convention: ascending by position in d=1, ascending by score in
//! d>1. Particle identity is tracked by stable labels; each label owns its
//! own random stream so that relabeling after events never perturbs the
//! increments of the other particles.

use crate::bridge::{self, BridgeQuery};
use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Selection policy mapping a state to the victim of the next removal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScoreRule {
    /// Remove the leftmost particle (s(x) = x). d = 1 only.
    KillLeft,
    /// Remove the rightmost particle (s(x) = -x). d = 1 only.
    KillRight,
    /// Remove the particle farthest from the origin (s(x) = -||x||).
    Bees,
    /// Remove the leftmost particle when it lags more than `diameter`
    /// behind the leader; otherwise the event is a no-op. d = 1 only.
    Lbbm { diameter: f64 },
}

impl ScoreRule {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::Configuration("dimension must be >= 1".into()));
        }
        match self {
            ScoreRule::Bees => Ok(()),
            ScoreRule::Lbbm { diameter } if !(*diameter > 0.0) => Err(Error::Configuration(
                format!("lbbm requires a positive diameter, got {diameter}"),
            )),
            _ if dim != 1 => {
                Err(Error::Configuration(format!("rule {self:?} requires dimension 1, got {dim}")))
            }
            _ => Ok(()),
        }
    }

    /// Score of a point; states are ordered ascending by score in d > 1.
    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            ScoreRule::KillLeft | ScoreRule::Lbbm { .. } => x[0],
            ScoreRule::KillRight => -x[0],
            ScoreRule::Bees => -x.iter().map(|c| c * c).sum::<f64>().sqrt(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScoreRule::KillLeft => "kill-left",
            ScoreRule::KillRight => "kill-right",
            ScoreRule::Bees => "bees",
            ScoreRule::Lbbm { .. } => "lbbm",
        }
    }
}

impl std::fmt::Display for ScoreRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScoreRule::Lbbm { diameter } => write!(f, "lbbm:{diameter}"),
            other => f.write_str(other.name()),
        }
    }
}

impl std::str::FromStr for ScoreRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<ScoreRule> {
        match s {
            "kill-left" | "kill_left" => Ok(ScoreRule::KillLeft),
            "kill-right" | "kill_right" => Ok(ScoreRule::KillRight),
            "bees" => Ok(ScoreRule::Bees),
            other => {
                if let Some(rest) = other.strip_prefix("lbbm:") {
                    let diameter: f64 = rest.parse().map_err(|_| {
                        Error::Configuration(format!("bad lbbm diameter: {rest:?}"))
                    })?;
                    Ok(ScoreRule::Lbbm { diameter })
                } else {
                    Err(Error::Configuration(format!(
                        "unknown rule {other:?} (expected kill-left, kill-right, bees, lbbm:L)"
                    )))
                }
            }
        }
    }
}

/// Deterministic drift applied to every particle between events.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSpec {
    components: Vec<f64>,
}

impl DriftSpec {
    pub fn scalar(mu: f64) -> DriftSpec {
        DriftSpec { components: vec![mu] }
    }

    pub fn vector(mu: Vec<f64>) -> DriftSpec {
        DriftSpec { components: mu }
    }

    pub fn zero(dim: usize) -> DriftSpec {
        DriftSpec { components: vec![0.0; dim] }
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.components.len() != dim {
            return Err(Error::Configuration(format!(
                "drift has {} components, state dimension is {dim}",
                self.components.len()
            )));
        }
        if self.components.iter().any(|c| !c.is_finite()) {
            return Err(Error::Configuration("drift components must be finite".into()));
        }
        Ok(())
    }
}

/// Index of the victim under `rule` given positions in the active ordering,
/// ties broken by lowest index. `None` means the event removes nobody
/// (lbbm with no particle beyond the diameter).
pub fn select_victim(positions: &[Vec<f64>], rule: &ScoreRule) -> Result<Option<usize>> {
    if positions.is_empty() {
        return Err(Error::Configuration("select_victim on empty state".into()));
    }
    match rule {
        ScoreRule::Lbbm { diameter } => {
            if !(*diameter > 0.0) {
                return Err(Error::Configuration(format!(
                    "lbbm requires a positive diameter, got {diameter}"
                )));
            }
            let mut lo = (0usize, positions[0][0]);
            let mut hi = positions[0][0];
            for (i, p) in positions.iter().enumerate() {
                if p[0] < lo.1 {
                    lo = (i, p[0]);
                }
                hi = hi.max(p[0]);
            }
            Ok(if hi - lo.1 > *diameter { Some(lo.0) } else { None })
        }
        _ => {
            let mut best = (0usize, rule.score(&positions[0]));
            for (i, p) in positions.iter().enumerate().skip(1) {
                let s = rule.score(p);
                if s < best.1 {
                    best = (i, s);
                }
            }
            Ok(Some(best.0))
        }
    }
}

/// One duplication/removal event. Indices are 0-based slots in the sorted
/// order at the event time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub duplicated: usize,
    pub victim: usize,
    pub was_noop: bool,
}

/// Append-only duplication history: (time, parent label, child label,
/// killed label).
#[derive(Debug, Clone, Default)]
pub struct GenealogyLog {
    pub entries: Vec<GenealogyEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenealogyEntry {
    pub time: f64,
    pub parent: u64,
    pub child: u64,
    pub killed: u64,
}

impl GenealogyLog {
    /// Walk a living label back to its time-0 ancestor. Returns the chain of
    /// labels, most recent first. Labels 0..n are the initial particles.
    pub fn ancestor_chain(&self, label: u64, initial_n: u64) -> Vec<u64> {
        let mut chain = vec![label];
        let mut cur = label;
        // entries are append-only and child labels strictly increase, so a
        // reverse scan finds each birth exactly once
        for e in self.entries.iter().rev() {
            if e.child == cur {
                cur = e.parent;
                chain.push(cur);
            }
        }
        debug_assert!(*chain.last().unwrap() < initial_n);
        chain
    }
}

/// Positions of N labeled particles at a time instant, sorted by the active
/// ordering convention.
#[derive(Debug, Clone)]
pub struct ParticleState {
    time: f64,
    dim: usize,
    coords: Vec<f64>,
    labels: Vec<u64>,
}

impl ParticleState {
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn position(&self, slot: usize) -> &[f64] {
        &self.coords[slot * self.dim..(slot + 1) * self.dim]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    /// All coordinates in d=1 (sorted ascending).
    pub fn positions_1d(&self) -> &[f64] {
        assert_eq!(self.dim, 1);
        &self.coords
    }

    pub fn positions(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.position(i).to_vec()).collect()
    }

    /// Max pairwise distance (d=1: rightmost minus leftmost).
    pub fn diameter(&self) -> f64 {
        if self.dim == 1 {
            return self.coords[self.n() - 1] - self.coords[0];
        }
        let mut best = 0.0_f64;
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                let d: f64 = self
                    .position(i)
                    .iter()
                    .zip(self.position(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                best = best.max(d);
            }
        }
        best.sqrt()
    }

    fn sort_by_convention(&mut self, rule: &ScoreRule) {
        let n = self.n();
        let d = self.dim;
        let mut order: Vec<usize> = (0..n).collect();
        if d == 1 {
            order.sort_by(|&a, &b| self.coords[a].total_cmp(&self.coords[b]));
        } else {
            let scores: Vec<f64> = (0..n).map(|i| rule.score(self.position(i))).collect();
            order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        }
        let coords = self.coords.clone();
        let labels = self.labels.clone();
        for (new, &old) in order.iter().enumerate() {
            self.coords[new * d..(new + 1) * d].copy_from_slice(&coords[old * d..(old + 1) * d]);
            self.labels[new] = labels[old];
        }
    }
}

/// Per-segment path observer. `starts`/`ends` are slot-major coordinate
/// blocks aligned with the pre-event slot order of the segment.
pub trait PathObserver {
    fn on_segment(&mut self, t0: f64, dt: f64, dim: usize, starts: &[f64], ends: &[f64]);

    fn on_event(&mut self, _record: &EventRecord, _state: &ParticleState) {}
}

/// Per-replicate observables from a bounded-horizon run.
#[derive(Debug, Clone)]
pub struct TrajectorySummary {
    pub final_time: f64,
    pub event_count: u64,
    pub noop_count: u64,
    /// Sorted final positions, slot-major.
    pub final_positions: Vec<f64>,
    pub diameter: f64,
    /// Running sup of max |coordinate| when a radius tracker was attached.
    pub sup_radius: Option<f64>,
    /// First barrier touch when a barrier detector was attached.
    pub barrier_hit_time: Option<f64>,
}

/// The full system: state, rule, drift and the per-particle random streams.
#[derive(Debug, Clone)]
pub struct ParticleSystem {
    state: ParticleState,
    rule: ScoreRule,
    drift: DriftSpec,
    base: RandomSource,
    event_src: RandomSource,
    particle_srcs: Vec<RandomSource>,
    next_label: u64,
    genealogy: Option<GenealogyLog>,
    scratch_starts: Vec<f64>,
}

const EVENT_STREAM_TAG: u64 = 0;
const PARTICLE_STREAM_TAG_BASE: u64 = 1;

impl ParticleSystem {
    /// Build a system of `n` particles in dimension `dim` from the given
    /// initial positions, sorted by the active ordering convention.
    pub fn new(
        n: usize,
        dim: usize,
        init: &[Vec<f64>],
        rule: ScoreRule,
        drift: DriftSpec,
        src: RandomSource,
    ) -> Result<ParticleSystem> {
        if n == 0 || init.is_empty() {
            return Err(Error::Configuration("need at least one particle".into()));
        }
        if init.len() != n {
            return Err(Error::Configuration(format!(
                "init has {} points, expected n = {n}",
                init.len()
            )));
        }
        rule.validate(dim)?;
        drift.validate(dim)?;
        let mut coords = Vec::with_capacity(n * dim);
        for p in init {
            if p.len() != dim {
                return Err(Error::Configuration(format!(
                    "initial point has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Configuration("initial positions must be finite".into()));
            }
            coords.extend_from_slice(p);
        }
        let mut state =
            ParticleState { time: 0.0, dim, coords, labels: (0..n as u64).collect() };
        state.sort_by_convention(&rule);
        let particle_srcs = state
            .labels
            .iter()
            .map(|&l| src.substream(PARTICLE_STREAM_TAG_BASE + l))
            .collect();
        Ok(ParticleSystem {
            state,
            rule,
            drift,
            base: src,
            event_src: src.substream(EVENT_STREAM_TAG),
            particle_srcs,
            next_label: n as u64,
            genealogy: None,
            scratch_starts: Vec::new(),
        })
    }

    /// Convenience constructor: all particles at the same 1-d position.
    pub fn new_1d_uniform_start(
        n: usize,
        start: f64,
        rule: ScoreRule,
        mu: f64,
        src: RandomSource,
    ) -> Result<ParticleSystem> {
        let init = vec![vec![start]; n];
        ParticleSystem::new(n, 1, &init, rule, DriftSpec::scalar(mu), src)
    }

    pub fn state(&self) -> &ParticleState {
        &self.state
    }

    pub fn rule(&self) -> &ScoreRule {
        &self.rule
    }

    pub fn enable_genealogy(&mut self) {
        if self.genealogy.is_none() {
            self.genealogy = Some(GenealogyLog::default());
        }
    }

    pub fn genealogy(&self) -> Option<&GenealogyLog> {
        self.genealogy.as_ref()
    }

    /// Move every particle by an independent Gaussian increment plus drift.
    /// Keeps the pre-move coordinates in `scratch_starts` for observers.
    fn diffuse(&mut self, dt: f64) -> Result<()> {
        let d = self.state.dim;
        self.scratch_starts.clear();
        self.scratch_starts.extend_from_slice(&self.state.coords);
        for (slot, src) in self.particle_srcs.iter_mut().enumerate() {
            for c in 0..d {
                let w = src.gaussian_increment(dt, 1.0)?;
                self.state.coords[slot * d + c] += w + self.drift.components[c] * dt;
            }
        }
        Ok(())
    }

    fn notify_segment(&self, observers: &mut [&mut dyn PathObserver], t0: f64, dt: f64) {
        for obs in observers.iter_mut() {
            obs.on_segment(t0, dt, self.state.dim, &self.scratch_starts, &self.state.coords);
        }
    }

    /// Duplication/removal at the current (post-diffusion, sorted) state.
    fn apply_event(&mut self, duplicated: usize) -> Result<EventRecord> {
        let victim = select_victim(&self.state.positions(), &self.rule)?;
        let d = self.state.dim;
        let record = match victim {
            Some(v) if v != duplicated => {
                let parent = self.state.labels[duplicated];
                let killed = self.state.labels[v];
                let child = self.next_label;
                self.next_label += 1;
                let (src_blk, dst_blk) = (duplicated * d, v * d);
                for c in 0..d {
                    self.state.coords[dst_blk + c] = self.state.coords[src_blk + c];
                }
                self.state.labels[v] = child;
                self.particle_srcs[v] = self.base.substream(PARTICLE_STREAM_TAG_BASE + child);
                if let Some(g) = self.genealogy.as_mut() {
                    g.entries.push(GenealogyEntry {
                        time: self.state.time,
                        parent,
                        child,
                        killed,
                    });
                }
                EventRecord {
                    time: self.state.time,
                    duplicated,
                    victim: v,
                    was_noop: false,
                }
            }
            // duplicate == victim, or lbbm found nobody beyond the diameter
            _ => EventRecord {
                time: self.state.time,
                duplicated,
                victim: victim.unwrap_or(duplicated),
                was_noop: true,
            },
        };
        self.sort_and_permute();
        Ok(record)
    }

    fn sort_and_permute(&mut self) {
        let n = self.state.n();
        let d = self.state.dim;
        let mut order: Vec<usize> = (0..n).collect();
        if d == 1 {
            order.sort_by(|&a, &b| self.state.coords[a].total_cmp(&self.state.coords[b]));
        } else {
            let scores: Vec<f64> =
                (0..n).map(|i| self.rule.score(self.state.position(i))).collect();
            order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        }
        let coords = self.state.coords.clone();
        let labels = self.state.labels.clone();
        let srcs = self.particle_srcs.clone();
        for (new, &old) in order.iter().enumerate() {
            self.state.coords[new * d..(new + 1) * d]
                .copy_from_slice(&coords[old * d..(old + 1) * d]);
            self.state.labels[new] = labels[old];
            self.particle_srcs[new] = srcs[old];
        }
    }

    /// Advance to the next duplication event and apply it.
    pub fn advance_to_next_event(&mut self) -> Result<EventRecord> {
        self.advance_to_next_event_observed(&mut [])
    }

    pub fn advance_to_next_event_observed(
        &mut self,
        observers: &mut [&mut dyn PathObserver],
    ) -> Result<EventRecord> {
        let n = self.state.n();
        let gap = self.event_src.exponential_gap(n as f64)?;
        let t0 = self.state.time;
        self.diffuse(gap)?;
        self.state.time = t0 + gap;
        self.notify_segment(observers, t0, gap);
        self.sort_and_permute();
        let duplicated = self.event_src.uniform_index(n);
        let record = self.apply_event(duplicated)?;
        for obs in observers.iter_mut() {
            obs.on_event(&record, &self.state);
        }
        Ok(record)
    }

    /// One step of the event loop clipped at `t_end`: diffuse to the next
    /// event or to `t_end`, whichever is earlier, applying the event in the
    /// former case. Returns `None` when the step was clipped (no event).
    pub fn advance_one_step(
        &mut self,
        t_end: f64,
        observers: &mut [&mut dyn PathObserver],
    ) -> Result<Option<EventRecord>> {
        let n = self.state.n();
        let remaining = t_end - self.state.time;
        if remaining <= 0.0 {
            return Ok(None);
        }
        let gap = self.event_src.exponential_gap(n as f64)?;
        let t0 = self.state.time;
        if gap >= remaining {
            self.diffuse(remaining)?;
            self.state.time = t_end;
            self.notify_segment(observers, t0, remaining);
            self.sort_and_permute();
            return Ok(None);
        }
        self.diffuse(gap)?;
        self.state.time = t0 + gap;
        self.notify_segment(observers, t0, gap);
        self.sort_and_permute();
        let duplicated = self.event_src.uniform_index(n);
        let record = self.apply_event(duplicated)?;
        for obs in observers.iter_mut() {
            obs.on_event(&record, &self.state);
        }
        Ok(Some(record))
    }

    /// Run to exactly `t_end`, clipping the final increment (exact by the
    /// memorylessness of the event clock).
    pub fn simulate_until(
        &mut self,
        t_end: f64,
        observers: &mut [&mut dyn PathObserver],
    ) -> Result<TrajectorySummary> {
        if t_end < self.state.time {
            return Err(Error::Configuration(format!(
                "t_end {t_end} is before current time {}",
                self.state.time
            )));
        }
        let mut events = 0u64;
        let mut noops = 0u64;
        while self.state.time < t_end {
            match self.advance_one_step(t_end, observers)? {
                Some(record) => {
                    events += 1;
                    if record.was_noop {
                        noops += 1;
                    }
                }
                None => break,
            }
        }
        Ok(TrajectorySummary {
            final_time: self.state.time,
            event_count: events,
            noop_count: noops,
            final_positions: self.state.coords.clone(),
            diameter: self.state.diameter(),
            sup_radius: None,
            barrier_hit_time: None,
        })
    }

    /// First time (up to `t_max`) any particle's path touches `barrier`,
    /// resolved exactly within inter-event segments by bridge laws.
    /// Returns `None` when no crossing happens by `t_max`.
    pub fn barrier_hit_time(
        &mut self,
        barrier: f64,
        t_max: f64,
        obs_src: &mut RandomSource,
        tol: f64,
    ) -> Result<Option<f64>> {
        if self.state.dim != 1 {
            return Err(Error::Unsupported("barrier detection requires dimension 1".into()));
        }
        if self.state.positions_1d().iter().any(|&x| x == barrier) {
            return Ok(Some(self.state.time));
        }
        while self.state.time < t_max {
            let n = self.state.n();
            let gap = self.event_src.exponential_gap(n as f64)?;
            let dt = gap.min(t_max - self.state.time);
            let t0 = self.state.time;
            self.diffuse(dt)?;
            self.state.time = t0 + dt;

            // exact per-particle crossing coins given the segment endpoints
            let mut earliest: Option<f64> = None;
            for slot in 0..n {
                let a = self.scratch_starts[slot];
                let b = self.state.coords[slot];
                let q = BridgeQuery::new(a, b, dt, barrier, 1.0)?;
                if bridge::bridge_crosses_barrier(&q, obs_src) {
                    let tau = t0 + bridge::bridge_first_crossing_time(&q, obs_src, tol)?;
                    earliest = Some(earliest.map_or(tau, |e: f64| e.min(tau)));
                }
            }
            if let Some(tau) = earliest {
                return Ok(Some(tau));
            }

            self.sort_and_permute();
            if gap < t_max - t0 {
                let duplicated = self.event_src.uniform_index(n);
                self.apply_event(duplicated)?;
                // a jump can land exactly on the barrier only from a copy
                if self.state.positions_1d().iter().any(|&x| x == barrier) {
                    return Ok(Some(self.state.time));
                }
            }
        }
        Ok(None)
    }
}

/// Running sup of max |coordinate|, exact per segment via bridge extrema
/// (d = 1).
pub struct SupRadiusTracker {
    pub sup: f64,
    src: RandomSource,
}

impl SupRadiusTracker {
    pub fn new(initial_positions: &[f64], src: RandomSource) -> SupRadiusTracker {
        let sup = initial_positions.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        SupRadiusTracker { sup, src }
    }
}

impl PathObserver for SupRadiusTracker {
    fn on_segment(&mut self, _t0: f64, dt: f64, dim: usize, starts: &[f64], ends: &[f64]) {
        assert_eq!(dim, 1, "radius tracking is d=1 only");
        for (&a, &b) in starts.iter().zip(ends) {
            let s = bridge::sample_bridge_sup_abs(a, b, dt, 1.0, &mut self.src);
            if s > self.sup {
                self.sup = s;
            }
        }
    }
}

/// Records `time,event_index,particle_index,position...` rows, one per
/// particle per event time (plus the initial and final states).
pub struct TrajectoryRecorder {
    pub rows: Vec<(f64, u64, usize, Vec<f64>)>,
    event_index: u64,
}

impl TrajectoryRecorder {
    pub fn new(state: &ParticleState) -> TrajectoryRecorder {
        let mut rec = TrajectoryRecorder { rows: Vec::new(), event_index: 0 };
        rec.snapshot(state);
        rec
    }

    fn snapshot(&mut self, state: &ParticleState) {
        for slot in 0..state.n() {
            self.rows.push((
                state.time(),
                self.event_index,
                slot,
                state.position(slot).to_vec(),
            ));
        }
    }

    /// Record the final (clipped) state after a `simulate_until` run.
    pub fn finish(&mut self, state: &ParticleState) {
        self.event_index += 1;
        self.snapshot(state);
    }
}

impl PathObserver for TrajectoryRecorder {
    fn on_segment(&mut self, _t0: f64, _dt: f64, _dim: usize, _starts: &[f64], _ends: &[f64]) {}

    fn on_event(&mut self, _record: &EventRecord, state: &ParticleState) {
        self.event_index += 1;
        self.snapshot(state);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_two_sample, phi, Summary};

    fn src(seed: u64) -> RandomSource {
        RandomSource::new(seed, 0)
    }

    #[test]
    fn new_system_sorts_initial_positions() {
        let init = vec![vec![2.0], vec![-1.0], vec![0.0]];
        let sys =
            ParticleSystem::new(3, 1, &init, ScoreRule::KillLeft, DriftSpec::scalar(0.0), src(1))
                .unwrap();
        assert_eq!(sys.state().positions_1d(), &[-1.0, 0.0, 2.0]);
    }

    #[test]
    fn new_system_orders_by_score_in_2d() {
        let init = vec![vec![0.0, 0.0], vec![3.0, 4.0]];
        let sys =
            ParticleSystem::new(2, 2, &init, ScoreRule::Bees, DriftSpec::zero(2), src(1)).unwrap();
        // score(-||x||): (3,4) has score -5 < 0, so it comes first
        assert_eq!(sys.state().position(0), &[3.0, 4.0]);
        assert_eq!(sys.state().position(1), &[0.0, 0.0]);
    }

    #[test]
    fn single_particle_system_is_valid() {
        let sys = ParticleSystem::new_1d_uniform_start(1, 0.0, ScoreRule::KillLeft, 0.0, src(1));
        assert!(sys.is_ok());
    }

    #[test]
    fn configuration_errors() {
        assert!(ParticleSystem::new(
            0,
            1,
            &[],
            ScoreRule::KillLeft,
            DriftSpec::scalar(0.0),
            src(1)
        )
        .is_err());
        // rule/dimension mismatch
        let init = vec![vec![0.0, 0.0]];
        assert!(
            ParticleSystem::new(1, 2, &init, ScoreRule::KillLeft, DriftSpec::zero(2), src(1))
                .is_err()
        );
        // drift dimension mismatch
        let init = vec![vec![0.0]];
        assert!(
            ParticleSystem::new(1, 1, &init, ScoreRule::KillLeft, DriftSpec::zero(2), src(1))
                .is_err()
        );
        // lbbm needs positive diameter
        assert!(ParticleSystem::new_1d_uniform_start(
            2,
            0.0,
            ScoreRule::Lbbm { diameter: 0.0 },
            0.0,
            src(1)
        )
        .is_err());
    }

    #[test]
    fn select_victim_examples() {
        let pts = |xs: &[f64]| xs.iter().map(|&x| vec![x]).collect::<Vec<_>>();
        assert_eq!(
            select_victim(&pts(&[-1.0, 0.0, 2.0]), &ScoreRule::KillRight).unwrap(),
            Some(2)
        );
        assert_eq!(select_victim(&pts(&[-3.0, 1.0, 2.0]), &ScoreRule::Bees).unwrap(), Some(0));
        // tie broken by lowest index
        assert_eq!(select_victim(&pts(&[-2.0, 2.0]), &ScoreRule::Bees).unwrap(), Some(0));
        // lbbm: leftmost beyond L, else no victim
        assert_eq!(
            select_victim(&pts(&[0.0, 4.5]), &ScoreRule::Lbbm { diameter: 4.0 }).unwrap(),
            Some(0)
        );
        assert_eq!(
            select_victim(&pts(&[0.0, 3.0]), &ScoreRule::Lbbm { diameter: 4.0 }).unwrap(),
            None
        );
        assert!(select_victim(&pts(&[0.0]), &ScoreRule::Lbbm { diameter: -1.0 }).is_err());
        assert!(select_victim(&[], &ScoreRule::KillLeft).is_err());
    }

    #[test]
    fn jump_copies_duplicated_position_onto_victim() {
        // N=2 kill-left with the right particle duplicated: both end at the
        // right position.
        let mut sys =
            ParticleSystem::new(2, 1, &[vec![-1.0], vec![3.0]], ScoreRule::KillLeft,
                DriftSpec::scalar(0.0), src(3))
                .unwrap();
        let rec = sys.apply_event(1).unwrap();
        assert!(!rec.was_noop);
        assert_eq!(sys.state().positions_1d(), &[3.0, 3.0]);

        // bees on [-3, 1, 2] duplicating the middle particle removes -3
        let mut sys = ParticleSystem::new(
            3,
            1,
            &[vec![-3.0], vec![1.0], vec![2.0]],
            ScoreRule::Bees,
            DriftSpec::scalar(0.0),
            src(3),
        )
        .unwrap();
        let rec = sys.apply_event(1).unwrap();
        assert_eq!(rec.victim, 0);
        assert_eq!(sys.state().positions_1d(), &[1.0, 1.0, 2.0]);
    }

    #[test]
    fn lbbm_event_with_no_laggard_is_noop() {
        let mut sys = ParticleSystem::new(
            2,
            1,
            &[vec![0.0], vec![1.0]],
            ScoreRule::Lbbm { diameter: 5.0 },
            DriftSpec::scalar(0.0),
            src(4),
        )
        .unwrap();
        let rec = sys.apply_event(1).unwrap();
        assert!(rec.was_noop);
        assert_eq!(sys.state().positions_1d(), &[0.0, 1.0]);

        let mut sys = ParticleSystem::new(
            2,
            1,
            &[vec![0.0], vec![6.0]],
            ScoreRule::Lbbm { diameter: 5.0 },
            DriftSpec::scalar(0.0),
            src(4),
        )
        .unwrap();
        let rec = sys.apply_event(1).unwrap();
        assert!(!rec.was_noop);
        assert_eq!(sys.state().positions_1d(), &[6.0, 6.0]);
    }

    #[test]
    fn ordering_invariant_holds_after_every_event() {
        for rule in [ScoreRule::KillLeft, ScoreRule::Bees] {
            let mut sys = ParticleSystem::new_1d_uniform_start(5, 0.0, rule, 0.1, src(9)).unwrap();
            for _ in 0..10_000 {
                sys.advance_to_next_event().unwrap();
                let xs = sys.state().positions_1d();
                assert!(xs.windows(2).all(|w| w[0] <= w[1]), "unsorted state {xs:?}");
            }
        }
    }

    #[test]
    fn noop_frequency_is_one_over_n() {
        let n = 4;
        let mut sys =
            ParticleSystem::new_1d_uniform_start(n, 0.0, ScoreRule::KillLeft, 0.0, src(10))
                .unwrap();
        let events = 40_000;
        let mut noops = 0;
        for _ in 0..events {
            if sys.advance_to_next_event().unwrap().was_noop {
                noops += 1;
            }
        }
        let p = 1.0 / n as f64;
        let se = (p * (1.0 - p) / events as f64).sqrt();
        let freq = noops as f64 / events as f64;
        assert!((freq - p).abs() < 3.0 * se, "noop freq {freq}");
    }

    #[test]
    fn population_size_is_constant() {
        let mut sys =
            ParticleSystem::new_1d_uniform_start(6, 0.0, ScoreRule::Bees, 0.3, src(11)).unwrap();
        for _ in 0..2_000 {
            sys.advance_to_next_event().unwrap();
            assert_eq!(sys.state().n(), 6);
        }
    }

    #[test]
    fn translation_invariance_for_kill_rules() {
        // Shared randomness, shifted initial condition: states differ by the
        // shift at every event time. Floating-point addition is not
        // associative, so equality is asserted to 1e-9 rather than bitwise.
        let chi = 32.0;
        for rule in [ScoreRule::KillLeft, ScoreRule::KillRight] {
            let mut a = ParticleSystem::new(
                3,
                1,
                &[vec![0.0], vec![0.5], vec![-0.25]],
                rule,
                DriftSpec::scalar(0.2),
                src(12),
            )
            .unwrap();
            let mut b = ParticleSystem::new(
                3,
                1,
                &[vec![chi], vec![0.5 + chi], vec![-0.25 + chi]],
                rule,
                DriftSpec::scalar(0.2),
                src(12),
            )
            .unwrap();
            for _ in 0..1_000 {
                let ra = a.advance_to_next_event().unwrap();
                let rb = b.advance_to_next_event().unwrap();
                assert_eq!(ra.duplicated, rb.duplicated);
                assert_eq!(ra.victim, rb.victim);
                for (x, y) in a.state().positions_1d().iter().zip(b.state().positions_1d()) {
                    assert!((y - x - chi).abs() < 1e-9, "shift broken: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn genealogy_chains_terminate_at_time_zero() {
        let n = 4;
        let mut sys =
            ParticleSystem::new_1d_uniform_start(n, 0.0, ScoreRule::KillLeft, 0.0, src(13))
                .unwrap();
        sys.enable_genealogy();
        for _ in 0..500 {
            sys.advance_to_next_event().unwrap();
        }
        let log = sys.genealogy().unwrap();
        for &label in sys.state().labels() {
            let chain = log.ancestor_chain(label, n as u64);
            assert!(*chain.last().unwrap() < n as u64);
            // chain is strictly decreasing in label (children are newer)
            assert!(chain.windows(2).all(|w| w[0] > w[1] || w[0] < n as u64));
        }
    }

    #[test]
    fn single_particle_is_drifted_brownian_motion() {
        // N=1: every event is a no-op; terminal law is Normal(mu t, t).
        let mu = 0.4;
        let t = 1.0;
        let reps = 100_000;
        let mut terminals = Vec::with_capacity(reps);
        let root = src(14);
        for r in 0..reps {
            let mut sys = ParticleSystem::new_1d_uniform_start(
                1,
                0.0,
                ScoreRule::KillLeft,
                mu,
                root.substream(r as u64),
            )
            .unwrap();
            let summary = sys.simulate_until(t, &mut []).unwrap();
            assert_eq!(summary.diameter, 0.0);
            terminals.push(summary.final_positions[0]);
        }
        let s = Summary::from_slice(&terminals);
        assert!((s.mean - mu * t).abs() < 4.0 * s.se, "mean {}", s.mean);
        assert!((s.sd * s.sd - t).abs() < 0.02, "var {}", s.sd * s.sd);
        // KS against the exact normal CDF via quantile-transform to uniforms
        let mut us: Vec<f64> =
            terminals.iter().map(|x| phi((x - mu * t) / t.sqrt())).collect();
        us.sort_by(f64::total_cmp);
        let n = us.len() as f64;
        let mut d = 0.0_f64;
        for (i, u) in us.iter().enumerate() {
            d = d.max((u - i as f64 / n).abs().max((u - (i as f64 + 1.0) / n).abs()));
        }
        assert!(d < 0.01, "KS to exact normal {d}");
    }

    #[test]
    fn simulate_until_zero_span_returns_initial_state() {
        let mut sys =
            ParticleSystem::new_1d_uniform_start(3, 1.5, ScoreRule::Bees, 0.0, src(15)).unwrap();
        let summary = sys.simulate_until(0.0, &mut []).unwrap();
        assert_eq!(summary.event_count, 0);
        assert_eq!(summary.final_positions, vec![1.5, 1.5, 1.5]);
    }

    #[test]
    fn barrier_hit_time_initial_touch_and_reflection_law() {
        // initial position on the barrier
        let mut sys =
            ParticleSystem::new(2, 1, &[vec![0.0], vec![2.0]], ScoreRule::Bees,
                DriftSpec::scalar(0.0), src(16))
                .unwrap();
        let mut obs = RandomSource::new(16, 99);
        assert_eq!(sys.barrier_hit_time(0.0, 1.0, &mut obs, 1e-6).unwrap(), Some(0.0));

        // single Brownian particle from 1: P(hit 0 by t=1) = 2 Phi(-1)
        let reps = 100_000;
        let root = src(17);
        let mut hits = 0usize;
        for r in 0..reps {
            let rep_src = root.substream(r as u64);
            let mut sys =
                ParticleSystem::new_1d_uniform_start(1, 1.0, ScoreRule::KillLeft, 0.0, rep_src)
                    .unwrap();
            let mut obs = rep_src.substream(1_000_003);
            if sys.barrier_hit_time(0.0, 1.0, &mut obs, 1e-6).unwrap().is_some() {
                hits += 1;
            }
        }
        let p = 2.0 * phi(-1.0);
        let freq = hits as f64 / reps as f64;
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        assert!((freq - p).abs() < 3.0 * se, "hit freq {freq} vs {p}");
    }

    #[test]
    fn subcritical_bees_hit_the_origin() {
        // bees, N=2, mu=0.1, start (5,5): hits by t=1e4 in virtually every
        // replicate (the drift is far below the critical speed)
        let reps = 1_000;
        let root = src(18);
        let mut hits = 0usize;
        for r in 0..reps {
            let rep_src = root.substream(r as u64);
            let mut sys =
                ParticleSystem::new_1d_uniform_start(2, 5.0, ScoreRule::Bees, 0.1, rep_src)
                    .unwrap();
            let mut obs = rep_src.substream(1_000_003);
            if sys.barrier_hit_time(0.0, 1e4, &mut obs, 1e-6).unwrap().is_some() {
                hits += 1;
            }
        }
        assert!(hits as f64 / reps as f64 >= 0.999, "hit fraction {}", hits);
    }

    #[test]
    fn n2_terminal_speed_matches_renewal_composition_oracle() {
        // Dual route: the long-horizon speed of the 2-particle kill-left
        // system against direct sampling of the renewal increment
        // sqrt(T) * max(Z1, Z2) with a shared Exp(1) time T.
        let horizon = 400.0;
        let reps = 300;
        let root = src(19);
        let mut speeds = Vec::with_capacity(reps);
        for r in 0..reps {
            let mut sys = ParticleSystem::new_1d_uniform_start(
                2,
                0.0,
                ScoreRule::KillLeft,
                0.0,
                root.substream(r as u64),
            )
            .unwrap();
            let summary = sys.simulate_until(horizon, &mut []).unwrap();
            speeds.push(summary.final_positions[0] / horizon);
        }
        let sim = Summary::from_slice(&speeds);

        let mut oracle_src = RandomSource::new(20, 0);
        let mut incs = Vec::with_capacity(1_000_000);
        for _ in 0..1_000_000 {
            let t = oracle_src.exponential_gap(1.0).unwrap();
            let z1 = oracle_src.standard_normal();
            let z2 = oracle_src.standard_normal();
            incs.push(t.sqrt() * z1.max(z2));
        }
        let oracle = Summary::from_slice(&incs);
        // renewal rate is 1, so the speed equals the mean increment
        let tol = 3.0 * (sim.se * sim.se + oracle.se * oracle.se).sqrt() + 2.0 / horizon;
        assert!(
            (sim.mean - oracle.mean).abs() < tol,
            "simulated speed {} vs renewal oracle {}",
            sim.mean,
            oracle.mean
        );
    }

    #[test]
    fn trajectory_recorder_rows() {
        let mut sys =
            ParticleSystem::new_1d_uniform_start(2, 0.0, ScoreRule::KillLeft, 0.0, src(21))
                .unwrap();
        let mut rec = TrajectoryRecorder::new(sys.state());
        let summary = {
            let mut obs: [&mut dyn PathObserver; 1] = [&mut rec];
            sys.simulate_until(2.0, &mut obs).unwrap()
        };
        rec.finish(sys.state());
        // initial rows + one per particle per event + final rows
        assert_eq!(rec.rows.len() as u64, 2 * (summary.event_count + 2));
    }
}
