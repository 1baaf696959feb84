//! Executable shared-randomness couplings with per-event invariant checks.
//!
//! Two constructions, both d = 1:
//!
//! - Population monotonicity: a kill-left system of size n against one of
//!   size n' >= n on a joint rate-n' clock. The small system thins on
//!   duplication index and shares top-aligned rank increments, so the k-th
//!   rightmost particle of the small system never exceeds the k-th rightmost
//!   of the large one. With shared addends the inequality survives floating
//!   point exactly.
//!
//! - Kill-right domination: a driftless kill-from-right system against a
//!   bees system with drift mu sharing clock, duplication indices and rank
//!   increments. The bees side is stored in recentred coordinates
//!   (Y - mu t), making X_n(t) <= Y_n(t) - mu t an exact componentwise
//!   invariant; bees victim selection evaluates |Y| = |recentred + mu t| on
//!   the fly.

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Declared comparison between the two sides of a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Comparison {
    /// a_(i) <= b_(i + n' - n) on sorted states (top-aligned ranks).
    ComponentwiseLeq,
    /// a_i <= b_i - mu t at every event time.
    ShiftedLeq { mu: f64 },
}

/// First observed violation of the declared comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationReport {
    pub event_index: u64,
    pub rank: usize,
    pub value_a: f64,
    pub value_b: f64,
}

/// Debug dump row: per-event, per-rank slack between the two sides.
#[derive(Debug, Clone, Copy)]
pub struct DebugRow {
    pub event_index: u64,
    pub rank: usize,
    pub value_a: f64,
    pub value_b: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PairKind {
    Monotone,
    BeesKillRight { mu: f64 },
}

/// Two systems advanced on one stream of randomness.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    kind: PairKind,
    comparison: Comparison,
    /// Sorted ascending; the smaller system in the monotone pairing.
    a: Vec<f64>,
    /// Sorted ascending; recentred (Y - mu t) for the bees side.
    b: Vec<f64>,
    time: f64,
    events: u64,
    src: RandomSource,
    first_violation: Option<ViolationReport>,
    pub debug_rows: Option<Vec<DebugRow>>,
}

/// Couple a kill-left system of size `n` to one of size `n_prime >= n`.
///
/// Initial condition must satisfy the top-aligned ordering: the k-th
/// rightmost of `init_a` at or below the k-th rightmost of `init_b`.
pub fn couple_monotone(
    n: usize,
    n_prime: usize,
    init_a: &[f64],
    init_b: &[f64],
    src: RandomSource,
) -> Result<CoupledPair> {
    if n == 0 || n_prime < n {
        return Err(Error::Configuration(format!("need 1 <= n <= n_prime, got {n}, {n_prime}")));
    }
    if init_a.len() != n || init_b.len() != n_prime {
        return Err(Error::Configuration("initial condition sizes do not match n, n_prime".into()));
    }
    let mut a = init_a.to_vec();
    let mut b = init_b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let m = n_prime - n;
    for i in 0..n {
        if a[i] > b[m + i] {
            return Err(Error::Precondition(format!(
                "initial ordering violated at rank {i}: {} > {}",
                a[i],
                b[m + i]
            )));
        }
    }
    Ok(CoupledPair {
        kind: PairKind::Monotone,
        comparison: Comparison::ComponentwiseLeq,
        a,
        b,
        time: 0.0,
        events: 0,
        src,
        first_violation: None,
        debug_rows: None,
    })
}

/// Couple a driftless kill-from-right system to a bees system with drift
/// `mu`, both of size `n`, from identical initial conditions.
pub fn couple_bees_to_killright(
    n: usize,
    mu: f64,
    init: &[f64],
    src: RandomSource,
) -> Result<CoupledPair> {
    if n == 0 || init.len() != n {
        return Err(Error::Configuration(format!(
            "need n >= 1 matching the initial condition, got n = {n}, {} points",
            init.len()
        )));
    }
    if !mu.is_finite() {
        return Err(Error::Configuration("drift must be finite".into()));
    }
    let mut a = init.to_vec();
    a.sort_by(f64::total_cmp);
    Ok(CoupledPair {
        kind: PairKind::BeesKillRight { mu },
        comparison: Comparison::ShiftedLeq { mu },
        b: a.clone(),
        a,
        time: 0.0,
        events: 0,
        src,
        first_violation: None,
        debug_rows: None,
    })
}

impl CoupledPair {
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn comparison(&self) -> Comparison {
        self.comparison
    }

    /// Sorted positions of the small / kill-right side.
    pub fn positions_a(&self) -> &[f64] {
        &self.a
    }

    /// Sorted positions of the large / bees side, in real coordinates.
    pub fn positions_b(&self) -> Vec<f64> {
        match self.kind {
            PairKind::Monotone => self.b.clone(),
            PairKind::BeesKillRight { mu } => {
                self.b.iter().map(|x| x + mu * self.time).collect()
            }
        }
    }

    pub fn first_violation(&self) -> Option<ViolationReport> {
        self.first_violation
    }

    pub fn enable_debug_dump(&mut self) {
        if self.debug_rows.is_none() {
            self.debug_rows = Some(Vec::new());
        }
    }

    /// Shared diffusion: b rank i gets xi_i, a rank i shares xi_{m+i}
    /// (top-aligned); identical addends keep the comparison exact in
    /// floating point.
    fn diffuse(&mut self, dt: f64) -> Result<()> {
        let np = self.b.len();
        let m = np - self.a.len();
        for i in 0..np {
            let xi = self.src.gaussian_increment(dt, 1.0)?;
            self.b[i] += xi;
            if i >= m {
                self.a[i - m] += xi;
            }
        }
        self.a.sort_by(f64::total_cmp);
        self.b.sort_by(f64::total_cmp);
        Ok(())
    }

    fn run_event_with_gap(&mut self, gap: f64) -> Result<()> {
        let np = self.b.len();
        let n = self.a.len();
        let m = np - n;
        self.time += gap;
        self.diffuse(gap)?;
        let k = self.src.uniform_index(np);
        match self.kind {
            PairKind::Monotone => {
                // large side: victim is the minimum (rank 0)
                if k != 0 {
                    self.b[0] = self.b[k];
                    self.b.sort_by(f64::total_cmp);
                }
                // small side thins: active only when k lands in its window
                if k >= m {
                    let j = k - m;
                    if j != 0 {
                        self.a[0] = self.a[j];
                        self.a.sort_by(f64::total_cmp);
                    }
                }
            }
            PairKind::BeesKillRight { mu } => {
                // kill-right side: victim is the maximum (rank n-1)
                if k != n - 1 {
                    self.a[n - 1] = self.a[k];
                    self.a.sort_by(f64::total_cmp);
                }
                // bees side in recentred coordinates: the victim maximizes
                // |recentred + mu t|, always rank 0 or rank n-1; ties go to
                // the lowest index
                let lo = (self.b[0] + mu * self.time).abs();
                let hi = (self.b[n - 1] + mu * self.time).abs();
                let victim = if lo >= hi { 0 } else { n - 1 };
                if k != victim {
                    self.b[victim] = self.b[k];
                    self.b.sort_by(f64::total_cmp);
                }
            }
        }
        self.events += 1;
        self.check_invariant();
        Ok(())
    }

    /// Advance both systems through one joint clock event.
    pub fn advance_event(&mut self) -> Result<()> {
        let gap = self.src.exponential_gap(self.b.len() as f64)?;
        self.run_event_with_gap(gap)
    }

    /// Advance to exactly `t_end` (clipped final diffusion, no event).
    pub fn advance_until(&mut self, t_end: f64) -> Result<()> {
        while self.time < t_end {
            let gap = self.src.exponential_gap(self.b.len() as f64)?;
            if self.time + gap >= t_end {
                let dt = t_end - self.time;
                if dt > 0.0 {
                    self.diffuse(dt)?;
                }
                self.time = t_end;
                self.check_invariant();
                return Ok(());
            }
            self.run_event_with_gap(gap)?;
        }
        Ok(())
    }

    fn check_invariant(&mut self) {
        let m = self.b.len() - self.a.len();
        for (i, &x) in self.a.iter().enumerate() {
            let y = self.b[m + i];
            if x > y {
                if self.first_violation.is_none() {
                    self.first_violation = Some(ViolationReport {
                        event_index: self.events,
                        rank: i,
                        value_a: x,
                        value_b: y,
                    });
                }
                break;
            }
        }
        if let Some(rows) = self.debug_rows.as_mut() {
            for (i, &x) in self.a.iter().enumerate() {
                let y = self.b[m + i];
                rows.push(DebugRow {
                    event_index: self.events,
                    rank: i,
                    value_a: x,
                    value_b: y,
                    slack: y - x,
                });
            }
        }
    }

    /// Sorted recentred positions of the second side (equals the real
    /// positions for the monotone pairing).
    pub fn positions_b_recentred(&self) -> &[f64] {
        &self.b
    }

    /// Inject a violation for negative-control tests: drop the whole second
    /// side below the first.
    #[doc(hidden)]
    pub fn corrupt_for_test(&mut self) {
        let lo = self.a[0] - 1.0;
        for v in self.b.iter_mut() {
            *v = lo;
        }
        self.check_invariant();
    }
}

/// True iff the declared comparison holds at the current event time; on
/// failure returns the first recorded violation.
pub fn assert_coupling_invariant(pair: &CoupledPair) -> (bool, Option<ViolationReport>) {
    match pair.first_violation {
        None => (true, None),
        v => (false, v),
    }
}
