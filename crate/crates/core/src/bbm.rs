//! Free (selection-less) branching Brownian motion.
//!
//! Each particle diffuses independently and duplicates in place at rate 1,
//! so the population grows like e^t and runs need a safety cap. Running
//! sups over continuous time are recovered from exact bridge extrema per
//! inter-branch segment, never by sub-stepping.

use crate::bridge;
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::stats::Summary;

pub const DEFAULT_POPULATION_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy)]
pub struct BbmParticle {
    pub label: u64,
    pub position: f64,
    /// Running sup of |position| along the ancestral path (tracked runs).
    pub path_sup_abs: f64,
    pub born: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BranchRecord {
    pub time: f64,
    pub parent: u64,
    pub child: u64,
}

/// A forest snapshot: particles alive at `time` plus the branch history.
#[derive(Debug, Clone)]
pub struct BbmForest {
    pub time: f64,
    pub alive: Vec<BbmParticle>,
    pub branches: Vec<BranchRecord>,
    pub cap: usize,
}

impl BbmForest {
    pub fn population(&self) -> usize {
        self.alive.len()
    }

    /// Running sup of |x| over every particle path up to `time`.
    /// Valid only for forests simulated with sup tracking.
    pub fn radius(&self) -> f64 {
        self.alive.iter().fold(0.0_f64, |m, p| m.max(p.path_sup_abs))
    }

    /// Newick text of the branch history, leaf labels `L<label>`, branch
    /// lengths in time units.
    pub fn newick(&self) -> String {
        let mut children: std::collections::BTreeMap<u64, Vec<(f64, u64)>> =
            std::collections::BTreeMap::new();
        for b in &self.branches {
            children.entry(b.parent).or_default().push((b.time, b.child));
        }
        let mut out = String::new();
        self.write_node(&children, 0, 0.0, &mut out);
        out.push(';');
        out
    }

    fn write_node(
        &self,
        children: &std::collections::BTreeMap<u64, Vec<(f64, u64)>>,
        label: u64,
        from: f64,
        out: &mut String,
    ) {
        let next = children
            .get(&label)
            .and_then(|v| v.iter().find(|(t, _)| *t > from))
            .copied();
        match next {
            None => {
                out.push_str(&format!("L{}:{}", label, self.time - from));
            }
            Some((t, child)) => {
                out.push('(');
                self.write_node(children, label, t, out);
                out.push(',');
                self.write_node(children, child, t, out);
                out.push_str(&format!("):{}", t - from));
            }
        }
    }
}

/// Simulate a forest from a single particle at the origin up to `t_end`.
pub fn simulate_bbm(t_end: f64, src: &mut RandomSource, cap: usize) -> Result<BbmForest> {
    simulate_bbm_tracked(t_end, src, cap, false)
}

/// Same, optionally maintaining each particle's ancestral running sup |x|
/// by exact bridge extrema (two extra draws per particle per segment).
pub fn simulate_bbm_tracked(
    t_end: f64,
    src: &mut RandomSource,
    cap: usize,
    track_sup: bool,
) -> Result<BbmForest> {
    if !(t_end >= 0.0) {
        return Err(Error::ParameterDomain(format!("t_end must be >= 0, got {t_end}")));
    }
    if cap == 0 {
        return Err(Error::Configuration("population cap must be >= 1".into()));
    }
    let mut forest = BbmForest {
        time: 0.0,
        alive: vec![BbmParticle { label: 0, position: 0.0, path_sup_abs: 0.0, born: 0.0 }],
        branches: Vec::new(),
        cap,
    };
    let mut next_label = 1u64;
    loop {
        let n = forest.alive.len();
        let remaining = t_end - forest.time;
        if remaining <= 0.0 {
            break;
        }
        let gap = src.exponential_gap(n as f64)?;
        let dt = gap.min(remaining);
        if dt > 0.0 {
            for p in forest.alive.iter_mut() {
                let w = src.gaussian_increment(dt, 1.0)?;
                let end = p.position + w;
                if track_sup {
                    let s = bridge::sample_bridge_sup_abs(p.position, end, dt, 1.0, src);
                    if s > p.path_sup_abs {
                        p.path_sup_abs = s;
                    }
                }
                p.position = end;
            }
            forest.time += dt;
        }
        if gap >= remaining {
            break;
        }
        // branch: replace one particle by two at the same location
        if n + 1 > cap {
            return Err(Error::ResourceCap(format!(
                "population {} would exceed cap {cap} at t = {}",
                n + 1,
                forest.time
            )));
        }
        let k = src.uniform_index(n);
        let parent = forest.alive[k];
        let child = BbmParticle {
            label: next_label,
            position: parent.position,
            path_sup_abs: parent.path_sup_abs,
            born: forest.time,
        };
        forest.branches.push(BranchRecord {
            time: forest.time,
            parent: parent.label,
            child: next_label,
        });
        next_label += 1;
        forest.alive.push(child);
    }
    Ok(forest)
}

/// Path functionals with built-in closed-form or series oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathFunctional {
    ConstantOne,
    TerminalExceeds(f64),
    SupAbsExceeds(f64),
}

impl PathFunctional {
    fn needs_sup(&self) -> bool {
        matches!(self, PathFunctional::SupAbsExceeds(_))
    }

    fn eval(&self, terminal: f64, sup_abs: f64) -> f64 {
        match self {
            PathFunctional::ConstantOne => 1.0,
            PathFunctional::TerminalExceeds(x) => {
                if terminal > *x {
                    1.0
                } else {
                    0.0
                }
            }
            PathFunctional::SupAbsExceeds(x) => {
                if sup_abs >= *x {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl std::str::FromStr for PathFunctional {
    type Err = Error;

    fn from_str(s: &str) -> Result<PathFunctional> {
        if s == "constant-one" {
            return Ok(PathFunctional::ConstantOne);
        }
        for (prefix, make) in [
            ("terminal-exceeds:", PathFunctional::TerminalExceeds as fn(f64) -> PathFunctional),
            ("sup-exceeds:", PathFunctional::SupAbsExceeds as fn(f64) -> PathFunctional),
        ] {
            if let Some(rest) = s.strip_prefix(prefix) {
                let x: f64 = rest.parse().map_err(|_| {
                    Error::Configuration(format!("bad functional threshold {rest:?}"))
                })?;
                return Ok(make(x));
            }
        }
        Err(Error::Configuration(format!(
            "unknown functional {s:?} (expected constant-one, terminal-exceeds:x, sup-exceeds:x)"
        )))
    }
}

/// Result of one many-to-one comparison: the branching sum vs e^t times a
/// single-path expectation.
#[derive(Debug, Clone, Copy)]
pub struct ManyToOneCheck {
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    pub z_score: f64,
}

pub fn many_to_one_check(
    functional: PathFunctional,
    t: f64,
    reps: usize,
    src: RandomSource,
) -> Result<ManyToOneCheck> {
    if !(t > 0.0) {
        return Err(Error::ParameterDomain(format!("t must be > 0, got {t}")));
    }
    if reps < 100 {
        return Err(Error::Configuration("need at least 100 replicates".into()));
    }
    let track = functional.needs_sup();
    let mut sums = Vec::with_capacity(reps);
    for r in 0..reps {
        let mut sub = src.substream(r as u64);
        let forest = simulate_bbm_tracked(t, &mut sub, DEFAULT_POPULATION_CAP, track)?;
        let total: f64 =
            forest.alive.iter().map(|p| functional.eval(p.position, p.path_sup_abs)).sum();
        sums.push(total);
    }
    let lhs = Summary::from_slice(&sums);

    let scale = t.exp();
    let mut singles = Vec::with_capacity(reps);
    for r in 0..reps {
        let mut sub = src.substream((reps + r) as u64);
        let end = sub.gaussian_increment(t, 1.0)?;
        let sup = if track {
            bridge::sample_bridge_sup_abs(0.0, end, t, 1.0, &mut sub)
        } else {
            0.0
        };
        singles.push(functional.eval(end, sup));
    }
    let rhs = Summary::from_slice(&singles);

    let se = (lhs.se * lhs.se + scale * scale * rhs.se * rhs.se).sqrt();
    let z = if se > 0.0 { (lhs.mean - scale * rhs.mean) / se } else { 0.0 };
    Ok(ManyToOneCheck {
        lhs: lhs.mean,
        lhs_se: lhs.se,
        rhs: scale * rhs.mean,
        rhs_se: scale * rhs.se,
        z_score: z,
    })
}

/// Horizon law for radius profiles: deterministic or Exp(lambda),
/// sampled independently of the forest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HorizonLaw {
    Fixed(f64),
    Exponential(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct RadiusTailRow {
    pub x: f64,
    pub tail: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone)]
pub struct RadiusTailTable {
    pub rows: Vec<RadiusTailRow>,
    pub reps: usize,
    /// Replicates whose population hit the cap; counted as radius infinity,
    /// which can only inflate the tails.
    pub overflow: usize,
}

pub fn radius_tail_profile(
    horizon: HorizonLaw,
    xs: &[f64],
    reps: usize,
    src: RandomSource,
    cap: usize,
) -> Result<RadiusTailTable> {
    if xs.is_empty() || xs.windows(2).any(|w| w[0] >= w[1]) || xs[0] <= 0.0 {
        return Err(Error::Configuration("xs must be increasing and positive".into()));
    }
    match horizon {
        HorizonLaw::Fixed(t) if !(t >= 0.0) => {
            return Err(Error::ParameterDomain(format!("fixed horizon must be >= 0, got {t}")))
        }
        HorizonLaw::Exponential(l) if !(l > 0.0) => {
            return Err(Error::ParameterDomain(format!("horizon rate must be > 0, got {l}")))
        }
        _ => {}
    }
    if reps == 0 {
        return Err(Error::Configuration("need at least one replicate".into()));
    }
    let mut radii = Vec::with_capacity(reps);
    let mut overflow = 0usize;
    for r in 0..reps {
        let mut sub = src.substream(r as u64);
        let t = match horizon {
            HorizonLaw::Fixed(t) => t,
            HorizonLaw::Exponential(l) => sub.exponential_gap(l)?,
        };
        match simulate_bbm_tracked(t, &mut sub, cap, true) {
            Ok(forest) => radii.push(forest.radius()),
            Err(Error::ResourceCap(_)) => {
                overflow += 1;
                radii.push(f64::INFINITY);
            }
            Err(e) => return Err(e),
        }
    }
    if overflow * 2 > reps {
        return Err(Error::ResourceCap(format!(
            "{overflow}/{reps} replicates exceeded the population cap {cap}; \
             the tail profile is not estimable at this horizon"
        )));
    }
    let rows = xs
        .iter()
        .map(|&x| {
            let hits = radii.iter().filter(|&&r| r >= x).count();
            let p = hits as f64 / reps as f64;
            RadiusTailRow { x, tail: p, stderr: (p * (1.0 - p) / reps as f64).sqrt() }
        })
        .collect();
    Ok(RadiusTailTable { rows, reps, overflow })
}
