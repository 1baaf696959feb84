// bdsim-core — event-driven Monte Carlo toolkit for Brunet-Derrida
// branching-selection particle systems (N-BBM, Brownian Bees, L-BBM)
// with drift.
//
// Module overview:
// - `rng`:        Counter-based splittable random source (Philox2x64-10) and
//                 the exact sampling primitives every other module builds on.
// - `bridge`:     Brownian-bridge barrier laws: exact crossing coin, first
//                 crossing time by bisection, extremum sampling.
// - `system`:     The particle system itself: rate-N duplication clock,
//                 score-based victim removal, ordering conventions,
//                 genealogy, path observers, barrier hitting.
// - `coupling`:   Shared-randomness couplings with per-event invariant
//                 assertion (population monotonicity, kill-right domination).
// - `bbm`:        Free branching Brownian motion, many-to-one checks,
//                 running-radius tail profiles.
// - `estimators`: Replicated Monte Carlo estimators: speeds, hitting times,
//                 escape velocity, renewal chains, recurrence diagnostics.
// - `stats`:      Shared statistical utilities (normal CDF/quantile, KS,
//                 least squares, summary accumulators).
//
// Everything is deterministic given a master seed: randomness flows only
// through explicitly passed `RandomSource` values.

pub mod bbm;
pub mod bridge;
pub mod coupling;
pub mod error;
pub mod estimators;
pub mod rng;
pub mod stats;
pub mod system;

pub use error::{Error, Result};
pub use rng::RandomSource;
