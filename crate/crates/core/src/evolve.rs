//! Explicit-midpoint time integration of the Boltzmann equation and the
//! simulation main loop.

use crate::collision::{collision, dissipative_diag, CollisionOutput};
use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::manifold::ManifoldCache;
use crate::matrix2::Herm2;
use crate::wigner::{WignerState, FERMI_TOL};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Simulation parameters. Defaults follow the production setup: `n = 128`,
/// `epsilon = 1/50`, `dt = 0.01`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: DispersionModel,
    pub n: usize,
    pub epsilon: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Emit one observable record every this many steps.
    pub observable_stride: usize,
    /// Emit one snapshot every this many steps (0 disables).
    pub snapshot_stride: usize,
    /// Evolve with the scalar diagonal collision operator only.
    pub reduced_mode: bool,
}

impl RunConfig {
    pub fn new(model: DispersionModel, n: usize) -> Self {
        RunConfig {
            model,
            n,
            epsilon: 0.02,
            dt: 0.01,
            t_end: 1.0,
            observable_stride: 10,
            snapshot_stride: 1000,
            reduced_mode: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.n < 8 || !self.n.is_multiple_of(4) {
            return Err(Error::InvalidConfig(format!(
                "grid size {} must be a multiple of 4 and at least 8",
                self.n
            )));
        }
        if self.dt.is_nan() || self.dt <= 0.0 || self.dt > 0.1 {
            return Err(Error::InvalidConfig(format!(
                "dt = {} outside (0, 0.1]",
                self.dt
            )));
        }
        if self.epsilon <= 0.0 || self.epsilon.is_nan() {
            return Err(Error::InvalidConfig(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        if !self.t_end.is_finite() || self.t_end < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} must be finite and non-negative",
                self.t_end
            )));
        }
        if self.observable_stride == 0 {
            return Err(Error::InvalidConfig(
                "observable_stride must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Builds the state-independent sample cache for this configuration.
    pub fn build_cache(&self) -> Result<ManifoldCache> {
        ManifoldCache::build(&self.model, self.n, self.epsilon)
    }

    fn eval(&self, state: &WignerState, cache: &ManifoldCache) -> Result<CollisionOutput> {
        if self.reduced_mode {
            dissipative_diag(state, &self.model, cache)
        } else {
            collision(state, &self.model, cache, self.epsilon)
        }
    }
}

/// One observable record of a trajectory.
#[derive(Clone, Copy, Debug)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub entropy: f64,
    /// Entropy production at this time; NaN when a boundary eigenvalue made
    /// the matrix logarithm undefined.
    pub sigma: f64,
    pub energy: f64,
    pub spin: Herm2,
    pub odd_trace_max: f64,
    pub hs_dist0: f64,
    /// `int g_p(k) tr W dk` for `g_p = cos(2 pi (2p+1) k)`, `p = 0, 1, 2`;
    /// conserved by the nearest-neighbor model.
    pub g_invariants: [f64; 3],
}

/// A completed run: the records plus the final state.
pub struct RunResult {
    pub records: Vec<TrajectoryRecord>,
    pub final_state: WignerState,
}

/// One explicit-midpoint step `W(t + dt) = W(t) + dt C[W(t) + dt/2 C[W(t)]]`.
///
/// The midpoint rule keeps every linear functional that the collision
/// operator conserves, so spin and energy drift only at rounding level. The
/// Fermi property is verified on the accepted state.
pub fn step_midpoint(
    state: &WignerState,
    cfg: &RunConfig,
    cache: &ManifoldCache,
) -> Result<WignerState> {
    let c1 = cfg.eval(state, cache)?;
    step_midpoint_with(state, cfg, cache, &c1)
}

/// Midpoint step reusing an already evaluated `C[W(t)]`.
fn step_midpoint_with(
    state: &WignerState,
    cfg: &RunConfig,
    cache: &ManifoldCache,
    c1: &CollisionOutput,
) -> Result<WignerState> {
    let dt = cfg.dt;
    let half = state.map_values(|j, w| w + (0.5 * dt) * c1.derivative[j]);
    let c2 = cfg.eval(&half, cache)?;
    let next = state.map_values(|j, w| w + dt * c2.derivative[j]);
    if !next.values().iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    next.check_fermi(FERMI_TOL)?;
    Ok(next.with_time(state.time() + dt))
}

fn record(
    state: &WignerState,
    cfg: &RunConfig,
    initial: &WignerState,
    derivative: &CollisionOutput,
) -> Result<TrajectoryRecord> {
    let sigma = crate::analysis::entropy_production_of(state, &derivative.derivative)
        .unwrap_or(f64::NAN);
    let odd_trace_max = state
        .odd_trace_profile()?
        .iter()
        .fold(0.0_f64, |m, d| m.max(d.abs()));
    let g_invariants = [0, 1, 2].map(|p| {
        state.trace_functional(|k| (TAU * (2.0 * f64::from(p) + 1.0) * k).cos())
    });
    Ok(TrajectoryRecord {
        t: state.time(),
        entropy: state.entropy()?,
        sigma,
        energy: state.conserved_energy(&cfg.model),
        spin: state.conserved_spin(),
        odd_trace_max,
        hs_dist0: state.hs_distance(initial)?,
        g_invariants,
    })
}

/// Runs the configured number of midpoint steps, emitting observable records
/// every `observable_stride` steps (plus the initial and final states) and
/// passing intermediate snapshots to `on_snapshot`.
pub fn run(
    cfg: &RunConfig,
    initial: WignerState,
    mut on_snapshot: impl FnMut(usize, &WignerState) -> Result<()>,
) -> Result<RunResult> {
    cfg.validate()?;
    if initial.n() != cfg.n {
        return Err(Error::GridMismatch {
            left: initial.n(),
            right: cfg.n,
        });
    }
    let cache = cfg.build_cache()?;
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let mut records = Vec::with_capacity(steps / cfg.observable_stride + 2);
    let mut state = initial.clone();

    for step in 0..steps {
        let c1 = cfg.eval(&state, &cache)?;
        if step % cfg.observable_stride == 0 {
            records.push(record(&state, cfg, &initial, &c1)?);
        }
        if cfg.snapshot_stride > 0 && step > 0 && step % cfg.snapshot_stride == 0 {
            on_snapshot(step, &state)?;
        }
        state = step_midpoint_with(&state, cfg, &cache, &c1)?;
    }
    let c_final = cfg.eval(&state, &cache)?;
    records.push(record(&state, cfg, &initial, &c_final)?);

    Ok(RunResult {
        records,
        final_state: state,
    })
}
