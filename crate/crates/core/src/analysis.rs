//! Post-processing: entropy production, exponential decay-rate fits,
//! two-timescale detection, and conservation audits.

use crate::collision::collision;
use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::evolve::TrajectoryRecord;
use crate::manifold::ManifoldCache;
use crate::matrix2::{eig2, trace_prod, Herm2};
use crate::wigner::WignerState;
use serde::Serialize;

/// Result of a log-linear decay fit `S_inf - S(t) ~ e^(-kappa t)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayFit {
    pub kappa: f64,
    pub window: (f64, f64),
    /// RMS residual of the straight-line fit in log space.
    pub residual: f64,
    pub s_inf: f64,
    pub used_records: usize,
}

/// Entropy production `sigma = -(1/n) sum_j tr[(ln W_j - ln W~_j) C_j]`,
/// evaluated from a fresh collision output.
pub fn entropy_production(
    state: &WignerState,
    model: &DispersionModel,
    cache: &ManifoldCache,
    epsilon: f64,
) -> Result<f64> {
    let out = collision(state, model, cache, epsilon)?;
    entropy_production_of(state, &out.derivative)
}

/// Entropy production from an already evaluated collision derivative.
/// Requires both eigenvalues strictly inside `(delta, 1 - delta)` with
/// `delta = 1e-8` so the matrix logarithms are finite.
pub fn entropy_production_of(state: &WignerState, derivative: &[Herm2]) -> Result<f64> {
    const DELTA: f64 = 1e-8;
    let mut sigma = 0.0;
    for (w, c) in state.values().iter().zip(derivative) {
        let (lo, hi) = eig2(*w);
        if lo <= DELTA || hi >= 1.0 - DELTA {
            let value = if lo <= DELTA { lo } else { hi };
            return Err(Error::BoundaryEigenvalue { value });
        }
        // ln W - ln W~ shares the eigenvectors of W
        let log_ratio = w.spectral_map(|x| (x / (1.0 - x)).ln());
        sigma -= trace_prod(log_ratio, *c);
    }
    Ok(sigma / state.n() as f64)
}

/// Least-squares fit of `ln(s_inf - S(t))` against `t` over a time window.
/// Records with `s_inf - S <= 1e-12` are outside the log domain and skipped.
pub fn decay_fit(
    records: &[TrajectoryRecord],
    s_inf: f64,
    window: (f64, f64),
) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.t >= window.0 && r.t <= window.1 && s_inf - r.entropy > 1e-12)
        .map(|r| (r.t, (s_inf - r.entropy).ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::TooFewRecords {
            have: pts.len(),
            need: 5,
        });
    }
    let n = pts.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let slope = (n * sty - st * sy) / (n * stt - st * st);
    let intercept = (sy - slope * st) / n;
    let residual = (pts
        .iter()
        .map(|&(t, y)| (y - slope * t - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        kappa: -slope,
        window,
        residual,
        s_inf,
        used_records: pts.len(),
    })
}

/// Decay fits over the first 10% and the last 30% of the records: the
/// initial rate at the starting state and the asymptotic rate.
pub fn timescale_report(
    records: &[TrajectoryRecord],
    s_inf: f64,
) -> Result<(DecayFit, DecayFit)> {
    if records.len() < 10 {
        return Err(Error::TooFewRecords {
            have: records.len(),
            need: 10,
        });
    }
    let t0 = records.first().unwrap().t;
    let t1 = records.last().unwrap().t;
    let span = t1 - t0;
    let initial = decay_fit(records, s_inf, (t0, t0 + 0.1 * span))?;
    let asymptotic = decay_fit(records, s_inf, (t1 - 0.3 * span, t1))?;
    Ok((initial, asymptotic))
}

/// Maximum relative drifts of the conserved quantities along a trajectory.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct DriftReport {
    /// `max_t ||N(t) - N(0)||_HS / ||N(0)||_HS`.
    pub spin: f64,
    /// `max_t |E(t) - E(0)| / max(|E(0)|, 1e-6)`.
    pub energy: f64,
    /// Per-invariant drifts of the three odd-cosine trace functionals.
    pub g_invariants: [f64; 3],
    /// `max_t` of the odd-trace profile maximum minus its initial value.
    pub odd_trace: f64,
}

/// Conservation audit of a record list, relative to the first record.
pub fn conservation_audit(records: &[TrajectoryRecord]) -> DriftReport {
    let Some(first) = records.first() else {
        return DriftReport::default();
    };
    let spin_scale = first.spin.hs_norm().max(1e-6);
    let energy_scale = first.energy.abs().max(1e-6);
    let mut report = DriftReport::default();
    for r in records {
        report.spin = report
            .spin
            .max((r.spin - first.spin).hs_norm() / spin_scale);
        report.energy = report
            .energy
            .max((r.energy - first.energy).abs() / energy_scale);
        for p in 0..3 {
            let scale = first.g_invariants[p].abs().max(1e-6);
            report.g_invariants[p] = report.g_invariants[p]
                .max((r.g_invariants[p] - first.g_invariants[p]).abs() / scale);
        }
        report.odd_trace = report
            .odd_trace
            .max((r.odd_trace_max - first.odd_trace_max).abs());
    }
    report
}
