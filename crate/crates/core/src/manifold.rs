//! Enumeration of the kinematically allowed collision quadruples
//! `{k1+k2-k3-k4 = 0 mod 1, omega_bar = 0}`.
//!
//! The nontrivial contours are parametrized by the difference coordinates
//! `(dk12, dk34)` on a uniform grid; the sum momentum `s12` is solved in
//! closed form per cell. The trivial exchange contour (`k3 = k2`, `k4 = k1`)
//! is enumerated separately on grid nodes. Each sample carries a mollified
//! Jacobian weight and an energy-matching deposition pair, so the discrete
//! collision operator inherits the spin and energy conservation laws.

use crate::dispersion::{reduce_momentum, DispersionModel};
use crate::error::{Error, Result};
use crate::matrix2::bloch;
use crate::wigner::WignerState;
use std::f64::consts::{PI, TAU};

/// Contour label of a manifold sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Branch {
    DiagPlus,
    DiagMinus,
    EllipPlus,
    EllipMinus,
    ExpPlus,
    ExpMinus,
}

impl Branch {
    pub fn is_ellip(self) -> bool {
        matches!(self, Branch::EllipPlus | Branch::EllipMinus)
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::DiagPlus => "diag+",
            Branch::DiagMinus => "diag-",
            Branch::EllipPlus => "ellip+",
            Branch::EllipMinus => "ellip-",
            Branch::ExpPlus => "exp+",
            Branch::ExpMinus => "exp-",
        }
    }
}

/// One quadrature atom on a nontrivial collision contour.
#[derive(Clone, Copy, Debug)]
pub struct ManifoldSample {
    /// `(k1 - k2)/2` on the difference grid.
    pub dk12: f64,
    /// `(k3 - k4)/2` on the difference grid.
    pub dk34: f64,
    /// Solved sum momentum in `[-1, 1)`.
    pub s12: f64,
    pub branch: Branch,
    /// `pi * mollified |d omega_bar / d s12|^-1 * (1/n^2)`.
    pub weight: f64,
    /// The four momenta reduced to `[-1/2, 1/2)`.
    pub k: [f64; 4],
    /// Grid bin receiving the `nu` share of the deposit; bin `+1` gets the rest.
    pub deposit_index: usize,
    pub nu: f64,
}

/// One node pair on a trivial (exchange-type) contour. For the standard
/// models this is `k3 = k2, k4 = k1` where only the trace part of the
/// collision kernel survives; for m-th neighbor models the `1/m`-shifted
/// replicas also carry the quartic part.
#[derive(Clone, Copy, Debug)]
pub struct ExchangeSample {
    pub j1: usize,
    pub j2: usize,
    pub j3: usize,
    pub j4: usize,
    /// `pi * (1/n) * mollified |omega'(k1) - omega'(k2)|^-1`.
    pub weight: f64,
    /// Whether the quartic kernel contributes (false on the plain exchange
    /// contour, where it vanishes identically).
    pub quad_active: bool,
}

/// Counters recorded while building a sample set.
#[derive(Clone, Copy, Debug, Default)]
pub struct ManifoldDiagnostics {
    /// Deposits with `nu` outside `[0, 1]` (affine extrapolation events).
    pub nu_out_of_range: usize,
    /// Cells of the exponential model whose cubic kept != 1 root in [-1, 1].
    pub exp_root_anomalies: usize,
    /// Largest |omega_bar| residual over all emitted samples.
    pub max_omega_bar: f64,
    pub ellip_count: usize,
}

/// Precomputed, state-independent sample set for one `(model, n, epsilon)`.
pub struct ManifoldCache {
    pub model: DispersionModel,
    pub n: usize,
    pub epsilon: f64,
    pub samples: Vec<ManifoldSample>,
    pub exchange: Vec<ExchangeSample>,
    pub diagnostics: ManifoldDiagnostics,
}

/// All real solutions `s12 in [-1, 1)` of `omega_bar_add_eta = 0` for one
/// difference-coordinate cell of the next-nearest neighbor model.
///
/// The gamma_diag branch always has two solutions `+-(1/pi) arccos(arg)`, in
/// the cancellation-free form `arg = r / (1 + sqrt(1 + 2 r^2))`; the
/// gamma_ellip branch exists only for `|r| >= 2`.
pub fn solve_s12_nnn(eta: f64, dk12: f64, dk34: f64) -> Vec<(Branch, f64)> {
    let r = 4.0 * eta * ((TAU * dk12).cos() + (TAU * dk34).cos());
    let mut out = Vec::with_capacity(4);
    let root = (1.0 + 2.0 * r * r).sqrt();
    let s_diag = (r / (1.0 + root)).acos() / PI;
    out.push((Branch::DiagPlus, s_diag));
    out.push((Branch::DiagMinus, -s_diag));
    if r != 0.0 {
        let arg = -(1.0 + root) / (2.0 * r);
        if arg.abs() <= 1.0 {
            push_pm(&mut out, Branch::EllipPlus, Branch::EllipMinus, arg.acos() / PI);
        }
    }
    out
}

/// Solutions of the exponential-model cubic `omega_bar_add_zeta = 0` for one
/// cell, by closed-form (trigonometric/Cardano) evaluation. Real roots with
/// `|cos(pi s12)| <= 1 + 1e-12` are kept (clamped); the returned count of
/// kept roots lets callers flag cells where it differs from one.
pub fn solve_s12_exp(zeta: f64, dk12: f64, dk34: f64) -> (Vec<(Branch, f64)>, usize) {
    let ch = zeta.cosh();
    let a = (TAU * dk12).cos();
    let b = (TAU * dk34).cos();
    // cubic c^3 - p c + q = 0 for c = cos(pi s12); p > 1 always
    let p = 1.0 + ch * ch + a * b;
    let q = ch * (a + b);
    let disc = 4.0 * p * p * p - 27.0 * q * q;
    let mut roots = [0.0f64; 3];
    let n_roots = if disc >= 0.0 {
        let m = 2.0 * (p / 3.0).sqrt();
        let theta = ((-4.0 * q / (m * m * m)).clamp(-1.0, 1.0)).acos() / 3.0;
        for (i, r) in roots.iter_mut().enumerate() {
            *r = m * (theta - TAU * i as f64 / 3.0).cos();
        }
        3
    } else {
        let h = (q * q / 4.0 - p * p * p / 27.0).sqrt();
        roots[0] = (-q / 2.0 + h).cbrt() + (-q / 2.0 - h).cbrt();
        1
    };

    // polish with a few Newton steps: the closed form loses absolute
    // precision on the small root when cosh(zeta) is large
    for c in roots[..n_roots].iter_mut() {
        for _ in 0..3 {
            let f = *c * *c * *c - p * *c + q;
            let df = 3.0 * *c * *c - p;
            if df != 0.0 {
                *c -= f / df;
            }
        }
    }
    let mut kept: Vec<f64> = roots[..n_roots]
        .iter()
        .copied()
        .filter(|c| c.abs() <= 1.0 + 1e-12)
        .map(|c| c.clamp(-1.0, 1.0))
        .collect();
    kept.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let count = kept.len();

    let mut out = Vec::with_capacity(2 * count);
    for c in kept {
        push_pm(&mut out, Branch::ExpPlus, Branch::ExpMinus, c.acos() / PI);
    }
    (out, count)
}

/// Emits the `+-s` pair. The boundary cases `s = 0` and `s = 1` are fold
/// points where the two signs collapse onto one tangential contour point
/// (for gamma_ellip, its |r| = 2 birth point with k3 = k4); the grid hits
/// them exactly only by coincidence and their capped weight is a pure
/// discretization artifact, so they are skipped.
fn push_pm(out: &mut Vec<(Branch, f64)>, plus: Branch, minus: Branch, s: f64) {
    if s != 0.0 && s != 1.0 {
        out.push((plus, s));
        out.push((minus, -s));
    }
}

/// Constant solutions `cos(pi m s12) = 0` of the pure m-th neighbor model
/// (`m = 1` covers the nearest-neighbor chain).
fn cos_zero_family(m: u32) -> Vec<(Branch, f64)> {
    let m = m as i64;
    let mut out = Vec::with_capacity(2 * m as usize);
    for l in 0..m {
        let s = (2 * l + 1) as f64 / (2 * m) as f64;
        out.push((Branch::DiagPlus, s));
        out.push((Branch::DiagMinus, -s));
    }
    out
}

/// Mollified inverse gradient `(g^2 + eps^2)^(-1/2)` with
/// `g = (omega'(k1) + omega'(k2) - omega'(k3) - omega'(k4)) / 2`,
/// the derivative of `omega_bar` along `s12` at fixed differences.
pub fn jacobian_weight(
    model: &DispersionModel,
    k1: f64,
    k2: f64,
    k3: f64,
    k4: f64,
    epsilon: f64,
) -> f64 {
    let g = 0.5
        * (model.omega_prime(k1) + model.omega_prime(k2)
            - model.omega_prime(k3)
            - model.omega_prime(k4));
    1.0 / (g * g + epsilon * epsilon).sqrt()
}

/// Bracketing grid index `j` and energy-matching weight `nu` with
/// `nu omega(k_j) + (1-nu) omega(k_{j+1}) = omega(k_target)`. Falls back to
/// the linear-in-k weight when the bracketing energies are exactly equal.
pub fn deposit_nu(model: &DispersionModel, n: usize, k_target: f64) -> (usize, f64) {
    let kk = k_target - k_target.floor();
    let u = kk * n as f64;
    let mut j = u.floor() as usize;
    if j >= n {
        j = n - 1;
    }
    let j_next = (j + 1) % n;
    let om_t = model.omega(k_target);
    let om_lo = model.omega(reduce_momentum(j as f64 / n as f64));
    let om_hi = model.omega(reduce_momentum(j_next as f64 / n as f64));
    let den = om_lo - om_hi;
    let nu = if den == 0.0 {
        1.0 - (u - j as f64)
    } else {
        (om_t - om_hi) / den
    };
    (j, nu)
}

/// Enumerates the nontrivial-contour samples for every difference-coordinate
/// cell, in lexicographic `(dk12, dk34, branch)` order.
pub fn enumerate_samples(
    model: &DispersionModel,
    n: usize,
    epsilon: f64,
) -> Result<(Vec<ManifoldSample>, ManifoldDiagnostics)> {
    model.validate()?;
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::InvalidGridSize { n });
    }
    if epsilon <= 0.0 || epsilon.is_nan() {
        return Err(Error::InvalidModel(format!(
            "mollification epsilon must be positive, got {epsilon}"
        )));
    }
    let half = (n / 2) as i64;
    let inv_n = 1.0 / n as f64;
    let cell_area = inv_n * inv_n;
    let mut samples = Vec::new();
    let mut diags = ManifoldDiagnostics::default();
    let constant_roots = match model {
        DispersionModel::Nearest => Some(cos_zero_family(1)),
        DispersionModel::MthNeighbor { m } => Some(cos_zero_family(*m)),
        _ => None,
    };
    // grid period of the trivial contours dk34 = +-dk12 + l/m
    let trivial_period = match model {
        DispersionModel::MthNeighbor { m } => {
            let m = *m as usize;
            if !n.is_multiple_of(m) {
                return Err(Error::InvalidModel(format!(
                    "grid size {n} does not resolve the 1/{m} contour shift"
                )));
            }
            (n / m) as i64
        }
        _ => n as i64,
    };

    let mut cell_roots = Vec::new();
    for i12 in -half..half {
        let dk12 = i12 as f64 * inv_n;
        for i34 in -half..half {
            // Cells exactly on a trivial contour (k3 = k1 or k4 = k1 bitwise)
            // belong to the separately enumerated exchange quadrature; the
            // sine-product factor vanishes on them identically in s12, so the
            // s12 roots there are capped-weight artifacts, not contour points.
            if (i34 - i12) % trivial_period == 0 || (i34 + i12) % trivial_period == 0 {
                continue;
            }
            let dk34 = i34 as f64 * inv_n;
            cell_roots.clear();
            match model {
                DispersionModel::NextNearest { eta } => {
                    cell_roots.extend(solve_s12_nnn(*eta, dk12, dk34));
                }
                DispersionModel::Exponential { zeta } => {
                    let (roots, kept) = solve_s12_exp(*zeta, dk12, dk34);
                    if kept != 1 {
                        diags.exp_root_anomalies += 1;
                    }
                    cell_roots.extend(roots);
                }
                _ => cell_roots.extend(constant_roots.as_ref().unwrap().iter().copied()),
            }
            for &(branch, s12) in &cell_roots {
                let k_raw = [
                    0.5 * s12 + dk12,
                    0.5 * s12 - dk12,
                    0.5 * s12 + dk34,
                    0.5 * s12 - dk34,
                ];
                let k = k_raw.map(reduce_momentum);
                let weight = PI
                    * jacobian_weight(model, k[0], k[1], k[2], k[3], epsilon)
                    * cell_area;
                let (deposit_index, nu) = deposit_nu(model, n, k_raw[0]);
                if !(0.0..=1.0).contains(&nu) {
                    diags.nu_out_of_range += 1;
                }
                if branch.is_ellip() {
                    diags.ellip_count += 1;
                }
                let residual = model.omega_bar(k[0], k[1], k[2], k[3]).abs();
                diags.max_omega_bar = diags.max_omega_bar.max(residual);
                samples.push(ManifoldSample {
                    dk12,
                    dk34,
                    s12,
                    branch,
                    weight,
                    k,
                    deposit_index,
                    nu,
                });
            }
        }
    }
    Ok((samples, diags))
}

/// Enumerates the trivial exchange contours on grid nodes. For the standard
/// models this is the single contour `(k1, k2, k2, k1)`; `k3 = k1, k4 = k2`
/// contributes nothing and is not emitted. For the m-th neighbor model the
/// `1/m`-shifted replicas of both trivial families are included (the grid
/// must resolve the shift).
pub fn gamma2_samples(
    model: &DispersionModel,
    n: usize,
    epsilon: f64,
) -> Result<Vec<ExchangeSample>> {
    model.validate()?;
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::InvalidGridSize { n });
    }
    let m = match model {
        DispersionModel::MthNeighbor { m } => *m as usize,
        _ => 1,
    };
    if !n.is_multiple_of(m) {
        return Err(Error::InvalidModel(format!(
            "grid size {n} does not resolve the 1/{m} contour shift"
        )));
    }
    let shift = n / m;
    let inv_n = 1.0 / n as f64;
    let mut out = Vec::with_capacity(m * n * n);
    let omp: Vec<f64> = (0..n)
        .map(|j| model.omega_prime(reduce_momentum(j as f64 * inv_n)))
        .collect();
    for j1 in 0..n {
        for j2 in 0..n {
            let g = omp[j1] - omp[j2];
            let weight = PI * inv_n / (g * g + epsilon * epsilon).sqrt();
            // gamma2 family: (k3, k4) = (k2 + l/m, k1 - l/m)
            for l in 0..m {
                out.push(ExchangeSample {
                    j1,
                    j2,
                    j3: (j2 + l * shift) % n,
                    j4: (j1 + n - l * shift % n) % n,
                    weight,
                    quad_active: l != 0,
                });
            }
            // gamma1 replicas: (k3, k4) = (k1 + l/m, k2 - l/m); the l = 0
            // member is the true gamma1 contour where the kernel vanishes.
            for l in 1..m {
                out.push(ExchangeSample {
                    j1,
                    j2,
                    j3: (j1 + l * shift) % n,
                    j4: (j2 + n - l * shift % n) % n,
                    weight,
                    quad_active: true,
                });
            }
        }
    }
    Ok(out)
}

impl ManifoldCache {
    /// Builds and caches the full sample set for `(model, n, epsilon)`.
    pub fn build(model: &DispersionModel, n: usize, epsilon: f64) -> Result<Self> {
        let (samples, diagnostics) = enumerate_samples(model, n, epsilon)?;
        let exchange = gamma2_samples(model, n, epsilon)?;
        Ok(ManifoldCache {
            model: *model,
            n,
            epsilon,
            samples,
            exchange,
            diagnostics,
        })
    }

    /// Largest violation of `phi(k1) + phi(k2) = phi(k3) + phi(k4)` over the
    /// sample set.
    pub fn check_collision_invariant(&self, phi: impl Fn(f64) -> f64) -> f64 {
        check_collision_invariant(&phi, &self.samples)
    }

    /// Point-cloud export of the manifold geometry; when a state is given,
    /// each record carries the Bloch vector of the collision kernel
    /// `A[W] + A[W]*` at that sample.
    pub fn export(&self, state: Option<&WignerState>) -> Vec<ManifoldRecord> {
        let interp = state.map(|s| s.interpolant());
        self.samples
            .iter()
            .map(|s| {
                let bloch_vec = interp.as_ref().map(|ip| {
                    let w: Vec<_> = s
                        .k
                        .iter()
                        .map(|&k| ip.eval(k).clamp_eigs(0.0, 1.0).0)
                        .collect();
                    let a = crate::collision::a_full(w[0], w[1], w[2], w[3]);
                    let (x, y, z, _) = bloch(a);
                    [x, y, z]
                });
                ManifoldRecord {
                    k1: s.k[0],
                    k3: s.k[2],
                    k4: s.k[3],
                    branch: s.branch,
                    bloch: bloch_vec,
                }
            })
            .collect()
    }
}

/// One row of the manifold export.
#[derive(Clone, Copy, Debug)]
pub struct ManifoldRecord {
    pub k1: f64,
    pub k3: f64,
    pub k4: f64,
    pub branch: Branch,
    pub bloch: Option<[f64; 3]>,
}

/// Largest violation of the collision-invariant functional equation over a
/// sample list.
pub fn check_collision_invariant(phi: &impl Fn(f64) -> f64, samples: &[ManifoldSample]) -> f64 {
    samples
        .iter()
        .map(|s| (phi(s.k[0]) + phi(s.k[1]) - phi(s.k[2]) - phi(s.k[3])).abs())
        .fold(0.0, f64::max)
}
