//! Stationary states predicted by the conservation laws: thermal Fermi-Dirac
//! fits for the non-integrable models and the non-thermal `(f, a_up, a_dn)`
//! state of the nearest-neighbor chain.

use crate::dispersion::{reduce_momentum, DispersionModel};
use crate::error::{Error, Result};
use crate::matrix2::{eig2, Herm2};
use crate::wigner::WignerState;
use serde::{Deserialize, Serialize};

/// Orthonormal spinor pair; the conserved spin eigenbasis. Each spinor is
/// stored as `[re0, im0, re1, im1]`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpinBasis {
    pub up: [f64; 4],
    pub dn: [f64; 4],
}

impl Default for SpinBasis {
    fn default() -> Self {
        SpinBasis {
            up: [1.0, 0.0, 0.0, 0.0],
            dn: [0.0, 0.0, 1.0, 0.0],
        }
    }
}

impl SpinBasis {
    /// Projector `|s><s|` onto one stored spinor.
    fn projector(s: [f64; 4]) -> Herm2 {
        let [a_re, a_im, b_re, b_im] = s;
        Herm2::new(
            a_re * a_re + a_im * a_im,
            b_re * b_re + b_im * b_im,
            a_re * b_re + a_im * b_im,
            a_im * b_re - a_re * b_im,
        )
    }

    pub fn projector_up(&self) -> Herm2 {
        Self::projector(self.up)
    }

    pub fn projector_dn(&self) -> Herm2 {
        Self::projector(self.dn)
    }

    /// Largest deviation from orthonormality.
    pub fn orthonormality_defect(&self) -> f64 {
        let dot =
            |a: [f64; 4], b: [f64; 4]| (a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3],
                                         a[0] * b[1] - a[1] * b[0] + a[2] * b[3] - a[3] * b[2]);
        let (uu, _) = dot(self.up, self.up);
        let (dd, _) = dot(self.dn, self.dn);
        let (ud_re, ud_im) = dot(self.up, self.dn);
        (uu - 1.0)
            .abs()
            .max((dd - 1.0).abs())
            .max((ud_re * ud_re + ud_im * ud_im).sqrt())
    }
}

/// Parameters of a thermal Fermi-Dirac stationary state.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ThermalParams {
    pub beta: f64,
    pub mu_up: f64,
    pub mu_dn: f64,
    pub basis: SpinBasis,
}

/// Parameters of the non-thermal stationary state of the nearest-neighbor
/// model: an antisymmetric profile `f(k) = -f(1/2 - k)` plus one constant per
/// spin component.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NonThermalParams {
    pub f: Vec<f64>,
    pub a_up: f64,
    pub a_dn: f64,
    pub basis: SpinBasis,
}

fn fd(x: f64) -> f64 {
    1.0 / (x.exp() + 1.0)
}

/// Derivative of `fd` with respect to its argument: `-fd (1 - fd)`.
fn fd_prime(x: f64) -> f64 {
    let f = fd(x);
    -f * (1.0 - f)
}

/// Eigenbasis and eigenvalues (densities) of the conserved spin matrix, with
/// `n_up >= n_dn` and a deterministic phase (first nonzero spinor component
/// real positive). Degenerate spectra fall back to the standard basis.
pub fn spin_eigenbasis(spin: Herm2) -> (SpinBasis, f64, f64) {
    let (lo, hi) = eig2(spin);
    let od = (spin.od_re * spin.od_re + spin.od_im * spin.od_im).sqrt();
    if hi - lo <= 1e-12 || od == 0.0 {
        // diagonal or degenerate: standard basis, ordered by the diagonal
        if spin.d_uu >= spin.d_dd {
            return (SpinBasis::default(), spin.d_uu, spin.d_dd);
        }
        let std = SpinBasis::default();
        return (
            SpinBasis {
                up: std.dn,
                dn: std.up,
            },
            spin.d_dd,
            spin.d_uu,
        );
    }
    // top eigenvector, from whichever of (hi - d_dd, conj(c)) and
    // (c, hi - d_uu) avoids the cancelling difference; phase fixed so the
    // first nonzero component is real positive
    let dev = 0.5 * (spin.d_uu - spin.d_dd);
    let r = hi - 0.5 * (spin.d_uu + spin.d_dd);
    let up = if dev >= 0.0 {
        let p = r + dev;
        let norm = (p * p + od * od).sqrt();
        [p / norm, 0.0, spin.od_re / norm, -spin.od_im / norm]
    } else {
        let q = r - dev;
        let norm = (q * q + od * od).sqrt();
        // (c, q) scaled by conj(c)/|c|
        [
            od / norm,
            0.0,
            q * spin.od_re / (od * norm),
            -q * spin.od_im / (od * norm),
        ]
    };
    // orthogonal complement of (p, q): (|q|, -p q / |q|), already unit
    let q_norm = (up[2] * up[2] + up[3] * up[3]).sqrt();
    let dn = if q_norm == 0.0 {
        [0.0, 0.0, up[0], -up[1]]
    } else {
        [
            q_norm,
            0.0,
            -(up[0] * up[2] + up[1] * up[3]) / q_norm,
            -(up[0] * up[3] - up[1] * up[2]) / q_norm,
        ]
    };
    (SpinBasis { up, dn }, hi, lo)
}

/// Thermal state `W(k) = sum_s FD(beta (omega(k) - mu_s)) |s><s|`.
pub fn thermal_state(
    params: &ThermalParams,
    model: &DispersionModel,
    n: usize,
) -> Result<WignerState> {
    let p_up = params.basis.projector_up();
    let p_dn = params.basis.projector_dn();
    let values = (0..n)
        .map(|j| {
            let om = model.omega(reduce_momentum(j as f64 / n as f64));
            fd(params.beta * (om - params.mu_up)) * p_up
                + fd(params.beta * (om - params.mu_dn)) * p_dn
        })
        .collect();
    WignerState::from_values(values, 0.0)
}

/// Non-thermal state `W(k_j) = sum_s FD(f_j - a_s) |s><s|`.
pub fn nonthermal_state(params: &NonThermalParams) -> Result<WignerState> {
    let p_up = params.basis.projector_up();
    let p_dn = params.basis.projector_dn();
    let values = params
        .f
        .iter()
        .map(|&fj| fd(fj - params.a_up) * p_up + fd(fj - params.a_dn) * p_dn)
        .collect();
    WignerState::from_values(values, 0.0)
}

/// Solves the three conservation-law equations for `(beta, mu_up, mu_dn)` by
/// damped Newton iteration with the analytic Jacobian. The basis of the
/// returned parameters is the standard one; compose with [`spin_eigenbasis`]
/// as needed.
pub fn thermal_fit(
    model: &DispersionModel,
    n_up: f64,
    n_dn: f64,
    energy: f64,
    n: usize,
) -> Result<ThermalParams> {
    if !(0.0..1.0).contains(&n_up) || !(0.0..1.0).contains(&n_dn) || n_up <= 0.0 || n_dn <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "densities ({n_up}, {n_dn}) must lie strictly inside (0, 1)"
        )));
    }
    let omega: Vec<f64> = (0..n)
        .map(|j| model.omega(reduce_momentum(j as f64 / n as f64)))
        .collect();
    let inv_n = 1.0 / n as f64;

    // zero-temperature filling as the chemical-potential initial guess
    let mut sorted = omega.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantile = |frac: f64| {
        let idx = ((frac * n as f64) as usize).min(n - 1);
        sorted[idx]
    };
    // unknowns (beta, beta*mu_up, beta*mu_dn): this parametrization stays
    // regular through beta = 0, where mu alone is meaningless
    let mut x = [1.0, quantile(n_up), quantile(n_dn)];

    let residual_jacobian = |x: &[f64; 3]| {
        let (beta, b_up, b_dn) = (x[0], x[1], x[2]);
        let mut r = [-n_up, -n_dn, -energy];
        let mut jac = [[0.0f64; 3]; 3];
        for &om in &omega {
            let (fu, fd_) = (fd(beta * om - b_up), fd(beta * om - b_dn));
            let (du, dd) = (fd_prime(beta * om - b_up), fd_prime(beta * om - b_dn));
            r[0] += fu * inv_n;
            r[1] += fd_ * inv_n;
            r[2] += om * (fu + fd_) * inv_n;
            jac[0][0] += du * om * inv_n;
            jac[0][1] += -du * inv_n;
            jac[1][0] += dd * om * inv_n;
            jac[1][2] += -dd * inv_n;
            jac[2][0] += om * om * (du + dd) * inv_n;
            jac[2][1] += -om * du * inv_n;
            jac[2][2] += -om * dd * inv_n;
        }
        (r, jac)
    };

    let norm = |r: &[f64; 3]| r.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let (mut r, mut jac) = residual_jacobian(&x);
    for iter in 0..200 {
        if norm(&r) <= 1e-12 {
            let beta = x[0];
            if beta.abs() < 1e-10 {
                return Err(Error::InfiniteTemperature);
            }
            return Ok(ThermalParams {
                beta,
                mu_up: x[1] / beta,
                mu_dn: x[2] / beta,
                basis: SpinBasis::default(),
            });
        }
        let step = solve3(&jac, &r).ok_or(Error::NoConvergence {
            iterations: iter,
            residual: norm(&r),
        })?;
        // damped update: halve until the residual decreases
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = [
                x[0] - lambda * step[0],
                x[1] - lambda * step[1],
                x[2] - lambda * step[2],
            ];
            let (rt, jt) = residual_jacobian(&trial);
            if norm(&rt) < norm(&r) {
                x = trial;
                r = rt;
                jac = jt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence {
                iterations: iter,
                residual: norm(&r),
            });
        }
        if x[0].abs() > 1e4 {
            return Err(Error::EnergyOutOfRange);
        }
    }
    Err(Error::NoConvergence {
        iterations: 200,
        residual: norm(&r),
    })
}

/// Solves the non-thermal stationary problem of the nearest-neighbor model:
/// matches the odd-trace profile of `initial` pairwise by monotone bisection
/// in `f`, and the two spin densities by an outer Newton iteration in
/// `(a_up, a_dn)`.
pub fn nonthermal_fit(initial: &WignerState) -> Result<NonThermalParams> {
    let n = initial.n();
    let d = initial.odd_trace_profile()?;
    for &dj in &d {
        if dj.abs() >= 2.0 {
            return Err(Error::InadmissibleProfile(dj));
        }
    }
    let (basis, n_up, n_dn) = spin_eigenbasis(initial.conserved_spin());

    // h(f) = sum_s [FD(f - a_s) - FD(-f - a_s)] is strictly decreasing with
    // range (-2, 2), so bisection always converges
    let h = |f: f64, a_up: f64, a_dn: f64| {
        fd(f - a_up) + fd(f - a_dn) - fd(-f - a_up) - fd(-f - a_dn)
    };
    let solve_f = |target: f64, a_up: f64, a_dn: f64| -> f64 {
        if target == 0.0 {
            return 0.0;
        }
        let mut lo = -1.0;
        let mut hi = 1.0;
        while h(lo, a_up, a_dn) < target {
            lo *= 2.0;
            if lo < -1e6 {
                break;
            }
        }
        while h(hi, a_up, a_dn) > target {
            hi *= 2.0;
            if hi > 1e6 {
                break;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if h(mid, a_up, a_dn) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    // solve each pair once; mirror partners get the exact negation
    let solve_profile = |a_up: f64, a_dn: f64| -> Vec<f64> {
        let mut f = vec![0.0; n];
        for j in 0..n {
            let jr = (n + n / 2 - j) % n;
            if j <= jr {
                f[j] = solve_f(d[j], a_up, a_dn);
                if j != jr {
                    f[jr] = -f[j];
                }
            }
        }
        f
    };

    let densities = |f: &[f64], a_up: f64, a_dn: f64| {
        let mut g = [0.0f64; 2];
        for &fj in f {
            g[0] += fd(fj - a_up);
            g[1] += fd(fj - a_dn);
        }
        [g[0] / n as f64 - n_up, g[1] / n as f64 - n_dn]
    };

    let mut a = [0.0f64, 0.0];
    let mut f = solve_profile(a[0], a[1]);
    let mut r = densities(&f, a[0], a[1]);
    let norm = |r: &[f64; 2]| r[0].abs().max(r[1].abs());
    for iter in 0..200 {
        if norm(&r) <= 1e-12 {
            return Ok(NonThermalParams {
                f,
                a_up: a[0],
                a_dn: a[1],
                basis,
            });
        }
        // Jacobian dG_s/da_t by chain rule through the inner solve
        let mut jac = [[0.0f64; 2]; 2];
        for &fj in &f {
            let dh_df = fd_prime(fj - a[0]) + fd_prime(fj - a[1])
                + fd_prime(-fj - a[0])
                + fd_prime(-fj - a[1]);
            for (t, &at) in a.iter().enumerate() {
                let dh_da = -fd_prime(fj - at) + fd_prime(-fj - at);
                let df_da = -dh_da / dh_df;
                for s in 0..2 {
                    let delta = if s == t { 1.0 } else { 0.0 };
                    jac[s][t] += fd_prime(fj - a[s]) * (df_da - delta) / n as f64;
                }
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-300 {
            return Err(Error::NoConvergence {
                iterations: iter,
                residual: norm(&r),
            });
        }
        let step = [
            (jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            (jac[0][0] * r[1] - jac[1][0] * r[0]) / det,
        ];
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = [a[0] - lambda * step[0], a[1] - lambda * step[1]];
            let ft = solve_profile(trial[0], trial[1]);
            let rt = densities(&ft, trial[0], trial[1]);
            if norm(&rt) < norm(&r) {
                a = trial;
                f = ft;
                r = rt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence {
                iterations: iter,
                residual: norm(&r),
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: 200,
        residual: norm(&r),
    })
}

/// Solves a 3x3 linear system by Gaussian elimination with partial pivoting.
fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()
        })?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            let (pivot_row, rest) = m.split_at_mut(col + 1);
            let pivot_row = &pivot_row[col];
            for (k, entry) in rest[row - col - 1].iter_mut().enumerate().skip(col) {
                *entry -= factor * pivot_row[k];
            }
        }
    }
    let mut x = [0.0f64; 3];
    for i in (0..3).rev() {
        let mut s = m[i][3];
        for k in i + 1..3 {
            s -= m[i][k] * x[k];
        }
        x[i] = s / m[i][i];
    }
    Some(x)
}
