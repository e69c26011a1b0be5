//! Discretized Wigner state on the uniform Brillouin-zone grid.

use crate::dispersion::{reduce_momentum, DispersionModel};
use crate::error::{Error, Result};
use crate::matrix2::{eig2, Herm2};
use std::f64::consts::{PI, TAU};

/// Tolerance for the Fermi property `0 <= W <= 1`.
pub const FERMI_TOL: f64 = 1e-9;

/// Uniform periodic grid of `n` Hermitian 2x2 matrices. Entry `j` holds
/// `W(k_j)` at `k_j = j/n` reduced to `[-1/2, 1/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerState {
    n: usize,
    time: f64,
    values: Vec<Herm2>,
}

impl WignerState {
    /// Builds a state from grid values, checking grid size and finiteness.
    pub fn from_values(values: Vec<Herm2>, time: f64) -> Result<Self> {
        let n = values.len();
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGridSize { n });
        }
        if !values.iter().all(|v| v.is_finite()) || !time.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(WignerState { n, time, values })
    }

    /// The initial condition used for all simulation campaigns, evaluated
    /// from its analytic componentwise formula.
    pub fn initial_state(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGridSize { n });
        }
        let values = (0..n)
            .map(|j| initial_value(reduce_momentum(j as f64 / n as f64)))
            .collect();
        WignerState::from_values(values, 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[Herm2] {
        &self.values
    }

    pub fn value(&self, j: usize) -> Herm2 {
        self.values[j]
    }

    /// Momentum representative of grid index `j` in `[-1/2, 1/2)`.
    pub fn k_at(&self, j: usize) -> f64 {
        reduce_momentum(j as f64 / self.n as f64)
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// Checks `0 <= W <= 1` within `tol` at every grid point.
    pub fn check_fermi(&self, tol: f64) -> Result<()> {
        for (j, v) in self.values.iter().enumerate() {
            let (lo, hi) = eig2(*v);
            if lo < -tol || hi > 1.0 + tol {
                let value = if lo < -tol { lo } else { hi };
                return Err(Error::FermiViolation {
                    index: j,
                    value,
                    tol,
                });
            }
        }
        Ok(())
    }

    /// Conserved spin matrix `int dk W(k)` by the periodic rectangle rule.
    pub fn conserved_spin(&self) -> Herm2 {
        let mut s = Herm2::ZERO;
        for v in &self.values {
            s += *v;
        }
        s * (1.0 / self.n as f64)
    }

    /// Conserved energy `int dk omega(k) tr W(k)`.
    pub fn conserved_energy(&self, model: &DispersionModel) -> f64 {
        let mut s = 0.0;
        for (j, v) in self.values.iter().enumerate() {
            s += model.omega(self.k_at(j)) * v.trace();
        }
        s / self.n as f64
    }

    /// `g`-weighted trace integral `int dk g(k) tr W(k)`.
    pub fn trace_functional(&self, g: impl Fn(f64) -> f64) -> f64 {
        let mut s = 0.0;
        for (j, v) in self.values.iter().enumerate() {
            s += g(self.k_at(j)) * v.trace();
        }
        s / self.n as f64
    }

    /// `d(k_j) = tr W(k_j) - tr W(1/2 - k_j)`; requires `n` divisible by 4 so
    /// the pairing maps the grid onto itself.
    pub fn odd_trace_profile(&self) -> Result<Vec<f64>> {
        if !self.n.is_multiple_of(4) {
            return Err(Error::GridNotDivisibleBy4 { n: self.n });
        }
        Ok((0..self.n)
            .map(|j| {
                let jr = (self.n + self.n / 2 - j) % self.n;
                self.values[j].trace() - self.values[jr].trace()
            })
            .collect())
    }

    /// Fermi-gas entropy; eigenvalues are clamped to `[0, 1]` after checking
    /// they are within [`FERMI_TOL`] of that interval.
    pub fn entropy(&self) -> Result<f64> {
        let mut s = 0.0;
        for (j, v) in self.values.iter().enumerate() {
            let (e1, e2) = eig2(*v);
            for e in [e1, e2] {
                if !(-FERMI_TOL..=1.0 + FERMI_TOL).contains(&e) {
                    return Err(Error::FermiViolation {
                        index: j,
                        value: e,
                        tol: FERMI_TOL,
                    });
                }
                let x = e.clamp(0.0, 1.0);
                s -= xlnx(x) + xlnx(1.0 - x);
            }
        }
        Ok(s / self.n as f64)
    }

    /// Measure-weighted Hilbert-Schmidt distance between two states.
    pub fn hs_distance(&self, other: &WignerState) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let mut s = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            s += (*a - *b).hs_norm_sq();
        }
        Ok((s / self.n as f64).sqrt())
    }

    /// Componentwise cubic interpolation through the 4 nearest periodic
    /// nodes; bit-exact at the nodes themselves.
    pub fn interpolate(&self, k: f64) -> Herm2 {
        let (cell, x) = locate(k, self.n);
        if x == 1.0 {
            return self.values[cell];
        }
        let f = self.stencil(cell);
        eval_newton(&f, x)
    }

    /// Precomputes divided differences for every grid cell, for repeated
    /// interpolation against the same state.
    pub fn interpolant(&self) -> Interpolant {
        let coeffs = (0..self.n)
            .map(|cell| {
                let f = self.stencil(cell);
                let mut c = [0.0; 16];
                for comp in 0..4 {
                    let d = newton_coeffs([f[0][comp], f[1][comp], f[2][comp], f[3][comp]]);
                    c[4 * comp..4 * comp + 4].copy_from_slice(&d);
                }
                c
            })
            .collect();
        Interpolant {
            n: self.n,
            coeffs,
            nodes: self.values.clone(),
        }
    }

    fn stencil(&self, cell: usize) -> [[f64; 4]; 4] {
        let n = self.n;
        let idx = [(cell + n - 1) % n, cell, (cell + 1) % n, (cell + 2) % n];
        idx.map(|j| {
            let v = self.values[j];
            [v.d_uu, v.d_dd, v.od_re, v.od_im]
        })
    }

    pub(crate) fn map_values(&self, f: impl Fn(usize, Herm2) -> Herm2) -> WignerState {
        WignerState {
            n: self.n,
            time: self.time,
            values: (0..self.n).map(|j| f(j, self.values[j])).collect(),
        }
    }
}

/// Divided differences of the order-3 stencil, stored per grid cell.
pub struct Interpolant {
    n: usize,
    coeffs: Vec<[f64; 16]>,
    nodes: Vec<Herm2>,
}

impl Interpolant {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eval(&self, k: f64) -> Herm2 {
        let (cell, x) = locate(k, self.n);
        if x == 1.0 {
            return self.nodes[cell];
        }
        let c = &self.coeffs[cell];
        let horner = |o: usize| c[o] + x * (c[o + 1] + (x - 1.0) * (c[o + 2] + (x - 2.0) * c[o + 3]));
        Herm2::new(horner(0), horner(4), horner(8), horner(12))
    }
}

/// Maps `k` to its grid cell and the scaled coordinate `x in [1, 2)` of the
/// Newton stencil with nodes at 0, 1, 2, 3.
fn locate(k: f64, n: usize) -> (usize, f64) {
    let kk = k - k.floor();
    let u = kk * n as f64;
    let mut cell = u.floor() as usize;
    if cell >= n {
        cell = n - 1;
    }
    (cell, u - cell as f64 + 1.0)
}

fn newton_coeffs(f: [f64; 4]) -> [f64; 4] {
    [
        f[0],
        f[1] - f[0],
        (f[2] - 2.0 * f[1] + f[0]) / 2.0,
        (f[3] - 3.0 * f[2] + 3.0 * f[1] - f[0]) / 6.0,
    ]
}

fn eval_newton(f: &[[f64; 4]; 4], x: f64) -> Herm2 {
    let mut out = [0.0; 4];
    for (comp, o) in out.iter_mut().enumerate() {
        let c = newton_coeffs([f[0][comp], f[1][comp], f[2][comp], f[3][comp]]);
        *o = c[0] + x * (c[1] + (x - 1.0) * (c[2] + (x - 2.0) * c[3]));
    }
    Herm2::new(out[0], out[1], out[2], out[3])
}

fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Analytic initial Wigner matrix at momentum `k`.
fn initial_value(k: f64) -> Herm2 {
    let c2 = (TAU * k).cos();
    let c4 = (2.0 * TAU * k).cos();
    let c6 = (3.0 * TAU * k).cos();
    let zeta: f64 = 0.4;
    let (sh_z, ch_z) = (zeta.sinh(), zeta.cosh());
    let cos_mix = (PI * (6.0 * k + 1.0 / 7.0)).cos();
    let cos_shift = (6.0 * PI * (k - 1.0 / 7.0)).cos();

    let fd_uu = 1.0 / ((0.5 * sh_z / (c2 - ch_z) + 0.5).exp() + 1.0);
    let poly_uu = (18.0 * cos_mix - 14.0 * cos_shift
        + 27.0 / (1.0_f64.cosh() - c4)
            * ((-0.6_f64).exp() * c2 + c4 - zeta.exp() * c6 - (-1.0_f64).exp()))
        / 432.0;

    let fd_dd = 1.0 / ((0.5 * sh_z / (c2 - ch_z) + 1.1).exp() + 1.0);
    let poly_dd = (14.0 * cos_shift - 18.0 * cos_mix
        + 27.0 / (1.5_f64.cosh() - c4)
            * ((-1.1_f64).exp() * c2 + c4 - zeta.exp() * c6 - (-1.5_f64).exp()))
        / 432.0;

    // sin(exp(8 i pi k)) via sin(x + iy) = sin x cosh y + i cos x sinh y
    let phi = 4.0 * TAU * k;
    let (x, y) = (phi.cos(), phi.sin());
    let sin_re = x.sin() * y.cosh();
    let sin_im = x.cos() * y.sinh();
    let double_sin = (PI * (3.0 * k + 1.0 / 14.0)).sin() * (3.0 * PI * (k - 1.0 / 7.0)).sin();

    Herm2::new(
        fd_uu + poly_uu,
        fd_dd + poly_dd,
        (9.0 * sin_re - cos_shift + 6.0 * double_sin) / 54.0,
        (9.0 * sin_im - cos_shift - 6.0 * double_sin) / 54.0,
    )
}
