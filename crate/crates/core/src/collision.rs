//! The collision operator: dissipative part over the cached manifold samples
//! and the conservative Vlasov part built from the mollified effective
//! Hamiltonian.

use crate::dispersion::{reduce_momentum, DispersionModel};
use crate::error::{Error, Result};
use crate::manifold::ManifoldCache;
use crate::matrix2::{anticomm, comm_i, quad_sym, trace_prod, Herm2};
use crate::wigner::{WignerState, FERMI_TOL};
use rayon::prelude::*;

/// Samples per parallel work unit. Fixed so the reduction order, and with it
/// the floating-point result, does not depend on the thread count.
const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, Default)]
pub struct CollisionDiagnostics {
    /// Interpolated values whose eigenvalues had to be clamped into [0, 1].
    pub clamp_events: usize,
    /// Deposits with `nu` outside [0, 1], copied from the sample cache.
    pub nu_out_of_range: usize,
    /// Largest |omega_bar| residual over the sample set.
    pub max_omega_bar: f64,
}

/// `dW/dt` per grid point plus evaluation counters.
#[derive(Clone, Debug)]
pub struct CollisionOutput {
    pub derivative: Vec<Herm2>,
    pub diagnostics: CollisionDiagnostics,
}

impl CollisionOutput {
    fn zero(n: usize) -> Self {
        CollisionOutput {
            derivative: vec![Herm2::ZERO; n],
            diagnostics: CollisionDiagnostics::default(),
        }
    }

    pub fn max_hs_norm(&self) -> f64 {
        self.derivative
            .iter()
            .map(|m| m.hs_norm())
            .fold(0.0, f64::max)
    }

    fn add(mut self, other: &CollisionOutput) -> Self {
        for (a, b) in self.derivative.iter_mut().zip(&other.derivative) {
            *a += *b;
        }
        self.diagnostics.clamp_events += other.diagnostics.clamp_events;
        self.diagnostics.nu_out_of_range += other.diagnostics.nu_out_of_range;
        self.diagnostics.max_omega_bar = self
            .diagnostics
            .max_omega_bar
            .max(other.diagnostics.max_omega_bar);
        self
    }
}

/// Quartic part of `A[W] + A[W]*`: two Hermitian-conjugate pairs of
/// four-matrix products.
pub fn a_quad(w1: Herm2, w2: Herm2, w3: Herm2, w4: Herm2) -> Herm2 {
    quad_sym(w1, w3.tilde(), w2, w4.tilde()) - quad_sym(w1.tilde(), w3, w2.tilde(), w4)
}

/// Trace-coupled part of `A[W] + A[W]*`: anticommutators weighted by real
/// traces.
pub fn a_tr(w1: Herm2, w2: Herm2, w3: Herm2, w4: Herm2) -> Herm2 {
    anticomm(w1.tilde(), w3) * trace_prod(w2.tilde(), w4)
        - anticomm(w1, w3.tilde()) * trace_prod(w2, w4.tilde())
}

/// `A[W] + A[W]* = A_quad + A_tr`.
pub fn a_full(w1: Herm2, w2: Herm2, w3: Herm2, w4: Herm2) -> Herm2 {
    a_quad(w1, w2, w3, w4) + a_tr(w1, w2, w3, w4)
}

/// Dissipative collision operator over the cached manifold samples.
///
/// Every nontrivial-contour sample deposits `nu` and `1 - nu` shares of its
/// kernel value into the two bins bracketing `k1`; the `n/2` factor converts
/// the per-cell weight into a bin density on the half-period sum-momentum
/// parametrization. Exchange-contour samples live on grid nodes and deposit
/// directly.
pub fn dissipative(
    state: &WignerState,
    model: &DispersionModel,
    cache: &ManifoldCache,
) -> Result<CollisionOutput> {
    check_state(state, model, cache)?;
    state.check_fermi(FERMI_TOL)?;
    let n = state.n();
    let interp = state.interpolant();
    let density_scale = n as f64 / 2.0;

    let mut partials: Vec<(Vec<Herm2>, usize)> = Vec::new();
    cache
        .samples
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![Herm2::ZERO; n];
            let mut clamps = 0usize;
            for s in chunk {
                let mut w = [Herm2::ZERO; 4];
                for (wi, &k) in w.iter_mut().zip(&s.k) {
                    let (v, clamped) = interp.eval(k).clamp_eigs(0.0, 1.0);
                    *wi = v;
                    clamps += usize::from(clamped);
                }
                let a = a_full(w[0], w[1], w[2], w[3]);
                let scale = s.weight * density_scale;
                acc[s.deposit_index] += (s.nu * scale) * a;
                acc[(s.deposit_index + 1) % n] += ((1.0 - s.nu) * scale) * a;
            }
            (acc, clamps)
        })
        .collect_into_vec(&mut partials);

    let mut out = CollisionOutput::zero(n);
    for (acc, clamps) in &partials {
        for (d, a) in out.derivative.iter_mut().zip(acc) {
            *d += *a;
        }
        out.diagnostics.clamp_events += clamps;
    }

    let values = state.values();
    for x in &cache.exchange {
        let (w1, w2, w3, w4) = (values[x.j1], values[x.j2], values[x.j3], values[x.j4]);
        let a = if x.quad_active {
            a_full(w1, w2, w3, w4)
        } else {
            a_tr(w1, w2, w3, w4)
        };
        out.derivative[x.j1] += x.weight * a;
    }

    out.diagnostics.nu_out_of_range = cache.diagnostics.nu_out_of_range;
    out.diagnostics.max_omega_bar = cache.diagnostics.max_omega_bar;
    Ok(out)
}

/// Effective Hamiltonian at grid index `j1`, as a double grid sum with the
/// mollified principal value; the fourth momentum `k4 = k1 + k2 - k3` lands
/// exactly on the grid. The result is symmetrized to `(H + H*)/2`.
pub fn heff(state: &WignerState, model: &DispersionModel, epsilon: f64, j1: usize) -> Herm2 {
    HeffContext::new(state, model, epsilon).at(j1)
}

/// All grid points of the effective Hamiltonian, in parallel.
pub fn heff_all(state: &WignerState, model: &DispersionModel, epsilon: f64) -> Vec<Herm2> {
    let pre = HeffContext::new(state, model, epsilon);
    let n = state.n();
    let mut rows: Vec<Herm2> = Vec::new();
    (0..n)
        .into_par_iter()
        .map(|j1| pre.at(j1))
        .collect_into_vec(&mut rows);
    rows
}

/// Largest Hilbert-Schmidt norm of the anti-Hermitian part of the plain
/// (unsymmetrized) effective-Hamiltonian sum. The k3 <-> k4 interchange
/// cancels it analytically; this measures the roundoff remainder.
pub fn heff_anti_residual(state: &WignerState, model: &DispersionModel, epsilon: f64) -> f64 {
    let pre = HeffContext::new(state, model, epsilon);
    let n = state.n();
    let measure = 1.0 / (n * n) as f64;
    (0..n)
        .map(|j1| {
            let mut anti = Herm2::ZERO;
            for j2 in 0..n {
                let om12 = pre.omega[j1] + pre.omega[j2];
                let mut j4 = (j1 + j2) % n;
                for j3 in 0..n {
                    let ob = om12 - pre.omega[j3] - pre.omega[j4];
                    let pw = ob / (ob * ob + pre.eps2);
                    // anti-Hermitian half of W3 W4 is -(i/2) (i [W3, W4])
                    anti += pw * comm_i(pre.values[j3], pre.values[j4]);
                    j4 = if j4 == 0 { n - 1 } else { j4 - 1 };
                }
            }
            0.5 * anti.hs_norm() * measure
        })
        .fold(0.0, f64::max)
}

struct HeffContext<'a> {
    values: &'a [Herm2],
    omega: Vec<f64>,
    trace: Vec<f64>,
    eps2: f64,
    n: usize,
}

impl<'a> HeffContext<'a> {
    fn new(state: &'a WignerState, model: &DispersionModel, epsilon: f64) -> Self {
        let n = state.n();
        let omega = (0..n).map(|j| model.omega(state.k_at(j))).collect();
        let trace = state.values().iter().map(|v| v.trace()).collect();
        HeffContext {
            values: state.values(),
            omega,
            trace,
            eps2: epsilon * epsilon,
            n,
        }
    }

    /// Hermitian part of the integrand, with the inner sum folded over the
    /// k3 <-> k4 interchange and the W2-linear terms pulled out of the loop
    /// by bilinearity.
    fn at(&self, j1: usize) -> Herm2 {
        let n = self.n;
        let mut total = Herm2::ZERO;
        for j2 in 0..n {
            let w2 = self.values[j2];
            let tr2 = self.trace[j2];
            let om12 = self.omega[j1] + self.omega[j2];
            let j12 = (j1 + j2) % n;
            // sums over j3 of pw * {W3,W4}/2, pw * W3, pw * tr4 * W3, pw
            let mut sym = Herm2::ZERO;
            let mut s1 = Herm2::ZERO;
            let mut s2 = Herm2::ZERO;
            let mut s0 = 0.0;
            let mut j4 = j12;
            for j3 in 0..n {
                if j3 <= j4 {
                    let w3 = self.values[j3];
                    let w4 = self.values[j4];
                    let ob = om12 - self.omega[j3] - self.omega[j4];
                    let pw = ob / (ob * ob + self.eps2);
                    if j3 < j4 {
                        sym += pw * anticomm(w3, w4);
                        s1 += pw * (w3 + w4);
                        s2 += pw * (self.trace[j4] * w3 + self.trace[j3] * w4);
                        s0 += 2.0 * pw;
                    } else {
                        sym += (0.5 * pw) * anticomm(w3, w3);
                        s1 += pw * w3;
                        s2 += (pw * self.trace[j3]) * w3;
                        s0 += pw;
                    }
                }
                j4 = if j4 == 0 { n - 1 } else { j4 - 1 };
            }
            total += sym + tr2 * s1 - s2 + s0 * w2 - anticomm(w2, s1);
        }
        total * (1.0 / (n * n) as f64)
    }
}

/// Conservative Vlasov term `-i [H_eff, W]`, traceless at every grid point
/// by construction of the commutator kernel.
pub fn conservative(
    state: &WignerState,
    model: &DispersionModel,
    epsilon: f64,
) -> CollisionOutput {
    let h = heff_all(state, model, epsilon);
    let derivative = state
        .values()
        .iter()
        .zip(&h)
        .map(|(w, h)| comm_i(*w, *h))
        .collect();
    CollisionOutput {
        derivative,
        diagnostics: CollisionDiagnostics::default(),
    }
}

/// Full collision operator `C = C_c + C_d`.
pub fn collision(
    state: &WignerState,
    model: &DispersionModel,
    cache: &ManifoldCache,
    epsilon: f64,
) -> Result<CollisionOutput> {
    let d = dissipative(state, model, cache)?;
    let c = conservative(state, model, epsilon);
    Ok(d.add(&c))
}

/// Scalar collision operator for diagonal states: the up component scatters
/// against the down component over the same sample set and deposition
/// scheme. Off-diagonals of the output are identically zero.
pub fn dissipative_diag(
    state: &WignerState,
    model: &DispersionModel,
    cache: &ManifoldCache,
) -> Result<CollisionOutput> {
    check_state(state, model, cache)?;
    state.check_fermi(FERMI_TOL)?;
    let offdiag = state
        .values()
        .iter()
        .map(|v| v.offdiag_norm())
        .fold(0.0, f64::max);
    if offdiag > 1e-12 {
        return Err(Error::NotDiagonal(offdiag));
    }
    let n = state.n();
    let interp = state.interpolant();
    let density_scale = n as f64 / 2.0;

    let mut partials: Vec<Vec<Herm2>> = Vec::new();
    cache
        .samples
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![Herm2::ZERO; n];
            for s in chunk {
                let mut u = [0.0; 4];
                let mut d = [0.0; 4];
                for i in 0..4 {
                    let v = interp.eval(s.k[i]);
                    u[i] = v.d_uu.clamp(0.0, 1.0);
                    d[i] = v.d_dd.clamp(0.0, 1.0);
                }
                let a = diag_kernel(&u, &d);
                let scale = s.weight * density_scale;
                acc[s.deposit_index] += (s.nu * scale) * a;
                acc[(s.deposit_index + 1) % n] += ((1.0 - s.nu) * scale) * a;
            }
            acc
        })
        .collect_into_vec(&mut partials);

    let mut out = CollisionOutput::zero(n);
    for acc in &partials {
        for (dst, a) in out.derivative.iter_mut().zip(acc) {
            *dst += *a;
        }
    }

    let values = state.values();
    for x in &cache.exchange {
        let u = [
            values[x.j1].d_uu,
            values[x.j2].d_uu,
            values[x.j3].d_uu,
            values[x.j4].d_uu,
        ];
        let d = [
            values[x.j1].d_dd,
            values[x.j2].d_dd,
            values[x.j3].d_dd,
            values[x.j4].d_dd,
        ];
        out.derivative[x.j1] += x.weight * diag_kernel(&u, &d);
    }
    out.diagnostics.nu_out_of_range = cache.diagnostics.nu_out_of_range;
    out.diagnostics.max_omega_bar = cache.diagnostics.max_omega_bar;
    Ok(out)
}

/// Gain/loss kernel of the reduced diagonal dynamics: the up component at
/// momenta 1, 3 scatters against the down component at 2, 4, and vice versa.
fn diag_kernel(u: &[f64; 4], d: &[f64; 4]) -> Herm2 {
    let p_up = (1.0 - u[0]) * (1.0 - d[1]) * u[2] * d[3] - u[0] * d[1] * (1.0 - u[2]) * (1.0 - d[3]);
    let p_dn = (1.0 - d[0]) * (1.0 - u[1]) * d[2] * u[3] - d[0] * u[1] * (1.0 - d[2]) * (1.0 - u[3]);
    Herm2::diag(p_up, p_dn)
}

fn check_state(state: &WignerState, model: &DispersionModel, cache: &ManifoldCache) -> Result<()> {
    if state.n() != cache.n {
        return Err(Error::GridMismatch {
            left: state.n(),
            right: cache.n,
        });
    }
    if *model != cache.model {
        return Err(Error::InvalidConfig(
            "sample cache was built for a different dispersion model".into(),
        ));
    }
    Ok(())
}

/// Conserved-quantity residuals of a collision output: the spin matrix
/// integral and the energy integral, which the scheme preserves by
/// construction.
pub fn conservation_residuals(
    output: &CollisionOutput,
    model: &DispersionModel,
) -> (Herm2, f64) {
    let n = output.derivative.len();
    let mut spin = Herm2::ZERO;
    let mut energy = 0.0;
    for (j, d) in output.derivative.iter().enumerate() {
        spin += *d;
        energy += model.omega(reduce_momentum(j as f64 / n as f64)) * d.trace();
    }
    (spin * (1.0 / n as f64), energy / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn psd(seed: &mut u64) -> Herm2 {
        let mut next = || {
            *seed ^= *seed << 13;
            *seed ^= *seed >> 7;
            *seed ^= *seed << 17;
            (*seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = Herm2::new(next(), next(), next(), next());
        // a^2 is positive semidefinite
        anticomm(a, a) * 0.5
    }

    #[test]
    fn a_quad_trivial_cases() {
        let w = Herm2::new(0.4, 0.7, 0.1, -0.2);
        assert!(a_quad(w, w, w, w).hs_norm() <= 1e-15);
        // scalar reduction: w_i = c_i I
        let c = [0.3, 0.8, 0.5, 0.9];
        let scalars = c.map(|x| Herm2::IDENTITY * x);
        let got = a_quad(scalars[0], scalars[1], scalars[2], scalars[3]);
        let expect = 2.0
            * (c[0] * (1.0 - c[2]) * c[1] * (1.0 - c[3])
                - (1.0 - c[0]) * c[2] * (1.0 - c[1]) * c[3]);
        assert!((got - Herm2::IDENTITY * expect).hs_norm() <= 1e-15);
    }

    #[test]
    fn a_tr_trivial_cases() {
        let w = Herm2::new(0.4, 0.7, 0.1, -0.2);
        assert!(a_tr(w, w, w, w).hs_norm() <= 1e-15);
        let w2 = Herm2::new(0.2, 0.9, -0.3, 0.05);
        // trivial collision k3 = k1, k4 = k2
        assert!(a_tr(w, w2, w, w2).hs_norm() <= 1e-14);
    }

    #[test]
    fn kernels_vanish_on_exchange_contours() {
        let mut seed = 42;
        for _ in 0..100 {
            let (w1, w2) = (psd(&mut seed), psd(&mut seed));
            // gamma2: (1, 2, 2, 1) kills the quartic part
            assert!(a_quad(w1, w2, w2, w1).hs_norm() <= 1e-14);
            // gamma1: (1, 2, 1, 2) kills the trace part
            assert!(a_tr(w1, w2, w1, w2).hs_norm() <= 1e-14);
        }
    }

    #[test]
    fn gain_positivity_inequality() {
        // A tr[BC] + C tr[BA] - ABC - CBA >= 0 for PSD triples
        let mut seed = 0xfeed;
        for _ in 0..10_000 {
            let (a, b, c) = (psd(&mut seed), psd(&mut seed), psd(&mut seed));
            let m = a * trace_prod(b, c) + c * trace_prod(b, a)
                - crate::matrix2::triple_sym(a, b, c);
            let (lo, _) = crate::matrix2::eig2(m);
            assert!(lo >= -1e-12, "min eigenvalue {lo}");
        }
    }
}
