//! Closed-form kernels for complex Hermitian 2x2 matrices.
//!
//! Everything the collision operator touches is a Hermitian 2x2 matrix, so we
//! store exactly four real numbers per matrix: the two diagonal entries and
//! the complex upper off-diagonal entry. The kernels below (commutator times
//! i, anticommutator, symmetrized triple and quadruple products, trace of a
//! product) map Hermitian inputs to Hermitian outputs by construction; no
//! intermediate ever leaves the Hermitian representation in the public API.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// The Hermitian matrix `[[d_uu, od_re + i od_im], [od_re - i od_im, d_dd]]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Herm2 {
    pub d_uu: f64,
    pub d_dd: f64,
    pub od_re: f64,
    pub od_im: f64,
}

impl Herm2 {
    pub const ZERO: Herm2 = Herm2::new(0.0, 0.0, 0.0, 0.0);
    pub const IDENTITY: Herm2 = Herm2::new(1.0, 1.0, 0.0, 0.0);
    pub const PAULI_X: Herm2 = Herm2::new(0.0, 0.0, 1.0, 0.0);
    pub const PAULI_Y: Herm2 = Herm2::new(0.0, 0.0, 0.0, -1.0);
    pub const PAULI_Z: Herm2 = Herm2::new(1.0, -1.0, 0.0, 0.0);

    pub const fn new(d_uu: f64, d_dd: f64, od_re: f64, od_im: f64) -> Self {
        Herm2 { d_uu, d_dd, od_re, od_im }
    }

    pub const fn diag(d_uu: f64, d_dd: f64) -> Self {
        Herm2::new(d_uu, d_dd, 0.0, 0.0)
    }

    pub fn trace(self) -> f64 {
        self.d_uu + self.d_dd
    }

    /// `1 - W`, the hole counterpart of an occupation matrix.
    pub fn tilde(self) -> Self {
        Herm2::new(1.0 - self.d_uu, 1.0 - self.d_dd, -self.od_re, -self.od_im)
    }

    pub fn is_finite(self) -> bool {
        self.d_uu.is_finite()
            && self.d_dd.is_finite()
            && self.od_re.is_finite()
            && self.od_im.is_finite()
    }

    /// Squared Hilbert-Schmidt norm, summing |entry|^2 over all four entries.
    pub fn hs_norm_sq(self) -> f64 {
        self.d_uu * self.d_uu
            + self.d_dd * self.d_dd
            + 2.0 * (self.od_re * self.od_re + self.od_im * self.od_im)
    }

    pub fn hs_norm(self) -> f64 {
        self.hs_norm_sq().sqrt()
    }

    /// Maximum off-diagonal magnitude |W_ud|.
    pub fn offdiag_norm(self) -> f64 {
        (self.od_re * self.od_re + self.od_im * self.od_im).sqrt()
    }

    /// Applies `f` to both eigenvalues, keeping the eigenvectors.
    pub fn spectral_map(self, f: impl Fn(f64) -> f64) -> Herm2 {
        let mean = 0.5 * (self.d_uu + self.d_dd);
        let dev_z = 0.5 * (self.d_uu - self.d_dd);
        let r2 = dev_z * dev_z + self.od_re * self.od_re + self.od_im * self.od_im;
        let r = r2.sqrt();
        let (lo, hi) = (f(mean - r), f(mean + r));
        if r == 0.0 {
            return Herm2::diag(lo, hi);
        }
        let f_mean = 0.5 * (lo + hi);
        let slope = 0.5 * (hi - lo) / r;
        Herm2::new(
            f_mean + slope * dev_z,
            f_mean - slope * dev_z,
            slope * self.od_re,
            slope * self.od_im,
        )
    }

    /// Clamps both eigenvalues into `[lo, hi]`. Returns the clamped matrix and
    /// whether anything changed.
    pub fn clamp_eigs(self, lo: f64, hi: f64) -> (Herm2, bool) {
        let (e1, e2) = eig2(self);
        if e1 >= lo && e2 <= hi {
            return (self, false);
        }
        (self.spectral_map(|x| x.clamp(lo, hi)), true)
    }
}

impl Add for Herm2 {
    type Output = Herm2;
    fn add(self, o: Herm2) -> Herm2 {
        Herm2::new(
            self.d_uu + o.d_uu,
            self.d_dd + o.d_dd,
            self.od_re + o.od_re,
            self.od_im + o.od_im,
        )
    }
}

impl Sub for Herm2 {
    type Output = Herm2;
    fn sub(self, o: Herm2) -> Herm2 {
        Herm2::new(
            self.d_uu - o.d_uu,
            self.d_dd - o.d_dd,
            self.od_re - o.od_re,
            self.od_im - o.od_im,
        )
    }
}

impl AddAssign for Herm2 {
    fn add_assign(&mut self, o: Herm2) {
        self.d_uu += o.d_uu;
        self.d_dd += o.d_dd;
        self.od_re += o.od_re;
        self.od_im += o.od_im;
    }
}

impl SubAssign for Herm2 {
    fn sub_assign(&mut self, o: Herm2) {
        self.d_uu -= o.d_uu;
        self.d_dd -= o.d_dd;
        self.od_re -= o.od_re;
        self.od_im -= o.od_im;
    }
}

impl Neg for Herm2 {
    type Output = Herm2;
    fn neg(self) -> Herm2 {
        Herm2::new(-self.d_uu, -self.d_dd, -self.od_re, -self.od_im)
    }
}

impl Mul<f64> for Herm2 {
    type Output = Herm2;
    fn mul(self, s: f64) -> Herm2 {
        Herm2::new(self.d_uu * s, self.d_dd * s, self.od_re * s, self.od_im * s)
    }
}

impl Mul<Herm2> for f64 {
    type Output = Herm2;
    fn mul(self, m: Herm2) -> Herm2 {
        m * self
    }
}

/// `i [a, b] = i(ab - ba)`, Hermitian for Hermitian inputs.
///
/// The diagonal entries are exact negatives of each other, so the result is
/// traceless to the last bit.
pub fn comm_i(a: Herm2, b: Herm2) -> Herm2 {
    let z = 2.0 * (a.od_re * b.od_im - a.od_im * b.od_re);
    let da = a.d_uu - a.d_dd;
    let db = b.d_uu - b.d_dd;
    Herm2::new(
        z,
        -z,
        a.od_im * db - b.od_im * da,
        b.od_re * da - a.od_re * db,
    )
}

/// `{a, b} = ab + ba`. The component expressions are symmetric in `a` and
/// `b`, so `anticomm(a, b)` and `anticomm(b, a)` agree bitwise.
pub fn anticomm(a: Herm2, b: Herm2) -> Herm2 {
    let cross = 2.0 * (a.od_re * b.od_re + a.od_im * b.od_im);
    let ta = a.d_uu + a.d_dd;
    let tb = b.d_uu + b.d_dd;
    Herm2::new(
        2.0 * (a.d_uu * b.d_uu) + cross,
        2.0 * (a.d_dd * b.d_dd) + cross,
        a.od_re * tb + b.od_re * ta,
        a.od_im * tb + b.od_im * ta,
    )
}

/// `abc + cba`, Hermitian for Hermitian inputs since `(abc)* = cba`.
pub fn triple_sym(a: Herm2, b: Herm2, c: Herm2) -> Herm2 {
    C2::mul(C2::mul(a.into(), b.into()), c.into()).plus_adjoint()
}

/// `abcd + dcba`, Hermitian for Hermitian inputs since `(abcd)* = dcba`.
pub fn quad_sym(a: Herm2, b: Herm2, c: Herm2, d: Herm2) -> Herm2 {
    C2::mul(C2::mul(a.into(), b.into()), C2::mul(c.into(), d.into())).plus_adjoint()
}

/// `tr(ab)`, real for Hermitian inputs.
pub fn trace_prod(a: Herm2, b: Herm2) -> f64 {
    a.d_uu * b.d_uu + a.d_dd * b.d_dd + 2.0 * (a.od_re * b.od_re + a.od_im * b.od_im)
}

/// Both eigenvalues in ascending order, via mean +- sqrt(mean^2 - det) in the
/// cancellation-free form.
pub fn eig2(a: Herm2) -> (f64, f64) {
    let mean = 0.5 * (a.d_uu + a.d_dd);
    let dev = 0.5 * (a.d_uu - a.d_dd);
    let r = (dev * dev + a.od_re * a.od_re + a.od_im * a.od_im).sqrt();
    (mean - r, mean + r)
}

/// Bloch decomposition `(x, y, z, t)` with `a = (t I + x sx + y sy + z sz)/2`.
pub fn bloch(a: Herm2) -> (f64, f64, f64, f64) {
    (
        2.0 * a.od_re,
        -2.0 * a.od_im,
        a.d_uu - a.d_dd,
        a.d_uu + a.d_dd,
    )
}

/// Inverse of [`bloch`].
pub fn from_bloch(x: f64, y: f64, z: f64, t: f64) -> Herm2 {
    Herm2::new(0.5 * (t + z), 0.5 * (t - z), 0.5 * x, -0.5 * y)
}

/// General complex 2x2 matrix, used only inside the symmetrized product
/// kernels; it never escapes this module.
#[derive(Clone, Copy)]
struct C2 {
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    c_re: f64,
    c_im: f64,
    d_re: f64,
    d_im: f64,
}

impl From<Herm2> for C2 {
    fn from(m: Herm2) -> C2 {
        C2 {
            a_re: m.d_uu,
            a_im: 0.0,
            b_re: m.od_re,
            b_im: m.od_im,
            c_re: m.od_re,
            c_im: -m.od_im,
            d_re: m.d_dd,
            d_im: 0.0,
        }
    }
}

impl C2 {
    fn mul(p: C2, q: C2) -> C2 {
        C2 {
            a_re: p.a_re * q.a_re - p.a_im * q.a_im + p.b_re * q.c_re - p.b_im * q.c_im,
            a_im: p.a_re * q.a_im + p.a_im * q.a_re + p.b_re * q.c_im + p.b_im * q.c_re,
            b_re: p.a_re * q.b_re - p.a_im * q.b_im + p.b_re * q.d_re - p.b_im * q.d_im,
            b_im: p.a_re * q.b_im + p.a_im * q.b_re + p.b_re * q.d_im + p.b_im * q.d_re,
            c_re: p.c_re * q.a_re - p.c_im * q.a_im + p.d_re * q.c_re - p.d_im * q.c_im,
            c_im: p.c_re * q.a_im + p.c_im * q.a_re + p.d_re * q.c_im + p.d_im * q.c_re,
            d_re: p.c_re * q.b_re - p.c_im * q.b_im + p.d_re * q.d_re - p.d_im * q.d_im,
            d_im: p.c_re * q.b_im + p.c_im * q.b_re + p.d_re * q.d_im + p.d_im * q.d_re,
        }
    }

    /// `M + M*`, exactly Hermitian.
    fn plus_adjoint(self) -> Herm2 {
        Herm2::new(
            2.0 * self.a_re,
            2.0 * self.d_re,
            self.b_re + self.c_re,
            self.b_im - self.c_im,
        )
    }
}
