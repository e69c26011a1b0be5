#![allow(dead_code)]
//! Shared test helpers: an independent full-complex 2x2 oracle and a tiny
//! deterministic RNG.

use hubbard_boltzmann::Herm2;
use num_complex::Complex64;

/// Straightforward complex 2x2 matrix, the brute-force oracle the Hermitian
/// kernels are checked against.
#[derive(Clone, Copy, Debug)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn from_herm(h: Herm2) -> Mat2 {
        Mat2([
            [
                Complex64::new(h.d_uu, 0.0),
                Complex64::new(h.od_re, h.od_im),
            ],
            [
                Complex64::new(h.od_re, -h.od_im),
                Complex64::new(h.d_dd, 0.0),
            ],
        ])
    }

    pub fn mul(a: Mat2, b: Mat2) -> Mat2 {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = a.0[i][0] * b.0[0][j] + a.0[i][1] * b.0[1][j];
            }
        }
        Mat2(out)
    }

    pub fn add(a: Mat2, b: Mat2) -> Mat2 {
        let mut out = a.0;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += b.0[i][j];
            }
        }
        Mat2(out)
    }

    pub fn scale(self, s: Complex64) -> Mat2 {
        let mut out = self.0;
        for row in out.iter_mut() {
            for entry in row.iter_mut() {
                *entry *= s;
            }
        }
        Mat2(out)
    }

    pub fn adjoint(self) -> Mat2 {
        Mat2([
            [self.0[0][0].conj(), self.0[1][0].conj()],
            [self.0[0][1].conj(), self.0[1][1].conj()],
        ])
    }

    pub fn trace(self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Largest componentwise deviation from a Hermitian-packed matrix.
    pub fn diff_herm(self, h: Herm2) -> f64 {
        let hh = Mat2::from_herm(h);
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - hh.0[i][j]).norm());
            }
        }
        worst
    }
}

/// xorshift64* with a fixed seed; good enough for test sampling and
/// reproducible across platforms.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.max(1))
    }

    pub fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [-1/2, 1/2).
    pub fn momentum(&mut self) -> f64 {
        self.next_f64() - 0.5
    }

    pub fn herm(&mut self) -> Herm2 {
        Herm2::new(
            self.next_f64() - 0.5,
            self.next_f64() - 0.5,
            self.next_f64() - 0.5,
            self.next_f64() - 0.5,
        )
    }

    /// Random matrix with eigenvalues in [0, 1] (a valid Wigner value).
    pub fn fermi_herm(&mut self) -> Herm2 {
        let mean = self.next_f64();
        let radius = self.next_f64() * mean.min(1.0 - mean);
        let (x, y) = (self.next_f64() - 0.5, self.next_f64() - 0.5);
        let z = self.next_f64() - 0.5;
        let norm = (x * x + y * y + z * z).sqrt().max(1e-12);
        hubbard_boltzmann::matrix2::from_bloch(
            2.0 * radius * x / norm,
            2.0 * radius * y / norm,
            2.0 * radius * z / norm,
            2.0 * mean,
        )
    }
}
