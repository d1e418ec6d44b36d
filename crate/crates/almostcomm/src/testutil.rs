//! Deterministic random matrices for tests. Not part of the public API
//! surface proper, but exposed so integration tests and the CLI self-test can
//! reuse the same generators.

use crate::linalg::{polar_unitary, ComplexMatrix};
use num_complex::Complex64;

/// SplitMix64 stream; identical output on every platform.
#[derive(Debug, Clone)]
pub struct Splitmix {
    state: u64,
}

impl Splitmix {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u = self.unit().max(1e-300);
        let v = self.unit();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }
}

/// Random Hermitian matrix with entries of order one.
pub fn rand_hermitian(n: usize, rng: &mut Splitmix) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.normal(), rng.normal()));
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-ish random unitary via the polar factor of a Gaussian matrix.
pub fn rand_unitary(n: usize, rng: &mut Splitmix) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.normal(), rng.normal()));
    polar_unitary(&g).expect("gaussian matrix is finite").0
}
