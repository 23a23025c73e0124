//! Complex quantities in the synchronous dq frame.
//!
//! A balanced three-phase signal rotating at the nominal frequency appears as a
//! constant pair `(d, q)` in this frame. We treat the pair as the complex number
//! `d + i q`; multiplication by `i` rotates the vector, which is where the
//! `(+w0, -w0)` off-diagonal pattern in all the subsystem matrices comes from.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A dq-frame quantity stored as its real axis components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DqValue {
    pub d: f64,
    pub q: f64,
}

impl DqValue {
    pub const ZERO: DqValue = DqValue { d: 0.0, q: 0.0 };

    pub fn new(d: f64, q: f64) -> Self {
        Self { d, q }
    }

    pub fn norm(&self) -> f64 {
        self.d.hypot(self.q)
    }

    pub fn is_finite(&self) -> bool {
        self.d.is_finite() && self.q.is_finite()
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.d, self.q)
    }

    pub fn from_complex(c: Complex64) -> Self {
        Self { d: c.re, q: c.im }
    }
}

impl std::ops::Add for DqValue {
    type Output = DqValue;
    fn add(self, rhs: DqValue) -> DqValue {
        DqValue::new(self.d + rhs.d, self.q + rhs.q)
    }
}

impl std::ops::Sub for DqValue {
    type Output = DqValue;
    fn sub(self, rhs: DqValue) -> DqValue {
        DqValue::new(self.d - rhs.d, self.q - rhs.q)
    }
}

/// Real 2x2 image of a complex scalar.
///
/// `real_block(c) * [x.d, x.q]^T` equals the dq vector of `c * x` for any
/// dq quantity `x`, i.e. this is the ring homomorphism
/// `a + b i  ->  [[a, -b], [b, a]]`.
pub fn real_block(c: Complex64) -> Matrix2<f64> {
    Matrix2::new(c.re, -c.im, c.im, c.re)
}

/// `real_block` as a dynamically sized matrix, convenient for LMI assembly.
pub fn real_block_dyn(c: Complex64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[c.re, -c.im, c.im, c.re])
}

/// Multiply a dq value by a complex scalar through the real 2x2 expansion.
pub fn rotate(c: Complex64, x: DqValue) -> DqValue {
    DqValue::from_complex(c * x.to_complex())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn real_block_identity() {
        let m = real_block(Complex64::new(1.0, 0.0));
        assert_eq!(m, Matrix2::identity());
    }

    #[test]
    fn real_block_rotation_pattern() {
        // -i*w0 produces the (+w0, -w0) off-diagonal pattern.
        let m = real_block(Complex64::new(0.0, -100.0));
        assert_eq!(m, Matrix2::new(0.0, 100.0, -100.0, 0.0));
    }

    #[test]
    fn real_block_is_ring_homomorphism_on_fixed_pair() {
        let c1 = Complex64::new(1.0, 2.0);
        let c2 = Complex64::new(3.0, -1.0);
        let prod = real_block(c1 * c2);
        let sep = real_block(c1) * real_block(c2);
        assert!((prod - sep).norm() < 1e-14);
        let sum = real_block(c1 + c2);
        assert!((sum - (real_block(c1) + real_block(c2))).norm() < 1e-14);
    }

    #[test]
    fn real_block_is_ring_homomorphism_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0dc1);
        for _ in 0..200 {
            let c1 = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let c2 = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let prod = real_block(c1 * c2);
            let sep = real_block(c1) * real_block(c2);
            assert!((prod - sep).norm() < 1e-12 * (1.0 + prod.norm()));
            let sum = real_block(c1 + c2);
            assert!((sum - (real_block(c1) + real_block(c2))).norm() < 1e-12);
        }
    }

    #[test]
    fn rotate_matches_real_block_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0dc2);
        for _ in 0..100 {
            let c = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let x = DqValue::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let via_complex = rotate(c, x);
            let m = real_block(c);
            let vd = m[(0, 0)] * x.d + m[(0, 1)] * x.q;
            let vq = m[(1, 0)] * x.d + m[(1, 1)] * x.q;
            assert!((via_complex.d - vd).abs() < 1e-13);
            assert!((via_complex.q - vq).abs() < 1e-13);
        }
    }
}
