//! Seeded random sampling of vectors, operators, states and group elements.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{c, CMat, CVec, DensityMatrix, HermitianOperator};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal via Box-Muller.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    c(gaussian(rng), gaussian(rng))
}

/// Haar-random unit vector in C^d.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CVec {
    let v = CVec::from_fn(d, |_, _| complex_gaussian(rng));
    let n = v.norm();
    v.unscale(n)
}

/// Uniform unit vector in R^k.
pub fn real_unit_vector<R: Rng + ?Sized>(rng: &mut R, k: usize) -> alloc::vec::Vec<f64> {
    loop {
        let v: alloc::vec::Vec<f64> = (0..k).map(|_| gaussian(rng)).collect();
        let n = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// GUE-distributed Hermitian matrix.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermitianOperator {
    HermitianOperator::hermitian_part(&ginibre(rng, d, d))
}

/// Real symmetric Gaussian matrix.
pub fn real_symmetric<R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermitianOperator {
    let g = DMatrix::from_fn(d, d, |_, _| c(gaussian(rng), 0.0));
    HermitianOperator::hermitian_part(&g)
}

/// Hilbert-Schmidt random mixed state.
pub fn density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
    let g = ginibre(rng, d, d);
    let m = &g * g.adjoint();
    DensityMatrix::from_psd_unnormalized(&m).expect("Ginibre product is positive")
}

pub fn pure_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
    DensityMatrix::pure(&unit_vector(rng, d))
}

/// Haar unitary from the QR decomposition of a Ginibre matrix with phase correction.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let qr = ginibre(rng, d, d).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q.clone();
    for j in 0..d {
        let z = r[(j, j)];
        let ph = if z.norm() > 0.0 { z / z.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            u[(i, j)] = q[(i, j)] * ph;
        }
    }
    u
}

/// Uniform unit quaternion (w, x, y, z).
pub fn unit_quaternion<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    let v = real_unit_vector(rng, 4);
    [v[0], v[1], v[2], v[3]]
}
