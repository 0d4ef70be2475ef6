//! Discrete Wigner functions on odd square-free dimensions.
//!
//! Phase-space labels are mixed-radix integers over the prime factors, factor 0
//! most significant; x and q each run over 0..d. Group addition is
//! componentwise modulo each prime.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, choi_state, trace_product, CMat, DensityMatrix, HermitianOperator, KrausChannel};
use crate::nnls::nnls;

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..n).take_while(|k| k * k <= n).all(|k| n % k != 0)
}

/// Clock-and-shift system with its phase-point operators.
#[derive(Debug, Clone)]
pub struct WignerSystem {
    primes: Vec<usize>,
    d: usize,
    /// A_{x,q} stored at index x·d + q.
    phase_points: Vec<HermitianOperator>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerTable {
    pub primes: Vec<usize>,
    /// values[x·d + q]
    pub values: Vec<f64>,
}

impl WignerTable {
    pub fn dim(&self) -> usize {
        self.primes.iter().product()
    }

    pub fn get(&self, x: usize, q: usize) -> f64 {
        self.values[x * self.dim() + q]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// (Σ_q W(x,q))_x and (Σ_x W(x,q))_q.
    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mx = (0..d).map(|x| (0..d).map(|q| self.get(x, q)).sum()).collect();
        let mq = (0..d).map(|q| (0..d).map(|x| self.get(x, q)).sum()).collect();
        (mx, mq)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn single_displacement(p: usize, x: usize, q: usize) -> CMat {
    let kappa = core::f64::consts::PI / p as f64;
    // (−κ)^{xq} = e^{iπ xq (1 + 1/p)}, reduced mod 2π
    let e = ((x * q) % (2 * p)) as f64;
    let phase = c(libm::cos(e * (kappa + core::f64::consts::PI)), libm::sin(e * (kappa + core::f64::consts::PI)));
    let omega = 2.0 * core::f64::consts::PI / p as f64;
    let mut m = CMat::zeros(p, p);
    for n in 0..p {
        // X^x Z^q |n⟩ = ω^{qn} |n + x⟩
        let t = omega * ((q * n) % p) as f64;
        m[((n + x) % p, n)] = phase * c(libm::cos(t), libm::sin(t));
    }
    m
}

impl WignerSystem {
    /// `primes`: distinct odd primes; the Hilbert space dimension is their product.
    pub fn new(primes: &[usize]) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::Invalid("no prime factors".into()));
        }
        for (i, &p) in primes.iter().enumerate() {
            if p % 2 == 0 {
                return Err(Error::Invalid(format!(
                    "factor {p}: even dimensions are not supported, the construction needs odd primes"
                )));
            }
            if !is_prime(p) {
                return Err(Error::Invalid(format!("{p} is not prime")));
            }
            if primes[..i].contains(&p) {
                return Err(Error::Invalid(format!("repeated factor {p}: only square-free dimensions are supported")));
            }
        }
        let d: usize = primes.iter().product();
        let mut sys = Self { primes: primes.to_vec(), d, phase_points: Vec::new() };
        let mut sum = CMat::zeros(d, d);
        for x in 0..d {
            for q in 0..d {
                sum += sys.displacement(x, q);
            }
        }
        let a0 = sum.unscale(d as f64);
        let mut pts = Vec::with_capacity(d * d);
        for x in 0..d {
            for q in 0..d {
                let dxq = sys.displacement(x, q);
                pts.push(HermitianOperator::hermitian_part(&(&dxq * &a0 * dxq.adjoint())));
            }
        }
        sys.phase_points = pts;
        Ok(sys)
    }

    /// Factorizes an odd square-free d.
    pub fn for_dimension(d: usize) -> Result<Self> {
        if d < 3 || d % 2 == 0 {
            return Err(Error::Invalid(format!(
                "dimension {d}: even dimensions are not supported, the construction needs odd primes"
            )));
        }
        let mut primes = Vec::new();
        let mut n = d;
        let mut k = 3;
        while n > 1 {
            if n % k == 0 {
                if primes.last() == Some(&k) {
                    return Err(Error::Invalid(format!("dimension {d} is not square-free")));
                }
                primes.push(k);
                n /= k;
            } else {
                k += 2;
            }
        }
        Self::new(&primes)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn primes(&self) -> &[usize] {
        &self.primes
    }

    /// Mixed-radix digits of a label.
    pub fn digits(&self, mut a: usize) -> Vec<usize> {
        let mut out = vec![0; self.primes.len()];
        for i in (0..self.primes.len()).rev() {
            out[i] = a % self.primes[i];
            a /= self.primes[i];
        }
        out
    }

    pub fn from_digits(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.primes).fold(0, |acc, (&g, &p)| acc * p + g % p)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (da, db) = (self.digits(a), self.digits(b));
        let s: Vec<usize> = da.iter().zip(&db).map(|(x, y)| x + y).collect();
        self.from_digits(&s)
    }

    pub fn neg(&self, a: usize) -> usize {
        let da = self.digits(a);
        let s: Vec<usize> = da.iter().zip(&self.primes).map(|(x, p)| (p - x) % p).collect();
        self.from_digits(&s)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// D_{x,q} = ⊗_i (−κ_i)^{x_i q_i} X^{x_i} Z^{q_i}.
    pub fn displacement(&self, x: usize, q: usize) -> CMat {
        let (dx, dq) = (self.digits(x % self.d), self.digits(q % self.d));
        let mut out = CMat::identity(1, 1);
        for (i, &p) in self.primes.iter().enumerate() {
            out = out.kronecker(&single_displacement(p, dx[i], dq[i]));
        }
        out
    }

    pub fn phase_point(&self, x: usize, q: usize) -> &HermitianOperator {
        &self.phase_points[x * self.d + q]
    }

    /// W(x,q) = Tr ρA_{x,q} / d
    pub fn wigner_of(&self, rho: &DensityMatrix) -> Result<WignerTable> {
        if rho.dim() != self.d {
            return Err(Error::Dimension(format!("state of size {} on a {}-level system", rho.dim(), self.d)));
        }
        Ok(self.wigner_of_matrix(rho.op().matrix()))
    }

    fn wigner_of_matrix(&self, m: &CMat) -> WignerTable {
        let values = self.phase_points.iter().map(|a| trace_product(m, a.matrix()).re / self.d as f64).collect();
        WignerTable { primes: self.primes.clone(), values }
    }

    /// ρ = Σ W(x,q) A_{x,q}; fails if the result is not a state.
    pub fn state_of(&self, w: &WignerTable) -> Result<DensityMatrix> {
        if w.primes != self.primes {
            return Err(Error::Dimension("table belongs to another system".into()));
        }
        let mut m = CMat::zeros(self.d, self.d);
        for (a, &v) in self.phase_points.iter().zip(&w.values) {
            m += a.matrix().scale(v);
        }
        DensityMatrix::with_trace_tolerance(HermitianOperator::new(m)?, 1e-9)
    }

    /// T[(x,q), (x',q')] = Tr Φ (A_{x',−q'} ⊗ A_{x,q}), so that W_{ε(ρ)} = T W_ρ.
    pub fn channel_transition(&self, ch: &KrausChannel) -> Result<DMatrix<f64>> {
        if ch.dim_in() != self.d || ch.dim_out() != self.d {
            return Err(Error::Dimension(format!(
                "channel {}→{} on a {}-level system",
                ch.dim_in(),
                ch.dim_out(),
                self.d
            )));
        }
        let phi = choi_state(ch)?;
        let d = self.d;
        let n = d * d;
        // Tr Φ(B ⊗ C) = Σ_ij B_ji Tr(Φ_ij C) with Φ_ij the (i, j) block of Φ
        let pm = phi.op().matrix();
        let mut blocks = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..d {
            for j in 0..d {
                let blk = pm.view((i * d, j * d), (d, d));
                for (a, pt) in self.phase_points.iter().enumerate() {
                    let m = pt.matrix();
                    let mut t = c(0.0, 0.0);
                    for r in 0..d {
                        for s in 0..d {
                            t += blk[(r, s)] * m[(s, r)];
                        }
                    }
                    blocks[(i * d + j, a)] = t;
                }
            }
        }
        let mut t = DMatrix::zeros(n, n);
        for xi in 0..d {
            for qi in 0..d {
                let b = self.phase_point(xi, self.neg(qi)).matrix();
                for a in 0..n {
                    let mut v = c(0.0, 0.0);
                    for i in 0..d {
                        for j in 0..d {
                            v += b[(j, i)] * blocks[(i * d + j, a)];
                        }
                    }
                    t[(a, xi * d + qi)] = v.re;
                }
            }
        }
        Ok(t)
    }

    /// Applies a transition matrix to a table.
    pub fn transport(&self, t: &DMatrix<f64>, w: &WignerTable) -> WignerTable {
        let v = t * DVector::from_column_slice(&w.values);
        WignerTable { primes: self.primes.clone(), values: v.iter().copied().collect() }
    }

    /// Flattened phase-space index of (x, q).
    fn point(&self, x: usize, q: usize) -> usize {
        x * self.d + q
    }

    /// (k ⊛ w)(a) = Σ_b k(b) w(a − b) on the phase-space group.
    pub fn convolve(&self, k: &[f64], w: &[f64]) -> Vec<f64> {
        let d = self.d;
        let mut out = vec![0.0; d * d];
        for bx in 0..d {
            for bq in 0..d {
                let kb = k[self.point(bx, bq)];
                if kb == 0.0 {
                    continue;
                }
                for ax in 0..d {
                    let sx = self.sub(ax, bx);
                    for aq in 0..d {
                        out[self.point(ax, aq)] += kb * w[self.point(sx, self.sub(aq, bq))];
                    }
                }
            }
        }
        out
    }

    fn character(&self, kx: usize, kq: usize, x: usize, q: usize) -> Complex64 {
        let (a, b, cx, cq) = (self.digits(kx), self.digits(kq), self.digits(x), self.digits(q));
        let mut t = 0.0;
        for (i, &p) in self.primes.iter().enumerate() {
            t += ((a[i] * cx[i] + b[i] * cq[i]) % p) as f64 / p as f64;
        }
        let ang = -2.0 * core::f64::consts::PI * t;
        c(libm::cos(ang), libm::sin(ang))
    }

    /// Fourier transform over the phase-space group.
    pub fn fourier(&self, w: &[f64]) -> Vec<Complex64> {
        let d = self.d;
        let mut out = vec![c(0.0, 0.0); d * d];
        for kx in 0..d {
            for kq in 0..d {
                let mut s = c(0.0, 0.0);
                for x in 0..d {
                    for q in 0..d {
                        s += self.character(kx, kq, x, q) * w[self.point(x, q)];
                    }
                }
                out[self.point(kx, kq)] = s;
            }
        }
        out
    }

    fn inverse_fourier(&self, f: &[Complex64]) -> Vec<f64> {
        let d = self.d;
        let n = (d * d) as f64;
        let mut out = vec![0.0; d * d];
        for x in 0..d {
            for q in 0..d {
                let mut s = c(0.0, 0.0);
                for kx in 0..d {
                    for kq in 0..d {
                        s += self.character(kx, kq, x, q).conj() * f[self.point(kx, kq)];
                    }
                }
                out[self.point(x, q)] = s.re / n;
            }
        }
        out
    }

    /// Nonnegative normalized kernel k with W_ρ = k ⊛ W_σ, if any.
    pub fn wh_convertible(&self, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Option<WignerTable>> {
        let wr = self.wigner_of(rho)?.values;
        let ws = self.wigner_of(sigma)?.values;
        let fs = self.fourier(&ws);
        let kernel = if fs.iter().all(|z| z.norm() > 1e-10) {
            let fr = self.fourier(&wr);
            let fk: Vec<Complex64> = fr.iter().zip(&fs).map(|(a, b)| a / b).collect();
            let k = self.inverse_fourier(&fk);
            if k.iter().any(|&v| v < -1e-9) {
                return Ok(None);
            }
            k.iter().map(|&v| if v < 1e-12 { 0.0 } else { v }).collect::<Vec<f64>>()
        } else {
            let n = self.d * self.d;
            // column b holds the translate a ↦ W_σ(a − b)
            let mut a = DMatrix::zeros(n, n);
            for bx in 0..self.d {
                for bq in 0..self.d {
                    let col = self.point(bx, bq);
                    for ax in 0..self.d {
                        for aq in 0..self.d {
                            a[(self.point(ax, aq), col)] = ws[self.point(self.sub(ax, bx), self.sub(aq, bq))];
                        }
                    }
                }
            }
            let (k, resid) = nnls(&a, &DVector::from_column_slice(&wr));
            if resid >= 1e-9 {
                return Ok(None);
            }
            k.iter().copied().collect()
        };
        let s: f64 = kernel.iter().sum();
        let kernel: Vec<f64> = kernel.iter().map(|v| v / s).collect();
        let back = self.convolve(&kernel, &ws);
        let err = back.iter().zip(&wr).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err > 1e-9 {
            return Ok(None);
        }
        Ok(Some(WignerTable { primes: self.primes.clone(), values: kernel }))
    }

    /// ρ ↦ Σ_a k(a) D_a ρ D_a†, the channel whose Wigner action is convolution with k.
    pub fn displacement_mixture(&self, k: &[f64]) -> Result<KrausChannel> {
        if k.len() != self.d * self.d || k.iter().any(|&v| v < 0.0) {
            return Err(Error::Invalid("kernel must be nonnegative on the phase space".into()));
        }
        let s: f64 = k.iter().sum();
        if !(s > 0.0) {
            return Err(Error::Invalid("kernel has zero mass".into()));
        }
        let mut ops = Vec::new();
        for x in 0..self.d {
            for q in 0..self.d {
                let v = k[self.point(x, q)] / s;
                if v > 0.0 {
                    ops.push(self.displacement(x, q).scale(libm::sqrt(v)));
                }
            }
        }
        KrausChannel::new(ops)
    }
}
