//! U(1)-covariant conversion of pure states on the integer ladder.
//!
//! ψ → φ is possible iff p = w * q for a probability vector w, with p, q the
//! squared amplitudes. The test embeds p and q cyclically and inverts the
//! circulant matrix of q; the embedding dimension climbs through primes until
//! that matrix is invertible.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, KrausChannel};
use crate::nnls::nnls;

/// Probability vector on ℤ; `weights[i]` sits at site `offset + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    pub offset: i64,
    pub weights: Vec<f64>,
}

impl ProbVector {
    /// Validates, then trims exact zeros at both ends.
    pub fn new(offset: i64, weights: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(offset, weights, 1e-12)
    }

    pub fn with_tolerance(offset: i64, weights: Vec<f64>, tol: f64) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::NotState("weights must be finite and nonnegative".into()));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::NotState(format!("weights sum to {s}")));
        }
        let first = weights.iter().position(|&w| w > 0.0).ok_or_else(|| Error::NotState("empty support".into()))?;
        let last = weights.iter().rposition(|&w| w > 0.0).expect("nonempty");
        Ok(Self { offset: offset + first as i64, weights: weights[first..=last].to_vec() })
    }

    /// Point mass at `site`.
    pub fn delta(site: i64) -> Self {
        Self { offset: site, weights: vec![1.0] }
    }

    pub fn diam(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn end(&self) -> i64 {
        self.offset + self.diam() as i64
    }

    pub fn get(&self, site: i64) -> f64 {
        let i = site - self.offset;
        if i < 0 || i as usize >= self.weights.len() {
            0.0
        } else {
            self.weights[i as usize]
        }
    }

    /// Entries on sites start..start+len.
    pub fn dense(&self, start: i64, len: usize) -> Vec<f64> {
        (0..len).map(|i| self.get(start + i as i64)).collect()
    }

    pub fn shifted(&self, k: i64) -> Self {
        Self { offset: self.offset + k, weights: self.weights.clone() }
    }

    /// Largest entrywise difference over the union of supports.
    pub fn max_diff(&self, other: &ProbVector) -> f64 {
        let lo = self.offset.min(other.offset);
        let hi = self.end().max(other.end());
        (lo..=hi).map(|s| (self.get(s) - other.get(s)).abs()).fold(0.0, f64::max)
    }
}

/// Non-cyclic convolution.
pub fn convolve(a: &ProbVector, b: &ProbVector) -> ProbVector {
    let mut out = vec![0.0; a.weights.len() + b.weights.len() - 1];
    for (i, x) in a.weights.iter().enumerate() {
        for (j, y) in b.weights.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    ProbVector { offset: a.offset + b.offset, weights: out }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderState {
    pub offset: i64,
    pub amplitudes: Vec<Complex64>,
}

impl LadderState {
    pub fn new(offset: i64, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NotState("non-finite amplitude".into()));
        }
        let n = libm::sqrt(amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>());
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::NotState(format!("amplitude norm {n}")));
        }
        Ok(Self { offset, amplitudes })
    }

    /// √p_n amplitudes with the given phases.
    pub fn from_probs(p: &ProbVector, phases: &[f64]) -> Self {
        let amplitudes = p
            .weights
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let a = phases.get(i).copied().unwrap_or(0.0);
                c(libm::sqrt(w) * libm::cos(a), libm::sqrt(w) * libm::sin(a))
            })
            .collect();
        Self { offset: p.offset, amplitudes }
    }

    pub fn probs(&self) -> Result<ProbVector> {
        let w: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        let s: f64 = w.iter().sum();
        ProbVector::with_tolerance(self.offset, w.iter().map(|x| x / s).collect(), 1e-9)
    }

    /// Amplitude vector on sites start..start+len.
    pub fn dense(&self, start: i64, len: usize) -> CVec {
        CVec::from_fn(len, |i, _| {
            let k = start + i as i64 - self.offset;
            if k < 0 || k as usize >= self.amplitudes.len() {
                c(0.0, 0.0)
            } else {
                self.amplitudes[k as usize]
            }
        })
    }
}

/// First row v, every further row rotated one step to the right.
pub fn circulant(v: &[f64]) -> Result<DMatrix<f64>> {
    let n = v.len();
    if n == 0 {
        return Err(Error::Invalid("empty circulant".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| v[(j + n - i) % n]))
}

pub fn cyclic_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            out[(i + j) % n] += a[i] * b[j];
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum CyclicOutcome {
    /// w ≥ 0 (tiny negatives clipped, renormalized).
    Majorized(Vec<f64>),
    /// The unique w has a negative entry.
    NotMajorized(Vec<f64>),
    Singular,
}

/// Relative smallest eigenvalue modulus of C(v): the values of its polynomial at the N-th roots of unity.
pub fn circulant_conditioning(v: &[f64]) -> f64 {
    let n = v.len();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for k in 0..n {
        let mut s = c(0.0, 0.0);
        for (j, &x) in v.iter().enumerate() {
            let t = 2.0 * core::f64::consts::PI * ((k * j) % n) as f64 / n as f64;
            s += c(libm::cos(t), libm::sin(t)) * x;
        }
        lo = lo.min(s.norm());
        hi = hi.max(s.norm());
    }
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}

/// Solves C(w) = C(p°) C(q°)^{-1}, i.e. w ⊛ q° = p°.
pub fn cyclic_majorize(p: &[f64], q: &[f64]) -> Result<CyclicOutcome> {
    let n = p.len();
    if q.len() != n || n == 0 {
        return Err(Error::Dimension(format!("lengths {} and {}", p.len(), q.len())));
    }
    for v in [p, q] {
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > 1e-9 || v.iter().any(|x| *x < 0.0) {
            return Err(Error::NotState("embedded vectors must lie in the simplex".into()));
        }
    }
    if circulant_conditioning(q) < 1e-10 {
        return Ok(CyclicOutcome::Singular);
    }
    // first row of C(w)C(q) is w ⊛ q, so C(q)ᵀ w = p
    let a = circulant(q)?.transpose();
    let w = a
        .lu()
        .solve(&nalgebra::DVector::from_column_slice(p))
        .ok_or(Error::SingularExhausted { retries: 0 })?;
    let w: Vec<f64> = w.iter().copied().collect();
    if w.iter().any(|&x| x < -1e-9) {
        return Ok(CyclicOutcome::NotMajorized(w));
    }
    let clipped: Vec<f64> = w.iter().map(|&x| if x < 1e-12 { 0.0 } else { x }).collect();
    let s: f64 = clipped.iter().sum();
    Ok(CyclicOutcome::Majorized(clipped.iter().map(|x| x / s).collect()))
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

pub fn next_prime_above(n: usize) -> usize {
    let mut k = n + 1;
    while !is_prime(k) {
        k += 1;
    }
    k
}

pub const MAX_SINGULAR_RETRIES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct CirculantTestReport {
    pub convertible: bool,
    /// Shift weights in ladder coordinates: p = w * q.
    pub w: Option<ProbVector>,
    pub embedding_dim: usize,
    pub singular_retries: usize,
}

/// Decides p ≺ q (p = w * q with w ≥ 0) for probability vectors.
pub fn u1_majorized(p: &ProbVector, q: &ProbVector) -> Result<CirculantTestReport> {
    let n = p.diam().max(q.diam());
    let mut dim = next_prime_above(2 * n + 1);
    let mut retries = 0;
    loop {
        let pe = p.dense(p.offset, dim);
        let qe = q.dense(q.offset, dim);
        match cyclic_majorize(&pe, &qe)? {
            CyclicOutcome::Singular => {
                retries += 1;
                if retries > MAX_SINGULAR_RETRIES {
                    return Err(Error::SingularExhausted { retries: MAX_SINGULAR_RETRIES });
                }
                dim = next_prime_above(dim);
            }
            CyclicOutcome::NotMajorized(_) => {
                return Ok(CirculantTestReport { convertible: false, w: None, embedding_dim: dim, singular_retries: retries });
            }
            CyclicOutcome::Majorized(w) => {
                let w = ProbVector::with_tolerance(p.offset - q.offset, w, 1e-9)?;
                let back = convolve(&w, q);
                let err = back.max_diff(p);
                if err > 1e-9 {
                    return Err(Error::Inconsistent(format!("cyclic solution fails the ladder convolution by {err:e}")));
                }
                return Ok(CirculantTestReport { convertible: true, w: Some(w), embedding_dim: dim, singular_retries: retries });
            }
        }
    }
}

/// Whether ψ → φ is possible with a U(1)-covariant channel.
pub fn u1_convertible(psi: &LadderState, phi: &LadderState) -> Result<CirculantTestReport> {
    u1_majorized(&psi.probs()?, &phi.probs()?)
}

/// Exact probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactProbVector {
    pub offset: i64,
    pub weights: Vec<BigRational>,
}

impl ExactProbVector {
    pub fn new(offset: i64, weights: Vec<BigRational>) -> Result<Self> {
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::NotState("negative weight".into()));
        }
        let s: BigRational = weights.iter().cloned().sum();
        if !s.is_one() {
            return Err(Error::NotState(format!("weights sum to {s}")));
        }
        let first = weights.iter().position(|w| !w.is_zero()).ok_or_else(|| Error::NotState("empty support".into()))?;
        let last = weights.iter().rposition(|w| !w.is_zero()).expect("nonempty");
        Ok(Self { offset: offset + first as i64, weights: weights[first..=last].to_vec() })
    }

    pub fn diam(&self) -> usize {
        self.weights.len() - 1
    }

    fn dense(&self, len: usize) -> Vec<BigRational> {
        (0..len).map(|i| self.weights.get(i).cloned().unwrap_or_else(BigRational::zero)).collect()
    }

    pub fn to_f64(&self) -> ProbVector {
        let w = self.weights.iter().map(rational_to_f64).collect();
        ProbVector { offset: self.offset, weights: w }
    }
}

/// Parses "a/b", an integer, or a plain decimal such as "0.25".
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("not a rational number: {s:?}"));
    let int = |t: &str| t.trim().parse::<BigInt>().map_err(|_| bad());
    if let Some((n, d)) = s.split_once('/') {
        let d = int(d)?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(int(n)?, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = whole.trim_start().starts_with('-');
        let w = if whole.is_empty() || whole == "-" { BigInt::zero() } else { int(whole)? };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let f = BigRational::new(int(frac)?, scale);
        let w = BigRational::from_integer(w);
        return Ok(if neg { w - f } else { w + f });
    }
    Ok(BigRational::from_integer(int(s)?))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // scale so both parts fit comfortably before dividing
    let (n, d) = (r.numer(), r.denom());
    let shift = (n.bits().max(d.bits()) as i64 - 900).max(0) as usize;
    let n2: BigInt = n >> shift;
    let d2: BigInt = d >> shift;
    big_to_f64(&n2) / big_to_f64(&d2)
}

fn big_to_f64(b: &BigInt) -> f64 {
    let (sign, digits) = b.to_u64_digits();
    let mut x = 0.0;
    for &dgt in digits.iter().rev() {
        x = x * 18446744073709551616.0 + dgt as f64;
    }
    if sign == num_bigint::Sign::Minus {
        -x
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactReport {
    pub convertible: bool,
    pub w: Option<ExactProbVector>,
    pub embedding_dim: usize,
    pub singular_retries: usize,
}

/// Gaussian elimination over ℚ; `None` when singular.
fn solve_exact(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] * &inv;
            for k in col..n {
                let t = &f * &a[col][k];
                a[r][k] -= t;
            }
            let t = &f * &b[col];
            b[r] -= t;
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Exact-arithmetic version of [`u1_majorized`]; the verdict involves no tolerance.
pub fn u1_majorized_exact(p: &ExactProbVector, q: &ExactProbVector) -> Result<ExactReport> {
    let n = p.diam().max(q.diam());
    let mut dim = next_prime_above(2 * n + 1);
    let mut retries = 0;
    loop {
        let pe = p.dense(dim);
        let qe = q.dense(dim);
        let a: Vec<Vec<BigRational>> =
            (0..dim).map(|i| (0..dim).map(|j| qe[(i + dim - j) % dim].clone()).collect()).collect();
        match solve_exact(a, pe) {
            None => {
                retries += 1;
                if retries > MAX_SINGULAR_RETRIES {
                    return Err(Error::SingularExhausted { retries: MAX_SINGULAR_RETRIES });
                }
                dim = next_prime_above(dim);
            }
            Some(w) => {
                if w.iter().any(|x| x.is_negative()) {
                    return Ok(ExactReport { convertible: false, w: None, embedding_dim: dim, singular_retries: retries });
                }
                let w = ExactProbVector::new(p.offset - q.offset, w)?;
                // ladder check: (w * q)_k = p_k exactly
                let len = w.weights.len() + q.weights.len() - 1;
                let mut back = vec![BigRational::zero(); len];
                for (i, x) in w.weights.iter().enumerate() {
                    for (j, y) in q.weights.iter().enumerate() {
                        back[i + j] += x * y;
                    }
                }
                let ok = w.offset + q.offset == p.offset && back.len() == p.weights.len() && back == p.weights;
                if !ok {
                    return Err(Error::Inconsistent("exact cyclic solution fails the ladder convolution".into()));
                }
                return Ok(ExactReport { convertible: true, w: Some(w), embedding_dim: dim, singular_retries: retries });
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct U1Kraus {
    /// Ladder site of matrix row/column 0.
    pub window_offset: i64,
    /// K_k for each shift k (|n⟩ → |n+k⟩).
    pub shifts: Vec<i64>,
    pub channel: KrausChannel,
}

/// K_k = Σ_{p_n ≠ 0} √(w_{−k} q_{n+k} / p_n) |n+k⟩⟨n| on the joint support window.
pub fn build_u1_kraus(p: &ProbVector, q: &ProbVector, w: &ProbVector) -> Result<U1Kraus> {
    let err = convolve(w, q).max_diff(p);
    if err > 1e-9 {
        return Err(Error::Inconsistent(format!("p differs from w * q by {err:e}")));
    }
    let lo = p.offset.min(q.offset);
    let hi = p.end().max(q.end());
    let size = (hi - lo + 1) as usize;
    let mut kraus = Vec::new();
    let mut shifts = Vec::new();
    for (i, &wm) in w.weights.iter().enumerate() {
        if wm <= 0.0 {
            continue;
        }
        let k = -(w.offset + i as i64);
        let mut m = CMat::zeros(size, size);
        for n in p.offset..=p.end() {
            let pn = p.get(n);
            if pn <= 0.0 {
                continue;
            }
            let qn = q.get(n + k);
            if qn <= 0.0 {
                continue;
            }
            m[((n + k - lo) as usize, (n - lo) as usize)] = c(libm::sqrt(wm * qn / pn), 0.0);
        }
        kraus.push(m);
        shifts.push(k);
    }
    Ok(U1Kraus { window_offset: lo, shifts, channel: KrausChannel::subnormalized(kraus)? })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccessiblePair {
    /// Target reachable from p.
    pub q: ProbVector,
    /// Shift weights with p = w * q.
    pub w: ProbVector,
    /// Some coefficient in [−tol, 0) was clipped to zero.
    pub clipped: bool,
}

pub const ACCESSIBLE_MAX_DIAM: usize = 20;

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Monic polynomial with the given roots, coefficients in ascending order.
fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut p = vec![c(1.0, 0.0)];
    for r in roots {
        p = poly_mul(&p, &[-r, c(1.0, 0.0)]);
    }
    p
}

/// Roots of Σ a_i x^i (ascending, nonzero leading and trailing terms) via the companion matrix.
pub fn poly_roots(a: &[f64]) -> Vec<Complex64> {
    let m = a.len() - 1;
    if m == 0 {
        return Vec::new();
    }
    let lead = a[m];
    let comp = DMatrix::<f64>::from_fn(m, m, |i, j| {
        if i == 0 {
            -a[m - 1 - j] / lead
        } else if j + 1 == i {
            1.0
        } else {
            0.0
        }
    });
    comp.complex_eigenvalues().iter().map(|z| c(z.re, z.im)).collect()
}

/// Groups roots closer than `tol` (relative); returns (mean, multiplicity).
fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let mut members = vec![i];
        used[i] = true;
        for j in i + 1..roots.len() {
            if !used[j] && (roots[j] - roots[i]).norm() <= tol * roots[i].norm().max(1.0) {
                used[j] = true;
                members.push(j);
            }
        }
        let mean = members.iter().map(|&k| roots[k]).sum::<Complex64>() / members.len() as f64;
        out.push((mean, members.len()));
    }
    out
}

/// All factorizations f_p = f_w · f_q into probability polynomials.
pub fn accessible_states(p: &ProbVector, tol: f64) -> Result<Vec<AccessiblePair>> {
    let m = p.diam();
    if m > ACCESSIBLE_MAX_DIAM {
        return Err(Error::Invalid(format!("diam {m} exceeds {ACCESSIBLE_MAX_DIAM}")));
    }
    if m == 0 {
        return Ok(vec![AccessiblePair { q: p.clone(), w: ProbVector::delta(0), clipped: false }]);
    }
    let clusters = cluster_roots(&poly_roots(&p.weights), 1e-4);
    // real clusters stand alone; complex ones are paired with their conjugate
    let mut groups: Vec<(Vec<Complex64>, usize)> = Vec::new();
    let mut taken = vec![false; clusters.len()];
    for i in 0..clusters.len() {
        if taken[i] {
            continue;
        }
        taken[i] = true;
        let (r, k) = clusters[i];
        if r.im.abs() <= 1e-7 * r.norm().max(1.0) {
            groups.push((vec![c(r.re, 0.0)], k));
            continue;
        }
        let partner = (0..clusters.len())
            .filter(|&j| !taken[j])
            .min_by(|&a, &b| (clusters[a].0 - r.conj()).norm().total_cmp(&(clusters[b].0 - r.conj()).norm()));
        match partner {
            Some(j) => {
                taken[j] = true;
                let z = (r + clusters[j].0.conj()) / 2.0;
                groups.push((vec![z, z.conj()], k.min(clusters[j].1)));
            }
            None => return Err(Error::Invalid("root without a conjugate partner".into())),
        }
    }
    let mut out: Vec<AccessiblePair> = Vec::new();
    let counts: Vec<usize> = groups.iter().map(|g| g.1 + 1).collect();
    let total: usize = counts.iter().product();
    for code in 0..total {
        let mut rem = code;
        let mut sel: Vec<Complex64> = Vec::new();
        let mut rest: Vec<Complex64> = Vec::new();
        for (g, &cnt) in groups.iter().zip(&counts) {
            let take = rem % cnt;
            rem /= cnt;
            for _ in 0..take {
                sel.extend_from_slice(&g.0);
            }
            for _ in take..g.1 {
                rest.extend_from_slice(&g.0);
            }
        }
        let (q, qc) = match normalized_real(&from_roots(&sel), tol) {
            Some(v) => v,
            None => continue,
        };
        let (w, wc) = match normalized_real(&from_roots(&rest), tol) {
            Some(v) => v,
            None => continue,
        };
        let q = ProbVector::with_tolerance(p.offset, q, 1e-9)?;
        let w = ProbVector::with_tolerance(0, w, 1e-9)?;
        if convolve(&w, &q).max_diff(p) > 1e-6 {
            continue;
        }
        if out.iter().any(|o| o.q.max_diff(&q) <= tol.max(1e-9) && o.q.offset == q.offset) {
            continue;
        }
        out.push(AccessiblePair { q, w, clipped: qc || wc });
    }
    Ok(out)
}

/// Real coefficients scaled to sum 1; `None` if any is below −tol.
fn normalized_real(coefs: &[Complex64], tol: f64) -> Option<(Vec<f64>, bool)> {
    let s: Complex64 = coefs.iter().sum();
    if s.norm() < 1e-300 {
        return None;
    }
    let v: Vec<f64> = coefs.iter().map(|z| (z / s).re).collect();
    if v.iter().any(|&x| x < -tol) {
        return None;
    }
    let clipped = v.iter().any(|&x| x < 0.0);
    let v: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    let t: f64 = v.iter().sum();
    Some((v.iter().map(|x| x / t).collect(), clipped))
}

/// With a (2d+1)-level auxiliary qudit: q ∈ conv{Δ^m p : |m| ≤ d}? Returns the weights w_m (offset −d).
pub fn aux_reachable(p: &ProbVector, q: &ProbVector, d: usize) -> Result<Option<ProbVector>> {
    let d = d as i64;
    let lo = (p.offset - d).min(q.offset);
    let hi = (p.end() + d).max(q.end());
    let rows = (hi - lo + 1) as usize;
    let cols = (2 * d + 1) as usize;
    let a = DMatrix::<f64>::from_fn(rows, cols, |r, j| {
        let shift = j as i64 - d;
        p.get(lo + r as i64 - shift)
    });
    let b = nalgebra::DVector::from_fn(rows, |r, _| q.get(lo + r as i64));
    let (w, resid) = nnls(&a, &b);
    if resid >= 1e-9 {
        return Ok(None);
    }
    let w: Vec<f64> = w.iter().map(|&x| if x < 1e-12 { 0.0 } else { x }).collect();
    let s: f64 = w.iter().sum();
    Ok(Some(ProbVector::with_tolerance(-d, w.iter().map(|x| x / s).collect(), 1e-8)?))
}
