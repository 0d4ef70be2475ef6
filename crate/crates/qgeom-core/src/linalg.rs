//! Hermitian linear algebra, composite systems, states, channels and distances.
//!
//! Composite bases are row-major with subsystem 0 the most significant index, so
//! `tensor(a, b)[(i*db + k, j*db + l)] = a[(i, j)] * b[(k, l)]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative tolerance for accepting slightly negative eigenvalues as zero.
pub const PSD_TOL: f64 = 1e-9;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_residual(m: &CMat) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

/// A square complex matrix that equals its own adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    m: CMat,
}

impl HermitianOperator {
    /// Validates Hermiticity within `1e-12 * max|entry|`, then stores the exact Hermitian part.
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!("{}x{} is not square", m.nrows(), m.ncols())));
        }
        if m.nrows() == 0 {
            return Err(Error::Dimension("empty operator".into()));
        }
        let res = hermiticity_residual(&m);
        if res > 1e-12 * max_abs(&m).max(1e-300) {
            return Err(Error::NotHermitian(res));
        }
        Ok(Self::hermitian_part(&m))
    }

    /// (M + M†)/2 without validation.
    pub fn hermitian_part(m: &CMat) -> Self {
        let h = (m + m.adjoint()).scale(0.5);
        Self { m: h }
    }

    pub fn identity(d: usize) -> Self {
        Self { m: CMat::identity(d, d) }
    }

    pub fn zeros(d: usize) -> Self {
        Self { m: CMat::zeros(d, d) }
    }

    pub fn from_real(d: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::Dimension(format!("expected {} entries", d * d)));
        }
        Self::new(CMat::from_fn(d, d, |i, j| c(entries[i * d + j], 0.0)))
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Self { m: CMat::from_fn(d, d, |i, j| if i == j { c(diag[i], 0.0) } else { ZERO }) }
    }

    /// Projector |v⟩⟨v| (v is used as given).
    pub fn projector(v: &CVec) -> Self {
        Self::hermitian_part(&(v * v.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { m: self.m.scale(a) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { m: &self.m + &other.m }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { m: &self.m - &other.m }
    }

    /// X + a·1
    pub fn shift(&self, a: f64) -> Self {
        let mut m = self.m.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c(a, 0.0);
        }
        Self { m }
    }

    /// Hermitian square.
    pub fn square(&self) -> Self {
        Self::hermitian_part(&(&self.m * &self.m))
    }

    pub fn trace(&self) -> f64 {
        trace(&self.m).re
    }

    pub fn eigensystem(&self) -> Eigensystem {
        eigh(&self.m)
    }

    pub fn lambda_max(&self) -> f64 {
        *eigh(&self.m).values.last().unwrap()
    }

    pub fn lambda_min(&self) -> f64 {
        eigh(&self.m).values[0]
    }

    /// Operator 2-norm.
    pub fn norm(&self) -> f64 {
        let e = eigh(&self.m);
        e.values[0].abs().max(e.values[e.values.len() - 1].abs())
    }
}

impl Deref for HermitianOperator {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.m
    }
}

/// Σ coef_i · ops_i
pub fn combination(ops: &[HermitianOperator], coefs: &[f64]) -> Result<HermitianOperator> {
    if ops.is_empty() || ops.len() != coefs.len() {
        return Err(Error::Dimension(format!("{} operators, {} coefficients", ops.len(), coefs.len())));
    }
    let d = ops[0].dim();
    let mut m = CMat::zeros(d, d);
    for (op, &a) in ops.iter().zip(coefs) {
        if op.dim() != d {
            return Err(Error::Dimension(format!("operator of size {} vs {}", op.dim(), d)));
        }
        m += op.matrix().scale(a);
    }
    Ok(HermitianOperator { m })
}

#[derive(Debug, Clone)]
pub struct Eigensystem {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column k belongs to `values[k]`.
    pub vectors: CMat,
}

impl Eigensystem {
    pub fn vector(&self, k: usize) -> CVec {
        self.vectors.column(k).into_owned()
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn top(&self) -> CVec {
        self.vector(self.values.len() - 1)
    }
}

/// Eigen-decomposition of a matrix assumed Hermitian, sorted ascending.
pub fn eigh(m: &CMat) -> Eigensystem {
    let n = m.nrows();
    let h = (m + m.adjoint()).scale(0.5);
    let se = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = idx.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| se.eigenvectors[(i, idx[j])]);
    Eigensystem { values, vectors }
}

pub fn hermitian_eigensystem(a: &HermitianOperator) -> Eigensystem {
    eigh(a.matrix())
}

/// Validating variant for raw matrices.
pub fn hermitian_eigensystem_checked(m: &CMat) -> Result<Eigensystem> {
    let h = HermitianOperator::new(m.clone())?;
    Ok(eigh(h.matrix()))
}

pub fn trace(m: &CMat) -> Complex64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Tr(A·B) without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    let mut s = ZERO;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

/// ⟨v|M|v⟩, real part.
pub fn expect_vec(m: &CMat, v: &CVec) -> f64 {
    v.dotc(&(m * v)).re
}

/// Checks PSD with the relative tolerance and returns the smallest eigenvalue.
pub fn psd_min_eig(m: &CMat) -> (bool, f64) {
    let e = eigh(m);
    let scale = e.values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    (e.min() >= -PSD_TOL * scale.max(1e-300), e.min())
}

/// Square root of a PSD matrix through its eigendecomposition, negative eigenvalues clipped.
pub fn psd_sqrt(m: &CMat) -> CMat {
    psd_function(m, libm::sqrt)
}

/// Applies `f` to the clipped spectrum.
pub fn psd_function(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let e = eigh(m);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for k in 0..n {
        let fv = f(e.values[k].max(0.0));
        if fv == 0.0 {
            continue;
        }
        let v = e.vectors.column(k);
        out += (v * v.adjoint()).scale(fv);
    }
    out
}

/// Ordered local dimensions of a composite system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionSpec {
    pub local_dims: Vec<usize>,
}

impl DimensionSpec {
    pub fn new(local_dims: Vec<usize>) -> Result<Self> {
        if local_dims.is_empty() || local_dims.iter().any(|&d| d == 0) {
            return Err(Error::Invalid("local dimensions must be positive".into()));
        }
        Ok(Self { local_dims })
    }

    pub fn bipartite(a: usize, b: usize) -> Self {
        Self { local_dims: vec![a, b] }
    }

    pub fn total(&self) -> usize {
        self.local_dims.iter().product()
    }

    pub fn len(&self) -> usize {
        self.local_dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.local_dims.is_empty()
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if self.total() != dim {
            return Err(Error::Dimension(format!(
                "local dimensions {:?} do not multiply to {}",
                self.local_dims, dim
            )));
        }
        Ok(())
    }

    fn split(&self, which: usize) -> Result<(usize, usize, usize)> {
        if which >= self.len() {
            return Err(Error::Subsystem { index: which, count: self.len() });
        }
        let left: usize = self.local_dims[..which].iter().product();
        let right: usize = self.local_dims[which + 1..].iter().product();
        Ok((left, self.local_dims[which], right))
    }
}

pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn tensor_vec(a: &CVec, b: &CVec) -> CVec {
    a.kronecker(b)
}

pub fn tensor_all(factors: &[CMat]) -> CMat {
    let mut out = CMat::identity(1, 1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

/// Traces out subsystem `which`.
pub fn partial_trace(m: &CMat, dims: &DimensionSpec, which: usize) -> Result<CMat> {
    dims.check(m.nrows())?;
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension("partial trace needs a square matrix".into()));
    }
    let (l, d, r) = dims.split(which)?;
    let n = l * r;
    let mut out = CMat::zeros(n, n);
    for a in 0..l {
        for b in 0..r {
            for a2 in 0..l {
                for b2 in 0..r {
                    let mut s = ZERO;
                    for k in 0..d {
                        s += m[((a * d + k) * r + b, (a2 * d + k) * r + b2)];
                    }
                    out[(a * r + b, a2 * r + b2)] = s;
                }
            }
        }
    }
    Ok(out)
}

/// Transposes tensor factor `which` only.
pub fn partial_transpose(m: &CMat, dims: &DimensionSpec, which: usize) -> Result<CMat> {
    dims.check(m.nrows())?;
    let (l, d, r) = dims.split(which)?;
    let mut out = m.clone();
    for a in 0..l {
        for b in 0..r {
            for a2 in 0..l {
                for b2 in 0..r {
                    for k in 0..d {
                        for k2 in 0..d {
                            out[((a * d + k) * r + b, (a2 * d + k2) * r + b2)] =
                                m[((a * d + k2) * r + b, (a2 * d + k) * r + b2)];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Unit-trace positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::with_trace_tolerance(op, 1e-12)
    }

    pub fn with_trace_tolerance(op: HermitianOperator, tol: f64) -> Result<Self> {
        let t = op.trace();
        if (t - 1.0).abs() > tol {
            return Err(Error::NotState(format!("trace {t}")));
        }
        let (ok, min) = psd_min_eig(op.matrix());
        if !ok {
            return Err(Error::NotState(format!("eigenvalue {min:e}")));
        }
        Ok(Self { op })
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    /// Normalized pure state |ψ⟩⟨ψ|.
    pub fn pure(psi: &CVec) -> Self {
        let v = psi.scale(1.0 / psi.norm());
        Self { op: HermitianOperator::projector(&v) }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { op: HermitianOperator::identity(d).scale(1.0 / d as f64) }
    }

    /// Normalizes by trace and projects onto the PSD cone (clipping).
    pub fn from_psd_unnormalized(m: &CMat) -> Result<Self> {
        let clipped = psd_function(m, |x| x);
        let t = trace(&clipped).re;
        if t <= 0.0 {
            return Err(Error::NotState("zero trace".into()));
        }
        Ok(Self { op: HermitianOperator::hermitian_part(&clipped.unscale(t)) })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

impl Deref for DensityMatrix {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        self.op.matrix()
    }
}

/// Tr(Xρ); the imaginary residue is discarded.
pub fn expectation(x: &HermitianOperator, rho: &DensityMatrix) -> Result<f64> {
    if x.dim() != rho.dim() {
        return Err(Error::Dimension(format!("{} vs {}", x.dim(), rho.dim())));
    }
    Ok(trace_product(x.matrix(), rho).re)
}

pub fn hs_distance(x: &CMat, y: &CMat) -> f64 {
    (x - y).norm()
}

/// Tr √(√ρ σ √ρ)
pub fn fidelity(rho: &CMat, sigma: &CMat) -> f64 {
    let s = psd_sqrt(rho);
    let inner = &s * sigma * &s;
    trace(&psd_sqrt(&inner)).re
}

pub fn bures_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    libm::sqrt((2.0 * (1.0 - fidelity(rho, sigma))).max(0.0))
}

/// Distance from 1/d to any pure state.
pub fn outradius(d: usize) -> f64 {
    libm::sqrt((d as f64 - 1.0) / d as f64)
}

/// Distance from 1/d to the nearest boundary face.
pub fn inradius(d: usize) -> f64 {
    libm::sqrt(1.0 / (d as f64 * (d as f64 - 1.0)))
}

/// Ordered Kraus operators of a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    pub kraus: Vec<CMat>,
    pub subnormalized: bool,
}

impl KrausChannel {
    /// Requires Σ K†K = 1 within 1e-9.
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let s = Self::completeness(&kraus)?;
        let d = s.nrows();
        let dev = (&s - CMat::identity(d, d)).norm();
        if dev > 1e-9 {
            return Err(Error::Invalid(format!("Kraus completeness violated by {dev:e}")));
        }
        Ok(Self { kraus, subnormalized: false })
    }

    /// Requires Σ K†K ≼ 1.
    pub fn subnormalized(kraus: Vec<CMat>) -> Result<Self> {
        let s = Self::completeness(&kraus)?;
        let top = eigh(&s).max();
        if top > 1.0 + 1e-9 {
            return Err(Error::Invalid(format!("Σ K†K has eigenvalue {top}")));
        }
        Ok(Self { kraus, subnormalized: true })
    }

    pub fn identity(d: usize) -> Self {
        Self { kraus: vec![CMat::identity(d, d)], subnormalized: false }
    }

    fn completeness(kraus: &[CMat]) -> Result<CMat> {
        let first = kraus.first().ok_or_else(|| Error::Invalid("no Kraus operators".into()))?;
        let (r, cdim) = (first.nrows(), first.ncols());
        let mut s = CMat::zeros(cdim, cdim);
        for k in kraus {
            if k.nrows() != r || k.ncols() != cdim {
                return Err(Error::Dimension("Kraus operators differ in shape".into()));
            }
            s += k.adjoint() * k;
        }
        Ok(s)
    }

    pub fn dim_in(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn dim_out(&self) -> usize {
        self.kraus[0].nrows()
    }

    /// Σ K M K† on an arbitrary matrix.
    pub fn apply_raw(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim_out(), self.dim_out());
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        out
    }
}

pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if ch.dim_in() != rho.dim() {
        return Err(Error::Dimension(format!("channel input {} vs state {}", ch.dim_in(), rho.dim())));
    }
    let out = HermitianOperator::hermitian_part(&ch.apply_raw(rho));
    DensityMatrix::with_trace_tolerance(out, 1e-9)
}

/// Φ = (1/d) Σ_ij |i⟩⟨j| ⊗ f(|i⟩⟨j|) for any linear map f on d×d matrices.
pub fn choi_of_map(d: usize, f: impl Fn(&CMat) -> CMat) -> CMat {
    let mut unit = CMat::zeros(d, d);
    unit[(0, 0)] = ONE;
    let dout = f(&unit).nrows();
    let mut phi = CMat::zeros(d * dout, d * dout);
    for i in 0..d {
        for j in 0..d {
            let mut e = CMat::zeros(d, d);
            e[(i, j)] = ONE;
            let img = f(&e);
            for a in 0..dout {
                for b in 0..dout {
                    phi[(i * dout + a, j * dout + b)] = img[(a, b)] / d as f64;
                }
            }
        }
    }
    phi
}

/// (id ⊗ ε)(|ω⟩⟨ω|) with |ω⟩ = Σ|ii⟩/√d.
pub fn choi_state(ch: &KrausChannel) -> Result<DensityMatrix> {
    if ch.dim_in() != ch.dim_out() {
        return Err(Error::Dimension("Choi state needs a square channel".into()));
    }
    let phi = choi_of_map(ch.dim_in(), |m| ch.apply_raw(m));
    let op = HermitianOperator::hermitian_part(&phi);
    if ch.subnormalized {
        Ok(DensityMatrix { op })
    } else {
        DensityMatrix::with_trace_tolerance(op, 1e-9)
    }
}

/// ε(ρ) = Tr_A[(ρ^T ⊗ 1)·d·Φ].
pub fn apply_via_choi(phi: &CMat, d_in: usize, rho: &CMat) -> Result<CMat> {
    let d_out = phi.nrows() / d_in;
    let lhs = tensor(&rho.transpose(), &CMat::identity(d_out, d_out));
    partial_trace(&(lhs * phi.scale(d_in as f64)), &DimensionSpec::bipartite(d_in, d_out), 0)
}

pub fn pauli(k: usize) -> CMat {
    match k {
        0 => CMat::identity(2, 2),
        1 => CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        3 => CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("pauli index {k}"),
    }
}

pub fn pauli_op(k: usize) -> HermitianOperator {
    HermitianOperator { m: pauli(k) }
}

/// J_X, J_Y, J_Z for spin `two_j / 2` in the basis m = j, j−1, …, −j.
pub fn spin_operators(two_j: usize) -> Result<[HermitianOperator; 3]> {
    if two_j > 400 {
        return Err(Error::Invalid(format!("spin {two_j}/2 too large")));
    }
    let n = two_j + 1;
    let j = two_j as f64 / 2.0;
    let mut jp = CMat::zeros(n, n);
    for k in 1..n {
        let m = j - k as f64;
        jp[(k - 1, k)] = c(libm::sqrt(j * (j + 1.0) - m * (m + 1.0)), 0.0);
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm).scale(0.5);
    let jy = (&jp - &jm) * c(0.0, -0.5);
    let jz = CMat::from_fn(n, n, |a, b| if a == b { c(j - a as f64, 0.0) } else { ZERO });
    Ok([
        HermitianOperator { m: jx },
        HermitianOperator { m: jy },
        HermitianOperator { m: jz },
    ])
}

/// Computational basis vector.
pub fn basis(d: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[k] = ONE;
    v
}

/// |ω⟩ = Σ|ii⟩/√d
pub fn max_entangled(d: usize) -> CVec {
    let mut v = CVec::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = c(1.0 / libm::sqrt(d as f64), 0.0);
    }
    v
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}
