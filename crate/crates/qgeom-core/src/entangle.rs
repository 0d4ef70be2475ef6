//! Expectation values restricted to product, PPT and Schmidt-rank-2 states.
//!
//! Only the qubit-qudit path produces certified upper bounds; everywhere else
//! the optimizers return feasible points, i.e. lower bounds.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hull;
use crate::linalg::{
    c, eigh, expect_vec, partial_trace, partial_transpose, pauli, tensor, tensor_vec, CMat, CVec, DensityMatrix,
    DimensionSpec, HermitianOperator, ONE, ZERO,
};
use crate::numrange::{self, ConvexBodyApprox, Direction, SupportSample};
use crate::rng;

pub const DEFAULT_RESTARTS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct ProductAnsatz {
    pub factors: Vec<CVec>,
}

impl ProductAnsatz {
    pub fn new(factors: Vec<CVec>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Invalid("no factors".into()));
        }
        for f in &factors {
            if (f.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Invalid(format!("factor norm {} is not 1", f.norm())));
            }
        }
        Ok(Self { factors })
    }

    pub fn vector(&self) -> CVec {
        let mut v = self.factors[0].clone();
        for f in &self.factors[1..] {
            v = tensor_vec(&v, f);
        }
        v
    }

    pub fn dims(&self) -> DimensionSpec {
        DimensionSpec { local_dims: self.factors.iter().map(|f| f.len()).collect() }
    }
}

#[derive(Debug, Clone)]
pub struct SepBounds {
    pub lower: f64,
    pub upper: f64,
    pub witness: ProductAnsatz,
    pub restarts: usize,
}

fn check_dims(h: &HermitianOperator, dims: &DimensionSpec) -> Result<()> {
    dims.check(h.dim())
}

/// Composite index → local indices, subsystem 0 most significant.
fn digits(mut i: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = i % dims[k];
        i /= dims[k];
    }
    out
}

/// Operator on factor `k` obtained by contracting H with every other factor.
pub fn reduced_operator(h: &HermitianOperator, factors: &[CVec], k: usize) -> CMat {
    let dims: Vec<usize> = factors.iter().map(|f| f.len()).collect();
    let total = h.dim();
    let dk = dims[k];
    let mut env = CVec::zeros(total);
    let mut slot = vec![0usize; total];
    for i in 0..total {
        let d = digits(i, &dims);
        let mut w = ONE;
        for (l, f) in factors.iter().enumerate() {
            if l != k {
                w *= f[d[l]];
            }
        }
        env[i] = w;
        slot[i] = d[k];
    }
    let mut cols = Vec::with_capacity(dk);
    for b in 0..dk {
        let masked = CVec::from_fn(total, |i, _| if slot[i] == b { env[i] } else { ZERO });
        cols.push(h.matrix() * masked);
    }
    let mut m = CMat::zeros(dk, dk);
    for i in 0..total {
        let ci = env[i].conj();
        if ci == ZERO {
            continue;
        }
        for b in 0..dk {
            m[(slot[i], b)] += ci * cols[b][i];
        }
    }
    m
}

fn product_value(h: &HermitianOperator, factors: &[CVec]) -> f64 {
    let p = ProductAnsatz { factors: factors.to_vec() };
    expect_vec(h, &p.vector())
}

/// One seeded see-saw run; returns the converged value and factors.
fn seesaw_run(h: &HermitianOperator, dims: &[usize], r: &mut rng::SeededRng) -> (f64, Vec<CVec>) {
    let factors: Vec<CVec> = dims.iter().map(|&d| rng::unit_vector(r, d)).collect();
    seesaw_from(h, factors)
}

/// Alternating sweeps from a given product state until the value stagnates.
fn seesaw_from(h: &HermitianOperator, mut factors: Vec<CVec>) -> (f64, Vec<CVec>) {
    let mut value = product_value(h, &factors);
    for _ in 0..5000 {
        let before = value;
        for k in 0..factors.len() {
            let m = reduced_operator(h, &factors, k);
            let e = eigh(&m);
            factors[k] = e.top();
            value = e.max();
        }
        if value - before <= 1e-13 * before.abs().max(1.0) {
            break;
        }
    }
    (value, factors)
}

/// Largest ⟨H⟩ over product states found by alternating top-eigenvector updates.
pub fn seesaw_product_max(h: &HermitianOperator, dims: &DimensionSpec, restarts: usize, seed: u64) -> Result<SepBounds> {
    check_dims(h, dims)?;
    let mut r = rng::seeded(seed);
    let mut best: Option<(f64, Vec<CVec>)> = None;
    for _ in 0..restarts.max(1) {
        let (v, f) = seesaw_run(h, &dims.local_dims, &mut r);
        if best.as_ref().map_or(true, |b| v > b.0) {
            best = Some((v, f));
        }
    }
    let (_, factors) = best.expect("at least one restart");
    let witness = ProductAnsatz { factors };
    Ok(SepBounds {
        lower: product_value(h, &witness.factors),
        upper: h.lambda_max(),
        witness,
        restarts: restarts.max(1),
    })
}

/// H_i = Tr_A[H(σ_i ⊗ 1)], σ_0 = 1.
pub fn qubit_reductions(h: &HermitianOperator, d: usize) -> Result<[HermitianOperator; 4]> {
    let dims = DimensionSpec::bipartite(2, d);
    check_dims(h, &dims)?;
    let mut out = Vec::with_capacity(4);
    for i in 0..4 {
        let s = tensor(&pauli(i), &CMat::identity(d, d));
        out.push(HermitianOperator::hermitian_part(&partial_trace(&(h.matrix() * s), &dims, 0)?));
    }
    Ok([out[0].clone(), out[1].clone(), out[2].clone(), out[3].clone()])
}

fn h_of(p: &[f64]) -> f64 {
    (p[0] + libm::sqrt(p[1] * p[1] + p[2] * p[2] + p[3] * p[3])) / 2.0
}

fn qubit_from_bloch(r: &[f64]) -> CVec {
    let n = libm::sqrt(r.iter().map(|x| x * x).sum::<f64>());
    if n < 1e-300 {
        return CVec::from_vec(vec![ONE, ZERO]);
    }
    let (x, y, z) = (r[0] / n, r[1] / n, r[2] / n);
    let theta = libm::acos(z.clamp(-1.0, 1.0));
    let phi = libm::atan2(y, x);
    CVec::from_vec(vec![
        c(libm::cos(theta / 2.0), 0.0),
        c(libm::sin(theta / 2.0) * libm::cos(phi), libm::sin(theta / 2.0) * libm::sin(phi)),
    ])
}

/// Orthonormal directions spanning the traceless parts of `ops` (in operator
/// coefficient space) and the constant offset c with W ⊂ c + span.
fn affine_frame(ops: &[HermitianOperator]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = ops[0].dim();
    let k = ops.len();
    let offset: Vec<f64> = ops.iter().map(|o| o.trace() / d as f64).collect();
    let gram = nalgebra::DMatrix::<f64>::from_fn(k, k, |i, j| {
        let a = ops[i].matrix() - CMat::identity(d, d).scale(offset[i]);
        let b = ops[j].matrix() - CMat::identity(d, d).scale(offset[j]);
        a.dotc(&b).re
    });
    let se = nalgebra::SymmetricEigen::new(gram);
    let top = se.eigenvalues.iter().fold(0.0f64, |m, &x| m.max(x));
    let mut frame = Vec::new();
    for i in 0..k {
        if se.eigenvalues[i] > 1e-14 * top.max(1e-300) && se.eigenvalues[i] > 1e-24 {
            frame.push(se.eigenvectors.column(i).iter().copied().collect());
        }
    }
    (offset, frame)
}

/// Rigorous bracket of max ⟨H⟩ over product states of a qubit ⊗ qudit system.
pub fn qubit_qudit_sep_max(h: &HermitianOperator, d: usize, directions: usize, seed: u64) -> Result<SepBounds> {
    let hs = qubit_reductions(h, d)?;
    let (offset, frame) = affine_frame(&hs);
    let k = frame.len();
    let embed = |y: &[f64]| -> Vec<f64> {
        let mut p = offset.clone();
        for (u, &yj) in frame.iter().zip(y) {
            for i in 0..4 {
                p[i] += u[i] * yj;
            }
        }
        p
    };
    let witness_of = |psi: &CVec, p: &[f64]| -> ProductAnsatz {
        ProductAnsatz { factors: vec![qubit_from_bloch(&p[1..4]), psi.clone()] }
    };
    if k == 0 {
        let p = offset.clone();
        let psi = crate::linalg::basis(d, 0);
        let w = witness_of(&psi, &p);
        let v = h_of(&p);
        return Ok(SepBounds { lower: v, upper: v, witness: w, restarts: 0 });
    }
    let reduced: Vec<HermitianOperator> = frame
        .iter()
        .map(|u| {
            let mut m = CMat::zeros(d, d);
            for i in 0..4 {
                m += (hs[i].matrix() - CMat::identity(d, d).scale(offset[i])).scale(u[i]);
            }
            HermitianOperator::hermitian_part(&m)
        })
        .collect();
    let dirs = numrange::sweep_directions(k, directions.max(2 * k + 2), seed);
    let mut samples: Vec<SupportSample> = Vec::with_capacity(dirs.len());
    for n in &dirs {
        samples.push(numrange::support(&reduced, n)?);
    }
    // lower: best inner vertex, realised by an explicit product state
    let mut best = f64::NEG_INFINITY;
    let mut best_w = None;
    for s in &samples {
        let p = embed(&s.point);
        let w = witness_of(&s.witness, &p);
        let v = product_value(h, &w.factors);
        if v > best {
            best = v;
            best_w = Some(w);
        }
    }
    let halfspaces: Vec<(Vec<f64>, f64)> =
        samples.iter().map(|s| (s.direction.as_slice().to_vec(), s.value)).collect();
    let center: Vec<f64> = (0..k)
        .map(|j| samples.iter().map(|s| s.point[j]).sum::<f64>() / samples.len() as f64)
        .collect();
    let verts = hull::polytope_vertices(&halfspaces, &center)
        .ok_or_else(|| Error::Invalid("outer polytope unbounded; increase directions".into()))?;
    let upper = verts.iter().map(|y| h_of(&embed(y))).fold(f64::NEG_INFINITY, f64::max);
    // see-saw polish of the best vertex: still an explicit product state
    let (_, factors) = seesaw_from(h, best_w.expect("samples").factors);
    let best = product_value(h, &factors).max(best);
    let witness = ProductAnsatz { factors };
    Ok(SepBounds { lower: best, upper: upper.max(best), witness, restarts: 0 })
}

/// W_SEP by direction sweep. Certified outer half-spaces on the qubit-qudit
/// path; see-saw values (marked heuristic) otherwise.
pub fn sep_numerical_range(
    ops: &[HermitianOperator],
    dims: &DimensionSpec,
    dirs: &[Direction],
    restarts: usize,
    seed: u64,
) -> Result<ConvexBodyApprox> {
    let d = ops.first().ok_or_else(|| Error::Invalid("no operators".into()))?.dim();
    dims.check(d)?;
    if dims.len() == 1 {
        return numrange::jnr_approximate(ops, dirs);
    }
    let qubit_path = dims.len() == 2 && dims.local_dims[0] == 2;
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    for (i, n) in dirs.iter().enumerate() {
        let h = crate::linalg::combination(ops, n.as_slice())?;
        let b = if qubit_path {
            qubit_qudit_sep_max(&h, dims.local_dims[1], 200, seed ^ i as u64)?
        } else {
            let mut b = seesaw_product_max(&h, dims, restarts, seed ^ i as u64)?;
            b.upper = b.lower;
            b
        };
        inner.push(numrange::expectation_point(ops, &b.witness.vector()));
        outer.push((n.clone(), b.upper));
    }
    Ok(ConvexBodyApprox {
        inner_vertices: inner,
        outer_halfspaces: outer,
        bounded: numrange::positively_spanning(dirs),
        heuristic_outer: !qubit_path,
    })
}

fn simplex_projection(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, &x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Frobenius-nearest density matrix.
pub fn project_density(m: &CMat) -> CMat {
    let h = (m + m.adjoint()).scale(0.5);
    let e = eigh(&h);
    let lam = simplex_projection(e.values.as_slice());
    let mut out = CMat::zeros(m.nrows(), m.ncols());
    for (k, &l) in lam.iter().enumerate() {
        if l > 0.0 {
            let v = e.vector(k);
            out += (&v * v.adjoint()).scale(l);
        }
    }
    out
}

/// Frobenius-nearest PSD matrix.
fn project_psd(m: &CMat) -> CMat {
    let h = (m + m.adjoint()).scale(0.5);
    let e = eigh(&h);
    let mut out = CMat::zeros(m.nrows(), m.ncols());
    for (k, &l) in e.values.iter().enumerate() {
        if l > 0.0 {
            let v = e.vector(k);
            out += (&v * v.adjoint()).scale(l);
        }
    }
    out
}

/// Mixes in the maximally mixed state until both ρ and ρ^{T_A} are PSD.
fn make_feasible(m: &CMat, dims: &DimensionSpec) -> Result<CMat> {
    let d = m.nrows();
    let mut rho = (m + m.adjoint()).scale(0.5);
    let tr = crate::linalg::trace(&rho).re;
    rho = rho.unscale(tr);
    let lmin = eigh(&rho).min().min(eigh(&partial_transpose(&rho, dims, 0)?).min());
    if lmin < 0.0 {
        let s = -lmin / (1.0 / d as f64 - lmin);
        rho = rho.scale(1.0 - s) + CMat::identity(d, d).scale(s / d as f64);
    }
    Ok(rho)
}

#[derive(Debug, Clone)]
pub struct PptMax {
    pub value: f64,
    pub state: DensityMatrix,
    pub iterations: usize,
    /// The iteration cap was hit before the objective settled.
    pub warning: bool,
}

/// Largest Tr ρH over PPT states.
///
/// ADMM on the split ρ ∈ {density matrices}, Y = ρ^{T_A} ⪰ 0: each sweep is one
/// projection onto the density matrices, one onto the PSD cone and a dual update.
pub fn ppt_max(h: &HermitianOperator, dims: &DimensionSpec, tol: f64) -> Result<PptMax> {
    check_dims(h, dims)?;
    if dims.len() != 2 {
        return Err(Error::Invalid("PPT optimization needs a bipartite split".into()));
    }
    let d = h.dim();
    let scale = h.norm().max(1e-300);
    let hn = h.matrix().unscale(scale);
    let pt = |m: &CMat| partial_transpose(m, dims, 0);
    let mut x = CMat::identity(d, d).unscale(d as f64);
    let mut y = pt(&x)?;
    let mut u = CMat::zeros(d, d);
    let beta = 1.0;
    let cap = 100_000;
    let mut iterations = 0;
    let mut warning = true;
    let mut value = crate::linalg::trace_product(&x, &hn).re;
    while iterations < cap {
        iterations += 1;
        x = project_density(&(pt(&(&y - &u))? + hn.unscale(beta)));
        let xt = pt(&x)?;
        let y_prev = y;
        y = project_psd(&(&xt + &u));
        let primal = (&xt - &y).norm();
        u += &xt - &y;
        let dual = beta * (&y - &y_prev).norm();
        let v = crate::linalg::trace_product(&x, &hn).re;
        let change = (v - value).abs();
        value = v;
        if primal < 1e-10 && dual < 1e-10 && change < tol {
            warning = false;
            break;
        }
    }
    let rho = make_feasible(&x, dims)?;
    let value = crate::linalg::trace_product(&rho, h.matrix()).re;
    let state = DensityMatrix::with_trace_tolerance(HermitianOperator::hermitian_part(&rho), 1e-9)?;
    Ok(PptMax { value, state, iterations, warning })
}

/// W_PPT by direction sweep; support values come from feasible states, so the
/// outer half-spaces are marked heuristic.
pub fn ppt_numerical_range(
    ops: &[HermitianOperator],
    dims: &DimensionSpec,
    dirs: &[Direction],
    tol: f64,
) -> Result<ConvexBodyApprox> {
    let d = ops.first().ok_or_else(|| Error::Invalid("no operators".into()))?.dim();
    dims.check(d)?;
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    for n in dirs {
        let h = crate::linalg::combination(ops, n.as_slice())?;
        let r = ppt_max(&h, dims, tol)?;
        inner.push(ops.iter().map(|o| crate::linalg::trace_product(r.state.op().matrix(), o.matrix()).re).collect());
        outer.push((n.clone(), r.value));
    }
    Ok(ConvexBodyApprox {
        inner_vertices: inner,
        outer_halfspaces: outer,
        bounded: numrange::positively_spanning(dirs),
        heuristic_outer: true,
    })
}

/// Orthonormal (Tr G_i G_j = δ_ij) traceless Hermitian basis of size d.
pub fn traceless_basis(d: usize) -> Vec<HermitianOperator> {
    let mut out = Vec::with_capacity(d * d - 1);
    let s = libm::sqrt(0.5);
    for j in 0..d {
        for k in j + 1..d {
            let mut m = CMat::zeros(d, d);
            m[(j, k)] = c(s, 0.0);
            m[(k, j)] = c(s, 0.0);
            out.push(HermitianOperator::hermitian_part(&m));
            let mut m = CMat::zeros(d, d);
            m[(j, k)] = c(0.0, -s);
            m[(k, j)] = c(0.0, s);
            out.push(HermitianOperator::hermitian_part(&m));
        }
    }
    for l in 1..d {
        let norm = libm::sqrt((l * (l + 1)) as f64);
        let diag: Vec<f64> = (0..d)
            .map(|i| if i < l { 1.0 / norm } else if i == l { -(l as f64) / norm } else { 0.0 })
            .collect();
        out.push(HermitianOperator::diagonal(&diag));
    }
    out
}

/// G̃_i = −(mn)·(G_i ⊕ G_i^{T_A}) on C^{2mn}.
pub fn ppt_duality_operators(dims: &DimensionSpec) -> Result<Vec<HermitianOperator>> {
    if dims.len() != 2 {
        return Err(Error::Invalid("bipartite split required".into()));
    }
    let n = dims.total();
    let mut out = Vec::with_capacity(n * n - 1);
    for g in traceless_basis(n) {
        let gt = partial_transpose(g.matrix(), dims, 0)?;
        let mut m = CMat::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(g.matrix());
        m.view_mut((n, n), (n, n)).copy_from(&gt);
        out.push(HermitianOperator::hermitian_part(&m.scale(-(n as f64))));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    pub samples: usize,
    pub agreements: usize,
    pub ppt_states: usize,
    /// Largest |λ_min(ρ^{T_A})| among samples whose two verdicts disagree.
    pub worst_disagreement: f64,
}

/// PPT test vs. polar membership: x_i = Tr ρG_i lies in W(G̃)° iff ρ is PPT.
pub fn ppt_duality_check(dims: &DimensionSpec, samples: usize, seed: u64) -> Result<DualityReport> {
    let gt = ppt_duality_operators(dims)?;
    let basis = traceless_basis(dims.total());
    let n = dims.total();
    let mut r = rng::seeded(seed);
    let mut rep = DualityReport { samples, agreements: 0, ppt_states: 0, worst_disagreement: 0.0 };
    for s in 0..samples {
        // alternate between full-rank mixtures and low-rank states, both sides of the PPT border
        let rho = if s % 2 == 0 {
            let p = rng::pure_density(&mut r, n);
            let w = rng::gaussian(&mut r).abs().min(1.0);
            p.op().matrix().scale(w) + CMat::identity(n, n).scale((1.0 - w) / n as f64)
        } else {
            rng::density(&mut r, n).op().matrix().clone()
        };
        let x: Vec<f64> = basis.iter().map(|g| crate::linalg::trace_product(&rho, g.matrix()).re).collect();
        let lmin = eigh(&partial_transpose(&rho, dims, 0)?).min();
        let ppt = lmin >= -1e-10;
        let sup = crate::linalg::combination(&gt, &x)?.lambda_max();
        let polar = sup <= 1.0 + 1e-9;
        if ppt {
            rep.ppt_states += 1;
        }
        if ppt == polar {
            rep.agreements += 1;
        } else {
            rep.worst_disagreement = rep.worst_disagreement.max(lmin.abs());
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone)]
pub struct Schmidt2Max {
    pub value: f64,
    /// Orthogonal product vectors |α₁β₁⟩ and |α₂β₂⟩ (⟨α₁|α₂⟩ = ⟨β₁|β₂⟩ = 0).
    pub psi: ProductAnsatz,
    pub phi: ProductAnsatz,
    /// Optimal state cos θ |ψ⟩ + e^{iη} sin θ |φ⟩ up to the phase carried by the pair.
    pub theta: f64,
    /// The two-copy functional evaluated at (ψ, φ).
    pub chi: f64,
}

fn whitened_top(g: &CMat, a: &CMat) -> Option<(f64, CVec)> {
    let e = eigh(g);
    let top = e.max();
    let keep: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > 1e-12 * top).collect();
    if keep.is_empty() {
        return None;
    }
    let t = CMat::from_fn(g.nrows(), keep.len(), |r, col| e.vectors[(r, keep[col])] / libm::sqrt(e.values[keep[col]]));
    let m = t.adjoint() * a * &t;
    let ee = eigh(&((&m + m.adjoint()).scale(0.5)));
    let y = ee.top();
    Some((ee.max(), t * y))
}

/// Maximum of ⟨H⟩ over Schmidt-rank ≤ 2 pure states (multi-start alternating optimization).
pub fn schmidt2_max(h: &HermitianOperator, dims: &DimensionSpec, restarts: usize, seed: u64) -> Result<Schmidt2Max> {
    check_dims(h, dims)?;
    if dims.len() != 2 {
        return Err(Error::Invalid("Schmidt rank needs a bipartite split".into()));
    }
    let (m, n) = (dims.local_dims[0], dims.local_dims[1]);
    let mut r = rng::seeded(seed);
    let mut best: Option<(f64, CVec)> = None;
    for _ in 0..restarts.max(1) {
        // χ = a₁⊗b₁ + a₂⊗b₂; alternately optimize (a₁,a₂) and (b₁,b₂)
        let mut a = [rng::unit_vector(&mut r, m), rng::unit_vector(&mut r, m)];
        let mut b = [rng::unit_vector(&mut r, n), rng::unit_vector(&mut r, n)];
        let mut value = f64::NEG_INFINITY;
        for _ in 0..2000 {
            let before = value;
            // χ linear in (a₁, a₂): columns e_i⊗b_r
            let ba = CMat::from_fn(m * n, 2 * m, |row, col| {
                let (rr, i) = (col / m, col % m);
                if row / n == i { b[rr][row % n] } else { ZERO }
            });
            if let Some((v, x)) = whitened_top(&(ba.adjoint() * &ba), &(ba.adjoint() * h.matrix() * &ba)) {
                a = [x.rows(0, m).into_owned(), x.rows(m, m).into_owned()];
                value = v;
            }
            let bb = CMat::from_fn(m * n, 2 * n, |row, col| {
                let (rr, j) = (col / n, col % n);
                if row % n == j { a[rr][row / n] } else { ZERO }
            });
            if let Some((v, x)) = whitened_top(&(bb.adjoint() * &bb), &(bb.adjoint() * h.matrix() * &bb)) {
                b = [x.rows(0, n).into_owned(), x.rows(n, n).into_owned()];
                value = v;
            }
            if value - before <= 1e-13 * value.abs().max(1.0) {
                break;
            }
        }
        let chi = tensor_vec(&a[0], &b[0]) + tensor_vec(&a[1], &b[1]);
        let nrm = chi.norm();
        if nrm < 1e-300 {
            continue;
        }
        let chi = chi.unscale(nrm);
        let v = expect_vec(h, &chi);
        if best.as_ref().map_or(true, |bst| v > bst.0) {
            best = Some((v, chi));
        }
    }
    let (_, chi) = best.ok_or_else(|| Error::Invalid("all restarts degenerate".into()))?;
    // Schmidt form of the optimum
    let cm = CMat::from_fn(m, n, |i, j| chi[i * n + j]);
    let svd = cm.svd(true, true);
    let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let s1 = svd.singular_values[order[0]];
    let s2 = order.get(1).map(|&k| svd.singular_values[k]).unwrap_or(0.0);
    let pick = |k: usize| -> ProductAnsatz {
        let a = u.column(k).into_owned();
        let b = vt.row(k).transpose().into_owned();
        ProductAnsatz { factors: vec![a.unscale(a.norm()), b.unscale(b.norm())] }
    };
    let psi = pick(order[0]);
    let phi = if order.len() > 1 {
        pick(order[1])
    } else {
        let mut a = CVec::zeros(m);
        a[0] = ONE;
        ProductAnsatz { factors: vec![a, crate::linalg::basis(n, 0)] }
    };
    let (pv, fv) = (psi.vector(), phi.vector());
    let lam = lambda_plus(h, &pv, &fv);
    let chi_val = two_copy_chi(h, dims, &pv, &fv)?;
    if (lam - chi_val).abs() > 1e-8 * lam.abs().max(1.0) {
        return Err(Error::Inconsistent(format!("λ+ = {lam} but two-copy functional = {chi_val}")));
    }
    Ok(Schmidt2Max { value: lam, psi, phi, theta: libm::atan2(s2, s1), chi: chi_val })
}

/// Largest eigenvalue of H restricted to span{ψ, φ} (ψ ⟂ φ).
pub fn lambda_plus(h: &HermitianOperator, psi: &CVec, phi: &CVec) -> f64 {
    let a = expect_vec(h, psi);
    let b = expect_vec(h, phi);
    let x = psi.dotc(&(h.matrix() * phi)).norm_sqr();
    (a + b + libm::sqrt(4.0 * x + (a - b) * (a - b))) / 2.0
}

/// χ on the two-copy space: (⟨H₊⟩ + √(4⟨H⊗H·SWAP⟩ + ⟨H₋⟩²))/2 at ψ⊗φ.
pub fn two_copy_chi(h: &HermitianOperator, dims: &DimensionSpec, psi: &CVec, phi: &CVec) -> Result<f64> {
    let d = dims.total();
    check_dims(h, dims)?;
    let id = CMat::identity(d, d);
    let hp = tensor(h.matrix(), &id) + tensor(&id, h.matrix());
    let hm = tensor(h.matrix(), &id) - tensor(&id, h.matrix());
    let mut swap = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            swap[(j * d + i, i * d + j)] = ONE;
        }
    }
    let hh = tensor(h.matrix(), h.matrix()) * &swap;
    let v = tensor_vec(psi, phi);
    let e = |m: &CMat| v.dotc(&(m * &v)).re;
    let inner = 4.0 * e(&hh) + e(&hm) * e(&hm);
    Ok((e(&hp) + libm::sqrt(inner.max(0.0))) / 2.0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub vertices: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(Error::Invalid(format!("self-loop at {a}")));
            }
            if a >= vertices || b >= vertices {
                return Err(Error::Invalid(format!("edge ({a},{b}) out of range")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { vertices, edges: set })
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = BTreeSet::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.insert((a, b));
            }
        }
        Self { vertices: n, edges }
    }
}

pub const CLIQUE_MAX_VERTICES: usize = 16;

/// A_G on C^n ⊗ C^n: every edge (a,b) adds ½ on the (ab|ba) 2×2 block.
pub fn clique_matrix(g: &Graph) -> Result<HermitianOperator> {
    let n = g.vertices;
    if n == 0 || n > CLIQUE_MAX_VERTICES {
        return Err(Error::Invalid(format!("{n} vertices (1..={CLIQUE_MAX_VERTICES} supported)")));
    }
    let mut m = CMat::zeros(n * n, n * n);
    for &(a, b) in &g.edges {
        let (ab, ba) = (a * n + b, b * n + a);
        for &i in &[ab, ba] {
            for &j in &[ab, ba] {
                m[(i, j)] += c(0.5, 0.0);
            }
        }
    }
    HermitianOperator::new(m)
}
