//! Spin-1/2 chains, ground-state curves of H + λV and the jump bound on the spectral gap.
//!
//! If the ground state of H + λV jumps at λ*, the jump of ⟨H⟩ bounds the gap of H
//! from above. Operators are kept as Pauli sums; small ones are diagonalized
//! densely, larger ones with Lanczos.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lanczos::{self, LanczosConfig, LowLevels};
use crate::linalg::{c, eigh, expect_vec, CMat, CVec, HermitianOperator, ONE, ZERO};

pub const MAX_SITES: usize = 14;
/// Largest dimension solved with dense eigendecompositions.
pub const DENSE_MAX: usize = 128;
/// Largest dimension for which a dense matrix is materialized on request.
pub const DENSE_BUILD_MAX: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTerm {
    pub sites: Vec<usize>,
    pub paulis: Vec<Pauli>,
    pub coef: f64,
}

impl ChainTerm {
    pub fn new(sites: Vec<usize>, paulis: Vec<Pauli>, coef: f64) -> Self {
        Self { sites, paulis, coef }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinChainSpec {
    pub sites: usize,
    pub terms: Vec<ChainTerm>,
}

impl SpinChainSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 || self.sites > MAX_SITES {
            return Err(Error::Invalid(format!("{} sites (1..={MAX_SITES} supported)", self.sites)));
        }
        for t in &self.terms {
            if t.sites.len() != t.paulis.len() {
                return Err(Error::Invalid("term sites and labels differ in length".into()));
            }
            for (k, &s) in t.sites.iter().enumerate() {
                if s >= self.sites {
                    return Err(Error::Invalid(format!("site {s} out of range")));
                }
                if t.sites[..k].contains(&s) {
                    return Err(Error::Invalid(format!("site {s} repeated in a term")));
                }
            }
            if !t.coef.is_finite() {
                return Err(Error::Invalid("non-finite coefficient".into()));
            }
        }
        Ok(())
    }
}

/// Σ coef · i^{#Y} X^{xmask} Z^{zmask}; site 0 is the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    pub sites: usize,
    terms: Vec<(Complex64, u32, u32)>,
}

impl PauliSum {
    pub fn from_spec(spec: &SpinChainSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.sites;
        let mut terms = Vec::with_capacity(spec.terms.len());
        for t in &spec.terms {
            let (mut x, mut z, mut ny) = (0u32, 0u32, 0u32);
            for (&s, &p) in t.sites.iter().zip(&t.paulis) {
                let bit = 1u32 << (n - 1 - s);
                match p {
                    Pauli::I => {}
                    Pauli::X => x |= bit,
                    Pauli::Z => z |= bit,
                    Pauli::Y => {
                        x |= bit;
                        z |= bit;
                        ny += 1;
                    }
                }
            }
            let phase = match ny % 4 {
                0 => ONE,
                1 => c(0.0, 1.0),
                2 => -ONE,
                _ => c(0.0, -1.0),
            };
            terms.push((phase * t.coef, x, z));
        }
        Ok(Self { sites: n, terms })
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// self + a·other
    pub fn plus_scaled(&self, other: &PauliSum, a: f64) -> Result<PauliSum> {
        if self.sites != other.sites {
            return Err(Error::Dimension("chains differ in length".into()));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|&(k, x, z)| (k * a, x, z)));
        Ok(PauliSum { sites: self.sites, terms })
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        let mut out = CVec::zeros(v.len());
        for &(k, x, z) in &self.terms {
            if k == ZERO {
                continue;
            }
            for (b, &amp) in v.iter().enumerate() {
                if amp == ZERO {
                    continue;
                }
                let sign = if (b as u32 & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                out[b ^ x as usize] += k * amp * sign;
            }
        }
        out
    }

    /// Σ |coef|, an upper bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.0.norm()).sum()
    }

    pub fn to_dense(&self) -> Result<HermitianOperator> {
        let d = self.dim();
        if d > DENSE_BUILD_MAX {
            return Err(Error::Invalid(format!("dense matrix of dimension {d} refused")));
        }
        let mut m = CMat::zeros(d, d);
        for &(k, x, z) in &self.terms {
            for b in 0..d {
                let sign = if (b as u32 & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                m[(b ^ x as usize, b)] += k * sign;
            }
        }
        HermitianOperator::new(m)
    }
}

pub fn build_chain_sparse(spec: &SpinChainSpec) -> Result<PauliSum> {
    PauliSum::from_spec(spec)
}

/// Dense operator of a chain (dimension ≤ 2^12).
pub fn build_chain(spec: &SpinChainSpec) -> Result<HermitianOperator> {
    PauliSum::from_spec(spec)?.to_dense()
}

fn check_len(n: usize) -> Result<()> {
    if !(3..=MAX_SITES).contains(&n) {
        return Err(Error::Invalid(format!("chain length {n} outside 3..={MAX_SITES}")));
    }
    Ok(())
}

/// Open XY chain; `taper` scales the two outermost bonds on each side by 1/3 and 2/3.
pub fn xy_spec(n: usize, gamma: f64, taper: bool) -> Result<SpinChainSpec> {
    check_len(n)?;
    let mut terms = Vec::new();
    for s in 0..n - 1 {
        let mut f = 1.0;
        if taper {
            let edge = s.min(n - 2 - s);
            if edge == 0 {
                f = 1.0 / 3.0;
            } else if edge == 1 {
                f = 2.0 / 3.0;
            }
        }
        terms.push(ChainTerm::new(vec![s, s + 1], vec![Pauli::X, Pauli::X], f * (1.0 + gamma) / 2.0));
        terms.push(ChainTerm::new(vec![s, s + 1], vec![Pauli::Y, Pauli::Y], f * (1.0 - gamma) / 2.0));
    }
    Ok(SpinChainSpec { sites: n, terms })
}

/// Σ_n σx σz σy − σy σz σx over consecutive triples.
pub fn witness_v_spec(n: usize) -> Result<SpinChainSpec> {
    check_len(n)?;
    let mut terms = Vec::new();
    for s in 1..n - 1 {
        terms.push(ChainTerm::new(vec![s - 1, s, s + 1], vec![Pauli::X, Pauli::Z, Pauli::Y], 1.0));
        terms.push(ChainTerm::new(vec![s - 1, s, s + 1], vec![Pauli::Y, Pauli::Z, Pauli::X], -1.0));
    }
    Ok(SpinChainSpec { sites: n, terms })
}

pub fn xy_hamiltonian(n: usize, gamma: f64) -> Result<HermitianOperator> {
    build_chain(&xy_spec(n, gamma, false)?)
}

pub fn gap_witness_v(n: usize) -> Result<HermitianOperator> {
    build_chain(&witness_v_spec(n)?)
}

/// Either a dense matrix or a Pauli sum.
#[derive(Debug, Clone)]
pub enum ChainOperator {
    Dense(HermitianOperator),
    Sparse(PauliSum),
}

impl From<HermitianOperator> for ChainOperator {
    fn from(h: HermitianOperator) -> Self {
        ChainOperator::Dense(h)
    }
}

impl From<PauliSum> for ChainOperator {
    fn from(p: PauliSum) -> Self {
        ChainOperator::Sparse(p)
    }
}

impl ChainOperator {
    pub fn dim(&self) -> usize {
        match self {
            ChainOperator::Dense(h) => h.dim(),
            ChainOperator::Sparse(p) => p.dim(),
        }
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        match self {
            ChainOperator::Dense(h) => h.matrix() * v,
            ChainOperator::Sparse(p) => p.apply(v),
        }
    }

    pub fn expect(&self, v: &CVec) -> f64 {
        v.dotc(&self.apply(v)).re
    }

    fn dense(&self) -> Result<CMat> {
        match self {
            ChainOperator::Dense(h) => Ok(h.matrix().clone()),
            ChainOperator::Sparse(p) => Ok(p.to_dense()?.into_matrix()),
        }
    }

    /// self + λ·other
    pub fn plus_scaled(&self, other: &ChainOperator, lambda: f64) -> Result<ChainOperator> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!("{} vs {}", self.dim(), other.dim())));
        }
        match (self, other) {
            (ChainOperator::Sparse(a), ChainOperator::Sparse(b)) => Ok(ChainOperator::Sparse(a.plus_scaled(b, lambda)?)),
            _ => {
                let m = self.dense()? + other.dense()?.scale(lambda);
                Ok(ChainOperator::Dense(HermitianOperator::hermitian_part(&m)))
            }
        }
    }

    fn norm_bound(&self) -> f64 {
        match self {
            ChainOperator::Dense(h) => h.matrix().norm(),
            ChainOperator::Sparse(p) => p.norm_bound(),
        }
    }
}

/// Lowest level (with all degenerate copies) and the next distinct eigenvalue.
pub fn low_levels(op: &ChainOperator) -> Result<LowLevels> {
    let d = op.dim();
    let dense = matches!(op, ChainOperator::Dense(_)) && d <= DENSE_BUILD_MAX || d <= DENSE_MAX;
    if dense {
        let m = op.dense()?;
        let e = eigh(&m);
        let scale = e.values[0].abs().max(e.values[d - 1].abs());
        let tol = 1e-9 * scale.max(1e-300);
        let e0 = e.values[0];
        let k = e.values.iter().filter(|&&v| v - e0 <= tol).count();
        let ground = (0..k).map(|i| e.vector(i)).collect();
        let next = e.values.get(k).copied();
        return Ok(LowLevels { e0, ground, next });
    }
    let norm = op.norm_bound();
    let apply = |v: &CVec| op.apply(v);
    Ok(lanczos::low_levels(&apply, d, norm, 1e-9 * norm, 16, &LanczosConfig::default()))
}

/// Gap above the (possibly degenerate) ground level; 0 for a fully degenerate spectrum.
pub fn true_gap(h: &ChainOperator) -> Result<f64> {
    let l = low_levels(h)?;
    Ok(l.next.map(|e| e - l.e0).unwrap_or(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub lambda: f64,
    pub e0: f64,
    pub h: f64,
    pub v: f64,
    pub degenerate: bool,
    /// |⟨ψ_0|ψ_λ⟩|² against the λ = 0 ground state (maximized over degenerate copies).
    pub overlap0: f64,
}

#[derive(Debug, Clone)]
pub struct GroundCurve {
    pub samples: Vec<CurveSample>,
}

/// Ground state of H + λV: the copy with the smallest ⟨H⟩ when degenerate.
struct GroundPoint {
    e0: f64,
    state: CVec,
    degenerate: bool,
    ground: Vec<CVec>,
}

fn ground_point(h: &ChainOperator, v: &ChainOperator, lambda: f64) -> Result<GroundPoint> {
    let op = h.plus_scaled(v, lambda)?;
    let l = low_levels(&op)?;
    let state = if l.ground.len() == 1 {
        l.ground[0].clone()
    } else {
        let k = l.ground.len();
        let hb: Vec<CVec> = l.ground.iter().map(|g| h.apply(g)).collect();
        let comp = CMat::from_fn(k, k, |a, b| l.ground[a].dotc(&hb[b]));
        let e = eigh(&comp);
        let mut s = CVec::zeros(op.dim());
        for (a, g) in l.ground.iter().enumerate() {
            s.axpy(e.vectors[(a, 0)], g, ONE);
        }
        let n = s.norm();
        s.unscale(n)
    };
    Ok(GroundPoint { e0: l.e0, state, degenerate: l.ground.len() > 1, ground: l.ground })
}

fn overlap_with(psi0: &CVec, ground: &[CVec]) -> f64 {
    ground.iter().map(|g| psi0.dotc(g).norm_sqr()).sum::<f64>().min(1.0)
}

pub fn ground_curve(h: &ChainOperator, v: &ChainOperator, grid: &[f64]) -> Result<GroundCurve> {
    if h.dim() != v.dim() {
        return Err(Error::Dimension(format!("{} vs {}", h.dim(), v.dim())));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("λ grid must be increasing".into()));
    }
    let base = ground_point(h, v, 0.0)?;
    let mut samples = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let g = if lambda == 0.0 { ground_point(h, v, 0.0)? } else { ground_point(h, v, lambda)? };
        let overlap0 = if g.degenerate {
            overlap_with(&base.state, &g.ground)
        } else {
            base.state.dotc(&g.state).norm_sqr()
        };
        samples.push(CurveSample {
            lambda,
            e0: g.e0,
            h: h.expect(&g.state),
            v: v.expect(&g.state),
            degenerate: g.degenerate,
            overlap0,
        });
    }
    Ok(GroundCurve { samples })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub epsilon: f64,
    pub lambda_star: f64,
    pub true_gap: Option<f64>,
    pub consistent: bool,
    /// |⟨ψ_0|ψ_after⟩|² of the post-jump state.
    pub post_overlap: f64,
    /// H has a degenerate ground level; the bound is trivially 0.
    pub degenerate_ground: bool,
}

/// Offset past the refined crossing at which the post-jump branch is evaluated.
pub const JUMP_OFFSET: f64 = 1e-6;

/// Locates the first ground-state jump on the curve and bounds the gap of H by the jump in ⟨H⟩.
pub fn gap_upper_bound(h: &ChainOperator, v: &ChainOperator, curve: &GroundCurve) -> Result<GapReport> {
    let levels = low_levels(h)?;
    if levels.ground.len() > 1 {
        return Ok(GapReport {
            epsilon: 0.0,
            lambda_star: 0.0,
            true_gap: None,
            consistent: true,
            post_overlap: 1.0,
            degenerate_ground: true,
        });
    }
    let psi0 = levels.ground[0].clone();
    let e0 = levels.e0;
    let s = &curve.samples;
    if s.len() < 2 || s[0].lambda != 0.0 {
        return Err(Error::Precondition("curve must start at λ = 0 and have two samples".into()));
    }
    if s[1].overlap0 < 0.5 {
        return Err(Error::Precondition(
            "no initial plateau: the ground state changes within the first grid step".into(),
        ));
    }
    let k = s
        .iter()
        .position(|p| p.overlap0 < 0.5)
        .ok_or_else(|| Error::Precondition("no jump of the ground state within the λ grid".into()))?;
    let (mut lo, mut hi) = (s[k - 1].lambda, s[k].lambda);
    let overlap = |lambda: f64| -> Result<f64> {
        let g = ground_point(h, v, lambda)?;
        Ok(if g.degenerate { overlap_with(&psi0, &g.ground) } else { psi0.dotc(&g.state).norm_sqr() })
    };
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if overlap(mid)? < 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let after = ground_point(h, v, hi + JUMP_OFFSET * hi.abs().max(1.0))?;
    let h_after = h.expect(&after.state);
    let epsilon = (h_after - e0).max(0.0);
    let gap = levels.next.map(|e| e - e0);
    Ok(GapReport {
        epsilon,
        lambda_star: hi,
        true_gap: gap,
        consistent: gap.map_or(true, |g| g <= epsilon + 1e-6),
        post_overlap: psi0.dotc(&after.state).norm_sqr(),
        degenerate_ground: false,
    })
}

/// Checks whether ψ is a common eigenvector of X and Y and, if so, that
/// W(X,Y) = conv({(⟨X⟩_ψ, ⟨Y⟩_ψ)} ∪ W(X⊥, Y⊥)) on sampled directions.
pub fn cusp_decomposition_check(x: &HermitianOperator, y: &HermitianOperator, psi: &CVec) -> Result<bool> {
    if x.dim() != y.dim() || psi.len() != x.dim() {
        return Err(Error::Dimension("operator and vector sizes differ".into()));
    }
    let nrm = psi.norm();
    if (nrm - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid("ψ must be normalized".into()));
    }
    let d = x.dim();
    let scale = x.matrix().norm().max(y.matrix().norm()).max(1e-300);
    for op in [x, y] {
        let xv = op.matrix() * psi;
        let l = psi.dotc(&xv);
        if (xv - psi.map(|z| z * l)).norm() > 1e-8 * scale {
            return Ok(false);
        }
    }
    if d == 1 {
        return Ok(true);
    }
    let p0 = [expect_vec(x.matrix(), psi), expect_vec(y.matrix(), psi)];
    // orthonormal basis of the complement of ψ
    let proj = CMat::identity(d, d) - psi * psi.adjoint();
    let e = eigh(&proj);
    let basis = e.vectors.columns(1, d - 1).into_owned();
    let xr = HermitianOperator::hermitian_part(&(basis.adjoint() * x.matrix() * &basis));
    let yr = HermitianOperator::hermitian_part(&(basis.adjoint() * y.matrix() * &basis));
    for k in 0..64 {
        let t = 2.0 * core::f64::consts::PI * k as f64 / 64.0;
        let (cs, sn) = (libm::cos(t), libm::sin(t));
        let full = eigh(&(x.matrix().scale(cs) + y.matrix().scale(sn))).max();
        let perp = eigh(&(xr.matrix().scale(cs) + yr.matrix().scale(sn))).max();
        let split = perp.max(cs * p0[0] + sn * p0[1]);
        if (full - split).abs() > 1e-6 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Evenly spaced grid 0, L/S, …, L.
pub fn lambda_grid(lambda_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| lambda_max * k as f64 / steps.max(1) as f64).collect()
}
