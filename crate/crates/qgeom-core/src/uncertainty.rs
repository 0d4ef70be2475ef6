//! State-independent additive uncertainty bounds.
//!
//! min_ρ Δ²X + Δ²Y equals min over (x, y) of λ_min((X−x)² + (Y−y)²), and at the
//! optimum (x, y) are the expectation values of the minimizing eigenvector.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hull;
use crate::linalg::{eigh, expect_vec, CMat, CVec, DensityMatrix, HermitianOperator};
use crate::numrange::{self, ConvexBodyApprox, Direction};

/// Δ²X over ρ, clipped at 0.
pub fn variance(x: &HermitianOperator, rho: &DensityMatrix) -> Result<f64> {
    let m = crate::linalg::expectation(x, rho)?;
    let m2 = crate::linalg::expectation(&x.square(), rho)?;
    Ok((m2 - m * m).max(0.0))
}

fn variance_vec(x: &CMat, v: &CVec) -> f64 {
    let xv = x * v;
    let m = v.dotc(&xv).re;
    (xv.norm_squared() - m * m).max(0.0)
}

#[derive(Debug, Clone)]
pub struct VarianceBound {
    pub value: f64,
    pub minimizer: (f64, f64),
    pub certificate_state: DensityMatrix,
    pub certificate_vector: CVec,
}

struct Shifted {
    q: CMat,
    x: CMat,
    y: CMat,
    d: usize,
}

impl Shifted {
    fn new(x: &HermitianOperator, y: &HermitianOperator) -> Self {
        let q = x.matrix() * x.matrix() + y.matrix() * y.matrix();
        Self { q, x: x.matrix().clone(), y: y.matrix().clone(), d: x.dim() }
    }

    /// λ_min((X−a)² + (Y−b)²) and its eigenvector.
    fn eval(&self, a: f64, b: f64) -> (f64, CVec) {
        let mut m = &self.q - self.x.scale(2.0 * a) - self.y.scale(2.0 * b);
        for i in 0..self.d {
            m[(i, i)] += crate::linalg::c(a * a + b * b, 0.0);
        }
        let e = eigh(&m);
        (e.values[0], e.vector(0))
    }
}

/// Minimum of Δ²X + Δ²Y over all states: 41×41 grid over the spectral box, then local
/// refinement from the 5 best cells.
pub fn min_sum_variances(x: &HermitianOperator, y: &HermitianOperator) -> Result<VarianceBound> {
    if x.dim() != y.dim() {
        return Err(Error::Dimension(format!("{} vs {}", x.dim(), y.dim())));
    }
    let ex = eigh(x.matrix());
    let ey = eigh(y.matrix());
    let (x0, x1) = (ex.min(), ex.max());
    let (y0, y1) = (ey.min(), ey.max());
    let s = Shifted::new(x, y);
    const G: usize = 41;
    let at = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / (G - 1) as f64;
    let mut cells: Vec<(f64, f64, f64)> = Vec::with_capacity(G * G);
    for i in 0..G {
        for j in 0..G {
            let (a, b) = (at(x0, x1, i), at(y0, y1, j));
            cells.push((s.eval(a, b).0, a, b));
        }
    }
    cells.sort_by(|p, q| p.0.total_cmp(&q.0));
    let hx = (x1 - x0) / (G - 1) as f64;
    let hy = (y1 - y0) / (G - 1) as f64;
    let mut best: Option<(f64, f64, f64, CVec)> = None;
    for &(_, a, b) in cells.iter().take(5) {
        let (val, a, b, v) = polish(&s, a, b, hx.max(1e-3), hy.max(1e-3));
        if best.as_ref().map_or(true, |bb| val < bb.0) {
            best = Some((val, a, b, v));
        }
    }
    let (_, a, b, _) = best.expect("grid is non-empty");
    // final fixed-point passes so (x*, y*) are the certificate's expectations
    let (mut a, mut b) = (a, b);
    let mut v = s.eval(a, b).1;
    for _ in 0..200 {
        let na = expect_vec(&s.x, &v);
        let nb = expect_vec(&s.y, &v);
        let done = (na - a).abs() + (nb - b).abs() < 1e-15;
        a = na;
        b = nb;
        v = s.eval(a, b).1;
        if done {
            break;
        }
    }
    let value = s.eval(a, b).0.max(0.0);
    Ok(VarianceBound {
        value,
        minimizer: (a, b),
        certificate_state: DensityMatrix::pure(&v),
        certificate_vector: v,
    })
}

/// Alternating expectation updates (monotone descent) followed by a shrinking pattern search.
fn polish(s: &Shifted, a0: f64, b0: f64, hx: f64, hy: f64) -> (f64, f64, f64, CVec) {
    let (mut a, mut b) = (a0, b0);
    let (mut val, mut v) = s.eval(a, b);
    for _ in 0..300 {
        let na = expect_vec(&s.x, &v);
        let nb = expect_vec(&s.y, &v);
        let (nv, nvec) = s.eval(na, nb);
        let moved = (na - a).abs() + (nb - b).abs();
        if nv <= val {
            a = na;
            b = nb;
            val = nv;
            v = nvec;
        }
        if moved < 1e-14 || nv > val {
            break;
        }
    }
    let (mut sx, mut sy) = (hx, hy);
    while sx > 1e-13 || sy > 1e-13 {
        let mut improved = false;
        for (da, db) in [(sx, 0.0), (-sx, 0.0), (0.0, sy), (0.0, -sy), (sx, sy), (-sx, -sy), (sx, -sy), (-sx, sy)] {
            let (nv, nvec) = s.eval(a + da, b + db);
            if nv < val {
                a += da;
                b += db;
                val = nv;
                v = nvec;
                improved = true;
                break;
            }
        }
        if !improved {
            sx *= 0.5;
            sy *= 0.5;
        }
    }
    (val, a, b, v)
}

/// X² − (a+b)X + ab
pub fn sector_bound_operator(x: &HermitianOperator, a: f64, b: f64) -> Result<HermitianOperator> {
    if a > b {
        return Err(Error::Invalid(format!("sector ({a}, {b}) is reversed")));
    }
    Ok(x.square().sub(&x.scale(a + b)).shift(a * b))
}

/// Increasing breakpoints that contain the spectrum of an operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorPartition {
    pub breakpoints: Vec<f64>,
}

fn distinct_eigenvalues(x: &HermitianOperator) -> Vec<f64> {
    let mut vals = eigh(x.matrix()).values;
    vals.dedup_by(|a, b| (*a - *b).abs() <= 1e-10);
    vals
}

impl SectorPartition {
    pub fn new(breakpoints: Vec<f64>, x: &HermitianOperator) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("breakpoints must be strictly increasing".into()));
        }
        for l in distinct_eigenvalues(x) {
            if !breakpoints.iter().any(|&p| (p - l).abs() <= 1e-10) {
                return Err(Error::Invalid(format!("eigenvalue {l} is not a breakpoint")));
            }
        }
        Ok(Self { breakpoints })
    }

    /// Eigenvalues, midpoint-refined until δ < tol.
    pub fn refined(x: &HermitianOperator, tol: f64) -> Self {
        let ev = distinct_eigenvalues(x);
        let mut bp = vec![ev[0]];
        for w in ev.windows(2) {
            let gap = w[1] - w[0];
            let mut pieces = 1usize;
            while {
                let h = gap / pieces as f64 / 2.0;
                h * h >= tol
            } {
                pieces *= 2;
            }
            for k in 1..pieces {
                bp.push(w[0] + gap * k as f64 / pieces as f64);
            }
            bp.push(w[1]);
        }
        Self { breakpoints: bp }
    }

    /// Only the spectrum, one sector per eigenvalue gap.
    pub fn spectral(x: &HermitianOperator) -> Self {
        Self { breakpoints: distinct_eigenvalues(x) }
    }

    /// Sector end-points; a single breakpoint yields one zero-width sector.
    pub fn sectors(&self) -> Vec<(f64, f64)> {
        if self.breakpoints.len() == 1 {
            return vec![(self.breakpoints[0], self.breakpoints[0])];
        }
        self.breakpoints.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// (max gap / 2)²
    pub fn delta(&self) -> f64 {
        let g = self.breakpoints.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        (g / 2.0) * (g / 2.0)
    }

    /// Adds the midpoint of every sector.
    pub fn bisected(&self) -> Self {
        let mut bp = vec![self.breakpoints[0]];
        for w in self.breakpoints.windows(2) {
            bp.push(0.5 * (w[0] + w[1]));
            bp.push(w[1]);
        }
        Self { breakpoints: bp }
    }
}

#[derive(Debug, Clone)]
pub struct SectorSumBound {
    pub c: f64,
    pub delta: f64,
    /// Sector pair attaining c.
    pub argmin: (usize, usize),
}

/// c = min over sector pairs of λ_min(X_i + Y_j) and δ = δ_X + δ_Y.
pub fn sector_sum_bound(
    x: &HermitianOperator,
    y: &HermitianOperator,
    px: &SectorPartition,
    py: &SectorPartition,
) -> Result<SectorSumBound> {
    let px = SectorPartition::new(px.breakpoints.clone(), x)?;
    let py = SectorPartition::new(py.breakpoints.clone(), y)?;
    let xs: Vec<HermitianOperator> = px
        .sectors()
        .iter()
        .map(|&(a, b)| sector_bound_operator(x, a, b))
        .collect::<Result<_>>()?;
    let ys: Vec<HermitianOperator> = py
        .sectors()
        .iter()
        .map(|&(a, b)| sector_bound_operator(y, a, b))
        .collect::<Result<_>>()?;
    let mut c = f64::INFINITY;
    let mut arg = (0, 0);
    for (i, xi) in xs.iter().enumerate() {
        for (j, yj) in ys.iter().enumerate() {
            let l = eigh(&(xi.matrix() + yj.matrix())).min();
            if l < c {
                c = l;
                arg = (i, j);
            }
        }
    }
    Ok(SectorSumBound { c, delta: px.delta() + py.delta(), argmin: arg })
}

/// Union of W(X_i, Y_j) padded by [0, δ_X] × [0, δ_Y].
#[derive(Debug, Clone)]
pub struct UncertaintyCover {
    pub members: Vec<ConvexBodyApprox>,
    pub delta_x: f64,
    pub delta_y: f64,
}

impl UncertaintyCover {
    /// Membership of a variance pair in the padded union of the outer approximations.
    pub fn covers(&self, p: [f64; 2], tol: f64) -> bool {
        self.members.iter().any(|m| {
            m.outer_halfspaces.iter().all(|(n, h)| {
                let s = n.as_slice();
                let pad = (s[0] * self.delta_x).max(0.0) + (s[1] * self.delta_y).max(0.0);
                s[0] * p[0] + s[1] * p[1] <= h + pad + tol
            })
        })
    }

    /// Same test against the inner polygons (hull of vertices plus the box corners).
    pub fn covers_inner(&self, p: [f64; 2], tol: f64) -> bool {
        self.members.iter().any(|m| {
            let mut pts = Vec::new();
            for v in &m.inner_vertices {
                for (dx, dy) in [(0.0, 0.0), (self.delta_x, 0.0), (0.0, self.delta_y), (self.delta_x, self.delta_y)] {
                    pts.push([v[0] + dx, v[1] + dy]);
                }
            }
            hull::contains_2d(&hull::hull_2d(&pts), p, tol)
        })
    }
}

pub fn uncertainty_range_cover(
    x: &HermitianOperator,
    y: &HermitianOperator,
    px: &SectorPartition,
    py: &SectorPartition,
    directions: &[Direction],
) -> Result<UncertaintyCover> {
    let px = SectorPartition::new(px.breakpoints.clone(), x)?;
    let py = SectorPartition::new(py.breakpoints.clone(), y)?;
    let mut members = Vec::new();
    for &(a, b) in &px.sectors() {
        let xi = sector_bound_operator(x, a, b)?;
        for &(c, d) in &py.sectors() {
            let yj = sector_bound_operator(y, c, d)?;
            members.push(numrange::jnr_approximate(&[xi.clone(), yj], directions)?);
        }
    }
    Ok(UncertaintyCover { members, delta_x: px.delta(), delta_y: py.delta() })
}

/// Variance pair (Δ²X, Δ²Y) of a pure state.
pub fn variance_pair(x: &HermitianOperator, y: &HermitianOperator, v: &CVec) -> [f64; 2] {
    [variance_vec(x.matrix(), v), variance_vec(y.matrix(), v)]
}

/// Tangency check of the bound against sampled boundary states of W(X, Y, X²+Y²).
pub fn paraboloid_certificate(
    x: &HermitianOperator,
    y: &HermitianOperator,
    bound: &VarianceBound,
    directions: &[Direction],
) -> Result<bool> {
    let q = x.square().add(&y.square());
    let ops = [x.clone(), y.clone(), q];
    let (a, b) = bound.minimizer;
    let mut dirs: Vec<Direction> = directions.to_vec();
    dirs.push(Direction::new(vec![2.0 * a, 2.0 * b, -1.0])?);
    let mut min_gap = f64::INFINITY;
    for n in &dirs {
        let s = numrange::support(&ops, n)?;
        let p = &s.point;
        min_gap = min_gap.min(p[2] - p[0] * p[0] - p[1] * p[1]);
    }
    let v = &bound.certificate_vector;
    let cp = numrange::expectation_point(&ops, v);
    let attained = cp[2] - cp[0] * cp[0] - cp[1] * cp[1];
    Ok(min_gap >= bound.value - 1e-6 && (attained - bound.value).abs() <= 1e-6)
}
