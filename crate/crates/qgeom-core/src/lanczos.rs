//! Lowest eigenpairs of large Hermitian operators given as matrix-vector products.
//!
//! Lanczos with full reorthogonalization and explicit restarts; further
//! eigenpairs come from deflating the ones already found, so degenerate
//! levels are resolved one vector at a time.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::linalg::{CVec, ZERO};
use crate::rng;

pub struct LanczosConfig {
    pub max_krylov: usize,
    pub max_restarts: usize,
    /// Residual tolerance relative to `norm`.
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self { max_krylov: 160, max_restarts: 60, rel_tol: 1e-11, seed: 0x1a2b_3c4d }
    }
}

fn orthogonalize(w: &mut CVec, basis: &[CVec]) {
    for _ in 0..2 {
        for q in basis {
            let p = q.dotc(w);
            if p != ZERO {
                w.axpy(-p, q, crate::linalg::ONE);
            }
        }
    }
}

/// Lowest eigenpair of `apply` on the orthogonal complement of `deflate`.
pub fn lowest<F: Fn(&CVec) -> CVec>(
    apply: &F,
    dim: usize,
    norm: f64,
    deflate: &[CVec],
    cfg: &LanczosConfig,
) -> Option<(f64, CVec)> {
    if deflate.len() >= dim {
        return None;
    }
    let mut r = rng::seeded(cfg.seed ^ (deflate.len() as u64).wrapping_mul(0x9e37_79b9));
    let mut start = rng::unit_vector(&mut r, dim);
    let m_max = cfg.max_krylov.min(dim - deflate.len());
    let tol = cfg.rel_tol * norm.max(1e-300);
    let mut best: Option<(f64, CVec)> = None;
    for _ in 0..cfg.max_restarts {
        orthogonalize(&mut start, deflate);
        let n0 = start.norm();
        if n0 < 1e-12 {
            start = rng::unit_vector(&mut r, dim);
            continue;
        }
        let mut qs: Vec<CVec> = Vec::with_capacity(m_max);
        qs.push(start.unscale(n0));
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let result: (f64, CVec, f64);
        loop {
            let j = qs.len() - 1;
            let mut w = apply(&qs[j]);
            let a = qs[j].dotc(&w).re;
            alpha.push(a);
            orthogonalize(&mut w, &qs);
            orthogonalize(&mut w, deflate);
            let b = w.norm();
            let m = alpha.len();
            let check = m % 8 == 0 || m == m_max || b < tol;
            if check {
                let t = DMatrix::<f64>::from_fn(m, m, |p, q| {
                    if p == q {
                        alpha[p]
                    } else if p + 1 == q || q + 1 == p {
                        beta[p.min(q)]
                    } else {
                        0.0
                    }
                });
                let se = SymmetricEigen::new(t);
                let k = (0..m).min_by(|&x, &y| se.eigenvalues[x].total_cmp(&se.eigenvalues[y])).unwrap();
                let theta = se.eigenvalues[k];
                let s = se.eigenvectors.column(k);
                let resid = b * s[m - 1].abs();
                if resid < tol || b < tol || m == m_max {
                    let mut v = CVec::zeros(dim);
                    for (i, q) in qs.iter().enumerate() {
                        v.axpy(crate::linalg::c(s[i], 0.0), q, crate::linalg::ONE);
                    }
                    let nv = v.norm();
                    result = (theta, v.unscale(nv), resid);
                    break;
                }
            }
            beta.push(b);
            qs.push(w.unscale(b));
        }
        let (theta, v, resid) = result;
        if resid < tol {
            return Some((theta, v));
        }
        best = Some((theta, v.clone()));
        start = v;
    }
    best
}

/// Eigenpairs of the lowest level (all copies within `deg_tol`) plus the next distinct eigenvalue.
pub struct LowLevels {
    pub e0: f64,
    pub ground: Vec<CVec>,
    pub next: Option<f64>,
}

pub fn low_levels<F: Fn(&CVec) -> CVec>(
    apply: &F,
    dim: usize,
    norm: f64,
    deg_tol: f64,
    max_copies: usize,
    cfg: &LanczosConfig,
) -> LowLevels {
    let mut found: Vec<CVec> = Vec::new();
    let (e0, v0) = lowest(apply, dim, norm, &found, cfg).expect("non-empty space");
    found.push(v0);
    let mut next = None;
    while found.len() < dim {
        let (e, v) = match lowest(apply, dim, norm, &found, cfg) {
            Some(p) => p,
            None => break,
        };
        if e - e0 <= deg_tol && found.len() < max_copies {
            found.push(v);
        } else {
            if e - e0 > deg_tol {
                next = Some(e);
            }
            break;
        }
    }
    LowLevels { e0, ground: found, next }
}
