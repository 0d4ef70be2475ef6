//! Spin states as sums over irreducible blocks, Clebsch-Gordan coupling,
//! characteristic functions and covariant maps on spin systems.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, choi_of_map, eigh, spin_operators, CMat, CVec, HermitianOperator, ZERO};
use crate::rng;

/// A half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(pub i64);

impl HalfInt {
    pub fn from_twice(t: i64) -> Self {
        HalfInt(t)
    }

    pub fn int(n: i64) -> Self {
        HalfInt(2 * n)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Invalid(format!("not a half-integer: {s:?}"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().map_err(|_| bad())?;
                match d.trim() {
                    "2" => Ok(HalfInt(n)),
                    "1" => Ok(HalfInt(2 * n)),
                    _ => Err(bad()),
                }
            }
            None => s.parse::<i64>().map(HalfInt::int).map_err(|_| bad()),
        }
    }
}

fn check_jm(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.0 < 0 || m.0.abs() > j.0 || (j.0 - m.0) % 2 != 0 {
        return Err(Error::Invalid(format!("invalid quantum numbers j = {j}, m = {m}")));
    }
    Ok(())
}

/// Basis label (j, m, degeneracy tag).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SpinLabel {
    pub j: HalfInt,
    pub m: HalfInt,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinKet {
    amps: BTreeMap<SpinLabel, Complex64>,
}

impl SpinKet {
    /// Requires unit norm within 1e-12.
    pub fn new(entries: Vec<(SpinLabel, Complex64)>) -> Result<Self> {
        let ket = Self::unnormalized(entries)?;
        let n = ket.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("spin state has norm {n}")));
        }
        Ok(ket)
    }

    /// Rescales to unit norm.
    pub fn normalized(entries: Vec<(SpinLabel, Complex64)>) -> Result<Self> {
        let mut ket = Self::unnormalized(entries)?;
        let n = ket.norm();
        if n == 0.0 {
            return Err(Error::Invalid("zero spin state".into()));
        }
        for v in ket.amps.values_mut() {
            *v /= n;
        }
        Ok(ket)
    }

    fn unnormalized(entries: Vec<(SpinLabel, Complex64)>) -> Result<Self> {
        let mut amps = BTreeMap::new();
        for (l, a) in entries {
            check_jm(l.j, l.m)?;
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::Invalid("non-finite amplitude".into()));
            }
            *amps.entry(l).or_insert(ZERO) += a;
        }
        amps.retain(|_, a: &mut Complex64| *a != ZERO);
        Ok(Self { amps })
    }

    /// |j, m⟩ with an empty tag.
    pub fn basis(j: HalfInt, m: HalfInt) -> Result<Self> {
        Self::new(alloc::vec![(SpinLabel { j, m, tag: String::new() }, c(1.0, 0.0))])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&SpinLabel, &Complex64)> {
        self.amps.iter()
    }

    pub fn amplitude(&self, j: HalfInt, m: HalfInt, tag: &str) -> Complex64 {
        self.amps.get(&SpinLabel { j, m, tag: tag.into() }).copied().unwrap_or(ZERO)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amps.values().map(|a| a.norm_sqr()).sum::<f64>())
    }

    /// Common J_Z eigenvalue, if there is one.
    pub fn jz_eigenvalue(&self) -> Option<HalfInt> {
        let mut it = self.amps.keys().map(|l| l.m);
        let m = it.next()?;
        it.all(|x| x == m).then_some(m)
    }

    /// Weight on each j, summed over m and tags.
    pub fn j_weights(&self) -> BTreeMap<HalfInt, f64> {
        let mut out = BTreeMap::new();
        for (l, a) in &self.amps {
            *out.entry(l.j).or_insert(0.0) += a.norm_sqr();
        }
        out
    }

    /// Amplitude vectors per (j, tag), indexed m = j..−j.
    fn blocks(&self) -> BTreeMap<(HalfInt, &str), CVec> {
        let mut out: BTreeMap<(HalfInt, &str), CVec> = BTreeMap::new();
        for (l, a) in &self.amps {
            let n = (l.j.0 + 1) as usize;
            let v = out.entry((l.j, l.tag.as_str())).or_insert_with(|| CVec::zeros(n));
            v[((l.j.0 - l.m.0) / 2) as usize] = *a;
        }
        out
    }
}

fn factorial(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Squared coefficient with its sign, exactly: C = sign·√value.
pub fn clebsch_gordan_exact(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<(i8, BigRational)> {
    check_jm(j1, m1)?;
    check_jm(j2, m2)?;
    check_jm(j, m)?;
    let zero = (0, BigRational::zero());
    if m.0 != m1.0 + m2.0 || j.0 < (j1.0 - j2.0).abs() || j.0 > j1.0 + j2.0 || (j1.0 + j2.0 - j.0) % 2 != 0 {
        return Ok(zero);
    }
    // all of these are integers once the selection rules hold
    let h = |t: i64| t / 2;
    let (a, b, cc) = (h(j.0 + j1.0 - j2.0), h(j.0 - j1.0 + j2.0), h(j1.0 + j2.0 - j.0));
    let big = h(j1.0 + j2.0 + j.0) + 1;
    let pre = BigRational::new(
        BigInt::from(j.0 + 1) * factorial(a) * factorial(b) * factorial(cc),
        factorial(big),
    ) * BigRational::from_integer(
        factorial(h(j.0 + m.0))
            * factorial(h(j.0 - m.0))
            * factorial(h(j1.0 - m1.0))
            * factorial(h(j1.0 + m1.0))
            * factorial(h(j2.0 - m2.0))
            * factorial(h(j2.0 + m2.0)),
    );
    let mut sum = BigRational::zero();
    let lo = 0.max(h(j2.0 - j.0 - m1.0)).max(h(j1.0 - j.0 + m2.0));
    let hi = cc.min(h(j1.0 - m1.0)).min(h(j2.0 + m2.0));
    for k in lo..=hi {
        let den = factorial(k)
            * factorial(cc - k)
            * factorial(h(j1.0 - m1.0) - k)
            * factorial(h(j2.0 + m2.0) - k)
            * factorial(h(j.0 - j2.0 + m1.0) + k)
            * factorial(h(j.0 - j1.0 - m2.0) + k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return Ok(zero);
    }
    let sign = if sum.is_negative() { -1 } else { 1 };
    Ok((sign, &sum * &sum * pre))
}

/// ⟨j1 m1; j2 m2 | j m⟩ in the Condon-Shortley convention.
pub fn clebsch_gordan(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j: HalfInt, m: HalfInt) -> Result<f64> {
    let (s, sq) = clebsch_gordan_exact(j1, m1, j2, m2, j, m)?;
    Ok(s as f64 * libm::sqrt(sq.to_f64().unwrap_or(0.0)))
}

fn combined_tag(a: &SpinLabel, b: &SpinLabel) -> String {
    if a.tag.is_empty() && b.tag.is_empty() {
        format!("({},{})", a.j, b.j)
    } else {
        format!("({}[{}],{}[{}])", a.j, a.tag, b.j, b.tag)
    }
}

/// a ⊗ b written in the total-spin basis, tagged by the coupled pair.
pub fn spin_combine(a: &SpinKet, b: &SpinKet) -> SpinKet {
    let mut out: BTreeMap<SpinLabel, Complex64> = BTreeMap::new();
    for (la, xa) in &a.amps {
        for (lb, xb) in &b.amps {
            let m = HalfInt(la.m.0 + lb.m.0);
            let tag = combined_tag(la, lb);
            let mut j = HalfInt((la.j.0 - lb.j.0).abs());
            while j.0 <= la.j.0 + lb.j.0 {
                if m.0.abs() <= j.0 {
                    let cg = clebsch_gordan(la.j, la.m, lb.j, lb.m, j, m).expect("valid labels");
                    if cg != 0.0 {
                        *out.entry(SpinLabel { j, m, tag: tag.clone() }).or_insert(ZERO) += xa * xb * cg;
                    }
                }
                j = HalfInt(j.0 + 2);
            }
        }
    }
    out.retain(|_, v| v.norm() > 1e-15);
    SpinKet { amps: out }
}

/// U = exp(i v·J), stored through its spin-½ image w + i u·σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    pub v: [f64; 3],
}

impl GroupElement {
    pub fn identity() -> Self {
        Self { v: [0.0; 3] }
    }

    pub fn about_z(theta: f64) -> Self {
        Self { v: [0.0, 0.0, theta] }
    }

    /// (w, x, y, z) ↦ exp(i θ n·J) with w = cos(θ/2), (x,y,z) = sin(θ/2)·n.
    pub fn from_quaternion(q: [f64; 4]) -> Self {
        let s = libm::sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
        if s < 1e-300 {
            return if q[0] >= 0.0 { Self::identity() } else { Self { v: [0.0, 0.0, 2.0 * core::f64::consts::PI] } };
        }
        let theta = 2.0 * libm::atan2(s, q[0]);
        Self { v: [theta * q[1] / s, theta * q[2] / s, theta * q[3] / s] }
    }

    pub fn quaternion(&self) -> [f64; 4] {
        let t = libm::sqrt(self.v.iter().map(|x| x * x).sum::<f64>());
        if t == 0.0 {
            return [1.0, 0.0, 0.0, 0.0];
        }
        let s = libm::sin(t / 2.0) / t;
        [libm::cos(t / 2.0), s * self.v[0], s * self.v[1], s * self.v[2]]
    }

    /// U_{self}·U_{other}
    pub fn compose(&self, other: &Self) -> Self {
        let (a, b) = (self.quaternion(), other.quaternion());
        let (w1, u1, w2, u2) = (a[0], [a[1], a[2], a[3]], b[0], [b[1], b[2], b[3]]);
        let dot = u1[0] * u2[0] + u1[1] * u2[1] + u1[2] * u2[2];
        let cross = [
            u1[1] * u2[2] - u1[2] * u2[1],
            u1[2] * u2[0] - u1[0] * u2[2],
            u1[0] * u2[1] - u1[1] * u2[0],
        ];
        let mut q = [w1 * w2 - dot, 0.0, 0.0, 0.0];
        for k in 0..3 {
            q[k + 1] = w1 * u2[k] + w2 * u1[k] - cross[k];
        }
        Self::from_quaternion(q)
    }

    pub fn inverse(&self) -> Self {
        Self { v: [-self.v[0], -self.v[1], -self.v[2]] }
    }

    /// Haar-distributed element.
    pub fn haar<R: Rng + ?Sized>(r: &mut R) -> Self {
        Self::from_quaternion(rng::unit_quaternion(r))
    }

    /// exp(i v·J) on spin `two_j/2`.
    pub fn representation(&self, two_j: usize) -> CMat {
        let [jx, jy, jz] = spin_operators(two_j).expect("small spin");
        let gen = jx.matrix().scale(self.v[0]) + jy.matrix().scale(self.v[1]) + jz.matrix().scale(self.v[2]);
        let es = eigh(&gen);
        let n = two_j + 1;
        let mut u = CMat::zeros(n, n);
        for k in 0..n {
            let v = es.vector(k);
            let ph = c(libm::cos(es.values[k]), libm::sin(es.values[k]));
            u += (&v * v.adjoint()) * ph;
        }
        u
    }
}

/// χ(g) = ⟨s|U_g|s⟩.
pub fn characteristic_function(s: &SpinKet, g: &GroupElement) -> Complex64 {
    let mut reps: BTreeMap<HalfInt, CMat> = BTreeMap::new();
    let mut total = ZERO;
    for ((j, _), b) in s.blocks() {
        let u = reps.entry(j).or_insert_with(|| g.representation(j.0 as usize));
        total += b.dotc(&(&*u * &b));
    }
    total
}

/// State with the characteristic function of φ ⊗ ω, for J_Z eigenstates φ and ω.
pub fn jz_convert(phi: &SpinKet, omega: &SpinKet) -> Result<SpinKet> {
    let mp = phi.jz_eigenvalue().ok_or_else(|| Error::Precondition("first state is not a J_Z eigenstate".into()))?;
    let mo = omega.jz_eigenvalue().ok_or_else(|| Error::Precondition("second state is not a J_Z eigenstate".into()))?;
    let m = HalfInt(mp.0 + mo.0);
    let mut weights: BTreeMap<HalfInt, f64> = BTreeMap::new();
    for (la, xa) in &phi.amps {
        for (lb, xb) in &omega.amps {
            let mut j = HalfInt((la.j.0 - lb.j.0).abs().max(m.0.abs()));
            if (j.0 - m.0) % 2 != 0 {
                j = HalfInt(j.0 + 1);
            }
            while j.0 <= la.j.0 + lb.j.0 {
                let cg = clebsch_gordan(la.j, mp, lb.j, mo, j, m)?;
                *weights.entry(j).or_insert(0.0) += cg * cg * xa.norm_sqr() * xb.norm_sqr();
                j = HalfInt(j.0 + 2);
            }
        }
    }
    let entries = weights
        .into_iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|(j, w)| (SpinLabel { j, m, tag: String::new() }, c(libm::sqrt(w), 0.0)))
        .collect();
    SpinKet::normalized(entries)
}

/// Evidence that ψ → φ is impossible: Σ c̄_i c_k f(g_i g_k⁻¹) < 0.
#[derive(Debug, Clone)]
pub struct MarvianCertificate {
    pub elements: Vec<GroupElement>,
    pub coefficients: Vec<Complex64>,
    /// c† M c for the unit vector c.
    pub value: f64,
}

#[derive(Debug, Clone)]
pub enum MarvianVerdict {
    Consistent { min_eig: f64, max_eig: f64, dropped: usize },
    Impossible { certificate: MarvianCertificate, dropped: usize },
}

impl MarvianVerdict {
    pub fn is_impossible(&self) -> bool {
        matches!(self, MarvianVerdict::Impossible { .. })
    }

    /// Samples left out because χ_φ nearly vanished against an earlier one.
    pub fn dropped(&self) -> usize {
        match self {
            MarvianVerdict::Consistent { dropped, .. } | MarvianVerdict::Impossible { dropped, .. } => *dropped,
        }
    }
}

/// Sampled positivity test of g ↦ χ_ψ(g)/χ_φ(g). Never certifies that ψ → φ is possible.
pub fn marvian_necessary_test(psi: &SpinKet, phi: &SpinKet, samples: usize, seed: u64) -> MarvianVerdict {
    let mut r = rng::seeded(seed);
    let gs: Vec<GroupElement> = (0..samples).map(|_| GroupElement::haar(&mut r)).collect();
    let mut kept: Vec<usize> = Vec::new();
    let mut ratios: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
    let mut dropped = 0;
    'outer: for i in 0..samples {
        let mut row = Vec::with_capacity(kept.len() + 1);
        for &k in kept.iter().chain(core::iter::once(&i)) {
            let g = gs[i].compose(&gs[k].inverse());
            let cf = characteristic_function(phi, &g);
            if cf.norm() < 1e-8 {
                dropped += 1;
                continue 'outer;
            }
            row.push((k, characteristic_function(psi, &g) / cf));
        }
        for (k, v) in row {
            ratios.insert((i, k), v);
        }
        kept.push(i);
    }
    let n = kept.len();
    let mut m = CMat::zeros(n, n);
    for (a, &i) in kept.iter().enumerate() {
        for (b, &k) in kept.iter().enumerate().take(a + 1) {
            let v = ratios[&(i, k)];
            m[(a, b)] = v;
            if a != b {
                // f(g⁻¹) = conj f(g) for a positive definite function
                m[(b, a)] = v.conj();
            }
        }
    }
    let h = HermitianOperator::hermitian_part(&m);
    let es = eigh(h.matrix());
    let (min, max) = (es.min(), es.max());
    if min < -1e-6 * max.abs().max(1e-300) {
        let k = (0..n).min_by(|&a, &b| es.values[a].total_cmp(&es.values[b])).unwrap();
        let v = es.vector(k);
        return MarvianVerdict::Impossible {
            certificate: MarvianCertificate {
                elements: kept.iter().map(|&i| gs[i]).collect(),
                coefficients: v.iter().copied().collect(),
                value: min,
            },
            dropped,
        };
    }
    MarvianVerdict::Consistent { min_eig: min, max_eig: max, dropped }
}

/// ζ(ρ) = Σ_σ J_σ ρ J_σ / (j(j+1)) on spin `two_j/2`.
pub fn zeta(rho: &CMat, two_j: usize) -> Result<CMat> {
    if two_j == 0 || rho.nrows() != two_j + 1 || rho.ncols() != two_j + 1 {
        return Err(Error::Dimension(format!("ζ on spin {two_j}/2 needs a {}×{} matrix", two_j + 1, two_j + 1)));
    }
    let j = two_j as f64 / 2.0;
    let ops = spin_operators(two_j)?;
    let mut out = CMat::zeros(two_j + 1, two_j + 1);
    for op in &ops {
        out += op.matrix() * rho * op.matrix();
    }
    Ok(out.unscale(j * (j + 1.0)))
}

/// ρ ↦ x₀ρ + x₁ζ(ρ) + (1 − x₀ − x₁)ζ²(ρ) on spin 1.
pub fn zeta_map(x: (f64, f64), rho: &CMat) -> Result<CMat> {
    let z1 = zeta(rho, 2)?;
    let z2 = zeta(&z1, 2)?;
    Ok(rho.scale(x.0) + z1.scale(x.1) + z2.scale(1.0 - x.0 - x.1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaReport {
    pub is_cptp: bool,
    pub choi_min_eig: f64,
    /// max |Tr G(E_ij) − δ_ij| over matrix units.
    pub trace_defect: f64,
}

/// Complete positivity of the spin-1 covariant map with weights (x₀, x₁).
pub fn zeta_channel_simplex(two_j: usize, x: (f64, f64)) -> Result<ZetaReport> {
    if two_j != 2 {
        return Err(Error::Invalid("the covariant simplex is only implemented for j = 1".into()));
    }
    let choi = choi_of_map(3, |m| zeta_map(x, m).expect("3×3 input"));
    // Choi is normalized by 1/d; scale back so eigenvalues compare to an absolute tolerance
    let choi = choi.scale(3.0);
    let min = eigh(&HermitianOperator::hermitian_part(&choi).into_matrix()).min();
    let mut defect: f64 = 0.0;
    for i in 0..3 {
        for k in 0..3 {
            let mut e = CMat::zeros(3, 3);
            e[(i, k)] = c(1.0, 0.0);
            let t = zeta_map(x, &e)?.trace();
            let want = if i == k { 1.0 } else { 0.0 };
            defect = defect.max((t - c(want, 0.0)).norm());
        }
    }
    Ok(ZetaReport { is_cptp: min >= -1e-9, choi_min_eig: min, trace_defect: defect })
}

/// ρ ↦ (RρR†)ᵀ with R = exp(iπJ_Y), transpose in the J_Z basis.
pub fn spin_flip_transpose(rho: &CMat, two_j: usize) -> CMat {
    let r = GroupElement { v: [0.0, core::f64::consts::PI, 0.0] }.representation(two_j);
    (&r * rho * r.adjoint()).transpose()
}

impl fmt::Display for SpinKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (l, a) in &self.amps {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)|{},{}", a.re, a.im, l.j, l.m)?;
            if !l.tag.is_empty() {
                write!(f, ",{}", l.tag)?;
            }
            write!(f, "⟩")?;
        }
        Ok(())
    }
}
