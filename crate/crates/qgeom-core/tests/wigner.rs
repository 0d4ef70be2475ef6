use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qgeom_core::linalg::*;
use qgeom_core::rng;
use qgeom_core::wigner::*;
use rand::Rng;

fn unitary_err(u: &CMat) -> f64 {
    max_abs(&(u.adjoint() * u - CMat::identity(u.nrows(), u.nrows())))
}

fn conj(u: &CMat, rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_matrix(u * rho.op().matrix() * u.adjoint()).unwrap()
}

fn random_channel(r: &mut impl Rng, d: usize) -> KrausChannel {
    let ks: Vec<CMat> = (0..3).map(|_| rng::ginibre(r, d, d)).collect();
    let s = ks.iter().fold(CMat::zeros(d, d), |acc, k| acc + k.adjoint() * k);
    let inv = psd_function(&s, |x| 1.0 / x.sqrt());
    KrausChannel::new(ks.iter().map(|k| k * &inv).collect()).unwrap()
}

#[test]
fn rejects_unsupported_dimensions() {
    for d in [2, 4, 6, 9, 25, 45] {
        assert!(WignerSystem::for_dimension(d).is_err(), "d = {d}");
    }
    assert!(WignerSystem::new(&[3, 3]).is_err());
    assert!(WignerSystem::new(&[9]).is_err());
    assert!(WignerSystem::new(&[2]).is_err());
    let s = WignerSystem::for_dimension(15).unwrap();
    assert_eq!(s.primes(), &[3, 5]);
    assert_eq!(s.dim(), 15);
}

#[test]
fn clock_and_shift_relations() {
    for p in [3, 5, 7] {
        let s = WignerSystem::for_dimension(p).unwrap();
        assert!(max_abs(&(s.displacement(0, 0) - CMat::identity(p, p))) < 1e-15);
        let x = s.displacement(1, 0);
        let z = s.displacement(0, 1);
        for n in 0..p {
            assert!((x[((n + 1) % p, n)] - ONE).norm() < 1e-15);
        }
        let w = 2.0 * std::f64::consts::PI / p as f64;
        assert!(max_abs(&(&z * &x - (&x * &z) * c(w.cos(), w.sin()))) < 1e-12);
        let (mut xp, mut zp) = (CMat::identity(p, p), CMat::identity(p, p));
        for _ in 0..p {
            xp = &xp * &x;
            zp = &zp * &z;
        }
        assert!(max_abs(&(xp - CMat::identity(p, p))) < 1e-12);
        assert!(max_abs(&(zp - CMat::identity(p, p))) < 1e-12);
        for a in 0..p {
            for b in 0..p {
                assert!(unitary_err(&s.displacement(a, b)) < 1e-12);
            }
        }
    }
}

#[test]
fn displacement_group_law() {
    let s = WignerSystem::for_dimension(5).unwrap();
    let mut r = rng::seeded(51);
    for _ in 0..20 {
        let (a1, b1, a2, b2) = (r.gen_range(0..5), r.gen_range(0..5), r.gen_range(0..5), r.gen_range(0..5));
        let prod = s.displacement(a1, b1) * s.displacement(a2, b2);
        let sum = s.displacement(s.add(a1, a2), s.add(b1, b2));
        // prod = λ·sum with |λ| = 1
        let lambda = trace(&(sum.adjoint() * &prod)) / 5.0;
        assert_abs_diff_eq!(lambda.norm(), 1.0, epsilon = 1e-12);
        assert!(max_abs(&(prod - sum * lambda)) < 1e-12);
    }
}

#[test]
fn phase_point_identities() {
    for d in [3, 5, 15] {
        let s = WignerSystem::for_dimension(d).unwrap();
        let mut total = CMat::zeros(d, d);
        let mut max_off = 0.0f64;
        for a in 0..d * d {
            let (x, q) = (a / d, a % d);
            let pa = s.phase_point(x, q);
            assert_abs_diff_eq!(pa.trace(), 1.0, epsilon = 1e-10);
            total += pa.matrix();
            // covariance by construction
            let dq = s.displacement(x, q);
            let want = &dq * s.phase_point(0, 0).matrix() * dq.adjoint();
            assert!(max_abs(&(pa.matrix() - want)) < 1e-10);
            if d <= 5 {
                for b in 0..d * d {
                    let ip = trace_product(pa.matrix(), s.phase_point(b / d, b % d).matrix()).re;
                    let want = if a == b { d as f64 } else { 0.0 };
                    max_off = max_off.max((ip - want).abs());
                }
            }
        }
        assert!(max_off < 1e-10);
        assert!(max_abs(&(total - CMat::identity(d, d).scale(d as f64))) < 1e-9);
    }
}

#[test]
fn wigner_examples() {
    let s = WignerSystem::for_dimension(3).unwrap();
    let w = s.wigner_of(&DensityMatrix::maximally_mixed(3)).unwrap();
    for v in &w.values {
        assert_abs_diff_eq!(*v, 1.0 / 9.0, epsilon = 1e-14);
    }
    let zero = s.wigner_of(&DensityMatrix::pure(&basis(3, 0))).unwrap();
    for x in 0..3 {
        for q in 0..3 {
            let want = if x == 0 { 1.0 / 3.0 } else { 0.0 };
            assert_abs_diff_eq!(zero.get(x, q), want, epsilon = 1e-14);
        }
    }
    let (mx, _) = zero.marginals();
    assert_abs_diff_eq!(mx[0], 1.0, epsilon = 1e-14);

    let s5 = WignerSystem::for_dimension(5).unwrap();
    let mut v = CVec::zeros(5);
    v[0] = c(0.5f64.sqrt(), 0.0);
    v[1] = c(0.5f64.sqrt(), 0.0);
    let w = s5.wigner_of(&DensityMatrix::pure(&v)).unwrap();
    assert!(w.min() < -0.01, "min {}", w.min());
    assert_abs_diff_eq!(w.total(), 1.0, epsilon = 1e-12);
    assert!(s5.wigner_of(&DensityMatrix::maximally_mixed(3)).is_err());
}

#[test]
fn marginals_are_basis_distributions() {
    let mut r = rng::seeded(52);
    for d in [3, 5, 15] {
        let s = WignerSystem::for_dimension(d).unwrap();
        // eigenbasis of the shift: the columns of the (product) Fourier matrix
        let mut f = CMat::identity(1, 1);
        for &p in s.primes() {
            let w = 2.0 * std::f64::consts::PI / p as f64;
            let fp = CMat::from_fn(p, p, |n, k| c((w * (n * k) as f64).cos(), (w * (n * k) as f64).sin()) / (p as f64).sqrt());
            f = f.kronecker(&fp);
        }
        for _ in 0..5 {
            let rho = rng::density(&mut r, d);
            let w = s.wigner_of(&rho).unwrap();
            let (mx, mq) = w.marginals();
            let m = rho.op().matrix();
            let fx = f.adjoint() * m * &f;
            for k in 0..d {
                assert_abs_diff_eq!(mx[k], m[(k, k)].re, epsilon = 1e-10);
                assert_abs_diff_eq!(mq[k], fx[(k, k)].re, epsilon = 1e-10);
            }
        }
    }
}

#[test]
fn round_trip_and_covariance() {
    let mut r = rng::seeded(53);
    for d in [3, 5, 15] {
        let s = WignerSystem::for_dimension(d).unwrap();
        for _ in 0..50 {
            let rho = rng::density(&mut r, d);
            let w = s.wigner_of(&rho).unwrap();
            assert_abs_diff_eq!(w.total(), 1.0, epsilon = 1e-10);
            let back = s.state_of(&w).unwrap();
            assert!(max_abs(&(back.op().matrix() - rho.op().matrix())) < 1e-10);
        }
        let rho = rng::density(&mut r, d);
        let w = s.wigner_of(&rho).unwrap();
        for _ in 0..5 {
            let (a, b) = (r.gen_range(0..d), r.gen_range(0..d));
            let moved = s.wigner_of(&conj(&s.displacement(a, b), &rho)).unwrap();
            for x in 0..d {
                for q in 0..d {
                    assert_abs_diff_eq!(moved.get(s.add(x, a), s.add(q, b)), w.get(x, q), epsilon = 1e-10);
                }
            }
        }
    }
}

#[test]
fn invalid_table_is_not_a_state() {
    let s = WignerSystem::for_dimension(3).unwrap();
    let mut values = vec![0.0; 9];
    values[0] = 1.5;
    values[4] = -0.5;
    assert!(s.state_of(&WignerTable { primes: vec![3], values }).is_err());
    assert!(s.state_of(&WignerTable { primes: vec![5], values: vec![0.04; 25] }).is_err());
}

#[test]
fn transition_examples() {
    let s = WignerSystem::for_dimension(3).unwrap();
    let t = s.channel_transition(&KrausChannel::identity(3)).unwrap();
    assert!((t - nalgebra::DMatrix::<f64>::identity(9, 9)).abs().max() < 1e-12);

    let (a, b) = (1, 2);
    let t = s.channel_transition(&KrausChannel::new(vec![s.displacement(a, b)]).unwrap()).unwrap();
    for x in 0..3 {
        for q in 0..3 {
            for y in 0..3 {
                for p in 0..3 {
                    let want = if y == s.add(x, a) && p == s.add(q, b) { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(t[(y * 3 + p, x * 3 + q)], want, epsilon = 1e-12);
                }
            }
        }
    }

    let dep = s.displacement_mixture(&[1.0; 9]).unwrap();
    let t = s.channel_transition(&dep).unwrap();
    assert!(t.iter().all(|v| (v - 1.0 / 9.0).abs() < 1e-12));
    assert!(s.channel_transition(&KrausChannel::identity(5)).is_err());
    assert!(s.displacement_mixture(&[0.0; 9]).is_err());
    assert!(s.displacement_mixture(&[-1.0; 9]).is_err());
}

#[test]
fn transition_matches_direct_evaluation() {
    let mut r = rng::seeded(54);
    for d in [3, 5, 15] {
        let s = WignerSystem::for_dimension(d).unwrap();
        let ch = random_channel(&mut r, d);
        let t = s.channel_transition(&ch).unwrap();
        for col in 0..d * d {
            assert_abs_diff_eq!(t.column(col).sum(), 1.0, epsilon = 1e-9);
        }
        for _ in 0..10 {
            let rho = rng::density(&mut r, d);
            let direct = s.wigner_of(&apply_channel(&ch, &rho).unwrap()).unwrap();
            let moved = s.transport(&t, &s.wigner_of(&rho).unwrap());
            let err = direct.values.iter().zip(&moved.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "d = {d}: {err:e}");
        }
    }
}

#[test]
fn convertibility_examples() {
    let s = WignerSystem::for_dimension(5).unwrap();
    let mut r = rng::seeded(55);
    let sigma = rng::density(&mut r, 5);
    let k = s.wh_convertible(&sigma, &sigma).unwrap().unwrap();
    assert_abs_diff_eq!(k.get(0, 0), 1.0, epsilon = 1e-9);

    let rho = conj(&s.displacement(2, 3), &sigma);
    let k = s.wh_convertible(&rho, &sigma).unwrap().unwrap();
    assert_abs_diff_eq!(k.get(2, 3), 1.0, epsilon = 1e-9);

    let pure = rng::pure_density(&mut r, 5);
    let twirl = apply_channel(&s.displacement_mixture(&[1.0; 25]).unwrap(), &pure).unwrap();
    let k = s.wh_convertible(&twirl, &pure).unwrap().unwrap();
    for v in &k.values {
        assert_abs_diff_eq!(*v, 1.0 / 25.0, epsilon = 1e-9);
    }
    // displacement mixtures cannot purify
    assert!(s.wh_convertible(&pure, &twirl).unwrap().is_none());
}

#[test]
fn planted_kernels_are_recovered() {
    let mut r = rng::seeded(56);
    for (i, d) in [3, 5, 15].iter().cycle().take(20).enumerate() {
        let s = WignerSystem::for_dimension(*d).unwrap();
        let sigma = rng::density(&mut r, *d);
        let n = d * d;
        // sparse kernels exercise the clipping; dense ones the general case
        let mut planted: Vec<f64> = (0..n).map(|_| if i % 2 == 0 && r.gen::<f64>() < 0.7 { 0.0 } else { r.gen::<f64>() }).collect();
        planted[r.gen_range(0..n)] += 0.5;
        let sum: f64 = planted.iter().sum();
        let planted: Vec<f64> = planted.iter().map(|v| v / sum).collect();
        let rho = apply_channel(&s.displacement_mixture(&planted).unwrap(), &sigma).unwrap();
        let k = s.wh_convertible(&rho, &sigma).unwrap().expect("planted kernel");
        let err = k.values.iter().zip(&planted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "instance {i}, d = {d}: {err:e}");
    }
}

#[test]
fn fourier_diagonalizes_convolution() {
    let s = WignerSystem::for_dimension(15).unwrap();
    let mut r = rng::seeded(57);
    let a: Vec<f64> = (0..225).map(|_| r.gen::<f64>()).collect();
    let b: Vec<f64> = (0..225).map(|_| r.gen::<f64>()).collect();
    let conv = s.fourier(&s.convolve(&a, &b));
    let (fa, fb) = (s.fourier(&a), s.fourier(&b));
    for i in 0..225 {
        assert!((conv[i] - fa[i] * fb[i]).norm() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn group_arithmetic(a in 0usize..15, b in 0usize..15, c2 in 0usize..15) {
        let s = WignerSystem::for_dimension(15).unwrap();
        prop_assert_eq!(s.add(a, b), s.add(b, a));
        prop_assert_eq!(s.add(s.add(a, b), c2), s.add(a, s.add(b, c2)));
        prop_assert_eq!(s.sub(s.add(a, b), b), a);
        prop_assert_eq!(s.add(a, s.neg(a)), 0);
        prop_assert_eq!(s.from_digits(&s.digits(a)), a);
    }

    #[test]
    fn wigner_is_linear_and_normalized(seed in any::<u64>(), t in 0.0f64..1.0) {
        let mut r = rng::seeded(seed);
        let s = WignerSystem::for_dimension(5).unwrap();
        let a = rng::density(&mut r, 5);
        let b = rng::density(&mut r, 5);
        let mix = DensityMatrix::from_matrix(a.op().matrix().scale(t) + b.op().matrix().scale(1.0 - t)).unwrap();
        let (wa, wb, wm) = (s.wigner_of(&a).unwrap(), s.wigner_of(&b).unwrap(), s.wigner_of(&mix).unwrap());
        for i in 0..25 {
            prop_assert!((wm.values[i] - t * wa.values[i] - (1.0 - t) * wb.values[i]).abs() < 1e-12);
        }
        prop_assert!((wm.total() - 1.0).abs() < 1e-10);
    }
}
