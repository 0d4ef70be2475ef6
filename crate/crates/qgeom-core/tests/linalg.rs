use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qgeom_core::linalg::*;
use qgeom_core::rng;
use qgeom_core::wigner::WignerSystem;

fn dims2(a: usize, b: usize) -> DimensionSpec {
    DimensionSpec::bipartite(a, b)
}

#[test]
fn tensor_basics() {
    let i2 = CMat::identity(2, 2);
    assert_eq!(tensor(&i2, &CMat::identity(3, 3)), CMat::identity(6, 6));
    let z = pauli(3);
    let zz = HermitianOperator::new(tensor(&z, &z)).unwrap();
    let ev = zz.eigensystem().values;
    for (got, want) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
    }
    // row-major: |01⟩ is index 1
    let v = tensor_vec(&basis(2, 0), &basis(2, 1));
    assert_eq!(v[1], ONE);
}

#[test]
fn tensor_trace_multiplicative() {
    let mut r = rng::seeded(1);
    for _ in 0..10 {
        let a = rng::ginibre(&mut r, 3, 3);
        let b = rng::ginibre(&mut r, 2, 2);
        let lhs = trace(&tensor(&a, &b));
        let rhs = trace(&a) * trace(&b);
        assert!((lhs - rhs).norm() < 1e-10);
    }
}

#[test]
fn partial_trace_examples() {
    let mut r = rng::seeded(2);
    let rho = rng::density(&mut r, 2);
    let sigma = rng::density(&mut r, 3);
    let prod = tensor(rho.op().matrix(), sigma.op().matrix());
    let ta = partial_trace(&prod, &dims2(2, 3), 1).unwrap();
    assert!(max_abs(&(ta - rho.op().matrix())) < 1e-12);
    let tb = partial_trace(&prod, &dims2(2, 3), 0).unwrap();
    assert!(max_abs(&(tb - sigma.op().matrix())) < 1e-12);

    for d in 2..5 {
        let w = max_entangled(d);
        let marg = partial_trace(&(&w * w.adjoint()), &dims2(d, d), 1).unwrap();
        assert!(max_abs(&(marg - CMat::identity(d, d).unscale(d as f64))) < 1e-12);
    }
    assert!(partial_trace(&prod, &dims2(2, 3), 2).is_err());
}

#[test]
fn bell_partial_transpose() {
    let w = max_entangled(2);
    let bell = &w * w.adjoint();
    let pt = partial_transpose(&bell, &dims2(2, 2), 0).unwrap();
    // oracle: the partial transpose of the Bell projector is SWAP/2
    let mut swap = CMat::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            swap[(i * 2 + j, j * 2 + i)] = c(0.5, 0.0);
        }
    }
    assert!(max_abs(&(&pt - &swap)) < 1e-14);
    assert_abs_diff_eq!(eigh(&pt).min(), -0.5, epsilon = 1e-12);
    let back = partial_transpose(&pt, &dims2(2, 2), 0).unwrap();
    assert!(max_abs(&(back - bell)) < 1e-14);
}

#[test]
fn product_partial_transpose_is_state() {
    let mut r = rng::seeded(3);
    let a = rng::density(&mut r, 2);
    let b = rng::density(&mut r, 3);
    let prod = tensor(a.op().matrix(), b.op().matrix());
    let pt = partial_transpose(&prod, &dims2(2, 3), 0).unwrap();
    let want = tensor(&a.op().matrix().transpose(), b.op().matrix());
    assert!(max_abs(&(&pt - &want)) < 1e-14);
    assert!(DensityMatrix::from_matrix(pt).is_ok());
}

#[test]
fn expectation_examples() {
    let mut r = rng::seeded(4);
    let rho = rng::density(&mut r, 4);
    assert_abs_diff_eq!(expectation(&HermitianOperator::identity(4), &rho).unwrap(), 1.0, epsilon = 1e-12);
    let up = DensityMatrix::pure(&basis(2, 0));
    assert_abs_diff_eq!(expectation(&pauli_op(3), &up).unwrap(), 1.0, epsilon = 1e-15);
    let x = rng::hermitian(&mut r, 4);
    let y = rng::hermitian(&mut r, 4);
    let lhs = expectation(&x.scale(0.3).add(&y.scale(-1.7)), &rho).unwrap();
    let rhs = 0.3 * expectation(&x, &rho).unwrap() - 1.7 * expectation(&y, &rho).unwrap();
    assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    assert!(expectation(&pauli_op(1), &rho).is_err());
}

#[test]
fn distances() {
    let mut r = rng::seeded(5);
    let rho = rng::density(&mut r, 3);
    assert_abs_diff_eq!(bures_distance(&rho, &rho), 0.0, epsilon = 1e-7);
    for d in 2..=6 {
        let mix = CMat::identity(d, d).unscale(d as f64);
        let psi = rng::unit_vector(&mut r, d);
        let pure = &psi * psi.adjoint();
        let out = hs_distance(&mix, &pure);
        assert_abs_diff_eq!(out, ((d as f64 - 1.0) / d as f64).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(outradius(d), out, epsilon = 1e-12);
        let face = (CMat::identity(d, d) - &pure).unscale(d as f64 - 1.0);
        let inr = hs_distance(&mix, &face);
        assert_abs_diff_eq!(inr, (1.0 / (d as f64 * (d as f64 - 1.0))).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(inradius(d), inr, epsilon = 1e-12);
    }
}

#[test]
fn bures_qubit_oracle() {
    // commuting states: Bures reduces to the classical fidelity of the spectra
    let a = DensityMatrix::from_matrix(CMat::from_diagonal(&CVec::from_vec(vec![c(0.7, 0.0), c(0.3, 0.0)]))).unwrap();
    let b = DensityMatrix::from_matrix(CMat::from_diagonal(&CVec::from_vec(vec![c(0.2, 0.0), c(0.8, 0.0)]))).unwrap();
    let f = (0.7f64 * 0.2).sqrt() + (0.3f64 * 0.8).sqrt();
    assert_abs_diff_eq!(bures_distance(&a, &b), (2.0 * (1.0 - f)).sqrt(), epsilon = 1e-10);
}

#[test]
fn channels() {
    let mut r = rng::seeded(6);
    let rho = rng::density(&mut r, 3);
    let id = apply_channel(&KrausChannel::identity(3), &rho).unwrap();
    assert!(max_abs(&(id.op().matrix() - rho.op().matrix())) < 1e-14);

    // d² displacements with weight 1/d² depolarize completely
    let sys = WignerSystem::for_dimension(3).unwrap();
    let ops: Vec<CMat> =
        (0..9).map(|a| sys.displacement(a / 3, a % 3).unscale(3.0)).collect();
    let dep = KrausChannel::new(ops).unwrap();
    let out = apply_channel(&dep, &rho).unwrap();
    assert!(max_abs(&(out.op().matrix() - CMat::identity(3, 3).unscale(3.0))) < 1e-12);

    for _ in 0..10 {
        let u1 = rng::unitary(&mut r, 3).scale(0.5f64.sqrt());
        let u2 = rng::unitary(&mut r, 3).scale(0.5f64.sqrt());
        let ch = KrausChannel::new(vec![u1, u2]).unwrap();
        let s = apply_channel(&ch, &rng::density(&mut r, 3)).unwrap();
        assert!(eigh(s.op().matrix()).min() > -1e-12);
    }
    assert!(apply_channel(&KrausChannel::identity(2), &rho).is_err());
}

#[test]
fn choi_round_trip() {
    let w = max_entangled(3);
    let phi = choi_state(&KrausChannel::identity(3)).unwrap();
    assert!(max_abs(&(phi.op().matrix() - &w * w.adjoint())) < 1e-14);

    let transpose = choi_of_map(3, |m| m.transpose());
    assert!(eigh(&transpose).min() < -0.1);

    let mut r = rng::seeded(7);
    let k1 = rng::ginibre(&mut r, 3, 3);
    let k2 = rng::ginibre(&mut r, 3, 3);
    let s = (k1.adjoint() * &k1 + k2.adjoint() * &k2).clone();
    let inv_sqrt = psd_function(&s, |x| 1.0 / x.sqrt());
    let ch = KrausChannel::new(vec![&k1 * &inv_sqrt, &k2 * &inv_sqrt]).unwrap();
    let phi = choi_state(&ch).unwrap();
    assert_abs_diff_eq!(phi.op().trace(), 1.0, epsilon = 1e-12);
    for _ in 0..20 {
        let rho = rng::density(&mut r, 3);
        let direct = apply_channel(&ch, &rho).unwrap();
        let via = apply_via_choi(phi.op().matrix(), 3, rho.op().matrix()).unwrap();
        assert!(max_abs(&(via - direct.op().matrix())) < 1e-9);
    }
}

#[test]
fn spin_matrices() {
    let [jx, jy, jz] = spin_operators(1).unwrap();
    for k in 1..=3 {
        assert!(max_abs(&([&jx, &jy, &jz][k - 1].matrix() - pauli(k).scale(0.5))) < 1e-15);
    }
    let [_, _, jz] = spin_operators(2).unwrap();
    let want = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]));
    assert!(max_abs(&(jz.matrix() - want)) < 1e-15);
    for two_j in 1..=12usize {
        let [x, y, z] = spin_operators(two_j).unwrap();
        let j = two_j as f64 / 2.0;
        let cas = x.square().add(&y.square()).add(&z.square());
        let n = two_j + 1;
        assert!(max_abs(&(cas.matrix() - CMat::identity(n, n).scale(j * (j + 1.0)))) < 1e-10);
        let comm = commutator(x.matrix(), y.matrix());
        assert!(max_abs(&(comm - z.matrix() * I)) < 1e-12);
    }
}

#[test]
fn qubit_psd_criterion_grid() {
    let n = 20;
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                let f = |k: usize| -0.6 + 1.2 * k as f64 / (n - 1) as f64;
                let (x, y, z) = (f(a), f(b), f(cc));
                let m = CMat::identity(2, 2).scale(0.5) + pauli(1).scale(x) + pauli(2).scale(y) + pauli(3).scale(z);
                let r2 = x * x + y * y + z * z;
                if (r2 - 0.25).abs() < 1e-9 {
                    continue;
                }
                let psd = eigh(&m).min() >= -1e-12;
                assert_eq!(psd, r2 <= 0.25, "({x}, {y}, {z})");
            }
        }
    }
}

#[test]
fn rejects_bad_inputs() {
    let mut m = CMat::zeros(2, 2);
    m[(0, 1)] = c(1.0, 0.0);
    assert!(HermitianOperator::new(m).is_err());
    let neg = CMat::from_diagonal(&CVec::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
    assert!(DensityMatrix::from_matrix(neg).is_err());
    assert!(DimensionSpec::new(vec![2, 0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn partial_trace_preserves_trace(seed in any::<u64>(), a in 1usize..4, b in 1usize..4) {
        let mut r = rng::seeded(seed);
        let m = rng::ginibre(&mut r, a * b, a * b);
        let t = partial_trace(&m, &dims2(a, b), 0).unwrap();
        prop_assert!((trace(&t) - trace(&m)).norm() < 1e-10);
    }

    #[test]
    fn partial_trace_inverts_tensor(seed in any::<u64>(), a in 1usize..4, b in 1usize..4) {
        let mut r = rng::seeded(seed);
        let x = rng::ginibre(&mut r, a, a);
        let y = rng::ginibre(&mut r, b, b);
        let t = partial_trace(&tensor(&x, &y), &dims2(a, b), 1).unwrap();
        prop_assert!(max_abs(&(t - x.clone() * trace(&y))) < 1e-10);
    }

    #[test]
    fn partial_transpose_involutive(seed in any::<u64>(), which in 0usize..2) {
        let mut r = rng::seeded(seed);
        let m = rng::ginibre(&mut r, 6, 6);
        let d = dims2(2, 3);
        let back = partial_transpose(&partial_transpose(&m, &d, which).unwrap(), &d, which).unwrap();
        prop_assert!(max_abs(&(back - m)) < 1e-14);
    }
}
