use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qgeom_core::interconvert::*;
use qgeom_core::linalg::*;
use qgeom_core::{rng, Error};
use rand::Rng;

fn pv(offset: i64, w: &[f64]) -> ProbVector {
    ProbVector::new(offset, w.to_vec()).unwrap()
}

fn exact(offset: i64, w: &[&str]) -> ExactProbVector {
    ExactProbVector::new(offset, w.iter().map(|s| parse_rational(s).unwrap()).collect()).unwrap()
}

fn random_pv(r: &mut impl Rng, diam: usize) -> ProbVector {
    let mut w: Vec<f64> = (0..=diam).map(|_| r.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    ProbVector::new(r.gen_range(-3..4), w).unwrap()
}

/// Random vector with diameter in 0..=max.
fn random_pv_upto(r: &mut impl Rng, max: usize) -> ProbVector {
    let k = r.gen_range(0..=max);
    random_pv(r, k)
}

fn example_p() -> ProbVector {
    pv(1, &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0])
}

fn example_q() -> ProbVector {
    pv(0, &[0.5, 0.5])
}

#[test]
fn prob_vector_basics() {
    let p = pv(2, &[0.0, 0.5, 0.5, 0.0]);
    assert_eq!((p.offset, p.diam(), p.end()), (3, 1, 4));
    assert_eq!(p.get(2), 0.0);
    assert!(ProbVector::new(0, vec![0.5, 0.6]).is_err());
    assert!(ProbVector::new(0, vec![1.5, -0.5]).is_err());
    assert!(LadderState::new(0, vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
    let conv = convolve(&example_q(), &pv(1, &[1.0 / 3.0; 3]));
    assert!(conv.max_diff(&example_p()) < 1e-15);
}

#[test]
fn circulant_layout() {
    let id = circulant(&[1.0, 0.0, 0.0, 0.0]).unwrap();
    assert_eq!(id, nalgebra::DMatrix::<f64>::identity(4, 4));
    let p = circulant(&[0.0, 1.0, 0.0, 0.0]).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(p[(i, j)], if j == (i + 1) % 4 { 1.0 } else { 0.0 });
        }
    }
    assert!(circulant(&[]).is_err());

    let mut r = rng::seeded(41);
    let a: Vec<f64> = (0..7).map(|_| r.gen::<f64>()).collect();
    let b: Vec<f64> = (0..7).map(|_| r.gen::<f64>()).collect();
    let ca = circulant(&a).unwrap();
    let cb = circulant(&b).unwrap();
    assert!((&ca * &cb - &cb * &ca).abs().max() < 1e-12);
    let cab = circulant(&cyclic_convolve(&a, &b)).unwrap();
    assert!((&ca * &cb - cab).abs().max() < 1e-12);
}

#[test]
fn cyclic_majorize_examples() {
    let q = [0.5, 0.2, 0.1, 0.1, 0.1];
    match cyclic_majorize(&q, &q).unwrap() {
        CyclicOutcome::Majorized(w) => {
            assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-12);
            assert!(w[1..].iter().all(|x| x.abs() < 1e-12));
        }
        o => panic!("{o:?}"),
    }
    let shifted = cyclic_convolve(&[0.0, 1.0, 0.0, 0.0, 0.0], &q);
    match cyclic_majorize(&shifted, &q).unwrap() {
        CyclicOutcome::Majorized(w) => assert_abs_diff_eq!(w[1], 1.0, epsilon = 1e-12),
        o => panic!("{o:?}"),
    }
    let uniform = [0.2; 5];
    match cyclic_majorize(&uniform, &[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap() {
        CyclicOutcome::Majorized(w) => {
            for x in w {
                assert_abs_diff_eq!(x, 0.2, epsilon = 1e-12);
            }
        }
        o => panic!("{o:?}"),
    }
    assert!(matches!(cyclic_majorize(&q, &uniform).unwrap(), CyclicOutcome::Singular));
    assert!(matches!(cyclic_majorize(&uniform, &q).unwrap(), CyclicOutcome::Majorized(_)));
    assert!(matches!(cyclic_majorize(&[1.0, 0.0, 0.0, 0.0, 0.0], &q).unwrap(), CyclicOutcome::NotMajorized(_)));
    assert!(cyclic_majorize(&q, &[0.5, 0.5]).is_err());
}

#[test]
fn primes() {
    let ps: Vec<usize> = (0..30).filter(|&n| is_prime(n)).collect();
    assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    assert_eq!(next_prime_above(7), 11);
    assert_eq!(next_prime_above(11), 13);
}

#[test]
fn worked_example_exact() {
    let p = exact(1, &["1/6", "1/3", "1/3", "1/6"]);
    let q = exact(0, &["1/2", "1/2"]);
    let r = u1_majorized_exact(&p, &q).unwrap();
    assert!(r.convertible);
    let w = r.w.unwrap();
    // w = (0, 1/3, 1/3, 1/3) from site 0, trimmed to sites 1..3
    assert_eq!(w.offset, 1);
    assert_eq!(w.weights, vec![parse_rational("1/3").unwrap(); 3]);
    assert_eq!(r.embedding_dim, 11);

    let back = u1_majorized_exact(&q, &p).unwrap();
    assert!(!back.convertible);
}

#[test]
fn worked_example_kraus() {
    let (p, q) = (example_p(), example_q());
    let r = u1_majorized(&p, &q).unwrap();
    assert!(r.convertible);
    let w = r.w.unwrap();
    assert!(w.max_diff(&pv(1, &[1.0 / 3.0; 3])) < 1e-12);
    let k = build_u1_kraus(&p, &q, &w).unwrap();
    assert_eq!(k.window_offset, 0);
    assert_eq!(k.shifts, vec![-1, -2, -3]);
    let s = 0.5f64.sqrt();
    let want: [&[(usize, usize, f64)]; 3] =
        [&[(0, 1, 1.0), (1, 2, s)], &[(0, 2, s), (1, 3, s)], &[(0, 3, s), (1, 4, 1.0)]];
    for (m, entries) in k.channel.kraus.iter().zip(want) {
        let mut expect = CMat::zeros(5, 5);
        for &(i, j, v) in entries {
            expect[(i, j)] = c(v, 0.0);
        }
        assert!(max_abs(&(m - expect)) < 1e-12);
    }
    let psi = LadderState::from_probs(&p, &[]).dense(0, 5);
    let phi = LadderState::from_probs(&q, &[]).dense(0, 5);
    let out = k.channel.apply_raw(&(&psi * psi.adjoint()));
    let fid = phi.dotc(&(out * &phi)).re;
    assert!(fid >= 1.0 - 1e-9, "fidelity {fid}");
}

#[test]
fn identity_kraus() {
    let p = pv(0, &[0.2, 0.3, 0.5]);
    let k = build_u1_kraus(&p, &p, &ProbVector::delta(0)).unwrap();
    assert_eq!(k.channel.kraus.len(), 1);
    assert!(max_abs(&(&k.channel.kraus[0] - CMat::identity(3, 3))) < 1e-15);
    assert!(matches!(build_u1_kraus(&p, &example_q(), &ProbVector::delta(0)), Err(Error::Inconsistent(_))));
}

#[test]
fn random_convertible_pairs_have_channels() {
    let mut r = rng::seeded(42);
    for _ in 0..20 {
        let q = random_pv_upto(&mut r, 3);
        let w = random_pv_upto(&mut r, 3);
        let p = convolve(&w, &q);
        let psi = LadderState::from_probs(&p, &(0..p.weights.len()).map(|_| r.gen::<f64>() * 6.0).collect::<Vec<_>>());
        let phi = LadderState::from_probs(&q, &[]);
        let rep = u1_convertible(&psi, &phi).unwrap();
        assert!(rep.convertible);
        let got = rep.w.unwrap();
        assert!(got.max_diff(&w) < 1e-9);
        let k = build_u1_kraus(&p, &q, &got).unwrap();
        let lo = k.window_offset;
        let size = k.channel.kraus[0].nrows();
        // phases of ψ are undone by a diagonal unitary, so test against |√p⟩ directly
        let plain = LadderState::from_probs(&p, &[]).dense(lo, size);
        let target = phi.dense(lo, size);
        let out = k.channel.apply_raw(&(&plain * plain.adjoint()));
        assert!(target.dotc(&(out * &target)).re >= 1.0 - 1e-9);
    }
}

#[test]
fn singleton_targets_always_reachable() {
    let mut r = rng::seeded(43);
    for _ in 0..20 {
        let p = random_pv_upto(&mut r, 5);
        let rep = u1_majorized(&p, &ProbVector::delta(r.gen_range(-5..5))).unwrap();
        assert!(rep.convertible);
    }
}

#[test]
fn wider_target_is_unreachable() {
    let rep = u1_majorized(&example_q(), &example_p()).unwrap();
    assert!(!rep.convertible);
}

#[test]
fn accessible_worked_example() {
    let pairs = accessible_states(&example_p(), 1e-9).unwrap();
    assert!(pairs.len() <= 8);
    let half = pairs.iter().find(|a| a.q.diam() == 1 && a.q.max_diff(&pv(a.q.offset, &[0.5, 0.5])) < 1e-9);
    let half = half.expect("(1/2, 1/2) is accessible");
    assert!(half.w.max_diff(&pv(half.w.offset, &[1.0 / 3.0; 3])) < 1e-9);
    // the trivial factorizations are always present
    assert!(pairs.iter().any(|a| a.q.diam() == 0));
    assert!(pairs.iter().any(|a| a.q.max_diff(&example_p()) < 1e-9));

    let d = accessible_states(&ProbVector::delta(3), 1e-9).unwrap();
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].q, ProbVector::delta(3));
}

#[test]
fn polynomial_roots() {
    // (1 + x)(2 + x)(3 + x) = 6 + 11x + 6x² + x³
    let mut roots: Vec<f64> = poly_roots(&[6.0, 11.0, 6.0, 1.0]).iter().map(|z| z.re).collect();
    roots.sort_by(f64::total_cmp);
    for (got, want) in roots.iter().zip([-3.0, -2.0, -1.0]) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-10);
    }
}

#[test]
fn aux_examples() {
    let p = pv(0, &[0.2, 0.5, 0.3]);
    let w = aux_reachable(&p, &p, 2).unwrap().unwrap();
    assert_abs_diff_eq!(w.get(0), 1.0, epsilon = 1e-9);
    let w = aux_reachable(&p, &p.shifted(1), 1).unwrap().unwrap();
    assert_abs_diff_eq!(w.get(1), 1.0, epsilon = 1e-9);
    assert!(aux_reachable(&p, &p.shifted(2), 1).unwrap().is_none());
    let mix: Vec<f64> = (0..4).map(|i| 0.5 * p.get(i) + 0.5 * p.get(i - 1)).collect();
    let w = aux_reachable(&p, &pv(0, &mix), 1).unwrap().unwrap();
    assert_abs_diff_eq!(w.get(0), 0.5, epsilon = 1e-9);
    assert_abs_diff_eq!(w.get(1), 0.5, epsilon = 1e-9);
    assert!(aux_reachable(&p, &example_q(), 1).unwrap().is_none());
}

#[test]
fn property_suite_on_random_vectors() {
    let mut r = rng::seeded(44);
    for _ in 0..100 {
        let p = random_pv_upto(&mut r, 8);
        let pairs = accessible_states(&p, 1e-9).unwrap();
        assert!(pairs.len() <= 1 << p.diam());
        for a in &pairs {
            let rep = u1_majorized(&p, &a.q).unwrap();
            assert!(rep.convertible, "accessible target rejected");
            assert!(rep.w.unwrap().max_diff(&a.w) < 1e-6);
        }
    }
}

#[test]
fn embedding_independence() {
    let mut r = rng::seeded(45);
    for _ in 0..20 {
        let q = random_pv(&mut r, 3);
        let w = random_pv(&mut r, 2);
        let p = convolve(&w, &q);
        let n = p.diam().max(q.diam());
        let mut dim = next_prime_above(2 * n + 1);
        let mut seen = 0;
        while seen < 4 {
            if let CyclicOutcome::Majorized(v) = cyclic_majorize(&p.dense(p.offset, dim), &q.dense(q.offset, dim)).unwrap() {
                let got = ProbVector::with_tolerance(p.offset - q.offset, v, 1e-9).unwrap();
                assert!(got.max_diff(&w) < 1e-9, "N = {dim}");
                seen += 1;
            }
            dim = next_prime_above(dim);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transitivity(seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let c3 = random_pv_upto(&mut r, 2);
        let w2 = random_pv_upto(&mut r, 2);
        let w1 = random_pv_upto(&mut r, 2);
        let b = convolve(&w2, &c3);
        let a = convolve(&w1, &b);
        let ab = u1_majorized(&a, &b).unwrap();
        let bc = u1_majorized(&b, &c3).unwrap();
        let ac = u1_majorized(&a, &c3).unwrap();
        prop_assert!(ab.convertible && bc.convertible && ac.convertible);
        let composed = convolve(ab.w.as_ref().unwrap(), bc.w.as_ref().unwrap());
        prop_assert!(composed.max_diff(ac.w.as_ref().unwrap()) < 1e-9);
        prop_assert!(u1_majorized(&a, &a).unwrap().convertible);
    }

    #[test]
    fn phases_do_not_matter(seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let p = random_pv_upto(&mut r, 4);
        let q = random_pv_upto(&mut r, 3);
        let plain = u1_convertible(&LadderState::from_probs(&p, &[]), &LadderState::from_probs(&q, &[])).unwrap();
        let ph = |n: usize, r: &mut rng::SeededRng| (0..n).map(|_| r.gen::<f64>() * 6.3).collect::<Vec<_>>();
        let a = ph(p.weights.len(), &mut r);
        let b = ph(q.weights.len(), &mut r);
        let phased = u1_convertible(&LadderState::from_probs(&p, &a), &LadderState::from_probs(&q, &b)).unwrap();
        prop_assert_eq!(plain.convertible, phased.convertible);
        if plain.convertible {
            prop_assert!(p.diam() >= q.diam());
        }
    }
}
