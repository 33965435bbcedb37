//! Randomized invariants. Every model is drawn from a seed so failures shrink
//! to a reproducible case.

mod common;

use common::*;
use lpvlft::analysis::{find_structured_isomorphism, similarity_residual};
use lpvlft::format::{LftFile, ModelFile};
use lpvlft::model::{BlockStructure, LftModel, TruncatedSeries, Word};
use lpvlft::realization::{
    check_stability, hankel_realize, is_minimal, minimize_lft, representation_to_lft,
};
use lpvlft::transform::{lift_kron, minimal_sigma_psi, tilde_series};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

fn block_dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=2, 1..=3)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn lift_coefficients_are_kronecker_products(seed in any::<u64>(), n_p in 1usize..=2, n_psi in 1usize..=2) {
        let mut rng = rng(seed);
        let falpv = random_falpv(&mut rng, 2, 1, 1, n_p, n_psi, 1.0);
        let psi = random_psi(&mut rng, n_p, n_psi, 2);
        let series = psi.taylor(4).unwrap();
        let lifted = lift_kron(&falpv, &psi).unwrap();
        for w in Word::all_up_to(n_p, 4).into_iter().skip(1) {
            let expect = tilde_series(&falpv, &series, &w).unwrap();
            let got = oracle_io_map(&lifted, &w);
            prop_assert!(max_abs(&(got - &expect)) <= 1e-12 * (1.0 + max_abs(&expect)), "word {}", w);
        }
    }

    #[test]
    fn hankel_realization_reproduces_rational_series(
        seed in any::<u64>(),
        dims in prop::collection::vec(1usize..=2, 1..=2),
    ) {
        let mut rng = rng(seed);
        let m = random_lft(&mut rng, &dims, 2, 1);
        let order = dims.iter().sum::<usize>();
        let depth = 2 * order + 1;
        let series = TruncatedSeries::from_lft(&m, depth).unwrap();
        let rep = hankel_realize(&series, order).unwrap();
        prop_assert!(rep.state_dim() <= m.dim());
        let lft = representation_to_lft(&rep).unwrap();
        for w in Word::all_up_to(dims.len(), depth) {
            let expect = series.get(&w).unwrap();
            let got = lft.formal_io_map(&w).unwrap();
            prop_assert!(max_abs(&(got - &expect)) <= 1e-8 * (1.0 + max_abs(&expect)), "word {}", w);
        }
    }

    #[test]
    fn minimal_sigma_psi_is_minimal_and_no_larger_than_the_lift(seed in any::<u64>(), n_p in 1usize..=2) {
        let mut rng = rng(seed);
        let falpv = random_falpv(&mut rng, 2, 1, 1, n_p, 2, 1.0);
        let psi = random_psi(&mut rng, n_p, 2, 2);
        let lifted = lift_kron(&falpv, &psi).unwrap();
        let sp = minimal_sigma_psi(&falpv, &psi).unwrap();
        prop_assert!(is_minimal(sp.lft()));
        for (small, big) in sp.blocks().dims().iter().zip(lifted.blocks().dims()) {
            prop_assert!(small <= big);
        }
    }

    #[test]
    fn minimization_never_grows_and_is_idempotent(seed in any::<u64>(), dims in block_dims()) {
        let mut rng = rng(seed);
        let mut m = random_lft(&mut rng, &dims, 1, 1);
        // Zero a random column of B so that some models are not reachable.
        if rng.random_bool(0.5) {
            let mut b = m.b().clone();
            b.row_mut(0).fill(0.0);
            m = LftModel::new(m.blocks().clone(), m.a().clone(), b, m.c().clone(), m.d().clone()).unwrap();
        }
        let once = minimize_lft(&m).unwrap().lft;
        for (small, big) in once.blocks().dims().iter().zip(m.blocks().dims()) {
            prop_assert!(small <= big);
        }
        let twice = minimize_lft(&once).unwrap().lft;
        prop_assert_eq!(twice.blocks().dims(), once.blocks().dims());
        for w in Word::all_up_to(dims.len(), 3) {
            let diff = oracle_io_map(&m, &w) - oracle_io_map(&once, &w);
            prop_assert!(max_abs(&diff) < 1e-9, "word {}", w);
        }
    }

    #[test]
    fn certificates_are_valid_under_an_independent_eigen_solver(seed in any::<u64>(), dims in block_dims()) {
        let mut rng = rng(seed);
        let m = random_lft(&mut rng, &dims, 1, 1);
        let cert = check_stability(&m).expect("contractive A has a certificate");
        prop_assert!(cert.margin > 0.0);
        for block in &cert.blocks {
            prop_assert!(jacobi_eigenvalues(block).iter().all(|v| *v > 0.0));
        }
        let p = cert.p();
        let lyap = &p - m.a().transpose() * &p * m.a();
        prop_assert!(jacobi_eigenvalues(&lyap).iter().all(|v| *v > 0.0));
    }

    #[test]
    fn sigma_psi_embeds_the_scheduled_coefficients(seed in any::<u64>(), n_p in 1usize..=2, n_psi in 1usize..=3) {
        let mut rng = rng(seed);
        let falpv = random_falpv(&mut rng, 2, 1, 2, n_p, n_psi, 1.0);
        let psi = random_psi(&mut rng, n_p, n_psi, 2);
        let sp = minimal_sigma_psi(&falpv, &psi).unwrap();
        let p: Vec<f64> = (0..n_p).map(|_| rng.random_range(-0.5..=0.5)).collect();
        let psi_val: Vec<f64> = psi.lft().star_at_point(&p).unwrap().iter().copied().collect();
        let frozen = falpv.eval_matrices(&psi_val).unwrap();
        let mut expect = DMatrix::zeros(4, 3);
        expect.view_mut((0, 0), (2, 2)).copy_from(&frozen.a);
        expect.view_mut((0, 2), (2, 1)).copy_from(&frozen.b);
        expect.view_mut((2, 0), (2, 2)).copy_from(&frozen.c);
        expect.view_mut((2, 2), (2, 1)).copy_from(&frozen.d);
        let got = sp.eval(&p).unwrap() + falpv.coefficient_block(0);
        prop_assert!(max_abs(&(got - &expect)) <= 1e-9 * (1.0 + max_abs(&expect)));
    }

    #[test]
    fn similar_models_are_recognised(seed in any::<u64>(), dims in block_dims()) {
        let mut rng = rng(seed);
        let m = random_lft(&mut rng, &dims, 2, 2);
        prop_assume!(is_minimal(&m));
        let t: Vec<DMatrix<f64>> = dims.iter().map(|&n| random_invertible(&mut rng, n)).collect();
        let other = m.similarity(&t).unwrap();
        let found = find_structured_isomorphism(&m, &other).unwrap().expect("similar");
        prop_assert!(similarity_residual(&m, &other, &found) < 1e-8);
        for (a, b) in found.iter().zip(&t) {
            prop_assert!(max_abs(&(a - b)) <= 1e-6 * (1.0 + max_abs(b)));
        }
        let identity = find_structured_isomorphism(&m, &m).unwrap().expect("self");
        for block in identity {
            prop_assert!(max_abs(&(&block - DMatrix::identity(block.nrows(), block.ncols()))) < 1e-8);
        }
    }

    #[test]
    fn frozen_matrices_are_affine_in_psi(seed in any::<u64>(), n_psi in 1usize..=3) {
        let mut rng = rng(seed);
        let falpv = random_falpv(&mut rng, 2, 2, 1, 1, n_psi, 1.0);
        let v: Vec<f64> = (0..n_psi).map(|_| rng.random_range(-2.0..=2.0)).collect();
        let frozen = falpv.eval_matrices(&v).unwrap();
        let mut a = falpv.a(0).clone();
        let mut d = falpv.d(0).clone();
        for (l, vl) in v.iter().enumerate() {
            a += falpv.a(l + 1) * *vl;
            d += falpv.d(l + 1) * *vl;
        }
        prop_assert!(max_abs(&(frozen.a - a)) < 1e-14);
        prop_assert!(max_abs(&(frozen.d - d)) < 1e-14);
    }

    #[test]
    fn canonical_partition_round_trips(seed in any::<u64>(), dims in block_dims()) {
        let mut rng = rng(seed);
        let m = random_lft(&mut rng, &dims, 2, 3);
        let back = LftModel::from_partition(&m.canonical_partition(), m.d().clone()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn json_round_trip_is_bit_exact(
        values in prop::collection::vec(
            prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
            4,
        )
    ) {
        let m = LftModel::new(
            BlockStructure::new(vec![1]).unwrap(),
            DMatrix::from_element(1, 1, values[0]),
            DMatrix::from_element(1, 1, values[1]),
            DMatrix::from_element(1, 1, values[2]),
            DMatrix::from_element(1, 1, values[3]),
        )
        .unwrap();
        let text = ModelFile::Lft(LftFile::from_model(&m, None)).to_json().unwrap();
        let ModelFile::Lft(file) = ModelFile::from_json(&text).unwrap() else {
            panic!("kind changed");
        };
        let back = file.to_model().unwrap();
        for (x, y) in [m.a(), m.b(), m.c(), m.d()].iter().zip([back.a(), back.b(), back.c(), back.d()]) {
            prop_assert_eq!(x[(0, 0)].to_bits(), y[(0, 0)].to_bits());
        }
    }
}

#[test]
fn realization_survives_an_inaccurate_bidiagonal_svd() {
    // This seed gives a rank-2 Hankel matrix on which the plain SVD recomposes
    // with an error of order 1e-2.
    let mut rng = rng(13368343532040582309);
    let m = random_lft(&mut rng, &[1, 1], 2, 1);
    let series = TruncatedSeries::from_lft(&m, 5).unwrap();
    let rep = hankel_realize(&series, 2).unwrap();
    assert_eq!(rep.state_dim(), 2);
    for w in Word::all_up_to(2, 5) {
        let diff = rep.coefficient(&w).unwrap() - series.get(&w).unwrap();
        assert!(max_abs(&diff) < 1e-12, "word {w}");
    }
}
