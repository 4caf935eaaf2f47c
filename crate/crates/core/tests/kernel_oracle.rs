mod common;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnkernel::kernel::{inner, DenseOracle};
use tnkernel::mps::{product_weights, random_mps, uniform_mps};
use tnkernel::{FrequencyAxis, FrequencyLattice, KernelEngine, Splitting};

fn engine(d: usize, m: usize, bond: usize, seed: u64) -> (FrequencyLattice, tnkernel::WeightMps, KernelEngine) {
    let lat = FrequencyLattice::integer(d, m).unwrap();
    let w = random_mps(&lat, bond, seed).unwrap();
    let e = KernelEngine::new(lat.clone(), &w).unwrap();
    (lat, w, e)
}

#[test]
fn matches_brute_force_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..12 {
        let d = rng.random_range(1..=4);
        let (lat, w, e) = engine(d, rng.random_range(1..=2), rng.random_range(1..=3), seed);
        for _ in 0..5 {
            let x = common::random_point(&mut rng, d, 3.0);
            let y = common::random_point(&mut rng, d, 3.0);
            let want = common::kernel(&lat, &w, &x, &y);
            assert!((e.eval_kernel(&x, &y).unwrap() - want).abs() <= 1e-10);
            assert!((e.eval_kernel_etk(&x, &y).unwrap() - want).abs() <= 1e-10);
        }
    }
}

#[test]
fn non_integer_axes() {
    let axis = FrequencyAxis::from_spectra(&[vec![0.0, 0.7], vec![-0.5, 0.5]]).unwrap();
    let lat = FrequencyLattice::new(vec![axis, FrequencyAxis::integer(1)]).unwrap();
    let w = random_mps(&lat, 2, 17).unwrap();
    let e = KernelEngine::new(lat.clone(), &w).unwrap();
    let (x, y) = ([0.3, -1.2], [2.2, 0.4]);
    let want = common::kernel(&lat, &w, &x, &y);
    assert!((e.eval_kernel(&x, &y).unwrap() - want).abs() <= 1e-10);
}

#[test]
fn symmetric_and_normalized() {
    let (_, _, e) = engine(4, 2, 3, 21);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let x = common::random_point(&mut rng, 4, 5.0);
        let y = common::random_point(&mut rng, 4, 5.0);
        let k = e.eval_kernel(&x, &y).unwrap();
        assert!((k - e.eval_kernel(&y, &x).unwrap()).abs() <= 1e-12);
        assert!((e.eval_kernel(&x, &x).unwrap() - 1.0).abs() <= 1e-12);
        assert!(k.abs() <= 1.0 + 1e-12);
    }
}

#[test]
fn shift_invariant() {
    let (_, _, e) = engine(3, 1, 2, 22);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let x = common::random_point(&mut rng, 3, 4.0);
        let y = common::random_point(&mut rng, 3, 4.0);
        let delta = common::random_point(&mut rng, 3, 10.0);
        let xs: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + b).collect();
        let ys: Vec<f64> = y.iter().zip(&delta).map(|(a, b)| a + b).collect();
        assert!((e.eval_kernel(&x, &y).unwrap() - e.eval_kernel(&xs, &ys).unwrap()).abs() <= 1e-9);
    }
}

#[test]
fn gram_is_positive_semidefinite() {
    let (_, _, e) = engine(3, 2, 3, 23);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let xs: Vec<Vec<f64>> = (0..30).map(|_| common::random_point(&mut rng, 3, 3.0)).collect();
    let g = e.gram(&xs, &xs).unwrap();
    let gs = e.gram_sym(&xs).unwrap();
    assert!((&g - &gs).amax() <= 1e-12);
    assert!((&g - g.transpose()).amax() <= 1e-12);
    let eig = SymmetricEigen::new(g);
    assert!(eig.eigenvalues.min() >= -1e-8);
}

#[test]
fn gram_rectangular_entries() {
    let (_, _, e) = engine(2, 1, 2, 24);
    let xs = vec![vec![0.1, 0.2], vec![-1.0, 0.5], vec![2.0, 2.0]];
    let ys = vec![vec![0.0, 0.0], vec![1.0, -1.0]];
    let g: DMatrix<f64> = e.gram(&xs, &ys).unwrap();
    assert_eq!(g.shape(), (3, 2));
    for i in 0..3 {
        for j in 0..2 {
            assert_eq!(g[(i, j)], e.eval_kernel(&xs[i], &ys[j]).unwrap());
        }
    }
}

#[test]
fn explicit_features_reproduce_the_kernel() {
    let lat = FrequencyLattice::integer(3, 1).unwrap();
    let w = random_mps(&lat, 2, 25).unwrap();
    let ws = w.symmetrize();
    let e = KernelEngine::new(lat.clone(), &w).unwrap();
    let oracle = DenseOracle::new(&lat, &ws).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let x = common::random_point(&mut rng, 3, 3.0);
        let y = common::random_point(&mut rng, 3, 3.0);
        let z = inner(&oracle.phi2(&x).unwrap(), &oracle.phi2(&y).unwrap());
        let k = e.eval_kernel(&x, &y).unwrap();
        assert!(z.im.abs() <= 1e-12);
        assert!((z.re - k).abs() <= 1e-10);
        assert!((oracle.kernel(&x, &y).unwrap() - k).abs() <= 1e-10);
    }
}

#[test]
fn splitting_does_not_matter_for_symmetric_weights() {
    for d in 1..=3 {
        let lat = FrequencyLattice::integer(d, 2).unwrap();
        let ws = random_mps(&lat, 2, 30 + d as u64).unwrap().symmetrize();
        let a = DenseOracle::with_splitting(&lat, &ws, Splitting::FirstNonzeroPositive).unwrap();
        let b = DenseOracle::with_splitting(&lat, &ws, Splitting::LastNonzeroPositive).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        for _ in 0..10 {
            let x = common::random_point(&mut rng, d, 3.0);
            let y = common::random_point(&mut rng, d, 3.0);
            assert!((a.kernel(&x, &y).unwrap() - b.kernel(&x, &y).unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn symmetric_flag_skips_doubling() {
    let lat = FrequencyLattice::integer(3, 1).unwrap();
    let ws = random_mps(&lat, 2, 40).unwrap().symmetrize();
    let a = KernelEngine::new(lat.clone(), &ws).unwrap();
    assert_eq!(a.b_mps().bond_dim(), 2 * ws.bond_dim());
    let p = product_weights(&lat, &vec![vec![0.5, 1.0, 0.5]; 3]).unwrap();
    assert!(p.is_symmetric());
    let u = uniform_mps(&lat);
    let eu = KernelEngine::new(lat.clone(), &u).unwrap();
    assert!((eu.norm2() - 2.0 * 14.0).abs() <= 1e-12);
}
