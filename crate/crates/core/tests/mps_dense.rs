mod common;

use common::{all_indices, mi, mirror_avg, neg, weight};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnkernel::mps::{c_tensor_mps, product_weights, random_mps, sample_indices, uniform_mps};
use tnkernel::{FrequencyAxis, FrequencyLattice, WeightMps};

const TOL: f64 = 1e-10;

fn configs() -> Vec<(FrequencyLattice, WeightMps)> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut out = Vec::new();
    for seed in 0..24u64 {
        let d = rng.random_range(1..=4usize);
        let ms: Vec<usize> = (0..d).map(|_| rng.random_range(1..=2)).collect();
        let lat = FrequencyLattice::new(ms.iter().map(|&m| FrequencyAxis::integer(m)).collect()).unwrap();
        let bond = rng.random_range(1..=4);
        let w = random_mps(&lat, bond, seed).unwrap();
        out.push((lat, w));
    }
    out
}

#[test]
fn eval_weight_matches_dense_product() {
    for (lat, w) in configs() {
        for idx in all_indices(&lat.ms()) {
            let got = w.eval_weight(&mi(&idx)).unwrap();
            assert!((got - weight(&w, &idx)).abs() <= TOL * (1.0 + got.abs()));
        }
    }
}

#[test]
fn symmetrize_is_the_mirror_average() {
    for (lat, w) in configs() {
        let s = w.symmetrize();
        assert!(s.is_symmetric());
        assert!(s.bond_dim() <= 2 * w.bond_dim());
        let ss = s.symmetrize();
        for idx in all_indices(&lat.ms()) {
            let want = mirror_avg(&w, &idx);
            let got = weight(&s, &idx);
            assert!((got - want).abs() <= TOL * (1.0 + want.abs()));
            assert!((got - weight(&s, &neg(&idx))).abs() <= TOL * (1.0 + want.abs()));
            assert!((weight(&ss, &idx) - got).abs() <= TOL * (1.0 + want.abs()));
        }
    }
}

#[test]
fn symmetrize_one_dimension_keeps_bond_one() {
    let lat = FrequencyLattice::integer(1, 2).unwrap();
    let w = product_weights(&lat, &[vec![1.0, 2.0, 3.0, 4.0, 5.0]]).unwrap();
    let s = w.symmetrize();
    assert_eq!(s.bond_dim(), 1);
    assert_eq!(s.sites()[0].data(), &[3.0, 3.0, 3.0, 3.0, 3.0]);
}

#[test]
fn hadamard_is_elementwise_commutative_and_associative() {
    let lat = FrequencyLattice::new(vec![FrequencyAxis::integer(1), FrequencyAxis::integer(2), FrequencyAxis::integer(1)]).unwrap();
    let a = random_mps(&lat, 2, 1).unwrap();
    let b = random_mps(&lat, 3, 2).unwrap();
    let c = random_mps(&lat, 2, 3).unwrap();
    let ab = a.hadamard(&b).unwrap();
    let ba = b.hadamard(&a).unwrap();
    let ab_c = ab.hadamard(&c).unwrap();
    let a_bc = a.hadamard(&b.hadamard(&c).unwrap()).unwrap();
    assert_eq!(ab.bond_dim(), 6);
    for idx in all_indices(&lat.ms()) {
        let want = weight(&a, &idx) * weight(&b, &idx);
        assert!((weight(&ab, &idx) - want).abs() <= TOL);
        assert!((weight(&ba, &idx) - want).abs() <= TOL);
        let want3 = want * weight(&c, &idx);
        assert!((weight(&ab_c, &idx) - want3).abs() <= TOL);
        assert!((weight(&a_bc, &idx) - want3).abs() <= TOL);
    }
}

#[test]
fn hadamard_shape_mismatch() {
    let a = uniform_mps(&FrequencyLattice::integer(2, 1).unwrap());
    let b = uniform_mps(&FrequencyLattice::integer(2, 2).unwrap());
    assert!(a.hadamard(&b).is_err());
}

#[test]
fn squared_sum_matches_enumeration() {
    for (lat, w) in configs() {
        let want: f64 = all_indices(&lat.ms()).iter().map(|i| weight(&w, i).powi(2)).sum();
        let got = w.squared_sum();
        assert!((got - want).abs() <= TOL * want.max(1.0));
    }
}

#[test]
fn c_tensor_values() {
    for d in 1..=4 {
        let lat = FrequencyLattice::integer(d, 2).unwrap();
        let c = c_tensor_mps(&lat);
        assert!(c.bond_dim() <= 2);
        for idx in all_indices(&lat.ms()) {
            let want = if idx.iter().all(|&k| k == 0) { 2f64.sqrt() } else { 1.0 };
            assert!((weight(&c, &idx) - want).abs() <= TOL);
        }
    }
}

#[test]
fn b_norm_is_twice_half_lattice_norm() {
    for (lat, w) in configs() {
        let ws = w.symmetrize();
        let b = c_tensor_mps(&lat).hadamard(&ws).unwrap();
        let half: f64 = lat.half_lattice().map(|k| mirror_avg(&w, &k.0).powi(2)).sum();
        assert!((b.squared_sum() - 2.0 * half).abs() <= 1e-9 * half.max(1.0));
    }
}

#[test]
fn uniform_sampler_passes_chi_square() {
    let lat = FrequencyLattice::integer(2, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 90_000;
    let samples = sample_indices(&uniform_mps(&lat), &mut rng, n).unwrap();
    let mut counts = std::collections::HashMap::new();
    for s in samples {
        *counts.entry(s.0).or_insert(0usize) += 1;
    }
    assert_eq!(counts.len(), 9);
    let e = n as f64 / 9.0;
    let chi2: f64 = counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum();
    // 8 degrees of freedom, 0.999 quantile is 26.1.
    assert!(chi2 < 26.1, "chi2 = {chi2}");
}

#[test]
fn product_sampler_marginals() {
    let lat = FrequencyLattice::integer(3, 1).unwrap();
    let w = product_weights(&lat, &vec![vec![1.0, 2.0, 1.0]; 3]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 100_000;
    let samples = sample_indices(&w, &mut rng, n).unwrap();
    let want = [1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0];
    for j in 0..3 {
        let mut counts = [0usize; 3];
        for s in &samples {
            counts[(s.0[j] + 1) as usize] += 1;
        }
        let tv: f64 = counts.iter().zip(want).map(|(&c, p)| (c as f64 / n as f64 - p).abs()).sum::<f64>() / 2.0;
        assert!(tv <= 0.01, "axis {j}: tv = {tv}");
    }
}

#[test]
fn sampler_seed_determinism() {
    let lat = FrequencyLattice::integer(3, 2).unwrap();
    let w = random_mps(&lat, 3, 4).unwrap();
    let a = sample_indices(&w, &mut ChaCha8Rng::seed_from_u64(1), 200).unwrap();
    let b = sample_indices(&w, &mut ChaCha8Rng::seed_from_u64(1), 200).unwrap();
    let c = sample_indices(&w, &mut ChaCha8Rng::seed_from_u64(2), 200).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn json_round_trip_preserves_values() {
    let lat = FrequencyLattice::integer(3, 1).unwrap();
    let w = random_mps(&lat, 2, 9).unwrap();
    let back = WeightMps::from_json(&w.to_json().unwrap()).unwrap();
    assert_eq!(back, w);
}
