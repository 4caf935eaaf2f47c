//! Brute-force references that only read raw tensor entries and axis values.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tnkernel::mps::WeightMps;
use tnkernel::{FrequencyLattice, MultiIndex};

/// Every index of the lattice, own odometer, first axis slowest.
pub fn all_indices(ms: &[usize]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &m in ms {
        let m = m as i64;
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (-m..=m).map(move |k| {
                    let mut p = prefix.clone();
                    p.push(k);
                    p
                })
            })
            .collect();
    }
    out
}

/// `w[idx]` as a plain left-to-right product of bond matrices.
pub fn weight(mps: &WeightMps, idx: &[i64]) -> f64 {
    let mut v = vec![1.0];
    for (site, &k) in mps.sites().iter().zip(idx) {
        let m = (site.phys() as i64 - 1) / 2;
        let p = (k + m) as usize;
        let mut next = vec![0.0; site.right()];
        for (l, vl) in v.iter().enumerate() {
            for (r, n) in next.iter_mut().enumerate() {
                *n += vl * site.get(l, p, r);
            }
        }
        v = next;
    }
    v[0]
}

pub fn neg(idx: &[i64]) -> Vec<i64> {
    idx.iter().map(|k| -k).collect()
}

pub fn mirror_avg(mps: &WeightMps, idx: &[i64]) -> f64 {
    0.5 * (weight(mps, idx) + weight(mps, &neg(idx)))
}

pub fn omega(lattice: &FrequencyLattice, idx: &[i64]) -> Vec<f64> {
    lattice
        .axes()
        .iter()
        .zip(idx)
        .map(|(a, &k)| a.values()[(k + a.m() as i64) as usize])
        .collect()
}

/// Kernel summed over the whole lattice, no splitting needed:
/// `(2 w₀² + Σ_{k≠0} w_k² cos⟨ω_k, Δ⟩) / (2 w₀² + Σ_{k≠0} w_k²)` with
/// `w` the mirror average of the raw weights.
pub struct DenseRef {
    terms: Vec<(Vec<f64>, f64)>,
    den: f64,
}

impl DenseRef {
    pub fn new(lattice: &FrequencyLattice, mps: &WeightMps) -> Self {
        let terms: Vec<(Vec<f64>, f64)> = all_indices(&lattice.ms())
            .into_iter()
            .map(|idx| {
                let w = mirror_avg(mps, &idx);
                let c = if idx.iter().all(|&k| k == 0) { 2.0 } else { 1.0 };
                (omega(lattice, &idx), c * w * w)
            })
            .collect();
        let den = terms.iter().map(|t| t.1).sum();
        Self { terms, den }
    }

    pub fn kernel(&self, x: &[f64], xp: &[f64]) -> f64 {
        let num: f64 = self
            .terms
            .iter()
            .map(|(o, w2)| {
                let phase: f64 = o.iter().zip(x.iter().zip(xp)).map(|(o, (a, b))| o * (a - b)).sum();
                w2 * phase.cos()
            })
            .sum();
        num / self.den
    }
}

pub fn kernel(lattice: &FrequencyLattice, mps: &WeightMps, x: &[f64], xp: &[f64]) -> f64 {
    DenseRef::new(lattice, mps).kernel(x, xp)
}

pub fn random_point(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-scale..scale)).collect()
}

pub fn mi(v: &[i64]) -> MultiIndex {
    MultiIndex(v.to_vec())
}

/// Random real trigonometric polynomial over the positive representatives
/// of `lattice`: `f(x) = Σ a_k cos⟨ω_k,x⟩ + b_k sin⟨ω_k,x⟩`, with `b_0 = 0`.
pub struct Target {
    terms: Vec<(Vec<f64>, f64, f64)>,
}

impl Target {
    pub fn random(lattice: &FrequencyLattice, rng: &mut ChaCha8Rng) -> Self {
        let terms = all_indices(&lattice.ms())
            .into_iter()
            .filter(|k| k.iter().find(|&&v| v != 0).is_none_or(|&v| v > 0))
            .map(|k| {
                let zero = k.iter().all(|&v| v == 0);
                let a = rng.random_range(-1.0..1.0);
                let b = if zero { 0.0 } else { rng.random_range(-1.0..1.0) };
                (omega(lattice, &k), a, b)
            })
            .collect();
        Self { terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(w, a, b)| {
                let ph: f64 = w.iter().zip(x).map(|(u, v)| u * v).sum();
                a * ph.cos() + b * ph.sin()
            })
            .sum()
    }
}

pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>() / a.len() as f64
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
