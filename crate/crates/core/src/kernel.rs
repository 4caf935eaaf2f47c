//! Exact evaluation of MPS-reweighted lattice kernels.
//!
//! For a symmetric weighting `w_s` of the full lattice the kernel is
//!
//! ```text
//!  K(x, x') = Σ_{k ∈ half lattice} w_s[k]² cos⟨ω_k, x - x'⟩ / Σ_{k ∈ half lattice} w_s[k]²
//! ```
//!
//! Writing `B = C ∘ w_s`, with `C` equal to one except `√2` at the zero
//! index, the same value is `⟨B ψ(x), B ψ(x')⟩ / ⟨B, B⟩` where `ψ(x)` is the
//! product of per-axis vectors `e^{i ω_k x_j}`. Both `B` and `ψ` are matrix
//! product states, so the ratio contracts site by site.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{FrequencyAxis, FrequencyLattice, MultiIndex, Splitting};
use crate::mps::{c_tensor_mps, SiteTensor, WeightMps};

/// Tolerance on the imaginary part of a normalized kernel contraction.
pub const IMAG_TOL: f64 = 1e-9;
/// Smallest accepted `2‖w‖²`.
pub const NORM_TOL: f64 = 1e-14;
/// Largest lattice the dense oracles will enumerate.
pub const ENUMERATION_CAP: u128 = 1_000_000;

/// `e^{i ω_k x_j}` for every offset of `axis`, negative offsets filled as
/// conjugates of the positive ones.
pub fn local_features(axis: &FrequencyAxis, x_j: f64) -> Vec<Complex64> {
    let m = axis.m();
    let mut out = vec![Complex64::new(1.0, 0.0); axis.len()];
    for k in 1..=m {
        let z = Complex64::from_polar(1.0, axis.values()[m + k] * x_j);
        out[m + k] = z;
        out[m - k] = z.conj();
    }
    out
}

/// Precomputed `B` tensor and normalization for one weighting.
#[derive(Debug)]
pub struct KernelEngine {
    lattice: FrequencyLattice,
    b_mps: WeightMps,
    /// `B` rescaled site by site so that its squared sum is order one.
    balanced: WeightMps,
    balanced_norm2: f64,
    log_norm2: f64,
    mpo_core: OnceLock<Vec<MpoSite>>,
}

impl KernelEngine {
    /// Symmetrizes `weights` (unless already flagged symmetric), forms
    /// `B = C ∘ w_s` and its squared sum `2‖w‖²`.
    pub fn new(lattice: FrequencyLattice, weights: &WeightMps) -> Result<Self> {
        weights.check_lattice(&lattice)?;
        let ws = if weights.is_symmetric() {
            weights.clone()
        } else {
            weights.symmetrize()
        };
        let b_mps = c_tensor_mps(&lattice).hadamard(&ws)?;
        let log_norm2 = b_mps.log_squared_sum();
        if log_norm2.is_nan() || log_norm2 <= NORM_TOL.ln() {
            return Err(Error::ZeroWeighting(log_norm2.exp()));
        }
        let (balanced, _) = b_mps.balanced()?;
        let balanced_norm2 = balanced.squared_sum();
        Ok(Self {
            lattice,
            b_mps,
            balanced,
            balanced_norm2,
            log_norm2,
            mpo_core: OnceLock::new(),
        })
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn b_mps(&self) -> &WeightMps {
        &self.b_mps
    }

    /// `squared_sum(B) = 2‖w‖²`; may overflow to infinity on long chains,
    /// see [`KernelEngine::log_norm2`].
    pub fn norm2(&self) -> f64 {
        self.log_norm2.exp()
    }

    pub fn log_norm2(&self) -> f64 {
        self.log_norm2
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("input coordinate {v}")));
        }
        Ok(())
    }

    fn finish(&self, value: Complex64) -> Result<f64> {
        let value = value / self.balanced_norm2;
        if value.im.abs() > IMAG_TOL {
            return Err(Error::ImaginaryResidue(value.im.abs()));
        }
        Ok(value.re)
    }

    /// `K(x, x')` by edge-bond-bond contraction of the two feature MPS.
    ///
    /// The left environment carries both bond indices and is pushed one
    /// site at a time at `O(D³ M̃)` per site.
    pub fn eval_kernel(&self, x: &[f64], xp: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(xp)?;
        let mut env = vec![Complex64::new(1.0, 0.0)];
        for ((site, axis), (&xj, &xpj)) in self
            .balanced
            .sites()
            .iter()
            .zip(self.lattice.axes())
            .zip(x.iter().zip(xp))
        {
            let fx = local_features(axis, xj);
            let fxp = local_features(axis, xpj);
            let g: Vec<Complex64> = fx.iter().zip(&fxp).map(|(a, b)| a.conj() * b).collect();
            env = push_env(&env, site, &g);
        }
        self.finish(env[0])
    }

    /// Diagonal MPO core of the doubled `B` chain, built on first use.
    fn core(&self) -> &[MpoSite] {
        self.mpo_core
            .get_or_init(|| self.balanced.sites().iter().map(MpoSite::from_site).collect())
    }

    /// `K(x, x')` as an entangled tensor kernel: the per-axis features of
    /// `x` and `x'` are attached to a diagonal MPO core
    /// `W_j[(l,l'), p, (r,r')] = B_j[l,p,r] B_j[l',p,r']` and the resulting
    /// transfer matrices are multiplied left to right.
    pub fn eval_kernel_etk(&self, x: &[f64], xp: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(xp)?;
        let mut v = vec![Complex64::new(1.0, 0.0)];
        for ((core, axis), (&xj, &xpj)) in self
            .core()
            .iter()
            .zip(self.lattice.axes())
            .zip(x.iter().zip(xp))
        {
            let fx = local_features(axis, xj);
            let fxp = local_features(axis, xpj);
            let g: Vec<Complex64> = fx.iter().zip(&fxp).map(|(a, b)| a.conj() * b).collect();
            v = core.apply(&v, &g);
        }
        self.finish(v[0])
    }

    /// Gram matrix `G[i, j] = K(xs[i], ys[j])`, entries evaluated in parallel.
    pub fn gram(&self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let (n, m) = (xs.len(), ys.len());
        let vals: Vec<f64> = (0..n * m)
            .into_par_iter()
            .map(|e| self.eval_kernel(&xs[e / m], &ys[e % m]))
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_row_slice(n, m, &vals))
    }

    /// Symmetric Gram matrix of one point set; only the upper triangle is
    /// contracted and the diagonal is exactly 1.
    pub fn gram_sym(&self, xs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let n = xs.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let vals: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| self.eval_kernel(&xs[i], &xs[j]))
            .collect::<Result<_>>()?;
        for x in xs {
            self.check_point(x)?;
        }
        let mut g = DMatrix::identity(n, n);
        for (&(i, j), v) in pairs.iter().zip(vals) {
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
        Ok(g)
    }
}

/// `E'[r, r'] = Σ_{l, l', p} E[l, l'] A[l, p, r] g[p] A[l', p, r']`, in two
/// steps: the left bond is contracted with the phase-weighted site first,
/// then the primed bond and the shared physical index.
fn push_env(env: &[Complex64], site: &SiteTensor, g: &[Complex64]) -> Vec<Complex64> {
    let [ld, pd, rd] = site.shape();
    let data = site.data();
    let zero = Complex64::new(0.0, 0.0);
    // t[l', p, r] = Σ_l E[l, l'] A[l, p, r] g[p]
    let mut t = vec![zero; ld * pd * rd];
    for l in 0..ld {
        for lp in 0..ld {
            let e = env[l * ld + lp];
            if e == zero {
                continue;
            }
            for (p, &gp) in g.iter().enumerate().take(pd) {
                let c = e * gp;
                let src = (l * pd + p) * rd;
                let dst = (lp * pd + p) * rd;
                for r in 0..rd {
                    t[dst + r] += c * data[src + r];
                }
            }
        }
    }
    let mut out = vec![zero; rd * rd];
    for lp in 0..ld {
        for p in 0..pd {
            let base = (lp * pd + p) * rd;
            for r in 0..rd {
                let tv = t[base + r];
                for rp in 0..rd {
                    out[r * rd + rp] += tv * data[base + rp];
                }
            }
        }
    }
    out
}

/// One site of the diagonal MPO core, stored as `phys` real matrices of
/// shape `left² × right²`.
#[derive(Debug)]
struct MpoSite {
    left2: usize,
    phys: usize,
    right2: usize,
    data: Vec<f64>,
}

impl MpoSite {
    fn from_site(site: &SiteTensor) -> Self {
        let [ld, pd, rd] = site.shape();
        let (left2, right2) = (ld * ld, rd * rd);
        let mut data = vec![0.0; left2 * pd * right2];
        for l in 0..ld {
            for lp in 0..ld {
                for p in 0..pd {
                    for r in 0..rd {
                        let a = site.get(l, p, r);
                        for rp in 0..rd {
                            data[((l * ld + lp) * pd + p) * right2 + r * rd + rp] = a * site.get(lp, p, rp);
                        }
                    }
                }
            }
        }
        Self {
            left2,
            phys: pd,
            right2,
            data,
        }
    }

    /// `v'[(r,r')] = Σ_{(l,l'), p} v[(l,l')] g[p] W[(l,l'), p, (r,r')]`.
    fn apply(&self, v: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.right2];
        for (a, &va) in v.iter().enumerate().take(self.left2) {
            for (p, &gp) in g.iter().enumerate().take(self.phys) {
                let c = va * gp;
                let base = (a * self.phys + p) * self.right2;
                for (o, w) in out.iter_mut().zip(&self.data[base..base + self.right2]) {
                    *o += c * *w;
                }
            }
        }
        out
    }
}

pub fn new_engine(lattice: FrequencyLattice, weights: &WeightMps) -> Result<KernelEngine> {
    KernelEngine::new(lattice, weights)
}

pub fn eval_kernel(engine: &KernelEngine, x: &[f64], xp: &[f64]) -> Result<f64> {
    engine.eval_kernel(x, xp)
}

pub fn eval_kernel_etk(engine: &KernelEngine, x: &[f64], xp: &[f64]) -> Result<f64> {
    engine.eval_kernel_etk(x, xp)
}

pub fn gram(engine: &KernelEngine, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    engine.gram(xs, ys)
}

/// Brute-force reference built by enumerating the lattice.
///
/// The weighting is taken as given (not symmetrized): the induced weight of
/// a mirror pair is the value of `weights` at its positive representative.
#[derive(Debug, Clone)]
pub struct DenseOracle {
    lattice: FrequencyLattice,
    /// `(frequency, w²)` over positive representatives.
    terms: Vec<(Vec<f64>, f64)>,
    /// `w` at the positive representative of every full-lattice point,
    /// in [`FrequencyLattice::iter`] order.
    full: Vec<(Vec<f64>, f64, bool)>,
    norm2: f64,
}

impl DenseOracle {
    pub fn new(lattice: &FrequencyLattice, weights: &WeightMps) -> Result<Self> {
        Self::with_splitting(lattice, weights, Splitting::default())
    }

    pub fn with_splitting(lattice: &FrequencyLattice, weights: &WeightMps, splitting: Splitting) -> Result<Self> {
        lattice.check_enumerable(ENUMERATION_CAP)?;
        weights.check_lattice(lattice)?;
        let mut terms = Vec::new();
        let mut full = Vec::new();
        for idx in lattice.iter() {
            let pos = splitting.is_positive_rep(&idx);
            let rep = if pos { idx.clone() } else { idx.neg() };
            let w = weights.eval_weight(&rep)?;
            let freq = lattice.frequency_of(&idx)?;
            if pos {
                terms.push((freq.clone(), w * w));
            }
            full.push((freq, w, idx.is_zero()));
        }
        let norm2: f64 = terms.iter().map(|(_, w2)| w2).sum();
        if norm2 <= NORM_TOL {
            return Err(Error::ZeroWeighting(norm2));
        }
        Ok(Self {
            lattice: lattice.clone(),
            terms,
            full,
            norm2,
        })
    }

    /// `‖w‖²` over the half lattice.
    pub fn norm2(&self) -> f64 {
        self.norm2
    }

    /// `Σ_half w² cos⟨ω, x - x'⟩ / ‖w‖²`.
    pub fn kernel(&self, x: &[f64], xp: &[f64]) -> Result<f64> {
        let d = self.lattice.dim();
        for v in [x, xp] {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: v.len() });
            }
        }
        let delta: Vec<f64> = x.iter().zip(xp).map(|(a, b)| a - b).collect();
        let s: f64 = self
            .terms
            .iter()
            .map(|(w, w2)| w2 * dot(w, &delta).cos())
            .sum();
        Ok(s / self.norm2)
    }

    /// The explicit complex feature vector over the full lattice, in
    /// [`FrequencyLattice::iter`] order: `w e^{i⟨ω,x⟩} / (√2‖w‖)`, with the
    /// zero-frequency entry `√2 w_0 / (√2‖w‖)`.
    pub fn phi2(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        let d = self.lattice.dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
        let scale = 1.0 / (std::f64::consts::SQRT_2 * self.norm2.sqrt());
        Ok(self
            .full
            .iter()
            .map(|(freq, w, zero)| {
                if *zero {
                    Complex64::new(std::f64::consts::SQRT_2 * w * scale, 0.0)
                } else {
                    Complex64::from_polar(w * scale, dot(freq, x))
                }
            })
            .collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dense_feature_phi2(lattice: &FrequencyLattice, weights: &WeightMps, x: &[f64]) -> Result<Vec<Complex64>> {
    DenseOracle::new(lattice, weights)?.phi2(x)
}

pub fn dense_kernel(lattice: &FrequencyLattice, weights: &WeightMps, x: &[f64], xp: &[f64]) -> Result<f64> {
    DenseOracle::new(lattice, weights)?.kernel(x, xp)
}

/// `⟨a, b⟩` with the first argument conjugated.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Weight `w[k]` for the positive representative of `k`, for callers that
/// need the induced weighting without building an oracle.
pub fn induced_weight(weights: &WeightMps, idx: &MultiIndex) -> Result<f64> {
    if idx.is_positive_rep() {
        weights.eval_weight(idx)
    } else {
        weights.eval_weight(&idx.neg())
    }
}
