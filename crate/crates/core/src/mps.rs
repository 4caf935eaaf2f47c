//! Matrix product state weightings of a frequency lattice.
//!
//! A weighting assigns a real number to every lattice point. It is stored as
//! a chain of three-index tensors `A_j[l, p, r]`, where `p = k_j + M_j` is the
//! physical position of offset `k_j` and `l`, `r` are bond indices:
//!
//! ```text
//!  w[k_1, ..., k_d] = A_1[k_1] · A_2[k_2] · ... · A_d[k_d]
//! ```
//!
//! with `A_1[k]` a row vector and `A_d[k]` a column vector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{FrequencyLattice, MultiIndex};

/// One MPS site, row-major over `(left, phys, right)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor {
    left: usize,
    phys: usize,
    right: usize,
    data: Vec<f64>,
}

impl SiteTensor {
    pub fn new(left: usize, phys: usize, right: usize, data: Vec<f64>) -> Result<Self> {
        if left == 0 || phys == 0 || right == 0 {
            return Err(Error::ShapeMismatch(format!(
                "zero-sized site tensor ({left}, {phys}, {right})"
            )));
        }
        if data.len() != left * phys * right {
            return Err(Error::ShapeMismatch(format!(
                "site tensor ({left}, {phys}, {right}) needs {} entries, got {}",
                left * phys * right,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("MPS entry {v}")));
        }
        Ok(Self {
            left,
            phys,
            right,
            data,
        })
    }

    fn from_fn(left: usize, phys: usize, right: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(left * phys * right);
        for l in 0..left {
            for p in 0..phys {
                for r in 0..right {
                    data.push(f(l, p, r));
                }
            }
        }
        Self {
            left,
            phys,
            right,
            data,
        }
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.left, self.phys, self.right]
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn phys(&self) -> usize {
        self.phys
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, l: usize, p: usize, r: usize) -> f64 {
        self.data[(l * self.phys + p) * self.right + r]
    }

    /// The `left × right` matrix selected by physical position `p`, row-major.
    pub fn slice(&self, p: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.left * self.right);
        for l in 0..self.left {
            let base = (l * self.phys + p) * self.right;
            out.extend_from_slice(&self.data[base..base + self.right]);
        }
        out
    }

    pub(crate) fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    /// `v · A[p]` for a row vector `v` of length `left`.
    fn apply_left(&self, v: &[f64], p: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.right];
        for (l, &vl) in v.iter().enumerate() {
            if vl == 0.0 {
                continue;
            }
            let base = (l * self.phys + p) * self.right;
            for (o, a) in out.iter_mut().zip(&self.data[base..base + self.right]) {
                *o += vl * a;
            }
        }
        out
    }
}

/// A weighting of a frequency lattice in matrix product form.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMps {
    sites: Vec<SiteTensor>,
    symmetric: bool,
    seed: Option<u64>,
}

impl WeightMps {
    /// Checks that bonds chain and that the boundary bonds are 1.
    pub fn new(sites: Vec<SiteTensor>, symmetric: bool) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::ShapeMismatch("MPS has no sites".into()));
        }
        if sites[0].left != 1 || sites[sites.len() - 1].right != 1 {
            return Err(Error::ShapeMismatch("boundary bonds must be 1".into()));
        }
        for (j, w) in sites.windows(2).enumerate() {
            if w[0].right != w[1].left {
                return Err(Error::ShapeMismatch(format!(
                    "bond {j}: right dim {} != next left dim {}",
                    w[0].right, w[1].left
                )));
            }
        }
        for (j, s) in sites.iter().enumerate() {
            if s.phys % 2 == 0 {
                return Err(Error::ShapeMismatch(format!(
                    "site {j}: physical dimension {} is not odd",
                    s.phys
                )));
            }
        }
        Ok(Self {
            sites,
            symmetric,
            seed: None,
        })
    }

    pub fn sites(&self) -> &[SiteTensor] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.sites.iter().map(SiteTensor::phys).collect()
    }

    /// Largest bond dimension along the chain.
    pub fn bond_dim(&self) -> usize {
        self.sites.iter().map(SiteTensor::right).max().unwrap_or(1).max(
            self.sites.iter().map(SiteTensor::left).max().unwrap_or(1),
        )
    }

    /// Errors unless the physical dimensions match the lattice axes.
    pub fn check_lattice(&self, lattice: &FrequencyLattice) -> Result<()> {
        let want = lattice.phys_dims();
        let got = self.phys_dims();
        if want != got {
            return Err(Error::ShapeMismatch(format!(
                "MPS physical dims {got:?} do not match lattice {want:?}"
            )));
        }
        Ok(())
    }

    fn position(&self, j: usize, k: i64) -> Option<usize> {
        let m = (self.sites[j].phys / 2) as i64;
        (k.abs() <= m).then(|| (k + m) as usize)
    }

    fn positions(&self, idx: &MultiIndex) -> Result<Vec<usize>> {
        if idx.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: idx.len(),
            });
        }
        idx.0
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                self.position(j, k).ok_or_else(|| Error::IndexOutOfBounds {
                    index: idx.0.clone(),
                    bounds: self.sites.iter().map(|s| s.phys / 2).collect(),
                })
            })
            .collect()
    }

    /// Chain product selecting offset `k_j` at every site. Cost `O(d D²)`.
    pub fn eval_weight(&self, idx: &MultiIndex) -> Result<f64> {
        let pos = self.positions(idx)?;
        let mut v = vec![1.0];
        for (site, &p) in self.sites.iter().zip(&pos) {
            v = site.apply_left(&v, p);
        }
        Ok(v[0])
    }

    /// Mirror average `(w[k] + w[-k]) / 2`.
    ///
    /// Site tensors become block diagonal `diag(A_j[p], A_j[flip(p)])`, with
    /// the factor 1/2 folded into the first site, so each bond at most
    /// doubles. A single-site chain stays at bond 1.
    pub fn symmetrize(&self) -> WeightMps {
        let d = self.len();
        if d == 1 {
            let s = &self.sites[0];
            let site = SiteTensor::from_fn(1, s.phys, 1, |_, p, _| {
                0.5 * (s.get(0, p, 0) + s.get(0, s.phys - 1 - p, 0))
            });
            return WeightMps {
                sites: vec![site],
                symmetric: true,
                seed: self.seed,
            };
        }
        let sites = self
            .sites
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let (l2, r2) = (
                    if j == 0 { 1 } else { 2 * s.left },
                    if j == d - 1 { 1 } else { 2 * s.right },
                );
                let flip = |p: usize| s.phys - 1 - p;
                SiteTensor::from_fn(l2, s.phys, r2, |l, p, r| {
                    // Block b = 0 carries A[p], block 1 carries A[flip p].
                    let (lb, lo) = if j == 0 { (None, 0) } else { (Some(l / s.left), l % s.left) };
                    let (rb, ro) = if j == d - 1 { (None, 0) } else { (Some(r / s.right), r % s.right) };
                    let block = match (lb, rb) {
                        (Some(a), Some(b)) if a != b => return 0.0,
                        (Some(a), _) | (None, Some(a)) => a,
                        (None, None) => unreachable!("d > 1"),
                    };
                    let pp = if block == 0 { p } else { flip(p) };
                    let scale = if j == 0 { 0.5 } else { 1.0 };
                    scale * s.get(lo, pp, ro)
                })
            })
            .collect();
        WeightMps {
            sites,
            symmetric: true,
            seed: self.seed,
        }
    }

    /// Elementwise product through copy tensors: bond dimensions multiply.
    pub fn hadamard(&self, other: &WeightMps) -> Result<WeightMps> {
        if self.phys_dims() != other.phys_dims() {
            return Err(Error::ShapeMismatch(format!(
                "hadamard of {:?} and {:?}",
                self.phys_dims(),
                other.phys_dims()
            )));
        }
        let sites = self
            .sites
            .iter()
            .zip(&other.sites)
            .map(|(a, b)| {
                SiteTensor::from_fn(a.left * b.left, a.phys, a.right * b.right, |l, p, r| {
                    a.get(l / b.left, p, r / b.right) * b.get(l % b.left, p, r % b.right)
                })
            })
            .collect();
        Ok(WeightMps {
            sites,
            symmetric: self.symmetric && other.symmetric,
            seed: None,
        })
    }

    /// Natural log of `Σ_idx w[idx]²`, from the doubled-chain contraction
    /// with the environment rescaled at every site. `-inf` for a zero
    /// weighting.
    pub fn log_squared_sum(&self) -> f64 {
        let mut env = vec![1.0];
        let mut dim = 1;
        let mut log = 0.0;
        for site in &self.sites {
            env = transfer(&env, dim, site);
            dim = site.right;
            let c = env.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if c == 0.0 {
                return f64::NEG_INFINITY;
            }
            env.iter_mut().for_each(|v| *v /= c);
            log += c.ln();
        }
        if env[0] <= 0.0 {
            return f64::NEG_INFINITY;
        }
        log + env[0].ln()
    }

    /// `Σ_idx w[idx]²` by contracting the doubled chain, `O(d D³ M̃)`.
    pub fn squared_sum(&self) -> f64 {
        self.log_squared_sum().exp()
    }

    /// For bond-1 chains, whether some lattice point has zero weight.
    /// `None` for larger bonds, where the check is not cheap.
    pub fn has_zero_weight(&self) -> Option<bool> {
        (self.bond_dim() == 1).then(|| self.sites.iter().any(|s| s.data.contains(&0.0)))
    }

    /// Tensors rescaled site by site so that `squared_sum` of the result is
    /// of order one. Returns the rescaled chain and `ln` of the removed
    /// factor on `squared_sum`.
    pub(crate) fn balanced(&self) -> Result<(WeightMps, f64)> {
        let mut out = self.clone();
        let mut env = vec![1.0];
        let mut dim = 1;
        let mut log = 0.0;
        for site in out.sites.iter_mut() {
            env = transfer(&env, dim, site);
            dim = site.right;
            let c = env.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if c == 0.0 || !c.is_finite() {
                return Err(Error::ZeroWeighting(0.0));
            }
            env.iter_mut().for_each(|v| *v /= c);
            site.scale(1.0 / c.sqrt());
            log += c.ln();
        }
        out.seed = None;
        Ok((out, log))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&MpsFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: MpsFile = serde_json::from_str(s)?;
        file.try_into()
    }
}

/// `E'[r, r'] = Σ_{l, l', p} E[l, l'] A[l, p, r] A[l', p, r']`, done in two
/// steps so the cost is `O(D³ M̃)`.
fn transfer(env: &[f64], dim: usize, site: &SiteTensor) -> Vec<f64> {
    let (ld, pd, rd) = (site.left, site.phys, site.right);
    debug_assert_eq!(dim, ld);
    // t[l', p, r] = Σ_l E[l, l'] A[l, p, r]
    let mut t = vec![0.0; ld * pd * rd];
    for l in 0..ld {
        for lp in 0..ld {
            let e = env[l * ld + lp];
            if e == 0.0 {
                continue;
            }
            for p in 0..pd {
                let src = (l * pd + p) * rd;
                let dst = (lp * pd + p) * rd;
                for r in 0..rd {
                    t[dst + r] += e * site.data[src + r];
                }
            }
        }
    }
    let mut out = vec![0.0; rd * rd];
    for lp in 0..ld {
        for p in 0..pd {
            let base = (lp * pd + p) * rd;
            for r in 0..rd {
                let tv = t[base + r];
                if tv == 0.0 {
                    continue;
                }
                for rp in 0..rd {
                    out[r * rd + rp] += tv * site.data[base + rp];
                }
            }
        }
    }
    out
}

/// Same as [`transfer`] but sweeping right to left:
/// `E'[l, l'] = Σ_{r, r', p} A[l, p, r] A[l', p, r'] E[r, r']`.
fn transfer_right(env: &[f64], site: &SiteTensor) -> Vec<f64> {
    let (ld, pd, rd) = (site.left, site.phys, site.right);
    // t[l', p, r] = Σ_r' A[l', p, r'] E[r, r']
    let mut t = vec![0.0; ld * pd * rd];
    for lp in 0..ld {
        for p in 0..pd {
            let base = (lp * pd + p) * rd;
            for r in 0..rd {
                let mut s = 0.0;
                for rp in 0..rd {
                    s += site.data[base + rp] * env[r * rd + rp];
                }
                t[base + r] = s;
            }
        }
    }
    let mut out = vec![0.0; ld * ld];
    for l in 0..ld {
        for lp in 0..ld {
            let mut s = 0.0;
            for p in 0..pd {
                let a = (l * pd + p) * rd;
                let b = (lp * pd + p) * rd;
                for r in 0..rd {
                    s += site.data[a + r] * t[b + r];
                }
            }
            out[l * ld + lp] = s;
        }
    }
    out
}

pub fn eval_weight(mps: &WeightMps, idx: &MultiIndex) -> Result<f64> {
    mps.eval_weight(idx)
}

pub fn symmetrize(mps: &WeightMps) -> WeightMps {
    mps.symmetrize()
}

pub fn hadamard(a: &WeightMps, b: &WeightMps) -> Result<WeightMps> {
    a.hadamard(b)
}

pub fn squared_sum(mps: &WeightMps) -> f64 {
    mps.squared_sum()
}

/// All ones, bond 1.
pub fn uniform_mps(lattice: &FrequencyLattice) -> WeightMps {
    let sites = lattice
        .phys_dims()
        .into_iter()
        .map(|p| SiteTensor::from_fn(1, p, 1, |_, _, _| 1.0))
        .collect();
    WeightMps {
        sites,
        symmetric: true,
        seed: None,
    }
}

/// Rank-one weighting `w[k] = Π_j v_j[k_j]`; each `v_j` is indexed by
/// physical position `k_j + M_j`. Zero entries are allowed and reported by
/// [`WeightMps::has_zero_weight`].
pub fn product_weights(lattice: &FrequencyLattice, vectors: &[Vec<f64>]) -> Result<WeightMps> {
    if vectors.len() != lattice.dim() {
        return Err(Error::DimensionMismatch {
            expected: lattice.dim(),
            got: vectors.len(),
        });
    }
    let sites = vectors
        .iter()
        .zip(lattice.phys_dims())
        .map(|(v, p)| {
            if v.len() != p {
                return Err(Error::ShapeMismatch(format!(
                    "product vector of length {} for axis of size {p}",
                    v.len()
                )));
            }
            SiteTensor::new(1, p, 1, v.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let symmetric = vectors
        .iter()
        .all(|v| v.iter().zip(v.iter().rev()).all(|(a, b)| a == b));
    Ok(WeightMps {
        sites,
        symmetric,
        seed: None,
    })
}

/// Standard-normal entries with interior bond `bond_dim`, from a ChaCha8
/// stream seeded by `seed`.
pub fn random_mps(lattice: &FrequencyLattice, bond_dim: usize, seed: u64) -> Result<WeightMps> {
    if bond_dim < 1 {
        return Err(Error::InvalidBondDim(bond_dim));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = lattice.dim();
    let sites = lattice
        .phys_dims()
        .into_iter()
        .enumerate()
        .map(|(j, p)| {
            let l = if j == 0 { 1 } else { bond_dim };
            let r = if j == d - 1 { 1 } else { bond_dim };
            let data = (0..l * p * r).map(|_| rng.sample(StandardNormal)).collect();
            SiteTensor { left: l, phys: p, right: r, data }
        })
        .collect();
    Ok(WeightMps {
        sites,
        symmetric: false,
        seed: Some(seed),
    })
}

/// The tensor equal to 1 everywhere except `√2` at the all-zero index.
///
/// Bond 2: channel 0 carries the constant 1, channel 1 carries the
/// correction `√2 - 1` and survives only while every offset is zero.
pub fn c_tensor_mps(lattice: &FrequencyLattice) -> WeightMps {
    let dims = lattice.phys_dims();
    let d = dims.len();
    let extra = std::f64::consts::SQRT_2 - 1.0;
    if d == 1 {
        let p = dims[0];
        let site = SiteTensor::from_fn(1, p, 1, |_, q, _| if q == p / 2 { 1.0 + extra } else { 1.0 });
        return WeightMps {
            sites: vec![site],
            symmetric: true,
            seed: None,
        };
    }
    let sites = dims
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let center = p / 2;
            let (l, r) = (if j == 0 { 1 } else { 2 }, if j == d - 1 { 1 } else { 2 });
            SiteTensor::from_fn(l, p, r, |a, q, b| {
                let zero = if q == center { 1.0 } else { 0.0 };
                match (j, a, b) {
                    (0, _, 0) => 1.0,
                    (0, _, _) => extra * zero,
                    (_, 0, 0) => 1.0,
                    (_, 1, 1) => zero,
                    _ if j == d - 1 && a == 1 => zero,
                    _ => 0.0,
                }
            })
        })
        .collect();
    WeightMps {
        sites,
        symmetric: true,
        seed: None,
    }
}

/// Exact i.i.d. samples from `p(idx) ∝ w[idx]²`.
///
/// Right environments of the doubled chain are built once per call; each
/// sample then draws site 1, ..., d from its exact conditional marginal
/// given the offsets chosen so far.
pub fn sample_indices<R: Rng + ?Sized>(mps: &WeightMps, rng: &mut R, count: usize) -> Result<Vec<MultiIndex>> {
    let d = mps.len();
    // right_envs[j] contracts sites j..d; right_envs[d] = [1].
    let mut right_envs: Vec<Vec<f64>> = vec![Vec::new(); d + 1];
    right_envs[d] = vec![1.0];
    for j in (0..d).rev() {
        let mut env = transfer_right(&right_envs[j + 1], &mps.sites[j]);
        let c = env.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if c == 0.0 {
            return Err(Error::ZeroWeighting(0.0));
        }
        env.iter_mut().for_each(|v| *v /= c);
        right_envs[j] = env;
    }
    if right_envs[0][0] <= 0.0 {
        return Err(Error::ZeroWeighting(right_envs[0][0]));
    }

    let mut out = Vec::with_capacity(count);
    let mut probs = Vec::new();
    let mut candidates = Vec::new();
    for _ in 0..count {
        let mut v = vec![1.0];
        let mut idx = Vec::with_capacity(d);
        for (j, site) in mps.sites.iter().enumerate() {
            let env = &right_envs[j + 1];
            let rd = site.right;
            probs.clear();
            candidates.clear();
            for p in 0..site.phys {
                let u = site.apply_left(&v, p);
                let mut q = 0.0;
                for r in 0..rd {
                    for rp in 0..rd {
                        q += u[r] * env[r * rd + rp] * u[rp];
                    }
                }
                probs.push(q.max(0.0));
                candidates.push(u);
            }
            let total: f64 = probs.iter().sum();
            if total <= 0.0 {
                return Err(Error::ZeroWeighting(total));
            }
            let mut target = rng.random::<f64>() * total;
            let mut chosen = site.phys - 1;
            for (p, &q) in probs.iter().enumerate() {
                if target < q {
                    chosen = p;
                    break;
                }
                target -= q;
            }
            // Fall back past zero-probability tails left by rounding.
            while probs[chosen] == 0.0 && chosen > 0 {
                chosen -= 1;
            }
            let mut u = std::mem::take(&mut candidates[chosen]);
            let norm = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            u.iter_mut().for_each(|x| *x /= norm);
            v = u;
            idx.push(chosen as i64 - (site.phys / 2) as i64);
        }
        out.push(MultiIndex(idx));
    }
    Ok(out)
}

/// On-disk MPS layout: explicit shapes with row-major `(left, phys, right)`
/// entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MpsFile {
    pub symmetric: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tensors: Vec<TensorFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorFile {
    pub shape: [usize; 3],
    pub data: Vec<f64>,
}

impl From<&WeightMps> for MpsFile {
    fn from(m: &WeightMps) -> Self {
        MpsFile {
            symmetric: m.symmetric,
            seed: m.seed,
            tensors: m
                .sites
                .iter()
                .map(|s| TensorFile {
                    shape: s.shape(),
                    data: s.data.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<MpsFile> for WeightMps {
    type Error = Error;

    fn try_from(f: MpsFile) -> Result<Self> {
        let sites = f
            .tensors
            .into_iter()
            .map(|t| SiteTensor::new(t.shape[0], t.shape[1], t.shape[2], t.data))
            .collect::<Result<Vec<_>>>()?;
        let mut mps = WeightMps::new(sites, f.symmetric)?;
        mps.seed = f.seed;
        Ok(mps)
    }
}
