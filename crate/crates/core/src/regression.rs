//! Kernel ridge regression with the exact kernel, and the random Fourier
//! feature baseline whose frequencies are drawn exactly from the kernel's
//! spectral distribution.

use std::io::{Read, Write};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelEngine;
use crate::lattice::{FrequencyLattice, MultiIndex};
use crate::linalg::solve_spd;
use crate::mps::{c_tensor_mps, sample_indices, WeightMps};

/// Upper bound on `n · 2S` design entries held by [`rff_fit`].
pub const RFF_MEMORY_CAP: usize = 200_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidArgument("dataset is empty".into()));
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        let d = x[0].len();
        for row in &x {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
        }
        if x.iter().flatten().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset entry".into()));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x[0].len()
    }

    /// Reads a CSV with a header row; the last column is the target.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let width = rdr.headers()?.len();
        if width < 2 {
            return Err(Error::InvalidArgument(
                "dataset CSV needs columns x_1..x_d,y".into(),
            ));
        }
        let mut x = Vec::new();
        let mut y = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidArgument(format!("bad number {s:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            y.push(vals[width - 1]);
            x.push(vals[..width - 1].to_vec());
        }
        Self::new(x, y)
    }

    /// Writes header `x_1, ..., x_d, y` and one row per sample.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim()).map(|j| format!("x_{j}")).collect();
        header.push("y".into());
        w.write_record(&header)?;
        for (row, y) in self.x.iter().zip(&self.y) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(y.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fitted kernel ridge model: `(G + λI) α = y`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrrModel {
    pub alpha: Vec<f64>,
    pub x_train: Vec<Vec<f64>>,
    pub lambda: f64,
    /// Diagonal shift added by the factorization fallback, if any.
    pub jitter: f64,
}

pub fn krr_fit(engine: &KernelEngine, data: &Dataset, lambda: f64) -> Result<KrrModel> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!("ridge must be >= 0, got {lambda}")));
    }
    let g = engine.gram_sym(&data.x)?;
    krr_fit_gram(&g, data, lambda)
}

/// Same as [`krr_fit`] with a precomputed training Gram matrix.
pub fn krr_fit_gram(g: &DMatrix<f64>, data: &Dataset, lambda: f64) -> Result<KrrModel> {
    let n = data.len();
    let a = g + DMatrix::identity(n, n) * lambda;
    let y = DVector::from_column_slice(&data.y);
    let (alpha, jitter) = solve_spd(&a, &y)?;
    Ok(KrrModel {
        alpha: alpha.as_slice().to_vec(),
        x_train: data.x.clone(),
        lambda,
        jitter,
    })
}

/// `ŷ_q = Σ_i α_i K(x_i, x_q)`.
pub fn krr_predict(model: &KrrModel, engine: &KernelEngine, xq: &[Vec<f64>]) -> Result<Vec<f64>> {
    let g = engine.gram(xq, &model.x_train)?;
    let alpha = DVector::from_column_slice(&model.alpha);
    Ok((g * alpha).as_slice().to_vec())
}

/// `S` frequencies drawn from the kernel's spectral distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RffFeatures {
    pub indices: Vec<MultiIndex>,
    pub frequencies: Vec<Vec<f64>>,
    pub seed: u64,
}

impl RffFeatures {
    /// Draws `s` frequencies from the spectral distribution of the kernel
    /// built from `weights` on `lattice`.
    ///
    /// The kernel's full-lattice spectrum is `B[k]²` with `B = C ∘ w_s`, so
    /// the zero frequency carries twice the squared weight of `w_s`;
    /// sampling is done from `B`.
    pub fn sample(lattice: &FrequencyLattice, weights: &WeightMps, s: usize, seed: u64) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidArgument("number of features must be >= 1".into()));
        }
        weights.check_lattice(lattice)?;
        let ws = if weights.is_symmetric() {
            weights.clone()
        } else {
            weights.symmetrize()
        };
        let b = c_tensor_mps(lattice).hadamard(&ws)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let indices = sample_indices(&b, &mut rng, s)?;
        let frequencies = indices
            .iter()
            .map(|i| lattice.frequency_of(i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            indices,
            frequencies,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// `z(x) = (cos⟨ω_s,x⟩, sin⟨ω_s,x⟩)_s / √S`, interleaved.
    pub fn map(&self, x: &[f64]) -> Vec<f64> {
        let scale = 1.0 / (self.len() as f64).sqrt();
        let mut z = Vec::with_capacity(2 * self.len());
        for w in &self.frequencies {
            let phase: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
            let (s, c) = phase.sin_cos();
            z.push(scale * c);
            z.push(scale * s);
        }
        z
    }

    /// `z(x) · z(x')`.
    pub fn kernel_estimate(&self, x: &[f64], xp: &[f64]) -> f64 {
        let za = self.map(x);
        let zb = self.map(xp);
        za.iter().zip(&zb).map(|(a, b)| a * b).sum()
    }
}

/// Linear model on `S` random Fourier features.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RffModel {
    pub features: RffFeatures,
    /// Interleaved `(cos, sin)` weights, length `2S`.
    pub beta: Vec<f64>,
    pub lambda: f64,
}

impl RffModel {
    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn seed(&self) -> u64 {
        self.features.seed
    }

    pub fn predict(&self, xq: &[Vec<f64>]) -> Vec<f64> {
        xq.iter()
            .map(|x| self.features.map(x).iter().zip(&self.beta).map(|(z, b)| z * b).sum())
            .collect()
    }
}

/// Samples `S` features and solves `(ZᵀZ + λI) β = Zᵀy`.
///
/// When `2S > n` the equivalent dual system `(ZZᵀ + λI) a = y`,
/// `β = Zᵀa` is solved instead, so large `S` costs `O(n²S + n³)`.
pub fn rff_fit(
    lattice: &FrequencyLattice,
    weights: &WeightMps,
    data: &Dataset,
    s: usize,
    lambda: f64,
    seed: u64,
) -> Result<RffModel> {
    if s == 0 {
        return Err(Error::InvalidArgument("number of features must be >= 1".into()));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!("ridge must be >= 0, got {lambda}")));
    }
    if data.dim() != lattice.dim() {
        return Err(Error::DimensionMismatch {
            expected: lattice.dim(),
            got: data.dim(),
        });
    }
    let n = data.len();
    let requested = n.saturating_mul(2 * s);
    if requested > RFF_MEMORY_CAP {
        return Err(Error::MemoryCap {
            requested,
            cap: RFF_MEMORY_CAP,
        });
    }
    let features = RffFeatures::sample(lattice, weights, s, seed)?;
    let mut z = DMatrix::zeros(n, 2 * s);
    for (i, x) in data.x.iter().enumerate() {
        for (j, v) in features.map(x).into_iter().enumerate() {
            z[(i, j)] = v;
        }
    }
    let y = DVector::from_column_slice(&data.y);
    let beta = if 2 * s <= n {
        let zt = z.transpose();
        let a = &zt * &z + DMatrix::identity(2 * s, 2 * s) * lambda;
        solve_spd(&a, &(&zt * y))?.0
    } else {
        let a = &z * z.transpose() + DMatrix::identity(n, n) * lambda;
        let (dual, _) = solve_spd(&a, &y)?;
        z.transpose() * dual
    };
    Ok(RffModel {
        features,
        beta: beta.as_slice().to_vec(),
        lambda,
    })
}

/// `z(x) · z(x')` for a fitted model.
pub fn rff_kernel_estimate(model: &RffModel, x: &[f64], xp: &[f64]) -> f64 {
    model.features.kernel_estimate(x, xp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Krr,
    Rff,
}

/// Measured wall times in seconds; zero means not run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasuredTimes {
    pub krr_fit_secs: f64,
    pub rff_fit_secs: f64,
}

impl MeasuredTimes {
    /// Times `krr` and `rff` closures.
    pub fn measure<A, B>(krr: impl FnOnce() -> A, rff: impl FnOnce() -> B) -> (Self, A, B) {
        let t = Instant::now();
        let a = krr();
        let krr_fit_secs = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let b = rff();
        let rff_fit_secs = t.elapsed().as_secs_f64();
        (
            Self {
                krr_fit_secs,
                rff_fit_secs,
            },
            a,
            b,
        )
    }
}

/// Predicted asymptotic costs in abstract units, plus measured times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub n: usize,
    pub s: usize,
    pub krr_space: f64,
    pub krr_time: f64,
    pub rff_space: f64,
    pub rff_time: f64,
    pub cheaper: Method,
    pub measured: MeasuredTimes,
}

/// KRR: `n²` space, `n³` time. RFF: `nS` space, `nS² + S³` time.
pub fn cost_report(n: usize, s: usize, measured: MeasuredTimes) -> Result<CostReport> {
    if n == 0 || s == 0 {
        return Err(Error::InvalidArgument("cost report needs n, S >= 1".into()));
    }
    if measured.krr_fit_secs < 0.0 || measured.rff_fit_secs < 0.0 {
        return Err(Error::InvalidArgument("negative measured time".into()));
    }
    let (nf, sf) = (n as f64, s as f64);
    let krr_time = nf.powi(3);
    let rff_time = nf * sf * sf + sf.powi(3);
    Ok(CostReport {
        n,
        s,
        krr_space: nf * nf,
        krr_time,
        rff_space: nf * sf,
        rff_time,
        cheaper: if rff_time < krr_time { Method::Rff } else { Method::Krr },
        measured,
    })
}
