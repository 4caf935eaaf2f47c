//! Run configuration and its validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tnkernel::mps::{product_weights, random_mps, uniform_mps};
use tnkernel::pqc::CircuitSpec;
use tnkernel::{FrequencyLattice, LatticeSpec, WeightMps};

/// Top-level config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weighting: Option<WeightingSpec>,
    pub task: TaskSpec,
    /// Worker threads for Gram and bench workloads; rayon's default if unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightingSpec {
    Uniform,
    Product { vectors: Vec<Vec<f64>> },
    Random { bond_dim: i64, seed: u64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    /// Kernel values for explicit point pairs.
    KernelEval { pairs: Vec<[Vec<f64>; 2]> },
    /// Gram matrix of a point set against itself, or against `columns`.
    Gram {
        #[serde(default)]
        points: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        columns: Option<PathBuf>,
    },
    Krr {
        #[serde(default)]
        train: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test: Option<PathBuf>,
        lambda: f64,
    },
    Rff {
        #[serde(default)]
        train: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test: Option<PathBuf>,
        lambda: f64,
        features: i64,
        seed: u64,
    },
    Sample { count: i64, seed: u64 },
    /// Engine against the dense oracle on random small configurations.
    Verify {
        #[serde(default = "default_verify_configs")]
        configs: usize,
        #[serde(default = "default_verify_pairs")]
        pairs: usize,
        #[serde(default)]
        seed: u64,
    },
    Bench {
        #[serde(default = "default_bench_dims")]
        dims: Vec<usize>,
        #[serde(default = "default_bench_bond")]
        bond_dim: usize,
        #[serde(default = "default_bench_m")]
        m: usize,
        #[serde(default = "default_bench_evals")]
        evals: usize,
        #[serde(default = "default_bench_repeats")]
        repeats: usize,
        #[serde(default)]
        seed: u64,
    },
    PqcCheck {
        #[serde(default)]
        circuit: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sample_count: Option<usize>,
        #[serde(default)]
        seed: u64,
    },
}

fn default_verify_configs() -> usize {
    50
}
fn default_verify_pairs() -> usize {
    20
}
fn default_bench_dims() -> Vec<usize> {
    vec![25, 50, 100]
}
fn default_bench_bond() -> usize {
    4
}
fn default_bench_m() -> usize {
    1
}
fn default_bench_evals() -> usize {
    200
}
fn default_bench_repeats() -> usize {
    5
}

impl TaskSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TaskSpec::KernelEval { .. } => "kernel-eval",
            TaskSpec::Gram { .. } => "gram",
            TaskSpec::Krr { .. } => "krr",
            TaskSpec::Rff { .. } => "rff",
            TaskSpec::Sample { .. } => "sample",
            TaskSpec::Verify { .. } => "verify",
            TaskSpec::Bench { .. } => "bench",
            TaskSpec::PqcCheck { .. } => "pqc-check",
        }
    }

    /// Tasks that run on the configured lattice and weighting.
    pub fn needs_weighting(&self) -> bool {
        !matches!(self, TaskSpec::Verify { .. } | TaskSpec::Bench { .. } | TaskSpec::PqcCheck { .. })
    }
}

impl RunConfig {
    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Rewrites relative paths against `base` (the config file's directory).
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(WeightingSpec::File { path }) = &mut self.weighting {
            fix(path);
        }
        match &mut self.task {
            TaskSpec::Gram { points, columns } => {
                points.iter_mut().chain(columns.iter_mut()).for_each(fix);
            }
            TaskSpec::Krr { train, test, .. } | TaskSpec::Rff { train, test, .. } => {
                train.iter_mut().chain(test.iter_mut()).for_each(fix);
            }
            TaskSpec::PqcCheck { circuit, .. } => circuit.iter_mut().for_each(fix),
            _ => {}
        }
    }

    /// Replaces every seed in the config.
    pub fn override_seeds(&mut self, seed: u64) {
        if let Some(WeightingSpec::Random { seed: s, .. }) = &mut self.weighting {
            *s = seed;
        }
        match &mut self.task {
            TaskSpec::Rff { seed: s, .. }
            | TaskSpec::Sample { seed: s, .. }
            | TaskSpec::Verify { seed: s, .. }
            | TaskSpec::Bench { seed: s, .. }
            | TaskSpec::PqcCheck { seed: s, .. } => *s = seed,
            _ => {}
        }
    }

    /// Every seed the run will consume, by role.
    pub fn seeds(&self) -> Vec<(&'static str, u64)> {
        let mut out = Vec::new();
        if let Some(WeightingSpec::Random { seed, .. }) = &self.weighting {
            out.push(("weighting", *seed));
        }
        match &self.task {
            TaskSpec::Rff { seed, .. }
            | TaskSpec::Sample { seed, .. }
            | TaskSpec::Verify { seed, .. }
            | TaskSpec::Bench { seed, .. }
            | TaskSpec::PqcCheck { seed, .. } => out.push(("task", *seed)),
            _ => {}
        }
        out
    }
}

/// One problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// Dotted path of the offending field.
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn diag(field: &str, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Builds the weighting described by `spec` on `lattice`.
pub fn build_weighting(spec: &WeightingSpec, lattice: &FrequencyLattice) -> tnkernel::Result<WeightMps> {
    match spec {
        WeightingSpec::Uniform => Ok(uniform_mps(lattice)),
        WeightingSpec::Product { vectors } => product_weights(lattice, vectors),
        WeightingSpec::Random { bond_dim, seed } => {
            let d = usize::try_from(*bond_dim)
                .map_err(|_| tnkernel::Error::InvalidBondDim(0))?;
            random_mps(lattice, d, *seed)
        }
        WeightingSpec::File { path } => {
            let w = WeightMps::from_json(&std::fs::read_to_string(path)?)?;
            w.check_lattice(lattice)?;
            Ok(w)
        }
    }
}

/// Schema and cross-field checks; an empty list means the config is valid.
/// File contents are read where the check depends on them (weighting and
/// circuit files); datasets are only checked for presence.
pub fn validate(config: &RunConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if config.threads == Some(0) {
        out.push(diag("threads", "must be >= 1"));
    }
    let task = &config.task;
    let lattice = match &config.lattice {
        Some(spec) => match spec.build() {
            Ok(l) => Some(l),
            Err(e) => {
                out.push(diag("lattice", e.to_string()));
                None
            }
        },
        None => {
            if task.needs_weighting() {
                out.push(diag("lattice", format!("required by task {}", task.name())));
            }
            None
        }
    };
    let mut weights = None;
    match (&config.weighting, &lattice) {
        (None, _) if task.needs_weighting() => {
            out.push(diag("weighting", format!("required by task {}", task.name())));
        }
        (Some(WeightingSpec::Random { bond_dim, .. }), _) if *bond_dim < 1 => {
            out.push(diag("weighting.bond_dim", "must be >= 1"));
        }
        (Some(spec), Some(lat)) => match build_weighting(spec, lat) {
            Ok(w) => weights = Some(w),
            Err(e) => out.push(diag("weighting", e.to_string())),
        },
        _ => {}
    }
    let dim = lattice.as_ref().map(FrequencyLattice::dim);
    let check_lambda = |out: &mut Vec<Diagnostic>, lambda: f64| {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            out.push(diag("task.lambda", "must be finite and >= 0"));
        }
    };
    match task {
        TaskSpec::KernelEval { pairs } => {
            if pairs.is_empty() {
                out.push(diag("task.pairs", "at least one pair required"));
            }
            if let Some(d) = dim {
                for (i, [x, xp]) in pairs.iter().enumerate() {
                    if x.len() != d || xp.len() != d {
                        out.push(diag(&format!("task.pairs[{i}]"), format!("points must have {d} coordinates")));
                    }
                }
            }
        }
        TaskSpec::Gram { points, .. } => {
            if points.is_none() {
                out.push(diag("task.points", "path to a points CSV is required"));
            }
        }
        TaskSpec::Krr { train, lambda, .. } => {
            if train.is_none() {
                out.push(diag("task.train", "path to a training CSV is required"));
            }
            check_lambda(&mut out, *lambda);
        }
        TaskSpec::Rff {
            train,
            lambda,
            features,
            ..
        } => {
            if train.is_none() {
                out.push(diag("task.train", "path to a training CSV is required"));
            }
            check_lambda(&mut out, *lambda);
            if *features <= 0 {
                out.push(diag("task.features", "number of random features must be >= 1"));
            }
        }
        TaskSpec::Sample { count, .. } => {
            if *count <= 0 {
                out.push(diag("task.count", "must be >= 1"));
            }
            if let Some(w) = &weights {
                if w.log_squared_sum() == f64::NEG_INFINITY {
                    out.push(diag("weighting", "sampling needs a weighting that is not identically zero"));
                }
            }
        }
        TaskSpec::Verify { configs, pairs, .. } => {
            if *configs == 0 {
                out.push(diag("task.configs", "must be >= 1"));
            }
            if *pairs == 0 {
                out.push(diag("task.pairs", "must be >= 1"));
            }
        }
        TaskSpec::Bench {
            dims,
            bond_dim,
            m,
            evals,
            repeats,
            ..
        } => {
            if dims.is_empty() || dims.contains(&0) {
                out.push(diag("task.dims", "need at least one dimension, all >= 1"));
            }
            for (v, f) in [(bond_dim, "bond_dim"), (m, "m"), (evals, "evals"), (repeats, "repeats")] {
                if *v == 0 {
                    out.push(diag(&format!("task.{f}"), "must be >= 1"));
                }
            }
        }
        TaskSpec::PqcCheck { circuit, sample_count, .. } => match circuit {
            None => out.push(diag("task.circuit", "path to a circuit JSON is required")),
            Some(path) => match std::fs::read_to_string(path) {
                Err(e) => out.push(diag("task.circuit", format!("{}: {e}", path.display()))),
                Ok(s) => match CircuitSpec::from_json(&s) {
                    Err(e) => out.push(diag("task.circuit", e.to_string())),
                    Ok(c) => {
                        if let (Some(n), Ok(lat)) = (sample_count, c.induced_lattice()) {
                            if (*n as u128) < 2 * lat.size() {
                                out.push(diag(
                                    "task.sample_count",
                                    format!("must be >= twice the lattice size {}", lat.size()),
                                ));
                            }
                        }
                    }
                },
            },
        },
    }
    out
}
