//! Config-driven runner for the `tnkernel` command.
//!
//! A run reads one JSON [`RunConfig`], executes its task and writes
//! `report.json` plus task-specific CSV/JSON artifacts into the output
//! directory. Numeric results depend only on the config and its seeds;
//! wall-clock measurements live in the report's `timings` section.

pub mod config;

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};
use tnkernel::kernel::DenseOracle;
use tnkernel::mps::{random_mps, sample_indices};
use tnkernel::pqc::{default_sample_count, fourier_fit, CircuitSpec};
use tnkernel::regression::{
    cost_report, krr_fit, krr_predict, rff_fit, Dataset, KrrModel, MeasuredTimes, RffModel,
};
use tnkernel::{FrequencyLattice, KernelEngine, WeightMps};

pub use config::{build_weighting, validate, Diagnostic, RunConfig, TaskSpec, WeightingSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error("{context}: {source}")]
    Config {
        context: String,
        #[source]
        source: tnkernel::Error,
    },
    #[error("{context}: {source}")]
    Numeric {
        context: String,
        #[source]
        source: tnkernel::Error,
    },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric { .. } | CliError::Verification(_) => EXIT_NUMERIC,
            _ => EXIT_CONFIG,
        }
    }
}

/// Sorts library errors into numeric failures (exit 3) and everything else
/// (bad inputs, exit 2).
fn classify(context: &str, e: tnkernel::Error) -> CliError {
    use tnkernel::Error as E;
    let context = context.to_string();
    match e {
        E::Factorization(_) | E::RankDeficient(_) | E::ImaginaryResidue(_) | E::ZeroWeighting(_) => {
            CliError::Numeric { context, source: e }
        }
        _ => CliError::Config { context, source: e },
    }
}

trait Context<T> {
    fn ctx(self, context: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for tnkernel::Result<T> {
    fn ctx(self, context: &str) -> Result<T, CliError> {
        self.map_err(|e| classify(context, e))
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Reads, path-resolves and seed-overrides a config file.
pub fn load_config(path: &Path, seed_override: Option<u64>) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut config = RunConfig::from_json(&text).map_err(|e| io_err(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    config.resolve_paths(base);
    if let Some(seed) = seed_override {
        config.override_seeds(seed);
    }
    Ok(config)
}

/// CSV with a header row of coordinate names; a trailing `y` column, if
/// present, is ignored.
pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let headers = r.headers().map_err(|e| io_err(path, e))?.clone();
    let ncols = if headers.iter().next_back() == Some("y") {
        headers.len() - 1
    } else {
        headers.len()
    };
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let row = rec
            .iter()
            .take(ncols)
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| io_err(path, format!("row {}: {e}", i + 1)))?;
        out.push(row);
    }
    if out.is_empty() {
        return Err(io_err(path, "no rows"));
    }
    Ok(out)
}

fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let mut buf = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| io_err(path, e))?;
    Dataset::read_csv(&buf[..]).ctx(&format!("reading {}", path.display()))
}

/// Output directory plus the list of files written so far.
struct Sink {
    dir: PathBuf,
    written: Vec<String>,
}

impl Sink {
    fn csv(&mut self, name: &str, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        w.write_record(header).map_err(|e| io_err(&path, e))?;
        for row in rows {
            w.write_record(&row).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(value).map_err(|e| io_err(&path, e))?;
        std::fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }
}

fn names(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("{prefix}_{j}")).collect()
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

/// Validated config plus the lattice and weighting it describes.
struct Prepared {
    lattice: Option<FrequencyLattice>,
    weights: Option<WeightMps>,
}

fn prepare(config: &RunConfig) -> Result<Prepared, CliError> {
    let diags = validate(config);
    if !diags.is_empty() {
        return Err(CliError::Invalid(diags));
    }
    let lattice = config.lattice.as_ref().map(|s| s.build()).transpose().ctx("lattice")?;
    let weights = match (&config.weighting, &lattice) {
        (Some(spec), Some(lat)) => Some(build_weighting(spec, lat).ctx("weighting")?),
        _ => None,
    };
    Ok(Prepared { lattice, weights })
}

/// Executes `config`, writing artifacts into `out`. Returns the report.
pub fn run(config: &RunConfig, out: &Path) -> Result<Value, CliError> {
    let start = Instant::now();
    let prep = prepare(config)?;
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let mut sink = Sink {
        dir: out.to_path_buf(),
        written: Vec::new(),
    };
    let mut timings = Map::new();
    let result = match &config.task {
        TaskSpec::KernelEval { pairs } => kernel_eval(&prep, pairs, &mut sink)?,
        TaskSpec::Gram { points, columns } => gram(&prep, points.as_deref(), columns.as_deref(), &mut sink)?,
        TaskSpec::Krr { train, test, lambda } => {
            krr(&prep, train.as_deref(), test.as_deref(), *lambda, &mut sink, &mut timings)?
        }
        TaskSpec::Rff {
            train,
            test,
            lambda,
            features,
            seed,
        } => rff(
            &prep,
            train.as_deref(),
            test.as_deref(),
            *lambda,
            *features as usize,
            *seed,
            &mut sink,
            &mut timings,
        )?,
        TaskSpec::Sample { count, seed } => sample(&prep, *count as usize, *seed, &mut sink)?,
        TaskSpec::Verify { configs, pairs, seed } => verify(*configs, *pairs, *seed, &mut sink)?,
        TaskSpec::Bench {
            dims,
            bond_dim,
            m,
            evals,
            repeats,
            seed,
        } => bench(dims, *bond_dim, *m, *evals, *repeats, *seed, &mut sink, &mut timings)?,
        TaskSpec::PqcCheck {
            circuit,
            sample_count,
            seed,
        } => pqc_check(circuit.as_deref(), *sample_count, *seed, &mut sink)?,
    };
    timings.insert("total_secs".into(), json!(start.elapsed().as_secs_f64()));
    let seeds: Map<String, Value> = config.seeds().into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    let mut artifacts = sink.written.clone();
    artifacts.push("report.json".into());
    artifacts.sort();
    let report = json!({
        "tool": { "name": "tnkernel", "version": tnkernel::VERSION },
        "task": config.task.name(),
        "config": config,
        "seeds": seeds,
        "result": result,
        "artifacts": artifacts,
        "timings": timings,
    });
    sink.json("report.json", &report)?;
    let verified = report["result"]["passed"].as_bool();
    if verified == Some(false) {
        return Err(CliError::Verification(format!(
            "see {}",
            out.join("report.json").display()
        )));
    }
    Ok(report)
}

fn engine(prep: &Prepared) -> Result<KernelEngine, CliError> {
    let (lat, w) = (prep.lattice.clone().expect("validated"), prep.weights.as_ref().expect("validated"));
    KernelEngine::new(lat, w).ctx("building kernel engine")
}

fn kernel_eval(prep: &Prepared, pairs: &[[Vec<f64>; 2]], sink: &mut Sink) -> Result<Value, CliError> {
    let e = engine(prep)?;
    let values = pairs
        .iter()
        .map(|[x, xp]| e.eval_kernel(x, xp))
        .collect::<tnkernel::Result<Vec<f64>>>()
        .ctx("kernel evaluation")?;
    let d = e.dim();
    let mut header = names("x", d);
    header.extend(names("xp", d));
    header.push("k".into());
    sink.csv(
        "kernel.csv",
        &header,
        pairs.iter().zip(&values).map(|([x, xp], k)| {
            x.iter().chain(xp).map(|v| fmt(*v)).chain([fmt(*k)]).collect()
        }),
    )?;
    Ok(json!({ "values": values, "log_norm2": e.log_norm2() }))
}

fn gram(prep: &Prepared, points: Option<&Path>, columns: Option<&Path>, sink: &mut Sink) -> Result<Value, CliError> {
    let e = engine(prep)?;
    let xs = read_points(points.expect("validated"))?;
    let g = match columns {
        Some(p) => e.gram(&xs, &read_points(p)?),
        None => e.gram_sym(&xs),
    }
    .ctx("gram matrix")?;
    let header: Vec<String> = (0..g.ncols()).map(|j| format!("col_{}", j + 1)).collect();
    sink.csv("gram.csv", &header, g.row_iter().map(|r| r.iter().map(|v| fmt(*v)).collect()))?;
    Ok(json!({ "rows": g.nrows(), "cols": g.ncols() }))
}

fn predictions_csv(sink: &mut Sink, name: &str, x: &[Vec<f64>], y: &[f64], yhat: &[f64]) -> Result<(), CliError> {
    let mut header = names("x", x[0].len());
    header.extend(["y".to_string(), "y_hat".to_string()]);
    sink.csv(
        name,
        &header,
        x.iter()
            .zip(y.iter().zip(yhat))
            .map(|(xi, (a, b))| xi.iter().map(|v| fmt(*v)).chain([fmt(*a), fmt(*b)]).collect()),
    )
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>() / a.len() as f64
}

fn krr(
    prep: &Prepared,
    train: Option<&Path>,
    test: Option<&Path>,
    lambda: f64,
    sink: &mut Sink,
    timings: &mut Map<String, Value>,
) -> Result<Value, CliError> {
    let e = engine(prep)?;
    let data = read_dataset(train.expect("validated"))?;
    let t = Instant::now();
    let model: KrrModel = krr_fit(&e, &data, lambda).ctx("kernel ridge fit")?;
    let fit_secs = t.elapsed().as_secs_f64();
    timings.insert("krr_fit_secs".into(), json!(fit_secs));
    let fitted = krr_predict(&model, &e, &data.x).ctx("kernel ridge predict")?;
    let residual = fitted
        .iter()
        .zip(&model.alpha)
        .zip(&data.y)
        .map(|((f, a), y)| (f + lambda * a - y).abs())
        .fold(0.0, f64::max);
    sink.json("model.json", &model)?;
    predictions_csv(sink, "train_predictions.csv", &data.x, &data.y, &fitted)?;
    let mut result = json!({
        "n": data.len(),
        "lambda": lambda,
        "jitter": model.jitter,
        "train_residual_inf": residual,
        "train_mse": mse(&fitted, &data.y),
    });
    if let Some(p) = test {
        let td = read_dataset(p)?;
        let pred = krr_predict(&model, &e, &td.x).ctx("kernel ridge predict")?;
        predictions_csv(sink, "test_predictions.csv", &td.x, &td.y, &pred)?;
        result["test_mse"] = json!(mse(&pred, &td.y));
    }
    Ok(result)
}

#[allow(clippy::too_many_arguments)]
fn rff(
    prep: &Prepared,
    train: Option<&Path>,
    test: Option<&Path>,
    lambda: f64,
    s: usize,
    seed: u64,
    sink: &mut Sink,
    timings: &mut Map<String, Value>,
) -> Result<Value, CliError> {
    let (lat, w) = (prep.lattice.as_ref().expect("validated"), prep.weights.as_ref().expect("validated"));
    let data = read_dataset(train.expect("validated"))?;
    let (measured, _, model) = MeasuredTimes::measure(|| (), || rff_fit(lat, w, &data, s, lambda, seed));
    let model: RffModel = model.ctx("random feature fit")?;
    timings.insert("rff_fit_secs".into(), json!(measured.rff_fit_secs));
    let cost = cost_report(data.len(), s, MeasuredTimes::default()).ctx("cost report")?;
    timings.insert("cost_measured".into(), serde_json::to_value(measured).unwrap_or(Value::Null));
    sink.json("model.json", &model)?;
    let fitted = model.predict(&data.x);
    predictions_csv(sink, "train_predictions.csv", &data.x, &data.y, &fitted)?;
    let mut result = json!({
        "n": data.len(),
        "features": s,
        "lambda": lambda,
        "seed": seed,
        "train_mse": mse(&fitted, &data.y),
        "cost": {
            "krr_space": cost.krr_space,
            "krr_time": cost.krr_time,
            "rff_space": cost.rff_space,
            "rff_time": cost.rff_time,
            "cheaper": cost.cheaper,
        },
    });
    if let Some(p) = test {
        let td = read_dataset(p)?;
        let pred = model.predict(&td.x);
        predictions_csv(sink, "test_predictions.csv", &td.x, &td.y, &pred)?;
        result["test_mse"] = json!(mse(&pred, &td.y));
    }
    Ok(result)
}

fn sample(prep: &Prepared, count: usize, seed: u64, sink: &mut Sink) -> Result<Value, CliError> {
    let w = prep.weights.as_ref().expect("validated");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = sample_indices(w, &mut rng, count).ctx("sampling")?;
    let d = w.len();
    sink.csv(
        "samples.csv",
        &names("k", d),
        samples.iter().map(|s| s.0.iter().map(|k| k.to_string()).collect()),
    )?;
    Ok(json!({ "count": count, "seed": seed }))
}

/// Random configurations with `d ∈ 1..=6`, `M_j ∈ {1, 2}`, `D ∈ 1..=4`;
/// the engine (both contraction orders) against dense enumeration.
fn verify(configs: usize, pairs: usize, seed: u64, sink: &mut Sink) -> Result<Value, CliError> {
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let (mut worst, mut worst_etk, mut worst_norm) = (0.0f64, 0.0f64, 0.0f64);
    for c in 0..configs {
        let d = rng.random_range(1..=6usize);
        let ms: Vec<usize> = (0..d).map(|_| rng.random_range(1..=2)).collect();
        let bond = rng.random_range(1..=4usize);
        let wseed: u64 = rng.random();
        let lat = FrequencyLattice::new(ms.iter().map(|&m| tnkernel::FrequencyAxis::integer(m)).collect())
            .ctx("verify lattice")?;
        let w = random_mps(&lat, bond, wseed).ctx("verify weighting")?;
        let e = KernelEngine::new(lat.clone(), &w).ctx("verify engine")?;
        let oracle = DenseOracle::new(&lat, &w.symmetrize()).ctx("verify oracle")?;
        let (mut err, mut err_etk, mut err_norm) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..pairs {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
            let k = e.eval_kernel(&x, &y).ctx("verify eval")?;
            err = err.max((k - oracle.kernel(&x, &y).ctx("verify oracle")?).abs());
            err_etk = err_etk.max((k - e.eval_kernel_etk(&x, &y).ctx("verify etk")?).abs());
            err_norm = err_norm.max((e.eval_kernel(&x, &x).ctx("verify eval")? - 1.0).abs());
        }
        worst = worst.max(err);
        worst_etk = worst_etk.max(err_etk);
        worst_norm = worst_norm.max(err_norm);
        let m_str = ms.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" ");
        rows.push(vec![
            c.to_string(),
            d.to_string(),
            m_str,
            bond.to_string(),
            wseed.to_string(),
            fmt(err),
            fmt(err_etk),
            fmt(err_norm),
        ]);
    }
    let header = ["config", "d", "m", "bond_dim", "weight_seed", "max_err_dense", "max_err_etk", "max_err_norm"];
    sink.csv("verify.csv", &header.map(String::from), rows)?;
    let passed = worst <= TOL && worst_etk <= TOL && worst_norm <= TOL;
    Ok(json!({
        "configs": configs,
        "pairs_per_config": pairs,
        "tolerance": TOL,
        "max_err_dense": worst,
        "max_err_etk": worst_etk,
        "max_err_norm": worst_norm,
        "passed": passed,
    }))
}

#[allow(clippy::too_many_arguments)]
fn bench(
    dims: &[usize],
    bond: usize,
    m: usize,
    evals: usize,
    repeats: usize,
    seed: u64,
    sink: &mut Sink,
    timings: &mut Map<String, Value>,
) -> Result<Value, CliError> {
    let mut dims = dims.to_vec();
    dims.sort_unstable();
    dims.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut per_eval = Vec::new();
    for &d in &dims {
        let lat = FrequencyLattice::integer(d, m).ctx("bench lattice")?;
        let w = random_mps(&lat, bond, seed.wrapping_add(d as u64)).ctx("bench weighting")?;
        let e = KernelEngine::new(lat, &w).ctx("bench engine")?;
        let pts: Vec<(Vec<f64>, Vec<f64>)> = (0..evals)
            .map(|_| {
                let mut p = || (0..d).map(|_| rng.random_range(-3.0..3.0)).collect::<Vec<f64>>();
                (p(), p())
            })
            .collect();
        let mut best = f64::INFINITY;
        for _ in 0..repeats {
            let t = Instant::now();
            for (x, y) in &pts {
                std::hint::black_box(e.eval_kernel(x, y).ctx("bench eval")?);
            }
            best = best.min(t.elapsed().as_secs_f64());
        }
        let secs = best / evals as f64;
        per_eval.push((d, secs));
        rows.push(vec![
            d.to_string(),
            bond.to_string(),
            e.b_mps().bond_dim().to_string(),
            m.to_string(),
            evals.to_string(),
            fmt(secs),
        ]);
    }
    let header = ["d", "bond_dim", "engine_bond_dim", "m", "evals", "secs_per_eval"];
    sink.csv("bench.csv", &header.map(String::from), rows)?;
    let lookup = |d: usize| per_eval.iter().find(|(dd, _)| *dd == d).map(|p| p.1);
    let mut ratios = Map::new();
    for w in per_eval.windows(2) {
        ratios.insert(format!("t{}_over_t{}", w[1].0, w[0].0), json!(w[1].1 / w[0].1));
    }
    if let (Some(a), Some(b)) = (lookup(50), lookup(100)) {
        ratios.insert("t100_over_t50".into(), json!(b / a));
    }
    timings.insert("bench_ratios".into(), Value::Object(ratios));
    timings.insert(
        "secs_per_eval".into(),
        Value::Object(per_eval.iter().map(|(d, s)| (d.to_string(), json!(s))).collect()),
    );
    Ok(json!({ "dims": dims, "bond_dim": bond, "m": m, "evals": evals, "repeats": repeats }))
}

fn pqc_check(circuit: Option<&Path>, sample_count: Option<usize>, seed: u64, sink: &mut Sink) -> Result<Value, CliError> {
    let path = circuit.expect("validated");
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let c = CircuitSpec::from_json(&text).ctx("circuit")?;
    let lat = c.induced_lattice().ctx("induced lattice")?;
    let n = sample_count.unwrap_or_else(|| default_sample_count(&lat));
    let fit = fourier_fit(&c, &lat, n, seed).ctx("fourier fit")?;
    let d = lat.dim();
    let mut header = names("k", d);
    header.extend(names("omega", d));
    header.extend(["re".to_string(), "im".to_string()]);
    sink.csv(
        "coefficients.csv",
        &header,
        fit.coefficients.iter().map(|co| {
            co.index
                .0
                .iter()
                .map(|k| k.to_string())
                .chain(co.frequency.iter().map(|v| fmt(*v)))
                .chain([fmt(co.re), fmt(co.im)])
                .collect()
        }),
    )?;
    Ok(json!({
        "lattice": lat.to_spec(),
        "sample_count": n,
        "residual": fit.residual,
        "conjugacy_error": fit.conjugacy_error(),
        "warnings": fit.warnings,
    }))
}
