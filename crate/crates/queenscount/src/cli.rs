//! Command-line interface: one subcommand per operation, canonical JSON on
//! stdout, exit code 0 on success, 2 on usage errors, 1 on estimator
//! failures.
//!
//! Machine output is canonical: object keys are sorted, every float is
//! rounded to 12 significant digits, and non-finite values serialize as
//! null, so identical flags produce byte-identical output regardless of
//! `--threads`. Wall-clock timing is therefore only attached with
//! `--timing`.

use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::board::{parse_fixed_cells, BoardSpec, Embedding};
use crate::estimators::{
    ce_count, naive_count, nested_sampling_count, split_sampling_count, splitting_count,
    wang_landau_count, CrossEntropyParams, Diagnostics, Estimate, EstimatorError,
    FlatHistogramConfig, NestedMode, NestedParams, SplitSamplingParams, SplittingParams,
    WangLandauParams,
};
use crate::exact::{count_completion, count_exact};
use crate::harness::{
    merge_replicas, replica_seed, report_csv, run_experiment, simkin_reference, ExperimentConfig,
};
use crate::quantile::{riemann_probe, ProbeIntegrand};

pub const THREADS_ENV: &str = "QUEENSCOUNT_THREADS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::InvalidParam { .. } | EstimatorError::Board(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputMode {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Parser)]
#[command(
    name = "queenscount",
    about = "Count n-queens solutions exactly and by Monte Carlo rare-event estimators",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct CommonFlags {
    /// Board size.
    #[arg(long)]
    n: usize,
    /// Fixed cells as 1-indexed "row,col;row,col".
    #[arg(long, default_value = "")]
    fixed: String,
    /// Global seed; all randomness derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent replicas merged in index order.
    #[arg(long, default_value_t = 1)]
    replicas: u64,
    /// Worker threads (0 = library default); falls back to QUEENSCOUNT_THREADS.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output mode.
    #[arg(long, value_enum, default_value_t = OutputMode::Json)]
    output: OutputMode,
    /// Force JSON output (same as --output json).
    #[arg(long)]
    json: bool,
    /// Attach wall-clock timing (breaks byte-reproducibility).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact solution count by bitmask depth-first search.
    Exact {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Exact count of solutions extending the given fixed cells.
    Completion {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Naive Monte Carlo hit counting.
    Naive {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long, value_enum, default_value_t = EmbeddingArg::Permutation)]
        embedding: EmbeddingArg,
        /// Number of uniform samples.
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
    },
    /// Adaptive multilevel splitting (product estimator).
    Split {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long, value_enum, default_value_t = EmbeddingArg::Permutation)]
        embedding: EmbeddingArg,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        /// Quantile fraction per level.
        #[arg(long, default_value_t = 0.25)]
        rho: f64,
        #[arg(long = "n-per-level", default_value_t = 2_000)]
        n_per_level: usize,
        /// Decorrelation sweeps after each resampling.
        #[arg(long = "burn-in", default_value_t = 8)]
        burn_in: usize,
    },
    /// Cross-entropy importance sampling (row-wise embedding).
    Ce {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        #[arg(long = "samples-per-iter", default_value_t = 2_000)]
        samples_per_iter: usize,
        #[arg(long = "elite-rho", default_value_t = 0.1)]
        elite_rho: f64,
        #[arg(long, default_value_t = 0.7)]
        smoothing: f64,
        #[arg(long, default_value_t = 30)]
        iterations: usize,
        /// Final-pass sample size (0 = samples-per-iter).
        #[arg(long = "final-samples", default_value_t = 0)]
        final_samples: usize,
        /// Uniform fraction of the defensive final-pass mixture.
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
    },
    /// Nested sampling (evidence or rare-event mode).
    Nested {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long, value_enum, default_value_t = EmbeddingArg::Permutation)]
        embedding: EmbeddingArg,
        #[arg(long, default_value_t = 50_000_000)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = NestedModeArg::RareEvent)]
        mode: NestedModeArg,
        /// Inverse temperature for evidence mode.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long = "n-live", default_value_t = 1_000)]
        n_live: usize,
        /// Kernel steps per replacement (0 = 5n).
        #[arg(long = "steps-per-replacement", default_value_t = 0)]
        steps_per_replacement: usize,
    },
    /// Split sampling with adaptive level weights.
    Splitsamp {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long = "t-max", default_value_t = 64)]
        t_max: usize,
        #[arg(long = "n-level", default_value_t = 500)]
        n_level: usize,
        /// Level-weight boost exponent Lambda.
        #[arg(long, default_value_t = 0.0)]
        boost: f64,
        #[arg(long, default_value_t = 200_000)]
        refine: u64,
        /// Enable flat-histogram weight adaptation before measurement.
        #[arg(long)]
        fh: bool,
    },
    /// Wang-Landau density-of-states estimation.
    Wanglandau {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long, default_value_t = 200_000_000)]
        budget: u64,
        #[arg(long, default_value_t = 0.95)]
        flatness: f64,
        #[arg(long = "ln-f-init", default_value_t = 1.0)]
        ln_f_init: f64,
        #[arg(long = "ln-f-final", default_value_t = 1e-8)]
        ln_f_final: f64,
        #[arg(long = "check-interval", default_value_t = 10_000)]
        check_interval: u64,
    },
    /// Convergence-rate probe for the quantile estimators.
    Probe {
        /// Estimator to probe.
        #[arg(long, default_value = "riemann")]
        estimator: String,
        #[arg(long, default_value = "quadratic")]
        integrand: String,
        /// Comma-separated sample sizes.
        #[arg(long, default_value = "16,32,64,128,256,512,1024,2048,4096")]
        sizes: String,
        #[arg(long, default_value_t = 50)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutputMode::Json)]
        output: OutputMode,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        timing: bool,
    },
    /// Run a method sweep from a JSON config file.
    Bench {
        /// Path to the experiment config (JSON).
        #[arg(long)]
        config: std::path::PathBuf,
        /// Write the JSON report here in addition to stdout.
        #[arg(long = "out-json")]
        out_json: Option<std::path::PathBuf>,
        /// Write the flat CSV report here.
        #[arg(long = "out-csv")]
        out_csv: Option<std::path::PathBuf>,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long, value_enum, default_value_t = OutputMode::Json)]
        output: OutputMode,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        timing: bool,
    },
    /// Reference asymptotic count (n e^{-alpha})^n.
    Simkin {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = OutputMode::Json)]
        output: OutputMode,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EmbeddingArg {
    Permutation,
    Rowwise,
    Binary,
}

impl From<EmbeddingArg> for Embedding {
    fn from(e: EmbeddingArg) -> Embedding {
        match e {
            EmbeddingArg::Permutation => Embedding::Permutation,
            EmbeddingArg::Rowwise => Embedding::RowWise,
            EmbeddingArg::Binary => Embedding::Binary,
        }
    }
}

fn embedding_name(e: Embedding) -> &'static str {
    match e {
        Embedding::Permutation => "permutation",
        Embedding::RowWise => "rowwise",
        Embedding::Binary => "binary",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NestedModeArg {
    RareEvent,
    Evidence,
}

/// Rounds to 12 significant decimal digits; canonical float formatting.
fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let exp = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(11 - exp);
    (x * scale).round() / scale
}

fn canonicalize(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    *value = serde_json::Number::from_f64(round_sig(f))
                        .map(Value::Number)
                        .unwrap_or(Value::Null);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(canonicalize),
        Value::Object(map) => map.values_mut().for_each(canonicalize),
        _ => {}
    }
}

/// Canonical JSON text: sorted keys (serde_json maps are ordered), floats
/// rounded to 12 significant digits, trailing newline.
pub fn canonical_json(value: &Value) -> String {
    let mut v = value.clone();
    canonicalize(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("canonical value serializes");
    s.push('\n');
    s
}

fn human_table(value: &Value) -> String {
    let mut out = String::new();
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(map) => {
                for (k, val) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, val, out);
                }
            }
            Value::Array(items) if items.len() > 8 => {
                out.push_str(&format!("{prefix:<28} [{} entries]\n", items.len()));
            }
            other => {
                out.push_str(&format!("{prefix:<28} {other}\n"));
            }
        }
    }
    walk("", value, &mut out);
    out
}

fn single_row_csv(value: &Value) -> String {
    let Value::Object(map) = value else {
        return String::new();
    };
    let scalar_keys: Vec<&String> = map
        .iter()
        .filter(|(_, v)| !matches!(v, Value::Object(_) | Value::Array(_)))
        .map(|(k, _)| k)
        .collect();
    let header = scalar_keys
        .iter()
        .map(|k| k.as_str())
        .collect::<Vec<_>>()
        .join(",");
    let row = scalar_keys
        .iter()
        .map(|k| match &map[k.as_str()] {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        })
        .collect::<Vec<_>>()
        .join(",");
    format!("{header}\n{row}\n")
}

fn render(value: Value, mode: OutputMode) -> String {
    match mode {
        OutputMode::Json => canonical_json(&value),
        OutputMode::Human => human_table(&value),
        OutputMode::Csv => single_row_csv(&value),
    }
}

fn effective_mode(mode: OutputMode, json_flag: bool) -> OutputMode {
    if json_flag {
        OutputMode::Json
    } else {
        mode
    }
}

fn thread_count(flag: usize) -> usize {
    if flag > 0 {
        return flag;
    }
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let t = thread_count(threads);
    if t == 0 {
        Ok(f())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}

fn parse_common_spec(
    common: &CommonFlags,
    embedding: Embedding,
) -> Result<Arc<BoardSpec>, CliError> {
    if common.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let fixed = parse_fixed_cells(&common.fixed).map_err(|e| CliError::Usage(e.to_string()))?;
    let spec =
        BoardSpec::new(common.n, embedding, fixed).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Arc::new(spec))
}

/// Runs `replicas` copies of the estimator in parallel and merges them in
/// replica order. With one replica the seed is used directly.
fn replicated(
    common: &CommonFlags,
    run: impl Fn(u64) -> Result<Estimate, EstimatorError> + Sync,
) -> Result<(Estimate, Option<Diagnostics>), CliError> {
    use rayon::prelude::*;
    if common.replicas == 0 {
        return Err(CliError::Usage("--replicas must be at least 1".into()));
    }
    if common.replicas == 1 {
        let est = run(common.seed)?;
        return Ok((est, None));
    }
    let results: Result<Vec<Estimate>, EstimatorError> = (0..common.replicas)
        .into_par_iter()
        .map(|r| run(replica_seed(common.seed, r)))
        .collect();
    let results = results?;
    let per_replica = Diagnostics::None;
    let merged = merge_replicas(&results).expect("at least one replica");
    Ok((merged, Some(per_replica)))
}

fn estimate_value(
    method: &str,
    common: &CommonFlags,
    embedding: Embedding,
    est: &Estimate,
) -> Value {
    let mut map = Map::new();
    map.insert("method".into(), json!(method));
    map.insert("n".into(), json!(common.n));
    map.insert("embedding".into(), json!(embedding_name(embedding)));
    map.insert("fixed".into(), json!(common.fixed));
    map.insert("seed".into(), json!(common.seed));
    map.insert("replicas".into(), json!(common.replicas));
    map.insert("count".into(), json!(est.count));
    map.insert("log_count".into(), json!(est.log_count));
    map.insert("stderr_log".into(), json!(est.stderr_log));
    map.insert("budget_used".into(), json!(est.budget_used));
    map.insert(
        "diagnostics".into(),
        serde_json::to_value(&est.diagnostics).expect("diagnostics serialize"),
    );
    Value::Object(map)
}

fn attach_timing(value: &mut Value, timing: bool, start: std::time::Instant) {
    if timing {
        if let Value::Object(map) = value {
            map.insert(
                "elapsed_ms".into(),
                json!(start.elapsed().as_millis() as u64),
            );
        }
    }
}

/// Parses argv and runs the command, returning the rendered stdout payload.
pub fn run<I, S>(argv: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Usage(format!("__display__{e}"))
        }
        _ => CliError::Usage(e.to_string()),
    })?;
    let start = std::time::Instant::now();

    match cli.command {
        Command::Exact { common } => exact_command(&common, false, start),
        Command::Completion { common } => exact_command(&common, true, start),
        Command::Naive {
            common,
            embedding,
            budget,
        } => {
            let emb: Embedding = embedding.into();
            let spec = parse_common_spec(&common, emb)?;
            let (est, _) = with_pool(common.threads, || {
                replicated(&common, |seed| Ok(naive_count(&spec, budget, seed)))
            })??;
            let mut value = estimate_value("naive", &common, emb, &est);
            attach_timing(&mut value, common.timing, start);
            Ok(render(value, effective_mode(common.output, common.json)))
        }
        Command::Split {
            common,
            embedding,
            budget,
            rho,
            n_per_level,
            burn_in,
        } => {
            let emb: Embedding = embedding.into();
            let spec = parse_common_spec(&common, emb)?;
            let params = SplittingParams {
                n_per_level,
                rho,
                burn_in_sweeps: burn_in,
                budget,
                move_set: None,
            };
            let (est, _) = with_pool(common.threads, || {
                replicated(&common, |seed| {
                    splitting_count(&spec, &params, seed).map(|(e, _)| e)
                })
            })??;
            let mut value = estimate_value("split", &common, emb, &est);
            attach_timing(&mut value, common.timing, start);
            Ok(render(value, effective_mode(common.output, common.json)))
        }
        Command::Ce {
            common,
            budget,
            samples_per_iter,
            elite_rho,
            smoothing,
            iterations,
            final_samples,
            alpha,
        } => {
            let spec = parse_common_spec(&common, Embedding::RowWise)?;
            let params = CrossEntropyParams {
                samples_per_iter,
                elite_rho,
                smoothing,
                iterations,
                defensive_alpha: alpha,
                final_samples,
            };
            let _ = budget;
            let (est, _) = with_pool(common.threads, || {
                replicated(&common, |seed| ce_count(&spec, &params, seed))
            })??;
            let mut value = estimate_value("ce", &common, Embedding::RowWise, &est);
            attach_timing(&mut value, common.timing, start);
            Ok(render(value, effective_mode(common.output, common.json)))
        }
        Command::Nested {
            common,
            embedding,
            budget,
            mode,
            beta,
            n_live,
            steps_per_replacement,
        } => {
            let emb: Embedding = embedding.into();
            let spec = parse_common_spec(&common, emb)?;
            let nested_mode = match mode {
                NestedModeArg::RareEvent => NestedMode::RareEvent,
                NestedModeArg::Evidence => NestedMode::Evidence { beta },
            };
            let mut params = NestedParams::new(n_live, nested_mode);
            params.budget = budget;
            params.steps_per_replacement = steps_per_replacement;
            let (est, _) = with_pool(common.threads, || {
                replicated(&common, |seed| nested_sampling_count(&spec, &params, seed))
            })??;
            let mut value = estimate_value("nested", &common, emb, &est);
            attach_timing(&mut value, common.timing, start);
            Ok(render(value, effective_mode(common.output, common.json)))
        }
        Command::Splitsamp {
            common,
            budget,
            rho,
            t_max,
            n_level,
            boost,
            refine,
            fh,
        } => {
            let spec = parse_common_spec(&common, Embedding::Permutation)?;
            let params = SplitSamplingParams {
                rho,
                t_max,
                n_level,
                lambda_boost: boost,
                refine_steps: refine,
                flat_histogram: fh.then(FlatHistogramConfig::default),
                budget,
                ..Default::default()
            };
            let (est, _) = with_pool(common.threads, || {
                replicated(&common, |seed| split_sampling_count(&spec, &params, seed))
            })??;
            let mut value = estimate_value("splitsamp", &common, Embedding::Permutation, &est);
            attach_timing(&mut value, common.timing, start);
            Ok(render(value, effective_mode(common.output, common.json)))
        }
        Command::Wanglandau {
            common,
            budget,
            flatness,
            ln_f_init,
            ln_f_final,
            check_interval,
        } => {
            let spec = parse_common_spec(&common, Embedding::Permutation)?;
            let params = WangLandauParams {
                flatness,
                ln_f_init,
                ln_f_final,
                check_interval,
                budget,
                move_set: None,
            };
            if common.replicas == 1 {
                let (est, dos) = with_pool(common.threads, || {
                    wang_landau_count(&spec, &params, common.seed)
                })?
                .map_err(CliError::from)?;
                let mut value =
                    estimate_value("wanglandau", &common, Embedding::Permutation, &est);
                if let Value::Object(map) = &mut value {
                    map.insert("dos".into(), serde_json::to_value(&dos).unwrap());
                }
                attach_timing(&mut value, common.timing, start);
                Ok(render(value, effective_mode(common.output, common.json)))
            } else {
                let (est, _) = with_pool(common.threads, || {
                    replicated(&common, |seed| {
                        wang_landau_count(&spec, &params, seed).map(|(e, _)| e)
                    })
                })??;
                let mut value =
                    estimate_value("wanglandau", &common, Embedding::Permutation, &est);
                attach_timing(&mut value, common.timing, start);
                Ok(render(value, effective_mode(common.output, common.json)))
            }
        }
        Command::Probe {
            estimator,
            integrand,
            sizes,
            repeats,
            seed,
            output,
            json: json_flag,
            timing,
        } => {
            if estimator != "riemann" {
                return Err(CliError::Usage(format!(
                    "unknown estimator {estimator:?}; available: riemann"
                )));
            }
            let integrand: ProbeIntegrand =
                integrand.parse().map_err(CliError::Usage)?;
            let sizes: Vec<usize> = sizes
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::Usage(format!("bad size {s:?}")))
                })
                .collect::<Result<_, _>>()?;
            if sizes.iter().any(|&s| s < 2) {
                return Err(CliError::Usage("sizes must be at least 2".into()));
            }
            let result = riemann_probe(integrand, &sizes, repeats, seed);
            let mut value = json!({
                "method": "probe",
                "estimator": "riemann",
                "integrand": serde_json::to_value(integrand).unwrap(),
                "repeats": repeats,
                "seed": seed,
                "points": result.points,
                "slope": result.slope,
            });
            attach_timing(&mut value, timing, start);
            Ok(render(value, effective_mode(output, json_flag)))
        }
        Command::Bench {
            config,
            out_json,
            out_csv,
            threads,
            output,
            json: json_flag,
            timing,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", config.display())))?;
            let experiment: ExperimentConfig = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad config: {e}")))?;
            let report = with_pool(threads, || run_experiment(&experiment))?
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let mut report_value = serde_json::to_value(&report).unwrap();
            // Per-cell timing is measurement noise; strip it from the
            // canonical payload unless asked for.
            if !timing {
                strip_key(&mut report_value, "elapsed_ms");
            }
            let mut value = json!({
                "method": "bench",
                "config": serde_json::to_value(&experiment).unwrap(),
                "report": report_value,
            });
            attach_timing(&mut value, timing, start);
            let rendered = match effective_mode(output, json_flag) {
                OutputMode::Csv => report_csv(&report),
                mode => render(value.clone(), mode),
            };
            if let Some(path) = out_json {
                std::fs::write(&path, canonical_json(&value))
                    .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))?;
            }
            if let Some(path) = out_csv {
                std::fs::write(&path, report_csv(&report))
                    .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))?;
            }
            Ok(rendered)
        }
        Command::Simkin {
            n,
            output,
            json: json_flag,
        } => {
            if n == 0 {
                return Err(CliError::Usage("--n must be at least 1".into()));
            }
            let r = simkin_reference(n);
            let value = json!({
                "method": "simkin",
                "n": n,
                "log_count": r.log_count,
                "log10_count": r.log10_count,
                "log_count_band": [r.log_count_band.0, r.log_count_band.1],
            });
            Ok(render(value, effective_mode(output, json_flag)))
        }
    }
}

fn exact_command(
    common: &CommonFlags,
    completion: bool,
    start: std::time::Instant,
) -> Result<String, CliError> {
    let spec = parse_common_spec(common, Embedding::Permutation)?;
    let result = with_pool(common.threads, || {
        if completion {
            count_completion(common.n, spec.fixed_cells())
        } else {
            count_exact(common.n, spec.fixed_cells())
        }
    })?
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut value = json!({
        "method": if completion { "completion" } else { "exact" },
        "n": result.n,
        "count": result.count,
        "fixed": common.fixed,
    });
    attach_timing(&mut value, common.timing, start);
    Ok(render(value, effective_mode(common.output, common.json)))
}

fn strip_key(value: &mut Value, key: &str) {
    match value {
        Value::Object(map) => {
            map.remove(key);
            map.values_mut().for_each(|v| strip_key(v, key));
        }
        Value::Array(items) => items.iter_mut().for_each(|v| strip_key(v, key)),
        _ => {}
    }
}

/// Parses argv, runs, prints, and returns the process exit code.
pub fn parse_and_dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match run(argv) {
        Ok(output) => {
            print!("{output}");
            0
        }
        Err(e) => {
            let msg = e.message();
            if let Some(display) = msg.strip_prefix("__display__") {
                print!("{display}");
                return 0;
            }
            eprintln!("{msg}");
            e.exit_code()
        }
    }
}
