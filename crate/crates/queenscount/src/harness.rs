//! Experiment orchestration: method sweeps over board sizes and seeds with
//! exact-oracle validation, CI coverage accounting, and the reference
//! asymptotic count.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{BoardSpec, Embedding};
use crate::estimators::{
    ce_count, naive_count, nested_sampling_count, split_sampling_count, splitting_count,
    wang_landau_count, CrossEntropyParams, Estimate, EstimatorError, NestedMode, NestedParams,
    SplitSamplingParams, SplittingParams, WangLandauParams,
};
use crate::exact::{count_exact, ExactError, ENUMERATION_MAX_N};
use crate::rng;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Board(#[from] crate::board::BoardError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("config has no board sizes")]
    EmptySizes,
    #[error("config has no seeds")]
    EmptySeeds,
    #[error("exact validation requires n <= {max}, got {n}")]
    ValidationTooLarge { n: usize, max: usize },
}

/// Method selector plus method-specific parameters, as read from the bench
/// config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MethodConfig {
    Exact,
    Naive {
        samples: u64,
    },
    Split {
        #[serde(default)]
        n_per_level: Option<usize>,
        #[serde(default)]
        rho: Option<f64>,
        #[serde(default)]
        burn_in_sweeps: Option<usize>,
    },
    Ce {
        #[serde(default)]
        samples_per_iter: Option<usize>,
        #[serde(default)]
        elite_rho: Option<f64>,
        #[serde(default)]
        smoothing: Option<f64>,
        #[serde(default)]
        iterations: Option<usize>,
        #[serde(default)]
        final_samples: Option<usize>,
    },
    Nested {
        n_live: usize,
        /// Evidence mode when set; rare-event mode otherwise.
        #[serde(default)]
        beta: Option<f64>,
    },
    SplitSamp {
        #[serde(default)]
        rho: Option<f64>,
        #[serde(default)]
        n_level: Option<usize>,
        #[serde(default)]
        refine_steps: Option<u64>,
        #[serde(default)]
        lambda_boost: Option<f64>,
    },
    WangLandau {
        #[serde(default)]
        flatness: Option<f64>,
        #[serde(default)]
        ln_f_final: Option<f64>,
    },
}

impl MethodConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MethodConfig::Exact => "exact",
            MethodConfig::Naive { .. } => "naive",
            MethodConfig::Split { .. } => "split",
            MethodConfig::Ce { .. } => "ce",
            MethodConfig::Nested { .. } => "nested",
            MethodConfig::SplitSamp { .. } => "splitsamp",
            MethodConfig::WangLandau { .. } => "wanglandau",
        }
    }
}

/// A full sweep: methods x sizes x seeds, with optional exact validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub methods: Vec<MethodConfig>,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_embedding")]
    pub embedding: Embedding,
    /// Per-run energy-evaluation cap.
    #[serde(default = "default_budget")]
    pub budget: u64,
    /// Attach exact counts and error metrics (requires n <= 14).
    #[serde(default = "default_true")]
    pub validate_exact: bool,
    #[serde(default)]
    pub fixed_cells: Vec<(usize, usize)>,
}

fn default_embedding() -> Embedding {
    Embedding::Permutation
}

fn default_budget() -> u64 {
    10_000_000
}

fn default_true() -> bool {
    true
}

/// One (method, n, seed) cell of a report.
#[derive(Debug, Clone, Serialize)]
pub struct CellResult {
    pub method: String,
    pub n: usize,
    pub seed: u64,
    pub count: f64,
    pub log_count: f64,
    pub stderr_log: f64,
    pub budget_used: u64,
    pub exact: Option<u64>,
    /// |log(count / exact)|; absent when exact is 0 or unavailable.
    pub rel_err_log: Option<f64>,
    /// Whether the nominal 95% log-scale interval covers the exact count.
    pub ci_covers: Option<bool>,
    pub error: Option<String>,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub cells: Vec<CellResult>,
    /// Fraction of validated cells whose 95% CI covers the exact count.
    pub coverage: Option<f64>,
}

fn run_cell(
    method: &MethodConfig,
    n: usize,
    seed: u64,
    config: &ExperimentConfig,
) -> Result<Estimate, EstimatorError> {
    let embedding = match method {
        MethodConfig::Ce { .. } => Embedding::RowWise,
        MethodConfig::WangLandau { .. } => Embedding::Permutation,
        _ => config.embedding,
    };
    let spec = Arc::new(BoardSpec::new(n, embedding, config.fixed_cells.clone())?);
    match method {
        MethodConfig::Exact => unreachable!("exact cells are handled separately"),
        MethodConfig::Naive { samples } => {
            Ok(naive_count(&spec, (*samples).min(config.budget), seed))
        }
        MethodConfig::Split {
            n_per_level,
            rho,
            burn_in_sweeps,
        } => {
            let defaults = SplittingParams::default();
            let params = SplittingParams {
                n_per_level: n_per_level.unwrap_or(defaults.n_per_level),
                rho: rho.unwrap_or(defaults.rho),
                burn_in_sweeps: burn_in_sweeps.unwrap_or(defaults.burn_in_sweeps),
                budget: config.budget,
                move_set: None,
            };
            splitting_count(&spec, &params, seed).map(|(est, _)| est)
        }
        MethodConfig::Ce {
            samples_per_iter,
            elite_rho,
            smoothing,
            iterations,
            final_samples,
        } => {
            let defaults = CrossEntropyParams::default();
            let params = CrossEntropyParams {
                samples_per_iter: samples_per_iter.unwrap_or(defaults.samples_per_iter),
                elite_rho: elite_rho.unwrap_or(defaults.elite_rho),
                smoothing: smoothing.unwrap_or(defaults.smoothing),
                iterations: iterations.unwrap_or(defaults.iterations),
                final_samples: final_samples.unwrap_or(defaults.final_samples),
                ..defaults
            };
            ce_count(&spec, &params, seed)
        }
        MethodConfig::Nested { n_live, beta } => {
            let mode = match beta {
                Some(b) => NestedMode::Evidence { beta: *b },
                None => NestedMode::RareEvent,
            };
            let mut params = NestedParams::new(*n_live, mode);
            params.budget = config.budget;
            nested_sampling_count(&spec, &params, seed)
        }
        MethodConfig::SplitSamp {
            rho,
            n_level,
            refine_steps,
            lambda_boost,
        } => {
            let defaults = SplitSamplingParams::default();
            let params = SplitSamplingParams {
                rho: rho.unwrap_or(defaults.rho),
                n_level: n_level.unwrap_or(defaults.n_level),
                refine_steps: refine_steps.unwrap_or(defaults.refine_steps),
                lambda_boost: lambda_boost.unwrap_or(defaults.lambda_boost),
                budget: config.budget,
                ..defaults
            };
            split_sampling_count(&spec, &params, seed)
        }
        MethodConfig::WangLandau {
            flatness,
            ln_f_final,
        } => {
            let defaults = WangLandauParams::default();
            let params = WangLandauParams {
                flatness: flatness.unwrap_or(defaults.flatness),
                ln_f_final: ln_f_final.unwrap_or(defaults.ln_f_final),
                budget: config.budget,
                ..defaults
            };
            wang_landau_count(&spec, &params, seed).map(|(est, _)| est)
        }
    }
}

/// Runs every (method, n, seed) cell, attaching exact counts and coverage
/// statistics for validated sizes. Cells run in parallel; assembly is by
/// deterministic cell order, so the report is independent of thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    if config.sizes.is_empty() {
        return Err(HarnessError::EmptySizes);
    }
    if config.seeds.is_empty() {
        return Err(HarnessError::EmptySeeds);
    }
    if config.validate_exact {
        if let Some(&n) = config.sizes.iter().find(|&&n| n > ENUMERATION_MAX_N) {
            return Err(HarnessError::ValidationTooLarge {
                n,
                max: ENUMERATION_MAX_N,
            });
        }
    }

    // Exact counts once per size.
    let mut exact_by_n: Vec<(usize, u64)> = Vec::new();
    if config.validate_exact {
        for &n in &config.sizes {
            if exact_by_n.iter().all(|&(m, _)| m != n) {
                exact_by_n.push((n, count_exact(n, &config.fixed_cells)?.count));
            }
        }
    }
    let exact_for = |n: usize| -> Option<u64> {
        exact_by_n.iter().find(|&&(m, _)| m == n).map(|&(_, c)| c)
    };

    let mut tasks: Vec<(usize, &MethodConfig, usize, u64)> = Vec::new();
    let mut index = 0;
    for method in &config.methods {
        for &n in &config.sizes {
            for &seed in &config.seeds {
                tasks.push((index, method, n, seed));
                index += 1;
            }
        }
    }

    let mut cells: Vec<(usize, CellResult)> = tasks
        .par_iter()
        .map(|&(idx, method, n, seed)| {
            let start = Instant::now();
            let exact = exact_for(n);
            let cell = if matches!(method, MethodConfig::Exact) {
                match count_exact(n, &config.fixed_cells) {
                    Ok(c) => CellResult {
                        method: "exact".into(),
                        n,
                        seed,
                        count: c.count as f64,
                        log_count: (c.count as f64).ln(),
                        stderr_log: 0.0,
                        budget_used: 0,
                        exact: Some(c.count),
                        rel_err_log: Some(0.0),
                        ci_covers: Some(true),
                        error: None,
                        elapsed_ms: start.elapsed().as_millis() as u64,
                    },
                    Err(e) => error_cell("exact", n, seed, e.to_string(), start),
                }
            } else {
                match run_cell(method, n, seed, config) {
                    Ok(est) => {
                        let rel_err_log = exact.and_then(|ex| {
                            (ex > 0 && est.count > 0.0)
                                .then(|| (est.count.ln() - (ex as f64).ln()).abs())
                        });
                        let ci_covers = exact.and_then(|ex| {
                            (ex > 0 && est.count > 0.0 && est.stderr_log.is_finite()).then(|| {
                                (est.log_count - (ex as f64).ln()).abs()
                                    <= 1.96 * est.stderr_log
                            })
                        });
                        CellResult {
                            method: method.name().into(),
                            n,
                            seed,
                            count: est.count,
                            log_count: est.log_count,
                            stderr_log: est.stderr_log,
                            budget_used: est.budget_used,
                            exact,
                            rel_err_log,
                            ci_covers,
                            error: None,
                            elapsed_ms: start.elapsed().as_millis() as u64,
                        }
                    }
                    Err(e) => error_cell(method.name(), n, seed, e.to_string(), start),
                }
            };
            (idx, cell)
        })
        .collect();
    cells.sort_by_key(|&(idx, _)| idx);
    let cells: Vec<CellResult> = cells.into_iter().map(|(_, c)| c).collect();

    let covered: Vec<bool> = cells.iter().filter_map(|c| c.ci_covers).collect();
    let coverage = if covered.is_empty() {
        None
    } else {
        Some(covered.iter().filter(|&&b| b).count() as f64 / covered.len() as f64)
    };
    Ok(Report { cells, coverage })
}

fn error_cell(
    method: &str,
    n: usize,
    seed: u64,
    message: String,
    start: Instant,
) -> CellResult {
    CellResult {
        method: method.into(),
        n,
        seed,
        count: f64::NAN,
        log_count: f64::NAN,
        stderr_log: f64::NAN,
        budget_used: 0,
        exact: None,
        rel_err_log: None,
        ci_covers: None,
        error: Some(message),
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

/// Flat CSV rows for external plotting.
pub fn report_csv(report: &Report) -> String {
    let mut out =
        String::from("method,n,seed,count,log_count,stderr_log,exact,rel_err_log,elapsed_ms\n");
    for c in &report.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.method,
            c.n,
            c.seed,
            c.count,
            c.log_count,
            c.stderr_log,
            c.exact.map(|e| e.to_string()).unwrap_or_default(),
            c.rel_err_log.map(|e| e.to_string()).unwrap_or_default(),
            c.elapsed_ms
        ));
    }
    out
}

/// Reference asymptotic count: log of (n e^{-alpha})^n with
/// alpha = 1.942 +- 0.003, reported with the alpha uncertainty band.
#[derive(Debug, Clone, Serialize)]
pub struct SimkinReference {
    pub n: usize,
    /// n (ln n - alpha).
    pub log_count: f64,
    /// Band from alpha +- 0.003: (lower, upper) on the natural-log scale.
    pub log_count_band: (f64, f64),
    pub log10_count: f64,
}

pub const SIMKIN_ALPHA: f64 = 1.942;
pub const SIMKIN_ALPHA_TOL: f64 = 3e-3;

pub fn simkin_reference(n: usize) -> SimkinReference {
    let x = n as f64;
    let log_count = x * (x.ln() - SIMKIN_ALPHA);
    let lo = x * (x.ln() - (SIMKIN_ALPHA + SIMKIN_ALPHA_TOL));
    let hi = x * (x.ln() - (SIMKIN_ALPHA - SIMKIN_ALPHA_TOL));
    SimkinReference {
        n,
        log_count,
        log_count_band: (lo, hi),
        log10_count: log_count / std::f64::consts::LN_10,
    }
}

/// Derives the per-replica seed for a replicated estimator run; the
/// documented derivation path is seed -> (module, replica, chain).
pub fn replica_seed(seed: u64, replica: u64) -> u64 {
    use rand::RngCore;
    rng::derive(seed, &[rng::tag::REPLICA, replica]).next_u64()
}

/// Merges replica estimates in replica order: the pooled count is the mean
/// of the replica counts; the pooled log-scale error combines the replica
/// spread (when R >= 2) with the smallest internal error.
pub fn merge_replicas(estimates: &[Estimate]) -> Option<Estimate> {
    if estimates.is_empty() {
        return None;
    }
    if estimates.len() == 1 {
        return Some(estimates[0].clone());
    }
    let r = estimates.len() as f64;
    let mean_count = estimates.iter().map(|e| e.count).sum::<f64>() / r;
    let budget: u64 = estimates.iter().map(|e| e.budget_used).sum();
    if mean_count == 0.0 {
        return Some(Estimate::zero(budget, crate::estimators::Diagnostics::None));
    }
    let logs: Vec<f64> = estimates
        .iter()
        .filter(|e| e.count > 0.0)
        .map(|e| e.log_count)
        .collect();
    let stderr_log = if logs.len() >= 2 {
        let m = logs.iter().sum::<f64>() / logs.len() as f64;
        let var =
            logs.iter().map(|l| (l - m) * (l - m)).sum::<f64>() / (logs.len() as f64 - 1.0);
        (var / logs.len() as f64).sqrt()
    } else {
        estimates
            .iter()
            .map(|e| e.stderr_log)
            .fold(f64::INFINITY, f64::min)
    };
    Some(Estimate {
        log_count: mean_count.ln(),
        count: mean_count,
        stderr_log,
        budget_used: budget,
        diagnostics: crate::estimators::Diagnostics::None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simkin_reference_values() {
        // n = 10000: log10 about 31566, inside the band around the
        // literature's 10^31560 figure.
        let r = simkin_reference(10_000);
        assert!(r.log10_count > 31_500.0 && r.log10_count < 31_640.0);
        let (lo, hi) = r.log_count_band;
        assert!(lo < r.log_count && r.log_count < hi);

        // n = 25: the formula gives about 13.9 decimal digits.
        let r25 = simkin_reference(25);
        assert!((r25.log10_count - 13.86).abs() < 0.05);

        // n = 1: ln(e^{-alpha}) = -1.942, outside the asymptotic regime
        // but reported as-is.
        assert!((simkin_reference(1).log_count + 1.942).abs() < 1e-12);
    }

    #[test]
    fn experiment_with_exact_only() {
        let config = ExperimentConfig {
            methods: vec![MethodConfig::Exact],
            sizes: vec![8],
            seeds: vec![0],
            embedding: Embedding::Permutation,
            budget: 1_000,
            validate_exact: true,
            fixed_cells: vec![],
        };
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.cells.len(), 1);
        assert_eq!(report.cells[0].count, 92.0);
        assert_eq!(report.coverage, Some(1.0));
    }

    #[test]
    fn experiment_deterministic_and_ordered() {
        let config = ExperimentConfig {
            methods: vec![MethodConfig::Naive { samples: 20_000 }],
            sizes: vec![4, 5],
            seeds: vec![0, 1, 2],
            embedding: Embedding::Permutation,
            budget: 1_000_000,
            validate_exact: true,
            fixed_cells: vec![],
        };
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        for (ca, cb) in a.cells.iter().zip(b.cells.iter()) {
            assert_eq!(ca.count, cb.count);
            assert_eq!(ca.seed, cb.seed);
            assert_eq!(ca.n, cb.n);
        }
        assert_eq!(a.cells.len(), 6);
        // Cells come back in (method, n, seed) declaration order.
        assert_eq!(a.cells[0].n, 4);
        assert_eq!(a.cells[3].n, 5);
    }

    #[test]
    fn per_cell_failure_does_not_abort() {
        let config = ExperimentConfig {
            methods: vec![MethodConfig::Split {
                n_per_level: Some(1_000),
                rho: Some(0.25),
                burn_in_sweeps: Some(8),
            }],
            sizes: vec![8],
            seeds: vec![0],
            embedding: Embedding::Permutation,
            budget: 100, // guaranteed exhaustion
            validate_exact: true,
            fixed_cells: vec![],
        };
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.cells.len(), 1);
        assert!(report.cells[0].error.is_some());
    }

    #[test]
    fn replica_merge_pools_counts() {
        let spec = Arc::new(BoardSpec::unconstrained(4, Embedding::Permutation).unwrap());
        let estimates: Vec<Estimate> = (0..4)
            .map(|r| naive_count(&spec, 50_000, replica_seed(0, r)))
            .collect();
        let merged = merge_replicas(&estimates).unwrap();
        assert!((merged.count - 2.0).abs() < 0.2, "count {}", merged.count);
        assert_eq!(merged.budget_used, 200_000);
        assert!(merged.stderr_log > 0.0);
    }

    #[test]
    fn csv_has_expected_header() {
        let config = ExperimentConfig {
            methods: vec![MethodConfig::Exact],
            sizes: vec![4],
            seeds: vec![0],
            embedding: Embedding::Permutation,
            budget: 0,
            validate_exact: true,
            fixed_cells: vec![],
        };
        let report = run_experiment(&config).unwrap();
        let csv = report_csv(&report);
        assert!(csv.starts_with(
            "method,n,seed,count,log_count,stderr_log,exact,rel_err_log,elapsed_ms\n"
        ));
        assert_eq!(csv.lines().count(), 2);
    }
}
