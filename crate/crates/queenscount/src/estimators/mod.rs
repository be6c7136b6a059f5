//! Counting estimators: naive Monte Carlo, adaptive multilevel splitting,
//! cross-entropy importance sampling, nested sampling, split sampling with
//! level reweighting, and Wang-Landau density-of-states estimation.
//!
//! Every estimator reports on the same scale: a log count (natural log of
//! the estimated number of solutions), the linear count, a log-scale
//! standard error, and the number of energy evaluations consumed. Counts
//! are probability estimates times the exact state-space size, so the
//! rare-event probability and the count are interchangeable.

mod cross_entropy;
mod naive;
mod nested;
mod split_sampling;
mod splitting;
mod wang_landau;

pub use cross_entropy::{ce_count, CeDiagnostics, CeIteration, CrossEntropyParams};
pub use naive::{naive_count, NaiveDiagnostics};
pub use nested::{nested_sampling_count, NestedDiagnostics, NestedMode, NestedParams};
pub use split_sampling::{
    split_sampling_count, FlatHistogramConfig, SplitSamplingDiagnostics, SplitSamplingParams,
};
pub use splitting::{splitting_count, SplittingParams};
pub use wang_landau::{wang_landau_count, WangLandauDiagnostics, WangLandauParams};

use serde::Serialize;
use thiserror::Error;

use crate::board::{BoardError, Energy};
use crate::chains::{ChainError, LevelWeightFn};
use crate::exact::ExactDos;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("per-level ratio mean must be positive")]
    ZeroMean,
    #[error("level {0} has zero density")]
    ZeroDensityLevel(Energy),
    #[error("budget of {budget} energy evaluations exhausted after {used}")]
    BudgetExhausted { budget: u64, used: u64 },
    #[error("level finding did not reach threshold 0 within t_max = {t_max} levels")]
    LevelFindingStall { t_max: usize },
    #[error("constrained draws stalled at bound {bound} ({stalled} replacements without a move)")]
    MixingStall { bound: Energy, stalled: u64 },
    #[error("flat-histogram rebalancing did not converge within its step budget")]
    FlatHistogramStall,
}

pub(crate) fn require(cond: bool, name: &'static str, reason: &str) -> Result<(), EstimatorError> {
    if cond {
        Ok(())
    } else {
        Err(EstimatorError::InvalidParam {
            name,
            reason: reason.to_string(),
        })
    }
}

/// Log-scale count estimate with its uncertainty and cost.
#[derive(Debug, Clone, Serialize)]
pub struct Estimate {
    /// Natural log of the estimated solution count; -inf for a zero estimate.
    pub log_count: f64,
    /// exp(log_count).
    pub count: f64,
    /// Standard error on the log scale; +inf when no hits were observed.
    pub stderr_log: f64,
    /// Energy evaluations consumed (full evaluations and kernel steps).
    pub budget_used: u64,
    pub diagnostics: Diagnostics,
}

impl Estimate {
    pub fn from_log(
        log_count: f64,
        stderr_log: f64,
        budget_used: u64,
        diagnostics: Diagnostics,
    ) -> Self {
        Self {
            log_count,
            count: log_count.exp(),
            stderr_log,
            budget_used,
            diagnostics,
        }
    }

    pub fn zero(budget_used: u64, diagnostics: Diagnostics) -> Self {
        Self {
            log_count: f64::NEG_INFINITY,
            count: 0.0,
            stderr_log: f64::INFINITY,
            budget_used,
            diagnostics,
        }
    }
}

/// Per-estimator diagnostic payloads, serialized under a `kind` tag.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostics {
    None,
    Naive(NaiveDiagnostics),
    Levels(LevelSchedule),
    Iterations(CeDiagnostics),
    Nested(NestedDiagnostics),
    SplitSampling(SplitSamplingDiagnostics),
    Dos(WangLandauDiagnostics),
}

/// Decreasing thresholds with per-level conditional-probability estimates.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSchedule {
    pub levels: Vec<LevelRecord>,
    /// Threshold at which the population ran out of survivors, if any.
    pub stalled_at: Option<Energy>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelRecord {
    /// Energy bound of this level's sublevel set {S <= threshold}.
    pub threshold: Energy,
    /// Estimated conditional probability of the level given the previous.
    pub ratio: f64,
    /// Coefficient of variation of the ratio estimate.
    pub cv: f64,
}

impl LevelSchedule {
    /// Log of the product of per-level ratios: the log rare-event
    /// probability estimate.
    pub fn log_product(&self) -> f64 {
        self.levels.iter().map(|l| l.ratio.ln()).sum()
    }
}

/// Relative mean squared error of a product of independent per-level ratio
/// estimates: prod(sigma_t^2 / mu_t^2 + 1) - 1.
pub fn product_variance(level_stats: &[(f64, f64)]) -> Result<f64, EstimatorError> {
    let mut acc = 1.0;
    for &(mu, sigma) in level_stats {
        if mu <= 0.0 {
            return Err(EstimatorError::ZeroMean);
        }
        if sigma < 0.0 {
            return Err(EstimatorError::InvalidParam {
                name: "sigma",
                reason: "must be nonnegative".into(),
            });
        }
        acc *= sigma * sigma / (mu * mu) + 1.0;
    }
    Ok(acc - 1.0)
}

/// Maps a relative MSE to a log-scale standard error via the lognormal
/// correspondence sigma_log = sqrt(ln(1 + relative MSE)).
pub fn rel_mse_to_stderr_log(rel_mse: f64) -> f64 {
    rel_mse.ln_1p().sqrt()
}

/// Estimated (or exactly known) density of states over energy levels.
#[derive(Debug, Clone, Serialize)]
pub struct DensityOfStates {
    /// log N(s) for s = 0..=s_max; -inf at levels never visited.
    pub log_n: Vec<f64>,
    /// Visit counts per level over the whole run.
    pub histogram: Vec<u64>,
}

impl DensityOfStates {
    pub fn from_exact(dos: &ExactDos) -> Self {
        Self {
            log_n: dos.log_density(),
            histogram: dos.counts.clone(),
        }
    }

    pub fn visited(&self, s: Energy) -> bool {
        self.log_n
            .get(s as usize)
            .is_some_and(|&v| v > f64::NEG_INFINITY)
    }

    /// log of the total mass sum_s exp(log_n(s)).
    pub fn log_total(&self) -> f64 {
        logsumexp(self.log_n.iter().copied())
    }

    /// Shifts log_n so the total mass equals exp(log_total_target).
    pub fn normalize(&mut self, log_total_target: f64) {
        let shift = log_total_target - self.log_total();
        for v in &mut self.log_n {
            if *v > f64::NEG_INFINITY {
                *v += shift;
            }
        }
    }

    /// log of the cumulative count Z(s) of states with energy <= s.
    pub fn log_cumulative(&self, s: Energy) -> f64 {
        logsumexp(self.log_n.iter().take(s as usize + 1).copied())
    }
}

pub fn logsumexp(values: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.filter(|v| *v > f64::NEG_INFINITY).collect();
    if values.is_empty() {
        return f64::NEG_INFINITY;
    }
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Ensemble weight families over energy levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// w(s) = e^{-s}: the Boltzmann energy marginal N(s) e^{-s}.
    Canonical,
    /// w(s) = 1/N(s): flat energy marginal.
    Multicanonical,
    /// w(s) = 1/Z(s) with Z the cumulative count: marginal N(s)/Z(s).
    OneOverK,
}

/// Per-level log weights derived from a density of states.
#[derive(Debug, Clone)]
pub struct LevelWeights {
    log_w: Vec<f64>,
}

impl LevelWeights {
    /// Checked lookup; requesting a level the density believes empty is an
    /// error for the density-dependent families.
    pub fn at(&self, s: Energy) -> Result<f64, EstimatorError> {
        match self.log_w.get(s as usize) {
            Some(&v) if v > f64::NEG_INFINITY => Ok(v),
            _ => Err(EstimatorError::ZeroDensityLevel(s)),
        }
    }

    /// Kernel-ready closure; levels outside the table reject proposals.
    pub fn into_fn(self) -> LevelWeightFn {
        std::sync::Arc::new(move |s: Energy| {
            self.log_w
                .get(s as usize)
                .copied()
                .unwrap_or(f64::NEG_INFINITY)
        })
    }
}

/// Builds the selected log-weight table from a density of states.
pub fn ensemble_weight(kind: WeightKind, dos: &DensityOfStates) -> LevelWeights {
    let log_w: Vec<f64> = match kind {
        WeightKind::Canonical => (0..dos.log_n.len()).map(|s| -(s as f64)).collect(),
        WeightKind::Multicanonical => dos.log_n.iter().map(|&ln| -ln).collect(),
        WeightKind::OneOverK => (0..dos.log_n.len())
            .map(|s| -dos.log_cumulative(s as Energy))
            .collect(),
    };
    // Density-dependent weights at empty levels come out as +inf (from
    // -(-inf)); store them as -inf so such levels are never entered.
    let log_w = log_w
        .into_iter()
        .map(|v| if v == f64::INFINITY { f64::NEG_INFINITY } else { v })
        .collect();
    LevelWeights { log_w }
}
