//! Split sampling: importance-sampling blankets indexed by a per-level
//! weight function over nested energy sublevel sets.
//!
//! Phase 1 finds the levels. Starting from the vacuous threshold, the chain
//! samples the mixture target pi(x) ~ Omega(S(x)), where Omega(s) sums the
//! weights of every level whose threshold the state satisfies. Once the top
//! level has been visited `n_level` times, the next threshold is the
//! rho-quantile of the recorded top-level energies, the new level's initial
//! mass estimate is set to rho^T by construction, and its weight to the
//! inverse mass (optionally boosted by e^{Lambda T} to favor upper levels).
//!
//! Phase 2 refines the masses. The chain keeps drawing under the blanket
//! weights while visit tallies nu_t accumulate 1/Omega(S(x)) for every
//! satisfied level; the ratios nu_t / nu_0 are unbiased for the sublevel
//! masses Z_t under any weights, so the weights are refreshed from the
//! ratios after every draw. An optional flat-histogram mode instead adapts
//! the log weights by a decreasing-step stochastic approximation until the
//! level-visitation profile is flat, then measures with frozen weights.
//!
//! The count estimate is the refined mass of the threshold-zero level times
//! the state-space size.

use std::sync::Arc;

use serde::Serialize;

use crate::board::{random_placement, BoardSpec, Energy};
use crate::chains::{ChainState, MoveSet};
use crate::rng::{self, tag};

use super::{require, Diagnostics, Estimate, EstimatorError};

#[derive(Debug, Clone)]
pub struct SplitSamplingParams {
    /// Quantile fraction defining each new level.
    pub rho: f64,
    /// Maximum number of levels to create.
    pub t_max: usize,
    /// Top-level visits required before cutting the next threshold.
    pub n_level: usize,
    /// Level-weight boost exponent Lambda; 0 disables boosting.
    pub lambda_boost: f64,
    /// Alternative top-level weighting knob; requires lambda_boost > 0.
    /// Applies w_T = beta (e^{Lambda T} - 1) / (e^{Lambda} - 1) / Z_T.
    pub top_level_beta: Option<f64>,
    /// Phase-2 refinement draws.
    pub refine_steps: u64,
    /// Initial visit-tally mass nu_init.
    pub nu_init: f64,
    /// Optional flat-histogram weight adaptation before measurement.
    pub flat_histogram: Option<FlatHistogramConfig>,
    /// Hard cap on energy evaluations.
    pub budget: u64,
    /// Proposal move set; defaults to the embedding's natural choice.
    pub move_set: Option<MoveSet>,
}

impl Default for SplitSamplingParams {
    fn default() -> Self {
        Self {
            rho: 0.5,
            t_max: 64,
            n_level: 500,
            lambda_boost: 0.0,
            top_level_beta: None,
            refine_steps: 200_000,
            nu_init: 10.0,
            flat_histogram: None,
            budget: 10_000_000,
            move_set: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlatHistogramConfig {
    /// Sup-norm tolerance c on |mu(t) - phi(t)|.
    pub tolerance: f64,
    /// Initial stochastic-approximation step size, halved per flat window.
    pub gamma_init: f64,
    /// Adaptation stops once gamma falls below this.
    pub gamma_min: f64,
    /// Steps per flatness check window.
    pub window: u64,
    /// Adaptation step budget; exceeding it is a convergence failure.
    pub max_steps: u64,
}

impl Default for FlatHistogramConfig {
    fn default() -> Self {
        Self {
            tolerance: 0.1,
            gamma_init: 1.0,
            gamma_min: 1e-3,
            window: 20_000,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitSamplingDiagnostics {
    /// Level thresholds, starting at the vacuous bound and ending at 0.
    pub thresholds: Vec<Energy>,
    /// Mass estimates assigned at level creation: exactly rho^t.
    pub initial_z: Vec<f64>,
    /// Refined mass estimates after phase 2.
    pub final_log_z: Vec<f64>,
    /// Phase-2 visits whose deepest satisfied level is t.
    pub level_visits: Vec<u64>,
    pub phase1_steps: u64,
    pub refine_steps: u64,
    /// Flat-histogram halvings performed, when the mode is enabled.
    pub fh_rounds: Option<u32>,
    pub lambda_boost: f64,
}

/// Per-level weight tables with the prefix sums that give each energy's
/// blanket weight Omega(s) in O(1).
struct Blanket {
    /// Thresholds, strictly decreasing, thresholds[0] vacuous.
    thresholds: Vec<Energy>,
    /// Linear per-level weights w_t.
    weights: Vec<f64>,
    /// prefix[t] = w_0 + ... + w_t.
    prefix: Vec<f64>,
    /// deepest[s] = max{t : thresholds[t] >= s}.
    deepest: Vec<usize>,
}

impl Blanket {
    fn new(s_max: Energy) -> Self {
        Self {
            thresholds: vec![s_max],
            weights: vec![1.0],
            prefix: vec![1.0],
            deepest: vec![0; s_max as usize + 1],
        }
    }

    fn rebuild_prefix(&mut self) {
        let mut acc = 0.0;
        self.prefix.clear();
        for &w in &self.weights {
            acc += w;
            self.prefix.push(acc);
        }
    }

    fn rebuild_deepest(&mut self) {
        for s in 0..self.deepest.len() {
            self.deepest[s] = self
                .thresholds
                .iter()
                .rposition(|&m| m >= s as Energy)
                .expect("vacuous level admits every energy");
        }
    }

    fn push_level(&mut self, threshold: Energy, weight: f64) {
        self.thresholds.push(threshold);
        self.weights.push(weight);
        self.rebuild_prefix();
        self.rebuild_deepest();
    }

    /// Blanket weight of a state at energy s.
    fn omega(&self, s: Energy) -> f64 {
        self.prefix[self.deepest[s as usize]]
    }

    fn log_omega(&self, s: Energy) -> f64 {
        self.omega(s).ln()
    }

    fn top(&self) -> usize {
        self.thresholds.len() - 1
    }
}

pub fn split_sampling_count(
    spec: &Arc<BoardSpec>,
    params: &SplitSamplingParams,
    seed: u64,
) -> Result<Estimate, EstimatorError> {
    require(
        params.rho > 0.0 && params.rho < 1.0,
        "rho",
        "must lie strictly between 0 and 1",
    )?;
    require(params.t_max >= 1, "t_max", "must be at least 1")?;
    require(params.n_level >= 10, "n_level", "must be at least 10")?;
    require(
        params.top_level_beta.is_none() || params.lambda_boost > 0.0,
        "top_level_beta",
        "requires a positive lambda_boost",
    )?;

    let move_set = params
        .move_set
        .unwrap_or_else(|| MoveSet::default_for(spec.embedding()));
    let s_max = spec.max_energy();
    let mut rng = rng::derive(seed, &[tag::SPLIT_SAMPLING]);
    let placement = random_placement(spec, &mut rng);
    let mut chain = ChainState::new(placement, rng);
    let mut budget_used = 1u64;

    let mut blanket = Blanket::new(s_max);
    let mut initial_z = vec![1.0];
    let boost = params.lambda_boost;

    // Phase 1: cut thresholds until level 0 energy is reached.
    let mut phase1_steps = 0u64;
    while *blanket.thresholds.last().unwrap() > 0 {
        let level_index = blanket.top() + 1;
        if level_index > params.t_max {
            return Err(EstimatorError::LevelFindingStall {
                t_max: params.t_max,
            });
        }
        let top_threshold = *blanket.thresholds.last().unwrap();
        let mut top_energies: Vec<Energy> = Vec::with_capacity(params.n_level);
        while top_energies.len() < params.n_level {
            chain.weighted_step(|s| blanket.log_omega(s), move_set);
            phase1_steps += 1;
            budget_used += 1;
            if budget_used > params.budget {
                return Err(EstimatorError::BudgetExhausted {
                    budget: params.budget,
                    used: budget_used,
                });
            }
            if chain.energy() <= top_threshold {
                top_energies.push(chain.energy());
            }
        }
        top_energies.sort_unstable();
        let k = ((params.rho * params.n_level as f64).ceil() as usize)
            .clamp(1, params.n_level);
        let mut threshold = top_energies[k - 1];
        if threshold >= top_threshold {
            // Integer ties: force the schedule strictly downward.
            threshold = top_threshold - 1;
        }
        let t = level_index as f64;
        let z = params.rho.powi(level_index as i32);
        initial_z.push(z);
        let weight = match params.top_level_beta {
            // Condition (d2): reweight the new top level.
            Some(beta) => beta * ((boost * t).exp() - 1.0) / (boost.exp() - 1.0) / z,
            // Condition (d1): w_T = e^{Lambda T} / Z_T.
            None => (boost * t).exp() / z,
        };
        blanket.push_level(threshold, weight);
    }

    let levels = blanket.thresholds.len();
    let top = blanket.top();

    // Phase 2 setup: visit tallies seeded with nu_init * initial mass.
    let mut nu: Vec<f64> = initial_z.iter().map(|z| params.nu_init * z).collect();
    let mut level_visits = vec![0u64; levels];
    let mut fh_rounds = None;

    // Optional flat-histogram adaptation before measurement.
    if let Some(fh) = &params.flat_histogram {
        let phi = 1.0 / levels as f64;
        let mut gamma = fh.gamma_init;
        let mut log_w: Vec<f64> = blanket.weights.iter().map(|w| w.ln()).collect();
        let mut window_nu = vec![0.0f64; levels];
        let mut rounds = 0u32;
        let mut steps = 0u64;
        'adapt: loop {
            for _ in 0..fh.window {
                chain.weighted_step(|s| blanket.log_omega(s), move_set);
                steps += 1;
                budget_used += 1;
                if budget_used > params.budget {
                    return Err(EstimatorError::BudgetExhausted {
                        budget: params.budget,
                        used: budget_used,
                    });
                }
                let deep = blanket.deepest[chain.energy() as usize];
                let om = blanket.omega(chain.energy());
                for t in 0..=deep {
                    window_nu[t] += 1.0 / om;
                }
            }
            // mu(t) ~ w_t Z_t, normalized over levels.
            let masses: Vec<f64> = (0..levels)
                .map(|t| blanket.weights[t] * window_nu[t] / window_nu[0].max(1e-300))
                .collect();
            let total: f64 = masses.iter().sum();
            let mu: Vec<f64> = masses.iter().map(|m| m / total).collect();
            let sup = mu
                .iter()
                .map(|m| (m - phi).abs())
                .fold(0.0, f64::max);
            if sup < fh.tolerance {
                gamma /= 2.0;
                rounds += 1;
                window_nu.iter_mut().for_each(|v| *v = 0.0);
                if gamma < fh.gamma_min {
                    break 'adapt;
                }
            } else {
                // Damp over-visited levels, boost under-visited ones.
                for t in 0..levels {
                    log_w[t] += gamma * (phi - mu[t]);
                }
                let shift = log_w[0];
                for (t, lw) in log_w.iter_mut().enumerate() {
                    *lw -= shift;
                    blanket.weights[t] = lw.exp();
                }
                blanket.rebuild_prefix();
            }
            if steps >= fh.max_steps {
                return Err(EstimatorError::FlatHistogramStall);
            }
        }
        fh_rounds = Some(rounds);
    }

    // Phase 2 measurement: tally importance-weighted visits; unless the
    // flat-histogram mode froze them, refresh the weights from the mass
    // ratios after every draw.
    let refresh = params.flat_histogram.is_none();
    let batches = 10usize;
    let mut batch_nu = vec![vec![0.0f64; levels]; batches];
    for i in 0..params.refine_steps {
        chain.weighted_step(|s| blanket.log_omega(s), move_set);
        budget_used += 1;
        if budget_used > params.budget {
            return Err(EstimatorError::BudgetExhausted {
                budget: params.budget,
                used: budget_used,
            });
        }
        let s = chain.energy();
        let deep = blanket.deepest[s as usize];
        let om = blanket.omega(s);
        level_visits[deep] += 1;
        let batch = (i as usize * batches / params.refine_steps.max(1) as usize)
            .min(batches - 1);
        for t in 0..=deep {
            nu[t] += 1.0 / om;
            batch_nu[batch][t] += 1.0 / om;
        }
        if refresh {
            for t in 0..levels {
                let z = (nu[t] / nu[0]).max(1e-300);
                blanket.weights[t] = (boost * t as f64).exp() / z;
            }
            blanket.rebuild_prefix();
        }
    }

    let final_log_z: Vec<f64> = (0..levels).map(|t| (nu[t] / nu[0]).ln()).collect();
    let diagnostics = Diagnostics::SplitSampling(SplitSamplingDiagnostics {
        thresholds: blanket.thresholds.clone(),
        initial_z: initial_z.clone(),
        final_log_z: final_log_z.clone(),
        level_visits,
        phase1_steps,
        refine_steps: params.refine_steps,
        fh_rounds,
        lambda_boost: boost,
    });

    // nu_init mass never visited the top level: no solution was seen.
    if nu[top] <= params.nu_init * initial_z[top] {
        return Ok(Estimate::zero(budget_used, diagnostics));
    }

    let log_p = final_log_z[top];
    // Batch-means standard error on the log scale.
    let batch_logs: Vec<f64> = batch_nu
        .iter()
        .filter(|b| b[top] > 0.0 && b[0] > 0.0)
        .map(|b| (b[top] / b[0]).ln())
        .collect();
    let stderr_log = if batch_logs.len() >= 2 {
        let m = batch_logs.iter().sum::<f64>() / batch_logs.len() as f64;
        let var = batch_logs.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
            / (batch_logs.len() as f64 - 1.0);
        (var / batch_logs.len() as f64).sqrt()
    } else {
        f64::INFINITY
    };

    Ok(Estimate::from_log(
        log_p + spec.log_state_space_size(),
        stderr_log,
        budget_used,
        diagnostics,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Embedding;

    fn spec(n: usize) -> Arc<BoardSpec> {
        Arc::new(BoardSpec::unconstrained(n, Embedding::Permutation).unwrap())
    }

    fn diag(est: &Estimate) -> &SplitSamplingDiagnostics {
        match &est.diagnostics {
            Diagnostics::SplitSampling(d) => d,
            other => panic!("unexpected diagnostics {other:?}"),
        }
    }

    #[test]
    fn initial_masses_are_powers_of_rho() {
        let params = SplitSamplingParams {
            rho: 0.5,
            n_level: 200,
            refine_steps: 2_000,
            ..Default::default()
        };
        let est = split_sampling_count(&spec(5), &params, 0).unwrap();
        let d = diag(&est);
        for (t, z) in d.initial_z.iter().enumerate() {
            assert_eq!(*z, 0.5f64.powi(t as i32), "level {t}");
        }
        // Thresholds strictly decrease from the vacuous bound to zero.
        assert_eq!(d.thresholds[0], 10);
        assert_eq!(*d.thresholds.last().unwrap(), 0);
        assert!(d.thresholds.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn n5_recovers_ten_solutions() {
        let params = SplitSamplingParams {
            n_level: 400,
            refine_steps: 150_000,
            ..Default::default()
        };
        let est = split_sampling_count(&spec(5), &params, 1).unwrap();
        let rel = (est.count / 10.0).ln().abs();
        assert!(rel < 0.2, "count {} rel {rel}", est.count);
    }

    #[test]
    fn boost_shifts_occupancy_not_the_estimate() {
        let flat = SplitSamplingParams {
            n_level: 300,
            refine_steps: 80_000,
            ..Default::default()
        };
        let boosted = SplitSamplingParams {
            lambda_boost: 0.4,
            ..flat.clone()
        };
        let mut flat_counts = Vec::new();
        let mut boost_counts = Vec::new();
        let mut flat_top_frac = 0.0;
        let mut boost_top_frac = 0.0;
        for seed in 0..6 {
            let a = split_sampling_count(&spec(4), &flat, seed).unwrap();
            let b = split_sampling_count(&spec(4), &boosted, seed).unwrap();
            let da = diag(&a);
            let db = diag(&b);
            let total_a: u64 = da.level_visits.iter().sum();
            let total_b: u64 = db.level_visits.iter().sum();
            flat_top_frac += *da.level_visits.last().unwrap() as f64 / total_a as f64;
            boost_top_frac += *db.level_visits.last().unwrap() as f64 / total_b as f64;
            flat_counts.push(a.count);
            boost_counts.push(b.count);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let m_flat = mean(&flat_counts);
        let m_boost = mean(&boost_counts);
        // Same estimand: both means near the true count 2.
        assert!((m_flat - 2.0).abs() < 0.3, "flat mean {m_flat}");
        assert!((m_boost - 2.0).abs() < 0.3, "boost mean {m_boost}");
        // Boosting visibly skews occupancy toward the top level.
        assert!(
            boost_top_frac > flat_top_frac,
            "boost {boost_top_frac} flat {flat_top_frac}"
        );
    }

    #[test]
    fn flat_histogram_mode_converges() {
        let params = SplitSamplingParams {
            n_level: 300,
            refine_steps: 100_000,
            flat_histogram: Some(FlatHistogramConfig {
                gamma_min: 0.05,
                ..Default::default()
            }),
            ..Default::default()
        };
        let est = split_sampling_count(&spec(4), &params, 3).unwrap();
        let d = diag(&est);
        assert!(d.fh_rounds.unwrap() >= 1);
        assert!((est.count - 2.0).abs() < 0.5, "count {}", est.count);
    }

    #[test]
    fn deterministic_given_seed() {
        let params = SplitSamplingParams {
            n_level: 100,
            refine_steps: 5_000,
            ..Default::default()
        };
        let a = split_sampling_count(&spec(4), &params, 9).unwrap();
        let b = split_sampling_count(&spec(4), &params, 9).unwrap();
        assert_eq!(a.count, b.count);
        assert_eq!(a.budget_used, b.budget_used);
    }

    #[test]
    fn t_max_stall_is_reported() {
        let params = SplitSamplingParams {
            t_max: 1,
            n_level: 100,
            refine_steps: 1_000,
            ..Default::default()
        };
        assert!(matches!(
            split_sampling_count(&spec(6), &params, 0),
            Err(EstimatorError::LevelFindingStall { t_max: 1 })
        ));
    }

    #[test]
    fn beta_knob_requires_boost() {
        let params = SplitSamplingParams {
            top_level_beta: Some(1.0),
            lambda_boost: 0.0,
            ..Default::default()
        };
        assert!(split_sampling_count(&spec(4), &params, 0).is_err());
    }
}
