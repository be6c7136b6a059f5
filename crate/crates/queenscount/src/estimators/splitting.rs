//! Adaptive multilevel splitting (the product estimator).
//!
//! The rare-event probability P(S = 0) is factored into a product of
//! conditional probabilities across nested sublevel sets {S <= m_t} with
//! adaptively chosen thresholds: each threshold is the empirical rho-quantile
//! of the current population's energies, the survivors are resampled back to
//! full population size, and a threshold-constrained Metropolis kernel
//! decorrelates the clones. Energies are integers, so quantile ties are
//! routine; a tied threshold is forced down by one level and the realized
//! ratio is recorded in place of rho.

use std::sync::Arc;

use rand::Rng;

use crate::board::{random_placement, BoardSpec, Energy};
use crate::chains::{ChainState, MoveSet};
use crate::rng::{self, tag};

use super::{
    product_variance, rel_mse_to_stderr_log, require, Diagnostics, Estimate, EstimatorError,
    LevelRecord, LevelSchedule,
};

#[derive(Debug, Clone)]
pub struct SplittingParams {
    /// Population size per level.
    pub n_per_level: usize,
    /// Target fraction surviving each threshold.
    pub rho: f64,
    /// Decorrelation sweeps after resampling (one sweep = n kernel steps).
    pub burn_in_sweeps: usize,
    /// Hard cap on energy evaluations.
    pub budget: u64,
    /// Proposal move set; defaults to the embedding's natural choice.
    pub move_set: Option<MoveSet>,
}

impl Default for SplittingParams {
    fn default() -> Self {
        Self {
            n_per_level: 2_000,
            rho: 0.25,
            burn_in_sweeps: 8,
            budget: 10_000_000,
            move_set: None,
        }
    }
}

/// Runs adaptive multilevel splitting and returns the count estimate with
/// its level schedule. A population with no survivors below the next
/// threshold yields a zero estimate with the stall recorded, matching the
/// behavior on infeasible completion constraints.
pub fn splitting_count(
    spec: &Arc<BoardSpec>,
    params: &SplittingParams,
    seed: u64,
) -> Result<(Estimate, LevelSchedule), EstimatorError> {
    require(
        params.rho > 0.0 && params.rho < 1.0,
        "rho",
        "must lie strictly between 0 and 1",
    )?;
    require(params.n_per_level >= 10, "n_per_level", "must be at least 10")?;

    let move_set = params
        .move_set
        .unwrap_or_else(|| MoveSet::default_for(spec.embedding()));
    let n_pop = params.n_per_level;
    let steps_per_sweep = spec.n();
    // Selection decisions use the estimator stream; every particle chain
    // gets its own stream derived from (level, index), so clones diverge
    // and the result is independent of evaluation order.
    let mut select_rng = rng::derive(seed, &[tag::SPLITTING]);
    let particle_rng =
        |level: u64, idx: usize| rng::derive(seed, &[tag::SPLITTING, tag::CHAIN, level, idx as u64]);
    let mut budget_used = 0u64;

    // Level 0: iid uniform population.
    let mut population: Vec<ChainState> = (0..n_pop)
        .map(|i| {
            let mut r = particle_rng(0, i);
            let p = random_placement(spec, &mut r);
            budget_used += 1;
            ChainState::new(p, r)
        })
        .collect();

    let mut schedule = LevelSchedule {
        levels: Vec::new(),
        stalled_at: None,
    };
    let mut prev_threshold = spec.max_energy() + 1; // vacuous

    loop {
        // Next threshold: the energy of the ceil(rho N)-th lowest sample,
        // forced strictly below the previous threshold on ties.
        let mut energies: Vec<Energy> = population.iter().map(|c| c.energy()).collect();
        energies.sort_unstable();
        let k = ((params.rho * n_pop as f64).ceil() as usize).clamp(1, n_pop);
        let mut threshold = energies[k - 1];
        if threshold >= prev_threshold {
            threshold = prev_threshold - 1;
        }

        let survivors: Vec<usize> = population
            .iter()
            .enumerate()
            .filter(|(_, c)| c.energy() <= threshold)
            .map(|(i, _)| i)
            .collect();
        let ratio = survivors.len() as f64 / n_pop as f64;
        if survivors.is_empty() {
            schedule.stalled_at = Some(threshold);
            let est = Estimate::zero(budget_used, Diagnostics::Levels(schedule.clone()));
            return Ok((est, schedule));
        }
        schedule.levels.push(LevelRecord {
            threshold,
            ratio,
            cv: ((1.0 - ratio) / (ratio * n_pop as f64)).sqrt(),
        });

        if threshold == 0 {
            break;
        }

        // Resample survivors with replacement back to full size, then
        // decorrelate the clones inside {S <= threshold}.
        let level = schedule.levels.len() as u64;
        let mut next: Vec<ChainState> = Vec::with_capacity(n_pop);
        for i in 0..n_pop {
            let pick = survivors[select_rng.random_range(0..survivors.len())];
            let placement = population[pick].placement().clone();
            next.push(ChainState::new(placement, particle_rng(level, i)));
        }
        let sweep_steps = (params.burn_in_sweeps * steps_per_sweep) as u64;
        budget_used += sweep_steps * n_pop as u64;
        if budget_used > params.budget {
            return Err(EstimatorError::BudgetExhausted {
                budget: params.budget,
                used: budget_used,
            });
        }
        for chain in &mut next {
            for _ in 0..sweep_steps {
                chain.threshold_step(threshold, move_set)?;
            }
        }
        population = next;
        prev_threshold = threshold;
    }

    // The last recorded ratio is the fraction at S = 0 conditioned on the
    // previous level, so the product telescopes to P(S = 0).
    let log_p = schedule.log_product();
    let stats: Vec<(f64, f64)> = schedule
        .levels
        .iter()
        .map(|l| (l.ratio, l.ratio * l.cv))
        .collect();
    let rel_mse = product_variance(&stats)?;
    let est = Estimate::from_log(
        log_p + spec.log_state_space_size(),
        rel_mse_to_stderr_log(rel_mse),
        budget_used,
        Diagnostics::Levels(schedule.clone()),
    );
    Ok((est, schedule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Embedding;
    use crate::exact::exact_dos;

    fn spec(n: usize) -> Arc<BoardSpec> {
        Arc::new(BoardSpec::unconstrained(n, Embedding::Permutation).unwrap())
    }

    #[test]
    fn parameter_validation() {
        let p = SplittingParams {
            rho: 1.5,
            ..Default::default()
        };
        assert!(splitting_count(&spec(4), &p, 0).is_err());
        let p = SplittingParams {
            n_per_level: 5,
            ..Default::default()
        };
        assert!(splitting_count(&spec(4), &p, 0).is_err());
    }

    #[test]
    fn n4_converges_to_exhaustive_truth() {
        let params = SplittingParams {
            n_per_level: 4_000,
            rho: 0.4,
            burn_in_sweeps: 6,
            ..Default::default()
        };
        let (est, schedule) = splitting_count(&spec(4), &params, 0).unwrap();
        // True probability 2/24; thresholds strictly decrease to zero.
        assert!((est.count - 2.0).abs() < 0.3, "count {}", est.count);
        let thresholds: Vec<Energy> = schedule.levels.iter().map(|l| l.threshold).collect();
        assert!(thresholds.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(*thresholds.last().unwrap(), 0);
        for level in &schedule.levels {
            assert!(level.ratio > 0.0 && level.ratio <= 1.0);
        }
    }

    #[test]
    fn n8_close_to_92() {
        let params = SplittingParams {
            n_per_level: 5_000,
            rho: 0.25,
            burn_in_sweeps: 8,
            ..Default::default()
        };
        let (est, _) = splitting_count(&spec(8), &params, 1).unwrap();
        let rel = (est.count / 92.0).ln().abs();
        assert!(rel < 0.15, "count {} rel {rel}", est.count);
        assert!(est.budget_used <= params.budget);
    }

    #[test]
    fn infeasible_completion_stalls_to_zero() {
        // No 4-queens solution passes through (1,1): the population runs
        // out of survivors and the estimate is exactly zero.
        let spec = Arc::new(
            BoardSpec::new(4, Embedding::Permutation, vec![(0, 0)]).unwrap(),
        );
        let params = SplittingParams {
            n_per_level: 500,
            rho: 0.3,
            burn_in_sweeps: 4,
            ..Default::default()
        };
        let (est, schedule) = splitting_count(&spec, &params, 2).unwrap();
        assert_eq!(est.count, 0.0);
        assert!(schedule.stalled_at.is_some());
    }

    #[test]
    fn telescoping_product_identity() {
        // With thresholds at every integer level and exact per-level masses
        // from exhaustion, the telescoped product of conditional ratios
        // recovers |{S <= 0}| / n! exactly.
        let dos = exact_dos(4).unwrap();
        let s_max = 6;
        let mut product = 1.0;
        let mut prev = 24.0;
        for m in (0..s_max).rev() {
            let size = dos.cumulative(m) as f64;
            product *= size / prev;
            prev = size;
        }
        assert_eq!(product, dos.solutions() as f64 / 24.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let params = SplittingParams {
            n_per_level: 200,
            rho: 0.3,
            burn_in_sweeps: 3,
            ..Default::default()
        };
        let (a, _) = splitting_count(&spec(6), &params, 7).unwrap();
        let (b, _) = splitting_count(&spec(6), &params, 7).unwrap();
        assert_eq!(a.count, b.count);
        assert_eq!(a.budget_used, b.budget_used);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let params = SplittingParams {
            n_per_level: 1_000,
            rho: 0.25,
            burn_in_sweeps: 8,
            budget: 5_000,
            ..Default::default()
        };
        assert!(matches!(
            splitting_count(&spec(8), &params, 0),
            Err(EstimatorError::BudgetExhausted { .. })
        ));
    }
}
