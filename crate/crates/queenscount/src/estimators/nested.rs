//! Nested sampling over placements, in two modes: evidence accumulation for
//! the Boltzmann likelihood L(x) = exp(-beta S(x)), and rare-event mass
//! tracking that shrinks the prior onto the solution set.
//!
//! Energies are integers, so likelihood ties would break the one-point-per-
//! step shrinkage argument. Each point therefore carries a fresh-uniform
//! tiebreaker: points are ordered lexicographically by (energy, tiebreak),
//! which restores an almost-surely strict order, and the constrained
//! replacement kernel proposes a move together with a fresh tiebreaker and
//! accepts iff the pair is strictly better than the removed point. The
//! prior-mass grid is the standard X_i = exp(-i / N).

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::board::{random_placement, BoardSpec, Energy, Placement};
use crate::chains::MoveSet;
use crate::rng::{self, tag};

use super::{logsumexp, require, Diagnostics, Estimate, EstimatorError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NestedMode {
    /// Accumulate Z(beta) = E_uniform[ e^{-beta S} ].
    Evidence { beta: f64 },
    /// Shrink until every live point is a solution; p = exp(-t / N).
    RareEvent,
}

#[derive(Debug, Clone)]
pub struct NestedParams {
    pub n_live: usize,
    pub mode: NestedMode,
    /// Constrained kernel steps per replacement; 0 picks 5n.
    pub steps_per_replacement: usize,
    /// Proposal move set; defaults to the embedding's natural choice.
    pub move_set: Option<MoveSet>,
    /// Hard cap on energy evaluations.
    pub budget: u64,
    /// Consecutive replacements with zero accepted moves before declaring
    /// a mixing stall.
    pub stall_limit: u64,
}

impl NestedParams {
    pub fn new(n_live: usize, mode: NestedMode) -> Self {
        Self {
            n_live,
            mode,
            steps_per_replacement: 0,
            move_set: None,
            budget: 50_000_000,
            stall_limit: 2_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NestedDiagnostics {
    pub n_live: usize,
    /// Number of worst-point replacements performed.
    pub replacements: u64,
    /// Remaining prior mass exp(-t/N) at termination.
    pub final_mass: f64,
    /// Skilling information H, evidence mode only.
    pub information: Option<f64>,
}

struct LivePoint {
    placement: Placement,
    energy: Energy,
    tiebreak: f64,
}

/// Nested-sampling count or evidence estimate.
///
/// Evidence mode returns the estimate of E_uniform[e^{-beta S}] mapped to a
/// count scale as Z(beta) x state-space size (at beta where only solutions
/// contribute this approaches the solution count; the raw Z is in
/// `log_count - log state-space size`). RareEvent mode returns
/// p = exp(-t/N) times the state-space size with standard error sqrt(t)/N.
pub fn nested_sampling_count(
    spec: &Arc<BoardSpec>,
    params: &NestedParams,
    seed: u64,
) -> Result<Estimate, EstimatorError> {
    require(params.n_live >= 2, "n_live", "need at least two live points")?;
    if let NestedMode::Evidence { beta } = params.mode {
        require(beta.is_finite() && beta > 0.0, "beta", "must be positive")?;
    }

    let move_set = params
        .move_set
        .unwrap_or_else(|| MoveSet::default_for(spec.embedding()));
    let steps = if params.steps_per_replacement == 0 {
        5 * spec.n()
    } else {
        params.steps_per_replacement
    };
    let n_live = params.n_live;
    let mut rng = rng::derive(seed, &[tag::NESTED]);
    let mut budget_used = 0u64;

    let mut live: Vec<LivePoint> = (0..n_live)
        .map(|_| {
            let placement = random_placement(spec, &mut rng);
            budget_used += 1;
            LivePoint {
                energy: placement.energy(),
                placement,
                tiebreak: rng.random::<f64>(),
            }
        })
        .collect();

    let inv_n = 1.0 / n_live as f64;
    let mut t: u64 = 0;
    let mut stalled_streak: u64 = 0;
    // Evidence accumulators, log scale.
    let mut log_z_terms: Vec<f64> = Vec::new();
    let mut removed_log_l: Vec<f64> = Vec::new();
    // Evidence mode stops once the remaining mass cannot move the sum.
    const EVIDENCE_RTOL: f64 = 1e-10;

    loop {
        let worst = live
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| {
                (a.energy, a.tiebreak)
                    .partial_cmp(&(b.energy, b.tiebreak))
                    .unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        if live[worst].energy == 0 {
            break;
        }
        if let NestedMode::Evidence { beta } = params.mode {
            let best = live.iter().map(|p| p.energy).min().unwrap();
            let log_x = -(t as f64) * inv_n;
            let log_remaining_bound = log_x + -beta * best as f64;
            let log_z_so_far = logsumexp(log_z_terms.iter().copied());
            if log_remaining_bound < EVIDENCE_RTOL.ln() + log_z_so_far {
                break;
            }
            // w_i = X_{i-1} - X_i on the deterministic grid.
            let x_prev = log_x.exp();
            let x_next = (-((t + 1) as f64) * inv_n).exp();
            let log_l = -beta * live[worst].energy as f64;
            log_z_terms.push((x_prev - x_next).ln() + log_l);
            removed_log_l.push(log_l);
        }
        t += 1;

        // Clone a survivor (strictly better a.s.) and walk it inside the
        // constraint {(S, xi) < (S_worst, xi_worst)}.
        let bound_energy = live[worst].energy;
        let bound_tie = live[worst].tiebreak;
        let seed_idx = loop {
            let i = rng.random_range(0..n_live);
            if i != worst {
                break i;
            }
        };
        let mut placement = live[seed_idx].placement.clone();
        let mut energy = live[seed_idx].energy;
        let mut tiebreak = live[seed_idx].tiebreak;
        debug_assert!((energy, tiebreak) < (bound_energy, bound_tie));

        let mut accepted = 0u64;
        for _ in 0..steps {
            budget_used += 1;
            let Some(mv) = move_set.propose(&placement, &mut rng) else {
                break;
            };
            let delta = placement.energy_delta(mv).expect("legal proposal");
            let new_energy = (energy as i64 + delta) as Energy;
            let new_tie = rng.random::<f64>();
            if (new_energy, new_tie) < (bound_energy, bound_tie) {
                placement.apply_move(mv).expect("legal move");
                energy = new_energy;
                tiebreak = new_tie;
                accepted += 1;
            }
        }
        if accepted == 0 {
            stalled_streak += 1;
            if stalled_streak >= params.stall_limit {
                return Err(EstimatorError::MixingStall {
                    bound: bound_energy,
                    stalled: stalled_streak,
                });
            }
        } else {
            stalled_streak = 0;
        }
        live[worst] = LivePoint {
            placement,
            energy,
            tiebreak,
        };
        if budget_used > params.budget {
            return Err(EstimatorError::BudgetExhausted {
                budget: params.budget,
                used: budget_used,
            });
        }
    }

    let final_mass = (-(t as f64) * inv_n).exp();
    let log_size = spec.log_state_space_size();
    match params.mode {
        NestedMode::RareEvent => {
            let log_p = -(t as f64) * inv_n;
            let stderr_log = (t as f64).sqrt() * inv_n;
            let diagnostics = Diagnostics::Nested(NestedDiagnostics {
                n_live,
                replacements: t,
                final_mass,
                information: None,
            });
            Ok(Estimate::from_log(
                log_p + log_size,
                stderr_log,
                budget_used,
                diagnostics,
            ))
        }
        NestedMode::Evidence { beta } => {
            // Leftover mass: X_t times the mean likelihood of the live set
            // (exactly X_t when every live point is a solution).
            let log_live_mean = logsumexp(
                live.iter().map(|p| -beta * p.energy as f64),
            ) - (n_live as f64).ln();
            log_z_terms.push(final_mass.ln() + log_live_mean);
            removed_log_l.push(log_live_mean);
            let log_z = logsumexp(log_z_terms.iter().copied());
            // Skilling information H = E_posterior[ln L] - ln Z.
            let h: f64 = log_z_terms
                .iter()
                .zip(removed_log_l.iter())
                .map(|(&lw, &ll)| (lw - log_z).exp() * ll)
                .sum::<f64>()
                - log_z;
            let stderr_log = (h.max(0.0) * inv_n).sqrt();
            let diagnostics = Diagnostics::Nested(NestedDiagnostics {
                n_live,
                replacements: t,
                final_mass,
                information: Some(h),
            });
            Ok(Estimate::from_log(
                log_z + log_size,
                stderr_log,
                budget_used,
                diagnostics,
            ))
        }
    }
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
    fn evidence_n4_matches_exhaustive_sum() {
        let dos = exact_dos(4).unwrap();
        let truth: f64 = dos
            .counts
            .iter()
            .enumerate()
            .map(|(s, &c)| c as f64 * (-(s as f64)).exp())
            .sum::<f64>()
            / 24.0;
        let params = NestedParams::new(500, NestedMode::Evidence { beta: 1.0 });
        let est = nested_sampling_count(&spec(4), &params, 0).unwrap();
        let z = (est.log_count - spec(4).log_state_space_size()).exp();
        assert!(
            (z - truth).abs() < 3.0 * est.stderr_log * z.max(truth),
            "z {z} truth {truth} stderr {}",
            est.stderr_log
        );
    }

    #[test]
    fn rare_event_n8_close_to_known_ratio() {
        let params = NestedParams::new(1_000, NestedMode::RareEvent);
        let est = nested_sampling_count(&spec(8), &params, 0).unwrap();
        let truth_log_p = (92.0f64 / 40_320.0).ln();
        let log_p = est.log_count - spec(8).log_state_space_size();
        assert!(
            (log_p - truth_log_p).abs() < 3.0 * est.stderr_log,
            "log p {log_p} truth {truth_log_p} stderr {}",
            est.stderr_log
        );
    }

    #[test]
    fn degenerate_start_inside_solution_set() {
        // n=1: the single placement is a solution; zero replacements and
        // p = 1 exactly.
        let params = NestedParams::new(8, NestedMode::RareEvent);
        let est = nested_sampling_count(&spec(1), &params, 0).unwrap();
        match &est.diagnostics {
            Diagnostics::Nested(d) => {
                assert_eq!(d.replacements, 0);
                assert_eq!(d.final_mass, 1.0);
            }
            other => panic!("unexpected diagnostics {other:?}"),
        }
        assert_eq!(est.count, 1.0);
        assert_eq!(est.stderr_log, 0.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let params = NestedParams::new(100, NestedMode::RareEvent);
        let a = nested_sampling_count(&spec(6), &params, 5).unwrap();
        let b = nested_sampling_count(&spec(6), &params, 5).unwrap();
        assert_eq!(a.count, b.count);
        assert_eq!(a.budget_used, b.budget_used);
    }

    #[test]
    fn completion_rare_event() {
        // Fixed (1,2) on n=4: exactly one completing solution among 3! = 6
        // reduced states, so log p = ln(1/6).
        let spec = Arc::new(BoardSpec::new(4, Embedding::Permutation, vec![(0, 1)]).unwrap());
        let params = NestedParams::new(400, NestedMode::RareEvent);
        let est = nested_sampling_count(&spec, &params, 1).unwrap();
        assert!(
            (est.count - 1.0).abs() < 0.5,
            "count {} should be near 1",
            est.count
        );
    }

    #[test]
    fn rejects_tiny_live_set() {
        let params = NestedParams::new(1, NestedMode::RareEvent);
        assert!(nested_sampling_count(&spec(4), &params, 0).is_err());
    }
}
