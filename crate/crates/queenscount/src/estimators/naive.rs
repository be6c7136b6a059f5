//! Naive Monte Carlo: iid uniform draws, indicator of the solution event.

use std::sync::Arc;

use serde::Serialize;

use crate::board::{random_placement, BoardSpec};
use crate::rng::{self, tag};

use super::{Diagnostics, Estimate};

/// One-sided level for the zero-hit upper bound (rule of three).
const ZERO_HIT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct NaiveDiagnostics {
    pub samples: u64,
    pub hits: u64,
    pub hit_rate: f64,
    pub zero_hits: bool,
    /// One-sided 95% upper bound on the count when no hits were seen.
    pub upper_bound_count: Option<f64>,
}

/// Estimates the count as (hit fraction) x (state-space size) from `samples`
/// iid uniform draws. The hit-rate standard error is binomial, giving the
/// usual O(1/N) variance decay; with zero hits the estimate is exactly zero
/// and a rule-of-three upper bound is attached instead of a standard error.
pub fn naive_count(spec: &Arc<BoardSpec>, samples: u64, seed: u64) -> Estimate {
    let mut r = rng::derive(seed, &[tag::NAIVE]);
    let mut hits = 0u64;
    for _ in 0..samples {
        hits += random_placement(spec, &mut r).is_solution() as u64;
    }
    let n = samples as f64;
    let p = hits as f64 / n;
    let log_size = spec.log_state_space_size();
    if hits == 0 {
        let upper = (-(ZERO_HIT_ALPHA.ln()) / n) * log_size.exp();
        return Estimate::zero(
            samples,
            Diagnostics::Naive(NaiveDiagnostics {
                samples,
                hits,
                hit_rate: 0.0,
                zero_hits: true,
                upper_bound_count: Some(upper),
            }),
        );
    }
    let stderr_p = (p * (1.0 - p) / n).sqrt();
    Estimate::from_log(
        p.ln() + log_size,
        stderr_p / p,
        samples,
        Diagnostics::Naive(NaiveDiagnostics {
            samples,
            hits,
            hit_rate: p,
            zero_hits: false,
            upper_bound_count: None,
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Embedding;

    fn spec(n: usize, embedding: Embedding) -> Arc<BoardSpec> {
        Arc::new(BoardSpec::unconstrained(n, embedding).unwrap())
    }

    #[test]
    fn no_solutions_for_n2() {
        let est = naive_count(&spec(2, Embedding::Permutation), 1_000, 0);
        assert_eq!(est.count, 0.0);
        assert_eq!(est.log_count, f64::NEG_INFINITY);
        match &est.diagnostics {
            Diagnostics::Naive(d) => {
                assert!(d.zero_hits);
                assert!(d.upper_bound_count.unwrap() > 0.0);
            }
            other => panic!("unexpected diagnostics {other:?}"),
        }
    }

    #[test]
    fn n4_hit_rate_matches_exhaustive_truth() {
        // True rate is 2/24 over permutations.
        let est = naive_count(&spec(4, Embedding::Permutation), 100_000, 1);
        let want = 2.0 / 24.0 * 24.0;
        let se_count = est.count * est.stderr_log;
        assert!(
            (est.count - want).abs() < 3.0 * se_count,
            "count {} want {want}",
            est.count
        );
        assert_eq!(est.budget_used, 100_000);
    }

    #[test]
    fn n8_recovers_92_within_three_stderr() {
        let est = naive_count(&spec(8, Embedding::Permutation), 1_000_000, 2);
        let se_count = est.count * est.stderr_log;
        assert!(
            (est.count - 92.0).abs() < 3.0 * se_count,
            "count {} +- {se_count}",
            est.count
        );
    }

    #[test]
    fn rowwise_denominator() {
        // RowWise on n=4: 2 solutions out of 4^4 = 256 states.
        let est = naive_count(&spec(4, Embedding::RowWise), 200_000, 3);
        let se_count = est.count * est.stderr_log;
        assert!((est.count - 2.0).abs() < 3.0 * se_count);
    }

    #[test]
    fn deterministic_given_seed() {
        let a = naive_count(&spec(6, Embedding::Permutation), 10_000, 9);
        let b = naive_count(&spec(6, Embedding::Permutation), 10_000, 9);
        assert_eq!(a.count, b.count);
    }
}
