//! Metropolis kernels over placements: Boltzmann (tempered), threshold
//! (uniform on an energy sublevel set), and general level-weighted chains.
//!
//! All kernels share the same symmetric proposal machinery ([`MoveSet`]) and
//! differ only in their acceptance rule, exposed as pure probability
//! functions so tests can check detailed balance exactly. Proposals never
//! touch rows pinned by fixed cells, so every kernel is automatically a
//! conditional sampler for completion problems.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Embedding, Energy, Move, Placement};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("chain state has energy {energy}, outside the level set S <= {bound}")]
    OutsideLevelSet { energy: Energy, bound: Energy },
}

/// Proposal distribution over local moves. All variants are symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveSet {
    /// Swap the columns of two uniformly chosen free rows (Permutation).
    UniformSwap,
    /// Swap a uniformly chosen adjacent free-row pair (Permutation).
    AdjacentSwap,
    /// Reassign a uniformly chosen free row to a uniform column (RowWise).
    RowReassign,
}

impl MoveSet {
    /// Default move set for an embedding: uniform swaps for permutations,
    /// row reassignment for row-wise states.
    pub fn default_for(embedding: Embedding) -> MoveSet {
        match embedding {
            Embedding::RowWise => MoveSet::RowReassign,
            _ => MoveSet::UniformSwap,
        }
    }

    /// Draws a move; `None` when the constraint set leaves no legal move.
    pub fn propose<R: Rng + ?Sized>(&self, p: &Placement, rng: &mut R) -> Option<Move> {
        let spec = p.spec();
        let free = spec.free_rows();
        match self {
            MoveSet::UniformSwap => {
                if free.len() < 2 {
                    return None;
                }
                let a = rng.random_range(0..free.len());
                let mut b = rng.random_range(0..free.len() - 1);
                if b >= a {
                    b += 1;
                }
                Some(Move::Swap {
                    i: free[a],
                    j: free[b],
                })
            }
            MoveSet::AdjacentSwap => {
                let pairs: Vec<usize> = free
                    .windows(2)
                    .filter(|w| w[1] == w[0] + 1)
                    .map(|w| w[0])
                    .collect();
                if pairs.is_empty() {
                    return None;
                }
                let i = pairs[rng.random_range(0..pairs.len())];
                Some(Move::Swap { i, j: i + 1 })
            }
            MoveSet::RowReassign => {
                if free.is_empty() {
                    return None;
                }
                let row = free[rng.random_range(0..free.len())];
                let col = rng.random_range(0..spec.n());
                Some(Move::Reassign { row, col })
            }
        }
    }
}

/// Metropolis acceptance for the Boltzmann target pi(x) ~ exp(-S(x)/gamma).
pub fn boltzmann_accept(gamma: f64, current: Energy, proposed: Energy) -> f64 {
    if proposed <= current {
        1.0
    } else {
        (-((proposed - current) as f64) / gamma).exp()
    }
}

/// Acceptance for the uniform distribution on the sublevel set {S <= bound}.
pub fn threshold_accept(bound: Energy, _current: Energy, proposed: Energy) -> f64 {
    if proposed <= bound {
        1.0
    } else {
        0.0
    }
}

/// Acceptance for the target pi(x) ~ w(S(x)) given on the log scale.
pub fn weighted_accept(log_w: impl Fn(Energy) -> f64, current: Energy, proposed: Energy) -> f64 {
    let lw_new = log_w(proposed);
    let lw_cur = log_w(current);
    if lw_new == f64::NEG_INFINITY {
        return 0.0;
    }
    if lw_new >= lw_cur {
        1.0
    } else {
        (lw_new - lw_cur).exp().min(1.0)
    }
}

/// Shared level-weight function for [`KernelKind::Weighted`].
pub type LevelWeightFn = Arc<dyn Fn(Energy) -> f64 + Send + Sync>;

/// Which stationary law the kernel targets.
#[derive(Clone)]
pub enum KernelKind {
    /// pi(x) ~ exp(-S(x)/gamma), gamma > 0.
    Boltzmann { gamma: f64 },
    /// Uniform on {x : S(x) <= bound}.
    Threshold { bound: Energy },
    /// pi(x) ~ w(S(x)).
    Weighted { log_w: LevelWeightFn },
}

impl std::fmt::Debug for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelKind::Boltzmann { gamma } => write!(f, "Boltzmann {{ gamma: {gamma} }}"),
            KernelKind::Threshold { bound } => write!(f, "Threshold {{ bound: {bound} }}"),
            KernelKind::Weighted { .. } => write!(f, "Weighted {{ .. }}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub steps_per_sweep: usize,
    pub move_set: MoveSet,
}

impl KernelConfig {
    pub fn new(kind: KernelKind, move_set: MoveSet, n: usize) -> Self {
        Self {
            kind,
            steps_per_sweep: n.max(1),
            move_set,
        }
    }
}

/// One Markov chain: placement, cached energy, its own generator, and the
/// running step count (every step is one energy evaluation).
#[derive(Debug, Clone)]
pub struct ChainState {
    placement: Placement,
    energy: Energy,
    rng: ChaCha8Rng,
    steps: u64,
}

impl ChainState {
    pub fn new(placement: Placement, rng: ChaCha8Rng) -> Self {
        let energy = placement.energy();
        Self {
            placement,
            energy,
            rng,
            steps: 0,
        }
    }

    pub fn placement(&self) -> &Placement {
        &self.placement
    }

    pub fn energy(&self) -> Energy {
        self.energy
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Consumes the chain, returning its placement.
    pub fn into_placement(self) -> Placement {
        self.placement
    }

    fn metropolis(&mut self, move_set: MoveSet, accept: impl Fn(Energy, Energy) -> f64) {
        self.steps += 1;
        let Some(mv) = move_set.propose(&self.placement, &mut self.rng) else {
            return;
        };
        let delta = self
            .placement
            .energy_delta(mv)
            .expect("proposals are legal by construction");
        let proposed = (self.energy as i64 + delta) as Energy;
        let p = accept(self.energy, proposed);
        let take = p >= 1.0 || self.rng.random::<f64>() < p;
        if take {
            self.placement.apply_move(mv).expect("legal move");
            self.energy = proposed;
        }
    }

    /// One Metropolis update targeting the Boltzmann law at temperature
    /// `gamma`; moves that do not increase energy are always accepted.
    pub fn boltzmann_step(&mut self, gamma: f64, move_set: MoveSet) {
        self.metropolis(move_set, |c, p| boltzmann_accept(gamma, c, p));
    }

    /// One Metropolis update restricted to {S <= bound}; errors if the
    /// current state already violates the bound.
    pub fn threshold_step(&mut self, bound: Energy, move_set: MoveSet) -> Result<(), ChainError> {
        if self.energy > bound {
            return Err(ChainError::OutsideLevelSet {
                energy: self.energy,
                bound,
            });
        }
        self.metropolis(move_set, |c, p| threshold_accept(bound, c, p));
        Ok(())
    }

    /// One Metropolis update targeting pi(x) ~ w(S(x)).
    pub fn weighted_step(&mut self, log_w: impl Fn(Energy) -> f64, move_set: MoveSet) {
        self.metropolis(move_set, |c, p| weighted_accept(&log_w, c, p));
    }

    fn kernel_step(&mut self, kind: &KernelKind, move_set: MoveSet) -> Result<(), ChainError> {
        match kind {
            KernelKind::Boltzmann { gamma } => {
                self.boltzmann_step(*gamma, move_set);
                Ok(())
            }
            KernelKind::Threshold { bound } => self.threshold_step(*bound, move_set),
            KernelKind::Weighted { log_w } => {
                self.weighted_step(log_w.as_ref(), move_set);
                Ok(())
            }
        }
    }
}

/// Runs `sweeps` full sweeps of the kernel, invoking `observer` after each.
/// Deterministic given the chain's generator state.
pub fn run_chain(
    config: &KernelConfig,
    mut state: ChainState,
    sweeps: u64,
    mut observer: impl FnMut(&ChainState),
) -> Result<ChainState, ChainError> {
    if let KernelKind::Threshold { bound } = config.kind {
        if state.energy > bound {
            return Err(ChainError::OutsideLevelSet {
                energy: state.energy,
                bound,
            });
        }
    }
    for _ in 0..sweeps {
        for _ in 0..config.steps_per_sweep {
            state.kernel_step(&config.kind, config.move_set)?;
        }
        debug_assert_eq!(state.energy, state.placement.energy_recount());
        observer(&state);
    }
    Ok(state)
}
