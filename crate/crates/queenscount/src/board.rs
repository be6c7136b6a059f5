//! Board state spaces, the attacking-pair energy, and incremental moves.
//!
//! Three embeddings of the n-queens configuration space are supported:
//! permutations (one queen per row and per column, `n!` states), row-wise
//! vectors (one queen per row, `n^n` states), and binary boards (any n
//! distinct cells, `C(n^2, n)` states). The energy of a placement is the
//! number of unordered attacking pairs; a placement is a solution iff its
//! energy is zero.
//!
//! Rows and columns are 0-indexed throughout the API. The text formats used
//! by the CLI (`"6,4,7,1,8,2,5,3"` for positions, `"1,3;2,5"` for fixed
//! cells) are 1-indexed and converted at the parse/format boundary.

use std::sync::Arc;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of unordered attacking queen pairs.
pub type Energy = u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoardError {
    #[error("board size must be at least 1")]
    ZeroSize,
    #[error("fixed cell ({row}, {col}) outside a {n}x{n} board (0-indexed)")]
    CellOutOfRange { row: usize, col: usize, n: usize },
    #[error("two fixed cells share row {row}")]
    SharedFixedRow { row: usize },
    #[error("two fixed cells share column {col}, infeasible for the permutation embedding")]
    SharedFixedColumn { col: usize },
    #[error("positions do not satisfy the {0:?} embedding")]
    EmbeddingViolation(Embedding),
    #[error("fixed cell ({row}, {col}) is not occupied")]
    FixedCellUnoccupied { row: usize, col: usize },
    #[error("move touches pinned row {row}")]
    PinnedRow { row: usize },
    #[error("column {col} out of range for board size {n}")]
    ColumnOutOfRange { col: usize, n: usize },
    #[error("swap rows must be distinct, got {0} twice")]
    DegenerateSwap(usize),
    #[error("{op} is not supported for the {embedding:?} embedding")]
    Unsupported {
        op: &'static str,
        embedding: Embedding,
    },
    #[error("cannot parse {what} from {text:?}")]
    Parse { what: &'static str, text: String },
}

/// Ambient state space in which solutions are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Embedding {
    /// One queen per row and per column; `n!` states.
    Permutation,
    /// One queen per row, any column; `n^n` states.
    RowWise,
    /// Any n distinct cells; `C(n^2, n)` states.
    Binary,
}

impl std::str::FromStr for Embedding {
    type Err = BoardError;
    fn from_str(s: &str) -> Result<Self, BoardError> {
        match s.to_ascii_lowercase().as_str() {
            "permutation" | "perm" => Ok(Embedding::Permutation),
            "rowwise" | "row-wise" | "row_wise" => Ok(Embedding::RowWise),
            "binary" => Ok(Embedding::Binary),
            _ => Err(BoardError::Parse {
                what: "embedding",
                text: s.to_string(),
            }),
        }
    }
}

/// Board size, embedding, and the fixed cells of a completion problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoardSpec {
    n: usize,
    embedding: Embedding,
    fixed_cells: Vec<(usize, usize)>,
    /// Per-row pinned column, if any (all embeddings pin by row).
    pinned: Vec<Option<usize>>,
    free_rows: Vec<usize>,
}

impl BoardSpec {
    /// Validates and builds a spec. `fixed_cells` are 0-indexed `(row, col)`
    /// pairs; rows must be distinct, and columns too under `Permutation`.
    pub fn new(
        n: usize,
        embedding: Embedding,
        fixed_cells: Vec<(usize, usize)>,
    ) -> Result<Self, BoardError> {
        if n == 0 {
            return Err(BoardError::ZeroSize);
        }
        let mut pinned = vec![None; n];
        let mut col_used = vec![false; n];
        for &(row, col) in &fixed_cells {
            if row >= n || col >= n {
                return Err(BoardError::CellOutOfRange { row, col, n });
            }
            if pinned[row].is_some() {
                return Err(BoardError::SharedFixedRow { row });
            }
            if embedding == Embedding::Permutation {
                if col_used[col] {
                    return Err(BoardError::SharedFixedColumn { col });
                }
                col_used[col] = true;
            }
            pinned[row] = Some(col);
        }
        let free_rows = (0..n).filter(|&r| pinned[r].is_none()).collect();
        Ok(Self {
            n,
            embedding,
            fixed_cells,
            pinned,
            free_rows,
        })
    }

    pub fn unconstrained(n: usize, embedding: Embedding) -> Result<Self, BoardError> {
        Self::new(n, embedding, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn embedding(&self) -> Embedding {
        self.embedding
    }

    pub fn fixed_cells(&self) -> &[(usize, usize)] {
        &self.fixed_cells
    }

    /// Column pinned at `row`, if that row carries a fixed cell.
    pub fn pinned_col(&self, row: usize) -> Option<usize> {
        self.pinned[row]
    }

    /// Rows not pinned by a fixed cell, ascending.
    pub fn free_rows(&self) -> &[usize] {
        &self.free_rows
    }

    /// Largest reachable energy level: every pair attacking.
    pub fn max_energy(&self) -> Energy {
        let n = self.n as u64;
        n * (n - 1) / 2
    }

    /// Exact size of the embedding's state space restricted to the fixed
    /// cells: `(n-k)!`, `n^(n-k)`, or `C(n^2-k, n-k)` for k fixed cells.
    pub fn state_space_size(&self) -> BigUint {
        let n = self.n;
        let k = self.fixed_cells.len();
        match self.embedding {
            Embedding::Permutation => factorial(n - k),
            Embedding::RowWise => BigUint::from(n).pow((n - k) as u32),
            Embedding::Binary => binomial(n * n - k, n - k),
        }
    }

    /// Natural log of [`Self::state_space_size`], for log-scale estimates.
    pub fn log_state_space_size(&self) -> f64 {
        let n = self.n;
        let k = self.fixed_cells.len();
        match self.embedding {
            Embedding::Permutation => ln_factorial(n - k),
            Embedding::RowWise => (n - k) as f64 * (n as f64).ln(),
            Embedding::Binary => {
                ln_factorial(n * n - k) - ln_factorial(n - k) - ln_factorial(n * n - n)
            }
        }
    }
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).map(BigUint::from).product()
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from((n - i) as u64) / BigUint::from((i + 1) as u64);
    }
    acc
}

pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Occupancy counts per column, row, main diagonal (r - c), and
/// anti-diagonal (r + c). Diagonal keys are offset by n-1 into 0..2n-1.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Tallies {
    cols: Vec<u32>,
    rows: Vec<u32>,
    diag: Vec<u32>,
    anti: Vec<u32>,
}

impl Tallies {
    fn empty(n: usize) -> Self {
        Self {
            cols: vec![0; n],
            rows: vec![0; n],
            diag: vec![0; 2 * n - 1],
            anti: vec![0; 2 * n - 1],
        }
    }

    fn add(&mut self, n: usize, row: usize, col: usize) {
        self.cols[col] += 1;
        self.rows[row] += 1;
        self.diag[row + (n - 1) - col] += 1;
        self.anti[row + col] += 1;
    }

    fn remove(&mut self, n: usize, row: usize, col: usize) {
        self.cols[col] -= 1;
        self.rows[row] -= 1;
        self.diag[row + (n - 1) - col] -= 1;
        self.anti[row + col] -= 1;
    }

    fn pair_count(&self) -> Energy {
        let pairs = |v: &[u32]| -> u64 {
            v.iter()
                .map(|&t| {
                    let t = t as u64;
                    t * t.saturating_sub(1) / 2
                })
                .sum()
        };
        pairs(&self.cols) + pairs(&self.rows) + pairs(&self.diag) + pairs(&self.anti)
    }
}

/// Line families touched by a move; used for O(1) delta computation.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Family {
    Col,
    Diag,
    Anti,
}

/// Read-through overlay of up to a handful of tally entries, so a move's
/// energy delta can be computed without mutating the placement.
struct Patch<'a> {
    tallies: &'a Tallies,
    entries: Vec<(Family, usize, u64)>,
}

impl<'a> Patch<'a> {
    fn new(tallies: &'a Tallies) -> Self {
        Self {
            tallies,
            entries: Vec::with_capacity(8),
        }
    }

    fn get(&self, family: Family, key: usize) -> u64 {
        for &(f, k, c) in &self.entries {
            if f == family && k == key {
                return c;
            }
        }
        let v = match family {
            Family::Col => &self.tallies.cols,
            Family::Diag => &self.tallies.diag,
            Family::Anti => &self.tallies.anti,
        };
        v[key] as u64
    }

    fn set(&mut self, family: Family, key: usize, count: u64) {
        for e in &mut self.entries {
            if e.0 == family && e.1 == key {
                e.2 = count;
                return;
            }
        }
        self.entries.push((family, key, count));
    }

    /// Removing a queen from a line with t occupants drops t-1 pairs.
    fn remove(&mut self, family: Family, key: usize) -> i64 {
        let t = self.get(family, key);
        self.set(family, key, t - 1);
        -((t - 1) as i64)
    }

    /// Adding a queen to a line with t occupants gains t pairs.
    fn add(&mut self, family: Family, key: usize) -> i64 {
        let t = self.get(family, key);
        self.set(family, key, t + 1);
        t as i64
    }
}

/// A single local move on a placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Exchange the columns of two rows (permutation embedding).
    Swap { i: usize, j: usize },
    /// Reassign one row's queen to a new column (row-wise embedding).
    Reassign { row: usize, col: usize },
}

/// Queen positions in one embedding, with occupancy tallies kept in sync.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    spec: Arc<BoardSpec>,
    /// Column of the row-i queen (Permutation/RowWise); for Binary, the
    /// sorted cell list is kept in `cells` instead.
    positions: Vec<usize>,
    cells: Vec<(usize, usize)>,
    tallies: Tallies,
}

impl Placement {
    /// Builds a placement from per-row columns (Permutation or RowWise).
    pub fn from_positions(spec: Arc<BoardSpec>, positions: Vec<usize>) -> Result<Self, BoardError> {
        let n = spec.n();
        if positions.len() != n || positions.iter().any(|&c| c >= n) {
            return Err(BoardError::EmbeddingViolation(spec.embedding()));
        }
        match spec.embedding() {
            Embedding::Permutation => {
                let mut seen = vec![false; n];
                for &c in &positions {
                    if seen[c] {
                        return Err(BoardError::EmbeddingViolation(Embedding::Permutation));
                    }
                    seen[c] = true;
                }
            }
            Embedding::RowWise => {}
            Embedding::Binary => {
                return Err(BoardError::Unsupported {
                    op: "from_positions",
                    embedding: Embedding::Binary,
                })
            }
        }
        for &(row, col) in spec.fixed_cells() {
            if positions[row] != col {
                return Err(BoardError::FixedCellUnoccupied { row, col });
            }
        }
        let mut tallies = Tallies::empty(n);
        for (row, &col) in positions.iter().enumerate() {
            tallies.add(n, row, col);
        }
        Ok(Self {
            spec,
            positions,
            cells: Vec::new(),
            tallies,
        })
    }

    /// Builds a Binary-embedding placement from n distinct cells.
    pub fn from_cells(spec: Arc<BoardSpec>, mut cells: Vec<(usize, usize)>) -> Result<Self, BoardError> {
        let n = spec.n();
        if spec.embedding() != Embedding::Binary {
            return Err(BoardError::Unsupported {
                op: "from_cells",
                embedding: spec.embedding(),
            });
        }
        cells.sort_unstable();
        let distinct = cells.windows(2).all(|w| w[0] != w[1]);
        if cells.len() != n || !distinct || cells.iter().any(|&(r, c)| r >= n || c >= n) {
            return Err(BoardError::EmbeddingViolation(Embedding::Binary));
        }
        for &fc in spec.fixed_cells() {
            if cells.binary_search(&fc).is_err() {
                return Err(BoardError::FixedCellUnoccupied {
                    row: fc.0,
                    col: fc.1,
                });
            }
        }
        let mut tallies = Tallies::empty(n);
        for &(r, c) in &cells {
            tallies.add(n, r, c);
        }
        Ok(Self {
            spec,
            positions: Vec::new(),
            cells,
            tallies,
        })
    }

    pub fn spec(&self) -> &Arc<BoardSpec> {
        &self.spec
    }

    /// Per-row columns; empty for the Binary embedding.
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Occupied cells; empty for Permutation/RowWise (use `positions`).
    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    /// Number of unordered attacking pairs, from the running tallies.
    pub fn energy(&self) -> Energy {
        self.tallies.pair_count()
    }

    /// True iff no two queens attack each other.
    pub fn is_solution(&self) -> bool {
        self.energy() == 0
    }

    /// Full O(n^2) recount from raw positions, independent of the tallies.
    /// Used by debug assertions and tests to pin tally coherence.
    pub fn energy_recount(&self) -> Energy {
        if self.spec.embedding() == Embedding::Binary {
            let mut e = 0;
            for (a, &(r1, c1)) in self.cells.iter().enumerate() {
                for &(r2, c2) in &self.cells[a + 1..] {
                    let attack = r1 == r2
                        || c1 == c2
                        || r1 as i64 - c1 as i64 == r2 as i64 - c2 as i64
                        || r1 + c1 == r2 + c2;
                    e += attack as u64;
                }
            }
            e
        } else {
            pairwise_energy(&self.positions)
        }
    }

    /// Energy change from swapping rows i and j, in O(1) from the tallies.
    pub fn energy_delta_swap(&self, i: usize, j: usize) -> Result<i64, BoardError> {
        if self.spec.embedding() != Embedding::Permutation {
            return Err(BoardError::Unsupported {
                op: "energy_delta_swap",
                embedding: self.spec.embedding(),
            });
        }
        if i == j {
            return Err(BoardError::DegenerateSwap(i));
        }
        for row in [i, j] {
            if self.spec.pinned_col(row).is_some() {
                return Err(BoardError::PinnedRow { row });
            }
        }
        let n = self.spec.n();
        let (ci, cj) = (self.positions[i], self.positions[j]);
        let mut patch = Patch::new(&self.tallies);
        let mut delta = 0;
        // Remove both queens from their diagonals, then add at the swapped
        // columns. Column tallies are untouched: occupancy is 1 either way.
        delta += patch.remove(Family::Diag, i + (n - 1) - ci);
        delta += patch.remove(Family::Anti, i + ci);
        delta += patch.remove(Family::Diag, j + (n - 1) - cj);
        delta += patch.remove(Family::Anti, j + cj);
        delta += patch.add(Family::Diag, i + (n - 1) - cj);
        delta += patch.add(Family::Anti, i + cj);
        delta += patch.add(Family::Diag, j + (n - 1) - ci);
        delta += patch.add(Family::Anti, j + ci);
        Ok(delta)
    }

    /// Energy change from reassigning `row` to `col` (RowWise), in O(1).
    pub fn energy_delta_reassign(&self, row: usize, col: usize) -> Result<i64, BoardError> {
        if self.spec.embedding() != Embedding::RowWise {
            return Err(BoardError::Unsupported {
                op: "energy_delta_reassign",
                embedding: self.spec.embedding(),
            });
        }
        let n = self.spec.n();
        if col >= n {
            return Err(BoardError::ColumnOutOfRange { col, n });
        }
        if self.spec.pinned_col(row).is_some() {
            return Err(BoardError::PinnedRow { row });
        }
        let old = self.positions[row];
        if old == col {
            return Ok(0);
        }
        let mut patch = Patch::new(&self.tallies);
        let mut delta = 0;
        delta += patch.remove(Family::Col, old);
        delta += patch.remove(Family::Diag, row + (n - 1) - old);
        delta += patch.remove(Family::Anti, row + old);
        delta += patch.add(Family::Col, col);
        delta += patch.add(Family::Diag, row + (n - 1) - col);
        delta += patch.add(Family::Anti, row + col);
        Ok(delta)
    }

    /// Energy change of an arbitrary move without applying it.
    pub fn energy_delta(&self, mv: Move) -> Result<i64, BoardError> {
        match mv {
            Move::Swap { i, j } => self.energy_delta_swap(i, j),
            Move::Reassign { row, col } => self.energy_delta_reassign(row, col),
        }
    }

    /// Applies a legal move, updating positions and tallies incrementally.
    /// Returns the energy delta. The placement is unchanged on error.
    pub fn apply_move(&mut self, mv: Move) -> Result<i64, BoardError> {
        let delta = self.energy_delta(mv)?;
        let n = self.spec.n();
        match mv {
            Move::Swap { i, j } => {
                let (ci, cj) = (self.positions[i], self.positions[j]);
                self.tallies.remove(n, i, ci);
                self.tallies.remove(n, j, cj);
                self.tallies.add(n, i, cj);
                self.tallies.add(n, j, ci);
                self.positions.swap(i, j);
            }
            Move::Reassign { row, col } => {
                let old = self.positions[row];
                self.tallies.remove(n, row, old);
                self.tallies.add(n, row, col);
                self.positions[row] = col;
            }
        }
        debug_assert_eq!(self.energy(), self.energy_recount());
        Ok(delta)
    }
}

/// Attacking pairs of a per-row column vector (row clashes impossible).
pub fn pairwise_energy(positions: &[usize]) -> Energy {
    let mut e = 0;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let (ci, cj) = (positions[i] as i64, positions[j] as i64);
            let attack = ci == cj || (ci - cj).abs() == (j - i) as i64;
            e += attack as u64;
        }
    }
    e
}

/// Uniform draw over the embedding's state space restricted to fixed cells.
pub fn random_placement<R: Rng + ?Sized>(spec: &Arc<BoardSpec>, rng: &mut R) -> Placement {
    let n = spec.n();
    match spec.embedding() {
        Embedding::Permutation => {
            let used: Vec<bool> = {
                let mut used = vec![false; n];
                for &(_, c) in spec.fixed_cells() {
                    used[c] = true;
                }
                used
            };
            let mut free_cols: Vec<usize> = (0..n).filter(|&c| !used[c]).collect();
            free_cols.shuffle(rng);
            let mut positions = vec![0; n];
            let mut next = free_cols.into_iter();
            for row in 0..n {
                positions[row] = match spec.pinned_col(row) {
                    Some(c) => c,
                    None => next.next().expect("free column per free row"),
                };
            }
            Placement::from_positions(Arc::clone(spec), positions).expect("uniform permutation")
        }
        Embedding::RowWise => {
            let mut positions = vec![0; n];
            for row in 0..n {
                positions[row] = match spec.pinned_col(row) {
                    Some(c) => c,
                    None => rng.random_range(0..n),
                };
            }
            Placement::from_positions(Arc::clone(spec), positions).expect("uniform row vector")
        }
        Embedding::Binary => {
            let mut pinned: Vec<usize> = spec
                .fixed_cells()
                .iter()
                .map(|&(r, c)| r * n + c)
                .collect();
            pinned.sort_unstable();
            let free = n * n - pinned.len();
            let draw = rand::seq::index::sample(rng, free, n - pinned.len());
            let mut cells: Vec<(usize, usize)> = spec.fixed_cells().to_vec();
            for idx in draw.iter() {
                // Shift a free-cell index past the pinned linear indices.
                let mut linear = idx;
                for &p in &pinned {
                    if linear >= p {
                        linear += 1;
                    } else {
                        break;
                    }
                }
                cells.push((linear / n, linear % n));
            }
            Placement::from_cells(Arc::clone(spec), cells).expect("uniform cell subset")
        }
    }
}

/// The 8 dihedral images of a permutation placement (rotations and
/// reflections). Energy is invariant across all of them.
pub fn symmetry_images(positions: &[usize]) -> [Vec<usize>; 8] {
    let n = positions.len();
    let rot90 = |x: &[usize]| {
        // queen (r, c) maps to (c, n-1-r)
        let mut out = vec![0; n];
        for (r, &c) in x.iter().enumerate() {
            out[c] = n - 1 - r;
        }
        out
    };
    let mirror = |x: &[usize]| x.iter().map(|&c| n - 1 - c).collect::<Vec<_>>();
    let r0 = positions.to_vec();
    let r1 = rot90(&r0);
    let r2 = rot90(&r1);
    let r3 = rot90(&r2);
    let m0 = mirror(&r0);
    let m1 = mirror(&r1);
    let m2 = mirror(&r2);
    let m3 = mirror(&r3);
    [r0, r1, r2, r3, m0, m1, m2, m3]
}

/// Parses `"6,4,7,1,8,2,5,3"` (1-indexed columns) to 0-indexed positions.
pub fn parse_positions(text: &str) -> Result<Vec<usize>, BoardError> {
    text.split(',')
        .map(|part| {
            let v: usize = part.trim().parse().map_err(|_| BoardError::Parse {
                what: "positions",
                text: text.to_string(),
            })?;
            if v == 0 {
                return Err(BoardError::Parse {
                    what: "positions (1-indexed)",
                    text: text.to_string(),
                });
            }
            Ok(v - 1)
        })
        .collect()
}

/// Formats 0-indexed positions as the 1-indexed CLI text form.
pub fn format_positions(positions: &[usize]) -> String {
    positions
        .iter()
        .map(|&c| (c + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses `"1,3;2,5"` (1-indexed `row,col` pairs) to 0-indexed cells.
pub fn parse_fixed_cells(text: &str) -> Result<Vec<(usize, usize)>, BoardError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(';')
        .map(|pair| {
            let err = || BoardError::Parse {
                what: "fixed cells",
                text: text.to_string(),
            };
            let (r, c) = pair.trim().split_once(',').ok_or_else(err)?;
            let r: usize = r.trim().parse().map_err(|_| err())?;
            let c: usize = c.trim().parse().map_err(|_| err())?;
            if r == 0 || c == 0 {
                return Err(err());
            }
            Ok((r - 1, c - 1))
        })
        .collect()
}

/// Formats 0-indexed cells as the 1-indexed `"r,c;r,c"` CLI text form.
pub fn format_fixed_cells(cells: &[(usize, usize)]) -> String {
    cells
        .iter()
        .map(|&(r, c)| format!("{},{}", r + 1, c + 1))
        .collect::<Vec<_>>()
        .join(";")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn perm_spec(n: usize) -> Arc<BoardSpec> {
        Arc::new(BoardSpec::unconstrained(n, Embedding::Permutation).unwrap())
    }

    fn perm(n: usize, cols_1idx: &[usize]) -> Placement {
        let positions = cols_1idx.iter().map(|&c| c - 1).collect();
        Placement::from_positions(perm_spec(n), positions).unwrap()
    }

    #[test]
    fn energy_known_configurations() {
        // The classic 8-queens solution.
        assert_eq!(perm(8, &[6, 4, 7, 1, 8, 2, 5, 3]).energy(), 0);
        // All four queens on the main diagonal: C(4,2) pairs.
        assert_eq!(perm(4, &[1, 2, 3, 4]).energy(), 6);
        // A 4-queens solution, checked pair by pair.
        assert_eq!(perm(4, &[2, 4, 1, 3]).energy(), 0);
    }

    #[test]
    fn is_solution_matches_energy() {
        assert!(perm(8, &[6, 4, 7, 1, 8, 2, 5, 3]).is_solution());
        assert!(!perm(4, &[1, 2, 3, 4]).is_solution());
        // No 2-queens solutions exist.
        assert!(!perm(2, &[1, 2]).is_solution());
        assert!(!perm(2, &[2, 1]).is_solution());
    }

    #[test]
    fn delta_swap_matches_recount() {
        let p = perm(4, &[1, 2, 3, 4]);
        assert_eq!(p.energy_delta_swap(0, 1).unwrap(), -4);
        let mut q = p.clone();
        let delta = q.apply_move(Move::Swap { i: 0, j: 1 }).unwrap();
        assert_eq!(delta, -4);
        assert_eq!(q.energy(), 2);
        assert_eq!(q.positions(), &[1, 0, 2, 3]);
    }

    #[test]
    fn swap_is_involution() {
        let mut p = perm(6, &[3, 1, 5, 2, 6, 4]);
        let e0 = p.energy();
        let d1 = p.apply_move(Move::Swap { i: 2, j: 4 }).unwrap();
        let d2 = p.apply_move(Move::Swap { i: 2, j: 4 }).unwrap();
        assert_eq!(d1 + d2, 0);
        assert_eq!(p.energy(), e0);
    }

    #[test]
    fn swap_from_minimum_never_improves() {
        let p = perm(4, &[2, 4, 1, 3]);
        for i in 0..4 {
            for j in i + 1..4 {
                assert!(p.energy_delta_swap(i, j).unwrap() >= 0);
            }
        }
    }

    #[test]
    fn degenerate_and_pinned_swaps_rejected() {
        let p = perm(4, &[2, 4, 1, 3]);
        assert!(matches!(
            p.energy_delta_swap(1, 1),
            Err(BoardError::DegenerateSwap(1))
        ));
        let spec = Arc::new(
            BoardSpec::new(4, Embedding::Permutation, vec![(0, 2)]).unwrap(),
        );
        let pinned = Placement::from_positions(spec, vec![2, 0, 3, 1]).unwrap();
        assert!(matches!(
            pinned.energy_delta_swap(0, 2),
            Err(BoardError::PinnedRow { row: 0 })
        ));
    }

    #[test]
    fn reassign_moves() {
        let spec = Arc::new(BoardSpec::unconstrained(4, Embedding::RowWise).unwrap());
        let mut p = Placement::from_positions(spec, vec![0, 1, 0, 3]).unwrap();
        p.apply_move(Move::Reassign { row: 2, col: 2 }).unwrap();
        assert_eq!(p.positions(), &[0, 1, 2, 3]);
        assert!(matches!(
            p.apply_move(Move::Reassign { row: 1, col: 9 }),
            Err(BoardError::ColumnOutOfRange { .. })
        ));
    }

    #[test]
    fn fixed_cell_violations_rejected() {
        let spec = Arc::new(
            BoardSpec::new(4, Embedding::Permutation, vec![(0, 2)]).unwrap(),
        );
        assert!(matches!(
            Placement::from_positions(spec, vec![1, 3, 0, 2]),
            Err(BoardError::FixedCellUnoccupied { row: 0, col: 2 })
        ));
    }

    #[test]
    fn state_space_sizes_n8() {
        let binary = BoardSpec::unconstrained(8, Embedding::Binary).unwrap();
        let rowwise = BoardSpec::unconstrained(8, Embedding::RowWise).unwrap();
        let permutation = BoardSpec::unconstrained(8, Embedding::Permutation).unwrap();
        assert_eq!(binary.state_space_size(), BigUint::from(4_426_165_368u64));
        assert_eq!(rowwise.state_space_size(), BigUint::from(16_777_216u64));
        assert_eq!(permutation.state_space_size(), BigUint::from(40_320u64));
    }

    #[test]
    fn singleton_board() {
        let spec = perm_spec(1);
        let mut r = rng::derive(0, &[99]);
        let p = random_placement(&spec, &mut r);
        assert_eq!(p.positions(), &[0]);
        assert!(p.is_solution());
    }

    #[test]
    fn random_placement_respects_pins() {
        let spec = Arc::new(
            BoardSpec::new(4, Embedding::Permutation, vec![(0, 2)]).unwrap(),
        );
        let mut r = rng::derive(1, &[7]);
        for _ in 0..200 {
            let p = random_placement(&spec, &mut r);
            assert_eq!(p.positions()[0], 2);
        }
    }

    #[test]
    fn binary_random_placement_valid() {
        let spec = Arc::new(
            BoardSpec::new(6, Embedding::Binary, vec![(2, 3)]).unwrap(),
        );
        let mut r = rng::derive(3, &[5]);
        for _ in 0..100 {
            let p = random_placement(&spec, &mut r);
            assert_eq!(p.cells().len(), 6);
            assert!(p.cells().contains(&(2, 3)));
            assert_eq!(p.energy(), p.energy_recount());
        }
    }

    #[test]
    fn spec_validation() {
        assert!(BoardSpec::unconstrained(0, Embedding::Permutation).is_err());
        assert!(BoardSpec::new(4, Embedding::Permutation, vec![(0, 4)]).is_err());
        assert!(BoardSpec::new(4, Embedding::Permutation, vec![(1, 0), (1, 2)]).is_err());
        assert!(BoardSpec::new(4, Embedding::Permutation, vec![(0, 2), (1, 2)]).is_err());
        // Shared column is fine for RowWise.
        assert!(BoardSpec::new(4, Embedding::RowWise, vec![(0, 2), (1, 2)]).is_ok());
    }

    #[test]
    fn text_round_trips() {
        let pos = parse_positions("6,4,7,1,8,2,5,3").unwrap();
        assert_eq!(pos, vec![5, 3, 6, 0, 7, 1, 4, 2]);
        assert_eq!(format_positions(&pos), "6,4,7,1,8,2,5,3");
        let cells = parse_fixed_cells("1,3;2,5").unwrap();
        assert_eq!(cells, vec![(0, 2), (1, 4)]);
        assert_eq!(format_fixed_cells(&cells), "1,3;2,5");
        assert!(parse_positions("0,1").is_err());
        assert!(parse_fixed_cells("1;2").is_err());
        assert_eq!(parse_fixed_cells("").unwrap(), Vec::new());
    }

    #[test]
    fn energy_invariant_under_symmetries() {
        let mut r = rng::derive(11, &[1]);
        let spec = perm_spec(7);
        for _ in 0..50 {
            let p = random_placement(&spec, &mut r);
            let e = p.energy();
            for image in symmetry_images(p.positions()) {
                assert_eq!(pairwise_energy(&image), e);
            }
        }
    }
}
