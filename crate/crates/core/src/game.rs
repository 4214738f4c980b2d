//! Vector payoff games, mixed strategies and the bilinear payoff map.
//!
//! Entries `g_ij` are K-vectors read as the loss of the row player and the
//! gain of the column player. All types are immutable after construction.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the weight sum of a mixed strategy.
pub const STRATEGY_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    /// Player I, chooses rows and minimizes loss.
    Row,
    /// Player II, chooses columns and maximizes gain.
    Col,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Row => Player::Col,
            Player::Col => Player::Row,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Row => write!(f, "I"),
            Player::Col => write!(f, "II"),
        }
    }
}

/// A point of R^K: an expected payoff or a polyhedron generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PayoffVector(pub Vec<f64>);

impl PayoffVector {
    pub fn new(value: Vec<f64>) -> Self {
        PayoffVector(value)
    }

    pub fn zeros(dim: usize) -> Self {
        PayoffVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        dot(&self.0, w)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for PayoffVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for PayoffVector {
    fn from(v: Vec<f64>) -> Self {
        PayoffVector(v)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximum absolute componentwise difference.
pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Probability vector over one player's pure strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy {
    owner: Player,
    weights: Vec<f64>,
}

impl MixedStrategy {
    /// Validates nonnegativity and the unit sum.
    pub fn new(owner: Player, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidStrategy("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidStrategy(format!("weight {w} is negative or not finite")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > STRATEGY_SUM_TOL {
            return Err(Error::InvalidStrategy(format!("weights sum to {sum}, expected 1")));
        }
        Ok(MixedStrategy { owner, weights })
    }

    /// Cleans a numerically computed probability vector: entries above
    /// `-tol` are clamped to zero and the vector is rescaled to unit sum.
    pub fn from_approximate(owner: Player, raw: &[f64], tol: f64) -> Result<Self> {
        if raw.iter().any(|w| !w.is_finite() || *w < -tol) {
            return Err(Error::InvalidStrategy(format!("{raw:?} is not a probability vector")));
        }
        let clamped: Vec<f64> = raw.iter().map(|w| w.max(0.0)).collect();
        let sum: f64 = clamped.iter().sum();
        if (sum - 1.0).abs() > tol.max(1e-9) * raw.len() as f64 {
            return Err(Error::InvalidStrategy(format!("{raw:?} sums to {sum}")));
        }
        MixedStrategy::new(owner, clamped.iter().map(|w| w / sum).collect())
    }

    /// Unit vector on pure strategy `index`.
    pub fn pure(owner: Player, len: usize, index: usize) -> Result<Self> {
        if index >= len {
            return Err(Error::InvalidStrategy(format!("pure strategy {index} out of range {len}")));
        }
        let mut weights = vec![0.0; len];
        weights[index] = 1.0;
        MixedStrategy::new(owner, weights)
    }

    /// Uniform distribution over `len` pure strategies.
    pub fn uniform(owner: Player, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidStrategy("no weights".into()));
        }
        let mut weights = vec![1.0 / len as f64; len];
        // exact unit sum for the representable cases
        let rest: f64 = weights[1..].iter().sum();
        weights[0] = 1.0 - rest;
        MixedStrategy::new(owner, weights)
    }

    pub fn owner(&self) -> Player {
        self.owner
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// The m x n matrix of K-vectors `g_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorPayoffGame {
    rows: usize,
    cols: usize,
    dim: usize,
    // row-major, entry (i, j) occupies [(i * cols + j) * dim ..][..dim]
    entries: Vec<f64>,
}

impl VectorPayoffGame {
    /// Builds a game from nested `payoffs[i][j][k]`.
    pub fn new(payoffs: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let rows = payoffs.len();
        if rows == 0 {
            return Err(Error::InvalidGame("game has no rows".into()));
        }
        let cols = payoffs[0].len();
        if cols == 0 {
            return Err(Error::InvalidGame("game has no columns".into()));
        }
        let dim = payoffs[0][0].len();
        if dim == 0 {
            return Err(Error::InvalidGame("payoff dimension is zero".into()));
        }
        let mut entries = Vec::with_capacity(rows * cols * dim);
        for (i, row) in payoffs.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::InvalidGame(format!("row {i} has {} entries, expected {cols}", row.len())));
            }
            for (j, g) in row.iter().enumerate() {
                if g.len() != dim {
                    return Err(Error::InvalidGame(format!(
                        "entry ({i},{j}) has length {}, expected {dim}",
                        g.len()
                    )));
                }
                if g.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidGame(format!("entry ({i},{j}) is not finite")));
                }
                entries.extend_from_slice(g);
            }
        }
        Ok(VectorPayoffGame { rows, cols, dim, entries })
    }

    /// Builds a game from a flat row-major buffer of `rows * cols * dim` reals.
    pub fn from_flat(rows: usize, cols: usize, dim: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || dim == 0 {
            return Err(Error::InvalidGame(format!("invalid shape {rows}x{cols}x{dim}")));
        }
        if entries.len() != rows * cols * dim {
            return Err(Error::InvalidGame(format!(
                "expected {} reals, got {}",
                rows * cols * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGame("non-finite payoff".into()));
        }
        Ok(VectorPayoffGame { rows, cols, dim, entries })
    }

    /// Scalar game (K = 1) from an ordinary loss matrix.
    pub fn scalar(matrix: Vec<Vec<f64>>) -> Result<Self> {
        VectorPayoffGame::new(
            matrix
                .into_iter()
                .map(|row| row.into_iter().map(|x| vec![x]).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.cols + j) * self.dim;
        &self.entries[start..start + self.dim]
    }

    /// Number of pure strategies of `player`.
    pub fn strategy_len(&self, player: Player) -> usize {
        match player {
            Player::Row => self.rows,
            Player::Col => self.cols,
        }
    }

    /// Payoff vector indexed from the point of view of `player`: pure
    /// strategy `own` against opponent pure strategy `other`.
    pub fn entry_for(&self, player: Player, own: usize, other: usize) -> &[f64] {
        match player {
            Player::Row => self.entry(own, other),
            Player::Col => self.entry(other, own),
        }
    }

    pub fn payoffs(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry(i, j).to_vec()).collect())
            .collect()
    }

    /// Scalar matrix with entries `w . g_ij`.
    pub fn scalarize(&self, w: &[f64]) -> Result<Vec<Vec<f64>>> {
        if w.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "weight has length {}, payoffs have dimension {}",
                w.len(),
                self.dim
            )));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| dot(self.entry(i, j), w)).collect())
            .collect())
    }

    /// The game seen from the other side: rows and columns swapped and
    /// payoffs negated. Player II of `self` is player I of the mirror, and
    /// `V_II(q)` of `self` is the negation of `V_I(q)` of the mirror.
    pub fn mirrored(&self) -> VectorPayoffGame {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.extend(self.entry(i, j).iter().map(|x| -x));
            }
        }
        VectorPayoffGame { rows: self.cols, cols: self.rows, dim: self.dim, entries }
    }

    fn check_strategy(&self, s: &MixedStrategy, player: Player) -> Result<()> {
        if s.owner() != player {
            return Err(Error::DimensionMismatch(format!(
                "strategy belongs to player {}, expected player {player}",
                s.owner()
            )));
        }
        let expected = self.strategy_len(player);
        if s.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "strategy of player {player} has {} weights, game has {expected}",
                s.len()
            )));
        }
        Ok(())
    }

    /// `v(p, q) = sum_i sum_j p_i g_ij q_j`.
    pub fn expected_payoff(&self, p: &MixedStrategy, q: &MixedStrategy) -> Result<PayoffVector> {
        self.check_strategy(p, Player::Row)?;
        self.check_strategy(q, Player::Col)?;
        let mut v = vec![0.0; self.dim];
        for (i, &pi) in p.weights().iter().enumerate() {
            for (j, &qj) in q.weights().iter().enumerate() {
                let w = pi * qj;
                if w == 0.0 {
                    continue;
                }
                for (vk, gk) in v.iter_mut().zip(self.entry(i, j)) {
                    *vk += w * gk;
                }
            }
        }
        Ok(PayoffVector(v))
    }

    /// The points `y_j(p) = sum_i p_i g_ij`, one per column, whose convex
    /// hull is `v_I(p)`.
    pub fn row_payoff_generators(&self, p: &MixedStrategy) -> Result<Vec<PayoffVector>> {
        self.check_strategy(p, Player::Row)?;
        Ok(self.generators_unchecked(Player::Row, p.weights()))
    }

    /// The points `z_i(q) = sum_j q_j g_ij`, one per row, whose convex hull
    /// is `v_II(q)`.
    pub fn col_payoff_generators(&self, q: &MixedStrategy) -> Result<Vec<PayoffVector>> {
        self.check_strategy(q, Player::Col)?;
        Ok(self.generators_unchecked(Player::Col, q.weights()))
    }

    /// Generators of the payoff set of `s` for its owner.
    pub fn payoff_generators(&self, s: &MixedStrategy) -> Result<Vec<PayoffVector>> {
        match s.owner() {
            Player::Row => self.row_payoff_generators(s),
            Player::Col => self.col_payoff_generators(s),
        }
    }

    pub(crate) fn generators_unchecked(&self, player: Player, weights: &[f64]) -> Vec<PayoffVector> {
        let other = self.strategy_len(player.opponent());
        (0..other)
            .map(|o| {
                let mut y = vec![0.0; self.dim];
                for (own, &w) in weights.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    for (yk, gk) in y.iter_mut().zip(self.entry_for(player, own, o)) {
                        *yk += w * gk;
                    }
                }
                PayoffVector(y)
            })
            .collect()
    }

    /// `w(p)`: componentwise maximum of the row generators, so that
    /// `W_I(p) = {w(p)} + R^K_+`. For a column strategy the componentwise
    /// minimum of the column generators is returned (`W_II(q) = w(q) - R^K_+`).
    pub fn componentwise_security_point(&self, s: &MixedStrategy) -> Result<PayoffVector> {
        let gens = self.payoff_generators(s)?;
        let pick: fn(f64, f64) -> f64 = match s.owner() {
            Player::Row => f64::max,
            Player::Col => f64::min,
        };
        let mut w = gens[0].0.clone();
        for g in &gens[1..] {
            for (wk, gk) in w.iter_mut().zip(g.iter()) {
                *wk = pick(*wk, *gk);
            }
        }
        Ok(PayoffVector(w))
    }
}

/// On-disk game format: `{"rows": m, "cols": n, "dim": K, "payoffs": [[[..K..] x n] x m]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameFile {
    pub rows: usize,
    pub cols: usize,
    pub dim: usize,
    pub payoffs: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<GameFile> for VectorPayoffGame {
    type Error = Error;

    fn try_from(file: GameFile) -> Result<Self> {
        let game = VectorPayoffGame::new(file.payoffs)?;
        if (game.rows, game.cols, game.dim) != (file.rows, file.cols, file.dim) {
            return Err(Error::InvalidGame(format!(
                "declared shape {}x{}x{} does not match payoffs {}x{}x{}",
                file.rows, file.cols, file.dim, game.rows, game.cols, game.dim
            )));
        }
        Ok(game)
    }
}

impl From<&VectorPayoffGame> for GameFile {
    fn from(game: &VectorPayoffGame) -> Self {
        GameFile { rows: game.rows, cols: game.cols, dim: game.dim, payoffs: game.payoffs() }
    }
}

/// All strategies whose weights are multiples of `1/divisions`, in
/// ascending lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexGrid {
    dim: usize,
    divisions: u32,
    compositions: Vec<Vec<u32>>,
}

impl SimplexGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `N` for step `t = 1/N`.
    pub fn divisions(&self) -> u32 {
        self.divisions
    }

    pub fn step(&self) -> f64 {
        1.0 / self.divisions as f64
    }

    pub fn len(&self) -> usize {
        self.compositions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.compositions.is_empty()
    }

    /// Integer parts of the grid point, summing to `N`.
    pub fn composition(&self, index: usize) -> &[u32] {
        &self.compositions[index]
    }

    pub fn weights(&self, index: usize) -> Vec<f64> {
        let n = self.divisions as f64;
        self.compositions[index].iter().map(|&c| c as f64 / n).collect()
    }

    pub fn strategy(&self, index: usize, owner: Player) -> MixedStrategy {
        let mut weights = self.weights(index);
        // compositions sum to N exactly; rounding can leave ~1ulp per entry
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > STRATEGY_SUM_TOL {
            let last = weights.len() - 1;
            weights[last] += 1.0 - sum;
        }
        MixedStrategy { owner, weights }
    }

    pub fn strategies(&self, owner: Player) -> Vec<MixedStrategy> {
        (0..self.len()).map(|i| self.strategy(i, owner)).collect()
    }

    /// Grid index of a strategy whose weights are multiples of the step.
    pub fn index_of(&self, weights: &[f64]) -> Option<usize> {
        let n = self.divisions as f64;
        let target: Vec<u32> = weights.iter().map(|w| (w * n).round() as u32).collect();
        self.compositions.binary_search(&target).ok()
    }
}

/// Number of compositions of `n` into `parts` nonnegative parts.
pub fn grid_size(parts: usize, n: u32) -> u128 {
    // C(n + parts - 1, parts - 1)
    let k = parts as u128 - 1;
    let top = n as u128 + k;
    (1..=k).fold(1u128, |acc, i| acc * (top - k + i) / i)
}

/// Enumerates the simplex grid of step `1/divisions` in dimension `dim`.
pub fn enumerate_simplex_grid(dim: usize, divisions: u32) -> Result<SimplexGrid> {
    if divisions < 1 {
        return Err(Error::InvalidStep("step must be 1/N with N >= 1".into()));
    }
    if dim == 0 {
        return Err(Error::InvalidStep("grid dimension must be positive".into()));
    }
    let mut compositions = Vec::new();
    let mut current = vec![0u32; dim];
    compose(&mut current, 0, divisions, &mut compositions);
    Ok(SimplexGrid { dim, divisions, compositions })
}

fn compose(current: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for c in 0..=remaining {
        current[pos] = c;
        compose(current, pos + 1, remaining - c, out);
    }
}
