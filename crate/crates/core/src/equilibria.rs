//! Shapley, strong and set-relation equilibria of strategy pairs, the vector
//! minimax diagnostic and the scalarization seed for strong equilibria.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{enumerate_simplex_grid, max_abs_diff, MixedStrategy, PayoffVector, Player, VectorPayoffGame};
use crate::lp::{solve_lp, Bounds, LinearProgram, LpOutcome, Sense};
use crate::polyhedra::{pareto_indices, weak_pareto_indices, OrientedPayoffPolyhedron, ParetoSense, ACTIVE_TOL};
use crate::strategy::{
    improve, optimality_lp, payoff_polyhedron, scalarized_game_solve, ScalarizationWeight, StrategyFront,
    DEFAULT_TOL,
};

/// Decision threshold on the optimal value of the strong-equilibrium LP.
pub const STRONG_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    None,
    SetRelation,
    Shapley,
    SetShapley,
    StrongShapley,
    StrongSetShapley,
}

impl Classification {
    pub fn from_flags(p_minimal: bool, q_maximal: bool, shapley: bool, strong: bool) -> Self {
        match (p_minimal && q_maximal, shapley, strong) {
            (true, true, true) => Classification::StrongSetShapley,
            (true, true, false) => Classification::SetShapley,
            (true, false, _) => Classification::SetRelation,
            (false, true, true) => Classification::StrongShapley,
            (false, true, false) => Classification::Shapley,
            (false, false, _) => Classification::None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Classification::None => "none",
            Classification::SetRelation => "set relation equilibrium",
            Classification::Shapley => "Shapley equilibrium",
            Classification::SetShapley => "set Shapley equilibrium",
            Classification::StrongShapley => "strong Shapley equilibrium",
            Classification::StrongSetShapley => "strong set Shapley equilibrium",
        }
    }

    pub fn is_set_shapley(self) -> bool {
        matches!(self, Classification::SetShapley | Classification::StrongSetShapley)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumRecord {
    pub p: MixedStrategy,
    pub q: MixedStrategy,
    pub payoff: PayoffVector,
    pub p_minimal: bool,
    pub q_maximal: bool,
    pub shapley: bool,
    pub strong: bool,
    /// Optimal value of the strong-equilibrium LP; `None` when the pair is
    /// not Shapley and the LP was skipped.
    pub strong_value: Option<f64>,
    pub classification: Classification,
}

/// Whether `v` is an efficient point of the polytope generating `poly`:
/// the normals of the facets active at `v` sum to a strictly positive vector.
pub fn is_efficient_point(poly: &OrientedPayoffPolyhedron, v: &[f64]) -> bool {
    let active = poly.active_halfspaces(v, ACTIVE_TOL);
    if active.is_empty() {
        return false;
    }
    let mut sum = vec![0.0; poly.dim()];
    for i in active {
        for (s, a) in sum.iter_mut().zip(&poly.halfspaces()[i].normal) {
            *s += a;
        }
    }
    sum.iter().all(|s| *s > 1e-12)
}

/// `v(p, q) ∈ Max v_I(p)`.
pub fn is_max_point_of_row_set(game: &VectorPayoffGame, p: &MixedStrategy, q: &MixedStrategy) -> Result<bool> {
    let v = game.expected_payoff(p, q)?;
    Ok(is_efficient_point(&payoff_polyhedron(game, p)?, &v))
}

/// `v(p, q) ∈ Min v_II(q)`.
pub fn is_min_point_of_col_set(game: &VectorPayoffGame, p: &MixedStrategy, q: &MixedStrategy) -> Result<bool> {
    let v = game.expected_payoff(p, q)?;
    Ok(is_efficient_point(&payoff_polyhedron(game, q)?, &v))
}

pub fn is_shapley_equilibrium(game: &VectorPayoffGame, p: &MixedStrategy, q: &MixedStrategy) -> Result<bool> {
    let v = game.expected_payoff(p, q)?;
    Ok(is_efficient_point(&payoff_polyhedron(game, p)?, &v)
        && is_efficient_point(&payoff_polyhedron(game, q)?, &v))
}

/// `max e.t` subject to `y ∈ V_I(p)`, `y - t ∈ V_II(q)`, `t >= 0`.
/// `None` if the LP is unbounded.
pub fn strong_lp_value(row: &OrientedPayoffPolyhedron, col: &OrientedPayoffPolyhedron) -> Result<Option<f64>> {
    let dim = row.dim();
    if col.dim() != dim {
        return Err(Error::DimensionMismatch("payoff sets of different dimension".into()));
    }
    let mut objective = vec![0.0; 2 * dim];
    objective[dim..].iter_mut().for_each(|c| *c = 1.0);
    let mut lp = LinearProgram::new(Sense::Max, objective);
    for k in 0..dim {
        lp.set_bounds(k, Bounds::FREE);
    }
    for h in row.halfspaces() {
        let mut coeffs = h.normal.clone();
        coeffs.resize(2 * dim, 0.0);
        lp.add_le(coeffs, h.offset);
    }
    for h in col.halfspaces() {
        let mut coeffs = h.normal.clone();
        coeffs.extend(h.normal.iter().map(|a| -a));
        lp.add_ge(coeffs, h.offset);
    }
    match solve_lp(&lp)? {
        LpOutcome::Optimal(s) => Ok(Some(s.objective_value)),
        LpOutcome::Unbounded => Ok(None),
        LpOutcome::Infeasible => Err(Error::Inconsistent("payoff sets of a pair do not intersect".into())),
    }
}

/// Strong Shapley equilibrium: a Shapley equilibrium whose payoff sets
/// intersect only in doubly efficient points.
pub fn is_strong_shapley(game: &VectorPayoffGame, p: &MixedStrategy, q: &MixedStrategy) -> Result<bool> {
    let row = payoff_polyhedron(game, p)?;
    let col = payoff_polyhedron(game, q)?;
    let v = game.expected_payoff(p, q)?;
    if !(is_efficient_point(&row, &v) && is_efficient_point(&col, &v)) {
        return Ok(false);
    }
    Ok(matches!(strong_lp_value(&row, &col)?, Some(x) if x <= STRONG_TOL))
}

fn record(
    game: &VectorPayoffGame,
    p: &MixedStrategy,
    row: &OrientedPayoffPolyhedron,
    p_minimal: bool,
    q: &MixedStrategy,
    col: &OrientedPayoffPolyhedron,
    q_maximal: bool,
) -> Result<EquilibriumRecord> {
    let payoff = game.expected_payoff(p, q)?;
    let shapley = is_efficient_point(row, &payoff) && is_efficient_point(col, &payoff);
    let strong_value = if shapley { strong_lp_value(row, col)? } else { None };
    let strong = shapley && matches!(strong_value, Some(x) if x <= STRONG_TOL);
    Ok(EquilibriumRecord {
        p: p.clone(),
        q: q.clone(),
        payoff,
        p_minimal,
        q_maximal,
        shapley,
        strong,
        strong_value,
        classification: Classification::from_flags(p_minimal, q_maximal, shapley, strong),
    })
}

/// Full classification of one pair, including the optimality LPs.
pub fn classify_pair(game: &VectorPayoffGame, p: &MixedStrategy, q: &MixedStrategy) -> Result<EquilibriumRecord> {
    if p.owner() != Player::Row || q.owner() != Player::Col {
        return Err(Error::InvalidStrategy("expected a (row, column) strategy pair".into()));
    }
    let p_minimal = optimality_lp(game, p, DEFAULT_TOL)?.optimal;
    let q_maximal = optimality_lp(game, q, DEFAULT_TOL)?.optimal;
    record(game, p, &payoff_polyhedron(game, p)?, p_minimal, q, &payoff_polyhedron(game, q)?, q_maximal)
}

/// Records for every pair in `MIN(I) x MAX(II)`, ordered by (p, q) grid index.
pub fn classify_pairs(
    game: &VectorPayoffGame,
    front_row: &StrategyFront,
    front_col: &StrategyFront,
) -> Result<Vec<EquilibriumRecord>> {
    if front_row.player != Player::Row || front_col.player != Player::Col {
        return Err(Error::InvalidParameter("fronts must belong to players I and II".into()));
    }
    let ps = front_row.optimal();
    let qs = front_col.optimal();
    let row_polys: Vec<OrientedPayoffPolyhedron> =
        ps.par_iter().map(|p| payoff_polyhedron(game, p)).collect::<Result<_>>()?;
    let col_polys: Vec<OrientedPayoffPolyhedron> =
        qs.par_iter().map(|q| payoff_polyhedron(game, q)).collect::<Result<_>>()?;
    (0..ps.len() * qs.len())
        .into_par_iter()
        .map(|k| {
            let (a, b) = (k / qs.len(), k % qs.len());
            record(game, ps[a], &row_polys[a], true, qs[b], &col_polys[b], true)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagnosticMode {
    /// Weakly efficient points of each payoff set.
    Weak,
    /// Efficient points only.
    Strong,
}

/// Grid approximation of vector minimax (player I) or maximin (player II)
/// strategies. Each payoff set is sampled at the opponent grid with step
/// `1/sample_divisions`; a strategy is reported if one of its sampled
/// payoffs is a Min (player I) or Max (player II) point of the union of the
/// (weakly) efficient samples over all strategies.
pub fn vector_minimax_diagnostic(
    game: &VectorPayoffGame,
    player: Player,
    divisions: u32,
    sample_divisions: u32,
    mode: DiagnosticMode,
) -> Result<Vec<MixedStrategy>> {
    let grid = enumerate_simplex_grid(game.strategy_len(player), divisions)?;
    let samples = enumerate_simplex_grid(game.strategy_len(player.opponent()), sample_divisions)?;
    let opponents = samples.strategies(player.opponent());
    // efficient direction inside each payoff set, and for the union
    let (inner, outer) = match player {
        Player::Row => (ParetoSense::Max, ParetoSense::Min),
        Player::Col => (ParetoSense::Min, ParetoSense::Max),
    };
    let sampled: Vec<Vec<PayoffVector>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let s = grid.strategy(i, player);
            opponents
                .iter()
                .map(|o| match player {
                    Player::Row => game.expected_payoff(&s, o),
                    Player::Col => game.expected_payoff(o, &s),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut union: Vec<PayoffVector> = Vec::new();
    for pts in &sampled {
        let keep = match mode {
            DiagnosticMode::Weak => weak_pareto_indices(pts, inner, 1e-9),
            DiagnosticMode::Strong => pareto_indices(pts, inner, 1e-9),
        };
        union.extend(keep.into_iter().map(|k| pts[k].clone()));
    }
    let front: Vec<PayoffVector> = pareto_indices(&union, outer, 1e-9)
        .into_iter()
        .map(|k| union[k].clone())
        .collect();
    Ok((0..grid.len())
        .filter(|&i| {
            sampled[i]
                .iter()
                .any(|v| front.iter().any(|f| max_abs_diff(f, v) <= 1e-9))
        })
        .map(|i| grid.strategy(i, player))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongSeed {
    pub p: MixedStrategy,
    pub q: MixedStrategy,
    /// Equilibrium of the scalar game with entries `e.g_ij / K`.
    pub scalar_p: MixedStrategy,
    pub scalar_q: MixedStrategy,
    pub scalar_value: f64,
    pub converged: bool,
    /// The improved pair passed the strong set Shapley test.
    pub verified: bool,
}

/// Scalar equilibrium for uniform weights, improved to a minimal/maximal
/// pair and checked for being a strong set Shapley equilibrium.
pub fn find_strong_seed(game: &VectorPayoffGame, max_iter: usize) -> Result<StrongSeed> {
    let alpha = ScalarizationWeight::uniform(game.dim())?;
    let sp = scalarized_game_solve(game, &alpha, Player::Row)?;
    let sq = scalarized_game_solve(game, &alpha, Player::Col)?;
    let ip = improve(game, &sp.strategy, max_iter, DEFAULT_TOL)?;
    let iq = improve(game, &sq.strategy, max_iter, DEFAULT_TOL)?;
    let converged = ip.converged && iq.converged;
    let verified = converged && is_strong_shapley(game, &ip.strategy, &iq.strategy)?;
    Ok(StrongSeed {
        p: ip.strategy,
        q: iq.strategy,
        scalar_p: sp.strategy,
        scalar_q: sq.strategy,
        scalar_value: sp.value,
        converged,
        verified,
    })
}
