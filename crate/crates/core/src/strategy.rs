//! Minimality (player I) and maximality (player II) of mixed strategies,
//! grid classification, improvement iteration and scalarized solutions.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{enumerate_simplex_grid, MixedStrategy, Player, SimplexGrid, VectorPayoffGame};
use crate::lp::{check_feasibility, solve_lp, Bounds, LinearProgram, LpOutcome, Sense};
use crate::polyhedra::{build_set, Halfspace, Orientation, OrientedPayoffPolyhedron, VERTEX_MERGE_TOL};

/// Default decision tolerance on the optimal value of the minimality LP.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Default shift used by the security-image prefilter.
pub const DEFAULT_PREFILTER_EPS: f64 = 1e-6;

/// Orientation of the payoff set of `player`: `V_I(p)` is a lower set,
/// `V_II(q)` an upper set.
pub fn orientation_of(player: Player) -> Orientation {
    match player {
        Player::Row => Orientation::Lower,
        Player::Col => Orientation::Upper,
    }
}

/// `V_I(p)` for a row strategy, `V_II(q)` for a column strategy.
pub fn payoff_polyhedron(game: &VectorPayoffGame, s: &MixedStrategy) -> Result<OrientedPayoffPolyhedron> {
    let gens = game.payoff_generators(s)?;
    build_set(orientation_of(s.owner()), &gens)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalityCertificate {
    pub tested: MixedStrategy,
    /// Optimal value `sum_l eps_l`.
    pub lp_value: f64,
    /// A strategy with a strictly smaller (player I) or larger (player II)
    /// payoff set, present iff the tested strategy is not optimal.
    pub improving: Option<MixedStrategy>,
    /// Minimal for player I, maximal for player II.
    pub optimal: bool,
    /// `eps_l` per vertex of the tested payoff set.
    pub slacks: Vec<f64>,
}

/// Coefficients of `h . gen_o(x)` in `x`, for every opponent pure strategy `o`.
fn generator_rows(game: &VectorPayoffGame, player: Player, h: &[f64]) -> Vec<Vec<f64>> {
    let own = game.strategy_len(player);
    let other = game.strategy_len(player.opponent());
    (0..other)
        .map(|o| {
            (0..own)
                .map(|i| crate::game::dot(h, game.entry_for(player, i, o)))
                .collect()
        })
        .collect()
}

/// Solves the optimality LP for `s` (minimality for a row strategy,
/// maximality for a column strategy) with decision tolerance `tol`.
pub fn optimality_lp(game: &VectorPayoffGame, s: &MixedStrategy, tol: f64) -> Result<MinimalityCertificate> {
    let player = s.owner();
    let poly = payoff_polyhedron(game, s)?;
    let sign = poly.orientation().sign();
    let own = game.strategy_len(player);
    let exposing: Vec<Halfspace> = poly
        .vertices()
        .iter()
        .map(|v| poly.exposing_normal_at_vertex(v))
        .collect::<Result<_>>()?;
    let r = exposing.len();

    let mut objective = vec![0.0; own + r];
    objective[own..].iter_mut().for_each(|c| *c = 1.0);
    let mut lp = LinearProgram::new(Sense::Max, objective);
    let mut simplex = vec![0.0; own + r];
    simplex[..own].iter_mut().for_each(|c| *c = 1.0);
    lp.add_eq(simplex, 1.0);
    // the candidate payoff set lies inside the tested one
    for h in poly.halfspaces() {
        for row in generator_rows(game, player, &h.normal) {
            let mut coeffs: Vec<f64> = row.iter().map(|c| sign * c).collect();
            coeffs.resize(own + r, 0.0);
            lp.add_le(coeffs, sign * h.offset);
        }
    }
    // and misses vertex l by eps_l along its exposing normal
    for (l, c) in exposing.iter().enumerate() {
        for row in generator_rows(game, player, &c.normal) {
            let mut coeffs: Vec<f64> = row.iter().map(|x| sign * x).collect();
            coeffs.resize(own + r, 0.0);
            coeffs[own + l] = 1.0;
            lp.add_le(coeffs, sign * c.offset);
        }
    }

    let sol = match solve_lp(&lp)? {
        LpOutcome::Optimal(sol) => sol,
        LpOutcome::Infeasible => {
            return Err(Error::Inconsistent("optimality LP infeasible at its own strategy".into()))
        }
        LpOutcome::Unbounded => return Err(Error::Inconsistent("optimality LP unbounded".into())),
    };
    let lp_value = sol.objective_value;
    let slacks = sol.x[own..].to_vec();
    let optimal = lp_value <= tol;
    let improving = if optimal {
        None
    } else {
        let candidate = MixedStrategy::from_approximate(player, &sol.x[..own], 1e-7)?;
        let better = payoff_polyhedron(game, &candidate)?;
        let inside = better.is_subset_of_tol(&poly, tol)?;
        let strict = !poly.is_subset_of_tol(&better, 0.0)? || !poly.same_vertices(&better, VERTEX_MERGE_TOL);
        if !(inside && strict) {
            return Err(Error::Inconsistent(format!(
                "improving strategy {:?} failed the subset check (value {lp_value})",
                candidate.weights()
            )));
        }
        Some(candidate)
    };
    Ok(MinimalityCertificate { tested: s.clone(), lp_value, improving, optimal, slacks })
}

/// Minimality test for a row strategy.
pub fn minimality_lp(game: &VectorPayoffGame, p: &MixedStrategy) -> Result<MinimalityCertificate> {
    if p.owner() != Player::Row {
        return Err(Error::InvalidStrategy("minimality is tested on row strategies".into()));
    }
    optimality_lp(game, p, DEFAULT_TOL)
}

/// Maximality test for a column strategy.
pub fn maximality_lp(game: &VectorPayoffGame, q: &MixedStrategy) -> Result<MinimalityCertificate> {
    if q.owner() != Player::Col {
        return Err(Error::InvalidStrategy("maximality is tested on column strategies".into()));
    }
    optimality_lp(game, q, DEFAULT_TOL)
}

/// Sufficient test for non-optimality against the security image of the
/// owner of `s` (halfspaces of `W_I` for a row strategy, of `W_II` for a
/// column strategy). `true` means `s` is certainly not optimal.
pub fn poss_prefilter(
    game: &VectorPayoffGame,
    s: &MixedStrategy,
    image: &[Halfspace],
    eps: f64,
) -> Result<bool> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("prefilter shift must be positive, got {eps}")));
    }
    let player = s.owner();
    let dim = game.dim();
    let gens = game.payoff_generators(s)?;
    let other = gens.len();
    let sign = orientation_of(player).sign();
    // variables: y (free), then the opponent mixture
    let mut lp = LinearProgram::feasibility(dim + other);
    for k in 0..dim {
        lp.set_bounds(k, Bounds::FREE);
    }
    let mut simplex = vec![0.0; dim + other];
    simplex[dim..].iter_mut().for_each(|c| *c = 1.0);
    lp.add_eq(simplex, 1.0);
    for k in 0..dim {
        let mut coeffs = vec![0.0; dim + other];
        coeffs[k] = sign;
        for (o, g) in gens.iter().enumerate() {
            coeffs[dim + o] = -sign * g[k];
        }
        lp.add_le(coeffs, 0.0);
    }
    for h in image {
        if h.normal.len() != dim {
            return Err(Error::DimensionMismatch("image halfspace of wrong dimension".into()));
        }
        let mut coeffs: Vec<f64> = h.normal.iter().map(|a| sign * a).collect();
        coeffs.resize(dim + other, 0.0);
        let shift: f64 = h.normal.iter().sum::<f64>() * eps;
        lp.add_ge(coeffs, sign * h.offset + shift);
    }
    Ok(check_feasibility(&lp)?.is_feasible())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub tol: f64,
    /// Security-image prefilter shift; `None` disables the prefilter.
    pub prefilter: Option<f64>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { tol: DEFAULT_TOL, prefilter: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridVerdict {
    pub index: usize,
    pub strategy: MixedStrategy,
    pub optimal: bool,
    pub prefiltered: bool,
    /// `None` when the prefilter skipped the LP.
    pub certificate: Option<MinimalityCertificate>,
}

impl GridVerdict {
    pub fn lp_value(&self) -> Option<f64> {
        self.certificate.as_ref().map(|c| c.lp_value)
    }
}

/// Optimal grid strategies with identical payoff sets.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceClass {
    /// Grid index of the lexicographically smallest member.
    pub representative: usize,
    pub members: Vec<usize>,
}

/// Grid representation of `MIN(I)` or `MAX(II)`.
#[derive(Debug, Clone)]
pub struct StrategyFront {
    pub player: Player,
    pub grid: SimplexGrid,
    pub verdicts: Vec<GridVerdict>,
    pub classes: Vec<EquivalenceClass>,
}

impl StrategyFront {
    /// Every optimal grid strategy, in grid order.
    pub fn optimal(&self) -> Vec<&MixedStrategy> {
        self.verdicts.iter().filter(|v| v.optimal).map(|v| &v.strategy).collect()
    }

    pub fn optimal_indices(&self) -> Vec<usize> {
        self.verdicts.iter().filter(|v| v.optimal).map(|v| v.index).collect()
    }

    /// One strategy per payoff-equivalence class.
    pub fn representatives(&self) -> Vec<&MixedStrategy> {
        self.classes.iter().map(|c| &self.verdicts[c.representative].strategy).collect()
    }

    pub fn is_representative(&self, index: usize) -> bool {
        self.classes.iter().any(|c| c.representative == index)
    }
}

/// Tests every point of the grid with step `1/divisions`.
pub fn classify_grid(
    game: &VectorPayoffGame,
    player: Player,
    divisions: u32,
    opts: &ClassifyOptions,
) -> Result<StrategyFront> {
    let grid = enumerate_simplex_grid(game.strategy_len(player), divisions)?;
    let image = match opts.prefilter {
        Some(eps) => {
            if !(eps > 0.0) {
                return Err(Error::InvalidParameter(format!("prefilter shift must be positive, got {eps}")));
            }
            Some(crate::poss::compute_security_image(game, player)?)
        }
        None => None,
    };
    let verdicts: Vec<GridVerdict> = (0..grid.len())
        .into_par_iter()
        .map(|index| -> Result<GridVerdict> {
            let strategy = grid.strategy(index, player);
            if let (Some(img), Some(eps)) = (&image, opts.prefilter) {
                if poss_prefilter(game, &strategy, img.halfspaces(), eps)? {
                    return Ok(GridVerdict { index, strategy, optimal: false, prefiltered: true, certificate: None });
                }
            }
            let cert = optimality_lp(game, &strategy, opts.tol)?;
            Ok(GridVerdict { index, strategy, optimal: cert.optimal, prefiltered: false, certificate: Some(cert) })
        })
        .collect::<Result<_>>()?;

    let optimal: Vec<usize> = verdicts.iter().filter(|v| v.optimal).map(|v| v.index).collect();
    let polys: Vec<OrientedPayoffPolyhedron> = optimal
        .par_iter()
        .map(|&i| payoff_polyhedron(game, &verdicts[i].strategy))
        .collect::<Result<_>>()?;
    let mut classes: Vec<EquivalenceClass> = Vec::new();
    let mut class_poly: Vec<usize> = Vec::new();
    for (k, &i) in optimal.iter().enumerate() {
        match class_poly
            .iter()
            .position(|&c| polys[c].same_vertices(&polys[k], VERTEX_MERGE_TOL))
        {
            Some(c) => classes[c].members.push(i),
            None => {
                classes.push(EquivalenceClass { representative: i, members: vec![i] });
                class_poly.push(k);
            }
        }
    }
    Ok(StrategyFront { player, grid, verdicts, classes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Improvement {
    pub strategy: MixedStrategy,
    pub certificate: MinimalityCertificate,
    /// Optimality LPs solved, including the final one.
    pub iterations: usize,
    pub converged: bool,
}

/// Follows improving strategies until the optimality LP certifies the
/// current one or `max_iter` LPs have been solved.
pub fn improve(game: &VectorPayoffGame, start: &MixedStrategy, max_iter: usize, tol: f64) -> Result<Improvement> {
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be positive".into()));
    }
    let mut current = start.clone();
    for it in 1..=max_iter {
        let cert = optimality_lp(game, &current, tol)?;
        match &cert.improving {
            None => {
                return Ok(Improvement { strategy: current, certificate: cert, iterations: it, converged: true })
            }
            Some(_) if it == max_iter => {
                return Ok(Improvement { strategy: current, certificate: cert, iterations: it, converged: false });
            }
            Some(next) => current = next.clone(),
        }
    }
    unreachable!("loop returns on its last iteration")
}

pub fn improve_to_minimal(game: &VectorPayoffGame, p0: &MixedStrategy, max_iter: usize) -> Result<Improvement> {
    if p0.owner() != Player::Row {
        return Err(Error::InvalidStrategy("improve_to_minimal expects a row strategy".into()));
    }
    improve(game, p0, max_iter, DEFAULT_TOL)
}

pub fn improve_to_maximal(game: &VectorPayoffGame, q0: &MixedStrategy, max_iter: usize) -> Result<Improvement> {
    if q0.owner() != Player::Col {
        return Err(Error::InvalidStrategy("improve_to_maximal expects a column strategy".into()));
    }
    improve(game, q0, max_iter, DEFAULT_TOL)
}

/// Strictly positive weight vector with unit sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarizationWeight(Vec<f64>);

impl ScalarizationWeight {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidParameter(format!("weights {weights:?} must be strictly positive")));
        }
        let total: f64 = weights.iter().sum();
        Ok(ScalarizationWeight(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        Self::new(vec![1.0; dim])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSolution {
    pub strategy: MixedStrategy,
    /// Value of the scalar game (loss of player I).
    pub value: f64,
}

/// `min_p max_j sum_i p_i a_ij` with an optimal `p`.
pub(crate) fn row_minimax(matrix: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    let m = matrix.len();
    let n = matrix.first().map_or(0, |r| r.len());
    if m == 0 || n == 0 {
        return Err(Error::InvalidGame("empty scalar matrix".into()));
    }
    let mut objective = vec![0.0; m + 1];
    objective[m] = 1.0;
    let mut lp = LinearProgram::new(Sense::Min, objective);
    lp.set_bounds(m, Bounds::FREE);
    let mut simplex = vec![1.0; m + 1];
    simplex[m] = 0.0;
    lp.add_eq(simplex, 1.0);
    for j in 0..n {
        let mut coeffs: Vec<f64> = matrix.iter().map(|row| row[j]).collect();
        coeffs.push(-1.0);
        lp.add_le(coeffs, 0.0);
    }
    let sol = solve_lp(&lp)?
        .optimal()
        .ok_or_else(|| Error::Inconsistent("scalar game LP without optimum".into()))?;
    Ok((sol.x[..m].to_vec(), sol.objective_value))
}

/// Optimal strategy of `player` in the scalar game with entries `alpha . g_ij`.
pub fn scalarized_game_solve(
    game: &VectorPayoffGame,
    alpha: &ScalarizationWeight,
    player: Player,
) -> Result<ScalarSolution> {
    let (weights, value) = match player {
        Player::Row => row_minimax(&game.scalarize(alpha.weights())?)?,
        Player::Col => {
            let (w, v) = row_minimax(&game.mirrored().scalarize(alpha.weights())?)?;
            (w, -v)
        }
    };
    let strategy = MixedStrategy::from_approximate(player, &weights, 1e-7)?;
    Ok(ScalarSolution { strategy, value })
}
