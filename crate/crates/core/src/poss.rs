//! Security images `W_I`, `W_II` of Pareto optimal security strategies.
//!
//! `W_I = {y : exists p, y >= sum_i p_i g_ij for all j}` is computed by a
//! Benson-type outer approximation: starting from the coordinate and
//! diagonal supporting halfspaces, every vertex of the current outer set is
//! either certified as an image point or cut off by a supporting halfspace
//! obtained from the dual of the verification LP. `W_II` is computed as the
//! negated player-I image of the mirrored game.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{max_abs_diff, MixedStrategy, PayoffVector, Player, VectorPayoffGame};
use crate::lp::{check_feasibility, solve_lp, Bounds, LinearProgram, LpOutcome, Sense};
use crate::polyhedra::dd::extreme_rays;
use crate::polyhedra::{build_set, Halfspace, Orientation, OrientedPayoffPolyhedron};
use crate::strategy::{orientation_of, StrategyFront};
use crate::game::enumerate_simplex_grid;

/// Tolerance for certifying an outer vertex as an image point.
pub const VERTEX_TOL: f64 = 1e-7;
/// Upper bound on the number of cuts added by the outer approximation.
pub const ITERATION_CAP: usize = 10_000;

#[derive(Debug, Clone)]
pub struct SecurityImage {
    player: Player,
    polyhedron: OrientedPayoffPolyhedron,
    witnesses: Vec<MixedStrategy>,
    constraint_system: LinearProgram,
    cuts: usize,
}

impl SecurityImage {
    pub fn player(&self) -> Player {
        self.player
    }

    /// Upper set for player I, lower set for player II.
    pub fn orientation(&self) -> Orientation {
        self.polyhedron.orientation()
    }

    pub fn polyhedron(&self) -> &OrientedPayoffPolyhedron {
        &self.polyhedron
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        self.polyhedron.halfspaces()
    }

    pub fn vertices(&self) -> &[PayoffVector] {
        self.polyhedron.vertices()
    }

    /// Strategy attaining each vertex, aligned with `vertices()`.
    pub fn witnesses(&self) -> &[MixedStrategy] {
        &self.witnesses
    }

    /// `S_I` (or `S_II`) over the variables `(strategy, y)`.
    pub fn constraint_system(&self) -> &LinearProgram {
        &self.constraint_system
    }

    /// Cuts added by the outer approximation.
    pub fn cuts(&self) -> usize {
        self.cuts
    }
}

/// `S_I` for player I: `y >= sum_i p_i g_ij` for all `j`; mirrored for II.
fn constraint_system(game: &VectorPayoffGame, player: Player) -> LinearProgram {
    let own = game.strategy_len(player);
    let other = game.strategy_len(player.opponent());
    let dim = game.dim();
    let sign = orientation_of(player).sign();
    let mut lp = LinearProgram::feasibility(own + dim);
    for k in 0..dim {
        lp.set_bounds(own + k, Bounds::FREE);
    }
    let mut simplex = vec![0.0; own + dim];
    simplex[..own].iter_mut().for_each(|c| *c = 1.0);
    lp.add_eq(simplex, 1.0);
    for o in 0..other {
        for k in 0..dim {
            let mut coeffs: Vec<f64> = (0..own).map(|i| sign * game.entry_for(player, i, o)[k]).collect();
            coeffs.resize(own + dim, 0.0);
            coeffs[own + k] = -sign;
            lp.add_le(coeffs, 0.0);
        }
    }
    lp
}

/// `min w.y` over the player-I image, with a minimizing strategy.
fn weighted_security(game: &VectorPayoffGame, w: &[f64]) -> Result<(f64, Vec<f64>)> {
    let m = game.rows();
    let dim = game.dim();
    let mut lp = constraint_system(game, Player::Row);
    lp.sense = Sense::Min;
    lp.objective = vec![0.0; m + dim];
    lp.objective[m..].copy_from_slice(w);
    let sol = solve_lp(&lp)?
        .optimal()
        .ok_or_else(|| Error::Inconsistent("weighted security LP without optimum".into()))?;
    Ok((sol.objective_value, sol.x[..m].to_vec()))
}

struct Probe {
    z: f64,
    strategy: Vec<f64>,
    normal: Vec<f64>,
}

/// `min z` such that `y_j(p) <= v + z e` for all `j`.
fn probe(game: &VectorPayoffGame, v: &[f64]) -> Result<Probe> {
    let (m, n, dim) = (game.rows(), game.cols(), game.dim());
    let mut objective = vec![0.0; m + 1];
    objective[m] = 1.0;
    let mut lp = LinearProgram::new(Sense::Min, objective);
    lp.set_bounds(m, Bounds::FREE);
    let mut simplex = vec![1.0; m + 1];
    simplex[m] = 0.0;
    lp.add_eq(simplex, 1.0);
    for j in 0..n {
        for k in 0..dim {
            let mut coeffs: Vec<f64> = (0..m).map(|i| game.entry(i, j)[k]).collect();
            coeffs.push(-1.0);
            lp.add_le(coeffs, v[k]);
        }
    }
    let sol = match solve_lp(&lp)? {
        LpOutcome::Optimal(s) => s,
        _ => return Err(Error::Inconsistent("vertex probe LP without optimum".into())),
    };
    let mut normal = vec![0.0; dim];
    for j in 0..n {
        for k in 0..dim {
            normal[k] -= sol.duals[1 + j * dim + k];
        }
    }
    normal.iter_mut().for_each(|x| *x = x.max(0.0));
    let total: f64 = normal.iter().sum();
    if total <= 1e-12 {
        return Err(Error::Inconsistent(format!("degenerate cut normal at {v:?}")));
    }
    normal.iter_mut().for_each(|x| *x /= total);
    Ok(Probe { z: sol.objective_value, strategy: sol.x[..m].to_vec(), normal })
}

/// Vertices of `{y : a.y >= b}` for halfspaces whose normals span `R^K`.
fn upper_vertices(halfspaces: &[Halfspace], dim: usize) -> Result<Vec<Vec<f64>>> {
    let mut cons: Vec<Vec<f64>> = halfspaces
        .iter()
        .map(|h| {
            let mut row: Vec<f64> = h.normal.iter().map(|a| -a).collect();
            row.push(h.offset);
            row
        })
        .collect();
    let mut homog = vec![0.0; dim + 1];
    homog[dim] = -1.0;
    cons.push(homog);
    let rays = extreme_rays(&cons, dim + 1, 1e-9)?;
    Ok(rays
        .into_iter()
        .filter(|r| r.vector[dim] > 1e-12)
        .map(|r| r.vector[..dim].iter().map(|x| x / r.vector[dim]).collect())
        .collect())
}

fn push_unique(cuts: &mut Vec<Halfspace>, h: Halfspace) -> bool {
    let dup = cuts
        .iter()
        .any(|c| max_abs_diff(&c.normal, &h.normal) <= 1e-9 && (c.offset - h.offset).abs() <= 1e-9);
    if !dup {
        cuts.push(h);
    }
    !dup
}

/// Player-I image of `game` as vertices with witness strategies.
fn row_image(game: &VectorPayoffGame) -> Result<(Vec<PayoffVector>, Vec<Vec<f64>>, usize)> {
    let dim = game.dim();
    let mut cuts: Vec<Halfspace> = Vec::new();
    let mut directions: Vec<Vec<f64>> = (0..dim)
        .map(|k| (0..dim).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
        .collect();
    if dim > 1 {
        directions.push(vec![1.0 / dim as f64; dim]);
    }
    for w in directions {
        let (offset, _) = weighted_security(game, &w)?;
        push_unique(&mut cuts, Halfspace { normal: w, offset });
    }

    let mut added = 0usize;
    let mut certified: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    loop {
        let vertices = upper_vertices(&cuts, dim)?;
        let pending: Vec<&Vec<f64>> = vertices
            .iter()
            .filter(|v| !certified.iter().any(|(c, _)| max_abs_diff(c, v) <= 1e-9))
            .collect();
        let probes: Vec<Probe> = pending.par_iter().map(|v| probe(game, v)).collect::<Result<_>>()?;
        let mut fresh = false;
        let mut open = false;
        for (v, pr) in pending.iter().zip(probes) {
            if pr.z <= VERTEX_TOL {
                certified.push(((*v).clone(), pr.strategy));
                continue;
            }
            open = true;
            let (offset, _) = weighted_security(game, &pr.normal)?;
            if push_unique(&mut cuts, Halfspace { normal: pr.normal, offset }) {
                fresh = true;
                added += 1;
                if added > ITERATION_CAP {
                    return Err(Error::IterationCap(ITERATION_CAP));
                }
            }
        }
        if !open {
            let mut points = Vec::with_capacity(vertices.len());
            let mut witnesses = Vec::with_capacity(vertices.len());
            for v in &vertices {
                let (_, p) = certified
                    .iter()
                    .find(|(c, _)| max_abs_diff(c, v) <= 1e-9)
                    .ok_or_else(|| Error::Inconsistent("uncertified image vertex".into()))?;
                points.push(PayoffVector(v.clone()));
                witnesses.push(p.clone());
            }
            return Ok((points, witnesses, added));
        }
        if !fresh {
            return Err(Error::Inconsistent("outer approximation stalled without new cuts".into()));
        }
    }
}

/// `W_I` (player I, an upper set) or `W_II` (player II, a lower set).
pub fn compute_security_image(game: &VectorPayoffGame, player: Player) -> Result<SecurityImage> {
    let (points, raw, cuts) = match player {
        Player::Row => row_image(game)?,
        Player::Col => {
            let (pts, w, c) = row_image(&game.mirrored())?;
            let pts = pts.into_iter().map(|p| PayoffVector(p.iter().map(|x| -x).collect())).collect();
            (pts, w, c)
        }
    };
    let orientation = orientation_of(player).flip();
    let polyhedron = build_set(orientation, &points)?;
    let mut witnesses = Vec::with_capacity(polyhedron.vertices().len());
    for v in polyhedron.vertices() {
        let idx = points
            .iter()
            .position(|p| max_abs_diff(p, v) <= 1e-9)
            .ok_or_else(|| Error::Inconsistent("image vertex without witness".into()))?;
        witnesses.push(MixedStrategy::from_approximate(player, &raw[idx], 1e-7)?);
    }
    Ok(SecurityImage {
        player,
        polyhedron,
        witnesses,
        constraint_system: constraint_system(game, player),
        cuts,
    })
}

/// Largest total improvement `e.t` with `w - t` (player I) or `w + t`
/// (player II) still in the image.
fn frontier_gap(image: &SecurityImage, w: &[f64]) -> Result<f64> {
    let dim = w.len();
    let mut lp = LinearProgram::new(Sense::Max, vec![1.0; dim]);
    for h in image.halfspaces() {
        let slack = h.slack(image.orientation(), w).max(0.0);
        lp.add_le(h.normal.clone(), slack);
    }
    match solve_lp(&lp)? {
        LpOutcome::Optimal(s) => Ok(s.objective_value),
        _ => Err(Error::Inconsistent("frontier LP without optimum".into())),
    }
}

/// Grid strategies whose security point lies on the Pareto frontier of `image`.
pub fn poss_strategies_in(
    game: &VectorPayoffGame,
    image: &SecurityImage,
    divisions: u32,
) -> Result<Vec<MixedStrategy>> {
    let player = image.player();
    let grid = enumerate_simplex_grid(game.strategy_len(player), divisions)?;
    let flags: Vec<bool> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let s = grid.strategy(i, player);
            let w = game.componentwise_security_point(&s)?;
            Ok(frontier_gap(image, &w)? <= VERTEX_TOL)
        })
        .collect::<Result<_>>()?;
    Ok((0..grid.len()).filter(|&i| flags[i]).map(|i| grid.strategy(i, player)).collect())
}

/// POSS of `player` on the grid with step `1/divisions`.
pub fn poss_strategies(game: &VectorPayoffGame, player: Player, divisions: u32) -> Result<Vec<MixedStrategy>> {
    let image = compute_security_image(game, player)?;
    poss_strategies_in(game, &image, divisions)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapViolation {
    pub strategy: MixedStrategy,
    /// Coordinate of the shift direction.
    pub direction: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub player: Player,
    pub checked: usize,
    pub violations: Vec<GapViolation>,
}

/// Whether `V(s)` meets the image shifted by `eps` along unit vector `k`
/// (away from the payoff set).
pub fn gap_violated(
    game: &VectorPayoffGame,
    s: &MixedStrategy,
    image: &SecurityImage,
    k: usize,
    eps: f64,
) -> Result<bool> {
    let dim = game.dim();
    let gens = game.payoff_generators(s)?;
    let other = gens.len();
    let sign = orientation_of(s.owner()).sign();
    let mut lp = LinearProgram::feasibility(dim + other);
    for i in 0..dim {
        lp.set_bounds(i, Bounds::FREE);
    }
    let mut simplex = vec![0.0; dim + other];
    simplex[dim..].iter_mut().for_each(|c| *c = 1.0);
    lp.add_eq(simplex, 1.0);
    for i in 0..dim {
        let mut coeffs = vec![0.0; dim + other];
        coeffs[i] = sign;
        for (o, g) in gens.iter().enumerate() {
            coeffs[dim + o] = -sign * g[i];
        }
        lp.add_le(coeffs, 0.0);
    }
    for h in image.halfspaces() {
        let mut coeffs: Vec<f64> = h.normal.iter().map(|a| sign * a).collect();
        coeffs.resize(dim + other, 0.0);
        lp.add_ge(coeffs, sign * h.offset + eps * h.normal[k]);
    }
    Ok(check_feasibility(&lp)?.is_feasible())
}

/// Checks that no optimal strategy of `front` reaches strictly beyond the
/// security image.
pub fn verify_gap(
    game: &VectorPayoffGame,
    front: &StrategyFront,
    image: &SecurityImage,
    eps: f64,
) -> Result<GapReport> {
    if front.player != image.player() {
        return Err(Error::InvalidParameter("front and image belong to different players".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("gap shift must be positive, got {eps}")));
    }
    let optimal = front.optimal();
    let dim = game.dim();
    let found: Vec<Vec<GapViolation>> = optimal
        .par_iter()
        .map(|s| {
            let mut v = Vec::new();
            for k in 0..dim {
                if gap_violated(game, s, image, k, eps)? {
                    v.push(GapViolation { strategy: (*s).clone(), direction: k });
                }
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    Ok(GapReport {
        player: front.player,
        checked: optimal.len(),
        violations: found.into_iter().flatten().collect(),
    })
}
