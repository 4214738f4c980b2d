//! Seeded property checks shared by the proptest suite and the acceptance
//! target. Each returns `Err` with a description of the first violation.

use rand::Rng;

use vpgame::equilibria::{classify_pair, Classification};
use vpgame::game::{enumerate_simplex_grid, PayoffVector, Player};
use vpgame::lp::{solve_lp, LinearProgram, LpOutcome, Sense};
use vpgame::polyhedra::{build_set, poly_subset, Orientation};
use vpgame::strategy::{classify_grid, payoff_polyhedron, scalarized_game_solve, ClassifyOptions, ScalarizationWeight};

use super::{hull_orthant_membership, random_game, rng};

type Check = Result<usize, String>;

/// Halfspace membership against the convex-combination LP. Returns the
/// number of decided queries.
pub fn dd_membership(seed: u64, queries: usize) -> Check {
    let mut r = rng(seed);
    let dim = r.gen_range(1..=3);
    let n = r.gen_range(1..=6);
    let integral = r.gen_bool(0.5);
    let gens: Vec<PayoffVector> = (0..n)
        .map(|_| {
            PayoffVector(
                (0..dim)
                    .map(|_| if integral { r.gen_range(-3i32..=3) as f64 } else { r.gen_range(-5.0..5.0) })
                    .collect(),
            )
        })
        .collect();
    let orientation = if r.gen_bool(0.5) { Orientation::Lower } else { Orientation::Upper };
    let poly = build_set(orientation, &gens).map_err(|e| e.to_string())?;
    let mut decided = 0;
    for _ in 0..queries {
        let lambda: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..1.0)).collect();
        let total: f64 = lambda.iter().sum();
        let y: Vec<f64> = (0..dim)
            .map(|k| gens.iter().zip(&lambda).map(|(g, l)| g[k] * l / total).sum::<f64>() + r.gen_range(-1.5..1.5))
            .collect();
        let margin = poly.halfspaces().iter().map(|h| h.slack(orientation, &y)).fold(f64::INFINITY, f64::min);
        if margin.abs() < 1e-7 {
            continue;
        }
        decided += 1;
        let got = poly.contains_point(&y).map_err(|e| e.to_string())?;
        let want = hull_orthant_membership(&gens, &y, orientation == Orientation::Lower, 1e-9);
        if got != want {
            return Err(format!("{orientation:?} set of {gens:?}: membership of {y:?} is {got}, oracle says {want}"));
        }
    }
    Ok(decided)
}

/// Primal `max c.x, Ax <= b, x >= 0` against the dual `min b.y, A^T y >= c,
/// y >= 0` assembled here; also checks the reported shadow prices.
pub fn lp_duality(seed: u64) -> Check {
    let mut r = rng(seed);
    let m = r.gen_range(1..=5);
    let n = r.gen_range(1..=5);
    let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| r.gen_range(0.1..2.0)).collect()).collect();
    let b: Vec<f64> = (0..m).map(|_| r.gen_range(0.5..5.0)).collect();
    let c: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..2.0)).collect();

    let mut primal = LinearProgram::new(Sense::Max, c.clone());
    for (row, rhs) in a.iter().zip(&b) {
        primal.add_le(row.clone(), *rhs);
    }
    let mut dual = LinearProgram::new(Sense::Min, b.clone());
    for j in 0..n {
        dual.add_ge(a.iter().map(|row| row[j]).collect(), c[j]);
    }
    let (p, d) = match (solve_lp(&primal), solve_lp(&dual)) {
        (Ok(LpOutcome::Optimal(p)), Ok(LpOutcome::Optimal(d))) => (p, d),
        other => return Err(format!("expected two optima, got {other:?}")),
    };
    let gap = (p.objective_value - d.objective_value).abs();
    if gap > 1e-7 * (1.0 + p.objective_value.abs()) {
        return Err(format!("duality gap {gap}: primal {} dual {}", p.objective_value, d.objective_value));
    }
    let priced: f64 = p.duals.iter().zip(&b).map(|(y, rhs)| y * rhs).sum();
    if (priced - p.objective_value).abs() > 1e-7 * (1.0 + p.objective_value.abs()) || p.duals.iter().any(|y| *y < -1e-9) {
        return Err(format!("shadow prices {:?} do not price the optimum {}", p.duals, p.objective_value));
    }
    Ok(1)
}

/// For one criterion the grid classification must pick exactly the grid
/// strategies that attain the scalar game value.
pub fn k1_reduction(seed: u64) -> Check {
    let mut r = rng(seed);
    let (m, n) = (r.gen_range(2..=3), r.gen_range(2..=3));
    let g = random_game(&mut r, m, n, 1);
    let alpha = ScalarizationWeight::new(vec![1.0]).unwrap();
    let value = scalarized_game_solve(&g, &alpha, Player::Row).map_err(|e| e.to_string())?.value;
    let mut decided = 0;
    for player in [Player::Row, Player::Col] {
        let front = classify_grid(&g, player, 6, &ClassifyOptions::default()).map_err(|e| e.to_string())?;
        for v in &front.verdicts {
            let gens = g.payoff_generators(&v.strategy).map_err(|e| e.to_string())?;
            // distance of the worst case from the value, positive when worse
            let excess = match player {
                Player::Row => gens.iter().map(|y| y[0]).fold(f64::NEG_INFINITY, f64::max) - value,
                Player::Col => value - gens.iter().map(|y| y[0]).fold(f64::INFINITY, f64::min),
            };
            if excess > 1e-9 && excess < 1e-6 {
                continue;
            }
            decided += 1;
            if v.optimal != (excess <= 1e-9) {
                return Err(format!(
                    "player {player} strategy {:?}: optimal = {}, excess over value {value} is {excess}",
                    v.strategy.weights(),
                    v.optimal
                ));
            }
        }
    }
    Ok(decided)
}

/// If every column payoff of `p'` is below that of `p`, then `V_I(p')` lies in `V_I(p)`.
pub fn monotonicity(seed: u64) -> Check {
    let mut r = rng(seed);
    let g = random_game(&mut r, 3, 3, 2);
    let ps = enumerate_simplex_grid(3, 4).unwrap().strategies(Player::Row);
    let gens: Vec<Vec<PayoffVector>> = ps.iter().map(|p| g.row_payoff_generators(p).unwrap()).collect();
    let polys: Vec<_> = ps.iter().map(|p| payoff_polyhedron(&g, p).unwrap()).collect();
    let mut checked = 0;
    for a in 0..ps.len() {
        for b in 0..ps.len() {
            let below = gens[a].iter().zip(&gens[b]).all(|(ya, yb)| ya.iter().zip(yb.iter()).all(|(x, y)| x <= y));
            if !below {
                continue;
            }
            checked += 1;
            if !poly_subset(&polys[a], &polys[b]).map_err(|e| e.to_string())? {
                return Err(format!("{:?} below {:?} but V_I not contained", ps[a].weights(), ps[b].weights()));
            }
        }
    }
    Ok(checked)
}

/// Flags of classified pairs respect the equilibrium hierarchy.
pub fn hierarchy(seed: u64) -> Check {
    let mut r = rng(seed);
    let g = random_game(&mut r, 3, 3, 2);
    let ps = enumerate_simplex_grid(3, 4).unwrap().strategies(Player::Row);
    let qs = enumerate_simplex_grid(3, 4).unwrap().strategies(Player::Col);
    let pairs = 8;
    for _ in 0..pairs {
        let p = &ps[r.gen_range(0..ps.len())];
        let q = &qs[r.gen_range(0..qs.len())];
        let rec = classify_pair(&g, p, q).map_err(|e| e.to_string())?;
        let consistent = rec.classification == Classification::from_flags(rec.p_minimal, rec.q_maximal, rec.shapley, rec.strong);
        let strong_ok = !rec.strong || rec.shapley;
        let top_ok = rec.classification != Classification::StrongSetShapley || (rec.p_minimal && rec.q_maximal && rec.strong);
        let lp_ok = rec.strong_value.is_some() == rec.shapley && rec.strong_value.map_or(true, |v| v >= -1e-8 && v.is_finite());
        if !(consistent && strong_ok && top_ok && lp_ok) {
            return Err(format!("inconsistent record for {:?}, {:?}: {rec:?}", p.weights(), q.weights()));
        }
    }
    Ok(pairs)
}
