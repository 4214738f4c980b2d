#![allow(dead_code)]

pub mod checks;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vpgame::game::{MixedStrategy, PayoffVector, Player, VectorPayoffGame};
use vpgame::lp::{solve_lp, LinearProgram};

pub fn game(entries: &[&[&[f64]]]) -> VectorPayoffGame {
    VectorPayoffGame::new(entries.iter().map(|r| r.iter().map(|e| e.to_vec()).collect()).collect()).unwrap()
}

/// Two-row game with two columns and two criteria.
pub fn split_game() -> VectorPayoffGame {
    game(&[&[&[0.0, 0.0], &[4.0, 4.0]], &[&[3.0, 1.0], &[1.0, 3.0]]])
}

pub fn unit_game() -> VectorPayoffGame {
    game(&[&[&[1.0, 0.0], &[0.0, 0.0]], &[&[0.0, 1.0], &[1.0, 0.0]]])
}

pub fn tie_game() -> VectorPayoffGame {
    game(&[&[&[0.0, 0.0], &[0.0, 0.0]], &[&[1.0, -1.0], &[-1.0, 1.0]]])
}

pub fn safe_row_game() -> VectorPayoffGame {
    game(&[
        &[&[0.0, 0.0], &[3.0, -3.0]],
        &[&[-3.0, 3.0], &[0.0, 0.0]],
        &[&[1.0, 1.0], &[1.0, 1.0]],
    ])
}

pub fn zero_row() -> VectorPayoffGame {
    game(&[&[&[2.0, -1.0], &[-1.0, 2.0]], &[&[0.0, 0.0], &[0.0, 0.0]]])
}

pub fn three_by_three() -> VectorPayoffGame {
    game(&[
        &[&[5.0, 0.0], &[-1.0, -5.0], &[4.0, -4.0]],
        &[&[2.0, -2.0], &[2.0, -7.0], &[2.0, 2.0]],
        &[&[0.0, -6.0], &[6.0, -2.0], &[-2.0, 4.0]],
    ])
}

pub fn row(w: &[f64]) -> MixedStrategy {
    MixedStrategy::new(Player::Row, w.to_vec()).unwrap()
}

pub fn col(w: &[f64]) -> MixedStrategy {
    MixedStrategy::new(Player::Col, w.to_vec()).unwrap()
}

pub fn pv(v: &[f64]) -> PayoffVector {
    PayoffVector(v.to_vec())
}

pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integer payoffs in `[-10, 10]`.
pub fn random_game(rng: &mut ChaCha8Rng, rows: usize, cols: usize, dim: usize) -> VectorPayoffGame {
    let payoffs = (0..rows)
        .map(|_| (0..cols).map(|_| (0..dim).map(|_| rng.gen_range(-10i32..=10) as f64).collect()).collect())
        .collect();
    VectorPayoffGame::new(payoffs).unwrap()
}

pub fn random_strategy(rng: &mut ChaCha8Rng, owner: Player, len: usize) -> MixedStrategy {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..1.0f64) + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    MixedStrategy::from_approximate(owner, &raw.iter().map(|x| x / s).collect::<Vec<_>>(), 1e-9).unwrap()
}

/// Whether `y <= sum_j lambda_j g_j` (lower) or `y >= ...` (upper) for some
/// convex weights lambda, decided by an LP over lambda.
pub fn hull_orthant_membership(gens: &[PayoffVector], y: &[f64], lower: bool, tol: f64) -> bool {
    let n = gens.len();
    let mut lp = LinearProgram::feasibility(n);
    lp.add_eq(vec![1.0; n], 1.0);
    for k in 0..y.len() {
        let coeffs: Vec<f64> = gens.iter().map(|g| g[k]).collect();
        if lower {
            lp.add_ge(coeffs, y[k] - tol);
        } else {
            lp.add_le(coeffs, y[k] + tol);
        }
    }
    solve_lp(&lp).unwrap().optimal().is_some()
}

/// `min_p max_j p^T A e_j` by brute force over a fine grid (two rows only).
pub fn brute_minimax_two_rows(a: &[Vec<f64>], steps: usize) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    for s in 0..=steps {
        let p = s as f64 / steps as f64;
        let v = (0..a[0].len()).map(|j| p * a[0][j] + (1.0 - p) * a[1][j]).fold(f64::NEG_INFINITY, f64::max);
        if v < best.0 - 1e-12 {
            best = (v, p);
        }
    }
    best
}

pub fn on_grid(w: &[f64], n: u32) -> bool {
    w.iter().all(|x| ((x * n as f64) - (x * n as f64).round()).abs() < 1e-9)
}