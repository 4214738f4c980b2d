//! Nondominated filters for finite point sets.
//!
//! Points are sorted lexicographically so that every potential dominator of
//! a point is examined before it; each point is then compared against the
//! front accepted so far only. Output preserves the input order.

use std::cmp::Ordering;

use crate::game::PayoffVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParetoSense {
    /// Keep points not dominated from above (`Max A`).
    Max,
    /// Keep points not dominated from below (`Min A`).
    Min,
}

/// `a` dominates `b` in the direction of `sense`: at least as good in every
/// component and better in one, all up to `tol`.
pub fn dominates(a: &[f64], b: &[f64], sense: ParetoSense, tol: f64) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        let (better, worse) = match sense {
            ParetoSense::Max => (x - y, y - x),
            ParetoSense::Min => (y - x, x - y),
        };
        if worse > tol {
            return false;
        }
        if better > tol {
            strictly = true;
        }
    }
    strictly
}

/// `a` is better than `b` in every component by more than `tol`.
pub fn strictly_dominates(a: &[f64], b: &[f64], sense: ParetoSense, tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| match sense {
        ParetoSense::Max => x - y > tol,
        ParetoSense::Min => y - x > tol,
    })
}

fn filter_indices<F>(points: &[PayoffVector], sense: ParetoSense, beats: F) -> Vec<usize>
where
    F: Fn(&[f64], &[f64]) -> bool,
{
    let mut order: Vec<usize> = (0..points.len()).collect();
    let lex = |a: &PayoffVector, b: &PayoffVector| -> Ordering {
        for (x, y) in a.iter().zip(b.iter()) {
            match x.total_cmp(y) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    };
    // dominators come first: descending for Max, ascending for Min
    order.sort_by(|&i, &j| match sense {
        ParetoSense::Max => lex(&points[j], &points[i]),
        ParetoSense::Min => lex(&points[i], &points[j]),
    });
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        if !front.iter().any(|&f| beats(&points[f], &points[i])) {
            front.push(i);
        }
    }
    front.sort_unstable();
    front
}

/// Indices of points not dominated (up to `tol`) by another listed point.
pub fn pareto_indices(points: &[PayoffVector], sense: ParetoSense, tol: f64) -> Vec<usize> {
    filter_indices(points, sense, |a, b| dominates(a, b, sense, tol))
}

/// Indices of points not strictly dominated in every component.
pub fn weak_pareto_indices(points: &[PayoffVector], sense: ParetoSense, tol: f64) -> Vec<usize> {
    filter_indices(points, sense, |a, b| strictly_dominates(a, b, sense, tol))
}

/// `Max A` of a finite set.
pub fn pareto_max_points(points: &[PayoffVector]) -> Vec<PayoffVector> {
    pareto_indices(points, ParetoSense::Max, 0.0)
        .into_iter()
        .map(|i| points[i].clone())
        .collect()
}

/// `Min A` of a finite set.
pub fn pareto_min_points(points: &[PayoffVector]) -> Vec<PayoffVector> {
    pareto_indices(points, ParetoSense::Min, 0.0)
        .into_iter()
        .map(|i| points[i].clone())
        .collect()
}

/// Weakly maximal (`Max`) or weakly minimal (`Min`) points.
pub fn weak_pareto_points(points: &[PayoffVector], sense: ParetoSense) -> Vec<PayoffVector> {
    weak_pareto_indices(points, sense, 0.0)
        .into_iter()
        .map(|i| points[i].clone())
        .collect()
}
