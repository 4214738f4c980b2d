//! Double description: extreme rays of a pointed cone `{x : g.x <= 0}`.

use fixedbitset::FixedBitSet;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct Ray {
    pub vector: Vec<f64>,
    /// Constraints (indices into the input) tight at this ray.
    pub zeros: FixedBitSet,
}

fn normalize(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale > 0.0 {
        for x in v.iter_mut() {
            *x /= scale;
            if x.abs() < 1e-14 {
                *x = 0.0;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Extreme rays of `{x in R^d : g.x <= 0 for every g in constraints}`.
///
/// The cone must be pointed, i.e. the constraint rows must span `R^d`.
/// Constraints are inserted in order after an initial simplicial cone built
/// from the first `d` linearly independent rows.
pub(crate) fn extreme_rays(constraints: &[Vec<f64>], dim: usize, zero_tol: f64) -> Result<Vec<Ray>> {
    let count = constraints.len();
    let scales: Vec<f64> = constraints
        .iter()
        .map(|g| g.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0))
        .collect();

    // greedy choice of d independent rows
    let mut chosen: Vec<usize> = Vec::with_capacity(dim);
    for (idx, g) in constraints.iter().enumerate() {
        if chosen.len() == dim {
            break;
        }
        let rows = chosen.len() + 1;
        let stacked = DMatrix::from_fn(rows, dim, |i, j| {
            let row = if i < chosen.len() { &constraints[chosen[i]] } else { g };
            row[j] / if i < chosen.len() { scales[chosen[i]] } else { scales[idx] }
        });
        if stacked.rank(1e-9) == rows {
            chosen.push(idx);
        }
    }
    if chosen.len() < dim {
        return Err(Error::DoubleDescription(format!(
            "cone is not pointed: constraint rank {} < {dim}",
            chosen.len()
        )));
    }

    let m = DMatrix::from_fn(dim, dim, |i, j| constraints[chosen[i]][j]);
    let inv = m
        .try_inverse()
        .ok_or_else(|| Error::DoubleDescription("initial constraint block is singular".into()))?;
    let mut rays: Vec<Ray> = (0..dim)
        .map(|k| {
            let mut v: Vec<f64> = (0..dim).map(|i| -inv[(i, k)]).collect();
            normalize(&mut v);
            let mut zeros = FixedBitSet::with_capacity(count);
            for (i, &c) in chosen.iter().enumerate() {
                if i != k {
                    zeros.insert(c);
                }
            }
            Ray { vector: v, zeros }
        })
        .collect();

    let mut done = FixedBitSet::with_capacity(count);
    for &c in &chosen {
        done.insert(c);
    }

    for idx in 0..count {
        if done.contains(idx) {
            continue;
        }
        done.insert(idx);
        let g = &constraints[idx];
        let tol = zero_tol * scales[idx];
        let values: Vec<f64> = rays.iter().map(|r| dot(g, &r.vector)).collect();
        let plus: Vec<usize> = (0..rays.len()).filter(|&i| values[i] > tol).collect();
        if plus.is_empty() {
            for (r, &v) in rays.iter_mut().zip(&values) {
                if v.abs() <= tol {
                    r.zeros.insert(idx);
                }
            }
            continue;
        }
        let minus: Vec<usize> = (0..rays.len()).filter(|&i| values[i] < -tol).collect();

        let mut next: Vec<Ray> = Vec::with_capacity(rays.len());
        for (i, r) in rays.iter().enumerate() {
            if values[i] <= tol {
                let mut kept = r.clone();
                if values[i].abs() <= tol {
                    kept.zeros.insert(idx);
                }
                next.push(kept);
            }
        }
        for &p in &plus {
            for &n in &minus {
                let mut common = rays[p].zeros.clone();
                common.intersect_with(&rays[n].zeros);
                if common.count_ones(..) + 2 < dim {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(o, r)| o != p && o != n && common.is_subset(&r.zeros));
                if blocked {
                    continue;
                }
                let (fp, fn_) = (values[p], values[n]);
                let mut v: Vec<f64> = rays[n]
                    .vector
                    .iter()
                    .zip(&rays[p].vector)
                    .map(|(xn, xp)| fp * xn - fn_ * xp)
                    .collect();
                normalize(&mut v);
                common.insert(idx);
                next.push(Ray { vector: v, zeros: common });
            }
        }
        rays = next;
    }

    // merge numerical duplicates
    let mut unique: Vec<Ray> = Vec::with_capacity(rays.len());
    for r in rays {
        if let Some(u) = unique.iter_mut().find(|u| {
            u.vector
                .iter()
                .zip(&r.vector)
                .all(|(a, b)| (a - b).abs() <= 1e-9)
        }) {
            u.zeros.union_with(&r.zeros);
        } else {
            unique.push(r);
        }
    }
    Ok(unique)
}
