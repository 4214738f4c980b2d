//! Payoff polyhedra `co(points) - R^K_+` (lower sets) and `co(points) + R^K_+`
//! (upper sets) in both halfspace and vertex form.

pub(crate) mod dd;
pub mod pareto;

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{dot, max_abs_diff, PayoffVector};

pub use pareto::{
    dominates, pareto_indices, pareto_max_points, pareto_min_points, strictly_dominates,
    weak_pareto_indices, weak_pareto_points, ParetoSense,
};

/// Tolerance for membership and containment tests.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Tolerance for a halfspace to count as active at a point.
pub const ACTIVE_TOL: f64 = 1e-7;
/// Points closer than this (infinity norm) are identified.
pub const VERTEX_MERGE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// Recession cone `-R^K_+`; halfspaces read `a.y <= b`.
    #[serde(rename = "LowerSet")]
    Lower,
    /// Recession cone `+R^K_+`; halfspaces read `a.y >= b`.
    #[serde(rename = "UpperSet")]
    Upper,
}

impl Orientation {
    /// `+1` for lower sets, `-1` for upper sets.
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Lower => 1.0,
            Orientation::Upper => -1.0,
        }
    }

    pub fn flip(self) -> Orientation {
        match self {
            Orientation::Lower => Orientation::Upper,
            Orientation::Upper => Orientation::Lower,
        }
    }

    /// Direction in which the extreme points of the set are efficient.
    pub fn pareto_sense(self) -> ParetoSense {
        match self {
            Orientation::Lower => ParetoSense::Max,
            Orientation::Upper => ParetoSense::Min,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Orientation::Lower => f.write_str("LowerSet"),
            Orientation::Upper => f.write_str("UpperSet"),
        }
    }
}

/// `normal . y <= offset` (lower set) or `normal . y >= offset` (upper set),
/// with a nonnegative normal summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    /// Signed slack of `y`; nonnegative iff `y` satisfies the constraint.
    pub fn slack(&self, orientation: Orientation, y: &[f64]) -> f64 {
        orientation.sign() * (self.offset - dot(&self.normal, y))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientedPayoffPolyhedron {
    orientation: Orientation,
    dim: usize,
    generators: Vec<PayoffVector>,
    halfspaces: Vec<Halfspace>,
    vertices: Vec<PayoffVector>,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn check_points(points: &[PayoffVector]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    let dim = first.len();
    if dim == 0 {
        return Err(Error::DimensionMismatch("points must have at least one component".into()));
    }
    for p in points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "point of length {} in a set of dimension {dim}",
                p.len()
            )));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::DimensionMismatch("non-finite coordinate".into()));
        }
    }
    Ok(dim)
}

fn merge_points(points: &[PayoffVector]) -> Vec<PayoffVector> {
    let mut out: Vec<PayoffVector> = Vec::new();
    for p in points {
        if !out.iter().any(|u| max_abs_diff(u, p) <= VERTEX_MERGE_TOL) {
            out.push(p.clone());
        }
    }
    out
}

fn rank_of(rows: &[&[f64]], dim: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]).rank(1e-9)
}

/// Facets of `co(points) - R^K_+` from the cone of valid inequalities
/// `{(a, b) : a >= 0, a.x_j <= b}`.
fn lower_facets(points: &[PayoffVector], dim: usize) -> Result<Vec<Halfspace>> {
    let mut cons: Vec<Vec<f64>> = Vec::with_capacity(dim + points.len());
    for k in 0..dim {
        let mut row = vec![0.0; dim + 1];
        row[k] = -1.0;
        cons.push(row);
    }
    for p in points {
        let mut row = p.0.clone();
        row.push(-1.0);
        cons.push(row);
    }
    let rays = dd::extreme_rays(&cons, dim + 1, 1e-9)?;
    let mut facets: Vec<Halfspace> = Vec::new();
    for r in rays {
        let mut normal: Vec<f64> = r.vector[..dim].iter().map(|x| x.max(0.0)).collect();
        let total: f64 = normal.iter().sum();
        if total <= 1e-9 {
            continue; // the trivial ray (0, 1)
        }
        for x in normal.iter_mut() {
            *x /= total;
            if *x < 1e-13 {
                *x = 0.0;
            }
        }
        let offset = r.vector[dim] / total;
        let h = Halfspace { normal, offset };
        let dup = facets.iter().any(|f| {
            max_abs_diff(&f.normal, &h.normal) <= 1e-9 && (f.offset - h.offset).abs() <= 1e-9 * (1.0 + h.offset.abs())
        });
        if !dup {
            facets.push(h);
        }
    }
    if facets.len() < dim {
        return Err(Error::DoubleDescription(format!(
            "found {} facets, expected at least {dim}",
            facets.len()
        )));
    }
    facets.sort_by(|a, b| lex_cmp(&a.normal, &b.normal).then(a.offset.total_cmp(&b.offset)));
    Ok(facets)
}

impl OrientedPayoffPolyhedron {
    fn assemble(orientation: Orientation, points: &[PayoffVector]) -> Result<Self> {
        let dim = check_points(points)?;
        let s = orientation.sign();
        // work on the lower set of `s * points` and map back
        let flipped: Vec<PayoffVector> = points
            .iter()
            .map(|p| PayoffVector(p.iter().map(|x| s * x).collect()))
            .collect();
        let facets = lower_facets(&flipped, dim)?;
        let mut halfspaces: Vec<Halfspace> = facets
            .into_iter()
            .map(|h| Halfspace { normal: h.normal, offset: s * h.offset })
            .collect();
        halfspaces.sort_by(|a, b| lex_cmp(&a.normal, &b.normal).then(a.offset.total_cmp(&b.offset)));

        let mut vertices: Vec<PayoffVector> = merge_points(points)
            .into_iter()
            .filter(|p| {
                let active: Vec<&[f64]> = halfspaces
                    .iter()
                    .filter(|h| h.slack(orientation, p).abs() <= ACTIVE_TOL)
                    .map(|h| h.normal.as_slice())
                    .collect();
                rank_of(&active, dim) == dim
            })
            .collect();
        vertices.sort_by(|a, b| lex_cmp(a, b));
        if vertices.is_empty() {
            return Err(Error::Inconsistent("polyhedron without vertices".into()));
        }
        Ok(OrientedPayoffPolyhedron {
            orientation,
            dim,
            generators: points.to_vec(),
            halfspaces,
            vertices,
        })
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[PayoffVector] {
        &self.generators
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[PayoffVector] {
        &self.vertices
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "point of length {} for a polyhedron of dimension {}",
                y.len(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn contains_point(&self, y: &[f64]) -> Result<bool> {
        self.contains_point_tol(y, MEMBERSHIP_TOL)
    }

    pub fn contains_point_tol(&self, y: &[f64], tol: f64) -> Result<bool> {
        self.check_dim(y)?;
        Ok(self.halfspaces.iter().all(|h| h.slack(self.orientation, y) >= -tol))
    }

    /// `self ⊆ other`, decided on generators against the halfspaces of `other`.
    pub fn is_subset_of(&self, other: &Self) -> Result<bool> {
        self.is_subset_of_tol(other, MEMBERSHIP_TOL)
    }

    pub fn is_subset_of_tol(&self, other: &Self, tol: f64) -> Result<bool> {
        if self.orientation != other.orientation {
            return Err(Error::OrientationMismatch);
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "polyhedra of dimension {} and {}",
                self.dim, other.dim
            )));
        }
        Ok(self
            .generators
            .iter()
            .all(|g| other.halfspaces.iter().all(|h| h.slack(other.orientation, g) >= -tol)))
    }

    /// Both polyhedra have the same vertex set (within `tol`).
    pub fn same_vertices(&self, other: &Self, tol: f64) -> bool {
        self.orientation == other.orientation
            && self.vertices.len() == other.vertices.len()
            && self
                .vertices
                .iter()
                .all(|v| other.vertices.iter().any(|u| max_abs_diff(u, v) <= tol))
    }

    /// `sup w.y` over a lower set, `inf w.y` over an upper set.
    pub fn support_value(&self, w: &[f64]) -> Result<f64> {
        self.check_dim(w)?;
        if w.iter().any(|x| *x < 0.0) {
            return Err(Error::UnboundedDirection(w.to_vec()));
        }
        let values = self.generators.iter().map(|g| g.dot(w));
        Ok(match self.orientation {
            Orientation::Lower => values.fold(f64::NEG_INFINITY, f64::max),
            Orientation::Upper => values.fold(f64::INFINITY, f64::min),
        })
    }

    /// Indices of halfspaces with `|slack| <= tol` at `y`.
    pub fn active_halfspaces(&self, y: &[f64], tol: f64) -> Vec<usize> {
        self.halfspaces
            .iter()
            .enumerate()
            .filter(|(_, h)| h.slack(self.orientation, y).abs() <= tol)
            .map(|(i, _)| i)
            .collect()
    }

    /// A hyperplane touching the polyhedron only at `vertex`: the normalized
    /// sum of the facet normals active there.
    pub fn exposing_normal_at_vertex(&self, vertex: &[f64]) -> Result<Halfspace> {
        self.check_dim(vertex)?;
        let v = self
            .vertices
            .iter()
            .find(|u| max_abs_diff(u, vertex) <= VERTEX_MERGE_TOL)
            .ok_or_else(|| Error::VertexNotFound(vertex.to_vec()))?;
        let active = self.active_halfspaces(v, ACTIVE_TOL);
        let mut c = vec![0.0; self.dim];
        for &i in &active {
            for (ck, ak) in c.iter_mut().zip(&self.halfspaces[i].normal) {
                *ck += ak;
            }
        }
        let total: f64 = c.iter().sum();
        if total <= 0.0 {
            return Err(Error::ExposureFailed {
                vertex: v.0.clone(),
                detail: "no active facet".into(),
            });
        }
        c.iter_mut().for_each(|x| *x /= total);
        if let Some(k) = c.iter().position(|x| *x <= 1e-12) {
            return Err(Error::ExposureFailed {
                vertex: v.0.clone(),
                detail: format!("normal component {k} is not positive ({} active facets)", active.len()),
            });
        }
        let gamma = dot(&c, v);
        let h = Halfspace { normal: c, offset: gamma };
        for u in &self.vertices {
            if max_abs_diff(u, v) <= VERTEX_MERGE_TOL {
                continue;
            }
            if h.slack(self.orientation, u) <= 1e-9 {
                return Err(Error::ExposureFailed {
                    vertex: v.0.clone(),
                    detail: format!("vertex {:?} is not strictly separated", u.0),
                });
            }
        }
        Ok(h)
    }
}

/// `co(points) - R^K_+`.
pub fn build_lower_set(points: &[PayoffVector]) -> Result<OrientedPayoffPolyhedron> {
    OrientedPayoffPolyhedron::assemble(Orientation::Lower, points)
}

/// `co(points) + R^K_+`.
pub fn build_upper_set(points: &[PayoffVector]) -> Result<OrientedPayoffPolyhedron> {
    OrientedPayoffPolyhedron::assemble(Orientation::Upper, points)
}

pub fn build_set(orientation: Orientation, points: &[PayoffVector]) -> Result<OrientedPayoffPolyhedron> {
    OrientedPayoffPolyhedron::assemble(orientation, points)
}

/// Set inclusion `a ⊆ b` for polyhedra of the same orientation.
pub fn poly_subset(a: &OrientedPayoffPolyhedron, b: &OrientedPayoffPolyhedron) -> Result<bool> {
    a.is_subset_of(b)
}
