//! Serializable views of solver results. Reals are written in scientific
//! notation with 17 significant digits so that reports are byte-stable and
//! round-trip exactly.

use serde::ser::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::equilibria::{Classification, EquilibriumRecord};
use crate::game::{MixedStrategy, PayoffVector, Player};
use crate::polyhedra::{Orientation, OrientedPayoffPolyhedron};
use crate::poss::{GapReport, SecurityImage};
use crate::strategy::{MinimalityCertificate, StrategyFront};

/// A real written as `d.dddddddddddddddde±x`; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real17(pub f64);

impl Real17 {
    pub fn text(self) -> String {
        let x = if self.0 == 0.0 { 0.0 } else { self.0 };
        format!("{x:.16e}")
    }
}

impl Serialize for Real17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(self.text()).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

pub fn reals(v: &[f64]) -> Vec<Real17> {
    v.iter().map(|x| Real17(*x)).collect()
}

/// Closest fraction to `x` with denominator at most `max_den`.
pub fn rational_approximation(x: f64, max_den: u64) -> (i64, u64) {
    if !x.is_finite() || max_den == 0 {
        return (0, 1);
    }
    let negative = x < 0.0;
    let target = x.abs();
    // convergents h/k of the continued fraction of `target`
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut rest = target;
    let mut best = (target.round() as u64, 1u64);
    for _ in 0..64 {
        let a = rest.floor();
        if a > u32::MAX as f64 {
            break;
        }
        let a = a as u64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > max_den {
            // best semiconvergent within the bound
            let t = (max_den - k0) / k1;
            let (hs, ks) = (t * h1 + h0, t * k1 + k0);
            let err = |h: u64, k: u64| (h as f64 / k as f64 - target).abs();
            best = if ks > 0 && err(hs, ks) < err(h1, k1) { (hs, ks) } else { (h1, k1) };
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        best = (h1, k1);
        let frac = rest - a as f64;
        if frac < 1e-12 || (h1 as f64 / k1 as f64 - target).abs() < 1e-15 {
            break;
        }
        rest = 1.0 / frac;
    }
    let num = best.0 as i64;
    (if negative { -num } else { num }, best.1)
}

pub fn rational_text(x: f64, max_den: u64) -> String {
    let (n, d) = rational_approximation(x, max_den);
    if d == 1 {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

fn player_label(p: Player) -> &'static str {
    match p {
        Player::Row => "I",
        Player::Col => "II",
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct StrategyJson {
    pub weights: Vec<Real17>,
    pub rational: Vec<String>,
}

impl From<&MixedStrategy> for StrategyJson {
    fn from(s: &MixedStrategy) -> Self {
        StrategyJson {
            weights: reals(s.weights()),
            rational: s.weights().iter().map(|w| rational_text(*w, 1000)).collect(),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HalfspaceJson {
    pub normal: Vec<Real17>,
    pub offset: Real17,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PolyhedronJson {
    pub orientation: Orientation,
    pub vertices: Vec<Vec<Real17>>,
    pub halfspaces: Vec<HalfspaceJson>,
}

impl From<&OrientedPayoffPolyhedron> for PolyhedronJson {
    fn from(p: &OrientedPayoffPolyhedron) -> Self {
        PolyhedronJson {
            orientation: p.orientation(),
            vertices: p.vertices().iter().map(|v| reals(v)).collect(),
            halfspaces: p
                .halfspaces()
                .iter()
                .map(|h| HalfspaceJson { normal: reals(&h.normal), offset: Real17(h.offset) })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CertificateJson {
    pub strategy: StrategyJson,
    pub lp_value: Real17,
    pub optimal: bool,
    pub improving: Option<StrategyJson>,
    pub slacks: Vec<Real17>,
}

impl From<&MinimalityCertificate> for CertificateJson {
    fn from(c: &MinimalityCertificate) -> Self {
        CertificateJson {
            strategy: (&c.tested).into(),
            lp_value: Real17(c.lp_value),
            optimal: c.optimal,
            improving: c.improving.as_ref().map(Into::into),
            slacks: reals(&c.slacks),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GridPointJson {
    pub index: usize,
    pub weights: Vec<Real17>,
    pub rational: Vec<String>,
    pub lp_value: Option<Real17>,
    pub optimal: bool,
    pub prefiltered: bool,
    /// Canonical member of its payoff-equivalence class.
    pub representative: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct FrontJson {
    pub player: &'static str,
    pub step: String,
    pub grid_points: usize,
    pub optimal_count: usize,
    pub class_count: usize,
    pub points: Vec<GridPointJson>,
}

impl From<&StrategyFront> for FrontJson {
    fn from(f: &StrategyFront) -> Self {
        FrontJson {
            player: player_label(f.player),
            step: format!("1/{}", f.grid.divisions()),
            grid_points: f.grid.len(),
            optimal_count: f.verdicts.iter().filter(|v| v.optimal).count(),
            class_count: f.classes.len(),
            points: f
                .verdicts
                .iter()
                .map(|v| {
                    let s = StrategyJson::from(&v.strategy);
                    GridPointJson {
                        index: v.index,
                        weights: s.weights,
                        rational: s.rational,
                        lp_value: v.lp_value().map(Real17),
                        optimal: v.optimal,
                        prefiltered: v.prefiltered,
                        representative: f.is_representative(v.index),
                    }
                })
                .collect(),
        }
    }
}

/// Short type label in the style of a results table.
pub fn type_label(r: &EquilibriumRecord) -> &'static str {
    match r.classification {
        Classification::StrongSetShapley | Classification::StrongShapley => "strong",
        Classification::SetShapley | Classification::Shapley => "not strong",
        Classification::SetRelation => "set relation only",
        Classification::None => "none",
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EquilibriumJson {
    pub p: StrategyJson,
    pub q: StrategyJson,
    pub payoff: Vec<Real17>,
    pub p_minimal: bool,
    pub q_maximal: bool,
    pub shapley: bool,
    pub strong: bool,
    pub strong_lp_value: Option<Real17>,
    pub classification: Classification,
    #[serde(rename = "type")]
    pub kind: &'static str,
}

impl From<&EquilibriumRecord> for EquilibriumJson {
    fn from(r: &EquilibriumRecord) -> Self {
        EquilibriumJson {
            p: (&r.p).into(),
            q: (&r.q).into(),
            payoff: reals(&r.payoff),
            p_minimal: r.p_minimal,
            q_maximal: r.q_maximal,
            shapley: r.shapley,
            strong: r.strong,
            strong_lp_value: r.strong_value.map(Real17),
            classification: r.classification,
            kind: type_label(r),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct WitnessJson {
    pub vertex: Vec<Real17>,
    pub strategy: StrategyJson,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ImageJson {
    pub player: &'static str,
    pub orientation: Orientation,
    pub vertices: Vec<Vec<Real17>>,
    pub halfspaces: Vec<HalfspaceJson>,
    pub witnesses: Vec<WitnessJson>,
    pub cuts: usize,
}

impl From<&SecurityImage> for ImageJson {
    fn from(img: &SecurityImage) -> Self {
        let poly = PolyhedronJson::from(img.polyhedron());
        ImageJson {
            player: player_label(img.player()),
            orientation: poly.orientation,
            vertices: poly.vertices,
            halfspaces: poly.halfspaces,
            witnesses: img
                .vertices()
                .iter()
                .zip(img.witnesses())
                .map(|(v, s)| WitnessJson { vertex: reals(v), strategy: s.into() })
                .collect(),
            cuts: img.cuts(),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GapJson {
    pub player: &'static str,
    pub checked: usize,
    pub violations: Vec<(StrategyJson, usize)>,
}

impl From<&GapReport> for GapJson {
    fn from(g: &GapReport) -> Self {
        GapJson {
            player: player_label(g.player),
            checked: g.checked,
            violations: g.violations.iter().map(|v| ((&v.strategy).into(), v.direction)).collect(),
        }
    }
}

/// One polygon of a plot: `{label, orientation, vertices}`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PlotItem {
    pub label: String,
    pub orientation: Orientation,
    pub vertices: Vec<Vec<Real17>>,
}

impl PlotItem {
    pub fn new(label: impl Into<String>, poly: &OrientedPayoffPolyhedron) -> Self {
        PlotItem {
            label: label.into(),
            orientation: poly.orientation(),
            vertices: poly.vertices().iter().map(|v| reals(v)).collect(),
        }
    }
}

pub fn payoff_json(v: &PayoffVector) -> Vec<Real17> {
    reals(v)
}
