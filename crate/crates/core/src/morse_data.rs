//! Core domain types: ambient dimensions, critical points, the datum that
//! the moves rewrite, and the validity rules tying them together.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::slice_topology::{self, SliceComplex};
use crate::trajectory::{self, TrajectoryGraph};
use crate::value::{self, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub u32);

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComponentId(pub u32);

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dimensions of the ambient pair: `m = dim Z` and `dim Ω = n + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ambient {
    m: u32,
    n: u32,
}

impl Ambient {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if n < 1 || m < n + 1 {
            return Err(Error::Validation(vec![format!(
                "ambient m={m} n={n}: need n >= 1 and m >= n + 1"
            )]));
        }
        Ok(Ambient { m, n })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `dim Z - dim Σ₀ = m - n`.
    pub fn codim(&self) -> u32 {
        self.m - self.n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Interior,
    BoundaryStable,
    BoundaryUnstable,
}

impl Kind {
    pub const ALL: [Kind; 3] = [Kind::Interior, Kind::BoundaryStable, Kind::BoundaryUnstable];

    pub fn is_boundary(self) -> bool {
        self != Kind::Interior
    }

    /// Indices a point of this kind may carry when `dim Ω = n + 1`.
    /// A boundary stable point restricts to index `k - 1` on Y, so `k >= 1`;
    /// a boundary unstable point has `dim W^u_Y = n - k >= 0`.
    pub fn index_range(self, n: u32) -> RangeInclusive<u32> {
        match self {
            Kind::Interior => 0..=n + 1,
            Kind::BoundaryStable => 1..=n + 1,
            Kind::BoundaryUnstable => 0..=n,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Interior => "interior",
            Kind::BoundaryStable => "bstable",
            Kind::BoundaryUnstable => "bunstable",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalPoint {
    pub id: PointId,
    pub index: u32,
    pub kind: Kind,
    pub value: Value,
}

impl CriticalPoint {
    pub fn new(id: u32, kind: Kind, index: u32, value: Value) -> Self {
        CriticalPoint {
            id: PointId(id),
            index,
            kind,
            value,
        }
    }
}

/// Dimensions of the stable and unstable manifolds of a critical point,
/// `None` where the manifold is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionProfile {
    /// `M^s ∖ Ω`
    pub membrane_stable: Option<u32>,
    /// `M^u ∖ Ω`
    pub membrane_unstable: Option<u32>,
    /// `W^s ∖ Y`
    pub stable_off_y: Option<u32>,
    /// `W^u ∖ Y`
    pub unstable_off_y: Option<u32>,
    /// `W^s_Y`
    pub stable_in_y: Option<u32>,
    /// `W^u_Y`
    pub unstable_in_y: Option<u32>,
}

impl DimensionProfile {
    pub fn as_array(&self) -> [Option<u32>; 6] {
        [
            self.membrane_stable,
            self.membrane_unstable,
            self.stable_off_y,
            self.unstable_off_y,
            self.stable_in_y,
            self.unstable_in_y,
        ]
    }
}

pub fn dimension_profile(kind: Kind, k: u32, n: u32) -> Result<DimensionProfile> {
    if !kind.index_range(n).contains(&k) {
        return Err(Error::InvalidIndexKind { kind, index: k, n });
    }
    let (stable_off_y, unstable_off_y, stable_in_y, unstable_in_y) = match kind {
        Kind::Interior => (Some(k), Some(n + 1 - k), None, None),
        Kind::BoundaryStable => (Some(k), None, Some(k - 1), Some(n + 1 - k)),
        Kind::BoundaryUnstable => (None, Some(n + 1 - k), Some(k), Some(n - k)),
    };
    Ok(DimensionProfile {
        membrane_stable: Some(k + 1),
        membrane_unstable: Some(n + 2 - k),
        stable_off_y,
        unstable_off_y,
        stable_in_y,
        unstable_in_y,
    })
}

/// A value assignment to critical points.
pub type Configuration = BTreeMap<PointId, Value>;

/// Checks (A1) index monotonicity and (A2) boundary stable strictly below
/// boundary unstable at equal index. Ties are otherwise allowed.
pub fn is_admissible<'a>(
    config: &Configuration,
    points: impl IntoIterator<Item = &'a CriticalPoint>,
) -> Result<bool> {
    let mut assigned = Vec::new();
    for p in points {
        let v = config.get(&p.id).ok_or(Error::PartialConfiguration(p.id))?;
        assigned.push((p, v));
    }
    Ok(first_inadmissible_pair(&assigned).is_none())
}

/// Checks only (A1), the ordering available in codimension one.
pub fn is_index_monotone<'a>(
    config: &Configuration,
    points: impl IntoIterator<Item = &'a CriticalPoint>,
) -> Result<bool> {
    let mut assigned = Vec::new();
    for p in points {
        let v = config.get(&p.id).ok_or(Error::PartialConfiguration(p.id))?;
        assigned.push((p, v));
    }
    Ok(assigned
        .iter()
        .all(|(z, vz)| assigned.iter().all(|(w, vw)| z.index >= w.index || vz < vw)))
}

pub(crate) fn first_inadmissible_pair(
    assigned: &[(&CriticalPoint, &Value)],
) -> Option<(PointId, PointId)> {
    for (z, vz) in assigned {
        for (w, vw) in assigned {
            let a1 = z.index < w.index;
            let a2 = z.index == w.index
                && z.kind == Kind::BoundaryStable
                && w.kind == Kind::BoundaryUnstable;
            if (a1 || a2) && vz >= vw {
                return Some((z.id, w.id));
            }
        }
    }
    None
}

/// Asserted absence of closed connected components of Ω, Σ₀ and Σ₁.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flags {
    pub omega: bool,
    pub sigma0: bool,
    pub sigma1: bool,
}

impl Flags {
    pub fn all() -> Self {
        Flags {
            omega: true,
            sigma0: true,
            sigma1: true,
        }
    }

    pub fn none() -> Self {
        Flags {
            omega: false,
            sigma0: false,
            sigma1: false,
        }
    }

    pub fn all_set(&self) -> bool {
        self.omega && self.sigma0 && self.sigma1
    }
}

/// The rewriting state: critical points with their values, the trajectory
/// graph between them and the level-set component bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorseDatum {
    pub ambient: Ambient,
    pub points: BTreeMap<PointId, CriticalPoint>,
    pub graph: TrajectoryGraph,
    pub slices: SliceComplex,
    pub flags: Flags,
}

impl MorseDatum {
    pub fn new(ambient: Ambient) -> Self {
        MorseDatum {
            ambient,
            points: BTreeMap::new(),
            graph: TrajectoryGraph::default(),
            slices: SliceComplex::default(),
            flags: Flags::all(),
        }
    }

    pub fn n(&self) -> u32 {
        self.ambient.n()
    }

    pub fn point(&self, id: PointId) -> Result<&CriticalPoint> {
        self.points.get(&id).ok_or(Error::UnknownId(id))
    }

    pub fn value(&self, id: PointId) -> Result<&Value> {
        self.point(id).map(|p| &p.value)
    }

    /// Point ids sorted by value, ties broken by id. This is the order in
    /// which slice effects are replayed.
    pub fn level_order(&self) -> Vec<PointId> {
        let mut ids: Vec<&CriticalPoint> = self.points.values().collect();
        ids.sort_by(|a, b| a.value.cmp(&b.value).then(a.id.cmp(&b.id)));
        ids.into_iter().map(|p| p.id).collect()
    }

    pub fn configuration(&self) -> Configuration {
        self.points
            .values()
            .map(|p| (p.id, p.value.clone()))
            .collect()
    }

    pub fn next_point_id(&self) -> u32 {
        self.points.keys().next_back().map_or(0, |id| id.0 + 1)
    }

    /// Distinct critical values in increasing order.
    pub fn critical_values(&self) -> Vec<Value> {
        let mut vals: Vec<Value> = self.points.values().map(|p| p.value.clone()).collect();
        vals.sort();
        vals.dedup();
        vals
    }

    pub fn is_critical_value(&self, v: &Value) -> bool {
        self.points.values().any(|p| &p.value == v)
    }

    /// Ids of points with the given kind and index.
    pub fn ids_of(&self, kind: Kind, index: u32) -> Vec<PointId> {
        self.points
            .values()
            .filter(|p| p.kind == kind && p.index == index)
            .map(|p| p.id)
            .collect()
    }
}

/// One violated invariant found by [`validate_datum`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    IndexShift {
        id: PointId,
        kind: Kind,
        index: u32,
    },
    ValueOutOfRange(PointId),
    DanglingEdge {
        from: PointId,
        to: PointId,
    },
    Edge {
        from: PointId,
        to: PointId,
        reason: String,
    },
    Cycle(PointId),
    MissingEffect(PointId),
    DanglingEffect(PointId),
    Slice(String),
    ClosedComponent(&'static str),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::IndexShift { id, kind, index } => {
                let rule = match kind {
                    Kind::BoundaryStable => "boundary stable points need index >= 1 (index k-1 on Y)",
                    Kind::BoundaryUnstable => "boundary unstable points need index <= n",
                    Kind::Interior => "interior points need index <= n+1",
                };
                write!(f, "point {id}: {kind} index {index} breaks the index-shift rule: {rule}")
            }
            Violation::ValueOutOfRange(id) => write!(f, "point {id}: value outside (0,1)"),
            Violation::DanglingEdge { from, to } => {
                write!(f, "edge {from} -> {to}: dangling reference to a missing point")
            }
            Violation::Edge { from, to, reason } => write!(f, "edge {from} -> {to}: {reason}"),
            Violation::Cycle(id) => write!(f, "broken trajectory from {id} back to itself"),
            Violation::MissingEffect(id) => write!(f, "point {id}: no slice effect"),
            Violation::DanglingEffect(id) => {
                write!(f, "slice effect at {id}: dangling reference to a missing point")
            }
            Violation::Slice(msg) => write!(f, "slice complex: {msg}"),
            Violation::ClosedComponent(which) => {
                write!(f, "{which} is asserted to have no closed components but has one")
            }
        }
    }
}

/// Lists every violated invariant; empty iff the datum is valid.
pub fn validate_datum(d: &MorseDatum) -> Vec<Violation> {
    let mut report = Vec::new();
    let n = d.n();
    for p in d.points.values() {
        if !p.kind.index_range(n).contains(&p.index) {
            report.push(Violation::IndexShift {
                id: p.id,
                kind: p.kind,
                index: p.index,
            });
        }
        if !value::in_open_unit(&p.value) {
            report.push(Violation::ValueOutOfRange(p.id));
        }
    }
    // Downstream checks rely on well-formed points.
    let points_ok = report.is_empty();
    report.extend(trajectory::graph_violations(d, points_ok));
    report.extend(slice_topology::complex_violations(d, points_ok));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::ratio;

    fn p(id: u32, kind: Kind, k: u32, num: i64, den: i64) -> CriticalPoint {
        CriticalPoint::new(id, kind, k, ratio(num, den))
    }

    #[test]
    fn profile_rows() {
        let e = None;
        let s = Some;
        assert_eq!(
            dimension_profile(Kind::Interior, 1, 2).unwrap().as_array(),
            [s(2), s(3), s(1), s(2), e, e]
        );
        assert_eq!(
            dimension_profile(Kind::BoundaryStable, 1, 2).unwrap().as_array(),
            [s(2), s(3), s(1), e, s(0), s(2)]
        );
        assert_eq!(
            dimension_profile(Kind::BoundaryUnstable, 0, 2).unwrap().as_array(),
            [s(1), s(4), e, s(3), s(0), s(2)]
        );
    }

    #[test]
    fn profile_rejects_index_shift() {
        assert!(matches!(
            dimension_profile(Kind::BoundaryStable, 0, 2),
            Err(Error::InvalidIndexKind { .. })
        ));
        assert!(dimension_profile(Kind::BoundaryUnstable, 3, 2).is_err());
        assert!(dimension_profile(Kind::Interior, 4, 2).is_err());
    }

    #[test]
    fn admissibility_examples() {
        let z = p(0, Kind::Interior, 1, 3, 10);
        let w = p(1, Kind::Interior, 2, 6, 10);
        let cfg: Configuration = [(z.id, z.value.clone()), (w.id, w.value.clone())].into();
        assert!(is_admissible(&cfg, [&z, &w]).unwrap());

        let z = p(0, Kind::BoundaryStable, 1, 1, 2);
        let w = p(1, Kind::BoundaryUnstable, 1, 2, 5);
        let cfg: Configuration = [(z.id, z.value.clone()), (w.id, w.value.clone())].into();
        assert!(!is_admissible(&cfg, [&z, &w]).unwrap());

        let z = p(0, Kind::Interior, 1, 1, 2);
        let w = p(1, Kind::Interior, 1, 1, 2);
        let cfg: Configuration = [(z.id, z.value.clone()), (w.id, w.value.clone())].into();
        assert!(is_admissible(&cfg, [&z, &w]).unwrap());
    }

    #[test]
    fn partial_configuration() {
        let z = p(0, Kind::Interior, 1, 1, 2);
        let cfg = Configuration::new();
        assert_eq!(
            is_admissible(&cfg, [&z]),
            Err(Error::PartialConfiguration(PointId(0)))
        );
    }

    #[test]
    fn ambient_bounds() {
        assert!(Ambient::new(3, 2).is_ok());
        assert!(Ambient::new(2, 2).is_err());
        assert!(Ambient::new(3, 0).is_err());
        assert_eq!(Ambient::new(6, 2).unwrap().codim(), 4);
    }
}
