//! The trajectory graph: which ascending and descending manifolds of pairs of
//! critical points actually meet. Its transitive closure is the broken
//! trajectory order that obstructs rearrangement.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::morse_data::{dimension_profile, Ambient, CriticalPoint, Kind, MorseDatum, PointId, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Multiplicity {
    Known(u32),
    Unknown,
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Known(c) => write!(f, "{c}"),
            Multiplicity::Unknown => f.write_str("?"),
        }
    }
}

/// Where the flow lines of an edge run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Locus {
    /// Inside `Ω ∖ Y`.
    InteriorOmega,
    /// Inside the boundary piece `Y`.
    BoundaryY,
    /// Only the ambient membranes meet, outside `Ω`. Blocks rearrangement,
    /// never enables cancellation.
    AmbientOnly,
}

impl Locus {
    pub fn as_str(self) -> &'static str {
        match self {
            Locus::InteriorOmega => "interior",
            Locus::BoundaryY => "boundary",
            Locus::AmbientOnly => "ambient",
        }
    }

    pub fn parse(s: &str) -> Option<Locus> {
        [Locus::InteriorOmega, Locus::BoundaryY, Locus::AmbientOnly]
            .into_iter()
            .find(|l| l.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowEdge {
    pub from: PointId,
    pub to: PointId,
    pub count: Multiplicity,
    pub locus: Locus,
}

/// At most one edge per ordered pair of points.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrajectoryGraph {
    edges: BTreeMap<(PointId, PointId), FlowEdge>,
}

impl TrajectoryGraph {
    pub fn from_edges(edges: impl IntoIterator<Item = FlowEdge>) -> Self {
        let mut g = TrajectoryGraph::default();
        for e in edges {
            g.insert(e);
        }
        g
    }

    pub fn insert(&mut self, edge: FlowEdge) -> Option<FlowEdge> {
        self.edges.insert((edge.from, edge.to), edge)
    }

    pub fn remove(&mut self, from: PointId, to: PointId) -> Option<FlowEdge> {
        self.edges.remove(&(from, to))
    }

    pub fn get(&self, from: PointId, to: PointId) -> Option<&FlowEdge> {
        self.edges.get(&(from, to))
    }

    pub fn iter(&self) -> impl Iterator<Item = &FlowEdge> {
        self.edges.values()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn out_edges(&self, id: PointId) -> impl Iterator<Item = &FlowEdge> {
        self.edges.values().filter(move |e| e.from == id)
    }

    pub fn in_edges(&self, id: PointId) -> impl Iterator<Item = &FlowEdge> {
        self.edges.values().filter(move |e| e.to == id)
    }

    /// Drops every edge incident to `id`.
    pub fn remove_point(&mut self, id: PointId) {
        self.edges.retain(|_, e| e.from != id && e.to != id);
    }

    fn nodes(&self) -> BTreeSet<PointId> {
        self.edges.values().flat_map(|e| [e.from, e.to]).collect()
    }
}

/// A strict partial order given by its set of related pairs `(a, b)`, `a < b`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StrictOrder {
    pairs: BTreeSet<(PointId, PointId)>,
}

impl StrictOrder {
    pub fn lt(&self, a: PointId, b: PointId) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn pairs(&self) -> &BTreeSet<(PointId, PointId)> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The order viewed as a graph with unknown multiplicities.
    pub fn as_graph(&self) -> TrajectoryGraph {
        TrajectoryGraph::from_edges(self.pairs.iter().map(|&(from, to)| FlowEdge {
            from,
            to,
            count: Multiplicity::Unknown,
            locus: Locus::AmbientOnly,
        }))
    }
}

/// Transitive closure of the edge relation: `a < b` iff a flow line or a
/// broken trajectory runs from `a` up to `b`.
pub fn broken_closure(g: &TrajectoryGraph) -> Result<StrictOrder> {
    let nodes = g.nodes();
    let mut succ: BTreeMap<PointId, Vec<PointId>> = BTreeMap::new();
    let mut indegree: BTreeMap<PointId, usize> = nodes.iter().map(|&v| (v, 0)).collect();
    for e in g.iter() {
        succ.entry(e.from).or_default().push(e.to);
        *indegree.get_mut(&e.to).expect("node") += 1;
    }

    // Kahn's algorithm; leftover nodes lie on or behind a cycle.
    let mut ready: Vec<PointId> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&v, _)| v)
        .collect();
    let mut topo = Vec::with_capacity(nodes.len());
    while let Some(v) = ready.pop() {
        topo.push(v);
        for &w in succ.get(&v).into_iter().flatten() {
            let d = indegree.get_mut(&w).expect("node");
            *d -= 1;
            if *d == 0 {
                ready.push(w);
            }
        }
    }
    if topo.len() != nodes.len() {
        let stuck = indegree
            .iter()
            .find(|(_, &d)| d > 0)
            .map(|(&v, _)| v)
            .expect("cycle node");
        return Err(Error::CycleDetected(stuck));
    }

    let mut reach: BTreeMap<PointId, BTreeSet<PointId>> = BTreeMap::new();
    for &v in topo.iter().rev() {
        let mut set = BTreeSet::new();
        for &w in succ.get(&v).into_iter().flatten() {
            set.insert(w);
            set.extend(reach[&w].iter().copied());
        }
        reach.insert(v, set);
    }
    let pairs = reach
        .into_iter()
        .flat_map(|(v, set)| set.into_iter().map(move |w| (v, w)))
        .collect();
    Ok(StrictOrder { pairs })
}

/// The three dimension inequalities whose joint validity forces
/// `M^u(z) ∩ M^s(w) = ∅` under transversality. An empty summand makes its
/// inequality hold vacuously.
pub fn dimension_sum_oracle(z: &CriticalPoint, w: &CriticalPoint, amb: Ambient) -> bool {
    let n = amb.n();
    let (Ok(pz), Ok(pw)) = (
        dimension_profile(z.kind, z.index, n),
        dimension_profile(w.kind, w.index, n),
    ) else {
        return false;
    };
    let fits = |a: Option<u32>, b: Option<u32>, bound: u32| match (a, b) {
        (Some(a), Some(b)) => a + b <= bound,
        _ => true,
    };
    fits(pz.membrane_unstable, pw.membrane_stable, amb.m() + 1)
        && fits(pz.unstable_off_y, pw.stable_off_y, n + 1)
        && fits(pz.unstable_in_y, pw.stable_in_y, n)
}

/// Sufficient conditions for `M^u(z) ∩ M^s(w) = ∅` for a generic embedded
/// gradient-like field, in terms of types, indices `k = ind z`,
/// `l = ind w` and dimensions.
pub fn generic_disjoint(z: &CriticalPoint, w: &CriticalPoint, amb: Ambient) -> bool {
    let (k, l) = (i64::from(z.index), i64::from(w.index));
    let (m, n) = (i64::from(amb.m()), i64::from(amb.n()));
    let stable_to_unstable = z.kind == Kind::BoundaryStable && w.kind == Kind::BoundaryUnstable;
    (k == l && m >= n + 2 && !stable_to_unstable)
        || (k > l && m > n)
        || (z.kind == Kind::Interior && w.kind == Kind::BoundaryUnstable && l - k <= m - n - 2)
        || (z.kind == Kind::BoundaryStable && w.kind == Kind::Interior && l - k <= m - n - 2)
}

/// True iff nothing flows from `z` up to `w`, so that the two values may be
/// reassigned freely.
pub fn can_rearrange(d: &MorseDatum, z: PointId, w: PointId) -> Result<bool> {
    d.point(z)?;
    d.point(w)?;
    Ok(!broken_closure(&d.graph)?.lt(z, w))
}

/// Whether an edge between these endpoints may be recorded in `locus`.
pub fn locus_allowed(from: &CriticalPoint, to: &CriticalPoint, locus: Locus) -> bool {
    match locus {
        Locus::BoundaryY => from.kind.is_boundary() && to.kind.is_boundary(),
        Locus::InteriorOmega => {
            from.kind != Kind::BoundaryStable && to.kind != Kind::BoundaryUnstable
        }
        Locus::AmbientOnly => true,
    }
}

pub(crate) fn graph_violations(d: &MorseDatum, points_ok: bool) -> Vec<Violation> {
    let mut report = Vec::new();
    for e in d.graph.iter() {
        let (Some(from), Some(to)) = (d.points.get(&e.from), d.points.get(&e.to)) else {
            report.push(Violation::DanglingEdge {
                from: e.from,
                to: e.to,
            });
            continue;
        };
        let mut bad = |reason: &str| {
            report.push(Violation::Edge {
                from: e.from,
                to: e.to,
                reason: reason.to_owned(),
            })
        };
        if from.value >= to.value {
            bad("values must increase strictly along a flow line");
        }
        if e.count == Multiplicity::Known(0) {
            bad("count must be positive");
        }
        if !locus_allowed(from, to, e.locus) {
            bad("locus incompatible with the endpoint types");
        }
        if points_ok && generic_disjoint(from, to, d.ambient) {
            bad("ruled out by the Morse-Smale dimension count");
        }
    }
    if let Err(Error::CycleDetected(v)) = broken_closure(&d.graph) {
        report.push(Violation::Cycle(v));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::ratio;

    fn id(i: u32) -> PointId {
        PointId(i)
    }

    fn edge(a: u32, b: u32) -> FlowEdge {
        FlowEdge {
            from: id(a),
            to: id(b),
            count: Multiplicity::Unknown,
            locus: Locus::AmbientOnly,
        }
    }

    fn pt(kind: Kind, k: u32) -> CriticalPoint {
        CriticalPoint::new(0, kind, k, ratio(1, 2))
    }

    #[test]
    fn closure_of_chain() {
        let g = TrajectoryGraph::from_edges([edge(0, 1), edge(1, 2)]);
        let c = broken_closure(&g).unwrap();
        assert_eq!(
            c.pairs().iter().copied().collect::<Vec<_>>(),
            vec![(id(0), id(1)), (id(0), id(2)), (id(1), id(2))]
        );
        assert!(broken_closure(&TrajectoryGraph::default()).unwrap().is_empty());
    }

    #[test]
    fn closure_detects_cycle() {
        let g = TrajectoryGraph::from_edges([edge(0, 1), edge(1, 2), edge(2, 1)]);
        assert!(matches!(broken_closure(&g), Err(Error::CycleDetected(_))));
    }

    #[test]
    fn oracle_examples() {
        let amb = Ambient::new(4, 2).unwrap();
        assert!(dimension_sum_oracle(&pt(Kind::Interior, 2), &pt(Kind::Interior, 2), amb));
        for m in 4..8 {
            let amb = Ambient::new(m, 2).unwrap();
            assert!(!dimension_sum_oracle(
                &pt(Kind::BoundaryStable, 1),
                &pt(Kind::BoundaryUnstable, 1),
                amb
            ));
        }
        let amb = Ambient::new(3, 2).unwrap();
        assert!(dimension_sum_oracle(&pt(Kind::Interior, 3), &pt(Kind::Interior, 2), amb));
    }

    #[test]
    fn disjoint_examples() {
        let a = |m| Ambient::new(m, 2).unwrap();
        assert!(generic_disjoint(&pt(Kind::Interior, 2), &pt(Kind::Interior, 2), a(4)));
        assert!(generic_disjoint(&pt(Kind::Interior, 3), &pt(Kind::Interior, 2), a(3)));
        assert!(!generic_disjoint(&pt(Kind::Interior, 1), &pt(Kind::Interior, 1), a(3)));
    }
}
