//! The rewriting moves: rearrangement of critical values, realization of a
//! whole configuration, cancellation of a pair and splitting of an interior
//! handle into two half-handles. Every move is a pure function returning a
//! new datum and a replayable record.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::morse_data::{
    first_inadmissible_pair, is_admissible, is_index_monotone, ComponentId, Configuration, CriticalPoint, Kind,
    MorseDatum, PointId,
};
use crate::slice_topology::{self, ComponentEffect, EffectKind};
use crate::trajectory::{self, broken_closure, generic_disjoint, locus_allowed, FlowEdge, Locus, Multiplicity};
use crate::value::{self, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    /// New values for one or two points.
    Rearrange(Vec<(PointId, Value)>),
    Cancel { z: PointId, w: PointId },
    /// `z` is replaced by the boundary stable point `stable` and the
    /// boundary unstable point `unstable`.
    Split {
        z: PointId,
        stable: PointId,
        unstable: PointId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveRecord {
    pub action: Move,
    /// Names of the preconditions that were checked.
    pub justification: Vec<String>,
}

impl MoveRecord {
    fn new(action: Move, why: &[&str]) -> Self {
        MoveRecord {
            action,
            justification: why.iter().map(|s| s.to_string()).collect(),
        }
    }
}

pub type Script = Vec<MoveRecord>;

/// Assigns new values, keeping edges strictly increasing, and re-sequences
/// the slice effects.
fn reassign(d: &MorseDatum, targets: &[(PointId, Value)]) -> Result<MorseDatum> {
    let mut points = d.points.clone();
    for (id, v) in targets {
        if !value::in_open_unit(v) {
            return Err(Error::Precondition(format!(
                "target value {} for {id} is outside (0,1)",
                value::format(v)
            )));
        }
        points.get_mut(id).ok_or(Error::UnknownId(*id))?.value = v.clone();
    }
    for e in d.graph.iter() {
        if points[&e.from].value >= points[&e.to].value {
            return Err(Error::EdgeOrderViolation { from: e.from, to: e.to });
        }
    }
    let slices = slice_topology::resequence(&d.slices, &points, d.n(), &d.level_order())?;
    Ok(MorseDatum {
        points,
        slices,
        ..d.clone()
    })
}

/// Moves `z` to value `a` without touching any other point.
pub fn rearrange_point(d: &MorseDatum, z: PointId, a: Value) -> Result<(MorseDatum, MoveRecord)> {
    d.point(z)?;
    let out = reassign(d, &[(z, a.clone())])?;
    Ok((out, MoveRecord::new(Move::Rearrange(vec![(z, a)]), &["edge-order"])))
}

/// Sets the values of `z < w` to `a` and `b`, provided nothing flows from
/// `z` up to `w`.
pub fn rearrange_pair(
    d: &MorseDatum,
    z: PointId,
    w: PointId,
    a: Value,
    b: Value,
) -> Result<(MorseDatum, MoveRecord)> {
    if d.value(z)? >= d.value(w)? {
        return Err(Error::Precondition(format!("value of {z} must be below value of {w}")));
    }
    if !trajectory::can_rearrange(d, z, w)? {
        return Err(Error::Blocked(z, w));
    }
    let targets = vec![(z, a), (w, b)];
    let out = reassign(d, &targets)?;
    Ok((
        out,
        MoveRecord::new(Move::Rearrange(targets), &["can-rearrange", "edge-order"]),
    ))
}

/// Single-point moves from the current values to `target`: points moving
/// down go first in increasing target order, then points moving up in
/// decreasing target order. Every intermediate state keeps each edge
/// strictly increasing whenever `target` does.
fn move_to(d: &MorseDatum, target: &Configuration, script: &mut Script) -> Result<MorseDatum> {
    let mut down: Vec<(&Value, PointId)> = Vec::new();
    let mut up: Vec<(&Value, PointId)> = Vec::new();
    for p in d.points.values() {
        let t = &target[&p.id];
        if t < &p.value {
            down.push((t, p.id));
        } else if t > &p.value {
            up.push((t, p.id));
        }
    }
    down.sort();
    up.sort_by(|a, b| b.cmp(a));
    let mut cur = d.clone();
    for (t, id) in down.into_iter().chain(up) {
        let (next, rec) = rearrange_point(&cur, id, t.clone())?;
        script.push(rec);
        cur = next;
    }
    Ok(cur)
}

/// Realizes the configuration `xi` by a sequence of elementary moves:
/// first the points are put in index order (keeping the relative order of
/// equal indices), then moved to their targets.
pub fn realize_configuration(d: &MorseDatum, xi: &Configuration) -> Result<(MorseDatum, Script)> {
    for p in d.points.values() {
        let v = xi.get(&p.id).ok_or(Error::PartialConfiguration(p.id))?;
        if !value::in_open_unit(v) {
            return Err(Error::Inadmissible(format!("value for {} outside (0,1)", p.id)));
        }
    }
    if d.ambient.codim() >= 2 {
        if !is_admissible(xi, d.points.values())? {
            let assigned: Vec<(&CriticalPoint, &Value)> =
                d.points.values().map(|p| (p, &xi[&p.id])).collect();
            let (z, w) = first_inadmissible_pair(&assigned).expect("inadmissible pair");
            return Err(Error::Inadmissible(format!("{z} must lie below {w}")));
        }
    } else if !is_index_monotone(xi, d.points.values())? {
        return Err(Error::Inadmissible(
            "codimension one allows only index-monotone configurations".into(),
        ));
    }
    // A path from z up to w that the target inverts needs a swap of its
    // endpoints that the flow obstructs; some edge on it is inverted.
    for e in d.graph.iter() {
        if xi[&e.from] >= xi[&e.to] {
            return Err(Error::SwapBlocked(e.from, e.to));
        }
    }

    let mut script = Script::new();
    let mut cur = d.clone();
    if !is_index_monotone(&d.configuration(), d.points.values())? {
        let mut by_index: Vec<&CriticalPoint> = d.points.values().collect();
        by_index.sort_by(|a, b| a.index.cmp(&b.index).then(a.value.cmp(&b.value)).then(a.id.cmp(&b.id)));
        let total = by_index.len() as i64 + 1;
        let staged: Configuration = by_index
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id, value::ratio(i as i64 + 1, total)))
            .collect();
        cur = move_to(&cur, &staged, &mut script)?;
    }
    cur = move_to(&cur, xi, &mut script)?;
    Ok((cur, script))
}

/// Cancels `z` (index k) against `w` (index k+1) joined by a single
/// trajectory with no broken trajectories between them.
pub fn cancel_pair(d: &MorseDatum, z: PointId, w: PointId) -> Result<(MorseDatum, MoveRecord)> {
    let pz = d.point(z)?;
    let pw = d.point(w)?;
    if pz.kind != pw.kind {
        return Err(Error::KindMismatch(z, w));
    }
    if pw.index != pz.index + 1 {
        return Err(Error::IndexMismatch(z, w));
    }
    let edge = d.graph.get(z, w).ok_or(Error::NotSingleTrajectory(z, w))?;
    if edge.count != Multiplicity::Known(1) {
        return Err(Error::NotSingleTrajectory(z, w));
    }
    let expected = if pz.kind == Kind::Interior {
        Locus::InteriorOmega
    } else {
        Locus::BoundaryY
    };
    if edge.locus != expected {
        return Err(Error::LocusViolation(z, w));
    }
    let closure = broken_closure(&d.graph)?;
    if let Some(x) = d
        .points
        .keys()
        .find(|&&x| closure.lt(z, x) && closure.lt(x, w))
    {
        return Err(Error::BrokenTrajectoryExists(z, w, *x));
    }

    let slices = cancel_effects(d, z, w)?;

    let mut graph = d.graph.clone();
    let ins: Vec<PointId> = d.graph.in_edges(w).map(|e| e.from).filter(|&p| p != z).collect();
    let outs: Vec<PointId> = d.graph.out_edges(z).map(|e| e.to).filter(|&q| q != w).collect();
    graph.remove_point(z);
    graph.remove_point(w);
    for &p in &ins {
        for &q in &outs {
            let (pp, pq) = (&d.points[&p], &d.points[&q]);
            if pp.value < pq.value
                && !generic_disjoint(pp, pq, d.ambient)
                && graph.get(p, q).is_none()
            {
                graph.insert(FlowEdge {
                    from: p,
                    to: q,
                    count: Multiplicity::Unknown,
                    locus: Locus::AmbientOnly,
                });
            }
        }
    }
    let mut points = d.points.clone();
    points.remove(&z);
    points.remove(&w);
    let out = MorseDatum {
        points,
        graph,
        slices,
        ..d.clone()
    };
    slice_topology::replay(&out)?;
    Ok((
        out,
        MoveRecord::new(
            Move::Cancel { z, w },
            &["same-kind", "adjacent-index", "single-trajectory", "no-broken-trajectory", "effects-cancel"],
        ),
    ))
}

/// Removes the effects of a cancelling pair. Accepted when both are
/// identities, when `z` gives birth to a component that `w` merges away,
/// or when `z` splits off a closed component that `w` kills.
fn cancel_effects(d: &MorseDatum, z: PointId, w: PointId) -> Result<slice_topology::SliceComplex> {
    let r = slice_topology::replay(d)?;
    let ez = &d.slices.effects[&z];
    let ew = &d.slices.effects[&w];
    let below_z = r.below(z).expect("z replayed");
    let below_w = r.below(w).expect("w replayed");
    let pos = |p: PointId| r.order.iter().position(|&q| q == p).expect("replayed");
    let (iz, iw) = (pos(z), pos(w));
    let untouched_between = |c: ComponentId| {
        r.order[iz + 1..iw]
            .iter()
            .all(|p| !d.slices.effects[p].inputs.contains(&c))
    };
    let refuse = || Error::InvalidEffect {
        at: z,
        reason: format!("effects of {z} and {w} do not cancel"),
    };

    let mut out = d.slices.clone();
    out.effects.remove(&z);
    out.effects.remove(&w);
    if ez.is_identity(below_z) && ew.is_identity(below_w) {
        return Ok(out);
    }
    match (ez.kind, ew.kind) {
        (EffectKind::Birth, EffectKind::Merge) => {
            let born = ez.outputs[0].0;
            if !ew.inputs.contains(&born) || !untouched_between(born) {
                return Err(refuse());
            }
            let other = *ew.inputs.iter().find(|&&c| c != born).expect("two inputs");
            slice_topology::rename_component(&mut out, ew.outputs[0].0, other);
            Ok(out)
        }
        (EffectKind::Split, EffectKind::Death) => {
            let dead = ew.inputs[0];
            let Some(&(kept, _)) = ez.outputs.iter().find(|&&(c, _)| c != dead) else {
                return Err(refuse());
            };
            if !ez.outputs.iter().any(|&(c, _)| c == dead) || !untouched_between(dead) {
                return Err(refuse());
            }
            slice_topology::rename_component(&mut out, kept, ez.inputs[0]);
            Ok(out)
        }
        _ => Err(refuse()),
    }
}

/// Half the distance from `v` to the nearest other critical value, or to
/// the ends of `[0, 1]`.
fn split_gap(d: &MorseDatum, v: &Value) -> Value {
    let mut gap = v.clone().min(Value::one() - v);
    for p in d.points.values() {
        let dist = if &p.value > v {
            &p.value - v
        } else {
            v - &p.value
        };
        if !dist.is_zero() && dist < gap {
            gap = dist;
        }
    }
    gap / value::int(2)
}

/// Pushes an interior point of index `1..=n` whose level component touches
/// `Y` to the boundary, replacing it by a boundary stable and a boundary
/// unstable point of the same index joined by one trajectory in `Y`.
pub fn split_interior(d: &MorseDatum, z: PointId) -> Result<(MorseDatum, MoveRecord)> {
    let pz = d.point(z)?.clone();
    if pz.kind != Kind::Interior {
        return Err(Error::NotInterior(z));
    }
    let k = pz.index;
    if k == 0 || k > d.n() {
        return Err(Error::ExtremalIndex(z));
    }
    let r = slice_topology::replay(d)?;
    let below = r.below(z).expect("z replayed").clone();
    let ez = d.slices.effects[&z].clone();
    if !ez.inputs.iter().any(|c| below.touches_y(*c) == Some(true)) {
        return Err(Error::NotJoinable(z));
    }

    let delta = split_gap(d, &pz.value);
    let next = d.next_point_id();
    let (s, u) = (PointId(next), PointId(next + 1));
    let ps = CriticalPoint {
        id: s,
        index: k,
        kind: Kind::BoundaryStable,
        value: &pz.value - &delta,
    };
    let pu = CriticalPoint {
        id: u,
        index: k,
        kind: Kind::BoundaryUnstable,
        value: &pz.value + &delta,
    };

    let (es, eu) = split_effects(&ez, &below);
    let mut points = d.points.clone();
    points.remove(&z);
    points.insert(s, ps);
    points.insert(u, pu);

    let mut graph = d.graph.clone();
    graph.remove_point(z);
    let rewired = d
        .graph
        .in_edges(z)
        .map(|e| FlowEdge { to: s, ..e.clone() })
        .chain(d.graph.out_edges(z).map(|e| FlowEdge { from: u, ..e.clone() }))
        .chain(std::iter::once(FlowEdge {
            from: s,
            to: u,
            count: Multiplicity::Known(1),
            locus: Locus::BoundaryY,
        }));
    for e in rewired {
        let (a, b) = (&points[&e.from], &points[&e.to]);
        if generic_disjoint(a, b, d.ambient) || !locus_allowed(a, b, e.locus) {
            return Err(Error::GenericityViolation(e.from, e.to));
        }
        graph.insert(e);
    }

    let mut complex = d.slices.clone();
    complex.effects.remove(&z);
    complex.effects.insert(s, es);
    complex.effects.insert(u, eu);
    let old_order: Vec<PointId> = r
        .order
        .iter()
        .flat_map(|&p| if p == z { vec![s, u] } else { vec![p] })
        .collect();
    let slices = slice_topology::resequence(&complex, &points, d.n(), &old_order)?;

    let out = MorseDatum {
        points,
        graph,
        slices,
        ..d.clone()
    };
    Ok((
        out,
        MoveRecord::new(
            Move::Split {
                z,
                stable: s,
                unstable: u,
            },
            &["interior", "index-range", "joinable"],
        ),
    ))
}

/// Effects of the two half-handles replacing the effect of `z`. The level
/// sets above the pair are the same as above `z`.
fn split_effects(ez: &ComponentEffect, below: &slice_topology::Slice) -> (ComponentEffect, ComponentEffect) {
    let attach = |c: ComponentId, y: bool| ComponentEffect {
        kind: EffectKind::BoundaryAttach,
        inputs: vec![c],
        outputs: vec![(c, y)],
    };
    match ez.kind {
        EffectKind::Merge => {
            // Open a closed foot first so that the boundary band can join it.
            let mut feet = ez.inputs.clone();
            feet.sort_by_key(|c| (below.touches_y(*c) == Some(true), *c));
            let es = attach(feet[0], true);
            let eu = ComponentEffect {
                kind: EffectKind::BoundaryAttach,
                inputs: ez.inputs.clone(),
                outputs: vec![(ez.outputs[0].0, true)],
            };
            (es, eu)
        }
        EffectKind::Split => {
            let es = ComponentEffect {
                kind: EffectKind::BoundaryAttach,
                inputs: ez.inputs.clone(),
                outputs: ez.outputs.iter().map(|&(c, _)| (c, true)).collect(),
            };
            let piece = ez
                .outputs
                .iter()
                .find(|&&(_, y)| !y)
                .copied()
                .unwrap_or(ez.outputs[0]);
            (es, attach(piece.0, piece.1))
        }
        _ => {
            let c = ez.inputs[0];
            (attach(c, true), attach(c, true))
        }
    }
}

/// Re-applies a recorded move.
pub fn apply_record(d: &MorseDatum, rec: &MoveRecord) -> Result<MorseDatum> {
    match &rec.action {
        Move::Rearrange(targets) => match targets.as_slice() {
            [(z, a)] => rearrange_point(d, *z, a.clone()).map(|r| r.0),
            [(z, a), (w, b)] => rearrange_pair(d, *z, *w, a.clone(), b.clone()).map(|r| r.0),
            _ => Err(Error::Precondition("a rearrangement moves one or two points".into())),
        },
        Move::Cancel { z, w } => cancel_pair(d, *z, *w).map(|r| r.0),
        Move::Split { z, stable, unstable } => {
            let (out, got) = split_interior(d, *z)?;
            match got.action {
                Move::Split { stable: s, unstable: u, .. } if s == *stable && u == *unstable => Ok(out),
                _ => Err(Error::Precondition(format!(
                    "split of {z} would create ids other than {stable}, {unstable}"
                ))),
            }
        }
    }
}

pub fn replay_script(d: &MorseDatum, script: &[MoveRecord]) -> Result<MorseDatum> {
    script.iter().try_fold(d.clone(), |cur, rec| apply_record(&cur, rec))
}

/// Multiset of `(kind, index)` pairs, for invariants on moves.
pub fn kind_index_multiset(d: &MorseDatum) -> BTreeMap<(Kind, u32), usize> {
    let mut m = BTreeMap::new();
    for p in d.points.values() {
        *m.entry((p.kind, p.index)).or_insert(0) += 1;
    }
    m
}
