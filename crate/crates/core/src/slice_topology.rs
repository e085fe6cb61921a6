//! Level-set bookkeeping. Each slice between consecutive critical values is
//! a set of connected components, each flagged by whether it touches `Y`;
//! each critical point carries a declared effect on those components.
//!
//! Component ids are global: an id produced by an effect is never produced
//! again anywhere in the complex. Effects whose output keeps the input id
//! (internal handles and most half-handles) leave the component's identity
//! in place.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::morse_data::{ComponentId, CriticalPoint, Kind, MorseDatum, PointId, Violation};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EffectKind {
    Birth,
    Death,
    Merge,
    Split,
    Internal,
    BoundaryAttach,
}

impl EffectKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EffectKind::Birth => "birth",
            EffectKind::Death => "death",
            EffectKind::Merge => "merge",
            EffectKind::Split => "split",
            EffectKind::Internal => "internal",
            EffectKind::BoundaryAttach => "attach",
        }
    }

    pub fn parse(s: &str) -> Option<EffectKind> {
        use EffectKind::*;
        [Birth, Death, Merge, Split, Internal, BoundaryAttach]
            .into_iter()
            .find(|k| k.as_str() == s)
    }
}

impl fmt::Display for EffectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How an effect rewires components, read off from its arity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Create,
    Destroy,
    Join,
    Cut,
    Same,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentEffect {
    pub kind: EffectKind,
    pub inputs: Vec<ComponentId>,
    /// Output components with their `touches_Y` flag.
    pub outputs: Vec<(ComponentId, bool)>,
}

impl ComponentEffect {
    pub fn birth(out: u32) -> Self {
        ComponentEffect {
            kind: EffectKind::Birth,
            inputs: vec![],
            outputs: vec![(ComponentId(out), false)],
        }
    }

    pub fn death(input: u32) -> Self {
        ComponentEffect {
            kind: EffectKind::Death,
            inputs: vec![ComponentId(input)],
            outputs: vec![],
        }
    }

    pub fn merge(a: u32, b: u32, out: u32, touches_y: bool) -> Self {
        ComponentEffect {
            kind: EffectKind::Merge,
            inputs: vec![ComponentId(a), ComponentId(b)],
            outputs: vec![(ComponentId(out), touches_y)],
        }
    }

    pub fn split(input: u32, a: (u32, bool), b: (u32, bool)) -> Self {
        ComponentEffect {
            kind: EffectKind::Split,
            inputs: vec![ComponentId(input)],
            outputs: vec![(ComponentId(a.0), a.1), (ComponentId(b.0), b.1)],
        }
    }

    pub fn internal(c: u32, touches_y: bool) -> Self {
        ComponentEffect {
            kind: EffectKind::Internal,
            inputs: vec![ComponentId(c)],
            outputs: vec![(ComponentId(c), touches_y)],
        }
    }

    /// Half-handle on a single component, keeping its id.
    pub fn attach(c: u32, touches_y: bool) -> Self {
        ComponentEffect {
            kind: EffectKind::BoundaryAttach,
            inputs: vec![ComponentId(c)],
            outputs: vec![(ComponentId(c), touches_y)],
        }
    }

    fn shape(&self) -> Option<Shape> {
        match (self.inputs.len(), self.outputs.len()) {
            (0, 1) => Some(Shape::Create),
            (1, 0) => Some(Shape::Destroy),
            (2, 1) => Some(Shape::Join),
            (1, 2) => Some(Shape::Cut),
            (1, 1) if self.outputs[0].0 == self.inputs[0] => Some(Shape::Same),
            _ => None,
        }
    }

    /// Ids this effect creates.
    pub fn fresh_outputs(&self) -> impl Iterator<Item = ComponentId> + '_ {
        self.outputs
            .iter()
            .map(|&(c, _)| c)
            .filter(|c| !self.inputs.contains(c))
    }

    /// Identity on components: same id in and out, flag unchanged.
    pub fn is_identity(&self, below: &Slice) -> bool {
        self.shape() == Some(Shape::Same)
            && below.components.get(&self.inputs[0]) == Some(&self.outputs[0].1)
    }

    /// Change in the number of components.
    pub fn count_delta(&self) -> i64 {
        self.outputs.len() as i64 - self.inputs.len() as i64
    }

    fn rename(&mut self, from: ComponentId, to: ComponentId) {
        for c in &mut self.inputs {
            if *c == from {
                *c = to;
            }
        }
        for (c, _) in &mut self.outputs {
            if *c == from {
                *c = to;
            }
        }
    }
}

/// Components of one level set between consecutive critical values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Slice {
    pub components: BTreeMap<ComponentId, bool>,
}

impl Slice {
    pub fn new(components: impl IntoIterator<Item = (u32, bool)>) -> Self {
        Slice {
            components: components
                .into_iter()
                .map(|(c, y)| (ComponentId(c), y))
                .collect(),
        }
    }

    pub fn touches_y(&self, c: ComponentId) -> Option<bool> {
        self.components.get(&c).copied()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn all_touch_y(&self) -> bool {
        self.components.values().all(|&y| y)
    }
}

/// Bottom slice (the `Σ₀` level) plus one declared effect per critical
/// point. Intermediate slices are obtained by replay in level order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SliceComplex {
    pub base: Slice,
    pub effects: BTreeMap<PointId, ComponentEffect>,
}

/// Slices of a datum in level order: `slices[i]` lies just below
/// `order[i]`, and the last slice is the `Σ₁` level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    pub order: Vec<PointId>,
    pub slices: Vec<Slice>,
}

impl Replay {
    pub fn below(&self, z: PointId) -> Option<&Slice> {
        let i = self.order.iter().position(|&p| p == z)?;
        Some(&self.slices[i])
    }

    pub fn top(&self) -> &Slice {
        self.slices.last().expect("replay has a bottom slice")
    }
}

/// Names the effect rows of the validity table a point may use.
fn allowed_shapes(kind: Kind, k: u32, n: u32) -> Vec<Shape> {
    match kind {
        Kind::Interior => {
            let mut shapes = Vec::new();
            if k == 0 {
                shapes.push(Shape::Create);
            } else if k == n + 1 {
                shapes.push(Shape::Destroy);
            } else {
                shapes.push(Shape::Same);
                if k == 1 {
                    shapes.push(Shape::Join);
                }
                if k == n {
                    shapes.push(Shape::Cut);
                }
            }
            shapes
        }
        Kind::BoundaryStable => {
            let mut shapes = vec![Shape::Same];
            if k == n {
                shapes.push(Shape::Cut);
            }
            shapes
        }
        Kind::BoundaryUnstable => {
            let mut shapes = vec![Shape::Same];
            if k == 1 {
                shapes.push(Shape::Join);
            }
            shapes
        }
    }
}

fn label_for(kind: Kind, shape: Shape) -> EffectKind {
    if kind.is_boundary() {
        return EffectKind::BoundaryAttach;
    }
    match shape {
        Shape::Create => EffectKind::Birth,
        Shape::Destroy => EffectKind::Death,
        Shape::Join => EffectKind::Merge,
        Shape::Cut => EffectKind::Split,
        Shape::Same => EffectKind::Internal,
    }
}

/// Validates `e` at point `p` against the slice below it. `seen` holds
/// every component id used so far; created ids must be new.
fn check_effect(
    p: &CriticalPoint,
    n: u32,
    e: &ComponentEffect,
    below: &Slice,
    seen: &BTreeSet<ComponentId>,
) -> std::result::Result<(), String> {
    let shape = e
        .shape()
        .ok_or_else(|| format!("{} inputs / {} outputs is not a valid arity", e.inputs.len(), e.outputs.len()))?;
    if !allowed_shapes(p.kind, p.index, n).contains(&shape) {
        return Err(format!(
            "{} effect with {} in / {} out not allowed for {} index {} (n={n})",
            e.kind,
            e.inputs.len(),
            e.outputs.len(),
            p.kind,
            p.index
        ));
    }
    let expected = label_for(p.kind, shape);
    if e.kind != expected {
        return Err(format!("effect labelled {} but its shape is {}", e.kind, expected));
    }
    let mut in_flags = Vec::new();
    for (i, c) in e.inputs.iter().enumerate() {
        if e.inputs[..i].contains(c) {
            return Err(format!("input {c} listed twice"));
        }
        in_flags.push(
            below
                .touches_y(*c)
                .ok_or_else(|| format!("input component {c} is not in the slice below"))?,
        );
    }
    let fresh: Vec<ComponentId> = e.fresh_outputs().collect();
    for (i, c) in fresh.iter().enumerate() {
        if fresh[..i].contains(c) || seen.contains(c) {
            return Err(format!("output component {c} is not a new id"));
        }
    }
    let any_in = in_flags.iter().any(|&y| y);
    let out_flags: Vec<bool> = e.outputs.iter().map(|&(_, y)| y).collect();
    let any_out = out_flags.iter().any(|&y| y);
    let boundary = p.kind.is_boundary();
    match shape {
        Shape::Create if out_flags[0] => Err("a newborn component cannot touch Y".into()),
        Shape::Destroy if in_flags[0] => Err("only a closed component can die".into()),
        Shape::Join if boundary && !(in_flags.iter().all(|&y| y) && out_flags[0]) => {
            Err("a boundary merge joins components touching Y".into())
        }
        Shape::Join if out_flags[0] != any_in => {
            Err("merged component touches Y iff an input does".into())
        }
        Shape::Cut if boundary && !(in_flags[0] && out_flags.iter().all(|&y| y)) => {
            Err("a boundary split acts on components touching Y".into())
        }
        Shape::Cut if any_out != in_flags[0] => {
            Err("split pieces touch Y iff the input does".into())
        }
        Shape::Same if !boundary && out_flags[0] != in_flags[0] => {
            Err("an internal handle keeps the Y-contact flag".into())
        }
        Shape::Same if boundary => {
            // Index 0 and index n critical points of f on Y.
            let punch = matches!((p.kind, p.index), (Kind::BoundaryStable, 1) | (Kind::BoundaryUnstable, 0));
            let cap = (p.kind == Kind::BoundaryUnstable && p.index == n)
                || (p.kind == Kind::BoundaryStable && p.index == n + 1);
            if !in_flags[0] && !punch {
                Err("a half-handle attaches along Y; input must touch Y".into())
            } else if !out_flags[0] && !(cap && in_flags[0]) {
                Err("output of this half-handle must touch Y".into())
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}

fn apply_unchecked(below: &Slice, e: &ComponentEffect) -> Slice {
    let mut s = below.clone();
    for c in &e.inputs {
        s.components.remove(c);
    }
    for &(c, y) in &e.outputs {
        s.components.insert(c, y);
    }
    s
}

/// Applies a declared effect to the slice below `p`, returning the slice
/// above. Components not named by the effect are carried through.
pub fn apply_effect(below: &Slice, p: &CriticalPoint, n: u32, e: &ComponentEffect) -> Result<Slice> {
    // Ids of the current slice are the only ones known here.
    let seen: BTreeSet<ComponentId> = below.components.keys().copied().collect();
    check_effect(p, n, e, below, &seen).map_err(|reason| Error::InvalidEffect { at: p.id, reason })?;
    Ok(apply_unchecked(below, e))
}

fn seen_in_base(base: &Slice) -> BTreeSet<ComponentId> {
    base.components.keys().copied().collect()
}

/// Replays the effects along `order`.
fn replay_order(
    complex: &SliceComplex,
    points: &BTreeMap<PointId, CriticalPoint>,
    n: u32,
    order: &[PointId],
) -> Result<Replay> {
    let mut seen = seen_in_base(&complex.base);
    let mut slices = vec![complex.base.clone()];
    for &z in order {
        let p = points.get(&z).ok_or(Error::UnknownId(z))?;
        let e = complex.effects.get(&z).ok_or_else(|| Error::InvalidEffect {
            at: z,
            reason: "no effect declared".into(),
        })?;
        let below = slices.last().expect("nonempty");
        check_effect(p, n, e, below, &seen).map_err(|reason| Error::InvalidEffect { at: z, reason })?;
        seen.extend(e.outputs.iter().map(|&(c, _)| c));
        slices.push(apply_unchecked(below, e));
    }
    Ok(Replay {
        order: order.to_vec(),
        slices,
    })
}

pub fn replay(d: &MorseDatum) -> Result<Replay> {
    replay_order(&d.slices, &d.points, d.n(), &d.level_order())
}

/// True iff the level component through interior point `z` touches `Y`.
/// At the singular level this component is the union of the effect's
/// inputs, so it touches `Y` iff one of them does.
pub fn joinable_to_y(d: &MorseDatum, z: PointId) -> Result<bool> {
    let p = d.point(z)?;
    if p.kind != Kind::Interior {
        return Err(Error::NotInterior(z));
    }
    let r = replay(d)?;
    Ok(joinable_in(&r, &d.slices, z))
}

fn joinable_in(r: &Replay, complex: &SliceComplex, z: PointId) -> bool {
    let below = r.below(z).expect("point in replay");
    complex.effects[&z]
        .inputs
        .iter()
        .any(|c| below.touches_y(*c) == Some(true))
}

/// The slice containing the non-critical level `y`.
pub fn slice_at(d: &MorseDatum, y: &Value) -> Result<Slice> {
    if d.is_critical_value(y) {
        return Err(Error::CriticalLevel(crate::value::format(y)));
    }
    let r = replay(d)?;
    let i = r
        .order
        .iter()
        .filter(|z| &d.points[z].value < y)
        .count();
    Ok(r.slices[i].clone())
}

pub fn no_closed_components(d: &MorseDatum, y: &Value) -> Result<bool> {
    Ok(slice_at(d, y)?.all_touch_y())
}

/// Checks (TSA1)–(TSA5) for the levels `a < c < dd < b`; for `n = 1` the
/// collapsed pattern `dd = a`, `b = c` is expected.
pub fn tsa_check(d: &MorseDatum, a: &Value, c: &Value, dd: &Value, b: &Value) -> Result<bool> {
    let n = d.n();
    for lvl in [a, c, dd, b] {
        if d.is_critical_value(lvl) || !crate::value::in_open_unit(lvl) {
            return Err(Error::BadLevels(format!(
                "level {} must be a non-critical value in (0,1)",
                crate::value::format(lvl)
            )));
        }
    }
    let ordered = if n == 1 {
        dd == a && b == c && a < c
    } else {
        a < c && c < dd && dd < b
    };
    if !ordered {
        return Err(Error::BadLevels(if n == 1 {
            "n = 1 needs d = a, b = c and a < c".into()
        } else {
            "need 0 < a < c < d < b < 1".into()
        }));
    }

    let low = |p: &CriticalPoint| p.index == 0 || (p.kind == Kind::BoundaryStable && p.index == 1);
    let first = |p: &CriticalPoint| p.kind == Kind::Interior && p.index == 1;
    let last = |p: &CriticalPoint| p.kind == Kind::Interior && p.index == n;
    let high = |p: &CriticalPoint| {
        p.index == n + 1 || (p.kind == Kind::BoundaryUnstable && p.index == n)
    };
    let single_level = |pred: &dyn Fn(&CriticalPoint) -> bool| {
        let vals: BTreeSet<&Value> = d.points.values().filter(|p| pred(p)).map(|p| &p.value).collect();
        vals.len() <= 1
    };

    for p in d.points.values() {
        let v = &p.value;
        let ok = if v < a {
            low(p)
        } else if v < c {
            first(p)
        } else if v < dd {
            n > 1 && !low(p) && !first(p) && !last(p) && !high(p)
        } else if v < b {
            last(p)
        } else {
            high(p)
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(single_level(&first) && single_level(&last))
}

/// Smallest id not used by any component of the complex.
pub(crate) fn next_component_id(complex: &SliceComplex) -> u32 {
    let mut max = complex.base.components.keys().map(|c| c.0).max();
    for e in complex.effects.values() {
        for c in e.inputs.iter().chain(e.outputs.iter().map(|(c, _)| c)) {
            max = max.max(Some(c.0));
        }
    }
    max.map_or(0, |m| m + 1)
}

struct UnionFind {
    parent: BTreeMap<ComponentId, ComponentId>,
}

impl UnionFind {
    fn new() -> Self {
        UnionFind {
            parent: BTreeMap::new(),
        }
    }

    fn find(&mut self, c: ComponentId) -> ComponentId {
        let p = *self.parent.entry(c).or_insert(c);
        if p == c {
            return c;
        }
        let root = self.find(p);
        self.parent.insert(c, root);
        root
    }

    fn union(&mut self, a: ComponentId, b: ComponentId) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent.insert(ra.max(rb), ra.min(rb));
        }
    }

    fn add_effect(&mut self, e: &ComponentEffect) {
        let mut ids = e.inputs.iter().chain(e.outputs.iter().map(|(c, _)| c));
        if let Some(&first) = ids.next() {
            self.find(first);
            for &c in ids {
                self.union(first, c);
            }
        }
    }
}

/// Partition of `ids` induced by two consecutive effects.
fn connectivity(
    ids: &BTreeSet<ComponentId>,
    first: &ComponentEffect,
    second: &ComponentEffect,
) -> BTreeMap<ComponentId, ComponentId> {
    let mut uf = UnionFind::new();
    uf.add_effect(first);
    uf.add_effect(second);
    // Canonical labelling: smallest id of each class among `ids`.
    let mut label: BTreeMap<ComponentId, ComponentId> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for &c in ids {
        let root = uf.find(c);
        let l = *label.entry(root).or_insert(c);
        out.insert(c, l);
    }
    out
}

type Renaming = BTreeMap<ComponentId, ComponentId>;

/// Matches `target` and `got` up to renaming the components present in
/// only one of them, pairing equal `touches_Y` flags in id order.
fn relabel(target: &Slice, got: &Slice) -> Option<Renaming> {
    let only = |a: &Slice, b: &Slice, y: bool| -> Vec<ComponentId> {
        a.components
            .iter()
            .filter(|&(c, &f)| f == y && !b.components.contains_key(c))
            .map(|(&c, _)| c)
            .collect()
    };
    let mut rename = Renaming::new();
    for y in [true, false] {
        let (from, to) = (only(target, got, y), only(got, target, y));
        if from.len() != to.len() {
            return None;
        }
        rename.extend(from.into_iter().zip(to));
    }
    for (c, &f) in &target.components {
        if got.components.get(c).is_some_and(|&g| g != f) {
            return None;
        }
    }
    Some(rename)
}

/// Classes of a connectivity labelling, with ids passed through `map`.
fn partition(
    labels: &BTreeMap<ComponentId, ComponentId>,
    map: impl Fn(ComponentId) -> ComponentId,
) -> BTreeSet<BTreeSet<ComponentId>> {
    let mut classes: BTreeMap<ComponentId, BTreeSet<ComponentId>> = BTreeMap::new();
    for (&c, &l) in labels {
        classes.entry(l).or_default().insert(map(c));
    }
    classes.into_values().collect()
}

/// Candidate effects for point `p` on slice `below`. Inputs are drawn from
/// `inputs`, created ids from `pool`. Ordered by preference: the original
/// effect kind first, then inputs touching Y, then smaller ids.
fn candidates(
    p: &CriticalPoint,
    n: u32,
    prefer: EffectKind,
    below: &Slice,
    inputs: &[ComponentId],
    pool: &[ComponentId],
) -> Vec<ComponentEffect> {
    let mut ins: Vec<ComponentId> = inputs
        .iter()
        .copied()
        .filter(|c| below.components.contains_key(c))
        .collect();
    ins.sort_by_key(|c| (!below.components[c], *c));
    ins.dedup();
    let mut out = Vec::new();
    for shape in allowed_shapes(p.kind, p.index, n) {
        let kind = label_for(p.kind, shape);
        match shape {
            Shape::Create => {
                for &o in pool {
                    out.push(ComponentEffect { kind, inputs: vec![], outputs: vec![(o, false)] });
                }
            }
            Shape::Destroy => {
                for &c in &ins {
                    out.push(ComponentEffect { kind, inputs: vec![c], outputs: vec![] });
                }
            }
            Shape::Same => {
                for &c in &ins {
                    for y in [true, false] {
                        out.push(ComponentEffect { kind, inputs: vec![c], outputs: vec![(c, y)] });
                    }
                }
            }
            Shape::Join => {
                for (i, &a) in ins.iter().enumerate() {
                    for &b in &ins[i + 1..] {
                        for &o in pool {
                            for y in [true, false] {
                                out.push(ComponentEffect { kind, inputs: vec![a, b], outputs: vec![(o, y)] });
                            }
                        }
                    }
                }
            }
            Shape::Cut => {
                for &c in &ins {
                    for (i, &o1) in pool.iter().enumerate() {
                        for &o2 in &pool[i + 1..] {
                            for (y1, y2) in [(true, true), (true, false), (false, true), (false, false)] {
                                out.push(ComponentEffect {
                                    kind,
                                    inputs: vec![c],
                                    outputs: vec![(o1, y1), (o2, y2)],
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort_by_key(|e| e.kind != prefer);
    out
}

/// Exchanges two adjacent effects `x` (lower) and `y` (upper) so that `y`
/// is applied first, keeping the slice above both unchanged and the
/// connectivity between the outer slices intact. Effects are relabelled
/// when `y` acts on something `x` created or modified.
#[allow(clippy::too_many_arguments)]
fn swap_adjacent(
    px: &CriticalPoint,
    py: &CriticalPoint,
    n: u32,
    x: &ComponentEffect,
    y: &ComponentEffect,
    before: &Slice,
    seen: &BTreeSet<ComponentId>,
    next_id: &mut u32,
) -> Option<(ComponentEffect, ComponentEffect, Renaming)> {
    let mid = apply_unchecked(before, x);
    let after = apply_unchecked(&mid, y);
    let outer: BTreeSet<ComponentId> = before
        .components
        .keys()
        .chain(after.components.keys())
        .copied()
        .collect();
    let target_conn = connectivity(&outer, x, y);

    // Accepts the exchange if the slice above matches up to renaming
    // components the pair created; returns that renaming.
    let try_pair = |ny: &ComponentEffect, nx: &ComponentEffect| -> Option<Renaming> {
        let mut seen = seen.clone();
        check_effect(py, n, ny, before, &seen).ok()?;
        seen.extend(ny.outputs.iter().map(|&(c, _)| c));
        let mid2 = apply_unchecked(before, ny);
        check_effect(px, n, nx, &mid2, &seen).ok()?;
        let after2 = apply_unchecked(&mid2, nx);
        let rename = relabel(&after, &after2)?;
        let outer2: BTreeSet<ComponentId> = before
            .components
            .keys()
            .chain(after2.components.keys())
            .copied()
            .collect();
        let renamed = |c: ComponentId| rename.get(&c).copied().unwrap_or(c);
        let want = partition(&target_conn, renamed);
        (partition(&connectivity(&outer2, ny, nx), |c| c) == want).then_some(rename)
    };

    if let Some(rename) = try_pair(y, x) {
        return Some((y.clone(), x.clone(), rename));
    }

    let temps = [ComponentId(*next_id), ComponentId(*next_id + 1)];
    let mut pool: Vec<ComponentId> = after
        .components
        .keys()
        .filter(|c| !before.components.contains_key(c))
        .copied()
        .collect();
    pool.extend(temps);

    let mut local: Vec<ComponentId> = x.inputs.clone();
    local.extend(y.inputs.iter().filter(|c| before.components.contains_key(c)));
    let everything: Vec<ComponentId> = before.components.keys().copied().collect();

    for input_set in [&local, &everything] {
        for ny in candidates(py, n, y.kind, before, input_set, &pool) {
            let mid2 = apply_unchecked(before, &ny);
            let mut x_inputs: Vec<ComponentId> = x.inputs.clone();
            x_inputs.extend(ny.outputs.iter().map(|&(c, _)| c));
            x_inputs.extend(input_set.iter().copied());
            let x_pool: Vec<ComponentId> = pool
                .iter()
                .copied()
                .filter(|c| !ny.outputs.iter().any(|(o, _)| o == c))
                .collect();
            for nx in candidates(px, n, x.kind, &mid2, &x_inputs, &x_pool) {
                if let Some(rename) = try_pair(&ny, &nx) {
                    let used_temp = ny
                        .outputs
                        .iter()
                        .chain(nx.outputs.iter())
                        .any(|(c, _)| temps.contains(c));
                    if used_temp {
                        *next_id += 2;
                    }
                    return Some((ny, nx, rename));
                }
            }
        }
    }
    None
}

/// Re-sequences the effects from `old_order` to the level order of
/// `points` by adjacent exchanges, relabelling as needed.
pub(crate) fn resequence(
    complex: &SliceComplex,
    points: &BTreeMap<PointId, CriticalPoint>,
    n: u32,
    old_order: &[PointId],
) -> Result<SliceComplex> {
    let mut new_order: Vec<&CriticalPoint> = points.values().collect();
    new_order.sort_by(|a, b| a.value.cmp(&b.value).then(a.id.cmp(&b.id)));
    let rank: BTreeMap<PointId, usize> = new_order.iter().enumerate().map(|(i, p)| (p.id, i)).collect();

    let mut out = complex.clone();
    let mut order = old_order.to_vec();
    let mut next_id = next_component_id(complex);
    // Insertion sort; each exchange replays the prefix below it.
    for i in 1..order.len() {
        let mut j = i;
        while j > 0 && rank[&order[j - 1]] > rank[&order[j]] {
            let (lo, hi) = (order[j - 1], order[j]);
            let prefix = replay_order(&out, points, n, &order[..j - 1])?;
            let before = prefix.top().clone();
            let mut seen = seen_in_base(&out.base);
            for z in &order[..j - 1] {
                seen.extend(out.effects[z].outputs.iter().map(|&(c, _)| c));
            }
            let (ny, nx, rename) = swap_adjacent(
                &points[&lo],
                &points[&hi],
                n,
                &out.effects[&lo],
                &out.effects[&hi],
                &before,
                &seen,
                &mut next_id,
            )
            .ok_or(Error::SliceConflict { lower: lo, upper: hi })?;
            for (z, e) in out.effects.iter_mut() {
                if *z != lo && *z != hi {
                    for (&from, &to) in &rename {
                        e.rename(from, to);
                    }
                }
            }
            out.effects.insert(hi, ny);
            out.effects.insert(lo, nx);
            order.swap(j - 1, j);
            j -= 1;
        }
    }
    Ok(out)
}

/// Renames a component in every effect (used when a cancellation removes
/// the effect that created it).
pub(crate) fn rename_component(complex: &mut SliceComplex, from: ComponentId, to: ComponentId) {
    for e in complex.effects.values_mut() {
        e.rename(from, to);
    }
}

pub(crate) fn complex_violations(d: &MorseDatum, points_ok: bool) -> Vec<Violation> {
    let mut report = Vec::new();
    for z in d.slices.effects.keys() {
        if !d.points.contains_key(z) {
            report.push(Violation::DanglingEffect(*z));
        }
    }
    for z in d.points.keys() {
        if !d.slices.effects.contains_key(z) {
            report.push(Violation::MissingEffect(*z));
        }
    }
    if !report.is_empty() || !points_ok {
        return report;
    }
    let r = match replay(d) {
        Ok(r) => r,
        Err(e) => {
            report.push(Violation::Slice(e.to_string()));
            return report;
        }
    };
    if d.flags.sigma0 && !d.slices.base.all_touch_y() {
        report.push(Violation::ClosedComponent("Sigma_0"));
    }
    if d.flags.sigma1 && !r.top().all_touch_y() {
        report.push(Violation::ClosedComponent("Sigma_1"));
    }
    if d.flags.omega && has_closed_omega_component(d, &r) {
        report.push(Violation::ClosedComponent("Omega"));
    }
    report
}

/// A class of components linked through effects is a closed component of
/// Ω iff it never touches Y and meets neither end slice.
fn has_closed_omega_component(d: &MorseDatum, r: &Replay) -> bool {
    let mut uf = UnionFind::new();
    let mut open: BTreeSet<ComponentId> = BTreeSet::new();
    for s in [&d.slices.base, r.top()] {
        open.extend(s.components.keys().copied());
    }
    for s in &r.slices {
        for (&c, &y) in &s.components {
            uf.find(c);
            if y {
                open.insert(c);
            }
        }
    }
    for z in &r.order {
        uf.add_effect(&d.slices.effects[z]);
    }
    let open_roots: BTreeSet<ComponentId> = open.into_iter().map(|c| uf.find(c)).collect();
    let all: Vec<ComponentId> = uf.parent.keys().copied().collect();
    all.into_iter().any(|c| {
        let root = uf.find(c);
        !open_roots.contains(&root)
    })
}
