//! Drivers that compose the moves into the global statements: scheduled
//! levels, the technically-still-acceptable layout, joinability of interior
//! points to the boundary and the full handle-splitting pipeline.

use std::fmt;

use crate::error::{Error, Result, Stage};
use crate::morse_data::{validate_datum, Configuration, CriticalPoint, Kind, MorseDatum, PointId};
use crate::moves::{realize_configuration, rearrange_point, split_interior, Script};
use crate::slice_topology::{self, joinable_to_y, EffectKind};
use crate::value::{self, ratio, Value};

/// Levels of the scheduled configuration, by kind and index:
/// boundary stable at `(3k+1)/(3n+6)`, interior at `(3k+2)/(3n+6)`,
/// boundary unstable at `(3k+3)/(3n+6)`.
pub fn scheduled_level(kind: Kind, k: u32, n: u32) -> Value {
    let offset = match kind {
        Kind::BoundaryStable => 1,
        Kind::Interior => 2,
        Kind::BoundaryUnstable => 3,
    };
    ratio(3 * i64::from(k) + offset, 3 * i64::from(n) + 6)
}

pub fn schedule_levels(d: &MorseDatum) -> Configuration {
    d.points
        .values()
        .map(|p| (p.id, scheduled_level(p.kind, p.index, d.n())))
        .collect()
}

/// Midpoint of the normal-form segment holding a point of this kind and
/// index; segment `j` is `[j/(2n+4), (j+1)/(2n+4)]`.
pub fn final_level(kind: Kind, k: u32, n: u32) -> Value {
    let (k, n) = (i64::from(k), i64::from(n));
    let num = match kind {
        Kind::Interior if k == 0 => 1,
        Kind::Interior => 4 * n + 7,
        Kind::BoundaryUnstable => 4 * k + 3,
        Kind::BoundaryStable => 4 * k + 1,
    };
    ratio(num, 4 * n + 8)
}

fn final_levels(d: &MorseDatum) -> Configuration {
    d.points
        .values()
        .map(|p| (p.id, final_level(p.kind, p.index, d.n())))
        .collect()
}

/// Non-critical levels `a < c < dd < b` witnessing (TSA1)–(TSA5), or
/// `None` if the critical points are not laid out that way. For `n = 1`
/// the collapsed pattern `dd = a`, `b = c` is returned.
pub fn tsa_levels(d: &MorseDatum) -> Option<(Value, Value, Value, Value)> {
    let n = d.n();
    let group = |p: &CriticalPoint| -> usize {
        let low = p.index == 0 || (p.kind == Kind::BoundaryStable && p.index == 1);
        let first = p.kind == Kind::Interior && p.index == 1;
        let last = p.kind == Kind::Interior && p.index == n;
        let high = p.index == n + 1 || (p.kind == Kind::BoundaryUnstable && p.index == n);
        if n == 1 {
            if low {
                0
            } else if first {
                1
            } else {
                2
            }
        } else if low {
            0
        } else if first {
            1
        } else if last {
            3
        } else if high {
            4
        } else {
            2
        }
    };
    let groups = if n == 1 { 3 } else { 5 };
    let mut cuts = Vec::new();
    for i in 0..groups - 1 {
        let lo = d
            .points
            .values()
            .filter(|p| group(p) <= i)
            .map(|p| p.value.clone())
            .max()
            .unwrap_or_else(|| value::int(0));
        let hi = d
            .points
            .values()
            .filter(|p| group(p) > i)
            .map(|p| p.value.clone())
            .min()
            .unwrap_or_else(|| value::int(1));
        if lo >= hi {
            return None;
        }
        cuts.push(&lo + (&hi - &lo) * ratio(i as i64 + 1, groups as i64));
    }
    let (a, c, dd, b) = if n == 1 {
        (cuts[0].clone(), cuts[1].clone(), cuts[0].clone(), cuts[1].clone())
    } else {
        (cuts[0].clone(), cuts[1].clone(), cuts[2].clone(), cuts[3].clone())
    };
    slice_topology::tsa_check(d, &a, &c, &dd, &b)
        .ok()
        .filter(|&ok| ok)
        .map(|_| (a, c, dd, b))
}

fn interior_ids(d: &MorseDatum, pred: impl Fn(u32) -> bool) -> Vec<PointId> {
    d.points
        .values()
        .filter(|p| p.kind == Kind::Interior && pred(p.index))
        .map(|p| p.id)
        .collect()
}

fn equally_spaced(from: &Value, to: &Value, count: usize) -> Vec<Value> {
    (1..=count)
        .map(|i| from + (to - from) * ratio(i as i64, count as i64 + 1))
        .collect()
}

/// Greedy loop: repeatedly takes the smallest-id point of `pending` that,
/// once moved to the level chosen by `target`, is joinable to `Y` there.
fn greedy_move(
    d: &MorseDatum,
    pending: Vec<PointId>,
    level: &Value,
    target: impl Fn(&MorseDatum, PointId, usize) -> Value,
    script: &mut Script,
) -> Result<MorseDatum> {
    let mut cur = d.clone();
    let mut pending = pending;
    pending.sort();
    for step in 0..pending.len() {
        let mut chosen = None;
        for (pos, &z) in pending.iter().enumerate() {
            let to = target(&cur, z, step);
            let Ok((next, rec)) = rearrange_point(&cur, z, to) else {
                continue;
            };
            if joinable_to_y(&next, z)? {
                chosen = Some((pos, next, rec));
                break;
            }
        }
        let (pos, next, rec) = chosen.ok_or_else(|| Error::StuckNoJoinablePoint {
            level: value::format(level),
        })?;
        pending.remove(pos);
        script.push(rec);
        cur = next;
    }
    Ok(cur)
}

/// Rearranges interior points so that each of index `1..=n` (codimension at
/// least two) or `2..=n-1` (codimension one) can be joined to the boundary
/// inside its level set.
pub fn ensure_joinable(d: &MorseDatum) -> Result<(MorseDatum, Script)> {
    if !d.flags.all_set() {
        return Err(Error::Precondition(
            "Omega, Sigma_0 and Sigma_1 must be asserted to have no closed connected components".into(),
        ));
    }
    let n = d.n();
    let mut script = Script::new();
    if d.ambient.codim() == 1 {
        if !crate::morse_data::is_index_monotone(&d.configuration(), d.points.values())? {
            return Err(Error::Precondition("critical values must be index-monotone".into()));
        }
        check_joinable(d, |k| k >= 2 && k < n)?;
        return Ok((d.clone(), script));
    }

    let (a, c, dd, b) = tsa_levels(d)
        .ok_or_else(|| Error::Precondition("the function is not technically still acceptable".into()))?;
    let firsts = interior_ids(d, |k| k == 1);
    let mut cur = d.clone();
    if let Some(&z) = firsts.first() {
        let rho = d.points[&z].value.clone();
        let count = firsts.len();
        let lows = equally_spaced(&a, &rho, count);
        if n == 1 {
            // Points whose feet lie on two components go down, the rest up.
            let mut highs = equally_spaced(&rho, &c, count);
            highs.reverse();
            cur = greedy_move(
                &cur,
                firsts,
                &rho,
                |cur, z, step| {
                    if cur.slices.effects[&z].kind == EffectKind::Merge {
                        lows[step].clone()
                    } else {
                        highs[step].clone()
                    }
                },
                &mut script,
            )?;
        } else {
            cur = greedy_move(&cur, firsts, &rho, |_, _, step| lows[step].clone(), &mut script)?;
        }
    }
    if n > 1 {
        let lasts = interior_ids(&cur, |k| k == n);
        if let Some(&z) = lasts.first() {
            let rho = cur.points[&z].value.clone();
            let mut highs = equally_spaced(&rho, &b, lasts.len());
            highs.reverse();
            cur = greedy_move(&cur, lasts, &rho, |_, _, step| highs[step].clone(), &mut script)?;
        }
    }
    let _ = dd;
    check_joinable(&cur, |k| k >= 1 && k <= n)?;
    Ok((cur, script))
}

fn check_joinable(d: &MorseDatum, pred: impl Fn(u32) -> bool) -> Result<()> {
    for z in interior_ids(d, pred) {
        if !joinable_to_y(d, z)? {
            return Err(Error::StuckNoJoinablePoint {
                level: value::format(&d.points[&z].value),
            });
        }
    }
    Ok(())
}

/// Which global statement a decomposition realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Codimension at least two: `2n + 4` segments at `j/(2n+4)`.
    Full,
    /// Codimension one: low part, single-point middle pieces, high part.
    CodimOne,
}

/// Segment label. In the full regime the label `i` of `Ω_i` is stored as
/// `2i`, so `Ω_{-1/2}` is `-1`; in codimension one it is the position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentLabel {
    Twice(i64),
    Position(usize),
}

impl fmt::Display for SegmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SegmentLabel::Twice(t) if t % 2 == 0 => write!(f, "{}", t / 2),
            SegmentLabel::Twice(t) => write!(f, "{t}/2"),
            SegmentLabel::Position(p) => write!(f, "#{p}"),
        }
    }
}

/// What a segment is allowed to contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    /// Only interior points of this index (0 or n+1): handle attachments.
    Handles(u32),
    /// Only boundary unstable points of this index.
    RightProduct(u32),
    /// Only boundary stable points of this index.
    LeftProduct(u32),
    /// Codimension one bottom piece: indices 0 and 1 of any kind.
    Low,
    /// Codimension one top piece: indices n and n+1 of any kind.
    High,
    /// Exactly one boundary point of this kind and index.
    Single(Kind, u32),
    /// Nothing to split (`n = 1` in codimension one).
    Trivial,
}

impl Certificate {
    fn admits(&self, p: &CriticalPoint, n: u32) -> bool {
        match *self {
            Certificate::Handles(k) => p.kind == Kind::Interior && p.index == k,
            Certificate::RightProduct(k) => p.kind == Kind::BoundaryUnstable && p.index == k,
            Certificate::LeftProduct(k) => p.kind == Kind::BoundaryStable && p.index == k,
            Certificate::Low => p.index <= 1,
            Certificate::High => p.index >= n,
            Certificate::Single(kind, k) => p.kind == kind && p.index == k,
            Certificate::Trivial => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub label: SegmentLabel,
    pub lo: Value,
    pub hi: Value,
    pub points: Vec<PointId>,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub regime: Regime,
    pub n: u32,
    pub segments: Vec<Segment>,
}

fn points_in(d: &MorseDatum, lo: &Value, hi: &Value) -> Vec<PointId> {
    let mut ids: Vec<&CriticalPoint> = d
        .points
        .values()
        .filter(|p| &p.value > lo && &p.value < hi)
        .collect();
    ids.sort_by(|a, b| a.value.cmp(&b.value).then(a.id.cmp(&b.id)));
    ids.into_iter().map(|p| p.id).collect()
}

fn full_decomposition(d: &MorseDatum) -> Decomposition {
    let n = d.n();
    let denom = 2 * i64::from(n) + 4;
    let segments = (-1..=2 * i64::from(n) + 2)
        .map(|t| {
            let lo = ratio(t + 1, denom);
            let hi = ratio(t + 2, denom);
            let certificate = if t == -1 {
                Certificate::Handles(0)
            } else if t == 2 * i64::from(n) + 2 {
                Certificate::Handles(n + 1)
            } else if t % 2 == 0 {
                Certificate::RightProduct((t / 2) as u32)
            } else {
                Certificate::LeftProduct(((t + 1) / 2) as u32)
            };
            Segment {
                label: SegmentLabel::Twice(t),
                points: points_in(d, &lo, &hi),
                lo,
                hi,
                certificate,
            }
        })
        .collect();
    Decomposition {
        regime: Regime::Full,
        n,
        segments,
    }
}

fn codim_one_decomposition(d: &MorseDatum) -> Decomposition {
    let n = d.n();
    let (zero, one) = (value::int(0), value::int(1));
    if n == 1 {
        return Decomposition {
            regime: Regime::CodimOne,
            n,
            segments: vec![Segment {
                label: SegmentLabel::Position(0),
                points: points_in(d, &zero, &one),
                lo: zero,
                hi: one,
                certificate: Certificate::Trivial,
            }],
        };
    }
    let mut sorted: Vec<&CriticalPoint> = d.points.values().collect();
    sorted.sort_by(|a, b| a.value.cmp(&b.value).then(a.id.cmp(&b.id)));
    let low: Vec<&CriticalPoint> = sorted.iter().copied().filter(|p| p.index <= 1).collect();
    let middle: Vec<&CriticalPoint> = sorted
        .iter()
        .copied()
        .filter(|p| p.index >= 2 && p.index < n)
        .collect();

    // Cut points between consecutive pieces: midpoints of adjacent values.
    let mut pieces: Vec<Vec<&CriticalPoint>> = vec![low];
    pieces.extend(middle.into_iter().map(|p| vec![p]));
    pieces.push(sorted.iter().copied().filter(|p| p.index >= n).collect());
    let mut cuts = vec![zero];
    for w in pieces.windows(2) {
        let below = w[0].iter().map(|p| p.value.clone()).max();
        let above = w[1].iter().map(|p| p.value.clone()).min();
        let last = cuts.last().expect("nonempty").clone();
        let cut = match (below, above) {
            (Some(x), Some(y)) => value::midpoint(&x, &y),
            (Some(x), None) => value::midpoint(&x, &value::int(1)),
            (None, Some(y)) => value::midpoint(&last, &y),
            (None, None) => value::midpoint(&last, &value::int(1)),
        };
        cuts.push(cut);
    }
    cuts.push(one);
    let last = pieces.len() - 1;
    let segments = pieces
        .iter()
        .enumerate()
        .map(|(i, piece)| {
            let certificate = if i == 0 {
                Certificate::Low
            } else if i == last {
                Certificate::High
            } else {
                Certificate::Single(piece[0].kind, piece[0].index)
            };
            Segment {
                label: SegmentLabel::Position(i),
                points: points_in(d, &cuts[i], &cuts[i + 1]),
                lo: cuts[i].clone(),
                hi: cuts[i + 1].clone(),
                certificate,
            }
        })
        .collect();
    Decomposition {
        regime: Regime::CodimOne,
        n,
        segments,
    }
}

fn blocked(stage: Stage, step: impl Into<String>) -> impl FnOnce(Error) -> Error {
    let step = step.into();
    move |reason| Error::PipelineBlocked {
        stage,
        step,
        reason: Box::new(reason),
    }
}

/// Drives a datum to normal form: interior handles of index `1..=n` (or
/// `2..=n-1` in codimension one) are split into half-handles and the
/// critical points are laid out in homogeneous segments.
pub fn global_split(d: &MorseDatum) -> Result<(MorseDatum, Decomposition, Script)> {
    let report = validate_datum(d);
    if !report.is_empty() {
        return Err(Error::Validation(report.iter().map(|v| v.to_string()).collect()));
    }
    if !d.flags.all_set() {
        return Err(blocked(Stage::Joinable, "flags")(Error::Precondition(
            "Omega, Sigma_0 and Sigma_1 must be asserted to have no closed connected components".into(),
        )));
    }
    let n = d.n();
    let mut script = Script::new();
    let mut cur = d.clone();

    if d.ambient.codim() == 1 {
        let splittable = |d: &MorseDatum| interior_ids(d, |k| k >= 2 && k < n);
        let distinct = d.critical_values().len() == d.points.len();
        let monotone = crate::morse_data::is_index_monotone(&d.configuration(), d.points.values())?;
        if !(monotone && distinct) {
            let mut sorted: Vec<&CriticalPoint> = d.points.values().collect();
            sorted.sort_by(|a, b| a.index.cmp(&b.index).then(a.value.cmp(&b.value)).then(a.id.cmp(&b.id)));
            let total = sorted.len() as i64 + 1;
            let xi: Configuration = sorted
                .iter()
                .enumerate()
                .map(|(i, p)| (p.id, ratio(i as i64 + 1, total)))
                .collect();
            let (next, s) = realize_configuration(&cur, &xi).map_err(blocked(Stage::Schedule, "realize_configuration"))?;
            script.extend(s);
            cur = next;
        }
        let (next, s) = ensure_joinable(&cur).map_err(blocked(Stage::Joinable, "ensure_joinable"))?;
        script.extend(s);
        cur = next;
        for z in splittable(&cur) {
            let (next, rec) = split_interior(&cur, z).map_err(blocked(Stage::Split, format!("split_interior {z}")))?;
            script.push(rec);
            cur = next;
        }
        let dec = codim_one_decomposition(&cur);
        return finish(cur, dec, script);
    }

    if !interior_ids(&cur, |k| k >= 1 && k <= n).is_empty() {
        let (next, s) = realize_configuration(&cur, &schedule_levels(&cur))
            .map_err(blocked(Stage::Schedule, "realize_configuration"))?;
        script.extend(s);
        cur = next;
        if tsa_levels(&cur).is_none() {
            return Err(blocked(Stage::Tsa, "tsa_check")(Error::Precondition(
                "scheduled levels are not technically still acceptable".into(),
            )));
        }
        let (next, s) = ensure_joinable(&cur).map_err(blocked(Stage::Joinable, "ensure_joinable"))?;
        script.extend(s);
        cur = next;
        for z in interior_ids(&cur, |k| k >= 1 && k <= n) {
            let (next, rec) = split_interior(&cur, z).map_err(blocked(Stage::Split, format!("split_interior {z}")))?;
            script.push(rec);
            cur = next;
        }
    }
    let (next, s) = realize_configuration(&cur, &final_levels(&cur))
        .map_err(blocked(Stage::FinalOrder, "realize_configuration"))?;
    script.extend(s);
    cur = next;
    let dec = full_decomposition(&cur);
    finish(cur, dec, script)
}

fn finish(d: MorseDatum, dec: Decomposition, script: Script) -> Result<(MorseDatum, Decomposition, Script)> {
    let problems = decomposition_problems(&d, &dec);
    if let Some(first) = problems.into_iter().next() {
        return Err(blocked(Stage::Decompose, "verify_decomposition")(Error::Precondition(first)));
    }
    Ok((d, dec, script))
}

pub fn verify_decomposition(d: &MorseDatum, dec: &Decomposition) -> bool {
    decomposition_problems(d, dec).is_empty()
}

/// Every way `dec` fails to describe `d`; empty iff it is a valid
/// decomposition.
pub fn decomposition_problems(d: &MorseDatum, dec: &Decomposition) -> Vec<String> {
    let mut problems = Vec::new();
    let n = d.n();
    if dec.n != n {
        problems.push(format!("decomposition is for n={} but the datum has n={n}", dec.n));
        return problems;
    }
    if dec.segments.is_empty() {
        if !d.points.is_empty() {
            problems.push("no segments but the datum has critical points".into());
        }
        return problems;
    }

    let mut seen: Vec<PointId> = Vec::new();
    for (i, seg) in dec.segments.iter().enumerate() {
        if seg.lo >= seg.hi {
            problems.push(format!("segment {} is empty or reversed", seg.label));
        }
        if i > 0 && dec.segments[i - 1].hi != seg.lo {
            problems.push(format!("segment {} does not start where the previous one ends", seg.label));
        }
        for id in &seg.points {
            let Some(p) = d.points.get(id) else {
                problems.push(format!("segment {} lists unknown point {id}", seg.label));
                continue;
            };
            if !(p.value > seg.lo && p.value < seg.hi) {
                problems.push(format!("point {id} lies outside segment {}", seg.label));
            }
            if !seg.certificate.admits(p, n) {
                problems.push(format!(
                    "segment {} ({:?}) holds {} index {}",
                    seg.label, seg.certificate, p.kind, p.index
                ));
            }
            seen.push(*id);
        }
    }
    seen.sort();
    let all: Vec<PointId> = d.points.keys().copied().collect();
    if seen != all {
        problems.push("segments do not list every critical point exactly once".into());
    }
    let first = &dec.segments[0];
    let last = dec.segments.last().expect("nonempty");
    if first.lo != value::int(0) || last.hi != value::int(1) {
        problems.push("segments must cover [0, 1]".into());
    }

    match dec.regime {
        Regime::Full => {
            let denom = 2 * i64::from(n) + 4;
            if dec.segments.len() as i64 != denom {
                problems.push(format!("expected {denom} segments, found {}", dec.segments.len()));
                return problems;
            }
            for (j, seg) in dec.segments.iter().enumerate() {
                let t = j as i64 - 1;
                let expected = if t == -1 {
                    Certificate::Handles(0)
                } else if t == denom - 2 {
                    Certificate::Handles(n + 1)
                } else if t % 2 == 0 {
                    Certificate::RightProduct((t / 2) as u32)
                } else {
                    Certificate::LeftProduct(((t + 1) / 2) as u32)
                };
                if seg.label != SegmentLabel::Twice(t) || seg.certificate != expected {
                    problems.push(format!("segment {j} has the wrong label or certificate"));
                }
                if seg.lo != ratio(j as i64, denom) || seg.hi != ratio(j as i64 + 1, denom) {
                    problems.push(format!("segment {j} is not [{j}/{denom}, {}/{denom}]", j + 1));
                }
            }
        }
        Regime::CodimOne => {
            if n == 1 {
                if dec.segments.len() != 1 || first.certificate != Certificate::Trivial {
                    problems.push("n = 1 in codimension one has the trivial decomposition".into());
                }
                return problems;
            }
            if dec.segments.len() < 2
                || first.certificate != Certificate::Low
                || last.certificate != Certificate::High
            {
                problems.push("codimension one pieces must start low and end high".into());
                return problems;
            }
            let middle = &dec.segments[1..dec.segments.len() - 1];
            let mut prev_index = 0;
            for seg in middle {
                match seg.certificate {
                    Certificate::Single(kind, k) if kind.is_boundary() && seg.points.len() == 1 => {
                        if k < prev_index {
                            problems.push(format!("index decreases at segment {}", seg.label));
                        }
                        prev_index = k;
                    }
                    _ => problems.push(format!(
                        "middle segment {} must hold exactly one boundary point",
                        seg.label
                    )),
                }
            }
        }
    }
    problems
}
