//! Line-oriented text formats for data, move scripts and decomposition
//! reports. Every line after the version header is a keyword followed by
//! `key=value` fields; `#` starts a comment.
//!
//! ```text
//! morse-datum 1
//! ambient m=4 n=2
//! flags omega=true sigma0=true sigma1=true
//! component id=0 touches_y=true
//! point id=0 kind=interior index=0 value=1/4 effect=birth in=- out=1:c
//! point id=1 kind=interior index=1 value=1/2 effect=merge in=0,1 out=2:y
//! edge from=0 to=1 count=1 locus=interior
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::morse_data::{validate_datum, Ambient, ComponentId, CriticalPoint, Flags, Kind, MorseDatum, PointId};
use crate::moves::{Move, MoveRecord, Script};
use crate::normal_form::{Certificate, Decomposition, Regime, Segment, SegmentLabel};
use crate::slice_topology::{ComponentEffect, EffectKind, Slice, SliceComplex};
use crate::trajectory::{FlowEdge, Locus, Multiplicity, TrajectoryGraph};
use crate::value::{self, Value};

pub const DATUM_HEADER: &str = "morse-datum 1";
pub const SCRIPT_HEADER: &str = "morse-script 1";
pub const DECOMPOSITION_HEADER: &str = "morse-decomposition 1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

type PResult<T> = std::result::Result<T, ParseError>;

struct Line<'a> {
    no: usize,
    keyword: &'a str,
    fields: Vec<(&'a str, &'a str, usize)>,
}

impl<'a> Line<'a> {
    fn err(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.no,
            column,
            message: message.into(),
        }
    }

    /// Splits the fields into exactly `keys`, in any order.
    fn take<const N: usize>(&self, keys: [&str; N]) -> PResult<[(&'a str, usize); N]> {
        let mut out = [("", 0); N];
        let mut seen = [false; N];
        for &(k, v, col) in &self.fields {
            let Some(i) = keys.iter().position(|&key| key == k) else {
                return Err(self.err(col, format!("unknown key `{k}` for `{}`", self.keyword)));
            };
            if seen[i] {
                return Err(self.err(col, format!("duplicate key `{k}`")));
            }
            seen[i] = true;
            out[i] = (v, col + k.len() + 1);
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(self.err(1, format!("`{}` is missing key `{}`", self.keyword, keys[i])));
        }
        Ok(out)
    }
}

/// Tokenizes a document and checks its header. Blank and comment lines are
/// dropped.
fn lines<'a>(text: &'a str, header: &str) -> PResult<Vec<Line<'a>>> {
    let mut out = Vec::new();
    let mut saw_header = false;
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        if !saw_header {
            if content.trim() != header {
                return Err(ParseError {
                    line: no,
                    column: 1,
                    message: format!("expected header `{header}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let mut tokens = Vec::new();
        let mut col = 0;
        for tok in content.split([' ', '\t']) {
            if !tok.is_empty() {
                tokens.push((tok, col + 1));
            }
            col += tok.len() + 1;
        }
        let (keyword, _) = tokens[0];
        let mut fields = Vec::new();
        for &(tok, col) in &tokens[1..] {
            let Some((k, v)) = tok.split_once('=') else {
                return Err(ParseError {
                    line: no,
                    column: col,
                    message: format!("expected key=value, found `{tok}`"),
                });
            };
            fields.push((k, v, col));
        }
        out.push(Line { no, keyword, fields });
    }
    if !saw_header {
        return Err(ParseError {
            line: 1,
            column: 1,
            message: format!("missing header `{header}`"),
        });
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(line: &Line, (s, col): (&str, usize)) -> PResult<T> {
    if s.is_empty() || (s.len() > 1 && s.starts_with('0')) || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(line.err(col, format!("expected a non-negative integer, found `{s}`")));
    }
    s.parse()
        .map_err(|_| line.err(col, format!("integer `{s}` out of range")))
}

fn boolean(line: &Line, (s, col): (&str, usize)) -> PResult<bool> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(line.err(col, format!("expected true or false, found `{s}`"))),
    }
}

fn rational(line: &Line, (s, col): (&str, usize)) -> PResult<Value> {
    value::parse(s).ok_or_else(|| line.err(col, format!("`{s}` is not a rational p/q in lowest terms")))
}

fn list(s: &str) -> Vec<&str> {
    if s == "-" {
        Vec::new()
    } else {
        s.split(',').collect()
    }
}

fn join_or_dash(items: Vec<String>) -> String {
    if items.is_empty() {
        "-".to_string()
    } else {
        items.join(",")
    }
}

fn parse_outputs(line: &Line, (s, col): (&str, usize)) -> PResult<Vec<(ComponentId, bool)>> {
    list(s)
        .into_iter()
        .map(|item| {
            let (id, flag) = item
                .split_once(':')
                .ok_or_else(|| line.err(col, format!("output `{item}` must be id:y or id:c")))?;
            let flag = match flag {
                "y" => true,
                "c" => false,
                _ => return Err(line.err(col, format!("output flag `{flag}` must be y or c"))),
            };
            Ok((ComponentId(num(line, (id, col))?), flag))
        })
        .collect()
}

/// Parses a datum document. Structural problems are reported with their
/// position; the datum itself is not validated (see [`load_datum`]).
pub fn parse_datum(text: &str) -> PResult<MorseDatum> {
    let lines = lines(text, DATUM_HEADER)?;
    let mut ambient = None;
    let mut flags = None;
    let mut base = BTreeMap::new();
    let mut points = BTreeMap::new();
    let mut effects = BTreeMap::new();
    let mut edges = BTreeMap::new();
    for line in &lines {
        match line.keyword {
            "ambient" => {
                let [m, n] = line.take(["m", "n"])?;
                if ambient.is_some() {
                    return Err(line.err(1, "duplicate ambient line"));
                }
                let a = Ambient::new(num(line, m)?, num(line, n)?)
                    .map_err(|e| line.err(m.1, e.to_string()))?;
                ambient = Some(a);
            }
            "flags" => {
                let [o, s0, s1] = line.take(["omega", "sigma0", "sigma1"])?;
                if flags.is_some() {
                    return Err(line.err(1, "duplicate flags line"));
                }
                flags = Some(Flags {
                    omega: boolean(line, o)?,
                    sigma0: boolean(line, s0)?,
                    sigma1: boolean(line, s1)?,
                });
            }
            "component" => {
                let [id, y] = line.take(["id", "touches_y"])?;
                let c = ComponentId(num(line, id)?);
                if base.insert(c, boolean(line, y)?).is_some() {
                    return Err(line.err(id.1, format!("duplicate component {c}")));
                }
            }
            "point" => {
                let [id, kind, index, val, effect, ins, outs] =
                    line.take(["id", "kind", "index", "value", "effect", "in", "out"])?;
                let pid = PointId(num(line, id)?);
                let kind_v = Kind::parse(kind.0).ok_or_else(|| line.err(kind.1, format!("unknown kind `{}`", kind.0)))?;
                let v = rational(line, val)?;
                if !value::in_open_unit(&v) {
                    return Err(line.err(val.1, "critical values must lie in the open interval (0,1)"));
                }
                let ek = EffectKind::parse(effect.0)
                    .ok_or_else(|| line.err(effect.1, format!("unknown effect `{}`", effect.0)))?;
                let inputs = list(ins.0)
                    .into_iter()
                    .map(|c| num(line, (c, ins.1)).map(ComponentId))
                    .collect::<PResult<Vec<_>>>()?;
                let outputs = parse_outputs(line, outs)?;
                let p = CriticalPoint {
                    id: pid,
                    index: num(line, index)?,
                    kind: kind_v,
                    value: v,
                };
                if points.insert(pid, p).is_some() {
                    return Err(line.err(id.1, format!("duplicate point {pid}")));
                }
                effects.insert(
                    pid,
                    ComponentEffect {
                        kind: ek,
                        inputs,
                        outputs,
                    },
                );
            }
            "edge" => {
                let [from, to, count, locus] = line.take(["from", "to", "count", "locus"])?;
                let (from, to) = (PointId(num(line, from)?), PointId(num(line, to)?));
                let count = match count.0 {
                    "?" => Multiplicity::Unknown,
                    _ => Multiplicity::Known(num(line, count)?),
                };
                let locus = Locus::parse(locus.0).ok_or_else(|| line.err(locus.1, format!("unknown locus `{}`", locus.0)))?;
                let e = FlowEdge { from, to, count, locus };
                if edges.insert((from, to), e).is_some() {
                    return Err(line.err(1, format!("duplicate edge {from} -> {to}")));
                }
            }
            other => return Err(line.err(1, format!("unknown line type `{other}`"))),
        }
    }
    let missing = |what: &str| ParseError {
        line: 1,
        column: 1,
        message: format!("document has no `{what}` line"),
    };
    let ambient = ambient.ok_or_else(|| missing("ambient"))?;
    let flags = flags.ok_or_else(|| missing("flags"))?;
    Ok(MorseDatum {
        ambient,
        points,
        graph: TrajectoryGraph::from_edges(edges.into_values()),
        slices: SliceComplex {
            base: Slice { components: base },
            effects,
        },
        flags,
    })
}

/// Parses and validates.
pub fn load_datum(text: &str) -> Result<MorseDatum> {
    let d = parse_datum(text)?;
    let report = validate_datum(&d);
    if report.is_empty() {
        Ok(d)
    } else {
        Err(Error::Validation(report.iter().map(|v| v.to_string()).collect()))
    }
}

/// Canonical text: points sorted by value then id, edges by endpoints.
pub fn serialize_datum(d: &MorseDatum) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{DATUM_HEADER}");
    let _ = writeln!(s, "ambient m={} n={}", d.ambient.m(), d.ambient.n());
    let _ = writeln!(
        s,
        "flags omega={} sigma0={} sigma1={}",
        d.flags.omega, d.flags.sigma0, d.flags.sigma1
    );
    for (c, y) in &d.slices.base.components {
        let _ = writeln!(s, "component id={c} touches_y={y}");
    }
    for id in d.level_order() {
        let p = &d.points[&id];
        let _ = write!(
            s,
            "point id={} kind={} index={} value={}",
            p.id,
            p.kind,
            p.index,
            value::format(&p.value)
        );
        match d.slices.effects.get(&id) {
            Some(e) => {
                let ins = join_or_dash(e.inputs.iter().map(|c| c.to_string()).collect());
                let outs = join_or_dash(
                    e.outputs
                        .iter()
                        .map(|(c, y)| format!("{c}:{}", if *y { 'y' } else { 'c' }))
                        .collect(),
                );
                let _ = writeln!(s, " effect={} in={ins} out={outs}", e.kind.as_str());
            }
            None => {
                let _ = writeln!(s, " effect=internal in=- out=-");
            }
        }
    }
    for e in d.graph.iter() {
        let _ = writeln!(
            s,
            "edge from={} to={} count={} locus={}",
            e.from,
            e.to,
            e.count,
            e.locus.as_str()
        );
    }
    s
}

fn format_why(why: &[String]) -> String {
    join_or_dash(why.to_vec())
}

pub fn serialize_script(script: &[MoveRecord]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{SCRIPT_HEADER}");
    for rec in script {
        let why = format_why(&rec.justification);
        let _ = match &rec.action {
            Move::Rearrange(moves) => {
                let moves: Vec<String> = moves
                    .iter()
                    .map(|(id, v)| format!("{id}:{}", value::format(v)))
                    .collect();
                writeln!(s, "rearrange moves={} why={why}", moves.join(","))
            }
            Move::Cancel { z, w } => writeln!(s, "cancel z={z} w={w} why={why}"),
            Move::Split { z, stable, unstable } => {
                writeln!(s, "split z={z} zs={stable} zu={unstable} why={why}")
            }
        };
    }
    s
}

pub fn parse_script(text: &str) -> PResult<Script> {
    let mut script = Script::new();
    for line in lines(text, SCRIPT_HEADER)? {
        let line = &line;
        let pid = |f: (&str, usize)| num(line, f).map(PointId);
        let (action, why) = match line.keyword {
            "rearrange" => {
                let [moves, why] = line.take(["moves", "why"])?;
                let moves = list(moves.0)
                    .into_iter()
                    .map(|item| {
                        let (id, v) = item
                            .split_once(':')
                            .ok_or_else(|| line.err(moves.1, format!("move `{item}` must be id:value")))?;
                        Ok((pid((id, moves.1))?, rational(line, (v, moves.1))?))
                    })
                    .collect::<PResult<Vec<_>>>()?;
                if moves.is_empty() {
                    return Err(line.err(moves_col(line), "rearrange needs at least one move"));
                }
                (Move::Rearrange(moves), why)
            }
            "cancel" => {
                let [z, w, why] = line.take(["z", "w", "why"])?;
                (Move::Cancel { z: pid(z)?, w: pid(w)? }, why)
            }
            "split" => {
                let [z, zs, zu, why] = line.take(["z", "zs", "zu", "why"])?;
                (
                    Move::Split {
                        z: pid(z)?,
                        stable: pid(zs)?,
                        unstable: pid(zu)?,
                    },
                    why,
                )
            }
            other => return Err(line.err(1, format!("unknown move `{other}`"))),
        };
        script.push(MoveRecord {
            action,
            justification: list(why.0).into_iter().map(str::to_string).collect(),
        });
    }
    Ok(script)
}

fn moves_col(line: &Line) -> usize {
    line.fields.first().map_or(1, |f| f.2)
}

fn format_certificate(c: &Certificate) -> String {
    match c {
        Certificate::Handles(k) => format!("handles:{k}"),
        Certificate::RightProduct(k) => format!("right:{k}"),
        Certificate::LeftProduct(k) => format!("left:{k}"),
        Certificate::Low => "low".into(),
        Certificate::High => "high".into(),
        Certificate::Single(kind, k) => format!("single:{kind}:{k}"),
        Certificate::Trivial => "trivial".into(),
    }
}

fn parse_certificate(line: &Line, (s, col): (&str, usize)) -> PResult<Certificate> {
    let bad = || line.err(col, format!("unknown certificate `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    let k = |i: usize| -> PResult<u32> { num(line, (parts.get(i).copied().unwrap_or(""), col)) };
    Ok(match parts[0] {
        "handles" if parts.len() == 2 => Certificate::Handles(k(1)?),
        "right" if parts.len() == 2 => Certificate::RightProduct(k(1)?),
        "left" if parts.len() == 2 => Certificate::LeftProduct(k(1)?),
        "low" if parts.len() == 1 => Certificate::Low,
        "high" if parts.len() == 1 => Certificate::High,
        "trivial" if parts.len() == 1 => Certificate::Trivial,
        "single" if parts.len() == 3 => Certificate::Single(Kind::parse(parts[1]).ok_or_else(bad)?, k(2)?),
        _ => return Err(bad()),
    })
}

pub fn serialize_decomposition(dec: &Decomposition) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{DECOMPOSITION_HEADER}");
    let regime = match dec.regime {
        Regime::Full => "full",
        Regime::CodimOne => "codim-one",
    };
    let _ = writeln!(s, "regime kind={regime} n={}", dec.n);
    for seg in &dec.segments {
        let label = match seg.label {
            SegmentLabel::Position(p) => p.to_string(),
            l => l.to_string(),
        };
        let points = join_or_dash(seg.points.iter().map(|p| p.to_string()).collect());
        let _ = writeln!(
            s,
            "segment label={label} lo={} hi={} cert={} points={points}",
            value::format(&seg.lo),
            value::format(&seg.hi),
            format_certificate(&seg.certificate)
        );
    }
    s
}

pub fn parse_decomposition(text: &str) -> PResult<Decomposition> {
    let lines = lines(text, DECOMPOSITION_HEADER)?;
    let Some((first, rest)) = lines.split_first() else {
        return Err(ParseError {
            line: 1,
            column: 1,
            message: "document has no `regime` line".into(),
        });
    };
    if first.keyword != "regime" {
        return Err(first.err(1, "expected a `regime` line"));
    }
    let [kind, n] = first.take(["kind", "n"])?;
    let regime = match kind.0 {
        "full" => Regime::Full,
        "codim-one" => Regime::CodimOne,
        other => return Err(first.err(kind.1, format!("unknown regime `{other}`"))),
    };
    let n = num(first, n)?;
    let mut segments = Vec::new();
    for line in rest {
        if line.keyword != "segment" {
            return Err(line.err(1, format!("unknown line type `{}`", line.keyword)));
        }
        let [label, lo, hi, cert, points] = line.take(["label", "lo", "hi", "cert", "points"])?;
        let label = match regime {
            Regime::CodimOne => SegmentLabel::Position(num(line, label)?),
            Regime::Full => {
                let (body, half) = match label.0.strip_suffix("/2") {
                    Some(b) => (b, true),
                    None => (label.0, false),
                };
                let t: i64 = body
                    .parse()
                    .map_err(|_| line.err(label.1, format!("bad label `{}`", label.0)))?;
                let twice = if half { t } else { 2 * t };
                if half && t % 2 == 0 {
                    return Err(line.err(label.1, format!("bad label `{}`", label.0)));
                }
                SegmentLabel::Twice(twice)
            }
        };
        segments.push(Segment {
            label,
            lo: rational(line, lo)?,
            hi: rational(line, hi)?,
            certificate: parse_certificate(line, cert)?,
            points: list(points.0)
                .into_iter()
                .map(|p| num(line, (p, points.1)).map(PointId))
                .collect::<PResult<Vec<_>>>()?,
        });
    }
    Ok(Decomposition { regime, n, segments })
}
