//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the report reads top to bottom.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use handlesplit::generate::{generate, GeneratorSpec};
use handlesplit::io::{parse_datum, parse_script, serialize_datum, serialize_script};
use handlesplit::morse_data::{is_admissible, is_index_monotone};
use handlesplit::moves::kind_index_multiset;
use handlesplit::normal_form::{schedule_levels, Certificate, Regime};
use handlesplit::oracle::brute_force_reachability;
use handlesplit::trajectory::{broken_closure, dimension_sum_oracle};
use handlesplit::value::ratio;
use handlesplit::*;

type Outcome = Result<String, String>;

/// Scripts to replay for criterion 8: original document, script, final
/// document.
#[derive(Default)]
struct Replays(Vec<(String, String, String)>);

impl Replays {
    fn record(&mut self, before: &MorseDatum, script: &[MoveRecord], after: &MorseDatum) {
        self.0
            .push((serialize_datum(before), serialize_script(script), serialize_datum(after)));
    }
}

fn table_one(kind: Kind, k: u32, n: u32) -> [Option<u32>; 6] {
    let (k, n) = (k as i64, n as i64);
    let v = |x: i64| Some(x as u32);
    match kind {
        Kind::Interior => [v(k + 1), v(n + 2 - k), v(k), v(n + 1 - k), None, None],
        Kind::BoundaryStable => [v(k + 1), v(n + 2 - k), v(k), None, v(k - 1), v(n + 1 - k)],
        Kind::BoundaryUnstable => [v(k + 1), v(n + 2 - k), None, v(n + 1 - k), v(k), v(n - k)],
    }
}

fn criterion_1() -> Outcome {
    let mut cells = 0;
    for n in 1..=6 {
        for kind in Kind::ALL {
            for k in 0..=n + 2 {
                let got = dimension_profile(kind, k, n);
                if kind.index_range(n).contains(&k) {
                    let got = got.map_err(|e| format!("{kind} k={k} n={n}: {e}"))?.as_array();
                    if got != table_one(kind, k, n) {
                        return Err(format!("{kind} k={k} n={n}: got {got:?}"));
                    }
                    cells += 1;
                } else if !matches!(got, Err(Error::InvalidIndexKind { .. })) {
                    return Err(format!("{kind} k={k} n={n} accepted"));
                }
            }
        }
    }
    Ok(format!("{cells} cells"))
}

fn criterion_2() -> Outcome {
    let mut cells = 0;
    for n in 1..=6 {
        for m in n + 1..=n + 5 {
            let amb = Ambient::new(m, n).unwrap();
            for kz in Kind::ALL {
                for kw in Kind::ALL {
                    for k in kz.index_range(n) {
                        for l in kw.index_range(n) {
                            let z = CriticalPoint::new(0, kz, k, ratio(1, 2));
                            let w = CriticalPoint::new(1, kw, l, ratio(1, 2));
                            let (a, b) = (generic_disjoint(&z, &w, amb), dimension_sum_oracle(&z, &w, amb));
                            if a != b {
                                return Err(format!(
                                    "n={n} m={m} ({kz},{k}) -> ({kw},{l}): generic_disjoint={a} oracle={b}"
                                ));
                            }
                            cells += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{cells} cells agree"))
}

fn criterion_3() -> Outcome {
    let mut populations = 0;
    for n in 1..=6u32 {
        let mut d = MorseDatum::new(Ambient::new(n + 2, n).unwrap());
        let mut next = 0;
        for kind in Kind::ALL {
            for k in kind.index_range(n) {
                for _ in 0..2 {
                    d.points.insert(PointId(next), CriticalPoint::new(next, kind, k, ratio(1, 2)));
                    next += 1;
                }
            }
        }
        let xi = schedule_levels(&d);
        if !is_admissible(&xi, d.points.values()).unwrap() {
            return Err(format!("n={n}: schedule not admissible"));
        }
        let denom = 3 * i64::from(n) + 6;
        for p in d.points.values() {
            let offset = match p.kind {
                Kind::BoundaryStable => 1,
                Kind::Interior => 2,
                Kind::BoundaryUnstable => 3,
            };
            if xi[&p.id] != ratio(3 * i64::from(p.index) + offset, denom) {
                return Err(format!("n={n}: wrong level for {} index {}", p.kind, p.index));
            }
        }
        populations += 1;
    }
    Ok(format!("{populations} populations, all (kind,index) cells"))
}

fn expected_multiset(d: &MorseDatum) -> BTreeMap<(Kind, u32), usize> {
    let n = d.n();
    let mut m = BTreeMap::new();
    for p in d.points.values() {
        if p.kind == Kind::Interior && (1..=n).contains(&p.index) {
            *m.entry((Kind::BoundaryStable, p.index)).or_insert(0) += 1;
            *m.entry((Kind::BoundaryUnstable, p.index)).or_insert(0) += 1;
        } else {
            *m.entry((p.kind, p.index)).or_insert(0) += 1;
        }
    }
    m
}

fn criterion_4(replays: &mut Replays) -> Outcome {
    let mut points = 0;
    for seed in 0..500u64 {
        let n = 1 + (seed % 4) as u32;
        let codim = 2 + (seed / 4 % 2) as u32;
        let d = generate(&GeneratorSpec::new(seed, n, n + codim, 10)).map_err(|e| format!("seed {seed}: {e}"))?;
        points += d.points.len();
        let (out, dec, script) = global_split(&d).map_err(|e| format!("seed {seed}: {e}"))?;
        let fail = |what: &str| Err(format!("seed {seed} (n={n}, m={}): {what}", n + codim));
        if !verify_decomposition(&out, &dec) || dec.regime != Regime::Full {
            return fail("decomposition rejected");
        }
        if out
            .points
            .values()
            .any(|p| p.kind == Kind::Interior && (1..=n).contains(&p.index))
        {
            return fail("interior point of index 1..n survived");
        }
        if kind_index_multiset(&out) != expected_multiset(&d) {
            return fail("(kind,index) multiset changed");
        }
        let denom = 2 * i64::from(n) + 4;
        for (j, seg) in dec.segments.iter().enumerate() {
            if seg.lo != ratio(j as i64, denom) || seg.hi != ratio(j as i64 + 1, denom) {
                return fail("segment boundary is not j/(2n+4)");
            }
        }
        if !validate_datum(&out).is_empty() {
            return fail("output invalid");
        }
        replays.record(&d, &script, &out);
    }
    Ok(format!("500 data, {points} points"))
}

fn criterion_5(replays: &mut Replays) -> Outcome {
    let mut split = 0;
    for seed in 0..200u64 {
        let n = 3 + (seed % 3) as u32;
        let d = generate(&GeneratorSpec::new(10_000 + seed, n, n + 1, 10)).map_err(|e| format!("seed {seed}: {e}"))?;
        let (out, dec, script) = global_split(&d).map_err(|e| format!("seed {seed}: {e}"))?;
        let fail = |what: &str| Err(format!("seed {seed} (n={n}): {what}"));
        if !verify_decomposition(&out, &dec) || dec.regime != Regime::CodimOne {
            return fail("decomposition rejected");
        }
        let segs = &dec.segments;
        let index_of = |id: &PointId| out.points[id].index;
        if segs[0].certificate != Certificate::Low || segs[0].points.iter().any(|p| index_of(p) > 1) {
            return fail("bottom piece holds an index above 1");
        }
        let last = segs.last().unwrap();
        if last.certificate != Certificate::High || last.points.iter().any(|p| index_of(p) < n) {
            return fail("top piece holds an index below n");
        }
        let mut prev = 0;
        for seg in &segs[1..segs.len() - 1] {
            if seg.points.len() != 1 || index_of(&seg.points[0]) < prev {
                return fail("middle pieces are not singletons of non-decreasing index");
            }
            prev = index_of(&seg.points[0]);
        }
        for p in d.points.values() {
            let edge_index = p.index == 1 || p.index == n;
            if p.kind == Kind::Interior && edge_index && !out.points.contains_key(&p.id) {
                return fail("interior point of index 1 or n was split");
            }
        }
        split += d.points.len() + script.iter().filter(|r| matches!(r.action, Move::Split { .. })).count()
            - d.points.len();
        replays.record(&d, &script, &out);
    }
    Ok(format!("200 data, {split} interior points split"))
}

/// The refusal `cancel_pair` must give, derived independently of it, or
/// `None` if the attempt is legal as far as the trajectory data go.
fn expected_refusal(d: &MorseDatum, z: PointId, w: PointId) -> Option<&'static str> {
    let (pz, pw) = (&d.points[&z], &d.points[&w]);
    if pz.kind != pw.kind {
        return Some("kind");
    }
    if pw.index != pz.index + 1 {
        return Some("index");
    }
    match d.graph.get(z, w) {
        Some(e) if e.count == Multiplicity::Known(1) => {
            let want = if pz.kind == Kind::Interior {
                Locus::InteriorOmega
            } else {
                Locus::BoundaryY
            };
            if e.locus != want {
                return Some("locus");
            }
        }
        _ => return Some("single"),
    }
    let closure = broken_closure(&d.graph).unwrap();
    if d.points.keys().any(|&x| closure.lt(z, x) && closure.lt(x, w)) {
        return Some("broken");
    }
    None
}

/// Inserts an index `k`, `k+1` pair with identity effects on a component
/// touching `Y`, joined by a single trajectory, into a gap of the level
/// order.
fn plant_pair(d: &MorseDatum, rng: &mut ChaCha8Rng) -> Option<(MorseDatum, PointId, PointId)> {
    let n = d.n();
    let mut values: Vec<Value> = d.critical_values();
    values.insert(0, ratio(0, 1));
    values.push(ratio(1, 1));
    let gap = rng.gen_range(0..values.len() - 1);
    let (lo, hi) = (values[gap].clone(), values[gap + 1].clone());
    let third = (&hi - &lo) / value::int(3);
    let (vz, vw) = (&lo + &third, &hi - &third);
    let level = slice_topology::slice_at(d, &handlesplit::value::midpoint(&lo, &hi)).ok()?;
    let c = level.components.iter().find(|(_, &y)| y).map(|(&c, _)| c)?;
    let (kind, k) = match rng.gen_range(0..3) {
        0 if n >= 2 => (Kind::Interior, rng.gen_range(1..n)),
        1 => (Kind::BoundaryStable, rng.gen_range(1..=n)),
        _ => (Kind::BoundaryUnstable, rng.gen_range(0..n)),
    };
    let mut out = d.clone();
    let z = PointId(d.next_point_id());
    let w = PointId(z.0 + 1);
    for (id, index, v) in [(z, k, vz), (w, k + 1, vw)] {
        out.points.insert(id, CriticalPoint::new(id.0, kind, index, v));
        let e = if kind == Kind::Interior {
            slice_topology::ComponentEffect::internal(c.0, true)
        } else {
            slice_topology::ComponentEffect::attach(c.0, true)
        };
        out.slices.effects.insert(id, e);
    }
    let locus = if kind == Kind::Interior {
        Locus::InteriorOmega
    } else {
        Locus::BoundaryY
    };
    let count = if rng.gen_bool(0.8) {
        Multiplicity::Known(1)
    } else {
        Multiplicity::Known(2)
    };
    out.graph.insert(FlowEdge { from: z, to: w, count, locus });
    validate_datum(&out).is_empty().then_some((out, z, w))
}

fn criterion_6(replays: &mut Replays) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut legal, mut refused) = (0, 0);
    let mut attempts = 0;
    let mut seed = 20_000u64;
    while attempts < 1000 {
        seed += 1;
        let n = 1 + (seed % 4) as u32;
        let codim = 1 + (seed / 4 % 3) as u32;
        let base = generate(&GeneratorSpec::new(seed, n, n + codim, 8)).map_err(|e| e.to_string())?;
        let planted = if attempts % 2 == 0 { plant_pair(&base, &mut rng) } else { None };
        let (d, z, w) = match planted {
            Some(p) => p,
            None => {
                let ids: Vec<PointId> = base.points.keys().copied().collect();
                if ids.len() < 2 {
                    continue;
                }
                let z = ids[rng.gen_range(0..ids.len())];
                let w = ids[rng.gen_range(0..ids.len())];
                if z == w {
                    continue;
                }
                (base, z, w)
            }
        };
        attempts += 1;
        let expected = expected_refusal(&d, z, w);
        let cell = || format!("seed {seed}, cancel {z} {w}");
        match (cancel_pair(&d, z, w), expected) {
            (Ok((out, rec)), None) => {
                if !validate_datum(&out).is_empty() {
                    return Err(format!("{}: result invalid", cell()));
                }
                if out.points.len() + 2 != d.points.len() {
                    return Err(format!("{}: point count did not drop by 2", cell()));
                }
                if broken_closure(&out.graph).is_err() {
                    return Err(format!("{}: closure has a cycle", cell()));
                }
                replays.record(&d, &[rec], &out);
                legal += 1;
            }
            (Ok(_), Some(why)) => return Err(format!("{}: accepted despite {why}", cell())),
            (Err(e), expected) => {
                let matches = matches!(
                    (&e, expected),
                    (Error::KindMismatch(..), Some("kind"))
                        | (Error::IndexMismatch(..), Some("index"))
                        | (Error::NotSingleTrajectory(..), Some("single"))
                        | (Error::LocusViolation(..), Some("locus"))
                        | (Error::BrokenTrajectoryExists(..), Some("broken"))
                        | (Error::InvalidEffect { .. }, None)
                );
                if !matches {
                    return Err(format!("{}: refused with `{e}`, expected {expected:?}", cell()));
                }
                refused += 1;
            }
        }
    }
    if legal == 0 {
        return Err("no legal cancellation was exercised".into());
    }
    Ok(format!("{attempts} attempts, {legal} legal, {refused} refused with the specific error"))
}

fn random_target(d: &MorseDatum, rng: &mut ChaCha8Rng) -> Configuration {
    let codim_one = d.ambient.codim() == 1;
    for _ in 0..50 {
        let xi: Configuration = d
            .points
            .keys()
            .map(|&id| (id, ratio(rng.gen_range(1..16), 16)))
            .collect();
        let ok = if codim_one {
            is_index_monotone(&xi, d.points.values()).unwrap()
        } else {
            is_admissible(&xi, d.points.values()).unwrap()
        };
        if ok {
            return xi;
        }
    }
    schedule_levels(d)
}

fn criterion_7(replays: &mut Replays) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut reachable, mut unreachable) = (0, 0);
    for seed in 0..300u64 {
        let n = 1 + (seed % 4) as u32;
        let codim = 1 + (seed / 4 % 3) as u32;
        let mut spec = GeneratorSpec::new(30_000 + seed, n, n + codim, 6);
        spec.edge_density = 0.5;
        let d = generate(&spec).map_err(|e| e.to_string())?;
        let mut targets = vec![d.configuration(), random_target(&d, &mut rng), random_target(&d, &mut rng)];
        if let Some(e) = d.graph.iter().next() {
            // Exchange the endpoints of an edge.
            let mut xi = d.configuration();
            let (a, b) = (xi[&e.from].clone(), xi[&e.to].clone());
            xi.insert(e.from, b);
            xi.insert(e.to, a);
            targets.push(xi);
        }
        // The driver's domain: admissible targets, or index-monotone ones in
        // codimension one.
        let in_domain = |xi: &Configuration| {
            if d.ambient.codim() == 1 {
                is_index_monotone(xi, d.points.values()).unwrap()
            } else {
                is_admissible(xi, d.points.values()).unwrap()
            }
        };
        for xi in targets.into_iter().filter(in_domain) {
            let bfs = brute_force_reachability(&d, &xi, 10_000).map_err(|e| format!("seed {seed}: {e}"))?;
            let realized = realize_configuration(&d, &xi);
            match (&realized, bfs) {
                (Ok((out, script)), true) => {
                    if out.configuration() != xi {
                        return Err(format!("seed {seed}: realized values differ from the target"));
                    }
                    replays.record(&d, script, out);
                    reachable += 1;
                }
                (Err(Error::SwapBlocked(..)), false) => unreachable += 1,
                (r, b) => {
                    return Err(format!(
                        "seed {seed}: realize {:?} but search says reachable={b}",
                        r.as_ref().map(|_| ()).map_err(|e| e.to_string())
                    ))
                }
            }
        }
    }
    Ok(format!("{reachable} reachable, {unreachable} refused, all agree"))
}

fn criterion_8(replays: &Replays) -> Outcome {
    for (i, (before, script, after)) in replays.0.iter().enumerate() {
        let d = parse_datum(before).map_err(|e| format!("script {i}: {e}"))?;
        let s = parse_script(script).map_err(|e| format!("script {i}: {e}"))?;
        let out = replay_script(&d, &s).map_err(|e| format!("script {i}: {e}"))?;
        if &serialize_datum(&out) != after {
            return Err(format!("script {i}: replay differs\n{script}"));
        }
    }
    Ok(format!("{} scripts replayed byte-identically", replays.0.len()))
}

fn report(n: u32, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let took = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if took <= budget => (true, d),
        Ok(d) => (false, format!("{d}; over the {budget:?} budget")),
        Err(e) => (false, e),
    };
    println!(
        "criterion {n}: {} ({detail}) [{:.2}s / {}s]",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        budget.as_secs()
    );
    ok
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut replays = Replays::default();
    let results = [
        report(1, secs(1), criterion_1),
        report(2, secs(5), criterion_2),
        report(3, secs(1), criterion_3),
        report(4, secs(30), || criterion_4(&mut replays)),
        report(5, secs(15), || criterion_5(&mut replays)),
        report(6, secs(10), || criterion_6(&mut replays)),
        report(7, secs(60), || criterion_7(&mut replays)),
        report(8, secs(60), || criterion_8(&replays)),
    ];
    if results.iter().all(|&ok| ok) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
