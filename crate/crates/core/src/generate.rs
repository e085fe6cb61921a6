//! Seeded random data satisfying the hypotheses of the global statements.
//!
//! Points are produced bottom to top while the current slice is simulated,
//! so every effect is legal when drawn. Closed components that would
//! violate the asserted flags are repaired in the last steps; anything the
//! validator still rejects is resampled.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::morse_data::{validate_datum, Ambient, ComponentId, CriticalPoint, Flags, Kind, MorseDatum, PointId};
use crate::slice_topology::ComponentEffect;
use crate::trajectory::{generic_disjoint, locus_allowed, FlowEdge, Locus, Multiplicity};
use crate::value::ratio;

const ATTEMPTS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub n: u32,
    pub m: u32,
    pub min_points: usize,
    pub max_points: usize,
    /// Relative weights of interior, boundary stable and boundary unstable
    /// points.
    pub kind_weights: [u32; 3],
    /// Probability that a pair not ruled out by genericity gets an edge.
    pub edge_density: f64,
    pub flags: Flags,
    /// Demands a closed component of Ω (a birth later killed by a death).
    pub closed_omega: bool,
}

impl GeneratorSpec {
    pub fn new(seed: u64, n: u32, m: u32, max_points: usize) -> Self {
        GeneratorSpec {
            seed,
            n,
            m,
            min_points: 0,
            max_points,
            kind_weights: [3, 1, 1],
            edge_density: 0.3,
            flags: Flags::all(),
            closed_omega: false,
        }
    }
}

/// Component state during generation. `anchored` records whether the
/// component's class in Ω meets `Y` or an end slice somewhere.
#[derive(Debug, Clone, Copy)]
struct Comp {
    touches_y: bool,
    anchored: bool,
}

struct Walk<'a> {
    spec: &'a GeneratorSpec,
    rng: &'a mut ChaCha8Rng,
    slice: BTreeMap<u32, Comp>,
    next: u32,
    steps: Vec<(Kind, u32, ComponentEffect)>,
}

impl Walk<'_> {
    fn fresh(&mut self) -> u32 {
        self.next += 1;
        self.next - 1
    }

    fn with_flag(&self, want: bool) -> Vec<u32> {
        self.slice
            .iter()
            .filter(|(_, c)| c.touches_y == want)
            .map(|(&id, _)| id)
            .collect()
    }

    fn pick(&mut self, from: &[u32]) -> Option<u32> {
        from.choose(self.rng).copied()
    }

    fn closed_count(&self) -> usize {
        self.slice.values().filter(|c| !c.touches_y).count()
    }

    fn push(&mut self, kind: Kind, k: u32, e: ComponentEffect) {
        self.steps.push((kind, k, e));
    }

    fn merge(&mut self, a: u32, b: u32) -> ComponentEffect {
        let (ca, cb) = (self.slice.remove(&a).unwrap(), self.slice.remove(&b).unwrap());
        let out = self.fresh();
        let y = ca.touches_y || cb.touches_y;
        self.slice.insert(
            out,
            Comp {
                touches_y: y,
                anchored: ca.anchored || cb.anchored,
            },
        );
        ComponentEffect::merge(a, b, out, y)
    }

    fn split(&mut self, c: u32, flags: (bool, bool)) -> ComponentEffect {
        let comp = self.slice.remove(&c).unwrap();
        let (a, b) = (self.fresh(), self.fresh());
        for (id, y) in [(a, flags.0), (b, flags.1)] {
            self.slice.insert(
                id,
                Comp {
                    touches_y: y,
                    anchored: comp.anchored,
                },
            );
        }
        ComponentEffect::split(c, (a, flags.0), (b, flags.1))
    }

    fn set_flag(&mut self, c: u32, y: bool) {
        let comp = self.slice.get_mut(&c).unwrap();
        comp.touches_y = y;
        comp.anchored = true;
    }

    /// Draws one legal effect for a point of this kind and index, or `None`
    /// if the current slice admits none.
    fn draw(&mut self, kind: Kind, k: u32) -> Option<ComponentEffect> {
        let n = self.spec.n;
        let ys = self.with_flag(true);
        let closed = self.with_flag(false);
        let all: Vec<u32> = self.slice.keys().copied().collect();
        let omega = self.spec.flags.omega;
        match kind {
            Kind::Interior if k == 0 => {
                let out = self.fresh();
                self.slice.insert(
                    out,
                    Comp {
                        touches_y: false,
                        anchored: false,
                    },
                );
                Some(ComponentEffect::birth(out))
            }
            Kind::Interior if k == n + 1 => {
                let dying: Vec<u32> = closed
                    .iter()
                    .copied()
                    .filter(|c| !omega || self.slice[c].anchored)
                    .collect();
                let c = self.pick(&dying)?;
                self.slice.remove(&c);
                Some(ComponentEffect::death(c))
            }
            Kind::Interior => {
                let mut options = vec![0];
                if k == 1 && all.len() >= 2 {
                    options.push(1);
                }
                if k == n {
                    options.push(2);
                }
                let c = self.pick(&all)?;
                match *options.choose(self.rng).unwrap() {
                    1 => {
                        let others: Vec<u32> = all.iter().copied().filter(|&o| o != c).collect();
                        let o = self.pick(&others)?;
                        Some(self.merge(c, o))
                    }
                    2 => {
                        let y = self.slice[&c].touches_y;
                        let flags = if !y {
                            (false, false)
                        } else {
                            *[(true, true), (true, false), (false, true)].choose(self.rng).unwrap()
                        };
                        Some(self.split(c, flags))
                    }
                    _ => Some(ComponentEffect::internal(c, self.slice[&c].touches_y)),
                }
            }
            Kind::BoundaryStable => {
                if k == n && self.rng.gen_bool(0.5) {
                    let c = self.pick(&ys)?;
                    return Some(self.split(c, (true, true)));
                }
                let pool = if k == 1 { &all } else { &ys };
                let c = self.pick(pool)?;
                self.set_flag(c, true);
                Some(ComponentEffect::attach(c, true))
            }
            Kind::BoundaryUnstable => {
                if k == 1 && ys.len() >= 2 && self.rng.gen_bool(0.5) {
                    let a = self.pick(&ys)?;
                    let others: Vec<u32> = ys.iter().copied().filter(|&o| o != a).collect();
                    let b = self.pick(&others)?;
                    return Some(self.merge(a, b));
                }
                let c = self.pick(&ys)?;
                let y = !(k == n && self.rng.gen_bool(0.3));
                self.set_flag(c, y);
                Some(ComponentEffect::attach(c, y))
            }
        }
    }

    /// Removes one closed component that the flags forbid at the top:
    /// merges it into a component touching `Y`, or punches it with a
    /// boundary stable point of index 1.
    fn repair(&mut self) {
        let closed = self.with_flag(false);
        let Some(c) = self.pick(&closed) else { return };
        let ys = self.with_flag(true);
        let anchored = self.slice[&c].anchored;
        if anchored && self.rng.gen_bool(0.3) {
            self.slice.remove(&c);
            let n = self.spec.n;
            self.push(Kind::Interior, n + 1, ComponentEffect::death(c));
        } else if let (Some(y), true) = (self.pick(&ys), self.rng.gen_bool(0.6)) {
            let e = self.merge(c, y);
            self.push(Kind::Interior, 1, e);
        } else {
            self.set_flag(c, true);
            self.push(Kind::BoundaryStable, 1, ComponentEffect::attach(c, true));
        }
    }
}

fn check_spec(spec: &GeneratorSpec) -> Result<Ambient> {
    let infeasible = |msg: &str| Err(Error::InfeasibleSpec(msg.into()));
    let ambient = Ambient::new(spec.m, spec.n).map_err(|e| Error::InfeasibleSpec(e.to_string()))?;
    if spec.min_points > spec.max_points {
        return infeasible("min_points exceeds max_points");
    }
    if spec.kind_weights.iter().all(|&w| w == 0) && spec.max_points > 0 {
        return infeasible("all kind weights are zero");
    }
    if !(0.0..=1.0).contains(&spec.edge_density) {
        return infeasible("edge density must lie in [0, 1]");
    }
    if spec.closed_omega {
        if spec.flags.omega {
            return infeasible("a closed component of Omega contradicts the asserted flag");
        }
        if spec.max_points < 2 {
            return infeasible("a closed component of Omega needs a birth and a death");
        }
    }
    Ok(ambient)
}

fn attempt(spec: &GeneratorSpec, ambient: Ambient, rng: &mut ChaCha8Rng) -> Option<MorseDatum> {
    let n = spec.n;
    let target = rng.gen_range(spec.min_points..=spec.max_points);
    let mut walk = Walk {
        spec,
        rng,
        slice: BTreeMap::new(),
        next: 0,
        steps: Vec::new(),
    };
    let base_count = walk.rng.gen_range(1..=2);
    for _ in 0..base_count {
        let id = walk.fresh();
        let y = spec.flags.sigma0 || walk.rng.gen_bool(0.7);
        walk.slice.insert(
            id,
            Comp {
                touches_y: y,
                anchored: true,
            },
        );
    }
    let base: BTreeMap<ComponentId, bool> = walk
        .slice
        .iter()
        .map(|(&id, c)| (ComponentId(id), c.touches_y))
        .collect();
    if spec.closed_omega {
        let c = walk.fresh();
        walk.push(Kind::Interior, 0, ComponentEffect::birth(c));
        walk.push(Kind::Interior, n + 1, ComponentEffect::death(c));
    }
    let must_close = spec.flags.sigma1 || spec.flags.omega;
    let kind_total: u32 = spec.kind_weights.iter().sum();
    let mut stalls = 0;
    while walk.steps.len() < target && stalls < 50 {
        let left = target - walk.steps.len();
        if must_close && walk.closed_count() >= left {
            walk.repair();
            continue;
        }
        let mut roll = walk.rng.gen_range(0..kind_total);
        let mut kind = Kind::Interior;
        for (i, &w) in spec.kind_weights.iter().enumerate() {
            if roll < w {
                kind = Kind::ALL[i];
                break;
            }
            roll -= w;
        }
        let k = walk.rng.gen_range(kind.index_range(n));
        match walk.draw(kind, k) {
            Some(e) => walk.push(kind, k, e),
            None => stalls += 1,
        }
    }

    // Ids are a random permutation so that id order and level order differ.
    let count = walk.steps.len();
    let mut ids: Vec<u32> = (0..count as u32).collect();
    ids.shuffle(walk.rng);
    let denom = 4 * count as i64 + 1;
    let mut slots: Vec<i64> = (1..denom).collect();
    slots.shuffle(walk.rng);
    let mut slots: Vec<i64> = slots.into_iter().take(count).collect();
    slots.sort();

    let mut d = MorseDatum::new(ambient);
    d.flags = spec.flags;
    d.slices.base.components = base;
    let steps = std::mem::take(&mut walk.steps);
    let rng = walk.rng;
    for (i, (kind, k, e)) in steps.into_iter().enumerate() {
        let id = PointId(ids[i]);
        d.points.insert(id, CriticalPoint::new(ids[i], kind, k, ratio(slots[i], denom)));
        d.slices.effects.insert(id, e);
    }

    let mut order: Vec<&CriticalPoint> = d.points.values().collect();
    order.sort_by(|a, b| a.value.cmp(&b.value));
    let mut edges = Vec::new();
    for (i, z) in order.iter().enumerate() {
        for w in &order[i + 1..] {
            if generic_disjoint(z, w, ambient) || !rng.gen_bool(spec.edge_density) {
                continue;
            }
            let loci: Vec<Locus> = [Locus::InteriorOmega, Locus::BoundaryY, Locus::AmbientOnly]
                .into_iter()
                .filter(|&l| locus_allowed(z, w, l))
                .collect();
            let count = match rng.gen_range(0..6) {
                0 => Multiplicity::Known(2),
                1 => Multiplicity::Unknown,
                _ => Multiplicity::Known(1),
            };
            edges.push(FlowEdge {
                from: z.id,
                to: w.id,
                count,
                locus: *loci.choose(rng).unwrap(),
            });
        }
    }
    for e in edges {
        d.graph.insert(e);
    }
    if count < spec.min_points || !validate_datum(&d).is_empty() {
        return None;
    }
    Some(d)
}

/// Draws a valid datum. The same spec always yields the same datum.
pub fn generate(spec: &GeneratorSpec) -> Result<MorseDatum> {
    let ambient = check_spec(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..ATTEMPTS {
        if let Some(d) = attempt(spec, ambient, &mut rng) {
            return Ok(d);
        }
    }
    Err(Error::InfeasibleSpec(format!(
        "no valid datum found in {ATTEMPTS} attempts"
    )))
}

/// Component ids used anywhere in a datum, for tests that need fresh ones.
pub fn used_components(d: &MorseDatum) -> BTreeSet<ComponentId> {
    let mut ids: BTreeSet<ComponentId> = d.slices.base.components.keys().copied().collect();
    for e in d.slices.effects.values() {
        ids.extend(e.inputs.iter().copied());
        ids.extend(e.outputs.iter().map(|&(c, _)| c));
    }
    ids
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::serialize_datum;

    #[test]
    fn seed_one_is_valid() {
        let d = generate(&GeneratorSpec::new(1, 2, 4, 6)).unwrap();
        assert!(validate_datum(&d).is_empty());
        assert!(d.points.len() <= 6);
    }

    #[test]
    fn deterministic() {
        let spec = GeneratorSpec::new(42, 3, 5, 8);
        assert_eq!(
            serialize_datum(&generate(&spec).unwrap()),
            serialize_datum(&generate(&spec).unwrap())
        );
    }

    #[test]
    fn contradictory_spec() {
        let mut spec = GeneratorSpec::new(1, 2, 4, 6);
        spec.closed_omega = true;
        assert!(matches!(generate(&spec), Err(Error::InfeasibleSpec(_))));
        spec.flags = Flags::none();
        let d = generate(&spec).unwrap();
        assert!(validate_datum(&d).is_empty());
    }

    #[test]
    fn many_seeds_valid() {
        for seed in 0..200 {
            for n in 1..=4 {
                for codim in 1..=3 {
                    let d = generate(&GeneratorSpec::new(seed, n, n + codim, 8)).unwrap();
                    assert!(validate_datum(&d).is_empty());
                }
            }
        }
    }
}
