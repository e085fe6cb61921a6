//! Brute-force reachability of value orderings, independent of the
//! rearrangement driver. States are weak orders of the critical points; a
//! step repositions one point, or two points with no flow from the lower to
//! the upper, without making any edge non-increasing.

use std::collections::{BTreeMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::morse_data::{Configuration, MorseDatum, PointId};
use crate::trajectory::broken_closure;

/// Dense ranks, indexed like `ids`.
type State = Vec<u32>;

fn ranks_of(ids: &[PointId], config: &Configuration) -> Result<State> {
    let mut values = Vec::new();
    for id in ids {
        values.push(config.get(id).ok_or(Error::PartialConfiguration(*id))?);
    }
    let mut distinct = values.clone();
    distinct.sort();
    distinct.dedup();
    Ok(values
        .iter()
        .map(|v| distinct.binary_search(v).expect("present") as u32)
        .collect())
}

fn densify(slots: &[i64]) -> State {
    let mut distinct: Vec<i64> = slots.to_vec();
    distinct.sort();
    distinct.dedup();
    slots
        .iter()
        .map(|s| distinct.binary_search(s).expect("present") as u32)
        .collect()
}

/// Every weak order obtained by moving point `i` to a tie with some rank
/// or a gap between ranks.
fn placements(state: &State, i: usize) -> Vec<State> {
    let others: Vec<i64> = state
        .iter()
        .enumerate()
        .map(|(j, &r)| if j == i { -1 } else { i64::from(r) })
        .collect();
    let mut rest: Vec<i64> = others.iter().copied().filter(|&r| r >= 0).collect();
    rest.sort();
    rest.dedup();
    let slots = 2 * rest.len() as i64;
    (0..=slots)
        .map(|p| {
            let placed: Vec<i64> = others
                .iter()
                .enumerate()
                .map(|(j, &r)| {
                    if j == i {
                        p
                    } else {
                        2 * rest.binary_search(&r).expect("present") as i64 + 1
                    }
                })
                .collect();
            densify(&placed)
        })
        .collect()
}

/// Minimum number of moves from the current values to the ordering of
/// `target`, or `None` if it cannot be reached. Fails once more than
/// `bound` states have been visited.
pub fn brute_force_distance(d: &MorseDatum, target: &Configuration, bound: usize) -> Result<Option<usize>> {
    let ids: Vec<PointId> = d.points.keys().copied().collect();
    let index: BTreeMap<PointId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let start = ranks_of(&ids, &d.configuration())?;
    let goal = ranks_of(&ids, target)?;
    let edges: Vec<(usize, usize)> = d.graph.iter().map(|e| (index[&e.from], index[&e.to])).collect();
    let closure = broken_closure(&d.graph)?;
    let ok = |s: &State| edges.iter().all(|&(a, b)| s[a] < s[b]);

    let mut seen: HashSet<State> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((s, dist)) = queue.pop_front() {
        if s == goal {
            return Ok(Some(dist));
        }
        let mut next: Vec<State> = Vec::new();
        for i in 0..ids.len() {
            next.extend(placements(&s, i));
            for j in 0..ids.len() {
                if s[i] < s[j] && !closure.lt(ids[i], ids[j]) {
                    for t in placements(&s, i) {
                        next.extend(placements(&t, j));
                    }
                }
            }
        }
        for t in next {
            if ok(&t) && !seen.contains(&t) {
                if seen.len() >= bound {
                    return Err(Error::BoundExceeded(bound));
                }
                seen.insert(t.clone());
                queue.push_back((t, dist + 1));
            }
        }
    }
    Ok(None)
}

pub fn brute_force_reachability(d: &MorseDatum, target: &Configuration, bound: usize) -> Result<bool> {
    Ok(brute_force_distance(d, target, bound)?.is_some())
}
