mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::assert_valid;
use handlesplit::generate::{generate, GeneratorSpec};
use handlesplit::io::{parse_datum, serialize_datum};
use handlesplit::morse_data::is_admissible;
use handlesplit::moves::kind_index_multiset;
use handlesplit::normal_form::{schedule_levels, tsa_levels};
use handlesplit::trajectory::{broken_closure, dimension_sum_oracle, TrajectoryGraph};
use handlesplit::value::{ratio, Value};
use handlesplit::*;

fn spec() -> impl Strategy<Value = GeneratorSpec> {
    (any::<u64>(), 1u32..=4, 1u32..=3, 0usize..=10).prop_map(|(seed, n, codim, max)| {
        GeneratorSpec::new(seed, n, n + codim, max)
    })
}

fn kind() -> impl Strategy<Value = Kind> {
    prop_oneof![
        Just(Kind::Interior),
        Just(Kind::BoundaryStable),
        Just(Kind::BoundaryUnstable)
    ]
}

/// Reachability by explicit path enumeration.
fn reaches(edges: &[(u32, u32)], from: u32, to: u32) -> bool {
    let mut stack = vec![from];
    let mut seen = BTreeSet::new();
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            if a == v {
                if b == to {
                    return true;
                }
                if seen.insert(b) {
                    stack.push(b);
                }
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialization_is_canonical(spec in spec()) {
        let d = generate(&spec).unwrap();
        let text = serialize_datum(&d);
        let back = parse_datum(&text).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(serialize_datum(&back), text);
    }

    #[test]
    fn closure_matches_path_enumeration(raw in proptest::collection::vec((0u32..8, 0u32..8), 0..16)) {
        // Orient every edge upward to get a DAG.
        let edges: Vec<(u32, u32)> = raw.into_iter().filter(|(a, b)| a != b).map(|(a, b)| (a.min(b), a.max(b))).collect();
        let g = TrajectoryGraph::from_edges(edges.iter().map(|&(a, b)| FlowEdge {
            from: PointId(a),
            to: PointId(b),
            count: Multiplicity::Unknown,
            locus: Locus::AmbientOnly,
        }));
        let order = broken_closure(&g).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                prop_assert_eq!(order.lt(PointId(a), PointId(b)), reaches(&edges, a, b));
            }
        }
    }

    #[test]
    fn disjointness_matches_dimension_sums(
        n in 1u32..=6, codim in 1u32..=5, kz in kind(), kw in kind(), k in 0u32..=7, l in 0u32..=7
    ) {
        let amb = Ambient::new(n + codim, n).unwrap();
        prop_assume!(kz.index_range(n).contains(&k) && kw.index_range(n).contains(&l));
        let z = CriticalPoint::new(0, kz, k, ratio(1, 2));
        let w = CriticalPoint::new(1, kw, l, ratio(1, 2));
        prop_assert_eq!(generic_disjoint(&z, &w, amb), dimension_sum_oracle(&z, &w, amb));
    }

    #[test]
    fn admissibility_survives_monotone_reparametrization(spec in spec()) {
        let d = generate(&spec).unwrap();
        let xi = schedule_levels(&d);
        // v -> v^2 is strictly increasing on (0,1).
        let squared: Configuration = xi.iter().map(|(id, v)| (*id, v * v)).collect();
        prop_assert_eq!(
            is_admissible(&xi, d.points.values()).unwrap(),
            is_admissible(&squared, d.points.values()).unwrap()
        );
        prop_assert!(is_admissible(&xi, d.points.values()).unwrap());
    }

    #[test]
    fn single_point_moves_keep_validity(spec in spec(), pick in any::<prop::sample::Index>(), num in 1i64..64) {
        let d = generate(&spec).unwrap();
        prop_assume!(!d.points.is_empty());
        let ids: Vec<PointId> = d.points.keys().copied().collect();
        let z = ids[pick.index(ids.len())];
        let target: Value = ratio(num, 64);
        match rearrange_point(&d, z, target.clone()) {
            Ok((out, _)) => {
                assert_valid(&out);
                prop_assert_eq!(&out.points[&z].value, &target);
                prop_assert_eq!(kind_index_multiset(&out), kind_index_multiset(&d));
                prop_assert_eq!(&out.graph, &d.graph);
            }
            Err(e) => {
                let expected = matches!(e, Error::EdgeOrderViolation { .. } | Error::SliceConflict { .. });
                prop_assert!(expected, "unexpected {}", e);
            }
        }
    }

    #[test]
    fn scheduling_reaches_tsa(spec in spec()) {
        let d = generate(&spec).unwrap();
        prop_assume!(d.ambient.codim() >= 2);
        let (out, script) = realize_configuration(&d, &schedule_levels(&d)).unwrap();
        assert_valid(&out);
        prop_assert!(tsa_levels(&out).is_some());
        prop_assert_eq!(replay_script(&d, &script).unwrap(), out);
    }

    #[test]
    fn splits_keep_validity(spec in spec()) {
        let d = generate(&spec).unwrap();
        let n = d.n();
        for p in d.points.values().filter(|p| p.kind == Kind::Interior) {
            match split_interior(&d, p.id) {
                Ok((out, _)) => {
                    assert_valid(&out);
                    prop_assert_eq!(out.points.len(), d.points.len() + 1);
                }
                Err(Error::NotJoinable(_)) => prop_assert!(p.index >= 1 && p.index <= n),
                Err(Error::ExtremalIndex(_)) => prop_assert!(p.index == 0 || p.index == n + 1),
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }
    }
}
