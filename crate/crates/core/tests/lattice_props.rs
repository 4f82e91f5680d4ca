use std::collections::HashSet;

use iontrap_mbqc::lattice::{build_hex_array, decompose_sublattices, HexArray, LayerAssignment};
use iontrap_mbqc::scheduler::build_schedule;
use iontrap_mbqc::Error;
use proptest::prelude::*;

fn assignment(rows: usize, cols: usize, d: f64, n: usize) -> Option<(HexArray, LayerAssignment)> {
    let array = build_hex_array(rows, cols, d).unwrap();
    match decompose_sublattices(&array, n) {
        Ok(asg) => Some((array, asg)),
        Err(Error::Size(_)) => None,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn array_geometry(rows in 1usize..10, cols in 1usize..10, d in 0.1f64..10.0) {
        let array = build_hex_array(rows, cols, d).unwrap();
        let mut seen = HashSet::new();
        for s in array.sites() {
            let [x, y] = array.position(s).unwrap();
            prop_assert!(seen.insert(((x / d * 1e6).round() as i64, (y / d * 1e6).round() as i64)));
            let nbrs = array.channel_neighbors(s).unwrap();
            prop_assert!(nbrs.len() <= 3);
            for b in nbrs {
                let r = array.euclidean_distance(s, b).unwrap();
                prop_assert!((r / d - 1.0).abs() < 1e-12, "{r} vs {d}");
            }
        }
    }

    #[test]
    fn layers_partition_the_array(rows in 2usize..12, cols in 2usize..12, d in 0.1f64..10.0, n in 1usize..4) {
        let Some((array, asg)) = assignment(rows, cols, d, n) else { return Ok(()) };
        prop_assert_eq!(asg.layer_count(), 2 * n * n);
        prop_assert_eq!(asg.len(), array.len());
        for s in array.sites() {
            let layer = asg.layer(s).unwrap();
            prop_assert!((1..=asg.layer_count()).contains(&layer));
            prop_assert_eq!(asg.site_in_layer(layer, asg.coord(s).unwrap()), Some(s));
        }
        prop_assert_eq!(asg.layer_sizes().iter().sum::<usize>(), array.len());
    }

    #[test]
    fn layers_are_rhombic(rows in 2usize..12, cols in 2usize..12, d in 0.1f64..10.0, n in 1usize..4) {
        let Some((array, asg)) = assignment(rows, cols, d, n) else { return Ok(()) };
        let side = 3f64.sqrt() * n as f64 * d;
        for s in array.sites() {
            let nbrs = asg.layer_neighbors(s).unwrap();
            prop_assert!(nbrs.len() <= 4);
            let (i, j) = asg.coord(s).unwrap();
            for &b in &nbrs {
                prop_assert_eq!(asg.layer(b).unwrap(), asg.layer(s).unwrap());
                let (bi, bj) = asg.coord(b).unwrap();
                prop_assert!(matches!((bi - i, bj - j), (1, 0) | (-1, 0) | (0, 1) | (0, -1)));
                prop_assert!((array.channel_distance(s, b).unwrap() / (2.0 * n as f64 * d) - 1.0).abs() < 1e-12);
                prop_assert!((array.euclidean_distance(s, b).unwrap() / side - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn schedule_rounds_are_disjoint_matchings(
        rows in 2usize..12,
        cols in 2usize..12,
        n in 1usize..4,
        periodic in any::<bool>(),
    ) {
        let Some((_, asg)) = assignment(rows, cols, 1.0, n) else { return Ok(()) };
        let s = build_schedule(&asg, periodic).unwrap();
        prop_assert_eq!(s.rounds.len(), 6);
        for (a, ra) in s.rounds.iter().enumerate() {
            prop_assert!(ra.pairs.is_matching());
            for rb in &s.rounds[a + 1..] {
                prop_assert!(ra.pairs.is_disjoint(&rb.pairs));
            }
        }
        prop_assert_eq!(s.all_edges(), asg.cluster_edges(periodic));
    }
}
