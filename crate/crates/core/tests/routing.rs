use std::collections::{HashMap, VecDeque};

use ccabc_core::network::deploy;
use ccabc_core::routing::{route_ch_to_bs, Hop};
use ccabc_core::{NodeId, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Successor of every head by full scan: the nearest head strictly closer
/// to the base station and nearer than the base station itself.
fn successors(
    heads: &[NodeId],
    pos: impl Fn(NodeId) -> Point,
    bs: Point,
) -> HashMap<NodeId, Option<NodeId>> {
    heads
        .iter()
        .map(|&h| {
            let here = pos(h);
            let to_bs = here.distance_sq(bs);
            let next = heads
                .iter()
                .copied()
                .filter(|&o| {
                    o != h && pos(o).distance_sq(bs) < to_bs && pos(o).distance_sq(here) < to_bs
                })
                .min_by(|&a, &b| {
                    pos(a)
                        .distance_sq(here)
                        .total_cmp(&pos(b).distance_sq(here))
                        .then(a.cmp(&b))
                });
            (h, next)
        })
        .collect()
}

#[test]
fn greedy_routes_match_breadth_first_walk_of_successor_graph() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..40 {
        let side = rng.random_range(5..40);
        let bs = Point::new(
            rng.random_range(-20.0..side as f64 + 20.0),
            side as f64 + rng.random_range(1.0..60.0),
        );
        let net = deploy((side, side), bs, 0.5, 2.0);
        let count = rng.random_range(1..(side * side).min(60));
        let mut heads: Vec<NodeId> = (0..net.len()).collect();
        for i in 0..count {
            let j = rng.random_range(i..heads.len());
            heads.swap(i, j);
        }
        heads.truncate(count);
        heads.sort_unstable();

        let succ = successors(&heads, |id| net.node(id).pos, bs);
        for &h in &heads {
            // walk the successor graph breadth-first; it is a forest, so the
            // walk is the unique path to the base station
            let mut seen = vec![h];
            let mut queue = VecDeque::from([h]);
            let mut want = vec![Hop::Node(h)];
            while let Some(cur) = queue.pop_front() {
                match succ[&cur] {
                    Some(n) => {
                        assert!(!seen.contains(&n), "trial {trial}: cycle through {n}");
                        seen.push(n);
                        want.push(Hop::Node(n));
                        queue.push_back(n);
                    }
                    None => want.push(Hop::BaseStation),
                }
            }
            let got = route_ch_to_bs(h, &heads, &net);
            assert_eq!(got, want, "trial {trial}, head {h}");
            // base-station distance falls strictly along the route
            let d: Vec<f64> = got
                .iter()
                .filter_map(|hop| match hop {
                    Hop::Node(n) => Some(net.node(*n).pos.distance(bs)),
                    Hop::BaseStation => None,
                })
                .collect();
            assert!(d.windows(2).all(|w| w[1] < w[0]));
        }
    }
}
