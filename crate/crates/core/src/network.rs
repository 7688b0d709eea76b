//! Sensor-field deployment, node lifecycle and the nucleus/orbit layout of
//! a cluster.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Active,
    Standby,
    Dead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Member,
    OrbitRelay,
    Nucleon,
    ClusterHead,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Active => "active",
            Mode::Standby => "standby",
            Mode::Dead => "dead",
        }
    }
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Member => "member",
            Role::OrbitRelay => "orbit_relay",
            Role::Nucleon => "nucleon",
            Role::ClusterHead => "cluster_head",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub pos: Point,
    /// Residual energy in joules, never negative.
    pub energy: f64,
    pub mode: Mode,
    pub role: Role,
    pub cluster_id: Option<usize>,
    /// 0 is the nucleus; orbits count outward from 1.
    pub orbit_index: Option<usize>,
    /// Rounds left before this node hands over to its stand-by partner.
    pub timer: u32,
    /// Stand-by (or active) counterpart this node swaps with on rotation.
    pub partner: Option<NodeId>,
}

impl Node {
    #[inline]
    pub fn is_alive(&self) -> bool {
        self.mode != Mode::Dead
    }

    #[inline]
    pub fn is_active(&self) -> bool {
        self.mode == Mode::Active
    }
}

/// Bucket grid over the node positions for radius queries.
#[derive(Debug, Clone)]
struct SpatialIndex {
    origin: Point,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<NodeId>>,
}

impl SpatialIndex {
    fn build(nodes: &[Node]) -> Self {
        let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
        let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for n in nodes {
            min_x = min_x.min(n.pos.x);
            min_y = min_y.min(n.pos.y);
            max_x = max_x.max(n.pos.x);
            max_y = max_y.max(n.pos.y);
        }
        if nodes.is_empty() {
            (min_x, min_y, max_x, max_y) = (0.0, 0.0, 0.0, 0.0);
        }
        let origin = Point::new(min_x.floor(), min_y.floor());
        let cols = (max_x - origin.x).floor() as usize + 1;
        let rows = (max_y - origin.y).floor() as usize + 1;
        let mut buckets = vec![Vec::new(); cols * rows];
        for n in nodes {
            let c = (n.pos.x - origin.x).floor() as usize;
            let r = (n.pos.y - origin.y).floor() as usize;
            buckets[r * cols + c].push(n.id);
        }
        Self {
            origin,
            cols,
            rows,
            buckets,
        }
    }

    fn visit_within(&self, nodes: &[Node], center: Point, radius: f64, mut f: impl FnMut(NodeId)) {
        let r2 = radius * radius;
        let lo = |v: f64, o: f64| ((v - radius - o).floor().max(0.0)) as usize;
        let hi = |v: f64, o: f64, n: usize| {
            let h = (v + radius - o).floor();
            if h < 0.0 {
                None
            } else {
                Some((h as usize).min(n - 1))
            }
        };
        let (Some(c1), Some(r1)) = (
            hi(center.x, self.origin.x, self.cols),
            hi(center.y, self.origin.y, self.rows),
        ) else {
            return;
        };
        let c0 = lo(center.x, self.origin.x);
        let r0 = lo(center.y, self.origin.y);
        if c0 > c1 || r0 > r1 {
            return;
        }
        for r in r0..=r1 {
            for c in c0..=c1 {
                for &id in &self.buckets[r * self.cols + c] {
                    if nodes[id].pos.distance_sq(center) <= r2 {
                        f(id);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<Node>,
    width: usize,
    height: usize,
    bs_pos: Point,
    sensing_radius: f64,
    /// Node ids equal row-major lattice cells.
    lattice: bool,
    index: SpatialIndex,
}

/// One node per unit cell of a `w × h` field, all in stand-by at full energy.
pub fn deploy(
    field: (usize, usize),
    bs: Point,
    initial_energy: f64,
    sensing_radius: f64,
) -> Network {
    let (w, h) = field;
    let nodes = (0..w * h)
        .map(|id| Node {
            id,
            pos: Point::new((id % w) as f64, (id / w) as f64),
            energy: initial_energy,
            mode: Mode::Standby,
            role: Role::Member,
            cluster_id: None,
            orbit_index: None,
            timer: 0,
            partner: None,
        })
        .collect::<Vec<_>>();
    let index = SpatialIndex::build(&nodes);
    Network {
        nodes,
        width: w,
        height: h,
        bs_pos: bs,
        sensing_radius,
        lattice: true,
        index,
    }
}

impl Network {
    /// A network at arbitrary positions. `field` is the monitored area; it
    /// is only used for coverage.
    pub fn from_positions(
        positions: &[Point],
        field: (usize, usize),
        bs: Point,
        initial_energy: f64,
        sensing_radius: f64,
    ) -> Network {
        let nodes = positions
            .iter()
            .enumerate()
            .map(|(id, &pos)| Node {
                id,
                pos,
                energy: initial_energy,
                mode: Mode::Standby,
                role: Role::Member,
                cluster_id: None,
                orbit_index: None,
                timer: 0,
                partner: None,
            })
            .collect::<Vec<_>>();
        let index = SpatialIndex::build(&nodes);
        Network {
            nodes,
            width: field.0,
            height: field.1,
            bs_pos: bs,
            sensing_radius,
            lattice: false,
            index,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn nodes_mut(&mut self) -> &mut [Node] {
        &mut self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn field_size(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bs_pos(&self) -> Point {
        self.bs_pos
    }

    pub fn sensing_radius(&self) -> f64 {
        self.sensing_radius
    }

    pub fn is_lattice(&self) -> bool {
        self.lattice
    }

    /// CA cell of a node on a lattice deployment.
    pub fn cell_of(&self, id: NodeId) -> Option<(usize, usize)> {
        self.lattice.then(|| (id % self.width, id / self.width))
    }

    /// Node sitting on a CA cell of a lattice deployment.
    pub fn node_at(&self, x: usize, y: usize) -> Option<NodeId> {
        (self.lattice && x < self.width && y < self.height).then(|| y * self.width + x)
    }

    pub fn total_energy(&self) -> f64 {
        self.nodes.iter().map(|n| n.energy).sum()
    }

    pub fn count(&self, mode: Mode) -> usize {
        self.nodes.iter().filter(|n| n.mode == mode).count()
    }

    /// Ids of all nodes within `radius` of `center`, in ascending order.
    pub fn nodes_within(&self, center: Point, radius: f64) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.index
            .visit_within(&self.nodes, center, radius, |id| out.push(id));
        out.sort_unstable();
        out
    }

    /// Removes up to `joules` from a node and returns what was removed.
    pub fn charge(&mut self, id: NodeId, joules: f64) -> f64 {
        let node = &mut self.nodes[id];
        let taken = joules.min(node.energy).max(0.0);
        node.energy -= taken;
        taken
    }

    /// Writes cluster membership, orbit index and structural roles onto
    /// the nodes. Nodes outside every cluster are left unassigned.
    pub fn apply_clusters(&mut self, clusters: &[Cluster]) {
        for n in &mut self.nodes {
            n.cluster_id = None;
            n.orbit_index = None;
        }
        for c in clusters {
            for &id in &c.nucleus {
                let n = &mut self.nodes[id];
                n.cluster_id = Some(c.id);
                n.orbit_index = Some(0);
                n.role = Role::Nucleon;
            }
            for (j, orbit) in c.orbits.iter().enumerate() {
                for &id in orbit.iter().flatten() {
                    let n = &mut self.nodes[id];
                    n.cluster_id = Some(c.id);
                    n.orbit_index = Some(j + 1);
                    n.role = Role::Member;
                }
            }
            if let Some(h) = c.head {
                self.nodes[h].role = Role::ClusterHead;
            }
        }
    }
}

/// A cluster laid out as a nucleus surrounded by concentric orbits.
///
/// `orbits[j]` holds orbit `j + 1`, whose nodes lie at distance
/// `[(j+1)·r_od, (j+2)·r_od)` from `center`; each orbit is split into
/// angular sub-orbits.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: usize,
    pub members: Vec<NodeId>,
    pub nucleus: Vec<NodeId>,
    pub orbits: Vec<Vec<Vec<NodeId>>>,
    pub head: Option<NodeId>,
    pub r_od: f64,
    pub center: Point,
}

impl Cluster {
    /// Orbit index of a member, 0 for the nucleus.
    pub fn orbit_of(&self, id: NodeId) -> Option<usize> {
        if self.nucleus.contains(&id) {
            return Some(0);
        }
        self.orbits
            .iter()
            .position(|o| o.iter().any(|s| s.contains(&id)))
            .map(|j| j + 1)
    }

    /// The sub-orbit (or the nucleus) that contains `id`.
    pub fn group_of(&self, id: NodeId) -> Option<&[NodeId]> {
        if self.nucleus.contains(&id) {
            return Some(&self.nucleus);
        }
        self.orbits
            .iter()
            .flatten()
            .find(|s| s.contains(&id))
            .map(|s| s.as_slice())
    }

    /// Nucleus followed by every sub-orbit.
    pub fn groups(&self) -> impl Iterator<Item = &[NodeId]> {
        std::iter::once(self.nucleus.as_slice())
            .chain(self.orbits.iter().flatten().map(|s| s.as_slice()))
    }
}

/// Number of angular sub-orbits in orbit `index` (index ≥ 1).
pub fn sector_count(index: usize) -> usize {
    (index + 1).max(1)
}

/// Bins `members` into a nucleus (distance `< r_od` from `nucleus_center`)
/// and concentric orbits of width `r_od`, each cut into `index + 1` equal
/// angular sectors. Empty sub-orbits are dropped; empty orbits are kept so
/// that positions in `orbits` always match orbit indices.
///
/// The provisional head is the nucleon nearest the centre.
pub fn assign_atomic_structure(
    network: &Network,
    cluster_members: &[NodeId],
    nucleus_center: Point,
    r_od: f64,
) -> Result<Cluster> {
    if cluster_members.is_empty() {
        return Err(Error::Structure("cluster has no members".into()));
    }
    if !(r_od > 0.0 && r_od.is_finite()) {
        return Err(Error::Structure(format!(
            "orbital distance {r_od} must be > 0"
        )));
    }
    let mut members = cluster_members.to_vec();
    members.sort_unstable();
    members.dedup();

    let mut nucleus = Vec::new();
    let mut binned: Vec<Vec<Vec<NodeId>>> = Vec::new();
    for &id in &members {
        let pos = network.node(id).pos;
        let d = pos.distance(nucleus_center);
        let index = (d / r_od).floor() as usize;
        if index == 0 {
            nucleus.push(id);
            continue;
        }
        if binned.len() < index {
            binned.resize_with(index, Vec::new);
        }
        let orbit = &mut binned[index - 1];
        let sectors = sector_count(index);
        if orbit.is_empty() {
            orbit.resize_with(sectors, Vec::new);
        }
        let turn = (pos.angle_from(nucleus_center) + PI) / (2.0 * PI);
        let sector = ((turn * sectors as f64).floor() as usize).min(sectors - 1);
        orbit[sector].push(id);
    }
    if nucleus.is_empty() {
        return Err(Error::Structure(
            "nucleus is empty: no member lies within the orbital distance of the centre".into(),
        ));
    }
    for orbit in &mut binned {
        orbit.retain(|s| !s.is_empty());
    }
    let head = nucleus.iter().copied().min_by(|&a, &b| {
        let da = network.node(a).pos.distance_sq(nucleus_center);
        let db = network.node(b).pos.distance_sq(nucleus_center);
        da.total_cmp(&db).then(a.cmp(&b))
    });
    Ok(Cluster {
        id: 0,
        members,
        nucleus,
        orbits: binned,
        head,
        r_od,
        center: nucleus_center,
    })
}

/// Horizontal scanlines per metre used by [`coverage`].
pub const COVERAGE_ROWS_PER_METRE: usize = 8;

/// Fraction of the field within the sensing radius of at least one active
/// node.
///
/// The field is `[-1/2, w-1/2) x [-1/2, h-1/2)`, so lattice nodes sit at
/// unit-cell centres. Each scanline (at the midpoints of `1/8` m strips) is
/// covered by an exact union of disc chords; only the vertical direction is
/// sampled. Scanlines fall between lattice rows, so no sample is aligned
/// with a node.
pub fn coverage(network: &Network) -> f64 {
    let (w, h) = network.field_size();
    let r = network.sensing_radius();
    if w == 0 || h == 0 || r <= 0.0 {
        return 0.0;
    }
    const S: usize = COVERAGE_ROWS_PER_METRE;
    let (x_lo, x_hi) = (-0.5, w as f64 - 0.5);
    let r2 = r * r;
    // active nodes by nearest lattice row, clamped into the field; a node
    // clamped to an edge row is still farther than `r` from any scanline
    // that does not scan that row
    let bucket = |y: f64| (y.round().max(0.0) as usize).min(h - 1);
    let mut by_row: Vec<Vec<Point>> = vec![Vec::new(); h];
    for n in network.nodes().iter().filter(|n| n.is_active()) {
        by_row[bucket(n.pos.y)].push(n.pos);
    }
    for row in &mut by_row {
        if !row.is_sorted_by(|a, b| a.x <= b.x) {
            row.sort_by(|a, b| a.x.total_cmp(&b.x));
        }
    }
    // per scanline: chords from each scanned row, coalesced per row, then a
    // k-way merge of those runs into one union
    let mut spans: Vec<(f64, f64)> = Vec::new();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut covered = 0.0;
    for j in 0..h * S {
        let y = -0.5 + (j as f64 + 0.5) / S as f64;
        spans.clear();
        runs.clear();
        for row in &by_row[bucket(y - r - 1.0)..=bucket(y + r + 1.0)] {
            let start = spans.len();
            for p in row {
                let dy = y - p.y;
                if dy * dy > r2 {
                    continue;
                }
                let half = (r2 - dy * dy).sqrt();
                let lo = (p.x - half).max(x_lo);
                let hi = (p.x + half).min(x_hi);
                if hi > lo {
                    spans.push((lo, hi));
                }
            }
            let run = &mut spans[start..];
            if !run.is_sorted_by(|a, b| a.0 <= b.0) {
                // off-lattice rows need not be sorted
                run.sort_by(|a, b| a.0.total_cmp(&b.0));
            }
            // coalesce the run in place into disjoint intervals
            let mut end = start;
            for i in start..spans.len() {
                let (lo, hi) = spans[i];
                if end > start && lo <= spans[end - 1].1 {
                    spans[end - 1].1 = spans[end - 1].1.max(hi);
                } else {
                    spans[end] = (lo, hi);
                    end += 1;
                }
            }
            spans.truncate(end);
            if end > start {
                runs.push((start, end));
            }
        }
        let mut open: Option<(f64, f64)> = None;
        loop {
            let mut next: Option<usize> = None;
            for (k, &(at, end)) in runs.iter().enumerate() {
                if at < end && next.is_none_or(|n| spans[at].0 < spans[runs[n].0].0) {
                    next = Some(k);
                }
            }
            let Some(k) = next else { break };
            let (lo, hi) = spans[runs[k].0];
            runs[k].0 += 1;
            open = match open {
                Some((a, b)) if lo <= b => Some((a, b.max(hi))),
                Some((a, b)) => {
                    covered += b - a;
                    Some((lo, hi))
                }
                None => Some((lo, hi)),
            };
        }
        if let Some((a, b)) = open {
            covered += b - a;
        }
    }
    (covered / (S * w * h) as f64).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(w: usize, h: usize) -> Network {
        deploy((w, h), Point::new(50.0, 175.0), 0.5, 2.0)
    }

    #[test]
    fn full_scale_deployment() {
        let n = net(150, 150);
        assert_eq!(n.len(), 22_500);
        assert!(n.nodes().iter().all(|x| x.energy == 0.5));
        assert!(n.nodes().iter().all(|x| x.mode == Mode::Standby));
        assert!(n.nodes().iter().all(|x| x.cluster_id.is_none()));
        assert!((n.total_energy() - 11_250.0).abs() < 1e-6);
        assert_eq!(n.bs_pos(), Point::new(50.0, 175.0));
    }

    #[test]
    fn single_node_deployment() {
        let n = net(1, 1);
        assert_eq!(n.len(), 1);
        assert_eq!(n.node(0).pos, Point::new(0.0, 0.0));
    }

    #[test]
    fn lattice_cell_map_is_identity() {
        let n = net(7, 4);
        for id in 0..n.len() {
            let (x, y) = n.cell_of(id).unwrap();
            assert_eq!(n.node_at(x, y), Some(id));
            assert_eq!(n.node(id).pos, Point::new(x as f64, y as f64));
        }
        assert_eq!(n.node_at(7, 0), None);
    }

    #[test]
    fn radius_query_matches_scan() {
        let n = net(12, 9);
        let c = Point::new(4.3, 5.1);
        let fast = n.nodes_within(c, 2.7);
        let slow: Vec<_> = n
            .nodes()
            .iter()
            .filter(|x| x.pos.distance(c) <= 2.7)
            .map(|x| x.id)
            .collect();
        assert_eq!(fast, slow);
        assert!(n.nodes_within(Point::new(-50.0, -50.0), 1.0).is_empty());
    }

    #[test]
    fn charge_never_goes_negative() {
        let mut n = net(2, 1);
        assert_eq!(n.charge(0, 0.2), 0.2);
        assert!((n.charge(0, 1.0) - 0.3).abs() < 1e-15);
        assert_eq!(n.node(0).energy, 0.0);
    }

    #[test]
    fn singleton_structure() {
        let n = net(3, 3);
        let c = assign_atomic_structure(&n, &[4], Point::new(1.0, 1.0), 1.5).unwrap();
        assert_eq!(c.nucleus, vec![4]);
        assert!(c.orbits.is_empty());
        assert_eq!(c.head, Some(4));
    }

    /// Independent annulus binning used to check the 3×3 examples.
    fn oracle_bins(n: &Network, members: &[NodeId], c: Point, r_od: f64) -> Vec<Vec<NodeId>> {
        let mut bins: Vec<Vec<NodeId>> = Vec::new();
        for &m in members {
            let d = ((n.node(m).pos.x - c.x).powi(2) + (n.node(m).pos.y - c.y).powi(2)).sqrt();
            let mut i = 0;
            while (i + 1) as f64 * r_od <= d {
                i += 1;
            }
            if bins.len() <= i {
                bins.resize(i + 1, Vec::new());
            }
            bins[i].push(m);
        }
        bins
    }

    #[test]
    fn three_by_three_patch() {
        let n = net(3, 3);
        let members: Vec<_> = (0..9).collect();
        let centre = Point::new(1.0, 1.0);

        // sqrt(2) < 1.5, so the corners fall inside the nucleus too.
        let c = assign_atomic_structure(&n, &members, centre, 1.5).unwrap();
        let bins = oracle_bins(&n, &members, centre, 1.5);
        assert_eq!(c.nucleus, bins[0]);
        assert_eq!(c.nucleus.len(), 9);
        assert!(c.orbits.is_empty());

        // With r_od = 1.2 the corners form orbit 1.
        let c = assign_atomic_structure(&n, &members, centre, 1.2).unwrap();
        let bins = oracle_bins(&n, &members, centre, 1.2);
        assert_eq!(c.nucleus, vec![1, 3, 4, 5, 7]);
        assert_eq!(c.nucleus, bins[0]);
        let mut orbit1: Vec<_> = c.orbits[0].iter().flatten().copied().collect();
        orbit1.sort_unstable();
        assert_eq!(orbit1, vec![0, 2, 6, 8]);
        assert_eq!(orbit1, bins[1]);
        // two sectors in orbit 1
        assert_eq!(c.orbits[0].len(), 2);
        assert_eq!(c.orbit_of(8), Some(1));
        assert_eq!(c.orbit_of(4), Some(0));
        assert_eq!(c.head, Some(4));
    }

    #[test]
    fn partition_invariant_on_larger_patch() {
        let n = net(15, 15);
        let members: Vec<_> = (0..n.len()).collect();
        let centre = Point::new(7.0, 7.0);
        let r_od = 2.2;
        let c = assign_atomic_structure(&n, &members, centre, r_od).unwrap();
        let mut all: Vec<_> = c.groups().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, members);
        for (j, orbit) in c.orbits.iter().enumerate() {
            let i = (j + 1) as f64;
            assert!(orbit.len() <= sector_count(j + 1));
            for &id in orbit.iter().flatten() {
                let d = n.node(id).pos.distance(centre);
                assert!(d >= i * r_od && d < (i + 1.0) * r_od);
            }
        }
        assert!(c.nucleus.contains(&c.head.unwrap()));
    }

    #[test]
    fn empty_members_and_empty_nucleus_are_errors() {
        let n = net(5, 5);
        assert!(assign_atomic_structure(&n, &[], Point::new(0.0, 0.0), 1.0).is_err());
        // the four corners are all 2√2 away from the centre
        let err = assign_atomic_structure(&n, &[0, 4, 20, 24], Point::new(2.0, 2.0), 1.0);
        assert!(matches!(err, Err(Error::Structure(_))));
        assert!(assign_atomic_structure(&n, &[0], Point::new(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn coverage_extremes() {
        let mut n = net(10, 10);
        assert_eq!(coverage(&n), 0.0);
        for node in n.nodes_mut() {
            node.mode = Mode::Active;
        }
        assert_eq!(coverage(&n), 1.0);
    }

    /// Every chord on every scanline, sorted and merged in one pass.
    fn naive_scanline_coverage(net: &Network) -> f64 {
        let (w, h) = net.field_size();
        let r = net.sensing_radius();
        let s = COVERAGE_ROWS_PER_METRE;
        let mut covered = 0.0;
        for j in 0..h * s {
            let y = -0.5 + (j as f64 + 0.5) / s as f64;
            let mut chords: Vec<(f64, f64)> = net
                .nodes()
                .iter()
                .filter(|n| n.is_active() && (y - n.pos.y).abs() <= r)
                .map(|n| {
                    let half = (r * r - (y - n.pos.y).powi(2)).sqrt();
                    (
                        (n.pos.x - half).max(-0.5),
                        (n.pos.x + half).min(w as f64 - 0.5),
                    )
                })
                .filter(|c| c.1 > c.0)
                .collect();
            chords.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut reach = f64::NEG_INFINITY;
            for (lo, hi) in chords {
                let from = lo.max(reach);
                if hi > from {
                    covered += hi - from;
                }
                reach = reach.max(hi);
            }
        }
        covered / (s * w * h) as f64
    }

    #[test]
    fn coverage_matches_naive_scanlines_off_lattice() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let (w, h) = (rng.random_range(1..15), rng.random_range(1..15));
            let pts: Vec<Point> = (0..rng.random_range(1..60))
                .map(|_| {
                    Point::new(
                        rng.random_range(-3.0..w as f64 + 3.0),
                        rng.random_range(-3.0..h as f64 + 3.0),
                    )
                })
                .collect();
            let r = rng.random_range(0.2..4.0);
            let mut net = Network::from_positions(&pts, (w, h), Point::new(0.0, 0.0), 0.5, r);
            for n in net.nodes_mut() {
                n.mode = if rng.random_bool(0.6) {
                    Mode::Active
                } else {
                    Mode::Standby
                };
            }
            let fast = coverage(&net);
            let slow = naive_scanline_coverage(&net);
            assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
        }
    }

    #[test]
    fn coverage_of_single_interior_disc() {
        let mut n = deploy((30, 30), Point::new(0.0, 0.0), 0.5, 3.0);
        let id = n.node_at(15, 15).unwrap();
        n.node_mut(id).mode = Mode::Active;
        let exact = PI * 9.0 / 900.0;
        assert!((coverage(&n) - exact).abs() < 2e-4);
    }

    #[test]
    fn dead_and_standby_nodes_do_not_cover() {
        let mut n = net(6, 6);
        n.node_mut(3).mode = Mode::Dead;
        n.node_mut(4).mode = Mode::Standby;
        assert_eq!(coverage(&n), 0.0);
    }
}
