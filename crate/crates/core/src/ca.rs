//! k-state cyclic cellular automaton with the modified Greenberg-Hastings
//! rules used to grow cluster territories.
//!
//! Update rules, applied synchronously to every cell:
//!
//! * `0 < n < k-1` advances to `n + 1`;
//! * `k-1` wraps to `0`;
//! * `0` becomes `1` when at least `theta` neighbours are non-zero, and
//!   stays `0` otherwise.
//!
//! The lattice has absorbing edges: border cells simply have fewer
//! neighbours.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CellState = u8;

/// Largest supported state count; text dumps use one base-36 digit per cell.
pub const MAX_STATES: u8 = 36;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Neighbourhood {
    /// The cell and its eight surrounding cells.
    #[default]
    #[serde(rename = "moore9")]
    Moore9,
    /// The cell and its four edge-adjacent cells.
    #[serde(rename = "vonneumann5")]
    VonNeumann5,
}

const MOORE: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];
const VON_NEUMANN: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];

impl Neighbourhood {
    /// Cells in the neighbourhood, the centre included.
    pub fn size(self) -> u32 {
        match self {
            Neighbourhood::Moore9 => 9,
            Neighbourhood::VonNeumann5 => 5,
        }
    }

    /// Offsets of the proper neighbours (centre excluded).
    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Neighbourhood::Moore9 => &MOORE,
            Neighbourhood::VonNeumann5 => &VON_NEUMANN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleParams {
    /// Non-zero neighbours needed to excite a quiescent cell.
    pub theta: u32,
    pub neighbourhood: Neighbourhood,
}

impl Default for RuleParams {
    fn default() -> Self {
        Self {
            theta: 1,
            neighbourhood: Neighbourhood::Moore9,
        }
    }
}

impl RuleParams {
    pub fn validate(&self) -> Result<()> {
        if self.theta < 1 {
            return Err(Error::config("theta", "theta ≥ 1"));
        }
        if self.theta > self.neighbourhood.size() {
            return Err(Error::config(
                "theta",
                format!(
                    "theta ≤ {} for this neighbourhood",
                    self.neighbourhood.size()
                ),
            ));
        }
        Ok(())
    }
}

/// How the lattice is initialised.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeedSpec {
    /// Every cell drawn uniformly from `0..k`.
    PrimordialSoup { rng_seed: u64 },
    /// Listed cells start in state 1, all others in 0.
    SeededNuclei { positions: Vec<(usize, usize)> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    width: usize,
    height: usize,
    k: u8,
    cells: Vec<CellState>,
    generation: u64,
}

impl Grid {
    pub fn new(width: usize, height: usize, k: u8, seed: &SeedSpec) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::config("grid", "width and height ≥ 1"));
        }
        if !(2..=MAX_STATES).contains(&k) {
            return Err(Error::config("k", format!("2 ≤ k ≤ {MAX_STATES}")));
        }
        let mut cells = vec![0; width * height];
        match seed {
            SeedSpec::PrimordialSoup { rng_seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*rng_seed);
                for c in &mut cells {
                    *c = rng.random_range(0..k);
                }
            }
            SeedSpec::SeededNuclei { positions } => {
                for &(x, y) in positions {
                    if x >= width || y >= height {
                        return Err(Error::OutsideGrid {
                            x,
                            y,
                            width,
                            height,
                        });
                    }
                    let idx = y * width + x;
                    if cells[idx] != 0 {
                        return Err(Error::config(
                            "seed.positions",
                            format!("positions must be distinct; ({x}, {y}) repeats"),
                        ));
                    }
                    cells[idx] = 1;
                }
            }
        }
        Ok(Self {
            width,
            height,
            k,
            cells,
            generation: 0,
        })
    }

    /// Builds a grid from raw row-major states. States must be `< k`.
    pub fn from_cells(width: usize, height: usize, k: u8, cells: Vec<CellState>) -> Result<Self> {
        if width == 0 || height == 0 || cells.len() != width * height {
            return Err(Error::config(
                "grid",
                "cells.len() must equal width·height ≥ 1",
            ));
        }
        if !(2..=MAX_STATES).contains(&k) {
            return Err(Error::config("k", format!("2 ≤ k ≤ {MAX_STATES}")));
        }
        if let Some(bad) = cells.iter().find(|&&s| s >= k) {
            return Err(Error::config("grid", format!("state {bad} outside 0..{k}")));
        }
        Ok(Self {
            width,
            height,
            k,
            cells,
            generation: 0,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> CellState {
        self.cells[y * self.width + x]
    }

    fn check_inside(&self, (x, y): (usize, usize)) -> Result<()> {
        if x >= self.width || y >= self.height {
            return Err(Error::OutsideGrid {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        Ok(())
    }

    /// One synchronous generation. The receiver is left untouched.
    pub fn step(&self, rules: &RuleParams) -> Grid {
        let mut out = Grid {
            width: self.width,
            height: self.height,
            k: self.k,
            cells: vec![0; self.cells.len()],
            generation: 0,
        };
        self.step_into(rules, &mut out);
        out
    }

    /// Writes the next generation into `out`, reusing its allocation.
    pub fn step_into(&self, rules: &RuleParams, out: &mut Grid) {
        out.width = self.width;
        out.height = self.height;
        out.k = self.k;
        out.generation = self.generation + 1;
        out.cells.resize(self.cells.len(), 0);

        let last = self.k - 1;
        let offsets = rules.neighbourhood.offsets();
        let (w, h) = (self.width as isize, self.height as isize);
        for y in 0..self.height {
            let row = y * self.width;
            for x in 0..self.width {
                let s = self.cells[row + x];
                out.cells[row + x] = if s == last {
                    0
                } else if s > 0 {
                    s + 1
                } else {
                    let mut lit = 0u32;
                    for &(dx, dy) in offsets {
                        let nx = x as isize + dx;
                        let ny = y as isize + dy;
                        if nx >= 0
                            && ny >= 0
                            && nx < w
                            && ny < h
                            && self.cells[ny as usize * self.width + nx as usize] != 0
                        {
                            lit += 1;
                        }
                    }
                    u8::from(lit >= rules.theta)
                };
            }
        }
    }

    /// Advances `steps` generations with double buffering.
    pub fn run(&self, rules: &RuleParams, steps: usize) -> Grid {
        let mut cur = self.clone();
        let mut next = self.clone();
        for _ in 0..steps {
            cur.step_into(rules, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// Extent of the excited region around `origin`: the largest Chebyshev
    /// distance from `origin` to a non-zero cell reachable from it through
    /// 8-connected non-zero cells. Zero when `origin` itself is quiescent.
    pub fn front_distance(&self, origin: (usize, usize)) -> Result<usize> {
        self.check_inside(origin)?;
        let (ox, oy) = origin;
        if self.get(ox, oy) == 0 {
            return Ok(0);
        }
        let mut seen = vec![false; self.cells.len()];
        let mut queue = VecDeque::new();
        seen[oy * self.width + ox] = true;
        queue.push_back((ox, oy));
        let mut extent = 0;
        while let Some((x, y)) = queue.pop_front() {
            extent = extent.max(x.abs_diff(ox).max(y.abs_diff(oy)));
            for &(dx, dy) in &MOORE {
                let nx = x as isize + dx;
                let ny = y as isize + dy;
                if nx < 0 || ny < 0 || nx >= self.width as isize || ny >= self.height as isize {
                    continue;
                }
                let idx = ny as usize * self.width + nx as usize;
                if !seen[idx] && self.cells[idx] != 0 {
                    seen[idx] = true;
                    queue.push_back((nx as usize, ny as usize));
                }
            }
        }
        Ok(extent)
    }

    /// One row per line, top row (`y = 0`) first, states as base-36 digits.
    pub fn dump_text(&self) -> String {
        let mut s = String::with_capacity((self.width + 1) * self.height);
        for row in self.cells.chunks(self.width) {
            for &c in row {
                s.push(char::from_digit(u32::from(c), 36).expect("k ≤ 36"));
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nuclei(w: usize, h: usize, k: u8, pos: &[(usize, usize)]) -> Grid {
        Grid::new(
            w,
            h,
            k,
            &SeedSpec::SeededNuclei {
                positions: pos.to_vec(),
            },
        )
        .unwrap()
    }

    #[test]
    fn seeded_nuclei_construction() {
        let g = nuclei(3, 3, 15, &[(1, 1)]);
        for y in 0..3 {
            for x in 0..3 {
                assert_eq!(g.get(x, y), u8::from((x, y) == (1, 1)));
            }
        }
        assert_eq!(g.generation(), 0);
    }

    #[test]
    fn primordial_soup_is_deterministic() {
        let spec = SeedSpec::PrimordialSoup { rng_seed: 42 };
        let a = Grid::new(150, 150, 15, &spec).unwrap();
        let b = Grid::new(150, 150, 15, &spec).unwrap();
        assert_eq!(a, b);
        assert!(a.cells().iter().all(|&s| s < 15));
        // not degenerate
        assert!(a.cells().iter().any(|&s| s != a.cells()[0]));
    }

    #[test]
    fn seed_outside_grid_is_rejected() {
        let err = Grid::new(
            2,
            2,
            15,
            &SeedSpec::SeededNuclei {
                positions: vec![(5, 5)],
            },
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("position outside grid"), "{msg}");
        assert!(msg.contains("(5, 5)"), "{msg}");
    }

    #[test]
    fn duplicate_seeds_are_rejected() {
        assert!(Grid::new(
            4,
            4,
            5,
            &SeedSpec::SeededNuclei {
                positions: vec![(1, 1), (1, 1)],
            },
        )
        .is_err());
    }

    #[test]
    fn bad_k_is_rejected() {
        let spec = SeedSpec::PrimordialSoup { rng_seed: 0 };
        assert!(Grid::new(3, 3, 1, &spec).is_err());
        assert!(Grid::new(3, 3, 37, &spec).is_err());
        assert!(Grid::new(0, 3, 5, &spec).is_err());
    }

    #[test]
    fn quiescent_grid_is_fixed_point() {
        let g = nuclei(6, 4, 15, &[]);
        let next = g.step(&RuleParams::default());
        assert_eq!(next.cells(), g.cells());
        assert_eq!(next.generation(), 1);
    }

    #[test]
    fn excited_cell_advances() {
        let g = Grid::from_cells(3, 1, 15, vec![0, 7, 0]).unwrap();
        let rules = RuleParams {
            theta: 3,
            neighbourhood: Neighbourhood::Moore9,
        };
        let next = g.step(&rules);
        assert_eq!(next.get(1, 0), 8);
        assert_eq!(next.get(0, 0), 0);
    }

    #[test]
    fn last_state_wraps_and_excites_neighbours() {
        let mut cells = vec![0; 9];
        cells[4] = 14;
        let g = Grid::from_cells(3, 3, 15, cells).unwrap();
        let next = g.step(&RuleParams::default());
        assert_eq!(next.get(1, 1), 0);
        for (i, &s) in next.cells().iter().enumerate() {
            if i != 4 {
                assert_eq!(s, 1, "cell {i}");
            }
        }
    }

    #[test]
    fn theta_counts_only_proper_neighbours() {
        // A single lit neighbour with theta = 2 does not excite.
        let g = Grid::from_cells(3, 1, 5, vec![2, 0, 0]).unwrap();
        let rules = RuleParams {
            theta: 2,
            neighbourhood: Neighbourhood::Moore9,
        };
        assert_eq!(g.step(&rules).get(1, 0), 0);
        let g = Grid::from_cells(3, 1, 5, vec![2, 0, 3]).unwrap();
        assert_eq!(g.step(&rules).get(1, 0), 1);
    }

    #[test]
    fn von_neumann_ignores_diagonals() {
        let mut cells = vec![0; 9];
        cells[0] = 2;
        let g = Grid::from_cells(3, 3, 5, cells).unwrap();
        let rules = RuleParams {
            theta: 1,
            neighbourhood: Neighbourhood::VonNeumann5,
        };
        let next = g.step(&rules);
        assert_eq!(next.get(1, 1), 0);
        assert_eq!(next.get(1, 0), 1);
        assert_eq!(next.get(0, 1), 1);
    }

    #[test]
    fn step_does_not_mutate_input() {
        let g = Grid::new(8, 8, 6, &SeedSpec::PrimordialSoup { rng_seed: 3 }).unwrap();
        let before = g.clone();
        let _ = g.step(&RuleParams::default());
        assert_eq!(g, before);
    }

    #[test]
    fn rule_validation() {
        assert!(RuleParams {
            theta: 0,
            neighbourhood: Neighbourhood::Moore9
        }
        .validate()
        .unwrap_err()
        .to_string()
        .contains("theta ≥ 1"));
        assert!(RuleParams {
            theta: 6,
            neighbourhood: Neighbourhood::VonNeumann5
        }
        .validate()
        .is_err());
        assert!(RuleParams::default().validate().is_ok());
    }

    #[test]
    fn front_distance_basics() {
        let g = nuclei(5, 5, 15, &[]);
        assert_eq!(g.front_distance((2, 2)).unwrap(), 0);
        let g = nuclei(5, 5, 15, &[(2, 2)]);
        assert_eq!(g.front_distance((2, 2)).unwrap(), 0);
        assert!(g.front_distance((5, 0)).is_err());
    }

    #[test]
    fn front_reaches_edge_of_seven_by_seven() {
        // Hand simulation: with theta = 1 the front moves one Chebyshev
        // ring per step, so the 7x7 edge (ring 3) is lit after 3 steps and
        // every cell is still non-zero (states 1..=4).
        let g = nuclei(7, 7, 15, &[(3, 3)]);
        let rules = RuleParams::default();
        let mut cur = g.clone();
        let mut steps = 0;
        while cur.get(0, 0) == 0 {
            cur = cur.step(&rules);
            steps += 1;
        }
        assert_eq!(steps, 3);
        assert_eq!(cur.front_distance((3, 3)).unwrap(), 3);
        assert_eq!(cur.get(3, 3), 4);
    }

    #[test]
    fn dump_uses_base36_rows() {
        let g = Grid::from_cells(3, 2, 36, vec![0, 10, 35, 1, 2, 3]).unwrap();
        assert_eq!(g.dump_text(), "0az\n123\n");
    }

    #[test]
    fn run_matches_repeated_step() {
        let g = Grid::new(9, 7, 5, &SeedSpec::PrimordialSoup { rng_seed: 9 }).unwrap();
        let rules = RuleParams::default();
        let mut manual = g.clone();
        for _ in 0..12 {
            manual = manual.step(&rules);
        }
        assert_eq!(g.run(&rules, 12), manual);
    }
}
