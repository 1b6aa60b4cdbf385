//! Terrain, the hex map, line of sight and A* pathfinding.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::hex::Hex;

/// Largest `move_cost` of any passable terrain.
pub const MAX_MOVE_COST: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Terrain {
    Clear,
    Woods,
    Urban,
    Hill,
    Water,
}

impl Terrain {
    pub const ALL: [Terrain; 5] = [
        Terrain::Clear,
        Terrain::Woods,
        Terrain::Urban,
        Terrain::Hill,
        Terrain::Water,
    ];

    /// Movement points needed to enter; `None` when impassable.
    #[inline]
    pub fn move_cost(self) -> Option<u32> {
        match self {
            Terrain::Clear => Some(1),
            Terrain::Woods | Terrain::Urban | Terrain::Hill => Some(2),
            Terrain::Water => None,
        }
    }

    #[inline]
    pub fn passable(self) -> bool {
        self.move_cost().is_some()
    }

    /// Modifier added to `attack - defense` when the defender stands here.
    #[inline]
    pub fn combat_mod(self) -> i32 {
        match self {
            Terrain::Clear | Terrain::Water => 0,
            Terrain::Woods | Terrain::Hill => -1,
            Terrain::Urban => -2,
        }
    }

    /// Multiplier on the spotting probability of a target standing here.
    #[inline]
    pub fn concealment(self) -> f64 {
        match self {
            Terrain::Clear | Terrain::Water => 1.0,
            Terrain::Hill => 0.8,
            Terrain::Woods => 0.5,
            Terrain::Urban => 0.4,
        }
    }

    /// Whether this terrain blocks a sight line passing through it.
    #[inline]
    pub fn blocks_sight(self, observer_on_hill: bool) -> bool {
        match self {
            Terrain::Woods | Terrain::Urban => true,
            Terrain::Hill => !observer_on_hill,
            Terrain::Clear | Terrain::Water => false,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Terrain::Clear => "clear",
            Terrain::Woods => "woods",
            Terrain::Urban => "urban",
            Terrain::Hill => "hill",
            Terrain::Water => "water",
        }
    }

    /// Single-character glyph used by the text renderer.
    pub fn glyph(self) -> char {
        match self {
            Terrain::Clear => '.',
            Terrain::Woods => '%',
            Terrain::Urban => '#',
            Terrain::Hill => '^',
            Terrain::Water => '~',
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for Terrain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Terrain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Terrain::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown terrain type `{s}`"))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("map dimensions must be positive, got {0}x{1}")]
    BadDimensions(i32, i32),
    #[error("hex {0} is out of bounds")]
    OutOfBounds(Hex),
    #[error("hex {0} is impassable")]
    Impassable(Hex),
    #[error("no path from {0} to {1}")]
    NoPath(Hex, Hex),
}

/// A `width x height` parallelogram of hexes: `0 <= q < width`, `0 <= r < height`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameMap {
    width: i32,
    height: i32,
    terrain: Vec<Terrain>,
}

impl GameMap {
    pub fn new(width: i32, height: i32, fill: Terrain) -> Result<Self, MapError> {
        if width <= 0 || height <= 0 {
            return Err(MapError::BadDimensions(width, height));
        }
        Ok(GameMap {
            width,
            height,
            terrain: vec![fill; (width * height) as usize],
        })
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.terrain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terrain.is_empty()
    }

    /// Largest distance between two in-bounds hexes.
    pub fn diameter(&self) -> u32 {
        (self.width + self.height - 2).max(1) as u32
    }

    #[inline]
    pub fn in_bounds(&self, h: Hex) -> bool {
        h.q >= 0 && h.q < self.width && h.r >= 0 && h.r < self.height
    }

    #[inline]
    pub fn index(&self, h: Hex) -> Option<usize> {
        self.in_bounds(h).then(|| (h.r * self.width + h.q) as usize)
    }

    #[inline]
    pub fn hex_at(&self, idx: usize) -> Hex {
        let idx = idx as i32;
        Hex::new(idx % self.width, idx / self.width)
    }

    pub fn terrain(&self, h: Hex) -> Result<Terrain, MapError> {
        self.index(h).map(|i| self.terrain[i]).ok_or(MapError::OutOfBounds(h))
    }

    /// Terrain lookup for hexes already known to be in bounds.
    #[inline]
    pub(crate) fn terrain_unchecked(&self, h: Hex) -> Terrain {
        self.terrain[(h.r * self.width + h.q) as usize]
    }

    pub fn set_terrain(&mut self, h: Hex, t: Terrain) -> Result<(), MapError> {
        let i = self.index(h).ok_or(MapError::OutOfBounds(h))?;
        self.terrain[i] = t;
        Ok(())
    }

    #[inline]
    pub fn passable(&self, h: Hex) -> bool {
        self.index(h).is_some_and(|i| self.terrain[i].passable())
    }

    /// All in-bounds hexes in row-major order.
    pub fn hexes(&self) -> impl Iterator<Item = Hex> + '_ {
        (0..self.terrain.len()).map(|i| self.hex_at(i))
    }

    pub fn passable_neighbors(&self, h: Hex) -> impl Iterator<Item = Hex> + '_ {
        h.neighbors().filter(move |n| self.passable(*n))
    }

    pub fn terrain_cells(&self) -> &[Terrain] {
        &self.terrain
    }

    /// Line of sight: woods and urban between the endpoints block; hills
    /// block unless the observer itself stands on a hill.
    pub fn line_of_sight(&self, from: Hex, to: Hex) -> bool {
        let on_hill = self.terrain(from).map(|t| t == Terrain::Hill).unwrap_or(false);
        let mut clear = true;
        from.for_each_interior(to, |h| {
            if let Ok(t) = self.terrain(h) {
                if t.blocks_sight(on_hill) {
                    clear = false;
                }
            }
        });
        clear
    }

    /// Minimal-cost path from `from` to `to`, excluding `from`, including `to`.
    ///
    /// A* with terrain move costs as edge weights and hex distance as the
    /// heuristic (admissible since every passable cost is at least 1). Among
    /// open nodes with equal f-score the lexicographically smallest `(q, r)`
    /// is expanded first, and parents are only replaced on strict improvement,
    /// so the returned path is fully deterministic.
    pub fn find_path(&self, from: Hex, to: Hex) -> Result<Vec<Hex>, MapError> {
        for h in [from, to] {
            if !self.in_bounds(h) {
                return Err(MapError::OutOfBounds(h));
            }
            if !self.passable(h) {
                return Err(MapError::Impassable(h));
            }
        }
        if from == to {
            return Ok(Vec::new());
        }
        let n = self.terrain.len();
        let mut g = vec![u32::MAX; n];
        let mut parent = vec![usize::MAX; n];
        let mut closed = vec![false; n];
        let start = self.index(from).unwrap();
        let goal = self.index(to).unwrap();
        g[start] = 0;
        let mut open = BinaryHeap::new();
        open.push(Reverse((from.distance(to), from.q, from.r)));
        while let Some(Reverse((_, q, r))) = open.pop() {
            let cur = Hex::new(q, r);
            let ci = self.index(cur).unwrap();
            if closed[ci] {
                continue;
            }
            closed[ci] = true;
            if ci == goal {
                break;
            }
            for nb in cur.neighbors() {
                let Some(ni) = self.index(nb) else { continue };
                let Some(cost) = self.terrain[ni].move_cost() else {
                    continue;
                };
                if closed[ni] {
                    continue;
                }
                let cand = g[ci] + cost;
                if cand < g[ni] {
                    g[ni] = cand;
                    parent[ni] = ci;
                    open.push(Reverse((cand + nb.distance(to), nb.q, nb.r)));
                }
            }
        }
        if g[goal] == u32::MAX {
            return Err(MapError::NoPath(from, to));
        }
        let mut path = Vec::new();
        let mut cur = goal;
        while cur != start {
            path.push(self.hex_at(cur));
            cur = parent[cur];
        }
        path.reverse();
        Ok(path)
    }

    /// Sum of entry costs along a path produced by [`GameMap::find_path`].
    pub fn path_cost(&self, path: &[Hex]) -> u32 {
        path.iter()
            .map(|h| {
                self.terrain(*h)
                    .ok()
                    .and_then(Terrain::move_cost)
                    .unwrap_or(u32::MAX / 4)
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain Dijkstra over the same graph, independent of the A* code path.
    fn dijkstra(map: &GameMap, from: Hex) -> Vec<u32> {
        let mut dist = vec![u32::MAX; map.len()];
        dist[map.index(from).unwrap()] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0u32, map.index(from).unwrap())));
        while let Some(Reverse((d, i))) = heap.pop() {
            if d > dist[i] {
                continue;
            }
            for nb in map.hex_at(i).neighbors() {
                if let Some(ni) = map.index(nb) {
                    if let Some(c) = map.terrain_cells()[ni].move_cost() {
                        if d + c < dist[ni] {
                            dist[ni] = d + c;
                            heap.push(Reverse((d + c, ni)));
                        }
                    }
                }
            }
        }
        dist
    }

    /// Every minimal-cost path from `from` to `to`, by DFS over the Dijkstra DAG.
    fn all_optimal_paths(map: &GameMap, from: Hex, to: Hex) -> Vec<Vec<Hex>> {
        let dist = dijkstra(map, from);
        let mut out = Vec::new();
        fn back(map: &GameMap, dist: &[u32], from: Hex, cur: Hex, acc: &mut Vec<Hex>, out: &mut Vec<Vec<Hex>>) {
            if cur == from {
                let mut p = acc.clone();
                p.reverse();
                out.push(p);
                return;
            }
            let dc = dist[map.index(cur).unwrap()];
            let cost = map.terrain(cur).unwrap().move_cost().unwrap();
            for nb in cur.neighbors() {
                if let Some(ni) = map.index(nb) {
                    if dist[ni] != u32::MAX && dist[ni] + cost == dc {
                        if nb != from {
                            acc.push(nb);
                        }
                        back(map, dist, from, nb, acc, out);
                        if nb != from {
                            acc.pop();
                        }
                    }
                }
            }
        }
        let mut acc = vec![to];
        back(map, &dist, from, to, &mut acc, &mut out);
        // `acc` starts with the goal; strip the start from each path.
        out.into_iter()
            .map(|p| p.into_iter().filter(|h| *h != from).collect())
            .collect()
    }

    #[test]
    fn terrain_constants() {
        assert_eq!(Terrain::Clear.move_cost(), Some(1));
        assert_eq!(Terrain::Water.move_cost(), None);
        assert_eq!(Terrain::Urban.combat_mod(), -2);
        assert_eq!(Terrain::Woods.concealment(), 0.5);
        for t in Terrain::ALL {
            assert!(t.concealment() > 0.0 && t.concealment() <= 1.0);
            if let Some(c) = t.move_cost() {
                assert!((1..=MAX_MOVE_COST).contains(&c));
            }
        }
    }

    #[test]
    fn same_hex_path_is_empty() {
        let m = GameMap::new(5, 5, Terrain::Clear).unwrap();
        assert_eq!(m.find_path(Hex::new(2, 2), Hex::new(2, 2)).unwrap(), vec![]);
    }

    #[test]
    fn straight_clear_line_costs_three() {
        let m = GameMap::new(6, 3, Terrain::Clear).unwrap();
        let p = m.find_path(Hex::new(0, 1), Hex::new(3, 1)).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(m.path_cost(&p), 3);
        assert_eq!(dijkstra(&m, Hex::new(0, 1))[m.index(Hex::new(3, 1)).unwrap()], 3);
    }

    #[test]
    fn tie_between_woods_line_and_clear_detour_is_deterministic() {
        // Row r=1 from (0,1) to (3,1): going straight enters (1,1) woods (2),
        // (2,1) clear, (3,1) clear -> cost 4. Detours over clear cost 4 too.
        let mut m = GameMap::new(5, 3, Terrain::Clear).unwrap();
        m.set_terrain(Hex::new(1, 1), Terrain::Woods).unwrap();
        let from = Hex::new(0, 1);
        let to = Hex::new(3, 1);
        let optimal = all_optimal_paths(&m, from, to);
        assert!(optimal.len() > 1, "the fixture must contain a tie");
        let p = m.find_path(from, to).unwrap();
        assert_eq!(m.path_cost(&p), 4);
        assert!(optimal.contains(&p));
        // All three start neighbours (0,2), (1,0), (1,1) open with f = 4 and
        // are expanded in (q, r) order; (1,1) claims (2,1) first and later
        // equal-cost parents do not displace it.
        assert_eq!(p, vec![Hex::new(1, 1), Hex::new(2, 1), Hex::new(3, 1)]);
        assert_eq!(m.find_path(from, to).unwrap(), p);
    }

    #[test]
    fn walled_off_goal_has_no_path() {
        let mut m = GameMap::new(5, 5, Terrain::Clear).unwrap();
        let goal = Hex::new(2, 2);
        for n in goal.neighbors() {
            m.set_terrain(n, Terrain::Water).unwrap();
        }
        assert_eq!(
            m.find_path(Hex::new(0, 0), goal),
            Err(MapError::NoPath(Hex::new(0, 0), goal))
        );
    }

    #[test]
    fn astar_matches_dijkstra_on_random_maps() {
        use crate::engine::rng::SplitMix64;
        use rand::Rng;
        let mut rng = SplitMix64::new(99);
        let mut checked = 0;
        while checked < 1000 {
            let w = rng.gen_range(3..12);
            let h = rng.gen_range(3..12);
            let mut m = GameMap::new(w, h, Terrain::Clear).unwrap();
            for hex in m.hexes().collect::<Vec<_>>() {
                let t = Terrain::ALL[rng.gen_range(0..5)];
                m.set_terrain(hex, t).unwrap();
            }
            let a = m.hex_at(rng.gen_range(0..m.len()));
            let b = m.hex_at(rng.gen_range(0..m.len()));
            if !m.passable(a) || !m.passable(b) {
                continue;
            }
            let d = dijkstra(&m, a)[m.index(b).unwrap()];
            match m.find_path(a, b) {
                Ok(p) => {
                    assert_eq!(m.path_cost(&p), d);
                    let mut prev = a;
                    for h in &p {
                        assert_eq!(prev.distance(*h), 1);
                        assert!(m.passable(*h));
                        prev = *h;
                    }
                }
                Err(MapError::NoPath(..)) => assert_eq!(d, u32::MAX),
                Err(e) => panic!("unexpected {e}"),
            }
            checked += 1;
        }
    }

    #[test]
    fn hills_block_sight_unless_observer_on_hill() {
        let mut m = GameMap::new(5, 1, Terrain::Clear).unwrap();
        m.set_terrain(Hex::new(1, 0), Terrain::Hill).unwrap();
        assert!(!m.line_of_sight(Hex::new(0, 0), Hex::new(2, 0)));
        m.set_terrain(Hex::new(0, 0), Terrain::Hill).unwrap();
        assert!(m.line_of_sight(Hex::new(0, 0), Hex::new(2, 0)));
        m.set_terrain(Hex::new(2, 0), Terrain::Woods).unwrap();
        assert!(!m.line_of_sight(Hex::new(0, 0), Hex::new(3, 0)));
        // The target's own hex never blocks.
        assert!(m.line_of_sight(Hex::new(1, 0), Hex::new(2, 0)));
    }
}
