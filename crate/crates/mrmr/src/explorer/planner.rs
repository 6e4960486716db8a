//! Grid path planning over a robot's known map.
//!
//! Planning happens on the 2D footprint: a cell is an obstacle when its
//! flattened band contains a known-occupied voxel, inflated by the robot
//! radius. Unknown cells are traversable at a cost penalty so that robots can
//! commit to targets beyond the sensing horizon; execution gates motion on
//! known-free cells.

use crate::cues::{distance_transform, flatten, BinaryMap, DistanceField};
use crate::geom::Vec2;
use crate::perception::{CellState, KnownMap};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Planner parameters.
#[derive(Debug, Clone)]
pub struct PlannerConfig {
    pub inflation_radius: f64,
    pub unknown_cost: f64,
    pub flight_z: f64,
    pub z_low: f64,
    pub z_high: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            inflation_radius: 0.45,
            unknown_cost: 2.0,
            flight_z: 1.0,
            z_low: 0.0,
            z_high: 1.8,
        }
    }
}

/// 2D navigation view of a known map.
pub struct Nav2D {
    pub w: usize,
    pub h: usize,
    pub cell: f64,
    /// known occupied in the flatten band
    occupied: Vec<bool>,
    /// within inflation radius of an occupied cell
    blocked: Vec<bool>,
    /// known free at flight level
    free: Vec<bool>,
}

impl Nav2D {
    /// Builds the view from scratch. Planning uses the raw flattened
    /// occupancy (no median filter, no dilation): known wall surfaces may be
    /// a single cell thick and must stay present.
    pub fn build(map: &KnownMap, cfg: &PlannerConfig) -> Nav2D {
        Nav2D::from_flatten(flatten(map, cfg.z_low, cfg.z_high), map, cfg)
    }

    /// Builds the view from an already computed raw flatten.
    pub fn from_flatten(raw: BinaryMap, map: &KnownMap, cfg: &PlannerConfig) -> Nav2D {
        let dist = distance_transform(&raw);
        Nav2D::from_parts(&raw, &dist, map, cfg)
    }

    /// Builds the view from a raw binary map and its distance field.
    pub fn from_parts(
        binary: &BinaryMap,
        dist: &DistanceField,
        map: &KnownMap,
        cfg: &PlannerConfig,
    ) -> Nav2D {
        let (w, h) = (binary.w, binary.h);
        let iz = ((cfg.flight_z / map.dims.cell) as usize).min(map.dims.nz - 1);
        let mut occupied = vec![false; w * h];
        let mut blocked = vec![false; w * h];
        let mut free = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                occupied[i] = binary.at(x, y) == 1;
                blocked[i] = occupied[i] || dist.at(x, y) <= cfg.inflation_radius;
                free[i] = !occupied[i] && map.state(x, y, iz) == CellState::Free;
            }
        }
        Nav2D { w, h, cell: binary.cell, occupied, blocked, free }
    }

    #[inline]
    fn at(&self, x: usize, y: usize) -> usize {
        y * self.w + x
    }

    #[inline]
    pub fn traversable(&self, x: usize, y: usize) -> bool {
        !self.blocked[self.at(x, y)]
    }

    #[inline]
    pub fn known_free(&self, x: usize, y: usize) -> bool {
        self.free[self.at(x, y)]
    }

    #[inline]
    pub fn unknown(&self, x: usize, y: usize) -> bool {
        let i = self.at(x, y);
        !self.occupied[i] && !self.free[i]
    }

    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        if p.x < 0.0 || p.y < 0.0 {
            return None;
        }
        let x = (p.x / self.cell) as usize;
        let y = (p.y / self.cell) as usize;
        if x < self.w && y < self.h {
            Some((x, y))
        } else {
            None
        }
    }

    pub fn center_of(&self, x: usize, y: usize) -> Vec2 {
        Vec2::new((x as f64 + 0.5) * self.cell, (y as f64 + 0.5) * self.cell)
    }

    /// Frontier cells: traversable, known free, 4-adjacent to an unknown cell.
    pub fn frontier_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 0..self.h {
            for x in 0..self.w {
                if !self.free[self.at(x, y)] || self.blocked[self.at(x, y)] {
                    continue;
                }
                let mut adj_unknown = false;
                if x > 0 && self.unknown(x - 1, y) {
                    adj_unknown = true;
                }
                if x + 1 < self.w && self.unknown(x + 1, y) {
                    adj_unknown = true;
                }
                if y > 0 && self.unknown(x, y - 1) {
                    adj_unknown = true;
                }
                if y + 1 < self.h && self.unknown(x, y + 1) {
                    adj_unknown = true;
                }
                if adj_unknown {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// BFS step-count distances from a cell over the traversable graph
    /// (8-connected, corner cutting forbidden). `u32::MAX` = unreachable.
    pub fn bfs_from(&self, start: (usize, usize)) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.w * self.h];
        let mut queue = std::collections::VecDeque::new();
        dist[self.at(start.0, start.1)] = 0;
        queue.push_back(start);
        while let Some((x, y)) = queue.pop_front() {
            let d = dist[self.at(x, y)];
            for (nx, ny) in self.neighbors(x, y) {
                let i = self.at(nx, ny);
                if dist[i] == u32::MAX {
                    dist[i] = d + 1;
                    queue.push_back((nx, ny));
                }
            }
        }
        dist
    }

    fn neighbors(&self, x: usize, y: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(8);
        let deltas: [(i64, i64); 8] = [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ];
        for (dx, dy) in deltas {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx < 0 || ny < 0 || nx >= self.w as i64 || ny >= self.h as i64 {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if !self.traversable(nx, ny) {
                continue;
            }
            // diagonal moves need both orthogonal cells clear
            if dx != 0 && dy != 0 {
                let a = (x as i64 + dx) as usize;
                let b = (y as i64 + dy) as usize;
                if !self.traversable(a, y) || !self.traversable(x, b) {
                    continue;
                }
            }
            out.push((nx, ny));
        }
        out
    }

    /// True when every cell the segment passes through is traversable
    /// (endpoints exempt from inflation but never occupied).
    pub fn segment_clear(&self, a: Vec2, b: Vec2) -> bool {
        let (Some(ca), Some(cb)) = (self.cell_of(a), self.cell_of(b)) else {
            return false;
        };
        let mut clear = true;
        self.traverse2d(a, b, |x, y| {
            let endpoint = (x, y) == ca || (x, y) == cb;
            let ok = if endpoint {
                !self.occupied[self.at(x, y)]
            } else {
                self.traversable(x, y)
            };
            if !ok {
                clear = false;
            }
            ok
        });
        clear
    }

    /// 2D grid traversal from `a` to `b`; the callback returns false to stop.
    pub fn traverse2d(&self, a: Vec2, b: Vec2, mut visit: impl FnMut(usize, usize) -> bool) {
        let Some((mut x, mut y)) = self.cell_of(a) else {
            return;
        };
        let Some(end) = self.cell_of(b) else {
            return;
        };
        let d = b - a;
        let len = d.norm();
        if len < 1e-12 {
            visit(x, y);
            return;
        }
        let dir = d * (1.0 / len);
        let step = |v: f64| if v > 0.0 { 1i64 } else if v < 0.0 { -1 } else { 0 };
        let (sx, sy) = (step(dir.x), step(dir.y));
        let boundary = |i: usize, s: i64| if s > 0 { (i as f64 + 1.0) * self.cell } else { i as f64 * self.cell };
        let mut tmax_x = if sx == 0 { f64::INFINITY } else { (boundary(x, sx) - a.x) / dir.x };
        let mut tmax_y = if sy == 0 { f64::INFINITY } else { (boundary(y, sy) - a.y) / dir.y };
        let tdx = if sx == 0 { f64::INFINITY } else { (self.cell / dir.x).abs() };
        let tdy = if sy == 0 { f64::INFINITY } else { (self.cell / dir.y).abs() };
        loop {
            if !visit(x, y) {
                return;
            }
            if (x, y) == end {
                return;
            }
            if tmax_x <= tmax_y {
                tmax_x += tdx;
                let n = x as i64 + sx;
                if n < 0 || n >= self.w as i64 {
                    return;
                }
                x = n as usize;
            } else {
                tmax_y += tdy;
                let n = y as i64 + sy;
                if n < 0 || n >= self.h as i64 {
                    return;
                }
                y = n as usize;
            }
            if tmax_x.min(tmax_y) > len + self.cell * 2.0 {
                return; // safety bound; should exit via `end`
            }
        }
    }

    /// Whether the known-free corridor between two points is already
    /// walkable (used to gate motion on the raw, uninflated map).
    pub fn segment_known_free(&self, a: Vec2, b: Vec2) -> bool {
        let mut ok = true;
        self.traverse2d(a, b, |x, y| {
            if !self.free[self.at(x, y)] {
                ok = false;
                return false;
            }
            true
        });
        ok
    }
}

#[derive(PartialEq)]
struct Cost(f64);
impl Eq for Cost {}
impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cost {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// A* from `start` to `goal` over the navigation view. Unknown cells cost
/// `unknown_cost` per meter, known-free cells cost 1. The start and goal
/// cells are exempt from inflation (escape / approach), never from known
/// occupancy. The returned path is shortcut by line of sight and begins at
/// the first waypoint after `start`.
pub fn plan_path(nav: &Nav2D, start: Vec2, goal: Vec2, cfg: &PlannerConfig) -> Option<Vec<Vec2>> {
    let s = nav.cell_of(start)?;
    let g = nav.cell_of(goal)?;
    if nav.occupied[nav.at(g.0, g.1)] || nav.occupied[nav.at(s.0, s.1)] {
        return None;
    }
    if s == g {
        return Some(vec![goal]);
    }
    let idx = |c: (usize, usize)| c.1 * nav.w + c.0;
    let heuristic = |c: (usize, usize)| {
        let dx = c.0 as f64 - g.0 as f64;
        let dy = c.1 as f64 - g.1 as f64;
        (dx * dx + dy * dy).sqrt() * nav.cell
    };
    let mut best = vec![f64::INFINITY; nav.w * nav.h];
    let mut parent: Vec<u32> = vec![u32::MAX; nav.w * nav.h];
    let mut heap: BinaryHeap<Reverse<(Cost, u64, usize, usize)>> = BinaryHeap::new();
    let mut seq = 0u64;
    best[idx(s)] = 0.0;
    heap.push(Reverse((Cost(heuristic(s)), seq, s.0, s.1)));
    let mut found = false;
    while let Some(Reverse((_, _, x, y))) = heap.pop() {
        if (x, y) == g {
            found = true;
            break;
        }
        let here = best[idx((x, y))];
        for (nx, ny) in nav.neighbors_for_plan(x, y, s, g) {
            let step_len = if nx != x && ny != y {
                nav.cell * std::f64::consts::SQRT_2
            } else {
                nav.cell
            };
            let mult = if nav.known_free(nx, ny) { 1.0 } else { cfg.unknown_cost };
            let cand = here + step_len * mult;
            let i = idx((nx, ny));
            if cand < best[i] {
                best[i] = cand;
                parent[i] = idx((x, y)) as u32;
                seq += 1;
                heap.push(Reverse((Cost(cand + heuristic((nx, ny))), seq, nx, ny)));
            }
        }
    }
    if !found {
        return None;
    }
    // reconstruct cell path
    let mut cells = vec![g];
    let mut cur = idx(g);
    while parent[cur] != u32::MAX {
        cur = parent[cur] as usize;
        cells.push((cur % nav.w, cur / nav.w));
    }
    cells.reverse();
    // line-of-sight shortcutting over cell centers
    let pts: Vec<Vec2> = cells.iter().map(|&(x, y)| nav.center_of(x, y)).collect();
    let mut waypoints = Vec::new();
    let mut anchor = start;
    let mut i = 0usize;
    while i + 1 < pts.len() {
        let mut j = pts.len() - 1;
        let mut advanced = false;
        while j > i {
            if nav.segment_clear(anchor, pts[j]) {
                waypoints.push(pts[j]);
                anchor = pts[j];
                i = j;
                advanced = true;
                break;
            }
            j -= 1;
        }
        if !advanced {
            // no shortcut: take the immediate next cell
            i += 1;
            waypoints.push(pts[i]);
            anchor = pts[i];
        }
    }
    if waypoints.is_empty() {
        waypoints.push(goal);
    } else {
        // land exactly on the goal point
        let last = waypoints.last_mut().unwrap();
        *last = goal;
    }
    Some(waypoints)
}

impl Nav2D {
    /// Planning neighbors: like [`Nav2D::neighbors`], with the goal cell and
    /// a small escape zone around the start exempt from inflation (a robot
    /// that ended up inside the inflation band must be able to crawl out).
    fn neighbors_for_plan(
        &self,
        x: usize,
        y: usize,
        s: (usize, usize),
        g: (usize, usize),
    ) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(8);
        let deltas: [(i64, i64); 8] = [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ];
        let passable = |cx: usize, cy: usize| {
            let near_start = cx.abs_diff(s.0).max(cy.abs_diff(s.1)) <= 2;
            if near_start || (cx, cy) == g {
                !self.occupied[self.at(cx, cy)]
            } else {
                self.traversable(cx, cy)
            }
        };
        for (dx, dy) in deltas {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx < 0 || ny < 0 || nx >= self.w as i64 || ny >= self.h as i64 {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if !passable(nx, ny) {
                continue;
            }
            if dx != 0 && dy != 0 && (!passable(nx, y) || !passable(x, ny)) {
                continue;
            }
            out.push((nx, ny));
        }
        out
    }
}
