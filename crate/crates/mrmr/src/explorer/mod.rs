//! Robot policies: the MRMR control loop, the frontier baseline, and the
//! shared path-following kinematics.

pub mod planner;
pub mod sim;

use crate::circles::{CircleConfig, CircleSet};
use crate::coordination::{CoordinationState, ReachedSetsMessage};
use crate::cues::{
    classify_cues, dilate8, distance_transform, flatten, median_filter, BinaryMap, CueConfig,
    CUE_Z,
};
use crate::geom::{wrap_angle, Point3, Vec2};
use crate::grid::VoxelSet;
use crate::perception::{KnownMap, SensorConfig};
use planner::{plan_path, Nav2D, PlannerConfig};
use std::time::Instant;

/// Full per-robot configuration of the exploration loop.
#[derive(Debug, Clone)]
pub struct ExplorerConfig {
    pub tick_dt: f64,
    pub speed: f64,
    pub yaw_rate: f64,
    /// Circle adjacency factor: chain when center distance < mu * (r + r').
    pub mu: f64,
    pub reach_tolerance: f64,
    /// Backoff (ticks) before retrying a target that could not be planned to.
    pub skip_ticks: u64,
    pub room_visit_threshold: f64,
    pub eps_d: f64,
    pub eps_c: f64,
    pub cue: CueConfig,
    pub circle: CircleConfig,
    pub planner: PlannerConfig,
    pub sensors: SensorConfig,
}

impl Default for ExplorerConfig {
    fn default() -> Self {
        ExplorerConfig {
            tick_dt: 0.1,
            speed: 1.0,
            yaw_rate: 1.5,
            mu: 1.1,
            reach_tolerance: 0.5,
            skip_ticks: 100,
            room_visit_threshold: 0.5,
            eps_d: 1.0,
            eps_c: 1.5,
            cue: CueConfig::default(),
            circle: CircleConfig::default(),
            planner: PlannerConfig::default(),
            sensors: SensorConfig::default(),
        }
    }
}

/// What a robot is currently flying towards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Door(Point3),
    Circle { id: u32, center: Vec2, r: f64 },
    Frontier(Vec2),
}

impl Target {
    pub fn point(&self) -> Vec2 {
        match self {
            Target::Door(p) => p.xy(),
            Target::Circle { center, .. } => *center,
            Target::Frontier(p) => *p,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Target::Door(_) => "door",
            Target::Circle { .. } => "circle",
            Target::Frontier(_) => "frontier",
        }
    }
}

/// Behavior mode, logged per tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RobotMode {
    Idle,
    ToDoor,
    ToCircle,
    Frontier,
}

impl RobotMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RobotMode::Idle => "idle",
            RobotMode::ToDoor => "to_door",
            RobotMode::ToCircle => "to_circle",
            RobotMode::Frontier => "frontier",
        }
    }
}

/// Stage timing accumulators for the cue pipeline (microseconds).
#[derive(Debug, Clone, Default)]
pub struct StageTimes {
    pub flatten_us: Vec<f64>,
    pub edt_us: Vec<f64>,
    pub classify_us: Vec<f64>,
    pub circles_us: Vec<f64>,
}

/// Mutable per-robot state.
#[derive(Debug, Clone)]
pub struct RobotState {
    pub id: usize,
    pub pose: Point3,
    pub yaw: f64,
    pub target: Option<Target>,
    pub path: Vec<Vec2>,
    pub coord: CoordinationState,
    pub circles: CircleSet,
    pub observed: VoxelSet,
    pub path_len: f64,
    pub seq: u64,
    blocked_ticks: u32,
    skip_doors: Vec<(Point3, u64)>,
    skip_circles: Vec<(u32, u64)>,
}

impl RobotState {
    pub fn new(id: usize, pose: Point3, yaw: f64, observed_len: usize, cfg: &ExplorerConfig) -> Self {
        let mut coord = CoordinationState::default();
        coord.eps_d = cfg.eps_d;
        coord.eps_c = cfg.eps_c;
        RobotState {
            id,
            pose,
            yaw,
            target: None,
            path: Vec::new(),
            coord,
            circles: CircleSet::new(),
            observed: VoxelSet::new(observed_len),
            path_len: 0.0,
            seq: 0,
            blocked_ticks: 0,
            skip_doors: Vec::new(),
            skip_circles: Vec::new(),
        }
    }

    pub fn mode(&self) -> RobotMode {
        match self.target {
            None => RobotMode::Idle,
            Some(Target::Door(_)) => RobotMode::ToDoor,
            Some(Target::Circle { .. }) => RobotMode::ToCircle,
            Some(Target::Frontier(_)) => RobotMode::Frontier,
        }
    }

    fn clear_target(&mut self) {
        self.target = None;
        self.path.clear();
    }

    fn door_skipped(&self, p: Point3) -> bool {
        self.skip_doors.iter().any(|(s, _)| s.dist(p) < 0.3)
    }

    fn circle_skipped(&self, id: u32) -> bool {
        self.skip_circles.iter().any(|&(s, _)| s == id)
    }
}

fn us(from: Instant) -> f64 {
    from.elapsed().as_secs_f64() * 1e6
}

fn binary_at_point(b: &BinaryMap, p: Vec2) -> Option<u8> {
    if p.x < 0.0 || p.y < 0.0 {
        return None;
    }
    let x = (p.x / b.cell) as usize;
    let y = (p.y / b.cell) as usize;
    if x < b.w && y < b.h {
        Some(b.at(x, y))
    } else {
        None
    }
}

/// Nearest door candidate that survives reached-set filtering and is not in
/// the robot's temporary skip list.
fn pick_door(robot: &RobotState, pos: Point3) -> Option<Point3> {
    let mut best: Option<(f64, u32, Point3)> = None;
    for d in &robot.coord.doors {
        if robot.coord.door_covered(d.point) || robot.door_skipped(d.point) {
            continue;
        }
        let dist = pos.dist(d.point);
        let better = match best {
            None => true,
            Some((bd, bid, _)) => dist < bd || (dist == bd && d.id < bid),
        };
        if better {
            best = Some((dist, d.id, d.point));
        }
    }
    best.map(|(_, _, p)| p)
}

/// Nearest unreached, unexcluded circle not in the skip list.
fn pick_circle(robot: &RobotState, pos: Point3) -> Option<(u32, Vec2, f64)> {
    let mut best: Option<(f64, u32, Vec2, f64)> = None;
    for c in robot.circles.iter() {
        if c.reached || robot.circle_skipped(c.id) || robot.coord.circle_excluded(c) {
            continue;
        }
        let center = Point3::new(c.center.x, c.center.y, CUE_Z);
        let dist = pos.dist(center);
        let better = match best {
            None => true,
            Some((bd, bid, _, _)) => dist < bd || (dist == bd && c.id < bid),
        };
        if better {
            best = Some((dist, c.id, c.center, c.r));
        }
    }
    best.map(|(_, id, c, r)| (id, c, r))
}

/// One MRMR control tick: extract cues, refresh candidate sets, pursue the
/// door -> circle -> adjacent-circle progression, fall back to frontier
/// exploration when no cue targets remain, and emit a reached-sets message
/// when `D_r`/`C_r` changed.
pub fn think_mrmr(
    robot: &mut RobotState,
    map: &KnownMap,
    cfg: &ExplorerConfig,
    tick: u64,
    times: &mut StageTimes,
) -> Option<ReachedSetsMessage> {
    let t0 = Instant::now();
    let raw = flatten(map, cfg.cue.z_low, cfg.cue.z_high);
    let binary = if cfg.cue.dilate {
        median_filter(&dilate8(&raw))
    } else {
        median_filter(&raw)
    };
    times.flatten_us.push(us(t0));
    let t1 = Instant::now();
    let dist = distance_transform(&binary);
    times.edt_us.push(us(t1));
    let t2 = Instant::now();
    let cueset = classify_cues(&binary, &dist, &cfg.cue);
    times.classify_us.push(us(t2));

    robot.coord.set_door_candidates(&cueset.saddles);
    let t3 = Instant::now();
    let maxima: Vec<(Vec2, f64)> = cueset.maxima.iter().map(|(p, d)| (p.xy(), *d)).collect();
    robot.circles.update(&maxima, &dist, &cfg.circle);
    times.circles_us.push(us(t3));

    robot.skip_doors.retain(|&(_, exp)| exp > tick);
    robot.skip_circles.retain(|&(_, exp)| exp > tick);

    let mut dirty = false;
    let pos = robot.pose;
    let mut nav: Option<Nav2D> = None;

    // target re-validation against this tick's knowledge
    match robot.target {
        Some(Target::Door(d)) => {
            let erased = binary_at_point(&raw, d.xy()) == Some(1);
            if erased || robot.coord.door_covered(d) {
                robot.clear_target();
            }
        }
        Some(Target::Circle { id, center, .. }) => {
            // merges and splits re-issue ids; re-bind to the circle that now
            // represents the targeted spot before judging validity
            let bound = match robot.circles.get(id) {
                Some(c) => Some(*c),
                None => robot
                    .circles
                    .iter()
                    .filter(|c| !c.reached && c.center.dist(center) <= 0.3)
                    .min_by(|a, b| {
                        a.center
                            .dist(center)
                            .total_cmp(&b.center.dist(center))
                            .then(a.id.cmp(&b.id))
                    })
                    .copied(),
            };
            match bound {
                None => robot.clear_target(),
                Some(c) => {
                    if c.reached || robot.coord.circle_excluded(&c) {
                        robot.clear_target();
                    } else {
                        robot.target = Some(Target::Circle { id: c.id, center: c.center, r: c.r });
                    }
                }
            }
        }
        _ => {}
    }

    // arrival handling
    if let Some(t) = robot.target {
        if pos.xy().dist(t.point()) <= cfg.reach_tolerance {
            match t {
                Target::Door(d) => {
                    if robot.coord.add_reached_door(d) {
                        dirty = true;
                    }
                    robot.clear_target();
                    // head for the nearest circle of the room behind the door
                    if let Some((id, center, r)) = pick_circle(robot, pos) {
                        try_set_target(
                            robot,
                            map,
                            cfg,
                            &raw,
                            &mut nav,
                            Target::Circle { id, center, r },
                            tick,
                        );
                    }
                }
                Target::Circle { id, center, r } => {
                    if let Some(c) = robot.circles.get_mut(id) {
                        c.reached = true;
                    }
                    if robot
                        .coord
                        .add_reached_circle(Point3::new(center.x, center.y, CUE_Z), r)
                    {
                        dirty = true;
                    }
                    robot.clear_target();
                    // adjacency chaining
                    if let Some((nid, ncenter, nr)) = pick_circle(robot, pos) {
                        if ncenter.dist(center) < cfg.mu * (nr + r) {
                            try_set_target(
                                robot,
                                map,
                                cfg,
                                &raw,
                                &mut nav,
                                Target::Circle { id: nid, center: ncenter, r: nr },
                                tick,
                            );
                        }
                    }
                }
                Target::Frontier(_) => robot.clear_target(),
            }
        }
    }

    // idle: door first, then circle, then frontier fallback
    if robot.target.is_none() {
        if let Some(d) = pick_door(robot, pos) {
            try_set_target(robot, map, cfg, &raw, &mut nav, Target::Door(d), tick);
        }
        if robot.target.is_none() {
            if let Some((id, center, r)) = pick_circle(robot, pos) {
                try_set_target(
                    robot,
                    map,
                    cfg,
                    &raw,
                    &mut nav,
                    Target::Circle { id, center, r },
                    tick,
                );
            }
        }
        if robot.target.is_none() {
            let nav_ref =
                nav.get_or_insert_with(|| Nav2D::from_flatten(raw.clone(), map, &cfg.planner));
            frontier_logic(robot, nav_ref, cfg);
        }
    } else if robot.path.is_empty() {
        // target survives but the path was consumed or invalidated: replan
        let t = robot.target.unwrap();
        if !try_set_target(robot, map, cfg, &raw, &mut nav, t, tick) {
            robot.clear_target();
        }
    }

    if dirty {
        robot.seq += 1;
        Some(robot.coord.reached_message(robot.id as u32, robot.seq))
    } else {
        None
    }
}

/// Plans to a target and installs it; on failure records a backoff for the
/// target and leaves the robot targetless. Returns planning success.
#[allow(clippy::too_many_arguments)]
fn try_set_target(
    robot: &mut RobotState,
    map: &KnownMap,
    cfg: &ExplorerConfig,
    raw: &BinaryMap,
    nav: &mut Option<Nav2D>,
    target: Target,
    tick: u64,
) -> bool {
    let nav_ref =
        nav.get_or_insert_with(|| Nav2D::from_flatten(raw.clone(), map, &cfg.planner));
    match plan_path(nav_ref, robot.pose.xy(), target.point(), &cfg.planner) {
        Some(path) => {
            robot.path = path;
            robot.target = Some(target);
            true
        }
        None => {
            match target {
                Target::Door(d) => robot.skip_doors.push((d, tick + cfg.skip_ticks)),
                Target::Circle { id, .. } => robot.skip_circles.push((id, tick + cfg.skip_ticks)),
                Target::Frontier(_) => {}
            }
            robot.target = None;
            robot.path.clear();
            false
        }
    }
}

/// One frontier-baseline control tick.
pub fn think_frontier(robot: &mut RobotState, map: &KnownMap, cfg: &ExplorerConfig) {
    let nav = Nav2D::build(map, &cfg.planner);
    // arrival
    if let Some(t) = robot.target {
        if robot.pose.xy().dist(t.point()) <= cfg.reach_tolerance {
            robot.clear_target();
        }
    }
    frontier_logic(robot, &nav, cfg);
}

/// Frontier selection: cluster frontier cells, score by size / path distance,
/// and pursue the best cluster's representative. The current target is kept
/// unless a cluster scores 1.3x better (anti-oscillation) or the target
/// stopped being a frontier.
fn frontier_logic(robot: &mut RobotState, nav: &Nav2D, cfg: &ExplorerConfig) {
    let frontiers = nav.frontier_cells();
    if frontiers.is_empty() {
        if matches!(robot.target, Some(Target::Frontier(_)) | None) {
            robot.clear_target();
        }
        return;
    }
    let Some(rc) = nav.cell_of(robot.pose.xy()) else {
        robot.clear_target();
        return;
    };
    let bfs = nav.bfs_from(rc);
    let clusters = cluster_cells(&frontiers, nav.w, nav.h);

    #[derive(Clone, Copy)]
    struct Scored {
        score: f64,
        first_cell: usize,
        target: (usize, usize),
    }
    let mut scored: Vec<Scored> = Vec::new();
    let mut current_score: Option<f64> = None;
    let current_cell = match robot.target {
        Some(Target::Frontier(p)) => nav.cell_of(p),
        _ => None,
    };
    for cl in &clusters {
        let mut min_d = u32::MAX;
        let (mut sx, mut sy) = (0f64, 0f64);
        for &(x, y) in cl {
            min_d = min_d.min(bfs[y * nav.w + x]);
            sx += x as f64;
            sy += y as f64;
        }
        if min_d == u32::MAX {
            continue;
        }
        let dist_m = (min_d as f64 * nav.cell).max(0.5);
        let score = cl.len() as f64 / dist_m;
        let cx = sx / cl.len() as f64;
        let cy = sy / cl.len() as f64;
        // representative: member closest to the centroid, row-major tie-break
        let mut rep = cl[0];
        let mut best = f64::INFINITY;
        for &(x, y) in cl {
            let d = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
            if d < best {
                best = d;
                rep = (x, y);
            }
        }
        let first = cl[0].1 * nav.w + cl[0].0;
        scored.push(Scored { score, first_cell: first, target: rep });
        if let Some(cc) = current_cell {
            if cl.contains(&cc) {
                current_score = Some(score);
            }
        }
    }
    if scored.is_empty() {
        robot.clear_target();
        return;
    }
    scored.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then(a.first_cell.cmp(&b.first_cell))
    });
    let best = scored[0];

    // keep the current target while it remains a frontier and close in score
    if let (Some(cur_score), Some(Target::Frontier(_))) = (current_score, robot.target) {
        if !robot.path.is_empty() && best.score <= cur_score * 1.3 {
            return;
        }
    }

    let goal = nav.center_of(best.target.0, best.target.1);
    match plan_path(nav, robot.pose.xy(), goal, &cfg.planner) {
        Some(path) => {
            robot.path = path;
            robot.target = Some(Target::Frontier(goal));
        }
        None => robot.clear_target(),
    }
}

/// 8-connected components of a cell list, in first-cell row-major order.
fn cluster_cells(cells: &[(usize, usize)], w: usize, h: usize) -> Vec<Vec<(usize, usize)>> {
    let index = |x: usize, y: usize| y * w + x;
    let mut member = vec![false; w * h];
    for &(x, y) in cells {
        member[index(x, y)] = true;
    }
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for &(x, y) in cells {
        if seen[index(x, y)] {
            continue;
        }
        let mut cluster = Vec::new();
        let mut stack = vec![(x, y)];
        seen[index(x, y)] = true;
        while let Some((cx, cy)) = stack.pop() {
            cluster.push((cx, cy));
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let nx = cx as i64 + dx;
                    let ny = cy as i64 + dy;
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let (nx, ny) = (nx as usize, ny as usize);
                    if member[index(nx, ny)] && !seen[index(nx, ny)] {
                        seen[index(nx, ny)] = true;
                        stack.push((nx, ny));
                    }
                }
            }
        }
        cluster.sort_by_key(|&(cx, cy)| cy * w + cx);
        out.push(cluster);
    }
    out
}

/// Advances the robot along its path by up to `speed * dt`, gated on
/// known-free cells (the robot waits at the known-space boundary), and turns
/// the heading toward the direction of travel. Returns an error if a motion
/// step would enter ground-truth occupied space, which the gating makes
/// unreachable.
pub fn follow_path(
    robot: &mut RobotState,
    map: &KnownMap,
    world: &crate::worldmodel::GroundTruthWorld,
    cfg: &ExplorerConfig,
) -> crate::Result<()> {
    let flight_iz =
        ((cfg.planner.flight_z / map.dims.cell) as usize).min(map.dims.nz.saturating_sub(1));
    let mut remaining = cfg.speed * cfg.tick_dt;
    let mut moved_dir: Option<Vec2> = None;
    while remaining > 1e-9 {
        let Some(&wp) = robot.path.first() else { break };
        let to = wp - robot.pose.xy();
        let d = to.norm();
        if d < 1e-6 {
            robot.path.remove(0);
            continue;
        }
        let step = remaining.min(d);
        let dir = to * (1.0 / d);
        let proposed = robot.pose.xy() + dir * step;
        if !micro_segment_known_free(map, robot.pose.xy(), proposed, flight_iz) {
            robot.blocked_ticks += 1;
            if robot.blocked_ticks > 20 {
                // stuck at an unknown boundary too long: force a replan
                robot.path.clear();
                robot.blocked_ticks = 0;
            }
            break;
        }
        robot.blocked_ticks = 0;
        let p3 = Point3::new(proposed.x, proposed.y, robot.pose.z);
        if !world.is_free_point(p3) {
            return Err(crate::Error::Sim(format!(
                "robot {} would enter occupied space at ({:.2}, {:.2})",
                robot.id, p3.x, p3.y
            )));
        }
        robot.pose = p3;
        robot.path_len += step;
        remaining -= step;
        moved_dir = Some(dir);
        if step >= d - 1e-9 {
            robot.path.remove(0);
        }
    }
    // heading tracks motion; when holding position, turn toward the target
    let desired = moved_dir
        .map(|d| d.y.atan2(d.x))
        .or_else(|| {
            robot.target.map(|t| {
                let v = t.point() - robot.pose.xy();
                v.y.atan2(v.x)
            })
        });
    if let Some(des) = desired {
        let err = wrap_angle(des - robot.yaw);
        let max_turn = cfg.yaw_rate * cfg.tick_dt;
        robot.yaw = wrap_angle(robot.yaw + err.clamp(-max_turn, max_turn));
    }
    Ok(())
}

/// All cells touched by one sub-cell motion step must be known free at
/// flight level.
fn micro_segment_known_free(map: &KnownMap, a: Vec2, b: Vec2, flight_iz: usize) -> bool {
    use crate::perception::CellState;
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let p = Vec2::new(a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f);
        if p.x < 0.0 || p.y < 0.0 {
            return false;
        }
        let x = (p.x / map.dims.cell) as usize;
        let y = (p.y / map.dims.cell) as usize;
        if x >= map.dims.nx || y >= map.dims.ny {
            return false;
        }
        if map.state(x, y, flight_iz) != CellState::Free {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency_rule_boundaries() {
        let cfg = ExplorerConfig::default();
        // r = 1.0 each, centers 2.1 m apart: 2.1 < 1.1 * 2.0 -> adjacent
        let (r1, r2) = (1.0, 1.0);
        assert!(2.1 < cfg.mu * (r1 + r2));
        // centers 2.3 m apart: not adjacent
        assert!(2.3 >= cfg.mu * (r1 + r2));
    }

    #[test]
    fn cluster_cells_components() {
        let cells = vec![(1, 1), (2, 1), (2, 2), (7, 7), (8, 8)];
        let cl = cluster_cells(&cells, 10, 10);
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[0].len(), 3);
        assert_eq!(cl[1].len(), 2); // diagonal adjacency joins (7,7) and (8,8)
    }

    #[test]
    fn mode_follows_target() {
        let cfg = ExplorerConfig::default();
        let mut r = RobotState::new(0, Point3::new(1.0, 1.0, 1.0), 0.0, 100, &cfg);
        assert_eq!(r.mode(), RobotMode::Idle);
        r.target = Some(Target::Door(Point3::new(2.0, 2.0, 1.0)));
        assert_eq!(r.mode(), RobotMode::ToDoor);
        r.target = Some(Target::Circle { id: 1, center: Vec2::new(0.0, 0.0), r: 1.0 });
        assert_eq!(r.mode(), RobotMode::ToCircle);
        r.target = Some(Target::Frontier(Vec2::new(0.0, 0.0)));
        assert_eq!(r.mode(), RobotMode::Frontier);
    }
}
