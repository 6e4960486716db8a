//! Deterministic tick loop: sense -> think -> move per robot in id order,
//! then bus delivery and a metrics sample.

use super::{follow_path, think_frontier, think_mrmr, ExplorerConfig, RobotState, StageTimes};
use crate::coordination::{Bus, BusConfig, ReachedSetsMessage};
use crate::geom::Point3;
use crate::metrics::{CoverageTracker, MetricsLog, MetricsRow};
use crate::perception::{camera_observe, integrate_scan, lidar_scan, KnownMap};
use crate::worldmodel::{rasterize, GroundTruthWorld, Scenario};
use crate::{Error, Result};

/// Exploration policy under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Mrmr,
    Frontier,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Mrmr => "mrmr",
            Policy::Frontier => "frontier",
        }
    }
}

impl std::str::FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mrmr" => Ok(Policy::Mrmr),
            "frontier" => Ok(Policy::Frontier),
            other => Err(Error::Validation(format!("unknown policy {other:?}"))),
        }
    }
}

/// One trajectory log row.
#[derive(Debug, Clone)]
pub struct TrajectoryRow {
    pub t: f64,
    pub robot: usize,
    pub pose: Point3,
    pub yaw: f64,
    pub mode: &'static str,
    pub target_kind: &'static str,
    pub target: Option<(f64, f64)>,
}

/// A running episode.
pub struct Simulation {
    pub world: GroundTruthWorld,
    pub cfg: ExplorerConfig,
    pub policy: Policy,
    pub shared_map: bool,
    maps: Vec<KnownMap>,
    pub robots: Vec<RobotState>,
    bus: Bus,
    pending_inboxes: Vec<Vec<ReachedSetsMessage>>,
    pub tracker: CoverageTracker,
    pub log: MetricsLog,
    pub trajectories: Vec<TrajectoryRow>,
    pub stage_times: StageTimes,
    pub scan_dump: Option<Vec<String>>,
    pub duration: f64,
    tick: u64,
}

impl Simulation {
    /// Builds an episode. `shared_map = None` picks the policy default:
    /// the frontier baseline coordinates implicitly through a shared map,
    /// MRMR robots keep private maps and share only reached sets.
    pub fn new(
        scenario: &Scenario,
        cfg: ExplorerConfig,
        policy: Policy,
        n_robots: usize,
        bus_cfg: BusConfig,
        shared_map: Option<bool>,
        duration: f64,
        record_scans: bool,
    ) -> Result<Self> {
        if n_robots == 0 || n_robots > scenario.spawns.len() {
            return Err(Error::Validation(format!(
                "n_robots must be 1..={} (spawn poses), got {n_robots}",
                scenario.spawns.len()
            )));
        }
        if !(duration > 0.0) {
            return Err(Error::Validation("duration must be > 0".into()));
        }
        let world = rasterize(scenario);
        let shared = shared_map.unwrap_or(policy == Policy::Frontier);
        let n_maps = if shared { 1 } else { n_robots };
        let maps = vec![KnownMap::new(world.dims); n_maps];
        let robots: Vec<RobotState> = (0..n_robots)
            .map(|i| {
                let sp = scenario.spawns[i];
                RobotState::new(
                    i,
                    Point3::new(sp[0], sp[1], sp[2]),
                    sp[3],
                    world.dims.len(),
                    &cfg,
                )
            })
            .collect();
        for r in &robots {
            if !world.is_free_point(r.pose) {
                return Err(Error::Validation(format!("spawn {} not in free space", r.id)));
            }
        }
        let bus = Bus::new(bus_cfg, n_robots)?;
        let tracker = CoverageTracker::new(&world);
        Ok(Simulation {
            world,
            cfg,
            policy,
            shared_map: shared,
            maps,
            robots,
            bus,
            pending_inboxes: vec![Vec::new(); n_robots],
            tracker,
            log: MetricsLog::default(),
            trajectories: Vec::new(),
            stage_times: StageTimes::default(),
            scan_dump: if record_scans { Some(Vec::new()) } else { None },
            duration,
            tick: 0,
        })
    }

    pub fn ticks_total(&self) -> u64 {
        (self.duration / self.cfg.tick_dt).round().max(1.0) as u64
    }

    pub fn tick_index(&self) -> u64 {
        self.tick
    }

    /// Advances all robots one tick in fixed id order.
    pub fn step(&mut self) -> Result<()> {
        let t = self.tick as f64 * self.cfg.tick_dt;
        let n = self.robots.len();
        for i in 0..n {
            // deliver inbox from previous ticks
            let inbox = std::mem::take(&mut self.pending_inboxes[i]);
            for msg in &inbox {
                self.robots[i].coord.merge_message(msg);
            }
            // sense
            let map_i = if self.shared_map { 0 } else { i };
            let pose = self.robots[i].pose;
            let yaw = self.robots[i].yaw;
            let rays = lidar_scan(&self.world, pose, &self.cfg.sensors);
            integrate_scan(&mut self.maps[map_i], pose, &rays, self.cfg.sensors.lidar_range);
            if let Some(dump) = &mut self.scan_dump {
                for ray in &rays {
                    if ray.elevation != 0.0 {
                        continue;
                    }
                    let line = match ray.hit {
                        Some((x, y, z)) => {
                            let c = self.world.dims.center(x, y, z);
                            format!("{t:.1},{i},{:.4},{:.2},{:.2},{:.2}", ray.azimuth, c.x, c.y, c.z)
                        }
                        None => format!("{t:.1},{i},{:.4},MISS", ray.azimuth),
                    };
                    dump.push(line);
                }
            }
            let delta =
                camera_observe(&self.world, &mut self.robots[i].observed, pose, yaw, &self.cfg.sensors);
            self.tracker.add_observed(&self.world, &delta);
            // think
            let msg = match self.policy {
                Policy::Mrmr => think_mrmr(
                    &mut self.robots[i],
                    &self.maps[map_i],
                    &self.cfg,
                    self.tick,
                    &mut self.stage_times,
                ),
                Policy::Frontier => {
                    think_frontier(&mut self.robots[i], &self.maps[map_i], &self.cfg);
                    None
                }
            };
            if let Some(m) = msg {
                self.bus.publish(self.tick, i, &m);
            }
            // move
            follow_path(&mut self.robots[i], &self.maps[map_i], &self.world, &self.cfg)?;
            let r = &self.robots[i];
            self.trajectories.push(TrajectoryRow {
                t,
                robot: i,
                pose: r.pose,
                yaw: r.yaw,
                mode: r.mode().as_str(),
                target_kind: r.target.map_or("none", |tg| tg.kind()),
                target: r.target.map(|tg| (tg.point().x, tg.point().y)),
            });
        }
        // bus barrier: everything sent this tick becomes visible next tick
        self.pending_inboxes = self.bus.collect(self.tick + 1);
        // metrics sample
        self.log.rows.push(MetricsRow {
            t,
            room_voxels_covered: self.tracker.covered_total,
            rooms_visited: self.tracker.rooms_visited(&self.world, self.cfg.room_visit_threshold),
            observed_per_robot: self.robots.iter().map(|r| r.observed.len()).collect(),
            path_len_per_robot: self.robots.iter().map(|r| r.path_len).collect(),
        });
        self.tick += 1;
        Ok(())
    }

    /// Runs the configured number of ticks.
    pub fn run(&mut self) -> Result<()> {
        let total = self.ticks_total();
        while self.tick < total {
            self.step()?;
        }
        Ok(())
    }

    pub fn map_of(&self, robot: usize) -> &KnownMap {
        if self.shared_map {
            &self.maps[0]
        } else {
            &self.maps[robot]
        }
    }
}
