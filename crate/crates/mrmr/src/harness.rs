//! Episode and suite runners: configure a simulation, execute it, and write
//! the metrics/trajectory artifacts and comparison tables.

use crate::coordination::BusConfig;
use crate::explorer::sim::{Policy, Simulation};
use crate::explorer::ExplorerConfig;
use crate::geom::Point3;
use crate::metrics::{time_module, MetricsLog, RuntimeStats};
use crate::worldmodel::Scenario;
use crate::{Error, Result};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Everything needed to run one episode.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub policy: Policy,
    pub n_robots: usize,
    pub seed: u64,
    /// Simulated seconds; defaults to the scenario's duration.
    pub duration: f64,
    pub bus: BusConfig,
    pub shared_map: Option<bool>,
    pub explorer: ExplorerConfig,
    pub out_dir: Option<PathBuf>,
    pub dump_maps: bool,
    pub dump_scans: bool,
}

impl RunConfig {
    pub fn new(scenario: Scenario, policy: Policy, n_robots: usize, seed: u64) -> Self {
        let duration = scenario.duration;
        RunConfig {
            scenario,
            policy,
            n_robots,
            seed,
            duration,
            bus: BusConfig { rng_seed: seed, ..BusConfig::default() },
            shared_map: None,
            explorer: ExplorerConfig::default(),
            out_dir: None,
            dump_maps: false,
            dump_scans: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RobotSummary {
    pub robot: usize,
    pub observed_voxels: usize,
    pub path_length: f64,
    pub doors_reached: usize,
    pub circles_reached: usize,
}

/// Byte-stable episode summary (no wall-clock data; runtimes are written to
/// a separate, explicitly non-deterministic file).
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub policy: String,
    pub n_robots: usize,
    pub seed: u64,
    pub duration: f64,
    pub ticks: u64,
    pub shared_map: bool,
    pub room_voxel_total: usize,
    pub room_voxels_covered: usize,
    pub coverage_fraction: f64,
    pub rooms_visited: usize,
    pub rooms_total: usize,
    pub room_visit_threshold: f64,
    pub per_robot: Vec<RobotSummary>,
}

/// Full in-memory result of an episode.
pub struct EpisodeResult {
    pub summary: RunSummary,
    pub log: MetricsLog,
    pub metrics_csv: String,
    pub trajectories_csv: String,
    pub coverage_curve: String,
    pub reached_doors: Vec<Vec<Point3>>,
    pub reached_circles: Vec<Vec<(Point3, f64)>>,
    pub runtimes: Vec<RuntimeStats>,
}

fn round(v: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (v * f).round() / f
}

/// Runs one deterministic episode and renders its artifacts; when
/// `cfg.out_dir` is set they are also written to disk.
pub fn run_episode(cfg: &RunConfig) -> Result<EpisodeResult> {
    let mut sim = Simulation::new(
        &cfg.scenario,
        cfg.explorer.clone(),
        cfg.policy,
        cfg.n_robots,
        cfg.bus.clone(),
        cfg.shared_map,
        cfg.duration,
        cfg.dump_scans,
    )?;
    sim.run()?;

    let n = cfg.n_robots;
    let mut metrics_csv = String::new();
    write!(metrics_csv, "t,room_voxels_covered,rooms_visited").unwrap();
    for i in 0..n {
        write!(metrics_csv, ",observed_{i}").unwrap();
    }
    for i in 0..n {
        write!(metrics_csv, ",path_len_{i}").unwrap();
    }
    metrics_csv.push('\n');
    for row in &sim.log.rows {
        write!(metrics_csv, "{:.1},{},{}", row.t, row.room_voxels_covered, row.rooms_visited).unwrap();
        for v in &row.observed_per_robot {
            write!(metrics_csv, ",{v}").unwrap();
        }
        for v in &row.path_len_per_robot {
            write!(metrics_csv, ",{v:.3}").unwrap();
        }
        metrics_csv.push('\n');
    }

    let mut trajectories_csv =
        String::from("t,robot,x,y,z,yaw,mode,target_kind,target_x,target_y\n");
    for row in &sim.trajectories {
        let (tx, ty) = match row.target {
            Some((x, y)) => (format!("{x:.3}"), format!("{y:.3}")),
            None => (String::new(), String::new()),
        };
        writeln!(
            trajectories_csv,
            "{:.1},{},{:.3},{:.3},{:.3},{:.4},{},{},{},{}",
            row.t, row.robot, row.pose.x, row.pose.y, row.pose.z, row.yaw, row.mode,
            row.target_kind, tx, ty
        )
        .unwrap();
    }

    let mut coverage_curve = String::new();
    for row in &sim.log.rows {
        writeln!(coverage_curve, "{:.1} {}", row.t, row.room_voxels_covered).unwrap();
    }

    let last = sim.log.rows.last();
    let summary = RunSummary {
        scenario: cfg.scenario.name.clone(),
        policy: cfg.policy.as_str().to_string(),
        n_robots: n,
        seed: cfg.seed,
        duration: cfg.duration,
        ticks: sim.ticks_total(),
        shared_map: sim.shared_map,
        room_voxel_total: sim.world.room_voxel_total,
        room_voxels_covered: last.map_or(0, |r| r.room_voxels_covered),
        coverage_fraction: round(sim.tracker.fraction(&sim.world), 6),
        rooms_visited: last.map_or(0, |r| r.rooms_visited),
        rooms_total: sim.world.rooms_total as usize,
        room_visit_threshold: cfg.explorer.room_visit_threshold,
        per_robot: sim
            .robots
            .iter()
            .map(|r| RobotSummary {
                robot: r.id,
                observed_voxels: r.observed.len(),
                path_length: round(r.path_len, 3),
                doors_reached: r.coord.reached_doors.len(),
                circles_reached: r.coord.reached_circles.len(),
            })
            .collect(),
    };

    let mut runtimes = Vec::new();
    for (tag, samples) in [
        ("flatten_filter", &sim.stage_times.flatten_us),
        ("distance_transform", &sim.stage_times.edt_us),
        ("cue_classification", &sim.stage_times.classify_us),
        ("circle_decomposition", &sim.stage_times.circles_us),
    ] {
        if let Ok(stats) = time_module(tag, samples) {
            runtimes.push(stats);
        }
    }

    let result = EpisodeResult {
        summary,
        log: sim.log.clone(),
        metrics_csv,
        trajectories_csv,
        coverage_curve,
        reached_doors: sim.robots.iter().map(|r| r.coord.reached_doors.clone()).collect(),
        reached_circles: sim.robots.iter().map(|r| r.coord.reached_circles.clone()).collect(),
        runtimes,
    };

    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("metrics.csv"), &result.metrics_csv)?;
        std::fs::write(dir.join("trajectories.csv"), &result.trajectories_csv)?;
        std::fs::write(dir.join("coverage_curve.dat"), &result.coverage_curve)?;
        let json = serde_json::to_string_pretty(&result.summary)
            .map_err(|e| Error::Metrics(e.to_string()))?;
        std::fs::write(dir.join("summary.json"), json + "\n")?;
        if !result.runtimes.is_empty() {
            let json = serde_json::to_string_pretty(&result.runtimes)
                .map_err(|e| Error::Metrics(e.to_string()))?;
            std::fs::write(dir.join("runtimes.json"), json + "\n")?;
        }
        if let Some(dump) = &sim.scan_dump {
            std::fs::write(dir.join("scans.txt"), dump.join("\n") + "\n")?;
        }
        if cfg.dump_maps {
            for i in 0..n {
                let map = sim.map_of(i);
                let binary = crate::cues::median_filter(&crate::cues::flatten(
                    map,
                    cfg.explorer.cue.z_low,
                    cfg.explorer.cue.z_high,
                ));
                let dist = crate::cues::distance_transform(&binary);
                crate::pgm::write_binary_map(&dir.join(format!("robot{i}_binary.pgm")), &binary)?;
                crate::pgm::write_distance_field(&dir.join(format!("robot{i}_distance.pgm")), &dist)?;
            }
        }
    }
    Ok(result)
}

/// Outcome of one suite cell.
#[derive(Debug, Serialize)]
pub struct EpisodeOutcome {
    pub scenario: String,
    pub policy: String,
    pub n_robots: usize,
    pub seed: u64,
    pub coverage_fraction: Option<f64>,
    pub rooms_fraction: Option<f64>,
    pub room_voxels_covered: Option<usize>,
    pub room_voxel_total: Option<usize>,
    pub error: Option<String>,
}

/// Comparison row aggregated over scenarios and seeds.
#[derive(Debug, Serialize)]
pub struct TableRow {
    pub policy: String,
    pub n_robots: usize,
    pub episodes: usize,
    pub failures: usize,
    /// equal-weight mean of per-episode coverage fractions
    pub vxl_mean: f64,
    /// voxel-weighted coverage: sum(covered) / sum(total)
    pub vxl_weighted: f64,
    /// equal-weight mean of rooms-visited fractions
    pub rm_mean: f64,
}

#[derive(Debug, Serialize)]
pub struct Improvement {
    pub n_robots: usize,
    pub vxl_improvement_pct: f64,
    pub rm_improvement_pct: f64,
}

#[derive(Debug, Serialize)]
pub struct SuiteResult {
    pub episodes: Vec<EpisodeOutcome>,
    pub table: Vec<TableRow>,
    pub improvements: Vec<Improvement>,
}

impl SuiteResult {
    /// Renders the comparison in the two-policy, per-robot-count layout.
    pub fn table_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<10} {:>3} {:>5} {:>9} {:>9} {:>9}", "policy", "n", "runs", "Vxl.", "Vxl.w", "Rm.").unwrap();
        for r in &self.table {
            writeln!(
                out,
                "{:<10} {:>3} {:>5} {:>8.2}% {:>8.2}% {:>8.2}%",
                r.policy,
                r.n_robots,
                r.episodes,
                r.vxl_mean * 100.0,
                r.vxl_weighted * 100.0,
                r.rm_mean * 100.0
            )
            .unwrap();
        }
        for imp in &self.improvements {
            writeln!(
                out,
                "improvement n={}: Vxl +{:.2}%  Rm +{:.2}%",
                imp.n_robots, imp.vxl_improvement_pct, imp.rm_improvement_pct
            )
            .unwrap();
        }
        out
    }
}

/// Runs a matrix of configs; failed cells are recorded and the rest continue.
pub fn run_suite(matrix: &[RunConfig], out_dir: Option<&Path>) -> Result<SuiteResult> {
    if matrix.is_empty() {
        return Err(Error::Validation("suite matrix is empty".into()));
    }
    let mut episodes = Vec::new();
    for cfg in matrix {
        let mut cfg = cfg.clone();
        if let Some(dir) = out_dir {
            cfg.out_dir = Some(dir.join(format!(
                "{}_{}_n{}_s{}",
                cfg.scenario.name,
                cfg.policy.as_str(),
                cfg.n_robots,
                cfg.seed
            )));
        }
        match run_episode(&cfg) {
            Ok(res) => episodes.push(EpisodeOutcome {
                scenario: cfg.scenario.name.clone(),
                policy: cfg.policy.as_str().to_string(),
                n_robots: cfg.n_robots,
                seed: cfg.seed,
                coverage_fraction: Some(res.summary.coverage_fraction),
                rooms_fraction: Some(if res.summary.rooms_total == 0 {
                    0.0
                } else {
                    res.summary.rooms_visited as f64 / res.summary.rooms_total as f64
                }),
                room_voxels_covered: Some(res.summary.room_voxels_covered),
                room_voxel_total: Some(res.summary.room_voxel_total),
                error: None,
            }),
            Err(e) => episodes.push(EpisodeOutcome {
                scenario: cfg.scenario.name.clone(),
                policy: cfg.policy.as_str().to_string(),
                n_robots: cfg.n_robots,
                seed: cfg.seed,
                coverage_fraction: None,
                rooms_fraction: None,
                room_voxels_covered: None,
                room_voxel_total: None,
                error: Some(e.to_string()),
            }),
        }
    }

    // aggregate per (policy, n)
    let mut keys: Vec<(String, usize)> = episodes
        .iter()
        .map(|e| (e.policy.clone(), e.n_robots))
        .collect();
    keys.sort();
    keys.dedup();
    let mut table = Vec::new();
    for (policy, n) in &keys {
        let cell: Vec<&EpisodeOutcome> = episodes
            .iter()
            .filter(|e| &e.policy == policy && e.n_robots == *n)
            .collect();
        let ok: Vec<&&EpisodeOutcome> = cell.iter().filter(|e| e.error.is_none()).collect();
        let failures = cell.len() - ok.len();
        let mean = |f: &dyn Fn(&EpisodeOutcome) -> f64| -> f64 {
            if ok.is_empty() {
                0.0
            } else {
                ok.iter().map(|e| f(e)).sum::<f64>() / ok.len() as f64
            }
        };
        let covered: usize = ok.iter().map(|e| e.room_voxels_covered.unwrap_or(0)).sum();
        let total: usize = ok.iter().map(|e| e.room_voxel_total.unwrap_or(0)).sum();
        table.push(TableRow {
            policy: policy.clone(),
            n_robots: *n,
            episodes: cell.len(),
            failures,
            vxl_mean: mean(&|e| e.coverage_fraction.unwrap_or(0.0)),
            vxl_weighted: if total == 0 { 0.0 } else { covered as f64 / total as f64 },
            rm_mean: mean(&|e| e.rooms_fraction.unwrap_or(0.0)),
        });
    }

    let mut improvements = Vec::new();
    let counts: Vec<usize> = {
        let mut c: Vec<usize> = table.iter().map(|r| r.n_robots).collect();
        c.sort_unstable();
        c.dedup();
        c
    };
    for n in counts {
        let find = |p: &str| table.iter().find(|r| r.policy == p && r.n_robots == n);
        if let (Some(m), Some(f)) = (find("mrmr"), find("frontier")) {
            if f.vxl_mean > 0.0 {
                improvements.push(Improvement {
                    n_robots: n,
                    vxl_improvement_pct: (m.vxl_mean / f.vxl_mean - 1.0) * 100.0,
                    rm_improvement_pct: if f.rm_mean > 0.0 {
                        (m.rm_mean / f.rm_mean - 1.0) * 100.0
                    } else {
                        0.0
                    },
                });
            }
        }
    }

    let result = SuiteResult { episodes, table, improvements };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("table.txt"), result.table_text())?;
        let json = serde_json::to_string_pretty(&result).map_err(|e| Error::Metrics(e.to_string()))?;
        std::fs::write(dir.join("suite.json"), json + "\n")?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    fn quick_cfg(policy: Policy, n: usize, seed: u64, duration: f64) -> RunConfig {
        let mut cfg = RunConfig::new(scenarios::env1().scenario, policy, n, seed);
        cfg.duration = duration;
        cfg
    }

    #[test]
    fn one_tick_episode_log() {
        let cfg = quick_cfg(Policy::Mrmr, 1, 1, 0.1);
        let res = run_episode(&cfg).unwrap();
        assert_eq!(res.log.rows.len(), 1);
        assert!(res.metrics_csv.lines().count() == 2);
    }

    #[test]
    fn episode_repeats_byte_identical() {
        let cfg = quick_cfg(Policy::Mrmr, 2, 7, 3.0);
        let a = run_episode(&cfg).unwrap();
        let b = run_episode(&cfg).unwrap();
        assert_eq!(a.metrics_csv, b.metrics_csv);
        assert_eq!(a.trajectories_csv, b.trajectories_csv);
    }

    #[test]
    fn artifacts_written_under_out_dir() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = quick_cfg(Policy::Frontier, 1, 1, 1.0);
        cfg.out_dir = Some(dir.path().join("ep"));
        cfg.dump_maps = true;
        run_episode(&cfg).unwrap();
        for f in [
            "metrics.csv",
            "trajectories.csv",
            "summary.json",
            "coverage_curve.dat",
            "robot0_binary.pgm",
        ] {
            assert!(dir.path().join("ep").join(f).exists(), "{f} missing");
        }
    }

    #[test]
    fn suite_single_cell_and_broken_scenario() {
        let mut good = quick_cfg(Policy::Mrmr, 1, 1, 0.5);
        good.scenario.name = "good".into();
        let mut bad = quick_cfg(Policy::Mrmr, 9, 1, 0.5); // too many robots
        bad.scenario.name = "bad".into();
        let res = run_suite(&[good, bad], None).unwrap();
        assert_eq!(res.episodes.len(), 2);
        assert!(res.episodes[0].error.is_none());
        assert!(res.episodes[1].error.is_some());
        let row = res.table.iter().find(|r| r.n_robots == 9).unwrap();
        assert_eq!(row.failures, 1);
    }

    #[test]
    fn empty_suite_rejected() {
        assert!(run_suite(&[], None).is_err());
    }
}
