//! Evaluation metrics: room-voxel coverage, rooms visited, door-detection
//! scoring and pipeline runtime statistics.

use crate::geom::Vec2;
use crate::grid::VoxelSet;
use crate::worldmodel::GroundTruthWorld;
use crate::{Error, Result};

/// One per-tick metrics sample.
#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub t: f64,
    /// `|U_i U_j (O_i n V^rm_j)|`
    pub room_voxels_covered: usize,
    pub rooms_visited: usize,
    pub observed_per_robot: Vec<usize>,
    pub path_len_per_robot: Vec<f64>,
}

/// Full episode log.
#[derive(Debug, Clone, Default)]
pub struct MetricsLog {
    pub rows: Vec<MetricsRow>,
}

impl MetricsLog {
    /// Collective room coverage is non-decreasing across ticks.
    pub fn coverage_monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].room_voxels_covered >= w[0].room_voxels_covered)
    }
}

/// Incremental coverage accounting against the ground truth. Room voxels are
/// the free voxels of labeled columns; observing one (by any robot) marks it
/// covered exactly once.
#[derive(Debug, Clone)]
pub struct CoverageTracker {
    covered: VoxelSet,
    pub covered_total: usize,
    per_room: Vec<usize>,
}

impl CoverageTracker {
    pub fn new(world: &GroundTruthWorld) -> Self {
        CoverageTracker {
            covered: VoxelSet::new(world.dims.len()),
            covered_total: 0,
            per_room: vec![0; world.rooms_total as usize + 1],
        }
    }

    /// Accounts newly observed voxels; non-room voxels are ignored.
    pub fn add_observed(&mut self, world: &GroundTruthWorld, delta: &[usize]) {
        for &idx in delta {
            if let Some(room) = world.room_of_voxel(idx) {
                if self.covered.insert(idx) {
                    self.covered_total += 1;
                    self.per_room[room as usize] += 1;
                }
            }
        }
    }

    /// Rooms whose covered fraction reaches `threshold`.
    pub fn rooms_visited(&self, world: &GroundTruthWorld, threshold: f64) -> usize {
        (1..=world.rooms_total as usize)
            .filter(|&j| {
                let total = world.room_free_counts[j];
                total > 0 && self.per_room[j] as f64 >= threshold * total as f64
            })
            .count()
    }

    pub fn fraction(&self, world: &GroundTruthWorld) -> f64 {
        if world.room_voxel_total == 0 {
            0.0
        } else {
            self.covered_total as f64 / world.room_voxel_total as f64
        }
    }
}

/// Collective room-voxel coverage of a set of per-robot observed sets:
/// the union of observed voxels intersected with the union of room voxel
/// sets, as an absolute count and as a fraction of all room voxels.
pub fn room_coverage(observed: &[&VoxelSet], world: &GroundTruthWorld) -> (usize, f64) {
    let mut union = VoxelSet::new(world.dims.len());
    for o in observed {
        union.union_with(o);
    }
    let count = union.iter().filter(|&i| world.room_of_voxel(i).is_some()).count();
    let fraction = if world.room_voxel_total == 0 {
        0.0
    } else {
        count as f64 / world.room_voxel_total as f64
    };
    (count, fraction)
}

/// Rooms-visited count over an explicit observed union: room `j` counts once
/// at least `threshold` of its voxels are covered (>= semantics).
pub fn rooms_visited(observed_union: &VoxelSet, world: &GroundTruthWorld, threshold: f64) -> usize {
    let mut per_room = vec![0usize; world.rooms_total as usize + 1];
    for idx in observed_union.iter() {
        if let Some(room) = world.room_of_voxel(idx) {
            per_room[room as usize] += 1;
        }
    }
    (1..=world.rooms_total as usize)
        .filter(|&j| {
            let total = world.room_free_counts[j];
            total > 0 && per_room[j] as f64 >= threshold * total as f64
        })
        .count()
}

/// Door-detection score at a match radius.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionScore {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    /// Set when precision is reported as 1.0 by convention (no detections).
    pub precision_by_convention: bool,
}

/// Greedy one-to-one nearest matching between detections and ground truth
/// within `radius`. With no detections precision is reported as 1.0 by
/// convention and flagged.
pub fn score_detections(detected: &[Vec2], truth: &[Vec2], radius: f64) -> DetectionScore {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, d) in detected.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            let dist = d.dist(*t);
            if dist <= radius {
                pairs.push((dist, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut det_used = vec![false; detected.len()];
    let mut truth_used = vec![false; truth.len()];
    let mut tp = 0usize;
    for (_, i, j) in pairs {
        if !det_used[i] && !truth_used[j] {
            det_used[i] = true;
            truth_used[j] = true;
            tp += 1;
        }
    }
    let fp = detected.len() - tp;
    let fn_ = truth.len() - tp;
    let by_convention = detected.is_empty();
    let precision = if detected.is_empty() {
        1.0
    } else {
        tp as f64 / detected.len() as f64
    };
    let recall = if truth.is_empty() { 1.0 } else { tp as f64 / truth.len() as f64 };
    DetectionScore {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        precision,
        recall,
        precision_by_convention: by_convention,
    }
}

/// Wall-clock statistics (microseconds) for one pipeline stage.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RuntimeStats {
    pub tag: String,
    pub samples: usize,
    pub mean_us: f64,
    pub p50_us: f64,
    pub p90_us: f64,
    pub max_us: f64,
}

/// Summarizes stage timings. Requires at least 30 samples.
pub fn time_module(tag: &str, samples_us: &[f64]) -> Result<RuntimeStats> {
    if samples_us.len() < 30 {
        return Err(Error::Metrics(format!(
            "need >= 30 samples for {tag}, got {}",
            samples_us.len()
        )));
    }
    let mut sorted = samples_us.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    let pct = |q: f64| sorted[((sorted.len() - 1) as f64 * q).round() as usize];
    Ok(RuntimeStats {
        tag: tag.to_string(),
        samples: sorted.len(),
        mean_us: mean,
        p50_us: pct(0.5),
        p90_us: pct(0.9),
        max_us: *sorted.last().unwrap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldmodel::{rasterize, Room, Scenario, Wall};

    fn two_room_world() -> GroundTruthWorld {
        let s = Scenario {
            name: "two".into(),
            cell_size: 0.2,
            extents: [4.0, 2.0, 0.6],
            walls: vec![Wall { start: [1.9, 0.0], end: [1.9, 2.0], thickness: 0.2, height: None }],
            obstacles: vec![],
            rooms: vec![
                Room { id: 1, polygon: vec![[0.0, 0.0], [1.8, 0.0], [1.8, 2.0], [0.0, 2.0]] },
                Room { id: 2, polygon: vec![[2.0, 0.0], [4.0, 0.0], [4.0, 2.0], [2.0, 2.0]] },
            ],
            spawns: vec![[1.0, 1.0, 0.3, 0.0]],
            duration: 1.0,
        };
        rasterize(&s)
    }

    #[test]
    fn empty_observations_zero_coverage() {
        let w = two_room_world();
        let o = VoxelSet::new(w.dims.len());
        let (count, frac) = room_coverage(&[&o], &w);
        assert_eq!(count, 0);
        assert_eq!(frac, 0.0);
    }

    #[test]
    fn identical_sets_union_no_double_count() {
        let w = two_room_world();
        let mut o1 = VoxelSet::new(w.dims.len());
        for idx in crate::worldmodel::room_voxels(&w, 1).unwrap() {
            o1.insert(idx);
        }
        let o2 = o1.clone();
        let (solo, _) = room_coverage(&[&o1], &w);
        let (both, _) = room_coverage(&[&o1, &o2], &w);
        assert_eq!(solo, both);
    }

    #[test]
    fn non_room_voxels_do_not_count() {
        let w = two_room_world();
        let mut o = VoxelSet::new(w.dims.len());
        // observe only wall-column voxels (labeled nothing)
        for iz in 0..w.dims.nz {
            for iy in 0..w.dims.ny {
                for ix in 0..w.dims.nx {
                    if w.room_of_column(ix, iy).is_none() {
                        o.insert(w.dims.idx(ix, iy, iz));
                    }
                }
            }
        }
        assert!(o.len() > 0);
        let (count, _) = room_coverage(&[&o], &w);
        assert_eq!(count, 0);
    }

    #[test]
    fn rooms_visited_threshold_inclusive() {
        let w = two_room_world();
        let room1 = crate::worldmodel::room_voxels(&w, 1).unwrap();
        let half = room1.len() / 2;
        let mut o = VoxelSet::new(w.dims.len());
        for &idx in room1.iter().take(half) {
            o.insert(idx);
        }
        // exactly 50% observed counts with >= semantics (room1 has an even count)
        assert_eq!(room1.len() % 2, 0);
        assert_eq!(rooms_visited(&o, &w, 0.5), 1);
        // one voxel below half does not count
        let mut o2 = VoxelSet::new(w.dims.len());
        for &idx in room1.iter().take(half - 1) {
            o2.insert(idx);
        }
        assert_eq!(rooms_visited(&o2, &w, 0.5), 0);
    }

    #[test]
    fn rooms_visited_empty_and_full() {
        let w = two_room_world();
        assert_eq!(rooms_visited(&VoxelSet::new(w.dims.len()), &w, 0.5), 0);
        let mut o = VoxelSet::new(w.dims.len());
        for j in 1..=2 {
            for idx in crate::worldmodel::room_voxels(&w, j).unwrap() {
                o.insert(idx);
            }
        }
        assert_eq!(rooms_visited(&o, &w, 0.5), 2);
    }

    #[test]
    fn tracker_matches_pure_function() {
        let w = two_room_world();
        let mut tracker = CoverageTracker::new(&w);
        let mut o = VoxelSet::new(w.dims.len());
        let voxels = crate::worldmodel::room_voxels(&w, 2).unwrap();
        let delta: Vec<usize> = voxels.iter().take(37).copied().collect();
        for &idx in &delta {
            o.insert(idx);
        }
        tracker.add_observed(&w, &delta);
        tracker.add_observed(&w, &delta); // idempotent
        let (count, frac) = room_coverage(&[&o], &w);
        assert_eq!(tracker.covered_total, count);
        assert!((tracker.fraction(&w) - frac).abs() < 1e-12);
    }

    #[test]
    fn detection_exact_match() {
        let pts = vec![Vec2::new(1.0, 1.0), Vec2::new(4.0, 2.0)];
        let s = score_detections(&pts, &pts, 1.0);
        assert_eq!(s.precision, 1.0);
        assert_eq!(s.recall, 1.0);
        assert!(!s.precision_by_convention);
    }

    #[test]
    fn detection_one_spurious() {
        let truth = vec![Vec2::new(1.0, 1.0), Vec2::new(4.0, 2.0), Vec2::new(8.0, 3.0)];
        let mut detected = truth.clone();
        detected.push(Vec2::new(20.0, 20.0));
        let s = score_detections(&detected, &truth, 1.0);
        assert!((s.precision - 3.0 / 4.0).abs() < 1e-12);
        assert_eq!(s.recall, 1.0);
    }

    #[test]
    fn detection_empty_detected_convention() {
        let truth = vec![Vec2::new(1.0, 1.0)];
        let s = score_detections(&[], &truth, 1.0);
        assert_eq!(s.precision, 1.0);
        assert!(s.precision_by_convention);
        assert_eq!(s.recall, 0.0);
    }

    #[test]
    fn detection_swap_symmetry() {
        let a = vec![Vec2::new(0.0, 0.0), Vec2::new(3.0, 0.0), Vec2::new(9.0, 9.0)];
        let b = vec![Vec2::new(0.2, 0.0), Vec2::new(7.0, 7.0)];
        let s1 = score_detections(&a, &b, 1.0);
        let s2 = score_detections(&b, &a, 1.0);
        assert_eq!(s1.true_positives, s2.true_positives);
        assert!((s1.precision - s2.recall).abs() < 1e-12);
        assert!((s1.recall - s2.precision).abs() < 1e-12);
    }

    #[test]
    fn detection_one_to_one_matching() {
        // two detections near one truth point: only one may match
        let truth = vec![Vec2::new(0.0, 0.0)];
        let detected = vec![Vec2::new(0.1, 0.0), Vec2::new(0.0, 0.1)];
        let s = score_detections(&detected, &truth, 1.0);
        assert_eq!(s.true_positives, 1);
        assert_eq!(s.false_positives, 1);
    }

    #[test]
    fn time_module_stats() {
        let samples: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let st = time_module("edt", &samples).unwrap();
        assert!((st.mean_us - 49.5).abs() < 1e-9);
        assert_eq!(st.max_us, 99.0);
        assert!(time_module("x", &[]).is_err());
        assert!(time_module("x", &[1.0; 29]).is_err());
    }
}
