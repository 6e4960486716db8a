//! Circular decomposition of free space.
//!
//! Distance-field maxima seed circles (center = maximum, radius = wall
//! distance). Each update pass absorbs near-duplicates (keep the larger),
//! merges overlapping candidate/existing pairs with the closed-form
//! center/radius expressions, clamps radii to the current wall distance, and
//! splits any circle wider than the split threshold into adjoining
//! sub-circles.

use crate::cues::DistanceField;
use crate::geom::Vec2;

/// One decomposition circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub id: u32,
    pub center: Vec2,
    pub r: f64,
    pub reached: bool,
}

/// Ordered set of circles with stable ids.
#[derive(Debug, Clone, Default)]
pub struct CircleSet {
    pub circles: Vec<Circle>,
    next_id: u32,
}

/// Tunables of the decomposition.
#[derive(Debug, Clone)]
pub struct CircleConfig {
    /// Candidate/existing pairs closer than `eps_merge * (r1 + r2)` merge.
    pub eps_merge: f64,
    /// Pairs closer than `0.5 * (r1 + r2)` keep only the larger circle.
    pub containment_factor: f64,
    /// A candidate replaces a contained existing circle only when larger by
    /// this much. Wall clamping shrinks radii between passes; without the
    /// margin the regenerated candidate would swap identities every tick.
    pub containment_margin: f64,
    /// Radii above this are split.
    pub r_thresh: f64,
    /// Floor for the trailing sub-circle of a split.
    pub r_min: f64,
    /// Circles clamped below this radius are discarded.
    pub drop_below: f64,
    /// Candidate radii are capped here (distance-field artifacts in large
    /// unknown areas would otherwise spawn arbitrarily wide circles).
    pub max_candidate_radius: f64,
}

impl Default for CircleConfig {
    fn default() -> Self {
        CircleConfig {
            eps_merge: 0.95,
            containment_factor: 0.5,
            containment_margin: 0.1,
            r_thresh: 2.5,
            r_min: 0.5,
            drop_below: 0.2,
            max_candidate_radius: 5.0,
        }
    }
}

/// Circle from a distance-field maximum. `delta` must be positive.
pub fn generate_circle(m: Vec2, delta: f64, id: u32) -> Result<Circle, String> {
    if delta <= 0.0 {
        return Err(format!("circle radius must be positive, got {delta}"));
    }
    Ok(Circle { id, center: m, r: delta, reached: false })
}

/// Merges a candidate circle with an existing one using the closed-form
/// expressions: center `(r1*m + r2*c) / (r1 + r2)`, radius
/// `(r1 + r2 + d) * d / (2 (r1 + r2))`. Requires `d < eps * (r1 + r2)`.
pub fn merge(cand: &Circle, existing: &Circle, eps: f64, id: u32) -> Result<Circle, String> {
    let d = cand.center.dist(existing.center);
    let (r1, r2) = (cand.r, existing.r);
    if d >= eps * (r1 + r2) {
        return Err(format!("merge precondition violated: d={d} >= {}", eps * (r1 + r2)));
    }
    let center = (cand.center * r1 + existing.center * r2) * (1.0 / (r1 + r2));
    let r = (r1 + r2 + d) * d / (2.0 * (r1 + r2));
    Ok(Circle { id, center, r, reached: cand.reached && existing.reached })
}

/// Splits an oversized circle into a first sub-circle of radius `r_thresh`
/// shifted backwards along the split direction, plus an adjoining remainder,
/// recursing while the remainder is still oversized. The sub-circle diameters
/// tile the original diameter along the split axis.
pub fn split_circle(c: &Circle, dir: Vec2, cfg: &CircleConfig, next_id: &mut u32) -> Vec<Circle> {
    assert!(c.r > cfg.r_thresh, "split precondition: r > r_thresh");
    let u = dir.normalized();
    let mut out = Vec::new();
    let first = Circle {
        id: alloc_id(next_id),
        center: c.center - u * (c.r - cfg.r_thresh),
        r: cfg.r_thresh,
        reached: c.reached,
    };
    out.push(first);
    let r2 = (c.r - cfg.r_thresh).max(cfg.r_min);
    let second = Circle {
        id: alloc_id(next_id),
        center: c.center + u * (c.r - r2),
        r: r2,
        reached: c.reached,
    };
    if second.r > cfg.r_thresh {
        out.extend(split_circle(&second, dir, cfg, next_id));
    } else {
        out.push(second);
    }
    out
}

fn alloc_id(next_id: &mut u32) -> u32 {
    let id = *next_id;
    *next_id += 1;
    id
}

impl CircleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Circle> {
        self.circles.iter()
    }

    pub fn get_mut(&mut self, id: u32) -> Option<&mut Circle> {
        self.circles.iter_mut().find(|c| c.id == id)
    }

    pub fn get(&self, id: u32) -> Option<&Circle> {
        self.circles.iter().find(|c| c.id == id)
    }

    /// One decomposition update from fresh distance-field maxima.
    ///
    /// Candidates scan the set in id order; a containment hit keeps only the
    /// larger circle, a merge hit replaces both parties by the merged circle
    /// and restarts the scan, and untouched candidates are appended. After
    /// all candidates: radii are clamped to the current wall distance at the
    /// center, undersized circles are dropped, oversized ones are split along
    /// the local free-space long axis.
    pub fn update(&mut self, maxima: &[(Vec2, f64)], dist: &DistanceField, cfg: &CircleConfig) {
        for &(m, delta) in maxima {
            let delta = delta.min(cfg.max_candidate_radius);
            if delta <= 0.0 {
                continue;
            }
            let mut cand = Circle { id: 0, center: m, r: delta, reached: false };
            let mut dead = false;
            'scan: loop {
                for i in 0..self.circles.len() {
                    let other = self.circles[i];
                    let d = cand.center.dist(other.center);
                    if d < cfg.containment_factor * (cand.r + other.r) {
                        if cand.r > other.r + cfg.containment_margin {
                            // candidate dominates: drop the existing circle
                            let removed = self.circles.remove(i);
                            let _ = removed;
                            continue 'scan;
                        } else {
                            dead = true;
                            break 'scan;
                        }
                    } else if d < cfg.eps_merge * (cand.r + other.r) {
                        let merged = merge(&cand, &other, cfg.eps_merge, 0)
                            .expect("merge precondition checked");
                        self.circles.remove(i);
                        cand = merged;
                        continue 'scan;
                    }
                }
                break;
            }
            if !dead {
                cand.id = alloc_id(&mut self.next_id);
                self.circles.push(cand);
            }
        }

        // clamp to current free-space knowledge and drop collapsed circles
        for c in self.circles.iter_mut() {
            if let Some(wall_dist) = dist.at_point(c.center) {
                if wall_dist < c.r {
                    c.r = wall_dist;
                }
            }
        }
        self.circles.retain(|c| c.r >= cfg.drop_below);

        // split oversized circles
        let mut i = 0;
        while i < self.circles.len() {
            if self.circles[i].r > cfg.r_thresh {
                let c = self.circles.remove(i);
                let dir = split_direction(&c, dist);
                let parts = split_circle(&c, dir, cfg, &mut self.next_id);
                for p in parts {
                    self.circles.push(p);
                }
                // re-examine from the same index; splits only append r <= thresh
            } else {
                i += 1;
            }
        }
        self.circles.sort_by_key(|c| c.id);
    }
}

/// Split direction: from the circle center toward the farthest free cell
/// inside the circle; +x when there is no free cell or no clear winner.
fn split_direction(c: &Circle, dist: &DistanceField) -> Vec2 {
    let cell = dist.cell;
    let x0 = (((c.center.x - c.r) / cell).floor().max(0.0)) as usize;
    let y0 = (((c.center.y - c.r) / cell).floor().max(0.0)) as usize;
    let x1 = ((((c.center.x + c.r) / cell).ceil()) as usize).min(dist.w);
    let y1 = ((((c.center.y + c.r) / cell).ceil()) as usize).min(dist.h);
    let mut best: Option<(f64, Vec2)> = None;
    for y in y0..y1 {
        for x in x0..x1 {
            if dist.at(x, y) <= 0.0 {
                continue; // occupied cell
            }
            let p = Vec2::new((x as f64 + 0.5) * cell, (y as f64 + 0.5) * cell);
            let d = p.dist(c.center);
            if d > c.r {
                continue;
            }
            if best.map_or(true, |(bd, _)| d > bd) {
                best = Some((d, p - c.center));
            }
        }
    }
    match best {
        Some((d, v)) if d > 1e-9 => v.normalized(),
        _ => Vec2::new(1.0, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_field(w: usize, h: usize) -> DistanceField {
        // no occupied cells: sentinel distances everywhere
        let diag = 0.2 * ((w * w + h * h) as f64).sqrt();
        DistanceField { w, h, cell: 0.2, data: vec![diag; w * h] }
    }

    #[test]
    fn generate_circle_constructor() {
        let c = generate_circle(Vec2::new(3.0, 3.0), 1.5, 7).unwrap();
        assert_eq!(c.center, Vec2::new(3.0, 3.0));
        assert_eq!(c.r, 1.5);
        assert!(!c.reached);
        assert!(generate_circle(Vec2::new(0.0, 0.0), 0.0, 0).is_err());
        assert!(generate_circle(Vec2::new(0.0, 0.0), -1.0, 0).is_err());
    }

    #[test]
    fn merge_formula_example_one() {
        // r1=2 at (0,0), r2=1 at (2,0): d=2 < 0.95*3
        let a = Circle { id: 0, center: Vec2::new(0.0, 0.0), r: 2.0, reached: false };
        let b = Circle { id: 1, center: Vec2::new(2.0, 0.0), r: 1.0, reached: false };
        let m = merge(&a, &b, 0.95, 2).unwrap();
        assert!((m.center.x - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.center.y, 0.0);
        assert!((m.r - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn merge_formula_example_two() {
        let a = Circle { id: 0, center: Vec2::new(0.0, 0.0), r: 1.0, reached: false };
        let b = Circle { id: 1, center: Vec2::new(1.5, 0.0), r: 1.0, reached: false };
        let m = merge(&a, &b, 0.95, 2).unwrap();
        assert!((m.center.x - 0.75).abs() < 1e-15);
        assert!((m.r - 1.3125).abs() < 1e-15);
    }

    #[test]
    fn merge_precondition_enforced() {
        let a = Circle { id: 0, center: Vec2::new(0.0, 0.0), r: 1.0, reached: false };
        let b = Circle { id: 1, center: Vec2::new(5.0, 0.0), r: 1.0, reached: false };
        assert!(merge(&a, &b, 0.95, 2).is_err());
    }

    #[test]
    fn split_r4_first_circle_exact() {
        let cfg = CircleConfig::default();
        let c = Circle { id: 0, center: Vec2::new(0.0, 0.0), r: 4.0, reached: false };
        let mut id = 1;
        let parts = split_circle(&c, Vec2::new(1.0, 0.0), &cfg, &mut id);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].r, 2.5);
        assert!((parts[0].center.x + 1.5).abs() < 1e-15);
        assert!((parts[1].r - 1.5).abs() < 1e-15);
        assert!((parts[1].center.x - 2.5).abs() < 1e-15);
        // both internally tangent to the original, externally tangent to
        // each other
        let d01 = parts[0].center.dist(parts[1].center);
        assert!((d01 - (parts[0].r + parts[1].r)).abs() < 1e-12);
    }

    #[test]
    fn split_r6_recursive_spans_diameter() {
        let cfg = CircleConfig::default();
        let c = Circle { id: 0, center: Vec2::new(0.0, 0.0), r: 6.0, reached: false };
        let mut id = 1;
        let parts = split_circle(&c, Vec2::new(1.0, 0.0), &cfg, &mut id);
        assert!(parts.iter().all(|p| p.r <= cfg.r_thresh + 1e-12));
        let lo = parts.iter().map(|p| p.center.x - p.r).fold(f64::INFINITY, f64::min);
        let hi = parts.iter().map(|p| p.center.x + p.r).fold(f64::NEG_INFINITY, f64::max);
        assert!((lo + 6.0).abs() < 1e-12 && (hi - 6.0).abs() < 1e-12, "[{lo}, {hi}]");
    }

    #[test]
    fn update_appends_single_candidate() {
        let mut set = CircleSet::new();
        let dist = open_field(60, 60);
        set.update(&[(Vec2::new(3.0, 3.0), 1.5)], &dist, &CircleConfig::default());
        assert_eq!(set.circles.len(), 1);
        assert_eq!(set.circles[0].r, 1.5);
    }

    #[test]
    fn update_containment_keeps_larger() {
        let mut set = CircleSet::new();
        let dist = open_field(60, 60);
        let cfg = CircleConfig::default();
        set.update(&[(Vec2::new(3.0, 3.0), 2.0)], &dist, &cfg);
        // concentric smaller candidate: discarded
        set.update(&[(Vec2::new(3.0, 3.0), 1.0)], &dist, &cfg);
        assert_eq!(set.circles.len(), 1);
        assert_eq!(set.circles[0].r, 2.0);
        // concentric larger candidate: replaces
        set.update(&[(Vec2::new(3.0, 3.0), 2.4)], &dist, &cfg);
        assert_eq!(set.circles.len(), 1);
        assert_eq!(set.circles[0].r, 2.4);
    }

    #[test]
    fn update_merges_overlapping_candidate() {
        let mut set = CircleSet::new();
        let dist = open_field(60, 60);
        let cfg = CircleConfig::default();
        set.update(&[(Vec2::new(3.0, 3.0), 1.0)], &dist, &cfg);
        set.update(&[(Vec2::new(4.5, 3.0), 1.0)], &dist, &cfg);
        assert_eq!(set.circles.len(), 1);
        let c = set.circles[0];
        assert!((c.center.x - 3.75).abs() < 1e-12);
        assert!((c.r - 1.3125).abs() < 1e-12);
    }

    #[test]
    fn update_radius_bound_after_pass() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let dist = open_field(200, 200);
        let cfg = CircleConfig::default();
        for _ in 0..20 {
            let mut set = CircleSet::new();
            let n = rng.gen_range(1..12);
            let maxima: Vec<(Vec2, f64)> = (0..n)
                .map(|_| {
                    (
                        Vec2::new(rng.gen_range(5.0..35.0), rng.gen_range(5.0..35.0)),
                        rng.gen_range(0.3..6.0),
                    )
                })
                .collect();
            set.update(&maxima, &dist, &cfg);
            assert!(set.circles.iter().all(|c| c.r <= cfg.r_thresh + 1e-12));
        }
    }

    #[test]
    fn update_clamps_to_wall_distance() {
        let mut set = CircleSet::new();
        // field with small distances everywhere
        let dist = DistanceField { w: 40, h: 40, cell: 0.2, data: vec![0.9; 1600] };
        set.update(&[(Vec2::new(3.0, 3.0), 2.0)], &dist, &CircleConfig::default());
        assert_eq!(set.circles.len(), 1);
        assert_eq!(set.circles[0].r, 0.9);
    }

    #[test]
    fn update_idempotent_on_stable_split_free_input() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let dist = open_field(200, 200);
        let cfg = CircleConfig::default();
        for _ in 0..30 {
            let mut set = CircleSet::new();
            let n = rng.gen_range(1..8);
            let maxima: Vec<(Vec2, f64)> = (0..n)
                .map(|_| {
                    (
                        Vec2::new(rng.gen_range(5.0..35.0), rng.gen_range(5.0..35.0)),
                        rng.gen_range(0.3..1.2),
                    )
                })
                .collect();
            set.update(&maxima, &dist, &cfg);
            if set.circles.iter().any(|c| c.r > cfg.r_thresh) {
                continue; // splits excluded from the stability property
            }
            let snapshot: Vec<(Vec2, f64)> =
                set.circles.iter().map(|c| (c.center, c.r)).collect();
            set.update(&snapshot, &dist, &cfg);
            assert_eq!(set.circles.len(), snapshot.len(), "feedback changed the set");
            for (c, (p, r)) in set.circles.iter().zip(&snapshot) {
                assert!(c.center.dist(*p) < 1e-12);
                assert!((c.r - r).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reached_flag_survives_and_merge_ands() {
        let mut set = CircleSet::new();
        let dist = open_field(200, 200);
        let cfg = CircleConfig::default();
        set.update(&[(Vec2::new(3.0, 3.0), 1.0), (Vec2::new(20.0, 20.0), 1.0)], &dist, &cfg);
        let id0 = set.circles[0].id;
        set.get_mut(id0).unwrap().reached = true;
        // non-interacting new candidate: flags persist
        set.update(&[(Vec2::new(30.0, 30.0), 1.0)], &dist, &cfg);
        assert!(set.get(id0).unwrap().reached);
        // merging an unreached candidate into the reached circle clears it
        set.update(&[(Vec2::new(4.5, 3.0), 1.0)], &dist, &cfg);
        let near = set
            .circles
            .iter()
            .find(|c| c.center.dist(Vec2::new(3.75, 3.0)) < 0.1)
            .unwrap();
        assert!(!near.reached);
    }
}
