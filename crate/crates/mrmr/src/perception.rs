//! Simulated sensing: LiDAR scans build the per-robot known map, a fisheye
//! camera model accumulates the observed-voxel set used by the coverage
//! objective.
//!
//! Sensing is perfect and noiseless; rays are traced with integer grid
//! traversal so that results are deterministic.

use crate::geom::Point3;
use crate::grid::{GridDims, VoxelSet};
use crate::worldmodel::GroundTruthWorld;

/// Ternary voxel state of a robot's map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum CellState {
    Unknown = 0,
    Free = 1,
    Occupied = 2,
}

/// A robot's accumulated occupancy knowledge.
#[derive(Debug, Clone)]
pub struct KnownMap {
    pub dims: GridDims,
    state: Vec<u8>,
}

impl KnownMap {
    pub fn new(dims: GridDims) -> Self {
        KnownMap { dims, state: vec![CellState::Unknown as u8; dims.len()] }
    }

    /// A map with every voxel known, taken from the ground truth.
    pub fn fully_known(world: &GroundTruthWorld) -> Self {
        let dims = world.dims;
        let mut state = vec![CellState::Free as u8; dims.len()];
        for (i, s) in state.iter_mut().enumerate() {
            if world.occupied_idx(i) {
                *s = CellState::Occupied as u8;
            }
        }
        KnownMap { dims, state }
    }

    #[inline]
    pub fn state(&self, ix: usize, iy: usize, iz: usize) -> CellState {
        match self.state[self.dims.idx(ix, iy, iz)] {
            1 => CellState::Free,
            2 => CellState::Occupied,
            _ => CellState::Unknown,
        }
    }

    #[inline]
    pub fn set_state(&mut self, ix: usize, iy: usize, iz: usize, s: CellState) {
        let i = self.dims.idx(ix, iy, iz);
        // states only move away from Unknown; the world is static so a voxel
        // never flips between Free and Occupied
        if self.state[i] == CellState::Unknown as u8 {
            self.state[i] = s as u8;
        } else {
            debug_assert_eq!(self.state[i], s as u8, "voxel state flip at {i}");
        }
    }

    pub fn known_voxels(&self) -> usize {
        self.state.iter().filter(|&&s| s != 0).count()
    }
}

/// Sensor parameters: the forward camera (range, horizontal field of view)
/// and the mapping LiDAR (range, azimuth ray count, elevation fan spacing).
#[derive(Debug, Clone)]
pub struct SensorConfig {
    pub camera_range: f64,
    pub camera_fov: f64,
    pub lidar_range: f64,
    pub rays_per_scan: usize,
    /// Elevation spacing of the LiDAR fan: rays at -res, 0, +res.
    pub angular_resolution: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig {
            camera_range: 5.0,
            camera_fov: 170.0_f64.to_radians(),
            lidar_range: 15.0,
            rays_per_scan: 180,
            angular_resolution: 0.3,
        }
    }
}

/// One LiDAR ray result.
#[derive(Debug, Clone, Copy)]
pub struct ScanRay {
    pub azimuth: f64,
    pub elevation: f64,
    /// First occupied voxel within range, or None for a max-range miss.
    pub hit: Option<(usize, usize, usize)>,
}

/// Visits the voxels a ray passes through, in order, including the voxel
/// containing the origin. The callback receives the voxel and the ray
/// parameter at which it was entered; returning false stops the march.
/// Marching ends at `max_t` (meters) or when the ray leaves the grid.
pub fn traverse_grid(
    dims: &GridDims,
    origin: Point3,
    dir: Point3,
    max_t: f64,
    mut visit: impl FnMut(usize, usize, usize, f64) -> bool,
) {
    let cell = dims.cell;
    let Some((mut ix, mut iy, mut iz)) = dims.locate(origin) else {
        return;
    };
    let step = |d: f64| if d > 0.0 { 1i64 } else if d < 0.0 { -1 } else { 0 };
    let (sx, sy, sz) = (step(dir.x), step(dir.y), step(dir.z));
    let next_boundary =
        |i: usize, s: i64| if s > 0 { (i as f64 + 1.0) * cell } else { i as f64 * cell };
    let tmax_axis = |o: f64, d: f64, i: usize, s: i64| {
        if s == 0 {
            f64::INFINITY
        } else {
            (next_boundary(i, s) - o) / d
        }
    };
    let mut tmax_x = tmax_axis(origin.x, dir.x, ix, sx);
    let mut tmax_y = tmax_axis(origin.y, dir.y, iy, sy);
    let mut tmax_z = tmax_axis(origin.z, dir.z, iz, sz);
    let tdelta = |d: f64, s: i64| if s == 0 { f64::INFINITY } else { (cell / d).abs() };
    let (tdx, tdy, tdz) = (tdelta(dir.x, sx), tdelta(dir.y, sy), tdelta(dir.z, sz));

    let mut t = 0.0f64;
    loop {
        if !visit(ix, iy, iz, t) {
            return;
        }
        // advance to the next voxel boundary
        if tmax_x <= tmax_y && tmax_x <= tmax_z {
            t = tmax_x;
            tmax_x += tdx;
            let n = ix as i64 + sx;
            if n < 0 || n >= dims.nx as i64 {
                return;
            }
            ix = n as usize;
        } else if tmax_y <= tmax_z {
            t = tmax_y;
            tmax_y += tdy;
            let n = iy as i64 + sy;
            if n < 0 || n >= dims.ny as i64 {
                return;
            }
            iy = n as usize;
        } else {
            t = tmax_z;
            tmax_z += tdz;
            let n = iz as i64 + sz;
            if n < 0 || n >= dims.nz as i64 {
                return;
            }
            iz = n as usize;
        }
        if t > max_t {
            return;
        }
    }
}

fn ray_dir(azimuth: f64, elevation: f64) -> Point3 {
    Point3::new(
        azimuth.cos() * elevation.cos(),
        azimuth.sin() * elevation.cos(),
        elevation.sin(),
    )
}

/// Casts the LiDAR fan from a pose: `rays_per_scan` uniformly spaced world
/// frame azimuths at elevations {-res, 0, +res}. Rays are ordered by
/// elevation then azimuth.
pub fn lidar_scan(world: &GroundTruthWorld, pose: Point3, cfg: &SensorConfig) -> Vec<ScanRay> {
    let mut rays = Vec::with_capacity(cfg.rays_per_scan * 3);
    for elevation in [-cfg.angular_resolution, 0.0, cfg.angular_resolution] {
        for k in 0..cfg.rays_per_scan {
            let azimuth = 2.0 * std::f64::consts::PI * k as f64 / cfg.rays_per_scan as f64;
            let dir = ray_dir(azimuth, elevation);
            let mut hit = None;
            traverse_grid(&world.dims, pose, dir, cfg.lidar_range, |ix, iy, iz, _| {
                if world.occupied(ix, iy, iz) {
                    hit = Some((ix, iy, iz));
                    false
                } else {
                    true
                }
            });
            rays.push(ScanRay { azimuth, elevation, hit });
        }
    }
    rays
}

/// Integrates scan rays into the known map: traversed voxels before a hit
/// become free, the hit voxel becomes occupied. Idempotent.
pub fn integrate_scan(map: &mut KnownMap, pose: Point3, rays: &[ScanRay], lidar_range: f64) {
    for ray in rays {
        let dir = ray_dir(ray.azimuth, ray.elevation);
        traverse_grid(&map.dims.clone(), pose, dir, lidar_range, |ix, iy, iz, _| {
            if ray.hit == Some((ix, iy, iz)) {
                map.set_state(ix, iy, iz, CellState::Occupied);
                false
            } else {
                map.set_state(ix, iy, iz, CellState::Free);
                true
            }
        });
    }
}

/// True when the voxel center is visible from the sensor: the straight line
/// to it crosses no other occupied voxel first in the ground-truth world.
pub fn voxel_visible(world: &GroundTruthWorld, from: Point3, target: (usize, usize, usize)) -> bool {
    let c = world.dims.center(target.0, target.1, target.2);
    let d = from.dist(c);
    if d < 1e-9 {
        return true;
    }
    let dir = Point3::new((c.x - from.x) / d, (c.y - from.y) / d, (c.z - from.z) / d);
    let mut visible = false;
    let mut blocked = false;
    traverse_grid(&world.dims, from, dir, d + world.dims.cell, |ix, iy, iz, _| {
        if (ix, iy, iz) == target {
            visible = true;
            return false;
        }
        if world.occupied(ix, iy, iz) {
            blocked = true;
            return false;
        }
        true
    });
    visible && !blocked
}

/// Camera observation step: adds every ground-truth voxel that is within
/// range, inside the horizontal field of view around `yaw`, and visible by
/// line of sight, to the observed set. Returns the newly observed voxels.
///
/// Both surface (occupied) voxels and free voxels count as observed; the
/// free ones are what the room-coverage objective intersects with the room
/// voxel sets.
pub fn camera_observe(
    world: &GroundTruthWorld,
    observed: &mut VoxelSet,
    pose: Point3,
    yaw: f64,
    cfg: &SensorConfig,
) -> Vec<usize> {
    let dims = world.dims;
    let r = cfg.camera_range;
    let half_fov = cfg.camera_fov * 0.5;
    let (hx, hy) = (yaw.cos(), yaw.sin());
    let ix0 = (((pose.x - r) / dims.cell).floor().max(0.0)) as usize;
    let iy0 = (((pose.y - r) / dims.cell).floor().max(0.0)) as usize;
    let ix1 = ((((pose.x + r) / dims.cell).ceil()) as usize).min(dims.nx);
    let iy1 = ((((pose.y + r) / dims.cell).ceil()) as usize).min(dims.ny);
    let mut delta = Vec::new();
    for iy in iy0..iy1 {
        for ix in ix0..ix1 {
            for iz in 0..dims.nz {
                let idx = dims.idx(ix, iy, iz);
                if observed.contains(idx) {
                    continue;
                }
                let c = dims.center(ix, iy, iz);
                if pose.dist(c) > r {
                    continue;
                }
                let (dx, dy) = (c.x - pose.x, c.y - pose.y);
                let horiz = (dx * dx + dy * dy).sqrt();
                if horiz > 1e-9 {
                    let cos_angle = (dx * hx + dy * hy) / horiz;
                    if cos_angle < half_fov.cos() {
                        continue;
                    }
                }
                if voxel_visible(world, pose, (ix, iy, iz)) {
                    observed.insert(idx);
                    delta.push(idx);
                }
            }
        }
    }
    delta
}
