//! Scenario ingestion and the ground-truth voxel world.
//!
//! Scenarios are JSON documents describing walls (possibly rotated rectangular
//! segments), box obstacles, labeled room polygons and robot spawn poses.
//! Rasterization produces an immutable [`GroundTruthWorld`]: a 3D occupancy
//! grid plus per-column room labels used by the evaluation objective.

use crate::geom::{Point3, Vec2};
use crate::grid::GridDims;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A rectangular wall segment: the centerline runs from `start` to `end`,
/// the slab is `thickness` wide and extends from z = 0 up to `height`
/// (defaults to the world's z extent).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Wall {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub thickness: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
}

/// Axis-aligned box obstacle (furniture).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Obstacle {
    pub min: [f64; 3],
    pub size: [f64; 3],
}

/// Labeled room polygon. Ids must form 1..=K.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Room {
    pub id: u16,
    pub polygon: Vec<[f64; 2]>,
}

/// A full scenario document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub cell_size: f64,
    pub extents: [f64; 3],
    pub walls: Vec<Wall>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    pub rooms: Vec<Room>,
    /// Spawn poses as (x, y, z, yaw).
    pub spawns: Vec<[f64; 4]>,
    pub duration: f64,
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let s: Scenario = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {} column {}: {}", e.line(), e.column(), e)))?;
    validate(&s)?;
    Ok(s)
}

fn validate(s: &Scenario) -> Result<()> {
    if !(s.cell_size > 0.0) {
        return Err(Error::Validation("cell_size must be > 0".into()));
    }
    if s.extents.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Validation("extents must be > 0".into()));
    }
    if !(s.duration > 0.0) {
        return Err(Error::Validation("duration must be > 0".into()));
    }
    if s.rooms.is_empty() {
        return Err(Error::Validation("at least one room is required".into()));
    }
    let mut ids: Vec<u16> = s.rooms.iter().map(|r| r.id).collect();
    ids.sort_unstable();
    for (i, &id) in ids.iter().enumerate() {
        if id != (i + 1) as u16 {
            return Err(Error::Validation(format!(
                "room ids must be 1..K without gaps, found {id}"
            )));
        }
    }
    for r in &s.rooms {
        if r.polygon.len() < 3 {
            return Err(Error::Validation(format!(
                "room {} polygon needs at least 3 vertices",
                r.id
            )));
        }
    }
    for (a, b) in pairs(&s.rooms) {
        if polygons_overlap(&a.polygon, &b.polygon) {
            return Err(Error::Validation(format!(
                "rooms overlap: {} and {}",
                a.id, b.id
            )));
        }
    }
    for w in &s.walls {
        if !(w.thickness > 0.0) {
            return Err(Error::Validation("wall thickness must be > 0".into()));
        }
        let len = Vec2::new(w.end[0] - w.start[0], w.end[1] - w.start[1]).norm();
        if len < 1e-9 {
            return Err(Error::Validation("wall has zero length".into()));
        }
    }
    if s.spawns.is_empty() {
        return Err(Error::Validation("at least one spawn pose is required".into()));
    }
    for (i, sp) in s.spawns.iter().enumerate() {
        let p = Point3::new(sp[0], sp[1], sp[2]);
        if p.x < 0.0
            || p.y < 0.0
            || p.z < 0.0
            || p.x > s.extents[0]
            || p.y > s.extents[1]
            || p.z > s.extents[2]
        {
            return Err(Error::Validation(format!("spawn {i} outside world extents")));
        }
        if point_in_solid(s, p) {
            return Err(Error::Validation(format!("spawn {i} inside wall or obstacle")));
        }
    }
    Ok(())
}

fn pairs<T>(v: &[T]) -> impl Iterator<Item = (&T, &T)> {
    v.iter()
        .enumerate()
        .flat_map(move |(i, a)| v[i + 1..].iter().map(move |b| (a, b)))
}

/// True when the point lies inside any wall slab or obstacle box.
fn point_in_solid(s: &Scenario, p: Point3) -> bool {
    for w in &s.walls {
        let h = w.height.unwrap_or(s.extents[2]);
        if p.z >= 0.0 && p.z <= h && point_in_wall_xy(w, Vec2::new(p.x, p.y)) {
            return true;
        }
    }
    for o in &s.obstacles {
        if (0..3).all(|k| {
            let c = [p.x, p.y, p.z][k];
            c >= o.min[k] && c <= o.min[k] + o.size[k]
        }) {
            return true;
        }
    }
    false
}

/// Point-in-oriented-rectangle test for a wall footprint (inclusive bounds).
fn point_in_wall_xy(w: &Wall, p: Vec2) -> bool {
    let a = Vec2::new(w.start[0], w.start[1]);
    let b = Vec2::new(w.end[0], w.end[1]);
    let axis = b - a;
    let len = axis.norm();
    let u = axis.normalized();
    let d = p - a;
    let along = d.dot(u);
    let across = d.dot(u.perp());
    along >= 0.0 && along <= len && across.abs() <= w.thickness * 0.5
}

/// Ray-crossing point-in-polygon test. Points exactly on an edge may land on
/// either side; fixtures keep query points away from polygon boundaries.
pub fn point_in_polygon(poly: &[[f64; 2]], p: Vec2) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (poly[i][0], poly[i][1]);
        let (xj, yj) = (poly[j][0], poly[j][1]);
        if (yi > p.y) != (yj > p.y) {
            let x_cross = xi + (p.y - yi) / (yj - yi) * (xj - xi);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn segments_properly_cross(a1: Vec2, a2: Vec2, b1: Vec2, b2: Vec2) -> bool {
    fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
        (b - a).dot((c - a).perp())
    }
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

/// True when two simple polygons share interior area (shared boundary edges
/// do not count as overlap).
pub fn polygons_overlap(a: &[[f64; 2]], b: &[[f64; 2]]) -> bool {
    let edges = |poly: &[[f64; 2]]| -> Vec<(Vec2, Vec2)> {
        (0..poly.len())
            .map(|i| {
                let j = (i + 1) % poly.len();
                (
                    Vec2::new(poly[i][0], poly[i][1]),
                    Vec2::new(poly[j][0], poly[j][1]),
                )
            })
            .collect()
    };
    for (a1, a2) in edges(a) {
        for (b1, b2) in edges(b) {
            if segments_properly_cross(a1, a2, b1, b2) {
                return true;
            }
        }
    }
    let centroid = |poly: &[[f64; 2]]| {
        let n = poly.len() as f64;
        Vec2::new(
            poly.iter().map(|v| v[0]).sum::<f64>() / n,
            poly.iter().map(|v| v[1]).sum::<f64>() / n,
        )
    };
    point_in_polygon(b, centroid(a)) || point_in_polygon(a, centroid(b))
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

/// Canonical two-decimal serialization of a scenario. Parsing the result
/// reproduces the scenario exactly when all of its numbers are representable
/// with two decimals.
pub fn canonical_json(s: &Scenario) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"name\": {},\n", serde_json::to_string(&s.name).unwrap()));
    out.push_str(&format!("  \"cell_size\": {},\n", fmt2(s.cell_size)));
    out.push_str(&format!(
        "  \"extents\": [{}, {}, {}],\n",
        fmt2(s.extents[0]),
        fmt2(s.extents[1]),
        fmt2(s.extents[2])
    ));
    out.push_str("  \"walls\": [\n");
    for (i, w) in s.walls.iter().enumerate() {
        let height = match w.height {
            Some(h) => format!(", \"height\": {}", fmt2(h)),
            None => String::new(),
        };
        out.push_str(&format!(
            "    {{\"start\": [{}, {}], \"end\": [{}, {}], \"thickness\": {}{}}}{}\n",
            fmt2(w.start[0]),
            fmt2(w.start[1]),
            fmt2(w.end[0]),
            fmt2(w.end[1]),
            fmt2(w.thickness),
            height,
            if i + 1 < s.walls.len() { "," } else { "" }
        ));
    }
    out.push_str("  ],\n");
    out.push_str("  \"obstacles\": [\n");
    for (i, o) in s.obstacles.iter().enumerate() {
        out.push_str(&format!(
            "    {{\"min\": [{}, {}, {}], \"size\": [{}, {}, {}]}}{}\n",
            fmt2(o.min[0]),
            fmt2(o.min[1]),
            fmt2(o.min[2]),
            fmt2(o.size[0]),
            fmt2(o.size[1]),
            fmt2(o.size[2]),
            if i + 1 < s.obstacles.len() { "," } else { "" }
        ));
    }
    out.push_str("  ],\n");
    out.push_str("  \"rooms\": [\n");
    for (i, r) in s.rooms.iter().enumerate() {
        let pts: Vec<String> = r
            .polygon
            .iter()
            .map(|p| format!("[{}, {}]", fmt2(p[0]), fmt2(p[1])))
            .collect();
        out.push_str(&format!(
            "    {{\"id\": {}, \"polygon\": [{}]}}{}\n",
            r.id,
            pts.join(", "),
            if i + 1 < s.rooms.len() { "," } else { "" }
        ));
    }
    out.push_str("  ],\n");
    out.push_str("  \"spawns\": [\n");
    for (i, sp) in s.spawns.iter().enumerate() {
        out.push_str(&format!(
            "    [{}, {}, {}, {}]{}\n",
            fmt2(sp[0]),
            fmt2(sp[1]),
            fmt2(sp[2]),
            fmt2(sp[3]),
            if i + 1 < s.spawns.len() { "," } else { "" }
        ));
    }
    out.push_str("  ],\n");
    out.push_str(&format!("  \"duration\": {}\n", fmt2(s.duration)));
    out.push_str("}\n");
    out
}

/// Immutable rasterized world: 3D occupancy plus per-column room labels.
///
/// Room labels are assigned to columns whose center lies inside a room
/// polygon and that contain no wall voxel; obstacle voxels do not unlabel a
/// column. The room voxel set of room `j` consists of the *free* voxels of
/// columns labeled `j`.
#[derive(Debug, Clone)]
pub struct GroundTruthWorld {
    pub dims: GridDims,
    occupied: Vec<bool>,
    /// 0 = no room, otherwise room id.
    room_label: Vec<u16>,
    pub rooms_total: u16,
    pub room_free_counts: Vec<usize>,
    pub room_voxel_total: usize,
}

impl GroundTruthWorld {
    #[inline]
    pub fn occupied(&self, ix: usize, iy: usize, iz: usize) -> bool {
        self.occupied[self.dims.idx(ix, iy, iz)]
    }

    #[inline]
    pub fn occupied_idx(&self, idx: usize) -> bool {
        self.occupied[idx]
    }

    /// Room label of a column (1..=K), or None.
    #[inline]
    pub fn room_of_column(&self, ix: usize, iy: usize) -> Option<u16> {
        match self.room_label[self.dims.col(ix, iy)] {
            0 => None,
            id => Some(id),
        }
    }

    /// Room id when the voxel belongs to a room's free space.
    #[inline]
    pub fn room_of_voxel(&self, idx: usize) -> Option<u16> {
        if self.occupied[idx] {
            return None;
        }
        let (ix, iy, _) = self.dims.coords(idx);
        self.room_of_column(ix, iy)
    }

    pub fn is_free_point(&self, p: Point3) -> bool {
        match self.dims.locate(p) {
            Some((ix, iy, iz)) => !self.occupied(ix, iy, iz),
            None => false,
        }
    }

    pub fn total_free(&self) -> usize {
        self.occupied.iter().filter(|&&o| !o).count()
    }
}

/// Rasterizes a scenario to its ground-truth world. Deterministic:
/// voxel membership is a pure cell-center-inside-solid test.
pub fn rasterize(s: &Scenario) -> GroundTruthWorld {
    let dims = GridDims {
        nx: (s.extents[0] / s.cell_size).ceil() as usize,
        ny: (s.extents[1] / s.cell_size).ceil() as usize,
        nz: (s.extents[2] / s.cell_size).ceil() as usize,
        cell: s.cell_size,
    };
    let mut occupied = vec![false; dims.len()];
    let mut wall_col = vec![false; dims.nx * dims.ny];

    for w in &s.walls {
        let h = w.height.unwrap_or(s.extents[2]);
        // bbox of the wall footprint, padded by half thickness
        let pad = w.thickness * 0.5;
        let xmin = w.start[0].min(w.end[0]) - pad;
        let xmax = w.start[0].max(w.end[0]) + pad;
        let ymin = w.start[1].min(w.end[1]) - pad;
        let ymax = w.start[1].max(w.end[1]) + pad;
        let ix0 = ((xmin / dims.cell).floor().max(0.0)) as usize;
        let iy0 = ((ymin / dims.cell).floor().max(0.0)) as usize;
        let ix1 = ((xmax / dims.cell).ceil() as usize).min(dims.nx);
        let iy1 = ((ymax / dims.cell).ceil() as usize).min(dims.ny);
        for iy in iy0..iy1 {
            for ix in ix0..ix1 {
                let c = dims.center(ix, iy, 0);
                if !point_in_wall_xy(w, Vec2::new(c.x, c.y)) {
                    continue;
                }
                wall_col[dims.col(ix, iy)] = true;
                for iz in 0..dims.nz {
                    let cz = (iz as f64 + 0.5) * dims.cell;
                    if cz >= 0.0 && cz <= h {
                        occupied[dims.idx(ix, iy, iz)] = true;
                    }
                }
            }
        }
    }

    for o in &s.obstacles {
        let lo: Vec<usize> = (0..3)
            .map(|k| ((o.min[k] / dims.cell).floor().max(0.0)) as usize)
            .collect();
        let hi = [
            (((o.min[0] + o.size[0]) / dims.cell).ceil() as usize).min(dims.nx),
            (((o.min[1] + o.size[1]) / dims.cell).ceil() as usize).min(dims.ny),
            (((o.min[2] + o.size[2]) / dims.cell).ceil() as usize).min(dims.nz),
        ];
        for iz in lo[2]..hi[2] {
            for iy in lo[1]..hi[1] {
                for ix in lo[0]..hi[0] {
                    let c = dims.center(ix, iy, iz);
                    let inside = c.x >= o.min[0]
                        && c.x <= o.min[0] + o.size[0]
                        && c.y >= o.min[1]
                        && c.y <= o.min[1] + o.size[1]
                        && c.z >= o.min[2]
                        && c.z <= o.min[2] + o.size[2];
                    if inside {
                        occupied[dims.idx(ix, iy, iz)] = true;
                    }
                }
            }
        }
    }

    let rooms_total = s.rooms.len() as u16;
    let mut room_label = vec![0u16; dims.nx * dims.ny];
    for iy in 0..dims.ny {
        for ix in 0..dims.nx {
            let col = dims.col(ix, iy);
            if wall_col[col] {
                continue;
            }
            let c = dims.center(ix, iy, 0);
            for r in &s.rooms {
                if point_in_polygon(&r.polygon, Vec2::new(c.x, c.y)) {
                    room_label[col] = r.id;
                    break;
                }
            }
        }
    }

    let mut room_free_counts = vec![0usize; rooms_total as usize + 1];
    for iy in 0..dims.ny {
        for ix in 0..dims.nx {
            let label = room_label[dims.col(ix, iy)];
            if label == 0 {
                continue;
            }
            for iz in 0..dims.nz {
                if !occupied[dims.idx(ix, iy, iz)] {
                    room_free_counts[label as usize] += 1;
                }
            }
        }
    }
    let room_voxel_total = room_free_counts.iter().sum();

    GroundTruthWorld {
        dims,
        occupied,
        room_label,
        rooms_total,
        room_free_counts,
        room_voxel_total,
    }
}

/// The free voxels of room `j` (the per-room term of the coverage objective).
pub fn room_voxels(w: &GroundTruthWorld, j: u16) -> Result<Vec<usize>> {
    if j == 0 || j > w.rooms_total {
        return Err(Error::UnknownRoom(j));
    }
    let mut out = Vec::with_capacity(w.room_free_counts[j as usize]);
    for iy in 0..w.dims.ny {
        for ix in 0..w.dims.nx {
            if w.room_of_column(ix, iy) != Some(j) {
                continue;
            }
            for iz in 0..w.dims.nz {
                let idx = w.dims.idx(ix, iy, iz);
                if !w.occupied[idx] {
                    out.push(idx);
                }
            }
        }
    }
    Ok(out)
}
