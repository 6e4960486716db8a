//! Geometric cue extraction from the known map.
//!
//! The 3D known map is flattened into a 2D binary map (occupied = 1, free or
//! unknown = 0), median-filtered, and converted into an exact Euclidean
//! distance transform. Saddle points of the distance field mark door
//! candidates; local maxima together with their wall distances seed the
//! circular decomposition.

use crate::geom::{Point3, Vec2};
use crate::perception::{CellState, KnownMap};

/// Flight altitude used when lifting 2D cues to 3D points.
pub const CUE_Z: f64 = 1.0;

/// 2D binary occupancy map; 1 = occupied, 0 = free or unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMap {
    pub w: usize,
    pub h: usize,
    pub cell: f64,
    pub data: Vec<u8>,
}

impl BinaryMap {
    pub fn new(w: usize, h: usize, cell: f64) -> Self {
        BinaryMap { w, h, cell, data: vec![0; w * h] }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.w + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.w + x] = v;
    }
}

/// 2D field of distances (meters) to the nearest occupied cell center.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub w: usize,
    pub h: usize,
    pub cell: f64,
    pub data: Vec<f64>,
}

impl DistanceField {
    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.w + x]
    }

    /// Field value at a world point (by containing cell), or None outside.
    pub fn at_point(&self, p: Vec2) -> Option<f64> {
        if p.x < 0.0 || p.y < 0.0 {
            return None;
        }
        let x = (p.x / self.cell) as usize;
        let y = (p.y / self.cell) as usize;
        if x < self.w && y < self.h {
            Some(self.at(x, y))
        } else {
            None
        }
    }
}

/// Per-cell second derivatives of the distance field.
#[derive(Debug, Clone)]
pub struct HessianField {
    pub w: usize,
    pub h: usize,
    pub fxx: Vec<f64>,
    pub fyy: Vec<f64>,
    pub fxy: Vec<f64>,
}

/// Extracted cues: door candidates (saddle clusters) and local maxima with
/// their wall distances.
#[derive(Debug, Clone, Default)]
pub struct CueSet {
    pub saddles: Vec<Point3>,
    pub maxima: Vec<(Point3, f64)>,
}

/// Tunables for cue extraction. Thresholds are calibrated for 0.2 m cells.
#[derive(Debug, Clone)]
pub struct CueConfig {
    pub z_low: f64,
    pub z_high: f64,
    pub det_thresh: f64,
    pub fxx_thresh: f64,
    /// Saddle points within this distance are clustered together.
    pub cluster_eps: f64,
    /// One 8-neighborhood dilation of the binary map before filtering.
    /// Exact ray-cast sensing yields single-cell wall surfaces which the
    /// 1x3/3x1 median would erase outright; real LiDAR integration spreads
    /// returns over neighboring cells, and the dilation stands in for that.
    pub dilate: bool,
    /// The smaller Hessian eigenvalue at a saddle must lie below this. An
    /// ideal pinch point on an exact distance field scores -2/h (-10 at
    /// 0.2 m cells); the ridge artifacts that exact grids produce at room
    /// corners and plateau boundaries stay near -1/(4h) and are rejected.
    pub saddle_min_eig: f64,
    /// Radius of the passage probe. A door candidate must see occupied
    /// cells on exactly two arcs of this ring (its jambs) and the wall
    /// distance must rise along both free arcs (space opens on both sides).
    /// Concave corner ridges see one connected wall arc, corridor ripples
    /// see two jamb arcs but a flat distance profile; both fake door-like
    /// determinants on exact grids without being passages.
    pub flank_ring_radius: f64,
    /// Required wall-distance rise from the candidate to the free-arc
    /// midpoints of the probe ring.
    pub flank_min_rise: f64,
    /// Optional 3x3 box-smoothing of the distance field before the Hessian
    /// (off by default). Wall distances attached to maxima always come from
    /// the exact field.
    pub hessian_smooth_passes: usize,
}

impl Default for CueConfig {
    fn default() -> Self {
        CueConfig {
            z_low: 0.0,
            z_high: 1.8,
            det_thresh: -0.1,
            fxx_thresh: -0.1,
            cluster_eps: 1.0,
            dilate: true,
            saddle_min_eig: -2.0,
            flank_ring_radius: 0.8,
            flank_min_rise: 0.1,
            hessian_smooth_passes: 0,
        }
    }
}

/// Flattens the known map to 2D: a column is occupied when any voxel with
/// center z in `[z_low, z_high]` is occupied.
pub fn flatten(m: &KnownMap, z_low: f64, z_high: f64) -> BinaryMap {
    assert!(z_low < z_high, "invalid flatten band [{z_low}, {z_high}]");
    let d = m.dims;
    let mut b = BinaryMap::new(d.nx, d.ny, d.cell);
    for iz in 0..d.nz {
        let cz = (iz as f64 + 0.5) * d.cell;
        if cz < z_low || cz > z_high {
            continue;
        }
        for iy in 0..d.ny {
            for ix in 0..d.nx {
                if m.state(ix, iy, iz) == CellState::Occupied {
                    b.set(ix, iy, 1);
                }
            }
        }
    }
    b
}

fn median3(a: u8, b: u8, c: u8) -> u8 {
    if a as u16 + b as u16 + c as u16 >= 2 {
        1
    } else {
        0
    }
}

/// One 1x3 (horizontal) or 3x1 (vertical) median pass with replicated-edge
/// borders.
pub fn median_pass(b: &BinaryMap, horizontal: bool) -> BinaryMap {
    let mut out = BinaryMap::new(b.w, b.h, b.cell);
    for y in 0..b.h {
        for x in 0..b.w {
            let (p, n) = if horizontal {
                (b.at(x.saturating_sub(1), y), b.at((x + 1).min(b.w - 1), y))
            } else {
                (b.at(x, y.saturating_sub(1)), b.at(x, (y + 1).min(b.h - 1)))
            };
            out.set(x, y, median3(p, b.at(x, y), n));
        }
    }
    out
}

/// Median filtering with a 1x3 pass followed by a 3x1 pass.
pub fn median_filter(b: &BinaryMap) -> BinaryMap {
    median_pass(&median_pass(b, true), false)
}

/// 8-neighborhood dilation by one cell.
pub fn dilate8(b: &BinaryMap) -> BinaryMap {
    let mut out = BinaryMap::new(b.w, b.h, b.cell);
    for y in 0..b.h {
        for x in 0..b.w {
            if b.at(x, y) == 0 {
                continue;
            }
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if nx >= 0 && ny >= 0 && nx < b.w as i64 && ny < b.h as i64 {
                        out.set(nx as usize, ny as usize, 1);
                    }
                }
            }
        }
    }
    out
}

/// Exact Euclidean distance transform via the dimension-by-dimension
/// lower-envelope method on squared cell distances. When the map holds no
/// occupied cell every value is the world diagonal length.
pub fn distance_transform(b: &BinaryMap) -> DistanceField {
    let (w, h) = (b.w, b.h);
    let diag = b.cell * ((w * w + h * h) as f64).sqrt();
    if !b.data.iter().any(|&v| v == 1) {
        return DistanceField { w, h, cell: b.cell, data: vec![diag; w * h] };
    }
    const INF: f64 = 1e20;
    // pass 1: squared distance along each column (y direction)
    let mut g = vec![INF; w * h];
    for x in 0..w {
        // forward
        let mut dist = INF;
        for y in 0..h {
            if b.at(x, y) == 1 {
                dist = 0.0;
            } else if dist < INF {
                dist += 1.0;
            }
            g[y * w + x] = dist * dist;
        }
        // backward
        dist = INF;
        for y in (0..h).rev() {
            if b.at(x, y) == 1 {
                dist = 0.0;
            } else if dist < INF {
                dist += 1.0;
            }
            let sq = dist * dist;
            if sq < g[y * w + x] {
                g[y * w + x] = sq;
            }
        }
    }
    // pass 2: lower envelope of parabolas along each row
    let mut out = vec![0.0f64; w * h];
    let mut v = vec![0usize; w];
    let mut z = vec![0.0f64; w + 1];
    let mut f = vec![0.0f64; w];
    for y in 0..h {
        for x in 0..w {
            f[x] = g[y * w + x];
        }
        let mut k = 0usize;
        v[0] = 0;
        z[0] = -INF;
        z[1] = INF;
        for q in 1..w {
            if f[q] >= INF {
                continue;
            }
            loop {
                let p = v[k];
                let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64))
                    / (2.0 * q as f64 - 2.0 * p as f64);
                if s <= z[k] {
                    if k == 0 {
                        v[0] = q;
                        z[1] = INF;
                        break;
                    }
                    k -= 1;
                } else {
                    k += 1;
                    v[k] = q;
                    z[k] = s;
                    z[k + 1] = INF;
                    break;
                }
            }
        }
        let mut k = 0usize;
        for q in 0..w {
            while z[k + 1] < q as f64 {
                k += 1;
            }
            let p = v[k];
            let dq = q as f64 - p as f64;
            let sq = dq * dq + f[p];
            out[y * w + q] = if sq >= INF { diag * diag / (b.cell * b.cell) } else { sq };
        }
    }
    for sq in out.iter_mut() {
        *sq = b.cell * sq.sqrt();
    }
    DistanceField { w, h, cell: b.cell, data: out }
}

/// Central finite differences with spacing h = cell size; stencils shift
/// inward (one-sided) at the borders.
pub fn hessian(m: &DistanceField) -> HessianField {
    assert!(m.w >= 3 && m.h >= 3, "hessian needs at least a 3x3 field");
    let (w, h) = (m.w, m.h);
    let hh = m.cell * m.cell;
    let mut fxx = vec![0.0; w * h];
    let mut fyy = vec![0.0; w * h];
    let mut fxy = vec![0.0; w * h];
    for y in 0..h {
        let yc = y.clamp(1, h - 2);
        for x in 0..w {
            let xc = x.clamp(1, w - 2);
            let i = y * w + x;
            fxx[i] = (m.at(xc + 1, y) - 2.0 * m.at(xc, y) + m.at(xc - 1, y)) / hh;
            fyy[i] = (m.at(x, yc + 1) - 2.0 * m.at(x, yc) + m.at(x, yc - 1)) / hh;
            fxy[i] = (m.at(xc + 1, yc + 1) - m.at(xc + 1, yc - 1) - m.at(xc - 1, yc + 1)
                + m.at(xc - 1, yc - 1))
                / (4.0 * hh);
        }
    }
    HessianField { w, h, fxx, fyy, fxy }
}

/// Full cue pipeline on a known map.
pub fn extract_cues(m: &KnownMap, cfg: &CueConfig) -> CueSet {
    extract_cues_full(m, cfg).cues
}

/// Intermediate products of the cue pipeline, exposed for debug export and
/// stage timing.
pub struct CuePipeline {
    /// raw flattened occupancy (planning view)
    pub raw: BinaryMap,
    /// dilated + median-filtered occupancy (cue view)
    pub binary: BinaryMap,
    pub dist: DistanceField,
    pub cues: CueSet,
}

pub fn extract_cues_full(m: &KnownMap, cfg: &CueConfig) -> CuePipeline {
    let raw = flatten(m, cfg.z_low, cfg.z_high);
    let b = if cfg.dilate {
        median_filter(&dilate8(&raw))
    } else {
        median_filter(&raw)
    };
    let dist = distance_transform(&b);
    let cues = classify_cues(&b, &dist, cfg);
    CuePipeline { raw, binary: b, dist, cues }
}

/// Classifies cells of a distance field into saddle points and local maxima.
///
/// Saddles: det(H) below `det_thresh` on a free cell, with the smaller
/// Hessian eigenvalue below `saddle_min_eig` (exact grids produce weak
/// negative-determinant ridges at room corners and plateau boundaries that
/// are not pinch points); points within `cluster_eps` are single-linkage
/// clustered and reported as the cluster centroid snapped to the nearest
/// free cell. Maxima: strict 8-neighborhood
/// non-maximum suppression (row-major first cell wins on plateaus) followed
/// by the det > 0, fxx < `fxx_thresh` test; survivors within one cell of a
/// stronger maximum are dropped.
/// 3x3 box filter with replicated-edge borders.
pub fn box_smooth(m: &DistanceField) -> DistanceField {
    let (w, h) = (m.w, m.h);
    let mut data = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut sum = 0.0;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let nx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
                    let ny = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
                    sum += m.at(nx, ny);
                }
            }
            data[y * w + x] = sum / 9.0;
        }
    }
    DistanceField { w, h, cell: m.cell, data }
}

pub fn classify_cues(b: &BinaryMap, dist: &DistanceField, cfg: &CueConfig) -> CueSet {
    let hess = if cfg.hessian_smooth_passes > 0 {
        let mut smoothed = dist.clone();
        for _ in 0..cfg.hessian_smooth_passes {
            smoothed = box_smooth(&smoothed);
        }
        hessian(&smoothed)
    } else {
        hessian(dist)
    };
    let (w, h) = (b.w, b.h);
    let mut saddle_cells: Vec<(usize, usize)> = Vec::new();
    let mut max_cells: Vec<(usize, usize, f64)> = Vec::new();

    for y in 0..h {
        for x in 0..w {
            if b.at(x, y) != 0 {
                continue;
            }
            let i = y * w + x;
            let det = hess.fxx[i] * hess.fyy[i] - hess.fxy[i] * hess.fxy[i];
            if det < cfg.det_thresh {
                let mean = 0.5 * (hess.fxx[i] + hess.fyy[i]);
                let spread = (0.25 * (hess.fxx[i] - hess.fyy[i]).powi(2)
                    + hess.fxy[i] * hess.fxy[i])
                    .sqrt();
                let min_eig = mean - spread;
                if min_eig < cfg.saddle_min_eig
                    && passage_signature(b, dist, cell_center(b.cell, x, y), cfg)
                {
                    saddle_cells.push((x, y));
                }
                continue;
            }
            if det > 0.0 && hess.fxx[i] < cfg.fxx_thresh && dist.at(x, y) > 0.0 {
                // strict NMS with row-major plateau tie-break
                if is_nms_peak(dist, x, y) {
                    max_cells.push((x, y, dist.at(x, y)));
                }
            }
        }
    }

    let saddles = cluster_saddles(b, dist, &saddle_cells, cfg.cluster_eps);
    let maxima = suppress_close_maxima(dist, max_cells);

    CueSet { saddles, maxima }
}

/// Rotation-invariant passage test: occupied cells must cross a ring around
/// `p` in exactly two separate arcs (the jambs), and the wall distance must
/// rise from `p` to the midpoint of both free arcs (rooms or corridors
/// opening up on both sides of the pinch). Out-of-map samples count as free.
pub fn passage_signature(b: &BinaryMap, dist: &DistanceField, p: Vec2, cfg: &CueConfig) -> bool {
    const SAMPLES: usize = 48;
    let radius = cfg.flank_ring_radius;
    let mut occ = [false; SAMPLES];
    for (k, o) in occ.iter_mut().enumerate() {
        let a = 2.0 * std::f64::consts::PI * k as f64 / SAMPLES as f64;
        let q = Vec2::new(p.x + radius * a.cos(), p.y + radius * a.sin());
        if q.x < 0.0 || q.y < 0.0 {
            continue;
        }
        let x = (q.x / b.cell) as usize;
        let y = (q.y / b.cell) as usize;
        if x < b.w && y < b.h {
            *o = b.at(x, y) == 1;
        }
    }
    let mut starts = Vec::new();
    for k in 0..SAMPLES {
        if occ[k] && !occ[(k + SAMPLES - 1) % SAMPLES] {
            starts.push(k);
        }
    }
    if starts.len() != 2 {
        return false;
    }
    // free arcs lie between the occupied runs; probe their midpoints
    let here = match dist.at_point(p) {
        Some(v) => v,
        None => return false,
    };
    let mut free_mids = Vec::new();
    for i in 0..2 {
        let run_start = starts[i];
        // end of this occupied run
        let mut k = run_start;
        while occ[(k + 1) % SAMPLES] {
            k = (k + 1) % SAMPLES;
        }
        let free_start = (k + 1) % SAMPLES;
        let next_run = starts[(i + 1) % 2];
        let free_len = (next_run + SAMPLES - free_start) % SAMPLES;
        let mid = (free_start + free_len / 2) % SAMPLES;
        free_mids.push(mid);
    }
    for mid in free_mids {
        let a = 2.0 * std::f64::consts::PI * mid as f64 / SAMPLES as f64;
        let q = Vec2::new(p.x + radius * a.cos(), p.y + radius * a.sin());
        match dist.at_point(q) {
            Some(v) if v >= here + cfg.flank_min_rise => {}
            _ => return false,
        }
    }
    true
}

fn is_nms_peak(dist: &DistanceField, x: usize, y: usize) -> bool {
    let v = dist.at(x, y);
    let here = y * dist.w + x;
    for dy in -1i64..=1 {
        for dx in -1i64..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx < 0 || ny < 0 || nx >= dist.w as i64 || ny >= dist.h as i64 {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            let nv = dist.at(nx, ny);
            if nv > v || (nv == v && ny * dist.w + nx < here) {
                return false;
            }
        }
    }
    true
}

fn cell_center(cell: f64, x: usize, y: usize) -> Vec2 {
    Vec2::new((x as f64 + 0.5) * cell, (y as f64 + 0.5) * cell)
}

/// Single-linkage clustering of saddle cells with link radius `eps`;
/// each cluster is reported as its centroid snapped to the nearest free cell.
fn cluster_saddles(
    b: &BinaryMap,
    dist: &DistanceField,
    cells: &[(usize, usize)],
    eps: f64,
) -> Vec<Point3> {
    let n = cells.len();
    if n == 0 {
        return Vec::new();
    }
    let pts: Vec<Vec2> = cells.iter().map(|&(x, y)| cell_center(b.cell, x, y)).collect();
    // union-find
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = i;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if pts[i].dist(pts[j]) <= eps {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj.max(ri)] = rj.min(ri);
                }
            }
        }
    }
    let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        clusters.entry(r).or_default().push(i);
    }
    let mut out = Vec::new();
    for (_, members) in clusters {
        let mut c = Vec2::new(0.0, 0.0);
        for &i in &members {
            c = c + pts[i];
        }
        let c = c * (1.0 / members.len() as f64);
        let snapped = snap_to_free(b, dist, c);
        out.push(Point3::new(snapped.x, snapped.y, CUE_Z));
    }
    out
}

/// Nearest free cell center to a point, searched in expanding rings.
fn snap_to_free(b: &BinaryMap, _dist: &DistanceField, p: Vec2) -> Vec2 {
    let cx = ((p.x / b.cell) as i64).clamp(0, b.w as i64 - 1);
    let cy = ((p.y / b.cell) as i64).clamp(0, b.h as i64 - 1);
    if b.at(cx as usize, cy as usize) == 0 {
        return cell_center(b.cell, cx as usize, cy as usize);
    }
    for ring in 1..(b.w.max(b.h) as i64) {
        let mut best: Option<(f64, usize, usize)> = None;
        for dy in -ring..=ring {
            for dx in -ring..=ring {
                if dx.abs() != ring && dy.abs() != ring {
                    continue;
                }
                let (nx, ny) = (cx + dx, cy + dy);
                if nx < 0 || ny < 0 || nx >= b.w as i64 || ny >= b.h as i64 {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                if b.at(nx, ny) == 0 {
                    let d = cell_center(b.cell, nx, ny).dist(p);
                    if best.map_or(true, |(bd, _, _)| d < bd) {
                        best = Some((d, nx, ny));
                    }
                }
            }
        }
        if let Some((_, nx, ny)) = best {
            return cell_center(b.cell, nx, ny);
        }
    }
    p
}

/// Drops maxima within one cell (Chebyshev) of a stronger maximum.
fn suppress_close_maxima(dist: &DistanceField, mut cells: Vec<(usize, usize, f64)>) -> Vec<(Point3, f64)> {
    cells.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap()
            .then((a.1 * dist.w + a.0).cmp(&(b.1 * dist.w + b.0)))
    });
    let mut kept: Vec<(usize, usize, f64)> = Vec::new();
    'outer: for (x, y, d) in cells {
        for &(kx, ky, _) in &kept {
            let cheb = (x as i64 - kx as i64).abs().max((y as i64 - ky as i64).abs());
            if cheb <= 1 {
                continue 'outer;
            }
        }
        kept.push((x, y, d));
    }
    kept.sort_by_key(|&(x, y, _)| y * dist.w + x);
    kept.iter()
        .map(|&(x, y, d)| {
            let c = cell_center(dist.cell, x, y);
            (Point3::new(c.x, c.y, CUE_Z), d)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDims;
    use crate::perception::KnownMap;

    fn map_from_ascii(rows: &[&str]) -> BinaryMap {
        let h = rows.len();
        let w = rows[0].len();
        let mut b = BinaryMap::new(w, h, 0.2);
        for (y, row) in rows.iter().enumerate() {
            for (x, ch) in row.chars().enumerate() {
                if ch == '#' {
                    b.set(x, y, 1);
                }
            }
        }
        b
    }

    fn brute_force_edt(b: &BinaryMap) -> DistanceField {
        let occ: Vec<(usize, usize)> = (0..b.h)
            .flat_map(|y| (0..b.w).filter_map(move |x| Some((x, y))))
            .filter(|&(x, y)| b.at(x, y) == 1)
            .collect();
        let diag = b.cell * ((b.w * b.w + b.h * b.h) as f64).sqrt();
        let mut data = vec![0.0; b.w * b.h];
        for y in 0..b.h {
            for x in 0..b.w {
                let mut best = f64::INFINITY;
                for &(ox, oy) in &occ {
                    let dx = x as f64 - ox as f64;
                    let dy = y as f64 - oy as f64;
                    let d = (dx * dx + dy * dy).sqrt() * b.cell;
                    if d < best {
                        best = d;
                    }
                }
                data[y * b.w + x] = if occ.is_empty() { diag } else { best };
            }
        }
        DistanceField { w: b.w, h: b.h, cell: b.cell, data }
    }

    #[test]
    fn flatten_band_semantics() {
        let dims = GridDims { nx: 4, ny: 4, nz: 15, cell: 0.2 };
        let mut m = KnownMap::new(dims);
        // wall at (1,1) spanning z in [0, 2.5] -> voxels 0..12 (centers .1 .. 2.5)
        for iz in 0..13 {
            m.set_state(1, 1, iz, CellState::Occupied);
        }
        // obstacle at (2,2) only z in [2.0, 2.4] -> voxels 10, 11 (centers 2.1, 2.3)
        m.set_state(2, 2, 10, CellState::Occupied);
        m.set_state(2, 2, 11, CellState::Occupied);
        let b = flatten(&m, 0.0, 1.8);
        assert_eq!(b.at(1, 1), 1);
        assert_eq!(b.at(2, 2), 0);
        assert_eq!(b.at(0, 0), 0);
    }

    #[test]
    fn flatten_all_unknown_is_zero() {
        let dims = GridDims { nx: 5, ny: 5, nz: 5, cell: 0.2 };
        let m = KnownMap::new(dims);
        let b = flatten(&m, 0.0, 1.8);
        assert!(b.data.iter().all(|&v| v == 0));
    }

    #[test]
    #[should_panic]
    fn flatten_invalid_band_panics() {
        let dims = GridDims { nx: 4, ny: 4, nz: 4, cell: 0.2 };
        let m = KnownMap::new(dims);
        let _ = flatten(&m, 1.8, 0.0);
    }

    #[test]
    fn median_removes_isolated_cell() {
        let b = map_from_ascii(&["....", ".#..", "....", "...."]);
        let f = median_filter(&b);
        assert!(f.data.iter().all(|&v| v == 0));
    }

    #[test]
    fn median_keeps_solid_wall() {
        let b = map_from_ascii(&["....", "####", "####", "####", "...."]);
        let f = median_filter(&b);
        assert_eq!(f, b);
    }

    #[test]
    fn median_fills_single_gap_in_wall_line() {
        // a 1-cell gap in a horizontal wall line: the [1,3] pass sees {1,0,1}
        let b = map_from_ascii(&["......", "##.###", "......"]);
        let f = median_pass(&b, true);
        assert_eq!(f.at(2, 1), 1);
    }

    #[test]
    fn median_erases_one_cell_thin_lines() {
        // the sequential passes remove 1-cell-thick structures entirely;
        // dilation before filtering preserves them
        let b = map_from_ascii(&["......", "######", "......"]);
        let f = median_filter(&b);
        assert!(f.data.iter().all(|&v| v == 0));
        let fd = median_filter(&dilate8(&b));
        assert!(fd.data.iter().any(|&v| v == 1));
    }

    #[test]
    fn dilate8_grows_one_ring() {
        let b = map_from_ascii(&[".....", ".....", "..#..", ".....", "....."]);
        let d = dilate8(&b);
        let count = d.data.iter().filter(|&&v| v == 1).count();
        assert_eq!(count, 9);
    }

    #[test]
    fn edt_single_occupied_cell_formula() {
        let mut b = BinaryMap::new(9, 9, 0.2);
        b.set(4, 4, 1);
        let d = distance_transform(&b);
        for y in 0..9 {
            for x in 0..9 {
                let di = x as f64 - 4.0;
                let dj = y as f64 - 4.0;
                let expect = 0.2 * (di * di + dj * dj).sqrt();
                assert!((d.at(x, y) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn edt_corridor_centerline() {
        // two walls with 10 free rows between them: centerline rows sit 5
        // cells = 1.0 m from the nearest wall cell centers
        let mut rows = vec!["############"; 1];
        let free = vec!["............"; 10];
        rows.extend(free.iter());
        rows.push("############");
        let b = map_from_ascii(&rows);
        let d = distance_transform(&b);
        let center = d.at(6, 5);
        assert!((center - 1.0).abs() <= 0.1 + 1e-12, "center {center}");
    }

    #[test]
    fn edt_matches_brute_force_on_random_maps() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let w = rng.gen_range(4..40);
            let h = rng.gen_range(4..40);
            let mut b = BinaryMap::new(w, h, 0.2);
            let fill = rng.gen_range(0..(w * h / 3).max(1));
            for _ in 0..fill {
                let x = rng.gen_range(0..w);
                let y = rng.gen_range(0..h);
                b.set(x, y, 1);
            }
            let fast = distance_transform(&b);
            let slow = brute_force_edt(&b);
            for i in 0..w * h {
                assert!(
                    (fast.data[i] - slow.data[i]).abs() <= 1e-9 * slow.data[i].max(1.0),
                    "mismatch at {i}: {} vs {}",
                    fast.data[i],
                    slow.data[i]
                );
            }
        }
    }

    #[test]
    fn edt_empty_map_sentinel() {
        let b = BinaryMap::new(10, 20, 0.2);
        let d = distance_transform(&b);
        let diag = 0.2 * ((10.0f64 * 10.0 + 20.0 * 20.0) as f64).sqrt();
        assert!(d.data.iter().all(|&v| (v - diag).abs() < 1e-12));
    }

    #[test]
    fn edt_lipschitz_on_random_map() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut b = BinaryMap::new(30, 30, 0.2);
        for _ in 0..60 {
            b.set(rng.gen_range(0..30), rng.gen_range(0..30), 1);
        }
        let d = distance_transform(&b);
        let bound = 0.2 * 2.0f64.sqrt();
        for y in 0..30 {
            for x in 0..30 {
                if x + 1 < 30 {
                    assert!((d.at(x, y) - d.at(x + 1, y)).abs() <= bound + 1e-12);
                }
                if y + 1 < 30 {
                    assert!((d.at(x, y) - d.at(x, y + 1)).abs() <= bound + 1e-12);
                }
            }
        }
    }

    fn field_from_fn(w: usize, h: usize, cell: f64, f: impl Fn(f64, f64) -> f64) -> DistanceField {
        let mut data = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                data[y * w + x] = f((x as f64 + 0.5) * cell, (y as f64 + 0.5) * cell);
            }
        }
        DistanceField { w, h, cell, data }
    }

    #[test]
    fn hessian_zero_on_linear_ramp() {
        let m = field_from_fn(12, 10, 0.2, |x, y| 3.0 * x - 2.0 * y + 1.0);
        let hs = hessian(&m);
        for i in 0..12 * 10 {
            assert!(hs.fxx[i].abs() < 1e-9, "fxx {}", hs.fxx[i]);
            assert!(hs.fyy[i].abs() < 1e-9);
            assert!(hs.fxy[i].abs() < 1e-9);
        }
    }

    #[test]
    fn hessian_exact_on_quadratic() {
        // central differences are exact on degree-2 polynomials, including
        // the shifted border stencils
        let m = field_from_fn(10, 10, 0.2, |x, y| -(x * x + y * y));
        let hs = hessian(&m);
        for i in 0..100 {
            assert!((hs.fxx[i] + 2.0).abs() < 1e-9, "fxx {}", hs.fxx[i]);
            assert!((hs.fyy[i] + 2.0).abs() < 1e-9);
            assert!(hs.fxy[i].abs() < 1e-9);
        }
    }

    #[test]
    fn hessian_matches_analytic_cone_interior() {
        // M = distance to a point: compare to analytic second derivatives of
        // sqrt(x^2+y^2) away from the apex
        let cell = 0.2;
        let m = field_from_fn(40, 40, cell, |x, y| {
            let (dx, dy) = (x - 0.1, y - 0.1);
            (dx * dx + dy * dy).sqrt()
        });
        let hs = hessian(&m);
        for y in 20..36 {
            for x in 20..36 {
                let (px, py) = ((x as f64 + 0.5) * cell - 0.1, (y as f64 + 0.5) * cell - 0.1);
                let r = (px * px + py * py).sqrt();
                let fxx_true = py * py / (r * r * r);
                let fyy_true = px * px / (r * r * r);
                let fxy_true = -px * py / (r * r * r);
                let i = y * 40 + x;
                // O(h) agreement
                assert!((hs.fxx[i] - fxx_true).abs() < 0.05, "{} vs {}", hs.fxx[i], fxx_true);
                assert!((hs.fyy[i] - fyy_true).abs() < 0.05);
                assert!((hs.fxy[i] - fxy_true).abs() < 0.05);
            }
        }
    }

    /// Brute-force saddle oracle: free cell that is a strict max along one
    /// principal axis and a strict min along the perpendicular one.
    fn oracle_saddles(b: &BinaryMap, d: &DistanceField) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 1..b.h - 1 {
            for x in 1..b.w - 1 {
                if b.at(x, y) != 0 {
                    continue;
                }
                let v = d.at(x, y);
                let max_x = d.at(x - 1, y) < v && d.at(x + 1, y) < v;
                let min_x = d.at(x - 1, y) > v && d.at(x + 1, y) > v;
                let max_y = d.at(x, y - 1) < v && d.at(x, y + 1) < v;
                let min_y = d.at(x, y - 1) > v && d.at(x, y + 1) > v;
                if (max_x && min_y) || (min_x && max_y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    fn two_rooms_map() -> BinaryMap {
        // two 4m x 4m rooms (20x20 cells) side by side, 1m door (5 cells) in
        // the shared wall
        let w = 43;
        let h = 22;
        let mut b = BinaryMap::new(w, h, 0.2);
        for x in 0..w {
            b.set(x, 0, 1);
            b.set(x, h - 1, 1);
        }
        for y in 0..h {
            b.set(0, y, 1);
            b.set(w - 1, y, 1);
        }
        // shared wall at x = 21, door rows 8..=12 free
        for y in 0..h {
            if !(8..=12).contains(&y) {
                b.set(21, y, 1);
            }
        }
        b
    }

    #[test]
    fn two_rooms_one_saddle_cluster_and_room_maxima() {
        let b = two_rooms_map();
        let d = distance_transform(&b);
        let cues = classify_cues(&b, &d, &CueConfig::default());

        // oracle agrees a saddle exists at the door
        let oracle = oracle_saddles(&b, &d);
        assert!(
            oracle.iter().any(|&(x, y)| x == 21 && y == 10),
            "oracle saddles: {oracle:?}"
        );

        // exactly one saddle cluster within one cell of the door center
        let door = Vec2::new((21.0 + 0.5) * 0.2, (10.0 + 0.5) * 0.2);
        let near: Vec<&Point3> = cues
            .saddles
            .iter()
            .filter(|p| p.xy().dist(door) <= 0.2 * 1.5)
            .collect();
        assert_eq!(near.len(), 1, "saddles: {:?}", cues.saddles);
        assert_eq!(cues.saddles.len(), 1, "saddles: {:?}", cues.saddles);

        // at least one maximum near each room center with delta close to 2.0
        let c1 = Vec2::new((10.0 + 0.5) * 0.2, (10.0 + 0.5) * 0.2);
        let c2 = Vec2::new((32.0 + 0.5) * 0.2, (10.0 + 0.5) * 0.2);
        for c in [c1, c2] {
            let found = cues
                .maxima
                .iter()
                .find(|(p, _)| p.xy().dist(c) <= 0.5)
                .unwrap_or_else(|| panic!("no maximum near {c:?}: {:?}", cues.maxima));
            assert!((found.1 - 2.0).abs() <= 0.21, "delta {}", found.1);
        }
    }

    #[test]
    fn convex_room_has_no_saddles_one_maximum() {
        let mut b = BinaryMap::new(22, 22, 0.2);
        for x in 0..22 {
            b.set(x, 0, 1);
            b.set(x, 21, 1);
        }
        for y in 0..22 {
            b.set(0, y, 1);
            b.set(21, y, 1);
        }
        let d = distance_transform(&b);
        let cues = classify_cues(&b, &d, &CueConfig::default());
        assert!(cues.saddles.is_empty(), "saddles: {:?}", cues.saddles);
        assert_eq!(cues.maxima.len(), 1, "maxima: {:?}", cues.maxima);
        let (p, delta) = cues.maxima[0];
        let center = Vec2::new(2.2, 2.2);
        assert!(p.xy().dist(center) <= 0.3, "maximum at {p:?}");
        assert!((delta - 2.0).abs() <= 0.21);
    }

    #[test]
    fn cue_residency_and_delta_fidelity() {
        let b = two_rooms_map();
        let d = distance_transform(&b);
        let cues = classify_cues(&b, &d, &CueConfig::default());
        for p in &cues.saddles {
            let x = (p.x / 0.2) as usize;
            let y = (p.y / 0.2) as usize;
            assert_eq!(b.at(x, y), 0, "saddle on occupied cell");
        }
        for (p, delta) in &cues.maxima {
            let x = (p.x / 0.2) as usize;
            let y = (p.y / 0.2) as usize;
            assert_eq!(b.at(x, y), 0);
            assert_eq!(*delta, d.at(x, y), "delta must equal field value");
            assert!(*delta > 0.0);
        }
    }

    #[test]
    fn constant_offset_leaves_positions_unchanged() {
        let b = two_rooms_map();
        let d = distance_transform(&b);
        let cues = classify_cues(&b, &d, &CueConfig::default());
        let mut shifted = d.clone();
        for v in shifted.data.iter_mut() {
            *v += 3.7;
        }
        let cues2 = classify_cues(&b, &shifted, &CueConfig::default());
        assert_eq!(cues.saddles.len(), cues2.saddles.len());
        for (a, c) in cues.saddles.iter().zip(&cues2.saddles) {
            assert_eq!(a, c);
        }
        assert_eq!(cues.maxima.len(), cues2.maxima.len());
        for ((p1, d1), (p2, d2)) in cues.maxima.iter().zip(&cues2.maxima) {
            assert_eq!(p1, p2);
            assert!((d2 - d1 - 3.7).abs() < 1e-12);
        }
    }

    #[test]
    fn cues_lifted_to_z_one() {
        let b = two_rooms_map();
        let d = distance_transform(&b);
        let cues = classify_cues(&b, &d, &CueConfig::default());
        assert!(cues.saddles.iter().all(|p| p.z == 1.0));
        assert!(cues.maxima.iter().all(|(p, _)| p.z == 1.0));
    }
}
