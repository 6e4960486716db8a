//! Bundled synthetic floorplans: a corridor flanked by rooms, in eight
//! configurations (room counts, larger rooms, furnished rooms, rotated
//! walls). Each fixture carries ground-truth door centers for detection
//! scoring.
//!
//! All geometry is authored on the 0.2 m cell grid: wall centerlines sit on
//! cell centers and wall segments end on cell edges, so rasterization is
//! exact and door gaps are exactly five cells (1.0 m) wide.

use crate::geom::Vec2;
use crate::worldmodel::{Obstacle, Room, Scenario, Wall};

const CELL: f64 = 0.2;
const WALL_T: f64 = 0.2;

/// A scenario plus its labeled door centers.
#[derive(Debug, Clone)]
pub struct BundledScenario {
    pub scenario: Scenario,
    pub doors: Vec<Vec2>,
}

struct EnvSpec {
    name: &'static str,
    /// interior room width in cells (upper row)
    room_w: usize,
    /// interior room depth in cells
    room_d: usize,
    /// corridor width in cells
    corridor: usize,
    upper: usize,
    lower: usize,
    /// door center offsets (cells from room start), cycled per room; the two
    /// rows are staggered so that no two doors face each other closely
    /// (nearby door pairs merge into one saddle cluster)
    door_offsets_upper: &'static [usize],
    door_offsets_lower: &'static [usize],
    /// door gap width in cells
    door_cells: usize,
    /// one box obstacle per room
    furnished: bool,
    height: f64,
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn center(c: usize) -> f64 {
    round2((c as f64 + 0.5) * CELL)
}

fn edge(c: usize) -> f64 {
    round2(c as f64 * CELL)
}

/// Room column spans for a row of `count` rooms across `nx` columns
/// (1-cell perimeter and 1-cell dividers).
fn room_spans(nx: usize, count: usize) -> Vec<(usize, usize)> {
    let interior = nx - 1 - count; // total room cells
    let base = interior / count;
    let rem = interior % count;
    let mut spans = Vec::new();
    let mut x = 1usize;
    for k in 0..count {
        let w = base + usize::from(k < rem);
        spans.push((x, x + w - 1));
        x += w + 1;
    }
    spans
}

fn build_env(spec: &EnvSpec) -> BundledScenario {
    let nx = 1 + spec.upper * (spec.room_w + 1);
    let ny = 2 * spec.room_d + spec.corridor + 4;
    let x_max = round2(nx as f64 * CELL);
    let y_max = round2(ny as f64 * CELL);

    let lower_wall_row = spec.room_d + 1;
    let upper_wall_row = spec.room_d + spec.corridor + 2;
    let upper_room_row0 = upper_wall_row + 1;

    let mut walls = Vec::new();
    // perimeter
    walls.push(Wall { start: [0.0, center(0)], end: [x_max, center(0)], thickness: WALL_T, height: None });
    walls.push(Wall { start: [0.0, center(ny - 1)], end: [x_max, center(ny - 1)], thickness: WALL_T, height: None });
    walls.push(Wall { start: [center(0), 0.0], end: [center(0), y_max], thickness: WALL_T, height: None });
    walls.push(Wall { start: [center(nx - 1), 0.0], end: [center(nx - 1), y_max], thickness: WALL_T, height: None });

    let upper_spans = room_spans(nx, spec.upper);
    let lower_spans = room_spans(nx, spec.lower);

    // room dividers (vertical), spanning a room band plus its two wall rows
    for w in upper_spans.windows(2) {
        let divider_col = w[0].1 + 1;
        walls.push(Wall {
            start: [center(divider_col), edge(upper_wall_row)],
            end: [center(divider_col), y_max],
            thickness: WALL_T,
            height: None,
        });
    }
    for w in lower_spans.windows(2) {
        let divider_col = w[0].1 + 1;
        walls.push(Wall {
            start: [center(divider_col), 0.0],
            end: [center(divider_col), edge(lower_wall_row + 1)],
            thickness: WALL_T,
            height: None,
        });
    }

    // corridor walls with door gaps
    let door_cols_for = |spans: &[(usize, usize)], offsets: &[usize]| -> Vec<usize> {
        spans
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                let w = b - a + 1;
                let off = offsets[k % offsets.len()].min(w - 3).max(2);
                a + off
            })
            .collect()
    };
    let upper_doors = door_cols_for(&upper_spans, spec.door_offsets_upper);
    let lower_doors = door_cols_for(&lower_spans, spec.door_offsets_lower);
    let mut doors: Vec<Vec2> = Vec::new();
    for (row, cols) in [(upper_wall_row, &upper_doors), (lower_wall_row, &lower_doors)] {
        let yc = center(row);
        let mut x = 0.0f64;
        for &dc in cols.iter() {
            let gap_start = dc - spec.door_cells / 2;
            walls.push(Wall { start: [x, yc], end: [edge(gap_start), yc], thickness: WALL_T, height: None });
            x = edge(gap_start + spec.door_cells);
            doors.push(Vec2::new(
                round2(edge(gap_start) + spec.door_cells as f64 * 0.1),
                yc,
            ));
        }
        walls.push(Wall { start: [x, yc], end: [x_max, yc], thickness: WALL_T, height: None });
    }

    // rooms: upper ids first, then lower
    let mut rooms = Vec::new();
    let mut id = 1u16;
    for &(a, b) in &upper_spans {
        rooms.push(Room {
            id,
            polygon: vec![
                [edge(a), edge(upper_room_row0)],
                [edge(b + 1), edge(upper_room_row0)],
                [edge(b + 1), edge(ny - 1)],
                [edge(a), edge(ny - 1)],
            ],
        });
        id += 1;
    }
    for &(a, b) in &lower_spans {
        rooms.push(Room {
            id,
            polygon: vec![
                [edge(a), edge(1)],
                [edge(b + 1), edge(1)],
                [edge(b + 1), edge(lower_wall_row)],
                [edge(a), edge(lower_wall_row)],
            ],
        });
        id += 1;
    }

    let mut obstacles = Vec::new();
    if spec.furnished {
        // one box per room, flush against the room's outer wall
        for &(a, _) in &upper_spans {
            obstacles.push(Obstacle {
                min: [edge(a + 2), round2(edge(ny - 1) - 0.6), 0.0],
                size: [0.6, 0.6, spec.height],
            });
        }
        for &(a, _) in &lower_spans {
            obstacles.push(Obstacle {
                min: [edge(a + 2), edge(1), 0.0],
                size: [0.6, 0.6, spec.height],
            });
        }
    }

    let mid_row = spec.room_d + 2 + spec.corridor / 2;
    let ymid = center(mid_row);
    let spawns = vec![
        [0.7, ymid, 1.0, 0.0],
        [1.9, ymid, 1.0, 0.0],
        [3.1, ymid, 1.0, 0.0],
    ];

    let scenario = Scenario {
        name: spec.name.to_string(),
        cell_size: CELL,
        extents: [x_max, y_max, spec.height],
        walls,
        obstacles,
        rooms,
        spawns,
        duration: 120.0,
    };
    BundledScenario { scenario, doors }
}

/// Rotates a fixture by `angle` about its center, re-anchoring into a padded
/// positive bounding box with all coordinates rounded to two decimals.
fn rotate_env(base: &BundledScenario, angle: f64, name: &str) -> BundledScenario {
    let s = &base.scenario;
    let c = Vec2::new(s.extents[0] * 0.5, s.extents[1] * 0.5);
    let (sin, cos) = angle.sin_cos();
    let rot = |p: Vec2| -> Vec2 {
        let d = p - c;
        Vec2::new(c.x + d.x * cos - d.y * sin, c.y + d.x * sin + d.y * cos)
    };
    let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut track = |p: Vec2| {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
        p
    };
    let rotated_walls: Vec<(Vec2, Vec2, f64)> = s
        .walls
        .iter()
        .map(|w| {
            (
                track(rot(Vec2::new(w.start[0], w.start[1]))),
                track(rot(Vec2::new(w.end[0], w.end[1]))),
                w.thickness,
            )
        })
        .collect();
    let margin = 0.6;
    let off = Vec2::new(margin - min.x, margin - min.y);
    let place = |p: Vec2| [round2(p.x + off.x), round2(p.y + off.y)];
    let walls = rotated_walls
        .iter()
        .map(|&(a, b, t)| Wall { start: place(a), end: place(b), thickness: t, height: None })
        .collect();
    let rooms = s
        .rooms
        .iter()
        .map(|r| Room {
            id: r.id,
            polygon: r.polygon.iter().map(|&[x, y]| place(rot(Vec2::new(x, y)))).collect(),
        })
        .collect();
    let spawns = s
        .spawns
        .iter()
        .map(|&[x, y, z, yaw]| {
            let p = place(rot(Vec2::new(x, y)));
            [p[0], p[1], z, round2(yaw + angle)]
        })
        .collect();
    let doors = base
        .doors
        .iter()
        .map(|&d| {
            let p = place(rot(d));
            Vec2::new(p[0], p[1])
        })
        .collect();
    let extents = [
        round2(max.x - min.x + 2.0 * margin),
        round2(max.y - min.y + 2.0 * margin),
        s.extents[2],
    ];
    BundledScenario {
        scenario: Scenario {
            name: name.to_string(),
            cell_size: s.cell_size,
            extents,
            walls,
            obstacles: s.obstacles.clone(),
            rooms,
            spawns,
            duration: s.duration,
        },
        doors,
    }
}

pub fn env1() -> BundledScenario {
    build_env(&EnvSpec {
        name: "env1",
        room_w: 25,
        room_d: 25,
        corridor: 12,
        upper: 3,
        lower: 3,
        door_offsets_upper: &[2, 6, 9],
        door_offsets_lower: &[19, 20, 22],
        door_cells: 5,
        furnished: false,
        height: 1.2,
    })
}

/// Compact 6-room variant whose in-room voxel count lands on the reference
/// scale of the original environments (about 9.2k voxels at 0.2 m cells).
pub fn env1_compact() -> BundledScenario {
    build_env(&EnvSpec {
        name: "env1_compact",
        room_w: 16,
        room_d: 16,
        corridor: 10,
        upper: 3,
        lower: 3,
        door_offsets_upper: &[11, 12, 13],
        door_offsets_lower: &[2, 3, 4],
        door_cells: 5,
        furnished: false,
        height: 1.2,
    })
}

pub fn env2() -> BundledScenario {
    build_env(&EnvSpec {
        name: "env2",
        room_w: 16,
        room_d: 16,
        corridor: 15,
        upper: 4,
        lower: 4,
        door_offsets_upper: &[2, 3, 3, 2],
        door_offsets_lower: &[11, 11, 11, 11],
        door_cells: 5,
        furnished: false,
        height: 1.2,
    })
}

pub fn env3() -> BundledScenario {
    build_env(&EnvSpec {
        name: "env3",
        room_w: 16,
        room_d: 16,
        corridor: 12,
        upper: 3,
        lower: 2,
        door_offsets_upper: &[13, 8, 13],
        door_offsets_lower: &[2, 10],
        door_cells: 5,
        furnished: false,
        height: 1.2,
    })
}

pub fn env4() -> BundledScenario {
    build_env(&EnvSpec {
        name: "env4",
        room_w: 16,
        room_d: 16,
        corridor: 12,
        upper: 5,
        lower: 4,
        door_offsets_upper: &[2, 3, 9, 10, 3],
        door_offsets_lower: &[11, 9, 9, 16],
        door_cells: 5,
        furnished: false,
        height: 1.2,
    })
}

pub fn env5() -> BundledScenario {
    build_env(&EnvSpec {
        name: "env5",
        room_w: 16,
        room_d: 16,
        corridor: 15,
        upper: 6,
        lower: 6,
        door_offsets_upper: &[5, 4, 3, 5, 4, 5],
        door_offsets_lower: &[13, 12, 13, 13, 13, 13],
        door_cells: 5,
        furnished: false,
        height: 1.2,
    })
}

pub fn env6() -> BundledScenario {
    build_env(&EnvSpec {
        name: "env6",
        room_w: 30,
        room_d: 30,
        corridor: 12,
        upper: 5,
        lower: 4,
        door_offsets_upper: &[19, 5, 14, 2, 3],
        door_offsets_lower: &[3, 18, 33, 29],
        door_cells: 5,
        furnished: false,
        height: 1.2,
    })
}

pub fn env7() -> BundledScenario {
    build_env(&EnvSpec {
        name: "env7",
        room_w: 18,
        room_d: 18,
        corridor: 12,
        upper: 3,
        lower: 3,
        door_offsets_upper: &[2, 13, 15],
        door_offsets_lower: &[12, 3, 5],
        door_cells: 5,
        furnished: true,
        height: 1.2,
    })
}

pub fn env8() -> BundledScenario {
    rotate_env(&env1(), 30.0f64.to_radians(), "env8")
}

/// All bundled fixtures in order.
pub fn all() -> Vec<BundledScenario> {
    vec![env1(), env2(), env3(), env4(), env5(), env6(), env7(), env8()]
}

/// Fixtures used by the door-detection evaluation (the furnished fixture is
/// excluded: furniture gaps are legitimate passages, not labeled doors).
pub fn detection_suite() -> Vec<BundledScenario> {
    vec![env1(), env2(), env3(), env4(), env5(), env8()]
}
