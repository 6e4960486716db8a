use mrmr::cues::{dilate8, distance_transform, flatten, median_filter, CueConfig};
use mrmr::perception::KnownMap;
use mrmr::pgm;
use mrmr::scenarios;
use mrmr::worldmodel::rasterize;

fn main() {
    let b = scenarios::env8();
    let world = rasterize(&b.scenario);
    let map = KnownMap::fully_known(&world);
    let cfg = CueConfig::default();
    let raw = flatten(&map, cfg.z_low, cfg.z_high);
    let bin = median_filter(&dilate8(&raw));
    let dist = distance_transform(&bin);
    pgm::write_binary_map(std::path::Path::new("/tmp/env8_raw.pgm"), &raw).unwrap();
    pgm::write_binary_map(std::path::Path::new("/tmp/env8_bin.pgm"), &bin).unwrap();
    pgm::write_distance_field(std::path::Path::new("/tmp/env8_dist.pgm"), &dist).unwrap();
    println!("w {} h {}", bin.w, bin.h);
    // ascii render around (8.3, 4.5)
    let cx = (8.3f64 / 0.2) as usize;
    let cy = (4.5f64 / 0.2) as usize;
    for y in (cy.saturating_sub(14)..cy + 14).rev() {
        let mut line = String::new();
        for x in cx.saturating_sub(30)..cx + 30 {
            line.push(if bin.at(x, y) == 1 { '#' } else { '.' });
        }
        println!("{line}");
    }
}
