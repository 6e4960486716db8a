use mrmr::cues::{classify_cues, dilate8, distance_transform, flatten, hessian, median_filter, CueConfig};
use mrmr::perception::KnownMap;
use mrmr::scenarios;
use mrmr::worldmodel::rasterize;

fn main() {
    let b = scenarios::env1();
    let world = rasterize(&b.scenario);
    let map = KnownMap::fully_known(&world);
    let cfg = CueConfig::default();
    let raw = flatten(&map, cfg.z_low, cfg.z_high);
    let bin = median_filter(&dilate8(&raw));
    let dist = distance_transform(&bin);
    let hess = hessian(&dist);
    let cues = classify_cues(&bin, &dist, &cfg);
    println!("doors: {:?}", b.doors);
    println!("saddles: {:?}", cues.saddles.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>());
    // probe a 7x7 neighborhood of the first door
    let d = b.doors[0];
    let cx = (d.x / 0.2) as usize;
    let cy = (d.y / 0.2) as usize;
    println!("door at ({}, {}) cell ({cx},{cy})", d.x, d.y);
    for y in cy.saturating_sub(3)..=cy + 3 {
        for x in cx.saturating_sub(3)..=cx + 3 {
            let i = y * bin.w + x;
            let det = hess.fxx[i] * hess.fyy[i] - hess.fxy[i] * hess.fxy[i];
            let mean = 0.5 * (hess.fxx[i] + hess.fyy[i]);
            let spread = (0.25 * (hess.fxx[i] - hess.fyy[i]).powi(2) + hess.fxy[i].powi(2)).sqrt();
            let eig = mean - spread;
            println!(
                "  ({x:3},{y:3}) B {} M {:5.2} det {:8.2} eig {:7.2} fxx {:6.2} fyy {:6.2} fxy {:6.2}",
                bin.at(x, y), dist.at(x, y), det, eig, hess.fxx[i], hess.fyy[i], hess.fxy[i]
            );
        }
        println!();
    }
}
