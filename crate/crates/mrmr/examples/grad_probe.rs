use mrmr::cues::{dilate8, distance_transform, flatten, hessian, median_filter, CueConfig};
use mrmr::perception::KnownMap;
use mrmr::scenarios;
use mrmr::worldmodel::rasterize;

fn main() {
    for b in [scenarios::env1(), scenarios::env8()] {
        println!("=== {} ===", b.scenario.name);
        let world = rasterize(&b.scenario);
        let map = KnownMap::fully_known(&world);
        let cfg = CueConfig::default();
        let raw = flatten(&map, cfg.z_low, cfg.z_high);
        let bin = median_filter(&dilate8(&raw));
        let dist = distance_transform(&bin);
        let hess = hessian(&dist);
        let (w, h) = (bin.w, bin.h);
        for d in &b.doors {
            let cx = (d.x / 0.2) as usize;
            let cy = (d.y / 0.2) as usize;
            println!("door ({:.2},{:.2}):", d.x, d.y);
            for y in cy - 2..=cy + 2 {
                for x in cx - 2..=cx + 2 {
                    if bin.at(x, y) != 0 {
                        continue;
                    }
                    let i = y * w + x;
                    let det = hess.fxx[i] * hess.fyy[i] - hess.fxy[i] * hess.fxy[i];
                    if det >= cfg.det_thresh {
                        continue;
                    }
                    let mean = 0.5 * (hess.fxx[i] + hess.fyy[i]);
                    let spread = (0.25 * (hess.fxx[i] - hess.fyy[i]).powi(2) + hess.fxy[i].powi(2)).sqrt();
                    let eig = mean - spread;
                    let gx = (dist.at((x + 1).min(w - 1), y) - dist.at(x.saturating_sub(1), y)) / 0.4;
                    let gy = (dist.at(x, (y + 1).min(h - 1)) - dist.at(x, y.saturating_sub(1))) / 0.4;
                    println!(
                        "  ({:5.2},{:5.2}) det {:7.2} eig {:6.2} grad {:5.2}",
                        (x as f64 + 0.5) * 0.2, (y as f64 + 0.5) * 0.2, det, eig, gx.hypot(gy)
                    );
                }
            }
        }
    }
}
