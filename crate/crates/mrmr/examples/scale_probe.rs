use mrmr::cues::{box_smooth, dilate8, distance_transform, flatten, hessian, median_filter, CueConfig};
use mrmr::perception::KnownMap;
use mrmr::scenarios;
use mrmr::worldmodel::rasterize;

fn eig_min(h: &mrmr::cues::HessianField, i: usize) -> f64 {
    let mean = 0.5 * (h.fxx[i] + h.fyy[i]);
    let spread = (0.25 * (h.fxx[i] - h.fyy[i]).powi(2) + h.fxy[i].powi(2)).sqrt();
    mean - spread
}

fn main() {
    let b = scenarios::env8();
    let world = rasterize(&b.scenario);
    let map = KnownMap::fully_known(&world);
    let cfg = CueConfig::default();
    let raw = flatten(&map, cfg.z_low, cfg.z_high);
    let bin = median_filter(&dilate8(&raw));
    let dist = distance_transform(&bin);
    let s1 = box_smooth(&dist);
    let s2 = box_smooth(&s1);
    let h0 = hessian(&dist);
    let h1 = hessian(&s1);
    let h2 = hessian(&s2);
    println!("=== doors (best cell within 0.35 m radius, by unsmoothed eig) ===");
    for d in &b.doors {
        let cx = (d.x / 0.2) as usize;
        let cy = (d.y / 0.2) as usize;
        let mut best: Option<(f64, usize)> = None;
        for y in cy - 2..=cy + 2 {
            for x in cx - 2..=cx + 2 {
                if bin.at(x, y) != 0 {
                    continue;
                }
                let i = y * bin.w + x;
                let e = eig_min(&h0, i);
                if best.is_none() || e < best.unwrap().0 {
                    best = Some((e, i));
                }
            }
        }
        if let Some((_, i)) = best {
            println!(
                "  door ({:5.2},{:5.2}) eig0 {:7.2} eig1 {:7.2} eig2 {:7.2}",
                d.x, d.y, eig_min(&h0, i), eig_min(&h1, i), eig_min(&h2, i)
            );
        }
    }
    println!("=== artifact cells (unsmoothed pass, far from all doors) ===");
    let mut shown = 0;
    for y in 0..bin.h {
        for x in 0..bin.w {
            if bin.at(x, y) != 0 {
                continue;
            }
            let i = y * bin.w + x;
            let det = h0.fxx[i] * h0.fyy[i] - h0.fxy[i] * h0.fxy[i];
            if det < -0.1 && eig_min(&h0, i) < -2.0 {
                let px = (x as f64 + 0.5) * 0.2;
                let py = (y as f64 + 0.5) * 0.2;
                if b.doors.iter().all(|d| ((d.x - px).powi(2) + (d.y - py).powi(2)).sqrt() > 1.5) {
                    if shown % 23 == 0 {
                        println!(
                            "  ({:5.2},{:5.2}) eig0 {:7.2} eig1 {:7.2} eig2 {:7.2} M {:4.2}",
                            px, py, eig_min(&h0, i), eig_min(&h1, i), eig_min(&h2, i), dist.at(x, y)
                        );
                    }
                    shown += 1;
                }
            }
        }
    }
    println!("  ({} artifact cells total)", shown);
}
