use mrmr::cues::{dilate8, distance_transform, flatten, hessian, median_filter, CueConfig};
use mrmr::perception::KnownMap;
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
    let hess = hessian(&dist);
    // collect all saddle cells with eig values
    let mut cells = Vec::new();
    for y in 0..bin.h {
        for x in 0..bin.w {
            if bin.at(x, y) != 0 {
                continue;
            }
            let i = y * bin.w + x;
            let det = hess.fxx[i] * hess.fyy[i] - hess.fxy[i] * hess.fxy[i];
            if det < cfg.det_thresh {
                let mean = 0.5 * (hess.fxx[i] + hess.fyy[i]);
                let spread =
                    (0.25 * (hess.fxx[i] - hess.fyy[i]).powi(2) + hess.fxy[i].powi(2)).sqrt();
                let eig = mean - spread;
                cells.push((x, y, det, eig, dist.at(x, y)));
            }
        }
    }
    println!("doors:");
    for d in &b.doors {
        println!("  ({:.2}, {:.2})", d.x, d.y);
        // nearest det<thresh cell and its eig
        let mut best: Option<(f64, &(usize, usize, f64, f64, f64))> = None;
        for c in &cells {
            let px = (c.0 as f64 + 0.5) * 0.2;
            let py = (c.1 as f64 + 0.5) * 0.2;
            let dd = ((px - d.x).powi(2) + (py - d.y).powi(2)).sqrt();
            if best.is_none() || dd < best.unwrap().0 {
                best = Some((dd, c));
            }
        }
        if let Some((dd, c)) = best {
            println!(
                "    nearest det<thresh cell: ({:.2},{:.2}) dist {:.2} det {:.2} eig {:.2} M {:.2}",
                (c.0 as f64 + 0.5) * 0.2,
                (c.1 as f64 + 0.5) * 0.2,
                dd, c.2, c.3, c.4
            );
        }
    }
    println!("all det<thresh cells with eig < -2 (pass) or not:");
    let mut pass = 0;
    let mut fail = 0;
    for c in &cells {
        if c.3 < cfg.saddle_min_eig {
            pass += 1;
        } else {
            fail += 1;
        }
    }
    println!("  pass {pass} fail {fail} total {}", cells.len());
    // show passing cells
    for c in cells.iter().filter(|c| c.3 < cfg.saddle_min_eig) {
        println!(
            "  ({:.2},{:.2}) det {:.2} eig {:.2} M {:.2}",
            (c.0 as f64 + 0.5) * 0.2,
            (c.1 as f64 + 0.5) * 0.2,
            c.2, c.3, c.4
        );
    }
}
