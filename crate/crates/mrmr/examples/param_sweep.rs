use mrmr::cues::{extract_cues, CueConfig};
use mrmr::geom::Vec2;
use mrmr::metrics::score_detections;
use mrmr::perception::KnownMap;
use mrmr::scenarios;
use mrmr::worldmodel::rasterize;

fn main() {
    let suite: Vec<_> = scenarios::detection_suite()
        .into_iter()
        .map(|b| {
            let world = rasterize(&b.scenario);
            (KnownMap::fully_known(&world), b.doors.clone())
        })
        .collect();
    println!(
        "{:>6} {:>5} {:>5} | {:>6} {:>6} | {:>6} {:>6}",
        "smooth", "eig", "grad", "meanP", "meanR", "minP", "minR"
    );
    for passes in [0usize, 1] {
        for eig in [-2.0, -2.5, -3.0, -3.5, -4.0] {
            for grad in [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0, 99.0] {
                let cfg = CueConfig {
                    saddle_min_eig: eig,
                    max_saddle_gradient: grad,
                    hessian_smooth_passes: passes,
                    ..CueConfig::default()
                };
                let mut ps = Vec::new();
                let mut rs = Vec::new();
                for (map, doors) in &suite {
                    let cues = extract_cues(map, &cfg);
                    let detected: Vec<Vec2> = cues.saddles.iter().map(|p| p.xy()).collect();
                    let s = score_detections(&detected, doors, 1.0);
                    ps.push(s.precision);
                    rs.push(s.recall);
                }
                let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
                let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
                let (mp, mr, lp, lr) = (mean(&ps), mean(&rs), min(&ps), min(&rs));
                if mp >= 0.85 && mr >= 0.85 {
                    println!(
                        "{:>6} {:>5.1} {:>5.1} | {:>6.3} {:>6.3} | {:>6.3} {:>6.3}  <<<",
                        passes, eig, grad, mp, mr, lp, lr
                    );
                } else if mp >= 0.7 && mr >= 0.7 {
                    println!(
                        "{:>6} {:>5.1} {:>5.1} | {:>6.3} {:>6.3} | {:>6.3} {:>6.3}",
                        passes, eig, grad, mp, mr, lp, lr
                    );
                }
            }
        }
    }
}
