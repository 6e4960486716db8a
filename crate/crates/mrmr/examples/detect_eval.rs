use mrmr::cues::{extract_cues, CueConfig};
use mrmr::geom::Vec2;
use mrmr::metrics::score_detections;
use mrmr::perception::KnownMap;
use mrmr::scenarios;
use mrmr::worldmodel::rasterize;

fn main() {
    let mut psum = 0.0;
    let mut rsum = 0.0;
    let suite = scenarios::detection_suite();
    let n = suite.len();
    for b in suite {
        let world = rasterize(&b.scenario);
        let map = KnownMap::fully_known(&world);
        let t0 = std::time::Instant::now();
        let cues = extract_cues(&map, &CueConfig::default());
        let detected: Vec<Vec2> = cues.saddles.iter().map(|p| p.xy()).collect();
        let score = score_detections(&detected, &b.doors, 1.0);
        println!(
            "{:6}: P {:.3} R {:.3}  (tp {} fp {} fn {})  saddles {} doors {}  {:.1} ms",
            b.scenario.name,
            score.precision,
            score.recall,
            score.true_positives,
            score.false_positives,
            score.false_negatives,
            detected.len(),
            b.doors.len(),
            t0.elapsed().as_secs_f64() * 1e3,
        );
        if score.false_positives > 0 {
            for d in &detected {
                if !b.doors.iter().any(|t| t.dist(*d) <= 1.0) {
                    println!("    FP at ({:.2}, {:.2})", d.x, d.y);
                }
            }
        }
        if score.false_negatives > 0 {
            for t in &b.doors {
                if !detected.iter().any(|d| t.dist(*d) <= 1.0) {
                    println!("    FN at ({:.2}, {:.2})", t.x, t.y);
                }
            }
        }
        psum += score.precision;
        rsum += score.recall;
    }
    println!("mean precision {:.3} recall {:.3}", psum / n as f64, rsum / n as f64);
}
