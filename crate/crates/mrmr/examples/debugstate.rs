use mrmr::coordination::BusConfig;
use mrmr::explorer::planner::{plan_path, Nav2D};
use mrmr::explorer::sim::{Policy, Simulation};
use mrmr::explorer::ExplorerConfig;
use mrmr::scenarios;

fn main() {
    let b = scenarios::env1();
    let cfg = ExplorerConfig::default();
    let mut sim = Simulation::new(
        &b.scenario, cfg.clone(), Policy::Mrmr, 2, BusConfig::default(), None, 120.0, false,
    )
    .unwrap();
    for tick in 0..1200u64 {
        sim.step().unwrap();
        if tick == 320 || tick == 600 || tick == 1100 {
            println!("=== tick {tick} ===");
            for r in &sim.robots {
                println!(
                    "robot {}: pose ({:.2},{:.2}) target {:?} path_len {} doors_cand {} D_r {} D_o {} C_r {} C_o {}",
                    r.id, r.pose.x, r.pose.y,
                    r.target.map(|t| (t.kind(), t.point().x, t.point().y)),
                    r.path.len(),
                    r.coord.doors.len(),
                    r.coord.reached_doors.len(), r.coord.other_doors.len(),
                    r.coord.reached_circles.len(), r.coord.other_circles.len()
                );
                let unreached: Vec<_> = r
                    .circles
                    .iter()
                    .filter(|c| !c.reached)
                    .map(|c| (c.id, (c.center.x * 10.0).round() / 10.0, (c.center.y * 10.0).round() / 10.0, (c.r * 10.0).round() / 10.0, r.coord.circle_excluded(c)))
                    .collect();
                println!("  unreached circles: {unreached:?}");
                let map = sim.map_of(r.id);
                let nav = Nav2D::build(map, &cfg.planner);
                let fr = nav.frontier_cells();
                println!("  frontier cells: {}", fr.len());
                if let Some(c) = r.circles.iter().find(|c| !c.reached) {
                    let p = plan_path(&nav, r.pose.xy(), c.center, &cfg.planner);
                    println!("  plan to circle {}: {:?}", c.id, p.as_ref().map(|p| p.len()));
                }
            }
        }
    }
}
