use mrmr::explorer::sim::Policy;
use mrmr::harness::{run_episode, RunConfig};
use mrmr::scenarios;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let policy: Policy = args.get(1).map(|s| s.as_str()).unwrap_or("mrmr").parse().unwrap();
    let n: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(2);
    let seed: u64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1);
    let duration: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(120.0);
    let env: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(1);
    let b = scenarios::all().into_iter().nth(env - 1).unwrap();
    let mut cfg = RunConfig::new(b.scenario, policy, n, seed);
    cfg.duration = duration;
    let t0 = std::time::Instant::now();
    let res = run_episode(&cfg).unwrap();
    let s = &res.summary;
    println!(
        "{} n={} seed={} | covered {}/{} ({:.1}%) rooms {}/{} | wall {:.1}s",
        s.policy, s.n_robots, s.seed, s.room_voxels_covered, s.room_voxel_total,
        s.coverage_fraction * 100.0, s.rooms_visited, s.rooms_total, t0.elapsed().as_secs_f64()
    );
    for r in &s.per_robot {
        println!(
            "  robot {}: observed {} path {:.1}m doors {} circles {}",
            r.robot, r.observed_voxels, r.path_length, r.doors_reached, r.circles_reached
        );
    }
}
