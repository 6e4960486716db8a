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
    let res = run_episode(&cfg).unwrap();
    print!("{}", res.trajectories_csv);
}
