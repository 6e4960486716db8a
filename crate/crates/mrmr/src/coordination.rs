//! Decentralized target assignment and the reached-sets wire protocol.
//!
//! Each robot keeps door candidates (saddle points), its own reached sets
//! (doors `D_r`, circles `C_r`) and the sets reached by other robots
//! (`D_o`, `C_o`). Target selection excludes candidates already covered by
//! another robot and returns the nearest survivor. Reached sets travel over a
//! simulated bus as canonical text messages.

use crate::circles::{Circle, CircleSet};
use crate::geom::Point3;
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A door candidate with a per-tick stable id (insertion order).
#[derive(Debug, Clone, Copy)]
pub struct Door {
    pub id: u32,
    pub point: Point3,
}

/// Per-robot coordination state.
#[derive(Debug, Clone)]
pub struct CoordinationState {
    pub doors: Vec<Door>,
    pub reached_doors: Vec<Point3>,
    pub reached_circles: Vec<(Point3, f64)>,
    pub other_doors: Vec<Point3>,
    pub other_circles: Vec<(Point3, f64)>,
    pub eps_d: f64,
    pub eps_c: f64,
}

impl Default for CoordinationState {
    fn default() -> Self {
        CoordinationState {
            doors: Vec::new(),
            reached_doors: Vec::new(),
            reached_circles: Vec::new(),
            other_doors: Vec::new(),
            other_circles: Vec::new(),
            eps_d: 1.0,
            eps_c: 1.5,
        }
    }
}

impl CoordinationState {
    /// Replaces the door candidate set with this tick's saddle points,
    /// dropping any candidate within `eps_d` of an already-reached door.
    pub fn set_door_candidates(&mut self, saddles: &[Point3]) {
        self.doors.clear();
        let mut id = 0u32;
        for &p in saddles {
            let visited = self
                .reached_doors
                .iter()
                .any(|d| d.dist(p) < self.eps_d);
            if !visited {
                self.doors.push(Door { id, point: p });
            }
            id += 1;
        }
    }

    /// Nearest door candidate at least `eps_d` away from every door reached
    /// by any robot; ties break toward the lowest id.
    pub fn target_door(&self, robot_pos: Point3) -> Option<Point3> {
        let mut best: Option<(f64, u32, Point3)> = None;
        for d in &self.doors {
            let excluded = self
                .other_doors
                .iter()
                .chain(self.reached_doors.iter())
                .any(|o| o.dist(d.point) < self.eps_d);
            if excluded {
                continue;
            }
            let dist = robot_pos.dist(d.point);
            let better = match best {
                None => true,
                Some((bd, bid, _)) => dist < bd || (dist == bd && d.id < bid),
            };
            if better {
                best = Some((dist, d.id, d.point));
            }
        }
        best.map(|(_, _, p)| p)
    }

    /// Nearest unreached circle whose center is at least `eps_c * r'` away
    /// from every circle `c'` reached by another robot.
    pub fn target_circle(&self, circles: &CircleSet, robot_pos: Point3) -> Option<Circle> {
        let mut best: Option<(f64, u32, Circle)> = None;
        for c in circles.iter() {
            if c.reached {
                continue;
            }
            if self.circle_excluded(c) {
                continue;
            }
            let center = Point3::new(c.center.x, c.center.y, crate::cues::CUE_Z);
            let dist = robot_pos.dist(center);
            let better = match best {
                None => true,
                Some((bd, bid, _)) => dist < bd || (dist == bd && c.id < bid),
            };
            if better {
                best = Some((dist, c.id, *c));
            }
        }
        best.map(|(_, _, c)| c)
    }

    /// True when a circle center lies within `eps_c * r'` of a circle
    /// reached by another robot.
    pub fn circle_excluded(&self, c: &Circle) -> bool {
        self.other_circles.iter().any(|(o, r)| {
            let d = (o.x - c.center.x).hypot(o.y - c.center.y);
            d < self.eps_c * r
        })
    }

    /// True when a door point lies within `eps_d` of a door reached by any
    /// robot (used for per-tick target re-validation).
    pub fn door_covered(&self, p: Point3) -> bool {
        self.other_doors
            .iter()
            .chain(self.reached_doors.iter())
            .any(|o| o.dist(p) < self.eps_d)
    }

    /// Records a door reached by this robot; returns true when it was new.
    pub fn add_reached_door(&mut self, p: Point3) -> bool {
        if self.reached_doors.iter().any(|d| d.dist(p) < self.eps_d) {
            return false;
        }
        self.reached_doors.push(p);
        true
    }

    /// Records a circle reached by this robot; returns true when it was new.
    pub fn add_reached_circle(&mut self, center: Point3, r: f64) -> bool {
        if self
            .reached_circles
            .iter()
            .any(|(c, cr)| *c == center && *cr == r)
        {
            return false;
        }
        self.reached_circles.push((center, r));
        true
    }

    /// Set-union of a received message into the reached-by-others sets.
    /// Idempotent and order-independent.
    pub fn merge_message(&mut self, msg: &ReachedSetsMessage) {
        for d in &msg.doors {
            let p = mm_point(*d);
            if !self.other_doors.contains(&p) {
                self.other_doors.push(p);
            }
        }
        for c in &msg.circles {
            let p = mm_point([c[0], c[1], c[2]]);
            let r = c[3] as f64 / 1000.0;
            if !self.other_circles.contains(&(p, r)) {
                self.other_circles.push((p, r));
            }
        }
    }

    /// Builds the outgoing reached-sets message.
    pub fn reached_message(&self, robot_id: u32, seq: u64) -> ReachedSetsMessage {
        let doors = self.reached_doors.iter().map(|p| point_mm(*p)).collect();
        let circles = self
            .reached_circles
            .iter()
            .map(|(p, r)| [to_mm(p.x), to_mm(p.y), to_mm(p.z), to_mm(*r)])
            .collect();
        ReachedSetsMessage::new(robot_id, seq, doors, circles)
    }
}

#[inline]
fn to_mm(v: f64) -> i32 {
    (v * 1000.0).round() as i32
}

fn point_mm(p: Point3) -> [i32; 3] {
    [to_mm(p.x), to_mm(p.y), to_mm(p.z)]
}

fn mm_point(p: [i32; 3]) -> Point3 {
    Point3::new(p[0] as f64 / 1000.0, p[1] as f64 / 1000.0, p[2] as f64 / 1000.0)
}

/// Reached-sets payload exchanged between robots. Coordinates are fixed
/// 3-decimal values stored in milli-meter units; doors and circles are kept
/// in canonical (lexicographic, deduplicated) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachedSetsMessage {
    pub robot_id: u32,
    pub seq: u64,
    pub doors: Vec<[i32; 3]>,
    pub circles: Vec<[i32; 4]>,
}

impl ReachedSetsMessage {
    pub fn new(robot_id: u32, seq: u64, mut doors: Vec<[i32; 3]>, mut circles: Vec<[i32; 4]>) -> Self {
        doors.sort_unstable();
        doors.dedup();
        circles.sort_unstable();
        circles.dedup();
        ReachedSetsMessage { robot_id, seq, doors, circles }
    }
}

fn fmt_mm(mm: i32) -> String {
    format!("{:.3}", mm as f64 / 1000.0)
}

/// Encodes a message into its canonical single-line wire form:
/// `MRMR1|robot=<id>|seq=<n>|doors=x,y,z;...|circles=x,y,z,r;...`
pub fn encode_message(msg: &ReachedSetsMessage) -> String {
    let doors = msg
        .doors
        .iter()
        .map(|d| format!("{},{},{}", fmt_mm(d[0]), fmt_mm(d[1]), fmt_mm(d[2])))
        .collect::<Vec<_>>()
        .join(";");
    let circles = msg
        .circles
        .iter()
        .map(|c| {
            format!(
                "{},{},{},{}",
                fmt_mm(c[0]),
                fmt_mm(c[1]),
                fmt_mm(c[2]),
                fmt_mm(c[3])
            )
        })
        .collect::<Vec<_>>()
        .join(";");
    format!(
        "MRMR1|robot={}|seq={}|doors={}|circles={}",
        msg.robot_id, msg.seq, doors, circles
    )
}

fn parse_mm(s: &str) -> Result<i32> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Wire(format!("bad number {s:?}")))?;
    Ok(to_mm(v))
}

/// Parses the wire form produced by [`encode_message`].
pub fn decode_message(line: &str) -> Result<ReachedSetsMessage> {
    let line = line.trim_end_matches(['\r', '\n']);
    let parts: Vec<&str> = line.split('|').collect();
    if parts.len() != 5 {
        return Err(Error::Wire(format!(
            "expected 5 fields separated by '|', got {}",
            parts.len()
        )));
    }
    if parts[0] != "MRMR1" {
        return Err(Error::Wire(format!("bad magic {:?}", parts[0])));
    }
    let field = |part: &str, key: &str| -> Result<String> {
        part.strip_prefix(&format!("{key}="))
            .map(str::to_owned)
            .ok_or_else(|| Error::Wire(format!("expected {key}=..., got {part:?}")))
    };
    let robot_id: u32 = field(parts[1], "robot")?
        .parse()
        .map_err(|_| Error::Wire("bad robot id".into()))?;
    let seq: u64 = field(parts[2], "seq")?
        .parse()
        .map_err(|_| Error::Wire("bad seq".into()))?;
    let doors_str = field(parts[3], "doors")?;
    let circles_str = field(parts[4], "circles")?;
    let mut doors = Vec::new();
    if !doors_str.is_empty() {
        for item in doors_str.split(';') {
            let nums: Vec<&str> = item.split(',').collect();
            if nums.len() != 3 {
                return Err(Error::Wire(format!("door needs 3 fields, got {item:?}")));
            }
            doors.push([parse_mm(nums[0])?, parse_mm(nums[1])?, parse_mm(nums[2])?]);
        }
    }
    let mut circles = Vec::new();
    if !circles_str.is_empty() {
        for item in circles_str.split(';') {
            let nums: Vec<&str> = item.split(',').collect();
            if nums.len() != 4 {
                return Err(Error::Wire(format!("circle needs 4 fields, got {item:?}")));
            }
            circles.push([
                parse_mm(nums[0])?,
                parse_mm(nums[1])?,
                parse_mm(nums[2])?,
                parse_mm(nums[3])?,
            ]);
        }
    }
    Ok(ReachedSetsMessage::new(robot_id, seq, doors, circles))
}

/// Delivery mode of the simulated bus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delivery {
    Perfect,
    Lossy,
}

/// Bus parameters. In perfect mode messages are never dropped and arrive one
/// tick after sending.
#[derive(Debug, Clone)]
pub struct BusConfig {
    pub delivery: Delivery,
    pub drop_probability: f64,
    pub latency_ticks: u64,
    pub rng_seed: u64,
}

impl Default for BusConfig {
    fn default() -> Self {
        BusConfig {
            delivery: Delivery::Perfect,
            drop_probability: 0.0,
            latency_ticks: 0,
            rng_seed: 0,
        }
    }
}

impl BusConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_probability) {
            return Err(Error::Validation("drop_probability must be in [0,1]".into()));
        }
        if self.delivery == Delivery::Perfect
            && (self.drop_probability != 0.0 || self.latency_ticks != 0)
        {
            return Err(Error::Validation(
                "perfect delivery requires drop_probability = 0 and latency 0".into(),
            ));
        }
        Ok(())
    }
}

/// The only cross-robot channel: messages sent at tick `t` become visible no
/// earlier than tick `t + 1 + latency`.
#[derive(Debug)]
pub struct Bus {
    cfg: BusConfig,
    n_robots: usize,
    rng: ChaCha8Rng,
    in_flight: Vec<(u64, usize, ReachedSetsMessage)>,
}

impl Bus {
    pub fn new(cfg: BusConfig, n_robots: usize) -> Result<Self> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        Ok(Bus { cfg, n_robots, rng, in_flight: Vec::new() })
    }

    /// Queues a broadcast from `sender` at tick `tick`. Each (message,
    /// recipient) pair is dropped independently in lossy mode.
    pub fn publish(&mut self, tick: u64, sender: usize, msg: &ReachedSetsMessage) {
        let deliver_at = tick + 1 + self.cfg.latency_ticks;
        for recipient in 0..self.n_robots {
            if recipient == sender {
                continue;
            }
            if self.cfg.delivery == Delivery::Lossy {
                let roll: f64 = self.rng.gen();
                if roll < self.cfg.drop_probability {
                    continue;
                }
            }
            self.in_flight.push((deliver_at, recipient, msg.clone()));
        }
    }

    /// Pops every message due at or before `tick`, grouped per recipient.
    pub fn collect(&mut self, tick: u64) -> Vec<Vec<ReachedSetsMessage>> {
        let mut inboxes = vec![Vec::new(); self.n_robots];
        let mut remaining = Vec::with_capacity(self.in_flight.len());
        for (due, recipient, msg) in self.in_flight.drain(..) {
            if due <= tick {
                inboxes[recipient].push(msg);
            } else {
                remaining.push((due, recipient, msg));
            }
        }
        self.in_flight = remaining;
        inboxes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point3 {
        Point3::new(x, y, 1.0)
    }

    #[test]
    fn target_door_excludes_near_other_reached() {
        let mut s = CoordinationState::default();
        s.set_door_candidates(&[p(1.0, 0.0)]);
        s.other_doors.push(p(1.5, 0.0));
        assert_eq!(s.target_door(p(0.0, 0.0)), None);
    }

    #[test]
    fn target_door_nearest_wins() {
        let mut s = CoordinationState::default();
        s.set_door_candidates(&[p(4.0, 0.0), p(2.0, 0.0)]);
        assert_eq!(s.target_door(p(0.0, 0.0)), Some(p(2.0, 0.0)));
    }

    #[test]
    fn target_door_tie_breaks_by_id() {
        let mut s = CoordinationState::default();
        s.set_door_candidates(&[p(2.0, 0.0), p(-2.0, 0.0)]);
        // equidistant: the first candidate (lower id) wins, stable across runs
        for _ in 0..10 {
            assert_eq!(s.target_door(p(0.0, 0.0)), Some(p(2.0, 0.0)));
        }
    }

    #[test]
    fn door_candidates_exclude_self_reached() {
        let mut s = CoordinationState::default();
        s.reached_doors.push(p(1.0, 0.0));
        s.set_door_candidates(&[p(1.3, 0.0), p(5.0, 0.0)]);
        assert_eq!(s.doors.len(), 1);
        assert_eq!(s.target_door(p(0.0, 0.0)), Some(p(5.0, 0.0)));
    }

    #[test]
    fn target_circle_exclusion_radius_scales_with_other_radius() {
        use crate::circles::Circle;
        use crate::geom::Vec2;
        let mut s = CoordinationState::default();
        s.other_circles.push((p(0.0, 0.0), 1.5));
        let mut set = CircleSet::new();
        set.circles.push(Circle { id: 0, center: Vec2::new(2.0, 0.0), r: 1.0, reached: false });
        // 2.0 < 1.5 * 1.5 = 2.25: excluded
        assert!(s.target_circle(&set, p(0.0, 0.0)).is_none());
        set.circles[0].center = Vec2::new(2.5, 0.0);
        // 2.5 >= 2.25: retained
        assert!(s.target_circle(&set, p(0.0, 0.0)).is_some());
    }

    #[test]
    fn target_circle_empty_set_none() {
        let s = CoordinationState::default();
        assert!(s.target_circle(&CircleSet::new(), p(0.0, 0.0)).is_none());
    }

    #[test]
    fn wire_roundtrip_and_golden_bytes() {
        let msg = ReachedSetsMessage::new(
            3,
            7,
            vec![[1000, 2000, 1000], [-500, 250, 1000]],
            vec![[500, 1500, 1000, 2000]],
        );
        let line = encode_message(&msg);
        assert_eq!(
            line,
            "MRMR1|robot=3|seq=7|doors=-0.500,0.250,1.000;1.000,2.000,1.000|circles=0.500,1.500,1.000,2.000"
        );
        let back = decode_message(&line).unwrap();
        assert_eq!(back, msg);
    }

    #[test]
    fn wire_empty_sets_minimal_message() {
        let msg = ReachedSetsMessage::new(0, 0, vec![], vec![]);
        let line = encode_message(&msg);
        assert_eq!(line, "MRMR1|robot=0|seq=0|doors=|circles=");
        assert_eq!(decode_message(&line).unwrap(), msg);
    }

    #[test]
    fn wire_rejects_malformed() {
        assert!(decode_message("garbage").is_err());
        assert!(decode_message("MRMR1|robot=1|seq=2|doors=1.0,2.0|circles=").is_err());
        assert!(decode_message("MRMR1|robot=1|seq=2|doors=|circles=1,2,3").is_err());
        assert!(decode_message("MRMR1|robot=x|seq=2|doors=|circles=").is_err());
        assert!(decode_message("MRMR2|robot=1|seq=2|doors=|circles=").is_err());
    }

    #[test]
    fn merge_message_idempotent_and_commutative() {
        let m1 = ReachedSetsMessage::new(1, 0, vec![[1000, 0, 1000]], vec![[0, 0, 1000, 500]]);
        let m2 = ReachedSetsMessage::new(2, 0, vec![[3000, 0, 1000]], vec![]);
        let mut a = CoordinationState::default();
        a.merge_message(&m1);
        a.merge_message(&m2);
        a.merge_message(&m1); // duplicate delivery
        let mut b = CoordinationState::default();
        b.merge_message(&m2);
        b.merge_message(&m1);
        assert_eq!(a.other_doors.len(), 2);
        assert_eq!(b.other_doors.len(), 2);
        let mut ad: Vec<_> = a.other_doors.iter().map(|p| (p.x as i64, p.y as i64)).collect();
        let mut bd: Vec<_> = b.other_doors.iter().map(|p| (p.x as i64, p.y as i64)).collect();
        ad.sort_unstable();
        bd.sort_unstable();
        assert_eq!(ad, bd);
        assert_eq!(a.other_circles.len(), 1);
    }

    #[test]
    fn bus_perfect_delivers_next_tick() {
        let mut bus = Bus::new(BusConfig::default(), 2).unwrap();
        let msg = ReachedSetsMessage::new(0, 0, vec![[1000, 0, 1000]], vec![]);
        bus.publish(0, 0, &msg);
        // not yet due at tick 0
        let now = bus.collect(0);
        assert!(now[1].is_empty());
        let later = bus.collect(1);
        assert_eq!(later[1].len(), 1);
        assert!(later[0].is_empty(), "sender must not receive its own message");
    }

    #[test]
    fn bus_drop_probability_one_blocks_everything() {
        let cfg = BusConfig {
            delivery: Delivery::Lossy,
            drop_probability: 1.0,
            latency_ticks: 0,
            rng_seed: 9,
        };
        let mut bus = Bus::new(cfg, 3).unwrap();
        let msg = ReachedSetsMessage::new(0, 0, vec![[1000, 0, 1000]], vec![]);
        for t in 0..10 {
            bus.publish(t, 0, &msg);
        }
        let inbox = bus.collect(100);
        assert!(inbox.iter().all(|i| i.is_empty()));
    }

    #[test]
    fn bus_latency_delays_delivery() {
        let cfg = BusConfig {
            delivery: Delivery::Lossy,
            drop_probability: 0.0,
            latency_ticks: 3,
            rng_seed: 1,
        };
        let mut bus = Bus::new(cfg, 2).unwrap();
        let msg = ReachedSetsMessage::new(0, 0, vec![], vec![]);
        bus.publish(5, 0, &msg);
        assert!(bus.collect(8)[1].is_empty());
        assert_eq!(bus.collect(9)[1].len(), 1);
    }

    #[test]
    fn bus_config_invariant() {
        let bad = BusConfig {
            delivery: Delivery::Perfect,
            drop_probability: 0.5,
            latency_ticks: 0,
            rng_seed: 0,
        };
        assert!(bad.validate().is_err());
    }
}
