use std::collections::VecDeque;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Difficulty, Scenario};
use crate::docking::distances_from;
use crate::docking::ground_truth_destinations;
use crate::domain::{sample_layout, Cell, GridMap, Pose, PoseId, RewardConfig, VisConfig};

const MAX_ATTEMPTS: usize = 64;
const D_SUCCESS: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("no feasible scenario after {0} attempts")]
    Exhausted(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub difficulty: Difficulty,
    pub width: usize,
    pub height: usize,
    pub rooms: usize,
    /// Candidate cells to place.
    pub candidates: usize,
    /// Objects to place on candidates.
    pub objects: usize,
    pub starts: usize,
    pub headings: usize,
    pub vis: VisConfig,
    pub rewards: RewardConfig,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(
        difficulty: Difficulty,
        width: usize,
        height: usize,
        candidates: usize,
        objects: usize,
        seed: u64,
    ) -> Self {
        let rooms = match difficulty {
            Difficulty::Easy => 1,
            Difficulty::Medium => 2,
            Difficulty::Hard => 3,
        };
        Self {
            difficulty,
            width,
            height,
            rooms,
            candidates,
            objects,
            starts: 20,
            headings: 8,
            vis: VisConfig::default(),
            rewards: RewardConfig::default(),
            seed,
        }
    }

    /// Default size and counts for a tier.
    /// Reference-suite sizes. Small enough for desk-scale batches, large
    /// enough that a random walk often exhausts the move budget.
    pub fn preset(difficulty: Difficulty, seed: u64) -> Self {
        match difficulty {
            Difficulty::Easy => Self::new(difficulty, 16, 16, 8, 5, seed),
            Difficulty::Medium => Self::new(difficulty, 22, 22, 10, 5, seed),
            Difficulty::Hard => Self::new(difficulty, 26, 26, 14, 5, seed),
        }
    }

    pub fn validate(&self) -> Result<(), GenerateError> {
        let bad = |m: &str| Err(GenerateError::InvalidSpec(m.to_string()));
        if self.objects == 0 || self.candidates < self.objects {
            return bad("need candidates >= objects >= 1");
        }
        if self.width < 5 || self.height < 5 {
            return bad("maps must be at least 5x5");
        }
        if self.headings == 0 {
            return bad("need at least one heading");
        }
        let rooms_ok = match self.difficulty {
            Difficulty::Easy => self.rooms == 1,
            Difficulty::Medium => self.rooms == 2,
            Difficulty::Hard => self.rooms >= 3,
        };
        if !rooms_ok {
            return bad("room count does not match the difficulty tier (easy 1, medium 2, hard 3+)");
        }
        self.vis.validate().map_err(|e| GenerateError::InvalidSpec(e.to_string()))?;
        self.rewards.validate().map_err(|e| GenerateError::InvalidSpec(e.to_string()))?;
        Ok(())
    }
}

/// Interior rectangle, inclusive bounds.
#[derive(Debug, Clone, Copy)]
struct Room {
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
}

impl Room {
    fn w(&self) -> usize {
        self.x1 - self.x0 + 1
    }
    fn h(&self) -> usize {
        self.y1 - self.y0 + 1
    }
}

/// Splits the largest room with a wall that keeps a door open. Hard maps get
/// wide openings so rooms read as an open plan.
fn split_rooms(map: &mut GridMap, spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Option<Vec<Room>> {
    let mut rooms = vec![Room { x0: 1, y0: 1, x1: spec.width - 2, y1: spec.height - 2 }];
    while rooms.len() < spec.rooms {
        let (i, _) = rooms.iter().enumerate().max_by_key(|(i, r)| (r.w() * r.h(), usize::MAX - i))?;
        let r = rooms.remove(i);
        let vertical = r.w() >= r.h();
        let span = if vertical { r.w() } else { r.h() };
        if span < 7 {
            return None;
        }
        let len = if vertical { r.h() } else { r.w() };
        let pos = rng.gen_range(3..span - 3);
        let door = match spec.difficulty {
            Difficulty::Hard => (len / 3).max(2),
            _ => 2,
        }
        .min(len);
        let door_at = rng.gen_range(0..=len - door);
        for j in 0..len {
            if (door_at..door_at + door).contains(&j) {
                continue;
            }
            if vertical {
                map.set(r.x0 + pos, r.y0 + j, Cell::Occlusion);
            } else {
                map.set(r.x0 + j, r.y0 + pos, Cell::Occlusion);
            }
        }
        if vertical {
            rooms.push(Room { x1: r.x0 + pos - 1, ..r });
            rooms.push(Room { x0: r.x0 + pos + 1, ..r });
        } else {
            rooms.push(Room { y1: r.y0 + pos - 1, ..r });
            rooms.push(Room { y0: r.y0 + pos + 1, ..r });
        }
    }
    Some(rooms)
}

/// Drops small occluding blocks inside rooms, one cell clear of the walls.
fn place_furniture(map: &mut GridMap, rooms: &[Room], count: usize, rng: &mut ChaCha8Rng) {
    for _ in 0..count {
        let r = rooms[rng.gen_range(0..rooms.len())];
        if r.w() < 6 || r.h() < 6 {
            continue;
        }
        let (bw, bh) = [(1, 2), (2, 1), (2, 2)][rng.gen_range(0..3)];
        let x = rng.gen_range(r.x0 + 2..=r.x1 - 1 - bw);
        let y = rng.gen_range(r.y0 + 2..=r.y1 - 1 - bh);
        for dy in 0..bh {
            for dx in 0..bw {
                map.set(x + dx, y + dy, Cell::Occlusion);
            }
        }
    }
}

/// Whether every Empty cell is 4-connected to every other.
pub fn flood_fill_connected(map: &GridMap) -> bool {
    let (w, h) = (map.width(), map.height());
    let Some(start) = (0..w * h).find(|&i| map.get(i % w, i / w) == Cell::Empty) else {
        return false;
    };
    let mut seen = vec![false; w * h];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut reached = 1;
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as i64, (i / w) as i64);
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            if map.get_signed(x + dx, y + dy) == Some(Cell::Empty) {
                let j = (y + dy) as usize * w + (x + dx) as usize;
                if !seen[j] {
                    seen[j] = true;
                    reached += 1;
                    queue.push_back(j);
                }
            }
        }
    }
    reached == map.count(Cell::Empty)
}

fn attempt(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Option<Scenario> {
    let (w, h) = (spec.width, spec.height);
    let mut cells = vec![Cell::Occlusion; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            cells[y * w + x] = Cell::Empty;
        }
    }
    let mut map = GridMap::new(w, h, cells).ok()?;
    let rooms = split_rooms(&mut map, spec, rng)?;
    let furniture = match spec.difficulty {
        Difficulty::Easy => 0,
        Difficulty::Medium => 2,
        Difficulty::Hard => 2 * spec.rooms,
    };
    place_furniture(&mut map, &rooms, furniture, rng);

    let along_walls: Vec<(usize, usize)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| {
            map.get(x, y) == Cell::Empty
                && [(1, 0), (-1, 0), (0, 1), (0, -1)]
                    .iter()
                    .any(|(dx, dy)| map.get_signed(x as i64 + dx, y as i64 + dy) == Some(Cell::Occlusion))
        })
        .collect();
    if along_walls.len() < spec.candidates {
        return None;
    }
    for i in index::sample(rng, along_walls.len(), spec.candidates) {
        let (x, y) = along_walls[i];
        map.set(x, y, Cell::Candidate);
    }
    if !flood_fill_connected(&map) {
        return None;
    }

    let mut scenario = Scenario {
        name: None,
        difficulty: Some(spec.difficulty),
        map,
        headings: spec.headings,
        vis: spec.vis,
        rewards: spec.rewards,
        objects: Vec::new(),
        target: 0,
        starts: Vec::new(),
    };
    let world = scenario.world().ok()?;
    if !world.vis.every_column_covered() {
        return None;
    }
    if world
        .candidates
        .iter()
        .any(|(c, _)| ground_truth_destinations(&world.graph, &world.vis, &world.candidates, c, D_SUCCESS).is_empty())
    {
        return None;
    }
    // pose graph must be strongly connected so every start reaches every destination
    let from_first = distances_from(&world.graph, PoseId(0));
    if from_first.iter().any(Option::is_none) {
        return None;
    }

    let layout = sample_layout(&world.candidates, spec.objects, rng).ok()?;
    scenario.objects = layout.placements;
    scenario.target = rng.gen_range(0..spec.objects);
    let starts = spec.starts.min(world.graph.len());
    scenario.starts = index::sample(rng, world.graph.len(), starts)
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let pose: Pose = world.graph.pose(PoseId(p as u32));
            (format!("s{i}"), pose)
        })
        .collect();
    Some(scenario)
}

/// Seeded generation; retries internally until the map is connected, every
/// candidate is seen from somewhere, and every candidate has a destination
/// pose within reach.
pub fn generate_scenario(spec: &GeneratorSpec) -> Result<Scenario, GenerateError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..MAX_ATTEMPTS {
        if let Some(mut s) = attempt(spec, &mut rng) {
            s.name = Some(format!("{}-{}", spec.difficulty, spec.seed));
            return Ok(s);
        }
    }
    Err(GenerateError::Exhausted(MAX_ATTEMPTS))
}

/// `per_tier` preset maps for each difficulty.
pub fn reference_suite(per_tier: usize, seed: u64) -> Result<Vec<Scenario>, GenerateError> {
    let mut out = Vec::with_capacity(3 * per_tier);
    for (t, d) in Difficulty::ALL.into_iter().enumerate() {
        for i in 0..per_tier {
            out.push(generate_scenario(&GeneratorSpec::preset(d, seed + (t * per_tier + i) as u64))?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{parse_scenario, serialize_scenario};

    #[test]
    fn same_seed_same_bytes() {
        let spec = GeneratorSpec::new(Difficulty::Easy, 10, 10, 6, 3, 11);
        let a = serialize_scenario(&generate_scenario(&spec).unwrap());
        let b = serialize_scenario(&generate_scenario(&spec).unwrap());
        assert_eq!(a, b);
        let other = serialize_scenario(&generate_scenario(&GeneratorSpec { seed: 12, ..spec }).unwrap());
        assert_ne!(a, other);
    }

    #[test]
    fn generated_maps_are_sound() {
        for d in Difficulty::ALL {
            for seed in 0..8 {
                let s = generate_scenario(&GeneratorSpec::preset(d, seed)).unwrap();
                assert!(flood_fill_connected(&s.map));
                let world = s.world().unwrap();
                for (c, _) in world.candidates.iter() {
                    assert!(world.vis.poses_seeing(c).next().is_some());
                }
                assert_eq!(world.candidates.len(), GeneratorSpec::preset(d, seed).candidates);
                assert_eq!(s.objects.len(), 5);
                assert_eq!(s.starts.len(), 20);
                let text = serialize_scenario(&s);
                assert_eq!(parse_scenario(&text).unwrap(), s);
            }
        }
    }

    #[test]
    fn tiers_differ_in_topology() {
        let walls = |d| {
            let s = generate_scenario(&GeneratorSpec::preset(d, 3)).unwrap();
            let border = 2 * (s.map.width() + s.map.height()) - 4;
            s.map.count(Cell::Occlusion) - border
        };
        assert_eq!(walls(Difficulty::Easy), 0);
        assert!(walls(Difficulty::Medium) > 0);
        assert!(walls(Difficulty::Hard) > walls(Difficulty::Medium));
    }

    #[test]
    fn rejects_bad_specs() {
        let ok = GeneratorSpec::new(Difficulty::Easy, 10, 10, 6, 3, 0);
        assert!(generate_scenario(&GeneratorSpec { objects: 0, ..ok.clone() }).is_err());
        assert!(generate_scenario(&GeneratorSpec { candidates: 2, ..ok.clone() }).is_err());
        assert!(generate_scenario(&GeneratorSpec { rooms: 2, ..ok.clone() }).is_err());
        assert!(generate_scenario(&GeneratorSpec { width: 3, ..ok.clone() }).is_err());
        assert_eq!(
            generate_scenario(&GeneratorSpec { candidates: 60, objects: 1, ..ok }),
            Err(GenerateError::Exhausted(MAX_ATTEMPTS))
        );
    }

    #[test]
    fn flood_fill_detects_split() {
        let split = GridMap::from_rows(&["..#..", "..#.C"]).unwrap();
        assert!(!flood_fill_connected(&split));
        let joined = GridMap::from_rows(&["..#..", "....C"]).unwrap();
        assert!(flood_fill_connected(&joined));
    }
}
