//! Browser bindings: generate a map, query what a pose sees, and run one
//! search episode. Every call takes and returns plain strings (scenario text
//! in, JSON out) so the page needs no generated types.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use pomp_core::domain::Pose;
use pomp_core::harness::{reference_solver, run_episode_traced, EpisodeConfig, Phase, Policy};
use pomp_core::perception::DetectionSource;
use pomp_core::scenario::{generate_scenario, parse_scenario, serialize_scenario, Difficulty, GeneratorSpec, Scenario};

/// Caps browser runs; the full default would stall the page on hard maps.
pub const MAX_SIMS: usize = 4096;

fn scenario_json(s: &Scenario) -> Value {
    let world = s.world().expect("generated scenarios are valid");
    let candidates: Vec<[usize; 2]> = world.candidates.iter().map(|(_, (x, y))| [x, y]).collect();
    let starts: Vec<Value> =
        s.starts.iter().map(|(name, p)| json!({ "name": name, "x": p.x, "y": p.y, "theta": p.theta })).collect();
    json!({
        "name": s.label(),
        "width": s.map.width(),
        "height": s.map.height(),
        "headings": s.headings,
        "rows": s.map.rows().collect::<Vec<_>>(),
        "candidates": candidates,
        "objects": s.objects.iter().map(|c| c.0).collect::<Vec<_>>(),
        "target": s.target,
        "starts": starts,
        "text": serialize_scenario(s),
    })
}

pub fn generate_json(difficulty: &str, seed: u64) -> Result<Value, String> {
    let difficulty: Difficulty = difficulty.parse()?;
    let s = generate_scenario(&GeneratorSpec::preset(difficulty, seed)).map_err(|e| e.to_string())?;
    Ok(scenario_json(&s))
}

pub fn visibility_json(scenario: &str, x: usize, y: usize, theta: usize) -> Result<Value, String> {
    let s = parse_scenario(scenario).map_err(|e| e.to_string())?;
    let world = s.world().map_err(|e| e.to_string())?;
    let id =
        world.graph.id_of(Pose::new(x, y, theta)).ok_or_else(|| format!("({x}, {y}, {theta}) is not a free pose"))?;
    let visible: Vec<Value> = world
        .vis
        .visible_from(id)
        .map(|c| {
            let (cx, cy) = world.candidates.cell(c);
            json!({ "candidate": c.0, "x": cx, "y": cy })
        })
        .collect();
    Ok(json!({ "visible": visible }))
}

pub fn episode_json(scenario: &str, policy: &str, start: usize, seed: u64, n_sim: usize) -> Result<Value, String> {
    let s = parse_scenario(scenario).map_err(|e| e.to_string())?;
    let world = s.world().map_err(|e| e.to_string())?;
    let policy: Policy = policy.parse()?;
    let (_, start_pose) = s.starts.get(start).ok_or_else(|| format!("no start pose {start}"))?;
    let mut cfg = EpisodeConfig::new(policy, world.graph.id_of(*start_pose).expect("validated start"), s.target, seed);
    cfg.solver = reference_solver();
    cfg.solver.n_sim = n_sim.clamp(1, MAX_SIMS);
    let mut steps = Vec::new();
    let result = run_episode_traced(&cfg, &world, &s.layout(), &mut |t| {
        let detection = match t.detection.source {
            Some(DetectionSource::TrueTarget) => "target",
            Some(DetectionSource::FalsePositive) => "false",
            None => "",
        };
        steps.push(json!({
            "phase": if t.phase == Phase::Exploration { "explore" } else { "dock" },
            "action": t.action.name(),
            "x": t.pose.x,
            "y": t.pose.y,
            "theta": t.pose.theta,
            "detection": detection,
        }));
    })
    .map_err(|e| e.to_string())?;
    Ok(json!({
        "success": result.success,
        "path_length": result.path_length,
        "exploration_length": result.exploration_length,
        "failure": result.failure_kind.to_string(),
        "shortest": result.shortest_length,
        "start": { "x": start_pose.x, "y": start_pose.y, "theta": start_pose.theta },
        "steps": steps,
    }))
}

fn js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

/// Scenario description as JSON, including its file text under `text`.
#[wasm_bindgen]
pub fn generate(difficulty: &str, seed: u32) -> Result<String, JsValue> {
    js(generate_json(difficulty, u64::from(seed)))
}

/// Candidate cells visible from a pose.
#[wasm_bindgen]
pub fn visible_from(scenario: &str, x: usize, y: usize, theta: usize) -> Result<String, JsValue> {
    js(visibility_json(scenario, x, y, theta))
}

/// One episode toward the scenario's target from its `start`-th start pose.
#[wasm_bindgen]
pub fn run_episode(scenario: &str, policy: &str, start: usize, seed: u32, n_sim: usize) -> Result<String, JsValue> {
    js(episode_json(scenario, policy, start, u64::from(seed), n_sim))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generate_describes_the_map() {
        let v = generate_json("easy", 3).unwrap();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), v["height"].as_u64().unwrap() as usize);
        assert!(v["text"].as_str().unwrap().starts_with("avs-scenario 1"));
        assert_eq!(v["objects"].as_array().unwrap().len(), 5);
        assert!(generate_json("impossible", 3).is_err());
    }

    #[test]
    fn visibility_lists_candidates() {
        let v = generate_json("easy", 3).unwrap();
        let text = v["text"].as_str().unwrap();
        let start = &v["starts"][0];
        let (x, y) = (start["x"].as_u64().unwrap() as usize, start["y"].as_u64().unwrap() as usize);
        let mut seen = 0;
        for theta in 0..8 {
            seen += visibility_json(text, x, y, theta).unwrap()["visible"].as_array().unwrap().len();
        }
        assert!(seen > 0, "a full turn sees something on an open map");
        assert!(visibility_json(text, 0, 0, 0).is_err(), "border walls are not poses");
    }

    #[test]
    fn episode_is_deterministic_and_consistent() {
        let v = generate_json("easy", 3).unwrap();
        let text = v["text"].as_str().unwrap();
        let a = episode_json(text, "pomp", 0, 9, 256).unwrap();
        assert_eq!(a, episode_json(text, "pomp", 0, 9, 256).unwrap());
        assert_eq!(a["steps"].as_array().unwrap().len(), a["path_length"].as_u64().unwrap() as usize);
        assert!(episode_json(text, "pomp", 99, 9, 256).is_err());
        assert!(episode_json(text, "greedy", 0, 9, 256).is_err());
    }
}
