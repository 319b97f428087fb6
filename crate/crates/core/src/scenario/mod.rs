//! Scenario files and the procedural map generator.

mod format;
mod generate;

pub use format::{parse_scenario, serialize_scenario, ScenarioError, FORMAT_VERSION};
pub use generate::{flood_fill_connected, generate_scenario, reference_suite, GenerateError, GeneratorSpec};

use std::fmt;
use std::str::FromStr;

use crate::domain::{AvsWorld, CandidateId, DomainError, GridMap, ObjectLayout, Pose, PoseId, RewardConfig, VisConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        })
    }
}

impl FromStr for Difficulty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            _ => Err(format!("unknown difficulty {s:?} (expected easy, medium or hard)")),
        }
    }
}

/// A validated scenario: map, sensing and reward settings, object
/// placements and named start poses.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub difficulty: Option<Difficulty>,
    pub map: GridMap,
    pub headings: usize,
    pub vis: VisConfig,
    pub rewards: RewardConfig,
    /// Candidate index of each object.
    pub objects: Vec<CandidateId>,
    /// Default target object.
    pub target: usize,
    pub starts: Vec<(String, Pose)>,
}

impl Scenario {
    pub fn world(&self) -> Result<AvsWorld, DomainError> {
        AvsWorld::new(self.map.clone(), self.headings, self.vis, self.rewards)
    }

    pub fn layout(&self) -> ObjectLayout {
        ObjectLayout { placements: self.objects.clone(), target: self.target }
    }

    pub fn start_ids(&self, world: &AvsWorld) -> Vec<PoseId> {
        self.starts.iter().map(|(_, p)| world.graph.id_of(*p).expect("start poses are validated")).collect()
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| "unnamed".to_string())
    }
}
