//! Line-oriented scenario file.
//!
//! ```text
//! avs-scenario 1
//! name: kitchen-01
//! difficulty: easy
//! size: 3 3
//! headings: 8
//! fov: 90
//! max_range: 6
//! r_find: 100
//! r_step: -1
//! r_revisit: -25
//! move_budget: 200
//! objects: 0 1
//! target: 0
//! start s0: 1 1 0
//! grid:
//! C#C
//! ...
//! ...
//! ```
//!
//! Header keys may appear in any order; `;` starts a comment line. Object
//! placements are candidate indices in row-major order of the `C` cells.
//! Everything after `grid:` is the map, one row per line.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Difficulty, Scenario};
use crate::domain::{CandidateId, CandidateSet, Cell, DomainError, GridMap, Pose, RewardConfig, VisConfig};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "avs-scenario";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: missing `{MAGIC} <version>` header")]
    MissingHeader { line: usize },
    #[error("line {line}: unsupported format version {found}")]
    UnknownVersion { line: usize, found: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("line {line}: field `{field}` given twice")]
    DuplicateField { line: usize, field: String },
    #[error("line {line}: grid row is {found} cells wide, expected {expected}")]
    RowWidth { line: usize, expected: usize, found: usize },
    #[error("grid has {found} rows, expected {expected}")]
    RowCount { expected: usize, found: usize },
    #[error("line {line}, column {column}: invalid cell character {ch:?}")]
    InvalidCell { line: usize, column: usize, ch: char },
    #[error("line {line}: `{field}` refers to {index}, which does not exist")]
    DanglingIndex { line: usize, field: &'static str, index: usize },
    #[error("line {line}: candidate {index} holds two objects")]
    DuplicatePlacement { line: usize, index: usize },
    #[error("line {line}: start {name} = {pose} is not an empty cell with a valid heading")]
    InvalidStart { line: usize, name: String, pose: Pose },
    #[error("{0}")]
    Domain(#[from] DomainError),
}

#[derive(Default)]
struct Header {
    name: Option<String>,
    difficulty: Option<Difficulty>,
    size: Option<(usize, usize)>,
    headings: Option<usize>,
    fov: Option<f64>,
    max_range: Option<f64>,
    r_find: Option<f64>,
    r_step: Option<f64>,
    r_revisit: Option<f64>,
    move_budget: Option<usize>,
    objects: Option<(usize, Vec<usize>)>,
    target: Option<(usize, usize)>,
    starts: Vec<(usize, String, Pose)>,
}

fn num<T: std::str::FromStr>(line: usize, field: &str, s: &str) -> Result<T, ScenarioError> {
    s.parse().map_err(|_| ScenarioError::Syntax { line, message: format!("`{field}`: cannot parse {s:?}") })
}

fn nums<T: std::str::FromStr>(line: usize, field: &str, s: &str) -> Result<Vec<T>, ScenarioError> {
    s.split_whitespace().map(|t| num(line, field, t)).collect()
}

fn set<T>(slot: &mut Option<T>, value: T, line: usize, field: &str) -> Result<(), ScenarioError> {
    if slot.is_some() {
        return Err(ScenarioError::DuplicateField { line, field: field.to_string() });
    }
    *slot = Some(value);
    Ok(())
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (first_no, first) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with(';'))
        .ok_or(ScenarioError::MissingHeader { line: 1 })?;
    let mut parts = first.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(ScenarioError::MissingHeader { line: first_no });
    }
    let version = parts.next().unwrap_or("");
    if version != FORMAT_VERSION.to_string() || parts.next().is_some() {
        return Err(ScenarioError::UnknownVersion { line: first_no, found: version.to_string() });
    }

    let mut h = Header::default();
    let mut saw_grid = false;
    for (no, raw) in lines.by_ref() {
        let l = raw.trim();
        if l.is_empty() || l.starts_with(';') {
            continue;
        }
        if l == "grid:" {
            saw_grid = true;
            break;
        }
        let (key, value) = l
            .split_once(':')
            .ok_or_else(|| ScenarioError::Syntax { line: no, message: format!("expected `key: value`, got {l:?}") })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "name" => set(&mut h.name, value.to_string(), no, key)?,
            "difficulty" => {
                let d = value.parse().map_err(|message| ScenarioError::Syntax { line: no, message })?;
                set(&mut h.difficulty, d, no, key)?
            }
            "size" => match nums::<usize>(no, key, value)?[..] {
                [w, hgt] => set(&mut h.size, (w, hgt), no, key)?,
                _ => return Err(ScenarioError::Syntax { line: no, message: "`size` takes width and height".into() }),
            },
            "headings" => set(&mut h.headings, num(no, key, value)?, no, key)?,
            "fov" => set(&mut h.fov, num(no, key, value)?, no, key)?,
            "max_range" => set(&mut h.max_range, num(no, key, value)?, no, key)?,
            "r_find" => set(&mut h.r_find, num(no, key, value)?, no, key)?,
            "r_step" => set(&mut h.r_step, num(no, key, value)?, no, key)?,
            "r_revisit" => set(&mut h.r_revisit, num(no, key, value)?, no, key)?,
            "move_budget" => set(&mut h.move_budget, num(no, key, value)?, no, key)?,
            "objects" => set(&mut h.objects, (no, nums(no, key, value)?), no, key)?,
            "target" => set(&mut h.target, (no, num(no, key, value)?), no, key)?,
            _ if key.starts_with("start ") => {
                let name = key["start ".len()..].trim().to_string();
                match nums::<usize>(no, "start", value)?[..] {
                    [x, y, t] => h.starts.push((no, name, Pose::new(x, y, t))),
                    _ => return Err(ScenarioError::Syntax { line: no, message: "a start takes `x y heading`".into() }),
                }
            }
            _ => return Err(ScenarioError::Syntax { line: no, message: format!("unknown field `{key}`") }),
        }
    }

    if !saw_grid {
        return Err(ScenarioError::MissingField("grid"));
    }
    let (width, height) = h.size.ok_or(ScenarioError::MissingField("size"))?;
    let mut cells = Vec::with_capacity(width * height);
    let mut rows = 0;
    for (no, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let row = raw.trim();
        rows += 1;
        if rows > height {
            return Err(ScenarioError::RowCount { expected: height, found: rows });
        }
        let found = row.chars().count();
        if found != width {
            return Err(ScenarioError::RowWidth { line: no, expected: width, found });
        }
        for (i, ch) in row.chars().enumerate() {
            cells.push(Cell::from_char(ch).ok_or(ScenarioError::InvalidCell { line: no, column: i + 1, ch })?);
        }
    }
    if rows != height {
        return Err(ScenarioError::RowCount { expected: height, found: rows });
    }
    let map = GridMap::new(width, height, cells)?;
    map.validate_for_search()?;
    let candidates = CandidateSet::from_map(&map);

    let headings = h.headings.ok_or(ScenarioError::MissingField("headings"))?;
    if headings == 0 {
        return Err(DomainError::NoHeadings.into());
    }
    let vis = VisConfig {
        fov: h.fov.ok_or(ScenarioError::MissingField("fov"))?,
        max_range: h.max_range.ok_or(ScenarioError::MissingField("max_range"))?,
    };
    vis.validate()?;
    let rewards = RewardConfig {
        r_find: h.r_find.ok_or(ScenarioError::MissingField("r_find"))?,
        r_step: h.r_step.ok_or(ScenarioError::MissingField("r_step"))?,
        r_revisit: h.r_revisit.ok_or(ScenarioError::MissingField("r_revisit"))?,
        move_budget: h.move_budget.ok_or(ScenarioError::MissingField("move_budget"))?,
    };
    rewards.validate()?;

    let (obj_no, raw_objects) = h.objects.ok_or(ScenarioError::MissingField("objects"))?;
    if raw_objects.is_empty() {
        return Err(DomainError::NoObjects.into());
    }
    let mut objects = Vec::with_capacity(raw_objects.len());
    for &i in &raw_objects {
        if i >= candidates.len() {
            return Err(ScenarioError::DanglingIndex { line: obj_no, field: "objects", index: i });
        }
        if raw_objects.iter().filter(|&&j| j == i).count() > 1 {
            return Err(ScenarioError::DuplicatePlacement { line: obj_no, index: i });
        }
        objects.push(CandidateId(i as u32));
    }
    let (target_no, target) = h.target.ok_or(ScenarioError::MissingField("target"))?;
    if target >= objects.len() {
        return Err(ScenarioError::DanglingIndex { line: target_no, field: "target", index: target });
    }

    let mut starts = Vec::with_capacity(h.starts.len());
    for (no, name, pose) in h.starts {
        let ok = pose.x < width && pose.y < height && pose.theta < headings && map.get(pose.x, pose.y) == Cell::Empty;
        if !ok {
            return Err(ScenarioError::InvalidStart { line: no, name, pose });
        }
        if starts.iter().any(|(n, _): &(String, Pose)| *n == name) {
            return Err(ScenarioError::DuplicateField { line: no, field: format!("start {name}") });
        }
        starts.push((name, pose));
    }

    Ok(Scenario { name: h.name, difficulty: h.difficulty, map, headings, vis, rewards, objects, target, starts })
}

/// Canonical text: fixed key order, no comments, one trailing newline.
pub fn serialize_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {FORMAT_VERSION}");
    if let Some(name) = &s.name {
        let _ = writeln!(out, "name: {name}");
    }
    if let Some(d) = s.difficulty {
        let _ = writeln!(out, "difficulty: {d}");
    }
    let _ = writeln!(out, "size: {} {}", s.map.width(), s.map.height());
    let _ = writeln!(out, "headings: {}", s.headings);
    let _ = writeln!(out, "fov: {}", s.vis.fov);
    let _ = writeln!(out, "max_range: {}", s.vis.max_range);
    let _ = writeln!(out, "r_find: {}", s.rewards.r_find);
    let _ = writeln!(out, "r_step: {}", s.rewards.r_step);
    let _ = writeln!(out, "r_revisit: {}", s.rewards.r_revisit);
    let _ = writeln!(out, "move_budget: {}", s.rewards.move_budget);
    let objects: Vec<String> = s.objects.iter().map(|c| c.0.to_string()).collect();
    let _ = writeln!(out, "objects: {}", objects.join(" "));
    let _ = writeln!(out, "target: {}", s.target);
    for (name, p) in &s.starts {
        let _ = writeln!(out, "start {name}: {} {} {}", p.x, p.y, p.theta);
    }
    out.push_str("grid:\n");
    for row in s.map.rows() {
        out.push_str(&row);
        out.push('\n');
    }
    out
}
