use super::HarnessError;
use crate::domain::PoseId;
use crate::perception::DetectorProfile;
use crate::scenario::Scenario;

/// Pose counts over every (map, target, pose) triple of a suite: poses that
/// see the target, and poses that see a distractor but not the target.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SightCounts {
    pub target: u64,
    pub distractor_only: u64,
}

pub fn sight_counts(suite: &[Scenario]) -> Result<SightCounts, HarnessError> {
    let mut counts = SightCounts::default();
    for s in suite {
        let world = s.world()?;
        let base = s.layout();
        for target in 0..base.placements.len() {
            let layout = base.with_target(target);
            let t = layout.target_cell();
            for p in 0..world.graph.len() {
                let p = PoseId(p as u32);
                if world.vis.get(p, t) {
                    counts.target += 1;
                } else if layout.distractors().any(|(_, c)| world.vis.get(p, c)) {
                    counts.distractor_only += 1;
                }
            }
        }
    }
    Ok(counts)
}

/// Expected fraction of emitted detections that name the true target when
/// every pose is equally likely.
pub fn expected_precision(counts: SightCounts, profile: &DetectorProfile) -> Option<f64> {
    let hits = (1.0 - profile.miss_rate) * counts.target as f64;
    let fps = profile.fp_rate * counts.distractor_only as f64;
    (hits + fps > 0.0).then(|| hits / (hits + fps))
}

/// [`DetectorProfile::realistic`] with the false-positive rate solved so
/// that [`expected_precision`] on `suite` equals `precision`, clamped to
/// [0, 1].
pub fn calibrate_realistic(suite: &[Scenario], precision: f64) -> Result<DetectorProfile, HarnessError> {
    if !(precision > 0.0 && precision <= 1.0) {
        return Err(HarnessError::Config(format!("precision {precision} outside (0, 1]")));
    }
    let counts = sight_counts(suite)?;
    let base = DetectorProfile::realistic(0.0);
    if counts.distractor_only == 0 {
        return Ok(base);
    }
    let hits = (1.0 - base.miss_rate) * counts.target as f64;
    let fp = hits * (1.0 - precision) / (precision * counts.distractor_only as f64);
    Ok(DetectorProfile::realistic(fp.clamp(0.0, 1.0)))
}
