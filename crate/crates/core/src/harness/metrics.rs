use std::fmt;

use super::{EpisodeResult, HarnessError};

/// Aggregate scores over a batch of episodes. Path statistics cover
/// successful episodes only and are `None` when there are none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsSummary {
    pub episodes: usize,
    pub successes: usize,
    pub sr: f64,
    pub apl: Option<f64>,
    pub asppl_mean: Option<f64>,
    /// Population standard deviation.
    pub asppl_std: Option<f64>,
}

/// Shortest-to-actual ratio of one successful episode, in (0, 1]. A zero
/// oracle length counts as one move so the ratio stays positive.
pub fn asppl_ratio(shortest: u32, path_length: usize) -> f64 {
    let actual = path_length.max(1) as f64;
    (f64::from(shortest.max(1)) / actual).min(1.0)
}

pub fn compute_metrics(results: &[EpisodeResult]) -> Result<MetricsSummary, HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::NoEpisodes);
    }
    let wins: Vec<&EpisodeResult> = results.iter().filter(|r| r.success).collect();
    let sr = wins.len() as f64 / results.len() as f64;
    if wins.is_empty() {
        return Ok(MetricsSummary {
            episodes: results.len(),
            successes: 0,
            sr,
            apl: None,
            asppl_mean: None,
            asppl_std: None,
        });
    }
    let n = wins.len() as f64;
    let apl = wins.iter().map(|r| r.path_length as f64).sum::<f64>() / n;
    let ratios: Vec<f64> = wins
        .iter()
        .map(|r| {
            asppl_ratio(r.shortest_length.expect("a successful episode has a reachable destination"), r.path_length)
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / n;
    let var = ratios.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Ok(MetricsSummary {
        episodes: results.len(),
        successes: wins.len(),
        sr,
        apl: Some(apl),
        asppl_mean: Some(mean),
        asppl_std: Some(var.sqrt()),
    })
}

/// `SR / APL / ASPPL (std)`, e.g. `0.76 / 17.1 / 0.75 (0.29)`.
impl fmt::Display for MetricsSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} / ", self.sr)?;
        match (self.apl, self.asppl_mean, self.asppl_std) {
            (Some(apl), Some(m), Some(s)) => write!(f, "{apl:.1} / {m:.2} ({s:.2})"),
            _ => write!(f, "- / - (-)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::FailureKind;

    fn ep(success: bool, path: usize, shortest: u32) -> EpisodeResult {
        EpisodeResult {
            success,
            path_length: path,
            exploration_length: 0,
            trajectory: Vec::new(),
            failure_kind: if success { FailureKind::None } else { FailureKind::MoveBudget },
            detected: success,
            shortest_length: Some(shortest),
        }
    }

    #[test]
    fn three_of_four() {
        let m = compute_metrics(&[ep(true, 10, 5), ep(true, 5, 5), ep(false, 200, 3), ep(true, 6, 3)]).unwrap();
        assert_eq!(m.sr, 0.75);
        assert_eq!(m.successes, 3);
        assert!((m.apl.unwrap() - 7.0).abs() < 1e-12);
        assert!((m.asppl_mean.unwrap() - (0.5 + 1.0 + 0.5) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(asppl_ratio(5, 10), 0.5);
        assert_eq!(asppl_ratio(7, 7), 1.0);
        assert_eq!(asppl_ratio(0, 0), 1.0);
        assert!(asppl_ratio(0, 4) > 0.0);
    }

    #[test]
    fn no_successes() {
        let m = compute_metrics(&[ep(false, 3, 1)]).unwrap();
        assert_eq!(m.sr, 0.0);
        assert_eq!((m.apl, m.asppl_mean), (None, None));
        assert_eq!(m.to_string(), "0.00 / - / - (-)");
        assert!(matches!(compute_metrics(&[]), Err(HarnessError::NoEpisodes)));
    }

    #[test]
    fn table_row_format() {
        let m = MetricsSummary {
            episodes: 100,
            successes: 76,
            sr: 0.76,
            apl: Some(17.1),
            asppl_mean: Some(0.75),
            asppl_std: Some(0.29),
        };
        assert_eq!(m.to_string(), "0.76 / 17.1 / 0.75 (0.29)");
    }

    #[test]
    fn population_std() {
        let m = compute_metrics(&[ep(true, 2, 1), ep(true, 1, 1)]).unwrap();
        assert!((m.asppl_std.unwrap() - 0.25).abs() < 1e-12);
    }
}
