use serde::{Deserialize, Serialize};

use crate::game::{Instance, Rational};
use crate::io::rational::{format_rational, to_decimal};
use crate::scheme::NucleolusResult;

/// Bumped whenever a report field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    pub eps: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_decimal: Option<String>,
    /// 1-based players of `S_j`; empty at level 1.
    pub chosen: Vec<usize>,
    pub cuts: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsReport {
    pub lp_solves: usize,
    pub oracle_calls: usize,
    pub cuts: usize,
    pub pivots: usize,
    pub wall_time_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub instance: Instance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoffs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoffs_decimal: Option<Vec<String>>,
    pub levels: Vec<LevelReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<StatsReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<String>>,
}

impl SolveReport {
    /// `rational` and `decimal` choose the payoff renderings; `decimal`
    /// carries the number of fractional digits.
    pub fn from_result(instance: &Instance, result: &NucleolusResult, rational: bool, decimal: Option<usize>) -> Self {
        let render = |values: &[Rational]| {
            (
                rational.then(|| values.iter().map(format_rational).collect()),
                decimal.map(|d| values.iter().map(|v| to_decimal(v, d)).collect()),
            )
        };
        let (payoffs, payoffs_decimal) = render(result.allocation.values());
        let levels = result
            .levels
            .iter()
            .map(|l| LevelReport {
                level: l.level,
                eps: format_rational(&l.eps),
                eps_decimal: decimal.map(|d| to_decimal(&l.eps, d)),
                chosen: l.chosen.as_ref().map(|s| s.labels()).unwrap_or_default(),
                cuts: l.cuts,
            })
            .collect();
        let s = &result.stats;
        SolveReport {
            schema_version: SCHEMA_VERSION,
            instance: instance.clone(),
            payoffs,
            payoffs_decimal,
            levels,
            stats: Some(StatsReport {
                lp_solves: s.lp_solves,
                oracle_calls: s.oracle_calls,
                cuts: s.cuts,
                pivots: s.pivots,
                wall_time_ms: s.wall_time.as_millis(),
            }),
            trace: (!result.trace.is_empty()).then(|| result.trace.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::solve_nucleolus;

    #[test]
    fn majority_report() {
        let g = Instance::new(vec![1, 1, 1], 2).unwrap();
        let res = solve_nucleolus(&g).unwrap();
        let report = SolveReport::from_result(&g, &res, true, Some(3));
        assert_eq!(report.payoffs.as_ref().unwrap(), &vec!["1/3".to_string(); 3]);
        assert_eq!(report.payoffs_decimal.as_ref().unwrap()[0], "0.333");
        assert_eq!(report.levels[0].eps, "-1/3");
        assert!(report.levels[0].chosen.is_empty());
        assert_eq!(report.levels[1].chosen.len(), 2);
        let json = report.to_json();
        let back: SolveReport = serde_json::from_str(&json).unwrap();
        let mut expected = report.clone();
        expected.stats = back.stats.clone();
        assert_eq!(back, expected);
        assert!(json.contains("\"schema_version\": 1"));
    }
}
