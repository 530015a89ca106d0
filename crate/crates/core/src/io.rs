//! File formats: instance JSON and trajectory CSV/JSON.
//!
//! An instance carries one obstacle block shared by start and goal. The
//! two-block form (`start_obstacles` / `goal_obstacles`) is also accepted,
//! in which case the blocks must match bit for bit when validated.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::configspace::{Configuration, QueryPair};
use crate::error::{PlanError, Result};
use crate::planner::RegionIndex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub d: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstacles: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_obstacles: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_obstacles: Option<Vec<Vec<f64>>>,
    pub start: Vec<Vec<f64>>,
    pub goal: Vec<Vec<f64>>,
}

impl InstanceFile {
    pub fn from_query(p: &QueryPair) -> Self {
        let rows = |c: &Configuration| c.robots().map(<[f64]>::to_vec).collect::<Vec<_>>();
        InstanceFile {
            d: p.d(),
            n: p.n(),
            obstacles: Some(p.start().points().take(2).map(<[f64]>::to_vec).collect()),
            start_obstacles: None,
            goal_obstacles: None,
            start: rows(p.start()),
            goal: rows(p.goal()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| PlanError::MalformedInstance(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }

    /// Checks array shapes and assembles the (unvalidated) query pair.
    pub fn to_query(&self) -> Result<QueryPair> {
        let start_obs = self
            .start_obstacles
            .as_ref()
            .or(self.obstacles.as_ref())
            .ok_or_else(|| PlanError::MalformedInstance("missing obstacles".into()))?;
        let goal_obs = self
            .goal_obstacles
            .as_ref()
            .or(self.obstacles.as_ref())
            .ok_or_else(|| PlanError::MalformedInstance("missing obstacles".into()))?;
        let start = self.assemble(start_obs, &self.start, "start")?;
        let goal = self.assemble(goal_obs, &self.goal, "goal")?;
        Ok(QueryPair::new(start, goal))
    }

    fn assemble(&self, obstacles: &[Vec<f64>], robots: &[Vec<f64>], what: &str) -> Result<Configuration> {
        if obstacles.len() != 2 {
            return Err(PlanError::MalformedInstance(format!(
                "expected 2 obstacles, found {}",
                obstacles.len()
            )));
        }
        if robots.len() != self.n {
            return Err(PlanError::MalformedInstance(format!(
                "expected {} {what} robots, found {}",
                self.n,
                robots.len()
            )));
        }
        let mut coords = Vec::with_capacity((self.n + 2) * self.d);
        for p in obstacles.iter().chain(robots) {
            if p.len() != self.d {
                return Err(PlanError::DimensionMismatch {
                    expected: self.d,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Configuration::from_flat(self.d, coords)
    }
}

/// Column names: `t, o1_0.., o2_0.., x1_0.., .., xn_{d-1}`.
pub fn trajectory_columns(d: usize, n: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    let names = ["o1".to_string(), "o2".to_string()]
        .into_iter()
        .chain((1..=n).map(|i| format!("x{i}")));
    for name in names {
        for k in 0..d {
            cols.push(format!("{name}_{k}"));
        }
    }
    cols
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trajectory_csv<W: Write>(out: &mut W, samples: &[(f64, Configuration)]) -> std::io::Result<()> {
    let Some((_, first)) = samples.first() else {
        return Ok(());
    };
    writeln!(out, "{}", trajectory_columns(first.d(), first.n()).join(","))?;
    for (t, c) in samples {
        let mut row = Vec::with_capacity(c.coords().len() + 1);
        row.push(format_real(*t));
        row.extend(c.coords().iter().map(|&x| format_real(x)));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryJson {
    pub columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionIndexJson>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionIndexJson {
    pub i: usize,
    pub j: usize,
    pub ell: usize,
}

impl From<RegionIndex> for RegionIndexJson {
    fn from(r: RegionIndex) -> Self {
        RegionIndexJson { i: r.i, j: r.j, ell: r.ell() }
    }
}

pub fn trajectory_json(samples: &[(f64, Configuration)], region: Option<RegionIndex>) -> TrajectoryJson {
    let columns = samples
        .first()
        .map(|(_, c)| trajectory_columns(c.d(), c.n()))
        .unwrap_or_default();
    let rows = samples
        .iter()
        .map(|(t, c)| std::iter::once(*t).chain(c.coords().iter().copied()).collect())
        .collect();
    TrajectoryJson {
        columns,
        region: region.map(Into::into),
        rows,
    }
}

/// Parses a trajectory CSV back into `(header, rows)`.
pub fn read_trajectory_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| PlanError::MalformedInstance("empty trajectory".into()))?
        .split(',')
        .map(str::to_string)
        .collect::<Vec<_>>();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',')
                .map(|f| f.parse::<f64>().map_err(|e| PlanError::MalformedInstance(e.to_string())))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SAMPLE: &str = r#"{
        "d": 2, "n": 1,
        "obstacles": [[0.0, 0.0], [1.0, 0.0]],
        "start": [[2.0, 0.0]],
        "goal": [[-1.0, 0.5]]
    }"#;

    #[test]
    fn parses_single_block() {
        let q = InstanceFile::from_json(SAMPLE).unwrap().to_query().unwrap();
        assert_eq!(q.start().obstacle_block(), q.goal().obstacle_block());
        assert_eq!(q.goal().robot(0), &[-1.0, 0.5]);
    }

    #[test]
    fn two_block_form_keeps_both_blocks() {
        let text = r#"{"d": 2, "n": 1,
            "start_obstacles": [[0.0, 0.0], [1.0, 0.0]],
            "goal_obstacles": [[0.0, 0.0], [1.0, 1e-6]],
            "start": [[2.0, 0.0]], "goal": [[3.0, 0.0]]}"#;
        let q = InstanceFile::from_json(text).unwrap().to_query().unwrap();
        assert_ne!(q.start().obstacle_block(), q.goal().obstacle_block());
    }

    #[test]
    fn shape_errors() {
        let text = r#"{"d": 2, "n": 2, "obstacles": [[0,0],[1,0]], "start": [[2,0]], "goal": [[3,0]]}"#;
        assert_eq!(InstanceFile::from_json(text).unwrap().to_query().unwrap_err().name(), "MalformedInstance");
        let text = r#"{"d": 2, "n": 1, "obstacles": [[0,0],[1,0,0]], "start": [[2,0]], "goal": [[3,0]]}"#;
        assert_eq!(InstanceFile::from_json(text).unwrap().to_query().unwrap_err().name(), "DimensionMismatch");
        assert!(InstanceFile::from_json("{").is_err());
    }

    #[test]
    fn columns() {
        assert_eq!(
            trajectory_columns(2, 1),
            vec!["t", "o1_0", "o1_1", "o2_0", "o2_1", "x1_0", "x1_1"]
        );
    }

    #[test]
    fn csv_writer_round_trips() {
        let q = InstanceFile::from_json(SAMPLE).unwrap().to_query().unwrap();
        let samples = vec![(0.0, q.start().clone()), (1.0, q.goal().clone())];
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &samples).unwrap();
        let (header, rows) = read_trajectory_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(header.len(), 7);
        assert_eq!(&rows[1][1..], q.goal().coords());
    }

    proptest! {
        #[test]
        fn real_formatting_is_lossless(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
        }

        #[test]
        fn instance_json_round_trips(coords in prop::collection::vec(-1e3f64..1e3, 8)) {
            let start = Configuration::from_flat(2, coords[..6].to_vec()).unwrap();
            let mut goal_coords = coords[..4].to_vec();
            goal_coords.extend_from_slice(&coords[6..]);
            let goal = Configuration::from_flat(2, goal_coords).unwrap();
            let q = QueryPair::new(start, goal);
            let back = InstanceFile::from_json(&InstanceFile::from_query(&q).to_json()).unwrap();
            prop_assert_eq!(back.to_query().unwrap(), q);
        }
    }
}
