//! The planner proper.
//!
//! A query pair is first classified by the strata of its two configurations,
//! `(i, j)`, which selects one of the `2n + 1` domains of continuity
//! `ell = i + j`. The path is then glued from three pieces on thirds of
//! `[0, 1]`:
//!
//! 1. the start component of [`Sigma`], deforming the start onto the obstacle
//!    line;
//! 2. the colinear section between the two deformed configurations, which
//!    lifts robot `i` to height `i` along `nu(e)`, slides it across, and lowers
//!    it again;
//! 3. the goal component of [`Sigma`], run backwards.
//!
//! Every piece is affine in time between a fixed set of breakpoints, so paths
//! are evaluated exactly rather than stored as polylines.

use serde::{Deserialize, Serialize};

use crate::configspace::{
    cp_count, is_colinear, validate_query_pair, Configuration, QueryPair, DEFAULT_DISTINCT_TOL,
};
use crate::deformations::{check_time, Sigma};
use crate::error::{PlanError, PointLabel, Result};
use crate::geometry::nu;

/// Residual tolerance, relative to `max(1, |o2 - o1|)`, for accepting a
/// configuration as colinear.
pub const COLINEAR_TOL: f64 = 1e-9;

/// Domain of continuity `W_ell` together with the strata `(i, j)` of the start
/// and goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegionIndex {
    pub i: usize,
    pub j: usize,
}

impl RegionIndex {
    pub fn ell(&self) -> usize {
        self.i + self.j
    }

    /// All labels `4..=2n+4` that a planner for `n` robots can produce.
    pub fn labels(n: usize) -> std::ops::RangeInclusive<usize> {
        4..=2 * n + 4
    }
}

impl std::fmt::Display for RegionIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "i={} j={} ell={}", self.i, self.j, self.ell())
    }
}

/// A path through configurations with both obstacles held fixed.
pub trait Trajectory: Send + Sync {
    fn query(&self) -> &QueryPair;

    /// Writes the configuration at `t` into a flat buffer shaped like the
    /// query's configurations. `t` must lie in `[0, 1]`; it is not checked.
    fn eval_into(&self, t: f64, out: &mut [f64]);

    /// Sorted times, including `0` and `1`, between which every point moves
    /// affinely in `t`.
    fn breakpoints(&self) -> Vec<f64>;

    fn eval(&self, t: f64) -> Result<Configuration> {
        check_time(t)?;
        let mut out = self.query().start().clone();
        self.eval_into(t, out.coords_mut());
        Ok(out)
    }

    /// `samples` evaluations on the uniform grid `k / (samples - 1)`.
    fn sample(&self, samples: usize) -> Result<Vec<(f64, Configuration)>> {
        if samples < 2 {
            return Err(PlanError::InvalidSampleCount(samples));
        }
        let last = (samples - 1) as f64;
        (0..samples)
            .map(|k| {
                let t = k as f64 / last;
                self.eval(t).map(|c| (t, c))
            })
            .collect()
    }
}

/// `(1 - t) a + t b`, exact at both ends.
#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    (1.0 - t) * a + t * b
}

/// Explicit planner on pairs of colinear configurations.
#[derive(Debug, Clone)]
pub struct ColinearSection {
    d: usize,
    obstacles: Vec<f64>,
    start: Vec<f64>,
    goal: Vec<f64>,
    // nu(e), unit and orthogonal to the obstacle line.
    lift: Vec<f64>,
}

impl ColinearSection {
    /// Both configurations must be colinear within `COLINEAR_TOL` and share
    /// the obstacle block.
    pub fn new(p: &QueryPair) -> Result<Self> {
        let (s, g) = (p.start(), p.goal());
        if s.obstacle_block() != g.obstacle_block() {
            return Err(PlanError::ObstacleMismatch);
        }
        let line = s.line()?;
        let lift = nu(line.direction())?.into_inner();
        let tol = COLINEAR_TOL * crate::geometry::distance(s.obstacle(0), s.obstacle(1)).max(1.0);
        for c in [s, g] {
            for (i, x) in c.robots().enumerate() {
                let residual = line.residual(x)?;
                if residual > tol {
                    return Err(PlanError::NotColinear {
                        point: PointLabel::Robot(i + 1),
                        residual,
                    });
                }
            }
        }
        let d = s.d();
        Ok(ColinearSection {
            d,
            obstacles: s.obstacle_block().to_vec(),
            start: s.coords()[2 * d..].to_vec(),
            goal: g.coords()[2 * d..].to_vec(),
            lift,
        })
    }

    /// The lift direction `nu(e)`.
    pub fn lift(&self) -> &[f64] {
        &self.lift
    }

    /// Unchecked evaluation into a flat configuration buffer.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let d = self.d;
        out[..2 * d].copy_from_slice(&self.obstacles);
        let s = 3.0 * t;
        let robots = out[2 * d..]
            .chunks_exact_mut(d)
            .zip(self.start.chunks_exact(d).zip(self.goal.chunks_exact(d)));
        for (idx, (o, (x, xg))) in robots.enumerate() {
            let index = (idx + 1) as f64;
            if s <= 1.0 {
                let h = s * index;
                for k in 0..d {
                    o[k] = x[k] + h * self.lift[k];
                }
            } else if s <= 2.0 {
                let u = s - 1.0;
                for k in 0..d {
                    let up = index * self.lift[k];
                    o[k] = lerp(x[k] + up, xg[k] + up, u);
                }
            } else {
                let h = index * (3.0 - s);
                for k in 0..d {
                    o[k] = xg[k] + h * self.lift[k];
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
enum PathKind {
    Section(ColinearSection),
    Glued {
        sigma: Box<Sigma>,
        section: ColinearSection,
    },
}

/// A planned path: an exact evaluator over the query data, tagged with its
/// domain of continuity.
#[derive(Debug, Clone)]
pub struct PlannedPath {
    query: QueryPair,
    region: RegionIndex,
    kind: PathKind,
}

impl PlannedPath {
    pub fn region(&self) -> RegionIndex {
        self.region
    }

    /// Configuration at time `t`.
    pub fn evaluate(&self, t: f64) -> Result<Configuration> {
        self.eval(t)
    }
}

impl Trajectory for PlannedPath {
    fn query(&self) -> &QueryPair {
        &self.query
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        match &self.kind {
            PathKind::Section(section) => section.eval_into(t, out),
            PathKind::Glued { sigma, section } => {
                let s = 3.0 * t;
                if s <= 1.0 {
                    sigma.start().eval_into(s, out);
                } else if s <= 2.0 {
                    section.eval_into(s - 1.0, out);
                } else {
                    sigma.goal().eval_into(3.0 - s, out);
                }
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self.kind {
            PathKind::Section(_) => vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
            PathKind::Glued { .. } => vec![
                0.0,
                1.0 / 6.0,
                1.0 / 3.0,
                4.0 / 9.0,
                5.0 / 9.0,
                2.0 / 3.0,
                5.0 / 6.0,
                1.0,
            ],
        }
    }
}

/// The explicit section on a pair of colinear configurations.
pub fn colinear_section(p: &QueryPair) -> Result<PlannedPath> {
    let section = ColinearSection::new(p)?;
    let top = p.n() + 2;
    Ok(PlannedPath {
        query: p.clone(),
        region: RegionIndex { i: top, j: top },
        kind: PathKind::Section(section),
    })
}

/// Strata of start and goal. Assumes `p` is a valid query pair.
pub fn classify(p: &QueryPair, proj_tol: f64) -> Result<RegionIndex> {
    Ok(RegionIndex {
        i: cp_count(p.start(), proj_tol)?.get(),
        j: cp_count(p.goal(), proj_tol)?.get(),
    })
}

/// Deform both ends onto the obstacle line, cross with the colinear section,
/// and deform back. Assumes `p` is a valid query pair.
pub fn glue(p: &QueryPair, proj_tol: f64) -> Result<PlannedPath> {
    let sigma = Sigma::new(p, proj_tol)?;
    let ends = QueryPair::new(sigma.start().eval(1.0)?, sigma.goal().eval(1.0)?);
    let section = ColinearSection::new(&ends)?;
    Ok(PlannedPath {
        query: p.clone(),
        region: classify(p, proj_tol)?,
        kind: PathKind::Glued {
            sigma: Box::new(sigma),
            section,
        },
    })
}

/// Validates the query and plans a collision-free path with fixed obstacles.
pub fn plan(p: &QueryPair, proj_tol: f64) -> Result<PlannedPath> {
    validate_query_pair(p, DEFAULT_DISTINCT_TOL)?;
    glue(p, proj_tol)
}

/// Whether every robot of both configurations is on the obstacle line.
pub fn is_colinear_pair(p: &QueryPair, tol: f64) -> Result<bool> {
    Ok(is_colinear(p.start(), tol)? && is_colinear(p.goal(), tol)?)
}

/// Uniform-grid samples of a path, endpoints included.
pub fn sample(path: &dyn Trajectory, samples: usize) -> Result<Vec<(f64, Configuration)>> {
    path.sample(samples)
}

/// Straight-line interpolation of every robot. Only a baseline: it ignores
/// collisions.
#[derive(Debug, Clone)]
pub struct StraightLinePath {
    query: QueryPair,
}

pub fn straight_line_plan(p: &QueryPair) -> StraightLinePath {
    StraightLinePath { query: p.clone() }
}

impl Trajectory for StraightLinePath {
    fn query(&self) -> &QueryPair {
        &self.query
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        let d = self.query.d();
        let (s, g) = (self.query.start().coords(), self.query.goal().coords());
        out[..2 * d].copy_from_slice(&s[..2 * d]);
        for ((o, a), b) in out[2 * d..].iter_mut().zip(&s[2 * d..]).zip(&g[2 * d..]) {
            *o = lerp(*a, *b, t);
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![0.0, 1.0]
    }
}
