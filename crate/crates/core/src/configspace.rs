//! Configurations of two obstacles and `n` robots, query pairs that share an
//! obstacle block, and the projection stratification.
//!
//! A configuration `C = (o1, o2, x1, .., xn)` belongs to the stratum `A_i`
//! when the orthogonal projections of its `n + 2` points onto the obstacle
//! line take exactly `i` distinct values. Projections are compared through
//! their signed coordinate along the line, clustered with a tolerance.

use crate::error::{PlanError, PointLabel, Result};
use crate::geometry::{distance, line_of, OrientedLine, Point};

/// Default distinctness tolerance for configuration points.
pub const DEFAULT_DISTINCT_TOL: f64 = 1e-9;
/// Default relative tolerance for treating two projections as equal.
pub const DEFAULT_PROJ_TOL: f64 = 1e-9;

/// `(o1, o2, x1, .., xn)` stored as one flat row-major coordinate buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    d: usize,
    coords: Vec<f64>,
}

impl Configuration {
    pub fn new(obstacles: [Point; 2], robots: Vec<Point>) -> Result<Self> {
        if robots.is_empty() {
            return Err(PlanError::EmptyConfiguration);
        }
        let d = obstacles[0].dim();
        let mut coords = Vec::with_capacity((robots.len() + 2) * d);
        for p in obstacles.iter().chain(robots.iter()) {
            if p.dim() != d {
                return Err(PlanError::DimensionMismatch {
                    expected: d,
                    found: p.dim(),
                });
            }
            coords.extend_from_slice(p);
        }
        Ok(Configuration { d, coords })
    }

    /// Builds from a flat buffer of `(n + 2) * d` coordinates.
    pub fn from_flat(d: usize, coords: Vec<f64>) -> Result<Self> {
        if d == 0 || coords.len() % d != 0 {
            return Err(PlanError::MalformedInstance(format!(
                "{} coordinates do not split into points of dimension {d}",
                coords.len()
            )));
        }
        if coords.len() / d < 3 {
            return Err(PlanError::EmptyConfiguration);
        }
        Ok(Configuration { d, coords })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of robots.
    pub fn n(&self) -> usize {
        self.coords.len() / self.d - 2
    }

    /// Number of points, obstacles included.
    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `k`-th point of `o1, o2, x1, .., xn` (0-based).
    pub fn point(&self, k: usize) -> &[f64] {
        &self.coords[k * self.d..(k + 1) * self.d]
    }

    /// Obstacle `k` in `{0, 1}`.
    pub fn obstacle(&self, k: usize) -> &[f64] {
        assert!(k < 2, "only two obstacles");
        self.point(k)
    }

    /// Robot `i`, 0-based (robot `x_{i+1}`).
    pub fn robot(&self, i: usize) -> &[f64] {
        self.point(i + 2)
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.d)
    }

    pub fn robots(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords[2 * self.d..].chunks_exact(self.d)
    }

    /// The obstacle block `o1, o2` as `2d` flat coordinates.
    pub fn obstacle_block(&self) -> &[f64] {
        &self.coords[..2 * self.d]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub(crate) fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    /// Oriented line through the obstacles.
    pub fn line(&self) -> Result<OrientedLine> {
        line_of(self.obstacle(0), self.obstacle(1))
    }

    /// Smallest pairwise distance and the pair attaining it.
    pub fn min_separation(&self) -> (f64, PointLabel, PointLabel) {
        let mut best = (f64::INFINITY, 0, 1);
        let k = self.len();
        for a in 0..k {
            for b in a + 1..k {
                let dist = distance(self.point(a), self.point(b));
                if dist < best.0 {
                    best = (dist, a, b);
                }
            }
        }
        (
            best.0,
            PointLabel::from_index(best.1),
            PointLabel::from_index(best.2),
        )
    }

    /// Robots as owned points.
    pub fn robot_points(&self) -> Vec<Point> {
        self.robots().map(Point::from).collect()
    }

    pub fn obstacle_points(&self) -> [Point; 2] {
        [Point::from(self.obstacle(0)), Point::from(self.obstacle(1))]
    }
}

/// A start and goal configuration sharing the same ordered obstacle pair.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPair {
    start: Configuration,
    goal: Configuration,
}

impl QueryPair {
    /// Pairs two configurations without validating them; see
    /// [`validate_query_pair`].
    pub fn new(start: Configuration, goal: Configuration) -> Self {
        QueryPair { start, goal }
    }

    pub fn start(&self) -> &Configuration {
        &self.start
    }

    pub fn goal(&self) -> &Configuration {
        &self.goal
    }

    pub fn d(&self) -> usize {
        self.start.d()
    }

    pub fn n(&self) -> usize {
        self.start.n()
    }

    pub fn into_parts(self) -> (Configuration, Configuration) {
        (self.start, self.goal)
    }
}

/// The value of `cp` for a configuration, always in `2..=n+2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Stratum(pub usize);

impl Stratum {
    pub fn get(self) -> usize {
        self.0
    }
}

pub fn validate_configuration(c: &Configuration, tol: f64) -> Result<()> {
    for (k, p) in c.points().enumerate() {
        if let Some(coord) = p.iter().position(|v| !v.is_finite()) {
            return Err(PlanError::NonFinite {
                point: PointLabel::from_index(k),
                coord,
            });
        }
    }
    if c.d() < 2 || c.d() % 2 != 0 {
        return Err(PlanError::OddDimension(c.d()));
    }
    let k = c.len();
    for a in 0..k {
        for b in a + 1..k {
            let dist = distance(c.point(a), c.point(b));
            if !(dist > tol) {
                return Err(PlanError::CollidingPoints {
                    first: PointLabel::from_index(a),
                    second: PointLabel::from_index(b),
                    distance: dist,
                    tol,
                });
            }
        }
    }
    Ok(())
}

pub fn validate_query_pair(p: &QueryPair, tol: f64) -> Result<()> {
    let (s, g) = (p.start(), p.goal());
    if s.d() != g.d() {
        return Err(PlanError::DimensionMismatch {
            expected: s.d(),
            found: g.d(),
        });
    }
    if s.n() != g.n() {
        return Err(PlanError::RobotCountMismatch {
            start: s.n(),
            goal: g.n(),
        });
    }
    validate_configuration(s, tol)?;
    validate_configuration(g, tol)?;
    if s.obstacle_block() != g.obstacle_block() {
        return Err(PlanError::ObstacleMismatch);
    }
    Ok(())
}

/// One group of projections considered equal.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionClass {
    /// Mean signed coordinate of the members.
    pub mean: f64,
    /// Indices into `o1, o2, x1, .., xn`.
    pub members: Vec<usize>,
}

/// Projections of all `n + 2` points, clustered and sorted along the line.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionClasses {
    pub classes: Vec<ProjectionClass>,
    /// Signed coordinate of every point, indexed like the configuration.
    pub lambdas: Vec<f64>,
}

/// Clusters the projections by single linkage over sorted values: adjacent
/// values within `proj_tol * max(1, |o2 - o1|)` share a class.
pub fn projection_classes(c: &Configuration, proj_tol: f64) -> Result<ProjectionClasses> {
    let line = c.line()?;
    let lambdas: Vec<f64> = c.points().map(|p| line.lambda(p)).collect();
    let scale = distance(c.obstacle(0), c.obstacle(1)).max(1.0);
    let threshold = proj_tol * scale;

    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[a].total_cmp(&lambdas[b]).then(a.cmp(&b)));

    let mut classes: Vec<ProjectionClass> = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for k in order {
        let lam = lambdas[k];
        match classes.last_mut() {
            Some(class) if lam - prev <= threshold => class.members.push(k),
            _ => classes.push(ProjectionClass {
                mean: 0.0,
                members: vec![k],
            }),
        }
        prev = lam;
    }
    for class in &mut classes {
        class.mean =
            class.members.iter().map(|&k| lambdas[k]).sum::<f64>() / class.members.len() as f64;
    }
    debug_assert!(
        classes.len() >= 2,
        "obstacle projections merged; threshold {threshold:e}"
    );
    Ok(ProjectionClasses { classes, lambdas })
}

/// Number of distinct projections onto the obstacle line.
pub fn cp_count(c: &Configuration, proj_tol: f64) -> Result<Stratum> {
    Ok(Stratum(projection_classes(c, proj_tol)?.classes.len()))
}

/// `1 / (n + 2)` times the smallest gap between distinct projections,
/// obstacles included.
pub fn epsilon_bar(c: &Configuration, proj_tol: f64) -> Result<f64> {
    let classes = projection_classes(c, proj_tol)?;
    Ok(epsilon_bar_from(&classes, c.n()))
}

pub(crate) fn epsilon_bar_from(classes: &ProjectionClasses, n: usize) -> f64 {
    // Class means are sorted, so the minimum over all pairs is attained by
    // neighbours.
    let min_gap = classes
        .classes
        .windows(2)
        .map(|w| w[1].mean - w[0].mean)
        .fold(f64::INFINITY, f64::min);
    min_gap / (n + 2) as f64
}

/// Whether every robot lies within `tol` of the obstacle line.
pub fn is_colinear(c: &Configuration, tol: f64) -> Result<bool> {
    let line = c.line()?;
    for x in c.robots() {
        if line.residual(x)? > tol {
            return Ok(false);
        }
    }
    Ok(true)
}
