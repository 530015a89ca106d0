//! Batch verification of planner properties on seeded random and constructed
//! instances.
//!
//! Collision checks run on a uniform time grid and, because every path is
//! affine in time between its breakpoints, also at the exact minimum of each
//! pairwise distance on every affine segment.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::configspace::{cp_count, validate_query_pair, Configuration, QueryPair, DEFAULT_DISTINCT_TOL};
use crate::error::{PlanError, Result};
use crate::geometry::{distance, dot, norm, nu};
use crate::io::InstanceFile;
use crate::planner::{classify, plan, RegionIndex, Trajectory};

/// Separation at or below which two points count as colliding.
pub const DEFAULT_COLLISION_TOL: f64 = 1e-10;
/// Relative tolerance for endpoint exactness.
pub const ENDPOINT_TOL: f64 = 1e-9;
/// Accepted range for the ratio of path deviations between perturbation
/// sizes a decade apart.
pub const LINEAR_RATIO_RANGE: (f64, f64) = (5.0, 20.0);

const DRAWS_PER_CONFIGURATION: usize = 20_000;

/// Shapes of generated query pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    /// Uniform points in the box.
    Generic,
    /// Every robot of both configurations on the obstacle line.
    Colinear,
    /// Goal robots are a permutation of the start robots.
    Swap,
    /// Robots snapped onto the projections of other points (low strata).
    Clustered,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Generic, Family::Colinear, Family::Swap, Family::Clustered];
}

/// Parameters for seeded instance generation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceSpec {
    pub d: usize,
    pub n: usize,
    pub seed: u64,
    pub count: usize,
    /// Side of the workspace box `[0, scale]^d`.
    pub scale: f64,
    /// Minimum pairwise distance between generated points.
    pub min_sep: f64,
    /// Families cycled through by instance index.
    pub families: Vec<Family>,
}

impl InstanceSpec {
    pub fn new(d: usize, n: usize, seed: u64, count: usize) -> Self {
        InstanceSpec {
            d,
            n,
            seed,
            count,
            scale: 1.0,
            min_sep: 0.02,
            families: Family::ALL.to_vec(),
        }
    }

    pub fn with_families(mut self, families: &[Family]) -> Self {
        self.families = families.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 || self.d % 2 != 0 {
            return Err(PlanError::OddDimension(self.d));
        }
        if self.n == 0 {
            return Err(PlanError::EmptyConfiguration);
        }
        if !(self.min_sep > 0.0) || !(self.scale > 0.0) {
            return Err(PlanError::InvalidInstanceSpec(format!(
                "min_sep ({}) and scale ({}) must be positive",
                self.min_sep, self.scale
            )));
        }
        if self.families.is_empty() {
            return Err(PlanError::InvalidInstanceSpec("no instance families".into()));
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Deterministic query pairs drawn from `spec`, cycling through its families.
pub fn generate_queries(spec: &InstanceSpec) -> Result<Vec<QueryPair>> {
    spec.validate()?;
    (0..spec.count)
        .map(|k| {
            let family = spec.families[k % spec.families.len()];
            let mut gen = Generator::new(spec, spec.rng(k as u64));
            let q = gen.query(family)?;
            debug_assert!(validate_query_pair(&q, DEFAULT_DISTINCT_TOL).is_ok());
            Ok(q)
        })
        .collect()
}

/// Random construction of configurations inside the workspace box.
pub struct Generator<'a> {
    spec: &'a InstanceSpec,
    rng: ChaCha8Rng,
}

impl<'a> Generator<'a> {
    pub fn new(spec: &'a InstanceSpec, rng: ChaCha8Rng) -> Self {
        Generator { spec, rng }
    }

    fn budget_error(&self) -> PlanError {
        PlanError::GenerationBudgetExceeded {
            n: self.spec.n,
            min_sep: self.spec.min_sep,
            scale: self.spec.scale,
            attempts: DRAWS_PER_CONFIGURATION,
        }
    }

    fn uniform_point(&mut self) -> Vec<f64> {
        let s = self.spec.scale;
        (0..self.spec.d).map(|_| self.rng.gen_range(0.0..s)).collect()
    }

    fn unit_vector(&mut self) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..self.spec.d).map(|_| self.rng.gen_range(-1.0..1.0)).collect();
            let len = norm(&v);
            if len > 1e-3 && len <= 1.0 {
                return v.into_iter().map(|c| c / len).collect();
            }
        }
    }

    fn far_enough(&self, placed: &[f64], p: &[f64]) -> bool {
        placed
            .chunks_exact(self.spec.d)
            .all(|q| distance(q, p) >= self.spec.min_sep)
    }

    /// Flat obstacle block `o1, o2`.
    pub fn obstacles(&mut self) -> Result<Vec<f64>> {
        let min = self.spec.min_sep.max(0.1 * self.spec.scale);
        for _ in 0..DRAWS_PER_CONFIGURATION {
            let (a, b) = (self.uniform_point(), self.uniform_point());
            if distance(&a, &b) >= min {
                return Ok([a, b].concat());
            }
        }
        Err(self.budget_error())
    }

    /// Places `n` robots one at a time; `draw` proposes a position given the
    /// points placed so far.
    fn place<F>(&mut self, obstacles: &[f64], mut draw: F) -> Result<Configuration>
    where
        F: FnMut(&mut Self, &[f64]) -> Vec<f64>,
    {
        let mut coords = obstacles.to_vec();
        let mut draws = 0;
        while coords.len() < (self.spec.n + 2) * self.spec.d {
            if draws == DRAWS_PER_CONFIGURATION {
                return Err(self.budget_error());
            }
            draws += 1;
            let p = draw(self, &coords);
            if self.far_enough(&coords, &p) {
                coords.extend_from_slice(&p);
            }
        }
        Configuration::from_flat(self.spec.d, coords)
    }

    fn generic(&mut self, obstacles: &[f64]) -> Result<Configuration> {
        self.place(obstacles, |g, _| g.uniform_point())
    }

    fn colinear(&mut self, obstacles: &[f64]) -> Result<Configuration> {
        let d = self.spec.d;
        let (o1, o2) = (&obstacles[..d], &obstacles[d..2 * d]);
        self.place(obstacles, |g, _| {
            let lambda: f64 = g.rng.gen_range(-0.5..1.5);
            o1.iter().zip(o2).map(|(a, b)| a + lambda * (b - a)).collect()
        })
    }

    fn clustered(&mut self, obstacles: &[f64]) -> Result<Configuration> {
        let d = self.spec.d;
        let (o1, o2) = (obstacles[..d].to_vec(), obstacles[d..2 * d].to_vec());
        let len = distance(&o1, &o2);
        let e: Vec<f64> = o1.iter().zip(&o2).map(|(a, b)| (b - a) / len).collect();
        self.place(obstacles, |g, placed| {
            let mut p = g.uniform_point();
            if g.rng.gen_bool(0.6) {
                // Snap the projection onto that of an already placed point.
                let k = g.rng.gen_range(0..placed.len() / d);
                let target = &placed[k * d..(k + 1) * d];
                let shift = dot(&e, &p) - dot(&e, target);
                for (pk, ek) in p.iter_mut().zip(&e) {
                    *pk -= shift * ek;
                }
            }
            p
        })
    }

    pub fn query(&mut self, family: Family) -> Result<QueryPair> {
        let obstacles = self.obstacles()?;
        let (start, goal) = match family {
            Family::Generic => (self.generic(&obstacles)?, self.generic(&obstacles)?),
            Family::Colinear => (self.colinear(&obstacles)?, self.colinear(&obstacles)?),
            Family::Clustered => (self.clustered(&obstacles)?, self.clustered(&obstacles)?),
            Family::Swap => {
                let start = self.generic(&obstacles)?;
                let goal = self.permuted(&start);
                (start, goal)
            }
        };
        Ok(QueryPair::new(start, goal))
    }

    /// Robots exchanged in random disjoint pairs; with `n` odd one robot
    /// stays put.
    fn permuted(&mut self, c: &Configuration) -> Configuration {
        let n = c.n();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut self.rng);
        let mut perm: Vec<usize> = (0..n).collect();
        for pair in order.chunks_exact(2) {
            perm.swap(pair[0], pair[1]);
        }
        let mut coords = c.obstacle_block().to_vec();
        for &k in &perm {
            coords.extend_from_slice(c.robot(k));
        }
        Configuration::from_flat(c.d(), coords).expect("same shape")
    }

    /// A configuration on the given obstacles whose projections take exactly
    /// `stratum` distinct values, built by placing robots on exact orthogonal
    /// fibres of existing projections.
    pub fn with_stratum(&mut self, obstacles: &[f64], stratum: usize) -> Configuration {
        let (d, n, scale) = (self.spec.d, self.spec.n, self.spec.scale);
        assert!((2..=n + 2).contains(&stratum), "stratum {stratum} out of range");
        let (o1, o2) = (&obstacles[..d], &obstacles[d..2 * d]);
        let len = distance(o1, o2);
        let e: Vec<f64> = o1.iter().zip(o2).map(|(a, b)| (b - a) / len).collect();
        let up = nu(&e).expect("even dimension").into_inner();
        let at = |lambda: f64, height: f64| -> Vec<f64> {
            (0..d).map(|k| o1[k] + lambda * e[k] + height * up[k]).collect()
        };

        let fresh = stratum - 2;
        let mut lambdas = vec![0.0, len];
        let mut coords = obstacles.to_vec();
        for r in 1..=fresh {
            let lambda = len * (r as f64 + self.rng.gen_range(-0.3..0.3)) / (fresh + 1) as f64;
            lambdas.push(lambda);
            let height = if self.rng.gen_bool(0.5) {
                0.0
            } else {
                self.rng.gen_range(-0.3..0.3) * scale
            };
            coords.extend(at(lambda, height));
        }
        // Remaining robots share a projection with an existing point; globally
        // distinct heights keep them apart from everything on that fibre.
        for slot in 0..n - fresh {
            let lambda = lambdas[self.rng.gen_range(0..lambdas.len())];
            let sign = if self.rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let height = sign * (0.4 + 0.15 * slot as f64) * scale;
            coords.extend(at(lambda, height));
        }
        let mut c = Configuration::from_flat(d, coords).expect("consistent shape");
        self.shuffle_robots(&mut c);
        c
    }

    fn shuffle_robots(&mut self, c: &mut Configuration) {
        let d = c.d();
        let mut robots: Vec<Vec<f64>> = c.robots().map(<[f64]>::to_vec).collect();
        robots.shuffle(&mut self.rng);
        for (dst, src) in c.coords_mut()[2 * d..].chunks_exact_mut(d).zip(robots) {
            dst.copy_from_slice(&src);
        }
    }

    /// A query pair with strata exactly `(i, j)`.
    pub fn with_strata(&mut self, i: usize, j: usize) -> Result<QueryPair> {
        let obstacles = self.obstacles()?;
        let start = self.with_stratum(&obstacles, i);
        let goal = self.with_stratum(&obstacles, j);
        Ok(QueryPair::new(start, goal))
    }

    /// Random displacement of every robot, each of norm `delta`.
    pub fn perturb(&mut self, c: &Configuration, delta: f64) -> Configuration {
        let mut out = c.clone();
        let d = c.d();
        for x in out.coords_mut()[2 * d..].chunks_exact_mut(d) {
            let u = self.unit_vector();
            for (xk, uk) in x.iter_mut().zip(&u) {
                *xk += delta * uk;
            }
        }
        out
    }

    /// Fixed unit directions for every robot coordinate of a configuration.
    pub fn robot_directions(&mut self, n: usize) -> Vec<f64> {
        (0..n).flat_map(|_| self.unit_vector()).collect()
    }
}

/// Which property a failure violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Property {
    Planning,
    StartEndpoint,
    GoalEndpoint,
    ObstacleConstancy,
    Collision,
    SegmentCollision,
    Classification,
    Semicontinuity,
    Continuity,
}

/// Replayable evidence for a failure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub instance: usize,
    pub property: Property,
    pub t: Option<f64>,
    pub detail: String,
    pub witness: InstanceFile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    /// Minimum pairwise separation over all checked samples and segments.
    pub min_separation: f64,
    /// Largest observed `sup deviation / delta` over continuity probes.
    pub continuity_k: f64,
    /// Instance count per region label `ell`.
    pub region_histogram: BTreeMap<usize, usize>,
    pub samples_checked: usize,
}

impl Default for Stats {
    fn default() -> Self {
        Stats {
            min_separation: f64::INFINITY,
            continuity_k: 0.0,
            region_histogram: BTreeMap::new(),
            samples_checked: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct VerificationReport {
    pub instances: usize,
    pub failures: Vec<Failure>,
    pub stats: Stats,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Combines two reports; associative, with the empty report as identity.
    pub fn merge(mut self, other: VerificationReport) -> Self {
        self.instances += other.instances;
        self.failures.extend(other.failures);
        self.stats.min_separation = self.stats.min_separation.min(other.stats.min_separation);
        self.stats.continuity_k = self.stats.continuity_k.max(other.stats.continuity_k);
        self.stats.samples_checked += other.stats.samples_checked;
        for (ell, count) in other.stats.region_histogram {
            *self.stats.region_histogram.entry(ell).or_default() += count;
        }
        self
    }

    fn fail(&mut self, instance: usize, property: Property, t: Option<f64>, detail: String, q: &QueryPair) {
        self.failures.push(Failure {
            instance,
            property,
            t,
            detail,
            witness: InstanceFile::from_query(q),
        });
    }

    /// Failure counts per property.
    pub fn failure_counts(&self) -> BTreeMap<Property, usize> {
        let mut counts = BTreeMap::new();
        for f in &self.failures {
            *counts.entry(f.property).or_default() += 1;
        }
        counts
    }
}

/// Minimum pairwise distance among the first `len` points of a flat buffer;
/// returns the distance and the two point indices.
fn min_pairwise(coords: &[f64], d: usize) -> (f64, usize, usize) {
    let k = coords.len() / d;
    let mut best = (f64::INFINITY, 0, 0);
    for a in 0..k {
        let pa = &coords[a * d..(a + 1) * d];
        for b in a + 1..k {
            let dist = distance(pa, &coords[b * d..(b + 1) * d]);
            if dist < best.0 {
                best = (dist, a, b);
            }
        }
    }
    best
}

/// Exact minimum over `s in [0, 1]` of the pairwise distances when every point
/// moves affinely from `from` to `to`. Returns `(distance, s)`.
pub fn segment_min_separation(from: &[f64], to: &[f64], d: usize) -> (f64, f64) {
    let k = from.len() / d;
    let mut best = (f64::INFINITY, 0.0);
    let mut d0 = vec![0.0; d];
    let mut delta = vec![0.0; d];
    for a in 0..k {
        // The two obstacles never move relative to each other.
        for b in (a + 1).max(2)..k {
            for m in 0..d {
                d0[m] = from[a * d + m] - from[b * d + m];
                delta[m] = (to[a * d + m] - to[b * d + m]) - d0[m];
            }
            let dd = dot(&delta, &delta);
            let s = if dd > 0.0 {
                (-dot(&d0, &delta) / dd).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let dist = (0..d)
                .map(|m| (d0[m] + s * delta[m]).powi(2))
                .sum::<f64>()
                .sqrt();
            if dist < best.0 {
                best = (dist, s);
            }
        }
    }
    best
}

fn endpoint_error(got: &[f64], want: &[f64]) -> Option<f64> {
    got.iter()
        .zip(want)
        .map(|(g, w)| (g - w).abs() / w.abs().max(1.0))
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))))
        .filter(|&e| e > ENDPOINT_TOL)
}

/// Checks endpoints, obstacle constancy, and collision-freeness of any
/// trajectory, on a grid of `samples` times and on every affine segment.
pub fn verify_trajectory(
    instance: usize,
    path: &dyn Trajectory,
    samples: usize,
    collision_tol: f64,
) -> VerificationReport {
    let q = path.query();
    let d = q.d();
    let obstacles = q.start().obstacle_block();
    let mut report = VerificationReport {
        instances: 1,
        ..Default::default()
    };
    let mut buf = q.start().coords().to_vec();

    path.eval_into(0.0, &mut buf);
    if let Some(err) = endpoint_error(&buf, q.start().coords()) {
        report.fail(instance, Property::StartEndpoint, Some(0.0), format!("relative error {err:e}"), q);
    }
    path.eval_into(1.0, &mut buf);
    if let Some(err) = endpoint_error(&buf, q.goal().coords()) {
        report.fail(instance, Property::GoalEndpoint, Some(1.0), format!("relative error {err:e}"), q);
    }

    let samples = samples.max(2);
    let mut obstacle_reported = false;
    let mut collision_reported = false;
    for k in 0..samples {
        let t = k as f64 / (samples - 1) as f64;
        path.eval_into(t, &mut buf);
        if !obstacle_reported && &buf[..2 * d] != obstacles {
            obstacle_reported = true;
            report.fail(instance, Property::ObstacleConstancy, Some(t), "obstacle coordinates changed".into(), q);
        }
        let (sep, a, b) = min_pairwise(&buf, d);
        report.stats.min_separation = report.stats.min_separation.min(sep);
        if !collision_reported && !(sep > collision_tol) {
            collision_reported = true;
            let (pa, pb) = (crate::error::PointLabel::from_index(a), crate::error::PointLabel::from_index(b));
            report.fail(instance, Property::Collision, Some(t), format!("{pa} and {pb} at distance {sep:e}"), q);
        }
    }
    report.stats.samples_checked += samples;

    let breaks = path.breakpoints();
    let mut from = buf.clone();
    let mut to = buf.clone();
    let mut segment_reported = false;
    for w in breaks.windows(2) {
        path.eval_into(w[0], &mut from);
        path.eval_into(w[1], &mut to);
        let (sep, s) = segment_min_separation(&from, &to, d);
        report.stats.min_separation = report.stats.min_separation.min(sep);
        if !segment_reported && !(sep > collision_tol) {
            segment_reported = true;
            let t = w[0] + s * (w[1] - w[0]);
            report.fail(instance, Property::SegmentCollision, Some(t), format!("segment minimum {sep:e}"), q);
        }
    }
    report
}

/// Plans `p` and verifies the result; planning errors are reported as
/// failures.
pub fn verify_plan(instance: usize, p: &QueryPair, samples: usize, proj_tol: f64) -> VerificationReport {
    match plan(p, proj_tol) {
        Ok(path) => {
            let mut report = verify_trajectory(instance, &path, samples, DEFAULT_COLLISION_TOL);
            report.stats.region_histogram.insert(path.region().ell(), 1);
            report
        }
        Err(e) => {
            let mut report = VerificationReport {
                instances: 1,
                ..Default::default()
            };
            report.fail(instance, Property::Planning, None, e.to_string(), p);
            report
        }
    }
}

/// Region labels seen on random instances and on constructed witnesses for
/// every stratum pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionCensus {
    pub n: usize,
    pub d: usize,
    /// Histogram of `ell` over generated instances.
    pub random_histogram: BTreeMap<usize, usize>,
    /// Histogram of `ell` over constructed witnesses.
    pub constructed_histogram: BTreeMap<usize, usize>,
    /// Every label attained by some instance.
    pub attainable: BTreeSet<usize>,
    /// Witness strata that classified differently from how they were built.
    pub misclassified: Vec<((usize, usize), RegionIndex)>,
}

impl RegionCensus {
    /// Whether the attainable labels are exactly `4..=2n+4` and every witness
    /// classified as constructed.
    pub fn complete(&self) -> bool {
        self.misclassified.is_empty()
            && self.attainable.iter().copied().eq(RegionIndex::labels(self.n))
    }
}

pub fn verify_region_census(spec: &InstanceSpec, proj_tol: f64) -> Result<RegionCensus> {
    spec.validate()?;
    let mut census = RegionCensus {
        n: spec.n,
        d: spec.d,
        random_histogram: BTreeMap::new(),
        constructed_histogram: BTreeMap::new(),
        attainable: BTreeSet::new(),
        misclassified: Vec::new(),
    };
    for q in generate_queries(spec)? {
        let r = classify(&q, proj_tol)?;
        *census.random_histogram.entry(r.ell()).or_default() += 1;
        census.attainable.insert(r.ell());
    }
    let top = spec.n + 2;
    let mut gen = Generator::new(spec, spec.rng(u64::MAX));
    for i in 2..=top {
        for j in 2..=top {
            let q = gen.with_strata(i, j)?;
            validate_query_pair(&q, DEFAULT_DISTINCT_TOL)?;
            let r = classify(&q, proj_tol)?;
            if (r.i, r.j) != (i, j) {
                census.misclassified.push(((i, j), r));
            }
            *census.constructed_histogram.entry(r.ell()).or_default() += 1;
            census.attainable.insert(r.ell());
        }
    }
    Ok(census)
}

/// Perturbs constructed low-stratum configurations by `delta` and checks that
/// the stratum never drops. Runs `spec.count` trials.
pub fn verify_semicontinuity(spec: &InstanceSpec, delta: f64, proj_tol: f64) -> Result<VerificationReport> {
    spec.validate()?;
    let limit = proj_tol / 10.0;
    if !(delta < limit) || !(delta > 0.0) {
        return Err(PlanError::InvalidPerturbation { delta, limit });
    }
    let mut report = VerificationReport::default();
    let mut gen = Generator::new(spec, spec.rng(u64::MAX - 1));
    for trial in 0..spec.count {
        let obstacles = gen.obstacles()?;
        let stratum = gen.rng.gen_range(2..=spec.n + 2);
        let c = gen.with_stratum(&obstacles, stratum);
        let before = cp_count(&c, proj_tol)?;
        let moved = gen.perturb(&c, delta);
        let after = cp_count(&moved, proj_tol)?;
        report.instances += 1;
        if after < before {
            report.fail(
                trial,
                Property::Semicontinuity,
                None,
                format!("stratum dropped from {} to {}", before.get(), after.get()),
                &QueryPair::new(c, moved),
            );
        }
    }
    Ok(report)
}

/// Sup-norm deviation between the paths of a query and its perturbations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityProbe {
    pub deltas: Vec<f64>,
    pub deviations: Vec<f64>,
}

impl ContinuityProbe {
    /// Ratios of consecutive deviations.
    pub fn ratios(&self) -> Vec<f64> {
        self.deviations.windows(2).map(|w| w[0] / w[1]).collect()
    }

    /// Largest `deviation / delta`.
    pub fn constant(&self) -> f64 {
        self.deltas
            .iter()
            .zip(&self.deviations)
            .map(|(d, dev)| dev / d)
            .fold(0.0, f64::max)
    }

    pub fn is_linear(&self) -> bool {
        let (lo, hi) = LINEAR_RATIO_RANGE;
        self.ratios().iter().all(|r| (lo..=hi).contains(r))
    }
}

/// Largest distance between corresponding points of two configurations.
pub fn configuration_distance(a: &[f64], b: &[f64], d: usize) -> f64 {
    a.chunks_exact(d)
        .zip(b.chunks_exact(d))
        .map(|(p, q)| distance(p, q))
        .fold(0.0, f64::max)
}

/// Moves every robot of `c` by `delta` along the given per-robot directions;
/// when `orthogonal` the component along the obstacle line is removed first,
/// which leaves every projection (and so the stratum) unchanged.
fn displace(c: &Configuration, directions: &[f64], delta: f64, orthogonal: bool) -> Result<Configuration> {
    let d = c.d();
    let e = c.line()?.direction().clone();
    let mut out = c.clone();
    for (x, u) in out.coords_mut()[2 * d..].chunks_exact_mut(d).zip(directions.chunks_exact(d)) {
        let mut u = u.to_vec();
        if orthogonal {
            let along = dot(&u, &e);
            for (uk, ek) in u.iter_mut().zip(e.iter()) {
                *uk -= along * ek;
            }
            let len = norm(&u);
            if len > 1e-12 {
                u.iter_mut().for_each(|uk| *uk /= len);
            }
        }
        for (xk, uk) in x.iter_mut().zip(&u) {
            *xk += delta * uk;
        }
    }
    Ok(out)
}

/// Measures sup-norm path deviation for robot perturbations of each size in
/// `deltas`, all along one fixed random direction. Returns `None` when no
/// perturbation stays in the query's region `(i, j)`.
pub fn probe_continuity(
    p: &QueryPair,
    deltas: &[f64],
    samples: usize,
    proj_tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Option<ContinuityProbe>> {
    let base = plan(p, proj_tol)?;
    let region = base.region();
    let n = p.n();
    let d = p.d();
    let dirs_start: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let dirs_goal: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let normalize = |v: Vec<f64>| -> Vec<f64> {
        v.chunks_exact(d)
            .flat_map(|u| {
                let len = norm(u).max(1e-12);
                u.iter().map(move |c| c / len).collect::<Vec<_>>()
            })
            .collect()
    };
    let (dirs_start, dirs_goal) = (normalize(dirs_start), normalize(dirs_goal));

    let mut times: Vec<f64> = (0..samples.max(2)).map(|k| k as f64 / (samples.max(2) - 1) as f64).collect();
    times.extend(base.breakpoints());

    'mode: for orthogonal in [false, true] {
        let mut deviations = Vec::with_capacity(deltas.len());
        for &delta in deltas {
            let moved = QueryPair::new(
                displace(p.start(), &dirs_start, delta, orthogonal)?,
                displace(p.goal(), &dirs_goal, delta, orthogonal)?,
            );
            if validate_query_pair(&moved, DEFAULT_DISTINCT_TOL).is_err() || classify(&moved, proj_tol)? != region {
                continue 'mode;
            }
            let other = plan(&moved, proj_tol)?;
            let mut a = p.start().coords().to_vec();
            let mut b = a.clone();
            let mut sup: f64 = 0.0;
            for &t in &times {
                base.eval_into(t, &mut a);
                other.eval_into(t, &mut b);
                sup = sup.max(configuration_distance(&a, &b, d));
            }
            deviations.push(sup);
        }
        return Ok(Some(ContinuityProbe {
            deltas: deltas.to_vec(),
            deviations,
        }));
    }
    Ok(None)
}

/// Continuity probes on the generated instances of `spec`; a probe fails when
/// its deviations do not scale linearly with the perturbation size.
pub fn verify_continuity(
    spec: &InstanceSpec,
    deltas: &[f64],
    samples: usize,
    proj_tol: f64,
) -> Result<VerificationReport> {
    let queries = generate_queries(spec)?;
    let mut report = VerificationReport::default();
    let mut rng = spec.rng(u64::MAX - 2);
    for (k, q) in queries.iter().enumerate() {
        report.instances += 1;
        match probe_continuity(q, deltas, samples, proj_tol, &mut rng)? {
            Some(probe) => {
                report.stats.continuity_k = report.stats.continuity_k.max(probe.constant());
                if !probe.is_linear() {
                    report.fail(
                        k,
                        Property::Continuity,
                        None,
                        format!("deviations {:?} for deltas {:?}", probe.deviations, probe.deltas),
                        q,
                    );
                }
            }
            None => report.fail(k, Property::Continuity, None, "no in-region perturbation".into(), q),
        }
    }
    Ok(report)
}

/// Knobs for [`run_suite`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOptions {
    pub samples: usize,
    pub proj_tol: f64,
    /// Number of generated instances that also get continuity probes.
    pub continuity_instances: usize,
    pub continuity_deltas: Vec<f64>,
    pub semicontinuity_trials: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            samples: 1000,
            proj_tol: crate::configspace::DEFAULT_PROJ_TOL,
            continuity_instances: 20,
            continuity_deltas: vec![1e-6, 1e-7, 1e-8],
            semicontinuity_trials: 1000,
        }
    }
}

/// Everything [`run_suite`] measured.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub spec: InstanceSpec,
    pub report: VerificationReport,
    pub census: RegionCensus,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.report.passed() && self.census.complete()
    }
}

/// Plans and verifies every generated instance, then runs the region census,
/// semicontinuity trials and continuity probes.
pub fn run_suite(spec: &InstanceSpec, opts: &SuiteOptions) -> Result<SuiteReport> {
    let queries = generate_queries(spec)?;
    let plans = queries
        .par_iter()
        .enumerate()
        .map(|(k, q)| verify_plan(k, q, opts.samples, opts.proj_tol))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(VerificationReport::default(), VerificationReport::merge);

    let census = verify_region_census(spec, opts.proj_tol)?;

    let mut semi_spec = spec.clone();
    semi_spec.count = opts.semicontinuity_trials;
    let semi = verify_semicontinuity(&semi_spec, opts.proj_tol / 100.0, opts.proj_tol)?;

    let mut cont_spec = spec.clone();
    cont_spec.count = opts.continuity_instances.min(spec.count);
    let cont = verify_continuity(&cont_spec, &opts.continuity_deltas, 200, opts.proj_tol)?;

    // Only plan checks count as instances; the other fragments add failures
    // and statistics.
    let mut report = plans;
    for extra in [semi, cont] {
        let instances = report.instances;
        report = report.merge(extra);
        report.instances = instances;
    }
    Ok(SuiteReport {
        spec: spec.clone(),
        report,
        census,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configspace::{validate_configuration, DEFAULT_PROJ_TOL};
    use crate::planner::straight_line_plan;

    const TOL: f64 = DEFAULT_PROJ_TOL;

    #[test]
    fn generation_is_deterministic_and_valid() {
        let spec = InstanceSpec::new(2, 2, 42, 10);
        let a = generate_queries(&spec).unwrap();
        let b = generate_queries(&spec).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a, b);
        for q in &a {
            validate_query_pair(q, DEFAULT_DISTINCT_TOL).unwrap();
        }
        let other = generate_queries(&InstanceSpec::new(2, 2, 43, 10)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn infeasible_packing_exceeds_budget() {
        let mut spec = InstanceSpec::new(2, 10, 1, 1);
        spec.min_sep = 0.9;
        assert_eq!(generate_queries(&spec).unwrap_err().name(), "GenerationBudgetExceeded");
    }

    #[test]
    fn spec_validation() {
        assert_eq!(generate_queries(&InstanceSpec::new(5, 2, 1, 1)).unwrap_err(), PlanError::OddDimension(5));
        let mut bad = InstanceSpec::new(2, 2, 1, 1);
        bad.min_sep = 0.0;
        assert_eq!(bad.validate().unwrap_err().name(), "InvalidInstanceSpec");
    }

    #[test]
    fn families_have_their_shape() {
        let swap = generate_queries(&InstanceSpec::new(2, 3, 5, 5).with_families(&[Family::Swap])).unwrap();
        for q in &swap {
            assert_eq!(q.start().obstacle_block(), q.goal().obstacle_block());
            for x in q.goal().robots() {
                assert!(q.start().robots().any(|y| y == x));
            }
            assert_ne!(q.start(), q.goal());
        }
        let colinear = generate_queries(&InstanceSpec::new(4, 3, 5, 5).with_families(&[Family::Colinear])).unwrap();
        for q in &colinear {
            let r = classify(q, TOL).unwrap();
            assert_eq!((r.i, r.j), (5, 5));
            assert!(crate::planner::is_colinear_pair(q, 1e-12).unwrap());
        }
        let clustered = generate_queries(&InstanceSpec::new(2, 4, 5, 20).with_families(&[Family::Clustered])).unwrap();
        assert!(clustered.iter().any(|q| classify(q, TOL).unwrap().ell() < 12));
    }

    #[test]
    fn witnesses_hit_every_stratum() {
        for d in [2, 4] {
            let spec = InstanceSpec::new(d, 4, 9, 1);
            let mut gen = Generator::new(&spec, spec.rng(0));
            let obstacles = gen.obstacles().unwrap();
            for stratum in 2..=6 {
                let c = gen.with_stratum(&obstacles, stratum);
                validate_configuration(&c, 1e-9).unwrap();
                assert_eq!(cp_count(&c, TOL).unwrap().get(), stratum);
            }
        }
    }

    #[test]
    fn segment_minimum_finds_crossing() {
        // Two robots swapping along the x-axis meet at s = 1/2.
        let from = [0.0, 5.0, 1.0, 5.0, 2.0, 0.0, 3.0, 0.0];
        let to = [0.0, 5.0, 1.0, 5.0, 3.0, 0.0, 2.0, 0.0];
        let (sep, s) = segment_min_separation(&from, &to, 2);
        assert!(sep < 1e-15);
        assert!((s - 0.5).abs() < 1e-15);
        // Parallel motion keeps its distance.
        let to = [0.0, 5.0, 1.0, 5.0, 2.0, 1.0, 3.0, 1.0];
        let (sep, _) = segment_min_separation(&from, &to, 2);
        assert!((sep - 1.0).abs() < 1e-15);
    }

    #[test]
    fn verify_plan_passes_and_baseline_fails() {
        let q = generate_queries(&InstanceSpec::new(2, 3, 3, 3).with_families(&[Family::Swap])).unwrap();
        for (k, p) in q.iter().enumerate() {
            let report = verify_plan(k, p, 1000, TOL);
            assert!(report.passed(), "{:?}", report.failures);
            assert!(report.stats.min_separation > 0.0);
            let base = verify_trajectory(k, &straight_line_plan(p), 1000, DEFAULT_COLLISION_TOL);
            assert!(base.failure_counts().contains_key(&Property::SegmentCollision));
        }
    }

    struct Nudged(crate::planner::PlannedPath);

    impl Trajectory for Nudged {
        fn query(&self) -> &QueryPair {
            self.0.query()
        }
        fn eval_into(&self, t: f64, out: &mut [f64]) {
            self.0.eval_into(t, out);
            if (t - 0.5).abs() < 0.01 {
                out[0] += 1e-9;
            }
        }
        fn breakpoints(&self) -> Vec<f64> {
            self.0.breakpoints()
        }
    }

    #[test]
    fn obstacle_nudge_is_caught() {
        let q = &generate_queries(&InstanceSpec::new(2, 2, 1, 1)).unwrap()[0];
        let report = verify_trajectory(7, &Nudged(plan(q, TOL).unwrap()), 1000, DEFAULT_COLLISION_TOL);
        let f = &report.failures[0];
        assert_eq!((f.instance, f.property), (7, Property::ObstacleConstancy));
        assert!((f.t.unwrap() - 0.5).abs() < 0.01);
        assert_eq!(f.witness.to_query().unwrap(), *q);
    }

    #[test]
    fn census_small() {
        let census = verify_region_census(&InstanceSpec::new(2, 1, 0, 20).with_families(&[Family::Generic]), TOL).unwrap();
        assert!(census.complete());
        assert_eq!(census.attainable.iter().copied().collect::<Vec<_>>(), vec![4, 5, 6]);
        assert_eq!(census.random_histogram.keys().copied().collect::<Vec<_>>(), vec![6]);
    }

    #[test]
    fn semicontinuity_rejects_large_delta() {
        let spec = InstanceSpec::new(2, 2, 0, 10);
        assert_eq!(verify_semicontinuity(&spec, 1e-9, 1e-9).unwrap_err().name(), "InvalidPerturbation");
        assert!(verify_semicontinuity(&spec, 1e-12, 1e-9).unwrap().passed());
    }

    #[test]
    fn continuity_probe_scales_linearly() {
        let spec = InstanceSpec::new(2, 2, 11, 8);
        let report = verify_continuity(&spec, &[1e-6, 1e-7, 1e-8], 100, TOL).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert!(report.stats.continuity_k > 0.0);
    }

    #[test]
    fn merge_is_associative() {
        let spec = InstanceSpec::new(2, 1, 4, 3);
        let reports: Vec<_> = generate_queries(&spec)
            .unwrap()
            .iter()
            .enumerate()
            .map(|(k, q)| verify_plan(k, q, 50, TOL))
            .collect();
        let left = reports[0].clone().merge(reports[1].clone()).merge(reports[2].clone());
        let right = reports[0].clone().merge(reports[1].clone().merge(reports[2].clone()));
        assert_eq!(left, right);
        assert_eq!(left.instances, 3);
    }

    #[test]
    fn suite_is_deterministic() {
        let spec = InstanceSpec::new(2, 2, 7, 12);
        let opts = SuiteOptions {
            samples: 100,
            semicontinuity_trials: 50,
            continuity_instances: 4,
            ..Default::default()
        };
        let a = run_suite(&spec, &opts).unwrap();
        let b = run_suite(&spec, &opts).unwrap();
        assert!(a.passed(), "{:?}", a.report.failures);
        assert_eq!(a, b);
    }
}
