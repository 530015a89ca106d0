//! Dimension-generic vector primitives.
//!
//! Points are plain coordinate vectors. The only geometric objects the planner
//! needs are the oriented line through the two obstacles, orthogonal
//! projection onto it, and the tangent field `nu` that rotates each coordinate
//! pair by a quarter turn (which only exists in even dimension).

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};

/// Default absolute tolerance on `|o2 - o1|` below which obstacles are
/// considered coincident.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

/// A point (or vector) of `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(d: usize) -> Self {
        Point(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point(coords)
    }
}

impl From<&[f64]> for Point {
    fn from(coords: &[f64]) -> Self {
        Point(coords.to_vec())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance_squared(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    distance_squared(a, b).sqrt()
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(PlanError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// The line through `o1` and `o2`, oriented from `o1` towards `o2`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedLine {
    base: Point,
    direction: Point,
}

/// Line through two obstacles with the default degeneracy tolerance.
pub fn line_of(o1: &[f64], o2: &[f64]) -> Result<OrientedLine> {
    line_of_with_tol(o1, o2, DEFAULT_DEGENERACY_TOL)
}

pub fn line_of_with_tol(o1: &[f64], o2: &[f64], tol: f64) -> Result<OrientedLine> {
    check_dim(o1.len(), o2.len())?;
    let diff: Vec<f64> = o2.iter().zip(o1).map(|(b, a)| b - a).collect();
    let len = norm(&diff);
    if !(len > tol) {
        return Err(PlanError::DegenerateObstacles { distance: len, tol });
    }
    Ok(OrientedLine {
        base: Point::from(o1),
        direction: Point(diff.into_iter().map(|c| c / len).collect()),
    })
}

impl OrientedLine {
    pub fn base(&self) -> &Point {
        &self.base
    }

    /// Unit direction `e = (o2 - o1) / |o2 - o1|`.
    pub fn direction(&self) -> &Point {
        &self.direction
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Signed coordinate `<x - base, direction>` of the projection of `x`.
    pub fn project_scalar(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.lambda(x))
    }

    /// Closest point of the line to `x`.
    pub fn project_point(&self, x: &[f64]) -> Result<Point> {
        check_dim(self.dim(), x.len())?;
        let lambda = self.lambda(x);
        Ok(Point(self.point_at(lambda)))
    }

    /// `base + lambda * direction`.
    pub fn point_at(&self, lambda: f64) -> Vec<f64> {
        self.base
            .iter()
            .zip(self.direction.iter())
            .map(|(b, e)| b + lambda * e)
            .collect()
    }

    /// Distance from `x` to the line.
    pub fn residual(&self, x: &[f64]) -> Result<f64> {
        let p = self.project_point(x)?;
        Ok(distance(x, &p))
    }

    // Unchecked; callers guarantee matching dimensions.
    pub(crate) fn lambda(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.base.iter())
            .zip(self.direction.iter())
            .map(|((xi, bi), ei)| (xi - bi) * ei)
            .sum()
    }
}

/// Tangent field on the sphere: `(a1, b1, .., al, bl) -> (-b1, a1, .., -bl, al)`.
pub fn nu(v: &[f64]) -> Result<Point> {
    let d = v.len();
    if d == 0 || d % 2 != 0 {
        return Err(PlanError::OddDimension(d));
    }
    let mut out = vec![0.0; d];
    for (pair_out, pair_in) in out.chunks_exact_mut(2).zip(v.chunks_exact(2)) {
        pair_out[0] = -pair_in[1];
        pair_out[1] = pair_in[0];
    }
    Ok(Point(out))
}
