//! Parametrised deformations that keep the obstacles fixed.
//!
//! * [`Desingularization`] pushes robot `j` along the obstacle direction by
//!   `t * j * eps_bar(C)`, which separates every coincident projection and
//!   lands in the top stratum.
//! * [`Flattening`] moves every point of a top-stratum configuration in a
//!   straight line onto its orthogonal projection on the obstacle line.
//! * [`Sigma`] runs both, componentwise on a query pair: desingularization on
//!   `[0, 1/2]`, flattening on `[1/2, 1]`.
//!
//! `eps_bar`, the line and the projection targets are computed once from the
//! input configuration; neither the line nor its orientation change along
//! either deformation.

use crate::configspace::{
    cp_count, epsilon_bar_from, projection_classes, Configuration, QueryPair, Stratum,
};
use crate::error::{PlanError, Result};

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(PlanError::OutOfRangeTime(t));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    Desingularize,
    Flatten,
    Composite,
}

/// Which deformation a stage is and the stratum it starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HomotopyStage {
    pub kind: StageKind,
    pub source: Stratum,
}

/// Desingularization of a single configuration.
#[derive(Debug, Clone)]
pub struct Desingularization {
    source: Configuration,
    stratum: Stratum,
    // eps_bar * e; `None` on the top stratum, where the map is the identity.
    step: Option<Vec<f64>>,
}

impl Desingularization {
    pub fn new(c: &Configuration, proj_tol: f64) -> Result<Self> {
        let classes = projection_classes(c, proj_tol)?;
        let stratum = Stratum(classes.classes.len());
        let step = if stratum.get() < c.n() + 2 {
            let eps = epsilon_bar_from(&classes, c.n());
            let line = c.line()?;
            Some(line.direction().iter().map(|e| eps * e).collect())
        } else {
            None
        };
        Ok(Desingularization {
            source: c.clone(),
            stratum,
            step,
        })
    }

    pub fn stage(&self) -> HomotopyStage {
        HomotopyStage {
            kind: StageKind::Desingularize,
            source: self.stratum,
        }
    }

    pub fn source(&self) -> &Configuration {
        &self.source
    }

    pub fn is_identity(&self) -> bool {
        self.step.is_none()
    }

    /// Shift per unit of robot index, `eps_bar * e`, if any.
    pub fn step(&self) -> Option<&[f64]> {
        self.step.as_deref()
    }

    pub fn eval(&self, t: f64) -> Result<Configuration> {
        check_time(t)?;
        let mut out = self.source.clone();
        self.eval_into(t, out.coords_mut());
        Ok(out)
    }

    /// Writes the configuration at time `t` into a flat buffer of matching
    /// shape. `t` is not range-checked.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        out.copy_from_slice(self.source.coords());
        if let Some(step) = &self.step {
            let d = self.source.d();
            for (j, x) in out[2 * d..].chunks_exact_mut(d).enumerate() {
                let scale = t * (j + 1) as f64;
                for (xk, sk) in x.iter_mut().zip(step) {
                    *xk += scale * sk;
                }
            }
        }
    }
}

/// Straight-line retraction of a top-stratum configuration onto its line.
#[derive(Debug, Clone)]
pub struct Flattening {
    source: Configuration,
    // Orthogonal projections of the robots, flat.
    targets: Vec<f64>,
}

impl Flattening {
    pub fn new(c: &Configuration, proj_tol: f64) -> Result<Self> {
        let stratum = cp_count(c, proj_tol)?;
        let top = c.n() + 2;
        if stratum.get() < top {
            return Err(PlanError::NotDesingularized {
                stratum: stratum.get(),
                top,
            });
        }
        let line = c.line()?;
        let targets = c
            .robots()
            .flat_map(|x| line.point_at(line.lambda(x)))
            .collect();
        Ok(Flattening {
            source: c.clone(),
            targets,
        })
    }

    pub fn stage(&self) -> HomotopyStage {
        HomotopyStage {
            kind: StageKind::Flatten,
            source: Stratum(self.source.n() + 2),
        }
    }

    pub fn source(&self) -> &Configuration {
        &self.source
    }

    pub fn eval(&self, t: f64) -> Result<Configuration> {
        check_time(t)?;
        let mut out = self.source.clone();
        self.eval_into(t, out.coords_mut());
        Ok(out)
    }

    /// Unchecked evaluation into a flat buffer. Obstacles are copied, never
    /// recomputed.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let d = self.source.d();
        let src = self.source.coords();
        out[..2 * d].copy_from_slice(&src[..2 * d]);
        for ((o, y), p) in out[2 * d..]
            .iter_mut()
            .zip(&src[2 * d..])
            .zip(&self.targets)
        {
            *o = y + t * (p - y);
        }
    }
}

/// Desingularize-then-flatten for one configuration.
#[derive(Debug, Clone)]
pub struct Retraction {
    desing: Desingularization,
    flat: Flattening,
}

impl Retraction {
    pub fn new(c: &Configuration, proj_tol: f64) -> Result<Self> {
        let desing = Desingularization::new(c, proj_tol)?;
        let top = desing.eval(1.0)?;
        let flat = Flattening::new(&top, proj_tol)?;
        Ok(Retraction { desing, flat })
    }

    pub fn desingularization(&self) -> &Desingularization {
        &self.desing
    }

    pub fn flattening(&self) -> &Flattening {
        &self.flat
    }

    /// Unchecked evaluation; halves split at `t = 1/2`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        if t <= 0.5 {
            self.desing.eval_into(2.0 * t, out);
        } else {
            self.flat.eval_into(2.0 * t - 1.0, out);
        }
    }

    pub fn eval(&self, t: f64) -> Result<Configuration> {
        check_time(t)?;
        let mut out = self.desing.source().clone();
        self.eval_into(t, out.coords_mut());
        Ok(out)
    }
}

/// Componentwise deformation of a query pair into a pair of colinear
/// configurations on the shared obstacle line.
#[derive(Debug, Clone)]
pub struct Sigma {
    start: Retraction,
    goal: Retraction,
}

impl Sigma {
    /// Assumes `p` already passed [`crate::configspace::validate_query_pair`].
    pub fn new(p: &QueryPair, proj_tol: f64) -> Result<Self> {
        Ok(Sigma {
            start: Retraction::new(p.start(), proj_tol)?,
            goal: Retraction::new(p.goal(), proj_tol)?,
        })
    }

    pub fn stage(&self) -> HomotopyStage {
        HomotopyStage {
            kind: StageKind::Composite,
            source: self.start.desing.stratum.min(self.goal.desing.stratum),
        }
    }

    pub fn start(&self) -> &Retraction {
        &self.start
    }

    pub fn goal(&self) -> &Retraction {
        &self.goal
    }

    pub fn eval(&self, t: f64) -> Result<(Configuration, Configuration)> {
        Ok((self.start.eval(t)?, self.goal.eval(t)?))
    }
}

/// Desingularization at time `t`.
pub fn desingularize(c: &Configuration, t: f64, proj_tol: f64) -> Result<Configuration> {
    check_time(t)?;
    Desingularization::new(c, proj_tol)?.eval(t)
}

/// Flattening at time `t`; `c` must lie in the top stratum.
pub fn flatten(c: &Configuration, t: f64, proj_tol: f64) -> Result<Configuration> {
    check_time(t)?;
    Flattening::new(c, proj_tol)?.eval(t)
}

pub fn sigma(p: &QueryPair, t: f64, proj_tol: f64) -> Result<(Configuration, Configuration)> {
    check_time(t)?;
    Sigma::new(p, proj_tol)?.eval(t)
}
