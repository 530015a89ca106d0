//! Collision-free parametrised motion planning for `n` point robots that must
//! avoid each other and two point obstacles in `R^d`, `d` even.
//!
//! The obstacles are part of the query but never move: every planned path
//! keeps them fixed. Queries are sorted into `2n + 1` domains of continuity,
//! and on each domain the planner is continuous in the query.
//!
//! ```
//! use pmp_core::{plan, Configuration, QueryPair, Trajectory, DEFAULT_PROJ_TOL};
//!
//! let start = Configuration::from_flat(2, vec![0.0, 0.0, 1.0, 0.0, 0.5, 1.0, 0.5, -1.0]).unwrap();
//! let goal = Configuration::from_flat(2, vec![0.0, 0.0, 1.0, 0.0, 0.5, -1.0, 0.5, 1.0]).unwrap();
//! let path = plan(&QueryPair::new(start.clone(), goal), DEFAULT_PROJ_TOL).unwrap();
//! assert_eq!(path.region().ell(), 6);
//! assert_eq!(path.eval(0.0).unwrap(), start);
//! ```

pub mod configspace;
pub mod deformations;
pub mod error;
pub mod geometry;
pub mod io;
pub mod planner;
pub mod verifier;

pub use configspace::{
    cp_count, epsilon_bar, is_colinear, validate_configuration, validate_query_pair,
    Configuration, QueryPair, Stratum, DEFAULT_DISTINCT_TOL, DEFAULT_PROJ_TOL,
};
pub use deformations::{desingularize, flatten, sigma};
pub use error::{PlanError, PointLabel, Result};
pub use geometry::{line_of, nu, OrientedLine, Point};
pub use planner::{
    classify, colinear_section, glue, plan, sample, straight_line_plan, PlannedPath,
    RegionIndex, StraightLinePath, Trajectory,
};
