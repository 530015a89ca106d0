use thiserror::Error;

/// Everything that can go wrong while building or evaluating a plan.
///
/// The `Display` output always starts with the variant name, which the CLI
/// relies on when reporting validation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("DegenerateObstacles: obstacles are {distance:e} apart (tolerance {tol:e})")]
    DegenerateObstacles { distance: f64, tol: f64 },

    #[error("DimensionMismatch: expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("OddDimension: ambient dimension {0} must be even and at least 2")]
    OddDimension(usize),

    #[error("CollidingPoints: {first} and {second} are {distance:e} apart (tolerance {tol:e})")]
    CollidingPoints {
        first: PointLabel,
        second: PointLabel,
        distance: f64,
        tol: f64,
    },

    #[error("ObstacleMismatch: start and goal must share the same ordered obstacle pair")]
    ObstacleMismatch,

    #[error("RobotCountMismatch: start has {start} robots, goal has {goal}")]
    RobotCountMismatch { start: usize, goal: usize },

    #[error("EmptyConfiguration: at least one robot is required")]
    EmptyConfiguration,

    #[error("NonFinite: coordinate {coord} of {point} is not finite")]
    NonFinite { point: PointLabel, coord: usize },

    #[error("NotDesingularized: stratum {stratum} is below the top stratum {top}")]
    NotDesingularized { stratum: usize, top: usize },

    #[error("NotColinear: {point} is {residual:e} off the obstacle line")]
    NotColinear { point: PointLabel, residual: f64 },

    #[error("OutOfRangeTime: {0} is outside [0, 1]")]
    OutOfRangeTime(f64),

    #[error("InvalidSampleCount: need at least 2 samples, got {0}")]
    InvalidSampleCount(usize),

    #[error("InvalidInstanceSpec: {0}")]
    InvalidInstanceSpec(String),

    #[error("GenerationBudgetExceeded: could not place {n} robots with minimum separation {min_sep} in a box of side {scale} after {attempts} attempts")]
    GenerationBudgetExceeded {
        n: usize,
        min_sep: f64,
        scale: f64,
        attempts: usize,
    },

    #[error("InvalidPerturbation: delta {delta:e} must be below proj_tol / 10 = {limit:e}")]
    InvalidPerturbation { delta: f64, limit: f64 },

    #[error("MalformedInstance: {0}")]
    MalformedInstance(String),
}

impl PlanError {
    /// The bare variant name, e.g. `"OddDimension"`.
    pub fn name(&self) -> &'static str {
        match self {
            PlanError::DegenerateObstacles { .. } => "DegenerateObstacles",
            PlanError::DimensionMismatch { .. } => "DimensionMismatch",
            PlanError::OddDimension(_) => "OddDimension",
            PlanError::CollidingPoints { .. } => "CollidingPoints",
            PlanError::ObstacleMismatch => "ObstacleMismatch",
            PlanError::RobotCountMismatch { .. } => "RobotCountMismatch",
            PlanError::EmptyConfiguration => "EmptyConfiguration",
            PlanError::NonFinite { .. } => "NonFinite",
            PlanError::NotDesingularized { .. } => "NotDesingularized",
            PlanError::NotColinear { .. } => "NotColinear",
            PlanError::OutOfRangeTime(_) => "OutOfRangeTime",
            PlanError::InvalidSampleCount(_) => "InvalidSampleCount",
            PlanError::InvalidInstanceSpec(_) => "InvalidInstanceSpec",
            PlanError::GenerationBudgetExceeded { .. } => "GenerationBudgetExceeded",
            PlanError::InvalidPerturbation { .. } => "InvalidPerturbation",
            PlanError::MalformedInstance(_) => "MalformedInstance",
        }
    }
}

pub type Result<T, E = PlanError> = std::result::Result<T, E>;

/// Names one of the `n + 2` points of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointLabel {
    /// Obstacle 1 or 2.
    Obstacle(usize),
    /// Robot `1..=n`.
    Robot(usize),
}

impl PointLabel {
    /// Label for the `k`-th entry (0-based) of the list `o1, o2, x1, .., xn`.
    pub fn from_index(k: usize) -> Self {
        if k < 2 {
            PointLabel::Obstacle(k + 1)
        } else {
            PointLabel::Robot(k - 1)
        }
    }
}

impl std::fmt::Display for PointLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PointLabel::Obstacle(k) => write!(f, "o{k}"),
            PointLabel::Robot(k) => write!(f, "x{k}"),
        }
    }
}
