use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("points are projectively equal")]
    CoincidentPoints,
    #[error("lines are projectively equal")]
    CoincidentLines,
    #[error("point does not lie on the chart's line (residual {residual:e})")]
    PointOffLine { residual: f64 },
    #[error("invalid point or line: all coordinates vanish")]
    ZeroVector,

    #[error("root finder did not converge after {iterations} iterations")]
    RootFindingDiverged { iterations: usize },
    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("{mu} does not divide {b}")]
    NotADivisor { b: u64, mu: u64 },
    #[error("singular value {value:e} too close to rank threshold {threshold:e}")]
    NumericalRankAmbiguous { value: f64, threshold: f64 },

    #[error("line {component} is contained in the branch divisor")]
    LineInsideBranchDivisor { component: usize },
    #[error("degenerate path geometry: {0}")]
    DegenerateGeometry(String),
    #[error("step size fell below {min_step:e} at t = {at}")]
    StepUnderflow {
        min_step: f64,
        at: num_complex::Complex64,
    },
    #[error("sheets collided while tracking at t = {at}")]
    SheetCollision { at: num_complex::Complex64 },
    #[error(
        "tracked monodromy at branch point {branch} is a shift by {tracked}, expected {expected}"
    )]
    MonodromyMismatch {
        branch: usize,
        tracked: i64,
        expected: i64,
    },
    #[error("intersection point of components {i} and {j} lies on the branch curve")]
    IntersectionOnBranchLocus { i: usize, j: usize },
    #[error("sheet matching ambiguous: {0}")]
    MatchingAmbiguous(String),

    #[error("component {component} is contained in the branch curve")]
    ComponentInsideBranch { component: usize },
    #[error("the curve minus the branch locus is disconnected")]
    CurveMinusBranchDisconnected,
    #[error("union-find gives c = {union_find}, offset method gives c = {offsets}\n{diagnostics}")]
    MethodDisagreement {
        union_find: usize,
        offsets: usize,
        diagnostics: String,
    },

    #[error("schema error: {0}")]
    Schema(String),
}

impl Error {
    /// True for failures of the numerical pipeline (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RootFindingDiverged { .. }
                | Error::NumericalRankAmbiguous { .. }
                | Error::DegenerateGeometry(_)
                | Error::StepUnderflow { .. }
                | Error::SheetCollision { .. }
                | Error::MonodromyMismatch { .. }
                | Error::MatchingAmbiguous(_)
        )
    }
}
