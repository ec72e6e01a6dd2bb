//! Connected numbers of line arrangements for cyclic covers of the
//! complex projective plane.
//!
//! Two independent routes are provided:
//!
//! * [`exact`] answers the question with integer congruences for the Fermat
//!   family of totally tangent line triples, plus a linear-algebra oracle
//!   that checks those congruences by brute force.
//! * [`monodromy`] and [`connectivity`] compute the same number numerically
//!   by tracking the sheets of `s^m = F(p)` along each line and gluing them
//!   at the intersection points of the arrangement.
//!
//! The [`fermat`] module builds the branch curves and tangent lines used by
//! both routes, and [`schema`] holds the JSON file formats.

pub mod connectivity;
pub mod error;
pub mod exact;
pub mod fermat;
pub mod geometry;
pub mod monodromy;
pub mod polynomials;
pub mod rng;
pub mod schema;
pub mod union_find;

pub use num_complex::Complex64;

pub use connectivity::{
    connected_number, connected_number_via_offsets, cross_check, gluing_graph, Arrangement,
    ConnectedNumberReport, EngineConfig, GluingGraph,
};
pub use error::{Error, Result};
pub use exact::{
    carnot_exists, contact_divisor_oracle, predicted_connected_number, zariski_certificate,
    CarnotQuery, PredictionReport, ZariskiCertificate,
};
pub use fermat::{ArtalFamilyConfig, FermatTangentIndex};
pub use geometry::{HomogeneousPoint, LineChart, Param, ProjectiveLine};
pub use monodromy::{ComponentCoverData, PathPlan, SheetTransport, WeightedBranchDivisor};
pub use polynomials::{RootCluster, TrivariateForm, UnivariatePoly};

/// Library version string carried in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
