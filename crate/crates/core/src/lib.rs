//! Numerical toolkit for flat logarithmic connections on C² with poles along
//! line arrangements.

pub mod dunkl;
pub mod flat_forms;
pub mod herm_geom;
pub mod linalg;
pub mod moebius_cover;
pub mod monodromy;
pub mod scan;
pub mod spherical;
