//! Quadrature, truncated power series, finite differences and a bracketed
//! minimizer shared by the analytic modules.

pub mod diff;
pub mod jet;
pub mod optimize;
pub mod quad;
