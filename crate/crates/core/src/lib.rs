//! Explicit Reed-Solomon lines `f + z*g` with polynomially many points close
//! to the code and no correlated agreement, together with the tooling that
//! re-verifies them and audits the counting bounds behind them.

pub mod analytic;
pub mod combin;
pub mod cxfile;
pub mod forge;
pub mod modmath;
pub mod numstr;
pub mod params;
pub mod poly;
pub mod ratio;
pub mod rscode;
