pub mod error;
pub mod eta;
pub mod harness;
pub mod identities;
pub mod param;
pub mod qcore;
pub mod qgamma;
pub mod real;
pub mod series;
