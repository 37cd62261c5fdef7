//! Outer codes: finite fields, Reed–Solomon, burst-erasure codes.

pub mod bec;
pub mod gf;
pub mod rs;

pub use bec::{burst_confusability_check, BecCode, BecKind};
pub use gf::Field;
pub use rs::ReedSolomon;
