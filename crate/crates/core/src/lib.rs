//! Codes for the adversarial torn-paper channel.

pub mod alphabet;
pub mod bounds;
pub mod channel;
pub mod codec;
pub mod ecc;
pub mod error;
pub mod indexing;
pub mod params;
pub mod pilot;
pub mod robust;
pub mod rll;

pub use alphabet::{QString, SegmentCollection};
pub use error::{Error, Result};
pub use params::{CodeParams, RawParams};
pub use rll::{RllKind, RllScheme};
