//! Privacy-constrained source coding with a shared secret key.
//!
//! A sender observes `(X, Y)` and must let a legitimate receiver holding a
//! uniform key `W` recover `Y` losslessly, while an eavesdropper who sees the
//! codeword learns at most ε bits about the private variable `X`.
//!
//! The crate provides exact information measures on finite alphabets
//! ([`dist`]), interval-based functional representations ([`frl`]), prefix
//! and one-time-pad coding primitives ([`coding`]), separations of `X` into a
//! grid ([`separation`]), the keyed codecs with exact leakage audits
//! ([`codec`]), closed-form bounds ([`bounds`]) and the experiment harness
//! ([`harness`]).

pub mod bounds;
pub mod codec;
pub mod coding;
pub mod dist;
pub mod error;
pub mod frl;
pub mod harness;
pub mod instances;
pub mod separation;

pub use bounds::{bounds_report, BoundsReport};
pub use codec::{
    audit, build_bounded_split, build_eps_private, build_perfect_functional, CodecScheme,
    CodingMode, LeakageAudit, SplitVariant,
};
pub use dist::{JointDistribution, Pmf};
pub use error::{Error, Result};
pub use frl::{build_efrl, build_frl, EncoderRng};
pub use separation::Separation;
