//! Certified, scope-exclusive pseudonyms for credential wallets.
//!
//! A holder keeps one pseudonym seed, gets it blind-signed into a BBS
//! credential, and derives a per-relying-party pseudonym from it that is
//! proven in zero knowledge to come from the signed seed.

pub mod actors;
pub mod bbs;
pub mod codec;
pub mod commitments;
pub mod error;
pub mod groups;
pub mod prf;
pub mod sigma;
pub mod transfer;
pub mod vectors;

pub use error::Error;
