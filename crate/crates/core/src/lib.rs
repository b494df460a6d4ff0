//! Core of a four-factor transaction gateway.
//!
//! A transaction is authorized by password, a one-time code, an ASCII-art
//! face template and a geofence check, in that order (face and location may
//! arrive in either order). The four credentials are then serialized,
//! encrypted with XTEA-CBC, authenticated with HMAC-SHA256 and hidden in the
//! least-significant bits of a cover image. The merchant side reverses the
//! process and re-checks every credential.
//!
//! The crate is `no_std` and needs only `alloc`; image files, the user store
//! on disk, SMS delivery and the HTTP surface live in the `fourfa` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod crypto;
pub mod envelope;
pub mod factors;
pub mod flow;
pub mod merchant;
pub mod raster;
pub mod store;
pub mod transport;

pub use envelope::{capacity_of, open_envelope, seal_envelope, EnvelopeError};
pub use merchant::{authenticate_payload, process_envelope, Decision, Outcome, Reason};
pub use raster::{Channels, RasterImage};
