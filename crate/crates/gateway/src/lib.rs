//! The deployable side of the four-factor gateway: PNG files, the
//! line-delimited JSON user store, configuration, SMS transports, the HTTP
//! service and the `fourfa` command line.

pub mod cli;
pub mod config;
pub mod image_io;
pub mod service;
pub mod sms;
pub mod store;

pub use config::{load_config, Config, ConfigError};
pub use store::{FileUserStore, StorageError};

/// Seconds since the Unix epoch.
pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
