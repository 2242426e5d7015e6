//! File formats, reporting, and the subcommand implementations behind the
//! `walkoff` binary. The heavy lifting lives in `walkoff-core`; this crate
//! owns everything that touches the filesystem.

pub mod cmd;
pub mod formats;
pub mod manifest;

/// Seed resolution: `--seed` flag, else the `WALKOFF_SEED` environment
/// variable, else a fixed constant. Ambient entropy is never read, so every
/// run is reproducible by default.
/// reproducible by default.
pub const DEFAULT_SEED: u64 = 2021;

pub fn resolve_seed(flag: Option<u64>) -> u64 {
    if let Some(s) = flag {
        return s;
    }
    if let Ok(v) = std::env::var("WALKOFF_SEED") {
        if let Ok(s) = v.trim().parse::<u64>() {
            return s;
        }
    }
    DEFAULT_SEED
}
