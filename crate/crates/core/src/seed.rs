//! Seed handling for every stochastic component.

/// Environment variable that overrides all seeds.
pub const SEED_ENV: &str = "MOSCO_LAB_SEED";

/// Returns the seed from `MOSCO_LAB_SEED` when set and parseable, otherwise
/// `default`.
pub fn effective_seed(default: u64) -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default)
}
