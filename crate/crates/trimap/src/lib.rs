//! Serialized instances and invariant suites for the trilinear map, plus the
//! helpers the `trimap` command-line driver shares with its tests.

pub mod format;
pub mod suites;

use anyhow::{Context, Result};
use std::path::Path;

/// Default cap on evaluator retries per operation.
pub const DEFAULT_RETRY_BUDGET: usize = 16;

/// `TRIMAP_RETRY_BUDGET` when set to a positive integer, else the default.
pub fn retry_budget() -> usize {
    std::env::var("TRIMAP_RETRY_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&b: &usize| b > 0)
        .unwrap_or(DEFAULT_RETRY_BUDGET)
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retry_budget_reads_the_environment() {
        std::env::set_var("TRIMAP_RETRY_BUDGET", "40");
        assert_eq!(retry_budget(), 40);
        for bad in ["0", "many", ""] {
            std::env::set_var("TRIMAP_RETRY_BUDGET", bad);
            assert_eq!(retry_budget(), DEFAULT_RETRY_BUDGET);
        }
        std::env::remove_var("TRIMAP_RETRY_BUDGET");
        assert_eq!(retry_budget(), DEFAULT_RETRY_BUDGET);
    }
}
