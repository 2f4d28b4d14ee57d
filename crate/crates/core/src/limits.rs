use serde::{Deserialize, Serialize};

/// Environment variable that overrides the tree level cap.
pub const MAX_LEVEL_ENV: &str = "ARBOR_MAX_LEVEL";

/// Resource caps shared by every computation that materializes a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Deepest level a word may be restricted to (2^level leaves).
    pub max_level: u32,
    /// Deepest level for group orders and normal closures.
    pub max_group_level: u32,
    /// Deepest level for derived subgroups.
    pub max_derived_level: u32,
    /// Deepest Frobenius factor tree.
    pub max_frob_depth: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_level: 14,
            max_group_level: 12,
            max_derived_level: 10,
            max_frob_depth: 9,
        }
    }
}

impl Limits {
    /// Defaults, with the level cap taken from `ARBOR_MAX_LEVEL` when set.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(level) = std::env::var(MAX_LEVEL_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
        {
            limits = limits.with_max_level(level);
        }
        limits
    }

    pub fn with_max_level(mut self, level: u32) -> Self {
        // Leaf indices are u32 and vertices are packed in a u64.
        self.max_level = level.min(24);
        self
    }
}
