//! Dimension limits shared by every dense code path.

use crate::error::{LabError, Result};

/// Environment variable overriding [`Caps::state_dim`].
pub const STATE_CAP_ENV: &str = "EMBEZZLE_DIM_CAP";

/// Default cap on the length of a dense state or probability vector.
pub const DEFAULT_STATE_CAP: usize = 1 << 24;

/// Dense eigensolver cap for density matrices.
pub const DENSE_EIGEN_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub state_dim: usize,
    pub dense_dim: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            state_dim: DEFAULT_STATE_CAP,
            dense_dim: DENSE_EIGEN_CAP,
        }
    }
}

impl Caps {
    /// Defaults, with the state cap overridden from the environment when set.
    pub fn from_env() -> Self {
        let mut caps = Caps::default();
        if let Some(cap) = std::env::var(STATE_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            caps.state_dim = cap;
        }
        caps
    }

    pub fn check_state(&self, dim: u128, context: &'static str) -> Result<usize> {
        check(dim, self.state_dim, context)
    }

    pub fn check_dense(&self, dim: u128, context: &'static str) -> Result<usize> {
        check(dim, self.dense_dim, context)
    }
}

fn check(dim: u128, cap: usize, context: &'static str) -> Result<usize> {
    if dim > cap as u128 {
        return Err(LabError::DimensionOverCap {
            requested: dim,
            cap: cap as u128,
            context,
        });
    }
    Ok(dim as usize)
}

/// `base^exp` without overflow; saturates at `u128::MAX`.
pub fn checked_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = match acc.checked_mul(base as u128) {
            Some(v) => v,
            None => return u128::MAX,
        };
    }
    acc
}
