// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use thiserror::Error;

use crate::net_model::Seconds;

/// Simulated time in milliseconds since the start of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: Self = Self(0);

    pub const fn from_millis(ms: u64) -> Self {
        Self(ms)
    }

    pub const fn from_secs(s: u64) -> Self {
        Self(s * 1000)
    }

    pub const fn millis(&self) -> u64 {
        self.0
    }

    pub fn after_secs(self, s: Seconds) -> Self {
        Self(self.0 + u64::from(s) * 1000)
    }

    /// Whole seconds from `self` until `later`, rounding down; zero if
    /// `later` is not in the future.
    pub fn secs_until(self, later: SimTime) -> Seconds {
        let ms = later.0.saturating_sub(self.0) / 1000;
        Seconds::try_from(ms).unwrap_or(Seconds::MAX)
    }
}

impl Add<u64> for SimTime {
    type Output = SimTime;

    fn add(self, ms: u64) -> SimTime {
        SimTime(self.0 + ms)
    }
}

impl Sub for SimTime {
    type Output = u64;

    fn sub(self, rhs: SimTime) -> u64 {
        self.0 - rhs.0
    }
}

/// Renders as seconds with up to three decimals, e.g. `20.5`.
impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (s, ms) = (self.0 / 1000, self.0 % 1000);
        if ms == 0 {
            write!(f, "{s}")
        } else {
            let frac = format!("{ms:03}");
            write!(f, "{s}.{}", frac.trim_end_matches('0'))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid time {0:?} (seconds with at most millisecond precision)")]
pub struct TimeParseError(String);

/// Parses decimal seconds such as `20`, `20.5` or `0.001`. No floats are
/// involved so the result is exact.
impl FromStr for SimTime {
    type Err = TimeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || TimeParseError(s.to_owned());
        let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
        if whole.is_empty() || !whole.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        if frac.len() > 3
            || !frac.bytes().all(|b| b.is_ascii_digit())
            || (s.contains('.') && frac.is_empty())
        {
            return Err(err());
        }
        let whole: u64 = whole.parse().map_err(|_| err())?;
        let ms = if frac.is_empty() {
            0
        } else {
            format!("{frac:0<3}").parse::<u64>().map_err(|_| err())?
        };
        whole
            .checked_mul(1000)
            .and_then(|w| w.checked_add(ms))
            .map(SimTime)
            .ok_or_else(err)
    }
}
