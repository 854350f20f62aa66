//! Finite integer intervals and the dyadic grid.
//!
//! Dyadic intervals start at level 1: `I(N, j) = [(j-1)·2^N + 1, j·2^N]` for
//! `N >= 1`. Singletons are ordinary intervals but never dyadic.

use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest coordinate magnitude accepted from external input.
pub const MAX_COORD: i64 = 1 << 48;

/// Highest dyadic level; `2^MAX_LEVEL` comfortably exceeds any admissible window.
pub const MAX_LEVEL: u32 = 52;

pub(crate) fn check_coord(m: i128) -> Result<i64> {
    if m.abs() > MAX_COORD as i128 {
        Err(Error::CoordinateRange(m))
    } else {
        Ok(m as i64)
    }
}

/// A non-empty interval of integers with inclusive endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct IntegerInterval {
    lo: i64,
    hi: i64,
}

impl IntegerInterval {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::EmptyInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn singleton(m: i64) -> Self {
        Self { lo: m, hi: m }
    }

    /// `[center - radius, center + radius]`.
    pub fn centered(center: i64, radius: u64) -> Self {
        let r = radius as i64;
        Self {
            lo: center - r,
            hi: center + r,
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    /// Cardinality `hi - lo + 1`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> u64 {
        (self.hi - self.lo) as u64 + 1
    }

    pub fn contains(&self, m: i64) -> bool {
        self.lo <= m && m <= self.hi
    }

    pub fn contains_interval(&self, other: &IntegerInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &IntegerInterval) -> Option<IntegerInterval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(IntegerInterval { lo, hi })
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &IntegerInterval) -> IntegerInterval {
        IntegerInterval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn pad(&self, by: u64) -> IntegerInterval {
        let by = by as i64;
        IntegerInterval {
            lo: self.lo - by,
            hi: self.hi + by,
        }
    }

    /// Distance from `m` to the nearest point of the interval (0 inside).
    pub fn distance_to(&self, m: i64) -> u64 {
        if m < self.lo {
            (self.lo - m) as u64
        } else if m > self.hi {
            (m - self.hi) as u64
        } else {
            0
        }
    }

    pub fn iter(&self) -> RangeInclusive<i64> {
        self.lo..=self.hi
    }
}

impl TryFrom<(i64, i64)> for IntegerInterval {
    type Error = Error;

    fn try_from((lo, hi): (i64, i64)) -> Result<Self> {
        IntegerInterval::new(lo, hi)
    }
}

impl From<IntegerInterval> for (i64, i64) {
    fn from(i: IntegerInterval) -> Self {
        (i.lo, i.hi)
    }
}

impl fmt::Display for IntegerInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Which expansion of a dyadic interval to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpandMode {
    /// `2mL I`: `2m` blocks of length `2^N` ending at the right end of `I`.
    Left,
    /// `2mR I`: `2m` blocks starting at the left end of `I`.
    Right,
    /// `(2m+1) I`, the union of both.
    Symmetric,
}

/// The dyadic interval `I(N, j) = [(j-1)·2^N + 1, j·2^N]`, `N >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    level: u32,
    index: i64,
}

impl DyadicInterval {
    pub fn new(level: u32, index: i64) -> Result<Self> {
        if level == 0 || level > MAX_LEVEL {
            return Err(Error::InvalidLevel(level));
        }
        let size = 1i128 << level;
        let lo = (index as i128 - 1) * size + 1;
        let hi = index as i128 * size;
        if lo.abs() > i64::MAX as i128 / 4 || hi.abs() > i64::MAX as i128 / 4 {
            return Err(Error::InvalidLevel(level));
        }
        Ok(Self { level, index })
    }

    /// The unique level-`level` interval containing `m`; its index is `ceil(m / 2^level)`.
    pub fn containing(m: i64, level: u32) -> Result<Self> {
        if level == 0 || level > MAX_LEVEL {
            return Err(Error::InvalidLevel(level));
        }
        check_coord(m as i128)?;
        let size = 1i64 << level;
        Self::new(level, (m + size - 1).div_euclid(size))
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> i64 {
        self.index
    }

    pub fn size(&self) -> u64 {
        1u64 << self.level
    }

    pub fn lo(&self) -> i64 {
        (self.index - 1) * (1i64 << self.level) + 1
    }

    pub fn hi(&self) -> i64 {
        self.index * (1i64 << self.level)
    }

    pub fn interval(&self) -> IntegerInterval {
        IntegerInterval {
            lo: self.lo(),
            hi: self.hi(),
        }
    }

    pub fn contains(&self, m: i64) -> bool {
        self.lo() <= m && m <= self.hi()
    }

    /// The enclosing interval one level up.
    pub fn parent(&self) -> Result<Self> {
        Self::new(self.level + 1, (self.index + 1).div_euclid(2))
    }

    /// The two halves one level down; `None` at level 1.
    pub fn children(&self) -> Option<(Self, Self)> {
        (self.level >= 2).then(|| {
            let level = self.level - 1;
            (
                Self {
                    level,
                    index: 2 * self.index - 1,
                },
                Self {
                    level,
                    index: 2 * self.index,
                },
            )
        })
    }

    /// `2mL I`, `2mR I` or `(2m+1) I`. The one-sided expansions hold `2m·2^N`
    /// points and share `I` itself, so the symmetric one holds `(4m-1)·2^N`;
    /// for `m = 1` that is `3I`, the interval with both neighbours attached.
    pub fn expand(&self, m: u64, mode: ExpandMode) -> Result<IntegerInterval> {
        if m == 0 {
            return Err(Error::InvalidExpansion);
        }
        let size = 1i128 << self.level;
        let j = self.index as i128;
        let m = m as i128;
        let left_lo = (j - 2 * m) * size + 1;
        let right_hi = (j + 2 * m - 1) * size;
        let (lo, hi) = match mode {
            ExpandMode::Left => (left_lo, j * size),
            ExpandMode::Right => ((j - 1) * size + 1, right_hi),
            ExpandMode::Symmetric => (left_lo, right_hi),
        };
        let lo = i64::try_from(lo).map_err(|_| Error::CoordinateRange(lo))?;
        let hi = i64::try_from(hi).map_err(|_| Error::CoordinateRange(hi))?;
        IntegerInterval::new(lo, hi)
    }

    /// `3I`.
    pub fn tripled(&self) -> IntegerInterval {
        let size = self.size() as i64;
        IntegerInterval {
            lo: self.lo() - size,
            hi: self.hi() + size,
        }
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "I({}, {}) = [{}, {}]",
            self.level,
            self.index,
            self.lo(),
            self.hi()
        )
    }
}

/// For each level `1..=n_max`, the dyadic interval containing `m`.
pub fn dyadic_intervals_containing(m: i64, n_max: u32) -> Result<Vec<DyadicInterval>> {
    if n_max == 0 || n_max > MAX_LEVEL {
        return Err(Error::InvalidLevel(n_max));
    }
    (1..=n_max)
        .map(|n| DyadicInterval::containing(m, n))
        .collect()
}
