//! Base-out states: base occupancy plus outs, the shared vocabulary of the
//! replay engine and the half-inning simulator.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// One of the 24 live base-out configurations (8 occupancy patterns × 0–2
/// outs). Three outs and "a run has scored" are absorbing and not
/// represented here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BaseOutState {
    pub first: bool,
    pub second: bool,
    pub third: bool,
    pub outs: u8,
}

impl BaseOutState {
    pub const fn empty() -> Self {
        BaseOutState { first: false, second: false, third: false, outs: 0 }
    }

    /// Start-of-half state under the ghost-runner rule: runner on second,
    /// nobody out.
    pub const fn ghost_runner_start() -> Self {
        BaseOutState { first: false, second: true, third: false, outs: 0 }
    }

    pub const fn new(first: bool, second: bool, third: bool, outs: u8) -> Self {
        BaseOutState { first, second, third, outs }
    }

    pub fn runners(&self) -> u8 {
        self.first as u8 + self.second as u8 + self.third as u8
    }

    /// Dense index in 0..24: outs-major, bases as a 3-bit pattern.
    pub fn index(&self) -> usize {
        (self.outs as usize) * 8
            + (self.first as usize)
            + ((self.second as usize) << 1)
            + ((self.third as usize) << 2)
    }

    pub fn from_index(idx: usize) -> Self {
        debug_assert!(idx < 24);
        BaseOutState {
            first: idx & 1 != 0,
            second: idx & 2 != 0,
            third: idx & 4 != 0,
            outs: (idx / 8) as u8,
        }
    }

    /// All 24 live states in index order.
    pub fn all() -> Vec<BaseOutState> {
        (0..24).map(BaseOutState::from_index).collect()
    }

    /// Compact occupancy label like `"-2-"` or `"123"`.
    pub fn bases_label(&self) -> String {
        let mut s = String::with_capacity(3);
        s.push(if self.first { '1' } else { '-' });
        s.push(if self.second { '2' } else { '-' });
        s.push(if self.third { '3' } else { '-' });
        s
    }
}

impl fmt::Display for BaseOutState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} out", self.bases_label(), self.outs)
    }
}
