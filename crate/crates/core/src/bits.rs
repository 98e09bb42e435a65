//! Fixed-width vertex bitsets for the branch-and-bound inner loops.

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub(crate) struct Bits<const W: usize>(pub [u64; W]);

impl<const W: usize> Bits<W> {
    pub const EMPTY: Self = Bits([0; W]);

    /// Bitset from 1-based vertex ids.
    pub fn from_vertices(vs: impl IntoIterator<Item = u32>) -> Self {
        let mut b = Self::EMPTY;
        for v in vs {
            b.insert(v);
        }
        b
    }

    #[inline]
    pub fn insert(&mut self, v: u32) {
        let i = (v - 1) as usize;
        self.0[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn is_subset(&self, other: &Self) -> bool {
        (0..W).all(|w| self.0[w] & !other.0[w] == 0)
    }

    #[inline]
    pub fn is_disjoint(&self, other: &Self) -> bool {
        (0..W).all(|w| self.0[w] & other.0[w] == 0)
    }

    #[inline]
    pub fn union(&self, other: &Self) -> Self {
        let mut out = *self;
        for w in 0..W {
            out.0[w] |= other.0[w];
        }
        out
    }

    #[inline]
    pub fn len(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
}

/// Number of 64-bit words needed for `n` vertices, rounded up to a supported width.
pub(crate) fn width_for(n: usize) -> Result<usize> {
    match n {
        0..=64 => Ok(1),
        65..=128 => Ok(2),
        129..=256 => Ok(4),
        257..=512 => Ok(8),
        513..=1024 => Ok(16),
        _ => Err(Error::TooLarge(format!(
            "exact search supports at most 1024 vertices, got {n}"
        ))),
    }
}

/// Calls a const-generic function with the bitset width that fits `n` vertices.
macro_rules! dispatch_width {
    ($n:expr, $f:ident ( $($arg:expr),* $(,)? )) => {
        match $crate::bits::width_for($n)? {
            1 => $f::<1>($($arg),*),
            2 => $f::<2>($($arg),*),
            4 => $f::<4>($($arg),*),
            8 => $f::<8>($($arg),*),
            _ => $f::<16>($($arg),*),
        }
    };
}
pub(crate) use dispatch_width;
