//! DNA alphabet, 2-4 rule weights, Watson-Crick complements and the
//! string-counting functions used by the bound calculator.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

/// A DNA base. Weak bases (A, T) weigh 1, strong bases (C, G) weigh 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    A,
    C,
    G,
    T,
}

impl Base {
    pub const ALL: [Base; 4] = [Base::A, Base::C, Base::G, Base::T];

    #[inline]
    pub fn weight(self) -> u32 {
        match self {
            Base::A | Base::T => 1,
            Base::C | Base::G => 2,
        }
    }

    #[inline]
    pub fn complement(self) -> Base {
        match self {
            Base::A => Base::T,
            Base::T => Base::A,
            Base::C => Base::G,
            Base::G => Base::C,
        }
    }

    #[inline]
    pub fn is_strong(self) -> bool {
        matches!(self, Base::C | Base::G)
    }

    /// 2-bit code, used for packing short strings into integer keys.
    #[inline]
    pub(crate) fn code(self) -> u64 {
        match self {
            Base::A => 0,
            Base::C => 1,
            Base::G => 2,
            Base::T => 3,
        }
    }

    pub fn from_char(ch: char) -> Option<Base> {
        match ch {
            'A' => Some(Base::A),
            'C' => Some(Base::C),
            'G' => Some(Base::G),
            'T' => Some(Base::T),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Base::A => 'A',
            Base::C => 'C',
            Base::G => 'G',
            Base::T => 'T',
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// An immutable DNA string over {A, C, G, T}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DnaSeq {
    bases: Vec<Base>,
}

impl DnaSeq {
    pub fn new(bases: Vec<Base>) -> Self {
        DnaSeq { bases }
    }

    pub fn from_slice(bases: &[Base]) -> Self {
        DnaSeq {
            bases: bases.to_vec(),
        }
    }

    pub fn bases(&self) -> &[Base] {
        &self.bases
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn weight(&self) -> u32 {
        weight(&self.bases)
    }

    pub fn revcomp(&self) -> DnaSeq {
        DnaSeq {
            bases: revcomp(&self.bases),
        }
    }

    pub fn is_self_complementary(&self) -> bool {
        is_self_complementary(&self.bases)
    }

    pub fn contains(&self, needle: &[Base]) -> bool {
        contains(&self.bases, needle)
    }
}

impl FromStr for DnaSeq {
    type Err = Error;

    /// Accepts exactly the uppercase letters A, C, G, T.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .enumerate()
            .map(|(pos, ch)| Base::from_char(ch).ok_or(Error::InvalidBase { ch, pos }))
            .collect::<Result<Vec<_>>>()
            .map(DnaSeq::new)
    }
}

impl fmt::Display for DnaSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bases {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

impl From<&[Base]> for DnaSeq {
    fn from(bases: &[Base]) -> Self {
        DnaSeq::from_slice(bases)
    }
}

pub fn weight(bases: &[Base]) -> u32 {
    bases.iter().map(|b| b.weight()).sum()
}

pub fn revcomp(bases: &[Base]) -> Vec<Base> {
    bases.iter().rev().map(|b| b.complement()).collect()
}

pub fn is_self_complementary(bases: &[Base]) -> bool {
    let n = bases.len();
    (0..n).all(|i| bases[i] == bases[n - 1 - i].complement())
}

pub fn contains(haystack: &[Base], needle: &[Base]) -> bool {
    needle.is_empty() || haystack.windows(needle.len()).any(|w| w == needle)
}

/// Packs a short string (at most 31 bases) into a `u64` with a leading
/// sentinel bit, so strings of different lengths never collide.
#[inline]
pub(crate) fn pack(bases: &[Base]) -> u64 {
    debug_assert!(bases.len() <= 31);
    bases.iter().fold(1u64, |acc, b| (acc << 2) | b.code())
}

/// Packed key of the reverse complement of `bases`.
#[inline]
pub(crate) fn pack_revcomp(bases: &[Base]) -> u64 {
    debug_assert!(bases.len() <= 31);
    bases
        .iter()
        .rev()
        .fold(1u64, |acc, b| (acc << 2) | b.complement().code())
}

/// Number of DNA strings of weight `n`: G_0 = 1, G_1 = 2,
/// G_n = 2 G_{n-1} + 2 G_{n-2}.
pub fn g(n: u32) -> BigUint {
    let mut prev = BigUint::one(); // G_0
    if n == 0 {
        return prev;
    }
    let mut cur = BigUint::from(2u32); // G_1
    for _ in 2..=n {
        let next = (&cur + &prev) * 2u32;
        prev = cur;
        cur = next;
    }
    cur
}

/// Number of self-complementary DNA strings of weight `n`. Zero for odd `n`,
/// G_{n/2} otherwise. The empty string is counted for `n = 0`.
pub fn h(n: u32) -> BigUint {
    if n % 2 == 1 {
        BigUint::default()
    } else {
        g(n / 2)
    }
}
