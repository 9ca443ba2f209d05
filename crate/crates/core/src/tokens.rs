//! c-tokens: minimal strings of weight at least `c`.
//!
//! A string is a c-token when its weight is at least `c` and every proper
//! suffix weighs strictly less than `c`. Token weight is therefore `c` or
//! `c + 1`, and `c + 1` only when the token starts with a strong base. Every
//! position of a string whose prefix weight reaches `c` ends exactly one
//! token, which makes tokens the unit of accounting for the tag set bounds.

use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::seq::{g, weight, Base, DnaSeq};

/// Largest `c` for which [`enumerate_tokens`] materialises the universe.
pub const MAX_ENUMERATE_C: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CToken {
    pub seq: DnaSeq,
    pub weight: u32,
    pub tail_weight: u32,
}

impl CToken {
    fn from_bases(bases: &[Base]) -> Self {
        CToken {
            seq: DnaSeq::from_slice(bases),
            weight: weight(bases),
            tail_weight: bases.last().map_or(0, |b| b.weight()),
        }
    }
}

impl fmt::Display for CToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.seq.fmt(f)
    }
}

/// Start index of the token ending just before `end` (i.e. the minimal suffix
/// of `bases[..end]` with weight >= c), or `None` when `bases[..end]` is too
/// light.
#[inline]
pub(crate) fn token_start(bases: &[Base], end: usize, c: u32) -> Option<usize> {
    let mut w = 0;
    for start in (0..end).rev() {
        w += bases[start].weight();
        if w >= c {
            return Some(start);
        }
    }
    None
}

/// All token occurrences of `s`, as (1-based end position, token).
pub fn extract_tokens(s: &DnaSeq, c: u32) -> Vec<(usize, CToken)> {
    let bases = s.bases();
    (1..=bases.len())
        .filter_map(|end| {
            token_start(bases, end, c).map(|start| (end, CToken::from_bases(&bases[start..end])))
        })
        .collect()
}

pub fn is_token(s: &DnaSeq, c: u32) -> bool {
    let bases = s.bases();
    !bases.is_empty() && token_start(bases, bases.len(), c) == Some(0)
}

/// The full token universe for `c`: every string of weight `c`, plus every
/// string of weight `c + 1` that starts with C or G. Sorted.
pub fn enumerate_tokens(c: u32) -> Result<Vec<CToken>> {
    if !(2..=MAX_ENUMERATE_C).contains(&c) {
        return Err(Error::UniverseTooLarge(c));
    }
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(c as usize + 1);
    strings_of_weight(c, &mut buf, &mut |x| out.push(CToken::from_bases(x)));
    for first in [Base::C, Base::G] {
        buf.clear();
        buf.push(first);
        strings_of_weight(c - 1, &mut buf, &mut |x| out.push(CToken::from_bases(x)));
    }
    out.sort();
    Ok(out)
}

/// Calls `f` with `buf + y` for every string `y` of weight `remaining`.
fn strings_of_weight(remaining: u32, buf: &mut Vec<Base>, f: &mut dyn FnMut(&[Base])) {
    if remaining == 0 {
        f(buf);
        return;
    }
    for b in Base::ALL {
        if b.weight() <= remaining {
            buf.push(b);
            strings_of_weight(remaining - b.weight(), buf, f);
            buf.pop();
        }
    }
}

/// The seven token classes, keyed by total weight and the kind of the
/// boundary bases. `W` is a weak base, `S` a strong one and `<k>` any string
/// of weight `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenClass {
    /// `W<c-3>S`, weight c
    WeakStrong,
    /// `S<c-4>S`, weight c
    StrongStrong,
    /// `S<c-3>S`, weight c+1
    StrongStrongHeavy,
    /// `W<c-2>W`, weight c
    WeakWeak,
    /// `S<c-3>W`, weight c
    StrongWeak,
    /// `S<c-3>WW`, weight c+1
    StrongWeakWeak,
    /// `S<c-4>SW`, weight c+1
    StrongStrongWeak,
}

impl TokenClass {
    pub const ALL: [TokenClass; 7] = [
        TokenClass::WeakStrong,
        TokenClass::StrongStrong,
        TokenClass::StrongStrongHeavy,
        TokenClass::WeakWeak,
        TokenClass::StrongWeak,
        TokenClass::StrongWeakWeak,
        TokenClass::StrongStrongWeak,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TokenClass::WeakStrong => "W<c-3>S",
            TokenClass::StrongStrong => "S<c-4>S",
            TokenClass::StrongStrongHeavy => "S<c-3>S",
            TokenClass::WeakWeak => "W<c-2>W",
            TokenClass::StrongWeak => "S<c-3>W",
            TokenClass::StrongWeakWeak => "S<c-3>WW",
            TokenClass::StrongStrongWeak => "S<c-4>SW",
        }
    }

    /// Class of the token suffix of the reverse complement of any token in
    /// this class.
    pub fn complement_suffix_class(self) -> TokenClass {
        match self {
            TokenClass::WeakStrong => TokenClass::StrongWeak,
            TokenClass::StrongStrong => TokenClass::StrongStrong,
            TokenClass::StrongStrongHeavy => TokenClass::StrongStrongHeavy,
            TokenClass::WeakWeak => TokenClass::WeakWeak,
            TokenClass::StrongWeak => TokenClass::WeakStrong,
            TokenClass::StrongWeakWeak => TokenClass::WeakStrong,
            TokenClass::StrongStrongWeak => TokenClass::StrongStrong,
        }
    }

    /// Whether the reverse complement of a token of this class is itself a
    /// token.
    pub fn complement_is_token(self) -> bool {
        !matches!(
            self,
            TokenClass::StrongWeakWeak | TokenClass::StrongStrongWeak
        )
    }

    /// Closed-form class size in terms of G_n, valid for c >= 4.
    pub fn size(self, c: u32) -> BigUint {
        let (mult, n) = match self {
            TokenClass::WeakStrong => (4u32, c - 3),
            TokenClass::StrongStrong => (4, c - 4),
            TokenClass::StrongStrongHeavy => (4, c - 3),
            TokenClass::WeakWeak => (4, c - 2),
            TokenClass::StrongWeak => (4, c - 3),
            TokenClass::StrongWeakWeak => (8, c - 3),
            TokenClass::StrongStrongWeak => (8, c - 4),
        };
        g(n) * mult
    }
}

impl fmt::Display for TokenClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn classify(t: &DnaSeq, c: u32) -> Result<TokenClass> {
    if c < 4 || !is_token(t, c) {
        return Err(Error::NotAToken(t.to_string(), c));
    }
    let b = t.bases();
    let first = b[0].is_strong();
    let last = b[b.len() - 1].is_strong();
    let class = if t.weight() == c {
        match (first, last) {
            (false, true) => TokenClass::WeakStrong,
            (true, true) => TokenClass::StrongStrong,
            (false, false) => TokenClass::WeakWeak,
            (true, false) => TokenClass::StrongWeak,
        }
    } else {
        // weight c + 1, which forces a strong first base
        let penultimate = b[b.len() - 2].is_strong();
        match (last, penultimate) {
            (true, _) => TokenClass::StrongStrongHeavy,
            (false, false) => TokenClass::StrongWeakWeak,
            (false, true) => TokenClass::StrongStrongWeak,
        }
    };
    Ok(class)
}

/// Upper bounds on the number of distinct tokens, and on their total tail
/// weight, over all tags of a set satisfying the repeat and complement
/// constraints. Requires c >= 4.
pub fn token_bounds(c: u32) -> Result<(BigUint, BigUint)> {
    if c < 4 {
        return Err(Error::InvalidParameter(format!(
            "token bounds need c >= 4, got {c}"
        )));
    }
    let base_tokens = g(c - 2) * 3u32 + g(c - 3) * 6u32;
    let base_tail = g(c - 1) * 2u32 + g(c - 3) * 4u32;
    if c % 2 == 1 {
        let self_compl = g((c - 3) / 2);
        Ok((base_tokens + &self_compl, base_tail + self_compl * 2u32))
    } else {
        // G_n is even for n >= 1 and c/2 >= 2, so the halving is exact.
        let half = g(c / 2) / 2u32;
        Ok((
            base_tokens + half,
            base_tail + g((c - 2) / 2) + g((c - 4) / 2) * 2u32,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub c: u32,
    pub token_bound: BigUint,
    pub tail_weight_bound: BigUint,
    pub tag_bound_by_length: Option<BigUint>,
    pub tag_bound_by_weight: Option<BigUint>,
    pub tag_bound: BigUint,
}

impl BoundReport {
    pub fn tag_bound_u64(&self) -> Option<u64> {
        self.tag_bound.to_u64()
    }
}

/// Maximum number of tags of length `l` and/or minimum weight `h` in a set
/// satisfying all three constraints.
pub fn tag_bound(c: u32, l: Option<u32>, h: Option<u32>) -> Result<BoundReport> {
    if l.is_none() && h.is_none() {
        return Err(Error::InvalidParameter(
            "at least one of length and weight is required".into(),
        ));
    }
    if let Some(l) = l {
        if l < c {
            return Err(Error::InvalidParameter(format!(
                "length {l} is smaller than c={c}"
            )));
        }
    }
    if let Some(h) = h {
        if h < c {
            return Err(Error::InvalidParameter(format!(
                "weight {h} is smaller than c={c}"
            )));
        }
    }
    if let (Some(l), Some(h)) = (l, h) {
        if !(l <= h && h <= 2 * l) {
            return Err(Error::InvalidParameter(format!(
                "need l <= h <= 2l, got l={l} h={h}"
            )));
        }
    }
    let (token_bound, tail_weight_bound) = token_bounds(c)?;
    let by_length = l.map(|l| &token_bound / (l - c + 1));
    let by_weight = h.map(|h| &tail_weight_bound / (h - c + 1));
    let tag_bound = match (&by_length, &by_weight) {
        (Some(a), Some(b)) => a.min(b).clone(),
        (Some(a), None) => a.clone(),
        (None, Some(b)) => b.clone(),
        (None, None) => unreachable!(),
    };
    Ok(BoundReport {
        c,
        token_bound,
        tail_weight_bound,
        tag_bound_by_length: by_length,
        tag_bound_by_weight: by_weight,
        tag_bound,
    })
}
