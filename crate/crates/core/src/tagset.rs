//! Feasible tag sets: greedy backtracking generation and verification.
//!
//! A tag set is feasible for parameters (l, h, c) when
//! * C1: every tag has the required length and weight,
//! * C2: every string of weight >= c occurs at most once over all tags,
//! * C3: if a string x of weight >= c occurs, its reverse complement does not
//!   occur anywhere unless x is self-complementary.
//!
//! Both C2 and C3 reduce exactly to checks on c-tokens: a repeated heavy
//! substring repeats its token suffix, and a complementary pair of heavy
//! substrings contains a token whose reverse complement occurs. The reduction
//! is what makes incremental generation cheap; [`oracle_verify`] checks the
//! literal quantifiers instead and is used to test it.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::seq::{pack, pack_revcomp, revcomp, weight, Base, DnaSeq};
use crate::tokens::token_start;

/// Letter order used by the generator.
pub const GENERATION_ORDER: [Base; 4] = [Base::A, Base::C, Base::T, Base::G];

/// Default cap on the number of letter trials made by [`greedy_generate`].
pub const DEFAULT_NODE_BUDGET: u64 = 200_000_000;

/// Largest `c` supported by the generator (tokens must pack into a `u64`).
pub const MAX_GENERATION_C: u32 = 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSetConfig {
    pub c: u32,
    /// Exact tag length `l`.
    pub length: Option<usize>,
    /// Minimum tag weight `h`. Enables the weight constraint.
    pub min_weight: Option<u32>,
    /// Maximum tag weight; only meaningful together with `min_weight`.
    pub max_weight: Option<u32>,
    pub enforce_c3: bool,
    pub max_tags: Option<usize>,
    pub node_budget: u64,
}

impl TagSetConfig {
    pub fn new(c: u32) -> Self {
        TagSetConfig {
            c,
            length: None,
            min_weight: None,
            max_weight: None,
            enforce_c3: true,
            max_tags: None,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    pub fn with_length(mut self, l: usize) -> Self {
        self.length = Some(l);
        self
    }

    pub fn with_weight_range(mut self, min: u32, max: u32) -> Self {
        self.min_weight = Some(min);
        self.max_weight = Some(max);
        self
    }

    pub fn with_c3(mut self, enforce: bool) -> Self {
        self.enforce_c3 = enforce;
        self
    }

    pub fn with_max_tags(mut self, n: usize) -> Self {
        self.max_tags = Some(n);
        self
    }

    pub fn with_node_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.c < 4 || self.c > MAX_GENERATION_C {
            return bad(format!("c must be in 4..={MAX_GENERATION_C}, got {}", self.c));
        }
        if self.length.is_none() && self.min_weight.is_none() {
            return bad("a length or a minimum weight is required".into());
        }
        if self.max_weight.is_some() && self.min_weight.is_none() {
            return bad("a maximum weight needs a minimum weight".into());
        }
        if let (Some(lo), Some(hi)) = (self.min_weight, self.max_weight) {
            if lo > hi {
                return bad(format!("min weight {lo} exceeds max weight {hi}"));
            }
        }
        match (self.length, self.min_weight) {
            (Some(l), Some(lo)) => {
                let hi = self.max_weight.unwrap_or(2 * l as u32);
                if !(l as u32 <= lo && hi <= 2 * l as u32) {
                    return bad(format!(
                        "need length <= min weight <= max weight <= 2 * length, got {l}, {lo}, {hi}"
                    ));
                }
                if self.c > lo {
                    return bad(format!("c={} exceeds the minimum weight {lo}", self.c));
                }
            }
            (Some(l), None) => {
                if self.c as usize > l {
                    return bad(format!("c={} exceeds the tag length {l}", self.c));
                }
            }
            (None, Some(lo)) => {
                if self.c > lo {
                    return bad(format!("c={} exceeds the minimum weight {lo}", self.c));
                }
            }
            (None, None) => unreachable!(),
        }
        Ok(())
    }
}

/// Tokens (and, under C3, every substring of weight c or c+1) committed by
/// accepted tags.
#[derive(Debug, Clone, Default)]
pub struct TokenRegistry {
    tokens: HashSet<u64>,
    windows: HashSet<u64>,
}

impl TokenRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains_token(&self, token: &[Base]) -> bool {
        self.tokens.contains(&pack(token))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Commits every token and window of `tag`.
    pub fn commit_tag(&mut self, tag: &[Base], c: u32) {
        for end in 1..=tag.len() {
            if let Some(keys) = PositionKeys::at(tag, end, c) {
                self.commit(&keys);
            }
        }
    }

    fn commit(&mut self, keys: &PositionKeys) {
        self.tokens.insert(keys.token);
        self.windows.extend(keys.windows());
    }
}

/// Packed keys of the strings ending at one position: the token, and the
/// suffix one base longer when it weighs exactly c+1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PositionKeys {
    token: u64,
    token_rc: u64,
    longer: Option<(u64, u64)>,
}

impl PositionKeys {
    fn at(bases: &[Base], end: usize, c: u32) -> Option<Self> {
        let start = token_start(bases, end, c)?;
        let token = &bases[start..end];
        let longer = if start > 0 && weight(token) == c && !bases[start - 1].is_strong() {
            let y = &bases[start - 1..end];
            Some((pack(y), pack_revcomp(y)))
        } else {
            None
        };
        Some(PositionKeys {
            token: pack(token),
            token_rc: pack_revcomp(token),
            longer,
        })
    }

    fn windows(&self) -> impl Iterator<Item = u64> {
        std::iter::once(self.token).chain(self.longer.map(|(k, _)| k))
    }

    /// Longest first.
    fn windows_rc(&self) -> impl Iterator<Item = (u64, u64)> {
        self.longer.into_iter().chain(std::iter::once((self.token, self.token_rc)))
    }
}

/// Why a letter was refused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    /// The new token already occurs (C2).
    Repeat(DnaSeq),
    /// A new string of weight c or c+1 is the complement of an occurring
    /// token, or the new token's complement already occurs (C3).
    Complement { new: DnaSeq, existing: DnaSeq },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Repeat(t) => write!(f, "token {t} already used"),
            Rejection::Complement { new, existing } => {
                write!(f, "{new} is complementary to {existing}")
            }
        }
    }
}

fn unpack(mut key: u64) -> DnaSeq {
    let mut out = Vec::new();
    while key > 1 {
        out.push(match key & 3 {
            0 => Base::A,
            1 => Base::C,
            2 => Base::G,
            _ => Base::T,
        });
        key >>= 2;
    }
    out.reverse();
    DnaSeq::new(out)
}

/// Decides whether `new` (ending the current prefix) may be accepted, given
/// the committed registry and the keys of earlier prefix positions.
fn check_position(
    new: &PositionKeys,
    prefix: &[PositionKeys],
    registry: &TokenRegistry,
    enforce_c3: bool,
) -> std::result::Result<(), Rejection> {
    if registry.tokens.contains(&new.token) || prefix.iter().any(|p| p.token == new.token) {
        return Err(Rejection::Repeat(unpack(new.token)));
    }
    if !enforce_c3 {
        return Ok(());
    }
    for (key, rc) in new.windows_rc() {
        if rc != key
            && (registry.tokens.contains(&rc) || prefix.iter().any(|p| p.token == rc))
        {
            return Err(Rejection::Complement {
                new: unpack(key),
                existing: unpack(rc),
            });
        }
    }
    if new.token_rc != new.token
        && (registry.windows.contains(&new.token_rc)
            || prefix.iter().any(|p| p.windows().any(|w| w == new.token_rc)))
    {
        return Err(Rejection::Complement {
            new: unpack(new.token),
            existing: unpack(new.token_rc),
        });
    }
    Ok(())
}

/// Tests whether appending `letter` to `prefix` keeps the tag under
/// construction compatible with the committed `registry`. Only the strings
/// ending at the new position are examined; nothing is committed.
pub fn try_extend(
    prefix: &DnaSeq,
    letter: Base,
    registry: &TokenRegistry,
    config: &TagSetConfig,
) -> std::result::Result<(), Rejection> {
    let mut bases = prefix.bases().to_vec();
    bases.push(letter);
    let c = config.c;
    let earlier: Vec<PositionKeys> = (1..bases.len())
        .filter_map(|end| PositionKeys::at(&bases, end, c))
        .collect();
    match PositionKeys::at(&bases, bases.len(), c) {
        None => Ok(()),
        Some(keys) => check_position(&keys, &earlier, registry, config.enforce_c3),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationOutcome {
    pub tags: Vec<DnaSeq>,
    /// Letter trials performed.
    pub nodes: u64,
    /// True when the search stopped because `node_budget` ran out.
    pub budget_exhausted: bool,
}

struct Frame {
    letter_idx: usize,
    keys: Option<PositionKeys>,
}

/// Greedy tag selection. Tags are grown letter by letter in the order
/// A, C, T, G; a letter is refused when it completes a used token or, under
/// C3, a complement of one. A finished tag is saved, its strings committed,
/// and the search resumes by advancing the last letter of the tag's first
/// token.
pub fn greedy_generate(config: &TagSetConfig) -> Result<Vec<DnaSeq>> {
    greedy_generate_with_stats(config).map(|o| o.tags)
}

pub fn greedy_generate_with_stats(config: &TagSetConfig) -> Result<GenerationOutcome> {
    config.validate()?;
    let c = config.c;
    let max_tags = config.max_tags.unwrap_or(usize::MAX);
    let min_w = config.min_weight;
    let max_w = match (config.max_weight, config.length) {
        (Some(m), _) => Some(m),
        (None, Some(l)) if min_w.is_some() => Some(2 * l as u32),
        _ => None,
    };

    let mut registry = TokenRegistry::new();
    let mut tags = Vec::new();
    let mut bases: Vec<Base> = Vec::new();
    let mut frames: Vec<Frame> = Vec::new();
    let mut keys_on_path: Vec<PositionKeys> = Vec::new();
    let mut weight_sum: Vec<u32> = vec![0];
    let mut next_idx = 0usize;
    let mut nodes = 0u64;
    let mut budget_exhausted = false;

    'search: while tags.len() < max_tags {
        let depth = bases.len();
        let mut accepted = None;
        for (idx, &letter) in GENERATION_ORDER.iter().enumerate().skip(next_idx) {
            if nodes >= config.node_budget {
                budget_exhausted = true;
                break 'search;
            }
            nodes += 1;
            let w = weight_sum[depth] + letter.weight();
            if let Some(hi) = max_w {
                let remaining = config.length.map_or(0, |l| (l - depth - 1) as u32);
                if w + remaining > hi {
                    continue;
                }
            }
            if let (Some(lo), Some(l)) = (min_w, config.length) {
                if w + 2 * ((l - depth - 1) as u32) < lo {
                    continue;
                }
            }
            bases.push(letter);
            let keys = PositionKeys::at(&bases, depth + 1, c);
            let ok = match &keys {
                None => true,
                Some(k) => check_position(k, &keys_on_path, &registry, config.enforce_c3).is_ok(),
            };
            if ok {
                accepted = Some((idx, keys, w));
                break;
            }
            bases.pop();
        }

        match accepted {
            Some((idx, keys, w)) => {
                frames.push(Frame {
                    letter_idx: idx,
                    keys,
                });
                if let Some(k) = keys {
                    keys_on_path.push(k);
                }
                weight_sum.push(w);
                next_idx = 0;

                let complete = match (config.length, min_w) {
                    (Some(l), _) => bases.len() == l,
                    (None, Some(lo)) => w >= lo,
                    (None, None) => unreachable!(),
                };
                if complete {
                    for k in &keys_on_path {
                        registry.commit(k);
                    }
                    tags.push(DnaSeq::from_slice(&bases));
                    // resume from the end of the first token
                    let first_token_end = weight_sum
                        .iter()
                        .position(|&s| s >= c)
                        .expect("complete tags contain a token");
                    while bases.len() > first_token_end {
                        pop_frame(&mut bases, &mut frames, &mut keys_on_path, &mut weight_sum);
                    }
                    next_idx = pop_frame(&mut bases, &mut frames, &mut keys_on_path, &mut weight_sum) + 1;
                }
            }
            None => {
                if bases.is_empty() {
                    break;
                }
                next_idx = pop_frame(&mut bases, &mut frames, &mut keys_on_path, &mut weight_sum) + 1;
            }
        }
    }

    Ok(GenerationOutcome {
        tags,
        nodes,
        budget_exhausted,
    })
}

fn pop_frame(
    bases: &mut Vec<Base>,
    frames: &mut Vec<Frame>,
    keys_on_path: &mut Vec<PositionKeys>,
    weight_sum: &mut Vec<u32>,
) -> usize {
    bases.pop();
    weight_sum.pop();
    let frame = frames.pop().expect("frame per base");
    if frame.keys.is_some() {
        keys_on_path.pop();
    }
    frame.letter_idx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    C1,
    C2,
    C3,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Constraint::C1 => "C1",
            Constraint::C2 => "C2",
            Constraint::C3 => "C3",
        };
        f.write_str(s)
    }
}

/// One broken constraint. Occurrences are (tag index, 1-based end position);
/// for C3 they cover both `sequence` and `partner`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub constraint: Constraint,
    pub sequence: String,
    pub partner: Option<String>,
    pub occurrences: Vec<(usize, usize)>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.constraint, self.sequence)?;
        if let Some(p) = &self.partner {
            write!(f, " ~ {p}")?;
        }
        let occ: Vec<String> = self
            .occurrences
            .iter()
            .map(|(t, p)| format!("tag {}@{}", t + 1, p))
            .collect();
        if !occ.is_empty() {
            write!(f, " [{}]", occ.join(", "))?;
        }
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeasibilityReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        FeasibilityReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    pub fn count(&self, constraint: Constraint) -> usize {
        self.violations
            .iter()
            .filter(|v| v.constraint == constraint)
            .count()
    }
}

fn c1_violations(tags: &[DnaSeq], config: &TagSetConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, t) in tags.iter().enumerate() {
        if let Some(l) = config.length {
            if t.len() != l {
                out.push(Violation {
                    constraint: Constraint::C1,
                    sequence: t.to_string(),
                    partner: None,
                    occurrences: vec![(i, t.len())],
                    detail: format!("length {} differs from {l}", t.len()),
                });
            }
        }
        if let Some(lo) = config.min_weight {
            let w = t.weight();
            let hi = config.max_weight.unwrap_or(u32::MAX);
            if w < lo || w > hi {
                out.push(Violation {
                    constraint: Constraint::C1,
                    sequence: t.to_string(),
                    partner: None,
                    occurrences: vec![(i, t.len())],
                    detail: format!("weight {w} outside [{lo}, {}]", config.max_weight.map_or("inf".to_string(), |m| m.to_string())),
                });
            }
        }
    }
    out
}

type Occurrences = BTreeMap<Vec<Base>, Vec<(usize, usize)>>;

fn complement_violations(strings: &Occurrences, candidates: &Occurrences) -> Vec<Violation> {
    let mut out = Vec::new();
    for (x, occ) in candidates {
        let rc = revcomp(x);
        if rc == *x {
            continue;
        }
        if let Some(rc_occ) = strings.get(&rc) {
            // report each unordered pair once
            if candidates.contains_key(&rc) && rc < *x {
                continue;
            }
            let mut all = occ.clone();
            all.extend(rc_occ.iter().copied());
            out.push(Violation {
                constraint: Constraint::C3,
                sequence: DnaSeq::new(x.clone()).to_string(),
                partner: Some(DnaSeq::new(rc).to_string()),
                occurrences: all,
                detail: String::new(),
            });
        }
    }
    out
}

fn repeat_violations(strings: &Occurrences) -> Vec<Violation> {
    strings
        .iter()
        .filter(|(_, occ)| occ.len() > 1)
        .map(|(x, occ)| Violation {
            constraint: Constraint::C2,
            sequence: DnaSeq::new(x.clone()).to_string(),
            partner: None,
            occurrences: occ.clone(),
            detail: format!("{} occurrences", occ.len()),
        })
        .collect()
}

/// Checks C1, C2 and (when enabled) C3 on token occurrences.
pub fn verify_feasible(tags: &[DnaSeq], config: &TagSetConfig) -> FeasibilityReport {
    let c = config.c;
    let mut violations = c1_violations(tags, config);

    let mut tokens: Occurrences = BTreeMap::new();
    let mut windows: Occurrences = BTreeMap::new();
    for (i, tag) in tags.iter().enumerate() {
        let b = tag.bases();
        for end in 1..=b.len() {
            let Some(start) = token_start(b, end, c) else {
                continue;
            };
            tokens.entry(b[start..end].to_vec()).or_default().push((i, end));
            windows.entry(b[start..end].to_vec()).or_default().push((i, end));
            if start > 0 && weight(&b[start..end]) == c && !b[start - 1].is_strong() {
                windows.entry(b[start - 1..end].to_vec()).or_default().push((i, end));
            }
        }
    }
    violations.extend(repeat_violations(&tokens));
    if config.enforce_c3 {
        violations.extend(complement_violations(&windows, &tokens));
    }
    FeasibilityReport::from_violations(violations)
}

/// Literal check of the three constraints over every substring of weight
/// >= c. Quadratic in tag length; meant for testing on small inputs.
pub fn oracle_verify(tags: &[DnaSeq], config: &TagSetConfig) -> FeasibilityReport {
    let c = config.c;
    let mut violations = c1_violations(tags, config);
    let mut heavy: Occurrences = BTreeMap::new();
    for (i, tag) in tags.iter().enumerate() {
        let b = tag.bases();
        for start in 0..b.len() {
            for end in start + 1..=b.len() {
                if weight(&b[start..end]) >= c {
                    heavy.entry(b[start..end].to_vec()).or_default().push((i, end));
                }
            }
        }
    }
    violations.extend(repeat_violations(&heavy));
    if config.enforce_c3 {
        violations.extend(complement_violations(&heavy, &heavy));
    }
    FeasibilityReport::from_violations(violations)
}
