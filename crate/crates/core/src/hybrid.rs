//! Primer/tag hybridization and the assignability test.
//!
//! A primer hybridizes to a tag when some c-token of the primer has its
//! reverse complement inside the tag. A set of pools is assignable when one
//! primer per pool can be mapped one-to-one onto tags such that no selected
//! primer hybridizes to a tag assigned to a different primer.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seq::{pack, pack_revcomp, weight, Base, DnaSeq};
use crate::tokens::token_start;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pool {
    pub id: String,
    pub primers: Vec<DnaSeq>,
}

impl Pool {
    pub fn new(id: impl Into<String>, primers: Vec<DnaSeq>) -> Self {
        Pool {
            id: id.into(),
            primers,
        }
    }
}

/// Whether some c-token of `primer` occurs reverse-complemented in `tag`.
pub fn hybridizes(primer: &DnaSeq, tag: &DnaSeq, c: u32) -> bool {
    let p = primer.bases();
    (1..=p.len()).any(|end| match token_start(p, end, c) {
        Some(start) => {
            let rc: Vec<Base> = p[start..end].iter().rev().map(|b| b.complement()).collect();
            tag.contains(&rc)
        }
        None => false,
    })
}

/// Bipartite primer/tag adjacency. Primers are numbered globally, pool by
/// pool, in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybGraph {
    pub c: u32,
    pool_offsets: Vec<usize>,
    primer_pool: Vec<usize>,
    tags_of: Vec<Vec<u32>>,
    primers_of: Vec<Vec<u32>>,
}

impl HybGraph {
    pub fn num_pools(&self) -> usize {
        self.pool_offsets.len() - 1
    }

    pub fn num_primers(&self) -> usize {
        self.primer_pool.len()
    }

    pub fn num_tags(&self) -> usize {
        self.primers_of.len()
    }

    pub fn num_edges(&self) -> usize {
        self.tags_of.iter().map(Vec::len).sum()
    }

    /// Global id of primer `primer` of pool `pool`.
    pub fn primer_id(&self, pool: usize, primer: usize) -> usize {
        debug_assert!(primer < self.pool_size(pool));
        self.pool_offsets[pool] + primer
    }

    pub fn pool_size(&self, pool: usize) -> usize {
        self.pool_offsets[pool + 1] - self.pool_offsets[pool]
    }

    pub fn pool_of(&self, primer_id: usize) -> usize {
        self.primer_pool[primer_id]
    }

    /// (pool, index within pool) of a global primer id.
    pub fn locate(&self, primer_id: usize) -> (usize, usize) {
        let pool = self.primer_pool[primer_id];
        (pool, primer_id - self.pool_offsets[pool])
    }

    /// T(p), sorted.
    pub fn tags_of(&self, primer_id: usize) -> &[u32] {
        &self.tags_of[primer_id]
    }

    /// P(t) over all primers, sorted.
    pub fn primers_of(&self, tag: usize) -> &[u32] {
        &self.primers_of[tag]
    }

    fn from_adjacency(pools: &[Pool], n_tags: usize, c: u32, tags_of: Vec<Vec<u32>>) -> Self {
        let mut pool_offsets = Vec::with_capacity(pools.len() + 1);
        let mut primer_pool = Vec::new();
        pool_offsets.push(0);
        for (i, pool) in pools.iter().enumerate() {
            primer_pool.extend(std::iter::repeat_n(i, pool.primers.len()));
            pool_offsets.push(primer_pool.len());
        }
        let mut primers_of = vec![Vec::new(); n_tags];
        for (p, ts) in tags_of.iter().enumerate() {
            for &t in ts {
                primers_of[t as usize].push(p as u32);
            }
        }
        HybGraph {
            c,
            pool_offsets,
            primer_pool,
            tags_of,
            primers_of,
        }
    }
}

/// Index from every tag substring of weight c or c+1 (the possible reverse
/// complements of a token) to the tags containing it.
fn complement_index(tags: &[DnaSeq], c: u32) -> HashMap<u64, Vec<u32>> {
    let mut index: HashMap<u64, Vec<u32>> = HashMap::new();
    for (i, tag) in tags.iter().enumerate() {
        let b = tag.bases();
        for end in 1..=b.len() {
            let Some(start) = token_start(b, end, c) else {
                continue;
            };
            let mut push = |key: u64| {
                let list = index.entry(key).or_default();
                if list.last() != Some(&(i as u32)) {
                    list.push(i as u32);
                }
            };
            push(pack(&b[start..end]));
            if start > 0 && weight(&b[start..end]) == c && !b[start - 1].is_strong() {
                push(pack(&b[start - 1..end]));
            }
        }
    }
    index
}

/// Builds T(p) and P(t) for every primer of every pool.
pub fn build_graph(pools: &[Pool], tags: &[DnaSeq], c: u32) -> Result<HybGraph> {
    if tags.is_empty() {
        return Err(Error::NoTags);
    }
    if !(2..=29).contains(&c) {
        return Err(Error::InvalidParameter(format!(
            "hybridization c must be in 2..=29, got {c}"
        )));
    }
    let index = complement_index(tags, c);
    let primers: Vec<&DnaSeq> = pools.iter().flat_map(|p| p.primers.iter()).collect();
    let tags_of: Vec<Vec<u32>> = primers
        .par_iter()
        .map(|p| {
            let b = p.bases();
            let mut hits = Vec::new();
            for end in 1..=b.len() {
                if let Some(start) = token_start(b, end, c) {
                    if let Some(list) = index.get(&pack_revcomp(&b[start..end])) {
                        hits.extend_from_slice(list);
                    }
                }
            }
            hits.sort_unstable();
            hits.dedup();
            hits
        })
        .collect();
    Ok(HybGraph::from_adjacency(pools, tags.len(), c, tags_of))
}

/// Reference construction: `hybridizes` on every primer/tag pair.
pub fn build_graph_naive(pools: &[Pool], tags: &[DnaSeq], c: u32) -> Result<HybGraph> {
    if tags.is_empty() {
        return Err(Error::NoTags);
    }
    let tags_of = pools
        .iter()
        .flat_map(|pool| pool.primers.iter())
        .map(|p| {
            (0..tags.len() as u32)
                .filter(|&t| hybridizes(p, &tags[t as usize], c))
                .collect()
        })
        .collect();
    Ok(HybGraph::from_adjacency(pools, tags.len(), c, tags_of))
}

/// A subset P' of the pools: each entry is a pool index and the indices of
/// its primers still present, in original order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivePool {
    pub pool: usize,
    pub primers: Vec<usize>,
}

/// Every pool with every primer.
pub fn all_pools(graph: &HybGraph) -> Vec<ActivePool> {
    (0..graph.num_pools())
        .map(|pool| ActivePool {
            pool,
            primers: (0..graph.pool_size(pool)).collect(),
        })
        .collect()
}

/// Per tag, the pool holding all of its active hybridizing primers when
/// there is exactly one such pool; `None` when there are none or several.
/// The second vector counts active hybridizing primers per tag.
fn tag_owners(graph: &HybGraph, active: &[ActivePool]) -> (Vec<Option<usize>>, Vec<usize>) {
    let mut owner: Vec<Option<usize>> = vec![None; graph.num_tags()];
    let mut shared = vec![false; graph.num_tags()];
    let mut count = vec![0usize; graph.num_tags()];
    for ap in active {
        for &i in &ap.primers {
            for &t in graph.tags_of(graph.primer_id(ap.pool, i)) {
                let t = t as usize;
                count[t] += 1;
                match owner[t] {
                    None if !shared[t] => owner[t] = Some(ap.pool),
                    Some(o) if o != ap.pool => {
                        owner[t] = None;
                        shared[t] = true;
                    }
                    _ => {}
                }
            }
        }
    }
    (owner, count)
}

/// X(P'): pools with a primer hybridizing to a tag whose active hybridizing
/// primers all lie in that pool. Y(P'): tags hybridizing to no active
/// primer. Both sorted.
pub fn compute_xy(graph: &HybGraph, active: &[ActivePool]) -> (Vec<usize>, Vec<usize>) {
    let (owner, count) = tag_owners(graph, active);
    let mut x: Vec<usize> = owner.iter().flatten().copied().collect();
    x.sort_unstable();
    x.dedup();
    let y = (0..graph.num_tags()).filter(|&t| count[t] == 0).collect();
    (x, y)
}

/// Sufficient condition for assignability: |X| + |Y| >= |P'|.
pub fn condition_holds(graph: &HybGraph, active: &[ActivePool]) -> bool {
    let (x, y) = compute_xy(graph, active);
    x.len() + y.len() >= active.len()
}

/// One selected primer and its tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub pool: usize,
    /// Index within the pool.
    pub primer: usize,
    pub tag: usize,
}

/// Assigns every pool of `active`: X pools get their first private witness
/// (lowest primer, then lowest tag), the rest get their first primer and the
/// next free tag of Y. Output follows the order of `active`.
pub fn construct_assignment(graph: &HybGraph, active: &[ActivePool]) -> Result<Vec<Assignment>> {
    let (owner, count) = tag_owners(graph, active);
    let mut free = (0..graph.num_tags()).filter(|&t| count[t] == 0);
    let mut out = Vec::with_capacity(active.len());
    let mut pending = Vec::new();
    for ap in active {
        let witness = ap.primers.iter().find_map(|&i| {
            graph
                .tags_of(graph.primer_id(ap.pool, i))
                .iter()
                .find(|&&t| owner[t as usize] == Some(ap.pool))
                .map(|&t| (i, t as usize))
        });
        match witness {
            Some((primer, tag)) => out.push(Some(Assignment {
                pool: ap.pool,
                primer,
                tag,
            })),
            None => {
                pending.push(out.len());
                out.push(None);
            }
        }
    }
    for slot in pending {
        let ap = &active[slot];
        let (Some(&primer), Some(tag)) = (ap.primers.first(), free.next()) else {
            return Err(Error::ConditionNotSatisfied);
        };
        out[slot] = Some(Assignment {
            pool: ap.pool,
            primer,
            tag,
        });
    }
    Ok(out.into_iter().map(|a| a.expect("filled")).collect())
}

/// One-to-one, and no selected primer hybridizes to a tag assigned to a
/// different primer.
pub fn validate_assignment(graph: &HybGraph, selection: &[Assignment]) -> bool {
    let mut owner_of_tag: HashMap<usize, usize> = HashMap::with_capacity(selection.len());
    for (i, a) in selection.iter().enumerate() {
        if a.tag >= graph.num_tags() || owner_of_tag.insert(a.tag, i).is_some() {
            return false;
        }
    }
    selection.iter().enumerate().all(|(i, a)| {
        graph
            .tags_of(graph.primer_id(a.pool, a.primer))
            .iter()
            .all(|&t| owner_of_tag.get(&(t as usize)).is_none_or(|&j| j == i))
    })
}

/// A scheduled primer: array number (from 1), pool, primer within the pool,
/// and tag index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlanEntry {
    pub array: usize,
    pub pool: usize,
    pub primer: usize,
    pub tag: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AssignmentPlan {
    pub entries: Vec<PlanEntry>,
}

impl AssignmentPlan {
    pub fn num_arrays(&self) -> usize {
        self.entries.iter().map(|e| e.array).max().unwrap_or(0)
    }

    pub fn array(&self, k: usize) -> Vec<Assignment> {
        self.entries
            .iter()
            .filter(|e| e.array == k)
            .map(|e| Assignment {
                pool: e.pool,
                primer: e.primer,
                tag: e.tag,
            })
            .collect()
    }

    /// Every pool of `graph` exactly once, and every array valid.
    pub fn validate(&self, graph: &HybGraph) -> bool {
        let mut seen = HashSet::new();
        let pools_ok = self.entries.iter().all(|e| {
            e.pool < graph.num_pools() && e.primer < graph.pool_size(e.pool) && seen.insert(e.pool)
        }) && seen.len() == graph.num_pools();
        pools_ok && (1..=self.num_arrays()).all(|k| validate_assignment(graph, &self.array(k)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(x: &str) -> DnaSeq {
        x.parse().unwrap()
    }

    fn random_seq(rng: &mut impl Rng, len: usize) -> DnaSeq {
        DnaSeq::new((0..len).map(|_| Base::ALL[rng.random_range(0..4)]).collect())
    }

    fn singleton_pools(primers: &[&str]) -> Vec<Pool> {
        primers
            .iter()
            .enumerate()
            .map(|(i, p)| Pool::new(format!("P{}", i + 1), vec![s(p)]))
            .collect()
    }

    #[test]
    fn hybridizes_examples() {
        assert!(hybridizes(&s("GGATACGGG"), &s("AACGTATAA"), 7));
        assert!(!hybridizes(
            &s("AAAAAAAAAAAAAAAAAAAA"),
            &s("CCCCCCCCCCCCCCCCCCCC"),
            7
        ));
        let q = s("ACGTTGCAAGT");
        assert!(hybridizes(&q, &q.revcomp(), 7));
        // too light to contain a token
        assert!(!hybridizes(&s("AAT"), &s("ATT"), 7));
    }

    #[test]
    fn build_graph_examples() {
        let pools = singleton_pools(&["AAAAAAAAAA"]);
        assert_eq!(build_graph(&pools, &[], 7), Err(Error::NoTags));
        let g = build_graph(&pools, &[s("CCCCCCCCCC")], 7).unwrap();
        assert_eq!(g.num_edges(), 0);
        let g = build_graph(&pools, &[s("AAAAAAAAAA").revcomp()], 7).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.tags_of(0), &[0]);
        assert_eq!(g.primers_of(0), &[0]);
    }

    fn random_instance(rng: &mut ChaCha8Rng, c: u32) -> (Vec<Pool>, Vec<DnaSeq>) {
        let n_pools = rng.random_range(1..=6);
        let pools = (0..n_pools)
            .map(|i| {
                let k = rng.random_range(1..=3);
                Pool::new(
                    format!("p{i}"),
                    (0..k)
                        .map(|_| {
                            let len = rng.random_range(1..=10);
                            random_seq(rng, len)
                        })
                        .collect(),
                )
            })
            .collect();
        let n_tags = rng.random_range(1..=8);
        let tags = (0..n_tags)
            .map(|_| {
                let len = rng.random_range(c as usize / 2..=10);
                random_seq(rng, len)
            })
            .collect();
        (pools, tags)
    }

    #[test]
    fn indexed_graph_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut edges = 0;
        for _ in 0..300 {
            let c = rng.random_range(2..=7);
            let (pools, tags) = random_instance(&mut rng, c);
            let fast = build_graph(&pools, &tags, c).unwrap();
            let slow = build_graph_naive(&pools, &tags, c).unwrap();
            assert_eq!(fast, slow);
            edges += fast.num_edges();
            for p in 0..fast.num_primers() {
                for &t in fast.tags_of(p) {
                    assert!(fast.primers_of(t as usize).contains(&(p as u32)));
                }
            }
        }
        assert!(edges > 0);
    }

    fn graph(pools: &[Pool], tags: &[&str], c: u32) -> HybGraph {
        let tags: Vec<DnaSeq> = tags.iter().map(|t| s(t)).collect();
        build_graph(pools, &tags, c).unwrap()
    }

    #[test]
    fn xy_examples() {
        // one pool whose primer hybridizes the only tag
        let pools = singleton_pools(&["ACGTTGCA"]);
        let g = graph(&pools, &["TGCAACGT"], 4);
        assert_eq!(g.num_edges(), 1);
        let all = all_pools(&g);
        assert_eq!(compute_xy(&g, &all), (vec![0], vec![]));
        assert!(condition_holds(&g, &all));

        // no edges, two tags
        let g = graph(&pools, &["AAAAAAAA", "TTAATTAA"], 4);
        assert_eq!(g.num_edges(), 0);
        assert_eq!(compute_xy(&g, &all_pools(&g)), (vec![], vec![0, 1]));

        // two singleton pools sharing the only tag
        let pools = singleton_pools(&["ACGTTGCA", "GTTGCAAA"]);
        let g = graph(&pools, &["TGCAACGT"], 4);
        assert_eq!(g.primers_of(0).len(), 2);
        let all = all_pools(&g);
        assert_eq!(compute_xy(&g, &all), (vec![], vec![]));
        assert!(!condition_holds(&g, &all));
        assert!(condition_holds(&g, &[]));
        assert_eq!(construct_assignment(&g, &all), Err(Error::ConditionNotSatisfied));
    }

    #[test]
    fn restriction_to_active_primers() {
        // deleting one of the two sharing primers makes the tag private
        let pools = singleton_pools(&["ACGTTGCA", "GTTGCAAA"]);
        let g = graph(&pools, &["TGCAACGT"], 4);
        let one = vec![ActivePool {
            pool: 1,
            primers: vec![0],
        }];
        assert_eq!(compute_xy(&g, &one), (vec![1], vec![]));
    }

    #[test]
    fn construct_examples() {
        let pools = vec![
            Pool::new("a", vec![s("ACGTTGCA")]),
            Pool::new("b", vec![s("AAAAAAAA"), s("CAGGTCAA")]),
        ];
        // tag 0 hybridizes pool a, tag 1 nobody, tag 2 hybridizes b's second primer
        let g = graph(&pools, &["TGCAACGT", "GGGGGGGG", "TTGACCTG"], 4);
        let all = all_pools(&g);
        let (x, y) = compute_xy(&g, &all);
        assert_eq!(x, vec![0, 1]);
        assert_eq!(y, vec![1]);
        let sel = construct_assignment(&g, &all).unwrap();
        assert_eq!(
            sel,
            vec![
                Assignment { pool: 0, primer: 0, tag: 0 },
                Assignment { pool: 1, primer: 1, tag: 2 },
            ]
        );
        assert!(validate_assignment(&g, &sel));

        // no edges: first primers onto Y in order
        let g = graph(&pools, &["AAAAAAAA", "ATATATAT"], 4);
        assert_eq!(g.num_edges(), 0);
        let sel = construct_assignment(&g, &all_pools(&g)).unwrap();
        assert_eq!(sel.iter().map(|a| (a.primer, a.tag)).collect::<Vec<_>>(), vec![(0, 0), (0, 1)]);
    }

    #[test]
    fn validate_rejects_bad_selections() {
        let pools = singleton_pools(&["ACGTTGCA", "GTTGCAAA"]);
        let g = graph(&pools, &["TGCAACGT", "GGGGGGGG"], 4);
        let dup = [
            Assignment { pool: 0, primer: 0, tag: 1 },
            Assignment { pool: 1, primer: 0, tag: 1 },
        ];
        assert!(!validate_assignment(&g, &dup));
        // tag 0 goes to primer 1 while primer 2 also hybridizes it
        let cross = [
            Assignment { pool: 0, primer: 0, tag: 0 },
            Assignment { pool: 1, primer: 0, tag: 1 },
        ];
        assert!(!validate_assignment(&g, &cross));
        assert!(validate_assignment(&g, &cross[..1]));
    }

    #[test]
    fn sufficiency_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 1000 {
            let c = rng.random_range(3..=6);
            let (pools, tags) = random_instance(&mut rng, c);
            let g = build_graph(&pools, &tags, c).unwrap();
            // random sub-selection of primers
            let active: Vec<ActivePool> = all_pools(&g)
                .into_iter()
                .filter_map(|mut ap| {
                    ap.primers.retain(|_| rng.random_bool(0.7));
                    (!ap.primers.is_empty()).then_some(ap)
                })
                .collect();
            if !condition_holds(&g, &active) {
                continue;
            }
            let sel = construct_assignment(&g, &active).unwrap();
            assert_eq!(sel.len(), active.len());
            assert!(validate_assignment(&g, &sel));
            checked += 1;
        }
    }
}
