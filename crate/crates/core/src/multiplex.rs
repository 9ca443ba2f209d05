//! Multi-array scheduling by iterative primer deletion.
//!
//! For each array the remaining pools are taken whole. While the pools fail
//! the |X| + |Y| >= |P'| test, the primer of maximum potential is deleted; a
//! pool losing its last primer is deferred to a later array. The surviving
//! pools are assigned and removed, and the loop repeats until every pool is
//! placed.
//!
//! Tag potential is 2^-k for a tag hybridizing k present primers; a primer's
//! potential sums the potentials of its tags. Potentials are kept as exact
//! fixed-point integers scaled by 2^64, so exponents above 64 contribute 0
//! and incremental updates equal recomputation bit for bit.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hybrid::{
    build_graph, construct_assignment, ActivePool, AssignmentPlan, HybGraph, PlanEntry, Pool,
};
use crate::seq::DnaSeq;

const POTENTIAL_SHIFT: u32 = 64;

/// A sum of terms 2^-k, k <= 64, as an integer multiple of 2^-64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Hash)]
pub struct Potential(u128);

impl Potential {
    pub fn of_tag(active_primers: usize) -> Self {
        if active_primers > POTENTIAL_SHIFT as usize {
            Potential(0)
        } else {
            Potential(1u128 << (POTENTIAL_SHIFT - active_primers as u32))
        }
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2f64.powi(POTENTIAL_SHIFT as i32)
    }
}

impl std::ops::Add for Potential {
    type Output = Potential;
    fn add(self, rhs: Potential) -> Potential {
        Potential(self.0 + rhs.0)
    }
}

impl std::iter::Sum for Potential {
    fn sum<I: Iterator<Item = Potential>>(iter: I) -> Potential {
        iter.fold(Potential::default(), |a, b| a + b)
    }
}

fn active_count(graph: &HybGraph, tag: usize, active: &[ActivePool]) -> usize {
    graph
        .primers_of(tag)
        .iter()
        .filter(|&&p| {
            let (pool, idx) = graph.locate(p as usize);
            active
                .iter()
                .any(|ap| ap.pool == pool && ap.primers.contains(&idx))
        })
        .count()
}

/// 2^-|P'(t)|, computed from scratch.
pub fn tag_potential(graph: &HybGraph, tag: usize, active: &[ActivePool]) -> f64 {
    Potential::of_tag(active_count(graph, tag, active)).to_f64()
}

fn primer_potential_exact(graph: &HybGraph, primer_id: usize, active: &[ActivePool]) -> Potential {
    graph
        .tags_of(primer_id)
        .iter()
        .map(|&t| Potential::of_tag(active_count(graph, t as usize, active)))
        .sum()
}

/// Sum of tag potentials over T(p), computed from scratch.
pub fn primer_potential(graph: &HybGraph, primer_id: usize, active: &[ActivePool]) -> f64 {
    primer_potential_exact(graph, primer_id, active).to_f64()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    PrimerDel,
    /// Never deletes from a single-primer pool unless every pool has one.
    PrimerDelPlus,
    /// Pre-selects each pool's minimum-potential primer.
    MinPot,
    /// Pre-selects each pool's minimum-degree primer.
    MinDeg,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::PrimerDel,
        Variant::PrimerDelPlus,
        Variant::MinPot,
        Variant::MinDeg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::PrimerDel => "primer-del",
            Variant::PrimerDelPlus => "primer-del-plus",
            Variant::MinPot => "min-pot",
            Variant::MinDeg => "min-deg",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Potential,
    Degree,
}

/// The primer of `pool` minimising `metric` against `context`; ties go to
/// the earlier primer.
pub fn select_min(graph: &HybGraph, pool: usize, metric: Metric, context: &[ActivePool]) -> usize {
    assert!(graph.pool_size(pool) > 0, "empty pool");
    (0..graph.pool_size(pool))
        .min_by_key(|&i| {
            let id = graph.primer_id(pool, i);
            match metric {
                Metric::Potential => primer_potential_exact(graph, id, context),
                Metric::Degree => Potential(graph.tags_of(id).len() as u128),
            }
        })
        .expect("non-empty pool")
}

/// Per-array deletion state with incrementally maintained X/Y sizes and
/// potentials.
struct DeletionState<'g> {
    graph: &'g HybGraph,
    plus: bool,
    // per tag: contiguous slots, one per distinct pool among P(t)
    slot_start: Vec<usize>,
    slot_pool: Vec<usize>,
    slot_count: Vec<u32>,
    // per primer, slot index for each entry of tags_of
    edge_slot: Vec<Vec<u32>>,

    in_p: Vec<bool>,
    active: Vec<bool>,
    pool_count: Vec<usize>,
    n_pools: usize,
    multi_pools: usize,
    tag_count: Vec<usize>,
    tag_pools: Vec<u32>,
    private_tags: Vec<usize>,
    x_size: usize,
    y_size: usize,
    potential: Vec<Potential>,
}

impl<'g> DeletionState<'g> {
    fn new(graph: &'g HybGraph, plus: bool) -> Self {
        let n_tags = graph.num_tags();
        let mut slot_start = Vec::with_capacity(n_tags + 1);
        let mut slot_pool = Vec::new();
        for t in 0..n_tags {
            slot_start.push(slot_pool.len());
            for &p in graph.primers_of(t) {
                let pool = graph.pool_of(p as usize);
                if slot_pool.len() == slot_start[t] || *slot_pool.last().unwrap() != pool {
                    slot_pool.push(pool);
                }
            }
        }
        slot_start.push(slot_pool.len());
        let edge_slot = (0..graph.num_primers())
            .map(|p| {
                let pool = graph.pool_of(p);
                graph
                    .tags_of(p)
                    .iter()
                    .map(|&t| {
                        let t = t as usize;
                        let slots = &slot_pool[slot_start[t]..slot_start[t + 1]];
                        (slot_start[t] + slots.binary_search(&pool).expect("pool slot")) as u32
                    })
                    .collect()
            })
            .collect();
        let n_slots = slot_pool.len();
        DeletionState {
            graph,
            plus,
            slot_start,
            slot_pool,
            slot_count: vec![0; n_slots],
            edge_slot,
            in_p: vec![false; graph.num_pools()],
            active: vec![false; graph.num_primers()],
            pool_count: vec![0; graph.num_pools()],
            n_pools: 0,
            multi_pools: 0,
            tag_count: vec![0; n_tags],
            tag_pools: vec![0; n_tags],
            private_tags: vec![0; graph.num_pools()],
            x_size: 0,
            y_size: 0,
            potential: vec![Potential::default(); graph.num_primers()],
        }
    }

    /// Resets to exactly the pools (and primers) of `pools`.
    fn load(&mut self, pools: &[ActivePool]) {
        let g = self.graph;
        self.in_p.fill(false);
        self.active.fill(false);
        self.pool_count.fill(0);
        self.slot_count.fill(0);
        self.tag_count.fill(0);
        self.tag_pools.fill(0);
        self.private_tags.fill(0);
        self.n_pools = pools.len();
        self.multi_pools = 0;
        for ap in pools {
            self.in_p[ap.pool] = true;
            self.pool_count[ap.pool] = ap.primers.len();
            if ap.primers.len() > 1 {
                self.multi_pools += 1;
            }
            for &i in &ap.primers {
                let id = g.primer_id(ap.pool, i);
                self.active[id] = true;
                for (&t, &s) in g.tags_of(id).iter().zip(&self.edge_slot[id]) {
                    self.tag_count[t as usize] += 1;
                    if self.slot_count[s as usize] == 0 {
                        self.tag_pools[t as usize] += 1;
                    }
                    self.slot_count[s as usize] += 1;
                }
            }
        }
        self.y_size = 0;
        for t in 0..g.num_tags() {
            match self.tag_pools[t] {
                0 => self.y_size += 1,
                1 => {
                    let owner = self.owner(t);
                    self.private_tags[owner] += 1;
                }
                _ => {}
            }
        }
        self.x_size = self.private_tags.iter().filter(|&&n| n > 0).count();
        for ap in pools {
            for &i in &ap.primers {
                let id = g.primer_id(ap.pool, i);
                self.potential[id] = g
                    .tags_of(id)
                    .iter()
                    .map(|&t| Potential::of_tag(self.tag_count[t as usize]))
                    .sum();
            }
        }
    }

    /// The only pool with present primers hybridizing `t`.
    fn owner(&self, t: usize) -> usize {
        (self.slot_start[t]..self.slot_start[t + 1])
            .find(|&s| self.slot_count[s] > 0)
            .map(|s| self.slot_pool[s])
            .expect("tag has a present primer")
    }

    fn condition_holds(&self) -> bool {
        self.x_size + self.y_size >= self.n_pools
    }

    /// Maximum-potential deletion candidate; ties go to the lowest pool, then
    /// the lowest primer.
    fn pick(&self) -> Option<usize> {
        let skip_singletons = self.plus && self.multi_pools > 0;
        let mut best: Option<(Potential, usize)> = None;
        for pool in 0..self.graph.num_pools() {
            if !self.in_p[pool] || (skip_singletons && self.pool_count[pool] == 1) {
                continue;
            }
            for i in 0..self.graph.pool_size(pool) {
                let id = self.graph.primer_id(pool, i);
                if self.active[id] && best.is_none_or(|(b, _)| self.potential[id] > b) {
                    best = Some((self.potential[id], id));
                }
            }
        }
        best.map(|(_, id)| id)
    }

    fn delete(&mut self, q: usize) {
        let g = self.graph;
        debug_assert!(self.active[q]);
        self.active[q] = false;
        let pool = g.pool_of(q);
        for (&t, &s) in g.tags_of(q).iter().zip(&self.edge_slot[q]) {
            let (t, s) = (t as usize, s as usize);
            let before = Potential::of_tag(self.tag_count[t]);
            self.tag_count[t] -= 1;
            let gain = Potential::of_tag(self.tag_count[t]).0 - before.0;
            if gain > 0 {
                for &p in g.primers_of(t) {
                    if self.active[p as usize] {
                        self.potential[p as usize].0 += gain;
                    }
                }
            }
            self.slot_count[s] -= 1;
            if self.slot_count[s] == 0 {
                self.tag_pools[t] -= 1;
                match self.tag_pools[t] {
                    0 => {
                        self.y_size += 1;
                        self.private_tags[pool] -= 1;
                        if self.private_tags[pool] == 0 {
                            self.x_size -= 1;
                        }
                    }
                    1 => {
                        let owner = self.owner(t);
                        self.private_tags[owner] += 1;
                        if self.private_tags[owner] == 1 {
                            self.x_size += 1;
                        }
                    }
                    _ => {}
                }
            }
        }
        self.pool_count[pool] -= 1;
        match self.pool_count[pool] {
            1 => self.multi_pools -= 1,
            0 => {
                self.in_p[pool] = false;
                self.n_pools -= 1;
            }
            _ => {}
        }
    }

    /// The current P', pools in input order.
    fn snapshot(&self) -> Vec<ActivePool> {
        (0..self.graph.num_pools())
            .filter(|&pool| self.in_p[pool])
            .map(|pool| ActivePool {
                pool,
                primers: (0..self.graph.pool_size(pool))
                    .filter(|&i| self.active[self.graph.primer_id(pool, i)])
                    .collect(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleResult {
    pub plan: AssignmentPlan,
    pub arrays_used: usize,
    pub per_array_assigned: Vec<usize>,
    /// Percent; averaged over all arrays but the last when there are several.
    pub avg_utilization: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilizationStats {
    pub per_array_assigned: Vec<usize>,
    pub per_array_utilization: Vec<f64>,
    pub avg_utilization: f64,
}

/// Utilization statistics from per-array assignment counts.
pub fn utilization_from_counts(per_array_assigned: &[usize], n_tags: usize) -> UtilizationStats {
    let per_array_utilization: Vec<f64> = per_array_assigned
        .iter()
        .map(|&n| n as f64 / n_tags as f64 * 100.0)
        .collect();
    let counted = match per_array_utilization.len() {
        0 | 1 => &per_array_utilization[..],
        k => &per_array_utilization[..k - 1],
    };
    let avg_utilization = if counted.is_empty() {
        0.0
    } else {
        counted.iter().sum::<f64>() / counted.len() as f64
    };
    UtilizationStats {
        per_array_assigned: per_array_assigned.to_vec(),
        per_array_utilization,
        avg_utilization,
    }
}

pub fn utilization_stats(plan: &AssignmentPlan, n_tags: usize) -> UtilizationStats {
    let mut counts = vec![0usize; plan.num_arrays()];
    for e in &plan.entries {
        counts[e.array - 1] += 1;
    }
    utilization_from_counts(&counts, n_tags)
}

/// The pools each variant starts from: whole pools, or one pre-selected
/// primer per pool for the Min-Pot and Min-Deg heuristics.
fn initial_pools(graph: &HybGraph, variant: Variant) -> Vec<ActivePool> {
    let full = crate::hybrid::all_pools(graph);
    let metric = match variant {
        Variant::PrimerDel | Variant::PrimerDelPlus => return full,
        Variant::MinPot => Metric::Potential,
        Variant::MinDeg => Metric::Degree,
    };
    if metric == Metric::Potential {
        // against the full initial pool set, computed once
        let mut state = DeletionState::new(graph, false);
        state.load(&full);
        return full
            .iter()
            .map(|ap| {
                let best = ap
                    .primers
                    .iter()
                    .copied()
                    .min_by_key(|&i| state.potential[graph.primer_id(ap.pool, i)])
                    .expect("non-empty pool");
                ActivePool {
                    pool: ap.pool,
                    primers: vec![best],
                }
            })
            .collect();
    }
    full.iter()
        .map(|ap| ActivePool {
            pool: ap.pool,
            primers: vec![select_min(graph, ap.pool, metric, &full)],
        })
        .collect()
}

/// Schedules every pool of `graph` onto arrays.
pub fn schedule_on_graph(graph: &HybGraph, variant: Variant) -> Result<ScheduleResult> {
    if graph.num_tags() == 0 {
        return Err(Error::NoTags);
    }
    if graph.num_pools() == 0 {
        return Err(Error::NoPools);
    }
    if let Some(p) = (0..graph.num_pools()).find(|&p| graph.pool_size(p) == 0) {
        return Err(Error::InvalidParameter(format!("pool {} has no primers", p + 1)));
    }
    let mut remaining = initial_pools(graph, variant);
    let mut state = DeletionState::new(graph, variant == Variant::PrimerDelPlus);
    let mut plan = AssignmentPlan::default();
    let mut per_array = Vec::new();
    let mut array = 0;
    while !remaining.is_empty() {
        array += 1;
        state.load(&remaining);
        while !state.condition_holds() {
            let q = state.pick().expect("a failing pool set has primers");
            state.delete(q);
        }
        let chosen = state.snapshot();
        let selection = construct_assignment(graph, &chosen)?;
        assert!(!selection.is_empty(), "every array places at least one pool");
        per_array.push(selection.len());
        plan.entries.extend(selection.iter().map(|a| PlanEntry {
            array,
            pool: a.pool,
            primer: a.primer,
            tag: a.tag,
        }));
        let placed: std::collections::HashSet<usize> = selection.iter().map(|a| a.pool).collect();
        remaining.retain(|ap| !placed.contains(&ap.pool));
    }
    let stats = utilization_from_counts(&per_array, graph.num_tags());
    Ok(ScheduleResult {
        plan,
        arrays_used: array,
        per_array_assigned: per_array,
        avg_utilization: stats.avg_utilization,
    })
}

/// Builds the hybridization graph for `c` and schedules all pools.
pub fn schedule(pools: &[Pool], tags: &[DnaSeq], c: u32, variant: Variant) -> Result<ScheduleResult> {
    if tags.is_empty() {
        return Err(Error::NoTags);
    }
    if pools.is_empty() {
        return Err(Error::NoPools);
    }
    let graph = build_graph(pools, tags, c)?;
    schedule_on_graph(&graph, variant)
}
