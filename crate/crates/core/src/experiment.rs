//! Seeded random pool instances and the replicate-averaged experiment
//! harness.
//!
//! Each replicate draws from its own ChaCha8 stream (seed, replicate). Pools
//! are drawn at the largest requested size and truncated for smaller sizes,
//! so every pool size and algorithm in a replicate sees the same primers.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hybrid::{build_graph, Pool};
use crate::io::{sort_report, ReportRow};
use crate::multiplex::{schedule_on_graph, Variant};
use crate::seq::{Base, DnaSeq};

pub const DEFAULT_PRIMER_LENGTH: usize = 20;

/// The generator for replicate `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn random_seq<R: Rng + ?Sized>(rng: &mut R, len: usize) -> DnaSeq {
    DnaSeq::new((0..len).map(|_| Base::ALL[rng.random_range(0..4)]).collect())
}

/// `m` pools named 1..=m, each of `pool_size` uniform random primers.
pub fn random_pools<R: Rng + ?Sized>(rng: &mut R, m: usize, pool_size: usize, primer_len: usize) -> Vec<Pool> {
    (1..=m)
        .map(|i| {
            let primers = (0..pool_size).map(|_| random_seq(rng, primer_len)).collect();
            Pool::new(i.to_string(), primers)
        })
        .collect()
}

pub fn random_pools_seeded(m: usize, pool_size: usize, primer_len: usize, seed: u64) -> Result<Vec<Pool>> {
    if m == 0 || pool_size == 0 || primer_len == 0 {
        return Err(Error::InvalidParameter(
            "pool count, pool size and primer length must be positive".into(),
        ));
    }
    Ok(random_pools(&mut rng_for(seed, 0), m, pool_size, primer_len))
}

/// Keeps the first `size` primers of every pool.
pub fn truncate_pools(pools: &[Pool], size: usize) -> Vec<Pool> {
    pools
        .iter()
        .map(|p| Pool::new(p.id.clone(), p.primers.iter().take(size).cloned().collect()))
        .collect()
}

pub fn instance_hash(pools: &[Pool]) -> u64 {
    let mut h = DefaultHasher::new();
    pools.hash(&mut h);
    h.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub pool_counts: Vec<usize>,
    pub pool_sizes: Vec<usize>,
    pub tag_counts: Vec<usize>,
    /// Hybridization threshold.
    pub c: u32,
    pub algorithms: Vec<Variant>,
    pub replicates: usize,
    pub seed: u64,
    pub primer_length: usize,
}

impl ExperimentSpec {
    pub fn validate(&self, available_tags: usize) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.replicates == 0 {
            return bad("replicates must be at least 1");
        }
        if self.primer_length == 0 {
            return bad("primer length must be positive");
        }
        for (name, list) in [
            ("pool counts", &self.pool_counts),
            ("pool sizes", &self.pool_sizes),
            ("tag counts", &self.tag_counts),
        ] {
            if list.is_empty() || list.contains(&0) {
                return Err(Error::InvalidConfig(format!("{name} must be a non-empty list of positive values")));
            }
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms given");
        }
        if let Some(&n) = self.tag_counts.iter().find(|&&n| n > available_tags) {
            return Err(Error::InvalidConfig(format!(
                "{n} tags requested but only {available_tags} available"
            )));
        }
        Ok(())
    }
}

/// One schedule run inside an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub pools: usize,
    pub pool_size: usize,
    pub tags: usize,
    pub replicate: usize,
    pub algorithm: Variant,
    pub instance_hash: u64,
    pub arrays: usize,
    pub utilization: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ReportRow>,
    pub runs: Vec<RunRecord>,
}

/// Runs every (pools, pool size, tags, replicate) instance with every
/// algorithm and averages over replicates. Tags are the first n of `tags`.
pub fn run_experiment(spec: &ExperimentSpec, tags: &[DnaSeq]) -> Result<ExperimentOutput> {
    spec.validate(tags.len())?;
    let max_pools = *spec.pool_counts.iter().max().unwrap();
    let max_size = *spec.pool_sizes.iter().max().unwrap();
    let base: Vec<Vec<Pool>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| random_pools(&mut rng_for(spec.seed, r as u64), max_pools, max_size, spec.primer_length))
        .collect();

    let mut jobs = Vec::new();
    for &m in &spec.pool_counts {
        for &size in &spec.pool_sizes {
            for &n in &spec.tag_counts {
                for r in 0..spec.replicates {
                    jobs.push((m, size, n, r));
                }
            }
        }
    }
    let per_job: Vec<Vec<RunRecord>> = jobs
        .par_iter()
        .map(|&(m, size, n, r)| -> Result<Vec<RunRecord>> {
            let pools = truncate_pools(&base[r][..m], size);
            let hash = instance_hash(&pools);
            let graph = build_graph(&pools, &tags[..n], spec.c)?;
            spec.algorithms
                .iter()
                .map(|&algorithm| {
                    let res = schedule_on_graph(&graph, algorithm)?;
                    Ok(RunRecord {
                        pools: m,
                        pool_size: size,
                        tags: n,
                        replicate: r,
                        algorithm,
                        instance_hash: hash,
                        arrays: res.arrays_used,
                        utilization: res.avg_utilization,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let runs: Vec<RunRecord> = per_job.into_iter().flatten().collect();

    let mut rows = Vec::new();
    for group in runs.chunk_by(|a, b| (a.pools, a.pool_size, a.tags) == (b.pools, b.pool_size, b.tags)) {
        for &algorithm in &spec.algorithms {
            let sel: Vec<&RunRecord> = group.iter().filter(|x| x.algorithm == algorithm).collect();
            let k = sel.len() as f64;
            rows.push(ReportRow {
                pools: group[0].pools,
                pool_size: group[0].pool_size,
                tags: group[0].tags,
                c: spec.c,
                algorithm,
                arrays_mean: sel.iter().map(|x| x.arrays as f64).sum::<f64>() / k,
                utilization_mean: sel.iter().map(|x| x.utilization).sum::<f64>() / k,
            });
        }
    }
    sort_report(&mut rows);
    Ok(ExperimentOutput { rows, runs })
}
