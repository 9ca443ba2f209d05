//! Plain-text file formats: tag lists, pool TSV, assignment TSV and the
//! experiment report CSV. Parse errors carry 1-based line numbers.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::hybrid::{AssignmentPlan, PlanEntry, Pool};
use crate::multiplex::Variant;
use crate::seq::DnaSeq;

pub const REPORT_HEADER: &str = "pools,pool_size,tags,c,algorithm,arrays_mean,utilization_mean";

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_seq(s: &str, line: usize) -> Result<DnaSeq> {
    s.parse::<DnaSeq>().map_err(|e| parse_err(line, e.to_string()))
}

/// Content lines with their 1-based numbers; comments and blanks dropped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

pub fn parse_tags(text: &str) -> Result<Vec<DnaSeq>> {
    content_lines(text)
        .map(|(n, line)| parse_seq(line, n))
        .collect()
}

pub fn format_tags(tags: &[DnaSeq]) -> String {
    let mut out = String::new();
    for t in tags {
        writeln!(out, "{t}").unwrap();
    }
    out
}

/// `pool_id<TAB>primer1,primer2,...`; ids must be unique and pools non-empty.
pub fn parse_pools(text: &str) -> Result<Vec<Pool>> {
    let mut seen = HashMap::new();
    let mut pools = Vec::new();
    for (n, line) in content_lines(text) {
        let (id, primers) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(n, "expected pool_id<TAB>primers"))?;
        let id = id.trim();
        if id.is_empty() {
            return Err(parse_err(n, "empty pool id"));
        }
        if let Some(prev) = seen.insert(id.to_string(), n) {
            return Err(parse_err(n, format!("pool id {id:?} already used on line {prev}")));
        }
        let primers = primers
            .split(',')
            .map(|p| p.trim())
            .filter(|p| !p.is_empty())
            .map(|p| parse_seq(p, n))
            .collect::<Result<Vec<_>>>()?;
        if primers.is_empty() {
            return Err(parse_err(n, format!("pool {id:?} has no primers")));
        }
        pools.push(Pool::new(id, primers));
    }
    Ok(pools)
}

pub fn format_pools(pools: &[Pool]) -> String {
    let mut out = String::new();
    for p in pools {
        let primers: Vec<String> = p.primers.iter().map(|s| s.to_string()).collect();
        writeln!(out, "{}\t{}", p.id, primers.join(",")).unwrap();
    }
    out
}

/// `array<TAB>pool_id<TAB>primer_seq<TAB>tag_index<TAB>tag_seq`, tag index
/// 1-based into the tag list.
pub fn format_assignment(plan: &AssignmentPlan, pools: &[Pool], tags: &[DnaSeq]) -> String {
    let mut out = String::new();
    for e in &plan.entries {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            e.array,
            pools[e.pool].id,
            pools[e.pool].primers[e.primer],
            e.tag + 1,
            tags[e.tag]
        )
        .unwrap();
    }
    out
}

/// Reads an assignment TSV back against the pools and tags it was written
/// for. Structural validity (disjoint pools, no cross-hybridization) is left
/// to [`AssignmentPlan::validate`].
pub fn parse_assignment(text: &str, pools: &[Pool], tags: &[DnaSeq]) -> Result<AssignmentPlan> {
    let by_id: HashMap<&str, usize> = pools
        .iter()
        .enumerate()
        .map(|(i, p)| (p.id.as_str(), i))
        .collect();
    let mut entries = Vec::new();
    for (n, line) in content_lines(text) {
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [array, pool_id, primer, tag_index, tag] = fields[..] else {
            return Err(parse_err(n, format!("expected 5 fields, found {}", fields.len())));
        };
        let array: usize = array
            .parse()
            .ok()
            .filter(|&a| a >= 1)
            .ok_or_else(|| parse_err(n, format!("bad array number {array:?}")))?;
        let pool = *by_id
            .get(pool_id)
            .ok_or_else(|| parse_err(n, format!("unknown pool {pool_id:?}")))?;
        let primer = parse_seq(primer, n)?;
        let primer = pools[pool]
            .primers
            .iter()
            .position(|p| *p == primer)
            .ok_or_else(|| parse_err(n, format!("primer {primer} is not in pool {pool_id:?}")))?;
        let tag_no: usize = tag_index
            .parse()
            .ok()
            .filter(|&t| (1..=tags.len()).contains(&t))
            .ok_or_else(|| parse_err(n, format!("bad tag index {tag_index:?}")))?;
        if tags[tag_no - 1] != parse_seq(tag, n)? {
            return Err(parse_err(n, format!("tag {tag_no} is not {tag}")));
        }
        entries.push(PlanEntry {
            array,
            pool,
            primer,
            tag: tag_no - 1,
        });
    }
    Ok(AssignmentPlan { entries })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub pools: usize,
    pub pool_size: usize,
    pub tags: usize,
    pub c: u32,
    pub algorithm: Variant,
    pub arrays_mean: f64,
    pub utilization_mean: f64,
}

impl ReportRow {
    fn sort_key(&self) -> (usize, usize, Variant, usize) {
        (self.pools, self.pool_size, self.algorithm, self.tags)
    }
}

/// Sorts rows by (pools, pool_size, algorithm, tags).
pub fn sort_report(rows: &mut [ReportRow]) {
    rows.sort_by_key(ReportRow::sort_key);
}

pub fn format_report(rows: &[ReportRow]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.2},{:.1}",
            r.pools, r.pool_size, r.tags, r.c, r.algorithm, r.arrays_mean, r.utilization_mean
        )
        .unwrap();
    }
    out
}

pub fn parse_report(text: &str) -> Result<Vec<ReportRow>> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, REPORT_HEADER)) => {}
        Some((n, _)) => return Err(parse_err(n, "missing report header")),
        None => return Ok(Vec::new()),
    }
    lines
        .map(|(n, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(parse_err(n, format!("expected 7 fields, found {}", f.len())));
            }
            let num = |s: &str| s.parse::<usize>().map_err(|e| parse_err(n, e.to_string()));
            let real = |s: &str| s.parse::<f64>().map_err(|e| parse_err(n, e.to_string()));
            Ok(ReportRow {
                pools: num(f[0])?,
                pool_size: num(f[1])?,
                tags: num(f[2])?,
                c: f[3].parse().map_err(|_| parse_err(n, "bad c"))?,
                algorithm: f[4].parse().map_err(|e: Error| parse_err(n, e.to_string()))?,
                arrays_mean: real(f[5])?,
                utilization_mean: real(f[6])?,
            })
        })
        .collect()
}
