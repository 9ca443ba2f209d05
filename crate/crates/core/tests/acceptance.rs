//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any failed or ran over its time limit.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use unitag::experiment::{random_pools, run_experiment, truncate_pools, ExperimentSpec};
use unitag::hybrid::{build_graph, build_graph_naive, Pool};
use unitag::multiplex::{schedule_on_graph, Variant};
use unitag::seq::{g, h, Base, DnaSeq};
use unitag::tagset::{greedy_generate, oracle_verify, verify_feasible, TagSetConfig};
use unitag::tokens::{classify, enumerate_tokens, extract_tokens, token_bounds, tag_bound, TokenClass};

fn report(n: u32, name: &str, limit: Duration, start: Instant, ok: bool, detail: String) -> bool {
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let verdict = if ok && in_time { "PASS" } else { "FAIL" };
    println!(
        "[{verdict}] criterion {n}: {name} — {detail} ({:.2}s, limit {}s)",
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    ok && in_time
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn random_seq(rng: &mut impl Rng, len: usize) -> DnaSeq {
    DnaSeq::new((0..len).map(|_| Base::ALL[rng.random_range(0..4)]).collect())
}

/// Every string over ACGT with weight at most `max`.
fn strings_up_to_weight(max: u32) -> Vec<Vec<Base>> {
    let mut out: Vec<Vec<Base>> = vec![Vec::new()];
    let mut i = 0;
    while i < out.len() {
        let w = weight(&out[i]);
        for b in Base::ALL {
            if w + b.weight() <= max {
                let mut y = out[i].clone();
                y.push(b);
                out.push(y);
            }
        }
        i += 1;
    }
    out
}

fn weight(x: &[Base]) -> u32 {
    x.iter().map(|b| b.weight()).sum()
}

/// Weight >= c, every proper suffix lighter than c.
fn is_token_by_definition(x: &[Base], c: u32) -> bool {
    weight(x) >= c && (1..x.len()).all(|i| weight(&x[i..]) < c)
}

fn criterion_1_bound_reproduction() -> bool {
    let start = Instant::now();
    let expect = [
        (8, 132, 109, 109, 1726),
        (9, 389, 312, 312, 4672),
        (10, 1161, 896, 896, 12780),
    ];
    let mut ok = true;
    let mut got = Vec::new();
    for (c, by_len, by_w, both, tokens) in expect {
        let l = tag_bound(c, Some(20), None).unwrap().tag_bound;
        let w = tag_bound(c, None, Some(28)).unwrap().tag_bound;
        let b = tag_bound(c, Some(20), Some(28)).unwrap().tag_bound;
        let t = token_bounds(c).unwrap().0;
        ok &= l == BigUint::from(by_len as u32)
            && w == BigUint::from(by_w as u32)
            && b == BigUint::from(both as u32)
            && t == BigUint::from(tokens as u32);
        got.push(format!("c={c}: {l}/{w}/{b}, tokens {t}"));
    }
    report(1, "bound reproduction", secs(1), start, ok, got.join("; "))
}

fn criterion_2_counting_functions() -> bool {
    let start = Instant::now();
    let all = strings_up_to_weight(12);
    let mut by_weight: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for x in &all {
        let e = by_weight.entry(weight(x)).or_default();
        e.0 += 1;
        let sc = x.iter().zip(x.iter().rev()).all(|(a, b)| *a == b.complement());
        if sc {
            e.1 += 1;
        }
    }
    let mut ok = true;
    for n in 0..=12u32 {
        ok &= g(n) == BigUint::from(by_weight[&n].0);
    }
    for n in 1..=10u32 {
        ok &= h(n) == BigUint::from(by_weight[&n].1);
        if n % 2 == 1 {
            ok &= by_weight[&n].1 == 0;
        }
    }

    let mut detail = Vec::new();
    for c in 2..=8u32 {
        let brute: Vec<&Vec<Base>> = all
            .iter()
            .filter(|x| weight(x) <= c + 1 && is_token_by_definition(x, c))
            .collect();
        let universe = enumerate_tokens(c).unwrap();
        ok &= universe.len() == brute.len();
        detail.push(format!("c={c}:{}", brute.len()));
        if c >= 4 {
            let mut counts: BTreeMap<TokenClass, usize> = BTreeMap::new();
            for x in &brute {
                *counts.entry(classify(&DnaSeq::from_slice(x), c).unwrap()).or_default() += 1;
            }
            for class in TokenClass::ALL {
                ok &= class.size(c) == BigUint::from(counts.get(&class).copied().unwrap_or(0));
            }
        }
    }
    report(
        2,
        "counting functions",
        secs(10),
        start,
        ok,
        format!("g(0..=12), h(1..=10), universes {}", detail.join(" ")),
    )
}

fn criterion_3_greedy_feasibility() -> bool {
    let start = Instant::now();
    let mut ok = true;
    let mut small = Vec::new();
    for c in 4..=6u32 {
        for l in [c as usize + 1, c as usize + 3] {
            for c3 in [false, true] {
                let cfg = TagSetConfig::new(c).with_length(l).with_c3(c3);
                let tags = greedy_generate(&cfg).unwrap();
                ok &= !tags.is_empty() && oracle_verify(&tags, &cfg).ok;
                small.push(tags.len());
            }
        }
    }
    let cfg = TagSetConfig::new(8).with_length(20);
    let tags = greedy_generate(&cfg).unwrap();
    let feasible = verify_feasible(&tags, &cfg).ok;
    let min_tokens = tags.iter().map(|t| extract_tokens(t, 8).len()).min().unwrap_or(0);
    ok &= feasible && (80..=132).contains(&tags.len()) && min_tokens >= 13;
    report(
        3,
        "greedy feasibility",
        secs(60),
        start,
        ok,
        format!(
            "small sets {small:?} pass the oracle; c=8 l=20: {} tags, feasible={feasible}, min tokens/tag {min_tokens}",
            tags.len()
        ),
    )
}

fn criterion_4_c3_halving() -> bool {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for c in 8..=10u32 {
        let c2 = greedy_generate(&TagSetConfig::new(c).with_length(20).with_c3(false)).unwrap().len();
        let c3 = greedy_generate(&TagSetConfig::new(c).with_length(20)).unwrap().len();
        let ratio = c3 as f64 / c2 as f64;
        ok &= (0.35..=0.65).contains(&ratio);
        detail.push(format!("c={c}: {c3}/{c2}={ratio:.3}"));
    }
    report(4, "C3 halving trend", secs(300), start, ok, detail.join("; "))
}

fn criterion_5_constraint_regimes() -> bool {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for c in [8u32, 9] {
        let length = greedy_generate(&TagSetConfig::new(c).with_length(20)).unwrap().len();
        let weight = greedy_generate(&TagSetConfig::new(c).with_weight_range(28, 32)).unwrap().len();
        let both = greedy_generate(&TagSetConfig::new(c).with_length(20).with_weight_range(28, 32))
            .unwrap()
            .len();
        ok &= length >= weight && weight >= both;
        detail.push(format!("c={c}: {length} >= {weight} >= {both}"));
    }
    report(5, "constraint-regime ordering", secs(300), start, ok, detail.join("; "))
}

fn criterion_6_multiplexing_validity() -> bool {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let tag_pool = greedy_generate(&TagSetConfig::new(8).with_length(11).with_c3(false)).unwrap();
    let mut ok = true;
    let mut runs = 0;
    for _ in 0..100 {
        let m = rng.random_range(5..=120);
        let size = rng.random_range(1..=5);
        let n = rng.random_range(1..=40);
        let c = rng.random_range(5..=8);
        let pools = random_pools(&mut rng, m, size, 20);
        let graph = build_graph(&pools, &tag_pool[..n], c).unwrap();
        for v in Variant::ALL {
            let r = schedule_on_graph(&graph, v).unwrap();
            let mut seen = vec![0; m];
            for e in &r.plan.entries {
                seen[e.pool] += 1;
            }
            ok &= r.plan.validate(&graph)
                && seen.iter().all(|&k| k == 1)
                && r.arrays_used == r.plan.num_arrays()
                && r.arrays_used >= m.div_ceil(n);
            runs += 1;
        }
    }
    report(
        6,
        "multiplexing validity",
        secs(60),
        start,
        ok,
        format!("{runs} schedules over 100 instances validate and cover every pool once"),
    )
}

fn criterion_7_pool_awareness() -> bool {
    let start = Instant::now();
    let tags = greedy_generate(&TagSetConfig::new(8).with_length(11).with_c3(false)).unwrap();
    let spec = ExperimentSpec {
        pool_counts: vec![1000],
        pool_sizes: vec![1, 5],
        tag_counts: vec![500],
        c: 7,
        algorithms: vec![Variant::PrimerDelPlus],
        replicates: 10,
        seed: 7,
        primer_length: 20,
    };
    let enough = tags.len() >= 500;
    let (ok, detail) = if enough {
        let out = run_experiment(&spec, &tags).unwrap();
        let size1 = out.rows.iter().find(|r| r.pool_size == 1).unwrap().arrays_mean;
        let size5 = out.rows.iter().find(|r| r.pool_size == 5).unwrap().arrays_mean;
        let reduction = 1.0 - size5 / size1;
        (
            reduction >= 0.20,
            format!(
                "{} greedy tags (c=8, l=11, C2), 1000 pools: size 1 -> {size1:.2} arrays, size 5 -> {size5:.2}, reduction {:.1}%",
                tags.len(),
                reduction * 100.0
            ),
        )
    } else {
        (false, format!("only {} greedy tags", tags.len()))
    };
    report(7, "pool-awareness benefit", secs(600), start, ok, detail)
}

fn criterion_8_baseline_degeneracy() -> bool {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let tag_pool = greedy_generate(&TagSetConfig::new(8).with_length(11).with_c3(false)).unwrap();
    let mut ok = true;
    let mut instances = 0;
    for _ in 0..20 {
        let m = rng.random_range(50..=400);
        let n = rng.random_range(20..=200);
        let pools = truncate_pools(&random_pools(&mut rng, m, 3, 20), 1);
        let graph = build_graph(&pools, &tag_pool[..n], 7).unwrap();
        let base = schedule_on_graph(&graph, Variant::PrimerDel).unwrap();
        for v in [Variant::PrimerDelPlus, Variant::MinPot, Variant::MinDeg] {
            ok &= schedule_on_graph(&graph, v).unwrap() == base;
        }
        instances += 1;
    }
    report(
        8,
        "baseline degeneracy",
        secs(60),
        start,
        ok,
        format!("all four variants identical on {instances} size-1 instances"),
    )
}

fn criterion_9_oracle_equivalences() -> bool {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut agree = 0;
    let mut feasible = 0;
    for _ in 0..1000 {
        let c = rng.random_range(3..=6);
        let len = rng.random_range(c as usize..=c as usize + 4);
        let k = rng.random_range(1..=5);
        let tags: Vec<DnaSeq> = (0..k).map(|_| random_seq(&mut rng, len)).collect();
        let cfg = TagSetConfig::new(c).with_length(len).with_c3(rng.random_bool(0.5));
        let fast = verify_feasible(&tags, &cfg).ok;
        if fast == oracle_verify(&tags, &cfg).ok {
            agree += 1;
        }
        feasible += fast as usize;
    }
    let mut same_graph = 0;
    for _ in 0..100 {
        let c = rng.random_range(4..=8);
        let pools: Vec<Pool> = (0..rng.random_range(1..=15))
            .map(|i| {
                let primers = (0..rng.random_range(1..=4)).map(|_| random_seq(&mut rng, 20)).collect();
                Pool::new(i.to_string(), primers)
            })
            .collect();
        let tags: Vec<DnaSeq> = (0..rng.random_range(1..=30)).map(|_| random_seq(&mut rng, 12)).collect();
        if build_graph(&pools, &tags, c).unwrap() == build_graph_naive(&pools, &tags, c).unwrap() {
            same_graph += 1;
        }
    }
    report(
        9,
        "oracle equivalences",
        secs(120),
        start,
        agree == 1000 && same_graph == 100 && feasible > 100 && feasible < 900,
        format!("verify == oracle on {agree}/1000 ({feasible} feasible); indexed == naive on {same_graph}/100"),
    )
}

fn main() {
    let criteria: [fn() -> bool; 9] = [
        criterion_1_bound_reproduction,
        criterion_2_counting_functions,
        criterion_3_greedy_feasibility,
        criterion_4_c3_halving,
        criterion_5_constraint_regimes,
        criterion_6_multiplexing_validity,
        criterion_7_pool_awareness,
        criterion_8_baseline_degeneracy,
        criterion_9_oracle_equivalences,
    ];
    let failed = criteria.iter().filter(|run| !run()).count();
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
