use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use unitag::experiment::{random_pools_seeded, run_experiment, ExperimentSpec, DEFAULT_PRIMER_LENGTH};
use unitag::hybrid::build_graph;
use unitag::io;
use unitag::multiplex::{schedule_on_graph, Variant};
use unitag::tagset::{greedy_generate_with_stats, verify_feasible, TagSetConfig, DEFAULT_NODE_BUDGET};
use unitag::tokens::{enumerate_tokens, extract_tokens, tag_bound};
use unitag::{DnaSeq, Error};

#[derive(Parser)]
#[command(name = "unitag", version, about = "Tag set design and primer-pool multiplexing for universal DNA arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, verify or bound tag sets
    #[command(subcommand)]
    Tags(TagsCommand),
    /// Count or extract c-tokens
    #[command(subcommand)]
    Tokens(TokensCommand),
    /// Random primer pools
    #[command(subcommand)]
    Pools(PoolsCommand),
    /// Assign pools to tags across as few arrays as possible
    Assign(AssignArgs),
    /// Replicate-averaged multiplexing experiment
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Constraints {
    C2,
    C2c3,
}

#[derive(Args, Clone)]
struct TagShape {
    /// Exact tag length
    #[arg(long)]
    length: Option<usize>,
    /// Minimum tag weight
    #[arg(long)]
    min_weight: Option<u32>,
    /// Maximum tag weight (default 2 * length)
    #[arg(long)]
    max_weight: Option<u32>,
    #[arg(long, value_enum, default_value = "c2c3")]
    constraints: Constraints,
}

impl TagShape {
    fn config(&self, c: u32) -> anyhow::Result<TagSetConfig> {
        let mut cfg = TagSetConfig::new(c).with_c3(matches!(self.constraints, Constraints::C2c3));
        cfg.length = self.length;
        cfg.min_weight = self.min_weight;
        cfg.max_weight = self.max_weight;
        if self.max_weight.is_some() && self.min_weight.is_none() {
            bail!(Error::InvalidConfig("--max-weight needs --min-weight".into()));
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum TagsCommand {
    /// Greedily generate a tag set
    Generate {
        #[arg(long)]
        c: u32,
        #[command(flatten)]
        shape: TagShape,
        /// Stop after this many tags
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: u64,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Check a tag file against the constraints; exits 1 if infeasible
    Verify {
        #[arg(long)]
        c: u32,
        #[command(flatten)]
        shape: TagShape,
        file: PathBuf,
    },
    /// Upper bound on feasible tag set size
    Bound {
        #[arg(long)]
        c: u32,
        #[arg(long)]
        length: Option<u32>,
        /// Minimum tag weight
        #[arg(long)]
        min_weight: Option<u32>,
    },
}

#[derive(Subcommand)]
enum TokensCommand {
    /// Number of distinct c-tokens
    Count {
        #[arg(long)]
        c: u32,
    },
    /// The token ending at each position of a sequence
    Extract {
        #[arg(long)]
        c: u32,
        seq: String,
    },
}

#[derive(Subcommand)]
enum PoolsCommand {
    /// Uniform random pools, one per line
    Random {
        #[arg(long)]
        pools: usize,
        #[arg(long, default_value_t = 1)]
        pool_size: usize,
        #[arg(long, default_value_t = DEFAULT_PRIMER_LENGTH)]
        primer_length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short)]
        o: Option<PathBuf>,
    },
}

#[derive(Args)]
struct AssignArgs {
    pool_file: PathBuf,
    tag_file: PathBuf,
    /// Hybridization threshold
    #[arg(long)]
    c: u32,
    #[arg(long, default_value = "primer-del-plus", value_parser = parse_variant)]
    algorithm: Variant,
    /// Assignment TSV output
    #[arg(short)]
    o: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Pool counts, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    pools: Vec<usize>,
    /// Pool sizes, comma separated
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pool_size: Vec<usize>,
    /// Tag counts, comma separated; the first n tags of the source are used
    #[arg(long, value_delimiter = ',', required = true)]
    tags: Vec<usize>,
    /// Hybridization threshold
    #[arg(long, default_value_t = 7)]
    c: u32,
    /// Algorithms, comma separated, or "all"
    #[arg(long, value_delimiter = ',', default_value = "all")]
    algorithm: Vec<String>,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_PRIMER_LENGTH)]
    primer_length: usize,
    /// Read tags from a file instead of generating them
    #[arg(long)]
    tag_file: Option<PathBuf>,
    /// c used when generating tags
    #[arg(long, default_value_t = 8)]
    tag_c: u32,
    #[command(flatten)]
    shape: TagShape,
    /// Report CSV output
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_tags(path: &Path) -> anyhow::Result<Vec<DnaSeq>> {
    io::parse_tags(&read(path)?).with_context(|| path.display().to_string())
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Status lines go to stdout when the payload went to a file.
fn note(out: &Option<PathBuf>, msg: &str) {
    if out.is_some() {
        println!("{msg}");
    } else {
        eprintln!("{msg}");
    }
}

fn tags(cmd: TagsCommand) -> anyhow::Result<ExitCode> {
    match cmd {
        TagsCommand::Generate { c, shape, limit, node_budget, o } => {
            let mut cfg = shape.config(c)?.with_node_budget(node_budget);
            cfg.max_tags = limit;
            let out = greedy_generate_with_stats(&cfg)?;
            if out.budget_exhausted {
                eprintln!("warning: search budget exhausted after {} nodes; set is partial", out.nodes);
            }
            emit(&o, &io::format_tags(&out.tags))?;
            note(&o, &format!("tags: {}", out.tags.len()));
            if let Ok(b) = tag_bound(c, shape.length.map(|l| l as u32), shape.min_weight) {
                note(&o, &format!("bound: {}", b.tag_bound));
            }
            Ok(ExitCode::SUCCESS)
        }
        TagsCommand::Verify { c, shape, file } => {
            if !(2..=29).contains(&c) {
                bail!(Error::InvalidParameter(format!("c must be in 2..=29, got {c}")));
            }
            let cfg = shape.config(c)?;
            let tags = read_tags(&file)?;
            let report = verify_feasible(&tags, &cfg);
            for v in &report.violations {
                println!("{v}");
            }
            if report.ok {
                println!("feasible: {} tags", tags.len());
                Ok(ExitCode::SUCCESS)
            } else {
                println!("infeasible: {} violations", report.violations.len());
                Ok(ExitCode::from(1))
            }
        }
        TagsCommand::Bound { c, length, min_weight } => {
            let b = tag_bound(c, length, min_weight)?;
            println!("tags ≤ {}; tokens ≤ {}", b.tag_bound, b.token_bound);
            println!("c={}", b.c);
            println!("token_bound={}", b.token_bound);
            println!("tail_weight_bound={}", b.tail_weight_bound);
            if let Some(x) = &b.tag_bound_by_length {
                println!("tag_bound_by_length={x}");
            }
            if let Some(x) = &b.tag_bound_by_weight {
                println!("tag_bound_by_weight={x}");
            }
            println!("tag_bound={}", b.tag_bound);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn tokens(cmd: TokensCommand) -> anyhow::Result<ExitCode> {
    match cmd {
        TokensCommand::Count { c } => {
            println!("{}", enumerate_tokens(c)?.len());
        }
        TokensCommand::Extract { c, seq } => {
            if c == 0 {
                bail!(Error::InvalidParameter("c must be positive".into()));
            }
            let seq: DnaSeq = seq.parse()?;
            for (end, t) in extract_tokens(&seq, c) {
                println!("{end} {}", t.seq);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn assign(args: AssignArgs) -> anyhow::Result<ExitCode> {
    let pools = io::parse_pools(&read(&args.pool_file)?).with_context(|| args.pool_file.display().to_string())?;
    let tags = read_tags(&args.tag_file)?;
    let graph = build_graph(&pools, &tags, args.c)?;
    let result = schedule_on_graph(&graph, args.algorithm)?;
    let text = io::format_assignment(&result.plan, &pools, &tags);
    emit(&args.o, &text)?;
    // the written plan must load back and validate
    let reloaded = io::parse_assignment(&text, &pools, &tags)?;
    if reloaded != result.plan || !reloaded.validate(&graph) {
        eprintln!("error: written assignment does not validate");
        return Ok(ExitCode::from(1));
    }
    note(&args.o, &format!("arrays={} util={:.1}%", result.arrays_used, result.avg_utilization));
    Ok(ExitCode::SUCCESS)
}

fn experiment(args: ExperimentArgs) -> anyhow::Result<ExitCode> {
    let algorithms = if args.algorithm.iter().any(|a| a == "all") {
        Variant::ALL.to_vec()
    } else {
        args.algorithm
            .iter()
            .map(|a| a.parse::<Variant>())
            .collect::<Result<_, _>>()?
    };
    let tags = match &args.tag_file {
        Some(path) => read_tags(path)?,
        None => {
            let cfg = args.shape.config(args.tag_c)?;
            greedy_generate_with_stats(&cfg)?.tags
        }
    };
    let spec = ExperimentSpec {
        pool_counts: args.pools,
        pool_sizes: args.pool_size,
        tag_counts: args.tags,
        c: args.c,
        algorithms,
        replicates: args.replicates,
        seed: args.seed,
        primer_length: args.primer_length,
    };
    let out = run_experiment(&spec, &tags)?;
    emit(&args.report, &io::format_report(&out.rows))?;
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::Parse { .. }
            | Error::InvalidBase { .. }
            | Error::InvalidConfig(_)
            | Error::InvalidParameter(_)
            | Error::UniverseTooLarge(_)
            | Error::NotAToken(..),
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Tags(cmd) => tags(cmd),
        Command::Tokens(cmd) => tokens(cmd),
        Command::Pools(PoolsCommand::Random { pools, pool_size, primer_length, seed, o }) => {
            random_pools_seeded(pools, pool_size, primer_length, seed)
                .map_err(anyhow::Error::from)
                .and_then(|p| emit(&o, &io::format_pools(&p)))
                .map(|_| ExitCode::SUCCESS)
        }
        Command::Assign(args) => assign(args),
        Command::Experiment(args) => experiment(args),
    };
    result.unwrap_or_else(|err| {
        eprintln!("error: {err:#}");
        ExitCode::from(exit_code(&err))
    })
}
