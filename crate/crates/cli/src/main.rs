use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use mazeswitch::bench::{read_records, write_records, SuiteOutput, DEFAULT_MAZES_PER_SIZE, DEFAULT_SIZES, LONG_SIZE};
use mazeswitch::{ablation, generate_maze, run_episode, run_suite, EpisodeLog, SuiteConfig, VariantSpec};

#[derive(Parser)]
#[command(name = "mazeswitch", version, about = "Coverage/convergence switching agents on seeded mazes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment matrix and write records plus a summary report.
    Run(SuiteArgs),
    /// Run the matrix and print the none / fixed / learned comparison.
    Ablate(SuiteArgs),
    /// Re-execute recorded episodes and diff them against the file.
    Replay {
        /// JSON-lines episode records.
        records: PathBuf,
    },
    /// Print a maze in the text format.
    GenMaze {
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Default)]
struct SuiteArgs {
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated maze sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Mazes per size.
    #[arg(long)]
    mazes: Option<usize>,
    /// Comma-separated variant labels, e.g. spiral,spiral-rl.
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<VariantSpec>>,
    /// Base maze seed; maze i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also run 128x128 mazes.
    #[arg(long)]
    long: bool,
}

/// Config-file mirror of [`SuiteArgs`].
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    sizes: Option<Vec<usize>>,
    mazes: Option<usize>,
    variants: Option<Vec<String>>,
    seed: Option<u64>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
    long: Option<bool>,
}

struct Resolved {
    suite: SuiteConfig,
    out: PathBuf,
}

fn resolve(args: &SuiteArgs) -> Result<Resolved> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str::<FileConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    let file_variants =
        file.variants.map(|v| v.iter().map(|s| s.parse::<VariantSpec>()).collect::<Result<Vec<_>, _>>()).transpose()?;

    let mut sizes = args.sizes.clone().or(file.sizes).unwrap_or_else(|| DEFAULT_SIZES.to_vec());
    if (args.long || file.long.unwrap_or(false)) && !sizes.contains(&LONG_SIZE) {
        sizes.push(LONG_SIZE);
    }
    let parallelism =
        args.jobs.or(file.jobs).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let suite = SuiteConfig {
        sizes,
        mazes_per_size: args.mazes.or(file.mazes).unwrap_or(DEFAULT_MAZES_PER_SIZE),
        variants: args.variants.clone().or(file_variants).unwrap_or_else(|| VariantSpec::ALL.to_vec()),
        base_seed: args.seed.or(file.seed).unwrap_or(0),
        parallelism,
    };
    suite.validate()?;
    let out = args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("results"));
    Ok(Resolved { suite, out })
}

fn write_outputs(out: &SuiteOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_records(&out.records, &dir.join("records.jsonl"))?;
    out.report.write_csv(&dir.join("report.csv"))?;
    out.report.write_json(&dir.join("report.json"))?;
    Ok(())
}

fn print_summary(out: &SuiteOutput) {
    println!(
        "{:>6}  {:<14} {:>10} {:>8} {:>8} {:>8} {:>9}",
        "size", "variant", "mean", "median", "min", "max", "success"
    );
    for r in &out.report.rows {
        println!(
            "{:>6}  {:<14} {:>10.1} {:>8.1} {:>8} {:>8} {:>8.0}%",
            r.size,
            r.variant.label(),
            r.mean_steps,
            r.median_steps,
            r.min_steps,
            r.max_steps,
            r.success_rate
        );
    }
    for f in &out.failures {
        eprintln!("episode error: {} n={} seed={}: {}", f.config.variant, f.config.n, f.config.maze_seed, f.error);
    }
}

fn cmd_run(args: &SuiteArgs) -> Result<ExitCode> {
    let r = resolve(args)?;
    let out = run_suite(&r.suite)?;
    write_outputs(&out, &r.out)?;
    print_summary(&out);
    println!(
        "{} episodes in {:.1}s, written to {}",
        out.records.len(),
        out.report.provenance.wall_clock_secs,
        r.out.display()
    );
    Ok(if out.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_ablate(args: &SuiteArgs) -> Result<ExitCode> {
    let r = resolve(args)?;
    let (table, out) = ablation(&r.suite)?;
    write_outputs(&out, &r.out)?;
    print!("{table}");
    Ok(if out.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

/// Top-level fields whose values differ between two records.
fn differing_fields(a: &EpisodeLog, b: &EpisodeLog) -> Result<Vec<String>> {
    let to_map = |l: &EpisodeLog| -> Result<BTreeMap<String, serde_json::Value>> {
        Ok(serde_json::from_value(serde_json::to_value(l)?)?)
    };
    let (a, b) = (to_map(a)?, to_map(b)?);
    Ok(a.keys()
        .chain(b.keys())
        .filter(|k| a.get(*k) != b.get(*k))
        .cloned()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect())
}

fn cmd_replay(path: &Path) -> Result<ExitCode> {
    let records = read_records(path)?;
    if records.is_empty() {
        bail!("{}: no records", path.display());
    }
    let mut mismatched = 0;
    for (i, recorded) in records.iter().enumerate() {
        let fresh = run_episode(&recorded.config)?;
        if fresh.to_json_line()? != recorded.to_json_line()? {
            mismatched += 1;
            let c = &recorded.config;
            println!(
                "record {}: {} n={} seed={} differs in: {}",
                i + 1,
                c.variant,
                c.n,
                c.maze_seed,
                differing_fields(recorded, &fresh)?.join(", ")
            );
        }
    }
    println!("{} of {} records reproduced exactly", records.len() - mismatched, records.len());
    Ok(if mismatched == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_gen_maze(size: usize, seed: u64, out: Option<&Path>) -> Result<ExitCode> {
    let text = generate_maze(size, seed)?.to_text();
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Ablate(a) => cmd_ablate(a),
        Command::Replay { records } => cmd_replay(records),
        Command::GenMaze { size, seed, out } => cmd_gen_maze(*size, *seed, out.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
