//! Experiment matrix, aggregation and report output.
//!
//! A suite runs every `(size, maze index, variant)` cell once. Maze `i` of
//! every size uses seed `base_seed + i` (wrapping); learner variants draw
//! exploration from `maze_seed ^ RL_STREAM_SALT`, so the spiral and sentinel
//! learners see the same stream. Episodes fan out over a worker pool and are
//! collected in `(size, maze index, variant)` order, so the worker count never
//! changes any output.
//!
//! The unit of cost is the step. Wall-clock time is reported alongside but
//! never compared.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::episode::{run_episode, ConvergenceMode, EpisodeConfig, EpisodeLog, Outcome, VariantSpec};
use crate::error::{Error, Result};
use crate::grid::MIN_SIZE;
use crate::switch_rl::ACTION_COUNT;

pub const DEFAULT_SIZES: [usize; 3] = [16, 32, 64];
pub const LONG_SIZE: usize = 128;
pub const DEFAULT_MAZES_PER_SIZE: usize = 10;

pub const CSV_HEADER: [&str; 8] =
    ["size", "variant", "mean_steps", "median_steps", "min_steps", "max_steps", "stddev", "success_rate"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub sizes: Vec<usize>,
    pub mazes_per_size: usize,
    pub variants: Vec<VariantSpec>,
    pub base_seed: u64,
    pub parallelism: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            sizes: DEFAULT_SIZES.to_vec(),
            mazes_per_size: DEFAULT_MAZES_PER_SIZE,
            variants: VariantSpec::ALL.to_vec(),
            base_seed: 0,
            parallelism: 1,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mazes_per_size == 0 {
            return Err(Error::Config("mazes_per_size must be at least 1".into()));
        }
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::Config("no variants selected".into()));
        }
        if let Some(n) = self.sizes.iter().find(|n| **n < MIN_SIZE || **n % 2 != 0) {
            return Err(Error::Config(format!("maze size {n} must be even and >= {MIN_SIZE}")));
        }
        Ok(())
    }

    pub fn maze_seed(&self, index: usize) -> u64 {
        self.base_seed.wrapping_add(index as u64)
    }

    /// Every episode of the matrix, in record order.
    pub fn episodes(&self) -> Vec<EpisodeConfig> {
        let mut out = Vec::with_capacity(self.sizes.len() * self.mazes_per_size * self.variants.len());
        for &n in &self.sizes {
            for i in 0..self.mazes_per_size {
                for &v in &self.variants {
                    out.push(EpisodeConfig::new(n, self.maze_seed(i), v));
                }
            }
        }
        out
    }
}

/// An episode that returned an error instead of a log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeFailure {
    pub config: EpisodeConfig,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub size: usize,
    pub variant: VariantSpec,
    pub episodes: usize,
    pub mean_steps: f64,
    pub median_steps: f64,
    pub min_steps: u64,
    pub max_steps: u64,
    pub stddev: f64,
    /// Percent of episodes that reached the target.
    pub success_rate: f64,
    pub mean_coverage: f64,
    /// Switch coverage in 10 %-wide bins.
    pub switch_coverage_histogram: [u32; 10],
    /// How often each threshold was selected (learner variants only).
    pub threshold_histogram: [u32; ACTION_COUNT],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: SuiteConfig,
    pub code_version: String,
    /// Informational only; differs between runs.
    pub wall_clock_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub provenance: Provenance,
    pub rows: Vec<SuiteRow>,
}

#[derive(Debug, Clone)]
pub struct SuiteOutput {
    pub report: SuiteReport,
    pub records: Vec<EpisodeLog>,
    pub failures: Vec<EpisodeFailure>,
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    cfg.validate()?;
    let started = Instant::now();
    let jobs = cfg.episodes();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let results: Vec<(EpisodeConfig, Result<EpisodeLog>)> = pool.install(|| {
        jobs.into_par_iter()
            .map(|c| {
                let r = run_episode(&c);
                (c, r)
            })
            .collect()
    });

    let mut records = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (config, r) in results {
        match r {
            Ok(log) => records.push(log),
            Err(e) => failures.push(EpisodeFailure { config, error: e.to_string() }),
        }
    }
    let mut report = SuiteReport::from_records(cfg, &records, &failures);
    report.provenance.wall_clock_secs = started.elapsed().as_secs_f64();
    Ok(SuiteOutput { report, records, failures })
}

fn median(sorted: &[u64]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        l if l % 2 == 1 => sorted[l / 2] as f64,
        l => (sorted[l / 2 - 1] as f64 + sorted[l / 2] as f64) / 2.0,
    }
}

impl SuiteReport {
    /// Aggregates episode records into one row per `(size, variant)` of `cfg`.
    /// Failed episodes count against the success rate and are excluded from
    /// the step statistics.
    pub fn from_records(cfg: &SuiteConfig, records: &[EpisodeLog], failures: &[EpisodeFailure]) -> Self {
        let mut rows = Vec::new();
        for &size in &cfg.sizes {
            for &variant in &cfg.variants {
                let cell: Vec<&EpisodeLog> =
                    records.iter().filter(|r| r.config.n == size && r.config.variant == variant).collect();
                let failed = failures.iter().filter(|f| f.config.n == size && f.config.variant == variant).count();
                let mut steps: Vec<u64> = cell.iter().map(|r| r.total_steps).collect();
                steps.sort_unstable();
                let count = steps.len();
                let mean = if count == 0 { 0.0 } else { steps.iter().sum::<u64>() as f64 / count as f64 };
                let stddev = if count < 2 {
                    0.0
                } else {
                    (steps.iter().map(|s| (*s as f64 - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
                };
                let successes = cell.iter().filter(|r| r.outcome == Outcome::Success).count();
                let episodes = count + failed;
                let mut switch_hist = [0u32; 10];
                let mut threshold_hist = [0u32; ACTION_COUNT];
                for r in &cell {
                    if let Some(sw) = r.switch {
                        switch_hist[((sw.coverage / 10.0) as usize).min(9)] += 1;
                    }
                    for d in &r.decisions {
                        threshold_hist[d.action.index()] += 1;
                    }
                }
                rows.push(SuiteRow {
                    size,
                    variant,
                    episodes,
                    mean_steps: mean,
                    median_steps: median(&steps),
                    min_steps: steps.first().copied().unwrap_or(0),
                    max_steps: steps.last().copied().unwrap_or(0),
                    stddev,
                    success_rate: if episodes == 0 { 0.0 } else { successes as f64 * 100.0 / episodes as f64 },
                    mean_coverage: if count == 0 {
                        0.0
                    } else {
                        cell.iter().map(|r| r.final_coverage).sum::<f64>() / count as f64
                    },
                    switch_coverage_histogram: switch_hist,
                    threshold_histogram: threshold_hist,
                });
            }
        }
        SuiteReport {
            provenance: Provenance {
                config: cfg.clone(),
                code_version: env!("CARGO_PKG_VERSION").to_string(),
                wall_clock_secs: 0.0,
            },
            rows,
        }
    }

    pub fn row(&self, size: usize, variant: VariantSpec) -> Option<&SuiteRow> {
        self.rows.iter().find(|r| r.size == size && r.variant == variant)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
        // Serde emits the header from the field names, which match CSV_HEADER.
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        if self.rows.is_empty() {
            w.write_record(CSV_HEADER).map_err(csv_err)?;
        }
        for r in &self.rows {
            w.serialize(CsvRow::from(r)).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }
}

/// One line of the summary CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub size: usize,
    pub variant: String,
    pub mean_steps: f64,
    pub median_steps: f64,
    pub min_steps: u64,
    pub max_steps: u64,
    pub stddev: f64,
    pub success_rate: f64,
}

impl From<&SuiteRow> for CsvRow {
    fn from(r: &SuiteRow) -> Self {
        CsvRow {
            size: r.size,
            variant: r.variant.label().to_string(),
            mean_steps: r.mean_steps,
            median_steps: r.median_steps,
            min_steps: r.min_steps,
            max_steps: r.max_steps,
            stddev: r.stddev,
            success_rate: r.success_rate,
        }
    }
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Config(format!("{}: unexpected CSV header {header:?}", path.display())));
    }
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err)
}

/// Episode records as JSON lines.
pub fn write_records(records: &[EpisodeLog], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<EpisodeLog>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub size: usize,
    pub variant: VariantSpec,
    pub mean_steps: f64,
    /// Change in mean steps relative to the same base without convergence, in percent.
    pub delta_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    /// Compares none / fixed / learned convergence for every base explorer
    /// and size whose three variants are all present in `report`.
    pub fn from_report(report: &SuiteReport) -> Self {
        let mut rows = Vec::new();
        let sizes = &report.provenance.config.sizes;
        for &size in sizes {
            for base in [crate::episode::BaseExplorer::Spiral, crate::episode::BaseExplorer::Sentinel] {
                let triple: Vec<&SuiteRow> = [ConvergenceMode::None, ConvergenceMode::Fixed, ConvergenceMode::Rl]
                    .into_iter()
                    .filter_map(|c| report.row(size, VariantSpec::new(base, c)))
                    .collect();
                if triple.len() != 3 {
                    continue;
                }
                let baseline = triple[0].mean_steps;
                for r in triple {
                    rows.push(AblationRow {
                        size,
                        variant: r.variant,
                        mean_steps: r.mean_steps,
                        delta_pct: (r.mean_steps - baseline) / baseline * 100.0,
                    });
                }
            }
        }
        AblationTable { rows }
    }

    pub fn delta(&self, size: usize, variant: VariantSpec) -> Option<f64> {
        self.rows.iter().find(|r| r.size == size && r.variant == variant).map(|r| r.delta_pct)
    }
}

impl fmt::Display for AblationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>6}  {:<14} {:>12}  {:>10}", "size", "configuration", "mean steps", "vs none")?;
        for r in &self.rows {
            let delta = if r.variant.convergence == ConvergenceMode::None {
                "baseline".to_string()
            } else {
                format!("{:+.1}%", r.delta_pct)
            };
            writeln!(f, "{:>6}  {:<14} {:>12.1}  {:>10}", r.size, r.variant.label(), r.mean_steps, delta)?;
        }
        Ok(())
    }
}

/// Runs the suite and builds the none / fixed / learned comparison.
pub fn ablation(cfg: &SuiteConfig) -> Result<(AblationTable, SuiteOutput)> {
    let has_spiral_triple = [ConvergenceMode::None, ConvergenceMode::Fixed, ConvergenceMode::Rl]
        .into_iter()
        .all(|c| cfg.variants.contains(&VariantSpec::new(crate::episode::BaseExplorer::Spiral, c)));
    if !has_spiral_triple {
        return Err(Error::Config("ablation needs spiral, spiral-conv and spiral-rl".into()));
    }
    let out = run_suite(cfg)?;
    Ok((AblationTable::from_report(&out.report), out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(variants: Vec<VariantSpec>) -> SuiteConfig {
        SuiteConfig { sizes: vec![16], mazes_per_size: 3, variants, base_seed: 5, parallelism: 2 }
    }

    #[test]
    fn validation() {
        let mut c = small(VariantSpec::ALL.to_vec());
        c.mazes_per_size = 0;
        assert!(c.validate().is_err());
        let mut c = small(VariantSpec::ALL.to_vec());
        c.sizes = vec![12, 7];
        assert!(c.validate().is_err());
        let mut c = small(VariantSpec::ALL.to_vec());
        c.parallelism = 0;
        assert!(c.validate().is_err());
        assert!(small(vec![]).validate().is_err());
    }

    #[test]
    fn seed_schedule() {
        let c = SuiteConfig { base_seed: u64::MAX, ..SuiteConfig::default() };
        assert_eq!(c.maze_seed(0), u64::MAX);
        assert_eq!(c.maze_seed(1), 0);
        let eps = small(VariantSpec::ALL.to_vec()).episodes();
        assert_eq!(eps.len(), 18);
        assert_eq!(eps[6].maze_seed, 6);
        assert_eq!(eps[6].variant, VariantSpec::ALL[0]);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[1, 2, 3]), 2.0);
        assert_eq!(median(&[1, 2, 3, 10]), 2.5);
        assert_eq!(median(&[]), 0.0);
    }

    #[test]
    fn empty_report_writes_header_only_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        let report = SuiteReport::from_records(&SuiteConfig { sizes: vec![], ..SuiteConfig::default() }, &[], &[]);
        report.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "size,variant,mean_steps,median_steps,min_steps,max_steps,stddev,success_rate\n");
        assert!(read_csv(&path).unwrap().is_empty());
    }

    #[test]
    fn io_errors_carry_path() {
        let err = read_records(Path::new("/nonexistent/records.jsonl")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/records.jsonl"));
    }

    #[test]
    fn ablation_requires_spiral_triple() {
        assert!(ablation(&small(vec![VariantSpec::ALL[0]])).is_err());
    }

    #[test]
    fn ablation_baseline_is_zero() {
        let (table, _) = ablation(&small(VariantSpec::ALL[..3].to_vec())).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert_eq!(table.delta(16, VariantSpec::ALL[0]), Some(0.0));
        assert!(table.to_string().contains("baseline"));
    }
}
