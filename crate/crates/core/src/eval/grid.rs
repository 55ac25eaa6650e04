//! Multi-dataset, multi-method, multi-size, multi-seed experiment grid.
//!
//! Every cell `(dataset, method, n, seed)` is an independent prequential
//! run that also feeds its vote matrices to a dependence estimator. Cells
//! are reduced into one [`ExperimentRow`] per `(dataset, method, n)` and one
//! [`SummaryRow`] per `(dataset, method)`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::prequential::prequential_run;
use super::stats::{mean_and_stddev, nearest_tested_size, pearson_correlation, percent_of_max};
use crate::error::{Error, Result};
use crate::estimator::{DependenceEstimator, EstimationReport};
use crate::linalg::DEFAULT_RANK_TOL;
use crate::pli::{
    pli_exact, solve_inc, solve_sinc, DependenceProfile, EnsembleSize, SizingRequest,
};
use crate::stream::{
    Combiner, CsvDataset, CsvSchema, EnsembleConfig, EnsembleModel, InstanceStream, LearnerKind,
    RbfGenerator, RbfStreamConfig, VoteMode,
};
use crate::votes::VoteMatrix;

/// Files written by [`GridReport::write`].
pub const OUTPUT_FILES: [&str; 5] = [
    "results_raw.csv",
    "results_by_size.csv",
    "results_summary.csv",
    "p_profiles.csv",
    "pli_curve.csv",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DatasetSpec {
    /// Synthetic RBF stream. `config.seed` is replaced per grid seed.
    Rbf {
        name: String,
        config: RbfStreamConfig,
    },
    Csv {
        name: String,
        path: PathBuf,
    },
}

impl DatasetSpec {
    pub fn name(&self) -> &str {
        match self {
            DatasetSpec::Rbf { name, .. } | DatasetSpec::Csv { name, .. } => name,
        }
    }

    /// Loads or validates the dataset once so cells can share it.
    pub fn prepare(&self) -> Result<PreparedDataset> {
        let source = match self {
            DatasetSpec::Rbf { config, .. } => {
                config.validate()?;
                Source::Rbf(config.clone())
            }
            DatasetSpec::Csv { path, .. } => Source::Csv(Arc::new(CsvDataset::from_path(
                path,
                &CsvSchema::default(),
            )?)),
        };
        Ok(PreparedDataset {
            name: self.name().to_owned(),
            source,
        })
    }
}

#[derive(Debug, Clone)]
enum Source {
    Rbf(RbfStreamConfig),
    Csv(Arc<CsvDataset>),
}

/// A dataset ready to be streamed by many cells.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    name: String,
    source: Source,
}

impl PreparedDataset {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn m(&self) -> usize {
        match &self.source {
            Source::Rbf(c) => c.m,
            Source::Csv(d) => d.n_classes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub datasets: Vec<DatasetSpec>,
    pub methods: Vec<Combiner>,
    pub sizes: Vec<usize>,
    pub seeds: usize,
    pub base_seed: u64,
    pub sizing: SizingRequest,
    pub tol: f64,
    pub learner: LearnerKind,
    pub vote_mode: VoteMode,
    pub lambda: f64,
    pub goowe_window: usize,
    pub ridge: f64,
    pub accuracy_window: u64,
    /// Upper bound on instances per run.
    pub instance_limit: u64,
    /// Worker threads; `None` uses every available core.
    pub workers: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            methods: vec![Combiner::Majority, Combiner::Geometric],
            sizes: vec![2, 4, 8, 16, 32, 64, 128],
            seeds: 10,
            base_seed: 1,
            sizing: SizingRequest::default(),
            tol: DEFAULT_RANK_TOL,
            learner: LearnerKind::default(),
            vote_mode: VoteMode::Scores,
            lambda: 1.0,
            goowe_window: 100,
            ridge: 1e-8,
            accuracy_window: 1000,
            instance_limit: 100_000,
            workers: None,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::validation("no datasets configured"));
        }
        if self.methods.is_empty() {
            return Err(Error::validation("no methods configured"));
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(Error::validation(
                "sizes must be a non-empty list of positive integers",
            ));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("sizes must be strictly increasing"));
        }
        if self.seeds == 0 {
            return Err(Error::validation("seed count must be positive"));
        }
        if self.instance_limit == 0 || self.accuracy_window == 0 {
            return Err(Error::validation(
                "instance limit and accuracy window must be positive",
            ));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::validation("rank tolerance must be in (0, 1)"));
        }
        Ok(())
    }
}

/// Outcome of one prequential run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub dataset: String,
    pub method: String,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub instances: u64,
    pub accuracy: f64,
    pub estimation: EstimationReport,
}

/// Seed-aggregated results for one `(dataset, method, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub dataset: String,
    pub method: String,
    pub m: usize,
    pub n: usize,
    pub seeds: usize,
    pub mean_accuracy: f64,
    pub accuracy_stddev: f64,
    /// Exact PLI of `p_profile_at_n` at this size.
    pub pli_at_n: f64,
    /// Dependence profile averaged over seeds.
    pub p_profile_at_n: DependenceProfile,
    /// Mean fraction of instances whose votes reached rank `m`.
    pub full_rank_fraction: f64,
}

/// Sizing verdict for one `(dataset, method)`. `None` fields print as `--`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub method: String,
    pub m: usize,
    pub sinc: EnsembleSize,
    pub inc: EnsembleSize,
    pub n_inc: Option<usize>,
    pub acc_pct_of_max: Option<f64>,
    pub correlation: Option<f64>,
    /// Profile averaged across sizes, the INC input.
    pub mean_profile: DependenceProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub cells: Vec<CellResult>,
    pub rows: Vec<ExperimentRow>,
    pub summaries: Vec<SummaryRow>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn method_tag(method: Combiner) -> u64 {
    match method {
        Combiner::Majority => 1,
        Combiner::Geometric => 2,
    }
}

/// Runs one `(dataset, method, n, seed)` cell.
pub fn run_cell(
    dataset: &PreparedDataset,
    method: Combiner,
    n: usize,
    seed: u64,
    cfg: &GridConfig,
) -> Result<CellResult> {
    run_cell_observed(dataset, method, n, seed, cfg, |_| Ok(()))
}

/// [`run_cell`] that also hands every instance's member votes to `observer`.
pub fn run_cell_observed<F>(
    dataset: &PreparedDataset,
    method: Combiner,
    n: usize,
    seed: u64,
    cfg: &GridConfig,
    observer: F,
) -> Result<CellResult>
where
    F: FnMut(&VoteMatrix) -> Result<()>,
{
    let context = format!("{} / {} / n={n} / seed={seed}", dataset.name, method.name());
    run_cell_inner(dataset, method, n, seed, cfg, observer).map_err(|e| e.context(context))
}

fn run_cell_inner<F>(
    dataset: &PreparedDataset,
    method: Combiner,
    n: usize,
    seed: u64,
    cfg: &GridConfig,
    mut observer: F,
) -> Result<CellResult>
where
    F: FnMut(&VoteMatrix) -> Result<()>,
{
    let stream_seed = splitmix64(cfg.base_seed ^ splitmix64(seed));
    let model_seed =
        splitmix64(stream_seed ^ (n as u64).rotate_left(20) ^ method_tag(method).rotate_left(40));

    let mut ens_cfg = EnsembleConfig::new(n, method, model_seed);
    ens_cfg.learner = cfg.learner.clone();
    ens_cfg.lambda = cfg.lambda;
    ens_cfg.window = cfg.goowe_window;
    ens_cfg.ridge = cfg.ridge;

    let mut stream: Box<dyn InstanceStream + '_> = match &dataset.source {
        Source::Rbf(c) => {
            let mut c = c.clone();
            c.seed = stream_seed;
            Box::new(RbfGenerator::new(c)?)
        }
        Source::Csv(d) => Box::new(d.stream()),
    };
    let m = stream.n_classes();
    let mut model = EnsembleModel::new(&ens_cfg, m, stream.n_features())?;
    let mut estimator = DependenceEstimator::new(m, cfg.tol)?;
    let vote_mode = cfg.vote_mode;
    let record = prequential_run(
        stream.as_mut(),
        &mut model,
        cfg.instance_limit,
        cfg.accuracy_window,
        |votes| {
            observer(votes)?;
            match vote_mode {
                VoteMode::Scores => estimator.observe(votes).map(|_| ()),
                VoteMode::OneHot => estimator.observe(&vote_mode.apply(votes)).map(|_| ()),
            }
        },
    )?;
    Ok(CellResult {
        dataset: dataset.name.clone(),
        method: method.name().to_owned(),
        m,
        n,
        seed,
        instances: record.instances,
        accuracy: record.accuracy,
        estimation: estimator.report()?,
    })
}

/// Runs every cell of the grid and reduces the results.
pub fn run_experiment_grid(cfg: &GridConfig) -> Result<GridReport> {
    cfg.validate()?;
    let prepared = cfg
        .datasets
        .iter()
        .map(|d| {
            d.prepare()
                .map_err(|e| e.context(format!("dataset {}", d.name())))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut specs = Vec::new();
    for (d, _) in prepared.iter().enumerate() {
        for &method in &cfg.methods {
            for &n in &cfg.sizes {
                for seed in 0..cfg.seeds as u64 {
                    specs.push((d, method, n, seed));
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    let cells = pool.install(|| {
        specs
            .par_iter()
            .map(|&(d, method, n, seed)| run_cell(&prepared[d], method, n, seed, cfg))
            .collect::<Result<Vec<_>>>()
    })?;
    GridReport::from_cells(cells, &cfg.sizing)
}

/// Reduces per-size rows of one `(dataset, method)` into its summary.
///
/// INC uses the profile averaged across sizes, SINC the mean of that
/// profile's entries. Entry `p_l` is averaged over sizes `n > l` only.
/// A pure function of `rows`.
pub fn summarize(rows: &[ExperimentRow], sizing: &SizingRequest) -> Result<SummaryRow> {
    let first = rows
        .first()
        .ok_or_else(|| Error::validation("no rows to summarize"))?;
    let m = first.m;
    if rows
        .iter()
        .any(|r| r.m != m || r.dataset != first.dataset || r.method != first.method)
    {
        return Err(Error::validation(
            "summary rows must share dataset, method and m",
        ));
    }
    // p_l is only observable at sizes n > l; smaller sizes carry the
    // placeholder 1.0 and are left out of that entry's average.
    let avg: Vec<f64> = (1..m)
        .map(|l| {
            let seen: Vec<f64> = rows
                .iter()
                .filter(|r| r.n > l)
                .map(|r| r.p_profile_at_n.at(l))
                .collect();
            if seen.is_empty() {
                1.0
            } else {
                (seen.iter().sum::<f64>() / seen.len() as f64).clamp(0.0, 1.0)
            }
        })
        .collect();
    let mean_profile = DependenceProfile::new(m, avg)?;
    let inc = solve_inc(&mean_profile, sizing);
    // a blocked dimension makes the scalar approximation meaningless
    let sinc = if mean_profile.is_impassable() {
        EnsembleSize::Unreachable
    } else {
        solve_sinc(mean_profile.mean(), m, sizing)?
    };

    let sizes: Vec<usize> = rows.iter().map(|r| r.n).collect();
    let acc_by_n: BTreeMap<usize, f64> = rows.iter().map(|r| (r.n, r.mean_accuracy)).collect();
    let n_inc = inc.size().and_then(|v| nearest_tested_size(v, &sizes));
    let acc_pct_of_max = n_inc.and_then(|n| percent_of_max(&acc_by_n, n).ok());
    let pli: Vec<f64> = rows.iter().map(|r| r.pli_at_n).collect();
    let acc: Vec<f64> = rows.iter().map(|r| r.mean_accuracy).collect();
    let correlation = pearson_correlation(&pli, &acc).ok();

    Ok(SummaryRow {
        dataset: first.dataset.clone(),
        method: first.method.clone(),
        m,
        sinc,
        inc,
        n_inc,
        acc_pct_of_max,
        correlation,
        mean_profile,
    })
}

fn aggregate(cells: &[&CellResult]) -> Result<ExperimentRow> {
    let first = cells[0];
    let m = first.m;
    let accs: Vec<f64> = cells.iter().map(|c| c.accuracy).collect();
    let (mean_accuracy, accuracy_stddev) = mean_and_stddev(&accs);
    let mut p = vec![0.0; m - 1];
    for c in cells {
        for (a, v) in p.iter_mut().zip(c.estimation.profile.as_slice()) {
            *a += v / cells.len() as f64;
        }
    }
    let p_profile_at_n =
        DependenceProfile::new(m, p.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())?;
    let full_rank_fraction = cells
        .iter()
        .map(|c| c.estimation.full_rank_fraction())
        .sum::<f64>()
        / cells.len() as f64;
    Ok(ExperimentRow {
        dataset: first.dataset.clone(),
        method: first.method.clone(),
        m,
        n: first.n,
        seeds: cells.len(),
        mean_accuracy,
        accuracy_stddev,
        pli_at_n: pli_exact(&p_profile_at_n, first.n),
        p_profile_at_n,
        full_rank_fraction,
    })
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "--".to_owned(), |v| v.to_string())
}

fn create(dir: &Path, name: &str, preamble: Option<&str>) -> Result<csv::Writer<BufWriter<File>>> {
    let mut file = BufWriter::new(File::create(dir.join(name))?);
    if let Some(line) = preamble {
        writeln!(file, "# {line}")?;
    }
    Ok(csv::Writer::from_writer(file))
}

fn reader(dir: &Path, name: &str) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(dir.join(name))?)
}

fn parse<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    let line = rec.position().map_or(0, |p| p.line());
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::ingestion(line, format!("bad value in column {i}")))
}

type CellGroups<'a> = Vec<((String, String), BTreeMap<usize, Vec<&'a CellResult>>)>;

impl GridReport {
    /// Groups cells by `(dataset, method)` in first-seen order and by size.
    pub fn from_cells(cells: Vec<CellResult>, sizing: &SizingRequest) -> Result<Self> {
        let mut groups: CellGroups = Vec::new();
        for cell in &cells {
            let key = (cell.dataset.clone(), cell.method.clone());
            let idx = match groups.iter().position(|(k, _)| *k == key) {
                Some(i) => i,
                None => {
                    groups.push((key, BTreeMap::new()));
                    groups.len() - 1
                }
            };
            groups[idx].1.entry(cell.n).or_default().push(cell);
        }
        let mut rows = Vec::new();
        let mut summaries = Vec::new();
        for (_, by_n) in &groups {
            let group_rows = by_n
                .values()
                .map(|c| aggregate(c))
                .collect::<Result<Vec<_>>>()?;
            summaries.push(summarize(&group_rows, sizing)?);
            rows.extend(group_rows);
        }
        Ok(Self {
            cells,
            rows,
            summaries,
        })
    }

    /// Writes every file in [`OUTPUT_FILES`] to `dir`. `preamble`, when
    /// given, becomes a leading `#` comment line in each file.
    pub fn write(&self, dir: &Path, preamble: Option<&str>) -> Result<()> {
        std::fs::create_dir_all(dir)?;

        let mut w = create(dir, "results_raw.csv", preamble)?;
        w.write_record([
            "dataset",
            "method",
            "m",
            "n",
            "seed",
            "instances",
            "accuracy",
            "full_rank_fraction",
            "p_profile",
        ])?;
        for c in &self.cells {
            let profile: Vec<String> = c
                .estimation
                .profile
                .as_slice()
                .iter()
                .map(f64::to_string)
                .collect();
            w.write_record([
                c.dataset.clone(),
                c.method.clone(),
                c.m.to_string(),
                c.n.to_string(),
                c.seed.to_string(),
                c.instances.to_string(),
                c.accuracy.to_string(),
                c.estimation.full_rank_fraction().to_string(),
                profile.join(";"),
            ])?;
        }
        w.flush()?;

        let mut w = create(dir, "results_by_size.csv", preamble)?;
        w.write_record([
            "dataset",
            "method",
            "m",
            "n",
            "seeds",
            "mean_accuracy",
            "accuracy_stddev",
            "pli",
            "full_rank_fraction",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.dataset.clone(),
                r.method.clone(),
                r.m.to_string(),
                r.n.to_string(),
                r.seeds.to_string(),
                r.mean_accuracy.to_string(),
                r.accuracy_stddev.to_string(),
                r.pli_at_n.to_string(),
                r.full_rank_fraction.to_string(),
            ])?;
        }
        w.flush()?;

        let mut w = create(dir, "results_summary.csv", preamble)?;
        w.write_record([
            "dataset",
            "method",
            "m",
            "SINC",
            "INC",
            "n_INC",
            "acc_pct_of_max",
            "correlation",
        ])?;
        for s in &self.summaries {
            w.write_record([
                s.dataset.clone(),
                s.method.clone(),
                s.m.to_string(),
                s.sinc.to_string(),
                s.inc.to_string(),
                fmt_opt(s.n_inc),
                fmt_opt(s.acc_pct_of_max),
                fmt_opt(s.correlation),
            ])?;
        }
        w.flush()?;

        let mut w = create(dir, "p_profiles.csv", preamble)?;
        w.write_record(["dataset", "method", "n", "l", "p_l"])?;
        for r in &self.rows {
            for (l, p) in r.p_profile_at_n.as_slice().iter().enumerate() {
                w.write_record([
                    r.dataset.clone(),
                    r.method.clone(),
                    r.n.to_string(),
                    (l + 1).to_string(),
                    p.to_string(),
                ])?;
            }
        }
        w.flush()?;

        let mut w = create(dir, "pli_curve.csv", preamble)?;
        w.write_record(["dataset", "method", "n", "pli"])?;
        for r in &self.rows {
            w.write_record([
                r.dataset.clone(),
                r.method.clone(),
                r.n.to_string(),
                r.pli_at_n.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Rebuilds per-size rows from `results_by_size.csv` and
    /// `p_profiles.csv` in `dir`.
    pub fn read_rows(dir: &Path) -> Result<Vec<ExperimentRow>> {
        let mut profiles: BTreeMap<(String, String, usize), Vec<(usize, f64)>> = BTreeMap::new();
        for rec in reader(dir, "p_profiles.csv")?.records() {
            let rec = rec?;
            let key = (rec[0].to_owned(), rec[1].to_owned(), parse(&rec, 2)?);
            profiles
                .entry(key)
                .or_default()
                .push((parse(&rec, 3)?, parse(&rec, 4)?));
        }
        let mut rows = Vec::new();
        for rec in reader(dir, "results_by_size.csv")?.records() {
            let rec = rec?;
            let m: usize = parse(&rec, 2)?;
            let n: usize = parse(&rec, 3)?;
            let key = (rec[0].to_owned(), rec[1].to_owned(), n);
            let mut entries = profiles.remove(&key).unwrap_or_default();
            entries.sort_by_key(|e| e.0);
            let p = entries.into_iter().map(|e| e.1).collect();
            rows.push(ExperimentRow {
                dataset: key.0,
                method: key.1,
                m,
                n,
                seeds: parse(&rec, 4)?,
                mean_accuracy: parse(&rec, 5)?,
                accuracy_stddev: parse(&rec, 6)?,
                pli_at_n: parse(&rec, 7)?,
                p_profile_at_n: DependenceProfile::new(m, p)?,
                full_rank_fraction: parse(&rec, 8)?,
            });
        }
        Ok(rows)
    }
}
