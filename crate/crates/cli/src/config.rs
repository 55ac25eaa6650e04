//! Experiment flags and their optional TOML config file.
//!
//! Config keys are the long flag names (`max-n = 64`). Flags given on the
//! command line win over the file.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use votespan_core::eval::{DatasetSpec, GridConfig};
use votespan_core::pli::{SizingRequest, DEFAULT_MAX_N, DEFAULT_THRESHOLD};
use votespan_core::stream::{Combiner, HoeffdingConfig, LearnerKind, RbfStreamConfig, VoteMode};
use votespan_core::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunFlags {
    /// TOML file with defaults for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// `rbf` or `csv:<path>`.
    #[arg(long)]
    pub dataset: Option<String>,
    /// Dataset label used in the outputs.
    #[arg(long)]
    pub name: Option<String>,
    /// Classes of the RBF stream.
    #[arg(long)]
    pub m: Option<usize>,
    /// RBF feature count.
    #[arg(long)]
    pub features: Option<usize>,
    /// RBF centroid count.
    #[arg(long)]
    pub centroids: Option<usize>,
    /// RBF spread scale.
    #[arg(long)]
    pub offset_std: Option<f64>,
    /// Instances per run (caps CSV datasets, sizes RBF streams).
    #[arg(long)]
    pub instances: Option<u64>,

    /// Combiners: `oza`, `goowe` or both, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub method: Option<Vec<String>>,
    /// Ensemble sizes, comma separated and strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Number of seeds per size.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Base random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// PLI threshold T, in (0, 1).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Largest ensemble size INC and SINC may search.
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Relative rank tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Base learner: `ht` or `nb`.
    #[arg(long)]
    pub learner: Option<String>,
    /// Votes fed to the estimator: `scores` or `one-hot`.
    #[arg(long)]
    pub vote_mode: Option<String>,
    /// Poisson rate of online bagging.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Instances kept for geometric weighting.
    #[arg(long)]
    pub window: Option<usize>,
    /// Ridge added to the geometric normal equations.
    #[arg(long)]
    pub ridge: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit the timestamp comment from output files.
    #[arg(long)]
    #[serde(default)]
    pub reproducible: bool,
}

macro_rules! overlay {
    ($flags:expr, $file:expr, $($field:ident),*) => {
        $( if $flags.$field.is_none() { $flags.$field = $file.$field.take(); } )*
    };
}

impl RunFlags {
    /// Fills unset flags from `--config`, if given.
    pub fn resolve(mut self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let mut file = load_config(&path)?;
        overlay!(
            self, file, dataset, name, m, features, centroids, offset_std, instances, method,
            sizes, seeds, seed, threshold, max_n, tol, learner, vote_mode, lambda, window, ridge,
            workers, out
        );
        self.reproducible |= file.reproducible;
        Ok(self)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("results"))
    }

    fn dataset(&self) -> Result<DatasetSpec> {
        let spec = self.dataset.as_deref().unwrap_or("rbf");
        if spec == "rbf" {
            let m = self.m.unwrap_or(4);
            let mut config = RbfStreamConfig::new(m, 0, self.instances.unwrap_or(100_000));
            if let Some(f) = self.features {
                config.n_features = f;
            }
            if let Some(c) = self.centroids {
                config.n_centroids = c;
            }
            if let Some(s) = self.offset_std {
                config.offset_std = s;
            }
            let name = self.name.clone().unwrap_or_else(|| format!("RBF{m}"));
            return Ok(DatasetSpec::Rbf { name, config });
        }
        if let Some(path) = spec.strip_prefix("csv:") {
            let path = PathBuf::from(path);
            let name = self.name.clone().unwrap_or_else(|| {
                path.file_stem()
                    .map_or_else(|| "csv".to_owned(), |s| s.to_string_lossy().into_owned())
            });
            return Ok(DatasetSpec::Csv { name, path });
        }
        Err(invalid(format!(
            "unknown dataset '{spec}', expected 'rbf' or 'csv:<path>'"
        )))
    }

    pub fn methods(&self) -> Result<Vec<Combiner>> {
        let Some(names) = &self.method else {
            return Ok(vec![Combiner::Majority, Combiner::Geometric]);
        };
        let mut out = Vec::new();
        for name in names {
            let c = parse_combiner(name)?;
            if !out.contains(&c) {
                out.push(c);
            }
        }
        if out.is_empty() {
            return Err(invalid("no method given"));
        }
        Ok(out)
    }

    /// Builds and validates the grid configuration.
    pub fn grid(&self) -> Result<GridConfig> {
        let defaults = GridConfig::default();
        let sizing = SizingRequest::new(
            self.threshold.unwrap_or(DEFAULT_THRESHOLD),
            self.max_n.unwrap_or(DEFAULT_MAX_N),
        )?;
        let learner = match self.learner.as_deref().unwrap_or("ht") {
            "ht" | "hoeffding" => LearnerKind::HoeffdingTree(HoeffdingConfig::default()),
            "nb" | "naive-bayes" => LearnerKind::NaiveBayes,
            other => {
                return Err(invalid(format!(
                    "unknown learner '{other}', expected 'ht' or 'nb'"
                )))
            }
        };
        let vote_mode = match self.vote_mode.as_deref().unwrap_or("scores") {
            "scores" => VoteMode::Scores,
            "one-hot" | "onehot" => VoteMode::OneHot,
            other => {
                return Err(invalid(format!(
                    "unknown vote mode '{other}', expected 'scores' or 'one-hot'"
                )))
            }
        };
        let cfg = GridConfig {
            datasets: vec![self.dataset()?],
            methods: self.methods()?,
            sizes: self.sizes.clone().unwrap_or(defaults.sizes),
            seeds: self.seeds.unwrap_or(defaults.seeds),
            base_seed: self.seed.unwrap_or(defaults.base_seed),
            sizing,
            tol: self.tol.unwrap_or(defaults.tol),
            learner,
            vote_mode,
            lambda: self.lambda.unwrap_or(defaults.lambda),
            goowe_window: self.window.unwrap_or(defaults.goowe_window),
            ridge: self.ridge.unwrap_or(defaults.ridge),
            accuracy_window: defaults.accuracy_window,
            instance_limit: self.instances.unwrap_or(defaults.instance_limit),
            workers: self.workers,
        };
        if cfg.workers == Some(0) {
            return Err(invalid("--workers must be positive"));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

pub fn parse_combiner(name: &str) -> Result<Combiner> {
    match name.trim().to_ascii_lowercase().as_str() {
        "oza" | "ozabagging" | "majority" => Ok(Combiner::Majority),
        "goowe" | "geometric" => Ok(Combiner::Geometric),
        other => Err(invalid(format!(
            "unknown method '{other}', expected 'oza' or 'goowe'"
        ))),
    }
}

fn load_config(path: &Path) -> Result<RunFlags> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Parses `a..b` (inclusive), `a..=b` or a single `n`.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| invalid(format!("bad ensemble size '{t}' in '{s}'")))
    };
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let n = num(s)?;
            (n, n)
        }
    };
    if lo > hi {
        return Err(invalid(format!("empty range '{s}'")));
    }
    Ok((lo..=hi).collect())
}
