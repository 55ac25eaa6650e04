use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Args;
use log::info;
use votespan_core::eval::{run_cell_observed, run_experiment_grid, OUTPUT_FILES};
use votespan_core::pli::{DEFAULT_MAX_N, DEFAULT_THRESHOLD};
use votespan_core::stream::vote_dump::{VoteDumpReader, VoteDumpWriter};
use votespan_core::stream::VoteMode;
use votespan_core::{
    pli_exact, pli_uniform, solve_inc, solve_sinc, BranchingVotes, DependenceEstimator,
    DependenceProfile, Error, Result, SizingRequest,
};

use crate::config::{invalid, parse_range, RunFlags};

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Number of classes.
    #[arg(long)]
    pub m: usize,
    /// `p_1,…,p_{m-1}`, or a single `p` for a uniform profile.
    #[arg(long, allow_hyphen_values = true)]
    pub p: String,
}

impl ProfileArgs {
    /// The profile, plus the scalar `p` when it was given as one value.
    fn parse(&self) -> Result<(DependenceProfile, Option<f64>)> {
        let values = self
            .p
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("bad probability '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() == 1 {
            let p = values[0];
            return Ok((DependenceProfile::uniform(self.m, p)?, Some(p)));
        }
        Ok((DependenceProfile::new(self.m, values)?, None))
    }
}

#[derive(Debug, Args)]
pub struct PliArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    /// Ensemble sizes: `a..b` (inclusive) or a single `n`.
    #[arg(long)]
    pub n: String,
}

pub fn pli(args: &PliArgs, out: &mut impl Write) -> Result<()> {
    let (profile, uniform) = args.profile.parse()?;
    writeln!(out, "n,pli")?;
    for n in parse_range(&args.n)? {
        let value = match uniform {
            Some(p) => pli_uniform(p, profile.m(), n)?,
            None => pli_exact(&profile, n),
        };
        writeln!(out, "{n},{value:?}")?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SizeArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    /// PLI threshold T, in (0, 1).
    #[arg(long, visible_alias = "threshold", default_value_t = DEFAULT_THRESHOLD)]
    pub t: f64,
    /// Largest ensemble size searched.
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    pub max_n: usize,
}

pub fn size(args: &SizeArgs, out: &mut impl Write) -> Result<()> {
    let (profile, uniform) = args.profile.parse()?;
    let req = SizingRequest::new(args.t, args.max_n)?;
    let inc = solve_inc(&profile, &req);
    let sinc = solve_sinc(uniform.unwrap_or_else(|| profile.mean()), profile.m(), &req)?;
    writeln!(out, "INC,{inc}")?;
    writeln!(out, "SINC,{sinc}")?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Vote dump CSV: `instance_id,classifier_id,score_0,…`.
    #[arg(long)]
    pub votes: PathBuf,
    /// Relative rank tolerance.
    #[arg(long, default_value_t = votespan_core::linalg::DEFAULT_RANK_TOL)]
    pub tol: f64,
    /// Shuffle classifier order per instance with this seed.
    #[arg(long)]
    pub shuffle_seed: Option<u64>,
}

pub fn estimate(args: &EstimateArgs, out: &mut impl Write) -> Result<()> {
    let file = File::open(&args.votes).map_err(|e| Error::Ingestion {
        line: 0,
        message: format!("cannot open {}: {e}", args.votes.display()),
    })?;
    let reader = VoteDumpReader::new(BufReader::new(file))?;
    let m = reader.m();
    let mut estimator = DependenceEstimator::new(m, args.tol)?;
    if let Some(seed) = args.shuffle_seed {
        estimator = estimator.with_shuffle(seed);
    }
    let mut sizes: Option<(usize, usize)> = None;
    for matrix in reader {
        let matrix = matrix?;
        let n = matrix.n_rows();
        sizes = Some(sizes.map_or((n, n), |(lo, hi)| (lo.min(n), hi.max(n))));
        estimator.observe(&matrix)?;
    }
    let report = estimator.report()?;
    writeln!(out, "m,{m}")?;
    match sizes {
        Some((lo, hi)) if lo == hi => writeln!(out, "n,{lo}")?,
        Some((lo, hi)) => writeln!(out, "n,{lo}..{hi}")?,
        None => writeln!(out, "n,--")?,
    }
    writeln!(out, "instances,{}", report.instances_seen)?;
    for (l, p) in report.profile.as_slice().iter().enumerate() {
        writeln!(out, "p_{},{p:?}", l + 1)?;
    }
    writeln!(out, "empirical_pli,{:?}", report.full_rank_fraction())?;
    writeln!(out, "empirical_pli_stderr,{:?}", report.full_rank_stderr())?;
    match sizes {
        Some((lo, hi)) if lo == hi => {
            writeln!(out, "pli_exact,{:?}", pli_exact(&report.profile, lo))?
        }
        _ => writeln!(out, "pli_exact,--")?,
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub flags: RunFlags,
}

fn preamble(reproducible: bool) -> Option<String> {
    if reproducible {
        return None;
    }
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    Some(format!(
        "generated by votespan {} at unix time {secs}",
        env!("CARGO_PKG_VERSION")
    ))
}

pub fn experiment(args: &ExperimentArgs, out: &mut impl Write) -> Result<()> {
    let flags = args.flags.clone().resolve()?;
    let cfg = flags.grid()?;
    let dir = flags.out_dir();
    info!(
        "running {} cells into {}",
        cfg.datasets.len() * cfg.methods.len() * cfg.sizes.len() * cfg.seeds,
        dir.display()
    );
    let report = run_experiment_grid(&cfg)?;
    report.write(&dir, preamble(flags.reproducible).as_deref())?;
    writeln!(
        out,
        "dataset,method,m,SINC,INC,n_INC,acc_pct_of_max,correlation"
    )?;
    for s in &report.summaries {
        let dash = |v: Option<String>| v.unwrap_or_else(|| "--".to_owned());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.dataset,
            s.method,
            s.m,
            s.sinc,
            s.inc,
            dash(s.n_inc.map(|v| v.to_string())),
            dash(s.acc_pct_of_max.map(|v| v.to_string())),
            dash(s.correlation.map(|v| v.to_string())),
        )?;
    }
    info!("wrote {} to {}", OUTPUT_FILES.join(", "), dir.display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub flags: RunFlags,
    /// Ensemble size.
    #[arg(long)]
    pub n: usize,
    /// Write the member votes of every instance to this CSV.
    #[arg(long)]
    pub dump_votes: Option<PathBuf>,
}

pub fn simulate(args: &SimulateArgs, out: &mut impl Write) -> Result<()> {
    let flags = args.flags.clone().resolve()?;
    let mut cfg = flags.grid()?;
    cfg.sizes = vec![args.n];
    cfg.validate()?;
    let method = cfg.methods[0];
    let dataset = cfg.datasets[0].prepare()?;
    let m = dataset.m();
    let mut writer = match &args.dump_votes {
        Some(path) => Some(VoteDumpWriter::new(BufWriter::new(File::create(path)?), m)?),
        None => None,
    };
    let vote_mode = cfg.vote_mode;
    let cell = run_cell_observed(&dataset, method, args.n, 0, &cfg, |votes| {
        match writer.as_mut() {
            Some(w) if vote_mode == VoteMode::OneHot => w.write(&vote_mode.apply(votes)),
            Some(w) => w.write(votes),
            None => Ok(()),
        }
    })?;
    if let Some(w) = writer {
        w.finish()?.flush()?;
    }
    let est = &cell.estimation;
    writeln!(out, "dataset,{}", cell.dataset)?;
    writeln!(out, "method,{}", cell.method)?;
    writeln!(out, "m,{}", cell.m)?;
    writeln!(out, "n,{}", cell.n)?;
    writeln!(out, "instances,{}", cell.instances)?;
    writeln!(out, "accuracy,{:?}", cell.accuracy)?;
    for (l, p) in est.profile.as_slice().iter().enumerate() {
        writeln!(out, "p_{},{p:?}", l + 1)?;
    }
    writeln!(out, "empirical_pli,{:?}", est.full_rank_fraction())?;
    writeln!(out, "pli_exact,{:?}", pli_exact(&est.profile, cell.n))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    /// Votes per instance.
    #[arg(long)]
    pub n: usize,
    /// Number of instances.
    #[arg(long, default_value_t = 10_000)]
    pub instances: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn synth_votes(args: &SynthArgs, out: &mut impl Write) -> Result<()> {
    let (profile, _) = args.profile.parse()?;
    if args.n == 0 {
        return Err(invalid("--n must be positive"));
    }
    let m = profile.m();
    let source = BranchingVotes::new(profile, args.n, args.seed);
    match &args.out {
        Some(path) => {
            let mut w = VoteDumpWriter::new(BufWriter::new(File::create(path)?), m)?;
            for matrix in source.take(args.instances as usize) {
                w.write(&matrix)?;
            }
            w.finish()?.flush()?;
        }
        None => {
            let mut w = VoteDumpWriter::new(out, m)?;
            for matrix in source.take(args.instances as usize) {
                w.write(&matrix)?;
            }
            w.finish()?.flush()?;
        }
    }
    Ok(())
}
