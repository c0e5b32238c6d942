mod output;
mod verify;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use distchar::asymptotics::{self, ConvergentReport, MonteCarloEstimate};
use distchar::exact::{exact_surrogate, RationalDistanceMatrix};
use distchar::neighbors::{achievable_near_totals, nearest_sets_exact, DuplicateRule, SearchBudget};
use distchar::robustness::columns_changed;
use distchar::{
    adversarial_augment, concordance, correlation, io as dio, neighbor_sets, rob_minus, rob_plus, Coefficient,
    CorrelationResult, DataMatrix, DistanceMatrix, Error, NeighborSets, RationalScore, SampleSpace, TiePolicy,
};

use output::{index_set, score, sig, Format};

#[derive(Parser)]
#[command(name = "distchar", version, about = "Distance matrices, nearest neighbors and their statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance matrix of a data matrix
    Distmat {
        #[arg(long)]
        c: Coefficient,
        #[arg(long)]
        x: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Nearest-neighbor sets and their total
    Near {
        #[arg(long)]
        c: Coefficient,
        #[arg(long)]
        x: PathBuf,
        /// Exact rational arithmetic (p1, p2, pinf, L)
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        tie: TieArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Robustness under one appended column
    RobPlus {
        #[arg(long)]
        c: Coefficient,
        #[arg(long)]
        x: PathBuf,
        /// `x` with one extra column
        #[arg(long)]
        xp: PathBuf,
        #[command(flatten)]
        tie: TieArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Robustness under leave-one-column-out
    RobMinus {
        #[arg(long)]
        c: Coefficient,
        #[arg(long)]
        x: PathBuf,
        #[command(flatten)]
        tie: TieArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Concordance of nearest-neighbor sets under two coefficients
    Concord {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        x: PathBuf,
        #[command(flatten)]
        tie: TieArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Correlation of the distance matrices under two coefficients
    Corr {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        x: PathBuf,
        /// Sample space: grid (all n² pairs) or upper (i < j)
        #[arg(long, default_value = "grid")]
        conv: SampleSpace,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Append the power-of-two column that gives every row a unique nearest neighbor
    Adversarial {
        #[arg(long)]
        c: Coefficient,
        #[arg(long)]
        x: PathBuf,
        #[command(flatten)]
        tie: TieArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Search for the nearest-neighbor totals reachable with n rows
    ExploreNear {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        c: Coefficient,
        #[arg(long, default_value_t = 2)]
        cols: usize,
        /// Integer grid levels per entry
        #[arg(long, default_value_t = 3)]
        levels: u32,
        /// Random continuous matrices on top of the grid
        #[arg(long, default_value_t = 20_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Monte Carlo expected distance from 0 to the nearest of n uniform points on [-L, L]
    McNn {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1.0)]
        l: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// exp(-exp(-γ)) and its certified continued-fraction convergents
    DeltaCf {
        #[arg(long, default_value_t = 20)]
        digits: u32,
        #[arg(long, default_value_t = 200_000_000)]
        max_q: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the built-in golden examples
    Verify {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Args)]
struct PairArgs {
    /// First coefficient
    #[arg(long)]
    m: Coefficient,
    /// Second coefficient
    #[arg(long = "n", visible_alias = "l")]
    n: Coefficient,
}

#[derive(Args)]
struct TieArgs {
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,
    #[arg(long, default_value_t = 0.0)]
    abs_tol: f64,
    /// Only positive distances compete for nearest neighbor
    #[arg(long)]
    positive_only: bool,
}

impl TieArgs {
    fn policy(&self) -> Result<TiePolicy, Error> {
        let rule = if self.positive_only {
            DuplicateRule::SmallestPositive
        } else {
            DuplicateRule::ZeroCounts
        };
        Ok(TiePolicy::new(self.rel_tol, self.abs_tol)?.with_duplicates(rule))
    }
}

/// A domain error, reported on stderr with exit status 1.
#[derive(Debug)]
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

/// Standard output plus whether every check passed.
struct Report {
    text: String,
    ok: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(report) => {
            let mut out = io::stdout().lock();
            if out.write_all(report.text.as_bytes()).and_then(|_| out.flush()).is_err() || !report.ok {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path) -> Result<DataMatrix, Failure> {
    let file = File::open(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    dio::read_data_matrix(file).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce() -> String) -> String {
    match format {
        Format::Json => output::json(value),
        Format::Text => text(),
    }
}

#[derive(Serialize)]
struct NearReport<'a> {
    coefficient: Coefficient,
    exact: bool,
    #[serde(flatten)]
    sets: &'a NeighborSets,
}

#[derive(Serialize)]
struct ScoreReport {
    coefficient: Coefficient,
    score: RationalScore,
    #[serde(skip_serializing_if = "Option::is_none")]
    changed_per_column: Option<Vec<usize>>,
}

#[derive(Serialize)]
struct PairScoreReport {
    m: Coefficient,
    n: Coefficient,
    score: RationalScore,
}

#[derive(Serialize)]
struct CorrReport {
    m: Coefficient,
    n: Coefficient,
    #[serde(flatten)]
    result: CorrelationResult,
}

#[derive(Serialize)]
struct McReport {
    n: u32,
    l: f64,
    #[serde(flatten)]
    estimate: MonteCarloEstimate,
    /// L/(n+1)
    conjecture: f64,
}

#[derive(Serialize)]
struct DeltaReport {
    delta: String,
    digits: u32,
    max_q: u64,
    #[serde(flatten)]
    report: ConvergentReport,
}

fn sets_text(s: &NeighborSets) -> String {
    let mut out = String::new();
    for (i, set) in s.sets().iter().enumerate() {
        let _ = writeln!(out, "{}: {}", i + 1, index_set(set));
    }
    let _ = writeln!(out, "total: {}", s.total());
    out
}

fn execute(cmd: Command) -> Result<Report, Failure> {
    let text = match cmd {
        Command::Distmat { c, x, format } => {
            let d = DistanceMatrix::build(c, &load(&x)?);
            emit(format, &d, || output::matrix_csv(&d))
        }
        Command::Near {
            c,
            x,
            exact,
            tie,
            format,
        } => {
            let sets = if exact {
                if tie.positive_only {
                    return Err(Failure("--exact uses the zero-inclusive duplicate rule".into()));
                }
                let surrogate = exact_surrogate(c).ok_or_else(|| {
                    Failure(format!("exact mode supports p1, p2, pinf and L, not {c}"))
                })?;
                let file = File::open(&x).map_err(|e| Failure(format!("{}: {e}", x.display())))?;
                let q = dio::read_rational_matrix(file)?;
                nearest_sets_exact(&RationalDistanceMatrix::build(surrogate, &q)?)
            } else {
                neighbor_sets(c, &load(&x)?, &tie.policy()?)
            };
            // A chain of near-ties inside the tolerance can break the bounds;
            // under the positive-only rule a row may have no neighbor at all.
            if !tie.positive_only {
                if let Err(e) = sets.check_bounds() {
                    eprintln!("warning: {e}; consider --exact or a smaller --rel-tol");
                }
            }
            let report = NearReport {
                coefficient: c,
                exact,
                sets: &sets,
            };
            emit(format, &report, || sets_text(&sets))
        }
        Command::RobPlus {
            c,
            x,
            xp,
            tie,
            format,
        } => {
            let s = rob_plus(c, &load(&x)?, &load(&xp)?, &tie.policy()?)?;
            let report = ScoreReport {
                coefficient: c,
                score: s,
                changed_per_column: None,
            };
            emit(format, &report, || format!("rob+: {}\n", score(&s)))
        }
        Command::RobMinus { c, x, tie, format } => {
            let x = load(&x)?;
            let tie = tie.policy()?;
            let s = rob_minus(c, &x, &tie)?;
            let changed = columns_changed(c, &x, &tie)?;
            let text = || {
                let cols: Vec<String> = changed.iter().map(usize::to_string).collect();
                format!("rob-: {}\nchanged per column: {}\n", score(&s), cols.join(","))
            };
            let report = ScoreReport {
                coefficient: c,
                score: s,
                changed_per_column: Some(changed.clone()),
            };
            emit(format, &report, text)
        }
        Command::Concord { pair, x, tie, format } => {
            let s = concordance(pair.m, pair.n, &load(&x)?, &tie.policy()?);
            let report = PairScoreReport {
                m: pair.m,
                n: pair.n,
                score: s,
            };
            emit(format, &report, || format!("cord: {}\n", score(&s)))
        }
        Command::Corr { pair, x, conv, format } => {
            let r = correlation(pair.m, pair.n, &load(&x)?, conv)?;
            let text = || {
                let rho = r.rho.map_or_else(|| "undefined".to_string(), sig);
                format!(
                    "rho: {rho}\ncov: {}\nvar_m: {}\nvar_n: {}\nconvention: {}\n",
                    sig(r.covariance),
                    sig(r.var_m),
                    sig(r.var_n),
                    r.convention.label()
                )
            };
            let report = CorrReport {
                m: pair.m,
                n: pair.n,
                result: r,
            };
            emit(format, &report, text)
        }
        Command::Adversarial { c, x, tie, format } => {
            let r = adversarial_augment(c, &load(&x)?, &tie.policy()?)?;
            let text = || {
                let col: Vec<String> = r.appended_column.iter().map(|&v| sig(v)).collect();
                format!(
                    "t: {}\nappended column: {}\nnear total: {} -> {}\nrob+: {}\n",
                    sig(r.t),
                    col.join(","),
                    r.original_near_total,
                    r.achieved_near_total,
                    score(&r.rob_plus)
                )
            };
            emit(format, &r, text)
        }
        Command::ExploreNear {
            rows,
            c,
            cols,
            levels,
            samples,
            seed,
            format,
        } => {
            let budget = SearchBudget {
                cols,
                levels,
                random_samples: samples,
                ..SearchBudget::default()
            };
            let r = achievable_near_totals(rows, c, &budget, seed)?;
            let text = || {
                let seen: Vec<String> = r.observed.iter().map(usize::to_string).collect();
                format!(
                    "observed totals: {}\nmatrices examined: {}\ngrid exhaustive: {}\n",
                    seen.join(","),
                    r.matrices_examined,
                    r.exhaustive_grid
                )
            };
            emit(format, &r, text)
        }
        Command::McNn {
            n,
            l,
            samples,
            seed,
            format,
        } => {
            let estimate = asymptotics::uniform_interval_expected_nn(n, l, samples, seed)?;
            let conjecture = asymptotics::conjectured_expected_nn(n, l)?;
            let report = McReport {
                n,
                l,
                estimate,
                conjecture,
            };
            let text = || {
                format!(
                    "mean: {}\nstandard error: {}\nsamples: {}\nconjecture L/(n+1): {}\n",
                    sig(estimate.mean),
                    sig(estimate.standard_error),
                    estimate.samples,
                    sig(conjecture)
                )
            };
            emit(format, &report, text)
        }
        Command::DeltaCf { digits, max_q, format } => {
            let delta = asymptotics::delta_constant(digits)?;
            let report = asymptotics::continued_fraction_convergents(&delta, max_q)?;
            let text = || {
                let mut out = format!("delta: {delta}\n");
                for c in &report.convergents {
                    let flag = if c.truncated { " (truncated)" } else { "" };
                    let _ = writeln!(out, "{}/{}{flag}", c.p, c.q);
                }
                let _ = writeln!(out, "stop: {:?}", report.stop);
                if let Some(q) = report.next_q {
                    let _ = writeln!(out, "next denominator: {q}");
                }
                out
            };
            let text = text();
            let report = DeltaReport {
                delta: delta.to_string(),
                digits,
                max_q,
                report,
            };
            emit(format, &report, || text)
        }
        Command::Verify { format } => {
            let checks = verify::run_all();
            return Ok(Report {
                text: emit(format, &checks, || verify::text(&checks)),
                ok: checks.iter().all(|c| c.passed),
            });
        }
    };
    Ok(Report { text, ok: true })
}
