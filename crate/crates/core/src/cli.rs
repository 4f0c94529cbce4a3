//! Command-line front end: argument grammar, config file, JSON reports and
//! the batch runner.
//!
//! Exit codes: 0 success or verified, 1 a valid negative answer, 2 usage or
//! I/O error, 3 a result contradicting a proved statement, 4 unknown or
//! timed out.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::beatty::{
    balanced_check, densities, fraenkel_diagnostics, partition_check, BalanceVerdict, BalancedWord,
    BeattyPair, PartitionVerdict,
};
use crate::colouring::{Colour, Colouring};
use crate::detector::{count_copies, detect_bruteforce, detect_dp, Restriction};
use crate::doubling::{orbit_from_uniform, prefix_permutation};
use crate::majority::{majority_colouring, majority_verify, MajorityParams, MajorityVerdict};
use crate::rational::{parse_rational_list, Rational};
use crate::robust::{
    is_strongly_suitable, is_suitable, listed_nearly_ramsey, nearly_ramsey_finite_check,
    parity_condition, strongly_suitable_search, ForcingVerdict, SuitableSearch, TripleAnalysis,
};
use crate::satgen::{
    cnf_generate, dimacs_write, resolve_solver, solve_power, SolverStatus, SOLVER_ENV,
};
use crate::tuple::{discretize, discretize_on, power_instance, DiscreteInstance, DistanceTuple};
use crate::uniform::{nonpower_witness, residue_check, residue_sweep};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_REFUTED: i32 = 3;
pub const EXIT_UNKNOWN: i32 = 4;

const DEFAULT_TIMEOUT_SECS: u64 = 60;

#[derive(Parser, Debug)]
#[command(
    name = "circle-ramsey",
    version,
    about = "Checks monochromatic distance tuples on the two-coloured circle"
)]
pub struct Cli {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Number of worker threads (default: one per core).
    #[arg(long, global = true, value_name = "N")]
    parallel: Option<usize>,
    /// Seed for randomised sweeps (default 0).
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,
    /// TOML file supplying defaults for json, parallel, seed, solver, timeout.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Look for a monochromatic copy in a colouring file.
    Check(CheckArgs),
    /// Residue check of c_t against the (k,2)-power for every t <= max-t.
    UniformCheck {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        max_t: u64,
    },
    /// Smallest t whose uniform colouring avoids the tuple.
    WitnessSearch {
        #[arg(long)]
        gaps: String,
        #[arg(long)]
        max_t: u64,
    },
    /// Partition check for Beatty sequences on [0, limit).
    BeattyCheck(BeattyArgs),
    /// Balance check for one period of a periodic word.
    BalancedCheck {
        #[arg(long)]
        period: String,
    },
    /// Prefix-sum permutation for a doubling orbit.
    Doubling(DoublingArgs),
    /// Whether c_t avoids the triple, and the parity condition.
    Suitable {
        #[arg(long)]
        gaps: String,
        #[arg(long)]
        t: u64,
    },
    /// Smallest strongly-suitable t in T.
    SuitableSearch {
        #[arg(long)]
        gaps: String,
        #[arg(long)]
        max_t: u64,
    },
    /// Exhaustive check of all colourings of Z_n with vertex 0 black.
    NearlyRamsey {
        #[arg(long)]
        gaps: String,
        #[arg(long)]
        n: u64,
    },
    /// Red-copy search in the ten-interval majority colouring.
    Majority {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        eps: String,
        /// Write the discretised colouring to this file.
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
    },
    /// Write the CNF formula for k in DIMACS format.
    Cnf {
        #[arg(long)]
        k: u32,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Solve the CNF formula for k with an external solver.
    Solve {
        #[arg(long)]
        k: u32,
        /// Solver command; the DIMACS path is appended as the last argument.
        #[arg(long)]
        solver: Option<String>,
        /// Timeout in seconds.
        #[arg(long)]
        timeout: Option<u64>,
    },
    /// Copy-count parity on random colourings of the (2^k - 1)-gon.
    ParitySweep {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// DP against brute force on random colourings with power gaps.
    OracleSweep {
        /// Colourings per instance.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Run a sweep file of invocations with expected exit codes.
    Batch {
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        /// Also write the JSON report here.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Colouring file.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Fractions summing to 1, or integer gaps summing to n.
    #[arg(long)]
    gaps: String,
    /// Use the subset-sum dynamic program.
    #[arg(long, conflicts_with = "brute")]
    dp: bool,
    /// Use brute force (the default).
    #[arg(long)]
    brute: bool,
    /// File of allowed cyclic gap orders, one comma-separated order per line.
    #[arg(long, value_name = "FILE", conflicts_with = "dp")]
    restrict: Option<PathBuf>,
    /// Also count red and blue copies.
    #[arg(long)]
    count: bool,
}

#[derive(Args, Debug)]
struct BeattyArgs {
    #[arg(long, allow_hyphen_values = true)]
    alphas: String,
    /// Shifts; all zero when neither this nor --half is given.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "half")]
    betas: Option<String>,
    /// Use beta_i = alpha_i / 2.
    #[arg(long)]
    half: bool,
    #[arg(long)]
    limit: u64,
}

#[derive(Args, Debug)]
struct DoublingArgs {
    #[arg(long, requires = "t", conflicts_with = "xs")]
    k: Option<u32>,
    #[arg(long, requires = "k")]
    t: Option<u64>,
    /// Comma-separated rationals summing to 0.
    #[arg(long, allow_hyphen_values = true)]
    xs: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    json: Option<bool>,
    parallel: Option<usize>,
    seed: Option<u64>,
    solver: Option<String>,
    timeout: Option<u64>,
}

/// Effective global settings after merging flags over the config file.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub json: bool,
    pub parallel: Option<usize>,
    pub seed: u64,
    pub solver: Option<String>,
    pub timeout: Option<u64>,
}

impl RunConfig {
    fn merge(cli: &Cli, base: &RunConfig) -> Result<RunConfig> {
        let mut cfg = base.clone();
        if let Some(path) = &cli.config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let file: ConfigFile = toml::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?;
            cfg.json = file.json.unwrap_or(cfg.json);
            cfg.parallel = file.parallel.or(cfg.parallel);
            cfg.seed = file.seed.unwrap_or(cfg.seed);
            cfg.solver = file.solver.or(cfg.solver);
            cfg.timeout = file.timeout.or(cfg.timeout);
        }
        cfg.json |= cli.json;
        cfg.parallel = cli.parallel.or(cfg.parallel);
        cfg.seed = cli.seed.unwrap_or(cfg.seed);
        if cfg.parallel == Some(0) {
            bail!("--parallel must be at least 1");
        }
        Ok(cfg)
    }
}

struct Outcome {
    code: i32,
    json: Value,
    human: String,
}

fn outcome(code: i32, command: &str, mut fields: Value, human: String) -> Outcome {
    let map = fields.as_object_mut().expect("report fields are an object");
    map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    map.insert("command".into(), json!(command));
    map.insert("exit_code".into(), json!(code));
    Outcome {
        code,
        json: fields,
        human,
    }
}

fn error_json(command: &str, err: &anyhow::Error) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "exit_code": EXIT_ERROR,
        "error": format!("{err:#}"),
    })
}

/// Parses `args` (including the program name), runs the command and writes
/// its report. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_ERROR
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let cfg = match RunConfig::merge(&cli, &RunConfig::default()) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            return EXIT_ERROR;
        }
    };
    let name = command_name(&cli.command);
    let result = with_pool(cfg.parallel, || execute(&cli.command, &cfg));
    match result {
        Ok(o) => {
            if cfg.json {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&o.json).unwrap());
            } else {
                let _ = write!(out, "{}", o.human);
            }
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if cfg.json {
                let _ = writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&error_json(name, &e)).unwrap()
                );
            }
            EXIT_ERROR
        }
    }
}

fn with_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building the worker pool")?
            .install(f),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Check(_) => "check",
        Command::UniformCheck { .. } => "uniform-check",
        Command::WitnessSearch { .. } => "witness-search",
        Command::BeattyCheck(_) => "beatty-check",
        Command::BalancedCheck { .. } => "balanced-check",
        Command::Doubling(_) => "doubling",
        Command::Suitable { .. } => "suitable",
        Command::SuitableSearch { .. } => "suitable-search",
        Command::NearlyRamsey { .. } => "nearly-ramsey",
        Command::Majority { .. } => "majority",
        Command::Cnf { .. } => "cnf",
        Command::Solve { .. } => "solve",
        Command::ParitySweep { .. } => "parity-sweep",
        Command::OracleSweep { .. } => "oracle-sweep",
        Command::Batch { .. } => "batch",
    }
}

fn execute(command: &Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::Check(a) => cmd_check(a),
        Command::UniformCheck { k, max_t } => cmd_uniform_check(*k, *max_t),
        Command::WitnessSearch { gaps, max_t } => cmd_witness_search(gaps, *max_t),
        Command::BeattyCheck(a) => cmd_beatty(a),
        Command::BalancedCheck { period } => cmd_balanced(period),
        Command::Doubling(a) => cmd_doubling(a),
        Command::Suitable { gaps, t } => cmd_suitable(gaps, *t),
        Command::SuitableSearch { gaps, max_t } => cmd_suitable_search(gaps, *max_t),
        Command::NearlyRamsey { gaps, n } => cmd_nearly_ramsey(gaps, *n),
        Command::Majority { k, eps, emit } => cmd_majority(*k, eps, emit.as_deref()),
        Command::Cnf { k, out } => cmd_cnf(*k, out),
        Command::Solve { k, solver, timeout } => cmd_solve(*k, solver.as_deref(), *timeout, cfg),
        Command::ParitySweep { k, samples } => cmd_parity(*k, *samples, cfg.seed),
        Command::OracleSweep { samples } => cmd_oracle(*samples, cfg.seed),
        Command::Batch { spec, out } => cmd_batch(spec, out.as_deref(), cfg),
    }
}

fn parse_tuple(gaps: &str) -> Result<DistanceTuple> {
    gaps.parse::<DistanceTuple>()
        .with_context(|| format!("invalid distance tuple `{gaps}`"))
}

fn fmt_list<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

/// Integer gaps are taken as they are; fractions are scaled to `n`.
fn instance_for(gaps: &str, n: usize) -> Result<DiscreteInstance> {
    let values = parse_rational_list(gaps).with_context(|| format!("invalid gaps `{gaps}`"))?;
    if values.iter().all(Rational::is_integer) {
        let ints = values
            .iter()
            .map(|v| u64::try_from(v.numer()).map_err(|_| anyhow!("gap {v} is not positive")))
            .collect::<Result<Vec<_>>>()?;
        Ok(DiscreteInstance::from_gaps(ints)?)
    } else {
        let d = DistanceTuple::new(values)?;
        Ok(discretize_on(&d, n as u64)?)
    }
}

fn read_restriction(path: &Path, inst: &DiscreteInstance) -> Result<Restriction> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading restriction file {}", path.display()))?;
    let mut orders = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let order = line
            .split(',')
            .map(|t| t.trim().parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("{}:{}: invalid gap order `{line}`", path.display(), i + 1))?;
        orders.push(order);
    }
    Ok(Restriction::new(orders, inst)?)
}

fn cmd_check(a: &CheckArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&a.input)
        .with_context(|| format!("reading colouring {}", a.input.display()))?;
    let c = Colouring::parse(&text).with_context(|| format!("parsing {}", a.input.display()))?;
    let inst = instance_for(&a.gaps, c.n())?;
    let restriction = a
        .restrict
        .as_deref()
        .map(|p| read_restriction(p, &inst))
        .transpose()?;
    let method = if a.dp { "dp" } else { "brute" };
    let witness = if a.dp {
        detect_dp(&c, &inst)?
    } else {
        detect_bruteforce(&c, &inst, restriction.as_ref())?
    };
    let counts = if a.count {
        Some(count_copies(&c, &inst)?)
    } else {
        None
    };
    let mut human = match &witness {
        Some(w) => format!(
            "{} copy at vertices [{}] with gap order [{}]\n",
            serde_json::to_value(w.colour)?.as_str().unwrap_or_default(),
            fmt_list(&w.vertices),
            fmt_list(&w.gap_order)
        ),
        None => "no monochromatic copy\n".to_string(),
    };
    if let Some(cc) = counts {
        human.push_str(&format!("copies: {} red, {} blue\n", cc.red, cc.blue));
    }
    let code = if witness.is_some() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    };
    Ok(outcome(
        code,
        "check",
        json!({
            "n": inst.n(),
            "gaps": inst.gaps(),
            "method": method,
            "restricted": restriction.is_some(),
            "found": witness.is_some(),
            "witness": witness,
            "counts": counts,
        }),
        human,
    ))
}

fn cmd_uniform_check(k: u32, max_t: u64) -> Result<Outcome> {
    let failures = residue_sweep(k, max_t)?;
    let human = if failures.is_empty() {
        format!("k = {k}: every c_t with t <= {max_t} has a red copy\n")
    } else {
        format!(
            "k = {k}: NO red copy for t in [{}]; this contradicts the residue verification\n",
            fmt_list(&failures)
        )
    };
    let code = if failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_REFUTED
    };
    Ok(outcome(
        code,
        "uniform-check",
        json!({ "k": k, "max_t": max_t, "all_pass": failures.is_empty(), "failures": failures }),
        human,
    ))
}

fn cmd_witness_search(gaps: &str, max_t: u64) -> Result<Outcome> {
    let d = parse_tuple(gaps)?;
    let t = nonpower_witness(&d, max_t)?;
    let power = d.is_power();
    let (code, human) = match (t, power) {
        (Some(t), true) => (
            EXIT_REFUTED,
            format!(
                "t = {t}: c_t avoids the power tuple; this contradicts the residue verification\n"
            ),
        ),
        (Some(t), false) => (EXIT_OK, format!("{t}\n")),
        (None, _) => (EXIT_NEGATIVE, "none\n".to_string()),
    };
    Ok(outcome(
        code,
        "witness-search",
        json!({ "tuple": d.distances(), "max_t": max_t, "power": power, "t": t }),
        human,
    ))
}

fn cmd_beatty(a: &BeattyArgs) -> Result<Outcome> {
    let alphas =
        parse_rational_list(&a.alphas).with_context(|| format!("invalid alphas `{}`", a.alphas))?;
    let pair = if a.half {
        BeattyPair::with_half_shift(alphas)?
    } else {
        let betas = match &a.betas {
            Some(b) => parse_rational_list(b).with_context(|| format!("invalid betas `{b}`"))?,
            None => vec![Rational::ZERO; alphas.len()],
        };
        BeattyPair::new(alphas, betas)?
    };
    let verdict = partition_check(&pair, a.limit)?;
    let diagnostics = if verdict == PartitionVerdict::Ok
        && pair.is_half_shift()
        && pair.period().is_ok_and(|p| p <= a.limit)
    {
        Some(fraenkel_diagnostics(&pair, a.limit)?)
    } else {
        None
    };
    let mut human = format!("partition of [0, {}): {verdict}\n", a.limit);
    if let Some(d) = &diagnostics {
        human.push_str(&format!(
            "period {} ({}), word {}, symmetric: {}, densities ({}), power: {}\n",
            d.period,
            if d.exact { "exact" } else { "prefix only" },
            d.word,
            d.symmetric,
            fmt_list(&d.densities),
            d.power
        ));
    }
    let code = if verdict == PartitionVerdict::Ok {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    };
    Ok(outcome(
        code,
        "beatty-check",
        json!({
            "alphas": pair.alphas(),
            "betas": pair.betas(),
            "limit": a.limit,
            "verdict": verdict,
            "diagnostics": diagnostics,
        }),
        human,
    ))
}

fn cmd_balanced(period: &str) -> Result<Outcome> {
    let w: BalancedWord = period.parse()?;
    let verdict = balanced_check(&w);
    let dens = densities(&w);
    let human = match verdict {
        BalanceVerdict::Balanced => format!("balanced, densities ({})\n", fmt_list(&dens)),
        BalanceVerdict::Violation {
            letter,
            length,
            max_position,
            min_position,
        } => format!(
            "unbalanced: letter {letter}, windows of length {length} at {max_position} and {min_position}\n"
        ),
    };
    let code = if verdict == BalanceVerdict::Balanced {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    };
    Ok(outcome(
        code,
        "balanced-check",
        json!({ "period": w.letters(), "verdict": verdict, "densities": dens }),
        human,
    ))
}

fn cmd_doubling(a: &DoublingArgs) -> Result<Outcome> {
    let one_based = |p: &Option<Vec<usize>>| {
        p.as_ref()
            .map(|p| p.iter().map(|i| i + 1).collect::<Vec<_>>())
    };
    match (a.k, a.t, &a.xs) {
        (Some(k), Some(t), None) => {
            let orbit = orbit_from_uniform(k, t)?;
            let perm = prefix_permutation(orbit.xs())?;
            let residue = residue_check(k, t)?.is_some();
            let pi = one_based(&perm);
            let consistent = perm.is_some() == residue;
            let human = match &pi {
                Some(p) => format!(
                    "orbit ({}), permutation ({})\n",
                    fmt_list(orbit.xs()),
                    fmt_list(p)
                ),
                None => format!(
                    "orbit ({}), none; this contradicts the residue verification\n",
                    fmt_list(orbit.xs())
                ),
            };
            let code = if pi.is_some() && consistent {
                EXIT_OK
            } else {
                EXIT_REFUTED
            };
            Ok(outcome(
                code,
                "doubling",
                json!({ "k": k, "t": t, "xs": orbit.xs(), "permutation": pi, "residue_chain": residue }),
                human,
            ))
        }
        (None, None, Some(xs)) => {
            let values = parse_rational_list(xs).with_context(|| format!("invalid list `{xs}`"))?;
            let pi = one_based(&prefix_permutation(&values)?);
            let human = match &pi {
                Some(p) => format!("({})\n", fmt_list(p)),
                None => "none\n".to_string(),
            };
            let code = if pi.is_some() { EXIT_OK } else { EXIT_NEGATIVE };
            Ok(outcome(
                code,
                "doubling",
                json!({ "xs": values, "permutation": pi }),
                human,
            ))
        }
        _ => bail!("doubling needs either --k and --t, or --xs"),
    }
}

fn cmd_suitable(gaps: &str, t: u64) -> Result<Outcome> {
    let d = parse_tuple(gaps)?;
    let suitable = is_suitable(&d, t)?;
    let strong = if d.k() == 3 {
        Some(is_strongly_suitable(&d, t)?)
    } else {
        None
    };
    let parity = if d.k() == 3 {
        Some(parity_condition(&d, t)?)
    } else {
        None
    };
    let mut human = format!("t = {t}: suitable {suitable}");
    if let Some(s) = strong {
        human.push_str(&format!(", strongly suitable {s}"));
    }
    human.push('\n');
    let code = if suitable { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(outcome(
        code,
        "suitable",
        json!({
            "tuple": d.distances(),
            "t": t,
            "suitable": suitable,
            "parity_condition": parity,
            "strongly_suitable": strong,
        }),
        human,
    ))
}

fn cmd_suitable_search(gaps: &str, max_t: u64) -> Result<Outcome> {
    let d = parse_tuple(gaps)?;
    let analysis = TripleAnalysis::new(&d)?;
    let result = strongly_suitable_search(&d, max_t)?;
    let listed = listed_nearly_ramsey(&d);
    let (code, human) = match &result {
        SuitableSearch::Found { t } if listed => (
            EXIT_REFUTED,
            format!("t = {t} is strongly suitable for a triple proved nearly-Ramsey; this is a contradiction\n"),
        ),
        SuitableSearch::Found { t } => (EXIT_OK, format!("{t}\n")),
        SuitableSearch::None { .. } => (EXIT_NEGATIVE, "none\n".to_string()),
        SuitableSearch::EmptyT { .. } => (
            EXIT_NEGATIVE,
            format!("T empty (d_1 = {})\n", d.distances()[0]),
        ),
    };
    Ok(outcome(
        code,
        "suitable-search",
        json!({
            "tuple": d.distances(),
            "denominators": analysis.denominators,
            "max_t": max_t,
            "listed_nearly_ramsey": listed,
            "result": result,
        }),
        human,
    ))
}

fn cmd_nearly_ramsey(gaps: &str, n: u64) -> Result<Outcome> {
    let d = parse_tuple(gaps)?;
    let verdict = nearly_ramsey_finite_check(&d, n)?;
    let (code, human) = match &verdict {
        ForcingVerdict::Verified { colourings } => {
            (EXIT_OK, format!("verified over {colourings} colourings\n"))
        }
        ForcingVerdict::Counterexample { colouring } => (
            EXIT_NEGATIVE,
            format!("counterexample:\n{}", colouring.serialize()),
        ),
    };
    Ok(outcome(
        code,
        "nearly-ramsey",
        json!({ "tuple": d.distances(), "n": n, "verdict": verdict }),
        human,
    ))
}

fn cmd_majority(k: u32, eps: &str, emit: Option<&Path>) -> Result<Outcome> {
    let eps: Rational = eps
        .parse()
        .with_context(|| format!("invalid eps `{eps}`"))?;
    let params = MajorityParams::new(k, eps)?;
    let verdict = majority_verify(&params)?;
    let grid = match &verdict {
        MajorityVerdict::NoRedCopy { grid } | MajorityVerdict::Witness { grid, .. } => *grid,
    };
    let c = majority_colouring(&params, grid)?;
    if let Some(path) = emit {
        std::fs::write(path, c.serialize())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let gap = Rational::new(1, 8)?.checked_sub(&eps.checked_mul_int(10)?)?;
    let surplus = c.count(Colour::Red) as i64 - c.count(Colour::Blue) as i64;
    let (code, human) = match &verdict {
        MajorityVerdict::NoRedCopy { .. } => (
            EXIT_OK,
            format!("grid {grid}: no red copy; red exceeds blue by {surplus} vertices ({gap})\n"),
        ),
        MajorityVerdict::Witness { witness, .. } => (
            EXIT_REFUTED,
            format!(
                "grid {grid}: red copy at [{}]; this contradicts the construction\n",
                fmt_list(&witness.vertices)
            ),
        ),
    };
    Ok(outcome(
        code,
        "majority",
        json!({
            "k": k,
            "eps": eps,
            "grid": grid,
            "density_gap": gap,
            "red_minus_blue": surplus,
            "verdict": verdict,
        }),
        human,
    ))
}

fn cmd_cnf(k: u32, out: &Path) -> Result<Outcome> {
    let f = cnf_generate(k)?;
    std::fs::write(out, dimacs_write(&f)).with_context(|| format!("writing {}", out.display()))?;
    Ok(outcome(
        EXIT_OK,
        "cnf",
        json!({ "k": k, "num_vars": f.num_vars(), "clauses": f.clauses().len() }),
        format!(
            "wrote {} variables and {} clauses to {}\n",
            f.num_vars(),
            f.clauses().len(),
            out.display()
        ),
    ))
}

fn cmd_solve(
    k: u32,
    solver: Option<&str>,
    timeout: Option<u64>,
    cfg: &RunConfig,
) -> Result<Outcome> {
    let command = resolve_solver(solver.or(cfg.solver.as_deref())).ok_or_else(|| {
        anyhow!("no SAT solver: pass --solver, set {SOLVER_ENV}, or put varisat on PATH")
    })?;
    let secs = timeout.or(cfg.timeout).unwrap_or(DEFAULT_TIMEOUT_SECS);
    let result = solve_power(k, &command, Duration::from_secs(secs))?;
    let (code, human) = match result.status {
        SolverStatus::Unsat => (
            EXIT_OK,
            format!("k = {k}: UNSAT, every colouring has a monochromatic copy\n"),
        ),
        SolverStatus::Sat => (
            EXIT_REFUTED,
            format!(
                "k = {k}: SAT, colouring without a monochromatic copy:\n{}",
                result
                    .model
                    .as_ref()
                    .map(Colouring::serialize)
                    .unwrap_or_default()
            ),
        ),
        SolverStatus::Unknown => (
            EXIT_UNKNOWN,
            format!("k = {k}: unknown (timeout {secs}s)\n"),
        ),
    };
    Ok(outcome(
        code,
        "solve",
        json!({
            "k": k,
            "status": result.status,
            "model": result.model.as_ref().map(Colouring::letters),
        }),
        human,
    ))
}

fn random_masks(n: usize, samples: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    (0..samples).map(|_| rng.gen::<u64>() & full).collect()
}

fn cmd_parity(k: u32, samples: usize, seed: u64) -> Result<Outcome> {
    if !(3..=6).contains(&k) {
        bail!("parity-sweep supports k in 3..=6");
    }
    let inst = power_instance(k)?;
    let n = inst.n() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let masks = random_masks(n, samples, &mut rng);
    let counts = masks
        .par_iter()
        .map(|&m| count_copies(&Colouring::from_mask(n, m), &inst))
        .collect::<Result<Vec<_>, _>>()?;
    let odd: Vec<String> = masks
        .iter()
        .zip(&counts)
        .filter(|(_, c)| c.total() % 2 == 1)
        .map(|(&m, _)| Colouring::from_mask(n, m).letters())
        .collect();
    let all_red = count_copies(&Colouring::monochromatic(n, Colour::Red), &inst)?;
    let code = if odd.is_empty() {
        EXIT_OK
    } else {
        EXIT_REFUTED
    };
    let human = if odd.is_empty() {
        format!(
            "k = {k}: {samples} colourings, every copy count even; all-red has {} copies\n",
            all_red.red
        )
    } else {
        format!(
            "k = {k}: odd copy count in {} colourings; this contradicts the parity result\n",
            odd.len()
        )
    };
    Ok(outcome(
        code,
        "parity-sweep",
        json!({
            "k": k,
            "samples": samples,
            "seed": seed,
            "all_red": all_red,
            "odd": odd,
            "total_copies": counts.iter().map(|c| c.total()).sum::<u64>(),
        }),
        human,
    ))
}

/// `(n, k)` pairs: the power gaps on their own grid, and `k = 3` doubled.
pub const ORACLE_INSTANCES: [(u64, u32); 5] = [(7, 3), (14, 3), (15, 4), (31, 5), (63, 6)];

fn cmd_oracle(samples: usize, seed: u64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut mismatches = 0usize;
    for &(n, k) in &ORACLE_INSTANCES {
        let inst = discretize(&crate::tuple::power_tuple(k)?, n / ((1 << k) - 1))?;
        let colourings: Vec<Colouring> = (0..samples)
            .map(|_| {
                let density: f64 = rng.gen_range(0.05..0.95);
                let black = rng.gen_bool(0.25).then(|| rng.gen_range(0..n as usize));
                let red = (0..n).map(|_| rng.gen_bool(density)).collect();
                Colouring::new(red, black).expect("black index in range")
            })
            .collect();
        let results = colourings
            .par_iter()
            .map(|c| {
                let brute = detect_bruteforce(c, &inst, None)?;
                let dp = detect_dp(c, &inst)?;
                let valid = brute.as_ref().is_none_or(|w| w.validate(c, &inst))
                    && dp.as_ref().is_none_or(|w| w.validate(c, &inst));
                Ok((brute.is_some(), brute == dp && valid))
            })
            .collect::<Result<Vec<_>, crate::detector::DetectorError>>()?;
        let found = results.iter().filter(|r| r.0).count();
        let bad = results.iter().filter(|r| !r.1).count();
        mismatches += bad;
        rows.push(json!({ "n": n, "k": k, "samples": samples, "found": found, "mismatches": bad }));
    }
    let code = if mismatches == 0 {
        EXIT_OK
    } else {
        EXIT_REFUTED
    };
    let human = format!(
        "{} colourings, {mismatches} mismatches between DP and brute force\n",
        samples * ORACLE_INSTANCES.len()
    );
    Ok(outcome(
        code,
        "oracle-sweep",
        json!({ "seed": seed, "instances": rows, "mismatches": mismatches }),
        human,
    ))
}

struct SpecLine {
    line: usize,
    expected: i32,
    args: Vec<String>,
}

fn parse_spec(path: &Path) -> Result<Vec<SpecLine>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading sweep spec {}", path.display()))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = line.split_whitespace();
        let first = words.next().unwrap();
        let expected: i32 = first.parse().map_err(|_| {
            anyhow!(
                "{}:{}: expected an exit code, found `{first}`",
                path.display(),
                i + 1
            )
        })?;
        let args: Vec<String> = words.map(str::to_string).collect();
        if args.is_empty() {
            bail!("{}:{}: missing command", path.display(), i + 1);
        }
        if args[0] == "batch" {
            bail!(
                "{}:{}: nested batch runs are not allowed",
                path.display(),
                i + 1
            );
        }
        out.push(SpecLine {
            line: i + 1,
            expected,
            args,
        });
    }
    Ok(out)
}

fn run_item(item: &SpecLine, base: &RunConfig) -> (i32, Value) {
    let argv = std::iter::once("circle-ramsey".to_string()).chain(item.args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return (
                EXIT_ERROR,
                json!({ "schema_version": SCHEMA_VERSION, "exit_code": EXIT_ERROR, "error": e.to_string().trim_end() }),
            )
        }
    };
    let name = command_name(&cli.command);
    let result = RunConfig::merge(&cli, base).and_then(|cfg| execute(&cli.command, &cfg));
    match result {
        Ok(o) => (o.code, o.json),
        Err(e) => (EXIT_ERROR, error_json(name, &e)),
    }
}

fn cmd_batch(spec: &Path, out: Option<&Path>, cfg: &RunConfig) -> Result<Outcome> {
    let items = parse_spec(spec)?;
    let mut base = cfg.clone();
    base.json = true;
    let mut records = Vec::with_capacity(items.len());
    let (mut passed, mut failed, mut errors) = (0usize, 0usize, 0usize);
    let mut human = String::new();
    for item in &items {
        let (code, output) = run_item(item, &base);
        let pass = code == item.expected;
        if pass {
            passed += 1;
        } else if code == EXIT_ERROR {
            errors += 1;
        } else {
            failed += 1;
        }
        human.push_str(&format!(
            "{} line {}: {} (exit {code}, expected {})\n",
            if pass { "PASS" } else { "FAIL" },
            item.line,
            item.args.join(" "),
            item.expected
        ));
        records.push(json!({
            "line": item.line,
            "args": item.args,
            "expected": item.expected,
            "exit_code": code,
            "pass": pass,
            "output": output,
        }));
    }
    let code = if errors > 0 {
        EXIT_ERROR
    } else if failed > 0 {
        EXIT_NEGATIVE
    } else {
        EXIT_OK
    };
    human.push_str(&format!(
        "{passed} passed, {failed} failed, {errors} errors\n"
    ));
    let report = outcome(
        code,
        "batch",
        json!({
            "items": records,
            "passed": passed,
            "failed": failed,
            "errors": errors,
        }),
        human,
    );
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&report.json)? + "\n";
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report)
}
