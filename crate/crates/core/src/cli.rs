//! Command-line front end: `noiseless`, `bound`, `sweep` and `validate`.
//!
//! Exit codes: 0 success, 1 validation failure, 2 solver failure, 64 usage
//! error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::achievable::{optimize_input, run_seed, SimChannel};
use crate::awgn::{constrained_awgn_bound, unconstrained_awgn_bound, AwgnOptions};
use crate::channel::{ChannelKind, DiscreteChannel, GaussianChannel};
use crate::constraint::{noiseless_capacity, ConstraintSpec, RunLimit, StateDiagram};
use crate::error::{Error, Result};
use crate::family::family_for;
use crate::solvers::{self, generic_kkt_bound, BoundResult, GenericOptions};
use crate::validate::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

pub const SCHEMA: &str = "# schema=1";

#[derive(Debug, Parser)]
#[command(name = "dualcap", version, about = "Capacity bounds for runlength-constrained binary-input channels")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed for simulations.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Flat key=value file mirroring the long flags; flags on the command
    /// line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report measured wall-clock time (otherwise the column is 0 so output
    /// is byte-stable).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct Problem {
    /// Channel for `generic` and `achievable`; inferred from the other
    /// selectors when omitted.
    #[arg(long)]
    pub channel: Option<ChannelKind>,
    /// Minimum zero-run length (also the d of `thm4`).
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Maximum zero-run length or `inf`.
    #[arg(long, default_value = "inf")]
    pub k: RunLimit,
    /// Memory of the generic test distribution (defaults to the minimum).
    #[arg(long)]
    pub mu: Option<usize>,
    /// Sequence length per simulation run.
    #[arg(long)]
    pub n: Option<usize>,
    /// Independent simulation runs.
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    /// Multi-start count for the numerical solvers.
    #[arg(long)]
    pub starts: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Noiseless capacity of a (d,k) constraint.
    Noiseless {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: RunLimit,
        #[command(flatten)]
        common: Common,
    },
    /// One bound at one channel parameter (ε, p, or SNR in dB).
    Bound {
        #[arg(long)]
        selector: Selector,
        #[arg(long)]
        param: f64,
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        common: Common,
    },
    /// Bounds over a uniform parameter grid.
    Sweep {
        /// Comma-separated selectors.
        #[arg(long, value_delimiter = ',', required = true)]
        selector: Vec<Selector>,
        #[arg(long)]
        start: f64,
        #[arg(long)]
        stop: f64,
        #[arg(long)]
        points: usize,
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        common: Common,
    },
    /// Run an invariant suite.
    Validate {
        suite: Suite,
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Thm21,
    Thm22,
    Thm31,
    Thm32,
    Thm4,
    Thm5,
    AwgnConstrained,
    AwgnUnconstrained,
    Generic,
    Achievable,
}

impl Selector {
    pub const ALL: [(&'static str, Selector); 10] = [
        ("thm2.1", Selector::Thm21),
        ("thm2.2", Selector::Thm22),
        ("thm3.1", Selector::Thm31),
        ("thm3.2", Selector::Thm32),
        ("thm4", Selector::Thm4),
        ("thm5", Selector::Thm5),
        ("awgn.constrained", Selector::AwgnConstrained),
        ("awgn.unconstrained", Selector::AwgnUnconstrained),
        ("generic", Selector::Generic),
        ("achievable", Selector::Achievable),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(_, s)| *s == self).map(|(n, _)| *n).unwrap_or("?")
    }

    /// The channel this selector is tied to, if any.
    fn channel(self) -> Option<ChannelKind> {
        match self {
            Selector::Thm5 => Some(ChannelKind::Bsc),
            Selector::AwgnConstrained | Selector::AwgnUnconstrained => Some(ChannelKind::Biawgn),
            Selector::Generic | Selector::Achievable => None,
            _ => Some(ChannelKind::Bec),
        }
    }
}

impl FromStr for Selector {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL.iter().find(|(n, _)| *n == s).map(|(_, v)| *v).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|(n, _)| *n).collect();
            format!("unknown selector `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// One output row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub selector: Selector,
    pub param: f64,
    pub bound: f64,
    pub residual: Option<f64>,
    pub solver: String,
    pub wallclock_ms: f64,
    pub stderr: Option<f64>,
}

/// Fixed 9-significant-digit rendering (scientific outside [1e-5, 1e9)).
pub fn fmt9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let exp: i32 = sci.split('e').nth(1).and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..9).contains(&exp) {
        format!("{:.*}", (8 - exp) as usize, x)
    } else {
        sci
    }
}

fn json_num(x: f64) -> Value {
    fmt9(x).parse::<f64>().ok().and_then(|v| serde_json::Number::from_f64(v).map(Value::Number)).unwrap_or(Value::Null)
}

struct Context {
    problem: Problem,
    channel: ChannelKind,
    seed: u64,
    timing: bool,
}

impl Context {
    fn spec(&self) -> Result<ConstraintSpec> {
        ConstraintSpec::new(self.problem.d, self.problem.k)
    }

    fn n(&self, default: usize) -> usize {
        self.problem.n.unwrap_or(default)
    }
}

fn resolve_channel(selectors: &[Selector], explicit: Option<ChannelKind>) -> Result<ChannelKind> {
    let implied: Vec<ChannelKind> = selectors.iter().filter_map(|s| s.channel()).collect();
    let kind = explicit.or_else(|| implied.first().copied()).unwrap_or(ChannelKind::Bec);
    if let Some(bad) = selectors.iter().find(|s| s.channel().is_some_and(|c| c != kind)) {
        return Err(Error::UnsupportedCombination(format!("selector {} does not apply to the {kind} channel", bad.name())));
    }
    Ok(kind)
}

fn check_param(kind: ChannelKind, x: f64) -> Result<()> {
    let ok = match kind {
        ChannelKind::Bec => (0.0..=1.0).contains(&x),
        ChannelKind::Bsc => (0.0..=0.5).contains(&x),
        ChannelKind::Biawgn => x.is_finite(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange { name: "param".into(), value: x })
    }
}

fn sim_channel(kind: ChannelKind, x: f64) -> Result<SimChannel> {
    Ok(match kind {
        ChannelKind::Bec => SimChannel::Discrete(DiscreteChannel::bec(x)?),
        ChannelKind::Bsc => SimChannel::Discrete(DiscreteChannel::bsc(x)?),
        ChannelKind::Biawgn => SimChannel::Gaussian(GaussianChannel::from_snr_db(x)?),
    })
}

fn bound_row(selector: Selector, x: f64, r: BoundResult) -> Row {
    Row {
        selector,
        param: x,
        bound: r.bound,
        residual: Some(r.kkt_residual_max),
        solver: r.solver.to_string(),
        wallclock_ms: 0.0,
        stderr: None,
    }
}

/// Default simulation length for `bound` and `sweep`.
pub const DEFAULT_N: usize = 1_000_000;

fn compute(selector: Selector, x: f64, ctx: &Context, index: usize, warm: &mut Vec<Vec<f64>>) -> Result<Row> {
    let t0 = Instant::now();
    let mut row = match selector {
        Selector::Thm21 => bound_row(selector, x, solvers::thm2_part1(x)?),
        Selector::Thm22 => bound_row(selector, x, solvers::thm2_part2(x)?),
        Selector::Thm31 => bound_row(selector, x, solvers::thm3_part1(x)?),
        Selector::Thm32 => bound_row(selector, x, solvers::thm3_part2(x)?),
        Selector::Thm4 => bound_row(selector, x, solvers::thm4_dinfty(ctx.problem.d, x)?),
        Selector::Thm5 => bound_row(selector, x, solvers::thm5_bsc(x)?),
        Selector::AwgnUnconstrained => {
            bound_row(selector, x, unconstrained_awgn_bound(GaussianChannel::from_snr_db(x)?.sigma())?)
        }
        Selector::AwgnConstrained => {
            let sigma = GaussianChannel::from_snr_db(x)?.sigma();
            let mut opts = AwgnOptions::default();
            if let Some(s) = ctx.problem.starts {
                opts.starts = s;
            }
            let (r, z) = constrained_awgn_bound(sigma, &opts, warm)?;
            *warm = vec![z];
            bound_row(selector, x, r)
        }
        Selector::Generic => {
            let spec = ctx.spec()?;
            let mu = ctx.problem.mu.unwrap_or(spec.min_memory().max(1));
            let channel = match ctx.channel {
                ChannelKind::Bec => DiscreteChannel::bec(x)?,
                ChannelKind::Bsc => DiscreteChannel::bsc(x)?,
                ChannelKind::Biawgn => {
                    return Err(Error::UnsupportedCombination("generic needs a discrete channel".into()))
                }
            };
            let fam = family_for(ctx.channel, &spec, mu)?;
            let g = StateDiagram::build(spec, mu)?;
            let mut opts = GenericOptions::default();
            if let Some(s) = ctx.problem.starts {
                opts.starts = s;
            }
            bound_row(selector, x, generic_kkt_bound(&fam, &channel, &g, &opts)?)
        }
        Selector::Achievable => {
            let ch = sim_channel(ctx.channel, x)?;
            let seed = run_seed(ctx.seed, index);
            let (_, est) = optimize_input(ctx.spec()?, &ch, ctx.n(DEFAULT_N), ctx.problem.runs, seed)?;
            Row {
                selector,
                param: x,
                bound: est.lower(),
                residual: None,
                solver: "simulation".into(),
                wallclock_ms: 0.0,
                stderr: Some(est.stderr),
            }
        }
    };
    if ctx.timing {
        row.wallclock_ms = t0.elapsed().as_secs_f64() * 1e3;
    }
    Ok(row)
}

/// Uniform grid with both endpoints included exactly.
pub fn grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| if i + 1 == points { stop } else { start + (stop - start) * i as f64 / (points - 1) as f64 })
        .collect()
}

/// Rows of a sweep, in grid order and then selector order.
fn sweep_rows(selectors: &[Selector], xs: &[f64], ctx: &Context) -> Result<Vec<Row>> {
    let mut per_selector: Vec<Vec<Row>> = Vec::new();
    for &sel in selectors {
        let rows = if sel == Selector::AwgnConstrained {
            let mut warm = Vec::new();
            xs.iter().enumerate().map(|(i, &x)| compute(sel, x, ctx, i, &mut warm)).collect::<Result<Vec<_>>>()?
        } else {
            xs.par_iter()
                .enumerate()
                .map(|(i, &x)| compute(sel, x, ctx, i, &mut Vec::new()))
                .collect::<Result<Vec<_>>>()?
        };
        per_selector.push(rows);
    }
    let mut out = Vec::with_capacity(xs.len() * selectors.len());
    for i in 0..xs.len() {
        for rows in &per_selector {
            out.push(rows[i].clone());
        }
    }
    Ok(out)
}

/// Render rows. The `selector` column is added when several selectors share
/// one output, and `stderr` when any row is a simulation.
pub fn render(rows: &[Row], format: Format, multi: bool) -> String {
    let with_stderr = rows.iter().any(|r| r.stderr.is_some());
    let mut s = String::new();
    writeln!(s, "{SCHEMA}").unwrap();
    match format {
        Format::Csv => {
            let mut cols = vec!["param", "bound_bits", "kkt_residual", "solver", "wallclock_ms"];
            if multi {
                cols.insert(0, "selector");
            }
            if with_stderr {
                cols.push("stderr");
            }
            writeln!(s, "{}", cols.join(",")).unwrap();
            for r in rows {
                let mut f = vec![
                    fmt9(r.param),
                    fmt9(r.bound),
                    r.residual.map(fmt9).unwrap_or_default(),
                    r.solver.clone(),
                    fmt9(r.wallclock_ms),
                ];
                if multi {
                    f.insert(0, r.selector.name().to_string());
                }
                if with_stderr {
                    f.push(r.stderr.map(fmt9).unwrap_or_default());
                }
                writeln!(s, "{}", f.join(",")).unwrap();
            }
        }
        Format::JsonLines => {
            for r in rows {
                let mut m = Map::new();
                m.insert("selector".into(), json!(r.selector.name()));
                m.insert("param".into(), json_num(r.param));
                m.insert("bound_bits".into(), json_num(r.bound));
                m.insert("kkt_residual".into(), r.residual.map(json_num).unwrap_or(Value::Null));
                m.insert("solver".into(), json!(r.solver));
                m.insert("wallclock_ms".into(), json_num(r.wallclock_ms));
                if let Some(e) = r.stderr {
                    m.insert("stderr".into(), json_num(e));
                }
                writeln!(s, "{}", Value::Object(m)).unwrap();
            }
        }
    }
    s
}

fn emit(text: &str, out: &Option<PathBuf>) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Expand `--config FILE` into flags placed right after the subcommand, so
/// that later command-line flags override them.
pub fn expand_config(args: Vec<String>) -> std::result::Result<Vec<String>, String> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let mut extra = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("{path}:{}: expected key=value", ln + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k == "config" {
            continue;
        }
        match v {
            "true" if k == "timing" => extra.push("--timing".to_string()),
            "false" if k == "timing" => {}
            _ => {
                extra.push(format!("--{k}"));
                extra.push(v.to_string());
            }
        }
    }
    let subs = ["noiseless", "bound", "sweep", "validate"];
    let Some(pos) = args.iter().position(|a| subs.contains(&a.as_str())) else { return Ok(args) };
    let mut out = args[..=pos].to_vec();
    if args[pos] == "validate" {
        // keep the positional suite name first
        if let Some(suite) = args.get(pos + 1).filter(|a| !a.starts_with("--")) {
            out.push(suite.clone());
            out.extend(extra);
            out.extend_from_slice(&args[pos + 2..]);
            return Ok(out);
        }
    }
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

fn solver_failure(e: &Error) -> i32 {
    eprintln!("error: {e}");
    if let Error::NoFeasiblePoint { residual } = e {
        eprintln!("residual: {residual:e}");
    }
    match e {
        Error::ParameterOutOfRange { .. }
        | Error::InvalidConstraint { .. }
        | Error::UnsupportedCombination(_)
        | Error::MemoryTooSmall { .. }
        | Error::MemoryTooLarge(_) => EXIT_USAGE,
        _ => EXIT_SOLVER,
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run(args: Vec<String>) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => solver_failure(&e),
    }
}

fn write_out(text: &str, out: &Option<PathBuf>) -> Result<i32> {
    if let Err(e) = emit(text, out) {
        eprintln!("error: cannot write output: {e}");
        return Ok(EXIT_USAGE);
    }
    Ok(EXIT_OK)
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Noiseless { d, k, common } => {
            let spec = ConstraintSpec::new(d, k)?;
            let c = noiseless_capacity(&spec);
            let text = match common.format {
                Format::Csv => format!("{c:.6}\n"),
                Format::JsonLines => {
                    format!("{SCHEMA}\n{}\n", json!({"d": d, "k": k.to_string(), "capacity": json_num(c)}))
                }
            };
            write_out(&text, &common.out)
        }
        Command::Bound { selector, param, problem, common } => {
            let channel = resolve_channel(&[selector], problem.channel)?;
            check_param(channel, param)?;
            let ctx = Context { problem, channel, seed: common.seed, timing: common.timing };
            let row = compute(selector, param, &ctx, 0, &mut Vec::new())?;
            write_out(&render(&[row], common.format, false), &common.out)
        }
        Command::Sweep { selector, start, stop, points, problem, common } => {
            if points < 2 {
                return Err(Error::ParameterOutOfRange { name: "points".into(), value: points as f64 });
            }
            let channel = resolve_channel(&selector, problem.channel)?;
            check_param(channel, start)?;
            check_param(channel, stop)?;
            let ctx = Context { problem, channel, seed: common.seed, timing: common.timing };
            let rows = sweep_rows(&selector, &grid(start, stop, points), &ctx)?;
            write_out(&render(&rows, common.format, selector.len() > 1), &common.out)
        }
        Command::Validate { suite, problem, common } => {
            let report = run_suite(suite, problem.n.unwrap_or(crate::validate::DEFAULT_N), problem.runs, common.seed);
            let code = write_out(&report.render(common.format), &common.out)?;
            Ok(if code != EXIT_OK {
                code
            } else if report.passed() {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            })
        }
    }
}
