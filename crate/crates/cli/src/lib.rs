//! The `szlenk` command line. [`run`] parses arguments, dispatches to the core crate and returns
//! the text and exit status instead of printing, so tests can drive it in-process.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use szlenk_core::bdspace::{dimension_sequence, BDParams, BDSpace, DEFAULT_LEVEL_CAP, PHI_ORDERING};
use szlenk_core::dualtree::{
    antichain_identity_check, szlenk_bound_c, AntichainReport, TreeNode, TreeValuation, XWindow,
};
use szlenk_core::ordinal::Ordinal;
use szlenk_core::ordmeasure::{check_area_bound, derived_height, szlenk_formula, OrdinalMeasure};
use szlenk_core::par::Mode;
use szlenk_core::rational::{format_rational, parse_rational, Rational};
use szlenk_core::stepfn::{c_area, c_area_oracle, StepFunction};
use szlenk_core::trace::{emit_trace, TraceFormat};
use szlenk_core::verify::verify_all;
use szlenk_core::Error;

/// Environment variable that raises the level cap for `bd`, `tree` and `verify-all`.
pub const LEVEL_CAP_VAR: &str = "SZLENK_MAX_LEVEL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "szlenk",
    version,
    about = "Exact ordinal ε-areas, Bourgain–Delbaen spaces and Szlenk bounds"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,

    /// Bourgain–Delbaen parameters as "a,b,lambda", each an exact rational.
    #[arg(long, global = true, value_name = "A,B,LAMBDA", default_value = "1/2,1/4,2")]
    pub params: String,

    /// Admit a = 1 for matrix exploration; Szlenk bounds still require a < 1.
    #[arg(long, global = true)]
    pub exploratory: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cantor-normal-form arithmetic.
    #[command(subcommand)]
    Ordinal(OrdinalOp),
    /// ε-area of a non-increasing ordinal step function read from JSON.
    Area {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        epsilon: String,
        /// Print the compression chain h_1, h_2, ….
        #[arg(long)]
        trace: bool,
        /// Cross-check against the exhaustive search with this depth limit.
        #[arg(long)]
        oracle_depth: Option<usize>,
    },
    /// Derived height, ε-area and Szlenk bound of an atomic probability measure.
    Measure {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        epsilon: String,
    },
    /// Bourgain–Delbaen construction.
    #[command(subcommand)]
    Bd(BdOp),
    /// Dual-tree valuations and Szlenk bounds.
    #[command(subcommand)]
    Tree(TreeOp),
    /// Run every invariant suite.
    VerifyAll {
        #[arg(long, default_value_t = 4)]
        max_level: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum OrdinalOp {
    Add {
        a: String,
        b: String,
    },
    /// Left subtraction: the unique r with b + r = a.
    Sub {
        a: String,
        b: String,
    },
    Mul {
        a: String,
        b: String,
    },
    Cmp {
        a: String,
        b: String,
    },
    /// Largest power of ω not exceeding a.
    Lead {
        a: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum BdOp {
    Dims {
        #[arg(long)]
        max_level: usize,
    },
    /// The embedding i_{from,to} as a d_to × d_from matrix.
    Matrix {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
    /// Checks ‖i_{m,n}‖ ≤ λ for m < n ≤ max-level.
    Verify {
        #[arg(long)]
        max_level: usize,
    },
    /// The φ enumeration up to max-level.
    Phi {
        #[arg(long)]
        max_level: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum TreeOp {
    /// g_k at a node given as a 0/1 string; "()" or "" is the root.
    Value {
        #[arg(long)]
        k: usize,
        #[arg(long, allow_hyphen_values = true)]
        node: String,
    },
    /// Antichain identity on every basis vector of P_s X.
    Check {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        s: usize,
        /// Window level; defaults to the smallest level holding both k and s + 1.
        #[arg(long)]
        level: Option<usize>,
    },
    SzlenkBound {
        #[arg(long)]
        eps: String,
    },
}

/// What a run produced.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// A run that stopped early: bad input (exit 2) or a failed mathematical check (exit 1).
#[derive(Debug)]
enum Stop {
    Input { kind: &'static str, message: String },
    Check { message: String, report: String },
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::BoundViolation { .. } => {
                return Stop::Check {
                    message: e.to_string(),
                    report: String::new(),
                }
            }
            Error::ParamInvalid(_)
            | Error::LevelOutOfRange { .. }
            | Error::IndexOutOfRange { .. }
            | Error::BranchTooShort(_)
            | Error::WindowTooSmall(_)
            | Error::DepthExceeded { .. }
            | Error::UndefinedSubtraction { .. }
            | Error::LeadingPowerOfZero => "PARAM_INVALID",
            _ => "PARSE_ERROR",
        };
        Stop::Input {
            kind,
            message: e.to_string(),
        }
    }
}

fn parse_error(message: impl Into<String>) -> Stop {
    Stop::Input {
        kind: "PARSE_ERROR",
        message: message.into(),
    }
}

struct Ctx {
    format: Format,
    cap: usize,
    params: String,
    exploratory: bool,
}

impl Ctx {
    fn params(&self) -> Result<BDParams, Stop> {
        let parts: Vec<&str> = self.params.split(',').collect();
        let [a, b, l] = parts.as_slice() else {
            return Err(parse_error(format!("expected a,b,lambda, got {:?}", self.params)));
        };
        let (a, b, l) = (parse_rational(a)?, parse_rational(b)?, parse_rational(l)?);
        Ok(if self.exploratory {
            BDParams::exploratory(a, b, l)?
        } else {
            BDParams::new(a, b, l)?
        })
    }

    fn space(&self, levels: usize) -> Result<BDSpace, Stop> {
        self.check_level(levels)?;
        Ok(BDSpace::build_with(
            self.params()?,
            levels,
            self.cap,
            Mode::Parallel,
        )?)
    }

    fn check_level(&self, level: usize) -> Result<(), Stop> {
        if level > self.cap {
            return Err(Stop::Input {
                kind: "PARAM_INVALID",
                message: format!(
                    "level {level} exceeds the cap {}; set {LEVEL_CAP_VAR} to raise it",
                    self.cap
                ),
            });
        }
        if level == 0 {
            return Err(Error::LevelOutOfRange { level, max: self.cap }.into());
        }
        Ok(())
    }

    /// Table text, or the pretty-printed JSON document.
    fn emit<T: Serialize>(&self, doc: &T, table: impl FnOnce() -> String) -> String {
        match self.format {
            Format::Table => table(),
            Format::Json => serde_json::to_string_pretty(doc).expect("reports serialize") + "\n",
        }
    }
}

/// Runs with the level cap taken from [`LEVEL_CAP_VAR`] in the process environment.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_cap(args, std::env::var(LEVEL_CAP_VAR).ok().as_deref())
}

/// Runs with an explicit value for the level-cap variable (`None` when unset).
pub fn run_with_cap<I, T>(args: I, cap_var: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let mut stderr = String::new();
    let cap = match level_cap(cap_var, &mut stderr) {
        Ok(cap) => cap,
        Err(stop) => return finish(Err(stop), stderr),
    };
    let ctx = Ctx {
        format: cli.format,
        cap,
        params: cli.params.clone(),
        exploratory: cli.exploratory,
    };
    finish(dispatch(&ctx, &cli.command), stderr)
}

fn finish(result: Result<String, Stop>, mut stderr: String) -> Outcome {
    match result {
        Ok(stdout) => Outcome {
            code: EXIT_OK,
            stdout,
            stderr,
        },
        Err(Stop::Input { kind, message }) => {
            let _ = writeln!(stderr, "error[{kind}]: {message}");
            Outcome {
                code: EXIT_INPUT,
                stdout: String::new(),
                stderr,
            }
        }
        Err(Stop::Check { message, report }) => {
            let _ = writeln!(stderr, "error[CHECK_FAILED]: {message}");
            Outcome {
                code: EXIT_CHECK_FAILED,
                stdout: report,
                stderr,
            }
        }
    }
}

fn level_cap(var: Option<&str>, stderr: &mut String) -> Result<usize, Stop> {
    let Some(text) = var else {
        return Ok(DEFAULT_LEVEL_CAP);
    };
    let cap: usize = text
        .trim()
        .parse()
        .map_err(|_| parse_error(format!("{LEVEL_CAP_VAR}={text:?} is not a level")))?;
    if cap > DEFAULT_LEVEL_CAP {
        let dims = dimension_sequence(cap);
        let _ = writeln!(
            stderr,
            "warning: {LEVEL_CAP_VAR}={cap} lifts the level cap above {DEFAULT_LEVEL_CAP}; d_{cap} = {} and \
             i_{{{},{cap}}} alone holds {} exact rationals, far beyond typical memory",
            dims[cap - 1],
            cap - 1,
            dims[cap - 1] as u128 * dims[cap - 2] as u128
        );
    }
    Ok(cap)
}

fn dispatch(ctx: &Ctx, command: &Command) -> Result<String, Stop> {
    match command {
        Command::Ordinal(op) => ordinal(ctx, op),
        Command::Area {
            input,
            epsilon,
            trace,
            oracle_depth,
        } => area(ctx, input, epsilon, *trace, *oracle_depth),
        Command::Measure { input, epsilon } => measure(ctx, input, epsilon),
        Command::Bd(op) => bd(ctx, op),
        Command::Tree(op) => tree(ctx, op),
        Command::VerifyAll { max_level } => verify(ctx, *max_level),
    }
}

fn parse_ordinal(text: &str) -> Result<Ordinal, Stop> {
    Ok(text.parse()?)
}

fn parse_epsilon(text: &str) -> Result<Rational, Stop> {
    let eps = parse_rational(text)?;
    if eps <= Rational::from_integer(0.into()) {
        return Err(parse_error(format!(
            "epsilon must be positive, got {}",
            format_rational(&eps)
        )));
    }
    Ok(eps)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Stop> {
    let text = std::fs::read_to_string(path).map_err(|e| parse_error(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| parse_error(format!("{}: {e}", path.display())))
}

fn ordinal(ctx: &Ctx, op: &OrdinalOp) -> Result<String, Stop> {
    let (name, result) = match op {
        OrdinalOp::Add { a, b } => ("add", parse_ordinal(a)?.add(&parse_ordinal(b)?)),
        OrdinalOp::Sub { a, b } => ("sub", parse_ordinal(a)?.sub(&parse_ordinal(b)?)?),
        OrdinalOp::Mul { a, b } => ("mul", parse_ordinal(a)?.mul(&parse_ordinal(b)?)),
        OrdinalOp::Lead { a } => ("lead", parse_ordinal(a)?.leading_power()?),
        OrdinalOp::Cmp { a, b } => {
            let ord = parse_ordinal(a)?.cmp(&parse_ordinal(b)?);
            let symbol = match ord {
                std::cmp::Ordering::Less => "<",
                std::cmp::Ordering::Equal => "=",
                std::cmp::Ordering::Greater => ">",
            };
            let doc = json!({ "op": "cmp", "result": symbol });
            return Ok(ctx.emit(&doc, || format!("{symbol}\n")));
        }
    };
    let doc = json!({ "op": name, "result": result, "text": result.to_string() });
    Ok(ctx.emit(&doc, || format!("{result}\n")))
}

fn area(
    ctx: &Ctx,
    input: &Path,
    epsilon: &str,
    trace: bool,
    oracle_depth: Option<usize>,
) -> Result<String, Stop> {
    let eps = parse_epsilon(epsilon)?;
    let g: StepFunction = read_json(input)?;
    let (value, steps) = c_area(&g, &eps)?;
    let searched = oracle_depth
        .map(|depth| c_area_oracle(&g, &eps, depth))
        .transpose()?;

    let mut doc = json!({
        "epsilon": format_rational(&eps),
        "area": value,
        "area_text": value.to_string(),
    });
    if trace {
        let rendered = emit_trace(&steps, TraceFormat::Json);
        doc["trace"] = serde_json::from_str::<Value>(&rendered).expect("trace JSON is valid");
    }
    if let Some(found) = &searched {
        doc["oracle"] = json!(found.to_string());
    }
    let out = ctx.emit(&doc, || {
        let mut text = if trace {
            emit_trace(&steps, TraceFormat::Table)
        } else {
            format!("{value}\n")
        };
        if let Some(found) = &searched {
            let _ = writeln!(text, "oracle = {found}");
        }
        text
    });
    match searched {
        Some(found) if found != value => Err(Stop::Check {
            message: format!("greedy area {value} differs from exhaustive search {found} for g = {g}"),
            report: out,
        }),
        _ => Ok(out),
    }
}

fn measure(ctx: &Ctx, input: &Path, epsilon: &str) -> Result<String, Stop> {
    let eps = parse_epsilon(epsilon)?;
    let mu: OrdinalMeasure = read_json(input)?;
    let height = derived_height(&mu)?;
    let check = check_area_bound(&mu, &eps)?;
    let index = szlenk_formula(&mu.space, &eps)?;
    let doc = json!({
        "epsilon": format_rational(&eps),
        "derived_height": height,
        "derived_height_text": height.to_string(),
        "area": check.area,
        "bound": check.bound,
        "szlenk_index": index,
        "holds": check.holds,
    });
    let out = ctx.emit(&doc, || {
        format!(
            "derived height  {height}\narea            {}\nbound           {}\nszlenk index    {index}\n",
            check.area, check.bound
        )
    });
    if check.holds {
        Ok(out)
    } else {
        Err(Stop::Check {
            message: format!("area {} exceeds the bound {}", check.area, check.bound),
            report: out,
        })
    }
}

fn bd(ctx: &Ctx, op: &BdOp) -> Result<String, Stop> {
    match op {
        BdOp::Dims { max_level } => {
            ctx.check_level(*max_level)?;
            let params = ctx.params()?;
            let dims = dimension_sequence(*max_level);
            let doc = json!({ "params": params, "dims": dims });
            Ok(ctx.emit(&doc, || {
                dims.iter()
                    .enumerate()
                    .map(|(i, d)| format!("d_{} = {d}\n", i + 1))
                    .collect()
            }))
        }
        BdOp::Matrix { from, to } => {
            if from > to {
                return Err(Stop::Input {
                    kind: "PARAM_INVALID",
                    message: format!("--from {from} exceeds --to {to}"),
                });
            }
            let space = ctx.space(*to)?;
            let m = space.embed(*from, *to)?;
            Ok(ctx.emit(&m, || {
                m.row_vectors()
                    .map(|row| {
                        let cells: Vec<String> = row.iter().map(format_rational).collect();
                        cells.join(" ") + "\n"
                    })
                    .collect()
            }))
        }
        BdOp::Verify { max_level } => {
            let space = ctx.space(*max_level)?;
            let report = space.verify_lambda_bound(*max_level)?;
            Ok(ctx.emit(&report, || {
                let mut text = String::new();
                for e in &report.entries {
                    let _ = writeln!(
                        text,
                        "|i_({},{})| = {} <= {}",
                        e.m,
                        e.n,
                        format_rational(&e.norm),
                        format_rational(&report.lambda)
                    );
                }
                text
            }))
        }
        BdOp::Phi { max_level } => {
            let space = ctx.space(*max_level)?;
            let doc = json!({
                "ordering": PHI_ORDERING,
                "params": space.params(),
                "entries": space.phi_table(),
            });
            Ok(ctx.emit(&doc, || {
                let mut text = format!("# ordering: {PHI_ORDERING}\n# k level sigma1 i m sigma2 j\n");
                for e in space.phi_table() {
                    let t = e.tuple;
                    let _ = writeln!(
                        text,
                        "{} {} {:+} {} {} {:+} {}",
                        e.k, e.level, t.sigma1, t.i, t.m, t.sigma2, t.j
                    );
                }
                text
            }))
        }
    }
}

/// The smallest level whose dimension reaches `k`, at least `floor`.
fn level_for(k: usize, floor: usize, cap: usize) -> usize {
    let dims = dimension_sequence(cap);
    let need = dims.iter().position(|d| *d >= k).map_or(cap + 1, |i| i + 1);
    need.max(floor)
}

fn tree(ctx: &Ctx, op: &TreeOp) -> Result<String, Stop> {
    match op {
        TreeOp::Value { k, node } => {
            let node: TreeNode = node.parse()?;
            let space = ctx.space(level_for(*k, 2, ctx.cap))?;
            let value = TreeValuation::new(&space, *k)?.value(&node)?;
            Ok(ctx.emit(&value, || format!("g_{k}({node}) = {value}\n")))
        }
        TreeOp::Check { k, s, level } => {
            let level = level.unwrap_or_else(|| level_for(*k, s + 1, ctx.cap));
            let space = ctx.space(level)?;
            let ds = space.dim(*s)?;
            let mut reports: Vec<AntichainReport> = Vec::with_capacity(ds);
            for c in 0..ds {
                let mut z = vec![Rational::from_integer(0.into()); ds];
                z[c] = Rational::from_integer(1.into());
                let x = XWindow::from_level(&space, *s, &z, level)?;
                reports.push(antichain_identity_check(&space, *k, *s, &x)?);
            }
            let holds = reports.iter().all(|r| r.holds);
            let doc = json!({ "k": k, "s": s, "level": level, "holds": holds, "basis": reports });
            let out = ctx.emit(&doc, || {
                let mut text = String::new();
                for (c, r) in reports.iter().enumerate() {
                    let _ = writeln!(
                        text,
                        "e_{}: antichain {} nodes, sum {} vs e_{k}*(x) = {}, {} splits{}",
                        c + 1,
                        r.antichain.len(),
                        format_rational(&r.antichain_sum),
                        format_rational(&r.coordinate),
                        r.splits_checked,
                        if r.holds { "" } else { "  FAILED" }
                    );
                }
                text
            });
            if holds {
                Ok(out)
            } else {
                Err(Stop::Check {
                    message: format!("antichain identity fails for k={k}, s={s}"),
                    report: out,
                })
            }
        }
        TreeOp::SzlenkBound { eps } => {
            let eps = parse_epsilon(eps)?;
            let space = ctx.space(2)?;
            let bound = szlenk_bound_c(&space, &eps)?;
            Ok(ctx.emit(&bound, || {
                format!(
                    "N = {}\nbound = {}\ntail = {} < {}\n",
                    bound.n,
                    bound.bound,
                    format_rational(&bound.tail),
                    format_rational(&bound.threshold)
                )
            }))
        }
    }
}

fn verify(ctx: &Ctx, max_level: usize) -> Result<String, Stop> {
    ctx.check_level(max_level)?;
    let report = verify_all(ctx.params()?, max_level, ctx.cap, Mode::Parallel)?;
    let out = ctx.emit(&report, || {
        let mut text = String::new();
        for s in &report.suites {
            let _ = writeln!(
                text,
                "{:<16} {:>7} checks  {}",
                s.name,
                s.checks,
                if s.passed { "PASS" } else { "FAIL" }
            );
            for f in s.failures.iter().take(5) {
                let _ = writeln!(text, "    {f}");
            }
        }
        text
    });
    if report.passed {
        Ok(out)
    } else {
        let failed: Vec<&str> = report
            .suites
            .iter()
            .filter(|s| !s.passed)
            .map(|s| s.name)
            .collect();
        Err(Stop::Check {
            message: format!("failing suites: {}", failed.join(", ")),
            report: out,
        })
    }
}
