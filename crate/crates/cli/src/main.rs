use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arbocube::ball::budget_from_env;
use arbocube::collapse::collapse_map;
use arbocube::verdict::{cat0_verdict, run_checks, CheckName, Report, Status};
use arbocube::witness::counterexample_witness;
use arbocube::{build_ball, Ball, BallJson, BallLimits, Complex, Error, Family};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const OK: u8 = 0;
const INVALID: u8 = 2;
const GUARD: u8 = 3;
const FAILED: u8 = 4;
const UNKNOWN: u8 = 5;

#[derive(Parser)]
#[command(name = "arbocube", version, about = "Build and check finite pieces of arboreal cube complexes")]
struct Cli {
    /// Worker threads for parallel analysis (default: all cores).
    #[arg(long, global = true, value_parser = positive)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a ball and write it as JSON or DOT.
    Ball(BallArgs),
    /// Run the check suite on a ball file.
    Check(CheckArgs),
    /// Build and verify a non-completable 3-corner in C(n,m), m > n+1.
    Witness(WitnessArgs),
    /// Report whether the complex is expected to be CAT(0).
    Verdict(VerdictArgs),
    /// Write the polygon correspondence between the STAR and SHARP structures.
    Collapse(CollapseArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    #[value(name = "C", alias = "c")]
    C,
    #[value(name = "D", alias = "d")]
    D,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::C => Family::C,
            FamilyArg::D => Family::D,
        }
    }
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Dot,
}

fn positive_named(s: &str, name: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(v) if v >= 1 => Ok(v),
        Ok(_) => Err(format!("{name} must be ≥ 1")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_n(s: &str) -> Result<u32, String> {
    positive_named(s, "n")
}

fn parse_m(s: &str) -> Result<u32, String> {
    positive_named(s, "m")
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        Ok(_) => Err("value must be ≥ 1".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_check(s: &str) -> Result<CheckName, String> {
    s.parse::<CheckName>().map_err(|e| e.to_string())
}

#[derive(Args)]
struct Params {
    #[arg(long, value_parser = parse_n)]
    n: u32,
    #[arg(long, value_parser = parse_m)]
    m: u32,
}

#[derive(Args)]
struct Limits {
    #[arg(long, default_value_t = 3, value_parser = positive)]
    height_max: usize,
    #[arg(long, default_value_t = 2, value_parser = positive)]
    depth: usize,
    #[arg(long, default_value_t = 1)]
    word_len: usize,
    #[arg(long, default_value_t = 4, value_parser = positive)]
    k_max: usize,
}

impl Limits {
    fn get(&self) -> BallLimits {
        BallLimits::new(self.height_max, self.depth, self.word_len, self.k_max)
    }
}

#[derive(Args)]
struct BallArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[command(flatten)]
    params: Params,
    #[command(flatten)]
    limits: Limits,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Output file (default: stdout).
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Ball JSON file.
    #[arg(long)]
    ball: PathBuf,
    /// Comma-separated checks: squares, k32, corners, cubecompletion, frontier, flaglinks.
    #[arg(long, value_delimiter = ',', value_parser = parse_check)]
    checks: Option<Vec<CheckName>>,
    /// Treat unresolved corners as failures (exit 5).
    #[arg(long)]
    strict: bool,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    #[command(flatten)]
    params: Params,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerdictArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[command(flatten)]
    params: Params,
    /// Also build a ball with the given limits and run every check on it.
    #[arg(long)]
    with_ball: bool,
    #[command(flatten)]
    limits: Limits,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CollapseArgs {
    #[command(flatten)]
    params: Params,
    #[arg(long, value_parser = positive)]
    depth: usize,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::LimitTooLarge(_) => GUARD,
            _ => INVALID,
        };
        Failure::new(code, e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn meta() -> Value {
    json!({"tool": "arbocube", "version": env!("CARGO_PKG_VERSION")})
}

fn with_meta(mut payload: Value) -> Value {
    if let Value::Object(map) = &mut payload {
        let mut out = serde_json::Map::new();
        out.insert("meta".into(), meta());
        out.append(map);
        return Value::Object(out);
    }
    payload
}

/// Writes to `path` through a temporary file in the same directory, or to
/// stdout when no path is given.
fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::new(INVALID, format!("cannot write output: {e}"));
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(io)?;
            out.flush().map_err(io)
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(text.as_bytes()).map_err(io)?;
            tmp.persist(p).map_err(|e| io(e.error))?;
            Ok(())
        }
    }
}

fn emit_json(path: Option<&Path>, payload: Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(&with_meta(payload)).expect("serializable");
    text.push('\n');
    emit(path, &text)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn cmd_ball(a: BallArgs) -> Outcome {
    let cx = Complex::new(a.family.into(), a.params.n, a.params.m)?;
    let ball = build_ball(&cx, a.limits.get(), budget_from_env())?;
    match a.format {
        Format::Json => emit_json(a.output.as_deref(), to_value(&ball.to_json()))?,
        Format::Dot => emit(a.output.as_deref(), &ball.to_dot())?,
    }
    eprintln!("{} vertices, {} edges, {} cubes", ball.len(), ball.edges.len(), ball.cubes.len());
    Ok(OK)
}

fn read_ball(path: &Path) -> Result<Ball, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(INVALID, format!("cannot read {}: {e}", path.display())))?;
    let json: BallJson = serde_json::from_str(&text)
        .map_err(|e| Failure::new(INVALID, format!("cannot parse {}: {e}", path.display())))?;
    Ok(Ball::from_json(&json)?)
}

fn exit_for(statuses: impl IntoIterator<Item = Status>, strict: bool) -> u8 {
    let statuses: Vec<Status> = statuses.into_iter().collect();
    if statuses.contains(&Status::Fail) {
        FAILED
    } else if strict && statuses.contains(&Status::Unknown) {
        UNKNOWN
    } else {
        OK
    }
}

fn cmd_check(a: CheckArgs) -> Outcome {
    let ball = read_ball(&a.ball)?;
    let mut names = a.checks.unwrap_or_else(|| CheckName::ALL.to_vec());
    names.dedup();
    let checks = run_checks(&ball, &names);
    let p = ball.complex.params;
    let verdict = cat0_verdict(ball.complex.family, p.n, p.m, None)?;
    for c in &checks {
        eprintln!("{:<15} {:?}", c.name.as_str(), c.status);
    }
    let code = exit_for(checks.iter().map(|c| c.status), a.strict);
    emit_json(a.output.as_deref(), to_value(&Report { checks, verdict }))?;
    Ok(code)
}

fn cmd_witness(a: WitnessArgs) -> Outcome {
    let (n, m) = (a.params.n, a.params.m);
    if m <= n + 1 {
        return Err(Failure::new(
            INVALID,
            format!("C({n},{m}) is CAT(0) because 1 ≤ m ≤ n+1, so no non-completable corner exists"),
        ));
    }
    let w = counterexample_witness(n, m)?;
    for c in &w.checks {
        eprintln!("{} {}", if c.ok { "ok  " } else { "FAIL" }, c.name);
    }
    let code = if w.verified { OK } else { FAILED };
    emit_json(a.output.as_deref(), to_value(&w))?;
    Ok(code)
}

fn cmd_verdict(a: VerdictArgs) -> Outcome {
    let family: Family = a.family.into();
    let ball = if a.with_ball {
        let cx = Complex::new(family, a.params.n, a.params.m)?;
        Some(build_ball(&cx, a.limits.get(), budget_from_env())?)
    } else {
        None
    };
    let v = cat0_verdict(family, a.params.n, a.params.m, ball.as_ref())?;
    eprintln!(
        "{}({},{}): expected CAT(0) = {}, selector {}",
        v.family, v.n, v.m, v.expected_cat0, v.selector
    );
    emit_json(a.output.as_deref(), to_value(&v))?;
    Ok(OK)
}

fn cmd_collapse(a: CollapseArgs) -> Outcome {
    let c = collapse_map(a.params.n, a.params.m, a.depth)?;
    let pairs: Vec<Value> = c.pairs.iter().map(|(s, t)| json!([s, t])).collect();
    let payload = json!({
        "source": format!("star({},{})", c.source.n, c.source.m),
        "target": c.target_name(),
        "depth": c.depth,
        "merged_arcs": c.merged_arcs,
        "checks": c.checks,
        "isomorphism": c.ok(),
        "pairs": pairs,
    });
    emit_json(a.output.as_deref(), payload)?;
    eprintln!("{} polygons mapped onto {}", c.pairs.len(), c.target_name());
    Ok(if c.ok() { OK } else { FAILED })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INVALID } else { OK });
        }
    };
    if let Some(j) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let out = match cli.command {
        Command::Ball(a) => cmd_ball(a),
        Command::Check(a) => cmd_check(a),
        Command::Witness(a) => cmd_witness(a),
        Command::Verdict(a) => cmd_verdict(a),
        Command::Collapse(a) => cmd_collapse(a),
    };
    match out {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
