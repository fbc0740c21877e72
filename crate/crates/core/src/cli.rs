//! Command-line front end behind the `dsnorm` binary.
//!
//! Exit codes: 0 on success, 1 when a computation fails to converge, 2 on
//! bad input. All JSON output prints floats with 17 significant digits.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ndarray::{Array1, Array2};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::ds::{self, parse_exponent, DsParams, GroupStructure};
use crate::error::{invalid, Error, Result};
use crate::norms::{self, EpsQ};
use crate::simulate::{self, ExperimentConfig};
use crate::solver::{self, Problem, SolveOptions};
use crate::theory::{self, CaseInputs, DesignModel, SparsityLevel, SpecialCase};

#[derive(Debug, Parser)]
#[command(name = "dsnorm", version, about = "eps-q norms, double-sparsity norms, sparse-group LASSO solver and error bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// εq-norm of a vector, or the DS norm when a group structure is given.
    Norm(NormArgs),
    /// Spiky/flat split of a vector under the εq-norm, as JSON.
    Decompose(DecomposeArgs),
    /// Solve the generalized sparse-group LASSO and write a certified result.
    Solve(SolveArgs),
    /// Theory constants, recommended λ and the ℓ₂ error bound, as JSON.
    Theory(TheoryArgs),
    /// Run a Monte Carlo experiment described by a JSON config.
    Experiment(ExperimentArgs),
    /// Boundary points of the 2-d εq unit ball, as CSV.
    Ball(BallArgs),
}

/// Group-structure flags shared by several subcommands.
#[derive(Debug, Clone, Args)]
pub struct GroupFlags {
    /// Group sizes, e.g. `3,2,4`.
    #[arg(long, value_delimiter = ',')]
    pub groups: Option<Vec<usize>>,
    /// Mixing weight τ in [0, 1].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Group weights; one value is broadcast. Defaults to √p_g.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Group exponents (`inf` allowed); one value is broadcast.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<String>>,
    /// DS parameters as JSON; overrides the flags above.
    #[arg(long)]
    pub params: Option<PathBuf>,
}

impl GroupFlags {
    fn given(&self) -> bool {
        self.groups.is_some() || self.params.is_some()
    }

    fn build(&self) -> Result<DsParams> {
        if let Some(path) = &self.params {
            return Ok(serde_json::from_str(&read_text(path)?)?);
        }
        let sizes = self
            .groups
            .clone()
            .ok_or_else(|| invalid("--groups or --params is required"))?;
        let groups = GroupStructure::new(sizes)?;
        let g = groups.n_groups();
        let tau = self.tau.ok_or_else(|| invalid("--tau is required with --groups"))?;
        let alphas = match &self.alphas {
            Some(a) => broadcast(a.iter().map(|s| parse_exponent(s)).collect::<Result<Vec<_>>>()?, g, "--alphas")?,
            None => return Err(invalid("--alphas is required with --groups")),
        };
        match &self.weights {
            Some(w) => DsParams::new(groups, tau, broadcast(w.clone(), g, "--weights")?, alphas),
            None => DsParams::with_default_weights(groups, tau, alphas),
        }
    }
}

fn broadcast(v: Vec<f64>, g: usize, flag: &str) -> Result<Vec<f64>> {
    match v.len() {
        1 => Ok(vec![v[0]; g]),
        k if k == g => Ok(v),
        k => Err(invalid(format!("{flag} has {k} values for {g} groups"))),
    }
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// Vector file (CSV, one row or one column).
    pub input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long, default_value = "2", value_parser = parse_exponent_arg)]
    pub q: f64,
    /// Print the dual norm instead.
    #[arg(long)]
    pub dual: bool,
    /// Print the εq decomposition as JSON.
    #[arg(long, conflicts_with = "dual")]
    pub decompose: bool,
    #[command(flatten)]
    pub group: GroupFlags,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, value_parser = parse_exponent_arg)]
    pub q: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Design matrix, rows = samples.
    pub x: PathBuf,
    /// Response vector.
    pub y: PathBuf,
    /// Penalty level, or `auto` for the recommended value.
    #[arg(long)]
    pub lambda: String,
    /// Noise level for `--lambda auto`.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Take Σ = I for `--lambda auto`.
    #[arg(long)]
    pub sigma_identity: bool,
    /// Covariance CSV for `--lambda auto`.
    #[arg(long, conflicts_with = "sigma_identity")]
    pub cov: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Result JSON path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-iteration objective trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub group: GroupFlags,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// Evaluate one of the special cases 1–7.
    #[arg(long)]
    pub case: Option<u8>,
    #[arg(long)]
    pub n: usize,
    /// Noise level σ.
    #[arg(long)]
    pub sigma: f64,
    /// Dimension; needed only when neither groups nor a covariance fix it.
    #[arg(long)]
    pub p: Option<usize>,
    /// Covariance CSV; identity when omitted.
    #[arg(long)]
    pub cov: Option<PathBuf>,
    /// Number of nonzero coefficients.
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    /// Number of nonzero groups.
    #[arg(long, default_value_t = 1)]
    pub s_g: usize,
    /// Penalty level for the bound; the recommended value when omitted.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub group: GroupFlags,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub config: PathBuf,
    /// Output directory for `trials.csv` and `summary.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides `base_seed` from the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BallArgs {
    #[arg(long)]
    pub eps: f64,
    #[arg(long, value_parser = parse_exponent_arg)]
    pub q: f64,
    #[arg(long, default_value_t = 720)]
    pub resolution: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_exponent_arg(s: &str) -> std::result::Result<f64, String> {
    parse_exponent(s).map_err(|e| e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Norm(a) => cmd_norm(&a, stdout),
        Command::Decompose(a) => cmd_decompose(&a, stdout),
        Command::Solve(a) => cmd_solve(&a, stdout, stderr),
        Command::Theory(a) => cmd_theory(&a, stdout),
        Command::Experiment(a) => cmd_experiment(&a, stdout),
        Command::Ball(a) => cmd_ball(&a, stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// 1 for numerical failures, 2 for everything caused by the input.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::IterationLimit { .. } | Error::Degenerate(_) => 1,
        _ => 2,
    }
}

pub fn cmd_norm(a: &NormArgs, out: &mut dyn Write) -> Result<i32> {
    let x = read_vector(&a.input)?;
    if a.group.given() {
        let params = a.group.build()?;
        let v = if a.dual {
            ds::ds_dual_norm(&x, &params)?
        } else if a.decompose {
            return Err(invalid("--decompose applies to the εq-norm, not the DS norm"));
        } else {
            ds::ds_norm(&x, &params)?
        };
        writeln!(out, "{}", fmt_f64(v))?;
        return Ok(0);
    }
    let p = EpsQ::new(a.eps, a.q)?;
    if a.decompose {
        write_json(out, &norms::epsq_decompose(&x, p))?;
    } else {
        let v = if a.dual {
            norms::epsq_dual_norm(&x, p)
        } else {
            norms::epsq_norm(&x, p)
        };
        writeln!(out, "{}", fmt_f64(v))?;
    }
    Ok(0)
}

pub fn cmd_decompose(a: &DecomposeArgs, out: &mut dyn Write) -> Result<i32> {
    let x = read_vector(&a.input)?;
    let d = norms::epsq_decompose(&x, EpsQ::new(a.eps, a.q)?);
    emit_json(a.out.as_deref(), out, &d)?;
    Ok(0)
}

pub fn cmd_solve(a: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let x = read_matrix(&a.x)?;
    let y = Array1::from(read_vector(&a.y)?);
    let params = a.group.build()?;
    let lambda = if a.lambda.trim().eq_ignore_ascii_case("auto") {
        let sigma = a.sigma.ok_or_else(|| invalid("--lambda auto needs --sigma"))?;
        let cov = match (&a.cov, a.sigma_identity) {
            (Some(path), _) => read_matrix(path)?,
            (None, true) => Array2::eye(params.dim()),
            (None, false) => return Err(invalid("--lambda auto needs --sigma-identity or --cov")),
        };
        theory::lambda_recommendation(&params, x.nrows(), &DesignModel::new(cov, sigma)?)?
    } else {
        a.lambda
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("--lambda: not a number or 'auto': {:?}", a.lambda)))?
    };
    let prob = Problem::new(x, y, lambda, params)?;
    let opts = SolveOptions {
        tol: a.tol,
        max_iters: a.max_iters,
        record_trace: a.trace.is_some(),
        ..SolveOptions::default()
    };
    let res = solver::solve_with(&prob, &opts)?;
    emit_json(a.out.as_deref(), out, &res)?;
    if let Some(path) = &a.trace {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        for row in &res.trace {
            w.serialize(row).map_err(csv_err)?;
        }
        w.flush()?;
    }
    if res.converged {
        Ok(0)
    } else {
        writeln!(
            err,
            "warning: duality gap {} above tolerance after {} iterations",
            fmt_f64(res.duality_gap),
            res.iterations
        )?;
        Ok(1)
    }
}

pub fn cmd_theory(a: &TheoryArgs, out: &mut dyn Write) -> Result<i32> {
    let group_dim = a.group.groups.as_ref().map(|g| g.iter().sum::<usize>());
    let cov = match &a.cov {
        Some(path) => read_matrix(path)?,
        None => {
            let p = a
                .p
                .or(group_dim)
                .ok_or_else(|| invalid("the dimension is unknown: pass --p, --groups or --cov"))?;
            Array2::eye(p)
        }
    };
    let model = DesignModel::new(cov, a.sigma)?;
    let sparsity = SparsityLevel::new(a.s, a.s_g);

    if let Some(id) = a.case {
        let case = SpecialCase::from_id(id)?;
        let sizes = match (&a.group.groups, case) {
            (Some(g), _) => g.clone(),
            (None, SpecialCase::Lasso) => vec![1; model.dim()],
            (None, _) => return Err(invalid(format!("case {id} needs --groups"))),
        };
        let inputs = CaseInputs {
            sizes,
            weights: a.group.weights.clone(),
            tau: a.group.tau.unwrap_or(0.5),
            n: a.n,
            model,
            sparsity,
        };
        let eval = theory::case_specialization(case, &inputs)?;
        emit_json(a.out.as_deref(), out, &eval)?;
        return Ok(0);
    }

    let params = if a.group.given() {
        a.group.build()?
    } else {
        DsParams::lasso(model.dim())?
    };
    let lambda = match a.lambda {
        Some(l) => l,
        None => theory::lambda_recommendation(&params, a.n, &model)?,
    };
    let report = theory::l2_error_bound(&params, &model, a.n, lambda, sparsity)?;
    emit_json(a.out.as_deref(), out, &report)?;
    Ok(0)
}

pub fn cmd_experiment(a: &ExperimentArgs, out: &mut dyn Write) -> Result<i32> {
    let mut cfg: ExperimentConfig = serde_json::from_str(&read_text(&a.config)?)?;
    if let Some(seed) = a.seed {
        cfg.base_seed = seed;
    }
    let record = simulate::run_experiment(&cfg)?;
    let summary = simulate::summarize(&record);
    fs::create_dir_all(&a.out)?;
    simulate::write_trials_csv(&record.trials, File::create(a.out.join("trials.csv"))?)?;
    let mut f = File::create(a.out.join("summary.json"))?;
    write_json(&mut f, &summary)?;
    writeln!(out, "{}", a.out.join("summary.json").display())?;
    Ok(0)
}

pub fn cmd_ball(a: &BallArgs, out: &mut dyn Write) -> Result<i32> {
    let pts = norms::epsq_ball_boundary(EpsQ::new(a.eps, a.q)?, a.resolution)?;
    let mut buf = String::from("x,y\n");
    for [u, v] in pts {
        buf.push_str(&format!("{},{}\n", fmt_f64(u), fmt_f64(v)));
    }
    match &a.out {
        Some(path) => fs::write(path, buf)?,
        None => out.write_all(buf.as_bytes())?,
    }
    Ok(0)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Reads a numeric CSV; a first row that does not parse as numbers is taken
/// as a header and skipped.
pub fn read_csv_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = read_text(path)?;
    parse_csv_rows(&text, &path.display().to_string())
}

pub fn parse_csv_rows(text: &str, source: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("{source}: {e}")))?;
        let line = record.position().map(|p| p.line()).unwrap_or(k as u64 + 1);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, (usize, String)> = record
            .iter()
            .enumerate()
            .map(|(c, f)| f.parse::<f64>().map_err(|_| (c + 1, f.to_string())))
            .collect();
        match parsed {
            Ok(v) => {
                if let Some(c) = v.iter().position(|x| !x.is_finite()) {
                    return Err(Error::Parse(format!("{source}: line {line}, column {}: non-finite value", c + 1)));
                }
                rows.push(v);
            }
            Err(_) if k == 0 => continue,
            Err((c, f)) => {
                return Err(Error::Parse(format!("{source}: line {line}, column {c}: cannot parse {f:?} as a number")))
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Parse(format!("{source}: no numeric rows")));
    }
    Ok(rows)
}

pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    rows_to_matrix(read_csv_rows(path)?, &path.display().to_string())
}

fn rows_to_matrix(rows: Vec<Vec<f64>>, source: &str) -> Result<Array2<f64>> {
    let cols = rows[0].len();
    if let Some(k) = rows.iter().position(|r| r.len() != cols) {
        return Err(Error::Parse(format!(
            "{source}: row {} has {} fields, expected {cols}",
            k + 1,
            rows[k].len()
        )));
    }
    let n = rows.len();
    Array2::from_shape_vec((n, cols), rows.into_iter().flatten().collect()).map_err(|e| Error::Parse(e.to_string()))
}

/// A vector stored as one row or one column.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let source = path.display().to_string();
    let m = rows_to_matrix(read_csv_rows(path)?, &source)?;
    if m.nrows() != 1 && m.ncols() != 1 {
        return Err(Error::Parse(format!(
            "{source}: expected a single row or column, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.into_iter().collect())
}

/// Formats with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON whose floats keep 17 significant digits.
struct ExactFloats<'a>(PrettyFormatter<'a>);

impl Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    write_json(&mut buf, value)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

fn write_json<T: Serialize, W: Write + ?Sized>(out: &mut W, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut *out, ExactFloats(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn emit_json<T: Serialize>(path: Option<&Path>, out: &mut dyn Write, value: &T) -> Result<()> {
    match path {
        Some(p) => write_json(&mut File::create(p)?, value),
        None => write_json(out, value),
    }
}
