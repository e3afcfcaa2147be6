//! `polycs`: evaluate ε-coherent-state quantities on grids, run the
//! Bargmann-type transform and drive the verification suites.
//!
//! Exit codes: 0 ok, 1 a verification suite failed, 2 usage, 3 numerical
//! domain or quadrature adequacy, 4 I/O.

mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, ValueEnum};
use num_complex::Complex64;

use polycs::bargmann::{transform_grid, TransformSpec};
use polycs::epsiloncs::{
    heat_kernel, heat_limit_defect, mehler_kernel, normalization_with_eps, overlap, overlap_limit_defect,
    truncation_order, wavefunction_closed, wavefunction_series, Adequacy, StateLabel,
};
use polycs::polyfock::{log_sigma, phi, reproducing_kernel};
use polycs::quad::polar_rule;
use polycs::sampled::{linspace, Eigenstate, Interpolation, LineFunction, SampledFunction};
use polycs::verify::{
    default_config, identity_limit_sweep, identity_matrix_orders, run_all, CommonOverrides, SuiteRequest,
};

use output::{Cell, Table};

/// Values whose natural log exceeds this in magnitude are written as logs.
const LOG_SCALE_THRESHOLD: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Eval,
    Transform,
    Verify,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Quantity {
    /// Φₙᵐ(z) over the z-grid (needs --n)
    Phi,
    /// K_m(z, w) over the z-grid
    KernelKm,
    /// ⟨z;m,ε|w;m,ε⟩ over the z-grid
    KernelOverlap,
    /// 𝒩_{m,ε}(z) over the z-grid
    Normalization,
    /// ⟨x|z;m,ε⟩ in closed form over the x-grid
    Wavefunction,
    /// ⟨x|z;m,ε⟩ as a truncated eigenfunction series (--trunc)
    WavefunctionSeries,
    /// G_ε(x, y) over the x-grid squared
    HeatKernel,
    /// Mehler kernel K(e^{-ε}; x, y) over the x-grid squared
    Mehler,
    /// σ_{m,ε}(n) for n = 0..=--n
    Sigma,
    /// sweep only: max |M_ε - I| of the identity matrix (--n is n_max)
    Identity,
    /// sweep only: sup |𝒪_ε[φₙ] - φₙ| over the x-grid
    Heat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Interp {
    Linear,
    Spline,
}

/// `min,max,count` for one axis of the z-grid.
#[derive(Debug, Clone, Copy, PartialEq)]
struct GridSpec {
    min: f64,
    max: f64,
    count: usize,
}

impl GridSpec {
    fn single(v: f64) -> Self {
        Self { min: v, max: v, count: 1 }
    }

    fn points(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.count)
    }
}

const MAX_GRID: usize = 1_000_000;

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [min, max, count] = parts[..] else {
        return Err(format!("expected min,max,count but got `{s}`"));
    };
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let (min, max) = (num(min)?, num(max)?);
    let count: usize = count.parse().map_err(|e| format!("count `{count}`: {e}"))?;
    if !(min.is_finite() && max.is_finite() && min <= max) {
        return Err("min and max must be finite with min <= max".into());
    }
    if count > MAX_GRID {
        return Err(format!("count must be at most {MAX_GRID}"));
    }
    Ok(GridSpec { min, max, count })
}

#[derive(Debug, Parser)]
#[command(name = "polycs", version, about = "Epsilon coherent states with polyanalytic coefficients")]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[arg(long, value_enum)]
    command: Command,

    #[arg(long, value_enum)]
    quantity: Option<Quantity>,

    /// Landau level
    #[arg(long)]
    m: Option<usize>,

    /// Basis or eigenstate index (phi, transform, heat sweep), largest
    /// index (sigma) or n_max (identity sweep)
    #[arg(long)]
    n: Option<usize>,

    #[arg(long)]
    eps: Option<f64>,

    /// Comma-separated strictly decreasing ε values for sweeps
    #[arg(long, value_delimiter = ',')]
    eps_list: Vec<f64>,

    #[arg(long, default_value_t = 0.0)]
    z_re: f64,
    #[arg(long, default_value_t = 0.0)]
    z_im: f64,
    #[arg(long, default_value_t = 0.0)]
    w_re: f64,
    #[arg(long, default_value_t = 0.0)]
    w_im: f64,

    #[arg(long, default_value_t = -4.0)]
    x_min: f64,
    #[arg(long, default_value_t = 4.0)]
    x_max: f64,
    #[arg(long, default_value_t = 81)]
    x_count: usize,

    /// z-grid real axis as min,max,count (defaults to the single point --z-re)
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    grid_re: Option<GridSpec>,
    /// z-grid imaginary axis as min,max,count (defaults to --z-im)
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    grid_im: Option<GridSpec>,

    #[arg(long)]
    trunc: Option<usize>,
    #[arg(long)]
    quad_radial: Option<usize>,
    #[arg(long)]
    quad_angular: Option<usize>,
    #[arg(long)]
    quad_hermite: Option<usize>,

    /// Sampled input for transform: CSV with columns x,re[,im]
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Interp::Linear)]
    interp: Interp,

    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Verification suite to run; repeatable, `all` selects every suite
    #[arg(long, value_delimiter = ',')]
    suite: Vec<String>,
    /// JSON array of suite requests ({"suite", "params", "common"})
    #[arg(long)]
    config: Option<PathBuf>,
    /// Keep measured runtimes in reports (otherwise runtime_ms is 0 so that
    /// reports are byte-identical across runs)
    #[arg(long)]
    timing: bool,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(msg: impl std::fmt::Display) -> Self {
        Self {
            code: 2,
            error: anyhow!("{msg}"),
        }
    }

    fn io(error: anyhow::Error) -> Self {
        Self { code: 4, error }
    }
}

impl From<polycs::Error> for Failure {
    fn from(e: polycs::Error) -> Self {
        let code = match e {
            polycs::Error::UnknownSuite(_) | polycs::Error::InvalidConfig { .. } => 2,
            _ => 3,
        };
        Self {
            code,
            error: e.into(),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("polycs: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Outcome<u8> {
    validate(cli)?;
    match cli.command {
        Command::Eval => emit(cli, &eval(cli)?).map(|_| 0),
        Command::Transform => emit(cli, &transform(cli)?).map(|_| 0),
        Command::Sweep => emit(cli, &sweep(cli)?).map(|_| 0),
        Command::Verify => verify(cli),
    }
}

/// Flag checks that need no library call.
fn validate(cli: &Cli) -> Outcome<()> {
    let finite = [
        ("--z-re", cli.z_re),
        ("--z-im", cli.z_im),
        ("--w-re", cli.w_re),
        ("--w-im", cli.w_im),
        ("--x-min", cli.x_min),
        ("--x-max", cli.x_max),
    ];
    for (flag, v) in finite {
        if !v.is_finite() {
            return Err(Failure::usage(format!("{flag} must be finite, got {v}")));
        }
    }
    if cli.x_min > cli.x_max {
        return Err(Failure::usage("--x-min must not exceed --x-max"));
    }
    if cli.x_count > MAX_GRID {
        return Err(Failure::usage(format!("--x-count must be at most {MAX_GRID}")));
    }
    if let Some(e) = cli.eps {
        if !(e.is_finite() && e >= 0.0) {
            return Err(Failure::usage(format!("--eps must be finite and >= 0, got {e}")));
        }
    }
    for (i, &e) in cli.eps_list.iter().enumerate() {
        if !(e.is_finite() && e > 0.0) || (i > 0 && e >= cli.eps_list[i - 1]) {
            return Err(Failure::usage("--eps-list must be positive and strictly decreasing"));
        }
    }
    if cli.trunc == Some(0) {
        return Err(Failure::usage("--trunc must be at least 1"));
    }
    if cli.command != Command::Verify && (!cli.suite.is_empty() || cli.config.is_some()) {
        return Err(Failure::usage("--suite and --config only apply to --command verify"));
    }
    Ok(())
}

fn need_eps(cli: &Cli) -> Outcome<f64> {
    cli.eps.ok_or_else(|| Failure::usage("--eps is required for this quantity"))
}

fn need_positive_eps(cli: &Cli) -> Outcome<f64> {
    let e = need_eps(cli)?;
    if e > 0.0 {
        Ok(e)
    } else {
        Err(Failure::usage("--eps must be > 0 for this quantity"))
    }
}

fn need_n(cli: &Cli) -> Outcome<usize> {
    cli.n.ok_or_else(|| Failure::usage("--n is required for this quantity"))
}

fn z(cli: &Cli) -> Complex64 {
    Complex64::new(cli.z_re, cli.z_im)
}

fn w(cli: &Cli) -> Complex64 {
    Complex64::new(cli.w_re, cli.w_im)
}

fn z_grid(cli: &Cli) -> Vec<Complex64> {
    let re = cli.grid_re.unwrap_or(GridSpec::single(cli.z_re)).points();
    let im = cli.grid_im.unwrap_or(GridSpec::single(cli.z_im)).points();
    re.iter()
        .flat_map(|&a| im.iter().map(move |&b| Complex64::new(a, b)))
        .collect()
}

fn x_grid(cli: &Cli) -> Vec<f64> {
    linspace(cli.x_min, cli.x_max, cli.x_count)
}

fn value_cells(v: Complex64) -> [Cell; 3] {
    [Cell::Real(v.re), Cell::Real(v.im), Cell::Count(0)]
}

/// A real quantity known by its natural log.
fn log_cells(log_value: f64) -> [Cell; 3] {
    if log_value.abs() > LOG_SCALE_THRESHOLD {
        [Cell::Real(log_value), Cell::Real(0.0), Cell::Count(1)]
    } else {
        [Cell::Real(log_value.exp()), Cell::Real(0.0), Cell::Count(0)]
    }
}

const Z_COLUMNS: &[&str] = &["z_re", "z_im", "re", "im", "log_scale"];
const X_COLUMNS: &[&str] = &["x", "re", "im", "log_scale"];
const XY_COLUMNS: &[&str] = &["x", "y", "re", "im", "log_scale"];

fn z_table(zs: &[Complex64], mut f: impl FnMut(Complex64) -> Outcome<Complex64>) -> Outcome<Table> {
    let mut t = Table::new(Z_COLUMNS);
    for &p in zs {
        let [a, b, c] = value_cells(f(p)?);
        t.push(vec![Cell::Real(p.re), Cell::Real(p.im), a, b, c]);
    }
    Ok(t)
}

fn x_table(xs: &[f64], mut f: impl FnMut(f64) -> Outcome<Complex64>) -> Outcome<Table> {
    let mut t = Table::new(X_COLUMNS);
    for &x in xs {
        let [a, b, c] = value_cells(f(x)?);
        t.push(vec![Cell::Real(x), a, b, c]);
    }
    Ok(t)
}

fn xy_table(xs: &[f64], mut f: impl FnMut(f64, f64) -> Outcome<Complex64>) -> Outcome<Table> {
    let mut t = Table::new(XY_COLUMNS);
    for &x in xs {
        for &y in xs {
            let [a, b, c] = value_cells(f(x, y)?);
            t.push(vec![Cell::Real(x), Cell::Real(y), a, b, c]);
        }
    }
    Ok(t)
}

fn eval(cli: &Cli) -> Outcome<Table> {
    let quantity = cli
        .quantity
        .ok_or_else(|| Failure::usage("--quantity is required for eval"))?;
    let m = cli.m.unwrap_or(0);
    match quantity {
        Quantity::Phi => {
            let n = need_n(cli)?;
            z_table(&z_grid(cli), |p| Ok(phi(m, n, p)))
        }
        Quantity::KernelKm => z_table(&z_grid(cli), |p| Ok(reproducing_kernel(m, p, w(cli)))),
        Quantity::KernelOverlap => {
            let eps = need_positive_eps(cli)?;
            z_table(&z_grid(cli), |p| Ok(overlap(p, w(cli), m, eps)?.value))
        }
        Quantity::Normalization => {
            let eps = need_eps(cli)?;
            z_table(&z_grid(cli), |p| Ok(Complex64::new(normalization_with_eps(m, eps, p)?, 0.0)))
        }
        Quantity::Wavefunction => {
            let label = StateLabel::new(z(cli), m, need_positive_eps(cli)?)?;
            x_table(&x_grid(cli), |x| Ok(wavefunction_closed(x, &label)?))
        }
        Quantity::WavefunctionSeries => {
            let label = StateLabel::new(z(cli), m, need_positive_eps(cli)?)?;
            let trunc = cli.trunc.unwrap_or_else(|| truncation_order(&label));
            let mut t = x_table(&x_grid(cli), |x| Ok(wavefunction_series(x, &label, trunc)?))?;
            t.comment = Some(format!("trunc={trunc}"));
            Ok(t)
        }
        Quantity::HeatKernel => {
            let eps = need_positive_eps(cli)?;
            xy_table(&x_grid(cli), |x, y| Ok(heat_kernel(eps, x, y)?.value))
        }
        Quantity::Mehler => {
            let tau = (-need_positive_eps(cli)?).exp();
            xy_table(&x_grid(cli), |x, y| Ok(mehler_kernel(tau, x, y)?.value))
        }
        Quantity::Sigma => {
            let (n_max, eps) = (need_n(cli)?, need_eps(cli)?);
            let mut t = Table::new(&["n", "re", "im", "log_scale"]);
            for n in 0..=n_max {
                let [a, b, c] = log_cells(log_sigma(m, eps, n)?);
                t.push(vec![Cell::Count(n as u64), a, b, c]);
            }
            Ok(t)
        }
        Quantity::Identity | Quantity::Heat => Err(Failure::usage(
            "--quantity identity and heat are only valid with --command sweep",
        )),
    }
}

fn read_samples(path: &Path, mode: Interpolation) -> Outcome<SampledFunction> {
    let file = File::open(path)
        .with_context(|| format!("cannot read --input {}", path.display()))
        .map_err(Failure::io)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file);
    let (mut grid, mut values) = (Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record
            .with_context(|| format!("malformed CSV in {}", path.display()))
            .map_err(Failure::io)?;
        let fields: Vec<Option<f64>> = record.iter().map(|f| f.parse().ok()).collect();
        match fields[..] {
            // a header row is allowed before the first sample
            _ if line == 0 && fields.iter().any(Option::is_none) => continue,
            [Some(x), Some(re)] => {
                grid.push(x);
                values.push(Complex64::new(re, 0.0));
            }
            [Some(x), Some(re), Some(im)] => {
                grid.push(x);
                values.push(Complex64::new(re, im));
            }
            _ => {
                return Err(Failure::io(anyhow!(
                    "{}: record {} is not x,re[,im]",
                    path.display(),
                    line + 1
                )))
            }
        }
    }
    SampledFunction::new(grid, values, mode)
        .with_context(|| format!("unusable samples in {}", path.display()))
        .map_err(Failure::io)
}

fn transform(cli: &Cli) -> Outcome<Table> {
    let eps = need_eps(cli)?;
    let mut spec = TransformSpec::new(cli.m.unwrap_or(0), eps);
    if let Some(q) = cli.quad_hermite {
        spec = spec.with_quad_order(q);
    }
    let zs = z_grid(cli);
    let (values, source) = match &cli.input {
        Some(path) => {
            let mode = match cli.interp {
                Interp::Linear => Interpolation::Linear,
                Interp::Spline => Interpolation::CubicSpline,
            };
            let samples = read_samples(path, mode)?;
            (transform_values(&spec, &samples, &zs)?, format!("sampled {}", path.display()))
        }
        None => {
            let n = cli
                .n
                .ok_or_else(|| Failure::usage("transform needs --n (eigenstate) or --input (sampled CSV)"))?;
            (transform_values(&spec, &Eigenstate(n), &zs)?, format!("eigenstate {n}"))
        }
    };
    let mut t = Table::new(&["z_re", "z_im", "re", "im"]);
    for (p, v) in zs.iter().zip(&values) {
        t.push(vec![Cell::Real(p.re), Cell::Real(p.im), Cell::Real(v.re), Cell::Real(v.im)]);
    }
    t.comment = Some(format!(
        "m={} eps={} input={} quad_order={} check_order={} tolerance={:e}",
        spec.m,
        spec.eps,
        source,
        spec.quad_order,
        2 * spec.quad_order,
        spec.tolerance
    ));
    Ok(t)
}

fn transform_values(spec: &TransformSpec, f: &impl LineFunction, zs: &[Complex64]) -> Outcome<Vec<Complex64>> {
    Ok(transform_grid(spec, f, zs)?)
}

fn sweep(cli: &Cli) -> Outcome<Table> {
    let quantity = cli
        .quantity
        .ok_or_else(|| Failure::usage("--quantity is required for sweep"))?;
    if cli.eps_list.is_empty() {
        return Err(Failure::usage("sweep needs --eps-list"));
    }
    let m = cli.m.unwrap_or(0);
    let defects = match quantity {
        Quantity::KernelOverlap => overlap_limit_defect(z(cli), w(cli), m, &cli.eps_list)?,
        Quantity::Identity => {
            let n_max = cli.n.unwrap_or(5);
            let (r, a) = identity_matrix_orders(m, n_max);
            let rule = polar_rule(cli.quad_radial.unwrap_or(r), cli.quad_angular.unwrap_or(a))?;
            let report = identity_limit_sweep(m, n_max, &cli.eps_list, &rule, f64::INFINITY)?;
            serde_json::from_value(report.params["defect_per_eps"].clone())
                .map_err(|e| Failure::from(polycs::Error::InvalidSamples(e.to_string())))?
        }
        Quantity::Heat => {
            let adequacy = Adequacy {
                order: cli.quad_hermite.unwrap_or(Adequacy::default().order),
                ..Adequacy::default()
            };
            heat_limit_defect(&Eigenstate(cli.n.unwrap_or(0)), &x_grid(cli), &cli.eps_list, adequacy)?
        }
        _ => {
            return Err(Failure::usage(
                "sweep supports --quantity kernel-overlap, identity or heat",
            ))
        }
    };
    let mut t = Table::new(&["eps", "defect"]);
    for (e, d) in cli.eps_list.iter().zip(defects) {
        t.push(vec![Cell::Real(*e), Cell::Real(d)]);
    }
    Ok(t)
}

fn requests(cli: &Cli) -> Outcome<Vec<SuiteRequest>> {
    let mut out = Vec::new();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read --config {}", path.display()))
            .map_err(Failure::io)?;
        let parsed: Vec<SuiteRequest> = serde_json::from_str(&text)
            .map_err(|e| Failure::usage(format!("--config {}: {e}", path.display())))?;
        out.extend(parsed);
    }
    for name in &cli.suite {
        if name == "all" {
            out.extend(default_config());
        } else {
            out.push(SuiteRequest::new(name.as_str()));
        }
    }
    let flags = CommonOverrides {
        m: cli.m,
        eps: cli.eps,
        trunc: cli.trunc,
        quad_radial: cli.quad_radial,
        quad_angular: cli.quad_angular,
        quad_hermite: cli.quad_hermite,
    };
    for req in &mut out {
        let c = &mut req.common;
        c.m = flags.m.or(c.m);
        c.eps = flags.eps.or(c.eps);
        c.trunc = flags.trunc.or(c.trunc);
        c.quad_radial = flags.quad_radial.or(c.quad_radial);
        c.quad_angular = flags.quad_angular.or(c.quad_angular);
        c.quad_hermite = flags.quad_hermite.or(c.quad_hermite);
    }
    Ok(out)
}

/// Reports go out as JSON lines regardless of `--format`.
fn verify(cli: &Cli) -> Outcome<u8> {
    let reports = run_all(&requests(cli)?)?;
    let mut text = String::new();
    for mut r in reports.iter().cloned() {
        if !cli.timing {
            r.runtime_ms = 0;
        }
        text.push_str(&r.to_json_line());
        text.push('\n');
    }
    write_out(cli, |out| Ok(out.write_all(text.as_bytes())?))?;
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { 1 })
}

fn emit(cli: &Cli, table: &Table) -> Outcome<()> {
    write_out(cli, |out| match cli.format {
        Format::Csv => table.write_csv(out),
        Format::Json => table.write_json(out),
    })
}

fn write_out(cli: &Cli, body: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> Outcome<()> {
    let result = match &cli.out {
        Some(path) => File::create(path)
            .with_context(|| format!("cannot create --out {}", path.display()))
            .and_then(|f| {
                let mut w = BufWriter::new(f);
                body(&mut w)?;
                w.flush()?;
                Ok(())
            }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock).and_then(|_| Ok(lock.flush()?))
        }
    };
    result.map_err(Failure::io)
}
