//! `tlfrac` command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use tlfrac::fraccalc::{dm_sequence, frac_deriv_expansion_left, frac_deriv_expansion_right, frac_integral_expansion};
use tlfrac::oracle::exact_langevin;
use tlfrac::repro::{self, FigureConfig};
use tlfrac::solvers::{assemble, solve, LinearRSProblem, TruncatedProblem, TruncatedSolution, VolterraProblem};
use tlfrac::stieltjes::{rs_integral_with, RsForm};
use tlfrac::{Error, HolderExpansion};

#[derive(Parser)]
#[command(name = "tlfrac", version, about = "Takagi-Landsberg expansions, fractional calculus and truncated integral-equation solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a function into weighted Takagi-Landsberg coefficients.
    Expand(ExpandArgs),
    /// Evaluate an expansion at a point or on a dyadic grid.
    Eval(EvalArgs),
    /// Left Riemann-Liouville integral of an expansion.
    FracInt(FracIntArgs),
    /// Left or right Riemann-Liouville derivative of an expansion.
    FracDeriv(FracDerivArgs),
    /// Riemann-Stieltjes integral of one expansion against another.
    RsIntegral(RsArgs),
    /// Solve `X = x0 + θ I^α X + g` by truncation.
    SolveVolterra(VolterraArgs),
    /// Solve `X = x0 + β ∫X ds + γ ∫X dg` by truncation.
    SolveLinear(LinearArgs),
    /// Divergence diagnostic `d_m` for `m0..=M`.
    DmSequence(DmArgs),
    /// Langevin error table.
    ReproTable1(Table1Args),
    /// Linear-equation error table.
    ReproTable2(Table2Args),
    /// Curves of the exact and truncated solutions for a random driver.
    FigureData(FigureArgs),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Side {
    #[default]
    Left,
    Right,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Form {
    #[default]
    Double,
    Driver,
    Integrand,
}

/// Where an expansion comes from: a JSON file or the Takagi-Landsberg function.
#[derive(Args)]
struct Source {
    /// Expansion JSON file (as written by `expand --format json`).
    #[arg(long, conflicts_with = "takagi")]
    input: Option<PathBuf>,
    /// Use the Takagi-Landsberg function with exponent `--H` and depth `--p`.
    #[arg(long)]
    takagi: bool,
    #[arg(long = "H")]
    hurst: Option<f64>,
    #[arg(long)]
    p: Option<u32>,
}

impl Source {
    fn load(&self) -> Result<HolderExpansion, Error> {
        if let Some(path) = &self.input {
            return HolderExpansion::from_json(&fs::read_to_string(path)?);
        }
        if self.takagi {
            let h = self.hurst.ok_or_else(|| input_error("--takagi needs --H"))?;
            return HolderExpansion::takagi_landsberg(h, self.p.unwrap_or(12));
        }
        Err(input_error("give --input FILE or --takagi --H h"))
    }
}

#[derive(Args)]
struct ExpandArgs {
    /// Text file with `2^q + 1` samples at `j / 2^q` (separated by whitespace or commas).
    #[arg(long, conflicts_with = "takagi")]
    input: Option<PathBuf>,
    #[arg(long)]
    takagi: bool,
    #[arg(long = "H")]
    hurst: f64,
    #[arg(long, default_value_t = 10)]
    p: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, conflicts_with = "grid_level")]
    t: Option<f64>,
    #[arg(long)]
    grid_level: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct FracIntArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    t: f64,
}

#[derive(Args)]
struct FracDerivArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, value_enum, default_value_t)]
    side: Side,
    /// Right end point for `--side right`.
    #[arg(long = "T", default_value_t = 1.0)]
    end: f64,
}

#[derive(Args)]
struct RsArgs {
    /// Integrand expansion JSON.
    #[arg(long, conflicts_with = "f_takagi")]
    f: Option<PathBuf>,
    /// Integrand as Takagi-Landsberg function with this exponent.
    #[arg(long)]
    f_takagi: Option<f64>,
    /// Driver expansion JSON.
    #[arg(long, conflicts_with = "g_takagi")]
    g: Option<PathBuf>,
    /// Driver as Takagi-Landsberg function with this exponent.
    #[arg(long)]
    g_takagi: Option<f64>,
    /// Truncation level of both series (default: the shallower depth).
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    t: f64,
    #[arg(long, value_enum, default_value_t)]
    form: Form,
}

#[derive(Args)]
struct SolveCommon {
    /// Driver expansion JSON; without it the benchmark driver is used.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    p: u32,
    /// Level up to which coefficients are reported (default `p`).
    #[arg(long)]
    ext: Option<u32>,
    /// Initial value (default 0 for the Langevin equation, 1 for the linear one).
    #[arg(long)]
    x0: Option<f64>,
    /// Sample the solution on this grid instead of printing the expansion.
    #[arg(long)]
    grid_level: Option<u32>,
    /// Also write the linear system to `<stem>.csv` and `<stem>.json`.
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct VolterraArgs {
    #[command(flatten)]
    common: SolveCommon,
    #[arg(long = "H")]
    hurst: Option<f64>,
    #[arg(long)]
    alpha: f64,
    /// Defaults to the Langevin benchmark value `Γ(1+H+α)/Γ(1+H)`.
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Args)]
struct LinearArgs {
    #[command(flatten)]
    common: SolveCommon,
    #[arg(long = "H")]
    hurst: Option<f64>,
    #[arg(long, default_value_t = -2.0)]
    beta: f64,
    #[arg(long, default_value_t = 3.0)]
    gamma: f64,
}

#[derive(Args)]
struct DmArgs {
    #[arg(long = "H")]
    hurst: f64,
    #[arg(long, default_value_t = 1)]
    m0: u32,
    #[arg(long, default_value_t = 1)]
    k0: u64,
    #[arg(long = "M", default_value_t = 12)]
    max_level: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct Table1Args {
    /// Largest system level (the table runs `3..=p`).
    #[arg(long, default_value_t = 10)]
    p: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct Table2Args {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Exponent of the random driver.
    #[arg(long = "true-H", default_value_t = 0.51)]
    true_hurst: f64,
    /// Exponents assumed by the solver (comma separated).
    #[arg(long = "H", value_delimiter = ',', default_values_t = [0.51, 0.8])]
    hurst: Vec<f64>,
    #[arg(long, default_value_t = 6)]
    p: u32,
    #[arg(long, default_value_t = 10)]
    grid_level: u32,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value_t = -2.0)]
    beta: f64,
    #[arg(long, default_value_t = 3.0)]
    gamma: f64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn input_error(msg: &str) -> Error {
    Error::Input(msg.to_string())
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_rows<T: serde::Serialize>(rows: &[T], out: Option<&Path>, format: Format) -> Result<(), Error> {
    match (format, out) {
        (Format::Csv, Some(path)) => repro::write_csv(rows, path),
        (Format::Csv, None) => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(std::io::stdout());
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
            Ok(())
        }
        (Format::Json, _) => emit(&(serde_json::to_string_pretty(rows)? + "\n"), out),
    }
}

fn read_samples(path: &Path) -> Result<Vec<f64>, Error> {
    fs::read_to_string(path)?
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| Error::Input(format!("bad sample {s:?}: {e}"))))
        .collect()
}

#[derive(serde::Serialize)]
struct Coefficient {
    term: &'static str,
    level: Option<u32>,
    shift: Option<u64>,
    value: f64,
}

#[derive(serde::Serialize)]
struct Sample {
    t: f64,
    value: f64,
}

fn emit_expansion(x: &HolderExpansion, out: Option<&Path>, format: Format) -> Result<(), Error> {
    match format {
        Format::Json => emit(&(x.to_json()? + "\n"), out),
        Format::Csv => {
            let mut rows = vec![
                Coefficient { term: "f0", level: None, shift: None, value: x.f0() },
                Coefficient { term: "f1", level: None, shift: None, value: x.f1() },
            ];
            rows.extend(x.coefficients().map(|(i, c)| Coefficient {
                term: "c",
                level: Some(i.level()),
                shift: Some(i.shift()),
                value: c,
            }));
            emit_rows(&rows, out, format)
        }
    }
}

fn emit_samples(x: &HolderExpansion, level: u32, out: Option<&Path>, format: Format) -> Result<(), Error> {
    let h = 0.5f64.powi(level as i32);
    let rows: Vec<Sample> = x
        .sample(level)
        .into_iter()
        .enumerate()
        .map(|(j, value)| Sample { t: j as f64 * h, value })
        .collect();
    emit_rows(&rows, out, format)
}

fn cmd_expand(a: &ExpandArgs) -> Result<(), Error> {
    let x = match (&a.input, a.takagi) {
        (Some(path), _) => HolderExpansion::from_dyadic_samples(&read_samples(path)?, a.hurst)?,
        (None, true) => HolderExpansion::takagi_landsberg(a.hurst, a.p)?,
        (None, false) => return Err(input_error("give --input FILE or --takagi")),
    };
    emit_expansion(&x, a.out.as_deref(), a.format)
}

fn cmd_eval(a: &EvalArgs) -> Result<(), Error> {
    let x = a.source.load()?;
    match (a.t, a.grid_level) {
        (Some(t), _) => {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
            }
            emit(&format!("{}\n", num(x.eval(t))), a.out.as_deref())
        }
        (None, Some(level)) => emit_samples(&x, level, a.out.as_deref(), a.format),
        (None, None) => Err(input_error("give --t or --grid-level")),
    }
}

fn cmd_frac_int(a: &FracIntArgs) -> Result<(), Error> {
    let x = a.source.load()?;
    let v = frac_integral_expansion(&x, a.alpha, a.t, x.max_level())?;
    println!("{}", num(v));
    Ok(())
}

fn cmd_frac_deriv(a: &FracDerivArgs) -> Result<(), Error> {
    let x = a.source.load()?;
    let v = match a.side {
        Side::Left => frac_deriv_expansion_left(&x, a.alpha, a.t, x.max_level())?,
        Side::Right => frac_deriv_expansion_right(&x, a.alpha, a.t, a.end, x.max_level())?,
    };
    println!("{}", num(v));
    Ok(())
}

fn expansion_arg(path: &Option<PathBuf>, takagi: Option<f64>, p: u32, name: &str) -> Result<HolderExpansion, Error> {
    match (path, takagi) {
        (Some(path), _) => HolderExpansion::from_json(&fs::read_to_string(path)?),
        (None, Some(h)) => HolderExpansion::takagi_landsberg(h, p),
        (None, None) => Err(Error::Input(format!("give --{name} FILE or --{name}-takagi H"))),
    }
}

fn cmd_rs(a: &RsArgs) -> Result<(), Error> {
    let depth = a.p.unwrap_or(12);
    let f = expansion_arg(&a.f, a.f_takagi, depth, "f")?;
    let g = expansion_arg(&a.g, a.g_takagi, depth, "g")?;
    let p = a.p.unwrap_or(f.max_level().min(g.max_level()));
    let form = match a.form {
        Form::Double => RsForm::Double,
        Form::Driver => RsForm::DriverSeries,
        Form::Integrand => RsForm::IntegrandSeries,
    };
    println!("{}", num(rs_integral_with(form, &f, &g, a.t, p, p)?));
    Ok(())
}

fn report<P: TruncatedProblem>(prob: &P, c: &SolveCommon) -> Result<(), Error> {
    if let Some(stem) = &c.dump {
        assemble(prob, c.p)?.write_dump(stem)?;
    }
    let sol: TruncatedSolution = solve(prob, c.p, c.ext.unwrap_or(c.p))?;
    eprintln!("system level {}, residual {:.3e}", sol.system_level, sol.residual);
    let out = c.out.as_deref();
    match c.grid_level {
        Some(level) => emit_samples(&sol.expansion, level, out, c.format),
        None => emit_expansion(&sol.expansion, out, c.format),
    }
}

fn load_driver(c: &SolveCommon, benchmark: impl FnOnce() -> Result<HolderExpansion, Error>) -> Result<HolderExpansion, Error> {
    match &c.input {
        Some(path) => HolderExpansion::from_json(&fs::read_to_string(path)?),
        None => benchmark(),
    }
}

fn cmd_volterra(a: &VolterraArgs) -> Result<(), Error> {
    let c = &a.common;
    let (g, benchmark_theta) = match &c.input {
        Some(_) => (load_driver(c, || unreachable!())?, None),
        None => {
            let h = a.hurst.ok_or_else(|| input_error("the benchmark driver needs --H"))?;
            let bench = exact_langevin(h, a.alpha, c.p.max(1))?;
            (bench.driver.clone(), Some(bench.theta))
        }
    };
    let theta = a
        .theta
        .or(benchmark_theta)
        .ok_or_else(|| input_error("--theta is required with --input"))?;
    let prob = VolterraProblem::new(c.x0.unwrap_or(0.0), theta, a.alpha, g)?;
    report(&prob, c)
}

fn cmd_linear(a: &LinearArgs) -> Result<(), Error> {
    let c = &a.common;
    let g = load_driver(c, || {
        let h = a.hurst.ok_or_else(|| input_error("the benchmark driver needs --H"))?;
        HolderExpansion::expand(repro::table2_driver(h), h, c.p)
    })?;
    let prob = LinearRSProblem::new(c.x0.unwrap_or(1.0), a.beta, a.gamma, g)?;
    report(&prob, c)
}

fn cmd_dm(a: &DmArgs) -> Result<(), Error> {
    #[derive(serde::Serialize)]
    struct Row {
        m: u32,
        d: f64,
    }
    let d = dm_sequence(a.hurst, a.m0, a.k0, a.max_level)?;
    let rows: Vec<Row> = d.iter().enumerate().map(|(i, &d)| Row { m: a.m0 + i as u32, d }).collect();
    match (a.format, &a.out) {
        (Format::Csv, None) => {
            println!("m,d");
            for r in &rows {
                println!("{},{}", r.m, num(r.d));
            }
            Ok(())
        }
        _ => emit_rows(&rows, a.out.as_deref(), a.format),
    }
}

fn cmd_table1(a: &Table1Args) -> Result<(), Error> {
    if !(3..=10).contains(&a.p) {
        return Err(Error::Domain(format!("--p must lie in 3..=10, got {}", a.p)));
    }
    let mut rows = Vec::new();
    for (col, &(h, alpha)) in repro::TABLE1_COLUMNS.iter().enumerate() {
        for p in 3..=a.p {
            let error = repro::table1_error(h, alpha, p)?;
            let published = repro::TABLE1_PUBLISHED[(p - 3) as usize][col];
            eprintln!(
                "H={h:<5} alpha={alpha:<5} p={p:<2} error={error:.4e} published={published:.2e} rel.dev={:+.3}",
                (error - published) / published
            );
            rows.push(repro::Table1Row {
                p,
                hurst: h,
                alpha,
                error,
                published,
                relative_deviation: (error - published) / published,
            });
        }
    }
    emit_rows(&rows, a.out.as_deref(), a.format)
}

fn cmd_table2(a: &Table2Args) -> Result<(), Error> {
    let rows = repro::table2()?;
    for r in &rows {
        eprintln!(
            "H={:<5} sup={:.5} (published {:.5})  coeff={:.5} (published {:.5})",
            r.hurst, r.sup_error, r.published_sup, r.coeff_deviation, r.published_coeff
        );
    }
    emit_rows(&rows, a.out.as_deref(), a.format)
}

fn cmd_figure(a: &FigureArgs) -> Result<(), Error> {
    let seed = a.seed.ok_or_else(|| input_error("figure-data needs --seed"))?;
    let mut hurst = vec![a.true_hurst];
    hurst.extend(a.hurst.iter().copied().filter(|&h| h != a.true_hurst));
    let cfg = FigureConfig {
        seed,
        true_hurst: a.true_hurst,
        assumed_hurst: hurst,
        driver_depth: 7,
        p: a.p,
        grid_level: a.grid_level,
        x0: a.x0,
        beta: a.beta,
        gamma: a.gamma,
    };
    let runs = repro::figure_data(&cfg)?;
    fs::create_dir_all(&a.out)?;
    #[derive(serde::Serialize)]
    struct Summary {
        seed: u64,
        true_hurst: f64,
        assumed_hurst: f64,
        p: u32,
        sup_error: f64,
        file: String,
    }
    let mut summary = Vec::new();
    for run in &runs {
        let file = format!("figure_H{}.csv", run.assumed_hurst);
        repro::write_csv(&run.curve, &a.out.join(&file))?;
        eprintln!("assumed H={} sup error {:.6}", run.assumed_hurst, run.sup_error);
        summary.push(Summary {
            seed,
            true_hurst: a.true_hurst,
            assumed_hurst: run.assumed_hurst,
            p: a.p,
            sup_error: run.sup_error,
            file,
        });
    }
    repro::write_csv(&summary, &a.out.join("figure_summary.csv"))?;
    let info = json!({ "seed": seed, "runs": summary.len(), "dir": a.out });
    println!("{info}");
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Solver { .. } => 3,
        Error::Io(_) => 4,
        Error::Csv(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Expand(a) => cmd_expand(a),
        Command::Eval(a) => cmd_eval(a),
        Command::FracInt(a) => cmd_frac_int(a),
        Command::FracDeriv(a) => cmd_frac_deriv(a),
        Command::RsIntegral(a) => cmd_rs(a),
        Command::SolveVolterra(a) => cmd_volterra(a),
        Command::SolveLinear(a) => cmd_linear(a),
        Command::DmSequence(a) => cmd_dm(a),
        Command::ReproTable1(a) => cmd_table1(a),
        Command::ReproTable2(a) => cmd_table2(a),
        Command::FigureData(a) => cmd_figure(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
