//! Command-line front end: forward solves, far-field inversion,
//! non-uniqueness constructions and field grids for point potentials.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use pointscatter::error::Error;
use pointscatter::forward::solve_charges;
use pointscatter::invisible::{
    add_invisible_scatterer, add_invisible_scatterer_auto, find_field_zero, fitted_pair, CounterexamplePair, FieldZero,
};
use pointscatter::io::{
    read_dataset, read_potential, resolve_kappa, write_grid, write_json, write_potential, ComplexRepr,
};
use pointscatter::model::{check_shell, sphere_directions, IncidentVector, Potential, Wavenumber};
use pointscatter::recover::{default_probe_directions, recover_potential, recover_source, RecoveredPotential};

/// Exit status when a zero search finds nothing.
const EXIT_NO_ZEROS: u8 = 2;
/// Position tolerance of the recovery self-test.
const SELF_TEST_POSITION: f64 = 1e-6;
/// Strength tolerance of the recovery self-test.
const SELF_TEST_STRENGTH: f64 = 1e-5;

#[derive(Parser)]
#[command(
    name = "pointscatter",
    version,
    about = "Point-scatterer scattering and inverse scattering"
)]
struct Cli {
    /// Relative tolerance of exponential-sum recovery.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Largest number of terms extracted per far-field pattern.
    #[arg(long, global = true, default_value_t = 32)]
    max_terms: usize,
    /// Omit version and timing lines from reports.
    #[arg(long, global = true)]
    no_meta: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Charges and scattering amplitudes for a potential.
    Forward(ForwardArgs),
    /// Recover a potential from a far-field dataset or, with --self-test,
    /// from amplitudes generated by a known potential.
    Recover(RecoverArgs),
    /// Recover point sources from a far-field dataset.
    RecoverSource(IoArgs),
    /// Zeros of the total field in a box.
    Zeros(ZerosArgs),
    /// Build two distinct potentials with equal scattering amplitude.
    Counterexample(CounterexampleArgs),
    /// Total field on a rectangular lattice as CSV.
    Grid(GridArgs),
}

#[derive(Args)]
struct IoArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ForwardArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Incident wave vector, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    k: String,
    /// Outgoing vector on the energy shell; may be repeated.
    #[arg(long, allow_hyphen_values = true)]
    l: Vec<String>,
    /// Number of quasi-uniform outgoing directions added to --l.
    #[arg(long, default_value_t = 0)]
    directions: usize,
}

#[derive(Args)]
struct RecoverArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Treat --input as a potential file, generate its amplitudes and
    /// check that inversion reproduces it.
    #[arg(long)]
    self_test: bool,
    /// Incident wave vector for --self-test.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    /// Text report file; standard error when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ZerosArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, allow_hyphen_values = true)]
    k: String,
    /// Search box as lo1,hi1,lo2,hi2[,lo3,hi3].
    #[arg(long = "box", allow_hyphen_values = true)]
    region: String,
    #[arg(long, default_value_t = 200)]
    grid_n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Two scatterers tuned so that the second one carries no charge.
    Fit,
    /// An extra scatterer placed at a zero of the total field.
    Invisible,
}

#[derive(Args)]
struct CounterexampleArgs {
    #[arg(value_enum)]
    mode: Mode,
    /// Potential file (invisible mode).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Directory receiving nu.json and nu_tilde.json.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    k: String,
    /// Dimension (fit mode); defaults to the length of --k.
    #[arg(long)]
    dimension: Option<usize>,
    /// Offset of the second scatterer, orthogonal to k (fit mode).
    #[arg(long, allow_hyphen_values = true)]
    y2: Option<String>,
    /// Second strengths as re[,im] (fit mode).
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha2_tilde: Option<String>,
    /// Zero of the total field (invisible mode); searched for in --box when
    /// absent.
    #[arg(long, allow_hyphen_values = true)]
    zero: Option<String>,
    #[arg(long = "box", allow_hyphen_values = true)]
    region: Option<String>,
    #[arg(long, default_value_t = 200)]
    grid_n: usize,
    /// Strength of the added scatterer as re[,im]; 1 with automatic
    /// perturbation when absent.
    #[arg(long, allow_hyphen_values = true)]
    alpha_new: Option<String>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, allow_hyphen_values = true)]
    k: String,
    /// Box as x1lo,x1hi,x2lo,x2hi.
    #[arg(long = "box", allow_hyphen_values = true)]
    region: String,
    #[arg(long, default_value_t = 400)]
    nx: usize,
    #[arg(long, default_value_t = 400)]
    ny: usize,
}

fn parse_reals(what: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("{what}: bad number {v:?}"))
        })
        .collect()
}

fn parse_complex(what: &str, s: &str) -> Result<Complex64> {
    match parse_reals(what, s)?.as_slice() {
        [re] => Ok(Complex64::new(*re, 0.0)),
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => bail!("{what}: expected re or re,im"),
    }
}

fn parse_box(s: &str) -> Result<Vec<(f64, f64)>> {
    let v = parse_reals("box", s)?;
    if v.is_empty() || v.len() % 2 != 0 {
        bail!("box: expected lo,hi pairs");
    }
    Ok(v.chunks(2).map(|c| (c[0], c[1])).collect())
}

fn complex_json(c: Complex64) -> serde_json::Value {
    json!([c.re, c.im])
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json(output: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    match output {
        Some(path) => Ok(write_json(path, value)?),
        None => emit(None, &format!("{}\n", serde_json::to_string_pretty(value)?)),
    }
}

struct Meta {
    enabled: bool,
    start: Instant,
}

impl Meta {
    fn header(&self, report: &mut String, command: &str) {
        if self.enabled {
            let _ = writeln!(report, "pointscatter {} {command}", env!("CARGO_PKG_VERSION"));
        }
    }

    fn footer(&self, report: &mut String) {
        if self.enabled {
            let _ = writeln!(report, "elapsed_seconds {:.3}", self.start.elapsed().as_secs_f64());
        }
    }
}

fn load_with_k(input: &Path, k: &str) -> Result<(Potential, Wavenumber, IncidentVector)> {
    let (p, stated) = read_potential(input)?;
    let kv = parse_reals("k", k)?;
    if kv.len() != p.dim() {
        bail!(
            "k has {} components but the potential has dimension {}",
            kv.len(),
            p.dim()
        );
    }
    let (k, kappa) = resolve_kappa(stated, &kv)?;
    Ok((p, kappa, k))
}

fn forward(args: &ForwardArgs) -> Result<()> {
    let (p, kappa, k) = load_with_k(&args.io.input, &args.k)?;
    let state = solve_charges(&p, kappa, &k)?;
    let mut ls = Vec::new();
    for (row, l) in args.l.iter().enumerate() {
        let l = parse_reals("l", l)?;
        if l.len() != p.dim() {
            bail!("l row {row}: expected {} components", p.dim());
        }
        check_shell(&l, kappa).with_context(|| format!("l row {row} is off shell"))?;
        ls.push(l);
    }
    for d in sphere_directions(p.dim(), args.directions) {
        ls.push(d.iter().map(|v| v * kappa.value()).collect());
    }
    let mut rows = Vec::new();
    for (row, l) in ls.iter().enumerate() {
        let a = state.scattering_amplitude(l).with_context(|| format!("l row {row}"))?;
        rows.push(json!({"l": l, "f": complex_json(a.f), "f_plus": complex_json(a.f_plus)}));
    }
    let out = json!({
        "kappa": kappa.value(),
        "k": k.as_slice(),
        "charges": state.charges().as_slice().iter().map(|&q| complex_json(q)).collect::<Vec<_>>(),
        "residual": state.residual(),
        "amplitudes": rows,
    });
    emit_json(args.io.output.as_deref(), &out)
}

fn recovery_report(r: &RecoveredPotential, report: &mut String) {
    let _ = writeln!(report, "probes_used {}", r.probes_used);
    for (i, rep) in r.reports.iter().enumerate() {
        let _ = writeln!(
            report,
            "probe {i} terms {} iterations {} residual {:e} scale {:e} termination {:?}",
            rep.terms.len(),
            rep.iterations,
            rep.residual,
            rep.scale,
            rep.termination
        );
    }
    for (j, d) in r.diagnostics.iter().enumerate() {
        let _ = writeln!(report, "scatterer {j} system_residual {d:e}");
    }
}

fn write_report(path: Option<&Path>, report: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, report).with_context(|| format!("writing {}", p.display())),
        None => {
            eprint!("{report}");
            Ok(())
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Largest position and strength errors after matching each scatterer of
/// `truth` to the nearest recovered one.
fn compare(truth: &Potential, got: &Potential) -> (f64, f64) {
    let mut pos: f64 = 0.0;
    let mut strength: f64 = 0.0;
    for s in truth.scatterers() {
        let best = got.scatterers().iter().min_by(|a, b| {
            let da = dist(&a.position, &s.position);
            let db = dist(&b.position, &s.position);
            da.total_cmp(&db)
        });
        match best {
            Some(b) => {
                pos = pos.max(dist(&b.position, &s.position));
                strength = strength.max((b.strength - s.strength).norm());
            }
            None => {
                pos = f64::INFINITY;
                strength = f64::INFINITY;
            }
        }
    }
    if got.len() != truth.len() {
        pos = f64::INFINITY;
    }
    (pos, strength)
}

fn recover(cli: &Cli, args: &RecoverArgs, meta: &Meta) -> Result<()> {
    let mut report = String::new();
    meta.header(&mut report, "recover");
    let outcome = if args.self_test {
        let k = args.k.as_deref().ok_or_else(|| anyhow!("--self-test needs --k"))?;
        let (truth, kappa, k) = load_with_k(&args.io.input, k)?;
        let probes = default_probe_directions(truth.dim(), kappa);
        let result = recover_potential(
            |kp: &IncidentVector| solve_charges(&truth, kappa, kp)?.amplitude_oracle(),
            kappa,
            &k,
            &probes,
            cli.max_terms,
            cli.tol,
        );
        result.map(|r| {
            let (dp, ds) = compare(&truth, &r.potential);
            let _ = writeln!(report, "self_test position_error {dp:e} strength_error {ds:e}");
            let ok = dp <= SELF_TEST_POSITION && ds <= SELF_TEST_STRENGTH;
            let _ = writeln!(report, "self_test {}", if ok { "PASS" } else { "FAIL" });
            (r, kappa, ok)
        })
    } else {
        let (oracle, kappa, k) = read_dataset(&args.io.input)?;
        let k = k.ok_or_else(|| anyhow!("the dataset needs an incident vector \"k\" to recover strengths"))?;
        let primary = k.clone();
        recover_potential(
            move |kp: &IncidentVector| {
                if kp == &primary {
                    Ok(oracle.clone())
                } else {
                    Err(Error::InvalidInput("the dataset holds one incident direction".into()))
                }
            },
            kappa,
            &k,
            &[],
            cli.max_terms,
            cli.tol,
        )
        .map(|r| (r, kappa, true))
    };
    match outcome {
        Ok((r, kappa, ok)) => {
            recovery_report(&r, &mut report);
            meta.footer(&mut report);
            write_report(args.report.as_deref(), &report)?;
            match &args.io.output {
                Some(path) => write_potential(path, &r.potential, Some(kappa))?,
                None => emit(
                    None,
                    &format!(
                        "{}\n",
                        serde_json::to_string_pretty(&pointscatter::io::PotentialFile::from_potential(
                            &r.potential,
                            Some(kappa)
                        ))?
                    ),
                )?,
            }
            if !ok {
                bail!("self-test tolerances exceeded");
            }
            Ok(())
        }
        Err(e) => {
            let _ = writeln!(report, "error {e}");
            meta.footer(&mut report);
            write_report(args.report.as_deref(), &report)?;
            Err(e.into())
        }
    }
}

fn recover_sources(cli: &Cli, args: &IoArgs) -> Result<()> {
    let (oracle, kappa, _) = read_dataset(&args.input)?;
    let (sources, rep) = recover_source(&oracle, kappa, cli.max_terms, cli.tol)?;
    let out = json!({
        "dimension": oracle.dim(),
        "kappa": kappa.value(),
        "sources": sources
            .iter()
            .map(|s| json!({"y": s.position, "c": ComplexRepr::from(s.coefficient)}))
            .collect::<Vec<_>>(),
        "iterations": rep.iterations,
        "residual": rep.residual,
    });
    emit_json(args.output.as_deref(), &out)
}

fn zeros_table(zeros: &[FieldZero]) -> String {
    let dim = zeros.first().map_or(2, |z| z.point.len());
    let mut text: String = (1..=dim).map(|i| format!("x{i},")).collect();
    text.push_str("residual\n");
    for z in zeros {
        for v in &z.point {
            let _ = write!(text, "{},", pointscatter::io::format_g12(*v));
        }
        let _ = writeln!(text, "{:e}", z.residual);
    }
    text
}

fn zeros(args: &ZerosArgs) -> Result<ExitCode> {
    let (p, kappa, k) = load_with_k(&args.io.input, &args.k)?;
    let region = parse_box(&args.region)?;
    match find_field_zero(&p, kappa, &k, &region, args.grid_n) {
        Ok(z) => {
            emit(args.io.output.as_deref(), &zeros_table(&z))?;
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::NoZeroFound) => {
            eprintln!("no zeros of the total field found in the box");
            Ok(ExitCode::from(EXIT_NO_ZEROS))
        }
        Err(e) => Err(e.into()),
    }
}

fn certificate_report(pair: &CounterexamplePair, meta: &Meta, mode: &str) -> String {
    let mut report = String::new();
    meta.header(&mut report, &format!("counterexample {mode}"));
    let c = &pair.certificate;
    let _ = writeln!(report, "directions {}", c.directions);
    let _ = writeln!(report, "amplitude_discrepancy {:e}", c.amplitude_discrepancy);
    let _ = writeln!(report, "amplitude_scale {:e}", c.amplitude_scale);
    let _ = writeln!(report, "charge_discrepancy {:e}", c.charge_discrepancy);
    if let Some(f) = c.field_discrepancy {
        let _ = writeln!(report, "field_discrepancy {f:e}");
    }
    meta.footer(&mut report);
    report
}

fn counterexample(args: &CounterexampleArgs, meta: &Meta) -> Result<()> {
    let kv = parse_reals("k", &args.k)?;
    let (pair, mode) = match args.mode {
        Mode::Fit => {
            let dim = args.dimension.unwrap_or(kv.len());
            let (k, kappa) = resolve_kappa(None, &kv)?;
            let y2 = parse_reals("y2", args.y2.as_deref().ok_or_else(|| anyhow!("fit needs --y2"))?)?;
            let a2 = parse_complex(
                "alpha2",
                args.alpha2.as_deref().ok_or_else(|| anyhow!("fit needs --alpha2"))?,
            )?;
            let a2t = parse_complex(
                "alpha2-tilde",
                args.alpha2_tilde
                    .as_deref()
                    .ok_or_else(|| anyhow!("fit needs --alpha2-tilde"))?,
            )?;
            (fitted_pair(dim, kappa, &k, y2, a2, a2t)?, "fit")
        }
        Mode::Invisible => {
            let input = args
                .input
                .as_deref()
                .ok_or_else(|| anyhow!("invisible needs --input"))?;
            let (p, kappa, k) = load_with_k(input, &args.k)?;
            let zero = match (&args.zero, &args.region) {
                (Some(z), _) => FieldZero {
                    point: parse_reals("zero", z)?,
                    residual: f64::NAN,
                },
                (None, Some(b)) => find_field_zero(&p, kappa, &k, &parse_box(b)?, args.grid_n)?
                    .into_iter()
                    .next()
                    .expect("a successful search returns at least one zero"),
                (None, None) => bail!("invisible needs --zero or --box"),
            };
            let pair = match &args.alpha_new {
                Some(a) => add_invisible_scatterer(&p, kappa, &k, &zero, parse_complex("alpha-new", a)?)?,
                None => add_invisible_scatterer_auto(&p, kappa, &k, &zero)?,
            };
            (pair, "invisible")
        }
    };
    fs::create_dir_all(&args.output).with_context(|| format!("creating {}", args.output.display()))?;
    write_potential(&args.output.join("nu.json"), &pair.nu, Some(pair.kappa))?;
    write_potential(&args.output.join("nu_tilde.json"), &pair.nu_tilde, Some(pair.kappa))?;
    emit(None, &certificate_report(&pair, meta, mode))
}

fn grid(args: &GridArgs) -> Result<()> {
    let (p, kappa, k) = load_with_k(&args.io.input, &args.k)?;
    let region = parse_box(&args.region)?;
    if region.len() != 2 {
        bail!("grid box needs x1lo,x1hi,x2lo,x2hi");
    }
    let state = solve_charges(&p, kappa, &k)?;
    let mut buf = Vec::new();
    write_grid(&mut buf, &state, region[0], region[1], args.nx, args.ny)?;
    match &args.io.output {
        Some(path) => fs::write(path, buf).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().write_all(&buf)?),
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let meta = Meta {
        enabled: !cli.no_meta,
        start: Instant::now(),
    };
    match &cli.command {
        Command::Forward(a) => forward(a)?,
        Command::Recover(a) => recover(cli, a, &meta)?,
        Command::RecoverSource(a) => recover_sources(cli, a)?,
        Command::Zeros(a) => return zeros(a),
        Command::Counterexample(a) => counterexample(a, &meta)?,
        Command::Grid(a) => grid(a)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
