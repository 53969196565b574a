//! Command-line front end: parse a graph file or pick a named fixture, run
//! one of the analyses, and emit CSV (sweeps) or JSON (reports).
//!
//! Exit codes: 0 success, 1 configuration problem (flags, files, invalid
//! graphs), 2 numerical failure (lost poles, unsettled censuses).

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use resograph::embedded::{perturbed_m, Parity, RationalLengthSpec};
use resograph::graph::{FlowerGraph, MetricGraph};
use resograph::numerics::{
    count_zeros, find_zeros, newton_root_multiplicity, track_pole, FindOptions, NewtonOptions,
    Rect, TrackOptions,
};
use resograph::resonator::Fixture;
use resograph::spectral::{
    incoming_system_det, secular_det, smatrix, smatrix_inverse_det, SecularFamily,
};

#[derive(Parser)]
#[command(
    name = "resograph",
    version,
    about = "Resonances and embedded eigenvalues of quantum graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct SourceArgs {
    /// Graph definition file (JSON).
    #[arg(long, conflicts_with = "fixture")]
    graph: Option<PathBuf>,
    /// Named parameter preset: fig4, fig5, fig6, fig8, fig9, fig10.
    #[arg(long)]
    fixture: Option<String>,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv (sweeps) or json (reports); each command has its natural default.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Rank-criterion multiplicity bounds for eigenvalues protected by
    /// rationally related edge lengths; detunings are read off the lengths.
    Eigen {
        #[command(flatten)]
        source: SourceArgs,
        /// Base length the internal edges are multiples of (default: the
        /// shortest internal edge).
        #[arg(long)]
        l0: Option<f64>,
        /// Asymmetry at which a fixture is instantiated.
        #[arg(long, num_args = 1, default_value_t = 0.0)]
        lambda: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Locate secular-function zeros (with multiplicities) in a rectangle.
    Resonances {
        #[command(flatten)]
        source: SourceArgs,
        /// Census rectangle: re0 re1 im0 im1.
        #[arg(long = "box", num_args = 4, value_names = ["RE0", "RE1", "IM0", "IM1"], allow_hyphen_values = true)]
        region: Option<Vec<f64>>,
        /// Family parameter at which to evaluate.
        #[arg(long, num_args = 1, default_value_t = 0.0)]
        lambda: f64,
        /// Newton/census tolerance.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Continue a resonance pole across an asymmetry range.
    Trajectory {
        #[command(flatten)]
        source: SourceArgs,
        /// Parameter range: a b (fixtures default to 0 and their preset end).
        #[arg(long, num_args = 1..=2, allow_hyphen_values = true)]
        lambda: Option<Vec<f64>>,
        /// Parameter step.
        #[arg(long, default_value_t = 5e-4)]
        step: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Corrector mode: newton polish or pure perturbative stepping.
        #[arg(long, value_enum, default_value_t = Mode::Newton)]
        mode: Mode,
        /// Which starting pole of the fixture to follow (fig10 has two).
        #[arg(long, default_value_t = 0)]
        branch: usize,
        /// Explicit starting momentum (required with --graph): re im.
        #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_hyphen_values = true)]
        start: Option<Vec<f64>>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Scattering matrix sampled along the real momentum axis.
    Smatrix {
        #[command(flatten)]
        source: SourceArgs,
        /// Momentum window on the real axis: re0 re1.
        #[arg(long = "box", num_args = 2, value_names = ["RE0", "RE1"], allow_hyphen_values = true)]
        region: Option<Vec<f64>>,
        /// Sampling step along the axis (default: window/200).
        #[arg(long)]
        step: Option<f64>,
        /// Asymmetry at which a fixture is instantiated.
        #[arg(long, num_args = 1, default_value_t = 0.0)]
        lambda: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Invariant suite: coupling and S-matrix unitarity, secular/scattering
    /// zero equivalence, census residuals, pole-count conservation,
    /// trajectory reversibility.
    Verify {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long = "box", num_args = 4, value_names = ["RE0", "RE1", "IM0", "IM1"], allow_hyphen_values = true)]
        region: Option<Vec<f64>>,
        #[arg(long, num_args = 1, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Newton,
    Perturbative,
}

enum AppError {
    Config(String),
    Numerical(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Config(_) => 1,
            AppError::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Config(m) | AppError::Numerical(m) => m,
        }
    }
}

fn config<E: std::fmt::Display>(e: E) -> AppError {
    AppError::Config(e.to_string())
}

fn numerical<E: std::fmt::Display>(e: E) -> AppError {
    AppError::Numerical(e.to_string())
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("RESOGRAPH_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: RESOGRAPH_THREADS must be a positive integer");
                return ExitCode::from(1);
            }
        }
    }
    // Flag problems are configuration errors (exit 1); clap's default exit
    // code would collide with the numerical-failure code. Help and version
    // requests surface as clap "errors" too and must keep exiting 0.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

/// Resolved data source: a flower graph, and the secular family plus
/// closed-form metadata when a fixture is in play.
struct Source {
    name: String,
    fixture: Option<Fixture>,
    metric: Option<MetricGraph>,
}

impl Source {
    fn resolve(args: &SourceArgs, lambda: f64) -> Result<Source, AppError> {
        match (&args.graph, &args.fixture) {
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
                let metric = MetricGraph::from_json(&text).map_err(config)?;
                Ok(Source {
                    name: path.display().to_string(),
                    fixture: None,
                    metric: Some(metric),
                })
            }
            (None, Some(name)) => {
                let fixture = Fixture::by_name(name).ok_or_else(|| {
                    config(format!(
                        "unknown fixture '{name}' (expected one of fig4, fig5, fig6, fig8, fig9, fig10)"
                    ))
                })?;
                let metric = fixture.graph(lambda).ok();
                Ok(Source {
                    name: name.clone(),
                    fixture: Some(fixture),
                    metric,
                })
            }
            _ => Err(config("exactly one of --graph or --fixture is required")),
        }
    }

    fn flower(&self) -> Result<FlowerGraph, AppError> {
        self.metric
            .as_ref()
            .ok_or_else(|| config("this source does not provide a graph at the given parameter"))?
            .flowerize()
            .map_err(config)
    }

    /// Secular family: the closed form for fixtures, the full determinant
    /// with `1 + lambda` length scaling for graph files.
    fn family(&self) -> Result<SecularFamily, AppError> {
        if let Some(f) = &self.fixture {
            return Ok(f.family());
        }
        Ok(SecularFamily::resolvent(self.flower()?))
    }
}

fn fixture_of(source: &Source) -> Option<&Fixture> {
    source.fixture.as_ref()
}

fn parse_rect(region: &Option<Vec<f64>>, default: Rect) -> Result<Rect, AppError> {
    match region {
        None => Ok(default),
        Some(v) if v.len() == 4 => {
            if v[0] < v[1] && v[2] < v[3] {
                Ok(Rect::new(v[0], v[1], v[2], v[3]))
            } else {
                Err(config("--box needs re0 < re1 and im0 < im1"))
            }
        }
        Some(_) => Err(config("--box needs exactly four numbers")),
    }
}

fn check_tol(tol: f64) -> Result<(), AppError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(config("tolerances must be positive"))
    }
}

fn emit(output: &OutputArgs, content: String) -> Result<(), AppError> {
    match &output.out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| config(format!("cannot write to stdout: {e}")))
        }
    }
}

fn run(command: Command) -> Result<(), AppError> {
    match command {
        Command::Eigen {
            source,
            l0,
            lambda,
            output,
        } => cmd_eigen(source, l0, lambda, output),
        Command::Resonances {
            source,
            region,
            lambda,
            tol,
            output,
        } => cmd_resonances(source, region, lambda, tol, output),
        Command::Trajectory {
            source,
            lambda,
            step,
            tol,
            mode,
            branch,
            start,
            output,
        } => cmd_trajectory(source, lambda, step, tol, mode, branch, start, output),
        Command::Smatrix {
            source,
            region,
            step,
            lambda,
            output,
        } => cmd_smatrix(source, region, step, lambda, output),
        Command::Verify {
            source,
            region,
            lambda,
            tol,
            output,
        } => cmd_verify(source, region, lambda, tol, output),
    }
}

// ---------------------------------------------------------------------------
// eigen

#[derive(Serialize)]
struct EigenReport {
    source: String,
    l0: f64,
    multipliers: Vec<u32>,
    epsilons: Vec<f64>,
    reports: Vec<resograph::embedded::MultiplicityReport>,
}

fn cmd_eigen(
    source: SourceArgs,
    l0: Option<f64>,
    lambda: f64,
    output: OutputArgs,
) -> Result<(), AppError> {
    let src = Source::resolve(&source, lambda)?;
    let flower = src.flower()?;
    let l0 = l0.unwrap_or_else(|| {
        flower
            .lengths
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    });
    if !(l0 > 0.0) || !l0.is_finite() {
        return Err(config(format!("base length l0 = {l0} must be positive")));
    }
    let mut multipliers = Vec::new();
    let mut epsilons = Vec::new();
    for (i, &len) in flower.lengths.iter().enumerate() {
        let ratio = len / l0;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 0.25 {
            return Err(config(format!(
                "edge {i} length {len} is not close to an integer multiple of l0 = {l0}"
            )));
        }
        multipliers.push(n as u32);
        epsilons.push(ratio - n);
    }
    let spec = RationalLengthSpec {
        l0,
        multipliers: multipliers.clone(),
        epsilons: epsilons.clone(),
    };
    let mut reports = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        let k0 = parity.fundamental_k(l0);
        let (_, report) = perturbed_m(&flower.coupling, &spec, k0, parity).map_err(numerical)?;
        reports.push(report);
    }
    let report = EigenReport {
        source: src.name.clone(),
        l0,
        multipliers,
        epsilons,
        reports,
    };
    let text = match output.format.unwrap_or(Format::Json) {
        Format::Json => serde_json::to_string_pretty(&report).map_err(numerical)? + "\n",
        Format::Csv => {
            let mut s = String::from("parity,k0,rank,multiplicity_bound,perturbed\n");
            for r in &report.reports {
                s.push_str(&format!(
                    "{:?},{},{},{},{}\n",
                    r.parity, r.k0, r.rank, r.multiplicity_bound, r.perturbed
                ));
            }
            s
        }
    };
    emit(&output, text)
}

// ---------------------------------------------------------------------------
// resonances

#[derive(Serialize)]
struct ZeroRow {
    re_k: f64,
    im_k: f64,
    multiplicity: usize,
    residual: f64,
}

fn cmd_resonances(
    source: SourceArgs,
    region: Option<Vec<f64>>,
    lambda: f64,
    tol: f64,
    output: OutputArgs,
) -> Result<(), AppError> {
    check_tol(tol)?;
    let src = Source::resolve(&source, lambda)?;
    if src.fixture.is_some() && !(0.0..=1.0).contains(&lambda) {
        return Err(config("fixture families take lambda in [0, 1]"));
    }
    let family = src.family()?;
    let rect = parse_rect(&region, Rect::new(0.5, 12.0, -1.5, 0.02))?;
    let opts = FindOptions {
        newton: NewtonOptions {
            tol,
            ..NewtonOptions::default()
        },
        ..FindOptions::default()
    };
    let f = family.at(lambda);
    let zeros = find_zeros(&f, &rect, &opts).map_err(numerical)?;
    let rows: Vec<ZeroRow> = zeros
        .iter()
        .map(|z| ZeroRow {
            re_k: z.k.re,
            im_k: z.k.im,
            multiplicity: z.multiplicity,
            residual: f(z.k).norm(),
        })
        .collect();
    let text = match output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("re_k,im_k,multiplicity,residual\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    r.re_k, r.im_k, r.multiplicity, r.residual
                ));
            }
            s
        }
        Format::Json => serde_json::to_string_pretty(&rows).map_err(numerical)? + "\n",
    };
    emit(&output, text)
}

// ---------------------------------------------------------------------------
// trajectory

#[allow(clippy::too_many_arguments)]
fn cmd_trajectory(
    source: SourceArgs,
    lambda: Option<Vec<f64>>,
    step: f64,
    tol: f64,
    mode: Mode,
    branch: usize,
    start: Option<Vec<f64>>,
    output: OutputArgs,
) -> Result<(), AppError> {
    check_tol(tol)?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(config("--step must be positive"));
    }
    let src = Source::resolve(&source, 0.0)?;
    let (l0, l1) = match &lambda {
        None => match fixture_of(&src) {
            Some(f) => (0.0, f.lambda_end),
            None => (0.0, 1.0),
        },
        Some(v) if v.len() == 2 => (v[0], v[1]),
        Some(v) => (0.0, v[0]),
    };
    if src.fixture.is_some() && !((0.0..=1.0).contains(&l0) && (0.0..=1.0).contains(&l1)) {
        return Err(config("fixture families take lambda in [0, 1]"));
    }
    let family = src.family()?;
    let k_start = match (&start, fixture_of(&src)) {
        (Some(v), _) => Complex64::new(v[0], v[1]),
        (None, Some(f)) => {
            let starts = f.starts();
            *starts
                .get(branch)
                .ok_or_else(|| config(format!("fixture {} has no branch {branch}", f.name)))?
        }
        (None, None) => {
            return Err(config("--graph trajectories need --start re im"));
        }
    };
    let opts = TrackOptions {
        step,
        newton: NewtonOptions {
            tol,
            ..NewtonOptions::default()
        },
        pure_perturbative: mode == Mode::Perturbative,
        ..TrackOptions::default()
    };
    let rule = |k0: Complex64, lam: f64, eps: f64| family.perturbative_step(k0, lam, eps);
    let traj = track_pole(
        |k, lam| family.eval(k, lam),
        Some(rule),
        k_start,
        l0,
        l1,
        &opts,
    )
    .map_err(numerical)?;
    let text = match output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("lambda,re_k,im_k,residual\n");
            for p in &traj.samples {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    p.lambda, p.k.re, p.k.im, p.residual
                ));
            }
            s
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                lambda: f64,
                re_k: f64,
                im_k: f64,
                residual: f64,
                touches_axis: bool,
            }
            let rows: Vec<Row> = traj
                .samples
                .iter()
                .map(|p| Row {
                    lambda: p.lambda,
                    re_k: p.k.re,
                    im_k: p.k.im,
                    residual: p.residual,
                    touches_axis: p.touches_axis,
                })
                .collect();
            serde_json::to_string_pretty(&rows).map_err(numerical)? + "\n"
        }
    };
    emit(&output, text)
}

// ---------------------------------------------------------------------------
// smatrix

fn cmd_smatrix(
    source: SourceArgs,
    region: Option<Vec<f64>>,
    step: Option<f64>,
    lambda: f64,
    output: OutputArgs,
) -> Result<(), AppError> {
    let src = Source::resolve(&source, lambda)?;
    let flower = src.flower()?;
    if flower.m_leads() == 0 {
        return Err(config("the graph has no leads, so there is no scattering matrix"));
    }
    let (re0, re1) = match &region {
        None => (0.5, 12.0),
        Some(v) if v.len() >= 2 && v[0] < v[1] => (v[0], v[1]),
        Some(_) => return Err(config("--box needs re0 < re1")),
    };
    let step = step.unwrap_or((re1 - re0) / 200.0);
    if !(step > 0.0) {
        return Err(config("--step must be positive"));
    }
    let m = flower.m_leads();
    let n_samples = ((re1 - re0) / step).floor() as usize + 1;
    use rayon::prelude::*;
    let rows: Vec<(f64, Option<nalgebra::DMatrix<Complex64>>)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let k = re0 + i as f64 * step;
            (k, smatrix(Complex64::new(k, 0.0), &flower).ok())
        })
        .collect();
    let text = match output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut header = String::from("k");
            for i in 0..m {
                for j in 0..m {
                    header.push_str(&format!(",s{i}{j}_re,s{i}{j}_im"));
                }
            }
            header.push_str(",unitarity_defect\n");
            let mut s = header;
            for (k, mat) in &rows {
                match mat {
                    Some(mat) => {
                        s.push_str(&format!("{k}"));
                        for i in 0..m {
                            for j in 0..m {
                                s.push_str(&format!(",{},{}", mat[(i, j)].re, mat[(i, j)].im));
                            }
                        }
                        let defect = resograph::linalg::unitarity_defect(mat);
                        s.push_str(&format!(",{defect}\n"));
                    }
                    None => s.push_str(&format!("{k},singular\n")),
                }
            }
            s
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                k: f64,
                s: Option<Vec<Vec<(f64, f64)>>>,
                unitarity_defect: Option<f64>,
            }
            let json_rows: Vec<Row> = rows
                .iter()
                .map(|(k, mat)| Row {
                    k: *k,
                    s: mat.as_ref().map(|m0| {
                        (0..m)
                            .map(|i| (0..m).map(|j| (m0[(i, j)].re, m0[(i, j)].im)).collect())
                            .collect()
                    }),
                    unitarity_defect: mat.as_ref().map(resograph::linalg::unitarity_defect),
                })
                .collect();
            serde_json::to_string_pretty(&json_rows).map_err(numerical)? + "\n"
        }
    };
    emit(&output, text)
}

// ---------------------------------------------------------------------------
// verify

#[derive(Serialize)]
struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn cmd_verify(
    source: SourceArgs,
    region: Option<Vec<f64>>,
    lambda: f64,
    tol: f64,
    output: OutputArgs,
) -> Result<(), AppError> {
    check_tol(tol)?;
    let src = Source::resolve(&source, lambda)?;
    let rect = parse_rect(&region, Rect::new(0.5, 12.0, -1.5, 0.02))?;
    let mut checks = Vec::new();

    let flower = src.flower()?;
    let defect = resograph::linalg::unitarity_defect(&flower.coupling);
    checks.push(Check {
        name: "coupling-unitarity".into(),
        pass: defect < 1e-12,
        detail: format!("max-norm defect {defect:.3e}"),
    });

    if flower.m_leads() > 0 {
        let mut worst = 0.0f64;
        for i in 0..60 {
            let k = Complex64::new(rect.re0 + (rect.re1 - rect.re0) * (i as f64 + 0.5) / 60.0, 0.0);
            if let Ok(s) = smatrix(k, &flower) {
                worst = worst.max(resograph::linalg::unitarity_defect(&s));
            }
        }
        checks.push(Check {
            name: "smatrix-unitarity".into(),
            pass: worst < 1e-10,
            detail: format!("worst defect on the real axis {worst:.3e}"),
        });
    }

    // Zero-set equivalence between the secular determinant and the
    // scattering matrix. Their tie is the factorization
    // `det S * secular / system` being a constant of modulus one, where
    // `system` is the boundary determinant with incoming lead columns; on
    // top of that, every secular zero strictly below the axis must be a
    // landing point for Newton on the inverse scattering determinant. Zeros
    // on the axis itself are eigenvalues the scattering matrix cannot see —
    // its zero there is cancelled by the reflection-symmetric pole — so they
    // are reported but not matched.
    let opts = FindOptions::default();
    let secular_zeros = find_zeros(&|k| secular_det(k, &flower), &rect, &opts);
    if flower.m_leads() > 0 {
        match &secular_zeros {
            Ok(zs) => {
                let factor = |k: Complex64| -> Option<Complex64> {
                    let s = smatrix(k, &flower).ok()?;
                    let b = incoming_system_det(k, &flower);
                    if b.norm() == 0.0 {
                        return None;
                    }
                    Some(resograph::linalg::determinant(&s) * secular_det(k, &flower) / b)
                };
                let mut samples = Vec::new();
                for i in 0..4 {
                    for j in 0..3 {
                        let k = Complex64::new(
                            rect.re0 + rect.width() * (0.17 + 0.22 * i as f64),
                            rect.im0 + rect.height() * (0.19 + 0.27 * j as f64),
                        );
                        if let Some(c) = factor(k) {
                            samples.push(c);
                        }
                    }
                }
                let factor_ok = match samples.first() {
                    Some(&c0) => {
                        (c0.norm() - 1.0).abs() < 1e-8
                            && samples.iter().all(|&c| (c - c0).norm() < 1e-8)
                    }
                    None => false,
                };
                let mut on_axis = 0usize;
                let mut matched = 0usize;
                let mut mismatches = 0usize;
                for z in zs {
                    if z.k.im > -1e-3 {
                        on_axis += 1;
                        continue;
                    }
                    let seed = z.k + Complex64::new(0.6e-4, 0.8e-4);
                    let landed = newton_root_multiplicity(
                        &|k| smatrix_inverse_det(k, &flower),
                        seed,
                        z.multiplicity,
                        &NewtonOptions::default(),
                    );
                    match landed {
                        Ok(w) if (w - z.k).norm() < 1e-6 * z.k.norm().max(1.0) => matched += 1,
                        _ => mismatches += 1,
                    }
                }
                checks.push(Check {
                    name: "secular-scattering-equivalence".into(),
                    pass: factor_ok && mismatches == 0,
                    detail: format!(
                        "factorization constant {}; {} resonances matched, {} mismatched, {} on the axis",
                        if factor_ok { "holds" } else { "violated" },
                        matched,
                        mismatches,
                        on_axis
                    ),
                });
            }
            Err(_) => checks.push(Check {
                name: "secular-scattering-equivalence".into(),
                pass: false,
                detail: "secular zero search failed".into(),
            }),
        }
    }

    // Census exactness against the located zeros. Counting on the big box
    // itself would be meaningless when zeros hug its boundary (see the
    // `count_zeros` documentation), so the censuses run on small boxes
    // centered on a sample of found zeros, sized so that every known zero
    // keeps a safe clearance from the contour; each must return exactly
    // the multiplicity it encloses, with a rounding-level residual.
    {
        let clearance_to_boundary = |z: Complex64, r: &Rect| -> f64 {
            let inside = r.contains(z);
            if inside {
                (z.re - r.re0)
                    .min(r.re1 - z.re)
                    .min(z.im - r.im0)
                    .min(r.im1 - z.im)
            } else {
                let dx = (r.re0 - z.re).max(0.0).max(z.re - r.re1);
                let dy = (r.im0 - z.im).max(0.0).max(z.im - r.im1);
                dx.hypot(dy)
            }
        };
        let (pass, detail) = match &secular_zeros {
            Ok(zs) if zs.is_empty() => match count_zeros(&|k| secular_det(k, &flower), &rect) {
                Ok(res) => (
                    res.count == 0 && res.residual < 0.1,
                    format!(
                        "no zeros located; box census count {} residual {:.3e}",
                        res.count, res.residual
                    ),
                ),
                Err(e) => (false, e.to_string()),
            },
            Ok(zs) => {
                let picks = [0, zs.len() / 2, zs.len() - 1];
                let mut boxes = 0usize;
                let mut failures = Vec::new();
                let mut worst_residual = 0.0f64;
                for &i in picks.iter().take(zs.len().min(3)) {
                    let center = zs[i].k;
                    let sized = [0.3f64, 0.22, 0.38, 0.46].iter().copied().find_map(|side| {
                        let cand = Rect::centered(center, side, side);
                        let clear = zs
                            .iter()
                            .map(|z| clearance_to_boundary(z.k, &cand))
                            .fold(f64::INFINITY, f64::min);
                        (clear >= 0.04).then_some(cand)
                    });
                    let Some(cell) = sized else { continue };
                    boxes += 1;
                    let expected: i64 = zs
                        .iter()
                        .filter(|z| cell.contains(z.k))
                        .map(|z| z.multiplicity as i64)
                        .sum();
                    match count_zeros(&|k| secular_det(k, &flower), &cell) {
                        Ok(res) => {
                            worst_residual = worst_residual.max(res.residual);
                            if res.count != expected || res.residual >= 0.1 {
                                failures.push(format!(
                                    "box at {:.4}{:+.4}i counted {} (residual {:.2e}), expected {}",
                                    center.re, center.im, res.count, res.residual, expected
                                ));
                            }
                        }
                        Err(e) => failures.push(format!(
                            "box at {:.4}{:+.4}i failed: {e}",
                            center.re, center.im
                        )),
                    }
                }
                if boxes == 0 {
                    (false, "no clearance-respecting census box could be placed".into())
                } else if failures.is_empty() {
                    (
                        true,
                        format!(
                            "{boxes} boxes exact, worst residual {worst_residual:.3e}"
                        ),
                    )
                } else {
                    (false, failures.join("; "))
                }
            }
            Err(_) => (false, "secular zero search failed".into()),
        };
        checks.push(Check {
            name: "census-exactness".into(),
            pass,
            detail,
        });
    }

    // Pole-count conservation under a small uniform length detuning, in a
    // window centred on the box.
    {
        let c = rect.center();
        let small = Rect::centered(Complex64::new(c.re, c.im.min(-0.01)), 0.2, 0.2);
        let before = count_zeros(&|k| secular_det(k, &flower), &small);
        let perturbed = flower.scaled_lengths(1e-3);
        let after = count_zeros(&|k| secular_det(k, &perturbed), &small);
        match (before, after) {
            (Ok(b), Ok(a)) => checks.push(Check {
                name: "pole-count-conservation".into(),
                pass: b.count == a.count,
                detail: format!("count {} before vs {} after detuning", b.count, a.count),
            }),
            (b, a) => checks.push(Check {
                name: "pole-count-conservation".into(),
                pass: false,
                detail: format!(
                    "census failed: before {:?}, after {:?}",
                    b.err().map(|e| e.to_string()),
                    a.err().map(|e| e.to_string())
                ),
            }),
        }
    }

    // Reversibility of continuation along the family.
    if let Ok(zeros) = &secular_zeros {
        if let Some(z) = zeros.iter().find(|z| z.multiplicity == 1) {
            let family = src.family()?;
            let t_opts = TrackOptions {
                step: 0.01,
                ..TrackOptions::default()
            };
            let fwd = track_pole(
                |k, lam| family.eval(k, lam),
                Some(|k0: Complex64, lam: f64, eps: f64| family.perturbative_step(k0, lam, eps)),
                z.k,
                lambda,
                lambda + 0.1,
                &t_opts,
            );
            let result = fwd.and_then(|t| {
                track_pole(
                    |k, lam| family.eval(k, lam),
                    Some(|k0: Complex64, lam: f64, eps: f64| {
                        family.perturbative_step(k0, lam, eps)
                    }),
                    t.last().k,
                    lambda + 0.1,
                    lambda,
                    &t_opts,
                )
            });
            match result {
                Ok(back) => {
                    let gap = (back.last().k - z.k).norm();
                    checks.push(Check {
                        name: "trajectory-reversibility".into(),
                        pass: gap < 1e-6,
                        detail: format!("round trip gap {gap:.3e}"),
                    });
                }
                Err(e) => checks.push(Check {
                    name: "trajectory-reversibility".into(),
                    pass: false,
                    detail: e.to_string(),
                }),
            }
        }
    }

    let all_pass = checks.iter().all(|c| c.pass);
    let text = match output.format.unwrap_or(Format::Json) {
        Format::Json => {
            #[derive(Serialize)]
            struct Summary {
                source: String,
                all_pass: bool,
                checks: Vec<Check>,
            }
            serde_json::to_string_pretty(&Summary {
                source: src.name.clone(),
                all_pass,
                checks,
            })
            .map_err(numerical)?
                + "\n"
        }
        Format::Csv => {
            let mut s = String::from("check,pass,detail\n");
            for c in &checks {
                s.push_str(&format!("{},{},\"{}\"\n", c.name, c.pass, c.detail));
            }
            s
        }
    };
    emit(&output, text)?;
    if all_pass {
        Ok(())
    } else {
        Err(AppError::Numerical("one or more verify checks failed".into()))
    }
}
