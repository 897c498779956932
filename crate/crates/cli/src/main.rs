//! Command-line front end: closed-form tables, transforms, certificates, bound evaluation,
//! orthogonality checks, recovery and the acceptance self-test.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypersieve::container::{self, Container};
use hypersieve::hyperbolic::{make_grid, mask_from_primitives};
use hypersieve::recovery::{field_error, l1_recover, synthesize, Atom, SolverParams};
use hypersieve::selftest::{self, SelftestOptions};
use hypersieve::sieve::{
    c_nm, certificate, default_r_scan, double_orthogonality_integral, lieb_constant, local_lieb_bound,
    ramos_tilli_bound, uncertainty_min_measure,
};
use hypersieve::transform::{forward_cwt, FreqSignal};
use hypersieve::wavelet::{basis_coeff, cross_level_table, kernel};
use hypersieve::{AtomDictionary, Complex64, GridSpec, Primitive, RecoveryProblem, UHPoint, WaveletIndex};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "hypersieve", version, about = "Analytic wavelet transforms, sieve certificates and L1 recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration of the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted (required for binary containers).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Multiplies every check tolerance.
    #[arg(long, global = true)]
    tolerance_scale: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// CSV table of W_{ψₙ}ψₘ at the configured points.
    Coeff,
    /// CSV table of the reproducing kernel at the configured points.
    Kernel,
    /// Transform a signal container or an atom and write the field container.
    Cwt,
    /// Concentration certificate of a region as JSON.
    SieveCert,
    /// Closed-form concentration bounds.
    Bounds(BoundsArgs),
    /// Double and cross-level orthogonality checks.
    OrthCheck,
    /// L1 recovery of a dictionary combination from observations outside a mask.
    Recover,
    /// Acceptance criteria.
    Selftest,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    p: f64,
    /// Hyperbolic measure of the region.
    #[arg(long)]
    measure: f64,
    /// Concentration level for the minimal-measure bound.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0} check(s) failed")]
    Failed(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Failed(_) => 1,
        }
    }
}

impl From<hypersieve::Error> for CliError {
    fn from(e: hypersieve::Error) -> Self {
        if e.is_config_error() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let ts = cli.tolerance_scale.unwrap_or(1.0);
    if !(ts > 0.0 && ts.is_finite()) {
        return Err(CliError::Config(format!("tolerance scale must be positive, got {ts}")));
    }
    match &cli.command {
        Command::Coeff => cmd_coeff(cli),
        Command::Kernel => cmd_kernel(cli),
        Command::Cwt => cmd_cwt(cli),
        Command::SieveCert => cmd_sieve_cert(cli),
        Command::Bounds(args) => cmd_bounds(cli, args),
        Command::OrthCheck => cmd_orth_check(cli, ts),
        Command::Recover => cmd_recover(cli),
        Command::Selftest => cmd_selftest(cli),
    }
}

fn load<T: DeserializeOwned>(path: Option<&Path>) -> CliResult<T> {
    let path = path.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::Numerical(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Numerical(format!("stdout: {e}"))),
    }
}

fn emit_json(out: Option<&Path>, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    text.push('\n');
    emit(out, text.as_bytes())
}

fn wavelet(n: u32, alpha: f64) -> CliResult<WaveletIndex> {
    Ok(WaveletIndex::new(n, alpha)?)
}

/// Formats with 17 significant digits.
fn full(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV table whose first `int_columns` columns are integer labels.
struct Table {
    header: &'static str,
    int_columns: usize,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn render(&self) -> String {
        let mut s = format!("{}\n", self.header);
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(i, &v)| if i < self.int_columns { format!("{}", v as i64) } else { full(v) })
                .collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    /// Parses a rendered table back and checks every number bit for bit.
    fn verify(&self, text: &str) -> CliResult<()> {
        let mut lines = text.lines();
        if lines.next() != Some(self.header) {
            return Err(CliError::Numerical("table header did not survive the round trip".into()));
        }
        let parsed: Vec<Vec<f64>> = lines
            .map(|l| l.split(',').map(|c| c.parse::<f64>()).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Numerical(format!("table re-read failed: {e}")))?;
        let same = parsed.len() == self.rows.len()
            && parsed
                .iter()
                .zip(&self.rows)
                .all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        if same {
            Ok(())
        } else {
            Err(CliError::Numerical("table values changed in the round trip".into()))
        }
    }

    fn write(&self, out: Option<&Path>) -> CliResult<()> {
        let text = self.render();
        self.verify(&text)?;
        emit(out, text.as_bytes())?;
        if let Some(path) = out {
            let back = fs::read_to_string(path).map_err(|e| CliError::Numerical(format!("{}: {e}", path.display())))?;
            self.verify(&back)?;
        }
        eprintln!("wrote {} rows", self.rows.len());
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffConfig {
    n: u32,
    m: u32,
    alpha: f64,
    points: Vec<UHPoint>,
}

fn cmd_coeff(cli: &Cli) -> CliResult<()> {
    let cfg: CoeffConfig = load(cli.config.as_deref())?;
    wavelet(cfg.n, cfg.alpha)?;
    let rows = cfg
        .points
        .iter()
        .map(|z| {
            let v = basis_coeff(cfg.n, cfg.m, cfg.alpha, *z);
            vec![cfg.n as f64, cfg.m as f64, cfg.alpha, z.x(), z.s(), v.re, v.im]
        })
        .collect();
    Table {
        header: "n,m,alpha,x,s,re,im",
        int_columns: 2,
        rows,
    }
    .write(cli.out.as_deref())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelConfig {
    n: u32,
    alpha: f64,
    points: Vec<UHPoint>,
    /// Second argument of the kernel; the diagonal when omitted.
    #[serde(default)]
    at: Option<UHPoint>,
}

fn cmd_kernel(cli: &Cli) -> CliResult<()> {
    let cfg: KernelConfig = load(cli.config.as_deref())?;
    let w = wavelet(cfg.n, cfg.alpha)?;
    let rows = cfg
        .points
        .iter()
        .map(|&z| {
            let zw = cfg.at.unwrap_or(z);
            let v = kernel(w, z, zw);
            vec![cfg.n as f64, cfg.n as f64, cfg.alpha, z.x(), z.s(), zw.x(), zw.s(), v.re, v.im]
        })
        .collect();
    Table {
        header: "n,m,alpha,x,s,x_w,s_w,re,im",
        int_columns: 2,
        rows,
    }
    .write(cli.out.as_deref())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum SignalSource {
    File(PathBuf),
    Atom { m: u32, alpha: f64, at: UHPoint },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CwtConfig {
    signal: SignalSource,
    n: u32,
    alpha: f64,
    #[serde(default)]
    grid: Option<GridSpec>,
}

fn cmd_cwt(cli: &Cli) -> CliResult<()> {
    let cfg: CwtConfig = load(cli.config.as_deref())?;
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| CliError::Config("cwt writes a binary container and needs --out".into()))?;
    let signal = match &cfg.signal {
        SignalSource::File(path) => match container::read_path(path)? {
            Container::Signal(s) => s,
            _ => return Err(CliError::Config(format!("{} does not hold a signal", path.display()))),
        },
        SignalSource::Atom { m, alpha, at } => FreqSignal::default_atom(*m, *alpha, *at)?,
    };
    let grid = make_grid(cfg.grid.unwrap_or_default())?;
    let field = forward_cwt(&signal, wavelet(cfg.n, cfg.alpha)?, &grid)?;
    container::save_field(out, &field)?;
    eprintln!(
        "wrote {} cells to {}, boundary mass fraction {:.3e}",
        field.values().len(),
        out.display(),
        field.tail_mass()
    );
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SieveConfig {
    grid: GridSpec,
    primitives: Vec<Primitive>,
    n: u32,
    alpha: f64,
    p: f64,
    #[serde(default)]
    r_scan: Option<Vec<f64>>,
}

fn cmd_sieve_cert(cli: &Cli) -> CliResult<()> {
    let cfg: SieveConfig = load(cli.config.as_deref())?;
    let grid = make_grid(cfg.grid)?;
    let mask = mask_from_primitives(&grid, &cfg.primitives)?;
    let scan = cfg.r_scan.unwrap_or_else(default_r_scan);
    let cert = certificate(&mask, wavelet(cfg.n, cfg.alpha)?, cfg.p, &scan)?;
    eprintln!(
        "bound {:.6} at R* {:.4} ({:?}), recovery certificate {}",
        cert.bound,
        cert.r_star,
        cert.sound.status,
        if cert.recovery_ok { "holds" } else { "fails" }
    );
    emit_json(cli.out.as_deref(), &cert)
}

#[derive(Serialize)]
struct BoundsReport {
    alpha: f64,
    p: f64,
    measure_h: f64,
    ramos_tilli: f64,
    lieb: f64,
    local_lieb: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    uncertainty_min_measure: Option<f64>,
}

fn cmd_bounds(cli: &Cli, args: &BoundsArgs) -> CliResult<()> {
    let report = BoundsReport {
        alpha: args.alpha,
        p: args.p,
        measure_h: args.measure,
        ramos_tilli: ramos_tilli_bound(args.measure, args.alpha, args.p)?,
        lieb: lieb_constant(args.alpha, args.p)?,
        local_lieb: local_lieb_bound(args.measure, args.alpha, args.p)?,
        epsilon: args.epsilon,
        uncertainty_min_measure: args
            .epsilon
            .map(|e| uncertainty_min_measure(e, args.alpha, args.p))
            .transpose()?,
    };
    eprintln!("ramos_tilli = {}", report.ramos_tilli);
    emit_json(cli.out.as_deref(), &report)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DoubleSweep {
    n: Vec<u32>,
    m: Vec<u32>,
    k: Vec<u32>,
    alpha: Vec<f64>,
    r: Vec<f64>,
    #[serde(default = "double_tolerance")]
    tolerance: f64,
}

fn double_tolerance() -> f64 {
    1e-7
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CrossSweep {
    b: f64,
    levels: Vec<u32>,
    signals: Vec<u32>,
    signal_alpha: f64,
    #[serde(default)]
    grid: Option<GridSpec>,
    #[serde(default = "cross_tolerance")]
    tolerance: f64,
    #[serde(default = "candidate_tolerance")]
    candidate_tolerance: f64,
}

fn cross_tolerance() -> f64 {
    1e-4
}

fn candidate_tolerance() -> f64 {
    1e-3
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OrthConfig {
    #[serde(default)]
    double: Option<DoubleSweep>,
    #[serde(default)]
    cross_level: Option<CrossSweep>,
}

#[derive(Serialize)]
struct DoubleRow {
    n: u32,
    m: u32,
    k: u32,
    alpha: f64,
    r: f64,
    value: Complex64,
    expected: f64,
    /// Error relative to `sqrt(C_nm C_nk)`.
    error: f64,
    passed: bool,
}

#[derive(Serialize)]
struct CrossRow {
    n: u32,
    m: u32,
    k: u32,
    l: u32,
    value: Complex64,
    expected_zero: bool,
    candidate_isometry: f64,
    candidate_alternative: f64,
    /// Name of the candidate constant the diagonal value matches.
    matched: Option<&'static str>,
    error: f64,
    passed: bool,
}

#[derive(Serialize)]
struct OrthReport {
    passed: bool,
    failures: usize,
    double: Vec<DoubleRow>,
    cross_level: Vec<CrossRow>,
}

fn double_rows(sweep: &DoubleSweep, ts: f64) -> CliResult<Vec<DoubleRow>> {
    let mut rows = Vec::new();
    for &alpha in &sweep.alpha {
        for &r in &sweep.r {
            for &n in &sweep.n {
                for &m in &sweep.m {
                    for &k in &sweep.k {
                        let value = double_orthogonality_integral(n, m, k, alpha, r)?;
                        let (cm, ck) = (c_nm(n, m, alpha, r)?, c_nm(n, k, alpha, r)?);
                        let expected = if m == k { cm } else { 0.0 };
                        let error = (value - expected).norm() / (cm * ck).sqrt();
                        rows.push(DoubleRow {
                            n,
                            m,
                            k,
                            alpha,
                            r,
                            value,
                            expected,
                            error,
                            passed: error <= sweep.tolerance * ts,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn cross_rows(sweep: &CrossSweep, ts: f64) -> CliResult<Vec<CrossRow>> {
    let grid = make_grid(sweep.grid.unwrap_or_default())?;
    let table = cross_level_table(sweep.b, &sweep.levels, &sweep.signals, sweep.signal_alpha, &grid)?;
    Ok(table
        .into_iter()
        .map(|e| {
            let r = e.report;
            let (ei, ea) = r.candidate_errors();
            let (matched, error, passed) = if r.expected_zero {
                let err = r.value.norm();
                (None, err, err <= sweep.tolerance * ts)
            } else {
                let tol = sweep.candidate_tolerance * ts;
                let matched = if ei <= tol {
                    Some("4pi/(2B-2n-1)")
                } else if ea <= tol {
                    Some("2/(2B-2n-1)")
                } else {
                    None
                };
                (matched, ei.min(ea), matched.is_some())
            };
            CrossRow {
                n: e.n,
                m: e.m,
                k: e.k,
                l: e.l,
                value: r.value,
                expected_zero: r.expected_zero,
                candidate_isometry: r.candidate_isometry,
                candidate_alternative: r.candidate_alternative,
                matched,
                error,
                passed,
            }
        })
        .collect())
}

fn cmd_orth_check(cli: &Cli, ts: f64) -> CliResult<()> {
    let cfg: OrthConfig = load(cli.config.as_deref())?;
    if cfg.double.is_none() && cfg.cross_level.is_none() {
        return Err(CliError::Config("orth-check needs a double or cross_level sweep".into()));
    }
    let double = cfg.double.as_ref().map(|s| double_rows(s, ts)).transpose()?.unwrap_or_default();
    let cross_level = cfg.cross_level.as_ref().map(|s| cross_rows(s, ts)).transpose()?.unwrap_or_default();
    let failures = double.iter().filter(|r| !r.passed).count() + cross_level.iter().filter(|r| !r.passed).count();
    if let Some(worst) = double.iter().map(|r| r.error).reduce(f64::max) {
        eprintln!("double orthogonality: {} integrals, worst {worst:.3e}", double.len());
    }
    for r in cross_level.iter().filter(|r| !r.expected_zero && r.k == 0) {
        eprintln!(
            "level {}: diagonal {:.9} matches {} (4pi/(2B-2n-1) = {:.9}, 2/(2B-2n-1) = {:.9})",
            r.n,
            r.value.re,
            r.matched.unwrap_or("neither"),
            r.candidate_isometry,
            r.candidate_alternative
        );
    }
    let report = OrthReport {
        passed: failures == 0,
        failures,
        double,
        cross_level,
    };
    emit_json(cli.out.as_deref(), &report)?;
    if failures > 0 {
        return Err(CliError::Failed(failures));
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum DictionarySpec {
    Lattice { m_max: u32, spacing: f64, margin: f64 },
    Atoms(Vec<Atom>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecoverConfig {
    grid: GridSpec,
    n: u32,
    alpha: f64,
    dictionary: DictionarySpec,
    /// The unobserved region.
    primitives: Vec<Primitive>,
    #[serde(default)]
    truth: Option<Vec<Complex64>>,
    /// Field container whose values outside the region are the observations.
    #[serde(default)]
    observations: Option<PathBuf>,
    #[serde(default)]
    solver: SolverParams,
    /// Where to write the reconstructed field container.
    #[serde(default)]
    field_out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RecoverReport {
    atoms: Vec<Atom>,
    coeffs: Vec<Complex64>,
    objective: f64,
    constraint_residual: f64,
    iterations: usize,
    converged: bool,
    nullity: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    field_error: Option<f64>,
}

fn cmd_recover(cli: &Cli) -> CliResult<()> {
    let cfg: RecoverConfig = load(cli.config.as_deref())?;
    let grid = make_grid(cfg.grid)?;
    let w = wavelet(cfg.n, cfg.alpha)?;
    let dict = match cfg.dictionary {
        DictionarySpec::Lattice { m_max, spacing, margin } => AtomDictionary::lattice(&grid, w, m_max, spacing, margin)?,
        DictionarySpec::Atoms(atoms) => AtomDictionary::new(atoms, w)?,
    };
    let mask = mask_from_primitives(&grid, &cfg.primitives)?;
    let problem = match (&cfg.truth, &cfg.observations) {
        (Some(truth), None) => RecoveryProblem::from_truth(dict, mask, truth, cfg.solver)?,
        (None, Some(path)) => {
            let field = match container::read_path(path)? {
                Container::Field(f) => f,
                _ => return Err(CliError::Config(format!("{} does not hold a field", path.display()))),
            };
            if field.grid().spec() != grid.spec() {
                return Err(CliError::Config("observation field lives on a different grid".into()));
            }
            let obs = mask
                .indicator()
                .iter()
                .zip(field.values())
                .filter(|(m, _)| !**m)
                .map(|(_, v)| *v)
                .collect();
            RecoveryProblem::new(dict, mask, obs, cfg.solver)?
        }
        _ => return Err(CliError::Config("give exactly one of truth or observations".into())),
    };
    let result = l1_recover(&problem)?;
    let recovered = synthesize(&result.coeffs, &problem)?;
    let error = cfg
        .truth
        .as_ref()
        .map(|t| field_error(&recovered, &synthesize(t, &problem)?))
        .transpose()?;
    if let Some(path) = &cfg.field_out {
        container::save_field(path, &recovered)?;
    }
    eprintln!(
        "objective {:.6e}, residual {:.3e}, nullity {}, converged {}",
        result.objective, result.constraint_residual, result.nullity, result.converged
    );
    emit_json(
        cli.out.as_deref(),
        &RecoverReport {
            atoms: problem.dictionary().atoms().to_vec(),
            coeffs: result.coeffs,
            objective: result.objective,
            constraint_residual: result.constraint_residual,
            iterations: result.iterations,
            converged: result.converged,
            nullity: result.nullity,
            field_error: error,
        },
    )
}

fn cmd_selftest(cli: &Cli) -> CliResult<()> {
    let mut opts: SelftestOptions = match &cli.config {
        Some(path) => load(Some(path))?,
        None => SelftestOptions::default(),
    };
    if let Some(ts) = cli.tolerance_scale {
        opts.tolerance_scale = ts;
    }
    if let Some(bad) = opts.criteria.iter().find(|id| !selftest::CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(CliError::Config(format!("no criterion {bad}")));
    }
    let reports: Vec<_> = opts
        .criteria
        .iter()
        .map(|&id| {
            let r = selftest::run_criterion(id, &opts);
            eprintln!("{}", r.line());
            r
        })
        .collect();
    let failures = reports.iter().filter(|r| !r.passed).count();
    emit_json(cli.out.as_deref(), &reports)?;
    if failures > 0 {
        return Err(CliError::Failed(failures));
    }
    Ok(())
}
