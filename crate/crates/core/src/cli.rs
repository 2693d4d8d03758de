//! Command-line front end. The binary only forwards its arguments to [`run`].
//!
//! Exit codes: 0 success, 1 a check or computation failed, 2 invalid
//! configuration.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::algebra::{build_fock_ops, verify_truncation_identity, ParaKind, ParaSpec};
use crate::compile::{compile_displacement, compile_displacement_raw, gate_counts, Circuit};
use crate::error::Error;
use crate::experiments::{
    cutoff_study, default_times, run_pb_mandel_sweep, run_pf_evolution, stats_from_marginals, to_csv,
    MitigationOrder, RunOptions, SeriesPoint, Source, Study, DEFAULT_ALPHA, DEFAULT_G, DEFAULT_RESAMPLES,
    DEFAULT_SHOTS,
};
use crate::factor::{factorize, GammaDocument, DEFAULT_TOL};
use crate::linalg::max_abs;
use crate::plot::render_svg;
use crate::qubit_map::{
    build_xy_hamiltonian, commutator_table, generator_family, jacobi_residual, onehot_index, restrict_to_onehot,
    DEFAULT_MAX_QUBITS,
};
use crate::sim::{postselect, postselect_marginals, run_shots, spam_correct, Marginals, NoiseModel, SamplingMode};

/// Largest register for which `verify` builds the Lie-closure and Jacobi
/// checks.
const VERIFY_ALGEBRA_MAX_QUBITS: usize = 6;

#[derive(Debug, Parser)]
#[command(name = "paraosc", version, about = "Para-particle oscillators on a one-hot qubit register")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the algebraic identities for a range of orders.
    Verify(VerifyArgs),
    /// Factorize the displacement into generator exponentials.
    Factorize(FactorizeArgs),
    /// Lower a factorization to RX/RY/RZ/XX gates.
    Compile(CompileArgs),
    /// Run a circuit and sample shots.
    Simulate(SimulateArgs),
    /// Run one of the studies and write a CSV.
    #[command(subcommand)]
    Study(StudyCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Pf,
    Pb,
}

impl From<KindArg> for ParaKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Pf => ParaKind::ParaFermi,
            KindArg::Pb => ParaKind::ParaBose,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    SpamFirst,
    PostselectFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Resample,
    Fixed,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Order, `INT` or inclusive range `a..b`.
    #[arg(long)]
    pub p: String,
    /// Para-Bose cutoff, `INT` or `a..b`.
    #[arg(long)]
    pub np: Option<String>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Report file; printed to stdout as well.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub np: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Seed of the numerical solver's restarts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SpecArgs {
    fn spec(&self) -> Result<ParaSpec, Error> {
        if !self.alpha.is_finite() {
            return Err(Error::InvalidSpec(format!("alpha must be finite, got {}", self.alpha)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidSpec(format!("tolerance must be positive, got {}", self.tol)));
        }
        ParaSpec::new(self.kind.into(), self.p, self.np)
    }
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// JSON output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Skip the gate-cancellation pass.
    #[arg(long)]
    pub no_optimize: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `key=value` noise file (p_prep_flip, eps01, eps10, p_depol_1q, p_depol_2q).
    #[arg(long)]
    pub noise: Option<PathBuf>,
    #[arg(long)]
    pub spam_correct: bool,
    #[arg(long)]
    pub postselect: bool,
    #[arg(long, value_enum, default_value_t = OrderArg::SpamFirst)]
    pub mitigation_order: OrderArg,
    #[arg(long, value_enum, default_value_t = SamplingArg::Resample)]
    pub sampling: SamplingArg,
}

impl NoiseArgs {
    fn noise(&self) -> Result<Option<NoiseModel>, CliError> {
        let Some(path) = &self.noise else {
            return Ok(None);
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(Some(text.parse().map_err(CliError::from_config)?))
    }

    fn sampling(&self) -> SamplingMode {
        match self.sampling {
            SamplingArg::Resample => SamplingMode::ResampleTrajectory,
            SamplingArg::Fixed => SamplingMode::FixedState,
        }
    }

    fn options(&self, resamples: usize, tol: f64) -> Result<RunOptions, CliError> {
        let noise = self.noise()?;
        if self.spam_correct && noise.is_none() {
            return Err(CliError::Config("--spam-correct needs --noise".into()));
        }
        let opts = RunOptions {
            shots: self.shots,
            noise,
            spam_correct: self.spam_correct,
            postselect: self.postselect,
            order: match self.mitigation_order {
                OrderArg::SpamFirst => MitigationOrder::SpamFirst,
                OrderArg::PostselectFirst => MitigationOrder::PostselectFirst,
            },
            sampling: self.sampling(),
            resamples,
            seed: self.seed,
            tol,
        };
        opts.validate().map_err(CliError::from_config)?;
        Ok(opts)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Circuit text file; otherwise the displacement of `--kind/--p/--alpha`
    /// is compiled.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub np: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub run: NoiseArgs,
    /// Shot histogram output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StudyOutput {
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum StudyCommand {
    /// Para-Fermi number evolution under the XY hopping.
    PfEvolution {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = DEFAULT_G)]
        g: f64,
        /// Comma-separated times; default spreads g·t over [0, π] in 25 points.
        #[arg(long)]
        times: Option<String>,
        #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
        resamples: usize,
        #[command(flatten)]
        run: NoiseArgs,
        #[command(flatten)]
        output: StudyOutput,
    },
    /// Mandel Q of displaced para-Bose vacua over the order.
    PbMandel {
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = 2)]
        np: u32,
        #[arg(long, default_value = "1..7")]
        p: String,
        #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
        resamples: usize,
        #[command(flatten)]
        run: NoiseArgs,
        #[command(flatten)]
        output: StudyOutput,
    },
    /// Exact Mandel Q against the cutoff.
    Cutoff {
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value = "1..7")]
        p: String,
        #[arg(long, default_value = "1..5")]
        np: String,
        #[command(flatten)]
        output: StudyOutput,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Exit 2.
    Config(String),
    /// Exit 1.
    Failure(String),
}

impl CliError {
    fn from_config(e: Error) -> Self {
        CliError::Config(e.to_string())
    }

    /// Configuration errors are the ones a module raises from its
    /// preconditions; everything else is a failed computation.
    fn classify(e: Error) -> Self {
        match e {
            Error::InvalidSpec(_)
            | Error::InvalidNoise { .. }
            | Error::SingularConfusion { .. }
            | Error::Insufficient { .. }
            | Error::Parse(_)
            | Error::TooManyQubits { .. } => CliError::Config(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

/// Parses `a..b` (inclusive), `a,b,c` or a single integer.
pub fn parse_int_list(s: &str) -> Result<Vec<u32>, Error> {
    let bad = || Error::Parse(format!("expected INT, a..b or a,b,c; got {s:?}"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(Error::Parse(format!("empty range {s:?}")));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

/// Comma-separated reals.
pub fn parse_float_list(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {t:?} in {s:?}")))
        })
        .collect()
}

/// Writes `contents` next to `path` first, then renames over it.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(p) => Ok(write_atomic(p, contents)?),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// Parses arguments and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    // program name instead of argv[0] so the header does not depend on the install path
    let invocation: Vec<String> = std::iter::once("paraosc".to_string())
        .chain(args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()))
        .collect();
    match dispatch(cli.command, &invocation.join(" ")) {
        Ok(code) => code,
        Err(e) => {
            match &e {
                CliError::Config(m) => eprintln!("error: invalid configuration: {m}"),
                CliError::Failure(m) => eprintln!("error: {m}"),
            }
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, invocation: &str) -> Result<i32, CliError> {
    match command {
        Command::Verify(a) => cmd_verify(&a),
        Command::Factorize(a) => cmd_factorize(&a).map(|_| 0),
        Command::Compile(a) => cmd_compile(&a).map(|_| 0),
        Command::Simulate(a) => cmd_simulate(&a).map(|_| 0),
        Command::Study(s) => cmd_study(s, invocation).map(|_| 0),
    }
}

struct Check {
    spec: String,
    name: &'static str,
    value: String,
    pass: Option<bool>,
}

fn verify_one(spec: &ParaSpec, tol: f64, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let label = spec.to_string();
    let mut push = |name, value: String, pass: Option<bool>| {
        checks.push(Check {
            spec: label.clone(),
            name,
            value,
            pass,
        })
    };
    let report = verify_truncation_identity(spec, tol);
    let name = match spec.kind() {
        ParaKind::ParaFermi => "commutator [A,A+] = 2(p/2-N)R",
        ParaKind::ParaBose => "truncated commutator with beta",
    };
    push(name, format!("residual={:.3e}", report.residual_norm), Some(report.passes));
    if spec.kind() == ParaKind::ParaBose {
        push("beta", format!("beta={}", report.beta), None);
    }

    let q = spec.num_qubits();
    if q > DEFAULT_MAX_QUBITS {
        push("xy block / leakage", "skipped (register too wide)".into(), None);
        return Ok(());
    }
    let h = build_xy_hamiltonian(spec, 1.0).to_matrix().map_err(CliError::classify)?;
    let block = restrict_to_onehot(&h, q).map_err(CliError::classify)?;
    let block_err = max_abs(&(block - build_fock_ops(spec).quadrature()));
    push("xy one-hot block = A + A+", format!("max_abs={block_err:.3e}"), Some(block_err <= tol));
    let leak = (0..q)
        .flat_map(|n| {
            let col = onehot_index(n, q);
            let h = &h;
            (0..h.nrows()).filter(|r| r.count_ones() != 1).map(move |r| h[(r, col)].norm())
        })
        .fold(0.0, f64::max);
    push("xy preserves one-hot subspace", format!("max_abs={leak:.3e}"), Some(leak <= tol));

    if q > VERIFY_ALGEBRA_MAX_QUBITS {
        push("generator closure / jacobi", "skipped (register too wide)".into(), None);
        return Ok(());
    }
    let basis = generator_family(q).map_err(CliError::classify)?;
    let closed = commutator_table(&basis).is_ok();
    push("generator commutators close (+-2i or 0)", format!("{} generators", basis.len()), Some(closed));
    let jac = jacobi_residual(&basis).map_err(CliError::classify)?;
    push("jacobi identity", format!("max_abs={jac:.3e}"), Some(jac <= tol));
    Ok(())
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32, CliError> {
    let kind: ParaKind = a.kind.into();
    let ps = parse_int_list(&a.p).map_err(CliError::from_config)?;
    let nps: Vec<Option<u32>> = match (&a.np, kind) {
        (Some(s), _) => parse_int_list(s).map_err(CliError::from_config)?.into_iter().map(Some).collect(),
        (None, ParaKind::ParaFermi) => vec![None],
        (None, ParaKind::ParaBose) => return Err(CliError::Config("para-Bose verification needs --np".into())),
    };
    if a.tol.is_nan() || a.tol <= 0.0 {
        return Err(CliError::Config(format!("tolerance must be positive, got {}", a.tol)));
    }
    let mut specs = Vec::new();
    for &p in &ps {
        for &np in &nps {
            specs.push(ParaSpec::new(kind, p, np).map_err(CliError::from_config)?);
        }
    }
    let mut checks = Vec::new();
    for spec in &specs {
        verify_one(spec, a.tol, &mut checks)?;
    }
    let mut report = String::new();
    let _ = writeln!(report, "{:<16} {:<42} {:<28} status", "spec", "check", "value");
    for c in &checks {
        let status = match c.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "info",
        };
        let _ = writeln!(report, "{:<16} {:<42} {:<28} {status}", c.spec, c.name, c.value);
    }
    let failed = checks.iter().filter(|c| c.pass == Some(false)).count();
    let _ = writeln!(report, "{} checks, {} failed", checks.iter().filter(|c| c.pass.is_some()).count(), failed);
    print!("{report}");
    if let Some(out) = &a.out {
        write_atomic(out, &report)?;
    }
    Ok(if failed == 0 { 0 } else { 1 })
}

fn cmd_factorize(a: &FactorizeArgs) -> Result<(), CliError> {
    let spec = a.spec.spec().map_err(CliError::from_config)?;
    let (problem, gv, method) = factorize(&spec, a.spec.alpha, a.spec.tol, a.spec.seed).map_err(CliError::classify)?;
    let doc = GammaDocument::new(&problem, &gv, method);
    eprintln!(
        "{spec}: {} generators, {} exponential factors, one-hot residual {:.3e}",
        doc.gammas.len(),
        doc.factor_count,
        doc.residual_onehot
    );
    emit(a.out.as_deref(), &(doc.to_json() + "\n"))
}

fn compile_from_spec(s: &SpecArgs, optimize: bool) -> Result<Circuit, CliError> {
    let spec = s.spec().map_err(CliError::from_config)?;
    let (problem, gv, _) = factorize(&spec, s.alpha, s.tol, s.seed).map_err(CliError::classify)?;
    let circuit = if optimize {
        compile_displacement(&gv, &problem.basis)
    } else {
        compile_displacement_raw(&gv, &problem.basis)
    };
    circuit.map_err(CliError::classify)
}

fn cmd_compile(a: &CompileArgs) -> Result<(), CliError> {
    let circuit = compile_from_spec(&a.spec, !a.no_optimize)?;
    let counts = gate_counts(&circuit);
    eprintln!("{} one-qubit gates, {} XX gates", counts.one_qubit, counts.two_qubit);
    emit(a.out.as_deref(), &circuit.to_text())
}

fn cmd_simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let opts = a.run.options(2, DEFAULT_TOL)?;
    if opts.shots == 0 {
        return Err(CliError::Config("--shots must be at least 1".into()));
    }
    let circuit = match (&a.circuit, a.kind, a.p, a.alpha) {
        (Some(path), None, None, None) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            text.parse::<Circuit>().map_err(CliError::from_config)?
        }
        (None, Some(kind), Some(p), Some(alpha)) => compile_from_spec(
            &SpecArgs {
                kind,
                p,
                np: a.np,
                alpha,
                tol: DEFAULT_TOL,
                seed: 0,
            },
            true,
        )?,
        _ => {
            return Err(CliError::Config(
                "give either --circuit FILE or all of --kind, --p and --alpha".into(),
            ))
        }
    };
    let shots = run_shots(&circuit, opts.shots, opts.noise.as_ref(), opts.seed, opts.sampling).map_err(CliError::classify)?;
    let noise = opts.noise.unwrap_or_default();
    let mut summary = vec![(Source::ShotsRaw, Marginals::from_shots(&shots).map_err(CliError::classify)?)];
    if opts.spam_correct {
        summary.push((Source::ShotsSpam, spam_correct(&shots, &noise).map_err(CliError::classify)?));
    }
    if opts.postselect {
        let m = match (opts.spam_correct, opts.order) {
            (true, MitigationOrder::SpamFirst) => spam_correct(&shots, &noise).and_then(|m| postselect_marginals(&m)),
            (true, MitigationOrder::PostselectFirst) => spam_correct(&postselect(&shots), &noise),
            (false, _) => Marginals::from_shots(&postselect(&shots)),
        };
        match m {
            Ok(m) => summary.push((Source::ShotsPostselected, m)),
            Err(_) => eprintln!("post-selection kept no shots"),
        }
    }
    for (source, m) in &summary {
        let st = stats_from_marginals(*source, m);
        let q = st.mandel_q.map(|q| format!("{q:.6}")).unwrap_or_else(|| "undefined".into());
        let flag = if m.out_of_range { " (quasi-probabilities outside [0,1])" } else { "" };
        eprintln!(
            "{:<20} <N>={:.6} ± {:.6}  <N^2>={:.6}  Q={q}  retained={:.4}{flag}",
            source.as_str(),
            st.mean_n,
            st.stderr_mean,
            st.mean_n2,
            st.retained_fraction
        );
    }
    emit(a.out.as_deref(), &shots.to_text(opts.noise.as_ref()))
}

fn finish_study(
    points: &[SeriesPoint],
    study: Study,
    x_label: &str,
    opts: Option<&RunOptions>,
    invocation: &str,
    output: &StudyOutput,
) -> Result<(), CliError> {
    let mut provenance = vec![
        format!("paraosc {}", env!("CARGO_PKG_VERSION")),
        format!("command: {invocation}"),
        format!("study: {}", study.as_str()),
    ];
    if let Some(o) = opts {
        provenance.push(format!(
            "shots={} seed={} resamples={} spam_correct={} postselect={} mitigation_order={:?} sampling={:?}",
            o.shots, o.seed, o.resamples, o.spam_correct, o.postselect, o.order, o.sampling
        ));
        match &o.noise {
            Some(n) => provenance.push(format!("noise: {}", n.to_text().trim_end().replace('\n', " "))),
            None => provenance.push("noise: none".into()),
        }
        if let Some(c) = points.first().and_then(|p| p.gate_counts) {
            provenance.push(format!("gates: {} one-qubit, {} XX per point", c.one_qubit, c.two_qubit));
        }
    }
    let csv = to_csv(points, &provenance);
    emit(output.out.as_deref(), &csv)?;
    if let Some(svg) = &output.svg {
        write_atomic(svg, &render_svg(points, study.primary(), x_label))?;
    }
    Ok(())
}

fn cmd_study(cmd: StudyCommand, invocation: &str) -> Result<(), CliError> {
    match cmd {
        StudyCommand::PfEvolution {
            p,
            g,
            times,
            resamples,
            run,
            output,
        } => {
            let opts = run.options(resamples, DEFAULT_TOL)?;
            if !(g.is_finite() && g > 0.0) {
                return Err(CliError::Config(format!("--g must be positive, got {g}")));
            }
            let times = match times {
                Some(t) => parse_float_list(&t).map_err(CliError::from_config)?,
                None => default_times(g),
            };
            ParaSpec::para_fermi(p).map_err(CliError::from_config)?;
            let points = run_pf_evolution(p, g, &times, &opts).map_err(CliError::classify)?;
            finish_study(&points, Study::PfEvolution, "g t", Some(&opts), invocation, &output)
        }
        StudyCommand::PbMandel {
            alpha,
            np,
            p,
            resamples,
            run,
            output,
        } => {
            let opts = run.options(resamples, DEFAULT_TOL)?;
            let ps = parse_int_list(&p).map_err(CliError::from_config)?;
            let points = run_pb_mandel_sweep(alpha, &ps, np, &opts).map_err(CliError::classify)?;
            finish_study(&points, Study::PbMandel, "p", Some(&opts), invocation, &output)
        }
        StudyCommand::Cutoff { alpha, p, np, output } => {
            let ps = parse_int_list(&p).map_err(CliError::from_config)?;
            let nps = parse_int_list(&np).map_err(CliError::from_config)?;
            let points = cutoff_study(alpha, &ps, &nps).map_err(CliError::classify)?;
            finish_study(&points, Study::Cutoff, "p", None, invocation, &output)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_lists() {
        assert_eq!(parse_int_list("1..7").unwrap(), (1..=7).collect::<Vec<_>>());
        assert_eq!(parse_int_list("3").unwrap(), vec![3]);
        assert_eq!(parse_int_list("2, 4,6").unwrap(), vec![2, 4, 6]);
        assert!(parse_int_list("5..2").is_err());
        assert!(parse_int_list("a..b").is_err());
        assert!(parse_int_list("").is_err());
    }

    #[test]
    fn float_lists() {
        assert_eq!(parse_float_list("0, 1.5,2e1").unwrap(), vec![0.0, 1.5, 20.0]);
        assert!(parse_float_list("1,,2").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_atomic(&path, "a").unwrap();
        write_atomic(&path, "b").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "b");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
