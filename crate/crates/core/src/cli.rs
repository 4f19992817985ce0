//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for invalid input or configuration, 2 for
//! numerical failure (non-convergence, all blocks degenerate) and for
//! `verify` runs with a failing check.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::algebraic::{aligned_error, recover, recover_masked};
use crate::bench::{bound_phi, bound_psi, c3, parse_snr_grid, run_bench, BenchConfig, Method};
use crate::certificates::{
    build_certificate, check_injectivity_on_t, constrained_entry, nullspace_basis, range_residual,
};
use crate::error::{Error, Result};
use crate::frames::{standard_frame, DUAL_SHIFT};
use crate::io;
use crate::measurements::{add_noise, augmented_signal, build_masks, mask_measure, Ensemble, EnsembleKind};
use crate::numerics::{dft, gaussian_complex, Complex64, ComplexVector, HermitianMatrix, Rng};
use crate::sdp::{solve_phaselift, SdpConfig};

const FORMATS: &str = "\
File formats ('#' starts a comment line):
  signal        one entry per line: 're im'
  measurements  one real per line
  ensemble      header 'kind N L', then L vectors of N lines 're im', each followed by a blank line";

#[derive(Debug, Parser)]
#[command(name = "phaseret", version, about = "Phase retrieval from intensity measurements", after_help = FORMATS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a measurement ensemble to a file.
    GenEnsemble(GenEnsembleArgs),
    /// Measure a signal with an ensemble, optionally adding intensity noise.
    Measure(MeasureArgs),
    /// Recover a signal from intensity measurements.
    Recover(RecoverArgs),
    /// Monte Carlo MSE sweep over an SNR grid; CSV to --out, summary to stdout.
    Bench(BenchArgs),
    /// Run a structural verification suite and print PASS/FAIL lines.
    Verify(VerifyArgs),
    /// Measure through the DFT mask realization and recover from it.
    Masks(MasksArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Phi,
    Psi,
    Random,
}

impl From<KindArg> for EnsembleKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Phi => EnsembleKind::Phi,
            KindArg::Psi => EnsembleKind::Psi,
            KindArg::Random => EnsembleKind::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Algebraic,
    Sdp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Frames,
    Nullspace,
    Certificate,
    Injectivity,
    Masks,
    Bounds,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Suite as ValueEnum>::from_str(s, true).map_err(|_| Error::InvalidConfig(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Args)]
#[command(after_help = FORMATS)]
pub struct GenEnsembleArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Signal dimension N.
    #[arg(long)]
    pub n: usize,
    /// Number of vectors (random ensembles only).
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(after_help = FORMATS)]
pub struct MeasureArgs {
    /// Ensemble file; otherwise built from --kind/--n (--l and --seed for random).
    #[arg(long)]
    pub ensemble: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    /// Signal file.
    #[arg(long)]
    pub signal: PathBuf,
    /// Variance of the additive Gaussian intensity noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise_var: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(after_help = FORMATS)]
pub struct RecoverArgs {
    #[arg(long, value_enum, default_value = "algebraic")]
    pub method: MethodArg,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Ensemble file (needed for random ensembles).
    #[arg(long)]
    pub ensemble: Option<PathBuf>,
    #[arg(long)]
    pub measurements: PathBuf,
    /// Ground-truth signal; prints the aligned error when given.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// SDP residual radius.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output signal file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const BENCH_FORMAT: &str = "\
Output format:
  CSV with header 'snr_db,mse_mean,mse_std,bound_high,bound_low,trials,degenerate',
  one row per SNR point, floats with 9 significant digits";

const VERIFY_FORMAT: &str = "\
Output format:
  one line per check: 'PASS|FAIL <check> <params> <metric>'; exit code 2 if any check fails";

#[derive(Debug, Args)]
#[command(after_help = BENCH_FORMAT)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub n: usize,
    /// Number of random measurement vectors.
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long, value_enum, default_value = "algebraic")]
    pub method: MethodArg,
    /// SNR grid in dB: 'a,b,c' or 'start:step:stop'.
    #[arg(long, default_value = "10:10:50")]
    pub snr: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_x2: f64,
    /// Set x[1] = 1 in every trial.
    #[arg(long)]
    pub fix_first: bool,
    /// Bound parameter mu (default sqrt(sigma_x2)).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Bound parameter gamma.
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// SDP residual radius (default L * noise variance).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores); results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(after_help = VERIFY_FORMAT)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, value_enum, default_value = "phi")]
    pub kind: KindArg,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
#[command(after_help = FORMATS)]
pub struct MasksArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub n: usize,
    /// Signal file; a random signal is drawn when absent.
    #[arg(long)]
    pub signal: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub noise_var: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mask intensities output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::GenEnsemble(a) => gen_ensemble(a, out),
        Command::Measure(a) => measure(a, out),
        Command::Recover(a) => recover_cmd(a, out),
        Command::Bench(a) => bench(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Masks(a) => masks(a, out),
    }
}

fn build_ensemble(kind: EnsembleKind, n: usize, l: Option<usize>, seed: u64) -> Result<Ensemble> {
    match kind {
        EnsembleKind::Random => {
            let l = l.ok_or_else(|| Error::InvalidConfig("random ensembles need --l".into()))?;
            Ensemble::random(&mut Rng::new(seed, 0), n, l)
        }
        k => Ensemble::build(k, n),
    }
}

fn gen_ensemble(a: GenEnsembleArgs, out: &mut dyn Write) -> Result<i32> {
    writeln!(out, "seed: {}", a.seed)?;
    let e = build_ensemble(a.kind.into(), a.n, a.l, a.seed)?;
    io::write_ensemble(&a.out, &e)?;
    writeln!(out, "wrote {} ensemble, N = {}, L = {} to {}", e.kind(), e.dim(), e.len(), a.out.display())?;
    Ok(0)
}

fn load_ensemble(
    path: Option<&Path>,
    kind: Option<KindArg>,
    n: Option<usize>,
    l: Option<usize>,
    seed: u64,
) -> Result<Ensemble> {
    match (path, kind, n) {
        (Some(p), _, _) => io::read_ensemble(p),
        (None, Some(k), Some(n)) => build_ensemble(k.into(), n, l, seed),
        _ => Err(Error::InvalidConfig("give --ensemble or both --kind and --n".into())),
    }
}

fn measure(a: MeasureArgs, out: &mut dyn Write) -> Result<i32> {
    writeln!(out, "seed: {}", a.seed)?;
    let e = load_ensemble(a.ensemble.as_deref(), a.kind, a.n, a.l, a.seed)?;
    let x = io::read_vector(&a.signal)?;
    let clean = e.measure(&x)?;
    // stream 1 keeps the noise apart from a random ensemble drawn with the same seed
    let b = add_noise(&clean, a.noise_var, &mut Rng::new(a.seed, 1))?;
    io::write_intensities(&a.out, &b)?;
    writeln!(out, "wrote {} measurements to {}", b.len(), a.out.display())?;
    Ok(0)
}

fn recover_cmd(a: RecoverArgs, out: &mut dyn Write) -> Result<i32> {
    writeln!(out, "seed: {}", a.seed)?;
    let b = io::read_intensities(&a.measurements)?;
    let mut unconverged = None;
    let x_hat = match a.method {
        MethodArg::Algebraic => {
            let (kind, n) = match (&a.ensemble, a.kind, a.n) {
                (_, Some(k), Some(n)) => (EnsembleKind::from(k), n),
                (Some(p), _, _) => {
                    let e = io::read_ensemble(p)?;
                    (e.kind(), e.dim())
                }
                _ => return Err(Error::InvalidConfig("give --kind and --n".into())),
            };
            let r = recover(kind, &b, n)?;
            writeln!(out, "degenerate blocks: {}", r.degenerate_count)?;
            writeln!(out, "broken links: {}", r.broken.len())?;
            r.x_hat
        }
        MethodArg::Sdp => {
            let e = load_ensemble(a.ensemble.as_deref(), a.kind, a.n, None, a.seed)?;
            let cfg = SdpConfig { max_iter: a.max_iter, tol: a.tol, epsilon: a.epsilon, ..Default::default() };
            let r = solve_phaselift(&e, &b, &cfg)?;
            writeln!(out, "iterations: {}", r.iterations)?;
            writeln!(out, "residual: {:e}", r.residual)?;
            writeln!(out, "rank1_gap: {:e}", r.rank1_gap)?;
            writeln!(out, "converged: {}", r.converged)?;
            if !r.converged {
                unconverged = Some(r.residual);
            }
            r.x_hat
        }
    };
    if let Some(t) = &a.truth {
        let x = io::read_vector(t)?;
        let e = aligned_error(&x, &x_hat)?;
        writeln!(out, "aligned_error: {e:e}")?;
        writeln!(out, "relative_error: {:e}", e / x.norm_sqr())?;
    }
    match &a.out {
        Some(p) => io::write_vector(p, &x_hat)?,
        None => write!(out, "{}", io::format_vector(&x_hat))?,
    }
    match unconverged {
        Some(residual) => Err(Error::NoConvergence { residual }),
        None => Ok(0),
    }
}

fn bench(a: BenchArgs, out: &mut dyn Write) -> Result<i32> {
    writeln!(out, "seed: {}", a.seed)?;
    let method = match a.method {
        MethodArg::Algebraic => Method::Algebraic,
        MethodArg::Sdp => Method::Sdp,
    };
    let cfg = BenchConfig {
        l: a.l,
        snr_grid_db: parse_snr_grid(&a.snr)?,
        trials: a.trials,
        sigma_x2: a.sigma_x2,
        fix_first: a.fix_first,
        mu: a.mu,
        gamma: a.gamma,
        seed: a.seed,
        jobs: a.jobs,
        sdp: SdpConfig { max_iter: a.max_iter, tol: a.tol, ..Default::default() },
        epsilon: a.epsilon,
        ..BenchConfig::new(a.kind.into(), method, a.n)
    };
    let r = run_bench(&cfg)?;
    match &a.out {
        Some(p) => {
            std::fs::write(p, r.to_csv())?;
            write!(out, "{}", r.summary())?;
        }
        None => write!(out, "{}", r.to_csv())?,
    }
    Ok(0)
}

fn masks(a: MasksArgs, out: &mut dyn Write) -> Result<i32> {
    writeln!(out, "seed: {}", a.seed)?;
    let kind = EnsembleKind::from(a.kind);
    let x = match &a.signal {
        Some(p) => io::read_vector(p)?,
        None => gaussian_complex(&mut Rng::new(a.seed, 0), a.n, 1.0),
    };
    if x.len() != a.n {
        return Err(Error::DimensionMismatch { expected: a.n, got: x.len() });
    }
    let set = build_masks(kind, a.n)?;
    let clean = mask_measure(&x, &set)?;
    let b = add_noise(&clean, a.noise_var, &mut Rng::new(a.seed, 1))?;
    let r = recover_masked(&b, &set)?;
    writeln!(out, "mask intensities: {}", b.len())?;
    writeln!(out, "relative_error: {:e}", aligned_error(&x, &r.x_hat)? / x.norm_sqr())?;
    if let Some(p) = &a.out {
        io::write_intensities(p, &b)?;
    }
    Ok(0)
}

/// One verification result.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub pass: bool,
    pub name: String,
    pub params: String,
    pub metric: f64,
}

impl Check {
    fn new(pass: bool, name: &str, params: String, metric: f64) -> Self {
        Self { pass, name: name.to_string(), params, metric }
    }

    pub fn line(&self) -> String {
        format!("{} {} {} {:e}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.params, self.metric)
    }
}

fn random_in_set(kind: EnsembleKind, rng: &mut Rng, n: usize) -> ComplexVector {
    // Gaussian draws land in the set with probability one; redraw on the null event
    loop {
        let x = gaussian_complex(rng, n, 1.0);
        if crate::measurements::in_recoverable_set(kind, &x, 0.0) {
            return x;
        }
    }
}

fn det_kind(kind: EnsembleKind) -> Result<EnsembleKind> {
    match kind {
        EnsembleKind::Random => Err(Error::InvalidConfig("verification suites need kind phi or psi".into())),
        k => Ok(k),
    }
}

/// Runs a verification suite.
pub fn run_suite(suite: Suite, kind: EnsembleKind, n: usize, trials: usize, seed: u64) -> Result<Vec<Check>> {
    let mut rng = Rng::new(seed, 0);
    let mut checks = Vec::new();
    match suite {
        Suite::Frames => {
            let f = standard_frame();
            let mut worst = 0.0_f64;
            for m in 0..4 {
                for k in 0..4 {
                    let (a, b) = (f.vector(m), f.vector(k));
                    let g = (a[0] * b[0].conj() + a[1] * b[1].conj()).norm_sqr();
                    worst = worst.max((g - if m == k { 1.0 } else { DUAL_SHIFT }).abs());
                }
            }
            checks.push(Check::new(worst <= 1e-12, "frame-gram", "K=2".into(), worst));
            let (mut rec, mut dual) = (0.0_f64, 0.0_f64);
            for _ in 0..trials {
                let x = gaussian_complex(&mut rng, 2, 1.0);
                let q = HermitianMatrix::outer(&x);
                let scale = q.frobenius_norm();
                rec = rec.max((&f.reconstruct_rank1(&f.measure([x[0], x[1]])) - &q).frobenius_norm() / scale);
                dual = dual.max((&f.synthesize(&f.dual_coefficients(&q)) - &q).frobenius_norm() / scale);
            }
            checks.push(Check::new(rec <= 1e-12, "frame-reconstruction", format!("trials={trials}"), rec));
            checks.push(Check::new(dual <= 1e-12, "frame-dual-identity", format!("trials={trials}"), dual));
        }
        Suite::Nullspace => {
            let kind = det_kind(kind)?;
            let basis = nullspace_basis(kind, n)?;
            let expect = n * n - (3 * n - 2);
            let params = format!("kind={kind} N={n}");
            checks.push(Check::new(basis.len() == expect, "nullspace-dimension", params.clone(), basis.len() as f64));
            let mut worst = 0.0_f64;
            for z in &basis {
                for r in 0..n {
                    for c in 0..n {
                        if constrained_entry(kind, r, c) {
                            worst = worst.max(z.get(r, c).norm());
                        }
                    }
                }
            }
            checks.push(Check::new(worst <= 1e-10, "nullspace-pattern", params, worst));
        }
        Suite::Certificate => {
            let kind = det_kind(kind)?;
            let e = Ensemble::build(kind, n)?;
            let (mut yx, mut range, mut ratio, mut kdim_ok) = (0.0_f64, 0.0_f64, f64::INFINITY, true);
            for _ in 0..trials {
                let x = random_in_set(kind, &mut rng, n);
                let c = build_certificate(kind, &x)?;
                yx = yx.max(c.kernel_residual(&x)?);
                range = range.max(range_residual(&e, &c.y)?);
                ratio = ratio.min(c.second_smallest_ratio());
                kdim_ok &= c.kernel_dim() == 1;
            }
            let params = format!("kind={kind} N={n} trials={trials}");
            checks.push(Check::new(yx <= 1e-10, "certificate-kernel", params.clone(), yx));
            checks.push(Check::new(range <= 1e-10, "certificate-range", params.clone(), range));
            checks.push(Check::new(kdim_ok, "certificate-kernel-dim", params.clone(), if kdim_ok { 1.0 } else { 0.0 }));
            checks.push(Check::new(ratio >= 1e-8, "certificate-positive", params, ratio));
        }
        Suite::Injectivity => {
            let kind = det_kind(kind)?;
            let mut ok = true;
            let mut min_rank = usize::MAX;
            for _ in 0..trials {
                let x = random_in_set(kind, &mut rng, n);
                let r = check_injectivity_on_t(kind, &x)?;
                ok &= r.injective;
                min_rank = min_rank.min(r.rank);
            }
            checks.push(Check::new(
                ok,
                "injectivity-in-set",
                format!("kind={kind} N={n} trials={trials}"),
                min_rank as f64,
            ));
            let mut y = vec![Complex64::new(1.0, 0.0); n.max(3)];
            match kind {
                EnsembleKind::Phi => y[1] = Complex64::new(0.0, 0.0),
                _ => y[0] = Complex64::new(0.0, 0.0),
            }
            let r = check_injectivity_on_t(kind, &ComplexVector::new(y)?)?;
            checks.push(Check::new(
                !r.injective,
                "injectivity-out-of-set",
                format!("kind={kind} N={}", n.max(3)),
                r.rank as f64,
            ));
        }
        Suite::Masks => {
            let kind = det_kind(kind)?;
            let set = build_masks(kind, n)?;
            let mut worst = 0.0_f64;
            for _ in 0..trials {
                let x = gaussian_complex(&mut rng, n, 1.0);
                let bm = mask_measure(&x, &set)?;
                let ba = match kind {
                    EnsembleKind::Phi => Ensemble::build(kind, n)?.measure(&dft(&x))?,
                    _ => Ensemble::build(kind, n + 1)?.measure(&augmented_signal(&x))?,
                };
                worst = bm.values().iter().zip(ba.values()).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
            }
            checks.push(Check::new(
                worst <= 1e-10,
                "mask-equivalence",
                format!("kind={kind} N={n} trials={trials}"),
                worst,
            ));
        }
        Suite::Bounds => {
            let b = bound_psi(100.0, 1.0, 1.0, 0.5);
            checks.push(Check::new((b.high - 0.72).abs() < 1e-12, "bound-psi-high", "snr=100".into(), b.high));
            checks.push(Check::new(
                (b.threshold_db - 9.5).abs() < 0.1,
                "bound-psi-threshold",
                "sigma_x=1".into(),
                b.threshold_db,
            ));
            let p = bound_phi(100.0, 32, 1.0, 0.5);
            checks.push(Check::new((p - 3.84).abs() < 1e-12, "bound-phi", "N=32 snr=100".into(), p));
            let direct: f64 = (0..9).map(|m| (9 - m) as f64 * 1.2f64.powi(m)).sum::<f64>() * 6.0 / 9.0;
            let rel = (c3(10, 1.0, 0.6) - direct).abs() / direct;
            checks.push(Check::new(rel < 1e-12, "bound-c3-closed-form", "N=10 gamma=0.6".into(), rel));
        }
    }
    Ok(checks)
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    writeln!(out, "seed: {}", a.seed)?;
    let checks = run_suite(a.suite, a.kind.into(), a.n, a.trials, a.seed)?;
    for c in &checks {
        writeln!(out, "{}", c.line())?;
    }
    Ok(if checks.iter().all(|c| c.pass) { 0 } else { 2 })
}
