//! Monte Carlo noise sweeps: normalized MSE against SNR with the analytic
//! bounds alongside.
//!
//! Trial `t` draws its signal (and, for random ensembles, its measurement
//! vectors) from stream `t << 16` of the master seed, and the noise for SNR
//! point `s` from stream `(t << 16) | (s + 1)`. Results are therefore
//! identical for any number of worker threads.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::algebraic::{aligned_error, recover};
use crate::error::{Error, Result};
use crate::measurements::{add_noise, deterministic_len, Ensemble, EnsembleKind};
use crate::numerics::{gaussian_complex, Complex64, Rng};
use crate::sdp::{solve_with, AffineProjector, SdpConfig};

pub const CSV_HEADER: &str = "snr_db,mse_mean,mse_std,bound_high,bound_low,trials,degenerate";

/// Stream reserved for the measurement vectors of random ensembles.
const ENSEMBLE_STREAM: u64 = 0xffff;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Algebraic,
    Sdp,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "algebraic" => Ok(Method::Algebraic),
            "sdp" => Ok(Method::Sdp),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub kind: EnsembleKind,
    /// Number of measurements for random ensembles.
    pub l: Option<usize>,
    pub method: Method,
    pub n: usize,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub sigma_x2: f64,
    /// Overwrite `x[1] = 1` in every trial.
    pub fix_first: bool,
    /// Bound parameter, defaults to `sqrt(sigma_x2)`.
    pub mu: Option<f64>,
    pub gamma: f64,
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    pub sdp: SdpConfig,
    /// Residual radius for the SDP; defaults to `L sigma_nu^2`.
    pub epsilon: Option<f64>,
}

impl BenchConfig {
    pub fn new(kind: EnsembleKind, method: Method, n: usize) -> Self {
        Self {
            kind,
            l: None,
            method,
            n,
            snr_grid_db: vec![10.0, 20.0, 30.0, 40.0, 50.0],
            trials: 1000,
            sigma_x2: 1.0,
            fix_first: false,
            mu: None,
            gamma: 0.5,
            seed: 0,
            jobs: 0,
            sdp: SdpConfig::default(),
            epsilon: None,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu.unwrap_or_else(|| self.sigma_x2.sqrt())
    }

    /// Number of measurements per trial.
    pub fn measurement_count(&self) -> usize {
        match self.kind {
            EnsembleKind::Random => self.l.unwrap_or(0),
            _ => deterministic_len(self.n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::InvalidConfig("SNR grid is empty".into()));
        }
        if self.snr_grid_db.len() >= ENSEMBLE_STREAM as usize {
            return Err(Error::InvalidConfig("SNR grid is too long".into()));
        }
        if let Some(v) = self.snr_grid_db.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("SNR values must be finite, got {v}")));
        }
        if !(self.sigma_x2 > 0.0 && self.sigma_x2.is_finite()) {
            return Err(Error::InvalidConfig(format!("sigma_x2 must be positive, got {}", self.sigma_x2)));
        }
        if !(self.mu() > 0.0 && self.mu().is_finite()) || !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig("mu and gamma must be positive".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidDimension(format!("bench needs N >= 2, got {}", self.n)));
        }
        match (self.kind, self.method) {
            (EnsembleKind::Random, Method::Algebraic) => {
                return Err(Error::InvalidConfig("algebraic recovery needs the phi or psi ensemble".into()))
            }
            (EnsembleKind::Random, _) if self.l.unwrap_or(0) < 1 => {
                return Err(Error::InvalidConfig("random ensembles need --l".into()))
            }
            _ => {}
        }
        if self.method == Method::Sdp {
            self.sdp.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPoint {
    pub snr_db: f64,
    pub mse_mean: f64,
    pub mse_std: f64,
    pub bound_high: f64,
    pub bound_low: f64,
    pub trials: usize,
    pub degenerate: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub points: Vec<BenchPoint>,
    /// Fraction of trials with `|x[1]|^2 < sigma_x2`, i.e. outside the
    /// `mu^2 = sigma_x2` set the bounds are calibrated for.
    pub small_hub_fraction: f64,
}

impl BenchResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_g(p.snr_db),
                fmt_g(p.mse_mean),
                fmt_g(p.mse_std),
                fmt_g(p.bound_high),
                fmt_g(p.bound_low),
                p.trials,
                p.degenerate
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>8} {:>12} {:>12} {:>12} {:>8}", "snr_db", "mse_db", "bound_db", "mse_std", "degen");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{:>8.2} {:>12.3} {:>12.3} {:>12.4e} {:>8}",
                p.snr_db,
                10.0 * p.mse_mean.log10(),
                10.0 * p.bound_high.log10(),
                p.mse_std,
                p.degenerate
            );
        }
        let _ = writeln!(out, "fraction of trials with |x[1]|^2 < sigma_x^2: {:.4}", self.small_hub_fraction);
        out
    }
}

/// `%.9g`.
pub fn fmt_g(v: f64) -> String {
    const PREC: i32 = 9;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (PREC - 1) as usize, v);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..PREC).contains(&exp) {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (PREC - 1 - exp) as usize, v)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiBound {
    /// `4 C_1 / SNR` with `C_1 = 12 (1 + gamma) / mu^2`.
    pub high: f64,
    /// `2 C_2 / (sigma_x sqrt(SNR))` with `C_2 = 14 sqrt(3/2) (1 + gamma)`.
    pub low: f64,
    /// SNR above which the high-SNR line applies,
    /// `SNR >= 18 sigma_x^2 / (sigma_x^2 + mu^2)`.
    pub threshold_db: f64,
    /// SNR where the two lines intersect.
    pub crossing_db: f64,
}

/// Normalized-MSE bounds for the hub ensemble, using `E||nu||^2 = L sigma_nu^2`
/// with `L / N -> 4`.
pub fn bound_psi(snr: f64, sigma_x2: f64, mu: f64, gamma: f64) -> PsiBound {
    let c1 = 12.0 * (1.0 + gamma) / (mu * mu);
    let c2 = 14.0 * 1.5f64.sqrt() * (1.0 + gamma);
    let sigma_x = sigma_x2.sqrt();
    let high = 4.0 * c1 / snr;
    let low = 2.0 * c2 / (sigma_x * snr.sqrt());
    let threshold = 18.0 * sigma_x2 / (sigma_x2 + mu * mu);
    let crossing = (4.0 * c1 * sigma_x / (2.0 * c2)).powi(2);
    PsiBound { high, low, threshold_db: 10.0 * threshold.log10(), crossing_db: 10.0 * crossing.log10() }
}

/// `C_3(N) = 6 / (mu^2 (N - 1)) * sum_{m=0}^{N-2} (N - m - 1) (2 gamma)^m`.
pub fn c3(n: usize, mu: f64, gamma: f64) -> f64 {
    let nf = n as f64;
    let g = 2.0 * gamma;
    let scale = 6.0 / (mu * mu);
    if gamma == 0.5 {
        return 3.0 * nf / (mu * mu);
    }
    if (g - 1.0).abs() < 1e-4 {
        // the closed form cancels catastrophically here
        let s: f64 = (0..n - 1).map(|m| (nf - m as f64 - 1.0) * g.powi(m as i32)).sum();
        return scale * s / (nf - 1.0);
    }
    scale / ((g - 1.0) * (g - 1.0)) * (g.powi(n as i32) - g * nf + nf - 1.0) / (nf - 1.0)
}

/// Normalized-MSE bound `4 C_3(N) / SNR` for the chain ensemble.
pub fn bound_phi(snr: f64, n: usize, mu: f64, gamma: f64) -> f64 {
    4.0 * c3(n, mu, gamma) / snr
}

struct TrialOutcome {
    norm_sqr: f64,
    small_hub: bool,
    /// (aligned error, degenerate) per SNR point.
    errors: Vec<(f64, bool)>,
}

enum Shared<'a> {
    Projector(AffineProjector<'a>),
    Nothing,
}

fn run_trial(cfg: &BenchConfig, fixed: Option<&Ensemble>, shared: &Shared<'_>, t: u64) -> Result<TrialOutcome> {
    let base = t << 16;
    let mut rng = Rng::new(cfg.seed, base);
    let mut x = gaussian_complex(&mut rng, cfg.n, cfg.sigma_x2).into_vec();
    if cfg.fix_first {
        x[0] = Complex64::new(1.0, 0.0);
    }
    let x = crate::numerics::ComplexVector::new(x)?;
    let own;
    let ensemble = match fixed {
        Some(e) => e,
        None => {
            let mut erng = Rng::new(cfg.seed, base | ENSEMBLE_STREAM);
            own = Ensemble::random(&mut erng, cfg.n, cfg.l.unwrap_or(0))?;
            &own
        }
    };
    let own_projector;
    let projector = match (cfg.method, shared) {
        (Method::Sdp, Shared::Projector(p)) => Some(p),
        (Method::Sdp, Shared::Nothing) => {
            own_projector = AffineProjector::new(ensemble)?;
            Some(&own_projector)
        }
        _ => None,
    };
    let clean = ensemble.measure(&x)?;
    let mut errors = Vec::with_capacity(cfg.snr_grid_db.len());
    for (s, &db) in cfg.snr_grid_db.iter().enumerate() {
        let sigma_nu2 = cfg.sigma_x2 / db_to_linear(db);
        let mut nrng = Rng::new(cfg.seed, base | (s as u64 + 1));
        let noisy = add_noise(&clean, sigma_nu2, &mut nrng)?;
        let outcome = match projector {
            None => match recover(cfg.kind, &noisy, cfg.n) {
                Ok(r) => (aligned_error(&x, &r.x_hat)?, r.degenerate_count > 0 || !r.broken.is_empty()),
                Err(Error::AllDegenerate) => (x.norm_sqr(), true),
                Err(e) => return Err(e),
            },
            Some(p) => {
                let epsilon = cfg.epsilon.unwrap_or(SdpConfig::noise_radius(ensemble.len(), sigma_nu2));
                let sdp = SdpConfig { epsilon, ..cfg.sdp };
                let r = solve_with(p, &noisy, &sdp)?;
                (aligned_error(&x, &r.x_hat)?, !r.converged)
            }
        };
        errors.push(outcome);
    }
    Ok(TrialOutcome { norm_sqr: x.norm_sqr(), small_hub: x[0].norm_sqr() < cfg.sigma_x2, errors })
}

/// Runs the sweep described by `cfg`.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchResult> {
    cfg.validate()?;
    let fixed = match cfg.kind {
        EnsembleKind::Random => None,
        kind => Some(Ensemble::build(kind, cfg.n)?),
    };
    let shared = match (&fixed, cfg.method) {
        (Some(e), Method::Sdp) => Shared::Projector(AffineProjector::new(e)?),
        _ => Shared::Nothing,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let outcomes: Vec<TrialOutcome> = pool.install(|| {
        (0..cfg.trials as u64)
            .into_par_iter()
            .map(|t| run_trial(cfg, fixed.as_ref(), &shared, t))
            .collect::<Result<Vec<_>>>()
    })?;

    let trials = outcomes.len() as f64;
    let mean_norm = outcomes.iter().map(|o| o.norm_sqr).sum::<f64>() / trials;
    let small_hub_fraction = outcomes.iter().filter(|o| o.small_hub).count() as f64 / trials;
    let mu = cfg.mu();
    let points = cfg
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(s, &db)| {
            let errs: Vec<f64> = outcomes.iter().map(|o| o.errors[s].0).collect();
            let degenerate = outcomes.iter().filter(|o| o.errors[s].1).count();
            let mean = errs.iter().sum::<f64>() / trials;
            let var = if errs.len() > 1 {
                errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (trials - 1.0)
            } else {
                0.0
            };
            let snr = db_to_linear(db);
            let (bound_high, bound_low) = match cfg.kind {
                EnsembleKind::Psi => {
                    let b = bound_psi(snr, cfg.sigma_x2, mu, cfg.gamma);
                    (b.high, b.low)
                }
                EnsembleKind::Phi => (bound_phi(snr, cfg.n, mu, cfg.gamma), f64::NAN),
                EnsembleKind::Random => (f64::NAN, f64::NAN),
            };
            BenchPoint {
                snr_db: db,
                mse_mean: mean / mean_norm,
                mse_std: var.sqrt() / mean_norm,
                bound_high,
                bound_low,
                trials: outcomes.len(),
                degenerate,
            }
        })
        .collect();
    Ok(BenchResult { points, small_hub_fraction })
}

/// Least-squares slope of `log10(mse)` against `log10(snr)`.
pub fn loglog_slope(points: &[BenchPoint]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.snr_db / 10.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mse_mean.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Parses `a,b,c` or `start:step:stop` (inclusive) into dB values.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidConfig(format!("invalid SNR grid '{text}'"));
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let grid: Vec<f64> = if text.contains(':') {
        let parts: Vec<f64> = text.split(':').map(parse).collect::<Result<_>>()?;
        let [start, step, stop] = parts[..] else {
            return Err(bad());
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| start + k as f64 * step).collect()
    } else {
        text.split(',').map(parse).collect::<Result<_>>()?
    };
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(grid)
}
