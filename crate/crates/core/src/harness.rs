//! Experiment configuration, Monte-Carlo orchestration and result tables.
//!
//! Trial `i` of a run draws everything from stream `i` of a ChaCha8 generator
//! keyed by the run seed, so results do not depend on scheduling or on the
//! number of worker threads. The same streams are reused at every SNR point.

use crate::channel_model::{
    complex_gaussian_vec, correlation_from_delay, draw_slot, effective_alpha, evolve_channel, views_given_channel,
    DelayProfile, NetworkChannel, QualityPair, SimRng, SlotRealization,
};
use crate::dof_analysis::{estimate_dof_slope, RateCurve, RatePoint};
use crate::error::{Error, Result};
use crate::schemes::{run_scheme, Scheme};
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub const CSV_HEADER: &str = "scheme,snr_db,p_linear,mean_sum_rate_bps_hz,stderr,trials,seed";
pub const SEED_ENV: &str = "NETMIMO_SEED";
pub const DEFAULT_SEED: u64 = 2013;
/// Resampling budget per trial before the trial is reported as failed.
pub const MAX_ATTEMPTS: u32 = 1000;

pub const FIG2_SCHEMES: [Scheme; 5] = [
    Scheme::Zf,
    Scheme::Mat,
    Scheme::AlphaMatZf,
    Scheme::AlphaMatApzf,
    Scheme::ZfPerfect,
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsitMode {
    /// Error variances `P^{-α₁}`, `P^{-α₂}` with independent slots.
    #[default]
    Exponent,
    /// Error variances from feedback/backhaul delays and Doppler, Gauss-Markov slots.
    Physical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub scheme: Scheme,
    #[serde(default = "default_alpha1")]
    pub alpha1: f64,
    #[serde(default = "default_alpha2")]
    pub alpha2: f64,
    pub snr_db_start: f64,
    pub snr_db_stop: f64,
    pub snr_db_step: f64,
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub mode: CsitMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_fb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_bh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_path: Option<String>,
}

fn default_alpha1() -> f64 {
    1.0
}
fn default_alpha2() -> f64 {
    0.5
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl SimConfig {
    pub fn new(scheme: Scheme, alpha1: f64, alpha2: f64, snr_db: (f64, f64, f64), trials: u64, seed: u64) -> Self {
        SimConfig {
            scheme,
            alpha1,
            alpha2,
            snr_db_start: snr_db.0,
            snr_db_stop: snr_db.1,
            snr_db_step: snr_db.2,
            trials,
            seed,
            mode: CsitMode::Exponent,
            tau_fb: None,
            tau_bh: None,
            f_d: None,
            out_path: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.snr_db_step > 0.0 && self.snr_db_step.is_finite()) {
            return Err(Error::invalid("snr_db_step", "must be > 0"));
        }
        if !(self.snr_db_start.is_finite() && self.snr_db_stop.is_finite()) {
            return Err(Error::invalid("snr_db_start", "SNR bounds must be finite"));
        }
        if self.snr_db_stop < self.snr_db_start {
            return Err(Error::invalid("snr_db_stop", "must be >= snr_db_start"));
        }
        if self.snr_db_start < 0.0 {
            return Err(Error::invalid("snr_db_start", "must be >= 0 dB (P >= 1)"));
        }
        if self.trials < 1 {
            return Err(Error::invalid("trials", "must be >= 1"));
        }
        match self.mode {
            CsitMode::Exponent => {
                QualityPair::new(self.alpha1, self.alpha2)?;
            }
            CsitMode::Physical => {
                self.delay_profile()?;
            }
        }
        Ok(())
    }

    pub fn delay_profile(&self) -> Result<DelayProfile> {
        let need =
            |v: Option<f64>, field: &'static str| v.ok_or_else(|| Error::invalid(field, "required in physical mode"));
        DelayProfile::new(
            need(self.tau_fb, "tau_fb")?,
            need(self.tau_bh, "tau_bh")?,
            need(self.f_d, "f_d")?,
        )
    }

    pub fn snr_grid_db(&self) -> Vec<f64> {
        let n = ((self.snr_db_stop - self.snr_db_start) / self.snr_db_step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| self.snr_db_start + i as f64 * self.snr_db_step)
            .collect()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialResult {
    pub rates: [f64; 2],
    pub rejections: u32,
}

/// How the channels and CSIT of one trial are drawn.
#[derive(Clone, Copy, Debug)]
pub enum ChannelSource {
    Exponent(QualityPair),
    Physical(DelayProfile),
}

impl ChannelSource {
    pub fn from_config(cfg: &SimConfig) -> Result<Self> {
        Ok(match cfg.mode {
            CsitMode::Exponent => ChannelSource::Exponent(QualityPair::new(cfg.alpha1, cfg.alpha2)?),
            CsitMode::Physical => ChannelSource::Physical(cfg.delay_profile()?),
        })
    }

    pub fn draw(&self, p: f64, rng: &mut SimRng) -> Result<[SlotRealization; 3]> {
        match self {
            ChannelSource::Exponent(qual) => {
                let s0 = draw_slot(qual, p, 0, rng)?;
                let s1 = draw_slot(qual, p, 1, rng)?;
                let s2 = draw_slot(qual, p, 2, rng)?;
                Ok([s0, s1, s2])
            }
            ChannelSource::Physical(profile) => {
                let (s1, s2) = profile.error_variances();
                let q = [effective_alpha(s1, p), effective_alpha(s2, p)];
                let rho = correlation_from_delay(profile, 1.0);
                let mut channel = NetworkChannel {
                    h: [complex_gaussian_vec(rng, 1.0), complex_gaussian_vec(rng, 1.0)],
                    t: 0,
                };
                let mut out = Vec::with_capacity(3);
                for t in 0..3u64 {
                    if t > 0 {
                        channel = NetworkChannel {
                            h: [
                                evolve_channel(&channel.h[0], rho, rng),
                                evolve_channel(&channel.h[1], rho, rng),
                            ],
                            t,
                        };
                    }
                    let (v1, v2) = views_given_channel(&channel, s1, s2, q, rng);
                    out.push(SlotRealization {
                        channel,
                        views: [v1, v2],
                    });
                }
                Ok([out[0], out[1], out[2]])
            }
        }
    }
}

/// Runs trial `trial` of a scheme at power `p`, resampling realizations that
/// the precoder rejects.
pub fn run_trial(scheme: Scheme, source: &ChannelSource, p: f64, seed: u64, trial: u64) -> Result<TrialResult> {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut rejections = 0;
    loop {
        let slots = source.draw(p, &mut rng)?;
        match run_scheme(scheme, &slots, p, &mut rng) {
            Ok(out) => {
                return Ok(TrialResult {
                    rates: [out.rate_rx1, out.rate_rx2],
                    rejections,
                })
            }
            Err(e) if e.is_resample() && rejections + 1 < MAX_ATTEMPTS => rejections += 1,
            Err(e) => return Err(e),
        }
    }
}

/// Pairwise summation; deterministic for a given input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub scheme: String,
    pub snr_db: f64,
    pub p_linear: f64,
    pub mean_sum_rate: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
    /// Per-RX mean rates; not part of the CSV.
    pub mean_rate_rx: Option<[f64; 2]>,
    pub rejection_rate: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.rows.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.scheme, r.snr_db, r.p_linear, r.mean_sum_rate, r.stderr, r.trials, r.seed
            );
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            other => return Err(Error::Table(format!("unexpected header {other:?}"))),
        }
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(Error::Table(format!(
                    "line {}: expected 7 fields, got {}",
                    n + 2,
                    f.len()
                )));
            }
            let num = |i: usize| -> Result<f64> {
                f[i].trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Table(format!("line {}: field {}: {e}", n + 2, i + 1)))
            };
            let int = |i: usize| -> Result<u64> {
                f[i].trim()
                    .parse::<u64>()
                    .map_err(|e| Error::Table(format!("line {}: field {}: {e}", n + 2, i + 1)))
            };
            rows.push(ResultRow {
                scheme: f[0].trim().to_string(),
                snr_db: num(1)?,
                p_linear: num(2)?,
                mean_sum_rate: num(3)?,
                stderr: num(4)?,
                trials: int(5)?,
                seed: int(6)?,
                mean_rate_rx: None,
                rejection_rate: None,
            });
        }
        Ok(ResultTable { rows })
    }

    /// Scheme labels in order of first appearance.
    pub fn schemes(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.scheme) {
                out.push(r.scheme.clone());
            }
        }
        out
    }

    pub fn curve(&self, scheme: &str) -> Result<RateCurve> {
        let mut pts: Vec<RatePoint> = self
            .rows
            .iter()
            .filter(|r| r.scheme == scheme)
            .map(|r| RatePoint {
                p: r.p_linear,
                mean_sum_rate: r.mean_sum_rate,
                stderr: r.stderr,
            })
            .collect();
        pts.sort_by(|a, b| a.p.total_cmp(&b.p));
        RateCurve::new(pts)
    }

    /// Per-RX mean-rate curve (only available for freshly simulated tables).
    pub fn rx_curve(&self, scheme: &str, rx: usize) -> Result<RateCurve> {
        let mut pts = Vec::new();
        for r in self.rows.iter().filter(|r| r.scheme == scheme) {
            let per = r
                .mean_rate_rx
                .ok_or_else(|| Error::Table("per-RX rates are not stored in CSV tables".into()))?;
            pts.push(RatePoint {
                p: r.p_linear,
                mean_sum_rate: per[rx],
                stderr: 0.0,
            });
        }
        pts.sort_by(|a, b| a.p.total_cmp(&b.p));
        RateCurve::new(pts)
    }

    /// Fitted DoF slope over the top `window` points of every scheme.
    pub fn slopes(&self, window: usize) -> Result<Vec<(String, f64)>> {
        self.schemes()
            .into_iter()
            .map(|s| {
                let slope = estimate_dof_slope(&self.curve(&s)?, window)?;
                Ok((s, slope))
            })
            .collect()
    }

    pub fn extend(&mut self, other: ResultTable) {
        self.rows.extend(other.rows);
    }
}

/// Runs every SNR point of `cfg` on the global rayon pool.
pub fn run_experiment(cfg: &SimConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let source = ChannelSource::from_config(cfg)?;
    let mut rows = Vec::new();
    for snr_db in cfg.snr_grid_db() {
        let p = db_to_linear(snr_db);
        let trials: Result<Vec<TrialResult>> = (0..cfg.trials)
            .into_par_iter()
            .map(|i| run_trial(cfg.scheme, &source, p, cfg.seed, i))
            .collect();
        let trials = trials?;
        let sums: Vec<f64> = trials.iter().map(|t| t.rates[0] + t.rates[1]).collect();
        let r1: Vec<f64> = trials.iter().map(|t| t.rates[0]).collect();
        let r2: Vec<f64> = trials.iter().map(|t| t.rates[1]).collect();
        let (mean, stderr) = mean_stderr(&sums);
        let rejected: u64 = trials.iter().map(|t| t.rejections as u64).sum();
        rows.push(ResultRow {
            scheme: cfg.scheme.label().to_string(),
            snr_db,
            p_linear: p,
            mean_sum_rate: mean,
            stderr,
            trials: cfg.trials,
            seed: cfg.seed,
            mean_rate_rx: Some([mean_stderr(&r1).0, mean_stderr(&r2).0]),
            rejection_rate: Some(rejected as f64 / (rejected + cfg.trials) as f64),
        });
    }
    Ok(ResultTable { rows })
}

/// Same as [`run_experiment`] on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(cfg: &SimConfig, threads: usize) -> Result<ResultTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    pool.install(|| run_experiment(cfg))
}

/// Reads `NETMIMO_SEED` if set.
pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::invalid("NETMIMO_SEED", format!("not an unsigned integer: {v:?}"))),
        Err(_) => Ok(None),
    }
}

#[derive(Clone, Debug)]
pub struct Fig2Output {
    pub table: ResultTable,
    /// gnuplot data: one index block per scheme (`snr_db mean stderr`).
    pub plot_data: String,
}

impl Fig2Output {
    /// gnuplot script plotting `data_file` (written from [`Fig2Output::plot_data`]).
    pub fn gnuplot_script(&self, data_file: &str) -> String {
        let mut s = String::new();
        s.push_str("set xlabel 'SNR [dB]'\nset ylabel 'Average sum rate [bits/s/Hz]'\n");
        s.push_str("set key left top\nset grid\n");
        let labels = self.table.schemes();
        s.push_str("plot ");
        for (i, label) in labels.iter().enumerate() {
            if i > 0 {
                s.push_str(", \\\n     ");
            }
            let _ = write!(s, "'{data_file}' index {i} using 1:2 with linespoints title '{label}'");
        }
        s.push('\n');
        s
    }
}

/// Sum-rate curves of the five reference schemes at `α₁ = 1`, `α₂ = 0.5`,
/// 0–60 dB in 5 dB steps.
pub fn reproduce_fig2(seed: u64, trials: u64, threads: Option<usize>) -> Result<Fig2Output> {
    let mut table = ResultTable::default();
    for scheme in FIG2_SCHEMES {
        let cfg = SimConfig::new(scheme, 1.0, 0.5, (0.0, 60.0, 5.0), trials, seed);
        let t = match threads {
            Some(n) => run_experiment_with_threads(&cfg, n)?,
            None => run_experiment(&cfg)?,
        };
        table.extend(t);
    }
    let mut plot_data = String::new();
    for (i, s) in table.schemes().iter().enumerate() {
        if i > 0 {
            plot_data.push_str("\n\n");
        }
        let _ = writeln!(plot_data, "# {s}");
        for r in table.rows.iter().filter(|r| &r.scheme == s) {
            let _ = writeln!(plot_data, "{} {} {}", r.snr_db, r.mean_sum_rate, r.stderr);
        }
    }
    Ok(Fig2Output { table, plot_data })
}
