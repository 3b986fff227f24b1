//! Numerical probe of the extremal inequality used in the outer bound:
//!
//! `max_{K ⪰ 0, tr K ≤ P} E log(1 + h₁ᴴ K h₁) − E log(1 + h₂ᴴ K h₂)`
//!
//! grows no faster than `max{α₁, α₂} · log P`. The expectations run over the
//! estimation errors given one draw of the TXs' estimates; the maximization is
//! a grid search over the eigendecomposition of `K`.
//!
//! This checks the bound on samples. It is not a proof of the converse.

use crate::channel_model::{complex_gaussian_vec, generate_csit_views, Cell, QualityPair, SimRng};
use crate::error::{Error, Result};
use crate::linalg::CVec2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

/// Grid over `(angle, phase, λ-split, trace level)` plus optional local zoom levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub angles: usize,
    pub phases: usize,
    pub splits: usize,
    pub traces: usize,
    /// Each level evaluates a 5×5×5 local grid around the incumbent with half the spacing.
    pub refine_levels: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            angles: 32,
            phases: 16,
            splits: 32,
            traces: 8,
            refine_levels: 0,
        }
    }
}

impl GridSpec {
    pub fn uniform(n: usize) -> Self {
        GridSpec {
            angles: n,
            phases: n,
            splits: n,
            traces: n,
            refine_levels: 0,
        }
    }

    pub fn with_refinement(self, levels: usize) -> Self {
        GridSpec {
            refine_levels: levels,
            ..self
        }
    }

    fn validate(&self) -> Result<()> {
        for (field, n) in [
            ("grid.angles", self.angles),
            ("grid.phases", self.phases),
            ("grid.splits", self.splits),
            ("grid.traces", self.traces),
        ] {
            if n < 8 {
                return Err(Error::invalid(field, format!("need at least 8 points, got {n}")));
            }
        }
        Ok(())
    }
}

/// `K = λ₁ v vᴴ + λ₂ v⊥ v⊥ᴴ` with `v = [cos θ, sin θ e^{iφ}]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CovarianceCandidate {
    pub eigvec_angle: f64,
    pub eigvec_phase: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl CovarianceCandidate {
    pub fn eigvec(&self) -> CVec2 {
        let (s, c) = self.eigvec_angle.sin_cos();
        CVec2::new(Complex64::new(c, 0.0), Complex64::from_polar(s, self.eigvec_phase))
    }

    pub fn eigvec_orth(&self) -> CVec2 {
        let (s, c) = self.eigvec_angle.sin_cos();
        CVec2::new(Complex64::new(-s, 0.0), Complex64::from_polar(c, self.eigvec_phase))
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let v = self.eigvec();
        let w = self.eigvec_orth();
        let mut k = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in k.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = v[i] * v[j].conj() * self.lambda1 + w[i] * w[j].conj() * self.lambda2;
            }
        }
        k
    }

    /// `hᴴ K h`.
    pub fn quad(&self, h: &CVec2) -> f64 {
        self.lambda1 * self.eigvec().inner(h).norm_sqr() + self.lambda2 * self.eigvec_orth().inner(h).norm_sqr()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundProbeResult {
    pub p: f64,
    /// Maximized difference, in bits.
    pub diff_value: f64,
    pub argmax: CovarianceCandidate,
    pub mc_stderr: f64,
    /// Objective at `K = (P/2) I`, in bits.
    pub isotropic_value: f64,
}

/// Error samples shared by every candidate (common random numbers).
struct Samples {
    h1: Vec<CVec2>,
    h2: Vec<CVec2>,
    norm1: Vec<f64>,
    norm2: Vec<f64>,
}

impl Samples {
    fn len(&self) -> usize {
        self.h1.len()
    }

    /// `(mean, stderr)` of `log₂(1+h₁ᴴKh₁) − log₂(1+h₂ᴴKh₂)` given `|vᴴh|²` per sample.
    fn objective(&self, a1: &[f64], a2: &[f64], lambda1: f64, lambda2: f64) -> (f64, f64) {
        let n = self.len() as f64;
        let (mut sum, mut sq) = (0.0, 0.0);
        for s in 0..self.len() {
            let q1 = lambda1 * a1[s] + lambda2 * (self.norm1[s] - a1[s]).max(0.0);
            let q2 = lambda1 * a2[s] + lambda2 * (self.norm2[s] - a2[s]).max(0.0);
            let d = ((1.0 + q1) / (1.0 + q2)).log2();
            sum += d;
            sq += d * d;
        }
        let mean = sum / n;
        let var = (sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
        (mean, (var / n).sqrt())
    }

    fn projections(&self, v: &CVec2) -> (Vec<f64>, Vec<f64>) {
        (
            self.h1.iter().map(|h| v.inner(h).norm_sqr()).collect(),
            self.h2.iter().map(|h| v.inner(h).norm_sqr()).collect(),
        )
    }
}

#[derive(Clone, Copy)]
struct Best {
    value: f64,
    stderr: f64,
    cand: CovarianceCandidate,
}

fn evaluate_direction(samples: &Samples, theta: f64, phi: f64, splits: &[f64], traces: &[f64], best: &mut Best) {
    let probe = CovarianceCandidate {
        eigvec_angle: theta,
        eigvec_phase: phi,
        lambda1: 0.0,
        lambda2: 0.0,
    };
    let (a1, a2) = samples.projections(&probe.eigvec());
    for &t in traces {
        for &s in splits {
            let (l1, l2) = (s * t, (1.0 - s) * t);
            let (v, e) = samples.objective(&a1, &a2, l1, l2);
            if v > best.value {
                *best = Best {
                    value: v,
                    stderr: e,
                    cand: CovarianceCandidate {
                        lambda1: l1,
                        lambda2: l2,
                        ..probe
                    },
                };
            }
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Grid-search maximum for one draw of the four channel estimates.
pub fn probe_weighted_diff<R: Rng + ?Sized>(
    qual: &QualityPair,
    p: f64,
    grid: &GridSpec,
    mc_samples: usize,
    rng: &mut R,
) -> Result<BoundProbeResult> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid("P", format!("must be >= 1, got {p}")));
    }
    grid.validate()?;
    if mc_samples < 1000 {
        return Err(Error::invalid(
            "mc_samples",
            format!("need at least 1000, got {mc_samples}"),
        ));
    }
    let (_, v1, v2) = generate_csit_views(qual, p, rng)?;
    // Given all four estimates, h_j is centred on the finer estimate held by TX-j.
    let fine1 = *v1.estimate_of(Cell::One);
    let fine2 = *v2.estimate_of(Cell::Two);
    let sigma1_sq = crate::channel_model::sigma_sq_from_alpha(qual.alpha1, p)?;
    let mut samples = Samples {
        h1: Vec::with_capacity(mc_samples),
        h2: Vec::with_capacity(mc_samples),
        norm1: Vec::new(),
        norm2: Vec::new(),
    };
    for _ in 0..mc_samples {
        samples.h1.push(fine1 + complex_gaussian_vec(rng, sigma1_sq));
        samples.h2.push(fine2 + complex_gaussian_vec(rng, sigma1_sq));
    }
    samples.norm1 = samples.h1.iter().map(CVec2::norm_sqr).collect();
    samples.norm2 = samples.h2.iter().map(CVec2::norm_sqr).collect();

    let (iso, iso_err) = {
        let zeros = vec![0.0; mc_samples];
        // with λ₁ = λ₂ the direction is irrelevant: hᴴKh = (P/2)‖h‖²
        samples.objective(&zeros, &zeros, 0.0, 0.5 * p)
    };
    let mut best = Best {
        value: iso,
        stderr: iso_err,
        cand: CovarianceCandidate {
            eigvec_angle: 0.0,
            eigvec_phase: 0.0,
            lambda1: 0.5 * p,
            lambda2: 0.5 * p,
        },
    };

    let angles = linspace(0.0, FRAC_PI_2, grid.angles);
    let phases: Vec<f64> = (0..grid.phases)
        .map(|i| 2.0 * PI * i as f64 / grid.phases as f64)
        .collect();
    let splits = linspace(0.0, 1.0, grid.splits);
    let traces: Vec<f64> = (1..=grid.traces).map(|k| p * k as f64 / grid.traces as f64).collect();
    for &theta in &angles {
        for &phi in &phases {
            evaluate_direction(&samples, theta, phi, &splits, &traces, &mut best);
        }
    }

    let mut d_theta = FRAC_PI_2 / (grid.angles - 1) as f64;
    let mut d_phi = 2.0 * PI / grid.phases as f64;
    let mut d_split = 1.0 / (grid.splits - 1) as f64;
    for _ in 0..grid.refine_levels {
        d_theta *= 0.5;
        d_phi *= 0.5;
        d_split *= 0.5;
        let c = best.cand;
        let t = c.lambda1 + c.lambda2;
        let s0 = if t > 0.0 { c.lambda1 / t } else { 0.5 };
        let local_splits: Vec<f64> = linspace(s0 - d_split, s0 + d_split, 5)
            .into_iter()
            .map(|s| s.clamp(0.0, 1.0))
            .collect();
        for theta in linspace(c.eigvec_angle - d_theta, c.eigvec_angle + d_theta, 5) {
            let theta = theta.clamp(0.0, FRAC_PI_2);
            for phi in linspace(c.eigvec_phase - d_phi, c.eigvec_phase + d_phi, 5) {
                evaluate_direction(
                    &samples,
                    theta,
                    phi.rem_euclid(2.0 * PI),
                    &local_splits,
                    &[t],
                    &mut best,
                );
            }
        }
    }

    Ok(BoundProbeResult {
        p,
        diff_value: best.value,
        argmax: best.cand,
        mc_stderr: best.stderr,
        isotropic_value: iso,
    })
}

/// Mean probed value over `draws` independent estimate draws. Draw `i` uses
/// stream `i` of `seed`, so the same draws are reused across power levels.
pub fn probe_average(
    qual: &QualityPair,
    p: f64,
    grid: &GridSpec,
    mc_samples: usize,
    draws: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let values: Result<Vec<f64>> = (0..draws as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = SimRng::seed_from_u64(seed);
            rng.set_stream(i);
            probe_weighted_diff(qual, p, grid, mc_samples, &mut rng).map(|r| r.diff_value)
        })
        .collect();
    let values = values?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Least-squares slope of the averaged probe against `log₂ P`.
pub fn probe_slope(
    qual: &QualityPair,
    powers: &[f64],
    grid: &GridSpec,
    mc_samples: usize,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    let mut pts = Vec::with_capacity(powers.len());
    for &p in powers {
        let (mean, stderr) = probe_average(qual, p, grid, mc_samples, draws, seed)?;
        pts.push(crate::dof_analysis::RatePoint {
            p,
            mean_sum_rate: mean,
            stderr,
        });
    }
    let curve = crate::dof_analysis::RateCurve::new(pts)?;
    crate::dof_analysis::estimate_dof_slope(&curve, powers.len())
}

/// `log((1+a)/(1+b)) ≤ log(1 + a/b)` for `a ≥ 0`, `b > 0`.
pub fn log_ratio_inequality_check(a: f64, b: f64) -> bool {
    a.ln_1p() - b.ln_1p() <= (a / b).ln_1p() + 1e-12
}
