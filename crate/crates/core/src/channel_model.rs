//! Temporally correlated Rayleigh channels and the delay-degraded CSIT each
//! transmitter holds.
//!
//! Each TX knows its own user's channel after the feedback delay and the
//! other user's channel after feedback plus backhaul delay. In exponent mode
//! the resulting estimation error variances are `P^{-α₁}` and `P^{-α₂}`.
//! The estimates are generated as a Markov chain `w → b → h`: the coarse
//! estimate `w` (shared by both TXs), the fine estimate `b` (serving TX only)
//! and the true channel `h`.

use crate::error::{Error, Result};
use crate::linalg::{CVec2, ComplexGain};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_PI_4, PI};

pub type ChannelVector = CVec2;

/// Deterministic generator used for every Monte-Carlo stream.
pub type SimRng = ChaCha8Rng;

/// One of the two cells (TX-k serves RX-k).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    One,
    Two,
}

impl Cell {
    pub const BOTH: [Cell; 2] = [Cell::One, Cell::Two];

    pub fn idx(self) -> usize {
        match self {
            Cell::One => 0,
            Cell::Two => 1,
        }
    }

    pub fn other(self) -> Cell {
        match self {
            Cell::One => Cell::Two,
            Cell::Two => Cell::One,
        }
    }

    pub fn from_number(n: u32) -> Result<Cell> {
        match n {
            1 => Ok(Cell::One),
            2 => Ok(Cell::Two),
            _ => Err(Error::invalid("cell", format!("expected 1 or 2, got {n}"))),
        }
    }
}

/// Circularly symmetric complex Gaussian sample with variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> ComplexGain {
    let s = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    ComplexGain::new(s * re, s * im)
}

/// I.i.d. `CN(0, var)` vector.
pub fn complex_gaussian_vec<R: Rng + ?Sized>(rng: &mut R, var: f64) -> ChannelVector {
    CVec2([complex_gaussian(rng, var), complex_gaussian(rng, var)])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetworkChannel {
    /// `h[j]` is the channel from both TXs to RX-(j+1).
    pub h: [ChannelVector; 2],
    pub t: u64,
}

impl NetworkChannel {
    pub fn to(&self, rx: Cell) -> &ChannelVector {
        &self.h[rx.idx()]
    }

    pub fn is_finite(&self) -> bool {
        self.h.iter().all(CVec2::is_finite)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayProfile {
    pub tau_fb: f64,
    pub tau_bh: f64,
    pub f_d: f64,
}

impl DelayProfile {
    pub fn new(tau_fb: f64, tau_bh: f64, f_d: f64) -> Result<Self> {
        for (field, v) in [("tau_fb", tau_fb), ("tau_bh", tau_bh), ("f_d", f_d)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(DelayProfile { tau_fb, tau_bh, f_d })
    }

    /// Total delay from RX-j to TX-k: feedback only when `j == k`.
    pub fn delay(&self, rx: Cell, tx: Cell) -> f64 {
        if rx == tx {
            self.tau_fb
        } else {
            self.tau_fb + self.tau_bh
        }
    }

    /// `(σ₁², σ₂²)` for the serving and the backhaul-delayed estimates.
    pub fn error_variances(&self) -> (f64, f64) {
        (
            sigma_sq_from_delay(self, self.tau_fb),
            sigma_sq_from_delay(self, self.tau_fb + self.tau_bh),
        )
    }
}

/// CSIT quality exponents, `0 ≤ α₂ ≤ α₁ ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QualityPair {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl QualityPair {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha1) {
            return Err(Error::invalid("alpha1", format!("must lie in [0, 1], got {alpha1}")));
        }
        if !(0.0..=1.0).contains(&alpha2) {
            return Err(Error::invalid("alpha2", format!("must lie in [0, 1], got {alpha2}")));
        }
        if alpha2 > alpha1 {
            return Err(Error::invalid(
                "alpha2",
                format!("must not exceed alpha1 ({alpha2} > {alpha1})"),
            ));
        }
        Ok(QualityPair { alpha1, alpha2 })
    }

    pub fn max(&self) -> f64 {
        self.alpha1.max(self.alpha2)
    }
}

/// One channel estimate held by a TX, tagged with its quality exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub h: ChannelVector,
    pub quality: f64,
}

/// Everything TX-k knows about the current channels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CsitView {
    pub tx: Cell,
    /// Indexed by RX: the best estimate this TX has of `h_rx`.
    pub est: [Estimate; 2],
    /// Indexed by RX: the coarse estimate of `h_rx` held by both TXs.
    pub shared_worse: [ChannelVector; 2],
}

impl CsitView {
    pub fn estimate_of(&self, rx: Cell) -> &ChannelVector {
        &self.est[rx.idx()].h
    }

    pub fn shared(&self, rx: Cell) -> &ChannelVector {
        &self.shared_worse[rx.idx()]
    }

    /// A copy holding only this TX's estimate of its own user's channel; every
    /// other field is zeroed.
    pub fn only_own_estimate(&self) -> CsitView {
        let mut v = self.zeroed();
        v.est[self.tx.idx()] = self.est[self.tx.idx()];
        v
    }

    /// A copy holding only the shared coarse estimates.
    pub fn only_shared(&self) -> CsitView {
        let mut v = self.zeroed();
        v.shared_worse = self.shared_worse;
        v
    }

    fn zeroed(&self) -> CsitView {
        let blank = Estimate {
            h: CVec2::ZERO,
            quality: 0.0,
        };
        CsitView {
            tx: self.tx,
            est: [blank; 2],
            shared_worse: [CVec2::ZERO; 2],
        }
    }
}

/// Channel plus both TXs' views for one time slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotRealization {
    pub channel: NetworkChannel,
    pub views: [CsitView; 2],
}

impl SlotRealization {
    pub fn view(&self, tx: Cell) -> &CsitView {
        &self.views[tx.idx()]
    }
}

/// Zeroth-order Bessel function of the first kind.
///
/// Power series for `|x| ≤ 12`, Hankel asymptotic expansion above. The
/// absolute error is below `1e-11` on `|x| ≤ 100`.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 12.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0_f64;
        let mut sum = 1.0_f64;
        let mut k = 1.0_f64;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) || k < 3.0 {
            term *= -q / (k * k);
            sum += term;
            k += 1.0;
            if k > 200.0 {
                break;
            }
        }
        sum
    } else {
        // a_k = ∏_{j=1..k} (-(2j-1)²) / (8j); P, Q collect even and odd k.
        let mut a = 1.0;
        let mut p = 1.0;
        let mut q = 0.0;
        let mut zpow = 1.0;
        let mut last = f64::INFINITY;
        for k in 1..60 {
            let kk = k as f64;
            a *= -(2.0 * kk - 1.0).powi(2) / (8.0 * kk);
            zpow *= x;
            let t = a / zpow;
            if t.abs() >= last || t.abs() < 1e-20 {
                break;
            }
            last = t.abs();
            // (-1)^{floor(k/2)} sign pattern of the Hankel series
            let s = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                p += s * t;
            } else {
                q += s * t;
            }
        }
        let chi = x - FRAC_PI_4;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

/// Correlation `J₀(2π f_d τ)` and whether it had to be clamped into `[0, 1]`.
pub fn correlation_with_flag(profile: &DelayProfile, tau: f64) -> (f64, bool) {
    let raw = bessel_j0(2.0 * PI * profile.f_d * tau);
    if raw < 0.0 {
        (0.0, true)
    } else if raw > 1.0 {
        (1.0, true)
    } else {
        (raw, false)
    }
}

pub fn correlation_from_delay(profile: &DelayProfile, tau: f64) -> f64 {
    correlation_with_flag(profile, tau).0
}

/// One first-order Gauss-Markov step `ρ h − sqrt(1 − ρ²) e`.
pub fn evolve_channel<R: Rng + ?Sized>(h_prev: &ChannelVector, rho: f64, rng: &mut R) -> ChannelVector {
    let e = complex_gaussian_vec(rng, 1.0);
    if rho >= 1.0 {
        return *h_prev;
    }
    let innov = (1.0 - rho * rho).sqrt();
    *h_prev * rho - e * innov
}

/// Prediction error variance `1 − J₀²(2π f_d τ)` after a delay `tau`.
pub fn sigma_sq_from_delay(profile: &DelayProfile, tau: f64) -> f64 {
    let rho = correlation_from_delay(profile, tau);
    (1.0 - rho * rho).clamp(0.0, 1.0)
}

/// Error variance `min(1, P^{-α})` in the exponent parameterization.
pub fn sigma_sq_from_alpha(alpha: f64, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid("P", format!("linear power must be >= 1, got {p}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", format!("must lie in [0, 1], got {alpha}")));
    }
    Ok((1.0 / p.powf(alpha)).min(1.0))
}

/// Effective quality exponent `−log σ² / log P` of a physical error variance.
pub fn effective_alpha(sigma_sq: f64, p: f64) -> f64 {
    if p <= 1.0 || sigma_sq <= 0.0 {
        return 1.0;
    }
    (-sigma_sq.ln() / p.ln()).clamp(0.0, 1.0)
}

/// Draws a channel realization and the two TX views in exponent mode.
pub fn generate_csit_views<R: Rng + ?Sized>(
    qual: &QualityPair,
    p: f64,
    rng: &mut R,
) -> Result<(NetworkChannel, CsitView, CsitView)> {
    let s1 = sigma_sq_from_alpha(qual.alpha1, p)?;
    let s2 = sigma_sq_from_alpha(qual.alpha2, p)?;
    Ok(generate_with_variances(s1, s2, [qual.alpha1, qual.alpha2], rng))
}

/// Forward construction `w ~ CN(0, 1−σ₂²)`, `b = w + e`, `h = b + n` with
/// explicit error variances.
pub fn generate_with_variances<R: Rng + ?Sized>(
    sigma1_sq: f64,
    sigma2_sq: f64,
    qualities: [f64; 2],
    rng: &mut R,
) -> (NetworkChannel, CsitView, CsitView) {
    let s2 = sigma2_sq.clamp(0.0, 1.0);
    let s1 = sigma1_sq.clamp(0.0, s2);
    let mut h = [CVec2::ZERO; 2];
    let mut fine = [CVec2::ZERO; 2];
    let mut coarse = [CVec2::ZERO; 2];
    for j in 0..2 {
        let w = complex_gaussian_vec(rng, 1.0 - s2);
        let e = complex_gaussian_vec(rng, s2 - s1);
        let n = complex_gaussian_vec(rng, s1);
        coarse[j] = w;
        fine[j] = w + e;
        h[j] = fine[j] + n;
    }
    let channel = NetworkChannel { h, t: 0 };
    let (v1, v2) = assemble_views(&fine, &coarse, qualities);
    (channel, v1, v2)
}

/// Reverse construction for a given true channel: `b | h` then `w | b`,
/// which has the same joint law as [`generate_with_variances`] when `h` is
/// `CN(0, I)`.
pub fn views_given_channel<R: Rng + ?Sized>(
    channel: &NetworkChannel,
    sigma1_sq: f64,
    sigma2_sq: f64,
    qualities: [f64; 2],
    rng: &mut R,
) -> (CsitView, CsitView) {
    let s2 = sigma2_sq.clamp(0.0, 1.0);
    let s1 = sigma1_sq.clamp(0.0, s2);
    let mut fine = [CVec2::ZERO; 2];
    let mut coarse = [CVec2::ZERO; 2];
    for j in 0..2 {
        let h = channel.h[j];
        let b = h * (1.0 - s1) + complex_gaussian_vec(rng, (1.0 - s1) * s1);
        let ratio = if s1 < 1.0 { (1.0 - s2) / (1.0 - s1) } else { 0.0 };
        let w = b * ratio + complex_gaussian_vec(rng, (1.0 - s2) * (1.0 - ratio).max(0.0));
        fine[j] = b;
        coarse[j] = w;
    }
    assemble_views(&fine, &coarse, qualities)
}

fn assemble_views(fine: &[ChannelVector; 2], coarse: &[ChannelVector; 2], qualities: [f64; 2]) -> (CsitView, CsitView) {
    let make = |tx: Cell| {
        let mut est = [Estimate {
            h: CVec2::ZERO,
            quality: 0.0,
        }; 2];
        for rx in Cell::BOTH {
            est[rx.idx()] = if rx == tx {
                Estimate {
                    h: fine[rx.idx()],
                    quality: qualities[0],
                }
            } else {
                Estimate {
                    h: coarse[rx.idx()],
                    quality: qualities[1],
                }
            };
        }
        CsitView {
            tx,
            est,
            shared_worse: *coarse,
        }
    };
    (make(Cell::One), make(Cell::Two))
}

/// Draws one exponent-mode slot.
pub fn draw_slot<R: Rng + ?Sized>(qual: &QualityPair, p: f64, t: u64, rng: &mut R) -> Result<SlotRealization> {
    let (mut channel, v1, v2) = generate_csit_views(qual, p, rng)?;
    channel.t = t;
    Ok(SlotRealization {
        channel,
        views: [v1, v2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    /// J₀(x) = (1/π) ∫₀^π cos(x sin t) dt; the trapezoid rule is spectrally
    /// accurate for this periodic integrand.
    fn j0_quadrature(x: f64) -> f64 {
        let n = 2000;
        let h = PI / n as f64;
        let mut s = 0.5 * ((x * 0.0f64.sin()).cos() + (x * PI.sin()).cos());
        for i in 1..n {
            s += (x * (i as f64 * h).sin()).cos();
        }
        s * h / PI
    }

    #[test]
    fn j0_matches_quadrature_oracle_to_1e9() {
        let mut x = -100.0;
        while x <= 100.0 {
            let err = (bessel_j0(x) - j0_quadrature(x)).abs();
            assert!(err <= 1e-9, "x = {x}: err {err:e}");
            x += 0.173;
        }
        for &x in &[11.999, 12.0, 12.001, 100.0] {
            assert!((bessel_j0(x) - j0_quadrature(x)).abs() <= 1e-9);
        }
    }

    #[test]
    fn j0_examples() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert!(bessel_j0(2.404826).abs() < 1e-5);
        // frozen from the quadrature oracle
        let at_pi = j0_quadrature(PI);
        assert!((at_pi - (-0.304_242_177_644_093_9)).abs() < 1e-12);
        assert!((bessel_j0(PI) - at_pi).abs() < 1e-12);
    }

    #[test]
    fn correlation_examples() {
        let still = DelayProfile::new(1.0, 2.0, 0.0).unwrap();
        assert_eq!(correlation_from_delay(&still, 5.0), 1.0);
        let moving = DelayProfile::new(1.0, 2.0, 0.1).unwrap();
        assert_eq!(correlation_from_delay(&moving, 0.0), 1.0);
        let rho = correlation_from_delay(&moving, 1.0);
        assert!((rho - j0_quadrature(0.2 * PI)).abs() < 1e-12);
        assert!((rho - 0.9037).abs() < 1e-4);
    }

    #[test]
    fn correlation_clamps_past_first_zero() {
        let p = DelayProfile::new(0.0, 0.0, 1.0).unwrap();
        let (rho, clamped) = correlation_with_flag(&p, 0.5); // J₀(π) < 0
        assert_eq!(rho, 0.0);
        assert!(clamped);
        assert!(!correlation_with_flag(&p, 0.1).1);
    }

    #[test]
    fn sigma_from_delay_examples() {
        let p = DelayProfile::new(0.0, 0.0, 0.1).unwrap();
        assert_eq!(sigma_sq_from_delay(&p, 0.0), 0.0);
        let still = DelayProfile::new(0.0, 0.0, 0.0).unwrap();
        assert_eq!(sigma_sq_from_delay(&still, 3.0), 0.0);
        let s = sigma_sq_from_delay(&p, 1.0);
        let j = j0_quadrature(0.2 * PI);
        assert!((s - (1.0 - j * j)).abs() < 1e-12);
        assert!((s - 0.1833).abs() < 2e-4);
        // monotone before the first zero of J₀ (2π·0.1·τ < 2.4048)
        let mut prev = 0.0;
        for i in 0..380 {
            let v = sigma_sq_from_delay(&p, i as f64 * 0.01);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn sigma_from_alpha_examples() {
        assert_eq!(sigma_sq_from_alpha(0.0, 100.0).unwrap(), 1.0);
        assert!((sigma_sq_from_alpha(1.0, 100.0).unwrap() - 0.01).abs() < 1e-18);
        assert!((sigma_sq_from_alpha(0.5, 1e4).unwrap() - 0.01).abs() < 1e-18);
        assert!(sigma_sq_from_alpha(0.5, 0.5).is_err());
        for &a in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            for &p in &[1.0, 10.0, 1e3, 1e6] {
                let s = sigma_sq_from_alpha(a, p).unwrap();
                assert!((s * p.powf(a) - 1.0).abs() <= 2.0 * f64::EPSILON);
            }
        }
    }

    #[test]
    fn quality_pair_validation() {
        assert!(QualityPair::new(1.0, 0.5).is_ok());
        assert!(QualityPair::new(0.5, 0.5).is_ok());
        assert!(QualityPair::new(0.4, 0.5).is_err());
        assert!(QualityPair::new(1.2, 0.5).is_err());
        assert!(DelayProfile::new(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn evolve_rho_one_is_identity() {
        let mut rng = SimRng::seed_from_u64(1);
        let h = complex_gaussian_vec(&mut rng, 1.0);
        assert_eq!(evolve_channel(&h, 1.0, &mut rng), h);
    }

    #[test]
    fn evolve_rho_zero_decorrelates_and_keeps_variance() {
        let n = 100_000;
        for &rho in &[0.0, 0.3, 0.9] {
            let mut rng = SimRng::seed_from_u64(11);
            let mut cross = num_complex::Complex64::new(0.0, 0.0);
            let mut var = 0.0;
            for _ in 0..n {
                let h = complex_gaussian_vec(&mut rng, 1.0);
                let g = evolve_channel(&h, rho, &mut rng);
                cross += h[0].conj() * g[0];
                var += g[0].norm_sqr();
            }
            let cross = cross / n as f64;
            let var = var / n as f64;
            assert!((var - 1.0).abs() < 0.02, "rho {rho}: var {var}");
            assert!(
                (cross.re - rho).abs() < 0.02 && cross.im.abs() < 0.02,
                "rho {rho}: {cross}"
            );
        }
    }

    #[test]
    fn zero_error_branch_is_exact() {
        let mut rng = SimRng::seed_from_u64(3);
        let (ch, v1, v2) = generate_with_variances(0.0, 0.3, [1.0, 0.5], &mut rng);
        assert_eq!(v1.est[0].h, ch.h[0]);
        assert_eq!(v2.est[1].h, ch.h[1]);
    }

    #[test]
    fn nested_error_variances() {
        let qual = QualityPair::new(1.0, 0.5).unwrap();
        let p = 1e6;
        let n = 100_000;
        let mut rng = SimRng::seed_from_u64(5);
        let (mut fine_err, mut coarse_err) = (0.0, 0.0);
        let mut corr = num_complex::Complex64::new(0.0, 0.0);
        let (mut est_pow, mut err_pow) = (0.0, 0.0);
        for _ in 0..n {
            let (ch, v1, v2) = generate_csit_views(&qual, p, &mut rng).unwrap();
            assert_eq!(v1.shared_worse, v2.shared_worse);
            let fe = ch.h[0] - v1.est[0].h;
            let ce = ch.h[0] - v2.est[0].h;
            fine_err += fe.norm_sqr();
            coarse_err += ce.norm_sqr();
            let w = v2.est[0].h;
            corr += w[0].conj() * ce[0];
            est_pow += w[0].norm_sqr();
            err_pow += ce[0].norm_sqr();
        }
        let fine_err = fine_err / n as f64;
        let coarse_err = coarse_err / n as f64;
        assert!((fine_err / 2e-6 - 1.0).abs() < 0.05, "{fine_err}");
        assert!((coarse_err / 2e-3 - 1.0).abs() < 0.05, "{coarse_err}");
        let rho = corr.norm() / (est_pow * err_pow).sqrt();
        assert!(rho < 0.02, "estimate/error correlation {rho}");
    }

    #[test]
    fn reverse_construction_matches_variances() {
        let n = 50_000;
        let mut rng = SimRng::seed_from_u64(8);
        let (s1, s2) = (0.05, 0.3);
        let (mut fe, mut ce) = (0.0, 0.0);
        for _ in 0..n {
            let ch = NetworkChannel {
                h: [complex_gaussian_vec(&mut rng, 1.0), complex_gaussian_vec(&mut rng, 1.0)],
                t: 0,
            };
            let (v1, v2) = views_given_channel(&ch, s1, s2, [0.0, 0.0], &mut rng);
            fe += (ch.h[0] - v1.est[0].h).norm_sqr();
            ce += (ch.h[0] - v2.est[0].h).norm_sqr();
        }
        assert!((fe / n as f64 / (2.0 * s1) - 1.0).abs() < 0.05);
        assert!((ce / n as f64 / (2.0 * s2) - 1.0).abs() < 0.05);
    }
}
