//! Per-realization rate evaluation of the transmission schemes.
//!
//! Rates are Gaussian-input achievable rates computed from SINRs and log-det
//! expressions with unit noise power. The only signal-level element is the
//! quantization of the overheard interference in alpha-MAT, which is simulated
//! on actual symbol draws.

use crate::channel_model::{Cell, ChannelVector, CsitView, NetworkChannel, SlotRealization};
use crate::error::{Error, Result};
use crate::linalg::{gaussian_rate_2x2, singular_values_3x2, CVec2, ComplexGain, Mat2};
use crate::precoding::{
    ap_zf, ap_zf_beam, conventional_zf, modified_zf, perfect_zf, random_beam, zf_beam, Beam, PrecoderPair,
};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Relative slack allowed on the per-TX power constraint.
pub const POWER_TOLERANCE: f64 = 1e-9;
/// Quantization distortion above this multiple of the unit noise is flagged.
pub const DISTORTION_FLAG_FACTOR: f64 = 10.0;
/// MAT desired-matrix conditioning below this counts as a rank violation.
pub const MAT_DESIRED_MIN_RATIO: f64 = 1e-6;
/// MAT interference-matrix σ₂/σ₁ above this counts as a rank violation.
pub const MAT_INTERFERENCE_MAX_RATIO: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// Conventional distributed ZF on imperfect current CSIT.
    #[serde(rename = "zf")]
    Zf,
    /// ZF with perfect current CSIT (reference curve).
    #[serde(rename = "zf-perfect")]
    ZfPerfect,
    #[serde(rename = "mat")]
    Mat,
    /// alpha-MAT with modified (shared-estimate) ZF.
    #[serde(rename = "amat-zf")]
    AlphaMatZf,
    /// alpha-MAT with Active/Passive ZF.
    #[serde(rename = "amat-apzf")]
    AlphaMatApzf,
    /// Single-slot scheme reaching the corner point `(1, max α)`.
    #[serde(rename = "vertex")]
    Vertex,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Zf,
        Scheme::ZfPerfect,
        Scheme::Mat,
        Scheme::AlphaMatZf,
        Scheme::AlphaMatApzf,
        Scheme::Vertex,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Zf => "zf",
            Scheme::ZfPerfect => "zf-perfect",
            Scheme::Mat => "mat",
            Scheme::AlphaMatZf => "amat-zf",
            Scheme::AlphaMatApzf => "amat-apzf",
            Scheme::Vertex => "vertex",
        }
    }

    pub fn slots(self) -> u32 {
        match self {
            Scheme::Zf | Scheme::ZfPerfect | Scheme::Vertex => 1,
            Scheme::Mat | Scheme::AlphaMatZf | Scheme::AlphaMatApzf => 3,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Scheme> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaMatVariant {
    /// Modified ZF from the shared coarse estimates; limited by α₂.
    ConvZF,
    /// Active/Passive ZF; limited by α₁.
    APZF,
}

/// Nominal stream powers of one slot and the per-TX budget `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerAllocation {
    pub p: f64,
    pub splits: Vec<(&'static str, f64)>,
}

impl PowerAllocation {
    pub fn total(&self) -> f64 {
        self.splits.iter().map(|(_, w)| w).sum()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.splits.iter().find(|(n, _)| *n == name).map(|(_, w)| *w)
    }
}

/// One transmitted stream: a beam (unit norm, or an antenna selector) and its power.
#[derive(Clone, Copy, Debug)]
struct Stream {
    beam: Beam,
    power: f64,
}

impl Stream {
    fn on(beam: &Beam, power: f64) -> Result<Stream> {
        Ok(Stream {
            beam: beam.normalized().ok_or(Error::DegenerateChannel)?,
            power,
        })
    }

    fn antenna(k: usize, power: f64) -> Stream {
        let mut beam = CVec2::ZERO;
        beam[k] = Complex64::new(1.0, 0.0);
        Stream { beam, power }
    }

    fn at(&self, h: &ChannelVector) -> f64 {
        self.power * h.inner(&self.beam).norm_sqr()
    }
}

/// Expected transmit power at each antenna for independent unit-variance symbols.
fn antenna_powers(streams: &[Stream]) -> [f64; 2] {
    let mut out = [0.0; 2];
    for s in streams {
        for (k, o) in out.iter_mut().enumerate() {
            *o += s.power * s.beam[k].norm_sqr();
        }
    }
    out
}

fn power_ratio(streams: &[Stream], p: f64) -> f64 {
    let a = antenna_powers(streams);
    a[0].max(a[1]) / p
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantizedInterference {
    pub index_bits: u32,
    pub reconstruction: ComplexGain,
    pub distortion: f64,
}

/// Rank structure of the stacked three-slot MAT observation at both RXs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatRankReport {
    /// `σ_min / σ_max` of the 3×2 desired matrix, per RX.
    pub desired_ratio: [f64; 2],
    /// `σ₂ / σ₁` of the 3×2 interference matrix, per RX.
    pub interference_ratio: [f64; 2],
}

impl MatRankReport {
    pub fn violated(&self) -> bool {
        self.desired_ratio.iter().any(|&r| r <= MAT_DESIRED_MIN_RATIO)
            || self.interference_ratio.iter().any(|&r| r >= MAT_INTERFERENCE_MAX_RATIO)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    /// Slot-1 `|h_iᴴ q̂_ī|²` for `i = 1, 2` with unit-norm beams.
    pub residual_interference: Option<[f64; 2]>,
    pub quantization: Option<[QuantizedInterference; 2]>,
    pub distortion_flag: bool,
    pub rank: Option<MatRankReport>,
    pub rank_violation: bool,
    /// Largest realized per-antenna power over all slots, relative to `P`.
    pub max_power_ratio: f64,
    /// Overheard interference rebuilt bit-exactly from the retransmitting TX's view.
    pub reconstructed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeOutcome {
    pub rate_rx1: f64,
    pub rate_rx2: f64,
    pub slots_used: u32,
    pub diagnostics: Diagnostics,
}

impl SchemeOutcome {
    pub fn sum_rate(&self) -> f64 {
        self.rate_rx1 + self.rate_rx2
    }

    pub fn rate(&self, rx: Cell) -> f64 {
        match rx {
            Cell::One => self.rate_rx1,
            Cell::Two => self.rate_rx2,
        }
    }
}

/// Uniform mid-tread scalar quantizer on the real and imaginary parts.
///
/// `bits` are split between the real (`⌈bits/2⌉`) and imaginary (`⌊bits/2⌋`)
/// parts; each part covers ±4 standard deviations of a component of a
/// `CN(0, source_power)` source. Zero is always a reconstruction level.
pub fn quantize_interference(eta: ComplexGain, source_power: f64, bits: u32) -> QuantizedInterference {
    let sigma = (0.5 * source_power.max(0.0)).sqrt();
    let q = |x: f64, b: u32| -> f64 {
        if b == 0 || sigma == 0.0 {
            return 0.0;
        }
        let levels = 2f64.powi(b as i32);
        let step = 8.0 * sigma / levels;
        let half = levels / 2.0;
        let idx = (x / step).round().clamp(-half, half - 1.0);
        idx * step
    };
    let reconstruction = Complex64::new(q(eta.re, bits.div_ceil(2)), q(eta.im, bits / 2));
    QuantizedInterference {
        index_bits: bits,
        reconstruction,
        distortion: (eta - reconstruction).norm_sqr(),
    }
}

/// Target index size `⌈(1 − α) log₂ P⌉` for overheard interference of power
/// order `P^{1−α}`.
pub fn quantizer_bits(alpha: f64, p: f64) -> u32 {
    let b = (1.0 - alpha) * p.log2();
    (b - 1e-9).ceil().max(0.0) as u32
}

/// Received powers of a two-layer superposition at one RX.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayeredReception {
    pub common: f64,
    pub private: f64,
    pub leak: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayeredRates {
    /// Rate of the common stream decodable at both RXs.
    pub common: f64,
    pub private: [f64; 2],
}

/// Successive decoding: common stream first, treating everything below it as
/// noise; then each private stream after the common term is subtracted.
pub fn successive_decode_rates(rx: &[LayeredReception; 2]) -> LayeredRates {
    let common = rx
        .iter()
        .map(|g| (g.common / (1.0 + g.private + g.leak)).ln_1p() / std::f64::consts::LN_2)
        .fold(f64::INFINITY, f64::min);
    let private = [
        (rx[0].private / (1.0 + rx[0].leak)).ln_1p() / std::f64::consts::LN_2,
        (rx[1].private / (1.0 + rx[1].leak)).ln_1p() / std::f64::consts::LN_2,
    ];
    LayeredRates {
        common: if common.is_finite() { common } else { 0.0 },
        private,
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

fn zf_rates(channel: &NetworkChannel, pair: &PrecoderPair, p: f64) -> Result<SchemeOutcome> {
    let u = Stream::on(&pair.q[0], 0.5 * p)?;
    let v = Stream::on(&pair.q[1], 0.5 * p)?;
    let (h1, h2) = (channel.to(Cell::One), channel.to(Cell::Two));
    let (s1, i1) = (u.at(h1), v.at(h1));
    let (s2, i2) = (v.at(h2), u.at(h2));
    Ok(SchemeOutcome {
        rate_rx1: log2_1p(s1 / (1.0 + i1)),
        rate_rx2: log2_1p(s2 / (1.0 + i2)),
        slots_used: 1,
        diagnostics: Diagnostics {
            residual_interference: Some([i1 / (0.5 * p), i2 / (0.5 * p)]),
            max_power_ratio: power_ratio(&[u, v], p),
            ..Default::default()
        },
    })
}

/// Single-slot conventional ZF from the TXs' own (inconsistent) estimates,
/// each symbol at power `P/2`.
pub fn run_zf_scheme(slot: &SlotRealization, p: f64) -> Result<SchemeOutcome> {
    let pair = conventional_zf(slot.view(Cell::One), slot.view(Cell::Two))?;
    zf_rates(&slot.channel, &pair, p)
}

/// ZF on the true channels.
pub fn run_zf_perfect(channel: &NetworkChannel, p: f64) -> Result<SchemeOutcome> {
    let pair = perfect_zf(channel.to(Cell::One), channel.to(Cell::Two))?;
    zf_rates(channel, &pair, p)
}

type Rows3 = [[Complex64; 2]; 3];

/// Stacked slot-1..3 MAT observation at one RX: `y = D s_desired + b (hᴴ s_int) + z`.
#[derive(Clone, Copy, Debug)]
pub struct MatObservation {
    pub desired: Rows3,
    pub interference: Rows3,
    /// Direction of the aligned interference in the 3-slot observation space.
    pub interference_dir: [Complex64; 3],
}

fn row(h: &ChannelVector, scale: Complex64) -> [Complex64; 2] {
    [h[0].conj() * scale, h[1].conj() * scale]
}

/// Builds both RXs' three-slot MAT observations. The retransmission gains
/// normalize each `η` to power `P`.
pub fn mat_observations(slots: &[NetworkChannel; 3]) -> [MatObservation; 2] {
    let [s1, s2, s3] = slots;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let h1 = s1.to(Cell::One);
    let h2 = s1.to(Cell::Two);
    // β₁² E|η₁|² = P with E|η₁|² = (P/2)‖h₁(1)‖²
    let beta1 = (2.0 / h1.norm_sqr()).sqrt();
    let beta2 = (2.0 / h2.norm_sqr()).sqrt();
    let g = |t: &NetworkChannel, rx: Cell| t.to(rx)[0].conj();

    let g12 = g(s2, Cell::One) * beta1;
    let g13 = g(s3, Cell::One) * beta2;
    let rx1 = MatObservation {
        desired: [row(h1, one), [zero; 2], row(h2, g13)],
        interference: [row(h1, one), row(h1, g12), [zero; 2]],
        interference_dir: [one, g12, zero],
    };
    let g22 = g(s2, Cell::Two) * beta1;
    let g23 = g(s3, Cell::Two) * beta2;
    let rx2 = MatObservation {
        desired: [row(h2, one), row(h1, g22), [zero; 2]],
        interference: [row(h2, one), [zero; 2], row(h2, g23)],
        interference_dir: [one, zero, g23],
    };
    [rx1, rx2]
}

pub fn mat_rank_report(obs: &[MatObservation; 2]) -> MatRankReport {
    let mut desired_ratio = [0.0; 2];
    let mut interference_ratio = [0.0; 2];
    for (j, o) in obs.iter().enumerate() {
        let (a, b) = singular_values_3x2(&o.desired);
        desired_ratio[j] = if a > 0.0 { b / a } else { 0.0 };
        let (a, b) = singular_values_3x2(&o.interference);
        interference_ratio[j] = if a > 0.0 { b / a } else { 1.0 };
    }
    MatRankReport {
        desired_ratio,
        interference_ratio,
    }
}

/// Three-slot rate of one RX: project out the interference direction (if any)
/// and evaluate `(1/3) log₂ det(I + (P/2) Aᴴ Π A)`.
#[allow(clippy::needless_range_loop)]
pub fn mat_rx_rate(desired: &Rows3, interference_dir: Option<&[Complex64; 3]>, p: f64) -> f64 {
    let mut a = *desired;
    if let Some(b) = interference_dir {
        let bn: f64 = b.iter().map(|z| z.norm_sqr()).sum();
        for col in 0..2 {
            let proj: Complex64 = (0..3).map(|r| b[r].conj() * a[r][col]).sum::<Complex64>() / bn;
            for r in 0..3 {
                a[r][col] -= b[r] * proj;
            }
        }
    }
    let mut m: Mat2 = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, mrow) in m.iter_mut().enumerate() {
        for (j, cell) in mrow.iter_mut().enumerate() {
            let gram: Complex64 = (0..3).map(|r| a[r][i].conj() * a[r][j]).sum();
            *cell = gram * (0.5 * p);
            if i == j {
                *cell += 1.0;
            }
        }
    }
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).re.max(1.0);
    det.log2() / 3.0
}

/// MAT alignment on three independent slot channels with delayed CSIT only.
pub fn run_mat(slots: &[NetworkChannel; 3], p: f64) -> Result<SchemeOutcome> {
    if slots.iter().any(|s| s.h.iter().any(|h| h.norm_sqr() == 0.0)) {
        return Err(Error::DegenerateChannel);
    }
    let obs = mat_observations(slots);
    let rank = mat_rank_report(&obs);
    let r1 = mat_rx_rate(&obs[0].desired, Some(&obs[0].interference_dir), p);
    let r2 = mat_rx_rate(&obs[1].desired, Some(&obs[1].interference_dir), p);
    Ok(SchemeOutcome {
        rate_rx1: r1,
        rate_rx2: r2,
        slots_used: 3,
        diagnostics: Diagnostics {
            rank: Some(rank),
            rank_violation: rank.violated(),
            // slot 1: P/2 from each of u and v per antenna; slots 2-3: η normalized to P
            max_power_ratio: 1.0,
            ..Default::default()
        },
    })
}

fn alpha_eff(view: &CsitView, variant: AlphaMatVariant) -> f64 {
    let own = view.tx;
    match variant {
        AlphaMatVariant::APZF => view.est[own.idx()].quality,
        AlphaMatVariant::ConvZF => view.est[own.other().idx()].quality,
    }
}

fn zf_type_pair(slot: &SlotRealization, variant: AlphaMatVariant) -> Result<PrecoderPair> {
    match variant {
        AlphaMatVariant::APZF => ap_zf(slot.view(Cell::One), slot.view(Cell::Two)),
        AlphaMatVariant::ConvZF => {
            let v = slot.view(Cell::One);
            modified_zf(v.shared(Cell::One), v.shared(Cell::Two))
        }
    }
}

/// TX that retransmits `η_rx` and the antenna carrying its index in slot 2 or 3.
fn retransmitter(variant: AlphaMatVariant, rx: Cell) -> Cell {
    match variant {
        AlphaMatVariant::APZF => rx,
        AlphaMatVariant::ConvZF => rx.other(),
    }
}

/// ZF-type beam carrying the symbol of `target`, rebuilt from only what the
/// retransmitting TX is allowed to know.
fn rebuild_beam(view: &CsitView, target: Cell, variant: AlphaMatVariant) -> Result<Beam> {
    let q = match variant {
        AlphaMatVariant::APZF => {
            let restricted = view.only_own_estimate();
            ap_zf_beam(target, restricted.estimate_of(target.other()))?
        }
        AlphaMatVariant::ConvZF => {
            let restricted = view.only_shared();
            zf_beam(target, restricted.shared(target.other()))?
        }
    };
    q.normalized().ok_or(Error::DegenerateChannel)
}

fn superpose(p_hat: &Beam, q_hat: &Beam, low: Complex64, high: Complex64) -> CVec2 {
    p_hat.scale(low) + q_hat.scale(high)
}

struct SlotOneLayout {
    p_hat: [Beam; 2],
    q_hat: [Beam; 2],
    low: f64,
    high: f64,
}

/// alpha-MAT over three slots.
///
/// Slot 1 sends two symbols per RX: the strong one on the ZF-type beam and
/// the weak one on a random beam, with power ratio `P^α`. The quantized
/// overheard interference `η̂_k` is sent as a common message in slots 2 and 3,
/// superposed with one fresh private symbol per RX at power `P^α`. RX-k
/// finally solves the slot-1 2×2 system formed by `y_k(1) − η̂_k` and
/// `η̂_k̄`, with the quantization error counted as noise.
pub fn run_alpha_mat<R: Rng + ?Sized>(
    slots: &[SlotRealization; 3],
    p: f64,
    variant: AlphaMatVariant,
    rng: &mut R,
) -> Result<SchemeOutcome> {
    let alpha = alpha_eff(slots[0].view(Cell::One), variant);
    let attenuation = p.powf(-alpha);
    let high = 0.5 * p / (1.0 + attenuation);
    let low = 0.5 * p * attenuation / (1.0 + attenuation);

    // Slot 1
    let s1 = &slots[0];
    let zf = zf_type_pair(s1, variant)?;
    let layout = SlotOneLayout {
        p_hat: [random_beam(rng), random_beam(rng)],
        q_hat: [
            zf.q[0].normalized().ok_or(Error::DegenerateChannel)?,
            zf.q[1].normalized().ok_or(Error::DegenerateChannel)?,
        ],
        low,
        high,
    };
    let streams1 = [
        Stream::on(&layout.p_hat[0], low)?,
        Stream::on(&layout.q_hat[0], high)?,
        Stream::on(&layout.p_hat[1], low)?,
        Stream::on(&layout.q_hat[1], high)?,
    ];
    let mut max_ratio = power_ratio(&streams1, p);

    // symbols: (weak, strong) per RX
    let draw = |rng: &mut R, var: f64| crate::channel_model::complex_gaussian(rng, var);
    let symbols = [[draw(rng, low), draw(rng, high)], [draw(rng, low), draw(rng, high)]];

    // η_k is heard at RX-k and carries the other RX's symbols
    let mut eta = [Complex64::new(0.0, 0.0); 2];
    let mut eta_power = [0.0; 2];
    let mut reconstructed = true;
    for rx in Cell::BOTH {
        let src = rx.other();
        let h = s1.channel.to(rx);
        let x = superpose(
            &layout.p_hat[src.idx()],
            &layout.q_hat[src.idx()],
            symbols[src.idx()][0],
            symbols[src.idx()][1],
        );
        eta[rx.idx()] = h.inner(&x);
        eta_power[rx.idx()] = layout.low * h.inner(&layout.p_hat[src.idx()]).norm_sqr()
            + layout.high * h.inner(&layout.q_hat[src.idx()]).norm_sqr();

        // same quantity, rebuilt at the retransmitting TX from its restricted view
        let tx = retransmitter(variant, rx);
        let q_local = rebuild_beam(s1.view(tx), src, variant)?;
        let x_local = superpose(
            &layout.p_hat[src.idx()],
            &q_local,
            symbols[src.idx()][0],
            symbols[src.idx()][1],
        );
        let eta_local = h.inner(&x_local);
        if eta_local != eta[rx.idx()] {
            reconstructed = false;
        }
    }
    if !reconstructed {
        return Err(Error::ReconstructionMismatch);
    }

    // Slots 2 and 3: index of η̂_1 then η̂_2, each superposed with fresh privates
    let private_power = 0.5 * p.powf(alpha);
    let common_power = (p - p.powf(alpha)).max(0.0);
    let mut private_rates = [0.0; 2];
    let mut common_capacity = [0.0; 2];
    for (s, carried) in Cell::BOTH.into_iter().enumerate() {
        let slot = &slots[s + 1];
        let pair = zf_type_pair(slot, variant)?;
        let antenna = retransmitter(variant, carried).idx();
        let c = Stream::antenna(antenna, common_power);
        let u = Stream::on(&pair.q[0], private_power)?;
        let v = Stream::on(&pair.q[1], private_power)?;
        max_ratio = max_ratio.max(power_ratio(&[c, u, v], p));
        let [r1, r2] = [Cell::One, Cell::Two].map(|rx| {
            let h = slot.channel.to(rx);
            let (own, other) = if rx == Cell::One { (&u, &v) } else { (&v, &u) };
            LayeredReception {
                common: c.at(h),
                private: own.at(h),
                leak: other.at(h),
            }
        });
        let rates = successive_decode_rates(&[r1, r2]);
        private_rates[0] += rates.private[0];
        private_rates[1] += rates.private[1];
        common_capacity[s] = rates.common;
    }

    let target_bits = quantizer_bits(alpha, p);
    let quant = [0, 1].map(|k| {
        let cap = common_capacity[k].max(0.0).floor() as u32;
        quantize_interference(eta[k], eta_power[k], target_bits.min(cap))
    });
    let distortion_flag = quant.iter().any(|q| q.distortion > DISTORTION_FLAG_FACTOR);

    // Slot-1 symbols at each RX from y_k(1) − η̂_k and η̂_k̄
    let mut slot1_rates = [0.0; 2];
    for rx in Cell::BOTH {
        let (k, kb) = (rx.idx(), rx.other().idx());
        let h_own = s1.channel.to(rx);
        let h_other = s1.channel.to(rx.other());
        let g: Mat2 = [
            [h_own.inner(&layout.p_hat[k]), h_own.inner(&layout.q_hat[k])],
            [h_other.inner(&layout.p_hat[k]), h_other.inner(&layout.q_hat[k])],
        ];
        let noise = [1.0 + quant[k].distortion, 1.0 + quant[kb].distortion];
        slot1_rates[k] = gaussian_rate_2x2(&g, [layout.low, layout.high], noise);
    }

    let h1 = s1.channel.to(Cell::One);
    let h2 = s1.channel.to(Cell::Two);
    Ok(SchemeOutcome {
        rate_rx1: (slot1_rates[0] + private_rates[0]) / 3.0,
        rate_rx2: (slot1_rates[1] + private_rates[1]) / 3.0,
        slots_used: 3,
        diagnostics: Diagnostics {
            residual_interference: Some([
                h1.inner(&layout.q_hat[1]).norm_sqr(),
                h2.inner(&layout.q_hat[0]).norm_sqr(),
            ]),
            quantization: Some(quant),
            distortion_flag,
            max_power_ratio: max_ratio,
            reconstructed,
            ..Default::default()
        },
    })
}

/// One-slot superposition scheme: a common message for `favored_rx` on its
/// serving antenna at power `P − P^{α₁}`, plus one private symbol per RX on
/// Active/Passive ZF beams at `P^{α₁}/2` each.
pub fn run_vertex_scheme(slot: &SlotRealization, p: f64, favored_rx: Cell) -> Result<SchemeOutcome> {
    let alpha = alpha_eff(slot.view(Cell::One), AlphaMatVariant::APZF);
    let pair = ap_zf(slot.view(Cell::One), slot.view(Cell::Two))?;
    let private_power = 0.5 * p.powf(alpha);
    let c = Stream::antenna(favored_rx.idx(), (p - p.powf(alpha)).max(0.0));
    let u = Stream::on(&pair.q[0], private_power)?;
    let v = Stream::on(&pair.q[1], private_power)?;
    let recv = [Cell::One, Cell::Two].map(|rx| {
        let h = slot.channel.to(rx);
        let (own, other) = if rx == Cell::One { (&u, &v) } else { (&v, &u) };
        LayeredReception {
            common: c.at(h),
            private: own.at(h),
            leak: other.at(h),
        }
    });
    let rates = successive_decode_rates(&recv);
    let mut per_rx = rates.private;
    per_rx[favored_rx.idx()] += rates.common;
    Ok(SchemeOutcome {
        rate_rx1: per_rx[0],
        rate_rx2: per_rx[1],
        slots_used: 1,
        diagnostics: Diagnostics {
            residual_interference: Some([recv[0].leak / private_power, recv[1].leak / private_power]),
            max_power_ratio: power_ratio(&[c, u, v], p),
            ..Default::default()
        },
    })
}

/// Dispatches one realization of `scheme`. Single-slot schemes use `slots[0]`.
pub fn run_scheme<R: Rng + ?Sized>(
    scheme: Scheme,
    slots: &[SlotRealization; 3],
    p: f64,
    rng: &mut R,
) -> Result<SchemeOutcome> {
    match scheme {
        Scheme::Zf => run_zf_scheme(&slots[0], p),
        Scheme::ZfPerfect => run_zf_perfect(&slots[0].channel, p),
        Scheme::Mat => run_mat(&[slots[0].channel, slots[1].channel, slots[2].channel], p),
        Scheme::AlphaMatZf => run_alpha_mat(slots, p, AlphaMatVariant::ConvZF, rng),
        Scheme::AlphaMatApzf => run_alpha_mat(slots, p, AlphaMatVariant::APZF, rng),
        Scheme::Vertex => run_vertex_scheme(&slots[0], p, Cell::One),
    }
}
