//! Beamformer families built from the TXs' CSIT views.

use crate::channel_model::{complex_gaussian_vec, Cell, ChannelVector, CsitView};
use crate::error::{Error, Result};
use crate::linalg::CVec2;
use num_complex::Complex64;
use rand::Rng;

/// Denominator magnitude below which an Active/Passive beam is rejected.
pub const APZF_THRESHOLD: f64 = 1e-3;

pub type Beam = CVec2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecoderKind {
    ConvZF,
    ModZF,
    APZF,
    Random,
}

/// Beams for RX-1's symbol (`q[0]`) and RX-2's symbol (`q[1]`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrecoderPair {
    pub q: [Beam; 2],
    pub kind: PrecoderKind,
}

impl PrecoderPair {
    pub fn beam(&self, rx: Cell) -> &Beam {
        &self.q[rx.idx()]
    }
}

/// Unit vector orthogonal to `h`, phase fixed so that its first nonzero
/// entry is real and nonnegative.
pub fn orth_complement(h: &ChannelVector) -> Result<Beam> {
    let n = h.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::DegenerateChannel);
    }
    let v = CVec2([-h[1].conj() / n, h[0].conj() / n]);
    Ok(fix_phase(v))
}

/// Unit beam `e_target`, used when a TX holds no information (an all-zero
/// estimate) about the channel it should null.
pub fn canonical_beam(target: Cell) -> Beam {
    let mut q = CVec2::ZERO;
    q[target.idx()] = Complex64::new(1.0, 0.0);
    q
}

fn is_uninformed(h: &ChannelVector) -> bool {
    *h == CVec2::ZERO
}

/// ZF beam for `target` nulling `victim_estimate`, or [`canonical_beam`]
/// when the estimate is identically zero.
pub fn zf_beam(target: Cell, victim_estimate: &ChannelVector) -> Result<Beam> {
    if is_uninformed(victim_estimate) {
        Ok(canonical_beam(target))
    } else {
        orth_complement(victim_estimate)
    }
}

fn fix_phase(v: CVec2) -> CVec2 {
    let lead = if v[0] != Complex64::new(0.0, 0.0) { v[0] } else { v[1] };
    if lead == Complex64::new(0.0, 0.0) {
        return v;
    }
    let rot = lead.conj() / lead.norm();
    let mut out = v.scale(rot);
    // force the exact real lead after rotation
    let k = if v[0] != Complex64::new(0.0, 0.0) { 0 } else { 1 };
    out[k] = Complex64::new(lead.norm(), 0.0);
    out
}

/// Rotates `v` so that entry `k` is real and nonnegative (no-op if it is zero).
fn align_phase(v: CVec2, k: usize) -> CVec2 {
    let lead = v[k];
    if lead.norm() == 0.0 {
        return v;
    }
    let mut out = v.scale(lead.conj() / lead.norm());
    out[k] = Complex64::new(lead.norm(), 0.0);
    out
}

/// Conventional distributed ZF before renormalization: element `k` of `q_i`
/// is taken from TX-k's own estimate of the cross channel `h_ī`. Both TXs
/// reference the phase of `q_i` to the entry of TX-ī, whose estimate of
/// `h_ī` is the finer one.
pub fn conventional_zf_unnormalized(view1: &CsitView, view2: &CsitView) -> Result<[Beam; 2]> {
    let views = [view1, view2];
    let mut q = [CVec2::ZERO; 2];
    for target in Cell::BOTH {
        let victim = target.other();
        for tx in Cell::BOTH {
            let local = align_phase(zf_beam(target, views[tx.idx()].estimate_of(victim))?, victim.idx());
            q[target.idx()][tx.idx()] = local[tx.idx()];
        }
    }
    Ok(q)
}

/// Conventional distributed ZF, renormalized to unit-norm beams.
pub fn conventional_zf(view1: &CsitView, view2: &CsitView) -> Result<PrecoderPair> {
    let raw = conventional_zf_unnormalized(view1, view2)?;
    let mut q = [CVec2::ZERO; 2];
    for (dst, src) in q.iter_mut().zip(raw.iter()) {
        *dst = src.normalized().ok_or(Error::DegenerateChannel)?;
    }
    Ok(PrecoderPair {
        q,
        kind: PrecoderKind::ConvZF,
    })
}

/// Modified ZF built entirely from the coarse estimates both TXs share.
pub fn modified_zf(shared_worse_1: &ChannelVector, shared_worse_2: &ChannelVector) -> Result<PrecoderPair> {
    Ok(PrecoderPair {
        q: [zf_beam(Cell::One, shared_worse_2)?, zf_beam(Cell::Two, shared_worse_1)?],
        kind: PrecoderKind::ModZF,
    })
}

/// Active/Passive beam serving `target`: the passive element (at TX-`target`)
/// is 1 and the active element (at the other TX) nulls that TX's own-cell
/// estimate `own_estimate` of the victim channel.
pub fn ap_zf_beam(target: Cell, own_estimate: &ChannelVector) -> Result<Beam> {
    let active = target.other().idx();
    let passive = target.idx();
    if is_uninformed(own_estimate) {
        return Ok(canonical_beam(target));
    }
    let den = own_estimate[active].conj();
    if den.norm() < APZF_THRESHOLD {
        return Err(Error::NearSingular {
            magnitude: den.norm(),
            threshold: APZF_THRESHOLD,
        });
    }
    let mut q = CVec2::ZERO;
    q[passive] = Complex64::new(1.0, 0.0);
    q[active] = -own_estimate[passive].conj() / den;
    Ok(q)
}

/// Active/Passive ZF: `q_1` depends only on TX-2's `ĥ₂^[2]`, `q_2` only on
/// TX-1's `ĥ₁^[1]`. Beams are left unnormalized.
pub fn ap_zf(view1: &CsitView, view2: &CsitView) -> Result<PrecoderPair> {
    let q1 = ap_zf_beam(Cell::One, view2.estimate_of(Cell::Two))?;
    let q2 = ap_zf_beam(Cell::Two, view1.estimate_of(Cell::One))?;
    Ok(PrecoderPair {
        q: [q1, q2],
        kind: PrecoderKind::APZF,
    })
}

/// Exact ZF on the true channels.
pub fn perfect_zf(h1: &ChannelVector, h2: &ChannelVector) -> Result<PrecoderPair> {
    Ok(PrecoderPair {
        q: [orth_complement(h2)?, orth_complement(h1)?],
        kind: PrecoderKind::ConvZF,
    })
}

/// Isotropic unit-norm beam.
pub fn random_beam<R: Rng + ?Sized>(rng: &mut R) -> Beam {
    loop {
        if let Some(b) = complex_gaussian_vec(rng, 1.0).normalized() {
            return b;
        }
    }
}

pub fn random_pair<R: Rng + ?Sized>(rng: &mut R) -> PrecoderPair {
    PrecoderPair {
        q: [random_beam(rng), random_beam(rng)],
        kind: PrecoderKind::Random,
    }
}

/// `|hᴴ q|²`.
pub fn residual_interference_power(h: &ChannelVector, q: &Beam) -> f64 {
    h.inner(q).norm_sqr()
}
