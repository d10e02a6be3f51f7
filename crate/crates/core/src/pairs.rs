//! Entangled kaon pairs from φ decay or pp̄ annihilation.
//!
//! Two-kaon amplitudes are 4-vectors indexed `2·left + right`, with both
//! particles expressed in the same single-kaon [`Basis`]. In the free-space
//! basis the components are therefore `(S⊗S, S⊗L, L⊗S, L⊗L)`.

use std::f64::consts::FRAC_1_SQRT_2;

use log::warn;

use crate::constants::KaonConstants;
use crate::error::{KaonError, Result};
use crate::kaon::{basis_change, basis_matrix, free_factors, Basis};
use crate::medium::{regeneration_eta, MediumParams};
use crate::numkernel::{self, kron, re, Complex};

pub const SS: usize = 0;
pub const SL: usize = 1;
pub const LS: usize = 2;
pub const LL: usize = 3;

/// Two-kaon state with the proper times of the left and right movers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoKaonVec {
    pub amps: [Complex; 4],
    pub basis: Basis,
    pub t_l: f64,
    pub t_r: f64,
}

impl TwoKaonVec {
    pub fn new(amps: [Complex; 4], basis: Basis) -> Self {
        Self {
            amps,
            basis,
            t_l: 0.0,
            t_r: 0.0,
        }
    }

    pub fn to_basis(&self, target: Basis, c: &KaonConstants) -> Result<TwoKaonVec> {
        let t = basis_change(&self.basis, &target, c)?;
        let a = kron(&t, &t)?.apply(&self.amps);
        Ok(TwoKaonVec {
            amps: [a[0], a[1], a[2], a[3]],
            basis: target,
            ..*self
        })
    }

    pub fn strangeness_amps(&self, c: &KaonConstants) -> Result<[Complex; 4]> {
        let v = basis_matrix(&self.basis, c)?;
        let a = kron(&v, &v)?.apply(&self.amps);
        Ok([a[0], a[1], a[2], a[3]])
    }

    /// Physical squared norm.
    pub fn norm_sqr(&self, c: &KaonConstants) -> Result<f64> {
        Ok(numkernel::norm_sqr(&self.strangeness_amps(c)?))
    }

    /// Physical inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &TwoKaonVec, c: &KaonConstants) -> Result<Complex> {
        Ok(numkernel::inner_product(
            &self.strangeness_amps(c)?,
            &other.strangeness_amps(c)?,
        ))
    }

    /// Exchanges the left and right particles, including their times.
    pub fn swap(&self) -> TwoKaonVec {
        let a = self.amps;
        TwoKaonVec {
            amps: [a[0], a[2], a[1], a[3]],
            basis: self.basis,
            t_l: self.t_r,
            t_r: self.t_l,
        }
    }

    pub fn max_abs_diff(&self, other: &TwoKaonVec, c: &KaonConstants) -> Result<f64> {
        let o = other.to_basis(self.basis, c)?;
        Ok((0..4)
            .map(|k| (self.amps[k] - o.amps[k]).norm())
            .fold(0.0, f64::max))
    }
}

/// Complex numbers describing a regenerated pair relative to its `S⊗L`
/// amplitude: `R_S = a_SS/a_SL`, `R_L = a_LL/a_SL` at common time `t_common`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegenerationCoefficients {
    pub eta: Complex,
    pub r_l: Complex,
    pub r_s: Complex,
    pub t_common: f64,
}

/// `(1/√2)(|K⁰⟩|K̄⁰⟩ − |K̄⁰⟩|K⁰⟩)` at `t_l = t_r = 0`, strangeness coordinates.
pub fn singlet(_c: &KaonConstants) -> TwoKaonVec {
    let h = re(FRAC_1_SQRT_2);
    TwoKaonVec::new([re(0.0), h, -h, re(0.0)], Basis::Strangeness)
}

/// Coefficient of `(K_S⊗K_L − K_L⊗K_S)` in the singlet,
/// `(1 + |ε|²)/(√2·(1 − ε²))`.
pub fn singlet_free_space_coefficient(c: &KaonConstants) -> Complex {
    re((1.0 + c.eps.norm_sqr()) * FRAC_1_SQRT_2) / (re(1.0) - c.eps * c.eps)
}

/// Evolves both particles to the absolute proper times `(t_l, t_r)`.
///
/// With Δt = t_l − t_r the singlet becomes
/// `(1/√2)e^{−(Γ_S t_l + Γ_L t_r)/2}e^{−i(m_S t_l + m_L t_r)}(S⊗L − e^{−(iΔm + ΔΓ/2)Δt} L⊗S)`.
pub fn evolve_two_times(
    v: &TwoKaonVec,
    t_l: f64,
    t_r: f64,
    c: &KaonConstants,
) -> Result<TwoKaonVec> {
    for (target, current) in [(t_l, v.t_l), (t_r, v.t_r)] {
        if !target.is_finite() {
            return Err(KaonError::InvalidParameter(format!(
                "time must be finite (got {target})"
            )));
        }
        if target < current {
            return Err(KaonError::TimeReversal { target, current });
        }
    }
    let fs = v.to_basis(Basis::FreeSpace, c)?;
    let (ls, ll) = free_factors(t_l - v.t_l, c);
    let (rs, rl) = free_factors(t_r - v.t_r, c);
    let left = [ls, ll];
    let right = [rs, rl];
    let mut amps = fs.amps;
    for (k, a) in amps.iter_mut().enumerate() {
        *a *= left[k / 2] * right[k % 2];
    }
    TwoKaonVec {
        amps,
        basis: Basis::FreeSpace,
        t_l,
        t_r,
    }
    .to_basis(v.basis, c)
}

/// Passes the left kaon of a freshly produced singlet through a thin
/// regenerator of traversal time `dt`:
/// `(1/√2)(S⊗L − L⊗S + η(S⊗S − L⊗L))`, in free-space coordinates.
///
/// The slab traversal time itself is not propagated.
pub fn regenerate_thin(
    v: &TwoKaonVec,
    m: &MediumParams,
    dt: f64,
    c: &KaonConstants,
) -> Result<(TwoKaonVec, RegenerationCoefficients)> {
    let s = singlet(c);
    if v.t_l != 0.0 || v.t_r != 0.0 || v.max_abs_diff(&s, c)? > 1e-12 {
        return Err(KaonError::InvalidParameter(
            "thin regeneration expects the singlet at t = 0".into(),
        ));
    }
    let eta = regeneration_eta(m, c, dt)?;
    let mut fs = v.to_basis(Basis::FreeSpace, c)?;
    let a = fs.amps[SL];
    fs.amps[SS] += eta * a;
    fs.amps[LL] -= eta * a;
    let coeffs = RegenerationCoefficients {
        eta,
        r_l: -eta,
        r_s: eta,
        t_common: 0.0,
    };
    Ok((fs, coeffs))
}

/// Propagates a regenerated pair to the common proper time `t` and
/// renormalizes it to the surviving pairs:
/// `|Φ⟩ = (S⊗L − L⊗S + R_L L⊗L + R_S S⊗S)/√(2 + |R_L|² + |R_S|²)`.
///
/// `R_L`, `R_S` are read off the propagated amplitudes and η is the
/// `S⊗S/S⊗L` ratio of the input. Times outside `[τ_S, τ_L]` are accepted
/// with a warning.
pub fn propagate_and_normalize(
    v: &TwoKaonVec,
    t: f64,
    c: &KaonConstants,
) -> Result<(TwoKaonVec, RegenerationCoefficients)> {
    if v.t_l != v.t_r {
        return Err(KaonError::InvalidParameter(format!(
            "pair must share a common time (got t_l = {}, t_r = {})",
            v.t_l, v.t_r
        )));
    }
    if !(1.0 / c.gamma_s..=1.0 / c.gamma_l).contains(&t) {
        warn!("common time {t} lies outside [tau_S, tau_L]");
    }
    let start = v.to_basis(Basis::FreeSpace, c)?;
    if start.amps[SL].norm() == 0.0 {
        return Err(KaonError::InvalidParameter(
            "pair has no S⊗L component".into(),
        ));
    }
    let eta = start.amps[SS] / start.amps[SL];
    let evolved = evolve_two_times(&start, t, t, c)?;
    let a = evolved.amps[SL];
    let antisym = evolved.amps[LS] / a;
    if (antisym + re(1.0)).norm() > 1e-9 {
        warn!("L⊗S/S⊗L ratio {antisym} differs from -1; state is not of the regenerated form");
    }
    let coeffs = RegenerationCoefficients {
        eta,
        r_l: evolved.amps[LL] / a,
        r_s: evolved.amps[SS] / a,
        t_common: t,
    };
    let phi = normalized_phi(coeffs.r_l, coeffs.r_s, c)?;
    Ok((
        TwoKaonVec {
            t_l: t,
            t_r: t,
            ..phi
        },
        coeffs,
    ))
}

/// Closed-form `(R_L, R_S) = (−η e^{−(iΔm+ΔΓ/2)t}, η e^{(iΔm+ΔΓ/2)t})`.
pub fn regeneration_closed_form(eta: Complex, t: f64, c: &KaonConstants) -> (Complex, Complex) {
    let x = (c.pair_exponent() * t).exp();
    (-eta / x, eta * x)
}

/// `(S⊗L − L⊗S + R_L L⊗L + R_S S⊗S)` scaled to unit physical norm.
pub fn normalized_phi(r_l: Complex, r_s: Complex, c: &KaonConstants) -> Result<TwoKaonVec> {
    let raw = TwoKaonVec::new([r_s, re(1.0), re(-1.0), r_l], Basis::FreeSpace);
    let n = raw.norm_sqr(c)?.sqrt();
    if !(n.is_finite() && n > 0.0) {
        return Err(KaonError::NonFinite("normalized_phi"));
    }
    let inv = re(1.0 / n);
    Ok(TwoKaonVec {
        amps: raw.amps.map(|z| z * inv),
        ..raw
    })
}

/// `|amplitude|²` of the `(S⊗S, S⊗L, L⊗S, L⊗L)` components.
pub fn component_weights(v: &TwoKaonVec, c: &KaonConstants) -> Result<[f64; 4]> {
    Ok(v.to_basis(Basis::FreeSpace, c)?.amps.map(|z| z.norm_sqr()))
}
