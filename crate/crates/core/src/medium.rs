//! Kaon propagation inside homogeneous nucleonic matter.
//!
//! The medium adds a strangeness-diagonal strong-interaction term
//! `−(2πν/m_K)·diag(f₀, f̄₀)` to the effective Hamiltonian. Its eigenstates
//! `K'_S`, `K'_L` are controlled by the complex regenerator parameter ρ.

use std::f64::consts::PI;

use log::warn;

use crate::constants::KaonConstants;
use crate::error::{KaonError, Result};
use crate::kaon::{build_heff, Basis, KaonVec};
use crate::numkernel::{self, re, CMatrix, Complex, I};

/// Thickness (proper time, units of τ_S) above which the thin-regenerator
/// approximation for η is flagged.
pub const THIN_REGENERATOR_LIMIT: f64 = 0.1;

/// Nucleonic medium: density ν, mean kaon mass m_K and forward scattering
/// amplitudes f₀ (K⁰) and f̄₀ (K̄⁰), all in internal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumParams {
    pub nu: f64,
    pub m_k: f64,
    pub f0: Complex,
    pub f0bar: Complex,
}

impl MediumParams {
    pub fn new(nu: f64, m_k: f64, f0: Complex, f0bar: Complex) -> Result<Self> {
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(KaonError::InvalidParameter(format!(
                "medium density must be >= 0 (got {nu})"
            )));
        }
        if !(m_k.is_finite() && m_k > 0.0) {
            return Err(KaonError::InvalidParameter(format!(
                "kaon mass must be > 0 (got {m_k})"
            )));
        }
        if !(f0.is_finite() && f0bar.is_finite()) {
            return Err(KaonError::InvalidParameter(
                "scattering amplitudes must be finite".into(),
            ));
        }
        Ok(Self { nu, m_k, f0, f0bar })
    }

    /// Medium specified by its drive term `(πν/m_K)(f₀ − f̄₀)` alone, realised
    /// as ν = 1, m_K = π, f₀ = drive, f̄₀ = 0.
    pub fn from_drive(drive: Complex) -> Self {
        Self {
            nu: 1.0,
            m_k: PI,
            f0: drive,
            f0bar: re(0.0),
        }
    }

    /// Vacuum: no regeneration, no absorption.
    pub fn vacuum() -> Self {
        Self {
            nu: 0.0,
            m_k: 1.0,
            f0: re(0.0),
            f0bar: re(0.0),
        }
    }

    /// `(πν/m_K)(f₀ − f̄₀)`.
    pub fn drive(&self) -> Complex {
        (self.f0 - self.f0bar) * (PI * self.nu / self.m_k)
    }

    pub fn rho(&self, c: &KaonConstants) -> Complex {
        regenerator_rho(self, c)
    }
}

/// ρ = (πν/m_K)(f₀ − f̄₀) / (Δm − (i/2)ΔΓ).
pub fn regenerator_rho(m: &MediumParams, c: &KaonConstants) -> Complex {
    m.drive() / c.complex_splitting()
}

/// `(ρ̄, ρ̄⁻¹) = (√(1+4ρ²) + 2ρ, √(1+4ρ²) − 2ρ)` on the principal branch.
///
/// Whichever of the two has the larger modulus is formed directly and the
/// other as its reciprocal, so that the product is 1 to rounding even when
/// one of the sums cancels catastrophically.
pub fn rhobar_pair(rho: Complex) -> (Complex, Complex) {
    let s = (re(1.0) + rho * rho * 4.0).sqrt();
    let plus = s + rho * 2.0;
    let minus = s - rho * 2.0;
    if plus.norm() >= minus.norm() {
        (plus, plus.inv())
    } else {
        (minus.inv(), minus)
    }
}

/// `H_medium = H − (2πν/m_K)·diag(f₀, f̄₀)` in the strangeness basis.
pub fn build_medium_h(m: &MediumParams, c: &KaonConstants) -> Result<CMatrix> {
    let h = build_heff(c, Basis::Strangeness)?;
    let k = 2.0 * PI * m.nu / m.m_k;
    let shift = CMatrix::from_diagonal(&[m.f0 * k, m.f0bar * k])?;
    Ok(&h - &shift)
}

/// Normalized inside-matter eigenstates `(K'_L, K'_S)` in strangeness
/// coordinates:
///
/// `K'_L ∝ |K⁰⟩ + rρ̄|K̄⁰⟩`, `K'_S ∝ |K⁰⟩ − rρ̄⁻¹|K̄⁰⟩`, with r = (1 − ε)/(1 + ε).
pub fn eigenstates_in_matter(m: &MediumParams, c: &KaonConstants) -> Result<(KaonVec, KaonVec)> {
    let r = c.r();
    let (rb, rb_inv) = rhobar_pair(regenerator_rho(m, c));
    let make = |x: Complex| {
        let n = (1.0 + x.norm_sqr()).sqrt();
        KaonVec::new([re(1.0 / n), x / n], Basis::Strangeness)
    };
    let long = make(r * rb);
    let short = make(-(r * rb_inv));
    if !(long.amps[1].is_finite() && short.amps[1].is_finite()) {
        return Err(KaonError::NonFinite("eigenstates_in_matter"));
    }
    Ok((long, short))
}

/// Complex eigenvalues `(μ_L, μ_S)` of `H_medium` belonging to `(K'_L, K'_S)`.
pub fn medium_eigenvalues(m: &MediumParams, c: &KaonConstants) -> Result<(Complex, Complex)> {
    let h = build_medium_h(m, c)?;
    let (long, short) = eigenstates_in_matter(m, c)?;
    // the K⁰ component of both states is real and strictly positive
    let mu = |v: &KaonVec| h.apply(&v.amps)[0] / v.amps[0];
    Ok((mu(&long), mu(&short)))
}

/// `⟨K'_S|K'_L⟩` (antilinear in the first argument).
pub fn inside_matter_overlap(m: &MediumParams, c: &KaonConstants) -> Result<Complex> {
    let (long, short) = eigenstates_in_matter(m, c)?;
    Ok(numkernel::inner_product(&short.amps, &long.amps))
}

/// First-order regeneration amplitude of a thin slab traversed in proper
/// time `dt`: η = iρ(Δm − (i/2)ΔΓ)Δt.
pub fn regeneration_eta(m: &MediumParams, c: &KaonConstants, dt: f64) -> Result<Complex> {
    if !dt.is_finite() {
        return Err(KaonError::InvalidParameter(format!(
            "slab time must be finite (got {dt})"
        )));
    }
    if dt < 0.0 {
        return Err(KaonError::NegativeTime(dt));
    }
    if dt > THIN_REGENERATOR_LIMIT {
        warn!("regenerator traversal time {dt} exceeds the thin-slab regime ({THIN_REGENERATOR_LIMIT} tau_S)");
    }
    Ok(I * regenerator_rho(m, c) * c.complex_splitting() * dt)
}
