//! Kaon constants and the internal unit system.
//!
//! Internally ħ = 1 and time is measured in units of the K_S lifetime τ_S,
//! so Γ_S = 1 and energies are in ħ/τ_S. [`UnitSystem`] converts MeV and
//! seconds at the boundary.

use crate::error::{KaonError, Result};
use crate::numkernel::{re, Complex};

/// ħ in MeV·s.
pub const HBAR_MEV_S: f64 = 6.58212e-22;
/// K_S lifetime in seconds.
pub const TAU_S_SECONDS: f64 = 8.954e-11;
/// K_L lifetime in seconds.
pub const TAU_L_SECONDS: f64 = 5.17e-8;
/// Mass splitting m_L − m_S in MeV.
pub const DELTA_M_MEV: f64 = 3.49e-12;
/// Mass splitting in the natural unit system, Δm·τ_S.
pub const DELTA_M_NATURAL: f64 = 0.47;
/// Fitted mean decoherence rate reported for the φ-factory/pp̄ EPR data, in MeV.
pub const LAMBDA_MEAN_MEV: f64 = 1.84e-12;
/// Upper bound of the same fit, in MeV.
pub const LAMBDA_UPPER_MEV: f64 = 4.34e-12;
/// Effective decoherence parameter quoted alongside [`LAMBDA_MEAN_MEV`].
pub const ZETA_REFERENCE: f64 = 0.13;
/// First-detection proper time associated with 2 cm of kaon flight, in τ_S.
pub const TAU_REFERENCE: f64 = 0.55;

/// Conversion between MeV / seconds and the internal ħ = 1, τ_S = 1 units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub hbar_mev_s: f64,
    pub tau_s_s: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            hbar_mev_s: HBAR_MEV_S,
            tau_s_s: TAU_S_SECONDS,
        }
    }
}

impl UnitSystem {
    /// MeV → ħ/τ_S.
    pub fn energy_to_natural(&self, mev: f64) -> f64 {
        mev * self.tau_s_s / self.hbar_mev_s
    }

    /// ħ/τ_S → MeV.
    pub fn energy_from_natural(&self, natural: f64) -> f64 {
        natural * self.hbar_mev_s / self.tau_s_s
    }

    pub fn time_to_natural(&self, seconds: f64) -> f64 {
        seconds / self.tau_s_s
    }

    pub fn time_from_natural(&self, natural: f64) -> f64 {
        natural * self.tau_s_s
    }

    /// s⁻¹ → 1/τ_S.
    pub fn rate_to_natural(&self, per_second: f64) -> f64 {
        per_second * self.tau_s_s
    }

    pub fn rate_from_natural(&self, natural: f64) -> f64 {
        natural / self.tau_s_s
    }
}

/// Masses, widths, decoherence rate and CP parameter of the neutral kaon
/// system, in internal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KaonConstants {
    pub m_s: f64,
    pub m_l: f64,
    pub gamma_s: f64,
    pub gamma_l: f64,
    /// Decoherence rate λ.
    pub lambda: f64,
    /// CP violation parameter ε.
    pub eps: Complex,
}

impl Default for KaonConstants {
    /// Δm = 0.47, Γ_S = 1, Γ_L = τ_S/τ_L, λ = 0, ε = 0. Only mass
    /// differences are observable, so m_S is placed at zero.
    fn default() -> Self {
        Self {
            m_s: 0.0,
            m_l: DELTA_M_NATURAL,
            gamma_s: 1.0,
            gamma_l: TAU_S_SECONDS / TAU_L_SECONDS,
            lambda: 0.0,
            eps: re(0.0),
        }
    }
}

impl KaonConstants {
    pub fn new(
        m_s: f64,
        m_l: f64,
        gamma_s: f64,
        gamma_l: f64,
        lambda: f64,
        eps: Complex,
    ) -> Result<Self> {
        let c = Self {
            m_s,
            m_l,
            gamma_s,
            gamma_l,
            lambda,
            eps,
        };
        c.validate()?;
        Ok(c)
    }

    /// Builds constants from a mass splitting in MeV and lifetimes in seconds.
    /// The time unit of the result is `units.tau_s_s`.
    pub fn from_mev_seconds(
        units: &UnitSystem,
        delta_m_mev: f64,
        tau_s: f64,
        tau_l: f64,
    ) -> Result<Self> {
        Self::new(
            0.0,
            units.energy_to_natural(delta_m_mev),
            units.time_to_natural(tau_s).recip(),
            units.time_to_natural(tau_l).recip(),
            0.0,
            re(0.0),
        )
    }

    /// Reference constants expressed through the MeV/second inputs, giving
    /// Δm·τ_S = 0.4748 rather than the rounded 0.47 of [`Default`].
    pub fn from_reference_mev() -> Self {
        Self::from_mev_seconds(
            &UnitSystem::default(),
            DELTA_M_MEV,
            TAU_S_SECONDS,
            TAU_L_SECONDS,
        )
        .expect("reference constants are valid")
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        let c = Self { lambda, ..self };
        c.validate()?;
        Ok(c)
    }

    pub fn with_lambda_mev(self, units: &UnitSystem, lambda_mev: f64) -> Result<Self> {
        self.with_lambda(units.energy_to_natural(lambda_mev))
    }

    pub fn with_eps(self, eps: Complex) -> Result<Self> {
        let c = Self { eps, ..self };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.m_s, self.m_l, self.gamma_s, self.gamma_l, self.lambda]
            .iter()
            .all(|x| x.is_finite())
            && self.eps.is_finite();
        if !finite {
            return Err(KaonError::InvalidParameter(
                "constants must be finite".into(),
            ));
        }
        if !(self.gamma_s > self.gamma_l && self.gamma_l > 0.0) {
            return Err(KaonError::InvalidParameter(format!(
                "widths must satisfy gamma_S > gamma_L > 0 (got {} and {})",
                self.gamma_s, self.gamma_l
            )));
        }
        if self.delta_m() <= 0.0 {
            return Err(KaonError::InvalidParameter(format!(
                "mass splitting m_L - m_S must be positive (got {})",
                self.delta_m()
            )));
        }
        if self.lambda < 0.0 {
            return Err(KaonError::InvalidParameter(format!(
                "decoherence rate must be non-negative (got {})",
                self.lambda
            )));
        }
        if self.p().norm() == 0.0 || self.q().norm() == 0.0 {
            return Err(KaonError::InvalidParameter(
                "eps = ±1 makes the K_S/K_L basis singular".into(),
            ));
        }
        Ok(())
    }

    /// Δm = m_L − m_S.
    pub fn delta_m(&self) -> f64 {
        self.m_l - self.m_s
    }

    /// ΔΓ = Γ_L − Γ_S (negative).
    pub fn delta_gamma(&self) -> f64 {
        self.gamma_l - self.gamma_s
    }

    /// Γ = (Γ_S + Γ_L) / 2.
    pub fn gamma_mean(&self) -> f64 {
        0.5 * (self.gamma_s + self.gamma_l)
    }

    pub fn p(&self) -> Complex {
        re(1.0) + self.eps
    }

    pub fn q(&self) -> Complex {
        re(1.0) - self.eps
    }

    /// r = q/p = (1 − ε)/(1 + ε).
    pub fn r(&self) -> Complex {
        self.q() / self.p()
    }

    /// Complex eigenvalue m_S − iΓ_S/2 of the effective Hamiltonian.
    pub fn lambda_short(&self) -> Complex {
        Complex::new(self.m_s, -0.5 * self.gamma_s)
    }

    /// Complex eigenvalue m_L − iΓ_L/2.
    pub fn lambda_long(&self) -> Complex {
        Complex::new(self.m_l, -0.5 * self.gamma_l)
    }

    /// Δm − (i/2)ΔΓ.
    pub fn complex_splitting(&self) -> Complex {
        Complex::new(self.delta_m(), -0.5 * self.delta_gamma())
    }

    /// iΔm + ΔΓ/2, the exponent rate appearing in relative pair phases.
    pub fn pair_exponent(&self) -> Complex {
        Complex::new(0.5 * self.delta_gamma(), self.delta_m())
    }
}
