//! Single neutral kaon: quasi-spin bases, the effective Hamiltonian and
//! free-space propagation.
//!
//! Coordinates are always 2-vectors `(a, b)` whose meaning depends on the
//! [`Basis`] tag:
//!
//! * `Strangeness`: `a|K⁰⟩ + b|K̄⁰⟩` (orthonormal),
//! * `FreeSpace`: `a|K_S⟩ + b|K_L⟩` with `|K_S⟩ ∝ p|K⁰⟩ − q|K̄⁰⟩` and
//!   `|K_L⟩ ∝ p|K⁰⟩ + q|K̄⁰⟩` (quasi-orthonormal for ε ≠ 0),
//! * `InsideMatter`: `a|K'_S⟩ + b|K'_L⟩`, the medium eigenstates.
//!
//! Norms and overlaps are always computed physically, i.e. after mapping to
//! strangeness coordinates.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::constants::KaonConstants;
use crate::error::{KaonError, Result};
use crate::medium::{self, MediumParams};
use crate::numkernel::{self, re, sigma_x, sigma_y, CMatrix, Complex, I};

/// Quasi-spin basis in which kaon amplitudes are expressed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    Strangeness,
    FreeSpace,
    InsideMatter(MediumParams),
}

impl Basis {
    pub fn name(&self) -> &'static str {
        match self {
            Basis::Strangeness => "strangeness",
            Basis::FreeSpace => "free-space",
            Basis::InsideMatter(_) => "inside-matter",
        }
    }
}

/// Matrix whose columns are the basis kets in strangeness coordinates.
pub fn basis_matrix(basis: &Basis, c: &KaonConstants) -> Result<CMatrix> {
    match basis {
        Basis::Strangeness => CMatrix::identity(2),
        Basis::FreeSpace => {
            let (p, q) = (c.p(), c.q());
            let n = re((p.norm_sqr() + q.norm_sqr()).sqrt());
            CMatrix::from_rows(2, &[p / n, p / n, -q / n, q / n])
        }
        Basis::InsideMatter(m) => {
            let (long, short) = medium::eigenstates_in_matter(m, c)?;
            CMatrix::from_rows(
                2,
                &[short.amps[0], long.amps[0], short.amps[1], long.amps[1]],
            )
        }
    }
}

/// Maps coordinates in `from` to coordinates in `to`.
pub fn basis_change(from: &Basis, to: &Basis, c: &KaonConstants) -> Result<CMatrix> {
    if from == to {
        return CMatrix::identity(2);
    }
    let src = basis_matrix(from, c)?;
    let dst_inv = basis_matrix(to, c)?.try_inverse()?;
    Ok(&dst_inv * &src)
}

/// Single-kaon state vector at proper time `t` (units of τ_S).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KaonVec {
    pub amps: [Complex; 2],
    pub basis: Basis,
    pub t: f64,
}

impl KaonVec {
    pub fn new(amps: [Complex; 2], basis: Basis) -> Self {
        Self {
            amps,
            basis,
            t: 0.0,
        }
    }

    /// |K⁰⟩
    pub fn k0() -> Self {
        Self::new([re(1.0), re(0.0)], Basis::Strangeness)
    }

    /// |K̄⁰⟩
    pub fn k0bar() -> Self {
        Self::new([re(0.0), re(1.0)], Basis::Strangeness)
    }

    /// |K_S⟩
    pub fn k_short() -> Self {
        Self::new([re(1.0), re(0.0)], Basis::FreeSpace)
    }

    /// |K_L⟩
    pub fn k_long() -> Self {
        Self::new([re(0.0), re(1.0)], Basis::FreeSpace)
    }

    /// CP-even |K₁⁰⟩ = (|K⁰⟩ − |K̄⁰⟩)/√2.
    pub fn k1() -> Self {
        Self::new([re(FRAC_1_SQRT_2), re(-FRAC_1_SQRT_2)], Basis::Strangeness)
    }

    /// CP-odd |K₂⁰⟩ = (|K⁰⟩ + |K̄⁰⟩)/√2.
    pub fn k2() -> Self {
        Self::new([re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2)], Basis::Strangeness)
    }

    pub fn at_time(self, t: f64) -> Self {
        Self { t, ..self }
    }

    /// Strangeness-basis amplitudes.
    pub fn strangeness_amps(&self, c: &KaonConstants) -> Result<[Complex; 2]> {
        let v = basis_matrix(&self.basis, c)?.apply(&self.amps);
        Ok([v[0], v[1]])
    }

    /// Physical squared norm.
    pub fn norm_sqr(&self, c: &KaonConstants) -> Result<f64> {
        Ok(numkernel::norm_sqr(&self.strangeness_amps(c)?))
    }

    /// Physical inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &KaonVec, c: &KaonConstants) -> Result<Complex> {
        Ok(numkernel::inner_product(
            &self.strangeness_amps(c)?,
            &other.strangeness_amps(c)?,
        ))
    }

    /// Largest coordinate difference after expressing `other` in this basis.
    pub fn max_abs_diff(&self, other: &KaonVec, c: &KaonConstants) -> Result<f64> {
        let o = to_basis(other, self.basis, c)?;
        Ok((0..2)
            .map(|k| (self.amps[k] - o.amps[k]).norm())
            .fold(0.0, f64::max))
    }
}

/// Re-expresses `v` in `target` coordinates.
pub fn to_basis(v: &KaonVec, target: Basis, c: &KaonConstants) -> Result<KaonVec> {
    let t = basis_change(&v.basis, &target, c)?;
    let a = t.apply(&v.amps);
    Ok(KaonVec {
        amps: [a[0], a[1]],
        basis: target,
        t: v.t,
    })
}

/// Effective Hamiltonian `H = M − (i/2)Γ`.
///
/// In the free-space basis this is `diag(m_S − iΓ_S/2, m_L − iΓ_L/2)`; in the
/// strangeness basis it is the similarity transform of that diagonal form by
/// the p/q basis matrix, which for ε = 0 reduces to the equal-diagonal
/// `M₁₁, M₁₂, Γ₁₁, Γ₁₂` textbook matrices.
pub fn build_heff(c: &KaonConstants, basis: Basis) -> Result<CMatrix> {
    let diag = CMatrix::from_diagonal(&[c.lambda_short(), c.lambda_long()])?;
    match basis {
        Basis::FreeSpace => Ok(diag),
        Basis::Strangeness => diag.similarity(&basis_matrix(&Basis::FreeSpace, c)?),
        Basis::InsideMatter(_) => Err(KaonError::UnsupportedBasis("inside-matter")),
    }
}

/// `H = αI + β(sinθ σ_x + cosθ σ_y)` with `e^{iθ} = (1 − ε)/(1 + ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiSpinHamiltonian {
    pub alpha: Complex,
    pub beta: Complex,
    pub theta: Complex,
}

impl QuasiSpinHamiltonian {
    pub fn matrix(&self) -> CMatrix {
        let id = CMatrix::identity(2).expect("2x2");
        let rot = &sigma_x().scale(self.theta.sin()) + &sigma_y().scale(self.theta.cos());
        &id.scale(self.alpha) + &rot.scale(self.beta)
    }
}

pub fn build_quasispin_h(c: &KaonConstants) -> Result<QuasiSpinHamiltonian> {
    if c.p().norm() == 0.0 {
        return Err(KaonError::InvalidParameter("eps = -1 gives p = 0".into()));
    }
    let r = c.r();
    if r.norm() == 0.0 {
        return Err(KaonError::InvalidParameter("eps = 1 gives q = 0".into()));
    }
    let alpha = Complex::new(0.5 * (c.m_l + c.m_s), -0.25 * (c.gamma_l + c.gamma_s));
    let beta = Complex::new(0.5 * (c.m_l - c.m_s), -0.25 * (c.gamma_l - c.gamma_s));
    // principal branch of θ = −i ln r
    let theta = -I * r.ln();
    Ok(QuasiSpinHamiltonian { alpha, beta, theta })
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(KaonError::InvalidParameter(format!(
            "time must be finite (got {t})"
        )));
    }
    if t < 0.0 {
        return Err(KaonError::NegativeTime(t));
    }
    Ok(())
}

/// Free-space evolution factors `(e^{−(i m_S + Γ_S/2)t}, e^{−(i m_L + Γ_L/2)t})`.
pub fn free_factors(t: f64, c: &KaonConstants) -> (Complex, Complex) {
    let s = (-(I * c.lambda_short()) * t).exp();
    let l = (-(I * c.lambda_long()) * t).exp();
    (s, l)
}

/// Propagates `v` through free space for a further `dt`.
pub fn evolve_free(v: &KaonVec, dt: f64, c: &KaonConstants) -> Result<KaonVec> {
    check_time(dt)?;
    let fs = to_basis(v, Basis::FreeSpace, c)?;
    let (es, el) = free_factors(dt, c);
    let evolved = KaonVec {
        amps: [fs.amps[0] * es, fs.amps[1] * el],
        basis: Basis::FreeSpace,
        t: v.t + dt,
    };
    to_basis(&evolved, v.basis, c)
}

/// |⟨K⁰|K⁰(t)⟩|² = ¼(e^{−Γ_S t} + e^{−Γ_L t} + 2e^{−Γt}cos(Δm t)).
pub fn survival_prob(t: f64, c: &KaonConstants) -> Result<f64> {
    check_time(t)?;
    let (s, l, x) = decay_terms(t, c);
    Ok(0.25 * (s + l + 2.0 * x))
}

/// |⟨K̄⁰|K⁰(t)⟩|² = ¼|q/p|²(e^{−Γ_S t} + e^{−Γ_L t} − 2e^{−Γt}cos(Δm t)).
pub fn oscillation_prob(t: f64, c: &KaonConstants) -> Result<f64> {
    check_time(t)?;
    if c.p().norm() == 0.0 {
        return Err(KaonError::InvalidParameter("eps = -1 gives p = 0".into()));
    }
    let (s, l, x) = decay_terms(t, c);
    Ok(0.25 * c.r().norm_sqr() * (s + l - 2.0 * x))
}

fn decay_terms(t: f64, c: &KaonConstants) -> (f64, f64, f64) {
    (
        (-c.gamma_s * t).exp(),
        (-c.gamma_l * t).exp(),
        (-c.gamma_mean() * t).exp() * (c.delta_m() * t).cos(),
    )
}

/// Strangeness oscillation frequency Δm/2π in cycles per τ_S.
pub fn oscillation_frequency(c: &KaonConstants) -> f64 {
    c.delta_m() / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::eig_general;
    use proptest::prelude::*;

    fn close(a: Complex, b: Complex, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn free_space_heff_has_the_decay_eigenvalues() {
        let c = KaonConstants::default();
        let h = build_heff(&c, Basis::FreeSpace).unwrap();
        let spec = eig_general(&h).unwrap();
        // descending real part: m_L first
        assert!(close(spec.values()[0], c.lambda_long(), 1e-14));
        assert!(close(spec.values()[1], c.lambda_short(), 1e-14));
    }

    #[test]
    fn strangeness_heff_matches_mass_and_decay_matrices() {
        let c = KaonConstants::default();
        let h = build_heff(&c, Basis::Strangeness).unwrap();
        let m11 = 0.5 * (c.m_l + c.m_s);
        let m12 = 0.5 * (c.m_l - c.m_s);
        let g11 = 0.5 * (c.gamma_l + c.gamma_s);
        let g12 = 0.5 * (c.gamma_l - c.gamma_s);
        let diag = Complex::new(m11, -0.5 * g11);
        let off = Complex::new(m12, -0.5 * g12);
        let expected = CMatrix::from_rows(2, &[diag, off, off, diag]).unwrap();
        assert!(h.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn strangeness_heff_conjugates_back_to_free_space_form() {
        for eps in [
            re(0.0),
            re(0.05),
            Complex::new(0.0, 0.1),
            Complex::new(0.02, -0.03),
        ] {
            let c = KaonConstants::default().with_eps(eps).unwrap();
            let hs = build_heff(&c, Basis::Strangeness).unwrap();
            let v = basis_matrix(&Basis::FreeSpace, &c).unwrap();
            let back = &(&v.try_inverse().unwrap() * &hs) * &v;
            assert!(back.max_abs_diff(&build_heff(&c, Basis::FreeSpace).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn degenerate_masses_and_widths_give_scalar_heff() {
        let c = KaonConstants {
            m_s: 0.3,
            m_l: 0.3,
            gamma_s: 0.7,
            gamma_l: 0.7,
            ..KaonConstants::default()
        };
        let scalar = CMatrix::identity(2)
            .unwrap()
            .scale(Complex::new(0.3, -0.35));
        for b in [Basis::Strangeness, Basis::FreeSpace] {
            assert!(build_heff(&c, b).unwrap().max_abs_diff(&scalar) < 1e-15);
        }
    }

    #[test]
    fn inside_matter_heff_rejected() {
        let c = KaonConstants::default();
        let b = Basis::InsideMatter(MediumParams::from_drive(re(0.1)));
        assert_eq!(
            build_heff(&c, b),
            Err(KaonError::UnsupportedBasis("inside-matter"))
        );
    }

    #[test]
    fn quasispin_form_without_cp_violation() {
        let c = KaonConstants::default();
        let q = build_quasispin_h(&c).unwrap();
        assert!(q.theta.norm() < 1e-15);
        let expected = &CMatrix::identity(2).unwrap().scale(q.alpha) + &sigma_y().scale(q.beta);
        assert!(q.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn quasispin_spectrum_matches_decay_eigenvalues() {
        for eps in [re(0.0), re(0.05), Complex::new(0.0, 0.1), re(0.1)] {
            let c = KaonConstants::default().with_eps(eps).unwrap();
            let q = build_quasispin_h(&c).unwrap();
            let spec = eig_general(&q.matrix()).unwrap();
            assert!(close(spec.values()[0], c.lambda_long(), 1e-10));
            assert!(close(spec.values()[1], c.lambda_short(), 1e-10));
            assert!(close(
                (I * q.theta).exp(),
                (re(1.0) - eps) / (re(1.0) + eps),
                1e-12
            ));
        }
    }

    #[test]
    fn quasispin_phase_at_eps_point_one() {
        let c = KaonConstants::default().with_eps(re(0.1)).unwrap();
        let q = build_quasispin_h(&c).unwrap();
        assert!(((I * q.theta).exp() - re(0.9 / 1.1)).norm() < 1e-12);
    }

    #[test]
    fn quasispin_rejects_singular_cp_parameter() {
        let c = KaonConstants {
            eps: re(-1.0),
            ..KaonConstants::default()
        };
        assert!(build_quasispin_h(&c).is_err());
    }

    #[test]
    fn k0_in_free_space_basis() {
        let c = KaonConstants::default();
        let v = to_basis(&KaonVec::k0(), Basis::FreeSpace, &c).unwrap();
        assert!(close(v.amps[0], re(FRAC_1_SQRT_2), 1e-15));
        assert!(close(v.amps[1], re(FRAC_1_SQRT_2), 1e-15));
    }

    #[test]
    fn cp_eigenstates_coincide_with_free_space_states_without_cp_violation() {
        let c = KaonConstants::default();
        assert!(KaonVec::k1().max_abs_diff(&KaonVec::k_short(), &c).unwrap() < 1e-15);
        assert!(KaonVec::k2().max_abs_diff(&KaonVec::k_long(), &c).unwrap() < 1e-15);
        assert!(
            KaonVec::k_short()
                .inner(&KaonVec::k_long(), &c)
                .unwrap()
                .norm()
                < 1e-15
        );
    }

    #[test]
    fn short_long_overlap_with_cp_violation() {
        let eps = re(0.05);
        let c = KaonConstants::default().with_eps(eps).unwrap();
        let ov = KaonVec::k_short().inner(&KaonVec::k_long(), &c).unwrap();
        let expected = (eps + eps.conj()) / re(1.0 + eps.norm_sqr());
        assert!(close(ov, expected, 1e-15));
        assert!((ov.re - 0.0997506).abs() < 1e-7);
        assert!((KaonVec::k_short().norm_sqr(&c).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn evolve_free_identity_and_short_decay() {
        let c = KaonConstants::default();
        let v = KaonVec::k0();
        let same = evolve_free(&v, 0.0, &c).unwrap();
        assert!(same.max_abs_diff(&v, &c).unwrap() < 1e-15);
        let ks = evolve_free(&KaonVec::k_short(), 1.0, &c).unwrap();
        assert!((ks.norm_sqr(&c).unwrap() - (-1.0f64).exp()).abs() < 1e-14);
        assert!((ks.norm_sqr(&c).unwrap() - 0.36788).abs() < 1e-5);
        assert_eq!(ks.t, 1.0);
        assert_eq!(
            evolve_free(&v, -1.0, &c),
            Err(KaonError::NegativeTime(-1.0))
        );
    }

    #[test]
    fn evolved_k0_reproduces_probability_formulas() {
        for eps in [re(0.0), re(0.1), Complex::new(0.01, 0.02)] {
            let c = KaonConstants::default().with_eps(eps).unwrap();
            for k in 0..=50 {
                let t = 0.1 * k as f64;
                let a = evolve_free(&KaonVec::k0(), t, &c)
                    .unwrap()
                    .strangeness_amps(&c)
                    .unwrap();
                assert!((a[0].norm_sqr() - survival_prob(t, &c).unwrap()).abs() < 1e-14);
                assert!((a[1].norm_sqr() - oscillation_prob(t, &c).unwrap()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn probability_anchor_values() {
        let c = KaonConstants::default();
        assert_eq!(survival_prob(0.0, &c).unwrap(), 1.0);
        assert_eq!(oscillation_prob(0.0, &c).unwrap(), 0.0);
        assert!((survival_prob(1.0, &c).unwrap() - 0.611685).abs() < 1e-6);
        assert!((oscillation_prob(1.0, &c).unwrap() - 0.071390).abs() < 1e-6);
        let lam = c.with_lambda(0.7).unwrap();
        assert_eq!(
            survival_prob(1.3, &c).unwrap(),
            survival_prob(1.3, &lam).unwrap()
        );
        assert!(survival_prob(-0.1, &c).is_err());
    }

    #[test]
    fn oscillation_scales_with_cp_prefactor() {
        let c0 = KaonConstants::default();
        let c1 = c0.with_eps(re(0.1)).unwrap();
        let ratio = oscillation_prob(1.0, &c1).unwrap() / oscillation_prob(1.0, &c0).unwrap();
        assert!((ratio - (0.9f64 / 1.1).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn oscillation_frequency_values() {
        let c = KaonConstants::default();
        assert!((oscillation_frequency(&c) - 0.074802).abs() < 1e-6);
        let doubled = KaonConstants { m_l: 0.94, ..c };
        assert!((oscillation_frequency(&doubled) - 2.0 * oscillation_frequency(&c)).abs() < 1e-15);
        let mev = KaonConstants::from_reference_mev();
        assert!((mev.delta_m() - 0.4748).abs() < 1e-4);
    }

    #[test]
    fn long_time_probabilities_vanish() {
        let c = KaonConstants::default();
        let bound = 0.95 * (-c.gamma_l * 30.0).exp();
        assert!(survival_prob(30.0, &c).unwrap() < bound);
        assert!(oscillation_prob(30.0, &c).unwrap() < bound);
    }

    fn arb_eps() -> impl Strategy<Value = Complex> {
        (-0.35f64..0.35, -0.35f64..0.35).prop_map(|(a, b)| Complex::new(a, b))
    }

    proptest! {
        #[test]
        fn probabilities_never_exceed_one(t in 0.0f64..40.0) {
            let c = KaonConstants::default();
            let s = survival_prob(t, &c).unwrap();
            let o = oscillation_prob(t, &c).unwrap();
            prop_assert!(s >= 0.0 && o >= 0.0);
            prop_assert!(s + o <= 1.0 + 1e-15);
        }

        #[test]
        fn interference_term_isolated(t in 0.0f64..40.0) {
            let c = KaonConstants::default();
            let diff = survival_prob(t, &c).unwrap() - oscillation_prob(t, &c).unwrap();
            let expected = (-c.gamma_mean() * t).exp() * (c.delta_m() * t).cos();
            prop_assert!((diff - expected).abs() < 1e-15);
        }

        #[test]
        fn basis_round_trips(eps in arb_eps(), a in (-1.0f64..1.0, -1.0f64..1.0), b in (-1.0f64..1.0, -1.0f64..1.0)) {
            let c = KaonConstants::default().with_eps(eps).unwrap();
            let v = KaonVec::new([Complex::new(a.0, a.1), Complex::new(b.0, b.1)], Basis::Strangeness);
            let fs = to_basis(&v, Basis::FreeSpace, &c).unwrap();
            let back = to_basis(&fs, Basis::Strangeness, &c).unwrap();
            for k in 0..2 {
                prop_assert!((back.amps[k] - v.amps[k]).norm() < 1e-12);
            }
        }

        #[test]
        // |ε| is kept well inside the unitarity bound |⟨K_S|K_L⟩| ≲ 2√(Γ_SΓ_L)/(Γ_S+Γ_L).
        fn evolution_never_increases_norm(e in (-0.01f64..0.01, -0.01f64..0.01), t in 0.0f64..20.0) {
            let eps = Complex::new(e.0, e.1);
            let c = KaonConstants::default().with_eps(eps).unwrap();
            for v in [KaonVec::k0(), KaonVec::k0bar(), KaonVec::k1()] {
                let n0 = v.norm_sqr(&c).unwrap();
                let n1 = evolve_free(&v, t, &c).unwrap().norm_sqr(&c).unwrap();
                prop_assert!(n1 <= n0 + 1e-9);
            }
        }

        #[test]
        fn quasispin_and_heff_spectra_agree(eps in arb_eps()) {
            let c = KaonConstants::default().with_eps(eps).unwrap();
            let a = eig_general(&build_quasispin_h(&c).unwrap().matrix()).unwrap();
            let b = eig_general(&build_heff(&c, Basis::FreeSpace).unwrap()).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!((x - y).norm() < 1e-10);
            }
        }
    }
}
