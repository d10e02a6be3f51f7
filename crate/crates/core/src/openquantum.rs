//! GKSL master equation with a non-Hermitian effective Hamiltonian.
//!
//! `ρ̇ = −i(Hρ − ρH†) + Σ_j (L_j ρ L_j† − ½{L_j†L_j, ρ})`, `H = M − (i/2)Γ`.
//!
//! Density matrices are vectorized row-major, `vec(ρ)[i·d + j] = ρ_ij`, so
//! that `vec(AρB) = (A ⊗ Bᵀ) vec(ρ)`.

use log::warn;

use crate::constants::KaonConstants;
use crate::error::{KaonError, Result};
use crate::numkernel::{eig_hermitian, expm, kron, re, CMatrix, Complex, HERMITICITY_TOL, I};

/// Eigenvalue floor for constructed density matrices.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalue floor accepted after numerical propagation.
pub const PROPAGATED_PSD_TOL: f64 = 1e-9;
/// Slack above unit trace.
pub const TRACE_TOL: f64 = 1e-9;

/// Hermitian, positive semidefinite matrix with trace in `(0, 1]`.
/// The trace is allowed to decay because kaons decay.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::validated(m, HERMITICITY_TOL, PSD_TOL)
    }

    fn validated(m: CMatrix, herm_tol: f64, psd_tol: f64) -> Result<Self> {
        let defect = m.hermiticity_defect();
        if !(defect <= herm_tol) {
            return Err(KaonError::NotHermitian(defect));
        }
        let m = m.hermitian_part();
        let tr = m.trace().re;
        if !tr.is_finite() {
            return Err(KaonError::NonFinite("density matrix trace"));
        }
        if tr <= 0.0 {
            return Err(KaonError::VanishingTrace(tr));
        }
        if tr > 1.0 + TRACE_TOL {
            return Err(KaonError::InvalidDensityMatrix(format!(
                "trace {tr} exceeds 1"
            )));
        }
        let lowest = eig_hermitian(&m)?
            .real_parts()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if lowest < -psd_tol {
            return Err(KaonError::InvalidDensityMatrix(format!(
                "negative eigenvalue {lowest}"
            )));
        }
        Ok(Self { m })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(psi: &[Complex]) -> Result<Self> {
        Self::new(CMatrix::outer(psi, psi)?)
    }

    pub fn from_rows(dim: usize, entries: &[Complex]) -> Result<Self> {
        Self::new(CMatrix::from_rows(dim, entries)?)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex {
        self.m.get(i, j)
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.m.max_abs_diff(&other.m)
    }
}

/// `𝒫 = tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    (rho.matrix() * rho.matrix()).trace().re
}

/// Mass matrix, decay matrix and jump operators of a GKSL generator.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSpec {
    pub mass: CMatrix,
    pub decay: CMatrix,
    pub jumps: Vec<CMatrix>,
}

impl LindbladSpec {
    pub fn new(mass: CMatrix, decay: CMatrix, jumps: Vec<CMatrix>) -> Result<Self> {
        let d = mass.dim();
        for m in std::iter::once(&decay).chain(&jumps) {
            if m.dim() != d {
                return Err(KaonError::DimensionMismatch {
                    expected: d,
                    found: m.dim(),
                });
            }
        }
        if d * d > 16 {
            return Err(KaonError::UnsupportedDimension(d));
        }
        for m in [&mass, &decay] {
            let defect = m.hermiticity_defect();
            if defect > HERMITICITY_TOL {
                return Err(KaonError::NotHermitian(defect));
            }
        }
        let lowest = eig_hermitian(&decay)?
            .real_parts()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if lowest < -PSD_TOL {
            return Err(KaonError::InvalidParameter(format!(
                "decay matrix has negative eigenvalue {lowest}"
            )));
        }
        Ok(Self { mass, decay, jumps })
    }

    pub fn dim(&self) -> usize {
        self.mass.dim()
    }

    /// `H = M − (i/2)Γ`.
    pub fn heff(&self) -> CMatrix {
        &self.mass - &self.decay.scale(I * 0.5)
    }
}

/// Superoperator matrix acting on row-major `vec(ρ)`.
pub fn liouvillian(spec: &LindbladSpec) -> Result<CMatrix> {
    let d = spec.dim();
    let id = CMatrix::identity(d)?;
    let h = spec.heff();
    let mut gen = (&kron(&h, &id)? - &kron(&id, &h.conj())?).scale(-I);
    for l in &spec.jumps {
        let ldl = &l.adjoint() * l;
        gen = &gen + &kron(l, &l.conj())?;
        gen = &gen - &kron(&ldl, &id)?.scale_re(0.5);
        gen = &gen - &kron(&id, &ldl.transpose())?.scale_re(0.5);
    }
    Ok(gen)
}

fn vectorize(m: &CMatrix) -> Vec<Complex> {
    m.to_rows()
}

fn unvectorize(d: usize, v: &[Complex]) -> Result<CMatrix> {
    CMatrix::from_rows(d, v)
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

fn check_dims(spec: &LindbladSpec, rho0: &DensityMatrix) -> Result<()> {
    if rho0.dim() != spec.dim() {
        return Err(KaonError::DimensionMismatch {
            expected: spec.dim(),
            found: rho0.dim(),
        });
    }
    Ok(())
}

fn apply_propagator(prop: &CMatrix, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    let v = prop.apply(&vectorize(rho0.matrix()));
    let out = unvectorize(rho0.dim(), &v)?;
    DensityMatrix::validated(out, 1e-9, PROPAGATED_PSD_TOL)
}

/// `ρ(t) = e^{𝓛t} ρ(0)`; the result is re-symmetrized to exact Hermiticity.
pub fn liouvillian_propagate(
    spec: &LindbladSpec,
    rho0: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    check_time(t)?;
    check_dims(spec, rho0)?;
    let prop = expm(&liouvillian(spec)?.scale_re(t))?;
    apply_propagator(&prop, rho0)
}

/// Propagates to each time of `times` independently.
pub fn liouvillian_propagate_grid(
    spec: &LindbladSpec,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<Vec<DensityMatrix>> {
    check_dims(spec, rho0)?;
    let gen = liouvillian(spec)?;
    times
        .iter()
        .map(|&t| {
            check_time(t)?;
            apply_propagator(&expm(&gen.scale_re(t))?, rho0)
        })
        .collect()
}

/// Which Hilbert space the decoherence ansatz is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    /// One kaon in the `(K_S, K_L)` basis.
    Single,
    /// A pair restricted to the support `{e₁ = K_S⊗K_L, e₂ = K_L⊗K_S}`.
    Pair,
    /// A pair on the full product space `(S⊗S, S⊗L, L⊗S, L⊗L)`.
    PairFull,
}

fn projector(d: usize, k: usize) -> Result<CMatrix> {
    CMatrix::from_fn(d, |i, j| if i == k && j == k { re(1.0) } else { re(0.0) })
}

/// Projector decoherence: `L_j = √λ P_j` for the free-space (single) or
/// `{e₁, e₂}` (pair) projectors, which gives
/// `𝒟(ρ) = −(λ/2) Σ_j [P_j, [P_j, ρ]]`.
///
/// The K_S, K_L states are treated as orthonormal, i.e. ε → 0.
pub fn decoherence_ansatz(c: &KaonConstants, system: System) -> Result<LindbladSpec> {
    if c.lambda < 0.0 {
        return Err(KaonError::InvalidParameter(format!(
            "lambda must be >= 0 (got {})",
            c.lambda
        )));
    }
    if c.eps.norm() != 0.0 {
        warn!(
            "decoherence ansatz ignores eps = {}; K_S and K_L are taken orthogonal",
            c.eps
        );
    }
    let sq = c.lambda.sqrt();
    let single_m = CMatrix::from_diagonal(&[re(c.m_s), re(c.m_l)])?;
    let single_g = CMatrix::from_diagonal(&[re(c.gamma_s), re(c.gamma_l)])?;
    let (mass, decay, support): (CMatrix, CMatrix, Vec<usize>) = match system {
        System::Single => (single_m, single_g, vec![0, 1]),
        System::Pair => {
            let id = CMatrix::identity(2)?;
            (
                id.scale_re(c.m_s + c.m_l),
                id.scale_re(c.gamma_s + c.gamma_l),
                vec![0, 1],
            )
        }
        System::PairFull => {
            let id = CMatrix::identity(2)?;
            (
                &kron(&single_m, &id)? + &kron(&id, &single_m)?,
                &kron(&single_g, &id)? + &kron(&id, &single_g)?,
                vec![1, 2],
            )
        }
    };
    let d = mass.dim();
    let jumps = if c.lambda == 0.0 {
        Vec::new()
    } else {
        support
            .into_iter()
            .map(|k| projector(d, k).map(|p| p.scale_re(sq)))
            .collect::<Result<_>>()?
    };
    LindbladSpec::new(mass, decay, jumps)
}

/// Closed-form pair solution on `{e₁, e₂}`:
/// diagonal entries decay as `e^{−2Γt}`, coherences as `e^{−(2Γ+λ)t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDecoherenceSolution {
    pub rho11_0: Complex,
    pub rho22_0: Complex,
    pub rho12_0: Complex,
    pub rho21_0: Complex,
    pub gamma: f64,
    pub lambda: f64,
}

impl PairDecoherenceSolution {
    /// Starting from `|ψ⁻⟩ = (e₁ − e₂)/√2`.
    pub fn from_bell(c: &KaonConstants) -> Self {
        Self {
            rho11_0: re(0.5),
            rho22_0: re(0.5),
            rho12_0: re(-0.5),
            rho21_0: re(-0.5),
            gamma: c.gamma_mean(),
            lambda: c.lambda,
        }
    }

    pub fn from_initial(rho0: &DensityMatrix, c: &KaonConstants) -> Result<Self> {
        if rho0.dim() != 2 {
            return Err(KaonError::DimensionMismatch {
                expected: 2,
                found: rho0.dim(),
            });
        }
        Ok(Self {
            rho11_0: rho0.get(0, 0),
            rho22_0: rho0.get(1, 1),
            rho12_0: rho0.get(0, 1),
            rho21_0: rho0.get(1, 0),
            gamma: c.gamma_mean(),
            lambda: c.lambda,
        })
    }

    pub fn at(&self, t: f64) -> Result<DensityMatrix> {
        check_time(t)?;
        let d = (-2.0 * self.gamma * t).exp();
        let o = d * (-self.lambda * t).exp();
        DensityMatrix::from_rows(
            2,
            &[
                self.rho11_0 * d,
                self.rho12_0 * o,
                self.rho21_0 * o,
                self.rho22_0 * d,
            ],
        )
    }
}

/// `ρ(t) = ½e^{−2Γt}(|e₁⟩⟨e₁| + |e₂⟩⟨e₂| − e^{−λt}(|e₁⟩⟨e₂| + |e₂⟩⟨e₁|))`.
pub fn pair_closed_form(t: f64, c: &KaonConstants) -> Result<DensityMatrix> {
    PairDecoherenceSolution::from_bell(c).at(t)
}

/// Closed-form single-kaon solution in the `(K_S, K_L)` basis:
/// `ρ_SS e^{−Γ_S t}`, `ρ_LL e^{−Γ_L t}`, `ρ_SL e^{(iΔm − Γ − λ)t}`,
/// `ρ_LS e^{−(iΔm + Γ + λ)t}`.
pub fn single_closed_form(
    rho0: &DensityMatrix,
    t: f64,
    c: &KaonConstants,
) -> Result<DensityMatrix> {
    check_time(t)?;
    if rho0.dim() != 2 {
        return Err(KaonError::DimensionMismatch {
            expected: 2,
            found: rho0.dim(),
        });
    }
    let rate = c.gamma_mean() + c.lambda;
    let sl = (Complex::new(-rate, c.delta_m()) * t).exp();
    DensityMatrix::from_rows(
        2,
        &[
            rho0.get(0, 0) * (-c.gamma_s * t).exp(),
            rho0.get(0, 1) * sl,
            rho0.get(1, 0) * sl.conj(),
            rho0.get(1, 1) * (-c.gamma_l * t).exp(),
        ],
    )
}

/// Places a `{e₁, e₂}` density matrix on the `(S⊗L, L⊗S)` block of the
/// full free-space product basis.
pub fn embed_pair_support(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(KaonError::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let m = CMatrix::from_fn(4, |i, j| match (i, j) {
        (1..=2, 1..=2) => rho.get(i - 1, j - 1),
        _ => re(0.0),
    })?;
    DensityMatrix::new(m)
}

/// Single kaon plus two decay-product sink states `(S, L, sink_S, sink_L)`.
///
/// The decay term enters as the jump `B = √Γ_S|sink_S⟩⟨S| + √Γ_L|sink_L⟩⟨L|`,
/// whose `B†B = diag(Γ_S, Γ_L, 0, 0)` reproduces the anti-commutator while
/// `BρB†` refills the sinks, so the total trace is conserved.
pub fn trace_preserving_extension(c: &KaonConstants) -> Result<LindbladSpec> {
    let mass = CMatrix::from_diagonal(&[re(c.m_s), re(c.m_l), re(0.0), re(0.0)])?;
    let decay = CMatrix::zeros(4)?;
    let (gs, gl) = (c.gamma_s.sqrt(), c.gamma_l.sqrt());
    let b = CMatrix::from_fn(4, |i, j| match (i, j) {
        (2, 0) => re(gs),
        (3, 1) => re(gl),
        _ => re(0.0),
    })?;
    let mut jumps = vec![b];
    if c.lambda > 0.0 {
        let sq = c.lambda.sqrt();
        jumps.push(projector(4, 0)?.scale_re(sq));
        jumps.push(projector(4, 1)?.scale_re(sq));
    }
    LindbladSpec::new(mass, decay, jumps)
}

/// Embeds a single-kaon density matrix into the alive block of the
/// trace-preserving extension.
pub fn embed_alive(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(KaonError::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let m = CMatrix::from_fn(4, |i, j| {
        if i < 2 && j < 2 {
            rho.get(i, j)
        } else {
            re(0.0)
        }
    })?;
    DensityMatrix::new(m)
}

/// Upper-left 2×2 block of an extended density matrix.
pub fn alive_block(rho: &DensityMatrix) -> Result<CMatrix> {
    if rho.dim() != 4 {
        return Err(KaonError::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    CMatrix::from_fn(2, |i, j| rho.get(i, j))
}
