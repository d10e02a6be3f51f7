//! Entanglement of the (trace-normalized) decohered kaon pair.
//!
//! Two-qubit states are 4×4 in the `2·left + right` product ordering.
//! Entropies are in bits unless another base is requested.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::constants::KaonConstants;
use crate::error::{KaonError, Result};
use crate::kaon::{basis_matrix, Basis};
use crate::numkernel::{
    eig_general, eig_hermitian, kron, partial_trace, re, sigma_y, CMatrix, Complex, Side,
};
use crate::openquantum::{embed_pair_support, pair_closed_form, purity, DensityMatrix};

/// Slack on unit trace for inputs that must be normalized.
pub const UNIT_TRACE_TOL: f64 = 1e-9;
/// Largest imaginary part tolerated in the spectrum of ρρ̃.
pub const SPIN_FLIP_IMAG_TOL: f64 = 1e-9;
/// Coarse grid resolution per angle for the fully entangled fraction.
pub const FEF_GRID: usize = 64;

/// Entanglement figures of the normalized pair state at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementReport {
    pub t: f64,
    pub s_total: f64,
    pub s_reduced_l: f64,
    pub s_reduced_r: f64,
    pub f: f64,
    pub e_f: f64,
    pub concurrence: f64,
    pub l_e: f64,
    pub l_c: f64,
    pub xi: f64,
    pub purity_normalized: f64,
}

/// `ρ / tr ρ`.
pub fn normalize(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let tr = rho.trace();
    if !(tr > 1e-300) {
        return Err(KaonError::VanishingTrace(tr));
    }
    DensityMatrix::new(rho.matrix().scale_re(1.0 / tr))
}

fn require_unit_trace(rho: &DensityMatrix) -> Result<()> {
    let tr = rho.trace();
    if (tr - 1.0).abs() > UNIT_TRACE_TOL {
        return Err(KaonError::InvalidDensityMatrix(format!(
            "trace {tr} is not 1; normalize first"
        )));
    }
    Ok(())
}

fn require_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(KaonError::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    Ok(())
}

fn entropy_of(values: impl IntoIterator<Item = f64>, base: f64) -> f64 {
    let s: f64 = values
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    (s / base.ln()).max(0.0)
}

/// `S = −tr(ρ log_base ρ)` with `0·log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix, base: u32) -> Result<f64> {
    if base < 2 {
        return Err(KaonError::InvalidParameter(format!(
            "entropy base must be >= 2 (got {base})"
        )));
    }
    require_unit_trace(rho)?;
    Ok(entropy_of(
        eig_hermitian(rho.matrix())?.real_parts(),
        base as f64,
    ))
}

/// Reduced state of the `keep` particle.
pub fn reduced_state(rho: &DensityMatrix, keep: Side) -> Result<DensityMatrix> {
    require_two_qubit(rho)?;
    DensityMatrix::new(partial_trace(rho.matrix(), keep.other())?)
}

/// Entropy in bits of the reduced state of the `keep` particle.
pub fn reduced_entropy(rho: &DensityMatrix, keep: Side) -> Result<f64> {
    von_neumann_entropy(&reduced_state(rho, keep)?, 2)
}

/// `H(x) = −x log₂x − (1−x) log₂(1−x)`.
pub fn binary_entropy(x: f64) -> f64 {
    entropy_of([x, 1.0 - x], 2.0)
}

/// `𝓔(f) = H(½ + √(f(1−f)))` for `f ≥ ½`, zero below.
pub fn eof_from_fraction(f: f64) -> f64 {
    if f < 0.5 {
        return 0.0;
    }
    let f = f.min(1.0);
    binary_entropy(0.5 + (f * (1.0 - f)).sqrt())
}

/// `𝓔(C) = H(½ + ½√(1 − C²))`.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy(0.5 + 0.5 * (1.0 - c * c).sqrt())
}

/// `ρ̃ = (σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)`, conjugating in the product basis.
pub fn spin_flip(rho: &DensityMatrix) -> Result<CMatrix> {
    require_two_qubit(rho)?;
    let yy = kron(&sigma_y(), &sigma_y())?;
    Ok(&(&yy * &rho.matrix().conj()) * &yy)
}

/// Square roots of the eigenvalues of `ρρ̃`, in decreasing order.
pub fn spin_flip_roots(rho: &DensityMatrix) -> Result<[f64; 4]> {
    let r = rho.matrix() * &spin_flip(rho)?;
    let spec = eig_general(&r)?;
    let imag = spec.max_imag();
    if imag > SPIN_FLIP_IMAG_TOL {
        return Err(KaonError::ComplexSpectrum(imag));
    }
    // eigenvalues within rounding of zero are zero; their square roots
    // would otherwise turn 1e-18 noise into 1e-9 errors
    let floor = 16.0 * f64::EPSILON * spec.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut roots = [0.0; 4];
    for (k, z) in spec.values().iter().enumerate() {
        roots[k] = if z.re <= floor { 0.0 } else { z.re.sqrt() };
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    Ok(roots)
}

/// Wootters concurrence `max{0, λ₁ − λ₂ − λ₃ − λ₄}`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubit(rho)?;
    require_unit_trace(rho)?;
    let l = spin_flip_roots(rho)?;
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

/// Entanglement of formation in bits, via the concurrence.
pub fn entanglement_of_formation(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence(rho)?))
}

/// `ρ` in a local-unitary frame: `e = (I ⊗ U)|Φ⁺⟩` for
/// `U = [[e^{ia}cos θ, −e^{−ib}sin θ], [e^{ib}sin θ, e^{−ia}cos θ]]`.
fn rotated_bell(theta: f64, a: f64, b: f64) -> [Complex; 4] {
    let (s, c) = theta.sin_cos();
    let u00 = Complex::from_polar(c, a);
    let u01 = -Complex::from_polar(s, -b);
    let u10 = Complex::from_polar(s, b);
    let u11 = Complex::from_polar(c, -a);
    // e[2i + j] = U_ji / √2
    let h = FRAC_1_SQRT_2;
    [u00 * h, u10 * h, u01 * h, u11 * h]
}

fn bell_overlap(rho: &[Complex], x: [f64; 3]) -> f64 {
    let e = rotated_bell(x[0], x[1], x[2]);
    let mut acc = re(0.0);
    for i in 0..4 {
        let mut row = re(0.0);
        for j in 0..4 {
            row += rho[4 * i + j] * e[j];
        }
        acc += e[i].conj() * row;
    }
    acc.re
}

/// `f(ρ) = max ⟨e|ρ|e⟩` over maximally entangled `|e⟩`.
///
/// Every maximally entangled two-qubit state is `(I ⊗ U)|Φ⁺⟩` up to a phase,
/// so the search runs over SU(2): a `64³` grid followed by a shrinking
/// compass search from the best grid point.
pub fn fully_entangled_fraction(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubit(rho)?;
    require_unit_trace(rho)?;
    let m = rho.matrix().to_rows();
    let n = FEF_GRID;
    let steps = [PI / n as f64, 2.0 * PI / n as f64, 2.0 * PI / n as f64];
    let mut best = ([0.0; 3], f64::NEG_INFINITY);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let x = [
                    i as f64 * steps[0],
                    j as f64 * steps[1],
                    k as f64 * steps[2],
                ];
                let v = bell_overlap(&m, x);
                if v > best.1 {
                    best = (x, v);
                }
            }
        }
    }
    let (mut x, mut fx) = best;
    let mut h = steps;
    while h[1] > 1e-10 {
        let mut improved = false;
        for d in 0..3 {
            for sign in [1.0, -1.0] {
                let mut y = x;
                y[d] += sign * h[d];
                let fy = bell_overlap(&m, y);
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            h = h.map(|s| s * 0.5);
        }
    }
    Ok(fx.clamp(0.0, 1.0))
}

/// `f(ρ_N(t)) = ½(1 + e^{−λt})` for the decohered pair.
pub fn fef_decohered_pair(c: &KaonConstants, t: f64) -> f64 {
    0.5 * (1.0 + (-c.lambda * t).exp())
}

/// The two E_f evaluations `(𝓔(f), 𝓔(C))`, with f from the general search.
pub fn eof_routes(rho: &DensityMatrix) -> Result<(f64, f64)> {
    Ok((
        eof_from_fraction(fully_entangled_fraction(rho)?),
        entanglement_of_formation(rho)?,
    ))
}

/// Trace-normalized decohered pair state in the strangeness product basis.
pub fn normalized_pair_state(c: &KaonConstants, t: f64) -> Result<DensityMatrix> {
    let support = normalize(&pair_closed_form(t, c)?)?;
    let full = embed_pair_support(&support)?;
    let v = basis_matrix(&Basis::FreeSpace, c)?;
    let w = kron(&v, &v)?;
    let m = &(&w * full.matrix()) * &w.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_re(1.0 / tr))
}

/// Entanglement figures of `ρ_N(t)`, with `L_E = 1 − E_f` and `L_C = 1 − C`.
pub fn losses(c: &KaonConstants, t: f64) -> Result<EntanglementReport> {
    let support = normalize(&pair_closed_form(t, c)?)?;
    let rho = normalized_pair_state(c, t)?;
    let concurrence = concurrence(&rho)?;
    let e_f = eof_from_concurrence(concurrence);
    Ok(EntanglementReport {
        t,
        s_total: von_neumann_entropy(&support, 2)?,
        s_reduced_l: reduced_entropy(&rho, Side::Left)?,
        s_reduced_r: reduced_entropy(&rho, Side::Right)?,
        f: fef_decohered_pair(c, t),
        e_f,
        concurrence,
        l_e: 1.0 - e_f,
        l_c: 1.0 - concurrence,
        xi: 1.0 - (-c.lambda * t).exp(),
        purity_normalized: purity(&support),
    })
}
