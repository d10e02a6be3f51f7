//! Joint strangeness detection of entangled pairs, the asymmetry it
//! produces, and least-squares estimation of λ from asymmetry data.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::constants::{KaonConstants, TAU_REFERENCE};
use crate::error::{KaonError, Result};
use crate::table::format_number;

/// Strangeness outcome of a detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    K0,
    K0bar,
}

/// Time convention of the joint probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeForm {
    /// Decoherence acts until the first detection, τ = min(t_l, t_r).
    #[default]
    FirstDetection,
    /// Decoherence and the common decay factor read at t_r regardless of
    /// which kaon is detected first.
    RightTime,
}

fn check_times(t_l: f64, t_r: f64) -> Result<()> {
    for t in [t_l, t_r] {
        if !t.is_finite() {
            return Err(KaonError::InvalidParameter(format!(
                "time must be finite (got {t})"
            )));
        }
        if t < 0.0 {
            return Err(KaonError::NegativeTime(t));
        }
    }
    Ok(())
}

/// `P(o_l, t_l; o_r, t_r)` with τ = min(t_l, t_r), Δt = |t_l − t_r|:
///
/// `⅛e^{−2Γτ}(e^{−Γ_SΔt} + e^{−Γ_LΔt} ± 2e^{−λτ}cos(ΔmΔt)e^{−ΓΔt})`,
/// `+` for unlike and `−` for like strangeness.
pub fn joint_probability(
    o_l: Outcome,
    t_l: f64,
    o_r: Outcome,
    t_r: f64,
    c: &KaonConstants,
) -> Result<f64> {
    joint_probability_with(o_l, t_l, o_r, t_r, c, TimeForm::FirstDetection)
}

pub fn joint_probability_with(
    o_l: Outcome,
    t_l: f64,
    o_r: Outcome,
    t_r: f64,
    c: &KaonConstants,
    form: TimeForm,
) -> Result<f64> {
    check_times(t_l, t_r)?;
    let dt = (t_l - t_r).abs();
    let tau = match form {
        TimeForm::FirstDetection => t_l.min(t_r),
        TimeForm::RightTime => t_r,
    };
    let g = c.gamma_mean();
    let sign = if o_l == o_r { -1.0 } else { 1.0 };
    let interference = 2.0 * (-c.lambda * tau).exp() * (c.delta_m() * dt).cos() * (-g * dt).exp();
    let p = 0.125
        * (-2.0 * g * tau).exp()
        * ((-c.gamma_s * dt).exp() + (-c.gamma_l * dt).exp() + sign * interference);
    Ok(p.max(0.0))
}

/// `A^QM = cos(ΔmΔt)/cosh(½ΔΓΔt)`.
pub fn asymmetry_qm(t_l: f64, t_r: f64, c: &KaonConstants) -> f64 {
    let dt = t_l - t_r;
    (c.delta_m() * dt).cos() / (0.5 * c.delta_gamma() * dt).cosh()
}

/// `(P_unlike − P_like)/(P_unlike + P_like)` over all four outcome pairs.
pub fn asymmetry_from_probabilities(t_l: f64, t_r: f64, c: &KaonConstants) -> Result<f64> {
    use Outcome::*;
    let p = |a, b| joint_probability(a, t_l, b, t_r, c);
    let unlike = p(K0, K0bar)? + p(K0bar, K0)?;
    let like = p(K0, K0)? + p(K0bar, K0bar)?;
    let total = unlike + like;
    if !(total > 0.0) {
        return Err(KaonError::VanishingTrace(total));
    }
    Ok((unlike - like) / total)
}

/// `A^λ = A^QM e^{−λτ}`.
pub fn asymmetry_decohered(t_l: f64, t_r: f64, c: &KaonConstants) -> f64 {
    asymmetry_qm(t_l, t_r, c) * (-c.lambda * t_l.min(t_r)).exp()
}

/// `ζ = 1 − e^{−λτ}`.
pub fn effective_zeta(t_l: f64, t_r: f64, c: &KaonConstants) -> f64 {
    zeta_at(c.lambda, t_l.min(t_r))
}

/// `1 − e^{−λτ}`.
pub fn zeta_at(lambda: f64, tau: f64) -> f64 {
    -(-lambda * tau).exp_m1()
}

/// Joint detection figures at one pair of times. `p_unlike` and `p_like`
/// are single outcome pairs; their mirrors are equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub t_l: f64,
    pub t_r: f64,
    pub p_unlike: f64,
    pub p_like: f64,
    pub a_qm: f64,
    pub a_lambda: f64,
    pub zeta: f64,
}

pub fn correlation_report(t_l: f64, t_r: f64, c: &KaonConstants) -> Result<CorrelationReport> {
    Ok(CorrelationReport {
        t_l,
        t_r,
        p_unlike: joint_probability(Outcome::K0, t_l, Outcome::K0bar, t_r, c)?,
        p_like: joint_probability(Outcome::K0, t_l, Outcome::K0, t_r, c)?,
        a_qm: asymmetry_qm(t_l, t_r, c),
        a_lambda: asymmetry_decohered(t_l, t_r, c),
        zeta: effective_zeta(t_l, t_r, c),
    })
}

/// One measured asymmetry value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymmetrySample {
    pub t_l: f64,
    pub t_r: f64,
    pub value: f64,
    pub sigma: f64,
}

impl AsymmetrySample {
    pub fn new(t_l: f64, t_r: f64, value: f64, sigma: f64) -> Result<Self> {
        check_times(t_l, t_r)?;
        if !value.is_finite() {
            return Err(KaonError::InvalidParameter(format!(
                "sample value must be finite (got {value})"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(KaonError::InvalidParameter(format!(
                "sigma must be > 0 (got {sigma})"
            )));
        }
        Ok(Self {
            t_l,
            t_r,
            value,
            sigma,
        })
    }
}

/// Product grid of first-detection times `τ ∈ (0, tau_max]` and separations
/// `Δt ∈ [0, dt_max]`, with the left kaon detected last.
pub fn time_grid(n_tau: usize, n_dt: usize, tau_max: f64, dt_max: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n_tau * n_dt);
    for i in 0..n_tau {
        let tau = tau_max * (i + 1) as f64 / n_tau as f64;
        for j in 0..n_dt {
            let dt = if n_dt > 1 {
                dt_max * j as f64 / (n_dt - 1) as f64
            } else {
                0.0
            };
            out.push((tau + dt, tau));
        }
    }
    out
}

/// Model values `A^λ` plus Gaussian noise, reproducible from `seed`.
/// Samples carry `sigma = noise_sigma`, or 1 when noiseless.
pub fn synthesize_asymmetry_data(
    c: &KaonConstants,
    grid: &[(f64, f64)],
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<AsymmetrySample>> {
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(KaonError::InvalidParameter(format!(
            "noise sigma must be >= 0 (got {noise_sigma})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal =
        Normal::new(0.0, noise_sigma).map_err(|e| KaonError::InvalidParameter(e.to_string()))?;
    let sigma = if noise_sigma > 0.0 { noise_sigma } else { 1.0 };
    grid.iter()
        .map(|&(t_l, t_r)| {
            let noise = if noise_sigma > 0.0 {
                normal.sample(&mut rng)
            } else {
                0.0
            };
            AsymmetrySample::new(t_l, t_r, asymmetry_decohered(t_l, t_r, c) + noise, sigma)
        })
        .collect()
}

/// Least-squares estimate of λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub lambda_hat: f64,
    /// Curvature estimate `√(2/χ″)`; `None` when the curvature vanishes.
    pub lambda_sigma: Option<f64>,
    /// ζ̂ at `zeta_tau`.
    pub zeta_hat: f64,
    pub zeta_tau: f64,
    pub sum_sq_residual: f64,
    pub iterations: usize,
    /// The minimum sits on λ = 0.
    pub at_boundary: bool,
}

/// Upper end of the λ search interval.
pub const FIT_LAMBDA_MAX: f64 = 10.0;

/// χ² rows `(A^QM, τ, value, σ)`.
struct Objective {
    rows: Vec<(f64, f64, f64, f64)>,
}

impl Objective {
    fn new(samples: &[AsymmetrySample], c: &KaonConstants) -> Self {
        let rows = samples
            .iter()
            .map(|s| {
                (
                    asymmetry_qm(s.t_l, s.t_r, c),
                    s.t_l.min(s.t_r),
                    s.value,
                    s.sigma,
                )
            })
            .collect();
        Self { rows }
    }

    fn value(&self, lambda: f64) -> f64 {
        self.rows
            .iter()
            .map(|&(a, tau, v, s)| ((a * (-lambda * tau).exp() - v) / s).powi(2))
            .sum()
    }

    /// First and second derivatives in λ.
    fn derivatives(&self, lambda: f64) -> (f64, f64) {
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for &(a, tau, v, s) in &self.rows {
            let m = a * (-lambda * tau).exp();
            let r = (m - v) / s;
            let dm = -tau * m / s;
            let ddm = tau * tau * m / s;
            d1 += 2.0 * r * dm;
            d2 += 2.0 * (dm * dm + r * ddm);
        }
        (d1, d2)
    }
}

/// Minimizes `Σ((A^λ − value)/σ)²` over `λ ∈ [0, 10]`: golden-section search
/// followed by second-order refinement. The curvature of the objective at
/// the minimum (second difference) gives `lambda_sigma`.
pub fn fit_lambda(samples: &[AsymmetrySample], c: &KaonConstants) -> Result<FitResult> {
    if samples.len() < 2 {
        return Err(KaonError::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    for s in samples {
        AsymmetrySample::new(s.t_l, s.t_r, s.value, s.sigma)?;
    }
    let obj = Objective::new(samples, c);
    let sensitivity = obj
        .rows
        .iter()
        .map(|&(a, tau, _, s)| (a * tau / s).abs())
        .fold(0.0, f64::max);
    if sensitivity < 1e-12 {
        return Err(KaonError::Unidentifiable(
            "every sample has zero first-detection time or vanishing A_qm; lambda does not enter the model".into(),
        ));
    }

    let mut iterations = 0;
    let (d1_at_zero, _) = obj.derivatives(0.0);
    let mut lambda = if d1_at_zero >= 0.0 {
        0.0
    } else {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (0.0, FIT_LAMBDA_MAX);
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let (mut f1, mut f2) = (obj.value(x1), obj.value(x2));
        while b - a > 1e-9 {
            iterations += 1;
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = obj.value(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = obj.value(x2);
            }
        }
        let mut x = 0.5 * (a + b);
        for _ in 0..50 {
            let (d1, d2) = obj.derivatives(x);
            if !(d2 > 0.0) {
                break;
            }
            iterations += 1;
            let next = (x - d1 / d2).clamp(0.0, FIT_LAMBDA_MAX);
            if obj.value(next) > obj.value(x) {
                break;
            }
            let done = (next - x).abs() <= 1e-15 * x.max(1.0);
            x = next;
            if done {
                break;
            }
        }
        x
    };
    let at_boundary = lambda <= 0.0;
    if at_boundary {
        lambda = 0.0;
    }

    let h = 1e-4 * lambda.max(1e-2);
    let lo = (lambda - h).max(0.0);
    let hi = lo + 2.0 * h;
    let mid = lo + h;
    let curvature = (obj.value(hi) - 2.0 * obj.value(mid) + obj.value(lo)) / (h * h);
    let lambda_sigma = (curvature > 0.0).then(|| (2.0 / curvature).sqrt());

    Ok(FitResult {
        lambda_hat: lambda,
        lambda_sigma,
        zeta_hat: zeta_at(lambda, TAU_REFERENCE),
        zeta_tau: TAU_REFERENCE,
        sum_sq_residual: obj.value(lambda),
        iterations,
        at_boundary,
    })
}

/// Column header of sample files.
pub const SAMPLE_HEADER: [&str; 4] = ["t_l", "t_r", "value", "sigma"];

/// Writes samples as CSV with header `t_l,t_r,value,sigma`.
pub fn write_samples<W: Write>(w: W, samples: &[AsymmetrySample]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| KaonError::Io(e.to_string());
    out.write_record(SAMPLE_HEADER).map_err(io)?;
    for s in samples {
        out.write_record([s.t_l, s.t_r, s.value, s.sigma].map(format_number))
            .map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a sample file. The `sigma` column is optional and defaults to 1.
pub fn read_samples<R: Read>(r: R) -> Result<Vec<AsymmetrySample>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut records = rdr.records();
    let header = match records.next() {
        None => {
            return Err(KaonError::Parse {
                line: 1,
                msg: "empty file: expected header t_l,t_r,value,sigma".into(),
            })
        }
        Some(h) => h.map_err(|e| csv_error(e, 1))?,
    };
    let names: Vec<&str> = header.iter().collect();
    if names.len() < 3 || names.len() > 4 || names[..] != SAMPLE_HEADER[..names.len()] {
        return Err(KaonError::Parse {
            line: 1,
            msg: format!(
                "expected header t_l,t_r,value[,sigma], found {}",
                names.join(",")
            ),
        });
    }
    let mut out = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(e, 0))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rec.len() < 3 || rec.len() > 4 {
            return Err(KaonError::Parse {
                line,
                msg: format!("expected 3 or 4 fields, found {}", rec.len()),
            });
        }
        let field = |k: usize| -> Result<f64> {
            rec[k].parse::<f64>().map_err(|_| KaonError::Parse {
                line,
                msg: format!("column {} is not a number: {:?}", SAMPLE_HEADER[k], &rec[k]),
            })
        };
        let sigma = if rec.len() == 4 && !rec[3].is_empty() {
            field(3)?
        } else {
            1.0
        };
        let sample = AsymmetrySample::new(field(0)?, field(1)?, field(2)?, sigma).map_err(|e| {
            KaonError::Parse {
                line,
                msg: e.to_string(),
            }
        })?;
        out.push(sample);
    }
    if out.is_empty() {
        return Err(KaonError::InsufficientData { needed: 2, got: 0 });
    }
    Ok(out)
}

fn csv_error(e: csv::Error, fallback_line: usize) -> KaonError {
    let line = e
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback_line);
    KaonError::Parse {
        line,
        msg: e.to_string(),
    }
}
