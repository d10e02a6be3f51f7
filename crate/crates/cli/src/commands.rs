use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use kaondyn::config::ConfigFile;
use kaondyn::constants::{LAMBDA_MEAN_MEV, LAMBDA_UPPER_MEV, TAU_REFERENCE};
use kaondyn::kaon::{oscillation_prob, survival_prob};
use kaondyn::measures::losses;
use kaondyn::observables::{
    asymmetry_decohered, asymmetry_qm, fit_lambda, read_samples, synthesize_asymmetry_data,
    time_grid, write_samples,
};
use kaondyn::pairs::{
    component_weights, propagate_and_normalize, regenerate_thin, singlet, LL, LS, SL, SS,
};
use kaondyn::table::{format_number, write_csv};
use kaondyn::{AsymmetrySample, Complex, KaonConstants, MediumParams, UnitSystem};

use crate::acceptance;
use crate::args::{Cli, Command, GlobalOpts, Mode};
use crate::error::CliError;

pub const RUN_KEYS: [&str; 11] = [
    "t_start", "t_end", "points", "seed", "mode", "tau", "noise", "n_tau", "n_dt", "tau_max",
    "dt_max",
];

pub const OSCILLATION_HEADER: [&str; 3] = ["t", "P_K0", "P_K0bar"];
pub const ASYMMETRY_DT_HEADER: [&str; 3] = ["dt", "A_qm", "A_lambda"];
pub const ASYMMETRY_T_HEADER: [&str; 3] = ["t", "A_qm", "A_lambda"];
pub const LOSS_HEADER: [&str; 5] = ["lambda", "tau", "S", "L_E", "L_C"];
pub const REGENERATE_HEADER: [&str; 7] =
    ["T", "abs_R_L", "abs_R_S", "w_SS", "w_SL", "w_LS", "w_LL"];
pub const RESIDUAL_HEADER: [&str; 6] = ["t_l", "t_r", "value", "sigma", "model", "pull"];

/// Resolved parameters: file values with command-line flags on top.
#[derive(Debug, Clone)]
pub struct Context {
    pub file: ConfigFile,
    pub opts: GlobalOpts,
    pub constants: KaonConstants,
    /// λ was set by a flag or the config file.
    pub lambda_explicit: bool,
}

fn config_error(path: &Path, e: kaondyn::KaonError) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

impl Context {
    pub fn new(opts: &GlobalOpts) -> Result<Self, CliError> {
        let file = match &opts.config {
            Some(p) => ConfigFile::load(p).map_err(|e| config_error(p, e))?,
            None => ConfigFile::default(),
        };
        Self::with_file(file, opts)
    }

    pub fn with_file(file: ConfigFile, opts: &GlobalOpts) -> Result<Self, CliError> {
        for key in file.keys() {
            if let Some(name) = key.strip_prefix("run.") {
                if !RUN_KEYS.contains(&name) {
                    let at = file
                        .line_of(key)
                        .map(|l| format!("line {l}: "))
                        .unwrap_or_default();
                    return Err(CliError::Usage(format!("{at}unknown run key {name:?}")));
                }
            }
        }
        let mut c = file.constants()?;
        let mut lambda_explicit = file.get("constants.lambda").is_some();
        if let Some(x) = opts.lambda_mev {
            c = c.with_lambda_mev(&UnitSystem::default(), x)?;
            lambda_explicit = true;
        }
        if let Some(x) = opts.lambda_natural {
            c = c.with_lambda(x)?;
            lambda_explicit = true;
        }
        if opts.eps_re.is_some() || opts.eps_im.is_some() {
            let eps = Complex::new(
                opts.eps_re.unwrap_or(c.eps.re),
                opts.eps_im.unwrap_or(c.eps.im),
            );
            c = c.with_eps(eps)?;
        }
        Ok(Self {
            file,
            opts: opts.clone(),
            constants: c,
            lambda_explicit,
        })
    }

    fn run_f64(&self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, CliError> {
        if let Some(x) = flag {
            return Ok(x);
        }
        Ok(self.file.get_f64(&format!("run.{key}"))?.unwrap_or(default))
    }

    fn run_u64(&self, key: &str, flag: Option<u64>, default: u64) -> Result<u64, CliError> {
        if let Some(x) = flag {
            return Ok(x);
        }
        Ok(self.file.get_u64(&format!("run.{key}"))?.unwrap_or(default))
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        if let Some(m) = self.opts.mode {
            return Ok(m);
        }
        match self.file.get("run.mode") {
            None | Some("dt") => Ok(Mode::Dt),
            Some("t") => Ok(Mode::T),
            Some(other) => Err(CliError::Usage(format!(
                "run.mode must be dt or t (got {other:?})"
            ))),
        }
    }

    /// Evenly spaced grid including both end points.
    pub fn grid(&self, start: f64, end: f64, points: usize) -> Result<Vec<f64>, CliError> {
        let a = self.run_f64("t_start", self.opts.t_start, start)?;
        let b = self.run_f64("t_end", self.opts.t_end, end)?;
        let n = self.run_u64("points", self.opts.points.map(|n| n as u64), points as u64)? as usize;
        linspace(a, b, n)
    }

    /// λ values to scan: the configured one, or the two reference values.
    pub fn lambda_scan(&self) -> Result<Vec<KaonConstants>, CliError> {
        if self.lambda_explicit {
            return Ok(vec![self.constants]);
        }
        let u = UnitSystem::default();
        Ok(vec![
            self.constants.with_lambda_mev(&u, LAMBDA_MEAN_MEV)?,
            self.constants.with_lambda_mev(&u, LAMBDA_UPPER_MEV)?,
        ])
    }

    /// The configured constants, with the mean reference λ when none is set.
    pub fn decohering_constants(&self) -> Result<KaonConstants, CliError> {
        Ok(self.lambda_scan()?[0])
    }
}

pub fn linspace(start: f64, end: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(start.is_finite() && end.is_finite()) || start < 0.0 || end <= start {
        return Err(CliError::Usage(format!(
            "time grid needs 0 <= t_start < t_end (got {start}, {end})"
        )));
    }
    if n < 2 {
        return Err(CliError::Usage(format!(
            "time grid needs at least 2 points (got {n})"
        )));
    }
    let step = (end - start) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if i + 1 == n {
                end
            } else {
                start + step * i as f64
            }
        })
        .collect())
}

pub fn oscillation_rows(c: &KaonConstants, ts: &[f64]) -> Result<Vec<Vec<f64>>, CliError> {
    ts.iter()
        .map(|&t| Ok(vec![t, survival_prob(t, c)?, oscillation_prob(t, c)?]))
        .collect()
}

/// `mode = Dt`: `t_r = τ`, `t_l = τ + Δt`; `mode = T`: `t_l = t_r = t`.
pub fn asymmetry_rows(c: &KaonConstants, mode: Mode, tau: f64, xs: &[f64]) -> Vec<Vec<f64>> {
    xs.iter()
        .map(|&x| {
            let (t_l, t_r) = match mode {
                Mode::Dt => (tau + x, tau),
                Mode::T => (x, x),
            };
            let qm = KaonConstants { lambda: 0.0, ..*c };
            vec![
                x,
                asymmetry_qm(t_l, t_r, &qm),
                asymmetry_decohered(t_l, t_r, c),
            ]
        })
        .collect()
}

pub fn loss_rows(cs: &[KaonConstants], taus: &[f64]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::with_capacity(cs.len() * taus.len());
    for c in cs {
        for &tau in taus {
            let r = losses(c, tau)?;
            rows.push(vec![c.lambda, tau, r.s_total, r.l_e, r.l_c]);
        }
    }
    Ok(rows)
}

pub fn regenerate_rows(
    c: &KaonConstants,
    m: &MediumParams,
    slab: f64,
    ts: &[f64],
) -> Result<Vec<Vec<f64>>, CliError> {
    let (start, _) = regenerate_thin(&singlet(c), m, slab, c)?;
    ts.iter()
        .map(|&t| {
            let (phi, coeffs) = propagate_and_normalize(&start, t, c)?;
            let w = component_weights(&phi, c)?;
            Ok(vec![
                t,
                coeffs.r_l.norm(),
                coeffs.r_s.norm(),
                w[SS],
                w[SL],
                w[LS],
                w[LL],
            ])
        })
        .collect()
}

pub fn residual_rows(samples: &[AsymmetrySample], c: &KaonConstants) -> Vec<Vec<f64>> {
    samples
        .iter()
        .map(|s| {
            let model = asymmetry_decohered(s.t_l, s.t_r, c);
            vec![
                s.t_l,
                s.t_r,
                s.value,
                s.sigma,
                model,
                (s.value - model) / s.sigma,
            ]
        })
        .collect()
}

pub fn render_csv(header: &[&str], rows: &[Vec<f64>]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows)?;
    Ok(buf)
}

fn emit(opts: &GlobalOpts, stdout: &mut dyn Write, bytes: &[u8]) -> Result<(), CliError> {
    match &opts.out {
        Some(p) => {
            let f =
                File::create(p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(f);
            w.write_all(bytes)?;
            w.flush()?;
        }
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

/// Executes `cli`, writing reports and CSV (unless `--out` is given) to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    if cli.command == Command::Selftest {
        return selftest(stdout);
    }
    let ctx = Context::new(&cli.opts)?;
    let c = &ctx.constants;
    match cli.command {
        Command::Oscillation => {
            let ts = ctx.grid(0.0, 5.0, 501)?;
            emit(
                &ctx.opts,
                stdout,
                &render_csv(&OSCILLATION_HEADER, &oscillation_rows(c, &ts)?)?,
            )
        }
        Command::Asymmetry => {
            let mode = ctx.mode()?;
            let tau = ctx.run_f64("tau", ctx.opts.tau, TAU_REFERENCE)?;
            if !(tau.is_finite() && tau >= 0.0) {
                return Err(CliError::Usage(format!("tau must be >= 0 (got {tau})")));
            }
            let xs = ctx.grid(0.0, 10.0, 201)?;
            let header = match mode {
                Mode::Dt => ASYMMETRY_DT_HEADER,
                Mode::T => ASYMMETRY_T_HEADER,
            };
            let rows = asymmetry_rows(&ctx.decohering_constants()?, mode, tau, &xs);
            emit(&ctx.opts, stdout, &render_csv(&header, &rows)?)
        }
        Command::EntanglementLoss => {
            let taus = ctx.grid(0.0, 1.0, 101)?;
            let rows = loss_rows(&ctx.lambda_scan()?, &taus)?;
            emit(&ctx.opts, stdout, &render_csv(&LOSS_HEADER, &rows)?)
        }
        Command::Regenerate => {
            let m = ctx.file.medium()?.ok_or_else(|| {
                CliError::Usage("regenerate needs medium.* parameters in the config file".into())
            })?;
            let slab = ctx.file.slab_time()?;
            let ts = ctx.grid(1.0, 10.0, 91)?;
            emit(
                &ctx.opts,
                stdout,
                &render_csv(&REGENERATE_HEADER, &regenerate_rows(c, &m, slab, &ts)?)?,
            )
        }
        Command::Synthesize => {
            let n_tau = ctx.run_u64("n_tau", None, 20)? as usize;
            let n_dt = ctx.run_u64("n_dt", None, 10)? as usize;
            let tau_max = ctx.run_f64("tau_max", None, 2.0)?;
            let dt_max = ctx.run_f64("dt_max", None, 2.0)?;
            if n_tau == 0 || n_dt == 0 || !(tau_max > 0.0) || !(dt_max >= 0.0) {
                return Err(CliError::Usage(
                    "synthesize needs n_tau, n_dt >= 1, tau_max > 0, dt_max >= 0".into(),
                ));
            }
            let noise = ctx.run_f64("noise", ctx.opts.noise, 0.0)?;
            let seed = ctx.run_u64("seed", ctx.opts.seed, 0)?;
            let grid = time_grid(n_tau, n_dt, tau_max, dt_max);
            let samples =
                synthesize_asymmetry_data(&ctx.decohering_constants()?, &grid, noise, seed)?;
            let mut buf = Vec::new();
            write_samples(&mut buf, &samples)?;
            emit(&ctx.opts, stdout, &buf)
        }
        Command::Fit => fit(&ctx, stdout),
        Command::Selftest => unreachable!(),
    }
}

fn fit(ctx: &Context, stdout: &mut dyn Write) -> Result<(), CliError> {
    let path = ctx
        .opts
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("fit needs --input PATH".into()))?;
    let f = File::open(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let samples = read_samples(f).map_err(|e| match CliError::from(e) {
        CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
        other => other,
    })?;
    let r = fit_lambda(&samples, &ctx.constants)?;
    let u = UnitSystem::default();
    writeln!(stdout, "samples = {}", samples.len())?;
    writeln!(
        stdout,
        "lambda_hat = {} (1/tau_S)",
        format_number(r.lambda_hat)
    )?;
    writeln!(
        stdout,
        "lambda_hat_mev = {} (MeV)",
        format_number(u.energy_from_natural(r.lambda_hat))
    )?;
    match r.lambda_sigma {
        Some(s) => writeln!(
            stdout,
            "lambda_sigma = {} (1/tau_S, curvature estimate)",
            format_number(s)
        )?,
        None => writeln!(stdout, "lambda_sigma = n/a")?,
    }
    writeln!(
        stdout,
        "zeta_hat = {} (tau = {})",
        format_number(r.zeta_hat),
        r.zeta_tau
    )?;
    writeln!(
        stdout,
        "sum_sq_residual = {}",
        format_number(r.sum_sq_residual)
    )?;
    writeln!(stdout, "iterations = {}", r.iterations)?;
    if r.at_boundary {
        writeln!(stdout, "boundary: minimum at lambda = 0")?;
    }
    if let Some(p) = &ctx.opts.out {
        let fitted = KaonConstants {
            lambda: r.lambda_hat,
            ..ctx.constants
        };
        let bytes = render_csv(&RESIDUAL_HEADER, &residual_rows(&samples, &fitted))?;
        emit(&ctx.opts, stdout, &bytes)?;
        writeln!(stdout, "residuals written to {}", p.display())?;
    }
    Ok(())
}

fn selftest(stdout: &mut dyn Write) -> Result<(), CliError> {
    let checks = acceptance::run_all();
    for c in &checks {
        writeln!(stdout, "{c}")?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    writeln!(
        stdout,
        "{} of {} checks passed",
        checks.len() - failed,
        checks.len()
    )?;
    if failed > 0 {
        return Err(CliError::Runtime(format!(
            "{failed} self-test checks failed"
        )));
    }
    Ok(())
}
