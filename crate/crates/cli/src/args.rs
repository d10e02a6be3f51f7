use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "kaondyn",
    version,
    about = "Neutral-kaon oscillations, EPR asymmetries, decoherence and entanglement loss"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// P(K⁰) and P(K̄⁰) for a kaon produced as K⁰: columns t, P_K0, P_K0bar.
    Oscillation,
    /// EPR asymmetry with and without decoherence: columns dt (or t), A_qm, A_lambda.
    Asymmetry,
    /// Entropy and entanglement losses of the decohering pair: lambda, tau, S, L_E, L_C.
    EntanglementLoss,
    /// Least-squares λ from an asymmetry sample file.
    Fit,
    /// Pair after a thin regenerator: T, |R_L|, |R_S| and component weights.
    Regenerate,
    /// Synthetic asymmetry samples in the fit input format.
    Synthesize,
    /// Runs the acceptance checks; nonzero exit on any failure.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Fixed first-detection time τ, varying Δt.
    Dt,
    /// Δt = 0, varying common time t.
    T,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalOpts {
    /// Parameter file (flat key = value).
    #[arg(long, global = true, env = "KAONDYN_CONFIG", value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Sample file for `fit`.
    #[arg(long, global = true, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Decoherence rate λ in MeV.
    #[arg(
        long,
        global = true,
        value_name = "X",
        conflicts_with = "lambda_natural",
        allow_negative_numbers = true
    )]
    pub lambda_mev: Option<f64>,
    /// Decoherence rate λ in units of 1/τ_S.
    #[arg(long, global = true, value_name = "X", allow_negative_numbers = true)]
    pub lambda_natural: Option<f64>,
    /// Re ε (CP violation).
    #[arg(long, global = true, value_name = "X", allow_negative_numbers = true)]
    pub eps_re: Option<f64>,
    /// Im ε.
    #[arg(long, global = true, value_name = "X", allow_negative_numbers = true)]
    pub eps_im: Option<f64>,
    /// Grid start, units of τ_S.
    #[arg(long, global = true, value_name = "X", allow_negative_numbers = true)]
    pub t_start: Option<f64>,
    /// Grid end, units of τ_S.
    #[arg(long, global = true, value_name = "X", allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    /// Number of grid points (≥ 2).
    #[arg(long, global = true, value_name = "N")]
    pub points: Option<usize>,
    /// RNG seed for `synthesize`.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    /// First-detection time for `asymmetry --mode dt`.
    #[arg(long, global = true, value_name = "X", allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Gaussian noise σ for `synthesize`.
    #[arg(long, global = true, value_name = "X", allow_negative_numbers = true)]
    pub noise: Option<f64>,
}
