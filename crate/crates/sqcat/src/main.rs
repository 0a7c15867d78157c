use clap::{Parser, Subcommand};
use sqcat::cli::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

/// Squeezed-cat bosonic code simulator.
#[derive(Parser)]
#[command(name = "sqcat", version, about)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Knill-Laflamme tensor vs the closed-form oracles, as CSV.
    KlTable {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        xi: f64,
        #[arg(long, default_value = "out/kl-table")]
        out: PathBuf,
    },
    /// Channel-fidelity sweep over a log grid of loss/dephasing rates.
    Sweep {
        #[arg(long, default_value_t = 1.5)]
        xi_max: f64,
        /// grid as ROWSxCOLS, e.g. 8x8
        #[arg(long, default_value = "8x8")]
        grid: String,
        #[arg(long, default_value_t = 1e-4)]
        k_min: f64,
        #[arg(long, default_value_t = 1e-1)]
        k_max: f64,
        #[arg(long, default_value = "out/sweep")]
        out: PathBuf,
    },
    /// Optimal encoding and baselines at a single noise point.
    Optimize {
        #[arg(long, default_value_t = 1e-3)]
        k1t: f64,
        #[arg(long, default_value_t = 1e-3)]
        k2t: f64,
        #[arg(long, default_value_t = 1.5)]
        xi_max: f64,
        #[arg(long, default_value = "out/optimize")]
        out: PathBuf,
    },
    /// Quantum-jump trajectories with stroboscopic recovery.
    Trajectory {
        #[arg(long, default_value_t = 0.55)]
        alpha: f64,
        #[arg(long, default_value_t = 1.5)]
        xi: f64,
        #[arg(long, default_value_t = 1e-3)]
        k1t: f64,
        #[arg(long, default_value_t = 1e-3)]
        k2t: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        n_traj: usize,
        #[arg(long, default_value_t = 5)]
        periods: usize,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value = "out/trajectory")]
        out: PathBuf,
    },
    /// Wigner map and marginals of a squeezed-cat codeword.
    Wigner {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1.5)]
        xi: f64,
        /// '+' (even) or '-' (odd)
        #[arg(long, default_value = "+")]
        parity: String,
        #[arg(long, default_value_t = 81)]
        grid: usize,
        #[arg(long, default_value_t = 3.0)]
        range_x: f64,
        #[arg(long, default_value_t = 3.0)]
        range_y: f64,
        #[arg(long, default_value = "out/wigner")]
        out: PathBuf,
    },
    /// KL cost comparison between the squeezed-cat and GKP codes.
    GkpCompare {
        /// comma-separated squeezing values
        #[arg(long, default_value = "0.5,1.0,1.5")]
        xis: String,
        /// comma-separated SC displacement values
        #[arg(long, default_value = "0.4,1.0")]
        alphas: String,
        #[arg(long, default_value = "out/gkp-compare")]
        out: PathBuf,
    },
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}")))
        .collect()
}

fn to_config(cmd: Command) -> Result<RunConfig, String> {
    Ok(match cmd {
        Command::KlTable { alpha, xi, out } => RunConfig::KlTable { alpha, xi, out_dir: out },
        Command::Sweep { xi_max, grid, k_min, k_max, out } => {
            let (r, c) = grid
                .split_once('x')
                .ok_or_else(|| format!("grid must look like 8x8, got {grid:?}"))?;
            RunConfig::Sweep {
                xi_max,
                grid_k1: r.parse().map_err(|e| format!("bad grid rows: {e}"))?,
                grid_k2: c.parse().map_err(|e| format!("bad grid cols: {e}"))?,
                k_min,
                k_max,
                out_dir: out,
            }
        }
        Command::Optimize { k1t, k2t, xi_max, out } => RunConfig::Optimize {
            kappa1_tau: k1t,
            kappa2_tau: k2t,
            xi_max,
            out_dir: out,
        },
        Command::Trajectory { alpha, xi, k1t, k2t, seed, n_traj, periods, steps, out } => {
            RunConfig::Trajectory {
                alpha,
                xi,
                kappa1_tau: k1t,
                kappa2_tau: k2t,
                seed,
                n_trajectories: n_traj,
                n_periods: periods,
                steps_per_period: steps,
                out_dir: out,
            }
        }
        Command::Wigner { alpha, xi, parity, grid, range_x, range_y, out } => {
            let p = parity.chars().next().ok_or("empty parity")?;
            RunConfig::Wigner {
                alpha,
                xi,
                parity: p,
                grid,
                range_x,
                range_y,
                out_dir: out,
            }
        }
        Command::GkpCompare { xis, alphas, out } => RunConfig::GkpCompare {
            xis: parse_list(&xis)?,
            alphas: parse_list(&alphas)?,
            out_dir: out,
        },
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match to_config(args.command) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": msg, "kind": "invalid-config" })
            );
            return ExitCode::FAILURE;
        }
    };
    match sqcat::cli::run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.to_string(), "kind": error_kind(&e) })
            );
            ExitCode::FAILURE
        }
    }
}

fn error_kind(e: &sqcat::Error) -> &'static str {
    use sqcat::Error::*;
    match e {
        InvalidArgument(_) => "invalid-argument",
        CutoffInsufficient { .. } => "cutoff-insufficient",
        DegenerateInput(_) => "degenerate-input",
        UnsupportedRegime(_) => "unsupported-regime",
        IntegratorFailure(_) => "integrator-failure",
        GridOutOfRange(_) => "grid-out-of-range",
        Sdp(_) => "sdp",
        InvalidConfig(_) => "invalid-config",
        Io(_) => "io",
    }
}
