//! Command front end: each command produces deterministic CSV data files, a
//! JSON metadata sidecar embedding the exact run configuration and crate
//! version, and a small matplotlib script that plots the CSV.
//!
//! Numbers are written with 17 significant digits so that re-running a
//! command with the same configuration reproduces the files byte for byte.

use crate::fock::{choose_cutoff, DensityMatrix};
use crate::kl::{kl_oracle_sc, kl_tensor, ErrorSet, Sector};
use crate::noise::NoiseParams;
use crate::recovery::{
    cat_baseline, log_grid, optimize_encoding, process_matrix, single_rail_baseline, solve_sdp,
    sweep, RecoveryChannel,
};
use crate::states::{
    gkp_codeword, gkp_default_cutoffs, squeezed_cat, wigner, GKPParams, Parity, SCParams,
};
use crate::subspaces::{build_error_subspaces, recovery_basis};
use crate::trajectory::{ensemble_average, master_equation_p, run_trajectory, TrajectoryConfig};
use crate::{C64, Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const FORMAT_VERSION: u32 = 1;

/// Serializable run configuration; embedded verbatim in every metadata file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    KlTable {
        alpha: f64,
        xi: f64,
        out_dir: PathBuf,
    },
    Sweep {
        xi_max: f64,
        grid_k1: usize,
        grid_k2: usize,
        k_min: f64,
        k_max: f64,
        out_dir: PathBuf,
    },
    Optimize {
        kappa1_tau: f64,
        kappa2_tau: f64,
        xi_max: f64,
        out_dir: PathBuf,
    },
    Trajectory {
        alpha: f64,
        xi: f64,
        kappa1_tau: f64,
        kappa2_tau: f64,
        seed: u64,
        n_trajectories: usize,
        n_periods: usize,
        steps_per_period: usize,
        out_dir: PathBuf,
    },
    Wigner {
        alpha: f64,
        xi: f64,
        parity: char,
        grid: usize,
        range_x: f64,
        range_y: f64,
        out_dir: PathBuf,
    },
    GkpCompare {
        xis: Vec<f64>,
        alphas: Vec<f64>,
        out_dir: PathBuf,
    },
}

impl RunConfig {
    fn out_dir(&self) -> &Path {
        match self {
            RunConfig::KlTable { out_dir, .. }
            | RunConfig::Sweep { out_dir, .. }
            | RunConfig::Optimize { out_dir, .. }
            | RunConfig::Trajectory { out_dir, .. }
            | RunConfig::Wigner { out_dir, .. }
            | RunConfig::GkpCompare { out_dir, .. } => out_dir,
        }
    }
}

fn fmt_f(x: f64) -> Result<String> {
    if !x.is_finite() {
        return Err(Error::InvalidConfig(format!("non-finite value {x} in output")));
    }
    Ok(format!("{x:.16e}"))
}

struct Csv {
    buf: String,
}

impl Csv {
    fn new(header: &str) -> Self {
        Csv { buf: format!("{header}\n") }
    }
    fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }
    fn write(self, path: &Path) -> Result<()> {
        std::fs::write(path, self.buf)?;
        Ok(())
    }
}

fn write_meta(config: &RunConfig, name: &str, extra: serde_json::Value) -> Result<()> {
    let meta = serde_json::json!({
        "format_version": FORMAT_VERSION,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "details": extra,
    });
    let path = config.out_dir().join(format!("{name}.meta.json"));
    std::fs::write(path, serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidConfig(e.to_string())
    }
}

fn write_plot_script(dir: &Path, name: &str, body: &str) -> Result<()> {
    let path = dir.join(format!("plot_{name}.py"));
    let script = format!(
        "#!/usr/bin/env python3\nimport numpy as np\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n{body}\n"
    );
    std::fs::write(path, script)?;
    Ok(())
}

/// Execute a run configuration, writing all artifacts under its out_dir.
pub fn run(config: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(config.out_dir())?;
    match config {
        RunConfig::KlTable { alpha, xi, .. } => run_kl_table(config, *alpha, *xi),
        RunConfig::Sweep { .. } => run_sweep(config),
        RunConfig::Optimize { kappa1_tau, kappa2_tau, xi_max, .. } => {
            run_optimize(config, *kappa1_tau, *kappa2_tau, *xi_max)
        }
        RunConfig::Trajectory { .. } => run_trajectory_cmd(config),
        RunConfig::Wigner { .. } => run_wigner(config),
        RunConfig::GkpCompare { .. } => run_gkp(config),
    }
}

fn run_kl_table(config: &RunConfig, alpha: f64, xi: f64) -> Result<()> {
    if alpha <= 0.0 {
        return Err(Error::InvalidConfig("kl-table needs alpha > 0".into()));
    }
    let n = crate::kl::vector_cutoff(alpha, xi);
    let params = SCParams::real(alpha, xi, n);
    let words = [
        squeezed_cat(&params, Parity::Even)?,
        squeezed_cat(&params, Parity::Odd)?,
    ];
    let set = ErrorSet::standard();
    let t = kl_tensor(&words, &set)?;
    let mut csv = Csv::new("i,j,l,lp,re_numeric,im_numeric,re_oracle,im_oracle,abs_delta");
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            for l in 0..set.len() {
                for lp in 0..set.len() {
                    let num = t.get(i, j, l, lp);
                    let sector = match (i, j) {
                        (0, 0) => Sector::Same(Parity::Even),
                        (1, 1) => Sector::Same(Parity::Odd),
                        (0, 1) => Sector::Cross(Parity::Even),
                        _ => Sector::Cross(Parity::Odd),
                    };
                    let orc = kl_oracle_sc(l, lp, sector, alpha, xi)?;
                    let delta = (num - orc).norm();
                    worst = worst.max(delta);
                    csv.row(&[
                        i.to_string(),
                        j.to_string(),
                        l.to_string(),
                        lp.to_string(),
                        fmt_f(num.re)?,
                        fmt_f(num.im)?,
                        fmt_f(orc.re)?,
                        fmt_f(orc.im)?,
                        fmt_f(delta)?,
                    ]);
                }
            }
        }
    }
    let dir = config.out_dir();
    csv.write(&dir.join("kl_table.csv"))?;
    write_meta(config, "kl_table", serde_json::json!({ "cutoff": n, "worst_delta": worst }))?;
    write_plot_script(
        dir,
        "kl_table",
        r#"data = np.genfromtxt("kl_table.csv", delimiter=",", names=True)
fig, ax = plt.subplots(figsize=(6, 4))
ax.semilogy(np.abs(data["re_numeric"] + 1j*data["im_numeric"]) + 1e-18, "o", label="|numeric|")
ax.semilogy(data["abs_delta"] + 1e-18, "x", label="|numeric - oracle|")
ax.set_xlabel("entry index")
ax.legend()
fig.savefig("kl_table.png", dpi=160)"#,
    )
}

fn run_sweep(config: &RunConfig) -> Result<()> {
    let RunConfig::Sweep { xi_max, grid_k1, grid_k2, k_min, k_max, .. } = config else {
        unreachable!()
    };
    let k1s = log_grid(*k_min, *k_max, *grid_k1);
    let k2s = log_grid(*k_min, *k_max, *grid_k2);
    let cells = sweep(&k1s, &k2s, *xi_max)?;
    let mut csv = Csv::new("k1t,k2t,alpha_opt,xi_opt,n_mean,f_sc,f_cat,f_rail,sdp_gap,cutoff");
    let mut skipped = Vec::new();
    for cell in &cells {
        for (a, x, why) in &cell.sc.skipped {
            skipped.push(serde_json::json!({
                "k1t": cell.kappa1_tau, "k2t": cell.kappa2_tau,
                "alpha": a, "xi": x, "reason": why,
            }));
        }
        csv.row(&[
            fmt_f(cell.kappa1_tau)?,
            fmt_f(cell.kappa2_tau)?,
            fmt_f(cell.sc.alpha_opt)?,
            fmt_f(cell.sc.xi_opt)?,
            fmt_f(cell.sc.mean_photons)?,
            fmt_f(cell.sc.fidelity_opt)?,
            fmt_f(cell.cat.fidelity_opt)?,
            fmt_f(cell.rail_fidelity)?,
            fmt_f(cell.sc.sdp_gap)?,
            cell.sc.cutoff.to_string(),
        ]);
    }
    let dir = config.out_dir();
    csv.write(&dir.join("sweep.csv"))?;
    write_meta(
        config,
        "sweep",
        serde_json::json!({ "xi_max": xi_max, "skipped_cells": skipped }),
    )?;
    write_plot_script(
        dir,
        "sweep",
        r#"data = np.genfromtxt("sweep.csv", delimiter=",", names=True)
k1 = np.unique(data["k1t"]); k2 = np.unique(data["k2t"])
def grid(col):
    return col.reshape(len(k1), len(k2)).T
fig, axes = plt.subplots(1, 4, figsize=(18, 4))
for ax, col, label in [
    (axes[0], 1 - data["f_sc"], "1 - F (squeezed cat)"),
    (axes[1], 1 - data["f_cat"], "1 - F (cat)"),
    (axes[2], data["alpha_opt"], "alpha*"),
    (axes[3], data["xi_opt"], "xi*"),
]:
    im = ax.pcolormesh(k1, k2, grid(col), shading="nearest",
                       norm=None if label[0] != "1" else matplotlib.colors.LogNorm())
    ax.set_xscale("log"); ax.set_yscale("log")
    ax.set_xlabel("kappa1 tau"); ax.set_ylabel("kappa2 tau"); ax.set_title(label)
    fig.colorbar(im, ax=ax)
fig.tight_layout()
fig.savefig("sweep.png", dpi=160)"#,
    )
}

fn run_optimize(config: &RunConfig, k1: f64, k2: f64, xi_max: f64) -> Result<()> {
    let p = NoiseParams::new(k1, k2)?;
    let sc = optimize_encoding(&p, xi_max)?;
    let cat = cat_baseline(&p)?;
    let rail = single_rail_baseline(&p)?;
    let mut csv = Csv::new("k1t,k2t,alpha_opt,xi_opt,n_mean,f_sc,f_cat,f_rail,sdp_gap,cutoff");
    csv.row(&[
        fmt_f(k1)?,
        fmt_f(k2)?,
        fmt_f(sc.alpha_opt)?,
        fmt_f(sc.xi_opt)?,
        fmt_f(sc.mean_photons)?,
        fmt_f(sc.fidelity_opt.max(cat.fidelity_opt))?,
        fmt_f(cat.fidelity_opt)?,
        fmt_f(rail)?,
        fmt_f(sc.sdp_gap)?,
        sc.cutoff.to_string(),
    ]);
    csv.write(&config.out_dir().join("optimize.csv"))?;
    write_meta(
        config,
        "optimize",
        serde_json::json!({
            "tp_residual": sc.tp_residual,
            "cat_alpha_opt": cat.alpha_opt,
        }),
    )
}

fn run_trajectory_cmd(config: &RunConfig) -> Result<()> {
    let RunConfig::Trajectory {
        alpha,
        xi,
        kappa1_tau,
        kappa2_tau,
        seed,
        n_trajectories,
        n_periods,
        steps_per_period,
        ..
    } = config
    else {
        unreachable!()
    };
    let p = NoiseParams::new(*kappa1_tau, *kappa2_tau)?;
    let cutoff = choose_cutoff(C64::new(*alpha, 0.0), C64::new(*xi, 0.0), 1.0)?;
    let code = build_error_subspaces(&SCParams::real(*alpha, *xi, cutoff))?;
    let basis = recovery_basis(&code);
    let w = process_matrix(&code, &basis, &p)?;
    let sol = solve_sdp(&w, &code, &basis)?;
    let chan = RecoveryChannel::from_solution(&sol, &code);
    let cfg = TrajectoryConfig {
        initial: code.codewords[0].clone(),
        p,
        recovery: chan,
        n_periods: *n_periods,
        seed: *seed,
        steps_per_period: *steps_per_period,
    };

    let single = run_trajectory(&cfg)?;
    let mut csv = Csv::new("t_over_tau,p");
    for (t, pv) in single.times.iter().zip(single.p_values.iter()) {
        csv.row(&[fmt_f(*t)?, fmt_f(*pv)?]);
    }
    let dir = config.out_dir();
    csv.write(&dir.join("trajectory.csv"))?;

    let mut ev = Csv::new("t_over_tau,event");
    for (t, kind) in &single.jumps {
        ev.row(&[fmt_f(*t)?, format!("{kind:?}").to_lowercase()]);
    }
    for t in &single.recoveries {
        ev.row(&[fmt_f(*t)?, "recovery".into()]);
    }
    ev.write(&dir.join("trajectory_events.csv"))?;

    let ens = ensemble_average(&cfg, *n_trajectories)?;
    let (tm, pm) = master_equation_p(&cfg.initial, &cfg.p, &cfg.recovery, *n_periods, *steps_per_period)?;
    let mut csv = Csv::new("t_over_tau,mean_p,stderr,master_p");
    for j in 0..ens.times.len() {
        csv.row(&[
            fmt_f(ens.times[j])?,
            fmt_f(ens.mean[j])?,
            fmt_f(ens.stderr[j])?,
            fmt_f(pm[j])?,
        ]);
    }
    let _ = tm;
    csv.write(&dir.join("ensemble.csv"))?;

    write_meta(
        config,
        "trajectory",
        serde_json::json!({
            "cutoff": cutoff,
            "sdp_fidelity": sol.fidelity,
            "sdp_gap": sol.gap,
            "n_jumps_single": single.jumps.len(),
        }),
    )?;
    write_plot_script(
        dir,
        "trajectory",
        r#"single = np.genfromtxt("trajectory.csv", delimiter=",", names=True)
ens = np.genfromtxt("ensemble.csv", delimiter=",", names=True)
fig, (a, b) = plt.subplots(1, 2, figsize=(11, 4))
a.plot(single["t_over_tau"], single["p"], lw=0.9)
try:
    ev = np.genfromtxt("trajectory_events.csv", delimiter=",", names=True,
                       dtype=None, encoding="utf-8")
    ev = np.atleast_1d(ev)
    for t, kind in zip(ev["t_over_tau"], ev["event"]):
        a.axvline(t, color="red" if kind != "recovery" else "gray",
                  ls="-" if kind != "recovery" else "--", alpha=0.6, lw=0.8)
except Exception:
    pass
a.set_xlabel("t / tau"); a.set_ylabel("P(t)"); a.set_title("single trajectory")
b.plot(ens["t_over_tau"], ens["master_p"], "k-", label="master equation")
b.errorbar(ens["t_over_tau"][::5], ens["mean_p"][::5], yerr=3*ens["stderr"][::5],
           fmt=".", ms=3, label="ensemble (3 s.e.)")
b.set_xlabel("t / tau"); b.set_ylabel("P(t)"); b.legend()
fig.tight_layout()
fig.savefig("trajectory.png", dpi=160)"#,
    )
}

fn run_wigner(config: &RunConfig) -> Result<()> {
    let RunConfig::Wigner { alpha, xi, parity, grid, range_x, range_y, .. } = config else {
        unreachable!()
    };
    let par = match parity {
        '+' | 'e' => Parity::Even,
        '-' | 'o' => Parity::Odd,
        other => {
            return Err(Error::InvalidConfig(format!("parity must be +/-, got {other}")))
        }
    };
    // the grid must stay inside the trusted phase-space disk
    let need = ((range_x * range_x + range_y * range_y) * 4.2) as usize;
    let cutoff = choose_cutoff(C64::new(*alpha, 0.0), C64::new(*xi, 0.0), 1.0)?.max((need + 7) / 8 * 8);
    let sc = squeezed_cat(&SCParams::real(*alpha, *xi, cutoff), par)?;
    let rho = DensityMatrix::from_pure(&sc);
    let lin = |hi: f64, n: usize| -> Vec<f64> {
        (0..n).map(|i| -hi + 2.0 * hi * i as f64 / (n - 1) as f64).collect()
    };
    let xs = lin(*range_x, *grid);
    let ys = lin(*range_y, *grid);
    let map = wigner(&rho, &xs, &ys)?;

    let dir = config.out_dir();
    let mut csv = Csv::new("x,y,w");
    for (iy, y) in ys.iter().enumerate() {
        for (ix, x) in xs.iter().enumerate() {
            csv.row(&[fmt_f(*x)?, fmt_f(*y)?, fmt_f(map.w[iy][ix])?]);
        }
    }
    csv.write(&dir.join("wigner.csv"))?;
    let mut csv = Csv::new("axis,coord,marginal");
    for (x, v) in xs.iter().zip(map.marginal_x.iter()) {
        csv.row(&["x".into(), fmt_f(*x)?, fmt_f(*v)?]);
    }
    for (y, v) in ys.iter().zip(map.marginal_y.iter()) {
        csv.row(&["y".into(), fmt_f(*y)?, fmt_f(*v)?]);
    }
    csv.write(&dir.join("wigner_marginals.csv"))?;
    write_meta(config, "wigner", serde_json::json!({ "cutoff": cutoff }))?;
    write_plot_script(
        dir,
        "wigner",
        r#"data = np.genfromtxt("wigner.csv", delimiter=",", names=True)
xs = np.unique(data["x"]); ys = np.unique(data["y"])
w = data["w"].reshape(len(ys), len(xs))
fig, ax = plt.subplots(figsize=(5.5, 4.5))
scale = np.abs(w).max()
im = ax.pcolormesh(xs, ys, w, cmap="RdBu_r", vmin=-scale, vmax=scale, shading="nearest")
ax.set_xlabel("X"); ax.set_ylabel("Y")
fig.colorbar(im, ax=ax, label="W(X, Y)")
fig.tight_layout()
fig.savefig("wigner.png", dpi=160)"#,
    )
}

fn run_gkp(config: &RunConfig) -> Result<()> {
    let RunConfig::GkpCompare { xis, alphas, .. } = config else { unreachable!() };
    let mut csv = Csv::new("code,alpha,xi,cost_loss,cost_dephasing");
    for &xi in xis {
        let delta = (-xi).exp();
        let (lat, fock) = gkp_default_cutoffs(delta);
        let g0 = gkp_codeword(&GKPParams { delta, mu: 0, lattice_cutoff: lat, cutoff: fock })?;
        let g1 = gkp_codeword(&GKPParams { delta, mu: 1, lattice_cutoff: lat, cutoff: fock })?;
        let words = [g0, g1];
        let cl = crate::kl::kl_cost(&words, &ErrorSet::loss())?;
        let cd = crate::kl::kl_cost(&words, &ErrorSet::dephasing())?;
        csv.row(&[
            "gkp".into(),
            fmt_f(0.0)?,
            fmt_f(xi)?,
            fmt_f(cl)?,
            fmt_f(cd)?,
        ]);
    }
    for &alpha in alphas {
        for &xi in xis {
            let n = crate::kl::vector_cutoff(alpha, xi);
            let params = SCParams::real(alpha, xi, n);
            let words = [
                squeezed_cat(&params, Parity::Even)?,
                squeezed_cat(&params, Parity::Odd)?,
            ];
            let cl = crate::kl::kl_cost(&words, &ErrorSet::loss())?;
            let cd = crate::kl::kl_cost(&words, &ErrorSet::dephasing())?;
            csv.row(&[
                "sc".into(),
                fmt_f(alpha)?,
                fmt_f(xi)?,
                fmt_f(cl)?,
                fmt_f(cd)?,
            ]);
        }
    }
    let dir = config.out_dir();
    csv.write(&dir.join("gkp_compare.csv"))?;
    write_meta(config, "gkp_compare", serde_json::json!({}))?;
    write_plot_script(
        dir,
        "gkp_compare",
        r#"rows = np.genfromtxt("gkp_compare.csv", delimiter=",", names=True,
                              dtype=None, encoding="utf-8")
rows = np.atleast_1d(rows)
fig, ax = plt.subplots(figsize=(6, 4.5))
for code in ["gkp", "sc"]:
    sel = rows[rows["code"] == code]
    for al in np.unique(sel["alpha"]):
        s = sel[sel["alpha"] == al]
        label = "GKP" if code == "gkp" else f"SC alpha={al}"
        ax.semilogy(s["xi"], s["cost_loss"] + 1e-18, "-o", label=label + " (loss)")
        ax.semilogy(s["xi"], s["cost_dephasing"] + 1e-18, "--s", label=label + " (dephasing)")
ax.set_xlabel("xi"); ax.set_ylabel("KL cost")
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig("gkp_compare.png", dpi=160)"#,
    )
}
