//! The five job commands, each writing plot-ready CSV/JSON into the output
//! directory.

use crate::config::{Config, InitialKind};
use anyhow::{bail, Context, Result};
use hubbard_boltzmann::analysis::{conservation_audit, decay_fit, timescale_report, DecayFit};
use hubbard_boltzmann::dispersion::reduce_momentum;
use hubbard_boltzmann::io;
use hubbard_boltzmann::stationary::{
    nonthermal_fit, nonthermal_state, spin_eigenbasis, thermal_fit, thermal_state,
};
use hubbard_boltzmann::{DispersionModel, ManifoldCache, TrajectoryRecord, WignerState};
use serde::Serialize;
use std::path::{Path, PathBuf};

pub struct Job {
    pub config: Config,
    pub out: PathBuf,
}

impl Job {
    pub fn new(config: Config, out_flag: Option<PathBuf>) -> Result<Job> {
        let out = out_flag
            .or_else(|| config.output_dir.clone().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&out)
            .with_context(|| format!("cannot create output directory {}", out.display()))?;
        Ok(Job { config, out })
    }

    fn hash(&self) -> String {
        self.config.hash()
    }

    fn initial_state(&self) -> Result<WignerState> {
        match self.config.initial.kind {
            InitialKind::AppendixA => Ok(WignerState::initial_state(self.config.n)?),
            InitialKind::Snapshot => {
                let path = self.config.initial.path.as_ref().expect("validated");
                let state = io::read_snapshot(Path::new(path))?;
                if state.n() != self.config.n {
                    bail!(
                        "snapshot {} has n = {} but the config says n = {}",
                        path,
                        state.n(),
                        self.config.n
                    );
                }
                Ok(state)
            }
        }
    }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    config: &'a Config,
    config_hash: String,
    version: &'a str,
    n_samples: usize,
    n_exchange: usize,
    ellip_count: usize,
    nu_out_of_range: usize,
    exp_root_anomalies: usize,
    records: usize,
}

pub fn simulate(job: &Job) -> Result<()> {
    let cfg = job.config.to_run_config();
    let hash = job.hash();
    let initial = job.initial_state()?;
    let cache = cfg.build_cache()?;

    let out = job.out.clone();
    let hash_for_snap = hash.clone();
    let result = hubbard_boltzmann::run(&cfg, initial, |step, state| {
        let path = out.join(format!("snapshot_step{step:07}.csv"));
        io::write_snapshot(&path, state, Some(&hash_for_snap))?;
        Ok(())
    })?;

    io::write_observables(&job.out.join("observables.csv"), &result.records, Some(&hash))?;
    io::write_snapshot(
        &job.out.join("snapshot_final.csv"),
        &result.final_state,
        Some(&hash),
    )?;
    let manifest = RunManifest {
        config: &job.config,
        config_hash: hash,
        version: env!("CARGO_PKG_VERSION"),
        n_samples: cache.samples.len(),
        n_exchange: cache.exchange.len(),
        ellip_count: cache.diagnostics.ellip_count,
        nu_out_of_range: cache.diagnostics.nu_out_of_range,
        exp_root_anomalies: cache.diagnostics.exp_root_anomalies,
        records: result.records.len(),
    };
    write_json(&job.out.join("run_manifest.json"), &manifest)?;
    let last = result.records.last().expect("at least one record");
    eprintln!(
        "simulate: {} steps to t = {}, final S = {:.6}",
        (cfg.t_end / cfg.dt).round() as usize,
        last.t,
        last.entropy
    );
    Ok(())
}

#[derive(Serialize)]
#[serde(tag = "kind")]
enum FitReport {
    #[serde(rename = "thermal")]
    Thermal {
        beta: f64,
        mu_up: f64,
        mu_dn: f64,
        basis: [[f64; 2]; 4],
        entropy: f64,
        n_up: f64,
        n_dn: f64,
        energy: f64,
        config_hash: String,
    },
    #[serde(rename = "nonthermal")]
    NonThermal {
        a_up: f64,
        a_dn: f64,
        f: Vec<f64>,
        basis: [[f64; 2]; 4],
        entropy: f64,
        n_up: f64,
        n_dn: f64,
        config_hash: String,
    },
}

fn basis_pairs(basis: &hubbard_boltzmann::SpinBasis) -> [[f64; 2]; 4] {
    [
        [basis.up[0], basis.up[1]],
        [basis.up[2], basis.up[3]],
        [basis.dn[0], basis.dn[1]],
        [basis.dn[2], basis.dn[3]],
    ]
}

pub fn stationary(job: &Job) -> Result<()> {
    let hash = job.hash();
    let initial = job.initial_state()?;
    let model = job.config.model;
    let n = job.config.n;
    let (basis, n_up, n_dn) = spin_eigenbasis(initial.conserved_spin());

    let (report, state) = match model {
        DispersionModel::Nearest => {
            let params = nonthermal_fit(&initial)?;
            let state = nonthermal_state(&params)?;
            let report = FitReport::NonThermal {
                a_up: params.a_up,
                a_dn: params.a_dn,
                f: params.f.clone(),
                basis: basis_pairs(&params.basis),
                entropy: state.entropy()?,
                n_up,
                n_dn,
                config_hash: hash.clone(),
            };
            (report, state)
        }
        _ => {
            let energy = initial.conserved_energy(&model);
            let mut params = thermal_fit(&model, n_up, n_dn, energy, n)?;
            params.basis = basis;
            let state = thermal_state(&params, &model, n)?;
            let report = FitReport::Thermal {
                beta: params.beta,
                mu_up: params.mu_up,
                mu_dn: params.mu_dn,
                basis: basis_pairs(&params.basis),
                entropy: state.entropy()?,
                n_up,
                n_dn,
                energy,
                config_hash: hash.clone(),
            };
            (report, state)
        }
    };

    write_json(&job.out.join("fit.json"), &report)?;
    io::write_snapshot(&job.out.join("stationary_state.csv"), &state, Some(&hash))?;
    eprintln!("stationary: fit written, S = {:.6}", state.entropy()?);
    Ok(())
}

pub fn manifold(job: &Job, slice_k1: f64, color: bool) -> Result<()> {
    let hash = job.hash();
    let cfg = job.config.to_run_config();
    let cache = ManifoldCache::build(&cfg.model, cfg.n, cfg.epsilon)?;
    let state = if color { Some(job.initial_state()?) } else { None };
    let records = cache.export(state.as_ref());
    io::write_manifold_csv(&job.out.join("manifold.csv"), &records, Some(&hash))?;

    let slice = slice_contours(&cfg.model, slice_k1, 1024);
    let mut text = format!("# config_hash={hash}\nk3,k4,branch\n");
    for (k3, k4, branch) in &slice {
        text.push_str(&format!(
            "{},{},{}\n",
            io::fmt_float(*k3),
            io::fmt_float(*k4),
            branch
        ));
    }
    std::fs::write(job.out.join("slice_k1.csv"), text)?;
    eprintln!(
        "manifold: {} samples, {} slice points at k1 = {}",
        records.len(),
        slice.len(),
        slice_k1
    );
    Ok(())
}

/// Dense-scan contour extraction in the (k3, k4) plane at fixed k1, for the
/// fixed-slice export. The trivial contours are exact lines; the nontrivial
/// roots are found by bisection along k4 and classified by which arccos
/// branch of the sum momentum they solve.
fn slice_contours(model: &DispersionModel, k1: f64, res: usize) -> Vec<(f64, f64, &'static str)> {
    let mut out = Vec::new();
    for j in 0..res {
        let k = reduce_momentum(j as f64 / res as f64);
        out.push((k1, k, "gamma1"));
        out.push((k, k1, "gamma2"));
    }
    let omega_bar = |k3: f64, k4: f64| {
        let k2 = reduce_momentum(k3 + k4 - k1);
        model.omega_bar(k1, k2, k3, k4)
    };
    for j3 in 0..res {
        let k3 = reduce_momentum(j3 as f64 / res as f64);
        // skip the immediate neighborhood of the trivial lines
        if (k3 - k1).abs() < 2.0 / res as f64 {
            continue;
        }
        let mut prev_k4 = -0.5;
        let mut prev = omega_bar(k3, prev_k4);
        for j4 in 1..=res {
            let k4 = -0.5 + j4 as f64 / res as f64;
            let cur = omega_bar(k3, k4);
            if prev == 0.0 || prev.signum() != cur.signum() {
                let (mut lo, mut hi) = (prev_k4, k4);
                let (mut flo, _) = (prev, cur);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let fm = omega_bar(k3, mid);
                    if fm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                let root = 0.5 * (lo + hi);
                if (root - k1).abs() > 2.0 / res as f64 {
                    out.push((k3, root, classify_branch(model, k1, k3, root)));
                }
            }
            prev = cur;
            prev_k4 = k4;
        }
    }
    out
}

fn classify_branch(model: &DispersionModel, k1: f64, k3: f64, k4: f64) -> &'static str {
    if let DispersionModel::NextNearest { eta } = model {
        let k2 = reduce_momentum(k3 + k4 - k1);
        let s12 = k1 + k2;
        let dk12 = 0.5 * (k1 - k2);
        let dk34 = 0.5 * (k3 - k4);
        let r = 4.0 * eta
            * ((std::f64::consts::TAU * dk12).cos() + (std::f64::consts::TAU * dk34).cos());
        let c = (std::f64::consts::PI * s12).cos();
        let root = (1.0 + 2.0 * r * r).sqrt();
        let c_diag = r / (1.0 + root);
        let d_diag = (c - c_diag).abs();
        let d_ellip = if r != 0.0 {
            (c + (1.0 + root) / (2.0 * r)).abs()
        } else {
            f64::INFINITY
        };
        if d_ellip < d_diag {
            return "ellip";
        }
    }
    "diag"
}

pub fn analyze(
    job: &Job,
    observables: Option<PathBuf>,
    fit: Option<PathBuf>,
    window: Option<(f64, f64)>,
) -> Result<()> {
    let hash = job.hash();
    let obs_path = observables.unwrap_or_else(|| job.out.join("observables.csv"));
    let fit_path = fit.unwrap_or_else(|| job.out.join("fit.json"));
    let records = io::read_observables(&obs_path)
        .with_context(|| format!("cannot read {}", obs_path.display()))?;
    let fit_json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(&fit_path)
            .with_context(|| format!("cannot read {}", fit_path.display()))?,
    )?;
    let s_inf = fit_json
        .get("entropy")
        .and_then(serde_json::Value::as_f64)
        .context("fit JSON has no entropy field")?;

    let (initial_fit, asymptotic) = report_fits(&records, s_inf, window)?;
    let audit = conservation_audit(&records);

    #[derive(Serialize)]
    struct Report {
        kappa_initial: f64,
        kappa_asymptotic: f64,
        s_inf: f64,
        window: (f64, f64),
        residual: f64,
        drifts: Drifts,
        config_hash: String,
    }
    #[derive(Serialize)]
    struct Drifts {
        spin: f64,
        energy: f64,
    }
    let report = Report {
        kappa_initial: initial_fit.kappa,
        kappa_asymptotic: asymptotic.kappa,
        s_inf,
        window: asymptotic.window,
        residual: asymptotic.residual,
        drifts: Drifts {
            spin: audit.spin,
            energy: audit.energy,
        },
        config_hash: hash,
    };
    write_json(&job.out.join("report.json"), &report)?;
    eprintln!(
        "analyze: kappa_initial = {:.4}, kappa_asymptotic = {:.4}",
        initial_fit.kappa, asymptotic.kappa
    );
    Ok(())
}

fn report_fits(
    records: &[TrajectoryRecord],
    s_inf: f64,
    window: Option<(f64, f64)>,
) -> Result<(DecayFit, DecayFit)> {
    match window {
        Some(w) => {
            let t0 = records.first().map(|r| r.t).unwrap_or(0.0);
            let span = records.last().map(|r| r.t).unwrap_or(0.0) - t0;
            let initial = decay_fit(records, s_inf, (t0, t0 + 0.1 * span))?;
            let asymptotic = decay_fit(records, s_inf, w)?;
            Ok((initial, asymptotic))
        }
        None => Ok(timescale_report(records, s_inf)?),
    }
}

pub fn sweep(job: &Job, param: &str, values: &[String]) -> Result<()> {
    let mut rows = vec!["value,beta,mu_up,mu_dn,s_inf,kappa_initial,kappa_asymptotic".to_string()];
    for value in values {
        let mut config = job.config.clone();
        let as_json: serde_json::Value = serde_json::to_value(&config)?;
        let mut doc = as_json;
        crate::config::apply_override_value(&mut doc, param, value)?;
        config = serde_json::from_value(doc).context("sweep override produced invalid config")?;
        config.validate()?;
        let sub = Job {
            config: config.clone(),
            out: job.out.join(format!("{param}={value}")),
        };
        std::fs::create_dir_all(&sub.out)?;
        eprintln!("sweep: {param} = {value}");
        simulate(&sub)?;
        stationary(&sub)?;
        analyze(&sub, None, None, None)?;
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(sub.out.join("report.json"))?)?;
        let fit: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(sub.out.join("fit.json"))?)?;
        let get = |v: &serde_json::Value, key: &str| {
            v.get(key)
                .and_then(serde_json::Value::as_f64)
                .map(io::fmt_float)
                .unwrap_or_default()
        };
        rows.push(format!(
            "{},{},{},{},{},{},{}",
            value,
            get(&fit, "beta"),
            get(&fit, "mu_up"),
            get(&fit, "mu_dn"),
            get(&fit, "entropy"),
            get(&report, "kappa_initial"),
            get(&report, "kappa_asymptotic"),
        ));
    }
    std::fs::write(job.out.join("sweep_summary.csv"), rows.join("\n") + "\n")?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
