use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hubnet::analysis::{bootstrap_from_params, preprocess, rmse, BootstrapConfig};
use hubnet::inference::{decode_leaders, fit_em, fit_em_from, FitConfig};
use hubnet::model::link_probabilities;
use hubnet::simulate::{replicate_rng, sample_parameters, simulate_trajectory, SimConfig};
use serde::{Deserialize, Serialize};

use crate::args::{AlphaSpec, BootstrapArgs, EvalArgs, FitArgs, PreprocessArgs, SimulateArgs, SimulateFile};
use crate::formats::{
    format_groups, format_matrix, format_params, format_table, read_groups, read_params, read_raw_records,
    read_toml, write_text, write_toml,
};
use crate::manifest::{ManifestBuilder, RunManifest};

/// Invalid settings: reported with exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn emit(dir: &Path, manifest: &mut ManifestBuilder, name: &str, text: &str) -> Result<()> {
    write_text(&dir.join(name), text)?;
    manifest.output(name);
    Ok(())
}

/// Resolved simulation settings, as recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSettings {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub alpha: AlphaSpec,
    pub alpha_value: f64,
    pub beta: f64,
    pub gamma: f64,
    pub u_mean: f64,
    pub u_sd: f64,
    pub theta_mean: f64,
    pub theta_sd: f64,
    pub seed: u64,
}

impl SimulateSettings {
    fn resolve(args: &SimulateArgs) -> Result<Self> {
        let file: SimulateFile = match &args.config {
            Some(path) => read_toml(path).map_err(|e| usage(format!("{e:#}")))?,
            None => SimulateFile::default(),
        };
        let n = args.n.or(file.n).ok_or_else(|| usage("--n is required"))?;
        let t = args.t.or(file.t).ok_or_else(|| usage("--T is required"))?;
        let defaults = SimConfig::new(n, t);
        let alpha = args.alpha.or(file.alpha).unwrap_or(AlphaSpec::Value(0.0));
        let settings = Self {
            n,
            t,
            alpha,
            alpha_value: alpha.resolve(n),
            beta: args.beta.or(file.beta).unwrap_or(0.0),
            gamma: args.gamma.or(file.gamma).unwrap_or(0.0),
            u_mean: args.u_mean.or(file.u_mean).unwrap_or(defaults.u_mean),
            u_sd: args.u_sd.or(file.u_sd).unwrap_or(defaults.u_sd),
            theta_mean: args.theta_mean.or(file.theta_mean).unwrap_or(defaults.theta_mean),
            theta_sd: args.theta_sd.or(file.theta_sd).unwrap_or(defaults.theta_sd),
            seed: args.seed.or(file.seed).unwrap_or(0),
        };
        settings.config().validate().map_err(|e| usage(e.to_string()))?;
        if !settings.alpha_value.is_finite() {
            return Err(usage(format!("alpha {alpha} is not finite for n = {n}")));
        }
        Ok(settings)
    }

    fn config(&self) -> SimConfig {
        SimConfig {
            n_nodes: self.n,
            n_groups: self.t,
            alpha: self.alpha_value,
            beta: self.beta,
            gamma: self.gamma,
            u_mean: self.u_mean,
            u_sd: self.u_sd,
            theta_mean: self.theta_mean,
            theta_sd: self.theta_sd,
            seed: self.seed,
        }
    }
}

/// Writes `params.toml`, `groups.csv` and `leaders.csv`.
pub fn simulate(args: &SimulateArgs) -> Result<RunManifest> {
    let settings = SimulateSettings::resolve(args)?;
    let cfg = settings.config();
    let mut manifest = ManifestBuilder::new("simulate", &settings)?.seed(cfg.seed);
    if let Some(path) = &args.config {
        manifest.input(path);
    }
    let mut rng = replicate_rng(cfg.seed, 0);
    let params = sample_parameters(&cfg, &mut rng)?;
    let (leaders, data) = simulate_trajectory(&params, cfg.n_groups, &mut rng)?;

    let out = &args.out;
    prepare_dir(out)?;
    let labels = data.labels();
    emit(out, &mut manifest, "params.toml", &format_params(&params, labels)?)?;
    emit(out, &mut manifest, "groups.csv", &format_groups(&data))?;
    let rows = leaders
        .as_slice()
        .iter()
        .enumerate()
        .map(|(t, &l)| vec![(t + 1).to_string(), labels[l].clone()]);
    emit(out, &mut manifest, "leaders.csv", &format_table(&["t", "leader"], rows))?;
    manifest.finish(out)
}

/// Summary of a fit; `bootstrap` reads it back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub n_nodes: usize,
    #[serde(rename = "n_groups")]
    pub t: usize,
    pub independent: bool,
    pub log_marginal: f64,
    pub iterations: usize,
    pub converged: bool,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FitSettings {
    groups: String,
    timestamps: bool,
    independent: bool,
    warm_start: Option<String>,
    max_iters: usize,
    em_tol: f64,
    restarts: u64,
    seed: u64,
}

/// Writes estimates, link matrices, posteriors, decoded leaders and the
/// log-likelihood trace.
pub fn fit(args: &FitArgs) -> Result<RunManifest> {
    let settings = FitSettings {
        groups: args.groups.display().to_string(),
        timestamps: args.timestamps,
        independent: args.independent,
        warm_start: args.warm_start.as_ref().map(|p| p.display().to_string()),
        max_iters: args.max_iters,
        em_tol: args.em_tol,
        restarts: args.restarts,
        seed: args.seed,
    };
    let cfg = FitConfig {
        max_em_iters: args.max_iters,
        em_tol: args.em_tol,
        constrain_independent: args.independent,
        restarts: (1..=args.restarts).map(|k| args.seed.wrapping_add(k)).collect(),
        ..FitConfig::default()
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let mut manifest = ManifestBuilder::new("fit", &settings)?.seed(args.seed);
    manifest.input(&args.groups);

    let data = read_groups(&args.groups, args.timestamps)?;
    let result = match &args.warm_start {
        Some(path) => {
            manifest.input(path);
            let (start, _) = read_params(path)?;
            if start.n() != data.n() {
                bail!(
                    "{} has {} nodes but the groups file has {}",
                    path.display(),
                    start.n(),
                    data.n()
                );
            }
            fit_em_from(&data, start, &cfg)?
        }
        None => fit_em(&data, &cfg)?,
    };
    let decoded = decode_leaders(&result, &data)?;

    let out = &args.out;
    prepare_dir(out)?;
    let labels = data.labels();
    let p = &result.params;
    emit(out, &mut manifest, "params.toml", &format_params(p, labels)?)?;
    let summary = FitSummary {
        n_nodes: data.n(),
        t: data.len(),
        independent: args.independent,
        log_marginal: result.log_marginal(),
        iterations: result.iterations,
        converged: result.converged,
        alpha: p.alpha,
        beta: p.beta,
        gamma: p.gamma,
    };
    emit(out, &mut manifest, "fit.toml", &toml::to_string(&summary)?)?;
    emit(out, &mut manifest, "labels.txt", &(labels.join("\n") + "\n"))?;
    let linked = &result.linked;
    for (name, m) in [("a.csv", &linked.a), ("b.csv", &linked.b), ("c.csv", &linked.c), ("phi.csv", &linked.phi)] {
        emit(out, &mut manifest, name, &format_matrix(m))?;
    }
    let rho = labels
        .iter()
        .zip(&linked.rho)
        .map(|(l, r)| vec![l.clone(), r.to_string()]);
    emit(out, &mut manifest, "rho.csv", &format_table(&["label", "rho"], rho))?;

    let header: Vec<&str> = labels.iter().map(String::as_str).collect();
    let posterior = result
        .posteriors
        .r
        .rows()
        .into_iter()
        .map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>());
    emit(out, &mut manifest, "posterior.csv", &format_table(&header, posterior))?;

    let mut segment_of = vec![0usize; data.len()];
    for (k, s) in decoded.segments.iter().enumerate() {
        segment_of[s.start..=s.end].iter_mut().for_each(|x| *x = k + 1);
    }
    let leaders = decoded.leaders.iter().enumerate().map(|(t, &l)| {
        vec![(t + 1).to_string(), labels[l].clone(), segment_of[t].to_string()]
    });
    emit(out, &mut manifest, "leaders.csv", &format_table(&["t", "leader", "segment"], leaders))?;
    let segments = decoded
        .segments
        .iter()
        .enumerate()
        .map(|(k, s)| vec![k + 1, s.start + 1, s.end + 1]);
    emit(out, &mut manifest, "segments.csv", &format_table(&["segment", "start", "end"], segments))?;
    let trace = result
        .loglik_trace
        .iter()
        .enumerate()
        .map(|(k, x)| vec![k.to_string(), x.to_string()]);
    emit(out, &mut manifest, "trace.csv", &format_table(&["iteration", "log_marginal"], trace))?;
    manifest.finish(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PreprocessReport {
    events: usize,
    nodes: usize,
    removed: Vec<String>,
    /// 0-based index of the kept candidate of every event.
    retained: Vec<usize>,
}

/// Writes `groups.csv` (with a time column) and `report.toml`.
pub fn preprocess_records(args: &PreprocessArgs) -> Result<RunManifest> {
    #[derive(Serialize)]
    struct Settings {
        input: String,
    }
    let mut manifest = ManifestBuilder::new(
        "preprocess",
        &Settings {
            input: args.input.display().to_string(),
        },
    )?;
    manifest.input(&args.input);
    let raw = read_raw_records(&args.input)?;
    let done = preprocess(&raw)?;
    let out = &args.out;
    prepare_dir(out)?;
    emit(out, &mut manifest, "groups.csv", &format_groups(&done.data))?;
    let report = PreprocessReport {
        events: done.data.len(),
        nodes: done.data.n(),
        removed: done.removed,
        retained: done.retained,
    };
    emit(out, &mut manifest, "report.toml", &toml::to_string(&report)?)?;
    manifest.finish(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub level: f64,
    pub replicates: usize,
    pub failures: usize,
    pub alpha: Interval,
    pub beta: Interval,
    pub gamma: Interval,
}

/// Writes `replicates.csv` and `intervals.toml`.
pub fn bootstrap(args: &BootstrapArgs) -> Result<RunManifest> {
    #[derive(Serialize)]
    struct Settings {
        fit: String,
        replicates: usize,
        level: f64,
        seed: u64,
        jobs: usize,
    }
    let settings = Settings {
        fit: args.fit.display().to_string(),
        replicates: args.replicates,
        level: args.level,
        seed: args.seed,
        jobs: args.jobs,
    };
    if args.replicates < 2 {
        return Err(usage("--B must be at least 2"));
    }
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(usage("--level must lie in (0, 1)"));
    }
    if args.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let mut manifest = ManifestBuilder::new("bootstrap", &settings)?.seed(args.seed).jobs(args.jobs);
    let params_path = args.fit.join("params.toml");
    let summary_path = args.fit.join("fit.toml");
    manifest.input(&params_path);
    manifest.input(&summary_path);
    let (params, _) = read_params(&params_path)?;
    let summary: FitSummary = read_toml(&summary_path)?;
    let cfg = BootstrapConfig {
        replicates: args.replicates,
        level: args.level,
        seed: args.seed,
        jobs: args.jobs,
    };
    let fit_cfg = FitConfig {
        constrain_independent: summary.independent,
        ..FitConfig::default()
    };
    let res = bootstrap_from_params(&params, (summary.t, summary.n_nodes), &cfg, &fit_cfg)?;

    let out = &args.out;
    prepare_dir(out)?;
    let rows = res.replicate_ids.iter().zip(&res.estimates).map(|(r, e)| {
        vec![r.to_string(), e[0].to_string(), e[1].to_string(), e[2].to_string()]
    });
    emit(out, &mut manifest, "replicates.csv", &format_table(&["replicate", "alpha", "beta", "gamma"], rows))?;
    let interval = |k: usize| Interval {
        point: res.point[k],
        lower: res.lower[k],
        upper: res.upper[k],
    };
    let intervals = BootstrapSummary {
        level: res.level,
        replicates: args.replicates,
        failures: res.failures,
        alpha: interval(0),
        beta: interval(1),
        gamma: interval(2),
    };
    emit(out, &mut manifest, "intervals.toml", &toml::to_string(&intervals)?)?;
    manifest.finish(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub rmse_a: f64,
    pub alpha_error: f64,
    pub beta_error: f64,
    pub gamma_error: f64,
}

/// Compares two parameter files and returns the report; with `--out` the
/// report is also written as `report.toml`.
pub fn eval(args: &EvalArgs) -> Result<EvalReport> {
    let (est, _) = read_params(&args.estimated)?;
    let (truth, _) = read_params(&args.truth)?;
    if est.n() != truth.n() {
        bail!(
            "{} has {} nodes but {} has {}",
            args.estimated.display(),
            est.n(),
            args.truth.display(),
            truth.n()
        );
    }
    let report = EvalReport {
        n: est.n(),
        rmse_a: rmse(&link_probabilities(&est)?.a, &link_probabilities(&truth)?.a)?,
        alpha_error: (est.alpha - truth.alpha).abs(),
        beta_error: (est.beta - truth.beta).abs(),
        gamma_error: (est.gamma - truth.gamma).abs(),
    };
    if let Some(out) = &args.out {
        #[derive(Serialize)]
        struct Settings {
            estimated: String,
            truth: String,
        }
        let mut manifest = ManifestBuilder::new(
            "eval",
            &Settings {
                estimated: args.estimated.display().to_string(),
                truth: args.truth.display().to_string(),
            },
        )?;
        manifest.input(&args.estimated);
        manifest.input(&args.truth);
        prepare_dir(out)?;
        write_toml(&out.join("report.toml"), &report)?;
        manifest.output("report.toml");
        manifest.finish(out)?;
    }
    Ok(report)
}
