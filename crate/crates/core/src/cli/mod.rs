//! Command-line drivers: `estimate`, `freqest`, `sysid` and `bench`.

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::continuation::{continue_solve, trace_to_csv, ContinuationOptions, HomotopyProblem, TraceRecord};
use crate::covariance::{covariances_from_spectrum, estimate_covariances, FieldData};
use crate::dual::DualProblem;
use crate::error::{Error, Result};
use crate::freq_est::{
    generate_field, results_to_jsonl, run_monte_carlo, run_trial, summarize, summary_table, Method,
    MonteCarloConfig, ResolutionCase, SinusoidModel,
};
use crate::grid::{CoeffArray, GridSpec, HalfVector, Spectrum};
use crate::io::{load_spectrum, save_coeffs, save_spectrum};
use crate::linalg::{bench_tbt, bench_to_csv};
use crate::newton::{newton_solve_traced, LineSearch, NewtonOptions};
use crate::sys_id::{approx_experiment, arma_spectrum, preset_model, relative_error, Preset, SolverKind};

pub use config::Config;

#[derive(Debug, Parser)]
#[command(name = "isce2d", version, about = "Two-dimensional Itakura-Saito spectral estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for Monte-Carlo trials.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Named experiment: A1, A2, A3, A4, A4-literal, caseA, caseB, caseC.
    #[arg(long, global = true)]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve one spectral estimation problem.
    Estimate,
    /// Frequency estimation: a resolution case or a Monte-Carlo run.
    Freqest,
    /// Rational model approximation of an ARMA preset.
    Sysid,
    /// Structured versus dense Hessian solve timings.
    Bench,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// True iff every requested solve converged.
    pub converged: bool,
    pub files: Vec<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.set("seed", s.to_string())?;
    }
    if let Some(p) = &cli.preset {
        cfg.set("preset", p.clone())?;
    }
    if cli.threads == 0 {
        return Err(Error::InvalidArgument("--threads must be positive".into()));
    }
    fs::create_dir_all(&cli.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut out = Output {
        dir: cli.out.clone(),
        files: Vec::new(),
    };
    let converged = pool.install(|| match cli.command {
        Command::Estimate => cmd_estimate(&cfg, &mut out),
        Command::Freqest => cmd_freqest(&cfg, &mut out),
        Command::Sysid => cmd_sysid(&cfg, &mut out),
        Command::Bench => cmd_bench(&cfg, &mut out),
    })?;
    Ok(Outcome {
        converged,
        files: out.files,
    })
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn text(&mut self, name: &str, s: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(p, s)?;
        Ok(())
    }

    fn json(&mut self, name: &str, v: &serde_json::Value) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.text(name, &s)
    }

    fn spectrum(&mut self, name: &str, s: &Spectrum) -> Result<()> {
        let p = self.path(name);
        save_spectrum(&p, s)
    }

    fn coeffs(&mut self, name: &str, c: &CoeffArray) -> Result<()> {
        let p = self.path(name);
        save_coeffs(&p, c)
    }
}

fn grid(cfg: &Config, default_order: usize) -> Result<GridSpec> {
    GridSpec::new(
        cfg.get_or("grid.N1", 30)?,
        cfg.get_or("grid.N2", 30)?,
        cfg.get_or("lags.n1", default_order)?,
        cfg.get_or("lags.n2", default_order)?,
    )
}

fn seed(cfg: &Config) -> Result<u64> {
    cfg.get("seed")?.ok_or_else(|| {
        Error::InvalidArgument("this command is randomized and needs a seed (--seed or 'seed' key)".into())
    })
}

fn solver_kind(cfg: &Config) -> Result<SolverKind> {
    cfg.get_or("solver.kind", SolverKind::Newton)
}

fn continuation_options(cfg: &Config) -> Result<ContinuationOptions> {
    let d = NewtonOptions::default();
    let line_search = match cfg.raw("solver.line_search") {
        None | Some("armijo") => LineSearch::Armijo,
        Some("pure") => LineSearch::Pure,
        Some(other) => {
            return Err(cfg.invalid("solver.line_search", format!("expected armijo or pure, got '{other}'")))
        }
    };
    let newton = NewtonOptions {
        grad_tol: cfg.get_or("solver.grad_tol", d.grad_tol)?,
        max_iters: cfg.get_or("solver.max_iters", d.max_iters)?,
        hessian: cfg.get_or("solver.hessian", d.hessian)?,
        dense: cfg.get_or("solver.dense", d.dense)?,
        line_search,
        ..d
    };
    let c = ContinuationOptions::default();
    let opts = ContinuationOptions {
        dt: cfg.get_or("continuation.dt", c.dt)?,
        min_dt: cfg.get_or("continuation.min_dt", c.min_dt)?,
        newton,
    };
    opts.validate()?;
    Ok(opts)
}

fn system_preset(cfg: &Config) -> Result<Option<Preset>> {
    cfg.raw("preset")
        .map(|s| s.parse::<Preset>().map_err(|e| cfg.invalid("preset", e)))
        .transpose()
}

fn solver_label(kind: SolverKind) -> &'static str {
    match kind {
        SolverKind::Newton => "newton",
        SolverKind::Continuation => "continuation",
    }
}

fn cmd_estimate(cfg: &Config, out: &mut Output) -> Result<bool> {
    let preset = system_preset(cfg)?;
    // The presets are matched at the order of their denominator.
    let g = grid(cfg, if preset.is_some() { 1 } else { 3 })?;
    let arma = preset.map(|p| arma_spectrum(&preset_model(p), &g)).transpose()?;

    let data_kind = cfg.raw("data.kind").unwrap_or(if cfg.raw("data.file").is_some() {
        "file"
    } else if preset.is_some() {
        "preset"
    } else {
        "white_noise"
    });
    let sigma = match data_kind {
        "file" => {
            let path = cfg
                .raw("data.file")
                .ok_or_else(|| cfg.invalid("data.kind", "'file' needs data.file"))?;
            estimate_covariances(&FieldData::load(Path::new(path))?, &g)?
        }
        "white_noise" => {
            let m = SinusoidModel::new(
                vec![],
                vec![],
                cfg.get_or("data.noise_var", 1.0)?,
                [cfg.get_or("data.T1", 64)?, cfg.get_or("data.T2", 64)?],
            )?;
            estimate_covariances(&generate_field(&m, seed(cfg)?)?, &g)?
        }
        "preset" => {
            let a = arma
                .as_ref()
                .ok_or_else(|| cfg.invalid("data.kind", "'preset' needs a system preset"))?;
            covariances_from_spectrum(&a.phi, &g)?
        }
        other => {
            return Err(cfg.invalid(
                "data.kind",
                format!("expected file, white_noise or preset, got '{other}'"),
            ))
        }
    };
    let s00 = sigma.get(0, 0).re;

    let prior_kind = cfg.raw("prior.kind").unwrap_or(if arma.is_some() { "arma_P" } else { "constant" });
    let prior = match prior_kind {
        "constant" => {
            let c = cfg.get_or("prior.value", s00)?;
            if !(c > 0.0) {
                return Err(cfg.invalid("prior.value", "must be positive"));
            }
            Spectrum::constant(g.dims(), c)
        }
        "file" => {
            let path = cfg
                .raw("prior.file")
                .ok_or_else(|| cfg.invalid("prior.kind", "'file' needs prior.file"))?;
            let p = load_spectrum(Path::new(path))?;
            p.check_dims(g.dims())?;
            p
        }
        "arma_P" => arma
            .as_ref()
            .ok_or_else(|| cfg.invalid("prior.kind", "'arma_P' needs a system preset"))?
            .p
            .clone(),
        other => {
            return Err(cfg.invalid(
                "prior.kind",
                format!("expected constant, file or arma_P, got '{other}'"),
            ))
        }
    };

    let kind = solver_kind(cfg)?;
    let opts = continuation_options(cfg)?;
    let (q, converged, report, trace) = match kind {
        SolverKind::Newton => {
            let p = DualProblem::new(sigma.clone(), prior.clone(), g)?;
            let mut trace = Vec::new();
            let r = newton_solve_traced(&p, &HalfVector::zeros(g.orders()), &opts.newton, |i, gn| {
                trace.push(TraceRecord {
                    outer_step: 0,
                    t: 1.0,
                    inner_iter: i,
                    grad_norm: gn,
                })
            })?;
            (r.q.clone(), r.converged, serde_json::to_value(&r)?, trace)
        }
        SolverKind::Continuation => {
            let hp = HomotopyProblem::new(sigma.clone(), Spectrum::constant(g.dims(), s00), prior.clone(), g)?;
            let r = continue_solve(&hp, &opts)?;
            (r.q.clone(), r.converged, serde_json::to_value(&r)?, r.trace.clone())
        }
    };
    let phi_hat = DualProblem::new(sigma.clone(), prior.clone(), g)?.primal_spectrum(&q)?;
    let rel = arma.as_ref().map(|a| relative_error(&phi_hat, &a.phi));

    out.spectrum("phi_hat.txt", &phi_hat)?;
    out.coeffs("q.txt", &q.to_coeffs())?;
    out.coeffs("sigma.txt", &sigma)?;
    out.text("trace.csv", &trace_to_csv(&trace))?;
    out.json(
        "report.json",
        &json!({
            "command": "estimate",
            "preset": preset.map(|p| p.to_string()),
            "data": data_kind,
            "prior": prior_kind,
            "solver": solver_label(kind),
            "hessian": opts.newton.hessian.to_string(),
            "grid": g.dims(),
            "orders": g.orders(),
            "converged": converged,
            "relative_error": rel,
            "report": report,
        }),
    )?;
    Ok(converged)
}

fn resolution_case(cfg: &Config) -> Result<Option<ResolutionCase>> {
    match cfg.raw("preset") {
        None => Ok(None),
        Some(s) if s.eq_ignore_ascii_case("mc") || s.eq_ignore_ascii_case("montecarlo") => Ok(None),
        Some(s) => {
            let name = s.strip_prefix("case").or_else(|| s.strip_prefix("Case")).unwrap_or(s);
            name.parse().map(Some).map_err(|e| cfg.invalid("preset", e))
        }
    }
}

fn freqest_config(cfg: &Config, base: MonteCarloConfig) -> Result<MonteCarloConfig> {
    let mut c = base;
    c.grid = [cfg.get_or("grid.N1", c.grid[0])?, cfg.get_or("grid.N2", c.grid[1])?];
    c.orders = [cfg.get_or("lags.n1", c.orders[0])?, cfg.get_or("lags.n2", c.orders[1])?];
    c.model.dims = [
        cfg.get_or("data.T1", c.model.dims[0])?,
        cfg.get_or("data.T2", c.model.dims[1])?,
    ];
    c.model.noise_var = cfg.get_or("data.noise_var", c.model.noise_var)?;
    c.refine = cfg.get_or("refine", c.refine)?;
    c.is.solver = solver_kind(cfg)?;
    c.is.continuation = continuation_options(cfg)?;
    if let Some(k) = cfg.raw("prior.kind") {
        if k != "constant" {
            return Err(cfg.invalid("prior.kind", "frequency estimation uses the constant prior sigma_00"));
        }
    }
    Ok(c)
}

fn cmd_freqest(cfg: &Config, out: &mut Output) -> Result<bool> {
    let seed = seed(cfg)?;
    let case = resolution_case(cfg)?;
    let results = match case {
        Some(case) => {
            let c = freqest_config(cfg, case.config())?;
            let o = run_trial(&c, seed, 0)?;
            for m in Method::ALL {
                out.spectrum(&format!("{}.txt", m.to_string().to_lowercase()), o.spectrum(m))?;
            }
            o.results
        }
        None => {
            let c = freqest_config(cfg, MonteCarloConfig::default())?;
            run_monte_carlo(&c, cfg.get_or("trials", 100)?, seed)?
        }
    };
    out.text("trials.jsonl", &results_to_jsonl(&results)?)?;
    out.text("summary.tsv", &summary_table(&summarize(&results)))?;
    Ok(results.iter().all(|r| r.converged))
}

fn cmd_sysid(cfg: &Config, out: &mut Output) -> Result<bool> {
    let preset = system_preset(cfg)?
        .ok_or_else(|| Error::InvalidArgument("sysid needs --preset (A1, A2, A3, A4, A4-literal)".into()))?;
    let g = grid(cfg, 1)?;
    let [n1, n2] = g.orders();
    if n1 != n2 {
        return Err(cfg.invalid("lags.n2", "the approximation experiment uses n1 = n2"));
    }
    let kind = solver_kind(cfg)?;
    let opts = continuation_options(cfg)?;
    let e = approx_experiment(&preset_model(preset), n1, &g, kind, &opts)?;

    let (iterations, final_grad_norm, t_path, trace) = match (&e.newton, &e.continuation) {
        (Some(r), _) => (r.iterations, r.final_grad_norm(), vec![1.0], None),
        (_, Some(r)) => (
            r.inner_reports.iter().map(|x| x.iterations).sum(),
            r.inner_reports.last().map(|x| x.final_grad_norm()).unwrap_or(f64::NAN),
            r.t_path.clone(),
            Some(&r.trace),
        ),
        _ => unreachable!("an experiment always carries a report"),
    };
    out.spectrum("phi.txt", &e.phi)?;
    out.spectrum("phi_hat.txt", &e.phi_hat)?;
    out.spectrum("prior.txt", &e.prior)?;
    if let Some(t) = trace {
        out.text("trace.csv", &trace_to_csv(t))?;
    }
    out.json(
        "sysid.json",
        &json!({
            "model": preset.to_string(),
            "solver": solver_label(kind),
            "hessian": opts.newton.hessian.to_string(),
            "grid": g.dims(),
            "n": n1,
            "relative_error": e.relative_error,
            "converged": e.converged,
            "iterations": iterations,
            "final_grad_norm": final_grad_norm,
            "t_path": t_path,
        }),
    )?;
    Ok(e.converged)
}

fn cmd_bench(cfg: &Config, out: &mut Output) -> Result<bool> {
    let sizes = cfg.get_list::<usize>("bench.n")?.unwrap_or_else(|| vec![5, 10, 20, 30]);
    let trials = cfg.get_or("bench.trials", 3)?;
    let records = bench_tbt(&sizes, trials, seed(cfg)?)?;
    out.text("bench.csv", &bench_to_csv(&records))?;
    let mut jsonl = String::new();
    for r in &records {
        jsonl.push_str(&serde_json::to_string(r)?);
        jsonl.push('\n');
    }
    out.text("bench.jsonl", &jsonl)?;
    Ok(true)
}
