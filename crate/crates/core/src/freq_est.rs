//! Two-dimensional frequency estimation: sinusoids in noise, windowed
//! periodograms, the IS spectral estimate, peak picking and Monte-Carlo runs.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use log::debug;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::continuation::{continue_solve, ContinuationOptions, HomotopyProblem};
use crate::covariance::{estimate_covariances, FieldData};
use crate::dual::DualProblem;
use crate::error::{Error, Result};
use crate::grid::{evaluate_centered, CoeffArray, GridSpec, HalfVector, Spectrum, C64};
use crate::io::format_real;
use crate::newton::newton_solve;
use crate::sys_id::SolverKind;

/// Complex sinusoids in circular white noise, observed on `0 <= t_j < T_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinusoidModel {
    pub amps: Vec<f64>,
    pub freqs: Vec<[f64; 2]>,
    pub noise_var: f64,
    /// `(T1, T2)`
    pub dims: [usize; 2],
}

impl SinusoidModel {
    pub fn new(amps: Vec<f64>, freqs: Vec<[f64; 2]>, noise_var: f64, dims: [usize; 2]) -> Result<Self> {
        let m = Self {
            amps,
            freqs,
            noise_var,
            dims,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn nu(&self) -> usize {
        self.amps.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.amps.len() != self.freqs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes for {} frequencies",
                self.amps.len(),
                self.freqs.len()
            )));
        }
        if !(self.noise_var >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be nonnegative, got {}",
                self.noise_var
            )));
        }
        if self.dims[0] == 0 || self.dims[1] == 0 {
            return Err(Error::InvalidArgument("record size must be positive".into()));
        }
        Ok(())
    }
}

/// Draws the phases and the noise from `rng`.
pub fn generate_field_with<R: Rng>(m: &SinusoidModel, rng: &mut R) -> Result<FieldData> {
    m.validate()?;
    let phases: Vec<f64> = (0..m.nu()).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
    let noise = Normal::new(0.0, (m.noise_var / 2.0).sqrt())
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let [t1, t2] = m.dims;
    let mut y = DMatrix::zeros(t2, t1);
    for s1 in 0..t1 {
        for s2 in 0..t2 {
            let mut v = C64::new(0.0, 0.0);
            for ((a, th), ph) in m.amps.iter().zip(&m.freqs).zip(&phases) {
                v += C64::from_polar(*a, th[0] * s1 as f64 + th[1] * s2 as f64 + ph);
            }
            if m.noise_var > 0.0 {
                v += C64::new(noise.sample(rng), noise.sample(rng));
            }
            y[(s2, s1)] = v;
        }
    }
    FieldData::new(y)
}

pub fn generate_field(m: &SinusoidModel, seed: u64) -> Result<FieldData> {
    generate_field_with(m, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Rectangular,
    Bartlett,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub kind: WindowKind,
    pub widths: [usize; 2],
}

impl WindowSpec {
    pub fn rectangular(n1: usize, n2: usize) -> Self {
        Self {
            kind: WindowKind::Rectangular,
            widths: [n1, n2],
        }
    }

    pub fn bartlett(n1: usize, n2: usize) -> Self {
        Self {
            kind: WindowKind::Bartlett,
            widths: [n1, n2],
        }
    }

    pub fn weight(&self, k1: i64, k2: i64) -> f64 {
        let [n1, n2] = self.widths.map(|n| n as i64);
        if k1.abs() > n1 || k2.abs() > n2 {
            return 0.0;
        }
        match self.kind {
            WindowKind::Rectangular => 1.0,
            WindowKind::Bartlett => {
                let w = |k: i64, n: i64| (n + 1 - k.abs()) as f64 / (n + 1) as f64;
                w(k1, n1) * w(k2, n2)
            }
        }
    }
}

/// Windowed lags `w(k) (sigma_k + conj sigma_{-k}) / 2` over the window widths.
pub fn windowed_lags(sig: &CoeffArray, w: &WindowSpec) -> Result<CoeffArray> {
    let [s1, s2] = sig.orders();
    let [n1, n2] = w.widths;
    if s1 < n1 || s2 < n2 {
        return Err(Error::InvalidArgument(format!(
            "window widths {:?} need lags up to ({n1}, {n2}), have ({s1}, {s2})",
            w.widths
        )));
    }
    Ok(CoeffArray::from_fn(w.widths, |k1, k2| {
        (sig.get(k1, k2) + sig.get(-k1, -k2).conj()) * (0.5 * w.weight(k1, k2))
    }))
}

/// Correlogram `sum_{|k_j| <= n_j} w(k) sigma_k e^{-i <k, theta>}` on the grid.
pub fn periodogram(sig: &CoeffArray, w: &WindowSpec, g: &GridSpec) -> Result<Spectrum> {
    SpectralForm::Correlogram(windowed_lags(sig, w)?).evaluate(g.dims())
}

/// Prior in a form that can be evaluated on any grid.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorForm {
    Constant(f64),
    /// Symmetric trigonometric polynomial.
    Polynomial(CoeffArray),
    /// Values on one grid only.
    Grid(Spectrum),
}

impl PriorForm {
    pub fn evaluate(&self, dims: [usize; 2]) -> Result<Spectrum> {
        let psi = match self {
            PriorForm::Constant(c) => Spectrum::constant(dims, *c),
            PriorForm::Polynomial(c) => polynomial_values(c, dims)?,
            PriorForm::Grid(s) => {
                if s.dims() != dims {
                    return Err(Error::InvalidArgument(format!(
                        "prior is only known on a {:?} grid, requested {dims:?}",
                        s.dims()
                    )));
                }
                s.clone()
            }
        };
        psi.check_positive()?;
        Ok(psi)
    }
}

fn polynomial_values(c: &CoeffArray, dims: [usize; 2]) -> Result<Spectrum> {
    Ok(Spectrum::new(evaluate_centered(c.values(), dims)?.map(|z| z.re)))
}

/// Functional form of an estimate, evaluable on any grid large enough.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralForm {
    Correlogram(CoeffArray),
    /// `(Psi^{-1} + Q)^{-1}`. The denominator is positive on the grid the
    /// estimate was solved on; between those points it may change sign, and
    /// the form then has poles, so refined values can be negative.
    Rational { q: HalfVector, prior: PriorForm },
}

impl SpectralForm {
    pub fn evaluate(&self, dims: [usize; 2]) -> Result<Spectrum> {
        match self {
            SpectralForm::Correlogram(c) => polynomial_values(c, dims),
            SpectralForm::Rational { q, prior } => {
                let psi = prior.evaluate(dims)?;
                let qv = polynomial_values(&q.to_coeffs(), dims)?;
                let d = psi.zip_map(&qv, |p, q| 1.0 / p + q);
                if let Some(i) = d.values().iter().position(|v| *v == 0.0) {
                    let rows = dims[1];
                    return Err(Error::ZeroDenominator { l1: i / rows, l2: i % rows });
                }
                if d.min() < 0.0 {
                    debug!("rational form has poles between the points of a {dims:?} grid");
                }
                Ok(d.map(|v| 1.0 / v))
            }
        }
    }
}

/// Evaluates `form` on the grid refined by `factor`.
pub fn interpolate(form: &SpectralForm, g: &GridSpec, factor: usize) -> Result<Spectrum> {
    if factor == 0 {
        return Err(Error::InvalidArgument("refinement factor must be positive".into()));
    }
    let [n1, n2] = g.dims();
    form.evaluate([factor * n1, factor * n2])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsOptions {
    pub solver: SolverKind,
    pub continuation: ContinuationOptions,
}

impl Default for IsOptions {
    fn default() -> Self {
        Self {
            solver: SolverKind::Newton,
            continuation: ContinuationOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IsEstimate {
    pub phi: Spectrum,
    pub q: HalfVector,
    pub sigma: CoeffArray,
    pub converged: bool,
    pub iterations: usize,
}

impl IsEstimate {
    pub fn form(&self, prior: PriorForm) -> SpectralForm {
        SpectralForm::Rational {
            q: self.q.clone(),
            prior,
        }
    }
}

/// IS estimate from data: biased lags up to the grid orders, then the dual solve.
pub fn is_estimate(y: &FieldData, g: &GridSpec, prior: &Spectrum, opts: &IsOptions) -> Result<IsEstimate> {
    let sigma = estimate_covariances(y, g)?;
    is_estimate_from_lags(sigma, g, prior, opts)
}

pub fn is_estimate_from_lags(
    sigma: CoeffArray,
    g: &GridSpec,
    prior: &Spectrum,
    opts: &IsOptions,
) -> Result<IsEstimate> {
    let p = DualProblem::new(sigma.clone(), prior.clone(), *g)?;
    let (q, converged, iterations) = match opts.solver {
        SolverKind::Newton => {
            let r = newton_solve(&p, &HalfVector::zeros(g.orders()), &opts.continuation.newton)?;
            (r.q, r.converged, r.iterations)
        }
        SolverKind::Continuation => {
            let s00 = sigma.get(0, 0).re;
            let hp = HomotopyProblem::new(
                sigma.clone(),
                Spectrum::constant(g.dims(), s00),
                prior.clone(),
                *g,
            )?;
            let r = continue_solve(&hp, &opts.continuation)?;
            let iterations = r.inner_reports.iter().map(|x| x.iterations).sum();
            (r.q, r.converged, iterations)
        }
    };
    let phi = p.primal_spectrum(&q)?;
    Ok(IsEstimate {
        phi,
        q,
        sigma,
        converged,
        iterations,
    })
}

fn neighbours(l1: usize, l2: usize, dims: [usize; 2]) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(8);
    for d1 in [dims[0] - 1, 0, 1] {
        for d2 in [dims[1] - 1, 0, 1] {
            let p = ((l1 + d1) % dims[0], (l2 + d2) % dims[1]);
            if p != (l1, l2) && !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

fn adjacent(a: (usize, usize), b: (usize, usize), dims: [usize; 2]) -> bool {
    let close = |x: usize, y: usize, n: usize| {
        let d = x.abs_diff(y);
        d.min(n - d) <= 1
    };
    close(a.0, b.0, dims[0]) && close(a.1, b.1, dims[1])
}

/// Grid indices `(l1, l2)` of the `nu` highest local maxima.
pub fn find_peak_indices(f: &Spectrum, nu: usize) -> Result<Vec<(usize, usize)>> {
    let dims = f.dims();
    if nu == 0 || nu > f.values().len() {
        return Err(Error::InvalidArgument(format!(
            "cannot pick {nu} peaks on a {dims:?} grid"
        )));
    }
    if f.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("grid function is not finite".into()));
    }
    let mut points: Vec<(usize, usize)> = (0..dims[0])
        .flat_map(|l1| (0..dims[1]).map(move |l2| (l1, l2)))
        .collect();
    points.sort_by(|a, b| f.get(b.0, b.1).total_cmp(&f.get(a.0, a.1)).then(a.cmp(b)));
    let is_max = |p: &(usize, usize)| {
        let v = f.get(p.0, p.1);
        neighbours(p.0, p.1, dims).iter().all(|n| f.get(n.0, n.1) <= v)
    };

    let mut picked: Vec<(usize, usize)> = Vec::with_capacity(nu);
    let free = |picked: &[(usize, usize)], p: &(usize, usize)| {
        picked.iter().all(|s| !adjacent(*s, *p, dims))
    };
    for p in points.iter().filter(|p| is_max(p)) {
        if picked.len() == nu {
            break;
        }
        if free(&picked, p) {
            picked.push(*p);
        }
    }
    for p in &points {
        if picked.len() == nu {
            break;
        }
        if free(&picked, p) {
            picked.push(*p);
        }
    }
    for p in &points {
        if picked.len() == nu {
            break;
        }
        if !picked.contains(p) {
            picked.push(*p);
        }
    }
    Ok(picked)
}

/// Frequencies of the `nu` highest local maxima, highest first.
pub fn find_peaks(f: &Spectrum, nu: usize) -> Result<Vec<[f64; 2]>> {
    let [n1, n2] = f.dims();
    Ok(find_peak_indices(f, nu)?
        .into_iter()
        .map(|(l1, l2)| [2.0 * PI * l1 as f64 / n1 as f64, 2.0 * PI * l2 as f64 / n2 as f64])
        .collect())
}

/// Distance on the circle.
pub fn wrapped_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

const MAX_ASSIGNMENT: usize = 20;

/// `min_pi ||Theta_hat_pi - Theta||` with toroidal coordinate distances.
pub fn frequency_error(theta_hat: &[[f64; 2]], theta_true: &[[f64; 2]]) -> Result<f64> {
    let n = theta_hat.len();
    if n != theta_true.len() {
        return Err(Error::InvalidArgument(format!(
            "{n} estimates for {} true frequencies",
            theta_true.len()
        )));
    }
    if n > MAX_ASSIGNMENT {
        return Err(Error::InvalidArgument(format!(
            "at most {MAX_ASSIGNMENT} frequencies can be paired, got {n}"
        )));
    }
    let cost = |i: usize, j: usize| {
        let a = theta_hat[i];
        let b = theta_true[j];
        wrapped_distance(a[0], b[0]).powi(2) + wrapped_distance(a[1], b[1]).powi(2)
    };
    // best[mask]: least cost pairing the first popcount(mask) true frequencies
    // with the estimates in mask.
    let mut best = vec![f64::INFINITY; 1 << n];
    best[0] = 0.0;
    for mask in 0usize..(1 << n) {
        let j = mask.count_ones() as usize;
        if j == n || !best[mask].is_finite() {
            continue;
        }
        for i in (0..n).filter(|i| mask & (1 << i) == 0) {
            let next = mask | (1 << i);
            best[next] = best[next].min(best[mask] + cost(i, j));
        }
    }
    Ok(best[(1 << n) - 1].sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "RECT")]
    Rect,
    #[serde(rename = "BART")]
    Bart,
    #[serde(rename = "IS")]
    Is,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Rect, Method::Bart, Method::Is];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rect => "RECT",
            Method::Bart => "BART",
            Method::Is => "IS",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RECT" => Ok(Method::Rect),
            "BART" => Ok(Method::Bart),
            "IS" => Ok(Method::Is),
            _ => Err(Error::InvalidArgument(format!("unknown method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub method: Method,
    pub theta_hat: Vec<[f64; 2]>,
    pub theta_true: Vec<[f64; 2]>,
    pub error: f64,
    /// Master seed; the trial draws from stream `trial` of it.
    pub seed: u64,
    /// Solver convergence (always true for the periodograms).
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub model: SinusoidModel,
    /// Draw every frequency uniformly on the torus per trial; otherwise use
    /// `model.freqs`.
    pub random_freqs: bool,
    /// Estimation grid `(N1, N2)`.
    pub grid: [usize; 2],
    /// Lag orders of the IS estimate.
    pub orders: [usize; 2],
    pub rect: WindowSpec,
    pub bart: WindowSpec,
    /// Peaks are picked on the grid refined by this factor.
    pub refine: usize,
    pub is: IsOptions,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            model: SinusoidModel {
                amps: vec![1.0, 1.0],
                freqs: vec![[0.0, 0.0]; 2],
                noise_var: 1.0,
                dims: [30, 30],
            },
            random_freqs: true,
            grid: [30, 30],
            orders: [3, 3],
            rect: WindowSpec::rectangular(8, 8),
            bart: WindowSpec::bartlett(12, 12),
            refine: 1,
            is: IsOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResolutionCase {
    A,
    B,
    C,
}

impl ResolutionCase {
    pub fn freqs(self) -> Vec<[f64; 2]> {
        match self {
            ResolutionCase::A => vec![[2.3, 2.3], [2.3, 4.4]],
            ResolutionCase::B => vec![[2.3, 2.3], [2.3, 2.6]],
            ResolutionCase::C => vec![[2.4, 2.4], [2.51, 2.51]],
        }
    }

    /// Two-sinusoid configuration with these frequencies on a 2x refined grid.
    pub fn config(self) -> MonteCarloConfig {
        let mut c = MonteCarloConfig::default();
        c.model.freqs = self.freqs();
        c.random_freqs = false;
        c.refine = 2;
        c
    }
}

impl FromStr for ResolutionCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(ResolutionCase::A),
            "B" => Ok(ResolutionCase::B),
            "C" => Ok(ResolutionCase::C),
            _ => Err(Error::InvalidArgument(format!("unknown case '{s}'"))),
        }
    }
}

/// All estimates of one trial.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub theta_true: Vec<[f64; 2]>,
    pub field: FieldData,
    /// Spectra on the refined grid, by method.
    pub spectra: Vec<(Method, Spectrum)>,
    pub results: Vec<TrialResult>,
}

impl TrialOutcome {
    pub fn spectrum(&self, m: Method) -> &Spectrum {
        &self.spectra.iter().find(|(k, _)| *k == m).expect("every method is run").1
    }

    pub fn result(&self, m: Method) -> &TrialResult {
        self.results.iter().find(|r| r.method == m).expect("every method is run")
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Runs RECT, BART and IS on one trial of `cfg`.
pub fn run_trial(cfg: &MonteCarloConfig, seed: u64, trial: usize) -> Result<TrialOutcome> {
    let mut rng = trial_rng(seed, trial);
    let mut model = cfg.model.clone();
    if cfg.random_freqs {
        for f in model.freqs.iter_mut() {
            *f = [rng.random::<f64>() * 2.0 * PI, rng.random::<f64>() * 2.0 * PI];
        }
    }
    let y = generate_field_with(&model, &mut rng)?;
    let [n1, n2] = cfg.grid;
    let nu = model.nu();

    let mut spectra = Vec::with_capacity(3);
    let mut results = Vec::with_capacity(3);
    let mut record = |method: Method, spec: Spectrum, converged: bool| -> Result<()> {
        let theta_hat = find_peaks(&spec, nu)?;
        let error = frequency_error(&theta_hat, &model.freqs)?;
        results.push(TrialResult {
            trial,
            method,
            theta_hat,
            theta_true: model.freqs.clone(),
            error,
            seed,
            converged,
        });
        spectra.push((method, spec));
        Ok(())
    };

    for (method, w) in [(Method::Rect, cfg.rect), (Method::Bart, cfg.bart)] {
        let g = GridSpec::new(n1, n2, w.widths[0], w.widths[1])?;
        let sig = estimate_covariances(&y, &g)?;
        let form = SpectralForm::Correlogram(windowed_lags(&sig, &w)?);
        record(method, interpolate(&form, &g, cfg.refine)?, true)?;
    }

    let g = GridSpec::new(n1, n2, cfg.orders[0], cfg.orders[1])?;
    let sigma = estimate_covariances(&y, &g)?;
    let s00 = sigma.get(0, 0).re;
    let est = is_estimate_from_lags(sigma, &g, &Spectrum::constant(g.dims(), s00), &cfg.is)?;
    if !est.converged {
        debug!("trial {trial}: IS solve did not converge");
    }
    let phi = if cfg.refine == 1 {
        est.phi.clone()
    } else {
        interpolate(&est.form(PriorForm::Constant(s00)), &g, cfg.refine)?
    };
    record(Method::Is, phi, est.converged)?;

    Ok(TrialOutcome {
        theta_true: model.freqs,
        field: y,
        spectra,
        results,
    })
}

/// `trials` independent trials in parallel, ordered by trial then method.
pub fn run_monte_carlo(cfg: &MonteCarloConfig, trials: usize, seed: u64) -> Result<Vec<TrialResult>> {
    cfg.model.validate()?;
    cfg.is.continuation.validate()?;
    let per_trial: Vec<Vec<TrialResult>> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, seed, t).map(|o| o.results))
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

/// Boxplot statistics of one method's errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub trials: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// Errors beyond 1.5 IQR from the quartiles.
    pub outliers: usize,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(results: &[TrialResult]) -> Vec<MethodSummary> {
    Method::ALL
        .iter()
        .filter_map(|&method| {
            let mut e: Vec<f64> = results.iter().filter(|r| r.method == method).map(|r| r.error).collect();
            if e.is_empty() {
                return None;
            }
            e.sort_by(f64::total_cmp);
            let (q1, median, q3) = (quantile(&e, 0.25), quantile(&e, 0.5), quantile(&e, 0.75));
            let iqr = q3 - q1;
            let outliers = e
                .iter()
                .filter(|&&x| x < q1 - 1.5 * iqr || x > q3 + 1.5 * iqr)
                .count();
            Some(MethodSummary {
                method,
                trials: e.len(),
                median,
                q1,
                q3,
                outliers,
            })
        })
        .collect()
}

/// Tab-separated summary table with a header row.
pub fn summary_table(summary: &[MethodSummary]) -> String {
    let mut s = String::from("method\ttrials\tmedian\tq1\tq3\toutliers\n");
    for m in summary {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            m.method,
            m.trials,
            format_real(m.median),
            format_real(m.q1),
            format_real(m.q3),
            m.outliers
        ));
    }
    s
}

/// One JSON object per line.
pub fn results_to_jsonl(results: &[TrialResult]) -> Result<String> {
    let mut s = String::new();
    for r in results {
        s.push_str(&serde_json::to_string(r)?);
        s.push('\n');
    }
    Ok(s)
}
