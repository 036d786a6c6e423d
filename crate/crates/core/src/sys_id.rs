//! ARMA random-field spectra and the model-approximation experiment: fit the
//! rational form `P / (1 + P Q)` to the lags of `|b|^2 / |a|^2`.

use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::continuation::{continue_solve, ContinuationOptions, ContinuationReport, HomotopyProblem};
use crate::covariance::covariances_from_spectrum;
use crate::dual::DualProblem;
use crate::error::{Error, Result};
use crate::grid::{evaluate_causal, CoeffArray, GridSpec, HalfVector, Spectrum, C64};
use crate::newton::{newton_solve, SolveReport};

/// `W = b / a` with `a(z) = sum a_k z^{-k}` over `k >= 0`; coefficient
/// matrices are indexed `(k1, k2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaModel {
    a: DMatrix<C64>,
    b: DMatrix<C64>,
}

impl ArmaModel {
    pub fn new(a: DMatrix<C64>, b: DMatrix<C64>) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidArgument("empty ARMA coefficient matrix".into()));
        }
        if a[(0, 0)] == C64::new(0.0, 0.0) {
            return Err(Error::InvalidArgument("a_00 must be nonzero".into()));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &DMatrix<C64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<C64> {
        &self.b
    }

    /// Lags of `|b|^2`: `p_k = sum_j b_{j+k} conj(b_j)`.
    pub fn numerator_coeffs(&self) -> CoeffArray {
        let (r1, r2) = self.b.shape();
        let orders = [r1 - 1, r2 - 1];
        let b = &self.b;
        CoeffArray::from_fn(orders, |k1, k2| {
            let mut s = C64::new(0.0, 0.0);
            for j1 in 0..r1 as i64 {
                for j2 in 0..r2 as i64 {
                    let (u1, u2) = (j1 + k1, j2 + k2);
                    if u1 >= 0 && u1 < r1 as i64 && u2 >= 0 && u2 < r2 as i64 {
                        s += b[(u1 as usize, u2 as usize)] * b[(j1 as usize, j2 as usize)].conj();
                    }
                }
            }
            s
        })
    }
}

/// Coefficients of `(1 - alpha1 z1^{-1})(1 - alpha2 z2^{-1})`.
pub fn separable_poly(alpha: [C64; 2]) -> Result<DMatrix<C64>> {
    if alpha.iter().any(|a| a.norm() > 1.0) {
        return Err(Error::InvalidArgument(format!("root outside the unit disk: {alpha:?}")));
    }
    let one = C64::new(1.0, 0.0);
    Ok(DMatrix::from_row_slice(2, 2, &[one, -alpha[1], -alpha[0], alpha[0] * alpha[1]]))
}

pub fn separable_model(alpha: [C64; 2], beta: [C64; 2]) -> Result<ArmaModel> {
    ArmaModel::new(separable_poly(alpha)?, separable_poly(beta)?)
}

/// The four system matrices of the experiments. `A4Literal` reads the corner
/// entry as the real power `0.9702^{4.2 i}`, `A4` as `0.9702 e^{4.2 i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    A1,
    A2,
    A3,
    A4,
    A4Literal,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "A1" => Ok(Preset::A1),
            "A2" => Ok(Preset::A2),
            "A3" => Ok(Preset::A3),
            "A4" => Ok(Preset::A4),
            "A4LITERAL" => Ok(Preset::A4Literal),
            _ => Err(Error::InvalidArgument(format!("unknown system preset '{s}'"))),
        }
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Preset::A1 => "A1",
            Preset::A2 => "A2",
            Preset::A3 => "A3",
            Preset::A4 => "A4",
            Preset::A4Literal => "A4-literal",
        })
    }
}

/// Shared numerator `b` of every preset.
pub fn preset_b() -> DMatrix<C64> {
    let r = |v: f64| C64::new(v, 0.0);
    DMatrix::from_row_slice(2, 2, &[r(0.6696), r(-0.5357), r(-0.4018), r(0.3214)])
}

pub fn preset_a(p: Preset) -> DMatrix<C64> {
    let r = |v: f64| C64::new(v, 0.0);
    let one = r(1.0);
    match p {
        Preset::A1 => DMatrix::from_row_slice(2, 2, &[one, r(-0.07), r(-0.05), r(0.0035)]),
        Preset::A2 => DMatrix::from_row_slice(2, 2, &[one, r(-0.7), r(-0.5), r(0.35)]),
        Preset::A3 => {
            let a = C64::from_polar(0.98, 2.1);
            DMatrix::from_row_slice(2, 2, &[one, -a, -a, C64::from_polar(0.9604, 4.2)])
        }
        Preset::A4 | Preset::A4Literal => {
            let a = C64::from_polar(0.985, 2.1);
            let corner = if p == Preset::A4 {
                C64::from_polar(0.9702, 4.2)
            } else {
                C64::from_polar(1.0, 4.2 * 0.9702f64.ln())
            };
            DMatrix::from_row_slice(2, 2, &[one, a, a, corner])
        }
    }
}

pub fn preset_model(p: Preset) -> ArmaModel {
    ArmaModel::new(preset_a(p), preset_b()).expect("preset coefficients are valid")
}

/// True spectrum `Phi = |b|^2 / |a|^2` and its numerator `P = |b|^2`.
#[derive(Debug, Clone)]
pub struct ArmaSpectra {
    pub phi: Spectrum,
    pub p: Spectrum,
}

pub fn arma_spectrum(m: &ArmaModel, g: &GridSpec) -> Result<ArmaSpectra> {
    let dims = g.dims();
    let av = evaluate_causal(&m.a, dims)?;
    let bv = evaluate_causal(&m.b, dims)?;
    let scale: f64 = m.a.iter().map(|z| z.norm()).sum();
    let floor = 1e-14 * scale * scale;
    let mut phi = DMatrix::zeros(dims[1], dims[0]);
    let mut p = DMatrix::zeros(dims[1], dims[0]);
    for l2 in 0..dims[1] {
        for l1 in 0..dims[0] {
            let den = av[(l2, l1)].norm_sqr();
            if !(den > floor) {
                return Err(Error::ZeroDenominator { l1, l2 });
            }
            let num = bv[(l2, l1)].norm_sqr();
            p[(l2, l1)] = num;
            phi[(l2, l1)] = num / den;
        }
    }
    Ok(ArmaSpectra {
        phi: Spectrum::new(phi),
        p: Spectrum::new(p),
    })
}

/// `||est - truth||_F / ||truth||_F` over raw grid values.
pub fn relative_error(est: &Spectrum, truth: &Spectrum) -> f64 {
    (est.values() - truth.values()).norm() / truth.values().norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Newton,
    Continuation,
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "newton" => Ok(SolverKind::Newton),
            "continuation" => Ok(SolverKind::Continuation),
            _ => Err(Error::InvalidArgument(format!("unknown solver '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub phi: Spectrum,
    pub phi_hat: Spectrum,
    pub prior: Spectrum,
    pub sigma: CoeffArray,
    pub relative_error: f64,
    pub converged: bool,
    pub newton: Option<SolveReport>,
    pub continuation: Option<ContinuationReport>,
}

impl Experiment {
    pub fn q(&self) -> &HalfVector {
        match (&self.newton, &self.continuation) {
            (Some(r), _) => &r.q,
            (_, Some(r)) => &r.q,
            _ => unreachable!("an experiment always carries a report"),
        }
    }
}

/// Lags of the true spectrum for `|k_j| <= n`, then the dual solved with the
/// prior `P`. Continuation starts from the constant prior `sigma_00`.
/// `opts.newton` drives the Newton solver and every corrector.
pub fn approx_experiment(
    m: &ArmaModel,
    n: usize,
    grid: &GridSpec,
    solver: SolverKind,
    opts: &ContinuationOptions,
) -> Result<Experiment> {
    let g = grid.with_orders(n, n)?;
    let spectra = arma_spectrum(m, &g)?;
    let sigma = covariances_from_spectrum(&spectra.phi, &g)?;
    let (q, newton, continuation) = match solver {
        SolverKind::Newton => {
            let p = DualProblem::new(sigma.clone(), spectra.p.clone(), g)?;
            let r = newton_solve(&p, &HalfVector::zeros([n, n]), &opts.newton)?;
            (r.q.clone(), Some(r), None)
        }
        SolverKind::Continuation => {
            let s00 = sigma.get(0, 0).re;
            let hp = HomotopyProblem::new(
                sigma.clone(),
                Spectrum::constant(g.dims(), s00),
                spectra.p.clone(),
                g,
            )?;
            let r = continue_solve(&hp, opts)?;
            (r.q.clone(), None, Some(r))
        }
    };
    let p = DualProblem::new(sigma.clone(), spectra.p.clone(), g)?;
    let phi_hat = p.primal_spectrum(&q)?;
    let converged = newton.as_ref().map(|r| r.converged).unwrap_or(true)
        && continuation.as_ref().map(|r| r.converged).unwrap_or(true);
    Ok(Experiment {
        relative_error: relative_error(&phi_hat, &spectra.phi),
        phi: spectra.phi,
        phi_hat,
        prior: spectra.p,
        sigma,
        converged,
        newton,
        continuation,
    })
}
