//! Damped Newton iteration on the dual problem.

use serde::{Deserialize, Serialize};

use crate::dual::{DualProblem, HTable, HessianBlocks, LocalModel};
use crate::error::{Error, Result};
use crate::grid::HalfVector;
use crate::linalg::{dense_newton_direction, newton_direction, solve_full_hessian};

const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineSearch {
    /// Backtrack until the step is feasible and passes the Armijo test.
    Armijo,
    /// Full Newton steps, shortened only to stay feasible.
    Pure,
}

/// Second-order model behind the Newton step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HessianKind {
    /// `h_{k-l}` over all of `Lambda`: the exact Newton step.
    Full,
    /// The half-index Hessian `[A B*; B C]`, which leaves out the derivatives
    /// with respect to conjugate coordinates.
    Quasi,
}

impl std::str::FromStr for HessianKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(HessianKind::Full),
            "quasi" => Ok(HessianKind::Quasi),
            _ => Err(Error::InvalidArgument(format!("unknown Hessian kind '{s}'"))),
        }
    }
}

impl std::fmt::Display for HessianKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HessianKind::Full => "full",
            HessianKind::Quasi => "quasi",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub grad_tol: f64,
    pub max_iters: usize,
    pub backtrack_factor: f64,
    pub min_step: f64,
    pub line_search: LineSearch,
    pub hessian: HessianKind,
    /// Solve every Newton system densely instead of by the TBT recursion.
    pub dense: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-3,
            max_iters: 100,
            backtrack_factor: 0.5,
            min_step: 1e-12,
            line_search: LineSearch::Armijo,
            hessian: HessianKind::Full,
            dense: false,
        }
    }
}

impl NewtonOptions {
    pub fn pure() -> Self {
        Self {
            line_search: LineSearch::Pure,
            ..Self::default()
        }
    }

    /// Undamped steps on the half-index Hessian.
    pub fn pure_quasi() -> Self {
        Self {
            hessian: HessianKind::Quasi,
            ..Self::pure()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.grad_tol > 0.0
            && self.max_iters > 0
            && self.backtrack_factor > 0.0
            && self.backtrack_factor < 1.0
            && self.min_step > 0.0
            && self.min_step <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad Newton options {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// No acceptable step above `min_step`.
    LineSearchFailed,
    /// The Newton system was numerically singular.
    SingularSystem,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub q: HalfVector,
    /// Gradient norm at the start point and after every accepted step.
    pub grad_norm_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub status: SolveStatus,
    /// Structured solves that broke down and were redone densely.
    pub fallback_events: usize,
    pub final_value: f64,
}

impl SolveReport {
    pub fn final_grad_norm(&self) -> f64 {
        *self.grad_norm_history.last().expect("history holds the start point")
    }
}

/// Solves `H x = rhs` for the chosen Hessian, returning `x` as a change of `q`.
///
/// For the half-index Hessian the real `(0, 0)` coefficient is written as
/// `z + conj(z)`; `z` then pairs with its own conjugate, which doubles the
/// `(0, 0)` entry, and `q_00` moves by `2 Re z`. Structured solves that break
/// down are redone densely and counted in `fallbacks`.
pub(crate) fn solve_hessian(
    h: &HTable,
    rhs: &HalfVector,
    kind: HessianKind,
    dense: bool,
    fallbacks: &mut usize,
) -> Result<HalfVector> {
    match kind {
        HessianKind::Full => match solve_full_hessian(h, rhs, dense) {
            Err(e @ Error::Breakdown { .. }) => {
                log::warn!("structured Newton solve failed ({e}); using dense solve");
                *fallbacks += 1;
                solve_full_hessian(h, rhs, true)
            }
            other => other,
        },
        HessianKind::Quasi => {
            let hb = HessianBlocks::assemble(h).with_corner_scaled(2.0);
            let neg = HalfVector::from_vec(rhs.orders(), -rhs.values())?;
            let z = if dense {
                dense_newton_direction(&hb, &neg)?
            } else {
                match newton_direction(&hb, &neg) {
                    Err(e @ (Error::Breakdown { .. } | Error::IndefiniteSchur)) => {
                        log::warn!("structured Newton solve failed ({e}); using dense solve");
                        *fallbacks += 1;
                        dense_newton_direction(&hb, &neg)?
                    }
                    other => other?,
                }
            };
            let mut v = z.values().clone();
            v[0] = (2.0 * v[0].re).into();
            HalfVector::from_vec(z.orders(), v)
        }
    }
}

fn direction(model: &LocalModel, opts: &NewtonOptions, fallbacks: &mut usize) -> Result<HalfVector> {
    let neg = HalfVector::from_vec(model.gradient.orders(), -model.gradient.values())?;
    solve_hessian(&model.h, &neg, opts.hessian, opts.dense, fallbacks)
}

/// Minimizes the dual from a feasible `q0`.
pub fn newton_solve(p: &DualProblem, q0: &HalfVector, opts: &NewtonOptions) -> Result<SolveReport> {
    newton_solve_traced(p, q0, opts, |_, _| {})
}

/// As [`newton_solve`], calling `trace(iteration, grad_norm)` for the start
/// point and every accepted iterate.
pub fn newton_solve_traced(
    p: &DualProblem,
    q0: &HalfVector,
    opts: &NewtonOptions,
    mut trace: impl FnMut(usize, f64),
) -> Result<SolveReport> {
    opts.validate()?;
    let feas = p.feasible(q0)?;
    if !feas.feasible {
        return Err(Error::Infeasible { margin: feas.margin });
    }
    let mut q = q0.clone();
    let mut model = p.local_model(&q)?;
    let mut gnorm = model.gradient.norm();
    let mut history = vec![gnorm];
    trace(0, gnorm);
    let mut best = (gnorm, q.clone(), model.value);
    let mut fallbacks = 0;
    let mut iterations = 0;
    let mut status = SolveStatus::MaxIterations;

    loop {
        if gnorm <= opts.grad_tol {
            status = SolveStatus::Converged;
            break;
        }
        if iterations >= opts.max_iters {
            break;
        }
        let mut dir = match direction(&model, opts, &mut fallbacks) {
            Ok(d) => d,
            Err(Error::Singular) => {
                status = SolveStatus::SingularSystem;
                log::warn!("singular Newton system at iteration {iterations} (grad norm {gnorm:e})");
                break;
            }
            Err(e) => return Err(e),
        };
        let mut slope = model.gradient.real_pairing(&dir);
        if opts.line_search == LineSearch::Armijo && !(slope < 0.0) {
            log::debug!("Newton direction is not a descent direction; using steepest descent");
            dir = HalfVector::from_vec(q.orders(), -model.gradient.values())?;
            slope = model.gradient.real_pairing(&dir);
        }

        let mut step = 1.0;
        let accepted = loop {
            if step < opts.min_step {
                break None;
            }
            let trial = q.add_scaled(step, &dir);
            match p.local_model(&trial) {
                Ok(m) => {
                    let sufficient = match opts.line_search {
                        LineSearch::Pure => m.value.is_finite(),
                        LineSearch::Armijo => {
                            // once the predicted decrease is below rounding
                            // in J, fall back to progress in the gradient
                            let noise = 64.0 * f64::EPSILON * model.value_scale.max(m.value_scale).max(1.0);
                            m.value <= model.value + ARMIJO * step * slope
                                || ((m.value - model.value).abs() <= noise
                                    && m.gradient.norm() < gnorm)
                        }
                    };
                    if sufficient {
                        break Some((trial, m));
                    }
                }
                Err(Error::Infeasible { .. }) => {}
                Err(e) => return Err(e),
            }
            step *= opts.backtrack_factor;
        };
        let Some((trial, m)) = accepted else {
            status = SolveStatus::LineSearchFailed;
            log::warn!("line search failed at iteration {iterations} (grad norm {gnorm:e})");
            break;
        };
        log::debug!("iteration {iterations}: step {step:e}, value {:e}, slope {slope:e}", m.value);
        q = trial;
        model = m;
        gnorm = model.gradient.norm();
        iterations += 1;
        history.push(gnorm);
        trace(iterations, gnorm);
        if gnorm < best.0 {
            best = (gnorm, q.clone(), model.value);
        }
    }

    let converged = status == SolveStatus::Converged;
    let (q, final_value) = if converged {
        (q, model.value)
    } else {
        (best.1, best.2)
    };
    Ok(SolveReport {
        q,
        grad_norm_history: history,
        iterations,
        converged,
        status,
        fallback_events: fallbacks,
        final_value,
    })
}
