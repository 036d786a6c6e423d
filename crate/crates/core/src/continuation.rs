//! Predictor-corrector continuation along the prior homotopy
//! `Psi_t = (1 - t) Psi_0 + t Psi_1`.

use serde::{Deserialize, Serialize};

use crate::dual::{DualProblem, HTable};
use crate::error::{Error, Result};
use crate::grid::{half_moments, CoeffArray, GridSpec, HalfVector, Spectrum};
use crate::newton::{newton_solve_traced, solve_hessian, HessianKind, NewtonOptions, SolveReport};

#[derive(Debug, Clone)]
pub struct HomotopyProblem {
    sigma: CoeffArray,
    psi0: Spectrum,
    psi1: Spectrum,
    grid: GridSpec,
}

impl HomotopyProblem {
    pub fn new(sigma: CoeffArray, psi0: Spectrum, psi1: Spectrum, grid: GridSpec) -> Result<Self> {
        for psi in [&psi0, &psi1] {
            psi.check_dims(grid.dims())?;
            psi.check_positive()?;
        }
        // validates the lags against the grid
        DualProblem::new(sigma.clone(), psi0.clone(), grid)?;
        Ok(Self {
            sigma,
            psi0,
            psi1,
            grid,
        })
    }

    pub fn sigma(&self) -> &CoeffArray {
        &self.sigma
    }

    pub fn psi0(&self) -> &Spectrum {
        &self.psi0
    }

    pub fn psi1(&self) -> &Spectrum {
        &self.psi1
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// The dual problem with prior `Psi_t`.
    pub fn problem_at(&self, t: f64) -> Result<DualProblem> {
        DualProblem::new(self.sigma.clone(), homotopy_prior(t, self)?, self.grid)
    }
}

pub fn homotopy_prior(t: f64, hp: &HomotopyProblem) -> Result<Spectrum> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("homotopy parameter {t} outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok(hp.psi0.clone());
    }
    if t == 1.0 {
        return Ok(hp.psi1.clone());
    }
    Ok(hp.psi0.zip_map(&hp.psi1, |a, b| (1.0 - t) * a + t * b))
}

/// Tangent of the solution path: solves
/// `H V = Gamma(D^{-2} Psi_t^{-2} (Psi_1 - Psi_0))` with `D = Psi_t^{-1} + Q`.
/// Exact for [`HessianKind::Full`].
pub fn vector_field(q: &HalfVector, t: f64, hp: &HomotopyProblem, kind: HessianKind) -> Result<HalfVector> {
    vector_field_counted(q, t, hp, kind, &mut 0)
}

fn vector_field_counted(
    q: &HalfVector,
    t: f64,
    hp: &HomotopyProblem,
    kind: HessianKind,
    fallbacks: &mut usize,
) -> Result<HalfVector> {
    let p = hp.problem_at(t)?;
    let d = p.denominator(q)?;
    let margin = d.min();
    if !(margin > 0.0) {
        return Err(Error::Infeasible { margin });
    }
    let psi_t = p.psi();
    let weight = d.map(|v| 1.0 / (v * v));
    let mut integrand = weight.zip_map(psi_t, |w, s| w / (s * s));
    integrand = integrand.zip_map(&hp.psi1.zip_map(&hp.psi0, |a, b| a - b), |a, b| a * b);
    if integrand.values().iter().all(|&v| v == 0.0) {
        return Ok(HalfVector::zeros(q.orders()));
    }
    let rhs = HalfVector::from_vec(q.orders(), half_moments(&integrand, q.orders()))?;
    solve_hessian(&HTable::from_weight(&weight, q.orders()), &rhs, kind, false, fallbacks)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    pub dt: f64,
    pub min_dt: f64,
    pub newton: NewtonOptions,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            dt: 0.5,
            min_dt: 1.0 / 64.0,
            newton: NewtonOptions::default(),
        }
    }
}

impl ContinuationOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_dt > 0.0 && self.min_dt <= self.dt && self.dt <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < min_dt <= dt <= 1, got dt = {}, min_dt = {}",
                self.dt, self.min_dt
            )));
        }
        self.newton.validate()
    }
}

/// One inner Newton iteration of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub outer_step: usize,
    pub t: f64,
    pub inner_iter: usize,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub q: HalfVector,
    /// Accepted homotopy parameters, starting at 0 and ending at 1.
    pub t_path: Vec<f64>,
    /// Corrector reports of the accepted steps (the first is the `t = 0` solve).
    pub inner_reports: Vec<SolveReport>,
    pub step_halvings: usize,
    pub converged: bool,
    pub fallback_events: usize,
    pub trace: Vec<TraceRecord>,
}

/// Runs the continuation from `q = 0` at `t = 0` to `t = 1`.
pub fn continue_solve(hp: &HomotopyProblem, opts: &ContinuationOptions) -> Result<ContinuationReport> {
    opts.validate()?;
    let mut trace = Vec::new();
    let mut fallbacks = 0;
    let orders = hp.grid.orders();

    let p0 = hp.problem_at(0.0)?;
    let first = newton_solve_traced(&p0, &HalfVector::zeros(orders), &opts.newton, |i, g| {
        trace.push(TraceRecord {
            outer_step: 0,
            t: 0.0,
            inner_iter: i,
            grad_norm: g,
        })
    })?;
    if !first.converged {
        log::warn!("initial solve at t = 0 did not converge");
    }
    fallbacks += first.fallback_events;
    let mut q = first.q.clone();
    let mut t = 0.0f64;
    let mut t_path = vec![0.0];
    let mut inner_reports = vec![first];
    let mut step_halvings = 0;
    let mut dt = opts.dt;
    let mut outer = 0;

    while t < 1.0 {
        let mut step = dt.min(1.0 - t);
        let mut t_next = t + step;
        if 1.0 - t_next <= 1e-12 {
            t_next = 1.0;
            step = 1.0 - t;
        }
        let v = vector_field_counted(&q, t, hp, opts.newton.hessian, &mut fallbacks)?;
        let predictor = q.add_scaled(step, &v);
        let p = hp.problem_at(t_next)?;
        let mut attempt = Vec::new();
        let outcome = newton_solve_traced(&p, &predictor, &opts.newton, |i, g| {
            attempt.push(TraceRecord {
                outer_step: outer + 1,
                t: t_next,
                inner_iter: i,
                grad_norm: g,
            })
        });
        match outcome {
            Ok(r) if r.converged => {
                outer += 1;
                fallbacks += r.fallback_events;
                trace.extend(attempt);
                q = r.q.clone();
                t = t_next;
                t_path.push(t);
                inner_reports.push(r);
                dt = (2.0 * dt).min(opts.dt);
            }
            other => {
                match &other {
                    Ok(r) => {
                        fallbacks += r.fallback_events;
                        log::info!("corrector at t = {t_next} stopped with {:?}; halving the step", r.status)
                    }
                    Err(Error::Infeasible { .. }) => {
                        log::info!("predictor at t = {t_next} is infeasible; halving the step")
                    }
                    Err(_) => {}
                }
                if let Err(e) = other {
                    if !matches!(e, Error::Infeasible { .. }) {
                        return Err(e);
                    }
                }
                dt = step / 2.0;
                step_halvings += 1;
                if dt < opts.min_dt {
                    return Err(Error::StepUnderflow { t, dt });
                }
            }
        }
    }

    let converged = inner_reports.iter().all(|r| r.converged);
    Ok(ContinuationReport {
        q,
        t_path,
        inner_reports,
        step_halvings,
        converged,
        fallback_events: fallbacks,
        trace,
    })
}

/// `outer_step,t,inner_iter,grad_norm` rows with a header line.
pub fn trace_to_csv(trace: &[TraceRecord]) -> String {
    let mut s = String::from("outer_step,t,inner_iter,grad_norm\n");
    for r in trace {
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.outer_step,
            crate::io::format_real(r.t),
            r.inner_iter,
            crate::io::format_real(r.grad_norm)
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::covariances_from_spectrum;
    use crate::grid::{fourier_coeffs, C64};
    use crate::newton::newton_solve;

    fn smooth(dims: [usize; 2], a: f64, b: f64) -> Spectrum {
        Spectrum::from_fn(dims, |l1, l2| {
            let t1 = 2.0 * std::f64::consts::PI * l1 as f64 / dims[0] as f64;
            let t2 = 2.0 * std::f64::consts::PI * l2 as f64 / dims[1] as f64;
            (a * t1.cos() + b * (t1 + 2.0 * t2).sin()).exp()
        })
    }

    fn problem(psi1: Spectrum) -> HomotopyProblem {
        let g = GridSpec::new(12, 12, 2, 2).unwrap();
        let sigma = covariances_from_spectrum(&smooth(g.dims(), 0.4, -0.3), &g).unwrap();
        let s00 = sigma.get(0, 0).re;
        HomotopyProblem::new(sigma, Spectrum::constant(g.dims(), s00), psi1, g).unwrap()
    }

    fn tight() -> NewtonOptions {
        NewtonOptions {
            grad_tol: 1e-11,
            max_iters: 500,
            ..NewtonOptions::default()
        }
    }

    #[test]
    fn prior_endpoints() {
        let g = GridSpec::new(8, 8, 1, 1).unwrap();
        let one = Spectrum::constant(g.dims(), 1.0);
        let three = Spectrum::constant(g.dims(), 3.0);
        let sigma = fourier_coeffs(&one, &g).unwrap();
        let hp = HomotopyProblem::new(sigma, one.clone(), three.clone(), g).unwrap();
        assert_eq!(homotopy_prior(0.0, &hp).unwrap(), one);
        assert_eq!(homotopy_prior(1.0, &hp).unwrap(), three);
        assert_eq!(homotopy_prior(0.5, &hp).unwrap(), Spectrum::constant([8, 8], 2.0));
        assert!(homotopy_prior(1.5, &hp).is_err());
    }

    #[test]
    fn vector_field_trivial_cases() {
        let g = GridSpec::new(8, 8, 1, 1).unwrap();
        let one = Spectrum::constant(g.dims(), 1.0);
        let sigma = fourier_coeffs(&one, &g).unwrap();
        let same = HomotopyProblem::new(sigma.clone(), one.clone(), one.clone(), g).unwrap();
        let up = HomotopyProblem::new(sigma, one, Spectrum::constant(g.dims(), 2.0), g).unwrap();
        for kind in [HessianKind::Full, HessianKind::Quasi] {
            let zero = HalfVector::zeros([1, 1]);
            assert_eq!(vector_field(&zero, 0.3, &same, kind).unwrap(), zero);
            let v = vector_field(&zero, 0.0, &up, kind).unwrap();
            assert!((v.values()[0] - C64::new(1.0, 0.0)).norm() < 1e-14, "{kind}");
            assert!(v.values().iter().skip(1).all(|z| z.norm() < 1e-14));
        }
    }

    // Exact path tangent in the 2M real coordinates, keeping the
    // conjugate-coordinate curvature h_{k+l} that the structured Hessian omits.
    fn exact_tangent(q: &HalfVector, t: f64, hp: &HomotopyProblem) -> nalgebra::DVector<C64> {
        use crate::grid::{grid_moments, half_indices, moment_at};
        let p = hp.problem_at(t).unwrap();
        let d = p.denominator(q).unwrap();
        let w2 = d.map(|v| 1.0 / (v * v));
        let m = grid_moments(&w2);
        let idx = half_indices(q.orders());
        let n = idx.len();
        // unknowns: re of every entry, im of entries 1..; equations: re/im of dg_k
        let dim = 2 * n - 1;
        let col = |i: usize, imag: bool| if imag { n + i - 1 } else { i };
        let mut jac = nalgebra::DMatrix::<f64>::zeros(dim, dim);
        let mut rows = Vec::new();
        for (kk, k) in idx.iter().enumerate() {
            // dg_k as a linear map of (re dq_l, im dq_l)
            let mut re_row = vec![0.0; dim];
            let mut im_row = vec![0.0; dim];
            for (ll, l) in idx.iter().enumerate() {
                let minus = moment_at(&m, k[0] - l[0], k[1] - l[1]);
                if ll == 0 {
                    re_row[col(0, false)] += minus.re;
                    im_row[col(0, false)] += minus.im;
                    continue;
                }
                let plus = moment_at(&m, k[0] + l[0], k[1] + l[1]);
                // minus * (a + ib) + plus * (a - ib)
                let da = minus + plus;
                let db = (minus - plus) * C64::new(0.0, 1.0);
                re_row[col(ll, false)] += da.re;
                im_row[col(ll, false)] += da.im;
                re_row[col(ll, true)] += db.re;
                im_row[col(ll, true)] += db.im;
            }
            rows.push(re_row);
            if kk > 0 {
                rows.push(im_row);
            }
        }
        for (r, row) in rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                jac[(r, c)] = *v;
            }
        }
        let psi_t = p.psi();
        let integrand = w2
            .zip_map(psi_t, |w, s| w / (s * s))
            .zip_map(&hp.psi1().zip_map(hp.psi0(), |a, b| a - b), |a, b| a * b);
        let r = half_moments(&integrand, q.orders());
        let mut rhs = nalgebra::DVector::<f64>::zeros(dim);
        let mut i = 0;
        for (kk, z) in r.iter().enumerate() {
            rhs[i] = z.re;
            i += 1;
            if kk > 0 {
                rhs[i] = z.im;
                i += 1;
            }
        }
        let x = jac.lu().solve(&rhs).unwrap();
        nalgebra::DVector::from_fn(n, |i, _| {
            if i == 0 {
                C64::new(x[0], 0.0)
            } else {
                C64::new(x[col(i, false)], x[col(i, true)])
            }
        })
    }

    fn rhs_at(q: &HalfVector, t: f64, hp: &HomotopyProblem) -> (HTable, nalgebra::DVector<C64>) {
        let p = hp.problem_at(t).unwrap();
        let w2 = p.denominator(q).unwrap().map(|x| 1.0 / (x * x));
        let integrand = w2
            .zip_map(p.psi(), |w, s| w / (s * s))
            .zip_map(&hp.psi1().zip_map(hp.psi0(), |a, b| a - b), |a, b| a * b);
        (HTable::from_weight(&w2, q.orders()), half_moments(&integrand, q.orders()))
    }

    #[test]
    fn quasi_field_solves_the_half_index_system() {
        use crate::dual::HessianBlocks;
        let hp = problem(smooth([12, 12], -0.5, 0.6));
        let q = newton_solve(&hp.problem_at(0.4).unwrap(), &HalfVector::zeros([2, 2]), &tight()).unwrap().q;
        let v = vector_field(&q, 0.4, &hp, HessianKind::Quasi).unwrap();
        let (h, r) = rhs_at(&q, 0.4, &hp);
        // q_00 = z + conj(z): the solved coordinate is half the q_00 change
        let mut z = v.values().clone();
        z[0] /= 2.0;
        let hb = HessianBlocks::assemble(&h).with_corner_scaled(2.0);
        let resid = hb.to_dense() * &z - &r;
        assert!(resid.norm() <= 1e-10 * r.norm());
    }

    #[test]
    fn path_tangent_matches_two_solve_differences() {
        let hp = problem(smooth([12, 12], -0.5, 0.6));
        let t = 0.4;
        let eps = 1e-4;
        let solve = |t: f64| {
            let r = newton_solve(&hp.problem_at(t).unwrap(), &HalfVector::zeros([2, 2]), &tight()).unwrap();
            assert!(r.converged);
            r.q
        };
        let (qa, qb) = (solve(t - eps), solve(t + eps));
        let q = solve(t);
        let fd = (qb.values() - qa.values()) / C64::new(2.0 * eps, 0.0);
        let exact = exact_tangent(&q, t, &hp);
        let rel = (&exact - &fd).norm() / fd.norm();
        assert!(rel < 1e-3, "relative tangent error {rel}");

        let v = vector_field(&q, t, &hp, HessianKind::Full).unwrap();
        assert!((v.values() - &exact).norm() <= 1e-8 * exact.norm());
        let rel = (v.values() - &fd).norm() / fd.norm();
        assert!(rel < 1e-3, "relative field error {rel}");

        // the half-index field only approximates the tangent but still
        // points along the path
        let v = vector_field(&q, t, &hp, HessianKind::Quasi).unwrap();
        let cos = v.values().dotc(&fd).re / (v.norm() * fd.norm());
        assert!(cos > 0.5, "cosine {cos}");
    }

    #[test]
    fn same_prior_walks_a_fixed_path() {
        let g = GridSpec::new(10, 10, 2, 2).unwrap();
        let psi = smooth(g.dims(), 0.3, 0.2);
        let sigma = fourier_coeffs(&psi, &g).unwrap();
        let hp = HomotopyProblem::new(sigma, psi.clone(), psi, g).unwrap();
        let r = continue_solve(&hp, &ContinuationOptions::default()).unwrap();
        assert_eq!(r.t_path, vec![0.0, 0.5, 1.0]);
        assert!(r.converged);
        assert!(r.inner_reports.iter().all(|x| x.iterations == 0));
        assert_eq!(r.q, HalfVector::zeros([2, 2]));
    }

    #[test]
    fn agrees_with_direct_newton() {
        let hp = problem(smooth([12, 12], -0.5, 0.6));
        let opts = ContinuationOptions {
            newton: NewtonOptions {
                grad_tol: 1e-8,
                ..tight()
            },
            ..ContinuationOptions::default()
        };
        let r = continue_solve(&hp, &opts).unwrap();
        assert!(r.converged);
        assert_eq!(*r.t_path.last().unwrap(), 1.0);
        assert!(r.t_path.windows(2).all(|w| w[0] < w[1]));
        let direct = newton_solve(&hp.problem_at(1.0).unwrap(), &HalfVector::zeros([2, 2]), &opts.newton).unwrap();
        assert!(direct.converged);
        assert!((r.q.values() - direct.q.values()).camax() <= 1e-6);

        let quarter = continue_solve(&hp, &ContinuationOptions { dt: 0.25, ..opts }).unwrap();
        assert!((quarter.q.values() - r.q.values()).camax() <= 10.0 * 1e-8);

        let csv = trace_to_csv(&r.trace);
        assert!(csv.starts_with("outer_step,t,inner_iter,grad_norm\n0,"));
        assert_eq!(csv.lines().count(), r.trace.len() + 1);
    }

    #[test]
    fn rejects_bad_options() {
        let hp = problem(smooth([12, 12], 0.1, 0.1));
        let bad = ContinuationOptions {
            dt: 0.01,
            ..ContinuationOptions::default()
        };
        assert!(continue_solve(&hp, &bad).is_err());
    }
}
