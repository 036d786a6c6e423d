//! The convex dual functional, its gradient and its structured Hessian.
//!
//! For a prior `Psi > 0` on the grid and lags `sigma`, the objective is
//! `J(q) = <q, sigma> - mean log(Psi^{-1} + Q)` where `Q` is the symmetric
//! trigonometric polynomial with coefficients `q`. The gradient is taken in
//! the Wirtinger sense with respect to the half coordinates.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{
    evaluate_coeffs, grid_moments, half_indices, moment_at, CoeffArray, GridSpec, HalfVector,
    Spectrum, C64,
};
use crate::linalg::TbtMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    /// `min (Psi^{-1} + Q)` over the grid.
    pub margin: f64,
}

/// Value, gradient and Hessian generators at one point.
#[derive(Debug, Clone)]
pub struct LocalModel {
    pub value: f64,
    /// Magnitude of the terms summed into `value`, for rounding estimates.
    pub value_scale: f64,
    pub gradient: HalfVector,
    pub h: HTable,
}

#[derive(Debug, Clone)]
pub struct DualProblem {
    sigma: CoeffArray,
    psi: Spectrum,
    psi_inv: Spectrum,
    grid: GridSpec,
}

impl DualProblem {
    pub fn new(sigma: CoeffArray, psi: Spectrum, grid: GridSpec) -> Result<Self> {
        if sigma.orders() != grid.orders() {
            return Err(Error::ShapeMismatch(format!(
                "lags of orders {:?} for grid orders {:?}",
                sigma.orders(),
                grid.orders()
            )));
        }
        psi.check_dims(grid.dims())?;
        psi.check_positive()?;
        let s00 = sigma.get(0, 0);
        if !(s00.re > 0.0) || s00.im.abs() > 1e-12 * s00.re {
            return Err(Error::InvalidArgument(format!(
                "zeroth lag must be real and positive, got {s00}"
            )));
        }
        let psi_inv = psi.map(|v| 1.0 / v);
        Ok(Self {
            sigma,
            psi,
            psi_inv,
            grid,
        })
    }

    pub fn sigma(&self) -> &CoeffArray {
        &self.sigma
    }

    pub fn psi(&self) -> &Spectrum {
        &self.psi
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn orders(&self) -> [usize; 2] {
        self.grid.orders()
    }

    fn check_point(&self, q: &HalfVector) -> Result<()> {
        if q.orders() != self.orders() {
            return Err(Error::ShapeMismatch(format!(
                "point of orders {:?} for problem orders {:?}",
                q.orders(),
                self.orders()
            )));
        }
        Ok(())
    }

    /// `Psi^{-1} + Q` on the grid.
    pub fn denominator(&self, q: &HalfVector) -> Result<Spectrum> {
        self.check_point(q)?;
        let qs = evaluate_coeffs(&q.to_coeffs(), &self.grid)?;
        Ok(self.psi_inv.zip_map(&qs, |a, b| a + b))
    }

    pub fn feasible(&self, q: &HalfVector) -> Result<Feasibility> {
        let margin = self.denominator(q)?.min();
        Ok(Feasibility {
            feasible: margin > 0.0,
            margin,
        })
    }

    fn feasible_denominator(&self, q: &HalfVector) -> Result<Spectrum> {
        let d = self.denominator(q)?;
        let margin = d.min();
        if !(margin > 0.0) {
            return Err(Error::Infeasible { margin });
        }
        Ok(d)
    }

    fn value_from(&self, q: &HalfVector, d: &Spectrum) -> Result<f64> {
        let lin = q.to_coeffs().inner(&self.sigma)?;
        Ok(lin - d.map(f64::ln).mean())
    }

    fn gradient_from(&self, d: &Spectrum) -> HalfVector {
        let m = grid_moments(&d.map(|v| 1.0 / v));
        let orders = self.orders();
        let vals = DVector::from_iterator(
            crate::grid::half_len(orders),
            half_indices(orders)
                .into_iter()
                .map(|[k1, k2]| self.sigma.get(k1, k2) - moment_at(&m, k1, k2)),
        );
        let mut g = HalfVector::from_vec(orders, vals).expect("half length");
        let mut v = g.clone().into_values();
        v[0].im = 0.0;
        g = HalfVector::from_vec(orders, v).expect("half length");
        g
    }

    pub fn dual_value(&self, q: &HalfVector) -> Result<f64> {
        let d = self.feasible_denominator(q)?;
        self.value_from(q, &d)
    }

    pub fn dual_gradient(&self, q: &HalfVector) -> Result<HalfVector> {
        let d = self.feasible_denominator(q)?;
        Ok(self.gradient_from(&d))
    }

    /// Generators `h_k = Gamma((Psi^{-1} + Q)^{-2})_k`.
    pub fn hessian_h(&self, q: &HalfVector) -> Result<HTable> {
        let d = self.feasible_denominator(q)?;
        Ok(HTable::from_weight(&d.map(|v| 1.0 / (v * v)), self.orders()))
    }

    /// Value, gradient and Hessian generators from a single grid evaluation.
    pub fn local_model(&self, q: &HalfVector) -> Result<LocalModel> {
        let d = self.feasible_denominator(q)?;
        let coeffs = q.to_coeffs();
        let lin_scale: f64 = coeffs
            .values()
            .iter()
            .zip(self.sigma.values().iter())
            .map(|(a, b)| a.norm() * b.norm())
            .sum();
        Ok(LocalModel {
            value: self.value_from(q, &d)?,
            value_scale: lin_scale + d.map(|v| v.ln().abs()).mean(),
            gradient: self.gradient_from(&d),
            h: HTable::from_weight(&d.map(|v| 1.0 / (v * v)), self.orders()),
        })
    }

    /// The spectral estimate `(Psi^{-1} + Q)^{-1}`.
    pub fn primal_spectrum(&self, q: &HalfVector) -> Result<Spectrum> {
        Ok(self.feasible_denominator(q)?.map(|v| 1.0 / v))
    }
}

/// A random point with `sum |q_k| <= fraction * min Psi^{-1}` over the full
/// index set, hence feasible with margin at least `(1 - fraction) min Psi^{-1}`.
pub fn random_interior_point<R: Rng>(p: &DualProblem, rng: &mut R, fraction: f64) -> HalfVector {
    let orders = p.orders();
    let len = crate::grid::half_len(orders);
    let mut v = DVector::from_fn(len, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    v[0].im = 0.0;
    let l1: f64 = v[0].norm() + 2.0 * v.iter().skip(1).map(|z| z.norm()).sum::<f64>();
    let budget = fraction * p.psi_inv.min();
    if l1 > 0.0 {
        v.scale_mut(budget / l1);
    }
    HalfVector::from_vec(orders, v).expect("half length")
}

/// `h_k` for `k1 in [0, 2 n1]`, `k2 in [-2 n2, 2 n2]`; negative `k1` through
/// `h_{-k} = conj(h_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HTable {
    orders: [usize; 2],
    // (4 n2 + 1) x (2 n1 + 1), entry (k2 + 2 n2, k1)
    values: DMatrix<C64>,
}

impl HTable {
    pub fn from_fn(orders: [usize; 2], mut f: impl FnMut(i64, i64) -> C64) -> Self {
        let n2 = orders[1] as i64;
        let values = DMatrix::from_fn(4 * orders[1] + 1, 2 * orders[0] + 1, |r, c| {
            f(c as i64, r as i64 - 2 * n2)
        });
        Self { orders, values }
    }

    /// Grid moments of a positive weight.
    pub fn from_weight(w: &Spectrum, orders: [usize; 2]) -> Self {
        let m = grid_moments(w);
        Self::from_fn(orders, |k1, k2| moment_at(&m, k1, k2))
    }

    pub fn orders(&self) -> [usize; 2] {
        self.orders
    }

    pub fn get(&self, k1: i64, k2: i64) -> C64 {
        let [n1, n2] = [self.orders[0] as i64, self.orders[1] as i64];
        assert!(k1.abs() <= 2 * n1 && k2.abs() <= 2 * n2, "h index ({k1}, {k2}) out of range");
        if k1 < 0 {
            return self.get(-k1, -k2).conj();
        }
        self.values[((k2 + 2 * n2) as usize, k1 as usize)]
    }
}

/// The Hessian `[A B*; B C]` in the half coordinates: `A` is the
/// `k1 = 0` block, `C` the Toeplitz-block Toeplitz block of `k1 >= 1`.
#[derive(Debug, Clone)]
pub struct HessianBlocks {
    orders: [usize; 2],
    a: DMatrix<C64>,
    b: DMatrix<C64>,
    c: TbtMatrix,
}

impl HessianBlocks {
    pub fn assemble(h: &HTable) -> Self {
        let orders = h.orders();
        let (n1, n2) = (orders[0], orders[1]);
        let na = n2 + 1;
        let m = 2 * n2 + 1;
        let a = DMatrix::from_fn(na, na, |r, c| h.get(0, r as i64 - c as i64));
        let b = DMatrix::from_fn(n1 * m, na, |row, c| {
            let (i, r) = (row / m + 1, row % m);
            h.get(i as i64, r as i64 - n2 as i64 - c as i64)
        });
        let c = TbtMatrix::from_fn(m, n1, |j, d| h.get(j, d));
        debug_assert!((&a - a.adjoint()).norm() <= 1e-10 * a.norm().max(1.0));
        Self { orders, a, b, c }
    }

    pub fn orders(&self) -> [usize; 2] {
        self.orders
    }

    /// Copy with the `(0, 0)` entry scaled by `factor`.
    pub(crate) fn with_corner_scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.a[(0, 0)] *= factor;
        out
    }

    pub fn a(&self) -> &DMatrix<C64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<C64> {
        &self.b
    }

    pub fn c(&self) -> &TbtMatrix {
        &self.c
    }

    /// The full Hessian as a dense matrix.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let na = self.a.nrows();
        let nc = self.c.dim();
        let mut out = DMatrix::zeros(na + nc, na + nc);
        out.view_mut((0, 0), (na, na)).copy_from(&self.a);
        out.view_mut((na, 0), (nc, na)).copy_from(&self.b);
        out.view_mut((0, na), (na, nc)).copy_from(&self.b.adjoint());
        out.view_mut((na, na), (nc, nc)).copy_from(&self.c.to_dense());
        out
    }
}
