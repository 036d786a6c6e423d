//! Discrete 2-torus geometry, coefficient arrays and the FFT-backed transforms
//! between Laurent coefficients and grid samples.
//!
//! Layout conventions shared by the whole crate:
//!
//! * grid functions are `N2 x N1` matrices, entry `(l2, l1)` holding the value
//!   at `theta = (2 pi l1 / N1, 2 pi l2 / N2)`;
//! * coefficient arrays are `(2 n2 + 1) x (2 n1 + 1)` matrices, entry
//!   `(k2 + n2, k1 + n1)` holding `c_{k1,k2}`;
//! * half vectors list the indices `(0,0), (0,1), .., (0,n2), (1,-n2), .., (n1,n2)`.

use std::cell::RefCell;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// The discretized torus together with the moment orders `n = (n1, n2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    dims: [usize; 2],
    orders: [usize; 2],
}

impl GridSpec {
    /// Validates `N_j >= 2 n_j + 1`, which makes every coefficient indexed in
    /// the moment set recoverable from the grid samples.
    pub fn new(n1_grid: usize, n2_grid: usize, n1: usize, n2: usize) -> Result<Self> {
        let dims = [n1_grid, n2_grid];
        let orders = [n1, n2];
        for j in 0..2 {
            if dims[j] == 0 {
                return Err(Error::InvalidGrid(format!("N{} must be positive", j + 1)));
            }
            if dims[j] < 2 * orders[j] + 1 {
                return Err(Error::InvalidGrid(format!(
                    "N{} = {} is smaller than 2 n{} + 1 = {}",
                    j + 1,
                    dims[j],
                    j + 1,
                    2 * orders[j] + 1
                )));
            }
        }
        Ok(Self { dims, orders })
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn orders(&self) -> [usize; 2] {
        self.orders
    }

    /// `|N| = N1 N2`.
    pub fn num_points(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    /// `|Lambda| = (2 n1 + 1)(2 n2 + 1)`.
    pub fn lambda_len(&self) -> usize {
        (2 * self.orders[0] + 1) * (2 * self.orders[1] + 1)
    }

    pub fn half_len(&self) -> usize {
        half_len(self.orders)
    }

    pub fn half_indices(&self) -> Vec<[i64; 2]> {
        half_indices(self.orders)
    }

    /// Angular frequency `(theta1, theta2)` of grid point `(l1, l2)`.
    pub fn frequency(&self, l1: usize, l2: usize) -> [f64; 2] {
        [
            2.0 * PI * l1 as f64 / self.dims[0] as f64,
            2.0 * PI * l2 as f64 / self.dims[1] as f64,
        ]
    }

    /// Same torus, different moment orders.
    pub fn with_orders(&self, n1: usize, n2: usize) -> Result<Self> {
        Self::new(self.dims[0], self.dims[1], n1, n2)
    }

    /// Grid refined by an integer factor in both directions.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidArgument("refinement factor must be positive".into()));
        }
        Self::new(
            factor * self.dims[0],
            factor * self.dims[1],
            self.orders[0],
            self.orders[1],
        )
    }
}

/// `|Lambda_half| = n2 + 1 + n1 (2 n2 + 1)`.
pub fn half_len(orders: [usize; 2]) -> usize {
    orders[1] + 1 + orders[0] * (2 * orders[1] + 1)
}

/// One representative of each conjugate pair in `Lambda`, lexicographic.
pub fn half_indices(orders: [usize; 2]) -> Vec<[i64; 2]> {
    let (n1, n2) = (orders[0] as i64, orders[1] as i64);
    let mut out = Vec::with_capacity(half_len(orders));
    for k2 in 0..=n2 {
        out.push([0, k2]);
    }
    for k1 in 1..=n1 {
        for k2 in -n2..=n2 {
            out.push([k1, k2]);
        }
    }
    out
}

/// Position of `(k1, k2)` in the half ordering, if it belongs to `Lambda_half`.
pub fn half_position(orders: [usize; 2], k1: i64, k2: i64) -> Option<usize> {
    let (n1, n2) = (orders[0] as i64, orders[1] as i64);
    if k1 == 0 && (0..=n2).contains(&k2) {
        Some(k2 as usize)
    } else if (1..=n1).contains(&k1) && (-n2..=n2).contains(&k2) {
        Some((n2 + 1 + (k1 - 1) * (2 * n2 + 1) + k2 + n2) as usize)
    } else {
        None
    }
}

/// Laurent coefficients indexed in `Lambda` with conjugate symmetry
/// `c_{-k} = conj(c_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffArray {
    orders: [usize; 2],
    values: DMatrix<C64>,
    symmetry_correction: f64,
}

impl CoeffArray {
    pub fn zeros(orders: [usize; 2]) -> Self {
        Self {
            orders,
            values: DMatrix::zeros(2 * orders[1] + 1, 2 * orders[0] + 1),
            symmetry_correction: 0.0,
        }
    }

    /// Builds from a `(2 n2 + 1) x (2 n1 + 1)` matrix. The input is
    /// symmetrized (average of `c_k` and `conj(c_{-k})`); the largest change
    /// is kept in [`CoeffArray::symmetry_correction`].
    pub fn from_matrix(values: DMatrix<C64>) -> Result<Self> {
        let (rows, cols) = values.shape();
        if rows % 2 == 0 || cols % 2 == 0 {
            return Err(Error::ShapeMismatch(format!(
                "coefficient matrix must have odd dimensions, got {rows}x{cols}"
            )));
        }
        let orders = [(cols - 1) / 2, (rows - 1) / 2];
        let sym = symmetrized(&values);
        let symmetry_correction = values
            .iter()
            .zip(sym.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        Ok(Self {
            orders,
            values: sym,
            symmetry_correction,
        })
    }

    pub fn from_fn(orders: [usize; 2], mut f: impl FnMut(i64, i64) -> C64) -> Self {
        let (n1, n2) = (orders[0] as i64, orders[1] as i64);
        let m = DMatrix::from_fn(2 * orders[1] + 1, 2 * orders[0] + 1, |r, c| {
            f(c as i64 - n1, r as i64 - n2)
        });
        Self::from_matrix(m).expect("odd by construction")
    }

    pub fn orders(&self) -> [usize; 2] {
        self.orders
    }

    pub fn values(&self) -> &DMatrix<C64> {
        &self.values
    }

    pub fn symmetry_correction(&self) -> f64 {
        self.symmetry_correction
    }

    /// `c_{k1,k2}`, zero outside `Lambda`.
    pub fn get(&self, k1: i64, k2: i64) -> C64 {
        let (n1, n2) = (self.orders[0] as i64, self.orders[1] as i64);
        if k1.abs() > n1 || k2.abs() > n2 {
            return C64::new(0.0, 0.0);
        }
        self.values[((k2 + n2) as usize, (k1 + n1) as usize)]
    }

    /// Restriction to a smaller index set.
    pub fn truncated(&self, orders: [usize; 2]) -> Result<Self> {
        if orders[0] > self.orders[0] || orders[1] > self.orders[1] {
            return Err(Error::ShapeMismatch(format!(
                "cannot truncate orders {:?} to {:?}",
                self.orders, orders
            )));
        }
        Ok(Self::from_fn(orders, |k1, k2| self.get(k1, k2)))
    }

    /// `<Q, S> = sum_k q_k conj(s_k)`; real for conjugate-symmetric arrays.
    pub fn inner(&self, other: &CoeffArray) -> Result<f64> {
        if self.orders != other.orders {
            return Err(Error::ShapeMismatch(format!(
                "inner product of orders {:?} and {:?}",
                self.orders, other.orders
            )));
        }
        let s: C64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s.re)
    }

    pub fn max_abs_diff(&self, other: &CoeffArray) -> f64 {
        assert_eq!(self.orders, other.orders);
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation from conjugate symmetry.
    pub fn asymmetry(&self) -> f64 {
        asymmetry(&self.values)
    }
}

fn symmetrized(v: &DMatrix<C64>) -> DMatrix<C64> {
    let (rows, cols) = v.shape();
    DMatrix::from_fn(rows, cols, |r, c| {
        (v[(r, c)] + v[(rows - 1 - r, cols - 1 - c)].conj()) * 0.5
    })
}

/// Max over entries of `|c_k - conj(c_{-k})|` for a centered coefficient matrix.
pub fn asymmetry(v: &DMatrix<C64>) -> f64 {
    let (rows, cols) = v.shape();
    let mut worst = 0.0f64;
    for r in 0..rows {
        for c in 0..cols {
            worst = worst.max((v[(r, c)] - v[(rows - 1 - r, cols - 1 - c)].conj()).norm());
        }
    }
    worst
}

/// Complex coordinates indexed in `Lambda_half`.
///
/// Serializes as `{"orders": [n1, n2], "re": [...], "im": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HalfVectorRepr", into = "HalfVectorRepr")]
pub struct HalfVector {
    orders: [usize; 2],
    values: DVector<C64>,
}

impl HalfVector {
    pub fn zeros(orders: [usize; 2]) -> Self {
        Self {
            orders,
            values: DVector::zeros(half_len(orders)),
        }
    }

    pub fn from_vec(orders: [usize; 2], values: DVector<C64>) -> Result<Self> {
        if values.len() != half_len(orders) {
            return Err(Error::ShapeMismatch(format!(
                "half vector for orders {:?} needs {} entries, got {}",
                orders,
                half_len(orders),
                values.len()
            )));
        }
        Ok(Self { orders, values })
    }

    /// Reads the `Lambda_half` entries of a full coefficient array.
    pub fn from_coeffs(c: &CoeffArray) -> Self {
        let orders = c.orders();
        let values = DVector::from_iterator(
            half_len(orders),
            half_indices(orders).into_iter().map(|[k1, k2]| c.get(k1, k2)),
        );
        Self { orders, values }
    }

    /// Expands to the full conjugate-symmetric array (the `(0,0)` entry keeps
    /// only its real part).
    pub fn to_coeffs(&self) -> CoeffArray {
        let orders = self.orders;
        let (n1, n2) = (orders[0] as i64, orders[1] as i64);
        let mut m = DMatrix::zeros(2 * orders[1] + 1, 2 * orders[0] + 1);
        for (i, [k1, k2]) in half_indices(orders).into_iter().enumerate() {
            let v = self.values[i];
            m[((k2 + n2) as usize, (k1 + n1) as usize)] = v;
            m[((n2 - k2) as usize, (n1 - k1) as usize)] = v.conj();
        }
        m[(orders[1], orders[0])] = C64::new(self.values[0].re, 0.0);
        CoeffArray {
            orders,
            values: m,
            symmetry_correction: 0.0,
        }
    }

    pub fn orders(&self) -> [usize; 2] {
        self.orders
    }

    pub fn values(&self) -> &DVector<C64> {
        &self.values
    }

    pub fn into_values(self) -> DVector<C64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, k1: i64, k2: i64) -> Option<C64> {
        half_position(self.orders, k1, k2).map(|i| self.values[i])
    }

    /// Euclidean norm over the half coordinates.
    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `self + s * dir`
    pub fn add_scaled(&self, s: f64, dir: &HalfVector) -> HalfVector {
        assert_eq!(self.orders, dir.orders);
        HalfVector {
            orders: self.orders,
            values: &self.values + dir.values.scale(s),
        }
    }

    /// Realified directional derivative of a real function whose Wirtinger
    /// gradient is `self`, along `dir`: the `(0,0)` coordinate is real and
    /// counted once, every other coordinate stands for a conjugate pair.
    pub fn real_pairing(&self, dir: &HalfVector) -> f64 {
        assert_eq!(self.orders, dir.orders);
        let mut s = self.values[0].re * dir.values[0].re;
        for i in 1..self.values.len() {
            s += 2.0 * (self.values[i].conj() * dir.values[i]).re;
        }
        s
    }
}

#[derive(Serialize, Deserialize)]
struct HalfVectorRepr {
    orders: [usize; 2],
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<HalfVector> for HalfVectorRepr {
    fn from(v: HalfVector) -> Self {
        Self {
            orders: v.orders,
            re: v.values.iter().map(|z| z.re).collect(),
            im: v.values.iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<HalfVectorRepr> for HalfVector {
    type Error = Error;

    fn try_from(r: HalfVectorRepr) -> Result<Self> {
        if r.re.len() != r.im.len() {
            return Err(Error::ShapeMismatch("re and im lengths differ".into()));
        }
        let vals = r.re.iter().zip(&r.im).map(|(&a, &b)| C64::new(a, b));
        HalfVector::from_vec(r.orders, DVector::from_iterator(r.re.len(), vals))
    }
}

/// Real values of a function on the `N2 x N1` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: DMatrix<f64>,
}

impl Spectrum {
    pub fn new(values: DMatrix<f64>) -> Self {
        Self { values }
    }

    pub fn constant(dims: [usize; 2], c: f64) -> Self {
        Self {
            values: DMatrix::from_element(dims[1], dims[0], c),
        }
    }

    /// `f(l1, l2)` on every grid point.
    pub fn from_fn(dims: [usize; 2], mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self {
            values: DMatrix::from_fn(dims[1], dims[0], |r, c| f(c, r)),
        }
    }

    /// `(N1, N2)`
    pub fn dims(&self) -> [usize; 2] {
        [self.values.ncols(), self.values.nrows()]
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn get(&self, l1: usize, l2: usize) -> f64 {
        self.values[(l2, l1)]
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }

    /// Grid index `(l1, l2)` of the smallest value.
    pub fn argmin(&self) -> (usize, usize) {
        let (mut best, mut at) = (f64::INFINITY, (0, 0));
        for l1 in 0..self.values.ncols() {
            for l2 in 0..self.values.nrows() {
                let v = self.values[(l2, l1)];
                if v < best || v.is_nan() {
                    best = v;
                    at = (l1, l2);
                }
            }
        }
        at
    }

    pub fn check_positive(&self) -> Result<()> {
        let (l1, l2) = self.argmin();
        let min = self.get(l1, l2);
        if min > 0.0 && min.is_finite() {
            Ok(())
        } else {
            Err(Error::NotPositive { min, l1, l2 })
        }
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Spectrum {
        Spectrum {
            values: self.values.map(f),
        }
    }

    pub fn zip_map(&self, other: &Spectrum, f: impl FnMut(f64, f64) -> f64) -> Spectrum {
        Spectrum {
            values: self.values.zip_map(&other.values, f),
        }
    }

    /// Integral against the discrete measure (plain grid average).
    pub fn mean(&self) -> f64 {
        self.values.mean()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.norm()
    }

    pub fn check_dims(&self, dims: [usize; 2]) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::ShapeMismatch(format!(
                "grid function is {:?}, grid is {:?}",
                self.dims(),
                dims
            )));
        }
        Ok(())
    }
}

/// In-place 2-D DFT of an `N2 x N1` array: forward is
/// `X[l] = sum_k x[k] e^{-i 2 pi <k, l / N>}`, inverse flips the sign, both unnormalized.
pub(crate) fn fft2(data: &mut DMatrix<C64>, inverse: bool) {
    let (rows, cols) = data.shape();
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let (row_fft, col_fft) = if inverse {
            (planner.plan_fft_inverse(cols), planner.plan_fft_inverse(rows))
        } else {
            (planner.plan_fft_forward(cols), planner.plan_fft_forward(rows))
        };
        // columns are contiguous in nalgebra storage
        for mut col in data.column_iter_mut() {
            col_fft.process(col.as_mut_slice());
        }
        let mut buf = vec![C64::new(0.0, 0.0); cols];
        for r in 0..rows {
            for c in 0..cols {
                buf[c] = data[(r, c)];
            }
            row_fft.process(&mut buf);
            for c in 0..cols {
                data[(r, c)] = buf[c];
            }
        }
    });
}

/// Embeds a centered coefficient matrix at wrapped positions of an `N2 x N1`
/// array.
fn embed_centered(values: &DMatrix<C64>, dims: [usize; 2]) -> Result<DMatrix<C64>> {
    let (rows, cols) = values.shape();
    if rows > dims[1] || cols > dims[0] || rows % 2 == 0 || cols % 2 == 0 {
        return Err(Error::ShapeMismatch(format!(
            "{rows}x{cols} coefficients do not fit a {}x{} grid without aliasing",
            dims[1], dims[0]
        )));
    }
    let (n1, n2) = ((cols - 1) / 2, (rows - 1) / 2);
    let mut out = DMatrix::zeros(dims[1], dims[0]);
    for c in 0..cols {
        let l1 = (c + dims[0] - n1) % dims[0];
        for r in 0..rows {
            let l2 = (r + dims[1] - n2) % dims[1];
            out[(l2, l1)] = values[(r, c)];
        }
    }
    Ok(out)
}

/// Evaluates `sum_k c_k e^{-i <k, theta_l>}` on every grid point for an
/// arbitrary (not necessarily symmetric) centered coefficient matrix.
pub fn evaluate_centered(values: &DMatrix<C64>, dims: [usize; 2]) -> Result<DMatrix<C64>> {
    let mut data = embed_centered(values, dims)?;
    fft2(&mut data, false);
    Ok(data)
}

/// Evaluates a causal polynomial `sum_{k >= 0} c_k e^{-i <k, theta_l>}` whose
/// coefficient matrix is indexed `(k1, k2)` (rows = k1).
pub fn evaluate_causal(coeffs: &DMatrix<C64>, dims: [usize; 2]) -> Result<DMatrix<C64>> {
    let (r1, r2) = coeffs.shape();
    if r1 > dims[0] || r2 > dims[1] {
        return Err(Error::ShapeMismatch(format!(
            "{r1}x{r2} causal coefficients exceed grid {dims:?}"
        )));
    }
    let mut data = DMatrix::zeros(dims[1], dims[0]);
    for k1 in 0..r1 {
        for k2 in 0..r2 {
            data[(k2, k1)] = coeffs[(k1, k2)];
        }
    }
    fft2(&mut data, false);
    Ok(data)
}

/// Trigonometric polynomial on the grid. The result is real for symmetric
/// coefficients; the imaginary rounding residue is dropped.
pub fn evaluate_coeffs(c: &CoeffArray, g: &GridSpec) -> Result<Spectrum> {
    let data = evaluate_centered(c.values(), g.dims())?;
    Ok(Spectrum::new(data.map(|z| z.re)))
}

/// Normalized Riemann sums `(1/|N|) sum_l e^{i <k, theta_l>} f(zeta_l)` for every
/// `k` modulo the grid, stored at wrapped positions.
pub(crate) fn grid_moments(f: &Spectrum) -> DMatrix<C64> {
    let mut data = f.values().map(|v| C64::new(v, 0.0));
    let scale = 1.0 / data.len() as f64;
    fft2(&mut data, true);
    data.scale_mut(scale);
    data
}

/// Reads moment `k` out of [`grid_moments`] output.
pub(crate) fn moment_at(moments: &DMatrix<C64>, k1: i64, k2: i64) -> C64 {
    let (rows, cols) = moments.shape();
    let l1 = k1.rem_euclid(cols as i64) as usize;
    let l2 = k2.rem_euclid(rows as i64) as usize;
    moments[(l2, l1)]
}

/// The operator sending a grid function to its Fourier coefficients indexed
/// in the grid's `Lambda`.
pub fn fourier_coeffs(f: &Spectrum, g: &GridSpec) -> Result<CoeffArray> {
    f.check_dims(g.dims())?;
    let moments = grid_moments(f);
    Ok(CoeffArray::from_fn(g.orders(), |k1, k2| {
        moment_at(&moments, k1, k2)
    }))
}

/// Moments at the `Lambda_half` indices only (the `(0,0)` entry made real).
pub fn half_moments(f: &Spectrum, orders: [usize; 2]) -> DVector<C64> {
    let moments = grid_moments(f);
    let mut out = DVector::from_iterator(
        half_len(orders),
        half_indices(orders)
            .into_iter()
            .map(|[k1, k2]| moment_at(&moments, k1, k2)),
    );
    out[0].im = 0.0;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_coeffs(rng: &mut ChaCha8Rng, orders: [usize; 2]) -> CoeffArray {
        CoeffArray::from_fn(orders, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    // direct double sum, independent of the FFT path
    fn brute_evaluate(cf: &CoeffArray, g: &GridSpec) -> DMatrix<C64> {
        let [n1, n2] = cf.orders();
        let [nn1, nn2] = g.dims();
        DMatrix::from_fn(nn2, nn1, |l2, l1| {
            let th = g.frequency(l1, l2);
            let mut s = c(0.0, 0.0);
            for k1 in -(n1 as i64)..=n1 as i64 {
                for k2 in -(n2 as i64)..=n2 as i64 {
                    let ph = -(k1 as f64 * th[0] + k2 as f64 * th[1]);
                    s += cf.get(k1, k2) * C64::from_polar(1.0, ph);
                }
            }
            s
        })
    }

    fn brute_moment(f: &Spectrum, k1: i64, k2: i64) -> C64 {
        let [nn1, nn2] = f.dims();
        let mut s = c(0.0, 0.0);
        for l1 in 0..nn1 {
            for l2 in 0..nn2 {
                let ph = 2.0 * PI * (k1 as f64 * l1 as f64 / nn1 as f64 + k2 as f64 * l2 as f64 / nn2 as f64);
                s += C64::from_polar(f.get(l1, l2), ph);
            }
        }
        s / (nn1 * nn2) as f64
    }

    #[test]
    fn grid_sizes() {
        let g = GridSpec::new(30, 30, 3, 3).unwrap();
        assert_eq!(g.lambda_len(), 49);
        assert_eq!(g.half_len(), 25);
        let g = GridSpec::new(3, 3, 1, 1).unwrap();
        assert_eq!(g.lambda_len(), 9);
        assert_eq!(g.half_len(), 5);
        assert!(GridSpec::new(2, 5, 1, 1).is_err());
        assert!(GridSpec::new(0, 5, 0, 1).is_err());
    }

    #[test]
    fn half_ordering() {
        let idx = half_indices([1, 1]);
        assert_eq!(idx, vec![[0, 0], [0, 1], [1, -1], [1, 0], [1, 1]]);
        for (i, [k1, k2]) in half_indices([3, 2]).into_iter().enumerate() {
            assert_eq!(half_position([3, 2], k1, k2), Some(i));
        }
        assert_eq!(half_position([3, 2], 0, -1), None);
        assert_eq!(half_position([3, 2], -1, 0), None);
    }

    #[test]
    fn evaluate_identity_and_cosine() {
        let g = GridSpec::new(8, 8, 1, 1).unwrap();
        let e0 = CoeffArray::from_fn([1, 1], |k1, k2| {
            if k1 == 0 && k2 == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) }
        });
        let f = evaluate_coeffs(&e0, &g).unwrap();
        assert!(f.values().iter().all(|v| (v - 1.0).abs() < 1e-15));

        let cos = CoeffArray::from_fn([1, 1], |k1, k2| {
            if k1.abs() == 1 && k2 == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) }
        });
        let f = evaluate_coeffs(&cos, &g).unwrap();
        assert!((f.get(0, 0) - 2.0).abs() < 1e-14);
        assert!(f.get(2, 0).abs() < 1e-14);
    }

    #[test]
    fn evaluate_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = GridSpec::new(8, 8, 2, 2).unwrap();
        let cf = random_coeffs(&mut rng, [2, 2]);
        let fast = evaluate_centered(cf.values(), g.dims()).unwrap();
        let slow = brute_evaluate(&cf, &g);
        let err = (&fast - &slow).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "err {err}");
        // symmetric input evaluates to a real function
        assert!(fast.iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn asymmetric_evaluation_is_complex() {
        let mut m = DMatrix::zeros(3, 3);
        m[(1, 2)] = c(1.0, 0.0); // c_{1,0} only
        let g = GridSpec::new(8, 8, 1, 1).unwrap();
        let f = evaluate_centered(&m, g.dims()).unwrap();
        // e^{-i theta1} at l1 = 2 is -i
        assert!((f[(0, 2)] - c(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn fourier_of_constant_and_cosine() {
        let g = GridSpec::new(8, 8, 1, 1).unwrap();
        let f = Spectrum::constant(g.dims(), 3.5);
        let cf = fourier_coeffs(&f, &g).unwrap();
        for k1 in -1i64..=1 {
            for k2 in -1..=1 {
                let want = if k1 == 0 && k2 == 0 { 3.5 } else { 0.0 };
                assert!((cf.get(k1, k2) - c(want, 0.0)).norm() < 1e-14);
            }
        }
        let f = Spectrum::from_fn(g.dims(), |l1, l2| 2.0 * g.frequency(l1, l2)[0].cos());
        let cf = fourier_coeffs(&f, &g).unwrap();
        for k1 in -1i64..=1 {
            for k2 in -1..=1 {
                let want = if k1.abs() == 1 && k2 == 0 { 1.0 } else { 0.0 };
                assert!((cf.get(k1, k2) - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn fourier_matches_riemann_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = GridSpec::new(6, 6, 2, 2).unwrap();
        let f = Spectrum::from_fn(g.dims(), |_, _| rng.random_range(0.1..2.0));
        let cf = fourier_coeffs(&f, &g).unwrap();
        for k1 in -2..=2 {
            for k2 in -2..=2 {
                let err = (cf.get(k1, k2) - brute_moment(&f, k1, k2)).norm();
                assert!(err < 1e-12, "k=({k1},{k2}) err {err}");
            }
        }
        assert!(cf.symmetry_correction() < 1e-12);
    }

    #[test]
    fn rectangular_grid_orientation() {
        // N1 != N2 exercises the row/column convention
        let g = GridSpec::new(7, 5, 2, 1).unwrap();
        let f = Spectrum::from_fn(g.dims(), |l1, l2| {
            let th = g.frequency(l1, l2);
            1.0 + (2.0 * th[0] - th[1]).cos()
        });
        let cf = fourier_coeffs(&f, &g).unwrap();
        assert!((cf.get(2, -1) - c(0.5, 0.0)).norm() < 1e-14);
        assert!((cf.get(-2, 1) - c(0.5, 0.0)).norm() < 1e-14);
        assert!((cf.get(0, 0) - c(1.0, 0.0)).norm() < 1e-14);
        let back = evaluate_coeffs(&cf, &g).unwrap();
        assert!((back.values() - f.values()).amax() < 1e-13);
    }

    #[test]
    fn symmetrizing_constructor_records_correction() {
        let mut m = DMatrix::zeros(3, 3);
        m[(1, 2)] = c(1.0, 0.0);
        let cf = CoeffArray::from_matrix(m).unwrap();
        assert!((cf.get(1, 0) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((cf.get(-1, 0) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((cf.symmetry_correction() - 0.5).abs() < 1e-15);
        assert!(CoeffArray::from_matrix(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn half_vector_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cf = random_coeffs(&mut rng, [2, 3]);
        let h = HalfVector::from_coeffs(&cf);
        assert_eq!(h.len(), half_len([2, 3]));
        let back = h.to_coeffs();
        assert!(back.max_abs_diff(&cf) < 1e-15);
    }

    #[test]
    fn shape_errors() {
        let g = GridSpec::new(4, 4, 1, 1).unwrap();
        let big = CoeffArray::zeros([2, 2]);
        assert!(evaluate_coeffs(&big, &g).is_err());
        let f = Spectrum::constant([5, 4], 1.0);
        assert!(fourier_coeffs(&f, &g).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn round_trip(seed in any::<u64>(), nn1 in 5usize..20, nn2 in 5usize..20) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let orders = [(nn1 - 1) / 2, (nn2 - 1) / 2];
                let orders = [rng.random_range(0..=orders[0]), rng.random_range(0..=orders[1])];
                let g = GridSpec::new(nn1, nn2, orders[0], orders[1]).unwrap();
                let cf = random_coeffs(&mut rng, orders);
                let back = fourier_coeffs(&evaluate_coeffs(&cf, &g).unwrap(), &g).unwrap();
                prop_assert!(back.max_abs_diff(&cf) < 1e-10);
            }

            #[test]
            fn hermitian_closure_and_dc(seed in any::<u64>(), nn1 in 3usize..16, nn2 in 3usize..16) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let g = GridSpec::new(nn1, nn2, (nn1 - 1) / 2, (nn2 - 1) / 2).unwrap();
                let f = Spectrum::from_fn(g.dims(), |_, _| rng.random_range(-3.0..3.0));
                let moments = grid_moments(&f);
                let [n1, n2] = g.orders();
                for k1 in -(n1 as i64)..=n1 as i64 {
                    for k2 in -(n2 as i64)..=n2 as i64 {
                        let d = moment_at(&moments, k1, k2) - moment_at(&moments, -k1, -k2).conj();
                        prop_assert!(d.norm() < 1e-12);
                    }
                }
                let cf = fourier_coeffs(&f, &g).unwrap();
                prop_assert!((cf.get(0, 0).re - f.mean()).abs() < 1e-12);
            }

            #[test]
            fn linearity(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let g = GridSpec::new(9, 7, 3, 2).unwrap();
                let x = random_coeffs(&mut rng, [3, 2]);
                let y = random_coeffs(&mut rng, [3, 2]);
                let xy = CoeffArray::from_matrix(x.values() * c(a, 0.0) + y.values() * c(b, 0.0)).unwrap();
                let fx = evaluate_coeffs(&x, &g).unwrap();
                let fy = evaluate_coeffs(&y, &g).unwrap();
                let fxy = evaluate_coeffs(&xy, &g).unwrap();
                let lin = fx.zip_map(&fy, |u, v| a * u + b * v);
                prop_assert!((fxy.values() - lin.values()).amax() < 1e-12);
                let back = fourier_coeffs(&lin, &g).unwrap();
                prop_assert!(back.max_abs_diff(&xy) < 1e-12);
            }
        }
    }
}
