//! Covariance lags: the biased time-average estimate from field samples, and
//! exact lags of a known spectrum.

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{fourier_coeffs, CoeffArray, GridSpec, Spectrum, C64};

/// Samples of a complex random field, `T2 x T1`, entry `(t2, t1)` = `y(t1, t2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldData {
    samples: DMatrix<C64>,
}

impl FieldData {
    pub fn new(samples: DMatrix<C64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("field data must be non-empty".into()));
        }
        Ok(Self { samples })
    }

    /// Loads the complex text (or `.bin`) grid format.
    pub fn load(path: &Path) -> Result<Self> {
        Self::new(crate::io::load_complex(path)?)
    }

    /// `(T1, T2)`
    pub fn dims(&self) -> [usize; 2] {
        [self.samples.ncols(), self.samples.nrows()]
    }

    pub fn get(&self, t1: usize, t2: usize) -> C64 {
        self.samples[(t2, t1)]
    }

    pub fn samples(&self) -> &DMatrix<C64> {
        &self.samples
    }
}

/// `sigma_k = 1/(T1 T2) sum_t y(t + k) conj(y(t))` over the `t` for which both
/// samples lie in the window. Only lags with `k1 > 0`, or `k1 = 0, k2 >= 0`,
/// are summed; the rest follow from conjugate symmetry, so the result is
/// exactly Hermitian.
pub fn estimate_covariances(y: &FieldData, g: &GridSpec) -> Result<CoeffArray> {
    let [t1, t2] = y.dims();
    let [n1, n2] = g.orders();
    if t1 <= n1 || t2 <= n2 {
        return Err(Error::InvalidArgument(format!(
            "data size ({t1}, {t2}) must exceed the lag orders ({n1}, {n2})"
        )));
    }
    let scale = 1.0 / (t1 * t2) as f64;
    let lag = |k1: usize, k2: i64| -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for s1 in 0..t1 - k1 {
            for s2 in 0..t2 {
                let u2 = s2 as i64 + k2;
                if u2 < 0 || u2 >= t2 as i64 {
                    continue;
                }
                s += y.get(s1 + k1, u2 as usize) * y.get(s1, s2).conj();
            }
        }
        s * scale
    };
    let (n1i, n2i) = (n1 as i64, n2 as i64);
    let mut m = DMatrix::zeros(2 * n2 + 1, 2 * n1 + 1);
    for k1 in 0..=n1i {
        let k2_start = if k1 == 0 { 0 } else { -n2i };
        for k2 in k2_start..=n2i {
            let mut v = lag(k1 as usize, k2);
            if k1 == 0 && k2 == 0 {
                v.im = 0.0;
            }
            m[((k2 + n2i) as usize, (k1 + n1i) as usize)] = v;
            m[((n2i - k2) as usize, (n1i - k1) as usize)] = v.conj();
        }
    }
    CoeffArray::from_matrix(m)
}

/// Exact lags of a strictly positive spectrum sampled on the grid.
pub fn covariances_from_spectrum(phi: &Spectrum, g: &GridSpec) -> Result<CoeffArray> {
    phi.check_dims(g.dims())?;
    phi.check_positive()?;
    fourier_coeffs(phi, g)
}
