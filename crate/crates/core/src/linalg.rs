//! Structured solves for the Newton system.
//!
//! The Hessian is partitioned as `[A B*; B C]` with `C` Toeplitz-block
//! Toeplitz. `C` is solved by a block Levinson recursion over its block
//! levels; the backward predictors are not recursed separately but read off
//! the forward ones through the persymmetry `J C J = conj(C)` of a Hermitian
//! TBT matrix (`J` the full exchange matrix). The small Schur complement of
//! `C` is factored densely.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dual::{random_interior_point, DualProblem, HTable, HessianBlocks};
use crate::error::{Error, Result};
use crate::grid::{half_indices, half_position, CoeffArray, GridSpec, HalfVector, Spectrum, C64};

/// Hermitian Toeplitz-block Toeplitz matrix kept in generator form: entry
/// `((i, r), (j, c))` is `t[i - j][r - c]`, for `levels` block rows of size
/// `block_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct TbtMatrix {
    block_size: usize,
    levels: usize,
    // (2 m - 1) x (2 L - 1), entry (d + m - 1, j + L - 1) = t[j][d]
    generators: DMatrix<C64>,
}

impl TbtMatrix {
    /// `t(j, d)` is queried for `|j| < levels`, `|d| < block_size`.
    pub fn from_fn(block_size: usize, levels: usize, mut t: impl FnMut(i64, i64) -> C64) -> Self {
        let (m, l) = (block_size as i64, levels as i64);
        let rows = (2 * block_size).saturating_sub(1);
        let cols = (2 * levels).saturating_sub(1);
        let generators = DMatrix::from_fn(rows, cols, |r, c| t(c as i64 - (l - 1), r as i64 - (m - 1)));
        Self {
            block_size,
            levels,
            generators,
        }
    }

    pub fn identity(block_size: usize, levels: usize, scale: f64) -> Self {
        Self::from_fn(block_size, levels, |j, d| {
            if j == 0 && d == 0 {
                C64::new(scale, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn dim(&self) -> usize {
        self.block_size * self.levels
    }

    pub fn generator(&self, j: i64, d: i64) -> C64 {
        let (m, l) = (self.block_size as i64, self.levels as i64);
        self.generators[((d + m - 1) as usize, (j + l - 1) as usize)]
    }

    /// Dense Toeplitz block `H_j`.
    pub fn block(&self, j: i64) -> DMatrix<C64> {
        let m = self.block_size;
        DMatrix::from_fn(m, m, |r, c| self.generator(j, r as i64 - c as i64))
    }

    /// Dense materialization, for oracles and the fallback path only.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let (m, l) = (self.block_size, self.levels);
        DMatrix::from_fn(m * l, m * l, |a, b| {
            let (i, r) = (a / m, a % m);
            let (j, c) = (b / m, b % m);
            self.generator(i as i64 - j as i64, r as i64 - c as i64)
        })
    }

    /// `max |t[-j][-d] - conj(t[j][d])|`
    pub fn hermitian_defect(&self) -> f64 {
        let (m, l) = (self.block_size as i64, self.levels as i64);
        let mut worst = 0.0f64;
        for j in -(l - 1)..l {
            for d in -(m - 1)..m {
                worst = worst.max((self.generator(-j, -d) - self.generator(j, d).conj()).norm());
            }
        }
        worst
    }
}

/// `J conj(X) J` for a square block.
fn flip_conj(x: &DMatrix<C64>) -> DMatrix<C64> {
    let (r, c) = x.shape();
    DMatrix::from_fn(r, c, |i, j| x[(r - 1 - i, c - 1 - j)].conj())
}

/// Hermitian positive definite factorization. The complex square root never
/// fails, so a negative pivot shows up as a non-real diagonal entry of `L`.
fn cholesky(m: DMatrix<C64>) -> Option<Cholesky<C64, Dyn>> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    let chol = Cholesky::new(m)?;
    let ok = chol
        .l_dirty()
        .diagonal()
        .iter()
        .all(|d| d.re > 0.0 && d.im.abs() <= 1e-12 * d.re);
    ok.then_some(chol)
}

/// Solves `C X = rhs` for a Hermitian positive definite TBT matrix and any
/// number of right-hand-side columns.
///
/// Cost is `O(L^2 m^3)` for `L` block levels of size `m`, against
/// `O(L^3 m^3)` for a dense factorization.
pub fn solve_tbt(c: &TbtMatrix, rhs: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let (m, levels) = (c.block_size(), c.levels());
    if rhs.nrows() != c.dim() {
        return Err(Error::ShapeMismatch(format!(
            "TBT matrix of dimension {} with right-hand side of {} rows",
            c.dim(),
            rhs.nrows()
        )));
    }
    let ncols = rhs.ncols();
    if levels == 0 || m == 0 {
        return Ok(DMatrix::zeros(0, ncols));
    }
    let scale = c.generators.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if c.hermitian_defect() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidArgument("TBT matrix is not Hermitian".into()));
    }

    // blocks H_1..H_{L-1}; H_{-j} = H_j^*
    let blocks: Vec<DMatrix<C64>> = (0..levels as i64).map(|j| c.block(j)).collect();
    let rhs_block = |p: usize| rhs.rows(p * m, m).into_owned();

    let mut forward: Vec<DMatrix<C64>> = vec![DMatrix::identity(m, m)];
    let mut err_f = blocks[0].clone();
    let chol0 = cholesky(flip_conj(&err_f)).ok_or(Error::Breakdown { level: 0 })?;
    // level-0 solution: H_0 x = b_0 (backward predictor is I, E_b = J conj(H_0) J = H_0)
    let mut x: Vec<DMatrix<C64>> = vec![chol0.solve(&rhs_block(0))];

    for p in 0..levels - 1 {
        let mut delta_f = DMatrix::zeros(m, m);
        for (l, f) in forward.iter().enumerate() {
            delta_f += &blocks[p + 1 - l] * f;
        }
        // backward predictor of the current level, from persymmetry
        let backward: Vec<DMatrix<C64>> = (0..=p).map(|l| flip_conj(&forward[p - l])).collect();
        let err_b = flip_conj(&err_f);
        let chol_b = cholesky(err_b).ok_or(Error::Breakdown { level: p })?;
        let gain = chol_b.solve(&delta_f);

        let mut next = Vec::with_capacity(p + 2);
        for l in 0..=p + 1 {
            let mut f = if l <= p { forward[l].clone() } else { DMatrix::zeros(m, m) };
            if l >= 1 {
                f -= &backward[l - 1] * &gain;
            }
            next.push(f);
        }
        err_f -= delta_f.adjoint() * &gain;
        // keep the error block exactly Hermitian
        err_f = (&err_f + err_f.adjoint()) * C64::new(0.5, 0.0);
        forward = next;

        // extend the solution with the new backward predictor
        let new_backward: Vec<DMatrix<C64>> =
            (0..=p + 1).map(|l| flip_conj(&forward[p + 1 - l])).collect();
        let chol_nb = cholesky(flip_conj(&err_f)).ok_or(Error::Breakdown { level: p + 1 })?;
        let mut eta = DMatrix::zeros(m, ncols);
        for (l, xl) in x.iter().enumerate() {
            eta += &blocks[p + 1 - l] * xl;
        }
        let w = chol_nb.solve(&(rhs_block(p + 1) - eta));
        x.push(DMatrix::zeros(m, ncols));
        for (l, xl) in x.iter_mut().enumerate() {
            *xl += &new_backward[l] * &w;
        }
    }

    let mut out = DMatrix::zeros(c.dim(), ncols);
    for (p, xp) in x.iter().enumerate() {
        out.rows_mut(p * m, m).copy_from(xp);
    }
    Ok(out)
}

/// Dense solve by partial-pivoting LU; rejects numerically singular input.
pub fn dense_solve(mat: &DMatrix<C64>, rhs: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if !mat.is_square() || mat.nrows() != rhs.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} matrix with {} right-hand-side rows",
            mat.nrows(),
            mat.ncols(),
            rhs.nrows()
        )));
    }
    let n = mat.nrows();
    if n == 0 {
        return Ok(rhs.clone());
    }
    let lu = mat.clone().lu();
    let diag: Vec<f64> = (0..n).map(|i| lu.u()[(i, i)].norm()).collect();
    let big = diag.iter().cloned().fold(0.0, f64::max);
    let small = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(big > 0.0) || small <= n as f64 * f64::EPSILON * big {
        return Err(Error::Singular);
    }
    lu.solve(rhs).ok_or(Error::Singular)
}

/// Newton direction `dq` with `H dq = -grad`, by block elimination of the
/// TBT block `C`.
pub fn newton_direction(hb: &HessianBlocks, grad: &HalfVector) -> Result<HalfVector> {
    let orders = hb.orders();
    if grad.orders() != orders {
        return Err(Error::ShapeMismatch(format!(
            "gradient of orders {:?} for Hessian of orders {:?}",
            grad.orders(),
            orders
        )));
    }
    let na = orders[1] + 1;
    let g = grad.values();
    let a_rhs: DVector<C64> = -g.rows(0, na);
    let b_rhs: DVector<C64> = -g.rows(na, g.len() - na);

    if hb.c().dim() == 0 {
        let chol = cholesky(hb.a().clone()).ok_or(Error::IndefiniteSchur)?;
        return HalfVector::from_vec(orders, chol.solve(&a_rhs));
    }

    // C^{-1} [B | b] in one pass
    let mut rhs = DMatrix::zeros(hb.c().dim(), na + 1);
    rhs.columns_mut(0, na).copy_from(hb.b());
    rhs.set_column(na, &b_rhs);
    let sol = solve_tbt(hb.c(), &rhs)?;
    let ci_b = sol.columns(0, na);
    let ci_rhs = sol.column(na);

    let schur = hb.a() - hb.b().adjoint() * ci_b;
    let schur_h = (&schur + schur.adjoint()) * C64::new(0.5, 0.0);
    let chol = cholesky(schur_h).ok_or(Error::IndefiniteSchur)?;
    let x = chol.solve(&(a_rhs - hb.b().adjoint() * ci_rhs));
    let y = ci_rhs - ci_b * &x;

    let mut out = DVector::zeros(g.len());
    out.rows_mut(0, na).copy_from(&x);
    out.rows_mut(na, g.len() - na).copy_from(&y);
    HalfVector::from_vec(orders, out)
}

/// Same system solved on the densely assembled Hessian.
pub fn dense_newton_direction(hb: &HessianBlocks, grad: &HalfVector) -> Result<HalfVector> {
    let rhs = DMatrix::from_column_slice(grad.len(), 1, (-grad.values()).as_slice());
    let sol = dense_solve(&hb.to_dense(), &rhs)?;
    HalfVector::from_vec(hb.orders(), sol.column(0).into_owned())
}

/// Schur complement `A - B* C^{-1} B`, exposed for diagnostics.
pub fn schur_complement(hb: &HessianBlocks) -> Result<DMatrix<C64>> {
    if hb.c().dim() == 0 {
        return Ok(hb.a().clone());
    }
    let ci_b = solve_tbt(hb.c(), hb.b())?;
    Ok(hb.a() - hb.b().adjoint() * ci_b)
}

/// The Hessian over the whole index set `Lambda`: entry `(k, l)` is
/// `h_{k - l}`, block `k1 - l1`, within-block offset `k2 - l2`.
pub fn full_hessian(h: &HTable) -> TbtMatrix {
    let [n1, n2] = h.orders();
    TbtMatrix::from_fn(2 * n2 + 1, 2 * n1 + 1, |j, d| h.get(j, d))
}

/// Solves `T x = r` with `T` the [`full_hessian`] and `r` extended to
/// `Lambda` by `r_{-k} = conj(r_k)`. The solution inherits that symmetry, so
/// only its half-index entries are returned.
pub fn solve_full_hessian(h: &HTable, rhs: &HalfVector, dense: bool) -> Result<HalfVector> {
    let orders = h.orders();
    if rhs.orders() != orders {
        return Err(Error::ShapeMismatch(format!(
            "right-hand side of orders {:?} for Hessian of orders {:?}",
            rhs.orders(),
            orders
        )));
    }
    let t = full_hessian(h);
    let m = t.block_size();
    let [n1, n2] = [orders[0] as i64, orders[1] as i64];
    let at = |k1: i64, k2: i64| -> C64 {
        let flip = k1 < 0 || (k1 == 0 && k2 < 0);
        let (a, b) = if flip { (-k1, -k2) } else { (k1, k2) };
        let v = rhs.values()[half_position(orders, a, b).expect("index inside Lambda")];
        if flip {
            v.conj()
        } else {
            v
        }
    };
    let r = DMatrix::from_fn(t.dim(), 1, |row, _| {
        at((row / m) as i64 - n1, (row % m) as i64 - n2)
    });
    let sol = if dense { dense_solve(&t.to_dense(), &r)? } else { solve_tbt(&t, &r)? };
    let mut out = DVector::from_iterator(
        rhs.len(),
        half_indices(orders)
            .into_iter()
            .map(|[k1, k2]| sol[((k1 + n1) as usize * m + (k2 + n2) as usize, 0)]),
    );
    out[0].im = 0.0;
    HalfVector::from_vec(orders, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Structured,
    Dense,
}

impl std::fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveMethod::Structured => "structured",
            SolveMethod::Dense => "dense",
        })
    }
}

/// One `(n, method, mean seconds)` timing row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRecord {
    pub n: usize,
    pub method: SolveMethod,
    pub mean_seconds: f64,
    pub trials: usize,
}

/// Hessian at a random interior point of a white-prior problem with
/// `n1 = n2 = n`.
pub fn random_hessian(n: usize, rng: &mut ChaCha8Rng) -> Result<HessianBlocks> {
    Ok(HessianBlocks::assemble(&random_hessian_table(n, rng)?))
}

/// Generators `h_k` behind [`random_hessian`].
pub fn random_hessian_table(n: usize, rng: &mut ChaCha8Rng) -> Result<HTable> {
    let size = 4 * n + 2;
    let grid = GridSpec::new(size, size, n, n)?;
    let problem = DualProblem::new(
        CoeffArray::from_fn([n, n], |k1, k2| {
            if k1 == 0 && k2 == 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }),
        Spectrum::constant(grid.dims(), 1.0),
        grid,
    )?;
    let q = random_interior_point(&problem, rng, 0.9);
    problem.hessian_h(&q)
}

/// Times solving `C X = [B | b]` by the TBT recursion and by dense LU at
/// random interior points, averaged over `trials` per size.
pub fn bench_tbt(sizes: &[usize], trials: usize, seed: u64) -> Result<Vec<BenchRecord>> {
    let mut out = Vec::new();
    let trials = trials.max(1);
    for &n in sizes {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9e37_79b9));
        let (mut t_struct, mut t_dense) = (0.0, 0.0);
        for _ in 0..trials {
            let hb = random_hessian(n, &mut rng)?;
            let na = n + 1;
            let mut rhs = DMatrix::zeros(hb.c().dim(), na + 1);
            rhs.columns_mut(0, na).copy_from(hb.b());
            for i in 0..rhs.nrows() {
                rhs[(i, na)] = C64::new(((i * 7919) % 13) as f64 / 13.0 - 0.5, 0.25);
            }

            let start = Instant::now();
            let fast = solve_tbt(hb.c(), &rhs)?;
            t_struct += start.elapsed().as_secs_f64();

            let start = Instant::now();
            let dense = dense_solve(&hb.c().to_dense(), &rhs)?;
            t_dense += start.elapsed().as_secs_f64();

            let scale = dense.norm().max(f64::MIN_POSITIVE);
            if (&fast - &dense).norm() > 1e-6 * scale {
                log::warn!("structured and dense solutions disagree at n = {n}");
            }
        }
        out.push(BenchRecord {
            n,
            method: SolveMethod::Structured,
            mean_seconds: t_struct / trials as f64,
            trials,
        });
        out.push(BenchRecord {
            n,
            method: SolveMethod::Dense,
            mean_seconds: t_dense / trials as f64,
            trials,
        });
    }
    Ok(out)
}

/// `n,method,mean_seconds` rows with a header line.
pub fn bench_to_csv(records: &[BenchRecord]) -> String {
    let mut s = String::from("n,method,mean_seconds\n");
    for r in records {
        s.push_str(&format!("{},{},{}\n", r.n, r.method, crate::io::format_real(r.mean_seconds)));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::HTable;
    use rand::Rng;

    fn random_pd_tbt(rng: &mut ChaCha8Rng, n: usize) -> (TbtMatrix, HessianBlocks) {
        let _ = rng.random::<u32>();
        let hb = random_hessian(n, rng).unwrap();
        (hb.c().clone(), hb)
    }

    fn rand_rhs(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<C64> {
        DMatrix::from_fn(rows, cols, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn rel(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn identity_and_scaled_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = rand_rhs(&mut rng, 15, 2);
        let x = solve_tbt(&TbtMatrix::identity(5, 3, 1.0), &b).unwrap();
        assert!(rel(&x, &b) < 1e-15);
        let x = solve_tbt(&TbtMatrix::identity(5, 3, 4.0), &b).unwrap();
        assert!(rel(&x, &(&b / C64::new(4.0, 0.0))) < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_distinct_from_breakdown() {
        let c = TbtMatrix::identity(3, 2, 1.0);
        assert!(matches!(
            solve_tbt(&c, &DMatrix::zeros(5, 1)),
            Err(Error::ShapeMismatch(_))
        ));
        // indefinite: H_0 = I, H_1 = 2 I
        let c = TbtMatrix::from_fn(2, 2, |j, d| {
            if d != 0 {
                C64::new(0.0, 0.0)
            } else if j == 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(2.0, 0.0)
            }
        });
        let r = solve_tbt(&c, &DMatrix::zeros(4, 1));
        assert!(matches!(r, Err(Error::Breakdown { level: 1 })), "{r:?}");
    }

    #[test]
    fn matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in 1..=4 {
            for _ in 0..5 {
                let (c, _) = random_pd_tbt(&mut rng, n);
                let b = rand_rhs(&mut rng, c.dim(), 3);
                let fast = solve_tbt(&c, &b).unwrap();
                let dense = dense_solve(&c.to_dense(), &b).unwrap();
                assert!(rel(&fast, &dense) < 1e-8, "n={n}");
                let resid = &c.to_dense() * &fast - &b;
                assert!(resid.norm() / b.norm() < 1e-8);
            }
        }
    }

    #[test]
    fn dense_solve_cases() {
        let i = DMatrix::<C64>::identity(3, 3);
        let b = DMatrix::from_element(3, 1, C64::new(2.0, -1.0));
        assert_eq!(dense_solve(&i, &b).unwrap(), b);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)]));
        let x = dense_solve(&d, &DMatrix::from_element(2, 1, C64::new(2.0, 0.0))).unwrap();
        assert!((x[(0, 0)] - C64::new(2.0, 0.0)).norm() < 1e-15);
        assert!((x[(1, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let sing = DMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert!(matches!(dense_solve(&sing, &b.rows(0, 2).into_owned()), Err(Error::Singular)));

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = rand_rhs(&mut rng, 20, 20);
        let m = &g * g.adjoint() + DMatrix::identity(20, 20) * C64::new(0.5, 0.0);
        let b = rand_rhs(&mut rng, 20, 1);
        let x = dense_solve(&m, &b).unwrap();
        assert!((&m * &x - &b).norm() / b.norm() < 1e-10);
    }

    #[test]
    fn newton_direction_scaled_identity() {
        let orders = [2, 2];
        let h = HTable::from_fn(orders, |k1, k2| {
            if k1 == 0 && k2 == 0 { C64::new(9.0, 0.0) } else { C64::new(0.0, 0.0) }
        });
        let hb = HessianBlocks::assemble(&h);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = HalfVector::from_vec(orders, rand_rhs(&mut rng, 13, 1).column(0).into_owned()).unwrap();
        let d = newton_direction(&hb, &g).unwrap();
        let want = g.values() / C64::new(-9.0, 0.0);
        assert!((d.values() - want).norm() < 1e-14);
    }

    #[test]
    fn newton_direction_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for n in [1usize, 2, 3] {
            for _ in 0..5 {
                let hb = random_hessian(n, &mut rng).unwrap();
                let len = hb.to_dense().nrows();
                let g = HalfVector::from_vec([n, n], rand_rhs(&mut rng, len, 1).column(0).into_owned()).unwrap();
                let fast = newton_direction(&hb, &g).unwrap();
                let dense = dense_newton_direction(&hb, &g).unwrap();
                let err = (fast.values() - dense.values()).norm() / dense.values().norm();
                assert!(err < 1e-8, "n={n} err={err}");
                let resid = hb.to_dense() * fast.values() + g.values();
                assert!(resid.norm() / g.values().norm() < 1e-8);
            }
        }
    }

    #[test]
    fn schur_complement_is_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=4 {
            let hb = random_hessian(n, &mut rng).unwrap();
            let s = schur_complement(&hb).unwrap();
            assert!((&s - s.adjoint()).norm() <= 1e-12 * s.norm());
        }
    }

    #[test]
    fn full_hessian_solve_matches_dense_and_is_symmetric() {
        use crate::grid::half_indices;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            let h = random_hessian_table(n, &mut rng).unwrap();
            let rhs = HalfVector::from_vec([n, n], {
                let mut v = DVector::from_fn(crate::grid::half_len([n, n]), |_, _| {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                v[0].im = 0.0;
                v
            })
            .unwrap();
            let fast = solve_full_hessian(&h, &rhs, false).unwrap();
            let slow = solve_full_hessian(&h, &rhs, true).unwrap();
            assert!((fast.values() - slow.values()).norm() <= 1e-9 * slow.norm());
            // the full solution is conjugate symmetric: T x = r over Lambda
            let t = full_hessian(&h).to_dense();
            let m = 2 * n + 1;
            let full_x = DVector::from_fn(m * m, |row, _| {
                let (k1, k2) = ((row / m) as i64 - n as i64, (row % m) as i64 - n as i64);
                let flip = k1 < 0 || (k1 == 0 && k2 < 0);
                let (a, b) = if flip { (-k1, -k2) } else { (k1, k2) };
                let v = fast.get(a, b).unwrap();
                if flip { v.conj() } else { v }
            });
            let tx = &t * &full_x;
            for (i, [k1, k2]) in half_indices([n, n]).into_iter().enumerate() {
                let row = (k1 + n as i64) as usize * m + (k2 + n as i64) as usize;
                assert!((tx[row] - rhs.values()[i]).norm() <= 1e-9 * rhs.norm());
            }
        }
    }

    #[test]
    fn bench_smoke() {
        let recs = bench_tbt(&[2, 3], 2, 1).unwrap();
        assert_eq!(recs.len(), 4);
        assert!(recs.iter().all(|r| r.mean_seconds > 0.0));
        let csv = bench_to_csv(&recs);
        assert!(csv.starts_with("n,method,mean_seconds\n2,structured,"));
    }
}

