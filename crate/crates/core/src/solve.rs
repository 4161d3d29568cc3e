//! Dense linear solvers: partial-pivot LU and full (unrestarted) GMRES.
//!
//! Both are generic over [`Scalar`]/[`RealScalar`] so the same code runs on
//! `f64`, MPFR floats and, for LU, exact rationals.

use std::ops::{Index, IndexMut};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mpnum::PrecisionContext;
use crate::{BigReal, Error, RealScalar, Result, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity_like(n: usize, proto: &T) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                proto.one_like()
            } else {
                proto.zero_like()
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// Largest absolute row sum (the ∞-norm).
    pub fn max_row_sum(&self) -> T {
        let proto = &self.data[0];
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .fold(proto.zero_like(), |acc, v| acc + v.abs_val())
            })
            .fold(proto.zero_like(), |m, v| if v > m { v } else { m })
    }

    pub fn max_abs(&self) -> T {
        let proto = &self.data[0];
        self.data.iter().fold(proto.zero_like(), |m, v| {
            let a = v.abs_val();
            if a > m {
                a
            } else {
                m
            }
        })
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = a[0].zero_like();
    for (x, y) in a.iter().zip(b) {
        acc.add_mul_assign(x, y);
    }
    acc
}

pub fn norm2<T: RealScalar>(v: &[T]) -> T {
    dot(v, v).sqrt_val()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Gmres,
    Lu,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub method: SolveMethod,
    /// Target relative residual.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: SolveMethod::Gmres,
            tol: 1e-20,
            max_iter: 1000,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport<T> {
    /// `‖b − Ax‖₂ / ‖b‖₂`, recomputed from the returned `x`.
    pub relative_residual: T,
    pub iterations: usize,
    pub method: SolveMethod,
    pub converged: bool,
}

/// `‖b − Ax‖₂ / ‖b‖₂`; the plain residual norm when `b = 0`.
pub fn residual_norm<T: RealScalar>(a: &DenseMatrix<T>, x: &[T], b: &[T]) -> Result<T> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, rhs has {} entries",
            a.rows(),
            b.len()
        )));
    }
    let ax = a.matvec(x)?;
    let r: Vec<T> = b.iter().zip(ax).map(|(bi, axi)| bi.clone() - axi).collect();
    let rn = norm2(&r);
    let bn = norm2(b);
    Ok(if bn.is_zero_val() { rn } else { rn / bn })
}

fn check_square<T: Scalar>(a: &DenseMatrix<T>, b: &[T]) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, expected square",
            a.rows(),
            a.cols()
        )));
    }
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, rhs has {} entries",
            a.rows(),
            b.len()
        )));
    }
    if a.rows() == 0 {
        return Err(Error::DimensionMismatch("empty system".into()));
    }
    Ok(())
}

/// In-place LU factors with row permutation, `PA = LU`.
#[derive(Clone, Debug)]
pub struct LuFactors<T> {
    lu: DenseMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> LuFactors<T> {
    /// Fails with [`Error::Singular`] when a pivot's magnitude is `<= pivot_tol`.
    pub fn new(a: &DenseMatrix<T>, pivot_tol: &T) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch("LU needs a square matrix".into()));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs_val();
            for i in k + 1..n {
                let v = lu[(i, k)].abs_val();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= *pivot_tol {
                return Err(Error::Singular(k));
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let (head, tail) = lu.data.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..];
            let pivot = pivot_row[k].clone();
            tail.par_chunks_mut(n).for_each(|row| {
                if row[k].is_zero_val() {
                    return;
                }
                let l = row[k].clone() / pivot.clone();
                for j in k + 1..n {
                    row[j].sub_mul_assign(&l, &pivot_row[j]);
                }
                row[k] = l;
            });
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(Error::DimensionMismatch("rhs length".into()));
        }
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            for j in 0..i {
                let (yj, yi) = (y[j].clone(), &mut y[i]);
                yi.sub_mul_assign(&row[j], &yj);
            }
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            for j in i + 1..n {
                let (yj, yi) = (y[j].clone(), &mut y[i]);
                yi.sub_mul_assign(&row[j], &yj);
            }
            y[i] = y[i].clone() / row[i].clone();
        }
        Ok(y)
    }
}

/// Partial-pivot LU solve with a recomputed residual report.
pub fn lu_solve<T: RealScalar>(
    a: &DenseMatrix<T>,
    b: &[T],
    pivot_tol: &T,
) -> Result<(Vec<T>, SolveReport<T>)> {
    check_square(a, b)?;
    let x = LuFactors::new(a, pivot_tol)?.solve(b)?;
    let relative_residual = residual_norm(a, &x, b)?;
    Ok((
        x,
        SolveReport {
            relative_residual,
            iterations: 1,
            method: SolveMethod::Lu,
            converged: true,
        },
    ))
}

/// LU at working precision; pivots below `10^-(digits-10)·max|a_ij|` are singular.
pub fn lu_solve_big(
    a: &DenseMatrix<BigReal>,
    b: &[BigReal],
    ctx: &PrecisionContext,
) -> Result<(Vec<BigReal>, SolveReport<BigReal>)> {
    check_square(a, b)?;
    let pivot_tol = ctx.tol(10) * a.max_abs();
    lu_solve(a, b, &pivot_tol)
}

/// Full GMRES with modified Gram–Schmidt Arnoldi and one unconditional
/// reorthogonalization pass. If the Krylov space is exhausted before the
/// recomputed residual meets `tol`, the iteration restarts from the current
/// iterate while the `max_iter` budget lasts.
pub fn gmres_solve<T: RealScalar>(
    a: &DenseMatrix<T>,
    b: &[T],
    opts: &SolveOptions,
) -> Result<(Vec<T>, SolveReport<T>)> {
    check_square(a, b)?;
    opts.validate()?;
    let n = a.rows();
    let proto = b[0].clone();
    let b_norm = norm2(b);
    if b_norm.is_zero_val() {
        return Err(Error::ZeroRhs);
    }
    let tol = proto.from_f64_like(opts.tol);
    let stop_estimate = proto.from_f64_like(opts.tol * 0.5);

    let mut x: Vec<T> = vec![proto.zero_like(); n];
    let mut iterations = 0usize;

    loop {
        let ax = a.matvec(&x)?;
        let r: Vec<T> = b.iter().zip(ax).map(|(bi, v)| bi.clone() - v).collect();
        let beta = norm2(&r);
        if beta.clone() / b_norm.clone() <= tol || iterations >= opts.max_iter || beta.is_zero_val() {
            break;
        }

        let mut basis: Vec<Vec<T>> = vec![r.into_iter().map(|v| v / beta.clone()).collect()];
        // Hessenberg columns after rotation: upper-triangular R
        let mut r_cols: Vec<Vec<T>> = Vec::new();
        let mut cs: Vec<T> = Vec::new();
        let mut sn: Vec<T> = Vec::new();
        let mut g: Vec<T> = vec![beta.clone()];

        for k in 0..n {
            iterations += 1;
            let mut w = a.matvec(&basis[k])?;
            let mut h: Vec<T> = vec![proto.zero_like(); k + 2];
            for _pass in 0..2 {
                for (j, v) in basis.iter().enumerate() {
                    let hj = dot(v, &w);
                    for (wi, vi) in w.iter_mut().zip(v) {
                        wi.sub_mul_assign(&hj, vi);
                    }
                    h[j] = h[j].clone() + hj;
                }
            }
            let h_next = norm2(&w);
            h[k + 1] = h_next.clone();

            for j in 0..k {
                let t = cs[j].clone() * h[j].clone() + sn[j].clone() * h[j + 1].clone();
                h[j + 1] = cs[j].clone() * h[j + 1].clone() - sn[j].clone() * h[j].clone();
                h[j] = t;
            }
            let denom = (h[k].clone() * h[k].clone() + h_next.clone() * h_next.clone()).sqrt_val();
            let (c, s) = if denom.is_zero_val() {
                (proto.one_like(), proto.zero_like())
            } else {
                (h[k].clone() / denom.clone(), h_next.clone() / denom.clone())
            };
            h[k] = denom;
            h.truncate(k + 1);
            g.push(-(s.clone() * g[k].clone()));
            g[k] = c.clone() * g[k].clone();
            cs.push(c);
            sn.push(s);
            r_cols.push(h);

            let estimate = g[k + 1].abs_val() / b_norm.clone();
            let breakdown = h_next.is_zero_val();
            if estimate <= stop_estimate || breakdown || k + 1 == n || iterations >= opts.max_iter {
                let y = back_substitute(&r_cols, &g[..=k]);
                for (yj, v) in y.iter().zip(&basis) {
                    for (xi, vi) in x.iter_mut().zip(v) {
                        xi.add_mul_assign(yj, vi);
                    }
                }
                break;
            }
            basis.push(w.into_iter().map(|v| v / h_next.clone()).collect());
        }
    }

    let relative_residual = residual_norm(a, &x, b)?;
    let converged = relative_residual <= tol;
    Ok((
        x,
        SolveReport {
            relative_residual,
            iterations,
            method: SolveMethod::Gmres,
            converged,
        },
    ))
}

/// Solves `R y = g` with `R` stored column-wise (`cols[j][i]`, `i <= j`).
fn back_substitute<T: Scalar>(cols: &[Vec<T>], g: &[T]) -> Vec<T> {
    let m = g.len();
    let mut y = g.to_vec();
    for i in (0..m).rev() {
        for j in i + 1..m {
            let yj = y[j].clone();
            y[i].sub_mul_assign(&cols[j][i], &yj);
        }
        y[i] = y[i].clone() / cols[i][i].clone();
    }
    y
}

/// Dispatches on `opts.method`; LU uses the context's singularity threshold.
pub fn solve_big(
    a: &DenseMatrix<BigReal>,
    b: &[BigReal],
    opts: &SolveOptions,
    ctx: &PrecisionContext,
) -> Result<(Vec<BigReal>, SolveReport<BigReal>)> {
    match opts.method {
        SolveMethod::Lu => lu_solve_big(a, b, ctx),
        SolveMethod::Gmres => gmres_solve(a, b, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rug::{Float, Rational};

    fn ctx(d: u32) -> PrecisionContext {
        PrecisionContext::new(d).unwrap()
    }

    #[test]
    fn identity_gmres_takes_one_iteration() {
        let a = DenseMatrix::identity_like(4, &1.0f64);
        let b = vec![1.0, -2.0, 3.0, 0.5];
        let (x, rep) = gmres_solve(&a, &b, &SolveOptions::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-14f64);
        }
    }

    #[test]
    fn lu_small_cases() {
        let a = DenseMatrix::from_rows(vec![vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let (x, rep) = lu_solve(&a, &[2.0, 8.0], &0.0).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
        assert_eq!(rep.relative_residual, 0.0);
        let id = DenseMatrix::identity_like(3, &1.0f64);
        assert_eq!(lu_solve(&id, &[1.0, 2.0, 3.0], &0.0).unwrap().0, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn lu_detects_singularity() {
        let c = ctx(40);
        let rows = vec![
            vec![c.int(1), c.int(2)],
            vec![c.int(2), c.int(4)],
        ];
        let a = DenseMatrix::from_rows(rows).unwrap();
        assert!(matches!(
            lu_solve_big(&a, &[c.int(1), c.int(1)], &c),
            Err(Error::Singular(1))
        ));
    }

    #[test]
    fn error_paths() {
        let a = DenseMatrix::identity_like(2, &1.0f64);
        assert!(matches!(
            gmres_solve(&a, &[0.0, 0.0], &SolveOptions::default()),
            Err(Error::ZeroRhs)
        ));
        assert!(matches!(
            gmres_solve(&a, &[1.0], &SolveOptions::default()),
            Err(Error::DimensionMismatch(_))
        ));
        let rect = DenseMatrix::from_fn(2, 3, |_, _| 1.0f64);
        assert!(lu_solve(&rect, &[1.0, 1.0], &0.0).is_err());
        let bad = SolveOptions { tol: 0.0, ..Default::default() };
        assert!(gmres_solve(&a, &[1.0, 1.0], &bad).is_err());
    }

    #[test]
    fn residual_norm_properties() {
        let a = DenseMatrix::from_rows(vec![vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let b = [5.0, 5.0];
        assert_eq!(residual_norm(&a, &[1.0, 2.0], &b).unwrap(), 0.0);
        assert_eq!(residual_norm(&a, &[0.0, 0.0], &b).unwrap(), 1.0);
        let x = [0.3f64, 0.7];
        let r1 = residual_norm(&a, &x, &b).unwrap();
        let r2 = residual_norm(&a, &[3.0, 7.0], &[50.0, 50.0]).unwrap();
        assert!((r1 - r2).abs() < 1e-15);
    }

    fn random_big_system(n: usize, c: &PrecisionContext, rng: &mut ChaCha8Rng) -> (DenseMatrix<BigReal>, Vec<BigReal>) {
        let diag = 2.0 * (n as f64).sqrt();
        let a = DenseMatrix::from_fn(n, n, |i, j| {
            let v: f64 = rng.gen_range(-1.0..1.0);
            c.real(if i == j { v + diag } else { v })
        });
        let b = (0..n).map(|_| c.real(rng.gen_range(-1.0..1.0))).collect();
        (a, b)
    }

    #[test]
    fn gmres_matches_lu_on_random_systems() {
        let c = ctx(60);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (a, b) = random_big_system(10, &c, &mut rng);
        let opts = SolveOptions { tol: 1e-45, ..Default::default() };
        let (xg, rep) = gmres_solve(&a, &b, &opts).unwrap();
        let (xl, _) = lu_solve_big(&a, &b, &c).unwrap();
        assert!(rep.converged);
        let diff: Vec<BigReal> = xg.iter().zip(&xl).map(|(g, l)| Float::with_val(c.prec(), g - l)).collect();
        assert!(norm2(&diff) / norm2(&xl) < c.pow10(-40));
    }

    #[test]
    fn hilbert_matrix_gmres_residual_is_verified() {
        let c = ctx(100);
        let n = 8;
        let a = DenseMatrix::from_fn(n, n, |i, j| c.ratio(1, (i + j + 1) as i64));
        let b: Vec<BigReal> = (0..n).map(|i| c.int(i as i64 + 1)).collect();
        let (x, rep) = gmres_solve(&a, &b, &SolveOptions::default()).unwrap();
        assert!(rep.converged);
        let check = residual_norm(&a, &x, &b).unwrap();
        assert!(check <= 1e-20);
        assert_eq!(check, rep.relative_residual);
    }

    #[test]
    fn exact_rational_lu_solves_hilbert_system() {
        let n = 6;
        let a = DenseMatrix::from_fn(n, n, |i, j| Rational::from((1, (i + j + 1) as i64)));
        let x_true: Vec<Rational> = (0..n).map(|i| Rational::from(i as i64 - 2)).collect();
        let b = a.matvec(&x_true).unwrap();
        let x = LuFactors::new(&a, &Rational::new()).unwrap().solve(&b).unwrap();
        assert_eq!(x, x_true);
    }

    #[test]
    fn lu_big_residual_on_random_20x20() {
        let c = ctx(50);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DenseMatrix::from_fn(20, 20, |_, _| c.real(rng.gen_range(-1.0..1.0)));
        let b: Vec<BigReal> = (0..20).map(|_| c.real(rng.gen_range(-1.0..1.0))).collect();
        let (_, rep) = lu_solve_big(&a, &b, &c).unwrap();
        assert!(rep.relative_residual <= c.tol(25));
    }

    #[test]
    fn solvers_are_deterministic() {
        let c = ctx(40);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, b) = random_big_system(12, &c, &mut rng);
        let opts = SolveOptions::default();
        assert_eq!(gmres_solve(&a, &b, &opts).unwrap().0, gmres_solve(&a, &b, &opts).unwrap().0);
        assert_eq!(lu_solve_big(&a, &b, &c).unwrap().0, lu_solve_big(&a, &b, &c).unwrap().0);
    }

    #[test]
    fn f32_backend_works() {
        let a = DenseMatrix::from_rows(vec![vec![4.0f32, 1.0], vec![1.0, 3.0]]).unwrap();
        let opts = SolveOptions { tol: 1e-5, ..Default::default() };
        let (x, rep) = gmres_solve(&a, &[1.0, 2.0], &opts).unwrap();
        assert!(rep.converged, "{rep:?}");
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-5);
    }
}
