//! Tiny dense linear algebra: LU with partial pivoting and a complete
//! eigen-decomposition for matrices of size at most ~6.
//!
//! Eigenvalues come from the characteristic polynomial (Faddeev-LeVerrier),
//! rooted with Aberth-Ehrlich iteration and then polished by Newton's method
//! on `det(A - λI)` evaluated through LU, so the final accuracy is set by the
//! matrix rather than by the polynomial coefficients. Eigenvectors come from
//! inverse iteration.

use std::ops::Neg;

use num_complex::Complex;
use num_traits::{NumAssign, One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{cabs, Real};

/// Scalars the dense routines can work over: reals and complex numbers.
pub trait LinScalar: Copy + NumAssign + Neg<Output = Self> + Send + Sync + std::fmt::Debug {
    type Real: Real;
    fn modulus(self) -> Self::Real;
    fn from_real(r: Self::Real) -> Self;
}

impl<T: Real> LinScalar for T {
    type Real = T;
    #[inline]
    fn modulus(self) -> T {
        self.abs()
    }
    #[inline]
    fn from_real(r: T) -> T {
        r
    }
}

impl<T: Real> LinScalar for Complex<T> {
    type Real = T;
    #[inline]
    fn modulus(self) -> T {
        cabs(self)
    }
    #[inline]
    fn from_real(r: T) -> Self {
        Complex::new(r, T::zero())
    }
}

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: LinScalar> DenseMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![S::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "matrix must be square");
            data.extend_from_slice(r);
        }
        Self { n, data }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        (0..self.n)
            .map(|i| {
                let mut acc = S::zero();
                for j in 0..self.n {
                    acc += self[(i, j)] * x[j];
                }
                acc
            })
            .collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_fn(self.n, |i, j| {
            let mut acc = S::zero();
            for l in 0..self.n {
                acc += self[(i, l)] * other[(l, j)];
            }
            acc
        })
    }

    pub fn trace(&self) -> S {
        let mut t = S::zero();
        for i in 0..self.n {
            t += self[(i, i)];
        }
        t
    }

    /// Max-row-sum norm.
    pub fn norm_inf(&self) -> S::Real {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)].modulus()).sum::<S::Real>())
            .fold(S::Real::zero(), |a, b| a.max_of(b))
    }

    pub fn lu(&self) -> Result<Lu<S>> {
        Lu::factor(self, None)
    }
}

impl<S> std::ops::Index<(usize, usize)> for DenseMatrix<S> {
    type Output = S;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.n + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for DenseMatrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.n + j]
    }
}

/// LU factorization `PA = LU` with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<S> {
    lu: DenseMatrix<S>,
    perm: Vec<usize>,
    sign_flips: usize,
}

impl<S: LinScalar> Lu<S> {
    /// With `floor = Some(t)`, pivots smaller than `t` are replaced by `t`
    /// instead of failing (used by inverse iteration).
    fn factor(a: &DenseMatrix<S>, floor: Option<S::Real>) -> Result<Self> {
        let n = a.n;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut flips = 0;
        for col in 0..n {
            let (p, pmax) = (col..n).map(|r| (r, lu[(r, col)].modulus())).fold(
                (col, S::Real::zero() - S::Real::one()),
                |best, cur| {
                    if cur.1 > best.1 {
                        cur
                    } else {
                        best
                    }
                },
            );
            if p != col {
                for j in 0..n {
                    lu.data.swap(p * n + j, col * n + j);
                }
                perm.swap(p, col);
                flips += 1;
            }
            if pmax <= S::Real::zero() || floor.is_some_and(|f| pmax < f) {
                match floor {
                    Some(f) => lu[(col, col)] = S::from_real(f),
                    None => return Err(Error::SingularSystem { size: n }),
                }
            }
            let pivot = lu[(col, col)];
            for r in col + 1..n {
                let factor = lu[(r, col)] / pivot;
                lu[(r, col)] = factor;
                for j in col + 1..n {
                    let v = lu[(col, j)];
                    lu[(r, j)] -= factor * v;
                }
            }
        }
        Ok(Self { lu, perm, sign_flips: flips })
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.lu.n;
        let mut x: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let v = x[j];
                x[i] -= self.lu[(i, j)] * v;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let v = x[j];
                x[i] -= self.lu[(i, j)] * v;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn det(&self) -> S {
        let mut d = S::one();
        for i in 0..self.lu.n {
            d *= self.lu[(i, i)];
        }
        if self.sign_flips % 2 == 1 {
            -d
        } else {
            d
        }
    }

    pub fn inverse(&self) -> DenseMatrix<S> {
        let n = self.lu.n;
        let mut inv = DenseMatrix::zeros(n);
        for j in 0..n {
            let mut e = vec![S::zero(); n];
            e[j] = S::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn solve<S: LinScalar>(a: &DenseMatrix<S>, b: &[S]) -> Result<Vec<S>> {
    Ok(a.lu()?.solve(b))
}

/// Coefficients `c_0..=c_n` of the monic `det(λI - A) = Σ c_i λ^i`.
pub fn characteristic_polynomial<S: LinScalar>(a: &DenseMatrix<S>) -> Vec<S> {
    let n = a.n;
    let mut c = vec![S::zero(); n + 1];
    c[n] = S::one();
    let mut m = DenseMatrix::zeros(n);
    for k in 1..=n {
        let mut next = a.mul(&m);
        for i in 0..n {
            next[(i, i)] += c[n - k + 1];
        }
        m = next;
        let am = a.mul(&m);
        let kf = S::from_real(<S::Real as Real>::from_usize_exact(k));
        c[n - k] = -am.trace() / kf;
    }
    c
}

fn horner<T: Real>(coeffs: &[Complex<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = Complex::zero();
    let mut d = Complex::zero();
    for &c in coeffs.iter().rev() {
        d = d * z + p;
        p = p * z + c;
    }
    (p, d)
}

/// All roots of a polynomial with complex coefficients (`coeffs[i]` is the
/// coefficient of `z^i`, leading coefficient non-zero).
pub fn polynomial_roots<T: Real>(coeffs: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    let monic: Vec<Complex<T>> = coeffs.iter().map(|&c| c / lead).collect();
    if n == 1 {
        return Ok(vec![-monic[0]]);
    }
    let nf = T::from_usize_exact(n);
    let center = -monic[n - 1] / nf;
    let radius = monic[..n].iter().map(|&c| cabs(c)).fold(T::zero(), |a, b| a.max_of(b)).max_of(T::one());
    let mut z: Vec<Complex<T>> = (0..n)
        .map(|j| {
            let angle = T::tau() * T::from_usize_exact(j) / nf + T::cst(0.4);
            center + Complex::new(angle.cos(), angle.sin()) * radius
        })
        .collect();
    let tol = T::epsilon() * T::cst(16.0);
    for _ in 0..1000 {
        let mut max_rel = T::zero();
        for j in 0..n {
            let (p, d) = horner(&monic, z[j]);
            if p.is_zero() {
                continue;
            }
            let ratio = p / d;
            let mut repulsion = Complex::zero();
            for l in 0..n {
                if l != j {
                    repulsion += Complex::<T>::one() / (z[j] - z[l]);
                }
            }
            let w = ratio / (Complex::<T>::one() - ratio * repulsion);
            z[j] -= w;
            let rel = cabs(w) / cabs(z[j]).max_of(T::one());
            max_rel = max_rel.max_of(rel);
        }
        if max_rel <= tol {
            return Ok(z);
        }
    }
    // Aberth stalls at the roundoff floor for clustered roots; the matrix
    // polish downstream takes it from there.
    if z.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(z)
    } else {
        Err(Error::EigenNoConvergence(n))
    }
}

/// Complete eigen-decomposition of a small complex matrix.
#[derive(Clone, Debug)]
pub struct Eigen<T> {
    pub values: Vec<Complex<T>>,
    /// `right[n]` satisfies `A r = λ_n r`.
    pub right: Vec<Vec<Complex<T>>>,
    /// `left[n]` satisfies `l A = λ_n l` and `l · r = 1` (no conjugation).
    pub left: Vec<Vec<Complex<T>>>,
}

/// Smallest eigenvalue separation below which a matrix is reported as
/// defective: 1.5e-12 in `f64`, ~2e-20 in double-double.
pub fn defect_tolerance<T: Real>() -> T {
    T::epsilon().sqrt() * T::cst(1e-4)
}

fn shifted<T: Real>(a: &DenseMatrix<Complex<T>>, lambda: Complex<T>) -> DenseMatrix<Complex<T>> {
    let mut m = a.clone();
    for i in 0..m.n {
        m[(i, i)] -= lambda;
    }
    m
}

/// Newton's method on `det(A - λI)`: `λ ← λ + 1 / tr((A - λI)^{-1})`.
fn polish<T: Real>(a: &DenseMatrix<Complex<T>>, mut lambda: Complex<T>, limit: T) -> Complex<T> {
    let scale = a.norm_inf().max_of(T::one());
    let start = lambda;
    for _ in 0..20 {
        let Ok(lu) = shifted(a, lambda).lu() else {
            return lambda;
        };
        let tr = lu.inverse().trace();
        if tr.is_zero() {
            return lambda;
        }
        let step = Complex::<T>::one() / tr;
        let next = lambda + step;
        let moved = cabs(next - start);
        if !moved.is_finite() || moved > limit {
            return lambda;
        }
        lambda = next;
        if cabs(step) <= T::epsilon() * scale {
            break;
        }
    }
    lambda
}

fn inverse_iteration<T: Real>(a: &DenseMatrix<Complex<T>>, lambda: Complex<T>) -> Result<Vec<Complex<T>>> {
    let n = a.n;
    let floor = T::epsilon() * a.norm_inf().max_of(T::one());
    let lu = Lu::factor(&shifted(a, lambda), Some(floor))?;
    let mut v: Vec<Complex<T>> = (0..n)
        .map(|i| {
            let f = T::from_usize_exact(i + 1);
            Complex::new(T::one() / f, T::cst(0.3) * f)
        })
        .collect();
    for _ in 0..3 {
        let x = lu.solve(&v);
        let big = x
            .iter()
            .copied()
            .max_by(|p, q| cabs(*p).partial_cmp(&cabs(*q)).unwrap_or(std::cmp::Ordering::Equal))
            .ok_or(Error::EigenNoConvergence(n))?;
        if big.is_zero() || !big.re.is_finite() || !big.im.is_finite() {
            return Err(Error::EigenNoConvergence(n));
        }
        v = x.iter().map(|&e| e / big).collect();
    }
    Ok(v)
}

/// Bilinear (unconjugated) dot product.
pub fn bilinear<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (&x, &y)| acc + x * y)
}

fn min_gap<T: Real>(vals: &[Complex<T>]) -> T {
    let mut gap: Option<T> = None;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            let d = cabs(vals[i] - vals[j]);
            gap = Some(gap.map_or(d, |g| g.min_of(d)));
        }
    }
    gap.unwrap_or(T::zero())
}

/// Eigenvalues of `a`, polished against the matrix. `mode` only labels the
/// error when two eigenvalues collide.
pub fn eigenvalues<T: Real>(a: &DenseMatrix<Complex<T>>, mode: usize) -> Result<Vec<Complex<T>>> {
    let n = a.n;
    let rough = polynomial_roots(&characteristic_polynomial(a))?;
    let limit = if n > 1 { min_gap(&rough) * T::half() } else { a.norm_inf() + T::one() };
    let values: Vec<Complex<T>> = rough.iter().map(|&l| polish(a, l, limit)).collect();
    if n > 1 {
        let gap = min_gap(&values);
        if gap <= defect_tolerance::<T>() * a.norm_inf().max_of(T::one()) {
            return Err(Error::NonDiagonalizable { m: mode, gap: gap.as_f64() });
        }
    }
    Ok(values)
}

/// Eigenvalues, right and left eigenvectors of `a`.
pub fn eigen<T: Real>(a: &DenseMatrix<Complex<T>>, mode: usize) -> Result<Eigen<T>> {
    let n = a.n;
    let values = eigenvalues(a, mode)?;
    let at = a.transpose();
    let mut right = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    for &l in &values {
        let r = inverse_iteration(a, l)?;
        let lv = inverse_iteration(&at, l)?;
        let pair = bilinear(&lv, &r);
        let norm = |v: &[Complex<T>]| v.iter().map(|&e| cabs(e) * cabs(e)).sum::<T>().sqrt();
        // Left and right vectors of a Jordan block are orthogonal; rounding
        // splits the double root by ~sqrt(eps) and leaves cos ~ sqrt(eps).
        if cabs(pair) <= T::epsilon().sqrt() * T::cst(4.0) * norm(&lv) * norm(&r) {
            let gap = min_gap(&values).as_f64();
            return Err(Error::NonDiagonalizable { m: mode, gap });
        }
        left.push(lv.iter().map(|&e| e / pair).collect());
        right.push(r);
    }
    Ok(Eigen { values, right, left })
}
