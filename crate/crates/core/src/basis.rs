//! Legendre polynomials, Gauss-Legendre quadrature, the uniform periodic grid
//! and the scaled cell basis `φ_{j,n}(x) = P_n(2(x - x_j)/h)`.
//!
//! The basis is the unnormalized Legendre family (`P_n(1) = 1`), so on a cell
//! of width `h` the mass matrix is `diag(h / (2n + 1))`.

use crate::error::{Error, Result};
use crate::scalar::{parity, Real};

/// `P_n(y)` and `P_n'(y)` from the three-term recurrence.
///
/// The derivative uses `P'_{n+1} = P'_{n-1} + (2n + 1) P_n`, which has no
/// division by `1 - y²` and is therefore exact at the endpoints.
pub fn legendre_eval<T: Real>(n: usize, y: T) -> (T, T) {
    let mut p_prev = T::one();
    let mut d_prev = T::zero();
    if n == 0 {
        return (p_prev, d_prev);
    }
    let mut p = y;
    let mut d = T::one();
    for i in 1..n {
        let fi = T::from_usize_exact(i);
        let p_next = ((fi + fi + T::one()) * y * p - fi * p_prev) / (fi + T::one());
        let d_next = d_prev + (fi + fi + T::one()) * p;
        p_prev = p;
        d_prev = d;
        p = p_next;
        d = d_next;
    }
    (p, d)
}

/// Values `P_0(y) ..= P_k(y)`.
pub fn legendre_all<T: Real>(k: usize, y: T) -> Vec<T> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(T::one());
    if k == 0 {
        return out;
    }
    out.push(y);
    for i in 1..k {
        let fi = T::from_usize_exact(i);
        let next = ((fi + fi + T::one()) * y * out[i] - fi * out[i - 1]) / (fi + T::one());
        out.push(next);
    }
    out
}

/// Nodes and weights on the reference interval `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_{-1}^{1} f(y) dy`.
    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&y, &w)| w * f(y)).sum()
    }

    /// `∫_a^b f(y) dy` by the affinely mapped rule.
    pub fn integrate_on(&self, a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
        let mid = (a + b) * T::half();
        let rad = (b - a) * T::half();
        rad * self.integrate(|s| f(mid + rad * s))
    }
}

/// `q`-point Gauss-Legendre rule.
///
/// Nodes are the roots of `P_q`, found by Newton iteration from Chebyshev
/// initial guesses; weights are `2 / ((1 - y²) P_q'(y)²)`.
pub fn gauss_rule<T: Real>(q: usize) -> Result<QuadratureRule<T>> {
    if q == 0 {
        return Err(Error::QuadratureNoConvergence(0));
    }
    let mut nodes = Vec::with_capacity(q);
    let mut weights = Vec::with_capacity(q);
    let tol = T::epsilon() * T::cst(4.0);
    let qf = T::from_usize_exact(q);
    for i in 0..q.div_ceil(2) {
        let fi = T::from_usize_exact(i);
        let mut y = (T::pi() * (fi + T::cst(0.75)) / (qf + T::half())).cos();
        let mut converged = false;
        for _ in 0..100 {
            let (p, d) = legendre_eval(q, y);
            let step = p / d;
            y -= step;
            if step.abs() <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::QuadratureNoConvergence(q));
        }
        let (_, d) = legendre_eval(q, y);
        let w = T::cst(2.0) / ((T::one() - y * y) * d * d);
        nodes.push(y);
        weights.push(w);
    }
    // mirror the positive half; the middle node of odd rules is exactly zero
    let half = q / 2;
    let mut all_nodes = Vec::with_capacity(q);
    let mut all_weights = Vec::with_capacity(q);
    for i in 0..half {
        all_nodes.push(-nodes[i]);
        all_weights.push(weights[i]);
    }
    if q % 2 == 1 {
        all_nodes.push(T::zero());
        all_weights.push(weights[half]);
    }
    for i in (0..half).rev() {
        all_nodes.push(nodes[i]);
        all_weights.push(weights[i]);
    }
    Ok(QuadratureRule { nodes: all_nodes, weights: all_weights })
}

/// Uniform periodic partition of `[0, 2π)` into `n_cells` cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    n_cells: usize,
    h: T,
}

impl<T: Real> Grid<T> {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::Config("grid needs at least one cell".into()));
        }
        Ok(Self { n_cells, h: T::tau() / T::from_usize_exact(n_cells) })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Cell width `h = 2π / N`.
    pub fn h(&self) -> T {
        self.h
    }

    /// Interface `x_{i - 1/2}` for `i` in `0..=N`; interfaces 0 and N coincide
    /// under periodicity.
    pub fn interface(&self, i: usize) -> T {
        T::from_usize_exact(i) * self.h
    }

    /// Center of cell `j` (0-based), the midpoint of its two interfaces.
    pub fn center(&self, j: usize) -> T {
        (self.interface(j) + self.interface(j + 1)) * T::half()
    }

    pub fn centers(&self) -> Vec<T> {
        (0..self.n_cells).map(|j| self.center(j)).collect()
    }

    /// Physical coordinate of reference point `y` in cell `j`.
    pub fn to_physical(&self, j: usize, y: T) -> T {
        self.center(j) + self.h * T::half() * y
    }

    /// Cell index containing `x` (after reduction into `[0, 2π)`) and the
    /// reference coordinate there.
    pub fn locate(&self, x: T) -> (usize, T) {
        let tau = T::tau();
        let xr = x - (x / tau).floor() * tau;
        let mut j = (xr / self.h).floor().to_usize().unwrap_or(0);
        if j >= self.n_cells {
            j = self.n_cells - 1;
        }
        let y = (xr - self.center(j)) * T::cst(2.0) / self.h;
        (j, y)
    }

    /// Index of the cell to the right, periodically.
    pub fn right_of(&self, j: usize) -> usize {
        (j + 1) % self.n_cells
    }

    pub fn left_of(&self, j: usize) -> usize {
        (j + self.n_cells - 1) % self.n_cells
    }
}

/// Scaled Legendre basis of degree `k` with its exact cell integrals.
#[derive(Clone, Debug)]
pub struct ScaledBasis {
    degree: usize,
}

impl ScaledBasis {
    pub fn new(degree: usize) -> Self {
        Self { degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `∫_{-1}^{1} φ_n² dy = 2 / (2n + 1)`.
    pub fn reference_norm<T: Real>(n: usize) -> T {
        T::cst(2.0) / T::from_usize_exact(2 * n + 1)
    }

    /// Physical-cell mass `h / (2n + 1)`.
    pub fn mass<T: Real>(n: usize, h: T) -> T {
        h / T::from_usize_exact(2 * n + 1)
    }

    /// `∫_{-1}^{1} φ_m φ_n' dy`: 2 when `m < n` and `m + n` is odd, else 0.
    pub fn stiffness<T: Real>(m: usize, n: usize) -> T {
        if m < n && (m + n) % 2 == 1 {
            T::cst(2.0)
        } else {
            T::zero()
        }
    }

    /// `φ_n(-1)`.
    pub fn left_trace<T: Real>(n: usize) -> T {
        parity(n)
    }

    /// Evaluates `Σ c_n φ_n(y)`.
    pub fn eval<T: Real>(coeffs: &[T], y: T) -> T {
        let p = legendre_all(coeffs.len().saturating_sub(1), y);
        coeffs.iter().zip(&p).map(|(&c, &v)| c * v).sum()
    }

    /// `Σ c_n φ_n(1)`.
    pub fn right_value<T: Real>(coeffs: &[T]) -> T {
        coeffs.iter().copied().sum()
    }

    /// `Σ c_n φ_n(-1)`.
    pub fn left_value<T: Real>(coeffs: &[T]) -> T {
        coeffs.iter().enumerate().map(|(n, &c)| if n % 2 == 0 { c } else { -c }).sum()
    }

    /// Values of `φ_0..=φ_k` at every node of `rule`, laid out `[node][n]`.
    pub fn tabulate<T: Real>(&self, rule: &QuadratureRule<T>) -> Vec<Vec<T>> {
        rule.nodes.iter().map(|&y| legendre_all(self.degree, y)).collect()
    }
}

/// Polynomial stored by its Legendre coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct LegendreSeries<T> {
    pub coeffs: Vec<T>,
}

impl<T: Real> LegendreSeries<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Self { coeffs }
    }

    pub fn eval(&self, y: T) -> T {
        ScaledBasis::eval(&self.coeffs, y)
    }

    /// First derivative, using `P_n' = Σ_{m < n, m + n odd} (2m + 1) P_m`.
    pub fn derivative(&self) -> Self {
        let len = self.coeffs.len().max(1);
        let mut out = vec![T::zero(); len];
        for (n, &c) in self.coeffs.iter().enumerate() {
            for (m, slot) in out.iter_mut().enumerate().take(n) {
                if (m + n) % 2 == 1 {
                    *slot += c * T::from_usize_exact(2 * m + 1);
                }
            }
        }
        while out.len() > 1 && out.last().is_some_and(|v| v.is_zero()) {
            out.pop();
        }
        Self { coeffs: out }
    }

    pub fn nth_derivative(&self, order: usize) -> Self {
        (0..order).fold(self.clone(), |p, _| p.derivative())
    }

    /// `∫_{-1}^{1} p(y) dy`.
    pub fn integral(&self) -> T {
        self.coeffs.first().map_or(T::zero(), |&c| c + c)
    }
}

/// Right Radau polynomial `R⁻_{k+1} = φ_{k+1} - φ_k`, which vanishes at `y = 1`.
pub fn radau_right_poly<T: Real>(k: usize) -> LegendreSeries<T> {
    let mut coeffs = vec![T::zero(); k + 2];
    coeffs[k] = -T::one();
    coeffs[k + 1] = T::one();
    LegendreSeries::new(coeffs)
}
