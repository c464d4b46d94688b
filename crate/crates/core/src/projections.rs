//! Piecewise-polynomial states and the projectors that initialize them.
//!
//! Coefficients live in the scaled Legendre basis, so `coeffs[j][p][0]` is
//! the cell average of component `p` on cell `j`, the right trace is `Σ c_n`
//! and the left trace is `Σ (-1)^n c_n`.

use crate::basis::{gauss_rule, legendre_all, Grid, QuadratureRule, ScaledBasis};
use crate::error::{Error, Result};
use crate::field::{require_order, wrap, SmoothField};
use crate::linalg::{DenseMatrix, Lu};
use crate::scalar::Real;

/// Coefficient tensor `[N][c][k + 1]` over a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DGState<T> {
    grid: Grid<T>,
    degree: usize,
    components: usize,
    coeffs: Vec<T>,
}

impl<T: Real> DGState<T> {
    pub fn zeros(grid: Grid<T>, degree: usize, components: usize) -> Self {
        let len = grid.n_cells() * components * (degree + 1);
        Self { grid, degree, components, coeffs: vec![T::zero(); len] }
    }

    /// `coeffs` laid out cell-major, then component, then mode.
    pub fn from_coeffs(grid: Grid<T>, degree: usize, components: usize, coeffs: Vec<T>) -> Result<Self> {
        let expect = grid.n_cells() * components * (degree + 1);
        if coeffs.len() != expect {
            return Err(Error::Config(format!("coefficient vector has length {}, expected {expect}", coeffs.len())));
        }
        Ok(Self { grid, degree, components, coeffs })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn n_cells(&self) -> usize {
        self.grid.n_cells()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    #[inline]
    fn offset(&self, j: usize, p: usize) -> usize {
        (j * self.components + p) * (self.degree + 1)
    }

    /// Modes `0..=k` of component `p` on cell `j`.
    #[inline]
    pub fn cell(&self, j: usize, p: usize) -> &[T] {
        let o = self.offset(j, p);
        &self.coeffs[o..o + self.degree + 1]
    }

    #[inline]
    pub fn cell_mut(&mut self, j: usize, p: usize) -> &mut [T] {
        let o = self.offset(j, p);
        let len = self.degree + 1;
        &mut self.coeffs[o..o + len]
    }

    /// `u_h(x_{j+1/2}^-)`.
    pub fn right_trace(&self, j: usize, p: usize) -> T {
        ScaledBasis::right_value(self.cell(j, p))
    }

    /// `u_h(x_{j-1/2}^+)`.
    pub fn left_trace(&self, j: usize, p: usize) -> T {
        ScaledBasis::left_value(self.cell(j, p))
    }

    /// Point value of component `p`; interfaces take the value from the cell
    /// on their right.
    pub fn value(&self, p: usize, x: T) -> T {
        let (j, y) = self.grid.locate(x);
        ScaledBasis::eval(self.cell(j, p), y)
    }

    /// `Σ_j Σ_p Σ_n c² h / (2n + 1)`, the squared L2 norm.
    pub fn energy(&self) -> T {
        let h = self.grid.h();
        let mut acc = T::zero();
        for j in 0..self.n_cells() {
            for p in 0..self.components {
                for (n, &c) in self.cell(j, p).iter().enumerate() {
                    acc += c * c * ScaledBasis::mass(n, h);
                }
            }
        }
        acc
    }

    /// `Σ_j h c_{j,p,0}`, the integral of component `p`.
    pub fn mass(&self, p: usize) -> T {
        let h = self.grid.h();
        (0..self.n_cells()).map(|j| self.cell(j, p)[0] * h).sum()
    }

    /// L2 inner product `Σ_j Σ_p Σ_n a b h / (2n + 1)`.
    pub fn inner(&self, other: &Self) -> T {
        let h = self.grid.h();
        let k1 = self.degree + 1;
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(i, (&a, &b))| a * b * ScaledBasis::mass(i % k1, h))
            .sum()
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: T, other: &Self) {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: T) {
        for a in &mut self.coeffs {
            *a *= alpha;
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.coeffs.iter().zip(&other.coeffs).fold(T::zero(), |m, (&a, &b)| m.max_of((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|v| v.is_finite())
    }

    /// Single-component copy of component `p`.
    pub fn component(&self, p: usize) -> Self {
        let mut out = Self::zeros(self.grid, self.degree, 1);
        for j in 0..self.n_cells() {
            out.cell_mut(j, 0).copy_from_slice(self.cell(j, p));
        }
        out
    }

    /// Stacks single-component states into one multi-component state.
    pub fn stack(parts: &[Self]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Config("no components to stack".into()))?;
        let c = parts.len();
        let mut out = Self::zeros(first.grid, first.degree, c);
        for (p, part) in parts.iter().enumerate() {
            if part.components != 1 || part.degree != first.degree || part.grid != first.grid {
                return Err(Error::Config("stacked states must be scalar on a shared grid".into()));
            }
            for j in 0..first.n_cells() {
                out.cell_mut(j, p).copy_from_slice(part.cell(j, 0));
            }
        }
        Ok(out)
    }
}

/// Default projection quadrature: `k + 6` points per smooth piece.
pub fn default_points(k: usize) -> usize {
    k + 6
}

/// Reference sub-intervals of cell `j` delimited by interior breakpoints.
pub fn cell_pieces<T: Real>(grid: &Grid<T>, j: usize, breakpoints: &[T]) -> Vec<(T, T)> {
    let lo = grid.interface(j);
    let hi = grid.interface(j + 1);
    let h = grid.h();
    let margin = h * T::epsilon() * T::cst(64.0);
    let mut cuts: Vec<T> = Vec::new();
    for &b in breakpoints {
        let b = wrap(b);
        for shift in [-T::tau(), T::zero(), T::tau()] {
            let x = b + shift;
            if x > lo + margin && x < hi - margin {
                cuts.push((x - grid.center(j)) * T::cst(2.0) / h);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut pieces = Vec::with_capacity(cuts.len() + 1);
    let mut start = -T::one();
    for c in cuts {
        pieces.push((start, c));
        start = c;
    }
    pieces.push((start, T::one()));
    pieces
}

/// `(2n + 1)/2 ∫_{-1}^{1} f(y) φ_n(y) dy` for `n <= k`, integrating each
/// piece with `rule`.
pub fn project_pieces<T: Real>(f: impl Fn(T) -> T, k: usize, rule: &QuadratureRule<T>, pieces: &[(T, T)]) -> Vec<T> {
    let mut out = vec![T::zero(); k + 1];
    for &(a, b) in pieces {
        let mid = (a + b) * T::half();
        let rad = (b - a) * T::half();
        for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
            let y = mid + rad * s;
            let fy = f(y) * w * rad;
            for (n, p) in legendre_all(k, y).into_iter().enumerate() {
                out[n] += fy * p;
            }
        }
    }
    for (n, v) in out.iter_mut().enumerate() {
        *v *= T::from_usize_exact(2 * n + 1) * T::half();
    }
    out
}

/// L2 projection of a function of the reference coordinate `y ∈ [-1, 1]`.
pub fn l2_project_reference<T: Real>(f: impl Fn(T) -> T, k: usize, q: usize) -> Result<Vec<T>> {
    let rule = gauss_rule(q)?;
    Ok(project_pieces(f, k, &rule, &[(-T::one(), T::one())]))
}

/// Gauss-Radau projection on the reference cell: L2 modes below `k`, then
/// the top mode fixed by matching `f(1)`.
pub fn gauss_radau_reference<T: Real>(f: impl Fn(T) -> T, k: usize, q: usize) -> Result<Vec<T>> {
    let mut c = l2_project_reference(&f, k, q)?;
    radau_close(&mut c, f(T::one()));
    Ok(c)
}

/// Replaces the top coefficient so that `Σ c_n = downwind`.
fn radau_close<T: Real>(c: &mut [T], downwind: T) {
    let k = c.len() - 1;
    let lower: T = c[..k].iter().copied().sum();
    c[k] = downwind - lower;
}

fn project_derivative<T: Real>(
    f: &dyn SmoothField<T>,
    order: usize,
    grid: &Grid<T>,
    k: usize,
    rule: &QuadratureRule<T>,
    breakpoints: &[T],
    j: usize,
) -> Vec<T> {
    let pieces = cell_pieces(grid, j, breakpoints);
    project_pieces(|y| f.derivative(order, grid.to_physical(j, y)), k, rule, &pieces)
}

/// L2 projection onto piecewise `P_k` with `k + 6` Gauss points per piece.
pub fn l2_project<T: Real>(f: &dyn SmoothField<T>, grid: &Grid<T>, k: usize) -> Result<DGState<T>> {
    l2_project_with(f, grid, k, default_points(k))
}

pub fn l2_project_with<T: Real>(f: &dyn SmoothField<T>, grid: &Grid<T>, k: usize, q: usize) -> Result<DGState<T>> {
    let rule = gauss_rule(q)?;
    let breaks = f.breakpoints();
    let mut out = DGState::zeros(*grid, k, 1);
    for j in 0..grid.n_cells() {
        let c = project_derivative(f, 0, grid, k, &rule, &breaks, j);
        out.cell_mut(j, 0).copy_from_slice(&c);
    }
    Ok(out)
}

/// Gauss-Radau projection `P_h^-`: orthogonal to `P_{k-1}` on every cell and
/// exact at the downwind point `x_{j+1/2}^-`.
///
/// The local system is lower triangular in the Legendre basis, so the top
/// coefficient is closed directly from the interpolation condition.
pub fn gauss_radau_project<T: Real>(f: &dyn SmoothField<T>, grid: &Grid<T>, k: usize) -> Result<DGState<T>> {
    let rule = gauss_rule(default_points(k))?;
    let breaks = f.breakpoints();
    let mut out = DGState::zeros(*grid, k, 1);
    for j in 0..grid.n_cells() {
        let mut c = project_derivative(f, 0, grid, k, &rule, &breaks, j);
        radau_close(&mut c, f.eval(grid.interface(j + 1)));
        out.cell_mut(j, 0).copy_from_slice(&c);
    }
    Ok(out)
}

/// Correction functions `w_1..w_l` refining `P_h^-` toward the special
/// interpolant.
#[derive(Clone, Debug)]
pub struct CorrectionSet<T> {
    pub level: usize,
    /// `polys[i - 1]` is `w_i`.
    pub polys: Vec<DGState<T>>,
    /// `sources[i - 1]` holds `(∂_t w_{i-1}, φ_{j,n})` for `n = 0..=k`.
    pub sources: Vec<DGState<T>>,
}

/// Solver for `(w, φ_n') = r_n` (n = 1..k) with `w(x_{j+1/2}^-) = 0`.
struct DownwindInverse<T> {
    lu: Option<Lu<T>>,
    k: usize,
}

impl<T: Real> DownwindInverse<T> {
    fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Ok(Self { lu: None, k });
        }
        // (w, φ_n')_τ = Σ_m c_m ∫ φ_m φ_n' dy: the h/2 factors cancel.
        let a = DenseMatrix::from_fn(k + 1, |row, m| if row == 0 { T::one() } else { ScaledBasis::stiffness(m, row) });
        Ok(Self { lu: Some(a.lu()?), k })
    }

    /// `inner[n] = (z, φ_{j,n})`; returns the coefficients of `w`.
    fn apply(&self, inner: &[T]) -> Vec<T> {
        match &self.lu {
            None => vec![T::zero(); self.k + 1],
            Some(lu) => {
                let mut rhs = inner.to_vec();
                rhs[0] = T::zero();
                lu.solve(&rhs)
            }
        }
    }
}

/// `w_i` from `(w_i, v_x) = (∂_t w_{i-1}, v)`, `w_i^- = 0`, with
/// `w_0 = u - P_h^- u` and `∂_t = -∂_x` along the characteristics.
pub fn correction_functions<T: Real>(
    f: &dyn SmoothField<T>,
    grid: &Grid<T>,
    k: usize,
    level: usize,
) -> Result<CorrectionSet<T>> {
    if level > k {
        return Err(Error::Config(format!("correction level {level} exceeds degree {k}")));
    }
    require_order(f, k + level + 1)?;
    let rule = gauss_rule(default_points(k))?;
    let breaks = f.breakpoints();
    let inverse = DownwindInverse::new(k)?;
    let h = grid.h();
    let mass: Vec<T> = (0..=k).map(|n| ScaledBasis::mass(n, h)).collect();
    let mut polys: Vec<DGState<T>> = (0..level).map(|_| DGState::zeros(*grid, k, 1)).collect();
    let mut sources = polys.clone();
    for j in 0..grid.n_cells() {
        for i in 1..=level {
            // ∂_t^i w_0 = (-1)^i (I - P_h^-) g^{(i)}; only the top moment
            // survives because P_h^- matches every lower moment.
            let l2 = project_derivative(f, i, grid, k, &rule, &breaks, j);
            let mut radau = l2.clone();
            radau_close(&mut radau, f.derivative(i, grid.interface(j + 1)));
            let sign = if i % 2 == 0 { T::one() } else { -T::one() };
            let mut inner: Vec<T> = (0..=k).map(|n| sign * (l2[n] - radau[n]) * mass[n]).collect();
            for step in 1..=i {
                if step == i {
                    sources[i - 1].cell_mut(j, 0).copy_from_slice(&inner);
                }
                let w = inverse.apply(&inner);
                inner = (0..=k).map(|n| w[n] * mass[n]).collect();
                if step == i {
                    polys[i - 1].cell_mut(j, 0).copy_from_slice(&w);
                }
            }
        }
    }
    Ok(CorrectionSet { level, polys, sources })
}

/// `u_I^l = P_h^- g - Σ_{i=1}^{l} w_i`.
pub fn special_interpolant<T: Real>(
    f: &dyn SmoothField<T>,
    grid: &Grid<T>,
    k: usize,
    level: usize,
) -> Result<DGState<T>> {
    let mut out = gauss_radau_project(f, grid, k)?;
    if level == 0 {
        return Ok(out);
    }
    let set = correction_functions(f, grid, k, level)?;
    for w in &set.polys {
        out.axpy(-T::one(), w);
    }
    Ok(out)
}

/// Initial discretization choices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InitKind {
    L2,
    GaussRadau,
    /// `u_I^l`; `Special(0)` coincides with Gauss-Radau.
    Special(usize),
}

impl InitKind {
    /// Coefficient `κ` multiplying `g^{(2k+1)}` in the asymptotic cell-average
    /// error: `k` for L2, `k - l - 1` for `u_I^l`.
    pub fn kappa(self, k: usize) -> i64 {
        match self {
            InitKind::L2 => k as i64,
            InitKind::GaussRadau => k as i64 - 1,
            InitKind::Special(l) => k as i64 - l as i64 - 1,
        }
    }

    pub fn label(self) -> String {
        match self {
            InitKind::L2 => "l2".into(),
            InitKind::GaussRadau => "gauss_radau".into(),
            InitKind::Special(l) => format!("special{l}"),
        }
    }
}

impl std::fmt::Display for InitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "l2" => Ok(InitKind::L2),
            "gauss_radau" | "gauss-radau" | "radau" | "gr" => Ok(InitKind::GaussRadau),
            _ => {
                let digits =
                    t.strip_prefix("special(").and_then(|r| r.strip_suffix(')')).or_else(|| t.strip_prefix("special"));
                digits
                    .and_then(|d| d.parse().ok())
                    .map(InitKind::Special)
                    .ok_or_else(|| Error::Config(format!("unknown init kind `{s}`")))
            }
        }
    }
}

/// Discretizes `f` according to `kind`.
pub fn initialize<T: Real>(kind: InitKind, f: &dyn SmoothField<T>, grid: &Grid<T>, k: usize) -> Result<DGState<T>> {
    match kind {
        InitKind::L2 => l2_project(f, grid, k),
        InitKind::GaussRadau => gauss_radau_project(f, grid, k),
        InitKind::Special(l) => special_interpolant(f, grid, k, l),
    }
}
