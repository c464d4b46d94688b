//! Semi-discrete DG operator for `u_t + A u_x = 0` on a periodic grid and
//! explicit Runge-Kutta time stepping.
//!
//! Both fluxes are written as a splitting `F = A⁺ u⁻ + A⁻ u⁺`:
//! upwind uses `A± = (a ± |a|)/2` (scalar only), Lax-Friedrichs uses
//! `A± = (A ± M I)/2`. With `M = |a|` the two splittings are the same
//! numbers, so the two fluxes produce bit-identical trajectories.

use std::sync::Arc;

use num_complex::Complex;

use crate::basis::Grid;
use crate::error::{Error, Result};
use crate::field::{FieldRef, LinearCombination, Shifted};
use crate::linalg::{eigen, DenseMatrix};
use crate::projections::DGState;
use crate::scalar::Real;

/// Constant-coefficient hyperbolic system `u_t + A u_x = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdvectionSystem<T> {
    matrix: DenseMatrix<T>,
    speeds: Vec<T>,
    /// Columns are right characteristic vectors.
    right: DenseMatrix<T>,
    /// Rows are left characteristic vectors, `left = right⁻¹`.
    left: DenseMatrix<T>,
}

impl<T: Real> AdvectionSystem<T> {
    pub fn scalar(a: T) -> Self {
        let one = DenseMatrix::identity(1);
        Self { matrix: DenseMatrix::from_rows(&[vec![a]]), speeds: vec![a], right: one.clone(), left: one }
    }

    /// Diagonalizes `rows`; fails unless every eigenvalue is real.
    pub fn from_matrix(rows: &[Vec<T>]) -> Result<Self> {
        let matrix = DenseMatrix::from_rows(rows);
        let c = matrix.size();
        if c == 1 {
            return Ok(Self::scalar(matrix[(0, 0)]));
        }
        let cm = DenseMatrix::from_fn(c, |i, j| Complex::new(matrix[(i, j)], T::zero()));
        let eig = eigen(&cm, 0)?;
        let scale = matrix.norm_inf().max_of(T::one());
        let tol = T::epsilon().sqrt() * scale;
        let mut pairs: Vec<(T, Vec<T>)> = Vec::with_capacity(c);
        for (lambda, r) in eig.values.iter().zip(&eig.right) {
            if lambda.im.abs() > tol {
                return Err(Error::NotHyperbolic { re: lambda.re.as_f64(), im: lambda.im.as_f64() });
            }
            let pivot = r
                .iter()
                .copied()
                .max_by(|a, b| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap_or(std::cmp::Ordering::Equal))
                .unwrap_or(Complex::new(T::one(), T::zero()));
            let mut v: Vec<T> = r.iter().map(|&e| (e / pivot).re).collect();
            let norm = v.iter().map(|&e| e * e).sum::<T>().sqrt();
            let first = v.iter().copied().find(|e| !e.is_zero()).unwrap_or(T::one());
            let s = if first < T::zero() { -norm } else { norm };
            for e in &mut v {
                *e /= s;
            }
            pairs.push((lambda.re, v));
        }
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
        let speeds: Vec<T> = pairs.iter().map(|p| p.0).collect();
        let right = DenseMatrix::from_fn(c, |i, j| pairs[j].1[i]);
        let left = right.lu()?.inverse();
        let sys = Self { matrix, speeds, right, left };
        let resid = sys.reconstruction_residual();
        if !(resid <= T::cst(1e-12) * scale) {
            return Err(Error::NotHyperbolic { re: resid.as_f64(), im: 0.0 });
        }
        Ok(sys)
    }

    /// Acoustics linearized about `(ρ0, u0)` with sound speed `c`:
    /// `A = [[u0, ρ0], [c²/ρ0, u0]]`, speeds `u0 ± c`.
    pub fn linearized_euler(rho0: T, u0: T, c: T) -> Result<Self> {
        Self::from_matrix(&[vec![u0, rho0], vec![c * c / rho0, u0]])
    }

    pub fn components(&self) -> usize {
        self.speeds.len()
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }

    /// Characteristic speeds in descending order.
    pub fn speeds(&self) -> &[T] {
        &self.speeds
    }

    pub fn right(&self) -> &DenseMatrix<T> {
        &self.right
    }

    pub fn left(&self) -> &DenseMatrix<T> {
        &self.left
    }

    pub fn max_speed(&self) -> T {
        self.speeds.iter().fold(T::zero(), |m, &a| m.max_of(a.abs()))
    }

    /// `max |A - R diag(a) L|`.
    pub fn reconstruction_residual(&self) -> T {
        let c = self.components();
        let mut worst = T::zero();
        for i in 0..c {
            for j in 0..c {
                let mut acc = T::zero();
                for p in 0..c {
                    acc += self.right[(i, p)] * self.speeds[p] * self.left[(p, j)];
                }
                worst = worst.max_of((acc - self.matrix[(i, j)]).abs());
            }
        }
        worst
    }

    /// Characteristic variables `w_p = Σ_q L_pq u_q`, one scalar state each.
    pub fn decompose(&self, state: &DGState<T>) -> Vec<DGState<T>> {
        transform(state, &self.left)
            .map(|s| (0..self.components()).map(|p| s.component(p)).collect())
            .unwrap_or_default()
    }

    /// Inverse of [`decompose`](Self::decompose).
    pub fn recompose(&self, waves: &[DGState<T>]) -> Result<DGState<T>> {
        let stacked = DGState::stack(waves)?;
        transform(&stacked, &self.right)
    }

    /// Characteristic initial data `w_p(x, 0) = Σ_q L_pq g_q(x)`.
    pub fn characteristic_fields(&self, initial: &[FieldRef<T>]) -> Vec<FieldRef<T>> {
        let c = self.components();
        (0..c)
            .map(|p| {
                if c == 1 {
                    return initial[0].clone();
                }
                let terms = (0..c).map(|q| (self.left[(p, q)], initial[q].clone())).collect();
                Arc::new(LinearCombination::new(terms)) as FieldRef<T>
            })
            .collect()
    }

    /// Exact solution components at time `t`: every wave advected by its own
    /// speed, then recombined.
    pub fn exact_fields(&self, initial: &[FieldRef<T>], t: T) -> Vec<FieldRef<T>> {
        let c = self.components();
        let waves: Vec<FieldRef<T>> = self
            .characteristic_fields(initial)
            .into_iter()
            .zip(&self.speeds)
            .map(|(w, &a)| Arc::new(Shifted::new(w, a * t)) as FieldRef<T>)
            .collect();
        if c == 1 {
            return waves;
        }
        (0..c)
            .map(|r| {
                let terms = (0..c).map(|p| (self.right[(r, p)], waves[p].clone())).collect();
                Arc::new(LinearCombination::new(terms)) as FieldRef<T>
            })
            .collect()
    }
}

fn transform<T: Real>(state: &DGState<T>, m: &DenseMatrix<T>) -> Result<DGState<T>> {
    let c = state.components();
    if m.size() != c {
        return Err(Error::Config(format!("state has {c} components, system has {}", m.size())));
    }
    let mut out = DGState::zeros(*state.grid(), state.degree(), c);
    for j in 0..state.n_cells() {
        for p in 0..c {
            for q in 0..c {
                let w = m[(p, q)];
                if w.is_zero() {
                    continue;
                }
                let src: Vec<T> = state.cell(j, q).to_vec();
                for (o, s) in out.cell_mut(j, p).iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }
    }
    Ok(out)
}

/// Interface flux choice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FluxSpec<T> {
    /// Exact upwinding; scalar systems only.
    Upwind,
    /// `F* = (f(u⁻) + f(u⁺))/2 - M (u⁺ - u⁻)/2`.
    LaxFriedrichs { m: T },
}

impl<T: Real> FluxSpec<T> {
    pub fn validate(&self, system: &AdvectionSystem<T>) -> Result<()> {
        match *self {
            FluxSpec::Upwind if system.components() != 1 => {
                Err(Error::Config("upwind flux is only available for scalar systems".into()))
            }
            FluxSpec::LaxFriedrichs { m } if !(m > T::zero()) => {
                Err(Error::Config(format!("Lax-Friedrichs coefficient must be positive, got {m}")))
            }
            _ => Ok(()),
        }
    }

    /// Signal speed bounding the time step.
    pub fn max_signal_speed(&self, system: &AdvectionSystem<T>) -> T {
        match *self {
            FluxSpec::Upwind => system.max_speed(),
            FluxSpec::LaxFriedrichs { m } => system.max_speed().max_of(m),
        }
    }

    /// Dissipation rate per unit jump: `|a|` for upwind, `M` otherwise.
    pub fn dissipation(&self, system: &AdvectionSystem<T>) -> T {
        match *self {
            FluxSpec::Upwind => system.max_speed(),
            FluxSpec::LaxFriedrichs { m } => m,
        }
    }

    /// `(A⁺, A⁻)` of the flux splitting.
    pub fn splitting(&self, system: &AdvectionSystem<T>) -> Result<(DenseMatrix<T>, DenseMatrix<T>)> {
        self.validate(system)?;
        let a = system.matrix();
        let c = system.components();
        Ok(match *self {
            FluxSpec::Upwind => {
                let s = a[(0, 0)];
                (
                    DenseMatrix::from_rows(&[vec![s.max_of(T::zero())]]),
                    DenseMatrix::from_rows(&[vec![s.min_of(T::zero())]]),
                )
            }
            FluxSpec::LaxFriedrichs { m } => {
                let plus = DenseMatrix::from_fn(c, |i, j| {
                    let d = if i == j { m } else { T::zero() };
                    (a[(i, j)] + d) * T::half()
                });
                let minus = DenseMatrix::from_fn(c, |i, j| {
                    let d = if i == j { m } else { T::zero() };
                    (a[(i, j)] - d) * T::half()
                });
                (plus, minus)
            }
        })
    }
}

/// The semi-discrete right-hand side `d/dt coeffs = L(coeffs)`.
#[derive(Clone, Debug)]
pub struct DGOperator<T> {
    system: AdvectionSystem<T>,
    flux: FluxSpec<T>,
    plus: DenseMatrix<T>,
    minus: DenseMatrix<T>,
}

impl<T: Real> DGOperator<T> {
    pub fn new(system: AdvectionSystem<T>, flux: FluxSpec<T>) -> Result<Self> {
        let (plus, minus) = flux.splitting(&system)?;
        Ok(Self { system, flux, plus, minus })
    }

    pub fn system(&self) -> &AdvectionSystem<T> {
        &self.system
    }

    pub fn flux(&self) -> &FluxSpec<T> {
        &self.flux
    }

    /// Interface fluxes; entry `i` lives at `x_{i+1/2}`, the right edge of
    /// cell `i`.
    fn interface_fluxes(&self, u: &DGState<T>) -> Vec<T> {
        let n = u.n_cells();
        let c = u.components();
        let mut out = vec![T::zero(); n * c];
        let mut um = vec![T::zero(); c];
        let mut up = vec![T::zero(); c];
        for i in 0..n {
            let r = (i + 1) % n;
            for p in 0..c {
                um[p] = u.right_trace(i, p);
                up[p] = u.left_trace(r, p);
            }
            for p in 0..c {
                let mut f = T::zero();
                for q in 0..c {
                    f += self.plus[(p, q)] * um[q] + self.minus[(p, q)] * up[q];
                }
                out[i * c + p] = f;
            }
        }
        out
    }

    /// Writes `L(u)` into `out`.
    pub fn apply_into(&self, u: &DGState<T>, out: &mut DGState<T>) -> Result<()> {
        let c = u.components();
        if c != self.system.components() {
            return Err(Error::Config(format!("state has {c} components, system has {}", self.system.components())));
        }
        let k = u.degree();
        let n = u.n_cells();
        let h = u.grid().h();
        let flux = self.interface_fluxes(u);
        let a = self.system.matrix();
        let two = T::cst(2.0);
        let mut au = vec![T::zero(); k + 1];
        for j in 0..n {
            let jl = (j + n - 1) % n;
            for p in 0..c {
                au.iter_mut().for_each(|v| *v = T::zero());
                for q in 0..c {
                    let w = a[(p, q)];
                    for (m, &cq) in u.cell(j, q).iter().enumerate() {
                        au[m] += w * cq;
                    }
                }
                let fr = flux[j * c + p];
                let fl = flux[jl * c + p];
                let dst = out.cell_mut(j, p);
                for (nn, d) in dst.iter_mut().enumerate() {
                    // (f(u), φ_n') = Σ_{m < n, m + n odd} 2 (A u)_m.
                    let mut vol = T::zero();
                    let mut m = (nn + 1) % 2;
                    while m < nn {
                        vol += two * au[m];
                        m += 2;
                    }
                    let edge = if nn % 2 == 0 { fl } else { -fl };
                    *d = T::from_usize_exact(2 * nn + 1) / h * (vol - fr + edge);
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, u: &DGState<T>) -> Result<DGState<T>> {
        let mut out = DGState::zeros(*u.grid(), u.degree(), u.components());
        self.apply_into(u, &mut out)?;
        Ok(out)
    }

    /// Nominal step `cfl · h / s_max`.
    pub fn nominal_dt(&self, grid: &Grid<T>, cfl: T) -> T {
        cfl * grid.h() / self.flux.max_signal_speed(&self.system)
    }
}

/// `d/dt ‖u‖² = 2 (L(u), u)`.
pub fn energy_rate<T: Real>(op: &DGOperator<T>, u: &DGState<T>) -> Result<T> {
    let r = op.apply(u)?;
    Ok(T::cst(2.0) * r.inner(u))
}

/// `Σ_p Σ_i [w_p]²_{i+1/2}` over characteristic variables `w = L u`.
pub fn characteristic_jumps<T: Real>(system: &AdvectionSystem<T>, u: &DGState<T>) -> T {
    let mut acc = T::zero();
    for w in system.decompose(u) {
        let n = w.n_cells();
        for i in 0..n {
            let jump = w.left_trace((i + 1) % n, 0) - w.right_trace(i, 0);
            acc += jump * jump;
        }
    }
    acc
}

/// Explicit Runge-Kutta method stored as exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ButcherTableau {
    pub name: &'static str,
    /// Strictly lower-triangular stage matrix, row `i` has `i` entries.
    pub a: Vec<Vec<(i64, i64)>>,
    pub b: Vec<(i64, i64)>,
    pub c: Vec<(i64, i64)>,
}

impl ButcherTableau {
    /// Six-stage Fehlberg method with its fifth-order weights.
    pub fn fehlberg5() -> Self {
        Self {
            name: "fehlberg5",
            a: vec![
                vec![],
                vec![(1, 4)],
                vec![(3, 32), (9, 32)],
                vec![(1932, 2197), (-7200, 2197), (7296, 2197)],
                vec![(439, 216), (-8, 1), (3680, 513), (-845, 4104)],
                vec![(-8, 27), (2, 1), (-3544, 2565), (1859, 4104), (-11, 40)],
            ],
            b: vec![(16, 135), (0, 1), (6656, 12825), (28561, 56430), (-9, 50), (2, 55)],
            c: vec![(0, 1), (1, 4), (3, 8), (12, 13), (1, 1), (1, 2)],
        }
    }

    /// Classical fourth-order method.
    pub fn rk4() -> Self {
        Self {
            name: "rk4",
            a: vec![vec![], vec![(1, 2)], vec![(0, 1), (1, 2)], vec![(0, 1), (0, 1), (1, 1)]],
            b: vec![(1, 6), (1, 3), (1, 3), (1, 6)],
            c: vec![(0, 1), (1, 2), (1, 2), (1, 1)],
        }
    }

    pub fn registry() -> Vec<Self> {
        vec![Self::fehlberg5(), Self::rk4()]
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Self::registry()
            .into_iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::Config(format!("unknown Runge-Kutta scheme `{name}`")))
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }
}

fn ratio<T: Real>((p, q): (i64, i64)) -> T {
    T::from_i64(p).expect("small") / T::from_i64(q).expect("small")
}

/// Time-integration parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig<T> {
    pub cfl: T,
    pub scheme: ButcherTableau,
    pub t_final: T,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn new(t_final: T) -> Self {
        Self { cfl: T::cst(0.1), scheme: ButcherTableau::fehlberg5(), t_final }
    }
}

/// One explicit RK step with pre-converted coefficients.
struct Stepper<T> {
    a: Vec<Vec<T>>,
    b: Vec<T>,
    stages: Vec<DGState<T>>,
    work: DGState<T>,
}

impl<T: Real> Stepper<T> {
    fn new(scheme: &ButcherTableau, like: &DGState<T>) -> Self {
        let a = scheme.a.iter().map(|row| row.iter().map(|&r| ratio(r)).collect()).collect();
        let b = scheme.b.iter().map(|&r| ratio(r)).collect();
        let zero = DGState::zeros(*like.grid(), like.degree(), like.components());
        Self { a, b, stages: vec![zero.clone(); scheme.stages()], work: zero }
    }

    fn step(&mut self, op: &DGOperator<T>, u: &mut DGState<T>, dt: T) -> Result<()> {
        for s in 0..self.b.len() {
            self.work.coeffs_mut().copy_from_slice(u.coeffs());
            for (i, &aij) in self.a[s].iter().enumerate() {
                if !aij.is_zero() {
                    self.work.axpy(dt * aij, &self.stages[i]);
                }
            }
            op.apply_into(&self.work, &mut self.stages[s])?;
        }
        for (s, &bs) in self.b.iter().enumerate() {
            if !bs.is_zero() {
                u.axpy(dt * bs, &self.stages[s]);
            }
        }
        Ok(())
    }
}

/// Steps from `t0` to `t1` with `dt_nom`, truncating the final step.
fn advance<T: Real>(
    op: &DGOperator<T>,
    stepper: &mut Stepper<T>,
    u: &mut DGState<T>,
    t0: T,
    t1: T,
    dt_nom: T,
    observer: &mut dyn FnMut(T, &DGState<T>),
) -> Result<()> {
    let span = t1 - t0;
    if !(span > T::zero()) {
        return Ok(());
    }
    let steps = (span / dt_nom * (T::one() - T::cst(1e-12))).floor().to_usize().unwrap_or(0) + 1;
    for i in 0..steps {
        let start = t0 + T::from_usize_exact(i) * dt_nom;
        let end = if i + 1 == steps { t1 } else { t0 + T::from_usize_exact(i + 1) * dt_nom };
        stepper.step(op, u, end - start)?;
        if !u.is_finite() {
            return Err(Error::NonFinite { t: end.as_f64() });
        }
        observer(end, u);
    }
    Ok(())
}

/// Advances `state0` to `config.t_final`, calling `observer` after every
/// accepted step.
pub fn integrate_observed<T: Real>(
    state0: &DGState<T>,
    op: &DGOperator<T>,
    config: &IntegratorConfig<T>,
    observer: &mut dyn FnMut(T, &DGState<T>),
) -> Result<DGState<T>> {
    if config.t_final < T::zero() {
        return Err(Error::Config("t_final must be non-negative".into()));
    }
    if !(config.cfl > T::zero()) {
        return Err(Error::Config("cfl must be positive".into()));
    }
    let mut u = state0.clone();
    let dt = op.nominal_dt(state0.grid(), config.cfl);
    let mut stepper = Stepper::new(&config.scheme, state0);
    advance(op, &mut stepper, &mut u, T::zero(), config.t_final, dt, observer)?;
    Ok(u)
}

/// Advances `state0` to `config.t_final`.
pub fn integrate<T: Real>(
    state0: &DGState<T>,
    system: &AdvectionSystem<T>,
    flux: &FluxSpec<T>,
    config: &IntegratorConfig<T>,
) -> Result<DGState<T>> {
    let op = DGOperator::new(system.clone(), *flux)?;
    integrate_observed(state0, &op, config, &mut |_, _| {})
}

/// States at each of the non-decreasing `times`, stepping between
/// consecutive outputs with the nominal step and landing on each exactly.
pub fn integrate_to_times<T: Real>(
    state0: &DGState<T>,
    op: &DGOperator<T>,
    cfl: T,
    scheme: &ButcherTableau,
    times: &[T],
) -> Result<Vec<DGState<T>>> {
    let dt = op.nominal_dt(state0.grid(), cfl);
    let mut stepper = Stepper::new(scheme, state0);
    let mut u = state0.clone();
    let mut t = T::zero();
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < t {
            return Err(Error::Config("output times must be non-decreasing and non-negative".into()));
        }
        advance(op, &mut stepper, &mut u, t, target, dt, &mut |_, _| {})?;
        t = target;
        out.push(u.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Constant, SmoothField, TrigSeries};
    use crate::projections::l2_project;

    fn grid(n: usize) -> Grid<f64> {
        Grid::new(n).unwrap()
    }

    fn random_state(g: Grid<f64>, k: usize, c: usize, seed: u64) -> DGState<f64> {
        let mut s = DGState::zeros(g, k, c);
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        for v in s.coeffs_mut() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *v = ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
        }
        s
    }

    #[test]
    fn constant_state_is_steady() {
        let g = grid(10);
        let u = l2_project(&Constant(2.5), &g, 3).unwrap();
        for flux in [FluxSpec::Upwind, FluxSpec::LaxFriedrichs { m: 2.0 }] {
            let op = DGOperator::new(AdvectionSystem::scalar(1.0), flux).unwrap();
            let r = op.apply(&u).unwrap();
            assert!(r.coeffs().iter().all(|v| v.abs() < 1e-13));
        }
    }

    #[test]
    fn euler_speeds_and_round_trip() {
        let sys = AdvectionSystem::<f64>::linearized_euler(1.0, 1.0, 5.0).unwrap();
        assert!((sys.speeds()[0] - 6.0).abs() < 1e-14 && (sys.speeds()[1] + 4.0).abs() < 1e-14);
        assert!(sys.reconstruction_residual() < 1e-12);
        let u = random_state(grid(7), 2, 2, 3);
        let back = sys.recompose(&sys.decompose(&u)).unwrap();
        assert!(back.max_abs_diff(&u) < 1e-12);
        let scalar = AdvectionSystem::scalar(-2.0);
        let v = random_state(grid(5), 1, 1, 4);
        assert_eq!(scalar.decompose(&v)[0], v);
    }

    #[test]
    fn non_hyperbolic_matrix_is_rejected() {
        let err = AdvectionSystem::from_matrix(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::NotHyperbolic { .. }));
    }

    #[test]
    fn flux_validation() {
        let sys = AdvectionSystem::linearized_euler(1.0, 1.0, 5.0).unwrap();
        assert!(matches!(DGOperator::new(sys.clone(), FluxSpec::Upwind), Err(Error::Config(_))));
        assert!(matches!(DGOperator::new(sys, FluxSpec::LaxFriedrichs { m: 0.0 }), Err(Error::Config(_))));
    }

    #[test]
    fn energy_identities() {
        let g = grid(9);
        for k in 0..=4 {
            let u = random_state(g, k, 1, k as u64);
            for a in [1.0, -1.7] {
                let sys = AdvectionSystem::scalar(a);
                let op = DGOperator::new(sys.clone(), FluxSpec::Upwind).unwrap();
                let rate = energy_rate(&op, &u).unwrap();
                let expect = -a.abs() * characteristic_jumps(&sys, &u);
                assert!((rate - expect).abs() < 1e-11 * expect.abs(), "k={k} a={a}");
            }
            let sys = AdvectionSystem::linearized_euler(1.0, 1.0, 5.0).unwrap();
            let u2 = random_state(g, k, 2, 11 + k as u64);
            let op = DGOperator::new(sys.clone(), FluxSpec::LaxFriedrichs { m: 6.0 }).unwrap();
            // Energy of the characteristic variables.
            let waves = sys.decompose(&u2);
            let r = op.apply(&u2).unwrap();
            let rw = sys.decompose(&r);
            let rate: f64 = waves.iter().zip(&rw).map(|(w, d)| 2.0 * d.inner(w)).sum();
            let expect = -6.0 * characteristic_jumps(&sys, &u2);
            assert!((rate - expect).abs() < 1e-11 * expect.abs());
        }
    }

    #[test]
    fn mass_is_conserved_and_energy_decays() {
        let g = grid(16);
        let f = TrigSeries::<f64>::sin_power(4);
        let u0 = l2_project(&f, &g, 2).unwrap();
        let op = DGOperator::new(AdvectionSystem::scalar(1.0), FluxSpec::Upwind).unwrap();
        let m0 = u0.mass(0);
        let mut last = u0.energy();
        let mut ok = true;
        let u1 = integrate_observed(&u0, &op, &IntegratorConfig::new(0.5), &mut |_, u| {
            let e = u.energy();
            ok &= e <= last * (1.0 + 1e-15);
            last = e;
            ok &= (u.mass(0) - m0).abs() < 1e-12;
        })
        .unwrap();
        assert!(ok);
        assert!((u1.mass(0) - m0).abs() < 1e-12);
    }

    #[test]
    fn zero_time_is_identity_and_linear() {
        let g = grid(12);
        let sys = AdvectionSystem::scalar(1.0);
        let u = random_state(g, 2, 1, 1);
        let v = random_state(g, 2, 1, 2);
        let zero = integrate(&u, &sys, &FluxSpec::Upwind, &IntegratorConfig::new(0.0)).unwrap();
        assert_eq!(zero, u);
        let cfg = IntegratorConfig::new(0.3);
        let mut w = u.clone();
        w.scale(2.0);
        w.axpy(-3.0, &v);
        let lhs = integrate(&w, &sys, &FluxSpec::Upwind, &cfg).unwrap();
        let mut rhs = integrate(&u, &sys, &FluxSpec::Upwind, &cfg).unwrap();
        rhs.scale(2.0);
        rhs.axpy(-3.0, &integrate(&v, &sys, &FluxSpec::Upwind, &cfg).unwrap());
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn lax_friedrichs_with_matching_m_is_upwind_bitwise() {
        let g = grid(20);
        let u0 = l2_project(&TrigSeries::<f64>::sin_power(4), &g, 1).unwrap();
        let sys = AdvectionSystem::scalar(1.0);
        let cfg = IntegratorConfig::new(1.0);
        let a = integrate(&u0, &sys, &FluxSpec::Upwind, &cfg).unwrap();
        let b = integrate(&u0, &sys, &FluxSpec::LaxFriedrichs { m: 1.0 }, &cfg).unwrap();
        assert!(a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn tableaux_are_consistent() {
        for t in ButcherTableau::registry() {
            let bsum: f64 = t.b.iter().map(|&r| ratio::<f64>(r)).sum();
            assert!((bsum - 1.0).abs() < 1e-15, "{}", t.name);
            for (i, row) in t.a.iter().enumerate() {
                let rs: f64 = row.iter().map(|&r| ratio::<f64>(r)).sum();
                assert!((rs - ratio::<f64>(t.c[i])).abs() < 1e-15, "{} row {i}", t.name);
            }
        }
        assert!(ButcherTableau::by_name("nope").is_err());
    }

    #[test]
    fn time_stepping_is_fifth_order() {
        // One cell with k = 1 is a 2x2 linear ODE.
        let g = grid(1);
        let sys = AdvectionSystem::scalar(1.0);
        let op = DGOperator::new(sys, FluxSpec::LaxFriedrichs { m: 3.0 }).unwrap();
        let mut u = DGState::zeros(g, 1, 1);
        u.cell_mut(0, 0).copy_from_slice(&[0.0, 1.0]);
        let reference = {
            let cfg = IntegratorConfig { cfl: 0.002, scheme: ButcherTableau::fehlberg5(), t_final: 1.0 };
            integrate_observed(&u, &op, &cfg, &mut |_, _| {}).unwrap()
        };
        let err = |cfl: f64| {
            let cfg = IntegratorConfig { cfl, scheme: ButcherTableau::fehlberg5(), t_final: 1.0 };
            integrate_observed(&u, &op, &cfg, &mut |_, _| {}).unwrap().max_abs_diff(&reference)
        };
        let ratio = err(0.2) / err(0.1);
        assert!(ratio > 25.0, "ratio {ratio}");
    }

    #[test]
    fn output_times_land_exactly() {
        let g = grid(8);
        let u = random_state(g, 1, 1, 9);
        let op = DGOperator::new(AdvectionSystem::scalar(1.0), FluxSpec::Upwind).unwrap();
        let outs = integrate_to_times(&u, &op, 0.1, &ButcherTableau::fehlberg5(), &[0.0, 0.25, 0.25, 0.6]).unwrap();
        assert_eq!(outs[0], u);
        assert_eq!(outs[1], outs[2]);
        let direct = integrate(&u, op.system(), op.flux(), &IntegratorConfig::new(0.25)).unwrap();
        assert_eq!(outs[1], direct);
    }

    #[test]
    fn exact_fields_follow_characteristics() {
        let sys = AdvectionSystem::linearized_euler(1.0, 1.0, 5.0).unwrap();
        let rho: FieldRef<f64> = Arc::new(TrigSeries::sin_power(2));
        let vel: FieldRef<f64> = Arc::new(TrigSeries::sin_power(3));
        let t = 0.37;
        let ex = sys.exact_fields(&[rho.clone(), vel.clone()], t);
        // u_t + A u_x = 0 pointwise, time derivative by central difference.
        for &x in &[0.3, 2.0, 5.1] {
            let e = 1e-5;
            let later = sys.exact_fields(&[rho.clone(), vel.clone()], t + e);
            let earlier = sys.exact_fields(&[rho.clone(), vel.clone()], t - e);
            for r in 0..2 {
                let ut = (later[r].eval(x) - earlier[r].eval(x)) / (2.0 * e);
                let ax: f64 = (0..2).map(|q| sys.matrix()[(r, q)] * ex[q].derivative(1, x)).sum();
                assert!((ut + ax).abs() < 1e-7);
            }
        }
    }
}
