//! Error decomposition, norms, asymptotic predictors and convergence studies.
//!
//! The error `u - u_h` on cell `j` is expanded as `Σ_n e_{j,n} φ_{j,n}`;
//! `e_{j,0}` is the cell-average error. The downwind error is
//! `e_j^- = u(x_{j+1/2}) - u_h(x_{j+1/2}^-)`.

use std::fmt;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::basis::Grid;
use crate::error::{Error, Result};
use crate::field::{require_order, FieldRef, SmoothField};
use crate::projections::{initialize, l2_project, DGState, InitKind};
use crate::report::sig17;
use crate::scalar::Real;
use crate::solver::{
    integrate_observed, integrate_to_times, AdvectionSystem, ButcherTableau, DGOperator, FluxSpec, IntegratorConfig,
};
use crate::symbol::{c_k, chi, loglog_fit, ratio_to};

/// Legendre-mode and downwind errors of a state against the exact solution.
#[derive(Clone, Debug)]
pub struct ErrorDecomposition<T> {
    pub grid: Grid<T>,
    pub degree: usize,
    pub components: usize,
    /// Same layout as [`DGState::coeffs`].
    pub e_modes: Vec<T>,
    /// Index `j * components + p`.
    pub e_downwind: Vec<T>,
    pub time: T,
}

impl<T: Real> ErrorDecomposition<T> {
    pub fn n_cells(&self) -> usize {
        self.grid.n_cells()
    }

    /// `e_{j,n}` of component `p` for every cell.
    pub fn mode(&self, p: usize, n: usize) -> Vec<T> {
        let (c, k1) = (self.components, self.degree + 1);
        (0..self.n_cells()).map(|j| self.e_modes[(j * c + p) * k1 + n]).collect()
    }

    pub fn downwind(&self, p: usize) -> Vec<T> {
        (0..self.n_cells()).map(|j| self.e_downwind[j * self.components + p]).collect()
    }

    pub fn norms(&self, p: usize, n: usize) -> NormReport<T> {
        norms(&self.mode(p, n))
    }

    pub fn downwind_norms(&self, p: usize) -> NormReport<T> {
        norms(&self.downwind(p))
    }

    /// Norms of mode `n` pooled over all components; the pooled `l2` is the
    /// root mean square of the per-component `l2` values.
    pub fn pooled_norms(&self, n: usize) -> NormReport<T> {
        let all: Vec<T> = (0..self.components).flat_map(|p| self.mode(p, n)).collect();
        norms(&all)
    }

    pub fn pooled_downwind_norms(&self) -> NormReport<T> {
        norms(&self.e_downwind)
    }
}

/// Errors of `u_h` against `exact[p]`, the exact solution components at `t`.
pub fn decompose_error<T: Real>(u_h: &DGState<T>, exact: &[FieldRef<T>], t: T) -> Result<ErrorDecomposition<T>> {
    let c = u_h.components();
    if exact.len() != c {
        return Err(Error::Config(format!("{} exact fields for {c} components", exact.len())));
    }
    let grid = *u_h.grid();
    let k = u_h.degree();
    let mut e_modes = vec![T::zero(); u_h.coeffs().len()];
    let mut e_downwind = vec![T::zero(); grid.n_cells() * c];
    for (p, field) in exact.iter().enumerate() {
        let proj = l2_project(field.as_ref(), &grid, k)?;
        for j in 0..grid.n_cells() {
            let base = (j * c + p) * (k + 1);
            for (n, (&e, &h)) in proj.cell(j, 0).iter().zip(u_h.cell(j, p)).enumerate() {
                e_modes[base + n] = e - h;
            }
            e_downwind[j * c + p] = field.eval(grid.interface(j + 1)) - u_h.right_trace(j, p);
        }
    }
    Ok(ErrorDecomposition { grid, degree: k, components: c, e_modes, e_downwind, time: t })
}

/// Mean-based norms: `l1` is the mean, `l2` the root mean square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormReport<T> {
    pub l1: T,
    pub l2: T,
    pub linf: T,
}

pub fn norms<T: Real>(values: &[T]) -> NormReport<T> {
    if values.is_empty() {
        return NormReport { l1: T::zero(), l2: T::zero(), linf: T::zero() };
    }
    let n = T::from_usize_exact(values.len());
    let l1 = values.iter().map(|v| v.abs()).sum::<T>() / n;
    let l2 = (values.iter().map(|&v| v * v).sum::<T>() / n).sqrt();
    let linf = values.iter().fold(T::zero(), |m, v| m.max_of(v.abs()));
    NormReport { l1, l2, linf }
}

/// Discrete Fourier coefficients `f̂_m = (1/N) Σ_j f_j e^{-i m x_j}`, with
/// `x_j` the cell centers.
#[derive(Clone, Debug)]
pub struct FourierNorms {
    pub hat: Vec<Complex<f64>>,
}

impl FourierNorms {
    /// `Σ_{m=0}^{N-1} |f̂_m| m^s`.
    pub fn norm_s(&self, s: i32) -> f64 {
        self.hat.iter().enumerate().map(|(m, v)| v.norm() * (m as f64).powi(s)).sum()
    }

    /// `sqrt(Σ_{m=0}^{N-1} |f̂_m m^s|²)`.
    pub fn norm_s2(&self, s: i32) -> f64 {
        self.hat.iter().enumerate().map(|(m, v)| (v.norm() * (m as f64).powi(s)).powi(2)).sum::<f64>().sqrt()
    }

    /// Index `m` of slot `i` folded into `(-N/2, N/2]`.
    pub fn symmetric_index(&self, i: usize) -> i64 {
        let n = self.hat.len() as i64;
        let i = i as i64;
        if 2 * i > n {
            i - n
        } else {
            i
        }
    }

    /// [`norm_s`](Self::norm_s) with the folded index `|m|`.
    pub fn norm_s_symmetric(&self, s: i32) -> f64 {
        (0..self.hat.len()).map(|i| self.hat[i].norm() * (self.symmetric_index(i).unsigned_abs() as f64).powi(s)).sum()
    }

    /// [`norm_s2`](Self::norm_s2) with the folded index `|m|`.
    pub fn norm_s2_symmetric(&self, s: i32) -> f64 {
        (0..self.hat.len())
            .map(|i| (self.hat[i].norm() * (self.symmetric_index(i).unsigned_abs() as f64).powi(s)).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

pub fn fourier_norms(samples: &[f64]) -> FourierNorms {
    let c: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fourier_norms_complex(&c)
}

pub fn fourier_norms_complex(samples: &[Complex<f64>]) -> FourierNorms {
    let n = samples.len();
    if n == 0 {
        return FourierNorms { hat: Vec::new() };
    }
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    // The FFT sums over x = 2πj/N; cell centers sit half a cell to the right.
    let h = std::f64::consts::TAU / n as f64;
    let hat = buf
        .into_iter()
        .enumerate()
        .map(|(m, v)| v * Complex::from_polar(1.0 / n as f64, -(m as f64) * h / 2.0))
        .collect();
    FourierNorms { hat }
}

/// Per-cell limits of the scaled errors as `h → 0`.
#[derive(Clone, Debug)]
pub struct AsymptoticPrediction<T> {
    pub t: T,
    pub k: usize,
    pub init: InitKind,
    /// `sign(a) χ`.
    pub multiplier: T,
    pub centers: Vec<T>,
    /// Limit of `e_{j,0} / h^{2k+1}`; also the downwind limit.
    pub e0: Vec<T>,
    /// `modes[n-1][j]`: limit of `e_{j,n} / h^{2k+1-n}` for `1 ≤ n ≤ k`.
    pub modes: Vec<Vec<T>>,
}

impl<T: Real> AsymptoticPrediction<T> {
    pub fn downwind(&self) -> &[T] {
        &self.e0
    }
}

/// Closed-form limits for data `g` advected with speed `a`.
///
/// `e_0 / h^{2k+1} → sign(a) χ (-1)^k C_k [κ g^{(2k+1)}(x_j - at) - a t g^{(2k+2)}(x_j - at)]`
/// with `κ` from [`InitKind::kappa`], and for `1 ≤ n ≤ k`
/// `e_n / h^{2k+1-n} → sign(a) χ (-1)^{k+1-n} C_k (2n+1)!/n! g^{(2k+1-n)}(x_j - at)`.
pub fn asymptotic_error<T: Real>(
    g: &dyn SmoothField<T>,
    grid: &Grid<T>,
    t: T,
    k: usize,
    init: InitKind,
    a: T,
    flux: &FluxSpec<T>,
) -> Result<AsymptoticPrediction<T>> {
    require_order(g, 2 * k + 2)?;
    if a.is_zero() {
        return Err(Error::Config("advection speed must be nonzero".into()));
    }
    let sign = if a > T::zero() { T::one() } else { -T::one() };
    let multiplier = sign * chi(k, flux, a);
    let ck: T = ratio_to(&c_k(k));
    let parity = |p: usize| if p.is_multiple_of(2) { T::one() } else { -T::one() };
    let kappa = T::from_i64(init.kappa(k)).expect("small");
    let centers = grid.centers();
    let shift = a * t;
    let e0 = centers
        .iter()
        .map(|&x| {
            let y = x - shift;
            let bracket = kappa * g.derivative(2 * k + 1, y) - shift * g.derivative(2 * k + 2, y);
            multiplier * parity(k) * ck * bracket
        })
        .collect();
    let modes = (1..=k)
        .map(|n| {
            let coef = multiplier * parity(k + 1 - n) * ck * crate::scalar::factorial::<T>(2 * n + 1)
                / crate::scalar::factorial::<T>(n);
            centers.iter().map(|&x| coef * g.derivative(2 * k + 1 - n, x - shift)).collect()
        })
        .collect();
    Ok(AsymptoticPrediction { t, k, init, multiplier, centers, e0, modes })
}

/// Everything a single run needs besides `N`.
#[derive(Clone)]
pub struct Problem<T> {
    pub name: String,
    /// Initial data per physical component.
    pub initial: Vec<FieldRef<T>>,
    pub system: AdvectionSystem<T>,
    pub flux: FluxSpec<T>,
    pub init: InitKind,
    pub t_final: T,
    pub cfl: T,
    pub scheme: ButcherTableau,
}

impl<T: Real> fmt::Debug for Problem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("components", &self.initial.len())
            .field("flux", &self.flux)
            .field("init", &self.init)
            .field("t_final", &self.t_final)
            .field("cfl", &self.cfl)
            .field("scheme", &self.scheme.name)
            .finish()
    }
}

impl<T: Real> Problem<T> {
    pub fn operator(&self) -> Result<DGOperator<T>> {
        DGOperator::new(self.system.clone(), self.flux)
    }

    /// Componentwise initialization of the physical variables.
    pub fn initial_state(&self, grid: &Grid<T>, k: usize) -> Result<DGState<T>> {
        if self.initial.len() != self.system.components() {
            return Err(Error::Config(format!(
                "{} initial fields for a {}-component system",
                self.initial.len(),
                self.system.components()
            )));
        }
        let parts =
            self.initial.iter().map(|f| initialize(self.init, f.as_ref(), grid, k)).collect::<Result<Vec<_>>>()?;
        DGState::stack(&parts)
    }

    pub fn exact_at(&self, t: T) -> Vec<FieldRef<T>> {
        self.system.exact_fields(&self.initial, t)
    }

    fn config(&self) -> IntegratorConfig<T> {
        IntegratorConfig { cfl: self.cfl, scheme: self.scheme.clone(), t_final: self.t_final }
    }

    /// Solves to `t_final` on `N` cells and decomposes the final error.
    pub fn solve(&self, n_cells: usize, k: usize) -> Result<(DGState<T>, ErrorDecomposition<T>)> {
        let grid = Grid::new(n_cells)?;
        let u0 = self.initial_state(&grid, k)?;
        let op = self.operator()?;
        let u = integrate_observed(&u0, &op, &self.config(), &mut |_, _| {})?;
        let dec = decompose_error(&u, &self.exact_at(self.t_final), self.t_final)?;
        Ok((u, dec))
    }
}

/// Which error a convergence row measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Mode(usize),
    Downwind,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorKind::Mode(n) => write!(f, "{n}"),
            ErrorKind::Downwind => f.write_str("downwind"),
        }
    }
}

/// Physical component, or all components pooled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentSel {
    Single(usize),
    Combined,
}

impl fmt::Display for ComponentSel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentSel::Single(p) => write!(f, "{p}"),
            ComponentSel::Combined => f.write_str("combined"),
        }
    }
}

/// One line of a convergence table. Orders are `log2(err(N/2)/err(N))` with
/// respect to the previous row of the same series.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub l1: f64,
    pub order1: Option<f64>,
    pub l2: f64,
    pub order2: Option<f64>,
    pub linf: f64,
    pub orderinf: Option<f64>,
    pub kind: ErrorKind,
    pub component: ComponentSel,
}

#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    pub k: usize,
    pub ns: Vec<usize>,
    /// Grouped by (component, kind), ordered by N inside each group.
    pub rows: Vec<ConvergenceRow>,
    /// Runs that failed, with the diagnostic; rows for these N are absent.
    pub failures: Vec<(usize, String)>,
}

impl ConvergenceTable {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    /// Rows of one series ordered by N.
    pub fn series(&self, component: ComponentSel, kind: ErrorKind) -> Vec<&ConvergenceRow> {
        self.rows.iter().filter(|r| r.component == component && r.kind == kind).collect()
    }
}

fn order(prev: Option<(usize, f64)>, n: usize, value: f64) -> Option<f64> {
    let (pn, pv) = prev?;
    let ratio = n as f64 / pn as f64;
    (pv > 0.0 && value > 0.0 && ratio > 1.0).then(|| (pv / value).ln() / ratio.ln())
}

fn series_rows(samples: &[(usize, NormReport<f64>)], kind: ErrorKind, component: ComponentSel) -> Vec<ConvergenceRow> {
    let mut out = Vec::with_capacity(samples.len());
    let mut prev: Option<(usize, NormReport<f64>)> = None;
    for &(n, r) in samples {
        out.push(ConvergenceRow {
            n,
            l1: r.l1,
            order1: order(prev.map(|(pn, p)| (pn, p.l1)), n, r.l1),
            l2: r.l2,
            order2: order(prev.map(|(pn, p)| (pn, p.l2)), n, r.l2),
            linf: r.linf,
            orderinf: order(prev.map(|(pn, p)| (pn, p.linf)), n, r.linf),
            kind,
            component,
        });
        prev = Some((n, r));
    }
    out
}

fn to_f64(r: NormReport<impl Real>) -> NormReport<f64> {
    NormReport { l1: r.l1.as_f64(), l2: r.l2.as_f64(), linf: r.linf.as_f64() }
}

/// Solves `problem` for every `N` in `ns` (concurrently) and tabulates the
/// norms of every Legendre mode and of the downwind error.
pub fn convergence_study<T: Real>(problem: &Problem<T>, ns: &[usize], k: usize) -> Result<ConvergenceTable> {
    if ns.is_empty() || ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("N list must be non-empty and strictly increasing".into()));
    }
    let results: Vec<(usize, Result<ErrorDecomposition<T>>)> =
        ns.par_iter().map(|&n| (n, problem.solve(n, k).map(|(_, d)| d))).collect();
    let mut decs = Vec::new();
    let mut failures = Vec::new();
    for (n, r) in results {
        match r {
            Ok(d) => decs.push((n, d)),
            Err(e) => failures.push((n, e.to_string())),
        }
    }
    let c = problem.system.components();
    let mut selections: Vec<ComponentSel> = (0..c).map(ComponentSel::Single).collect();
    if c > 1 {
        selections.push(ComponentSel::Combined);
    }
    let mut kinds: Vec<ErrorKind> = (0..=k).map(ErrorKind::Mode).collect();
    kinds.push(ErrorKind::Downwind);
    let mut rows = Vec::new();
    for &sel in &selections {
        for &kind in &kinds {
            let samples: Vec<(usize, NormReport<f64>)> = decs
                .iter()
                .map(|(n, d)| {
                    let r = match (sel, kind) {
                        (ComponentSel::Single(p), ErrorKind::Mode(m)) => d.norms(p, m),
                        (ComponentSel::Single(p), ErrorKind::Downwind) => d.downwind_norms(p),
                        (ComponentSel::Combined, ErrorKind::Mode(m)) => d.pooled_norms(m),
                        (ComponentSel::Combined, ErrorKind::Downwind) => d.pooled_downwind_norms(),
                    };
                    (*n, to_f64(r))
                })
                .collect();
            rows.extend(series_rows(&samples, kind, sel));
        }
    }
    Ok(ConvergenceTable { k, ns: ns.to_vec(), rows, failures })
}

pub const CONVERGENCE_HEADER: [&str; 9] =
    ["N", "l1", "order1", "l2", "order2", "linf", "orderinf", "mode", "component"];

pub fn convergence_csv_rows(table: &ConvergenceTable) -> Vec<Vec<String>> {
    let ord = |o: Option<f64>| o.map(sig17).unwrap_or_default();
    table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                sig17(r.l1),
                ord(r.order1),
                sig17(r.l2),
                ord(r.order2),
                sig17(r.linf),
                ord(r.orderinf),
                r.kind.to_string(),
                r.component.to_string(),
            ]
        })
        .collect()
}

pub const PROFILE_HEADER: [&str; 6] = ["x_j", "measured_scaled_error", "predicted_scaled_error", "t", "N", "k"];

/// Scaled cell-average errors `e_{j,0}/h^{2k+1}` of component `p` next to
/// the prediction.
pub fn profile_csv_rows<T: Real>(
    dec: &ErrorDecomposition<T>,
    pred: &AsymptoticPrediction<T>,
    p: usize,
) -> Vec<Vec<String>> {
    let k = dec.degree;
    let scale = dec.grid.h().powi(2 * k as i32 + 1);
    let e0 = dec.mode(p, 0);
    (0..dec.n_cells())
        .map(|j| {
            vec![
                sig17(pred.centers[j].as_f64()),
                sig17((e0[j] / scale).as_f64()),
                sig17(pred.e0[j].as_f64()),
                sig17(dec.time.as_f64()),
                dec.n_cells().to_string(),
                k.to_string(),
            ]
        })
        .collect()
}

/// `max_j |e_{j,0}/h^{2k+1} - prediction_j|` for component 0.
pub fn prediction_deviation<T: Real>(dec: &ErrorDecomposition<T>, pred: &AsymptoticPrediction<T>) -> T {
    let scale = dec.grid.h().powi(2 * dec.degree as i32 + 1);
    dec.mode(0, 0).iter().zip(&pred.e0).fold(T::zero(), |m, (&e, &p)| m.max_of((e / scale - p).abs()))
}

/// Scaled cell-average error along a trajectory for one initialization.
#[derive(Clone, Debug)]
pub struct TransientSeries {
    pub init: InitKind,
    pub n: usize,
    pub k: usize,
    pub times: Vec<f64>,
    /// `‖e_0(t)‖_∞ / h^{2k+1}`.
    pub scaled_linf: Vec<f64>,
    /// `max_j |e_{j,0}(t)/h^{2k+1} - prediction_j(t)|`.
    pub deviation: Vec<f64>,
}

/// Runs a scalar problem once per initialization and samples the scaled
/// cell-average error at `times`.
pub fn transient_profile<T: Real>(
    problem: &Problem<T>,
    n_cells: usize,
    k: usize,
    inits: &[InitKind],
    times: &[T],
) -> Result<Vec<TransientSeries>> {
    if problem.system.components() != 1 {
        return Err(Error::Config("transient profiles are defined for scalar problems".into()));
    }
    let a = problem.system.speeds()[0];
    let grid = Grid::<T>::new(n_cells)?;
    let scale = grid.h().powi(2 * k as i32 + 1);
    let op = problem.operator()?;
    inits
        .par_iter()
        .map(|&init| {
            let run = Problem { init, ..problem.clone() };
            let u0 = run.initial_state(&grid, k)?;
            let states = integrate_to_times(&u0, &op, run.cfl, &run.scheme, times)?;
            let mut scaled_linf = Vec::with_capacity(times.len());
            let mut deviation = Vec::with_capacity(times.len());
            for (u, &t) in states.iter().zip(times) {
                let dec = decompose_error(u, &run.exact_at(t), t)?;
                let pred = asymptotic_error(run.initial[0].as_ref(), &grid, t, k, init, a, &run.flux)?;
                scaled_linf.push((dec.norms(0, 0).linf / scale).as_f64());
                deviation.push(prediction_deviation(&dec, &pred).as_f64());
            }
            Ok(TransientSeries {
                init,
                n: n_cells,
                k,
                times: times.iter().map(|t| t.as_f64()).collect(),
                scaled_linf,
                deviation,
            })
        })
        .collect()
}

pub const TRANSIENT_HEADER: [&str; 3] = ["t", "scaled_linf", "init_kind"];

pub fn transient_csv_rows(series: &[TransientSeries]) -> Vec<Vec<String>> {
    series
        .iter()
        .flat_map(|s| s.times.iter().zip(&s.scaled_linf).map(move |(&t, &v)| vec![sig17(t), sig17(v), s.init.label()]))
        .collect()
}

/// `value ≈ amplitude · e^{-rate t}` fitted by least squares on `ln value`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub amplitude: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Fits an exponential to the samples with `t` in `window`.
pub fn fit_decay(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    let picked: Vec<(f64, f64)> =
        times.iter().zip(values).filter(|(&t, _)| t >= window.0 && t <= window.1).map(|(&t, &v)| (t, v)).collect();
    // ln v = ln A - rate·t is a log-log fit in (e^t, v).
    let mapped: Vec<(f64, f64)> = picked.iter().map(|&(t, v)| (t.exp(), v)).collect();
    let (slope, intercept) = loglog_fit(&mapped)?;
    Ok(DecayFit { rate: -slope, amplitude: intercept.exp(), window, points: picked.len() })
}

/// Running maximum from the right: `env[i] = max_{s ≥ i} values[s]`.
pub fn upper_envelope(values: &[f64]) -> Vec<f64> {
    let mut env = values.to_vec();
    for i in (0..env.len().saturating_sub(1)).rev() {
        env[i] = env[i].max(env[i + 1]);
    }
    env
}

/// Transient part of the scaled cell-average error, isolated by comparing
/// two initializations of the same problem.
#[derive(Clone, Debug)]
pub struct TransientDecay {
    pub n: usize,
    pub k: usize,
    pub init: InitKind,
    pub reference: InitKind,
    pub times: Vec<f64>,
    /// `max_j |(ū_h - ū_h^ref)_j / h^{2k+1} - Δ_j(t)|`, with `Δ` the predicted
    /// asymptotic difference.
    pub isolated: Vec<f64>,
    /// Exponential fit on the upper envelope from its peak until it falls
    /// to `10×` the late-time level (maximum over the second half of `times`).
    pub fit: DecayFit,
}

/// Isolates the transient of `init` against `reference` and fits its decay.
///
/// Both runs share the physical-mode dynamics; their asymptotic difference
/// is known in closed form, so what remains is the nonphysical content
/// excited by `init` beyond `reference`.
pub fn transient_decay<T: Real>(
    problem: &Problem<T>,
    n_cells: usize,
    k: usize,
    init: InitKind,
    reference: InitKind,
    times: &[T],
) -> Result<TransientDecay> {
    if problem.system.components() != 1 {
        return Err(Error::Config("transient decay is defined for scalar problems".into()));
    }
    if times.len() < 4 {
        return Err(Error::Config("transient decay needs at least four sample times".into()));
    }
    let a = problem.system.speeds()[0];
    let grid = Grid::<T>::new(n_cells)?;
    let scale = grid.h().powi(2 * k as i32 + 1);
    let op = problem.operator()?;
    let runs = [init, reference]
        .par_iter()
        .map(|&kind| {
            let run = Problem { init: kind, ..problem.clone() };
            let u0 = run.initial_state(&grid, k)?;
            integrate_to_times(&u0, &op, run.cfl, &run.scheme, times)
        })
        .collect::<Result<Vec<_>>>()?;
    let g = problem.initial[0].as_ref();
    let mut isolated = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let p_init = asymptotic_error(g, &grid, t, k, init, a, &problem.flux)?;
        let p_ref = asymptotic_error(g, &grid, t, k, reference, a, &problem.flux)?;
        let mut worst = T::zero();
        for j in 0..n_cells {
            let diff = (runs[0][i].cell(j, 0)[0] - runs[1][i].cell(j, 0)[0]) / scale;
            // u_h - u_h^ref = e^ref - e.
            let expected = p_ref.e0[j] - p_init.e0[j];
            worst = worst.max_of((diff - expected).abs());
        }
        isolated.push(worst.as_f64());
    }
    let ts: Vec<f64> = times.iter().map(|t| t.as_f64()).collect();
    let env = upper_envelope(&isolated);
    let half = ts.len() / 2;
    let floor = isolated[half..].iter().cloned().fold(0.0, f64::max);
    let peak = (0..env.len()).find(|&i| isolated[i] == env[0]).unwrap_or(0);
    let end = (peak..env.len()).rev().find(|&i| env[i] > 10.0 * floor).unwrap_or(peak);
    let fit = fit_decay(&ts, &env, (ts[peak], ts[end]))?;
    Ok(TransientDecay { n: n_cells, k, init, reference, times: ts, isolated, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{gauss_rule, legendre_eval};
    use crate::field::{Constant, PolyBump, TrigSeries};
    use std::sync::Arc;

    fn grid(n: usize) -> Grid<f64> {
        Grid::new(n).unwrap()
    }

    fn scalar_problem(f: FieldRef<f64>, init: InitKind) -> Problem<f64> {
        Problem {
            name: "test".into(),
            initial: vec![f],
            system: AdvectionSystem::scalar(1.0),
            flux: FluxSpec::Upwind,
            init,
            t_final: 1.0,
            cfl: 0.1,
            scheme: ButcherTableau::fehlberg5(),
        }
    }

    #[test]
    fn projection_has_no_resolved_error() {
        let f: FieldRef<f64> = Arc::new(TrigSeries::sin_power(4));
        let g = grid(16);
        let u = l2_project(f.as_ref(), &g, 2).unwrap();
        let d = decompose_error(&u, std::slice::from_ref(&f), 0.0).unwrap();
        assert!(d.e_modes.iter().all(|e| e.abs() < 1e-14));
        // Downwind error is the projection's trace error.
        let x = g.interface(1);
        assert!((d.e_downwind[0] - (f.eval(x) - u.right_trace(0, 0))).abs() < 1e-16);
    }

    #[test]
    fn cell_average_error_matches_independent_quadrature() {
        let f: FieldRef<f64> = Arc::new(PolyBump::new(std::f64::consts::TAU, 6));
        let g = grid(10);
        let u = DGState::zeros(g, 1, 1);
        let d = decompose_error(&u, std::slice::from_ref(&f), 0.0).unwrap();
        let rule = gauss_rule::<f64>(40).unwrap();
        for j in 0..10 {
            let avg = rule.integrate(|y| f.eval(g.to_physical(j, y))) / 2.0;
            assert!((d.mode(0, 0)[j] - avg).abs() < 1e-13);
            let slope = rule.integrate(|y| f.eval(g.to_physical(j, y)) * legendre_eval(1, y).0) * 1.5;
            assert!((d.mode(0, 1)[j] - slope).abs() < 1e-13);
        }
    }

    #[test]
    fn norm_closed_forms() {
        let r = norms(&[-0.5f64; 7]);
        assert_eq!((r.l1, r.l2, r.linf), (0.5, 0.5, 0.5));
        let mut v = vec![0.0f64; 16];
        v[3] = -2.0;
        let r = norms(&v);
        assert!((r.l1 - 2.0 / 16.0).abs() < 1e-16 && (r.l2 - 0.5).abs() < 1e-16 && r.linf == 2.0);
    }

    #[test]
    fn fourier_pure_mode_and_parseval() {
        for n in [4usize, 7, 16] {
            let g = grid(n);
            let s: Vec<Complex<f64>> = g.centers().iter().map(|&x| Complex::from_polar(1.0, x)).collect();
            let f = fourier_norms_complex(&s);
            for (m, v) in f.hat.iter().enumerate() {
                let want = if m == 1 { 1.0 } else { 0.0 };
                assert!((v - want).norm() < 1e-13, "n={n} m={m} {v}");
            }
        }
        let g = grid(12);
        let s: Vec<Complex<f64>> = g.centers().iter().map(|&x| Complex::from_polar(2.0, 3.0 * x)).collect();
        let f = fourier_norms_complex(&s);
        assert!((f.norm_s(2) - 18.0).abs() < 1e-12);
        assert!((f.norm_s2(2) - 18.0).abs() < 1e-12);
        let samples: Vec<f64> = (0..33).map(|i| ((i * 7919 % 101) as f64 / 50.0) - 1.0).collect();
        let f = fourier_norms(&samples);
        let lhs: f64 = f.hat.iter().map(|v| v.norm_sqr()).sum();
        let rhs = samples.iter().map(|v| v * v).sum::<f64>() / 33.0;
        assert!((lhs - rhs).abs() < 1e-12);
        // Direct summation oracle.
        let centers = grid(33).centers();
        for m in [0usize, 5, 32] {
            let direct: Complex<f64> = samples
                .iter()
                .zip(&centers)
                .map(|(&v, &x)| Complex::from_polar(v, -(m as f64) * x))
                .sum::<Complex<f64>>()
                / 33.0;
            assert!((direct - f.hat[m]).norm() < 1e-14);
        }
    }

    #[test]
    fn symmetric_index_folds() {
        let f = FourierNorms { hat: vec![Complex::new(1.0, 0.0); 6] };
        let idx: Vec<i64> = (0..6).map(|i| f.symmetric_index(i)).collect();
        assert_eq!(idx, vec![0, 1, 2, 3, -2, -1]);
        assert!((f.norm_s_symmetric(1) - 9.0).abs() < 1e-15);
    }

    #[test]
    fn prediction_of_constant_vanishes_and_scales_linearly() {
        let g = grid(8);
        let c = Constant(3.0f64);
        let p = asymptotic_error(&c, &g, 0.7, 2, InitKind::L2, 1.0, &FluxSpec::Upwind).unwrap();
        assert!(p.e0.iter().chain(p.modes.iter().flatten()).all(|v| *v == 0.0));
        let f = TrigSeries::sin_power(6);
        let base = asymptotic_error(&f, &g, 0.3, 2, InitKind::L2, 1.0, &FluxSpec::Upwind).unwrap();
        let scaled_field = crate::field::LinearCombination::new(vec![(2.5, Arc::new(f.clone()) as FieldRef<f64>)]);
        let scaled = asymptotic_error(&scaled_field, &g, 0.3, 2, InitKind::L2, 1.0, &FluxSpec::Upwind).unwrap();
        for (a, b) in base.e0.iter().zip(&scaled.e0) {
            assert!((2.5 * a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn prediction_k1_formula() {
        let g = grid(10);
        let f = TrigSeries::sin_power(4);
        let t = 0.4;
        let p = asymptotic_error(&f, &g, t, 1, InitKind::L2, 1.0, &FluxSpec::Upwind).unwrap();
        for (j, &x) in g.centers().iter().enumerate() {
            let want = -(1.0 / 72.0) * (f.derivative(3, x - t) - t * f.derivative(4, x - t));
            assert!((p.e0[j] - want).abs() < 1e-14);
            let want1 = -(1.0 / 72.0) * 6.0 * f.derivative(2, x - t);
            assert!((p.modes[0][j] - want1).abs() < 1e-13);
        }
        let lf = asymptotic_error(&f, &g, t, 2, InitKind::L2, -4.0, &FluxSpec::LaxFriedrichs { m: 6.0 }).unwrap();
        assert_eq!(lf.multiplier, -1.5);
        let up = asymptotic_error(&f, &g, t, 2, InitKind::L2, 1.0, &FluxSpec::Upwind).unwrap();
        // Same bracket evaluated at x + 4t with a t = -4t.
        let ck = 1.0 / 7200.0;
        for (j, &x) in g.centers().iter().enumerate() {
            let y = x + 4.0 * t;
            let want = -1.5 * ck * (2.0 * f.derivative(5, y) + 4.0 * t * f.derivative(6, y));
            assert!((lf.e0[j] - want).abs() < 1e-13);
            let _ = up.e0[j];
        }
    }

    #[test]
    fn insufficient_derivatives_rejected() {
        let g = grid(8);
        let f = crate::field::FnField::new(vec![Box::new(|x: f64| x.sin()), Box::new(|x: f64| x.cos())]).unwrap();
        assert!(matches!(
            asymptotic_error(&f, &g, 0.0, 1, InitKind::L2, 1.0, &FluxSpec::Upwind),
            Err(Error::DerivativeOrderUnavailable { .. })
        ));
    }

    #[test]
    fn convergence_rows_and_orders() {
        let f: FieldRef<f64> = Arc::new(TrigSeries::sin_power(4));
        let mut p = scalar_problem(f, InitKind::L2);
        p.t_final = 0.25;
        let t = convergence_study(&p, &[10, 20, 40], 1).unwrap();
        assert!(t.is_complete());
        let s = t.series(ComponentSel::Single(0), ErrorKind::Mode(0));
        assert_eq!(s.iter().map(|r| r.n).collect::<Vec<_>>(), vec![10, 20, 40]);
        assert!(s[0].order1.is_none());
        assert!((s[2].order1.unwrap() - 3.0).abs() < 0.3, "{:?}", s);
        let csv = convergence_csv_rows(&t);
        assert_eq!(csv.len(), 3 * 3);
        assert!(csv.iter().all(|r| r.len() == CONVERGENCE_HEADER.len()));
        assert!(convergence_study(&p, &[20, 10], 1).is_err());
    }

    #[test]
    fn decay_fit_recovers_rate() {
        let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.025).collect();
        let values: Vec<f64> = times.iter().map(|t| 3.0 * (-4.5 * t).exp()).collect();
        let fit = fit_decay(&times, &values, (0.1, 0.8)).unwrap();
        assert!((fit.rate - 4.5).abs() < 1e-10 && (fit.amplitude - 3.0).abs() < 1e-9);
    }

    #[test]
    fn envelope_is_running_max_from_right() {
        assert_eq!(upper_envelope(&[1.0, 3.0, 2.0, 0.5, 1.0]), vec![3.0, 3.0, 2.0, 1.0, 1.0]);
        assert!(upper_envelope(&[]).is_empty());
    }

    #[test]
    fn transient_decay_starts_at_predicted_offset() {
        let problem = Problem {
            name: "bump".into(),
            initial: vec![Arc::new(PolyBump::new(std::f64::consts::TAU, 6)) as FieldRef<f64>],
            system: AdvectionSystem::scalar(1.0),
            flux: FluxSpec::Upwind,
            init: InitKind::L2,
            t_final: 1.0,
            cfl: 0.1,
            scheme: ButcherTableau::fehlberg5(),
        };
        let times: Vec<f64> = (0..=50).map(|i| i as f64 * 0.01).collect();
        let d = transient_decay(&problem, 40, 2, InitKind::L2, InitKind::GaussRadau, &times).unwrap();
        // Both initializations share cell averages, so at t = 0 only the
        // predicted difference C_2 g^{(5)} remains.
        let grid = Grid::<f64>::new(40).unwrap();
        let g = &problem.initial[0];
        let expected = grid.centers().iter().map(|&x| g.derivative(5, x).abs() / 7200.0).fold(0.0, f64::max);
        assert!((d.isolated[0] - expected).abs() < 1e-9 * expected, "{} vs {expected}", d.isolated[0]);
        let peak = d.isolated.iter().cloned().fold(0.0, f64::max);
        assert!(peak > 5.0 * d.isolated[0]);
        assert!(d.fit.rate > 0.0 && d.fit.points >= 3);
        assert!(*d.isolated.last().unwrap() < 0.05 * peak);
    }

    #[test]
    fn power_mean_ordering() {
        use proptest::prelude::*;
        proptest!(|(v in proptest::collection::vec(-1e3f64..1e3, 1..64))| {
            let r = norms(&v);
            prop_assert!(r.l1 <= r.l2 * (1.0 + 1e-12) && r.l2 <= r.linf * (1.0 + 1e-12));
        });
    }
}
