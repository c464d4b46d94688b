//! Fourier symbol of the DG operator and its eigenstructure.
//!
//! Substituting `u_j(t) = ĉ(t) e^{i m x_j}` into the scheme gives
//! `d ĉ/dt = (A_m / h) ĉ` with a `(k+1)×(k+1)` matrix depending only on
//! `θ = m h`. With `α± = (A ± M)/2` from the flux splitting,
//!
//! `(A_m)_{nl} = (2n+1) [a S_{ln} - α⁺ - α⁻ (-1)^l e^{iθ} + (-1)^n (α⁺ e^{-iθ} + α⁻ (-1)^l)]`,
//!
//! where `S_{ln} = ∫ φ_l φ_n'`. The relation
//! `(-1)^s (A_m)_{st} / (2s+1) = (-1)^t (A_m)_{ts} / (2t+1)` depends only on
//! `α⁺ + α⁻ = a`, so it holds for both fluxes and fixes the left
//! eigenvectors from the right ones.

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::basis::{gauss_rule, legendre_all, Grid, ScaledBasis};
use crate::error::{Error, Result};
use crate::linalg::{eigen, eigenvalues, DenseMatrix};
use crate::report::sig17;
use crate::scalar::{cabs, cis, cpowi, factorial, Real};
use crate::solver::FluxSpec;

/// Per-mode amplification matrix.
#[derive(Clone, Debug)]
pub struct SymbolMatrix<T> {
    pub m: usize,
    pub theta: T,
    pub k: usize,
    pub flux: FluxSpec<T>,
    pub speed: T,
    pub entries: DenseMatrix<Complex<T>>,
}

fn split_coefficients<T: Real>(flux: &FluxSpec<T>, a: T) -> (T, T) {
    match *flux {
        FluxSpec::Upwind => (a.max_of(T::zero()), a.min_of(T::zero())),
        FluxSpec::LaxFriedrichs { m } => ((a + m) * T::half(), (a - m) * T::half()),
    }
}

/// Symbol assembled from the scheme for any flux and sign of `a`.
pub fn assemble_symbol<T: Real>(theta: T, k: usize, flux: &FluxSpec<T>, a: T) -> DenseMatrix<Complex<T>> {
    let (ap, am) = split_coefficients(flux, a);
    let e_plus = cis(theta);
    let e_minus = e_plus.conj();
    let re = |x: T| Complex::new(x, T::zero());
    DenseMatrix::from_fn(k + 1, |n, l| {
        let pl = if l % 2 == 0 { T::one() } else { -T::one() };
        let pn = if n % 2 == 0 { T::one() } else { -T::one() };
        let vol = re(a * ScaledBasis::stiffness::<T>(l, n));
        let right = re(ap) + e_plus * (am * pl);
        let left = e_minus * ap + re(am * pl);
        (vol - right + left * pn) * T::from_usize_exact(2 * n + 1)
    })
}

/// Closed-form upwind symbol for `a = 1`.
pub fn upwind_closed_form<T: Real>(theta: T, k: usize) -> DenseMatrix<Complex<T>> {
    let e = cis(-theta);
    let one = Complex::<T>::one();
    let sgn = |p: usize| if p.is_multiple_of(2) { T::one() } else { -T::one() };
    DenseMatrix::from_fn(k + 1, |s, t| {
        let w = T::from_usize_exact(2 * s + 1);
        if s <= t {
            -(one - e * sgn(s)) * w
        } else {
            -(one - e * sgn(t)) * (w * sgn(s + t))
        }
    })
}

/// `A_m` for mode `m` on `grid`. Upwind with `a > 0` uses the closed form
/// scaled by `a`; every other case is assembled.
pub fn build_symbol<T: Real>(m: usize, grid: &Grid<T>, k: usize, flux: FluxSpec<T>, a: T) -> SymbolMatrix<T> {
    let theta = T::from_usize_exact(m) * grid.h();
    let entries = symbol_at(theta, k, &flux, a);
    SymbolMatrix { m, theta, k, flux, speed: a, entries }
}

/// `A(θ)` for a continuous `θ`.
pub fn symbol_at<T: Real>(theta: T, k: usize, flux: &FluxSpec<T>, a: T) -> DenseMatrix<Complex<T>> {
    match flux {
        FluxSpec::Upwind if a > T::zero() => {
            let mut s = upwind_closed_form(theta, k);
            if a != T::one() {
                for i in 0..=k {
                    for j in 0..=k {
                        s[(i, j)] *= a;
                    }
                }
            }
            s
        }
        _ => assemble_symbol(theta, k, flux, a),
    }
}

/// `max |(-1)^s A_st/(2s+1) - (-1)^t A_ts/(2t+1)|`.
pub fn lr_symmetry_residual<T: Real>(a: &DenseMatrix<Complex<T>>) -> T {
    let n = a.size();
    let w = |s: usize| {
        let sign = if s.is_multiple_of(2) { T::one() } else { -T::one() };
        sign / T::from_usize_exact(2 * s + 1)
    };
    let mut worst = T::zero();
    for s in 0..n {
        for t in 0..n {
            worst = worst.max_of(cabs(a[(s, t)] * w(s) - a[(t, s)] * w(t)));
        }
    }
    worst
}

/// Eigen-decomposition with a flagged physical mode.
#[derive(Clone, Debug)]
pub struct EigenSystem<T> {
    pub theta: T,
    pub values: Vec<Complex<T>>,
    pub right: Vec<Vec<Complex<T>>>,
    /// `left[n] · right[p] = δ_np` with the bilinear pairing.
    pub left: Vec<Vec<Complex<T>>>,
    pub physical: usize,
    /// True when the (lr) normalization was applied to every mode.
    pub lr_normalized: bool,
}

impl<T: Real> EigenSystem<T> {
    pub fn physical_value(&self) -> Complex<T> {
        self.values[self.physical]
    }

    pub fn nonphysical(&self) -> impl Iterator<Item = Complex<T>> + '_ {
        self.values.iter().enumerate().filter(move |(i, _)| *i != self.physical).map(|(_, v)| *v)
    }

    /// `max |Σ_n λ_n r_n l_n - A|`.
    pub fn reconstruction_residual(&self, a: &DenseMatrix<Complex<T>>) -> T {
        let n = a.size();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex::<T>::zero();
                for p in 0..n {
                    acc += self.values[p] * self.right[p][i] * self.left[p][j];
                }
                worst = worst.max_of(cabs(acc - a[(i, j)]));
            }
        }
        worst
    }
}

fn nearest<T: Real>(values: &[Complex<T>], target: Complex<T>) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if cabs(*v - target) < cabs(values[best] - target) {
            best = i;
        }
    }
    best
}

/// Largest θ at which the physical mode is chosen by nearness to `-i a θ`.
const SEED_THETA: f64 = 1.0;
/// Maximal θ increment between tracked eigenvalue sets.
const TRACK_STEP: f64 = 0.05;

/// Identifies the physical eigenvalue among `values` at `theta`, tracking by
/// continuity from `θ = 1` when `theta` is larger.
pub fn physical_index<T: Real>(values: &[Complex<T>], theta: T, k: usize, flux: &FluxSpec<T>, a: T) -> Result<usize> {
    let seed = T::cst(SEED_THETA);
    let target = |th: T| Complex::new(T::zero(), -a * th);
    if theta <= seed {
        return Ok(nearest(values, target(theta)));
    }
    let first = eigenvalues(&symbol_at(seed, k, flux, a), 0)?;
    let mut prev = first[nearest(&first, target(seed))];
    let steps = ((theta - seed) / T::cst(TRACK_STEP)).floor().to_usize().unwrap_or(0) + 1;
    for s in 1..steps {
        let th = seed + (theta - seed) * T::from_usize_exact(s) / T::from_usize_exact(steps);
        let vals = eigenvalues(&symbol_at(th, k, flux, a), 0)?;
        prev = vals[nearest(&vals, prev)];
    }
    Ok(nearest(values, prev))
}

fn csqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = cabs(z);
    if r.is_zero() {
        return Complex::zero();
    }
    // The smaller component comes from z.im / (2·larger) to avoid cancellation.
    let w = ((r + z.re.abs()) * T::half()).sqrt();
    if z.re >= T::zero() {
        Complex::new(w, z.im / (w + w))
    } else {
        let im = if z.im < T::zero() { -w } else { w };
        Complex::new(z.im / (im + im), im)
    }
}

/// Rescales `r` so that `Σ (-1)^s r_s² / (2s+1) = 1`; `None` when that form
/// is numerically zero.
fn lr_normalize<T: Real>(r: &[Complex<T>], physical: bool) -> Option<Vec<Complex<T>>> {
    let mut q = Complex::zero();
    let mut norm2 = T::zero();
    for (s, &v) in r.iter().enumerate() {
        let w = T::one() / T::from_usize_exact(2 * s + 1);
        q += if s % 2 == 0 { v * v * w } else { -(v * v * w) };
        norm2 += v.norm_sqr();
    }
    if cabs(q) <= T::epsilon().sqrt() * norm2 {
        return None;
    }
    let scale = csqrt(q);
    let mut out: Vec<Complex<T>> = r.iter().map(|&v| v / scale).collect();
    let flip = if physical {
        let one = Complex::<T>::one();
        cabs(out[0] + one) < cabs(out[0] - one)
    } else {
        let big = out
            .iter()
            .copied()
            .fold(Complex::zero(), |b: Complex<T>, v| if v.norm_sqr() > b.norm_sqr() { v } else { b });
        // arg in (-π/2, π/2]
        !(big.re > T::zero() || (big.re.is_zero() && big.im > T::zero()))
    };
    if flip {
        for v in &mut out {
            *v = -*v;
        }
    }
    Some(out)
}

/// Complete eigen-decomposition of a symbol with the physical mode flagged.
pub fn eigendecompose<T: Real>(sym: &SymbolMatrix<T>) -> Result<EigenSystem<T>> {
    decompose_at(&sym.entries, sym.m, sym.theta, sym.k, &sym.flux, sym.speed)
}

fn decompose_at<T: Real>(
    entries: &DenseMatrix<Complex<T>>,
    m: usize,
    theta: T,
    k: usize,
    flux: &FluxSpec<T>,
    a: T,
) -> Result<EigenSystem<T>> {
    let e = eigen(entries, m)?;
    let physical = physical_index(&e.values, theta, k, flux, a)?;
    let scale = entries.norm_inf().max_of(T::one());
    let symmetric = lr_symmetry_residual(entries) <= T::epsilon() * T::cst(1e3) * scale;
    let mut right = Vec::with_capacity(e.values.len());
    let mut left = Vec::with_capacity(e.values.len());
    let mut lr_ok = symmetric;
    if symmetric {
        for (n, r) in e.right.iter().enumerate() {
            match lr_normalize(r, n == physical) {
                Some(v) => {
                    let l: Vec<Complex<T>> = v
                        .iter()
                        .enumerate()
                        .map(|(s, &x)| {
                            let w = T::one() / T::from_usize_exact(2 * s + 1);
                            if s % 2 == 0 {
                                x * w
                            } else {
                                -(x * w)
                            }
                        })
                        .collect();
                    right.push(v);
                    left.push(l);
                }
                None => {
                    lr_ok = false;
                    break;
                }
            }
        }
    }
    if !lr_ok {
        right = e.right.clone();
        left = e.left.clone();
    }
    Ok(EigenSystem { theta, values: e.values, right, left, physical, lr_normalized: lr_ok })
}

/// Eigen-decomposition of `A(θ)` for continuous `θ`.
pub fn eigendecompose_at<T: Real>(theta: T, k: usize, flux: &FluxSpec<T>, a: T) -> Result<EigenSystem<T>> {
    decompose_at(&symbol_at(theta, k, flux, a), 0, theta, k, flux, a)
}

/// `C_k = (k+1)! k! / ((2k+2)! (2k+1)!)` exactly.
pub fn c_k(k: usize) -> Ratio<i128> {
    let f = |n: usize| (1..=n as i128).product::<i128>();
    Ratio::new(f(k + 1) * f(k), f(2 * k + 2) * f(2 * k + 1))
}

pub fn ratio_to<T: Real>(r: &Ratio<i128>) -> T {
    let n = T::from_i128(*r.numer()).expect("representable");
    let d = T::from_i128(*r.denom()).expect("representable");
    n / d
}

/// Dissipation factor: 1 for upwind; `M/|a|` (even k) or `|a|/M` (odd k)
/// for Lax-Friedrichs.
pub fn chi<T: Real>(k: usize, flux: &FluxSpec<T>, a: T) -> T {
    match *flux {
        FluxSpec::Upwind => T::one(),
        FluxSpec::LaxFriedrichs { m } => {
            if k.is_multiple_of(2) {
                m / a.abs()
            } else {
                a.abs() / m
            }
        }
    }
}

/// Closed-form spectral predictions.
#[derive(Clone, Debug)]
pub struct SpectralPrediction<T> {
    pub k: usize,
    pub speed: T,
    pub c_k: T,
    pub chi: T,
}

impl<T: Real> SpectralPrediction<T> {
    pub fn new(k: usize, flux: &FluxSpec<T>, a: T) -> Self {
        Self { k, speed: a, c_k: ratio_to(&c_k(k)), chi: chi(k, flux, a) }
    }

    /// `-i a θ - |a| χ C_k θ^{2k+2}`.
    pub fn lambda0(&self, theta: T) -> Complex<T> {
        let decay = self.speed.abs() * self.chi * self.c_k * theta.powi(2 * self.k as i32 + 2);
        Complex::new(-decay, -self.speed * theta)
    }

    /// Expected constant of `|λ_0 + i a θ|`.
    pub fn expansion_constant(&self) -> T {
        self.speed.abs() * self.chi * self.c_k
    }

    /// Leading term of `δ_n = p_n - (r̃_0)_n` (upwind, `a = 1`):
    /// `(-1)^{k+1-n} C_k (2n+1)!/n! (iθ)^{2k+1-n}`.
    pub fn delta(&self, n: usize, theta: T) -> Complex<T> {
        let k = self.k;
        let sign = if (k + 1 - n).is_multiple_of(2) { T::one() } else { -T::one() };
        let coef = sign * self.c_k * factorial::<T>(2 * n + 1) / factorial::<T>(n);
        cpowi(Complex::new(T::zero(), theta), (2 * k + 1 - n) as u32) * coef
    }
}

/// Result of a log-log fit `y ≈ C x^p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionFit {
    pub order: f64,
    pub constant: f64,
    pub expected_order: f64,
    pub expected_constant: f64,
    /// `(θ, |λ_0 + i a θ|)`.
    pub samples: Vec<(f64, f64)>,
}

impl ExpansionFit {
    pub fn constant_ratio(&self) -> f64 {
        self.constant / self.expected_constant
    }
}

/// Least-squares slope and intercept of `ln y` against `ln x`.
pub fn loglog_fit(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    let ok = samples.len() >= 2 && samples.iter().all(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite());
    if !ok {
        return Err(Error::FitFailure { samples: samples.to_vec() });
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::FitFailure { samples: samples.to_vec() });
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Sample points of the eigenvalue expansion fit.
pub const EXPANSION_THETAS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// Fits `|λ_0 + i a θ| ≈ C θ^p` over [`EXPANSION_THETAS`].
///
/// The fitted order is the least-squares slope. The constant is the
/// least-squares intercept with the slope pinned to `2k + 2`, which removes
/// the leverage of the slope error on the extrapolation to `θ = 1`.
pub fn verify_lambda0_expansion<T: Real>(k: usize, flux: &FluxSpec<T>, a: T) -> Result<ExpansionFit> {
    let mut samples = Vec::with_capacity(EXPANSION_THETAS.len());
    for &th in &EXPANSION_THETAS {
        let theta = T::cst(th);
        let vals = eigenvalues(&symbol_at(theta, k, flux, a), 0)?;
        let p = physical_index(&vals, theta, k, flux, a)?;
        let dev = cabs(vals[p] + Complex::new(T::zero(), a * theta));
        samples.push((th, dev.as_f64()));
    }
    let (order, _) = loglog_fit(&samples)?;
    let expected_order = (2 * k + 2) as f64;
    let log_c = samples.iter().map(|&(x, y)| y.ln() - expected_order * x.ln()).sum::<f64>() / samples.len() as f64;
    let pred = SpectralPrediction::new(k, flux, a);
    Ok(ExpansionFit {
        order,
        constant: log_c.exp(),
        expected_order,
        expected_constant: pred.expansion_constant().as_f64(),
        samples,
    })
}

/// Coefficients (ascending powers of `z`) of the `[k/(k+1)]` Padé
/// approximant `P/Q` of `e^{-z}`.
pub fn pade_coefficients(k: usize) -> (Vec<Ratio<i128>>, Vec<Ratio<i128>>) {
    let f = |n: usize| (1..=n as i128).product::<i128>();
    let top = f(2 * k + 1);
    let p = (0..=k)
        .map(|j| {
            let r = Ratio::new(f(2 * k + 1 - j) * f(k), top * f(j) * f(k - j));
            if j % 2 == 0 {
                r
            } else {
                -r
            }
        })
        .collect();
    let q = (0..=k + 1).map(|j| Ratio::new(f(2 * k + 1 - j) * f(k + 1), top * f(j) * f(k + 1 - j))).collect();
    (p, q)
}

fn poly_eval<T: Real>(coeffs: &[Ratio<i128>], z: Complex<T>) -> Complex<T> {
    coeffs.iter().rev().fold(Complex::zero(), |acc, c| acc * z + Complex::new(ratio_to::<T>(c), T::zero()))
}

/// `R_{k,k+1}(z)` for the exponential `e^{-z}`.
pub fn pade_eval<T: Real>(k: usize, z: Complex<T>) -> Complex<T> {
    let (p, q) = pade_coefficients(k);
    poly_eval(&p, z) / poly_eval(&q, z)
}

/// `|R_{k,k+1}(λ_0) - e^{iθ}|` for the upwind symbol with `a = 1`.
pub fn pade_check<T: Real>(k: usize, theta: T) -> Result<T> {
    let flux = FluxSpec::Upwind;
    let vals = eigenvalues(&symbol_at(theta, k, &flux, T::one()), 0)?;
    let p = physical_index(&vals, theta, k, &flux, T::one())?;
    Ok(cabs(pade_eval(k, vals[p]) - cis(theta)))
}

/// Samples of the stability sweep: `θ_i = 2π i / 129`, `i = 1..=128`.
pub fn sweep_thetas<T: Real>() -> Vec<T> {
    (1..=128).map(|i| T::tau() * T::from_usize_exact(i) / T::cst(129.0)).collect()
}

/// Spectral gap and the stability sweep.
#[derive(Clone, Debug)]
pub struct GapReport {
    pub k: usize,
    /// `min_n α_n` with `α_n = -Re λ_n(θ = 0)` over nonphysical modes.
    pub alpha: f64,
    pub alphas: Vec<f64>,
    /// Largest nonphysical real part over the sweep, with its θ.
    pub max_nonphysical_re: (f64, f64),
    /// Largest physical real part over the sweep, with its θ.
    pub max_physical_re: (f64, f64),
}

/// Tracks the physical eigenvalue along an increasing sequence of θ.
struct Tracker<'a, T> {
    k: usize,
    flux: &'a FluxSpec<T>,
    a: T,
    prev: Option<(T, Complex<T>)>,
}

impl<'a, T: Real> Tracker<'a, T> {
    fn new(k: usize, flux: &'a FluxSpec<T>, a: T) -> Self {
        Self { k, flux, a, prev: None }
    }

    fn locate(&mut self, values: &[Complex<T>], theta: T) -> Result<usize> {
        let seed = T::cst(SEED_THETA);
        let idx = match self.prev {
            _ if theta <= seed => nearest(values, Complex::new(T::zero(), -self.a * theta)),
            Some((t0, mut prev)) if t0 <= theta => {
                let steps = ((theta - t0) / T::cst(TRACK_STEP)).floor().to_usize().unwrap_or(0) + 1;
                for s in 1..steps {
                    let th = t0 + (theta - t0) * T::from_usize_exact(s) / T::from_usize_exact(steps);
                    let vals = eigenvalues(&symbol_at(th, self.k, self.flux, self.a), 0)?;
                    prev = vals[nearest(&vals, prev)];
                }
                nearest(values, prev)
            }
            _ => physical_index(values, theta, self.k, self.flux, self.a)?,
        };
        self.prev = Some((theta, values[idx]));
        Ok(idx)
    }
}

/// `α` at `θ = 0` and the sign of every real part on the 128-point sweep.
/// Fails with [`Error::StabilityViolation`] when a nonphysical eigenvalue has
/// `Re λ ≥ 0`.
pub fn spectral_gap<T: Real>(k: usize, flux: &FluxSpec<T>, a: T) -> Result<GapReport> {
    let zero = T::zero();
    let vals0 = eigenvalues(&symbol_at(zero, k, flux, a), 0)?;
    let phys0 = nearest(&vals0, Complex::zero());
    let mut alphas: Vec<f64> =
        vals0.iter().enumerate().filter(|(i, _)| *i != phys0).map(|(_, v)| -v.re.as_f64()).collect();
    alphas.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let alpha = alphas.first().copied().unwrap_or(f64::INFINITY);
    if let Some(&worst) = alphas.first() {
        if -worst >= 0.0 {
            return Err(Error::StabilityViolation { theta: 0.0, re: -worst });
        }
    }
    let mut tracker = Tracker::new(k, flux, a);
    let mut max_np = (f64::NEG_INFINITY, 0.0);
    let mut max_ph = (f64::NEG_INFINITY, 0.0);
    for theta in sweep_thetas::<T>() {
        let vals = eigenvalues(&symbol_at(theta, k, flux, a), 0)?;
        let p = tracker.locate(&vals, theta)?;
        let th = theta.as_f64();
        for (i, v) in vals.iter().enumerate() {
            let re = v.re.as_f64();
            if i == p {
                if re > max_ph.0 {
                    max_ph = (re, th);
                }
            } else {
                if re >= 0.0 {
                    return Err(Error::StabilityViolation { theta: th, re });
                }
                if re > max_np.0 {
                    max_np = (re, th);
                }
            }
        }
    }
    Ok(GapReport { k, alpha, alphas, max_nonphysical_re: max_np, max_physical_re: max_ph })
}

/// `p_n = (2n+1)/2 ∫ e^{iθy/2} φ_n(y) dy`, the Legendre coefficients of
/// `e^{im(x - x_j)}` on a cell.
pub fn mode_projection<T: Real>(theta: T, k: usize) -> Result<Vec<Complex<T>>> {
    let rule = gauss_rule::<T>(k + 16)?;
    let mut out = vec![Complex::zero(); k + 1];
    for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
        let e = cis(theta * y * T::half()) * w;
        for (n, p) in legendre_all(k, y).into_iter().enumerate() {
            out[n] += e * p;
        }
    }
    for (n, v) in out.iter_mut().enumerate() {
        *v *= T::from_usize_exact(2 * n + 1) * T::half();
    }
    Ok(out)
}

/// Measured and predicted deviation of the downwind-normalized physical
/// eigenvector from the mode projection.
#[derive(Clone, Debug)]
pub struct Deviation<T> {
    pub theta: T,
    pub measured: Vec<Complex<T>>,
    pub predicted: Vec<Complex<T>>,
    /// `‖r̃_0 - r_0 (1 + i (k+1) C_k θ^{2k+1})‖_∞`.
    pub r0_relation_residual: T,
}

/// Upwind, `a = 1`: `δ_n = p_n - (r̃_0)_n` with `Σ_n (r̃_0)_n = e^{iθ/2}`.
pub fn eigvec_deviation<T: Real>(k: usize, theta: T) -> Result<Deviation<T>> {
    let flux = FluxSpec::Upwind;
    let sys = eigendecompose_at(theta, k, &flux, T::one())?;
    let r0 = &sys.right[sys.physical];
    let total = r0.iter().fold(Complex::zero(), |acc: Complex<T>, &v| acc + v);
    let scale = cis(theta * T::half()) / total;
    let tilde: Vec<Complex<T>> = r0.iter().map(|&v| v * scale).collect();
    let p = mode_projection(theta, k)?;
    let measured: Vec<Complex<T>> = p.iter().zip(&tilde).map(|(&a, &b)| a - b).collect();
    let pred = SpectralPrediction::new(k, &flux, T::one());
    let predicted = (0..=k).map(|n| pred.delta(n, theta)).collect();
    let factor = Complex::new(T::one(), T::from_usize_exact(k + 1) * pred.c_k * theta.powi(2 * k as i32 + 1));
    let residual = tilde.iter().zip(r0).fold(T::zero(), |m, (&t, &r)| m.max_of(cabs(t - r * factor)));
    Ok(Deviation { theta, measured, predicted, r0_relation_residual: residual })
}

/// One line of the spectrum report.
#[derive(Clone, Debug)]
pub struct SpectrumRow {
    pub m: usize,
    pub theta: f64,
    /// Sorted by decreasing real part, then decreasing imaginary part.
    pub values: Vec<Complex<f64>>,
    pub physical: usize,
}

/// Eigenvalues of `A_m` for every `m` in `0..N`.
pub fn spectrum_rows<T: Real>(grid: &Grid<T>, k: usize, flux: &FluxSpec<T>, a: T) -> Result<Vec<SpectrumRow>> {
    let mut tracker = Tracker::new(k, flux, a);
    let mut rows = Vec::with_capacity(grid.n_cells());
    for m in 0..grid.n_cells() {
        let theta = T::from_usize_exact(m) * grid.h();
        let vals = eigenvalues(&symbol_at(theta, k, flux, a), m)?;
        let p = tracker.locate(&vals, theta)?;
        let phys = vals[p];
        let mut sorted: Vec<Complex<f64>> = vals.iter().map(|v| Complex::new(v.re.as_f64(), v.im.as_f64())).collect();
        sorted.sort_by(|x, y| {
            y.re.partial_cmp(&x.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(y.im.partial_cmp(&x.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        let target = Complex::new(phys.re.as_f64(), phys.im.as_f64());
        let physical = sorted.iter().position(|v| *v == target).unwrap_or(0);
        rows.push(SpectrumRow { m, theta: theta.as_f64(), values: sorted, physical });
    }
    Ok(rows)
}

/// Header `m,mh,re_lambda_0,im_lambda_0,...,physical_index`.
pub fn spectrum_header(k: usize) -> Vec<String> {
    let mut h = vec!["m".to_string(), "mh".to_string()];
    for n in 0..=k {
        h.push(format!("re_lambda_{n}"));
        h.push(format!("im_lambda_{n}"));
    }
    h.push("physical_index".into());
    h
}

pub fn spectrum_csv_rows(rows: &[SpectrumRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            let mut line = vec![r.m.to_string(), sig17(r.theta)];
            for v in &r.values {
                line.push(sig17(v.re));
                line.push(sig17(v.im));
            }
            line.push(r.physical.to_string());
            line
        })
        .collect()
}
