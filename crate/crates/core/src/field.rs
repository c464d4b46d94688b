//! Periodic initial data with analytic derivatives.
//!
//! Every projector and error predictor queries `g^{(p)}(x)` for `p` up to
//! `2k + 2`, so fields carry closed-form derivatives instead of finite
//! differences. All fields are 2π-periodic; arguments are reduced into
//! `[0, 2π)` where a piecewise definition needs it.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A 2π-periodic function queryable for its derivatives.
pub trait SmoothField<T: Real>: Send + Sync {
    /// `g^{(order)}(x)`. Only meaningful for `order <= max_order()`.
    fn derivative(&self, order: usize, x: T) -> T;

    /// Highest derivative order available.
    fn max_order(&self) -> usize;

    /// Points of `[0, 2π)` where some available derivative jumps. Cell
    /// integrals are split there.
    fn breakpoints(&self) -> Vec<T> {
        Vec::new()
    }

    fn eval(&self, x: T) -> T {
        self.derivative(0, x)
    }
}

pub type FieldRef<T> = Arc<dyn SmoothField<T>>;

impl<T: Real, F: SmoothField<T> + ?Sized> SmoothField<T> for Arc<F> {
    fn derivative(&self, order: usize, x: T) -> T {
        (**self).derivative(order, x)
    }
    fn max_order(&self) -> usize {
        (**self).max_order()
    }
    fn breakpoints(&self) -> Vec<T> {
        (**self).breakpoints()
    }
}

/// Fails unless `field` provides derivatives through `required`.
pub fn require_order<T: Real>(field: &dyn SmoothField<T>, required: usize) -> Result<()> {
    let available = field.max_order();
    if required > available {
        return Err(Error::DerivativeOrderUnavailable { required, available });
    }
    Ok(())
}

/// Spot-checks `g^{(p)}(x) = g^{(p)}(x + 2π)` on 16 points for every
/// `p <= max_check`.
pub fn check_periodic<T: Real>(field: &dyn SmoothField<T>, max_check: usize) -> Result<()> {
    let tau = T::tau();
    let top = max_check.min(field.max_order());
    for order in 0..=top {
        for i in 0..16 {
            let x = tau * (T::from_usize_exact(i) + T::cst(0.3137)) / T::cst(16.0);
            let a = field.derivative(order, x);
            let b = field.derivative(order, x + tau);
            let scale = T::one().max_of(a.abs()).max_of(b.abs());
            let mismatch = (a - b).abs();
            if !(mismatch <= T::cst(1e-9) * scale) {
                return Err(Error::NonPeriodic { order, x: x.as_f64(), mismatch: mismatch.as_f64() });
            }
        }
    }
    Ok(())
}

/// Reduces `x` into `[0, 2π)`.
pub fn wrap<T: Real>(x: T) -> T {
    let tau = T::tau();
    let r = x - (x / tau).floor() * tau;
    if r >= tau {
        r - tau
    } else if r < T::zero() {
        T::zero()
    } else {
        r
    }
}

fn binomial(n: usize, r: usize) -> u64 {
    (0..r).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// `a_0 + Σ_{n ≥ 1} (a_n cos nx + b_n sin nx)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigSeries<T> {
    /// `cos_coeffs[0]` is the constant term.
    pub cos_coeffs: Vec<T>,
    /// `sin_coeffs[0]` is ignored.
    pub sin_coeffs: Vec<T>,
}

impl<T: Real> TrigSeries<T> {
    pub fn new(mut cos_coeffs: Vec<T>, mut sin_coeffs: Vec<T>) -> Self {
        let len = cos_coeffs.len().max(sin_coeffs.len()).max(1);
        cos_coeffs.resize(len, T::zero());
        sin_coeffs.resize(len, T::zero());
        Self { cos_coeffs, sin_coeffs }
    }

    /// `sin^p x` expanded exactly into harmonics up to `p`.
    pub fn sin_power(p: usize) -> Self {
        let mut cos = vec![T::zero(); p + 1];
        let mut sin = vec![T::zero(); p + 1];
        let two_pow = T::cst(2.0).powi(p as i32 - 1);
        if p == 0 {
            cos[0] = T::one();
        } else if p.is_multiple_of(2) {
            let q = p / 2;
            let sign = if q.is_multiple_of(2) { T::one() } else { -T::one() };
            for j in 0..q {
                let s = if j % 2 == 0 { T::one() } else { -T::one() };
                cos[p - 2 * j] = sign * s * T::from_u64(binomial(p, j)).expect("small") / two_pow;
            }
            cos[0] = T::from_u64(binomial(p, q)).expect("small") / (two_pow + two_pow);
        } else {
            let q = p / 2;
            let sign = if q.is_multiple_of(2) { T::one() } else { -T::one() };
            for j in 0..=q {
                let s = if j % 2 == 0 { T::one() } else { -T::one() };
                sin[p - 2 * j] = sign * s * T::from_u64(binomial(p, j)).expect("small") / two_pow;
            }
        }
        Self::new(cos, sin)
    }

    pub fn harmonics(&self) -> usize {
        self.cos_coeffs.len() - 1
    }
}

impl<T: Real + rustfft::FftNum> TrigSeries<T> {
    /// Trigonometric interpolant of `f` on `samples` equispaced points,
    /// keeping harmonics below the Nyquist index and above the roundoff
    /// floor. Intended for smooth data without closed-form derivatives.
    pub fn from_samples(f: impl Fn(T) -> T, samples: usize) -> Self {
        use num_complex::Complex;
        let n = samples.max(4);
        let nf = T::from_usize_exact(n);
        let mut buf: Vec<Complex<T>> =
            (0..n).map(|i| Complex::new(f(T::tau() * T::from_usize_exact(i) / nf), T::zero())).collect();
        rustfft::FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let top = (n - 1) / 2;
        let two = T::cst(2.0);
        let mut cos = vec![T::zero(); top + 1];
        let mut sin = vec![T::zero(); top + 1];
        cos[0] = buf[0].re / nf;
        for m in 1..=top {
            cos[m] = two * buf[m].re / nf;
            sin[m] = -two * buf[m].im / nf;
        }
        // Harmonics at the roundoff floor would be amplified by m^p in
        // high derivatives.
        let peak = cos.iter().chain(&sin).fold(T::zero(), |a, &v| a.max_of(v.abs()));
        let floor = peak * T::epsilon() * T::cst(64.0);
        for v in cos.iter_mut().chain(sin.iter_mut()) {
            if v.abs() <= floor {
                *v = T::zero();
            }
        }
        let keep = (0..=top).rev().find(|&m| !cos[m].is_zero() || !sin[m].is_zero()).unwrap_or(0);
        cos.truncate(keep + 1);
        sin.truncate(keep + 1);
        Self::new(cos, sin)
    }
}

impl<T: Real> SmoothField<T> for TrigSeries<T> {
    fn derivative(&self, order: usize, x: T) -> T {
        let mut acc = if order == 0 { self.cos_coeffs[0] } else { T::zero() };
        for m in 1..self.cos_coeffs.len() {
            let (a, b) = (self.cos_coeffs[m], self.sin_coeffs[m]);
            if a.is_zero() && b.is_zero() {
                continue;
            }
            let mf = T::from_usize_exact(m);
            let (s, c) = ((mf * x).sin(), (mf * x).cos());
            let scale = mf.powi(order as i32);
            // d^p/dx^p cos = cos(· + pπ/2), same for sin.
            let term = match order % 4 {
                0 => a * c + b * s,
                1 => -a * s + b * c,
                2 => -a * c - b * s,
                _ => a * s - b * c,
            };
            acc += scale * term;
        }
        acc
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }
}

/// `|sin x|^p` for odd `p`, smooth except at `x ∈ {0, π}`.
#[derive(Clone, Debug)]
pub struct AbsSinPower<T> {
    power: usize,
    inner: TrigSeries<T>,
}

impl<T: Real> AbsSinPower<T> {
    pub fn new(power: usize) -> Self {
        Self { power, inner: TrigSeries::sin_power(power) }
    }

    pub fn power(&self) -> usize {
        self.power
    }
}

impl<T: Real> SmoothField<T> for AbsSinPower<T> {
    fn derivative(&self, order: usize, x: T) -> T {
        let v = self.inner.derivative(order, x);
        if self.power % 2 == 1 && wrap(x) >= T::pi() {
            -v
        } else {
            v
        }
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn breakpoints(&self) -> Vec<T> {
        vec![T::zero(), T::pi()]
    }
}

/// `(x (2π - x) / d)^p` on `[0, 2π)`, extended periodically.
#[derive(Clone, Debug)]
pub struct PolyBump<T> {
    scale: T,
    power: usize,
}

impl<T: Real> PolyBump<T> {
    pub fn new(scale: T, power: usize) -> Self {
        Self { scale, power }
    }
}

impl<T: Real> SmoothField<T> for PolyBump<T> {
    fn derivative(&self, order: usize, x: T) -> T {
        let p = self.power;
        if order > 2 * p {
            return T::zero();
        }
        let x = wrap(x);
        let y = T::tau() - x;
        // Leibniz on x^p (2π - x)^p: no cancellation near the endpoints.
        let falling = |i: usize| (p - i + 1..=p).fold(T::one(), |a, v| a * T::from_usize_exact(v));
        let mut acc = T::zero();
        for i in order.saturating_sub(p)..=order.min(p) {
            let j = order - i;
            let left = falling(i) * x.powi((p - i) as i32);
            let right = falling(j) * y.powi((p - j) as i32);
            let term = T::from_u64(binomial(order, i)).expect("small") * left * right;
            if j.is_multiple_of(2) {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc / self.scale.powi(p as i32)
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn breakpoints(&self) -> Vec<T> {
        vec![T::zero()]
    }
}

type Derivative<T> = Box<dyn Fn(T) -> T + Send + Sync>;

/// User-supplied closures, one per derivative order.
pub struct FnField<T> {
    derivatives: Vec<Derivative<T>>,
    breakpoints: Vec<T>,
}

impl<T: Real> FnField<T> {
    /// `derivatives[p]` evaluates `g^{(p)}`. Rejects non-periodic input.
    pub fn new(derivatives: Vec<Derivative<T>>) -> Result<Self> {
        Self::with_breakpoints(derivatives, Vec::new())
    }

    pub fn with_breakpoints(derivatives: Vec<Derivative<T>>, breakpoints: Vec<T>) -> Result<Self> {
        if derivatives.is_empty() {
            return Err(Error::DerivativeOrderUnavailable { required: 0, available: 0 });
        }
        let field = Self { derivatives, breakpoints };
        check_periodic(&field, usize::MAX)?;
        Ok(field)
    }
}

impl<T: Real> SmoothField<T> for FnField<T> {
    fn derivative(&self, order: usize, x: T) -> T {
        (self.derivatives[order])(x)
    }

    fn max_order(&self) -> usize {
        self.derivatives.len() - 1
    }

    fn breakpoints(&self) -> Vec<T> {
        self.breakpoints.clone()
    }
}

/// `g(x - shift)`.
#[derive(Clone)]
pub struct Shifted<T> {
    inner: FieldRef<T>,
    shift: T,
}

impl<T: Real> Shifted<T> {
    pub fn new(inner: FieldRef<T>, shift: T) -> Self {
        Self { inner, shift }
    }
}

impl<T: Real> SmoothField<T> for Shifted<T> {
    fn derivative(&self, order: usize, x: T) -> T {
        self.inner.derivative(order, x - self.shift)
    }

    fn max_order(&self) -> usize {
        self.inner.max_order()
    }

    fn breakpoints(&self) -> Vec<T> {
        self.inner.breakpoints().into_iter().map(|b| wrap(b + self.shift)).collect()
    }
}

/// `Σ c_i g_i(x)`.
#[derive(Clone)]
pub struct LinearCombination<T> {
    terms: Vec<(T, FieldRef<T>)>,
}

impl<T: Real> LinearCombination<T> {
    pub fn new(terms: Vec<(T, FieldRef<T>)>) -> Self {
        Self { terms }
    }
}

impl<T: Real> SmoothField<T> for LinearCombination<T> {
    fn derivative(&self, order: usize, x: T) -> T {
        self.terms.iter().filter(|(c, _)| !c.is_zero()).map(|(c, g)| *c * g.derivative(order, x)).sum()
    }

    fn max_order(&self) -> usize {
        self.terms.iter().map(|(_, g)| g.max_order()).min().unwrap_or(usize::MAX)
    }

    fn breakpoints(&self) -> Vec<T> {
        let mut all: Vec<T> =
            self.terms.iter().filter(|(c, _)| !c.is_zero()).flat_map(|(_, g)| g.breakpoints()).collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        all.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * T::cst(64.0));
        all
    }
}

/// Constant field, handy for tests and trivial presets.
#[derive(Clone, Copy, Debug)]
pub struct Constant<T>(pub T);

impl<T: Real> SmoothField<T> for Constant<T> {
    fn derivative(&self, order: usize, _x: T) -> T {
        if order == 0 {
            self.0
        } else {
            T::zero()
        }
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sin_power_matches_direct_evaluation() {
        for p in 0..=10 {
            let s = TrigSeries::<f64>::sin_power(p);
            for i in 0..50 {
                let x = 0.131 * i as f64;
                let expect = x.sin().powi(p as i32);
                assert!((s.eval(x) - expect).abs() < 1e-14, "p={p} x={x}");
            }
        }
    }

    #[test]
    fn derivatives_are_consistent_with_finite_differences() {
        let fields: Vec<Box<dyn SmoothField<f64>>> = vec![
            Box::new(TrigSeries::sin_power(4)),
            Box::new(AbsSinPower::new(3)),
            Box::new(PolyBump::new(std::f64::consts::TAU, 6)),
            Box::new(PolyBump::new(4.0, 8)),
        ];
        for f in &fields {
            for order in 0..6 {
                for &x in &[0.4, 1.7, 2.9, 4.1, 5.6] {
                    let num = {
                        let e = 1e-5;
                        (f.derivative(order, x + e) - f.derivative(order, x - e)) / (2.0 * e)
                    };
                    let ana = f.derivative(order + 1, x);
                    let scale = ana.abs().max(1.0);
                    assert!((num - ana).abs() < 1e-5 * scale, "order {order} x {x}: {num} vs {ana}");
                }
            }
        }
    }

    #[test]
    fn preset_fields_are_periodic() {
        check_periodic(&TrigSeries::<f64>::sin_power(6), 8).unwrap();
        check_periodic(&AbsSinPower::<f64>::new(5), 8).unwrap();
        // Even powers make the bump C^p across the wrap point.
        check_periodic(&PolyBump::<f64>::new(std::f64::consts::TAU, 4), 4).unwrap();
    }

    #[test]
    fn abs_sin_power_is_nonnegative_with_kinks() {
        let f = AbsSinPower::<f64>::new(3);
        for i in 0..200 {
            let x = -7.0 + 0.07 * i as f64;
            assert!((f.eval(x) - x.sin().abs().powi(3)).abs() < 1e-14);
        }
        assert_eq!(f.breakpoints().len(), 2);
    }

    #[test]
    fn fn_field_rejects_non_periodic_data() {
        let ok = FnField::<f64>::new(vec![Box::new(|x: f64| x.cos()), Box::new(|x: f64| -x.sin())]);
        assert!(ok.is_ok());
        let bad = FnField::<f64>::new(vec![Box::new(|x: f64| x)]);
        assert!(matches!(bad, Err(Error::NonPeriodic { order: 0, .. })));
        let f = ok.unwrap();
        assert!(matches!(require_order(&f, 3), Err(Error::DerivativeOrderUnavailable { required: 3, available: 1 })));
    }

    #[test]
    fn spectral_constructor_recovers_trig_polynomial() {
        let s = TrigSeries::<f64>::from_samples(|x| x.sin().powi(4) + 0.25 * (3.0 * x).sin(), 4096);
        let exact = TrigSeries::<f64>::sin_power(4);
        for i in 0..20 {
            let x = 0.3 * i as f64;
            for order in 0..5 {
                let e = exact.derivative(order, x)
                    + 0.25 * 3f64.powi(order as i32) * (3.0 * x + order as f64 * std::f64::consts::FRAC_PI_2).sin();
                assert!((s.derivative(order, x) - e).abs() < 1e-9, "order {order}");
            }
        }
    }

    #[test]
    fn combination_and_shift() {
        let g: FieldRef<f64> = Arc::new(TrigSeries::sin_power(1));
        let c: FieldRef<f64> = Arc::new(Constant(2.0));
        let lc = LinearCombination::new(vec![(3.0, g.clone()), (0.5, c)]);
        assert!((lc.eval(1.0) - (3.0 * 1f64.sin() + 1.0)).abs() < 1e-15);
        let sh = Shifted::new(g, 0.5);
        assert!((sh.derivative(1, 2.0) - 1.5f64.cos()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn trig_series_derivative_cycle(x in 0.0f64..6.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let s = TrigSeries::new(vec![0.0, 0.0, a], vec![0.0, 0.0, b]);
            let d4 = s.derivative(4, x);
            prop_assert!((d4 - 16.0 * s.eval(x)).abs() < 1e-12);
        }
    }
}
