//! Built-in experiments on `[0, 2π)` with analytic derivative closures.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::error_lab::Problem;
use crate::field::{AbsSinPower, FieldRef, PolyBump, TrigSeries};
use crate::projections::InitKind;
use crate::scalar::Real;
use crate::solver::{AdvectionSystem, ButcherTableau, FluxSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    /// `g = sin^{2k+2} x`, `a = 1`.
    Ex1,
    /// `g = |sin x|^{2k+1}`, kinks at `0` and `π`.
    Ex2,
    /// `g = (x (2π - x) / 2π)^{2k+2}`.
    Ex3,
    /// Linearized Euler: `ρ = sin⁶ x`, `u = (x (2π - x) / 4)⁸`.
    Ex4,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Ex1, Preset::Ex2, Preset::Ex3, Preset::Ex4];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Ex1 => "ex1",
            Preset::Ex2 => "ex2",
            Preset::Ex3 => "ex3",
            Preset::Ex4 => "ex4",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Ex1 => "scalar advection a=1, g(x)=sin^(2k+2)(x); cell-average convergence and error profiles",
            Preset::Ex2 => "scalar advection a=1, g(x)=|sin(x)|^(2k+1); localized order loss at the kinks x=0, pi (N even)",
            Preset::Ex3 => "scalar advection a=1, g(x)=(x(2pi-x)/(2pi))^(2k+2); transient error for L2, Gauss-Radau and special initializations",
            Preset::Ex4 => "linearized Euler rho0=1, u0=1, c=5, Lax-Friedrichs M=6; rho=sin^6(x), u=(x(2pi-x)/4)^8; combined l2 convergence",
        }
    }

    /// Default grid sequence for convergence tables.
    pub fn default_ns(self, k: usize) -> Vec<usize> {
        match (self, k) {
            (Preset::Ex4, 0 | 1) => vec![80, 160, 320, 640],
            (Preset::Ex4, 2) => vec![40, 80, 160, 320],
            (Preset::Ex4, _) => vec![20, 40, 80, 160],
            (Preset::Ex3, _) => vec![20, 40],
            (_, 3..) => vec![40, 80, 160],
            _ => vec![40, 80, 160, 320],
        }
    }

    /// Initializations compared in transient studies.
    pub fn transient_inits(self, k: usize) -> Vec<InitKind> {
        if k >= 3 {
            vec![InitKind::Special(1), InitKind::GaussRadau]
        } else {
            vec![InitKind::GaussRadau, InitKind::L2]
        }
    }

    /// Grid constraints beyond the generic ones.
    pub fn validate_n(self, n: usize) -> Result<()> {
        if self == Preset::Ex2 && !n.is_multiple_of(2) {
            return Err(Error::Config(format!("ex2 requires an even N so interfaces land on the kinks, got {n}")));
        }
        Ok(())
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown preset '{s}' (expected ex1, ex2, ex3 or ex4)")))
    }
}

/// Tunable inputs; `None` selects the preset default.
#[derive(Clone, Debug, PartialEq)]
pub struct PresetParams<T> {
    pub k: usize,
    pub init: Option<InitKind>,
    pub flux: Option<FluxSpec<T>>,
    pub t_final: T,
    pub cfl: T,
    pub scheme: ButcherTableau,
    pub rho0: T,
    pub u0: T,
    pub c: T,
}

impl<T: Real> PresetParams<T> {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            init: None,
            flux: None,
            t_final: T::one(),
            cfl: T::cst(0.1),
            scheme: ButcherTableau::fehlberg5(),
            rho0: T::one(),
            u0: T::one(),
            c: T::cst(5.0),
        }
    }
}

/// Initial data of `preset` per physical component.
pub fn initial_data<T: Real>(preset: Preset, k: usize) -> Vec<FieldRef<T>> {
    let tau = T::tau();
    match preset {
        Preset::Ex1 => vec![Arc::new(TrigSeries::<T>::sin_power(2 * k + 2))],
        Preset::Ex2 => vec![Arc::new(AbsSinPower::<T>::new(2 * k + 1))],
        Preset::Ex3 => vec![Arc::new(PolyBump::new(tau, 2 * k + 2))],
        Preset::Ex4 => vec![Arc::new(TrigSeries::<T>::sin_power(6)), Arc::new(PolyBump::new(T::cst(4.0), 8))],
    }
}

/// Complete problem for `preset`.
pub fn build<T: Real>(preset: Preset, params: &PresetParams<T>) -> Result<Problem<T>> {
    let (system, default_flux) = match preset {
        Preset::Ex4 => (
            AdvectionSystem::linearized_euler(params.rho0, params.u0, params.c)?,
            FluxSpec::LaxFriedrichs { m: T::cst(6.0) },
        ),
        _ => (AdvectionSystem::scalar(T::one()), FluxSpec::Upwind),
    };
    let flux = params.flux.unwrap_or(default_flux);
    flux.validate(&system)?;
    Ok(Problem {
        name: preset.name().to_string(),
        initial: initial_data(preset, params.k),
        system,
        flux,
        init: params.init.unwrap_or(InitKind::L2),
        t_final: params.t_final,
        cfl: params.cfl,
        scheme: params.scheme.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SmoothField;

    #[test]
    fn parse_and_list() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
            assert!(!p.description().is_empty());
        }
        assert!("ex5".parse::<Preset>().is_err());
        assert!(Preset::Ex2.validate_n(41).is_err() && Preset::Ex2.validate_n(40).is_ok());
    }

    #[test]
    fn initial_data_values() {
        let x = 1.3f64;
        let ex1 = &initial_data::<f64>(Preset::Ex1, 1)[0];
        assert!((ex1.eval(x) - x.sin().powi(4)).abs() < 1e-14);
        let ex2 = &initial_data::<f64>(Preset::Ex2, 1)[0];
        assert!((ex2.eval(4.0) - 4f64.sin().abs().powi(3)).abs() < 1e-14);
        let ex3 = &initial_data::<f64>(Preset::Ex3, 2)[0];
        let tau = std::f64::consts::TAU;
        assert!((ex3.eval(x) - (x * (tau - x) / tau).powi(6)).abs() < 1e-14);
        let ex4 = initial_data::<f64>(Preset::Ex4, 2);
        assert!((ex4[1].eval(x) - (x * (tau - x) / 4.0).powi(8)).abs() < 1e-9 * (x * (tau - x) / 4.0).powi(8));
    }

    #[test]
    fn euler_preset_speeds() {
        let p = build::<f64>(Preset::Ex4, &PresetParams::new(2)).unwrap();
        assert_eq!(p.system.speeds(), &[6.0, -4.0]);
        assert_eq!(p.flux, FluxSpec::LaxFriedrichs { m: 6.0 });
        let mut params = PresetParams::new(1);
        params.flux = Some(FluxSpec::Upwind);
        assert!(build::<f64>(Preset::Ex4, &params).is_err());
    }
}
