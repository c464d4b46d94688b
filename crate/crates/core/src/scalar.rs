//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All of the discretization, projection and spectral code is written against
//! [`Real`], so the same algorithms run in `f32`, `f64` or the software
//! [`DoubleDouble`] type. The latter is what makes the eigenvalue expansion
//! fits possible for k = 3, where `|λ₀ + i·mh|` drops to 1e-19.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{FromPrimitive, Num, NumAssign, Signed, ToPrimitive};

mod double_double;

pub use double_double::DoubleDouble;

/// Real scalar field used throughout the crate.
pub trait Real:
    Num
    + NumAssign
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Copy
    + PartialOrd
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    fn pi() -> Self;
    /// Unit roundoff of the representation.
    fn epsilon() -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn floor(self) -> Self;
    fn is_finite(self) -> bool;

    /// Converts an `f64` literal. Panics only for NaN-producing conversions,
    /// which never happen for the supported types.
    #[inline]
    fn cst(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn tau() -> Self {
        Self::pi() + Self::pi()
    }

    #[inline]
    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    #[inline]
    fn hypot(self, other: Self) -> Self {
        let a = self.abs();
        let b = other.abs();
        let (big, small) = if a >= b { (a, b) } else { (b, a) };
        if big.is_zero() {
            return big;
        }
        let r = small / big;
        big * (Self::one() + r * r).sqrt()
    }

    #[inline]
    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    #[inline]
    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real_float {
    ($t:ident) => {
        impl Real for $t {
            #[inline]
            fn pi() -> Self {
                std::$t::consts::PI
            }
            #[inline]
            fn epsilon() -> Self {
                $t::EPSILON
            }
            #[inline]
            fn sqrt(self) -> Self {
                $t::sqrt(self)
            }
            #[inline]
            fn sin(self) -> Self {
                $t::sin(self)
            }
            #[inline]
            fn cos(self) -> Self {
                $t::cos(self)
            }
            #[inline]
            fn exp(self) -> Self {
                $t::exp(self)
            }
            #[inline]
            fn ln(self) -> Self {
                $t::ln(self)
            }
            #[inline]
            fn powi(self, n: i32) -> Self {
                $t::powi(self, n)
            }
            #[inline]
            fn floor(self) -> Self {
                $t::floor(self)
            }
            #[inline]
            fn is_finite(self) -> bool {
                $t::is_finite(self)
            }
            #[inline]
            fn hypot(self, other: Self) -> Self {
                $t::hypot(self, other)
            }
        }
    };
}

impl_real_float!(f32);
impl_real_float!(f64);

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Modulus of a complex number without overflow in the intermediate square.
#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

/// `e^{z}` for complex `z`.
#[inline]
pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    cis(z.im) * z.re.exp()
}

/// Integer power of a complex number by repeated squaring.
pub fn cpowi<T: Real>(z: Complex<T>, n: u32) -> Complex<T> {
    let mut base = z;
    let mut acc = Complex::new(T::one(), T::zero());
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

/// `(-1)^n` as a scalar.
#[inline]
pub fn parity<T: Real>(n: usize) -> T {
    if n.is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    }
}

/// `n!` as a scalar (exact while it fits in the mantissa).
pub fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, i| acc * T::from_usize_exact(i))
}
