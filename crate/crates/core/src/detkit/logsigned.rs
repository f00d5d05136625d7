use std::ops::{Div, Mul};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// A value `phase · exp(log_magnitude)`, or exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogSignedValue<T: Real> {
    pub phase: Complex<T>,
    pub log_magnitude: T,
    pub zero_flag: bool,
}

impl<T: Real> LogSignedValue<T> {
    pub fn zero() -> Self {
        Self {
            phase: Complex::new(T::one(), T::zero()),
            log_magnitude: T::neg_infinity(),
            zero_flag: true,
        }
    }

    pub fn one() -> Self {
        Self::from_log(T::one(), T::zero())
    }

    /// A real value `sign · exp(log_magnitude)`; `sign` must be `±1`.
    pub fn from_log(sign: T, log_magnitude: T) -> Self {
        Self {
            phase: Complex::new(sign.signum(), T::zero()),
            log_magnitude,
            zero_flag: false,
        }
    }

    pub fn from_polar(phase: Complex<T>, log_magnitude: T) -> Self {
        Self { phase: phase / phase.norm(), log_magnitude, zero_flag: false }
    }

    pub fn from_real(x: T) -> Self {
        if x == T::zero() {
            Self::zero()
        } else {
            Self::from_log(x.signum(), x.abs().ln())
        }
    }

    pub fn from_complex(z: Complex<T>) -> Self {
        let r = z.norm();
        if r == T::zero() {
            Self::zero()
        } else {
            Self::from_polar(z / r, r.ln())
        }
    }

    /// The real sign of the value: `±1`, or `0` for zero.
    pub fn sign(&self) -> T {
        if self.zero_flag {
            T::zero()
        } else {
            self.phase.re.signum()
        }
    }

    pub fn to_real(&self) -> T {
        if self.zero_flag {
            T::zero()
        } else {
            self.phase.re * self.log_magnitude.exp()
        }
    }

    pub fn to_complex(&self) -> Complex<T> {
        if self.zero_flag {
            Complex::new(T::zero(), T::zero())
        } else {
            self.phase * self.log_magnitude.exp()
        }
    }

    /// Snaps the phase to the nearest of `±1`; used for quantities known to be real.
    pub fn into_real(mut self) -> Self {
        if !self.zero_flag {
            self.phase = Complex::new(self.phase.re.signum(), T::zero());
        }
        self
    }

    /// Raises to a real power; the phase is raised on its principal branch.
    pub fn powf(&self, e: T) -> Self {
        if self.zero_flag {
            return *self;
        }
        let arg = self.phase.arg() * e;
        Self {
            phase: Complex::new(arg.cos(), arg.sin()),
            log_magnitude: self.log_magnitude * e,
            zero_flag: false,
        }
    }

    /// Sum in the log domain.
    pub fn add(&self, other: &Self) -> Self {
        if self.zero_flag {
            return *other;
        }
        if other.zero_flag {
            return *self;
        }
        let top = self.log_magnitude.max(other.log_magnitude);
        let z = self.phase * (self.log_magnitude - top).exp() + other.phase * (other.log_magnitude - top).exp();
        let mut out = Self::from_complex(z);
        if !out.zero_flag {
            out.log_magnitude = out.log_magnitude + top;
        }
        out
    }

    /// Relative distance `|a - b| / max(|a|, |b|)` computed without overflow.
    pub fn rel_diff(&self, other: &Self) -> T {
        if self.zero_flag && other.zero_flag {
            return T::zero();
        }
        let top = self.log_magnitude.max(other.log_magnitude);
        let a = if self.zero_flag { Complex::new(T::zero(), T::zero()) } else { self.phase * (self.log_magnitude - top).exp() };
        let b = if other.zero_flag { Complex::new(T::zero(), T::zero()) } else { other.phase * (other.log_magnitude - top).exp() };
        (a - b).norm() / a.norm().max(b.norm())
    }
}

impl<T: Real> Mul for LogSignedValue<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.zero_flag || rhs.zero_flag {
            return Self::zero();
        }
        Self {
            phase: self.phase * rhs.phase,
            log_magnitude: self.log_magnitude + rhs.log_magnitude,
            zero_flag: false,
        }
    }
}

impl<T: Real> Div for LogSignedValue<T> {
    type Output = Self;

    /// Division by zero yields a non-finite magnitude rather than panicking.
    fn div(self, rhs: Self) -> Self {
        if self.zero_flag {
            return Self::zero();
        }
        Self {
            phase: self.phase * rhs.phase.conj(),
            log_magnitude: self.log_magnitude - rhs.log_magnitude,
            zero_flag: false,
        }
    }
}
