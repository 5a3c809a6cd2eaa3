//! Forward-mode derivative carrier so that one formula yields both `V(x)` and `V'(x)`.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Operations shared by plain reals and [`Dual`] numbers.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    fn value(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tanh(self) -> Self;
    fn abs(self) -> Self;
    fn powf(self, exponent: Self) -> Self;
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn value(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powf(self, exponent: Self) -> Self {
        pow_real(self, exponent)
    }
}

/// Integer exponents go through `powi` so that negative bases behave.
fn pow_real(base: f64, exponent: f64) -> f64 {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub fn variable(x: f64) -> Self {
        Self { re: x, eps: 1.0 }
    }
}

impl Add for Dual {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, eps: self.eps + o.eps }
    }
}

impl Sub for Dual {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, eps: self.eps - o.eps }
    }
}

impl Mul for Dual {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self { re: self.re * o.re, eps: self.eps * o.re + self.re * o.eps }
    }
}

impl Div for Dual {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let re = self.re / o.re;
        Self { re, eps: (self.eps - re * o.eps) / o.re }
    }
}

impl Neg for Dual {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, eps: -self.eps }
    }
}

impl Scalar for Dual {
    fn constant(c: f64) -> Self {
        Self { re: c, eps: 0.0 }
    }
    fn value(self) -> f64 {
        self.re
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Self { re: e, eps: e * self.eps }
    }
    fn ln(self) -> Self {
        Self { re: self.re.ln(), eps: self.eps / self.re }
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Self { re: s, eps: self.eps / (2.0 * s) }
    }
    fn sin(self) -> Self {
        Self { re: self.re.sin(), eps: self.re.cos() * self.eps }
    }
    fn cos(self) -> Self {
        Self { re: self.re.cos(), eps: -self.re.sin() * self.eps }
    }
    fn tanh(self) -> Self {
        let t = self.re.tanh();
        Self { re: t, eps: (1.0 - t * t) * self.eps }
    }
    fn abs(self) -> Self {
        if self.re < 0.0 {
            -self
        } else {
            self
        }
    }
    fn powf(self, exponent: Self) -> Self {
        let re = pow_real(self.re, exponent.re);
        // d(a^b) = b a^(b-1) da + a^b ln(a) db; the second term only when b varies.
        let mut eps = exponent.re * pow_real(self.re, exponent.re - 1.0) * self.eps;
        if exponent.eps != 0.0 {
            eps += re * self.re.ln() * exponent.eps;
        }
        Self { re, eps }
    }
}
