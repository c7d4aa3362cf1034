//! Truncated Taylor arithmetic: a `Jet<N>` carries the first `N` Taylor
//! coefficients of a function at a point, so derivatives of closed-form
//! expressions come out exact up to rounding.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    /// Taylor coefficients: `c[k] = f^(k)(x0) / k!`.
    pub c: [f64; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        Jet { c }
    }

    /// The independent variable at `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = x0;
        if N > 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative.
    pub fn deriv(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.c[k] * fact
    }

    pub fn scale(self, s: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|x| *x *= s);
        Jet { c }
    }

    pub fn offset(self, s: f64) -> Self {
        let mut c = self.c;
        c[0] += s;
        Jet { c }
    }

    pub fn exp(self) -> Self {
        let a = &self.c;
        let mut e = [0.0; N];
        e[0] = a[0].exp();
        for k in 1..N {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * a[j] * e[k - j];
            }
            e[k] = acc / k as f64;
        }
        Jet { c: e }
    }

    pub fn sin_cos(self) -> (Self, Self) {
        let a = &self.c;
        let mut s = [0.0; N];
        let mut c = [0.0; N];
        s[0] = a[0].sin();
        c[0] = a[0].cos();
        for k in 1..N {
            let (mut as_, mut ac) = (0.0, 0.0);
            for j in 1..=k {
                as_ += j as f64 * a[j] * c[k - j];
                ac += j as f64 * a[j] * s[k - j];
            }
            s[k] = as_ / k as f64;
            c[k] = -ac / k as f64;
        }
        (Jet { c: s }, Jet { c })
    }

    pub fn sin(self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(self) -> Self {
        self.sin_cos().1
    }

    pub fn sinh_cosh(self) -> (Self, Self) {
        let a = &self.c;
        let mut s = [0.0; N];
        let mut c = [0.0; N];
        s[0] = a[0].sinh();
        c[0] = a[0].cosh();
        for k in 1..N {
            let (mut as_, mut ac) = (0.0, 0.0);
            for j in 1..=k {
                as_ += j as f64 * a[j] * c[k - j];
                ac += j as f64 * a[j] * s[k - j];
            }
            s[k] = as_ / k as f64;
            c[k] = ac / k as f64;
        }
        (Jet { c: s }, Jet { c })
    }

    pub fn sqrt(self) -> Self {
        let a = &self.c;
        let mut r = [0.0; N];
        r[0] = a[0].sqrt();
        for k in 1..N {
            let mut acc = a[k];
            for j in 1..k {
                acc -= r[j] * r[k - j];
            }
            r[k] = acc / (2.0 * r[0]);
        }
        Jet { c: r }
    }

    pub fn recip(self) -> Self {
        Jet::constant(1.0) / self
    }

    pub fn powi(self, n: u32) -> Self {
        let mut out = Jet::constant(1.0);
        for _ in 0..n {
            out = out * self;
        }
        out
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c) {
            *x += y;
        }
        Jet { c }
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c) {
            *x -= y;
        }
        Jet { c }
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [0.0; N];
        for k in 0..N {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += self.c[j] * o.c[k - j];
            }
            c[k] = acc;
        }
        Jet { c }
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let mut q = [0.0; N];
        for k in 0..N {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= o.c[j] * q[k - j];
            }
            q[k] = acc / o.c[0];
        }
        Jet { c: q }
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    fn add(self, s: f64) -> Self {
        self.offset(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        let x = Jet::<5>::variable(2.0);
        let p = x * x * x + x * 3.0;
        assert_eq!(p.deriv(0), 14.0);
        assert_eq!(p.deriv(1), 15.0);
        assert_eq!(p.deriv(2), 12.0);
        assert_eq!(p.deriv(3), 6.0);
        assert_eq!(p.deriv(4), 0.0);
    }

    #[test]
    fn elementary_functions() {
        let x0 = 0.7;
        let x = Jet::<4>::variable(x0);
        let (s, c) = x.sin_cos();
        assert!((s.deriv(3) + x0.cos()).abs() < 1e-15);
        assert!((c.deriv(2) + x0.cos()).abs() < 1e-15);
        let e = (x * 2.0).exp();
        assert!((e.deriv(3) - 8.0 * (2.0 * x0).exp()).abs() < 1e-12);
        let (sh, ch) = x.sinh_cosh();
        assert!((sh.deriv(1) - x0.cosh()).abs() < 1e-15);
        assert!((ch.deriv(3) - x0.sinh()).abs() < 1e-15);
        let r = x.sqrt();
        assert!((r.deriv(2) + 0.25 * x0.powf(-1.5)).abs() < 1e-14);
        let q = x.recip();
        assert!((q.deriv(3) + 6.0 / x0.powi(4)).abs() < 1e-12);
    }
}
