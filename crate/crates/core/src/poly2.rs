//! Dense bivariate polynomials in `(s, t)` with complex coefficients.
//!
//! Coefficient `(i, j)` multiplies `s^i t^j`. Storage is a square grid of side
//! `degree + 1`; entries with `i + j > degree` are kept at zero.

use num_complex::Complex64;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Magnitudes below this are flushed to zero so repeated integration
/// does not drag subnormals around.
const FLUSH: f64 = 1e-300;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    S,
    T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly2 {
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl Default for Poly2 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::with_degree(0)
    }

    /// All-zero polynomial with room for total degree `degree`.
    pub fn with_degree(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![ZERO; (degree + 1) * (degree + 1)],
        }
    }

    pub fn monomial(i: usize, j: usize, c: Complex64) -> Self {
        let mut p = Self::with_degree(i + j);
        p.set(i, j, c);
        p
    }

    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let terms: Vec<_> = terms.into_iter().collect();
        let degree = terms.iter().map(|&(i, j, _)| i + j).max().unwrap_or(0);
        let mut p = Self::with_degree(degree);
        for (i, j, c) in terms {
            let cur = p.coeff(i, j);
            p.set(i, j, cur + c);
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    fn width(&self) -> usize {
        self.degree + 1
    }

    #[inline]
    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        if i + j > self.degree {
            ZERO
        } else {
            self.coeffs[i * self.width() + j]
        }
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, c: Complex64) {
        debug_assert!(i + j <= self.degree);
        let w = self.width();
        self.coeffs[i * w + j] = flush(c);
    }

    /// Nonzero terms `(i, j, c)` in row-major order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        let w = self.width();
        (0..w).flat_map(move |i| {
            (0..w - i).filter_map(move |j| {
                let c = self.coeffs[i * w + j];
                (c != ZERO).then_some((i, j, c))
            })
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// Copy into a grid of a different (not smaller than needed) degree.
    fn resized(&self, degree: usize) -> Self {
        let mut out = Self::with_degree(degree);
        for (i, j, c) in self.terms() {
            if i + j <= degree {
                out.set(i, j, c);
            }
        }
        out
    }

    /// Drop trailing all-zero antidiagonals.
    pub fn trimmed(self) -> Self {
        let d = self.terms().map(|(i, j, _)| i + j).max().unwrap_or(0);
        if d == self.degree {
            self
        } else {
            self.resized(d)
        }
    }

    pub fn diff(&self, axis: Axis) -> Self {
        let mut out = Self::with_degree(self.degree.saturating_sub(1));
        for (i, j, c) in self.terms() {
            match axis {
                Axis::S if i > 0 => out.set(i - 1, j, c * i as f64),
                Axis::T if j > 0 => out.set(i, j - 1, c * j as f64),
                _ => {}
            }
        }
        out
    }

    pub fn diff_n(&self, axis: Axis, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.diff(axis))
    }

    /// Antiderivative along `axis` that vanishes where that variable is zero.
    pub fn integrate(&self, axis: Axis) -> Self {
        let mut out = Self::with_degree(self.degree + 1);
        for (i, j, c) in self.terms() {
            match axis {
                Axis::S => out.set(i + 1, j, c / (i + 1) as f64),
                Axis::T => out.set(i, j + 1, c / (j + 1) as f64),
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.coeffs {
            *v = flush(*v * c);
        }
        out
    }

    /// Horner in `t` inside Horner in `s`.
    pub fn eval(&self, s: f64, t: f64) -> Complex64 {
        let w = self.width();
        let mut acc = ZERO;
        for i in (0..w).rev() {
            let row = &self.coeffs[i * w..i * w + (w - i)];
            let inner = row.iter().rev().fold(ZERO, |a, &c| a * t + c);
            acc = acc * s + inner;
        }
        acc
    }

    /// `sum |c_ij| L^(i+j)`: an upper bound for `|p|` on `[0, L]^2`.
    pub fn sup_bound(&self, length: f64) -> f64 {
        self.terms()
            .map(|(i, j, c)| c.norm() * length.powi((i + j) as i32))
            .sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let degree = self.degree.max(other.degree);
        let mut out = Self::with_degree(degree);
        for i in 0..=degree {
            for j in 0..=degree - i {
                out.set(i, j, f(self.coeff(i, j), other.coeff(i, j)));
            }
        }
        out
    }
}

#[inline]
fn flush(c: Complex64) -> Complex64 {
    let re = if c.re.abs() < FLUSH { 0.0 } else { c.re };
    let im = if c.im.abs() < FLUSH { 0.0 } else { c.im };
    Complex64::new(re, im)
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Add for Poly2 {
    type Output = Poly2;
    fn add(self, rhs: Poly2) -> Poly2 {
        &self + &rhs
    }
}

impl Sub for Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: Poly2) -> Poly2 {
        &self - &rhs
    }
}

impl AddAssign<&Poly2> for Poly2 {
    fn add_assign(&mut self, rhs: &Poly2) {
        if rhs.degree > self.degree {
            *self = self.resized(rhs.degree);
        }
        for (i, j, c) in rhs.terms() {
            let cur = self.coeff(i, j);
            self.set(i, j, cur + c);
        }
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul<Complex64> for &Poly2 {
    type Output = Poly2;
    fn mul(self, c: Complex64) -> Poly2 {
        self.scale(c)
    }
}

impl Mul<f64> for &Poly2 {
    type Output = Poly2;
    fn mul(self, c: f64) -> Poly2 {
        self.scale(Complex64::new(c, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn triple_integral_of_st() {
        // s t -> s^2 t / 2 -> s^3 t / 6 -> s^3 t^2 / 12
        let p = Poly2::monomial(1, 1, c(1.0, 0.0));
        let q = p.integrate(Axis::S).integrate(Axis::S).integrate(Axis::T);
        assert_eq!(q.coeff(3, 2), c(1.0 / 12.0, 0.0));
        assert_eq!(q.terms().count(), 1);
    }

    #[test]
    fn diff_lowers_degree() {
        let p = Poly2::from_terms([(2, 1, c(3.0, 0.0)), (0, 0, c(1.0, 0.0))]);
        let d = p.diff(Axis::S);
        assert_eq!(d.degree(), 2);
        assert_eq!(d.coeff(1, 1), c(6.0, 0.0));
        assert_eq!(d.coeff(0, 0), c(0.0, 0.0));
        assert_eq!(Poly2::zero().diff(Axis::T).degree(), 0);
    }

    #[test]
    fn eval_matches_terms() {
        let p = Poly2::from_terms([(0, 0, c(1.0, 0.0)), (1, 2, c(0.0, 2.0)), (3, 0, c(-1.0, 0.5))]);
        let (s, t) = (0.7, -1.3);
        let want = c(1.0, 0.0) + c(0.0, 2.0) * s * t * t + c(-1.0, 0.5) * s.powi(3);
        assert!((p.eval(s, t) - want).norm() < 1e-14);
    }

    #[test]
    fn tiny_coefficients_flush() {
        let p = Poly2::monomial(0, 0, c(1e-200, 0.0)).scale(c(1e-150, 0.0));
        assert!(p.is_zero());
    }

    #[test]
    fn sup_bound_of_st_on_pi() {
        let p = Poly2::monomial(1, 1, c(-1.0 / 3.0, 0.0));
        let pi = std::f64::consts::PI;
        assert!((p.sup_bound(pi) - pi * pi / 3.0).abs() < 1e-15);
    }
}
