//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries the value, gradient and Hessian of a scalar with respect
//! to a fixed set of `arity` chart variables. Evaluating a chart function once
//! over seeded jets yields all first and second partials exactly, up to
//! rounding.
//!
//! ```
//! use warpcheck::jets::Jet2;
//!
//! let v = Jet2::seed_all(&[2.0, 3.0]);
//! let p = &v[0] * &v[1];
//! assert_eq!(p.value(), 6.0);
//! assert_eq!(p.gradient(), &[3.0, 2.0]);
//! assert_eq!(p.hessian(0, 1), 1.0);
//! ```
//!
//! Operator overloads panic on mixed arity, the same way shape mismatches do
//! in dense linear algebra crates. The `try_*` and `checked_*` methods return
//! [`Error`] instead and are what the expression evaluator uses.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Truncated second-order Taylor expansion of a scalar.
///
/// The Hessian is stored packed (upper triangle, row-major) and mirrored on
/// read, so it is symmetric by construction.
#[derive(Clone, PartialEq)]
pub struct Jet2 {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

#[inline]
fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl Jet2 {
    /// A constant: zero gradient and Hessian.
    pub fn constant(value: f64, arity: usize) -> Self {
        Jet2 {
            value,
            grad: vec![0.0; arity],
            hess: vec![0.0; packed_len(arity)],
        }
    }

    /// The coordinate function `x[index]` expanded at `point`.
    pub fn seed_variable(point: &[f64], index: usize) -> Result<Self> {
        if index >= point.len() {
            return Err(Error::Arity(format!(
                "cannot seed axis {index} of a {}-dimensional point",
                point.len()
            )));
        }
        let mut jet = Jet2::constant(point[index], point.len());
        jet.grad[index] = 1.0;
        Ok(jet)
    }

    /// Seeds every coordinate of `point`.
    pub fn seed_all(point: &[f64]) -> Vec<Self> {
        (0..point.len())
            .map(|i| {
                let mut jet = Jet2::constant(point[i], point.len());
                jet.grad[i] = 1.0;
                jet
            })
            .collect()
    }

    /// Arity-0 jets: plain values with no active variables.
    pub fn plain(point: &[f64]) -> Vec<Self> {
        point.iter().map(|&x| Jet2::constant(x, 0)).collect()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn arity(&self) -> usize {
        self.grad.len()
    }

    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }

    pub fn partial(&self, i: usize) -> f64 {
        self.grad[i]
    }

    pub fn hessian(&self, i: usize, j: usize) -> f64 {
        self.hess[packed_index(self.arity(), i, j)]
    }

    /// Dense row-major copy of the Hessian.
    pub fn hessian_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.arity();
        (0..n)
            .map(|i| (0..n).map(|j| self.hessian(i, j)).collect())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }

    fn check_arity(&self, other: &Jet2) -> Result<()> {
        if self.arity() != other.arity() {
            return Err(Error::Arity(format!(
                "jets of arity {} and {} combined",
                self.arity(),
                other.arity()
            )));
        }
        Ok(())
    }

    /// Applies a scalar function `g` with `g(u) = d0`, `g'(u) = d1`, `g''(u) = d2`.
    fn chain(&self, d0: f64, d1: f64, d2: f64) -> Jet2 {
        let n = self.arity();
        let grad = self.grad.iter().map(|g| d1 * g).collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..n {
            for j in i..n {
                hess.push(d1 * self.hess[packed_index(n, i, j)] + d2 * self.grad[i] * self.grad[j]);
            }
        }
        Jet2 {
            value: d0,
            grad,
            hess,
        }
    }

    fn product(&self, other: &Jet2) -> Jet2 {
        let n = self.arity();
        let (u, v) = (self.value, other.value);
        let grad = (0..n).map(|i| u * other.grad[i] + v * self.grad[i]).collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..n {
            for j in i..n {
                let k = packed_index(n, i, j);
                hess.push(
                    u * other.hess[k]
                        + v * self.hess[k]
                        + self.grad[i] * other.grad[j]
                        + self.grad[j] * other.grad[i],
                );
            }
        }
        Jet2 {
            value: u * v,
            grad,
            hess,
        }
    }

    fn zip(&self, other: &Jet2, sign: f64) -> Jet2 {
        Jet2 {
            value: self.value + sign * other.value,
            grad: self.grad.iter().zip(&other.grad).map(|(a, b)| a + sign * b).collect(),
            hess: self.hess.iter().zip(&other.hess).map(|(a, b)| a + sign * b).collect(),
        }
    }

    fn scale(&self, k: f64) -> Jet2 {
        Jet2 {
            value: k * self.value,
            grad: self.grad.iter().map(|g| k * g).collect(),
            hess: self.hess.iter().map(|h| k * h).collect(),
        }
    }

    fn reciprocal_unchecked(&self) -> Jet2 {
        let u = self.value;
        self.chain(1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u))
    }

    pub fn try_add(&self, other: &Jet2) -> Result<Jet2> {
        self.check_arity(other)?;
        Ok(self.zip(other, 1.0))
    }

    pub fn try_sub(&self, other: &Jet2) -> Result<Jet2> {
        self.check_arity(other)?;
        Ok(self.zip(other, -1.0))
    }

    pub fn try_mul(&self, other: &Jet2) -> Result<Jet2> {
        self.check_arity(other)?;
        Ok(self.product(other))
    }

    pub fn checked_div(&self, other: &Jet2) -> Result<Jet2> {
        self.check_arity(other)?;
        Ok(self.product(&other.checked_recip()?))
    }

    pub fn checked_recip(&self) -> Result<Jet2> {
        if self.value == 0.0 {
            return Err(Error::Singularity("reciprocal of zero".into()));
        }
        Ok(self.reciprocal_unchecked())
    }

    /// Integer power. Negative exponents require a nonzero base.
    pub fn checked_powi(&self, k: i32) -> Result<Jet2> {
        if k < 0 && self.value == 0.0 {
            return Err(Error::Singularity(format!("zero raised to power {k}")));
        }
        Ok(self.powi(k))
    }

    pub fn checked_sqrt(&self) -> Result<Jet2> {
        if self.value <= 0.0 {
            return Err(Error::Domain(format!(
                "square root of non-positive value {}",
                self.value
            )));
        }
        Ok(self.sqrt())
    }

    /// Unchecked reciprocal; produces non-finite entries at zero.
    pub fn recip(&self) -> Jet2 {
        self.reciprocal_unchecked()
    }

    pub fn powi(&self, k: i32) -> Jet2 {
        match k {
            0 => Jet2::constant(1.0, self.arity()),
            1 => self.clone(),
            _ => {
                let u = self.value;
                let kf = f64::from(k);
                self.chain(u.powi(k), kf * u.powi(k - 1), kf * (kf - 1.0) * u.powi(k - 2))
            }
        }
    }

    pub fn sqrt(&self) -> Jet2 {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }
}

impl fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet2")
            .field("value", &self.value)
            .field("gradient", &self.grad)
            .field("hessian", &self.hessian_matrix())
            .finish()
    }
}

macro_rules! binary_jet_op {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Jet2> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 {
                match self.$checked(rhs) {
                    Ok(j) => j,
                    Err(e) => panic!("{e}"),
                }
            }
        }
        impl $trait<Jet2> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet2> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet2> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                self.$method(&rhs)
            }
        }
    };
}

binary_jet_op!(Add, add, try_add);
binary_jet_op!(Sub, sub, try_sub);
binary_jet_op!(Mul, mul, try_mul);

impl Div<&Jet2> for &Jet2 {
    type Output = Jet2;
    fn div(self, rhs: &Jet2) -> Jet2 {
        if let Err(e) = self.check_arity(rhs) {
            panic!("{e}");
        }
        self.product(&rhs.reciprocal_unchecked())
    }
}

impl Div<Jet2> for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: Jet2) -> Jet2 {
        &self / &rhs
    }
}

impl Div<&Jet2> for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: &Jet2) -> Jet2 {
        &self / rhs
    }
}

impl Div<Jet2> for &Jet2 {
    type Output = Jet2;
    fn div(self, rhs: Jet2) -> Jet2 {
        self / &rhs
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

macro_rules! scalar_jet_op {
    ($trait:ident, $method:ident, $body:expr, $rbody:expr) => {
        impl $trait<f64> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: f64) -> Jet2 {
                let f: fn(&Jet2, f64) -> Jet2 = $body;
                f(self, rhs)
            }
        }
        impl $trait<f64> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: f64) -> Jet2 {
                (&self).$method(rhs)
            }
        }
        impl $trait<&Jet2> for f64 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 {
                let f: fn(f64, &Jet2) -> Jet2 = $rbody;
                f(self, rhs)
            }
        }
        impl $trait<Jet2> for f64 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                self.$method(&rhs)
            }
        }
    };
}

scalar_jet_op!(
    Add,
    add,
    |a, k| {
        let mut r = a.clone();
        r.value += k;
        r
    },
    |k, a| a + k
);
scalar_jet_op!(
    Sub,
    sub,
    |a, k| {
        let mut r = a.clone();
        r.value -= k;
        r
    },
    |k, a| -a + k
);
scalar_jet_op!(Mul, mul, |a, k| a.scale(k), |k, a| a.scale(k));
scalar_jet_op!(Div, div, |a, k| a.scale(1.0 / k), |k, a| a.reciprocal_unchecked().scale(k));

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seeding() {
        let j = Jet2::seed_variable(&[0.0, 0.0, 1.0], 2).unwrap();
        assert_eq!(j.value(), 1.0);
        assert_eq!(j.gradient(), &[0.0, 0.0, 1.0]);
        assert!(j.hessian_matrix().iter().flatten().all(|&h| h == 0.0));

        let j = Jet2::seed_variable(&[2.0, 5.0], 0).unwrap();
        assert_eq!(j.value(), 2.0);
        assert_eq!(j.gradient(), &[1.0, 0.0]);

        assert!(matches!(Jet2::seed_variable(&[3.0], 1), Err(Error::Arity(_))));
    }

    #[test]
    fn square_and_reciprocal() {
        let x = Jet2::seed_variable(&[3.0], 0).unwrap();
        let sq = &x * &x;
        assert_eq!((sq.value(), sq.partial(0), sq.hessian(0, 0)), (9.0, 6.0, 2.0));

        let x = Jet2::seed_variable(&[2.0], 0).unwrap();
        let r = x.checked_recip().unwrap();
        assert_eq!((r.value(), r.partial(0), r.hessian(0, 0)), (0.5, -0.25, 0.25));
    }

    #[test]
    fn mixed_partial_of_product() {
        let v = Jet2::seed_all(&[2.0, 3.0]);
        let p = &v[0] * &v[1];
        assert_eq!(p.value(), 6.0);
        assert_eq!(p.gradient(), &[3.0, 2.0]);
        assert_eq!(p.hessian_matrix(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn error_paths() {
        let a = Jet2::constant(1.0, 2);
        let b = Jet2::constant(1.0, 3);
        assert!(matches!(a.try_add(&b), Err(Error::Arity(_))));
        assert!(matches!(a.try_mul(&b), Err(Error::Arity(_))));
        let z = Jet2::constant(0.0, 2);
        assert!(matches!(a.checked_div(&z), Err(Error::Singularity(_))));
        assert!(matches!(z.checked_recip(), Err(Error::Singularity(_))));
        assert!(matches!(z.checked_powi(-2), Err(Error::Singularity(_))));
        assert!(matches!((-a.clone()).checked_sqrt(), Err(Error::Domain(_))));
    }

    #[test]
    #[should_panic(expected = "arity")]
    fn operator_panics_on_mixed_arity() {
        let _ = Jet2::constant(1.0, 2) + Jet2::constant(1.0, 1);
    }

    #[test]
    fn powers_and_sqrt() {
        let x = Jet2::seed_variable(&[4.0], 0).unwrap();
        let s = x.checked_sqrt().unwrap();
        assert_eq!(s.value(), 2.0);
        assert!((s.partial(0) - 0.25).abs() < 1e-15);
        assert!((s.hessian(0, 0) + 1.0 / 32.0).abs() < 1e-15);

        let c = x.powi(-2);
        assert!((c.value() - 1.0 / 16.0).abs() < 1e-15);
        assert!((c.partial(0) + 2.0 / 64.0).abs() < 1e-15);
        assert!((c.hessian(0, 0) - 6.0 / 256.0).abs() < 1e-15);
        assert_eq!(x.powi(0).value(), 1.0);
    }

    fn quadratic(p: &[f64]) -> Jet2 {
        let v = Jet2::seed_all(p);
        &v[0] * &v[0] * 3.0 - &v[0] * &v[1] * 2.0 + &v[1] * 0.5 + 7.0
    }

    fn jet(v: f64, g: [f64; 2], h: [f64; 3]) -> Jet2 {
        Jet2 {
            value: v,
            grad: g.to_vec(),
            hess: h.to_vec(),
        }
    }

    fn close(a: &Jet2, b: &Jet2, tol: f64) -> bool {
        (a.value - b.value).abs() <= tol
            && a.grad.iter().zip(&b.grad).all(|(x, y)| (x - y).abs() <= tol)
            && a.hess.iter().zip(&b.hess).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn small() -> impl Strategy<Value = f64> {
        -2.0..2.0f64
    }

    fn any_jet() -> impl Strategy<Value = Jet2> {
        (small(), [small(), small()], [small(), small(), small()]).prop_map(|(v, g, h)| jet(v, g, h))
    }

    proptest! {
        #[test]
        fn quadratic_hessian_is_constant(x in -10.0..10.0f64, y in -10.0..10.0f64) {
            let h = quadratic(&[x, y]).hessian_matrix();
            let h0 = quadratic(&[0.0, 0.0]).hessian_matrix();
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((h[i][j] - h0[i][j]).abs() <= 1e-14);
                }
            }
        }

        #[test]
        fn add_mul_commute_and_associate(a in any_jet(), b in any_jet(), c in any_jet()) {
            prop_assert!(close(&(&a + &b), &(&b + &a), 1e-14));
            prop_assert!(close(&(&a * &b), &(&b * &a), 1e-14));
            prop_assert!(close(&((&a + &b) + &c), &(&a + (&b + &c)), 1e-14));
            prop_assert!(close(&((&a * &b) * &c), &(&a * (&b * &c)), 1e-14));
        }
    }
}
