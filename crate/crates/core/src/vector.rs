//! Points of a finite-dimensional real coordinate space.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Panics on an empty coordinate list.
    pub fn new(coords: Vec<f64>) -> Self {
        assert!(!coords.is_empty(), "vectors need at least one coordinate");
        Vector(coords)
    }

    pub fn scalar(x: f64) -> Self {
        Vector(vec![x])
    }

    pub fn zeros(dim: usize) -> Self {
        Vector::new(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Vector::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        match self.0.as_slice() {
            [c] => c.abs(),
            cs => cs.iter().map(|c| c * c).sum::<f64>().sqrt(),
        }
    }

    pub fn scale(&self, alpha: f64) -> Vector {
        Vector(self.0.iter().map(|c| alpha * c).collect())
    }

    /// `2^n · self`, exact in binary floating point barring overflow.
    pub fn dilate(&self, n: u32) -> Vector {
        self.scale(2f64.powi(n as i32))
    }
}

impl From<f64> for Vector {
    fn from(x: f64) -> Self {
        Vector::scalar(x)
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [c] => write!(f, "{c}"),
            cs => {
                f.write_str("(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl Add for &Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;

    fn sub(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;

    fn mul(self, rhs: &Vector) -> Vector {
        rhs.scale(self)
    }
}

impl Neg for &Vector {
    type Output = Vector;

    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let x = Vector::new(vec![1.0, 2.0]);
        let y = Vector::new(vec![0.5, -1.0]);
        assert_eq!(&x + &y, Vector::new(vec![1.5, 1.0]));
        assert_eq!(&x - &y, Vector::new(vec![0.5, 3.0]));
        assert_eq!(2.0 * &x, Vector::new(vec![2.0, 4.0]));
        assert_eq!(-&y, Vector::new(vec![-0.5, 1.0]));
        assert_eq!(x.dilate(3), Vector::new(vec![8.0, 16.0]));
    }

    #[test]
    fn norms() {
        assert_eq!(Vector::new(vec![3.0, 4.0]).norm(), 5.0);
        assert_eq!(Vector::scalar(-2.5).norm(), 2.5);
        assert!(Vector::zeros(3).is_zero());
        assert_eq!(Vector::basis(3, 1).coords(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn display() {
        assert_eq!(Vector::scalar(1.5).to_string(), "1.5");
        assert_eq!(Vector::new(vec![1.0, -2.0]).to_string(), "(1 -2)");
    }
}
