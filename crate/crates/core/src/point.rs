//! Points/vectors of the d-dimensional Euclidean state space.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A point (or vector) of the state space, with finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Panics on empty or non-finite coordinates.
    pub fn new(coords: Vec<f64>) -> Self {
        assert!(!coords.is_empty(), "point must have dimension >= 1");
        assert!(
            coords.iter().all(|c| c.is_finite()),
            "point coordinates must be finite: {coords:?}"
        );
        Point { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Point::new(vec![0.0; dim])
    }

    /// One-dimensional point.
    pub fn scalar(x: f64) -> Self {
        Point::new(vec![x])
    }

    /// Unit vector along coordinate axis `axis`.
    pub fn axis(dim: usize, axis: usize) -> Self {
        let mut c = vec![0.0; dim];
        c[axis] = 1.0;
        Point::new(c)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> f64 {
        self.coords[i]
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance_to(&self, other: &Point) -> f64 {
        (self - other).norm()
    }

    pub fn scale(&self, s: f64) -> Point {
        Point::new(self.coords.iter().map(|c| c * s).collect())
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    /// Normalized copy, or `None` for the zero vector.
    pub fn unit(&self) -> Option<Point> {
        let n = self.norm();
        if n == 0.0 {
            None
        } else {
            Some(self.scale(1.0 / n))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| *c == 0.0)
    }
}

impl Add for &Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        self.add_scaled(-1.0, rhs)
    }
}

impl Mul<f64> for &Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        self.scale(rhs)
    }
}

impl Neg for &Point {
    type Output = Point;
    fn neg(self) -> Point {
        self.scale(-1.0)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_and_distance() {
        let p = Point::new(vec![3.0, 4.0]);
        assert_eq!(p.norm(), 5.0);
        assert_eq!(p.distance_to(&Point::zeros(2)), 5.0);
    }

    #[test]
    fn add_scaled_matches_ops() {
        let a = Point::new(vec![1.0, -2.0]);
        let b = Point::new(vec![0.5, 0.5]);
        assert_eq!(a.add_scaled(2.0, &b), Point::new(vec![2.0, -1.0]));
        assert_eq!(&a + &b, Point::new(vec![1.5, -1.5]));
        assert_eq!(&a - &b, Point::new(vec![0.5, -2.5]));
    }

    #[test]
    #[should_panic]
    fn rejects_nan() {
        let _ = Point::new(vec![f64::NAN]);
    }
}
