//! Formal series in the deformation parameter `h` with a finite principal
//! part.
//!
//! A series stores one coefficient per order from `leading` through `trunc`,
//! inclusive; orders below `leading` are zero and orders above `trunc` are
//! unknown. Products follow Cauchy-product truncation semantics: the result
//! is reliable exactly as far as the factors allow.

use num_complex::Complex64;

use crate::jet::Jet;

/// Coefficient ring for formal series.
pub trait Coefficient: Clone {
    fn zero_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn max_abs(&self) -> f64;
}

impl Coefficient for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn max_abs(&self) -> f64 {
        self.norm()
    }
}

impl Coefficient for Jet {
    fn zero_like(&self) -> Self {
        Jet::zero(self.m(), self.depth())
    }

    fn add(&self, other: &Self) -> Self {
        self.checked_add(other).expect("series coefficients share one jet space")
    }

    fn mul(&self, other: &Self) -> Self {
        self.checked_mul(other).expect("series coefficients share one jet space")
    }

    fn max_abs(&self) -> f64 {
        Jet::max_abs(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormalSeries<T: Coefficient> {
    leading: i64,
    coeffs: Vec<T>,
}

/// Star products and related operators produce series of jets.
pub type StarSeries = FormalSeries<Jet>;

impl<T: Coefficient> FormalSeries<T> {
    /// Series with the given coefficients at orders `leading`,
    /// `leading + 1`, ...
    pub fn new(leading: i64, coeffs: Vec<T>) -> FormalSeries<T> {
        assert!(!coeffs.is_empty(), "a series carries at least one known order");
        FormalSeries { leading, coeffs }
    }

    pub fn constant(value: T, trunc: i64) -> FormalSeries<T> {
        assert!(trunc >= 0, "a constant is known through a non-negative order");
        let zero = value.zero_like();
        let mut coeffs = vec![value];
        coeffs.resize(trunc as usize + 1, zero);
        FormalSeries { leading: 0, coeffs }
    }

    pub fn leading(&self) -> i64 {
        self.leading
    }

    /// Highest order with a known coefficient.
    pub fn trunc(&self) -> i64 {
        self.leading + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `h^order`, if the order is within the known range.
    pub fn get(&self, order: i64) -> Option<&T> {
        if order < self.leading || order > self.trunc() {
            return None;
        }
        Some(&self.coeffs[(order - self.leading) as usize])
    }

    fn zero_template(&self) -> T {
        self.coeffs[0].zero_like()
    }

    pub fn add(&self, other: &FormalSeries<T>) -> FormalSeries<T> {
        let leading = self.leading.min(other.leading);
        let trunc = self.trunc().min(other.trunc());
        assert!(trunc >= leading, "series addition leaves no known orders");
        let zero = self.zero_template();
        let mut coeffs = Vec::with_capacity((trunc - leading + 1) as usize);
        for order in leading..=trunc {
            let a = self.get(order);
            let b = other.get(order);
            coeffs.push(match (a, b) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => zero.clone(),
            });
        }
        FormalSeries { leading, coeffs }
    }

    /// Cauchy product. The result is known through
    /// `min(a.trunc + b.leading, b.trunc + a.leading)`: above that order the
    /// unknown tails of the factors would contribute.
    pub fn mul(&self, other: &FormalSeries<T>) -> FormalSeries<T> {
        let leading = self.leading + other.leading;
        let trunc = (self.trunc() + other.leading).min(other.trunc() + self.leading);
        assert!(trunc >= leading, "series product leaves no known orders");
        let zero = self.zero_template();
        let mut coeffs = vec![zero; (trunc - leading + 1) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                let order = self.leading + i as i64 + other.leading + j as i64;
                if order > trunc {
                    continue;
                }
                let slot = (order - leading) as usize;
                coeffs[slot] = coeffs[slot].add(&a.mul(b));
            }
        }
        FormalSeries { leading, coeffs }
    }

    /// Drop all orders above `new_trunc`.
    pub fn truncate(&self, new_trunc: i64) -> FormalSeries<T> {
        assert!(new_trunc >= self.leading, "truncation leaves no known orders");
        let keep = ((new_trunc - self.leading + 1) as usize).min(self.coeffs.len());
        FormalSeries { leading: self.leading, coeffs: self.coeffs[..keep].to_vec() }
    }

    /// Multiply by `h^shift`.
    pub fn shifted(&self, shift: i64) -> FormalSeries<T> {
        FormalSeries { leading: self.leading + shift, coeffs: self.coeffs.clone() }
    }

    /// Extend the known range downward to `leading` with zero coefficients.
    pub fn with_leading(&self, leading: i64) -> FormalSeries<T> {
        assert!(leading <= self.leading);
        let zero = self.zero_template();
        let mut coeffs = vec![zero; (self.leading - leading) as usize];
        coeffs.extend(self.coeffs.iter().cloned());
        FormalSeries { leading, coeffs }
    }

    pub fn map<U: Coefficient>(&self, f: impl Fn(&T) -> U) -> FormalSeries<U> {
        FormalSeries { leading: self.leading, coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }
}
