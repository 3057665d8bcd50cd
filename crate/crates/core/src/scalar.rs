//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar used for probabilities and information quantities.
///
/// Implemented for `f32` and `f64`. All tolerances quoted in the docs refer
/// to `f64`; `f32` instantiations only meet proportionally looser ones.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_count(c: u128) -> Self {
        Self::from_u128(c).expect("count representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion to f64")
    }

    /// Normalization tolerance: `1e-12` in `f64`, `100 * epsilon` for `f32`.
    fn norm_tol() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(100.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<F> {
    sum: F,
    comp: F,
}

impl<F: Real> CompensatedSum<F> {
    pub fn new() -> Self {
        Self {
            sum: F::zero(),
            comp: F::zero(),
        }
    }

    pub fn add(&mut self, x: F) {
        let t = self.sum + x;
        if !t.is_finite() {
            // Infinite terms bypass compensation.
            self.sum = t;
            self.comp = F::zero();
            return;
        }
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> F {
        if self.sum.is_finite() {
            self.sum + self.comp
        } else {
            self.sum
        }
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn csum<F: Real, I: IntoIterator<Item = F>>(it: I) -> F {
    let mut acc = CompensatedSum::new();
    for x in it {
        acc.add(x);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_beats_naive_on_cancellation() {
        let xs = [1.0f64, 1e100, 1.0, -1e100];
        assert_eq!(csum(xs), 2.0);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn infinity_propagates() {
        assert!(csum([1.0f64, f64::INFINITY, 2.0]).is_infinite());
    }

    #[test]
    fn works_for_f32() {
        let v: f32 = csum((0..1000).map(|_| 0.1f32));
        assert!((v - 100.0).abs() < 1e-4);
    }
}
