//! The floating-point abstraction every algorithm in the crate is written
//! against.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Unit roundoff `u` of the format (`2^-52` for `f64`).
    fn unit_roundoff() -> Self {
        Self::epsilon()
    }

    /// Lossless for `f64`, rounding for `f32`.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("every f64 converts to a Float")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("every Float converts to f64")
    }

    /// Shorthand for small integer constants in formulas.
    fn of(v: usize) -> Self {
        Self::from_usize(v).expect("usize converts to a Float")
    }

    /// Maximum round-off error of operations on numbers of modulus `alpha`,
    /// i.e. `alpha * u`.
    fn roundoff_at(alpha: Self) -> Self {
        alpha.abs() * Self::unit_roundoff()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Index of the largest value, ties going to the smallest index. `None` for
/// an empty slice. NaN entries are never selected.
pub(crate) fn argmax<T: Scalar>(values: &[T]) -> Option<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if !(v > b) => {}
            _ if v.is_nan() => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_roundoff_matches_binary64() {
        assert_eq!(f64::unit_roundoff(), 2f64.powi(-52));
        assert!((f64::roundoff_at(1.0) - 2.22e-16).abs() < 1e-18);
    }

    #[test]
    fn argmax_prefers_smallest_index_on_ties() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), Some((1, 3.0)));
        assert_eq!(argmax::<f64>(&[]), None);
        assert_eq!(argmax(&[f64::NAN, 0.5]), Some((1, 0.5)));
    }
}
