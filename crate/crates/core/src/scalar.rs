//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the probability and covariance code is generic over.
///
/// The associated tolerances are the validation thresholds that depend on the
/// precision of the type; query tolerances are always passed explicitly.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Maximum |sum - 1| accepted for a probability table.
    const MASS_TOL: f64;
    /// Default floor for `strictly_positive`.
    const POSITIVITY_FLOOR: f64;
    /// Maximum asymmetry accepted in a covariance matrix.
    const SYMMETRY_TOL: f64;

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const MASS_TOL: f64 = 1e-12;
    const POSITIVITY_FLOOR: f64 = 1e-12;
    const SYMMETRY_TOL: f64 = 1e-12;
}

impl Real for f32 {
    const MASS_TOL: f64 = 1e-5;
    const POSITIVITY_FLOOR: f64 = 1e-12;
    const SYMMETRY_TOL: f64 = 1e-6;
}
