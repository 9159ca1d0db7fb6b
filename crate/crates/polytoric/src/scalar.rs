//! Scalar abstraction for the shared linear algebra.
//!
//! Exact predicates instantiate [`Scalar`] with `BigRational`; metric code
//! instantiates it with `f64`. Anything implementing the `num-traits` field
//! operations plus a sign qualifies.

use num_traits::{Num, Signed};
use std::fmt::Debug;

pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug {}

impl<T> Scalar for T where T: Num + Signed + Clone + PartialOrd + Debug {}
