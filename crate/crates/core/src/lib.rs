//! Exact verification of when `S = ξ + η` and `D = (ξ − η)²` are independent
//! for i.i.d. `ξ, η`: finite fields, the rationals and `Q_p`.

pub mod algebra;
pub mod arith;
pub mod characterize;
pub mod harness;
pub mod measure;
pub mod padic;
