//! Exact bracket calculus for generalized polynomials, finite-sums (IP-set)
//! combinatorics, constraint sets, and desk-scale torus recurrence checks.
//!
//! The library works with the nearest-integer bracket `ni(a)`: the minimum
//! integer nearest to `a`, with half-ties resolving downward so that the
//! nearest-fraction `{a} = a - ni(a)` lies in `(-1/2, 1/2]`. On top of it
//! sit generalized polynomial expressions such as `ni(pi*n*ni(sqrt(5)*n^2+2*n))`,
//! their structural calculus (leading-coefficient sums, PET weight vectors,
//! symbolic derivatives with constraint sets), and simulators for circle
//! rotations and an affine skew product on the 2-torus.
//!
//! ```
//! use gpolylab::gpexpr::GpExpr;
//! use gpolylab::gpeval;
//!
//! let p = GpExpr::parse("ni(pi*n*ni(sqrt(5)*n^2 + 2*n))").unwrap();
//! assert_eq!(gpeval::eval_int(&p, 1).unwrap(), 13);
//! assert_eq!(gpeval::eval_int(&p, 0).unwrap(), 0);
//! ```

pub mod constraints;
pub mod dynsim;
pub mod gpeval;
pub mod gpexpr;
pub mod gpstruct;
pub mod ipsets;
pub mod manifest;
pub mod scalar;
pub mod sgp;
