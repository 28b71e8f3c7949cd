//! Random normed spaces over continuous t-norms, and numerical verification
//! of direct-method stability for the quadratic–quartic functional equation
//!
//! ```text
//! f(2x+y) + f(2x−y) = 4[f(x+y) + f(x−y)] + 2[f(2x) − 4f(x)] − 6f(y).
//! ```
//!
//! The crate is layered bottom-up: [`tnorms`] and [`distributions`] supply
//! the probabilistic primitives, [`rnspace`] builds random normed spaces on
//! them, [`funceq`] evaluates the equations, and [`hyers`] runs the direct
//! method and checks its error bounds. [`oracle`] re-evaluates small cases in
//! exact rational arithmetic.

pub mod distributions;
pub mod funceq;
pub mod hyers;
pub mod oracle;
pub mod rnspace;
pub mod tnorms;
pub mod vector;

pub use distributions::DistFn;
pub use funceq::{RealMap, TestFunction};
pub use hyers::{Combiner, PerturbationProfile};
pub use rnspace::RnSpace;
pub use tnorms::TNorm;
pub use vector::Vector;
