//! Hölder continuous functions on `[0, 1]` as weighted Takagi-Landsberg
//! (Faber-Schauder) expansions.
//!
//! Riemann-Liouville integrals and derivatives and Riemann-Stieltjes integrals of
//! such expansions have closed series forms. Truncating an integral equation at a
//! dyadic level turns it into a dense linear system for the coefficients.
//!
//! ```
//! use tlfrac::oracle::exact_langevin;
//! use tlfrac::solvers::solve_volterra;
//!
//! let bench = exact_langevin(0.8, 0.9, 4).unwrap();
//! let sol = solve_volterra(&bench.problem().unwrap(), 4, 4).unwrap();
//! assert!((sol.expansion.eval(0.5) - 0.5f64.powf(0.8)).abs() < 1e-2);
//! ```

pub mod dyadic;
pub mod error;
pub mod fraccalc;
pub mod oracle;
pub mod repro;
pub mod solvers;
pub mod stieltjes;

pub use dyadic::{haar, schauder, sup_distance, DyadicIndex, HolderExpansion};
pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/expansions.md")]
    mod expansions {}
    #[doc = include_str!("../../../book/src/fractional.md")]
    mod fractional {}
    #[doc = include_str!("../../../book/src/stieltjes.md")]
    mod stieltjes {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
