//! Exact computation of enumerative invariants of the combinatorial moduli
//! space of bordered surfaces.
//!
//! The crate computes, over exact rationals:
//!
//! * Kontsevich volume polynomials `V^K_{g,n}(L)` by topological recursion,
//! * Norbury lattice point counts `N_{g,n}(L)` by the discrete recursion and
//!   by brute-force enumeration of integer metric ribbon graphs,
//! * average multicurve-counting polynomials `VN_{g,n}(L; t)` and the
//!   one-parameter Masur-Veech polynomials `V^MV_{g,n}(L; s)`, both by the
//!   twisted recursion and by sums over stable graphs,
//! * Masur-Veech volumes `MV_{g,n}` through two independent routes,
//!
//! and verifies the geometric identities behind them (the piecewise-linear
//! Mirzakhani-McShane identity, edge-length reconstruction from simple
//! closed curves, Fenchel-Nielsen flips on the four-holed sphere and the
//! one-holed torus together with their hyperbolic counterparts under the
//! rescaling flow) with independent brute-force oracles.

pub mod curves;
pub mod fnflip;
pub mod pants;
pub mod poly;
pub mod rational;
pub mod ribbon;
pub mod stablegraphs;
pub mod table1;
pub mod trengine;
pub mod zeta;

pub use poly::{render_symmetric, Poly, SymMonomial, SymTerm};
pub use rational::{parse_rat, parse_rat_list, Rat};
pub use ribbon::{Metric, RibbonGraph};
