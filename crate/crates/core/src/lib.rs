//! Exact homological algebra at desk scale.
//!
//! Every construction here runs over the rationals (or `p`-adic
//! approximations with tracked precision), so certificates such as
//! `d∘d = 0`, homology dimensions and norm inequalities are decided
//! exactly rather than numerically.
//!
//! Module map:
//!
//! * [`arith`]: valuations, `p`-power norms as exact exponents, `p`-adic
//!   binomials and the radius functions.
//! * [`linalg`]: rational matrices, ranks, kernels, constrained solves and
//!   Smith normal form.
//! * [`complexes`]: chain complexes, homology, truncation, tensor products,
//!   chain maps and mapping cones.
//! * [`lie`]: Lie algebras by structure constants and Chevalley-Eilenberg
//!   complexes.
//! * [`groupalg`]: finite groups, finite-dimensional algebras and modules,
//!   free resolutions, Ext, crossed products.
//! * [`wall`]: the Wall double-complex builder over a base complex of
//!   modules.
//! * [`tree`]: the Bruhat-Tits tree of `PGL_2(Q_p)`, coefficient systems,
//!   pushouts and cosimplicial rows.
//! * [`bch`]: truncated Baker-Campbell-Hausdorff series, group-law
//!   polynomials and Gauss norms.
//! * [`cli`]: the `wallforge` command-line front end.

pub mod arith;
pub mod bch;
pub mod cli;
pub mod complexes;
pub mod groupalg;
pub mod lie;
pub mod linalg;
pub mod rational;
pub mod tree;
pub mod wall;

pub use rational::Q;
