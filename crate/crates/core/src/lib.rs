//! Finite multitensor C*-categories, algebra objects in them, and the
//! constructive unitarization of separable algebras into Q-systems.
//!
//! Two concrete backends are provided: `GridHilb(n)`, whose objects are
//! `n x n` grids of Hilbert spaces with matrix-unit tensor product (a tensor
//! unit with `n` simple summands), and `RepG`, unitary representations of a
//! finite group. On top of these the crate verifies algebra, Frobenius and
//! module axioms with residual reports, computes separability witnesses,
//! decomposes separable algebras into indecomposable summands, and produces an
//! explicit algebra isomorphism onto a special C*-Frobenius algebra together
//! with an independently checkable certificate.

pub mod algebra;
pub mod category;
pub mod error;
pub mod generate;
pub mod group;
pub mod io;
pub mod linalg;
pub mod module_theory;
pub mod report;
pub mod unitarize;

pub use algebra::{ActionModule, AlgebraIso, AlgebraObject, FrobeniusStructure};
pub use category::{Category, DualitySolution, Mor, Obj, SimpleDecomposition};
pub use error::{Error, Result};
pub use group::FiniteGroup;
pub use linalg::{Matrix, Tolerance, C64};
pub use report::{Check, Report};
pub use unitarize::{Method, UnitarizationCertificate};
