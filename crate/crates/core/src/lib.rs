//! Hilbert spaces of analytic functions on the unit disk with norm
//! `‖f‖²_μ = ‖f‖²_{H²} + D_μ(f)`, where `μ` is a finite atomic measure on the
//! circle and `D_μ` the associated local Dirichlet integral.
//!
//! The crate evaluates norms and Gram matrices, decomposes functions along the
//! atoms, computes reproducing kernels, and runs numerical Carleson-box and
//! reproducing-kernel tests for planar measures.

pub mod carleson;
pub mod cli;
pub mod dirichlet;
pub mod error;
pub mod hardy;
pub mod kernels;
pub mod linalg;
pub mod measures;
pub mod quadrature;
pub mod verify;

pub use dirichlet::{local_dirichlet, Decomposition, DirichletSpace, GramMatrix};
pub use error::{Error, Result};
pub use hardy::{lagrange_interp, szego_kernel, BoundaryPoint, Poly, C64};
pub use kernels::{
    solve_a0, weighted_dirichlet_kernel, KernelSource, OneAtomKernelModel, TruncatedKernel,
    TruncatedKernelSpace,
};
pub use measures::{AnalyticFunction, AtomicBoundaryMeasure, CarlesonBox, PlanarFamily, PlanarMeasure};
