//! Sample-efficient sparse Fourier transform over `[n]^d`.
//!
//! Given query access to the spectrum `x̂` of a signal `x` on the `d`-dimensional
//! torus `Z_n^d`, [`recovery::sparse_fft`] returns a sparse approximation `χ` of
//! `x` with an `ℓ2/ℓ2` guarantee while reading only `O(k log N log log N)`
//! entries of `x̂` (up to constants that depend on `d`).
//!
//! The crate is `no_std` and only needs `alloc`. IO, signal generation and the
//! experiment CLI live in the `sfft-lab` companion crate.
//!
//! Layout follows the pipeline:
//!
//! * [`grid`]: index arithmetic over `Z_n^d`, signal containers, parameters.
//! * [`dft`]: orthonormal radix-2 transforms (the dense oracle).
//! * [`filters`]: the bucketing filter and the flat window.
//! * [`permutation`]: spectrum permutations and hashings.
//! * [`semi_equispaced`]: evaluating the spectrum of a sparse vector on a coarse grid.
//! * [`hashing`]: `HashToBins` and the frozen measurement tables.
//! * [`location`]: digit-by-digit frequency location.
//! * [`estimation`]: median estimators.
//! * [`recovery`]: the four drivers.
//! * [`diagnostics`]: brute-force analysis quantities, for tests.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dft;
pub mod diagnostics;
pub mod error;
pub mod estimation;
pub mod filters;
pub mod grid;
pub mod hashing;
pub mod location;
pub mod permutation;
pub mod recovery;
pub mod semi_equispaced;

mod math;

pub use error::{Error, Result};
pub use grid::{
    positive_part, star, DenseSignal, Domain, Grid, GridIndex, ProbePair, RecoveryParams,
    SparseApprox, MAX_DIM,
};
pub use num_complex::Complex64;
pub use recovery::{sparse_fft, Constants, RecoveryReport, SampleLedger};
