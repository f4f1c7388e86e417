//! Exact computation of torsion and adic completion functors over commutative
//! non-positive DG-rings, at desk scale.
//!
//! The layers, bottom up:
//!
//! * [`scalar`], [`mat`], [`smith`] — exact arithmetic and linear algebra;
//! * [`ring`], [`module`] — ring backends and finitely presented modules;
//! * [`complex`] — bounded cochain complexes, cohomology, tensor/Hom/cone;
//! * [`tower`] — pro- and ind-objects with precision semantics, pro-zero tests;
//! * [`koszul`] — Koszul and telescope complexes, classical torsion/completion,
//!   the weak-proregularity checker;
//! * [`dg`] — DG-rings, semi-free (killing cycles) resolutions, derived tensor;
//! * [`functors`] — derived torsion and completion of DG-modules and the
//!   Greenlees–May / MGM verification harness;
//! * [`adic`] — the adic completion functor on pairs and its derived functor;
//! * [`hochschild`] — derived Hochschild cohomology, plain and completed;
//! * [`manifest`], [`report`] — the JSON problem format and result tables.

pub mod complex;
pub mod dg;
pub mod dgres;
pub mod error;
pub mod homalg;
pub mod koszul;
pub mod mat;
pub mod module;
pub mod par;
pub mod ring;
pub mod scalar;
pub mod tower;
pub mod smith;
pub mod window;

pub use error::{Error, Result};
pub use window::Window;
