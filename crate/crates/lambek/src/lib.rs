//! Compositional meaning for a modal Lambek calculus with controlled
//! extraction, interpreted in density matrices with a spin register.
//!
//! The crate is organised bottom-up:
//!
//! * [`syntax`] — formulas, structures, parsing and type-to-space maps;
//! * [`deduction`] — natural deduction derivations, checking and search;
//! * [`lambda`] — directional lambda terms and term extraction;
//! * [`tensor`] — dense complex operators with labelled tensor slots;
//! * [`spin`] — the spin register and its modal operations;
//! * [`semantics`] — interpretation of terms and ambiguity sums;
//! * [`sampling`] — reproducible random density operators;
//! * [`lexicon`] — lexicon files;
//! * [`pipeline`] — from a phrase to its weighted readings.

pub mod deduction;
pub mod lambda;
pub mod lexicon;
pub mod pipeline;
pub mod sampling;
pub mod semantics;
pub mod spin;
pub mod syntax;
pub mod tensor;
