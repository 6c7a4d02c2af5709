//! Verification of the sensing resource state.
//!
//! [`strategy`] builds the strategy operators, [`spectrum`] evaluates their
//! eigenvalues in closed form, [`protocol`] runs the measurements copy by
//! copy, [`complexity`] turns the spectral gap into a copy count and
//! [`robust`] wires verification in front of sensing.

pub mod complexity;
pub mod protocol;
pub mod robust;
pub mod spectrum;
pub mod strategy;
