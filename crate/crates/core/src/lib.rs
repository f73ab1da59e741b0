//! Verification of black-box sequence classifiers against regular
//! specifications: statistical model checking, automaton extraction followed
//! by model checking, and property-directed verification that interleaves
//! L* learning with model checking.

pub mod automata;
pub mod bench;
pub mod faultyflow;
pub mod lstar;
pub mod oracle;
pub mod sampling;
pub mod verify;
