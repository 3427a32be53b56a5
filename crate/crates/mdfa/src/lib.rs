//! Fair division of indivisible items when every item is valued along
//! several dimensions at once.
//!
//! An instance assigns each agent an additive valuation per dimension; an
//! allocation partitions the items into bundles. The fairness notions are
//! parameterised by a removal budget `c`:
//!
//! * **weak sEFc**: for every ordered agent pair and every dimension
//!   separately, the envier values its own bundle at least as much as the
//!   other's bundle with some at most `c` items removed (the removed set may
//!   differ between dimensions);
//! * **strong sEFc**: one removal set of at most `c` items per ordered pair
//!   must work for all dimensions simultaneously.
//!
//! The crate provides verifiers and minimal-removal search ([`verify`]),
//! exhaustive deciders for existence ([`decide`]), polynomial-time
//! allocators with worst-case guarantees built on an exact rational simplex
//! ([`allocate`], [`lp`]), brute-force reference oracles ([`oracle`]),
//! hard-instance and reduction generators ([`generators`]), and a
//! deterministic PRNG ([`prng`]) so every randomised artefact is
//! reproducible from a seed.

pub mod allocate;
pub mod decide;
pub mod generators;
pub mod instance;
pub mod lp;
pub mod oracle;
pub mod prng;
pub mod rational;
pub mod verify;

pub use instance::{Allocation, FairnessQuery, Instance, InstanceError, Notion};
