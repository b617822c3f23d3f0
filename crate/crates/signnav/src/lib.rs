//! Coalition navigation over a semiotic sign model.
//!
//! The library couples two planning layers. The behavior layer plans over a
//! knowledge base of signs (name + image + significance + personal meaning),
//! iterating significance matching, realization adoption and condition
//! projection until an executable operator level is reached, delegating to
//! other coalition members by message when it lacks a realization of its own.
//! The motion layer plans over square-cell grids: Theta* for any-angle paths,
//! LIAN for angle-constrained paths, with fuzzy goal areas and identification
//! of the obstacle to blame when no path exists.
//!
//! See the `book/` directory for a guided tour, and [`scenario`] for the
//! scenario file format driving the CLI.

pub mod behavior;
pub mod coalition;
pub mod geometry;
pub mod grid;
pub mod path;
pub mod scenario;
pub mod sign;
pub mod trace;
