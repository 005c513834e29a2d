//! Solver toolkit for the Capacitated Covering Salesman Problem (CCSP) and
//! the Multi-Depot Covering Tour VRP (MDCTVRP).
//!
//! The toolkit provides:
//!
//! - a heuristic stack: biased random-key genetic algorithm with a two-phase
//!   decoder (best-fit vehicle assignment + cheapest insertion), redundancy
//!   removal and intra-route improvement;
//! - a route-pool matheuristic solving a set-covering/packing model over
//!   exhaustively enumerated small routes plus harvested elite routes;
//! - exact MIP model builders for both problems with lazy-constraint
//!   separation (capacity/connectivity cuts, depot-path cuts) driven by a
//!   cutting-plane loop over a pluggable solver backend;
//! - instance generation from CVRP benchmark files and a self-contained
//!   instance format.

pub mod brkga;
pub mod decoder;
pub mod io;
pub mod local_search;
pub mod matheuristic;
pub mod mip;
pub mod model;
pub mod pipeline;

#[cfg(test)]
pub(crate) mod test_fixtures;

pub use model::{CcspInstance, EdgeMetric, MdctvrpInstance, Route, Solution};
