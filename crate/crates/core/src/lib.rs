//! Design toolkit for converting shared path protection (SPP) into coded
//! path protection (CPP).
//!
//! The pipeline mirrors the stages of a CPP design:
//!
//! 1. [`spp`] routes a link-disjoint primary/protection pair per demand and
//!    assigns shared spare units under failure-disjoint sharing.
//! 2. [`group`] converts the sharing structure into coding groups that obey
//!    the link-disjointness rules, greedily or by exhaustive search.
//! 3. [`cep`] removes cycles from each group's protection topology so that
//!    the coded capacity forms a tree.
//! 4. [`trail`] flattens each protection tree into a hierarchy of linear
//!    1+N coding trails (truck trail plus branch trails).
//! 5. [`verify`] computes the XOR symbol expressions carried on every
//!    directed protection link and checks recovery from every single-link
//!    failure with a GF(2) span test.

pub mod cep;
pub mod fixtures;
pub mod format;
pub mod group;
pub mod model;
pub mod oracle;
pub mod routing;
pub mod spp;
pub mod trail;
pub mod verify;

pub use model::{Demand, DemandId, Link, LinkId, NodeId, Path, PathPair, Topology};
pub use spp::SppSolution;
