//! Computational toolkit for product sets in groups.
//!
//! Group arithmetic for lattices, cyclic products and free groups; finite
//! window and periodic set calculus with thickness/syndeticity predicates;
//! random-walk convolution machinery and harmonic functions; greedy and exact
//! syndetic covers on finite groups; and a free-group action on the circle
//! producing certified non-syndeticity witnesses.

pub mod bitset;
pub mod circle;
pub mod compact;
pub mod group;
pub mod measure;
pub mod setcalc;
pub mod setcover;

pub use bitset::BitSet;
pub use group::{enumerate_ball, Ball, GroupDescriptor, GroupElement, GroupError, Word};
