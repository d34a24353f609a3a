//! Finite-window and periodic set calculus: product and difference sets,
//! exact periodic sumsets, and the thick / syndetic / piecewise syndetic /
//! Bohr predicates.

mod bohr;
mod periodic;
mod predicates;
mod window;

use thiserror::Error;

use crate::group::{GroupDescriptor, GroupElement, GroupError};

pub use bohr::{bohr_membership, piecewise_bohr_score, torus_norm, BohrSpec};
pub use periodic::{interval_sum, periodic_product, PeriodicIntSet};
pub use predicates::{
    is_piecewise_syndetic, is_right_thick, syndeticity_index, syndeticity_index_budgeted, IndexOutcome,
    IndexReport, PwReport, SetRef, ThickReport, Verdict,
};
pub use window::{difference_set, product_set, FiniteWindowSet, ProductSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetError {
    #[error("operands belong to different groups")]
    DescriptorMismatch,
    #[error("element {0} lies outside the declared window")]
    OutsideWindow(String),
    #[error("invalid set: {0}")]
    Invalid(String),
    #[error("cannot parse set: {0}")]
    Parse(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Three-valued membership: `None` when the set is not known at `g`.
pub trait Membership {
    fn descriptor(&self) -> &GroupDescriptor;
    fn membership(&self, g: &GroupElement) -> Option<bool>;
}

static INTEGERS: GroupDescriptor = GroupDescriptor::IntegerLattice { dim: 1 };

impl Membership for PeriodicIntSet {
    fn descriptor(&self) -> &GroupDescriptor {
        &INTEGERS
    }

    fn membership(&self, g: &GroupElement) -> Option<bool> {
        g.as_int().map(|n| self.contains(n))
    }
}
