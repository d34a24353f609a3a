//! The free group on `a, b` acting on the circle `R/Z`: `a` rotates by an
//! irrational angle, `b` is a north-south map. Every containment or
//! disjointness claim is checked on outward-widened arcs with an explicit
//! margin.

mod arcs;
mod search;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{enumerate_ball, GroupDescriptor, GroupElement, GroupError, Word};
use crate::setcalc::FiniteWindowSet;

pub use arcs::*;
pub use search::*;

/// Default ambiguity margin on every membership or containment test.
pub const DELTA: f64 = 1e-9;

/// Outward widening after one evaluation of the north-south map. The map's
/// derivative is at most `max(λ, 1/λ)`, so one rounding in the argument and
/// a few in `tan`/`atan` stay far below this.
const MAP_SLACK: f64 = 1e-13;
const ROTATION_SLACK: f64 = 1e-15;

#[derive(Debug, Error)]
pub enum CircleError {
    #[error("invalid circle system: {0}")]
    InvalidSystem(String),
    #[error("invalid arc: {0}")]
    InvalidArc(String),
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("no witness of length at most {budget}")]
    BudgetExhausted { budget: u32 },
    #[error("F·A covers the circle at this resolution (total length {total_length})")]
    Covers { total_length: f64 },
    #[error("word {0} is not in the free group on a, b")]
    NotFreeWord(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Rotation angle `p/q` and the map `T` fixing `x₊` (attracting) and
/// `x₋ = x₊ + 1/2` (repelling).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleSystem {
    pub alpha_p: u64,
    pub alpha_q: u64,
    pub lambda: f64,
    pub x_plus: f64,
}

impl Default for CircleSystem {
    /// The 30th Fibonacci convergent of the golden mean, `λ = 1/2`, `x₊ = 0`.
    fn default() -> Self {
        CircleSystem {
            alpha_p: 832_040,
            alpha_q: 1_346_269,
            lambda: 0.5,
            x_plus: 0.0,
        }
    }
}

impl CircleSystem {
    pub fn new(alpha_p: u64, alpha_q: u64, lambda: f64, x_plus: f64) -> Result<Self, CircleError> {
        let s = CircleSystem {
            alpha_p,
            alpha_q,
            lambda,
            x_plus,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CircleError> {
        if self.alpha_q == 0 || self.alpha_p == 0 || self.alpha_p >= self.alpha_q {
            return Err(CircleError::InvalidSystem("need 0 < p < q".into()));
        }
        if num_integer::gcd(self.alpha_p, self.alpha_q) != 1 {
            return Err(CircleError::InvalidSystem("p/q must be in lowest terms".into()));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(CircleError::InvalidSystem(format!("λ = {} outside (0,1)", self.lambda)));
        }
        if !(0.0..1.0).contains(&self.x_plus) {
            return Err(CircleError::InvalidSystem("x₊ must lie in [0,1)".into()));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha_p as f64 / self.alpha_q as f64
    }

    pub fn x_minus(&self) -> f64 {
        wrap(self.x_plus + 0.5)
    }

    /// Rotation by `j·α`, reduced exactly before conversion.
    pub fn rotation(&self, j: i64) -> f64 {
        let q = self.alpha_q as i128;
        let r = (j as i128 * self.alpha_p as i128).rem_euclid(q);
        r as f64 / q as f64
    }

    /// Lift of `T^{±1}` to the line: monotone, commuting with `x ↦ x+1`.
    pub fn lift(&self, x: f64, forward: bool) -> f64 {
        let lambda = if forward { self.lambda } else { 1.0 / self.lambda };
        let y = x - self.x_plus;
        let n = y.round();
        let r = y - n;
        if r.abs() >= 0.5 {
            return x;
        }
        self.x_plus + n + (lambda * (std::f64::consts::PI * r).tan()).atan() / std::f64::consts::PI
    }

    pub fn t(&self, x: f64) -> f64 {
        wrap(self.lift(x, true))
    }

    pub fn t_inv(&self, x: f64) -> f64 {
        wrap(self.lift(x, false))
    }

    fn letter_point(&self, l: i32, x: f64) -> f64 {
        match l {
            1 => wrap(x + self.alpha()),
            -1 => wrap(x - self.alpha()),
            2 => self.t(x),
            -2 => self.t_inv(x),
            _ => unreachable!("checked by caller"),
        }
    }

    fn letter_arc(&self, l: i32, a: Arc) -> Arc {
        if a.is_full() {
            return a;
        }
        match l {
            1 | -1 => Arc {
                start: wrap(a.start + l as f64 * self.alpha()),
                len: a.len,
            }
            .widen(ROTATION_SLACK),
            _ => self.map_arc(a, l == 2),
        }
    }

    /// Image of an arc under `T^{±1}`; endpoints map to endpoints.
    fn map_arc(&self, a: Arc, forward: bool) -> Arc {
        let lo = self.lift(a.start, forward);
        let hi = self.lift(a.start + a.len, forward);
        Arc {
            start: wrap(lo),
            len: (hi - lo).clamp(0.0, 1.0),
        }
        .widen(MAP_SLACK)
    }

    /// `b^k` applied to an arc.
    pub(crate) fn power_arc(&self, k: i64, mut a: Arc) -> Arc {
        for _ in 0..k.unsigned_abs() {
            a = self.map_arc(a, k > 0);
        }
        a
    }

    pub(crate) fn rotate_arc(&self, j: i64, a: Arc) -> Arc {
        if a.is_full() {
            return a;
        }
        Arc {
            start: wrap(a.start + self.rotation(j)),
            len: a.len,
        }
        .widen(ROTATION_SLACK)
    }

    /// Checks that `w` is a word over `a^{±1}, b^{±1}`.
    pub fn check_word(&self, w: &Word) -> Result<(), CircleError> {
        if w.letters().iter().any(|l| !matches!(l, 1 | -1 | 2 | -2)) {
            return Err(CircleError::NotFreeWord(w.to_string()));
        }
        Ok(())
    }

    /// `w·x`, letters applied from the right.
    pub fn act_point(&self, w: &Word, x: f64) -> Result<f64, CircleError> {
        self.check_word(w)?;
        Ok(w.letters().iter().rev().fold(wrap(x), |x, &l| self.letter_point(l, x)))
    }

    /// Outward enclosure of `w·S`.
    pub fn act_arcs(&self, w: &Word, s: &ArcUnion) -> Result<ArcUnion, CircleError> {
        self.check_word(w)?;
        Ok(ArcUnion::new(
            s.arcs()
                .iter()
                .map(|&a| w.letters().iter().rev().fold(a, |a, &l| self.letter_arc(l, a)))
                .collect::<Vec<_>>(),
        ))
    }

    /// Outward enclosure of `F·S`.
    pub fn act_set(&self, f: &[Word], s: &ArcUnion) -> Result<ArcUnion, CircleError> {
        let mut out = ArcUnion::empty();
        for w in f {
            out = out.union(&self.act_arcs(w, s)?);
        }
        Ok(out)
    }

    /// `T` is increasing on a grid of `n` points and fixes `x₊`, `x₋`.
    pub fn check_homeomorphism(&self, n: usize) -> bool {
        let fixed = (self.t(self.x_plus) - self.x_plus).abs() < 1e-12
            && circle_distance(self.t(self.x_minus()), self.x_minus()) < 1e-12;
        let mut prev = f64::NEG_INFINITY;
        let monotone = (0..=n).all(|i| {
            let y = self.lift(self.x_plus + i as f64 / n as f64, true);
            let ok = y >= prev;
            prev = y;
            ok
        });
        let periodic = (self.lift(self.x_plus + 1.0, true) - self.lift(self.x_plus, true) - 1.0).abs() < 1e-12;
        fixed && monotone && periodic
    }

    /// Least `n ≤ n_max` with `T^n(B) ⊆ U`.
    pub fn contraction_steps(&self, b: &ArcUnion, u: &ArcUnion, n_max: u32, margin: f64) -> Option<u32> {
        let mut arcs: Vec<Arc> = b.arcs().to_vec();
        for n in 0..=n_max {
            if ArcUnion::new(arcs.clone()).inside(u, margin) {
                return Some(n);
            }
            arcs = arcs.into_iter().map(|a| self.map_arc(a, true)).collect();
        }
        None
    }

    /// Largest gap in `{jα mod 1 : 0 ≤ j ≤ n}`.
    pub fn orbit_gap(&self, n: u64) -> f64 {
        let mut pts: Vec<u64> = (0..=n).map(|j| (j as u128 * self.alpha_p as u128 % self.alpha_q as u128) as u64).collect();
        pts.sort_unstable();
        pts.dedup();
        let q = self.alpha_q;
        let wrap_gap = q - pts[pts.len() - 1] + pts[0];
        let gap = pts.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0).max(wrap_gap);
        gap as f64 / q as f64
    }

    /// Least `n` whose orbit segment is `eps`-dense (every gap at most `eps`).
    pub fn density_horizon(&self, eps: f64) -> Option<u64> {
        let (mut lo, mut hi) = (0u64, self.alpha_q - 1);
        if self.orbit_gap(hi) > eps {
            return None;
        }
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.orbit_gap(mid) <= eps {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }
}

/// The fixture set: four arcs of length `0.005`.
pub fn standard_fixture() -> ArcUnion {
    ArcUnion::new(
        [0.12, 0.31, 0.58, 0.83]
            .into_iter()
            .map(|s| Arc::new(s, 0.005).expect("valid arc")),
    )
}

/// `{g ∈ Ball(r) : g·x ∈ A}`, with elements whose image is within the margin
/// of an endpoint of `A` held out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReturnSet {
    pub set: FiniteWindowSet,
    pub ambiguous: Vec<GroupElement>,
}

pub fn return_set(system: &CircleSystem, a: &ArcUnion, x: f64, r: u32, margin: f64) -> Result<ReturnSet, CircleError> {
    let f2 = GroupDescriptor::free(2)?;
    let ball = enumerate_ball(&f2, r)?;
    let mut inside = Vec::new();
    let mut ambiguous = Vec::new();
    for g in &ball {
        let y = system.act_point(g.as_word().expect("free group"), x)?;
        match a.classify(y, margin) {
            Side::Inside => inside.push(g.clone()),
            Side::Ambiguous => ambiguous.push(g.clone()),
            Side::Outside => {}
        }
    }
    let set = FiniteWindowSet::new(&ball, inside).expect("elements come from the window");
    Ok(ReturnSet { set, ambiguous })
}
