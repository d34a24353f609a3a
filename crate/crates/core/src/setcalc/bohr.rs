use serde::{Deserialize, Serialize};

use super::{Membership, SetError};
use crate::group::GroupElement;

/// Bohr neighbourhood `{g ∈ Z^d : ‖τ(g) − c‖ < ε}` for the homomorphism
/// `τ(g)_j = Σ_i g_i θ_{j,i} mod 1` into the torus `T^{d'}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BohrSpec {
    /// One row of `d` frequencies per torus coordinate.
    frequencies: Vec<Vec<f64>>,
    center: Vec<f64>,
    radius: f64,
}

/// Distance to the nearest integer.
pub fn torus_norm(x: f64) -> f64 {
    let f = x - x.floor();
    f.min(1.0 - f)
}

impl BohrSpec {
    pub fn new(frequencies: Vec<Vec<f64>>, center: Vec<f64>, radius: f64) -> Result<Self, SetError> {
        if !(radius > 0.0 && radius <= 0.5) {
            return Err(SetError::Invalid(format!("Bohr radius {radius} outside (0, 1/2]")));
        }
        if frequencies.is_empty() || frequencies.len() != center.len() {
            return Err(SetError::Invalid("need one center coordinate per frequency row".into()));
        }
        let d = frequencies[0].len();
        if d == 0 || frequencies.iter().any(|row| row.len() != d) {
            return Err(SetError::Invalid("frequency rows must share the lattice dimension".into()));
        }
        let in_unit = |x: &f64| (0.0..1.0).contains(x);
        if !frequencies.iter().flatten().all(in_unit) || !center.iter().all(in_unit) {
            return Err(SetError::Invalid("frequencies and center must lie in [0,1)".into()));
        }
        Ok(BohrSpec {
            frequencies,
            center,
            radius,
        })
    }

    /// One frequency on `Z`, centred at 0.
    pub fn single(theta: f64, radius: f64) -> Result<Self, SetError> {
        BohrSpec::new(vec![vec![theta]], vec![0.0], radius)
    }

    pub fn lattice_dim(&self) -> usize {
        self.frequencies[0].len()
    }

    pub fn torus_dim(&self) -> usize {
        self.frequencies.len()
    }

    pub fn contains_int(&self, n: i64) -> bool {
        self.contains_vec(&[n])
    }

    fn contains_vec(&self, v: &[i64]) -> bool {
        self.frequencies.iter().zip(&self.center).all(|(row, c)| {
            let phase: f64 = row.iter().zip(v).map(|(t, &g)| (t * g as f64).rem_euclid(1.0)).sum();
            torus_norm(phase - c) < self.radius
        })
    }
}

/// Membership of a lattice element in the Bohr set.
pub fn bohr_membership(spec: &BohrSpec, g: &GroupElement) -> Result<bool, SetError> {
    match g.as_vector() {
        Some(v) if v.len() == spec.lattice_dim() => Ok(spec.contains_vec(v)),
        _ => Err(SetError::DescriptorMismatch),
    }
}

/// Best relative coverage of the Bohr set by `C` over windows `[t, t+n)`,
/// `t ∈ search`. Unknown membership counts as absent.
pub fn piecewise_bohr_score(
    c: &dyn Membership,
    spec: &BohrSpec,
    probe_len: u64,
    search: std::ops::RangeInclusive<i64>,
) -> f64 {
    assert!(probe_len >= 1 && spec.lattice_dim() == 1);
    let mut best = 0.0f64;
    for t in search {
        let mut bohr = 0u64;
        let mut hit = 0u64;
        for n in t..t + probe_len as i64 {
            if spec.contains_int(n) {
                bohr += 1;
                if c.membership(&GroupElement::int(n)) == Some(true) {
                    hit += 1;
                }
            }
        }
        best = best.max(hit as f64 / bohr.max(1) as f64);
    }
    best
}
