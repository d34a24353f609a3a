use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::MeasureError;
use crate::group::{GroupDescriptor, GroupElement};

/// Mass tolerance for probability measures built from floats.
pub const MASS_TOL: f64 = 1e-12;

/// Default cap on the number of atoms a convolution may produce.
pub const DEFAULT_SUPPORT_CAP: usize = 5_000_000;

/// A finitely supported measure on a group, atoms in canonical order.
///
/// Measures built through [`SparseMeasure::new`] are probability measures.
/// Pruned convolution powers may carry less mass; the missing amount is
/// always reported alongside them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMeasure {
    descriptor: GroupDescriptor,
    atoms: Vec<(GroupElement, f64)>,
}

impl SparseMeasure {
    pub fn new(
        descriptor: &GroupDescriptor,
        atoms: impl IntoIterator<Item = (GroupElement, f64)>,
    ) -> Result<Self, MeasureError> {
        let mut merged: HashMap<GroupElement, f64> = HashMap::new();
        for (g, w) in atoms {
            descriptor.check(&g)?;
            if !(w > 0.0 && w.is_finite()) {
                return Err(MeasureError::InvalidWeight { atom: g.to_string(), weight: w });
            }
            *merged.entry(g).or_default() += w;
        }
        let m = SparseMeasure::from_map(descriptor, merged);
        let mass = m.mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(MeasureError::NotProbability { mass });
        }
        Ok(m)
    }

    pub(crate) fn from_map(descriptor: &GroupDescriptor, map: HashMap<GroupElement, f64>) -> Self {
        let mut atoms: Vec<(GroupElement, f64)> = map.into_iter().filter(|(_, w)| *w > 0.0).collect();
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        SparseMeasure {
            descriptor: descriptor.clone(),
            atoms,
        }
    }

    pub fn dirac(descriptor: &GroupDescriptor, g: GroupElement) -> Result<Self, MeasureError> {
        SparseMeasure::new(descriptor, [(g, 1.0)])
    }

    pub fn uniform(descriptor: &GroupDescriptor, support: &[GroupElement]) -> Result<Self, MeasureError> {
        let w = 1.0 / support.len() as f64;
        SparseMeasure::new(descriptor, support.iter().map(|g| (g.clone(), w)))
    }

    /// Uniform measure on the standard generators and their inverses.
    pub fn simple_random_walk(descriptor: &GroupDescriptor) -> Self {
        SparseMeasure::uniform(descriptor, &descriptor.symmetric_generators())
            .expect("generators form a valid support")
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    pub fn atoms(&self) -> &[(GroupElement, f64)] {
        &self.atoms
    }

    pub fn support_len(&self) -> usize {
        self.atoms.len()
    }

    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    pub fn weight(&self, g: &GroupElement) -> f64 {
        self.atoms
            .binary_search_by(|(x, _)| x.cmp(g))
            .map(|i| self.atoms[i].1)
            .unwrap_or(0.0)
    }

    /// `μ(A)` for a membership predicate.
    pub fn measure_of(&self, a: impl Fn(&GroupElement) -> bool) -> f64 {
        self.atoms.iter().filter(|(g, _)| a(g)).map(|(_, w)| w).sum()
    }

    pub fn max_support_length(&self) -> u64 {
        self.atoms.iter().map(|(g, _)| self.descriptor.length(g)).max().unwrap_or(0)
    }

    /// `μ(g) = μ(g⁻¹)` for every atom, up to `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.atoms
            .iter()
            .all(|(g, w)| (self.weight(&self.descriptor.inv(g)) - w).abs() <= tol)
    }

    /// Whether the semigroup generated by the support contains the ball of
    /// radius `r`, exploring products up to length `r + max support length`.
    pub fn is_adapted(&self, r: u32) -> bool {
        let desc = &self.descriptor;
        let limit = r as u64 + self.max_support_length();
        let support: Vec<&GroupElement> = self.atoms.iter().map(|(g, _)| g).collect();
        let mut seen: HashSet<GroupElement> = HashSet::new();
        let mut queue: VecDeque<GroupElement> = support.iter().map(|g| (*g).clone()).collect();
        seen.extend(queue.iter().cloned());
        while let Some(x) = queue.pop_front() {
            for s in &support {
                let y = desc.mul_unchecked(&x, s);
                if desc.length(&y) <= limit && seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        match crate::group::enumerate_ball(desc, r) {
            Ok(ball) => ball.iter().all(|g| seen.contains(g)),
            Err(_) => false,
        }
    }

    /// One `element weight` line per atom.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for (g, w) in &self.atoms {
            let _ = writeln!(out, "{g} {w:e}");
        }
        out
    }

    pub fn parse_lines(descriptor: &GroupDescriptor, text: &str) -> Result<Self, MeasureError> {
        let mut atoms = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (g, w) = line
                .rsplit_once(char::is_whitespace)
                .ok_or_else(|| MeasureError::Parse(line.to_string()))?;
            let w = parse_weight(w.trim()).ok_or_else(|| MeasureError::Parse(line.to_string()))?;
            atoms.push((descriptor.parse_element(g)?, w));
        }
        SparseMeasure::new(descriptor, atoms)
    }
}

/// Decimal or `p/q` weights.
fn parse_weight(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((p, q)) => Some(p.trim().parse::<f64>().ok()? / q.trim().parse::<f64>().ok()?),
        None => s.parse().ok(),
    }
}

/// `(μ * ν)(x) = Σ_g μ(g) ν(g⁻¹x)`.
pub fn convolve(mu: &SparseMeasure, nu: &SparseMeasure) -> Result<SparseMeasure, MeasureError> {
    convolve_capped(mu, nu, DEFAULT_SUPPORT_CAP)
}

pub fn convolve_capped(mu: &SparseMeasure, nu: &SparseMeasure, cap: usize) -> Result<SparseMeasure, MeasureError> {
    if mu.descriptor != nu.descriptor {
        return Err(MeasureError::DescriptorMismatch);
    }
    let desc = &mu.descriptor;
    let mut acc: HashMap<GroupElement, f64> = HashMap::with_capacity((mu.atoms.len() * nu.atoms.len()).min(cap));
    let push = |g: GroupElement, w: f64, acc: &mut HashMap<GroupElement, f64>| -> Result<(), MeasureError> {
        *acc.entry(g).or_default() += w;
        if acc.len() > cap {
            return Err(MeasureError::SupportExplosion { cap });
        }
        Ok(())
    };
    // the smaller support drives the outer loop; summation order per atom is fixed
    if mu.atoms.len() <= nu.atoms.len() {
        for (g, a) in &mu.atoms {
            for (h, b) in &nu.atoms {
                push(desc.mul_unchecked(g, h), a * b, &mut acc)?;
            }
        }
    } else {
        for (h, b) in &nu.atoms {
            for (g, a) in &mu.atoms {
                push(desc.mul_unchecked(g, h), a * b, &mut acc)?;
            }
        }
    }
    Ok(SparseMeasure::from_map(desc, acc))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerOptions {
    /// Atoms lighter than this are dropped after every step (at most 1e-6).
    pub prune_tol: f64,
    pub support_cap: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            prune_tol: 0.0,
            support_cap: DEFAULT_SUPPORT_CAP,
        }
    }
}

/// A (possibly pruned) convolution power and the mass removed by pruning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Power {
    pub k: u32,
    pub measure: SparseMeasure,
    pub pruned_mass: f64,
}

fn check_prune_tol(tol: f64) -> Result<(), MeasureError> {
    if (0.0..=1e-6).contains(&tol) {
        Ok(())
    } else {
        Err(MeasureError::InvalidPruneTolerance(tol))
    }
}

/// Iterator over `μ^{*1}, μ^{*2}, ...` with pruning after each step.
pub struct Powers<'a> {
    mu: &'a SparseMeasure,
    current: Option<Power>,
    opts: PowerOptions,
    failed: bool,
}

impl<'a> Powers<'a> {
    pub fn new(mu: &'a SparseMeasure, opts: PowerOptions) -> Result<Self, MeasureError> {
        check_prune_tol(opts.prune_tol)?;
        Ok(Powers {
            mu,
            current: None,
            opts,
            failed: false,
        })
    }
}

impl Iterator for Powers<'_> {
    type Item = Result<Power, MeasureError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let step = match &self.current {
            None => Ok((1, self.mu.clone(), 0.0)),
            Some(p) => convolve_capped(&p.measure, self.mu, self.opts.support_cap).map(|m| (p.k + 1, m, p.pruned_mass)),
        };
        let (k, mut measure, mut pruned) = match step {
            Ok(s) => s,
            Err(e) => {
                self.failed = true;
                return Some(Err(e));
            }
        };
        if self.opts.prune_tol > 0.0 {
            let tol = self.opts.prune_tol;
            pruned += measure.atoms.iter().filter(|(_, w)| *w < tol).map(|(_, w)| w).sum::<f64>();
            measure.atoms.retain(|(_, w)| *w >= tol);
        }
        let p = Power {
            k,
            measure,
            pruned_mass: pruned,
        };
        self.current = Some(p.clone());
        Some(Ok(p))
    }
}

/// `μ^{*k}`, pruned at `opts.prune_tol` after every step.
pub fn convolution_power(mu: &SparseMeasure, k: u32, opts: PowerOptions) -> Result<Power, MeasureError> {
    if k == 0 {
        return Err(MeasureError::ZeroPower);
    }
    let mut last = None;
    for p in Powers::new(mu, opts)?.take(k as usize) {
        last = Some(p?);
    }
    Ok(last.expect("k >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_walk() -> SparseMeasure {
        SparseMeasure::simple_random_walk(&GroupDescriptor::integers())
    }

    #[test]
    fn binomial_convolution() {
        let mu = z_walk();
        let m2 = convolve(&mu, &mu).unwrap();
        let w: Vec<(i64, f64)> = m2.atoms().iter().map(|(g, w)| (g.as_int().unwrap(), *w)).collect();
        assert_eq!(w, [(-2, 0.25), (0, 0.5), (2, 0.25)]);
        let m3 = convolution_power(&mu, 3, PowerOptions::default()).unwrap();
        let w: Vec<(i64, f64)> = m3.measure.atoms().iter().map(|(g, w)| (g.as_int().unwrap(), *w)).collect();
        assert_eq!(w, [(-3, 0.125), (-1, 0.375), (1, 0.375), (3, 0.125)]);
    }

    #[test]
    fn free_group_return_mass() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let mu = SparseMeasure::simple_random_walk(&f2);
        let m2 = convolve(&mu, &mu).unwrap();
        assert_eq!(m2.weight(&f2.identity()), 0.25);
        assert_eq!(m2.support_len(), 13);
        assert_eq!(convolution_power(&mu, 1, PowerOptions::default()).unwrap().measure, mu);
    }

    #[test]
    fn dirac_is_identity() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let mu = SparseMeasure::simple_random_walk(&f2);
        let delta = SparseMeasure::dirac(&f2, f2.identity()).unwrap();
        assert_eq!(convolve(&delta, &mu).unwrap(), mu);
        assert_eq!(convolve(&mu, &delta).unwrap(), mu);
    }

    #[test]
    fn validation() {
        let z = GroupDescriptor::integers();
        assert!(matches!(
            SparseMeasure::new(&z, [(GroupElement::int(0), 0.5)]),
            Err(MeasureError::NotProbability { .. })
        ));
        assert!(SparseMeasure::new(&z, [(GroupElement::int(0), -1.0), (GroupElement::int(1), 2.0)]).is_err());
        let f2 = GroupDescriptor::free(2).unwrap();
        assert!(matches!(convolve(&z_walk(), &SparseMeasure::simple_random_walk(&f2)), Err(MeasureError::DescriptorMismatch)));
        assert!(matches!(convolution_power(&z_walk(), 0, PowerOptions::default()), Err(MeasureError::ZeroPower)));
        let opts = PowerOptions { prune_tol: 0.1, ..Default::default() };
        assert!(matches!(convolution_power(&z_walk(), 2, opts), Err(MeasureError::InvalidPruneTolerance(_))));
    }

    #[test]
    fn support_cap_is_enforced() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let mu = SparseMeasure::simple_random_walk(&f2);
        let opts = PowerOptions { support_cap: 100, ..Default::default() };
        assert!(matches!(convolution_power(&mu, 6, opts), Err(MeasureError::SupportExplosion { cap: 100 })));
    }

    #[test]
    fn symmetry_and_adaptedness() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let mu = SparseMeasure::simple_random_walk(&f2);
        assert!(mu.is_symmetric(0.0));
        assert!(mu.is_adapted(3));
        let lopsided = SparseMeasure::uniform(&f2, &[GroupElement::word("a").unwrap(), GroupElement::word("b").unwrap()]).unwrap();
        assert!(!lopsided.is_symmetric(0.0));
        assert!(!lopsided.is_adapted(1));
    }

    #[test]
    fn line_format_round_trip() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let mu = convolution_power(&SparseMeasure::simple_random_walk(&f2), 2, PowerOptions::default()).unwrap().measure;
        let back = SparseMeasure::parse_lines(&f2, &mu.to_lines()).unwrap();
        assert_eq!(back, mu);
        let z = GroupDescriptor::integers();
        let m = SparseMeasure::parse_lines(&z, "-1 1/2\n1 1/2\n").unwrap();
        assert_eq!(m, z_walk());
    }
}
