use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::sparse::SparseMeasure;
use super::MeasureError;
use crate::group::{enumerate_ball, GroupDescriptor, GroupElement};

/// A group acting on `0..n` through one permutation per generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGSpace {
    descriptor: GroupDescriptor,
    states: usize,
    forward: Vec<Vec<usize>>,
    backward: Vec<Vec<usize>>,
}

fn invert(p: &[usize]) -> Option<Vec<usize>> {
    let mut inv = vec![usize::MAX; p.len()];
    for (i, &j) in p.iter().enumerate() {
        if j >= p.len() || inv[j] != usize::MAX {
            return None;
        }
        inv[j] = i;
    }
    Some(inv)
}

fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    // p after q
    q.iter().map(|&i| p[i]).collect()
}

impl FiniteGSpace {
    pub fn new(descriptor: &GroupDescriptor, states: usize, generators: Vec<Vec<usize>>) -> Result<Self, MeasureError> {
        descriptor.validate()?;
        if states == 0 {
            return Err(MeasureError::InvalidSpace("no states".into()));
        }
        if generators.len() != descriptor.generator_count() {
            return Err(MeasureError::InvalidSpace(format!(
                "{} permutations for {} generators",
                generators.len(),
                descriptor.generator_count()
            )));
        }
        let mut backward = Vec::with_capacity(generators.len());
        for (i, p) in generators.iter().enumerate() {
            if p.len() != states {
                return Err(MeasureError::InvalidSpace(format!("generator {} has wrong length", i + 1)));
            }
            backward.push(invert(p).ok_or_else(|| MeasureError::InvalidSpace(format!("generator {} is not a bijection", i + 1)))?);
        }
        if descriptor.is_abelian() {
            for i in 0..generators.len() {
                for j in 0..i {
                    if compose(&generators[i], &generators[j]) != compose(&generators[j], &generators[i]) {
                        return Err(MeasureError::InvalidSpace(format!("generators {} and {} do not commute", j + 1, i + 1)));
                    }
                }
            }
        }
        if let GroupDescriptor::CyclicProduct { moduli } = descriptor {
            for (i, (&m, p)) in moduli.iter().zip(&generators).enumerate() {
                let mut q: Vec<usize> = (0..states).collect();
                for _ in 0..m {
                    q = compose(p, &q);
                }
                if q.iter().enumerate().any(|(a, &b)| a != b) {
                    return Err(MeasureError::InvalidSpace(format!("generator {} does not have order dividing {m}", i + 1)));
                }
            }
        }
        Ok(FiniteGSpace {
            descriptor: descriptor.clone(),
            states,
            forward: generators,
            backward,
        })
    }

    /// `Z` acting on `Z_m` by `+1`.
    pub fn rotation(m: usize) -> Self {
        let p = (0..m).map(|i| (i + 1) % m).collect();
        FiniteGSpace::new(&GroupDescriptor::integers(), m, vec![p]).expect("rotation is valid")
    }

    /// The one-point space for any group.
    pub fn point(descriptor: &GroupDescriptor) -> Result<Self, MeasureError> {
        FiniteGSpace::new(descriptor, 1, vec![vec![0]; descriptor.generator_count()])
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    pub fn states(&self) -> usize {
        self.states
    }

    fn step(&self, letter: i64, times: u64, mut y: usize) -> usize {
        let i = letter.unsigned_abs() as usize - 1;
        let p = if letter > 0 { &self.forward[i] } else { &self.backward[i] };
        for _ in 0..times {
            y = p[y];
        }
        y
    }

    /// `g·y`; words act letter by letter from the right.
    pub fn act(&self, g: &GroupElement, y: usize) -> Result<usize, MeasureError> {
        self.descriptor.check(g)?;
        if y >= self.states {
            return Err(MeasureError::InvalidSpace(format!("state {y} out of range")));
        }
        Ok(match g {
            GroupElement::Vector(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .fold(y, |y, (i, &x)| self.step(x.signum() * (i as i64 + 1), x.unsigned_abs(), y)),
            GroupElement::Residues(v) => v.iter().enumerate().fold(y, |y, (i, &x)| self.step(i as i64 + 1, x, y)),
            GroupElement::Word(w) => w.letters().iter().rev().fold(y, |y, &l| self.step(l as i64, 1, y)),
        })
    }

    /// Checks `(g·h)·y = g·(h·y)` for all `g, h` in `Ball(r)` and all states.
    pub fn respects_group_law(&self, r: u32) -> Result<bool, MeasureError> {
        let ball = enumerate_ball(&self.descriptor, r)?;
        for g in &ball {
            for h in &ball {
                let gh = self.descriptor.mul_unchecked(g, h);
                for y in 0..self.states {
                    if self.act(&gh, y)? != self.act(g, self.act(h, y)?)? {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// `P(y, y') = Σ μ(g) [g·y = y']`.
    pub fn transition(&self, mu: &SparseMeasure) -> Result<DMatrix<f64>, MeasureError> {
        if *mu.descriptor() != self.descriptor {
            return Err(MeasureError::DescriptorMismatch);
        }
        let mut p = DMatrix::zeros(self.states, self.states);
        for (g, w) in mu.atoms() {
            for y in 0..self.states {
                p[(y, self.act(g, y)?)] += w;
            }
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryMeasure {
    pub weights: Vec<f64>,
    /// `‖νP − ν‖₁` at exit.
    pub residual: f64,
    pub iterations: usize,
    /// Every state reachable from the support carries positive mass.
    pub positive_on_class: bool,
}

pub const STATIONARY_ITERATION_CAP: usize = 1_000_000;

/// Fixed point of `ν ↦ νP`, by iterating the averaged step
/// `ν ↦ (ν + νP)/2`. The average shares `P`'s fixed points and kills the
/// oscillation of periodic chains.
pub fn stationary_measure(space: &FiniteGSpace, mu: &SparseMeasure, tol: f64) -> Result<StationaryMeasure, MeasureError> {
    let p = space.transition(mu)?;
    let pt = p.transpose();
    let n = space.states();
    let mut nu = DVector::from_element(n, 1.0 / n as f64);
    let mut residual = f64::INFINITY;
    for it in 0..STATIONARY_ITERATION_CAP {
        let moved = &pt * &nu;
        residual = (&moved - &nu).abs().sum();
        if residual <= tol {
            let weights: Vec<f64> = nu.iter().copied().collect();
            let positive_on_class = closed_class_positive(&p, &weights);
            return Ok(StationaryMeasure {
                weights,
                residual,
                iterations: it,
                positive_on_class,
            });
        }
        nu = (nu + moved) * 0.5;
    }
    Err(MeasureError::NoConvergence {
        iterations: STATIONARY_ITERATION_CAP,
        residual,
    })
}

fn closed_class_positive(p: &DMatrix<f64>, nu: &[f64]) -> bool {
    let n = nu.len();
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&i| nu[i] > 0.0).collect();
    for &i in &stack {
        seen[i] = true;
    }
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if p[(i, j)] > 0.0 && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    (0..n).all(|i| !seen[i] || nu[i] > 0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CesaroAverage {
    /// `(1/n) Σ_{k=1..n} (P^k φ)(y)` for each state `y`.
    pub values: Vec<f64>,
    /// `∫ φ dν` for the stationary `ν` found from the uniform start.
    pub mean: f64,
    /// `ν`-weighted 2-norm of `values − mean`.
    pub deviation: f64,
}

pub fn markov_cesaro_average(
    space: &FiniteGSpace,
    mu: &SparseMeasure,
    phi: &[f64],
    n: u32,
) -> Result<CesaroAverage, MeasureError> {
    if phi.len() != space.states() {
        return Err(MeasureError::InvalidSpace("function length differs from state count".into()));
    }
    if n == 0 {
        return Err(MeasureError::ZeroPower);
    }
    let p = space.transition(mu)?;
    let nu = stationary_measure(space, mu, 1e-13)?.weights;
    let mut f = DVector::from_column_slice(phi);
    let mut sum = DVector::zeros(phi.len());
    for _ in 0..n {
        f = &p * f;
        sum += &f;
    }
    let values: Vec<f64> = (sum / n as f64).iter().copied().collect();
    let mean: f64 = nu.iter().zip(phi).map(|(a, b)| a * b).sum();
    let deviation = nu.iter().zip(&values).map(|(w, v)| w * (v - mean).powi(2)).sum::<f64>().sqrt();
    Ok(CesaroAverage { values, mean, deviation })
}

/// `(1/n) Σ_{k=1..n} μ^{*k}({g : g·y ∈ B})`.
pub fn return_time_density(
    space: &FiniteGSpace,
    mu: &SparseMeasure,
    b: &[usize],
    y: usize,
    n: u32,
) -> Result<f64, MeasureError> {
    if y >= space.states() || b.iter().any(|&s| s >= space.states()) {
        return Err(MeasureError::InvalidSpace("state out of range".into()));
    }
    if n == 0 {
        return Err(MeasureError::ZeroPower);
    }
    let p = space.transition(mu)?;
    let mut f = DVector::zeros(space.states());
    for &s in b {
        f[s] = 1.0;
    }
    let mut total = 0.0;
    for _ in 0..n {
        f = &p * f;
        total += f[y];
    }
    Ok(total / n as f64)
}

/// Orthonormal basis of `{φ : Pφ = φ}`.
pub fn harmonic_functions(space: &FiniteGSpace, mu: &SparseMeasure, tol: f64) -> Result<Vec<Vec<f64>>, MeasureError> {
    let n = space.states();
    let a = space.transition(mu)? - DMatrix::identity(n, n);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested");
    Ok(svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(i, _)| vt.row(i).iter().copied().collect())
        .collect())
}
