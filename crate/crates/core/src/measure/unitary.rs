use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::MeasureError;
use crate::group::{enumerate_ball, GroupDescriptor, GroupElement};

const UNITARY_TOL: f64 = 1e-10;
const MAX_GROUP_ORDER: u64 = 1 << 20;

/// A finite-dimensional unitary representation of a finite abelian group
/// `Z_{m_1} × … × Z_{m_r}`, given by one matrix per generator.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryRep {
    moduli: Vec<u64>,
    generators: Vec<DMatrix<Complex64>>,
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn pow(m: &DMatrix<Complex64>, k: u64) -> DMatrix<Complex64> {
    let mut out = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

impl UnitaryRep {
    pub fn new(descriptor: &GroupDescriptor, generators: Vec<DMatrix<Complex64>>) -> Result<Self, MeasureError> {
        let moduli = match descriptor {
            GroupDescriptor::CyclicProduct { moduli } => moduli.clone(),
            _ => return Err(MeasureError::InvalidRepresentation("group must be a product of cyclic groups".into())),
        };
        if generators.len() != moduli.len() {
            return Err(MeasureError::InvalidRepresentation("one matrix per generator required".into()));
        }
        if moduli.iter().try_fold(1u64, |acc, &m| acc.checked_mul(m)).is_none_or(|n| n > MAX_GROUP_ORDER) {
            return Err(MeasureError::InvalidRepresentation("group too large to average over".into()));
        }
        let dim = generators.first().map_or(0, |g| g.nrows());
        if dim == 0 || generators.iter().any(|g| g.nrows() != dim || g.ncols() != dim) {
            return Err(MeasureError::InvalidRepresentation("matrices must be square of one common size".into()));
        }
        let id = DMatrix::<Complex64>::identity(dim, dim);
        for (g, &m) in generators.iter().zip(&moduli) {
            let defect = max_abs(&(g * g.adjoint() - &id));
            if defect > UNITARY_TOL {
                return Err(MeasureError::NotUnitary { defect });
            }
            let cycle = max_abs(&(pow(g, m) - &id));
            if cycle > UNITARY_TOL {
                return Err(MeasureError::InvalidRepresentation(format!("generator order does not divide {m}")));
            }
        }
        for i in 0..generators.len() {
            for j in 0..i {
                let (a, b) = (&generators[i], &generators[j]);
                if max_abs(&(a * b - b * a)) > UNITARY_TOL {
                    return Err(MeasureError::InvalidRepresentation("generators do not commute".into()));
                }
            }
        }
        Ok(UnitaryRep { moduli, generators })
    }

    /// The trivial representation on `C^dim`.
    pub fn trivial(descriptor: &GroupDescriptor, dim: usize) -> Result<Self, MeasureError> {
        let n = descriptor.generator_count();
        UnitaryRep::new(descriptor, vec![DMatrix::identity(dim, dim); n])
    }

    /// Generators `Q D_i Q*` with a random unitary `Q` and random diagonal
    /// `D_i` of `m_i`-th roots of unity; each coordinate is trivial with
    /// probability `trivial_bias` so that fixed vectors occur.
    pub fn random(descriptor: &GroupDescriptor, dim: usize, trivial_bias: f64, rng: &mut impl Rng) -> Result<Self, MeasureError> {
        let moduli = match descriptor {
            GroupDescriptor::CyclicProduct { moduli } => moduli.clone(),
            _ => return Err(MeasureError::InvalidRepresentation("group must be a product of cyclic groups".into())),
        };
        let raw = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let q = raw.qr().q();
        let trivial: Vec<bool> = (0..dim).map(|_| rng.gen_bool(trivial_bias)).collect();
        let generators = moduli
            .iter()
            .map(|&m| {
                let diag = DVector::from_fn(dim, |i, _| {
                    let k = if trivial[i] { 0 } else { rng.gen_range(0..m) };
                    Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64)
                });
                &q * DMatrix::from_diagonal(&diag) * q.adjoint()
            })
            .collect();
        UnitaryRep::new(descriptor, generators)
    }

    pub fn dim(&self) -> usize {
        self.generators[0].nrows()
    }

    pub fn order(&self) -> u64 {
        self.moduli.iter().product()
    }

    pub fn matrix(&self, g: &GroupElement) -> Result<DMatrix<Complex64>, MeasureError> {
        let desc = GroupDescriptor::CyclicProduct { moduli: self.moduli.clone() };
        desc.check(g)?;
        let GroupElement::Residues(r) = g else { unreachable!() };
        Ok(self
            .generators
            .iter()
            .zip(r)
            .fold(DMatrix::identity(self.dim(), self.dim()), |acc, (m, &k)| acc * pow(m, k)))
    }

    /// Orthonormal basis of the vectors fixed by every generator.
    pub fn fixed_basis(&self) -> Vec<DVector<Complex64>> {
        let d = self.dim();
        let mut stacked = DMatrix::<Complex64>::zeros(d * self.generators.len(), d);
        for (i, g) in self.generators.iter().enumerate() {
            stacked.view_mut((i * d, 0), (d, d)).copy_from(&(g - DMatrix::identity(d, d)));
        }
        let svd = stacked.svd(false, true);
        let vt = svd.v_t.expect("requested");
        svd.singular_values
            .iter()
            .enumerate()
            .filter(|(_, s)| **s <= 1e-9)
            .map(|(i, _)| vt.row(i).adjoint())
            .collect()
    }
}

/// `⟨x, y⟩`, conjugate-linear in `x`.
pub fn inner(x: &DVector<Complex64>, y: &DVector<Complex64>) -> Complex64 {
    x.dotc(y)
}

/// The group average of a matrix coefficient and, computed separately, the
/// inner product of the projections onto the fixed space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientMean {
    pub averaged: Complex64,
    pub projected: Complex64,
}

impl CoefficientMean {
    pub fn discrepancy(&self) -> f64 {
        (self.averaged - self.projected).norm()
    }
}

pub fn matrix_coefficient_mean(
    rep: &UnitaryRep,
    x: &DVector<Complex64>,
    y: &DVector<Complex64>,
) -> Result<CoefficientMean, MeasureError> {
    if x.len() != rep.dim() || y.len() != rep.dim() {
        return Err(MeasureError::InvalidRepresentation("vector length differs from dimension".into()));
    }
    let desc = GroupDescriptor::CyclicProduct { moduli: rep.moduli.clone() };
    // the ball of radius Σ m_i/2 is the whole group
    let radius = rep.moduli.iter().map(|m| m / 2).sum::<u64>() as u32;
    let group = enumerate_ball(&desc, radius)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for g in &group {
        sum += inner(x, &(rep.matrix(g)? * y));
    }
    let averaged = sum / group.len() as f64;
    let projected = rep.fixed_basis().iter().map(|v| inner(v, x).conj() * inner(v, y)).sum();
    Ok(CoefficientMean { averaged, projected })
}
