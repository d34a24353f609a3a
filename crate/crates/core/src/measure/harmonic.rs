use serde::{Deserialize, Serialize};

use super::sparse::{PowerOptions, Powers, SparseMeasure};
use super::MeasureError;
use crate::group::{enumerate_ball, GroupDescriptor, GroupElement, Word};

/// Outcome of checking `f(g) = Σ_h μ(h) f(h·g)` on a ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCheck {
    pub max_residual: f64,
    pub worst: Option<GroupElement>,
    pub passed: bool,
}

/// Largest left-harmonicity defect of `f` over `Ball(r)`.
pub fn harmonic_check(
    f: impl Fn(&GroupElement) -> f64,
    mu: &SparseMeasure,
    r: u32,
    tol: f64,
) -> Result<HarmonicCheck, MeasureError> {
    let desc = mu.descriptor();
    let mut out = HarmonicCheck {
        max_residual: 0.0,
        worst: None,
        passed: true,
    };
    for g in &enumerate_ball(desc, r)? {
        let avg: f64 = mu.atoms().iter().map(|(h, w)| w * f(&desc.mul_unchecked(h, g))).sum();
        let res = (f(g) - avg).abs();
        if out.worst.is_none() || res > out.max_residual {
            out.max_residual = res;
            out.worst = Some(g.clone());
        }
    }
    out.passed = out.max_residual <= tol;
    Ok(out)
}

/// Ends of the free group reached by the left walk `h_n⋯h_1·g` whose
/// stabilised tail is the reduced word `suffix`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryCylinder {
    suffix: Word,
}

impl BoundaryCylinder {
    pub fn new(suffix: Word) -> Result<Self, MeasureError> {
        if suffix.is_empty() || !suffix.is_reduced() {
            return Err(MeasureError::InvalidCylinder);
        }
        Ok(BoundaryCylinder { suffix })
    }

    pub fn word(&self) -> &Word {
        &self.suffix
    }

    /// The `2k` one-letter cylinders, which partition the boundary.
    pub fn letters(rank: usize) -> Vec<BoundaryCylinder> {
        (1..=rank as i32)
            .flat_map(|i| [i, -i])
            .map(|l| BoundaryCylinder { suffix: Word::generator(l) })
            .collect()
    }
}

/// Closed interval known to contain a value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedValue {
    pub lower: f64,
    pub upper: f64,
}

impl CertifiedValue {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// The midpoint, if the interval is narrower than `tol`.
    pub fn point(&self, tol: f64) -> Option<f64> {
        (self.width() <= tol).then(|| self.midpoint())
    }
}

const ROUNDING_SLACK: f64 = 1e-14;

/// `g ↦ P[the simple random walk from g ends in the cylinder]` on `F_rank`.
///
/// Seen from the cylinder, the walk's position is a birth-death chain on a
/// signed level: inside the cylinder's subtree it counts depth, outside it
/// counts distance to the subtree's root. Truncating at `±depth` and closing
/// with the extreme admissible boundary values brackets the true solution.
#[derive(Clone, Debug)]
pub struct CylinderHarmonic {
    rank: usize,
    // the walk is analysed on g⁻¹ against the prefix w⁻¹
    prefix: Word,
    depth: u32,
    rho: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl CylinderHarmonic {
    pub fn new(cylinder: &BoundaryCylinder, rank: usize, depth: u32) -> Result<Self, MeasureError> {
        if rank < 2 || depth < 1 || cylinder.suffix.letters().iter().any(|l| l.unsigned_abs() as usize > rank) {
            return Err(MeasureError::InvalidCylinder);
        }
        let rho = 1.0 / (2 * rank - 1) as f64;
        let edge = rho.powi(depth as i32);
        let lower = solve_levels(rank, depth, 0.0, 1.0 - edge);
        let upper = solve_levels(rank, depth, edge, 1.0);
        Ok(CylinderHarmonic {
            rank,
            prefix: cylinder.suffix.inverse(),
            depth,
            rho,
            lower,
            upper,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn level(&self, g: &Word) -> i64 {
        let x = g.inverse();
        if x.starts_with(&self.prefix) {
            return (x.len() - self.prefix.len()) as i64 + 1;
        }
        let mut root = self.prefix.clone();
        let last = *root.letters().last().expect("nonempty");
        root.push(-last);
        -(x.inverse().mul(&root).len() as i64)
    }

    pub fn eval(&self, g: &GroupElement) -> Result<CertifiedValue, MeasureError> {
        let w = g.as_word().ok_or(MeasureError::DescriptorMismatch)?;
        if w.letters().iter().any(|l| l.unsigned_abs() as usize > self.rank) {
            return Err(MeasureError::DescriptorMismatch);
        }
        let level = self.level(w);
        let n = self.depth as i64;
        let (lo, hi) = if level >= n {
            (1.0 - self.rho.powi(level as i32), 1.0)
        } else if level <= -n {
            (0.0, self.rho.powi((-level) as i32))
        } else {
            let i = (level + n) as usize;
            (self.lower[i], self.upper[i])
        };
        Ok(CertifiedValue {
            lower: (lo - ROUNDING_SLACK).max(0.0),
            upper: (hi + ROUNDING_SLACK).min(1.0),
        })
    }

    /// Midpoint of the certified interval, for use as a plain function.
    pub fn value(&self, g: &GroupElement) -> f64 {
        self.eval(g).map(|c| c.midpoint()).unwrap_or(f64::NAN)
    }
}

/// Solves the level chain on `-n..=n` with the two end values fixed.
fn solve_levels(rank: usize, n: u32, at_bottom: f64, at_top: f64) -> Vec<f64> {
    let n = n as i64;
    let toward = 1.0 / (2 * rank) as f64;
    let away = 1.0 - toward;
    let size = (2 * n + 1) as usize;
    // row i: a u[i-1] + u[i] + c u[i+1] = d
    let mut a = vec![0.0; size];
    let mut c = vec![0.0; size];
    let mut d = vec![0.0; size];
    for i in 1..size - 1 {
        let level = i as i64 - n;
        if level >= 0 {
            // level 0 steps up only into the cylinder root
            a[i] = -if level == 0 { away } else { toward };
            c[i] = -if level == 0 { toward } else { away };
        } else {
            a[i] = -away;
            c[i] = -toward;
        }
    }
    d[0] = at_bottom;
    d[size - 1] = at_top;
    // Thomas elimination, diagonal fixed at 1
    let mut cp = vec![0.0; size];
    let mut dp = vec![0.0; size];
    dp[0] = d[0];
    for i in 1..size {
        let m = 1.0 - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    let mut u = vec![0.0; size];
    u[size - 1] = dp[size - 1];
    for i in (0..size - 1).rev() {
        u[i] = dp[i] - cp[i] * u[i + 1];
    }
    u
}

/// One-off evaluation of a cylinder harmonic.
pub fn free_cylinder_harmonic(
    cylinder: &BoundaryCylinder,
    rank: usize,
    g: &GroupElement,
    depth: u32,
) -> Result<CertifiedValue, MeasureError> {
    CylinderHarmonic::new(cylinder, rank, depth)?.eval(g)
}

/// `∫ φ(h·g) ψ(h·g) dμ^{*k}(h)` for `k = 1..=n`.
pub fn choi_effros_approx(
    phi: impl Fn(&GroupElement) -> f64,
    psi: impl Fn(&GroupElement) -> f64,
    mu: &SparseMeasure,
    g: &GroupElement,
    n: u32,
    opts: PowerOptions,
) -> Result<Vec<f64>, MeasureError> {
    if n == 0 {
        return Err(MeasureError::ZeroPower);
    }
    let desc: &GroupDescriptor = mu.descriptor();
    desc.check(g)?;
    let mut out = Vec::with_capacity(n as usize);
    for p in Powers::new(mu, opts)?.take(n as usize) {
        let p = p?;
        let v = p
            .measure
            .atoms()
            .iter()
            .map(|(h, w)| {
                let x = desc.mul_unchecked(h, g);
                w * phi(&x) * psi(&x)
            })
            .sum();
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> GroupDescriptor {
        GroupDescriptor::free(2).unwrap()
    }

    fn cyl(s: &str) -> BoundaryCylinder {
        BoundaryCylinder::new(s.parse().unwrap()).unwrap()
    }

    fn w(s: &str) -> GroupElement {
        GroupElement::word(s).unwrap()
    }

    // hitting-probability closed form for the simple walk on a 4-regular tree
    fn oracle_a(g: &str) -> f64 {
        let word: Word = g.parse().unwrap();
        let (rho, base) = (1.0f64 / 3.0, 0.25);
        if word.letters().last() == Some(&1) {
            1.0 - rho.powi(word.len() as i32) * (1.0 - base)
        } else {
            rho.powi(word.len() as i32) * base
        }
    }

    #[test]
    fn single_letter_values() {
        let h = CylinderHarmonic::new(&cyl("a"), 2, 40).unwrap();
        for (g, v) in [("e", 0.25), ("a", 0.75), ("b", 1.0 / 12.0), ("A", 1.0 / 12.0), ("ba", 11.0 / 12.0)] {
            let c = h.eval(&w(g)).unwrap();
            assert!(c.contains(v), "{g}: {c:?}");
            assert!(c.width() < 1e-12);
            assert!((oracle_a(g) - v).abs() < 1e-15);
        }
        for g in ["aa", "Ba", "bb", "abA", "aBaa"] {
            assert!(h.eval(&w(g)).unwrap().contains(oracle_a(g)), "{g}");
        }
    }

    #[test]
    fn shallow_truncation_gives_honest_interval() {
        let c = free_cylinder_harmonic(&cyl("a"), 2, &w("a"), 2).unwrap();
        assert!(c.contains(0.75));
        assert!(c.width() > 1e-3);
        assert!(c.point(1e-6).is_none());
        let far = free_cylinder_harmonic(&cyl("a"), 2, &w("bbbbbb"), 3).unwrap();
        assert!(far.contains(0.25 / 729.0) && far.lower == 0.0);
    }

    #[test]
    fn letter_cylinders_partition_unity() {
        let hs: Vec<_> = BoundaryCylinder::letters(2)
            .iter()
            .map(|c| CylinderHarmonic::new(c, 2, 50).unwrap())
            .collect();
        for g in &enumerate_ball(&f2(), 4).unwrap() {
            let total: f64 = hs.iter().map(|h| h.value(g)).sum();
            assert!((total - 1.0).abs() < 1e-12, "{g}");
        }
    }

    #[test]
    fn cylinder_functions_are_harmonic() {
        let mu = SparseMeasure::simple_random_walk(&f2());
        for s in ["a", "B", "ab", "bAb"] {
            let h = CylinderHarmonic::new(&cyl(s), 2, 60).unwrap();
            let check = harmonic_check(|g| h.value(g), &mu, 4, 1e-9).unwrap();
            assert!(check.passed, "{s}: {check:?}");
        }
        // the two-letter cylinders under a split their parent
        let parts: Vec<_> = ["aa", "ba", "Ba"].iter().map(|s| CylinderHarmonic::new(&cyl(s), 2, 60).unwrap()).collect();
        let parent = CylinderHarmonic::new(&cyl("a"), 2, 60).unwrap();
        for g in &enumerate_ball(&f2(), 3).unwrap() {
            let sum: f64 = parts.iter().map(|h| h.value(g)).sum();
            assert!((sum - parent.value(g)).abs() < 1e-12);
        }
    }

    #[test]
    fn elementary_harmonic_checks() {
        let z = GroupDescriptor::integers();
        let mu = SparseMeasure::simple_random_walk(&z);
        assert_eq!(harmonic_check(|_| 3.5, &mu, 10, 0.0).unwrap().max_residual, 0.0);
        assert_eq!(harmonic_check(|g| g.as_int().unwrap() as f64, &mu, 10, 0.0).unwrap().max_residual, 0.0);
        let bad = harmonic_check(|g| (g.as_int().unwrap() as f64).powi(2), &mu, 3, 1e-9).unwrap();
        assert!(!bad.passed && bad.max_residual == 1.0);
    }

    #[test]
    fn choi_effros_products() {
        let mu = SparseMeasure::simple_random_walk(&f2());
        let ones = choi_effros_approx(|_| 1.0, |_| 1.0, &mu, &f2().identity(), 4, PowerOptions::default()).unwrap();
        assert!(ones.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let ha = CylinderHarmonic::new(&cyl("a"), 2, 60).unwrap();
        let hb = CylinderHarmonic::new(&cyl("b"), 2, 60).unwrap();
        let e = f2().identity();
        let aa = choi_effros_approx(|g| ha.value(g), |g| ha.value(g), &mu, &e, 9, PowerOptions::default()).unwrap();
        let ab = choi_effros_approx(|g| ha.value(g), |g| hb.value(g), &mu, &e, 9, PowerOptions::default()).unwrap();
        assert!((aa[8] - 0.25).abs() < 0.015, "{aa:?}");
        assert!(ab[8].abs() < 0.015, "{ab:?}");
        assert!(0.25 - aa[8] < 0.5 * (0.25 - aa[2]));
        assert!(ab[8] < 0.5 * ab[2]);
        // E[h²] increases along a bounded martingale
        assert!(aa.windows(2).all(|p| p[1] >= p[0] - 1e-12));
    }
}
