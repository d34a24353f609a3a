use serde::{Deserialize, Serialize};

use super::{Membership, SetError};
use crate::group::{Ball, GroupDescriptor, GroupElement};

/// A finite subset of a group, known exactly inside `window` and nowhere else.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteWindowSet {
    descriptor: GroupDescriptor,
    elements: Vec<GroupElement>,
    window: Ball,
}

impl FiniteWindowSet {
    pub fn new(
        window: &Ball,
        elements: impl IntoIterator<Item = GroupElement>,
    ) -> Result<Self, SetError> {
        let mut elements: Vec<GroupElement> = elements.into_iter().collect();
        elements.sort();
        elements.dedup();
        for g in &elements {
            window.descriptor.check(g)?;
            if !window.contains(g) {
                return Err(SetError::OutsideWindow(g.to_string()));
            }
        }
        Ok(FiniteWindowSet {
            descriptor: window.descriptor.clone(),
            elements,
            window: window.clone(),
        })
    }

    /// The elements of `window` satisfying `pred`.
    pub fn from_predicate(window: &Ball, pred: impl Fn(&GroupElement) -> bool) -> Self {
        FiniteWindowSet {
            descriptor: window.descriptor.clone(),
            elements: window.iter().filter(|g| pred(g)).cloned().collect(),
            window: window.clone(),
        }
    }

    /// Free-group words whose reduced form begins with one of `letters`.
    pub fn first_letter(window: &Ball, letters: &[i32]) -> Self {
        FiniteWindowSet::from_predicate(window, |g| {
            g.as_word().and_then(|w| w.first()).is_some_and(|l| letters.contains(&l))
        })
    }

    /// Reads one element per line (`#` comments and blank lines ignored).
    pub fn parse_lines(window: &Ball, text: &str) -> Result<Self, SetError> {
        let elements = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| window.descriptor.parse_element(l))
            .collect::<Result<Vec<_>, _>>()?;
        FiniteWindowSet::new(window, elements)
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    pub fn window(&self) -> &Ball {
        &self.window
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    pub fn max_length(&self) -> u64 {
        self.elements.iter().map(|g| self.descriptor.length(g)).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Self {
        // balls are symmetric, so the window is unchanged
        let mut elements: Vec<GroupElement> = self.elements.iter().map(|g| self.descriptor.inv(g)).collect();
        elements.sort();
        FiniteWindowSet {
            descriptor: self.descriptor.clone(),
            elements,
            window: self.window.clone(),
        }
    }

    pub fn intersection(&self, other: &FiniteWindowSet) -> Self {
        FiniteWindowSet {
            descriptor: self.descriptor.clone(),
            elements: self.elements.iter().filter(|g| other.contains(g)).cloned().collect(),
            window: self.window.clone(),
        }
    }
}

impl Membership for FiniteWindowSet {
    fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    fn membership(&self, g: &GroupElement) -> Option<bool> {
        if self.window.contains(g) {
            Some(self.contains(g))
        } else {
            None
        }
    }
}

/// Result of a windowed product: the set and whether every product of the
/// inputs' elements landed inside the output window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductSet {
    pub set: FiniteWindowSet,
    pub exact: bool,
}

/// `{a·b : a ∈ A, b ∈ B} ∩ out_window`.
pub fn product_set(a: &FiniteWindowSet, b: &FiniteWindowSet, out_window: &Ball) -> Result<ProductSet, SetError> {
    let desc = &a.descriptor;
    if *desc != b.descriptor || *desc != out_window.descriptor {
        return Err(SetError::DescriptorMismatch);
    }
    let pairs = a.len() as u128 * b.len() as u128;
    let probes = out_window.len() as u128 * a.len() as u128;
    let mut elements: Vec<GroupElement> = if probes < pairs {
        // g = a·b  <=>  a⁻¹·g ∈ B
        let inv_a: Vec<GroupElement> = a.elements.iter().map(|x| desc.inv(x)).collect();
        out_window
            .iter()
            .filter(|g| inv_a.iter().any(|ai| b.contains(&desc.mul_unchecked(ai, g))))
            .cloned()
            .collect()
    } else {
        let mut v = Vec::new();
        for x in &a.elements {
            for y in &b.elements {
                let g = desc.mul_unchecked(x, y);
                if out_window.contains(&g) {
                    v.push(g);
                }
            }
        }
        v
    };
    elements.sort();
    elements.dedup();
    let exact = a.max_length() + b.max_length() <= out_window.radius as u64;
    Ok(ProductSet {
        set: FiniteWindowSet {
            descriptor: desc.clone(),
            elements,
            window: out_window.clone(),
        },
        exact,
    })
}

/// `A·A⁻¹ ∩ out_window`.
pub fn difference_set(a: &FiniteWindowSet, out_window: &Ball) -> Result<ProductSet, SetError> {
    product_set(a, &a.inverse(), out_window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::enumerate_ball;

    fn ints(ball: &Ball, v: &[i64]) -> FiniteWindowSet {
        FiniteWindowSet::new(ball, v.iter().map(|&n| GroupElement::int(n))).unwrap()
    }

    fn as_ints(s: &FiniteWindowSet) -> Vec<i64> {
        s.elements().iter().map(|g| g.as_int().unwrap()).collect()
    }

    fn words(s: &FiniteWindowSet) -> Vec<String> {
        s.elements().iter().map(|g| g.to_string()).collect()
    }

    #[test]
    fn integer_sumset() {
        let z = GroupDescriptor::integers();
        let w = enumerate_ball(&z, 5).unwrap();
        let p = product_set(&ints(&w, &[0, 2]), &ints(&w, &[0, 1]), &w).unwrap();
        assert_eq!(as_ints(&p.set), [0, 1, 2, 3]);
        assert!(p.exact);
    }

    #[test]
    fn free_product_reduces() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let w = enumerate_ball(&f2, 2).unwrap();
        let a = FiniteWindowSet::parse_lines(&w, "a\n").unwrap();
        let b = FiniteWindowSet::parse_lines(&w, "A\nb\n").unwrap();
        let p = product_set(&a, &b, &w).unwrap();
        assert_eq!(words(&p.set), ["e", "ab"]);
    }

    #[test]
    fn difference_sets() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let w = enumerate_ball(&f2, 2).unwrap();
        let a = FiniteWindowSet::parse_lines(&w, "a\nb").unwrap();
        let d = difference_set(&a, &w).unwrap();
        assert_eq!(words(&d.set), ["e", "aB", "bA"]);

        let z = GroupDescriptor::integers();
        let zw = enumerate_ball(&z, 6).unwrap();
        let d = difference_set(&ints(&zw, &[0, 1, 3]), &zw).unwrap();
        // all 9 ordered differences
        let mut oracle: Vec<i64> = [0, 1, 3].iter().flat_map(|x| [0, 1, 3].iter().map(move |y| x - y)).collect();
        oracle.sort();
        oracle.dedup();
        assert_eq!(as_ints(&d.set), oracle);
        assert_eq!(oracle, [-3, -2, -1, 0, 1, 2, 3]);

        let e = FiniteWindowSet::new(&w, [f2.identity()]).unwrap();
        assert_eq!(words(&difference_set(&e, &w).unwrap().set), ["e"]);
    }

    #[test]
    fn truncation_is_flagged() {
        let z = GroupDescriptor::integers();
        let w = enumerate_ball(&z, 4).unwrap();
        let p = product_set(&ints(&w, &[3]), &ints(&w, &[3]), &w).unwrap();
        assert!(p.set.is_empty());
        assert!(!p.exact);
    }

    #[test]
    fn both_product_strategies_agree() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let big = enumerate_ball(&f2, 4).unwrap();
        let small = enumerate_ball(&f2, 2).unwrap();
        let a = FiniteWindowSet::first_letter(&big, &[1]);
        let b = FiniteWindowSet::first_letter(&big, &[2, -1]);
        // small output window takes the probing route, big takes the pair route
        let via_probe = product_set(&a, &b, &small).unwrap().set;
        let via_pairs = product_set(&a, &b, &big).unwrap().set;
        let filtered: Vec<_> = via_pairs.elements().iter().filter(|g| small.contains(g)).cloned().collect();
        assert_eq!(via_probe.elements(), &filtered[..]);
    }

    #[test]
    fn rejects_bad_input() {
        let z = GroupDescriptor::integers();
        let w = enumerate_ball(&z, 2).unwrap();
        assert!(matches!(FiniteWindowSet::new(&w, [GroupElement::int(9)]), Err(SetError::OutsideWindow(_))));
        let f2 = GroupDescriptor::free(2).unwrap();
        let fw = enumerate_ball(&f2, 1).unwrap();
        let a = FiniteWindowSet::first_letter(&fw, &[1]);
        assert!(matches!(product_set(&ints(&w, &[1]), &a, &w), Err(SetError::DescriptorMismatch)));
    }
}
