use std::fmt;

use serde::{Deserialize, Serialize};

use super::CircleError;

/// Position of `x` in `[0,1)`.
pub fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Counter-clockwise distance from `from` to `to`, in `[0,1)`.
pub fn ccw(from: f64, to: f64) -> f64 {
    wrap(to - from)
}

/// Closed arc from `start`, running counter-clockwise for `len`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: f64,
    pub len: f64,
}

impl Arc {
    pub fn new(start: f64, len: f64) -> Result<Self, CircleError> {
        if !start.is_finite() || !len.is_finite() || !(0.0..=1.0).contains(&len) {
            return Err(CircleError::InvalidArc(format!("start {start}, length {len}")));
        }
        Ok(Arc { start: wrap(start), len })
    }

    /// The arc `[l, r]`, wrapping through 0 when `r < l`.
    pub fn from_endpoints(l: f64, r: f64) -> Result<Self, CircleError> {
        if !(0.0..=1.0).contains(&l) || !(0.0..=1.0).contains(&r) {
            return Err(CircleError::InvalidArc(format!("endpoints {l}, {r} outside [0,1]")));
        }
        let len = if r >= l { r - l } else { r - l + 1.0 };
        Arc::new(l, len)
    }

    pub fn end(&self) -> f64 {
        wrap(self.start + self.len)
    }

    pub fn is_full(&self) -> bool {
        self.len >= 1.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.is_full() || ccw(self.start, x) <= self.len
    }

    /// Grows the arc by `eps` at both ends.
    pub fn widen(&self, eps: f64) -> Arc {
        if self.len + 2.0 * eps >= 1.0 {
            return Arc { start: 0.0, len: 1.0 };
        }
        Arc {
            start: wrap(self.start - eps),
            len: self.len + 2.0 * eps,
        }
    }

    /// `self` lies in `other` with at least `margin` to spare at both ends.
    pub fn inside(&self, other: &Arc, margin: f64) -> bool {
        if other.is_full() {
            return true;
        }
        if self.is_full() {
            return false;
        }
        let offset = ccw(other.start, self.start);
        offset >= margin && offset + self.len <= other.len - margin
    }
}

/// Where a point sits relative to a closed set, given an ambiguity margin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Inside,
    Outside,
    /// Within the margin of an endpoint.
    Ambiguous,
}

/// Finitely many pairwise disjoint closed arcs, sorted by start.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ArcUnion {
    arcs: Vec<Arc>,
}

impl ArcUnion {
    pub fn empty() -> Self {
        ArcUnion { arcs: Vec::new() }
    }

    pub fn full() -> Self {
        ArcUnion {
            arcs: vec![Arc { start: 0.0, len: 1.0 }],
        }
    }

    /// Union of arbitrary arcs; overlapping or touching arcs are merged.
    pub fn new(arcs: impl IntoIterator<Item = Arc>) -> Self {
        let mut arcs: Vec<Arc> = arcs.into_iter().collect();
        if arcs.iter().any(Arc::is_full) {
            return ArcUnion::full();
        }
        arcs.sort_by(|a, b| a.start.total_cmp(&b.start));
        // sweep on the unrolled line, then fold arcs that run past 1 onto the front
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for a in &arcs {
            let (l, r) = (a.start, a.start + a.len);
            match merged.last_mut() {
                Some(last) if l <= last.1 => last.1 = last.1.max(r),
                _ => merged.push((l, r)),
            }
        }
        while merged.len() > 1 && merged[merged.len() - 1].1 - 1.0 >= merged[0].0 {
            let first = merged.remove(0);
            let last = merged.last_mut().expect("nonempty");
            last.1 = last.1.max(first.1 + 1.0);
        }
        if merged.iter().any(|(l, r)| r - l >= 1.0) {
            return ArcUnion::full();
        }
        let mut out: Vec<Arc> = merged.into_iter().map(|(l, r)| Arc { start: wrap(l), len: r - l }).collect();
        out.sort_by(|a, b| a.start.total_cmp(&b.start));
        ArcUnion { arcs: out }
    }

    /// Reads `l,r` lines; `#` starts a comment.
    pub fn parse_lines(text: &str) -> Result<Self, CircleError> {
        let mut arcs = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (l, r) = line.split_once(',').ok_or_else(|| CircleError::Parse(line.to_string()))?;
            let l: f64 = l.trim().parse().map_err(|_| CircleError::Parse(line.to_string()))?;
            let r: f64 = r.trim().parse().map_err(|_| CircleError::Parse(line.to_string()))?;
            arcs.push(Arc::from_endpoints(l, r)?);
        }
        Ok(ArcUnion::new(arcs))
    }

    pub fn to_lines(&self) -> String {
        self.arcs
            .iter()
            .map(|a| {
                let r = if a.is_full() { 1.0 } else { a.start + a.len };
                format!("{},{}\n", a.start, if r > 1.0 { r - 1.0 } else { r })
            })
            .collect()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.arcs.first().is_some_and(Arc::is_full)
    }

    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|a| a.len).sum()
    }

    /// Closure of the complement: the gaps between consecutive arcs.
    pub fn complement(&self) -> ArcUnion {
        if self.arcs.is_empty() {
            return ArcUnion::full();
        }
        if self.is_full() {
            return ArcUnion::empty();
        }
        let n = self.arcs.len();
        let gaps = (0..n).filter_map(|i| {
            let a = self.arcs[i];
            let b = self.arcs[(i + 1) % n];
            let len = if n == 1 { 1.0 - a.len } else { ccw(a.end(), b.start) };
            (len > 0.0).then_some(Arc { start: a.end(), len })
        });
        ArcUnion::new(gaps.collect::<Vec<_>>())
    }

    pub fn union(&self, other: &ArcUnion) -> ArcUnion {
        ArcUnion::new(self.arcs.iter().chain(&other.arcs).copied().collect::<Vec<_>>())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.arcs.iter().any(|a| a.contains(x))
    }

    /// Membership with an ambiguity band of width `margin` around every endpoint.
    pub fn classify(&self, x: f64, margin: f64) -> Side {
        if self.is_full() {
            return Side::Inside;
        }
        let near = self
            .arcs
            .iter()
            .any(|a| circle_distance(x, a.start) < margin || circle_distance(x, a.end()) < margin);
        if near {
            Side::Ambiguous
        } else if self.contains(x) {
            Side::Inside
        } else {
            Side::Outside
        }
    }

    /// Every arc of `self` lies inside one arc of `other`, `margin` from its ends.
    pub fn inside(&self, other: &ArcUnion, margin: f64) -> bool {
        self.arcs.iter().all(|a| other.arcs.iter().any(|b| a.inside(b, margin)))
    }

    /// `self` and `other` are at least `margin` apart.
    pub fn disjoint(&self, other: &ArcUnion, margin: f64) -> bool {
        self.inside(&other.complement(), margin)
    }
}

impl fmt::Display for ArcUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.arcs.iter().map(|a| format!("[{:.9}, +{:.9}]", a.start, a.len)).collect();
        write!(f, "{{{}}}", parts.join(" "))
    }
}

pub fn circle_distance(x: f64, y: f64) -> f64 {
    let d = ccw(x, y);
    d.min(1.0 - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(l: f64, r: f64) -> Arc {
        Arc::from_endpoints(l, r).unwrap()
    }

    #[test]
    fn merging_and_wrapping() {
        let u = ArcUnion::new([arc(0.1, 0.2), arc(0.15, 0.3), arc(0.9, 0.05)]);
        assert_eq!(u.arcs().len(), 2);
        assert!((u.total_length() - 0.35).abs() < 1e-12);
        assert!(u.contains(0.0) && u.contains(0.25) && !u.contains(0.5));
        // an arc swallowing the wrap-around join
        let v = ArcUnion::new([arc(0.95, 0.02), arc(0.0, 0.1), arc(0.5, 0.6)]);
        assert_eq!(v.arcs().len(), 2);
        assert!((v.total_length() - 0.25).abs() < 1e-12);
        assert!(ArcUnion::new([arc(0.0, 0.6), arc(0.5, 0.1)]).is_full());
        assert!(ArcUnion::new([arc(0.0, 1.0)]).is_full());
    }

    #[test]
    fn complement_round_trip() {
        let u = ArcUnion::new([arc(0.1, 0.2), arc(0.5, 0.55), arc(0.9, 0.95)]);
        let c = u.complement();
        assert!((u.total_length() + c.total_length() - 1.0).abs() < 1e-12);
        let back = c.complement();
        for (a, b) in back.arcs().iter().zip(u.arcs()) {
            assert!((a.start - b.start).abs() < 1e-12 && (a.len - b.len).abs() < 1e-12);
        }
        assert!(ArcUnion::empty().complement().is_full());
        assert!(ArcUnion::full().complement().is_empty());
        let single = ArcUnion::new([arc(0.2, 0.3)]).complement();
        assert!((single.total_length() - 0.9).abs() < 1e-12 && single.contains(0.0));
    }

    #[test]
    fn containment_and_margins() {
        let big = ArcUnion::new([arc(0.9, 0.2)]);
        let small = ArcUnion::new([arc(0.95, 0.05)]);
        assert!(small.inside(&big, 1e-9));
        assert!(!big.inside(&small, 0.0));
        assert!(!ArcUnion::new([arc(0.9, 0.1)]).inside(&big, 1e-9));
        assert!(small.disjoint(&ArcUnion::new([arc(0.3, 0.4)]), 1e-9));
        assert!(!small.disjoint(&big, 1e-9));
        assert_eq!(big.classify(0.0, 1e-9), Side::Inside);
        assert_eq!(big.classify(0.5, 1e-9), Side::Outside);
        assert_eq!(big.classify(0.2 + 1e-10, 1e-9), Side::Ambiguous);
    }

    #[test]
    fn line_format() {
        let u = ArcUnion::parse_lines("# fixture\n0.1,0.2\n0.9,0.05\n").unwrap();
        let again = ArcUnion::parse_lines(&u.to_lines()).unwrap();
        assert_eq!(u, again);
        assert!(ArcUnion::parse_lines("0.1;0.2").is_err());
        assert!(ArcUnion::parse_lines("0.1,1.5").is_err());
    }
}
