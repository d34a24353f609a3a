use serde::{Deserialize, Serialize};

use super::{Arc, ArcUnion, CircleError, CircleSystem};
use crate::group::Word;

/// `a^{-n} b^k a^m` as a reduced word.
pub fn shrink_word(m: i64, k: i64, n: i64) -> Word {
    let a = Word::generator(1);
    let b = Word::generator(2);
    a.pow(-n).mul(&b.pow(k)).mul(&a.pow(m))
}

/// A verified word moving a closed set inside an open one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub word: Word,
    /// Outward enclosure of the image.
    pub image: ArcUnion,
}

/// Re-checks `w·B ⊆ U` letter by letter, independently of the search.
pub fn verify_containment(system: &CircleSystem, w: &Word, b: &ArcUnion, u: &ArcUnion, margin: f64) -> Result<bool, CircleError> {
    Ok(system.act_arcs(w, b)?.inside(u, margin))
}

/// Shortest word `g = a^{-n} b^k a^m` with `g·B ⊆ U` (read as the interior of
/// the closed arcs `U`), length-lex least among the shortest.
///
/// Rotations first move `B` off the repelling point, powers of `b` squeeze it
/// toward the attracting point, and a final rotation carries it into `U`.
/// The exponents are searched jointly, so no ordering of that recipe is
/// assumed.
pub fn shrink_witness(
    system: &CircleSystem,
    b: &ArcUnion,
    u: &ArcUnion,
    budget: u32,
    margin: f64,
) -> Result<Witness, CircleError> {
    if b.is_full() || b.total_length() >= 1.0 {
        return Err(CircleError::Degenerate("B is the whole circle".into()));
    }
    if u.is_empty() || u.arcs().iter().all(|a| a.len <= 2.0 * margin) {
        return Err(CircleError::Degenerate("U is empty".into()));
    }
    let budget_i = budget as i64;
    // images[(m, k)] = b^k a^m B, shared by every outer rotation
    let width = 2 * budget_i + 1;
    let mut images: Vec<Option<Vec<Arc>>> = vec![None; (width * width) as usize];
    let slot = |m: i64, k: i64| ((m + budget_i) * width + (k + budget_i)) as usize;
    for m in -budget_i..=budget_i {
        let rotated: Vec<Arc> = b.arcs().iter().map(|&a| system.rotate_arc(m, a)).collect();
        images[slot(m, 0)] = Some(rotated.clone());
        let room = budget_i - m.abs();
        for dir in [1i64, -1] {
            let mut cur = rotated.clone();
            for step in 1..=room {
                cur = cur.into_iter().map(|a| system.power_arc(dir, a)).collect();
                images[slot(m, dir * step)] = Some(cur.clone());
            }
        }
    }
    let fits = |arcs: &[Arc], n: i64| {
        arcs.iter()
            .all(|&a| u.arcs().iter().any(|target| system.rotate_arc(-n, a).inside(target, margin)))
    };
    for len in 0..=budget_i {
        let mut found: Vec<Word> = Vec::new();
        // pure rotations a^j
        for j in [-len, len] {
            if fits(images[slot(j, 0)].as_ref().expect("filled"), 0) {
                found.push(shrink_word(j, 0, 0));
            }
        }
        for k in (-len..=len).filter(|&k| k != 0) {
            let rest = len - k.abs();
            for m in -rest..=rest {
                let n_abs = rest - m.abs();
                let ns: &[i64] = if n_abs == 0 { &[0] } else { &[n_abs, -n_abs] };
                for &n in ns {
                    if fits(images[slot(m, k)].as_ref().expect("filled"), n) {
                        found.push(shrink_word(m, k, n));
                    }
                }
            }
        }
        found.sort();
        found.dedup();
        for word in found {
            if verify_containment(system, &word, b, u, margin)? {
                let image = system.act_arcs(&word, b)?;
                return Ok(Witness { word, image });
            }
        }
    }
    Err(CircleError::BudgetExhausted { budget })
}

/// A word `g` with `F·A ∩ g·A = ∅`, found by shrinking `A` into the gaps of `F·A`.
pub fn disjointness_witness(
    system: &CircleSystem,
    f: &[Word],
    a: &ArcUnion,
    budget: u32,
    margin: f64,
) -> Result<Witness, CircleError> {
    let fa = system.act_set(f, a)?;
    if fa.is_full() || fa.complement().arcs().iter().all(|g| g.len <= 2.0 * margin) {
        return Err(CircleError::Covers {
            total_length: fa.total_length(),
        });
    }
    let witness = shrink_witness(system, a, &fa.complement(), budget, margin)?;
    // independent check against every translate separately
    let image = system.act_arcs(&witness.word, a)?;
    for w in f {
        assert!(
            image.disjoint(&system.act_arcs(w, a)?, margin),
            "witness {} meets {}·A",
            witness.word,
            w
        );
    }
    Ok(witness)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaRecord {
    pub p: u64,
    pub q: u64,
}

/// Evidence that the finite set `F` does not make `A_x A_x⁻¹` left syndetic:
/// `F·A` and `g·A` are disjoint, so no `f·h⁻¹` with `h ∈ A_x` reaches `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub alpha: AlphaRecord,
    pub lambda: f64,
    pub x_plus: f64,
    pub arcs: ArcUnion,
    #[serde(rename = "F")]
    pub f: Vec<String>,
    pub g: String,
    pub delta: f64,
}

pub fn refute_syndeticity(
    system: &CircleSystem,
    f: &[Word],
    a: &ArcUnion,
    budget: u32,
    margin: f64,
) -> Result<Certificate, CircleError> {
    let witness = disjointness_witness(system, f, a, budget, margin)?;
    Ok(Certificate {
        alpha: AlphaRecord {
            p: system.alpha_p,
            q: system.alpha_q,
        },
        lambda: system.lambda,
        x_plus: system.x_plus,
        arcs: a.clone(),
        f: f.iter().map(|w| w.to_string()).collect(),
        g: witness.word.to_string(),
        delta: margin,
    })
}

/// Recomputes every image in a certificate from scratch.
pub fn verify_certificate(cert: &Certificate) -> Result<bool, CircleError> {
    let system = CircleSystem::new(cert.alpha.p, cert.alpha.q, cert.lambda, cert.x_plus)?;
    let parse = |s: &str| s.parse::<Word>().map_err(|_| CircleError::Parse(s.to_string()));
    let g = parse(&cert.g)?;
    let image = system.act_arcs(&g, &cert.arcs)?;
    for s in &cert.f {
        if !image.disjoint(&system.act_arcs(&parse(s)?, &cert.arcs)?, cert.delta) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::super::{standard_fixture, DELTA};
    use super::*;
    use crate::group::{enumerate_ball, GroupDescriptor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn arcs(v: &[(f64, f64)]) -> ArcUnion {
        ArcUnion::new(v.iter().map(|&(l, r)| Arc::from_endpoints(l, r).unwrap()))
    }

    fn ball_words(r: u32) -> Vec<Word> {
        enumerate_ball(&GroupDescriptor::free(2).unwrap(), r)
            .unwrap()
            .iter()
            .map(|g| g.as_word().unwrap().clone())
            .collect()
    }

    #[test]
    fn trivial_witness() {
        let s = CircleSystem::default();
        let w = shrink_witness(&s, &arcs(&[(0.2, 0.3)]), &arcs(&[(0.1, 0.4)]), 10, DELTA).unwrap();
        assert_eq!(w.word, Word::identity());
    }

    #[test]
    fn contraction_witness_is_a_power_of_b() {
        let s = CircleSystem::default();
        let b = arcs(&[(0.4, 0.45)]);
        let u = arcs(&[(0.99, 0.01)]);
        let w = shrink_witness(&s, &b, &u, 40, DELTA).unwrap();
        let k = s.contraction_steps(&b, &u, 40, DELTA).unwrap();
        // some shorter word might exist, never a longer one
        assert!(w.word.len() <= k as usize);
        assert!(verify_containment(&s, &w.word, &b, &u, DELTA).unwrap());
        let pure = shrink_word(0, k as i64, 0);
        assert!(verify_containment(&s, &pure, &b, &u, DELTA).unwrap());
    }

    #[test]
    fn degenerate_inputs() {
        let s = CircleSystem::default();
        assert!(matches!(
            shrink_witness(&s, &ArcUnion::full(), &arcs(&[(0.1, 0.2)]), 5, DELTA),
            Err(CircleError::Degenerate(_))
        ));
        assert!(matches!(
            shrink_witness(&s, &arcs(&[(0.1, 0.2)]), &ArcUnion::empty(), 5, DELTA),
            Err(CircleError::Degenerate(_))
        ));
        // tiny target and budget too short to reach it
        assert!(matches!(
            shrink_witness(&s, &arcs(&[(0.3, 0.45)]), &arcs(&[(0.7, 0.7001)]), 2, DELTA),
            Err(CircleError::BudgetExhausted { budget: 2 })
        ));
    }

    #[test]
    fn seeded_generic_arcs() {
        let s = CircleSystem::default();
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let mut found = 0;
        for _ in 0..100 {
            let bl: f64 = rng.gen();
            let b = ArcUnion::new([Arc::new(bl, rng.gen_range(0.01..0.3)).unwrap()]);
            let ul: f64 = rng.gen();
            let u = ArcUnion::new([Arc::new(ul, rng.gen_range(0.02..0.2)).unwrap()]);
            if let Ok(w) = shrink_witness(&s, &b, &u, 40, DELTA) {
                assert!(w.word.len() <= 40);
                assert!(verify_containment(&s, &w.word, &b, &u, DELTA).unwrap());
                found += 1;
            }
        }
        assert!(found >= 95, "{found}");
    }

    #[test]
    fn small_arc_separation() {
        let s = CircleSystem::default();
        let a = arcs(&[(0.1, 0.11)]);
        let w = disjointness_witness(&s, &[Word::identity()], &a, 10, DELTA).unwrap();
        assert_eq!(w.word, "a".parse::<Word>().unwrap());
    }

    #[test]
    fn fixture_certificates() {
        let s = CircleSystem::default();
        let a = standard_fixture();
        let w1 = disjointness_witness(&s, &ball_words(1), &a, 60, DELTA).unwrap();
        assert!(w1.word.len() <= 60);
        let cert = refute_syndeticity(&s, &ball_words(2), &a, 60, DELTA).unwrap();
        assert!(verify_certificate(&cert).unwrap());
        let json = serde_json::to_value(&cert).unwrap();
        for key in ["alpha", "lambda", "arcs", "F", "g", "delta"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert_eq!(json["alpha"]["q"], 1_346_269);
        let back: Certificate = serde_json::from_value(json).unwrap();
        assert_eq!(back, cert);
        // tampering with g breaks verification
        let mut bad = cert.clone();
        bad.g = "e".into();
        assert!(!verify_certificate(&bad).unwrap());
    }

    #[test]
    fn covering_sets_fail_honestly() {
        let s = CircleSystem::default();
        // half the circle and its rotate cover everything once widened
        let a = arcs(&[(0.0, 0.5)]);
        let f = [Word::identity(), "b".parse().unwrap(), "a".parse().unwrap(), "A".parse().unwrap()];
        let err = refute_syndeticity(&s, &f, &a, 10, DELTA).unwrap_err();
        assert!(matches!(err, CircleError::Covers { .. }), "{err}");
        assert!(refute_syndeticity(&s, &[Word::identity()], &arcs(&[(0.2, 0.25)]), 10, DELTA).is_ok());
    }
}
