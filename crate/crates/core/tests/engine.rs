mod common;

use common::*;
use k3lat::matrix::primitivize_int;
use k3lat::perturb::{step1_fix_norm, step2_fix_disc, step3_find_eta, step4_make_square, Budget};
use k3lat::sampling::random_plane;
use k3lat::{make_property_r, verify_certificate, BigInt, BigRational, Plane, StepKind};
use num_traits::{One, Zero};

fn budget() -> Budget<BigInt> {
    Budget::Epsilon(BigRational::new(BigInt::one(), BigInt::from(400)))
}

/// Each step's postcondition, checked independently on random planes.
#[test]
fn step_local_postconditions() {
    let l = lambda(4);
    for (k, &p) in [23u64, 29, 31].iter().enumerate() {
        let p = prime(p);
        let mut r = rng(100 + k as u64);
        for _ in 0..500 {
            let h = random_plane(&l, 10, &mut r);
            let (h1, _) = step1_fix_norm(&h, p, &budget()).unwrap();
            assert!(!p.divides(&h1.norm1()));
            let (h2, _) = step2_fix_disc(&h1, p, &budget()).unwrap();
            assert!(!p.divides(&h2.disc()));
            let hd = h2.diagonalize().unwrap();
            assert!(hd.same_span(&h2));
            let s3 = step3_find_eta(&hd, p, &budget()).unwrap();
            assert!(!p.divides(&l.norm(&s3.eta).unwrap()));
            let (a, b) = s3.plane.pairings_with(&s3.eta).unwrap();
            assert!(a.is_zero() && b.is_zero());
            assert_eq!(primitivize_int(&s3.eta).unwrap(), s3.eta);
            let (h4, _) = step4_make_square(&s3.plane, &s3.eta, p, &budget()).unwrap();
            assert!(h4.property_r(p).holds);
        }
    }
}

#[test]
fn step3_succeeds_without_exhausting_escalation() {
    for &d in &[4i64, 6] {
        let l = lambda(d);
        for &p in &[23u64, 29, 31] {
            let p = prime(p);
            let mut r = rng(d as u64 * 1000 + p.get());
            for _ in 0..500 {
                let h = random_plane(&l, 10, &mut r);
                let (h1, _) = step1_fix_norm(&h, p, &budget()).unwrap();
                let (h2, _) = step2_fix_disc(&h1, p, &budget()).unwrap();
                let hd = h2.diagonalize().unwrap();
                step3_find_eta(&hd, p, &budget()).unwrap();
            }
        }
    }
}

/// Before primitivization, each perturbed span equals the span of the
/// updated vectors, checked by exact membership both ways.
#[test]
fn perturbed_spans_are_sound() {
    let l = lambda(6);
    let mut r = rng(9);
    for _ in 0..100 {
        let h = random_plane(&l, 10, &mut r);
        let c = make_property_r(&h, 29, &BigRational::new(BigInt::one(), BigInt::from(100))).unwrap();
        let mut cur = h.clone();
        let diag = c.steps.iter().any(|s| s.kind >= StepKind::Step3 && !s.is_identity());
        let mut done = false;
        for s in &c.steps {
            if diag && !done && s.kind >= StepKind::Step3 {
                let d = cur.diagonalize().unwrap();
                assert!(d.same_span(&cur));
                cur = d;
                done = true;
            }
            let next = s.apply(&cur).unwrap();
            if let Some(n) = &s.n {
                let raw: Vec<BigInt> = cur
                    .vector(s.target)
                    .iter()
                    .zip(&s.direction)
                    .map(|(w, d)| n * w + d)
                    .collect();
                let other = match s.target {
                    k3lat::Target::Omega1 => cur.omega2().to_vec(),
                    k3lat::Target::Omega2 => cur.omega1().to_vec(),
                };
                assert!(next.contains(&raw) && next.contains(&other));
                let unscaled = Plane::new(l.clone(), raw, other).unwrap();
                assert!(unscaled.same_span(&next));
            }
            cur = next;
        }
        assert_eq!(cur, c.output);
    }
}

#[test]
fn engine_is_idempotent() {
    let l = lambda(10);
    let mut r = rng(11);
    let eps = BigRational::new(BigInt::one(), BigInt::from(100));
    for _ in 0..100 {
        let h = random_plane(&l, 10, &mut r);
        let c = make_property_r(&h, 31, &eps).unwrap();
        let again = make_property_r(&c.output, 31, &eps).unwrap();
        assert!(again.steps.iter().all(|s| s.is_identity()));
        assert_eq!(again.output, c.output);
    }
}

#[test]
fn shrinking_epsilon_keeps_success() {
    let l = lambda(4);
    let mut r = rng(12);
    for _ in 0..20 {
        let h = random_plane(&l, 10, &mut r);
        let mut last_step1_n: Option<BigInt> = None;
        for k in 1..=3u32 {
            let eps = BigRational::new(BigInt::one(), BigInt::from(10u64.pow(k)));
            let c = make_property_r(&h, 23, &eps).unwrap();
            assert!(verify_certificate(&c).is_valid());
            assert!(c.distance <= eps);
            if let Some(n) = &c.steps[0].n {
                if let Some(prev) = &last_step1_n {
                    assert!(n >= prev);
                }
                last_step1_n = Some(n.clone());
            }
        }
    }
}

#[test]
fn orth_complement_has_rank_19() {
    let l = lambda(4);
    let mut r = rng(13);
    let mut seen = 0;
    while seen < 100 {
        let h = random_plane(&l, 10, &mut r);
        if h.disc().is_zero() {
            continue;
        }
        seen += 1;
        let c = h.orth_complement();
        assert_eq!(c.len(), 19);
        for v in &c {
            let (a, b) = h.pairings_with(v).unwrap();
            assert!(a.is_zero() && b.is_zero());
        }
    }
}
