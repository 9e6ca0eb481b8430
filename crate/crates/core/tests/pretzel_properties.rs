use num_bigint::BigInt;
use num_traits::{One, Signed};
use proptest::prelude::*;
use qalink_core::exact_linalg::det;
use qalink_core::plumbing::{gram_matrix, pretzel_plumbing};
use qalink_core::pretzel::{
    build_certificate, classify, classify_single_negative, determinant, determinant_of, mirror, resolve,
    verify_certificate, Case, PretzelSpec, QACertificate, Verdict,
};

fn lists(values: &[u64], lengths: std::ops::RangeInclusive<usize>) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for len in lengths {
        let mut cur = vec![0usize; len];
        loop {
            let l: Vec<u64> = cur.iter().map(|&i| values[i]).collect();
            if l.windows(2).all(|w| w[0] <= w[1]) {
                out.push(l);
            }
            let mut i = 0;
            while i < len {
                cur[i] += 1;
                if cur[i] < values.len() {
                    break;
                }
                cur[i] = 0;
                i += 1;
            }
            if i == len {
                break;
            }
        }
    }
    out
}

/// `e = m - 1 ∈ {1, 2}`, `p ⊂ {2,3}` with at most two entries, `q ⊂ {3,4}`.
fn case_two_grid() -> Vec<PretzelSpec> {
    let mut out = Vec::new();
    for p in lists(&[2, 3], 0..=2) {
        for q in lists(&[3, 4], 1..=3) {
            let m = q.len() as u64;
            if (1..=2).contains(&(m - 1)) {
                out.push(PretzelSpec::new(m - 1, p.clone(), q).unwrap());
            }
        }
    }
    out
}

#[test]
fn determinant_additivity() {
    let grid = case_two_grid();
    assert!(grid.len() >= 20, "grid has {} specs", grid.len());
    for s in grid {
        let j = s.m() - 1;
        let (l0, l1) = resolve(&s, j).unwrap();
        let (d, d0, d1) = (determinant(&s), determinant(&l0), determinant(&l1));
        assert!(d.is_positive() && d0.is_positive() && d1.is_positive(), "{s}");
        assert_eq!(d, &d0 + &d1, "{s}");
        // the rewritten L1 has the same formula value as the unrewritten one
        let mut q1 = s.q().to_vec();
        q1[j] -= 1;
        assert_eq!(d1, determinant_of(s.e(), s.p(), &q1));
        let mut q0 = s.q().to_vec();
        q0.remove(j);
        assert_eq!(d0, determinant_of(s.e(), s.p(), &q0));
    }
}

fn mutants(c: &QACertificate) -> Vec<(String, QACertificate)> {
    c.nodes()
        .into_iter()
        .map(|(path, _)| {
            let mut m = c.clone();
            m.node_mut(&path).unwrap().link.det += 1;
            (path, m)
        })
        .collect()
}

#[test]
fn certificate_round_trip_and_mutations() {
    for s in case_two_grid() {
        let c = build_certificate(&s).unwrap();
        assert!(verify_certificate(&c).passed(), "{s}: {:?}", verify_certificate(&c).failure);
        assert!(c.internal_nodes() >= 1);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<QACertificate>(&text).unwrap(), c);
        for (path, m) in mutants(&c) {
            let v = verify_certificate(&m);
            assert!(!v.passed(), "{s}: mutation at {path} accepted");
        }
        let classification = classify(&s);
        assert_eq!((classification.verdict, classification.case), (Verdict::Qa, Case::Two));
        assert_eq!(classification.certificate.as_ref(), Some(&c));
    }
}

#[test]
fn single_negative_tassle_grid() {
    for n in 2..=3 {
        for p in lists(&[2, 3, 4, 5], n..=n) {
            for q in 3..=7 {
                let c = classify(&PretzelSpec::new(0, p.clone(), vec![q]).unwrap());
                assert_eq!(c.case, Case::Four);
                assert_eq!(c.is_qa(), q > p[0], "p = {p:?}, q = {q}");
            }
            for q in 1..=7 {
                assert_eq!(classify_single_negative(&p, q).unwrap().is_qa(), q > p[0]);
            }
        }
    }
}

#[test]
fn plumbing_lattice_has_the_formula_determinant() {
    for n in 2..=3 {
        for p in lists(&[2, 3, 4, 5], n..=n) {
            for q in 1..=7 {
                let formula = determinant_of(0, &p, &[q]);
                if !formula.is_positive() {
                    continue;
                }
                let g = pretzel_plumbing(&p, q).unwrap();
                let lattice = det(gram_matrix(&g).matrix()).unwrap();
                assert_eq!(lattice.abs(), formula, "p = {p:?}, q = {q}");
            }
        }
    }
}

/// The four clauses transcribed literally.
fn clauses(s: &PretzelSpec) -> bool {
    let (e, n, m) = (s.e() as i64, s.n(), s.m() as i64);
    let min_q = s.q().iter().min().copied();
    let min_p = s.p().iter().min().copied();
    e > m - 1
        || (e == m - 1 && e > 0)
        || (e == 0 && n == 1 && (min_q.is_none_or(|mq| s.p()[0] > mq) || m <= 1))
        || (e == 0 && m == 1 && (min_p.is_none_or(|mp| s.q()[0] > mp) || n <= 1))
}

fn spec_strategy() -> impl Strategy<Value = PretzelSpec> {
    (0u64..=4, prop::collection::vec(2u64..=6, 0..=4), prop::collection::vec(3u64..=7, 0..=4))
        .prop_map(|(e, p, q)| PretzelSpec::new(e, p, q).unwrap())
}

proptest! {
    #[test]
    fn classify_follows_the_clauses(s in spec_strategy()) {
        let c = classify(&s);
        if c.case == Case::AllNegative || c.case == Case::Degenerate {
            prop_assert!(s.e() == 0 && s.n() == 0);
            prop_assert!(c.is_qa());
        } else {
            prop_assert_eq!(c.is_qa(), clauses(&s), "{} {:?}", s, c.case);
        }
    }

    #[test]
    fn certificates_verify_when_present(s in spec_strategy()) {
        let c = classify(&s);
        match (&c.certificate, c.case) {
            (Some(cert), _) => {
                prop_assert!(c.is_qa());
                prop_assert!(verify_certificate(cert).passed());
                prop_assert_eq!(&cert.link.det, &determinant(&s));
            }
            (None, Case::One | Case::Two) => prop_assert!(!determinant(&s).is_positive() || s.e() == 0 && s.n() + s.m() == 0),
            (None, _) => prop_assert!(build_certificate(&s).is_err()),
        }
    }

    #[test]
    fn double_mirror_classifies_the_same(s in spec_strategy()) {
        if let Ok(m) = mirror(&s) {
            let back = mirror(&m).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(classify(&back), classify(&s));
        }
    }
}

#[test]
fn unknot_only_certificate() {
    let c = build_certificate(&PretzelSpec::new(1, vec![], vec![]).unwrap()).unwrap();
    assert!(c.link.det.is_one());
    assert!(verify_certificate(&c).passed());
    assert_eq!(c.link.det, BigInt::one());
}
