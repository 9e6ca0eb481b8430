use std::time::Instant;

use qalink_core::embedder::SearchBudget;
use qalink_core::exact_linalg::is_negative_definite;
use qalink_core::obstruction::{qa_obstruction, ObstructionStatus};
use qalink_core::plumbing::{gram_matrix, pretzel_plumbing, seifert_negdef_criterion};

fn grid() -> Vec<(Vec<u64>, u64)> {
    let mut out = Vec::new();
    for n in 2..=3u32 {
        for code in 0..3u64.pow(n) {
            let p: Vec<u64> = (0..n).map(|i| 2 + code / 3u64.pow(i) % 3).collect();
            if p.windows(2).any(|w| w[0] > w[1]) {
                continue;
            }
            for q in 1..=6 {
                out.push((p.clone(), q));
            }
        }
    }
    out
}

#[test]
fn obstruction_matches_q_against_min_p() {
    let start = Instant::now();
    let mut definite = 0;
    for (p, q) in grid() {
        let g = pretzel_plumbing(&p, q).unwrap();
        let neg_def = is_negative_definite(&gram_matrix(&g));
        assert_eq!(neg_def, seifert_negdef_criterion(&p, q));
        if !neg_def {
            continue;
        }
        definite += 1;
        let t = Instant::now();
        let v = qa_obstruction(&g, &SearchBudget::default());
        let min_p = *p.iter().min().unwrap();
        let expected =
            if q <= min_p { ObstructionStatus::Obstructed } else { ObstructionStatus::NotObstructed };
        eprintln!(
            "{p:?} q={q}: {} classes={} nodes={} {:?}",
            v.status,
            v.classes.len(),
            v.nodes,
            t.elapsed()
        );
        assert_eq!(v.status, expected, "p = {p:?}, q = {q}: {}", v.reason);
    }
    eprintln!("{definite} definite cases in {:?}", start.elapsed());
    assert!(definite > 0);
}
