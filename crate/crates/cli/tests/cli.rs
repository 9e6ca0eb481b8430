use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn qalink(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_qalink")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exited"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let r = qalink(&full);
    let v = serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{e}: {}{}", r.stdout, r.stderr));
    (r.code, v)
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn golden_11n50_report() {
    let (code, mut v) = json(&["obstruct", "--builtin", "11n50"]);
    assert_eq!(code, 0);
    assert!(v["timing"]["elapsed_us"].is_u64());
    v.as_object_mut().unwrap().remove("timing");
    let golden: Value =
        serde_json::from_str(include_str!("golden/obstruct_11n50.json")).expect("golden file parses");
    assert_eq!(v, golden);
}

#[test]
fn text_report_carries_the_caveats() {
    let r = qalink(&["obstruct", "--builtin", "11n50"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("OBSTRUCTED\n"));
    assert!(r.stdout.contains("minor -5"));
    assert!(r.stdout.contains("does not imply quasi-alternating"));
    assert!(r.stdout.contains("mirror of L"));
}

#[test]
fn single_minus_one() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "single_minus1.txt", "# one -1 sphere\nv 0 -1\n");
    let (code, v) = json(&["obstruct", "--graph", &g]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "NOT_OBSTRUCTED");
    assert_eq!(v["budget"]["status"], "stopped_at_admissible");

    let (code, v) = json(&["dinv", "--graph", &g]);
    assert_eq!(code, 0);
    assert_eq!(v["evidence"]["max_d"], "0");
    assert_eq!(v["evidence"]["table"].as_array().unwrap().len(), 1);
}

#[test]
fn pretzel_plumbing_is_silent_for_p223() {
    let (code, v) = json(&["obstruct", "--pretzel", "P(2,2,-3)"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "NOT_OBSTRUCTED");
    assert_eq!(v["inputs"]["normal_form"], "P(2,2,-3)");

    let (code, v) = json(&["obstruct", "--builtin", "pretzel:3,3:2"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "OBSTRUCTED");
}

#[test]
fn budget_exhaustion_is_inconclusive() {
    let (code, v) = json(&["obstruct", "--builtin", "11n50", "--node-limit", "3"]);
    assert_eq!(code, 2);
    assert_eq!(v["verdict"], "INCONCLUSIVE");
    assert_eq!(v["budget"]["status"], "node_limit_reached");

    let (code, v) = json(&["obstruct", "--builtin", "11n50", "--max-ambient-rank", "10"]);
    assert_eq!(code, 2);
    assert_eq!(v["verdict"], "INCONCLUSIVE");
}

#[test]
fn indefinite_graph_is_inconclusive() {
    let (code, v) = json(&["obstruct", "--builtin", "mirror-pretzel:2,2,2:2"]);
    assert_eq!(code, 2);
    assert_eq!(v["evidence"]["reason"], "not definite; see rationality branch");
    assert_eq!(v["evidence"]["rational"], false);
}

/// Brute force over a box of characteristic vectors for a rank 2 form,
/// classes keyed by `adj(Q)ξ mod 2|det Q|`.
fn oracle_d_values(q: [[i64; 2]; 2]) -> Vec<(i64, i64)> {
    let det = q[0][0] * q[1][1] - q[0][1] * q[1][0];
    let adj = [[q[1][1], -q[0][1]], [-q[1][0], q[0][0]]];
    let m = 2 * det.abs();
    let mut best: BTreeMap<(i64, i64), i64> = BTreeMap::new();
    let s = det.signum();
    for a in -9i64..=9 {
        for b in -9i64..=9 {
            if (a - q[0][0]).rem_euclid(2) != 0 || (b - q[1][1]).rem_euclid(2) != 0 {
                continue;
            }
            let y = [adj[0][0] * a + adj[0][1] * b, adj[1][0] * a + adj[1][1] * b];
            let key = (y[0].rem_euclid(m), y[1].rem_euclid(m));
            // ξᵀQ⁻¹ξ · det
            let num = a * y[0] + b * y[1];
            let e = best.entry(key).or_insert(num);
            // maximize num / det
            if num * s > *e * s {
                *e = num;
            }
        }
    }
    let mut out: Vec<(i64, i64)> = best
        .values()
        .map(|&num| {
            // d = (num/det + 2)/4
            let (n, d) = (num + 2 * det, 4 * det);
            let g = gcd(n.abs(), d.abs()).max(1);
            (s * n / g, s * d / g)
        })
        .collect();
    out.sort();
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn a2_chain_table_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "a2_chain.txt", "v 0 -2\nv 1 -2\ne 0 1\n");
    let (code, v) = json(&["dinv", "--graph", &g]);
    assert_eq!(code, 0);
    let mut got: Vec<(i64, i64)> = v["evidence"]["table"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            let s = e["d"].as_str().unwrap();
            match s.split_once('/') {
                Some((n, d)) => (n.parse().unwrap(), d.parse().unwrap()),
                None => (s.parse().unwrap(), 1),
            }
        })
        .collect();
    got.sort();
    assert_eq!(got, oracle_d_values([[-2, 1], [1, -2]]));
    assert_eq!(got, vec![(-1, 6), (-1, 6), (1, 2)]);
}

#[test]
fn dinv_11n50_mirror() {
    let (code, v) = json(&["dinv", "--builtin", "11n50", "--mirror"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "passes");
    assert_eq!(v["evidence"]["max_d"], "8/25");
    assert_eq!(v["evidence"]["table"].as_array().unwrap().len(), 25);
    assert!(v["notes"][0].as_str().unwrap().contains("sharp"));
}

#[test]
fn classify_examples() {
    let (code, v) = json(&["classify", "P(3,-3,3)"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "NOT_QA");

    let (_, v) = json(&["classify", "P(2,2,-3)"]);
    assert_eq!(v["verdict"], "QA");
    assert_eq!(v["evidence"]["case"], "four");

    let (_, v) = json(&["classify", "P(-1; -3,-3)"]);
    assert_eq!(v["verdict"], "QA");
    assert_eq!(v["evidence"]["case"], "two");
    assert_eq!(v["evidence"]["certificate_verified"], true);
    assert_eq!(v["evidence"]["certificate"]["link"]["det"], "3");
}

#[test]
fn certificates_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let cert_s = cert.display().to_string();
    let r = qalink(&["classify", "P(-2; 3, -3,-3,-5)", "--certificate-out", &cert_s]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with("QA\n"));

    let r = qalink(&["certify", &cert_s]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("PASS\n"), "{}", r.stdout);

    let mut tree: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let node = &mut tree["resolution"]["l0"]["link"]["det"];
    let det: i64 = node.as_str().unwrap().parse().unwrap();
    *node = Value::String((det + 1).to_string());
    let bad = write(dir.path(), "bad.json", &tree.to_string());
    let (code, v) = json(&["certify", &bad]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "FAIL");
    assert_eq!(v["evidence"]["failure"]["path"], "root/0");
}

#[test]
fn unknot_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "unknot.json", r#"{"link": {"kind": "unknot", "det": "1"}}"#);
    let (code, v) = json(&["certify", &c]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "PASS");

    let c = write(dir.path(), "two.json", r#"{"link": {"kind": "unknot", "det": "2"}}"#);
    let (_, v) = json(&["certify", &c]);
    assert_eq!(v["verdict"], "FAIL");
    assert_eq!(v["evidence"]["failure"]["path"], "root");
}

#[test]
fn no_certificate_for_cited_cases() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("none.json");
    let (code, v) = json(&["classify", "P(2,2,-3)", "--certificate-out", &cert.display().to_string()]);
    assert_eq!(code, 0);
    assert!(v["evidence"]["certificate"].is_null());
    assert!(!cert.exists());
}

#[test]
fn parse_errors_exit_one_without_a_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "bad.txt", "v 0 -2\nv 1 -2\nq 0 1\n");
    let r = qalink(&["obstruct", "--graph", &g]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.is_empty());
    assert!(r.stderr.contains("line 3"), "{}", r.stderr);

    let g = write(dir.path(), "gap.txt", "v 0 -2\nv 2 -2\n");
    let r = qalink(&["--format", "json", "dinv", "--graph", &g]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.is_empty());
    assert!(r.stderr.contains("line 2"), "{}", r.stderr);

    let c = write(
        dir.path(),
        "cert.json",
        "{\n  \"link\": {\n    \"kind\": \"pretzel\",\n    \"det\": 3\n  }\n}",
    );
    let r = qalink(&["certify", &c]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.is_empty());
    assert!(r.stderr.contains("line"), "{}", r.stderr);

    for args in [
        &["classify", "P(3,-1,3)"][..],
        &["classify", "Q(3,3)"],
        &["obstruct", "--pretzel", "P(3,-3,-3)"],
        &["obstruct", "--builtin", "knot"],
        &["obstruct"],
        &["obstruct", "--builtin", "11n50", "--graph", "x.txt"],
        &["frobnicate"],
        &["certify", "/nonexistent/cert.json"],
    ] {
        let r = qalink(args);
        assert_eq!(r.code, 1, "{args:?}");
        assert!(r.stdout.is_empty(), "{args:?}: {}", r.stdout);
    }
}

#[test]
fn help_exits_zero() {
    let r = qalink(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("obstruct"));
}
