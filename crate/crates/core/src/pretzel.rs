//! Pretzel links `P(-e; p₁, …, pₙ, -q₁, …, -q_m)` with `e ≥ 0`, `pᵢ ≥ 2`,
//! `qⱼ ≥ 3`: determinants, quasi-alternating classification, and resolution
//! certificates with exact determinant bookkeeping.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PretzelError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("entry {0} is a single half-twist; reduce the diagram first")]
    UnitEntry(i64),
    #[error("entry 0 is not a tassle")]
    ZeroEntry,
    #[error("no normal form with e >= 0 with or without mirroring")]
    NoNormalForm,
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("no constructive certificate path: {0}")]
    NoCertificate(String),
}

/// Normalized parameters; `p` and `q` are kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct PretzelSpec {
    e: u64,
    p: Vec<u64>,
    q: Vec<u64>,
}

#[derive(Deserialize)]
struct RawSpec {
    e: u64,
    p: Vec<u64>,
    q: Vec<u64>,
}

impl TryFrom<RawSpec> for PretzelSpec {
    type Error = PretzelError;
    fn try_from(r: RawSpec) -> Result<Self, Self::Error> {
        PretzelSpec::new(r.e, r.p, r.q)
    }
}

impl PretzelSpec {
    pub fn new(e: u64, mut p: Vec<u64>, mut q: Vec<u64>) -> Result<Self, PretzelError> {
        if let Some(x) = p.iter().find(|&&x| x < 2) {
            return Err(PretzelError::Parameters(format!("positive tassle {x} < 2")));
        }
        if let Some(x) = q.iter().find(|&&x| x < 3) {
            return Err(PretzelError::Parameters(format!(
                "negative tassle -{x} has fewer than 3 half-twists"
            )));
        }
        p.sort_unstable();
        q.sort_unstable();
        Ok(PretzelSpec { e, p, q })
    }

    pub fn e(&self) -> u64 {
        self.e
    }

    pub fn p(&self) -> &[u64] {
        &self.p
    }

    pub fn q(&self) -> &[u64] {
        &self.q
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn m(&self) -> usize {
        self.q.len()
    }

    /// `M(e - m; (p₁,1), …, (qⱼ,qⱼ-1), …)`, the alternating description when `e ≥ m`.
    pub fn montesinos(&self) -> String {
        let mut parts: Vec<String> = self.p.iter().map(|p| format!("({p},1)")).collect();
        parts.extend(self.q.iter().map(|q| format!("({q},{})", q - 1)));
        format!("M({}; {})", self.e as i128 - self.m() as i128, parts.join(", "))
    }

    /// Mirror as a signed tassle list with its leading twist count.
    fn mirrored_raw(&self) -> (i64, Vec<i64>) {
        let mut raw: Vec<i64> = self.p.iter().map(|&p| -(p as i64)).collect();
        raw.extend(self.q.iter().map(|&q| q as i64));
        (self.e as i64, raw)
    }
}

impl fmt::Display for PretzelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut entries: Vec<String> = self.p.iter().map(|p| p.to_string()).collect();
        entries.extend(self.q.iter().map(|q| format!("-{q}")));
        if self.e == 0 {
            write!(f, "P({})", entries.join(","))
        } else {
            write!(f, "P(-{}; {})", self.e, entries.join(","))
        }
    }
}

/// A normalized spec, and whether the mirror was taken to reach it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub spec: PretzelSpec,
    pub mirrored: bool,
}

/// Brings a signed tassle list with leading twist count `lead` (so `e = -lead`)
/// into normal form. Entries `-2` are traded for a `+2` tassle and one fewer
/// twist; if `e` would end up negative the mirror is used instead.
pub fn normalize(raw: &[i64], lead: Option<i64>) -> Result<Normalized, PretzelError> {
    if let Some(&x) = raw.iter().find(|&&x| x.abs() == 1) {
        return Err(PretzelError::UnitEntry(x));
    }
    if raw.contains(&0) {
        return Err(PretzelError::ZeroEntry);
    }
    let lead = lead.unwrap_or(0);
    let attempt = |lead: i64, raw: &mut dyn Iterator<Item = i64>| -> Option<PretzelSpec> {
        let mut e = -(lead as i128);
        let (mut p, mut q) = (Vec::new(), Vec::new());
        for x in raw {
            match x {
                -2 => {
                    e -= 1;
                    p.push(2);
                }
                x if x > 0 => p.push(x as u64),
                x => q.push(x.unsigned_abs()),
            }
        }
        let e = u64::try_from(e).ok()?;
        PretzelSpec::new(e, p, q).ok()
    };
    if let Some(spec) = attempt(lead, &mut raw.iter().copied()) {
        return Ok(Normalized { spec, mirrored: false });
    }
    if let Some(spec) = attempt(-lead, &mut raw.iter().map(|x| -x)) {
        return Ok(Normalized { spec, mirrored: true });
    }
    Err(PretzelError::NoNormalForm)
}

/// Parses `P(a₁,…,a_k)` or `P(L; a₁,…,a_k)` into a raw list and leading count.
pub fn parse_raw(text: &str) -> Result<(Option<i64>, Vec<i64>), PretzelError> {
    let t = text.trim();
    let inner = t
        .strip_prefix('P')
        .or_else(|| t.strip_prefix('p'))
        .map(str::trim_start)
        .and_then(|s| s.strip_prefix('('))
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| PretzelError::Syntax(format!("expected P(...), got {t:?}")))?;
    let int = |s: &str| {
        s.trim().parse::<i64>().map_err(|_| PretzelError::Syntax(format!("not an integer: {:?}", s.trim())))
    };
    let (lead, list) = match inner.split_once(';') {
        Some((l, rest)) => (Some(int(l)?), rest),
        None => (None, inner),
    };
    let entries = if list.trim().is_empty() {
        Vec::new()
    } else {
        list.split(',').map(int).collect::<Result<Vec<_>, _>>()?
    };
    Ok((lead, entries))
}

impl FromStr for Normalized {
    type Err = PretzelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lead, raw) = parse_raw(s)?;
        normalize(&raw, lead)
    }
}

/// `p₁⋯pₙ q₁⋯q_m (e + Σ 1/pᵢ - Σ 1/qⱼ)`, for any positive parameters.
pub fn determinant_of(e: u64, p: &[u64], q: &[u64]) -> BigInt {
    let prod: BigInt = p.iter().chain(q).map(|&x| BigInt::from(x)).product();
    let mut sum = Rational::from_integer(BigInt::from(e));
    for &x in p {
        sum += Rational::new(BigInt::one(), BigInt::from(x));
    }
    for &x in q {
        sum -= Rational::new(BigInt::one(), BigInt::from(x));
    }
    let value = sum * Rational::from_integer(prod);
    assert!(value.is_integer(), "determinant formula is integral");
    value.to_integer()
}

/// The formula value; it can be zero or negative (e.g. all tassles negative),
/// and is returned as is.
pub fn determinant(s: &PretzelSpec) -> BigInt {
    determinant_of(s.e, &s.p, &s.q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Qa,
    NotQa,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Qa => "QA",
            Verdict::NotQa => "NOT_QA",
        })
    }
}

/// Which clause decided a classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// No tassles and no twists.
    Degenerate,
    /// `e > m - 1`: connected alternating diagram.
    One,
    /// `e = m - 1 > 0`: resolution induction.
    Two,
    /// `e = 0, n = 1`.
    Three,
    /// `e = 0, m = 1`.
    Four,
    /// `e = 0, n = 0, m ≥ 2`: every tassle negative, so the diagram is alternating.
    AllNegative,
    /// `e < m - 1, e + n ≥ 2`: adequate non-alternating diagram.
    Adequate,
    /// `e = 1, n = 0, m ≥ 3`: the single-negative-tassle criterion on the mirror.
    MirrorCriterion,
}

impl Case {
    pub fn tag(self) -> &'static str {
        match self {
            Case::Degenerate => "degenerate",
            Case::One => "case (1): e > m - 1, alternating",
            Case::Two => "case (2): e = m - 1 > 0",
            Case::Three => "case (3): e = 0, n = 1",
            Case::Four => "case (4): e = 0, m = 1",
            Case::AllNegative => "alternating: all tassles negative",
            Case::Adequate => "cited: adequate diagram, Kh-thick",
            Case::MirrorCriterion => "e = 1, n = 0: mirror is P(q1,...,qm,-2), and 2 <= min q",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub case: Case,
    pub note: String,
    #[serde(with = "bigint_string")]
    pub determinant: BigInt,
    pub certificate: Option<QACertificate>,
}

/// `P(p₁, …, pₙ, -q)` for `n ≥ 2`, `pᵢ ≥ 2`, `q ≥ 1`: QA iff `q > min pᵢ`.
pub fn single_negative_tassle_verdict(p: &[u64], q: u64) -> Result<Verdict, PretzelError> {
    if p.len() < 2 || p.iter().any(|&x| x < 2) || q < 1 {
        return Err(PretzelError::Parameters("need n >= 2, every p >= 2 and q >= 1".into()));
    }
    let min = *p.iter().min().expect("n >= 2");
    Ok(if q > min { Verdict::Qa } else { Verdict::NotQa })
}

/// Classifies `P(p₁, …, pₙ, -q)` for any `q ≥ 1`: through [`classify`] when
/// `q ≥ 3`, otherwise by the single-negative-tassle criterion directly.
pub fn classify_single_negative(p: &[u64], q: u64) -> Result<Classification, PretzelError> {
    let verdict = single_negative_tassle_verdict(p, q)?;
    if q >= 3 {
        return Ok(classify(&PretzelSpec::new(0, p.to_vec(), vec![q])?));
    }
    Ok(Classification {
        verdict,
        case: Case::Four,
        note: format!("q = {q} is below the normal form; decided by q > min p"),
        determinant: determinant_of(0, p, &[q]),
        certificate: None,
    })
}

pub fn classify(s: &PretzelSpec) -> Classification {
    let (e, n, m) = (s.e, s.n(), s.m() as u64);
    let det = determinant(s);
    let cited = "converse cited, no certificate";
    let (verdict, case, note) = if n == 0 && m == 0 && e == 0 {
        (Verdict::Qa, Case::Degenerate, "no tassles; determinant 0 is a convention".to_string())
    } else if e >= m {
        (Verdict::Qa, Case::One, format!("alternating diagram {}", s.montesinos()))
    } else if e + 1 == m && e > 0 {
        (Verdict::Qa, Case::Two, "resolve in the largest negative tassle".to_string())
    } else if e == 0 && m == 1 {
        let q1 = s.q[0];
        if n <= 1 {
            (Verdict::Qa, Case::Four, format!("n <= 1, two-bridge; {cited}"))
        } else if q1 > s.p[0] {
            (Verdict::Qa, Case::Four, format!("q1 = {q1} > min p = {}; {cited}", s.p[0]))
        } else {
            (Verdict::NotQa, Case::Four, format!("q1 = {q1} <= min p = {}", s.p[0]))
        }
    } else if e == 0 && n == 1 {
        let p1 = s.p[0];
        if p1 > s.q[0] {
            (Verdict::Qa, Case::Three, format!("p1 = {p1} > min q = {}; {cited}", s.q[0]))
        } else {
            (
                Verdict::NotQa,
                Case::Three,
                format!("p1 = {p1} <= min q = {}; criterion applied to the mirror", s.q[0]),
            )
        }
    } else if e == 0 && n == 0 {
        (
            Verdict::Qa,
            Case::AllNegative,
            "mirror of a positive pretzel; formula determinant is negated".to_string(),
        )
    } else if e + n as u64 >= 2 {
        (Verdict::NotQa, Case::Adequate, "adequate non-alternating diagram; Khovanov-thick".to_string())
    } else {
        (Verdict::NotQa, Case::MirrorCriterion, String::new())
    };
    let certificate = match case {
        Case::One | Case::Two => build_certificate(s).ok(),
        _ => None,
    };
    let note = if det.is_positive() || case == Case::Degenerate {
        note
    } else {
        format!("{note}; formula determinant {det} is not positive")
    };
    Classification { verdict, case, note, determinant: det, certificate }
}

mod bigint_string {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Descriptor {
    Unknot,
    /// A pretzel whose QA status is taken from a cited clause when it is a leaf.
    Pretzel {
        spec: PretzelSpec,
    },
    AlternatingForm {
        spec: PretzelSpec,
        montesinos: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkNode {
    #[serde(flatten)]
    pub descriptor: Descriptor,
    #[serde(with = "bigint_string")]
    pub det: BigInt,
}

/// The crossing resolved: one from the negative tassle at `tassle` (index into
/// the sorted `q`), which has `half_twists = -q` twists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub tassle: usize,
    pub half_twists: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub crossing: Crossing,
    pub l0: Box<QACertificate>,
    pub l1: Box<QACertificate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QACertificate {
    pub link: LinkNode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<Resolution>,
}

impl QACertificate {
    pub fn leaf(descriptor: Descriptor, det: BigInt) -> Self {
        QACertificate { link: LinkNode { descriptor, det }, resolution: None }
    }

    pub fn internal_nodes(&self) -> usize {
        self.resolution.as_ref().map_or(0, |r| 1 + r.l0.internal_nodes() + r.l1.internal_nodes())
    }

    /// Every node, with its path from the root (`root`, `root/0`, …).
    pub fn nodes(&self) -> Vec<(String, &QACertificate)> {
        let mut out = Vec::new();
        fn walk<'a>(c: &'a QACertificate, path: String, out: &mut Vec<(String, &'a QACertificate)>) {
            out.push((path.clone(), c));
            if let Some(r) = &c.resolution {
                walk(&r.l0, format!("{path}/0"), out);
                walk(&r.l1, format!("{path}/1"), out);
            }
        }
        walk(self, "root".into(), &mut out);
        out
    }

    /// Mutable access by path as produced by [`QACertificate::nodes`].
    pub fn node_mut(&mut self, path: &str) -> Option<&mut QACertificate> {
        let mut parts = path.split('/');
        if parts.next() != Some("root") {
            return None;
        }
        let mut cur = self;
        for part in parts {
            let r = cur.resolution.as_mut()?;
            cur = match part {
                "0" => &mut r.l0,
                "1" => &mut r.l1,
                _ => return None,
            };
        }
        Some(cur)
    }
}

/// The resolutions of the crossing in negative tassle `j`: `L₀` drops the
/// tassle, `L₁` loses one half-twist; a tassle left with two half-twists
/// becomes a `+2` tassle and one fewer twist.
pub fn resolve(s: &PretzelSpec, j: usize) -> Result<(PretzelSpec, PretzelSpec), PretzelError> {
    let qj = *s.q.get(j).ok_or_else(|| PretzelError::Parameters(format!("no negative tassle {j}")))?;
    let mut rest = s.q.clone();
    rest.remove(j);
    let l0 = PretzelSpec::new(s.e, s.p.clone(), rest.clone())?;
    let l1 = if qj > 3 {
        let mut q = rest;
        q.push(qj - 1);
        PretzelSpec::new(s.e, s.p.clone(), q)?
    } else if s.e > 0 {
        let mut p = s.p.clone();
        p.push(2);
        PretzelSpec::new(s.e - 1, p, rest)?
    } else {
        return Err(PretzelError::Parameters("a -2 tassle with e = 0 leaves the normal form".into()));
    };
    Ok((l0, l1))
}

fn is_unknot(s: &PretzelSpec) -> bool {
    s.e == 1 && s.p.is_empty() && s.q.is_empty()
}

fn node_for(s: &PretzelSpec) -> Result<QACertificate, PretzelError> {
    let det = determinant(s);
    if is_unknot(s) {
        return Ok(QACertificate::leaf(Descriptor::Unknot, det));
    }
    if !det.is_positive() {
        return Err(PretzelError::NoCertificate(format!("{s} has formula determinant {det}")));
    }
    let m = s.m() as u64;
    if s.e >= m {
        let descriptor = Descriptor::AlternatingForm { spec: s.clone(), montesinos: s.montesinos() };
        return Ok(QACertificate::leaf(descriptor, det));
    }
    if s.e + 1 == m && s.e > 0 {
        let j = s.m() - 1;
        let (l0, l1) = resolve(s, j)?;
        let resolution = Resolution {
            crossing: Crossing { tassle: j, half_twists: -(s.q[j] as i64) },
            l0: Box::new(node_for(&l0)?),
            l1: Box::new(node_for(&l1)?),
        };
        return Ok(QACertificate {
            link: LinkNode { descriptor: Descriptor::Pretzel { spec: s.clone() }, det },
            resolution: Some(resolution),
        });
    }
    match classify(s) {
        c if c.verdict == Verdict::Qa && matches!(c.case, Case::Three | Case::Four) => {
            Ok(QACertificate::leaf(Descriptor::Pretzel { spec: s.clone() }, det))
        }
        _ => Err(PretzelError::NoCertificate(format!("{s} is not reached by the resolution induction"))),
    }
}

/// Certificate for `e ≥ m` (a single alternating leaf) or `e = m - 1 > 0`
/// (resolution in the largest negative tassle, recursively).
pub fn build_certificate(s: &PretzelSpec) -> Result<QACertificate, PretzelError> {
    let m = s.m() as u64;
    if !(s.e >= m || (s.e + 1 == m && s.e > 0)) {
        return Err(PretzelError::NoCertificate(format!("{s} needs e >= m - 1 > 0 or e >= m")));
    }
    node_for(s)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    /// Path and reason of the first failing node.
    pub failure: Option<(String, String)>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

fn spec_of(d: &Descriptor) -> Option<&PretzelSpec> {
    match d {
        Descriptor::Unknot => None,
        Descriptor::Pretzel { spec } | Descriptor::AlternatingForm { spec, .. } => Some(spec),
    }
}

fn describes(d: &Descriptor, s: &PretzelSpec) -> bool {
    match spec_of(d) {
        Some(t) => t == s,
        None => is_unknot(s),
    }
}

fn check_node(c: &QACertificate) -> Result<(), String> {
    let det = &c.link.det;
    if !det.is_positive() {
        return Err(format!("determinant {det} is not positive"));
    }
    if let Some(s) = spec_of(&c.link.descriptor) {
        let expected = determinant(s);
        if &expected != det {
            return Err(format!("stored determinant {det}, formula gives {expected}"));
        }
    }
    match (&c.link.descriptor, &c.resolution) {
        (Descriptor::Unknot, None) => {
            if !det.is_one() {
                return Err(format!("unknot with determinant {det}"));
            }
        }
        (Descriptor::AlternatingForm { spec, montesinos }, None) => {
            if spec.e < spec.m() as u64 {
                return Err(format!("{spec} has e < m and is not in alternating form"));
            }
            if *montesinos != spec.montesinos() {
                return Err(format!("description {montesinos} does not match {spec}"));
            }
        }
        (Descriptor::Pretzel { spec }, None) => {
            let c = classify(spec);
            if !(c.verdict == Verdict::Qa && matches!(c.case, Case::Three | Case::Four)) {
                return Err(format!("{spec} is not a cited quasi-alternating pretzel"));
            }
        }
        (Descriptor::Pretzel { spec }, Some(r)) => {
            let (l0, l1) = resolve(spec, r.crossing.tassle).map_err(|e| e.to_string())?;
            if r.crossing.half_twists != -(spec.q[r.crossing.tassle] as i64) {
                return Err("crossing twist count does not match its tassle".into());
            }
            if !describes(&r.l0.link.descriptor, &l0) {
                return Err(format!("first resolution should be {l0}"));
            }
            if !describes(&r.l1.link.descriptor, &l1) {
                return Err(format!("second resolution should be {l1}"));
            }
            let sum = &r.l0.link.det + &r.l1.link.det;
            if &sum != det {
                return Err(format!("{det} != {} + {}", r.l0.link.det, r.l1.link.det));
            }
        }
        (_, Some(_)) => return Err("only pretzel nodes can be resolved".into()),
    }
    Ok(())
}

/// Checks every node: positive determinants matching the formula, exact
/// additivity across each resolution, children that really are the two
/// resolutions, and leaves that are unknots, alternating forms or cited
/// quasi-alternating pretzels.
pub fn verify_certificate(c: &QACertificate) -> Verification {
    // children first, so a bad determinant is reported where it was stored
    for (path, node) in c.nodes().into_iter().rev() {
        if let Err(reason) = check_node(node) {
            return Verification { failure: Some((path, reason)) };
        }
    }
    Verification { failure: None }
}

impl Classification {
    pub fn is_qa(&self) -> bool {
        self.verdict == Verdict::Qa
    }
}

/// The mirror image, if it has a normal form.
pub fn mirror(s: &PretzelSpec) -> Result<PretzelSpec, PretzelError> {
    let (lead, raw) = s.mirrored_raw();
    normalize(&raw, Some(lead)).map(|n| n.spec)
}
