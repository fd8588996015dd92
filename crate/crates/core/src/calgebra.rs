//! The C-algebra data model and its axiom checks.
//!
//! An algebra is stored as a dense tensor of structure constants
//! `c[r][s][t]`, the coefficient of basis element `t` in the product `r*s`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qfield::{QuadNum, Sign};

/// Maximum number of witnesses kept per failing check.
pub const MAX_WITNESSES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub indices: Vec<usize>,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Total number of violations found (witness list is truncated).
    pub failures: usize,
    pub witnesses: Vec<Witness>,
}

impl CheckResult {
    pub fn new(name: impl Into<String>) -> CheckResult {
        CheckResult {
            name: name.into(),
            passed: true,
            failures: 0,
            witnesses: Vec::new(),
        }
    }

    pub fn fail(&mut self, indices: Vec<usize>, message: impl Into<String>, value: Option<String>) {
        self.passed = false;
        self.failures += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(Witness {
                indices,
                message: message.into(),
                value,
            });
        }
    }

    fn absorb(&mut self, other: CheckResult) {
        self.passed &= other.passed;
        self.failures += other.failures;
        let room = MAX_WITNESSES.saturating_sub(self.witnesses.len());
        self.witnesses
            .extend(other.witnesses.into_iter().take(room));
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn single(check: CheckResult) -> VerificationReport {
        VerificationReport {
            checks: vec![check],
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    pub fn first_witness(&self) -> Option<&Witness> {
        self.checks.iter().flat_map(|c| c.witnesses.iter()).next()
    }
}

/// Degrees `d_r = c_{r,r*}^e` and the total degree `n = sum d_r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeVector {
    pub d: Vec<QuadNum>,
    pub n: QuadNum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub symmetric: bool,
    pub commutative: bool,
    pub homogeneous: bool,
    pub trivial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CAlgebra {
    labels: Vec<String>,
    e: usize,
    star: Vec<usize>,
    n: u64,
    c: Vec<QuadNum>,
}

/// On-disk form: `{"c", "e", "labels", "n", "star"}`.
#[derive(Serialize, Deserialize)]
struct AlgebraFile {
    c: Vec<Vec<Vec<QuadNum>>>,
    e: usize,
    labels: Vec<String>,
    n: u64,
    star: Vec<usize>,
}

impl CAlgebra {
    /// Builds an algebra from a nested constant tensor. Only shape and index
    /// validity are checked here; the axioms are checked by [`verify_axioms`].
    pub fn new(
        labels: Vec<String>,
        e: usize,
        star: Vec<usize>,
        n: u64,
        c: Vec<Vec<Vec<QuadNum>>>,
    ) -> Result<CAlgebra> {
        let k = labels.len();
        if k == 0 {
            return Err(Error::Malformed("empty basis".into()));
        }
        if c.len() != k
            || c.iter()
                .any(|m| m.len() != k || m.iter().any(|v| v.len() != k))
        {
            return Err(Error::Malformed(format!(
                "structure constant tensor is not {k}x{k}x{k}"
            )));
        }
        let flat = c
            .into_iter()
            .flatten()
            .flatten()
            .map(|x| x.with_radicand(n))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        CAlgebra::from_flat(labels, e, star, n, flat)
    }

    pub fn from_flat(
        labels: Vec<String>,
        e: usize,
        star: Vec<usize>,
        n: u64,
        c: Vec<QuadNum>,
    ) -> Result<CAlgebra> {
        let k = labels.len();
        if c.len() != k * k * k {
            return Err(Error::Malformed(format!(
                "expected {} constants, got {}",
                k * k * k,
                c.len()
            )));
        }
        if e >= k {
            return Err(Error::Malformed(format!("identity index {e} out of range")));
        }
        if star.len() != k {
            return Err(Error::Malformed("involution has wrong length".into()));
        }
        let mut seen = vec![false; k];
        for &s in &star {
            if s >= k || seen[s] {
                return Err(Error::Malformed("involution is not a permutation".into()));
            }
            seen[s] = true;
        }
        Ok(CAlgebra {
            labels,
            e,
            star,
            n,
            c,
        })
    }

    /// Builds a symmetric algebra (`star = id`) from a constant function.
    pub fn from_fn(
        labels: Vec<String>,
        e: usize,
        n: u64,
        mut f: impl FnMut(usize, usize, usize) -> QuadNum,
    ) -> Result<CAlgebra> {
        let k = labels.len();
        let mut c = Vec::with_capacity(k * k * k);
        for r in 0..k {
            for s in 0..k {
                for t in 0..k {
                    c.push(f(r, s, t).with_radicand(n)?);
                }
            }
        }
        CAlgebra::from_flat(labels, e, (0..k).collect(), n, c)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn identity(&self) -> usize {
        self.e
    }

    pub fn star(&self) -> &[usize] {
        &self.star
    }

    pub fn radicand(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn c(&self, r: usize, s: usize, t: usize) -> &QuadNum {
        let k = self.dim();
        &self.c[(r * k + s) * k + t]
    }

    pub fn c_mut(&mut self, r: usize, s: usize, t: usize) -> &mut QuadNum {
        let k = self.dim();
        &mut self.c[(r * k + s) * k + t]
    }

    /// Non-identity basis indices.
    pub fn nonidentity(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).filter(move |&r| r != self.e)
    }

    pub fn zero(&self) -> QuadNum {
        QuadNum::zero(self.n)
    }

    pub fn one(&self) -> QuadNum {
        QuadNum::one(self.n)
    }

    /// Matrix of left multiplication by `r`: entry `(t, s)` is `c_{r,s}^t`.
    pub fn left_mult(&self, r: usize) -> Vec<Vec<QuadNum>> {
        let k = self.dim();
        (0..k)
            .map(|t| (0..k).map(|s| self.c(r, s, t).clone()).collect())
            .collect()
    }

    /// Degrees read from the identity slot, checking (C3) along the way.
    pub fn degrees(&self) -> Result<DegreeVector> {
        let k = self.dim();
        let mut d = Vec::with_capacity(k);
        for r in 0..k {
            let dr = self.c(r, self.star[r], self.e);
            if !dr.is_positive() {
                return Err(Error::AxiomViolated {
                    axiom: "C3",
                    detail: format!("degree of {} is {dr}, not positive", self.labels[r]),
                });
            }
            for s in 0..k {
                if s != self.star[r] && !self.c(r, s, self.e).is_zero() {
                    return Err(Error::AxiomViolated {
                        axiom: "C3",
                        detail: format!("c[{r}][{s}][e] = {} must vanish", self.c(r, s, self.e)),
                    });
                }
            }
            d.push(dr.clone());
        }
        if !d[self.e].is_one() {
            return Err(Error::AxiomViolated {
                axiom: "C3",
                detail: format!("identity degree is {}", d[self.e]),
            });
        }
        for r in 0..k {
            if d[r] != d[self.star[r]] {
                return Err(Error::AxiomViolated {
                    axiom: "C4",
                    detail: format!("d[{r}] != d[star({r})]"),
                });
            }
        }
        let n = d.iter().fold(self.zero(), |acc, x| &acc + x);
        Ok(DegreeVector { d, n })
    }

    pub fn classify(&self) -> Classification {
        let k = self.dim();
        let symmetric = self.star.iter().enumerate().all(|(i, &s)| i == s);
        let commutative =
            (0..k).all(|r| (r + 1..k).all(|s| (0..k).all(|t| self.c(r, s, t) == self.c(s, r, t))));
        let homogeneous = match self.degrees() {
            Ok(dv) => {
                let mut it = self.nonidentity().map(|r| &dv.d[r]);
                match it.next() {
                    Some(first) => it.all(|x| x == first),
                    None => true,
                }
            }
            Err(_) => false,
        };
        Classification {
            symmetric,
            commutative,
            homogeneous,
            trivial: k <= 3,
        }
    }

    /// Applies a basis permutation: the new algebra has
    /// `c'[g(r)][g(s)][g(t)] = c[r][s][t]`.
    pub fn permuted(&self, g: &[usize]) -> Result<CAlgebra> {
        let k = self.dim();
        if g.len() != k {
            return Err(Error::Malformed("permutation has wrong length".into()));
        }
        let mut inv = vec![usize::MAX; k];
        for (i, &gi) in g.iter().enumerate() {
            if gi >= k || inv[gi] != usize::MAX {
                return Err(Error::Malformed("not a permutation".into()));
            }
            inv[gi] = i;
        }
        let mut c = Vec::with_capacity(k * k * k);
        for r in 0..k {
            for s in 0..k {
                for t in 0..k {
                    c.push(self.c(inv[r], inv[s], inv[t]).clone());
                }
            }
        }
        let labels = (0..k).map(|i| self.labels[inv[i]].clone()).collect();
        let star = (0..k).map(|i| g[self.star[inv[i]]]).collect();
        CAlgebra::from_flat(labels, g[self.e], star, self.n, c)
    }

    /// True when `g` maps the constants onto themselves.
    pub fn preserved_by(&self, g: &[usize]) -> bool {
        self.first_violation(g).is_none()
    }

    /// First triple `(r, s, t)` with `c[g r][g s][g t] != c[r][s][t]`.
    pub fn first_violation(&self, g: &[usize]) -> Option<(usize, usize, usize)> {
        let k = self.dim();
        for r in 0..k {
            for s in 0..k {
                for t in 0..k {
                    if self.c(g[r], g[s], g[t]) != self.c(r, s, t) {
                        return Some((r, s, t));
                    }
                }
            }
        }
        None
    }

    /// Entrywise comparison; returns the first differing triple.
    pub fn constants_diff(&self, other: &CAlgebra) -> Option<(usize, usize, usize)> {
        if self.dim() != other.dim() {
            return Some((usize::MAX, usize::MAX, usize::MAX));
        }
        let k = self.dim();
        for r in 0..k {
            for s in 0..k {
                for t in 0..k {
                    if self.c(r, s, t) != other.c(r, s, t) {
                        return Some((r, s, t));
                    }
                }
            }
        }
        None
    }

    pub fn same_constants(&self, other: &CAlgebra) -> bool {
        self.e == other.e && self.star == other.star && self.constants_diff(other).is_none()
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<CAlgebra> {
        if labels.len() != self.dim() {
            return Err(Error::Malformed("label count mismatch".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let k = self.dim();
        let c = (0..k)
            .map(|r| {
                (0..k)
                    .map(|s| (0..k).map(|t| self.c(r, s, t).clone()).collect())
                    .collect()
            })
            .collect();
        serde_json::to_value(AlgebraFile {
            c,
            e: self.e,
            labels: self.labels.clone(),
            n: self.n,
            star: self.star.clone(),
        })
        .expect("algebra serializes")
    }

    /// Canonical JSON: sorted keys, compact, lowest-terms rationals.
    pub fn to_json(&self) -> String {
        crate::canonical_json(&self.to_json_value())
    }

    pub fn from_json(s: &str) -> Result<CAlgebra> {
        let f: AlgebraFile = serde_json::from_str(s)?;
        CAlgebra::new(f.labels, f.e, f.star, f.n, f.c)
    }
}

/// Checks (C1)-(C4) plus the two-sided unit law. (C4) is checked in its
/// expanded form `sum_t d_t c_{r,s}^t = d_r d_s`.
pub fn verify_axioms(a: &CAlgebra) -> VerificationReport {
    let k = a.dim();
    let e = a.identity();
    let star = a.star();

    let mut c1 = CheckResult::new("C1");
    if star[e] != e {
        c1.fail(vec![e], "identity is not self-adjoint", None);
    }
    for r in 0..k {
        if star[star[r]] != r {
            c1.fail(vec![r], "involution is not an involution", None);
        }
    }

    // Values are real by construction.
    let c2 = CheckResult::new("C2");

    let mut unit = CheckResult::new("unit");
    for s in 0..k {
        for t in 0..k {
            let want = if s == t { a.one() } else { a.zero() };
            if a.c(e, s, t) != &want {
                unit.fail(
                    vec![e, s, t],
                    "left unit law fails",
                    Some(a.c(e, s, t).to_string()),
                );
            }
            if a.c(s, e, t) != &want {
                unit.fail(
                    vec![s, e, t],
                    "right unit law fails",
                    Some(a.c(s, e, t).to_string()),
                );
            }
        }
    }

    let mut c3 = CheckResult::new("C3");
    for r in 0..k {
        for s in 0..k {
            let v = a.c(r, s, e);
            if s == star[r] {
                if !v.is_positive() {
                    c3.fail(vec![r], "degree is not positive", Some(v.to_string()));
                }
            } else if !v.is_zero() {
                c3.fail(
                    vec![r, s],
                    "identity coefficient must vanish",
                    Some(v.to_string()),
                );
            }
        }
    }

    let mut c4 = CheckResult::new("C4");
    if c3.passed && c1.passed {
        let d: Vec<QuadNum> = (0..k).map(|r| a.c(r, star[r], e).clone()).collect();
        if !d[e].is_one() {
            c4.fail(vec![e], "identity degree is not 1", Some(d[e].to_string()));
        }
        for r in 0..k {
            if d[r] != d[star[r]] {
                c4.fail(vec![r], "d_r != d_{r*}", None);
            }
            for s in 0..k {
                let lhs = (0..k).fold(a.zero(), |acc, t| &acc + &(&d[t] * a.c(r, s, t)));
                let rhs = &d[r] * &d[s];
                if lhs != rhs {
                    c4.fail(
                        vec![r, s],
                        "sum_t d_t c_{r,s}^t != d_r d_s",
                        Some(format!("{lhs} vs {rhs}")),
                    );
                }
            }
        }
    } else {
        c4.fail(vec![], "skipped: degree map undefined", None);
    }

    VerificationReport {
        checks: vec![c1, c2, unit, c3, c4],
    }
}

/// Exact associativity: `sum_v c_{r,s}^v c_{v,t}^u = sum_v c_{r,v}^u c_{s,t}^v`
/// for every `(r, s, t, u)`. The scan over `r` runs on the rayon pool.
pub fn verify_associativity(a: &CAlgebra) -> VerificationReport {
    let k = a.dim();
    let partial: Vec<CheckResult> = (0..k)
        .into_par_iter()
        .map(|r| {
            let mut check = CheckResult::new("associativity");
            for s in 0..k {
                for t in 0..k {
                    let mut lhs = vec![a.zero(); k];
                    let mut rhs = vec![a.zero(); k];
                    for v in 0..k {
                        let rs = a.c(r, s, v);
                        if !rs.is_zero() {
                            for (u, acc) in lhs.iter_mut().enumerate() {
                                let x = a.c(v, t, u);
                                if !x.is_zero() {
                                    *acc = &*acc + &(rs * x);
                                }
                            }
                        }
                        let st = a.c(s, t, v);
                        if !st.is_zero() {
                            for (u, acc) in rhs.iter_mut().enumerate() {
                                let x = a.c(r, v, u);
                                if !x.is_zero() {
                                    *acc = &*acc + &(st * x);
                                }
                            }
                        }
                    }
                    for u in 0..k {
                        if lhs[u] != rhs[u] {
                            check.fail(
                                vec![r, s, t, u],
                                "(rs)t != r(st)",
                                Some(format!("{} vs {}", lhs[u], rhs[u])),
                            );
                        }
                    }
                }
            }
            check
        })
        .collect();
    let mut check = CheckResult::new("associativity");
    for p in partial {
        check.absorb(p);
    }
    VerificationReport::single(check)
}

/// The identities `d_t c_{r,s}^{t*} = d_r c_{s,t}^{r*} = d_s c_{t,r}^{s*}`.
pub fn check_triangle_identities(a: &CAlgebra) -> VerificationReport {
    let mut check = CheckResult::new("triangle");
    let dv = match a.degrees() {
        Ok(dv) => dv,
        Err(err) => {
            check.fail(vec![], format!("degrees unavailable: {err}"), None);
            return VerificationReport::single(check);
        }
    };
    let d = &dv.d;
    let star = a.star();
    let k = a.dim();
    for r in 0..k {
        for s in 0..k {
            for t in 0..k {
                let x = &d[t] * a.c(r, s, star[t]);
                let y = &d[r] * a.c(s, t, star[r]);
                let z = &d[s] * a.c(t, r, star[s]);
                if x != y || y != z {
                    check.fail(
                        vec![r, s, t],
                        "triangle identity fails",
                        Some(format!("{x}, {y}, {z}")),
                    );
                }
            }
        }
    }
    VerificationReport::single(check)
}

impl Serialize for CAlgebra {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(s)
    }
}

/// Scans every constant for negativity. A table algebra has none.
pub fn table_check(a: &CAlgebra) -> CheckResult {
    let mut check = CheckResult::new("table");
    let k = a.dim();
    for r in 0..k {
        for s in 0..k {
            for t in 0..k {
                let v = a.c(r, s, t);
                if v.sign() == Sign::Negative {
                    check.fail(
                        vec![r, s, t],
                        "negative structure constant",
                        Some(v.to_string()),
                    );
                }
            }
        }
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::{int, rat};

    fn labels(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("r{i}")).collect()
    }

    /// Affine algebra constants for order q, written out by hand.
    fn affine(q: i64) -> CAlgebra {
        let k = (q + 2) as usize;
        CAlgebra::from_fn(labels(k), 0, (q * q) as u64, |r, s, t| {
            let v = match (r, s, t) {
                (0, s, t) => (s == t) as i64,
                (r, 0, t) => (r == t) as i64,
                (r, s, 0) => {
                    if r == s {
                        q - 1
                    } else {
                        0
                    }
                }
                (r, s, t) if r == s => {
                    if t == r {
                        q - 2
                    } else {
                        0
                    }
                }
                (r, s, t) => (t != r && t != s) as i64,
            };
            QuadNum::from_int(v, (q * q) as u64)
        })
        .unwrap()
    }

    #[test]
    fn affine_passes_everything() {
        for q in [2, 3, 4] {
            let a = affine(q);
            assert!(verify_axioms(&a).passed(), "q={q}");
            assert!(verify_associativity(&a).passed(), "q={q}");
            assert!(check_triangle_identities(&a).passed(), "q={q}");
            let cl = a.classify();
            assert!(cl.symmetric && cl.commutative && cl.homogeneous && !cl.trivial);
        }
    }

    #[test]
    fn affine_degrees() {
        let dv = affine(3).degrees().unwrap();
        let want: Vec<_> = [1, 2, 2, 2, 2]
            .iter()
            .map(|&x| QuadNum::from_int(x, 9))
            .collect();
        assert_eq!(dv.d, want);
        assert_eq!(dv.n, QuadNum::from_int(9, 9));
    }

    #[test]
    fn triangle_values_affine_three() {
        let a = affine(3);
        let d = a.degrees().unwrap().d;
        // distinct r, s, t: d_t c_{r,s}^t = 2 = d_r c_{s,t}^r
        assert_eq!(&d[3] * a.c(1, 2, 3), QuadNum::from_int(2, 9));
        assert_eq!(&d[1] * a.c(2, 3, 1), QuadNum::from_int(2, 9));
        assert_eq!(&d[0] * a.c(0, 0, 0), QuadNum::from_int(1, 9));
    }

    #[test]
    fn one_dimensional_algebra() {
        let a = CAlgebra::from_fn(vec!["e".into()], 0, 1, |_, _, _| QuadNum::one(1)).unwrap();
        let dv = a.degrees().unwrap();
        assert_eq!(dv.n, QuadNum::one(1));
        assert!(verify_axioms(&a).passed());
        assert!(a.classify().trivial);
    }

    #[test]
    fn c3_failure_has_witness() {
        let mut a = affine(2);
        *a.c_mut(2, 2, 0) = QuadNum::zero(4);
        let rep = verify_axioms(&a);
        let c3 = rep.check("C3").unwrap();
        assert!(!c3.passed);
        assert_eq!(c3.witnesses[0].indices, vec![2]);
        assert!(matches!(
            a.degrees(),
            Err(Error::AxiomViolated { axiom: "C3", .. })
        ));
    }

    #[test]
    fn perturbation_breaks_associativity() {
        let mut a = affine(3);
        *a.c_mut(1, 2, 3) = QuadNum::from_int(2, 9);
        let rep = verify_associativity(&a);
        assert!(!rep.passed());
        let w = rep.first_witness().unwrap();
        assert_eq!(w.indices.len(), 4);
        assert!(rep.checks[0].witnesses.len() <= MAX_WITNESSES);
    }

    #[test]
    fn malformed_tensor_rejected() {
        let c = vec![vec![vec![QuadNum::one(1)]]];
        assert!(matches!(
            CAlgebra::new(labels(2), 0, vec![0, 1], 1, c),
            Err(Error::Malformed(_))
        ));
        assert!(CAlgebra::from_flat(labels(1), 0, vec![1], 1, vec![QuadNum::one(1)]).is_err());
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let mut a = affine(2);
        *a.c_mut(1, 1, 1) = QuadNum::rational(rat(-8, 9), 4);
        let s = a.to_json();
        let b = CAlgebra::from_json(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(b.to_json(), s);
        assert!(s.starts_with("{\"c\":"));
    }

    #[test]
    fn permutation_relabels() {
        let a = affine(3);
        let g = vec![0, 2, 1, 3, 4];
        assert!(a.preserved_by(&g));
        let p = a.permuted(&g).unwrap();
        assert_eq!(p.constants_diff(&a), None);
        assert_eq!(p.labels()[1], "r2");
    }

    #[test]
    fn table_scan() {
        assert!(table_check(&affine(3)).passed);
        let mut a = affine(2);
        *a.c_mut(1, 1, 1) = QuadNum::rational(int(-1), 4);
        let t = table_check(&a);
        assert_eq!(t.witnesses[0].value.as_deref(), Some("-1"));
    }
}
