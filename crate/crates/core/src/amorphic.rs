//! Amorphic C-algebras: the closed-form construction from a degree multiset
//! and a sign, the amorphic criterion, recovery of the invariants, the
//! Latin-square parametrisation, automorphism groups and the table-algebra
//! region for homogeneous algebras.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use crate::calgebra::table_check;
use crate::calgebra::{CAlgebra, CheckResult, VerificationReport};
use crate::error::{Error, Result};
use crate::qfield::{format_rational, int, radicand_of, rational_sqrt, QuadNum, Rational, Sign};

/// The isomorphism invariant of a nontrivial amorphic C-algebra: the degree
/// multiset (containing 1) and the sign `epsilon`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegreeSpec {
    #[serde(rename = "D", with = "rational_vec")]
    pub degrees: Vec<Rational>,
    pub epsilon: i8,
}

mod rational_vec {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| crate::qfield::parse_rational(s).map_err(D::Error::custom))
            .collect()
    }
}

impl PartialEq for DegreeSpec {
    /// Multiset equality of degrees plus equal sign.
    fn eq(&self, other: &DegreeSpec) -> bool {
        self.epsilon == other.epsilon && self.sorted_degrees() == other.sorted_degrees()
    }
}

impl Eq for DegreeSpec {}

impl DegreeSpec {
    pub fn new(degrees: Vec<Rational>, epsilon: i8) -> Result<DegreeSpec> {
        let spec = DegreeSpec { degrees, epsilon };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_ints(degrees: &[i64], epsilon: i8) -> Result<DegreeSpec> {
        DegreeSpec::new(degrees.iter().map(|&x| int(x)).collect(), epsilon)
    }

    /// `{1, d, ..., d}` with `nu - 1` copies of `d`.
    pub fn homogeneous(nu: usize, d: Rational, epsilon: i8) -> Result<DegreeSpec> {
        let mut degrees = vec![Rational::one()];
        degrees.extend(std::iter::repeat_n(d, nu.saturating_sub(1)));
        DegreeSpec::new(degrees, epsilon)
    }

    pub fn sorted_degrees(&self) -> Vec<Rational> {
        let mut v = self.degrees.clone();
        v.sort();
        v
    }

    pub fn n(&self) -> Rational {
        self.degrees.iter().fold(Rational::zero(), |acc, x| acc + x)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon != 1 && self.epsilon != -1 {
            return Err(Error::InvalidSpec(format!(
                "epsilon must be +1 or -1, got {}",
                self.epsilon
            )));
        }
        if self.degrees.len() < 4 {
            return Err(Error::InvalidSpec(format!(
                "need at least 4 degrees for a nontrivial algebra, got {}",
                self.degrees.len()
            )));
        }
        if let Some(x) = self.degrees.iter().find(|x| !x.is_positive()) {
            return Err(Error::InvalidSpec(format!("degree {x} is not positive")));
        }
        if !self.degrees.iter().any(|x| x.is_one()) {
            return Err(Error::InvalidSpec(
                "degree multiset does not contain 1".into(),
            ));
        }
        let m = QuadNum::sqrt_of_rational(&self.n())?;
        let shifted = &m + &QuadNum::from_int(self.epsilon as i64, m.radicand());
        if !shifted.is_positive() {
            return Err(Error::InvalidSpec(format!(
                "sqrt(n) + epsilon must be positive (n = {})",
                self.n()
            )));
        }
        Ok(())
    }
}

/// Shared quantities of the closed-form constants for one spec.
struct ClosedForm {
    radicand: u64,
    n: QuadNum,
    /// `(sqrt(n) + epsilon)^2`
    shift_sq: QuadNum,
}

impl ClosedForm {
    fn new(n: &Rational, epsilon: i8) -> Result<ClosedForm> {
        let m = QuadNum::sqrt_of_rational(n)?;
        let radicand = m.radicand();
        let shift = &m + &QuadNum::from_int(epsilon as i64, radicand);
        Ok(ClosedForm {
            radicand,
            n: QuadNum::rational(n.clone(), radicand),
            shift_sq: &shift * &shift,
        })
    }

    fn co_degree(&self, d: &QuadNum) -> QuadNum {
        &(&self.n - &QuadNum::one(self.radicand)) - d
    }

    /// `c_{r,s}^t` for pairwise distinct non-identity `r, s, t`.
    fn distinct(&self, dr: &QuadNum, ds: &QuadNum) -> QuadNum {
        &(dr * ds) / &self.shift_sq
    }

    fn factor(&self, d: &QuadNum) -> QuadNum {
        let diff = d - &self.co_degree(d);
        &QuadNum::one(self.radicand) + &(&diff / &self.shift_sq)
    }

    /// `c_{r,r}^t`, `t` not in `{e, r}`.
    fn square_off(&self, d: &QuadNum) -> QuadNum {
        let half = QuadNum::rational(Rational::new(1.into(), 2.into()), self.radicand);
        &(&half * d) * &self.factor(d)
    }

    /// `c_{r,r}^r`.
    fn square_diag(&self, d: &QuadNum) -> QuadNum {
        let half = QuadNum::rational(Rational::new(1.into(), 2.into()), self.radicand);
        let lead = -(&(&half * &self.co_degree(d)) * &self.factor(d));
        &(&lead + d) - &QuadNum::one(self.radicand)
    }
}

/// Builds the amorphic algebra with degree multiset `D` and sign `epsilon`.
///
/// Basis: `e` (index 0) followed by `r1, r2, ...` carrying the remaining
/// degrees in the order given (the first `1` in the list becomes `e`).
/// Slots with a repeated non-identity index are filled from the triangle
/// identities; slots touching `e` from the unit law and (C3).
pub fn construct(spec: &DegreeSpec) -> Result<CAlgebra> {
    spec.validate()?;
    let cf = ClosedForm::new(&spec.n(), spec.epsilon)?;
    let nn = cf.radicand;

    let mut rest = spec.degrees.clone();
    let pos = rest.iter().position(|x| x.is_one()).expect("validated");
    rest.remove(pos);
    let mut d = vec![QuadNum::one(nn)];
    d.extend(rest.into_iter().map(|x| QuadNum::rational(x, nn)));
    let k = d.len();

    let off: Vec<QuadNum> = d.iter().map(|x| cf.square_off(x)).collect();
    let diag: Vec<QuadNum> = d.iter().map(|x| cf.square_diag(x)).collect();

    let mut labels = vec!["e".to_string()];
    labels.extend((1..k).map(|i| format!("r{i}")));

    CAlgebra::from_fn(labels, 0, nn, |r, s, t| {
        if r == 0 {
            return QuadNum::from_int((s == t) as i64, nn);
        }
        if s == 0 {
            return QuadNum::from_int((r == t) as i64, nn);
        }
        if t == 0 {
            return if r == s {
                d[r].clone()
            } else {
                QuadNum::zero(nn)
            };
        }
        if r == s {
            if t == r {
                diag[r].clone()
            } else {
                off[r].clone()
            }
        } else if t == r {
            // d_r c_{r,s}^r = d_s c_{r,r}^s
            &(&d[s] * &off[r]) / &d[r]
        } else if t == s {
            &(&d[r] * &off[s]) / &d[s]
        } else {
            cf.distinct(&d[r], &d[s])
        }
    })
}

/// The amorphic criterion: for every `r, s` in `R#` the constant
/// `c_{r,s}^u` does not depend on `u` in `R# \ {r, s}`. Algebras of
/// dimension at most 3 always pass; a nontrivial non-symmetric algebra
/// never does.
pub fn is_amorphic(a: &CAlgebra) -> VerificationReport {
    let mut check = CheckResult::new("amorphic");
    if a.dim() <= 3 {
        return VerificationReport::single(check);
    }
    if !a.classify().symmetric {
        let r = (0..a.dim()).find(|&r| a.star()[r] != r).unwrap_or(0);
        check.fail(vec![r], "nontrivial amorphic algebras are symmetric", None);
        return VerificationReport::single(check);
    }
    let nonid: Vec<usize> = a.nonidentity().collect();
    for (i, &r) in nonid.iter().enumerate() {
        for &s in &nonid[i..] {
            let mut rest = nonid.iter().copied().filter(|&u| u != r && u != s);
            let Some(u0) = rest.next() else { continue };
            let base = a.c(r, s, u0);
            for v in rest {
                let x = a.c(r, s, v);
                if x != base {
                    check.fail(
                        vec![r, s, u0, v],
                        "c_{r,s}^u != c_{r,s}^v",
                        Some(format!("{base} vs {x}")),
                    );
                }
            }
        }
    }
    VerificationReport::single(check)
}

fn rational_degrees(a: &CAlgebra) -> Result<Vec<Rational>> {
    let dv = a.degrees()?;
    dv.d.iter()
        .map(|x| {
            x.as_rational()
                .cloned()
                .ok_or_else(|| Error::InvalidSpec(format!("irrational degree {x}")))
        })
        .collect()
}

/// Recovers `(D(A), epsilon)` from a nontrivial amorphic algebra, reading
/// `(sqrt(n) + epsilon)^2 = d_r d_s / c_{r,s}^t` off a pairwise distinct
/// non-identity triple.
pub fn recover_spec(a: &CAlgebra) -> Result<DegreeSpec> {
    if a.dim() <= 3 {
        return Err(Error::Trivial(a.dim()));
    }
    let rep = is_amorphic(a);
    if !rep.passed() {
        let w = rep
            .first_witness()
            .map(|w| w.message.clone())
            .unwrap_or_default();
        return Err(Error::NotAmorphic(w));
    }
    let degrees = rational_degrees(a)?;
    let nonid: Vec<usize> = a.nonidentity().collect();
    let (r, s, t) = (nonid[0], nonid[1], nonid[2]);
    let c = a.c(r, s, t);
    if c.is_zero() {
        return Err(Error::BadEpsilon("c_{r,s}^t vanishes".into()));
    }
    let nn = a.radicand();
    let dr = QuadNum::rational(degrees[r].clone(), nn);
    let ds = QuadNum::rational(degrees[s].clone(), nn);
    let shift_sq = &(&dr * &ds) / c;

    let n: Rational = degrees.iter().fold(Rational::zero(), |acc, x| acc + x);
    let m = QuadNum::sqrt_of_rational(&n)?;
    for eps in [-1i8, 1] {
        let sh = &m + &QuadNum::from_int(eps as i64, m.radicand());
        let sq = &sh * &sh;
        if sq.is_positive()
            && sh.is_positive()
            && shift_sq.checked_sub(&sq).is_ok_and(|x| x.is_zero())
        {
            return DegreeSpec::new(degrees, eps);
        }
    }
    Err(Error::BadEpsilon(format!(
        "(sqrt(n)+eps)^2 = {shift_sq} matches neither sign (n = {n})"
    )))
}

/// Homogeneous amorphic algebra with `d = sqrt(n) + epsilon`, written down
/// from its three distinct constant values: `1`, `epsilon + 1` and
/// `epsilon (3 - sqrt(n)) + 1` for `|{r,s,t}| = 3, 2, 1`.
pub fn generalized_affine_constants(n: &Rational, epsilon: i8) -> Result<CAlgebra> {
    if epsilon != 1 && epsilon != -1 {
        return Err(Error::Precondition(format!(
            "epsilon must be +-1, got {epsilon}"
        )));
    }
    let m = rational_sqrt(n).ok_or_else(|| {
        Error::Precondition(format!(
            "n = {n} is not a rational square, so (n-1)/d + 1 is not an integer"
        ))
    })?;
    let eps = int(epsilon as i64);
    let d = &m + &eps;
    if !d.is_positive() {
        return Err(Error::Precondition(format!(
            "sqrt(n) + epsilon = {d} is not positive"
        )));
    }
    let nu = &m - &eps + Rational::one();
    if !nu.is_integer() || nu < int(4) {
        return Err(Error::Precondition(format!(
            "dimension (n-1)/d + 1 = {nu} must be an integer >= 4"
        )));
    }
    let k: usize = nu
        .to_integer()
        .try_into()
        .map_err(|_| Error::Precondition("dimension too large".into()))?;
    let nn = radicand_of(n)?;
    let q = |x: Rational| QuadNum::rational(x, nn);
    let pair_val = q(&eps + Rational::one());
    let single_val = q(&eps * (int(3) - &m) + Rational::one());
    let mut labels = vec!["e".to_string()];
    labels.extend((1..k).map(|i| format!("x{i}")));
    CAlgebra::from_fn(labels, 0, nn, |r, s, t| {
        if r == 0 {
            return QuadNum::from_int((s == t) as i64, nn);
        }
        if s == 0 {
            return QuadNum::from_int((r == t) as i64, nn);
        }
        if t == 0 {
            return if r == s {
                q(d.clone())
            } else {
                QuadNum::zero(nn)
            };
        }
        let distinct = 1 + (s != r) as usize + (t != r && t != s) as usize;
        match distinct {
            3 => QuadNum::one(nn),
            2 => pair_val.clone(),
            _ => single_val.clone(),
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatinType {
    LatinSquare,
    NegativeLatinSquare,
}

/// Strongly regular graph parameters `(v, k, lambda, mu)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SrgParams {
    pub v: QuadNum,
    pub k: QuadNum,
    pub lambda: QuadNum,
    pub mu: QuadNum,
}

#[derive(Debug, Clone, Serialize)]
pub struct LatinParams {
    /// `sqrt(n)`
    pub m: QuadNum,
    pub epsilon: i8,
    pub kind: LatinType,
    /// `(basis index, g_r)` with `d_r = g_r (m + epsilon)`.
    pub g: Vec<(usize, QuadNum)>,
    /// Present when `n` is a perfect square and every constant is an integer.
    pub srg: Option<Vec<SrgParams>>,
    pub check: CheckResult,
}

/// Rewrites a nontrivial amorphic algebra in Latin-square form and verifies
/// `d_r = g_r(m+eps)`, `c_{r,r}^r = (g_r+eps)(g_r+2eps) - eps m - 2` and
/// `c_{r,r}^s = g_r(g_r+eps)` exactly. With `require_square`, a non-square
/// `n` is an error.
pub fn latin_params(a: &CAlgebra, require_square: bool) -> Result<LatinParams> {
    let spec = recover_spec(a)?;
    let n = spec.n();
    if require_square && rational_sqrt(&n).is_none() {
        return Err(Error::Precondition(format!(
            "n = {n} is not a perfect square"
        )));
    }
    let nn = a.radicand();
    let m = QuadNum::sqrt_of_rational(&n)?.with_radicand(nn)?;
    let eps = QuadNum::from_int(spec.epsilon as i64, nn);
    let two = QuadNum::from_int(2, nn);
    let shift = &m + &eps;
    let d = a.degrees()?.d;
    let nonid: Vec<usize> = a.nonidentity().collect();

    let mut check = CheckResult::new("latin");
    let mut g = Vec::new();
    for &r in &nonid {
        let gr = &d[r] / &shift;
        if &gr * &shift != d[r] {
            check.fail(vec![r], "d_r != g_r (m + eps)", None);
        }
        let diag = &(&(&(&gr + &eps) * &(&gr + &(&two * &eps))) - &(&eps * &m)) - &two;
        if a.c(r, r, r) != &diag {
            check.fail(
                vec![r, r, r],
                "c_{r,r}^r mismatch",
                Some(format!("{} vs {diag}", a.c(r, r, r))),
            );
        }
        let off = &gr * &(&gr + &eps);
        for &s in nonid.iter().filter(|&&s| s != r) {
            if a.c(r, r, s) != &off {
                check.fail(
                    vec![r, r, s],
                    "c_{r,r}^s mismatch",
                    Some(format!("{} vs {off}", a.c(r, r, s))),
                );
            }
        }
        g.push((r, gr));
    }

    let all_integer =
        (0..a.dim()).all(|r| (0..a.dim()).all(|s| (0..a.dim()).all(|t| a.c(r, s, t).is_integer())));
    let srg = (rational_sqrt(&n).is_some() && all_integer).then(|| {
        nonid
            .iter()
            .map(|&r| {
                let other = nonid.iter().copied().find(|&s| s != r).expect("nontrivial");
                SrgParams {
                    v: QuadNum::rational(n.clone(), nn),
                    k: d[r].clone(),
                    lambda: a.c(r, r, r).clone(),
                    mu: a.c(r, r, other).clone(),
                }
            })
            .collect()
    });

    Ok(LatinParams {
        m,
        epsilon: spec.epsilon,
        kind: if spec.epsilon < 0 {
            LatinType::LatinSquare
        } else {
            LatinType::NegativeLatinSquare
        },
        g,
        srg,
        check,
    })
}

mod biguint_str {
    use num_bigint::BigUint;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }
}

/// Automorphism group of a nontrivial amorphic algebra: the full symmetric
/// group on each degree class.
#[derive(Debug, Clone, Serialize)]
pub struct AutGroup {
    /// `{e}` first, then one class per distinct degree in order of first
    /// appearance.
    pub classes: Vec<Vec<usize>>,
    #[serde(serialize_with = "biguint_str::serialize")]
    pub order: BigUint,
    /// Adjacent transpositions within each class, all checked exactly.
    pub generators_checked: usize,
    pub generators_preserve: bool,
}

impl AutGroup {
    /// A uniformly random element of the group, as a basis permutation.
    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Vec<usize> {
        let mut g: Vec<usize> = (0..dim).collect();
        for class in &self.classes {
            let mut img = class.clone();
            img.shuffle(rng);
            for (&from, &to) in class.iter().zip(&img) {
                g[from] = to;
            }
        }
        g
    }
}

pub fn degree_classes(a: &CAlgebra) -> Result<Vec<Vec<usize>>> {
    let d = a.degrees()?.d;
    let mut classes: Vec<Vec<usize>> = vec![vec![a.identity()]];
    let mut keys: Vec<QuadNum> = Vec::new();
    for r in a.nonidentity() {
        match keys.iter().position(|k| k == &d[r]) {
            Some(i) => classes[i + 1].push(r),
            None => {
                keys.push(d[r].clone());
                classes.push(vec![r]);
            }
        }
    }
    Ok(classes)
}

pub fn aut_group(a: &CAlgebra) -> Result<AutGroup> {
    if a.dim() <= 3 {
        return Err(Error::Trivial(a.dim()));
    }
    let rep = is_amorphic(a);
    if !rep.passed() {
        return Err(Error::NotAmorphic(
            "automorphism formula needs an amorphic algebra".into(),
        ));
    }
    let classes = degree_classes(a)?;
    let mut order = BigUint::one();
    for c in &classes {
        for i in 2..=c.len() {
            order *= BigUint::from(i);
        }
    }
    let mut checked = 0;
    let mut ok = true;
    for c in &classes {
        for w in c.windows(2) {
            let mut g: Vec<usize> = (0..a.dim()).collect();
            g.swap(w[0], w[1]);
            checked += 1;
            ok &= a.preserved_by(&g);
        }
    }
    Ok(AutGroup {
        classes,
        order,
        generators_checked: checked,
        generators_preserve: ok,
    })
}

/// Degree-sorted basis order (identity first, stable among equal degrees).
/// For amorphic algebras, two isomorphic algebras coincide entrywise after
/// this relabelling.
pub fn canonical_order(a: &CAlgebra) -> Result<Vec<usize>> {
    let d = a.degrees()?.d;
    let mut nonid: Vec<usize> = a.nonidentity().collect();
    let mut err = None;
    nonid.sort_by(|&x, &y| {
        d[x].cmp_value(&d[y]).unwrap_or_else(|e| {
            err = Some(e);
            Ordering::Equal
        })
    });
    if let Some(e) = err {
        return Err(e.into());
    }
    // g maps old index -> new position
    let mut g = vec![0; a.dim()];
    g[a.identity()] = 0;
    for (pos, &r) in nonid.iter().enumerate() {
        g[r] = pos + 1;
    }
    Ok(g)
}

/// Relabels both algebras by degree and compares constants entrywise.
pub fn isomorphic_amorphic(a: &CAlgebra, b: &CAlgebra) -> Result<bool> {
    if a.dim() != b.dim() {
        return Ok(false);
    }
    let ca = a.permuted(&canonical_order(a)?)?;
    let cb = b.permuted(&canonical_order(b)?)?;
    Ok(ca.constants_diff(&cb).is_none())
}

/// Constants of a homogeneous `A_eps(nu, d)` in terms of `d`, `eps` and
/// `n = 1 + (nu-1) d`, returned as the values for `|{r,s,t}| = 3, 2, 1`.
pub fn homogeneous_constants(nu: usize, epsilon: i8, d: &Rational) -> Result<[QuadNum; 3]> {
    let n = int(1) + int(nu as i64 - 1) * d;
    let m = QuadNum::sqrt_of_rational(&n)?;
    let nn = m.radicand();
    let q = |x: Rational| QuadNum::rational(x, nn);
    let shift = &m + &QuadNum::from_int(epsilon as i64, nn);
    let shift_sq = &shift * &shift;
    let dq = q(d.clone());
    let c3 = &(&dq * &dq) / &shift_sq;
    let f = &QuadNum::one(nn) + &(&q(int(2) * d - &n + int(1)) / &shift_sq);
    let half = q(Rational::new(1.into(), 2.into()));
    let c2 = &(&half * &dq) * &f;
    let c1 = &(&(&half * &q(d - &n + int(1))) * &f) + &q(d - int(1));
    Ok([c3, c2, c1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionFamily {
    /// `theta <= d <= d-`
    Lower,
    /// `d >= max(theta, d+)`
    Upper,
    /// The quadratic has no real roots; only `d >= theta` constrains.
    NoRealRoots,
    Outside,
}

/// Pointwise evaluation of the table-algebra region for `A_eps(nu, d)`.
#[derive(Debug, Clone, Serialize)]
pub struct TableRegion {
    pub nu: usize,
    pub epsilon: i8,
    #[serde(with = "crate::qfield::rational_str")]
    pub d: Rational,
    #[serde(with = "crate::qfield::rational_str")]
    pub n: Rational,
    /// `-(1 + eps sqrt(n))`
    pub theta: QuadNum,
    /// Midpoint of the two roots of the quadratic in `d`.
    pub vertex: QuadNum,
    /// Roots `d-` <= `d+` as floating approximations (the exact roots live
    /// in a nested quadratic extension); `None` when they are complex.
    pub d_minus: Option<f64>,
    pub d_plus: Option<f64>,
    pub theta_ok: bool,
    pub quadratic_ok: bool,
    pub families: Vec<RegionFamily>,
    pub in_region: bool,
}

pub fn table_region(nu: usize, epsilon: i8, d: &Rational) -> Result<TableRegion> {
    if nu < 4 {
        return Err(Error::Precondition(format!("nu = {nu} must be at least 4")));
    }
    if epsilon != 1 && epsilon != -1 {
        return Err(Error::Precondition(format!(
            "epsilon must be +-1, got {epsilon}"
        )));
    }
    if !d.is_positive() {
        return Err(Error::Precondition(format!("d = {d} must be positive")));
    }
    let n = int(1) + int(nu as i64 - 1) * d;
    let m = QuadNum::sqrt_of_rational(&n)?;
    let nn = m.radicand();
    let q = |x: Rational| QuadNum::rational(x, nn);
    let eps = QuadNum::from_int(epsilon as i64, nn);
    let shift = &m + &eps;
    if !shift.is_positive() {
        return Err(Error::Precondition(
            "sqrt(n) + epsilon must be positive".into(),
        ));
    }
    let big_q = &shift * &shift;
    let dq = q(d.clone());
    let n_minus = q(&n - int(1));
    let n_plus = q(&n + int(1));

    let theta = -(&QuadNum::one(nn) + &(&eps * &m));
    let theta_ok = (&dq - &theta).sign() != Sign::Negative;

    // 2d^2 - 3d(n-1-Q) + (n-1)^2 - (n+1)Q
    let lin = &n_minus - &big_q;
    let konst = &(&n_minus * &n_minus) - &(&n_plus * &big_q);
    let two = QuadNum::from_int(2, nn);
    let three = QuadNum::from_int(3, nn);
    let value = &(&(&two * &(&dq * &dq)) - &(&three * &(&dq * &lin))) + &konst;
    let quadratic_ok = value.sign() != Sign::Negative;
    let vertex = &(&three * &lin) / &QuadNum::from_int(4, nn);
    let disc =
        &(&QuadNum::from_int(9, nn) * &(&lin * &lin)) - &(&QuadNum::from_int(8, nn) * &konst);

    let mut families = Vec::new();
    let (d_minus, d_plus) = if disc.sign() == Sign::Negative {
        if theta_ok {
            families.push(RegionFamily::NoRealRoots);
        }
        (None, None)
    } else {
        let root = disc.to_f64().max(0.0).sqrt() / 4.0;
        let v = vertex.to_f64();
        if theta_ok && quadratic_ok {
            let side = (&dq - &vertex).sign();
            if side != Sign::Positive {
                families.push(RegionFamily::Lower);
            }
            if side != Sign::Negative {
                families.push(RegionFamily::Upper);
            }
        }
        (Some(v - root), Some(v + root))
    };
    let in_region = !families.is_empty();
    if !in_region {
        families.push(RegionFamily::Outside);
    }
    debug_assert_eq!(in_region, theta_ok && quadratic_ok);
    Ok(TableRegion {
        nu,
        epsilon,
        d: d.clone(),
        n,
        theta,
        vertex,
        d_minus,
        d_plus,
        theta_ok,
        quadratic_ok,
        families,
        in_region,
    })
}
