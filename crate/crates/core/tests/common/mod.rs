#![allow(dead_code)]

use amorphic::amorphic::DegreeSpec;
use amorphic::calgebra::CAlgebra;
use amorphic::qfield::{int, rat, QuadNum, Rational};
use amorphic::realization::{algebra_from_matrices, IntMatrix};
use num_traits::One;
use proptest::prelude::*;
use rand::Rng;

pub fn qn(v: i64, n: u64) -> QuadNum {
    QuadNum::from_int(v, n)
}

/// Random valid spec with `len` degrees, the first equal to 1. Degrees are
/// `p/q` with small `p`, `q` (`q = 1` when `integer`).
pub fn random_spec<R: Rng>(rng: &mut R, len: usize, integer: bool) -> DegreeSpec {
    loop {
        let mut d = vec![int(1)];
        for _ in 1..len {
            let p = rng.gen_range(1..=12);
            let q = if integer { 1 } else { rng.gen_range(1..=4) };
            d.push(rat(p, q));
        }
        let eps = if rng.gen_bool(0.5) { 1 } else { -1 };
        if let Ok(s) = DegreeSpec::new(d, eps) {
            return s;
        }
    }
}

fn spec_from_parts(parts: Vec<(i64, i64)>, eps: bool) -> Option<DegreeSpec> {
    let mut d = vec![int(1)];
    d.extend(parts.into_iter().map(|(p, q)| rat(p, q)));
    DegreeSpec::new(d, if eps { 1 } else { -1 }).ok()
}

pub fn rational_spec() -> impl Strategy<Value = DegreeSpec> {
    (
        prop::collection::vec((1i64..=12, 1i64..=4), 3..=7),
        any::<bool>(),
    )
        .prop_filter_map("invalid spec", |(parts, eps)| spec_from_parts(parts, eps))
}

pub fn integer_spec() -> impl Strategy<Value = DegreeSpec> {
    (
        prop::collection::vec((1i64..=8, Just(1i64)), 3..=7),
        any::<bool>(),
    )
        .prop_filter_map("invalid spec", |(parts, eps)| spec_from_parts(parts, eps))
}

pub fn homogeneous_spec() -> impl Strategy<Value = DegreeSpec> {
    (4usize..=8, 1i64..=9, 1i64..=3, any::<bool>())
        .prop_filter_map("invalid spec", |(nu, p, q, eps)| {
            DegreeSpec::homogeneous(nu, rat(p, q), if eps { 1 } else { -1 }).ok()
        })
}

/// Degrees in basis order as used by `construct`: the first 1 becomes the
/// identity at index 0, the rest keep their order.
pub fn basis_degrees(spec: &DegreeSpec) -> Vec<Rational> {
    let mut rest = spec.degrees.clone();
    let pos = rest.iter().position(|x| x.is_one()).unwrap();
    rest.remove(pos);
    let mut d = vec![int(1)];
    d.extend(rest);
    d
}

/// Closed-form constant for non-identity `r, s, t`, computed from scratch.
pub fn closed_form(spec: &DegreeSpec, r: usize, s: usize, t: usize) -> QuadNum {
    let d = basis_degrees(spec);
    let n = spec.n();
    let m = QuadNum::sqrt_of_rational(&n).unwrap();
    let nn = m.radicand();
    let eps = qn(spec.epsilon as i64, nn);
    let shift = &m + &eps;
    let big_q = &shift * &shift;
    let dq = |i: usize| QuadNum::rational(d[i].clone(), nn);
    let co = |i: usize| QuadNum::rational(&n - int(1) - &d[i], nn);
    let half = QuadNum::rational(rat(1, 2), nn);
    let one = qn(1, nn);
    let bracket = |i: usize| &one + &(&(&dq(i) - &co(i)) / &big_q);
    if r != s && s != t && t != r {
        &(&dq(r) * &dq(s)) / &big_q
    } else if r == s && s != t {
        &(&half * &dq(r)) * &bracket(r)
    } else if r == s && s == t {
        &(&(&-(&half * &co(r)) * &bracket(r)) + &dq(r)) - &one
    } else if t == r {
        // d_r c_{r,s}^r = d_s c_{r,r}^s
        &(&dq(s) * &closed_form(spec, r, r, s)) / &dq(r)
    } else {
        &(&dq(r) * &closed_form(spec, s, s, r)) / &dq(s)
    }
}

/// The 9x9 linear system for the unknowns
/// `(X_rr, X_ss, X_tt, X_rs, X_rt, X_st, X_sr, X_tr, X_ts)`, `X_uv = d_v c_{u,u}^v`.
pub fn system_nine(
    dr: &QuadNum,
    ds: &QuadNum,
    dt: &QuadNum,
    t_val: &QuadNum,
) -> (Vec<Vec<QuadNum>>, Vec<QuadNum>) {
    let nn = dr.radicand();
    let z = || qn(0, nn);
    let o = || qn(1, nn);
    let neg = |x: &QuadNum| -x.clone();
    let mut m = vec![vec![z(); 9]; 9];
    let ones: [[usize; 3]; 3] = [[0, 3, 4], [1, 5, 6], [2, 7, 8]];
    for (row, cols) in ones.iter().enumerate() {
        for &c in cols {
            m[row][c] = o();
        }
    }
    m[3][3] = o();
    m[3][6] = o();
    m[4][4] = o();
    m[4][7] = o();
    m[5][5] = o();
    m[5][8] = o();
    m[6][3] = dt.clone();
    m[6][4] = neg(ds);
    m[7][5] = dr.clone();
    m[7][6] = neg(dt);
    m[8][7] = ds.clone();
    m[8][8] = neg(dr);
    let sq = |d: &QuadNum| &(d * d) - d;
    let rhs = vec![
        sq(dr),
        sq(ds),
        sq(dt),
        &(dr * ds) - t_val,
        &(dt * dr) - t_val,
        &(ds * dt) - t_val,
        z(),
        z(),
        z(),
    ];
    (m, rhs)
}

/// `c_{u,u}^v` and `c_{u,u}^u` from the solved system, written in terms of
/// `T`, `d_u`, `d'_u`, `d_t`, `d_v` and `m = d_r d_s d_t`.
pub fn solved_forms(
    t_val: &QuadNum,
    du: &QuadNum,
    du_co: &QuadNum,
    dt: &QuadNum,
    dv: &QuadNum,
    m: &QuadNum,
) -> (QuadNum, QuadNum) {
    let nn = du.radicand();
    let two = qn(2, nn);
    let off = &(&(t_val * &(du - du_co)) / &(&two * &(dt * dv))) + &(du / &two);
    let diag = &(&(t_val * &(du_co * &(du_co - du))) / &(&two * m))
        + &(&(&(&(&two * du) - &two) - du_co) / &two);
    (off, diag)
}

/// Cyclic group algebra of order 5 from permutation matrices (not symmetric).
pub fn z5_algebra() -> CAlgebra {
    let mats: Vec<IntMatrix> = (0..5)
        .map(|k| {
            let mut m = IntMatrix::zeros(5);
            for i in 0..5 {
                m.set(i, (i + k) % 5, 1);
            }
            m
        })
        .collect();
    algebra_from_matrices(&mats, (0..5).map(|k| format!("g{k}")).collect()).unwrap()
}

/// Distance scheme of the 6-cycle: symmetric, 4-dimensional.
pub fn c6_algebra() -> CAlgebra {
    let mats: Vec<IntMatrix> = (0..4)
        .map(|dist| {
            let mut m = IntMatrix::zeros(6);
            for i in 0..6usize {
                for j in 0..6usize {
                    let d = (i as i64 - j as i64).rem_euclid(6) as usize;
                    if d.min(6 - d) == dist {
                        m.set(i, j, 1);
                    }
                }
            }
            m
        })
        .collect();
    algebra_from_matrices(&mats, (0..4).map(|k| format!("d{k}")).collect()).unwrap()
}

fn gf4_mul(a: usize, b: usize) -> usize {
    const LOG: [usize; 4] = [0, 0, 1, 2];
    const EXP: [usize; 3] = [1, 2, 3];
    if a == 0 || b == 0 {
        0
    } else {
        EXP[(LOG[a] + LOG[b]) % 3]
    }
}

/// Incidence file of AG(2, 4), with GF(4) = {0, 1, w, w+1} coded as 0..4.
pub fn gf4_plane_json() -> String {
    let mut lines = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            lines.push(
                (0..4)
                    .map(|x| x * 4 + (gf4_mul(a, x) ^ b))
                    .collect::<Vec<_>>(),
            );
        }
    }
    for c in 0..4 {
        lines.push((0..4).map(|y| c * 4 + y).collect());
    }
    serde_json::json!({ "q": 4, "lines": lines }).to_string()
}

/// PG(2, 3) from the difference set {0, 1, 3, 9} mod 13.
pub fn projective_plane_json() -> String {
    let lines: Vec<Vec<usize>> = (0..13)
        .map(|i| [0, 1, 3, 9].iter().map(|d| (i + d) % 13).collect())
        .collect();
    serde_json::json!({ "q": 3, "lines": lines }).to_string()
}

pub fn sum(xs: &[QuadNum], n: u64) -> QuadNum {
    xs.iter().fold(qn(0, n), |acc, x| &acc + x)
}
