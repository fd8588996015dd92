//! Affine planes, their parallel-class adjacency matrices and the algebra
//! spanned by them.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amorphic::{construct, is_amorphic, DegreeSpec};
use crate::calgebra::{CAlgebra, CheckResult, VerificationReport};
use crate::error::{Error, Result};
use crate::qfield::QuadNum;

pub const DEFAULT_Q_CAP: u64 = 11;

/// Dense square integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> IntMatrix {
        IntMatrix {
            n,
            data: vec![0; n * n],
        }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<IntMatrix> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed("matrix is not square".into()));
        }
        Ok(IntMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.n + j] = v;
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn is_zero_one(&self) -> bool {
        self.data.iter().all(|&x| x == 0 || x == 1)
    }

    pub fn row_sum(&self, i: usize) -> i64 {
        self.data[i * self.n..(i + 1) * self.n].iter().sum()
    }

    /// Checked product. Zero entries of `self` are skipped, which keeps the
    /// sparse 0/1 basis matrices cheap.
    pub fn checked_mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.n != other.n {
            return Err(Error::Malformed("matrix size mismatch".into()));
        }
        let n = self.n;
        let overflow = || Error::Malformed("integer overflow in matrix product".into());
        let mut out = IntMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if b != 0 {
                        let prod = a.checked_mul(b).ok_or_else(overflow)?;
                        let cell = &mut out.data[i * n + j];
                        *cell = cell.checked_add(prod).ok_or_else(overflow)?;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// A finite affine plane of order `q`. Points are `0..q^2`, each line is a
/// sorted list of `q` points, and `parallel_classes` lists line indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffinePlane {
    pub q: usize,
    pub points: usize,
    pub lines: Vec<Vec<usize>>,
    pub parallel_classes: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct PlaneFile {
    q: usize,
    lines: Vec<Vec<usize>>,
}

pub fn is_prime(q: u64) -> bool {
    q >= 2
        && (2..)
            .take_while(|d| d * d <= q)
            .all(|d| !q.is_multiple_of(d))
}

/// `AG(2, q)` over the prime field: points `(x, y) -> x*q + y`, lines
/// `y = a x + b` and `x = c`, grouped by slope.
pub fn build_plane(q: u64) -> Result<AffinePlane> {
    if !is_prime(q) {
        return Err(Error::Plane(format!(
            "q = {q} is not prime; other orders must be loaded from an incidence file"
        )));
    }
    let q = q as usize;
    let mut lines = Vec::with_capacity(q * q + q);
    let mut classes = Vec::with_capacity(q + 1);
    for a in 0..q {
        let mut class = Vec::with_capacity(q);
        for b in 0..q {
            let mut line: Vec<usize> = (0..q).map(|x| x * q + (a * x + b) % q).collect();
            line.sort_unstable();
            class.push(lines.len());
            lines.push(line);
        }
        classes.push(class);
    }
    let mut vertical = Vec::with_capacity(q);
    for c in 0..q {
        vertical.push(lines.len());
        lines.push((0..q).map(|y| c * q + y).collect());
    }
    classes.push(vertical);
    let plane = AffinePlane {
        q,
        points: q * q,
        lines,
        parallel_classes: classes,
    };
    plane.check_axioms()?;
    plane.check_counts()?;
    Ok(plane)
}

impl AffinePlane {
    /// Reads `{"q": .., "lines": [[..], ..]}` and infers the parallel
    /// classes from disjointness.
    pub fn from_json(s: &str) -> Result<AffinePlane> {
        let file: PlaneFile = serde_json::from_str(s)?;
        let mut lines = file.lines;
        for l in &mut lines {
            l.sort_unstable();
            if l.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Plane(format!("line {l:?} repeats a point")));
            }
        }
        let points = lines.iter().flatten().max().map_or(0, |&p| p + 1);
        let mut plane = AffinePlane {
            q: file.q,
            points,
            lines,
            parallel_classes: Vec::new(),
        };
        plane.check_axioms()?;
        plane.parallel_classes = plane.infer_classes()?;
        plane.check_counts()?;
        Ok(plane)
    }

    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(PlaneFile {
            q: self.q,
            lines: self.lines.clone(),
        })
        .expect("plane serializes");
        crate::canonical_json(&v)
    }

    fn line_sets(&self) -> Vec<BTreeSet<usize>> {
        self.lines
            .iter()
            .map(|l| l.iter().copied().collect())
            .collect()
    }

    /// (A1) two points lie on a unique line, (A2) through a point off a line
    /// there is a unique parallel, (A3) some three points are not collinear.
    pub fn check_axioms(&self) -> Result<()> {
        let p = self.points;
        let mut through = vec![vec![0u32; p]; p];
        for l in &self.lines {
            for (i, &u) in l.iter().enumerate() {
                for &v in &l[i + 1..] {
                    through[u][v] += 1;
                }
            }
        }
        for u in 0..p {
            for v in u + 1..p {
                if through[u][v] != 1 {
                    return Err(Error::Plane(format!(
                        "(A1) points {u} and {v} lie on {} lines",
                        through[u][v]
                    )));
                }
            }
        }
        let sets = self.line_sets();
        for (li, l) in sets.iter().enumerate() {
            for x in (0..p).filter(|x| !l.contains(x)) {
                let parallels = sets
                    .iter()
                    .filter(|m| m.contains(&x) && m.is_disjoint(l))
                    .count();
                if parallels != 1 {
                    return Err(Error::Plane(format!(
                        "(A2) point {x} off line {li} has {parallels} parallels"
                    )));
                }
            }
        }
        let spans = sets.iter().any(|l| l.len() < p) && p >= 3;
        if !spans {
            return Err(Error::Plane("(A3) all points are collinear".into()));
        }
        Ok(())
    }

    fn infer_classes(&self) -> Result<Vec<Vec<usize>>> {
        let sets = self.line_sets();
        let m = sets.len();
        let mut class_of = vec![usize::MAX; m];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for i in 0..m {
            if class_of[i] != usize::MAX {
                continue;
            }
            let class: Vec<usize> = (0..m)
                .filter(|&j| j == i || sets[i].is_disjoint(&sets[j]))
                .collect();
            for &j in &class {
                if class_of[j] != usize::MAX {
                    return Err(Error::Plane(format!(
                        "parallelism is not transitive at line {j}"
                    )));
                }
                class_of[j] = classes.len();
            }
            classes.push(class);
        }
        for i in 0..m {
            for j in i + 1..m {
                if (class_of[i] == class_of[j]) != sets[i].is_disjoint(&sets[j]) {
                    return Err(Error::Plane(format!(
                        "parallelism is not transitive: lines {i} and {j}"
                    )));
                }
            }
        }
        Ok(classes)
    }

    fn check_counts(&self) -> Result<()> {
        let q = self.q;
        if self.points != q * q {
            return Err(Error::Plane(format!(
                "{} points, expected q^2 = {}",
                self.points,
                q * q
            )));
        }
        if self.lines.len() != q * q + q {
            return Err(Error::Plane(format!(
                "{} lines, expected q^2 + q",
                self.lines.len()
            )));
        }
        if let Some(l) = self.lines.iter().find(|l| l.len() != q) {
            return Err(Error::Plane(format!(
                "line {l:?} does not have q = {q} points"
            )));
        }
        if self.parallel_classes.len() != q + 1
            || self.parallel_classes.iter().any(|c| c.len() != q)
        {
            return Err(Error::Plane(
                "expected q + 1 parallel classes of q lines".into(),
            ));
        }
        Ok(())
    }

    /// `r_0 = I` followed by one adjacency matrix per parallel class.
    pub fn basis_matrices(&self) -> Vec<IntMatrix> {
        let p = self.points;
        let mut out = vec![IntMatrix::identity(p)];
        for class in &self.parallel_classes {
            let mut m = IntMatrix::zeros(p);
            for &li in class {
                let l = &self.lines[li];
                for &u in l {
                    for &v in l {
                        if u != v {
                            m.set(u, v, 1);
                        }
                    }
                }
            }
            out.push(m);
        }
        out
    }
}

/// Structure constants of the span of 0/1 matrices whose supports partition
/// the all-ones matrix, one of them the identity.
pub fn algebra_from_matrices(basis: &[IntMatrix], labels: Vec<String>) -> Result<CAlgebra> {
    let k = basis.len();
    if k == 0 || labels.len() != k {
        return Err(Error::Malformed(
            "basis and labels must be nonempty and of equal length".into(),
        ));
    }
    let p = basis[0].dim();
    if basis.iter().any(|m| m.dim() != p || !m.is_zero_one()) {
        return Err(Error::Malformed(
            "basis matrices must be 0/1 of equal size".into(),
        ));
    }
    let mut owner = vec![usize::MAX; p * p];
    for (idx, m) in basis.iter().enumerate() {
        for (cell, &v) in m.data.iter().enumerate() {
            if v == 1 {
                if owner[cell] != usize::MAX {
                    return Err(Error::Malformed(format!(
                        "supports of basis matrices {} and {idx} overlap",
                        owner[cell]
                    )));
                }
                owner[cell] = idx;
            }
        }
    }
    if let Some(cell) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(Error::Malformed(format!(
            "entry ({}, {}) is covered by no basis matrix",
            cell / p,
            cell % p
        )));
    }
    let id = IntMatrix::identity(p);
    let e = basis
        .iter()
        .position(|m| m == &id)
        .ok_or_else(|| Error::Malformed("no basis matrix is the identity".into()))?;
    let star = basis
        .iter()
        .map(|m| {
            let t = m.transpose();
            basis
                .iter()
                .position(|b| b == &t)
                .ok_or_else(|| Error::Malformed("basis is not closed under transposition".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    // first support cell of each basis matrix
    let mut rep = vec![usize::MAX; k];
    for (cell, &o) in owner.iter().enumerate() {
        if rep[o] == usize::MAX {
            rep[o] = cell;
        }
    }
    let n = basis[e].dim() as u64;
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    let rows: Vec<Vec<i64>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let prod = basis[i].checked_mul(&basis[j])?;
            let coeffs: Vec<i64> = rep.iter().map(|&cell| prod.data[cell]).collect();
            for (cell, &o) in owner.iter().enumerate() {
                if prod.data[cell] != coeffs[o] {
                    return Err(Error::NotInSpan(format!(
                        "{} {}: entry ({}, {}) is {} but {} elsewhere on the support of {}",
                        labels[i],
                        labels[j],
                        cell / p,
                        cell % p,
                        prod.data[cell],
                        coeffs[o],
                        labels[o]
                    )));
                }
            }
            Ok(coeffs)
        })
        .collect::<Result<Vec<_>>>()?;
    let c = rows
        .into_iter()
        .flatten()
        .map(|v| QuadNum::from_int(v, n))
        .collect();
    CAlgebra::from_flat(labels, e, star, n, c)
}

/// The affine C-algebra of a plane, with the relations
/// `r_i^2 = (q-1) r_0 + (q-2) r_i` and `r_i r_j = sum_{k != 0,i,j} r_k`
/// checked on the extracted constants.
pub fn matrix_algebra(plane: &AffinePlane) -> Result<CAlgebra> {
    let basis = plane.basis_matrices();
    let k = basis.len();
    let mut labels = vec!["e".to_string()];
    labels.extend((1..k).map(|i| format!("r{i}")));
    let a = algebra_from_matrices(&basis, labels)?;
    let q = plane.q as i64;
    for i in 1..k {
        for j in 1..k {
            for t in 0..k {
                let expected = if i == j {
                    match t {
                        0 => q - 1,
                        t if t == i => q - 2,
                        _ => 0,
                    }
                } else {
                    (t != 0 && t != i && t != j) as i64
                };
                if a.c(i, j, t) != &QuadNum::from_int(expected, a.radicand()) {
                    return Err(Error::NotInSpan(format!(
                        "coefficient of r{t} in r{i} r{j} is {}, expected {expected}",
                        a.c(i, j, t)
                    )));
                }
            }
        }
    }
    Ok(a)
}

pub fn affine_spec(q: u64) -> DegreeSpec {
    let mut d = vec![1];
    d.extend(std::iter::repeat_n(q as i64 - 1, q as usize + 1));
    DegreeSpec::from_ints(&d, -1).expect("affine degrees are valid")
}

/// Compares the realized algebra of `AG(2, q)` with the closed form for
/// `{1, q-1 (q+1 times)}`, `epsilon = -1`, and runs the amorphic criterion
/// on both.
pub fn cross_validate(q: u64, cap: u64) -> Result<VerificationReport> {
    if q > cap {
        return Err(Error::CapExceeded {
            size: q as usize,
            cap: cap as usize,
        });
    }
    let realized = matrix_algebra(&build_plane(q)?)?;
    let closed = construct(&affine_spec(q))?;
    let mut cmp = CheckResult::new("realized-equals-closed-form");
    if let Some((r, s, t)) = realized.constants_diff(&closed) {
        cmp.fail(
            vec![r, s, t],
            "matrix constant differs from closed form",
            Some(format!("{} vs {}", realized.c(r, s, t), closed.c(r, s, t))),
        );
    }
    let mut report = VerificationReport::single(cmp);
    for (name, alg) in [("realized", &realized), ("closed-form", &closed)] {
        for mut check in is_amorphic(alg).checks {
            check.name = format!("{name}-{}", check.name);
            report.checks.push(check);
        }
    }
    Ok(report)
}
