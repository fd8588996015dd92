//! Partitions of the basis, fusions, exhaustive fusion scans and fission.

use num_integer::Integer;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amorphic::{
    construct, generalized_affine_constants, is_amorphic, recover_spec, DegreeSpec,
};
use crate::calgebra::{CAlgebra, MAX_WITNESSES};
use crate::error::{Error, Result};
use crate::qfield::{rational_sqrt, Rational};

pub const DEFAULT_FUSE_CAP: usize = 12;

/// A partition of the basis in canonical form: every class sorted, classes
/// ordered by their smallest element. The identity forms a class by itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    pub classes: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(mut classes: Vec<Vec<usize>>, dim: usize, e: usize) -> Result<Partition> {
        let mut seen = vec![false; dim];
        for class in &mut classes {
            if class.is_empty() {
                return Err(Error::InvalidPartition("empty class".into()));
            }
            class.sort_unstable();
            for &x in class.iter() {
                if x >= dim {
                    return Err(Error::InvalidPartition(format!("index {x} out of range")));
                }
                if seen[x] {
                    return Err(Error::InvalidPartition(format!("index {x} appears twice")));
                }
                seen[x] = true;
            }
        }
        if let Some(x) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("index {x} is not covered")));
        }
        classes.sort_by_key(|c| c[0]);
        if !classes.iter().any(|c| c == &[e]) {
            return Err(Error::InvalidPartition(
                "the identity must form its own class".into(),
            ));
        }
        Ok(Partition { classes })
    }

    /// All singletons.
    pub fn discrete(dim: usize) -> Partition {
        Partition {
            classes: (0..dim).map(|i| vec![i]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    fn class_of(&self, dim: usize) -> Vec<usize> {
        let mut v = vec![0; dim];
        for (i, c) in self.classes.iter().enumerate() {
            for &x in c {
                v[x] = i;
            }
        }
        v
    }

    pub fn from_json(s: &str, dim: usize, e: usize) -> Result<Partition> {
        let p: Partition = serde_json::from_str(s)?;
        Partition::new(p.classes, dim, e)
    }

    pub fn to_json(&self) -> String {
        crate::canonical_json(&serde_json::to_value(self).expect("partition serializes"))
    }
}

/// Why a partition does not give a subalgebra: the coefficient of class
/// `t_class` in `sigma_R sigma_S` differs at two of its members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NotClosed {
    pub classes: (usize, usize),
    pub t_class: usize,
    pub members: (usize, usize),
    pub values: (String, String),
}

#[derive(Debug, Clone)]
pub enum Fusion {
    Closed(CAlgebra),
    NotClosed(NotClosed),
}

impl Fusion {
    pub fn closed(self) -> Option<CAlgebra> {
        match self {
            Fusion::Closed(a) => Some(a),
            Fusion::NotClosed(_) => None,
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Fusion::Closed(_))
    }
}

/// The `pi`-fusion: basis `sigma_R = sum_{r in R} r` for each class.
pub fn fuse(a: &CAlgebra, pi: &Partition) -> Result<Fusion> {
    let k = a.dim();
    let pi = Partition::new(pi.classes.clone(), k, a.identity())?;
    let class_of = pi.class_of(k);
    let m = pi.len();

    let mut fused_star = vec![0; m];
    for (i, class) in pi.classes.iter().enumerate() {
        let mut img: Vec<usize> = class.iter().map(|&r| a.star()[r]).collect();
        img.sort_unstable();
        let j = class_of[img[0]];
        if pi.classes[j] != img {
            return Err(Error::StarNotPreserved(format!(
                "image of class {class:?} is {img:?}"
            )));
        }
        fused_star[i] = j;
    }

    let mut c = Vec::with_capacity(m * m * m);
    for (i, ci) in pi.classes.iter().enumerate() {
        for (j, cj) in pi.classes.iter().enumerate() {
            let mut acc = vec![a.zero(); k];
            for &r in ci {
                for &s in cj {
                    for (t, slot) in acc.iter_mut().enumerate() {
                        let x = a.c(r, s, t);
                        if !x.is_zero() {
                            *slot = &*slot + x;
                        }
                    }
                }
            }
            for (l, cl) in pi.classes.iter().enumerate() {
                let first = &acc[cl[0]];
                if let Some(&t) = cl[1..].iter().find(|&&t| &acc[t] != first) {
                    return Ok(Fusion::NotClosed(NotClosed {
                        classes: (i, j),
                        t_class: l,
                        members: (cl[0], t),
                        values: (first.to_string(), acc[t].to_string()),
                    }));
                }
                c.push(first.clone());
            }
        }
    }
    let labels = pi
        .classes
        .iter()
        .map(|cl| {
            cl.iter()
                .map(|&r| a.labels()[r].as_str())
                .collect::<Vec<_>>()
                .join("+")
        })
        .collect();
    let e = class_of[a.identity()];
    Ok(Fusion::Closed(CAlgebra::from_flat(
        labels,
        e,
        fused_star,
        a.radicand(),
        c,
    )?))
}

/// Streams the set partitions of `{0, .., m-1}` as restricted growth strings.
#[derive(Debug, Clone)]
pub struct SetPartitions {
    block: Vec<usize>,
    max_prefix: Vec<usize>,
    done: bool,
}

impl SetPartitions {
    pub fn new(m: usize) -> SetPartitions {
        SetPartitions {
            block: vec![0; m],
            max_prefix: vec![0; m],
            done: false,
        }
    }
}

impl Iterator for SetPartitions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.block.clone();
        // advance: rightmost position that can still grow
        let m = self.block.len();
        let mut i = m;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            let bound = self.max_prefix[i - 1] + 1;
            if self.block[i] < bound {
                self.block[i] += 1;
                self.max_prefix[i] = self.max_prefix[i - 1].max(self.block[i]);
                for j in i + 1..m {
                    self.block[j] = 0;
                    self.max_prefix[j] = self.max_prefix[i];
                }
                break;
            }
        }
        Some(out)
    }
}

/// Bell number `B(m)`.
pub fn bell(m: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..m {
        let mut next = vec![*row.last().expect("nonempty")];
        for x in &row {
            let v = next.last().expect("nonempty") + x;
            next.push(v);
        }
        row = next;
    }
    row[0]
}

/// Partitions of the basis that keep the identity alone, in streaming order.
pub fn basis_partitions(dim: usize, e: usize) -> impl Iterator<Item = Partition> {
    let nonid: Vec<usize> = (0..dim).filter(|&r| r != e).collect();
    SetPartitions::new(nonid.len()).map(move |rgs| {
        let blocks = rgs.iter().copied().max().map_or(0, |x| x + 1);
        let mut classes = vec![vec![e]];
        classes.extend((0..blocks).map(|_| Vec::new()));
        for (pos, &b) in rgs.iter().enumerate() {
            classes[b + 1].push(nonid[pos]);
        }
        classes.sort_by_key(|c| c[0]);
        Partition { classes }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FusionFailure {
    pub partition: Vec<Vec<usize>>,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuseAllSummary {
    pub total: u64,
    pub closed: u64,
    /// Closed fusions that are themselves amorphic.
    pub amorphic: u64,
    pub failures: Vec<FusionFailure>,
}

impl FuseAllSummary {
    pub fn all_closed_and_amorphic(&self) -> bool {
        self.closed == self.total && self.amorphic == self.total
    }
}

const CHUNK: usize = 2048;

/// Fuses along every partition (identity kept alone). Partitions are
/// processed in deterministic chunks so the summary does not depend on the
/// size of the thread pool.
pub fn fuse_all(a: &CAlgebra, cap: usize) -> Result<FuseAllSummary> {
    if a.dim() > cap {
        return Err(Error::CapExceeded { size: a.dim(), cap });
    }
    let mut summary = FuseAllSummary {
        total: 0,
        closed: 0,
        amorphic: 0,
        failures: Vec::new(),
    };
    let mut stream = basis_partitions(a.dim(), a.identity()).peekable();
    while stream.peek().is_some() {
        let chunk: Vec<Partition> = stream.by_ref().take(CHUNK).collect();
        let results: Vec<(bool, bool, Option<String>)> = chunk
            .par_iter()
            .map(|p| match fuse(a, p) {
                Ok(Fusion::Closed(f)) => {
                    let rep = is_amorphic(&f);
                    let reason = (!rep.passed()).then(|| "fusion is not amorphic".to_string());
                    (true, rep.passed(), reason)
                }
                Ok(Fusion::NotClosed(w)) => (
                    false,
                    false,
                    Some(format!(
                        "not closed: classes {:?}, members {:?} of class {} give {} vs {}",
                        w.classes, w.members, w.t_class, w.values.0, w.values.1
                    )),
                ),
                Err(err) => (false, false, Some(err.to_string())),
            })
            .collect();
        for (p, (closed, amorphic, reason)) in chunk.into_iter().zip(results) {
            summary.total += 1;
            summary.closed += closed as u64;
            summary.amorphic += amorphic as u64;
            if let Some(reason) = reason {
                if summary.failures.len() < MAX_WITNESSES {
                    summary.failures.push(FusionFailure {
                        partition: p.classes,
                        reason,
                    });
                }
            }
        }
    }
    Ok(summary)
}

/// A homogeneous amorphic parent together with the partition that fuses it
/// back to the input algebra.
#[derive(Debug, Clone)]
pub struct Fission {
    pub parent: CAlgebra,
    pub partition: Partition,
    pub nu: usize,
    pub epsilon: i8,
    /// Input basis index -> class index of the fused parent.
    pub mapping: Vec<usize>,
}

/// Realizes `a` as a fusion of the homogeneous `A_eps(nu, d)`, where every
/// `d_r / d` must be a positive integer and `nu = (n-1)/d + 1`. Parent labels
/// are `e, x1, .., x(nu-1)`; the blocks `C_r` are assigned in basis order.
pub fn fission(a: &CAlgebra, d: &Rational) -> Result<Fission> {
    if !d.is_positive() {
        return Err(Error::Precondition(format!("d = {d} must be positive")));
    }
    let spec = recover_spec(a)?;
    let degrees = a.degrees()?.d;
    let n = spec.n();
    let count = (&n - Rational::one()) / d;
    if !count.is_integer() {
        return Err(Error::Precondition(format!(
            "(n-1)/d = {count} is not an integer"
        )));
    }
    let nu = usize::try_from(count.to_integer() + num_bigint::BigInt::one())
        .map_err(|_| Error::Precondition("parent dimension too large".into()))?;

    let mut sizes = Vec::new();
    for r in a.nonidentity() {
        let dr = degrees[r]
            .as_rational()
            .expect("recover_spec checked rationality");
        let ratio = dr / d;
        if !ratio.is_integer() || !ratio.is_positive() {
            return Err(Error::Precondition(format!(
                "d_r/d = {ratio} is not a positive integer"
            )));
        }
        sizes.push(
            usize::try_from(ratio.to_integer())
                .map_err(|_| Error::Precondition("block too large".into()))?,
        );
    }
    if sizes.iter().sum::<usize>() + 1 != nu {
        return Err(Error::Precondition(
            "block sizes do not add up to nu - 1".into(),
        ));
    }

    let parent_spec = DegreeSpec::homogeneous(nu, d.clone(), spec.epsilon)?;
    let mut labels = vec!["e".to_string()];
    labels.extend((1..nu).map(|i| format!("x{i}")));
    let parent = construct(&parent_spec)?.with_labels(labels)?;

    let mut classes = vec![vec![0]];
    let mut next = 1;
    for &sz in &sizes {
        classes.push((next..next + sz).collect());
        next += sz;
    }
    let partition = Partition::new(classes, nu, 0)?;

    let fused = match fuse(&parent, &partition)? {
        Fusion::Closed(f) => f,
        Fusion::NotClosed(w) => {
            return Err(Error::Precondition(format!(
                "parent fusion not closed: {w:?}"
            )));
        }
    };
    let mut mapping = vec![0; a.dim()];
    for (pos, r) in a.nonidentity().enumerate() {
        mapping[r] = pos + 1;
    }
    let k = a.dim();
    for r in 0..k {
        for s in 0..k {
            for t in 0..k {
                let lhs = a.c(r, s, t).with_radicand(fused.radicand())?;
                if fused.c(mapping[r], mapping[s], mapping[t]) != &lhs {
                    return Err(Error::Precondition(format!(
                        "fused parent differs from input at ({r}, {s}, {t})"
                    )));
                }
            }
        }
    }
    Ok(Fission {
        parent,
        partition,
        nu,
        epsilon: spec.epsilon,
        mapping,
    })
}

/// Fission with `d = sqrt(n) + eps`; for integer-constant inputs the parent
/// is generalized affine, which is checked entrywise.
pub fn fission_generalized_affine(a: &CAlgebra) -> Result<Fission> {
    let spec = recover_spec(a)?;
    let n = spec.n();
    let m = rational_sqrt(&n)
        .ok_or_else(|| Error::Precondition(format!("n = {n} is not a perfect square")))?;
    let d = m + Rational::from_integer(spec.epsilon.into());
    let f = fission(a, &d)?;
    let ga = generalized_affine_constants(&n, spec.epsilon)?;
    if let Some(at) = ga.constants_diff(&f.parent) {
        return Err(Error::Precondition(format!(
            "parent is not generalized affine, first difference at {at:?}"
        )));
    }
    Ok(f)
}

/// `d = 1/N` with `N` the lcm of the degree denominators.
pub fn rational_fission_witness(a: &CAlgebra) -> Result<Rational> {
    let mut lcm = num_bigint::BigInt::one();
    for x in a.degrees()?.d {
        let r = x
            .as_rational()
            .ok_or_else(|| Error::Precondition(format!("irrational degree {x}")))?;
        lcm = lcm.lcm(r.denom());
    }
    Ok(Rational::new(num_bigint::BigInt::one(), lcm))
}

/// The fusion with classes `{e}` and `R#`.
pub fn coarsest(a: &CAlgebra) -> Result<CAlgebra> {
    let rest: Vec<usize> = a.nonidentity().collect();
    let mut classes = vec![vec![a.identity()]];
    if !rest.is_empty() {
        classes.push(rest);
    }
    let p = Partition::new(classes, a.dim(), a.identity())?;
    fuse(a, &p)?
        .closed()
        .ok_or_else(|| Error::Precondition("two-class fusion is not closed".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amorphic::DegreeSpec;
    use crate::calgebra::verify_axioms;
    use crate::qfield::{int, rat, QuadNum};

    fn affine(q: i64) -> CAlgebra {
        let mut d = vec![1];
        d.extend(std::iter::repeat_n(q - 1, (q + 1) as usize));
        construct(&DegreeSpec::from_ints(&d, -1).unwrap()).unwrap()
    }

    #[test]
    fn partition_canonical_form() {
        let p = Partition::new(vec![vec![3, 1], vec![0], vec![2]], 4, 0).unwrap();
        assert_eq!(p.classes, vec![vec![0], vec![1, 3], vec![2]]);
        assert!(Partition::new(vec![vec![0, 1], vec![2]], 3, 0).is_err());
        assert!(Partition::new(vec![vec![0], vec![1]], 3, 0).is_err());
        assert!(Partition::new(vec![vec![0], vec![1, 1], vec![2]], 3, 0).is_err());
        assert_eq!(p.to_json(), r#"{"classes":[[0],[1,3],[2]]}"#);
    }

    #[test]
    fn set_partition_counts() {
        for m in 0..8 {
            assert_eq!(SetPartitions::new(m).count() as u128, bell(m), "m={m}");
        }
        assert_eq!(bell(11), 678570);
        assert_eq!(bell(12), 4213597);
    }

    #[test]
    fn two_class_fusion() {
        let a = affine(3);
        let f = coarsest(&a).unwrap();
        assert_eq!(f.dim(), 2);
        let d = f.degrees().unwrap().d;
        assert_eq!(d[1], QuadNum::from_int(8, 9));
        assert!(verify_axioms(&f).passed());
    }

    #[test]
    fn discrete_fusion_is_identity() {
        let a = affine(3);
        let f = fuse(&a, &Partition::discrete(5)).unwrap().closed().unwrap();
        assert_eq!(f.constants_diff(&a), None);
    }

    #[test]
    fn affine_three_pair_fusion() {
        let a = affine(3);
        let p = Partition::new(vec![vec![0], vec![1], vec![2], vec![3, 4]], 5, 0).unwrap();
        let f = fuse(&a, &p).unwrap().closed().unwrap();
        assert_eq!(f.labels()[3], "r3+r4");
        assert_eq!(
            recover_spec(&f).unwrap(),
            DegreeSpec::from_ints(&[1, 2, 2, 4], -1).unwrap()
        );
    }

    #[test]
    fn fuse_all_affine() {
        let s2 = fuse_all(&affine(2), DEFAULT_FUSE_CAP).unwrap();
        assert_eq!((s2.total, s2.closed), (5, 5));
        let s3 = fuse_all(&affine(3), DEFAULT_FUSE_CAP).unwrap();
        assert_eq!((s3.total, s3.closed, s3.amorphic), (15, 15, 15));
        assert!(s3.failures.is_empty());
        assert!(matches!(
            fuse_all(&affine(3), 4),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn fission_of_affine_three() {
        let a = affine(3);
        let f = fission(&a, &int(1)).unwrap();
        assert_eq!(f.nu, 9);
        assert_eq!(
            f.partition.classes[1..]
                .iter()
                .map(Vec::len)
                .collect::<Vec<_>>(),
            vec![2, 2, 2, 2]
        );
        assert_eq!(f.parent.labels()[1], "x1");
        let identity = fission(&a, &int(2)).unwrap();
        assert_eq!(identity.nu, 5);
        assert_eq!(identity.partition, Partition::discrete(5));
        assert!(fission(&a, &int(3)).is_err());
    }

    #[test]
    fn rational_witness() {
        let spec = DegreeSpec::new(vec![int(1), rat(3, 2), rat(3, 2), int(3)], -1).unwrap();
        let a = construct(&spec).unwrap();
        let d = rational_fission_witness(&a).unwrap();
        assert_eq!(d, rat(1, 2));
        let f = fission(&a, &d).unwrap();
        assert_eq!(f.nu, 13);
        assert_eq!(rational_fission_witness(&affine(3)).unwrap(), int(1));
    }

    #[test]
    fn generalized_affine_parent() {
        let a = construct(&DegreeSpec::from_ints(&[1, 2, 2, 4], -1).unwrap()).unwrap();
        let f = fission_generalized_affine(&a).unwrap();
        assert_eq!(f.nu, 5);
    }
}
