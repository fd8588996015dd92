//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

mod common;

use std::time::Instant;

use amorphic::amorphic::{
    construct, generalized_affine_constants, is_amorphic, latin_params, recover_spec, table_region,
    DegreeSpec,
};
use amorphic::calgebra::{table_check, verify_associativity, verify_axioms, CAlgebra};
use amorphic::duality::{characters, dual_from_eigendata, verify_eigendata};
use amorphic::fusion::{
    basis_partitions, bell, fission, fission_generalized_affine, fuse, Partition,
};
use amorphic::linsolve::solve;
use amorphic::qfield::{int, rat, rational_sqrt, QuadNum, Rational};
use amorphic::realization::{affine_spec, build_plane, matrix_algebra};
use common::{basis_degrees, closed_form, qn, random_spec, solved_forms, system_nine};
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// The affine relations written out directly.
fn affine_expected(q: i64, i: usize, j: usize, t: usize) -> i64 {
    match (i, j) {
        (0, j) => (j == t) as i64,
        (i, 0) => (i == t) as i64,
        (i, j) if i == j => match t {
            0 => q - 1,
            t if t == i => q - 2,
            _ => 0,
        },
        (i, j) => (t != 0 && t != i && t != j) as i64,
    }
}

fn criterion_1() -> Outcome {
    let mut timings = Vec::new();
    for q in [2u64, 3, 5, 7, 11] {
        let start = Instant::now();
        let a = matrix_algebra(&build_plane(q).map_err(err)?).map_err(err)?;
        let elapsed = start.elapsed().as_secs_f64();
        let k = a.dim();
        ensure(k == q as usize + 2, || format!("q={q}: dimension {k}"))?;
        for i in 0..k {
            for j in 0..k {
                for t in 0..k {
                    let want = qn(affine_expected(q as i64, i, j, t), a.radicand());
                    ensure(a.c(i, j, t) == &want, || {
                        format!("q={q}: c[{i}][{j}][{t}] = {} != {want}", a.c(i, j, t))
                    })?;
                }
            }
        }
        if q == 11 {
            ensure(elapsed < 5.0, || format!("q=11 took {elapsed:.2}s"))?;
        }
        timings.push(format!("q={q}:{elapsed:.2}s"));
    }
    Ok(timings.join(" "))
}

fn criterion_2() -> Outcome {
    for q in [2u64, 3, 5, 7, 11] {
        let realized = matrix_algebra(&build_plane(q).map_err(err)?).map_err(err)?;
        let closed = construct(&affine_spec(q)).map_err(err)?;
        if let Some(at) = realized.constants_diff(&closed) {
            return Err(format!("q={q}: first difference at {at:?}"));
        }
    }
    Ok("q in {2,3,5,7,11} equal entrywise".into())
}

fn criterion_3() -> Outcome {
    let mut summary = Vec::new();
    for q in [2u64, 3] {
        let a = construct(&affine_spec(q)).map_err(err)?;
        let mut count = 0u128;
        for p in basis_partitions(a.dim(), a.identity()) {
            count += 1;
            let f = fuse(&a, &p)
                .map_err(err)?
                .closed()
                .ok_or_else(|| format!("q={q}: {:?} not closed", p.classes))?;
            ensure(verify_axioms(&f).passed(), || {
                format!("q={q}: {:?} fails the axioms", p.classes)
            })?;
            ensure(is_amorphic(&f).passed(), || {
                format!("q={q}: {:?} fusion not amorphic", p.classes)
            })?;
        }
        let expected = bell(a.dim() - 1);
        ensure(count == expected, || {
            format!("q={q}: {count} partitions, expected {expected}")
        })?;
        summary.push(format!("q={q}: {count}/{expected}"));
    }
    Ok(summary.join(", "))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let runs = 60;
    for run in 0..runs {
        let len = rng.gen_range(4..=8);
        let spec = random_spec(&mut rng, len, false);
        let a = construct(&spec).map_err(err)?;
        let k = a.dim();
        let nn = a.radicand();
        // full tensor against the closed form
        for r in 1..k {
            for s in 1..k {
                for t in 1..k {
                    let want = closed_form(&spec, r, s, t);
                    ensure(a.c(r, s, t) == &want, || {
                        format!("run {run}: c[{r}][{s}][{t}] mismatch")
                    })?;
                }
            }
        }
        // the 4-dim fusion at a random pair
        let mut nonid: Vec<usize> = (1..k).collect();
        nonid.shuffle(&mut rng);
        let (r, s) = (nonid[0], nonid[1]);
        let rest: Vec<usize> = nonid[2..].to_vec();
        let pi = Partition::new(vec![vec![0], vec![r], vec![s], rest], k, 0).map_err(err)?;
        let f = fuse(&a, &pi)
            .map_err(err)?
            .closed()
            .ok_or("pair fusion not closed")?;
        // class indices after canonical ordering
        let idx = |x: usize| pi.classes.iter().position(|c| c.contains(&x)).unwrap();
        let (fr, fs) = (idx(r), idx(s));
        let ft = (1..4).find(|&i| i != fr && i != fs).unwrap();

        let d = basis_degrees(&spec);
        let n = spec.n();
        let dq = |x: Rational| QuadNum::rational(x, nn);
        let (dr, ds) = (dq(d[r].clone()), dq(d[s].clone()));
        let dt = dq(&n - int(1) - &d[r] - &d[s]);
        let m = &(&dr * &ds) * &dt;
        let root = QuadNum::sqrt_of_rational(&n).map_err(err)?;
        let shift = &root + &qn(spec.epsilon as i64, nn);
        let t_val = &m / &(&shift * &shift);

        let nq = dq(n.clone());
        let one = qn(1, nn);
        let n1 = &nq - &one;
        let poly = &(&(&(&n1 * &n1) * &(&t_val * &t_val))
            - &(&(&(&qn(2, nn) * &m) * &(&nq + &one)) * &t_val))
            + &(&m * &m);
        ensure(poly.is_zero(), || {
            format!("run {run}: T = {t_val} is not a root ({poly})")
        })?;
        ensure((&dt * f.c(fr, fs, ft)) == t_val, || {
            format!("run {run}: d_t c_rs^t != T")
        })?;

        let (mat, rhs) = system_nine(&dr, &ds, &dt, &t_val);
        let x = solve(mat, rhs).map_err(err)?;
        // X order: rr, ss, tt, rs, rt, st, sr, tr, ts
        let fused = [fr, fs, ft];
        let degs = [dr.clone(), ds.clone(), dt.clone()];
        let slots = [
            (0, 0, 0),
            (1, 1, 1),
            (2, 2, 2),
            (0, 1, 3),
            (0, 2, 4),
            (1, 2, 5),
            (1, 0, 6),
            (2, 0, 7),
            (2, 1, 8),
        ];
        for (u, v, xi) in slots {
            let c = &x[xi] / &degs[v];
            ensure(f.c(fused[u], fused[u], fused[v]) == &c, || {
                format!(
                    "run {run}: X[{xi}] gives {c}, fusion has {}",
                    f.c(fused[u], fused[u], fused[v])
                )
            })?;
        }
        for (u, v) in [(0usize, 1usize), (1, 0)] {
            let co = &(&nq - &one) - &degs[u];
            let (off, diag) = solved_forms(&t_val, &degs[u], &co, &dt, &degs[v], &m);
            ensure((&x[if u == 0 { 3 } else { 6 }] / &degs[v]) == off, || {
                format!("run {run}: c_uu^v form")
            })?;
            ensure((&x[if u == 0 { 4 } else { 5 }] / &dt) == off, || {
                format!("run {run}: c_uu^t form")
            })?;
            ensure((&x[u] / &degs[u]) == diag, || {
                format!("run {run}: c_uu^u form")
            })?;
        }
    }
    Ok(format!("{runs} random rational specs, |D| in 4..8"))
}

fn fission_round_trip(a: &CAlgebra, d: &Rational) -> Result<(), String> {
    let f = fission(a, d).map_err(err)?;
    let fused = fuse(&f.parent, &f.partition)
        .map_err(err)?
        .closed()
        .ok_or("parent fusion not closed")?;
    let k = a.dim();
    for r in 0..k {
        for s in 0..k {
            for t in 0..k {
                let (x, y) = (
                    a.c(r, s, t),
                    fused.c(f.mapping[r], f.mapping[s], f.mapping[t]),
                );
                ensure(x == y, || format!("({r},{s},{t}): {x} vs {y}"))?;
            }
        }
    }
    Ok(())
}

fn all_integer(a: &CAlgebra) -> bool {
    let k = a.dim();
    (0..k).all(|r| (0..k).all(|s| (0..k).all(|t| a.c(r, s, t).is_integer())))
}

/// Constants `1`, `eps + 1`, `eps (3 - m) + 1` for `|{r,s,t}| = 3, 2, 1`.
fn generalized_affine_expected(parent: &CAlgebra, m: &Rational, eps: i8) -> Result<(), String> {
    let nn = parent.radicand();
    let e = int(eps as i64);
    let vals = [
        QuadNum::rational(&e * (int(3) - m) + Rational::one(), nn),
        QuadNum::rational(&e + Rational::one(), nn),
        qn(1, nn),
    ];
    let k = parent.dim();
    for r in 1..k {
        for s in 1..k {
            for t in 1..k {
                let distinct = 1 + (s != r) as usize + (t != r && t != s) as usize;
                let want = &vals[distinct - 1];
                ensure(parent.c(r, s, t) == want, || {
                    format!("parent c[{r}][{s}][{t}] != {want}")
                })?;
            }
        }
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let affine3 = construct(&affine_spec(3)).map_err(err)?;
    fission_round_trip(&affine3, &int(1)).map_err(|e| format!("affine q=3: {e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..20 {
        let len = rng.gen_range(4..=6);
        let spec = loop {
            let mut d = vec![int(1)];
            d.extend((1..len).map(|_| int(rng.gen_range(1..=4))));
            if let Ok(s) = DegreeSpec::new(d, if rng.gen_bool(0.5) { 1 } else { -1 }) {
                break s;
            }
        };
        let a = construct(&spec).map_err(err)?;
        fission_round_trip(&a, &int(1)).map_err(|e| format!("random spec {i}: {e}"))?;
    }
    let inputs = [
        affine3.clone(),
        construct(&affine_spec(5)).map_err(err)?,
        generalized_affine_constants(&int(16), 1).map_err(err)?,
        construct(&DegreeSpec::from_ints(&[1, 2, 2, 4], -1).map_err(err)?).map_err(err)?,
        construct(&DegreeSpec::from_ints(&[1, 4, 8, 12], -1).map_err(err)?).map_err(err)?,
    ];
    for a in &inputs {
        ensure(all_integer(a), || {
            "integer-constant input has non-integer constants".into()
        })?;
        let spec = recover_spec(a).map_err(err)?;
        let m = rational_sqrt(&spec.n()).ok_or("n not square")?;
        let f = fission_generalized_affine(a).map_err(err)?;
        generalized_affine_expected(&f.parent, &m, spec.epsilon)?;
        fission_round_trip(a, &(&m + int(spec.epsilon as i64)))?;
    }
    Ok(format!(
        "affine q=3, 20 random specs, {} integer-constant inputs",
        inputs.len()
    ))
}

fn criterion_6() -> Outcome {
    let mut points = 0;
    for eps in [-1i8, 1] {
        for nu in 4..=10usize {
            for twice in 1..=20i64 {
                let d = rat(twice, 2);
                let region = table_region(nu, eps, &d).map_err(err)?;
                let a = construct(&DegreeSpec::homogeneous(nu, d.clone(), eps).map_err(err)?)
                    .map_err(err)?;
                let brute = table_check(&a).passed;
                ensure(region.in_region == brute, || {
                    format!(
                        "nu={nu} eps={eps} d={d}: region says {}, constants say {brute}",
                        region.in_region
                    )
                })?;
                points += 1;
            }
        }
    }
    Ok(format!("{points} grid points agree"))
}

fn criterion_7() -> Outcome {
    let mut found = 0;
    let mut examined = 0;
    fn multisets(len: usize, max: i64, start: i64, acc: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if acc.len() == len {
            out.push(acc.clone());
            return;
        }
        for x in start..=max {
            acc.push(x);
            multisets(len, max, x, acc, out);
            acc.pop();
        }
    }
    let mut all = Vec::new();
    for len in 3..=5 {
        multisets(len, 9, 1, &mut Vec::new(), &mut all);
    }
    for degs in all {
        for eps in [-1i8, 1] {
            let mut d = vec![1];
            d.extend(&degs);
            let Ok(spec) = DegreeSpec::from_ints(&d, eps) else {
                continue;
            };
            examined += 1;
            let a = construct(&spec).map_err(err)?;
            if !all_integer(&a) {
                continue;
            }
            found += 1;
            let n = spec.n();
            let m = rational_sqrt(&n)
                .ok_or_else(|| format!("{d:?} eps={eps}: n = {n} not a square"))?;
            let lp = latin_params(&a, true).map_err(err)?;
            ensure(lp.check.passed, || {
                format!("{d:?} eps={eps}: latin identities fail")
            })?;
            let nn = a.radicand();
            let shift = QuadNum::rational(&m + int(eps as i64), nn);
            let degrees = a.degrees().map_err(err)?.d;
            for (r, g) in &lp.g {
                ensure((g * &shift) == degrees[*r], || {
                    format!("{d:?}: d_r != g_r (m+eps)")
                })?;
            }
        }
    }
    ensure(found > 0, || "no integer-constant algebras found".into())?;
    Ok(format!(
        "{found} integer-constant algebras among {examined} specs"
    ))
}

fn criterion_8() -> Outcome {
    let mut inputs: Vec<(String, CAlgebra)> = Vec::new();
    for q in [2u64, 3, 5] {
        inputs.push((
            format!("affine q={q}"),
            construct(&affine_spec(q)).map_err(err)?,
        ));
    }
    for (n, eps) in [(16i64, 1i8), (9, -1), (25, -1)] {
        inputs.push((
            format!("genaffine n={n} eps={eps}"),
            generalized_affine_constants(&int(n), eps).map_err(err)?,
        ));
    }
    for (name, a) in &inputs {
        let base = characters(a, 0).map_err(|e| format!("{name}: {e}"))?;
        let report = verify_eigendata(a, &base).map_err(err)?;
        ensure(report.passed(), || {
            format!("{name}: eigendata check failed")
        })?;
        ensure(report.check("PQ=nI").is_some_and(|c| c.passed), || {
            format!("{name}: PQ != nI")
        })?;
        let dual = dual_from_eigendata(a, &base).map_err(err)?;
        ensure(verify_axioms(&dual).passed(), || {
            format!("{name}: dual fails the axioms")
        })?;
        let (s0, s1) = (
            recover_spec(a).map_err(err)?,
            recover_spec(&dual).map_err(err)?,
        );
        ensure(s0 == s1 && s0.epsilon == s1.epsilon, || {
            format!("{name}: dual spec differs")
        })?;
        for seed in 1..5u64 {
            let other = characters(a, seed * 7919).map_err(err)?;
            ensure(other == base, || {
                format!("{name}: seed {seed} gives a different table")
            })?;
        }
    }
    Ok(format!("{} inputs, 5 seeds each", inputs.len()))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let homogeneous = [
        construct(&affine_spec(3)).map_err(err)?,
        generalized_affine_constants(&int(16), 1).map_err(err)?,
        construct(&DegreeSpec::homogeneous(6, rat(3, 2), 1).map_err(err)?).map_err(err)?,
        construct(&DegreeSpec::homogeneous(5, int(7), -1).map_err(err)?).map_err(err)?,
    ];
    for a in &homogeneous {
        let mut nonid: Vec<usize> = a.nonidentity().collect();
        for _ in 0..100 {
            let orig = nonid.clone();
            nonid.shuffle(&mut rng);
            let mut g: Vec<usize> = (0..a.dim()).collect();
            for (&from, &to) in orig.iter().zip(&nonid) {
                g[from] = to;
            }
            ensure(a.preserved_by(&g), || {
                format!("permutation {g:?} moves a constant")
            })?;
        }
    }
    let mixed =
        construct(&DegreeSpec::from_ints(&[1, 2, 2, 4, 4, 4], -1).map_err(err)?).map_err(err)?;
    let swap = [0, 3, 2, 1, 4, 5];
    let at = mixed
        .first_violation(&swap)
        .ok_or("cross-class transposition preserved every constant")?;
    Ok(format!(
        "400 samples preserved; negative control violated at {at:?}"
    ))
}

fn criterion_10() -> Outcome {
    let neg = construct(&DegreeSpec::from_ints(&[1, 1, 1, 1], 1).map_err(err)?).map_err(err)?;
    ensure(verify_axioms(&neg).passed(), || "axioms fail".into())?;
    let table = table_check(&neg);
    ensure(!table.passed, || "table check passed".into())?;
    let w = table.witnesses.first().ok_or("no witness")?;
    ensure(w.value.as_deref() == Some("-8/9"), || {
        format!("witness value {:?}", w.value)
    })?;

    let mut broken = construct(&affine_spec(3)).map_err(err)?;
    let bump = broken.c(1, 2, 3) + &qn(1, 9);
    *broken.c_mut(1, 2, 3) = bump;
    let mut report = verify_associativity(&broken);
    report.extend(is_amorphic(&broken));
    ensure(!report.passed(), || "perturbation undetected".into())?;
    let pw = report.first_witness().ok_or("no perturbation witness")?;
    Ok(format!(
        "table witness {:?} = -8/9; perturbation witness at {:?}",
        w.indices, pw.indices
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        (
            "affine realization matches the affine relations",
            criterion_1,
        ),
        ("closed form equals realized algebra", criterion_2),
        (
            "every fusion of affine q=2,3 is an amorphic C-algebra",
            criterion_3,
        ),
        ("9x9 system oracle and quadratic in T", criterion_4),
        (
            "fission round trip and generalized affine parent",
            criterion_5,
        ),
        ("table region agrees with constant signs", criterion_6),
        (
            "integer constants force square n and Latin identities",
            criterion_7,
        ),
        ("self-duality and seed independence", criterion_8),
        ("automorphisms of homogeneous algebras", criterion_9),
        ("negative controls", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!(
                "criterion {:>2}: PASS  {name} ({detail}) [{secs:.2}s]",
                i + 1
            ),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
