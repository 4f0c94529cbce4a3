//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use circle_ramsey::beatty::{
    balanced_check, fraenkel_diagnostics, partition_check, partitioning_triples, power_pair,
    BalanceVerdict, PartitionVerdict,
};
use circle_ramsey::colouring::{Colour, Colouring};
use circle_ramsey::detector::{count_copies, detect_bruteforce, detect_dp};
use circle_ramsey::doubling::{orbit_from_uniform, prefix_permutation};
use circle_ramsey::majority::{
    majority_colouring, majority_verify, MajorityParams, MajorityVerdict,
};
use circle_ramsey::robust::{
    nearly_ramsey_finite_check, strongly_suitable_search, ForcingVerdict, SuitableSearch,
};
use circle_ramsey::satgen::{resolve_solver, solve_power, SolverStatus};
use circle_ramsey::tuple::{discretize, power_instance, power_tuple};
use circle_ramsey::uniform::{
    jump_counts, nonpower_witness, residue_check, residue_sweep, uniform_copy, JumpResult,
};
use circle_ramsey::{DistanceTuple, Rational};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

// Tolerances.
const SAT_LIMIT: Duration = Duration::from_secs(60);
const SAT_TIMEOUT_EACH: Duration = Duration::from_secs(60);
const ORACLE_MIN_SAMPLES: usize = 1000;
const RESIDUE_MAX_K: u32 = 14;
const RESIDUE_LIMIT: Duration = Duration::from_secs(600);
const CROSS_MAX_K: u32 = 6;
const CROSS_MAX_T: u64 = 50;
const WITNESS_SAMPLES: usize = 20;
const WITNESS_MAX_T: u64 = 500;
const POWER_MAX_T: u64 = 50;
const BEATTY_LIMIT: u64 = 100_000;
const FRAENKEL_MAX_DEN: i128 = 8;
const FRAENKEL_SCREEN: u64 = 500;
const JUMP_MAX_T: u64 = 10_000;
const DOUBLING_MAX_K: u32 = 12;
const PARITY_SAMPLES: usize = 10_000;
const FORCING_LIMIT: Duration = Duration::from_secs(1);
const SUITABLE_MAX_T: u64 = 500;
const MAJORITY_LIMIT: Duration = Duration::from_secs(300);
const SEED: u64 = 20_240_601;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn r(n: i128, d: i128) -> Rational {
    Rational::new(n, d).unwrap()
}

fn tuple(xs: &[(i128, i128)]) -> DistanceTuple {
    DistanceTuple::new(xs.iter().map(|&(n, d)| r(n, d)).collect()).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sat_verification() -> Verdict {
    let solver = resolve_solver(None)
        .ok_or("no SAT solver found (set RAMSEY_SAT_SOLVER or install varisat)")?;
    let start = Instant::now();
    for k in 3..=5 {
        let out = solve_power(k, &solver, SAT_TIMEOUT_EACH).map_err(|e| format!("k = {k}: {e}"))?;
        ensure(out.status == SolverStatus::Unsat, || {
            format!("k = {k}: {:?}", out.status)
        })?;
    }
    let took = start.elapsed();
    ensure(took < SAT_LIMIT, || format!("took {took:?}"))?;
    Ok(format!("k = 3, 4, 5 UNSAT in {:.2}s", took.as_secs_f64()))
}

fn oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let instances = [(7u64, 3u32), (14, 3), (15, 4), (31, 5), (63, 6)];
    let per = ORACLE_MIN_SAMPLES.div_ceil(instances.len());
    let mut total = 0;
    let mut found = 0;
    for (n, k) in instances {
        let inst = discretize(&power_tuple(k).unwrap(), n / ((1 << k) - 1)).unwrap();
        let cs: Vec<Colouring> = (0..per)
            .map(|_| {
                let p: f64 = rng.gen_range(0.1..0.9);
                let black = rng.gen_bool(0.2).then(|| rng.gen_range(0..n as usize));
                Colouring::new((0..n).map(|_| rng.gen_bool(p)).collect(), black).unwrap()
            })
            .collect();
        let bad: Vec<String> = cs
            .par_iter()
            .filter_map(|c| {
                let b = detect_bruteforce(c, &inst, None).unwrap();
                let d = detect_dp(c, &inst).unwrap();
                let ok = b == d && b.as_ref().is_none_or(|w| w.validate(c, &inst));
                (!ok).then(|| c.letters())
            })
            .collect();
        ensure(bad.is_empty(), || {
            format!("n = {n}: mismatch on {}", bad[0])
        })?;
        found += cs
            .iter()
            .filter(|c| detect_dp(c, &inst).unwrap().is_some())
            .count();
        total += cs.len();
    }
    Ok(format!(
        "{total} colourings, 0 mismatches, {found} with a copy"
    ))
}

fn uniform_residue() -> Verdict {
    let start = Instant::now();
    let mut checked = 0u64;
    for k in 3..=RESIDUE_MAX_K {
        let max_t = (1u64 << (k + 1)) - 2;
        let failures = residue_sweep(k, max_t).map_err(|e| e.to_string())?;
        ensure(failures.is_empty(), || {
            format!("k = {k}: fails for t = {:?}", failures)
        })?;
        checked += max_t;
    }
    let took = start.elapsed();
    ensure(took < RESIDUE_LIMIT, || format!("took {took:?}"))?;
    let mut cross = 0;
    for k in 3..=CROSS_MAX_K {
        let d = power_tuple(k).unwrap();
        for t in 1..=CROSS_MAX_T {
            let residue = residue_check(k, t).unwrap().is_some();
            let detector = uniform_copy(&d, t).unwrap().is_some();
            ensure(residue == detector, || {
                format!("k = {k}, t = {t}: residue {residue}, detector {detector}")
            })?;
            cross += 1;
        }
    }
    Ok(format!(
        "{checked} (k, t) pairs in {:.2}s; {cross} detector cross-checks agree",
        took.as_secs_f64()
    ))
}

/// All tuples of `k` parts over a common denominator `q <= max_q`.
fn rational_tuples(k: usize, max_q: i128) -> Vec<DistanceTuple> {
    fn parts(left: i128, k: usize, cap: i128, cur: &mut Vec<i128>, out: &mut Vec<Vec<i128>>) {
        if k == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for p in (1..=cap.min(left)).rev() {
            cur.push(p);
            parts(left - p, k - 1, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for q in 1..=max_q {
        let mut ps = Vec::new();
        parts(q, k, q, &mut Vec::new(), &mut ps);
        for p in ps {
            out.push(DistanceTuple::new(p.iter().map(|&x| r(x, q)).collect()).unwrap());
        }
    }
    out.sort_by_key(|d| format!("{d:?}"));
    out.dedup();
    out
}

fn instance_pipeline() -> Verdict {
    let half = tuple(&[(1, 2), (1, 3), (1, 6)]);
    let t = nonpower_witness(&half, WITNESS_MAX_T).unwrap();
    ensure(t == Some(1), || format!("(1/2,1/3,1/6) gave {t:?}"))?;
    let mut pool: Vec<DistanceTuple> = rational_tuples(3, 12)
        .into_iter()
        .chain(rational_tuples(4, 12))
        .filter(|d| !d.is_power() && *d != half)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    pool.shuffle(&mut rng);
    let sample: Vec<DistanceTuple> = std::iter::once(half)
        .chain(pool.into_iter().take(WITNESS_SAMPLES - 1))
        .collect();
    let mut max_found = 0;
    for d in &sample {
        let t = nonpower_witness(d, WITNESS_MAX_T).unwrap();
        let t = t.ok_or_else(|| format!("no t <= {WITNESS_MAX_T} for {:?}", d.distances()))?;
        max_found = max_found.max(t);
    }
    for k in [3, 4] {
        let t = nonpower_witness(&power_tuple(k).unwrap(), POWER_MAX_T).unwrap();
        ensure(t.is_none(), || {
            format!("power tuple k = {k} gave t = {t:?}")
        })?;
    }
    Ok(format!(
        "{} non-power tuples all have a witness (largest t = {max_found}); powers k = 3, 4 have none",
        sample.len()
    ))
}

fn beatty_suite() -> Verdict {
    for k in 3..=10 {
        let pair = power_pair(k).unwrap();
        let v = partition_check(&pair, BEATTY_LIMIT).unwrap();
        ensure(v == PartitionVerdict::Ok, || format!("k = {k}: {v}"))?;
        let rep = fraenkel_diagnostics(&pair, BEATTY_LIMIT).unwrap();
        ensure(
            rep.exact
                && rep.symmetric
                && rep.balanced == BalanceVerdict::Balanced
                && rep.consecutive_condition.iter().all(|&b| b)
                && rep.densities_match_alphas
                && rep.power,
            || format!("k = {k}: diagnostics {rep:?}"),
        )?;
        if k == 3 {
            ensure(rep.word.letters() == [1, 2, 1, 3, 1, 2, 1], || {
                format!("word {:?}", rep.word.letters())
            })?;
            ensure(rep.densities == [r(4, 7), r(2, 7), r(1, 7)], || {
                format!("densities {:?}", rep.densities)
            })?;
            ensure(
                balanced_check(&rep.word) == BalanceVerdict::Balanced,
                || "word unbalanced".into(),
            )?;
        }
    }
    let triples = partitioning_triples(FRAENKEL_MAX_DEN, FRAENKEL_SCREEN).unwrap();
    ensure(triples == vec![power_pair(3).unwrap()], || {
        format!("triples found: {triples:?}")
    })?;
    Ok(format!(
        "power pairs k = 3..10 partition [0, {BEATTY_LIMIT}); k = 3 triples with denominators <= {FRAENKEL_MAX_DEN}: only the power"
    ))
}

fn jump_identity() -> Verdict {
    for k in 3..=10u32 {
        let d = power_tuple(k).unwrap();
        let m = (1i128 << k) - 1;
        let bad = (1..=JUMP_MAX_T).into_par_iter().find_any(|&t| {
            // integer nearest rounding of t * 2^(k-i) / m, never a tie since m is odd
            let oracle: Vec<i128> = (1..=k)
                .map(|i| (2 * t as i128 * (1 << (k - i)) + m) / (2 * m))
                .collect();
            match jump_counts(&d, t) {
                Ok(JumpResult::Counts {
                    counts,
                    identity_holds,
                }) => {
                    !(identity_holds
                        && counts == oracle
                        && oracle.iter().sum::<i128>() == t as i128)
                }
                _ => true,
            }
        });
        ensure(bad.is_none(), || format!("k = {k}, t = {bad:?}"))?;
    }
    Ok(format!(
        "k = 3..10, t <= {JUMP_MAX_T}: never blocked, sum equals t"
    ))
}

fn doubling_equivalence() -> Verdict {
    let mut pairs = 0;
    for k in 3..=DOUBLING_MAX_K {
        let max_t = (1u64 << (k + 1)) - 2;
        let bad = (1..=max_t).into_par_iter().find_any(|&t| {
            let orbit = orbit_from_uniform(k, t).unwrap();
            let p = prefix_permutation(orbit.xs()).unwrap().is_some();
            p != residue_check(k, t).unwrap().is_some()
        });
        ensure(bad.is_none(), || format!("k = {k}, t = {bad:?} disagrees"))?;
        pairs += max_t;
    }
    let xs = [r(3, 5), r(3, 5), r(3, 5), r(-9, 10), r(-9, 10)];
    let p = prefix_permutation(&xs).unwrap();
    ensure(p.is_none(), || format!("counterexample list gave {p:?}"))?;
    Ok(format!(
        "{pairs} (k, t) pairs agree; (3/5,3/5,3/5,-9/10,-9/10) has none"
    ))
}

fn parity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for k in 3..=5u32 {
        let inst = power_instance(k).unwrap();
        let n = inst.n() as usize;
        let masks: Vec<u64> = (0..PARITY_SAMPLES)
            .map(|_| rng.gen::<u64>() & ((1 << n) - 1))
            .collect();
        let odd = masks.par_iter().find_any(|&&m| {
            count_copies(&Colouring::from_mask(n, m), &inst)
                .unwrap()
                .total()
                % 2
                == 1
        });
        ensure(odd.is_none(), || {
            format!("k = {k}: odd count for mask {odd:?}")
        })?;
    }
    let all_red = count_copies(
        &Colouring::monochromatic(7, Colour::Red),
        &power_instance(3).unwrap(),
    )
    .unwrap();
    ensure((all_red.red, all_red.blue) == (14, 0), || {
        format!("all-red 7-gon: {all_red:?}")
    })?;
    Ok(format!(
        "{PARITY_SAMPLES} colourings each for k = 3, 4, 5 even; all-red 7-gon (14, 0)"
    ))
}

fn robustness() -> Verdict {
    let forcing = [
        (tuple(&[(5, 8), (1, 4), (1, 8)]), 8),
        (tuple(&[(3, 4), (1, 6), (1, 12)]), 12),
        (tuple(&[(7, 12), (1, 4), (1, 6)]), 12),
    ];
    let mut slowest = Duration::ZERO;
    for (d, n) in &forcing {
        let start = Instant::now();
        let v = nearly_ramsey_finite_check(d, *n).unwrap();
        let took = start.elapsed();
        slowest = slowest.max(took);
        ensure(matches!(v, ForcingVerdict::Verified { .. }), || {
            format!("{:?} on N = {n}: {v:?}", d.distances())
        })?;
        ensure(took < FORCING_LIMIT, || {
            format!("{:?} took {took:?}", d.distances())
        })?;
    }
    let listed = [
        tuple(&[(4, 7), (2, 7), (1, 7)]),
        tuple(&[(5, 8), (1, 4), (1, 8)]),
        tuple(&[(3, 4), (1, 6), (1, 12)]),
        tuple(&[(7, 12), (1, 4), (1, 6)]),
        power_tuple(3).unwrap(),
    ];
    for d in &listed {
        let s = strongly_suitable_search(d, SUITABLE_MAX_T).unwrap();
        ensure(!matches!(s, SuitableSearch::Found { .. }), || {
            format!("{:?}: {s:?}", d.distances())
        })?;
    }
    Ok(format!(
        "forcing verified (slowest {:.3}s); no strongly suitable t <= {SUITABLE_MAX_T}",
        slowest.as_secs_f64()
    ))
}

fn majority() -> Verdict {
    let eps = r(1, 100);
    let params = MajorityParams::new(6, eps).unwrap();
    let start = Instant::now();
    let v = majority_verify(&params).unwrap();
    let took = start.elapsed();
    ensure(v == MajorityVerdict::NoRedCopy { grid: 25200 }, || {
        format!("{v:?}")
    })?;
    ensure(took < MAJORITY_LIMIT, || format!("took {took:?}"))?;
    let c = majority_colouring(&params, 25200).unwrap();
    let gap = r(
        c.count(Colour::Red) as i128 - c.count(Colour::Blue) as i128,
        25200,
    );
    ensure(gap == r(1, 40), || format!("density gap {gap}"))?;
    Ok(format!(
        "no red copy on grid 25200 in {:.2}s; density gap {gap}",
        took.as_secs_f64()
    ))
}

fn determinism() -> Verdict {
    let spec = concat!(env!("CARGO_MANIFEST_DIR"), "/../../sweeps/acceptance.sweep");
    let mut outputs = Vec::new();
    for workers in ["1", "4", "8"] {
        let out = Command::new(env!("CARGO_BIN_EXE_circle-ramsey"))
            .args(["--json", "--parallel", workers, "batch", "--spec", spec])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.code() == Some(0), || {
            format!(
                "{workers} workers: exit {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            )
        })?;
        outputs.push(out.stdout);
    }
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), || {
        "reports differ between worker counts".into()
    })?;
    Ok(format!(
        "all-pass report, {} bytes, identical for 1, 4, 8 workers",
        outputs[0].len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("SAT verification", sat_verification),
        ("oracle equivalence", oracle_equivalence),
        ("uniform residue check", uniform_residue),
        ("non-power witness pipeline", instance_pipeline),
        ("Beatty and balanced words", beatty_suite),
        ("jump identity", jump_identity),
        ("doubling equivalence", doubling_equivalence),
        ("parity", parity),
        ("robustness", robustness),
        ("majority colouring", majority),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
