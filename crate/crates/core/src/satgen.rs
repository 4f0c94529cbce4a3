//! CNF formulas asserting a colouring of the `(2^k - 1)`-gon with no
//! monochromatic copy of the `(k,2)`-power, DIMACS I/O, and an external
//! solver driver.
//!
//! Variable `v + 1` is true when vertex `v` is red. Each copy contributes a
//! positive clause (not all blue) and a negative clause (not all red); all
//! positive clauses come first. Unsatisfiable means every colouring
//! contains a monochromatic copy.

use std::io::{Read, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;
use wait_timeout::ChildExt;

use crate::colouring::Colouring;
use crate::detector::{canonical_copies, detect_bruteforce, CopyWitness, DetectorError};
use crate::tuple::{power_instance, TupleError};

pub const MAX_CNF_K: u32 = 16;
/// Formulas beyond this many clauses are refused rather than materialised.
pub const MAX_CLAUSES: u64 = 10_000_000;
/// Environment variable naming the default solver command.
pub const SOLVER_ENV: &str = "RAMSEY_SAT_SOLVER";

#[derive(Debug, Error)]
pub enum SatError {
    #[error("k = {0} is outside 3..={MAX_CNF_K}")]
    KOutOfRange(u32),
    #[error("k = {k} needs {clauses} clauses, above the cap of {MAX_CLAUSES}")]
    TooManyClauses { k: u32, clauses: u128 },
    #[error("literal {literal} is out of range for {num_vars} variables")]
    BadLiteral { literal: i64, num_vars: u64 },
    #[error("empty clause")]
    EmptyClause,
    #[error("DIMACS line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("solver command is empty")]
    EmptyCommand,
    #[error("solver `{0}` not found")]
    SolverNotFound(String),
    #[error("solver exited with {code:?} and no status line; stderr: {stderr}")]
    SolverFailed { code: Option<i32>, stderr: String },
    #[error("solver output has no status line")]
    NoStatus,
    #[error("solver model is invalid: {0}")]
    InvalidModel(String),
    #[error("solver model contains a monochromatic copy {0:?}; the pipeline is broken")]
    ModelHasCopy(CopyWitness),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Tuple(#[from] TupleError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CnfFormula {
    num_vars: u64,
    clauses: Vec<Vec<i64>>,
    /// The `k` of the power instance, when known; written as a comment.
    k: Option<u32>,
}

impl CnfFormula {
    pub fn new(num_vars: u64, clauses: Vec<Vec<i64>>) -> Result<Self, SatError> {
        for clause in &clauses {
            if clause.is_empty() {
                return Err(SatError::EmptyClause);
            }
            if let Some(&literal) = clause
                .iter()
                .find(|&&l| l == 0 || l.unsigned_abs() > num_vars)
            {
                return Err(SatError::BadLiteral { literal, num_vars });
            }
        }
        Ok(CnfFormula {
            num_vars,
            clauses,
            k: None,
        })
    }

    pub fn num_vars(&self) -> u64 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i64>] {
        &self.clauses
    }

    pub fn k(&self) -> Option<u32> {
        self.k
    }

    /// Copy of the formula keeping only the clauses selected by `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(usize, &[i64]) -> bool) -> CnfFormula {
        CnfFormula {
            num_vars: self.num_vars,
            clauses: self
                .clauses
                .iter()
                .enumerate()
                .filter(|(i, c)| keep(*i, c))
                .map(|(_, c)| c.clone())
                .collect(),
            k: self.k,
        }
    }

    /// Whether the assignment (`assignment[v]` is variable `v + 1`)
    /// satisfies every clause.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let value = assignment[(l.unsigned_abs() - 1) as usize];
                value == (l > 0)
            })
        })
    }
}

/// `2 (2^k - 1) (k - 1)!` clauses over `2^k - 1` variables.
pub fn expected_clause_count(k: u32) -> u128 {
    let factorial: u128 = (1..k as u128).product();
    2 * ((1u128 << k) - 1) * factorial
}

pub fn cnf_generate(k: u32) -> Result<CnfFormula, SatError> {
    if !(3..=MAX_CNF_K).contains(&k) {
        return Err(SatError::KOutOfRange(k));
    }
    let clauses = expected_clause_count(k);
    if clauses > MAX_CLAUSES as u128 {
        return Err(SatError::TooManyClauses { k, clauses });
    }
    let inst = power_instance(k)?;
    let copies = canonical_copies(&inst)?;
    let mut positive = Vec::with_capacity(copies.len());
    for mut copy in copies {
        copy.sort_unstable();
        positive.push(copy.iter().map(|&v| v as i64 + 1).collect::<Vec<_>>());
    }
    let negative: Vec<Vec<i64>> = positive
        .iter()
        .map(|c| c.iter().map(|&l| -l).collect())
        .collect();
    positive.extend(negative);
    let mut f = CnfFormula::new(inst.n(), positive)?;
    f.k = Some(k);
    Ok(f)
}

pub fn dimacs_write(f: &CnfFormula) -> String {
    let mut out = format!("c circle-ramsey {}\n", env!("CARGO_PKG_VERSION"));
    if let Some(k) = f.k {
        out.push_str(&format!("c k = {k}\n"));
    }
    out.push_str(&format!("p cnf {} {}\n", f.num_vars, f.clauses.len()));
    for clause in &f.clauses {
        for l in clause {
            out.push_str(&l.to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

pub fn dimacs_read(text: &str) -> Result<CnfFormula, SatError> {
    let err = |line: usize, message: String| SatError::Parse { line, message };
    let mut header: Option<(u64, usize)> = None;
    let mut k = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('c') {
            if let Some(v) = comment.trim().strip_prefix("k = ") {
                k = v.trim().parse().ok();
            }
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("p ") {
            if header.is_some() {
                return Err(err(line, "duplicate header".into()));
            }
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let [format, vars, count] = parts[..] else {
                return Err(err(line, format!("malformed header `{trimmed}`")));
            };
            if format != "cnf" {
                return Err(err(line, format!("unsupported format `{format}`")));
            }
            let vars = vars
                .parse()
                .map_err(|_| err(line, format!("invalid variable count `{vars}`")))?;
            let count = count
                .parse()
                .map_err(|_| err(line, format!("invalid clause count `{count}`")))?;
            header = Some((vars, count));
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(err(line, "clause before the `p cnf` header".into()));
        };
        for tok in trimmed.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| err(line, format!("invalid literal `{tok}`")))?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(err(line, "empty clause".into()));
                }
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() > vars {
                return Err(err(line, format!("literal {lit} exceeds {vars} variables")));
            } else {
                current.push(lit);
            }
        }
    }
    let last = text.lines().count();
    let (vars, count) = header.ok_or_else(|| err(last.max(1), "missing `p cnf` header".into()))?;
    if !current.is_empty() {
        return Err(err(last, "last clause is not terminated by 0".into()));
    }
    if clauses.len() != count {
        return Err(err(
            last,
            format!("header declares {count} clauses, found {}", clauses.len()),
        ));
    }
    let mut f = CnfFormula::new(vars, clauses)?;
    f.k = k;
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SolverStatus {
    Sat,
    Unsat,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolverOutcome {
    pub status: SolverStatus,
    /// Present exactly when SAT: vertex `v` red iff variable `v + 1` is true.
    #[serde(serialize_with = "serialize_model")]
    pub model: Option<Colouring>,
    /// Wall-clock time; left out of JSON so reports stay reproducible.
    #[serde(skip)]
    pub solver_time: Duration,
}

fn serialize_model<S: serde::Serializer>(m: &Option<Colouring>, s: S) -> Result<S::Ok, S::Error> {
    match m {
        Some(c) => s.serialize_some(&c.letters()),
        None => s.serialize_none(),
    }
}

/// The explicit command, else `$RAMSEY_SAT_SOLVER`, else `varisat` when it
/// is on `PATH`.
pub fn resolve_solver(explicit: Option<&str>) -> Option<String> {
    if let Some(cmd) = explicit.filter(|c| !c.trim().is_empty()) {
        return Some(cmd.to_string());
    }
    if let Ok(cmd) = std::env::var(SOLVER_ENV) {
        if !cmd.trim().is_empty() {
            return Some(cmd);
        }
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|dir| dir.join("varisat"))
        .find(|p| p.is_file())
        .map(|p| p.to_string_lossy().into_owned())
}

/// Runs `command <dimacs-file>` and parses SAT-competition output.
///
/// The command is split on whitespace; the formula path is appended as the
/// last argument. A SAT model must satisfy every clause.
pub fn solve_external(
    f: &CnfFormula,
    command: &str,
    timeout: Duration,
) -> Result<SolverOutcome, SatError> {
    let mut parts = command.split_whitespace();
    let program = parts.next().ok_or(SatError::EmptyCommand)?;
    let mut file = tempfile::Builder::new().suffix(".cnf").tempfile()?;
    file.write_all(dimacs_write(f).as_bytes())?;
    file.flush()?;

    let started = Instant::now();
    let mut child = Command::new(program)
        .args(parts)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => {
                SatError::SolverNotFound(program.to_string())
            }
            _ => SatError::Io(e),
        })?;
    let stdout = drain(child.stdout.take());
    let stderr = drain(child.stderr.take());
    let status = match child.wait_timeout(timeout)? {
        Some(status) => status,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            return Ok(SolverOutcome {
                status: SolverStatus::Unknown,
                model: None,
                solver_time: started.elapsed(),
            });
        }
    };
    let solver_time = started.elapsed();
    let stdout = stdout.join().unwrap_or_default();
    let stderr = stderr.join().unwrap_or_default();
    parse_output(f, &stdout, solver_time).map_err(|e| match e {
        SatError::NoStatus if !status.success() && !matches!(status.code(), Some(10 | 20)) => {
            SatError::SolverFailed {
                code: status.code(),
                stderr: tail(&stderr),
            }
        }
        other => other,
    })
}

fn drain<R: Read + Send + 'static>(pipe: Option<R>) -> std::thread::JoinHandle<String> {
    std::thread::spawn(move || {
        let mut buf = String::new();
        if let Some(mut p) = pipe {
            let _ = p.read_to_string(&mut buf);
        }
        buf
    })
}

fn tail(s: &str) -> String {
    let lines: Vec<&str> = s.lines().collect();
    lines[lines.len().saturating_sub(5)..].join("\n")
}

fn parse_output(
    f: &CnfFormula,
    stdout: &str,
    solver_time: Duration,
) -> Result<SolverOutcome, SatError> {
    let mut status = None;
    let mut values: Vec<Option<bool>> = vec![None; f.num_vars as usize];
    for line in stdout.lines() {
        if let Some(s) = line.strip_prefix("s ") {
            status = Some(match s.trim() {
                "SATISFIABLE" => SolverStatus::Sat,
                "UNSATISFIABLE" => SolverStatus::Unsat,
                "UNKNOWN" => SolverStatus::Unknown,
                other => return Err(SatError::InvalidModel(format!("unknown status `{other}`"))),
            });
        } else if let Some(v) = line.strip_prefix("v ") {
            for tok in v.split_whitespace() {
                let lit: i64 = tok
                    .parse()
                    .map_err(|_| SatError::InvalidModel(format!("invalid literal `{tok}`")))?;
                if lit == 0 {
                    continue;
                }
                let var = lit.unsigned_abs();
                if var > f.num_vars {
                    return Err(SatError::InvalidModel(format!(
                        "variable {var} out of range"
                    )));
                }
                values[var as usize - 1] = Some(lit > 0);
            }
        }
    }
    let status = status.ok_or(SatError::NoStatus)?;
    let model = if status == SolverStatus::Sat {
        // unassigned variables are free; take them as false (blue)
        let assignment: Vec<bool> = values.iter().map(|v| v.unwrap_or(false)).collect();
        if !f.satisfied_by(&assignment) {
            return Err(SatError::InvalidModel(
                "assignment violates a clause".into(),
            ));
        }
        Some(Colouring::new(assignment, None).map_err(|e| SatError::InvalidModel(e.to_string()))?)
    } else {
        None
    };
    Ok(SolverOutcome {
        status,
        model,
        solver_time,
    })
}

/// Solves the full formula for `k`; a SAT model is re-checked with the
/// brute-force detector and must contain no monochromatic copy.
pub fn solve_power(k: u32, command: &str, timeout: Duration) -> Result<SolverOutcome, SatError> {
    let f = cnf_generate(k)?;
    let outcome = solve_external(&f, command, timeout)?;
    if let Some(model) = &outcome.model {
        if let Some(w) = detect_bruteforce(model, &power_instance(k)?, None)? {
            return Err(SatError::ModelHasCopy(w));
        }
    }
    Ok(outcome)
}

/// Writes the DIMACS text for `k` to `path`.
pub fn write_cnf_file(k: u32, path: &Path) -> Result<CnfFormula, SatError> {
    let f = cnf_generate(k)?;
    std::fs::write(path, dimacs_write(&f))?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colouring::Colour;
    use crate::detector::count_copies;
    use std::os::unix::fs::PermissionsExt;

    fn fake_solver(dir: &Path, name: &str, body: &str) -> String {
        let path = dir.join(name);
        std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
        std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
        path.to_string_lossy().into_owned()
    }

    #[test]
    fn clause_counts() {
        for k in 3..=6 {
            let f = cnf_generate(k).unwrap();
            assert_eq!(f.num_vars(), (1 << k) - 1);
            assert_eq!(f.clauses().len() as u128, expected_clause_count(k));
            for (i, c) in f.clauses().iter().enumerate() {
                assert_eq!(c.len(), k as usize);
                let positive = i < f.clauses().len() / 2;
                assert!(c.iter().all(|&l| (l > 0) == positive));
            }
        }
        assert_eq!(expected_clause_count(3), 28);
        assert_eq!(expected_clause_count(4), 180);
        assert!(matches!(cnf_generate(2), Err(SatError::KOutOfRange(2))));
        assert!(matches!(cnf_generate(17), Err(SatError::KOutOfRange(17))));
        assert!(matches!(
            cnf_generate(12),
            Err(SatError::TooManyClauses { .. })
        ));
    }

    #[test]
    fn clauses_match_copies() {
        // each positive clause is exactly one copy's vertex set
        let f = cnf_generate(3).unwrap();
        let inst = power_instance(3).unwrap();
        let half = &f.clauses()[..14];
        for clause in half {
            let mask = clause.iter().fold(0u64, |m, &l| m | 1 << (l - 1));
            let c = Colouring::from_mask(7, !mask & 0x7f);
            // exactly this copy is blue, so the colouring has a blue copy
            assert!(count_copies(&c, &inst).unwrap().blue >= 1);
        }
        let mut sets: Vec<&Vec<i64>> = half.iter().collect();
        sets.sort();
        sets.dedup();
        assert_eq!(sets.len(), 14);
        assert!(half.contains(&vec![1, 5, 7]));
    }

    #[test]
    fn dimacs_round_trip_and_header() {
        let f = cnf_generate(3).unwrap();
        let text = dimacs_write(&f);
        let first_data = text.lines().find(|l| !l.starts_with('c')).unwrap();
        assert_eq!(first_data, "p cnf 7 28");
        assert!(text.lines().any(|l| l == "c k = 3"));
        assert_eq!(dimacs_read(&text).unwrap(), f);
    }

    #[test]
    fn dimacs_errors_carry_lines() {
        let e = dimacs_read("p cnf 2 1\n1 x 0\n").unwrap_err();
        assert!(matches!(e, SatError::Parse { line: 2, .. }), "{e}");
        let e = dimacs_read("1 2 0\n").unwrap_err();
        assert!(matches!(e, SatError::Parse { line: 1, .. }));
        let e = dimacs_read("p cnf 2 1\n1 3 0\n").unwrap_err();
        assert!(matches!(e, SatError::Parse { line: 2, .. }));
        let e = dimacs_read("p cnf 2 2\n1 2 0\n").unwrap_err();
        assert!(matches!(e, SatError::Parse { .. }));
        let e = dimacs_read("p cnf 2 1\n1 2\n").unwrap_err();
        assert!(matches!(e, SatError::Parse { .. }));
        assert!(dimacs_read("c only\np cnf 1 1\n1\n-1 0\n").is_ok());
        assert!(dimacs_read("c only\n").is_err());
        // clauses may span lines
        let f = dimacs_read("p cnf 3 1\n1 2\n3 0\n").unwrap();
        assert_eq!(f.clauses(), &[vec![1, 2, 3]]);
    }

    #[test]
    fn fake_solver_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let f = CnfFormula::new(3, vec![vec![1, 2], vec![-1]]).unwrap();
        let t = Duration::from_secs(10);

        let sat = fake_solver(
            dir.path(),
            "sat",
            "echo 's SATISFIABLE'; echo 'v -1 2 -3 0'; exit 10",
        );
        let out = solve_external(&f, &sat, t).unwrap();
        assert_eq!(out.status, SolverStatus::Sat);
        assert_eq!(out.model.unwrap().letters(), "BRB");

        let unsat = fake_solver(dir.path(), "unsat", "echo 's UNSATISFIABLE'; exit 20");
        let out = solve_external(&f, &unsat, t).unwrap();
        assert_eq!((out.status, out.model), (SolverStatus::Unsat, None));

        let bad = fake_solver(
            dir.path(),
            "bad",
            "echo 's SATISFIABLE'; echo 'v 1 2 3 0'; exit 10",
        );
        assert!(matches!(
            solve_external(&f, &bad, t),
            Err(SatError::InvalidModel(_))
        ));

        let crash = fake_solver(dir.path(), "crash", "echo boom >&2; exit 3");
        match solve_external(&f, &crash, t) {
            Err(SatError::SolverFailed {
                code: Some(3),
                stderr,
            }) => assert_eq!(stderr, "boom"),
            other => panic!("{other:?}"),
        }

        let silent = fake_solver(dir.path(), "silent", "exit 0");
        assert!(matches!(
            solve_external(&f, &silent, t),
            Err(SatError::NoStatus)
        ));

        let slow = fake_solver(dir.path(), "slow", "sleep 5; echo 's UNSATISFIABLE'");
        let out = solve_external(&f, &slow, Duration::from_millis(200)).unwrap();
        assert_eq!(out.status, SolverStatus::Unknown);

        // the formula path arrives as the last argument
        let cat = fake_solver(
            dir.path(),
            "cat",
            "grep -q '^p cnf 3 2$' \"$2\" && echo 's UNKNOWN'",
        );
        let out = solve_external(&f, &format!("{cat} --flag"), t).unwrap();
        assert_eq!(out.status, SolverStatus::Unknown);

        assert!(matches!(
            solve_external(&f, "/nonexistent/solver", t),
            Err(SatError::SolverNotFound(_))
        ));
        assert!(matches!(
            solve_external(&f, "  ", t),
            Err(SatError::EmptyCommand)
        ));
    }

    #[test]
    fn model_with_copy_is_rejected() {
        // a "solver" claiming all-red satisfies the full k = 3 formula
        let dir = tempfile::tempdir().unwrap();
        let liar = fake_solver(
            dir.path(),
            "liar",
            "echo 's SATISFIABLE'; echo 'v 1 2 3 4 5 6 7 0'",
        );
        // the clause check catches it before the detector does
        assert!(matches!(
            solve_power(3, &liar, Duration::from_secs(10)),
            Err(SatError::InvalidModel(_))
        ));
    }

    fn real_solver() -> Option<String> {
        let s = resolve_solver(None);
        if s.is_none() {
            eprintln!("no SAT solver found; set {SOLVER_ENV} to run solver tests");
        }
        s
    }

    #[test]
    fn small_powers_are_unsat() {
        let Some(cmd) = real_solver() else { return };
        for k in 3..=4 {
            let out = solve_power(k, &cmd, Duration::from_secs(60)).unwrap();
            assert_eq!(out.status, SolverStatus::Unsat, "k={k}");
        }
    }

    #[test]
    fn blue_free_half_is_satisfiable() {
        let Some(cmd) = real_solver() else { return };
        let f = cnf_generate(4).unwrap();
        let half = f.clauses().len() / 2;
        let first = f.filtered(|i, _| i < half);
        let out = solve_external(&first, &cmd, Duration::from_secs(60)).unwrap();
        assert_eq!(out.status, SolverStatus::Sat);
        let model = out.model.unwrap();
        let counts = count_copies(&model, &power_instance(4).unwrap()).unwrap();
        assert_eq!(counts.blue, 0);
        // all-red is one such model
        let all_red = vec![true; 15];
        assert!(first.satisfied_by(&all_red));
        assert_eq!(
            Colouring::monochromatic(15, Colour::Red).count(Colour::Red),
            15
        );
    }

    #[test]
    fn no_colouring_has_exactly_one_monochromatic_copy() {
        // parity forces an even total, so one excluded copy never stands alone
        let inst = power_instance(3).unwrap();
        for mask in 0u64..128 {
            let c = Colouring::from_mask(7, mask);
            assert_ne!(count_copies(&c, &inst).unwrap().total(), 1);
        }
    }

    #[test]
    fn dropping_one_clause_at_k3_stays_unsat() {
        let Some(cmd) = real_solver() else { return };
        let f = cnf_generate(3).unwrap();
        for drop in 0..f.clauses().len() {
            let g = f.filtered(|i, _| i != drop);
            let out = solve_external(&g, &cmd, Duration::from_secs(60)).unwrap();
            assert_eq!(out.status, SolverStatus::Unsat, "clause {drop}");
        }
    }
}
