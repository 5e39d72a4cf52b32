use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use wignerlab::gross::{classify_resource, wigner, Resource};
use wignerlab::modring::check_dim;
use wignerlab::nogo::{build_constraints, ontic_labelling_check, solve, verify_against_gross, NogoVerdict, Origin};
use wignerlab::qmat::OperatorMatrix;
use wignerlab::weyl::PhasePoint;
use wignerlab::wsim::{compile, exact_probabilities, initial_density, max_deviation, worker_pool, Initial, WsimError, MAX_EXACT_DIM};

use crate::files::{read_json, CircuitFile, InitialFile};
use crate::report::{fmt12, num, Report};
use crate::CliError;

pub const MIN_DIM: u64 = 2;
pub const MAX_DIM: u64 = 32;
/// Largest Hilbert-space dimension accepted by `wigner`.
pub const MAX_WIGNER_DIM: usize = 256;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNEXPECTED: i32 = 2;
pub const EXIT_NEGATIVE: i32 = 3;

/// Result of a command: the report, the lines for the terminal, the exit code.
pub struct Outcome {
    pub report: Report,
    pub lines: Vec<String>,
    pub code: i32,
}

/// Verdict of the constraint analysis for one dimension.
pub struct DimVerdict {
    pub d: u64,
    /// `unique-gross`, `infeasible`, or a tag for anything unexpected.
    pub tag: String,
    pub expected: bool,
    pub lines: Vec<String>,
    pub checks: Vec<(String, bool)>,
    pub values: Value,
}

pub fn analyze_dimension(d: u64) -> DimVerdict {
    let system = build_constraints(d).expect("d >= 2 checked by caller");
    let verdict = solve(&system);
    let mut checks = Vec::new();
    let counts = json!({
        "hermiticity": system.count(wignerlab::nogo::Rule::Hermiticity),
        "hadamard_covariance": system.count(wignerlab::nogo::Rule::HadamardCovariance),
        "commuting_sum": system.count(wignerlab::nogo::Rule::CommutingSum),
    });
    let odd = d % 2 == 1;
    let (tag, expected, lines, values) = match &verdict {
        NogoVerdict::Unique(a) if odd => {
            let gross = verify_against_gross(d).unwrap_or(false);
            let labelling = ontic_labelling_check(d).unwrap_or(false);
            checks.push(("unique".to_string(), true));
            checks.push(("matches_gross".to_string(), gross));
            checks.push(("labelling".to_string(), labelling));
            let v = a.v().expect("odd-d solution is even");
            let table: Vec<Vec<u64>> = v.chunks(d as usize).map(|r| r.to_vec()).collect();
            let line = format!(
                "d={d}: Unique; {}; {}",
                if gross { "matches Gross" } else { "does NOT match Gross" },
                if labelling { "labelling OK" } else { "labelling FAILED" }
            );
            let tag = if gross { "unique-gross" } else { "unique-nongross" };
            (tag.to_string(), gross && labelling, vec![line], json!({ "v": table, "constraints": counts }))
        }
        NogoVerdict::Unique(_) => {
            checks.push(("infeasible".to_string(), false));
            (
                "unique".to_string(),
                false,
                vec![format!("d={d}: Unique (unexpected for even d)")],
                json!({ "constraints": counts }),
            )
        }
        NogoVerdict::Infeasible(witness) => {
            checks.push(("infeasible".to_string(), !odd));
            let mut lines = vec![format!("d={d}: Infeasible; witness:")];
            let rows: Vec<Value> = match witness {
                Some(w) => {
                    checks.push(("witness_rechecked".to_string(), wignerlab::nogo::recheck_witness(&system, w).is_ok()));
                    w.describe(&system)
                        .into_iter()
                        .zip(&w.rows)
                        .map(|(text, row)| {
                            lines.push(format!("  {text}"));
                            json!({
                                "derived": matches!(row.origin, Origin::Derived { .. }),
                                "text": text,
                            })
                        })
                        .collect()
                }
                None => {
                    checks.push(("witness_found".to_string(), false));
                    lines[0] = format!("d={d}: Infeasible; no witness of at most three rows found");
                    Vec::new()
                }
            };
            ("infeasible".to_string(), !odd && witness.is_some(), lines, json!({ "witness": rows, "constraints": counts }))
        }
        NogoVerdict::Multiple { kernel_orders } => {
            checks.push(("determined".to_string(), false));
            (
                "multiple".to_string(),
                false,
                vec![format!("d={d}: Multiple solutions; kernel orders {kernel_orders:?}")],
                json!({ "kernel_orders": kernel_orders, "constraints": counts }),
            )
        }
    };
    DimVerdict { d, tag, expected, lines, checks, values }
}

fn check_range(d: u64) -> Result<(), CliError> {
    if !(MIN_DIM..=MAX_DIM).contains(&d) {
        return Err(CliError::Usage(format!("dimension must lie in {MIN_DIM}..={MAX_DIM} (got {d})")));
    }
    Ok(())
}

fn finish(mut report: Report, start: Instant) -> Report {
    report.wall_time_seconds = num(start.elapsed().as_secs_f64());
    report
}

pub fn uniqueness(d: u64) -> Result<Outcome, CliError> {
    check_range(d)?;
    let start = Instant::now();
    let v = analyze_dimension(d);
    let mut report = Report::new("uniqueness", json!({ "dim": d }));
    report.verdict = v.tag.clone();
    for (name, ok) in &v.checks {
        report.check(name, *ok);
    }
    report.values = v.values;
    Ok(Outcome {
        report: finish(report, start),
        lines: v.lines,
        code: if v.expected { EXIT_OK } else { EXIT_UNEXPECTED },
    })
}

/// Parses `a..b` or `a..=b`, both inclusive.
pub fn parse_dims(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u64 = a.trim().parse().map_err(|_| format!("bad lower bound {a:?}"))?;
    let b: u64 = b.trim().parse().map_err(|_| format!("bad upper bound {b:?}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

pub fn sweep(from: u64, to: u64) -> Result<Outcome, CliError> {
    check_range(from)?;
    check_range(to)?;
    let start = Instant::now();
    let run = || (from..=to).into_par_iter().map(analyze_dimension).collect::<Vec<_>>();
    let results = match worker_pool() {
        Some(pool) => pool.install(run),
        None => run(),
    };
    let mut report = Report::new("sweep", json!({ "from": from, "to": to }));
    let all_expected = results.iter().all(|r| r.expected);
    report.verdict = if all_expected { "expected" } else { "unexpected" }.into();
    for r in &results {
        report.check(&format!("d={}", r.d), r.expected);
    }
    report.values = Value::Array(
        results
            .iter()
            .map(|r| json!({ "d": r.d, "verdict": r.tag, "details": r.values }))
            .collect(),
    );
    let summary = results.iter().map(|r| format!("{}:{}", r.d, r.tag)).collect::<Vec<_>>().join(" ");
    Ok(Outcome {
        report: finish(report, start),
        lines: vec![summary],
        code: if all_expected { EXIT_OK } else { EXIT_UNEXPECTED },
    })
}

fn check_density(rho: &OperatorMatrix, dim: usize) -> Result<(), CliError> {
    let tr = rho.trace();
    if rho.dim() != dim || !rho.is_hermitian(1e-8) || (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(CliError::Usage(format!(
            "state must be a Hermitian unit-trace matrix of dimension {dim}"
        )));
    }
    Ok(())
}

pub fn wigner_table(path: &Path, d: u64, n: usize) -> Result<Outcome, CliError> {
    check_range(d)?;
    if d.is_multiple_of(2) {
        return Err(CliError::Usage(format!(
            "the Wigner representation needs odd d (got {d}); see `wignerlab uniqueness --dim {d}`"
        )));
    }
    let dim = (d as usize)
        .checked_pow(n as u32)
        .filter(|&x| n >= 1 && x <= MAX_WIGNER_DIM)
        .ok_or_else(|| CliError::Usage(format!("d^n must lie in 1..={MAX_WIGNER_DIM}")))?;
    let start = Instant::now();
    let file: InitialFile = read_json(path)?;
    let initial = file.to_initial(d)?;
    if let Initial::Product(specs) = &initial {
        if specs.len() != n {
            return Err(CliError::Usage(format!("{} product factors for {n} qudits", specs.len())));
        }
    }
    let circuit = wignerlab::wsim::Circuit { d, n, initial, gates: vec![], measurements: vec![] };
    let rho = initial_density(&circuit).map_err(|e| CliError::Usage(e.to_string()))?;
    check_density(&rho, dim)?;
    let w = wigner(&rho, d, n).map_err(|e| CliError::Usage(e.to_string()))?;
    let class = classify_resource(Resource::State(&rho), d, n).map_err(|e| CliError::Usage(e.to_string()))?;
    let min = w.values.iter().copied().fold(f64::INFINITY, f64::min);
    let neg: f64 = w.values.iter().map(|&v| (-v).max(0.0)).sum();

    let pts = PhasePoint::all(d, n);
    let mut lines: Vec<String> = pts.iter().map(|a| format!("{a}  {}", fmt12(w.get(a)))).collect();
    lines.push(format!("min entry: {}", fmt12(min)));
    lines.push(format!("sum-negativity: {}", fmt12(neg)));
    let witness: Vec<String> = class.witness.iter().map(|p| p.to_string()).collect();
    lines.push(if class.negative {
        format!("classification: negative (witness {} value {})", witness.join(","), fmt12(class.value))
    } else {
        "classification: positive".to_string()
    });

    let mut report = Report::new("wigner", json!({ "dim": d, "qudits": n, "state_file": path.display().to_string() }));
    report.verdict = class.label().into();
    report.check("normalized", (w.sum() - 1.0).abs() <= 1e-9);
    report.values = json!({
        "distribution": pts.iter().map(|a| json!({ "point": a.to_string(), "value": num(w.get(a)) })).collect::<Vec<_>>(),
        "min_entry": num(min),
        "negativity": num(neg),
        "classification": class.label(),
        "witness": witness,
    });
    Ok(Outcome {
        report: finish(report, start),
        lines,
        code: EXIT_OK,
    })
}

/// Deviation allowed between sampled and exact probabilities: five standard
/// deviations of the worst-case bin, but never below 0.012.
pub fn sampling_tolerance(shots: u64) -> f64 {
    (2.5 / (shots as f64).sqrt()).max(0.012)
}

fn record_key(r: &[u64]) -> String {
    if r.is_empty() {
        "(none)".into()
    } else {
        r.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
    }
}

pub fn simulate(path: &Path, shots: u64, seed: u64) -> Result<Outcome, CliError> {
    if shots == 0 {
        return Err(CliError::Usage("--shots must be positive".into()));
    }
    let start = Instant::now();
    let file: CircuitFile = read_json(path)?;
    check_range(file.d)?;
    let circuit = file.to_circuit()?;
    let params = json!({ "circuit_file": path.display().to_string(), "shots": shots, "seed": seed, "dim": circuit.d, "qudits": circuit.n });
    let mut report = Report::new("simulate", params);
    let compiled = match compile(&circuit) {
        Ok(c) => c,
        Err(WsimError::Negativity { element, witness, value }) => {
            report.verdict = "negative".into();
            report.check("nonnegative", false);
            report.values = json!({ "element": element.to_string(), "witness": witness, "value": num(value) });
            let line = format!("negativity: {element} has value {} at {witness}", fmt12(value));
            return Ok(Outcome {
                report: finish(report, start),
                lines: vec![line],
                code: EXIT_NEGATIVE,
            });
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    let counts = compiled.sample(shots, seed);
    let exact = match circuit.dim() {
        Some(dim) if dim <= MAX_EXACT_DIM => Some(exact_probabilities(&circuit).map_err(|e| CliError::Usage(e.to_string()))?),
        _ => None,
    };
    report.check("nonnegative", true);
    let mut records: Vec<Vec<u64>> = counts.keys().cloned().collect();
    if let Some(e) = &exact {
        records.extend(e.keys().filter(|k| !counts.contains_key(*k)).cloned());
        records.sort();
    }
    let mut lines = vec![format!("records (outcome exponents in Z_{}): count frequency{}", 2 * circuit.d, if exact.is_some() { " exact" } else { "" })];
    let mut rows = Vec::new();
    for r in &records {
        let c = counts.get(r).copied().unwrap_or(0);
        let f = c as f64 / shots as f64;
        let p = exact.as_ref().map(|e| e.get(r).copied().unwrap_or(0.0));
        lines.push(match p {
            Some(p) => format!("  {}  {c}  {}  {}", record_key(r), fmt12(f), fmt12(p)),
            None => format!("  {}  {c}  {}", record_key(r), fmt12(f)),
        });
        let mut row = json!({ "record": r, "count": c, "frequency": num(f) });
        if let Some(p) = p {
            row["exact"] = num(p);
        }
        rows.push(row);
    }
    let mut values = json!({
        "counts": rows,
        "all_steps_permutations": compiled.steps.iter().all(|s| s.is_permutation()),
    });
    match &exact {
        Some(e) => {
            let dev = max_deviation(&counts, e);
            let tol = sampling_tolerance(shots);
            report.check("agrees_with_exact", dev <= tol);
            values["max_deviation"] = num(dev);
            values["tolerance"] = num(tol);
            lines.push(format!("max deviation from exact: {} (tolerance {})", fmt12(dev), fmt12(tol)));
        }
        None => lines.push(format!("exact table skipped: dimension exceeds {MAX_EXACT_DIM}")),
    }
    report.values = values;
    let ok = report.all_passed();
    report.verdict = if ok { "sampled" } else { "deviation" }.into();
    Ok(Outcome {
        report: finish(report, start),
        lines,
        code: if ok { EXIT_OK } else { EXIT_UNEXPECTED },
    })
}

/// Rejects dimensions the library cannot represent at all.
pub fn parse_dim(s: &str) -> Result<u64, String> {
    let d: u64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    check_dim(d).map_err(|e| e.to_string())?;
    if !(MIN_DIM..=MAX_DIM).contains(&d) {
        return Err(format!("must lie in {MIN_DIM}..={MAX_DIM}"));
    }
    Ok(d)
}
