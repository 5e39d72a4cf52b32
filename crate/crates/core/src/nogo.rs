//! Outcome assignments for the phase-space origin as a linear congruence system.
//!
//! Unknowns are `u_{p,q} = 2 v_{p,q} ∈ Z_{2d}`, where `ω^{v_{p,q}}` is the
//! outcome the origin's ontic state assigns to a measurement of `W_{p,q}`.
//! Variable `(p,q)` has index `p·d + q`.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::gross::{phase_point, wigner, GrossError};
use crate::modring::{ext_gcd, gcd, inv2, omega_power, ModInt};
use crate::qmat::{OperatorMatrix, TOL};
use crate::stabilizer::{eigenstate, StabilizerBasis, StabilizerError};
use crate::weyl::{weyl_matrix, weyl_superop_apply, PhasePoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NogoError {
    #[error("dimension must be at least 2 (got {0})")]
    DimensionTooSmall(u64),
    #[error("check requires odd d (got {0})")]
    EvenDimension(u64),
    #[error("solver did not return a unique assignment for d = {0}")]
    NotUnique(u64),
    #[error(transparent)]
    Gross(#[from] GrossError),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error(transparent)]
    Frame(#[from] crate::frames::FrameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Hermiticity,
    HadamardCovariance,
    CommutingSum,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Hermiticity => "Hermiticity",
            Rule::HadamardCovariance => "HadamardCovariance",
            Rule::CommutingSum => "CommutingSum",
        };
        f.write_str(s)
    }
}

/// The instance that generated a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    /// `u_{p,q} + u_{-p,-q} ≡ 2pq`
    Hermiticity { p: u64, q: u64 },
    /// `u_{p,q} - u_{-q,p} ≡ 2pq`
    Hadamard { p: u64, q: u64 },
    /// `u_{a+b} - u_a - u_b ≡ 2 p_b q_a` for commuting `a, b`
    Sum { a: (u64, u64), b: (u64, u64) },
}

impl Source {
    pub fn rule(&self) -> Rule {
        match self {
            Source::Hermiticity { .. } => Rule::Hermiticity,
            Source::Hadamard { .. } => Rule::HadamardCovariance,
            Source::Sum { .. } => Rule::CommutingSum,
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Hermiticity { p, q } => write!(f, "Hermiticity at ({p},{q})"),
            Source::Hadamard { p, q } => write!(f, "HadamardCovariance at ({p},{q})"),
            Source::Sum { a, b } => write!(
                f,
                "CommutingSum of ({},{}) and ({},{})",
                a.0, a.1, b.0, b.1
            ),
        }
    }
}

/// `Σ c_i u_{x_i} ≡ rhs (mod 2d)`, coefficients merged and reduced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    /// `(variable, coefficient)` sorted by variable, zero coefficients dropped.
    pub coeffs: Vec<(usize, u64)>,
    pub rhs: u64,
    pub source: Source,
}

impl Constraint {
    pub fn rule(&self) -> Rule {
        self.source.rule()
    }

    pub fn vars(&self) -> Vec<usize> {
        self.coeffs.iter().map(|&(v, _)| v).collect()
    }
}

fn merge_terms(terms: &[(usize, i64)], m: u64) -> Vec<(usize, u64)> {
    let mut acc: Vec<(usize, u64)> = Vec::new();
    for &(v, c) in terms {
        let c = ModInt::new(c, m).value();
        match acc.iter_mut().find(|(w, _)| *w == v) {
            Some((_, x)) => *x = (*x + c) % m,
            None => acc.push((v, c)),
        }
    }
    acc.retain(|&(_, c)| c != 0);
    acc.sort_unstable();
    acc
}

fn fmt_row(coeffs: &[(usize, u64)], rhs: u64, d: u64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let m = 2 * d;
    if coeffs.is_empty() {
        write!(f, "0")?;
    }
    for (i, &(v, c)) in coeffs.iter().enumerate() {
        let (p, q) = (v as u64 / d, v as u64 % d);
        let signed = if c > m / 2 { c as i64 - m as i64 } else { c as i64 };
        let sep = if i == 0 {
            if signed < 0 { "-" } else { "" }
        } else if signed < 0 {
            " - "
        } else {
            " + "
        };
        let mag = signed.unsigned_abs();
        if mag == 1 {
            write!(f, "{sep}u({p},{q})")?;
        } else {
            write!(f, "{sep}{mag}u({p},{q})")?;
        }
    }
    write!(f, " ≡ {rhs} (mod {m})")
}

/// All constraints for dimension `d`.
#[derive(Debug, Clone)]
pub struct VConstraintSystem {
    pub d: u64,
    pub constraints: Vec<Constraint>,
}

impl VConstraintSystem {
    pub fn modulus(&self) -> u64 {
        2 * self.d
    }

    pub fn num_vars(&self) -> usize {
        (self.d * self.d) as usize
    }

    pub fn var(&self, p: u64, q: u64) -> usize {
        ((p % self.d) * self.d + q % self.d) as usize
    }

    pub fn count(&self, rule: Rule) -> usize {
        self.constraints.iter().filter(|c| c.rule() == rule).count()
    }

    fn dense(&self, coeffs: &[(usize, u64)], rhs: u64) -> Vec<u64> {
        let mut row = vec![0u64; self.num_vars() + 1];
        for &(v, c) in coeffs {
            row[v] = c;
        }
        row[self.num_vars()] = rhs;
        row
    }
}

/// Builds the Hermiticity, Hadamard-covariance and commuting-sum constraints.
///
/// The first constraint is the `(0,0) + (0,0)` sum instance, which reads
/// `-u_{0,0} ≡ 0` and fixes the normalization.
pub fn build_constraints(d: u64) -> Result<VConstraintSystem, NogoError> {
    if d < 2 {
        return Err(NogoError::DimensionTooSmall(d));
    }
    let m = 2 * d;
    let di = d as i64;
    let var = |p: i64, q: i64| (p.rem_euclid(di) * di + q.rem_euclid(di)) as usize;
    let make = |terms: &[(usize, i64)], rhs: i64, source: Source| Constraint {
        coeffs: merge_terms(terms, m),
        rhs: ModInt::new(rhs, m).value(),
        source,
    };
    let sum_row = |a: (i64, i64), b: (i64, i64)| {
        make(
            &[(var(a.0 + b.0, a.1 + b.1), 1), (var(a.0, a.1), -1), (var(b.0, b.1), -1)],
            2 * b.0 * a.1,
            Source::Sum {
                a: (a.0 as u64, a.1 as u64),
                b: (b.0 as u64, b.1 as u64),
            },
        )
    };

    let mut constraints = vec![sum_row((0, 0), (0, 0))];
    for p in 0..di {
        for q in 0..di {
            constraints.push(make(
                &[(var(p, q), 1), (var(-p, -q), 1)],
                2 * p * q,
                Source::Hermiticity { p: p as u64, q: q as u64 },
            ));
        }
    }
    for p in 0..di {
        for q in 0..di {
            constraints.push(make(
                &[(var(p, q), 1), (var(-q, p), -1)],
                2 * p * q,
                Source::Hadamard { p: p as u64, q: q as u64 },
            ));
        }
    }
    for p in 0..di {
        for q in 0..di {
            for p2 in 0..di {
                for q2 in 0..di {
                    if (p, q, p2, q2) == (0, 0, 0, 0) {
                        continue;
                    }
                    if (p * q2 - q * p2).rem_euclid(di) == 0 {
                        constraints.push(sum_row((p, q), (p2, q2)));
                    }
                }
            }
        }
    }
    Ok(VConstraintSystem { d, constraints })
}

/// Unit `u` with `u·a ≡ gcd(a, m) (mod m)`.
fn unit_normalizer(a: u64, m: u64) -> u64 {
    let g = gcd(a, m);
    let (mg, ag) = (m / g, a / g);
    let (_, inv, _) = ext_gcd(ag as i64, mg as i64);
    let base = ModInt::new(inv, mg).value();
    (0..g)
        .map(|k| base + k * mg)
        .find(|&u| gcd(u, m) == 1)
        .expect("a unit lift always exists")
}

/// Row echelon basis of a submodule of `Z_m^cols` with the Howell property:
/// every module element whose first `c` entries vanish is spanned by the
/// pivot rows at columns `≥ c`.
#[derive(Debug, Clone)]
pub struct RowBasis {
    m: u64,
    pivots: Vec<Option<Vec<u64>>>,
    unit_pivots: usize,
}

impl RowBasis {
    pub fn new(m: u64, cols: usize) -> Self {
        Self {
            m,
            pivots: vec![None; cols],
            unit_pivots: 0,
        }
    }

    fn set_pivot(&mut self, c: usize, row: Vec<u64>) {
        let was_unit = self.pivots[c].as_ref().is_some_and(|p| p[c] == 1);
        let is_unit = row[c] == 1;
        self.unit_pivots = self.unit_pivots + usize::from(is_unit) - usize::from(was_unit);
        self.pivots[c] = Some(row);
    }

    fn combine(&self, a: &[u64], sa: u64, b: &[u64], sb: u64) -> Vec<u64> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x * sa + y * sb) % self.m)
            .collect()
    }

    fn scaled(&self, a: &[u64], s: u64) -> Vec<u64> {
        a.iter().map(|&x| x * s % self.m).collect()
    }

    pub fn insert(&mut self, row: Vec<u64>) {
        let m = self.m;
        let mut stack = vec![row];
        while let Some(mut row) = stack.pop() {
            while let Some(c) = row.iter().position(|&x| x != 0) {
                let e = row[c];
                let Some(pivot) = self.pivots[c].as_ref() else {
                    let u = unit_normalizer(e, m);
                    let row = self.scaled(&row, u);
                    let ann = self.scaled(&row, m / row[c]);
                    self.set_pivot(c, row);
                    stack.push(ann);
                    break;
                };
                let g = pivot[c];
                if e % g == 0 {
                    row = self.combine(&row, 1, pivot, m - (e / g) % m);
                    continue;
                }
                let (h, s, t) = ext_gcd(g as i64, e as i64);
                let (h, s, t) = (h as u64, ModInt::new(s, m).value(), ModInt::new(t, m).value());
                let q = self.combine(pivot, s, &row, t);
                let rest = self.combine(pivot, e / h, &row, m - g / h);
                let ann = self.scaled(&q, m / h);
                self.set_pivot(c, q);
                stack.push(ann);
                row = rest;
            }
        }
    }

    /// Whether `row` lies in the module.
    pub fn contains(&self, row: &[u64]) -> bool {
        let mut row = row.to_vec();
        while let Some(c) = row.iter().position(|&x| x != 0) {
            let Some(pivot) = self.pivots[c].as_ref() else {
                return false;
            };
            let g = pivot[c];
            if !row[c].is_multiple_of(g) {
                return false;
            }
            row = self.combine(&row, 1, pivot, self.m - (row[c] / g) % self.m);
        }
        true
    }

    /// A pivot in the last (right-hand side) column means `0 ≡ r ≠ 0`.
    pub fn is_consistent(&self) -> bool {
        self.pivots.last().is_some_and(|p| p.is_none())
    }

    /// Order of the homogeneous solution group contributed by each unknown.
    pub fn kernel_orders(&self) -> Vec<u64> {
        let n = self.pivots.len() - 1;
        (0..n)
            .map(|c| self.pivots[c].as_ref().map_or(self.m, |p| p[c]))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.unit_pivots == self.pivots.len() - 1
    }

    /// Back-substitution once every unknown has a unit pivot.
    pub fn unique_solution(&self) -> Option<Vec<u64>> {
        if !self.is_complete() || !self.is_consistent() {
            return None;
        }
        let n = self.pivots.len() - 1;
        let mut x = vec![0u64; n];
        for c in (0..n).rev() {
            let p = self.pivots[c].as_ref().expect("complete");
            let s = (c + 1..n).fold(0u64, |acc, j| (acc + p[j] * x[j]) % self.m);
            x[c] = (p[n] + self.m - s) % self.m;
        }
        Some(x)
    }
}

/// `u` indexed by variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub d: u64,
    pub u: Vec<u64>,
}

impl Assignment {
    pub fn u(&self, p: u64, q: u64) -> u64 {
        self.u[((p % self.d) * self.d + q % self.d) as usize]
    }

    /// `v = u/2`, if every `u` is even.
    pub fn v(&self) -> Option<Vec<u64>> {
        self.u
            .iter()
            .map(|&x| (x % 2 == 0).then_some(x / 2))
            .collect()
    }
}

/// A witness row: either a generated constraint or a consequence with its
/// explicit integer combination of generated constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessRow {
    pub coeffs: Vec<(usize, u64)>,
    pub rhs: u64,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Generated(usize),
    Derived { name: String, combination: Vec<(usize, i64)> },
}

/// A small infeasible subsystem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub d: u64,
    pub rows: Vec<WitnessRow>,
}

impl Witness {
    pub fn unknowns(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .rows
            .iter()
            .flat_map(|r| r.coeffs.iter().map(|&(x, _)| x))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Human-readable lines, one per row.
    pub fn describe(&self, system: &VConstraintSystem) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                let label = match &r.origin {
                    Origin::Generated(i) => system.constraints[*i].source.to_string(),
                    Origin::Derived { name, combination } => {
                        let parts: Vec<String> = combination
                            .iter()
                            .map(|(i, k)| format!("{k}×[{}]", system.constraints[*i].source))
                            .collect();
                        format!("{name} = {}", parts.join(" + "))
                    }
                };
                format!("{label}: {}", RowDisplay { coeffs: &r.coeffs, rhs: r.rhs, d: self.d })
            })
            .collect()
    }
}

struct RowDisplay<'a> {
    coeffs: &'a [(usize, u64)],
    rhs: u64,
    d: u64,
}

impl fmt::Display for RowDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_row(self.coeffs, self.rhs, self.d, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NogoVerdict {
    Unique(Assignment),
    Infeasible(Option<Witness>),
    /// Homogeneous solution group order per unknown (`1` = determined).
    Multiple { kernel_orders: Vec<u64> },
}

impl NogoVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            NogoVerdict::Unique(_) => "unique",
            NogoVerdict::Infeasible(_) => "infeasible",
            NogoVerdict::Multiple { .. } => "multiple",
        }
    }
}

fn satisfies(c: &Constraint, x: &[u64], m: u64) -> bool {
    c.coeffs.iter().fold(0u64, |acc, &(v, k)| (acc + k * x[v]) % m) == c.rhs
}

/// Solves the system by Howell-form elimination over `Z_{2d}`; infeasible
/// systems come with a witness of at most three rows when one exists.
pub fn solve(system: &VConstraintSystem) -> NogoVerdict {
    let m = system.modulus();
    let n = system.num_vars();
    let mut basis = RowBasis::new(m, n + 1);
    for (i, c) in system.constraints.iter().enumerate() {
        basis.insert(system.dense(&c.coeffs, c.rhs));
        if !basis.is_consistent() {
            return NogoVerdict::Infeasible(find_witness(system));
        }
        if basis.is_complete() {
            let x = basis.unique_solution().expect("complete and consistent");
            if system.constraints[i + 1..].iter().all(|c| satisfies(c, &x, m)) {
                return NogoVerdict::Unique(Assignment { d: system.d, u: x });
            }
            return NogoVerdict::Infeasible(find_witness(system));
        }
    }
    NogoVerdict::Multiple {
        kernel_orders: basis.kernel_orders(),
    }
}

/// The full row module of the system, including its right-hand sides.
pub fn row_module(system: &VConstraintSystem) -> RowBasis {
    let mut basis = RowBasis::new(system.modulus(), system.num_vars() + 1);
    for c in &system.constraints {
        basis.insert(system.dense(&c.coeffs, c.rhs));
    }
    basis
}

/// Whether `Σ coeffs·u ≡ rhs` follows linearly from the system.
pub fn implies(system: &VConstraintSystem, module: &RowBasis, coeffs: &[(usize, u64)], rhs: u64) -> bool {
    module.contains(&system.dense(coeffs, rhs))
}

fn index_of(system: &VConstraintSystem) -> HashMap<Source, usize> {
    system
        .constraints
        .iter()
        .enumerate()
        .map(|(i, c)| (c.source, i))
        .collect()
}

fn combine_rows(system: &VConstraintSystem, combination: &[(usize, i64)]) -> (Vec<(usize, u64)>, u64) {
    let m = system.modulus();
    let mut terms = Vec::new();
    let mut rhs = 0i64;
    for &(i, k) in combination {
        let c = &system.constraints[i];
        terms.extend(c.coeffs.iter().map(|&(v, x)| (v, k * x as i64)));
        rhs += k * c.rhs as i64;
    }
    (merge_terms(&terms, m), ModInt::new(rhs, m).value())
}

/// Consequences used in hand proofs, each with its explicit combination:
/// `2u_{p,q} ≡ 2pq` (Hermiticity plus two Hadamard steps),
/// `u_{2p,2q} ≡ 4pq` (self-sum plus the former), and
/// `u_{p,q} ≡ u_{-p,-q}` (two Hadamard steps).
pub fn derived_rows(system: &VConstraintSystem) -> Vec<WitnessRow> {
    let d = system.d;
    let idx = index_of(system);
    let neg = |x: u64| (d - x % d) % d;
    let mut out = Vec::new();
    for p in 0..d {
        for q in 0..d {
            let herm = idx[&Source::Hermiticity { p, q }];
            let had = idx[&Source::Hadamard { p, q }];
            let had2 = idx[&Source::Hadamard { p: neg(q), q: p }];
            let twov = vec![(herm, 1), (had, 1), (had2, 1)];
            let mut self_sum = twov.clone();
            if let Some(&s) = idx.get(&Source::Sum { a: (p, q), b: (p, q) }) {
                self_sum.push((s, 1));
            }
            for (name, combination) in [
                (format!("double({p},{q})"), twov),
                (format!("doubled-point({p},{q})"), self_sum),
                (format!("double-hadamard({p},{q})"), vec![(had, 1), (had2, 1)]),
            ] {
                let (coeffs, rhs) = combine_rows(system, &combination);
                out.push(WitnessRow {
                    coeffs,
                    rhs,
                    origin: Origin::Derived { name, combination },
                });
            }
        }
    }
    out
}

/// Feasibility of a few rows in few unknowns via a local Howell basis.
fn small_feasible(rows: &[&WitnessRow], m: u64) -> bool {
    let mut vars: Vec<usize> = rows.iter().flat_map(|r| r.coeffs.iter().map(|&(v, _)| v)).collect();
    vars.sort_unstable();
    vars.dedup();
    let mut basis = RowBasis::new(m, vars.len() + 1);
    for r in rows {
        let mut dense = vec![0u64; vars.len() + 1];
        for &(v, c) in &r.coeffs {
            dense[vars.binary_search(&v).expect("collected")] = c;
        }
        dense[vars.len()] = r.rhs;
        basis.insert(dense);
        if !basis.is_consistent() {
            return false;
        }
    }
    true
}

/// Searches small unknown sets for an infeasible subsystem of at most three rows.
pub fn find_witness(system: &VConstraintSystem) -> Option<Witness> {
    let m = system.modulus();
    let mut pool: Vec<WitnessRow> = system
        .constraints
        .iter()
        .enumerate()
        .map(|(i, c)| WitnessRow {
            coeffs: c.coeffs.clone(),
            rhs: c.rhs,
            origin: Origin::Generated(i),
        })
        .collect();
    pool.extend(derived_rows(system));

    let varset = |r: &WitnessRow| r.coeffs.iter().map(|&(v, _)| v).collect::<Vec<_>>();
    let mut by_set: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for (i, r) in pool.iter().enumerate() {
        let s = varset(r);
        if s.len() > 3 {
            continue;
        }
        by_set
            .entry(s.clone())
            .or_insert_with(|| {
                candidates.push(s.clone());
                Vec::new()
            })
            .push(i);
    }
    // unions of two-variable sets sharing an unknown
    let pairs: Vec<&Vec<usize>> = candidates.iter().filter(|s| s.len() == 2).collect();
    let mut by_var: HashMap<usize, Vec<&Vec<usize>>> = HashMap::new();
    for s in &pairs {
        for &v in s.iter() {
            by_var.entry(v).or_default().push(s);
        }
    }
    let mut extra: Vec<Vec<usize>> = Vec::new();
    let mut seen: std::collections::HashSet<Vec<usize>> = candidates.iter().cloned().collect();
    let mut vars_sorted: Vec<_> = by_var.keys().copied().collect();
    vars_sorted.sort_unstable();
    for v in vars_sorted {
        let sets = &by_var[&v];
        for (i, a) in sets.iter().enumerate() {
            for b in &sets[i + 1..] {
                let mut u: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
                u.sort_unstable();
                u.dedup();
                if u.len() == 3 && seen.insert(u.clone()) {
                    extra.push(u);
                }
            }
        }
    }
    candidates.extend(extra);
    candidates.sort_by_key(|s| s.len());

    for s in &candidates {
        let mut rows: Vec<usize> = Vec::new();
        for mask in 0u32..(1 << s.len()) {
            let sub: Vec<usize> = (0..s.len()).filter(|b| mask & (1 << b) != 0).map(|b| s[b]).collect();
            if let Some(ix) = by_set.get(&sub) {
                rows.extend(ix);
            }
        }
        rows.sort_unstable();
        let refs: Vec<&WitnessRow> = rows.iter().map(|&i| &pool[i]).collect();
        if small_feasible(&refs, m) {
            continue;
        }
        for size in 1..=3usize {
            if let Some(pick) = first_infeasible_subset(&rows, size, &pool, m) {
                return Some(Witness {
                    d: system.d,
                    rows: pick.into_iter().map(|i| pool[i].clone()).collect(),
                });
            }
        }
    }
    None
}

fn first_infeasible_subset(rows: &[usize], size: usize, pool: &[WitnessRow], m: u64) -> Option<Vec<usize>> {
    let k = rows.len();
    if size > k {
        return None;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        let pick: Vec<usize> = idx.iter().map(|&i| rows[i]).collect();
        let refs: Vec<&WitnessRow> = pick.iter().map(|&i| &pool[i]).collect();
        if !small_feasible(&refs, m) {
            return Some(pick);
        }
        // next combination
        let mut i = size;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if idx[i] != i + k - size {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Independent check of a witness: provenance of every row, size limits,
/// and exhaustive search over its unknowns.
pub fn recheck_witness(system: &VConstraintSystem, w: &Witness) -> Result<(), String> {
    let m = system.modulus();
    if w.rows.is_empty() || w.rows.len() > 3 {
        return Err(format!("witness has {} rows", w.rows.len()));
    }
    for r in &w.rows {
        let (coeffs, rhs) = match &r.origin {
            Origin::Generated(i) => {
                let c = system
                    .constraints
                    .get(*i)
                    .ok_or_else(|| format!("no constraint {i}"))?;
                (c.coeffs.clone(), c.rhs)
            }
            Origin::Derived { combination, .. } => combine_rows(system, combination),
        };
        if coeffs != r.coeffs || rhs != r.rhs {
            return Err("witness row does not match its stated origin".into());
        }
    }
    let vars = w.unknowns();
    if vars.len() > 3 {
        return Err(format!("witness involves {} unknowns", vars.len()));
    }
    let total = m.pow(vars.len() as u32);
    let mut x = vec![0u64; system.num_vars()];
    for code in 0..total {
        let mut rest = code;
        for &v in &vars {
            x[v] = rest % m;
            rest /= m;
        }
        let ok = w.rows.iter().all(|r| {
            r.coeffs.iter().fold(0u64, |acc, &(v, c)| (acc + c * x[v]) % m) == r.rhs
        });
        if ok {
            return Err(format!("assignment {:?} satisfies the witness", vars.iter().map(|&v| x[v]).collect::<Vec<_>>()));
        }
    }
    Ok(())
}

/// Expected odd-`d` solution `u_{p,q} = 2·(2^{-1}pq mod d)`.
pub fn expected_odd_solution(d: u64) -> Result<Assignment, NogoError> {
    let h = inv2(d).map_err(|_| NogoError::EvenDimension(d))?;
    let u = (0..d * d)
        .map(|i| 2 * (h * ModInt::new((i / d * (i % d)) as i64, d)).value())
        .collect();
    Ok(Assignment { d, u })
}

/// Plugs the unique assignment into `F_00 = (1/d) Σ ω^{v_{p,q}} W_{p,q}^†`,
/// compares with the Gross origin operator, and checks that translating
/// `F_00` reproduces every phase-point operator.
pub fn verify_against_gross(d: u64) -> Result<bool, NogoError> {
    if d.is_multiple_of(2) {
        return Err(NogoError::EvenDimension(d));
    }
    let system = build_constraints(d)?;
    let NogoVerdict::Unique(a) = solve(&system) else {
        return Err(NogoError::NotUnique(d));
    };
    let m = 2 * d;
    let mut f00 = OperatorMatrix::zeros(d as usize);
    for b in PhasePoint::all(d, 1) {
        let (p, q) = b.coords()[0];
        // ω^{v} = exp(πi u / d)
        let phase = omega_power(ModInt::new(a.u(p, q) as i64, m), d);
        f00 = &f00 + &weyl_matrix(&b).adjoint().scale(phase);
    }
    let f00 = f00.scale_real(1.0 / d as f64);
    let origin = phase_point(&PhasePoint::origin(d, 1))?.matrix;
    if !f00.approx_eq(&origin, TOL) {
        return Ok(false);
    }
    for b in PhasePoint::all(d, 1) {
        let moved = weyl_superop_apply(&b, &f00).expect("matching dimensions");
        if !moved.approx_eq(&phase_point(&b)?.matrix, TOL) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// In the Gross frame: `X` eigenstates with eigenvalue `ω^{-p₁}` live uniformly
/// on the line `p = p₁`, `Z` eigenstates with eigenvalue `ω^{q₁}` on `q = q₁`,
/// conjugation by `X` and `Z` shifts `q` and `p` by one, and the Hadamard
/// fixes the origin.
pub fn ontic_labelling_check(d: u64) -> Result<bool, NogoError> {
    if d.is_multiple_of(2) {
        return Err(NogoError::EvenDimension(d));
    }
    let m = 2 * d;
    let pts = PhasePoint::all(d, 1);
    let on_line = |w: &crate::frames::QuasiDistribution, pred: &dyn Fn(u64, u64) -> bool| {
        pts.iter().all(|a| {
            let (p, q) = a.coords()[0];
            let expected = if pred(p, q) { 1.0 / d as f64 } else { 0.0 };
            (w.get(a) - expected).abs() <= TOL
        })
    };
    for k in 0..d {
        let x_state = eigenstate(StabilizerBasis::X, ModInt::new(-2 * k as i64, m), d)?;
        if !on_line(&wigner(&x_state.density(), d, 1)?, &|p, _| p == k) {
            return Ok(false);
        }
        let z_state = eigenstate(StabilizerBasis::Z, ModInt::new(2 * k as i64, m), d)?;
        if !on_line(&wigner(&z_state.density(), d, 1)?, &|_, q| q == k) {
            return Ok(false);
        }
    }
    // With a self-dual basis frame, the rep of U sends λ to μ exactly when
    // U A_λ U† = A_μ, so comparing conjugated operators checks the permutation.
    let ops: Vec<OperatorMatrix> = pts
        .iter()
        .map(|a| phase_point(a).map(|p| p.matrix))
        .collect::<Result<_, _>>()?;
    for by in [PhasePoint::single(0, 1, d), PhasePoint::single(1, 0, d)] {
        for a in &pts {
            let moved = weyl_superop_apply(&by, &ops[a.index()]).expect("matching dimensions");
            if !moved.approx_eq(&ops[a.add(&by).index()], TOL) {
                return Ok(false);
            }
        }
    }
    Ok(ops[0].conjugate_by(&crate::clifford::hadamard(d)).approx_eq(&ops[0], TOL))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(system: &VConstraintSystem) -> Vec<Vec<u64>> {
        let m = system.modulus();
        let n = system.num_vars();
        let total = m.pow(n as u32);
        let mut out = Vec::new();
        let mut x = vec![0u64; n];
        for code in 0..total {
            let mut rest = code;
            for slot in x.iter_mut() {
                *slot = rest % m;
                rest /= m;
            }
            if system.constraints.iter().all(|c| satisfies(c, &x, m)) {
                out.push(x.clone());
            }
        }
        out
    }

    #[test]
    fn constraint_counts() {
        for d in [2u64, 3, 4, 5, 6] {
            let s = build_constraints(d).unwrap();
            // oracle: enumerate commuting ordered pairs directly
            let mut pairs = 0;
            for a in PhasePoint::all(d, 1) {
                for b in PhasePoint::all(d, 1) {
                    if a.symplectic(&b) == 0 {
                        pairs += 1;
                    }
                }
            }
            assert_eq!(s.count(Rule::Hermiticity), (d * d) as usize);
            assert_eq!(s.count(Rule::HadamardCovariance), (d * d) as usize);
            assert_eq!(s.count(Rule::CommutingSum), pairs);
            assert_eq!(s.constraints[0].coeffs, vec![(0, 2 * d - 1)]);
            assert_eq!(s.constraints[0].rhs, 0);
            for c in &s.constraints {
                assert!(c.rhs < 2 * d && c.coeffs.iter().all(|&(_, k)| k < 2 * d && k != 0));
            }
        }
        assert_eq!(build_constraints(3).unwrap().count(Rule::CommutingSum), 33);
        assert!(build_constraints(1).is_err());
    }

    #[test]
    fn unique_for_odd() {
        for d in [3u64, 5, 7, 9, 15] {
            let s = build_constraints(d).unwrap();
            match solve(&s) {
                NogoVerdict::Unique(a) => {
                    assert_eq!(a, expected_odd_solution(d).unwrap());
                    assert!(s.constraints.iter().all(|c| satisfies(c, &a.u, 2 * d)));
                    let v = a.v().unwrap();
                    let h = inv2(d).unwrap().value();
                    for p in 0..d {
                        for q in 0..d {
                            assert_eq!(v[(p * d + q) as usize], h * p * q % d);
                        }
                    }
                }
                other => panic!("d = {d}: {other:?}"),
            }
        }
        let a = match solve(&build_constraints(3).unwrap()) {
            NogoVerdict::Unique(a) => a,
            _ => unreachable!(),
        };
        assert_eq!(a.u(1, 1), 4);
        assert_eq!(a.v().unwrap()[4], 2);
    }

    #[test]
    fn infeasible_for_even_with_checked_witness() {
        for d in [2u64, 4, 6, 8, 10, 12] {
            let s = build_constraints(d).unwrap();
            match solve(&s) {
                NogoVerdict::Infeasible(Some(w)) => {
                    recheck_witness(&s, &w).unwrap_or_else(|e| panic!("d = {d}: {e}"));
                    assert!(w.rows.len() <= 3);
                }
                other => panic!("d = {d}: {other:?}"),
            }
        }
    }

    #[test]
    fn d6_witness_is_the_hadamard_fixed_point() {
        let s = build_constraints(6).unwrap();
        let NogoVerdict::Infeasible(Some(w)) = solve(&s) else { panic!() };
        assert_eq!(w.rows.len(), 1);
        let Origin::Generated(i) = w.rows[0].origin else { panic!() };
        assert_eq!(s.constraints[i].source, Source::Hadamard { p: 3, q: 3 });
        assert!(w.rows[0].coeffs.is_empty());
        assert_eq!(w.rows[0].rhs, 6);
    }

    #[test]
    fn d4_hand_contradiction_is_infeasible() {
        // sum of (0,2) and (2,0) with the doubled-point rows for (0,1), (1,0), (1,1)
        let s = build_constraints(4).unwrap();
        let derived = derived_rows(&s);
        let pick = |name: &str| derived.iter().find(|r| matches!(&r.origin, Origin::Derived { name: n, .. } if n == name)).unwrap();
        let idx = index_of(&s);
        let sum = &s.constraints[idx[&Source::Sum { a: (0, 2), b: (2, 0) }]];
        let sum_row = WitnessRow { coeffs: sum.coeffs.clone(), rhs: sum.rhs, origin: Origin::Generated(0) };
        let rows = [&sum_row, pick("doubled-point(0,1)"), pick("doubled-point(1,0)"), pick("doubled-point(1,1)")];
        assert!(!small_feasible(&rows, 8));
        assert!(small_feasible(&rows[..3], 8));
    }

    #[test]
    fn brute_force_agrees_d2() {
        let s = build_constraints(2).unwrap();
        assert!(brute_force(&s).is_empty());
        assert!(matches!(solve(&s), NogoVerdict::Infeasible(_)));
    }

    #[test]
    fn brute_force_agrees_d3() {
        let s = build_constraints(3).unwrap();
        let all = brute_force(&s);
        assert_eq!(all, vec![expected_odd_solution(3).unwrap().u]);
    }

    #[test]
    fn derived_rows_lie_in_row_module() {
        for d in [2u64, 3, 4, 5, 6, 8, 9] {
            let s = build_constraints(d).unwrap();
            let module = row_module(&s);
            for r in derived_rows(&s) {
                assert!(implies(&s, &module, &r.coeffs, r.rhs), "d = {d}: {:?}", r.origin);
            }
            for c in &s.constraints {
                assert!(module.contains(&s.dense(&c.coeffs, c.rhs)));
            }
        }
    }

    #[test]
    fn multiple_when_underdetermined() {
        let full = build_constraints(3).unwrap();
        let herm_only = VConstraintSystem {
            d: 3,
            constraints: full.constraints.iter().filter(|c| c.rule() == Rule::Hermiticity).cloned().collect(),
        };
        let NogoVerdict::Multiple { kernel_orders } = solve(&herm_only) else { panic!() };
        let count: u128 = kernel_orders.iter().map(|&k| k as u128).product();
        // oracle: 4 free pairs (6 choices each), u_00 with 2u ≡ 0 (2 choices)
        assert_eq!(count, 6u128.pow(4) * 2);
    }

    #[test]
    fn row_basis_matches_brute_force_on_random_systems() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..300 {
            let m = [4u64, 6, 8, 9, 12][rng.random_range(0..5)];
            let n = rng.random_range(1..4);
            let rows: Vec<Vec<u64>> = (0..rng.random_range(1..5))
                .map(|_| (0..=n).map(|_| rng.random_range(0..m)).collect())
                .collect();
            let mut basis = RowBasis::new(m, n + 1);
            for r in &rows {
                basis.insert(r.clone());
            }
            let mut count = 0u64;
            for code in 0..m.pow(n as u32) {
                let x: Vec<u64> = (0..n).map(|i| code / m.pow(i as u32) % m).collect();
                if rows.iter().all(|r| (0..n).fold(0, |a, j| (a + r[j] * x[j]) % m) == r[n]) {
                    count += 1;
                }
            }
            if basis.is_consistent() {
                assert_eq!(count, basis.kernel_orders().iter().product::<u64>(), "{rows:?} mod {m}");
            } else {
                assert_eq!(count, 0, "{rows:?} mod {m}");
            }
        }
    }

    #[test]
    fn gross_and_labelling_checks() {
        for d in [3u64, 5, 9] {
            assert!(verify_against_gross(d).unwrap());
        }
        for d in [3u64, 5] {
            assert!(ontic_labelling_check(d).unwrap());
        }
        assert_eq!(verify_against_gross(4), Err(NogoError::EvenDimension(4)));
    }

    #[test]
    fn labelling_permutations_match_frame_reps() {
        use crate::frames::{rep_channel, Channel};
        use crate::gross::gross_frame;
        for d in [3u64, 5] {
            let g = gross_frame(d, 1).unwrap();
            let perm = |u: &OperatorMatrix| {
                rep_channel(&Channel::from_unitary(u, d, 1).unwrap(), &g.frame, &g.dual)
                    .unwrap()
                    .as_permutation(TOL)
                    .unwrap()
            };
            let x = perm(&weyl_matrix(&PhasePoint::single(0, 1, d)));
            let z = perm(&weyl_matrix(&PhasePoint::single(1, 0, d)));
            for a in PhasePoint::all(d, 1) {
                let (p, q) = a.coords()[0];
                assert_eq!(x[a.index()], PhasePoint::single(p as i64, q as i64 + 1, d).index());
                assert_eq!(z[a.index()], PhasePoint::single(p as i64 + 1, q as i64, d).index());
            }
            assert_eq!(perm(&crate::clifford::hadamard(d))[0], 0);
        }
    }

    #[test]
    fn witness_description_is_readable() {
        let s = build_constraints(6).unwrap();
        let NogoVerdict::Infeasible(Some(w)) = solve(&s) else { panic!() };
        let lines = w.describe(&s);
        assert_eq!(lines, vec!["HadamardCovariance at (3,3): 0 ≡ 6 (mod 12)".to_string()]);
    }
}
