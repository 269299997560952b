//! Reduction from Max NAE-E3-SAT to spherical discrepancy.
//!
//! A clause on variables `a, b, c` contributes `±(1/√3)(s_a e_a + s_b e_b +
//! s_c e_c)`, where `s` is the literal sign, and every variable contributes
//! `±e_i`. For a `±1/√n` coloring the axis vectors give value `1/√n`; a clause
//! that is not-all-equal satisfied contributes `1/√(3n)`, a violated one
//! `3/√(3n) = √(3/n)`.

use crate::linalg::{dot, norm};
use crate::solver::{Instance, SolverError};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardnessError {
    #[error("clause {clause} repeats variable {var}")]
    MalformedClause { clause: usize, var: usize },
    #[error("clause {clause} mentions variable {var}, but the formula has {num_vars}")]
    VariableOutOfRange {
        clause: usize,
        var: usize,
        num_vars: usize,
    },
    #[error("variable {var} occurs {count} times, above the bound {bound}")]
    OccurrenceBound { var: usize, count: usize, bound: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("point has dimension {found}, instance has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point has norm {0}, not 1 within 1e-9")]
    NotUnit(f64),
    #[error("{what} = {value} is outside its domain")]
    Domain { what: &'static str, value: f64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// A variable (0-based) with a polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Self { var, negated: false }
    }

    pub fn neg(var: usize) -> Self {
        Self { var, negated: true }
    }

    /// From the signed 1-based form used in formula files.
    pub fn from_dimacs(v: i64) -> Option<Self> {
        if v == 0 {
            return None;
        }
        Some(Self {
            var: (v.unsigned_abs() - 1) as usize,
            negated: v < 0,
        })
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }

    pub fn sign(self) -> f64 {
        if self.negated {
            -1.0
        } else {
            1.0
        }
    }

    pub fn value(self, assignment: &[bool]) -> bool {
        assignment[self.var] != self.negated
    }
}

pub type Clause = [Literal; 3];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaeFormula {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl NaeFormula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, HardnessError> {
        for (ci, c) in clauses.iter().enumerate() {
            for (k, l) in c.iter().enumerate() {
                if l.var >= num_vars {
                    return Err(HardnessError::VariableOutOfRange {
                        clause: ci,
                        var: l.var + 1,
                        num_vars,
                    });
                }
                if c[..k].iter().any(|o| o.var == l.var) {
                    return Err(HardnessError::MalformedClause {
                        clause: ci,
                        var: l.var + 1,
                    });
                }
            }
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn occurrences(&self) -> Vec<usize> {
        let mut count = vec![0; self.num_vars];
        for c in &self.clauses {
            for l in c {
                count[l.var] += 1;
            }
        }
        count
    }

    /// Largest number of occurrences of any variable.
    pub fn occurrence_bound(&self) -> usize {
        self.occurrences().into_iter().max().unwrap_or(0)
    }

    /// Checks that every variable occurs at most `bound` times (which also
    /// gives `m ≤ bound·n/3`).
    pub fn check_occurrence_bound(&self, bound: usize) -> Result<(), HardnessError> {
        for (var, count) in self.occurrences().into_iter().enumerate() {
            if count > bound {
                return Err(HardnessError::OccurrenceBound {
                    var: var + 1,
                    count,
                    bound,
                });
            }
        }
        Ok(())
    }

    /// A clause is satisfied when its literals are not all equal.
    pub fn clause_satisfied(c: &Clause, assignment: &[bool]) -> bool {
        let v = c.map(|l| l.value(assignment));
        !(v[0] == v[1] && v[1] == v[2])
    }

    pub fn satisfied_count(&self, assignment: &[bool]) -> usize {
        self.clauses
            .iter()
            .filter(|c| Self::clause_satisfied(c, assignment))
            .count()
    }

    /// Parses `p nae3 <n> <m>` followed by `m` lines of three nonzero signed
    /// integers (an optional trailing `0` is accepted). Blank lines and lines
    /// starting with `c` or `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, HardnessError> {
        let err = |line: usize, message: String| HardnessError::Parse { line, message };
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('c') || s.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = s.split_whitespace().collect();
            if fields[0] == "p" {
                if header.is_some() {
                    return Err(err(line, "second header line".into()));
                }
                if fields.len() != 4 || fields[1] != "nae3" {
                    return Err(err(line, format!("expected `p nae3 <n> <m>`, got `{s}`")));
                }
                let n = fields[2]
                    .parse()
                    .map_err(|_| err(line, format!("bad variable count `{}`", fields[2])))?;
                let m = fields[3]
                    .parse()
                    .map_err(|_| err(line, format!("bad clause count `{}`", fields[3])))?;
                header = Some((n, m));
                continue;
            }
            if header.is_none() {
                return Err(err(line, "clause before the `p nae3` header".into()));
            }
            let mut nums = fields
                .iter()
                .map(|f| f.parse::<i64>().map_err(|_| err(line, format!("bad literal `{f}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            if nums.len() == 4 && nums[3] == 0 {
                nums.pop();
            }
            if nums.len() != 3 {
                return Err(err(line, format!("expected 3 literals, got {}", nums.len())));
            }
            let mut lits = [Literal::pos(0); 3];
            for (slot, &v) in lits.iter_mut().zip(&nums) {
                *slot = Literal::from_dimacs(v).ok_or_else(|| err(line, "literal 0".into()))?;
            }
            clauses.push(lits);
        }
        let (n, m) = header.ok_or_else(|| err(0, "missing `p nae3` header".into()))?;
        if clauses.len() != m {
            return Err(err(
                0,
                format!("header announces {m} clauses, found {}", clauses.len()),
            ));
        }
        Self::new(n, clauses)
    }
}

impl fmt::Display for NaeFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p nae3 {} {}", self.num_vars, self.clauses.len())?;
        for c in &self.clauses {
            writeln!(
                f,
                "{} {} {} 0",
                c[0].to_dimacs(),
                c[1].to_dimacs(),
                c[2].to_dimacs()
            )?;
        }
        Ok(())
    }
}

/// Where a vector of the reduced instance came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Clause { index: usize, positive: bool },
    Axis { var: usize, positive: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyInstance {
    n: usize,
    vectors: Vec<Vec<f64>>,
    origins: Vec<Origin>,
}

impl DiscrepancyInstance {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn origins(&self) -> &[Origin] {
        &self.origins
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn to_instance(&self) -> Result<Instance, HardnessError> {
        Ok(Instance::new(self.n, self.vectors.clone())?)
    }
}

/// Clause vectors (each followed by its negation) come first, then `±e_i`.
pub fn reduce_nae_e3sat(formula: &NaeFormula) -> DiscrepancyInstance {
    let n = formula.num_vars;
    let s = 1.0 / 3f64.sqrt();
    let mut vectors = Vec::with_capacity(2 * formula.clauses.len() + 2 * n);
    let mut origins = Vec::with_capacity(vectors.capacity());
    for (index, c) in formula.clauses.iter().enumerate() {
        let mut v = vec![0.0; n];
        for l in c {
            v[l.var] = s * l.sign();
        }
        let minus = v.iter().map(|a| -a).collect();
        vectors.push(v);
        origins.push(Origin::Clause {
            index,
            positive: true,
        });
        vectors.push(minus);
        origins.push(Origin::Clause {
            index,
            positive: false,
        });
    }
    for var in 0..n {
        for positive in [true, false] {
            let mut v = vec![0.0; n];
            v[var] = if positive { 1.0 } else { -1.0 };
            vectors.push(v);
            origins.push(Origin::Axis { var, positive });
        }
    }
    DiscrepancyInstance {
        n,
        vectors,
        origins,
    }
}

/// `max_i ⟨v_i, x⟩` for a unit `x`.
pub fn evaluate_instance(instance: &DiscrepancyInstance, x: &[f64]) -> Result<f64, HardnessError> {
    if x.len() != instance.n {
        return Err(HardnessError::DimensionMismatch {
            expected: instance.n,
            found: x.len(),
        });
    }
    let len = norm(x);
    if (len - 1.0).abs() > 1e-9 {
        return Err(HardnessError::NotUnit(len));
    }
    Ok(instance
        .vectors
        .iter()
        .map(|v| dot(v, x))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// The normalized `±1` coloring `(±1, …, ±1)/√n` of an assignment.
pub fn coloring_vector(assignment: &[bool]) -> Vec<f64> {
    let s = 1.0 / (assignment.len() as f64).sqrt();
    assignment.iter().map(|&b| if b { s } else { -s }).collect()
}

/// `min(√((B − (9/16)(1−γ)) / (B − (1−γ))), 3√3/4)`.
pub fn gap_constant(bound: usize, gamma: f64) -> Result<f64, HardnessError> {
    if bound < 3 {
        return Err(HardnessError::Domain {
            what: "occurrence bound",
            value: bound as f64,
        });
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(HardnessError::Domain {
            what: "gamma",
            value: gamma,
        });
    }
    let b = bound as f64;
    let s = 1.0 - gamma;
    let first = ((b - 9.0 / 16.0 * s) / (b - s)).sqrt();
    Ok(first.min(3.0 * 3f64.sqrt() / 4.0))
}
