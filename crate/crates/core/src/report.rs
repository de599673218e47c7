//! Named inequality checks carrying both numeric sides.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    /// Strict relations are evaluated exactly; non-strict ones get a
    /// relative slack `tol` on the right-hand side.
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        let slack = tol * rhs.abs();
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Gt => lhs > rhs,
            Relation::Le => lhs <= rhs + slack,
            Relation::Ge => lhs >= rhs - slack,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        })
    }
}

/// One inequality `lhs REL rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub pass: bool,
    /// Not-applicable checks are reported but never fail a verdict.
    pub applicable: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, lhs: f64, relation: Relation, rhs: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            relation,
            rhs,
            pass: relation.holds(lhs, rhs, tol),
            applicable: true,
        }
    }

    pub fn not_applicable(mut self) -> Self {
        self.applicable = false;
        self
    }

    pub fn failed(&self) -> bool {
        self.applicable && !self.pass
    }
}

/// A list of checks; the verdict is the conjunction of the applicable ones.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub checks: Vec<Check>,
    pub verdict: bool,
}

impl CriterionReport {
    pub fn new(checks: Vec<Check>) -> Self {
        let verdict = checks.iter().all(|c| !c.failed());
        Self { checks, verdict }
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.failed())
    }
}
