//! A small quantified-logic language for per-lanelet constraints.
//!
//! ```text
//! rule min_turn_radius: forall l in lanelets. min_turning_radius(l) >= 10.0
//! ```
//!
//! Operators bind, from tightest to loosest: `not`, `and`, `or`, `implies`.
//! `implies` is right-associative. `#` starts a line comment.

mod builtins;
mod eval;
mod parse;

use std::fmt;

pub use builtins::{Function, Predicate};
pub use eval::{evaluate, evaluate_partitioned, Measurement, RuleViolations, Violation, ViolationReport};
pub use parse::{parse_rules, ParseError};

/// The shipped rule file.
pub const DEFAULT_RULES: &str = include_str!("../../rules/default.rules");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Lanelets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
            Rel::Eq => "==",
            Rel::Ne => "!=",
        }
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Rel::Lt => a < b,
            Rel::Le => a <= b,
            Rel::Gt => a > b,
            Rel::Ge => a >= b,
            Rel::Eq => a == b,
            Rel::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Num(f64),
    Call(Function, String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Compare(Term, Rel, Term),
    Pred(Predicate, String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleAst {
    pub id: String,
    pub var: String,
    pub domain: Domain,
    pub body: Formula,
}

impl Formula {
    fn level(&self) -> u8 {
        match self {
            Formula::Implies(..) => 0,
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            _ => 3,
        }
    }

    /// Function calls in the body, left to right, without repeats.
    pub fn function_terms(&self) -> Vec<(Function, String)> {
        let mut out = Vec::new();
        self.collect_terms(&mut out);
        out
    }

    fn collect_terms(&self, out: &mut Vec<(Function, String)>) {
        match self {
            Formula::Not(f) => f.collect_terms(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_terms(out);
                b.collect_terms(out);
            }
            Formula::Compare(l, _, r) => {
                for t in [l, r] {
                    if let Term::Call(f, v) = t {
                        if !out.iter().any(|(g, w)| g == f && w == v) {
                            out.push((*f, v.clone()));
                        }
                    }
                }
            }
            Formula::Pred(..) => {}
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Num(v) => write!(f, "{v:?}"),
            Term::Call(func, var) => write!(f, "{}({var})", func.name()),
        }
    }
}

fn child(f: &mut fmt::Formatter<'_>, sub: &Formula, min_level: u8) -> fmt::Result {
    if sub.level() < min_level {
        write!(f, "({sub})")
    } else {
        write!(f, "{sub}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Not(a) => {
                f.write_str("not ")?;
                child(f, a, 3)
            }
            Formula::And(a, b) => {
                child(f, a, 2)?;
                f.write_str(" and ")?;
                child(f, b, 3)
            }
            Formula::Or(a, b) => {
                child(f, a, 1)?;
                f.write_str(" or ")?;
                child(f, b, 2)
            }
            Formula::Implies(a, b) => {
                child(f, a, 1)?;
                f.write_str(" implies ")?;
                child(f, b, 0)
            }
            Formula::Compare(l, r, t) => write!(f, "{l} {} {t}", r.symbol()),
            Formula::Pred(p, v) => write!(f, "{}({v})", p.name()),
        }
    }
}

impl fmt::Display for RuleAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}: forall {} in lanelets. {}", self.id, self.var, self.body)
    }
}

/// Canonical text of a rule list, one rule per line.
pub fn print_rules(rules: &[RuleAst]) -> String {
    rules.iter().map(|r| format!("{r}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_rules_parse_and_print() {
        let rules = parse_rules(DEFAULT_RULES).unwrap();
        let ids: Vec<_> = rules.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["elevation_complete", "no_self_loop", "polyline_valid", "min_turn_radius", "lane_width"]);
        assert_eq!(
            rules[3].body,
            Formula::Compare(Term::Call(Function::MinTurningRadius, "l".into()), Rel::Ge, Term::Num(10.0))
        );
        let text = print_rules(&rules);
        assert_eq!(parse_rules(&text).unwrap(), rules);
        assert!(text.contains("rule min_turn_radius: forall l in lanelets. min_turning_radius(l) >= 10.0\n"));
    }

    #[test]
    fn printer_keeps_grouping() {
        let src = "rule r: forall x in lanelets. (finite_elevation(x) implies valid_polyline(x)) implies not (self_successor(x) or 2 < min_width(x)) and min_width(x) != 3.5";
        let r = parse_rules(src).unwrap();
        let printed = print_rules(&r);
        assert_eq!(parse_rules(&printed).unwrap(), r);
        assert_eq!(
            printed.trim_end(),
            "rule r: forall x in lanelets. (finite_elevation(x) implies valid_polyline(x)) implies not (self_successor(x) or 2.0 < min_width(x)) and min_width(x) != 3.5"
        );
    }

    #[test]
    fn measured_terms_are_unique() {
        let r = parse_rules("rule r: forall l in lanelets. min_width(l) > 1 and min_width(l) < 9 or min_turning_radius(l) > 3").unwrap();
        assert_eq!(
            r[0].body.function_terms(),
            vec![(Function::MinWidth, "l".to_string()), (Function::MinTurningRadius, "l".to_string())]
        );
    }
}
