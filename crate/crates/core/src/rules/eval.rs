use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Formula, RuleAst, Term};
use crate::laneletize::{format_number, network_hash, Lanelet, LaneletNetwork};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub term: String,
    #[serde(serialize_with = "number_or_token", deserialize_with = "number_from_token")]
    pub value: f64,
}

fn number_or_token<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&format_number(*v))
    }
}

fn number_from_token<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Token(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(v) => Ok(v),
        Raw::Token(t) => match t.as_str() {
            "nan" => Ok(f64::NAN),
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            _ => Err(serde::de::Error::custom(format!("`{t}` is not a number"))),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub element_id: u32,
    pub measured: Vec<Measurement>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleViolations {
    pub rule_id: String,
    /// Ascending element id.
    pub violations: Vec<Violation>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub network_hash: String,
    /// In rule-file order.
    pub rules: Vec<RuleViolations>,
    pub total_violations: usize,
}

impl ViolationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// One line per violation, then a summary line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.rules {
            for v in &r.violations {
                let _ = write!(s, "{} lanelet {}: {}", r.rule_id, v.element_id, v.message);
                for m in &v.measured {
                    let _ = write!(s, " [{} = {}]", m.term, format_number(m.value));
                }
                s.push('\n');
            }
        }
        let per_rule: Vec<String> = self.rules.iter().map(|r| format!("{}={}", r.rule_id, r.count)).collect();
        let _ = writeln!(s, "total {} violation(s): {}", self.total_violations, per_rule.join(", "));
        s
    }

    pub fn rule(&self, id: &str) -> Option<&RuleViolations> {
        self.rules.iter().find(|r| r.rule_id == id)
    }
}

fn term_value(t: &Term, l: &Lanelet) -> Result<f64, String> {
    match t {
        Term::Num(v) => Ok(*v),
        Term::Call(f, _) => f.eval(l),
    }
}

fn holds(f: &Formula, l: &Lanelet) -> Result<bool, String> {
    Ok(match f {
        Formula::Not(a) => !holds(a, l)?,
        Formula::And(a, b) => holds(a, l)? && holds(b, l)?,
        Formula::Or(a, b) => holds(a, l)? || holds(b, l)?,
        Formula::Implies(a, b) => !holds(a, l)? || holds(b, l)?,
        Formula::Compare(a, rel, b) => rel.holds(term_value(a, l)?, term_value(b, l)?),
        Formula::Pred(p, _) => p.eval(l),
    })
}

fn check(rule: &RuleAst, l: &Lanelet) -> Option<Violation> {
    let message = match holds(&rule.body, l) {
        Ok(true) => return None,
        Ok(false) => format!("violates {}", rule.body),
        Err(why) => format!("evaluation failed: {why}"),
    };
    let measured = rule
        .body
        .function_terms()
        .into_iter()
        .map(|(f, var)| Measurement { term: format!("{}({var})", f.name()), value: f.eval(l).unwrap_or(f64::NAN) })
        .collect();
    Some(Violation { element_id: l.id, measured, message })
}

// Per rule, the violations among `lanelets` in their order.
fn check_all(rules: &[RuleAst], lanelets: &[Lanelet]) -> Vec<Vec<Violation>> {
    rules.iter().map(|r| lanelets.iter().filter_map(|l| check(r, l)).collect()).collect()
}

fn assemble(hash: String, rules: &[RuleAst], mut found: Vec<Vec<Violation>>) -> ViolationReport {
    let rules: Vec<RuleViolations> = rules
        .iter()
        .zip(found.iter_mut())
        .map(|(r, v)| {
            let mut violations = std::mem::take(v);
            violations.sort_by_key(|v| v.element_id);
            RuleViolations { rule_id: r.id.clone(), count: violations.len(), violations }
        })
        .collect();
    let total_violations = rules.iter().map(|r| r.count).sum();
    ViolationReport { network_hash: hash, rules, total_violations }
}

/// Checks every rule against every lanelet. A false body or a failed
/// evaluation gives one violation for that lanelet.
pub fn evaluate(rules: &[RuleAst], net: &LaneletNetwork) -> ViolationReport {
    assemble(network_hash(net), rules, check_all(rules, &net.lanelets))
}

/// Same report as [`evaluate`], computed on `partitions` contiguous id ranges
/// in parallel.
pub fn evaluate_partitioned(rules: &[RuleAst], net: &LaneletNetwork, partitions: usize) -> ViolationReport {
    let p = partitions.max(1);
    let n = net.lanelets.len();
    let parts: Vec<Vec<Vec<Violation>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..p)
            .map(|k| {
                let chunk = &net.lanelets[k * n / p..(k + 1) * n / p];
                s.spawn(move || check_all(rules, chunk))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("partition worker panicked")).collect()
    });
    let mut merged: Vec<Vec<Violation>> = vec![Vec::new(); rules.len()];
    for part in parts {
        for (acc, v) in merged.iter_mut().zip(part) {
            acc.extend(v);
        }
    }
    assemble(network_hash(net), rules, merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laneletize::NetworkMetadata;
    use crate::rules::{parse_rules, DEFAULT_RULES};
    use crate::Point3;

    fn lanelet(id: u32, radius: Option<f64>) -> Lanelet {
        let center: Vec<(f64, f64)> = match radius {
            Some(r) => (0..40).map(|i| {
                let a = i as f64 * 0.5 / r;
                (r * a.cos(), r * a.sin())
            }).collect(),
            None => (0..40).map(|i| (i as f64 * 0.5, 0.0)).collect(),
        };
        let off = |k: f64| -> Vec<Point3> {
            center
                .iter()
                .map(|&(x, y)| match radius {
                    Some(r) => Point3::new(x * (r + k) / r, y * (r + k) / r, 0.0),
                    None => Point3::new(x, y - k, 0.0),
                })
                .collect()
        };
        let (left, right) = (off(-1.75), off(1.75));
        let centerline = left.iter().zip(&right).map(|(a, b)| a.midpoint(*b)).collect();
        Lanelet {
            id,
            left_bound: left,
            right_bound: right,
            centerline,
            predecessors: vec![],
            successors: vec![],
            adjacent_left: None,
            adjacent_right: None,
        }
    }

    fn network(lanelets: Vec<Lanelet>) -> LaneletNetwork {
        LaneletNetwork {
            lanelets,
            metadata: NetworkMetadata { source: "t".into(), sampling_step: 1.0, config_hash: String::new(), defect_artifact: true },
        }
    }

    #[test]
    fn clean_network_reports_nothing() {
        let rules = parse_rules(DEFAULT_RULES).unwrap();
        let net = network((1..=5).map(|i| lanelet(i, if i % 2 == 0 { Some(30.0) } else { None })).collect());
        let rep = evaluate(&rules, &net);
        assert_eq!(rep.total_violations, 0);
        assert_eq!(rep.rules.len(), 5);
        assert_eq!(rep.network_hash, network_hash(&net));
    }

    #[test]
    fn defects_are_reported_with_measurements() {
        let rules = parse_rules(DEFAULT_RULES).unwrap();
        let mut ls: Vec<Lanelet> = (1..=6).map(|i| lanelet(i, None)).collect();
        ls[1].successors.push(2);
        ls[2].left_bound[4].z = f64::NAN;
        ls[3] = lanelet(4, Some(5.0));
        ls[4].right_bound.pop();
        let rep = evaluate(&rules, &network(ls));
        let ids = |r: &str| rep.rule(r).unwrap().violations.iter().map(|v| v.element_id).collect::<Vec<_>>();
        assert_eq!(ids("no_self_loop"), vec![2]);
        assert_eq!(ids("elevation_complete"), vec![3]);
        assert_eq!(ids("min_turn_radius"), vec![4]);
        assert_eq!(ids("lane_width"), vec![5]);
        assert_eq!(ids("polyline_valid"), Vec::<u32>::new());
        let v = &rep.rule("min_turn_radius").unwrap().violations[0];
        assert!((v.measured[0].value - 5.0).abs() < 0.01);
        assert_eq!(v.message, "violates min_turning_radius(l) >= 10.0");
        assert!(rep.rule("lane_width").unwrap().violations[0].message.starts_with("evaluation failed"));
        assert_eq!(rep.total_violations, 4);
        let back = ViolationReport::from_json(&rep.to_json()).unwrap();
        assert_eq!(back.to_json(), rep.to_json());
        assert_eq!(rep.to_text().lines().count(), 5);
    }

    #[test]
    fn non_finite_measurements_serialize_as_tokens() {
        let rules = parse_rules("rule straight: forall l in lanelets. min_turning_radius(l) < 100").unwrap();
        let rep = evaluate(&rules, &network(vec![lanelet(1, None)]));
        assert!(rep.to_json().contains("\"value\": \"inf\""));
        let back = ViolationReport::from_json(&rep.to_json()).unwrap();
        assert_eq!(back.rules[0].violations[0].measured[0].value, f64::INFINITY);
    }

    #[test]
    fn short_circuit_skips_failing_terms() {
        let rules = parse_rules("rule r: forall l in lanelets. valid_polyline(l) implies min_turning_radius(l) > 1").unwrap();
        let mut l = lanelet(1, None);
        for p in l.left_bound.iter_mut() {
            *p = Point3::new(0.0, 0.0, 0.0);
        }
        assert_eq!(evaluate(&rules, &network(vec![l])).total_violations, 0);
    }

    #[test]
    fn partitions_do_not_change_the_report() {
        let rules = parse_rules(DEFAULT_RULES).unwrap();
        let mut ls: Vec<Lanelet> = (1..=9).map(|i| lanelet(i, if i % 3 == 0 { Some(6.0) } else { None })).collect();
        ls[7].successors.push(8);
        let net = network(ls);
        let base = evaluate(&rules, &net).to_json();
        for p in [1, 2, 3, 4, 16, 50] {
            assert_eq!(evaluate_partitioned(&rules, &net, p).to_json(), base, "partitions={p}");
        }
    }
}
