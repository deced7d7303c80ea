//! Line-oriented network file format.
//!
//! ```text
//! # comment
//! @species A B
//! @kinetics powerlaw
//! @reaction R1: A -> 2*B | k=0.5 | F: A=1
//! ```
//!
//! Hill kinetics use `@kinetics hill` and an extra `| D: <species>=<value> ...` segment
//! listing a dissociation constant for every species with a nonzero exponent. Negative
//! Hill exponents are rejected unless the file contains `@allow negative-hill`.

use std::fmt::Write as _;

use crate::error::{CrnError, Result};
use crate::kinetics::{KineticSystem, Kinetics, RateLaw};
use crate::network::{Complex, ReactionNetwork, ReactionSpec};

#[derive(Clone, Copy, PartialEq)]
enum LawKind {
    PowerLaw,
    Hill,
}

struct Line<'a> {
    no: usize,
    raw: &'a str,
}

impl Line<'_> {
    fn err(&self, byte: usize, msg: impl Into<String>) -> CrnError {
        CrnError::Syntax {
            line: self.no,
            column: self.raw[..byte.min(self.raw.len())].chars().count() + 1,
            msg: msg.into(),
        }
    }
}

/// Offset of `part` inside `whole` (both must come from the same allocation).
fn offset(whole: &str, part: &str) -> usize {
    part.as_ptr() as usize - whole.as_ptr() as usize
}

fn parse_real(line: &Line, text: &str) -> Result<f64> {
    let t = text.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| line.err(offset(line.raw, t), format!("expected a number, found `{t}`")))
}

fn parse_complex(line: &Line, text: &str, species: &[String]) -> Result<Complex> {
    let t = text.trim();
    if t.is_empty() {
        return Err(line.err(offset(line.raw, text), "empty complex"));
    }
    let mut coeffs = vec![0.0; species.len()];
    if t == "0" {
        return Complex::new(coeffs);
    }
    for term in t.split('+') {
        let term_t = term.trim();
        let at = offset(line.raw, term_t);
        if term_t.is_empty() {
            return Err(line.err(at, "empty term in complex"));
        }
        let (coeff, name) = match term_t.split_once('*') {
            Some((c, n)) => {
                let v = parse_real(line, c)?;
                if v <= 0.0 {
                    return Err(line.err(at, "stoichiometric coefficients must be positive"));
                }
                (v, n.trim())
            }
            None => (1.0, term_t),
        };
        let i = species
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| line.err(offset(line.raw, name), format!("unknown species `{name}`")))?;
        coeffs[i] += coeff;
    }
    Complex::new(coeffs)
}

/// `sp=val sp=val ...` into a dense row.
fn parse_assignments(line: &Line, text: &str, species: &[String]) -> Result<Vec<f64>> {
    let mut row = vec![0.0; species.len()];
    let mut seen = vec![false; species.len()];
    for item in text.split_whitespace() {
        let at = offset(line.raw, item);
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| line.err(at, format!("expected <species>=<value>, found `{item}`")))?;
        let i = species
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| line.err(at, format!("unknown species `{name}`")))?;
        if seen[i] {
            return Err(line.err(at, format!("species `{name}` listed twice")));
        }
        seen[i] = true;
        row[i] = parse_real(line, value)?;
    }
    Ok(row)
}

struct ParsedReaction {
    line: usize,
    spec: ReactionSpec,
    rate: f64,
    exponents: Vec<f64>,
    dissociation: Option<Vec<f64>>,
}

pub fn parse_system(text: &str) -> Result<KineticSystem> {
    let mut species: Option<Vec<String>> = None;
    let mut law: Option<LawKind> = None;
    let mut allow_negative_hill = false;
    let mut reactions: Vec<ParsedReaction> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line = Line { no: k + 1, raw };
        let content = raw.split('#').next().unwrap_or("");
        let t = content.trim();
        if t.is_empty() {
            continue;
        }
        let at = offset(raw, t);
        let Some(directive_text) = t.strip_prefix('@') else {
            return Err(line.err(at, "expected a directive starting with `@`"));
        };
        let (directive, rest) = directive_text
            .split_once(char::is_whitespace)
            .unwrap_or((directive_text, ""));
        match directive {
            "species" => {
                if species.is_some() {
                    return Err(line.err(at, "@species given twice"));
                }
                let names: Vec<String> = rest.split_whitespace().map(String::from).collect();
                if names.is_empty() {
                    return Err(line.err(at, "@species needs at least one name"));
                }
                for (i, n) in names.iter().enumerate() {
                    let bad = n == "0"
                        || n.contains(['=', '*', '+', ':', '|', '-', '>'])
                        || names[..i].contains(n);
                    if bad {
                        let pos = rest.find(n.as_str()).map_or(at, |p| offset(raw, rest) + p);
                        return Err(line.err(pos, format!("invalid or repeated species name `{n}`")));
                    }
                }
                species = Some(names);
            }
            "kinetics" => {
                if law.is_some() {
                    return Err(line.err(at, "@kinetics given twice"));
                }
                law = Some(match rest.trim() {
                    "powerlaw" => LawKind::PowerLaw,
                    "hill" => LawKind::Hill,
                    other => {
                        return Err(line.err(
                            offset(raw, rest.trim()),
                            format!("unknown kinetics `{other}` (expected powerlaw or hill)"),
                        ))
                    }
                });
            }
            "allow" => match rest.trim() {
                "negative-hill" => allow_negative_hill = true,
                other => {
                    return Err(line.err(offset(raw, rest.trim()), format!("unknown @allow option `{other}`")))
                }
            },
            "reaction" => {
                let sp = species
                    .as_ref()
                    .ok_or_else(|| line.err(at, "@reaction before @species"))?;
                let kind = law.ok_or_else(|| line.err(at, "@reaction before @kinetics"))?;
                reactions.push(parse_reaction(&line, rest, sp, kind)?);
            }
            other => return Err(line.err(at, format!("unknown directive `@{other}`"))),
        }
    }

    let species = species.ok_or(CrnError::Syntax {
        line: 0,
        column: 0,
        msg: "missing @species".into(),
    })?;
    let kind = law.ok_or(CrnError::Syntax {
        line: 0,
        column: 0,
        msg: "missing @kinetics".into(),
    })?;

    for (a, ra) in reactions.iter().enumerate() {
        for rb in &reactions[..a] {
            if rb.spec.label == ra.spec.label {
                return Err(CrnError::DuplicateReaction {
                    line: ra.line,
                    what: format!("id {}", ra.spec.label),
                });
            }
            if rb.spec.reactant == ra.spec.reactant && rb.spec.product == ra.spec.product {
                return Err(CrnError::DuplicateReaction {
                    line: ra.line,
                    what: format!(
                        "{} -> {} (already declared as {})",
                        ra.spec.reactant.display(&species),
                        ra.spec.product.display(&species),
                        rb.spec.label
                    ),
                });
            }
        }
    }
    if kind == LawKind::Hill && !allow_negative_hill {
        for r in &reactions {
            if let Some(i) = r.exponents.iter().position(|v| *v < 0.0) {
                return Err(CrnError::NegativeHillExponent {
                    line: r.line,
                    label: r.spec.label.clone(),
                    species: species[i].clone(),
                });
            }
        }
    }

    let rate_constants: Vec<f64> = reactions.iter().map(|r| r.rate).collect();
    let exponents: Vec<Vec<f64>> = reactions.iter().map(|r| r.exponents.clone()).collect();
    let law = match kind {
        LawKind::PowerLaw => RateLaw::PowerLaw { orders: exponents },
        LawKind::Hill => RateLaw::Hill {
            exponents,
            dissociation: reactions
                .iter()
                .map(|r| r.dissociation.clone().unwrap_or_default())
                .collect(),
        },
    };
    let specs = reactions.into_iter().map(|r| r.spec).collect();
    let network = ReactionNetwork::new(species, specs)?;
    KineticSystem::new(
        network,
        Kinetics {
            rate_constants,
            law,
        },
    )
}

fn parse_reaction(line: &Line, rest: &str, species: &[String], kind: LawKind) -> Result<ParsedReaction> {
    let raw = line.raw;
    let mut segments = rest.split('|');
    let head = segments.next().unwrap_or("");
    let (id, body) = head
        .split_once(':')
        .ok_or_else(|| line.err(offset(raw, head), "expected `<id>: <complex> -> <complex>`"))?;
    let label = id.trim();
    if label.is_empty() || label.contains(char::is_whitespace) {
        return Err(line.err(offset(raw, head), "invalid reaction id"));
    }
    let (lhs, rhs) = body
        .split_once("->")
        .ok_or_else(|| line.err(offset(raw, body), "expected `->`"))?;
    let reactant = parse_complex(line, lhs, species)?;
    let product = parse_complex(line, rhs, species)?;
    if reactant == product {
        return Err(CrnError::SelfLoop {
            line: line.no,
            label: label.to_string(),
        });
    }

    let mut rate = None;
    let mut exponents = None;
    let mut dissociation = None;
    for seg in segments {
        let s = seg.trim();
        let at = offset(raw, s);
        if let Some(v) = s.strip_prefix("k=") {
            if rate.is_some() {
                return Err(line.err(at, "rate constant given twice"));
            }
            let k = parse_real(line, v)?;
            if k <= 0.0 {
                return Err(line.err(at, "rate constant must be positive"));
            }
            rate = Some(k);
        } else if let Some(v) = s.strip_prefix("F:") {
            if exponents.is_some() {
                return Err(line.err(at, "F: given twice"));
            }
            exponents = Some(parse_assignments(line, v, species)?);
        } else if let Some(v) = s.strip_prefix("D:") {
            if kind != LawKind::Hill {
                return Err(line.err(at, "D: is only valid with hill kinetics"));
            }
            if dissociation.is_some() {
                return Err(line.err(at, "D: given twice"));
            }
            dissociation = Some(parse_assignments(line, v, species)?);
        } else {
            return Err(line.err(at, format!("unexpected segment `{s}`")));
        }
    }
    let missing = |what: &str| CrnError::MissingKinetics {
        line: line.no,
        label: label.to_string(),
        missing: what.to_string(),
    };
    let rate = rate.ok_or_else(|| missing("k="))?;
    let exponents = exponents.ok_or_else(|| missing("F:"))?;
    if kind == LawKind::Hill {
        let d = dissociation.get_or_insert_with(|| vec![0.0; species.len()]);
        for (i, v) in exponents.iter().enumerate() {
            if *v != 0.0 && d[i] <= 0.0 {
                return Err(missing(&format!("D: entry for {}", species[i])));
            }
        }
    }
    Ok(ParsedReaction {
        line: line.no,
        spec: ReactionSpec::new(label, reactant, product),
        rate,
        exponents,
        dissociation,
    })
}

/// ` sp=val sp=val`, or nothing for an empty row.
fn assignments(row: &[f64], species: &[String], keep: impl Fn(usize) -> bool) -> String {
    row.iter()
        .zip(species)
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(_, (v, s))| format!(" {s}={v}"))
        .collect()
}

/// Canonical text form; parsing it back yields an equal system.
pub fn write_system(sys: &KineticSystem) -> String {
    let net = &sys.network;
    let species = net.species();
    let mut out = String::new();
    let _ = writeln!(out, "@species {}", species.join(" "));
    match &sys.kinetics.law {
        RateLaw::PowerLaw { .. } => out.push_str("@kinetics powerlaw\n"),
        RateLaw::Hill { exponents, .. } => {
            out.push_str("@kinetics hill\n");
            if exponents.iter().flatten().any(|v| *v < 0.0) {
                out.push_str("@allow negative-hill\n");
            }
        }
    }
    for (j, r) in net.reactions().iter().enumerate() {
        let exps = sys.kinetics.law.exponents(j);
        let _ = write!(
            out,
            "@reaction {}: {} -> {} | k={} | F:{}",
            r.label,
            net.complex_label(r.reactant),
            net.complex_label(r.product),
            sys.kinetics.rate_constants[j],
            assignments(exps, species, |i| exps[i] != 0.0)
        );
        if let RateLaw::Hill { dissociation, .. } = &sys.kinetics.law {
            let _ = write!(
                out,
                " | D:{}",
                assignments(&dissociation[j], species, |i| exps[i] != 0.0)
            );
        }
        out.push('\n');
    }
    out
}
