//! CPLEX LP file format: writer plus a small reader for the subset the writer emits.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::model::{Constraint, MilpModel, Objective, Relation, Sense, VarKind, Variable};
use crate::MilpError;

/// Makes `name` a legal LP identifier.
fn sanitize(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "_.!\"#$%&()/,;?@`'{}|~".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    if out.is_empty()
        || out.starts_with(|c: char| c.is_ascii_digit() || c == '.')
        || out.eq_ignore_ascii_case("free")
        || out.to_ascii_lowercase().starts_with("inf")
    {
        out.insert(0, '_');
    }
    out
}

fn unique_names<'a>(names: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    names
        .map(|n| {
            let base = sanitize(n);
            let count = seen.entry(base.clone()).or_insert(0);
            *count += 1;
            if *count == 1 {
                base
            } else {
                format!("{base}__{}", *count)
            }
        })
        .collect()
}

fn write_expr(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    if terms.is_empty() {
        if let Some(first) = names.first() {
            let _ = write!(out, " 0 {first}");
        }
        return;
    }
    for (k, &(j, a)) in terms.iter().enumerate() {
        let sign = if a < 0.0 { '-' } else { '+' };
        if k == 0 && a >= 0.0 {
            let _ = write!(out, " {} {}", a, names[j]);
        } else {
            let _ = write!(out, " {} {} {}", sign, a.abs(), names[j]);
        }
    }
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// Serialises `model` in CPLEX LP format. Every continuous variable gets an explicit bound.
pub fn export_lp(model: &MilpModel) -> String {
    let names = unique_names(model.variables.iter().map(|v| v.name.as_str()));
    let row_names = unique_names(model.constraints.iter().map(|c| c.name.as_str()));
    let mut out = String::new();
    out.push_str(match model.objective.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    // Every variable appears in the objective (zeros included) so a reader recovers the
    // declaration order.
    out.push_str(" obj:");
    let mut dense = vec![0.0; model.variables.len()];
    for &(j, c) in &model.objective.coefficients {
        dense[j] = c;
    }
    let all: Vec<(usize, f64)> = dense.into_iter().enumerate().collect();
    write_expr(&mut out, &all, &names);
    out.push_str("\nSubject To\n");
    for (c, name) in model.constraints.iter().zip(&row_names) {
        let _ = write!(out, " {name}:");
        write_expr(&mut out, &c.coefficients, &names);
        let _ = writeln!(out, " {} {}", c.relation.symbol(), c.rhs);
    }
    out.push_str("Bounds\n");
    for (v, name) in model.variables.iter().zip(&names) {
        if v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0 {
            continue;
        }
        if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            let _ = writeln!(out, " {name} free");
        } else {
            let _ = writeln!(
                out,
                " {} <= {name} <= {}",
                fmt_bound(v.lower),
                fmt_bound(v.upper)
            );
        }
    }
    let binaries: Vec<&String> = model
        .variables
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(_, n)| n)
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for n in binaries {
            let _ = writeln!(out, " {n}");
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Colon,
    Rel(Relation),
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Tok>, MilpError> {
    let err = |msg: String| MilpError::Parse { line: lineno, msg };
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '+' {
            toks.push(Tok::Plus);
            i += 1;
        } else if c == '-' {
            toks.push(Tok::Minus);
            i += 1;
        } else if c == ':' {
            toks.push(Tok::Colon);
            i += 1;
        } else if c == '<' || c == '>' || c == '=' {
            let mut j = i + 1;
            if j < chars.len() && "<>=".contains(chars[j]) {
                j += 1;
            }
            let op: String = chars[i..j].iter().collect();
            let rel = match op.as_str() {
                "<" | "<=" | "=<" => Relation::Le,
                ">" | ">=" | "=>" => Relation::Ge,
                "=" => Relation::Eq,
                _ => return Err(err(format!("unknown operator {op}"))),
            };
            toks.push(Tok::Rel(rel));
            i = j;
        } else if c.is_ascii_digit() || c == '.' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                j += 1;
            }
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    j = k;
                }
            }
            let text: String = chars[i..j].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| err(format!("bad number {text}")))?;
            toks.push(Tok::Num(v));
            i = j;
        } else {
            let mut j = i;
            while j < chars.len() && !chars[j].is_whitespace() && !"+-:<>=".contains(chars[j]) {
                j += 1;
            }
            toks.push(Tok::Ident(chars[i..j].iter().collect()));
            i = j;
        }
    }
    Ok(toks)
}

fn as_infinity(name: &str) -> Option<f64> {
    let l = name.to_ascii_lowercase();
    (l == "inf" || l == "infinity").then_some(f64::INFINITY)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    End,
}

struct Reader {
    model: MilpModel,
    index: HashMap<String, usize>,
    explicit_bounds: Vec<bool>,
}

impl Reader {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        self.model.variables.push(Variable {
            name: name.to_string(),
            lower: 0.0,
            upper: f64::INFINITY,
            kind: VarKind::Continuous,
        });
        self.explicit_bounds.push(false);
        let j = self.model.variables.len() - 1;
        self.index.insert(name.to_string(), j);
        j
    }

    /// Parses `[label:] expr` and returns (label, terms, remaining tokens).
    fn expr<'t>(
        &mut self,
        toks: &'t [Tok],
        lineno: usize,
    ) -> Result<(Option<String>, Vec<(usize, f64)>, &'t [Tok]), MilpError> {
        let mut rest = toks;
        let mut label = None;
        if let [Tok::Ident(name), Tok::Colon, tail @ ..] = rest {
            label = Some(name.clone());
            rest = tail;
        }
        let mut terms: Vec<(usize, f64)> = Vec::new();
        loop {
            let mut sign = 1.0;
            let mut saw_sign = false;
            while let Some(t @ (Tok::Plus | Tok::Minus)) = rest.first() {
                if *t == Tok::Minus {
                    sign = -sign;
                }
                saw_sign = true;
                rest = &rest[1..];
            }
            match rest {
                [Tok::Num(a), Tok::Ident(name), tail @ ..] => {
                    let j = self.var(name);
                    terms.push((j, sign * a));
                    rest = tail;
                }
                [Tok::Ident(name), tail @ ..] => {
                    let j = self.var(name);
                    terms.push((j, sign));
                    rest = tail;
                }
                _ => {
                    if saw_sign {
                        return Err(MilpError::Parse {
                            line: lineno,
                            msg: "dangling sign".into(),
                        });
                    }
                    break;
                }
            }
        }
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for (j, a) in terms {
            match merged.iter_mut().find(|(k, _)| *k == j) {
                Some(t) => t.1 += a,
                None => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        Ok((label, merged, rest))
    }

    fn bound_value(toks: &[Tok], lineno: usize) -> Result<(f64, usize), MilpError> {
        let (sign, rest, used) = match toks {
            [Tok::Minus, rest @ ..] => (-1.0, rest, 1),
            [Tok::Plus, rest @ ..] => (1.0, rest, 1),
            _ => (1.0, toks, 0),
        };
        match rest.first() {
            Some(Tok::Num(v)) => Ok((sign * v, used + 1)),
            Some(Tok::Ident(s)) if as_infinity(s).is_some() => Ok((sign * f64::INFINITY, used + 1)),
            _ => Err(MilpError::Parse {
                line: lineno,
                msg: "expected a bound value".into(),
            }),
        }
    }

    fn bound_line(&mut self, toks: &[Tok], lineno: usize) -> Result<(), MilpError> {
        let err = |msg: &str| MilpError::Parse {
            line: lineno,
            msg: msg.into(),
        };
        if let [Tok::Ident(name), Tok::Ident(kw)] = toks {
            if kw.eq_ignore_ascii_case("free") {
                let j = self.var(name);
                self.model.variables[j].lower = f64::NEG_INFINITY;
                self.model.variables[j].upper = f64::INFINITY;
                self.explicit_bounds[j] = true;
                return Ok(());
            }
        }
        // value rel name [rel value]  |  name rel value
        if let Some(Tok::Ident(name)) = toks.first() {
            if as_infinity(name).is_none() {
                let [Tok::Ident(name), Tok::Rel(rel), tail @ ..] = toks else {
                    return Err(err("malformed bound"));
                };
                let (v, used) = Self::bound_value(tail, lineno)?;
                if used != tail.len() {
                    return Err(err("trailing tokens in bound"));
                }
                let j = self.var(name);
                self.explicit_bounds[j] = true;
                let var = &mut self.model.variables[j];
                match rel {
                    Relation::Le => var.upper = v,
                    Relation::Ge => var.lower = v,
                    Relation::Eq => {
                        var.lower = v;
                        var.upper = v;
                    }
                }
                return Ok(());
            }
        }
        let (lo, used) = Self::bound_value(toks, lineno)?;
        let rest = &toks[used..];
        let [Tok::Rel(r1), Tok::Ident(name), tail @ ..] = rest else {
            return Err(err("malformed bound"));
        };
        let j = self.var(name);
        self.explicit_bounds[j] = true;
        match r1 {
            Relation::Le => self.model.variables[j].lower = lo,
            Relation::Ge => self.model.variables[j].upper = lo,
            Relation::Eq => {
                self.model.variables[j].lower = lo;
                self.model.variables[j].upper = lo;
            }
        }
        if tail.is_empty() {
            return Ok(());
        }
        let [Tok::Rel(r2), tail2 @ ..] = tail else {
            return Err(err("malformed bound"));
        };
        let (hi, used) = Self::bound_value(tail2, lineno)?;
        if used != tail2.len() {
            return Err(err("trailing tokens in bound"));
        }
        match r2 {
            Relation::Le => self.model.variables[j].upper = hi,
            Relation::Ge => self.model.variables[j].lower = hi,
            Relation::Eq => return Err(err("malformed bound")),
        }
        Ok(())
    }
}

/// Reads the LP subset produced by [`export_lp`]: one objective, one row per line,
/// `Bounds`, `Binaries` and `End` sections.
pub fn parse_lp(text: &str) -> Result<MilpModel, MilpError> {
    let mut rd = Reader {
        model: MilpModel::new(Sense::Minimize),
        index: HashMap::new(),
        explicit_bounds: Vec::new(),
    };
    let mut section = Section::None;
    let mut pending: Vec<Tok> = Vec::new();
    let mut pending_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        let header = match lower.as_str() {
            "minimize" | "minimise" | "minimum" | "min" => Some((Section::Objective, Some(Sense::Minimize))),
            "maximize" | "maximise" | "maximum" | "max" => Some((Section::Objective, Some(Sense::Maximize))),
            "subject to" | "such that" | "st" | "s.t." => Some((Section::Constraints, None)),
            "bounds" | "bound" => Some((Section::Bounds, None)),
            "binaries" | "binary" | "bin" => Some((Section::Binaries, None)),
            "end" => Some((Section::End, None)),
            "general" | "generals" | "gen" => {
                return Err(MilpError::Parse {
                    line: lineno,
                    msg: "general integer variables are not supported".into(),
                })
            }
            _ => None,
        };
        if let Some((s, sense)) = header {
            if !pending.is_empty() {
                return Err(MilpError::Parse {
                    line: pending_line,
                    msg: "row without a relation".into(),
                });
            }
            if let Some(sense) = sense {
                rd.model.objective.sense = sense;
            }
            section = s;
            continue;
        }
        let toks = tokenize(line, lineno)?;
        match section {
            Section::None | Section::End => {
                return Err(MilpError::Parse {
                    line: lineno,
                    msg: "content outside of a section".into(),
                })
            }
            Section::Objective => {
                let (_, terms, rest) = rd.expr(&toks, lineno)?;
                if !rest.is_empty() {
                    return Err(MilpError::Parse {
                        line: lineno,
                        msg: "unexpected tokens in objective".into(),
                    });
                }
                rd.model.objective = Objective {
                    sense: rd.model.objective.sense,
                    coefficients: terms,
                };
            }
            Section::Constraints => {
                if pending.is_empty() {
                    pending_line = lineno;
                }
                pending.extend(toks);
                if !pending.iter().any(|t| matches!(t, Tok::Rel(_))) {
                    continue;
                }
                let row = std::mem::take(&mut pending);
                let (label, terms, rest) = rd.expr(&row, pending_line)?;
                let (relation, rhs) = match rest {
                    [Tok::Rel(r), tail @ ..] => {
                        let (v, used) = Reader::bound_value(tail, pending_line)?;
                        if used != tail.len() || !v.is_finite() {
                            return Err(MilpError::Parse {
                                line: pending_line,
                                msg: "bad right-hand side".into(),
                            });
                        }
                        (*r, v)
                    }
                    _ => {
                        return Err(MilpError::Parse {
                            line: pending_line,
                            msg: "expected a relation".into(),
                        })
                    }
                };
                let name = label.unwrap_or_else(|| format!("r{}", rd.model.constraints.len()));
                rd.model.constraints.push(Constraint {
                    name,
                    coefficients: terms,
                    relation,
                    rhs,
                });
            }
            Section::Bounds => rd.bound_line(&toks, lineno)?,
            Section::Binaries => {
                for t in toks {
                    let Tok::Ident(name) = t else {
                        return Err(MilpError::Parse {
                            line: lineno,
                            msg: "expected a variable name".into(),
                        });
                    };
                    let j = rd.var(&name);
                    let v = &mut rd.model.variables[j];
                    v.kind = VarKind::Binary;
                    if !rd.explicit_bounds[j] {
                        v.lower = 0.0;
                        v.upper = 1.0;
                    }
                }
            }
        }
    }
    if !pending.is_empty() {
        return Err(MilpError::Parse {
            line: pending_line,
            msg: "row without a relation".into(),
        });
    }
    rd.model.validate()?;
    Ok(rd.model)
}
