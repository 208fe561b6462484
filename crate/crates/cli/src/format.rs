//! Line-oriented text format for orbit-wise automata.
//!
//! ```text
//! nomaut 1
//! kind dfa
//! alphabet push/1 pop/1
//! orbit q0 dim 0 accepting sym ()
//! orbit q1 dim 2 sym (0 1) (1 0)
//! init q0
//! rule q0 push(fresh) -> q1(in)
//! rule q1 pop(=r0) -> q0()
//! ```
//!
//! `sym` lists generators when parsing; printing lists every group element.
//! Destination registers are `r<i>`, `in` or `any`.

use std::fmt::Write as _;

use nominal_core::automata::{Alphabet, Guard, Kind, OrbitDecl, Rule, Source, SymbolicAutomaton, Tag};
use nominal_core::kernel::{group_closure, IndexPerm};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] nominal_core::Error),
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Syntax { line, message: message.into() })
}

pub fn print_automaton(a: &SymbolicAutomaton) -> String {
    let mut out = String::from("nomaut 1\n");
    let _ = writeln!(out, "kind {}", if a.kind == Kind::Dfa { "dfa" } else { "nfa" });
    let tags: Vec<String> = a.alphabet.tags().iter().map(|t| format!("{}/{}", t.label, t.arity)).collect();
    let _ = writeln!(out, "alphabet {}", tags.join(" "));
    for o in &a.orbits {
        let _ = write!(out, "orbit {} dim {}", o.name, o.dim);
        if o.accepting {
            out.push_str(" accepting");
        }
        out.push_str(" sym");
        for g in o.sym.elements() {
            let images: Vec<String> = g.iter().map(|i| i.to_string()).collect();
            let _ = write!(out, " ({})", images.join(" "));
        }
        out.push('\n');
    }
    for &i in &a.initial {
        let _ = writeln!(out, "init {}", a.orbits[i].name);
    }
    let mut rules = a.rules.clone();
    rules.sort();
    for r in &rules {
        let label = &a.alphabet.tags()[r.tag as usize].label;
        let guard = match r.guard {
            Guard::None => String::new(),
            Guard::Reg(i) => format!("(=r{i})"),
            Guard::Fresh => "(fresh)".to_string(),
        };
        let assign: Vec<String> = r
            .assign
            .iter()
            .map(|s| match s {
                Source::Reg(i) => format!("r{i}"),
                Source::Input => "in".to_string(),
                Source::Any => "any".to_string(),
            })
            .collect();
        let _ = writeln!(
            out,
            "rule {} {label}{guard} -> {}({})",
            a.orbits[r.src].name,
            a.orbits[r.dst].name,
            assign.join(",")
        );
    }
    out
}

fn parse_reg(s: &str, line: usize) -> Result<usize, FormatError> {
    match s.strip_prefix('r').and_then(|n| n.parse().ok()) {
        Some(i) => Ok(i),
        None => err(line, format!("expected a register `r<i>`, found `{s}`")),
    }
}

fn parse_perms(rest: &str, line: usize) -> Result<Vec<IndexPerm>, FormatError> {
    let mut out = Vec::new();
    let mut s = rest.trim();
    while !s.is_empty() {
        let Some(body) = s.strip_prefix('(') else {
            return err(line, format!("expected `(` in symmetry list, found `{s}`"));
        };
        let Some(end) = body.find(')') else {
            return err(line, "unclosed `(` in symmetry list");
        };
        let perm = body[..end]
            .split_whitespace()
            .map(|x| x.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .or_else(|_| err(line, format!("bad permutation `({})`", &body[..end])))?;
        out.push(perm);
        s = body[end + 1..].trim_start();
    }
    Ok(out)
}

struct Pending {
    line: usize,
    src: String,
    tag: String,
    guard: Option<String>,
    dst: String,
    assign: Vec<String>,
}

pub fn parse_automaton(text: &str) -> Result<SymbolicAutomaton, FormatError> {
    let mut kind = None;
    let mut alphabet = None;
    let mut orbits: Vec<OrbitDecl> = Vec::new();
    let mut inits: Vec<(usize, String)> = Vec::new();
    let mut pending: Vec<Pending> = Vec::new();
    let mut header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let (word, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        let rest = rest.trim();
        if !header {
            if word != "nomaut" || rest != "1" {
                return err(line, "expected header `nomaut 1`");
            }
            header = true;
            continue;
        }
        match word {
            "kind" => {
                kind = Some(match rest {
                    "dfa" => Kind::Dfa,
                    "nfa" => Kind::Nfa,
                    _ => return err(line, format!("unknown kind `{rest}`")),
                })
            }
            "alphabet" => {
                let mut tags = Vec::new();
                for t in rest.split_whitespace() {
                    let Some((label, arity)) = t.split_once('/') else {
                        return err(line, format!("expected `<label>/<arity>`, found `{t}`"));
                    };
                    let Ok(arity) = arity.parse::<u8>() else {
                        return err(line, format!("bad arity in `{t}`"));
                    };
                    tags.push(Tag { label: label.to_string(), arity });
                }
                alphabet = Some(Alphabet::new(tags).or_else(|e| err(line, e.to_string()))?);
            }
            "orbit" => {
                let (head, sym) = match rest.split_once(" sym") {
                    Some((h, s)) => (h, Some(s)),
                    None => (rest, None),
                };
                let parts: Vec<&str> = head.split_whitespace().collect();
                let (name, dim, accepting) = match parts.as_slice() {
                    [name, "dim", k] => (*name, *k, false),
                    [name, "dim", k, "accepting"] => (*name, *k, true),
                    _ => return err(line, "expected `orbit <name> dim <k> [accepting] sym ...`"),
                };
                let Ok(dim) = dim.parse::<usize>() else {
                    return err(line, format!("bad dimension `{dim}`"));
                };
                if orbits.iter().any(|o| o.name == name) {
                    return err(line, format!("orbit `{name}` declared twice"));
                }
                let gens = match sym {
                    Some(s) => parse_perms(s, line)?,
                    None => Vec::new(),
                };
                let sym = group_closure(dim, &gens).or_else(|e| err(line, format!("orbit `{name}`: {e}")))?;
                orbits.push(OrbitDecl { name: name.to_string(), dim, sym, accepting });
            }
            "init" => inits.push((line, rest.to_string())),
            "rule" => {
                let Some((lhs, rhs)) = rest.split_once("->") else {
                    return err(line, "expected `->` in rule");
                };
                let mut lhs = lhs.split_whitespace();
                let (Some(src), Some(letter), None) = (lhs.next(), lhs.next(), lhs.next()) else {
                    return err(line, "expected `rule <src> <label>[(guard)] -> <dst>(...)`");
                };
                let (tag, guard) = match letter.split_once('(') {
                    Some((t, g)) => match g.strip_suffix(')') {
                        Some(g) => (t.to_string(), Some(g.to_string())),
                        None => return err(line, format!("unclosed guard in `{letter}`")),
                    },
                    None => (letter.to_string(), None),
                };
                let rhs = rhs.trim();
                let Some((dst, args)) = rhs.split_once('(') else {
                    return err(line, format!("expected `<dst>(...)`, found `{rhs}`"));
                };
                let Some(args) = args.strip_suffix(')') else {
                    return err(line, "unclosed register list");
                };
                let assign = args.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
                pending.push(Pending { line, src: src.to_string(), tag, guard, dst: dst.trim().to_string(), assign });
            }
            _ => return err(line, format!("unknown directive `{word}`")),
        }
    }
    if !header {
        return err(1, "empty input");
    }
    let Some(kind) = kind else { return err(0, "missing `kind`") };
    let Some(alphabet) = alphabet else { return err(0, "missing `alphabet`") };
    let find = |name: &str, line: usize| -> Result<usize, FormatError> {
        match orbits.iter().position(|o| o.name == name) {
            Some(i) => Ok(i),
            None => err(line, format!("undeclared orbit `{name}`")),
        }
    };
    let mut initial = Vec::new();
    for (line, name) in &inits {
        initial.push(find(name, *line)?);
    }
    let mut rules = Vec::new();
    for p in &pending {
        let src = find(&p.src, p.line)?;
        let dst = find(&p.dst, p.line)?;
        let Some(tag) = alphabet.tag_index(&p.tag) else {
            return err(p.line, format!("unknown label `{}`", p.tag));
        };
        let guard = match p.guard.as_deref() {
            None => Guard::None,
            Some("fresh") => Guard::Fresh,
            Some(g) => match g.strip_prefix('=') {
                Some(r) => Guard::Reg(parse_reg(r, p.line)?),
                None => return err(p.line, format!("bad guard `({g})`")),
            },
        };
        let assign = p
            .assign
            .iter()
            .map(|s| match s.as_str() {
                "in" => Ok(Source::Input),
                "any" => Ok(Source::Any),
                r => parse_reg(r, p.line).map(Source::Reg),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rules.push(Rule { src, tag, guard, dst, assign });
    }
    let a = SymbolicAutomaton { kind, alphabet, orbits, initial, rules };
    a.validate()?;
    Ok(a)
}
