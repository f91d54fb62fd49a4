//! Line-oriented KB format.
//!
//! ```text
//! atoms 4
//! seed 42
//! base 0
//! rule 0: 0 -> 1
//! rule 1: 0 -> 2
//! rule 2: 1 2 -> 3
//! ```
//!
//! `atoms` must come first. `seed` is optional; `base` may repeat and may be empty. Blank
//! lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use super::{AtomId, HornRule, KnowledgeBase, RuleId};
use crate::error::{Error, Result};

pub fn to_text(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "atoms {}", kb.atom_count());
    let _ = writeln!(out, "seed {}", kb.generation_seed());
    out.push_str("base");
    for a in kb.base_facts() {
        let _ = write!(out, " {a}");
    }
    out.push('\n');
    for r in kb.rules() {
        let _ = write!(out, "rule {}:", r.id());
        for p in r.premises() {
            let _ = write!(out, " {p}");
        }
        let _ = writeln!(out, " -> {}", r.conclusion());
    }
    out
}

pub fn from_text(src: &str) -> Result<KnowledgeBase> {
    let mut atom_count: Option<usize> = None;
    let mut seed = 0u64;
    let mut base = Vec::new();
    let mut rules = Vec::new();

    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        if keyword != "atoms" && atom_count.is_none() {
            return Err(err("expected `atoms N` header".into()));
        }
        match keyword {
            "atoms" => {
                if atom_count.is_some() {
                    return Err(err("duplicate `atoms` header".into()));
                }
                atom_count = Some(parse_num(rest.trim()).map_err(err)?);
            }
            "seed" => seed = parse_num(rest.trim()).map_err(err)?,
            "base" => {
                for tok in rest.split_whitespace() {
                    base.push(AtomId(parse_num(tok).map_err(err)?));
                }
            }
            "rule" => {
                let (id, body) = rest
                    .split_once(':')
                    .ok_or_else(|| err("expected `rule <id>: premises -> conclusion`".into()))?;
                let id = RuleId(parse_num(id.trim()).map_err(err)?);
                let (lhs, rhs) = body
                    .split_once("->")
                    .ok_or_else(|| err("missing `->`".into()))?;
                let premises = lhs
                    .split_whitespace()
                    .map(|t| parse_num(t).map(AtomId))
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(err)?;
                let conclusion = AtomId(parse_num(rhs.trim()).map_err(err)?);
                rules.push(HornRule::new(id, premises, conclusion).map_err(|e| err(e.to_string()))?);
            }
            other => return Err(err(format!("unknown keyword `{other}`"))),
        }
    }
    let atom_count = atom_count.ok_or(Error::Parse {
        line: 0,
        message: "missing `atoms N` header".into(),
    })?;
    Ok(KnowledgeBase::new(atom_count, base, rules)?.with_seed(seed))
}

fn parse_num<T: std::str::FromStr>(tok: &str) -> std::result::Result<T, String> {
    tok.parse().map_err(|_| format!("invalid number `{tok}`"))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{generate_kb, KbGenParams};
    use super::*;

    #[test]
    fn diamond_text() {
        let kb = diamond().with_seed(42);
        let text = to_text(&kb);
        assert_eq!(
            text,
            "atoms 4\nseed 42\nbase 0\nrule 0: 0 -> 1\nrule 1: 0 -> 2\nrule 2: 1 2 -> 3\n"
        );
        let back = from_text(&text).unwrap();
        assert_eq!(back.rules(), kb.rules());
        assert_eq!(back.base_facts(), kb.base_facts());
        assert_eq!(back.generation_seed(), 42);
    }

    #[test]
    fn generated_kb_round_trips_exactly() {
        let kb = generate_kb(&KbGenParams::new(200, 600, 3.0, 3, 5)).unwrap();
        let text = to_text(&kb);
        let back = from_text(&text).unwrap();
        assert_eq!(to_text(&back), text);
        assert_eq!(back.atom_count(), kb.atom_count());
    }

    #[test]
    fn comments_and_empty_base() {
        let kb = from_text("# demo\natoms 2\n\nbase\nrule 5: 0 -> 1\n").unwrap();
        assert!(kb.base_facts().is_empty());
        assert_eq!(kb.rules()[0].id(), RuleId(5));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("base 0\n", 1),
            ("atoms 3\nrule 0 0 -> 1\n", 2),
            ("atoms 3\nrule 0: 0 1\n", 2),
            ("atoms 3\nrule 0: -> 1\n", 2),
            ("atoms 3\nbase x\n", 2),
            ("atoms 3\nfoo\n", 2),
        ];
        for (src, line) in cases {
            match from_text(src) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{src:?}"),
                other => panic!("{src:?}: {other:?}"),
            }
        }
        assert!(matches!(from_text(""), Err(Error::Parse { line: 0, .. })));
        assert!(matches!(
            from_text("atoms 2\nbase 3\n"),
            Err(Error::AtomOutOfRange { .. })
        ));
    }
}
