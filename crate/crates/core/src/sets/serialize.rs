//! Canonical printing and JSON serialization of set expressions.
//!
//! `Display` emits DSL text that re-parses to an equal tree for everything
//! the grammar can express; stream and predicate sets print their labels,
//! which are stable identities but not grammar productions.

use std::fmt;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::sets::{BlockRule, NullFamily, SetExpr};

// Precedence levels: union 1, difference/symmetric difference 2,
// intersection 3, complement 4, atoms 5.
fn level(e: &SetExpr) -> u8 {
    match e {
        SetExpr::Union(..) => 1,
        SetExpr::Difference(..) | SetExpr::SymmDiff(..) => 2,
        SetExpr::Intersection(..) => 3,
        SetExpr::Complement(..) => 4,
        _ => 5,
    }
}

fn write_prec(e: &SetExpr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let own = level(e);
    if own < min {
        write!(f, "(")?;
    }
    match e {
        SetExpr::Union(a, b) => {
            write_prec(a, 1, f)?;
            write!(f, " | ")?;
            write_prec(b, 2, f)?;
        }
        SetExpr::Difference(a, b) => {
            write_prec(a, 2, f)?;
            write!(f, " \\ ")?;
            write_prec(b, 3, f)?;
        }
        SetExpr::SymmDiff(a, b) => {
            write_prec(a, 2, f)?;
            write!(f, " ^ ")?;
            write_prec(b, 3, f)?;
        }
        SetExpr::Intersection(a, b) => {
            write_prec(a, 3, f)?;
            write!(f, " & ")?;
            write_prec(b, 4, f)?;
        }
        SetExpr::Complement(a) => {
            write!(f, "~")?;
            write_prec(a, 4, f)?;
        }
        SetExpr::Finite(v) => {
            write!(f, "{{")?;
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "}}")?;
        }
        SetExpr::Residue { r, m } => write!(f, "residue({r} mod {m})")?,
        SetExpr::Blocks(spec) => {
            write!(f, "blocks(")?;
            match spec.rule() {
                BlockRule::Geometric { scale, base: 1 } => write!(f, "{scale}")?,
                BlockRule::Geometric { scale: 1, base } => write!(f, "{base}^(n-1)")?,
                BlockRule::Geometric { scale, base } => write!(f, "{scale}*{base}^(n-1)")?,
                BlockRule::Power { exponent } => write!(f, "n^{exponent}")?,
                BlockRule::Explicit { prefix, tail } => {
                    write!(f, "[")?;
                    for (i, z) in prefix.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{z}")?;
                    }
                    write!(f, ";")?;
                    for (i, z) in tail.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{z}")?;
                    }
                    write!(f, "]")?;
                }
            }
            write!(f, ")")?;
        }
        SetExpr::NullFamily(fam) => match fam {
            NullFamily::Squares => write!(f, "squares")?,
            NullFamily::Cubes => write!(f, "cubes")?,
            NullFamily::Powers(b) => write!(f, "powers({b})")?,
            NullFamily::Primes => write!(f, "primes")?,
        },
        SetExpr::Interleave(base) => {
            write!(f, "interleave(")?;
            write_prec(base, 1, f)?;
            write!(f, ")")?;
        }
        SetExpr::Dilate { factor, inner } => {
            write!(f, "dilate({factor}, ")?;
            write_prec(inner, 1, f)?;
            write!(f, ")")?;
        }
        SetExpr::Stream(s) => write!(f, "{}", s.label())?,
        SetExpr::Predicate(p) => write!(f, "predicate:{}", p.label())?,
    }
    if own < min {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, 1, f)
    }
}

impl Serialize for SetExpr {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut map = ser.serialize_map(None)?;
        match self {
            SetExpr::Finite(v) => {
                map.serialize_entry("kind", "finite")?;
                map.serialize_entry("elements", v.as_ref())?;
            }
            SetExpr::Residue { r, m } => {
                map.serialize_entry("kind", "residue")?;
                map.serialize_entry("r", r)?;
                map.serialize_entry("m", m)?;
            }
            SetExpr::Blocks(spec) => {
                map.serialize_entry("kind", "blocks")?;
                match spec.rule() {
                    BlockRule::Geometric { scale, base } => {
                        map.serialize_entry("rule", "geometric")?;
                        map.serialize_entry("scale", scale)?;
                        map.serialize_entry("base", base)?;
                    }
                    BlockRule::Power { exponent } => {
                        map.serialize_entry("rule", "power")?;
                        map.serialize_entry("exponent", exponent)?;
                    }
                    BlockRule::Explicit { prefix, tail } => {
                        map.serialize_entry("rule", "explicit")?;
                        map.serialize_entry("prefix", prefix)?;
                        map.serialize_entry("tail", tail)?;
                    }
                }
            }
            SetExpr::NullFamily(fam) => {
                map.serialize_entry("kind", "null-family")?;
                match fam {
                    NullFamily::Squares => map.serialize_entry("family", "squares")?,
                    NullFamily::Cubes => map.serialize_entry("family", "cubes")?,
                    NullFamily::Powers(b) => {
                        map.serialize_entry("family", "powers")?;
                        map.serialize_entry("base", b)?;
                    }
                    NullFamily::Primes => map.serialize_entry("family", "primes")?,
                }
            }
            SetExpr::Interleave(base) => {
                map.serialize_entry("kind", "interleave")?;
                map.serialize_entry("base", base.as_ref())?;
            }
            SetExpr::Dilate { factor, inner } => {
                map.serialize_entry("kind", "dilate")?;
                map.serialize_entry("factor", factor)?;
                map.serialize_entry("inner", inner.as_ref())?;
            }
            SetExpr::Union(a, b) => {
                map.serialize_entry("kind", "union")?;
                map.serialize_entry("left", a.as_ref())?;
                map.serialize_entry("right", b.as_ref())?;
            }
            SetExpr::Intersection(a, b) => {
                map.serialize_entry("kind", "intersection")?;
                map.serialize_entry("left", a.as_ref())?;
                map.serialize_entry("right", b.as_ref())?;
            }
            SetExpr::Difference(a, b) => {
                map.serialize_entry("kind", "difference")?;
                map.serialize_entry("left", a.as_ref())?;
                map.serialize_entry("right", b.as_ref())?;
            }
            SetExpr::SymmDiff(a, b) => {
                map.serialize_entry("kind", "symmetric-difference")?;
                map.serialize_entry("left", a.as_ref())?;
                map.serialize_entry("right", b.as_ref())?;
            }
            SetExpr::Complement(a) => {
                map.serialize_entry("kind", "complement")?;
                map.serialize_entry("inner", a.as_ref())?;
            }
            SetExpr::Stream(s) => {
                map.serialize_entry("kind", "stream")?;
                map.serialize_entry("label", s.label())?;
            }
            SetExpr::Predicate(p) => {
                map.serialize_entry("kind", "predicate")?;
                map.serialize_entry("label", p.label())?;
            }
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::parser::parse;

    // Round-trip corpus: parse, print, re-parse, compare trees.
    const CORPUS: &[&str] = &[
        "residue(1 mod 2)",
        "residue(0 mod 3)",
        "residue(11 mod 12)",
        "{}",
        "{1}",
        "{1,2,3}",
        "{5,40,1000}",
        "squares",
        "cubes",
        "primes",
        "powers(2)",
        "powers(10)",
        "nat",
        "empty",
        "evens",
        "odds",
        "blocks(2^(n-1))",
        "blocks(3*2^(n-1))",
        "blocks(7)",
        "blocks(n^1)",
        "blocks(n^2)",
        "blocks(n^3)",
        "blocks([0,1;2,3])",
        "blocks([;1])",
        "blocks([2;5,1,4])",
        "greedy(1/2)",
        "greedy(0)",
        "greedy(1)",
        "greedy(2/5)",
        "greedy(0.25)",
        "dilate(2, squares)",
        "dilate(8, residue(1 mod 2) \\ {1})",
        "interleave(blocks(2^(n-1)))",
        "interleave(evens)",
        "~powers(2)",
        "~~odds",
        "residue(0 mod 2) & interleave(blocks(2^(n-1)))",
        "residue(0 mod 2) | residue(0 mod 3)",
        "residue(0 mod 2) \\ residue(0 mod 4)",
        "residue(0 mod 2) ^ residue(0 mod 3)",
        "(residue(0 mod 2) | residue(0 mod 3)) & ~squares",
        "~(odds | squares)",
        "odds \\ (squares ^ cubes)",
        "odds & evens | cubes & squares",
        "dilate(3, interleave(odds))",
        "{1,2} | {3,4} | {5,6}",
        "primes & residue(1 mod 4)",
        "~primes \\ {2,3,5}",
        "dilate(2, blocks(2^(n-1)))",
        "greedy(7/9) ^ squares",
    ];

    #[test]
    fn print_parse_round_trip() {
        assert!(CORPUS.len() >= 50);
        for src in CORPUS {
            let tree = parse(src).unwrap_or_else(|e| panic!("{src}: {e}"));
            let printed = tree.to_string();
            let reparsed =
                parse(&printed).unwrap_or_else(|e| panic!("printed `{printed}`: {e}"));
            assert_eq!(tree, reparsed, "round trip failed for `{src}` -> `{printed}`");
        }
    }

    #[test]
    fn printing_respects_precedence() {
        let e = parse("squares \\ (cubes ^ primes)").unwrap();
        assert_eq!(e.to_string(), "squares \\ (cubes ^ primes)");
        let e = parse("(squares | cubes) & primes").unwrap();
        assert_eq!(e.to_string(), "(squares | cubes) & primes");
        // sugar names print canonically
        assert_eq!(parse("odds").unwrap().to_string(), "residue(1 mod 2)");
    }

    #[test]
    fn json_tree_shape() {
        let e = parse("dilate(2, odds)").unwrap();
        let js = serde_json::to_value(&e).unwrap();
        assert_eq!(js["kind"], "dilate");
        assert_eq!(js["factor"], 2);
        assert_eq!(js["inner"]["kind"], "residue");
    }
}
