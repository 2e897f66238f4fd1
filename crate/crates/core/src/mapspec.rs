//! Text specifications of maps, e.g. `transposition:d=3`,
//! `mix:[id:d=2@0.5,transposition:d=2@0.5]`, `noisy_a:(transposition:d=2):eta=0.4`,
//! `file:choi.json` or `@choi.json`.
//!
//! Kinds and their fields:
//!
//! | kind | fields |
//! |---|---|
//! | `transposition` / `T` | `d` |
//! | `identity` / `id` | `d` |
//! | `choi3` | none |
//! | `depolarizing` | `din`, `dout`, `scale` (default 1) |
//! | `mix` | `[spec@weight, ...]` |
//! | `noisy_a`, `noisy_b` | `(spec)`, `eta` |
//! | `file` | path (rest of the string) |

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::maps::{
    choi_map_3, depolarizing_to, identity_map, mix, noisy_a, noisy_b, transposition_map, LinearMap,
};

#[derive(Clone, Debug, PartialEq)]
pub enum MapSpec {
    Transposition { d: usize },
    Identity { d: usize },
    Choi3,
    Depolarizing { d_in: usize, d_out: usize, scale: f64 },
    Mix(Vec<(MapSpec, f64)>),
    NoisyA { inner: Box<MapSpec>, eta: f64 },
    NoisyB { inner: Box<MapSpec>, eta: f64 },
    File(PathBuf),
}

fn parse_err(field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Splits on `sep` outside brackets and parentheses.
fn split_top(s: &str, sep: char) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(parse_err(s, format!("unbalanced `{ch}`")));
                }
            }
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(parse_err(s, "unclosed bracket"));
    }
    parts.push(&s[start..]);
    Ok(parts)
}

/// Position of the last `sep` outside brackets and parentheses.
fn rfind_top(s: &str, sep: char) -> Option<usize> {
    let mut depth = 0i32;
    let mut found = None;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            c if c == sep && depth == 0 => found = Some(i),
            _ => {}
        }
    }
    found
}

struct Fields<'a> {
    kind: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    fn new(kind: &'a str, parts: &[&'a str]) -> Result<Self> {
        let mut pairs = Vec::new();
        for part in parts {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| parse_err(part, format!("expected key=value in `{kind}`")))?;
            pairs.push((k.trim(), v.trim()));
        }
        Ok(Self { kind, pairs })
    }

    fn take(&mut self, key: &str) -> Option<&'a str> {
        let pos = self.pairs.iter().position(|(k, _)| *k == key)?;
        Some(self.pairs.remove(pos).1)
    }

    fn usize(&mut self, key: &str) -> Result<usize> {
        let v = self
            .take(key)
            .ok_or_else(|| parse_err(key, format!("`{}` requires `{key}`", self.kind)))?;
        v.parse()
            .map_err(|_| parse_err(key, format!("`{v}` is not a non-negative integer")))
    }

    fn f64_or(&mut self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.take(key) {
            Some(v) => parse_number(key, v),
            None => default.ok_or_else(|| parse_err(key, format!("`{}` requires `{key}`", self.kind))),
        }
    }

    fn finish(self) -> Result<()> {
        match self.pairs.first() {
            Some((k, _)) => Err(parse_err(k, format!("unknown field for `{}`", self.kind))),
            None => Ok(()),
        }
    }
}

/// Accepts plain decimals and simple fractions like `6/7`.
fn parse_number(field: &str, v: &str) -> Result<f64> {
    let bad = || parse_err(field, format!("`{v}` is not a number"));
    let x = match v.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a / b
        }
        None => v.parse().map_err(|_| bad())?,
    };
    if !x.is_finite() {
        return Err(bad());
    }
    Ok(x)
}

fn strip_wrapped<'a>(field: &str, s: &'a str, open: char, close: char) -> Result<&'a str> {
    let s = s.trim();
    if s.starts_with(open) && s.ends_with(close) && s.len() >= 2 {
        Ok(&s[1..s.len() - 1])
    } else {
        Err(parse_err(field, format!("expected `{open}…{close}`, got `{s}`")))
    }
}

impl MapSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(parse_err("kind", "empty map spec"));
        }
        if let Some(path) = text.strip_prefix('@') {
            return Self::file(path);
        }
        if let Some(path) = text.strip_prefix("file:") {
            return Self::file(path);
        }
        let parts = split_top(text, ':')?;
        let kind = parts[0].trim();
        let rest = &parts[1..];
        match kind {
            "transposition" | "T" => {
                let mut f = Fields::new(kind, rest)?;
                let d = f.usize("d")?;
                f.finish()?;
                Ok(Self::Transposition { d })
            }
            "identity" | "id" => {
                let mut f = Fields::new(kind, rest)?;
                let d = f.usize("d")?;
                f.finish()?;
                Ok(Self::Identity { d })
            }
            "choi3" => {
                Fields::new(kind, rest)?.finish()?;
                Ok(Self::Choi3)
            }
            "depolarizing" => {
                let mut f = Fields::new(kind, rest)?;
                let d_in = f.usize("din")?;
                let d_out = f.usize("dout")?;
                let scale = f.f64_or("scale", Some(1.0))?;
                f.finish()?;
                Ok(Self::Depolarizing { d_in, d_out, scale })
            }
            "mix" => {
                let (list, tail) = rest
                    .split_first()
                    .ok_or_else(|| parse_err("mix", "expected `[spec@weight, ...]`"))?;
                Fields::new(kind, tail)?.finish()?;
                let body = strip_wrapped("mix", list, '[', ']')?;
                let mut items = Vec::new();
                for item in split_top(body, ',')? {
                    let at = rfind_top(item, '@')
                        .ok_or_else(|| parse_err("weight", format!("`{item}` lacks `@weight`")))?;
                    let spec = Self::parse(&item[..at])?;
                    let w = parse_number("weight", item[at + 1..].trim())?;
                    items.push((spec, w));
                }
                if items.is_empty() {
                    return Err(parse_err("mix", "empty component list"));
                }
                Ok(Self::Mix(items))
            }
            "noisy_a" | "noisy_b" => {
                let (inner, tail) = rest
                    .split_first()
                    .ok_or_else(|| parse_err(kind, "expected `(spec):eta=...`"))?;
                let inner = Box::new(Self::parse(strip_wrapped(kind, inner, '(', ')')?)?);
                let mut f = Fields::new(kind, tail)?;
                let eta = f.f64_or("eta", None)?;
                f.finish()?;
                if !(0.0..=1.0).contains(&eta) {
                    return Err(parse_err("eta", format!("{eta} is outside [0, 1]")));
                }
                Ok(if kind == "noisy_a" {
                    Self::NoisyA { inner, eta }
                } else {
                    Self::NoisyB { inner, eta }
                })
            }
            other => Err(parse_err("kind", format!("unknown map kind `{other}`"))),
        }
    }

    fn file(path: &str) -> Result<Self> {
        let path = path.trim();
        if path.is_empty() {
            return Err(parse_err("path", "empty file path"));
        }
        Ok(Self::File(PathBuf::from(path)))
    }

    pub fn resolve(&self) -> Result<LinearMap> {
        match self {
            Self::Transposition { d } => transposition_map(*d),
            Self::Identity { d } => identity_map(*d),
            Self::Choi3 => Ok(choi_map_3()),
            Self::Depolarizing { d_in, d_out, scale } => depolarizing_to(*d_in, *d_out, *scale),
            Self::Mix(items) => {
                let maps = items.iter().map(|(s, _)| s.resolve()).collect::<Result<Vec<_>>>()?;
                let weights: Vec<f64> = items.iter().map(|(_, w)| *w).collect();
                mix(&maps, &weights)
            }
            Self::NoisyA { inner, eta } => noisy_a(&inner.resolve()?, *eta),
            Self::NoisyB { inner, eta } => noisy_b(&inner.resolve()?, *eta),
            Self::File(path) => LinearMap::load(path),
        }
    }

    /// Dimension of the transposition this spec names directly, if any.
    pub fn transposition_dim(&self) -> Option<usize> {
        match self {
            Self::Transposition { d } => Some(*d),
            _ => None,
        }
    }
}

impl FromStr for MapSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Transposition { d } => write!(f, "transposition:d={d}"),
            Self::Identity { d } => write!(f, "id:d={d}"),
            Self::Choi3 => write!(f, "choi3"),
            Self::Depolarizing { d_in, d_out, scale } => {
                write!(f, "depolarizing:din={d_in}:dout={d_out}:scale={scale}")
            }
            Self::Mix(items) => {
                write!(f, "mix:[")?;
                for (k, (s, w)) in items.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{s}@{w}")?;
                }
                write!(f, "]")
            }
            Self::NoisyA { inner, eta } => write!(f, "noisy_a:({inner}):eta={eta}"),
            Self::NoisyB { inner, eta } => write!(f, "noisy_b:({inner}):eta={eta}"),
            Self::File(path) => write!(f, "file:{}", path.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(text: &str) -> String {
        match MapSpec::parse(text) {
            Err(Error::Parse { field, .. }) => field,
            other => panic!("expected a parse error for `{text}`, got {other:?}"),
        }
    }

    #[test]
    fn parses_examples() {
        assert_eq!(MapSpec::parse("transposition:d=3").unwrap(), MapSpec::Transposition { d: 3 });
        let m = MapSpec::parse("mix:[id:d=2@0.5,transposition:d=2@0.5]").unwrap();
        assert_eq!(
            m,
            MapSpec::Mix(vec![
                (MapSpec::Identity { d: 2 }, 0.5),
                (MapSpec::Transposition { d: 2 }, 0.5)
            ])
        );
        let n = MapSpec::parse("noisy_a:(transposition:d=2):eta=0.4").unwrap();
        assert_eq!(
            n,
            MapSpec::NoisyA {
                inner: Box::new(MapSpec::Transposition { d: 2 }),
                eta: 0.4
            }
        );
        assert_eq!(MapSpec::parse("@x.json").unwrap(), MapSpec::File("x.json".into()));
        assert_eq!(MapSpec::parse("file:a:b.json").unwrap(), MapSpec::File("a:b.json".into()));
        let nested = MapSpec::parse("noisy_b:(mix:[id:d=3@0.12,choi3@6/7]):eta=1/2").unwrap();
        assert!(matches!(nested, MapSpec::NoisyB { eta, .. } if eta == 0.5));
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "transposition:d=2",
            "id:d=3",
            "choi3",
            "depolarizing:din=2:dout=3:scale=0.5",
            "mix:[id:d=2@0.5,transposition:d=2@-0.25]",
            "noisy_a:(noisy_b:(choi3):eta=0.1):eta=0.4",
        ] {
            let spec = MapSpec::parse(text).unwrap();
            assert_eq!(MapSpec::parse(&spec.to_string()).unwrap(), spec);
        }
    }

    #[test]
    fn diagnostics_name_the_field() {
        assert_eq!(field_of("transposition"), "d");
        assert_eq!(field_of("transposition:d=x"), "d");
        assert_eq!(field_of("transposition:d=2:q=1"), "q");
        assert_eq!(field_of("noisy_a:(choi3):eta=2"), "eta");
        assert_eq!(field_of("noisy_a:(choi3)"), "eta");
        assert_eq!(field_of("mix:[choi3]"), "weight");
        assert_eq!(field_of("mix:[choi3@w]"), "weight");
        assert_eq!(field_of("banana"), "kind");
        assert_eq!(field_of("depolarizing:din=2"), "dout");
    }

    #[test]
    fn resolves() {
        let m = MapSpec::parse("mix:[id:d=2@0.7,T:d=2@0.3]").unwrap().resolve().unwrap();
        assert!((m.choi().get(1, 2).re - 0.3).abs() < 1e-15);
        let e = MapSpec::parse("mix:[id:d=2@0.5,T:d=3@0.5]").unwrap().resolve();
        assert!(matches!(e, Err(Error::Shape(_))));
    }
}
