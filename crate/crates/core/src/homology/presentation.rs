//! Finite group presentations and their abelianizations.

use std::fmt;

use super::matrix::SparseIntMatrix;
use super::snf::smith_normal_form;
use super::AbelianGroup;
use crate::error::ParseError;

/// A letter is a generator index with exponent `±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: u32,
    pub inverse: bool,
}

/// Generators with names and relators as freely reduced words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupPresentation {
    generators: Vec<String>,
    relators: Vec<Vec<Letter>>,
}

impl GroupPresentation {
    pub fn new(generators: Vec<String>, relators: Vec<Vec<Letter>>) -> Self {
        GroupPresentation {
            generators,
            relators: relators.into_iter().map(free_reduce).collect(),
        }
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relators(&self) -> &[Vec<Letter>] {
        &self.relators
    }

    /// Text format: a line `generators: a b c`, then one relator per line as
    /// whitespace-separated powers such as `a^2 b a^-1`. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut generators: Option<Vec<String>> = None;
        let mut relators = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("generators:") {
                if generators.is_some() {
                    return Err(ParseError::new(ln, "generators declared twice"));
                }
                let names: Vec<String> = rest.split_whitespace().map(str::to_owned).collect();
                for (k, n) in names.iter().enumerate() {
                    if !is_identifier(n) {
                        return Err(ParseError::new(ln, format!("invalid generator name '{n}'")));
                    }
                    if names[..k].contains(n) {
                        return Err(ParseError::new(ln, format!("repeated generator '{n}'")));
                    }
                }
                generators = Some(names);
                continue;
            }
            let gens = generators
                .as_ref()
                .ok_or_else(|| ParseError::new(ln, "relator before the generators line"))?;
            let mut word = Vec::new();
            for token in line.split_whitespace() {
                let (name, exp) = match token.split_once('^') {
                    Some((n, e)) => (
                        n,
                        e.parse::<i64>()
                            .map_err(|_| ParseError::new(ln, format!("bad exponent in '{token}'")))?,
                    ),
                    None => (token, 1),
                };
                let g = gens
                    .iter()
                    .position(|x| x == name)
                    .ok_or_else(|| ParseError::new(ln, format!("unknown generator '{name}'")))?;
                let letter = Letter {
                    generator: g as u32,
                    inverse: exp < 0,
                };
                word.extend(std::iter::repeat_n(letter, exp.unsigned_abs() as usize));
            }
            relators.push(word);
        }
        let generators = generators.ok_or_else(|| ParseError::new(1, "missing generators line"))?;
        Ok(GroupPresentation::new(generators, relators))
    }

    /// Relators × generators matrix of exponent sums.
    pub fn relation_matrix(&self) -> SparseIntMatrix {
        SparseIntMatrix::from_triplets(
            self.relators.len(),
            self.generators.len(),
            self.relators.iter().enumerate().flat_map(|(r, w)| {
                w.iter()
                    .map(move |l| (r, l.generator as usize, if l.inverse { -1 } else { 1 }))
            }),
        )
    }

    pub fn abelianize(&self) -> AbelianGroup {
        let snf = smith_normal_form(&self.relation_matrix());
        AbelianGroup {
            rank: self.generators.len() - snf.rank,
            torsion: snf.torsion(),
        }
    }
}

impl fmt::Display for GroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "generators: {}", self.generators.join(" "))?;
        for w in &self.relators {
            let mut tokens = Vec::new();
            let mut i = 0;
            while i < w.len() {
                let run = w[i..].iter().take_while(|l| **l == w[i]).count();
                let name = &self.generators[w[i].generator as usize];
                let e = if w[i].inverse { -(run as i64) } else { run as i64 };
                tokens.push(if e == 1 { name.clone() } else { format!("{name}^{e}") });
                i += run;
            }
            writeln!(f, "{}", tokens.join(" "))?;
        }
        Ok(())
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

pub fn free_reduce(word: Vec<Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(word.len());
    for l in word {
        match out.last() {
            Some(p) if p.generator == l.generator && p.inverse != l.inverse => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_group_and_trivial_group() {
        let p = GroupPresentation::parse("generators: a b\n").unwrap();
        assert_eq!(p.abelianize(), AbelianGroup::free(2));
        let p = GroupPresentation::parse("generators: a\na\n").unwrap();
        assert!(p.abelianize().is_trivial());
    }

    #[test]
    fn reduction_and_roundtrip() {
        let p = GroupPresentation::parse("generators: a b\na b b^-1 a^-1 b^3\n").unwrap();
        assert_eq!(p.relators()[0].len(), 3);
        assert_eq!(p.to_string(), "generators: a b\nb^3\n");
        assert_eq!(GroupPresentation::parse(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn errors_carry_lines() {
        let e = GroupPresentation::parse("generators: a\n\na c\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = GroupPresentation::parse("a b\n").unwrap_err();
        assert_eq!(e.line, 1);
    }
}
