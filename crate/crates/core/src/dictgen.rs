//! Smart-dictionary definition and the index → plaintext bijection.
//!
//! A dictionary is a set of generators (word/number/symbol lists), a
//! composition pattern over generator classes, and an ordered list of
//! transform rules. Every plaintext in the space is addressed by a single
//! integer index: positions of the pattern consume mixed-radix digits of the
//! index, and within one position the digit splits into a base-entry choice
//! and a transform-variant choice. The mapping is injective as long as the
//! generators are duplicate-free and the rules produce distinct variants.
//!
//! Variant semantics, fixed here so outputs are reproducible:
//! - `Identity`: multiplicity 1, never changes the base.
//! - `CaseShift`: variant 0 = base, 1 = first alphabetic char uppercased,
//!   2 = whole string uppercased (multiplicity at most 3).
//! - `Reverse`: variant 0 = base, 1 = full reversal (multiplicity at most 2).
//! - `LeetSubstitute`: substitution table a→@ e→3 o→0 s→$ (either case);
//!   variant v substitutes the applicable character positions selected by the
//!   bitmask v, positions ordered left to right. Variant 0 = base.
//!
//! Transforms that happen to reproduce their base (palindromes under
//! `Reverse`, bases with no applicable characters) stay in the index space;
//! the injectivity guarantee is scoped to non-degenerate inputs. One more
//! degenerate interaction to know about: the substitution table ignores case,
//! so combining `CaseShift` with `LeetSubstitute` on a word whose first
//! letter is itself substitutable ("seed" -> "Seed" -> "$eed" = leet of the
//! lowercase base) collapses two variants into one.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

/// Character classes a generator can hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GeneratorClass {
    Word,
    Number,
    Symbol,
}

impl GeneratorClass {
    pub fn letter(self) -> char {
        match self {
            GeneratorClass::Word => 'W',
            GeneratorClass::Number => 'N',
            GeneratorClass::Symbol => 'S',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'W' => Some(GeneratorClass::Word),
            'N' => Some(GeneratorClass::Number),
            'S' => Some(GeneratorClass::Symbol),
            _ => None,
        }
    }
}

impl fmt::Display for GeneratorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// An ordered, duplicate-free list of base entries for one class.
#[derive(Debug, Clone)]
pub struct Generator {
    class: GeneratorClass,
    entries: Vec<String>,
}

impl Generator {
    pub fn new(class: GeneratorClass, entries: Vec<String>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Dict(format!("generator {class} has no entries")));
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if e.is_empty() {
                return Err(Error::Dict(format!("generator {class} has an empty entry")));
            }
            if e.chars().any(|c| c.is_control()) {
                return Err(Error::Dict(format!(
                    "generator {class} entry {e:?} contains non-printable characters"
                )));
            }
            if !seen.insert(e.clone()) {
                return Err(Error::Dict(format!(
                    "generator {class} entry {e:?} appears twice"
                )));
            }
        }
        Ok(Generator { class, entries })
    }

    pub fn class(&self) -> GeneratorClass {
        self.class
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn len(&self) -> u64 {
        self.entries.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Transform rule kinds. Each kind fixes what a variant index means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Identity,
    CaseShift,
    LeetSubstitute,
    Reverse,
}

impl TransformKind {
    fn max_multiplicity(self) -> u64 {
        match self {
            TransformKind::Identity => 1,
            TransformKind::CaseShift => 3,
            TransformKind::Reverse => 2,
            // bitmask over applicable positions; 16 variants is already past
            // anything a password-habit rule needs
            TransformKind::LeetSubstitute => 16,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Identity => "identity",
            TransformKind::CaseShift => "caseshift",
            TransformKind::LeetSubstitute => "leetsubstitute",
            TransformKind::Reverse => "reverse",
        }
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "identity" => Ok(TransformKind::Identity),
            "caseshift" => Ok(TransformKind::CaseShift),
            "leetsubstitute" | "leet" => Ok(TransformKind::LeetSubstitute),
            "reverse" => Ok(TransformKind::Reverse),
            other => Err(Error::Dict(format!("unknown transform kind {other:?}"))),
        }
    }
}

/// One deterministic string-mutation rule scoped to a generator class.
#[derive(Debug, Clone, Copy)]
pub struct TransformRule {
    pub kind: TransformKind,
    pub applicable_class: GeneratorClass,
    pub multiplicity: u64,
}

impl TransformRule {
    pub fn new(kind: TransformKind, applicable_class: GeneratorClass, multiplicity: u64) -> Result<Self> {
        if multiplicity < 1 {
            return Err(Error::Dict("rule multiplicity must be >= 1".into()));
        }
        if multiplicity > kind.max_multiplicity() {
            return Err(Error::Dict(format!(
                "{} supports at most {} variants, got {multiplicity}",
                kind.name(),
                kind.max_multiplicity()
            )));
        }
        Ok(TransformRule {
            kind,
            applicable_class,
            multiplicity,
        })
    }

    /// Apply this rule's local variant to a base string.
    fn apply_variant(&self, base: &str, variant: u64) -> String {
        match self.kind {
            TransformKind::Identity => base.to_string(),
            TransformKind::CaseShift => match variant {
                0 => base.to_string(),
                1 => uppercase_first_alphabetic(base),
                _ => base.to_uppercase(),
            },
            TransformKind::Reverse => {
                if variant == 0 {
                    base.to_string()
                } else {
                    base.chars().rev().collect()
                }
            }
            TransformKind::LeetSubstitute => leet_variant(base, variant),
        }
    }
}

fn uppercase_first_alphabetic(base: &str) -> String {
    let mut done = false;
    base.chars()
        .map(|c| {
            if !done && c.is_alphabetic() {
                done = true;
                c.to_uppercase().next().unwrap_or(c)
            } else {
                c
            }
        })
        .collect()
}

fn leet_substitution(c: char) -> Option<char> {
    match c {
        'a' | 'A' => Some('@'),
        'e' | 'E' => Some('3'),
        'o' | 'O' => Some('0'),
        's' | 'S' => Some('$'),
        _ => None,
    }
}

fn leet_variant(base: &str, variant: u64) -> String {
    let mut applicable = 0u32;
    base.chars()
        .map(|c| match leet_substitution(c) {
            Some(sub) => {
                let selected = applicable < 63 && (variant >> applicable) & 1 == 1;
                applicable += 1;
                if selected {
                    sub
                } else {
                    c
                }
            }
            None => c,
        })
        .collect()
}

/// The ordered template of generator classes one plaintext instantiates.
#[derive(Debug, Clone)]
pub struct CompositionPattern {
    sequence: Vec<GeneratorClass>,
}

impl CompositionPattern {
    pub fn new(sequence: Vec<GeneratorClass>) -> Result<Self> {
        if sequence.is_empty() {
            return Err(Error::Dict("composition pattern is empty".into()));
        }
        Ok(CompositionPattern { sequence })
    }

    pub fn sequence(&self) -> &[GeneratorClass] {
        &self.sequence
    }
}

impl FromStr for CompositionPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let seq = s
            .chars()
            .map(|c| {
                GeneratorClass::from_letter(c)
                    .ok_or_else(|| Error::Dict(format!("unknown pattern class {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        CompositionPattern::new(seq)
    }
}

impl fmt::Display for CompositionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.sequence {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Generators plus the rule list that extends them.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    generators: BTreeMap<GeneratorClass, Generator>,
    rules: Vec<TransformRule>,
}

impl GeneratorSet {
    pub fn new(generators: Vec<Generator>, rules: Vec<TransformRule>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for g in generators {
            if map.insert(g.class(), g).is_some() {
                return Err(Error::Dict("two generators share a class".into()));
            }
        }
        if map.is_empty() {
            return Err(Error::Dict("generator set is empty".into()));
        }
        Ok(GeneratorSet {
            generators: map,
            rules,
        })
    }

    pub fn generator(&self, class: GeneratorClass) -> Option<&Generator> {
        self.generators.get(&class)
    }

    pub fn rules(&self) -> &[TransformRule] {
        &self.rules
    }

    fn rules_for(&self, class: GeneratorClass) -> Vec<TransformRule> {
        self.rules
            .iter()
            .filter(|r| r.applicable_class == class)
            .copied()
            .collect()
    }
}

/// Product of the multiplicities of the rules applicable to `generator`.
/// An empty applicable set contributes the identity extension 1.
pub fn compute_extension_ratio(rules: &[TransformRule], generator: &Generator) -> u64 {
    rules
        .iter()
        .filter(|r| r.applicable_class == generator.class())
        .map(|r| r.multiplicity)
        .product()
}

/// Apply the variant selected by `variant_index` to `base`.
///
/// `rules` is the already-filtered, ordered rule list for the base's class.
/// The index is decomposed mixed-radix over the rule multiplicities (first
/// rule = least significant digit) and the selected variants are applied in
/// rule order. Index 0 always yields the untransformed base.
pub fn apply_transform(base: &str, rules: &[TransformRule], variant_index: u64) -> Result<String> {
    let total: u64 = rules.iter().map(|r| r.multiplicity).product();
    if variant_index >= total {
        return Err(Error::Range {
            what: "variant_index",
            value: variant_index,
            limit: total,
        });
    }
    let mut out = base.to_string();
    let mut rem = variant_index;
    for rule in rules {
        let local = rem % rule.multiplicity;
        rem /= rule.multiplicity;
        out = rule.apply_variant(&out, local);
    }
    Ok(out)
}

/// Total plaintext candidates N over the pattern positions.
pub fn plaintext_space_size(gset: &GeneratorSet, pattern: &CompositionPattern) -> Result<u64> {
    let mut n: u64 = 1;
    for class in pattern.sequence() {
        let gen = gset
            .generator(*class)
            .ok_or_else(|| Error::Dict(format!("pattern references class {class} with no generator")))?;
        let ext = compute_extension_ratio(gset.rules(), gen);
        let t_ext = gen
            .len()
            .checked_mul(ext)
            .ok_or_else(|| Error::Config("plaintext space exceeds 64-bit range".into()))?;
        n = n
            .checked_mul(t_ext)
            .ok_or_else(|| Error::Config("plaintext space exceeds 64-bit range".into()))?;
    }
    Ok(n)
}

/// Decode index `i` into a plaintext: each pattern position consumes a
/// mixed-radix digit `sub = i mod T_ext` (then `i /= T_ext`); within the
/// position, `sub mod T_space` picks the base entry and `sub div T_space`
/// picks the transform variant.
pub fn index_to_plain(i: u64, gset: &GeneratorSet, pattern: &CompositionPattern) -> Result<String> {
    let n = plaintext_space_size(gset, pattern)?;
    if i >= n {
        return Err(Error::Range {
            what: "plaintext index",
            value: i,
            limit: n,
        });
    }
    let mut out = String::new();
    let mut rem = i;
    for class in pattern.sequence() {
        let gen = gset.generator(*class).expect("validated by space size");
        let applicable = gset.rules_for(*class);
        let t_space = gen.len();
        let ext: u64 = applicable.iter().map(|r| r.multiplicity).product();
        let t_ext = t_space * ext;
        let sub = rem % t_ext;
        rem /= t_ext;
        let base = &gen.entries()[(sub % t_space) as usize];
        let variant = sub / t_space;
        out.push_str(&apply_transform(base, &applicable, variant)?);
    }
    Ok(out)
}

/// A validated dictionary: generator set + pattern, with the space size
/// checked against the 64-bit limit at construction.
#[derive(Debug, Clone)]
pub struct SmartDictionary {
    gset: GeneratorSet,
    pattern: CompositionPattern,
    space: u64,
}

impl SmartDictionary {
    pub fn new(gset: GeneratorSet, pattern: CompositionPattern) -> Result<Self> {
        let space = plaintext_space_size(&gset, &pattern)?;
        Ok(SmartDictionary {
            gset,
            pattern,
            space,
        })
    }

    pub fn generator_set(&self) -> &GeneratorSet {
        &self.gset
    }

    pub fn pattern(&self) -> &CompositionPattern {
        &self.pattern
    }

    pub fn rules(&self) -> &[TransformRule] {
        self.gset.rules()
    }

    /// N, the number of addressable plaintexts.
    pub fn space_size(&self) -> u64 {
        self.space
    }

    pub fn index_to_plain(&self, i: u64) -> Result<String> {
        index_to_plain(i, &self.gset, &self.pattern)
    }

    /// Parse the line-oriented dictionary definition format.
    ///
    /// Sections `[words]`, `[numbers]`, `[symbols]`, `[pattern]`, `[rules]`;
    /// one entry per line; `#` starts a comment line; rules look like
    /// `caseshift W 2`.
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(Clone, Copy, PartialEq)]
        enum Section {
            None,
            Entries(GeneratorClass),
            Pattern,
            Rules,
        }

        let mut entries: BTreeMap<GeneratorClass, Vec<String>> = BTreeMap::new();
        let mut pattern: Option<CompositionPattern> = None;
        let mut rules: Vec<TransformRule> = Vec::new();
        let mut section = Section::None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let at = |msg: String| Error::Dict(format!("line {}: {msg}", lineno + 1));
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = match name.to_ascii_lowercase().as_str() {
                    "words" => Section::Entries(GeneratorClass::Word),
                    "numbers" => Section::Entries(GeneratorClass::Number),
                    "symbols" => Section::Entries(GeneratorClass::Symbol),
                    "pattern" => Section::Pattern,
                    "rules" => Section::Rules,
                    other => return Err(at(format!("unknown section [{other}]"))),
                };
                continue;
            }
            match section {
                Section::None => {
                    return Err(at(format!("entry {line:?} outside any section")));
                }
                Section::Entries(class) => {
                    entries.entry(class).or_default().push(line.to_string());
                }
                Section::Pattern => {
                    if pattern.is_some() {
                        return Err(at("pattern given twice".into()));
                    }
                    pattern = Some(line.parse().map_err(|e| at(format!("{e}")))?);
                }
                Section::Rules => {
                    let parts: Vec<&str> = line.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(at(format!(
                            "rule must be `<kind> <class> <multiplicity>`, got {line:?}"
                        )));
                    }
                    let kind: TransformKind = parts[0].parse().map_err(|e| at(format!("{e}")))?;
                    let class = parts[1]
                        .chars()
                        .next()
                        .filter(|_| parts[1].len() == 1)
                        .and_then(GeneratorClass::from_letter)
                        .ok_or_else(|| at(format!("unknown generator class {:?}", parts[1])))?;
                    let mult: u64 = parts[2]
                        .parse()
                        .map_err(|_| at(format!("bad multiplicity {:?}", parts[2])))?;
                    rules.push(TransformRule::new(kind, class, mult).map_err(|e| at(format!("{e}")))?);
                }
            }
        }

        let pattern = pattern.ok_or_else(|| Error::Dict("no [pattern] section".into()))?;
        let generators = entries
            .into_iter()
            .map(|(class, es)| Generator::new(class, es))
            .collect::<Result<Vec<_>>>()?;
        let gset = GeneratorSet::new(generators, rules)?;
        SmartDictionary::new(gset, pattern)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}
