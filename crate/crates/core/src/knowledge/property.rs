use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum names per (property, value) pair: three demonstrations plus at
/// least one held out.
pub const MIN_NAMES_PER_PAIR: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Occupation,
    Citizenship,
    Education,
    Birthplace,
    Deathplace,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::Occupation,
        Property::Citizenship,
        Property::Education,
        Property::Birthplace,
        Property::Deathplace,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Property::Occupation => "occupation",
            Property::Citizenship => "citizenship",
            Property::Education => "education",
            Property::Birthplace => "birthplace",
            Property::Deathplace => "deathplace",
        }
    }

    /// Noun phrase naming the people holding `value` for this property.
    pub fn describe(self, value: &str) -> String {
        match self {
            Property::Occupation => value.to_string(),
            Property::Citizenship => format!("people with {value} citizenship"),
            Property::Education => format!("people educated at {value}"),
            Property::Birthplace => format!("people who were born in {value}"),
            Property::Deathplace => format!("people who died in {value}"),
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown property {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct PropertyPair {
    pub property: Property,
    pub value: String,
    pub names: Vec<String>,
}

impl PropertyPair {
    pub fn display_name(&self) -> String {
        self.property.describe(&self.value)
    }
}

/// People grouped by (property, value), with a description per person.
#[derive(Debug, Clone, Default)]
pub struct PropertyKb {
    pairs: Vec<PropertyPair>,
    by_key: HashMap<(Property, String), usize>,
    person_text: HashMap<String, String>,
}

impl PropertyKb {
    /// Parses `PAIR <property> <value>` headers each followed by `NAME
    /// <person>` lines, and `TEXT <person> <sentence>` lines anywhere. The
    /// person in a `TEXT` line is matched against known names by longest
    /// prefix, since names contain spaces.
    pub fn parse(src: &str, origin: &str) -> Result<Self> {
        let mut kb = PropertyKb::default();
        let mut texts: Vec<(String, usize)> = Vec::new();
        for (i, line) in src.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (kind, rest) = line.split_once(' ').unwrap_or((line, ""));
            let rest = rest.trim();
            match kind {
                "PAIR" => {
                    let (prop, value) = rest.split_once(' ').ok_or_else(|| {
                        Error::parse(origin, lineno, "PAIR needs <property> <value>")
                    })?;
                    let property: Property = prop
                        .parse()
                        .map_err(|e: Error| Error::parse(origin, lineno, e.to_string()))?;
                    let value = value.trim().to_string();
                    if kb.by_key.contains_key(&(property, value.clone())) {
                        return Err(Error::parse(
                            origin,
                            lineno,
                            format!("duplicate pair {prop} {value}"),
                        ));
                    }
                    kb.by_key.insert((property, value.clone()), kb.pairs.len());
                    kb.pairs.push(PropertyPair {
                        property,
                        value,
                        names: Vec::new(),
                    });
                }
                "NAME" => {
                    let pair = kb
                        .pairs
                        .last_mut()
                        .ok_or_else(|| Error::parse(origin, lineno, "NAME before any PAIR"))?;
                    if rest.is_empty() {
                        return Err(Error::parse(origin, lineno, "empty NAME"));
                    }
                    if !pair.names.iter().any(|n| n == rest) {
                        pair.names.push(rest.to_string());
                    }
                }
                "TEXT" => texts.push((rest.to_string(), lineno)),
                other => {
                    return Err(Error::parse(
                        origin,
                        lineno,
                        format!("unknown record {other:?}"),
                    ))
                }
            }
        }
        let mut names: Vec<&str> = kb.all_names().into_iter().collect();
        names.sort_by_key(|n| std::cmp::Reverse(n.len()));
        let mut person_text = HashMap::new();
        for (rest, lineno) in texts {
            let name = names
                .iter()
                .find(|n| {
                    rest.len() > n.len() && rest.starts_with(*n) && rest[n.len()..].starts_with(' ')
                })
                .ok_or_else(|| Error::parse(origin, lineno, "TEXT for unknown person"))?;
            let text = rest[name.len()..].trim();
            if text.is_empty() {
                return Err(Error::parse(origin, lineno, "empty TEXT"));
            }
            person_text.insert(name.to_string(), text.to_string());
        }
        kb.person_text = person_text;
        for p in &kb.pairs {
            if p.names.len() < MIN_NAMES_PER_PAIR {
                return Err(Error::parse(
                    origin,
                    0,
                    format!(
                        "pair {} {} has {} names, need at least {MIN_NAMES_PER_PAIR}",
                        p.property,
                        p.value,
                        p.names.len()
                    ),
                ));
            }
            if let Some(n) = p.names.iter().find(|n| !kb.person_text.contains_key(*n)) {
                return Err(Error::parse(origin, 0, format!("person {n:?} has no TEXT")));
            }
        }
        Ok(kb)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&std::fs::read_to_string(path)?, &path.display().to_string())
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for p in &self.pairs {
            out.push_str(&format!("PAIR {} {}\n", p.property, p.value));
            for n in &p.names {
                out.push_str(&format!("NAME {n}\n"));
            }
        }
        let mut people: Vec<_> = self.person_text.iter().collect();
        people.sort();
        for (n, t) in people {
            out.push_str(&format!("TEXT {n} {t}\n"));
        }
        out
    }

    pub fn pairs(&self) -> &[PropertyPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair_index(&self, property: Property, value: &str) -> Result<usize> {
        self.by_key
            .get(&(property, value.to_string()))
            .copied()
            .ok_or_else(|| Error::UnknownEntity(format!("{property}={value}")))
    }

    pub fn pair(&self, idx: usize) -> &PropertyPair {
        &self.pairs[idx]
    }

    pub fn name_set(&self, property: Property, value: &str) -> Result<BTreeSet<String>> {
        let idx = self.pair_index(property, value)?;
        Ok(self.pairs[idx].names.iter().cloned().collect())
    }

    pub fn person_text(&self, name: &str) -> Option<&str> {
        self.person_text.get(name).map(String::as_str)
    }

    pub fn all_names(&self) -> BTreeSet<&str> {
        self.pairs
            .iter()
            .flat_map(|p| p.names.iter().map(String::as_str))
            .collect()
    }

    pub fn properties(&self) -> BTreeSet<Property> {
        self.pairs.iter().map(|p| p.property).collect()
    }
}
