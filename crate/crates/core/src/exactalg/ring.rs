use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Ordered list of variable names shared by every polynomial of an ambient
/// ring. Cloning is cheap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ring(Arc<[String]>);

fn valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

impl Ring {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Ring> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().trim().to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            if !valid_ident(n) {
                return Err(Error::structural(format!("invalid variable name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::structural(format!("duplicate variable `{n}`")));
            }
        }
        Ok(Ring(names.into()))
    }

    /// Convenience constructor for tests and literals; panics on bad names.
    pub fn of(names: &[&str]) -> Ring {
        Ring::new(names).expect("valid variable names")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    /// A name not already present, built from `base` with a numeric suffix
    /// when needed.
    pub fn fresh_name(&self, base: &str) -> String {
        if self.index_of(base).is_none() {
            return base.to_string();
        }
        (1..)
            .map(|k| format!("{base}{k}"))
            .find(|n| self.index_of(n).is_none())
            .unwrap()
    }

    pub fn ensure_same(&self, other: &Ring) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::structural(format!(
                "ambient mismatch: {self} vs {other}"
            )))
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.join(","))
    }
}

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
