use std::path::Path;

use serde::{Deserialize, Serialize};

use super::VerificationCase;
use crate::error::{Error, Result};

const DEFAULT_SUITE: &str = include_str!("../../suites/default.json");

/// A named, ordered list of cases. Case ids are unique.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    pub name: String,
    pub cases: Vec<VerificationCase>,
}

impl Suite {
    /// The built-in suite covering every identity.
    pub fn default_suite() -> Suite {
        Suite::from_json(DEFAULT_SUITE).expect("built-in suite is valid")
    }

    pub fn from_json(text: &str) -> Result<Suite> {
        let suite: Suite = serde_json::from_str(text)?;
        suite.validate()?;
        Ok(suite)
    }

    pub fn load(path: &Path) -> Result<Suite> {
        Suite::from_json(&std::fs::read_to_string(path)?)
    }

    /// `default` or a path to a suite file.
    pub fn resolve(name_or_path: &str) -> Result<Suite> {
        if name_or_path == "default" {
            Ok(Suite::default_suite())
        } else {
            Suite::load(Path::new(name_or_path))
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::InvalidConfig(format!("suite name `{}` must be a non-empty file name", self.name)));
        }
        let mut ids = std::collections::BTreeSet::new();
        for c in &self.cases {
            c.validate()?;
            if !ids.insert(c.id.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate case id `{}`", c.id)));
            }
        }
        Ok(())
    }

    pub fn case(&self, id: &str) -> Option<&VerificationCase> {
        self.cases.iter().find(|c| c.id == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Theorem;

    #[test]
    fn default_suite_covers_every_theorem() {
        let s = Suite::default_suite();
        for t in Theorem::ALL {
            assert!(s.cases.iter().any(|c| c.theorem == t), "no case for {t}");
        }
    }

    #[test]
    fn suite_roundtrips_through_json() {
        let s = Suite::default_suite();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(Suite::from_json(&text).unwrap(), s);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let mut s = Suite::default_suite();
        let c = s.cases[0].clone();
        s.cases.push(c);
        assert!(s.validate().is_err());
    }
}
