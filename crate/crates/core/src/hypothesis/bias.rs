use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modifier {
    Symmetric,
    AntiReflexive,
}

/// `#modeb(recall, p(var(t),var(t)), (modifiers)).` for a binary predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeDecl {
    pub recall: u32,
    pub predicate: String,
    pub modifiers: BTreeSet<Modifier>,
}

impl ModeDecl {
    pub fn new(recall: u32, predicate: &str) -> Self {
        ModeDecl {
            recall,
            predicate: predicate.to_string(),
            modifiers: BTreeSet::new(),
        }
    }

    pub fn symmetric(mut self) -> Self {
        self.modifiers.insert(Modifier::Symmetric);
        self
    }

    pub fn anti_reflexive(mut self) -> Self {
        self.modifiers.insert(Modifier::AntiReflexive);
        self
    }

    pub fn has(&self, m: Modifier) -> bool {
        self.modifiers.contains(&m)
    }

    /// Parses `#modeb(R,p(var(t),var(t)))` with an optional
    /// `(symmetric,anti_reflexive)` modifier tuple.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("malformed mode declaration `{text}`"));
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix("#modeb(")
            .and_then(|s| s.strip_suffix(")."))
            .or_else(|| compact.strip_prefix("#modeb(").and_then(|s| s.strip_suffix(')')))
            .ok_or_else(bad)?;
        let (recall, rest) = inner.split_once(',').ok_or_else(bad)?;
        let recall: u32 = recall.parse().map_err(|_| bad())?;
        let open = rest.find('(').ok_or_else(bad)?;
        let predicate = &rest[..open];
        let args_end = rest.find("))").ok_or_else(bad)? + 2;
        if &rest[open..args_end] != "(var(t),var(t))" {
            return Err(bad());
        }
        let mut decl = ModeDecl::new(recall, predicate);
        let mods = rest[args_end..].trim_start_matches(',');
        for m in mods.trim_matches(|c| c == '(' || c == ')').split(',').filter(|m| !m.is_empty()) {
            decl.modifiers.insert(match m {
                "symmetric" => Modifier::Symmetric,
                "anti_reflexive" => Modifier::AntiReflexive,
                _ => return Err(bad()),
            });
        }
        if recall == 0 {
            return Err(bad());
        }
        Ok(decl)
    }
}

impl fmt::Display for ModeDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#modeb({},{}(var(t),var(t))", self.recall, self.predicate)?;
        if !self.modifiers.is_empty() {
            let names: Vec<&str> = self
                .modifiers
                .iter()
                .map(|m| match m {
                    Modifier::Symmetric => "symmetric",
                    Modifier::AntiReflexive => "anti_reflexive",
                })
                .collect();
            write!(f, ",({})", names.join(","))?;
        }
        f.write_str(").")
    }
}

/// Mode declarations plus the limits and predicate facts the learner needs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageBias {
    pub modes: Vec<ModeDecl>,
    /// Predicates fixed by the instance; they cost 1 under the custom scheme.
    pub domain: BTreeSet<String>,
    pub max_vars: u8,
    pub max_body: usize,
}

impl LanguageBias {
    pub fn new(modes: Vec<ModeDecl>, domain: impl IntoIterator<Item = &'static str>) -> Self {
        LanguageBias {
            modes,
            domain: domain.into_iter().map(String::from).collect(),
            max_vars: 3,
            max_body: 3,
        }
    }

    /// The generic scheme over `r`, `close`, `pGEQ` and `q`.
    pub fn abstract_scheme() -> &'static LanguageBias {
        static BIAS: OnceLock<LanguageBias> = OnceLock::new();
        BIAS.get_or_init(|| {
            LanguageBias::new(
                vec![
                    ModeDecl::new(1, "r"),
                    ModeDecl::new(1, "close").symmetric().anti_reflexive(),
                    ModeDecl::new(2, "pGEQ"),
                    ModeDecl::new(1, "q"),
                ],
                ["r", "close"],
            )
        })
    }

    /// The scheme instantiated on the PUP vocabulary: `r` is `zone2sensor`,
    /// `close` is `closesensors`/`closezones`, `pGEQ` is
    /// `unit2zoneGEQ`/`unit2sensorGEQ` and `q` is `partnerunits`.
    pub fn pup() -> &'static LanguageBias {
        static BIAS: OnceLock<LanguageBias> = OnceLock::new();
        BIAS.get_or_init(|| {
            LanguageBias::new(
                vec![
                    ModeDecl::new(1, "zone2sensor"),
                    ModeDecl::new(1, "closesensors").symmetric().anti_reflexive(),
                    ModeDecl::new(1, "closezones").symmetric().anti_reflexive(),
                    ModeDecl::new(2, "unit2zoneGEQ"),
                    ModeDecl::new(2, "unit2sensorGEQ"),
                    ModeDecl::new(1, "partnerunits"),
                ],
                ["zone2sensor", "closesensors", "closezones"],
            )
        })
    }

    pub fn mode(&self, pred: &str) -> Option<&ModeDecl> {
        self.modes.iter().find(|m| m.predicate == pred)
    }

    pub fn is_symmetric(&self, pred: &str) -> bool {
        self.mode(pred).is_some_and(|m| m.has(Modifier::Symmetric))
    }

    pub fn is_anti_reflexive(&self, pred: &str) -> bool {
        self.mode(pred).is_some_and(|m| m.has(Modifier::AntiReflexive))
    }

    pub fn is_domain(&self, pred: &str) -> bool {
        self.domain.contains(pred)
    }
}
