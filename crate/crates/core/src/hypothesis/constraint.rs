use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

use super::bias::LanguageBias;

/// Rule cost scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// One per literal.
    Default,
    /// 1 for domain predicates, 2 when both arguments are the same variable,
    /// 3 otherwise.
    #[default]
    Custom,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Scheme::Default),
            "custom" => Ok(Scheme::Custom),
            other => Err(Error::Config(format!("unknown scoring scheme `{other}`"))),
        }
    }
}

/// A body literal `[not] p(Vi,Vj)`.
///
/// `symmetric` and `domain` carry what the language bias says about the
/// predicate, so a constraint can be canonicalized and scored on its own.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub pred: Arc<str>,
    pub positive: bool,
    pub args: [u8; 2],
    pub symmetric: bool,
    pub domain: bool,
}

impl Literal {
    /// Applies a variable renaming (`map[v - 1]` is the image of `Vv`) and
    /// re-normalizes symmetric arguments.
    pub(crate) fn renamed(&self, map: &[u8]) -> Literal {
        let mut l = self.clone();
        l.args = [map[self.args[0] as usize - 1], map[self.args[1] as usize - 1]];
        l.normalize();
        l
    }

    pub(crate) fn normalize(&mut self) {
        if self.symmetric && self.args[0] > self.args[1] {
            self.args.swap(0, 1);
        }
    }

    fn sort_key(&self) -> (&str, bool, [u8; 2]) {
        (&self.pred, !self.positive, self.args)
    }

    pub fn cost(&self, scheme: Scheme) -> u32 {
        match scheme {
            Scheme::Default => 1,
            Scheme::Custom if self.domain => 1,
            Scheme::Custom if self.args[0] == self.args[1] => 2,
            Scheme::Custom => 3,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("not ")?;
        }
        write!(f, "{}(V{},V{})", self.pred, self.args[0], self.args[1])
    }
}

/// A headless first-order rule over variables `V1..Vk`, kept in canonical
/// form: the lexicographically least literal list over all renamings of its
/// variables onto `V1..Vk`, literals ordered by (predicate, sign, args).
/// Two constraints are isomorphic iff they compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    body: Vec<Literal>,
}

fn permutations(k: usize) -> Vec<Vec<u8>> {
    fn go(prefix: &mut Vec<u8>, used: &mut [bool], out: &mut Vec<Vec<u8>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i as u8 + 1);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

fn body_key(body: &[Literal]) -> Vec<(&str, bool, [u8; 2])> {
    body.iter().map(Literal::sort_key).collect()
}

impl Constraint {
    /// Canonicalizes an arbitrary body. Variables may use any numbering;
    /// duplicate literals collapse.
    pub fn from_body(body: Vec<Literal>) -> Result<Self> {
        if body.is_empty() {
            return Err(Error::Domain("constraint body is empty".into()));
        }
        let mut vars: Vec<u8> = body.iter().flat_map(|l| l.args).collect();
        vars.sort_unstable();
        vars.dedup();
        if vars[0] == 0 {
            return Err(Error::Domain("variables are numbered from V1".into()));
        }
        let max_var = *vars.last().unwrap() as usize;

        let mut best: Option<Vec<Literal>> = None;
        for perm in permutations(vars.len()) {
            let mut map = vec![0u8; max_var];
            for (i, &v) in vars.iter().enumerate() {
                map[v as usize - 1] = perm[i];
            }
            let mut renamed: Vec<Literal> = body.iter().map(|l| l.renamed(&map)).collect();
            renamed.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
            renamed.dedup();
            if best.as_ref().is_none_or(|cur| body_key(&renamed) < body_key(cur)) {
                best = Some(renamed);
            }
        }
        Ok(Constraint {
            body: best.expect("at least one permutation"),
        })
    }

    pub fn body(&self) -> &[Literal] {
        &self.body
    }

    pub fn len(&self) -> usize {
        self.body.len()
    }

    pub fn is_empty(&self) -> bool {
        self.body.is_empty()
    }

    pub fn num_vars(&self) -> u8 {
        self.body.iter().flat_map(|l| l.args).max().unwrap_or(0)
    }

    /// At least one positive literal, and every variable occurs positively.
    pub fn is_safe(&self) -> bool {
        let mut positive_vars = [false; 256];
        for l in self.body.iter().filter(|l| l.positive) {
            for a in l.args {
                positive_vars[a as usize] = true;
            }
        }
        self.body.iter().any(|l| l.positive)
            && self.body.iter().flat_map(|l| l.args).all(|a| positive_vars[a as usize])
    }

    pub fn score(&self, scheme: Scheme) -> u32 {
        self.body.iter().map(|l| l.cost(scheme)).sum()
    }

    pub fn cost_default(&self) -> u32 {
        self.score(Scheme::Default)
    }

    pub fn cost_custom(&self) -> u32 {
        self.score(Scheme::Custom)
    }

    /// Parses `:- [not] p(Vi,Vj), ... .` using `bias` for predicate
    /// properties. Predicates the bias does not declare are neither
    /// symmetric nor domain predicates.
    pub fn parse_with(text: &str, bias: &LanguageBias) -> Result<Self> {
        let s = text.trim();
        let s = s
            .strip_prefix(":-")
            .ok_or_else(|| Error::Domain(format!("constraint must start with `:-`: `{text}`")))?;
        let s = s.trim().strip_suffix('.').unwrap_or(s.trim());
        let mut body = Vec::new();
        // split on commas that are not inside parentheses
        let mut depth = 0;
        let mut start = 0;
        let mut parts = Vec::new();
        for (i, ch) in s.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    parts.push(&s[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        parts.push(&s[start..]);
        for part in parts {
            let part = part.trim();
            let (positive, atom) = match part.strip_prefix("not ") {
                Some(rest) => (false, rest.trim()),
                None => (true, part),
            };
            let bad = || Error::Domain(format!("malformed literal `{part}`"));
            let open = atom.find('(').ok_or_else(bad)?;
            let pred = atom[..open].trim();
            let inner = atom[open + 1..].strip_suffix(')').ok_or_else(bad)?;
            let args: Vec<u8> = inner
                .split(',')
                .map(|a| a.trim().strip_prefix('V').and_then(|n| n.parse().ok()))
                .collect::<Option<_>>()
                .ok_or_else(bad)?;
            let [a, b] = args[..] else { return Err(bad()) };
            let mut lit = Literal {
                pred: Arc::from(pred),
                positive,
                args: [a, b],
                symmetric: bias.is_symmetric(pred),
                domain: bias.is_domain(pred),
            };
            lit.normalize();
            body.push(lit);
        }
        Constraint::from_body(body)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(":- ")?;
        for (i, l) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(".")
    }
}

/// Parses against the PUP vocabulary bias.
impl FromStr for Constraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Constraint::parse_with(s, LanguageBias::pup())
    }
}

impl Serialize for Constraint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Constraint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Default or custom score of a rule.
pub fn score(r: &Constraint, scheme: Scheme) -> u32 {
    r.score(scheme)
}
