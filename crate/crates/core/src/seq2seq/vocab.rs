use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SOS: &str = "<SOS>";
pub const EOS: &str = "<EOS>";
pub const UNK: &str = "<UNK>";

/// Dense token index: `<SOS>`=0, `<EOS>`=1, `<UNK>`=2, then sorted corpus tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocab {
    fn from(tokens: Vec<String>) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { tokens, index }
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Self {
        v.tokens
    }
}

impl Vocab {
    pub const SOS_ID: usize = 0;
    pub const EOS_ID: usize = 1;
    pub const UNK_ID: usize = 2;

    pub fn build<'a, I>(targets: I) -> Self
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let specials = [SOS, EOS, UNK];
        let words: BTreeSet<&str> = targets
            .into_iter()
            .flatten()
            .map(String::as_str)
            .filter(|t| !specials.contains(t))
            .collect();
        let tokens: Vec<String> = specials
            .iter()
            .copied()
            .chain(words)
            .map(str::to_string)
            .collect();
        Self::from(tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &str) -> usize {
        self.id(token).unwrap_or(Self::UNK_ID)
    }

    pub fn require(&self, token: &str) -> Result<usize> {
        self.id(token).ok_or_else(|| Error::UnknownToken(token.to_string()))
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id_or_unk(t)).collect()
    }

    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter().map(|&i| self.tokens[i].clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specials_first_then_sorted() {
        let a = vec!["hi".to_string(), "<EOS>".to_string()];
        let b = vec!["abc".to_string(), "hi".to_string()];
        let v = Vocab::build([a.as_slice(), b.as_slice()]);
        assert_eq!(v.tokens(), &["<SOS>", "<EOS>", "<UNK>", "abc", "hi"]);
        assert_eq!(v.id_or_unk("zzz"), Vocab::UNK_ID);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<Vocab>(&json).unwrap(), v);
    }
}
