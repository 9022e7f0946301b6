//! Whole-word substitution of frequent mnemonics by single characters.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::CodecError;

/// Word separators. The viewer splits on the same set.
pub fn is_word_separator(c: char) -> bool {
    c.is_ascii_whitespace()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DictionaryJson", into = "DictionaryJson")]
pub struct TokenDictionary {
    entries: BTreeMap<char, String>,
    escape: char,
    reverse: HashMap<String, char>,
}

#[derive(Serialize, Deserialize)]
struct DictionaryJson {
    tokens: BTreeMap<char, String>,
    escape: char,
}

impl TryFrom<DictionaryJson> for TokenDictionary {
    type Error = CodecError;

    fn try_from(j: DictionaryJson) -> Result<Self, Self::Error> {
        TokenDictionary::new(j.tokens, j.escape)
    }
}

impl From<TokenDictionary> for DictionaryJson {
    fn from(d: TokenDictionary) -> Self {
        DictionaryJson {
            tokens: d.entries,
            escape: d.escape,
        }
    }
}

pub const DEFAULT_ESCAPE: char = '~';

/// The five mappings the reference viewer is known to use, in order.
pub const CLASSIC_TOKENS: [(char, &str); 5] =
    [('a', "TC"), ('b', "TS"), ('c', "CAF"), ('d', "CS"), ('e', "CA")];

/// Shipped mnemonic ranking. The first five are fixed by [`CLASSIC_TOKENS`];
/// the rest are the most common Luminary mnemonics, most frequent first.
pub const DEFAULT_MNEMONICS: [&str; 40] = [
    "TC", "TS", "CAF", "CS", "CA", "TCF", "AD", "MASK", "INDEX", "EXTEND", "INHINT", "RELINT",
    "DCA", "DXCH", "CADR", "OCT", "BANKCALL", "CCS", "XCH", "LXCH", "DCS", "DTCB", "BZF", "BZMF",
    "ADS", "DAS", "DEC", "2DEC", "VLOAD", "DLOAD", "STORE", "STCALL", "STODL", "CALL", "RTB",
    "EXIT", "GOTO", "SETLOC", "BANK", "EBANK=",
];

/// Token characters in assignment order: `a`–`z`, then `A`–`N`.
pub fn token_alphabet() -> impl Iterator<Item = char> {
    ('a'..='z').chain('A'..='N')
}

impl TokenDictionary {
    pub fn new(entries: BTreeMap<char, String>, escape: char) -> Result<Self, CodecError> {
        let invalid = |msg: String| Err(CodecError::InvalidDictionary(msg));
        if escape.is_whitespace() {
            return invalid("escape character is whitespace".into());
        }
        let mut reverse = HashMap::with_capacity(entries.len());
        for (&tok, mnemonic) in &entries {
            if tok == escape {
                return invalid(format!("token {tok:?} equals the escape character"));
            }
            if tok.is_whitespace() || tok.is_control() {
                return invalid(format!("token {tok:?} is whitespace or control"));
            }
            if mnemonic.is_empty() || mnemonic.chars().any(is_word_separator) {
                return invalid(format!("mnemonic {mnemonic:?} for {tok:?} is not a single word"));
            }
            if let Some(prev) = reverse.insert(mnemonic.clone(), tok) {
                return invalid(format!("mnemonic {mnemonic:?} mapped by both {prev:?} and {tok:?}"));
            }
        }
        Ok(TokenDictionary {
            entries,
            escape,
            reverse,
        })
    }

    /// Assigns token characters to `mnemonics` in order.
    pub fn from_ranked<S: AsRef<str>>(mnemonics: &[S]) -> Result<Self, CodecError> {
        let alphabet: Vec<char> = token_alphabet().collect();
        if mnemonics.len() > alphabet.len() {
            return Err(CodecError::InvalidDictionary(format!(
                "{} mnemonics but only {} token characters",
                mnemonics.len(),
                alphabet.len()
            )));
        }
        let entries = alphabet
            .into_iter()
            .zip(mnemonics.iter().map(|m| m.as_ref().to_string()))
            .collect();
        TokenDictionary::new(entries, DEFAULT_ESCAPE)
    }

    /// The five published entries only.
    pub fn classic() -> Self {
        let entries = CLASSIC_TOKENS.iter().map(|&(c, m)| (c, m.to_string())).collect();
        TokenDictionary::new(entries, DEFAULT_ESCAPE).expect("valid")
    }

    /// Ranks the words of `corpus` that are AGC mnemonics by frequency
    /// (ties by name) and fills the remaining slots after the published
    /// five.
    pub fn ranked_from_corpus(corpus: &str) -> Result<Self, CodecError> {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for word in corpus.split(is_word_separator).filter(|w| !w.is_empty()) {
            if crate::corpus::is_mnemonic(word) {
                *counts.entry(word).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts
            .into_iter()
            .filter(|(w, _)| !CLASSIC_TOKENS.iter().any(|(_, m)| m == w))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let capacity = token_alphabet().count();
        let names: Vec<&str> = CLASSIC_TOKENS
            .iter()
            .map(|(_, m)| *m)
            .chain(ranked.into_iter().map(|(w, _)| w))
            .take(capacity)
            .collect();
        TokenDictionary::from_ranked(&names)
    }

    pub fn escape(&self) -> char {
        self.escape
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (char, &str)> {
        self.entries.iter().map(|(&c, m)| (c, m.as_str()))
    }

    pub fn mnemonic(&self, token: char) -> Option<&str> {
        self.entries.get(&token).map(String::as_str)
    }

    pub fn token(&self, mnemonic: &str) -> Option<char> {
        self.reverse.get(mnemonic).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("dictionary serializes")
    }

    fn needs_escape(&self, word: &str) -> bool {
        let mut chars = word.chars();
        let first = chars.next().expect("words are non-empty");
        first == self.escape || (chars.next().is_none() && self.entries.contains_key(&first))
    }
}

impl Default for TokenDictionary {
    fn default() -> Self {
        TokenDictionary::from_ranked(&DEFAULT_MNEMONICS).expect("valid")
    }
}

/// Splits `text` into alternating separator runs and words, calling `f` with
/// `(is_word, slice)` for each run in order.
fn for_each_run<'a, E>(
    text: &'a str,
    mut f: impl FnMut(bool, &'a str) -> Result<(), E>,
) -> Result<(), E> {
    let mut rest = text;
    while !rest.is_empty() {
        let starts_word = !rest.starts_with(is_word_separator);
        let end = if starts_word {
            rest.find(is_word_separator)
        } else {
            rest.find(|c| !is_word_separator(c))
        }
        .unwrap_or(rest.len());
        let (run, tail) = rest.split_at(end);
        f(starts_word, run)?;
        rest = tail;
    }
    Ok(())
}

/// Replaces every word equal to a mnemonic by its token character. Words
/// that could be mistaken for a token or start with the escape character
/// are prefixed with the escape character. Separators are untouched.
pub fn tokenize(text: &str, dict: &TokenDictionary) -> String {
    let mut out = String::with_capacity(text.len());
    for_each_run::<std::convert::Infallible>(text, |is_word, run| {
        if !is_word {
            out.push_str(run);
        } else if let Some(tok) = dict.token(run) {
            out.push(tok);
        } else {
            if dict.needs_escape(run) {
                out.push(dict.escape);
            }
            out.push_str(run);
        }
        Ok(())
    })
    .expect("infallible");
    out
}

/// Inverse of [`tokenize`].
pub fn detokenize(text: &str, dict: &TokenDictionary) -> Result<String, CodecError> {
    let mut out = String::with_capacity(text.len() * 2);
    let mut offset = 0usize;
    for_each_run(text, |is_word, run| {
        let at = offset;
        offset += run.len();
        if !is_word {
            out.push_str(run);
            return Ok(());
        }
        if let Some(literal) = run.strip_prefix(dict.escape) {
            if literal.is_empty() {
                return Err(CodecError::MalformedTokenStream { offset: at });
            }
            out.push_str(literal);
            return Ok(());
        }
        let mut chars = run.chars();
        let first = chars.next().expect("non-empty");
        match (chars.next(), dict.mnemonic(first)) {
            (None, Some(m)) => out.push_str(m),
            _ => out.push_str(run),
        }
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_examples() {
        let d = TokenDictionary::classic();
        assert_eq!(tokenize("TC BANKCALL", &d), "a BANKCALL");
        assert_eq!(tokenize("", &d), "");
        assert_eq!(tokenize("CAF P63ADRES TS WHICH", &d), "c P63ADRES b WHICH");
        assert_eq!(detokenize("a BANKCALL", &d).unwrap(), "TC BANKCALL");
        assert_eq!(detokenize("", &d).unwrap(), "");
    }

    #[test]
    fn colliding_words_are_escaped() {
        let d = TokenDictionary::classic();
        let s = "a ~ ~x b\tzz\n";
        let t = tokenize(s, &d);
        assert_eq!(t, "~a ~~ ~~x ~b\tzz\n");
        assert_eq!(detokenize(&t, &d).unwrap(), s);
    }

    #[test]
    fn dangling_escape() {
        let d = TokenDictionary::classic();
        assert!(matches!(
            detokenize("a ~", &d),
            Err(CodecError::MalformedTokenStream { offset: 2 })
        ));
        assert!(detokenize("~ a", &d).is_err());
    }

    #[test]
    fn default_dictionary_shape() {
        let d = TokenDictionary::default();
        assert_eq!(d.len(), 40);
        for (c, m) in CLASSIC_TOKENS {
            assert_eq!(d.mnemonic(c), Some(m));
        }
        assert_eq!(d.mnemonic('N'), Some("EBANK="));
        assert_eq!(d.escape(), '~');
    }

    #[test]
    fn dictionary_json() {
        let d = TokenDictionary::classic();
        assert_eq!(
            d.to_json(),
            r#"{"tokens":{"a":"TC","b":"TS","c":"CAF","d":"CS","e":"CA"},"escape":"~"}"#
        );
        let back: TokenDictionary = serde_json::from_str(&d.to_json()).unwrap();
        assert_eq!(back, d);
        let dup = r#"{"tokens":{"a":"TC","b":"TC"},"escape":"~"}"#;
        assert!(serde_json::from_str::<TokenDictionary>(dup).is_err());
        let esc = r#"{"tokens":{"~":"TC"},"escape":"~"}"#;
        assert!(serde_json::from_str::<TokenDictionary>(esc).is_err());
        let ws = r#"{"tokens":{" ":"TC"},"escape":"~"}"#;
        assert!(serde_json::from_str::<TokenDictionary>(ws).is_err());
    }

    #[test]
    fn ranking_from_corpus() {
        let d = TokenDictionary::ranked_from_corpus("XCH XCH XCH AD AD BZF TC NOTAWORD").unwrap();
        assert_eq!(d.mnemonic('a'), Some("TC"));
        assert_eq!(d.mnemonic('f'), Some("XCH"));
        assert_eq!(d.mnemonic('g'), Some("AD"));
        assert_eq!(d.mnemonic('h'), Some("BZF"));
        assert_eq!(d.len(), 8);
    }
}
