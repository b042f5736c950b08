//! Title tokenization behind a pluggable interface.
//!
//! Morphological analyzers are ecosystem-specific, so the scoring pipeline
//! never talks to one directly. Two tokenizers are built in (whitespace
//! splitting for Latin text and tests, longest-match dictionary segmentation
//! for CJK-like text), and the `External` kind reads pre-tokenized input
//! produced by any analyzer run out-of-band.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ArticleId, TokenMultiset};

#[derive(Debug, Error)]
pub enum TokenizeError {
    #[error("dictionary tokenizer requires a non-empty dictionary")]
    MissingDictionary,
    #[error("external tokenizer reads pre-tokenized input; it cannot tokenize titles directly")]
    ExternalNotDirect,
    #[error("pre-tokenized input line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Coarse token classes used by the drop filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TokenClass {
    /// Solely punctuation/symbol codepoints.
    Symbol,
    /// Solely digit codepoints.
    Numeral,
    /// Non-dictionary single-character emission.
    Unknown,
    /// Member of the configured stopword list.
    Stopword,
}

impl TokenClass {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "symbol" => Some(TokenClass::Symbol),
            "numeral" => Some(TokenClass::Numeral),
            "unknown" => Some(TokenClass::Unknown),
            "stopword" => Some(TokenClass::Stopword),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenizerKind {
    Whitespace,
    DictionaryLongestMatch,
    External,
}

/// Tokenizer configuration. Drop decisions are a pure function of
/// (token, class), so equal specs produce equal output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerSpec {
    pub kind: TokenizerKind,
    pub dictionary: Option<BTreeSet<String>>,
    pub drop_classes: BTreeSet<TokenClass>,
    pub stopword_list: Option<BTreeSet<String>>,
}

impl TokenizerSpec {
    pub fn whitespace() -> Self {
        Self {
            kind: TokenizerKind::Whitespace,
            dictionary: None,
            drop_classes: BTreeSet::new(),
            stopword_list: None,
        }
    }

    pub fn dictionary<I, T>(words: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        Self {
            kind: TokenizerKind::DictionaryLongestMatch,
            dictionary: Some(words.into_iter().map(Into::into).collect()),
            drop_classes: BTreeSet::new(),
            stopword_list: None,
        }
    }

    pub fn external() -> Self {
        Self {
            kind: TokenizerKind::External,
            dictionary: None,
            drop_classes: BTreeSet::new(),
            stopword_list: None,
        }
    }

    pub fn drop(mut self, class: TokenClass) -> Self {
        self.drop_classes.insert(class);
        self
    }

    pub fn with_drop_classes<I: IntoIterator<Item = TokenClass>>(mut self, classes: I) -> Self {
        self.drop_classes.extend(classes);
        self
    }

    pub fn with_stopwords<I, T>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        self.stopword_list = Some(words.into_iter().map(Into::into).collect());
        self
    }

    fn is_stopword(&self, token: &str) -> bool {
        self.stopword_list
            .as_ref()
            .map(|list| list.contains(token))
            .unwrap_or(false)
    }

    /// Whether a token of the given provenance is dropped. A token is dropped
    /// when any class it belongs to is in `drop_classes`.
    fn drops(&self, token: &str, explicit: Option<TokenClass>, unknown_emission: bool) -> bool {
        if self.drop_classes.is_empty() {
            return false;
        }
        if let Some(class) = explicit {
            if self.drop_classes.contains(&class) {
                return true;
            }
        }
        if unknown_emission && self.drop_classes.contains(&TokenClass::Unknown) {
            return true;
        }
        if self.drop_classes.contains(&TokenClass::Symbol) && is_symbol_token(token) {
            return true;
        }
        if self.drop_classes.contains(&TokenClass::Numeral) && is_numeral_token(token) {
            return true;
        }
        self.drop_classes.contains(&TokenClass::Stopword) && self.is_stopword(token)
    }
}

fn is_symbol_char(c: char) -> bool {
    !c.is_alphanumeric()
}

fn is_symbol_token(token: &str) -> bool {
    !token.is_empty() && token.chars().all(is_symbol_char)
}

fn is_numeral_token(token: &str) -> bool {
    !token.is_empty() && token.chars().all(char::is_numeric)
}

/// A validated, ready-to-run tokenizer.
///
/// `tokenize_title` is a pure function over an immutable spec, callable
/// concurrently.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    spec: TokenizerSpec,
    dict: Option<DictIndex>,
}

#[derive(Debug, Clone)]
struct DictIndex {
    words: HashSet<String>,
    max_chars: usize,
}

impl Tokenizer {
    pub fn new(spec: TokenizerSpec) -> Result<Self, TokenizeError> {
        let dict = match spec.kind {
            TokenizerKind::Whitespace => None,
            TokenizerKind::External => return Err(TokenizeError::ExternalNotDirect),
            TokenizerKind::DictionaryLongestMatch => {
                let words = spec
                    .dictionary
                    .as_ref()
                    .filter(|d| !d.is_empty())
                    .ok_or(TokenizeError::MissingDictionary)?;
                let max_chars = words.iter().map(|w| w.chars().count()).max().unwrap_or(0);
                Some(DictIndex {
                    words: words.iter().cloned().collect(),
                    max_chars,
                })
            }
        };
        Ok(Self { spec, dict })
    }

    pub fn spec(&self) -> &TokenizerSpec {
        &self.spec
    }

    /// Tokenize one NFC-normalized title into a word multiset.
    ///
    /// A title left with nothing after filtering yields the empty multiset;
    /// that is not an error.
    pub fn tokenize_title(&self, title: &str) -> TokenMultiset {
        match self.spec.kind {
            TokenizerKind::Whitespace => self.tokenize_whitespace(title),
            TokenizerKind::DictionaryLongestMatch => self.tokenize_dictionary(title),
            TokenizerKind::External => unreachable!("rejected at construction"),
        }
    }

    /// Split on Unicode whitespace, strip leading/trailing punctuation, and
    /// lowercase-fold. Tokens that are empty after stripping vanish.
    fn tokenize_whitespace(&self, title: &str) -> TokenMultiset {
        let mut bag = TokenMultiset::new();
        for raw in title.split_whitespace() {
            let trimmed = raw.trim_matches(is_symbol_char);
            if trimmed.is_empty() {
                continue;
            }
            let folded = trimmed.to_lowercase();
            if !self.spec.drops(&folded, None, false) {
                *bag.entry(folded).or_insert(0) += 1;
            }
        }
        bag
    }

    /// Left-to-right scan taking the longest dictionary word at each
    /// position; characters not starting any dictionary word are emitted as
    /// single-character Unknown-class tokens. Dictionary matching is exact
    /// (no case folding).
    fn tokenize_dictionary(&self, title: &str) -> TokenMultiset {
        let dict = self.dict.as_ref().expect("validated at construction");
        let chars: Vec<char> = title.chars().collect();
        let mut bag = TokenMultiset::new();
        let mut pos = 0;
        while pos < chars.len() {
            let longest = (1..=dict.max_chars.min(chars.len() - pos))
                .rev()
                .map(|len| chars[pos..pos + len].iter().collect::<String>())
                .find(|candidate| dict.words.contains(candidate));
            match longest {
                Some(word) => {
                    let len = word.chars().count();
                    if !self.spec.drops(&word, None, false) {
                        *bag.entry(word).or_insert(0) += 1;
                    }
                    pos += len;
                }
                None => {
                    let single = chars[pos].to_string();
                    if !self.spec.drops(&single, None, true) {
                        *bag.entry(single).or_insert(0) += 1;
                    }
                    pos += 1;
                }
            }
        }
        bag
    }
}

/// One token of pre-tokenized input, optionally carrying an explicit class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreToken {
    pub text: String,
    pub class: Option<TokenClass>,
}

/// Parse pre-tokenized input for the `External` tokenizer kind.
///
/// Format: one line per article, `article_id TAB token token token/Class`.
/// A trailing `/Class` suffix is recognized only for the four class names
/// (case-insensitive); any other slash is part of the token text. When the
/// same article id appears on several lines, the last line wins.
pub fn parse_pretokenized<R: BufRead>(
    reader: R,
) -> Result<BTreeMap<ArticleId, Vec<PreToken>>, TokenizeError> {
    let mut out = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| TokenizeError::Parse {
            line: idx + 1,
            msg: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, rest) = line.split_once('\t').ok_or_else(|| TokenizeError::Parse {
            line: idx + 1,
            msg: "expected 'article_id TAB tokens'".to_owned(),
        })?;
        if id.is_empty() {
            return Err(TokenizeError::Parse {
                line: idx + 1,
                msg: "empty article id".to_owned(),
            });
        }
        let tokens = rest
            .split_whitespace()
            .map(|raw| match raw.rsplit_once('/') {
                Some((text, suffix)) if !text.is_empty() => match TokenClass::parse(suffix) {
                    Some(class) => PreToken {
                        text: text.to_owned(),
                        class: Some(class),
                    },
                    None => PreToken {
                        text: raw.to_owned(),
                        class: None,
                    },
                },
                _ => PreToken {
                    text: raw.to_owned(),
                    class: None,
                },
            })
            .collect();
        out.insert(ArticleId::new(id), tokens);
    }
    Ok(out)
}

/// Apply a spec's drop filter to pre-tokenized tokens.
pub fn filter_pretokenized(tokens: &[PreToken], spec: &TokenizerSpec) -> TokenMultiset {
    let mut bag = TokenMultiset::new();
    for token in tokens {
        if !spec.drops(&token.text, token.class, false) {
            *bag.entry(token.text.clone()).or_insert(0) += 1;
        }
    }
    bag
}

/// Read a stopword file: one word per line, UTF-8, blank lines ignored.
pub fn read_stopwords<R: BufRead>(reader: R) -> std::io::Result<BTreeSet<String>> {
    let mut words = BTreeSet::new();
    for line in reader.lines() {
        let line = line?;
        let word = line.trim();
        if !word.is_empty() {
            words.insert(word.to_owned());
        }
    }
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bag(entries: &[(&str, u64)]) -> TokenMultiset {
        entries.iter().map(|(w, n)| ((*w).to_owned(), *n)).collect()
    }

    #[test]
    fn whitespace_split_counts_multiplicities() {
        let t = Tokenizer::new(TokenizerSpec::whitespace()).unwrap();
        assert_eq!(
            t.tokenize_title("alpha beta alpha"),
            bag(&[("alpha", 2), ("beta", 1)])
        );
    }

    #[test]
    fn whitespace_strips_edge_punctuation() {
        let t = Tokenizer::new(TokenizerSpec::whitespace().drop(TokenClass::Symbol)).unwrap();
        assert_eq!(
            t.tokenize_title("alpha, beta!"),
            bag(&[("alpha", 1), ("beta", 1)])
        );
    }

    #[test]
    fn whitespace_lowercase_folds() {
        let t = Tokenizer::new(TokenizerSpec::whitespace()).unwrap();
        assert_eq!(t.tokenize_title("Alpha ALPHA"), bag(&[("alpha", 2)]));
    }

    #[test]
    fn whitespace_drops_numerals_when_configured() {
        let t = Tokenizer::new(TokenizerSpec::whitespace().drop(TokenClass::Numeral)).unwrap();
        assert_eq!(t.tokenize_title("2017 report"), bag(&[("report", 1)]));
    }

    #[test]
    fn whitespace_drops_stopwords_after_folding() {
        let spec = TokenizerSpec::whitespace()
            .with_stopwords(["the"])
            .drop(TokenClass::Stopword);
        let t = Tokenizer::new(spec).unwrap();
        assert_eq!(t.tokenize_title("The report"), bag(&[("report", 1)]));
    }

    #[test]
    fn dictionary_takes_longest_match() {
        let spec = TokenizerSpec::dictionary(["ab", "abc", "cd"]);
        let t = Tokenizer::new(spec).unwrap();
        assert_eq!(t.tokenize_title("abcd"), bag(&[("abc", 1), ("d", 1)]));

        let spec = TokenizerSpec::dictionary(["ab", "abc", "cd"]).drop(TokenClass::Unknown);
        let t = Tokenizer::new(spec).unwrap();
        assert_eq!(t.tokenize_title("abcd"), bag(&[("abc", 1)]));
    }

    #[test]
    fn dictionary_matching_is_exact_case() {
        let t = Tokenizer::new(TokenizerSpec::dictionary(["Ab"])).unwrap();
        assert_eq!(t.tokenize_title("ab"), bag(&[("a", 1), ("b", 1)]));
    }

    #[test]
    fn dictionary_requires_words() {
        let spec = TokenizerSpec {
            kind: TokenizerKind::DictionaryLongestMatch,
            dictionary: None,
            drop_classes: BTreeSet::new(),
            stopword_list: None,
        };
        assert!(matches!(
            Tokenizer::new(spec),
            Err(TokenizeError::MissingDictionary)
        ));
        assert!(matches!(
            Tokenizer::new(TokenizerSpec::dictionary(Vec::<String>::new())),
            Err(TokenizeError::MissingDictionary)
        ));
    }

    #[test]
    fn external_kind_has_no_direct_tokenizer() {
        assert!(matches!(
            Tokenizer::new(TokenizerSpec::external()),
            Err(TokenizeError::ExternalNotDirect)
        ));
    }

    #[test]
    fn empty_after_filtering_is_empty_multiset() {
        let t = Tokenizer::new(TokenizerSpec::whitespace()).unwrap();
        assert!(t.tokenize_title("!! ... --").is_empty());
    }

    #[test]
    fn pretokenized_parses_ids_tokens_and_classes() {
        let input = "a1\tword1 word2/Symbol n/a\na2\t\u{65b0}\u{66f2} MV\n";
        let parsed = parse_pretokenized(input.as_bytes()).unwrap();
        assert_eq!(
            parsed[&ArticleId::new("a1")],
            vec![
                PreToken { text: "word1".into(), class: None },
                PreToken { text: "word2".into(), class: Some(TokenClass::Symbol) },
                // "/a" is not a class name, so the slash stays literal.
                PreToken { text: "n/a".into(), class: None },
            ]
        );
        assert_eq!(parsed[&ArticleId::new("a2")].len(), 2);
    }

    #[test]
    fn pretokenized_rejects_missing_tab() {
        let err = parse_pretokenized("no-tab-here".as_bytes()).unwrap_err();
        assert!(matches!(err, TokenizeError::Parse { line: 1, .. }));
    }

    #[test]
    fn pretokenized_filter_honors_explicit_class() {
        let tokens = vec![
            PreToken { text: "keep".into(), class: None },
            PreToken { text: "noise".into(), class: Some(TokenClass::Symbol) },
        ];
        let spec = TokenizerSpec::external().drop(TokenClass::Symbol);
        assert_eq!(filter_pretokenized(&tokens, &spec), bag(&[("keep", 1)]));
    }

    #[test]
    fn stopword_file_reads_one_word_per_line() {
        let words = read_stopwords("the\n\n of \n".as_bytes()).unwrap();
        assert_eq!(words.len(), 2);
        assert!(words.contains("the") && words.contains("of"));
    }
}
