//! Parallel corpus ingestion, whitespace tokenization and the vocabulary.
//!
//! Corpus files are UTF-8, either JSONL with `"src"`/`"tgt"` keys (plus an
//! optional `"doc_id"`) or TSV with `source<TAB>target` columns. Blank lines
//! are skipped; every other line yields one [`SentencePair`] whose id is its
//! position among the non-blank lines.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single whitespace-free, non-empty surface token.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    pub fn new(surface: impl Into<String>) -> Result<Self> {
        let surface = surface.into();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(Error::InvalidToken(surface));
        }
        Ok(Token(surface))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Token {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Token::new(value)
    }
}

impl From<Token> for String {
    fn from(token: Token) -> String {
        token.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Splits `text` on runs of Unicode whitespace.
pub fn tokenize(text: &str) -> Vec<Token> {
    Tokenizer::default().tokenize(text)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tokenizer {
    pub lowercase: bool,
}

impl Tokenizer {
    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        text.split_whitespace()
            .map(|piece| {
                let surface = if self.lowercase {
                    piece.to_lowercase()
                } else {
                    piece.to_owned()
                };
                Token(surface)
            })
            .collect()
    }
}

/// Joins tokens with single spaces.
pub fn detokenize<'a, I>(tokens: I) -> String
where
    I: IntoIterator<Item = &'a Token>,
{
    let mut out = String::new();
    for (i, token) in tokens.into_iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(token.as_str());
    }
    out
}

/// Identifier of a sentence pair; equal to its insertion position in the corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PairId(pub u32);

impl PairId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub id: PairId,
    pub source: Vec<Token>,
    pub target: Vec<Token>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Tsv,
}

impl CorpusFormat {
    /// Picks the format from a file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") | Some("txt") => CorpusFormat::Tsv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

/// One parsed corpus line before it is assigned a pair id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusRecord {
    /// 1-based line number in the input.
    pub line: usize,
    pub source: Vec<Token>,
    pub target: Vec<Token>,
    pub doc_id: Option<String>,
}

#[derive(Deserialize)]
struct JsonRecord {
    src: Option<String>,
    tgt: Option<String>,
    #[serde(default)]
    doc_id: Option<serde_json::Value>,
}

/// Parses corpus text into records, validating every line.
pub fn parse_records(
    content: &str,
    format: CorpusFormat,
    tokenizer: Tokenizer,
) -> Result<Vec<CorpusRecord>> {
    let mut records = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (src, tgt, doc_id) = match format {
            CorpusFormat::Tsv => {
                let columns: Vec<&str> = raw.split('\t').collect();
                if columns.len() != 2 {
                    return Err(Error::Parse {
                        line,
                        message: format!(
                            "expected 2 tab-separated columns, found {}",
                            columns.len()
                        ),
                    });
                }
                (columns[0].to_owned(), columns[1].to_owned(), None)
            }
            CorpusFormat::Jsonl => {
                let rec: JsonRecord = serde_json::from_str(raw).map_err(|e| Error::Parse {
                    line,
                    message: format!("invalid JSON: {e}"),
                })?;
                let missing = |field: &str| Error::Parse {
                    line,
                    message: format!("missing \"{field}\" field"),
                };
                let src = rec.src.ok_or_else(|| missing("src"))?;
                let tgt = rec.tgt.ok_or_else(|| missing("tgt"))?;
                let doc_id = rec.doc_id.map(|v| match v {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                });
                (src, tgt, doc_id)
            }
        };
        let source = tokenizer.tokenize(&src);
        let target = tokenizer.tokenize(&tgt);
        if source.is_empty() || target.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty source or target after tokenization".into(),
            });
        }
        records.push(CorpusRecord {
            line,
            source,
            target,
            doc_id,
        });
    }
    Ok(records)
}

/// Ordered collection of sentence pairs plus target-side token counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    pairs: Vec<SentencePair>,
    token_counts: HashMap<Token, usize>,
}

impl ParallelCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<Token>, Vec<Token>)>,
    {
        let mut corpus = Self::new();
        for (source, target) in pairs {
            corpus.push(source, target)?;
        }
        Ok(corpus)
    }

    /// Convenience constructor from whitespace-separated strings.
    pub fn from_text_pairs<'a, I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        Self::from_pairs(pairs.into_iter().map(|(s, t)| (tokenize(s), tokenize(t))))
    }

    /// Appends a pair and returns its id.
    pub fn push(&mut self, source: Vec<Token>, target: Vec<Token>) -> Result<PairId> {
        if source.is_empty() || target.is_empty() {
            return Err(Error::Parse {
                line: self.pairs.len() + 1,
                message: "empty source or target".into(),
            });
        }
        let id = PairId(self.pairs.len() as u32);
        for token in &target {
            *self.token_counts.entry(token.clone()).or_insert(0) += 1;
        }
        self.pairs.push(SentencePair { id, source, target });
        Ok(id)
    }

    pub fn load(path: &Path, format: CorpusFormat, tokenizer: Tokenizer) -> Result<Self> {
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&content, format, tokenizer)
    }

    pub fn parse(content: &str, format: CorpusFormat, tokenizer: Tokenizer) -> Result<Self> {
        let records = parse_records(content, format, tokenizer)?;
        Self::from_pairs(records.into_iter().map(|r| (r.source, r.target)))
    }

    pub fn serialize(&self, format: CorpusFormat) -> String {
        let mut out = String::new();
        for pair in &self.pairs {
            let src = detokenize(&pair.source);
            let tgt = detokenize(&pair.target);
            match format {
                CorpusFormat::Tsv => {
                    out.push_str(&src);
                    out.push('\t');
                    out.push_str(&tgt);
                }
                CorpusFormat::Jsonl => {
                    let line = serde_json::json!({ "src": src, "tgt": tgt });
                    out.push_str(&line.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path, format: CorpusFormat) -> Result<()> {
        fs::write(path, self.serialize(format)).map_err(|e| Error::io(path, e))
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn get(&self, id: PairId) -> Option<&SentencePair> {
        self.pairs.get(id.index())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Occurrences of `token` on the target side.
    pub fn target_frequency(&self, token: &Token) -> usize {
        self.token_counts.get(token).copied().unwrap_or(0)
    }

    pub fn token_counts(&self) -> &HashMap<Token, usize> {
        &self.token_counts
    }

    pub fn target_token_total(&self) -> usize {
        self.pairs.iter().map(|p| p.target.len()).sum()
    }
}

/// Dense vocabulary id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenId(pub u32);

impl TokenId {
    pub const BOS: TokenId = TokenId(0);
    pub const EOS: TokenId = TokenId(1);
    pub const UNK: TokenId = TokenId(2);
    pub const PAD: TokenId = TokenId(3);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_special(self) -> bool {
        self.0 < SPECIALS.len() as u32
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub const SPECIALS: [&str; 4] = ["<s>", "</s>", "<unk>", "<pad>"];

/// Bijection between tokens and ids. Ids 0..4 are the specials
/// (begin, end, unknown, padding); the rest follow first appearance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    token_to_id: HashMap<Token, TokenId>,
    id_to_token: Vec<Token>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::specials_only()
    }
}

impl Vocabulary {
    pub fn specials_only() -> Self {
        let mut vocab = Vocabulary {
            token_to_id: HashMap::new(),
            id_to_token: Vec::new(),
        };
        for s in SPECIALS {
            vocab.insert(Token(s.to_owned()));
        }
        vocab
    }

    /// Specials first, then every source and target token in first-appearance order.
    pub fn build(corpus: &ParallelCorpus) -> Self {
        let mut vocab = Self::specials_only();
        for pair in corpus.pairs() {
            vocab.extend(&pair.source);
            vocab.extend(&pair.target);
        }
        vocab
    }

    pub fn extend<'a, I>(&mut self, tokens: I)
    where
        I: IntoIterator<Item = &'a Token>,
    {
        for token in tokens {
            if !self.token_to_id.contains_key(token) {
                self.insert(token.clone());
            }
        }
    }

    fn insert(&mut self, token: Token) -> TokenId {
        let id = TokenId(self.id_to_token.len() as u32);
        self.token_to_id.insert(token.clone(), id);
        self.id_to_token.push(token);
        id
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn id(&self, token: &Token) -> Option<TokenId> {
        self.token_to_id.get(token).copied()
    }

    /// Maps tokens to ids; unknown tokens become [`TokenId::UNK`].
    pub fn encode(&self, tokens: &[Token]) -> Vec<TokenId> {
        tokens
            .iter()
            .map(|t| self.id(t).unwrap_or(TokenId::UNK))
            .collect()
    }

    pub fn token(&self, id: TokenId) -> Option<&Token> {
        self.id_to_token.get(id.index())
    }

    /// Surface tokens for `ids`, dropping begin/end/padding markers.
    pub fn decode(&self, ids: &[TokenId]) -> Vec<Token> {
        ids.iter()
            .filter(|id| !matches!(**id, TokenId::BOS | TokenId::EOS | TokenId::PAD))
            .filter_map(|id| self.token(*id).cloned())
            .collect()
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<&str, u32> = self
            .id_to_token
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i as u32))
            .collect();
        serde_json::to_string_pretty(&map).expect("string map serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let map: HashMap<String, u32> = serde_json::from_str(json)?;
        let mut slots: Vec<Option<Token>> = vec![None; map.len()];
        for (surface, id) in map {
            let slot = slots
                .get_mut(id as usize)
                .ok_or_else(|| Error::config("vocabulary", format!("id {id} is not contiguous")))?;
            if slot.is_some() {
                return Err(Error::config(
                    "vocabulary",
                    format!("id {id} assigned twice"),
                ));
            }
            *slot = Some(Token::new(surface)?);
        }
        let id_to_token: Vec<Token> = slots
            .into_iter()
            .map(|s| s.expect("all slots filled"))
            .collect();
        for (i, s) in SPECIALS.iter().enumerate() {
            if id_to_token.get(i).map(Token::as_str) != Some(*s) {
                return Err(Error::config("vocabulary", format!("id {i} must be {s}")));
            }
        }
        let token_to_id = id_to_token
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), TokenId(i as u32)))
            .collect();
        Ok(Vocabulary {
            token_to_id,
            id_to_token,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let json = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&json)
    }
}
