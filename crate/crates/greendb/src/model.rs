//! Core domain types: product records, identity keys, GTIN validation,
//! prices and the category vocabulary.
//!
//! All types here are immutable values; workers copy them freely and
//! never share mutable state through them.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

/// Outcome of GTIN-13 validation. Failure modes are encoded in the
/// verdict rather than an error so callers can report them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GtinVerdict {
    Valid,
    WrongLength,
    NonNumeric,
    BadCheckDigit,
}

impl fmt::Display for GtinVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GtinVerdict::Valid => "valid",
            GtinVerdict::WrongLength => "wrong_length",
            GtinVerdict::NonNumeric => "non_numeric",
            GtinVerdict::BadCheckDigit => "bad_check_digit",
        };
        f.write_str(s)
    }
}

/// Validates a GTIN-13 candidate with the GS1 mod-10 check.
///
/// The weighted sum uses weights 1,3 alternating from the leftmost
/// digit; the candidate is valid iff the total is divisible by 10.
/// Only the 13-digit form is accepted; 8/12/14-digit variants come back
/// as `WrongLength`.
pub fn validate_gtin(candidate: &str) -> GtinVerdict {
    if candidate.chars().count() != 13 {
        return GtinVerdict::WrongLength;
    }
    if !candidate.bytes().all(|b| b.is_ascii_digit()) {
        return GtinVerdict::NonNumeric;
    }
    let sum: u32 = candidate
        .bytes()
        .enumerate()
        .map(|(i, b)| u32::from(b - b'0') * if i % 2 == 0 { 1 } else { 3 })
        .sum();
    if sum % 10 == 0 {
        GtinVerdict::Valid
    } else {
        GtinVerdict::BadCheckDigit
    }
}

/// Appends the GS1 mod-10 check digit to 12 payload digits.
///
/// Used by generators that need syntactically valid GTINs; validation
/// goes through [`validate_gtin`].
pub fn complete_gtin(payload12: &str) -> Option<String> {
    if payload12.len() != 12 || !payload12.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let sum: u32 = payload12
        .bytes()
        .enumerate()
        .map(|(i, b)| u32::from(b - b'0') * if i % 2 == 0 { 1 } else { 3 })
        .sum();
    let check = (10 - sum % 10) % 10;
    Some(format!("{payload12}{check}"))
}

/// Exact decimal amount, kept as an integer mantissa plus scale so that
/// parse → display round-trips losslessly ("29.90" keeps its trailing
/// zero). Accepts both decimal point and decimal comma on input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Decimal {
    mantissa: i64,
    scale: u8,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid decimal {0:?}")]
pub struct DecimalParseError(pub String);

impl Decimal {
    pub const MAX_SCALE: u8 = 9;

    pub fn new(mantissa: i64, scale: u8) -> Option<Self> {
        (scale <= Self::MAX_SCALE).then_some(Decimal { mantissa, scale })
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa < 0
    }

    pub fn parse(input: &str) -> Result<Self, DecimalParseError> {
        let raw = input.trim();
        let err = || DecimalParseError(input.to_string());
        if raw.is_empty() {
            return Err(err());
        }
        let (sign, digits) = match raw.strip_prefix('-') {
            Some(rest) => (-1i64, rest),
            None => (1i64, raw),
        };
        // Normalize the decimal comma; exactly one separator allowed.
        let normalized = digits.replace(',', ".");
        if normalized.matches('.').count() > 1 {
            return Err(err());
        }
        let (int_part, frac_part) = match normalized.split_once('.') {
            Some((i, f)) => (i, f),
            None => (normalized.as_str(), ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(err());
        }
        if frac_part.len() > usize::from(Self::MAX_SCALE) {
            return Err(err());
        }
        let mut mantissa: i64 = 0;
        for b in int_part.bytes().chain(frac_part.bytes()) {
            mantissa = mantissa
                .checked_mul(10)
                .and_then(|m| m.checked_add(i64::from(b - b'0')))
                .ok_or_else(err)?;
        }
        Ok(Decimal {
            mantissa: sign * mantissa,
            scale: frac_part.len() as u8,
        })
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.mantissa);
        }
        let sign = if self.mantissa < 0 { "-" } else { "" };
        let abs = self.mantissa.unsigned_abs();
        let pow = 10u64.pow(u32::from(self.scale));
        write!(
            f,
            "{sign}{}.{:0width$}",
            abs / pow,
            abs % pow,
            width = usize::from(self.scale)
        )
    }
}

impl FromStr for Decimal {
    type Err = DecimalParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Decimal::parse(s)
    }
}

impl Serialize for Decimal {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Decimal::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// A non-negative amount with its ISO-4217 currency code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Price {
    pub amount: Decimal,
    pub currency: String,
}

impl Price {
    pub fn new(amount: Decimal, currency: &str) -> Result<Self, ModelError> {
        if amount.is_negative() {
            return Err(ModelError::NegativePrice(amount.to_string()));
        }
        if !is_currency_code(currency) {
            return Err(ModelError::InvalidCurrency(currency.to_string()));
        }
        Ok(Price {
            amount,
            currency: currency.to_string(),
        })
    }
}

pub fn is_currency_code(code: &str) -> bool {
    code.len() == 3 && code.bytes().all(|b| b.is_ascii_uppercase())
}

/// Product vertical, assigned per category code by the vocabulary file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Vertical {
    Fashion,
    Electronics,
}

impl fmt::Display for Vertical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Vertical::Fashion => "FASHION",
            Vertical::Electronics => "ELECTRONICS",
        })
    }
}

impl FromStr for Vertical {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "FASHION" => Ok(Vertical::Fashion),
            "ELECTRONICS" => Ok(Vertical::Electronics),
            other => Err(ModelError::UnknownVertical(other.to_string())),
        }
    }
}

/// One vocabulary entry: an uppercase category token plus its vertical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCode {
    pub code: String,
    pub vertical: Vertical,
}

/// The configured category vocabulary. The set of codes is data, not a
/// hardcoded enum; the shipped file is illustrative.
#[derive(Debug, Clone, Default)]
pub struct CategoryVocabulary {
    entries: std::collections::BTreeMap<String, Vertical>,
}

impl CategoryVocabulary {
    pub fn from_entries(entries: impl IntoIterator<Item = CategoryCode>) -> Self {
        CategoryVocabulary {
            entries: entries
                .into_iter()
                .map(|e| (e.code, e.vertical))
                .collect(),
        }
    }

    /// Parses the line-oriented `CODE<TAB>VERTICAL` format. `#` starts a
    /// comment; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut entries = std::collections::BTreeMap::new();
        for (no, raw_line) in text.lines().enumerate() {
            let line = match raw_line.split_once('#') {
                Some((before, _)) => before,
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (code, vertical) = line.split_once('\t').ok_or_else(|| {
                ModelError::MalformedVocabularyLine {
                    line: no + 1,
                    content: raw_line.to_string(),
                }
            })?;
            let code = code.trim();
            if code.is_empty() || !code.bytes().all(|b| b.is_ascii_uppercase() || b == b'_') {
                return Err(ModelError::MalformedVocabularyLine {
                    line: no + 1,
                    content: raw_line.to_string(),
                });
            }
            entries.insert(code.to_string(), vertical.trim().parse()?);
        }
        Ok(CategoryVocabulary { entries })
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn contains(&self, code: &str) -> bool {
        self.entries.contains_key(code)
    }

    pub fn vertical(&self, code: &str) -> Option<Vertical> {
        self.entries.get(code).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// One product row following the extended schema.org Product definition,
/// carrying a set of sustainability-label references.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductRecord {
    pub gtin: Option<String>,
    pub name: String,
    pub description: String,
    pub manufacturer: String,
    pub category: String,
    pub merchant: String,
    pub url: String,
    pub price: Option<Price>,
    pub image_urls: Vec<String>,
    pub sustainability_label_ids: BTreeSet<String>,
    pub run_id: String,
    pub fetched_at: DateTime<Utc>,
}

impl ProductRecord {
    /// Checks the field-level invariants that do not need the registry.
    /// Label-id existence is the store's job at persistence time.
    pub fn validate(&self) -> Result<(), ModelError> {
        if let Some(gtin) = &self.gtin {
            let verdict = validate_gtin(gtin);
            if verdict != GtinVerdict::Valid {
                return Err(ModelError::InvalidGtin {
                    candidate: gtin.clone(),
                    verdict,
                });
            }
        }
        if self.name.trim().is_empty() {
            return Err(ModelError::EmptyName);
        }
        if Url::parse(&self.url).is_err() {
            return Err(ModelError::InvalidUrl(self.url.clone()));
        }
        if let Some(price) = &self.price {
            if price.amount.is_negative() {
                return Err(ModelError::NegativePrice(price.amount.to_string()));
            }
            if !is_currency_code(&price.currency) {
                return Err(ModelError::InvalidCurrency(price.currency.clone()));
            }
        }
        for image in &self.image_urls {
            if Url::parse(image).is_err() {
                return Err(ModelError::InvalidUrl(image.clone()));
            }
        }
        if self.category.trim().is_empty() {
            return Err(ModelError::EmptyCategory);
        }
        if self.merchant.trim().is_empty() {
            return Err(ModelError::EmptyMerchant);
        }
        Ok(())
    }
}

/// What identifies "the same product": the GTIN when one was extracted
/// and validated, the normalized URL otherwise.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProductIdentity {
    Gtin(String),
    NormalizedUrl(String),
}

/// Identity of a unique product, scoped per merchant. The pair
/// (ProductKey, category) identifies a row; a product assigned to two
/// categories yields two rows with one key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProductKey {
    pub merchant: String,
    pub identity: ProductIdentity,
}

/// Deterministic URL normalization for the identity fallback: lowercase
/// host, drop the configured query parameters, strip the trailing slash.
pub fn normalize_url(url: &str, strip_params: &[String]) -> String {
    let Ok(mut parsed) = Url::parse(url.trim()) else {
        return url.trim().to_string();
    };
    if let Some(host) = parsed.host_str() {
        let lower = host.to_ascii_lowercase();
        if lower != host {
            let _ = parsed.set_host(Some(&lower));
        }
    }
    let kept: Vec<(String, String)> = parsed
        .query_pairs()
        .filter(|(k, _)| !strip_params.iter().any(|s| s == k))
        .map(|(k, v)| (k.into_owned(), v.into_owned()))
        .collect();
    if kept.is_empty() {
        parsed.set_query(None);
    } else {
        parsed
            .query_pairs_mut()
            .clear()
            .extend_pairs(kept.iter().map(|(k, v)| (k.as_str(), v.as_str())));
    }
    let mut out = parsed.to_string();
    while out.ends_with('/') {
        out.pop();
    }
    out
}

/// Derives the identity key of a record. Pure: equal inputs yield equal
/// keys.
pub fn product_key(record: &ProductRecord, strip_params: &[String]) -> ProductKey {
    let identity = match &record.gtin {
        Some(gtin) if validate_gtin(gtin) == GtinVerdict::Valid => {
            ProductIdentity::Gtin(gtin.clone())
        }
        _ => ProductIdentity::NormalizedUrl(normalize_url(&record.url, strip_params)),
    };
    ProductKey {
        merchant: record.merchant.clone(),
        identity,
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("gtin {candidate:?} failed validation: {verdict}")]
    InvalidGtin {
        candidate: String,
        verdict: GtinVerdict,
    },
    #[error("product name is empty")]
    EmptyName,
    #[error("category is empty")]
    EmptyCategory,
    #[error("merchant is empty")]
    EmptyMerchant,
    #[error("not an absolute URL: {0}")]
    InvalidUrl(String),
    #[error("price must be >= 0, got {0}")]
    NegativePrice(String),
    #[error("not an ISO-4217 code: {0:?}")]
    InvalidCurrency(String),
    #[error("unknown vertical {0:?}")]
    UnknownVertical(String),
    #[error("malformed vocabulary line {line}: {content:?}")]
    MalformedVocabularyLine { line: usize, content: String },
    #[error("io: {0}")]
    Io(String),
}
