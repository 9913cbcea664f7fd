//! Sustainability-label registry: canonical label entries with their
//! published evaluation scores, plus the merchant-specific mappings that
//! resolve raw badge strings to canonical ids.
//!
//! Labels are the lever of the whole dataset: evaluating a small number
//! of labels yields sustainability information for a large number of
//! products, so the registry is loaded once and read everywhere.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reserved id for products advertised as sustainable without a
/// recognized third-party certificate.
pub const OTHER_LABEL_ID: &str = "OTHER";

/// ISO 14020 flavor of a label: Type I (third-party verified) versus
/// Type II (self-declared private label).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKind {
    ThirdParty,
    Private,
}

impl fmt::Display for LabelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelKind::ThirdParty => "third_party",
            LabelKind::Private => "private",
        })
    }
}

/// The three published evaluation scores, each in 0..=100. A label
/// carries either all three or none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreTriple {
    pub credibility: u8,
    pub environment: u8,
    pub socio_economic: u8,
}

impl ScoreTriple {
    pub fn new(credibility: u8, environment: u8, socio_economic: u8) -> Option<Self> {
        let triple = ScoreTriple {
            credibility,
            environment,
            socio_economic,
        };
        triple.in_range().then_some(triple)
    }

    fn in_range(&self) -> bool {
        self.credibility <= 100 && self.environment <= 100 && self.socio_economic <= 100
    }
}

/// One registry entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SustainabilityLabel {
    pub label_id: String,
    pub name: String,
    pub description: String,
    pub kind: LabelKind,
    pub scores: Option<ScoreTriple>,
}

impl SustainabilityLabel {
    fn check_invariants(&self) -> Result<(), String> {
        if self.label_id.trim().is_empty() {
            return Err("empty label_id".to_string());
        }
        if self.kind == LabelKind::Private && self.scores.is_some() {
            return Err("private labels carry no scores".to_string());
        }
        if let Some(scores) = &self.scores {
            if !scores.in_range() {
                return Err("scores must lie in 0..=100".to_string());
            }
        }
        Ok(())
    }
}

/// How a label id classifies for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelClass {
    ThirdPartyEvaluated,
    ThirdPartyUnevaluated,
    Private,
}

/// Result of bootstrapping the registry from a seed file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSummary {
    pub total: usize,
    pub third_party: usize,
    pub evaluated: usize,
}

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("malformed seed row {row}: {reason}")]
    MalformedSeed { row: usize, reason: String },
    #[error("duplicate label id {0:?}")]
    DuplicateLabelId(String),
    #[error("unknown label id {0:?}")]
    UnknownLabelId(String),
    #[error("empty label string")]
    EmptyLabelString,
    #[error("malformed mapping row {row}: {reason}")]
    MalformedMapping { row: usize, reason: String },
    #[error("duplicate mapping for ({merchant}, {raw_pattern:?})")]
    DuplicateMapping {
        merchant: String,
        raw_pattern: String,
    },
    #[error("mapping target {0:?} not in registry")]
    UnknownMappingTarget(String),
    #[error("io: {0}")]
    Io(String),
}

/// In-memory registry keyed by label id. `OTHER` always exists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelRegistry {
    labels: BTreeMap<String, SustainabilityLabel>,
}

fn other_label() -> SustainabilityLabel {
    SustainabilityLabel {
        label_id: OTHER_LABEL_ID.to_string(),
        name: "Other sustainability claim".to_string(),
        description: "Reserved entry for products advertised as sustainable without a \
                      recognized third-party certificate."
            .to_string(),
        kind: LabelKind::Private,
        scores: None,
    }
}

impl LabelRegistry {
    pub fn new() -> Self {
        let mut registry = LabelRegistry::default();
        registry.ensure_other();
        registry
    }

    pub fn ensure_other(&mut self) {
        self.labels
            .entry(OTHER_LABEL_ID.to_string())
            .or_insert_with(other_label);
    }

    pub fn insert(&mut self, label: SustainabilityLabel) -> Result<(), LabelError> {
        label
            .check_invariants()
            .map_err(|reason| LabelError::MalformedSeed { row: 0, reason })?;
        if self.labels.contains_key(&label.label_id) {
            return Err(LabelError::DuplicateLabelId(label.label_id));
        }
        self.labels.insert(label.label_id.clone(), label);
        Ok(())
    }

    /// Insert-or-replace, used when rebuilding registry state from the
    /// store journal.
    pub fn upsert(&mut self, label: SustainabilityLabel) {
        self.labels.insert(label.label_id.clone(), label);
    }

    pub fn get(&self, label_id: &str) -> Option<&SustainabilityLabel> {
        self.labels.get(label_id)
    }

    pub fn contains(&self, label_id: &str) -> bool {
        self.labels.contains_key(label_id)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SustainabilityLabel> {
        self.labels.values()
    }

    pub fn third_party_count(&self) -> usize {
        self.labels
            .values()
            .filter(|l| l.kind == LabelKind::ThirdParty)
            .count()
    }

    pub fn evaluated_count(&self) -> usize {
        self.labels
            .values()
            .filter(|l| l.kind == LabelKind::ThirdParty && l.scores.is_some())
            .count()
    }

    /// Total classification of a registered id.
    pub fn classify(&self, label_id: &str) -> Result<LabelClass, LabelError> {
        let label = self
            .labels
            .get(label_id)
            .ok_or_else(|| LabelError::UnknownLabelId(label_id.to_string()))?;
        Ok(match (label.kind, label.scores.is_some()) {
            (LabelKind::ThirdParty, true) => LabelClass::ThirdPartyEvaluated,
            (LabelKind::ThirdParty, false) => LabelClass::ThirdPartyUnevaluated,
            (LabelKind::Private, _) => LabelClass::Private,
        })
    }

    /// Loads the seed CSV. A row must carry zero or three scores;
    /// partial rows abort the load. `OTHER` is auto-inserted if the
    /// seed does not ship it.
    pub fn load_seed<R: Read>(reader: R) -> Result<(Self, SeedSummary), LabelError> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(reader);
        let mut registry = LabelRegistry::default();
        for (idx, row) in csv_reader.deserialize::<SeedRow>().enumerate() {
            let row_no = idx + 2; // header is line 1
            let row = row.map_err(|e| LabelError::MalformedSeed {
                row: row_no,
                reason: e.to_string(),
            })?;
            let label = row.into_label(row_no)?;
            label
                .check_invariants()
                .map_err(|reason| LabelError::MalformedSeed { row: row_no, reason })?;
            if registry.labels.contains_key(&label.label_id) {
                return Err(LabelError::DuplicateLabelId(label.label_id));
            }
            registry.labels.insert(label.label_id.clone(), label);
        }
        registry.ensure_other();
        let summary = SeedSummary {
            total: registry.len(),
            third_party: registry.third_party_count(),
            evaluated: registry.evaluated_count(),
        };
        Ok((registry, summary))
    }

    pub fn load_seed_path(path: &Path) -> Result<(Self, SeedSummary), LabelError> {
        let file = std::fs::File::open(path)
            .map_err(|e| LabelError::Io(format!("{}: {e}", path.display())))?;
        Self::load_seed(file)
    }

    /// Serializes back to the seed CSV format (rows ordered by id), so
    /// load → write → load is the identity.
    pub fn write_seed<W: Write>(&self, writer: W) -> Result<(), LabelError> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record([
            "label_id",
            "name",
            "description",
            "kind",
            "credibility",
            "environment",
            "socio_economic",
        ])
        .map_err(|e| LabelError::Io(e.to_string()))?;
        for label in self.labels.values() {
            let (c, e, s) = match &label.scores {
                Some(t) => (
                    t.credibility.to_string(),
                    t.environment.to_string(),
                    t.socio_economic.to_string(),
                ),
                None => (String::new(), String::new(), String::new()),
            };
            out.write_record([
                label.label_id.as_str(),
                label.name.as_str(),
                label.description.as_str(),
                &label.kind.to_string(),
                &c,
                &e,
                &s,
            ])
            .map_err(|e| LabelError::Io(e.to_string()))?;
        }
        out.flush().map_err(|e| LabelError::Io(e.to_string()))
    }
}

#[derive(Debug, Deserialize)]
struct SeedRow {
    label_id: String,
    name: String,
    description: String,
    kind: String,
    credibility: String,
    environment: String,
    socio_economic: String,
}

impl SeedRow {
    fn into_label(self, row_no: usize) -> Result<SustainabilityLabel, LabelError> {
        let malformed = |reason: String| LabelError::MalformedSeed {
            row: row_no,
            reason,
        };
        let kind = match self.kind.trim() {
            "third_party" => LabelKind::ThirdParty,
            "private" => LabelKind::Private,
            other => return Err(malformed(format!("unknown kind {other:?}"))),
        };
        let cells = [
            self.credibility.trim(),
            self.environment.trim(),
            self.socio_economic.trim(),
        ];
        let present = cells.iter().filter(|c| !c.is_empty()).count();
        let scores = match present {
            0 => None,
            3 => {
                let mut values = [0u8; 3];
                for (slot, cell) in values.iter_mut().zip(cells) {
                    *slot = cell
                        .parse::<u8>()
                        .ok()
                        .filter(|v| *v <= 100)
                        .ok_or_else(|| malformed(format!("score {cell:?} not in 0..=100")))?;
                }
                Some(ScoreTriple {
                    credibility: values[0],
                    environment: values[1],
                    socio_economic: values[2],
                })
            }
            _ => {
                return Err(malformed(
                    "a row must carry zero or three scores".to_string(),
                ))
            }
        };
        if self.label_id.trim().is_empty() {
            return Err(malformed("empty label_id".to_string()));
        }
        Ok(SustainabilityLabel {
            label_id: self.label_id.trim().to_string(),
            name: self.name.trim().to_string(),
            description: self.description.trim().to_string(),
            kind,
            scores,
        })
    }
}

/// One merchant-specific mapping from the badge string displayed on the
/// site to a canonical label id (or `OTHER` for private claims).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMapping {
    pub merchant: String,
    pub raw_pattern: String,
    pub target: String,
}

/// Loaded mapping set, keyed by (merchant, normalized pattern).
#[derive(Debug, Clone, Default)]
pub struct MappingSet {
    by_pattern: BTreeMap<(String, String), String>,
}

impl MappingSet {
    pub fn empty() -> Self {
        MappingSet::default()
    }

    /// Loads `merchant,raw_pattern,target` CSV rows, validating every
    /// target against the registry.
    pub fn load<R: Read>(reader: R, registry: &LabelRegistry) -> Result<Self, LabelError> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let mut set = MappingSet::default();
        for (idx, row) in csv_reader.deserialize::<LabelMapping>().enumerate() {
            let row_no = idx + 2;
            let mapping = row.map_err(|e| LabelError::MalformedMapping {
                row: row_no,
                reason: e.to_string(),
            })?;
            set.add(mapping, registry)?;
        }
        Ok(set)
    }

    pub fn load_path(path: &Path, registry: &LabelRegistry) -> Result<Self, LabelError> {
        let file = std::fs::File::open(path)
            .map_err(|e| LabelError::Io(format!("{}: {e}", path.display())))?;
        Self::load(file, registry)
    }

    pub fn add(
        &mut self,
        mapping: LabelMapping,
        registry: &LabelRegistry,
    ) -> Result<(), LabelError> {
        if mapping.target != OTHER_LABEL_ID && !registry.contains(&mapping.target) {
            return Err(LabelError::UnknownMappingTarget(mapping.target));
        }
        let key = (
            mapping.merchant.clone(),
            normalize_label_text(&mapping.raw_pattern),
        );
        if self.by_pattern.contains_key(&key) {
            return Err(LabelError::DuplicateMapping {
                merchant: mapping.merchant,
                raw_pattern: mapping.raw_pattern,
            });
        }
        self.by_pattern.insert(key, mapping.target);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.by_pattern.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_pattern.is_empty()
    }

    fn lookup(&self, merchant: &str, normalized: &str) -> Option<&str> {
        self.by_pattern
            .get(&(merchant.to_string(), normalized.to_string()))
            .map(String::as_str)
    }
}

/// Resolution of one raw badge string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Known(String),
    PrivateOther,
    UnknownThirdParty(String),
}

/// Matching normalization: trim, collapse internal whitespace, case-fold.
/// Merchant badge text varies in whitespace and casing.
pub fn normalize_label_text(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Deterministic provisional id for a raw string with no mapping:
/// `UNKNOWN_` plus the uppercased, underscore-joined normalization.
pub fn provisional_label_id(raw: &str) -> String {
    let mut body = String::new();
    let mut last_was_sep = true;
    for ch in normalize_label_text(raw).chars() {
        if ch.is_alphanumeric() {
            body.extend(ch.to_uppercase());
            last_was_sep = false;
        } else if !last_was_sep {
            body.push('_');
            last_was_sep = true;
        }
    }
    format!("UNKNOWN_{}", body.trim_end_matches('_'))
}

/// Resolves a merchant's raw badge string. Exact (normalized) mapping
/// hits are `Known` or `PrivateOther`; everything else becomes a stable
/// provisional id recorded for later curation.
pub fn resolve_label(
    merchant: &str,
    raw: &str,
    mappings: &MappingSet,
) -> Result<Resolution, LabelError> {
    let normalized = normalize_label_text(raw);
    if normalized.is_empty() {
        return Err(LabelError::EmptyLabelString);
    }
    match mappings.lookup(merchant, &normalized) {
        Some(target) if target == OTHER_LABEL_ID => Ok(Resolution::PrivateOther),
        Some(target) => Ok(Resolution::Known(target.to_string())),
        None => Ok(Resolution::UnknownThirdParty(provisional_label_id(raw))),
    }
}

/// The seed shipped with the repository (paper rows plus placeholder
/// rows; real registry data ingestion is an operator task).
pub fn embedded_seed_csv() -> &'static str {
    include_str!("../data/labels_seed.csv")
}

/// Merchant badge-string mappings shipped with the repository.
pub fn embedded_mappings_csv() -> &'static str {
    include_str!("../data/label_mappings.csv")
}

/// The illustrative category vocabulary shipped with the repository.
pub fn embedded_categories_tsv() -> &'static str {
    include_str!("../data/categories.tsv")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SEED: &str = "\
label_id,name,description,kind,credibility,environment,socio_economic
MIG_OEKO_TEX,OEKO-TEX Made in Green,Traceable textile label,third_party,76,80,80
FAIRLY_GROWN,Fairly Grown,Placeholder,third_party,,,
HOUSE_BRAND_ECO,House Eco Line,Self-declared line,private,,,
";

    fn registry() -> LabelRegistry {
        LabelRegistry::load_seed(SEED.as_bytes()).unwrap().0
    }

    fn mappings() -> MappingSet {
        let csv = "\
merchant,raw_pattern,target
zalando,OEKO-TEX Made in Green,MIG_OEKO_TEX
otto,made with recycled materials,OTHER
otto,Fairly   Grown,FAIRLY_GROWN
";
        MappingSet::load(csv.as_bytes(), &registry()).unwrap()
    }

    #[test]
    fn seed_loads_with_other_auto_inserted() {
        let (registry, summary) = LabelRegistry::load_seed(SEED.as_bytes()).unwrap();
        assert_eq!(summary.total, 4);
        assert_eq!(summary.third_party, 2);
        assert_eq!(summary.evaluated, 1);
        assert!(registry.contains(OTHER_LABEL_ID));
        let mig = registry.get("MIG_OEKO_TEX").unwrap();
        assert_eq!(mig.scores, ScoreTriple::new(76, 80, 80));
    }

    #[test]
    fn empty_seed_yields_only_other() {
        let header = "label_id,name,description,kind,credibility,environment,socio_economic\n";
        let (registry, summary) = LabelRegistry::load_seed(header.as_bytes()).unwrap();
        assert_eq!(summary.total, 1);
        assert_eq!(registry.len(), 1);
        assert!(registry.contains(OTHER_LABEL_ID));
    }

    #[test]
    fn partial_scores_rejected() {
        let seed = "\
label_id,name,description,kind,credibility,environment,socio_economic
BAD,Bad,Partial,third_party,50,,
";
        assert!(matches!(
            LabelRegistry::load_seed(seed.as_bytes()),
            Err(LabelError::MalformedSeed { row: 2, .. })
        ));
    }

    #[test]
    fn private_with_scores_rejected() {
        let seed = "\
label_id,name,description,kind,credibility,environment,socio_economic
BAD,Bad,Private scored,private,10,10,10
";
        assert!(matches!(
            LabelRegistry::load_seed(seed.as_bytes()),
            Err(LabelError::MalformedSeed { .. })
        ));
    }

    #[test]
    fn duplicate_id_rejected() {
        let seed = "\
label_id,name,description,kind,credibility,environment,socio_economic
A,A,first,third_party,,,
A,A,second,third_party,,,
";
        assert!(matches!(
            LabelRegistry::load_seed(seed.as_bytes()),
            Err(LabelError::DuplicateLabelId(_))
        ));
    }

    #[test]
    fn score_out_of_range_rejected() {
        let seed = "\
label_id,name,description,kind,credibility,environment,socio_economic
A,A,out of range,third_party,101,10,10
";
        assert!(matches!(
            LabelRegistry::load_seed(seed.as_bytes()),
            Err(LabelError::MalformedSeed { .. })
        ));
    }

    #[test]
    fn classify_partitions() {
        let registry = registry();
        assert_eq!(
            registry.classify("MIG_OEKO_TEX").unwrap(),
            LabelClass::ThirdPartyEvaluated
        );
        assert_eq!(
            registry.classify("FAIRLY_GROWN").unwrap(),
            LabelClass::ThirdPartyUnevaluated
        );
        assert_eq!(registry.classify("OTHER").unwrap(), LabelClass::Private);
        assert!(matches!(
            registry.classify("NOPE"),
            Err(LabelError::UnknownLabelId(_))
        ));

        let mut counts = [0usize; 3];
        for label in registry.iter() {
            match registry.classify(&label.label_id).unwrap() {
                LabelClass::ThirdPartyEvaluated => counts[0] += 1,
                LabelClass::ThirdPartyUnevaluated => counts[1] += 1,
                LabelClass::Private => counts[2] += 1,
            }
        }
        assert_eq!(counts.iter().sum::<usize>(), registry.len());
    }

    #[test]
    fn resolve_examples() {
        let mappings = mappings();
        assert_eq!(
            resolve_label("zalando", "OEKO-TEX Made in Green", &mappings).unwrap(),
            Resolution::Known("MIG_OEKO_TEX".to_string())
        );
        assert_eq!(
            resolve_label("otto", "made with recycled materials", &mappings).unwrap(),
            Resolution::PrivateOther
        );
        assert_eq!(
            resolve_label("otto", "Fair Stone", &mappings).unwrap(),
            Resolution::UnknownThirdParty("UNKNOWN_FAIR_STONE".to_string())
        );
        // Normalization: case and whitespace variations hit the mapping.
        assert_eq!(
            resolve_label("otto", "  fairly grown ", &mappings).unwrap(),
            Resolution::Known("FAIRLY_GROWN".to_string())
        );
        // Mapping is merchant-scoped.
        assert!(matches!(
            resolve_label("zalando", "Fairly Grown", &mappings).unwrap(),
            Resolution::UnknownThirdParty(_)
        ));
        assert!(matches!(
            resolve_label("otto", "   ", &mappings),
            Err(LabelError::EmptyLabelString)
        ));
    }

    #[test]
    fn provisional_ids_are_stable() {
        assert_eq!(provisional_label_id("Fair Stone"), "UNKNOWN_FAIR_STONE");
        assert_eq!(
            provisional_label_id("  fair   stone "),
            "UNKNOWN_FAIR_STONE"
        );
        assert_eq!(
            provisional_label_id("Grüner Knopf 2.0"),
            "UNKNOWN_GRÜNER_KNOPF_2_0"
        );
        for raw in ["Fair Stone", "bluesign APPROVED", "a-b-c"] {
            assert_eq!(provisional_label_id(raw), provisional_label_id(raw));
        }
    }

    #[test]
    fn mapping_target_must_exist() {
        let csv = "\
merchant,raw_pattern,target
otto,ghost badge,GHOST
";
        assert!(matches!(
            MappingSet::load(csv.as_bytes(), &registry()),
            Err(LabelError::UnknownMappingTarget(_))
        ));
    }

    #[test]
    fn duplicate_mapping_rejected() {
        let csv = "\
merchant,raw_pattern,target
otto,same badge,OTHER
otto,SAME   badge,OTHER
";
        assert!(matches!(
            MappingSet::load(csv.as_bytes(), &registry()),
            Err(LabelError::DuplicateMapping { .. })
        ));
    }

    #[test]
    fn seed_round_trip() {
        let registry = registry();
        let mut buf = Vec::new();
        registry.write_seed(&mut buf).unwrap();
        let (reloaded, _) = LabelRegistry::load_seed(buf.as_slice()).unwrap();
        assert_eq!(registry, reloaded);
    }

    #[test]
    fn embedded_seed_matches_bootstrap_counts() {
        let (registry, summary) =
            LabelRegistry::load_seed(embedded_seed_csv().as_bytes()).unwrap();
        assert_eq!(summary.third_party, 142);
        assert_eq!(summary.evaluated, 34);
        assert!(registry.contains(OTHER_LABEL_ID));
        let mig = registry.get("MIG_OEKO_TEX").unwrap();
        assert_eq!(mig.name, "OEKO-TEX Made in Green");
        assert_eq!(mig.scores, ScoreTriple::new(76, 80, 80));
    }

    #[test]
    fn embedded_mappings_load() {
        let (registry, _) = LabelRegistry::load_seed(embedded_seed_csv().as_bytes()).unwrap();
        let mappings = MappingSet::load(embedded_mappings_csv().as_bytes(), &registry).unwrap();
        assert!(!mappings.is_empty());
        assert_eq!(
            resolve_label("zalando", "OEKO-TEX Made in Green", &mappings).unwrap(),
            Resolution::Known("MIG_OEKO_TEX".to_string())
        );
        assert_eq!(
            resolve_label("otto", "made with recycled materials", &mappings).unwrap(),
            Resolution::PrivateOther
        );
    }
}
