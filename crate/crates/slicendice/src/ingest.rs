//! Loading multi-attribute entity tables, stopword blacklisting, and
//! inverse-entity-frequency (IEF) weighting.
//!
//! The input format is delimited text with a header row: one column carries
//! the entity id, every other column is an attribute. A cell may hold several
//! values separated by an intra-cell delimiter (default `|`). Parsing is a
//! plain split — fields must not themselves contain the field delimiter.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::BufRead;

use thiserror::Error;

/// Errors raised while building or weighting an [`AttributeTable`].
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input has no header row")]
    EmptyInput,
    #[error("id column '{0}' not found in header")]
    MissingIdColumn(String),
    #[error("duplicate attribute column '{0}' in header")]
    DuplicateAttribute(String),
    #[error("duplicate entity id '{id}' on line {line}")]
    DuplicateEntityId { id: String, line: usize },
    #[error("malformed row on line {line}: expected {expected} fields, found {found}")]
    MalformedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("table is empty; at least one entity is required")]
    EmptyTable,
    #[error("entity id mismatch: {0} ids for {1} rows")]
    ShapeMismatch(usize, usize),
    #[error("stopword file line {line}: token before any [attribute] section")]
    StopwordOutsideSection { line: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// How a delimited stream maps onto an [`AttributeTable`].
#[derive(Debug, Clone)]
pub struct TableSchema {
    /// Header name of the entity-id column.
    pub id_column: String,
    /// Separates fields within a row.
    pub field_delimiter: char,
    /// Separates values within a cell.
    pub value_delimiter: char,
    /// Optional pre-pass lowercasing all value tokens. Tokens are always
    /// trimmed of surrounding whitespace and compared case-sensitively
    /// otherwise.
    pub lowercase: bool,
}

impl Default for TableSchema {
    fn default() -> Self {
        Self {
            id_column: "id".to_string(),
            field_delimiter: ',',
            value_delimiter: '|',
            lowercase: false,
        }
    }
}

/// Entities × attributes, each cell a finite set of value tokens.
///
/// Entities with empty value sets in every attribute are retained; they still
/// count toward the entity total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeTable {
    entity_ids: Vec<String>,
    attributes: Vec<String>,
    // cells[entity][attribute]
    cells: Vec<Vec<BTreeSet<String>>>,
}

impl AttributeTable {
    /// Assemble a table from parts, validating id and attribute uniqueness.
    pub fn new(
        entity_ids: Vec<String>,
        attributes: Vec<String>,
        cells: Vec<Vec<BTreeSet<String>>>,
    ) -> Result<Self, IngestError> {
        if cells.len() != entity_ids.len() {
            return Err(IngestError::ShapeMismatch(entity_ids.len(), cells.len()));
        }
        let mut seen = HashMap::new();
        for (row, id) in entity_ids.iter().enumerate() {
            if seen.insert(id.clone(), row).is_some() {
                return Err(IngestError::DuplicateEntityId {
                    id: id.clone(),
                    line: row + 2,
                });
            }
        }
        let mut attr_seen = BTreeSet::new();
        for name in &attributes {
            if !attr_seen.insert(name.clone()) {
                return Err(IngestError::DuplicateAttribute(name.clone()));
            }
        }
        for row in &cells {
            if row.len() != attributes.len() {
                return Err(IngestError::ShapeMismatch(attributes.len(), row.len()));
            }
        }
        Ok(Self {
            entity_ids,
            attributes,
            cells,
        })
    }

    pub fn entity_count(&self) -> usize {
        self.entity_ids.len()
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn entity_ids(&self) -> &[String] {
        &self.entity_ids
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    /// Value set for one (entity, attribute) cell.
    pub fn values(&self, entity: usize, attribute: usize) -> &BTreeSet<String> {
        &self.cells[entity][attribute]
    }

    /// Render back to the delimited-text format accepted by
    /// [`load_attribute_table`].
    pub fn to_delimited(&self, schema: &TableSchema) -> String {
        let fd = schema.field_delimiter;
        let vd = schema.value_delimiter;
        let mut out = String::new();
        out.push_str(&schema.id_column);
        for attr in &self.attributes {
            let _ = write!(out, "{fd}{attr}");
        }
        out.push('\n');
        for (entity, id) in self.entity_ids.iter().enumerate() {
            out.push_str(id);
            for attribute in 0..self.attributes.len() {
                out.push(fd);
                let mut first = true;
                for token in &self.cells[entity][attribute] {
                    if !first {
                        out.push(vd);
                    }
                    out.push_str(token);
                    first = false;
                }
            }
            out.push('\n');
        }
        out
    }
}

fn normalize_token(raw: &str, schema: &TableSchema) -> Option<String> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return None;
    }
    Some(if schema.lowercase {
        trimmed.to_lowercase()
    } else {
        trimmed.to_string()
    })
}

/// Parse delimited text with a header row into an [`AttributeTable`].
///
/// Duplicate tokens within a cell collapse to one; empty cells yield empty
/// sets. Rows with the wrong field count, duplicate entity ids, and a missing
/// id column are rejected.
pub fn load_attribute_table<R: BufRead>(
    reader: R,
    schema: &TableSchema,
) -> Result<AttributeTable, IngestError> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(IngestError::EmptyInput),
    };
    let columns: Vec<String> = header
        .split(schema.field_delimiter)
        .map(|c| c.trim().to_string())
        .collect();
    let id_pos = columns
        .iter()
        .position(|c| *c == schema.id_column)
        .ok_or_else(|| IngestError::MissingIdColumn(schema.id_column.clone()))?;
    let attributes: Vec<String> = columns
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != id_pos)
        .map(|(_, c)| c.clone())
        .collect();
    let mut attr_seen = BTreeSet::new();
    for name in &attributes {
        if !attr_seen.insert(name.clone()) {
            return Err(IngestError::DuplicateAttribute(name.clone()));
        }
    }

    let mut entity_ids = Vec::new();
    let mut cells = Vec::new();
    let mut id_seen: HashMap<String, usize> = HashMap::new();
    for (row_idx, line) in lines.enumerate() {
        let line = line?;
        let line_no = row_idx + 2; // 1-based, after the header
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(schema.field_delimiter).collect();
        if fields.len() != columns.len() {
            return Err(IngestError::MalformedRow {
                line: line_no,
                expected: columns.len(),
                found: fields.len(),
            });
        }
        let id = fields[id_pos].trim().to_string();
        if id_seen.insert(id.clone(), line_no).is_some() {
            return Err(IngestError::DuplicateEntityId { id, line: line_no });
        }
        let mut row = Vec::with_capacity(attributes.len());
        for (pos, field) in fields.iter().enumerate() {
            if pos == id_pos {
                continue;
            }
            let set: BTreeSet<String> = field
                .split(schema.value_delimiter)
                .filter_map(|tok| normalize_token(tok, schema))
                .collect();
            row.push(set);
        }
        entity_ids.push(id);
        cells.push(row);
    }
    AttributeTable::new(entity_ids, attributes, cells)
}

/// Per-attribute token blacklist.
///
/// The file format is one token per line, sectioned by attribute headers in
/// square brackets:
///
/// ```text
/// [file_name]
/// Test
/// [email]
/// noreply@example.com
/// ```
#[derive(Debug, Clone, Default)]
pub struct Stopwords {
    per_attribute: HashMap<String, BTreeSet<String>>,
}

impl Stopwords {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut per_attribute: HashMap<String, BTreeSet<String>> = HashMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                let name = line[1..line.len() - 1].trim().to_string();
                per_attribute.entry(name.clone()).or_default();
                current = Some(name);
            } else {
                match &current {
                    Some(attr) => {
                        per_attribute
                            .entry(attr.clone())
                            .or_default()
                            .insert(line.to_string());
                    }
                    None => {
                        return Err(IngestError::StopwordOutsideSection { line: idx + 1 });
                    }
                }
            }
        }
        Ok(Self { per_attribute })
    }

    pub fn insert(&mut self, attribute: &str, token: &str) {
        self.per_attribute
            .entry(attribute.to_string())
            .or_default()
            .insert(token.to_string());
    }

    pub fn contains(&self, attribute: &str, token: &str) -> bool {
        self.per_attribute
            .get(attribute)
            .map(|set| set.contains(token))
            .unwrap_or(false)
    }

    pub fn is_empty(&self) -> bool {
        self.per_attribute.values().all(|set| set.is_empty())
    }
}

/// Remove blacklisted tokens from the matching attribute's value sets.
///
/// Blacklisting a token absent from the data is a no-op; scoping is
/// per-attribute, so a token listed under one attribute never touches
/// another. Idempotent.
pub fn apply_stopwords(table: &AttributeTable, stopwords: &Stopwords) -> AttributeTable {
    let mut cells = table.cells.clone();
    for (attribute, name) in table.attributes.iter().enumerate() {
        if let Some(blacklist) = stopwords.per_attribute.get(name) {
            if blacklist.is_empty() {
                continue;
            }
            for row in cells.iter_mut() {
                row[attribute].retain(|tok| !blacklist.contains(tok));
            }
        }
    }
    AttributeTable {
        entity_ids: table.entity_ids.clone(),
        attributes: table.attributes.clone(),
        cells,
    }
}

/// Per-value inverse-entity-frequency weights, one map per attribute.
///
/// The weight of a value carried by `freq` of the table's `N` entities is
/// `(N / ln(1 + freq))²` — strictly decreasing in `freq`. Values absent from
/// the weight map (including stopworded ones, which are removed before
/// weighting) weigh exactly 0.
#[derive(Debug, Clone)]
pub struct IefWeights {
    entity_count: usize,
    weights: Vec<HashMap<String, f64>>,
}

impl IefWeights {
    /// Wrap explicit weights. Useful for custom weighting strategies and for
    /// fixtures; [`compute_ief`] is the standard constructor.
    pub fn from_weights(entity_count: usize, weights: Vec<HashMap<String, f64>>) -> Self {
        Self {
            entity_count,
            weights,
        }
    }

    pub fn entity_count(&self) -> usize {
        self.entity_count
    }

    pub fn attribute_count(&self) -> usize {
        self.weights.len()
    }

    /// Weight of a token in one attribute; 0 for unknown tokens.
    pub fn weight(&self, attribute: usize, token: &str) -> f64 {
        self.weights[attribute].get(token).copied().unwrap_or(0.0)
    }

    pub fn tokens(&self, attribute: usize) -> impl Iterator<Item = (&str, f64)> {
        self.weights[attribute]
            .iter()
            .map(|(t, w)| (t.as_str(), *w))
    }
}

/// The IEF formula itself: `(n / ln(1 + freq))²`.
pub fn ief_weight(entity_count: usize, frequency: usize) -> f64 {
    let n = entity_count as f64;
    let denom = (1.0 + frequency as f64).ln();
    (n / denom) * (n / denom)
}

/// Compute IEF weights for every value token surviving in the table.
///
/// Frequencies count distinct entities carrying the token, so they reflect
/// the table as given — run [`apply_stopwords`] first to make blacklisted
/// tokens invisible here too.
pub fn compute_ief(table: &AttributeTable) -> Result<IefWeights, IngestError> {
    let n = table.entity_count();
    if n == 0 {
        return Err(IngestError::EmptyTable);
    }
    let mut weights = Vec::with_capacity(table.attribute_count());
    for attribute in 0..table.attribute_count() {
        let mut frequency: HashMap<&str, usize> = HashMap::new();
        for entity in 0..n {
            for token in table.values(entity, attribute) {
                *frequency.entry(token.as_str()).or_insert(0) += 1;
            }
        }
        let map: HashMap<String, f64> = frequency
            .into_iter()
            .map(|(token, freq)| (token.to_string(), ief_weight(n, freq)))
            .collect();
        weights.push(map);
    }
    Ok(IefWeights {
        entity_count: n,
        weights,
    })
}
