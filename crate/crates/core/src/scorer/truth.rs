use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{OpId, TaggedDocument};

pub const TRUTH_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthRole {
    Heading,
    Paragraph,
    Table,
    List,
    Figure,
    Formula,
    Caption,
    Artifact,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthCell {
    #[serde(default)]
    pub ops: BTreeSet<OpId>,
    #[serde(default)]
    pub header: bool,
}

fn yes() -> bool {
    true
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn is_true(b: &bool) -> bool {
    *b
}

/// One annotated element of the ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthElement {
    pub id: String,
    pub role: TruthRole,
    pub ops: BTreeSet<OpId>,
    /// Heading level, 1..=6.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u8>,
    /// The document title: a P or H1 tag both count as correct, and a P
    /// shifts the expected level of every other heading up by one.
    #[serde(default, skip_serializing_if = "is_false")]
    pub title: bool,
    /// Table cells, row by row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<TruthCell>>>,
    /// Top-level list items, each with all operators of the item
    /// including nested lists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub items: Option<Vec<BTreeSet<OpId>>>,
    /// Figures only: whether the figure needs alternative text.
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub requires_alt: bool,
    /// Formulas embedded in running text are not scored.
    #[serde(default, skip_serializing_if = "is_false")]
    pub inline: bool,
    /// Operators that may sit inside or outside the element's tag without
    /// penalty, such as an equation number.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub optional_ops: BTreeSet<OpId>,
}

impl TruthElement {
    pub fn new(id: impl Into<String>, role: TruthRole, ops: impl IntoIterator<Item = OpId>) -> Self {
        Self {
            id: id.into(),
            role,
            ops: ops.into_iter().collect(),
            level: None,
            title: false,
            rows: None,
            items: None,
            requires_alt: true,
            inline: false,
            optional_ops: BTreeSet::new(),
        }
    }
}

/// Ground truth for one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthMap {
    pub version: u32,
    pub document: String,
    pub elements: Vec<TruthElement>,
    /// Pairs of operators that continue one another (consecutive lines of a
    /// sentence). Reading order is broken on a page when content of another
    /// element is read between such a pair.
    #[serde(default)]
    pub continuity: Vec<(OpId, OpId)>,
}

impl TruthMap {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let map: TruthMap = serde_json::from_slice(bytes)?;
        if map.version != TRUTH_VERSION {
            return Err(Error::InvalidInput(format!("unsupported truth map version {}", map.version)));
        }
        Ok(map)
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("truth maps always serialize")
    }

    /// Element owning each operator.
    pub fn owners(&self) -> BTreeMap<OpId, usize> {
        let mut out = BTreeMap::new();
        for (i, e) in self.elements.iter().enumerate() {
            for op in e.ops.iter().chain(&e.optional_ops) {
                out.insert(*op, i);
            }
        }
        out
    }

    /// Checks that the truth describes `doc`: every operator exists,
    /// element operator sets are disjoint and role-specific data is
    /// present and consistent.
    pub fn check_against(&self, doc: &TaggedDocument) -> Result<()> {
        let mismatch = |m: String| Err(Error::TruthMismatch(m));
        let mut seen: BTreeMap<OpId, &str> = BTreeMap::new();
        let mut ids = BTreeSet::new();
        for e in &self.elements {
            if !ids.insert(e.id.as_str()) {
                return mismatch(format!("duplicate element id `{}`", e.id));
            }
            if e.ops.is_empty() {
                return mismatch(format!("element `{}` has no operators", e.id));
            }
            for op in e.ops.iter().chain(&e.optional_ops) {
                if doc.op(*op).is_none() {
                    return mismatch(format!("element `{}` references unknown operator {op}", e.id));
                }
                if let Some(other) = seen.insert(*op, &e.id) {
                    return mismatch(format!("operator {op} belongs to both `{other}` and `{}`", e.id));
                }
            }
            match e.role {
                TruthRole::Heading => match e.level {
                    Some(1..=6) => {}
                    _ => return mismatch(format!("heading `{}` needs a level between 1 and 6", e.id)),
                },
                TruthRole::Table => {
                    let Some(rows) = &e.rows else {
                        return mismatch(format!("table `{}` has no rows", e.id));
                    };
                    let cells: BTreeSet<OpId> = rows.iter().flatten().flat_map(|c| c.ops.iter().copied()).collect();
                    if !cells.is_subset(&e.ops) {
                        return mismatch(format!("cells of table `{}` reference operators outside it", e.id));
                    }
                }
                TruthRole::List => {
                    let Some(items) = &e.items else {
                        return mismatch(format!("list `{}` has no items", e.id));
                    };
                    let all: BTreeSet<OpId> = items.iter().flatten().copied().collect();
                    if !all.is_subset(&e.ops) {
                        return mismatch(format!("items of list `{}` reference operators outside it", e.id));
                    }
                }
                _ => {}
            }
        }
        for (a, b) in &self.continuity {
            if doc.op(*a).is_none() || doc.op(*b).is_none() {
                return mismatch(format!("continuity link {a} -> {b} references an unknown operator"));
            }
        }
        Ok(())
    }
}
