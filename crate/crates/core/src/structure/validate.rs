use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{OpId, StructChild, StructNode, TagKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    NotDocumentRoot,
    BadNesting,
    HeadingSkip,
    UnnumberedHeading,
    MisplacedCaption,
    DuplicateContent,
    ArtifactInTree,
    /// Table or list whose content lives on more than one page.
    SpansPages,
    /// Table rows with differing cell counts, i.e. merged or missing cells.
    IrregularTable,
}

/// One grammar violation. `path` lists child indices from the root to the
/// offending node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub path: Vec<usize>,
    pub tag: TagKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}@/", self.kind)?;
        let parts: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        write!(f, "{} ({}): {}", parts.join("/"), self.tag, self.detail)
    }
}

/// Where a tag may appear.
pub(crate) fn allowed_parent(child: TagKind, parent: TagKind) -> bool {
    use TagKind::*;
    match child {
        Document | Artifact => false,
        THead | TBody | TFoot => parent == Table,
        TR => matches!(parent, Table | THead | TBody | TFoot),
        TH | TD => parent == TR,
        LI => parent == L,
        Lbl | LBody => parent == LI,
        // container-only parents take nothing else
        _ => !matches!(parent, Table | THead | TBody | TFoot | TR | L | LI)
            || (child == Caption && parent == Table)
            || (child == L && parent == LI),
    }
}

/// Whether direct content references may sit under `tag`.
pub(crate) fn holds_content(tag: TagKind) -> bool {
    use TagKind::*;
    !matches!(tag, Table | THead | TBody | TFoot | TR | L | LI)
}

pub(crate) fn caption_ok_at(parent: TagKind, siblings: &[StructChild], index: usize) -> bool {
    if matches!(parent, TagKind::Figure | TagKind::Table) {
        return true;
    }
    let is_float = |c: Option<&StructChild>| {
        matches!(c, Some(StructChild::Node(n)) if matches!(n.tag, TagKind::Figure | TagKind::Table))
    };
    (index > 0 && is_float(siblings.get(index - 1))) || is_float(siblings.get(index + 1))
}

/// Checks the tag grammar of a whole tree: Document root, table and list
/// containment, heading sequence, caption placement, unique content, no
/// artifacts, single-page tables and lists, rectangular tables.
pub fn validate_tree(root: &StructNode) -> Vec<Violation> {
    let mut out = Vec::new();
    if root.tag != TagKind::Document {
        out.push(Violation {
            kind: ViolationKind::NotDocumentRoot,
            path: vec![],
            tag: root.tag,
            detail: "root element must be Document".into(),
        });
    }
    out.extend(validate_subtree(root));
    out
}

/// Like [`validate_tree`] without the Document-root requirement, for
/// checking a detached Table or L.
pub fn validate_subtree(root: &StructNode) -> Vec<Violation> {
    let mut v = Validator { out: Vec::new(), seen: HashSet::new(), prev_heading: 0 };
    v.node(root, None, &mut Vec::new());
    v.out
}

struct Validator {
    out: Vec<Violation>,
    seen: HashSet<OpId>,
    prev_heading: u8,
}

impl Validator {
    fn push(&mut self, kind: ViolationKind, path: &[usize], tag: TagKind, detail: String) {
        self.out.push(Violation { kind, path: path.to_vec(), tag, detail });
    }

    fn node(&mut self, node: &StructNode, parent: Option<TagKind>, path: &mut Vec<usize>) {
        if node.tag == TagKind::Artifact {
            self.push(ViolationKind::ArtifactInTree, path, node.tag, "artifacts must stay out of the tree".into());
        }
        if let Some(level) = node.tag.heading_level() {
            if level == 0 {
                self.push(ViolationKind::UnnumberedHeading, path, node.tag, "heading has no level".into());
            } else if level > self.prev_heading + 1 {
                let detail = if self.prev_heading == 0 {
                    format!("first heading is H{level}")
                } else {
                    format!("H{} followed by H{level}", self.prev_heading)
                };
                self.push(ViolationKind::HeadingSkip, path, node.tag, detail);
            }
            if level > 0 {
                self.prev_heading = level;
            }
        }
        if matches!(node.tag, TagKind::Table | TagKind::L) && parent.is_none_or(|p| p != TagKind::LI || node.tag != TagKind::L) {
            let pages: BTreeSet<u32> = node.content_refs().iter().map(|o| o.page).collect();
            if pages.len() > 1 {
                self.push(ViolationKind::SpansPages, path, node.tag, format!("content on pages {pages:?}"));
            }
        }
        if node.tag == TagKind::Table {
            self.check_rectangular(node, path);
        }

        for (i, child) in node.children.iter().enumerate() {
            path.push(i);
            match child {
                StructChild::Content(id) => {
                    if !self.seen.insert(*id) {
                        self.push(ViolationKind::DuplicateContent, path, node.tag, format!("operator {id} referenced twice"));
                    }
                    if !holds_content(node.tag) {
                        self.push(ViolationKind::BadNesting, path, node.tag, format!("content {id} directly under {}", node.tag));
                    }
                }
                StructChild::Node(c) => {
                    if c.tag == TagKind::Caption && !caption_ok_at(node.tag, &node.children, i) {
                        self.push(
                            ViolationKind::MisplacedCaption,
                            path,
                            c.tag,
                            "caption must be inside or next to a Figure or Table".into(),
                        );
                    } else if c.tag != TagKind::Artifact && !allowed_parent(c.tag, node.tag) {
                        self.push(ViolationKind::BadNesting, path, c.tag, format!("{} not allowed under {}", c.tag, node.tag));
                    }
                    self.node(c, Some(node.tag), path);
                }
            }
            path.pop();
        }
    }

    fn check_rectangular(&mut self, table: &StructNode, path: &[usize]) {
        let mut widths = BTreeSet::new();
        for child in table.child_nodes() {
            let rows: Vec<&StructNode> = if child.tag.is_table_section() {
                child.child_nodes().filter(|r| r.tag == TagKind::TR).collect()
            } else if child.tag == TagKind::TR {
                vec![child]
            } else {
                vec![]
            };
            for row in rows {
                widths.insert(row.child_nodes().filter(|c| c.tag.is_cell()).count());
            }
        }
        if widths.len() > 1 {
            self.push(ViolationKind::IrregularTable, path, TagKind::Table, format!("row widths {widths:?}"));
        }
    }
}
