//! Document model shared by every stage: pages of positioned content
//! operators, the logical structure tree and document metadata.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::geometry::Rect;

/// Stable operator identifier: page index plus the operator's position among
/// the page's content operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpId {
    pub page: u32,
    pub seq: u32,
}

impl OpId {
    pub const fn new(page: u32, seq: u32) -> Self {
        Self { page, seq }
    }
}

impl fmt::Display for OpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.page, self.seq)
    }
}

impl FromStr for OpId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (page, seq) = s.split_once(':').ok_or_else(|| format!("bad op id `{s}`"))?;
        let page = page.trim().parse().map_err(|_| format!("bad op id `{s}`"))?;
        let seq = seq.trim().parse().map_err(|_| format!("bad op id `{s}`"))?;
        Ok(OpId { page, seq })
    }
}

impl Serialize for OpId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OpId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpKind {
    TextRun,
    Image,
    Path,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FontStyle {
    pub bold: bool,
    pub italic: bool,
}

/// One painting operator of a page content stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentOp {
    pub id: OpId,
    pub kind: OpKind,
    pub bbox: Rect,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font_style: Option<FontStyle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcid: Option<u32>,
    /// Operator sits inside an `/Artifact` marked-content sequence.
    #[serde(default)]
    pub artifact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub index: u32,
    pub width: f64,
    pub height: f64,
    pub ops: Vec<ContentOp>,
}

impl Page {
    pub fn bounds(&self) -> Rect {
        Rect::new(0.0, 0.0, self.width, self.height)
    }

    pub fn op(&self, seq: u32) -> Option<&ContentOp> {
        // ops are stored in sequence order, so seq doubles as the index
        self.ops.get(seq as usize).filter(|op| op.id.seq == seq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TagKind {
    Document,
    P,
    /// Level-less heading, only ever found in uploaded files.
    H,
    H1,
    H2,
    H3,
    H4,
    H5,
    H6,
    L,
    LI,
    Lbl,
    LBody,
    Table,
    THead,
    TBody,
    TFoot,
    TR,
    TH,
    TD,
    Figure,
    Formula,
    Caption,
    Artifact,
    /// Grouping element with no role of its own (Sect, Div, Part, Span, ...).
    Group,
}

impl TagKind {
    pub fn heading(level: u8) -> Option<TagKind> {
        Some(match level {
            1 => TagKind::H1,
            2 => TagKind::H2,
            3 => TagKind::H3,
            4 => TagKind::H4,
            5 => TagKind::H5,
            6 => TagKind::H6,
            _ => return None,
        })
    }

    /// Level of a numbered heading; `Some(0)` for the level-less `H`.
    pub fn heading_level(self) -> Option<u8> {
        Some(match self {
            TagKind::H => 0,
            TagKind::H1 => 1,
            TagKind::H2 => 2,
            TagKind::H3 => 3,
            TagKind::H4 => 4,
            TagKind::H5 => 5,
            TagKind::H6 => 6,
            _ => return None,
        })
    }

    pub fn is_heading(self) -> bool {
        self.heading_level().is_some()
    }

    pub fn is_table_section(self) -> bool {
        matches!(self, TagKind::THead | TagKind::TBody | TagKind::TFoot)
    }

    pub fn is_cell(self) -> bool {
        matches!(self, TagKind::TH | TagKind::TD)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TagKind::Document => "Document",
            TagKind::P => "P",
            TagKind::H => "H",
            TagKind::H1 => "H1",
            TagKind::H2 => "H2",
            TagKind::H3 => "H3",
            TagKind::H4 => "H4",
            TagKind::H5 => "H5",
            TagKind::H6 => "H6",
            TagKind::L => "L",
            TagKind::LI => "LI",
            TagKind::Lbl => "Lbl",
            TagKind::LBody => "LBody",
            TagKind::Table => "Table",
            TagKind::THead => "THead",
            TagKind::TBody => "TBody",
            TagKind::TFoot => "TFoot",
            TagKind::TR => "TR",
            TagKind::TH => "TH",
            TagKind::TD => "TD",
            TagKind::Figure => "Figure",
            TagKind::Formula => "Formula",
            TagKind::Caption => "Caption",
            TagKind::Artifact => "Artifact",
            TagKind::Group => "Div",
        }
    }

    /// Maps a standard structure type name onto a tag. Unknown or grouping
    /// types map to [`TagKind::Group`].
    pub fn from_name(name: &str) -> TagKind {
        match name {
            "Document" => TagKind::Document,
            "P" => TagKind::P,
            "H" => TagKind::H,
            "H1" => TagKind::H1,
            "H2" => TagKind::H2,
            "H3" => TagKind::H3,
            "H4" => TagKind::H4,
            "H5" => TagKind::H5,
            "H6" => TagKind::H6,
            "L" => TagKind::L,
            "LI" => TagKind::LI,
            "Lbl" => TagKind::Lbl,
            "LBody" => TagKind::LBody,
            "Table" => TagKind::Table,
            "THead" => TagKind::THead,
            "TBody" => TagKind::TBody,
            "TFoot" => TagKind::TFoot,
            "TR" => TagKind::TR,
            "TH" => TagKind::TH,
            "TD" => TagKind::TD,
            "Figure" => TagKind::Figure,
            "Formula" => TagKind::Formula,
            "Caption" => TagKind::Caption,
            "Artifact" => TagKind::Artifact,
            _ => TagKind::Group,
        }
    }

    pub fn is_standard_name(name: &str) -> bool {
        TagKind::from_name(name) != TagKind::Group || name == "Div"
    }
}

impl fmt::Display for TagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for TagKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for TagKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(TagKind::from_name(&s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Row,
    Column,
    Both,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attributes {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alt_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<Scope>,
}

impl Attributes {
    pub fn is_empty(&self) -> bool {
        self.alt_text.is_none() && self.scope.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StructChild {
    Node(StructNode),
    Content(OpId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructNode {
    pub tag: TagKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<StructChild>,
    #[serde(default, skip_serializing_if = "Attributes::is_empty")]
    pub attributes: Attributes,
}

impl StructNode {
    pub fn new(tag: TagKind) -> Self {
        Self { tag, children: Vec::new(), attributes: Attributes::default() }
    }

    pub fn with_children(tag: TagKind, children: Vec<StructChild>) -> Self {
        Self { tag, children, attributes: Attributes::default() }
    }

    pub fn with_content<I: IntoIterator<Item = OpId>>(tag: TagKind, ops: I) -> Self {
        Self::with_children(tag, ops.into_iter().map(StructChild::Content).collect())
    }

    pub fn push_node(&mut self, node: StructNode) {
        self.children.push(StructChild::Node(node));
    }

    pub fn child_nodes(&self) -> impl Iterator<Item = &StructNode> {
        self.children.iter().filter_map(|c| match c {
            StructChild::Node(n) => Some(n),
            StructChild::Content(_) => None,
        })
    }

    /// Every content reference below this node, in reading order.
    pub fn content_refs(&self) -> Vec<OpId> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs(&self, out: &mut Vec<OpId>) {
        for child in &self.children {
            match child {
                StructChild::Content(id) => out.push(*id),
                StructChild::Node(n) => n.collect_refs(out),
            }
        }
    }

    pub fn content_set(&self) -> BTreeSet<OpId> {
        self.content_refs().into_iter().collect()
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a StructNode, &[&'a StructNode])) {
        fn go<'a>(
            node: &'a StructNode,
            path: &mut Vec<&'a StructNode>,
            f: &mut impl FnMut(&'a StructNode, &[&'a StructNode]),
        ) {
            f(node, path);
            path.push(node);
            for child in node.child_nodes() {
                go(child, path, f);
            }
            path.pop();
        }
        go(self, &mut Vec::new(), f);
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_, _| n += 1);
        n
    }
}

/// Entries written automatically for PDF/UA conformance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UaFlags {
    /// `/MarkInfo << /Marked true >>`
    pub marked: bool,
    /// `/ViewerPreferences << /DisplayDocTitle true >>`
    pub display_doc_title: bool,
    /// `pdfuaid:part` in the XMP packet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ua_part: Option<u8>,
    /// `/Tabs /S` on every page.
    pub tab_order_structure: bool,
}

impl UaFlags {
    pub const FULL: UaFlags = UaFlags {
        marked: true,
        display_doc_title: true,
        ua_part: Some(1),
        tab_order_structure: true,
    };

    pub fn is_complete(&self) -> bool {
        *self == Self::FULL
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocMeta {
    pub title: String,
    pub author: String,
    pub language: String,
    pub ua_flags: UaFlags,
}

/// A parsed PDF. Immutable once built; editing produces new trees and
/// metadata which are handed to the writer.
#[derive(Debug, Clone)]
pub struct TaggedDocument {
    pub pages: Vec<Page>,
    pub struct_tree: Option<StructNode>,
    pub meta: DocMeta,
    pub source_bytes: Arc<Vec<u8>>,
}

impl TaggedDocument {
    pub fn op(&self, id: OpId) -> Option<&ContentOp> {
        self.pages.get(id.page as usize)?.op(id.seq)
    }

    pub fn all_ops(&self) -> impl Iterator<Item = &ContentOp> {
        self.pages.iter().flat_map(|p| p.ops.iter())
    }

    pub fn op_count(&self) -> usize {
        self.pages.iter().map(|p| p.ops.len()).sum()
    }

    /// Operators referenced from the structure tree, in reading order.
    pub fn tagged_ops(&self) -> Vec<OpId> {
        self.struct_tree.as_ref().map(StructNode::content_refs).unwrap_or_default()
    }

    /// `(page, mcid) -> op` lookup for ops carrying marked-content ids.
    pub fn mcid_index(&self) -> BTreeMap<(u32, u32), OpId> {
        self.all_ops()
            .filter_map(|op| op.mcid.map(|m| ((op.id.page, m), op.id)))
            .collect()
    }

    /// SHA-256 of the original file, hex encoded.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.source_bytes.as_slice()))
    }
}
