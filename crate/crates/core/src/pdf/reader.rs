use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use lopdf::content::Content;
use lopdf::{decode_text_string, Dictionary, Document, Object, ObjectId};

use super::fonts::{deref, deref_dict, number};
use super::interp::{interpret, Resources};
use crate::error::{Error, Result};
use crate::model::{
    Attributes, ContentOp, DocMeta, OpId, Page, Scope, StructChild, StructNode, TagKind, TaggedDocument, UaFlags,
};

/// Parses a PDF into pages of positioned operators, the existing structure
/// tree (if any) and metadata.
pub fn parse_pdf(bytes: &[u8]) -> Result<TaggedDocument> {
    if bytes.is_empty() {
        return Err(Error::malformed_at(None, Some(0), "empty input"));
    }
    let header_window = &bytes[..bytes.len().min(1024)];
    if !header_window.windows(5).any(|w| w == b"%PDF-") {
        return Err(Error::malformed_at(None, Some(0), "missing %PDF- header"));
    }
    let pdf = Document::load_mem(bytes).map_err(|e| Error::malformed(format!("cannot load document: {e}")))?;
    if pdf.trailer.has(b"Encrypt") {
        return Err(Error::malformed("encrypted documents are not supported"));
    }

    let page_ids: Vec<ObjectId> = pdf.get_pages().into_values().collect();
    let mut pages = Vec::with_capacity(page_ids.len());
    for (index, page_id) in page_ids.iter().enumerate() {
        pages.push(read_page(&pdf, index as u32, *page_id)?);
    }

    let mut doc = TaggedDocument {
        pages,
        struct_tree: None,
        meta: read_meta(&pdf, &page_ids),
        source_bytes: Arc::new(bytes.to_vec()),
    };
    doc.struct_tree = read_struct_tree(&pdf, &page_ids, &doc);
    Ok(doc)
}

pub(crate) fn decode_page_operations(pdf: &Document, page_id: ObjectId, index: u32) -> Result<Vec<lopdf::content::Operation>> {
    let data = pdf.get_page_content(page_id);
    Content::decode(&data)
        .map(|c| c.operations)
        .map_err(|e| Error::malformed_at(Some(index), None, format!("bad content stream: {e}")))
}

fn read_page(pdf: &Document, index: u32, page_id: ObjectId) -> Result<Page> {
    let media_box = inherited(pdf, page_id, b"MediaBox")
        .and_then(|o| o.as_array().ok())
        .map(|a| a.iter().filter_map(|o| number(deref(pdf, o))).collect::<Vec<_>>())
        .filter(|v| v.len() == 4)
        .ok_or_else(|| Error::malformed_at(Some(index), None, "page has no usable /MediaBox"))?;
    let width = (media_box[2] - media_box[0]).abs();
    let height = (media_box[3] - media_box[1]).abs();
    if !(width > 0.0 && height > 0.0) {
        return Err(Error::malformed_at(Some(index), None, "page has an empty /MediaBox"));
    }

    let operations = decode_page_operations(pdf, page_id, index)?;
    let resources = Resources::for_page(pdf, page_id);
    let ops = interpret(pdf, &resources, &operations)
        .into_iter()
        .enumerate()
        .map(|(seq, op)| ContentOp {
            id: OpId::new(index, seq as u32),
            kind: op.kind,
            bbox: op.bbox,
            text: op.text,
            font_size: op.font_size,
            font_style: op.font_style,
            mcid: op.mcid,
            artifact: op.artifact,
        })
        .collect();
    Ok(Page { index, width, height, ops })
}

fn inherited<'a>(pdf: &'a Document, mut node: ObjectId, key: &[u8]) -> Option<&'a Object> {
    for _ in 0..32 {
        let dict = pdf.get_dictionary(node).ok()?;
        if let Ok(v) = dict.get(key) {
            return Some(deref(pdf, v));
        }
        node = dict.get(b"Parent").ok()?.as_reference().ok()?;
    }
    None
}

fn text_of(pdf: &Document, obj: Option<&Object>) -> Option<String> {
    obj.map(|o| deref(pdf, o)).and_then(|o| decode_text_string(o).ok())
}

fn read_meta(pdf: &Document, page_ids: &[ObjectId]) -> DocMeta {
    let catalog = pdf.catalog().ok();
    let info = deref_dict(pdf, pdf.trailer.get(b"Info").ok());
    let xmp = catalog
        .and_then(|c| c.get(b"Metadata").ok())
        .map(|o| deref(pdf, o))
        .and_then(|o| o.as_stream().ok())
        .and_then(|s| s.decompressed_content().ok().or_else(|| Some(s.content.clone())))
        .map(|b| String::from_utf8_lossy(&b).into_owned());

    let title = text_of(pdf, info.and_then(|i| i.get(b"Title").ok()))
        .or_else(|| xmp.as_deref().and_then(|x| xmp_value(x, "dc:title")))
        .unwrap_or_default();
    let author = text_of(pdf, info.and_then(|i| i.get(b"Author").ok()))
        .or_else(|| xmp.as_deref().and_then(|x| xmp_value(x, "dc:creator")))
        .unwrap_or_default();
    let language = text_of(pdf, catalog.and_then(|c| c.get(b"Lang").ok())).unwrap_or_default();

    let marked = catalog
        .and_then(|c| deref_dict(pdf, c.get(b"MarkInfo").ok()))
        .and_then(|m| m.get(b"Marked").ok())
        .and_then(|o| o.as_bool().ok())
        .unwrap_or(false);
    let display_doc_title = catalog
        .and_then(|c| deref_dict(pdf, c.get(b"ViewerPreferences").ok()))
        .and_then(|v| v.get(b"DisplayDocTitle").ok())
        .and_then(|o| o.as_bool().ok())
        .unwrap_or(false);
    let ua_part = xmp.as_deref().and_then(|x| xmp_value(x, "pdfuaid:part")).and_then(|v| v.trim().parse().ok());
    let tab_order_structure = !page_ids.is_empty()
        && page_ids.iter().all(|id| {
            pdf.get_dictionary(*id)
                .ok()
                .and_then(|d| d.get(b"Tabs").ok())
                .and_then(|o| o.as_name().ok())
                == Some(b"S".as_slice())
        });

    DocMeta {
        title,
        author,
        language,
        ua_flags: UaFlags { marked, display_doc_title, ua_part, tab_order_structure },
    }
}

/// Extracts a simple XMP property, either as element text (possibly wrapped
/// in an rdf container) or as an attribute.
fn xmp_value(xmp: &str, prop: &str) -> Option<String> {
    for quote in ['"', '\''] {
        let attr = format!(" {prop}={quote}");
        if let Some(at) = xmp.find(&attr) {
            let rest = &xmp[at + attr.len()..];
            return Some(xml_unescape(&rest[..rest.find(quote)?]));
        }
    }
    let open = format!("<{prop}");
    let start = xmp.find(&open)?;
    let rest = &xmp[start + open.len()..];
    let body_start = rest.find('>')? + 1;
    let close = format!("</{prop}>");
    let body = &rest[body_start..rest.find(&close)?];
    let text = match body.find("<rdf:li") {
        Some(li) => {
            let li_body = &body[li..];
            let s = li_body.find('>')? + 1;
            let e = li_body.find("</rdf:li>")?;
            &li_body[s..e]
        }
        None => body,
    };
    Some(xml_unescape(text.trim()))
}

pub(crate) fn xml_unescape(s: &str) -> String {
    s.replace("&lt;", "<").replace("&gt;", ">").replace("&quot;", "\"").replace("&apos;", "'").replace("&amp;", "&")
}

struct TreeReader<'a> {
    pdf: &'a Document,
    page_index: HashMap<ObjectId, u32>,
    mcids: BTreeMap<(u32, u32), OpId>,
    role_map: Option<&'a Dictionary>,
    visited: HashSet<ObjectId>,
}

fn read_struct_tree(pdf: &Document, page_ids: &[ObjectId], doc: &TaggedDocument) -> Option<StructNode> {
    let catalog = pdf.catalog().ok()?;
    let root = deref_dict(pdf, catalog.get(b"StructTreeRoot").ok())?;
    let mut reader = TreeReader {
        pdf,
        page_index: page_ids.iter().enumerate().map(|(i, id)| (*id, i as u32)).collect(),
        mcids: doc.mcid_index(),
        role_map: deref_dict(pdf, root.get(b"RoleMap").ok()),
        visited: HashSet::new(),
    };
    let mut top = Vec::new();
    if let Ok(k) = root.get(b"K") {
        reader.read_kids(k, None, &mut top);
    }
    match top.as_slice() {
        [StructChild::Node(n)] if n.tag == TagKind::Document => top.pop().and_then(|c| match c {
            StructChild::Node(n) => Some(n),
            StructChild::Content(_) => None,
        }),
        _ => Some(StructNode::with_children(TagKind::Document, top)),
    }
}

impl<'a> TreeReader<'a> {
    fn resolve_role(&self, name: &[u8]) -> TagKind {
        let mut current = String::from_utf8_lossy(name).into_owned();
        for _ in 0..8 {
            let kind = TagKind::from_name(&current);
            if kind != TagKind::Group || current == "Div" {
                return kind;
            }
            let Some(mapped) = self
                .role_map
                .and_then(|m| m.get(current.as_bytes()).ok())
                .and_then(|o| o.as_name().ok())
            else {
                return TagKind::Group;
            };
            current = String::from_utf8_lossy(mapped).into_owned();
        }
        TagKind::Group
    }

    fn page_of(&self, obj: Option<&Object>) -> Option<u32> {
        obj.and_then(|o| o.as_reference().ok()).and_then(|id| self.page_index.get(&id).copied())
    }

    fn read_kids(&mut self, k: &'a Object, page: Option<u32>, out: &mut Vec<StructChild>) {
        match k {
            Object::Array(items) => {
                for item in items {
                    self.read_kids(item, page, out);
                }
            }
            Object::Integer(mcid) => self.push_mcid(page, *mcid, out),
            Object::Reference(id) => {
                if !self.visited.insert(*id) {
                    return;
                }
                if let Ok(obj) = self.pdf.get_object(*id) {
                    self.read_kids(obj, page, out);
                }
            }
            Object::Dictionary(dict) => {
                let ty = dict.get(b"Type").ok().and_then(|o| o.as_name().ok());
                match ty {
                    Some(b"MCR") => {
                        let pg = self.page_of(dict.get(b"Pg").ok()).or(page);
                        if let Some(mcid) = dict.get(b"MCID").ok().and_then(|o| o.as_i64().ok()) {
                            self.push_mcid(pg, mcid, out);
                        }
                    }
                    Some(b"OBJR") => {}
                    _ => {
                        if let Some(node) = self.read_elem(dict, page) {
                            out.push(StructChild::Node(node));
                        }
                    }
                }
            }
            _ => {}
        }
    }

    fn push_mcid(&self, page: Option<u32>, mcid: i64, out: &mut Vec<StructChild>) {
        let Some(page) = page else {
            log::warn!("marked-content id {mcid} without a page reference");
            return;
        };
        match u32::try_from(mcid).ok().and_then(|m| self.mcids.get(&(page, m))) {
            Some(id) => out.push(StructChild::Content(*id)),
            None => log::warn!("structure tree references unknown mcid {mcid} on page {page}"),
        }
    }

    fn read_elem(&mut self, dict: &'a Dictionary, page: Option<u32>) -> Option<StructNode> {
        let s = dict.get(b"S").ok().and_then(|o| o.as_name().ok())?;
        let tag = self.resolve_role(s);
        let page = self.page_of(dict.get(b"Pg").ok()).or(page);
        let mut node = StructNode::new(tag);
        node.attributes = self.read_attributes(dict);
        if let Ok(k) = dict.get(b"K") {
            let mut kids = Vec::new();
            self.read_kids(k, page, &mut kids);
            node.children = kids;
        }
        Some(node)
    }

    fn read_attributes(&self, dict: &Dictionary) -> Attributes {
        let alt_text = text_of(self.pdf, dict.get(b"Alt").ok());
        let mut scope = None;
        let mut visit = |a: &Dictionary| {
            if let Some(s) = a.get(b"Scope").ok().and_then(|o| o.as_name().ok()) {
                scope = match s {
                    b"Row" => Some(Scope::Row),
                    b"Column" => Some(Scope::Column),
                    b"Both" => Some(Scope::Both),
                    _ => scope,
                };
            }
        };
        match dict.get(b"A").ok().map(|o| deref(self.pdf, o)) {
            Some(Object::Dictionary(a)) => visit(a),
            Some(Object::Array(items)) => {
                for item in items {
                    if let Object::Dictionary(a) = deref(self.pdf, item) {
                        visit(a);
                    }
                }
            }
            _ => {}
        }
        Attributes { alt_text, scope }
    }
}
