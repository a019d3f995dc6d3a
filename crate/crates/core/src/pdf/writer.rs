//! Serializes a structure tree and metadata into a tagged copy of the source
//! PDF: every operator wrapped in marked content, a fresh StructTreeRoot with
//! a ParentTree, and the PDF/UA catalog entries.

use std::collections::{BTreeMap, HashMap};

use lopdf::content::{Content, Operation};
use lopdf::{text_string, Dictionary, Document, Object, ObjectId, Stream, StringFormat};

use super::interp::{interpret, Resources};
use super::meta::is_valid_language_tag;
use super::reader::decode_page_operations;
use crate::error::{Error, Result};
use crate::model::{DocMeta, OpId, Scope, StructChild, StructNode, TagKind, TaggedDocument};
use crate::structure::validate_tree;

/// Writes `tree` and `meta` into a tagged copy of `doc`. Operators the tree
/// does not reference are marked as artifacts.
pub fn write_tagged_pdf(doc: &TaggedDocument, tree: &StructNode, meta: &DocMeta) -> Result<Vec<u8>> {
    let violations = validate_tree(tree);
    if !violations.is_empty() {
        return Err(Error::InvalidTree(violations));
    }
    if meta.title.trim().is_empty() {
        return Err(Error::MissingMeta("title"));
    }
    if !is_valid_language_tag(&meta.language) {
        return Err(Error::InvalidLanguageTag(meta.language.clone()));
    }

    // mcids per page in reading order, plus the tag of the owning element
    let mut mcids: HashMap<OpId, u32> = HashMap::new();
    let mut owner_tag: HashMap<OpId, TagKind> = HashMap::new();
    let mut next_mcid: BTreeMap<u32, u32> = BTreeMap::new();
    assign_mcids(tree, &mut mcids, &mut owner_tag, &mut next_mcid, doc)?;

    let mut pdf = Document::load_mem(&doc.source_bytes)
        .map_err(|e| Error::malformed(format!("cannot reload source document: {e}")))?;
    let page_ids: Vec<ObjectId> = pdf.get_pages().into_values().collect();
    if page_ids.len() != doc.pages.len() {
        return Err(Error::malformed("source document does not match the parsed page count"));
    }

    for (index, page_id) in page_ids.iter().enumerate() {
        let index = index as u32;
        let content = rewrite_page_content(&pdf, *page_id, index, &mcids, &owner_tag)?;
        let stream_id = pdf.add_object(Stream::new(Dictionary::new(), content));
        let page = pdf.get_dictionary_mut(*page_id).map_err(|e| Error::malformed(e.to_string()))?;
        page.set("Contents", Object::Reference(stream_id));
        page.set("StructParents", Object::Integer(i64::from(index)));
        page.set("Tabs", Object::Name(b"S".to_vec()));
    }

    let root_id = pdf.new_object_id();
    let mut parent_tree: BTreeMap<u32, BTreeMap<u32, ObjectId>> = BTreeMap::new();
    let mut builder = ElemBuilder { pdf: &mut pdf, page_ids: &page_ids, mcids: &mcids, parent_tree: &mut parent_tree };
    let doc_elem = builder.build(tree, root_id)?;

    let nums: Vec<Object> = (0..page_ids.len() as u32)
        .flat_map(|page| {
            let refs = parent_tree
                .get(&page)
                .map(|m| m.values().map(|id| Object::Reference(*id)).collect())
                .unwrap_or_default();
            [Object::Integer(i64::from(page)), Object::Array(refs)]
        })
        .collect();
    let parent_tree_id = pdf.add_object(Dictionary::from_iter([("Nums", Object::Array(nums))]));

    let mut root = Dictionary::new();
    root.set("Type", Object::Name(b"StructTreeRoot".to_vec()));
    root.set("K", Object::Array(vec![Object::Reference(doc_elem)]));
    root.set("ParentTree", Object::Reference(parent_tree_id));
    root.set("ParentTreeNextKey", Object::Integer(page_ids.len() as i64));
    pdf.set_object(root_id, root);

    let metadata_id = pdf.add_object(xmp_stream(meta));
    let info_id = pdf.add_object(Dictionary::from_iter([
        ("Title", text_string(&meta.title)),
        ("Author", text_string(&meta.author)),
        ("Producer", Object::string_literal("pdf-remediate")),
    ]));
    let catalog = pdf.catalog_mut().map_err(|e| Error::malformed(e.to_string()))?;
    catalog.set("StructTreeRoot", Object::Reference(root_id));
    catalog.set("MarkInfo", Dictionary::from_iter([("Marked", Object::Boolean(true))]));
    catalog.set("ViewerPreferences", Dictionary::from_iter([("DisplayDocTitle", Object::Boolean(true))]));
    catalog.set("Lang", Object::String(meta.language.as_bytes().to_vec(), StringFormat::Literal));
    catalog.set("Metadata", Object::Reference(metadata_id));
    pdf.trailer.set("Info", Object::Reference(info_id));
    pdf.trailer.remove(b"ID");

    pdf.prune_objects();
    let mut out = Vec::new();
    pdf.save_to(&mut out)?;
    Ok(out)
}

fn assign_mcids(
    node: &StructNode,
    mcids: &mut HashMap<OpId, u32>,
    owner_tag: &mut HashMap<OpId, TagKind>,
    next: &mut BTreeMap<u32, u32>,
    doc: &TaggedDocument,
) -> Result<()> {
    for child in &node.children {
        match child {
            StructChild::Content(id) => {
                if doc.op(*id).is_none() {
                    return Err(Error::UnresolvedContent(*id));
                }
                let counter = next.entry(id.page).or_insert(0);
                mcids.insert(*id, *counter);
                owner_tag.insert(*id, node.tag);
                *counter += 1;
            }
            StructChild::Node(n) => assign_mcids(n, mcids, owner_tag, next, doc)?,
        }
    }
    Ok(())
}

const MARKED_CONTENT_OPS: [&str; 5] = ["BMC", "BDC", "EMC", "MP", "DP"];

fn rewrite_page_content(
    pdf: &Document,
    page_id: ObjectId,
    index: u32,
    mcids: &HashMap<OpId, u32>,
    owner_tag: &HashMap<OpId, TagKind>,
) -> Result<Vec<u8>> {
    let operations = decode_page_operations(pdf, page_id, index)?;
    let resources = Resources::for_page(pdf, page_id);
    let interpreted = interpret(pdf, &resources, &operations);

    let mut opens: HashMap<usize, Operation> = HashMap::new();
    let mut closes: HashMap<usize, usize> = HashMap::new();
    for (seq, op) in interpreted.iter().enumerate() {
        let id = OpId::new(index, seq as u32);
        let open = match mcids.get(&id) {
            Some(mcid) => {
                let tag = owner_tag.get(&id).copied().unwrap_or(TagKind::Group).as_str();
                Operation::new(
                    "BDC",
                    vec![
                        Object::Name(tag.as_bytes().to_vec()),
                        Dictionary::from_iter([("MCID", Object::Integer(i64::from(*mcid)))]).into(),
                    ],
                )
            }
            None => Operation::new("BMC", vec![Object::Name(b"Artifact".to_vec())]),
        };
        opens.insert(op.range.start, open);
        *closes.entry(op.range.end - 1).or_insert(0) += 1;
    }

    let mut out = Vec::with_capacity(operations.len() + 2 * interpreted.len());
    for (i, op) in operations.into_iter().enumerate() {
        if let Some(open) = opens.remove(&i) {
            out.push(open);
        }
        let last = i;
        if !MARKED_CONTENT_OPS.contains(&op.operator.as_str()) {
            out.push(op);
        }
        for _ in 0..closes.get(&last).copied().unwrap_or(0) {
            out.push(Operation::new("EMC", vec![]));
        }
    }
    Content { operations: out }.encode().map_err(|e| Error::malformed_at(Some(index), None, e.to_string()))
}

struct ElemBuilder<'a> {
    pdf: &'a mut Document,
    page_ids: &'a [ObjectId],
    mcids: &'a HashMap<OpId, u32>,
    parent_tree: &'a mut BTreeMap<u32, BTreeMap<u32, ObjectId>>,
}

impl ElemBuilder<'_> {
    fn build(&mut self, node: &StructNode, parent: ObjectId) -> Result<ObjectId> {
        let id = self.pdf.new_object_id();
        let first_page = node.content_refs().first().map(|op| op.page);
        let mut kids = Vec::with_capacity(node.children.len());
        for child in &node.children {
            match child {
                StructChild::Node(n) => kids.push(Object::Reference(self.build(n, id)?)),
                StructChild::Content(op) => {
                    let mcid = self.mcids[op];
                    self.parent_tree.entry(op.page).or_default().insert(mcid, id);
                    if Some(op.page) == first_page {
                        kids.push(Object::Integer(i64::from(mcid)));
                    } else {
                        kids.push(
                            Dictionary::from_iter([
                                ("Type", Object::Name(b"MCR".to_vec())),
                                ("Pg", Object::Reference(self.page_ids[op.page as usize])),
                                ("MCID", Object::Integer(i64::from(mcid))),
                            ])
                            .into(),
                        );
                    }
                }
            }
        }

        let mut dict = Dictionary::new();
        dict.set("Type", Object::Name(b"StructElem".to_vec()));
        dict.set("S", Object::Name(node.tag.as_str().as_bytes().to_vec()));
        dict.set("P", Object::Reference(parent));
        if let Some(page) = first_page {
            dict.set("Pg", Object::Reference(self.page_ids[page as usize]));
        }
        dict.set("K", Object::Array(kids));
        if let Some(alt) = &node.attributes.alt_text {
            dict.set("Alt", text_string(alt));
        }
        if let Some(scope) = node.attributes.scope {
            let name: &[u8] = match scope {
                Scope::Row => b"Row",
                Scope::Column => b"Column",
                Scope::Both => b"Both",
            };
            dict.set(
                "A",
                Dictionary::from_iter([("O", Object::Name(b"Table".to_vec())), ("Scope", Object::Name(name.to_vec()))]),
            );
        }
        self.pdf.set_object(id, dict);
        Ok(id)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn xmp_stream(meta: &DocMeta) -> Stream {
    let packet = format!(
        concat!(
            "<?xpacket begin=\"\u{feff}\" id=\"W5M0MpCehiHzreSzNTczkc9d\"?>\n",
            "<x:xmpmeta xmlns:x=\"adobe:ns:meta/\">\n",
            "<rdf:RDF xmlns:rdf=\"http://www.w3.org/1999/02/22-rdf-syntax-ns#\">\n",
            "<rdf:Description rdf:about=\"\" xmlns:dc=\"http://purl.org/dc/elements/1.1/\" ",
            "xmlns:pdfuaid=\"http://www.aiim.org/pdfua/ns/id/\">\n",
            "<dc:title><rdf:Alt><rdf:li xml:lang=\"x-default\">{title}</rdf:li></rdf:Alt></dc:title>\n",
            "<dc:creator><rdf:Seq><rdf:li>{author}</rdf:li></rdf:Seq></dc:creator>\n",
            "<dc:language><rdf:Bag><rdf:li>{lang}</rdf:li></rdf:Bag></dc:language>\n",
            "<pdfuaid:part>1</pdfuaid:part>\n",
            "</rdf:Description>\n",
            "</rdf:RDF>\n",
            "</x:xmpmeta>\n",
            "<?xpacket end=\"w\"?>"
        ),
        title = xml_escape(&meta.title),
        author = xml_escape(&meta.author),
        lang = xml_escape(&meta.language),
    );
    let dict = Dictionary::from_iter([
        ("Type", Object::Name(b"Metadata".to_vec())),
        ("Subtype", Object::Name(b"XML".to_vec())),
    ]);
    Stream::new(dict, packet.into_bytes()).with_compression(false)
}
