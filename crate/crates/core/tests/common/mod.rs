//! Synthetic tagged documents with known scores: every element of a random
//! document is tagged correctly or damaged in one deliberate way, and the
//! expected CT/WT counts follow from those choices alone.
#![allow(dead_code)]

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use pdf_remediate::geometry::Rect;
use pdf_remediate::model::{ContentOp, DocMeta, OpId, OpKind, Page, StructNode, TagKind, TaggedDocument};
use pdf_remediate::scorer::{TruthCell, TruthElement, TruthMap, TruthRole, TRUTH_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Damage {
    None,
    /// Left out of the tree and not marked as artifact.
    Untagged,
    /// Left out of the tree but marked as artifact.
    Artifact,
    /// Tagged P instead of its own tag.
    AsParagraph,
    WrongLevel,
    NoAlt,
    /// Lists: all items in one LI. Tables: header row as TD.
    FlatStructure,
    /// Paragraph lines read in reverse.
    Reversed,
}

#[derive(Debug, Clone)]
pub struct Planned {
    pub role: TruthRole,
    pub page: u32,
    pub damage: Damage,
    /// Number of lines, list items or table rows.
    pub parts: usize,
    pub level: u8,
    pub requires_alt: bool,
    pub inline: bool,
}

fn damages(role: TruthRole) -> &'static [Damage] {
    use Damage::*;
    match role {
        TruthRole::Heading => &[None, Untagged, Artifact, AsParagraph, WrongLevel],
        TruthRole::Paragraph => &[None, Untagged, Artifact, Reversed],
        TruthRole::Figure | TruthRole::Formula => &[None, Untagged, AsParagraph, NoAlt],
        TruthRole::Caption => &[None, AsParagraph, Untagged],
        TruthRole::List | TruthRole::Table => &[None, AsParagraph, FlatStructure, Artifact],
        TruthRole::Artifact => &[None, Untagged],
    }
}

const ROLES: [TruthRole; 8] = [
    TruthRole::Heading,
    TruthRole::Paragraph,
    TruthRole::Figure,
    TruthRole::Formula,
    TruthRole::Caption,
    TruthRole::List,
    TruthRole::Table,
    TruthRole::Artifact,
];

pub fn random_plan(rng: &mut StdRng, pages: u32, len: usize, damage_rate: f64) -> Vec<Planned> {
    let mut plan: Vec<Planned> = (0..len)
        .map(|_| {
            let role = ROLES[rng.gen_range(0..ROLES.len())];
            let options = damages(role);
            let damage = if rng.gen_bool(damage_rate) { options[rng.gen_range(0..options.len())] } else { Damage::None };
            Planned {
                role,
                page: rng.gen_range(0..pages),
                damage,
                parts: rng.gen_range(1..=3),
                level: rng.gen_range(1..=4),
                requires_alt: rng.gen_bool(0.8),
                inline: role == TruthRole::Formula && rng.gen_bool(0.2),
            }
        })
        .collect();
    plan.sort_by_key(|p| p.page);
    plan
}

pub struct Built {
    pub doc: TaggedDocument,
    pub truth: TruthMap,
}

fn text_op(page: u32, seq: u32, kind: OpKind, artifact: bool) -> ContentOp {
    let y = 700.0 - 12.0 * seq as f64;
    ContentOp {
        id: OpId::new(page, seq),
        kind,
        bbox: Rect::new(72.0, y, 300.0, y + 10.0),
        text: (kind == OpKind::TextRun).then(|| format!("w{seq}")),
        font_size: (kind == OpKind::TextRun).then_some(10.0),
        font_style: None,
        mcid: None,
        artifact,
    }
}

fn leaf(tag: TagKind, ops: &[OpId]) -> StructNode {
    StructNode::with_content(tag, ops.iter().copied())
}

fn with_alt(mut n: StructNode, alt: bool) -> StructNode {
    if alt {
        n.attributes.alt_text = Some("described".into());
    }
    n
}

/// Builds the document, its truth and a tree carrying the planned damage.
pub fn build(plan: &[Planned], pages: u32) -> Built {
    let mut page_ops: Vec<Vec<ContentOp>> = vec![Vec::new(); pages as usize];
    let mut root = StructNode::new(TagKind::Document);
    let mut elements = Vec::new();
    let mut continuity = Vec::new();
    for (n, p) in plan.iter().enumerate() {
        let ops_on_page = &mut page_ops[p.page as usize];
        let artifact = p.damage == Damage::Artifact || p.role == TruthRole::Artifact && p.damage == Damage::None;
        let mut new_op = |kind: OpKind| {
            let seq = ops_on_page.len() as u32;
            ops_on_page.push(text_op(p.page, seq, kind, artifact));
            OpId::new(p.page, seq)
        };
        let id = format!("e{n}");
        let (element, node): (TruthElement, Option<StructNode>) = match p.role {
            TruthRole::Heading => {
                let ops = [new_op(OpKind::TextRun)];
                let mut e = TruthElement::new(id, p.role, ops);
                e.level = Some(p.level);
                let node = match p.damage {
                    Damage::AsParagraph => leaf(TagKind::P, &ops),
                    Damage::WrongLevel => leaf(TagKind::heading(p.level % 6 + 1).unwrap(), &ops),
                    _ => leaf(TagKind::heading(p.level).unwrap(), &ops),
                };
                (e, Some(node))
            }
            TruthRole::Paragraph => {
                let ops: Vec<OpId> = (0..p.parts).map(|_| new_op(OpKind::TextRun)).collect();
                continuity.extend(ops.windows(2).map(|w| (w[0], w[1])));
                let mut ordered = ops.clone();
                if p.damage == Damage::Reversed {
                    ordered.reverse();
                }
                (TruthElement::new(id, p.role, ops), Some(leaf(TagKind::P, &ordered)))
            }
            TruthRole::Figure | TruthRole::Formula => {
                let kind = if p.role == TruthRole::Figure { OpKind::Image } else { OpKind::TextRun };
                let ops = [new_op(kind)];
                let tag = if p.role == TruthRole::Figure { TagKind::Figure } else { TagKind::Formula };
                let mut e = TruthElement::new(id, p.role, ops);
                e.requires_alt = p.requires_alt || p.role == TruthRole::Formula;
                e.inline = p.inline;
                let node = match p.damage {
                    Damage::AsParagraph => leaf(TagKind::P, &ops),
                    Damage::NoAlt => leaf(tag, &ops),
                    _ => with_alt(leaf(tag, &ops), true),
                };
                (e, Some(node))
            }
            TruthRole::Caption => {
                let ops = [new_op(OpKind::TextRun)];
                let tag = if p.damage == Damage::AsParagraph { TagKind::P } else { TagKind::Caption };
                (TruthElement::new(id, p.role, ops), Some(leaf(tag, &ops)))
            }
            TruthRole::List => {
                let items: Vec<Vec<OpId>> = (0..p.parts + 1).map(|_| vec![new_op(OpKind::TextRun)]).collect();
                let all: Vec<OpId> = items.concat();
                let mut e = TruthElement::new(id, p.role, all.iter().copied());
                e.items = Some(items.iter().map(|i| i.iter().copied().collect()).collect());
                let node = match p.damage {
                    Damage::AsParagraph => leaf(TagKind::P, &all),
                    Damage::FlatStructure => {
                        let mut li = StructNode::new(TagKind::LI);
                        li.push_node(leaf(TagKind::LBody, &all));
                        let mut l = StructNode::new(TagKind::L);
                        l.push_node(li);
                        l
                    }
                    _ => {
                        let mut l = StructNode::new(TagKind::L);
                        for item in &items {
                            let mut li = StructNode::new(TagKind::LI);
                            li.push_node(leaf(TagKind::LBody, item));
                            l.push_node(li);
                        }
                        l
                    }
                };
                (e, Some(node))
            }
            TruthRole::Table => {
                let rows: Vec<Vec<OpId>> =
                    (0..p.parts + 1).map(|_| (0..2).map(|_| new_op(OpKind::TextRun)).collect()).collect();
                let all: Vec<OpId> = rows.concat();
                let mut e = TruthElement::new(id, p.role, all.iter().copied());
                e.rows = Some(
                    rows.iter()
                        .enumerate()
                        .map(|(r, row)| {
                            row.iter().map(|op| TruthCell { ops: [*op].into_iter().collect(), header: r == 0 }).collect()
                        })
                        .collect(),
                );
                let node = if p.damage == Damage::AsParagraph {
                    leaf(TagKind::P, &all)
                } else {
                    let mut t = StructNode::new(TagKind::Table);
                    for (r, row) in rows.iter().enumerate() {
                        let header = r == 0 && p.damage != Damage::FlatStructure;
                        let mut tr = StructNode::new(TagKind::TR);
                        for op in row {
                            tr.push_node(leaf(if header { TagKind::TH } else { TagKind::TD }, &[*op]));
                        }
                        t.push_node(tr);
                    }
                    t
                };
                (e, Some(node))
            }
            TruthRole::Artifact => {
                let ops = [new_op(OpKind::Path)];
                (TruthElement::new(id, p.role, ops), None)
            }
        };
        elements.push(element);
        if let Some(node) = node {
            if !matches!(p.damage, Damage::Untagged | Damage::Artifact) {
                root.push_node(node);
            }
        }
    }
    let pages = page_ops
        .into_iter()
        .enumerate()
        .map(|(i, ops)| Page { index: i as u32, width: 612.0, height: 792.0, ops })
        .collect();
    let doc = TaggedDocument {
        pages,
        struct_tree: Some(root),
        meta: DocMeta::default(),
        source_bytes: Arc::new(Vec::new()),
    };
    let truth = TruthMap { version: TRUTH_VERSION, document: "synthetic".into(), elements, continuity };
    Built { doc, truth }
}

/// Expected `(ct, wt)` per criterion, straight from the plan.
pub fn expected_counts(plan: &[Planned], pages: u32) -> [(u64, u64); 13] {
    let mut c = [(0u64, 0u64); 13];
    let mut add = |i: usize, ok: bool| {
        if ok {
            c[i].0 += 1
        } else {
            c[i].1 += 1
        }
    };
    let unmarked = |p: &Planned| p.damage == Damage::Untagged;
    add(0, !plan.iter().any(unmarked));
    for page in 0..pages {
        // a sentence that is never read, or read backwards, breaks the order
        let broken = |p: &Planned| {
            p.role == TruthRole::Paragraph && p.parts > 1 && matches!(p.damage, Damage::Reversed | Damage::Artifact)
        };
        let bad = plan.iter().any(|p| p.page == page && (unmarked(p) || broken(p)));
        add(1, !bad);
    }
    for p in plan {
        let tagged = !matches!(p.damage, Damage::Untagged | Damage::Artifact | Damage::AsParagraph);
        match p.role {
            TruthRole::Heading => {
                add(2, tagged);
                add(3, tagged && p.damage != Damage::WrongLevel);
            }
            TruthRole::Table => {
                add(4, tagged);
                add(5, tagged && p.damage != Damage::FlatStructure);
            }
            TruthRole::List => {
                add(6, tagged);
                add(7, tagged && p.damage != Damage::FlatStructure);
            }
            TruthRole::Figure => {
                add(8, tagged);
                if p.requires_alt {
                    add(9, tagged && p.damage != Damage::NoAlt);
                }
            }
            TruthRole::Formula if !p.inline => {
                add(10, tagged);
                add(11, tagged && p.damage != Damage::NoAlt);
            }
            TruthRole::Caption => add(12, tagged),
            _ => {}
        }
    }
    c
}

pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
