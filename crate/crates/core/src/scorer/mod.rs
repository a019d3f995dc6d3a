//! Tag-accuracy scoring: thirteen criteria, each scored as
//! `CT / (CT + WT) * 100`, computed by matching a document's structure
//! tree against an explicit ground truth.

mod report;
mod truth;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{OpId, StructNode, TagKind, TaggedDocument};

pub use report::{render_csv, render_table, CorpusColumn};
pub use truth::{TruthCell, TruthElement, TruthMap, TruthRole, TRUTH_VERSION};

/// A tree node matches a truth element when their operator sets overlap
/// with at least this Jaccard index.
pub const MATCH_JACCARD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    AllContentTagged,
    ReadingOrder,
    HeadingsTagged,
    HeadingsLevel,
    TablesTagged,
    TablesStructure,
    ListsTagged,
    ListsStructure,
    FiguresTagged,
    FiguresAltText,
    FormulasTagged,
    FormulasAltText,
    CaptionsTagged,
}

impl Criterion {
    pub const ALL: [Criterion; 13] = [
        Criterion::AllContentTagged,
        Criterion::ReadingOrder,
        Criterion::HeadingsTagged,
        Criterion::HeadingsLevel,
        Criterion::TablesTagged,
        Criterion::TablesStructure,
        Criterion::ListsTagged,
        Criterion::ListsStructure,
        Criterion::FiguresTagged,
        Criterion::FiguresAltText,
        Criterion::FormulasTagged,
        Criterion::FormulasAltText,
        Criterion::CaptionsTagged,
    ];

    /// Row label in reports; refinements of the row above start with `+`.
    pub fn label(self) -> &'static str {
        match self {
            Criterion::AllContentTagged => "All Content Tagged",
            Criterion::ReadingOrder => "Reading Order",
            Criterion::HeadingsTagged => "Headings Tagged",
            Criterion::HeadingsLevel => "+ Level",
            Criterion::TablesTagged => "Tables Tagged",
            Criterion::TablesStructure | Criterion::ListsStructure => "+ Structure",
            Criterion::ListsTagged => "Lists Tagged",
            Criterion::FiguresTagged => "Figures Tagged",
            Criterion::FiguresAltText | Criterion::FormulasAltText => "+ Alt Text",
            Criterion::FormulasTagged => "Formulas Tagged",
            Criterion::CaptionsTagged => "Captions Tagged",
        }
    }

    fn index(self) -> usize {
        Criterion::ALL.iter().position(|c| *c == self).expect("listed")
    }
}

/// `ct / (ct + wt) * 100`, undefined without elements.
pub fn percent(ct: u64, wt: u64) -> Option<f64> {
    let n = ct + wt;
    (n > 0).then(|| 100.0 * ct as f64 / n as f64)
}

/// Rounds to the one decimal reports show.
pub fn round1(x: f64) -> f64 {
    format!("{x:.1}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub criterion: Criterion,
    pub ct: u64,
    pub wt: u64,
    pub score: Option<f64>,
}

impl CriterionResult {
    pub fn new(criterion: Criterion, ct: u64, wt: u64) -> Self {
        Self { criterion, ct, wt, score: percent(ct, wt) }
    }

    pub fn total(&self) -> u64 {
        self.ct + self.wt
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub rows: Vec<CriterionResult>,
    /// Mean of the defined rows as shown (rounded to one decimal), so it
    /// can be recomputed from the printed table.
    pub average: Option<f64>,
}

impl ScoreReport {
    pub fn from_counts(counts: &[(u64, u64); 13]) -> Self {
        let rows: Vec<CriterionResult> =
            Criterion::ALL.iter().zip(counts).map(|(c, (ct, wt))| CriterionResult::new(*c, *ct, *wt)).collect();
        let defined: Vec<f64> = rows.iter().filter_map(|r| r.score.map(round1)).collect();
        let average = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
        Self { rows, average }
    }

    pub fn counts(&self) -> [(u64, u64); 13] {
        let mut out = [(0, 0); 13];
        for r in &self.rows {
            out[r.criterion.index()] = (r.ct, r.wt);
        }
        out
    }

    pub fn get(&self, c: Criterion) -> &CriterionResult {
        &self.rows[c.index()]
    }
}

struct NodeInfo<'a> {
    node: &'a StructNode,
    ops: BTreeSet<OpId>,
}

fn collect_nodes(root: &StructNode) -> Vec<NodeInfo<'_>> {
    let mut out = Vec::new();
    root.walk(&mut |n, _| out.push(NodeInfo { node: n, ops: n.content_set() }));
    out
}

fn jaccard(a: &BTreeSet<OpId>, b: &BTreeSet<OpId>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn minus(a: &BTreeSet<OpId>, b: &BTreeSet<OpId>) -> BTreeSet<OpId> {
    a.difference(b).copied().collect()
}

/// Best-overlapping node whose tag `accept`s, ignoring `exclude`d
/// operators on both sides. Ties go to the earlier node in pre-order.
fn best_match<'a, 'b>(
    nodes: &'b [NodeInfo<'a>],
    target: &BTreeSet<OpId>,
    exclude: &BTreeSet<OpId>,
    accept: impl Fn(TagKind) -> bool,
) -> Option<&'b NodeInfo<'a>> {
    let target = minus(target, exclude);
    let mut best: Option<(f64, &NodeInfo)> = None;
    for info in nodes.iter().filter(|n| accept(n.node.tag)) {
        let j = jaccard(&minus(&info.ops, exclude), &target);
        if j >= MATCH_JACCARD && best.is_none_or(|(b, _)| j > b) {
            best = Some((j, info));
        }
    }
    best.map(|(_, n)| n)
}

fn has_alt(node: &StructNode) -> bool {
    node.attributes.alt_text.as_deref().is_some_and(|t| !t.trim().is_empty())
}

/// Rows of a table node: every TR below it in order, with its TH/TD
/// children.
fn table_rows(table: &StructNode) -> Vec<Vec<&StructNode>> {
    let mut rows = Vec::new();
    table.walk(&mut |n, _| {
        if n.tag == TagKind::TR {
            rows.push(n.child_nodes().filter(|c| c.tag.is_cell()).collect());
        }
    });
    rows
}

/// Operators covered by a Caption node.
fn caption_ops(root: &StructNode) -> BTreeSet<OpId> {
    let mut out = BTreeSet::new();
    root.walk(&mut |n, _| {
        if n.tag == TagKind::Caption {
            out.extend(n.content_refs());
        }
    });
    out
}

#[derive(Default)]
struct Tally([(u64, u64); 13]);

impl Tally {
    fn add(&mut self, c: Criterion, ok: bool) {
        let e = &mut self.0[c.index()];
        if ok {
            e.0 += 1;
        } else {
            e.1 += 1;
        }
    }
}

/// Scores one document against its ground truth.
pub fn score_document(doc: &TaggedDocument, truth: &TruthMap) -> Result<ScoreReport> {
    truth.check_against(doc)?;
    let empty = StructNode::new(TagKind::Document);
    let tree = doc.struct_tree.as_ref().unwrap_or(&empty);
    let nodes = collect_nodes(tree);
    let sequence = tree.content_refs();
    let in_tree: BTreeSet<OpId> = sequence.iter().copied().collect();
    let marked = |op: &OpId| in_tree.contains(op) || doc.op(*op).is_some_and(|o| o.artifact);
    let mut t = Tally::default();

    t.add(Criterion::AllContentTagged, doc.all_ops().all(|o| marked(&o.id)));

    // reading order, page by page
    let owners = truth.owners();
    let position: BTreeMap<OpId, usize> = sequence.iter().enumerate().map(|(i, op)| (*op, i)).collect();
    let link_ok = |a: &OpId, b: &OpId| -> bool {
        let (Some(&pa), Some(&pb)) = (position.get(a), position.get(b)) else { return false };
        if pb <= pa {
            return false;
        }
        let (ea, eb) = (owners.get(a), owners.get(b));
        sequence[pa + 1..pb].iter().all(|op| {
            let e = owners.get(op);
            e.is_some() && (e == ea || e == eb)
        })
    };
    for page in &doc.pages {
        let complete = page.ops.iter().all(|o| marked(&o.id));
        let ordered = truth.continuity.iter().filter(|(a, _)| a.page == page.index).all(|(a, b)| link_ok(a, b));
        t.add(Criterion::ReadingOrder, complete && ordered);
    }

    let captions: BTreeSet<OpId> = truth
        .elements
        .iter()
        .filter(|e| e.role == TruthRole::Caption)
        .flat_map(|e| e.ops.iter().copied())
        .collect();

    // headings: the title's tag decides the expected level of the others
    let headings: Vec<&TruthElement> = truth.elements.iter().filter(|e| e.role == TruthRole::Heading).collect();
    let heading_match = |e: &TruthElement| {
        best_match(&nodes, &e.ops, &e.optional_ops, |tag| tag.is_heading() || (e.title && tag == TagKind::P))
    };
    let title_as_p = headings
        .iter()
        .filter(|e| e.title)
        .any(|e| heading_match(e).is_some_and(|n| n.node.tag == TagKind::P));
    for e in &headings {
        let m = heading_match(e);
        t.add(Criterion::HeadingsTagged, m.is_some());
        let level_ok = m.is_some_and(|n| {
            let expected = e.level.unwrap_or(1);
            if e.title {
                n.node.tag == TagKind::P || n.node.tag.heading_level() == Some(expected)
            } else {
                let expected = if title_as_p { expected.saturating_sub(1).max(1) } else { expected };
                n.node.tag.heading_level() == Some(expected)
            }
        });
        t.add(Criterion::HeadingsLevel, level_ok);
    }

    for e in &truth.elements {
        match e.role {
            TruthRole::Table => {
                let exclude: BTreeSet<OpId> = captions.union(&e.optional_ops).copied().collect();
                let m = best_match(&nodes, &e.ops, &exclude, |tag| tag == TagKind::Table);
                t.add(Criterion::TablesTagged, m.is_some());
                let structure_ok = m.is_some_and(|n| {
                    let rows = table_rows(n.node);
                    let truth_rows = e.rows.as_deref().unwrap_or_default();
                    rows.len() == truth_rows.len()
                        && rows.iter().zip(truth_rows).all(|(row, truth_row)| {
                            row.len() == truth_row.len()
                                && row.iter().zip(truth_row).all(|(cell, tc)| {
                                    (cell.tag == TagKind::TH) == tc.header
                                        && minus(&cell.content_set(), &exclude) == minus(&tc.ops, &exclude)
                                })
                        })
                });
                t.add(Criterion::TablesStructure, structure_ok);
            }
            TruthRole::List => {
                let m = best_match(&nodes, &e.ops, &e.optional_ops, |tag| tag == TagKind::L);
                t.add(Criterion::ListsTagged, m.is_some());
                let structure_ok = m.is_some_and(|n| {
                    let items: Vec<&StructNode> = n.node.child_nodes().filter(|c| c.tag == TagKind::LI).collect();
                    let truth_items = e.items.as_deref().unwrap_or_default();
                    items.len() == truth_items.len()
                        && items.iter().zip(truth_items).all(|(li, ti)| {
                            minus(&li.content_set(), &e.optional_ops) == minus(ti, &e.optional_ops)
                        })
                });
                t.add(Criterion::ListsStructure, structure_ok);
            }
            TruthRole::Figure => {
                let exclude: BTreeSet<OpId> = captions.union(&e.optional_ops).copied().collect();
                let m = best_match(&nodes, &e.ops, &exclude, |tag| tag == TagKind::Figure);
                t.add(Criterion::FiguresTagged, m.is_some());
                if e.requires_alt {
                    t.add(Criterion::FiguresAltText, m.is_some_and(|n| has_alt(n.node)));
                }
            }
            TruthRole::Formula if !e.inline => {
                let m = best_match(&nodes, &e.ops, &e.optional_ops, |tag| tag == TagKind::Formula);
                t.add(Criterion::FormulasTagged, m.is_some());
                t.add(Criterion::FormulasAltText, m.is_some_and(|n| has_alt(n.node)));
            }
            _ => {}
        }
    }

    let captioned = caption_ops(tree);
    for e in truth.elements.iter().filter(|e| e.role == TruthRole::Caption) {
        t.add(Criterion::CaptionsTagged, e.ops.is_subset(&captioned));
    }

    Ok(ScoreReport::from_counts(&t.0))
}

/// Pools CT and WT over all documents before dividing.
pub fn score_corpus(pairs: &[(TaggedDocument, TruthMap)]) -> Result<ScoreReport> {
    let reports: Vec<ScoreReport> =
        pairs.par_iter().map(|(doc, truth)| score_document(doc, truth)).collect::<Result<_>>()?;
    let mut pooled = [(0u64, 0u64); 13];
    for r in &reports {
        for (acc, (ct, wt)) in pooled.iter_mut().zip(r.counts()) {
            acc.0 += ct;
            acc.1 += wt;
        }
    }
    Ok(ScoreReport::from_counts(&pooled))
}
