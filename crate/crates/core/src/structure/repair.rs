//! Minimal restructuring of invalid trees. Stray content is wrapped into the
//! missing container elements in encounter order; nothing is dropped except
//! repeated references to the same operator.

use std::collections::HashSet;

use super::headings::repair_levels;
use super::validate::caption_ok_at;
use crate::model::{OpId, StructChild, StructNode, TagKind};

/// Repairs a Table subtree. A root with another tag is wrapped in a Table.
pub fn repair_table(table: &StructNode) -> StructNode {
    repair_rooted(table, TagKind::Table)
}

/// Repairs an L subtree. A root with another tag is wrapped in an L.
pub fn repair_list(list: &StructNode) -> StructNode {
    repair_rooted(list, TagKind::L)
}

/// Repairs a whole tree: Document root, container grammar, heading levels,
/// caption placement and duplicate references.
pub fn repair_tree(root: &StructNode) -> StructNode {
    repair_rooted(root, TagKind::Document)
}

fn repair_rooted(node: &StructNode, root_tag: TagKind) -> StructNode {
    let root = if node.tag == root_tag {
        node.clone()
    } else {
        StructNode::with_children(root_tag, vec![StructChild::Node(node.clone())])
    };
    let mut fixed = fix_node(root, &mut HashSet::new());
    relevel_headings(&mut fixed);
    fixed
}

fn fix_node(mut node: StructNode, seen: &mut HashSet<OpId>) -> StructNode {
    let children = std::mem::take(&mut node.children);
    let grouped = match node.tag {
        TagKind::Table | TagKind::THead | TagKind::TBody | TagKind::TFoot => group_rows(node.tag, children),
        TagKind::TR => wrap_runs(children, |t| t.is_cell(), TagKind::TD),
        TagKind::L => group_items(children),
        TagKind::LI => wrap_runs(children, |t| matches!(t, TagKind::Lbl | TagKind::LBody | TagKind::L), TagKind::LBody),
        _ => group_generic(children),
    };
    let mut out = Vec::with_capacity(grouped.len());
    for child in grouped {
        match child {
            StructChild::Content(id) => {
                if seen.insert(id) {
                    out.push(StructChild::Content(id));
                }
            }
            StructChild::Node(n) => out.push(StructChild::Node(fix_node(n, seen))),
        }
    }
    for i in 0..out.len() {
        let misplaced = matches!(&out[i], StructChild::Node(n) if n.tag == TagKind::Caption)
            && !caption_ok_at(node.tag, &out, i);
        if misplaced {
            if let StructChild::Node(n) = &mut out[i] {
                n.tag = TagKind::P;
            }
        }
    }
    node.children = out;
    if node.tag == TagKind::Table {
        pad_rows(&mut node);
    }
    node
}

/// Table and section children: stray cells gather into a new row, other
/// stray content into a new cell of that row.
fn group_rows(parent: TagKind, children: Vec<StructChild>) -> Vec<StructChild> {
    let mut out = Vec::new();
    let mut row: Option<StructNode> = None;
    let mut open_cell = false;
    for child in children {
        match child {
            StructChild::Node(n)
                if n.tag == TagKind::TR
                    || (parent == TagKind::Table && (n.tag.is_table_section() || n.tag == TagKind::Caption)) =>
            {
                out.extend(row.take().map(StructChild::Node));
                open_cell = false;
                out.push(StructChild::Node(n));
            }
            StructChild::Node(n) if n.tag.is_cell() => {
                row.get_or_insert_with(|| StructNode::new(TagKind::TR)).push_node(n);
                open_cell = false;
            }
            other => {
                let r = row.get_or_insert_with(|| StructNode::new(TagKind::TR));
                append_to_open(r, &mut open_cell, TagKind::TD, other);
            }
        }
    }
    out.extend(row.map(StructChild::Node));
    out
}

fn group_items(children: Vec<StructChild>) -> Vec<StructChild> {
    let mut out = Vec::new();
    let mut item: Option<StructNode> = None;
    let mut open_body = false;
    for child in children {
        match child {
            StructChild::Node(n) if n.tag == TagKind::LI => {
                out.extend(item.take().map(StructChild::Node));
                open_body = false;
                out.push(StructChild::Node(n));
            }
            StructChild::Node(n) if matches!(n.tag, TagKind::Lbl | TagKind::LBody) => {
                item.get_or_insert_with(|| StructNode::new(TagKind::LI)).push_node(n);
                open_body = false;
            }
            other => {
                let li = item.get_or_insert_with(|| StructNode::new(TagKind::LI));
                append_to_open(li, &mut open_body, TagKind::LBody, other);
            }
        }
    }
    out.extend(item.map(StructChild::Node));
    out
}

/// Adds `child` to the trailing synthetic `wrapper` of `parent`, opening a
/// new one if needed.
fn append_to_open(parent: &mut StructNode, open: &mut bool, wrapper: TagKind, child: StructChild) {
    if *open {
        if let Some(StructChild::Node(last)) = parent.children.last_mut() {
            last.children.push(child);
            return;
        }
    }
    parent.push_node(StructNode::with_children(wrapper, vec![child]));
    *open = true;
}

/// Keeps children satisfying `allowed` and wraps each run of the others.
fn wrap_runs(children: Vec<StructChild>, allowed: impl Fn(TagKind) -> bool, wrapper: TagKind) -> Vec<StructChild> {
    let mut out: Vec<StructChild> = Vec::new();
    let mut open = false;
    for child in children {
        match child {
            StructChild::Node(n) if allowed(n.tag) => {
                open = false;
                out.push(StructChild::Node(n));
            }
            other => {
                if open {
                    if let Some(StructChild::Node(last)) = out.last_mut() {
                        last.children.push(other);
                        continue;
                    }
                }
                out.push(StructChild::Node(StructNode::with_children(wrapper, vec![other])));
                open = true;
            }
        }
    }
    out
}

/// Ordinary containers: table parts gather into a Table, list parts into an
/// L, and Document or Artifact elements lose their role.
fn group_generic(children: Vec<StructChild>) -> Vec<StructChild> {
    let mut out = Vec::new();
    let mut table: Option<StructNode> = None;
    let mut list: Option<StructNode> = None;
    for child in children {
        match child {
            StructChild::Node(n)
                if matches!(n.tag, TagKind::TR | TagKind::TH | TagKind::TD) || n.tag.is_table_section() =>
            {
                out.extend(list.take().map(StructChild::Node));
                table.get_or_insert_with(|| StructNode::new(TagKind::Table)).push_node(n);
            }
            StructChild::Node(n) if matches!(n.tag, TagKind::LI | TagKind::Lbl | TagKind::LBody) => {
                out.extend(table.take().map(StructChild::Node));
                list.get_or_insert_with(|| StructNode::new(TagKind::L)).push_node(n);
            }
            mut other => {
                out.extend(table.take().map(StructChild::Node));
                out.extend(list.take().map(StructChild::Node));
                if let StructChild::Node(n) = &mut other {
                    if matches!(n.tag, TagKind::Document | TagKind::Artifact) {
                        n.tag = TagKind::Group;
                    }
                }
                out.push(other);
            }
        }
    }
    out.extend(table.map(StructChild::Node));
    out.extend(list.map(StructChild::Node));
    out
}

/// Pads short rows with empty data cells.
fn pad_rows(table: &mut StructNode) {
    fn rows_mut(table: &mut StructNode) -> Vec<&mut StructNode> {
        let mut rows = Vec::new();
        for child in &mut table.children {
            if let StructChild::Node(n) = child {
                if n.tag == TagKind::TR {
                    rows.push(n);
                } else if n.tag.is_table_section() {
                    for c in &mut n.children {
                        if let StructChild::Node(r) = c {
                            if r.tag == TagKind::TR {
                                rows.push(r);
                            }
                        }
                    }
                }
            }
        }
        rows
    }
    let width = rows_mut(table).iter().map(|r| r.child_nodes().count()).max().unwrap_or(0);
    for row in rows_mut(table) {
        while row.child_nodes().count() < width {
            row.push_node(StructNode::new(TagKind::TD));
        }
    }
}

fn relevel_headings(root: &mut StructNode) {
    fn collect(node: &StructNode, out: &mut Vec<u8>) {
        if let Some(l) = node.tag.heading_level() {
            out.push(l);
        }
        for c in node.child_nodes() {
            collect(c, out);
        }
    }
    fn apply(node: &mut StructNode, levels: &mut impl Iterator<Item = u8>) {
        if node.tag.is_heading() {
            node.tag = TagKind::heading(levels.next().expect("one level per heading")).expect("repaired level in 1..=6");
        }
        for c in &mut node.children {
            if let StructChild::Node(n) = c {
                apply(n, levels);
            }
        }
    }
    let mut raw = Vec::new();
    collect(root, &mut raw);
    let mut levels = repair_levels(&raw).into_iter();
    apply(root, &mut levels);
}
