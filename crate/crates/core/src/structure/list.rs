use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::model::{ContentOp, OpId, StructChild, StructNode, TagKind};
use crate::region::RegionId;

/// Item separators of a list region (y coordinates, strictly increasing)
/// plus optional nesting: `nesting[child] = parent` by item index, items
/// counted from the top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListSpec {
    pub region: RegionId,
    #[serde(default)]
    pub item_separators: Vec<f64>,
    /// Serialized as `[child, parent]` pairs.
    #[serde(default, with = "pairs")]
    pub nesting: BTreeMap<usize, usize>,
}

// integer map keys do not survive serde's buffering inside tagged enums
mod pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<usize, usize>, s: S) -> Result<S::Ok, S::Error> {
        map.iter().map(|(k, v)| (*k, *v)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, usize>, D::Error> {
        Ok(Vec::<(usize, usize)>::deserialize(d)?.into_iter().collect())
    }
}

impl ListSpec {
    pub fn items(&self) -> usize {
        self.item_separators.len() + 1
    }

    pub fn item_of(&self, y: f64) -> usize {
        self.item_separators.iter().filter(|s| **s > y).count()
    }

    fn parent(&self, item: usize) -> Option<usize> {
        self.nesting.get(&item).copied()
    }

    /// Sorted separators inside `bbox`; every nested item follows its parent
    /// and the items between them are also descendants of that parent, so
    /// nesting never reorders content.
    pub fn check(&self, bbox: &Rect) -> Result<()> {
        let seps = &self.item_separators;
        if seps.iter().any(|y| !y.is_finite()) || seps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidListSpec(format!("separators of {} are not strictly sorted", self.region)));
        }
        if seps.iter().any(|y| *y < bbox.y0 || *y > bbox.y1) {
            return Err(Error::InvalidListSpec(format!("separators of {} leave the region box", self.region)));
        }
        let n = self.items();
        for (&child, &parent) in &self.nesting {
            if child >= n || parent >= child {
                return Err(Error::InvalidListSpec(format!("item {child} cannot nest under item {parent}")));
            }
            for between in parent + 1..child {
                if !self.descends_from(between, parent) {
                    return Err(Error::InvalidListSpec(format!(
                        "item {between} sits between item {parent} and its nested item {child}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn descends_from(&self, mut item: usize, ancestor: usize) -> bool {
        while let Some(p) = self.parent(item) {
            if p == ancestor {
                return true;
            }
            item = p;
        }
        false
    }
}

/// Builds L > LI > LBody, placing nested items in an L inside their
/// parent's LI. Operators are split into items by their box center.
pub fn build_list(spec: &ListSpec, bbox: &Rect, ops: &[&ContentOp]) -> Result<StructNode> {
    if ops.is_empty() {
        return Err(Error::EmptyList(spec.region));
    }
    spec.check(bbox)?;
    let mut members: Vec<Vec<OpId>> = vec![Vec::new(); spec.items()];
    for op in ops {
        members[spec.item_of(op.bbox.center().y)].push(op.id);
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); spec.items()];
    let mut top = Vec::new();
    for i in 0..spec.items() {
        match spec.parent(i) {
            Some(p) => children[p].push(i),
            None => top.push(i),
        }
    }
    fn item(i: usize, members: &[Vec<OpId>], children: &[Vec<usize>]) -> StructNode {
        let mut li = StructNode::new(TagKind::LI);
        li.push_node(StructNode::with_content(TagKind::LBody, members[i].iter().copied()));
        if !children[i].is_empty() {
            li.push_node(list_of(&children[i], members, children));
        }
        li
    }
    fn list_of(items: &[usize], members: &[Vec<OpId>], children: &[Vec<usize>]) -> StructNode {
        StructNode::with_children(
            TagKind::L,
            items.iter().map(|i| StructChild::Node(item(*i, members, children))).collect(),
        )
    }
    Ok(list_of(&top, &members, &children))
}
