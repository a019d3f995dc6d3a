//! Typed regions per page, operator-to-region assignment, region editing and
//! reading order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::model::{OpId, Page, TaggedDocument};

/// Relative overlap difference under which two regions count as equally good
/// for an operator; the detector score breaks the tie.
pub const SIMILAR_OVERLAP: f64 = 0.05;

/// Share of an operator's area a resized region must cover to own it.
pub const RESIZE_MEMBERSHIP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionId(pub u32);

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionType {
    Paragraph,
    Heading,
    List,
    Formula,
    Figure,
    Caption,
    Artifact,
    Table,
}

impl RegionType {
    pub const ALL: [RegionType; 8] = [
        RegionType::Paragraph,
        RegionType::Heading,
        RegionType::List,
        RegionType::Formula,
        RegionType::Figure,
        RegionType::Caption,
        RegionType::Artifact,
        RegionType::Table,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: RegionId,
    pub page: u32,
    pub bbox: Rect,
    pub rtype: RegionType,
    pub ops: BTreeSet<OpId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector_score: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub bbox: Rect,
    pub rtype: RegionType,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadingOrder {
    pub page: u32,
    pub sequence: Vec<RegionId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Polyline {
    points: Vec<Point>,
}

impl Polyline {
    /// At least two points; consecutive duplicates are dropped first.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let mut cleaned: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::InvalidInput("polyline point is not finite".into()));
            }
            if cleaned.last() != Some(&p) {
                cleaned.push(p);
            }
        }
        if cleaned.len() < 2 {
            return Err(Error::InvalidInput("polyline needs at least two distinct points".into()));
        }
        Ok(Self { points: cleaned })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Polyline parameter (segment index plus offset within the segment) at
    /// which the line first touches `rect`.
    pub fn first_hit(&self, rect: &Rect) -> Option<f64> {
        self.points
            .windows(2)
            .enumerate()
            .find_map(|(k, seg)| rect.segment_entry(seg[0], seg[1]).map(|t| k as f64 + t))
    }
}

impl TryFrom<Vec<Point>> for Polyline {
    type Error = Error;

    fn try_from(points: Vec<Point>) -> Result<Self> {
        Polyline::new(points)
    }
}

impl From<Polyline> for Vec<Point> {
    fn from(p: Polyline) -> Self {
        p.points
    }
}

/// Result of distributing a page's operators over proposals.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub regions: Vec<Region>,
    /// Operators no proposal overlaps.
    pub artifacts: BTreeSet<OpId>,
}

/// Picks the proposal for an operator: highest overlap ratio (share of the
/// operator's area), ties within [`SIMILAR_OVERLAP`] broken by score.
fn best_proposal(op_bbox: &Rect, proposals: &[Proposal]) -> Option<usize> {
    let ratios: Vec<f64> = proposals.iter().map(|p| op_bbox.coverage_by(&p.bbox)).collect();
    let best = ratios.iter().copied().fold(0.0_f64, f64::max);
    if best <= 0.0 {
        return None;
    }
    (0..proposals.len())
        .filter(|&i| ratios[i] > 0.0 && (best - ratios[i]) / best < SIMILAR_OVERLAP)
        .max_by(|&a, &b| {
            proposals[a]
                .score
                .total_cmp(&proposals[b].score)
                .then(ratios[a].total_cmp(&ratios[b]))
                .then(b.cmp(&a))
        })
}

/// Distributes every operator of `page` over the proposals. Proposals that
/// end up without operators are dropped; region ids are allocated from
/// `next_id` in proposal order.
pub fn assign_ops(page: &Page, proposals: &[Proposal], next_id: &mut u32) -> Assignment {
    let mut members: Vec<BTreeSet<OpId>> = vec![BTreeSet::new(); proposals.len()];
    let mut artifacts = BTreeSet::new();
    for op in &page.ops {
        match best_proposal(&op.bbox, proposals) {
            Some(i) => {
                members[i].insert(op.id);
            }
            None => {
                artifacts.insert(op.id);
            }
        }
    }
    let mut regions = Vec::new();
    for (proposal, ops) in proposals.iter().zip(members) {
        if ops.is_empty() {
            continue;
        }
        let bbox = ops
            .iter()
            .filter_map(|id| page.op(id.seq))
            .fold(proposal.bbox, |acc, op| acc.union(&op.bbox));
        regions.push(Region {
            id: RegionId(*next_id),
            page: page.index,
            bbox,
            rtype: proposal.rtype,
            ops,
            detector_score: Some(proposal.score),
        });
        *next_id += 1;
    }
    Assignment { regions, artifacts }
}

/// Reorders `previous` by the order in which `polyline` first crosses each
/// region's box. Regions the line never touches keep their relative order
/// and follow the crossed ones.
pub fn draw_reading_order(regions: &[(RegionId, Rect)], previous: &[RegionId], polyline: &Polyline) -> Vec<RegionId> {
    let boxes: BTreeMap<RegionId, Rect> = regions.iter().copied().collect();
    let mut hits: Vec<(f64, usize, RegionId)> = Vec::new();
    let mut skipped = Vec::new();
    for (pos, id) in previous.iter().enumerate() {
        match boxes.get(id).and_then(|r| polyline.first_hit(r)) {
            Some(t) => hits.push((t, pos, *id)),
            None => skipped.push(*id),
        }
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    hits.into_iter().map(|(_, _, id)| id).chain(skipped).collect()
}

/// Moves `region` to `new_index`, shifting the others.
pub fn move_in_order(order: &ReadingOrder, region: RegionId, new_index: usize) -> Result<ReadingOrder> {
    let len = order.sequence.len();
    let from = order.sequence.iter().position(|r| *r == region).ok_or(Error::UnknownRegion(region))?;
    if new_index >= len {
        return Err(Error::IndexOutOfRange { index: new_index, len });
    }
    let mut sequence = order.sequence.clone();
    let id = sequence.remove(from);
    sequence.insert(new_index, id);
    Ok(ReadingOrder { page: order.page, sequence })
}

/// Region state of one page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageLayout {
    pub page: u32,
    pub regions: Vec<Region>,
    /// Operators no region claimed at detection time, or explicitly marked.
    #[serde(default)]
    pub artifacts: BTreeSet<OpId>,
    pub reading_order: Vec<RegionId>,
}

impl PageLayout {
    pub fn empty(page: u32) -> Self {
        Self { page, regions: Vec::new(), artifacts: BTreeSet::new(), reading_order: Vec::new() }
    }

    pub fn region(&self, id: RegionId) -> Option<&Region> {
        self.regions.iter().find(|r| r.id == id)
    }

    pub fn order(&self) -> ReadingOrder {
        ReadingOrder { page: self.page, sequence: self.reading_order.clone() }
    }

    /// Region boxes in `(id, bbox)` form for reading-order drawing.
    pub fn orderable_boxes(&self) -> Vec<(RegionId, Rect)> {
        self.regions
            .iter()
            .filter(|r| r.rtype != RegionType::Artifact)
            .map(|r| (r.id, r.bbox))
            .collect()
    }

    fn owner(&self, op: OpId) -> Option<RegionId> {
        self.regions.iter().find(|r| r.ops.contains(&op)).map(|r| r.id)
    }
}

/// All regions of a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSet {
    pub pages: Vec<PageLayout>,
    pub next_id: u32,
}

impl RegionSet {
    pub fn empty(page_count: usize) -> Self {
        Self { pages: (0..page_count as u32).map(PageLayout::empty).collect(), next_id: 1 }
    }

    /// Runs [`assign_ops`] on every page and seeds reading orders by content
    /// order.
    pub fn from_proposals(doc: &TaggedDocument, proposals: &[Vec<Proposal>]) -> Self {
        let mut set = RegionSet::empty(doc.pages.len());
        for (page, props) in doc.pages.iter().zip(proposals) {
            let assignment = assign_ops(page, props, &mut set.next_id);
            let layout = &mut set.pages[page.index as usize];
            layout.regions = assignment.regions;
            layout.artifacts = assignment.artifacts;
            layout.reading_order = initial_order(&layout.regions);
        }
        set
    }

    pub fn region(&self, id: RegionId) -> Option<&Region> {
        self.pages.iter().find_map(|p| p.region(id))
    }

    pub fn regions(&self) -> impl Iterator<Item = &Region> {
        self.pages.iter().flat_map(|p| p.regions.iter())
    }

    fn locate(&self, id: RegionId) -> Result<(usize, usize)> {
        self.pages
            .iter()
            .enumerate()
            .find_map(|(pi, p)| p.regions.iter().position(|r| r.id == id).map(|ri| (pi, ri)))
            .ok_or(Error::UnknownRegion(id))
    }

    pub fn page(&self, page: u32) -> Result<&PageLayout> {
        self.pages
            .get(page as usize)
            .ok_or(Error::IndexOutOfRange { index: page as usize, len: self.pages.len() })
    }

    fn page_mut(&mut self, page: u32) -> Result<&mut PageLayout> {
        let len = self.pages.len();
        self.pages.get_mut(page as usize).ok_or(Error::IndexOutOfRange { index: page as usize, len })
    }

    /// Operators on `page` owned by no region and not in the artifact pool.
    pub fn untagged(&self, page: &Page) -> Vec<OpId> {
        let Some(layout) = self.pages.get(page.index as usize) else {
            return page.ops.iter().map(|o| o.id).collect();
        };
        page.ops
            .iter()
            .map(|o| o.id)
            .filter(|id| !layout.artifacts.contains(id) && layout.owner(*id).is_none())
            .collect()
    }

    /// Changes a region's box and recomputes which operators it owns:
    /// current members and unowned operators join when at least
    /// [`RESIZE_MEMBERSHIP`] of their area lies inside the new box; members
    /// that fall out become untagged. The stored box grows to cover every
    /// member.
    pub fn resize_region(&mut self, doc: &TaggedDocument, id: RegionId, new_bbox: Rect) -> Result<&Region> {
        let (pi, ri) = self.locate(id)?;
        let page = doc.pages.get(pi).ok_or(Error::IndexOutOfRange { index: pi, len: doc.pages.len() })?;
        let layout = &mut self.pages[pi];
        let mut ops = BTreeSet::new();
        for op in &page.ops {
            let owner = layout.owner(op.id);
            let eligible = owner == Some(id) || owner.is_none();
            if eligible && op.bbox.coverage_by(&new_bbox) >= RESIZE_MEMBERSHIP {
                ops.insert(op.id);
            }
        }
        for op in &ops {
            layout.artifacts.remove(op);
        }
        let bbox = ops.iter().filter_map(|o| page.op(o.seq)).fold(new_bbox, |acc, op| acc.union(&op.bbox));
        let region = &mut layout.regions[ri];
        region.ops = ops;
        region.bbox = bbox;
        Ok(&layout.regions[ri])
    }

    /// Removes regions; their operators become untagged.
    pub fn delete_regions(&mut self, ids: &[RegionId]) -> Result<()> {
        for id in ids {
            self.locate(*id)?;
        }
        for layout in &mut self.pages {
            layout.regions.retain(|r| !ids.contains(&r.id));
            layout.reading_order.retain(|r| !ids.contains(r));
        }
        Ok(())
    }

    pub fn set_region_type(&mut self, id: RegionId, rtype: RegionType) -> Result<&Region> {
        let (pi, ri) = self.locate(id)?;
        let layout = &mut self.pages[pi];
        let old = layout.regions[ri].rtype;
        layout.regions[ri].rtype = rtype;
        if rtype == RegionType::Artifact {
            layout.reading_order.retain(|r| *r != id);
        } else if old == RegionType::Artifact {
            layout.reading_order.push(id);
        }
        Ok(&layout.regions[ri])
    }

    /// New region from untagged operators of a single page.
    pub fn create_region_from_selection(
        &mut self,
        doc: &TaggedDocument,
        op_ids: &[OpId],
        rtype: RegionType,
    ) -> Result<&Region> {
        let first = *op_ids.first().ok_or_else(|| Error::InvalidInput("empty selection".into()))?;
        if op_ids.iter().any(|o| o.page != first.page) {
            return Err(Error::InvalidInput("selection spans several pages".into()));
        }
        let page = doc.pages.get(first.page as usize).ok_or(Error::UnknownOp(first))?;
        let mut bbox: Option<Rect> = None;
        for id in op_ids {
            let op = page.op(id.seq).ok_or(Error::UnknownOp(*id))?;
            bbox = Some(bbox.map_or(op.bbox, |b| b.union(&op.bbox)));
        }
        let layout = self.page_mut(first.page)?;
        for id in op_ids {
            if layout.owner(*id).is_some() {
                return Err(Error::OpAlreadyTagged(*id));
            }
        }
        for id in op_ids {
            layout.artifacts.remove(id);
        }
        let id = RegionId(self.next_id);
        self.next_id += 1;
        let layout = &mut self.pages[first.page as usize];
        layout.regions.push(Region {
            id,
            page: first.page,
            bbox: bbox.expect("non-empty selection"),
            rtype,
            ops: op_ids.iter().copied().collect(),
            detector_score: None,
        });
        if rtype != RegionType::Artifact {
            layout.reading_order.push(id);
        }
        Ok(layout.regions.last().expect("just pushed"))
    }

    /// New region from a drawn box: owns the unowned operators the box
    /// covers by at least [`RESIZE_MEMBERSHIP`].
    pub fn create_region_from_box(
        &mut self,
        doc: &TaggedDocument,
        page: u32,
        bbox: Rect,
        rtype: RegionType,
    ) -> Result<&Region> {
        let p = doc.pages.get(page as usize).ok_or(Error::IndexOutOfRange {
            index: page as usize,
            len: doc.pages.len(),
        })?;
        let layout = self.page(page)?;
        let ops: Vec<OpId> = p
            .ops
            .iter()
            .filter(|op| layout.owner(op.id).is_none() && op.bbox.coverage_by(&bbox) >= RESIZE_MEMBERSHIP)
            .map(|op| op.id)
            .collect();
        if ops.is_empty() {
            return Err(Error::InvalidInput(format!("no untagged content inside the box on page {page}")));
        }
        let id = self.create_region_from_selection(doc, &ops, rtype)?.id;
        let (pi, ri) = self.locate(id)?;
        let region = &mut self.pages[pi].regions[ri];
        region.bbox = region.bbox.union(&bbox);
        Ok(&self.pages[pi].regions[ri])
    }

    pub fn draw_reading_order(&mut self, page: u32, polyline: &Polyline) -> Result<ReadingOrder> {
        let layout = self.page_mut(page)?;
        layout.reading_order = draw_reading_order(&layout.orderable_boxes(), &layout.reading_order, polyline);
        Ok(layout.order())
    }

    pub fn move_in_order(&mut self, page: u32, region: RegionId, new_index: usize) -> Result<ReadingOrder> {
        let layout = self.page_mut(page)?;
        let order = move_in_order(&layout.order(), region, new_index)?;
        layout.reading_order = order.sequence.clone();
        Ok(order)
    }

    /// Turns a region into an artifact: it leaves the reading order and its
    /// operators will be marked as artifacts on export.
    pub fn demote_to_artifact(&mut self, id: RegionId) -> Result<()> {
        self.set_region_type(id, RegionType::Artifact).map(|_| ())
    }

    /// Partition and permutation invariants; returns a description of the
    /// first violation.
    pub fn check_invariants(&self, doc: &TaggedDocument) -> std::result::Result<(), String> {
        for (layout, page) in self.pages.iter().zip(&doc.pages) {
            let mut seen: BTreeMap<OpId, RegionId> = BTreeMap::new();
            for r in &layout.regions {
                if r.page != page.index {
                    return Err(format!("{} claims page {} but lives on {}", r.id, r.page, page.index));
                }
                for op in &r.ops {
                    if op.page != page.index || page.op(op.seq).is_none() {
                        return Err(format!("{} owns foreign operator {op}", r.id));
                    }
                    if let Some(other) = seen.insert(*op, r.id) {
                        return Err(format!("operator {op} owned by {other} and {}", r.id));
                    }
                    if layout.artifacts.contains(op) {
                        return Err(format!("operator {op} is both in {} and the artifact pool", r.id));
                    }
                }
            }
            let expected: BTreeSet<RegionId> = layout
                .regions
                .iter()
                .filter(|r| r.rtype != RegionType::Artifact)
                .map(|r| r.id)
                .collect();
            let actual: BTreeSet<RegionId> = layout.reading_order.iter().copied().collect();
            if actual.len() != layout.reading_order.len() || actual != expected {
                return Err(format!("reading order of page {} is not a permutation of its regions", page.index));
            }
        }
        Ok(())
    }
}

/// Regions ordered by their first operator in content-stream order.
pub fn initial_order(regions: &[Region]) -> Vec<RegionId> {
    let mut keyed: Vec<(u32, RegionId)> = regions
        .iter()
        .filter(|r| r.rtype != RegionType::Artifact)
        .map(|r| (r.ops.iter().next().map_or(u32::MAX, |o| o.seq), r.id))
        .collect();
    keyed.sort();
    keyed.into_iter().map(|(_, id)| id).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ContentOp, OpKind};

    fn page_with(boxes: &[Rect]) -> Page {
        Page {
            index: 0,
            width: 600.0,
            height: 800.0,
            ops: boxes
                .iter()
                .enumerate()
                .map(|(i, b)| ContentOp {
                    id: OpId::new(0, i as u32),
                    kind: OpKind::TextRun,
                    bbox: *b,
                    text: Some(format!("op{i}")),
                    font_size: Some(10.0),
                    font_style: None,
                    mcid: None,
                    artifact: false,
                })
                .collect(),
        }
    }

    fn prop(bbox: Rect, score: f64) -> Proposal {
        Proposal { bbox, rtype: RegionType::Paragraph, score }
    }

    #[test]
    fn unique_maximum_wins() {
        let page = page_with(&[Rect::new(0.0, 0.0, 10.0, 10.0)]);
        let a = prop(Rect::new(0.0, 0.0, 8.0, 10.0), 0.1);
        let b = prop(Rect::new(9.0, 0.0, 20.0, 10.0), 0.9);
        let out = assign_ops(&page, &[a, b], &mut 1);
        assert_eq!(out.regions.len(), 1);
        assert_eq!(out.regions[0].detector_score, Some(0.1));
    }

    #[test]
    fn similar_overlap_prefers_higher_score() {
        let page = page_with(&[Rect::new(0.0, 0.0, 100.0, 10.0)]);
        let a = prop(Rect::new(0.0, 0.0, 50.0, 10.0), 0.6);
        let b = prop(Rect::new(51.0, 0.0, 100.0, 10.0), 0.9);
        let out = assign_ops(&page, &[a, b], &mut 1);
        assert_eq!(out.regions.len(), 1);
        assert_eq!(out.regions[0].detector_score, Some(0.9));
    }

    #[test]
    fn no_overlap_goes_to_artifacts() {
        let page = page_with(&[Rect::new(0.0, 0.0, 10.0, 10.0), Rect::new(500.0, 500.0, 510.0, 510.0)]);
        let out = assign_ops(&page, &[prop(Rect::new(0.0, 0.0, 20.0, 20.0), 0.5)], &mut 1);
        assert_eq!(out.artifacts.iter().copied().collect::<Vec<_>>(), vec![OpId::new(0, 1)]);
    }

    #[test]
    fn polyline_reorders_and_appends_skipped() {
        let regions: Vec<(RegionId, Rect)> = (1..=4)
            .map(|i| (RegionId(i), Rect::new(0.0, 100.0 * f64::from(i), 50.0, 100.0 * f64::from(i) + 50.0)))
            .collect();
        let prev: Vec<RegionId> = (1..=4).map(RegionId).collect();
        let line = Polyline::new(vec![
            Point::new(25.0, 325.0),
            Point::new(100.0, 325.0),
            Point::new(100.0, 125.0),
            Point::new(25.0, 125.0),
            Point::new(25.0, 225.0),
        ])
        .unwrap();
        let ids: Vec<u32> = draw_reading_order(&regions, &prev, &line).iter().map(|r| r.0).collect();
        assert_eq!(ids, vec![3, 1, 2, 4]);
    }

    #[test]
    fn polyline_missing_everything_keeps_order() {
        let regions = vec![(RegionId(1), Rect::new(0.0, 0.0, 10.0, 10.0)), (RegionId(2), Rect::new(20.0, 0.0, 30.0, 10.0))];
        let prev = vec![RegionId(2), RegionId(1)];
        let line = Polyline::new(vec![Point::new(100.0, 100.0), Point::new(200.0, 200.0)]).unwrap();
        assert_eq!(draw_reading_order(&regions, &prev, &line), prev);
    }

    #[test]
    fn polyline_rejects_degenerate_input() {
        assert!(Polyline::new(vec![Point::new(1.0, 1.0)]).is_err());
        assert!(Polyline::new(vec![Point::new(1.0, 1.0), Point::new(1.0, 1.0)]).is_err());
    }

    #[test]
    fn move_in_order_cases() {
        let order = ReadingOrder { page: 0, sequence: vec![RegionId(1), RegionId(2), RegionId(3)] };
        assert_eq!(move_in_order(&order, RegionId(3), 0).unwrap().sequence, vec![RegionId(3), RegionId(1), RegionId(2)]);
        assert_eq!(move_in_order(&order, RegionId(2), 1).unwrap(), order);
        assert!(matches!(move_in_order(&order, RegionId(9), 0), Err(Error::UnknownRegion(_))));
        assert!(matches!(move_in_order(&order, RegionId(1), 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn initial_order_follows_first_operator() {
        let mk = |id: u32, first: u32| Region {
            id: RegionId(id),
            page: 0,
            bbox: Rect::new(0.0, 0.0, 1.0, 1.0),
            rtype: RegionType::Paragraph,
            ops: [OpId::new(0, first)].into_iter().collect(),
            detector_score: None,
        };
        let order = initial_order(&[mk(1, 5), mk(2, 0), mk(3, 3)]);
        assert_eq!(order, vec![RegionId(2), RegionId(3), RegionId(1)]);
    }
}
