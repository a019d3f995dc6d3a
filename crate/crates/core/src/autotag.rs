//! Automatic tagging. Region proposals come from a [`DetectorPlugin`]; the
//! built-in one is a layout heuristic (recursive XY-cut over text boxes plus
//! a font-size test for headings). External detectors plug in through the
//! same trait.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::model::{ContentOp, OpKind, Page, TaggedDocument};
use crate::pdf::{is_valid_language_tag, set_meta};
use crate::region::{Proposal, RegionSet, RegionType};
use crate::structure::{detect_heading_levels, SIZE_QUANTUM};
use crate::tagmap::{heading_styles, region_text, StepAction, Tagmap};

/// Fixed confidence of heuristic proposals; they carry no learned score.
pub const HEURISTIC_SCORE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorProposal {
    pub page: u32,
    pub bbox: Rect,
    pub rtype: RegionType,
    pub score: f64,
}

/// A region detector. Must be deterministic: the same page always yields
/// the same proposals.
pub trait DetectorPlugin: Send + Sync {
    fn name(&self) -> &str;
    fn version(&self) -> &str;
    fn detect(&self, page: &Page) -> Vec<DetectorProposal>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeuristicConfig {
    /// A vertical gap wider than this many median line heights splits a
    /// block.
    pub gap_factor: f64,
    /// A block whose dominant font size exceeds the page's body size by
    /// this factor is a heading.
    pub heading_ratio: f64,
    /// Minimum width of vertical whitespace, in points, separating columns.
    pub column_gap: f64,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        Self { gap_factor: 0.8, heading_ratio: 1.15, column_gap: 15.0 }
    }
}

impl HeuristicConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let cfg: HeuristicConfig =
            toml::from_str(src).map_err(|e| Error::InvalidInput(format!("detector config: {e}")))?;
        if !(cfg.gap_factor > 0.0 && cfg.heading_ratio > 0.0 && cfg.column_gap > 0.0) {
            return Err(Error::InvalidInput("detector config values must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Default)]
pub struct HeuristicDetector {
    pub config: HeuristicConfig,
}

impl DetectorPlugin for HeuristicDetector {
    fn name(&self) -> &str {
        "layout-heuristic"
    }

    fn version(&self) -> &str {
        env!("CARGO_PKG_VERSION")
    }

    fn detect(&self, page: &Page) -> Vec<DetectorProposal> {
        heuristic_detect_with(page, &self.config)
    }
}

pub fn heuristic_detect(page: &Page) -> Vec<DetectorProposal> {
    heuristic_detect_with(page, &HeuristicConfig::default())
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v[v.len() / 2])
}

fn size_of(op: &ContentOp) -> f64 {
    op.font_size.unwrap_or_else(|| op.bbox.height())
}

/// Most frequent font size, weighted by characters: the body size of a
/// page, or the dominant size of a line.
fn body_size(ops: &[&ContentOp]) -> f64 {
    let mut weight: BTreeMap<i64, usize> = BTreeMap::new();
    for op in ops {
        let chars = op.text.as_deref().map_or(1, |t| t.chars().count().max(1));
        *weight.entry((size_of(op) / SIZE_QUANTUM).round() as i64).or_default() += chars;
    }
    // ties go to the smaller size
    weight
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map_or(0.0, |(k, _)| *k as f64 * SIZE_QUANTUM)
}

/// Gaps in the union of `[lo, hi]` intervals wider than `min_gap`; returns
/// cut positions at the middle of each gap.
fn gaps(intervals: impl Iterator<Item = (f64, f64)>, min_gap: f64) -> Vec<f64> {
    let mut iv: Vec<(f64, f64)> = intervals.collect();
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cuts = Vec::new();
    let mut reach = match iv.first() {
        Some(f) => f.1,
        None => return cuts,
    };
    for (lo, hi) in iv.into_iter().skip(1) {
        if lo - reach > min_gap {
            cuts.push((lo + reach) / 2.0);
        }
        reach = reach.max(hi);
    }
    cuts
}

fn xy_cut<'a>(ops: Vec<&'a ContentOp>, y_gap: f64, x_gap: f64, out: &mut Vec<Vec<&'a ContentOp>>) {
    if ops.len() <= 1 {
        if !ops.is_empty() {
            out.push(ops);
        }
        return;
    }
    let ycuts = gaps(ops.iter().map(|o| (o.bbox.y0, o.bbox.y1)), y_gap);
    if !ycuts.is_empty() {
        // top band first
        let mut bands: Vec<Vec<&ContentOp>> = vec![Vec::new(); ycuts.len() + 1];
        for op in ops {
            let band = ycuts.iter().filter(|c| **c > op.bbox.center().y).count();
            bands[band].push(op);
        }
        for band in bands.into_iter().rev() {
            xy_cut(band, y_gap, x_gap, out);
        }
        return;
    }
    let xcuts = gaps(ops.iter().map(|o| (o.bbox.x0, o.bbox.x1)), x_gap);
    if !xcuts.is_empty() {
        let mut cols: Vec<Vec<&ContentOp>> = vec![Vec::new(); xcuts.len() + 1];
        for op in ops {
            let col = xcuts.iter().filter(|c| **c < op.bbox.center().x).count();
            cols[col].push(op);
        }
        for col in cols {
            xy_cut(col, y_gap, x_gap, out);
        }
        return;
    }
    out.push(ops);
}

/// Splits a block into lines (ops whose vertical extents overlap by more
/// than half the smaller height) from top to bottom.
fn lines<'a>(block: &[&'a ContentOp]) -> Vec<Vec<&'a ContentOp>> {
    let mut sorted: Vec<&ContentOp> = block.to_vec();
    sorted.sort_by(|a, b| b.bbox.center().y.total_cmp(&a.bbox.center().y).then(a.id.cmp(&b.id)));
    let mut out: Vec<Vec<&ContentOp>> = Vec::new();
    for op in sorted {
        let joins = out.last().is_some_and(|line| {
            let (lo, hi) = line.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), o| {
                (l.min(o.bbox.y0), h.max(o.bbox.y1))
            });
            let overlap = hi.min(op.bbox.y1) - lo.max(op.bbox.y0);
            overlap > 0.5 * op.bbox.height().min(hi - lo)
        });
        if joins {
            out.last_mut().expect("checked").push(op);
        } else {
            out.push(vec![op]);
        }
    }
    out
}

fn bbox_of(ops: &[&ContentOp]) -> Rect {
    ops.iter().skip(1).fold(ops[0].bbox, |acc, o| acc.union(&o.bbox))
}

pub fn heuristic_detect_with(page: &Page, config: &HeuristicConfig) -> Vec<DetectorProposal> {
    let live: Vec<&ContentOp> = page.ops.iter().filter(|o| !o.artifact).collect();
    let mut proposals = Vec::new();
    for img in live.iter().filter(|o| o.kind == OpKind::Image) {
        proposals.push(DetectorProposal { page: page.index, bbox: img.bbox, rtype: RegionType::Figure, score: HEURISTIC_SCORE });
    }
    let text: Vec<&ContentOp> = live
        .iter()
        .copied()
        .filter(|o| o.kind == OpKind::TextRun && o.bbox.area() > 0.0)
        .collect();
    if text.is_empty() {
        return proposals;
    }
    let line_height = median(text.iter().map(|o| o.bbox.height()).collect()).unwrap_or(10.0);
    let body = body_size(&text);
    let is_heading = |ops: &[&ContentOp]| body_size(ops) > config.heading_ratio * body;

    let mut blocks = Vec::new();
    xy_cut(text, config.gap_factor * line_height, config.column_gap, &mut blocks);
    for block in blocks {
        // runs of consecutive lines with the same heading/body class
        let mut runs: Vec<(bool, Vec<&ContentOp>)> = Vec::new();
        for line in lines(&block) {
            let heading = is_heading(&line);
            match runs.last_mut() {
                Some((h, ops)) if *h == heading => ops.extend(line),
                _ => runs.push((heading, line)),
            }
        }
        for (heading, ops) in runs {
            proposals.push(DetectorProposal {
                page: page.index,
                bbox: bbox_of(&ops),
                rtype: if heading { RegionType::Heading } else { RegionType::Paragraph },
                score: HEURISTIC_SCORE,
            });
        }
    }
    proposals
}

/// Auto-tags with the built-in heuristic detector.
pub fn auto_tag(doc: &TaggedDocument) -> Result<Tagmap> {
    auto_tag_with(doc, &HeuristicDetector::default())
}

/// Runs the detector on every page in parallel, assigns operators, seeds
/// reading orders, detects heading levels and fills in default metadata.
pub fn auto_tag_with(doc: &TaggedDocument, detector: &dyn DetectorPlugin) -> Result<Tagmap> {
    let proposals: Vec<Vec<Proposal>> = doc
        .pages
        .par_iter()
        .map(|page| {
            let bounds = page.bounds();
            detector
                .detect(page)
                .into_iter()
                .filter(|p| p.page == page.index && p.bbox.is_finite())
                .filter_map(|p| {
                    let bbox = p.bbox.intersection(&bounds)?;
                    Some(Proposal { bbox, rtype: p.rtype, score: p.score.clamp(0.0, 1.0) })
                })
                .collect()
        })
        .collect();
    let regions = RegionSet::from_proposals(doc, &proposals);

    let language = if is_valid_language_tag(&doc.meta.language) { doc.meta.language.as_str() } else { "en" };
    let meta = set_meta("", &doc.meta.author, language)?;
    let mut map = Tagmap::new(doc, regions, meta);

    let styles = heading_styles(doc, &map);
    map.heading_levels = match detect_heading_levels(&styles) {
        Ok(outline) => outline.entries.iter().map(|e| (e.region, e.level)).collect(),
        Err(Error::TooManyLevels(_)) => clamped_levels(&styles),
        Err(e) => return Err(e),
    };

    let title = if !doc.meta.title.trim().is_empty() {
        doc.meta.title.trim().to_string()
    } else {
        map.ordered_regions()
            .into_iter()
            .find(|r| r.rtype == crate::region::RegionType::Heading)
            .map(|r| region_text(doc, r))
            .filter(|t| !t.is_empty())
            .unwrap_or_else(|| "Untitled document".to_string())
    };
    map.apply(
        doc,
        &StepAction::SetMeta { title, author: map.meta.author.clone(), language: map.meta.language.clone() },
    )?;
    Ok(map)
}

/// Fallback when there are more heading styles than levels: rank sizes
/// only and send everything past the sixth to level 6.
fn clamped_levels(
    styles: &[(crate::region::RegionId, f64, crate::model::FontStyle)],
) -> BTreeMap<crate::region::RegionId, u8> {
    let mut keys: Vec<i64> = styles.iter().map(|(_, s, _)| (s / SIZE_QUANTUM).round() as i64).collect();
    keys.sort_unstable_by(|a, b| b.cmp(a));
    keys.dedup();
    let raw: Vec<u8> = styles
        .iter()
        .map(|(_, s, _)| {
            let k = (s / SIZE_QUANTUM).round() as i64;
            (keys.iter().position(|x| *x == k).unwrap_or(0) + 1).min(6) as u8
        })
        .collect();
    let levels = crate::structure::repair_levels(&raw);
    styles.iter().zip(levels).map(|((id, _, _), l)| (*id, l)).collect()
}
