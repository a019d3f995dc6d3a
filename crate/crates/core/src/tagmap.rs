//! The tagmap: a portable record of every decision taken in the eight
//! tagging steps, and its assembly into a structure tree.
//!
//! Steps: 1 regions, 2 reading order, 3 heading levels, 4 tables, 5 lists,
//! 6 figures, 7 formulas, 8 metadata.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::mathtext::{formula_alt_text, word_budget, AltText, WordBudget};
use crate::model::{ContentOp, DocMeta, OpId, StructNode, TagKind, TaggedDocument};
use crate::pdf::set_meta;
use crate::region::{Polyline, Region, RegionId, RegionSet, RegionType};
use crate::structure::{
    build_list, build_table, detect_heading_levels, repair_headings, validate_tree, ListSpec, RawLevel, TableGrid,
    Violation,
};

pub const TAGMAP_VERSION: u32 = 1;
pub const STEP_COUNT: u8 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaEntry {
    pub region: RegionId,
    pub latex: String,
    pub alt_text: String,
    /// The alt text was typed by the user rather than generated.
    #[serde(default)]
    pub manual: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tagmap {
    pub version: u32,
    pub document_hash: String,
    pub regions: RegionSet,
    /// Raw levels as chosen by the user or detector; 0 is the level-less H.
    /// Assembly repairs the sequence, so the tree is always valid.
    #[serde(default)]
    pub heading_levels: BTreeMap<RegionId, RawLevel>,
    #[serde(default)]
    pub tables: BTreeMap<RegionId, TableGrid>,
    #[serde(default)]
    pub lists: BTreeMap<RegionId, ListSpec>,
    #[serde(default)]
    pub figures: BTreeMap<RegionId, AltText>,
    #[serde(default)]
    pub formulas: BTreeMap<RegionId, FormulaEntry>,
    pub meta: DocMeta,
    #[serde(default)]
    pub steps: [bool; 8],
}

/// One edit, tagged by `action` in JSON. Each belongs to exactly one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum StepAction {
    /// Re-runs region detection. Replaces every region and all data hanging
    /// off them, so it must be confirmed.
    DetectRegions { confirm: bool },
    ResizeRegion { region: RegionId, bbox: Rect },
    DeleteRegions { regions: Vec<RegionId> },
    SetRegionType { region: RegionId, rtype: RegionType },
    CreateRegion { ops: Vec<OpId>, rtype: RegionType },
    CreateRegionFromBox { page: u32, bbox: Rect, rtype: RegionType },

    DrawReadingOrder { page: u32, polyline: Polyline },
    MoveInOrder { page: u32, region: RegionId, index: usize },
    DemoteToArtifact { region: RegionId },

    SetHeadingLevel { region: RegionId, level: RawLevel },
    DetectHeadingLevels,

    SetTableGrid { grid: TableGrid },
    ClearTableGrid { region: RegionId },

    SetListSpec { spec: ListSpec },
    ClearListSpec { region: RegionId },

    SetFigureAlt { region: RegionId, text: String, #[serde(default)] decorative: bool },

    SetFormulaLatex { region: RegionId, latex: String },
    SetFormulaAltText { region: RegionId, text: String },

    SetMeta { title: String, author: String, language: String },

    /// Sets or clears the completion flag of a step.
    Complete { step: u8, done: bool },
}

impl StepAction {
    pub fn step(&self) -> u8 {
        use StepAction::*;
        match self {
            DetectRegions { .. }
            | ResizeRegion { .. }
            | DeleteRegions { .. }
            | SetRegionType { .. }
            | CreateRegion { .. }
            | CreateRegionFromBox { .. } => 1,
            DrawReadingOrder { .. } | MoveInOrder { .. } | DemoteToArtifact { .. } => 2,
            SetHeadingLevel { .. } | DetectHeadingLevels => 3,
            SetTableGrid { .. } | ClearTableGrid { .. } => 4,
            SetListSpec { .. } | ClearListSpec { .. } => 5,
            SetFigureAlt { .. } => 6,
            SetFormulaLatex { .. } | SetFormulaAltText { .. } => 7,
            SetMeta { .. } => 8,
            Complete { step, .. } => *step,
        }
    }
}

fn check_step(step: u8) -> Result<()> {
    if (1..=STEP_COUNT).contains(&step) {
        Ok(())
    } else {
        Err(Error::UnknownStep(step))
    }
}

fn region_ops<'a>(doc: &'a TaggedDocument, region: &Region) -> Vec<&'a ContentOp> {
    region.ops.iter().filter_map(|id| doc.op(*id)).collect()
}

/// Text of a region's operators in content order, single-spaced.
pub fn region_text(doc: &TaggedDocument, region: &Region) -> String {
    region_ops(doc, region)
        .iter()
        .filter_map(|op| op.text.as_deref())
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

impl Tagmap {
    /// A tagmap with the given regions and nothing else decided.
    pub fn new(doc: &TaggedDocument, regions: RegionSet, meta: DocMeta) -> Self {
        Self {
            version: TAGMAP_VERSION,
            document_hash: doc.content_hash(),
            regions,
            heading_levels: BTreeMap::new(),
            tables: BTreeMap::new(),
            lists: BTreeMap::new(),
            figures: BTreeMap::new(),
            formulas: BTreeMap::new(),
            meta,
            steps: [false; 8],
        }
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let map: Tagmap = serde_json::from_slice(bytes)?;
        if map.version != TAGMAP_VERSION {
            return Err(Error::InvalidInput(format!("unsupported tagmap version {}", map.version)));
        }
        Ok(map)
    }

    /// Pretty JSON; byte-identical for equal tagmaps.
    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("tagmaps always serialize")
    }

    pub fn step_done(&self, step: u8) -> bool {
        (1..=STEP_COUNT).contains(&step) && self.steps[usize::from(step - 1)]
    }

    /// Every non-artifact region in document reading order.
    pub fn ordered_regions(&self) -> Vec<&Region> {
        self.regions
            .pages
            .iter()
            .flat_map(|p| p.reading_order.iter().filter_map(|id| p.region(*id)))
            .collect()
    }

    /// Heading regions in reading order with their repaired levels.
    pub fn heading_outline(&self) -> Vec<(RegionId, RawLevel, u8)> {
        let raw: Vec<(RegionId, RawLevel)> = self
            .ordered_regions()
            .into_iter()
            .filter(|r| r.rtype == RegionType::Heading)
            .map(|r| (r.id, self.heading_levels.get(&r.id).copied().unwrap_or(0)))
            .collect();
        let repaired = repair_headings(&raw);
        raw.iter().zip(repaired.levels()).map(|((id, raw), lvl)| (*id, *raw, lvl)).collect()
    }

    /// Builds the structure tree. The same tagmap always yields the same
    /// tree. Artifact regions, decorative figures and empty regions are
    /// left out, so their operators end up marked as artifacts.
    pub fn assemble(&self, doc: &TaggedDocument) -> Result<StructNode> {
        let levels: BTreeMap<RegionId, u8> = self.heading_outline().into_iter().map(|(id, _, l)| (id, l)).collect();
        let mut root = StructNode::new(TagKind::Document);
        for region in self.ordered_regions() {
            if region.ops.is_empty() {
                continue;
            }
            let ops = region_ops(doc, region);
            if ops.len() != region.ops.len() {
                let missing = region.ops.iter().find(|id| doc.op(**id).is_none()).expect("some op is missing");
                return Err(Error::UnknownOp(*missing));
            }
            let ids = || region.ops.iter().copied();
            let node = match region.rtype {
                RegionType::Paragraph => StructNode::with_content(TagKind::P, ids()),
                RegionType::Caption => StructNode::with_content(TagKind::Caption, ids()),
                RegionType::Heading => {
                    let tag = TagKind::heading(levels[&region.id]).expect("repaired levels are 1..=6");
                    StructNode::with_content(tag, ids())
                }
                RegionType::Table => match self.tables.get(&region.id) {
                    Some(grid) => build_table(grid, &region.bbox, &ops)?,
                    None => {
                        let td = StructNode::with_content(TagKind::TD, ids());
                        let mut tr = StructNode::new(TagKind::TR);
                        tr.push_node(td);
                        let mut table = StructNode::new(TagKind::Table);
                        table.push_node(tr);
                        table
                    }
                },
                RegionType::List => match self.lists.get(&region.id) {
                    Some(spec) => build_list(spec, &region.bbox, &ops)?,
                    None => {
                        let mut li = StructNode::new(TagKind::LI);
                        li.push_node(StructNode::with_content(TagKind::LBody, ids()));
                        let mut list = StructNode::new(TagKind::L);
                        list.push_node(li);
                        list
                    }
                },
                RegionType::Figure => {
                    let alt = self.figures.get(&region.id);
                    if alt.is_some_and(|a| a.decorative) {
                        continue;
                    }
                    let mut fig = StructNode::with_content(TagKind::Figure, ids());
                    fig.attributes.alt_text = alt.map(|a| a.text.trim().to_string()).filter(|t| !t.is_empty());
                    fig
                }
                RegionType::Formula => {
                    let mut f = StructNode::with_content(TagKind::Formula, ids());
                    f.attributes.alt_text = self
                        .formulas
                        .get(&region.id)
                        .map(|e| e.alt_text.trim().to_string())
                        .filter(|t| !t.is_empty());
                    f
                }
                RegionType::Artifact => continue,
            };
            root.push_node(node);
        }
        Ok(root)
    }

    /// Assembles and validates; what export checks before writing.
    pub fn assemble_valid(&self, doc: &TaggedDocument) -> Result<StructNode> {
        let tree = self.assemble(doc)?;
        let violations = validate_tree(&tree);
        if violations.is_empty() {
            Ok(tree)
        } else {
            Err(Error::ValidationFailed(violations))
        }
    }

    /// Violations of the assembled tree, or the assembly error as text.
    pub fn preview_violations(&self, doc: &TaggedDocument) -> std::result::Result<Vec<Violation>, String> {
        self.assemble(doc).map(|t| validate_tree(&t)).map_err(|e| e.to_string())
    }

    /// Checks the tagmap belongs to `doc` and that all its references
    /// resolve.
    pub fn check_consistency(&self, doc: &TaggedDocument) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.version != TAGMAP_VERSION {
            return bad(format!("unsupported tagmap version {}", self.version));
        }
        if self.document_hash != doc.content_hash() {
            return bad("tagmap was made for a different document".into());
        }
        if self.regions.pages.len() != doc.pages.len() {
            return bad("tagmap page count differs from the document".into());
        }
        self.regions.check_invariants(doc).map_err(Error::InvalidInput)?;
        let typed = |id: &RegionId, want: RegionType| -> Result<&Region> {
            match self.regions.region(*id) {
                Some(r) if r.rtype == want => Ok(r),
                Some(r) => Err(Error::InvalidInput(format!("{id} is a {:?}, not a {want:?}", r.rtype))),
                None => Err(Error::UnknownRegion(*id)),
            }
        };
        for (id, level) in &self.heading_levels {
            typed(id, RegionType::Heading)?;
            if *level > 6 {
                return bad(format!("heading level {level} of {id} is out of range"));
            }
        }
        for (id, grid) in &self.tables {
            let r = typed(id, RegionType::Table)?;
            if grid.region != *id {
                return bad(format!("grid stored under {id} names {}", grid.region));
            }
            grid.check(&r.bbox)?;
        }
        for (id, spec) in &self.lists {
            let r = typed(id, RegionType::List)?;
            if spec.region != *id {
                return bad(format!("list spec stored under {id} names {}", spec.region));
            }
            spec.check(&r.bbox)?;
        }
        for (id, alt) in &self.figures {
            typed(id, RegionType::Figure)?;
            if alt.region != *id {
                return bad(format!("alt text stored under {id} names {}", alt.region));
            }
        }
        for (id, f) in &self.formulas {
            typed(id, RegionType::Formula)?;
            if f.region != *id {
                return bad(format!("formula stored under {id} names {}", f.region));
            }
        }
        Ok(())
    }

    /// Drops data that only makes sense for a region of type `keep`.
    fn drop_typed_data(&mut self, id: RegionId, keep: Option<RegionType>) {
        if keep != Some(RegionType::Heading) {
            self.heading_levels.remove(&id);
        }
        if keep != Some(RegionType::Table) {
            self.tables.remove(&id);
        }
        if keep != Some(RegionType::List) {
            self.lists.remove(&id);
        }
        if keep != Some(RegionType::Figure) {
            self.figures.remove(&id);
        }
        if keep != Some(RegionType::Formula) {
            self.formulas.remove(&id);
        }
    }

    fn require(&self, id: RegionId, want: RegionType) -> Result<&Region> {
        match self.regions.region(id) {
            Some(r) if r.rtype == want => Ok(r),
            Some(r) => Err(Error::InvalidInput(format!("{id} is a {:?} region, not {want:?}", r.rtype))),
            None => Err(Error::UnknownRegion(id)),
        }
    }

    /// Applies one edit. On error the tagmap is left unchanged.
    ///
    /// Cascades: deleting a region or changing its type drops the heading
    /// level, grid, list spec, alt text or formula stored for it; resizing
    /// drops a grid or list spec that no longer fits the new box; re-running
    /// detection replaces all region data and clears the flags of steps 1-7.
    pub fn apply(&mut self, doc: &TaggedDocument, action: &StepAction) -> Result<()> {
        let mut next = self.clone();
        next.apply_in_place(doc, action)?;
        *self = next;
        Ok(())
    }

    fn apply_in_place(&mut self, doc: &TaggedDocument, action: &StepAction) -> Result<()> {
        use StepAction::*;
        match action {
            DetectRegions { confirm } => {
                let has_regions = self.regions.regions().next().is_some();
                if has_regions && !confirm {
                    return Err(Error::InvalidInput(
                        "re-detecting regions deletes the existing ones; set confirm to proceed".into(),
                    ));
                }
                let fresh = crate::autotag::auto_tag(doc)?;
                let meta = std::mem::take(&mut self.meta);
                let step8 = self.steps[7];
                *self = fresh;
                self.meta = meta;
                self.steps[7] = step8;
            }
            ResizeRegion { region, bbox } => {
                if !bbox.is_finite() {
                    return Err(Error::InvalidInput("region box is not finite".into()));
                }
                let new_box = self.regions.resize_region(doc, *region, *bbox)?.bbox;
                if self.tables.get(region).is_some_and(|g| g.check(&new_box).is_err()) {
                    self.tables.remove(region);
                }
                if self.lists.get(region).is_some_and(|s| s.check(&new_box).is_err()) {
                    self.lists.remove(region);
                }
            }
            DeleteRegions { regions } => {
                self.regions.delete_regions(regions)?;
                for id in regions {
                    self.drop_typed_data(*id, None);
                }
            }
            SetRegionType { region, rtype } => {
                self.regions.set_region_type(*region, *rtype)?;
                self.drop_typed_data(*region, Some(*rtype));
            }
            CreateRegion { ops, rtype } => {
                self.regions.create_region_from_selection(doc, ops, *rtype)?;
            }
            CreateRegionFromBox { page, bbox, rtype } => {
                self.regions.create_region_from_box(doc, *page, *bbox, *rtype)?;
            }
            DrawReadingOrder { page, polyline } => {
                self.regions.draw_reading_order(*page, polyline)?;
            }
            MoveInOrder { page, region, index } => {
                self.regions.move_in_order(*page, *region, *index)?;
            }
            DemoteToArtifact { region } => {
                self.regions.demote_to_artifact(*region)?;
                self.drop_typed_data(*region, Some(RegionType::Artifact));
            }
            SetHeadingLevel { region, level } => {
                self.require(*region, RegionType::Heading)?;
                if *level > 6 {
                    return Err(Error::InvalidInput(format!("heading level {level} is out of range")));
                }
                self.heading_levels.insert(*region, *level);
            }
            DetectHeadingLevels => {
                let headings = heading_styles(doc, self);
                let outline = detect_heading_levels(&headings)?;
                self.heading_levels = outline.entries.iter().map(|e| (e.region, e.level)).collect();
            }
            SetTableGrid { grid } => {
                let r = self.require(grid.region, RegionType::Table)?;
                grid.check(&r.bbox)?;
                self.tables.insert(grid.region, grid.clone());
            }
            ClearTableGrid { region } => {
                self.require(*region, RegionType::Table)?;
                self.tables.remove(region);
            }
            SetListSpec { spec } => {
                let r = self.require(spec.region, RegionType::List)?;
                spec.check(&r.bbox)?;
                self.lists.insert(spec.region, spec.clone());
            }
            ClearListSpec { region } => {
                self.require(*region, RegionType::List)?;
                self.lists.remove(region);
            }
            SetFigureAlt { region, text, decorative } => {
                self.require(*region, RegionType::Figure)?;
                self.figures
                    .insert(*region, AltText { region: *region, text: text.clone(), decorative: *decorative });
            }
            SetFormulaLatex { region, latex } => {
                self.require(*region, RegionType::Formula)?;
                let alt_text = formula_alt_text(latex)?;
                self.formulas
                    .insert(*region, FormulaEntry { region: *region, latex: latex.clone(), alt_text, manual: false });
            }
            SetFormulaAltText { region, text } => {
                self.require(*region, RegionType::Formula)?;
                let entry = self.formulas.entry(*region).or_insert_with(|| FormulaEntry {
                    region: *region,
                    latex: String::new(),
                    alt_text: String::new(),
                    manual: true,
                });
                entry.alt_text = text.clone();
                entry.manual = true;
            }
            SetMeta { title, author, language } => {
                self.meta = set_meta(title, author, language)?;
            }
            Complete { step, done } => {
                check_step(*step)?;
                self.steps[usize::from(*step - 1)] = *done;
            }
        }
        Ok(())
    }

    /// Read-only view of one step, recomputed from the current state.
    pub fn step_view(&self, doc: &TaggedDocument, step: u8) -> Result<StepView> {
        check_step(step)?;
        let complete = self.step_done(step);
        let of_type = |t: RegionType| self.ordered_regions().into_iter().filter(move |r| r.rtype == t);
        let data = match step {
            1 => StepData::Regions {
                pages: self
                    .regions
                    .pages
                    .iter()
                    .zip(&doc.pages)
                    .map(|(layout, page)| PageRegions {
                        page: layout.page,
                        regions: layout.regions.clone(),
                        artifacts: layout.artifacts.iter().copied().collect(),
                        untagged: self.regions.untagged(page),
                    })
                    .collect(),
            },
            2 => StepData::ReadingOrder { pages: self.regions.pages.iter().map(|p| p.order()).collect() },
            3 => {
                let outline = self.heading_outline();
                StepData::Headings {
                    headings: outline
                        .into_iter()
                        .map(|(id, raw, level)| {
                            let r = self.regions.region(id).expect("outline ids resolve");
                            HeadingView { region: id, page: r.page, raw_level: raw, level, text: region_text(doc, r) }
                        })
                        .collect(),
                }
            }
            4 => StepData::Tables {
                tables: of_type(RegionType::Table)
                    .map(|r| TableView { region: r.id, page: r.page, bbox: r.bbox, grid: self.tables.get(&r.id).cloned() })
                    .collect(),
            },
            5 => StepData::Lists {
                lists: of_type(RegionType::List)
                    .map(|r| ListView { region: r.id, page: r.page, bbox: r.bbox, spec: self.lists.get(&r.id).cloned() })
                    .collect(),
            },
            6 => StepData::Figures {
                figures: of_type(RegionType::Figure)
                    .map(|r| {
                        let alt = self.figures.get(&r.id);
                        let text = alt.map(|a| a.text.clone()).unwrap_or_default();
                        FigureView {
                            region: r.id,
                            page: r.page,
                            bbox: r.bbox,
                            budget: word_budget(&text),
                            text,
                            decorative: alt.is_some_and(|a| a.decorative),
                        }
                    })
                    .collect(),
            },
            7 => StepData::Formulas {
                formulas: of_type(RegionType::Formula)
                    .map(|r| {
                        let e = self.formulas.get(&r.id);
                        FormulaView {
                            region: r.id,
                            page: r.page,
                            bbox: r.bbox,
                            latex: e.map(|e| e.latex.clone()).unwrap_or_default(),
                            alt_text: e.map(|e| e.alt_text.clone()).unwrap_or_default(),
                            manual: e.is_some_and(|e| e.manual),
                        }
                    })
                    .collect(),
            },
            _ => {
                let (violations, assembly_error) = match self.preview_violations(doc) {
                    Ok(v) => (v, None),
                    Err(e) => (Vec::new(), Some(e)),
                };
                StepData::Meta { meta: self.meta.clone(), page_count: doc.pages.len(), violations, assembly_error }
            }
        };
        Ok(StepView { step, complete, data })
    }
}

/// `(region, dominant font size, style)` for every heading region in
/// reading order. The dominant size is the one covering the most text.
pub fn heading_styles(doc: &TaggedDocument, map: &Tagmap) -> Vec<(RegionId, f64, crate::model::FontStyle)> {
    map.ordered_regions()
        .into_iter()
        .filter(|r| r.rtype == RegionType::Heading)
        .map(|r| {
            let ops = region_ops(doc, r);
            let mut best: Option<(usize, f64, crate::model::FontStyle)> = None;
            for op in ops.iter().filter(|o| o.font_size.is_some()) {
                let weight = op.text.as_deref().map_or(0, |t| t.chars().count());
                let size = op.font_size.unwrap_or(0.0);
                let style = op.font_style.unwrap_or_default();
                if best.is_none_or(|(w, s, _)| weight > w || (weight == w && size > s)) {
                    best = Some((weight, size, style));
                }
            }
            let (_, size, style) = best.unwrap_or((0, 0.0, Default::default()));
            (r.id, size, style)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepView {
    pub step: u8,
    pub complete: bool,
    #[serde(flatten)]
    pub data: StepData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepData {
    Regions { pages: Vec<PageRegions> },
    ReadingOrder { pages: Vec<crate::region::ReadingOrder> },
    Headings { headings: Vec<HeadingView> },
    Tables { tables: Vec<TableView> },
    Lists { lists: Vec<ListView> },
    Figures { figures: Vec<FigureView> },
    Formulas { formulas: Vec<FormulaView> },
    Meta { meta: DocMeta, page_count: usize, violations: Vec<Violation>, assembly_error: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRegions {
    pub page: u32,
    pub regions: Vec<Region>,
    pub artifacts: Vec<OpId>,
    pub untagged: Vec<OpId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadingView {
    pub region: RegionId,
    pub page: u32,
    pub raw_level: RawLevel,
    pub level: u8,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableView {
    pub region: RegionId,
    pub page: u32,
    pub bbox: Rect,
    pub grid: Option<TableGrid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListView {
    pub region: RegionId,
    pub page: u32,
    pub bbox: Rect,
    pub spec: Option<ListSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureView {
    pub region: RegionId,
    pub page: u32,
    pub bbox: Rect,
    pub text: String,
    pub decorative: bool,
    pub budget: WordBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaView {
    pub region: RegionId,
    pub page: u32,
    pub bbox: Rect,
    pub latex: String,
    pub alt_text: String,
    pub manual: bool,
}
