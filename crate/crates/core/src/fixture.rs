//! A three-page, two-column sample article used by tests, the acceptance
//! suite and demos: seventeen headings, four lists, one figure, one table
//! and three display formulas, plus running headers and page numbers.
//!
//! The layout is described once. The PDF, its ground truth and the golden
//! corrections applied on top of auto-tagging are all derived from it.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;
use crate::geometry::{Point, Rect};
use crate::model::{OpId, TaggedDocument};
use crate::pdf::{PdfComposer, StdFont};
use crate::region::RegionType;
use crate::scorer::{TruthCell, TruthElement, TruthMap, TruthRole, TRUTH_VERSION};
use crate::structure::{HeaderMode, ListSpec, TableGrid};
use crate::tagmap::{StepAction, Tagmap};

pub const TITLE: &str = "Accessible Remediation of Scientific PDFs";
pub const AUTHOR: &str = "A. Author and B. Author";

const PAGE_W: f64 = 612.0;
const PAGE_H: f64 = 792.0;
const LEFT: (f64, f64) = (54.0, 300.0);
const RIGHT: (f64, f64) = (318.0, 558.0);
const FULL: (f64, f64) = (54.0, 558.0);
const BODY: f64 = 9.0;
const LEADING: f64 = 11.0;
const BLOCK_GAP: f64 = 10.0;
const BOTTOM: f64 = 60.0;

/// Formulas of the fixture: displayed text, LaTeX source.
pub const FORMULAS: [(&str, &str); 3] = [
    ("m = (1/n) sum_{i=1}^{n} x_i", "m = \\frac{1}{n} \\sum_{i=1}^{n} x_{i}"),
    ("d = sqrt( (x_2 - x_1)^2 + (y_2 - y_1)^2 )", "d = \\sqrt{(x_{2} - x_{1})^{2} + (y_{2} - y_{1})^{2}}"),
    ("F_1 = 2 p r / (p + r)", "F_{1} = \\frac{2 p r}{p + r}"),
];

pub const FIGURE_ALT: &str =
    "Screenshot of the tagging interface: step navigation on the left, the workspace in the middle and the page view with colored region boxes on the right.";

/// One laid-out element of the fixture with everything needed to describe
/// and to tag it.
#[derive(Debug, Clone)]
pub struct Placed {
    pub role: TruthRole,
    pub page: u32,
    pub ops: Vec<u32>,
    /// Operators line by line, for continuity links.
    pub lines: Vec<Vec<u32>>,
    pub level: u8,
    pub title: bool,
    /// Lists: items top to bottom (nested ones included), their parents and
    /// separator positions.
    pub list_items: Vec<Vec<u32>>,
    pub list_parents: BTreeMap<usize, usize>,
    pub separators: Vec<f64>,
    /// Tables: cell operators row by row (the first row is the header).
    pub cells: Vec<Vec<Vec<u32>>>,
    pub h_lines: Vec<f64>,
    pub v_lines: Vec<f64>,
    /// Formulas: equation number operator and LaTeX.
    pub number: Option<u32>,
    pub latex: String,
}

impl Placed {
    fn new(role: TruthRole, page: u32) -> Self {
        Self {
            role,
            page,
            ops: Vec::new(),
            lines: Vec::new(),
            level: 0,
            title: false,
            list_items: Vec::new(),
            list_parents: BTreeMap::new(),
            separators: Vec::new(),
            cells: Vec::new(),
            h_lines: Vec::new(),
            v_lines: Vec::new(),
            number: None,
            latex: String::new(),
        }
    }

    fn ids(&self, seqs: &[u32]) -> BTreeSet<OpId> {
        seqs.iter().map(|s| OpId::new(self.page, *s)).collect()
    }

    /// Operators the golden tagmap puts in this element's region.
    pub fn region_ops(&self) -> Vec<OpId> {
        let mut all: Vec<u32> = self.ops.clone();
        all.extend(self.number);
        all.sort_unstable();
        all.into_iter().map(|s| OpId::new(self.page, s)).collect()
    }
}

fn wrap(text: &str, width: f64, size: f64, font: StdFont) -> Vec<String> {
    let mut lines = Vec::new();
    let mut current = String::new();
    for word in text.split_whitespace() {
        let candidate = if current.is_empty() { word.to_string() } else { format!("{current} {word}") };
        if font.text_width(&candidate, size) > width && !current.is_empty() {
            lines.push(std::mem::replace(&mut current, word.to_string()));
        } else {
            current = candidate;
        }
    }
    if !current.is_empty() {
        lines.push(current);
    }
    lines
}

struct Column {
    x0: f64,
    x1: f64,
    /// Bottom of the last thing drawn.
    y: f64,
}

struct Writer<'a> {
    composer: &'a mut PdfComposer,
    page: u32,
    placed: Vec<Placed>,
}

impl Writer<'_> {
    fn draft(&mut self) -> &mut crate::pdf::compose::PageDraft {
        self.composer.page_mut(self.page as usize)
    }

    /// Baseline for the next line of `size` after a gap of `gap` below the
    /// column cursor.
    fn baseline(col: &Column, size: f64, gap: f64) -> f64 {
        col.y - gap - 0.8 * size
    }

    fn line(&mut self, col: &mut Column, indent: f64, size: f64, font: StdFont, text: &str, gap: f64) -> u32 {
        let y = Self::baseline(col, size, gap);
        assert!(y - 0.2 * size > BOTTOM, "fixture column overflows at `{text}`");
        let seq = self.draft().text(col.x0 + indent, y, size, font, text);
        col.y = y - 0.2 * size;
        seq
    }

    fn lines(&mut self, col: &mut Column, indent: f64, size: f64, font: StdFont, text: &str, gap: f64) -> Vec<u32> {
        let width = col.x1 - col.x0 - indent;
        wrap(text, width, size, font)
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let g = if i == 0 { gap } else { LEADING - size };
                self.line(col, indent, size, font, l, g)
            })
            .collect()
    }

    fn heading(&mut self, col: &mut Column, level: u8, text: &str) {
        let (size, font) = match level {
            2 => (11.0, StdFont::Bold),
            3 => (10.5, StdFont::Bold),
            _ => (BODY, StdFont::BoldItalic),
        };
        let mut p = Placed::new(TruthRole::Heading, self.page);
        p.level = level;
        p.lines = vec![vec![self.line(col, 0.0, size, font, text, BLOCK_GAP)]];
        p.ops = p.lines.concat();
        self.placed.push(p);
    }

    fn paragraph(&mut self, col: &mut Column, text: &str) {
        self.paragraph_sized(col, text, BODY, TruthRole::Paragraph);
    }

    fn paragraph_sized(&mut self, col: &mut Column, text: &str, size: f64, role: TruthRole) {
        let mut p = Placed::new(role, self.page);
        let width = col.x1 - col.x0;
        for (i, l) in wrap(text, width, size, StdFont::Regular).iter().enumerate() {
            let gap = if i == 0 { BLOCK_GAP } else { LEADING - size };
            p.lines.push(vec![self.line(col, 0.0, size, StdFont::Regular, l, gap)]);
        }
        p.ops = p.lines.concat();
        self.placed.push(p);
    }

    /// `items`: (nesting depth, text). Depth-1 items nest under the closest
    /// preceding depth-0 item.
    fn list(&mut self, col: &mut Column, items: &[(usize, &str)]) {
        let mut p = Placed::new(TruthRole::List, self.page);
        let mut last_top = 0;
        let mut prev_bottom: Option<f64> = None;
        for (i, (depth, text)) in items.iter().enumerate() {
            let indent = 10.0 + 12.0 * *depth as f64;
            let gap = if i == 0 { BLOCK_GAP } else { LEADING - BODY };
            let bullet = if *depth == 0 { "- " } else { "o " };
            let seqs = self.lines(col, indent, BODY, StdFont::Regular, &format!("{bullet}{text}"), gap);
            if let Some(bottom) = prev_bottom {
                let top = col.y + 0.2 * BODY + (seqs.len() as f64 - 1.0) * LEADING + BODY;
                p.separators.push((bottom + top) / 2.0);
            }
            prev_bottom = Some(col.y);
            if *depth == 0 {
                last_top = i;
            } else {
                p.list_parents.insert(i, last_top);
            }
            p.lines.extend(seqs.iter().map(|s| vec![*s]));
            p.list_items.push(seqs);
        }
        p.separators.sort_by(f64::total_cmp);
        p.ops = p.list_items.concat();
        self.placed.push(p);
    }

    fn figure(&mut self, col: &mut Column, height: f64, caption: &str) {
        let top = col.y - BLOCK_GAP;
        let rect = Rect::new(col.x0 + 10.0, top - height, col.x1 - 10.0, top);
        let seq = self.draft().image(rect);
        col.y = rect.y0;
        let mut p = Placed::new(TruthRole::Figure, self.page);
        p.ops = vec![seq];
        self.placed.push(p);
        self.paragraph_sized(col, caption, 8.0, TruthRole::Caption);
    }

    fn table(&mut self, col: &mut Column, caption: &str, rows: &[[&str; 3]]) {
        self.paragraph_sized(col, caption, 8.0, TruthRole::Caption);
        let xs = [col.x0 + 4.0, col.x0 + 90.0, col.x0 + 170.0];
        let mut p = Placed::new(TruthRole::Table, self.page);
        p.v_lines = vec![col.x0 + 86.0, col.x0 + 166.0];
        let rule = |w: &mut Self, y: f64, col: &Column| {
            let seq = w.draft().line(Point::new(col.x0, y), Point::new(col.x1, y), 0.5);
            let mut a = Placed::new(TruthRole::Artifact, w.page);
            a.ops = vec![seq];
            w.placed.push(a);
        };
        let top = col.y - BLOCK_GAP;
        rule(self, top, col);
        col.y = top - 2.0;
        for (r, row) in rows.iter().enumerate() {
            let y = col.y - 3.0 - 0.8 * BODY;
            let font = if r == 0 { StdFont::Bold } else { StdFont::Regular };
            let cells: Vec<Vec<u32>> = row
                .iter()
                .zip(xs)
                .map(|(text, x)| vec![self.draft().text(x, y, BODY, font, text)])
                .collect();
            p.lines.push(cells.concat());
            p.cells.push(cells);
            let bottom = y - 0.2 * BODY - 3.0;
            if r + 1 < rows.len() {
                p.h_lines.push(bottom);
            }
            if r == 0 {
                rule(self, bottom, col);
            }
            col.y = bottom;
        }
        rule(self, col.y - 1.0, col);
        col.y -= 1.0;
        p.h_lines.sort_by(f64::total_cmp);
        p.ops = p.cells.concat().concat();
        // cells of a row are read left to right, not line by line
        p.lines.clear();
        self.placed.push(p);
    }

    fn formula(&mut self, col: &mut Column, index: usize) {
        let (text, latex) = FORMULAS[index];
        let font = StdFont::Italic;
        let y = Self::baseline(col, BODY, BLOCK_GAP);
        let width = font.text_width(text, BODY);
        let x = col.x0 + ((col.x1 - col.x0) - width) / 2.0;
        let seq = self.draft().text(x, y, BODY, font, text);
        let label = format!("({})", index + 1);
        let lx = col.x1 - StdFont::Regular.text_width(&label, BODY);
        let number = self.draft().text(lx, y, BODY, StdFont::Regular, &label);
        col.y = y - 0.2 * BODY;
        let mut p = Placed::new(TruthRole::Formula, self.page);
        p.ops = vec![seq];
        p.number = Some(number);
        p.latex = latex.to_string();
        self.placed.push(p);
    }

    fn artifact_text(&mut self, x: f64, y: f64, size: f64, text: &str) {
        let seq = self.draft().text(x, y, size, StdFont::Regular, text);
        let mut a = Placed::new(TruthRole::Artifact, self.page);
        a.ops = vec![seq];
        self.placed.push(a);
    }
}

fn column((x0, x1): (f64, f64), y: f64) -> Column {
    Column { x0, x1, y }
}

const ABSTRACT: &str = "Many scientific documents are published as untagged PDF files that screen reader users cannot navigate. We describe a tool that guides authors through eight tagging steps and report a study comparing it with a commercial editor.";
const INTRO: &str = "Portable documents dominate scholarly publishing. Without a structure tree, assistive technology reads the page in content stream order, which mixes columns, headers and figure labels into the running text.";
const INTRO_2: &str = "Our contributions are summarised below; the remaining sections follow the order of the tagging process.";
const RELATED: &str = "Prior work has studied automatic tagging, manual repair in commercial editors and the conversion of documents into accessible web formats.";
const TOOLS: &str = "Commercial editors expose the structure tree directly. This requires expert knowledge of the tag set and of the accessibility standard.";
const FORMULA_WORK: &str = "Mathematical content needs alternative text that can be spoken without ambiguity, which calls for a rule set such as MathSpeak.";
const METHOD: &str = "Participants remediated a shortened version of a conference paper with both tools in counterbalanced order.";
const MATERIAL: &str = "The document contains headings on three levels, lists, a figure, a table and displayed formulas, all common in scientific papers.";
const AFTER_FIGURE: &str = "The figure above shows the interface used during the study sessions.";
const SCORING: &str = "Each criterion is scored as the share of correctly tagged elements among all elements relevant to the criterion. The mean of the values is";
const SCORING_2: &str = "and the distance between two detected region centers is measured as";
const RESULTS: &str = "Participants reached higher accuracy with the guided tool on almost every criterion.";
const ACCURACY: &str = "Table 1 lists the scores of both tools for the headings and tables criteria.";
const TIMING: &str = "Most of the time was spent on the first two steps. Precision and recall of region detection combine into";
const DISCUSSION: &str = "Participants asked for the following improvements to the tool.";
const CONCLUSION: &str = "Guided tagging lets novice users produce accessible documents of a quality that experts reach only with considerable effort.";
const REFERENCES: &str = "[1] A. Author. Tagging scientific documents. In Proceedings of the Conference on Accessibility, 2024. [2] B. Author. Speaking mathematics. Journal of Assistive Technology, 2023.";

/// The sample article with its ground truth.
#[derive(Debug, Clone)]
pub struct StudyFixture {
    pub pdf: Vec<u8>,
    pub truth: TruthMap,
    /// Elements in reading order.
    pub elements: Vec<Placed>,
}

pub fn study_fixture() -> StudyFixture {
    let mut composer = PdfComposer::new().info("", AUTHOR);
    for _ in 0..3 {
        composer.add_page(PAGE_W, PAGE_H);
    }
    let mut w = Writer { composer: &mut composer, page: 0, placed: Vec::new() };

    // page 1
    let mut full = column(FULL, 750.0);
    let mut title = Placed::new(TruthRole::Heading, 0);
    title.level = 1;
    title.title = true;
    title.lines = vec![vec![w.line(&mut full, 0.0, 18.0, StdFont::Bold, TITLE, 0.0)]];
    title.ops = title.lines.concat();
    w.placed.push(title);
    w.paragraph_sized(&mut full, AUTHOR, 10.0, TruthRole::Paragraph);
    let start = full.y - 8.0;
    let mut left = column(LEFT, start);
    w.heading(&mut left, 2, "ABSTRACT");
    w.paragraph(&mut left, ABSTRACT);
    w.heading(&mut left, 2, "1 INTRODUCTION");
    w.paragraph(&mut left, INTRO);
    w.paragraph(&mut left, INTRO_2);
    w.list(
        &mut left,
        &[
            (0, "a tool that splits remediation into eight guided steps,"),
            (0, "a scoring scheme with thirteen tag accuracy criteria,"),
            (0, "a user study with nineteen participants."),
        ],
    );
    let mut right = column(RIGHT, start);
    w.heading(&mut right, 2, "2 RELATED WORK");
    w.paragraph(&mut right, RELATED);
    w.heading(&mut right, 3, "2.1 Remediation Tools");
    w.paragraph(&mut right, TOOLS);
    w.list(
        &mut right,
        &[
            (0, "editors that expose the raw tag tree,"),
            (1, "including reading order panels,"),
            (0, "checkers that only report problems."),
        ],
    );
    w.heading(&mut right, 3, "2.2 Formula Accessibility");
    w.paragraph(&mut right, FORMULA_WORK);
    w.artifact_text(302.0, 40.0, 8.0, "1");

    // page 2
    w.page = 1;
    w.artifact_text(54.0, 760.0, 8.0, "Accessible Remediation of Scientific PDFs");
    let mut left = column(LEFT, 740.0);
    w.heading(&mut left, 2, "3 METHOD");
    w.paragraph(&mut left, METHOD);
    w.heading(&mut left, 3, "3.1 Study Material");
    w.paragraph(&mut left, MATERIAL);
    w.figure(&mut left, 120.0, "Figure 1: The tagging interface with step navigation, workspace and page view.");
    w.paragraph(&mut left, AFTER_FIGURE);
    let mut right = column(RIGHT, 740.0);
    w.heading(&mut right, 3, "3.2 Procedure");
    w.heading(&mut right, 4, "3.2.1 Tasks");
    w.list(
        &mut right,
        &[
            (0, "Tag all regions of every page."),
            (0, "Fix the reading order."),
            (0, "Check heading levels, tables and lists."),
            (0, "Add alternative text and metadata."),
        ],
    );
    w.heading(&mut right, 4, "3.2.2 Scoring");
    w.paragraph(&mut right, SCORING);
    w.formula(&mut right, 0);
    w.paragraph(&mut right, SCORING_2);
    w.formula(&mut right, 1);
    w.artifact_text(302.0, 40.0, 8.0, "2");

    // page 3
    w.page = 2;
    w.artifact_text(54.0, 760.0, 8.0, "Accessible Remediation of Scientific PDFs");
    let mut left = column(LEFT, 740.0);
    w.heading(&mut left, 2, "4 RESULTS");
    w.paragraph(&mut left, RESULTS);
    w.heading(&mut left, 3, "4.1 Accuracy");
    w.paragraph(&mut left, ACCURACY);
    w.table(
        &mut left,
        "Table 1: Tag accuracy per tool in percent.",
        &[["Criterion", "Guided", "Editor"], ["Headings", "100.0", "83.7"], ["Tables", "100.0", "33.3"]],
    );
    w.heading(&mut left, 3, "4.2 Timing");
    w.paragraph(&mut left, TIMING);
    w.formula(&mut left, 2);
    let mut right = column(RIGHT, 740.0);
    w.heading(&mut right, 2, "5 DISCUSSION");
    w.paragraph(&mut right, DISCUSSION);
    w.list(
        &mut right,
        &[
            (0, "skip steps that do not apply,"),
            (0, "colors that do not rely on red and green,"),
            (0, "an accessible way to draw the reading order."),
        ],
    );
    w.heading(&mut right, 2, "6 CONCLUSION");
    w.paragraph(&mut right, CONCLUSION);
    w.heading(&mut right, 2, "REFERENCES");
    w.paragraph_sized(&mut right, REFERENCES, 8.0, TruthRole::Paragraph);
    w.artifact_text(302.0, 40.0, 8.0, "3");

    let elements = w.placed;
    let pdf = composer.finish();
    let truth = truth_of(&elements);
    StudyFixture { pdf, truth, elements }
}

fn truth_of(elements: &[Placed]) -> TruthMap {
    let mut out = Vec::new();
    let mut continuity = Vec::new();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in elements {
        let name = match p.role {
            TruthRole::Heading => "heading",
            TruthRole::Paragraph => "paragraph",
            TruthRole::Table => "table",
            TruthRole::List => "list",
            TruthRole::Figure => "figure",
            TruthRole::Formula => "formula",
            TruthRole::Caption => "caption",
            TruthRole::Artifact => "artifact",
        };
        let n = counts.entry(name).or_default();
        *n += 1;
        let mut e = TruthElement::new(format!("{name}-{n}"), p.role, p.ids(&p.ops));
        match p.role {
            TruthRole::Heading => {
                e.level = Some(p.level);
                e.title = p.title;
            }
            TruthRole::Table => {
                e.rows = Some(
                    p.cells
                        .iter()
                        .enumerate()
                        .map(|(r, row)| row.iter().map(|c| TruthCell { ops: p.ids(c), header: r == 0 }).collect())
                        .collect(),
                );
            }
            TruthRole::List => {
                // a top-level item owns its nested items
                let mut items: Vec<BTreeSet<OpId>> = Vec::new();
                for (i, seqs) in p.list_items.iter().enumerate() {
                    if p.list_parents.contains_key(&i) {
                        items.last_mut().expect("nested item follows its parent").extend(p.ids(seqs));
                    } else {
                        items.push(p.ids(seqs));
                    }
                }
                e.items = Some(items);
            }
            TruthRole::Formula => {
                e.optional_ops = p.number.map(|s| OpId::new(p.page, s)).into_iter().collect();
            }
            _ => {}
        }
        for pair in p.lines.windows(2) {
            let a = *pair[0].last().expect("non-empty line");
            let b = pair[1][0];
            continuity.push((OpId::new(p.page, a), OpId::new(p.page, b)));
        }
        out.push(e);
    }
    TruthMap { version: TRUTH_VERSION, document: "study-fixture".into(), elements: out, continuity }
}

fn region_type(role: TruthRole) -> RegionType {
    match role {
        TruthRole::Heading => RegionType::Heading,
        TruthRole::Paragraph => RegionType::Paragraph,
        TruthRole::Table => RegionType::Table,
        TruthRole::List => RegionType::List,
        TruthRole::Figure => RegionType::Figure,
        TruthRole::Formula => RegionType::Formula,
        TruthRole::Caption => RegionType::Caption,
        TruthRole::Artifact => RegionType::Artifact,
    }
}

impl StudyFixture {
    /// Corrections that turn `current` (typically the auto-tagging result)
    /// into the golden tagmap: regions are redrawn element by element in
    /// reading order, then every later step is filled in. Region ids are
    /// predicted from `current.regions.next_id`.
    pub fn golden_actions(&self, current: &Tagmap) -> Vec<StepAction> {
        let mut actions = Vec::new();
        let existing: Vec<_> = current.regions.regions().map(|r| r.id).collect();
        if !existing.is_empty() {
            actions.push(StepAction::DeleteRegions { regions: existing });
        }
        let mut ids = Vec::new();
        for (next, p) in (current.regions.next_id..).zip(&self.elements) {
            actions.push(StepAction::CreateRegion { ops: p.region_ops(), rtype: region_type(p.role) });
            ids.push(crate::region::RegionId(next));
        }
        actions.push(StepAction::Complete { step: 1, done: true });
        actions.push(StepAction::Complete { step: 2, done: true });
        for (p, id) in self.elements.iter().zip(&ids) {
            if p.role == TruthRole::Heading {
                actions.push(StepAction::SetHeadingLevel { region: *id, level: p.level });
            }
        }
        actions.push(StepAction::Complete { step: 3, done: true });
        for (p, id) in self.elements.iter().zip(&ids) {
            if p.role == TruthRole::Table {
                actions.push(StepAction::SetTableGrid {
                    grid: TableGrid {
                        region: *id,
                        h_lines: p.h_lines.clone(),
                        v_lines: p.v_lines.clone(),
                        header_mode: HeaderMode::FirstRow,
                    },
                });
            }
        }
        actions.push(StepAction::Complete { step: 4, done: true });
        for (p, id) in self.elements.iter().zip(&ids) {
            if p.role == TruthRole::List {
                actions.push(StepAction::SetListSpec {
                    spec: ListSpec { region: *id, item_separators: p.separators.clone(), nesting: p.list_parents.clone() },
                });
            }
        }
        actions.push(StepAction::Complete { step: 5, done: true });
        for (p, id) in self.elements.iter().zip(&ids) {
            if p.role == TruthRole::Figure {
                actions.push(StepAction::SetFigureAlt { region: *id, text: FIGURE_ALT.into(), decorative: false });
            }
        }
        actions.push(StepAction::Complete { step: 6, done: true });
        for (p, id) in self.elements.iter().zip(&ids) {
            if p.role == TruthRole::Formula {
                actions.push(StepAction::SetFormulaLatex { region: *id, latex: p.latex.clone() });
            }
        }
        actions.push(StepAction::Complete { step: 7, done: true });
        actions.push(StepAction::SetMeta { title: TITLE.into(), author: AUTHOR.into(), language: "en".into() });
        actions.push(StepAction::Complete { step: 8, done: true });
        actions
    }

    /// Auto-tagging followed by the golden corrections.
    pub fn golden_tagmap(&self, doc: &TaggedDocument) -> Result<Tagmap> {
        let mut map = crate::autotag::auto_tag(doc)?;
        for action in self.golden_actions(&map) {
            map.apply(doc, &action)?;
        }
        Ok(map)
    }

    pub fn count(&self, role: TruthRole) -> usize {
        self.elements.iter().filter(|p| p.role == role).count()
    }
}
