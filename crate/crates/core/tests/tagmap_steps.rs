use pdf_remediate::fixture::{study_fixture, StudyFixture};
use pdf_remediate::geometry::{Point, Rect};
use pdf_remediate::model::{OpId, TagKind, TaggedDocument};
use pdf_remediate::pdf::parse_pdf;
use pdf_remediate::region::{Polyline, RegionId, RegionType};
use pdf_remediate::structure::{HeaderMode, ListSpec, TableGrid};
use pdf_remediate::tagmap::{StepAction, StepData, Tagmap};
use pdf_remediate::Error;

fn setup() -> (StudyFixture, TaggedDocument, Tagmap) {
    let f = study_fixture();
    let doc = parse_pdf(&f.pdf).unwrap();
    let map = f.golden_tagmap(&doc).unwrap();
    (f, doc, map)
}

fn first_of(map: &Tagmap, t: RegionType) -> RegionId {
    map.ordered_regions().into_iter().find(|r| r.rtype == t).unwrap().id
}

fn fixtures_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

#[test]
fn checked_in_fixture_files_are_current() {
    let (f, _, map) = setup();
    let dir = fixtures_dir();
    assert_eq!(std::fs::read(dir.join("study.pdf")).unwrap(), f.pdf, "run the make_fixture example");
    assert_eq!(std::fs::read(dir.join("study.truth.json")).unwrap(), f.truth.to_json());
    assert_eq!(Tagmap::from_json(&std::fs::read(dir.join("study.golden.tagmap.json")).unwrap()).unwrap(), map);
}

#[test]
fn deleting_regions_drops_their_data() {
    let (_, doc, mut map) = setup();
    let table = first_of(&map, RegionType::Table);
    let heading = first_of(&map, RegionType::Heading);
    assert!(map.tables.contains_key(&table) && map.heading_levels.contains_key(&heading));
    map.apply(&doc, &StepAction::DeleteRegions { regions: vec![table, heading] }).unwrap();
    assert!(!map.tables.contains_key(&table));
    assert!(!map.heading_levels.contains_key(&heading));
    assert!(map.regions.region(table).is_none());
    map.check_consistency(&doc).unwrap();
}

#[test]
fn retyping_keeps_only_matching_data() {
    let (_, doc, mut map) = setup();
    let figure = first_of(&map, RegionType::Figure);
    map.apply(&doc, &StepAction::SetRegionType { region: figure, rtype: RegionType::Paragraph }).unwrap();
    assert!(!map.figures.contains_key(&figure));
    let formula = first_of(&map, RegionType::Formula);
    map.apply(&doc, &StepAction::SetRegionType { region: formula, rtype: RegionType::Formula }).unwrap();
    assert!(map.formulas.contains_key(&formula));
    let list = first_of(&map, RegionType::List);
    map.apply(&doc, &StepAction::DemoteToArtifact { region: list }).unwrap();
    assert!(!map.lists.contains_key(&list));
    assert!(!map.ordered_regions().iter().any(|r| r.id == list));
    map.check_consistency(&doc).unwrap();
}

#[test]
fn resizing_drops_a_grid_that_no_longer_fits() {
    let (_, doc, map) = setup();
    let table = first_of(&map, RegionType::Table);
    let bbox = map.regions.region(table).unwrap().bbox;

    let mut grown = map.clone();
    grown.apply(&doc, &StepAction::ResizeRegion { region: table, bbox: bbox.expand(2.0) }).unwrap();
    assert!(grown.tables.contains_key(&table));

    let grid = &map.tables[&table];
    let top_half = Rect::new(bbox.x0, grid.h_lines[grid.h_lines.len() - 1] + 0.5, bbox.x1, bbox.y1);
    let mut shrunk = map.clone();
    shrunk.apply(&doc, &StepAction::ResizeRegion { region: table, bbox: top_half }).unwrap();
    assert!(!shrunk.tables.contains_key(&table));
    shrunk.check_consistency(&doc).unwrap();
}

#[test]
fn redetection_needs_confirmation_and_keeps_metadata() {
    let (_, doc, map) = setup();
    let mut edited = map.clone();
    let err = edited.apply(&doc, &StepAction::DetectRegions { confirm: false }).unwrap_err();
    assert!(matches!(err, Error::InvalidInput(_)));
    assert_eq!(edited, map);
    edited.apply(&doc, &StepAction::DetectRegions { confirm: true }).unwrap();
    assert_eq!(edited.meta, map.meta);
    assert_eq!(edited.steps, [false, false, false, false, false, false, false, true]);
    assert!(edited.tables.is_empty() && edited.lists.is_empty() && edited.formulas.is_empty());
}

#[test]
fn failed_actions_change_nothing() {
    let (_, doc, map) = setup();
    let heading = first_of(&map, RegionType::Heading);
    let table = first_of(&map, RegionType::Table);
    let bad = [
        StepAction::SetHeadingLevel { region: heading, level: 7 },
        StepAction::SetHeadingLevel { region: table, level: 2 },
        StepAction::SetFormulaLatex { region: first_of(&map, RegionType::Formula), latex: "\\frac{1".into() },
        StepAction::SetMeta { title: "T".into(), author: String::new(), language: "not a tag".into() },
        StepAction::SetTableGrid {
            grid: TableGrid { region: table, h_lines: vec![0.0], v_lines: vec![], header_mode: HeaderMode::None },
        },
        StepAction::CreateRegion { ops: vec![OpId::new(0, 1)], rtype: RegionType::Paragraph },
        StepAction::CreateRegion { ops: vec![OpId::new(0, 9999)], rtype: RegionType::Paragraph },
        StepAction::MoveInOrder { page: 0, region: heading, index: 999 },
        StepAction::Complete { step: 9, done: true },
        StepAction::DeleteRegions { regions: vec![heading, RegionId(999_999)] },
    ];
    for action in bad {
        let mut m = map.clone();
        assert!(m.apply(&doc, &action).is_err(), "{action:?} should fail");
        assert_eq!(m, map, "{action:?} left changes behind");
    }
}

#[test]
fn formula_alt_text_follows_latex_until_overridden() {
    let (_, doc, mut map) = setup();
    let formula = first_of(&map, RegionType::Formula);
    map.apply(&doc, &StepAction::SetFormulaLatex { region: formula, latex: "x^{2}".into() }).unwrap();
    assert_eq!(map.formulas[&formula].alt_text, "x Superscript 2 Baseline");
    assert!(!map.formulas[&formula].manual);
    map.apply(&doc, &StepAction::SetFormulaAltText { region: formula, text: "x squared".into() }).unwrap();
    assert_eq!(map.formulas[&formula].alt_text, "x squared");
    assert!(map.formulas[&formula].manual);
    assert_eq!(map.formulas[&formula].latex, "x^{2}");
}

#[test]
fn decorative_figures_leave_the_tree() {
    let (_, doc, mut map) = setup();
    let figure = first_of(&map, RegionType::Figure);
    map.apply(&doc, &StepAction::SetFigureAlt { region: figure, text: String::new(), decorative: true }).unwrap();
    let tree = map.assemble(&doc).unwrap();
    let mut figures = 0;
    tree.walk(&mut |n, _| figures += usize::from(n.tag == TagKind::Figure));
    assert_eq!(figures, 0);
}

#[test]
fn heading_levels_are_repaired_on_assembly() {
    let (_, doc, mut map) = setup();
    let headings: Vec<RegionId> =
        map.ordered_regions().into_iter().filter(|r| r.rtype == RegionType::Heading).map(|r| r.id).collect();
    for id in &headings {
        map.apply(&doc, &StepAction::SetHeadingLevel { region: *id, level: 4 }).unwrap();
    }
    // each heading may go at most one level below its predecessor
    let levels: Vec<u8> = map.heading_outline().iter().map(|(_, _, l)| *l).collect();
    assert_eq!(&levels[..6], &[1, 2, 3, 4, 4, 4]);
    map.apply(&doc, &StepAction::SetHeadingLevel { region: headings[2], level: 1 }).unwrap();
    let levels: Vec<u8> = map.heading_outline().iter().map(|(_, _, l)| *l).collect();
    assert_eq!(&levels[..5], &[1, 2, 1, 2, 3]);
    map.assemble_valid(&doc).unwrap();
}

#[test]
fn heading_detection_ranks_sizes() {
    let (_, doc, mut map) = setup();
    map.heading_levels.clear();
    map.apply(&doc, &StepAction::DetectHeadingLevels).unwrap();
    let levels: Vec<u8> = map.heading_outline().iter().map(|(_, _, l)| *l).collect();
    // title 18pt, sections 11pt, subsections 10.5pt, then the 9pt bold italic pair
    assert_eq!(levels[..4], [1, 2, 2, 2]);
    assert!(levels.contains(&4));
}

#[test]
fn reading_order_can_be_redrawn() {
    let (_, doc, mut map) = setup();
    let before = map.regions.page(0).unwrap().reading_order.clone();
    // right column first, then left: a polyline down the right column
    let line = Polyline::new(vec![Point::new(400.0, 700.0), Point::new(400.0, 60.0)]).unwrap();
    map.apply(&doc, &StepAction::DrawReadingOrder { page: 0, polyline: line }).unwrap();
    let after = map.regions.page(0).unwrap().reading_order.clone();
    assert_ne!(after, before);
    let mut a = after.clone();
    let mut b = before.clone();
    a.sort();
    b.sort();
    assert_eq!(a, b, "redrawing permutes the same regions");
    let first = map.regions.region(after[0]).unwrap();
    assert!(first.bbox.x0 >= 318.0, "right column comes first");
}

#[test]
fn step_views_cover_each_step() {
    let (_, doc, map) = setup();
    let kinds: Vec<&str> = (1..=8)
        .map(|s| match map.step_view(&doc, s).unwrap().data {
            StepData::Regions { .. } => "regions",
            StepData::ReadingOrder { .. } => "reading_order",
            StepData::Headings { .. } => "headings",
            StepData::Tables { .. } => "tables",
            StepData::Lists { .. } => "lists",
            StepData::Figures { .. } => "figures",
            StepData::Formulas { .. } => "formulas",
            StepData::Meta { .. } => "meta",
        })
        .collect();
    assert_eq!(kinds, ["regions", "reading_order", "headings", "tables", "lists", "figures", "formulas", "meta"]);
    assert!(matches!(map.step_view(&doc, 0), Err(Error::UnknownStep(0))));
    match map.step_view(&doc, 7).unwrap().data {
        StepData::Formulas { formulas } => assert_eq!(formulas.len(), 3),
        _ => unreachable!(),
    }
}

#[test]
fn every_action_survives_json() {
    let r = RegionId(3);
    let actions = vec![
        StepAction::DetectRegions { confirm: true },
        StepAction::ResizeRegion { region: r, bbox: Rect::new(1.0, 2.0, 3.0, 4.0) },
        StepAction::DeleteRegions { regions: vec![r] },
        StepAction::SetRegionType { region: r, rtype: RegionType::Caption },
        StepAction::CreateRegion { ops: vec![OpId::new(1, 2)], rtype: RegionType::Formula },
        StepAction::CreateRegionFromBox { page: 0, bbox: Rect::new(0.0, 0.0, 5.0, 5.0), rtype: RegionType::Figure },
        StepAction::DrawReadingOrder {
            page: 1,
            polyline: Polyline::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)]).unwrap(),
        },
        StepAction::MoveInOrder { page: 0, region: r, index: 2 },
        StepAction::DemoteToArtifact { region: r },
        StepAction::SetHeadingLevel { region: r, level: 0 },
        StepAction::DetectHeadingLevels,
        StepAction::SetTableGrid {
            grid: TableGrid { region: r, h_lines: vec![1.5], v_lines: vec![2.5], header_mode: HeaderMode::FirstRow },
        },
        StepAction::ClearTableGrid { region: r },
        StepAction::SetListSpec {
            spec: ListSpec { region: r, item_separators: vec![1.0, 2.0], nesting: [(1, 0)].into_iter().collect() },
        },
        StepAction::ClearListSpec { region: r },
        StepAction::SetFigureAlt { region: r, text: "a \"chart\"".into(), decorative: false },
        StepAction::SetFormulaLatex { region: r, latex: "\\sqrt{x}".into() },
        StepAction::SetFormulaAltText { region: r, text: "root".into() },
        StepAction::SetMeta { title: "T".into(), author: "A".into(), language: "en-GB".into() },
        StepAction::Complete { step: 4, done: false },
    ];
    let steps: Vec<u8> = actions.iter().map(StepAction::step).collect();
    assert_eq!(steps, [1, 1, 1, 1, 1, 1, 2, 2, 2, 3, 3, 4, 4, 5, 5, 6, 7, 7, 8, 4]);
    for a in actions {
        let json = serde_json::to_string(&a).unwrap();
        let back: StepAction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a, "{json}");
    }
}

#[test]
fn tagmaps_from_other_documents_are_rejected() {
    let (_, _, map) = setup();
    let mut composer = pdf_remediate::pdf::PdfComposer::new();
    composer.add_page(612.0, 792.0).text(72.0, 700.0, 12.0, pdf_remediate::pdf::StdFont::Regular, "other");
    let other = parse_pdf(&composer.finish()).unwrap();
    assert!(matches!(map.check_consistency(&other), Err(Error::InvalidInput(_))));
}
