use pdf_remediate::fixture::study_fixture;
use pdf_remediate::pdf::{parse_pdf, write_tagged_pdf};
use pdf_remediate::scorer::{score_document, Criterion, TruthRole};

#[test]
fn fixture_has_expected_inventory() {
    let f = study_fixture();
    assert_eq!(f.count(TruthRole::Heading), 17);
    assert_eq!(f.count(TruthRole::List), 4);
    assert_eq!(f.count(TruthRole::Figure), 1);
    assert_eq!(f.count(TruthRole::Table), 1);
    assert_eq!(f.count(TruthRole::Formula), 3);
    let doc = parse_pdf(&f.pdf).unwrap();
    assert_eq!(doc.pages.len(), 3);
    f.truth.check_against(&doc).unwrap();
}

#[test]
fn golden_corrections_score_full_marks_after_export() {
    let f = study_fixture();
    let doc = parse_pdf(&f.pdf).unwrap();
    let map = f.golden_tagmap(&doc).unwrap();
    let tree = map.assemble_valid(&doc).unwrap();
    let bytes = write_tagged_pdf(&doc, &tree, &map.meta).unwrap();
    let back = parse_pdf(&bytes).unwrap();
    let report = score_document(&back, &f.truth).unwrap();
    for c in Criterion::ALL {
        let r = report.get(c);
        assert_eq!(r.score, Some(100.0), "{}: {r:?}", c.label());
    }
    assert_eq!(report.average, Some(100.0));
}

#[test]
fn untouched_auto_tagging_is_imperfect_but_complete() {
    let f = study_fixture();
    let doc = parse_pdf(&f.pdf).unwrap();
    let map = pdf_remediate::autotag::auto_tag(&doc).unwrap();
    let tree = map.assemble_valid(&doc).unwrap();
    let bytes = write_tagged_pdf(&doc, &tree, &map.meta).unwrap();
    let report = score_document(&parse_pdf(&bytes).unwrap(), &f.truth).unwrap();
    assert_eq!(report.get(Criterion::AllContentTagged).score, Some(100.0));
    assert!(report.average.unwrap() < 100.0);
}
