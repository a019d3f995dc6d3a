//! Regenerates the checked-in sample article under `tests/fixtures` and prints
//! how the untouched auto-tagging scores against its ground truth.

use std::path::PathBuf;

use pdf_remediate::autotag::auto_tag;
use pdf_remediate::fixture::study_fixture;
use pdf_remediate::pdf::{parse_pdf, write_tagged_pdf};
use pdf_remediate::scorer::{render_table, score_document, CorpusColumn};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    std::fs::create_dir_all(&dir)?;
    let f = study_fixture();
    let doc = parse_pdf(&f.pdf)?;
    let golden = f.golden_tagmap(&doc)?;
    std::fs::write(dir.join("study.pdf"), &f.pdf)?;
    std::fs::write(dir.join("study.truth.json"), f.truth.to_json())?;
    std::fs::write(dir.join("study.golden.tagmap.json"), golden.to_json())?;

    let auto = auto_tag(&doc)?;
    let tagged = write_tagged_pdf(&doc, &auto.assemble_valid(&doc)?, &auto.meta)?;
    let report = score_document(&parse_pdf(&tagged)?, &f.truth)?;
    print!("{}", render_table(&[CorpusColumn { name: "auto-tag".into(), report }]));
    Ok(())
}
