//! PDF input and output: parsing into [`TaggedDocument`](crate::model::TaggedDocument),
//! writing tagged output, and composing small untagged documents.

pub mod compose;
mod fonts;
mod interp;
mod meta;
mod reader;
mod writer;

pub use compose::{PdfComposer, StdFont};
pub use meta::{is_valid_language_tag, set_meta};
pub use reader::parse_pdf;
pub use writer::write_tagged_pdf;
