//! Heading levels, table and list construction, the tag grammar and
//! repairs of invalid structures.

mod headings;
mod list;
mod repair;
mod table;
mod validate;

pub use headings::{
    detect_heading_levels, levels_are_valid, repair_headings, repair_levels, HeadingOutline, OutlineEntry, RawLevel,
    SIZE_QUANTUM,
};
pub use list::{build_list, ListSpec};
pub use repair::{repair_list, repair_table, repair_tree};
pub use table::{build_table, HeaderMode, TableGrid};
pub use validate::{validate_subtree, validate_tree, Violation, ViolationKind};
