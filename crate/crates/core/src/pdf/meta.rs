use crate::error::{Error, Result};
use crate::model::{DocMeta, UaFlags};

/// Builds document metadata from the user-editable fields. Everything else
/// PDF/UA needs is filled in here.
pub fn set_meta(title: &str, author: &str, language: &str) -> Result<DocMeta> {
    if !is_valid_language_tag(language) {
        return Err(Error::InvalidLanguageTag(language.to_string()));
    }
    Ok(DocMeta {
        title: title.to_string(),
        author: author.to_string(),
        language: language.to_string(),
        ua_flags: UaFlags::FULL,
    })
}

/// Structural BCP 47 check: a 2-8 letter primary subtag (or `x`/`i` for
/// private use and grandfathered tags) followed by 1-8 character
/// alphanumeric subtags.
pub fn is_valid_language_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let Some(primary) = parts.next() else { return false };
    let primary_ok = (2..=8).contains(&primary.len()) && primary.chars().all(|c| c.is_ascii_alphabetic())
        || primary.eq_ignore_ascii_case("x")
        || primary.eq_ignore_ascii_case("i");
    if !primary_ok {
        return false;
    }
    let mut rest = 0;
    for part in parts {
        if part.is_empty() || part.len() > 8 || !part.chars().all(|c| c.is_ascii_alphanumeric()) {
            return false;
        }
        rest += 1;
    }
    // `x` and `i` need at least one following subtag
    primary.len() > 1 || rest > 0
}
