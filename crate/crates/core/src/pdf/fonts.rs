//! Just enough font handling to measure and decode text-showing operators.

use std::collections::HashMap;

use lopdf::{Dictionary, Document, Encoding, Object};

use crate::model::FontStyle;

/// Advance widths of the Helvetica family for codes 32..=126, in 1/1000 em.
/// Used for standard-14 fonts that ship without a `/Widths` array and by the
/// composer, which writes these same widths into its font dictionaries.
pub(crate) const HELVETICA_WIDTHS: [u16; 95] = [
    278, 278, 355, 556, 556, 889, 667, 191, 333, 333, 389, 584, 278, 333, 278, 278, // 32..47
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556, 278, 278, 584, 584, 584, 556, // 48..63
    1015, 667, 667, 722, 722, 667, 611, 778, 722, 278, 500, 667, 556, 833, 722, 778, // 64..79
    667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611, 278, 278, 278, 469, 556, // 80..95
    333, 556, 556, 500, 556, 556, 278, 556, 556, 222, 222, 500, 222, 833, 556, 556, // 96..111
    556, 556, 333, 500, 278, 556, 500, 722, 500, 500, 500, 334, 260, 334, 584, // 112..126
];

pub(crate) const HELVETICA_BOLD_WIDTHS: [u16; 95] = [
    278, 333, 474, 556, 556, 889, 722, 238, 333, 333, 389, 584, 278, 333, 278, 278, // 32..47
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556, 333, 333, 584, 584, 584, 611, // 48..63
    975, 722, 722, 722, 722, 667, 611, 778, 722, 278, 556, 722, 611, 833, 722, 778, // 64..79
    667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611, 333, 278, 333, 584, 556, // 80..95
    333, 556, 611, 556, 611, 556, 333, 611, 611, 278, 278, 556, 278, 889, 611, 611, // 96..111
    611, 611, 389, 556, 333, 611, 556, 778, 556, 556, 500, 389, 280, 389, 584, // 112..126
];

const DEFAULT_ASCENT: f64 = 0.8;
const DEFAULT_DESCENT: f64 = -0.2;

pub(crate) struct FontInfo<'a> {
    widths: HashMap<u32, f64>,
    default_width: f64,
    two_byte: bool,
    pub ascent: f64,
    pub descent: f64,
    pub style: FontStyle,
    encoding: Option<Encoding<'a>>,
}

impl<'a> FontInfo<'a> {
    /// Fallback for a missing or unreadable font resource.
    pub fn fallback() -> Self {
        FontInfo {
            widths: HashMap::new(),
            default_width: 500.0,
            two_byte: false,
            ascent: DEFAULT_ASCENT,
            descent: DEFAULT_DESCENT,
            style: FontStyle::default(),
            encoding: None,
        }
    }

    pub fn load(doc: &'a Document, dict: &'a Dictionary) -> Self {
        let mut info = FontInfo::fallback();
        let subtype = name_of(dict.get(b"Subtype").ok());
        let base_font = name_of(dict.get(b"BaseFont").ok()).unwrap_or_default();
        info.style = style_from_name(&base_font);

        let mut descriptor = deref_dict(doc, dict.get(b"FontDescriptor").ok());
        if subtype.as_deref() == Some("Type0") {
            info.two_byte = true;
            info.default_width = 1000.0;
            let descendant = dict
                .get(b"DescendantFonts")
                .ok()
                .and_then(|o| deref(doc, o).as_array().ok())
                .and_then(|a| a.first())
                .and_then(|o| deref(doc, o).as_dict().ok());
            if let Some(cid) = descendant {
                if let Some(dw) = cid.get(b"DW").ok().and_then(number) {
                    info.default_width = dw;
                }
                if let Some(w) = cid.get(b"W").ok().and_then(|o| deref(doc, o).as_array().ok()) {
                    info.widths = cid_widths(doc, w);
                }
                if descriptor.is_none() {
                    descriptor = deref_dict(doc, cid.get(b"FontDescriptor").ok());
                }
            }
        } else {
            let first = dict.get(b"FirstChar").ok().and_then(number).unwrap_or(0.0) as u32;
            if let Some(w) = dict.get(b"Widths").ok().and_then(|o| deref(doc, o).as_array().ok()) {
                for (i, v) in w.iter().enumerate() {
                    if let Some(v) = number(deref(doc, v)) {
                        info.widths.insert(first + i as u32, v);
                    }
                }
            } else if base_font.starts_with("Helvetica") || base_font.starts_with("Arial") {
                let table = if info.style.bold { &HELVETICA_BOLD_WIDTHS } else { &HELVETICA_WIDTHS };
                for (i, w) in table.iter().enumerate() {
                    info.widths.insert(32 + i as u32, f64::from(*w));
                }
            } else if base_font.starts_with("Courier") {
                info.default_width = 600.0;
            }
        }

        if let Some(desc) = descriptor {
            if let Some(mw) = desc.get(b"MissingWidth").ok().and_then(number) {
                if !info.two_byte {
                    info.default_width = mw;
                }
            }
            let ascent = desc.get(b"Ascent").ok().and_then(number).unwrap_or(0.0);
            let descent = desc.get(b"Descent").ok().and_then(number).unwrap_or(0.0);
            if ascent > 0.0 {
                info.ascent = ascent / 1000.0;
            }
            if descent < 0.0 {
                info.descent = descent / 1000.0;
            }
            if let Some(flags) = desc.get(b"Flags").ok().and_then(number) {
                let flags = flags as u32;
                // bit 7 italic, bit 19 force bold
                info.style.italic |= flags & (1 << 6) != 0;
                info.style.bold |= flags & (1 << 18) != 0;
            }
            if let Some(weight) = desc.get(b"FontWeight").ok().and_then(number) {
                info.style.bold |= weight >= 600.0;
            }
        }

        info.encoding = dict.get_font_encoding(doc).ok();
        info
    }

    /// Splits a string operand into character codes.
    pub fn codes(&self, bytes: &[u8]) -> Vec<u32> {
        if self.two_byte {
            bytes
                .chunks(2)
                .map(|c| if c.len() == 2 { u32::from(c[0]) << 8 | u32::from(c[1]) } else { u32::from(c[0]) })
                .collect()
        } else {
            bytes.iter().map(|b| u32::from(*b)).collect()
        }
    }

    /// Glyph advance in 1/1000 text-space units.
    pub fn width(&self, code: u32) -> f64 {
        self.widths.get(&code).copied().unwrap_or(self.default_width)
    }

    pub fn is_space(&self, code: u32) -> bool {
        !self.two_byte && code == 32
    }

    pub fn decode(&self, bytes: &[u8]) -> String {
        if let Some(enc) = &self.encoding {
            if let Ok(s) = Document::decode_text(enc, bytes) {
                return s;
            }
        }
        bytes.iter().map(|b| char::from(*b)).collect()
    }
}

fn cid_widths(doc: &Document, w: &[Object]) -> HashMap<u32, f64> {
    let mut out = HashMap::new();
    let mut i = 0;
    while i < w.len() {
        let Some(start) = number(deref(doc, &w[i])) else { break };
        match w.get(i + 1).map(|o| deref(doc, o)) {
            Some(Object::Array(list)) => {
                for (k, v) in list.iter().enumerate() {
                    if let Some(v) = number(v) {
                        out.insert(start as u32 + k as u32, v);
                    }
                }
                i += 2;
            }
            Some(end) => {
                let (Some(end), Some(v)) = (number(end), w.get(i + 2).and_then(number)) else { break };
                for code in start as u32..=end as u32 {
                    out.insert(code, v);
                }
                i += 3;
            }
            None => break,
        }
    }
    out
}

pub(crate) fn style_from_name(base_font: &str) -> FontStyle {
    let lower = base_font.to_ascii_lowercase();
    FontStyle {
        bold: lower.contains("bold") || lower.contains("black") || lower.contains("heavy"),
        italic: lower.contains("italic") || lower.contains("oblique"),
    }
}

pub(crate) fn deref<'a>(doc: &'a Document, obj: &'a Object) -> &'a Object {
    doc.dereference(obj).map(|(_, o)| o).unwrap_or(obj)
}

pub(crate) fn deref_dict<'a>(doc: &'a Document, obj: Option<&'a Object>) -> Option<&'a Dictionary> {
    obj.map(|o| deref(doc, o)).and_then(|o| o.as_dict().ok())
}

pub(crate) fn number(obj: &Object) -> Option<f64> {
    match obj {
        Object::Integer(i) => Some(*i as f64),
        Object::Real(r) => Some(f64::from(*r)),
        _ => None,
    }
}

pub(crate) fn name_of(obj: Option<&Object>) -> Option<String> {
    obj.and_then(|o| o.as_name().ok()).map(|n| String::from_utf8_lossy(n).into_owned())
}
