//! Minimal writer for untagged PDFs: positioned single-line text runs in the
//! Helvetica family, stroked lines, filled rectangles and placeholder images.
//! Each drawing call produces exactly one content operator, and returns its
//! sequence number on the page.

use lopdf::content::{Content, Operation};
use lopdf::{dictionary, Dictionary, Document, Object, ObjectId, Stream, StringFormat};

use super::fonts::{HELVETICA_BOLD_WIDTHS, HELVETICA_WIDTHS};
use crate::geometry::{Point, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StdFont {
    Regular,
    Bold,
    Italic,
    BoldItalic,
}

impl StdFont {
    fn resource(self) -> &'static str {
        match self {
            StdFont::Regular => "F1",
            StdFont::Bold => "F2",
            StdFont::Italic => "F3",
            StdFont::BoldItalic => "F4",
        }
    }

    fn base_font(self) -> &'static str {
        match self {
            StdFont::Regular => "Helvetica",
            StdFont::Bold => "Helvetica-Bold",
            StdFont::Italic => "Helvetica-Oblique",
            StdFont::BoldItalic => "Helvetica-BoldOblique",
        }
    }

    fn widths(self) -> &'static [u16; 95] {
        match self {
            StdFont::Regular | StdFont::Italic => &HELVETICA_WIDTHS,
            StdFont::Bold | StdFont::BoldItalic => &HELVETICA_BOLD_WIDTHS,
        }
    }

    /// Advance width of `text` at `size` points. Characters outside printable
    /// ASCII are written as `?`.
    pub fn text_width(self, text: &str, size: f64) -> f64 {
        let widths = self.widths();
        text.chars()
            .map(|c| {
                let code = if (' '..='~').contains(&c) { c as usize } else { '?' as usize };
                f64::from(widths[code - 32])
            })
            .sum::<f64>()
            * size
            / 1000.0
    }
}

const ALL_FONTS: [StdFont; 4] = [StdFont::Regular, StdFont::Bold, StdFont::Italic, StdFont::BoldItalic];

#[derive(Debug, Clone)]
enum Item {
    Text { x: f64, y: f64, size: f64, font: StdFont, text: String },
    Line { from: Point, to: Point, width: f64 },
    FillRect { rect: Rect, gray: f64 },
    Image { rect: Rect },
}

#[derive(Debug, Clone)]
pub struct PageDraft {
    width: f64,
    height: f64,
    items: Vec<Item>,
}

impl PageDraft {
    fn push(&mut self, item: Item) -> u32 {
        self.items.push(item);
        (self.items.len() - 1) as u32
    }

    /// Text run with its baseline starting at `(x, y)`.
    pub fn text(&mut self, x: f64, y: f64, size: f64, font: StdFont, text: &str) -> u32 {
        self.push(Item::Text { x, y, size, font, text: text.to_string() })
    }

    pub fn line(&mut self, from: Point, to: Point, width: f64) -> u32 {
        self.push(Item::Line { from, to, width })
    }

    pub fn fill_rect(&mut self, rect: Rect, gray: f64) -> u32 {
        self.push(Item::FillRect { rect, gray })
    }

    pub fn image(&mut self, rect: Rect) -> u32 {
        self.push(Item::Image { rect })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    fn operations(&self) -> Vec<Operation> {
        let mut ops = Vec::new();
        for item in &self.items {
            match item {
                Item::Text { x, y, size, font, text } => {
                    let bytes: Vec<u8> =
                        text.chars().map(|c| if (' '..='~').contains(&c) { c as u8 } else { b'?' }).collect();
                    ops.push(Operation::new("BT", vec![]));
                    ops.push(Operation::new("Tf", vec![Object::Name(font.resource().into()), (*size).into()]));
                    ops.push(Operation::new("Td", vec![(*x).into(), (*y).into()]));
                    ops.push(Operation::new("Tj", vec![Object::String(bytes, StringFormat::Literal)]));
                    ops.push(Operation::new("ET", vec![]));
                }
                Item::Line { from, to, width } => {
                    ops.push(Operation::new("q", vec![]));
                    ops.push(Operation::new("w", vec![(*width).into()]));
                    ops.push(Operation::new("m", vec![from.x.into(), from.y.into()]));
                    ops.push(Operation::new("l", vec![to.x.into(), to.y.into()]));
                    ops.push(Operation::new("S", vec![]));
                    ops.push(Operation::new("Q", vec![]));
                }
                Item::FillRect { rect, gray } => {
                    ops.push(Operation::new("q", vec![]));
                    ops.push(Operation::new("g", vec![(*gray).into()]));
                    ops.push(Operation::new(
                        "re",
                        vec![rect.x0.into(), rect.y0.into(), rect.width().into(), rect.height().into()],
                    ));
                    ops.push(Operation::new("f", vec![]));
                    ops.push(Operation::new("Q", vec![]));
                }
                Item::Image { rect } => {
                    ops.push(Operation::new("q", vec![]));
                    ops.push(Operation::new(
                        "cm",
                        vec![
                            rect.width().into(),
                            0.into(),
                            0.into(),
                            rect.height().into(),
                            rect.x0.into(),
                            rect.y0.into(),
                        ],
                    ));
                    ops.push(Operation::new("Do", vec![Object::Name(b"Im1".to_vec())]));
                    ops.push(Operation::new("Q", vec![]));
                }
            }
        }
        ops
    }
}

/// Builder for small untagged documents.
#[derive(Debug, Clone, Default)]
pub struct PdfComposer {
    pages: Vec<PageDraft>,
    title: Option<String>,
    author: Option<String>,
}

impl PdfComposer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn info(mut self, title: &str, author: &str) -> Self {
        self.title = Some(title.to_string());
        self.author = Some(author.to_string());
        self
    }

    pub fn add_page(&mut self, width: f64, height: f64) -> &mut PageDraft {
        self.pages.push(PageDraft { width, height, items: Vec::new() });
        self.pages.last_mut().expect("just pushed")
    }

    pub fn page_mut(&mut self, index: usize) -> &mut PageDraft {
        &mut self.pages[index]
    }

    pub fn finish(&self) -> Vec<u8> {
        let mut doc = Document::with_version("1.7");
        let pages_id = doc.new_object_id();

        let mut fonts = Dictionary::new();
        for font in ALL_FONTS {
            let widths: Vec<Object> = font.widths().iter().map(|w| Object::Integer(i64::from(*w))).collect();
            let id = doc.add_object(dictionary! {
                "Type" => "Font",
                "Subtype" => "Type1",
                "BaseFont" => font.base_font(),
                "Encoding" => "WinAnsiEncoding",
                "FirstChar" => 32,
                "LastChar" => 126,
                "Widths" => widths,
            });
            fonts.set(font.resource(), Object::Reference(id));
        }
        let image_id = doc.add_object(Stream::new(
            dictionary! {
                "Type" => "XObject",
                "Subtype" => "Image",
                "Width" => 2,
                "Height" => 2,
                "ColorSpace" => "DeviceGray",
                "BitsPerComponent" => 8,
            },
            vec![0x40, 0xc0, 0xc0, 0x40],
        ));
        let resources_id = doc.add_object(dictionary! {
            "Font" => fonts,
            "XObject" => dictionary! { "Im1" => Object::Reference(image_id) },
        });

        let mut kids: Vec<Object> = Vec::new();
        for page in &self.pages {
            let content = Content { operations: page.operations() }.encode().expect("content encodes");
            let content_id = doc.add_object(Stream::new(Dictionary::new(), content));
            let page_id: ObjectId = doc.add_object(dictionary! {
                "Type" => "Page",
                "Parent" => Object::Reference(pages_id),
                "MediaBox" => vec![0.into(), 0.into(), page.width.into(), page.height.into()],
                "Contents" => Object::Reference(content_id),
                "Resources" => Object::Reference(resources_id),
            });
            kids.push(Object::Reference(page_id));
        }
        let count = kids.len() as i64;
        doc.objects.insert(
            pages_id,
            Object::Dictionary(dictionary! {
                "Type" => "Pages",
                "Kids" => kids,
                "Count" => count,
            }),
        );
        let catalog_id = doc.add_object(dictionary! {
            "Type" => "Catalog",
            "Pages" => Object::Reference(pages_id),
        });
        doc.trailer.set("Root", Object::Reference(catalog_id));
        if self.title.is_some() || self.author.is_some() {
            let info_id = doc.add_object(dictionary! {
                "Title" => Object::string_literal(self.title.clone().unwrap_or_default()),
                "Author" => Object::string_literal(self.author.clone().unwrap_or_default()),
            });
            doc.trailer.set("Info", Object::Reference(info_id));
        }
        let mut out = Vec::new();
        doc.save_to(&mut out).expect("writing to memory");
        out
    }
}
