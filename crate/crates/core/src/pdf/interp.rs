//! Content-stream interpreter: walks decoded operations and produces one
//! positioned operator record per text-showing, image or path-painting
//! operation.

use std::collections::HashMap;
use std::ops::Range;

use lopdf::content::Operation;
use lopdf::{Dictionary, Document, Object, ObjectId};

use super::fonts::{deref, deref_dict, number, FontInfo};
use crate::geometry::{Matrix, Point, Rect};
use crate::model::{FontStyle, OpKind};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct InterpretedOp {
    pub kind: OpKind,
    pub bbox: Rect,
    pub text: Option<String>,
    pub font_size: Option<f64>,
    pub font_style: Option<FontStyle>,
    pub mcid: Option<u32>,
    pub artifact: bool,
    /// Operations (indices into the decoded stream) that make up this
    /// operator: the show/Do operation alone, or a path's construction
    /// operations plus its painting operator.
    pub range: Range<usize>,
}

/// Resource dictionaries visible to a page, innermost first.
pub(crate) struct Resources<'a> {
    doc: &'a Document,
    dicts: Vec<&'a Dictionary>,
}

impl<'a> Resources<'a> {
    pub fn for_page(doc: &'a Document, page_id: ObjectId) -> Self {
        let mut dicts = Vec::new();
        if let Ok((inline, ids)) = doc.get_page_resources(page_id) {
            dicts.extend(inline);
            dicts.extend(ids.into_iter().filter_map(|id| doc.get_dictionary(id).ok()));
        }
        Resources { doc, dicts }
    }

    fn lookup(&self, category: &[u8], name: &[u8]) -> Option<&'a Object> {
        self.dicts.iter().find_map(|d| {
            let cat = deref_dict(self.doc, d.get(category).ok())?;
            cat.get(name).ok().map(|o| deref(self.doc, o))
        })
    }
}

#[derive(Clone)]
struct GraphicsState {
    ctm: Matrix,
    font: Option<Vec<u8>>,
    font_size: f64,
    char_spacing: f64,
    word_spacing: f64,
    h_scale: f64,
    leading: f64,
    rise: f64,
}

impl Default for GraphicsState {
    fn default() -> Self {
        Self {
            ctm: Matrix::IDENTITY,
            font: None,
            font_size: 0.0,
            char_spacing: 0.0,
            word_spacing: 0.0,
            h_scale: 1.0,
            leading: 0.0,
            rise: 0.0,
        }
    }
}

struct MarkedContent {
    mcid: Option<u32>,
    artifact: bool,
}

struct Interpreter<'a> {
    doc: &'a Document,
    resources: &'a Resources<'a>,
    fonts: HashMap<Vec<u8>, FontInfo<'a>>,
    fallback_font: FontInfo<'a>,
    gs: GraphicsState,
    stack: Vec<GraphicsState>,
    tm: Matrix,
    tlm: Matrix,
    marked: Vec<MarkedContent>,
    path: Vec<Point>,
    path_start: Option<usize>,
    out: Vec<InterpretedOp>,
}

pub(crate) fn interpret(doc: &Document, resources: &Resources<'_>, ops: &[Operation]) -> Vec<InterpretedOp> {
    let mut it = Interpreter {
        doc,
        resources,
        fonts: HashMap::new(),
        fallback_font: FontInfo::fallback(),
        gs: GraphicsState::default(),
        stack: Vec::new(),
        tm: Matrix::IDENTITY,
        tlm: Matrix::IDENTITY,
        marked: Vec::new(),
        path: Vec::new(),
        path_start: None,
        out: Vec::new(),
    };
    for (i, op) in ops.iter().enumerate() {
        it.step(i, op);
    }
    it.out
}

fn nums(operands: &[Object]) -> Vec<f64> {
    operands.iter().filter_map(number).collect()
}

fn matrix_of(v: &[f64]) -> Option<Matrix> {
    (v.len() >= 6).then(|| Matrix::new(v[0], v[1], v[2], v[3], v[4], v[5]))
}

impl<'a> Interpreter<'a> {
    fn step(&mut self, i: usize, op: &Operation) {
        let args = &op.operands;
        match op.operator.as_str() {
            "q" => self.stack.push(self.gs.clone()),
            "Q" => {
                if let Some(gs) = self.stack.pop() {
                    self.gs = gs;
                }
            }
            "cm" => {
                if let Some(m) = matrix_of(&nums(args)) {
                    self.gs.ctm = m.then(&self.gs.ctm);
                }
            }
            "BT" => {
                self.tm = Matrix::IDENTITY;
                self.tlm = Matrix::IDENTITY;
            }
            "Tf" => {
                if let (Some(Object::Name(name)), Some(size)) = (args.first(), args.get(1).and_then(number)) {
                    self.gs.font = Some(name.clone());
                    self.gs.font_size = size;
                    self.load_font(name);
                }
            }
            "Tc" => self.set_num(args, |gs, v| gs.char_spacing = v),
            "Tw" => self.set_num(args, |gs, v| gs.word_spacing = v),
            "Tz" => self.set_num(args, |gs, v| gs.h_scale = v / 100.0),
            "TL" => self.set_num(args, |gs, v| gs.leading = v),
            "Ts" => self.set_num(args, |gs, v| gs.rise = v),
            "Td" => {
                let v = nums(args);
                if v.len() >= 2 {
                    self.move_line(v[0], v[1]);
                }
            }
            "TD" => {
                let v = nums(args);
                if v.len() >= 2 {
                    self.gs.leading = -v[1];
                    self.move_line(v[0], v[1]);
                }
            }
            "Tm" => {
                if let Some(m) = matrix_of(&nums(args)) {
                    self.tm = m;
                    self.tlm = m;
                }
            }
            "T*" => self.move_line(0.0, -self.gs.leading),
            "Tj" => {
                if let Some(Object::String(s, _)) = args.first() {
                    self.show(i, &[Object::String(s.clone(), Default::default())]);
                }
            }
            "'" => {
                self.move_line(0.0, -self.gs.leading);
                if let Some(s @ Object::String(..)) = args.first() {
                    self.show(i, std::slice::from_ref(s));
                }
            }
            "\"" => {
                let v = nums(args);
                if v.len() >= 2 {
                    self.gs.word_spacing = v[0];
                    self.gs.char_spacing = v[1];
                }
                self.move_line(0.0, -self.gs.leading);
                if let Some(s @ Object::String(..)) = args.get(2) {
                    self.show(i, std::slice::from_ref(s));
                }
            }
            "TJ" => {
                if let Some(Object::Array(items)) = args.first() {
                    self.show(i, items);
                }
            }
            "Do" => {
                if let Some(Object::Name(name)) = args.first() {
                    self.xobject(i, name);
                }
            }
            "BI" => {
                let bbox = self.gs.ctm.apply_rect(&Rect::new(0.0, 0.0, 1.0, 1.0));
                self.emit(OpKind::Image, bbox, None, None, None, i..i + 1);
            }
            "m" | "l" => {
                let v = nums(args);
                if v.len() >= 2 {
                    self.path_point(i, v[0], v[1]);
                }
            }
            "c" => {
                let v = nums(args);
                for pair in v.chunks_exact(2).take(3) {
                    self.path_point(i, pair[0], pair[1]);
                }
            }
            "v" | "y" => {
                let v = nums(args);
                for pair in v.chunks_exact(2).take(2) {
                    self.path_point(i, pair[0], pair[1]);
                }
            }
            "re" => {
                let v = nums(args);
                if v.len() >= 4 {
                    let (x, y, w, h) = (v[0], v[1], v[2], v[3]);
                    for (px, py) in [(x, y), (x + w, y), (x + w, y + h), (x, y + h)] {
                        self.path_point(i, px, py);
                    }
                }
            }
            "h" => {}
            "S" | "s" | "f" | "F" | "f*" | "B" | "B*" | "b" | "b*" => self.paint(i),
            "n" => {
                self.path.clear();
                self.path_start = None;
            }
            "BMC" | "BDC" => self.begin_marked(args),
            "EMC" => {
                self.marked.pop();
            }
            _ => {}
        }
    }

    fn set_num(&mut self, args: &[Object], f: impl FnOnce(&mut GraphicsState, f64)) {
        if let Some(v) = args.first().and_then(number) {
            f(&mut self.gs, v);
        }
    }

    fn move_line(&mut self, tx: f64, ty: f64) {
        self.tlm = Matrix::translate(tx, ty).then(&self.tlm);
        self.tm = self.tlm;
    }

    fn load_font(&mut self, name: &[u8]) {
        if self.fonts.contains_key(name) {
            return;
        }
        let info = match self.resources.lookup(b"Font", name).and_then(|o| o.as_dict().ok()) {
            Some(dict) => FontInfo::load(self.doc, dict),
            None => FontInfo::fallback(),
        };
        self.fonts.insert(name.to_vec(), info);
    }

    fn show(&mut self, i: usize, items: &[Object]) {
        let font = self
            .gs
            .font
            .as_ref()
            .and_then(|n| self.fonts.get(n))
            .unwrap_or(&self.fallback_font);
        let fs = self.gs.font_size;
        let th = self.gs.h_scale;
        let start = self.tm;
        let mut advance = 0.0;
        let mut text = String::new();
        let mut saw_glyph = false;
        for item in items {
            match item {
                Object::String(bytes, _) => {
                    for code in font.codes(bytes) {
                        let mut w = font.width(code) / 1000.0 * fs + self.gs.char_spacing;
                        if font.is_space(code) {
                            w += self.gs.word_spacing;
                        }
                        advance += w * th;
                    }
                    text.push_str(&font.decode(bytes));
                    saw_glyph |= !bytes.is_empty();
                }
                other => {
                    if let Some(adj) = number(other) {
                        advance -= adj / 1000.0 * fs * th;
                    }
                }
            }
        }
        let (ascent, descent, style) = (font.ascent, font.descent, font.style);
        self.tm = Matrix::translate(advance, 0.0).then(&self.tm);
        if !saw_glyph {
            return;
        }
        let rise = self.gs.rise;
        let local = Rect::new(0.0, descent * fs + rise, advance, ascent * fs + rise);
        let trm = start.then(&self.gs.ctm);
        let bbox = trm.apply_rect(&local);
        let size = fs * trm.vertical_scale();
        self.emit(OpKind::TextRun, bbox, Some(text), Some(size), Some(style), i..i + 1);
    }

    fn xobject(&mut self, i: usize, name: &[u8]) {
        let Some(stream) = self.resources.lookup(b"XObject", name).and_then(|o| o.as_stream().ok()) else {
            return;
        };
        let subtype = stream.dict.get(b"Subtype").ok().and_then(|o| o.as_name().ok());
        let bbox = if subtype == Some(b"Form".as_slice()) {
            let local = stream
                .dict
                .get(b"BBox")
                .ok()
                .map(|o| nums(deref(self.doc, o).as_array().map(Vec::as_slice).unwrap_or(&[])))
                .filter(|v| v.len() >= 4)
                .map(|v| Rect::new(v[0], v[1], v[2], v[3]))
                .unwrap_or(Rect::new(0.0, 0.0, 1.0, 1.0));
            let form_matrix = stream
                .dict
                .get(b"Matrix")
                .ok()
                .and_then(|o| matrix_of(&nums(deref(self.doc, o).as_array().map(Vec::as_slice).unwrap_or(&[]))))
                .unwrap_or(Matrix::IDENTITY);
            form_matrix.then(&self.gs.ctm).apply_rect(&local)
        } else {
            self.gs.ctm.apply_rect(&Rect::new(0.0, 0.0, 1.0, 1.0))
        };
        self.emit(OpKind::Image, bbox, None, None, None, i..i + 1);
    }

    fn path_point(&mut self, i: usize, x: f64, y: f64) {
        if self.path_start.is_none() {
            self.path_start = Some(i);
        }
        self.path.push(self.gs.ctm.apply(Point::new(x, y)));
    }

    fn paint(&mut self, i: usize) {
        let points = std::mem::take(&mut self.path);
        let start = self.path_start.take().unwrap_or(i);
        if let Some(bbox) = Rect::from_points(points) {
            self.emit(OpKind::Path, bbox, None, None, None, start..i + 1);
        }
    }

    fn begin_marked(&mut self, args: &[Object]) {
        let tag = args.first().and_then(|o| o.as_name().ok()).unwrap_or_default();
        let props = match args.get(1) {
            Some(Object::Dictionary(d)) => Some(d),
            Some(Object::Name(n)) => self.resources.lookup(b"Properties", n).and_then(|o| o.as_dict().ok()),
            _ => None,
        };
        let mcid = props
            .and_then(|d| d.get(b"MCID").ok())
            .and_then(|o| o.as_i64().ok())
            .and_then(|v| u32::try_from(v).ok());
        self.marked.push(MarkedContent { mcid, artifact: tag == b"Artifact" });
    }

    fn emit(
        &mut self,
        kind: OpKind,
        bbox: Rect,
        text: Option<String>,
        font_size: Option<f64>,
        font_style: Option<FontStyle>,
        range: Range<usize>,
    ) {
        let bbox = if bbox.is_finite() { bbox } else { Rect::new(0.0, 0.0, 0.0, 0.0) };
        let artifact = self.marked.iter().any(|m| m.artifact);
        let mcid = if artifact { None } else { self.marked.iter().rev().find_map(|m| m.mcid) };
        self.out.push(InterpretedOp { kind, bbox, text, font_size, font_style, mcid, artifact, range });
    }
}
