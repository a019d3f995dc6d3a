//! Acceptance suite. Runs every acceptance criterion, prints one
//! `PASS`/`FAIL` line each with its runtime, and exits non-zero if any
//! criterion fails. Expected values come from oracles written here, not
//! from the library.

use std::collections::{BTreeMap, BTreeSet};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use pdf_remediate::fixture::study_fixture;
use pdf_remediate::geometry::{Point, Rect};
use pdf_remediate::mathtext::{formula_alt_text, parse_latex};
use pdf_remediate::model::{
    Attributes, ContentOp, OpId, OpKind, Scope, StructChild, StructNode, TagKind, TaggedDocument,
};
use pdf_remediate::pdf::{parse_pdf, set_meta, write_tagged_pdf, PdfComposer, StdFont};
use pdf_remediate::region::{draw_reading_order, Polyline, RegionId};
use pdf_remediate::scorer::{percent, score_document, Criterion, ScoreReport};
use pdf_remediate::structure::{
    build_list, build_table, repair_levels, repair_list, repair_table, validate_tree, HeaderMode, ListSpec,
    TableGrid,
};

const SCORE_LIMIT: Duration = Duration::from_secs(1);
const GOLDEN_LIMIT: Duration = Duration::from_secs(10);
const HEADING_LIMIT: Duration = Duration::from_secs(5);
const ORDER_LIMIT: Duration = Duration::from_secs(5);

const HEADING_CASES: usize = 10_000;
const HEADING_MAX_LEN: usize = 50;
/// Sequences up to this length are also checked against exhaustive search.
const EXHAUSTIVE_LEN: usize = 4;
const ORDER_CASES: usize = 1_000;
/// Samples per polyline segment for the first-hit oracle, coarse first.
const ORDER_SAMPLES: [usize; 2] = [512, 8192];
const BUILDER_CASES: usize = 500;
const REPAIR_CASES: usize = 500;
const ROUND_TRIP_DOCS: usize = 20;
const MATH_REPEATS: usize = 3;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let out = match out {
        Ok(_) if took > limit => Err(format!("took {took:.2?}, limit {limit:?}")),
        other => other,
    };
    (out, took)
}

// ---------------------------------------------------------------- scores

fn score_formula() -> Outcome {
    // (correct, total, expected text)
    let cases = [(16, 17, "94.1"), (12, 17, "70.6"), (36, 59, "61.0"), (4, 9, "44.4")];
    for (ct, n, want) in cases {
        let got = percent(ct, n - ct).ok_or("undefined score")?;
        let text = format!("{got:.1}");
        ensure(text == want, || format!("{ct}/{n} gave {text}, want {want}"))?;
        let mut counts = [(0, 0); 13];
        counts[0] = (ct, n - ct);
        let report = ScoreReport::from_counts(&counts);
        let cell = report.get(Criterion::ALL[0]).score.map(|s| format!("{s:.1}"));
        ensure(cell.as_deref() == Some(want), || format!("report cell {cell:?} for {ct}/{n}"))?;
    }
    ensure(percent(0, 0).is_none(), || "0/0 must be undefined".into())?;
    Ok("4 reference ratios".into())
}

// ---------------------------------------------------------------- golden

/// Every mcid in the content streams is referenced from the tree exactly
/// once and every tree reference has an mcid.
fn mcid_bijection(doc: &TaggedDocument) -> Result<(), String> {
    let refs = doc.tagged_ops();
    let ref_set: BTreeSet<OpId> = refs.iter().copied().collect();
    ensure(ref_set.len() == refs.len(), || "an operator is referenced twice".into())?;
    let marked: Vec<OpId> = doc.all_ops().filter(|o| o.mcid.is_some()).map(|o| o.id).collect();
    ensure(doc.mcid_index().len() == marked.len(), || "mcid repeated within a page".into())?;
    let marked: BTreeSet<OpId> = marked.into_iter().collect();
    ensure(marked == ref_set, || {
        let unref: Vec<_> = marked.difference(&ref_set).collect();
        let unmarked: Vec<_> = ref_set.difference(&marked).collect();
        format!("mcids without reference {unref:?}, references without mcid {unmarked:?}")
    })?;
    for op in doc.all_ops() {
        ensure(op.mcid.is_some() != op.artifact, || format!("{} is neither tagged nor artifact", op.id))?;
    }
    Ok(())
}

fn golden_fixture() -> Outcome {
    let f = study_fixture();
    let doc = parse_pdf(&f.pdf).map_err(|e| e.to_string())?;
    let map = f.golden_tagmap(&doc).map_err(|e| e.to_string())?;
    let tree = map.assemble_valid(&doc).map_err(|e| e.to_string())?;
    let bytes = write_tagged_pdf(&doc, &tree, &map.meta).map_err(|e| e.to_string())?;
    let back = parse_pdf(&bytes).map_err(|e| e.to_string())?;
    mcid_bijection(&back)?;
    let report = score_document(&back, &f.truth).map_err(|e| e.to_string())?;
    for c in Criterion::ALL {
        let r = report.get(c);
        ensure(r.score == Some(100.0), || format!("{} scored {:?}", c.label(), r.score))?;
    }
    Ok(format!("13 criteria at 100.0 over {} truth elements", f.truth.elements.len()))
}

// -------------------------------------------------------------- headings

fn wanted(raw: &[u8]) -> Vec<u8> {
    raw.iter().map(|&r| r.clamp(1, 6)).collect()
}

fn valid(levels: &[u8]) -> bool {
    let mut prev = 0;
    levels.iter().all(|&l| {
        let ok = (1..=6).contains(&l) && l <= prev + 1;
        prev = l;
        ok
    })
}

/// Demote offending headings one step at a time until nothing skips.
fn fixpoint_oracle(raw: &[u8]) -> Vec<u8> {
    let mut y = wanted(raw);
    loop {
        let mut changed = false;
        for i in 0..y.len() {
            let cap = if i == 0 { 1 } else { y[i - 1] + 1 };
            if y[i] > cap {
                y[i] -= 1;
                changed = true;
            }
        }
        if !changed {
            return y;
        }
    }
}

/// Pointwise maximum of all valid sequences that never raise a level.
fn exhaustive_oracle(raw: &[u8]) -> Option<Vec<u8>> {
    let w = wanted(raw);
    let n = w.len();
    let mut best = vec![0u8; n];
    let mut cand = vec![1u8; n];
    let mut found = false;
    loop {
        if valid(&cand) && cand.iter().zip(&w).all(|(c, w)| c <= w) {
            found = true;
            for (b, c) in best.iter_mut().zip(&cand) {
                *b = (*b).max(*c);
            }
        }
        let mut i = 0;
        while i < n && cand[i] == 6 {
            cand[i] = 1;
            i += 1;
        }
        if i == n {
            break;
        }
        cand[i] += 1;
    }
    found.then_some(best)
}

fn check_heading_case(raw: &[u8], exhaustive: bool) -> Result<(), String> {
    let out = repair_levels(raw);
    ensure(out.len() == raw.len(), || format!("{raw:?}: length changed"))?;
    ensure(valid(&out), || format!("{raw:?} -> {out:?} is invalid"))?;
    ensure(repair_levels(&out) == out, || format!("{raw:?}: repair is not idempotent"))?;
    let oracle = fixpoint_oracle(raw);
    ensure(out == oracle, || format!("{raw:?} -> {out:?}, oracle {oracle:?}"))?;
    if exhaustive {
        let best = exhaustive_oracle(raw);
        ensure(best.as_ref() == Some(&out), || format!("{raw:?} -> {out:?}, exhaustive {best:?}"))?;
    }
    Ok(())
}

fn heading_repair() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x4ead);
    let mut exhaustive = 0;
    for _ in 0..HEADING_CASES {
        let len = rng.gen_range(0..=HEADING_MAX_LEN);
        // 0 is the level-less H tag
        let raw: Vec<u8> = (0..len).map(|_| rng.gen_range(0..=6)).collect();
        let small = len <= EXHAUSTIVE_LEN;
        exhaustive += small as usize;
        check_heading_case(&raw, small)?;
    }
    // every sequence up to length 4 over {H, 1..6}
    let mut total = 0;
    for len in 0..=EXHAUSTIVE_LEN {
        for code in 0..7usize.pow(len as u32) {
            let raw: Vec<u8> = (0..len).map(|i| (code / 7usize.pow(i as u32) % 7) as u8).collect();
            check_heading_case(&raw, true)?;
            total += 1;
        }
    }
    Ok(format!("{HEADING_CASES} random, {exhaustive} also exhaustive, plus all {total} short sequences"))
}

// --------------------------------------------------------- reading order

struct OrderCase {
    regions: Vec<(RegionId, Rect)>,
    previous: Vec<RegionId>,
    points: Vec<Point>,
}

fn random_order_case(rng: &mut StdRng) -> OrderCase {
    let k = rng.gen_range(2..=10);
    let mut cells: Vec<usize> = (0..25).collect();
    cells.shuffle(rng);
    let mut ids: Vec<u32> = (1..=k as u32).collect();
    ids.shuffle(rng);
    let regions: Vec<(RegionId, Rect)> = cells[..k]
        .iter()
        .zip(&ids)
        .map(|(&cell, &id)| {
            let (cx, cy) = ((cell % 5) as f64 * 20.0, (cell / 5) as f64 * 20.0);
            let mut inset = || rng.gen_range(0.5..6.0);
            let r = Rect::new(cx + inset(), cy + inset(), cx + 20.0 - inset(), cy + 20.0 - inset());
            (RegionId(id), r)
        })
        .collect();
    let mut previous: Vec<RegionId> = regions.iter().map(|r| r.0).collect();
    previous.shuffle(rng);
    let m = rng.gen_range(2..=5);
    let points = (0..m).map(|_| Point { x: rng.gen_range(-10.0..110.0), y: rng.gen_range(-10.0..110.0) }).collect();
    OrderCase { regions, previous, points }
}

/// Cohen-Sutherland outcode: one bit per edge half-plane the point lies
/// beyond. Zero means inside.
fn outcode(r: &Rect, p: Point) -> u8 {
    (p.x < r.x0) as u8 | ((p.x > r.x1) as u8) << 1 | ((p.y < r.y0) as u8) << 2 | ((p.y > r.y1) as u8) << 3
}

/// Walks the polyline in small steps and orders regions by the first
/// sample that lands inside them. `None` when sampling cannot decide: the
/// chord between two outside samples might clip a corner before the first
/// inside sample, or two regions are first reached within one step.
fn sampled_order(case: &OrderCase, per_segment: usize) -> Option<Vec<RegionId>> {
    let mut samples = Vec::new();
    for seg in case.points.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        for j in 0..per_segment {
            let t = j as f64 / per_segment as f64;
            samples.push(Point { x: a.x + t * (b.x - a.x), y: a.y + t * (b.y - a.y) });
        }
    }
    samples.push(*case.points.last().unwrap());
    let mut hits = Vec::new();
    for (id, r) in &case.regions {
        let codes: Vec<u8> = samples.iter().map(|p| outcode(r, *p)).collect();
        let first_in = codes.iter().position(|c| *c == 0);
        let scan = first_in.unwrap_or(codes.len());
        // both outside yet not beyond a common edge: the chord may cut a corner
        if codes[..scan].windows(2).any(|w| w[0] & w[1] == 0) {
            return None;
        }
        if let Some(h) = first_in {
            hits.push((h, *id));
        }
    }
    hits.sort();
    if hits.windows(2).any(|w| w[1].0 <= w[0].0 + 1) {
        return None;
    }
    let hit_ids: BTreeSet<RegionId> = hits.iter().map(|h| h.1).collect();
    let mut order: Vec<RegionId> = hits.into_iter().map(|h| h.1).collect();
    order.extend(case.previous.iter().filter(|id| !hit_ids.contains(id)));
    Some(order)
}

fn reading_order() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x0dde);
    let (mut checked, mut undecided) = (0, 0);
    while checked < ORDER_CASES {
        ensure(undecided < 10 * ORDER_CASES, || "oracle undecided too often".into())?;
        let case = random_order_case(&mut rng);
        let Some(want) = ORDER_SAMPLES.iter().find_map(|&n| sampled_order(&case, n)) else {
            undecided += 1;
            continue;
        };
        let polyline = Polyline::new(case.points.clone()).map_err(|e| e.to_string())?;
        let got = draw_reading_order(&case.regions, &case.previous, &polyline);
        ensure(got == want, || format!("polyline {:?}: got {got:?}, oracle {want:?}", case.points))?;
        // regions the line missed keep their previous relative order
        let missed: Vec<RegionId> =
            case.previous.iter().copied().filter(|id| case.regions.iter().all(|(r, b)| r != id || polyline.first_hit(b).is_none())).collect();
        let tail = &got[got.len() - missed.len()..];
        ensure(tail == missed.as_slice(), || format!("skipped regions reordered: {tail:?} vs {missed:?}"))?;
        checked += 1;
    }
    Ok(format!("{checked} layouts, {undecided} undecidable by sampling skipped"))
}

// -------------------------------------------------------------- builders

fn text_op(seq: u32, x: f64, y: f64) -> ContentOp {
    ContentOp {
        id: OpId::new(0, seq),
        kind: OpKind::TextRun,
        bbox: Rect::new(x - 1.0, y - 1.0, x + 1.0, y + 1.0),
        text: Some(format!("t{seq}")),
        font_size: Some(9.0),
        font_style: None,
        mcid: None,
        artifact: false,
    }
}

fn in_document(node: StructNode) -> StructNode {
    StructNode::with_children(TagKind::Document, vec![StructChild::Node(node)])
}

/// Content of `node` is exactly `ops`, each once, and the tree is valid.
fn partitions(node: StructNode, ops: &[ContentOp]) -> Result<StructNode, String> {
    let refs = node.content_refs();
    let want: BTreeSet<OpId> = ops.iter().map(|o| o.id).collect();
    ensure(refs.len() == ops.len() && node.content_set() == want, || {
        format!("{} references for {} operators", refs.len(), ops.len())
    })?;
    let v = validate_tree(&in_document(node.clone()));
    ensure(v.is_empty(), || format!("violations: {}", v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")))?;
    Ok(node)
}

/// Cuts `0..len` at `n - 1` distinct interior points.
fn cuts(rng: &mut StdRng, n: usize, len: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (1..n).map(|i| i as f64 * len / n as f64 + rng.gen_range(-0.2..0.2) * len / n as f64).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn random_table(rng: &mut StdRng) -> Result<(), String> {
    let (rows, cols) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
    let (w, h) = (cols as f64 * 40.0, rows as f64 * 20.0);
    let bbox = Rect::new(0.0, 0.0, w, h);
    let h_lines = cuts(rng, rows, h);
    let v_lines = cuts(rng, cols, w);
    let header_mode = [HeaderMode::None, HeaderMode::FirstRow, HeaderMode::FirstCol, HeaderMode::Both][rng.gen_range(0..4)];
    let ops: Vec<ContentOp> =
        (0..rng.gen_range(1..=30)).map(|i| text_op(i, rng.gen_range(1.0..w - 1.0), rng.gen_range(1.0..h - 1.0))).collect();
    let grid = TableGrid { region: RegionId(1), h_lines: h_lines.clone(), v_lines: v_lines.clone(), header_mode };
    let refs: Vec<&ContentOp> = ops.iter().collect();
    let table = partitions(build_table(&grid, &bbox, &refs).map_err(|e| e.to_string())?, &ops)?;
    // independent cell assignment: rows counted from the top
    let tr: Vec<&StructNode> = table.child_nodes().collect();
    ensure(tr.len() == rows && tr.iter().all(|r| r.child_nodes().count() == cols), || format!("not {rows}x{cols}"))?;
    for op in &ops {
        let c = op.bbox.center();
        let r = h_lines.iter().filter(|y| **y > c.y).count();
        let k = v_lines.iter().filter(|x| **x < c.x).count();
        let cell = tr[r].child_nodes().nth(k).unwrap();
        ensure(cell.content_set().contains(&op.id), || format!("{} not in cell ({r},{k})", op.id))?;
        let head = (header_mode != HeaderMode::None && header_mode != HeaderMode::FirstCol && r == 0)
            || (matches!(header_mode, HeaderMode::FirstCol | HeaderMode::Both) && k == 0);
        ensure((cell.tag == TagKind::TH) == head, || format!("cell ({r},{k}) is {}", cell.tag))?;
    }
    Ok(())
}

fn random_list(rng: &mut StdRng) -> Result<(), String> {
    let items = rng.gen_range(1..=8);
    let h = items as f64 * 15.0;
    let bbox = Rect::new(0.0, 0.0, 200.0, h);
    let seps = cuts(rng, items, h);
    // nest by a random depth walk so every child directly follows its subtree
    let mut nesting = BTreeMap::new();
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..items {
        let depth = rng.gen_range(0..=stack.len().min(2));
        stack.truncate(depth);
        if let Some(&p) = stack.last() {
            nesting.insert(i, p);
        }
        stack.push(i);
    }
    let ops: Vec<ContentOp> =
        (0..rng.gen_range(1..=20)).map(|i| text_op(i, rng.gen_range(1.0..199.0), rng.gen_range(0.5..h - 0.5))).collect();
    let spec = ListSpec { region: RegionId(2), item_separators: seps.clone(), nesting: nesting.clone() };
    let refs: Vec<&ContentOp> = ops.iter().collect();
    let list = partitions(build_list(&spec, &bbox, &refs).map_err(|e| e.to_string())?, &ops)?;
    // item bodies in document order are items 0..n, top to bottom
    let mut bodies = Vec::new();
    list.walk(&mut |n, _| {
        if n.tag == TagKind::LBody {
            bodies.push(n.content_set());
        }
    });
    ensure(bodies.len() == items, || format!("{} bodies for {items} items", bodies.len()))?;
    for op in &ops {
        let i = seps.iter().filter(|y| **y > op.bbox.center().y).count();
        ensure(bodies[i].contains(&op.id), || format!("{} not in item {i}", op.id))?;
    }
    let mut depth_ok = true;
    list.walk(&mut |n, ancestors| {
        if n.tag == TagKind::LI {
            let lists = ancestors.iter().filter(|a| a.tag == TagKind::L).count();
            depth_ok &= lists <= 3;
        }
    });
    ensure(depth_ok, || "nesting deeper than generated".into())?;
    Ok(())
}

const FUZZ_TAGS: [TagKind; 14] = [
    TagKind::Table,
    TagKind::TR,
    TagKind::TH,
    TagKind::TD,
    TagKind::THead,
    TagKind::TBody,
    TagKind::L,
    TagKind::LI,
    TagKind::Lbl,
    TagKind::LBody,
    TagKind::P,
    TagKind::Caption,
    TagKind::Figure,
    TagKind::Artifact,
];

fn random_node(rng: &mut StdRng, tag: TagKind, depth: usize, next: &mut u32) -> StructNode {
    let mut node = StructNode::new(tag);
    for _ in 0..rng.gen_range(0..=4) {
        if depth < 3 && rng.gen_bool(0.6) {
            let t = FUZZ_TAGS[rng.gen_range(0..FUZZ_TAGS.len())];
            node.push_node(random_node(rng, t, depth + 1, next));
        } else {
            // sometimes repeat an earlier operator
            let seq = if *next > 0 && rng.gen_bool(0.1) { rng.gen_range(0..*next) } else { *next };
            *next = (*next).max(seq + 1);
            node.children.push(StructChild::Content(OpId::new(0, seq)));
        }
    }
    node
}

fn repair_fuzz(rng: &mut StdRng, root: TagKind) -> Result<bool, String> {
    let broken = random_node(rng, root, 0, &mut 0);
    if validate_tree(&in_document(broken.clone())).is_empty() {
        return Ok(false);
    }
    let fixed = if root == TagKind::Table { repair_table(&broken) } else { repair_list(&broken) };
    ensure(fixed.tag == root, || format!("repair returned {}", fixed.tag))?;
    ensure(fixed.content_set() == broken.content_set(), || "content set changed".into())?;
    let v = validate_tree(&in_document(fixed.clone()));
    ensure(v.is_empty(), || format!("{broken:?} repaired with violations {v:?}"))?;
    Ok(true)
}

fn builders() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x7ab1e);
    for _ in 0..BUILDER_CASES {
        random_table(&mut rng)?;
        random_list(&mut rng)?;
    }
    let mut repaired = [0usize; 2];
    for (i, root) in [TagKind::Table, TagKind::L].into_iter().enumerate() {
        let mut attempts = 0;
        while repaired[i] < REPAIR_CASES {
            attempts += 1;
            ensure(attempts < 50 * REPAIR_CASES, || "could not generate invalid trees".into())?;
            repaired[i] += repair_fuzz(&mut rng, root)? as usize;
        }
    }
    Ok(format!("{BUILDER_CASES} tables, {BUILDER_CASES} lists, {} + {} invalid trees repaired", repaired[0], repaired[1]))
}

// ------------------------------------------------------------- mathspeak

const MATH: [(&str, &str); 30] = [
    ("x^{2}", "x Superscript 2 Baseline"),
    ("x_{i}", "x Subscript i Baseline"),
    ("x_{i}^{2}", "x Subscript i Superscript 2 Baseline"),
    ("\\frac{1}{2}", "StartFraction 1 Over 2 EndFraction"),
    ("\\frac{a + b}{c}", "StartFraction a plus b Over c EndFraction"),
    (
        "\\frac{\\frac{1}{x}}{y}",
        "StartStartFraction StartFraction 1 Over x EndFraction OverOver y EndEndFraction",
    ),
    ("\\sqrt{2}", "StartRoot 2 EndRoot"),
    ("\\sqrt[3]{x}", "RootIndex 3 StartRoot x EndRoot"),
    ("\\sqrt{\\sqrt{x}}", "StartRoot StartNestedRoot x EndNestedRoot EndRoot"),
    ("\\sqrt{a^{2} + b^{2}}", "StartRoot a Superscript 2 Baseline plus b Superscript 2 Baseline EndRoot"),
    ("e^{x^{a}}", "e Superscript x SuperSuperscript a Baseline"),
    ("e^{x_{i}} + 1", "e Superscript x SuperSubscript i Baseline plus 1"),
    ("e^{-x}", "e Superscript negative x Baseline"),
    ("\\sum_{i=1}^{n} i", "sigma-summation Underscript i equals 1 Overscript n Endscripts i"),
    ("\\prod_{k=1}^{n} k", "product Underscript k equals 1 Overscript n Endscripts k"),
    ("\\int_{0}^{1} x dx", "integral Subscript 0 Superscript 1 Baseline x d x"),
    (
        "\\lim_{x \\to 0} \\frac{\\sin x}{x}",
        "limit Underscript x right-arrow 0 Endscripts StartFraction sine x Over x EndFraction",
    ),
    (
        "\\sin^{2} \\theta + \\cos^{2} \\theta = 1",
        "sine Superscript 2 Baseline theta plus cosine Superscript 2 Baseline theta equals 1",
    ),
    ("\\log_{2} n", "log Subscript 2 Baseline n"),
    ("n!", "n factorial"),
    ("|x - y|", "StartAbsoluteValue x minus y EndAbsoluteValue"),
    ("(a + b)^{2}", "left-parenthesis a plus b right-parenthesis Superscript 2 Baseline"),
    ("[0, 1]", "left-bracket 0 comma 1 right-bracket"),
    ("\\alpha + \\beta = \\Gamma", "alpha plus beta equals upper gamma"),
    ("a \\leq b", "a less-than-or-equal-to b"),
    ("x \\in A", "x element-of upper A"),
    (
        "\\frac{-b \\pm \\sqrt{b^{2} - 4 a c}}{2 a}",
        "StartFraction negative b plus-or-minus StartRoot b Superscript 2 Baseline minus 4 a c EndRoot Over 2 a EndFraction",
    ),
    ("x \\approx 3.14", "x almost-equals 3.14"),
    (
        "F_{1} = \\frac{2 p r}{p + r}",
        "upper F Subscript 1 Baseline equals StartFraction 2 p r Over p plus r EndFraction",
    ),
    ("\\varepsilon > 0", "variant epsilon greater-than 0"),
];

fn mathspeak() -> Outcome {
    let mut first = Vec::new();
    for (latex, want) in MATH {
        let got = formula_alt_text(latex).map_err(|e| format!("{latex}: {e}"))?;
        ensure(got == want, || format!("{latex}: got {got:?}, want {want:?}"))?;
        first.push(got);
    }
    // distinct formulas must never share a spoken form
    let distinct: BTreeSet<&String> = first.iter().collect();
    ensure(distinct.len() == MATH.len(), || "two formulas speak identically".into())?;
    let trees: Vec<String> = MATH.iter().map(|(l, _)| format!("{:?}", parse_latex(l).unwrap())).collect();
    ensure(trees.iter().collect::<BTreeSet<_>>().len() == MATH.len(), || "suite repeats a formula".into())?;
    for _ in 0..MATH_REPEATS {
        let again: Vec<String> = std::thread::scope(|s| {
            let handles: Vec<_> = MATH.iter().map(|(l, _)| s.spawn(move || formula_alt_text(l).unwrap())).collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        ensure(again.iter().zip(&first).all(|(a, b)| a.as_bytes() == b.as_bytes()), || "output not deterministic".into())?;
    }
    Ok(format!("{} formulas, injective, byte-identical over {} runs", MATH.len(), MATH_REPEATS + 1))
}

// ------------------------------------------------------------ round trip

enum Block {
    Para(Vec<u32>),
    Heading(u32),
    Figure(u32, Option<u32>),
    Formula(u32),
    List(Vec<Vec<u32>>),
    Table(Vec<Vec<u32>>),
}

/// Draws random blocks down each page and returns them with a PDF.
fn compose_random(rng: &mut StdRng) -> (Vec<u8>, Vec<Vec<Block>>) {
    let pages = rng.gen_range(1..=3);
    let mut composer = PdfComposer::new().info("", "");
    let mut layout = Vec::new();
    for _ in 0..pages {
        let page = composer.add_page(612.0, 792.0);
        let mut blocks = Vec::new();
        let mut y = 740.0;
        let text = |page: &mut pdf_remediate::pdf::compose::PageDraft, x: f64, y: f64, s: &str| {
            page.text(x, y, 10.0, StdFont::Regular, s)
        };
        while y > 140.0 {
            let block = match rng.gen_range(0..6) {
                0 => Block::Para((0..rng.gen_range(1..=3)).map(|i| text(page, 72.0, y - 12.0 * i as f64, "lorem ipsum")).collect()),
                1 => Block::Heading(page.text(72.0, y, 14.0, StdFont::Bold, "Heading")),
                2 => {
                    let img = page.image(Rect::new(72.0, y - 60.0, 200.0, y));
                    let cap = rng.gen_bool(0.5).then(|| text(page, 72.0, y - 72.0, "Figure caption"));
                    Block::Figure(img, cap)
                }
                3 => Block::Formula(page.text(200.0, y, 10.0, StdFont::Italic, "a + b = c")),
                4 => Block::List((0..rng.gen_range(1..=4)).map(|i| vec![text(page, 80.0, y - 12.0 * i as f64, "- item")]).collect()),
                _ => {
                    let (r, c) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
                    Block::Table(
                        (0..r)
                            .map(|i| (0..c).map(|j| text(page, 72.0 + 60.0 * j as f64, y - 12.0 * i as f64, "cell")).collect())
                            .collect(),
                    )
                }
            };
            if rng.gen_bool(0.2) {
                page.line(Point { x: 72.0, y: y + 4.0 }, Point { x: 540.0, y: y + 4.0 }, 0.5);
            }
            blocks.push(block);
            y -= 90.0;
        }
        layout.push(blocks);
    }
    (composer.finish(), layout)
}

fn leaf(tag: TagKind, page: u32, seqs: &[u32]) -> StructNode {
    StructNode::with_content(tag, seqs.iter().map(|s| OpId::new(page, *s)))
}

fn alt(text: &str) -> Attributes {
    Attributes { alt_text: Some(text.into()), scope: None }
}

/// A valid tree over the blocks, with heading levels that never skip.
fn random_tree(rng: &mut StdRng, layout: &[Vec<Block>]) -> StructNode {
    let mut root = StructNode::new(TagKind::Document);
    let mut level = 0u8;
    for (p, blocks) in layout.iter().enumerate() {
        let p = p as u32;
        let mut sect = StructNode::new(TagKind::Group);
        for (b, block) in blocks.iter().enumerate() {
            // leave some blocks untagged so they become artifacts
            if rng.gen_bool(0.1) {
                continue;
            }
            let node = match block {
                Block::Para(lines) => leaf(TagKind::P, p, lines),
                Block::Heading(op) => {
                    level = rng.gen_range(1..=(level + 1).min(6));
                    leaf(TagKind::heading(level).unwrap(), p, &[*op])
                }
                Block::Figure(img, cap) => {
                    let mut fig = leaf(TagKind::Figure, p, &[*img]);
                    fig.attributes = alt(&format!("Figure {p}.{b}"));
                    if let Some(c) = cap {
                        fig.push_node(leaf(TagKind::Caption, p, &[*c]));
                    }
                    fig
                }
                Block::Formula(op) => {
                    let mut f = leaf(TagKind::Formula, p, &[*op]);
                    f.attributes = alt("a plus b equals c");
                    f
                }
                Block::List(items) => StructNode::with_children(
                    TagKind::L,
                    items
                        .iter()
                        .map(|seqs| {
                            StructChild::Node(StructNode::with_children(
                                TagKind::LI,
                                vec![StructChild::Node(leaf(TagKind::LBody, p, seqs))],
                            ))
                        })
                        .collect(),
                ),
                Block::Table(rows) => {
                    let header = rng.gen_bool(0.5);
                    StructNode::with_children(
                        TagKind::Table,
                        rows.iter()
                            .enumerate()
                            .map(|(i, row)| {
                                let cells = row
                                    .iter()
                                    .map(|s| {
                                        let mut cell = leaf(if header && i == 0 { TagKind::TH } else { TagKind::TD }, p, &[*s]);
                                        if header && i == 0 {
                                            cell.attributes.scope = Some(Scope::Column);
                                        }
                                        StructChild::Node(cell)
                                    })
                                    .collect();
                                StructChild::Node(StructNode::with_children(TagKind::TR, cells))
                            })
                            .collect(),
                    )
                }
            };
            sect.push_node(node);
        }
        if rng.gen_bool(0.5) {
            root.push_node(sect);
        } else {
            root.children.extend(sect.children);
        }
    }
    root
}

fn round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x2041);
    let mut nodes = 0;
    for n in 0..ROUND_TRIP_DOCS {
        let (pdf, layout) = compose_random(&mut rng);
        let doc = parse_pdf(&pdf).map_err(|e| e.to_string())?;
        let tree = random_tree(&mut rng, &layout);
        let v = validate_tree(&tree);
        ensure(v.is_empty(), || format!("doc {n}: generator built an invalid tree {v:?}"))?;
        let meta = set_meta(&format!("Document {n}"), "Generator", ["en", "de-CH", "fr"][n % 3]).unwrap();
        let bytes = write_tagged_pdf(&doc, &tree, &meta).map_err(|e| format!("doc {n}: {e}"))?;
        let back = parse_pdf(&bytes).map_err(|e| format!("doc {n}: {e}"))?;
        ensure(back.struct_tree.as_ref() == Some(&tree), || format!("doc {n}: tree differs after re-parse"))?;
        ensure(back.meta == meta, || format!("doc {n}: metadata {:?} != {meta:?}", back.meta))?;
        ensure(back.op_count() == doc.op_count(), || format!("doc {n}: operator count changed"))?;
        for (a, b) in doc.all_ops().zip(back.all_ops()) {
            ensure(a.id == b.id && a.kind == b.kind && a.text == b.text, || format!("doc {n}: {} changed", a.id))?;
        }
        mcid_bijection(&back).map_err(|e| format!("doc {n}: {e}"))?;
        nodes += tree.node_count();
    }
    Ok(format!("{ROUND_TRIP_DOCS} documents, {nodes} structure elements"))
}

// ---------------------------------------------------------- corpus report

fn export(doc: &TaggedDocument, map: &pdf_remediate::tagmap::Tagmap) -> Vec<u8> {
    let tree = map.assemble_valid(doc).unwrap();
    write_tagged_pdf(doc, &tree, &map.meta).unwrap()
}

fn corpus_report() -> Outcome {
    let f = study_fixture();
    let doc = parse_pdf(&f.pdf).map_err(|e| e.to_string())?;
    let golden = export(&doc, &f.golden_tagmap(&doc).map_err(|e| e.to_string())?);
    let auto = export(&doc, &pdf_remediate::autotag::auto_tag(&doc).map_err(|e| e.to_string())?);
    // half-finished remediation: the golden script up to step 4
    let mut partial_map = pdf_remediate::autotag::auto_tag(&doc).unwrap();
    for action in f.golden_actions(&partial_map) {
        if action.step() > 4 {
            break;
        }
        partial_map.apply(&doc, &action).map_err(|e| e.to_string())?;
    }
    let partial = export(&doc, &partial_map);

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = dir.path();
    std::fs::write(base.join("truth.json"), f.truth.to_json()).unwrap();
    let files = [("golden.pdf", &golden), ("auto.pdf", &auto), ("partial.pdf", &partial)];
    for (name, bytes) in files {
        std::fs::write(base.join(name), bytes).unwrap();
    }
    let corpora: [(&str, &[&str]); 3] =
        [("Remediated", &["golden.pdf"]), ("Automatic", &["auto.pdf", "partial.pdf"]), ("Mixed", &["golden.pdf", "auto.pdf", "partial.pdf"])];
    let manifest = serde_json::json!({
        "corpora": corpora.iter().map(|(name, docs)| serde_json::json!({
            "name": name,
            "documents": docs.iter().map(|d| serde_json::json!({"pdf": d, "truth": "truth.json"})).collect::<Vec<_>>(),
        })).collect::<Vec<_>>()
    });
    std::fs::write(base.join("manifest.json"), manifest.to_string()).unwrap();

    // expected cells from per-document counts pooled here
    let per_doc: BTreeMap<&str, [(u64, u64); 13]> = files
        .iter()
        .map(|(name, bytes)| (*name, score_document(&parse_pdf(bytes).unwrap(), &f.truth).unwrap().counts()))
        .collect();
    let expected: Vec<Vec<String>> = corpora
        .iter()
        .map(|(_, docs)| {
            (0..13)
                .map(|c| {
                    let (ct, wt) = docs.iter().fold((0, 0), |acc, d| (acc.0 + per_doc[d][c].0, acc.1 + per_doc[d][c].1));
                    match percent(ct, wt) {
                        Some(s) => format!("{s:.1} ({})", ct + wt),
                        None => "- (0)".into(),
                    }
                })
                .collect()
        })
        .collect();

    let out = Command::new(env!("CARGO_BIN_EXE_pdf-remediate"))
        .args(["score-corpus", "--format", "csv"])
        .arg(base.join("manifest.json"))
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let csv = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    ensure(rows.len() == 15, || format!("{} csv rows, want header + 13 + average", rows.len()))?;
    let names: Vec<&str> = corpora.iter().map(|c| c.0).collect();
    ensure(rows[0][1..] == names[..], || format!("header {:?}", rows[0]))?;
    for (i, c) in Criterion::ALL.iter().enumerate() {
        let row = &rows[i + 1];
        ensure(row.len() == 1 + corpora.len() && row[0] == c.label(), || format!("row {row:?}"))?;
        for (k, cell) in row[1..].iter().enumerate() {
            ensure(*cell == expected[k][i], || format!("{} / {}: {cell} want {}", c.label(), names[k], expected[k][i]))?;
        }
    }

    let out = Command::new(env!("CARGO_BIN_EXE_pdf-remediate"))
        .arg("score-corpus")
        .arg(base.join("manifest.json"))
        .output()
        .map_err(|e| e.to_string())?;
    let table = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let lines: Vec<&str> = table.lines().filter(|l| !l.chars().all(|c| c == '-')).collect();
    ensure(lines.len() == 15, || format!("{} table rows", lines.len()))?;
    for (i, c) in Criterion::ALL.iter().enumerate() {
        let cells: Vec<&str> = lines[i + 1].split("  ").map(str::trim).filter(|s| !s.is_empty()).collect();
        ensure(cells[0] == c.label() && cells.len() == 4, || format!("table row {:?}", lines[i + 1]))?;
        for (k, cell) in cells[1..].iter().enumerate() {
            ensure(*cell == expected[k][i], || format!("table cell {cell} want {}", expected[k][i]))?;
        }
    }
    Ok(format!("13 rows x {} corpora, pooled over {} documents", corpora.len(), 6))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, Check); 8] = [
        ("score formula", SCORE_LIMIT, score_formula),
        ("golden fixture end-to-end", GOLDEN_LIMIT, golden_fixture),
        ("heading repair", HEADING_LIMIT, heading_repair),
        ("reading order", ORDER_LIMIT, reading_order),
        ("table and list builders", Duration::MAX, builders),
        ("mathspeak", Duration::MAX, mathspeak),
        ("pdf round trip", Duration::MAX, round_trip),
        ("corpus report", Duration::MAX, corpus_report),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let (outcome, took) = within(limit, check);
        match outcome {
            Ok(detail) => println!("PASS  {name:<28} {took:>9.2?}  {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<28} {took:>9.2?}  {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
