//! Editing sessions: one uploaded PDF plus its tagmap, persisted on disk
//! and edited step by step under optimistic concurrency.
//!
//! Layout under the store root: `<id>/source.pdf` holds the original file
//! and `<id>/session.json` the [`SessionRecord`]. Both are written through a
//! temporary file and renamed into place, so a crash never leaves a torn
//! record behind.

pub mod http;

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::autotag::auto_tag;
use crate::error::{Error, Result};
use crate::model::{ContentOp, OpId, TaggedDocument};
use crate::pdf::{parse_pdf, write_tagged_pdf};
use crate::region::Region;
use crate::tagmap::{StepAction, StepView, Tagmap, STEP_COUNT};

/// Steps that must be marked complete before a session can be exported.
pub const EXPORT_REQUIRES: [u8; 3] = [1, 2, 3];

const SOURCE_FILE: &str = "source.pdf";
const RECORD_FILE: &str = "session.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub id: String,
    pub revision: u64,
    /// Unix seconds.
    pub created: u64,
    pub updated: u64,
    pub tagmap: Tagmap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub revision: u64,
    pub created: u64,
    pub updated: u64,
    pub page_count: usize,
    pub steps: [bool; 8],
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResponse {
    pub revision: u64,
    #[serde(flatten)]
    pub view: StepView,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct StepUpdate {
    pub expected_revision: u64,
    pub actions: Vec<StepAction>,
}

/// Everything the page view draws: operator boxes and region boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageGeometry {
    pub page: u32,
    pub width: f64,
    pub height: f64,
    pub ops: Vec<ContentOp>,
    pub regions: Vec<Region>,
    pub artifacts: Vec<OpId>,
    pub reading_order: Vec<crate::region::RegionId>,
}

struct Session {
    doc: TaggedDocument,
    record: SessionRecord,
}

impl Session {
    fn summary(&self) -> SessionSummary {
        let r = &self.record;
        SessionSummary {
            id: r.id.clone(),
            revision: r.revision,
            created: r.created,
            updated: r.updated,
            page_count: self.doc.pages.len(),
            steps: r.tagmap.steps,
            title: r.tagmap.meta.title.clone(),
        }
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn valid_id(id: &str) -> bool {
    id.len() == 16 && id.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase())
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Thread-safe session store. Edits to one session are serialized; distinct
/// sessions proceed in parallel.
pub struct SessionStore {
    root: PathBuf,
    live: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    counter: AtomicU64,
}

impl SessionStore {
    /// Opens (and creates) a store rooted at `root`. Sessions already on
    /// disk are loaded on first access.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root)?;
        Ok(Self { root, live: Mutex::new(HashMap::new()), counter: AtomicU64::new(0) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn new_id(&self, doc: &TaggedDocument) -> String {
        use sha2::{Digest, Sha256};
        let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0);
        let n = self.counter.fetch_add(1, Ordering::Relaxed);
        let seed = format!("{}:{nanos}:{n}:{}", doc.content_hash(), std::process::id());
        hex::encode(Sha256::digest(seed.as_bytes()))[..16].to_string()
    }

    fn persist(&self, record: &SessionRecord) -> Result<()> {
        let dir = self.root.join(&record.id);
        write_atomic(&dir, RECORD_FILE, &serde_json::to_vec_pretty(record)?)
    }

    fn load(&self, id: &str) -> Result<Session> {
        let dir = self.root.join(id);
        let pdf = match std::fs::read(dir.join(SOURCE_FILE)) {
            Ok(bytes) => bytes,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::UnknownSession(id.into())),
            Err(e) => return Err(e.into()),
        };
        let record: SessionRecord = serde_json::from_slice(&std::fs::read(dir.join(RECORD_FILE))?)?;
        let doc = parse_pdf(&pdf)?;
        record.tagmap.check_consistency(&doc)?;
        Ok(Session { doc, record })
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>> {
        if !valid_id(id) {
            return Err(Error::UnknownSession(id.into()));
        }
        let mut live = self.live.lock().expect("session map lock");
        if let Some(s) = live.get(id) {
            return Ok(s.clone());
        }
        let s = Arc::new(Mutex::new(self.load(id)?));
        live.insert(id.to_string(), s.clone());
        Ok(s)
    }

    fn with<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T>) -> Result<T> {
        let s = self.session(id)?;
        let mut guard = s.lock().unwrap_or_else(|p| p.into_inner());
        f(&mut guard)
    }

    /// Parses and auto-tags `pdf`, then stores it as a new session.
    pub fn create(&self, pdf: &[u8]) -> Result<SessionSummary> {
        let doc = parse_pdf(pdf)?;
        let tagmap = auto_tag(&doc)?;
        let id = self.new_id(&doc);
        let dir = self.root.join(&id);
        std::fs::create_dir_all(&dir)?;
        write_atomic(&dir, SOURCE_FILE, pdf)?;
        let t = now();
        let record = SessionRecord { id: id.clone(), revision: 0, created: t, updated: t, tagmap };
        self.persist(&record)?;
        let session = Session { doc, record };
        let summary = session.summary();
        self.live.lock().expect("session map lock").insert(id.clone(), Arc::new(Mutex::new(session)));
        log::info!("created session {id}");
        Ok(summary)
    }

    pub fn summary(&self, id: &str) -> Result<SessionSummary> {
        self.with(id, |s| Ok(s.summary()))
    }

    pub fn tagmap(&self, id: &str) -> Result<(u64, Tagmap)> {
        self.with(id, |s| Ok((s.record.revision, s.record.tagmap.clone())))
    }

    pub fn document(&self, id: &str) -> Result<TaggedDocument> {
        self.with(id, |s| Ok(s.doc.clone()))
    }

    pub fn step(&self, id: &str, step: u8) -> Result<StepResponse> {
        self.with(id, |s| {
            Ok(StepResponse { revision: s.record.revision, view: s.record.tagmap.step_view(&s.doc, step)? })
        })
    }

    /// Applies `actions` in order, all or nothing. Every action must belong
    /// to `step`, and `expected_revision` must match the current revision.
    pub fn apply(&self, id: &str, step: u8, update: &StepUpdate) -> Result<StepResponse> {
        if step == 0 || step > STEP_COUNT {
            return Err(Error::UnknownStep(step));
        }
        if let Some(a) = update.actions.iter().find(|a| a.step() != step) {
            return Err(Error::InvalidInput(format!("action for step {} sent to step {step}", a.step())));
        }
        self.with(id, |s| {
            if s.record.revision != update.expected_revision {
                return Err(Error::RevisionConflict { expected: update.expected_revision, actual: s.record.revision });
            }
            let mut tagmap = s.record.tagmap.clone();
            for action in &update.actions {
                tagmap.apply(&s.doc, action)?;
            }
            let mut record = s.record.clone();
            record.tagmap = tagmap;
            record.revision += 1;
            record.updated = now();
            self.persist(&record)?;
            s.record = record;
            Ok(StepResponse { revision: s.record.revision, view: s.record.tagmap.step_view(&s.doc, step)? })
        })
    }

    /// Writes the tagged PDF. Requires steps 1-3 to be complete and the
    /// assembled tree to validate.
    pub fn export(&self, id: &str) -> Result<Vec<u8>> {
        self.with(id, |s| {
            let missing: Vec<u8> =
                EXPORT_REQUIRES.iter().copied().filter(|n| !s.record.tagmap.step_done(*n)).collect();
            if !missing.is_empty() {
                return Err(Error::StepsIncomplete { steps: missing });
            }
            let tree = s.record.tagmap.assemble_valid(&s.doc)?;
            write_tagged_pdf(&s.doc, &tree, &s.record.tagmap.meta)
        })
    }

    pub fn geometry(&self, id: &str, page: u32) -> Result<PageGeometry> {
        self.with(id, |s| {
            let len = s.doc.pages.len();
            let p = s.doc.pages.get(page as usize).ok_or(Error::IndexOutOfRange { index: page as usize, len })?;
            let layout = s.record.tagmap.regions.page(page)?;
            Ok(PageGeometry {
                page,
                width: p.width,
                height: p.height,
                ops: p.ops.clone(),
                regions: layout.regions.clone(),
                artifacts: layout.artifacts.iter().copied().collect(),
                reading_order: layout.reading_order.clone(),
            })
        })
    }
}
