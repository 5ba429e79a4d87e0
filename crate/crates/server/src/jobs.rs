use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};

use brnet_core::sweep::SweepRow;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Simulate,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobStatus::Done | JobStatus::Failed)
    }
}

/// Rows of one sweep inside a job, in index order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub label: String,
    pub graph: String,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Simulation(Value),
    Sweep,
}

#[derive(Debug, Clone, Serialize)]
pub struct JobHandle {
    pub id: String,
    pub kind: JobKind,
    pub status: JobStatus,
    pub progress: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug)]
pub struct Job {
    pub handle: JobHandle,
    pub total_cells: u64,
    pub done_cells: u64,
    pub tables: Vec<SweepTable>,
    pub outcome: Option<Outcome>,
    pub cancel: Arc<AtomicBool>,
}

/// In-memory job table shared by request handlers and workers.
#[derive(Debug, Clone, Default)]
pub struct JobTable(Arc<Mutex<HashMap<String, Job>>>);

impl JobTable {
    fn lock(&self) -> MutexGuard<'_, HashMap<String, Job>> {
        self.0.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn create(&self, kind: JobKind, tables: Vec<SweepTable>, total_cells: u64) -> (JobHandle, Arc<AtomicBool>) {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let cancel = Arc::new(AtomicBool::new(false));
        let handle = JobHandle {
            id: id.clone(),
            kind,
            status: JobStatus::Queued,
            progress: 0.0,
            reason: None,
        };
        let job = Job {
            handle: handle.clone(),
            total_cells,
            done_cells: 0,
            tables,
            outcome: None,
            cancel: cancel.clone(),
        };
        self.lock().insert(id, job);
        (handle, cancel)
    }

    /// Runs `f` on the job, if it exists.
    pub fn with<T>(&self, id: &str, f: impl FnOnce(&mut Job) -> T) -> Option<T> {
        self.lock().get_mut(id).map(f)
    }

    /// Like [`JobTable::with`] but skips jobs already in a terminal state.
    fn update(&self, id: &str, f: impl FnOnce(&mut Job)) {
        self.with(id, |job| {
            if !job.handle.status.is_terminal() {
                f(job)
            }
        });
    }

    pub fn start(&self, id: &str) {
        self.update(id, |job| job.handle.status = JobStatus::Running);
    }

    pub fn append_rows(&self, id: &str, table: usize, rows: &[SweepRow]) {
        self.update(id, |job| {
            job.tables[table].rows.extend_from_slice(rows);
            job.done_cells += rows.len() as u64;
            job.handle.progress = if job.total_cells == 0 {
                1.0
            } else {
                job.done_cells as f64 / job.total_cells as f64
            };
        });
    }

    pub fn finish(&self, id: &str, outcome: Outcome) {
        self.update(id, |job| {
            job.handle.status = JobStatus::Done;
            job.handle.progress = 1.0;
            job.outcome = Some(outcome);
        });
    }

    pub fn fail(&self, id: &str, reason: impl Into<String>) {
        let reason = reason.into();
        self.update(id, |job| {
            job.handle.status = JobStatus::Failed;
            job.handle.reason = Some(reason);
        });
    }

    /// Requests cooperative cancellation and marks the job failed right away.
    pub fn cancel(&self, id: &str) -> Option<JobHandle> {
        self.with(id, |job| {
            if !job.handle.status.is_terminal() {
                job.cancel.store(true, Ordering::Relaxed);
                job.handle.status = JobStatus::Failed;
                job.handle.reason = Some("cancelled".to_string());
            }
            job.handle.clone()
        })
    }
}
