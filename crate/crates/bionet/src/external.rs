//! External trainer backend.
//!
//! Each worker is one trainer process started through `sh -c`. Requests go
//! to its stdin, responses are read from its stdout by a reader thread so
//! that a silent trainer can be timed out. A worker whose stream state is
//! unknown (timeout, protocol error, exit) is killed and replaced on its
//! next request. Each trainer runs in its own process group so that
//! killing it also stops anything it started.

use std::io::{BufRead, BufReader, Write};
use std::os::unix::process::CommandExt;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use bionet_core::evaluate::{
    EvalError, EvalErrorKind, EvalRequest, EvalStatus, Evaluator, TaskDescriptor,
    TrainerHyperparams,
};
use bionet_core::metrics::QualityReport;
use bionet_core::ArchParams;

use crate::protocol::{decode_response, encode_request};

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalConfig {
    /// Shell command that starts one trainer.
    pub command: String,
    /// Concurrent trainer processes.
    pub workers: usize,
    pub timeout: Duration,
    pub task: TaskDescriptor,
    pub hyperparams: TrainerHyperparams,
}

struct Worker {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Worker {
    fn spawn(command: &str) -> std::io::Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .process_group(0)
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(Self {
            child,
            stdin,
            lines,
        })
    }

    fn call(
        &mut self,
        req: &EvalRequest,
        timeout: Duration,
    ) -> Result<QualityReport, EvalErrorKind> {
        let line = encode_request(req);
        writeln!(self.stdin, "{line}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| EvalErrorKind::Io(format!("writing to trainer: {e}")))?;
        let reply = match self.lines.recv_timeout(timeout) {
            Ok(Ok(reply)) => reply,
            Ok(Err(e)) => return Err(EvalErrorKind::Io(format!("reading from trainer: {e}"))),
            Err(RecvTimeoutError::Timeout) => return Err(EvalErrorKind::Timeout),
            Err(RecvTimeoutError::Disconnected) => {
                return Err(EvalErrorKind::Io("trainer closed its output".into()))
            }
        };
        let resp = decode_response(&reply).map_err(EvalErrorKind::Protocol)?;
        if resp.id != req.id {
            return Err(EvalErrorKind::Protocol(format!(
                "response id {} does not match request id {}",
                resp.id, req.id
            )));
        }
        match resp.status {
            EvalStatus::Ok(q) => Ok(q),
            EvalStatus::Failed(reason) => Err(EvalErrorKind::Failed(reason)),
        }
    }
}

impl Drop for Worker {
    fn drop(&mut self) {
        if let Ok(pid) = i32::try_from(self.child.id()) {
            // SAFETY: signalling a process group we created; no memory is touched.
            unsafe {
                libc::kill(-pid, libc::SIGKILL);
            }
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Runs one request on `slot`, starting a trainer if needed and discarding
/// it when the exchange leaves the stream in an unknown state.
fn run_on(
    slot: &mut Option<Worker>,
    cfg: &ExternalConfig,
    req: &EvalRequest,
) -> Result<QualityReport, EvalError> {
    let err = |kind| EvalError::new(req.arch, kind);
    if slot.is_none() {
        let w = Worker::spawn(&cfg.command).map_err(|e| {
            err(EvalErrorKind::Io(format!(
                "starting trainer {:?}: {e}",
                cfg.command
            )))
        })?;
        *slot = Some(w);
    }
    let worker = slot.as_mut().expect("just spawned");
    match worker.call(req, cfg.timeout) {
        Ok(q) => Ok(q),
        Err(kind) => {
            if !matches!(kind, EvalErrorKind::Failed(_)) {
                *slot = None;
            }
            Err(err(kind))
        }
    }
}

pub struct ExternalEvaluator {
    cfg: ExternalConfig,
    workers: Vec<Option<Worker>>,
    next_id: u64,
}

impl ExternalEvaluator {
    pub fn new(cfg: ExternalConfig) -> Self {
        let n = cfg.workers.max(1);
        Self {
            cfg,
            workers: (0..n).map(|_| None).collect(),
            next_id: 1,
        }
    }

    fn request(&mut self, arch: &ArchParams) -> EvalRequest {
        let id = self.next_id;
        self.next_id += 1;
        EvalRequest {
            id,
            arch: *arch,
            task: self.cfg.task.clone(),
            hyperparams: self.cfg.hyperparams.clone(),
        }
    }
}

impl Evaluator for ExternalEvaluator {
    fn evaluate(&mut self, arch: &ArchParams) -> Result<QualityReport, EvalError> {
        let req = self.request(arch);
        run_on(&mut self.workers[0], &self.cfg, &req)
    }

    /// Deals requests round-robin over the workers; each worker handles its
    /// share in order.
    fn evaluate_batch(&mut self, archs: &[ArchParams]) -> Vec<Result<QualityReport, EvalError>> {
        let requests: Vec<EvalRequest> = archs.iter().map(|a| self.request(a)).collect();
        let n = self.workers.len();
        let cfg = &self.cfg;
        let mut results: Vec<Option<Result<QualityReport, EvalError>>> =
            (0..archs.len()).map(|_| None).collect();
        thread::scope(|s| {
            let handles: Vec<_> = self
                .workers
                .iter_mut()
                .enumerate()
                .map(|(k, slot)| {
                    let reqs = &requests;
                    s.spawn(move || {
                        (k..reqs.len())
                            .step_by(n)
                            .map(|i| (i, run_on(slot, cfg, &reqs[i])))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (i, r) in h.join().expect("worker thread panicked") {
                    results[i] = Some(r);
                }
            }
        });
        results
            .into_iter()
            .map(|r| r.expect("every request answered"))
            .collect()
    }
}
