//! Trainer wire protocol: one JSON object per LF-terminated line.
//!
//! Request:
//! `{"id":7,"arch":{"B":5,"x":2,"z":6},"task":{"classes":[...],"dataset":"path"},
//!   "hp":{"lr":0.001,"batch":128,"dropout":0.2,"beta1":0.9,"beta2":0.999,"max_epochs":50}}`
//!
//! Response:
//! `{"id":7,"status":"ok","metrics":{"accuracy":0.91,"per_class":[{"label":"Normal",
//!   "precision":0.9,"recall":0.95,"f1":0.92}]}}`
//!
//! `metrics` holds test-split results and drives the search. A response may
//! also carry `val_metrics` with the same shape. Failures reply
//! `{"id":7,"status":"failed","reason":"..."}`.

use bionet_core::evaluate::{
    EvalRequest, EvalResponse, EvalStatus, TaskDescriptor, TrainerHyperparams,
};
use bionet_core::metrics::{ClassReport, QualityReport};
use bionet_core::ArchParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireArch {
    #[serde(rename = "B")]
    pub blocks: u8,
    pub x: u8,
    pub z: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireTask {
    pub classes: Vec<String>,
    pub dataset: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireHyperparams {
    pub lr: f64,
    pub batch: u32,
    pub dropout: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub max_epochs: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRequest {
    pub id: u64,
    pub arch: WireArch,
    pub task: WireTask,
    pub hp: WireHyperparams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireClass {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireMetrics {
    pub accuracy: f64,
    #[serde(default)]
    pub per_class: Vec<WireClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireResponse {
    pub id: u64,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<WireMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val_metrics: Option<WireMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl From<&ArchParams> for WireArch {
    fn from(a: &ArchParams) -> Self {
        Self {
            blocks: a.blocks(),
            x: a.filter_interval(),
            z: a.lstm_exp(),
        }
    }
}

impl TryFrom<&WireArch> for ArchParams {
    type Error = String;

    fn try_from(w: &WireArch) -> Result<Self, String> {
        ArchParams::new(w.blocks, w.x, w.z).map_err(|e| e.to_string())
    }
}

impl From<&TaskDescriptor> for WireTask {
    fn from(t: &TaskDescriptor) -> Self {
        Self {
            classes: t.classes.clone(),
            dataset: t.dataset.clone(),
        }
    }
}

impl From<&TrainerHyperparams> for WireHyperparams {
    fn from(h: &TrainerHyperparams) -> Self {
        Self {
            lr: h.learning_rate,
            batch: h.batch_size,
            dropout: h.dropout,
            beta1: h.beta1,
            beta2: h.beta2,
            max_epochs: h.max_epochs,
        }
    }
}

impl From<&WireHyperparams> for TrainerHyperparams {
    fn from(h: &WireHyperparams) -> Self {
        Self {
            learning_rate: h.lr,
            batch_size: h.batch,
            dropout: h.dropout,
            beta1: h.beta1,
            beta2: h.beta2,
            max_epochs: h.max_epochs,
        }
    }
}

impl From<&QualityReport> for WireMetrics {
    fn from(q: &QualityReport) -> Self {
        Self {
            accuracy: q.accuracy,
            per_class: q
                .per_class
                .iter()
                .map(|c| WireClass {
                    label: c.label.clone(),
                    precision: c.precision,
                    recall: c.recall,
                    f1: c.f1,
                })
                .collect(),
        }
    }
}

impl WireMetrics {
    /// Converts to a report, rejecting values outside `[0, 1]`.
    pub fn to_report(&self) -> Result<QualityReport, String> {
        let check = |what: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(v)
            } else {
                Err(format!("{what} = {v} outside [0, 1]"))
            }
        };
        Ok(QualityReport {
            accuracy: check("accuracy", self.accuracy)?,
            per_class: self
                .per_class
                .iter()
                .map(|c| {
                    Ok(ClassReport {
                        label: c.label.clone(),
                        precision: check("precision", c.precision)?,
                        recall: check("recall", c.recall)?,
                        f1: check("f1", c.f1)?,
                    })
                })
                .collect::<Result<_, String>>()?,
            roc: None,
        })
    }
}

pub fn encode_request(req: &EvalRequest) -> String {
    let wire = WireRequest {
        id: req.id,
        arch: (&req.arch).into(),
        task: (&req.task).into(),
        hp: (&req.hyperparams).into(),
    };
    serde_json::to_string(&wire).expect("request serializes")
}

pub fn decode_request(line: &str) -> Result<EvalRequest, String> {
    let w: WireRequest = serde_json::from_str(line).map_err(|e| e.to_string())?;
    Ok(EvalRequest {
        id: w.id,
        arch: ArchParams::try_from(&w.arch)?,
        task: TaskDescriptor {
            classes: w.task.classes,
            dataset: w.task.dataset,
        },
        hyperparams: (&w.hp).into(),
    })
}

pub fn encode_response(resp: &EvalResponse) -> String {
    let wire = match &resp.status {
        EvalStatus::Ok(q) => WireResponse {
            id: resp.id,
            status: "ok".into(),
            metrics: Some(q.into()),
            val_metrics: None,
            reason: None,
        },
        EvalStatus::Failed(reason) => WireResponse {
            id: resp.id,
            status: "failed".into(),
            metrics: None,
            val_metrics: None,
            reason: Some(reason.clone()),
        },
    };
    serde_json::to_string(&wire).expect("response serializes")
}

/// Parses a response line. Errors describe what is malformed.
pub fn decode_response(line: &str) -> Result<EvalResponse, String> {
    let w: WireResponse = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let status = match w.status.as_str() {
        "ok" => {
            let m = w.metrics.as_ref().ok_or("status ok without metrics")?;
            EvalStatus::Ok(m.to_report()?)
        }
        "failed" => EvalStatus::Failed(w.reason.unwrap_or_else(|| "no reason given".into())),
        other => return Err(format!("unknown status {other:?}")),
    };
    Ok(EvalResponse { id: w.id, status })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request() -> EvalRequest {
        EvalRequest {
            id: 7,
            arch: ArchParams::new(5, 2, 6).unwrap(),
            task: TaskDescriptor {
                classes: vec!["Normal".into(), "PVC".into()],
                dataset: "data/dnn2.bnxd".into(),
            },
            hyperparams: TrainerHyperparams::default(),
        }
    }

    #[test]
    fn request_wire_shape() {
        assert_eq!(
            encode_request(&request()),
            r#"{"id":7,"arch":{"B":5,"x":2,"z":6},"task":{"classes":["Normal","PVC"],"dataset":"data/dnn2.bnxd"},"hp":{"lr":0.001,"batch":128,"dropout":0.2,"beta1":0.9,"beta2":0.999,"max_epochs":50}}"#
        );
        assert_eq!(
            decode_request(&encode_request(&request())).unwrap(),
            request()
        );
    }

    #[test]
    fn response_roundtrip_and_errors() {
        let line = r#"{"id":3,"status":"ok","metrics":{"accuracy":0.9,"per_class":[{"label":"N","precision":0.8,"recall":1.0,"f1":0.5}]}}"#;
        let resp = decode_response(line).unwrap();
        assert_eq!(resp.id, 3);
        assert_eq!(decode_response(&encode_response(&resp)).unwrap(), resp);

        let failed = decode_response(r#"{"id":1,"status":"failed","reason":"oom"}"#).unwrap();
        assert_eq!(failed.status, EvalStatus::Failed("oom".into()));
        assert!(decode_response(r#"{"id":1,"status":"ok"}"#).is_err());
        assert!(decode_response(r#"{"id":1,"status":"ok","metrics":{"accuracy":1.5}}"#).is_err());
        assert!(decode_response(r#"{"id":1,"status":"maybe"}"#).is_err());
        assert!(decode_response("not json").is_err());
    }

    #[test]
    fn val_slot_accepted() {
        let line =
            r#"{"id":3,"status":"ok","metrics":{"accuracy":0.9},"val_metrics":{"accuracy":0.8}}"#;
        match decode_response(line).unwrap().status {
            EvalStatus::Ok(q) => assert_eq!(q.accuracy, 0.9),
            other => panic!("{other:?}"),
        }
    }
}
