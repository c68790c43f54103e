//! Three-valued outcomes with the method that decided them and supporting data.

use serde::Serialize;
use serde_json::{json, Value};

use crate::numeric::linalg::Vector;
use crate::polyhedra::json::text_vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Holds,
    Fails,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    AutoHoffman,
    MetricRegular,
    Gfrerer,
    UserAsserted,
    Copositivity,
    StrongRobinson,
    SecondOrder,
    Probe,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Vector(Vector),
    Pair { w: Vector, u: Vector },
}

impl Witness {
    pub fn to_json(&self) -> Value {
        match self {
            Witness::Vector(v) => json!({ "vector": text_vector(v) }),
            Witness::Pair { w, u } => json!({ "w": text_vector(w), "u": text_vector(u) }),
        }
    }

    pub fn vector(&self) -> Option<&Vector> {
        match self {
            Witness::Vector(v) => Some(v),
            Witness::Pair { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub method: Method,
    pub witness: Option<Witness>,
    pub certificate: Option<Value>,
    pub detail: Option<String>,
    pub sub_verdicts: Vec<Verdict>,
}

impl Verdict {
    pub fn new(outcome: Outcome, method: Method) -> Self {
        Verdict { outcome, method, witness: None, certificate: None, detail: None, sub_verdicts: Vec::new() }
    }

    pub fn holds(method: Method) -> Self {
        Self::new(Outcome::Holds, method)
    }

    pub fn fails(method: Method, witness: Witness) -> Self {
        Verdict { witness: Some(witness), ..Self::new(Outcome::Fails, method) }
    }

    pub fn unknown(method: Method, detail: impl Into<String>) -> Self {
        Verdict { detail: Some(detail.into()), ..Self::new(Outcome::Unknown, method) }
    }

    pub fn with_certificate(mut self, c: Value) -> Self {
        self.certificate = Some(c);
        self
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn with_sub(mut self, subs: Vec<Verdict>) -> Self {
        self.sub_verdicts = subs;
        self
    }

    pub fn is_holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn is_fails(&self) -> bool {
        self.outcome == Outcome::Fails
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "outcome": self.outcome,
            "method": self.method,
        });
        let obj = v.as_object_mut().expect("object");
        if let Some(w) = &self.witness {
            obj.insert("witness".into(), w.to_json());
        }
        if let Some(c) = &self.certificate {
            obj.insert("certificate".into(), c.clone());
        }
        if let Some(d) = &self.detail {
            obj.insert("detail".into(), json!(d));
        }
        if !self.sub_verdicts.is_empty() {
            obj.insert("sub_verdicts".into(), Value::Array(self.sub_verdicts.iter().map(Verdict::to_json).collect()));
        }
        v
    }
}
