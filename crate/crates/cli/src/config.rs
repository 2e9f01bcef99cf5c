//! Experiment configuration: a single JSON document, validated field by
//! field so that every problem is reported at once.

use std::fmt;

use perconet::lattice::LatticeKind;
use perconet::percolation::Event;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Experiment {
    Sample,
    Events,
    BlockScaling,
    Extract,
    VerifyRules,
    EntPerc,
    SquareDouble,
    SubcriticalScaling,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Sample,
        Experiment::Events,
        Experiment::BlockScaling,
        Experiment::Extract,
        Experiment::VerifyRules,
        Experiment::EntPerc,
        Experiment::SquareDouble,
        Experiment::SubcriticalScaling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Sample => "sample",
            Experiment::Events => "events",
            Experiment::BlockScaling => "blockScaling",
            Experiment::Extract => "extract",
            Experiment::VerifyRules => "verifyRules",
            Experiment::EntPerc => "entPerc",
            Experiment::SquareDouble => "squareDouble",
            Experiment::SubcriticalScaling => "subcriticalScaling",
        }
    }

    /// Trial count used when the config leaves `trials` out.
    pub fn default_trials(self) -> u64 {
        match self {
            Experiment::Sample => 10,
            Experiment::Events | Experiment::BlockScaling | Experiment::EntPerc | Experiment::SubcriticalScaling => 1000,
            Experiment::Extract => 100,
            Experiment::VerifyRules => 1000,
            Experiment::SquareDouble => 10_000,
        }
    }

    /// Keys accepted besides the common ones.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Experiment::Sample => &["lattice", "d", "dims", "L", "p", "pSite", "dot"],
            Experiment::Events => &["lattice", "d", "L", "k", "p", "pSite", "events"],
            Experiment::BlockScaling => &["lattice", "d", "L", "p", "pSite", "target", "populations", "kCap"],
            Experiment::Extract => &[
                "lattice", "d", "L", "k", "n", "p", "pSite", "pipeline", "target", "pilotTrials", "nCap", "dot",
            ],
            Experiment::VerifyRules => &["maxVertices", "stabilizerMaxVertices", "fusionTrials", "p"],
            Experiment::EntPerc => &["lambda1", "L", "swapChecks"],
            Experiment::SquareDouble => &["L", "p"],
            Experiment::SubcriticalScaling => &["lattice", "L", "p", "measure"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const COMMON: [&str; 5] = ["experiment", "seed", "trials", "out", "threads"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PipelineKind {
    FixedBlock,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Measure {
    LargestCluster,
    EdgeDisjoint,
}

/// One entry of the `events` list: a block event or the whole-lattice
/// crossing sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventSpec {
    Crossing,
    Block(Event),
}

impl Serialize for EventSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            EventSpec::Crossing => s.serialize_str("crossing"),
            EventSpec::Block(e) => e.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for EventSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v = Value::deserialize(d)?;
        match &v {
            Value::String(s) if s == "crossing" => Ok(EventSpec::Crossing),
            Value::String(s) => Event::named(s, [2, 2]).map(EventSpec::Block).map_err(D::Error::custom),
            _ => Event::deserialize(v).map(EventSpec::Block).map_err(D::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub trials: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub lattice: LatticeKind,
    /// Dimension of square lattices.
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(rename = "L", default, skip_serializing_if = "Vec::is_empty")]
    pub l: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub p: Vec<f64>,
    pub p_site: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub populations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<PipelineKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pilot_trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_vertices: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stabilizer_max_vertices: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fusion_trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda1: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap_checks: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<Measure>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub dot: bool,
}

/// A problem with one config field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationErrors(pub Vec<FieldError>);

impl ValidationErrors {
    pub fn mentions(&self, path: &str) -> bool {
        self.0.iter().any(|e| e.path == path)
    }
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid config ({} problem{}):", self.0.len(), if self.0.len() == 1 { "" } else { "s" })?;
        for e in &self.0 {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

struct Fields<'a> {
    obj: &'a Map<String, Value>,
    errors: Vec<FieldError>,
}

impl Fields<'_> {
    fn err(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(FieldError { path: path.into(), message: message.into() });
    }

    fn get<T: DeserializeOwned>(&mut self, key: &str) -> Option<T> {
        let v = self.obj.get(key)?;
        match T::deserialize(v) {
            Ok(t) => Some(t),
            Err(e) => {
                self.err(key, e.to_string());
                None
            }
        }
    }

    fn required<T: DeserializeOwned>(&mut self, key: &str) -> Option<T> {
        if !self.obj.contains_key(key) {
            self.err(key, "is required");
            return None;
        }
        self.get(key)
    }

    fn probability(&mut self, path: String, p: f64) {
        if !(0.0..=1.0).contains(&p) {
            self.err(path, format!("{p} is outside [0, 1]"));
        }
    }

    fn positive_list(&mut self, key: &str, v: &[usize]) {
        for (i, &x) in v.iter().enumerate() {
            if x == 0 {
                self.err(format!("{key}[{i}]"), "must be positive");
            }
        }
    }

    fn need_list<T>(&mut self, key: &str, v: &[T], experiment: Experiment) {
        if v.is_empty() && !self.obj.contains_key(key) {
            self.err(key, format!("is required by {experiment}"));
        } else if v.is_empty() {
            self.err(key, "must not be empty");
        }
    }
}

/// Parses and validates a config document.
pub fn validate(text: &str) -> Result<ExperimentConfig, ValidationErrors> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        ValidationErrors(vec![FieldError { path: "$".into(), message: format!("not valid JSON: {e}") }])
    })?;
    validate_value(&value)
}

pub fn validate_value(value: &Value) -> Result<ExperimentConfig, ValidationErrors> {
    let Some(obj) = value.as_object() else {
        return Err(ValidationErrors(vec![FieldError { path: "$".into(), message: "expected a JSON object".into() }]));
    };
    let mut f = Fields { obj, errors: Vec::new() };

    let experiment: Option<Experiment> = f.required("experiment");
    let seed: Option<u64> = f.required("seed");
    if let Some(ex) = experiment {
        for key in obj.keys() {
            if !COMMON.contains(&key.as_str()) && !ex.keys().contains(&key.as_str()) {
                f.err(key.clone(), format!("is not a parameter of {ex}"));
            }
        }
    }
    let ex = experiment.unwrap_or(Experiment::Sample);
    let trials = f.get::<u64>("trials").unwrap_or(ex.default_trials());
    if trials == 0 {
        f.err("trials", "must be at least 1");
    }
    let threads: Option<usize> = f.get("threads");
    if threads == Some(0) {
        f.err("threads", "must be at least 1");
    }
    let lattice = f.get("lattice").unwrap_or(LatticeKind::Square);
    let d = f.get("d").unwrap_or(2usize);
    if !(1..=4).contains(&d) {
        f.err("d", format!("{d} is not a supported dimension (1 to 4)"));
    }
    if lattice != LatticeKind::Square && obj.contains_key("d") && d != lattice_dimension(lattice) {
        f.err("d", format!("the {} lattice is {}-dimensional", lattice.name(), lattice_dimension(lattice)));
    }
    let dims: Option<Vec<usize>> = f.get("dims");
    if let Some(ds) = &dims {
        f.positive_list("dims", ds);
    }
    let l: Vec<usize> = f.get("L").unwrap_or_default();
    f.positive_list("L", &l);
    let k: Vec<usize> = f.get("k").unwrap_or_default();
    f.positive_list("k", &k);
    let n: Vec<usize> = f.get("n").unwrap_or_default();
    f.positive_list("n", &n);
    let p: Vec<f64> = f.get("p").unwrap_or_default();
    for (i, &x) in p.iter().enumerate() {
        f.probability(format!("p[{i}]"), x);
    }
    let p_site = f.get("pSite").unwrap_or(1.0);
    f.probability("pSite".into(), p_site);
    let events: Vec<EventSpec> = f.get("events").unwrap_or_default();
    let target: Option<f64> = f.get("target");
    if let Some(t) = target {
        if !(t > 0.0 && t < 1.0) {
            f.err("target", format!("{t} is outside (0, 1)"));
        }
    }
    let populations: Option<usize> = f.get("populations");
    let k_cap: Option<usize> = f.get("kCap");
    let pipeline: Option<PipelineKind> = f.get("pipeline");
    let pilot_trials: Option<u64> = f.get("pilotTrials");
    let n_cap: Option<usize> = f.get("nCap");
    for (key, v) in [("populations", populations), ("kCap", k_cap), ("nCap", n_cap)] {
        if v == Some(0) {
            f.err(key, "must be positive");
        }
    }
    if pilot_trials == Some(0) {
        f.err("pilotTrials", "must be at least 1");
    }
    let max_vertices: Option<u32> = f.get("maxVertices");
    if let Some(m) = max_vertices {
        if !(1..=8).contains(&m) {
            f.err("maxVertices", format!("{m} is outside 1 to 8"));
        }
    }
    let stabilizer_max_vertices: Option<u32> = f.get("stabilizerMaxVertices");
    if let Some(m) = stabilizer_max_vertices {
        if !(1..=16).contains(&m) {
            f.err("stabilizerMaxVertices", format!("{m} is outside 1 to 16"));
        }
    }
    let fusion_trials: Option<u64> = f.get("fusionTrials");
    let lambda1: Vec<f64> = f.get("lambda1").unwrap_or_default();
    for (i, &x) in lambda1.iter().enumerate() {
        if !(0.5..=1.0).contains(&x) {
            f.err(format!("lambda1[{i}]"), format!("{x} is outside [0.5, 1]"));
        }
    }
    let swap_checks: Option<u64> = f.get("swapChecks");
    let measure: Option<Measure> = f.get("measure");
    let dot = f.get("dot").unwrap_or(false);
    let out: Option<String> = f.get("out");

    if let Some(ex) = experiment {
        match ex {
            Experiment::Sample => {
                if dims.is_none() && l.is_empty() {
                    f.err("L", "sample needs L or dims");
                }
                if l.len() > 1 {
                    f.err("L", "sample takes a single size");
                }
                f.need_list("p", &p, ex);
            }
            Experiment::Events => {
                f.need_list("L", &l, ex);
                f.need_list("p", &p, ex);
                f.need_list("events", &events, ex);
                if events.iter().any(|e| matches!(e, EventSpec::Block(_))) {
                    f.need_list("k", &k, ex);
                }
                if lattice == LatticeKind::Pyrochlore {
                    f.err("lattice", "block events are not available on the pyrochlore lattice");
                }
            }
            Experiment::BlockScaling => {
                f.need_list("L", &l, ex);
                f.need_list("p", &p, ex);
                if lattice == LatticeKind::Pyrochlore {
                    f.err("lattice", "block search is not available on the pyrochlore lattice");
                }
            }
            Experiment::Extract => {
                f.need_list("L", &l, ex);
                f.need_list("p", &p, ex);
                match pipeline {
                    None if !obj.contains_key("pipeline") => f.err("pipeline", "is required by extract"),
                    Some(PipelineKind::FixedBlock) => {
                        f.need_list("k", &k, ex);
                        if lattice == LatticeKind::Pyrochlore {
                            f.err("lattice", "fixed-block extraction is not available on the pyrochlore lattice");
                        }
                    }
                    Some(PipelineKind::Supercritical) => {
                        if lattice != LatticeKind::Square || d != 2 {
                            f.err("lattice", "supercritical extraction runs on the two-dimensional square lattice");
                        }
                        if p_site != 1.0 && n.is_empty() {
                            f.err("pSite", "automatic sizing assumes pure bond percolation");
                        }
                    }
                    None => {}
                }
            }
            Experiment::VerifyRules => {}
            Experiment::EntPerc => {
                f.need_list("lambda1", &lambda1, ex);
                if l.len() > 1 {
                    f.err("L", "entPerc takes a single size");
                }
            }
            Experiment::SquareDouble => {
                f.need_list("L", &l, ex);
                f.need_list("p", &p, ex);
                for (i, &x) in l.iter().enumerate() {
                    if x < 16 {
                        f.err(format!("L[{i}]"), format!("{x} is below the minimum of 16"));
                    }
                }
                for (i, &x) in p.iter().enumerate() {
                    if x < 0.5 {
                        f.err(format!("p[{i}]"), format!("{x} is below 1/2"));
                    }
                }
            }
            Experiment::SubcriticalScaling => {
                f.need_list("p", &p, ex);
                if l.len() < 2 {
                    f.err("L", "needs at least two sizes");
                }
                if measure == Some(Measure::EdgeDisjoint) && lattice != LatticeKind::Square {
                    f.err("lattice", "edge-disjoint crossings are counted on the square lattice");
                }
            }
        }
    }

    if !f.errors.is_empty() {
        return Err(ValidationErrors(f.errors));
    }
    Ok(ExperimentConfig {
        experiment: ex,
        seed: seed.expect("checked"),
        trials,
        out,
        threads,
        lattice,
        d: if lattice == LatticeKind::Square { d } else { lattice_dimension(lattice) },
        dims,
        l,
        k,
        n,
        p,
        p_site,
        events,
        target,
        populations,
        k_cap,
        pipeline,
        pilot_trials,
        n_cap,
        max_vertices,
        stabilizer_max_vertices,
        fusion_trials,
        lambda1,
        swap_checks,
        measure,
        dot,
    })
}

fn lattice_dimension(kind: LatticeKind) -> usize {
    match kind {
        LatticeKind::Square | LatticeKind::Hexagonal | LatticeKind::Triangular => 2,
        LatticeKind::Diamond | LatticeKind::Pyrochlore => 3,
    }
}

impl ExperimentConfig {
    /// Canonical JSON echo; `validate` of the echo gives back `self`.
    pub fn echo(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let keys = self.experiment.keys();
        if let Some(obj) = v.as_object_mut() {
            obj.retain(|k, _| COMMON.contains(&k.as_str()) || keys.contains(&k.as_str()));
        }
        serde_json::to_string_pretty(&v).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> ValidationErrors {
        validate(text).unwrap_err()
    }

    #[test]
    fn missing_seed_is_named() {
        let e = errors(r#"{"experiment":"events","L":[2],"k":[2],"p":[0.5],"events":["U_full"]}"#);
        assert!(e.mentions("seed"), "{e}");
        assert_eq!(e.0.len(), 1);
    }

    #[test]
    fn probability_range() {
        let e = errors(r#"{"experiment":"squareDouble","seed":1,"L":[32],"p":[0.6,1.2]}"#);
        assert!(e.mentions("p[1]"), "{e}");
    }

    #[test]
    fn all_problems_reported() {
        let e = errors(r#"{"experiment":"extract","trials":0,"L":[0],"p":[-1],"lambda1":[0.7],"colour":3}"#);
        for path in ["seed", "trials", "L[0]", "p[0]", "lambda1", "colour", "pipeline"] {
            assert!(e.mentions(path), "missing {path} in {e}");
        }
    }

    #[test]
    fn wrong_types_are_reported_by_field() {
        let e = errors(r#"{"experiment":"sample","seed":"x","L":4,"p":[0.5]}"#);
        assert!(e.mentions("seed") && e.mentions("L"), "{e}");
        assert!(errors(r#"{"experiment":"bogus","seed":1}"#).mentions("experiment"));
        assert!(errors("[1,2]").mentions("$"));
        assert!(errors("{").mentions("$"));
    }

    #[test]
    fn minimal_config_round_trips() {
        let c = validate(r#"{"experiment":"events","seed":7,"L":[2],"k":[1,2],"p":[1.0],"events":["U_full",{"event":"A_cross","y":[2,3]},"crossing"]}"#).unwrap();
        assert_eq!(c.trials, 1000);
        assert_eq!(c.events[0], EventSpec::Block(Event::UFull));
        assert_eq!(c.events[2], EventSpec::Crossing);
        assert_eq!(validate(&c.echo()).unwrap(), c);
        for ex in Experiment::ALL {
            let text = match ex {
                Experiment::VerifyRules => format!(r#"{{"experiment":"{ex}","seed":1}}"#),
                Experiment::EntPerc => format!(r#"{{"experiment":"{ex}","seed":1,"lambda1":[0.8]}}"#),
                Experiment::Extract => {
                    format!(r#"{{"experiment":"{ex}","seed":1,"L":[4],"p":[0.8],"pipeline":"supercritical"}}"#)
                }
                Experiment::SquareDouble | Experiment::SubcriticalScaling => {
                    format!(r#"{{"experiment":"{ex}","seed":1,"L":[16,32],"p":[0.5]}}"#)
                }
                Experiment::Events => format!(r#"{{"experiment":"{ex}","seed":1,"L":[8],"p":[0.5],"events":["crossing"]}}"#),
                _ => format!(r#"{{"experiment":"{ex}","seed":1,"L":[4],"p":[0.5]}}"#),
            };
            let c = validate(&text).unwrap_or_else(|e| panic!("{ex}: {e}"));
            assert_eq!(validate(&c.echo()).unwrap(), c, "{ex}");
        }
    }

    #[test]
    fn foreign_parameters_are_rejected() {
        let e = errors(r#"{"experiment":"verifyRules","seed":1,"lambda1":[0.7]}"#);
        assert!(e.mentions("lambda1"));
    }

    #[test]
    fn supercritical_needs_plane_square() {
        let e = errors(r#"{"experiment":"extract","seed":1,"L":[4],"p":[0.8],"pipeline":"supercritical","lattice":"diamond"}"#);
        assert!(e.mentions("lattice"));
    }
}
