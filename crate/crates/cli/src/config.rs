//! Experiment configuration: a JSON document validated strictly. Every
//! problem is collected with its key path instead of stopping at the first.

use std::fmt;

use serde_json::{Map, Value};

use hdtlab::protocols::{
    ProtocolConfig, SamplingMode, UnitarySource, DEFAULT_DENSE_CAP, DEFAULT_EXACT_CAP,
};
use hdtlab::qml::OptimizerSettings;
use hdtlab::security::{DEFAULT_MC_THRESHOLD, DEFAULT_MI_SHOTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Dt,
    Hdt,
    Pop,
    Mi,
    Tradeoff,
    Qsize,
    Oracle,
    Train,
    Statmodel,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::Dt,
        Kind::Hdt,
        Kind::Pop,
        Kind::Mi,
        Kind::Tradeoff,
        Kind::Qsize,
        Kind::Oracle,
        Kind::Train,
        Kind::Statmodel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Dt => "dt",
            Kind::Hdt => "hdt",
            Kind::Pop => "pop",
            Kind::Mi => "mi",
            Kind::Tradeoff => "tradeoff",
            Kind::Qsize => "qsize",
            Kind::Oracle => "oracle",
            Kind::Train => "train",
            Kind::Statmodel => "statmodel",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == s)
    }

    fn uses_protocol(self) -> bool {
        matches!(
            self,
            Kind::Dt | Kind::Hdt | Kind::Pop | Kind::Mi | Kind::Tradeoff
        )
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// All validation problems found in one document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Protocol section; `n_ancilla` is absent when an ancilla sweep is given.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSection {
    pub n_data: usize,
    pub n_ancilla: Option<usize>,
    pub steps: usize,
    pub unitary: UnitaryKind,
    pub mode: SamplingMode,
    pub realizations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnitaryKind {
    Haar,
    Hea { layers: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    pub exact_cap: usize,
    pub dense_cap: usize,
    /// Block size for the blocked U-statistic; `None` evaluates all pairs.
    pub u_statistic_block: Option<usize>,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            exact_cap: DEFAULT_EXACT_CAP,
            dense_cap: DEFAULT_DENSE_CAP,
            u_statistic_block: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopSection {
    pub bins: usize,
    /// Computational basis index of the reference state.
    pub reference: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiSection {
    pub mc_threshold: usize,
    pub shots: usize,
    /// Histogram the final-step distribution with this many bins.
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QsizeSection {
    pub n_data: u32,
    pub n_ancilla: (u32, u32),
    pub k: u32,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSection {
    pub n_data: usize,
    pub n_ancilla: usize,
    pub steps: usize,
    pub orders: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSection {
    pub n_data: usize,
    pub n_ancilla: usize,
    pub steps: usize,
    pub layers: Option<usize>,
    pub ensembles: usize,
    pub shots: usize,
    pub schedule: Option<Vec<f64>>,
    pub optimizer: OptimizerSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatmodelSection {
    pub n: i64,
    pub k: u32,
    pub t: Vec<u32>,
    pub d_a: usize,
    pub d_b: usize,
    pub approx: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub id: String,
    pub master_seed: u64,
    pub protocol: Option<ProtocolSection>,
    pub orders: Vec<u32>,
    pub ancilla_sweep: Vec<usize>,
    pub numerics: Numerics,
    pub pop: Option<PopSection>,
    pub mi: Option<MiSection>,
    pub qsize: Option<QsizeSection>,
    pub oracle: Option<OracleSection>,
    pub train: Option<TrainSection>,
    pub statmodel: Option<StatmodelSection>,
}

impl ExperimentConfig {
    /// Ancilla sizes to run: the sweep if present, else the single protocol value.
    pub fn ancillas(&self) -> Vec<usize> {
        if !self.ancilla_sweep.is_empty() {
            return self.ancilla_sweep.clone();
        }
        self.protocol
            .as_ref()
            .and_then(|p| p.n_ancilla)
            .into_iter()
            .collect()
    }

    /// Core protocol configuration for one ancilla size.
    pub fn protocol_config(&self, n_ancilla: usize) -> hdtlab::Result<ProtocolConfig> {
        let p = self
            .protocol
            .as_ref()
            .ok_or_else(|| hdtlab::Error::invalid("experiment has no protocol section"))?;
        let source = match p.unitary {
            UnitaryKind::Haar => UnitarySource::HaarFixed {
                seed: self.master_seed,
            },
            UnitaryKind::Hea { layers } => UnitarySource::Hea {
                layers,
                param_seed: self.master_seed,
            },
        };
        let mut cfg = ProtocolConfig::new(p.n_data, n_ancilla, p.steps, source, p.mode)?
            .with_realizations(p.realizations)
            .with_sample_seed(hdtlab::rng::mix(self.master_seed, 0x5a4d_504c_4553));
        cfg.exact_cap = self.numerics.exact_cap;
        cfg.dense_cap = self.numerics.dense_cap;
        Ok(cfg)
    }
}

/// Walks a JSON object, recording errors with dotted key paths.
struct Checker {
    errors: Vec<String>,
}

struct Obj<'a> {
    path: String,
    map: &'a Map<String, Value>,
}

impl<'a> Obj<'a> {
    fn key(&self, k: &str) -> String {
        if self.path.is_empty() {
            k.to_string()
        } else {
            format!("{}.{k}", self.path)
        }
    }
}

impl Checker {
    fn err(&mut self, path: &str, msg: impl fmt::Display) {
        self.errors.push(format!("{path}: {msg}"));
    }

    fn object<'a>(&mut self, v: &'a Value, path: &str) -> Option<Obj<'a>> {
        match v {
            Value::Object(map) => Some(Obj {
                path: path.to_string(),
                map,
            }),
            _ => {
                self.err(path, "expected an object");
                None
            }
        }
    }

    fn allow(&mut self, o: &Obj, keys: &[&str]) {
        for k in o.map.keys() {
            if !keys.contains(&k.as_str()) {
                self.err(&o.key(k), "unknown key");
            }
        }
    }

    fn forbid(&mut self, o: &Obj, key: &str, why: &str) {
        if o.map.contains_key(key) {
            self.err(&o.key(key), why);
        }
    }

    fn sub<'a>(&mut self, o: &Obj<'a>, key: &str, required: bool) -> Option<Obj<'a>> {
        match o.map.get(key) {
            Some(v) => self.object(v, &o.key(key)),
            None => {
                if required {
                    self.err(&o.key(key), "missing required section");
                }
                None
            }
        }
    }

    fn uint(&mut self, o: &Obj, key: &str, required: bool, min: u64) -> Option<u64> {
        let path = o.key(key);
        match o.map.get(key) {
            None => {
                if required {
                    self.err(&path, "missing required key");
                }
                None
            }
            Some(v) => match v.as_u64() {
                Some(x) if x >= min => Some(x),
                Some(x) => {
                    self.err(&path, format!("must be >= {min}, got {x}"));
                    None
                }
                None => {
                    self.err(&path, format!("expected a non-negative integer, got {v}"));
                    None
                }
            },
        }
    }

    fn int(&mut self, o: &Obj, key: &str) -> Option<i64> {
        let path = o.key(key);
        match o.map.get(key) {
            None => {
                self.err(&path, "missing required key");
                None
            }
            Some(v) => v.as_i64().or_else(|| {
                self.err(&path, format!("expected an integer, got {v}"));
                None
            }),
        }
    }

    fn real(&mut self, o: &Obj, key: &str, required: bool) -> Option<f64> {
        let path = o.key(key);
        match o.map.get(key) {
            None => {
                if required {
                    self.err(&path, "missing required key");
                }
                None
            }
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    self.err(&path, format!("expected a finite number, got {v}"));
                    None
                }
            },
        }
    }

    fn string<'a>(&mut self, o: &Obj<'a>, key: &str, required: bool) -> Option<&'a str> {
        let path = o.key(key);
        match o.map.get(key) {
            None => {
                if required {
                    self.err(&path, "missing required key");
                }
                None
            }
            Some(Value::String(s)) => Some(s.as_str()),
            Some(v) => {
                self.err(&path, format!("expected a string, got {v}"));
                None
            }
        }
    }

    fn boolean(&mut self, o: &Obj, key: &str) -> Option<bool> {
        match o.map.get(key) {
            None => None,
            Some(Value::Bool(b)) => Some(*b),
            Some(v) => {
                self.err(&o.key(key), format!("expected true or false, got {v}"));
                None
            }
        }
    }

    fn uint_list(&mut self, o: &Obj, key: &str, required: bool, min: u64) -> Option<Vec<u64>> {
        let path = o.key(key);
        match o.map.get(key) {
            None => {
                if required {
                    self.err(&path, "missing required key");
                }
                None
            }
            Some(Value::Array(items)) => {
                if items.is_empty() {
                    self.err(&path, "must not be empty");
                    return None;
                }
                let mut out = Vec::with_capacity(items.len());
                let mut ok = true;
                for (i, v) in items.iter().enumerate() {
                    match v.as_u64() {
                        Some(x) if x >= min => out.push(x),
                        _ => {
                            self.err(
                                &format!("{path}[{i}]"),
                                format!("expected an integer >= {min}, got {v}"),
                            );
                            ok = false;
                        }
                    }
                }
                ok.then_some(out)
            }
            Some(v) => {
                self.err(&path, format!("expected a list, got {v}"));
                None
            }
        }
    }
}

const TOP_KEYS: [&str; 13] = [
    "experiment",
    "id",
    "master_seed",
    "protocol",
    "metrics",
    "sweep",
    "numerics",
    "pop",
    "mi",
    "qsize",
    "oracle",
    "train",
    "statmodel",
];

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ConfigErrors(vec![format!("syntax: {e}")]))?;
    let mut c = Checker { errors: Vec::new() };
    let Some(root) = c.object(&value, "") else {
        return Err(ConfigErrors(c.errors));
    };
    c.allow(&root, &TOP_KEYS);

    let kind = match c.string(&root, "experiment", true) {
        Some(s) => Kind::parse(s).or_else(|| {
            let names: Vec<_> = Kind::ALL.iter().map(|k| k.name()).collect();
            c.err(
                "experiment",
                format!(
                    "unknown experiment {s:?}; expected one of {}",
                    names.join(", ")
                ),
            );
            None
        }),
        None => None,
    };
    let id = c.string(&root, "id", false).map(str::to_string);
    if let Some(id) = &id {
        if id.is_empty()
            || !id
                .chars()
                .all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-')
        {
            c.err(
                "id",
                "must be non-empty and use only letters, digits, '_' or '-'",
            );
        }
    }
    let master_seed = c.uint(&root, "master_seed", true, 0);

    let numerics = match c.sub(&root, "numerics", false) {
        Some(o) => {
            c.allow(&o, &["exact_cap", "dense_cap", "u_statistic_block"]);
            let d = Numerics::default();
            let block = match o.map.get("u_statistic_block") {
                None | Some(Value::Null) => None,
                Some(_) => c.uint(&o, "u_statistic_block", true, 2).map(|x| x as usize),
            };
            Numerics {
                exact_cap: c
                    .uint(&o, "exact_cap", false, 1)
                    .map_or(d.exact_cap, |x| x as usize),
                dense_cap: c
                    .uint(&o, "dense_cap", false, 1)
                    .map_or(d.dense_cap, |x| x as usize),
                u_statistic_block: block,
            }
        }
        None => Numerics::default(),
    };

    let mut cfg = ExperimentConfig {
        kind: kind.unwrap_or(Kind::Hdt),
        id: String::new(),
        master_seed: master_seed.unwrap_or(0),
        protocol: None,
        orders: Vec::new(),
        ancilla_sweep: Vec::new(),
        numerics,
        pop: None,
        mi: None,
        qsize: None,
        oracle: None,
        train: None,
        statmodel: None,
    };

    if let Some(kind) = kind {
        cfg.id = id.unwrap_or_else(|| kind.name().to_string());
        let allowed: &[&str] = match kind {
            Kind::Dt | Kind::Hdt | Kind::Tradeoff => &["protocol", "metrics", "sweep"],
            Kind::Pop => &["protocol", "pop"],
            Kind::Mi => &["protocol", "sweep", "mi"],
            Kind::Qsize => &["qsize"],
            Kind::Oracle => &["oracle"],
            Kind::Train => &["train"],
            Kind::Statmodel => &["statmodel"],
        };
        for section in [
            "protocol",
            "metrics",
            "sweep",
            "pop",
            "mi",
            "qsize",
            "oracle",
            "train",
            "statmodel",
        ] {
            if !allowed.contains(&section) {
                c.forbid(
                    &root,
                    section,
                    &format!("not used by the {kind} experiment"),
                );
            }
        }

        if kind.uses_protocol() {
            if let Some(sweep) = c.sub(&root, "sweep", kind == Kind::Tradeoff) {
                c.allow(&sweep, &["n_ancilla"]);
                if let Some(v) = c.uint_list(&sweep, "n_ancilla", true, 0) {
                    cfg.ancilla_sweep = v.into_iter().map(|x| x as usize).collect();
                }
            }
            let swept = !cfg.ancilla_sweep.is_empty() || root.map.contains_key("sweep");
            if let Some(p) = c.sub(&root, "protocol", true) {
                cfg.protocol = parse_protocol(&mut c, &p, kind, swept);
            }
        }
        if matches!(kind, Kind::Dt | Kind::Hdt | Kind::Tradeoff) {
            if let Some(m) = c.sub(&root, "metrics", true) {
                c.allow(&m, &["frame_potential"]);
                if let Some(v) = c.uint_list(&m, "frame_potential", true, 1) {
                    cfg.orders = v.into_iter().map(|x| x as u32).collect();
                }
            }
        }
        match kind {
            Kind::Pop => {
                let o = c.sub(&root, "pop", false);
                let (bins, reference) = match &o {
                    Some(o) => {
                        c.allow(o, &["bins", "reference"]);
                        (
                            c.uint(o, "bins", false, 2)
                                .unwrap_or(hdtlab::metrics::DEFAULT_POP_BINS as u64),
                            c.uint(o, "reference", false, 0).unwrap_or(0),
                        )
                    }
                    None => (hdtlab::metrics::DEFAULT_POP_BINS as u64, 0),
                };
                if let Some(p) = &cfg.protocol {
                    if reference >= 1u64 << p.n_data.min(63) {
                        c.err("pop.reference", "basis index exceeds the data dimension");
                    }
                }
                cfg.pop = Some(PopSection {
                    bins: bins as usize,
                    reference: reference as usize,
                });
            }
            Kind::Mi => {
                let o = c.sub(&root, "mi", false);
                let mut s = MiSection {
                    mc_threshold: DEFAULT_MC_THRESHOLD,
                    shots: DEFAULT_MI_SHOTS,
                    bins: None,
                };
                if let Some(o) = &o {
                    c.allow(o, &["mc_threshold", "shots", "bins"]);
                    if let Some(x) = c.uint(o, "mc_threshold", false, 0) {
                        s.mc_threshold = x as usize;
                    }
                    if let Some(x) = c.uint(o, "shots", false, 1) {
                        s.shots = x as usize;
                    }
                    s.bins = c.uint(o, "bins", false, 1).map(|x| x as usize);
                }
                cfg.mi = Some(s);
            }
            Kind::Qsize => {
                if let Some(o) = c.sub(&root, "qsize", true) {
                    c.allow(&o, &["n_data", "n_ancilla", "k", "epsilon"]);
                    let n_data = c.uint(&o, "n_data", true, 1);
                    let range = c.uint_list(&o, "n_ancilla", true, 1);
                    let k = c.uint(&o, "k", true, 1);
                    let eps = c.real(&o, "epsilon", true);
                    if let Some(e) = eps {
                        if !(e > 0.0 && e < 1.0) {
                            c.err("qsize.epsilon", "must lie in (0, 1)");
                        }
                    }
                    let range = range.and_then(|r| {
                        if r.len() != 2 || r[0] > r[1] {
                            c.err("qsize.n_ancilla", "expected [low, high] with low <= high");
                            None
                        } else {
                            Some((r[0] as u32, r[1] as u32))
                        }
                    });
                    if let (Some(n_data), Some(range), Some(k), Some(epsilon)) =
                        (n_data, range, k, eps)
                    {
                        cfg.qsize = Some(QsizeSection {
                            n_data: n_data as u32,
                            n_ancilla: range,
                            k: k as u32,
                            epsilon,
                        });
                    }
                }
            }
            Kind::Oracle => {
                if let Some(o) = c.sub(&root, "oracle", true) {
                    c.allow(&o, &["n_data", "n_ancilla", "steps", "orders"]);
                    let n_data = c.uint(&o, "n_data", true, 1);
                    let n_ancilla = c.uint(&o, "n_ancilla", true, 0);
                    let steps = c.uint(&o, "steps", true, 1);
                    let orders = c.uint_list(&o, "orders", true, 1);
                    if let (Some(a), Some(b), Some(s), Some(k)) = (n_data, n_ancilla, steps, orders)
                    {
                        cfg.oracle = Some(OracleSection {
                            n_data: a as usize,
                            n_ancilla: b as usize,
                            steps: s as usize,
                            orders: k.into_iter().map(|x| x as u32).collect(),
                        });
                    }
                }
            }
            Kind::Train => {
                if let Some(o) = c.sub(&root, "train", true) {
                    cfg.train = parse_train(&mut c, &o);
                }
            }
            Kind::Statmodel => {
                if let Some(o) = c.sub(&root, "statmodel", true) {
                    c.allow(&o, &["n", "k", "t", "d_a", "d_b", "approx"]);
                    let n = c.int(&o, "n");
                    let k = c.uint(&o, "k", true, 1);
                    let t = c.uint_list(&o, "t", true, 1);
                    let d_a = c.uint(&o, "d_a", true, 1);
                    let d_b = c.uint(&o, "d_b", true, 1);
                    let approx = c.boolean(&o, "approx").unwrap_or(false);
                    if let (Some(n), Some(k)) = (n, k) {
                        if n + (k as i64) < 1 {
                            c.err("statmodel.n", "n + k must be at least 1");
                        }
                    }
                    if let (Some(n), Some(k), Some(t), Some(d_a), Some(d_b)) = (n, k, t, d_a, d_b) {
                        cfg.statmodel = Some(StatmodelSection {
                            n,
                            k: k as u32,
                            t: t.into_iter().map(|x| x as u32).collect(),
                            d_a: d_a as usize,
                            d_b: d_b as usize,
                            approx,
                        });
                    }
                }
            }
            _ => {}
        }
    }

    if c.errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(c.errors))
    }
}

fn parse_protocol(c: &mut Checker, p: &Obj, kind: Kind, swept: bool) -> Option<ProtocolSection> {
    c.allow(
        p,
        &[
            "n_data",
            "n_ancilla",
            "steps",
            "unitary",
            "mode",
            "shots",
            "realizations",
        ],
    );
    let n_data = c.uint(p, "n_data", true, 1);
    let n_ancilla = if swept {
        c.forbid(p, "n_ancilla", "conflicts with sweep.n_ancilla");
        None
    } else {
        c.uint(p, "n_ancilla", true, 0)
    };
    let steps = c.uint(p, "steps", true, 1);
    if kind == Kind::Dt {
        if let Some(s) = steps {
            if s != 1 {
                c.err(&p.key("steps"), "deep thermalization has exactly one step");
            }
        }
    }
    let realizations = c.uint(p, "realizations", true, 1);
    let unitary = match c.sub(p, "unitary", true) {
        Some(u) => match c.string(&u, "kind", true) {
            Some("haar") => {
                c.allow(&u, &["kind"]);
                Some(UnitaryKind::Haar)
            }
            Some("hea") => {
                c.allow(&u, &["kind", "layers"]);
                c.uint(&u, "layers", true, 1)
                    .map(|l| UnitaryKind::Hea { layers: l as usize })
            }
            Some(other) => {
                c.err(
                    &u.key("kind"),
                    format!("expected \"haar\" or \"hea\", got {other:?}"),
                );
                None
            }
            None => None,
        },
        None => None,
    };
    let mode = match c.string(p, "mode", true) {
        Some("exact") => {
            c.forbid(p, "shots", "only valid with mode \"mc\"");
            Some(SamplingMode::Exact)
        }
        Some("mc") => c
            .uint(p, "shots", true, 1)
            .map(|s| SamplingMode::MonteCarlo { shots: s as usize }),
        Some(other) => {
            c.err(
                &p.key("mode"),
                format!("expected \"exact\" or \"mc\", got {other:?}"),
            );
            None
        }
        None => None,
    };
    Some(ProtocolSection {
        n_data: n_data? as usize,
        n_ancilla: if swept {
            None
        } else {
            Some(n_ancilla? as usize)
        },
        steps: steps? as usize,
        unitary: unitary?,
        mode: mode?,
        realizations: realizations? as usize,
    })
}

fn parse_train(c: &mut Checker, o: &Obj) -> Option<TrainSection> {
    c.allow(
        o,
        &[
            "n_data",
            "n_ancilla",
            "steps",
            "layers",
            "ensembles",
            "shots",
            "schedule",
            "optimizer",
        ],
    );
    let n_data = c.uint(o, "n_data", true, 1);
    let n_ancilla = c.uint(o, "n_ancilla", true, 0);
    let steps = c.uint(o, "steps", true, 1);
    let layers = c.uint(o, "layers", false, 1).map(|x| x as usize);
    let ensembles = c.uint(o, "ensembles", false, 1).unwrap_or(20) as usize;
    let shots = c.uint(o, "shots", false, 2).unwrap_or(50_000) as usize;
    let schedule = match o.map.get("schedule") {
        None => None,
        Some(Value::Array(items)) => {
            let vals: Vec<f64> = items.iter().filter_map(Value::as_f64).collect();
            if vals.len() != items.len() {
                c.err(&o.key("schedule"), "expected a list of numbers");
                None
            } else if let Err(e) = hdtlab::qml::TrainSchedule::from_values(vals.clone()) {
                c.err(&o.key("schedule"), e);
                None
            } else {
                if let Some(s) = steps {
                    if vals.len() as u64 != s + 1 {
                        c.err(
                            &o.key("schedule"),
                            format!("needs steps + 1 = {} values", s + 1),
                        );
                    }
                }
                Some(vals)
            }
        }
        Some(v) => {
            c.err(&o.key("schedule"), format!("expected a list, got {v}"));
            None
        }
    };
    let mut optimizer = OptimizerSettings::default();
    if let Some(opt) = c.sub(o, "optimizer", false) {
        c.allow(
            &opt,
            &["learning_rate", "max_iters", "fd_step", "tolerance"],
        );
        if let Some(x) = c.real(&opt, "learning_rate", false) {
            optimizer.learning_rate = x;
        }
        if let Some(x) = c.uint(&opt, "max_iters", false, 1) {
            optimizer.max_iters = x as usize;
        }
        if let Some(x) = c.real(&opt, "fd_step", false) {
            optimizer.fd_step = x;
        }
        if let Some(x) = c.real(&opt, "tolerance", false) {
            optimizer.tolerance = x;
        }
        for (key, v) in [
            ("learning_rate", optimizer.learning_rate),
            ("fd_step", optimizer.fd_step),
        ] {
            if v <= 0.0 {
                c.err(&opt.key(key), "must be positive");
            }
        }
    }
    Some(TrainSection {
        n_data: n_data? as usize,
        n_ancilla: n_ancilla? as usize,
        steps: steps? as usize,
        layers,
        ensembles,
        shots,
        schedule,
        optimizer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_HDT: &str = r#"{
        "experiment": "hdt",
        "master_seed": 1,
        "protocol": {"n_data": 2, "n_ancilla": 2, "steps": 8, "unitary": {"kind": "haar"},
                     "mode": "mc", "shots": 50000, "realizations": 20},
        "metrics": {"frame_potential": [1]}
    }"#;

    #[test]
    fn minimal_hdt_parses() {
        let cfg = parse_config(MINIMAL_HDT).unwrap();
        assert_eq!(cfg.kind, Kind::Hdt);
        assert_eq!(cfg.id, "hdt");
        let p = cfg.protocol.as_ref().unwrap();
        assert_eq!((p.n_data, p.n_ancilla, p.steps), (2, Some(2), 8));
        assert_eq!(p.mode, SamplingMode::MonteCarlo { shots: 50_000 });
        assert_eq!(cfg.numerics, Numerics::default());
        assert_eq!(cfg.ancillas(), vec![2]);
    }

    #[test]
    fn missing_key_is_named() {
        let text = MINIMAL_HDT.replace(r#""n_data": 2, "#, "");
        let err = parse_config(&text).unwrap_err();
        assert!(
            err.0.iter().any(|e| e.starts_with("protocol.n_data")),
            "{err}"
        );
    }

    #[test]
    fn zero_steps_is_a_range_error() {
        let text = MINIMAL_HDT.replace(r#""steps": 8"#, r#""steps": 0"#);
        let err = parse_config(&text).unwrap_err();
        assert!(
            err.0
                .iter()
                .any(|e| e.contains("protocol.steps") && e.contains(">= 1")),
            "{err}"
        );
    }

    #[test]
    fn all_errors_are_collected() {
        let text = r#"{"experiment": "hdt", "master_seed": -1, "bogus": 1,
            "protocol": {"n_data": "two", "n_ancilla": 2, "steps": 0, "unitary": {"kind": "magic"},
                         "mode": "exact", "shots": 5, "realizations": 1},
            "metrics": {"frame_potential": [0, 2]}}"#;
        let err = parse_config(text).unwrap_err();
        for key in [
            "master_seed",
            "bogus",
            "protocol.n_data",
            "protocol.steps",
            "protocol.unitary.kind",
            "protocol.shots",
            "metrics.frame_potential[0]",
        ] {
            assert!(
                err.0.iter().any(|e| e.starts_with(key)),
                "missing {key} in {err}"
            );
        }
    }

    #[test]
    fn sections_of_other_experiments_are_rejected() {
        let text = MINIMAL_HDT.replacen('{', r#"{"qsize": {}, "#, 1);
        let err = parse_config(&text).unwrap_err();
        assert!(err.0.iter().any(|e| e.starts_with("qsize")));
    }

    #[test]
    fn sweep_and_fixed_ancilla_conflict() {
        let text = r#"{"experiment": "tradeoff", "master_seed": 1,
            "protocol": {"n_data": 2, "n_ancilla": 1, "steps": 4, "unitary": {"kind": "haar"}, "mode": "exact", "realizations": 1},
            "sweep": {"n_ancilla": [1, 2]},
            "metrics": {"frame_potential": [1]}}"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.0.iter().any(|e| e.starts_with("protocol.n_ancilla")));
        let ok = text.replace(r#""n_ancilla": 1, "#, "");
        assert_eq!(parse_config(&ok).unwrap().ancillas(), vec![1, 2]);
    }

    #[test]
    fn syntax_errors_are_reported() {
        assert!(parse_config("{").unwrap_err().0[0].starts_with("syntax"));
    }
}
