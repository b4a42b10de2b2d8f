//! Batch driver: configuration, suite execution and report rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chart::{ChartId, HopfData};
use crate::error::{Error, Result};
use crate::hopf::{deck_on_cylinder, DeckGroupElement, HopfStructure};
use crate::jet::MAX_DIM;
use crate::sampling::{Sampler, DEFAULT_T_RANGE};
use crate::verify::*;

pub const SUITES: [&str; 7] = [
    "lck",
    "parallel_lee",
    "contact",
    "biholomorphism",
    "group_actions",
    "lcr",
    "theorem_a",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "text" => Ok(OutputFormat::Text),
            _ => Err(Error::InvalidConfig(format!("unknown format {s:?} (expected json or text)"))),
        }
    }
}

/// A run description. Empty `a` and `c` mean all ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub a: Vec<f64>,
    pub s: f64,
    /// Accepts `[re, im]` pairs, plain numbers or strings like `"0.6+0.8i"`.
    #[serde(deserialize_with = "complex_entries")]
    pub c: Vec<Complex64>,
    pub seed: u64,
    pub points: usize,
    pub t_range: f64,
    pub suites: Vec<String>,
    pub tol_overrides: BTreeMap<String, f64>,
    pub output_format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 2,
            a: Vec::new(),
            s: std::f64::consts::LN_2,
            c: Vec::new(),
            seed: 0,
            points: 100,
            t_range: DEFAULT_T_RANGE,
            suites: vec!["all".into()],
            tol_overrides: BTreeMap::new(),
            output_format: OutputFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    /// Fills defaulted fields and checks every invariant.
    pub fn resolved(&self) -> Result<(RunConfig, HopfData)> {
        let mut cfg = self.clone();
        if cfg.a.is_empty() {
            cfg.a = vec![1.0; cfg.n];
        }
        if cfg.c.is_empty() {
            cfg.c = vec![Complex64::new(1.0, 0.0); cfg.n];
        }
        if cfg.a.len() != cfg.n {
            return Err(Error::InvalidConfig(format!(
                "a has {} entries but n = {}",
                cfg.a.len(),
                cfg.n
            )));
        }
        if 2 * cfg.n + 1 > MAX_DIM {
            return Err(Error::InvalidConfig(format!(
                "n = {} exceeds the supported maximum {}",
                cfg.n,
                (MAX_DIM - 1) / 2
            )));
        }
        if cfg.points == 0 {
            return Err(Error::InvalidConfig("points must be positive".into()));
        }
        if !(cfg.t_range > 0.0 && cfg.t_range.is_finite()) {
            return Err(Error::InvalidConfig("t_range must be positive and finite".into()));
        }
        if cfg.suites.is_empty() {
            return Err(Error::InvalidConfig("no suites selected".into()));
        }
        for s in &cfg.suites {
            if s != "all" && !SUITES.contains(&s.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "unknown suite {s:?}; expected one of {}, all",
                    SUITES.join(", ")
                )));
            }
        }
        for (k, v) in &cfg.tol_overrides {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("tolerance override {k} is not finite")));
            }
        }
        let data = HopfData::new(cfg.a.clone(), cfg.s, cfg.c.clone()).map_err(|e| match e {
            Error::InvalidConfig(m) => Error::InvalidConfig(m),
            other => Error::InvalidConfig(other.to_string()),
        })?;
        Ok((cfg, data))
    }

    /// Selected suites in canonical order.
    pub fn selected_suites(&self) -> Vec<&'static str> {
        let all = self.suites.iter().any(|s| s == "all");
        SUITES
            .iter()
            .copied()
            .filter(|s| all || self.suites.iter().any(|x| x == s))
            .collect()
    }
}

/// Parses a comma-separated list of complex numbers such as
/// `1,0.6+0.8i,-i,1e-1-2i`.
pub fn parse_complex_list(text: &str) -> Result<Vec<Complex64>> {
    text.split(',').map(|s| parse_complex(s.trim())).collect()
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::InvalidConfig(format!("cannot parse complex number {s:?}"));
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s.parse::<f64>().map(|r| Complex64::new(r, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not an exponent sign or leading
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let coef = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => Ok(Complex64::new(
            body[..k].parse::<f64>().map_err(|_| bad())?,
            coef(&body[k..])?,
        )),
        None => Ok(Complex64::new(0.0, coef(body)?)),
    }
}

fn complex_entries<'de, D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Vec<Complex64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Real(f64),
        Pair([f64; 2]),
        Text(String),
    }
    Vec::<Entry>::deserialize(de)?
        .into_iter()
        .map(|e| match e {
            Entry::Real(r) => Ok(Complex64::new(r, 0.0)),
            Entry::Pair([r, i]) => Ok(Complex64::new(r, i)),
            Entry::Text(t) => parse_complex(&t).map_err(serde::de::Error::custom),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<CheckResult>,
    pub elapsed_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    #[serde(flatten)]
    pub config: RunConfig,
    pub lambda: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub suites: Vec<SuiteReport>,
    pub overall_pass: bool,
    pub elapsed_ms: Option<f64>,
}

impl RunReport {
    pub fn checks(&self) -> impl Iterator<Item = &CheckResult> {
        self.suites.iter().flat_map(|s| s.checks.iter())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(
            out,
            "n = {}  a = {:?}  s = {}  seed = {}  points = {}",
            c.config.n, c.config.a, c.config.s, c.config.seed, c.config.points
        );
        for s in &self.suites {
            let _ = writeln!(out, "[{}]", s.name);
            for ch in &s.checks {
                let _ = writeln!(
                    out,
                    "  {:<34} {:>13.4e}  tol {:>9.1e}  {}",
                    ch.name,
                    ch.max_residual,
                    ch.tolerance,
                    if ch.pass { "PASS" } else { "FAIL" }
                );
            }
        }
        let _ = writeln!(out, "overall: {}", if self.overall_pass { "PASS" } else { "FAIL" });
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json() + "\n",
            OutputFormat::Text => self.to_text(),
        }
    }

    /// Process exit status: 0 when every check passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.overall_pass {
            0
        } else {
            1
        }
    }
}

/// Options that affect execution but not results.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub threads: usize,
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            threads: 1,
            timing: false,
        }
    }
}

/// Validates `config`, builds the structure and runs the selected suites.
pub fn run(config: &RunConfig, options: RunOptions) -> Result<RunReport> {
    let (cfg, data) = config.resolved()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| run_resolved(cfg, data, options))
}

fn run_resolved(cfg: RunConfig, data: HopfData, options: RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let hopf = HopfStructure::new(&data);
    let mut suites = Vec::new();
    for (k, name) in cfg.selected_suites().into_iter().enumerate() {
        let t0 = Instant::now();
        // each suite draws from its own stream so selection does not shift samples
        let seed = cfg.seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(k as u64 + 1));
        let mut checks = run_suite(name, &hopf, &cfg, seed);
        for ch in &mut checks {
            if let Some(t) = cfg.tol_overrides.get(&ch.name) {
                ch.tolerance = *t;
                ch.pass = ch.recomputed_pass();
            }
        }
        suites.push(SuiteReport {
            name: name.to_string(),
            checks,
            elapsed_ms: options.timing.then(|| t0.elapsed().as_secs_f64() * 1e3),
        });
    }
    let overall_pass = suites.iter().all(|s| s.checks.iter().all(|c| c.pass));
    Ok(RunReport {
        config: ConfigEcho {
            lambda: data.lambda.clone(),
            config: cfg,
        },
        suites,
        overall_pass,
        elapsed_ms: options.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

/// Runs one named suite.
pub fn run_suite(name: &str, hopf: &HopfStructure, cfg: &RunConfig, seed: u64) -> Vec<CheckResult> {
    let mut sampler = Sampler::new(hopf.chart, seed).with_t_range(cfg.t_range);
    let pts = sampler.points(cfg.points);
    let h = hopf.hermitian();
    match name {
        "lck" => check_lck(&h, &pts),
        "parallel_lee" => {
            let mut out = check_parallel_lee(&h, &pts);
            out.extend(check_lee_symmetries(&h, &hopf.theta, &pts));
            out
        }
        "contact" => check_contact_pseudohermitian(&hopf.eta_a, &hopf.j_a, &hopf.a_field, &hopf.chart, &pts),
        "biholomorphism" => {
            let vectors: Vec<Vec<Vec<f64>>> = pts
                .iter()
                .map(|p| (0..10).map(|_| sampler.tangent(p)).collect())
                .collect();
            let pairs: Vec<(Vec<f64>, Vec<f64>)> = pts
                .iter()
                .map(|p| (sampler.tangent(p), sampler.tangent(p)))
                .collect();
            let square = worst(pts.iter().zip(&vectors).flat_map(|(p, vs)| {
                vs.iter()
                    .map(|v| {
                        let jj = hopf.j_a.apply_at(p, &hopf.j_a.apply_at(p, v));
                        worst(jj.iter().zip(v).map(|(a, b)| (a + b).abs()))
                    })
                    .collect::<Vec<_>>()
            }));
            vec![
                check_biholomorphism(hopf, &pts, &vectors),
                check_integrability(&h, &pts, &pairs),
                CheckResult::new("complex_structure_square", square, 1e-10, pts.len() * 10),
            ]
        }
        "group_actions" => group_action_suite(hopf, &pts, &mut sampler),
        "lcr" => lcr_suite(hopf, &pts, &mut sampler),
        "theorem_a" => check_theorem_a(hopf, &pts, 3.7),
        _ => unreachable!("suite names are validated"),
    }
}

fn group_action_suite(hopf: &HopfStructure, pts: &[Vec<f64>], sampler: &mut Sampler) -> Vec<CheckResult> {
    let data = &hopf.data;
    let cyl = ChartId::Cylinder;
    let mut out = Vec::new();
    for s in [-1.0, 0.3, 2.0] {
        let f = DeckGroupElement::Flow(s).as_map(data, cyl).expect("cylinder");
        out.push(check_homothety(&format!("flow_homothety_{s}"), &f, &hopf.omega_a, s.exp(), &hopf.chart, pts));
    }
    let angle = sampler.uniform(-std::f64::consts::PI, std::f64::consts::PI);
    let torus = DeckGroupElement::Torus(angle).as_map(data, cyl).expect("cylinder");
    out.push(check_homothety("torus_invariance_omega", &torus, &hopf.omega_a, 1.0, &hopf.chart, pts));
    out.push(check_form_invariance("torus_invariance_eta", &torus, &hopf.eta_a, pts));
    let pairs: Vec<_> = (0..10)
        .map(|_| {
            let (s, r) = (sampler.uniform(-1.5, 1.5), sampler.uniform(-1.5, 1.5));
            (
                DeckGroupElement::Flow(s).as_map(data, cyl).expect("cylinder"),
                DeckGroupElement::Flow(r).as_map(data, cyl).expect("cylinder"),
            )
        })
        .collect();
    let few = &pts[..pts.len().min(10)];
    out.push(check_multiplicativity(&pairs, &hopf.omega_a, &hopf.chart, few));
    let deck = deck_on_cylinder(data, 1);
    out.push(check_homothety("deck_homothety", &deck, &hopf.omega_a, (-data.s).exp(), &hopf.chart, pts));
    let h = hopf.hermitian();
    let mut tagged = |prefix: &str, v: Vec<CheckResult>| {
        for mut c in v {
            c.name = format!("{prefix}_{}", c.name);
            out.push(c);
        }
    };
    tagged("torus", check_holomorphic_isometry(&torus, &h, pts));
    let flow = DeckGroupElement::Flow(0.3).as_map(data, cyl).expect("cylinder");
    tagged("flow", check_holomorphic_isometry(&flow, &h, pts));
    tagged("deck", check_holomorphic_isometry(&deck, &h, pts));
    let cn_points = Sampler::new(data.punctured(), sampler.uniform(0.0, 1.0).to_bits()).points(pts.len());
    out.push(check_deck_freeness(data, &cn_points));
    let s = sampler.uniform(-1.0, 1.0);
    out.push(check_conjugation(hopf, s, angle, pts));
    out
}

fn lcr_suite(hopf: &HopfStructure, pts: &[Vec<f64>], sampler: &mut Sampler) -> Vec<CheckResult> {
    let h = hopf.hermitian();
    let few = &pts[..pts.len().min(10)];
    let mut decs = Vec::new();
    let mut out: Vec<CheckResult> = Vec::new();
    let mut first = None;
    for _ in 0..20 {
        let angle = sampler.uniform(-std::f64::consts::PI, std::f64::consts::PI);
        let f = DeckGroupElement::Torus(angle)
            .as_map(&hopf.data, ChartId::Cylinder)
            .expect("cylinder");
        let (d, checks) = analyze_lcr(&f, &h, &hopf.theta, few);
        decs.extend(d);
        merge_worst(&mut out, checks);
        first.get_or_insert(f);
    }
    let n = decs.len();
    out.push(CheckResult::new("lcr_lambda_one", worst(decs.iter().map(|d| (d.lambda - 1.0).abs())), 1e-8, n));
    out.push(CheckResult::new("lcr_v_zero", worst(decs.iter().map(|d| d.v.norm())), 1e-8, n));
    out.push(check_perp_preservation(first.as_ref().expect("20 maps"), &h, &hopf.theta, few));
    out.push(check_plant_and_recover(&h, &hopf.theta, few, sampler));
    out
}

/// Combines repeated checks of the same names by worst residual.
fn merge_worst(acc: &mut Vec<CheckResult>, new: Vec<CheckResult>) {
    for c in new {
        match acc.iter_mut().find(|a| a.name == c.name) {
            Some(a) => {
                a.points_tested += c.points_tested;
                // residuals may be negative for lower-bound checks
                a.max_residual = if a.max_residual.is_nan() || c.max_residual.is_nan() {
                    f64::NAN
                } else {
                    a.max_residual.max(c.max_residual)
                };
                a.pass = a.recomputed_pass();
                if a.notes.is_empty() {
                    a.notes = c.notes;
                }
            }
            None => acc.push(c),
        }
    }
}
