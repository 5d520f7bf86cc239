//! Experiment configuration, dispatch and export.

use crate::adversary::{adversary_experiment, collapse_check, construct_sequence, Relaxation};
use crate::arith::{build_prime_sets_rational, prime_reciprocal_sum, sieve_primes};
use crate::error::{Error, Result};
use crate::harmonic::Schedule;
use crate::kubilius::{
    binomial_moments, char_compare, esseen_bound, gaussian_proximity_ratio, recentring_distance, sample_model,
    standardized_char_values, symmetric_grid, tail_violations, BinomialMode, KubiliusModel, GAUSSIAN_DENSITY_SUP,
};
use crate::qlinalg::{bad_prime_set, find_near_relations, gamma_vector, DEFAULT_RELATION_BUDGET};
use crate::reals::{parse, BeattySpec};
use crate::stats::{
    cdf_curve, coprimality_rate, dk_of_values, empirical_dk, gaussian_mixed_moment, mixed_moment_empirical,
    multivariate_dk, omega_columns, standardization, truncated_omega_columns, MomentIndex, StandardizedSample,
    DEFAULT_MOMENT_CAP,
};
use crate::util::{rat_string, rat_to_f64};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    EkSingle,
    EkJoint,
    Moments,
    Quantitative,
    Kubilius,
    Adversary,
    Relations,
    Coprimality,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::EkSingle,
        ExperimentKind::EkJoint,
        ExperimentKind::Moments,
        ExperimentKind::Quantitative,
        ExperimentKind::Kubilius,
        ExperimentKind::Adversary,
        ExperimentKind::Relations,
        ExperimentKind::Coprimality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::EkSingle => "ek_single",
            ExperimentKind::EkJoint => "ek_joint",
            ExperimentKind::Moments => "moments",
            ExperimentKind::Quantitative => "quantitative",
            ExperimentKind::Kubilius => "kubilius",
            ExperimentKind::Adversary => "adversary",
            ExperimentKind::Relations => "relations",
            ExperimentKind::Coprimality => "coprimality",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::parse(s, "unknown experiment"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::parse(s, "format must be csv or json")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Overrides {
    pub r: Option<u64>,
    pub j: Option<u64>,
    pub l: Option<u32>,
    pub eps: Option<f64>,
    pub t: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(rename = "N")]
    pub n: u64,
    pub alphas: Vec<String>,
    /// One per alpha; missing entries default to 0.
    #[serde(default)]
    pub betas: Vec<String>,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub cache: Option<PathBuf>,
    /// Moment order cap for `moments`.
    #[serde(default)]
    pub cap: Option<u32>,
    /// Model draws for `kubilius`.
    #[serde(default)]
    pub draws: Option<usize>,
    /// Polynomial degree for `adversary`.
    #[serde(default)]
    pub degree: Option<u32>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, n: u64) -> Self {
        Self {
            experiment,
            n,
            alphas: Vec::new(),
            betas: Vec::new(),
            overrides: Overrides::default(),
            seed: 0,
            out: None,
            format: Format::Csv,
            cache: None,
            cap: None,
            draws: None,
            degree: None,
        }
    }

    pub fn with_spec(mut self, alpha: &str, beta: &str) -> Self {
        self.alphas.push(alpha.to_string());
        self.betas.push(beta.to_string());
        self
    }

    pub fn specs(&self) -> Result<Vec<BeattySpec>> {
        if self.betas.len() > self.alphas.len() {
            return Err(Error::validation("more betas than alphas"));
        }
        self.alphas
            .iter()
            .enumerate()
            .map(|(i, a)| BeattySpec::parse(a, self.betas.get(i).map_or("0", String::as_str)))
            .collect()
    }

    pub fn schedule(&self) -> Result<Schedule> {
        let o = &self.overrides;
        Schedule::for_n(self.n)?.with_overrides(o.r, o.j, o.l, o.eps, o.t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 16 {
            return Err(Error::validation(format!("N = {} must be at least 16", self.n)));
        }
        self.schedule()?;
        let specs = self.specs()?;
        let need = match self.experiment {
            ExperimentKind::EkJoint => 2,
            ExperimentKind::Adversary | ExperimentKind::Kubilius => 0,
            _ => 1,
        };
        if specs.len() < need {
            return Err(Error::validation(format!(
                "{} needs at least {need} --alpha value(s)",
                self.experiment
            )));
        }
        if matches!(self.experiment, ExperimentKind::EkSingle | ExperimentKind::Quantitative | ExperimentKind::Coprimality)
            && specs.len() != 1
        {
            return Err(Error::validation(format!("{} takes exactly one --alpha", self.experiment)));
        }
        Ok(())
    }
}

/// A table cell: integers and reals keep their type, rationals and labels
/// travel as text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    pub fn real(x: f64) -> Cell {
        if x.is_finite() {
            Cell::Real(x)
        } else {
            Cell::Text(x.to_string())
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Real(x) => Some(*x),
            Cell::Text(t) => t.parse().ok(),
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_g12(*x),
            Cell::Text(t) => csv_escape(t),
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        i64::try_from(v).map_or_else(|_| Cell::Text(v.to_string()), Cell::Int)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::from(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::real(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&BigRational> for Cell {
    fn from(v: &BigRational) -> Self {
        Cell::Text(rat_string(v))
    }
}

impl From<&BigInt> for Cell {
    fn from(v: &BigInt) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.iter().map(|c| csv_escape(c)).collect::<Vec<_>>().join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }
}

macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$(Cell::from($x)),*] };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub tables: Vec<Table>,
    pub diagnostics: BTreeMap<String, Value>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ExperimentResult {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Shortest form of `x` with 12 significant digits, in the style of `%.12g`.
pub fn format_g12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp).max(0) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mant), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let start = Instant::now();
    let mut ctx = Ctx {
        config,
        tables: Vec::new(),
        diagnostics: BTreeMap::new(),
    };
    let schedule = config.schedule()?;
    ctx.diag("schedule", serde_json::to_value(schedule)?);
    match config.experiment {
        ExperimentKind::EkSingle => ek_single(&mut ctx)?,
        ExperimentKind::EkJoint => ek_joint(&mut ctx)?,
        ExperimentKind::Moments => moments(&mut ctx)?,
        ExperimentKind::Quantitative => quantitative(&mut ctx, &schedule)?,
        ExperimentKind::Kubilius => kubilius(&mut ctx, &schedule)?,
        ExperimentKind::Adversary => adversary(&mut ctx)?,
        ExperimentKind::Relations => relations(&mut ctx, &schedule)?,
        ExperimentKind::Coprimality => coprimality(&mut ctx)?,
    }
    Ok(ExperimentResult {
        config: config.clone(),
        tables: ctx.tables,
        diagnostics: ctx.diagnostics,
        wall_time: start.elapsed(),
    })
}

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    tables: Vec<Table>,
    diagnostics: BTreeMap<String, Value>,
}

impl Ctx<'_> {
    fn diag(&mut self, key: &str, v: Value) {
        self.diagnostics.insert(key.to_string(), v);
    }

    fn cache(&self) -> Option<&Path> {
        self.config.cache.as_deref()
    }
}

fn sample_table(columns: &[Vec<u32>], sample: &StandardizedSample) -> Table {
    let k = columns.len();
    let mut names = vec!["n".to_string()];
    for i in 1..=k {
        names.push(format!("omega_{i}"));
        names.push(format!("z_{i}"));
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut t = Table::new("sample", &refs);
    for r in 0..sample.len() {
        let mut row = row![(r + 1) as u64];
        for (c, col) in columns.iter().enumerate() {
            row.push(Cell::Int(col[r] as i64));
            row.push(Cell::real(sample.row(r)[c]));
        }
        t.push(row);
    }
    t
}

fn ek_single(ctx: &mut Ctx) -> Result<()> {
    let n = ctx.config.n;
    let specs = ctx.config.specs()?;
    let cols = omega_columns(&specs, n, ctx.cache())?;
    let (c, s) = standardization(n)?;
    let sample = StandardizedSample::from_counts(&cols, n, c, s)?;
    let dk = empirical_dk(&sample)?;
    let mean = sample.values().iter().sum::<f64>() / sample.len() as f64;
    let var = sample.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / sample.len() as f64;
    let mut summary = Table::new("summary", &["N", "alpha", "beta", "loglog", "d_K", "mean", "variance"]);
    summary.push(row![n, specs[0].alpha.to_string(), specs[0].beta.to_string(), c, dk, mean, var]);
    let mut cdf = Table::new("cdf", &["x", "empirical", "gaussian"]);
    for (x, f, g) in cdf_curve(&sample)? {
        cdf.push(row![x, f, g]);
    }
    ctx.tables.push(summary);
    ctx.tables.push(cdf);
    ctx.tables.push(sample_table(&cols, &sample));
    Ok(())
}

pub const JOINT_GRID: usize = 64;

fn ek_joint(ctx: &mut Ctx) -> Result<()> {
    let n = ctx.config.n;
    let specs = ctx.config.specs()?;
    let cols = omega_columns(&specs, n, ctx.cache())?;
    let (c, s) = standardization(n)?;
    let sample = StandardizedSample::from_counts(&cols, n, c, s)?;
    let mut summary = Table::new("summary", &["coordinate", "alpha", "beta", "d_K"]);
    for (i, spec) in specs.iter().enumerate() {
        let dk = dk_of_values(sample.coordinate(i))?;
        summary.push(row![(i + 1) as u64, spec.alpha.to_string(), spec.beta.to_string(), dk]);
    }
    let bounds = multivariate_dk(&sample, JOINT_GRID)?;
    let mut joint = Table::new("joint", &["N", "grid", "d_K_lower", "d_K_upper"]);
    joint.push(row![n, JOINT_GRID, bounds.lower, bounds.upper]);
    let mut mom = Table::new("second_moments", &["idx", "empirical", "gaussian"]);
    for idx in MomentIndex::all(specs.len(), 2).into_iter().filter(|i| i.order() == 2) {
        mom.push(row![
            idx.to_string(),
            mixed_moment_empirical(&sample, &idx)?,
            &gaussian_mixed_moment(&idx)
        ]);
    }
    ctx.tables.extend([summary, joint, mom, sample_table(&cols, &sample)]);
    Ok(())
}

fn moments(ctx: &mut Ctx) -> Result<()> {
    let cap = ctx.config.cap.unwrap_or(4);
    if cap > DEFAULT_MOMENT_CAP {
        return Err(Error::validation(format!("cap {cap} exceeds {DEFAULT_MOMENT_CAP}")));
    }
    let n = ctx.config.n;
    let specs = ctx.config.specs()?;
    let cols = omega_columns(&specs, n, ctx.cache())?;
    let (c, s) = standardization(n)?;
    let sample = StandardizedSample::from_counts(&cols, n, c, s)?;
    let mut t = Table::new("moments", &["idx", "order", "empirical", "C_idx"]);
    for idx in MomentIndex::all(specs.len(), cap) {
        let emp = mixed_moment_empirical(&sample, &idx)?;
        t.push(row![idx.to_string(), idx.order() as u64, emp, &gaussian_mixed_moment(&idx)]);
    }
    ctx.diag("cap", json!(cap));
    ctx.tables.push(t);
    Ok(())
}

/// Model primes: everything up to the schedule's prime cutoff R.
fn model_primes(schedule: &Schedule) -> Result<Vec<u64>> {
    sieve_primes(schedule.r)
}

pub const ESSEEN_GRID_POINTS: usize = 1025;

fn quantitative(ctx: &mut Ctx, top: &Schedule) -> Result<()> {
    let specs = ctx.config.specs()?;
    let mut ladder: Vec<u64> = (0..4).map(|k| top.n / 10u64.pow(k)).filter(|&m| m >= 16).collect();
    ladder.reverse();
    let mut t = Table::new(
        "ladder",
        &["N", "d_K", "d_K_truncated", "R", "J", "s", "loglog", "esseen_bound", "recentring"],
    );
    let mut prox = Vec::new();
    for &m in &ladder {
        let o = &ctx.config.overrides;
        let sched = Schedule::for_n(m)?.with_overrides(o.r.map(|r| r.min(m)), o.j, o.l, o.eps, o.t)?;
        let cols = omega_columns(&specs, m, ctx.cache())?;
        let (c, s) = standardization(m)?;
        let dk = empirical_dk(&StandardizedSample::from_counts(&cols, m, c, s)?)?;
        let primes = model_primes(&sched)?;
        let trunc = truncated_omega_columns(&specs, m, &primes)?;
        let dk_trunc = empirical_dk(&StandardizedSample::from_counts(&trunc, m, c, s)?)?;
        let model = KubiliusModel::new(primes, ctx.config.seed)?;
        let a = model.s.sqrt() / 3.0;
        let grid = symmetric_grid(a, ESSEEN_GRID_POINTS);
        let bound = esseen_bound(&standardized_char_values(&model, &grid), a, GAUSSIAN_DENSITY_SUP)?;
        // ω″ is centred at s with scale √s; the law is measured at LL
        let recentre = recentring_distance((model.s - c) / s, model.s.sqrt() / s)?;
        prox.push(json!({"N": m, "K": gaussian_proximity_ratio(&model, 257)}));
        t.push(row![m, dk, dk_trunc, sched.r, sched.j, model.s, c, bound, recentre]);
    }
    ctx.diag("gaussian_proximity_ratio", Value::Array(prox));
    ctx.tables.push(t);
    Ok(())
}

pub const DEFAULT_DRAWS: usize = 100_000;
pub const CHAR_GRID_POINTS: usize = 201;

fn kubilius(ctx: &mut Ctx, sched: &Schedule) -> Result<()> {
    let draws = ctx.config.draws.unwrap_or(DEFAULT_DRAWS);
    let model = KubiliusModel::new(model_primes(sched)?, ctx.config.seed)?;
    let values = sample_model(&model, draws)?;
    let grid = symmetric_grid(0.5, CHAR_GRID_POINTS);
    let rows = char_compare(&model, &values, &grid)?;
    let mut ct = Table::new("char", &["t", "exact_re", "exact_im", "empirical_re", "empirical_im", "diff"]);
    for r in &rows {
        ct.push(row![r.t, r.exact_re, r.exact_im, r.empirical_re, r.empirical_im, r.diff]);
    }
    let mut bt = Table::new("binomial", &["l", "model_exact", "model_exact_f64", "sample"]);
    for l in 0..=6 {
        let exact = binomial_moments(&model, l, BinomialMode::ModelExact)?;
        let sample = binomial_moments(&model, l, BinomialMode::Sample(&values))?.to_f64();
        let q = match &exact {
            crate::kubilius::BinomialMoment::Exact(q) => rat_string(q),
            crate::kubilius::BinomialMoment::Real(x) => format_g12(*x),
        };
        bt.push(row![l as u64, q, exact.to_f64(), sample]);
    }
    let rs = model.s.sqrt();
    let std: Vec<f64> = values.iter().map(|&v| (v as f64 - model.s) / rs).collect();
    let dk = dk_of_values(std)?;
    let a = rs / 3.0;
    let eg = symmetric_grid(a, ESSEEN_GRID_POINTS);
    let bound = esseen_bound(&standardized_char_values(&model, &eg), a, GAUSSIAN_DENSITY_SUP)?;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / draws as f64;
    let mut st = Table::new(
        "summary",
        &["primes", "R", "s", "draws", "mean", "d_K", "esseen_bound", "sup_diff", "tail_violations"],
    );
    let sup = rows.iter().map(|r| r.diff).fold(0.0, f64::max);
    st.push(row![
        model.primes().len(),
        sched.r,
        model.s,
        draws,
        mean,
        dk,
        bound,
        sup,
        tail_violations(&model, 1001).len()
    ]);
    ctx.tables.extend([st, ct, bt]);
    ctx.diag("gaussian_proximity_ratio", json!(gaussian_proximity_ratio(&model, 257)));
    ctx.diag("sampling_tolerance", json!(4.0 / (draws as f64).sqrt()));

    // ω″ over the first Beatty sequence against the same model
    if let Some(spec) = ctx.config.specs()?.first() {
        let trunc = truncated_omega_columns(std::slice::from_ref(spec), ctx.config.n, model.primes())?;
        let grid = symmetric_grid(0.01, 21);
        let rows = char_compare(&model, &trunc[0], &grid)?;
        let mut t = Table::new("char_truncated", &["t", "exact_re", "exact_im", "empirical_re", "empirical_im", "diff"]);
        for r in &rows {
            t.push(row![r.t, r.exact_re, r.exact_im, r.empirical_re, r.empirical_im, r.diff]);
        }
        ctx.tables.push(t);
    }
    Ok(())
}

fn adversary(ctx: &mut Ctx) -> Result<()> {
    let d = ctx.config.degree.unwrap_or(2);
    let schedule = construct_sequence(d, 2, Relaxation::default())?;
    let mut lt = Table::new("levels", &["m", "a", "b", "N", "alpha"]);
    for (i, l) in schedule.levels.iter().enumerate() {
        lt.push(row![(i + 1) as u64, &l.a, &l.b, l.n, &l.alpha]);
    }
    let c = collapse_check(&schedule, 1)?;
    let mut ct = Table::new("collapse", &["m", "checked", "floor_identity", "divisibility", "superadditive", "coprime"]);
    ct.push(row![
        c.m as u64,
        c.checked,
        c.floor_identity.to_string(),
        c.divisibility.to_string(),
        c.superadditive.to_string(),
        c.coprime.to_string()
    ]);
    let r = adversary_experiment(&schedule, 1)?;
    let mut et = Table::new(
        "experiment",
        &["m", "N", "loglog", "mass_shift", "gaussian_tail", "bound", "empirical_dK", "above", "above_multiples", "multiples"],
    );
    et.push(row![
        r.m as u64,
        r.n,
        r.loglog,
        r.mass_shift,
        r.gaussian_tail,
        r.bound,
        r.empirical_dk,
        r.above_threshold,
        r.above_threshold_multiples,
        r.multiples
    ]);
    ctx.diag("schedule_adversary", serde_json::to_value(&schedule)?);
    ctx.tables.extend([lt, ct, et]);
    Ok(())
}

/// Tolerance 1/⌈N^{1/4}⌉ for near relations.
pub fn relation_tolerance(n: u64) -> BigRational {
    let q = (n as f64).powf(0.25).ceil() as u64;
    BigRational::new(BigInt::from(1), BigInt::from(q.max(1)))
}

fn relations(ctx: &mut Ctx, sched: &Schedule) -> Result<()> {
    let alphas = ctx
        .config
        .alphas
        .iter()
        .map(|a| parse(a))
        .collect::<Result<Vec<_>>>()?;
    let tol = relation_tolerance(ctx.config.n);
    let set = find_near_relations(&alphas, sched.j, &tol, &[1], DEFAULT_RELATION_BUDGET)?;
    let k = alphas.len();
    let mut names: Vec<String> = (1..=k).map(|i| format!("m_{i}")).collect();
    names.push("m".into());
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut rt = Table::new("relations", &refs);
    for rel in &set.tuples {
        let mut row: Vec<Cell> = rel.coeffs.iter().map(Cell::from).collect();
        row.push(Cell::from(&rel.constant));
        rt.push(row);
    }
    ctx.diag("tolerance", json!(rat_string(&tol)));
    ctx.diag("height_bound", json!(sched.j));
    ctx.tables.push(rt);
    let gamma = match gamma_vector(&set, &alphas, sched.j) {
        Ok(g) => g,
        // inconsistent relations leave no γ; the relation table still stands
        Err(e @ Error::DegenerateRelations(_)) => {
            ctx.diag("gamma", json!(e.to_string()));
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    let mut gt = Table::new("gamma", &["i", "alpha", "gamma", "gamma_f64", "difference"]);
    for (i, (g, a)) in gamma.gammas.iter().zip(&alphas).enumerate() {
        let gf = rat_to_f64(g);
        gt.push(row![(i + 1) as u64, a.to_string(), g, gf, (gf - a.to_f64()).abs()]);
    }
    let bad = bad_prime_set(&gamma, ctx.config.n as f64)?;
    let sets = build_prime_sets_rational(ctx.config.n as f64, sched.r, &gamma.gammas)?;
    let mut bt = Table::new("bad_primes", &["p"]);
    for p in &bad {
        bt.push(row![*p]);
    }
    ctx.diag("good_primes", json!(sets.good.len()));
    ctx.diag("good_reciprocal_sum", json!(prime_reciprocal_sum(&sets.good).unwrap_or(0.0)));
    ctx.tables.extend([gt, bt]);
    Ok(())
}

fn coprimality(ctx: &mut Ctx) -> Result<()> {
    let alpha = parse(&ctx.config.alphas[0])?;
    let r = coprimality_rate(&alpha, ctx.config.n)?;
    let watson = 6.0 / std::f64::consts::PI.powi(2);
    let mut t = Table::new(
        "summary",
        &["N", "alpha", "rate", "coprime", "counted", "excluded_zero", "six_over_pi_squared", "deviation"],
    );
    t.push(row![
        ctx.config.n,
        alpha.to_string(),
        r.rate,
        r.coprime,
        r.counted,
        r.excluded_zero,
        watson,
        (r.rate - watson).abs()
    ]);
    ctx.tables.push(t);
    Ok(())
}

/// Files written for `result` under the configured output path.
pub fn export_results(result: &ExperimentResult, out: &Path, format: Format) -> Result<Vec<PathBuf>> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    match format {
        Format::Json => {
            let text = serde_json::to_string_pretty(result)?;
            std::fs::write(out, text + "\n").map_err(|e| Error::io(out, e))?;
            Ok(vec![out.to_path_buf()])
        }
        Format::Csv => {
            let stem = out.with_extension("");
            let mut written = Vec::new();
            let mut diag = Table::new("diagnostics", &["key", "value"]);
            for (k, v) in &result.diagnostics {
                diag.push(row![k.as_str(), v.to_string()]);
            }
            for t in result.tables.iter().chain(std::iter::once(&diag)) {
                let path = PathBuf::from(format!("{}_{}.csv", stem.display(), t.name));
                std::fs::write(&path, t.to_csv()).map_err(|e| Error::io(&path, e))?;
                written.push(path);
            }
            Ok(written)
        }
    }
}

/// Read back a JSON export.
pub fn import_json(path: &Path) -> Result<ExperimentResult> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
