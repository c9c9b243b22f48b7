//! Configuration merging and report rendering behind the `loopfock` binary.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use loopfock::dvr::{lattice_quotient_from, smith_decompose};
use loopfock::functionals::WeightEntry;
use loopfock::matrix::val_det;
use loopfock::suites::{q_display, Case, ModelChoice, Report, Status, Suite, SuiteParams};
use loopfock::tables::{CocycleEntry, LevelEntry};
use loopfock::LoopMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input; nothing was run.
    Config(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

fn config_err(e: impl fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

fn parse_model(s: &str) -> Result<ModelChoice, String> {
    match s {
        "vector" => Ok(ModelChoice::Vector),
        "matrix" => Ok(ModelChoice::Matrix),
        _ => Err(format!("unknown model '{s}' (expected vector or matrix)")),
    }
}

/// Settings shared by the config file and the command line; flags win.
#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Suites to run (repeatable or comma separated; "all" selects every suite).
    #[arg(long = "suite", value_delimiter = ',')]
    #[serde(rename = "suites")]
    pub suite: Option<Vec<String>>,
    /// Rank of the loop group.
    #[arg(long)]
    pub n: Option<u32>,
    /// vector (level 1) or matrix (two commuting copies).
    #[arg(long, value_parser = parse_model)]
    pub model: Option<ModelChoice>,
    /// Ambient truncation depth D.
    #[arg(long)]
    pub depth: Option<u32>,
    /// Target exactness window W.
    #[arg(long)]
    pub window: Option<u32>,
    /// Eigenvalue of the t-action for numeric suites.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Quadrature nodes per axis.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Quadrature half width, in Gaussian widths.
    #[arg(long = "half-width")]
    pub half_width: Option<f64>,
    /// Probe points per numeric comparison.
    #[arg(long)]
    pub probes: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Settings {
    /// Read a JSON config file; unknown keys and bad values are reported with line and column.
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// `self` with every field set in `over` replaced.
    pub fn overridden_by(self, over: Settings) -> Settings {
        Settings {
            suite: over.suite.or(self.suite),
            n: over.n.or(self.n),
            model: over.model.or(self.model),
            depth: over.depth.or(self.depth),
            window: over.window.or(self.window),
            lambda: over.lambda.or(self.lambda),
            nodes: over.nodes.or(self.nodes),
            half_width: over.half_width.or(self.half_width),
            probes: over.probes.or(self.probes),
            seed: over.seed.or(self.seed),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
        }
    }

    pub fn params(&self) -> CliResult<SuiteParams> {
        let d = SuiteParams::default();
        let p = SuiteParams {
            n: self.n.unwrap_or(d.n),
            model: self.model.unwrap_or(d.model),
            depth: self.depth.unwrap_or(d.depth),
            window: self.window.unwrap_or(d.window),
            lambda: self.lambda.unwrap_or(d.lambda),
            nodes: self.nodes.unwrap_or(d.nodes),
            half_width: self.half_width.unwrap_or(d.half_width),
            probes: self.probes.unwrap_or(d.probes),
            seed: self.seed.unwrap_or(d.seed),
        };
        p.validate().map_err(config_err)?;
        Ok(p)
    }

    /// Selected suites in canonical order, without duplicates.
    pub fn suites(&self) -> CliResult<Vec<Suite>> {
        let names = self.suite.as_deref().unwrap_or_default();
        let mut out = Vec::new();
        for name in names.iter().map(|s| s.trim()) {
            if name == "all" {
                out.extend(Suite::ALL);
            } else {
                out.push(name.parse::<Suite>().map_err(config_err)?);
            }
        }
        if out.is_empty() {
            return Err(CliError::Config("field 'suites': no suite selected".into()));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

pub fn render_report(report: &Report, format: Format) -> CliResult<String> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => report_csv(&report.cases),
        Format::Text => Ok(report_text(report)),
    }
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Skip => "skip",
    }
}

fn residual_cell(c: &Case) -> String {
    match c.residual {
        None => String::new(),
        Some(r) if c.exact => format!("{r}"),
        Some(r) => format!("{r:e}"),
    }
}

pub const CSV_HEADER: [&str; 8] = ["suite", "id", "exact", "status", "residual", "tolerance", "note", "params"];

fn report_csv(cases: &[Case]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for c in cases {
        w.write_record([
            c.suite.name().to_string(),
            c.id.clone(),
            c.exact.to_string(),
            status_name(c.status).to_string(),
            residual_cell(c),
            format!("{:e}", c.tolerance),
            c.note.clone(),
            c.params.to_string(),
        ])
        .map_err(io)?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// Left-aligned plain text columns.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let parts: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut s = line(header.to_vec());
    for r in rows {
        s += &line(r.iter().map(String::as_str).collect());
    }
    s
}

fn report_text(r: &Report) -> String {
    let p = &r.params;
    let mut s = String::new();
    let model = match p.model {
        ModelChoice::Vector => "vector",
        ModelChoice::Matrix => "matrix",
    };
    let _ = writeln!(
        s,
        "loopfock {}  n={} model={model} D={} W={} lambda={} nodes={} L={} probes={} seed={}\n",
        r.version, p.n, p.depth, p.window, p.lambda, p.nodes, p.half_width, p.probes, p.seed
    );
    let mut rows = Vec::new();
    for &suite in &r.suites {
        let cases: Vec<&Case> = r.cases.iter().filter(|c| c.suite == suite).collect();
        let count = |st: Status| cases.iter().filter(|c| c.status == st).count().to_string();
        let worst_exact = cases.iter().filter(|c| c.exact).filter_map(|c| c.residual).fold(None, |a: Option<f64>, x| Some(a.map_or(x, |a| a.max(x))));
        let worst_num = cases.iter().filter(|c| !c.exact).filter_map(|c| c.residual).fold(None, |a: Option<f64>, x| Some(a.map_or(x, |a| a.max(x))));
        rows.push(vec![
            suite.name().to_string(),
            cases.len().to_string(),
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Skip),
            worst_exact.map_or("-".into(), |x| format!("{x}")),
            worst_num.map_or("-".into(), |x| format!("{x:.1e}")),
        ]);
    }
    let sm = &r.summary;
    rows.push(vec![
        "total".into(),
        sm.total.to_string(),
        sm.passed.to_string(),
        sm.failed.to_string(),
        sm.skipped.to_string(),
        String::new(),
        String::new(),
    ]);
    s += &table(&["suite", "cases", "pass", "fail", "skip", "exact terms", "numeric relerr"], &rows);

    let bad: Vec<&Case> = r.cases.iter().filter(|c| c.status != Status::Pass).collect();
    if !bad.is_empty() {
        s += "\nnot passing\n";
        let rows: Vec<Vec<String>> = bad
            .iter()
            .map(|c| {
                vec![
                    format!("{}/{}", c.suite, c.id),
                    status_name(c.status).into(),
                    residual_cell(c),
                    format!("{:e}", c.tolerance),
                    c.note.clone(),
                ]
            })
            .collect();
        s += &table(&["case", "status", "residual", "tolerance", "note"], &rows);
    }
    s += "\nhighest weights <Lambda_k, E_uu - E_u+1,u+1>\n";
    s += &weights_text(&r.weight_table);
    s += "\nmeasured levels\n";
    s += &levels_text(&r.levels);
    s
}

fn weight_rows(t: &[WeightEntry]) -> Vec<Vec<String>> {
    t.iter()
        .map(|e| vec![e.k.to_string(), e.u.to_string(), e.expected.to_string(), q_display(&e.measured)])
        .collect()
}

const WEIGHT_HEADER: [&str; 4] = ["k", "u", "expected", "measured"];

fn weights_text(t: &[WeightEntry]) -> String {
    table(&WEIGHT_HEADER, &weight_rows(t))
}

fn level_rows(t: &[LevelEntry]) -> Vec<Vec<String>> {
    t.iter()
        .map(|e| {
            vec![
                e.copy.clone(),
                format!("E{}{}", e.u, e.v),
                e.m.to_string(),
                e.expected.to_string(),
                e.measured.clone(),
            ]
        })
        .collect()
}

const LEVEL_HEADER: [&str; 5] = ["copy", "generator", "m", "expected", "measured"];

fn levels_text(t: &[LevelEntry]) -> String {
    table(&LEVEL_HEADER, &level_rows(t))
}

fn cocycle_rows(t: &[CocycleEntry]) -> Vec<Vec<String>> {
    t.iter()
        .map(|e| {
            vec![
                e.n.to_string(),
                e.k.to_string(),
                q_display(&e.scalar),
                q_display(&e.formula),
                e.u.to_string(),
            ]
        })
        .collect()
}

const COCYCLE_HEADER: [&str; 5] = ["n", "k", "scalar", "|det u(0)|^k", "u"];

fn rows_csv(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    finish_csv(w)
}

fn render_rows<T: Serialize>(entries: &[T], header: &[&str], rows: Vec<Vec<String>>, format: Format) -> CliResult<String> {
    match format {
        Format::Json => to_json(entries),
        Format::Csv => rows_csv(header, &rows),
        Format::Text => Ok(table(header, &rows)),
    }
}

pub fn render_weights(t: &[WeightEntry], format: Format) -> CliResult<String> {
    render_rows(t, &WEIGHT_HEADER, weight_rows(t), format)
}

pub fn render_levels(t: &[LevelEntry], format: Format) -> CliResult<String> {
    render_rows(t, &LEVEL_HEADER, level_rows(t), format)
}

pub fn render_cocycles(t: &[CocycleEntry], format: Format) -> CliResult<String> {
    render_rows(t, &COCYCLE_HEADER, cocycle_rows(t), format)
}

/// Smith form of a matrix in the JSON exchange format, with a reconstruction check.
pub fn decompose(input: &str) -> CliResult<Value> {
    let v: Value = serde_json::from_str(input).map_err(config_err)?;
    let g = LoopMatrix::from_json(&v).map_err(config_err)?;
    let (val, _) = val_det(&g).map_err(config_err)?;
    let d = smith_decompose(&g).map_err(config_err)?;
    let lq = lattice_quotient_from(&g, &d).map_err(config_err)?;
    Ok(json!({
        "n": g.n(),
        "k": d.k,
        "h1": d.h1.to_json(),
        "h2": d.h2.to_json(),
        "certified_order": d.certified,
        "reconstructs": d.reconstruct().agrees_with(&g),
        "val_det": val,
        "quotient_dim": lq.dim,
        "quotient_basis": lq.basis_to_json(),
    }))
}
