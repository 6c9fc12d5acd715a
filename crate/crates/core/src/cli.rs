//! Command-line front end: argument definitions, input loading with located
//! errors, re-verifiable certificates, and one handler per command.

use crate::amalgam::{amalgamate, approx_join, condition_check, AmalgamOut};
use crate::census::{
    coverage, isolated_density_probe, lindenstrauss_family, polyhedral_net, random_types, AnchorSearch, SeparatedFamily,
};
use crate::error::Error;
use crate::fenchel::{
    antipode_slack, boundary_max_test, conjugate, is_isolated, is_katetov, sup_excess, Isolation, KFn, MaxTestReport,
    Verdict,
};
use crate::forge::{
    avoid_margin, catalog_samples, certify_eps_gurarij, eps_of, schedule, standard_catalog, Avoid, Catalog, CertStatus,
    ChainState, NetParams,
};
use crate::kernel::polyball::MAX_DIM;
use crate::kernel::rational::{fmt_q, fmt_vec, parse_q, parse_vec, serde_mat, serde_q, serde_vec, sub, value_to_q, Vector, Q};
use crate::space::{hexagon, rounded_polygon, Isometry, LinMap, Space};
use crate::typespace::{pairwise_distances, tp, type_distance, TypePres};
use clap::{Args, Parser, Subcommand};
use num_traits::{One, Signed, Zero};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "polygur", version, about = "Exact computations with polyhedral normed spaces")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct ConfigArgs {
    #[arg(long, global = true, env = "POLYGUR_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Largest dimension the forge may reach.
    #[arg(long, global = true, env = "POLYGUR_DIM_CAP", default_value_t = MAX_DIM)]
    pub dim_cap: usize,
    /// Sphere subdivision level for the boundary test.
    #[arg(long, global = true, env = "POLYGUR_LEVEL", default_value_t = 3)]
    pub level: u32,
    /// Lattice step of the nets used by the forge.
    #[arg(long, global = true, env = "POLYGUR_NET_STEP", default_value = "1/2")]
    pub net_step: String,
    /// Directory for JSON bundles and CSV files.
    #[arg(long, global = true, env = "POLYGUR_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "POLYGUR_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Norm of a vector.
    Norm {
        #[arg(long)]
        space: String,
        #[arg(long)]
        v: String,
    },
    /// The dual space.
    Dual {
        #[arg(long)]
        space: String,
    },
    /// Pushout of two isometric embeddings of a common space.
    Amalgamate {
        #[arg(long)]
        e: String,
        #[arg(long)]
        f0: PathBuf,
        #[arg(long)]
        f1: PathBuf,
    },
    /// Joins two spaces so that paired tuples end up within given distances.
    Join {
        #[arg(long)]
        e: String,
        #[arg(long)]
        f: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        eps: String,
    },
    /// Type of a tuple over the source of an isometric embedding.
    Tp {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        a: String,
    },
    /// Distance between two types.
    Dist {
        #[arg(long)]
        type1: PathBuf,
        #[arg(long)]
        type2: PathBuf,
    },
    /// Whether the norm is smooth at a vector.
    Smooth {
        #[arg(long)]
        space: String,
        #[arg(long)]
        v: String,
    },
    /// Whether a 1-type is isolated.
    Isolate {
        #[arg(long = "type")]
        ty: PathBuf,
    },
    /// Chains of spaces realizing types.
    #[command(subcommand)]
    Forge(ForgeCommand),
    /// Counting experiments on type spaces.
    #[command(subcommand)]
    Census(CensusCommand),
    /// Re-checks a certificate written by another command.
    Verify {
        #[arg(long)]
        cert: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum ForgeCommand {
    /// Grows a chain, then certifies the catalog.
    Run {
        #[arg(long)]
        budget: usize,
        /// Catalog file, or `standard`.
        #[arg(long, default_value = "standard")]
        catalog: String,
        #[arg(long, default_value = "1/4")]
        eps: String,
        /// JSON list of `{"ty": type, "radius": r}`.
        #[arg(long)]
        avoid: Option<PathBuf>,
        /// First space of the chain.
        #[arg(long, default_value = "linf:1")]
        base: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum CensusCommand {
    /// A 2^m family of pairwise far types.
    Lindenstrauss {
        #[arg(long)]
        space: String,
        #[arg(long)]
        m: usize,
        /// Anchor search as JSON; defaults to the radius-10 spiral.
        #[arg(long)]
        anchors: Option<PathBuf>,
    },
    /// A finite net of Katětov functions and its coverage of random types.
    Net {
        #[arg(long)]
        space: String,
        #[arg(long = "R")]
        r: String,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
    },
    /// Isolation verdicts for random 1-types.
    Probe {
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value = "2")]
        radius: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    pub dim_cap: usize,
    pub level: u32,
    pub net_step: Q,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn from_args(a: &ConfigArgs) -> Result<Self, CliError> {
        let net_step = arg_q("--net-step", &a.net_step)?;
        if !net_step.is_positive() {
            return Err(CliError::validation(None, "--net-step must be positive"));
        }
        if a.dim_cap > MAX_DIM {
            return Err(CliError::new(ErrorKind::DimensionTooLarge, None, format!("--dim-cap {} exceeds {MAX_DIM}", a.dim_cap)));
        }
        if a.jobs == Some(0) {
            return Err(CliError::validation(None, "--jobs must be at least 1"));
        }
        Ok(RunConfig { seed: a.seed, dim_cap: a.dim_cap, level: a.level, net_step, out: a.out.clone(), jobs: a.jobs })
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: 0, dim_cap: MAX_DIM, level: 3, net_step: Q::new(1.into(), 2.into()), out: None, jobs: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Parse,
    Validation,
    DimensionTooLarge,
    Io,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    pub message: String,
}

impl CliError {
    fn new(kind: ErrorKind, file: Option<&Path>, message: impl Into<String>) -> Self {
        CliError { kind, file: file.map(|p| p.display().to_string()), line: None, column: None, message: message.into() }
    }

    fn validation(file: Option<&Path>, message: impl Into<String>) -> Self {
        CliError::new(ErrorKind::Validation, file, message)
    }

    fn from_lib(file: Option<&Path>, e: Error) -> Self {
        let kind = if matches!(e, Error::DimensionTooLarge { .. }) { ErrorKind::DimensionTooLarge } else { ErrorKind::Validation };
        CliError::new(kind, file, e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", serde_json::to_string(self).unwrap_or_else(|_| self.message.clone()))
    }
}

/// A command's result: a JSON report for stdout, whether the answer was
/// negative, and files for the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub report: Value,
    pub negative: bool,
    pub files: Vec<(String, String)>,
}

impl Output {
    fn ok(report: Value) -> Self {
        Output { report, negative: false, files: Vec::new() }
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(self.negative)
    }
}

/// Objects that `verify` can re-check from the file alone.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Amalgam {
        e: Space,
        f0: LinMap,
        f1: LinMap,
        out: AmalgamOut,
    },
    Join {
        e: Space,
        f: Space,
        #[serde(with = "serde_mat")]
        a: Vec<Vector>,
        #[serde(with = "serde_mat")]
        b: Vec<Vector>,
        #[serde(with = "serde_vec")]
        eps: Vector,
        out: AmalgamOut,
    },
    Chain {
        state: ChainState,
    },
    Extension {
        problem: LinMap,
        psi: LinMap,
        #[serde(with = "serde_q")]
        eps: Q,
        #[serde(with = "serde_q")]
        distortion: Q,
    },
    Family {
        family: SeparatedFamily,
    },
    Isolation {
        ty: TypePres,
        verdict: Isolation,
        report: Option<MaxTestReport>,
    },
}

fn lib<T>(file: Option<&Path>, r: crate::error::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::from_lib(file, e))
}

fn arg_q(name: &str, s: &str) -> Result<Q, CliError> {
    parse_q(s).ok_or_else(|| CliError::new(ErrorKind::Parse, None, format!("{name}: not a rational: {s}")))
}

fn arg_vec(name: &str, s: &str) -> Result<Vector, CliError> {
    parse_vec(s).ok_or_else(|| CliError::new(ErrorKind::Parse, None, format!("{name}: not a vector: {s}")))
}

fn arg_mat(name: &str, s: &str) -> Result<Vec<Vector>, CliError> {
    let bad = || CliError::new(ErrorKind::Parse, None, format!("{name}: not a list of vectors: {s}"));
    let rows: Vec<Vec<Value>> = serde_json::from_str(s).map_err(|_| bad())?;
    rows.iter().map(|r| r.iter().map(value_to_q).collect::<Option<Vector>>().ok_or_else(bad)).collect()
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::new(ErrorKind::Io, Some(path), e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| CliError {
        kind: ErrorKind::Parse,
        file: Some(path.display().to_string()),
        line: Some(e.line()),
        column: Some(e.column()),
        message: e.to_string(),
    })
}

/// `linf:N`, `l1:N`, `hexagon` and `polygon:SIDES:DENOM` name built-in spaces.
fn named_space(name: &str) -> Option<Space> {
    let parts: Vec<&str> = name.split(':').collect();
    match parts.as_slice() {
        ["linf", n] => n.parse().ok().filter(|&n| n <= MAX_DIM).map(Space::ell_inf),
        ["l1", n] => n.parse().ok().filter(|&n| n <= MAX_DIM).map(Space::ell_1),
        ["hexagon"] => Some(hexagon()),
        ["polygon", s, d] => rounded_polygon(s.parse().ok()?, d.parse().ok()?).ok(),
        _ => None,
    }
}

fn valid_space(s: Space, file: Option<&Path>) -> Result<Space, CliError> {
    if s.dim == 0 {
        return Ok(Space::trivial());
    }
    if s.ball.dim != s.dim {
        return Err(CliError::validation(file, "space and ball dimensions differ"));
    }
    let label = s.label.clone();
    let mut fresh = lib(file, Space::new(s.ball))?;
    fresh.label = label;
    Ok(fresh)
}

pub fn load_space(arg: &str) -> Result<Space, CliError> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(s) = named_space(arg) {
            return Ok(s);
        }
    }
    let s: Space = read_json(path)?;
    valid_space(s, Some(path))
}

fn valid_map(m: LinMap, file: Option<&Path>) -> Result<LinMap, CliError> {
    let source = valid_space(m.source, file)?;
    let target = valid_space(m.target, file)?;
    lib(file, LinMap::new(source, target, m.cols))
}

pub fn load_map(path: &Path) -> Result<LinMap, CliError> {
    valid_map(read_json(path)?, Some(path))
}

fn valid_type(t: TypePres, file: Option<&Path>) -> Result<TypePres, CliError> {
    let base = valid_space(t.base, file)?;
    lib(file, TypePres { base, ..t }.validate())
}

pub fn load_type(path: &Path) -> Result<TypePres, CliError> {
    valid_type(read_json(path)?, Some(path))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn pretty<T: Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("serializable") + "\n"
}

pub fn run(cmd: &Command, cfg: &RunConfig) -> Result<Output, CliError> {
    match cmd {
        Command::Norm { space, v } => {
            let s = load_space(space)?;
            let v = arg_vec("--v", v)?;
            Ok(Output::ok(json!({ "norm": fmt_q(&lib(None, s.norm(&v))?) })))
        }
        Command::Dual { space } => Ok(Output::ok(to_value(&lib(None, load_space(space)?.dual_space())?))),
        Command::Amalgamate { e, f0, f1 } => {
            let e = load_space(e)?;
            let (f0, f1) = (load_map(f0)?, load_map(f1)?);
            let out = lib(None, amalgamate(&e, &f0, &f1))?;
            Ok(Output::ok(to_value(&Certificate::Amalgam { e, f0, f1, out })))
        }
        Command::Join { e, f, a, b, eps } => {
            let (e, f) = (load_space(e)?, load_space(f)?);
            let (a, b, eps) = (arg_mat("--a", a)?, arg_mat("--b", b)?, arg_vec("--eps", eps)?);
            let rep = lib(None, condition_check(&e, &f, &a, &b, &eps))?;
            if !rep.holds {
                return Ok(Output {
                    report: json!({
                        "holds": false,
                        "worst": fmt_q(&rep.worst),
                        "witness": rep.witness.as_ref().map(|w| fmt_vec(w)),
                    }),
                    negative: true,
                    files: Vec::new(),
                });
            }
            let out = lib(None, approx_join(&e, &f, &a, &b, &eps))?;
            Ok(Output::ok(to_value(&Certificate::Join { e, f, a, b, eps, out })))
        }
        Command::Tp { map, a } => {
            let m = load_map(map)?;
            let a = arg_mat("--a", a)?;
            Ok(Output::ok(to_value(&lib(Some(map), tp(&m, &a))?)))
        }
        Command::Dist { type1, type2 } => {
            let (x, y) = (load_type(type1)?, load_type(type2)?);
            let b = lib(None, type_distance(&x, &y))?;
            let mut report = to_value(&b);
            report["bracket"] = json!(format!("[{}, {}]", fmt_q(&b.lo), fmt_q(&b.hi)));
            Ok(Output::ok(report))
        }
        Command::Smooth { space, v } => {
            let s = load_space(space)?;
            let v = arg_vec("--v", v)?;
            let smooth = lib(None, s.is_smooth(&v))?;
            let face = lib(None, s.norming_functionals(&v))?;
            Ok(Output { report: json!({ "smooth": smooth, "norming_face": face }), negative: !smooth, files: Vec::new() })
        }
        Command::Isolate { ty } => {
            let xi = load_type(ty)?;
            let verdict = lib(Some(ty), is_isolated(&xi, cfg.level))?;
            let report = match verdict {
                Isolation::NotIsolated(_) => {
                    Some(lib(Some(ty), boundary_max_test(&lib(Some(ty), KFn::from_type(&xi))?, &Q::zero(), cfg.level))?)
                }
                _ => None,
            };
            let negative = verdict != Isolation::Isolated;
            Ok(Output { report: to_value(&Certificate::Isolation { ty: xi, verdict, report }), negative, files: Vec::new() })
        }
        Command::Forge(ForgeCommand::Run { budget, catalog, eps, avoid, base }) => forge_run(cfg, *budget, catalog, eps, avoid.as_deref(), base),
        Command::Census(c) => census(cfg, c),
        Command::Verify { cert } => {
            let raw: serde_json::Value = read_json(cert)?;
            let items = match raw {
                serde_json::Value::Array(items) => items,
                one => vec![one],
            };
            let certs = items
                .into_iter()
                .enumerate()
                .map(|(i, v)| {
                    serde_json::from_value::<Certificate>(v)
                        .map_err(|e| CliError::new(ErrorKind::Parse, Some(cert), format!("certificate {i}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut details = Vec::new();
            let mut all_valid = true;
            for c in &certs {
                let (valid, detail) = verify(c).map_err(|e| CliError::validation(Some(cert), e))?;
                all_valid &= valid;
                details.push(json!({ "valid": valid, "detail": detail }));
            }
            let report = if details.len() == 1 { details.remove(0) } else { json!({ "valid": all_valid, "certificates": details }) };
            Ok(Output { report, negative: !all_valid, files: Vec::new() })
        }
    }
}

fn forge_run(
    cfg: &RunConfig,
    budget: usize,
    catalog: &str,
    eps: &str,
    avoid: Option<&Path>,
    base: &str,
) -> Result<Output, CliError> {
    let eps = arg_q("--eps", eps)?;
    let cat = if catalog == "standard" {
        standard_catalog()
    } else {
        let path = Path::new(catalog);
        let raw: Catalog = read_json(path)?;
        let mut problems = Vec::new();
        for p in raw.problems {
            problems.push(lib(Some(path), valid_map(p, Some(path))?.require_isometric())?);
        }
        Catalog { problems }
    };
    let mut cs = lib(None, ChainState::new(load_space(base)?, cfg.dim_cap))?;
    cs.avoid_net = cfg.net_step.clone();
    if let Some(path) = avoid {
        let list: Vec<Avoid> = read_json(path)?;
        for a in list {
            cs.avoid.push(Avoid { ty: valid_type(a.ty, Some(path))?, radius: a.radius });
        }
    }
    let net = NetParams { step: cfg.net_step.clone() };
    let samples = lib(None, catalog_samples(&cs, &cat))?;
    let (cs, log) = lib(None, schedule(&cs, budget, &samples, &cat, &net))?;
    let certs = lib(None, certify_eps_gurarij(&cs, &cat, &eps, &net))?;

    let mut defect = csv::Writer::from_writer(Vec::new());
    defect.write_record(["round", "dim", "defect"]).expect("csv");
    let dims: Vec<usize> = std::iter::once(cs.spaces[0].dim).chain(log.steps.iter().map(|s| s.dim)).collect();
    for (k, d) in cs.defect_history.iter().enumerate() {
        let dim = dims.get(k).or(dims.last()).copied().unwrap_or(0);
        defect.write_record([k.to_string(), dim.to_string(), fmt_q(d)]).expect("csv");
    }
    let mut cert_csv = csv::Writer::from_writer(Vec::new());
    cert_csv.write_record(["problem", "status", "distortion"]).expect("csv");
    let mut bundles = Vec::new();
    for c in &certs {
        let (status, dist) = match &c.status {
            CertStatus::Certified { psi, distortion } => {
                bundles.push(Certificate::Extension {
                    problem: cat.problems[c.problem].clone(),
                    psi: psi.clone(),
                    eps: eps.clone(),
                    distortion: distortion.clone(),
                });
                ("certified", fmt_q(distortion))
            }
            CertStatus::Unresolved { best } => ("unresolved", best.as_ref().map(fmt_q).unwrap_or_default()),
        };
        cert_csv.write_record([c.problem.to_string(), status.to_string(), dist]).expect("csv");
    }
    let unresolved = certs.iter().filter(|c| matches!(c.status, CertStatus::Unresolved { .. })).count();
    let report = json!({
        "steps": log.steps,
        "skipped": log.skipped,
        "stop": log.stop,
        "top_dim": cs.top().dim,
        "defect_history": cs.defect_history.iter().map(fmt_q).collect::<Vec<_>>(),
        "certified": certs.len() - unresolved,
        "unresolved": unresolved,
    });
    let files = vec![
        ("chain.json".into(), pretty(&Certificate::Chain { state: cs })),
        ("extensions.json".into(), pretty(&bundles)),
        ("defect.csv".into(), String::from_utf8(defect.into_inner().expect("csv")).expect("utf8")),
        ("certify.csv".into(), String::from_utf8(cert_csv.into_inner().expect("csv")).expect("utf8")),
    ];
    Ok(Output { report, negative: unresolved > 0, files })
}

fn census(cfg: &RunConfig, c: &CensusCommand) -> Result<Output, CliError> {
    match c {
        CensusCommand::Lindenstrauss { space, m, anchors } => {
            let e = load_space(space)?;
            let search = match anchors {
                Some(p) => read_json(p)?,
                None => AnchorSearch::default(),
            };
            let fam = match lindenstrauss_family(&e, *m, &search) {
                Err(Error::NoAnchorsFound) => {
                    return Ok(Output { report: json!({ "anchors_found": false }), negative: true, files: Vec::new() })
                }
                r => lib(None, r)?,
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &fam.pairwise_lo {
                w.write_record(row.iter().map(fmt_q)).expect("csv");
            }
            let min_lo = fam.pairwise_lo.iter().enumerate().flat_map(|(i, r)| r.iter().enumerate().filter(move |(j, _)| *j != i)).map(|(_, x)| x).min();
            let report = json!({
                "anchors_found": true,
                "anchors": fam.anchors.iter().map(|v| fmt_vec(v)).collect::<Vec<_>>(),
                "types": fam.types.len(),
                "min_pairwise_lo": min_lo.map(fmt_q),
            });
            let files = vec![
                ("family.json".into(), pretty(&Certificate::Family { family: fam.clone() })),
                ("pairwise.csv".into(), String::from_utf8(w.into_inner().expect("csv")).expect("utf8")),
            ];
            Ok(Output { report, negative: false, files })
        }
        CensusCommand::Net { space, r, eps, samples, cap } => {
            let e = load_space(space)?;
            let (r, eps) = (arg_q("--R", r)?, arg_q("--eps", eps)?);
            let net = lib(None, polyhedral_net(&e, &r, &eps, *cap))?;
            let sampled = lib(None, random_types(&e, *samples, &r, cfg.seed))?;
            let cov = lib(None, coverage(&net, &sampled, &r, &eps))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["sample", "nearest", "distance", "covered"]).expect("csv");
            for (k, (i, d)) in cov.nearest.iter().zip(&cov.distance).enumerate() {
                w.write_record([k.to_string(), i.to_string(), fmt_q(d), (d <= &eps).to_string()]).expect("csv");
            }
            let report = json!({ "net_size": net.len(), "covered": cov.covered, "samples": cov.total });
            let files = vec![
                ("net.json".into(), pretty(&net)),
                ("samples.json".into(), pretty(&sampled)),
                ("coverage.csv".into(), String::from_utf8(w.into_inner().expect("csv")).expect("utf8")),
            ];
            Ok(Output { report, negative: !cov.all_covered(), files })
        }
        CensusCommand::Probe { space, count, radius } => {
            let e = load_space(space)?;
            let sampled = lib(None, random_types(&e, *count, &arg_q("--radius", radius)?, cfg.seed))?;
            let rep = lib(None, isolated_density_probe(&e, &sampled, cfg.level))?;
            Ok(Output::ok(to_value(&rep)))
        }
    }
}

fn fresh(m: &LinMap) -> LinMap {
    let mut m = m.clone();
    m.isometry = Isometry::Unchecked;
    m.check_isometry()
}

/// Re-checks a certificate exactly. `Err` means the file is malformed.
pub fn verify(c: &Certificate) -> Result<(bool, String), String> {
    let e2s = |e: Error| e.to_string();
    Ok(match c {
        Certificate::Amalgam { e, f0, f1, out } => {
            let (g0, g1) = (fresh(&out.g0), fresh(&out.g1));
            if !(fresh(f0).is_isometric() && fresh(f1).is_isometric()) {
                return Ok((false, "input maps are not isometric".into()));
            }
            if !(g0.is_isometric() && g1.is_isometric()) {
                return Ok((false, "output maps are not isometric".into()));
            }
            let commute = (0..e.dim).all(|i| {
                let u = crate::kernel::rational::unit(e.dim, i);
                g0.apply(&f0.apply(&u)) == g1.apply(&f1.apply(&u))
            });
            (commute, if commute { "isometric and commuting".into() } else { "square does not commute".into() })
        }
        Certificate::Join { a, b, eps, out, .. } => {
            let (g0, g1) = (fresh(&out.g0), fresh(&out.g1));
            if !(g0.is_isometric() && g1.is_isometric()) {
                return Ok((false, "output maps are not isometric".into()));
            }
            for ((x, y), t) in a.iter().zip(b).zip(eps) {
                let d = out.result.norm(&sub(&g0.apply(x), &g1.apply(y))).map_err(e2s)?;
                if d > *t {
                    return Ok((false, format!("pair at distance {} > {}", fmt_q(&d), fmt_q(t))));
                }
            }
            (true, "isometric, pairs within tolerance".into())
        }
        Certificate::Chain { state } => {
            if let Err(e) = state.verify() {
                return Ok((false, e.to_string()));
            }
            for av in &state.avoid {
                for entry in &state.ledger {
                    if let Some(m) = avoid_margin(state, entry, av).map_err(e2s)? {
                        if m <= av.radius {
                            return Ok((false, format!("stage {} realizes a forbidden type", entry.stage)));
                        }
                    }
                }
            }
            (true, format!("{} links and {} ledger entries recheck", state.links.len(), state.ledger.len()))
        }
        Certificate::Extension { problem, psi, eps, distortion } => {
            if psi.source.ball != problem.target.ball {
                return Ok((false, "map does not start at the larger space".into()));
            }
            if !fresh(&problem.then(psi).map_err(e2s)?).is_isometric() {
                return Ok((false, "map is not isometric on the smaller space".into()));
            }
            let got = eps_of(psi).map_err(e2s)?;
            (got == *distortion && got <= *eps, format!("distortion {}", fmt_q(&got)))
        }
        Certificate::Family { family } => verify_family(family)?,
        Certificate::Isolation { ty, verdict, report } => {
            let ty = valid_type(ty.clone(), None).map_err(|e| e.message)?;
            let f = KFn::from_type(&ty).map_err(e2s)?;
            match (verdict, report) {
                (Isolation::Isolated, _) => {
                    let s = antipode_slack(&f).map_err(e2s)?;
                    (s.is_zero(), format!("antipode slack {}", fmt_q(&s)))
                }
                (Isolation::NotIsolated(gap), Some(rep)) => {
                    let (Some(g), Some(lam)) = (&rep.witness_g, &rep.witness_lambda) else {
                        return Ok((false, "witness missing".into()));
                    };
                    if rep.verdict != Verdict::Violated || rep.gap != *gap {
                        return Ok((false, "report disagrees with verdict".into()));
                    }
                    let katetov = is_katetov(g).map_err(e2s)?.holds;
                    let below = sup_excess(&f, g).is_some_and(|x| !x.is_positive());
                    let on_sphere = f.space.dual_norm(lam).map_err(e2s)? == Q::one();
                    let got = conjugate(g).map_err(e2s)?.value(lam) - conjugate(&f).map_err(e2s)?.value(lam);
                    let ok = katetov && below && on_sphere && got == *gap && gap.is_positive();
                    (ok, format!("witness gap {}", fmt_q(&got)))
                }
                (Isolation::NotIsolated(_), None) => (false, "witness missing".into()),
                (Isolation::Inconclusive(level), _) => (true, format!("no verdict at level {level}")),
            }
        }
    })
}

fn verify_family(fam: &SeparatedFamily) -> Result<(bool, String), String> {
    let e = &fam.base;
    let half = Q::new(1.into(), 2.into());
    for (i, v) in fam.anchors.iter().enumerate() {
        for w in &fam.anchors[i + 1..] {
            let bound = e.n(v) + e.n(w) - Q::one();
            if e.n(&crate::kernel::rational::add(v, w)) > bound || e.n(&sub(v, w)) > bound {
                return Ok((false, "anchor inequality fails".into()));
            }
        }
    }
    if fam.types.len() != 1 << fam.anchors.len() {
        return Ok((false, "wrong family size".into()));
    }
    let mut types = Vec::new();
    for (t, signs) in fam.types.iter().zip(&fam.sign_patterns) {
        let t = valid_type(t.clone(), None).map_err(|e| e.message)?;
        let f = KFn::from_type(&t).map_err(|e| e.to_string())?;
        for (v, &s) in fam.anchors.iter().zip(signs) {
            let c: Vector = v.iter().map(|x| x * Q::from_integer(s.into())).collect();
            if f.eval(&c) > e.n(v) - &half {
                return Ok((false, "a type misses an anchor ball".into()));
            }
        }
        types.push(t);
    }
    let d = pairwise_distances(&types).map_err(|e| e.to_string())?;
    for (i, row) in d.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            if b.lo != fam.pairwise_lo[i][j] {
                return Ok((false, format!("pairwise bound ({i}, {j}) differs")));
            }
        }
    }
    Ok((true, format!("{} types, anchors and bounds recheck", types.len())))
}

/// Runs a parsed command line: prints the report, writes files, returns the exit code.
pub fn main_with(cli: Cli) -> i32 {
    let cfg = match RunConfig::from_args(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    if let Some(j) = cfg.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    match run(&cli.command, &cfg) {
        Ok(out) => {
            if !out.files.is_empty() {
                let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
                if let Err(e) = write_files(&dir, &out.files) {
                    eprintln!("{e}");
                    return 2;
                }
            }
            let mut stdout = std::io::stdout().lock();
            // a closed pipe downstream is not an error of ours
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&out.report).expect("serializable"));
            out.exit_code()
        }
        Err(e) => {
            eprintln!("{e}");
            2
        }
    }
}

fn write_files(dir: &Path, files: &[(String, String)]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::new(ErrorKind::Io, Some(dir), e.to_string()))?;
    for (name, body) in files {
        let p = dir.join(name);
        std::fs::write(&p, body).map_err(|e| CliError::new(ErrorKind::Io, Some(&p), e.to_string()))?;
    }
    Ok(())
}
