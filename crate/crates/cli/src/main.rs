mod config;
mod expr;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ksforge::gleason::{fit_w, indeterminacy_interval, IndeterminacyQuery};
use ksforge::graph::{Certificate, Claim, Term};
use ksforge::io::{export, from_graph_json, rays_from_text, to_graph_json, Format};
use ksforge::lp::{fmt_rational, q, to_f64, LpStatus, Rational};
use ksforge::search::two_valued_search;
use ksforge::state::verify_report;
use ksforge::{Forge, OrthoGraph, Ray, Semantics, StatePolytope};

use config::{RunConfig, TolConfig};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Geometry(String),
    ClaimFailed,
}

impl From<ksforge::Error> for CliError {
    fn from(e: ksforge::Error) -> Self {
        use ksforge::Error as E;
        match e {
            E::InvalidInput(_) | E::Precondition(_) | E::Parse { .. } => CliError::Input(e.to_string()),
            E::Degenerate(_) | E::OutOfChart { .. } | E::CertificationRejected { .. } => {
                CliError::Geometry(e.to_string())
            }
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::ClaimFailed => 1,
            CliError::Input(_) => 2,
            CliError::Geometry(_) => 3,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "ksforge", version, about = "Build and verify finite ray sets that constrain quantum states")]
struct Cli {
    /// TOML file with default parameters and tolerances
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    ortho_eps: Option<f64>,
    #[arg(long, global = true)]
    dedup_eps: Option<f64>,
    #[arg(long, global = true)]
    lp_eps: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a gadget and write it as graph-json
    Build(BuildArgs),
    /// Check the claims embedded in a graph, or ad hoc pins and objectives
    Verify(VerifyArgs),
    /// Exact bounds on p(x) under p(z0) = 1 over growing graphs (CSV)
    Interval(IntervalArgs),
    /// Fit the symmetric operator matching six basis samples
    Fit(FitArgs),
    /// Convert graph-json to dot, csv or graph-json
    Export(ExportArgs),
    /// Validate graph-json or a plain ray list and write graph-json
    Import(ImportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Piron,
    Gprime,
    Gdouble,
    Gamma,
    D,
    Lambda,
    Frame,
}

#[derive(Args)]
struct BuildArgs {
    kind: Kind,
    /// Pole used for the polar parameters, as x,y,z
    #[arg(long, value_parser = parse_vec)]
    pole: Option<[f64; 3]>,
    /// Colatitude of a (or q for gprime), degrees
    #[arg(long, allow_hyphen_values = true)]
    a_angle: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a_lon: Option<f64>,
    /// Colatitude of b (or r for gprime), degrees
    #[arg(long, allow_hyphen_values = true)]
    b_angle: Option<f64>,
    /// Defaults to the longitude reachable from a in one perpendicular step (d)
    #[arg(long, allow_hyphen_values = true)]
    b_lon: Option<f64>,
    /// a as coordinates, overriding the polar form
    #[arg(long, value_parser = parse_vec)]
    a: Option<[f64; 3]>,
    #[arg(long, value_parser = parse_vec)]
    b: Option<[f64; 3]>,
    /// Piron gadget: colatitude of q, degrees
    #[arg(long)]
    q_angle: Option<f64>,
    /// Piron gadget: longitude step from q to r, degrees
    #[arg(long, allow_hyphen_values = true)]
    dphi: Option<f64>,
    /// Number of witnesses for lambda
    #[arg(long)]
    k: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SemArg {
    TriplesAndPairs,
    TriplesOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Expect {
    Infeasible,
    Feasible,
    Negative,
    Nonpositive,
    Positive,
    None,
    Witness,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    /// name=value, name may be `#index`
    #[arg(long = "pin")]
    pins: Vec<String>,
    /// Objective to maximize, e.g. "b-a"
    #[arg(long, allow_hyphen_values = true, conflicts_with = "min")]
    max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    min: Option<String>,
    /// Search for a 0/1 state extending the pins
    #[arg(long, conflicts_with_all = ["max", "min"])]
    two_valued: bool,
    /// Fail (exit 1) unless the ad hoc verdict matches
    #[arg(long)]
    expect: Option<Expect>,
    #[arg(long, value_enum, default_value = "triples-and-pairs")]
    semantics: SemArg,
    /// Print certificates as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct IntervalArgs {
    #[arg(long, value_parser = parse_vec)]
    z0: Option<[f64; 3]>,
    /// x as coordinates, overriding --x-angle/--x-lon
    #[arg(long, value_parser = parse_vec)]
    x: Option<[f64; 3]>,
    #[arg(long)]
    x_angle: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_lon: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Enrichment stages after the bare stage 0
    #[arg(long, alias = "budget")]
    stages: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Samples as name=value for e1 e2 e3 b12 b13 b23
    samples: Vec<String>,
    /// JSON object of samples
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    file: PathBuf,
    #[arg(long, default_value = "dot")]
    format: String,
    /// Adds the angle to this pole to CSV output
    #[arg(long, value_parser = parse_vec)]
    pole: Option<[f64; 3]>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ImportArgs {
    file: PathBuf,
    /// Input is a plain list of coordinates rather than graph-json
    #[arg(long)]
    rays: bool,
    /// Add every orthogonal pair and triple found among the rays
    #[arg(long)]
    detect: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_vec(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(v).map_err(|_| "expected three comma separated numbers".to_string())
}

pub(crate) fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::Input(format!("stdout: {e}")))
        }
    }
}

fn ray(v: [f64; 3]) -> CliResult<Ray> {
    Ok(ksforge::sphere::canonicalize(v)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Input(m) | CliError::Geometry(m) => eprintln!("error: {m}"),
                CliError::ClaimFailed => eprintln!("one or more claims failed"),
            }
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let tol = cfg.tolerance(&TolConfig {
        ortho_eps: cli.ortho_eps,
        dedup_eps: cli.dedup_eps,
        lp_eps: cli.lp_eps,
    })?;
    let forge = Forge::new(tol)?;
    match cli.cmd {
        Cmd::Build(a) => build(&forge, &cfg, a),
        Cmd::Verify(a) => verify(&forge, a),
        Cmd::Interval(a) => interval(&forge, &cfg, a),
        Cmd::Fit(a) => fit(a),
        Cmd::Export(a) => export_cmd(&forge, a),
        Cmd::Import(a) => import(&forge, a),
    }
}

fn build(forge: &Forge, cfg: &RunConfig, a: BuildArgs) -> CliResult {
    let c = &cfg.build;
    let pole = ray(a.pole.or(c.pole).unwrap_or([0.0, 0.0, 1.0]))?;
    let (def_a, def_b) = match a.kind {
        Kind::D | Kind::Gprime => (20.0, 50.0),
        _ => (0.0, 45.0),
    };
    let a_angle = a.a_angle.or(c.a_angle).unwrap_or(def_a);
    let a_lon = a.a_lon.or(c.a_lon).unwrap_or(0.0);
    let b_angle = a.b_angle.or(c.b_angle).unwrap_or(def_b);
    for (n, v) in [("a-angle", a_angle), ("b-angle", b_angle)] {
        if !(0.0..=180.0).contains(&v) {
            return Err(CliError::Input(format!("--{n} must lie in [0, 180] degrees")));
        }
    }
    let polar = |colat: f64, lon: f64| -> CliResult<Ray> {
        Ok(Ray::from_polar(&pole, colat.to_radians(), lon.to_radians())?)
    };
    let b_lon = match a.b_lon.or(c.b_lon) {
        Some(v) => v,
        None if matches!(a.kind, Kind::D | Kind::Gprime) => {
            let r = a_angle.to_radians().tan() / b_angle.to_radians().tan();
            if r.abs() <= 1.0 {
                a_lon + r.acos().to_degrees()
            } else {
                a_lon
            }
        }
        None => a_lon,
    };
    let ra = match a.a {
        Some(v) => ray(v)?,
        None => polar(a_angle, a_lon)?,
    };
    let rb = match a.b {
        Some(v) => ray(v)?,
        None => polar(b_angle, b_lon)?,
    };
    let g = match a.kind {
        Kind::Piron => {
            let qa = a.q_angle.or(c.q_angle).unwrap_or(30.0);
            let dphi = a.dphi.or(c.dphi).unwrap_or(40.0);
            let qr = polar(qa, a_lon)?;
            let r = ksforge::sphere::perp_step(&pole, &qr, dphi.to_radians())?;
            forge.piron(&pole, &qr, &r)?
        }
        Kind::Gprime => forge.g_prime(&pole, &ra, &rb)?,
        Kind::Gdouble => forge.g_double_prime(&ra, &rb)?,
        Kind::Gamma => forge.gamma(&ra, &rb)?,
        Kind::D => forge.d(&pole, &ra, &rb)?,
        Kind::Lambda => {
            let k = a.k.or(c.k).unwrap_or(5);
            if k < 2 {
                return Err(CliError::Input("--k must be at least 2".into()));
            }
            forge.lambda_k(&pole, k)?
        }
        Kind::Frame => forge.frame_basis(),
    };
    let rep = g.report().expect("builders attach a report");
    eprintln!(
        "{}: {} rays, {} triples, {} pairs, {} claims",
        rep.gadget,
        g.len(),
        g.triples.len(),
        g.pairs.len(),
        rep.claims.len()
    );
    let out = a.output.or_else(|| c.output.clone());
    emit(out.as_deref(), &to_graph_json(&g))
}

fn load_graph(forge: &Forge, path: &Path) -> CliResult<OrthoGraph> {
    Ok(from_graph_json(&read(path)?, forge.tol)?)
}

fn pins_text(pins: &[ksforge::graph::Pin]) -> String {
    let v: Vec<String> = pins.iter().map(|p| format!("{}={}", p.ray, p.value)).collect();
    format!("{{{}}}", v.join(", "))
}

fn terms_text(t: &[Term]) -> String {
    let mut s = String::new();
    for (k, term) in t.iter().enumerate() {
        let (neg, c) = match term.coeff.strip_prefix('-') {
            Some(c) => (true, c),
            None => (false, term.coeff.as_str()),
        };
        match (k, neg) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        if c != "1" {
            s.push_str(c);
            s.push('*');
        }
        s.push_str(&term.ray);
    }
    s
}

fn describe(c: &Claim) -> String {
    match c {
        Claim::Infeasible { pins } => format!("no state with {}", pins_text(pins)),
        Claim::Feasible { pins } => format!("some state with {}", pins_text(pins)),
        Claim::MaxBelow {
            pins,
            objective,
            bound,
        } => format!("max {} < {bound} given {}", terms_text(objective), pins_text(pins)),
        Claim::MaxAtMost {
            pins,
            objective,
            bound,
        } => format!("max {} <= {bound} given {}", terms_text(objective), pins_text(pins)),
        Claim::NoTwoValued { pins } => format!("no 0/1 state with {}", pins_text(pins)),
    }
}

fn semantics(s: SemArg) -> Semantics {
    match s {
        SemArg::TriplesAndPairs => Semantics::TriplesAndPairs,
        SemArg::TriplesOnly => Semantics::TriplesOnly,
    }
}

fn verify(forge: &Forge, a: VerifyArgs) -> CliResult {
    let g = load_graph(forge, &a.file)?;
    let sem = semantics(a.semantics);
    let adhoc = !a.pins.is_empty() || a.max.is_some() || a.min.is_some() || a.two_valued;
    if !adhoc {
        if a.expect.is_some() {
            return Err(CliError::Input("--expect needs pins, an objective or --two-valued".into()));
        }
        return verify_embedded(&g, sem, a.json);
    }
    let rep = g.report();
    let pins: Vec<(usize, Rational)> = a
        .pins
        .iter()
        .map(|p| expr::parse_pin(&g, rep, p))
        .collect::<CliResult<_>>()?;
    let name_of = |i: usize| -> String {
        rep.and_then(|r| r.rays.iter().find(|n| n.index == i))
            .map(|n| n.name.clone())
            .unwrap_or_else(|| format!("#{i}"))
    };
    let verdict = if a.two_valued {
        let mut bits = Vec::new();
        for (i, v) in &pins {
            if *v == q(0) {
                bits.push((*i, false));
            } else if *v == q(1) {
                bits.push((*i, true));
            } else {
                return Err(CliError::Input("two-valued pins must be 0 or 1".into()));
            }
        }
        match two_valued_search(&g, &bits, sem) {
            Some(w) => {
                let ones = w.iter().filter(|b| **b).count();
                println!("two-valued: witness ({ones} of {} rays set to 1)", g.len());
                if let Some(r) = rep {
                    let named: Vec<String> = r
                        .rays
                        .iter()
                        .map(|n| format!("{}={}", n.name, u8::from(w[n.index])))
                        .collect();
                    println!("  {}", named.join(" "));
                }
                if a.json {
                    let v: Vec<u8> = w.iter().map(|b| u8::from(*b)).collect();
                    println!("{}", serde_json::to_string(&v).expect("serializable"));
                }
                Expect::Witness
            }
            None => {
                println!("two-valued: none");
                Expect::None
            }
        }
    } else {
        let mut poly = StatePolytope::new(&g).with_semantics(sem);
        for (i, v) in &pins {
            poly = poly.pin(*i, v.clone())?;
        }
        let obj = match (&a.max, &a.min) {
            (Some(s), _) => Some((expr::parse_objective(&g, rep, s)?, true)),
            (_, Some(s)) => Some((expr::parse_objective(&g, rep, s)?, false)),
            _ => None,
        };
        match obj {
            None => {
                let out = poly.feasible();
                println!("{}", out.status);
                if let (Some(w), Some(r)) = (&out.witness, rep) {
                    let named: Vec<String> = r
                        .rays
                        .iter()
                        .map(|n| format!("{}={}", n.name, fmt_rational(&w[n.index])))
                        .collect();
                    println!("  {}", named.join(" "));
                }
                if a.json {
                    if let Some(w) = &out.witness {
                        let v: Vec<String> = w.iter().map(fmt_rational).collect();
                        println!("{}", serde_json::to_string(&v).expect("serializable"));
                    }
                }
                if out.is_feasible() {
                    Expect::Feasible
                } else {
                    Expect::Infeasible
                }
            }
            Some((o, maximize)) => {
                let out = poly.optimize(&o, maximize);
                match &out.optimum {
                    Some(v) if out.status == LpStatus::Optimal => {
                        let sense = if maximize { "max" } else { "min" };
                        let w = out.witness.as_ref().expect("optimal witness");
                        println!("{sense} = {} (~{:.12})", fmt_rational(v), to_f64(v));
                        let terms: Vec<String> = o
                            .iter()
                            .map(|(i, _)| format!("{}={}", name_of(*i), fmt_rational(&w[*i])))
                            .collect();
                        println!("  at {}", terms.join(" "));
                        if *v < q(0) {
                            Expect::Negative
                        } else if *v == q(0) {
                            Expect::Nonpositive
                        } else {
                            Expect::Positive
                        }
                    }
                    _ => {
                        println!("{}", out.status);
                        Expect::Infeasible
                    }
                }
            }
        }
    };
    match a.expect {
        None => Ok(()),
        Some(e) if e == verdict || (e == Expect::Nonpositive && verdict == Expect::Negative) => {
            println!("expectation {e:?} met");
            Ok(())
        }
        Some(e) => {
            println!("expectation {e:?} not met");
            Err(CliError::ClaimFailed)
        }
    }
}

fn verify_embedded(g: &OrthoGraph, sem: Semantics, json: bool) -> CliResult {
    let rep = g
        .report()
        .ok_or_else(|| CliError::Input("graph carries no claims; pass --pin/--max".into()))?;
    let certs: Vec<Certificate> = verify_report(g, sem)?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&certs).expect("serializable")
        );
    } else {
        for (c, claim) in certs.iter().zip(&rep.claims) {
            let opt = c
                .optimum
                .as_deref()
                .map(|o| format!(" {o}"))
                .unwrap_or_default();
            println!(
                "claim {}: {} -> {}{} [{}]",
                c.claim,
                describe(claim),
                c.status,
                opt,
                if c.holds { "holds" } else { "FAILS" }
            );
        }
    }
    if certs.iter().all(|c| c.holds) {
        Ok(())
    } else {
        Err(CliError::ClaimFailed)
    }
}

fn interval(forge: &Forge, cfg: &RunConfig, a: IntervalArgs) -> CliResult {
    let c = &cfg.interval;
    let z0 = ray(a.z0.or(c.z0).unwrap_or([0.0, 0.0, 1.0]))?;
    let x = match a.x {
        Some(v) => ray(v)?,
        None => {
            let th = a.x_angle.or(c.x_angle).unwrap_or(30.0);
            if !(th > 0.0 && th < 90.0) {
                return Err(CliError::Input("--x-angle must lie in (0, 90) degrees".into()));
            }
            let lon = a.x_lon.or(c.x_lon).unwrap_or(0.0);
            Ray::from_polar(&z0, th.to_radians(), lon.to_radians())?
        }
    };
    let epsilon = a.epsilon.or(c.epsilon).unwrap_or(0.05);
    let stages = a.stages.or(c.stages).unwrap_or(3);
    let query = IndeterminacyQuery {
        z0,
        x,
        epsilon,
        stages,
    };
    let table = indeterminacy_interval(forge, &query)?;
    let mut s = String::from("stage,rays,lo,hi,lo_approx,hi_approx,born,width\n");
    for st in &table {
        s.push_str(&format!(
            "{},{},{},{},{:.12},{:.12},{:.12},{:.12}\n",
            st.stage,
            st.rays,
            fmt_rational(&st.lo),
            fmt_rational(&st.hi),
            to_f64(&st.lo),
            to_f64(&st.hi),
            st.born,
            to_f64(&st.width())
        ));
    }
    let last = table.last().expect("stage 0 is always present");
    let w = to_f64(&last.width());
    s.push_str(&format!(
        "# width < 2*epsilon: {} (width {w:.12}, 2*epsilon {:.12})\n",
        w < 2.0 * epsilon,
        2.0 * epsilon
    ));
    let out = a.output.or_else(|| c.output.clone());
    emit(out.as_deref(), &s)
}

fn fit(a: FitArgs) -> CliResult {
    let mut m: BTreeMap<String, f64> = match &a.file {
        Some(p) => serde_json::from_str(&read(p)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        None => BTreeMap::new(),
    };
    for s in &a.samples {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("sample '{s}' is not name=value")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("bad sample value in '{s}'")))?;
        m.insert(k.trim().to_string(), v);
    }
    let w = fit_w(&m)?;
    let ev = w.eigenvalues();
    let mut ev: Vec<f64> = ev.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let doc = serde_json::json!({
        "w": w.w,
        "matrix": [
            [w.w[0], w.w[3], w.w[4]],
            [w.w[3], w.w[1], w.w[5]],
            [w.w[4], w.w[5], w.w[2]],
        ],
        "trace": w.trace(),
        "eigenvalues": ev,
        "is_state": w.is_state(),
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    Ok(())
}

fn export_cmd(forge: &Forge, a: ExportArgs) -> CliResult {
    let g = load_graph(forge, &a.file)?;
    let fmt: Format = a.format.parse()?;
    let pole = a.pole.map(ray).transpose()?;
    emit(a.output.as_deref(), &export(&g, fmt, pole.as_ref()))
}

fn import(forge: &Forge, a: ImportArgs) -> CliResult {
    let text = read(&a.file)?;
    let mut g = if a.rays {
        rays_from_text(&text, forge.tol)?
    } else {
        from_graph_json(&text, forge.tol)?
    };
    if a.detect {
        g = g.detect_orthogonality();
    }
    eprintln!(
        "{} rays, {} triples, {} pairs",
        g.len(),
        g.triples.len(),
        g.pairs.len()
    );
    emit(a.output.as_deref(), &to_graph_json(&g))
}
