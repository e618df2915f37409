//! `locahal` command-line front end.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use locahal::analysis::{cutoff_from_row, order_alpha_distance, order_alpha_row, AlphaChoice};
use locahal::bmo::{bmo_loc_table, commutator_matrix, positive_commutator_apply};
use locahal::dyadic::{build_envelope, verify_envelope, verify_properties, BuildOptions, DyadicSystem};
use locahal::maximal::{local_maximal, vitali_select, FamilyBall};
use locahal::operators::{apply_fractional, apply_singular, apply_truncated, localize, lp_norm, KernelSpec, LocalizeOptions};
use locahal::report::VerificationReport;
use locahal::space::{estimate_constants, generate, ConstantsTable, Generator, SpaceFile};
use locahal::suite::{combined_report, run_suite, SuiteOptions};
use locahal::{Error, FiniteSpace, PointId};

#[derive(Parser)]
#[command(name = "locahal", version, about = "Dyadic cubes, local operators and maximal functions on finite quasi-metric spaces")]
struct Cli {
    /// Master seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; falls back to LOCAHAL_JOBS.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    #[command(subcommand)]
    Space(SpaceCmd),
    #[command(subcommand)]
    Dyadic(DyadicCmd),
    #[command(subcommand)]
    Envelope(EnvelopeCmd),
    #[command(subcommand)]
    Analysis(AnalysisCmd),
    #[command(subcommand)]
    Op(OpCmd),
    #[command(subcommand)]
    Bmo(BmoCmd),
    #[command(subcommand)]
    Maximal(MaximalCmd),
    /// Runs the acceptance battery on built-in spaces.
    Suite {
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SpaceIn {
    #[arg(long)]
    space: PathBuf,
    #[arg(long, default_value_t = 1)]
    n: u32,
}

#[derive(Args)]
struct ReportOut {
    /// Report path; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// Writes a generated space, e.g. `euclidean-grid:dim=1,side=20,levels=3`.
    Generate {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Checks the axioms and reports the level constants.
    Validate {
        #[arg(long)]
        space: PathBuf,
        #[command(flatten)]
        report: ReportOut,
    },
    Symmetrize {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum DyadicCmd {
    Build {
        #[command(flatten)]
        input: SpaceIn,
        #[arg(long)]
        delta: Option<f64>,
        /// Sweeps the nets in a random id order drawn from this seed.
        #[arg(long)]
        order_seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    Verify {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        space: PathBuf,
        #[command(flatten)]
        report: ReportOut,
    },
}

#[derive(Subcommand)]
enum EnvelopeCmd {
    Build {
        #[command(flatten)]
        input: SpaceIn,
        #[arg(long)]
        center: PointId,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        report: ReportOut,
    },
}

#[derive(Subcommand)]
enum AnalysisCmd {
    /// Order-alpha distance on Ω_n.
    Msdist {
        #[command(flatten)]
        input: SpaceIn,
        /// `formula`, `metric` or a number in (0,1].
        #[arg(long, default_value = "formula")]
        alpha: String,
        #[arg(long)]
        out: PathBuf,
    },
    Cutoff {
        #[command(flatten)]
        input: SpaceIn,
        #[arg(long)]
        center: PointId,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value = "formula")]
        alpha: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        report: ReportOut,
    },
}

#[derive(Args)]
struct Localized {
    #[command(flatten)]
    input: SpaceIn,
    #[arg(long)]
    kernel: PathBuf,
    #[arg(long)]
    center: PointId,
    #[arg(long)]
    radius: f64,
}

#[derive(Subcommand)]
enum OpCmd {
    Apply {
        #[command(flatten)]
        loc: Localized,
        #[arg(long)]
        f: PathBuf,
        /// Truncation; the full sum when absent.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, conflicts_with = "eps")]
        fractional: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        report: ReportOut,
    },
}

#[derive(Subcommand)]
enum BmoCmd {
    Modulus {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long)]
        u: PathBuf,
        #[arg(long = "r", required = true, value_delimiter = ',')]
        radii: Vec<f64>,
        /// Per-radius table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        report: ReportOut,
    },
    Commutator {
        #[command(flatten)]
        loc: Localized,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        f: PathBuf,
        /// `Σ K |a(x) − a(y)| f(y) μ(y)` instead of `T(af) − aTf`.
        #[arg(long)]
        positive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        report: ReportOut,
    },
}

#[derive(Subcommand)]
enum MaximalCmd {
    Run {
        #[command(flatten)]
        input: SpaceIn,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        report: ReportOut,
    },
    Vitali {
        #[command(flatten)]
        input: SpaceIn,
        /// JSON list of `{center, radius}`.
        #[arg(long)]
        family: PathBuf,
        #[command(flatten)]
        report: ReportOut,
    },
}

enum Failure {
    Core(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::{DisplayHelp, DisplayVersion};
            return match e.kind() {
                DisplayHelp | DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{}", e.render());
                    ExitCode::from(1)
                }
            };
        }
    };
    if let Err(e) = configure_jobs(cli.jobs) {
        return report_failure(e);
    }
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => report_failure(e),
    }
}

fn report_failure(e: Failure) -> ExitCode {
    match e {
        Failure::Core(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_check_failure() { 2 } else { 1 })
        }
        Failure::Usage(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn configure_jobs(flag: Option<usize>) -> Res<()> {
    let jobs = match flag {
        Some(j) => Some(j),
        None => match std::env::var("LOCAHAL_JOBS") {
            Ok(v) if !v.trim().is_empty() => {
                Some(v.trim().parse().map_err(|_| Failure::Usage(format!("LOCAHAL_JOBS must be a positive integer, got `{v}`")))?)
            }
            _ => None,
        },
    };
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Failure::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// Reads inputs and records their sha256 digests.
#[derive(Default)]
struct Inputs {
    digests: BTreeMap<String, String>,
}

impl Inputs {
    fn bytes(&mut self, role: &str, path: &Path) -> Res<Vec<u8>> {
        let data = std::fs::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        self.digests.insert(role.into(), format!("sha256:{}", hex::encode(Sha256::digest(&data))));
        Ok(data)
    }

    fn json<T: serde::de::DeserializeOwned>(&mut self, role: &str, path: &Path) -> Res<T> {
        let data = self.bytes(role, path)?;
        serde_json::from_slice(&data).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }

    fn space(&mut self, path: &Path) -> Res<FiniteSpace> {
        let file: SpaceFile = self.json("space", path)?;
        Ok(file.into_space()?)
    }

    fn function(&mut self, role: &str, path: &Path, len: usize) -> Res<Vec<f64>> {
        let data = self.bytes(role, path)?;
        read_function(&data, len).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }

    fn report(self) -> VerificationReport {
        let mut rep = VerificationReport::new();
        rep.input_digests = self.digests;
        rep
    }
}

/// `id,value` rows with an optional header; missing ids read as zero.
fn read_function(data: &[u8], len: usize) -> std::result::Result<Vec<f64>, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(data);
    let mut values = vec![0.0; len];
    let mut seen = vec![false; len];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != 2 {
            return Err(format!("line {}: expected `id,value`", line + 1));
        }
        let Ok(id) = rec[0].parse::<usize>() else {
            if line == 0 {
                continue;
            }
            return Err(format!("line {}: bad id `{}`", line + 1, &rec[0]));
        };
        let v: f64 = rec[1].parse().map_err(|_| format!("line {}: bad value `{}`", line + 1, &rec[1]))?;
        if id >= len {
            return Err(format!("line {}: id {id} outside 0..{len}", line + 1));
        }
        if std::mem::replace(&mut seen[id], true) {
            return Err(format!("line {}: duplicate id {id}", line + 1));
        }
        values[id] = v;
    }
    Ok(values)
}

fn write_function(path: &Path, values: &[f64]) -> Res<()> {
    write_table(path, &["id", "value"], values.iter().enumerate().map(|(i, v)| vec![i.to_string(), v.to_string()]))
}

fn write_table(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Res<()> {
    let io = |e: csv::Error| Failure::Usage(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Res<()> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)? + "\n";
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Writes the report and returns whether every exact check passed.
fn emit(rep: &VerificationReport, out: &ReportOut) -> Res<bool> {
    for f in rep.failures() {
        eprintln!("FAIL {} [{}]: {}", f.name, f.anchor, f.witness.as_ref().map(Value::to_string).unwrap_or_default());
    }
    match &out.report {
        Some(p) => write_json(p, rep)?,
        None => println!("{}", serde_json::to_string_pretty(rep).map_err(Error::from)?),
    }
    Ok(rep.passed())
}

fn parse_alpha(s: &str) -> Res<AlphaChoice> {
    match s {
        "formula" => Ok(AlphaChoice::Formula),
        "metric" => Ok(AlphaChoice::Metric),
        x => x
            .parse()
            .map(AlphaChoice::Explicit)
            .map_err(|_| Failure::Usage(format!("--alpha expects formula, metric or a number, got `{x}`"))),
    }
}

fn dispatch(cli: Cli) -> Res<bool> {
    let seed = cli.seed;
    match cli.command {
        Command::Space(c) => space_cmd(c),
        Command::Dyadic(c) => dyadic_cmd(c),
        Command::Envelope(EnvelopeCmd::Build { input, center, radius, delta, out, report }) => {
            let mut inp = Inputs::default();
            let space = inp.space(&input.space)?;
            let opts = BuildOptions { delta, order_seed: None };
            let sys_n = DyadicSystem::for_space(&space, input.n, &opts)?;
            let sys_next = DyadicSystem::for_space(&space, input.n + 1, &BuildOptions::default())?;
            let env = build_envelope(&space, &sys_n, &sys_next, center, radius)?;
            if let Some(p) = out {
                write_json(&p, &env)?;
            }
            let mut rep = inp.report();
            rep.extend(verify_envelope(&env, &space));
            emit(&rep, &report)
        }
        Command::Analysis(c) => analysis_cmd(c),
        Command::Op(OpCmd::Apply { loc, f, eps, fractional, out, report }) => {
            let mut inp = Inputs::default();
            let (space, lk) = load_localized(&mut inp, &loc)?;
            let f = inp.function("f", &f, space.len())?;
            let tf = if fractional {
                apply_fractional(&space, &lk, &f)?
            } else if let Some(eps) = eps {
                apply_truncated(&space, &lk, &lk.base.truncation(), &f, eps)?
            } else {
                apply_singular(&space, &lk, &f)?
            };
            if let Some(p) = out {
                write_function(&p, &tf)?;
            }
            let op_anchor = if fractional { "Theorem frac lp-lq" } else { "Theorem L^p C^eta" };
            let mut rep = inp.report();
            rep.exact("output finite", op_anchor, tf.iter().all(|v| v.is_finite()), Some(json!(tf.iter().position(|v| !v.is_finite()))));
            rep.measured("operator output", op_anchor, &[
                ("f_l2", lp_norm(&f, space.weights(), 2.0)),
                ("tf_l2", lp_norm(&tf, space.weights(), 2.0)),
                ("domain_size", lk.domain().len() as f64),
            ]);
            emit(&rep, &report)
        }
        Command::Bmo(c) => bmo_cmd(c),
        Command::Maximal(c) => maximal_cmd(c),
        Command::Suite { quick, report } => {
            let outcomes = run_suite(SuiteOptions { quick, seed });
            for o in &outcomes {
                eprintln!("{}", o.line());
            }
            let rep = combined_report(&outcomes);
            let all = outcomes.iter().all(|o| o.passed());
            emit(&rep, &ReportOut { report })?;
            Ok(all)
        }
    }
}

fn space_cmd(c: SpaceCmd) -> Res<bool> {
    match c {
        SpaceCmd::Generate { spec, out } => {
            let g: Generator = spec.parse()?;
            SpaceFile::from_space(&generate(&g)?).write(&out)?;
            Ok(true)
        }
        SpaceCmd::Validate { space, report } => {
            let mut inp = Inputs::default();
            let s = inp.space(&space)?;
            let mut rep = inp.report();
            rep.exact("quasidistance axioms", "(H1)", true, None);
            let sep = s.check_separation();
            rep.exact("separation", "(H1)", sep.is_ok(), sep.err().map(|e| json!(e.to_string())));
            for n in 1..=s.max_level().max(1) {
                let c = estimate_constants(&s, n)?.constants;
                rep.measured(&format!("constants level {n}"), "(Hp 1)-(Hp 3)", &[("eps", c.eps), ("B", c.b), ("C", c.c), ("A", c.a)]);
            }
            if let Err(e) = ConstantsTable::estimate(&s, s.max_level().max(1)) {
                rep.exact("declared constants", "(Hp 1)-(Hp 3)", false, Some(json!(e.to_string())));
            }
            rep.measured("size", "(H1)", &[("points", s.len() as f64), ("measure", s.total_measure())]);
            emit(&rep, &report)
        }
        SpaceCmd::Symmetrize { space, out } => {
            let s = Inputs::default().space(&space)?;
            SpaceFile::from_space(&s.symmetrize()).write(&out)?;
            Ok(true)
        }
    }
}

fn dyadic_cmd(c: DyadicCmd) -> Res<bool> {
    match c {
        DyadicCmd::Build { input, delta, order_seed, out } => {
            let space = Inputs::default().space(&input.space)?;
            let sys = DyadicSystem::for_space(&space, input.n, &BuildOptions { delta, order_seed })?;
            write_json(&out, &sys)?;
            eprintln!("built {} scales, delta = {}", sys.k_max(), sys.params.delta);
            Ok(true)
        }
        DyadicCmd::Verify { system, space, report } => {
            let mut inp = Inputs::default();
            let space = inp.space(&space)?;
            let sys: DyadicSystem = inp.json("system", &system)?;
            let mut rep = inp.report();
            rep.extend(verify_properties(&sys, &space));
            emit(&rep, &report)
        }
    }
}

fn analysis_cmd(c: AnalysisCmd) -> Res<bool> {
    match c {
        AnalysisCmd::Msdist { input, alpha, out } => {
            let space = Inputs::default().space(&input.space)?;
            let b_n = ConstantsTable::estimate(&space, input.n)?.get(input.n)?.b;
            let d = order_alpha_distance(&space, input.n, b_n, parse_alpha(&alpha)?)?;
            let m = d.members.len();
            let rows: Vec<&[f64]> = if m == 0 { Vec::new() } else { d.matrix.chunks(m).collect() };
            write_json(
                &out,
                &json!({
                    "alpha": d.alpha,
                    "members": d.members.as_slice(),
                    "matrix": rows,
                    "c_low": d.c_low,
                    "c_high": d.c_high,
                    "order_constant": d.order_constant,
                }),
            )?;
            match d.chain_triangle_violation() {
                None => Ok(true),
                Some(w) => {
                    eprintln!("FAIL chain triangle inequality at {w:?}");
                    Ok(false)
                }
            }
        }
        AnalysisCmd::Cutoff { input, center, radius, alpha, out, report } => {
            let mut inp = Inputs::default();
            let space = inp.space(&input.space)?;
            let b_n = ConstantsTable::estimate(&space, input.n)?.get(input.n)?.b;
            let row = order_alpha_row(&space, input.n, b_n, parse_alpha(&alpha)?, center)?;
            let phi = cutoff_from_row(&space, &row, radius)?;
            if let Some(p) = out {
                write_function(&p, &phi.values)?;
            }
            let mut rep = inp.report();
            let inner = space.points().find(|&x| row.dist[x] < phi.inner_radius() && phi.values[x] != 1.0);
            rep.exact("plateau", "Prop cutoff", inner.is_none(), Some(json!(inner)));
            let outer = space.points().find(|&x| row.dist[x] >= phi.outer_radius() && phi.values[x] != 0.0);
            rep.exact("support", "Prop cutoff", outer.is_none(), Some(json!(outer)));
            rep.measured("cutoff constants", "Prop cutoff", &[
                ("alpha", phi.alpha),
                ("c1", phi.c1),
                ("c2", phi.c2),
                ("holder_constant", phi.holder_constant),
            ]);
            emit(&rep, &report)
        }
    }
}

fn load_localized(inp: &mut Inputs, loc: &Localized) -> Res<(FiniteSpace, locahal::operators::LocalizedKernel)> {
    let space = inp.space(&loc.input.space)?;
    let kernel: KernelSpec = inp.json("kernel", &loc.kernel)?;
    let n = loc.input.n;
    let table = ConstantsTable::estimate(&space, n + 1)?;
    let lk = localize(&space, &table, n, &kernel, loc.center, loc.radius, &LocalizeOptions::default())?;
    Ok((space, lk))
}

fn bmo_cmd(c: BmoCmd) -> Res<bool> {
    match c {
        BmoCmd::Modulus { space, n, u, radii, csv, report } => {
            let mut inp = Inputs::default();
            let s = inp.space(&space)?;
            let u = inp.function("u", &u, s.len())?;
            let table = ConstantsTable::estimate(&s, n + 1)?;
            let m = bmo_loc_table(&s, &table, &u, n, &radii)?;
            if let Some(p) = csv {
                write_table(&p, &["r", "eta"], m.radii.iter().zip(&m.values).map(|(r, v)| vec![r.to_string(), v.to_string()]))?;
            }
            let mut rep = inp.report();
            for (r, v) in m.radii.iter().zip(&m.values) {
                rep.measured(&format!("eta* at r = {r}"), "Definition local BMO", &[("r", *r), ("eta", *v)]);
            }
            let monotone = m.values.windows(2).zip(m.radii.windows(2)).all(|(v, r)| (r[0] <= r[1]) <= (v[0] <= v[1]));
            rep.exact("eta* nondecreasing in r", "Definition local BMO", monotone, Some(json!(m.values)));
            rep.measured("oscillation", "Definition local BMO", &[("norm", m.norm), ("median_factor", m.median_factor)]);
            emit(&rep, &report)
        }
        BmoCmd::Commutator { loc, a, f, positive, out, report } => {
            let mut inp = Inputs::default();
            let (space, lk) = load_localized(&mut inp, &loc)?;
            let a = inp.function("a", &a, space.len())?;
            let f = inp.function("f", &f, space.len())?;
            let cf = if positive {
                positive_commutator_apply(&space, &lk, &a, &f)?
            } else {
                commutator_matrix(&lk.operator(&space), &a).apply(&f)
            };
            if let Some(p) = out {
                write_function(&p, &cf)?;
            }
            let mut rep = inp.report();
            let dom = lk.domain();
            let constant = dom.iter().all(|x| a[x] == a[dom.as_slice()[0]]);
            if constant {
                let w = cf.iter().position(|v| *v != 0.0);
                rep.exact("constant symbol annihilates", "Thm commutator", w.is_none(), Some(json!(w)));
            }
            rep.measured("commutator output", "Thm commutator", &[
                ("f_l2", lp_norm(&f, space.weights(), 2.0)),
                ("cf_l2", lp_norm(&cf, space.weights(), 2.0)),
            ]);
            emit(&rep, &report)
        }
    }
}

fn maximal_cmd(c: MaximalCmd) -> Res<bool> {
    match c {
        MaximalCmd::Run { input, f, out, report } => {
            let mut inp = Inputs::default();
            let space = inp.space(&input.space)?;
            let f = inp.function("f", &f, space.len())?;
            let table = ConstantsTable::estimate(&space, input.n)?;
            let m = local_maximal(&space, &table, input.n, &f)?;
            if let Some(p) = out {
                write_function(&p, &m.values)?;
            }
            let mut rep = inp.report();
            let w = space.omega(input.n).iter().find(|&x| m.values[x] < f[x].abs());
            rep.exact("Mf >= |f| on Omega_n", "Thm maximal (a)", w.is_none(), Some(json!(w)));
            rep.measured("maximal radius", "Thm maximal (a)", &[("r_n", m.r_n)]);
            emit(&rep, &report)
        }
        MaximalCmd::Vitali { input, family, report } => {
            let mut inp = Inputs::default();
            let space = inp.space(&input.space)?;
            let fam: Vec<FamilyBall> = inp.json("family", &family)?;
            let table = ConstantsTable::estimate(&space, input.n)?;
            let v = vitali_select(&space, &table, input.n, &fam)?;
            let mut rep = inp.report();
            rep.exact("selected balls disjoint", "Lemma Vitali cover lemma", v.disjoint, Some(json!(v.selected)));
            rep.exact("K-dilations cover", "Lemma Vitali cover lemma", v.covered, Some(json!(v.witness)));
            rep.measured("selection", "Lemma Vitali cover lemma", &[
                ("K", v.k),
                ("selected", v.selected.len() as f64),
                ("selected_measure", v.selected_measure),
                ("union_measure", v.union_measure),
                ("c", v.c),
            ]);
            emit(&rep, &report)
        }
    }
}
