//! Command-line frontend. `dispatch` is the whole program; the binary only
//! forwards `argv` and process streams to it.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::homalg::{self, FilteredComplex};
use crate::mult::{self, ContactKind, ContactSetting, EllipsoidModel, WitnessParams};
use crate::orbitmodel::{self, OrbitModel};
use crate::pathindex::{self, AnyPath, PathJson, Tolerances};
use crate::recurrence::{self, RecurrenceQuery};
use crate::shdim;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_EXHAUSTED: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "sympidx", version, about = "Symplectic index computations and index-recurrence certificates")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for randomized inputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Indices of a sampled or generated symplectic path.
    Index {
        #[arg(long)]
        path: String,
        /// Iterate the path k times first (generated paths only).
        #[arg(long, default_value_t = 1)]
        iterate: usize,
        /// Perturbation size for the upper and lower indices.
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
    },
    /// Exact iterated indices of orbit models.
    Iterate {
        #[arg(long)]
        orbits: String,
        #[arg(long, default_value_t = 10)]
        kmax: i64,
        /// Check the dynamical convexity inequalities up to kmax.
        #[arg(long)]
        dc: bool,
        /// Compare with indices of the synthesized path for k up to this bound.
        #[arg(long)]
        numeric: Option<i64>,
    },
    /// Search for and verify index-recurrence certificates.
    Recur {
        #[arg(long)]
        orbits: String,
        #[arg(long = "l0")]
        l0: i64,
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value_t = 1)]
        divisor: i64,
        #[arg(long, default_value_t = 1_000_000)]
        kmax: i64,
        #[arg(long, default_value_t = 3)]
        count: usize,
        /// Only require the divisor to divide the iterates.
        #[arg(long)]
        no_d_divisible: bool,
    },
    /// Spectral sequence pages and their collapse.
    Collapse {
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        complex: Option<String>,
        /// Generate a random complex with this many generators.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 4)]
        levels: i64,
        #[arg(long, default_value_t = 1)]
        r0: i64,
    },
    /// Symplectic homology dimension tables.
    Shdim {
        #[arg(long, value_enum)]
        manifold: ManifoldArg,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        range: String,
        #[arg(long)]
        check: bool,
    },
    /// Multiplicity bounds and ellipsoid checks.
    Mult {
        #[command(subcommand)]
        command: MultCommand,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ManifoldArg {
    Sphere,
    Stsn,
}

impl From<ManifoldArg> for ContactKind {
    fn from(m: ManifoldArg) -> Self {
        match m {
            ManifoldArg::Sphere => ContactKind::Sphere,
            ManifoldArg::Stsn => ContactKind::Stsn,
        }
    }
}

#[derive(Args, Debug)]
struct SettingArgs {
    #[arg(long, value_enum)]
    kind: ManifoldArg,
    #[arg(long)]
    n: i64,
    /// Defaults to n+1 for the sphere and n−1 for ST*S^n.
    #[arg(long)]
    q: Option<i64>,
    #[arg(long)]
    nondeg: bool,
}

impl SettingArgs {
    fn setting(&self) -> ContactSetting {
        let kind = ContactKind::from(self.kind);
        ContactSetting {
            kind,
            n: self.n,
            q: self.q.unwrap_or_else(|| ContactSetting::q_max(kind, self.n)),
            nondegenerate: self.nondeg,
        }
    }
}

#[derive(Subcommand, Debug)]
enum MultCommand {
    Bound {
        #[command(flatten)]
        setting: SettingArgs,
    },
    Ellipsoid {
        #[arg(long, value_delimiter = ',', required = true)]
        radii_sq: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long)]
        check_carriers: bool,
        #[arg(long)]
        check_limit: bool,
        /// Include the full spectral sequence in the report.
        #[arg(long)]
        list: bool,
        #[arg(long, default_value_t = 1e-9)]
        resonance_tol: f64,
        #[arg(long, default_value_t = 1e-3)]
        limit_tol: f64,
    },
    Witness {
        #[arg(long)]
        orbits: String,
        #[command(flatten)]
        setting: SettingArgs,
        #[arg(long = "l0", default_value_t = 2)]
        l0: i64,
        #[arg(long, default_value_t = 0.25)]
        eta: f64,
        #[arg(long, default_value_t = 1_000_000)]
        kmax: i64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub version: String,
}

struct Context<'a> {
    stdin: &'a mut dyn Read,
    inputs: Vec<InputDigest>,
    tol: Tolerances,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Lib(Error::InconsistentPages(_)) => EXIT_VERIFICATION,
            Failure::Lib(e) if e.is_numerical() => EXIT_NUMERICAL,
            Failure::Lib(_) => EXIT_INPUT,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Input(s) => s.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type Outcome = std::result::Result<(Value, i32), Failure>;

impl Context<'_> {
    fn read(&mut self, path: &str) -> std::result::Result<Vec<u8>, Failure> {
        let mut bytes = Vec::new();
        if path == "-" {
            self.stdin
                .read_to_end(&mut bytes)
                .map_err(|e| Failure::Input(format!("reading stdin: {e}")))?;
        } else {
            bytes = std::fs::read(path).map_err(|e| Failure::Input(format!("reading {path}: {e}")))?;
        }
        self.inputs.push(InputDigest { path: path.to_string(), sha256: hex(&Sha256::digest(&bytes)) });
        Ok(bytes)
    }

    fn json<T: DeserializeOwned>(&mut self, path: &str) -> std::result::Result<T, Failure> {
        let bytes = self.read(path)?;
        serde_json::from_slice(&bytes).map_err(|e| Failure::Input(format!("{path}: {e}")))
    }

    fn models(&mut self, path: &str) -> std::result::Result<Vec<OrbitModel>, Failure> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Models {
            List(Vec<OrbitModel>),
            Wrapped { models: Vec<OrbitModel> },
        }
        let models = match self.json::<Models>(path)? {
            Models::List(m) | Models::Wrapped { models: m } => m,
        };
        for m in &models {
            m.validate()?;
        }
        Ok(models)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn run_index(ctx: &mut Context, path: &str, iterate: usize, eps: f64) -> Outcome {
    let raw: PathJson = ctx.json(path)?;
    let any = AnyPath::try_from(&raw)?;
    if iterate == 0 {
        return Err(Failure::Input("--iterate must be positive".into()));
    }
    let report = match &any {
        AnyPath::Generated(g) => pathindex::index_report(&g.iterate(iterate), eps, &ctx.tol)?,
        AnyPath::Sampled(s) => pathindex::sampled_index_report(&s.iterate(iterate), &ctx.tol)?,
    };
    let consistent = match (report.rs_index, report.cz_index) {
        (Some(rs), Some(cz)) => rs == cz as f64,
        _ => true,
    };
    let code = if consistent { EXIT_OK } else { EXIT_VERIFICATION };
    Ok((json!({"report": report, "rs_matches_cz": consistent}), code))
}

fn run_iterate(ctx: &mut Context, orbits: &str, kmax: i64, dc: bool, numeric: Option<i64>) -> Outcome {
    if kmax < 1 {
        return Err(Failure::Input("--kmax must be positive".into()));
    }
    let models = ctx.models(orbits)?;
    let mut code = EXIT_OK;
    let mut out = Vec::new();
    for m in &models {
        let table: Vec<_> = (1..=kmax).map(|k| orbitmodel::iter_index(m, k)).collect::<Result<_, _>>()?;
        let mut entry = json!({"label": m.label, "half_dim": m.half_dim(), "iterates": table});
        if dc {
            let rep = orbitmodel::verify_dc_iteration(m, m.half_dim(), kmax)?;
            if !rep.holds {
                code = EXIT_VERIFICATION;
            }
            entry["dynamical_convexity"] = to_value(&rep);
        }
        if let Some(kn) = numeric {
            let path = orbitmodel::model_to_path(m, 400)?;
            let mut rows = Vec::new();
            for k in 1..=kn.max(1) {
                let rep = pathindex::index_report(&path.iterate(k as usize), 1e-3, &ctx.tol)?;
                let exact = orbitmodel::iter_index(m, k)?;
                let agree = (rep.mean_index - exact.mean).abs() < 1e-6
                    && rep.mu_minus == Some(exact.mu_minus)
                    && rep.mu_plus == Some(exact.mu_plus);
                if !agree {
                    code = EXIT_VERIFICATION;
                }
                rows.push(json!({"k": k, "numeric": rep, "agree": agree}));
            }
            entry["numeric"] = Value::Array(rows);
        }
        out.push(entry);
    }
    Ok((json!({ "models": out }), code))
}

#[allow(clippy::too_many_arguments)]
fn run_recur(
    ctx: &mut Context,
    orbits: &str,
    l0: i64,
    eta: f64,
    divisor: i64,
    kmax: i64,
    count: usize,
    d_divisible: bool,
) -> Outcome {
    let query = RecurrenceQuery {
        models: ctx.models(orbits)?,
        ell0: l0,
        eta,
        divisor,
        k_max: kmax,
        count,
        require_d_divisible: d_divisible,
    };
    let outcome = recurrence::find_recurrence(&query)?;
    let mut verified = Vec::new();
    let mut all_pass = true;
    for c in &outcome.certificates {
        let rep = recurrence::verify_certificate(c, &query.models, l0, eta)?;
        all_pass &= rep.passed;
        verified.push(json!({"certificate": c, "verification": rep}));
    }
    let code = if !all_pass {
        EXIT_VERIFICATION
    } else if outcome.exhausted {
        EXIT_EXHAUSTED
    } else {
        EXIT_OK
    };
    Ok((
        json!({
            "exhausted": outcome.exhausted,
            "scanned": outcome.scanned,
            "epsilon": outcome.epsilon,
            "effective_divisors": outcome.effective_divisors,
            "bounded_d": outcome.bounded_d,
            "certificates": verified,
        }),
        code,
    ))
}

fn run_collapse(ctx: &mut Context, complex: Option<&str>, random: Option<usize>, levels: i64, r0: i64, seed: u64) -> Outcome {
    let fc: FilteredComplex = match (complex, random) {
        (Some(path), _) => ctx.json(path)?,
        (None, Some(n)) => {
            if n == 0 || levels < 1 {
                return Err(Failure::Input("--random and --levels must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            homalg::random_filtered_complex(&mut rng, n, levels, 3).0
        }
        (None, None) => return Err(Failure::Input("either --complex or --random is required".into())),
    };
    let sp = homalg::pages(&fc)?;
    let col = homalg::collapse(&sp, r0)?;
    let h = homalg::homology(&col.dbar, &col.degrees())?;
    let einf = sp.infinity().map(|p| p.total_by_degree()).unwrap_or_default();
    let matches = h.dims.iter().all(|(d, &v)| einf.get(d).copied().unwrap_or(0) == v)
        && einf.iter().all(|(d, &v)| h.dims.get(d).copied().unwrap_or(0) == v);
    let code = if matches { EXIT_OK } else { EXIT_VERIFICATION };
    let pages: Vec<Value> = sp.pages.iter().map(|p| json!({"r": p.r, "dims": p.dims})).collect();
    Ok((
        json!({
            "complex": fc,
            "pages": pages,
            "stabilized_at": sp.stabilized_at,
            "collapsed": col,
            "homology": h.dims,
            "homology_matches_e_infinity": matches,
        }),
        code,
    ))
}

fn run_shdim(manifold: ManifoldArg, n: i64, range: &str, check: bool) -> Outcome {
    let range = shdim::parse_range(range)?;
    let mut code = EXIT_OK;
    let value = match manifold {
        ManifoldArg::Sphere => {
            let table = shdim::sphere_sh_dims(n, range)?;
            json!({"table": table})
        }
        ManifoldArg::Stsn => {
            let table = shdim::stsn_sh_dims_cases(n, range.clone())?;
            let mut v = json!({"table": table});
            if check {
                let cc = shdim::stsn_cross_check(n, range)?;
                if !cc.agree {
                    code = EXIT_VERIFICATION;
                }
                v["cross_check"] = to_value(&cc);
            }
            v
        }
    };
    Ok((value, code))
}

fn run_mult(ctx: &mut Context, cmd: &MultCommand) -> Outcome {
    match cmd {
        MultCommand::Bound { setting } => Ok((to_value(&mult::lower_bound(&setting.setting())?), EXIT_OK)),
        MultCommand::Ellipsoid { radii_sq, count, check_carriers, check_limit, list, resonance_tol, limit_tol } => {
            let e = EllipsoidModel::new(radii_sq.clone())?;
            let models = mult::ellipsoid_orbit_models(&e)?;
            let seq = mult::ellipsoid_spectral_invariants(&e, *count)?;
            let res = mult::resonance_check(&models, *resonance_tol)?;
            let mut code = if res.pass { EXIT_OK } else { EXIT_VERIFICATION };
            let mut v = json!({
                "ellipsoid": e,
                "models": models,
                "chat": e.chat(),
                "resonance": res,
                "last_invariant": seq.values.last(),
            });
            if *list {
                v["spectral_invariants"] = to_value(&seq);
            }
            if *check_carriers {
                let rep = mult::verify_carrier_indices(&e, *count)?;
                if !rep.passed {
                    code = EXIT_VERIFICATION;
                }
                v["carriers"] = json!({"failures": rep.failures, "passed": rep.passed, "checks": rep.checks});
            }
            if *check_limit {
                let rep = mult::chat_limit_check(&e, *count, *limit_tol)?;
                if !rep.within {
                    code = EXIT_VERIFICATION;
                }
                v["limit"] = to_value(&rep);
            }
            Ok((v, code))
        }
        MultCommand::Witness { orbits, setting, l0, eta, kmax } => {
            let models = ctx.models(orbits)?;
            let params = WitnessParams { ell0: *l0, eta: *eta, k_max: *kmax, ..WitnessParams::default() };
            let b = mult::mult_witness(&models, &setting.setting(), &params)?;
            let code = match &b.witness {
                None => EXIT_EXHAUSTED,
                Some(w) if !w.disjoint => EXIT_VERIFICATION,
                Some(_) => EXIT_OK,
            };
            Ok((to_value(&b), code))
        }
    }
}

/// Rounds to 15 significant digits and prints the shortest round-trip form.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    let s = if (1e-5..1e16).contains(&a) { format!("{rounded}") } else { format!("{rounded:e}") };
    if s.contains(['.', 'e']) {
        s
    } else {
        format!("{s}.0")
    }
}

fn write_json(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => out.push_str(&i.to_string()),
            (_, Some(u)) => out.push_str(&u.to_string()),
            _ => out.push_str(&format_real(n.as_f64().expect("finite number"))),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(x, indent + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push_str(": ");
                write_json(&m[*k], indent + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

fn write_text(v: &Value, prefix: &str, out: &mut String) {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            for k in keys {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                write_text(&m[k], &p, out);
            }
        }
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = a.iter().map(scalar_text).collect();
            out.push_str(&format!("{prefix} = [{}]\n", items.join(", ")));
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                write_text(x, &format!("{prefix}[{i}]"), out);
            }
        }
        _ => out.push_str(&format!("{prefix} = {}\n", scalar_text(v))),
    }
}

fn scalar_text(v: &Value) -> String {
    let mut s = String::new();
    match v {
        Value::String(x) => s.push_str(x),
        _ => write_json(v, 0, &mut s),
    }
    s
}

/// Deterministic rendering: sorted keys, reals to 15 significant digits.
pub fn emit_report(report: &Value, format: Format) -> Vec<u8> {
    let mut out = String::new();
    match format {
        Format::Json => write_json(report, 0, &mut out),
        Format::Text => write_text(report, "", &mut out),
    }
    if !out.ends_with('\n') {
        out.push('\n');
    }
    out.into_bytes()
}

/// Runs the program on `argv` (including the program name) and returns the exit code.
pub fn dispatch<I, T>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
        }
    };
    let mut ctx = Context { stdin, inputs: Vec::new(), tol: Tolerances::from_env() };
    let result = match &cli.command {
        Command::Index { path, iterate, eps } => run_index(&mut ctx, path, *iterate, *eps),
        Command::Iterate { orbits, kmax, dc, numeric } => run_iterate(&mut ctx, orbits, *kmax, *dc, *numeric),
        Command::Recur { orbits, l0, eta, divisor, kmax, count, no_d_divisible } => {
            run_recur(&mut ctx, orbits, *l0, *eta, *divisor, *kmax, *count, !no_d_divisible)
        }
        Command::Collapse { complex, random, levels, r0 } => {
            run_collapse(&mut ctx, complex.as_deref(), *random, *levels, *r0, cli.seed)
        }
        Command::Shdim { manifold, n, range, check } => run_shdim(*manifold, *n, range, *check),
        Command::Mult { command } => run_mult(&mut ctx, command),
    };
    let (value, code) = match result {
        Ok(x) => x,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            return f.code();
        }
    };
    let manifest = RunManifest {
        command: argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        inputs: ctx.inputs,
        tolerances: ctx.tol,
        seed: cli.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let report = json!({"manifest": manifest, "result": value, "exit_code": code});
    let bytes = emit_report(&report, cli.format);
    let written = match &cli.output {
        Some(p) => std::fs::write(p, &bytes).map_err(|e| format!("writing {}: {e}", p.display())),
        None => stdout.write_all(&bytes).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_INPUT;
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv: Vec<&str> = std::iter::once("sympidx").chain(args.iter().copied()).collect();
        let code = dispatch(argv, &mut std::io::empty(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn reals() {
        assert_eq!(format_real(1.0), "1.0");
        assert_eq!(format_real(0.1 + 0.2), "0.3");
        assert_eq!(format_real(std::f64::consts::PI), "3.14159265358979");
        assert_eq!(format_real(1e-20), "1e-20");
    }

    #[test]
    fn bound_command() {
        let (code, out, _) = run(&["mult", "bound", "--kind", "sphere", "--n", "4", "--q", "5"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"]["r"], 3);
    }

    #[test]
    fn unknown_flag_is_input_error() {
        let (code, _, err) = run(&["shdim", "--bogus"]);
        assert_eq!(code, EXIT_INPUT);
        assert!(!err.is_empty());
    }

    #[test]
    fn sorted_keys() {
        let v = json!({"b": 1, "a": {"d": 2.5, "c": [1, 2]}});
        let s = String::from_utf8(emit_report(&v, Format::Json)).unwrap();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.find("\"c\"").unwrap() < s.find("\"d\"").unwrap());
    }
}
