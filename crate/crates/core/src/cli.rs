//! Command-line front end. `run` is the whole program minus argument
//! parsing, so it can be driven in-process by tests.
//!
//! Exit codes: 0 all checks passed, 1 some verification failed, 2 usage or
//! internal error.

use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::cache::{self, CACHE_VERSION};
use crate::error::{Error, Result};
use crate::fibration::{
    common_tangent_spread, fibrate_ovoid, find_regular_spread_seeded, is_regular_spread, Fibration,
    RegularityMode, SingerContext, Spread, SpreadSearch,
};
use crate::gfield::ExtFieldCtx;
use crate::ovoids::{elliptic_quadric, tits_ovoid, Ovoid};
use crate::projspace::Geometry;
use crate::verify::{
    mutate_fibration, mutate_ovoid, verify_codes_for_member, verify_lemma5, verify_main_theorem_sweep,
    verify_proposition1, verify_segre, VerificationReport,
};

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Build (or load) PG(3,q) and print its sizes.
    Geometry,
    /// Construct an ovoidal fibration and print its members and spread.
    Fibration,
    /// Run verification suites.
    Verify,
    /// Search the tangent complex of an ovoid for a regular spread.
    SearchSpread,
    /// Geometry, fibration and every suite.
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Prop1,
    Lemma5,
    Main,
    Codes,
    Segre,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OvoidChoice {
    /// T-orbits of the Singer group; no search needed.
    Singer,
    Elliptic,
    Tits,
}

#[derive(Parser, Clone, Debug)]
#[command(name = "ovoidlab", version, about = "Ovoids, Singer fibrations and dual grids in PG(3,2^n)")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// q = 2^n.
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=16))]
    pub n: u32,
    #[arg(long, global = true, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, env = "OVOIDLAB_CACHE")]
    pub cache_dir: Option<PathBuf>,
    /// Node budget for spread searches.
    #[arg(long, global = true, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    /// Allow n above the desk-scale guard.
    #[arg(long, global = true)]
    pub force: bool,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = OvoidChoice::Singer)]
    pub ovoid: OvoidChoice,
    /// Apply canned corruption k (1-3) to every suite input.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=3))]
    pub mutation: Option<u64>,
}

struct Output {
    value: Value,
    text: String,
    pass: bool,
}

struct Ctx {
    g: Geometry,
    sc: SingerContext,
    tfib: Fibration,
}

fn context(cfg: &RunConfig) -> Result<Ctx> {
    eprintln!("building PG(3,{})", 1u64 << cfg.n);
    let g = cache::load_or_build(cfg.cache_dir.as_deref(), cfg.n, cfg.force)?;
    let ext = ExtFieldCtx::new(cfg.n)?;
    let sc = SingerContext::new(&g, &ext);
    let tfib = sc.t_orbit_fibration(&g);
    Ok(Ctx { g, sc, tfib })
}

fn ovoid_name(o: OvoidChoice) -> &'static str {
    match o {
        OvoidChoice::Singer => "singer",
        OvoidChoice::Elliptic => "elliptic",
        OvoidChoice::Tits => "tits",
    }
}

fn selected_ovoid(cfg: &RunConfig, ctx: &Ctx) -> Result<Ovoid> {
    match cfg.ovoid {
        OvoidChoice::Singer => Ok(ctx.tfib.ovoids()[0].clone()),
        OvoidChoice::Elliptic => elliptic_quadric(&ctx.g),
        OvoidChoice::Tits => tits_ovoid(&ctx.g),
    }
}

fn search(cfg: &RunConfig, ctx: &Ctx, theta: &Ovoid) -> Result<SpreadSearch> {
    let lines = theta.tangent_lines(&ctx.g)?;
    Ok(find_regular_spread_seeded(&lines, &ctx.g, cfg.budget, true, cfg.seed))
}

/// The fibration chosen by --ovoid: Singer T-orbits directly, otherwise the
/// K-orbit of the ovoid along a regular spread found in its tangent complex.
fn selected_fibration(cfg: &RunConfig, ctx: &Ctx) -> Result<(Fibration, Option<SpreadSearch>)> {
    if cfg.ovoid == OvoidChoice::Singer {
        return Ok((ctx.tfib.clone(), None));
    }
    let theta = selected_ovoid(cfg, ctx)?;
    let res = search(cfg, ctx, &theta)?;
    if !res.found {
        return Err(Error::SearchExhausted { nodes: res.nodes });
    }
    let spread = Spread::new(res.spread.clone(), &ctx.g)?;
    Ok((fibrate_ovoid(&theta, &spread, &ctx.g)?, Some(res)))
}

fn maybe_mutate(cfg: &RunConfig, fib: Fibration, g: &Geometry) -> Result<Fibration> {
    match cfg.mutation {
        Some(k) => mutate_fibration(&fib, k as usize, g),
        None => Ok(fib),
    }
}

fn geometry_json(g: &Geometry) -> Value {
    json!({
        "n": g.n(),
        "q": g.q(),
        "modulus": g.field().modulus(),
        "generator": g.field().generator().0,
        "points": g.num_points(),
        "lines": g.num_lines(),
        "planes": g.num_planes(),
        "cache_version": CACHE_VERSION,
    })
}

fn fibration_json(cfg: &RunConfig, ctx: &Ctx) -> Result<Value> {
    let (fib, res) = selected_fibration(cfg, ctx)?;
    let spread = common_tangent_spread(&fib, &ctx.g)?;
    let regular = is_regular_spread(&spread, &ctx.g, RegularityMode::Exhaustive);
    let members: Vec<&[usize]> = fib.ovoids().iter().map(|o| o.points()).collect();
    Ok(json!({
        "ovoid": ovoid_name(cfg.ovoid),
        "members": members,
        "spread": spread.lines(),
        "regular": regular,
        "search_nodes": res.map(|r| r.nodes),
    }))
}

fn suites(s: Suite) -> &'static [Suite] {
    use Suite::*;
    match s {
        All => &[Prop1, Lemma5, Main, Codes, Segre],
        Prop1 => &[Prop1],
        Lemma5 => &[Lemma5],
        Main => &[Main],
        Codes => &[Codes],
        Segre => &[Segre],
    }
}

fn run_suites(cfg: &RunConfig, ctx: &Ctx) -> Result<Vec<VerificationReport>> {
    let list = suites(cfg.suite);
    let g = &ctx.g;
    let needs_selected = list.iter().any(|s| matches!(s, Suite::Prop1 | Suite::Main));
    let fib = if needs_selected {
        Some(maybe_mutate(cfg, selected_fibration(cfg, ctx)?.0, g)?)
    } else {
        None
    };
    let tfib = maybe_mutate(cfg, ctx.tfib.clone(), g)?;
    let mut out = Vec::new();
    for &s in list {
        eprintln!("suite {s:?}");
        let r = match s {
            Suite::Prop1 => verify_proposition1(fib.as_ref().expect("built above"), g),
            Suite::Lemma5 => verify_lemma5(&ctx.sc, &tfib, g),
            Suite::Main => verify_main_theorem_sweep(fib.as_ref().expect("built above"), g),
            Suite::Codes => verify_codes_for_member(&tfib, 0, &ctx.sc, g),
            Suite::Segre => {
                let theta = selected_ovoid(cfg, ctx)?;
                let theta = match cfg.mutation {
                    Some(k) => mutate_ovoid(&theta, k as usize, g)?,
                    None => theta,
                };
                verify_segre(&theta, g)
            }
            Suite::All => unreachable!("expanded by suites()"),
        };
        out.push(r);
    }
    Ok(out)
}

fn render_reports(reports: &[VerificationReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let verdict = if r.pass { "PASS" } else { "FAIL" };
        s += &format!("{} q={}: {verdict} ({} ms)\n", r.theorem, r.q, r.elapsed_ms);
        if let Some(a) = &r.advisory {
            s += &format!("  advisory: {a}\n");
        }
        for (k, v) in &r.counters {
            s += &format!("  {k} = {v}\n");
        }
        for f in &r.failures {
            s += &format!("  failure: {} {:?}\n", f.witness, f.indices);
        }
    }
    s
}

/// Flat "path = value" rendering of a JSON value.
fn render_value(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                render_value(&p, x, out);
            }
        }
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
            *out += &format!("{prefix} = [{}]\n", items.join(" "));
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                render_value(&format!("{prefix}[{i}]"), x, out);
            }
        }
        _ => *out += &format!("{prefix} = {v}\n"),
    }
}

fn plain(value: Value, pass: bool) -> Output {
    let mut text = String::new();
    render_value("", &value, &mut text);
    Output { value, text, pass }
}

fn execute(cfg: &RunConfig) -> Result<Output> {
    let ctx = context(cfg)?;
    match cfg.command {
        Command::Geometry => Ok(plain(geometry_json(&ctx.g), true)),
        Command::Fibration => Ok(plain(fibration_json(cfg, &ctx)?, true)),
        Command::SearchSpread => {
            let theta = selected_ovoid(cfg, &ctx)?;
            let res = search(cfg, &ctx, &theta)?;
            Ok(plain(serde_json::to_value(res).expect("plain data"), true))
        }
        Command::Verify => {
            let reports = run_suites(cfg, &ctx)?;
            let pass = reports.iter().all(|r| r.pass);
            Ok(Output {
                text: render_reports(&reports),
                value: serde_json::to_value(&reports).expect("plain data"),
                pass,
            })
        }
        Command::All => {
            let geometry = geometry_json(&ctx.g);
            let fibration = fibration_json(cfg, &ctx)?;
            let all = RunConfig {
                suite: Suite::All,
                ..cfg.clone()
            };
            let reports = run_suites(&all, &ctx)?;
            let pass = reports.iter().all(|r| r.pass);
            let mut text = String::new();
            render_value("geometry", &geometry, &mut text);
            render_value("fibration", &fibration, &mut text);
            text += &render_reports(&reports);
            Ok(Output {
                value: json!({ "geometry": geometry, "fibration": fibration, "reports": reports }),
                text,
                pass,
            })
        }
    }
}

/// Execute `cfg`, writing the result to `out`; returns the exit code.
pub fn run_to(cfg: &RunConfig, out: &mut dyn Write) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0) as usize)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 2;
        }
    };
    match pool.install(|| execute(cfg)) {
        Ok(o) => {
            let body = match cfg.format {
                Format::Json => serde_json::to_string_pretty(&o.value).expect("plain data") + "\n",
                Format::Text => o.text,
            };
            if out.write_all(body.as_bytes()).and_then(|_| out.flush()).is_err() {
                return 2;
            }
            if o.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn run(cfg: &RunConfig) -> i32 {
    run_to(cfg, &mut io::stdout().lock())
}

/// Parse `args` (including the program name) and run.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(cfg) => run_to(&cfg, out),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
