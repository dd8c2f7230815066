//! Command line front end. Every command prints one JSON document (or CSV)
//! carrying `"schema": "v1"`.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::acceptance::{self, Status};
use crate::audit::{self, AuditConfig, SeqSample, Search};
use crate::blocks::{self, Block};
use crate::error::{Error, Result};
use crate::families::{self, Family};
use crate::norms::{self, hxi, Scalar, SeqNormSpec, Space, Target};
use crate::ordinal::Ordinal;
use crate::sets::{FiniteSet, Prefix};
use crate::vector::{fmt_rational, parse_rational, Vector};
use crate::witnesses::{self, NestedChain};

pub const SCHEMA: &str = "v1";

#[derive(Parser, Debug)]
#[command(name = "schreier", version, about = "Schreier families, repeated averages and sequence-space norms")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Seed for every randomized step.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Work budget for family oracles and norm searches.
    #[arg(long, env = "SCHREIER_BUDGET", global = true)]
    pub budget: Option<u64>,
    /// Floating point tolerance for approximate comparisons.
    #[arg(long, default_value_t = 1e-9, global = true)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Membership, maximality, segments, decompositions and ranks.
    #[command(subcommand)]
    Family(FamilyCmd),
    /// Probability blocks.
    #[command(subcommand)]
    Block(BlockCmd),
    /// Norms, dual norms, domination constants and norming sets.
    #[command(subcommand)]
    Norm(NormCmd),
    /// Goodness, stability and the Gamma profile.
    #[command(subcommand)]
    Audit(AuditCmd),
    /// Constructive witnesses.
    #[command(subcommand)]
    Witness(WitnessCmd),
    /// Runs the acceptance suite.
    Selftest {
        /// Comma-separated criterion ids; all by default.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

#[derive(Subcommand, Debug)]
pub enum FamilyCmd {
    Contains {
        #[arg(long)]
        fam: String,
        #[arg(long)]
        set: String,
    },
    Maximal {
        #[arg(long)]
        fam: String,
        #[arg(long)]
        set: String,
    },
    /// `M|F` for a prefix `M`.
    Segment {
        #[arg(long)]
        fam: String,
        #[arg(long)]
        prefix: String,
    },
    /// Splits a set into successive maximal members.
    Decompose {
        #[arg(long)]
        fam: String,
        #[arg(long)]
        set: String,
    },
    /// Members inside `{1..n}`.
    Materialize {
        #[arg(long)]
        fam: String,
        #[arg(long)]
        n: u64,
    },
    /// Cantor-Bendixson rank of the truncation to `{1..n}`.
    Rank {
        #[arg(long)]
        fam: String,
        #[arg(long)]
        n: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum BlockCmd {
    Measure {
        #[arg(long)]
        block: String,
        #[arg(long)]
        prefix: String,
        #[arg(long)]
        n: u64,
    },
    /// The first `count` convex block vectors of a sample.
    Convex {
        #[arg(long)]
        block: String,
        #[arg(long)]
        prefix: String,
        #[arg(long)]
        count: u64,
        #[arg(long)]
        sample: PathBuf,
    },
    /// `sup_n P_{M,n}(E)`.
    Mass {
        #[arg(long)]
        block: String,
        #[arg(long)]
        prefix: String,
        #[arg(long)]
        set: String,
    },
    /// Checks the block axioms on random prefixes.
    Verify {
        #[arg(long)]
        block: String,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum NormCmd {
    Eval {
        #[arg(long)]
        space: String,
        #[arg(long)]
        vector: String,
    },
    Dual {
        #[arg(long)]
        space: String,
        #[arg(long)]
        vector: String,
    },
    /// Domination constant of a vector sequence by a target basis.
    Dominate {
        #[arg(long)]
        space: String,
        /// `c0`, `lp(p)` or a space descriptor.
        #[arg(long)]
        target: String,
        /// Vectors separated by `;`.
        #[arg(long, conflicts_with = "sample")]
        vectors: Option<String>,
        #[arg(long)]
        sample: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        shift: u64,
    },
    Normingset {
        #[arg(long)]
        space: String,
        #[arg(long)]
        n: u64,
    },
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[arg(long)]
    block: String,
    #[arg(long, default_value = "0")]
    zeta: String,
    #[arg(long, default_value_t = 0)]
    shift: u64,
    #[arg(long)]
    space: String,
    #[arg(long, default_value = "c0")]
    target: String,
    /// JSON list of sparse vectors; the canonical basis by default.
    #[arg(long)]
    sample: Option<PathBuf>,
    #[arg(long, default_value = "1,2,...")]
    prefix: String,
    #[arg(long, default_value_t = 10)]
    truncation: usize,
}

#[derive(Subcommand, Debug)]
pub enum AuditCmd {
    Goodness {
        #[command(flatten)]
        common: AuditArgs,
        #[arg(long)]
        set: String,
    },
    Stability {
        #[command(flatten)]
        common: AuditArgs,
    },
    /// Looks for a maximal admissible chain with value at least `threshold`.
    Search {
        #[command(flatten)]
        common: AuditArgs,
        #[arg(long)]
        threshold: String,
    },
    Profile {
        #[command(flatten)]
        common: AuditArgs,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        zetas: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        ks: Vec<u64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum WitnessCmd {
    /// Diagonal of a nested chain and the inclusion check below a limit.
    Diag {
        /// Prefixes separated by `;`.
        #[arg(long)]
        prefixes: String,
        #[arg(long)]
        zeta: String,
        #[arg(long, default_value = "S(1)")]
        fam: String,
        #[arg(long, default_value_t = 12)]
        ground: u64,
    },
    Pair {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long)]
        m: String,
        #[arg(long)]
        l: String,
        #[arg(long)]
        k: String,
        #[arg(long, default_value_t = 0)]
        gap: u64,
    },
    Cover {
        #[arg(long, default_value = "1")]
        xi: String,
        #[arg(long, default_value = "1")]
        mu: String,
        #[arg(long)]
        prefix: String,
        /// A member of the composed family inside the thinned set; only
        /// the thinned set is reported when omitted.
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value_t = 10)]
        count: u64,
    },
}

/// Output of a command: the JSON document and whether all checks passed.
struct Output {
    doc: Value,
    ok: bool,
}

impl Output {
    fn ok(doc: Value) -> Self {
        Output { doc, ok: true }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code with the text for standard output and standard error.
pub fn run<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return if code == 0 { (0, e.to_string(), String::new()) } else { (2, String::new(), e.to_string()) };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let mut doc = out.doc;
            if let Value::Object(map) = &mut doc {
                map.insert("schema".into(), json!(SCHEMA));
            }
            (if out.ok { 0 } else { 1 }, render(&doc, cli.format), String::new())
        }
        Err(e @ Error::Parse(_)) => (2, String::new(), format!("usage error: {e}\n")),
        Err(e) => (1, String::new(), format!("error: {e}\n")),
    }
}

fn render(doc: &Value, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(doc).expect("serializable")),
        Format::Csv => to_csv(doc),
    }
}

/// Rows come from the `rows` array if present, otherwise the document
/// itself is one row. Nested values are written as compact JSON.
fn to_csv(doc: &Value) -> String {
    let rows: Vec<&Map<String, Value>> = match doc.get("rows") {
        Some(Value::Array(items)) => items.iter().filter_map(Value::as_object).collect(),
        _ => doc.as_object().into_iter().collect(),
    };
    let header: BTreeSet<&String> = rows.iter().flat_map(|r| r.keys()).collect();
    let mut out = header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(",");
    out.push('\n');
    for r in rows {
        let line: Vec<String> = header
            .iter()
            .map(|h| match r.get(*h) {
                None | Some(Value::Null) => String::new(),
                Some(Value::String(s)) => csv_field(s),
                Some(v) => csv_field(&v.to_string()),
            })
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn scalar_json(s: &Scalar) -> Value {
    json!({ "value": s.to_string(), "approx": s.to_f64(), "exact": s.is_exact() })
}

fn set_json(f: &FiniteSet) -> Value {
    json!(f.as_slice())
}

fn parse_set(text: &str) -> Result<FiniteSet> {
    FiniteSet::parse(text)
}

fn parse_target(text: &str) -> Result<Target> {
    let t = text.trim();
    if t == "c0" {
        return Ok(Target::c0());
    }
    let inner = t.strip_prefix("lp(").and_then(|r| r.strip_suffix(')')).or_else(|| t.strip_prefix('l').filter(|r| r.chars().all(|c| c.is_ascii_digit() || c == '/')));
    if let Some(p) = inner {
        let p = parse_rational(p)?;
        if p < BigRational::from_integer(1.into()) {
            return Err(Error::Parse(format!("lp needs p >= 1, got {p}")));
        }
        return Ok(Target::Lp(Some(p)));
    }
    Ok(Target::Basis(Space::parse(t)?))
}

fn read_sample(path: &PathBuf) -> Result<Vec<Vector>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let items = value.as_array().ok_or_else(|| Error::Parse("sample file must hold a JSON list".into()))?;
    items
        .iter()
        .map(|item| {
            let obj = item.as_object().ok_or_else(|| Error::Parse("each sample vector is an object {index: coefficient}".into()))?;
            let mut parts = Vec::new();
            for (k, v) in obj {
                let coeff = match v {
                    Value::String(s) => s.clone(),
                    Value::Number(n) => n.to_string(),
                    _ => return Err(Error::Parse(format!("coefficient of {k} must be a number or \"p/q\""))),
                };
                parts.push(format!("{k}:{coeff}"));
            }
            Vector::parse(&parts.join(","))
        })
        .collect()
}

fn execute(cli: &Cli) -> Result<Output> {
    if let Some(b) = cli.budget {
        // Read by the shared oracle on first use.
        std::env::set_var("SCHREIER_BUDGET", b.to_string());
    }
    let budget = cli.budget.unwrap_or(families::DEFAULT_BUDGET);
    match &cli.command {
        Command::Family(c) => family(c),
        Command::Block(c) => block(c, cli.seed),
        Command::Norm(c) => norm(c, cli.seed, budget, cli.tol),
        Command::Audit(c) => audit_cmd(c),
        Command::Witness(c) => witness(c),
        Command::Selftest { only } => selftest(only, cli.seed),
    }
}

fn family(c: &FamilyCmd) -> Result<Output> {
    Ok(Output::ok(match c {
        FamilyCmd::Contains { fam, set } => {
            json!({ "result": families::contains(&Family::parse(fam)?, &parse_set(set)?)? })
        }
        FamilyCmd::Maximal { fam, set } => {
            json!({ "result": families::is_maximal(&Family::parse(fam)?, &parse_set(set)?)? })
        }
        FamilyCmd::Segment { fam, prefix } => {
            let fam = Family::parse(fam)?;
            let seg = families::initial_segment(&fam, &Prefix::parse(prefix)?)?;
            let maximal = families::is_maximal(&fam, &seg)?;
            json!({ "result": set_json(&seg), "witness": { "maximal": maximal } })
        }
        FamilyCmd::Decompose { fam, set } => {
            let parts = families::decompose(&Family::parse(fam)?, &parse_set(set)?)?;
            json!({ "result": parts.iter().map(set_json).collect::<Vec<_>>() })
        }
        FamilyCmd::Materialize { fam, n } => {
            let e = families::materialize(&Family::parse(fam)?, *n, 1 << 22)?;
            let rows: Vec<Value> = e.sets().iter().map(|f| json!({ "set": f.to_string() })).collect();
            json!({ "count": e.len(), "ground": n, "rows": rows })
        }
        FamilyCmd::Rank { fam, n } => {
            json!({ "result": families::truncated_rank(&Family::parse(fam)?, *n, 1 << 22)?, "ground": n })
        }
    }))
}

fn block(c: &BlockCmd, seed: u64) -> Result<Output> {
    Ok(match c {
        BlockCmd::Measure { block, prefix, n } => {
            let p = Block::parse(block)?.measure(&Prefix::parse(prefix)?, *n)?;
            let rows: Vec<Value> = p.weights().iter().map(|(i, w)| json!({ "index": i, "weight": fmt_rational(w) })).collect();
            Output::ok(json!({ "support": set_json(&p.support()), "total": fmt_rational(&p.total()), "rows": rows }))
        }
        BlockCmd::Convex { block, prefix, count, sample } => {
            let seq = read_sample(sample)?;
            let out = Block::parse(block)?.convex_block(&Prefix::parse(prefix)?, *count, &seq)?;
            let rows: Vec<Value> = out.iter().enumerate().map(|(n, v)| json!({ "n": n + 1, "vector": v.to_string() })).collect();
            Output::ok(json!({ "rows": rows }))
        }
        BlockCmd::Mass { block, prefix, set } => {
            let mass = Block::parse(block)?.set_mass(&Prefix::parse(prefix)?, &parse_set(set)?)?;
            Output::ok(json!({ "result": fmt_rational(&mass) }))
        }
        BlockCmd::Verify { block, samples } => {
            let b = Block::parse(block)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cases: Vec<(Prefix, u64)> = (0..*samples).map(|_| blocks::random_sample_prefix(&b, &mut rng)).collect();
            let rep = blocks::verify_axioms(&b, &cases);
            let ok = rep.passed();
            Output { doc: json!({ "result": ok, "checks": rep.checks, "failures": rep.failures }), ok }
        }
    })
}

fn norm(c: &NormCmd, seed: u64, budget: u64, tol: f64) -> Result<Output> {
    Ok(match c {
        NormCmd::Eval { space, vector } => {
            let space = Space::parse(space)?;
            let x = Vector::parse(vector)?;
            let mut doc = scalar_json(&match &space {
                Space::HXi(h, xi) => hxi::norm(h, xi, &x, budget)?,
                s => s.norm(&x)?,
            });
            if let Space::Tsirelson(t) = &space {
                doc["certificate"] = json!(t.norm_with_functional(&x)?.1.to_string());
            }
            if let Space::HXi(h, xi) = &space {
                let sets = hxi::norm_with_sets(h, xi, &x, budget)?.1;
                doc["certificate"] = json!(sets);
            }
            Output::ok(doc)
        }
        NormCmd::Dual { space, vector } => {
            let space = Space::parse(space)?;
            let y = Vector::parse(vector)?;
            let d = norms::dual_norm(&space, &y)?;
            let Space::Dual(base, _) = &space else { unreachable!("dual_norm accepted a non-dual space") };
            let replays = d.replay(base, &y, tol)?;
            let mut doc = scalar_json(&d.value());
            doc["exact"] = json!(d.exact);
            doc["upper"] = scalar_json(&d.upper);
            doc["certificate"] = json!(d.certificate.to_string());
            doc["cuts"] = json!(d.cuts);
            doc["replays"] = json!(replays);
            Output { doc, ok: replays }
        }
        NormCmd::Dominate { space, target, vectors, sample, shift } => {
            let seq = match (vectors, sample) {
                (Some(v), _) => v.split(';').map(Vector::parse).collect::<Result<Vec<_>>>()?,
                (None, Some(path)) => read_sample(path)?,
                (None, None) => return Err(Error::Parse("pass --vectors or --sample".into())),
            };
            let spec = SeqNormSpec::new(Space::parse(space)?, parse_target(target)?, *shift);
            let d = norms::domination::domination_with_seed(&seq, &spec, seed)?;
            let mut doc = scalar_json(&d.value());
            doc["exact"] = json!(d.exact);
            doc["lower"] = scalar_json(&d.lower);
            doc["upper"] = scalar_json(&d.upper);
            doc["certificate"] = json!(d.coefficients.iter().map(fmt_rational).collect::<Vec<_>>());
            Output::ok(doc)
        }
        NormCmd::Normingset { space, n } => {
            let Space::Tsirelson(t) = Space::parse(space)? else {
                return Err(Error::Parse("normingset needs a T(mu=..,theta=..) space".into()));
            };
            let set = t.norming_set(*n, budget as usize)?;
            let rows: Vec<Value> = set.iter().map(|f| json!({ "functional": f.to_string() })).collect();
            Output::ok(json!({ "count": set.len(), "rows": rows }))
        }
    })
}

fn audit_config(a: &AuditArgs) -> Result<(AuditConfig, SeqSample)> {
    let space = Space::parse(&a.space)?;
    let sample = match &a.sample {
        Some(path) => SeqSample::new(read_sample(path)?, path.display().to_string(), &space)?,
        None => SeqSample::canonical(audit::MAX_PREFIX as u64 * 4),
    };
    let spec = SeqNormSpec::new(space, parse_target(&a.target)?, a.shift);
    let cfg = AuditConfig::new(Block::parse(&a.block)?, Ordinal::parse(&a.zeta)?, a.shift, spec, Prefix::parse(&a.prefix)?, a.truncation);
    Ok((cfg, sample))
}

fn chain_json(c: &audit::ChainMax) -> Value {
    let mut doc = scalar_json(&c.value);
    doc["exact"] = json!(c.exact);
    doc["witness"] = json!(c.witness.iter().map(set_json).collect::<Vec<_>>());
    doc["chains"] = json!(c.chains);
    doc
}

fn audit_cmd(c: &AuditCmd) -> Result<Output> {
    Ok(Output::ok(match c {
        AuditCmd::Goodness { common, set } => {
            let (cfg, sample) = audit_config(common)?;
            chain_json(&audit::goodness_constant(&parse_set(set)?, &cfg, &sample)?)
        }
        AuditCmd::Stability { common } => {
            let (cfg, sample) = audit_config(common)?;
            chain_json(&audit::stability_constant(&cfg, &sample)?)
        }
        AuditCmd::Search { common, threshold } => {
            let (cfg, sample) = audit_config(common)?;
            let d = Scalar::Exact(parse_rational(threshold)?);
            match audit::gamma_lower_search(&cfg, &sample, &d)? {
                Search::Found { blocks, value } => {
                    let replayed = audit::replay(&blocks, &cfg, &sample)?;
                    json!({
                        "result": "found",
                        "value": scalar_json(&value),
                        "witness": blocks.iter().map(set_json).collect::<Vec<_>>(),
                        "replayed": scalar_json(&replayed),
                    })
                }
                Search::Exhausted { max } => json!({ "result": "exhausted", "value": scalar_json(&max) }),
            }
        }
        AuditCmd::Profile { common, zetas, ks } => {
            let (cfg, sample) = audit_config(common)?;
            let zetas: Vec<Ordinal> = zetas.iter().map(|z| Ordinal::parse(z)).collect::<Result<_>>()?;
            let prof = audit::gamma_profile(&cfg, &zetas, ks, &sample)?;
            let rows: Vec<Value> = prof
                .iter()
                .map(|e| json!({ "zeta": e.zeta.to_string(), "k": e.k, "value": e.value.to_string(), "approx": e.value.to_f64(), "exact": e.exact }))
                .collect();
            json!({ "rows": rows })
        }
    }))
}

fn witness(c: &WitnessCmd) -> Result<Output> {
    Ok(match c {
        WitnessCmd::Diag { prefixes, zeta, fam, ground } => {
            let chain = NestedChain::new(prefixes.split(';').map(Prefix::parse).collect::<Result<_>>()?)?;
            let diag = witnesses::diagonalize(&chain)?;
            let rep = witnesses::diagonal_inclusion_check(&chain, &Ordinal::parse(zeta)?, &Family::parse(fam)?, *ground)?;
            let ok = rep.uncovered.is_empty();
            let covered: Vec<Value> = rep.covered.iter().map(|(f, k)| json!({ "set": set_json(f), "k": k })).collect();
            let doc = json!({
                "diagonal": diag.to_string(),
                "members": rep.members,
                "covered": covered,
                "uncovered": rep.uncovered.iter().map(set_json).collect::<Vec<_>>(),
                "result": ok,
            });
            Output { doc, ok }
        }
        WitnessCmd::Pair { p, q, m, l, k, gap } => {
            let w = witnesses::pair_witness(&Family::parse(p)?, &Family::parse(q)?, &Prefix::parse(m)?, &Prefix::parse(l)?, &Prefix::parse(k)?, *gap)?;
            Output::ok(json!({ "f": set_json(&w.f), "e": set_json(&w.e), "auxiliary": w.auxiliary.to_string(), "result": true }))
        }
        WitnessCmd::Cover { xi, mu, prefix, set, count } => {
            let (xi, mu) = (Ordinal::parse(xi)?, Ordinal::parse(mu)?);
            let m = Prefix::parse(prefix)?;
            let thin = witnesses::thin_for_cover(&xi, &m, *count)?;
            let mut doc = json!({ "t": thin.t.to_string() });
            if let Some(f) = set {
                let c = witnesses::block_cover(&xi, &mu, &m, &thin, &parse_set(f)?)?;
                doc["n"] = json!(c.n.to_string());
                doc["h"] = set_json(&c.h);
                doc["blocks"] = json!(c.blocks.iter().map(set_json).collect::<Vec<_>>());
                doc["result"] = json!(true);
            }
            Output::ok(doc)
        }
    })
}

fn selftest(only: &[u32], seed: u64) -> Result<Output> {
    let ids: Vec<u32> = if only.is_empty() { acceptance::ids().collect() } else { only.to_vec() };
    let entries = ids.iter().map(|&id| acceptance::run_one(id, seed)).collect::<Result<Vec<_>>>()?;
    let ok = entries.iter().all(|e| e.status != Status::Fail || !e.blocking);
    let rows: Vec<Value> = entries
        .iter()
        .map(|e| {
            json!({
                "id": e.id,
                "check": e.description,
                "status": e.status.to_string(),
                "value": e.value,
                "expected": e.expected,
                "tolerance": e.tolerance,
                "runtime_ms": e.runtime_ms as u64,
                "blocking": e.blocking,
                "detail": e.detail,
            })
        })
        .collect();
    Ok(Output { doc: json!({ "result": ok, "seed": seed, "rows": rows }), ok })
}
