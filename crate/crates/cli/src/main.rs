//! `cf`: command-line front end for cf-forge.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use cf_forge::catalog::{self, CatalogEntry};
use cf_forge::cf::{
    act, check_measure_domain, check_minimal_domain, cylinder_measure, folner_defect, haar_totals, reduce, rn_cocycle,
    rn_derivative, same_point, telescope, validate_params, CFParams, CFPoint, ReductionSpec, Telescoping, ENUM_CAP,
};
use cf_forge::factors::{coset_compatibility, finite_factor_scan, total_ergodicity_scan, ScanOptions};
use cf_forge::json::{render, report};
use cf_forge::odometers::{
    cross_sections, isomorphism_check, normal_cover, odometer_act, odometer_compatibility, odometer_factor_map,
    rank_one_cover, rank_one_odometer_params, validate_chain, CosetChain, OdometerSpec,
};
use cf_forge::verdict::default_threshold;
use cf_forge::zstack::{columns, first_return_oracle, induced_base, spacers, FirstReturn, Induced};
use cf_forge::{rational, svg, CofiniteSubgroup, Error, GroupCtx, GroupElement, Q};

#[derive(Parser, Debug)]
#[command(name = "cf", version, about = "Exact (C,F)-constructions of rank-one group actions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(clap::Args, Debug, Default)]
struct Opts {
    /// Catalog entry supplying parameters and/or a chain.
    #[arg(long, global = true)]
    example: Option<String>,
    /// JSON object of catalog options, e.g. '{"p": "1/3"}'.
    #[arg(long, global = true)]
    options: Option<String>,
    /// JSON file with a parameter spec.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    #[arg(long, global = true, hide = true)]
    params_inline: Option<String>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Exact rational, e.g. 1/1000000.
    #[arg(long, global = true)]
    threshold: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    /// Cofinite subgroup, e.g. mod:4 or a JSON spec. Repeatable.
    #[arg(long, global = true)]
    subgroup: Vec<String>,
    #[arg(short = 'N', global = true)]
    big_n: Option<usize>,
    /// Chain spec: a catalog name, a JSON object or a JSON file.
    #[arg(long, global = true)]
    chain: Option<String>,
    /// Group element as JSON, e.g. 3 or [1,0,0].
    #[arg(long, global = true)]
    g: Option<String>,
    #[arg(long, global = true)]
    stage: Option<usize>,
    /// Point as JSON: {"base": n, "f": .., "tail": [..]}.
    #[arg(long, global = true)]
    point: Option<String>,
    #[arg(long, global = true)]
    other: Option<String>,
    /// Chain point as a JSON list of representatives.
    #[arg(long, global = true)]
    chain_point: Option<String>,
    /// Telescoping as JSON: [0,2,3], {"linear": 2} or {"compose": [l, m]}.
    #[arg(long, global = true)]
    telescoping: Option<String>,
    /// Reduction prefix A_1, A_2, … as a JSON list of lists.
    #[arg(long, global = true)]
    prefix: Option<String>,
    #[arg(long, global = true)]
    bound: Option<String>,
    #[arg(long, global = true)]
    level: Option<usize>,
    #[arg(long, global = true)]
    epsilon: Option<String>,
    #[arg(long, global = true)]
    l_max: Option<usize>,
    #[arg(long, global = true)]
    m_max: Option<usize>,
    #[arg(long, global = true)]
    window: Option<usize>,
    /// Number of seeded random points to sample.
    #[arg(long, global = true)]
    samples: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check the stage conditions up to --depth.
    Validate,
    /// μ([g]_stage) and ν_stage(F_stage).
    Measure,
    /// Apply --g to --point.
    Act,
    /// Radon–Nikodym cocycle between --point and --other.
    Rn,
    /// Telescope the parameters along --telescoping.
    Telescope,
    /// Reduce by --prefix and report the deficit sum against --bound.
    Reduce,
    /// Følner defects of F_n under --g, with domain checks.
    Folner,
    /// Haar measure totals up to -N.
    Haar,
    /// Series of outside masses for one or more --subgroup.
    FactorSum,
    /// Search for a finite factor through --subgroup.
    FactorScan,
    /// Total ergodicity scan over the given --subgroup list.
    TotalErgodicity,
    /// Odometer chains, covers, compatibility and isomorphism probes.
    Odometer {
        #[arg(value_parser = ["validate", "act", "cross-sections", "build-rank-one", "normal-cover", "cover", "compat", "factor-map", "iso-check"])]
        action: String,
    },
    /// Column layouts of a ℤ-construction.
    Stack,
    /// List or show catalog entries.
    Example {
        #[arg(value_parser = ["list", "show"])]
        action: String,
        name: Option<String>,
    },
    /// Run a command described by a JSON config file.
    Run { config: PathBuf },
}

/// A report plus whether it signals a validation failure.
struct Outcome {
    body: Value,
    failed: bool,
}

impl Outcome {
    fn ok(body: Value) -> Self {
        Outcome { body, failed: false }
    }

    fn check(body: Value, passed: bool) -> Self {
        Outcome { body, failed: !passed }
    }
}

type Res<T> = std::result::Result<T, Error>;

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) => 2,
        Error::Resource(_) | Error::DepthExceeded { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn execute(cli: Cli) -> Res<u8> {
    let cli = match cli.cmd {
        Cmd::Run { config } => {
            let parsed = Cli::try_parse_from(config_argv(&config)?).map_err(|e| usage(e.to_string()))?;
            if matches!(parsed.cmd, Cmd::Run { .. }) {
                return Err(usage("a config cannot run another config"));
            }
            parsed
        }
        _ => cli,
    };
    let name = command_name(&cli.cmd);
    let out = dispatch(&cli.cmd, &cli.opts)?;
    let text = render(&report(&name, out.body));
    match &cli.opts.json {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    Ok(if out.failed { 2 } else { 0 })
}

fn command_name(cmd: &Cmd) -> String {
    match cmd {
        Cmd::Validate => "validate".into(),
        Cmd::Measure => "measure".into(),
        Cmd::Act => "act".into(),
        Cmd::Rn => "rn".into(),
        Cmd::Telescope => "telescope".into(),
        Cmd::Reduce => "reduce".into(),
        Cmd::Folner => "folner".into(),
        Cmd::Haar => "haar".into(),
        Cmd::FactorSum => "factor-sum".into(),
        Cmd::FactorScan => "factor-scan".into(),
        Cmd::TotalErgodicity => "total-ergodicity".into(),
        Cmd::Odometer { action } => format!("odometer {action}"),
        Cmd::Stack => "stack".into(),
        Cmd::Example { action, .. } => format!("example {action}"),
        Cmd::Run { .. } => "run".into(),
    }
}

/// Turns `{"command": "validate", "example": "fgsw", "depth": 8}` into an argument list.
fn config_argv(path: &Path) -> Res<Vec<String>> {
    let text = read_file(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let obj = v.as_object().ok_or_else(|| usage("config must be a JSON object"))?;
    let command = obj.get("command").and_then(Value::as_str).ok_or_else(|| usage("config needs \"command\""))?;
    let mut argv = vec!["cf".to_string()];
    argv.extend(command.split_whitespace().map(String::from));
    for key in ["action", "name"] {
        if let Some(a) = obj.get(key).and_then(Value::as_str) {
            argv.push(a.into());
        }
    }
    for (k, val) in obj {
        if matches!(k.as_str(), "command" | "action" | "name") {
            continue;
        }
        let (flag, val) = match (k.as_str(), val) {
            ("params", Value::Object(_)) => ("--params-inline".to_string(), val),
            ("N", _) => ("-N".to_string(), val),
            _ => (format!("--{}", k.replace('_', "-")), val),
        };
        let items: Vec<&Value> = match (k.as_str(), val) {
            ("subgroup", Value::Array(a)) => a.iter().collect(),
            _ => vec![val],
        };
        for item in items {
            argv.push(flag.clone());
            argv.push(match item {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            });
        }
    }
    Ok(argv)
}

fn read_file(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn parse_json(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_string()))
}

fn parse_json_strict(what: &str, s: &str) -> Res<Value> {
    serde_json::from_str(s).map_err(|e| usage(format!("{what}: {e}")))
}

fn q_or(s: &Option<String>, default: Q) -> Res<Q> {
    s.as_deref().map_or(Ok(default), rational::parse)
}

impl Opts {
    fn catalog_options(&self) -> Res<Value> {
        match &self.options {
            Some(s) => parse_json_strict("--options", s),
            None => Ok(json!({})),
        }
    }

    fn entry(&self) -> Res<Option<CatalogEntry>> {
        self.example.as_deref().map(|name| catalog::catalog(name, &self.catalog_options()?)).transpose()
    }

    fn threshold(&self) -> Res<Q> {
        q_or(&self.threshold, default_threshold())
    }

    fn cf_params(&self) -> Res<CFParams> {
        if let Some(s) = &self.params_inline {
            return catalog::params_from_json(&parse_json_strict("params", s)?);
        }
        if let Some(path) = &self.params {
            let v = parse_json_strict(&path.display().to_string(), &read_file(path)?)?;
            return catalog::params_from_json(&v);
        }
        match self.entry()? {
            Some(CatalogEntry::Params(t)) | Some(CatalogEntry::Odometer { params: t, .. }) => Ok(t),
            Some(e) => Err(usage(format!("example of kind {} has no (C,F)-parameters", e.kind()))),
            None => Err(usage("need --example or --params")),
        }
    }

    fn chain_spec(&self) -> Res<OdometerSpec> {
        if let Some(s) = &self.chain {
            if let Ok(v @ Value::Object(_)) = serde_json::from_str::<Value>(s) {
                return OdometerSpec::from_json(&v);
            }
            if catalog::NAMES.contains(&s.as_str()) {
                return take_chain(catalog::catalog(s, &self.catalog_options()?)?);
            }
            let v = parse_json_strict(s, &read_file(Path::new(s))?)?;
            return OdometerSpec::from_json(&v);
        }
        match self.entry()? {
            Some(e) => take_chain(e),
            None => Err(usage("need --chain or an --example with a chain")),
        }
    }

    fn element(&self, ctx: &GroupCtx) -> Res<GroupElement> {
        match &self.g {
            Some(s) => ctx.element_from_json(&parse_json(s)),
            None => Ok(ctx.identity()),
        }
    }

    fn point(&self, t: &CFParams, s: &Option<String>, what: &str) -> Res<CFPoint> {
        let s = s.as_ref().ok_or_else(|| usage(format!("need --{what}")))?;
        CFPoint::from_json(t, &parse_json_strict(what, s)?)
    }

    fn chain_point(&self, spec: &OdometerSpec, levels: usize) -> Res<CosetChain> {
        match &self.chain_point {
            Some(s) => CosetChain::from_json(spec, &parse_json_strict("chain-point", s)?),
            None => Ok(CosetChain::identity(spec, levels)),
        }
    }

    fn subgroups(&self, ctx: &GroupCtx) -> Res<Vec<CofiniteSubgroup>> {
        if self.subgroup.is_empty() {
            return Err(usage("need --subgroup"));
        }
        self.subgroup.iter().map(|s| CofiniteSubgroup::from_json(ctx, &parse_json(s))).collect()
    }

    fn telescoping(&self) -> Res<Option<Telescoping>> {
        self.telescoping.as_deref().map(|s| Telescoping::from_json(&parse_json_strict("telescoping", s)?)).transpose()
    }
}

fn take_chain(e: CatalogEntry) -> Res<OdometerSpec> {
    match e {
        CatalogEntry::Chain(s) | CatalogEntry::Odometer { spec: s, .. } => Ok(s),
        CatalogEntry::Tree(t) => Ok(t.spec),
        other => Err(usage(format!("example of kind {} has no chain", other.kind()))),
    }
}

fn dispatch(cmd: &Cmd, o: &Opts) -> Res<Outcome> {
    match cmd {
        Cmd::Validate => {
            let t = o.cf_params()?;
            let r = validate_params(&t, o.depth.unwrap_or(8), &o.threshold()?)?;
            Ok(Outcome::check(json!({"params": t.describe(), "validation": r.to_json()}), r.passed()))
        }
        Cmd::Measure => {
            let t = o.cf_params()?;
            let n = o.stage.unwrap_or(0);
            let g = o.element(t.group())?;
            Ok(Outcome::ok(json!({
                "stage": n,
                "f": t.group().element_to_json(&g),
                "cylinder_measure": rational::to_string(&cylinder_measure(&t, &g, n)?),
                "nu_total": rational::to_string(&t.nu_total(n)?),
            })))
        }
        Cmd::Act => {
            let t = o.cf_params()?;
            let g = o.element(t.group())?;
            let x = o.point(&t, &o.point, "point")?;
            let image = act(&t, &g, &x)?;
            let rn = rn_derivative(&t, &g, &x)?;
            Ok(Outcome::ok(json!({
                "g": t.group().element_to_json(&g),
                "point": x.to_json(&t),
                "image": image.map(|y| y.to_json(&t)),
                "rn_derivative": rn.as_ref().map(rational::to_string),
            })))
        }
        Cmd::Rn => {
            let t = o.cf_params()?;
            let x = o.point(&t, &o.point, "point")?;
            let y = o.point(&t, &o.other, "other")?;
            Ok(Outcome::ok(json!({
                "same_point": same_point(&t, &x, &y)?,
                "rn_cocycle": rational::to_string(&rn_cocycle(&t, &x, &y)?),
            })))
        }
        Cmd::Telescope => telescope_cmd(o),
        Cmd::Reduce => reduce_cmd(o),
        Cmd::Folner => {
            let t = o.cf_params()?;
            let g = o.element(t.group())?;
            let depth = o.depth.unwrap_or(6);
            let defects = (1..=depth).map(|n| folner_defect(&t, &g, n).map(|q| rational::to_string(&q))).collect::<Res<Vec<_>>>()?;
            let minimal = check_minimal_domain(&t, &g, 0, depth, ENUM_CAP)?;
            let measure = check_measure_domain(&t, &g, depth, &o.threshold()?, 1 << 12, ENUM_CAP)?;
            Ok(Outcome::ok(json!({
                "g": t.group().element_to_json(&g),
                "defects": defects,
                "minimal_domain": minimal.to_json(),
                "measure_domain": measure.to_json(),
            })))
        }
        Cmd::Haar => {
            let t = o.cf_params()?;
            Ok(Outcome::ok(haar_totals(&t, o.big_n.unwrap_or(4))?.to_json()))
        }
        Cmd::FactorSum => {
            let t = o.cf_params()?;
            let g = o.element(t.group())?;
            let gamma = single(o.subgroups(t.group())?)?;
            let v = coset_compatibility(&t, &g, &gamma, o.depth.unwrap_or(10), &o.threshold()?)?;
            Ok(Outcome::ok(json!({"subgroup": gamma.to_json(), "g": t.group().element_to_json(&g), "verdict": v.to_json()})))
        }
        Cmd::FactorScan => {
            let t = o.cf_params()?;
            let gamma = single(o.subgroups(t.group())?)?;
            let r = finite_factor_scan(&t, &gamma, &scan_options(o)?)?;
            Ok(Outcome::ok(r.to_json(&t)))
        }
        Cmd::TotalErgodicity => {
            let t = o.cf_params()?;
            let r = total_ergodicity_scan(&t, &o.subgroups(t.group())?, &scan_options(o)?)?;
            Ok(Outcome::ok(r.to_json(&t)))
        }
        Cmd::Odometer { action } => odometer_cmd(action, o),
        Cmd::Stack => stack_cmd(o),
        Cmd::Example { action, name } => example_cmd(action, name.as_deref(), o),
        Cmd::Run { .. } => Err(usage("nested run")),
    }
}

fn single(mut v: Vec<CofiniteSubgroup>) -> Res<CofiniteSubgroup> {
    if v.len() != 1 {
        return Err(usage("expected exactly one --subgroup"));
    }
    Ok(v.remove(0))
}

fn scan_options(o: &Opts) -> Res<ScanOptions> {
    let mut opts = ScanOptions { threshold: o.threshold()?, ..ScanOptions::default() };
    if let Some(d) = o.depth {
        opts.max_depth = d;
    }
    Ok(opts)
}

fn stage_summary(t: &CFParams, depth: usize) -> Res<Vec<Value>> {
    (1..=depth)
        .map(|n| {
            Ok(json!({
                "n": n,
                "c_size": t.kappa(n)?.len(),
                "f_size": t.shape(n)?.len().to_string(),
                "nu_total": rational::to_string(&t.nu_total(n)?),
            }))
        })
        .collect()
}

fn telescope_cmd(o: &Opts) -> Res<Outcome> {
    let t = o.cf_params()?;
    let l = o.telescoping()?.unwrap_or(Telescoping::Linear(2));
    let tl = telescope(&t, &l)?;
    let depth = o.depth.unwrap_or(3).min(tl.params.depth_cap());
    let r = validate_params(&tl.params, depth, &o.threshold()?)?;
    let image = match &o.point {
        Some(_) => Some(tl.iota(&o.point(&t, &o.point, "point")?)?.to_json(&tl.params)),
        None => None,
    };
    Ok(Outcome::check(
        json!({
            "telescoping": l.to_json(),
            "stages": stage_summary(&tl.params, depth)?,
            "validation": r.to_json(),
            "image": image,
        }),
        r.passed(),
    ))
}

fn reduce_cmd(o: &Opts) -> Res<Outcome> {
    let t = o.cf_params()?;
    let ctx = t.group();
    let prefix = o.prefix.as_deref().ok_or_else(|| usage("need --prefix"))?;
    let v = parse_json_strict("prefix", prefix)?;
    let sets = v
        .as_array()
        .ok_or_else(|| usage("--prefix must be a list of lists"))?
        .iter()
        .map(|a| {
            a.as_array()
                .ok_or_else(|| usage("--prefix must be a list of lists"))?
                .iter()
                .map(|g| ctx.element_from_json(g))
                .collect::<Res<Vec<_>>>()
        })
        .collect::<Res<Vec<_>>>()?;
    let depth = o.depth.unwrap_or(sets.len().max(1));
    let bound = q_or(&o.bound, rational::one())?;
    let r = reduce(&t, &ReductionSpec::Prefix(sets), depth, &o.threshold()?, &bound)?;
    let check = validate_params(&r.params, depth, &o.threshold()?)?;
    Ok(Outcome::check(
        json!({
            "deficits": r.deficits.to_json(),
            "scaling": rational::to_string(&r.scaling(depth)?),
            "stages": stage_summary(&r.params, depth)?,
            "validation": check.to_json(),
        }),
        check.passed(),
    ))
}

fn odometer_cmd(action: &str, o: &Opts) -> Res<Outcome> {
    let spec = o.chain_spec()?;
    let ctx = spec.group().clone();
    let threshold = o.threshold()?;
    match action {
        "validate" => {
            let r = validate_chain(&spec, o.depth.unwrap_or(spec.depth_cap()))?;
            Ok(Outcome::check(json!({"chain": spec.to_json(), "report": r.to_json(&ctx)}), r.valid()))
        }
        "act" => {
            let levels = o.depth.unwrap_or(spec.depth_cap());
            let y = o.chain_point(&spec, levels)?;
            let g = o.element(&ctx)?;
            let z = odometer_act(&spec, &g, &y)?;
            Ok(Outcome::ok(json!({
                "g": ctx.element_to_json(&g),
                "image": z.canonical(&spec)?.to_json(&ctx),
                "indices": z.indices(&spec)?,
            })))
        }
        "cross-sections" => {
            let s = cross_sections(&spec, o.big_n.unwrap_or(spec.depth_cap()))?;
            Ok(Outcome::check(s.to_json(&spec), s.certified()))
        }
        "build-rank-one" => {
            let n = o.big_n.unwrap_or(spec.depth_cap());
            let s = cross_sections(&spec, n)?;
            let t = rank_one_odometer_params(&spec, &s.uniform_kappas())?;
            let r = validate_params(&t, n, &threshold)?;
            Ok(Outcome::check(
                json!({
                    "sections": s.to_json(&spec),
                    "params": t.to_explicit_json(n, ENUM_CAP)?,
                    "validation": r.to_json(),
                }),
                s.certified() && r.passed(),
            ))
        }
        "normal-cover" => {
            let c = normal_cover(&spec, o.big_n.unwrap_or(2))?;
            Ok(Outcome::check(c.to_json(&spec), c.omega_injective))
        }
        "cover" => {
            let c = rank_one_cover(&spec, o.big_n.unwrap_or(2))?;
            Ok(Outcome::check(c.to_json(&spec), c.passed()))
        }
        "compat" => {
            let t = o.cf_params()?;
            let depth = o.depth.unwrap_or(spec.depth_cap().min(8));
            let y = o.chain_point(&spec, depth)?;
            let l = o.telescoping()?;
            let v = odometer_compatibility(&t, &spec, &y, depth, &threshold, l.as_ref())?;
            Ok(Outcome::ok(json!({"chain_point": y.to_json(&ctx), "verdict": v.to_json()})))
        }
        "factor-map" => {
            let t = o.cf_params()?;
            let x = o.point(&t, &o.point, "point")?;
            let levels = o.big_n.unwrap_or(2);
            let y = o.chain_point(&spec, levels)?;
            let v = odometer_factor_map(&t, &spec, &y, &x, levels, o.window.unwrap_or(2))?;
            Ok(Outcome::ok(json!({"point": x.to_json(&t), "value": v.to_json(&spec)})))
        }
        "iso-check" => {
            let t = o.cf_params()?;
            let l_max = o.l_max.unwrap_or(spec.depth_cap().min(8));
            let y = o.chain_point(&spec, l_max)?;
            let eps = q_or(&o.epsilon, rational::frac(1, 4))?;
            let r = isomorphism_check(&t, &spec, &y, o.level.unwrap_or(1), &eps, l_max, o.m_max.unwrap_or(8))?;
            Ok(Outcome::ok(r.to_json()))
        }
        other => Err(usage(format!("unknown odometer action {other}"))),
    }
}

fn stack_cmd(o: &Opts) -> Res<Outcome> {
    let t = o.cf_params()?;
    let n = o.big_n.unwrap_or(4);
    let cols = columns(&t, n)?;
    let maps = (0..n).map(|k| spacers(&t, k)).collect::<Res<Vec<_>>>()?;
    if let Some(path) = &o.svg {
        write_file(path, &svg::render_columns(&cols))?;
    }
    let mut body = Map::new();
    body.insert("columns".into(), json!(cols.iter().map(|c| c.to_json()).collect::<Vec<_>>()));
    body.insert("spacers".into(), json!(maps.iter().map(|m| m.to_json()).collect::<Vec<_>>()));
    let mut passed = maps.iter().all(|m| m.consistent());
    if let Some(k) = o.samples {
        let (agree, rows) = sample_returns(&t, n, k, o.seed)?;
        passed &= agree == k;
        body.insert("samples".into(), json!({"seed": o.seed, "count": k, "agree": agree, "rows": rows}));
    }
    Ok(Outcome::check(Value::Object(body), passed))
}

/// Compares the induced map with simulated first returns on random points of `X_0`.
fn sample_returns(t: &CFParams, n: usize, k: usize, seed: u64) -> Res<(usize, Vec<Value>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let supports = (1..=n).map(|j| t.kappa(j).map(|m| m.support_vec())).collect::<Res<Vec<_>>>()?;
    let mut agree = 0;
    let mut rows = Vec::with_capacity(k);
    for _ in 0..k {
        let tail = supports.iter().map(|s| s[rng.gen_range(0..s.len())].clone()).collect();
        let x = CFPoint::new(t, 0, t.group().identity(), tail)?;
        let induced = induced_base(t, &x)?;
        let simulated = first_return_oracle(t, &x, 1 << 20)?;
        let ok = match (&induced, &simulated) {
            (Induced::Step { rx, theta }, FirstReturn::Returned { point, time }) => rx == point && *time == *theta as u64 + 1,
            (Induced::Undefined, FirstReturn::Exhausted { .. }) => true,
            _ => false,
        };
        agree += ok as usize;
        rows.push(json!({"point": x.to_json(t), "agree": ok}));
    }
    Ok((agree, rows))
}

fn example_cmd(action: &str, name: Option<&str>, o: &Opts) -> Res<Outcome> {
    match action {
        "list" => Ok(Outcome::ok(json!({"examples": catalog::NAMES}))),
        "show" => {
            let name = name.or(o.example.as_deref()).ok_or_else(|| usage("example show needs a name"))?;
            let e = catalog::catalog(name, &o.catalog_options()?)?;
            Ok(Outcome::ok(json!({"name": name, "entry": e.describe()})))
        }
        other => Err(usage(format!("unknown example action {other}"))),
    }
}
