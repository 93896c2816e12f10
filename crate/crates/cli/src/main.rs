//! Batch front end: construct, verify, analyze, and sweep disk isometries
//! with machine-readable JSON/CSV output.
//!
//! Exit codes: 0 on success, 2 when a verification ran and the measured
//! residual exceeded its tolerance, 1 on usage or domain errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use diskisom::branch::{
    branch_data, peel_parameter, reduction_report, remultiply, ReductionVerdict,
};
use diskisom::domains::{block_join_type_iii, embed, DomainPoint, DomainSpec};
use diskisom::family::{
    boundary_extension_check, closed_form_ramification, family_map, family_rational,
    second_component_residual,
};
use diskisom::germ::DiskIsometry;
use diskisom::rational::RationalMap;
use diskisom::rigidity::{rigidity_audit, weighted_residual, RigidityError, WeightedCandidate};
use diskisom::sampling::{annulus_point, disk_grid, seeded_rng};
use diskisom::unitary::{build_family_unitary, build_hessenberg_unitary, UnitaryFrame};
use diskisom::{c64, C64};

#[derive(Parser)]
#[command(
    name = "diskisom",
    version,
    about = "disk isometries into Δ×Bⁿ and classical domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a unitary frame, solve its isometry, and emit the bundle
    Construct(ConstructArgs),
    /// Check the functional and defining equations of a stored bundle
    Verify(VerifyArgs),
    /// Ramification and branch data of a map or family parameter
    Ramify(RamifyArgs),
    /// Degree-based reduction verdict of a solved isometry
    Classify(ClassifyArgs),
    /// Strip one Blaschke factor from a rational map
    Peel(PeelArgs),
    /// Build a family member and optionally verify it on a grid
    Family(FamilyArgs),
    /// Boundary-extension checks for an inner family parameter
    Extendcheck(ExtendArgs),
    /// Embed a disk/ball point into a classical domain
    Embed(EmbedArgs),
    /// Audit a rational candidate into a weighted product of balls
    Rigidity(RigidityArgs),
    /// Sweep family parameters and emit one CSV row per ζ
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ConstructArgs {
    /// Frame source: `identity<k>`, `hessenberg`, `family`, or a frame JSON path
    #[arg(long)]
    unitary: String,
    /// Ball dimension n for the built frames
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Seed for the randomized construction (0 = canonical)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Family parameter, e.g. 0.5+0i
    #[arg(long, value_parser = parse_complex)]
    zeta: Option<C64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Bundle JSON produced by `construct` or `family`
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long, default_value_t = 0.95)]
    rmax: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RamifyArgs {
    /// Family parameter (with --n); alternative to --in
    #[arg(long, value_parser = parse_complex)]
    zeta: Option<C64>,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Rational map JSON ({"num": .., "den": ..})
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Bundle JSON; alternative to --zeta/--n
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, value_parser = parse_complex)]
    zeta: Option<C64>,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PeelArgs {
    /// Rational map JSON; alternative to --zeta/--n
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, value_parser = parse_complex)]
    zeta: Option<C64>,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_parser = parse_complex)]
    zeta: C64,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long, default_value_t = 0.95)]
    rmax: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Optional action: `verify` runs the grid residuals
    action: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExtendArgs {
    #[arg(long, value_parser = parse_complex)]
    zeta: C64,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    /// Domain spec: `I:p,q`, `II:m`, `III:m`, or `IV:n`
    #[arg(long)]
    domain: String,
    #[arg(long, value_parser = parse_complex)]
    w: C64,
    /// Ball coordinates, comma separated (e.g. `0.1+0i,0.2-0.1i`)
    #[arg(long)]
    z: Option<String>,
    /// Inner type III point JSON for the block join
    #[arg(long = "in")]
    inner: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RigidityArgs {
    /// Candidate JSON ({"components": [[map,..],..], "weights": [..]})
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Number of ζ samples (CSV rows)
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    rmin: f64,
    #[arg(long, default_value_t = 0.95)]
    rmax: f64,
    /// Residual grid per sample
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Construct(args) => construct(args),
        Command::Verify(args) => verify(args),
        Command::Ramify(args) => ramify(args),
        Command::Classify(args) => classify(args),
        Command::Peel(args) => peel(args),
        Command::Family(args) => family(args),
        Command::Extendcheck(args) => extendcheck(args),
        Command::Embed(args) => embed_cmd(args),
        Command::Rigidity(args) => rigidity(args),
        Command::Sweep(args) => sweep(args),
    }
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty complex literal".into());
    }
    let parse_im = |t: &str| -> Result<f64, String> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            other => other
                .parse::<f64>()
                .map_err(|e| format!("bad imaginary part `{other}`: {e}")),
        }
    };
    if let Some(body) = s.strip_suffix('i') {
        // find the split between real and imaginary parts: a sign that is
        // not an exponent sign and not the leading sign
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let c = bytes[k] as char;
            if (c == '+' || c == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re: f64 = body[..k]
                    .parse()
                    .map_err(|e| format!("bad real part `{}`: {e}", &body[..k]))?;
                let im = parse_im(&body[k..])?;
                Ok(c64(re, im))
            }
            None => Ok(c64(0.0, parse_im(body)?)),
        }
    } else {
        s.parse::<f64>()
            .map(|re| c64(re, 0.0))
            .map_err(|e| format!("bad complex literal `{s}`: {e}"))
    }
}

fn parse_domain(s: &str) -> Result<DomainSpec> {
    let (kind, params) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("domain spec must look like I:2,3 or IV:4, got `{s}`"))?;
    let nums: Vec<usize> = params
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad domain parameters `{params}`"))?;
    let spec = match (kind.trim(), nums.as_slice()) {
        ("I", [p, q]) => DomainSpec::TypeI { p: *p, q: *q },
        ("II", [m]) => DomainSpec::TypeII { m: *m },
        ("III", [m]) => DomainSpec::TypeIII { m: *m },
        ("IV", [n]) => DomainSpec::TypeIV { n: *n },
        _ => bail!("unrecognized domain spec `{s}`"),
    };
    spec.validate()?;
    Ok(spec)
}

fn complex_json(z: C64) -> serde_json::Value {
    serde_json::json!([z.re, z.im])
}

fn emit(mut value: serde_json::Value, out: &Option<PathBuf>) -> Result<()> {
    if let Some(obj) = value.as_object_mut() {
        obj.insert("schema_version".into(), serde_json::json!(1));
    }
    let text = serde_json::to_string_pretty(&value)?;
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn build_frame(args: &ConstructArgs) -> Result<UnitaryFrame> {
    let spec = args.unitary.as_str();
    if let Some(k) = spec.strip_prefix("identity") {
        let dim: usize = k.parse().context("identity<k> needs a dimension")?;
        return Ok(UnitaryFrame::identity(dim));
    }
    match spec {
        "hessenberg" => Ok(build_hessenberg_unitary(args.n, args.seed)?),
        "family" => {
            let zeta = args
                .zeta
                .ok_or_else(|| anyhow!("--unitary family needs --zeta"))?;
            Ok(build_family_unitary(zeta, args.n)?)
        }
        path => read_json::<UnitaryFrame>(&PathBuf::from(path)),
    }
}

fn construct(args: ConstructArgs) -> Result<ExitCode> {
    let frame = build_frame(&args)?;
    let iso = DiskIsometry::solve(&frame)?;
    let mut value = serde_json::to_value(&iso)?;
    value["degree"] = serde_json::json!(iso.rational().degree());
    value["f1_derivative_at_origin"] = complex_json(iso.f1_derivative_at_origin());
    emit(value, &args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let iso: DiskIsometry = read_json(&args.input)?;
    let grid = disk_grid(args.grid, args.rmax);
    let report = iso.verify(&grid)?;
    let pass = report.max_functional < args.tol && report.max_defining < args.tol;
    emit(
        serde_json::json!({
            "grid": args.grid,
            "rmax": args.rmax,
            "tol": args.tol,
            "max_functional": report.max_functional,
            "max_defining": report.max_defining,
            "pass": pass,
        }),
        &args.out,
    )?;
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn ramify(args: RamifyArgs) -> Result<ExitCode> {
    let (map, closed_form) = match (&args.input, args.zeta) {
        (Some(path), _) => (read_json::<RationalMap>(path)?, None),
        (None, Some(zeta)) => {
            let profile = closed_form_ramification(zeta, args.n)?;
            (family_rational(zeta, args.n)?, Some(profile))
        }
        (None, None) => bail!("ramify needs --in or --zeta"),
    };
    let data = branch_data(&map)?;
    let mut value = serde_json::json!({
        "degree": map.degree(),
        "branch_data": serde_json::to_value(&data)?,
        "distinct_ramification_points": data.distinct_ramification_count(),
        "riemann_hurwitz_total": data.total_order(),
    });
    if let Some(p) = closed_form {
        value["closed_form"] = serde_json::json!({
            "zeta": complex_json(p.zeta),
            "n": p.n,
            "a_plus": complex_json(p.a_plus),
            "a_minus": complex_json(p.a_minus),
            "regime": p.regime.to_string(),
            "discriminant": p.discriminant,
        });
    }
    emit(value, &args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn classify(args: ClassifyArgs) -> Result<ExitCode> {
    let iso = match (&args.input, args.zeta) {
        (Some(path), _) => read_json::<DiskIsometry>(path)?,
        (None, Some(zeta)) => family_map(zeta, args.n)?,
        (None, None) => bail!("classify needs --in or --zeta"),
    };
    let report = reduction_report(&iso)?;
    let (verdict, m) = match report.verdict {
        ReductionVerdict::GeodesicDiskFactor => ("GeodesicDiskFactor", None),
        ReductionVerdict::SquareRootClass => ("SquareRootClass", None),
        ReductionVerdict::Reducible { m } => ("Reducible", Some(m)),
        ReductionVerdict::Full => ("Full", None),
    };
    emit(
        serde_json::json!({
            "degree": iso.rational().degree(),
            "ball_dimension": iso.ball_dim(),
            "verdict": verdict,
            "m": m,
            "forced_slots": report
                .forced_slots
                .iter()
                .map(|(j, v)| serde_json::json!({"slot": j, "value": complex_json(*v)}))
                .collect::<Vec<_>>(),
        }),
        &args.out,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn peel(args: PeelArgs) -> Result<ExitCode> {
    let map = match (&args.input, args.zeta) {
        (Some(path), _) => read_json::<RationalMap>(path)?,
        (None, Some(zeta)) => family_rational(zeta, args.n)?,
        (None, None) => bail!("peel needs --in or --zeta"),
    };
    let (r_tilde, c2) = peel_parameter(&map)?;
    let rebuilt = remultiply(&r_tilde, c2)?;
    emit(
        serde_json::json!({
            "r_tilde": serde_json::to_value(&r_tilde)?,
            "c2": complex_json(c2),
            "degree_before": map.degree(),
            "degree_after": r_tilde.degree(),
            "rebuild_residual": rebuilt.coefficient_distance(&map),
        }),
        &args.out,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn family(args: FamilyArgs) -> Result<ExitCode> {
    if let Some(action) = &args.action {
        if action != "verify" {
            bail!("unknown family action `{action}` (expected `verify`)");
        }
    }
    let iso = family_map(args.zeta, args.n)?;
    let closed = family_rational(args.zeta, args.n)?;
    let closed_distance = iso.rational().coefficient_distance(&closed);
    let mut value = serde_json::to_value(&iso)?;
    value["degree"] = serde_json::json!(iso.rational().degree());
    value["closed_form_distance"] = serde_json::json!(closed_distance);
    let mut code = ExitCode::SUCCESS;
    if args.action.as_deref() == Some("verify") {
        let grid = disk_grid(args.grid, args.rmax);
        let report = iso.verify(&grid)?;
        let second = if args.n == 2 {
            Some(second_component_residual(args.zeta, &grid)?)
        } else {
            None
        };
        let pass = report.max_functional < args.tol
            && report.max_defining < args.tol
            && second.is_none_or(|v| v < args.tol);
        value["max_residual"] = serde_json::json!(report.max_functional.max(report.max_defining));
        value["max_functional"] = serde_json::json!(report.max_functional);
        value["max_defining"] = serde_json::json!(report.max_defining);
        if let Some(second) = second {
            value["second_component_residual"] = serde_json::json!(second);
        }
        value["pass"] = serde_json::json!(pass);
        if !pass {
            code = ExitCode::from(2);
        }
    }
    emit(value, &args.out)?;
    Ok(code)
}

fn extendcheck(args: ExtendArgs) -> Result<ExitCode> {
    let report = boundary_extension_check(args.zeta, args.eps)?;
    let passed = report.passed();
    emit(
        serde_json::json!({
            "zeta": complex_json(report.zeta),
            "eps": report.eps,
            "branch_values": [complex_json(report.branch_values[0]), complex_json(report.branch_values[1])],
            "circle_margin": report.circle_margin,
            "margin_ok": report.margin_ok,
            "continuation_max_residual": report.continuation_max_residual,
            "continuation_failures": report.continuation_failures,
            "continuation_ok": report.continuation_ok,
            "sup_f1_on_circle": report.sup_f1_on_circle,
            "compact_image_ok": report.compact_image_ok,
            "min_pole_distance": report.min_pole_distance,
            "pole_clearance_ok": report.pole_clearance_ok,
            "branch_values_coincide": report.branch_values_coincide,
            "pass": passed,
        }),
        &args.out,
    )?;
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn embed_cmd(args: EmbedArgs) -> Result<ExitCode> {
    let spec = parse_domain(&args.domain)?;
    let z: Vec<C64> = match &args.z {
        Some(list) => list
            .split(',')
            .map(|p| parse_complex(p).map_err(|e| anyhow!(e)))
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let point = match spec {
        DomainSpec::TypeIII { m } => {
            let inner = match &args.inner {
                Some(path) => read_json::<DomainPoint>(path)?,
                None => DomainPoint::origin(DomainSpec::TypeIII { m: m - 1 })?,
            };
            block_join_type_iii(args.w, &inner)?
        }
        _ => embed(&spec, args.w, &z)?,
    };
    let (member, margin) = point.membership();
    let norm = point.generic_norm().ok();
    emit(
        serde_json::json!({
            "point": serde_json::to_value(&point)?,
            "member": member,
            "margin": margin,
            "generic_norm": norm,
        }),
        &args.out,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn rigidity(args: RigidityArgs) -> Result<ExitCode> {
    let candidate: WeightedCandidate = read_json(&args.input)?;
    let grid = disk_grid(args.grid, 0.95);
    let residual = weighted_residual(&candidate, &grid)?;
    match rigidity_audit(&candidate) {
        Ok(report) => {
            emit(
                serde_json::json!({
                    "weighted_residual": residual,
                    "pole_circle_clearance": report.pole_circle_clearance,
                    "poles_clear": report.poles_clear,
                    "properness_defect": report.properness_defect,
                    "proper": report.proper,
                    "weight_sum": report.weight_sum,
                    "weights_sum_to_one": report.weights_sum_to_one,
                    "per_factor_defect": report.per_factor_defect,
                    "per_factor_isometry": report.per_factor_isometry,
                    "pass": report.all_hold(),
                }),
                &args.out,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Err(e @ (RigidityError::NotAnIsometry { .. } | RigidityError::ConclusionViolated(_))) => {
            emit(
                serde_json::json!({
                    "weighted_residual": residual,
                    "pass": false,
                    "reason": e.to_string(),
                }),
                &args.out,
            )?;
            Ok(ExitCode::from(2))
        }
        Err(e) => Err(e.into()),
    }
}

fn sweep(args: SweepArgs) -> Result<ExitCode> {
    let mut rng = seeded_rng(args.seed);
    let grid = disk_grid(args.grid, 0.9);
    let mut rows = String::new();
    rows.push_str(
        "zeta_re,zeta_im,n,regime,a_plus_re,a_plus_im,a_minus_re,a_minus_im,max_residual\n",
    );
    for _ in 0..args.count {
        let zeta = annulus_point(args.rmin, args.rmax, &mut rng);
        let profile = closed_form_ramification(zeta, args.n)?;
        let iso = family_map(zeta, args.n)?;
        let report = iso.verify(&grid)?;
        let max_residual = report.max_functional.max(report.max_defining);
        rows.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            zeta.re,
            zeta.im,
            args.n,
            profile.regime,
            profile.a_plus.re,
            profile.a_plus.im,
            profile.a_minus.re,
            profile.a_minus.im,
            max_residual
        ));
    }
    match &args.out {
        Some(path) => {
            std::fs::write(path, rows).with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            std::io::stdout().write_all(rows.as_bytes())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
