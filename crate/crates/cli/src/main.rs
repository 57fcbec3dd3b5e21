//! Command-line front end: every computation in the library is exposed
//! as a subcommand emitting CSV or JSON with the resolved configuration
//! echoed in the header.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use output::{fmt_f64, Report};
use twistgap::group::{Group, Irrep};
use twistgap::ising::triangular::{self, TriangularIsing};
use twistgap::ising::Phase;
use twistgap::mc::{detailed_balance_audit, mc_correlator, run_extended_ensemble, McConfig};
use twistgap::oracle::{self, checks, LatticeKind};
use twistgap::pcm1d::{ChainSpec, TwistSubgroup};
use twistgap::{Error as CoreError, Lgt2dSpec, SpinLattice, SquareIsing};

#[derive(Parser)]
#[command(
    name = "twistgap",
    version,
    about = "Twisted-boundary free energies and mass-gap bounds in exactly solvable lattice models"
)]
struct Cli {
    /// Worker threads (default: all cores; TWISTGAP_THREADS also honored)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat key=value file supplying defaults for the long flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted)
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact 2D lattice gauge theory: sector tables and the Wilson-loop bound
    Lgt2d(Lgt2dArgs),
    /// Triangular Ising closed forms: rho, partition pairs, heatmap
    Tri(TriArgs),
    /// Square Ising closed forms: partition pair, spectrum, decay rate
    Square(SquareArgs),
    /// 1D principal chiral chain: wall projection, correlators, bound
    Pcm(PcmArgs),
    /// Ground-truth oracles and structural checks
    Oracle(OracleArgs),
    /// Extended-ensemble Monte Carlo estimate of Z^-/Z
    Mc(McArgs),
}

#[derive(Args)]
struct Lgt2dArgs {
    /// Gauge group: u1, su2, or zN (e.g. z2)
    #[arg(long)]
    group: String,
    #[arg(long)]
    beta: f64,
    /// Lattice size L1xL2
    #[arg(long)]
    size: String,
    /// U(1)/Z_N charge of the probe representation
    #[arg(long)]
    charge: Option<i64>,
    /// SU(2) spin of the probe representation (half-integers allowed)
    #[arg(long)]
    j: Option<f64>,
    /// Loop areas for the bound report
    #[arg(long, value_delimiter = ',')]
    areas: Vec<u32>,
    /// Emit the vortex/flux sector table instead of the bound report
    #[arg(long)]
    flux: bool,
    /// Character-expansion cutoff
    #[arg(long, default_value_t = 64)]
    cutoff: u32,
}

#[derive(Args)]
struct TriArgs {
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    /// Horizontal extent N (twist direction)
    #[arg(long)]
    n: Option<u32>,
    /// Vertical extent M
    #[arg(long)]
    m: Option<u32>,
    /// Emit the closed-form decay bound rho
    #[arg(long)]
    rho: bool,
    /// Emit log Z and log Z^- from the Wu-Hu products
    #[arg(long)]
    pair: bool,
    /// Emit the large-N asymptotic form of 1 - Z^-/Z
    #[arg(long)]
    asymptotic: bool,
    /// Emit an RxR heatmap of 1 - e^{-rho} over (t1, t)
    #[arg(long)]
    heatmap: Option<String>,
    /// Emit rho and its t1-derivative along a t1-slice at fixed t
    #[arg(long)]
    slice: bool,
    /// Evaluate ordered-phase parameters instead of refusing them
    #[arg(long)]
    allow_ordered: bool,
    /// Also render an SVG (heatmap mode)
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct SquareArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    /// Lattice size L1xL2 (the twist acts along L1)
    #[arg(long)]
    size: String,
    /// Emit log Z and log Z^-
    #[arg(long)]
    pair: bool,
    /// Emit 1 - Z^-/Z through the stable ratio form
    #[arg(long)]
    ratio: bool,
    /// Emit the L1->inf decay rate and its L2->inf limit e^{-M}
    #[arg(long)]
    decay: bool,
    /// Emit the Onsager spectrum gamma_k
    #[arg(long)]
    spectrum: bool,
    /// Also render an SVG (spectrum mode)
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct PcmArgs {
    /// Symmetry group G: u1, su2, or zN
    #[arg(long)]
    group: String,
    /// Twist subgroup G': trivial, center, full, or zN
    #[arg(long, default_value = "full")]
    subgroup: String,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    length: u32,
    #[arg(long)]
    charge: Option<i64>,
    #[arg(long)]
    j: Option<f64>,
    /// Separations for the bound/correlator report
    #[arg(long, value_delimiter = ',')]
    ns: Vec<u32>,
    /// Emit the wall projection only
    #[arg(long)]
    wall: bool,
    /// Emit correlators only (no bound columns)
    #[arg(long)]
    correlator: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[command(subcommand)]
    check: OracleCommand,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Correlation bound <s0 sn> <= 2{(1 - Z^-/Z)/2}^{n/L1} on the oracle
    CheckInequality(OracleLattice),
    /// Exact log Z / log Z^- by enumeration or transfer matrix
    Partition(OracleLattice),
    /// Compare one wall against a stack of homologous walls
    WallMod2 {
        #[command(flatten)]
        lattice: OracleLattice,
        #[arg(long, default_value_t = 3)]
        walls: u32,
    },
    /// Compare the two triangular identifications at equal (N, M)
    Equivalence {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
        #[arg(long, allow_hyphen_values = true)]
        t1: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
    },
    /// Leading strong-coupling ratio r(t) = log(Z^-/Z)/(-2 L2 t^{L1})
    Sce {
        #[arg(long)]
        l1: u32,
        #[arg(long)]
        l2: u32,
        #[arg(long, value_delimiter = ',')]
        ts: Vec<f64>,
    },
}

#[derive(Args)]
struct OracleLattice {
    /// square, tri1 (straight torus), or tri2 (sheared identification)
    #[arg(long, default_value = "square")]
    lattice: String,
    /// Size L1xL2 (N x M for the triangular kinds)
    #[arg(long)]
    size: String,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    /// Separations (check-inequality only)
    #[arg(long, value_delimiter = ',')]
    ns: Vec<u32>,
    /// enumerate or transfer (partition only; default picks by size)
    #[arg(long)]
    engine: Option<String>,
    /// Print the bond list instead of computing (geometry audit)
    #[arg(long)]
    dump_bonds: bool,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value = "square")]
    lattice: String,
    #[arg(long)]
    size: String,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    sweeps: u64,
    #[arg(long, default_value_t = 10_000)]
    therm: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    chains: u32,
    /// Sector-flip proposals per sweep
    #[arg(long, default_value_t = 1)]
    flips: u32,
    /// Also estimate <s0 sn> at these separations (untwisted sector)
    #[arg(long, value_delimiter = ',')]
    correlate: Vec<u32>,
    /// Run the detailed-balance audit instead of an estimate
    #[arg(long)]
    audit: bool,
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    // peel --config before clap so its values can be injected
    let merged = match preload_config(raw) {
        Ok(args) => args,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(merged);
    init_threads(cli.threads);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn preload_config(args: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let path = args
        .get(pos + 1)
        .ok_or_else(|| anyhow!("--config needs a path"))?;
    let map = config::load(std::path::Path::new(path))?;
    Ok(config::merge_into_args(args, &map))
}

fn init_threads(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("TWISTGAP_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<CoreError>() {
        Some(CoreError::SizeCap { .. }) => 4,
        Some(CoreError::InvalidSpec(_)) | Some(CoreError::TrivialIrrep(_)) => 2,
        Some(_) => 3,
        None => 2,
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut out = output::sink(cli.output.as_ref())?;
    match cli.command {
        Command::Lgt2d(args) => cmd_lgt2d(args, &mut out),
        Command::Tri(args) => cmd_tri(args, &mut out),
        Command::Square(args) => cmd_square(args, &mut out),
        Command::Pcm(args) => cmd_pcm(args, &mut out),
        Command::Oracle(args) => cmd_oracle(args, &mut out),
        Command::Mc(args) => cmd_mc(args, &mut out),
    }
}

fn parse_size(s: &str) -> Result<(u32, u32)> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("size must look like 8x8, got {s:?}"))?;
    Ok((a.parse().context("size")?, b.parse().context("size")?))
}

fn parse_group(s: &str) -> Result<Group> {
    let lower = s.to_ascii_lowercase();
    match lower.as_str() {
        "u1" | "u(1)" => Ok(Group::Circle),
        "su2" | "su(2)" => Ok(Group::Su2),
        _ => {
            if let Some(n) = lower.strip_prefix('z').and_then(|n| n.parse::<u32>().ok()) {
                if n >= 2 {
                    return Ok(Group::Cyclic(n));
                }
            }
            bail!("unknown group {s:?} (use u1, su2, or zN)")
        }
    }
}

fn parse_irrep(group: Group, charge: Option<i64>, j: Option<f64>) -> Result<Irrep> {
    match (group, charge, j) {
        (Group::Su2, None, Some(j)) => {
            let twoj = (2.0 * j).round();
            if (2.0 * j - twoj).abs() > 1e-9 || twoj < 0.0 {
                bail!("--j must be a nonnegative half-integer");
            }
            Ok(Irrep::spin(twoj as u32))
        }
        (Group::Su2, Some(_), _) => bail!("SU(2) takes --j, not --charge"),
        (Group::Su2, None, None) => bail!("SU(2) needs --j"),
        (g, Some(q), None) => Ok(Irrep::charge(g, q)),
        (_, None, Some(_)) => bail!("--j is only for su2; use --charge"),
        (_, Some(_), Some(_)) => bail!("give --charge or --j, not both"),
        (_, None, None) => bail!("need --charge (or --j for su2)"),
    }
}

fn cmd_lgt2d(args: Lgt2dArgs, out: &mut dyn std::io::Write) -> Result<()> {
    let group = parse_group(&args.group)?;
    let (l1, l2) = parse_size(&args.size)?;
    let spec = Lgt2dSpec::with_cutoff(group, args.beta, l1, l2, args.cutoff)?;

    if args.flux {
        let table = spec.flux_expectations()?;
        let mut report = Report::new(vec!["kind", "sector", "value"]);
        report.echo("command", "lgt2d --flux");
        report.echo("group", group.name());
        report.echo("beta", args.beta);
        report.echo("size", format!("{l1}x{l2}"));
        report.echo("cutoff", args.cutoff);
        report.echo("log_z", fmt_f64(table.log_z));
        for (label, v) in &table.vortex {
            report.row(vec!["vortex".into(), sector_label(label), fmt_f64(*v)]);
        }
        for (label, v) in &table.flux {
            report.row(vec!["flux".into(), sector_label(label), fmt_f64(*v)]);
        }
        return report.write_csv(out);
    }

    let rep = parse_irrep(group, args.charge, args.j)?;
    if rep.n_ality == 0 {
        return Err(CoreError::TrivialIrrep(
            "probe representation must have nonzero N-ality".into(),
        )
        .into());
    }
    let areas = if args.areas.is_empty() {
        (1..=(l1 * l2).min(16)).collect()
    } else {
        args.areas.clone()
    };
    let bound = spec.check_ty_bound(&rep, &areas)?;
    let mut report = Report::new(vec!["area", "lhs", "rhs", "regime", "ok"]);
    report.echo("command", "lgt2d");
    report.echo("group", group.name());
    report.echo("beta", args.beta);
    report.echo("size", format!("{l1}x{l2}"));
    report.echo("irrep", format!("{:?}", rep.label));
    report.echo("cutoff", args.cutoff);
    for row in &bound.rows {
        report.row(vec![
            row.area.to_string(),
            fmt_f64(row.lhs),
            fmt_f64(row.rhs),
            row.regime.to_string(),
            row.ok.to_string(),
        ]);
    }
    report.write_csv(out)
}

fn sector_label(label: &twistgap::lgt2d::SectorLabel<f64>) -> String {
    use twistgap::lgt2d::SectorLabel;
    match label {
        SectorLabel::Center(k) => format!("k={k}"),
        SectorLabel::Angle(t) => format!("theta={t:.10}"),
        SectorLabel::Charge(q) => format!("m={q}"),
    }
}

fn cmd_tri(args: TriArgs, out: &mut dyn std::io::Write) -> Result<()> {
    if let Some(grid) = &args.heatmap {
        let (rows, cols) = parse_size(grid)?;
        if rows != cols {
            bail!("heatmap grid must be square, got {rows}x{cols}");
        }
        let cells = triangular::rho_heatmap::<f64>(rows)?;
        let mut report = Report::new(vec!["t1", "t", "rho", "one_minus_exp_neg_rho", "phase"]);
        report.echo("command", "tri --heatmap");
        report.echo("resolution", rows);
        for cell in &cells {
            report.row(vec![
                fmt_f64(cell.t1),
                fmt_f64(cell.t),
                fmt_f64(cell.rho),
                fmt_f64(cell.one_minus_exp_neg_rho),
                cell.phase.to_string(),
            ]);
        }
        report.write_csv(out)?;
        if let Some(svg) = &args.svg {
            let values: Vec<f64> = cells.iter().map(|c| c.one_minus_exp_neg_rho).collect();
            output::svg_heatmap(
                svg,
                rows as usize,
                rows as usize,
                &values,
                "1 - e^{-rho} over (t1, t)",
            )?;
        }
        return Ok(());
    }

    let t = args.t.ok_or_else(|| anyhow!("--t required"))?;
    if args.slice {
        let mut report = Report::new(vec!["t1", "rho", "drho_dt1"]);
        report.echo("command", "tri --slice");
        report.echo("t", t);
        for i in 0..=190u32 {
            let t1 = -0.955 + (i as f64) * 0.005;
            let Ok(bound) = triangular::tri_rho(t1, t) else {
                continue; // ordered cells are skipped in the slice
            };
            let d = triangular::tri_rho_dt1(t1, t).unwrap_or(f64::NAN);
            report.row(vec![fmt_f64(t1), fmt_f64(bound.rho), fmt_f64(d)]);
        }
        return report.write_csv(out);
    }

    let t1 = args.t1.ok_or_else(|| anyhow!("--t1 required"))?;
    if args.rho || (!args.pair && !args.asymptotic) {
        let bound = triangular::tri_rho(t1, t)?;
        let mut report = Report::new(vec!["t1", "t", "rho", "g_of_b", "phase"]);
        report.echo("command", "tri --rho");
        report.row(vec![
            fmt_f64(t1),
            fmt_f64(t),
            fmt_f64(bound.rho),
            fmt_f64(bound.g_of_b),
            bound.phase.to_string(),
        ]);
        return report.write_csv(out);
    }

    let n = args.n.ok_or_else(|| anyhow!("--n required"))?;
    let m = args.m.ok_or_else(|| anyhow!("--m required"))?;
    let spec = TriangularIsing::new(t1, t, n, m)?;
    let mut report = Report::new(vec!["quantity", "value"]);
    report.echo("command", "tri");
    report.echo("t1", t1);
    report.echo("t", t);
    report.echo("n", n);
    report.echo("m", m);
    if args.pair {
        let pair = spec.partition_pair(args.allow_ordered)?;
        report.row(vec!["log_z".into(), fmt_f64(pair.log_z)]);
        report.row(vec!["log_z_minus".into(), fmt_f64(pair.log_z_minus)]);
        if spec.phase() == Phase::Disordered {
            report.row(vec![
                "one_minus_ratio".into(),
                fmt_f64(spec.one_minus_ratio()?),
            ]);
        }
    }
    if args.asymptotic {
        let asym = spec.asymptotic_ratio()?;
        report.row(vec![
            "asymptotic_one_minus_ratio".into(),
            fmt_f64(asym.value),
        ]);
        report.row(vec!["theta_bar".into(), fmt_f64(asym.theta_bar)]);
        report.row(vec!["f_sum".into(), fmt_f64(asym.f_sum)]);
        report.row(vec!["excluded_rows".into(), asym.excluded_rows.to_string()]);
    }
    report.write_csv(out)
}

fn cmd_square(args: SquareArgs, out: &mut dyn std::io::Write) -> Result<()> {
    let (l1, l2) = parse_size(&args.size)?;
    let spec = SquareIsing::new(args.a, args.b, l1, l2)?;

    if args.spectrum {
        let mut sp = Report::new(vec!["k", "gamma_k"]);
        sp.echo("command", "square --spectrum");
        sp.echo("a", args.a);
        sp.echo("b", args.b);
        sp.echo("size", format!("{l1}x{l2}"));
        let gammas = spec.gammas();
        for (k, g) in gammas.iter().enumerate() {
            sp.row(vec![k.to_string(), fmt_f64(*g)]);
        }
        sp.write_csv(out)?;
        if let Some(svg) = &args.svg {
            let pts: Vec<(f64, f64)> = gammas
                .iter()
                .enumerate()
                .map(|(k, &g)| (k as f64, g))
                .collect();
            output::svg_line(svg, &pts, "Onsager spectrum gamma_k")?;
        }
        return Ok(());
    }

    let mut report = Report::new(vec!["quantity", "value"]);
    report.echo("command", "square");
    report.echo("a", args.a);
    report.echo("b", args.b);
    report.echo("size", format!("{l1}x{l2}"));
    report.echo("phase", spec.phase());
    report.echo("dual_a", fmt_f64(spec.dual_a()));
    if args.pair || (!args.ratio && !args.decay) {
        let pair = spec.partition_pair()?;
        report.row(vec!["log_z".into(), fmt_f64(pair.log_z)]);
        report.row(vec!["log_z_minus".into(), fmt_f64(pair.log_z_minus)]);
    }
    if args.ratio {
        report.row(vec![
            "one_minus_ratio".into(),
            fmt_f64(spec.one_minus_ratio()?),
        ]);
    }
    if args.decay {
        report.row(vec!["decay_rate".into(), fmt_f64(spec.decay_rate()?)]);
        report.row(vec![
            "decay_rate_l2_limit".into(),
            fmt_f64(spec.decay_rate_infinite_l2()),
        ]);
        report.row(vec!["mass_gap".into(), fmt_f64(spec.mass_gap())]);
    }
    report.write_csv(out)
}

fn parse_subgroup(s: &str, group: Group) -> Result<TwistSubgroup> {
    let lower = s.to_ascii_lowercase();
    match lower.as_str() {
        "trivial" | "e" => Ok(TwistSubgroup::Trivial),
        "full" | "g" => Ok(TwistSubgroup::Full),
        "center" => match group {
            Group::Su2 => Ok(TwistSubgroup::Cyclic(2)),
            Group::Cyclic(n) => Ok(TwistSubgroup::Cyclic(n)),
            Group::Circle => bail!("U(1) has no finite center; pick zN or full"),
        },
        _ => {
            if let Some(n) = lower.strip_prefix('z').and_then(|n| n.parse::<u32>().ok()) {
                return Ok(TwistSubgroup::Cyclic(n));
            }
            bail!("unknown subgroup {s:?} (trivial, center, full, or zN)")
        }
    }
}

fn cmd_pcm(args: PcmArgs, out: &mut dyn std::io::Write) -> Result<()> {
    let group = parse_group(&args.group)?;
    let subgroup = parse_subgroup(&args.subgroup, group)?;
    let spec = ChainSpec::new(group, subgroup, args.beta, args.length)?;
    let echo = |report: &mut Report| {
        report.echo("group", group.name());
        report.echo("subgroup", &args.subgroup);
        report.echo("beta", args.beta);
        report.echo("length", args.length);
    };

    if args.wall {
        let mut report = Report::new(vec!["quantity", "value"]);
        report.echo("command", "pcm --wall");
        echo(&mut report);
        report.row(vec!["log_z".into(), fmt_f64(spec.partition_function()?)]);
        report.row(vec![
            "wall_projection".into(),
            fmt_f64(spec.wall_projection()?),
        ]);
        return report.write_csv(out);
    }

    let rep = parse_irrep(group, args.charge, args.j)?;
    if rep.is_trivial() {
        return Err(
            CoreError::TrivialIrrep("correlator representation must be nontrivial".into()).into(),
        );
    }
    let ns: Vec<u32> = if args.ns.is_empty() {
        vec![1, 2, 4, 8]
    } else {
        args.ns.clone()
    };

    if args.correlator {
        let mut report = Report::new(vec!["n", "thermodynamic", "finite_l"]);
        report.echo("command", "pcm --correlator");
        echo(&mut report);
        report.echo("irrep", format!("{:?}", rep.label));
        for &n in &ns {
            let thermo = spec.correlation(&rep, n)?;
            let finite = spec
                .correlation_finite(&rep, n)
                .map(fmt_f64)
                .unwrap_or_default();
            report.row(vec![n.to_string(), fmt_f64(thermo), finite]);
        }
        return report.write_csv(out);
    }

    let rows = spec.check_spin_ty_bound(&rep, &ns)?;
    let mut report = Report::new(vec!["n", "lhs", "rhs", "prefactor", "regime", "ok"]);
    report.echo("command", "pcm");
    echo(&mut report);
    report.echo("irrep", format!("{:?}", rep.label));
    for row in &rows {
        report.row(vec![
            row.n.to_string(),
            fmt_f64(row.lhs),
            fmt_f64(row.rhs),
            fmt_f64(row.prefactor),
            row.regime.to_string(),
            row.ok.to_string(),
        ]);
    }
    report.write_csv(out)
}

fn build_lattice(args: &OracleLattice) -> Result<SpinLattice> {
    let (l1, l2) = parse_size(&args.size)?;
    let kind = args.lattice.to_ascii_lowercase();
    Ok(match kind.as_str() {
        "square" => {
            let a = args.a.ok_or_else(|| anyhow!("square lattice needs --a"))?;
            let b = args.b.ok_or_else(|| anyhow!("square lattice needs --b"))?;
            SpinLattice::square(l1, l2, a, b)?
        }
        "tri1" | "triangular-fig1" => {
            let t1 = args
                .t1
                .ok_or_else(|| anyhow!("triangular lattice needs --t1"))?;
            let t = args
                .t
                .ok_or_else(|| anyhow!("triangular lattice needs --t"))?;
            SpinLattice::triangular_fig1_tanh(l1, l2, t1, t)?
        }
        "tri2" | "triangular-fig2" => {
            let t1 = args
                .t1
                .ok_or_else(|| anyhow!("triangular lattice needs --t1"))?;
            let t = args
                .t
                .ok_or_else(|| anyhow!("triangular lattice needs --t"))?;
            SpinLattice::triangular_fig2_tanh(l1, l2, t1, t)?
        }
        _ => bail!("unknown lattice {:?} (square, tri1, tri2)", args.lattice),
    })
}

fn lattice_echo(report: &mut Report, args: &OracleLattice) {
    report.echo("lattice", &args.lattice);
    report.echo("size", &args.size);
    for (key, v) in [("a", args.a), ("b", args.b), ("t1", args.t1), ("t", args.t)] {
        if let Some(v) = v {
            report.echo(key, v);
        }
    }
}

fn cmd_oracle(args: OracleArgs, out: &mut dyn std::io::Write) -> Result<()> {
    match args.check {
        OracleCommand::CheckInequality(latargs) => {
            let lattice = build_lattice(&latargs)?;
            let ns: Vec<u32> = if latargs.ns.is_empty() {
                (1..lattice.l1.min(9)).collect()
            } else {
                latargs.ns.clone()
            };
            let rep = checks::check_inequality(&lattice, &ns)?;
            let mut report = Report::new(vec!["n", "lhs", "rhs", "regime_flag", "ok"]);
            report.echo("command", "oracle check-inequality");
            lattice_echo(&mut report, &latargs);
            report.echo("one_minus_ratio", fmt_f64(rep.pair.one_minus_ratio()));
            for row in &rep.rows {
                report.row(vec![
                    row.n.to_string(),
                    fmt_f64(row.lhs),
                    fmt_f64(row.rhs),
                    row.regime.to_string(),
                    row.ok.to_string(),
                ]);
            }
            report.write_csv(out)
        }
        OracleCommand::Partition(latargs) => {
            let lattice = build_lattice(&latargs)?;
            if latargs.dump_bonds {
                write!(out, "{}", lattice.bond_dump())?;
                return Ok(());
            }
            let pair = match latargs.engine.as_deref() {
                Some("enumerate") => oracle::enumerate_partition(&lattice)?,
                Some("transfer") => oracle::strip_transfer(&lattice)?,
                Some(other) => bail!("unknown engine {other:?}"),
                None => {
                    if lattice.sites() <= oracle::ENUMERATION_SITE_CAP {
                        oracle::enumerate_partition(&lattice)?
                    } else {
                        oracle::strip_transfer(&lattice)?
                    }
                }
            };
            let mut report = Report::new(vec!["quantity", "value"]);
            report.echo("command", "oracle partition");
            lattice_echo(&mut report, &latargs);
            report.echo("method", pair.method);
            if pair.ratio_outside_unit_range() {
                report.echo("ratio_warning", "1 - Z_tw/Z outside [0, 1]");
            }
            report.row(vec!["log_z".into(), fmt_f64(pair.log_z)]);
            report.row(vec!["log_z_twisted".into(), fmt_f64(pair.log_z_twisted)]);
            report.row(vec![
                "one_minus_ratio".into(),
                fmt_f64(pair.one_minus_ratio()),
            ]);
            report.write_csv(out)
        }
        OracleCommand::WallMod2 {
            lattice: latargs,
            walls,
        } => {
            let lattice = build_lattice(&latargs)?;
            let rep = checks::wall_mod2_check(&lattice, walls)?;
            let mut report = Report::new(vec![
                "walls",
                "log_z_reference",
                "log_z_stacked",
                "abs_diff",
            ]);
            report.echo("command", "oracle wall-mod2");
            lattice_echo(&mut report, &latargs);
            report.row(vec![
                rep.walls.to_string(),
                fmt_f64(rep.log_z_one_wall),
                fmt_f64(rep.log_z_stacked),
                fmt_f64(rep.max_abs_diff),
            ]);
            report.write_csv(out)
        }
        OracleCommand::Equivalence { n, m, t1, t } => {
            let rep = checks::lattice_equivalence_check(n, m, t1.atanh(), t.atanh())?;
            let mut report = Report::new(vec![
                "n",
                "m",
                "logZ_fig1",
                "logZ_fig2",
                "diff",
                "expected_equal",
            ]);
            report.echo("command", "oracle equivalence");
            report.echo("t1", t1);
            report.echo("t", t);
            report.row(vec![
                rep.n.to_string(),
                rep.m.to_string(),
                fmt_f64(rep.log_z_fig1),
                fmt_f64(rep.log_z_fig2),
                fmt_f64(rep.diff),
                rep.expected_equal.to_string(),
            ]);
            report.write_csv(out)
        }
        OracleCommand::Sce { l1, l2, ts } => {
            let ts = if ts.is_empty() { vec![0.05, 0.025] } else { ts };
            let rows = checks::sce_leading_check(l1, l2, &ts)?;
            let mut report = Report::new(vec!["t", "r"]);
            report.echo("command", "oracle sce");
            report.echo("l1", l1);
            report.echo("l2", l2);
            for row in &rows {
                report.row(vec![fmt_f64(row.t), fmt_f64(row.r)]);
            }
            report.write_csv(out)
        }
    }
}

fn cmd_mc(args: McArgs, out: &mut dyn std::io::Write) -> Result<()> {
    let latargs = OracleLattice {
        lattice: args.lattice.clone(),
        size: args.size.clone(),
        a: args.a,
        b: args.b,
        t1: args.t1,
        t: args.t,
        ns: vec![],
        engine: None,
        dump_bonds: false,
    };
    let lattice = build_lattice(&latargs)?;

    if args.audit {
        let audit = detailed_balance_audit(&lattice, args.sweeps, args.seed, 3.0)?;
        let value = serde_json::json!({
            "config": config_json(&args),
            "audit": {
                "states": audit.states,
                "worst_pull_sigma": audit.worst_pull,
                "passed": audit.passed,
            }
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
        return Ok(());
    }

    let mut mc = McConfig::new(lattice.clone(), args.sweeps, args.therm, args.seed);
    mc.chains = args.chains;
    mc.sector_flips_per_sweep = args.flips;

    let estimate = run_extended_ensemble(&mc)?;
    // exact reference where one is computable
    let exact = exact_ratio(&lattice);
    let agree = exact.map(|z| (estimate.ratio - z).abs() <= 3.0 * estimate.std_err);

    let correlators = if args.correlate.is_empty() {
        None
    } else {
        Some(mc_correlator(&mc, &args.correlate)?)
    };

    let value = serde_json::json!({
        "config": config_json(&args),
        "ratio": estimate.ratio,
        "stderr": estimate.std_err,
        "acceptance": {
            "spin": estimate.spin_acceptance,
            "sector": estimate.sector_acceptance,
        },
        "tau": estimate.tau,
        "chains": estimate.chains,
        "exact_ratio": exact,
        "within_3_sigma": agree,
        "correlators": correlators,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
    Ok(())
}

fn exact_ratio(lattice: &SpinLattice) -> Option<f64> {
    if lattice.sites() <= oracle::ENUMERATION_SITE_CAP {
        return oracle::enumerate_partition(lattice).ok().map(|p| p.ratio());
    }
    if lattice.kind == LatticeKind::Square {
        // couplings are uniform per family by construction
        let a = lattice.bonds.iter().find(|b| b.dx == 1)?.coupling;
        let b = lattice.bonds.iter().find(|b| b.dx == 0)?.coupling;
        let spec = SquareIsing::new(a, b, lattice.l1, lattice.l2).ok()?;
        let one_minus = spec.one_minus_ratio().ok()?;
        return Some(1.0 - one_minus);
    }
    None
}

fn config_json(args: &McArgs) -> serde_json::Value {
    serde_json::json!({
        "lattice": args.lattice,
        "size": args.size,
        "a": args.a,
        "b": args.b,
        "t1": args.t1,
        "t": args.t,
        "sweeps": args.sweeps,
        "thermalization": args.therm,
        "seed": args.seed,
        "chains": args.chains,
        "sector_flips_per_sweep": args.flips,
        "estimator": "sector-occupation ratio",
    })
}
