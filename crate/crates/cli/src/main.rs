mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracmix::decay::{coeff_curve, fit_rate, geomspace, linspace, FlowKind, DEFAULT_LOSS_BUDGET};
use fracmix::directint::{
    sharpness_witness, typeii_estimate_check, typeii_solve, DirectIntegralModel, TensorModel, TensorVector, TypeIIProblem,
};
use fracmix::fracsolve::{
    classical_solve, frac_solve, highpass_frac_solve, tauberian_check, threshold_scan, CutoffProfile, SolveReport,
    TauProfile, TauberianConfig,
};
use fracmix::mixsched::{
    choose_root_index, higher_order_bound, order_for_partition, partition_sweep, partition_tree,
    quad_obstruction_report, random_points, sweep_rng, triple_bound, build_partition, verify_partition,
    GapConfiguration, ObstructionInput,
};
use fracmix::rootsys::{
    build_root_system, eta_epsilon, find_maximal_sos, holder_gamma, mixing_exponent, regularity_exponents, zeta_single,
    CartanElement, Family, FieldLabel, SpectralGapProfile,
};
use fracmix::selftest::run_selftest;
use fracmix::sl2model::{
    make_grid, slow_profile, sobolev_norm, Generator, GridConfig, IrrepParams, ModelVector, Profile, Series,
};
use fracmix::{Complex64, Error};
use serde::Serialize;
use serde_json::json;

use output::{num, opt, Format, Sink};

#[derive(Parser, Debug)]
#[command(name = "fracmix", version, about = "Fractional cohomological equations and mixing-rate experiments")]
struct Cli {
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, global = true, env = "FRACMIX_OUT", default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maximal strongly orthogonal system and exponent tables.
    #[command(after_help = "CSV: roots.csv  index,root,gamma,field,zeta\n     \
                            roots_eta.csv  m,log_eta,eta  (η_ε at m·2ρ)\n     \
                            roots_orders.csv  n,exponent,kernel_at_m1")]
    Roots(RootsArgs),
    /// Representation data and Sobolev norms of the default test vector.
    #[command(after_help = "CSV: irrep.csv  order,sobolev_norm")]
    Irrep(IrrepCmd),
    /// Matrix-coefficient decay curve and fitted rate.
    #[command(after_help = "CSV: decay.csv  time,magnitude\n     decay_fit.csv  flow,exponent,window_lo,window_hi,samples,residual")]
    Decay(DecayArgs),
    /// Classical or fractional solve, high-pass solve, or threshold scan.
    #[command(after_help = "CSV (scan): solve.csv  r,verdict,tail_slope\n\
                            CSV (other modes): solve.csv  cutoff,partial_norm  with the verdict in solve_summary.csv")]
    Solve(SolveArgs),
    /// Tauberian identity for even test densities.
    #[command(after_help = "CSV: tauberian.csv  r_prime,lhs,rhs,relative_error,tail_bound")]
    Tauberian(TauberianArgs),
    /// Type II solve, estimate check and sharpness witness on a tensor model.
    #[command(after_help = "CSV: typeii.csv  branch,omega_norm,verdicts\n     \
                            typeii_witness.csv  branch,verdict,divergence_exponent")]
    Typeii(TypeiiArgs),
    /// Partition plan, higher-order bounds and the obstruction report.
    #[command(after_help = "CSV: mixbound.csv  slot,point,log_value,block\n     \
                            mixbound_sweep.csv  index,n,rank,family,i0,k,j,pivot_gap,min_pivot,ok")]
    Mixbound(MixboundArgs),
    /// Invariant suites.
    #[command(after_help = "CSV: selftest.csv  suite,check,pass,value,tolerance")]
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 1e-6)]
    lambda_min: f64,
    #[arg(long, default_value_t = 1e3)]
    lambda_max: f64,
    /// Ratio of consecutive |λ| nodes.
    #[arg(long, default_value_t = 1.05)]
    ratio: f64,
}

impl GridArgs {
    fn config(&self) -> Result<GridConfig, Error> {
        let c = GridConfig { lambda_min: self.lambda_min, lambda_max: self.lambda_max, ratio: self.ratio };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args, Debug, Clone)]
struct IrrepArgs {
    #[arg(long, default_value = "complementary")]
    series: String,
    /// Casimir eigenvalue (principal, complementary).
    #[arg(long)]
    mu: Option<f64>,
    /// Complementary parameter ϖ in (0,1); alternative to --mu.
    #[arg(long)]
    varpi: Option<f64>,
    /// Discrete series index n ≥ 2.
    #[arg(long, default_value_t = 2)]
    n: u32,
}

impl IrrepArgs {
    fn irrep(&self) -> Result<IrrepParams, Error> {
        let series: Series = self.series.parse()?;
        match series {
            Series::Complementary => match (self.mu, self.varpi) {
                (Some(_), Some(_)) => Err(Error::Configuration("give either --mu or --varpi".into())),
                (Some(mu), None) => IrrepParams::complementary(mu),
                (None, v) => IrrepParams::complementary_varpi(v.unwrap_or(0.5)),
            },
            Series::Principal => IrrepParams::principal(self.mu.unwrap_or(2.0)),
            Series::Discrete => IrrepParams::make(Series::Discrete, self.n as f64),
            Series::Mock => IrrepParams::make(Series::Mock, 1.0),
        }
    }
}

#[derive(Args, Debug)]
struct RootsArgs {
    #[arg(long, default_value = "A")]
    family: String,
    #[arg(long, default_value_t = 3)]
    rank: usize,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Spectral gap γ for every root of the system.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// 1-based system indices whose root subgroup is complex.
    #[arg(long, value_delimiter = ',')]
    complex: Vec<usize>,
    /// s₀ in γ(s) = min{s/(4s₀), 1/2}.
    #[arg(long, default_value_t = 1.0)]
    s0: f64,
    /// Largest mixing order tabulated.
    #[arg(long, default_value_t = 6)]
    max_order: usize,
}

#[derive(Args, Debug)]
struct IrrepCmd {
    #[command(flatten)]
    irrep: IrrepArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 3)]
    max_order: usize,
}

#[derive(Args, Debug)]
struct DecayArgs {
    #[command(flatten)]
    irrep: IrrepArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value = "geodesic")]
    flow: String,
    /// Defaults: 0 (geodesic), 5 (horocycle).
    #[arg(long)]
    t_min: Option<f64>,
    /// Defaults: 6 (geodesic), 200 (horocycle).
    #[arg(long)]
    t_max: Option<f64>,
    /// Defaults: 61 (geodesic, linear), 40 (horocycle, geometric).
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum SolveMode {
    Classical,
    Fractional,
    Highpass,
    Scan,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    irrep: IrrepArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value = "scan")]
    mode: SolveMode,
    /// Fractional order for `fractional` and `highpass`.
    #[arg(long, default_value_t = 0.2)]
    r: f64,
    #[arg(long, default_value_t = 0.01)]
    r_min: f64,
    #[arg(long, default_value_t = 0.6)]
    r_max: f64,
    #[arg(long, default_value_t = 0.01)]
    r_step: f64,
    /// Cutoff scale s of the low-pass profile (1 on |λ| ≤ s, 0 beyond 2s).
    #[arg(long, default_value_t = 1.0)]
    cutoff_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum TauKind {
    Gaussian,
    Bump,
}

#[derive(Args, Debug)]
struct TauberianArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    profile: TauKind,
    /// Gaussian width or bump half-width.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4")]
    r_prime: Vec<f64>,
    #[arg(long, default_value_t = 400.0)]
    t_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum TypeiiMode {
    Solve,
    Estimate,
    Sharpness,
    All,
}

#[derive(Args, Debug)]
struct TypeiiArgs {
    /// Factors as `comp:<varpi>`, `prin:<mu>` or `disc:<n>`.
    #[arg(long = "factor", default_values = ["comp:0.5", "comp:0.5"])]
    factors: Vec<String>,
    /// 1-based factor indices whose field is complex.
    #[arg(long, value_delimiter = ',')]
    complex: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.2")]
    r: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "all")]
    mode: TypeiiMode,
    /// Exponents for the sharpness witness; defaults to --r with the chosen factor raised to its gap plus 0.05.
    #[arg(long, value_delimiter = ',')]
    witness_r: Vec<f64>,
    /// 1-based factor probed by the witness.
    #[arg(long, default_value_t = 1)]
    witness_factor: usize,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct MixboundArgs {
    #[arg(long, default_value = "B")]
    family: String,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Split coordinates of one point, comma separated; repeat per point. Random when absent.
    #[arg(long = "point")]
    points: Vec<String>,
    /// Number of random points when --point is absent.
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Polynomial penalty exponent d.
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    norm_product: f64,
    /// Random configurations to sweep (n in 3..=8, rank in 1..=3).
    #[arg(long, default_value_t = 0)]
    sweep: usize,
    /// Obstruction inputs: |c|, ∫f₁², constant C and decay rate of η(m) = e^{-rate·m}.
    #[arg(long, default_value_t = 1.0)]
    obstruction_c: f64,
    #[arg(long, default_value_t = 1.0)]
    obstruction_f1: f64,
    #[arg(long, default_value_t = 10.0)]
    obstruction_constant: f64,
    #[arg(long, default_value_t = 0.1)]
    obstruction_rate: f64,
    #[arg(long, default_value_t = 100000)]
    obstruction_m_max: u64,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Run only these suites.
    #[arg(long, value_delimiter = ',')]
    suite: Vec<String>,
    #[command(flatten)]
    grid: GridArgs,
}

enum Failure {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

type Run = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut sink = match Sink::new(&cli.out, cli.format) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot use output directory {}: {e}", cli.out.display());
            return ExitCode::from(1);
        }
    };
    let result = match &cli.command {
        Command::Roots(a) => roots(a, &mut sink),
        Command::Irrep(a) => irrep(a, &mut sink),
        Command::Decay(a) => decay(a, &mut sink),
        Command::Solve(a) => solve(a, &mut sink),
        Command::Tauberian(a) => tauberian(a, &mut sink),
        Command::Typeii(a) => typeii(a, &mut sink),
        Command::Mixbound(a) => mixbound(a, &mut sink),
        Command::Selftest(a) => selftest(a, &mut sink),
    };
    for p in sink.written() {
        println!("wrote {}", p.display());
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Check(m)) => {
            eprintln!("failed: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn root_label(v: &[i64]) -> String {
    let mut s = String::new();
    for (i, &c) in v.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let sign = if c < 0 { "-" } else if s.is_empty() { "" } else { "+" };
        let mag = if c.abs() == 1 { String::new() } else { c.abs().to_string() };
        s.push_str(&format!("{sign}{mag}e{}", i + 1));
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

fn labels(n: usize, complex: &[usize], what: &str) -> Result<Vec<FieldLabel>, Failure> {
    if let Some(&i) = complex.iter().find(|&&i| i == 0 || i > n) {
        return Err(Failure::Usage(format!("{what} index {i} out of range 1..={n}")));
    }
    Ok((1..=n).map(|i| if complex.contains(&i) { FieldLabel::C } else { FieldLabel::R }).collect())
}

fn roots(a: &RootsArgs, sink: &mut Sink) -> Run {
    let family: Family = a.family.parse()?;
    let rs = build_root_system(family, a.rank)?;
    let sos = find_maximal_sos(&rs)?;
    let fields = labels(sos.len(), &a.complex, "--complex")?;
    let gaps = SpectralGapProfile::new(vec![a.gamma; sos.len()], fields.clone())?;
    let (zeta, p) = regularity_exponents(&sos, &gaps, a.epsilon)?;
    if !(a.epsilon > 0.0 && a.epsilon < gaps.min_gamma()) {
        return Err(Error::Domain(format!("epsilon {} must lie in (0, gamma)", a.epsilon)).into());
    }
    let members: Vec<String> = sos.members.iter().map(|r| root_label(r)).collect();
    let per_root: Vec<_> = sos
        .members
        .iter()
        .zip(&fields)
        .map(|(r, &f)| {
            json!({
                "root": root_label(r),
                "vector": r,
                "gamma": a.gamma,
                "field": format!("{f:?}"),
                "zeta": zeta_single(a.gamma, f, a.epsilon),
            })
        })
        .collect();
    let two_rho: Vec<f64> = (0..rs.dim)
        .map(|i| rs.positive_roots.iter().map(|r| r[i] as f64).sum())
        .collect();
    let mut eta_rows = Vec::new();
    for m in linspace(0.0, 5.0, 11) {
        let t = CartanElement::new(two_rho.iter().map(|x| x * m).collect());
        let eta = eta_epsilon(&sos, &t, &gaps, a.epsilon, &rs)?;
        eta_rows.push((m, eta.ln(), eta));
    }
    let eta1 = eta_rows[2].2;
    let orders: Vec<(usize, f64, f64)> = (2..=a.max_order.max(2))
        .map(|n| {
            let e = 1.0 / ((n - 1) * sos.len()) as f64;
            mixing_exponent(n, sos.len(), eta1).map(|k| (n, e, k))
        })
        .collect::<Result<_, _>>()?;
    let holder: Vec<(f64, f64)> = [0.5, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&s| holder_gamma(s, a.s0).map(|g| (s, g)))
        .collect::<Result<_, _>>()?;
    println!(
        "{:?}{}: {} positive roots, maximal system {{{}}}, zeta = {zeta}, p = {p}",
        family,
        a.rank,
        rs.positive_roots.len(),
        members.join(", ")
    );
    match sink.format() {
        Format::Json => sink.json(
            "roots",
            &json!({
                "family": format!("{family:?}"),
                "rank": a.rank,
                "positive_roots": rs.positive_roots.len(),
                "system": members,
                "maximal": sos.maximal,
                "epsilon": a.epsilon,
                "zeta": zeta,
                "p": p,
                "roots": per_root,
                "eta_along_2rho": eta_rows.iter().map(|r| json!({"m": r.0, "log_eta": r.1, "eta": r.2})).collect::<Vec<_>>(),
                "mixing_orders": orders.iter().map(|o| json!({"n": o.0, "exponent": o.1, "kernel_at_m1": o.2})).collect::<Vec<_>>(),
                "holder": holder.iter().map(|h| json!({"s": h.0, "s0": a.s0, "gamma": h.1})).collect::<Vec<_>>(),
            }),
        )?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = sos
                .members
                .iter()
                .zip(&fields)
                .enumerate()
                .map(|(i, (r, &f))| {
                    vec![
                        (i + 1).to_string(),
                        root_label(r),
                        num(a.gamma),
                        format!("{f:?}"),
                        num(zeta_single(a.gamma, f, a.epsilon)),
                    ]
                })
                .collect();
            sink.csv("roots", &["index", "root", "gamma", "field", "zeta"], &rows)?;
            let rows: Vec<Vec<String>> = eta_rows.iter().map(|r| vec![num(r.0), num(r.1), num(r.2)]).collect();
            sink.csv("roots_eta", &["m", "log_eta", "eta"], &rows)?;
            let rows: Vec<Vec<String>> = orders.iter().map(|o| vec![o.0.to_string(), num(o.1), num(o.2)]).collect();
            sink.csv("roots_orders", &["n", "exponent", "kernel_at_m1"], &rows)?;
        }
    }
    Ok(())
}

fn test_vector(ir: &IrrepParams, grid: &GridArgs) -> Result<ModelVector, Error> {
    Ok(ModelVector::from_profile(make_grid(grid.config()?, ir)?, slow_profile(ir)))
}

fn irrep(a: &IrrepCmd, sink: &mut Sink) -> Run {
    let ir = a.irrep.irrep()?;
    let v = test_vector(&ir, &a.grid)?;
    let gens = [Generator::X, Generator::U, Generator::V];
    let norms: Vec<(usize, f64)> = (0..=a.max_order)
        .map(|k| sobolev_norm(&v, &gens, k, &ir).map(|n| (k, n)))
        .collect::<Result<_, _>>()?;
    println!(
        "{:?}: mu = {}, varpi = {}, nu0 = {}, optimal geodesic rate {}",
        ir.series,
        ir.mu,
        ir.varpi,
        ir.nu0,
        ir.optimal_rate()
    );
    match sink.format() {
        Format::Json => sink.json(
            "irrep",
            &json!({
                "irrep": ir,
                "optimal_rate": ir.optimal_rate(),
                "half_line": ir.half_line(),
                "nodes": v.grid.len(),
                "sobolev": norms.iter().map(|n| json!({"order": n.0, "norm": n.1})).collect::<Vec<_>>(),
            }),
        )?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = norms.iter().map(|n| vec![n.0.to_string(), num(n.1)]).collect();
            sink.csv("irrep", &["order", "sobolev_norm"], &rows)?;
        }
    }
    Ok(())
}

fn decay(a: &DecayArgs, sink: &mut Sink) -> Run {
    let flow: FlowKind = a.flow.parse()?;
    let ir = a.irrep.irrep()?;
    let v = test_vector(&ir, &a.grid)?;
    let times = match flow {
        FlowKind::Geodesic => linspace(a.t_min.unwrap_or(0.0), a.t_max.unwrap_or(6.0), a.samples.unwrap_or(61)),
        FlowKind::Horocycle => {
            let lo = a.t_min.unwrap_or(5.0);
            if lo <= 0.0 {
                return Err(Failure::Usage("horocycle times are sampled geometrically; --t-min must be positive".into()));
            }
            geomspace(lo, a.t_max.unwrap_or(200.0), a.samples.unwrap_or(40))
        }
    };
    let curve = coeff_curve(&v, &v, flow, &times, &ir, DEFAULT_LOSS_BUDGET)?;
    let fit = fit_rate(&curve)?;
    println!("{:?} decay for {:?}: fitted exponent {:.6} ({} samples)", flow, ir.series, fit.exponent, fit.samples);
    match sink.format() {
        Format::Json => sink.json("decay", &json!({"irrep": ir, "curve": curve, "fit": fit}))?,
        Format::Csv => {
            let rows: Vec<Vec<String>> =
                curve.times.iter().zip(&curve.magnitudes).map(|(t, m)| vec![num(*t), num(*m)]).collect();
            sink.csv("decay", &["time", "magnitude"], &rows)?;
            sink.csv(
                "decay_fit",
                &["flow", "exponent", "window_lo", "window_hi", "samples", "residual"],
                &[vec![
                    a.flow.clone(),
                    num(fit.exponent),
                    num(fit.window.0),
                    num(fit.window.1),
                    fit.samples.to_string(),
                    num(fit.residual),
                ]],
            )?;
        }
    }
    Ok(())
}

fn solve(a: &SolveArgs, sink: &mut Sink) -> Run {
    let ir = a.irrep.irrep()?;
    let v = test_vector(&ir, &a.grid)?;
    let report: SolveReport = match a.mode {
        SolveMode::Scan => {
            if !(a.r_step > 0.0 && a.r_min > 0.0 && a.r_max > a.r_min) {
                return Err(Failure::Usage("scan needs 0 < r-min < r-max and r-step > 0".into()));
            }
            let steps = ((a.r_max - a.r_min) / a.r_step + 1e-9).floor() as usize;
            let grid: Vec<f64> = (0..=steps).map(|i| a.r_min + i as f64 * a.r_step).collect();
            let scan = threshold_scan(&v, &ir, &grid)?;
            println!(
                "threshold bracket [{}, {}], estimate {}, monotone {}",
                opt(scan.last_solvable),
                opt(scan.first_divergent),
                opt(scan.estimate),
                scan.monotone
            );
            match sink.format() {
                Format::Json => sink.json("solve", &json!({"irrep": ir, "scan": scan}))?,
                Format::Csv => {
                    let rows: Vec<Vec<String>> = scan
                        .entries
                        .iter()
                        .map(|e| vec![num(e.r), format!("{:?}", e.verdict), num(e.tail_slope)])
                        .collect();
                    sink.csv("solve", &["r", "verdict", "tail_slope"], &rows)?;
                }
            }
            return Ok(());
        }
        SolveMode::Classical => classical_solve(&v, &ir)?,
        SolveMode::Fractional => frac_solve(&v, a.r, &ir)?,
        SolveMode::Highpass => highpass_frac_solve(&v, a.r, &CutoffProfile { scale: a.cutoff_scale })?,
    };
    println!(
        "{:?} solve: {:?}, norm {}, tail slope {}",
        a.mode,
        report.verdict,
        opt(report.solution_norm),
        report.tail_slope
    );
    match sink.format() {
        Format::Json => sink.json("solve", &json!({"irrep": ir, "mode": format!("{:?}", a.mode), "report": report}))?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = report.partial_norms.iter().map(|p| vec![num(p.0), num(p.1)]).collect();
            sink.csv("solve", &["cutoff", "partial_norm"], &rows)?;
            sink.csv(
                "solve_summary",
                &["mode", "verdict", "solution_norm", "tail_slope", "divergence_exponent"],
                &[vec![
                    format!("{:?}", a.mode).to_lowercase(),
                    format!("{:?}", report.verdict),
                    opt(report.solution_norm),
                    num(report.tail_slope),
                    num(report.divergence_exponent),
                ]],
            )?;
        }
    }
    Ok(())
}

fn tauberian(a: &TauberianArgs, sink: &mut Sink) -> Run {
    let tau = match a.profile {
        TauKind::Gaussian => TauProfile::Gaussian { sigma: a.scale },
        TauKind::Bump => TauProfile::SquaredBump { width: a.scale },
    };
    let cfg = TauberianConfig { t_max: a.t_max, ..Default::default() };
    let reports = a
        .r_prime
        .iter()
        .map(|&r| tauberian_check(&tau, r, &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    for r in &reports {
        println!("r' = {}: relative error {:.3e}", r.r_prime, r.relative_error);
    }
    match sink.format() {
        Format::Json => sink.json("tauberian", &json!({"profile": tau, "reports": reports}))?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| vec![num(r.r_prime), num(r.lhs), num(r.rhs), num(r.relative_error), num(r.tail_bound)])
                .collect();
            sink.csv("tauberian", &["r_prime", "lhs", "rhs", "relative_error", "tail_bound"], &rows)?;
        }
    }
    Ok(())
}

fn factor_irrep(text: &str) -> Result<IrrepParams, Failure> {
    let (kind, val) = text
        .split_once(':')
        .ok_or_else(|| Failure::Usage(format!("factor `{text}` is not of the form kind:value")))?;
    let x: f64 = val.parse().map_err(|_| Failure::Usage(format!("bad number in factor `{text}`")))?;
    Ok(match kind {
        "comp" => IrrepParams::complementary_varpi(x)?,
        "prin" => IrrepParams::principal(x)?,
        "disc" => IrrepParams::make(Series::Discrete, x)?,
        _ => return Err(Failure::Usage(format!("unknown factor kind `{kind}`"))),
    })
}

#[derive(Serialize)]
struct BranchSummary {
    branch: String,
    omega_norm: f64,
    verdicts: Vec<String>,
}

fn typeii(a: &TypeiiArgs, sink: &mut Sink) -> Run {
    let irreps = a.factors.iter().map(|f| factor_irrep(f)).collect::<Result<Vec<_>, _>>()?;
    let fields = labels(irreps.len(), &a.complex, "--complex")?;
    let factors: Vec<DirectIntegralModel> = irreps
        .iter()
        .zip(&fields)
        .map(|(&ir, &f)| DirectIntegralModel::single(ir).with_field(f))
        .collect();
    let model = TensorModel::new(factors, a.grid.config()?, a.epsilon)?;
    let profiles: Vec<Profile> = irreps.iter().map(slow_profile).collect();
    let comps = vec![0; irreps.len()];
    let xi = TensorVector::from_profiles(&model, &comps, Complex64::new(1.0, 0.0), &profiles)?;
    let mut out = serde_json::Map::new();
    let mut rows = Vec::new();
    if matches!(a.mode, TypeiiMode::Solve | TypeiiMode::Estimate | TypeiiMode::All) {
        let problem = TypeIIProblem::new(a.r.clone(), &model)?;
        let run = typeii_solve(&xi, &problem, &model)?;
        let summaries: Vec<BranchSummary> = run
            .branches
            .iter()
            .map(|b| BranchSummary {
                branch: b.branch.iter().map(|l| format!("{l:?}")).collect::<Vec<_>>().join("x"),
                omega_norm: b.omega_norm,
                verdicts: b.reports.iter().flatten().map(|r| format!("{:?}", r.verdict)).collect(),
            })
            .collect();
        println!(
            "{} branch(es) solved, reconstruction error {:.3e}",
            summaries.len(),
            run.reconstruction_error
        );
        if let Some(n) = &run.mapping_note {
            println!("note: {n}");
        }
        for s in &summaries {
            rows.push(vec![s.branch.clone(), num(s.omega_norm), s.verdicts.join(";")]);
        }
        out.insert("branches".into(), json!(summaries));
        out.insert("reconstruction_error".into(), json!(run.reconstruction_error));
        out.insert("mapping_note".into(), json!(run.mapping_note));
        out.insert("gaps".into(), json!(model.gaps));
        if a.mode != TypeiiMode::Solve {
            let est = typeii_estimate_check(&run, &xi, &model)?;
            println!("estimate ratio ‖ω‖/‖Σξ‖ = {}", est.ratio);
            out.insert("estimate".into(), json!(est));
        }
    }
    let mut witness_rows = Vec::new();
    if matches!(a.mode, TypeiiMode::Sharpness | TypeiiMode::All) {
        let f = a.witness_factor;
        if f == 0 || f > irreps.len() {
            return Err(Failure::Usage(format!("--witness-factor must lie in 1..={}", irreps.len())));
        }
        let exps = if a.witness_r.is_empty() {
            let mut e = a.r.clone();
            e[f - 1] = model.gaps[f - 1].gamma + 0.05;
            e
        } else {
            a.witness_r.clone()
        };
        let w = sharpness_witness(&model, &exps, f - 1)?;
        println!("witness at factor {f}, r = {}: all branches divergent = {}", w.exponent, w.all_divergent);
        for b in &w.branches {
            witness_rows.push(vec![
                b.branch.iter().map(|l| format!("{l:?}")).collect::<Vec<_>>().join("x"),
                format!("{:?}", b.verdict),
                num(b.divergence_exponent),
            ]);
        }
        out.insert("witness".into(), json!(w));
    }
    match sink.format() {
        Format::Json => sink.json("typeii", &out)?,
        Format::Csv => {
            if !rows.is_empty() {
                sink.csv("typeii", &["branch", "omega_norm", "verdicts"], &rows)?;
            }
            if !witness_rows.is_empty() {
                sink.csv("typeii_witness", &["branch", "verdict", "divergence_exponent"], &witness_rows)?;
            }
        }
    }
    Ok(())
}

fn parse_point(s: &str, dim: usize) -> Result<CartanElement, Failure> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Failure::Usage(format!("bad point `{s}`")))?;
    if v.len() != dim {
        return Err(Failure::Usage(format!("point `{s}` needs {dim} coordinates")));
    }
    Ok(CartanElement::new(v))
}

fn mixbound(a: &MixboundArgs, sink: &mut Sink) -> Run {
    let family: Family = a.family.parse()?;
    let rs = build_root_system(family, a.rank)?;
    let sos = find_maximal_sos(&rs)?;
    let gaps = SpectralGapProfile::uniform(a.gamma, sos.len())?;
    let points = if a.points.is_empty() {
        random_points(&mut sweep_rng(a.seed), a.n, rs.dim)
    } else {
        a.points.iter().map(|p| parse_point(p, rs.dim)).collect::<Result<Vec<_>, _>>()?
    };
    let config = GapConfiguration::new(rs, sos, gaps, points, a.penalty)?;
    let order = order_for_partition(&config)?;
    let choice = choose_root_index(&config, &order, a.epsilon)?;
    let plan = build_partition(&config, &order, &choice)?;
    let check = verify_partition(&plan, &config);
    let tree = partition_tree(&config, a.epsilon)?;
    let bound = higher_order_bound(&config, a.epsilon, a.norm_product)?;
    let triple = if config.n() == 3 { Some(triple_bound(&config, a.epsilon)?) } else { None };
    let obstruction = quad_obstruction_report(&ObstructionInput {
        c_abs: a.obstruction_c,
        f1_sq: a.obstruction_f1,
        constant: a.obstruction_constant,
        norms: 1.0,
        rate: a.obstruction_rate,
        m_max: a.obstruction_m_max,
    })?;
    let sweep = if a.sweep > 0 { partition_sweep(a.sweep, a.seed, (3, 8), &[1, 2, 3], a.epsilon) } else { vec![] };
    println!(
        "plan: i0 = {}, k = {}, j = {}, D11 = {:?}, D12 = {:?}, q1 = {}, q2 = {}; verified {}",
        plan.i0, plan.k, plan.j, plan.d11, plan.d12, plan.q1, plan.q2, check.ok
    );
    println!("bound kernel {} (exponent {}), tree depth {}", bound.kernel, bound.exponent, tree.depth());
    println!("obstruction: {}", obstruction.message);
    if a.sweep > 0 {
        println!("sweep: {}/{} plans verified", sweep.iter().filter(|r| r.ok).count(), sweep.len());
    }
    match sink.format() {
        Format::Json => sink.json(
            "mixbound",
            &json!({
                "points": config.points,
                "system": config.sos.members.iter().map(|r| root_label(r)).collect::<Vec<_>>(),
                "choice": choice,
                "plan": plan,
                "verification": check,
                "tree": tree,
                "bound": bound,
                "triple": triple,
                "obstruction": obstruction,
                "sweep": sweep,
            }),
        )?,
        Format::Csv => {
            let in_b = |s: usize| plan.d12.contains(&s);
            let rows: Vec<Vec<String>> = (1..=plan.k + 1)
                .map(|s| {
                    vec![
                        s.to_string(),
                        plan.slot_to_point[s - 1].to_string(),
                        num(if s <= plan.k { plan.log_values[s - 1] } else { 0.0 }),
                        if in_b(s) { "D12" } else { "rest" }.to_string(),
                    ]
                })
                .collect();
            sink.csv("mixbound", &["slot", "point", "log_value", "block"], &rows)?;
            if !sweep.is_empty() {
                let rows: Vec<Vec<String>> = sweep
                    .iter()
                    .map(|r| {
                        vec![
                            r.index.to_string(),
                            r.n.to_string(),
                            r.rank.to_string(),
                            format!("{:?}", r.family),
                            r.i0.map(|x| x.to_string()).unwrap_or_default(),
                            r.k.map(|x| x.to_string()).unwrap_or_default(),
                            r.j.map(|x| x.to_string()).unwrap_or_default(),
                            opt(r.pivot_gap),
                            opt(r.min_pivot),
                            r.ok.to_string(),
                        ]
                    })
                    .collect();
                sink.csv(
                    "mixbound_sweep",
                    &["index", "n", "rank", "family", "i0", "k", "j", "pivot_gap", "min_pivot", "ok"],
                    &rows,
                )?;
            }
        }
    }
    if !check.ok {
        return Err(Failure::Check(check.violations.join("; ")));
    }
    if let Some(r) = sweep.iter().find(|r| !r.ok) {
        return Err(Failure::Check(format!("sweep configuration {}: {}", r.index, r.violations.join("; "))));
    }
    Ok(())
}

fn selftest(a: &SelftestArgs, sink: &mut Sink) -> Run {
    let rep = run_selftest(a.grid.config()?, &a.suite)?;
    for s in &rep.suites {
        println!(
            "{:<24} {}  ({} checks, {:.2}s)",
            s.name,
            if s.pass { "pass" } else { "FAIL" },
            s.checks.len(),
            s.seconds
        );
        for c in s.checks.iter().filter(|c| !c.pass) {
            println!("    {}: {:e} > {:e}", c.name, c.value, c.tolerance);
        }
    }
    println!("total {:.2}s", rep.seconds);
    match sink.format() {
        Format::Json => sink.json("selftest", &rep)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = rep
                .suites
                .iter()
                .flat_map(|s| {
                    s.checks.iter().map(move |c| {
                        vec![s.name.clone(), c.name.clone(), c.pass.to_string(), num(c.value), num(c.tolerance)]
                    })
                })
                .collect();
            sink.csv("selftest", &["suite", "check", "pass", "value", "tolerance"], &rows)?;
        }
    }
    if !rep.pass {
        return Err(Failure::Check("one or more invariant suites failed".into()));
    }
    Ok(())
}
