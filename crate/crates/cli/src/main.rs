mod scenario_file;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use holobound_core::capacity::{bost_charles_integral, sup_log_on_circle};
use holobound_core::confmaps::AnalyticMap;
use holobound_core::dioph::{
    binomial_certificate, dirichlet_round, pi_measure_search, revalidate, revalidate_refined, write_sweep_csv, Certificate,
    SweepGrid,
};
use holobound_core::holobound::{evaluate_bound, kappa_threshold, limit_bound};
use holobound_core::padiczeta::{eisenstein_constant, eisenstein_pair_in_x, eisenstein_star, zeta2, zeta5_inequality_scan};
use holobound_core::regressions::{identity_suite, l2chi, zeta25_lune_published, zeta25_weaker_published, CIRCLE_BC, LUNE_BC};
use holobound_core::{Complex64, Error, Rational};
use report::{bound_json, print, sig6, threshold_json, VERSION};
use scenario_file::{parse_rational, ScenarioFile, SchemaError};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "holobound", version, about = "Holonomy bounds, capacity integrals and irrationality measures")]
struct Cli {
    /// Worker threads for parallel quadrature and scans.
    #[arg(long, global = true, env = "HOLOBOUND_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 30.0)]
    radius_min: f64,
    #[arg(long, default_value_t = 3000.0)]
    radius_max: f64,
    #[arg(long, default_value_t = 25)]
    radius_steps: usize,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long, default_value_t = 512)]
    grid_n: usize,
    /// Write every sweep point to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl GridArgs {
    fn grid(&self) -> SweepGrid {
        SweepGrid {
            radius_min: self.radius_min,
            radius_max: self.radius_max,
            radius_steps: self.radius_steps,
            k_max: self.k_max,
            grid_n: self.grid_n,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact identity suites.
    Verify {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Evaluate the bound of a scenario file.
    Bound {
        file: PathBuf,
        #[arg(long)]
        grid_n: Option<usize>,
    },
    /// Solve for the free kappa of a scenario file.
    Kappa {
        file: PathBuf,
        #[arg(long)]
        target_m: Option<f64>,
        #[arg(long)]
        grid_n: Option<usize>,
    },
    /// Torus average of log|m(z) - m(w)| and the sup of log|m| on the circle.
    BcIntegral {
        /// identity, circle, lune, psi or phi.
        #[arg(long)]
        map: String,
        /// `re` or `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        #[arg(long = "R")]
        radius: Option<f64>,
        #[arg(long, default_value_t = 4096)]
        grid_n: usize,
    },
    /// 2-adic zeta value at 1 + 2k.
    Zeta2 {
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[arg(long, default_value_t = 64)]
        prec: i64,
    },
    /// E*_{2k} as a q-expansion and in the Hauptmodul coordinate.
    Eisenstein {
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[arg(long, default_value_t = 12)]
        order: usize,
    },
    /// Simultaneous Dirichlet approximation.
    Dirichlet {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        n: Vec<i64>,
        #[arg(long = "Q")]
        big_q: u64,
        #[arg(long = "N")]
        big_n: u64,
    },
    /// Certificate search for a^(1/r).
    Binomial {
        #[arg(long)]
        a: String,
        #[arg(long)]
        r: u64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Certificate search for pi.
    PiMeasure {
        #[arg(long, default_value_t = 20)]
        k_max: usize,
        #[arg(long, default_value_t = 10.0)]
        radius_min: f64,
        #[arg(long, default_value_t = 1e5)]
        radius_max: f64,
        #[arg(long, default_value_t = 25)]
        radius_steps: usize,
        #[arg(long, default_value_t = 512)]
        grid_n: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Rationals p/q unusually close to zeta_2(5).
    Zeta5Scan {
        #[arg(long, default_value_t = 100)]
        max_height: u64,
    },
    /// Regression fixtures.
    Fixtures {
        #[arg(long, default_value = "fixtures")]
        dir: PathBuf,
        /// Also recompute the capacity integrals at grid_n 4096.
        #[arg(long)]
        with_quadrature: bool,
    },
}

enum Failure {
    Infeasible(String),
    Input(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Infeasible(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Infeasible(m) | Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::NoThreshold { .. } | Error::InfeasibleEverywhere => Failure::Infeasible(msg),
            Error::Precondition(_)
            | Error::Shape { .. }
            | Error::NanInput(_)
            | Error::Domain(_)
            | Error::TypeViolation(_)
            | Error::DivisionByZero(_) => Failure::Input(msg),
            _ => Failure::Numerical(msg),
        }
    }
}

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        Failure::Input(format!("schema: {e}"))
    }
}

type Outcome = Result<u8, Failure>;

fn load(path: &Path, grid_n: Option<usize>) -> Result<ScenarioFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let mut f = ScenarioFile::from_json(&text)?;
    if let Some(n) = grid_n {
        f.quadrature.grid_n = n;
        f.to_scenario()?;
    }
    Ok(f)
}

fn parse_complex(s: &str) -> Result<Complex64, Failure> {
    let bad = || Failure::Input(format!("cannot parse complex value {s:?}"));
    let parts: Vec<&str> = s.split(',').collect();
    let re: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let im: f64 = match parts.get(1) {
        Some(p) => p.trim().parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.len() > 2 {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

fn cmd_bound(file: &Path, grid_n: Option<usize>) -> Outcome {
    let f = load(file, grid_n)?;
    let s = f.to_scenario()?;
    let r = evaluate_bound(&s)?;
    print(&bound_json(&s.name, &r, s.grid_n));
    Ok(if r.feasible { 0 } else { 1 })
}

fn cmd_kappa(file: &Path, target_m: Option<f64>, grid_n: Option<usize>) -> Outcome {
    let f = load(file, grid_n)?;
    let target = target_m.or(f.target_m).ok_or_else(|| Failure::Input("--target-m or target_m required".into()))?;
    let s = f.to_scenario()?;
    let t = kappa_threshold(&s, target)?;
    print(&threshold_json(&s.name, &t, target, s.grid_n));
    Ok(0)
}

fn cmd_bc(map: &str, alpha: Option<&str>, beta: Option<&str>, radius: Option<f64>, grid_n: usize) -> Outcome {
    let pair = || -> Result<(Complex64, Complex64), Failure> {
        match (alpha, beta) {
            (Some(a), Some(b)) => Ok((parse_complex(a)?, parse_complex(b)?)),
            _ => Err(Failure::Input(format!("map {map} needs --alpha and --beta"))),
        }
    };
    let mut m = match map {
        "identity" => AnalyticMap::identity(),
        "circle" => AnalyticMap::MobiusCircleX,
        "lune" => AnalyticMap::LuneX,
        "psi" => {
            let (a, b) = pair()?;
            AnalyticMap::psi(a, b)
        }
        "phi" => {
            let (a, b) = pair()?;
            AnalyticMap::phi(a, b)?
        }
        other => return Err(Failure::Input(format!("unknown map {other:?}"))),
    };
    if let Some(r) = radius {
        m = m.scaled(r);
    }
    let bc = bost_charles_integral(&m, grid_n)?;
    let sup = sup_log_on_circle(&m, grid_n.max(256))?;
    print(&json!({
        "map": map,
        "grid_n": grid_n,
        "integral": sig6(bc.value),
        "error_estimate": sig6(bc.error_estimate),
        "sup_log": sig6(sup.value),
        "sup_argmax": sig6(sup.argmax),
        "version": VERSION,
    }));
    Ok(0)
}

fn cmd_zeta2(k: i64, prec: i64) -> Outcome {
    let z = zeta2(k, prec)?;
    print(&json!({
        "s": 1 + 2 * k,
        "valuation": z.valuation(),
        "absolute_precision": z.absolute_precision(),
        "digits": z.digit_string(),
        "value": z.to_string(),
    }));
    Ok(0)
}

fn fractions(s: &holobound_core::ExactSeries) -> Value {
    Value::Array(s.coeffs().iter().map(|c| json!(c.to_string())).collect())
}

fn cmd_eisenstein(k: i64, order: usize) -> Outcome {
    if k == 0 {
        return Err(Failure::Input("k must be nonzero".into()));
    }
    let constant = if k > 0 { eisenstein_constant(k)? } else { Rational::from_integer(0.into()) };
    let q = eisenstein_star(k, order, constant)?;
    let (pos, neg) = eisenstein_pair_in_x(k.abs(), order.max(2))?;
    let x = if k > 0 { pos } else { neg };
    print(&json!({
        "weight": q.weight,
        "q_expansion": fractions(&q.series),
        "x_expansion": fractions(&x.truncate(order)),
    }));
    Ok(0)
}

fn cmd_dirichlet(n: &[i64], big_q: u64, big_n: u64) -> Outcome {
    let d = dirichlet_round(n, big_q, big_n)?;
    print(&json!({
        "r": d.r.to_string(),
        "q": d.q,
        "p": d.p.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
    }));
    Ok(0)
}

fn write_csv(path: &Option<PathBuf>, cert: &Certificate) -> Result<(), Failure> {
    if let Some(p) = path {
        let file = fs::File::create(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
        write_sweep_csv(&cert.rows, file)?;
    }
    Ok(())
}

fn certificate_json(cert: &Certificate) -> Result<Value, Failure> {
    Ok(json!({
        "kappa_eff": sig6(cert.kappa_eff),
        "R_star": sig6(cert.radius_star),
        "k_star": cert.k_star,
        "revalidated": sig6(revalidate(cert)?),
        "revalidated_refined_grid": sig6(revalidate_refined(cert)?),
        "grid_points": cert.rows.len(),
        "feasible_points": cert.rows.iter().filter(|r| r.feasible()).count(),
    }))
}

fn cmd_binomial(a: &str, r: u64, grid: &GridArgs) -> Outcome {
    let a = parse_rational("a", a).map_err(Failure::from)?;
    let cert = binomial_certificate(&a, r, &grid.grid())?;
    write_csv(&grid.csv, &cert)?;
    let mut v = certificate_json(&cert)?;
    v["a"] = json!(a.to_string());
    v["r"] = json!(r);
    print(&v);
    Ok(0)
}

fn cmd_pi(k_max: usize, grid: SweepGrid, csv: &Option<PathBuf>) -> Outcome {
    let p = pi_measure_search(k_max, &grid)?;
    write_csv(csv, &p.certificate)?;
    let mut v = certificate_json(&p.certificate)?;
    v["feasibility_boundary_R"] = sig6(p.feasibility_boundary);
    print(&v);
    Ok(0)
}

fn cmd_scan(max_height: u64) -> Outcome {
    let found = zeta5_inequality_scan(max_height)?;
    print(&json!({
        "max_height": max_height,
        "exceptions": found
            .iter()
            .map(|e| json!({"p": e.p, "q": e.q, "distance_valuation": e.distance_valuation, "threshold_bits": e.threshold_bits}))
            .collect::<Vec<_>>(),
    }));
    Ok(0)
}

fn cmd_verify(seed: u64) -> Outcome {
    let items = identity_suite(seed)?;
    let mut ok = true;
    for i in &items {
        println!("{} {} {}/{}", if i.ok() { "ok" } else { "FAIL" }, i.name, i.checked - i.failures.len(), i.checked);
        for f in &i.failures {
            println!("  {f}");
        }
        ok &= i.ok();
    }
    Ok(if ok { 0 } else { 3 })
}

fn fixture_check(path: &Path) -> Result<(bool, String), Failure> {
    let f = load(path, None)?;
    let s = f.to_scenario()?;
    let Some(expect) = &f.expect else {
        return Ok((true, "no expectations".into()));
    };
    let mut ok = true;
    let mut notes = Vec::new();
    let mut compare = |what: &str, got: f64, want: &scenario_file::Expected| {
        ok &= (got - want.value).abs() <= want.tolerance;
        notes.push(format!("{what} {got:.6} want {} +- {}", want.value, want.tolerance));
    };
    if let Some(b) = &expect.bound {
        compare("bound", evaluate_bound(&s)?.bound, b);
    }
    if let Some(l) = &expect.limit {
        compare("limit", limit_bound(&s)?.bound, l);
    }
    if let Some(k) = &expect.kappa {
        let target = f.target_m.ok_or_else(|| Failure::Input(format!("{}: kappa expectation needs target_m", path.display())))?;
        compare("kappa", kappa_threshold(&s, target)?.kappa, k);
    }
    Ok((ok, notes.join(", ")))
}

fn cmd_fixtures(dir: &Path, with_quadrature: bool) -> Outcome {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut all = true;
    let mut line = |ok: bool, name: &str, note: String| {
        all &= ok;
        println!("{}: {name}: {note}", if ok { "PASS" } else { "FAIL" });
    };
    for p in &paths {
        let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        match fixture_check(p) {
            Ok((ok, note)) => line(ok, &name, note),
            Err(e) => line(false, &name, e.message().to_string()),
        }
    }
    let published = [(zeta25_weaker_published(), 6.0, 22.0724), (zeta25_lune_published(), 6.0, 19.7439), (l2chi(), 14.0, 24781.0)];
    for (s, target, want) in published {
        let got = kappa_threshold(&s, target)?.kappa;
        let tol = if want > 1000.0 { 1.0 } else { 0.05 };
        line((got - want).abs() <= tol, &s.name, format!("kappa {got:.6} want {want}"));
    }
    if with_quadrature {
        for (m, name, want, tol) in
            [(AnalyticMap::MobiusCircleX, "circle_integral", CIRCLE_BC, 5e-4), (AnalyticMap::LuneX, "lune_integral", LUNE_BC, 1e-3)]
        {
            let bc = bost_charles_integral(&m, 4096)?;
            line((bc.value - want).abs() <= tol, name, format!("{:.6} (est. err {:.1e}) want {want}", bc.value, bc.error_estimate));
        }
    }
    Ok(if all { 0 } else { 3 })
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Input(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Verify { seed } => cmd_verify(seed),
        Command::Bound { file, grid_n } => cmd_bound(&file, grid_n),
        Command::Kappa { file, target_m, grid_n } => cmd_kappa(&file, target_m, grid_n),
        Command::BcIntegral { map, alpha, beta, radius, grid_n } => {
            cmd_bc(&map, alpha.as_deref(), beta.as_deref(), radius, grid_n)
        }
        Command::Zeta2 { k, prec } => cmd_zeta2(k, prec),
        Command::Eisenstein { k, order } => cmd_eisenstein(k, order),
        Command::Dirichlet { n, big_q, big_n } => cmd_dirichlet(&n, big_q, big_n),
        Command::Binomial { a, r, grid } => cmd_binomial(&a, r, &grid),
        Command::PiMeasure { k_max, radius_min, radius_max, radius_steps, grid_n, csv } => {
            cmd_pi(k_max, SweepGrid { radius_min, radius_max, radius_steps, k_max: None, grid_n }, &csv)
        }
        Command::Zeta5Scan { max_height } => cmd_scan(max_height),
        Command::Fixtures { dir, with_quadrature } => cmd_fixtures(&dir, with_quadrature),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
