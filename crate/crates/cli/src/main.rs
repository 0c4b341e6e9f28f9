mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use orbitcount::algebra::GaussianRational;
use orbitcount::dynamics::VectorField;
use orbitcount::elimination::{
    build_elimination_matrix, lojasiewicz_check, max_minor_at_point, point_matrix_from_jets, universal_lower_bound,
    LojasOptions, LowerBoundOutcome, MinorStrategy, MinorVerdict, PointMatrix,
};
use orbitcount::orbit_ideal::{ideal_slice, leading_diagram, nu, staircase_division};
use orbitcount::points::{census, density_check, masser_check, PointCensus};
use orbitcount::rationality::{minimal_degree, reconstruct, uniform_degree_scan, Reconstruction, TaylorPrefix};
use orbitcount::systems::{darboux_curves, first_integral_from_curves, jouanolou_threshold, make_system};
use orbitcount::zerocount::{count_zeros, isolate_roots, jensen_bound, main_theorem_harness, DiscFunction};
use orbitcount::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

use config::{missing, RunConfig, Strategy};

#[derive(Parser, Debug)]
#[command(name = "orbitcount", version, about = "Certified zero counting along trajectories of polynomial vector fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 128)]
    precision_bits: u32,
    /// Worker threads (0: one per core). Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Certified number of zeros of P o phi in the closed unit disc.
    Zeros,
    /// Sweep of zero counts over random P of each degree.
    Growth,
    /// Degree-d slice of the orbit-closure ideal and its leading diagram.
    OrbitIdeal,
    /// Largest nonvanishing top minor of the elimination matrix at p.
    Minors,
    /// Lower bound on the first nonvanishing derivative of P along xi.
    LowerBound,
    /// Lojasiewicz-type inequality at a complex point.
    Lojas,
    /// Rational points of bounded height on (P1, P2) o phi.
    Points,
    /// Census counts against the log-height envelope.
    Masser,
    /// Point counts against the density envelope.
    Density,
    /// Invariant algebraic curves and rational first integrals of a planar field.
    Darboux,
    /// Rational reconstruction of a Taylor prefix.
    Pade,
    /// Emit a field file from a system definition.
    SystemsMake,
}

/// Output plus whether it counts as certified.
struct Outcome {
    json: Value,
    csv: Option<String>,
    certified: bool,
}

impl Outcome {
    fn ok(json: Value) -> Self {
        Self { json, csv: None, certified: true }
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Domain(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Domain(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Domain(e.to_string()))
}

struct Ctx {
    cfg: RunConfig,
    base: PathBuf,
    seed: u64,
    prec: u32,
}

impl Ctx {
    fn field(&self) -> Result<VectorField> {
        self.cfg.field(&self.base)
    }

    fn disc(&self, field: &VectorField, p: &[GaussianRational], poly: orbitcount::algebra::Polynomial) -> Result<DiscFunction> {
        let f = DiscFunction::from_point(field, p, poly)?;
        match self.cfg.outer_radius {
            Some(r) => f.with_outer_radius(r),
            None => Ok(f),
        }
    }

    fn strategy(&self) -> MinorStrategy {
        match self.cfg.strategy.unwrap_or(Strategy::Auto) {
            Strategy::Auto => MinorStrategy::Auto { restarts: 64, seed: self.seed },
            Strategy::Exhaustive => MinorStrategy::Exhaustive,
            Strategy::Greedy => MinorStrategy::Greedy { restarts: 64, seed: self.seed },
        }
    }

    fn census(&self, h: u64) -> Result<(DiscFunction, DiscFunction, PointCensus)> {
        let field = self.field()?;
        let p = self.cfg.point()?;
        let ps = self.cfg.polys(&field, Some(2))?;
        let f1 = self.disc(&field, &p, ps[0].clone())?;
        let f2 = DiscFunction::new(f1.trajectory.clone(), ps[1].clone())?;
        let f2 = match self.cfg.outer_radius {
            Some(r) => f2.with_outer_radius(r)?,
            None => f2,
        };
        let c = census(&f1, &f2, h, self.prec)?;
        Ok((f1, f2, c))
    }

    fn heights(&self) -> Result<Vec<u64>> {
        match (&self.cfg.hs, self.cfg.h) {
            (Some(hs), _) if !hs.is_empty() => Ok(hs.clone()),
            (_, Some(h)) => Ok(vec![h]),
            _ => Err(missing("Hs")),
        }
    }
}

fn run(cmd: Command, ctx: &Ctx, format: Format) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    if format == Format::Csv && !matches!(cmd, Command::Growth | Command::Masser | Command::Density | Command::Pade) {
        return Err(Error::Domain("CSV output is only available for sweep tables (growth, masser, density, pade)".into()));
    }
    match cmd {
        Command::Zeros => {
            let field = ctx.field()?;
            let p = cfg.point()?;
            let f = ctx.disc(&field, &p, cfg.poly(&field)?)?;
            let c = count_zeros(&f, ctx.prec)?;
            let jb = jensen_bound(&f, f.r, ctx.prec)?;
            let iso = isolate_roots(&f, &c)?;
            let mut v = to_value(&c)?;
            v["jensen"] = to_value(&jb)?;
            v["roots"] = to_value(&iso)?;
            Ok(Outcome { json: v, csv: None, certified: c.certified })
        }
        Command::Growth => {
            let field = ctx.field()?;
            let p = cfg.point()?;
            let degrees = cfg.degrees.clone().unwrap_or_else(|| (1..=8).collect());
            let t = main_theorem_harness(&field, &p, &degrees, cfg.samples.unwrap_or(20), ctx.seed, ctx.prec)?;
            let failures: usize = t.rows.iter().map(|r| r.failures).sum();
            Ok(Outcome { json: to_value(&t)?, csv: Some(t.to_csv()?), certified: failures == 0 })
        }
        Command::OrbitIdeal => {
            let field = ctx.field()?;
            let p = cfg.point()?;
            let d = cfg.d()?;
            let slice = ideal_slice(&field, &p, d)?;
            let diagram = leading_diagram(&slice);
            let mut v = json!({
                "slice": slice.export(field.names()),
                "diagram": diagram.export(),
                "rho": diagram.rho(d),
            });
            if cfg.poly.is_some() {
                let poly = cfg.poly(&field)?;
                let (r, steps) = staircase_division(&poly, &slice)?;
                v["division"] = json!({
                    "remainder": r.to_string_with(field.names()),
                    "member": r.is_zero(),
                    "steps": steps,
                });
            }
            Ok(Outcome::ok(v))
        }
        Command::Minors => {
            let field = ctx.field()?;
            let p = cfg.point()?;
            let d = cfg.d()?;
            let diagram = leading_diagram(&ideal_slice(&field, &p, d)?);
            let mu = cfg.mu.unwrap_or_else(|| (nu(&field, d) as usize).max(diagram.rho(d) + 1));
            let m = build_elimination_matrix(&field, &diagram, d, mu)?;
            let a = point_matrix_from_jets(&field, &m.context, &p)?;
            let verdict = max_minor_at_point(&PointMatrix::Exact(a.clone()), ctx.strategy(), ctx.prec);
            let certified = !matches!(verdict, MinorVerdict::Indeterminate);
            let v = json!({
                "degree": d,
                "mu": mu,
                "rows": m.context.rows.iter().map(|r| r.0.clone()).collect::<Vec<_>>(),
                "diagram": diagram.export(),
                "matrixAtPoint": a.iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "minor": verdict,
            });
            Ok(Outcome { json: v, csv: None, certified })
        }
        Command::LowerBound => {
            let field = ctx.field()?;
            let p = cfg.point()?;
            let out = universal_lower_bound(&field, &p, &cfg.poly(&field)?, cfg.d()?, cfg.mu, ctx.strategy())?;
            let v = match &out {
                LowerBoundOutcome::Certified(r) => json!({"outcome": "certified", "report": r}),
                LowerBoundOutcome::Degenerate { degree } => json!({"outcome": "degenerate", "degree": degree}),
            };
            Ok(Outcome::ok(v))
        }
        Command::Lojas => {
            let field = ctx.field()?;
            let polys = cfg.polys(&field, None)?;
            let z: Vec<Complex64> = cfg
                .complex_point
                .as_ref()
                .ok_or_else(|| missing("complexPoint"))?
                .iter()
                .map(|[re, im]| Complex64::new(*re, *im))
                .collect();
            let mut opts = LojasOptions { seed: ctx.seed, ..LojasOptions::default() };
            if let Some(s) = cfg.starts {
                opts.starts = s;
            }
            if let Some(r) = cfg.search_radius {
                opts.search_radius = r;
            }
            let rep = lojasiewicz_check(&polys, &z, opts)?;
            Ok(Outcome::ok(to_value(&rep)?))
        }
        Command::Points => {
            let h = cfg.h.ok_or_else(|| missing("H"))?;
            let (_, _, c) = ctx.census(h)?;
            let certified = c.undecided.is_empty();
            Ok(Outcome { json: to_value(&c)?, csv: None, certified })
        }
        Command::Masser => {
            let hs = ctx.heights()?;
            let (_, _, c) = ctx.census(*hs.iter().max().expect("nonempty"))?;
            let t = masser_check(&c, &hs)?;
            let certified = c.undecided.is_empty();
            Ok(Outcome { json: to_value(&t)?, csv: Some(csv_rows(&t.rows)?), certified })
        }
        Command::Density => {
            let hs = ctx.heights()?;
            let (f1, f2, c) = ctx.census(*hs.iter().max().expect("nonempty"))?;
            let t = density_check(&f1, &f2, &c, &hs, cfg.cutoff.unwrap_or(8))?;
            let certified = c.undecided.is_empty();
            Ok(Outcome { json: to_value(&t)?, csv: Some(csv_rows(&t.rows)?), certified })
        }
        Command::Darboux => {
            let field = ctx.field()?;
            let n = cfg.n.ok_or_else(|| missing("N"))?;
            let s = darboux_curves(&field, n)?;
            let names = field.names();
            let integral = if s.curves.len() >= 2 || s.curves.iter().any(|c| c.cofactor.is_zero()) {
                first_integral_from_curves(&field, &s.curves)?.map(|fi| fi.to_json(names))
            } else {
                None
            };
            let v = json!({
                "N": n,
                "m": field.delta(),
                "curves": s.curves.iter().map(|c| c.to_json(names)).collect::<Vec<_>>(),
                "complete": s.complete,
                "notes": s.notes,
                "cofactorsTried": s.cofactors_tried,
                "firstIntegral": integral,
                "jouanolouThreshold": jouanolou_threshold(field.delta()),
            });
            Ok(Outcome::ok(v))
        }
        Command::Pade => pade(cfg, format),
        Command::SystemsMake => {
            let spec = cfg.system.as_ref().ok_or_else(|| missing("system"))?;
            Ok(Outcome::ok(to_value(&make_system(spec)?)?))
        }
    }
}

fn prefix(coeffs: &[String]) -> Result<TaylorPrefix> {
    TaylorPrefix::new(coeffs.iter().map(|s| s.parse()).collect::<Result<_>>()?)
}

fn pade(cfg: &RunConfig, format: Format) -> Result<Outcome> {
    let d_max = cfg.max_degree.unwrap_or(6);
    if let Some(family) = &cfg.family {
        let members: Vec<(String, TaylorPrefix)> =
            family.iter().map(|m| Ok((m.name.clone(), prefix(&m.coefficients)?))).collect::<Result<_>>()?;
        let terms = cfg.terms.unwrap_or(3 * d_max + 2);
        let scan = uniform_degree_scan(&members, d_max, terms)?;
        let rows: Vec<[String; 4]> = scan
            .rows
            .iter()
            .map(|r| {
                let (p, q) = r.function.as_ref().map(|f| (f.p.clone(), f.q.clone())).unwrap_or_default();
                [r.index.clone(), r.degree.map(|d| d.to_string()).unwrap_or_default(), p, q]
            })
            .collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "degree", "P", "Q"]).map_err(|e| Error::Domain(e.to_string()))?;
        for r in &rows {
            w.write_record(r).map_err(|e| Error::Domain(e.to_string()))?;
        }
        let csv = String::from_utf8(w.into_inner().map_err(|e| Error::Domain(e.to_string()))?)
            .map_err(|e| Error::Domain(e.to_string()))?;
        return Ok(Outcome { json: to_value(&scan)?, csv: Some(csv), certified: true });
    }
    if format == Format::Csv {
        return Err(Error::Domain("CSV output for pade needs a \"family\"".into()));
    }
    let f = prefix(cfg.coefficients.as_ref().ok_or_else(|| missing("coefficients"))?)?;
    let v = match cfg.d {
        Some(d) => match reconstruct(&f, d as usize)? {
            Reconstruction::Found(r) => {
                let mut v = to_value(&r.to_json())?;
                v["rational"] = json!(true);
                v["d"] = json!(d);
                v
            }
            Reconstruction::TrivialKernel => json!({"rational": false, "d": d, "reason": "trivial kernel"}),
            Reconstruction::Mismatch(k) => json!({"rational": false, "d": d, "reason": "mismatch", "coefficient": k}),
        },
        None => match minimal_degree(&f, d_max.min((f.len().saturating_sub(2)) / 3))? {
            Some((d, r)) => {
                let mut v = to_value(&r.to_json())?;
                v["rational"] = json!(true);
                v["d"] = json!(d);
                v
            }
            None => json!({"rational": false, "maxDegree": d_max}),
        },
    };
    Ok(Outcome::ok(v))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Certification(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let loaded = match &cli.config {
        Some(p) => RunConfig::load(p),
        None => Ok((RunConfig::default(), PathBuf::new())),
    };
    let (cfg, base) = match loaded {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let ctx = Ctx { cfg, base, seed, prec: cli.precision_bits };
    let outcome = match run(cli.command, &ctx, cli.format) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&outcome.json).expect("serializable") + "\n",
        Format::Csv => outcome.csv.expect("checked in run"),
    };
    let written = match &cli.out {
        Some(p) => std::fs::write(p, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if outcome.certified {
        ExitCode::SUCCESS
    } else {
        eprintln!("certification incomplete; see the output for diagnostics");
        ExitCode::from(2)
    }
}
