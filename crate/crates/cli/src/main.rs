use bmchain::certificates::verify_certificate;
use bmchain::demos::{figure1_ellipses, figure1_svg, regular_simplex};
use bmchain::io::{self, BodyJson, CertificateJson, ChainJson, MeanPathJson, SubspaceJson};
use bmchain::mean_ellipsoids::simultaneous_mean;
use bmchain::optimizer::{
    diameter_inradius_position, maurey_reduce, solve_ball_between, solve_distance_to_ball, solve_general, SolveOptions,
    SolveResult, Status,
};
use bmchain::separation::{kirchberger_bound, reduce_support, separate, Separation};
use bmchain::{Body, Ellipsoid, Error, Matrix};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_VERIFY: u8 = 2;
const EXIT_ITER_CAP: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;

/// Affinely optimal containment chains, their certificates, and mean ellipsoids.
#[derive(Parser)]
#[command(name = "bmchain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance of a body to the ball: r E + c ⊆ K ⊆ R E + d over ellipsoids E.
    Solve {
        #[arg(long)]
        body: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Optimal chain r L1 + c ⊆ M ⊆ R L2 + d; M is an ellipsoid unless --middle is given.
    Sandwich {
        #[arg(long)]
        inner: PathBuf,
        #[arg(long)]
        outer: PathBuf,
        #[arg(long)]
        middle: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Re-checks a certificate against a chain. Either file may be a solve result.
    Verify {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        cert: PathBuf,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inner and outer mean ellipsoids along a path.
    Mean {
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        lambda: f64,
        /// JSON array with one translation weight per axis.
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decides whether conv K and conv L meet in the subspace U.
    Separate {
        #[arg(long)]
        k: PathBuf,
        #[arg(long)]
        l: PathBuf,
        #[arg(long)]
        subspace: PathBuf,
        /// Shrink the support of an intersection witness.
        #[arg(long)]
        reduce: bool,
        #[arg(long, requires = "reduce")]
        cap: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Uniqueness probe for the distance ellipsoids, projecting while pairs repeat.
    Maurey {
        #[arg(long)]
        body: PathBuf,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Position of K minimizing diameter over inradius, both measured by L.
    Diamrad {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        norm: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Built-in examples.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// The outer-mean counterexample in the plane, as SVG.
    Figure1 {
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Distance of the regular simplex to the ball.
    Simplex {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions { opt_tol: self.tol, max_iter: self.max_iter, seed: self.seed, ..SolveOptions::default() }
    }
}

enum Failure {
    Usage(String),
    Io(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn located(path: &Path, e: Error) -> Failure {
    match e {
        Error::Format(m) => Failure::Lib(Error::Format(format!("{}: {m}", path.display()))),
        other => Failure::Lib(other),
    }
}

fn load_body(path: &Path) -> Result<Body, Failure> {
    let j: BodyJson = io::parse(&read(path)?).map_err(|e| located(path, e))?;
    io::body_from_json(&j).map_err(|e| located(path, e))
}

/// Parses `path` as `T`, or as the `key` member of a result object.
fn load_member<T: serde::de::DeserializeOwned>(path: &Path, key: &str) -> Result<T, Failure> {
    let v: Value = io::parse(&read(path)?).map_err(|e| located(path, e))?;
    let v = match v.get(key) {
        Some(Value::Null) => return Err(Failure::Lib(Error::Format(format!("{}: `{key}` is null", path.display())))),
        Some(inner) => inner.clone(),
        None => v,
    };
    io::from_value(v, key).map_err(|e| located(path, e))
}

fn emit(value: &Value, out: Option<&Path>) -> Result<(), Failure> {
    let text = io::to_json_string(value)?;
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn chain_ref(res: &SolveResult) -> Value {
    let c = &res.chain;
    json!({ "r": c.r, "R": c.big_r, "c": io::to_vec(&c.c), "d": io::to_vec(&c.d) })
}

fn result_value(res: &SolveResult) -> Value {
    let trace: Vec<Value> = res
        .trace
        .iter()
        .map(|t| json!({ "iteration": t.iteration, "ratio": t.ratio, "band": t.band, "margin": t.margin, "step": t.step }))
        .collect();
    json!({
        "status": res.status.as_str(),
        "ratio": res.ratio,
        "chain": io::chain_to_json(&res.chain),
        "certificate": res.certificate.as_ref().map(|c| io::certificate_to_json(c, chain_ref(res))),
        "report": res.report.as_ref().map(io::report_to_value),
        "band": res.band,
        "iterations": res.iterations,
        "frame": io::to_rows(&res.frame),
        "trace": trace,
    })
}

fn status_code(res: &SolveResult) -> u8 {
    if res.report.as_ref().is_some_and(|r| !r.passed) {
        EXIT_VERIFY
    } else if res.status == Status::IterationCap {
        EXIT_ITER_CAP
    } else {
        0
    }
}

fn finish_solve(res: &SolveResult, out: Option<&Path>) -> Outcome {
    emit(&result_value(res), out)?;
    Ok(status_code(res))
}

fn ellipsoid_value(e: &Ellipsoid) -> Value {
    json!({ "type": "ellipsoid", "center": io::to_vec(e.center()), "shape": io::to_rows(e.shape()) })
}

fn columns(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.ncols()).map(|j| m.column(j).iter().copied().collect()).collect()
}

fn check_solver(args: &SolverArgs) -> Result<(), Failure> {
    if !(args.tol > 0.0) || args.max_iter == 0 {
        return Err(Failure::Usage("--tol must be positive and --max-iter at least 1".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Solve { body, solver } => {
            check_solver(&solver)?;
            let k = load_body(&body)?;
            finish_solve(&solve_distance_to_ball(&k, &solver.options())?, solver.out.as_deref())
        }
        Command::Sandwich { inner, outer, middle, solver } => {
            check_solver(&solver)?;
            let l1 = load_body(&inner)?;
            let l2 = load_body(&outer)?;
            let res = match middle {
                Some(m) => solve_general(&l1, &load_body(&m)?, &l2, &solver.options())?,
                None => solve_ball_between(&l1, &l2, &solver.options())?,
            };
            finish_solve(&res, solver.out.as_deref())
        }
        Command::Verify { chain, cert, tol, out } => {
            let cj: ChainJson = load_member(&chain, "chain")?;
            let ch = io::chain_from_json(&cj).map_err(|e| located(&chain, e))?;
            let kj: CertificateJson = load_member(&cert, "certificate")?;
            let k = io::certificate_from_json(&kj).map_err(|e| located(&cert, e))?;
            let report = verify_certificate(&ch, &k, tol)?;
            emit(&io::report_to_value(&report), out.as_deref())?;
            Ok(if report.passed { 0 } else { EXIT_VERIFY })
        }
        Command::Mean { path, lambda, mu, out } => {
            let pj: MeanPathJson = io::parse(&read(&path)?).map_err(|e| located(&path, e))?;
            let p = io::mean_path_from_json(&pj).map_err(|e| located(&path, e))?;
            let mu: Option<Vec<f64>> = match mu {
                Some(m) => Some(io::parse(&read(&m)?).map_err(|e| located(&m, e))?),
                None => None,
            };
            let (inner, outer, ratio) = simultaneous_mean(&p, lambda, mu.as_deref())?;
            let v = json!({
                "lambda": lambda,
                "ratio": ratio,
                "inner": {
                    "ellipsoid": ellipsoid_value(&inner.ellipsoid),
                    "radius": inner.radius,
                    "contact_subspace": columns(&inner.contact_subspace),
                },
                "outer": {
                    "ellipsoid": ellipsoid_value(&outer.ellipsoid),
                    "radius": outer.radius,
                    "mu": outer.mu,
                    "windows": outer.windows.iter().map(|(lo, hi)| vec![*lo, *hi]).collect::<Vec<_>>(),
                    "contact_subspace": columns(&outer.contact_subspace),
                    "requires_equal_centers": outer.requires_equal_centers,
                },
            });
            emit(&v, out.as_deref())?;
            Ok(0)
        }
        Command::Separate { k, l, subspace, reduce, cap, out } => {
            let kr: Vec<Vec<f64>> = io::parse(&read(&k)?).map_err(|e| located(&k, e))?;
            let lr: Vec<Vec<f64>> = io::parse(&read(&l)?).map_err(|e| located(&l, e))?;
            let kp = io::points_from_json(&kr, "K").map_err(|e| located(&k, e))?;
            let lp = io::points_from_json(&lr, "L").map_err(|e| located(&l, e))?;
            let sj: SubspaceJson = io::parse(&read(&subspace)?).map_err(|e| located(&subspace, e))?;
            let u = io::subspace_from_json(&sj, kp[0].len()).map_err(|e| located(&subspace, e))?;
            let v = match separate(&kp, &lp, &u)? {
                Separation::Intersecting { point, k_weights, l_weights } => {
                    let (kw, lw) = if reduce {
                        reduce_support(&kp, &lp, &u, &k_weights, &l_weights, cap)?
                    } else {
                        (k_weights, l_weights)
                    };
                    let support = kw.iter().chain(&lw).filter(|&&w| w > 0.0).count();
                    json!({
                        "verdict": "intersecting",
                        "point": io::to_vec(&point),
                        "k_weights": kw,
                        "l_weights": lw,
                        "support": support,
                        "bound": kirchberger_bound(u.ambient(), u.dim()),
                    })
                }
                Separation::Separated { a, v, w, margin } => json!({
                    "verdict": "separated",
                    "a": io::to_vec(&a),
                    "v": io::to_vec(&v),
                    "w": io::to_vec(&w),
                    "margin": margin,
                }),
            };
            emit(&v, out.as_deref())?;
            Ok(0)
        }
        Command::Maurey { body, restarts, jobs, solver } => {
            check_solver(&solver)?;
            if jobs == 0 {
                return Err(Failure::Usage("--jobs must be at least 1".into()));
            }
            let k = load_body(&body)?;
            let res = maurey_reduce(&k, &solver.options(), restarts, jobs)?;
            let levels: Vec<Value> = res
                .levels
                .iter()
                .map(|l| {
                    json!({
                        "dim": l.dim,
                        "ratio": l.ratio,
                        "status": l.status.as_str(),
                        "distinct_pair": l.distinct_pair,
                        "outer_center_spread": l.outer_center_spread,
                        "subspace": l.subspace.as_ref().map(columns),
                    })
                })
                .collect();
            let v = json!({ "ratio": res.ratio, "uniqueness": res.uniqueness.as_str(), "levels": levels });
            emit(&v, solver.out.as_deref())?;
            Ok(if res.levels.iter().any(|l| l.status == Status::IterationCap) { EXIT_ITER_CAP } else { 0 })
        }
        Command::Diamrad { body, norm, solver } => {
            check_solver(&solver)?;
            let k = load_body(&body)?;
            let l = load_body(&norm)?;
            let res = diameter_inradius_position(&k, &l, &solver.options())?;
            let mut v = result_value(&res.solve);
            let triples: Vec<Value> = res
                .triples
                .iter()
                .map(|t| json!({ "y": io::to_vec(&t.y), "z": io::to_vec(&t.z), "b": io::to_vec(&t.b) }))
                .collect();
            v["diameter"] = json!(res.diameter);
            v["inradius"] = json!(res.inradius);
            v["diameter_over_inradius"] = json!(res.diameter / res.inradius);
            v["position"] = serde_json::to_value(io::body_to_json(&res.position)).expect("body json");
            v["triples"] = Value::Array(triples);
            emit(&v, solver.out.as_deref())?;
            Ok(status_code(&res.solve))
        }
        Command::Demo { which: Demo::Figure1 { svg } } => {
            let text = figure1_svg();
            match svg {
                Some(p) => {
                    std::fs::write(&p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
                    let ellipses: Vec<Value> = figure1_ellipses()
                        .iter()
                        .map(|e| json!({ "label": e.label, "center": e.center, "half_lengths": e.half_lengths }))
                        .collect();
                    emit(&json!({ "svg": p.display().to_string(), "ellipses": ellipses }), None)?;
                }
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Demo { which: Demo::Simplex { n, solver } } => {
            check_solver(&solver)?;
            let k = Body::Polytope(regular_simplex(n).map_err(|e| Failure::Usage(e.to_string()))?);
            finish_solve(&solve_distance_to_ball(&k, &solver.options())?, solver.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Format(_)
                | Error::InvalidArgument(_)
                | Error::OutsideWindow { .. }
                | Error::InclusionViolated { .. }
                | Error::Unbounded(_) => EXIT_DATA,
                Error::ReductionInfeasible { .. } | Error::Solver(_) => 1,
            };
            ExitCode::from(code)
        }
    }
}
