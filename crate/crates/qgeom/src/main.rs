//! `qgeom`: command-line access to the qgeom-core routines.

mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qgeom_core::entangle::{self, DEFAULT_RESTARTS};
use qgeom_core::gapwitness::{self, ChainOperator};
use qgeom_core::interconvert::{self, rational_to_f64};
use qgeom_core::linalg::spin_operators;
use qgeom_core::numrange::{self, ConvexBodyApprox, Direction, Distinguishability};
use qgeom_core::su2::{self, GroupElement};
use qgeom_core::uncertainty::{self, SectorPartition};
use qgeom_core::wigner::WignerSystem;
use qgeom_core::{rng, Error};
use rayon::prelude::*;
use serde_json::{json, Value};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SingularExhausted { .. } | Error::Inconsistent(_) | Error::CommonEigenvector(_) => {
                CliError::Compute(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "qgeom", version, about = "Geometry of quantum states: numerical ranges, bounds and covariant interconversion")]
struct Cli {
    /// Seed for every random choice made by the job.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to QGEOM_THREADS, then all cores).
    #[arg(long, global = true, env = "QGEOM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Inner/outer approximation of a joint numerical range.
    Jnr {
        #[arg(long)]
        ops: PathBuf,
        #[arg(long, default_value_t = 500)]
        dirs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// OBJ mesh for three operators, CSV polygon for two.
        #[arg(long)]
        mesh: Option<PathBuf>,
    },
    /// Flat-boundary structure of the range of three qutrit observables.
    Classify {
        #[arg(long)]
        ops: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest expectation over product states.
    SepMax {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        dims: Option<String>,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numerical range over separable states.
    SepJnr(RangeArgs),
    /// Numerical range over PPT states.
    PptJnr(RangeArgs),
    /// Minimum of Var X + Var Y.
    Uncertainty {
        #[arg(long, conflicts_with = "table_j")]
        ops: Option<PathBuf>,
        /// Use J_X, J_Y of spin J ("1", "3/2", …).
        #[arg(long)]
        table_j: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gap upper bound from the ground curve of H + λV.
    Gap {
        #[arg(long, value_enum, default_value_t = Model::Xy)]
        model: Model,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 2.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long)]
        taper: bool,
        /// Ground-curve samples (λ, E0, ⟨H⟩, ⟨V⟩).
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// U(1)-covariant conversion between ladder states.
    Interconvert {
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        exact: bool,
        /// Allow an auxiliary qudit on sites −D..D.
        #[arg(long)]
        aux_d: Option<usize>,
        /// Include Kraus operators of the converting channel.
        #[arg(long)]
        kraus: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discrete Wigner table of a state.
    Wigner {
        #[arg(long)]
        state: PathBuf,
        /// Prime factors of the dimension, e.g. 3,5.
        #[arg(long)]
        dims: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weyl-Heisenberg-covariant conversion ρ → σ.
    WhConvert {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        dims: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spin-state coupling and conversion.
    Su2 {
        #[arg(value_enum)]
        action: Su2Action,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Rotation vector "vx,vy,vz" for `chi`; random elements otherwise.
        #[arg(long, allow_hyphen_values = true)]
        g: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Can one use of U or V be told apart with certainty?
    Distinguish {
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RangeArgs {
    #[arg(long)]
    ops: PathBuf,
    #[arg(long)]
    dims: Option<String>,
    #[arg(long, default_value_t = 500)]
    dirs: usize,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Xy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Su2Action {
    Combine,
    Chi,
    Convert,
    Marvian,
}

fn envelope(seed: u64, tolerances: Value, result: Value) -> Value {
    json!({
        "tool": "qgeom",
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "tolerances": tolerances,
        "result": result,
    })
}

fn directions(k: usize, n: usize, seed: u64) -> Vec<Direction> {
    match k {
        2 => numrange::circle_directions(n),
        3 => numrange::fibonacci_sphere(n),
        _ => numrange::sweep_directions(k, n, seed),
    }
}

fn body_json(b: &ConvexBodyApprox) -> Value {
    let half: Vec<Value> =
        b.outer_halfspaces.iter().map(|(n, h)| json!({"normal": n.as_slice(), "offset": h})).collect();
    json!({
        "dim": b.dim(),
        "inner_vertices": b.inner_vertices,
        "outer_halfspaces": half,
        "bounded": b.bounded,
        "heuristic_outer": b.heuristic_outer,
    })
}

/// Joins single-direction bodies computed in parallel.
fn merge_bodies(parts: Vec<ConvexBodyApprox>, dirs: &[Direction]) -> ConvexBodyApprox {
    let heuristic_outer = parts.iter().any(|p| p.heuristic_outer);
    let mut inner_vertices = Vec::new();
    let mut outer_halfspaces = Vec::new();
    for p in parts {
        inner_vertices.extend(p.inner_vertices);
        outer_halfspaces.extend(p.outer_halfspaces);
    }
    ConvexBodyApprox { inner_vertices, outer_halfspaces, bounded: numrange::positively_spanning(dirs), heuristic_outer }
}

fn write_mesh(path: &std::path::Path, body: &ConvexBodyApprox) -> Result<(), CliError> {
    match body.dim() {
        2 => {
            let poly = body.inner_polygon().expect("2D body");
            let mut rows: Vec<Vec<String>> = poly.iter().map(|p| vec![p[0].to_string(), p[1].to_string()]).collect();
            if let Some(first) = rows.first().cloned() {
                rows.push(first);
            }
            io::write_csv(path, &["x", "y"], &rows)
        }
        3 => {
            let hull = body
                .inner_hull()
                .ok_or_else(|| CliError::Compute("inner vertices are degenerate; no 3D hull".into()))?;
            io::write_text(path, &io::obj_text(&hull))
        }
        k => Err(CliError::Usage(format!("meshes need 2 or 3 operators, got {k}"))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let seed = cli.seed;
    match cli.cmd {
        Cmd::Jnr { ops, dirs, out, mesh } => {
            let (ops, _) = io::read_operators(&ops)?;
            let ds = directions(ops.len(), dirs, seed);
            let samples =
                ds.par_iter().map(|n| numrange::support(&ops, n)).collect::<Result<Vec<_>, _>>()?;
            let body = numrange::assemble(&ops, &samples);
            if let Some(m) = mesh {
                write_mesh(&m, &body)?;
            }
            io::emit_json(out.as_deref(), &envelope(seed, json!({"degenerate_rel_gap": 1e-10}), body_json(&body)))
        }
        Cmd::Classify { ops, out } => {
            let (ops, _) = io::read_operators(&ops)?;
            if ops.len() != 3 || ops.iter().any(|o| o.dim() != 3) {
                return Err(CliError::Usage("classify needs three 3×3 operators".into()));
            }
            let cl = numrange::classify_qutrit_jnr(&ops)?;
            let faces: Vec<Value> = cl
                .faces
                .iter()
                .map(|f| {
                    json!({
                        "normal": f.normal,
                        "dimension": f.dimension,
                        "shape": format!("{:?}", f.shape).to_lowercase(),
                        "gap": f.gap,
                    })
                })
                .collect();
            let res = json!({"e": cl.e, "s": cl.s, "faces": faces, "confidence": cl.confidence()});
            io::emit_json(out.as_deref(), &envelope(seed, json!({"flat_gap": 1e-8}), res))
        }
        Cmd::SepMax { op, dims, restarts, out } => {
            let (h, file_dims) = io::read_operator(&op)?;
            let dims = io::dimension_spec(dims.as_deref(), file_dims)?;
            let b = entangle::seesaw_product_max(&h, &dims, restarts, seed)?;
            let factors: Vec<Value> = b.witness.factors.iter().map(|v| json!(v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())).collect();
            let mut res = json!({
                "lower": b.lower,
                "upper": b.upper,
                "restarts": b.restarts,
                "witness": factors,
            });
            if dims.len() == 2 && dims.total() <= 6 {
                // PPT and separable coincide on 2×2 and 2×3
                let p = entangle::ppt_max(&h, &dims, 1e-10)?;
                res["ppt_max"] = json!(p.value);
                res["upper"] = json!(p.value.max(b.lower));
            }
            io::emit_json(out.as_deref(), &envelope(seed, json!({"ppt": 1e-10}), res))
        }
        Cmd::SepJnr(a) => {
            let (ops, file_dims) = io::read_operators(&a.ops)?;
            let dims = io::dimension_spec(a.dims.as_deref(), file_dims)?;
            let ds = directions(ops.len(), a.dirs, seed);
            let parts = ds
                .par_iter()
                .enumerate()
                .map(|(i, n)| entangle::sep_numerical_range(&ops, &dims, std::slice::from_ref(n), a.restarts, seed ^ i as u64))
                .collect::<Result<Vec<_>, _>>()?;
            let body = merge_bodies(parts, &ds);
            io::emit_json(a.out.as_deref(), &envelope(seed, json!({"restarts": a.restarts}), body_json(&body)))
        }
        Cmd::PptJnr(a) => {
            let (ops, file_dims) = io::read_operators(&a.ops)?;
            let dims = io::dimension_spec(a.dims.as_deref(), file_dims)?;
            let ds = directions(ops.len(), a.dirs, seed);
            let parts = ds
                .par_iter()
                .map(|n| entangle::ppt_numerical_range(&ops, &dims, std::slice::from_ref(n), a.tol))
                .collect::<Result<Vec<_>, _>>()?;
            let body = merge_bodies(parts, &ds);
            io::emit_json(a.out.as_deref(), &envelope(seed, json!({"ppt": a.tol}), body_json(&body)))
        }
        Cmd::Uncertainty { ops, table_j, out } => {
            let (x, y) = match (ops, table_j) {
                (Some(p), None) => {
                    let (ops, _) = io::read_operators(&p)?;
                    if ops.len() != 2 {
                        return Err(CliError::Usage("uncertainty needs exactly two operators".into()));
                    }
                    (ops[0].clone(), ops[1].clone())
                }
                (None, Some(j)) => {
                    let j: su2::HalfInt = j.parse()?;
                    if j.twice() <= 0 {
                        return Err(CliError::Usage("--table-j must be positive".into()));
                    }
                    let [jx, jy, _] = spin_operators(j.twice() as usize)?;
                    (jx, jy)
                }
                _ => return Err(CliError::Usage("give --ops or --table-j".into())),
            };
            let vb = uncertainty::min_sum_variances(&x, &y)?;
            let px = SectorPartition::refined(&x, 1e-4);
            let py = SectorPartition::refined(&y, 1e-4);
            let sb = uncertainty::sector_sum_bound(&x, &y, &px, &py)?;
            let cert: Vec<[f64; 2]> = vb.certificate_vector.iter().map(|z| [z.re, z.im]).collect();
            let res = json!({
                "value": vb.value,
                "x": vb.minimizer.0,
                "y": vb.minimizer.1,
                "lower_bound": sb.c,
                "delta": sb.delta,
                "certificate": cert,
            });
            io::emit_json(out.as_deref(), &envelope(seed, json!({"sector_delta": 1e-4}), res))
        }
        Cmd::Gap { model: Model::Xy, n, gamma, lambda_max, steps, taper, csv, out } => {
            let h: ChainOperator = gapwitness::build_chain_sparse(&gapwitness::xy_spec(n, gamma, taper)?)?.into();
            let v: ChainOperator = gapwitness::build_chain_sparse(&gapwitness::witness_v_spec(n)?)?.into();
            let curve = gapwitness::ground_curve(&h, &v, &gapwitness::lambda_grid(lambda_max, steps))?;
            let rep = gapwitness::gap_upper_bound(&h, &v, &curve)?;
            if let Some(p) = csv {
                let rows: Vec<Vec<String>> = curve
                    .samples
                    .iter()
                    .map(|s| vec![s.lambda.to_string(), s.e0.to_string(), s.h.to_string(), s.v.to_string()])
                    .collect();
                io::write_csv(&p, &["lambda", "e0", "h", "v"], &rows)?;
            }
            let res = json!({
                "n": n,
                "gamma": gamma,
                "epsilon": rep.epsilon,
                "lambda_star": rep.lambda_star,
                "true_gap": rep.true_gap,
                "consistent": rep.consistent,
                "post_overlap": rep.post_overlap,
                "degenerate_ground": rep.degenerate_ground,
            });
            io::emit_json(out.as_deref(), &envelope(seed, json!({"jump_offset": gapwitness::JUMP_OFFSET}), res))
        }
        Cmd::Interconvert { psi, phi, exact, aux_d, kraus, out } => {
            let (a, b) = (io::read_ladder(&psi)?, io::read_ladder(&phi)?);
            let (p, q) = (a.probs()?, b.probs()?);
            let mut res = if let Some(d) = aux_d {
                let w = interconvert::aux_reachable(&p, &q, d)?;
                json!({
                    "convertible": w.is_some(),
                    "aux_d": d,
                    "w": w.map(|w| json!({"offset": w.offset, "weights": w.weights})),
                })
            } else if exact {
                let r = interconvert::u1_majorized_exact(&a.exact()?, &b.exact()?)?;
                json!({
                    "convertible": r.convertible,
                    "embedding_dim": r.embedding_dim,
                    "singular_retries": r.singular_retries,
                    "w": r.w.as_ref().map(|w| json!({
                        "offset": w.offset,
                        "weights": w.weights.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                        "approx": w.weights.iter().map(rational_to_f64).collect::<Vec<_>>(),
                    })),
                })
            } else {
                let r = interconvert::u1_majorized(&p, &q)?;
                json!({
                    "convertible": r.convertible,
                    "embedding_dim": r.embedding_dim,
                    "singular_retries": r.singular_retries,
                    "w": r.w.as_ref().map(|w| json!({"offset": w.offset, "weights": w.weights})),
                })
            };
            if kraus && aux_d.is_none() && res["convertible"] == json!(true) {
                let w = interconvert::u1_majorized(&p, &q)?.w.expect("convertible");
                let k = interconvert::build_u1_kraus(&p, &q, &w)?;
                let ops: Vec<Value> = k
                    .shifts
                    .iter()
                    .zip(&k.channel.kraus)
                    .map(|(s, m)| json!({"shift": s, "matrix": io::matrix_json(m)}))
                    .collect();
                res["kraus"] = json!({"window_offset": k.window_offset, "operators": ops});
            }
            io::emit_json(out.as_deref(), &envelope(seed, json!({"clip": 1e-12}), res))
        }
        Cmd::Wigner { state, dims, out } => {
            let sys = WignerSystem::new(&io::parse_usize_list(&dims)?)?;
            let rho = io::read_state(&state)?;
            let w = sys.wigner_of(&rho)?;
            let d = sys.dim();
            let negativity: f64 = w.values.iter().filter(|v| **v < 0.0).map(|v| -v).sum();
            if let Some(p) = out {
                let rows: Vec<Vec<String>> = (0..d * d)
                    .map(|i| vec![(i / d).to_string(), (i % d).to_string(), w.values[i].to_string()])
                    .collect();
                io::write_csv(&p, &["x", "q", "w"], &rows)?;
            }
            let res = json!({"dim": d, "min": w.min(), "negativity": negativity, "total": w.total()});
            io::emit_json(None, &envelope(seed, json!({}), res))
        }
        Cmd::WhConvert { rho, sigma, dims, out } => {
            let sys = WignerSystem::new(&io::parse_usize_list(&dims)?)?;
            let (r, s) = (io::read_state(&rho)?, io::read_state(&sigma)?);
            let k = sys.wh_convertible(&r, &s)?;
            let res = json!({
                "convertible": k.is_some(),
                "kernel": k.map(|k| k.values),
            });
            io::emit_json(out.as_deref(), &envelope(seed, json!({"fourier_floor": 1e-10, "residual": 1e-9}), res))
        }
        Cmd::Su2 { action, a, b, samples, g, out } => {
            let ka = io::read_spin(&a)?;
            let kb = || -> Result<su2::SpinKet, CliError> {
                io::read_spin(b.as_ref().ok_or_else(|| CliError::Usage("--b is required".into()))?)
            };
            let res = match action {
                Su2Action::Combine => io::spin_json(&su2::spin_combine(&ka, &kb()?)),
                Su2Action::Convert => io::spin_json(&su2::jz_convert(&ka, &kb()?)?),
                Su2Action::Chi => {
                    let gs = match g {
                        Some(s) => {
                            let v = io::parse_f64_list(&s)?;
                            if v.len() != 3 {
                                return Err(CliError::Usage("--g needs three components".into()));
                            }
                            vec![GroupElement { v: [v[0], v[1], v[2]] }]
                        }
                        None => {
                            let mut r = rng::seeded(seed);
                            (0..samples).map(|_| GroupElement::haar(&mut r)).collect()
                        }
                    };
                    Value::Array(
                        gs.iter()
                            .map(|g| {
                                let z = su2::characteristic_function(&ka, g);
                                json!({"g": g.v, "chi": [z.re, z.im]})
                            })
                            .collect(),
                    )
                }
                Su2Action::Marvian => match su2::marvian_necessary_test(&ka, &kb()?, samples, seed) {
                    su2::MarvianVerdict::Consistent { min_eig, max_eig, dropped } => {
                        json!({"verdict": "consistent", "min_eig": min_eig, "max_eig": max_eig, "dropped": dropped})
                    }
                    su2::MarvianVerdict::Impossible { certificate, dropped } => json!({
                        "verdict": "impossible",
                        "value": certificate.value,
                        "elements": certificate.elements.iter().map(|g| g.v).collect::<Vec<_>>(),
                        "coefficients": certificate.coefficients.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                        "dropped": dropped,
                    }),
                },
            };
            io::emit_json(out.as_deref(), &envelope(seed, json!({"chi_floor": 1e-8, "psd_rel": 1e-6}), res))
        }
        Cmd::Distinguish { u, v, out } => {
            let (u, _) = io::read_matrix(&u)?;
            let (v, _) = io::read_matrix(&v)?;
            let res = match numrange::one_shot_distinguishable(&u, &v)? {
                Distinguishability::Perfect { psi } => json!({
                    "distinguishable": true,
                    "psi": psi.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                }),
                Distinguishability::Impossible { direction, distance } => json!({
                    "distinguishable": false,
                    "direction": direction,
                    "distance": distance,
                }),
            };
            io::emit_json(out.as_deref(), &envelope(seed, json!({"unitarity": 1e-9}), res))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
