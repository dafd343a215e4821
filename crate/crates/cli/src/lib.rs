//! Command-line front end: argument parsing, JSON input and output, and
//! dispatch to `isodag-core`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use isodag_core::classify::{ClassifyMode, ClassifyOptions};
use isodag_core::isodag::{rounds_for, DEFAULT_SEED};
use isodag_core::variety::{point_to_json, rational_matrix_from_json};
use isodag_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "isodag",
    version,
    about = "Isomorphism and equivalence of Gaussian DAG models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Read node ids in inputs as 1-based.
    #[arg(long, global = true)]
    pub one_based: bool,
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write the JSON result to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Are the two models equal up to relabeling?
    Iso(PairArgs),
    /// Are the two graphs Markov equivalent?
    Equiv(PairArgs),
    /// d-separation of two nodes given a set.
    Dsep {
        graph: PathBuf,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long, value_delimiter = ',')]
        cond: Vec<usize>,
    },
    /// List conditional-independence relations of a graph.
    Relations {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = RelationKind::Imposed)]
        kind: RelationKind,
        /// Nodes to marginalize out (with `--kind marginal`).
        #[arg(long, value_delimiter = ',')]
        marginalize: Vec<usize>,
    },
    /// Draw a point on the graph's variety.
    Sample {
        graph: PathBuf,
        #[arg(long)]
        q: Option<u64>,
        /// Exact covariance of random integer structural equations instead.
        #[arg(long)]
        rational: bool,
    },
    /// Isomorphism classes of directed trees on `n` nodes.
    ClassifyTrees {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Oracle)]
        mode: ModeArg,
        #[arg(long, default_value_t = 3)]
        m: u32,
        #[arg(long)]
        q: Option<u64>,
    },
    /// Gaussian CI statement `A ⊥⊥ B | C` by the rank criterion.
    CiGaussian {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        b: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        c: Vec<usize>,
    },
    /// Do the imposed relations of `small`, embedded into `large`, hold there?
    LiesBelow {
        small: PathBuf,
        large: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        embed: Vec<usize>,
    },
}

#[derive(Args, Debug)]
pub struct PairArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    /// Rounds; chosen from `--eps` when absent.
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub q: Option<u64>,
    /// Target false-accept probability, e.g. `1e-9` or `1/1000`.
    #[arg(long, default_value = "1e-9")]
    pub eps: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RelationKind {
    Imposed,
    Implied,
    Minors,
    Tree,
    Marginal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Oracle,
    Randomized,
    CrossCheck,
}

/// Result of one invocation.
#[derive(Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Failure {
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            kind: "invalid",
            message: e.to_string(),
        }
    }
}

fn failure(kind: &'static str, message: impl Into<String>) -> Failure {
    Failure {
        kind,
        message: message.into(),
    }
}

type Res<T> = std::result::Result<T, Failure>;

struct Ctx {
    one_based: bool,
    seed: u64,
}

impl Ctx {
    fn node(&self, v: usize) -> Res<usize> {
        if !self.one_based {
            return Ok(v);
        }
        v.checked_sub(1)
            .ok_or_else(|| failure("invalid", "node id 0 given with --one-based"))
    }

    fn nodes(&self, vs: &[usize]) -> Res<Vec<usize>> {
        vs.iter().map(|&v| self.node(v)).collect()
    }

    fn read_dag(&self, path: &Path) -> Res<Dag> {
        let text = read(path)?;
        let raw: DagJson =
            serde_json::from_str(&text).map_err(|e| failure("parse", format!("{}: {e}", path.display())))?;
        let raw = if self.one_based {
            let edges = raw
                .edges
                .iter()
                .map(|&[u, v]| Ok([self.node(u)?, self.node(v)?]))
                .collect::<Res<Vec<_>>>()?;
            DagJson { n: raw.n, edges }
        } else {
            raw
        };
        Ok(Dag::try_from(raw)?)
    }
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| failure("io", format!("{}: {e}", path.display())))
}

fn field(q: Option<u64>) -> Res<PrimeField> {
    Ok(q.map(PrimeField::new).transpose()?.unwrap_or_default())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("output types serialize")
}

/// Parse arguments and run; never panics on bad input.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: e.to_string(),
                    stderr: String::new(),
                },
                _ => error_outcome(failure("usage", e.to_string().trim_end())),
            };
        }
    };
    run_cli(&cli)
}

fn error_outcome(f: Failure) -> Outcome {
    Outcome {
        code: 2,
        stdout: String::new(),
        stderr: format!("{}\n", json!({ "error": f.kind, "message": f.message })),
    }
}

pub fn run_cli(cli: &Cli) -> Outcome {
    let ctx = Ctx {
        one_based: cli.one_based,
        seed: cli.seed,
    };
    let (value, code) = match dispatch(&ctx, &cli.command) {
        Ok(r) => r,
        Err(f) => return error_outcome(f),
    };
    let text = format!(
        "{}\n",
        serde_json::to_string_pretty(&value).expect("JSON values serialize")
    );
    match &cli.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome {
                code,
                stdout: String::new(),
                stderr: String::new(),
            },
            Err(e) => error_outcome(failure("io", format!("{}: {e}", path.display()))),
        },
        None => Outcome {
            code,
            stdout: text,
            stderr: String::new(),
        },
    }
}

fn dispatch(ctx: &Ctx, cmd: &Command) -> Res<(Value, i32)> {
    match cmd {
        Command::Iso(args) => pair(ctx, args, true),
        Command::Equiv(args) => pair(ctx, args, false),
        Command::Dsep { graph, i, j, cond } => {
            let g = ctx.read_dag(graph)?;
            let sep = d_separated(&g, ctx.node(*i)?, ctx.node(*j)?, &ctx.nodes(cond)?)?;
            Ok((json!({ "d_separated": sep }), 0))
        }
        Command::Relations {
            graph,
            kind,
            marginalize,
        } => {
            let g = ctx.read_dag(graph)?;
            let v = match kind {
                RelationKind::Imposed => json!({ "relations": toposorted_imposed(&g) }),
                RelationKind::Implied => json!({ "relations": implied_relations(&g)? }),
                RelationKind::Minors => json!({ "minors": imposed_minors(&g) }),
                RelationKind::Tree => json!({ "generators": tree_reduced_generators(&g)? }),
                RelationKind::Marginal => {
                    let removed = ctx.nodes(marginalize)?;
                    json!({ "removed": removed, "relations": marginal_implied(&g, &removed)? })
                }
            };
            Ok((v, 0))
        }
        Command::Sample { graph, q, rational } => {
            let g = ctx.read_dag(graph)?;
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let v = if *rational {
                if q.is_some() {
                    return Err(failure("usage", "--q and --rational are mutually exclusive"));
                }
                point_to_json(&sem_covariance(&SemParams::random(g, 10, &mut rng)))
            } else {
                point_to_json(&*sample_point(&g, &field(*q)?, &mut rng)?)
            };
            Ok((v, 0))
        }
        Command::ClassifyTrees { n, mode, m, q } => {
            let mode = match mode {
                ModeArg::Oracle => ClassifyMode::Oracle,
                ModeArg::Randomized => ClassifyMode::Randomized,
                ModeArg::CrossCheck => ClassifyMode::CrossCheck,
            };
            if *m == 0 {
                return Err(failure("invalid", "--m must be at least 1"));
            }
            let opts = ClassifyOptions {
                mode,
                q: field(*q)?,
                m: *m,
                seed: ctx.seed,
            };
            Ok((to_value(&classify_trees(*n, &opts)?), 0))
        }
        Command::CiGaussian { matrix, a, b, c } => {
            let text = read(matrix)?;
            let v: Value =
                serde_json::from_str(&text).map_err(|e| failure("parse", format!("{}: {e}", matrix.display())))?;
            let (a, b, c) = (ctx.nodes(a)?, ctx.nodes(b)?, ctx.nodes(c)?);
            Ok((json!({ "holds": ci_from_json(&v, &a, &b, &c)? }), 0))
        }
        Command::LiesBelow { small, large, embed } => {
            let (m, g) = (ctx.read_dag(small)?, ctx.read_dag(large)?);
            Ok((json!({ "lies_below": lies_below_ci(&m, &g, &ctx.nodes(embed)?)? }), 0))
        }
    }
}

/// A bare array of rows is read over the rationals; a point object
/// `{"q": ..., "mat": ...}` over its stated field.
fn ci_from_json(v: &Value, a: &[usize], b: &[usize], c: &[usize]) -> Res<bool> {
    let (q, mat) = match v {
        Value::Object(o) => (
            o.get("q").cloned().unwrap_or(Value::Null),
            o.get("mat")
                .ok_or_else(|| failure("parse", "matrix object needs a \"mat\" field"))?,
        ),
        other => (Value::Null, other),
    };
    match q {
        Value::Number(q) => {
            let f = field(q.as_u64())?;
            let rows = rational_matrix_from_json(mat)?.to_rows();
            let rows = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|x| {
                            field::rational_mod(&f, x).ok_or_else(|| failure("invalid", "denominator divisible by q"))
                        })
                        .collect()
                })
                .collect::<Res<Vec<Vec<u64>>>>()?;
            Ok(gaussian_ci(&SymMatrix::from_rows(f, rows)?, a, b, c)?)
        }
        Value::Null | Value::String(_) => Ok(gaussian_ci(&rational_matrix_from_json(mat)?, a, b, c)?),
        _ => Err(failure("parse", "\"q\" must be a modulus or \"rational\"")),
    }
}

fn pair(ctx: &Ctx, args: &PairArgs, relabel: bool) -> Res<(Value, i32)> {
    let g = ctx.read_dag(&args.first)?;
    let h = ctx.read_dag(&args.second)?;
    let q = field(args.q)?;
    let d_bound = isodag::degree_bound(&g, &h);
    let m = match args.m {
        Some(m) => m,
        None => {
            let eps = parse_rational(&args.eps)?;
            rounds_for(g.n().max(h.n()), d_bound, q, &eps, relabel)?
        }
    };
    let params = IsoParams::new(m, q, d_bound, ctx.seed)?;
    let verdict = if relabel {
        isodag_test(&g, &h, &params)?
    } else {
        equiv_randomized(&g, &h, &params)?
    };
    let code = if verdict.is_yes() { 0 } else { 1 };
    Ok((to_value(&verdict), code))
}
