mod input;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mtlab::axioms::scan_property;
use mtlab::deduction::{bundled_script, check_derivation, load_script};
use mtlab::learn::{chow_liu, ingest_samples, mutual_information, pairwise_mi};
use mtlab::model_gen::{
    chain_preset, deterministic_copy_dist, random_positive_table, random_tree, random_tree_binary, random_tree_gaussian,
};
use mtlab::perfectness::{defining_edge_check, edge_marginal_check, equivalence_scan};
use mtlab::{markov_network, CIQuery, ModelRef, PropertyId, Seed, SepQuery, UGraph};
use serde::Serialize;

use input::*;

#[derive(Parser)]
#[command(
    name = "mtlab",
    version,
    about = "Conditional independence, separation and perfectness checks for Markov trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Tolerance for single CI decisions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Tolerance for property-scan antecedents.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_ante: f64,
    /// Tolerance for property-scan conclusions.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol_conc: f64,
    /// Seed for generators.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Summary,
    /// One violation per line (axioms only).
    Jsonl,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ModelArgs {
    /// Joint table JSON (or a model bundle).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Gaussian model JSON.
    #[arg(long)]
    gauss: Option<PathBuf>,
}

#[derive(Args)]
struct TreeSource {
    /// Number of vertices of a fresh uniform random tree.
    #[arg(long, conflicts_with = "tree", required_unless_present = "tree")]
    n: Option<usize>,
    /// Existing tree JSON (or a model bundle).
    #[arg(long)]
    tree: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Uniform random labelled tree.
    GenTree {
        #[arg(long)]
        n: usize,
    },
    /// Binary tree model bundle.
    GenModel {
        #[command(flatten)]
        source: TreeSource,
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
    /// Gaussian model Markov with respect to a tree, bundled with the tree.
    GenGauss {
        #[command(flatten)]
        source: TreeSource,
        #[arg(long, default_value_t = 0.2)]
        rho_min: f64,
        #[arg(long, default_value_t = 0.9)]
        rho_max: f64,
    },
    /// Random strictly positive table.
    GenTable {
        #[arg(long)]
        n: usize,
        /// Mixing weight towards uniform; defaults to a tenth of 2^-n.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Built-in models that need no seed.
    Preset {
        #[arg(value_enum)]
        name: Preset,
        /// Number of copies for the copy distribution.
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Conditional independence query.
    Ci {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        z: Vec<String>,
    },
    /// Partial correlation.
    Pcor {
        #[arg(long)]
        gauss: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, value_delimiter = ',')]
        z: Vec<String>,
    },
    /// Vertex separation query.
    Sep {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "A", value_delimiter = ',', required = true)]
        a: Vec<String>,
        #[arg(long = "B", value_delimiter = ',', required = true)]
        b: Vec<String>,
        #[arg(long = "C", value_delimiter = ',')]
        c: Vec<String>,
    },
    /// Markov network of a table.
    Mn {
        #[arg(long)]
        table: PathBuf,
    },
    /// Compare tree separation with model independence on every triple.
    Perfect {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        tree: PathBuf,
    },
    /// Per-edge dependence check.
    EdgeCheck {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, value_enum, default_value_t = EdgeKind::Marginal)]
        kind: EdgeKind,
    },
    /// Exhaustive property scan.
    Axioms {
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        gauss: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Property name, or `all`.
        #[arg(long, default_value = "all")]
        property: String,
    },
    /// Mutual information of one pair, or of every pair.
    Mi {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, requires = "y")]
        x: Option<String>,
        #[arg(long, requires = "x")]
        y: Option<String>,
    },
    /// Chow-Liu tree from a table or a sample CSV.
    Chowliu {
        #[arg(long, conflicts_with = "samples", required_unless_present = "samples")]
        table: Option<PathBuf>,
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        smoothing: f64,
    },
    /// Empirical table from a sample CSV.
    Ingest {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        smoothing: f64,
    },
    /// Check a proof script (a file, or the name of a bundled script).
    Prove { script: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Preset {
    Chain,
    Copy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EdgeKind {
    Marginal,
    Defining,
}

/// Rendered result plus whether the run found a violation or mismatch.
struct Outcome {
    text: String,
    found: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, found: false }
    }
}

fn json<S: Serialize>(v: &S) -> String {
    serde_json::to_string(v).expect("reports serialize")
}

fn edge_list(g: &UGraph) -> String {
    g.edge_names().iter().map(|(u, v)| format!("{u}-{v}")).collect::<Vec<_>>().join(" ")
}

impl Cli {
    fn seed(&self) -> Result<Seed, Failure> {
        self.seed.map(Seed).ok_or_else(|| Failure::Usage("generators require --seed".into()))
    }

    fn check_tolerances(&self) -> Result<(), Failure> {
        for (name, t) in [("--tol", self.tol), ("--tol-ante", self.tol_ante), ("--tol-conc", self.tol_conc)] {
            if t.is_nan() || t < 0.0 {
                return Err(Failure::Usage(format!("{name} must be nonnegative")));
            }
        }
        Ok(())
    }

    fn format(&self, default: Format) -> Result<Format, Failure> {
        let f = self.format.unwrap_or(default);
        if f == Format::Jsonl && !matches!(self.command, Command::Axioms { .. }) {
            return Err(Failure::Usage("jsonl output is only available for axioms".into()));
        }
        Ok(f)
    }

    fn tree_from(&self, source: &TreeSource) -> Result<UGraph, Failure> {
        match (&source.tree, source.n) {
            (Some(path), _) => read_graph(path),
            (None, Some(n)) => Ok(random_tree(n, self.seed()?)?),
            (None, None) => Err(Failure::Usage("give --n or --tree".into())),
        }
    }

    fn run(&self) -> Result<Outcome, Failure> {
        self.check_tolerances()?;
        let summary = self.format(Format::Json)? == Format::Summary;
        let out = match &self.command {
            Command::GenTree { n } => {
                let g = random_tree(*n, self.seed()?)?;
                Outcome::ok(if summary { edge_list(&g) } else { json(&g) })
            }
            Command::GenModel { source, epsilon, delta } => {
                // A fresh tree uses the seed itself; the parameters use the next one.
                let seed = self.seed()?;
                let tree = self.tree_from(source)?;
                let m = random_tree_binary(&tree, Seed(seed.0.wrapping_add(1)), *epsilon, *delta)?;
                Outcome::ok(json(&m))
            }
            Command::GenGauss { source, rho_min, rho_max } => {
                let seed = self.seed()?;
                let tree = self.tree_from(source)?;
                let gaussian = random_tree_gaussian(&tree, Seed(seed.0.wrapping_add(1)), *rho_min, *rho_max)?;
                Outcome::ok(json(&serde_json::json!({ "tree": tree, "gaussian": gaussian, "seed": seed })))
            }
            Command::GenTable { n, epsilon } => {
                let eps = epsilon.unwrap_or(0.1 * 0.5f64.powi(*n as i32));
                Outcome::ok(json(&random_positive_table(*n, self.seed()?, eps)?))
            }
            Command::Preset { name, k } => match name {
                Preset::Chain => Outcome::ok(json(&chain_preset())),
                Preset::Copy => Outcome::ok(json(&deterministic_copy_dist(*k)?)),
            },
            Command::Ci { model, x, y, z } => {
                let q = CIQuery::new(x, y, z);
                if let Some(path) = &model.table {
                    let r = read_table(path)?.is_ci(&q, self.tol)?;
                    Outcome::ok(if summary { r.holds.to_string() } else { json(&r) })
                } else {
                    let path = model.gauss.as_ref().expect("clap enforces one model");
                    let r = read_gaussian(path)?.is_ci(&q, self.tol)?;
                    Outcome::ok(if summary { r.holds.to_string() } else { json(&r) })
                }
            }
            Command::Pcor { gauss, x, y, z } => {
                let r = read_gaussian(gauss)?.partial_correlation(x, y, z)?;
                Outcome::ok(json(&r))
            }
            Command::Sep { graph, a, b, c } => {
                let r = read_graph(graph)?.separates(&SepQuery::new(a, b, c))?;
                Outcome::ok(json(&r))
            }
            Command::Mn { table } => {
                let g = markov_network(&read_table(table)?, self.tol)?;
                Outcome::ok(if summary { edge_list(&g) } else { json(&g) })
            }
            Command::Perfect { model, tree } => {
                let summary = self.format(Format::Summary)? == Format::Summary;
                let tree = read_graph(tree)?;
                let report = if let Some(path) = &model.table {
                    let t = read_table(path)?;
                    let r = equivalence_scan(&t, &tree, self.tol)?;
                    (r.summary(), json(&r), r.is_perfect())
                } else {
                    let g = read_gaussian(model.gauss.as_ref().expect("clap enforces one model"))?;
                    let r = equivalence_scan(&g, &tree, self.tol)?;
                    (r.summary(), json(&r), r.is_perfect())
                };
                Outcome { text: if summary { report.0 } else { report.1 }, found: !report.2 }
            }
            Command::EdgeCheck { model, tree, kind } => {
                let tree = read_graph(tree)?;
                let check = match kind {
                    EdgeKind::Marginal => edge_marginal_check,
                    EdgeKind::Defining => defining_edge_check,
                };
                let (text, passed) = if let Some(path) = &model.table {
                    let r = check(ModelRef::Discrete(&read_table(path)?), &tree, self.tol)?;
                    (json(&r), r.passed)
                } else {
                    let g = read_gaussian(model.gauss.as_ref().expect("clap enforces one model"))?;
                    let r = check(ModelRef::Gaussian(&g), &tree, self.tol)?;
                    (json(&r), r.passed)
                };
                let text = if summary { if passed { "PASSED" } else { "FAILED" }.to_string() } else { text };
                Outcome { text, found: !passed }
            }
            Command::Axioms { table, gauss, graph, property } => self.axioms(table, gauss, graph, property)?,
            Command::Mi { table, x, y } => {
                let t = read_table(table)?;
                match (x, y) {
                    (Some(x), Some(y)) => Outcome::ok(json(&mutual_information(&t, x, y)?)),
                    _ => {
                        #[derive(Serialize)]
                        struct PairMi {
                            x: String,
                            y: String,
                            mi: f64,
                        }
                        let pairs: Vec<PairMi> =
                            pairwise_mi(&t).into_iter().map(|(x, y, mi)| PairMi { x, y, mi }).collect();
                        Outcome::ok(json(&pairs))
                    }
                }
            }
            Command::Chowliu { table, samples, smoothing } => {
                let t = match (table, samples) {
                    (Some(path), _) => read_table(path)?,
                    (None, Some(path)) => ingest_samples(&read_samples(path)?, *smoothing)?,
                    (None, None) => return Err(Failure::Usage("give --table or --samples".into())),
                };
                let g = chow_liu(&t)?;
                Outcome::ok(if summary { edge_list(&g) } else { json(&g) })
            }
            Command::Ingest { samples, smoothing } => {
                Outcome::ok(json(&ingest_samples(&read_samples(samples)?, *smoothing)?))
            }
            Command::Prove { script } => {
                let summary = self.format(Format::Summary)? == Format::Summary;
                let path = PathBuf::from(script);
                let text = if path.exists() {
                    read_text(&path)?
                } else {
                    bundled_script(script)
                        .ok_or_else(|| Failure::Usage(format!("{script}: no such file or bundled script")))?
                        .to_string()
                };
                let verdict = check_derivation(&load_script(&text)?)?;
                let text = if summary { verdict.summary() } else { json(&verdict) };
                Outcome { text, found: !verdict.valid }
            }
        };
        Ok(out)
    }

    fn axioms(
        &self,
        table: &Option<PathBuf>,
        gauss: &Option<PathBuf>,
        graph: &Option<PathBuf>,
        property: &str,
    ) -> Result<Outcome, Failure> {
        let properties: Vec<PropertyId> =
            if property == "all" { PropertyId::ALL.to_vec() } else { vec![property.parse()?] };
        let (t, g, sep) = match (table, gauss, graph) {
            (Some(p), None, None) => (Some(read_table(p)?), None, None),
            (None, Some(p), None) => (None, Some(read_gaussian(p)?), None),
            (None, None, Some(p)) => (None, None, Some(read_graph(p)?)),
            _ => return Err(Failure::Usage("give exactly one of --table, --gauss, --graph".into())),
        };
        let model: ModelRef<'_, f64> = match (&t, &g, &sep) {
            (Some(t), _, _) => ModelRef::Discrete(t),
            (_, Some(g), _) => ModelRef::Gaussian(g),
            (_, _, Some(s)) => ModelRef::Graph(s),
            _ => unreachable!(),
        };
        let reports = properties
            .into_iter()
            .map(|p| scan_property(model, p, self.tol_ante, self.tol_conc))
            .collect::<mtlab::Result<Vec<_>>>()?;
        let found = reports.iter().any(|r| !r.violations.is_empty());
        let text = match self.format(Format::Json)? {
            Format::Json if reports.len() == 1 => json(&reports[0]),
            Format::Json => json(&reports),
            Format::Jsonl => reports.iter().map(|r| r.to_json_lines()).collect::<String>().trim_end().to_string(),
            Format::Summary => reports
                .iter()
                .map(|r| {
                    format!(
                        "{}: {} instances, {} non-vacuous, {} violations",
                        r.property,
                        r.instances,
                        r.non_vacuous,
                        r.violations.len()
                    )
                })
                .collect::<Vec<_>>()
                .join("\n"),
        };
        Ok(Outcome { text, found })
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match cli.run() {
        Ok(out) => {
            let mut text = out.text;
            if !text.is_empty() {
                text.push('\n');
            }
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &text),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if out.found { 1 } else { 0 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
