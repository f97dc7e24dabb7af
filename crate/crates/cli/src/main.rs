//! `ribbonrec`: exact enumerative invariants of metric ribbon graphs.
//!
//! Exit codes: 0 on success, 1 on a domain error (bad input, unstable type),
//! 2 on an internal cross-check failure (engine routes disagreeing).

use clap::{Parser, Subcommand, ValueEnum};
use ribbonrec_core::curves;
use ribbonrec_core::fnflip::{self, FnPoint04, FnPoint11};
use ribbonrec_core::pants;
use ribbonrec_core::poly::{render_symmetric, sym_terms_to_latex, Poly, SymTerm};
use ribbonrec_core::rational::{parse_rat, parse_rat_list, rat_to_f64, rat_to_string, Rat};
use ribbonrec_core::ribbon::{enumerate_all_cells, enumerate_trivalent, Metric, RibbonGraph};
use ribbonrec_core::stablegraphs::{
    enumerate_stable_graphs, mv_volume, stable_graph_json, stable_graph_sum, EdgeWeight,
};
use ribbonrec_core::table1;
use ribbonrec_core::trengine::{discrete_n, mc_average, twisted_vn, vk, Observable};

#[derive(Parser)]
#[command(
    name = "ribbonrec",
    about = "Enumerative invariants of metric ribbon graphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format for polynomial-valued commands.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Latex,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate labelled ribbon graph classes of a given type.
    Graphs {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        boundaries: usize,
        /// Include every cell (all valences >= 3), not only trivalent ones.
        #[arg(long)]
        all_cells: bool,
    },
    /// Count multicurves of bounded length on a metric ribbon graph.
    Multicurves {
        /// Path to a graph JSON file.
        #[arg(long)]
        graph: String,
        /// Comma-separated edge lengths (rationals like 3/2 accepted).
        #[arg(long)]
        metric: String,
        #[arg(long)]
        t: String,
        /// Also trace and print the components of each multicurve.
        #[arg(long)]
        components: bool,
    },
    /// Evaluate the Mirzakhani-McShane partition of unity on boundary 1.
    Mcshane {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        metric: String,
    },
    /// Kontsevich volume polynomial V_{g,n}(L).
    Vk {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        boundaries: usize,
        /// Evaluate at these boundary lengths instead of printing the polynomial.
        #[arg(long = "L")]
        l: Option<String>,
    },
    /// Lattice point count N_{g,n}(L) at integer boundary lengths.
    Lattice {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        boundaries: usize,
        #[arg(long = "L")]
        l: String,
    },
    /// Average multicurve-count polynomial VN_{g,n}(L; t).
    Vn {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        boundaries: usize,
        /// Evaluate at these boundary lengths (with --t) instead of printing.
        #[arg(long = "L")]
        l: Option<String>,
        #[arg(long)]
        t: Option<String>,
    },
    /// One-parameter Masur-Veech polynomial V^MV_{g,n}(L; s), plus the
    /// Masur-Veech volume when the type admits one.
    Mvpoly {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        boundaries: usize,
    },
    /// Enumerate stable graphs; optionally evaluate their sums.
    StableGraphs {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        boundaries: usize,
        /// Evaluate the edge-weighted sum: "zeta" or "bgn".
        #[arg(long)]
        sum: Option<String>,
        /// Compute the Masur-Veech volume (both routes, asserted equal).
        #[arg(long)]
        mv: bool,
    },
    /// Fenchel-Nielsen flip on the four-holed sphere or one-holed torus.
    Fnflip {
        /// "0,4" or "1,1"
        #[arg(long)]
        surface: String,
        #[arg(long = "L")]
        l: String,
        #[arg(long)]
        ell: String,
        #[arg(long)]
        tau: String,
        /// Evaluate the hyperbolic flip at inputs scaled by beta.
        #[arg(long)]
        hyperbolic: bool,
        #[arg(long, default_value_t = 1)]
        beta: u32,
    },
    /// Monte-Carlo integration over the fixed-perimeter moduli space.
    McAverage {
        /// "1,1" or "0,4"
        #[arg(long)]
        surface: String,
        #[arg(long = "L")]
        l: String,
        /// Multicurve length cutoff; constant observable when omitted.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Verify the embedded multicurve-polynomial reference table.
    Table1 {
        #[arg(long)]
        verify: bool,
    },
}

fn main() {
    if let Ok(threads) = std::env::var("RIBBONREC_THREADS") {
        if let Ok(threads) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(()) => 0,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::CrossCheck(msg)) => {
            eprintln!("internal cross-check failure: {msg}");
            2
        }
    });
}

enum CliError {
    Domain(String),
    CrossCheck(String),
}

impl From<String> for CliError {
    fn from(msg: String) -> Self {
        CliError::Domain(msg)
    }
}

fn domain<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Domain(e.to_string())
}

fn print_poly(p: &Poly, n: usize, format: Format) -> Result<(), CliError> {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&p.to_json()).unwrap()),
        Format::Latex => {
            let terms = render_symmetric(p, n).map_err(domain)?;
            println!("{}", sym_terms_to_latex(&terms));
        }
        Format::Csv => {
            let terms = render_symmetric(p, n).map_err(domain)?;
            println!("lambda,pisq,tsq,sinv,num,den");
            for SymTerm {
                lambda,
                pisq,
                tsq,
                sinv,
                coeff,
            } in terms
            {
                println!(
                    "\"{}\",{},{},{},{},{}",
                    lambda
                        .0
                        .iter()
                        .map(|p| p.to_string())
                        .collect::<Vec<_>>()
                        .join(" "),
                    pisq,
                    tsq,
                    sinv,
                    coeff.numer(),
                    coeff.denom()
                );
            }
        }
    }
    Ok(())
}

fn load_graph(path: &str) -> Result<RibbonGraph, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("bad JSON in {path}: {e}"))?;
    RibbonGraph::from_json(&value).map_err(domain)
}

fn load_metric(graph: &RibbonGraph, spec: &str) -> Result<Metric, CliError> {
    let lengths = parse_rat_list(spec)?;
    if lengths.len() != graph.n_edges() {
        return Err(CliError::Domain(format!(
            "metric has {} lengths but the graph has {} edges",
            lengths.len(),
            graph.n_edges()
        )));
    }
    Metric::new(lengths).map_err(domain)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Graphs {
            genus,
            boundaries,
            all_cells,
        } => {
            let list = if all_cells {
                enumerate_all_cells(genus, boundaries).map_err(domain)?
            } else {
                enumerate_trivalent(genus, boundaries).map_err(domain)?
            };
            let rows: Vec<serde_json::Value> = list
                .iter()
                .map(|(g, aut)| {
                    let mut j = g.to_json();
                    j["aut"] = serde_json::json!(aut);
                    j["n_edges"] = serde_json::json!(g.n_edges());
                    j
                })
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "genus": genus,
                    "boundaries": boundaries,
                    "count": rows.len(),
                    "graphs": rows,
                }))
                .unwrap()
            );
            Ok(())
        }
        Command::Multicurves {
            graph,
            metric,
            t,
            components,
        } => {
            let graph = load_graph(&graph)?;
            let metric = load_metric(&graph, &metric)?;
            let t = parse_rat(&t)?;
            let count = curves::count_multicurves(&graph, &metric, &t).map_err(domain)?;
            if components {
                let vectors = curves::multicurves_up_to(&graph, &metric, &t).map_err(domain)?;
                for m in &vectors {
                    let comps = curves::trace_components(&graph, m).map_err(domain)?;
                    let length: Rat = comps.iter().map(|c| c.length(&graph, &metric)).sum();
                    println!(
                        "m = {:?}: {} component(s), length {}",
                        m,
                        comps.len(),
                        rat_to_string(&length)
                    );
                }
            }
            println!("{count}");
            Ok(())
        }
        Command::Mcshane { graph, metric } => {
            let graph = load_graph(&graph)?;
            let metric = load_metric(&graph, &metric)?;
            if (graph.genus(), graph.n_boundaries()) != (1, 1) {
                for term in pants::mcshane_terms(&graph, &metric).map_err(domain)? {
                    let kind = match term.pants.other_face {
                        Some(f) => format!("boundary {}", f + 1),
                        None => "same face".to_string(),
                    };
                    println!(
                        "half-edge {:>3} ({kind}): {}",
                        term.pants.half_edge,
                        rat_to_string(&term.value)
                    );
                }
            }
            let total = pants::mcshane_check(&graph, &metric).map_err(domain)?;
            println!("total = {}", rat_to_string(&total));
            if total != Rat::from_integer(1.into()) {
                return Err(CliError::CrossCheck("partition of unity is not 1".into()));
            }
            Ok(())
        }
        Command::Vk {
            genus,
            boundaries,
            l,
        } => {
            let p = vk(genus, boundaries).map_err(domain)?;
            if let Some(l) = l {
                let lengths = parse_rat_list(&l)?;
                if lengths.len() != boundaries {
                    return Err(CliError::Domain("boundary count mismatch".into()));
                }
                let value = ribbonrec_core::trengine::eval_vk(&p, &lengths);
                println!("{}", rat_to_string(&value));
                return Ok(());
            }
            print_poly(&p, boundaries, cli.format)
        }
        Command::Lattice {
            genus,
            boundaries,
            l,
        } => {
            let lengths = parse_rat_list(&l)?;
            if lengths.len() != boundaries {
                return Err(CliError::Domain("boundary count mismatch".into()));
            }
            let ints: Option<Vec<i64>> = lengths
                .iter()
                .map(|r| {
                    if r.is_integer() {
                        r.to_integer().try_into().ok()
                    } else {
                        None
                    }
                })
                .collect();
            let ints = ints.ok_or(CliError::Domain(
                "lattice counts need integer lengths".into(),
            ))?;
            let count = discrete_n(genus, boundaries, &ints).map_err(domain)?;
            println!("{}", rat_to_string(&count));
            Ok(())
        }
        Command::Vn {
            genus,
            boundaries,
            l,
            t,
        } => {
            let (_, vn) = twisted_vn(genus, boundaries).map_err(domain)?;
            if let Some(l) = l {
                let lengths = parse_rat_list(&l)?;
                if lengths.len() != boundaries {
                    return Err(CliError::Domain("boundary count mismatch".into()));
                }
                let t = parse_rat(&t.unwrap_or_else(|| "0".to_string()))?;
                // exact value as a polynomial in pi^2 plus a float rendering
                let lsq: Vec<Rat> = lengths.iter().map(|v| v * v).collect();
                let mut exact: Vec<String> = Vec::new();
                let mut float = 0.0;
                let pisq = std::f64::consts::PI * std::f64::consts::PI;
                for k in 0..=vn.terms().map(|(e, _)| e[boundaries]).max().unwrap_or(0) {
                    let mut coeff = Rat::from_integer(0.into());
                    for (exp, c) in vn.terms() {
                        if exp[boundaries] != k {
                            continue;
                        }
                        let mut term = c.clone();
                        for i in 0..boundaries {
                            for _ in 0..exp[i] {
                                term *= &lsq[i];
                            }
                        }
                        for _ in 0..exp[boundaries + 1] {
                            term *= &t * &t;
                        }
                        coeff += term;
                    }
                    if coeff != Rat::from_integer(0.into()) {
                        float += rat_to_f64(&coeff) * pisq.powi(k as i32);
                        exact.push(if k == 0 {
                            rat_to_string(&coeff)
                        } else {
                            format!("{} pi^{}", rat_to_string(&coeff), 2 * k)
                        });
                    }
                }
                println!(
                    "{} (~ {float:.9})",
                    if exact.is_empty() {
                        "0".into()
                    } else {
                        exact.join(" + ")
                    }
                );
                return Ok(());
            }
            print_poly(&vn, boundaries, cli.format)
        }
        Command::Mvpoly { genus, boundaries } => {
            let (mv, _) = twisted_vn(genus, boundaries).map_err(domain)?;
            print_poly(&mv, boundaries, cli.format)?;
            use ribbonrec_core::trengine::TrError;
            match mv_volume(genus, boundaries) {
                Ok(vol) => {
                    let float = ribbonrec_core::stablegraphs::pisq_poly_to_f64(&vol);
                    println!("masur-veech volume: {vol} (~ {float:.9})");
                }
                Err(TrError::Unstable(..)) => {
                    // the normalisation is undefined on (0,3); nothing to print
                }
                Err(e) => {
                    return Err(CliError::CrossCheck(format!(
                        "masur-veech routes disagree: {e}"
                    )));
                }
            }
            Ok(())
        }
        Command::StableGraphs {
            genus,
            boundaries,
            sum,
            mv,
        } => {
            let graphs = enumerate_stable_graphs(genus, boundaries).map_err(domain)?;
            let rows: Vec<serde_json::Value> = graphs
                .iter()
                .map(|(sg, aut)| stable_graph_json(sg, *aut))
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "count": rows.len(),
                    "graphs": rows,
                }))
                .unwrap()
            );
            if let Some(kind) = sum {
                let weight = match kind.as_str() {
                    "zeta" => EdgeWeight::Zeta,
                    "bgn" => EdgeWeight::Bgn,
                    other => return Err(CliError::Domain(format!("unknown sum {other:?}"))),
                };
                let p = stable_graph_sum(genus, boundaries, weight).map_err(domain)?;
                print_poly(&p, boundaries, cli.format)?;
            }
            if mv {
                let vol = mv_volume(genus, boundaries).map_err(|e| {
                    CliError::CrossCheck(format!("masur-veech routes disagree: {e}"))
                })?;
                let float = ribbonrec_core::stablegraphs::pisq_poly_to_f64(&vol);
                println!("masur-veech volume: {vol} (~ {float:.9})");
            }
            Ok(())
        }
        Command::Fnflip {
            surface,
            l,
            ell,
            tau,
            hyperbolic,
            beta,
        } => {
            let lengths = parse_rat_list(&l)?;
            let ell = parse_rat(&ell)?;
            let tau = parse_rat(&tau)?;
            match surface.as_str() {
                "0,4" => {
                    if lengths.len() != 4 {
                        return Err(CliError::Domain(
                            "the four-holed sphere needs 4 lengths".into(),
                        ));
                    }
                    let p = FnPoint04 {
                        boundary: [
                            lengths[0].clone(),
                            lengths[1].clone(),
                            lengths[2].clone(),
                            lengths[3].clone(),
                        ],
                        ell,
                        tau,
                    };
                    let (lp, tp) = fnflip::comb_flip_04(&p).map_err(domain)?;
                    println!("ell' = {}", rat_to_string(&lp));
                    println!("tau' = {}", rat_to_string(&tp));
                    if hyperbolic {
                        let (hl, ht) = fnflip::hyp_flip_04(&p, beta).map_err(domain)?;
                        println!("hyperbolic at beta = {beta}: ell' = {hl:.12}, tau' = {ht:.12}");
                        println!(
                            "rescaled: ell'/beta = {:.12}, tau'/beta = {:.12}",
                            hl / beta as f64,
                            ht / beta as f64
                        );
                    }
                }
                "1,1" => {
                    if lengths.len() != 1 {
                        return Err(CliError::Domain(
                            "the one-holed torus needs 1 length".into(),
                        ));
                    }
                    let p = FnPoint11 {
                        boundary: lengths[0].clone(),
                        ell,
                        tau,
                    };
                    let (lp, tp) = fnflip::comb_flip_11(&p).map_err(domain)?;
                    println!("ell' = {}", rat_to_string(&lp));
                    println!("tau' = {}", rat_to_string(&tp));
                    if hyperbolic {
                        let (hl, ht) = fnflip::hyp_flip_11(&p, beta).map_err(domain)?;
                        println!("hyperbolic at beta = {beta}: ell' = {hl:.12}, tau' = {ht:.12}");
                        println!(
                            "rescaled: ell'/beta = {:.12}, tau'/beta = {:.12}",
                            hl / beta as f64,
                            ht / beta as f64
                        );
                    }
                }
                other => return Err(CliError::Domain(format!("unknown surface {other:?}"))),
            }
            Ok(())
        }
        Command::McAverage {
            surface,
            l,
            t,
            samples,
            seed,
        } => {
            let lengths = parse_rat_list(&l)?;
            let (g, n) = match surface.as_str() {
                "1,1" => (1, 1),
                "0,4" => (0, 4),
                other => return Err(CliError::Domain(format!("unsupported surface {other:?}"))),
            };
            let obs = match t {
                Some(t) => Observable::MulticurveCount(t),
                None => Observable::One,
            };
            let est = mc_average(g, n, &lengths, obs, samples, seed).map_err(domain)?;
            if est.exact {
                println!("{:.12} (closed form)", est.value);
            } else {
                println!(
                    "{:.6} +- {:.6} ({} samples)",
                    est.value, est.stderr, est.samples
                );
            }
            Ok(())
        }
        Command::Table1 { verify } => {
            if !verify {
                for (g, n) in table1::row_types() {
                    println!("({g},{n})");
                }
                return Ok(());
            }
            let rows = table1::verify_all().map_err(domain)?;
            let mut all = true;
            for r in &rows {
                let verdict = if r.pass { "PASS" } else { "FAIL" };
                println!("({},{}) {} [{:?}]", r.g, r.n, verdict, r.runtime);
                all &= r.pass;
            }
            if !all {
                return Err(CliError::CrossCheck("reference table mismatch".into()));
            }
            Ok(())
        }
    }
}
