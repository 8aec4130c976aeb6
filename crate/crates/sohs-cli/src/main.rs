//! Command-line front end: certify, extend, complete, and analyze
//! noncommutative sum-of-Hermitian-squares data from JSON documents.

use clap::{Parser, Subcommand, ValueEnum};
use sohs::completion::{
    is_chordal, maximal_cliques, sohs_complete, specification_graph, Chordality, CompletionError,
    PartialSymMatrix,
};
use sohs::extension::{
    block_extension, build_partial_extension, check_rc_conditions, verify_gmpe, ExtensionError,
    ExtensionProblem, RcConditions,
};
use sohs::gram::{candidate_monomials, fit_gram, sohs_witness, FitPolicy, GramLikeMatrix, MonomialVector};
use sohs::linalg::SymMatrix;
use sohs::regularity::{betti_table, subspace_arrangement_ideal, RegularityError};
use sohs::schema::RepresentationDoc;
use sohs::{Polynomial, Representation};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "sohs",
    about = "Sum-of-Hermitian-squares certificates for noncommutative polynomials",
    version
)]
struct Cli {
    /// Numeric tolerance for matrix and coefficient comparisons.
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = positive_f64)]
    tol: f64,

    /// Emit machine-readable JSON instead of text reports.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a representation document into its polynomial.
    Expand {
        /// JSON document with "monomials" and a fully specified "matrix".
        representation: PathBuf,
    },
    /// Check whether a document certifies a polynomial as a sum of
    /// Hermitian squares.
    VerifySohs {
        /// The polynomial, e.g. "x1^2 + x1 x2 + x2 x1 + 5".
        polynomial: String,
        representation: PathBuf,
    },
    /// Extend a certificate of the part h to a certificate of f plus a
    /// structured remainder.
    Extend {
        /// The target polynomial f.
        polynomial: String,
        /// The already-certified part h.
        part: String,
        /// Certificate document for h; fitted from h itself when omitted.
        certificate: Option<PathBuf>,
        /// Extension strategy: one bordered block or a completed diagonal.
        #[arg(long, value_enum, default_value_t = ModeArg::Block)]
        mode: ModeArg,
        /// Gram-fitting policy used when no certificate document is given.
        #[arg(long, value_enum, default_value_t = PolicyArg::Strict)]
        policy: PolicyArg,
        /// Diagonal slack added in diag mode.
        #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
        margin: f64,
    },
    /// Complete a partial representation document to a PSD certificate.
    Complete {
        representation: PathBuf,
    },
    /// Analyze the pattern of a partial matrix: graph, chordality,
    /// cliques, ideal, Betti table, regularity.
    Pattern {
        matrix: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Block,
    Diag,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Strict,
    Even,
    First,
}

impl From<PolicyArg> for FitPolicy {
    fn from(p: PolicyArg) -> FitPolicy {
        match p {
            PolicyArg::Strict => FitPolicy::Strict,
            PolicyArg::Even => FitPolicy::Even,
            PolicyArg::First => FitPolicy::First,
        }
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err("value must be a positive finite number".to_string())
    }
}

/// A command failure with its contract exit code: 2 malformed input,
/// 3 extension obstruction, 4 completion infeasible.
enum Failure {
    Input(String),
    Obstruction(String),
    Infeasible(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Obstruction(_) => 3,
            Failure::Infeasible(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Obstruction(m) | Failure::Infeasible(m) => m,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn extension_failure(e: ExtensionError) -> Failure {
    match e {
        ExtensionError::NotApplicable { .. }
        | ExtensionError::ColumnSpaceViolation
        | ExtensionError::HypothesisViolated { .. }
        | ExtensionError::VerificationFailed => Failure::Obstruction(e.to_string()),
        ExtensionError::CertificateMismatch
        | ExtensionError::CertificateNotPsd
        | ExtensionError::Gram(_) => Failure::Input(e.to_string()),
    }
}

fn completion_failure(e: CompletionError) -> Failure {
    match e {
        CompletionError::NotPartialPsd { .. } | CompletionError::CompletionFailed { .. } => {
            Failure::Infeasible(e.to_string())
        }
        other => Failure::Input(other.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Expand { representation } => cmd_expand(&cli, representation),
        Command::VerifySohs {
            polynomial,
            representation,
        } => cmd_verify_sohs(&cli, polynomial, representation),
        Command::Extend {
            polynomial,
            part,
            certificate,
            mode,
            policy,
            margin,
        } => cmd_extend(
            &cli,
            polynomial,
            part,
            certificate.as_deref(),
            *mode,
            (*policy).into(),
            *margin,
        ),
        Command::Complete { representation } => cmd_complete(&cli, representation),
        Command::Pattern { matrix } => cmd_pattern(&cli, matrix),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load_doc(path: &Path) -> Result<RepresentationDoc, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    RepresentationDoc::parse(&text).map_err(input)
}

fn parse_poly(text: &str) -> Result<Polynomial, Failure> {
    text.parse::<Polynomial>()
        .map_err(|e| Failure::Input(format!("cannot parse polynomial `{text}`: {e}")))
}

fn poly_terms_json(p: &Polynomial) -> serde_json::Value {
    serde_json::Value::Array(
        p.terms()
            .map(|(w, c)| {
                serde_json::json!({"monomial": w.to_string(), "coefficient": c})
            })
            .collect(),
    )
}

fn format_entry(v: f64) -> String {
    if v == v.round() && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v}")
    }
}

fn print_matrix_grid(m: &SymMatrix) {
    let k = m.order();
    let cells: Vec<Vec<String>> = (0..k)
        .map(|i| (0..k).map(|j| format_entry(m.get(i, j))).collect())
        .collect();
    let mut widths = vec![0usize; k];
    for row in &cells {
        for (j, cell) in row.iter().enumerate() {
            widths[j] = widths[j].max(cell.len());
        }
    }
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(j, cell)| format!("{cell:>w$}", w = widths[j]))
            .collect();
        println!("  [ {} ]", line.join("  "));
    }
}

fn print_certificate(r: &Representation) {
    let names: Vec<String> = r.monomials().words().iter().map(|w| w.to_string()).collect();
    println!("monomials: ({})", names.join(", "));
    println!("matrix:");
    print_matrix_grid(r.matrix());
}

fn cmd_expand(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let r = load_doc(path)?.to_representation().map_err(input)?;
    let f = r.expand();
    if cli.json {
        let out = serde_json::json!({
            "polynomial": f.to_string(),
            "terms": poly_terms_json(&f),
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("{f}");
    }
    Ok(())
}

fn cmd_verify_sohs(cli: &Cli, poly: &str, path: &Path) -> Result<(), Failure> {
    let f = parse_poly(poly)?;
    let r = load_doc(path)?.to_representation().map_err(input)?;
    let equal = r.expand().approx_eq(&f, cli.tol);
    let psd = r.matrix().is_psd(cli.tol);
    let witness = if equal && psd {
        Some(sohs_witness(&r, cli.tol).map_err(input)?)
    } else {
        None
    };
    if cli.json {
        let out = serde_json::json!({
            "equal": equal,
            "psd": psd,
            "valid": equal && psd,
            "witness": witness.as_ref().map(|ws| {
                ws.iter().map(|g| g.to_string()).collect::<Vec<_>>()
            }),
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("expansion matches: {}", if equal { "yes" } else { "no" });
        println!("matrix PSD: {}", if psd { "yes" } else { "no" });
        match &witness {
            Some(ws) => {
                let unit = if ws.len() == 1 { "square" } else { "squares" };
                println!("certificate: valid ({} {unit})", ws.len());
                for g in ws {
                    println!("  square of: {g}");
                }
            }
            None => println!("certificate: invalid"),
        }
    }
    Ok(())
}

fn load_or_fit_certificate(
    path: Option<&Path>,
    h: &Polynomial,
    policy: FitPolicy,
) -> Result<GramLikeMatrix, Failure> {
    let rep = match path {
        Some(p) => load_doc(p)?.to_representation().map_err(input)?,
        None => prune_zero_rows(fit_gram(h, &candidate_monomials(h), policy).map_err(input)?)?,
    };
    GramLikeMatrix::new(rep).map_err(input)
}

/// Drops monomials whose entire Gram row is zero: they contribute nothing
/// to the expansion but would fail the positive-diagonal requirement.
fn prune_zero_rows(r: Representation) -> Result<Representation, Failure> {
    let k = r.order();
    let keep: Vec<usize> = (0..k)
        .filter(|&i| (0..k).any(|j| r.matrix().get(i, j) != 0.0))
        .collect();
    if keep.len() == k {
        return Ok(r);
    }
    let words = keep
        .iter()
        .map(|&i| r.monomials().words()[i].clone())
        .collect();
    let m = SymMatrix::from_fn(keep.len(), |a, b| r.matrix().get(keep[a], keep[b]));
    Representation::new(MonomialVector::new(words).map_err(input)?, m).map_err(input)
}

fn report_extension(
    cli: &Cli,
    f: &Polynomial,
    f_tilde: &Polynomial,
    r_ft: &GramLikeMatrix,
    verified: bool,
) {
    let added = f_tilde - f;
    if cli.json {
        let doc = RepresentationDoc::from_representation(r_ft.representation());
        let out = serde_json::json!({
            "f_tilde": f_tilde.to_string(),
            "added": poly_terms_json(&added),
            "certificate": serde_json::to_value(&doc).unwrap(),
            "verified": verified,
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("f~ = {f_tilde}");
        println!("added part: {added}");
        print_certificate(r_ft.representation());
        println!("verified: {}", if verified { "yes" } else { "no" });
    }
}

fn cmd_extend(
    cli: &Cli,
    poly: &str,
    part: &str,
    certificate: Option<&Path>,
    mode: ModeArg,
    policy: FitPolicy,
    margin: f64,
) -> Result<(), Failure> {
    let f = parse_poly(poly)?;
    let h = parse_poly(part)?;
    let r_h = load_or_fit_certificate(certificate, &h, policy)?;
    let (f_tilde, r_ft) = match mode {
        ModeArg::Block => {
            if let Ok(problem) = ExtensionProblem::new(f.clone(), h.clone(), r_h.clone(), cli.tol)
            {
                if let RcConditions::Obstructed(words) = check_rc_conditions(&problem) {
                    let names: Vec<String> = words.iter().map(|w| w.to_string()).collect();
                    return Err(Failure::Obstruction(format!(
                        "right-chip conditions obstructed: no admissible split for {}",
                        names.join(", ")
                    )));
                }
            }
            block_extension(&f, &h, &r_h, cli.tol).map_err(extension_failure)?
        }
        ModeArg::Diag => {
            let problem = ExtensionProblem::new(f.clone(), h.clone(), r_h.clone(), cli.tol)
                .map_err(extension_failure)?;
            let partial = build_partial_extension(&problem, cli.tol).map_err(extension_failure)?;
            let full = partial
                .complete_diagonal(margin, cli.tol)
                .map_err(extension_failure)?;
            let rep = Representation::new(partial.monomials().clone(), full).map_err(input)?;
            let gram = GramLikeMatrix::new(rep).map_err(input)?;
            (gram.expand(), gram)
        }
    };
    let verified = verify_gmpe(&f_tilde, &f, &h, &r_h, &r_ft, cli.tol);
    report_extension(cli, &f, &f_tilde, &r_ft, verified);
    Ok(())
}

fn cmd_complete(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let doc = load_doc(path)?;
    let pr = doc.to_partial_representation().map_err(input)?;
    let holes = pr.pmatrix().unspecified_pairs();
    let (f_bar, cert) = sohs_complete(&pr, cli.tol).map_err(completion_failure)?;
    if cli.json {
        let cert_doc = RepresentationDoc::from_representation(cert.representation());
        let filled: Vec<serde_json::Value> = holes
            .iter()
            .map(|&(i, j)| serde_json::json!([i, j, cert.matrix().get(i, j)]))
            .collect();
        let out = serde_json::json!({
            "f_bar": f_bar.to_string(),
            "filled": filled,
            "certificate": serde_json::to_value(&cert_doc).unwrap(),
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("f- = {f_bar}");
        if holes.is_empty() {
            println!("no unspecified entries; matrix echoed unchanged");
        } else {
            for &(i, j) in &holes {
                println!(
                    "filled ({i}, {j}) = {}",
                    format_entry(cert.matrix().get(i, j))
                );
            }
        }
        print_certificate(cert.representation());
    }
    Ok(())
}

fn regularity_failure(e: RegularityError) -> Failure {
    Failure::Input(e.to_string())
}

fn cmd_pattern(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let p: PartialSymMatrix = load_doc(path)?.to_partial_matrix().map_err(input)?;
    let graph = specification_graph(&p);
    let verdict = is_chordal(&graph);
    let cliques = maximal_cliques(&graph);
    let ideal = subspace_arrangement_ideal(&p);
    let betti = betti_table(&ideal).map_err(regularity_failure)?;
    let reg = betti.regularity();
    let two_regular = verdict.is_chordal();
    if cli.json {
        let (elimination_order, chordless_cycle) = match &verdict {
            Chordality::Chordal(order) => (Some(order.clone()), None),
            Chordality::NotChordal(cycle) => (None, Some(cycle.clone())),
        };
        let out = serde_json::json!({
            "order": p.order(),
            "specified_pairs": graph.edges(),
            "chordal": verdict.is_chordal(),
            "elimination_order": elimination_order,
            "chordless_cycle": chordless_cycle,
            "maximal_cliques": cliques,
            "ideal_generators": ideal.generators().collect::<Vec<_>>(),
            "betti": betti.entries().map(|((i, j), b)| {
                serde_json::json!({"i": i, "j": j, "value": b})
            }).collect::<Vec<_>>(),
            "betti_totals": betti.totals(),
            "regularity": reg,
            "two_regular": two_regular,
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("order: {}", p.order());
        let edges = graph.edges();
        let shown: Vec<String> = edges.iter().map(|&(i, j)| format!("{i}-{j}")).collect();
        println!("specified pairs: {}", if shown.is_empty() { "none".to_string() } else { shown.join(", ") });
        match &verdict {
            Chordality::Chordal(order) => {
                println!("chordal: yes (elimination order {order:?})");
            }
            Chordality::NotChordal(cycle) => {
                println!("chordal: no (chordless cycle {cycle:?})");
            }
        }
        let clique_strs: Vec<String> = cliques.iter().map(|c| format!("{c:?}")).collect();
        println!("maximal cliques: {}", clique_strs.join(" "));
        let gens: Vec<String> = ideal
            .generators()
            .map(|(a, b)| format!("x{a} x{b}"))
            .collect();
        println!(
            "ideal generators: {}",
            if gens.is_empty() { "none".to_string() } else { gens.join(", ") }
        );
        if betti.is_empty() {
            println!("betti table: empty (zero ideal)");
        } else {
            println!("betti table:");
            for line in betti.to_string().lines() {
                println!("  {line}");
            }
        }
        println!("regularity: {reg}");
        println!("2-regular: {}", if two_regular { "yes" } else { "no" });
    }
    Ok(())
}
