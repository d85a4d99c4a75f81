//! Command-line surface for the twisted connected sum pipeline: catalog
//! inspection, building-block derivation, gluing search, invariants,
//! regression against the pinned reference table, and classification.
//!
//! Machine output is JSON with a stable key order; the human rendering
//! prints the same object. Two runs on identical inputs produce identical
//! bytes. Exit codes: 0 success, 1 I/O or usage errors, 2 validation
//! failures, 3 reference-table mismatch.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::process::ExitCode;
use tcs_core::blocks::{derive_block, parse_catalog, validate_catalog, SemiFanoFamily};
use tcs_core::invariants::{compute_invariants, xi_tcs_randomized, TcsInvariants};
use tcs_core::mat::IntMat;
use tcs_core::matching::{assemble_configuration, search_gluings, Configuration};
use tcs_core::report::{
    self, config_view, genericity_reports, BlockView, ClassifyView, ConfigView, InvariantsView,
};

#[derive(Parser)]
#[command(
    name = "tcs",
    version,
    about = "invariants of twisted connected sums",
    disable_help_subcommand = true
)]
struct Cli {
    /// Catalog file; the built-in catalog is used when omitted
    #[arg(long, global = true)]
    catalog: Option<std::path::PathBuf>,
    /// Emit the report as JSON instead of the human rendering
    #[arg(long, global = true)]
    json: bool,
    /// Seed for re-randomized internal choices (the result must not change)
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect or validate a semi-Fano catalog
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Derive building-block data from a catalog family
    Block {
        #[command(subcommand)]
        action: BlockAction,
    },
    /// Search for gluing configurations of a pair of families
    Match {
        #[command(subcommand)]
        action: MatchAction,
    },
    /// Compute the invariants of a configuration file
    Invariants(InvariantsArgs),
    /// Recompute the pinned reference configurations and diff every cell
    ReproduceTable,
    /// Group configuration files by diffeomorphism data and compare xi
    Classify(ClassifyArgs),
}

#[derive(Subcommand)]
enum CatalogAction {
    /// List the families in the catalog
    List,
    /// Pretty-print one family record
    Show { id: String },
    /// Check every record invariant; exit 2 on failure
    Validate,
}

#[derive(Subcommand)]
enum BlockAction {
    /// Derive the building-block profile of a family
    Derive { id: String },
}

#[derive(Subcommand)]
enum MatchAction {
    /// Enumerate gluing blocks D with |D_ij| <= bound
    Search {
        plus: String,
        minus: String,
        #[arg(long, default_value_t = 3)]
        bound: i64,
    },
}

#[derive(Args)]
struct InvariantsArgs {
    /// JSON file {"plus": id, "minus": id, "D": [[..], ..]}
    #[arg(long)]
    config: std::path::PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Configuration files to compare
    #[arg(long, num_args = 1.., required = true)]
    configs: Vec<std::path::PathBuf>,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    plus: String,
    minus: String,
    #[serde(rename = "D")]
    d: Vec<Vec<i64>>,
}

#[derive(Serialize)]
struct Inputs {
    catalog: String,
    catalog_sha256: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    config_files: Vec<FileDigest>,
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

/// Envelope shared by every command: the command echo, input digests, the
/// payload, and any warnings. `timestamp` stays unset so identical inputs
/// produce identical bytes.
#[derive(Serialize)]
struct RunReport<T: Serialize> {
    command: String,
    inputs: Inputs,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<String>,
    report: T,
    warnings: Vec<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

enum Failure {
    Usage(String),
    Validation(Vec<String>),
}

impl Failure {
    fn exit(&self) -> ExitCode {
        match self {
            Failure::Usage(_) => ExitCode::from(1),
            Failure::Validation(_) => ExitCode::from(2),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version displays are not errors
            use clap::error::ErrorKind::{DisplayHelp, DisplayVersion};
            let _ = e.print();
            return match e.kind() {
                DisplayHelp | DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(f) => {
            match &f {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Validation(errs) => {
                    for e in errs {
                        eprintln!("validation: {e}");
                    }
                }
            }
            f.exit()
        }
    }
}

struct LoadedCatalog {
    families: Vec<SemiFanoFamily>,
    source: String,
    sha256: String,
    warnings: Vec<String>,
}

fn load_catalog_input(cli: &Cli) -> Result<LoadedCatalog, Failure> {
    let (text, source) = match &cli.catalog {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            (text, path.display().to_string())
        }
        None => (report::SHIPPED_CATALOG_JSON.to_string(), "builtin".to_string()),
    };
    let sha256 = sha256_hex(text.as_bytes());
    let (families, empty_warning) =
        parse_catalog(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut warnings = Vec::new();
    if empty_warning {
        warnings.push("catalog file is empty; no families loaded".to_string());
    }
    Ok(LoadedCatalog { families, source, sha256, warnings })
}

fn validated_catalog(cli: &Cli) -> Result<LoadedCatalog, Failure> {
    let loaded = load_catalog_input(cli)?;
    let errors = validate_catalog(&loaded.families);
    if errors.is_empty() {
        Ok(loaded)
    } else {
        Err(Failure::Validation(errors))
    }
}

fn family<'a>(cat: &'a LoadedCatalog, id: &str) -> Result<&'a SemiFanoFamily, Failure> {
    cat.families
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| Failure::Usage(format!("family {id} not found in catalog {}", cat.source)))
}

fn read_config_file(
    cat: &LoadedCatalog,
    path: &std::path::Path,
) -> Result<(Configuration, FileDigest), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let digest =
        FileDigest { path: path.display().to_string(), sha256: sha256_hex(text.as_bytes()) };
    let parsed: ConfigFile = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let zp = derive_block(family(cat, &parsed.plus)?);
    let zm = derive_block(family(cat, &parsed.minus)?);
    let cfg = assemble_configuration(zp, zm, IntMat::from_rows(&parsed.d))
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok((cfg, digest))
}

fn emit<T: Serialize>(cli: &Cli, report: RunReport<T>, render: impl Fn(&T)) {
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        render(&report.report);
        for w in &report.warnings {
            println!("warning: {w}");
        }
    }
}

fn envelope<T: Serialize>(
    command: String,
    cat: &LoadedCatalog,
    config_files: Vec<FileDigest>,
    report: T,
    mut warnings: Vec<String>,
) -> RunReport<T> {
    let mut all_warnings = cat.warnings.clone();
    all_warnings.append(&mut warnings);
    RunReport {
        command,
        inputs: Inputs {
            catalog: cat.source.clone(),
            catalog_sha256: cat.sha256.clone(),
            config_files,
        },
        timestamp: None,
        report,
        warnings: all_warnings,
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    match &cli.command {
        Command::Catalog { action } => run_catalog(cli, action),
        Command::Block { action } => run_block(cli, action),
        Command::Match { action } => run_match(cli, action),
        Command::Invariants(args) => run_invariants(cli, args),
        Command::ReproduceTable => run_reproduce(cli),
        Command::Classify(args) => run_classify(cli, args),
    }
}

#[derive(Serialize)]
struct CatalogListing {
    count: usize,
    families: Vec<CatalogLine>,
}

#[derive(Serialize)]
struct CatalogLine {
    id: String,
    name: String,
    rank: usize,
    degree: i64,
    genus: i64,
}

fn run_catalog(cli: &Cli, action: &CatalogAction) -> Result<ExitCode, Failure> {
    match action {
        CatalogAction::List => {
            let cat = validated_catalog(cli)?;
            let listing = CatalogListing {
                count: cat.families.len(),
                families: cat
                    .families
                    .iter()
                    .map(|f| CatalogLine {
                        id: f.id.clone(),
                        name: f.name.clone(),
                        rank: f.rank(),
                        degree: i64::try_from(&f.degree()).unwrap_or(i64::MAX),
                        genus: i64::try_from(&f.genus()).unwrap_or(i64::MAX),
                    })
                    .collect(),
            };
            let rep = envelope("catalog list".into(), &cat, vec![], listing, vec![]);
            emit(cli, rep, |l| {
                for f in &l.families {
                    println!(
                        "{}  rank {}  degree {}  genus {}  {}",
                        f.id, f.rank, f.degree, f.genus, f.name
                    );
                }
            });
            Ok(ExitCode::SUCCESS)
        }
        CatalogAction::Show { id } => {
            let cat = validated_catalog(cli)?;
            let f = family(&cat, id)?.clone();
            let rep = envelope(format!("catalog show {id}"), &cat, vec![], f, vec![]);
            emit(cli, rep, |f| {
                println!("{}", serde_json::to_string_pretty(f).expect("serializable"));
            });
            Ok(ExitCode::SUCCESS)
        }
        CatalogAction::Validate => {
            let cat = load_catalog_input(cli)?;
            let errors = validate_catalog(&cat.families);
            #[derive(Serialize)]
            struct ValidationView {
                valid: bool,
                checked: usize,
                errors: Vec<String>,
            }
            let view = ValidationView {
                valid: errors.is_empty(),
                checked: cat.families.len(),
                errors: errors.clone(),
            };
            let rep = envelope("catalog validate".into(), &cat, vec![], view, vec![]);
            emit(cli, rep, |v| {
                if v.valid {
                    println!("catalog OK: {} records", v.checked);
                } else {
                    for e in &v.errors {
                        println!("invalid: {e}");
                    }
                }
            });
            if errors.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
    }
}

fn run_block(cli: &Cli, action: &BlockAction) -> Result<ExitCode, Failure> {
    let BlockAction::Derive { id } = action;
    let cat = validated_catalog(cli)?;
    let block = derive_block(family(&cat, id)?);
    let view = BlockView::from(&block);
    let rep = envelope(format!("block derive {id}"), &cat, vec![], view, vec![]);
    emit(cli, rep, |b| {
        println!("{}", serde_json::to_string_pretty(b).expect("serializable"));
    });
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SearchView {
    plus: String,
    minus: String,
    bound: i64,
    completeness: String,
    hits: Vec<ConfigView>,
}

fn run_match(cli: &Cli, action: &MatchAction) -> Result<ExitCode, Failure> {
    let MatchAction::Search { plus, minus, bound } = action;
    if *bound < 0 {
        return Err(Failure::Usage("--bound must be nonnegative".into()));
    }
    let cat = validated_catalog(cli)?;
    let zp = derive_block(family(&cat, plus)?);
    let zm = derive_block(family(&cat, minus)?);
    let hits = search_gluings(&zp, &zm, *bound);
    let view = SearchView {
        plus: plus.clone(),
        minus: minus.clone(),
        bound: *bound,
        completeness: format!(
            "complete over gluing blocks with entries bounded by {bound} in absolute value; \
             solutions outside this box are not reported"
        ),
        hits: hits.iter().map(config_view).collect(),
    };
    let rep = envelope(
        format!("match search {plus} {minus} --bound {bound}"),
        &cat,
        vec![],
        view,
        vec![],
    );
    emit(cli, rep, |v| {
        println!("{} hits for ({}, {}) at bound {}", v.hits.len(), v.plus, v.minus, v.bound);
        for h in &v.hits {
            println!("  D = {:?}  kind = {:?}", h.d, h.kind);
        }
        println!("note: {}", v.completeness);
    });
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct InvariantsReport {
    config: ConfigView,
    invariants: InvariantsView,
    genericity: Vec<tcs_core::matching::GenericityReport>,
    genericity_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed_check: Option<String>,
}

fn invariants_with_reports(
    cfg: &Configuration,
    seed: Option<u64>,
) -> Result<(TcsInvariants, InvariantsReport, Vec<String>), Failure> {
    let inv = compute_invariants(cfg, None).map_err(|e| Failure::Usage(e.to_string()))?;
    let (gp, gm) = genericity_reports(cfg);
    let mut warnings: Vec<String> = gp.notes.iter().chain(gm.notes.iter()).cloned().collect();
    if !gp.passed || !gm.passed {
        warnings.push(
            "genericity checklist did not pass on both sides; the configuration is not \
             certified to come from a matching"
                .into(),
        );
    }
    let seed_check = match seed {
        Some(s) => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(s);
            let redo = xi_tcs_randomized(cfg, &inv.m, &mut rng)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            assert_eq!(redo, inv.xi, "xi must be independent of internal choices");
            Some(format!("xi recomputed with randomized choices (seed {s}): unchanged"))
        }
        None => None,
    };
    let genericity = vec![gp, gm];
    let digest =
        sha256_hex(serde_json::to_string(&genericity).expect("serializable").as_bytes());
    let report = InvariantsReport {
        config: config_view(cfg),
        invariants: InvariantsView::from(&inv),
        genericity,
        genericity_digest: digest,
        seed_check,
    };
    Ok((inv, report, warnings))
}

fn run_invariants(cli: &Cli, args: &InvariantsArgs) -> Result<ExitCode, Failure> {
    let cat = validated_catalog(cli)?;
    let (cfg, digest) = read_config_file(&cat, &args.config)?;
    let (_, report, warnings) = invariants_with_reports(&cfg, cli.seed)?;
    let rep = envelope(
        format!("invariants --config {}", args.config.display()),
        &cat,
        vec![digest],
        report,
        warnings,
    );
    emit(cli, rep, |r| {
        let inv = &r.invariants;
        println!(
            "({}, {}): b2 = {}, b3 = {}, torsion-free = {}",
            r.config.plus, r.config.minus, inv.b2, inv.b3, inv.torsion_free
        );
        println!(
            "m = {} (m~ = {}, m^ = {}), chi(W) = {}, sigma(W) = {}",
            inv.m, inv.m_tilde, inv.m_hat, inv.chi_w, inv.sigma_w
        );
        println!("nu = {} (mod {})", inv.nu.value, inv.nu.modulus);
        println!("xi = {} (mod {})", inv.xi.value, inv.xi.modulus);
        if inv.mu.vacuous {
            println!("mu vacuous (modulus 1)");
        } else {
            println!("mu = {} (mod {})", inv.mu.value, inv.mu.modulus);
        }
        for g in &r.genericity {
            println!(
                "genericity {} [{}]: {}",
                g.side,
                g.family_id,
                if g.passed { "PASS" } else { "FAIL" }
            );
        }
        if let Some(s) = &r.seed_check {
            println!("{s}");
        }
    });
    Ok(ExitCode::SUCCESS)
}

fn run_reproduce(cli: &Cli) -> Result<ExitCode, Failure> {
    let cat = validated_catalog(cli)?;
    let table = tcs_core::report::reproduce_table(&cat.families)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let ok = table.all_match;
    let rep = envelope("reproduce-table".into(), &cat, vec![], table, vec![]);
    emit(cli, rep, |t| {
        for c in &t.cells {
            let mark = if c.matches { "ok  " } else { "FAIL" };
            println!(
                "{mark} row {} {:<8} expected {} computed {}",
                c.row, c.cell, c.expected, c.computed
            );
        }
        for w in &t.warnings {
            println!("note: {w}");
        }
        println!("{}", if t.all_match { "all cells match" } else { "MISMATCH" });
    });
    if ok {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}

fn run_classify(cli: &Cli, args: &ClassifyArgs) -> Result<ExitCode, Failure> {
    let cat = validated_catalog(cli)?;
    let mut digests = Vec::new();
    let mut items = Vec::new();
    let mut warnings = Vec::new();
    for path in &args.configs {
        let (cfg, digest) = read_config_file(&cat, path)?;
        let label = format!(
            "{}[{}+{}]",
            path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            cfg.plus.family_id,
            cfg.minus.family_id
        );
        let inv = compute_invariants(&cfg, None).map_err(|e| Failure::Usage(e.to_string()))?;
        digests.push(digest);
        items.push((label, inv));
    }
    let groups =
        tcs_core::invariants::classify(&items).map_err(|e| Failure::Usage(e.to_string()))?;
    // surface the known prose-vs-table discrepancy when the affected class shows up
    let mut notes = Vec::new();
    for (_, inv) in &items {
        let v = InvariantsView::from(inv);
        if v.b3 == 71 && v.m == 6 && v.xi.value == 24 {
            notes.push(report::XI_ROW2_NOTE.to_string());
            break;
        }
    }
    warnings.extend(notes.iter().cloned());
    let view = ClassifyView { groups, notes };
    let rep = envelope(
        format!(
            "classify --configs {}",
            args.configs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(" ")
        ),
        &cat,
        digests,
        view,
        warnings,
    );
    emit(cli, rep, |v| {
        for g in &v.groups {
            let mu = g.mu.map(|m| m.to_string()).unwrap_or_else(|| "vacuous".into());
            println!("group (b3 = {}, m = {}, mu = {}): {}", g.b3, g.m, mu, g.members.join(", "));
            for p in &g.pairs {
                let verdict = match p.verdict {
                    tcs_core::invariants::PairVerdict::DistinctStructures => {
                        "diffeomorphic underlying manifolds, non-homotopic G2-structures"
                    }
                    tcs_core::invariants::PairVerdict::OrientationInconclusive => {
                        "inconclusive (orientation-reversal)"
                    }
                    tcs_core::invariants::PairVerdict::Indistinguishable => {
                        "indistinguishable by (nu, xi)"
                    }
                };
                println!("  {} vs {}: {}", p.first, p.second, verdict);
            }
        }
        for n in &v.notes {
            println!("note: {n}");
        }
    });
    Ok(ExitCode::SUCCESS)
}
