mod args;
mod report;

use std::cmp::Ordering;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use linform::harness::{self, construct, Fixture, LocalSource};
use linform::intset::{image_cardinality, image_cardinality_with, image_with, io};
use linform::modular::{local_ratio_search, BuildOptions, ResidueSet, SearchBudget, StopRule};
use linform::small_sets::{
    ap_equality_set, classify_triples, conjugate_four_set_witness, default_triple_bound,
    five_set_witness, predicted_exceptional_triples, three_set_witness,
};
use linform::{Error, FiniteIntSet, LinearForm};

use args::{Cli, Command, SetSource, SourceKind, StopArg, WitnessKind};
use report::{set_value, CommandResult, Status};

/// Usage and input errors exit with 2; everything else that goes wrong is a
/// domain failure and exits with 1.
enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::InvalidInput(_) | Error::Io(_) | Error::NotCoprime(..) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Run = Result<CommandResult, Failure>;

fn load_set(src: &SetSource) -> Result<FiniteIntSet, Failure> {
    let a = match (&src.path, &src.inline) {
        (Some(path), _) => io::read_set(path)?,
        (None, Some(list)) => io::parse_inline(list)?,
        (None, None) => return Err(Failure::Usage("give a set with -A or --inline".into())),
    };
    if a.is_empty() {
        return Err(Failure::Usage("the set is empty".into()));
    }
    Ok(a)
}

fn load_locals(path: &Path) -> Result<Vec<ResidueSet>, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())));
    }
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.parse::<ResidueSet>().map_err(Failure::from))
        .collect()
}

fn cmd_image(cli: &Cli, a: &args::ImageArgs) -> Run {
    let set = load_set(&a.set)?;
    let mut r = CommandResult::new("image", a);
    r.put("form", a.f.to_string());
    r.put("set_size", set.len());
    if a.print_image {
        let img = image_with(&a.f, &set, a.strategy)?;
        r.put("cardinality", img.len());
        r.put("image", set_value(&img, &cli.out_dir, "image")?);
    } else {
        r.put(
            "cardinality",
            image_cardinality_with(&a.f, &set, a.strategy)?,
        );
    }
    Ok(r)
}

fn cmd_compare(a: &args::CompareArgs) -> Run {
    let set = load_set(&a.set)?;
    let fa = image_cardinality(&a.f, &set)?;
    let ga = image_cardinality(&a.g, &set)?;
    let mut r = CommandResult::new("compare", a);
    r.put("f_card", fa);
    r.put("g_card", ga);
    r.put(
        "ordering",
        match fa.cmp(&ga) {
            Ordering::Less => "less",
            Ordering::Equal => "equal",
            Ordering::Greater => "greater",
        },
    );
    Ok(r)
}

fn cmd_classify3(a: &args::Classify3Args) -> Run {
    let f = LinearForm::binary(a.u, a.v)?;
    let bound = match a.bound {
        Some(b) => b,
        None => default_triple_bound(&f)?,
    };
    let found = classify_triples(&f, bound)?;
    let mut r = CommandResult::new("classify3", a);
    r.put("form", f.to_string());
    r.put("bound", bound);
    r.put("exceptional", &found.exceptional);
    if a.u >= 2 {
        let predicted = predicted_exceptional_triples(&f)?;
        let matches = predicted == found.exceptional;
        r.put("matches_classification", matches);
        if !matches {
            r.fail("enumeration differs from the predicted classification");
        }
    }
    Ok(r)
}

fn cmd_witness(kind: &WitnessKind) -> Run {
    let mut r = CommandResult::new("witness", kind);
    match kind {
        WitnessKind::Three { f, g } => {
            let w = three_set_witness(f, g)?;
            r.put("witness", &w);
        }
        WitnessKind::Four { u, v } => r.put("witness", conjugate_four_set_witness(*u, *v)?),
        WitnessKind::Five { u, v } => r.put("witness", five_set_witness(*u, *v)?),
        WitnessKind::Ap { u, v, t } => {
            let set = ap_equality_set(*u, *v, *t)?;
            r.put("set", io::to_json_value(&set));
            r.put("cardinality", t * t);
        }
    }
    Ok(r)
}

fn cmd_local_search(a: &args::LocalSearchArgs) -> Run {
    let budget = SearchBudget {
        moves: a.moves,
        seed: a.seed,
        restarts: a.restarts,
    };
    let sol = local_ratio_search(&a.f, &a.g, a.m, &budget)?;
    let mut r = CommandResult::new("local-search", a);
    r.put("residues", sol.residues.to_string());
    r.put("f_card", sol.f_card);
    r.put("g_card", sol.g_card);
    r.put("ratio", sol.ratio().to_string());
    if sol.f_card >= sol.g_card {
        r.fail("no residue set with |f(R)| < |g(R)| found");
    }
    Ok(r)
}

fn cmd_construct(cli: &Cli, a: &args::ConstructArgs) -> Run {
    let source = match a.source {
        SourceKind::Qr => LocalSource::Qr,
        SourceKind::Kpower => LocalSource::Kpower,
        SourceKind::File => {
            let path = a
                .locals
                .as_ref()
                .ok_or_else(|| Failure::Usage("--source file needs --locals".into()))?;
            LocalSource::Given(load_locals(path)?)
        }
    };
    let stop = a.stop.unwrap_or(if a.source == SourceKind::File {
        StopArg::Direct
    } else {
        StopArg::Threshold
    });
    let options = BuildOptions {
        stop: StopRule::from(stop),
        window_start: a.window,
        materialize_cap: a.materialize_cap,
        ..BuildOptions::default()
    };
    let run = construct(&a.f, &a.g, &source, a.count, &options)?;
    let rep = &run.report;
    let mut r = CommandResult::new("construct", a);
    r.put("outcome", rep.outcome);
    r.put("moduli", rep.moduli());
    r.put("combined_modulus", rep.combined_modulus.to_string());
    r.put("set_size", rep.set_size.to_string());
    if let (Some(f), Some(g)) = (rep.f_card, rep.g_card) {
        r.put("f_card", f);
        r.put("g_card", g);
    }
    r.put("ratio_product", rep.ratio_product.to_string());
    r.put("target_threshold", rep.target_threshold.to_string());
    r.put("shortfall", run.shortfall);
    if cli.json {
        r.put("report", &run);
    }
    if let (true, Some(set)) = (a.emit_set, &rep.set) {
        r.put("set", set_value(set, &cli.out_dir, "construct-set")?);
    }
    if !rep.is_success() {
        let mut reason = format!("outcome {:?}", rep.outcome).to_lowercase();
        if run.shortfall > 0 {
            reason.push_str(&format!(
                ", {} of {} primes not found",
                run.shortfall, run.requested
            ));
        }
        r.fail(reason);
    }
    Ok(r)
}

fn cmd_verify(a: &args::VerifyArgs) -> Run {
    let fixture = match &a.fixture {
        Some(path) => Fixture::with_four_moduli_json(&fs::read_to_string(path)?)?,
        None => Fixture::default(),
    };
    let results = harness::run(&fixture, &a.only)?;
    let mut r = CommandResult::new("verify-paper", a);
    let lines: Vec<String> = results.iter().map(|c| c.line()).collect();
    let failed: Vec<String> = results
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.name.clone())
        .collect();
    r.put("passed", results.len() - failed.len());
    r.put("total", results.len());
    r.put("checks", &results);
    if !failed.is_empty() {
        r.fail(format!("failed: {}", failed.join(", ")));
    }
    r.outputs.insert("table".into(), lines.join("\n").into());
    Ok(r)
}

fn render(cli: &Cli, r: &CommandResult) -> String {
    if cli.json {
        return serde_json::to_string_pretty(r).expect("results serialize") + "\n";
    }
    if r.command == "verify-paper" {
        // the table already says everything the structured checks would
        let mut shown = r.clone();
        shown.outputs.remove("checks");
        if let Some(serde_json::Value::String(t)) = shown.outputs.remove("table") {
            return t + "\n" + &shown.to_text();
        }
    }
    r.to_text()
}

fn dispatch(cli: &Cli) -> Run {
    match &cli.command {
        Command::Image(a) => cmd_image(cli, a),
        Command::Compare(a) => cmd_compare(a),
        Command::Classify3(a) => cmd_classify3(a),
        Command::Witness(k) => cmd_witness(k),
        Command::LocalSearch(a) => cmd_local_search(a),
        Command::Construct(a) => cmd_construct(cli, a),
        Command::VerifyPaper(a) => cmd_verify(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(r) => {
            print!("{}", render(&cli, &r));
            if r.status == Status::Success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
