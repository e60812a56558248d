use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use linform::intset::Strategy;
use linform::modular::StopRule;
use linform::LinearForm;
use serde::Serialize;

fn parse_form(s: &str) -> Result<LinearForm, String> {
    s.parse::<LinearForm>().map_err(|e| e.to_string())
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse::<Strategy>().map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "linform",
    version,
    about = "Image sizes of integer linear forms on finite sets"
)]
pub struct Cli {
    /// Print the result as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "LINFORM_THREADS")]
    pub threads: Option<usize>,
    /// Directory for sets too large to print inline.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// |f(A)| for one form.
    Image(ImageArgs),
    /// |f(A)| against |g(A)|.
    Compare(CompareArgs),
    /// Exceptional 3-element sets of a normalized binary form.
    Classify3(Classify3Args),
    /// Explicit separating sets.
    #[command(subcommand)]
    Witness(WitnessKind),
    /// Search Z/mZ for a residue set with small |f(R)| and g(R) = Z/mZ.
    LocalSearch(LocalSearchArgs),
    /// Combine local solutions into an integer set with |f(A)| < |g(A)|.
    Construct(ConstructArgs),
    /// Run the reproduction checks.
    VerifyPaper(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct SetSource {
    /// Set file: one integer per line, or a JSON array.
    #[arg(short = 'A', long = "set")]
    pub path: Option<PathBuf>,
    /// Inline list such as 0,1,2.
    #[arg(long, allow_hyphen_values = true)]
    pub inline: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct ImageArgs {
    #[arg(short, long = "form", value_parser = parse_form, allow_hyphen_values = true)]
    pub f: LinearForm,
    #[command(flatten)]
    pub set: SetSource,
    #[arg(long, value_parser = parse_strategy, default_value = "auto")]
    pub strategy: Strategy,
    /// Also output the image itself.
    #[arg(long)]
    pub print_image: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[arg(short, value_parser = parse_form, allow_hyphen_values = true)]
    pub f: LinearForm,
    #[arg(short, value_parser = parse_form, allow_hyphen_values = true)]
    pub g: LinearForm,
    #[command(flatten)]
    pub set: SetSource,
}

#[derive(Debug, Args, Serialize)]
pub struct Classify3Args {
    #[arg(short, allow_hyphen_values = true)]
    pub u: i64,
    #[arg(short, allow_hyphen_values = true)]
    pub v: i64,
    /// Enumeration bound; defaults to u + |v|.
    #[arg(long)]
    pub bound: Option<i64>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WitnessKind {
    /// 3-element sets separating two normalized forms.
    Three {
        #[arg(short, value_parser = parse_form, allow_hyphen_values = true)]
        f: LinearForm,
        #[arg(short, value_parser = parse_form, allow_hyphen_values = true)]
        g: LinearForm,
    },
    /// 4-element sets separating ux + vy from ux - vy.
    Four {
        #[arg(short)]
        u: i64,
        #[arg(short)]
        v: i64,
    },
    /// 5-element set with |f(A)| < |A - A|.
    Five {
        #[arg(short)]
        u: i64,
        #[arg(short)]
        v: i64,
    },
    /// [0, t-1], where ux + vy and ux - vy both take t² values.
    Ap {
        #[arg(short)]
        u: i64,
        #[arg(short)]
        v: i64,
        #[arg(short)]
        t: i64,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct LocalSearchArgs {
    #[arg(short, value_parser = parse_form, allow_hyphen_values = true)]
    pub f: LinearForm,
    #[arg(short, value_parser = parse_form, allow_hyphen_values = true)]
    pub g: LinearForm,
    #[arg(short)]
    pub m: u64,
    #[arg(long, default_value_t = 10_000)]
    pub moves: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Qr,
    Kpower,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopArg {
    Threshold,
    Direct,
}

impl From<StopArg> for StopRule {
    fn from(s: StopArg) -> Self {
        match s {
            StopArg::Threshold => StopRule::Threshold,
            StopArg::Direct => StopRule::Direct,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ConstructArgs {
    #[arg(short, value_parser = parse_form, allow_hyphen_values = true)]
    pub f: LinearForm,
    #[arg(short, value_parser = parse_form, allow_hyphen_values = true)]
    pub g: LinearForm,
    #[arg(long, value_enum)]
    pub source: SourceKind,
    /// Residue sets for `--source file`: a JSON array of {modulus, classes},
    /// or one `m: c1,c2,...` per line.
    #[arg(long, required_if_eq("source", "file"))]
    pub locals: Option<PathBuf>,
    /// Primes requested from a searched source.
    #[arg(long, default_value_t = linform::harness::DEFAULT_PIPELINE_COUNT)]
    pub count: usize,
    /// Start of the representative window.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub window: i64,
    /// Defaults to direct for `--source file` and threshold otherwise.
    #[arg(long, value_enum)]
    pub stop: Option<StopArg>,
    #[arg(long, default_value_t = 10_000_000)]
    pub materialize_cap: u64,
    /// Include the constructed set in the output when it was built.
    #[arg(long)]
    pub emit_set: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Check groups or ids to run; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Replacement for the bundled four-moduli fixture.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn negative_coefficients_parse() {
        let cli = Cli::try_parse_from([
            "linform", "compare", "-f", "-2,1", "-g", "1,-1", "--inline", "-3,4",
        ])
        .unwrap();
        match cli.command {
            Command::Compare(a) => {
                assert_eq!(a.f.coeffs(), &[-2, 1]);
                assert_eq!(a.set.inline.as_deref(), Some("-3,4"));
            }
            _ => unreachable!(),
        }
    }
}
