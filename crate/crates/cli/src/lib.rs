//! Command-line front end. `run` does all the work and returns what would be
//! printed, so tests can drive the CLI without spawning a process.
//!
//! Exit codes: 0 ok, 2 input error, 3 low power, 4 audit findings,
//! 5 simulation outside its Monte Carlo band.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use datatest::audit::{review, AnalysisTrace, ReviewOptions};
use datatest::data::{parse_counts, parse_groups, parse_pvalues, Group};
use datatest::fisher::{
    assess_significance, benjamini_hochberg, bonferroni_adjust, holm_adjust, interpret,
    run_chi_square, run_two_sample, Directionality, NullHypothesis, SignificanceLadder,
    VarianceRule,
};
use datatest::longrun::{run_with_workers, FamilyCorrection, Scenario, SimulationSpec};
use datatest::np::{
    build_design, build_design_unequal, build_design_with_n, run_acceptance_test,
    AcceptanceDesign, DesignRequest, MainHypothesis, Proxy, MIN_POWER,
};
use datatest::report::{
    AcceptanceBody, Body, CorrectionBody, GroupSummary, Paradigm, Report, SignificanceBody,
};
use datatest::{Error, Tails, TestKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_LOW_POWER: i32 = 3;
pub const EXIT_FINDINGS: i32 = 4;
pub const EXIT_SIM_FAIL: i32 = 5;

/// Environment variable holding the default simulation seed.
pub const SEED_ENV: &str = "DATATEST_SEED";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
}

impl Outcome {
    fn input_error(message: impl std::fmt::Display) -> Self {
        Outcome {
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
            exit_code: EXIT_INPUT,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "datatest", version, about = "Significance tests, acceptance tests, and trace audits")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Freeze an a priori acceptance design
    Design(DesignArgs),
    /// Run a significance test (fisher) or apply a frozen design (np)
    Test(TestArgs),
    /// Correct significance levels across a family of tests
    Correct(CorrectArgs),
    /// Classify and audit an analysis trace
    Audit(AuditArgs),
    /// Run a long-run simulation
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct DesignArgs {
    #[arg(long, default_value = "t2")]
    test: TestKind,
    #[arg(long, default_value = "1")]
    tails: Tails,
    #[arg(long, allow_hyphen_values = true)]
    d: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    /// Fix the per-group size instead of solving for it
    #[arg(long, conflicts_with_all = ["n_a", "n_b"])]
    n: Option<usize>,
    #[arg(long, requires = "n_b")]
    n_a: Option<usize>,
    #[arg(long, requires = "n_a")]
    n_b: Option<usize>,
    /// Write the frozen design here for a later `test --mode np`
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Fisher,
    Np,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    Greater,
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variance {
    Pooled,
    Welch,
}

impl From<Variance> for VarianceRule {
    fn from(v: Variance) -> Self {
        match v {
            Variance::Pooled => VarianceRule::Pooled,
            Variance::Welch => VarianceRule::Welch,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProxyArg {
    Cv,
    P,
}

#[derive(Args, Debug)]
struct TestArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "t2")]
    test: TestKind,
    /// Fisher mode: 1 for a directional H0, 2 for a point H0
    #[arg(long, default_value = "1")]
    tails: Tails,
    /// Fisher mode: the direction a one-tailed test looks for (first group minus second)
    #[arg(long, value_enum, default_value_t = Direction::Greater)]
    direction: Direction,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    null: f64,
    /// Defaults to welch in fisher mode and pooled in np mode
    #[arg(long, value_enum)]
    variance: Option<Variance>,
    /// Fisher mode: comma-separated, strictly decreasing levels
    #[arg(long, value_delimiter = ',')]
    ladder: Option<Vec<f64>>,
    /// NP mode: frozen design written by `design --out`
    #[arg(long)]
    design: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ProxyArg::Cv)]
    proxy: ProxyArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Bonferroni,
    Holm,
    Bh,
}

#[derive(Args, Debug)]
struct CorrectArgs {
    #[arg(long)]
    pvalues: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Bonferroni)]
    method: Method,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Effect size for roving-beta repairs, if the trace does not declare one
    #[arg(long, allow_hyphen_values = true)]
    d: Option<f64>,
    /// Per-group size for roving-beta repairs
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    tails: Option<Tails>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    Type1,
    Power,
    Pdance,
    Familywise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CorrectionArg {
    None,
    Bonferroni,
    Holm,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    #[arg(long, default_value = "1")]
    tails: Tails,
    /// True effect; defaults to 0 for type1/familywise and 0.8 otherwise
    #[arg(long, allow_hyphen_values = true)]
    d: Option<f64>,
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, value_enum, default_value_t = CorrectionArg::None)]
    correction: CorrectionArg,
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    /// Defaults to $DATATEST_SEED, then 0
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; the report does not depend on this
    #[arg(long)]
    workers: Option<usize>,
}

/// Parse `args` (including the program name) and execute. `seed_env` is the
/// value of `DATATEST_SEED`, if set.
pub fn run<I, T>(args: I, seed_env: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    exit_code: EXIT_INPUT,
                }
            } else {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    exit_code: EXIT_OK,
                }
            };
        }
    };
    let result = match cli.command {
        Command::Design(a) => design(a),
        Command::Test(a) => test(a),
        Command::Correct(a) => correct(a),
        Command::Audit(a) => audit_cmd(a),
        Command::Simulate(a) => simulate(a, seed_env),
    };
    match result {
        Ok((report, exit_code)) => {
            let rendered = match cli.format {
                Format::Text => report.to_text(),
                Format::Json => report.to_json(),
            };
            match rendered {
                // text output already carries the warnings
                Ok(stdout) => Outcome {
                    stderr: match cli.format {
                        Format::Text => String::new(),
                        Format::Json => report.warnings.iter().map(|w| format!("warning: {w}\n")).collect(),
                    },
                    stdout,
                    exit_code,
                },
                Err(e) => Outcome::input_error(e),
            }
        }
        Err(e) => Outcome::input_error(e),
    }
}

type CmdResult = Result<(Report, i32), Error>;

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))
}

/// File name only, so reports do not depend on where the files live.
fn file_label(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn design(a: DesignArgs) -> CmdResult {
    let request = DesignRequest::new(a.test, a.tails, a.d, a.alpha, a.beta)?;
    let design = match (a.n, a.n_a, a.n_b) {
        (Some(n), _, _) => build_design_with_n(&request, n)?,
        (None, Some(na), Some(nb)) => build_design_unequal(&request, na, nb)?,
        _ => build_design(&request)?,
    };
    if let Some(out) = &a.out {
        let json = serde_json::to_string_pretty(&design)
            .map_err(|e| Error::Contract(e.to_string()))?;
        fs::write(out, json + "\n")
            .map_err(|e| Error::Precondition(format!("cannot write {}: {e}", out.display())))?;
    }
    let mut report = Report::new(Paradigm::NeymanPearson, "design", Body::Design { design: design.clone() })
        .with_input("test", a.test)
        .with_input("tails", a.tails.count())
        .with_input("d", a.d)
        .with_input("alpha", a.alpha)
        .with_input("beta", a.beta);
    if let Some(n) = a.n {
        report = report.with_input("n", n);
    }
    if let (Some(na), Some(nb)) = (a.n_a, a.n_b) {
        report = report.with_input("n_a", na).with_input("n_b", nb);
    }
    let code = if design.is_low_power() {
        report.warnings.push(format!(
            "LowPower: power {:.4} is below {MIN_POWER:.2}; the design is unlikely to detect the effect",
            design.power()
        ));
        EXIT_LOW_POWER
    } else {
        EXIT_OK
    };
    Ok((report, code))
}

fn summary(g: &Group) -> GroupSummary {
    GroupSummary {
        name: g.name.clone(),
        n: g.values.len(),
        mean: g.values.iter().sum::<f64>() / g.values.len() as f64,
    }
}

fn two_groups(path: &Path) -> Result<(Group, Group), Error> {
    let mut groups = parse_groups(&read(path)?)?;
    if groups.len() != 2 {
        return Err(Error::Precondition(format!(
            "a two-sample test needs exactly 2 groups, {} has {}",
            file_label(path),
            groups.len()
        )));
    }
    let b = groups.pop().unwrap();
    let a = groups.pop().unwrap();
    Ok((a, b))
}

fn test(a: TestArgs) -> CmdResult {
    match a.mode {
        Mode::Fisher => fisher_test(a),
        Mode::Np => np_test(a),
    }
}

fn fisher_test(a: TestArgs) -> CmdResult {
    if a.design.is_some() {
        return Err(Error::Precondition(
            "a significance test takes no a priori design; use --mode np".into(),
        ));
    }
    let ladder = match &a.ladder {
        Some(levels) => SignificanceLadder::from_levels(levels.clone())?,
        None => SignificanceLadder::default(),
    };
    let mut report_inputs = vec![
        ("data", file_label(&a.data)),
        ("test", a.test.to_string()),
    ];
    let (hypothesis, variance, groups, result) = match a.test {
        TestKind::TwoSampleT => {
            let directionality = match (a.tails, a.direction) {
                (Tails::Two, _) => Directionality::NonDirectional,
                (Tails::One, Direction::Greater) => Directionality::DirectionalPositive,
                (Tails::One, Direction::Less) => Directionality::DirectionalNegative,
            };
            let h = NullHypothesis::mean_difference(a.null, directionality)?;
            let rule: VarianceRule = a.variance.unwrap_or(Variance::Welch).into();
            let (ga, gb) = two_groups(&a.data)?;
            let result = run_two_sample(&ga.values, &gb.values, &h, rule)?;
            report_inputs.push(("tails", a.tails.count().to_string()));
            if a.tails == Tails::One {
                report_inputs.push(("direction", format!("{:?}", a.direction).to_lowercase()));
            }
            report_inputs.push(("null", a.null.to_string()));
            report_inputs.push(("variance", format!("{:?}", rule).to_lowercase()));
            (h.to_string(), Some(rule), vec![summary(&ga), summary(&gb)], result)
        }
        TestKind::ChiSquareIndependence => {
            let table = parse_counts(&read(&a.data)?)?;
            let result = run_chi_square(&table.counts)?;
            (NullHypothesis::independence().to_string(), None, vec![], result)
        }
    };
    report_inputs.push((
        "ladder",
        ladder.levels().iter().map(f64::to_string).collect::<Vec<_>>().join(","),
    ));
    let body = SignificanceBody {
        hypothesis,
        variance,
        groups,
        assessment: assess_significance(result.p_value, &ladder),
        interpretation: interpret(&result, &ladder),
        ladder: ladder.levels().to_vec(),
        result,
    };
    let mut report = Report::new(Paradigm::Fisher, "test", Body::Significance(body));
    for (k, v) in report_inputs {
        report = report.with_input(k, v);
    }
    Ok((report, EXIT_OK))
}

fn np_test(a: TestArgs) -> CmdResult {
    let Some(design_path) = &a.design else {
        return Err(Error::Precondition(
            "a priori design required: run `datatest design ... --out FILE` and pass --design FILE".into(),
        ));
    };
    if a.test != TestKind::TwoSampleT {
        return Err(Error::Unsupported(
            "acceptance tests are implemented for the two-sample t test only".into(),
        ));
    }
    let design: AcceptanceDesign = serde_json::from_str(&read(design_path)?).map_err(|e| {
        Error::Precondition(format!("{} is not a valid frozen design: {e}", file_label(design_path)))
    })?;
    let rule: VarianceRule = a.variance.unwrap_or(Variance::Pooled).into();
    let proxy = match a.proxy {
        ProxyArg::Cv => Proxy::CriticalValue,
        ProxyArg::P => Proxy::PValue,
    };
    let (ga, gb) = two_groups(&a.data)?;
    let hypothesis = MainHypothesis { null_value: a.null };
    let result = run_acceptance_test(&design, &ga.values, &gb.values, &hypothesis, rule, proxy)?;
    let body = AcceptanceBody {
        design,
        groups: vec![summary(&ga), summary(&gb)],
        result,
    };
    let report = Report::new(Paradigm::NeymanPearson, "test", Body::Acceptance(body))
        .with_input("data", file_label(&a.data))
        .with_input("design", file_label(design_path))
        .with_input("null", a.null)
        .with_input("variance", format!("{rule:?}").to_lowercase())
        .with_input("proxy", format!("{:?}", a.proxy).to_lowercase());
    Ok((report, EXIT_OK))
}

fn correct(a: CorrectArgs) -> CmdResult {
    let ps = parse_pvalues(&read(&a.pvalues)?)?;
    let (name, tests) = match a.method {
        Method::Bonferroni => ("bonferroni", bonferroni_adjust(&ps, a.level)?),
        Method::Holm => ("holm", holm_adjust(&ps, a.level)?),
        Method::Bh => ("bh", benjamini_hochberg(&ps, a.level)?),
    };
    let body = CorrectionBody {
        method: name.to_string(),
        level: a.level,
        tests,
    };
    let report = Report::new(Paradigm::Fisher, "correct", Body::Correction(body))
        .with_input("pvalues", file_label(&a.pvalues))
        .with_input("method", name)
        .with_input("level", a.level);
    Ok((report, EXIT_OK))
}

fn audit_cmd(a: AuditArgs) -> CmdResult {
    let trace = AnalysisTrace::parse(&read(&a.trace)?)?;
    let options = ReviewOptions {
        d: a.d,
        n_per_group: a.n,
        tails: a.tails,
    };
    let report_body = review(&trace, options)?;
    let code = if report_body.findings.is_empty() {
        EXIT_OK
    } else {
        EXIT_FINDINGS
    };
    let mut report = Report::new(Paradigm::Audit, "audit", Body::Audit(report_body))
        .with_input("trace", file_label(&a.trace));
    if let Some(d) = a.d {
        report = report.with_input("d", d);
    }
    if let Some(n) = a.n {
        report = report.with_input("n", n);
    }
    if let Some(t) = a.tails {
        report = report.with_input("tails", t.count());
    }
    Ok((report, code))
}

fn simulate(a: SimulateArgs, seed_env: Option<&str>) -> CmdResult {
    let seed = match (a.seed, seed_env) {
        (Some(s), _) => s,
        (None, Some(v)) => v
            .trim()
            .parse()
            .map_err(|_| Error::Precondition(format!("{SEED_ENV}=`{v}` is not an unsigned integer")))?,
        (None, None) => 0,
    };
    let scenario = match a.scenario {
        ScenarioArg::Type1 => Scenario::Type1Rate,
        ScenarioArg::Power => Scenario::PowerRate,
        ScenarioArg::Pdance => Scenario::PDance,
        ScenarioArg::Familywise => Scenario::FamilywiseInflation {
            m: a.m,
            correction: match a.correction {
                CorrectionArg::None => FamilyCorrection::None,
                CorrectionArg::Bonferroni => FamilyCorrection::Bonferroni,
                CorrectionArg::Holm => FamilyCorrection::Holm,
            },
        },
    };
    let d = a.d.unwrap_or(match a.scenario {
        ScenarioArg::Type1 | ScenarioArg::Familywise => 0.0,
        ScenarioArg::Power | ScenarioArg::Pdance => 0.8,
    });
    let spec = SimulationSpec {
        scenario,
        n_per_group: a.n,
        level: a.level,
        tails: a.tails,
        true_effect: d,
        replications: a.reps,
        seed,
    };
    let workers = a.workers.unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    });
    let sim = run_with_workers(&spec, workers)?;
    let code = if sim.pass { EXIT_OK } else { EXIT_SIM_FAIL };
    let report = Report::new(Paradigm::LongRun, "simulate", Body::Simulation(sim))
        .with_input("scenario", format!("{:?}", a.scenario).to_lowercase())
        .with_input("seed", seed);
    Ok((report, code))
}
