//! Command-line front end.
//!
//! Reports go to stdout, diagnostics to stderr. Exit codes: 0 ok, 1 golden
//! mismatch, 2 parse error, 3 invalid configuration, 4 failed precondition
//! (bad reduction, no 1-Lipschitz certificate), 5 internal invariant.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::decomposition::decompose;
use crate::dynamics::{certify, check_minimal_by_criterion, check_minimal_by_levels, deciding_level, orbit_of_point};
use crate::error::{Error, Result};
use crate::p2criterion::{check_coefficient_criterion, check_coefficient_criterion_for, CoefficientVerdict, StandardForm};
use crate::padic::PrimeContext;
use crate::projective::ProjectivePoint;
use crate::ratmap::{Mobius, RationalMap};
use crate::search::{compare_golden, SearchMode, SearchReport, SearchSpec};

#[derive(Debug, Parser)]
#[command(name = "padyn", version, about = "Dynamics of rational maps on the p-adic projective line")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

/// Where the map comes from; exactly one source is allowed.
#[derive(Debug, Args)]
pub struct MapInput {
    /// Map expression, e.g. "(2z+3)/((z-1)(z-2))".
    #[arg(value_name = "MAP", allow_hyphen_values = true)]
    pub positional: Option<String>,
    #[arg(long = "map", value_name = "EXPR", allow_hyphen_values = true)]
    pub map: Option<String>,
    /// Coefficient JSON, e.g. '{"num":[3,2],"den":[2,-3,1]}'.
    #[arg(long, value_name = "JSON")]
    pub coeffs: Option<String>,
}

impl MapInput {
    pub fn load(&self) -> Result<RationalMap> {
        let sources: Vec<&String> = [&self.positional, &self.map, &self.coeffs].into_iter().flatten().collect();
        match sources.as_slice() {
            [one] => RationalMap::parse(one),
            [] => Err(Error::WrongForm("no map given (use MAP, --map or --coeffs)".into())),
            _ => Err(Error::WrongForm("give exactly one of MAP, --map, --coeffs".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 3)]
    pub p: u64,
    /// Precision cap: balls are resolved down to this level.
    #[arg(long = "max-level", default_value_t = 4)]
    pub max_level: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

impl Common {
    fn context(&self) -> Result<PrimeContext> {
        PrimeContext::new(self.p, self.max_level)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reduction mod p and the good-reduction verdict.
    Reduce {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: MapInput,
    },
    /// Minimality by both checkers, with every condition.
    Check {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: MapInput,
    },
    /// Periodic orbits, minimal components and basins down to the cap.
    Decompose {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: MapInput,
    },
    /// Residue orbit of a point.
    Orbit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: MapInput,
        /// Starting point: a rational, `inf` or `~i`.
        #[arg(long, default_value = "0")]
        start: String,
        /// Number of recorded iterates.
        #[arg(long, default_value_t = 10)]
        iters: usize,
        /// Residues are taken mod p^mod-level.
        #[arg(long = "mod-level", default_value_t = 3)]
        mod_level: u32,
        /// Record every step-th iterate, i.e. iterate φ^step.
        #[arg(long, default_value_t = 1)]
        step: usize,
    },
    /// The p = 2 coefficient congruences, after standardizing the map.
    #[command(name = "criterion-p2")]
    CriterionP2 {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        input: MapInput,
    },
    /// Exhaustive search over standardized coefficient tuples.
    Search {
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 4)]
        degree: usize,
        /// Coefficients range over 0..modulus.
        #[arg(long, default_value_t = 4)]
        modulus: u64,
        /// coefficient, good-reduction-minimal or both.
        #[arg(long, default_value = "coefficient")]
        mode: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Compare the text table against this file.
        #[arg(long)]
        golden: Option<PathBuf>,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code == 0 {
                let _ = write!(out, "{}", e.render());
            } else {
                let _ = write!(err, "{}", e.render());
            }
            return code;
        }
    };
    match execute(&cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn reject_dot(format: Format) -> Result<()> {
    if format == Format::Dot {
        return Err(Error::WrongForm("dot output is only available for decompose".into()));
    }
    Ok(())
}

fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let text = match command {
        Command::Reduce { common, input } => cmd_reduce(common, input)?,
        Command::Check { common, input } => cmd_check(common, input)?,
        Command::Decompose { common, input } => cmd_decompose(common, input)?,
        Command::Orbit { common, input, start, iters, mod_level, step } => {
            cmd_orbit(common, input, start, *iters, *mod_level, *step)?
        }
        Command::CriterionP2 { format, input } => cmd_criterion(*format, input)?,
        Command::Search { p, degree, modulus, mode, format, golden } => {
            let spec = SearchSpec::new(*p, *degree, *modulus, mode.parse::<SearchMode>()?)?;
            reject_dot(*format)?;
            let report = SearchReport::run(&spec)?;
            let table = report.to_text();
            if let Some(path) = golden {
                let expected = std::fs::read_to_string(path)
                    .map_err(|e| Error::WrongForm(format!("cannot read {}: {e}", path.display())))?;
                if let Some((line, got, want)) = compare_golden(&table, &expected) {
                    let _ = writeln!(err, "golden mismatch at line {line}:\n  got:  {got}\n  want: {want}");
                    return Ok(1);
                }
                let _ = writeln!(err, "golden match: {}", path.display());
            }
            match format {
                Format::Json => report.to_json() + "\n",
                _ => table,
            }
        }
    };
    let _ = out.write_all(text.as_bytes());
    Ok(0)
}

#[derive(Serialize)]
struct ReduceOutput {
    reduction: String,
    degree: usize,
    reduced_degree: usize,
    good_reduction: bool,
}

fn cmd_reduce(common: &Common, input: &MapInput) -> Result<String> {
    let ctx = common.context()?;
    reject_dot(common.format)?;
    let map = input.load()?;
    let red = map.reduce_mod_p(&ctx);
    let o = ReduceOutput {
        reduction: red.to_string(),
        degree: map.degree(),
        reduced_degree: red.degree(),
        good_reduction: map.has_good_reduction(&ctx),
    };
    Ok(match common.format {
        Format::Json => json(&o) + "\n",
        _ => format!(
            "{}; good reduction: {}\ndegree {} -> {} mod {}\n",
            o.reduction,
            yes_no(o.good_reduction),
            o.degree,
            o.reduced_degree,
            ctx.p()
        ),
    })
}

#[derive(Serialize)]
struct CheckOutput {
    map: String,
    p: u64,
    certificate: crate::dynamics::Certificate,
    criterion: crate::dynamics::CriterionVerdict,
    deciding_level: u32,
    single_cycle_at_deciding_level: bool,
    checkers_agree: bool,
    minimal: bool,
}

fn cmd_check(common: &Common, input: &MapInput) -> Result<String> {
    let ctx = common.context()?;
    reject_dot(common.format)?;
    let map = input.load()?;
    let criterion = check_minimal_by_criterion(&map, &ctx)?;
    let by_levels = check_minimal_by_levels(&map, &ctx)?;
    let o = CheckOutput {
        map: map.to_string(),
        p: ctx.p(),
        certificate: certify(&map, &ctx)?,
        deciding_level: deciding_level(ctx.p()),
        single_cycle_at_deciding_level: by_levels,
        checkers_agree: by_levels == criterion.minimal,
        minimal: criterion.minimal && by_levels,
        criterion,
    };
    if common.format == Format::Json {
        return Ok(json(&o) + "\n");
    }
    let c = &o.criterion;
    let p = o.p;
    let show = |v: Option<u32>| v.map_or("none (off the finite chart)".to_string(), |v| v.to_string());
    let mut s = String::new();
    s += &format!("map: {}\np = {p}, certificate: {}\n", o.map, o.certificate);
    s += &format!("level-1 transitive: {}\n", yes_no(c.transitive_level1));
    s += &format!("(phi^{})'(0) mod {p} = {} (need 1): {}\n", p + 1, c.derivative_residue, yes_no(c.derivative_condition));
    s += &format!("v_p(phi^{}(0)) = {} (need 1): {}\n", p + 1, show(c.valuation), yes_no(c.valuation_condition));
    if let Some(extra) = c.extra_condition {
        s += &format!("v_p(phi^{}(0)) = {} (need 2): {}\n", (p + 1) * p, show(c.extra_valuation), yes_no(extra));
    }
    s += &format!("single cycle at level {}: {}\n", o.deciding_level, yes_no(by_levels));
    s += &format!("checkers agree: {}\n", yes_no(o.checkers_agree));
    let reason = if o.minimal {
        String::new()
    } else if !c.transitive_level1 {
        " (level-1 not transitive)".into()
    } else if !c.derivative_condition {
        " (derivative condition fails)".into()
    } else if !c.valuation_condition {
        " (valuation condition fails)".into()
    } else {
        " (second valuation condition fails)".into()
    };
    s += &format!("minimal: {}{reason}\n", yes_no(o.minimal));
    Ok(s)
}

fn cmd_decompose(common: &Common, input: &MapInput) -> Result<String> {
    let ctx = common.context()?;
    let map = input.load()?;
    let report = decompose(&map, &ctx)?;
    Ok(match common.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json() + "\n",
        Format::Dot => report.to_dot(),
    })
}

#[derive(Serialize)]
struct OrbitOutput {
    start: String,
    modulus: u64,
    step: usize,
    orbit: Vec<String>,
}

fn cmd_orbit(common: &Common, input: &MapInput, start: &str, iters: usize, mod_level: u32, step: usize) -> Result<String> {
    reject_dot(common.format)?;
    let ctx = PrimeContext::new(common.p, common.max_level.max(mod_level))?;
    let map = input.load()?;
    let point = ProjectivePoint::parse(start)?;
    let step = step.max(1);
    let balls = orbit_of_point(&map, &point, mod_level, iters * step, step, &ctx)?;
    let o = OrbitOutput {
        start: point.to_string(),
        modulus: ctx.pow(mod_level),
        step,
        orbit: balls.iter().map(|b| b.label()).collect(),
    };
    Ok(match common.format {
        Format::Json => json(&o) + "\n",
        _ => format!("orbit of {} under phi^{} mod {}:\n{}\n", o.start, o.step, o.modulus, o.orbit.join(" -> ")),
    })
}

#[derive(Serialize)]
struct CriterionOutput {
    standardized: String,
    conjugation: String,
    form: StandardForm,
    verdict: CoefficientVerdict,
}

fn cmd_criterion(format: Format, input: &MapInput) -> Result<String> {
    reject_dot(format)?;
    let map = input.load()?;
    // maps already in standard shape are taken as they are
    let (form, g, verdict) = match StandardForm::from_map(&map) {
        Ok(form) => {
            let verdict = check_coefficient_criterion(&form)?;
            (form, Mobius::identity(), verdict)
        }
        Err(_) => check_coefficient_criterion_for(&map)?,
    };
    let o = CriterionOutput { standardized: form.to_map()?.to_string(), conjugation: g.to_string(), form, verdict };
    if format == Format::Json {
        return Ok(json(&o) + "\n");
    }
    let mut s = format!("standardized: {}\nconjugation: {}\n", o.standardized, o.conjugation);
    for c in &o.verdict.conditions {
        let residue = match (c.modulus, c.residue) {
            (1, _) => String::new(),
            (_, Some(r)) => format!(" (residue {r} mod {})", c.modulus),
            (_, None) => " (not 2-integral)".into(),
        };
        s += &format!("{}: {}{residue}\n", c.name, if c.holds { "pass" } else { "fail" });
    }
    if let Some(a2) = o.verdict.a_sum_mod_2 {
        s += &format!("A mod 2 = {a2}\n");
    }
    s += &format!("criterion satisfied: {}\n", yes_no(o.verdict.satisfied));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("padyn").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn reduce_lines() {
        let (code, out, _) = run_capture(&["reduce", "--p", "3", "(2z+3)/((z-1)(z-2))"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("2z / (z^2+2); good reduction: yes"));
        let (_, out, _) = run_capture(&["reduce", "--p", "2", "(z^2+2)/z"]);
        assert!(out.starts_with("z / 1; good reduction: no"));
        let (_, out, _) = run_capture(&["reduce", "--p", "3", "z"]);
        assert!(out.starts_with("z / 1; good reduction: yes"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_capture(&["reduce", "--p", "3", "(z+"]).0, 2);
        assert_eq!(run_capture(&["reduce", "--p", "4", "z"]).0, 3);
        assert_eq!(run_capture(&["check", "--p", "3", "z+1"]).0, 3);
        assert_eq!(run_capture(&["check", "--p", "2", "(z^2+2)/z"]).0, 4);
        assert_eq!(run_capture(&["reduce", "--p", "3", "--map", "z", "z"]).0, 3);
        assert_eq!(run_capture(&["frobnicate"]).0, 2);
    }

    #[test]
    fn check_verdicts() {
        let (code, out, _) = run_capture(&["check", "--p", "3", "-(2z^2+2z+1)/(z^3-3z^2+z+1)"]);
        assert_eq!(code, 0);
        assert!(out.contains("minimal: yes"), "{out}");
        assert!(out.contains("checkers agree: yes"));
        let (_, out, _) = run_capture(&["check", "--p", "3", "(2z+3)/((z-1)(z-2))"]);
        assert!(out.contains("minimal: no (level-1 not transitive)"), "{out}");
    }

    #[test]
    fn orbit_listing() {
        let (code, out, _) =
            run_capture(&["orbit", "--p", "3", "(2z+3)/((z-1)(z-2))", "--start", "0", "--iters", "3", "--mod-level", "3"]);
        assert_eq!(code, 0);
        assert!(out.contains("0 -> 15 -> 3 -> 18"), "{out}");
    }
}
