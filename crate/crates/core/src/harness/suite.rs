//! The metatheory suite: each generated program is run and its whole trace
//! checked against six properties.

use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use super::gen::{gen_case, GenConfig, GenError};
use super::shrink::shrink;
use crate::alpha::alpha_eq_term;
use crate::machine::{machine_eval, MachineOutcome, DEFAULT_MACHINE_FUEL};
use crate::reduction::{decompose, evaluate, redex_decompositions, run_observed, Focus, Outcome, Program, DEFAULT_FUEL};
use crate::surface::{parse, parse_trace_term, pretty, render_source};
use crate::subst::rename_type_binders;
use crate::syntax::{CalcMode, Term, Type};
use crate::typing::{abortive, check_program, delimited};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Termination,
    UniqueDecomposition,
    PlugDecompose,
    Preservation,
    MachineAgreement,
    RoundTrip,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::Termination,
        Property::UniqueDecomposition,
        Property::PlugDecompose,
        Property::Preservation,
        Property::MachineAgreement,
        Property::RoundTrip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Termination => "termination",
            Property::UniqueDecomposition => "unique-decomposition",
            Property::PlugDecompose => "plug-decompose",
            Property::Preservation => "preservation",
            Property::MachineAgreement => "machine-agreement",
            Property::RoundTrip => "round-trip",
        }
    }

    fn index(self) -> usize {
        Property::ALL.iter().position(|p| *p == self).expect("listed")
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub gen: GenConfig,
    pub fuel: u64,
    pub machine_fuel: u64,
    pub enabled: [bool; 6],
    /// Counterexamples kept per property.
    pub max_counterexamples: usize,
    pub shrink: bool,
}

impl SuiteConfig {
    pub fn new(gen: GenConfig) -> Self {
        SuiteConfig {
            gen,
            fuel: DEFAULT_FUEL,
            machine_fuel: DEFAULT_MACHINE_FUEL,
            enabled: [true; 6],
            max_counterexamples: 5,
            shrink: true,
        }
    }

    pub fn only(mut self, props: &[Property]) -> Self {
        self.enabled = [false; 6];
        for p in props {
            self.enabled[p.index()] = true;
        }
        self
    }

    pub fn is_enabled(&self, p: Property) -> bool {
        self.enabled[p.index()]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub case: u64,
    pub seed: u64,
    /// Self-contained `.fctl` source reproducing the failure (after shrinking).
    pub program: String,
    pub original_size: usize,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub property: Property,
    pub enabled: bool,
    pub passed: u64,
    pub failed: u64,
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub total_ms: u64,
    pub generation_ms: u64,
    pub checking_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Statistics {
    pub steps_total: u64,
    pub steps_max: u64,
    pub size_max: usize,
    pub control_programs: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub mode: CalcMode,
    pub seed: u64,
    pub count: usize,
    pub max_depth: u32,
    pub control_prob: f64,
    pub generated: u64,
    pub generation_failures: Vec<String>,
    pub properties: Vec<PropertyReport>,
    pub stats: Statistics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.generation_failures.is_empty() && self.properties.iter().all(|p| p.failed == 0)
    }

    pub fn property(&self, p: Property) -> &PropertyReport {
        &self.properties[p.index()]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Drop wall-clock data so that reports compare equal across runs.
    pub fn without_timings(mut self) -> Self {
        self.timings = None;
        self
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "suite: {} seed={} count={} depth={} control={}",
            self.mode, self.seed, self.count, self.max_depth, self.control_prob
        )?;
        writeln!(f, "generated: {}", self.generated)?;
        for g in &self.generation_failures {
            writeln!(f, "  generation failure: {g}")?;
        }
        for p in &self.properties {
            if !p.enabled {
                writeln!(f, "  {:<22} skipped", p.property.name())?;
                continue;
            }
            let verdict = if p.failed == 0 { "PASS" } else { "FAIL" };
            writeln!(f, "  {:<22} {verdict} {} passed, {} failed", p.property.name(), p.passed, p.failed)?;
            for c in &p.counterexamples {
                writeln!(f, "    case {} (seed {}): {}", c.case, c.seed, c.message)?;
                for line in c.program.lines() {
                    writeln!(f, "      {line}")?;
                }
            }
        }
        writeln!(
            f,
            "steps: total {} max {}; largest program {} nodes; {} with control",
            self.stats.steps_total, self.stats.steps_max, self.stats.size_max, self.stats.control_programs
        )?;
        if let Some(t) = &self.timings {
            writeln!(f, "time: {} ms (generation {} ms, checking {} ms)", t.total_ms, t.generation_ms, t.checking_ms)?;
        }
        Ok(())
    }
}

/// Per-property verdicts for one program: `None` when skipped.
pub type Verdicts = [Option<Result<(), String>>; 6];

struct CaseResult {
    case: u64,
    seed: u64,
    program: Option<Program>,
    gen_error: Option<String>,
    verdicts: Verdicts,
    steps: u64,
    gen_time: Duration,
    check_time: Duration,
}

/// Check every enabled property on one program.
pub fn check_case(p: &Program, cfg: &SuiteConfig) -> (Verdicts, u64) {
    let mut v: Verdicts = Default::default();
    let on = |q: Property| cfg.is_enabled(q);
    let expected = check_program(&p.term, p.mode).map_err(|e| e.to_string());

    let mut uniq: Result<(), String> = Ok(());
    let mut plug: Result<(), String> = Ok(());
    let mut pres: Result<(), String> = Ok(());
    let mut rt: Result<(), String> = Ok(());
    let need_trace = on(Property::UniqueDecomposition)
        || on(Property::PlugDecompose)
        || on(Property::Preservation)
        || on(Property::RoundTrip);
    let mut visit = |t: &Term, is_final: bool| {
        if on(Property::UniqueDecomposition) && uniq.is_ok() {
            uniq = unique_decomposition(&Program::new(p.mode, t.clone()), is_final);
        }
        if on(Property::PlugDecompose) && plug.is_ok() {
            plug = plug_decompose(&Program::new(p.mode, t.clone()));
        }
        if on(Property::Preservation) && pres.is_ok() {
            pres = match &expected {
                Ok(ty) => preserved(t, ty, p.mode),
                Err(e) => Err(format!("source program rejected: {e}")),
            };
        }
        if on(Property::RoundTrip) && rt.is_ok() {
            rt = round_trip_trace(t, p.mode);
        }
    };
    let outcome = if need_trace {
        run_observed(p, cfg.fuel, &mut visit)
    } else {
        evaluate(p, cfg.fuel)
    };
    let steps = outcome.steps();

    if on(Property::Termination) {
        v[Property::Termination.index()] = Some(match &outcome {
            Outcome::Normalized { .. } => Ok(()),
            Outcome::FuelExhausted { steps, .. } => Err(format!("fuel exhausted after {steps} steps")),
            Outcome::Stuck { stuck, steps, .. } => Err(format!("stuck after {steps} steps: {}", stuck.reason)),
        });
    }
    if on(Property::UniqueDecomposition) {
        v[Property::UniqueDecomposition.index()] = Some(uniq);
    }
    if on(Property::PlugDecompose) {
        v[Property::PlugDecompose.index()] = Some(plug);
    }
    if on(Property::Preservation) {
        v[Property::Preservation.index()] = Some(pres);
    }
    if on(Property::MachineAgreement) {
        v[Property::MachineAgreement.index()] = Some(agreement(&outcome, &machine_eval(p, cfg.machine_fuel)));
    }
    if on(Property::RoundTrip) {
        v[Property::RoundTrip.index()] = Some(rt.and_then(|_| round_trip_source(&p.term, p.mode)));
    }
    (v, steps)
}

/// Exactly one redex decomposition, or none when the program is finished.
pub fn unique_decomposition(p: &Program, is_final: bool) -> Result<(), String> {
    let n = redex_decompositions(p).len();
    let finished = matches!(decompose(p), Ok(d) if matches!(d.focus, Focus::Value(_) | Focus::ProgramValue(_)));
    match (n, finished) {
        (1, false) => Ok(()),
        (0, true) => Ok(()),
        (0, false) if is_final => Err(format!("no redex in non-value `{}`", pretty(&p.term))),
        _ => Err(format!("{n} redex decompositions of `{}`", pretty(&p.term))),
    }
}

/// Reassembling the decomposition gives back the program, syntactically.
pub fn plug_decompose(p: &Program) -> Result<(), String> {
    let back = match decompose(p) {
        Ok(d) => d.reconstitute(),
        Err(s) => crate::reduction::reassemble(s.focus.clone(), &s.context, s.metacontext.as_ref()),
    };
    if back == p.term {
        Ok(())
    } else {
        Err(format!("`{}` reassembles to `{}`", pretty(&p.term), pretty(&back)))
    }
}

/// An intermediate program re-checks at the source program's type. Reduction
/// can move a type abstraction under a binder mentioning a variable of the
/// same name; terms are taken up to alpha, so binders are renamed apart first.
pub fn preserved(t: &Term, expected: &Type, mode: CalcMode) -> Result<(), String> {
    let renamed = rename_type_binders(t);
    let r = if mode.is_delimited() {
        delimited::check_preserved(&renamed, expected, mode)
    } else {
        abortive::check_refined(&renamed, expected, mode)
    };
    r.map_err(|e| format!("{e} at `{}`", pretty(t)))
}

fn round_trip_trace(t: &Term, mode: CalcMode) -> Result<(), String> {
    let text = pretty(t);
    match parse_trace_term(&text, mode) {
        Ok(back) if alpha_eq_term(&back, t) => Ok(()),
        Ok(back) => Err(format!("`{text}` re-parses as `{}`", pretty(&back))),
        Err(e) => Err(format!("`{text}` does not re-parse: {e}")),
    }
}

fn round_trip_source(t: &Term, mode: CalcMode) -> Result<(), String> {
    let text = pretty(t);
    match parse(&text, mode) {
        Ok(back) if alpha_eq_term(&back, t) => Ok(()),
        Ok(back) => Err(format!("`{text}` re-parses as `{}`", pretty(&back))),
        Err(e) => Err(format!("`{text}` does not re-parse: {e}")),
    }
}

/// Same outcome class, and alpha-equal values.
pub fn agreement(r: &Outcome, m: &MachineOutcome) -> Result<(), String> {
    match (r, m) {
        (Outcome::Normalized { value: a, .. }, MachineOutcome::Normalized { value: b, .. }) => {
            if alpha_eq_term(a, b) {
                Ok(())
            } else {
                Err(format!("reduction gives `{}`, machine gives `{}`", pretty(a), pretty(b)))
            }
        }
        (Outcome::FuelExhausted { .. }, MachineOutcome::FuelExhausted { .. }) => Ok(()),
        (Outcome::Stuck { stuck, .. }, MachineOutcome::Stuck { reason, .. }) if stuck.reason == *reason => Ok(()),
        _ => Err(format!("outcome classes differ: {} vs {}", outcome_class(r), machine_class(m))),
    }
}

pub fn outcome_class(o: &Outcome) -> &'static str {
    match o {
        Outcome::Normalized { .. } => "normalized",
        Outcome::FuelExhausted { .. } => "fuel-exhausted",
        Outcome::Stuck { .. } => "stuck",
    }
}

pub fn machine_class(o: &MachineOutcome) -> &'static str {
    match o {
        MachineOutcome::Normalized { .. } => "normalized",
        MachineOutcome::FuelExhausted { .. } => "fuel-exhausted",
        MachineOutcome::Stuck { .. } => "stuck",
    }
}

fn run_case(cfg: &SuiteConfig, case: u64) -> CaseResult {
    let t0 = Instant::now();
    let generated = gen_case(&cfg.gen, case);
    let gen_time = t0.elapsed();
    match generated {
        Err(e) => CaseResult {
            case,
            seed: 0,
            program: None,
            gen_error: Some(gen_error_text(case, &e)),
            verdicts: Default::default(),
            steps: 0,
            gen_time,
            check_time: Duration::ZERO,
        },
        Ok((seed, p)) => {
            let t1 = Instant::now();
            let (verdicts, steps) = check_case(&p, cfg);
            CaseResult { case, seed, program: Some(p), gen_error: None, verdicts, steps, gen_time, check_time: t1.elapsed() }
        }
    }
}

fn gen_error_text(case: u64, e: &GenError) -> String {
    format!("case {case}: {e}")
}

/// Generate `cfg.gen.count` programs and check them in parallel.
pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    let start = Instant::now();
    let results: Vec<CaseResult> = (0..cfg.gen.count as u64).into_par_iter().map(|i| run_case(cfg, i)).collect();

    let mut properties: Vec<PropertyReport> = Property::ALL
        .iter()
        .map(|&property| PropertyReport {
            property,
            enabled: cfg.is_enabled(property),
            passed: 0,
            failed: 0,
            counterexamples: Vec::new(),
        })
        .collect();
    let mut generation_failures = Vec::new();
    let mut stats = Statistics { steps_total: 0, steps_max: 0, size_max: 0, control_programs: 0 };
    let (mut gen_time, mut check_time) = (Duration::ZERO, Duration::ZERO);
    let mut generated = 0;
    for r in &results {
        gen_time += r.gen_time;
        check_time += r.check_time;
        if let Some(e) = &r.gen_error {
            generation_failures.push(e.clone());
            continue;
        }
        let p = r.program.as_ref().expect("generated");
        generated += 1;
        stats.steps_total += r.steps;
        stats.steps_max = stats.steps_max.max(r.steps);
        stats.size_max = stats.size_max.max(p.term.size());
        let inner = match &p.term {
            Term::Reset(b) if p.mode.is_delimited() => &**b,
            t => t,
        };
        if inner.has_control() {
            stats.control_programs += 1;
        }
        for (i, verdict) in r.verdicts.iter().enumerate() {
            let rep = &mut properties[i];
            match verdict {
                None => {}
                Some(Ok(())) => rep.passed += 1,
                Some(Err(msg)) => {
                    rep.failed += 1;
                    if rep.counterexamples.len() < cfg.max_counterexamples {
                        rep.counterexamples.push(counterexample(cfg, Property::ALL[i], r, p, msg));
                    }
                }
            }
        }
    }
    SuiteReport {
        mode: cfg.gen.mode,
        seed: cfg.gen.seed,
        count: cfg.gen.count,
        max_depth: cfg.gen.max_depth,
        control_prob: cfg.gen.control_prob,
        generated,
        generation_failures,
        properties,
        stats,
        timings: Some(Timings {
            total_ms: start.elapsed().as_millis() as u64,
            generation_ms: gen_time.as_millis() as u64,
            checking_ms: check_time.as_millis() as u64,
        }),
    }
}

fn counterexample(cfg: &SuiteConfig, prop: Property, r: &CaseResult, p: &Program, msg: &str) -> Counterexample {
    let only = cfg.clone().only(&[prop]);
    let fails = |q: &Program| matches!(check_case(q, &only).0[prop.index()], Some(Err(_)));
    let small = if cfg.shrink { shrink(p, fails) } else { p.clone() };
    let message = if small.term == p.term {
        msg.to_string()
    } else {
        match &check_case(&small, &only).0[prop.index()] {
            Some(Err(m)) => m.clone(),
            _ => msg.to_string(),
        }
    };
    Counterexample {
        case: r.case,
        seed: r.seed,
        program: render_source(small.mode, &small.term),
        original_size: p.term.size(),
        message,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preservation_is_up_to_alpha() {
        // Reduction duplicates `tfun a -> ...` under `fun (x:a)`, so the
        // literal side condition of the type abstraction rule fails.
        let src = "(fun (v : forall b. b -> b) -> tfun a -> fun (x:a) -> v) (tfun a -> fun (y:a) -> y)";
        for mode in [CalcMode::ABORTIVE_CBV, CalcMode::ABORTIVE_CBN] {
            let p = Program::new(mode, parse(src, mode).unwrap());
            let cfg = SuiteConfig::new(GenConfig::new(mode, 0)).only(&[Property::Preservation]);
            let (v, _) = check_case(&p, &cfg);
            assert_eq!(v[Property::Preservation.index()], Some(Ok(())), "{mode}");
        }
    }

    #[test]
    fn small_suites_pass() {
        for mode in CalcMode::ALL {
            let cfg = SuiteConfig::new(GenConfig { count: 40, ..GenConfig::new(mode, 11) });
            let rep = run_suite(&cfg);
            assert!(rep.all_passed(), "{rep}");
            assert_eq!(rep.generated, 40);
        }
    }

    #[test]
    fn toggles_skip_properties() {
        let cfg = SuiteConfig::new(GenConfig { count: 5, ..GenConfig::new(CalcMode::ABORTIVE_CBV, 3) })
            .only(&[Property::Termination]);
        let rep = run_suite(&cfg);
        assert_eq!(rep.property(Property::Termination).passed, 5);
        assert!(!rep.property(Property::RoundTrip).enabled);
        assert_eq!(rep.property(Property::RoundTrip).passed, 0);
    }

    #[test]
    fn report_is_reproducible() {
        let cfg = SuiteConfig::new(GenConfig { count: 10, ..GenConfig::new(CalcMode::DELIMITED_CBN, 5) });
        let a = run_suite(&cfg).without_timings().to_json();
        let b = run_suite(&cfg).without_timings().to_json();
        assert_eq!(a, b);
    }
}
