use std::fs;
use std::io::{self, Read};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fctl::harness::suite::{agreement, machine_class, outcome_class};
use fctl::harness::{run_suite, GenConfig, SuiteConfig, SuiteReport};
use fctl::machine::{machine_eval, machine_run, MachineOutcome, MachineState};
use fctl::reduction::{
    decompose, enumerate_decompositions, evaluate, redex_rule, step, trace, Focus, Outcome, Program, Step, DEFAULT_FUEL,
};
use fctl::surface::{
    decomposition_json, emit_trace, machine_record, parse_source, parse_source_as, pretty, pretty_context,
    pretty_metacontext, pretty_type,
};
use fctl::typing::check_program;
use fctl::CalcMode;

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_STUCK: u8 = 2;
const EXIT_FUEL: u8 = 3;
const EXIT_PROPERTY: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "fctl", version, about = "System F with abortive and delimited control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Calculus and strategy; overrides the file header.
    #[arg(long, num_args = 2, value_names = ["CALCULUS", "STRATEGY"], global = true)]
    mode: Option<Vec<String>>,
    #[arg(long, default_value_t = DEFAULT_FUEL, global = true)]
    fuel: u64,
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, value_enum, default_value_t = Engine::Reduction, global = true)]
    engine: Engine,
    /// List every decomposition, not just the one that drives evaluation.
    #[arg(long, global = true)]
    all: bool,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    #[arg(long, default_value_t = 100, global = true)]
    count: usize,
    #[arg(long, default_value_t = 8, global = true)]
    depth: u32,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Engine {
    Reduction,
    Machine,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Typecheck a program and print its type.
    Check { file: String },
    /// Evaluate a program.
    Eval { file: String },
    /// Print the evaluation trace as JSON.
    Trace { file: String },
    /// Take N reduction steps and print the resulting program.
    Step { n: u64, file: String },
    /// Show how the program decomposes into a focus and its contexts.
    Decompose { file: String },
    /// Generate programs and run the property suite.
    Fuzz,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.opts.mode.as_deref().map(parse_mode).transpose() {
        Err(e) => Err(e),
        Ok(mode) => run(&cli.command, &cli.opts, mode),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if cli.opts.json {
                println!("{}", json!({ "error": f.message, "exit": f.code }));
            } else {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn parse_mode(words: &[String]) -> Result<CalcMode, Failure> {
    match words {
        [c, s] => CalcMode::from_words(c, s)
            .ok_or_else(|| Failure::input(format!("unknown mode `{c} {s}`; expected abortive|delimited cbv|cbn"))),
        _ => Err(Failure::input("--mode takes two values")),
    }
}

fn run(cmd: &Command, opts: &Opts, mode: Option<CalcMode>) -> CmdResult {
    match cmd {
        Command::Check { file } => check(&load(file, mode)?, opts),
        Command::Eval { file } => eval(&load(file, mode)?, opts),
        Command::Trace { file } => trace_cmd(&load(file, mode)?, opts),
        Command::Step { n, file } => step_cmd(&load(file, mode)?, *n, opts),
        Command::Decompose { file } => decompose_cmd(&load(file, mode)?, opts),
        Command::Fuzz => fuzz(opts, mode),
    }
}

fn load(path: &str, mode: Option<CalcMode>) -> Result<Program, Failure> {
    let text = if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::input(format!("reading stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Failure::input(format!("{path}: {e}")))?
    };
    let parsed = match mode {
        Some(m) => parse_source_as(&text, m),
        None => parse_source(&text, None),
    };
    let src = parsed.map_err(|e| Failure::input(format!("{path}: {e}")))?;
    Ok(Program::new(src.mode, src.term))
}

fn emit(opts: &Opts, value: Value, text: impl FnOnce() -> String) {
    if opts.json {
        println!("{}", serde_json::to_string_pretty(&value).expect("json output serializes"));
    } else {
        print!("{}", text());
    }
}

fn check(p: &Program, opts: &Opts) -> CmdResult {
    match check_program(&p.term, p.mode) {
        Ok(ty) => {
            let ty = pretty_type(&ty);
            emit(opts, json!({ "mode": p.mode.to_string(), "type": ty }), || format!("{ty}\n"));
            Ok(EXIT_OK)
        }
        Err(e) => Err(Failure::input(format!("type error: {e}"))),
    }
}

fn outcome_code(o: &Outcome) -> u8 {
    match o {
        Outcome::Normalized { .. } => EXIT_OK,
        Outcome::Stuck { .. } => EXIT_STUCK,
        Outcome::FuelExhausted { .. } => EXIT_FUEL,
    }
}

fn machine_code(o: &MachineOutcome) -> u8 {
    match o {
        MachineOutcome::Normalized { .. } => EXIT_OK,
        MachineOutcome::Stuck { .. } => EXIT_STUCK,
        MachineOutcome::FuelExhausted { .. } => EXIT_FUEL,
    }
}

fn outcome_json(o: &Outcome) -> Value {
    match o {
        Outcome::Normalized { value, steps } => json!({ "outcome": outcome_class(o), "value": pretty(value), "steps": steps }),
        Outcome::FuelExhausted { last, steps } => {
            json!({ "outcome": outcome_class(o), "last": pretty(last), "steps": steps })
        }
        Outcome::Stuck { stuck, at, steps } => json!({
            "outcome": outcome_class(o), "reason": stuck.reason.to_string(), "at": pretty(at), "steps": steps
        }),
    }
}

fn outcome_text(o: &Outcome) -> String {
    match o {
        Outcome::Normalized { value, steps } => format!("{}\nsteps: {steps}\n", pretty(value)),
        Outcome::FuelExhausted { last, steps } => format!("fuel exhausted after {steps} steps\n{}\n", pretty(last)),
        Outcome::Stuck { stuck, at, steps } => format!("stuck after {steps} steps: {}\n{}\n", stuck.reason, pretty(at)),
    }
}

fn machine_json(o: &MachineOutcome) -> Value {
    match o {
        MachineOutcome::Normalized { value, transitions, max_frames } => json!({
            "outcome": machine_class(o), "value": pretty(value), "transitions": transitions, "max_frames": max_frames
        }),
        MachineOutcome::FuelExhausted { transitions } => json!({ "outcome": machine_class(o), "transitions": transitions }),
        MachineOutcome::Stuck { reason, transitions } => {
            json!({ "outcome": machine_class(o), "reason": reason.to_string(), "transitions": transitions })
        }
    }
}

fn machine_text(o: &MachineOutcome) -> String {
    match o {
        MachineOutcome::Normalized { value, transitions, .. } => format!("{}\ntransitions: {transitions}\n", pretty(value)),
        MachineOutcome::FuelExhausted { transitions } => format!("fuel exhausted after {transitions} transitions\n"),
        MachineOutcome::Stuck { reason, transitions } => format!("stuck after {transitions} transitions: {reason}\n"),
    }
}

/// The machine gets ten transitions per reduction step of fuel.
fn machine_fuel(fuel: u64) -> u64 {
    fuel.saturating_mul(10)
}

fn eval(p: &Program, opts: &Opts) -> CmdResult {
    match opts.engine {
        Engine::Reduction => {
            let o = evaluate(p, opts.fuel);
            emit(opts, outcome_json(&o), || outcome_text(&o));
            Ok(outcome_code(&o))
        }
        Engine::Machine => {
            let m = machine_eval(p, machine_fuel(opts.fuel));
            emit(opts, machine_json(&m), || machine_text(&m));
            Ok(machine_code(&m))
        }
        Engine::Both => {
            let o = evaluate(p, opts.fuel);
            let m = machine_eval(p, machine_fuel(opts.fuel));
            let agree = agreement(&o, &m);
            let verdict = match &agree {
                Ok(()) => "engines agree".to_string(),
                Err(e) => format!("engines disagree: {e}"),
            };
            emit(
                opts,
                json!({ "reduction": outcome_json(&o), "machine": machine_json(&m), "agree": agree.is_ok() }),
                || {
                    let mut s = outcome_text(&o);
                    if let MachineOutcome::Normalized { transitions, .. } = &m {
                        s += &format!("transitions: {transitions}\n");
                    } else {
                        s += &machine_text(&m);
                    }
                    s + &verdict + "\n"
                },
            );
            Ok(if agree.is_err() { EXIT_PROPERTY } else { outcome_code(&o) })
        }
    }
}

fn trace_cmd(p: &Program, opts: &Opts) -> CmdResult {
    match opts.engine {
        Engine::Reduction => {
            let tr = trace(p, opts.fuel);
            println!("{}", emit_trace(&tr));
            Ok(outcome_code(&tr.outcome))
        }
        Engine::Machine | Engine::Both => {
            let mut states: Vec<MachineState> = Vec::new();
            let m = machine_run(p, machine_fuel(opts.fuel), Some(&mut |s: &MachineState| states.push(s.clone())));
            let records: Vec<_> = states.iter().enumerate().map(|(i, s)| machine_record(i as u64, s)).collect();
            if opts.engine == Engine::Machine {
                println!("{}", serde_json::to_string_pretty(&records).expect("machine records serialize"));
                return Ok(machine_code(&m));
            }
            let tr = trace(p, opts.fuel);
            let reduction: Value = serde_json::from_str(&emit_trace(&tr)).expect("trace is valid json");
            let agree = agreement(&tr.outcome, &m).is_ok();
            let out = json!({ "reduction": reduction, "machine": records, "agree": agree });
            println!("{}", serde_json::to_string_pretty(&out).expect("json output serializes"));
            Ok(if agree { outcome_code(&tr.outcome) } else { EXIT_PROPERTY })
        }
    }
}

fn step_cmd(p: &Program, n: u64, opts: &Opts) -> CmdResult {
    let mut cur = p.clone();
    let mut rules = Vec::new();
    for _ in 0..n {
        match step(&cur) {
            Step::Stepped(s) => {
                rules.push(s.rule.name());
                cur = Program::new(p.mode, s.after);
            }
            Step::Finished(_) => break,
            Step::Stuck(s) => {
                let program = pretty(&cur.term);
                emit(
                    opts,
                    json!({ "steps": rules.len(), "rules": rules, "program": program, "stuck": s.reason.to_string() }),
                    || format!("stuck after {} steps: {}\n{program}\n", rules.len(), s.reason),
                );
                return Ok(EXIT_STUCK);
            }
        }
    }
    let program = pretty(&cur.term);
    let finished = matches!(step(&cur), Step::Finished(_));
    emit(opts, json!({ "steps": rules.len(), "rules": rules, "program": program, "finished": finished }), || {
        format!("{program}\nsteps: {}{}\n", rules.len(), if finished { " (finished)" } else { "" })
    });
    Ok(EXIT_OK)
}

fn decompose_cmd(p: &Program, opts: &Opts) -> CmdResult {
    if opts.all {
        let all = enumerate_decompositions(p);
        let rows: Vec<Value> = all
            .iter()
            .map(|(t, e, f)| {
                json!({
                    "focus": pretty(t),
                    "context": pretty_context(e),
                    "metacontext": f.as_ref().map(pretty_metacontext),
                    "redex": redex_rule(t, p.mode).map(|r| r.name()),
                })
            })
            .collect();
        emit(opts, json!({ "count": all.len(), "decompositions": rows }), || {
            let mut s = format!("{} decompositions\n", all.len());
            for (i, (t, e, f)) in all.iter().enumerate() {
                let tag = redex_rule(t, p.mode).map_or(String::new(), |r| format!("  [redex {}]", r.name()));
                s += &format!("{i}: {}  in  {}", pretty(t), pretty_context(e));
                if let Some(f) = f {
                    s += &format!("  under  {}", pretty_metacontext(f));
                }
                s += &tag;
                s.push('\n');
            }
            s
        });
        return Ok(EXIT_OK);
    }
    match decompose(p) {
        Ok(d) => {
            let j = decomposition_json(&d);
            emit(opts, serde_json::to_value(&j).expect("decomposition serializes"), || {
                let kind = match &d.focus {
                    Focus::Redex(_, r) => format!("redex ({})", r.name()),
                    Focus::Value(_) => "value".into(),
                    Focus::ProgramValue(_) => "program value".into(),
                };
                let mut s = format!("kind: {kind}\nfocus: {}\ncontext: {}\n", j.focus, pretty_context(&d.context));
                if let Some(f) = &d.metacontext {
                    s += &format!("metacontext: {}\n", pretty_metacontext(f));
                }
                s
            });
            Ok(EXIT_OK)
        }
        Err(s) => Err(Failure { code: EXIT_STUCK, message: format!("stuck: {}", s.reason) }),
    }
}

fn fuzz(opts: &Opts, mode: Option<CalcMode>) -> CmdResult {
    let modes: Vec<CalcMode> = mode.map_or_else(|| CalcMode::ALL.to_vec(), |m| vec![m]);
    let reports: Vec<SuiteReport> = modes
        .into_iter()
        .map(|m| {
            let mut gen = GenConfig::new(m, opts.seed);
            gen.count = opts.count;
            gen.max_depth = opts.depth;
            let mut cfg = SuiteConfig::new(gen);
            cfg.fuel = opts.fuel;
            cfg.machine_fuel = machine_fuel(opts.fuel);
            run_suite(&cfg)
        })
        .collect();
    let ok = reports.iter().all(SuiteReport::all_passed);
    if opts.json {
        let stable: Vec<SuiteReport> = reports.into_iter().map(SuiteReport::without_timings).collect();
        let value = if stable.len() == 1 {
            serde_json::to_value(&stable[0])
        } else {
            serde_json::to_value(&stable)
        };
        println!("{}", serde_json::to_string_pretty(&value.expect("report serializes")).expect("json output serializes"));
    } else {
        for r in &reports {
            print!("{r}");
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_PROPERTY })
}
