use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::json;

use vasskit::families::{
    fraction_sequence, gen_2exp, gen_2exp_fixed, gen_exp, gen_exp_fixed, gen_hp, gen_initializer,
    gen_np, gen_weak, gen_weak_mult, NpInstance,
};
use vasskit::lang::{self, print_flat, print_program, CounterProgram};
use vasskit::report::measure;
use vasskit::search::{shortest_halting, SearchBudget, Verdict};
use vasskit::vass::{is_flat, vass_size, Encoding, Vass, DEFAULT_CYCLE_BUDGET};
use vasskit::verify::{run_suite, VerifyConfig};

const OK: u8 = 0;
const FAILED: u8 = 1;
const USAGE: u8 = 2;
const BUDGET: u8 = 3;

/// Counter programs, VASS reachability instances and the hard families.
///
/// Exit codes: 0 success or reachable, 1 property failure or unreachable
/// within the bound, 2 usage error, 3 search budget exceeded.
#[derive(Parser)]
#[command(name = "vasskit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Enc {
    Unary,
    Binary,
}

impl From<Enc> for Encoding {
    fn from(e: Enc) -> Self {
        match e {
            Enc::Unary => Encoding::Unary,
            Enc::Binary => Encoding::Binary,
        }
    }
}

#[derive(Args)]
struct SearchArgs {
    /// Largest value any counter may take during the search.
    #[arg(long, default_value_t = 20)]
    bound: u64,
    /// Give up after storing this many configurations.
    #[arg(long, default_value_t = SearchBudget::DEFAULT_MAX_CONFIGS)]
    max_configs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a family member as .cp text (or compiled VASS JSON with --format json).
    Gen {
        #[command(subcommand)]
        family: Family,
    },
    /// Compile a .cp program (file or stdin) to VASS JSON; text format prints a summary.
    Compile {
        input: Option<PathBuf>,
        /// Encoding used for the size in the text summary.
        #[arg(long, value_enum, default_value_t = Enc::Unary)]
        encoding: Enc,
    },
    /// Expand macros and print the numbered flat program.
    Expand { input: Option<PathBuf> },
    /// Decide flatness of a .cp program or VASS JSON. Exits 1 when not flat.
    Flat { input: Option<PathBuf> },
    /// Search for a shortest halting run within a counter bound.
    Solve {
        input: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Tabulate sizes and run lengths over a parameter range.
    Measure {
        /// One of exp, 2exp, np, weak, hp.
        family: String,
        #[arg(long, default_value_t = 1)]
        from: u64,
        #[arg(long, default_value_t = 3)]
        to: u64,
        #[arg(long, default_value_t = SearchBudget::DEFAULT_MAX_CONFIGS)]
        max_configs: usize,
        /// Add a wall-clock column (makes output nondeterministic).
        #[arg(long)]
        timing: bool,
    },
    /// Run a property suite: arith, weakmult, weak, exp, np, fractions, hp, 2exp or all.
    Verify {
        suite: String,
        #[arg(long, default_value_t = VerifyConfig::DEFAULT_MAX_CONFIGS)]
        max_configs: usize,
        /// Seed the np corpus with a broken reduction (negative control).
        #[arg(long)]
        inject_mutant: bool,
        /// Largest Subset-Sum set size in the np corpus.
        #[arg(long, default_value_t = 2)]
        np_max_k: usize,
    },
    /// Print and check the fraction sequence for k.
    Fractions {
        #[arg(long)]
        k: u32,
    },
}

#[derive(Subcommand)]
enum Family {
    /// Exponential family P_n.
    Exp {
        #[arg(long)]
        n: u64,
        /// Replace the pump by fixed initial values x = y = X0.
        #[arg(long)]
        x0: Option<u64>,
    },
    /// Subset-Sum reduction.
    Np {
        #[arg(long)]
        s0: u64,
        /// Comma-separated positive values.
        #[arg(long, value_delimiter = ',', required = true)]
        set: Vec<u64>,
        /// Only the initializer, halting on y.
        #[arg(long)]
        initializer: bool,
    },
    /// Doubly-exponential family V_k.
    #[command(name = "2exp")]
    TwoExp {
        #[arg(long)]
        k: u32,
        /// Replace the pump by fixed initial values t = x = PUMP.
        #[arg(long)]
        pump: Option<BigInt>,
    },
    /// Hopcroft-Pansiot fragment.
    Hp {
        #[arg(long)]
        c: u64,
        #[arg(long)]
        d: u64,
    },
    /// Weak computation of b.
    Weak {
        #[arg(long)]
        b: u64,
    },
    /// Weak multiplication fragment.
    Weakmult {
        #[arg(long)]
        c: u64,
        #[arg(long)]
        d: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(m: impl ToString) -> Failure {
    Failure {
        code: USAGE,
        message: m.to_string(),
    }
}

fn read_input(p: &Option<PathBuf>) -> Result<String, Failure> {
    match p {
        Some(p) if p.as_os_str() != "-" => {
            fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(usage)?;
            Ok(s)
        }
    }
}

/// A VASS from JSON or from .cp text.
fn read_vass(p: &Option<PathBuf>) -> Result<Vass, Failure> {
    let text = read_input(p)?;
    if text.trim_start().starts_with('{') {
        Vass::from_json(&text).map_err(usage)
    } else {
        Ok(lang::build_text(&text).map_err(usage)?.compiled.vass)
    }
}

fn generate(f: &Family) -> Result<CounterProgram, Failure> {
    let r = match f {
        Family::Exp { n, x0: None } => gen_exp(*n),
        Family::Exp { n, x0: Some(x0) } => gen_exp_fixed(*n, *x0),
        Family::Np {
            s0,
            set,
            initializer,
        } => NpInstance::new(*s0, set.clone()).map(|inst| {
            if *initializer {
                gen_initializer(&inst, true)
            } else {
                gen_np(&inst)
            }
        }),
        Family::TwoExp { k, pump: None } => gen_2exp(*k).map(|(p, _)| p),
        Family::TwoExp { k, pump: Some(n) } => gen_2exp_fixed(*k, n).map(|(p, _)| p),
        Family::Hp { c, d } => gen_hp(*c, *d),
        Family::Weak { b } => gen_weak(*b),
        Family::Weakmult { c, d } => gen_weak_mult(*c, *d),
    };
    r.map_err(usage)
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn run(cli: &Cli) -> Result<(String, u8), Failure> {
    let json = cli.format == Format::Json;
    Ok(match &cli.command {
        Command::Gen { family } => {
            let p = generate(family)?;
            if json {
                let art = lang::build(&p).map_err(|e| usage(format!("{e} (fragments have no VASS)")))?;
                (art.compiled.vass.to_json() + "\n", OK)
            } else {
                (print_program(&p), OK)
            }
        }
        Command::Compile { input, encoding } => {
            let art = lang::build_text(&read_input(input)?).map_err(usage)?;
            let v = &art.compiled.vass;
            if json {
                (v.to_json() + "\n", OK)
            } else {
                let s = format!(
                    "dimension {}\nstates {}\ntransitions {}\nsize {}\n",
                    v.dimension,
                    v.states.len(),
                    v.transitions.len(),
                    vass_size(v, (*encoding).into())
                );
                (s, OK)
            }
        }
        Command::Expand { input } => {
            let p = lang::parse(&read_input(input)?).map_err(usage)?;
            let e = lang::expand(&p).map_err(usage)?;
            (print_flat(&e.program), OK)
        }
        Command::Flat { input } => {
            let v = read_vass(input)?;
            let r = is_flat(&v, DEFAULT_CYCLE_BUDGET).map_err(|e| Failure {
                code: BUDGET,
                message: e.to_string(),
            })?;
            let code = if r.is_flat { OK } else { FAILED };
            if json {
                (pretty(&serde_json::to_value(&r).expect("serializable")), code)
            } else {
                let mut s = format!("flat: {}\ncycles: {}\n", r.is_flat, r.cycles_seen);
                if let Some((a, b)) = &r.witness {
                    let show = |c: &Vec<vasskit::Transition>| {
                        c.iter().map(|t| format!("{}->{}", t.from, t.to)).collect::<Vec<_>>().join(" ")
                    };
                    s += &format!("witness: {}\n     and: {}\n", show(a), show(b));
                }
                (s, code)
            }
        }
        Command::Solve { input, search } => {
            let v = read_vass(input)?;
            let b = SearchBudget::new(search.bound).with_max_configs(search.max_configs);
            let r = shortest_halting(&v, &b).map_err(usage)?;
            let code = match r.verdict {
                Verdict::Found(_) => OK,
                Verdict::ExhaustedWithinBound => FAILED,
                Verdict::BudgetExceeded => BUDGET,
            };
            if json {
                (pretty(&serde_json::to_value(&r).expect("serializable")), code)
            } else {
                let head = match &r.verdict {
                    Verdict::Found(run) => format!("found run of length {}\n", run.len()),
                    Verdict::ExhaustedWithinBound => format!("no halting run within bound {}\n", search.bound),
                    Verdict::BudgetExceeded => format!("budget of {} configurations exceeded\n", search.max_configs),
                };
                let mut s = head;
                if let Some(run) = r.run() {
                    let names: Vec<String> = run.steps().iter().map(|&t| {
                        let t = &v.transitions[t];
                        format!("{}->{}", t.from, t.to)
                    }).collect();
                    s += &format!("run: {}\n", names.join(" "));
                }
                s += &format!(
                    "expanded {} stored {} depth {} pruned {}\n",
                    r.stats.expanded, r.stats.stored, r.stats.depth_reached, r.stats.pruned
                );
                (s, code)
            }
        }
        Command::Measure {
            family,
            from,
            to,
            max_configs,
            timing,
        } => {
            if from > to {
                return Err(usage("--from must not exceed --to"));
            }
            let params: Vec<u64> = (*from..=*to).collect();
            let budget = SearchBudget::new(0).with_max_configs(*max_configs);
            let rep = measure(family, &params, &budget, *timing).map_err(usage)?;
            if json {
                (pretty(&serde_json::to_value(&rep).expect("serializable")), OK)
            } else {
                (rep.to_text(), OK)
            }
        }
        Command::Verify {
            suite,
            max_configs,
            inject_mutant,
            np_max_k,
        } => {
            let cfg = VerifyConfig {
                max_configs: *max_configs,
                np_mutant: *inject_mutant,
                np_max_k: *np_max_k,
            };
            let results = run_suite(suite, &cfg).ok_or_else(|| usage(format!("unknown suite {suite:?}")))?;
            let passed = results.iter().all(|r| r.passed);
            let code = if passed { OK } else { FAILED };
            if json {
                (pretty(&json!({ "passed": passed, "suites": results })), code)
            } else {
                let mut s = String::new();
                for r in &results {
                    for p in &r.properties {
                        let verdict = if p.passed { "PASS" } else { "FAIL" };
                        s += &format!("{verdict} {} / {} ({} cases)\n", r.suite, p.name, p.cases);
                        if let Some(c) = &p.counterexample {
                            s += &format!("  counterexample: {c}\n");
                        }
                    }
                }
                (s, code)
            }
        }
        Command::Fractions { k } => {
            let seq = fraction_sequence(*k).map_err(usage)?;
            let check = seq.check();
            let code = if check.is_ok() { OK } else { FAILED };
            if json {
                let mut v = serde_json::to_value(&seq).expect("serializable");
                v["check"] = json!(check.err().unwrap_or_else(|| "ok".into()));
                (pretty(&v), code)
            } else {
                let mut s = String::new();
                for (i, (r, f)) in seq.r.iter().zip(&seq.f_list).enumerate() {
                    s += &format!("r{} = {r}  f{} = {f}\n", i + 1, i + 1);
                }
                s += &format!("f = {}\ncheck: {}\n", seq.f, check.err().unwrap_or_else(|| "ok".into()));
                (s, code)
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, code)) => {
            let written = match &cli.out {
                Some(p) => fs::write(p, &text),
                None => io::stdout().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(USAGE);
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
