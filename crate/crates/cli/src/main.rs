use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use starcyl::algebra::{refine, sieve};
use starcyl::io::{load, LoadOptions, StoredDatabase};
use starcyl::naive::{certain_membership_bruteforce, rep_containment_db};
use starcyl::oracle::differential;
use starcyl::{cyl_dominates, dominates, evaluate_query, parse_query, Const, EvalContext, EvalOptions, Error, StarTuple};

mod render;

#[derive(Parser)]
#[command(name = "starcyl", version, about = "Query star-cylinder databases with universal and existential nulls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DbArgs {
    /// Database file.
    #[arg(long)]
    db: PathBuf,
    /// Reject unsatisfiable rows instead of skipping them.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a query and print the answer star-relation.
    Eval {
        #[command(flatten)]
        db: DbArgs,
        #[arg(long)]
        query: String,
        /// Print the condition column.
        #[arg(long)]
        show_conditions: bool,
        #[arg(long)]
        json: bool,
    },
    /// Is a constant tuple in the answer?
    Member {
        #[command(flatten)]
        db: DbArgs,
        #[arg(long)]
        query: String,
        /// Comma-separated constants.
        #[arg(long)]
        tuple: String,
        /// Certain membership over every possible world of the existential nulls.
        #[arg(long)]
        certain: bool,
        /// Most existential nulls to enumerate for --certain.
        #[arg(long, default_value_t = 8)]
        budget: usize,
    },
    /// Is the left database contained in the right one, relation by relation?
    Contains {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// Compare the sets of possible worlds of naive databases.
        #[arg(long)]
        rep: bool,
        #[arg(long, default_value_t = 8)]
        budget: usize,
        #[arg(long)]
        strict: bool,
    },
    /// Compare evaluation against the brute-force finite-model semantics.
    OracleCheck {
        #[command(flatten)]
        db: DbArgs,
        #[arg(long)]
        query: String,
        /// Fresh values added to the active domain (default: query dimension + 1).
        #[arg(long)]
        fresh: Option<usize>,
    },
    /// Print the sieve for a dimension and a set of constants.
    Sieve {
        #[arg(long)]
        n: usize,
        /// Comma-separated constants.
        #[arg(long, default_value = "")]
        consts: String,
    },
}

enum Failure {
    Lib(Error),
    Mismatch,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Load { .. } => 2,
        Error::Budget(_) => 4,
        Error::Io(_) => 1,
        _ => 3,
    }
}

fn open(path: &PathBuf, strict: bool) -> Result<StoredDatabase, Error> {
    let loaded = load(path, LoadOptions { strict })?;
    for w in &loaded.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(loaded.db)
}

fn split_list(s: &str) -> Vec<Const> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(Const::new)
        .collect()
}

fn no_nulls(db: &StoredDatabase, hint: &str) -> Result<(), Error> {
    if db.has_nulls() {
        return Err(Error::Semantic(format!("the database has existential nulls; {hint}")));
    }
    Ok(())
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Eval {
            db,
            query,
            show_conditions,
            json,
        } => {
            let stored = open(&db.db, db.strict)?;
            let q = parse_query(&query, &stored.schema)?;
            let ev = evaluate_query(&q, &stored.schema, &stored.relations, &EvalOptions::default())?;
            if json {
                println!("{}", render::json(&q, &ev.answer));
            } else {
                print!("{}", render::table(&q, &ev.answer, show_conditions));
            }
        }
        Command::Member {
            db,
            query,
            tuple,
            certain,
            budget,
        } => {
            let stored = open(&db.db, db.strict)?;
            let q = parse_query(&query, &stored.schema)?;
            let t = split_list(&tuple);
            if t.len() != q.head.len() {
                return Err(Error::Semantic(format!(
                    "--tuple has {} values, the query returns {} columns",
                    t.len(),
                    q.head.len()
                ))
                .into());
            }
            let yes = if certain {
                certain_membership_bruteforce(&t, &q, &stored.schema, &stored.relations, budget)?
            } else {
                no_nulls(&stored, "use --certain")?;
                let ev = evaluate_query(&q, &stored.schema, &stored.relations, &EvalOptions::default())?;
                let probe = StarTuple::ground(&t);
                let mut found = false;
                for u in &ev.answer {
                    if dominates(&probe, u)? {
                        found = true;
                        break;
                    }
                }
                found
            };
            println!("{}", if yes { "yes" } else { "no" });
        }
        Command::Contains {
            left,
            right,
            rep,
            budget,
            strict,
        } => {
            let l = open(&left, strict)?;
            let r = open(&right, strict)?;
            let shape = |db: &StoredDatabase| db.schema.iter().map(|(n, a)| (n.to_string(), a)).collect::<Vec<_>>();
            if shape(&l) != shape(&r) {
                return Err(Error::Semantic("the two databases have different schemas".into()).into());
            }
            let yes = if rep {
                rep_containment_db(&l.relations, &r.relations, budget)?
            } else {
                no_nulls(&l, "use --rep")?;
                no_nulls(&r, "use --rep")?;
                let mut all = true;
                for (x, y) in l.relations.iter().zip(&r.relations) {
                    let adom: BTreeSet<Const> = x.constants().into_iter().chain(y.constants()).collect();
                    let ctx = EvalContext::new(x.dim(), adom);
                    if !cyl_dominates(&refine(&ctx, x)?, &refine(&ctx, y)?)? {
                        all = false;
                        break;
                    }
                }
                all
            };
            println!("{}", if yes { "yes" } else { "no" });
        }
        Command::OracleCheck { db, query, fresh } => {
            let stored = open(&db.db, db.strict)?;
            no_nulls(&stored, "the oracle compares null-free databases only")?;
            let q = parse_query(&query, &stored.schema)?;
            let d = differential(&q, &stored.schema, &stored.relations, fresh)?;
            if d.agrees() {
                println!(
                    "PASS: {} answer tuples agree over a universe of {} values",
                    d.got.len(),
                    d.universe.len()
                );
            } else {
                println!("FAIL over a universe of {} values", d.universe.len());
                for t in d.got.difference(&d.expected).take(5) {
                    println!("  only in star evaluation: {}", render::plain(t));
                }
                for t in d.expected.difference(&d.got).take(5) {
                    println!("  only in the oracle: {}", render::plain(t));
                }
                return Err(Failure::Mismatch);
            }
        }
        Command::Sieve { n, consts } => {
            if n > EvalOptions::default().max_sieve_dim {
                return Err(Error::Budget(format!("sieve dimension {n} is above the cap")).into());
            }
            let ctx = EvalContext::new(n, split_list(&consts));
            for t in sieve(&ctx) {
                println!("{}", starcyl::io::format_row(t));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Mismatch) => ExitCode::from(5),
    }
}
