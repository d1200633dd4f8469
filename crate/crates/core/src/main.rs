use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use gapforge::analytic::{
    self, ExponentRange, PairSelection, SieveTable, DEFAULT_RHO_BUDGET, DEFAULT_SEGMENT_BUDGET,
    DEFAULT_SIEVE_LIMIT,
};
use gapforge::cxfile::{self, CxFile};
use gapforge::forge::{
    self, ForgePolicy, SearchMethod, VerifyBudgets, VerifyLevel, DEFAULT_EXHAUSTIVE_BUDGET,
    DEFAULT_MAX_CANDIDATES, DEFAULT_SAMPLE_PAIRS, DEFAULT_WITNESS_BUDGET,
};
use gapforge::modmath::{find_root_of_unity, PrimeField, PrimeFieldCtx, FIELD_MR_ROUNDS};
use gapforge::params::{check_identities, derive_params, ParamSet, Profile, RateSpec};
use gapforge::ratio::parse_rational;
use gapforge::rscode::DEFAULT_ORACLE_BUDGET;

const EXIT_PARAM: u8 = 2;
const EXIT_SEARCH: u8 = 3;
const EXIT_FORMAT: u8 = 4;
const EXIT_VERIFY: u8 = 5;

/// Forge and verify Reed-Solomon lines with many close points and no
/// correlated agreement.
///
/// Exit codes: 0 pass, 2 parameter error, 3 search failure, 4 format error,
/// 5 verification failure.
#[derive(Parser)]
#[command(name = "gapforge", version)]
struct Cli {
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Derive the parameter set and print it as JSON.
    DeriveParams(ParamArgs),
    /// Build a counterexample file.
    Forge(ForgeArgs),
    /// Re-verify a counterexample file and print the report as JSON.
    Verify(VerifyArgs),
    /// Stand-alone audits of the counting bounds.
    #[command(subcommand)]
    Audit(AuditCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Strict,
    Desk,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Exponent C in the n^C target, as "a/b", an integer or a decimal.
    #[arg(long = "C", default_value = "1")]
    c: String,
    /// Rate numerator u in u/2^v.
    #[arg(long)]
    u: Option<u64>,
    /// Rate exponent v in u/2^v.
    #[arg(long)]
    v: Option<u32>,
    /// s = 2^alpha.
    #[arg(long)]
    alpha: Option<u32>,
    #[arg(long, value_enum, default_value = "strict")]
    profile: ProfileArg,
    /// Coset size m, desk profile only.
    #[arg(long)]
    m: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Random,
    Sequential,
}

#[derive(Args)]
struct ForgeArgs {
    /// Parameter JSON as printed by derive-params; overrides inline flags.
    #[arg(long)]
    params_file: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "random")]
    method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_MAX_CANDIDATES)]
    max_candidates: u64,
    /// Cap on witnesses beyond the n^C floor.
    #[arg(long, default_value_t = DEFAULT_WITNESS_BUDGET)]
    witness_budget: u64,
    /// Largest C(s/2, r) audited exhaustively.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_BUDGET)]
    exhaustive_budget: u64,
    /// Random subset pairs for a sampled sum audit.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_PAIRS)]
    sample_pairs: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Witness,
    Exhaustive,
    Oracle,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "witness")]
    level: LevelArg,
    /// Largest p^(k+1) searched by the brute-force oracles.
    #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
    oracle_budget: u64,
    /// Largest C(s/2, r) re-audited exhaustively.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_BUDGET)]
    exhaustive_budget: u64,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    s: u64,
    #[arg(long)]
    r: usize,
    /// Sample this many subset pairs instead of the default selection.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw exponents from [0, s) instead of [0, s/2).
    #[arg(long)]
    full_range: bool,
}

impl PairArgs {
    fn range(&self) -> ExponentRange {
        if self.full_range {
            ExponentRange::Full
        } else {
            ExponentRange::Half
        }
    }

    fn selection(&self) -> PairSelection {
        match self.samples {
            Some(count) => PairSelection::Sampled { count, seed: self.seed },
            None => PairSelection::default_for(self.s, self.range()),
        }
    }
}

#[derive(Subcommand)]
enum AuditCmd {
    /// Distinctness of r-subset sums of xi^e, e in [0, s/2), over F_p.
    Sums {
        #[arg(long)]
        s: u64,
        #[arg(long)]
        r: usize,
        /// Decimal prime with p = 1 mod s.
        #[arg(long)]
        p: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_BUDGET)]
        exhaustive_budget: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_PAIRS)]
        sample_pairs: u64,
    },
    /// |Res(Phi_s, Q)| <= (2r)^(s/2) by two independent routes.
    Resultant(PairArgs),
    /// Prime factors of the resultants inside [4^s, 8^s].
    BadPrimes {
        #[command(flatten)]
        pairs: PairArgs,
        /// Pollard-rho iterations per factor.
        #[arg(long, default_value_t = DEFAULT_RHO_BUDGET)]
        rho_budget: u64,
    },
    /// theta(x; n, a) and psi(x; n, a).
    Theta {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        a: u64,
        /// Largest x accepted.
        #[arg(long, default_value_t = DEFAULT_SIEVE_LIMIT)]
        sieve_limit: u64,
    },
    /// Count of primes p = 1 mod n in [4^s, 8^s] against its lower bound.
    #[command(name = "t-bound", alias = "T-bound")]
    TBound {
        #[arg(long)]
        s: u64,
        #[arg(long)]
        n: u64,
        /// Largest interval end the segmented sieve may reach.
        #[arg(long, default_value_t = DEFAULT_SEGMENT_BUDGET)]
        segment_budget: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

fn print_json<T: Serialize>(value: &T) {
    let text = serde_json::to_string_pretty(value).expect("plain data serializes");
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn params_from_args(args: &ParamArgs) -> Result<ParamSet, Failure> {
    let c = parse_rational(&args.c).ok_or_else(|| fail(EXIT_PARAM, format!("bad --C {:?}", args.c)))?;
    let (Some(u), Some(v), Some(alpha)) = (args.u, args.v, args.alpha) else {
        return Err(fail(EXIT_PARAM, "--u, --v and --alpha are required"));
    };
    let rate = RateSpec::new(u, v).map_err(|e| fail(EXIT_PARAM, e.to_string()))?;
    let profile = match args.profile {
        ProfileArg::Strict => Profile::Strict,
        ProfileArg::Desk => Profile::Desk,
    };
    derive_params(c, rate, alpha, profile, args.m).map_err(|e| {
        let names = e.constraint_names();
        let msg = if names.is_empty() { e.to_string() } else { names.join("\n") };
        fail(EXIT_PARAM, msg)
    })
}

fn cmd_derive_params(args: &ParamArgs) -> Result<(), Failure> {
    let ps = params_from_args(args)?;
    let mut value = serde_json::to_value(&ps).expect("plain data serializes");
    value["identities"] = serde_json::to_value(check_identities(&ps)).expect("plain data serializes");
    print_json(&value);
    Ok(())
}

fn cmd_forge(args: &ForgeArgs) -> Result<(), Failure> {
    let ps = match &args.params_file {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| fail(EXIT_PARAM, format!("{}: {e}", path.display())))?;
            let stored: ParamSet = serde_json::from_str(&text)
                .map_err(|e| fail(EXIT_PARAM, format!("{}: {e}", path.display())))?;
            let fresh = stored.rederive().map_err(|e| fail(EXIT_PARAM, e.to_string()))?;
            if fresh != stored {
                return Err(fail(EXIT_PARAM, "params file disagrees with its own derivation"));
            }
            fresh
        }
        None => params_from_args(&args.params)?,
    };
    let policy = ForgePolicy {
        max_candidates: args.max_candidates,
        method: match args.method {
            MethodArg::Random => SearchMethod::Random,
            MethodArg::Sequential => SearchMethod::Sequential,
        },
        exhaustive_budget: args.exhaustive_budget,
        sample_pairs: args.sample_pairs,
        witness_budget: args.witness_budget,
        mr_rounds: FIELD_MR_ROUNDS,
    };
    let cx = forge::build_counterexample(&ps, args.seed, &policy).map_err(|e| {
        let code = if e.is_param_error() {
            EXIT_PARAM
        } else if e.is_search_failure() {
            EXIT_SEARCH
        } else {
            EXIT_VERIFY
        };
        fail(code, e.to_string())
    })?;
    eprintln!(
        "p = {} ({} bits), {} witnesses, {} candidates tried",
        cx.prime,
        cx.prime.bits(),
        cx.z_count,
        cx.prime_search.candidates_tried
    );
    let text = cxfile::serialize(&CxFile::new(cx));
    match &args.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| fail(EXIT_FORMAT, format!("{}: {e}", path.display())))?,
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.file)
        .map_err(|e| fail(EXIT_FORMAT, format!("{}: {e}", args.file.display())))?;
    let file = cxfile::parse(&text).map_err(|e| fail(EXIT_FORMAT, e.to_string()))?;
    let level = match args.level {
        LevelArg::Witness => VerifyLevel::Witness,
        LevelArg::Exhaustive => VerifyLevel::Exhaustive,
        LevelArg::Oracle => VerifyLevel::Oracle,
    };
    let budgets = VerifyBudgets { oracle: args.oracle_budget, exhaustive: args.exhaustive_budget };
    let report = forge::verify_counterexample(&file.instance, level, &budgets);
    print_json(&report);
    if report.passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(fail(EXIT_VERIFY, format!("failed checks: {}", names.join(", "))))
    }
}

fn verdict(passed: bool, what: &str) -> Result<(), Failure> {
    if passed {
        Ok(())
    } else {
        Err(fail(EXIT_VERIFY, format!("{what} audit failed")))
    }
}

fn cmd_audit(cmd: &AuditCmd) -> Result<(), Failure> {
    let param = |e: analytic::AnalyticError| fail(EXIT_PARAM, e.to_string());
    match cmd {
        AuditCmd::Sums { s, r, p, seed, exhaustive_budget, sample_pairs } => {
            let p: BigUint = p.parse().map_err(|_| fail(EXIT_PARAM, format!("bad --p {p:?}")))?;
            let field = Arc::new(PrimeField::new(&p).map_err(|e| fail(EXIT_PARAM, e.to_string()))?);
            let mut rng = ChaCha20Rng::seed_from_u64(*seed);
            let xi = find_root_of_unity(&field, *s, &mut rng).map_err(|e| fail(EXIT_PARAM, e.to_string()))?;
            let ctx = PrimeFieldCtx::new(field, *s as usize, xi, 1).map_err(|e| fail(EXIT_PARAM, e.to_string()))?;
            let audit = forge::audit_subset_sums(&ctx, *r, *exhaustive_budget, *sample_pairs, *seed)
                .map_err(|e| fail(EXIT_PARAM, e.to_string()))?;
            print_json(&audit);
            verdict(audit.collisions_found == 0, "sums")
        }
        AuditCmd::Resultant(pairs) => {
            let audit = analytic::audit_resultant_bound(pairs.s, pairs.r, pairs.range(), pairs.selection())
                .map_err(param)?;
            print_json(&audit);
            verdict(audit.passed, "resultant")
        }
        AuditCmd::BadPrimes { pairs, rho_budget } => {
            let audit =
                analytic::audit_bad_primes(pairs.s, pairs.r, pairs.range(), pairs.selection(), *rho_budget)
                    .map_err(param)?;
            print_json(&audit);
            verdict(audit.passed, "bad-prime")
        }
        AuditCmd::Theta { x, n, a, sieve_limit } => {
            if x > sieve_limit {
                return Err(fail(EXIT_PARAM, format!("x = {x} exceeds sieve limit {sieve_limit}")));
            }
            let table = SieveTable::new(*x);
            let theta = table.theta(*x, *n, *a).map_err(param)?;
            let psi = table.psi(*x, *n, *a).map_err(param)?;
            print_json(&serde_json::json!({ "x": x, "n": n, "a": a, "theta": theta, "psi": psi }));
            Ok(())
        }
        AuditCmd::TBound { s, n, segment_budget } => {
            let report = analytic::audit_t_lower_bound(*s, *n, *segment_budget).map_err(param)?;
            print_json(&report);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .expect("thread pool configured once");
    }
    let result = match &cli.cmd {
        Cmd::DeriveParams(args) => cmd_derive_params(args),
        Cmd::Forge(args) => cmd_forge(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Audit(cmd) => cmd_audit(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
