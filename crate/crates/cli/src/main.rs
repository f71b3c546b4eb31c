use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pfk_core::certify::{census_under_fixed_bases, check_decomposition, run_reference_suite, CertError, Certificate, FlipRule};
use pfk_core::exec::Exec;
use pfk_core::network::{brute_force_value, pfaffian_value, planar_spanning_tree_edge_order, validate_order, NetError, Network};
use pfk_core::polysys::{circuit_ideal, cogate_ideal, gate_ideal, IdealOptions, Mode};
use pfk_core::registry::named_basis;
use pfk_core::scalar::eps;
use pfk_core::tensor::{parse_tensor, BasisMatrix, EdgeId, Kind, Tensor};
use pfk_groebner::{basis_to_text, GbConfig, GbError, MonomialOrder, PolySystem};

#[derive(Parser)]
#[command(name = "pfk", version, about = "Pfaffian circuit evaluation, certificates and feasibility ideals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a network by brute-force contraction and/or its Pfaffian.
    Eval {
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        /// File holding the edge order sigma.
        #[arg(long)]
        order_file: Option<PathBuf>,
        net: PathBuf,
    },
    /// Print the planar spanning-tree edge order.
    Order { net: PathBuf },
    /// Write the feasibility ideal of a gate, cogate or network.
    Ideal(IdealArgs),
    /// Groebner basis of an ideal file in neutral format.
    Gb {
        #[arg(long, value_enum, default_value_t = Order::Degrevlex)]
        order: Order,
        #[arg(long)]
        max_pairs: Option<usize>,
        /// Wall-clock budget in seconds.
        #[arg(long)]
        timeout: Option<f64>,
        /// Print the basis polynomials.
        #[arg(long)]
        print: bool,
        ideal: PathBuf,
    },
    /// Verify certificates.
    Certify {
        #[arg(long, value_enum, conflicts_with = "net", required_unless_present = "net")]
        suite: Option<Suite>,
        #[arg(long)]
        net: Option<PathBuf>,
    },
    /// List 0/1 tensors that are Pfaffian under fixed bases.
    Census {
        #[arg(long)]
        arity: usize,
        /// Named basis (hadamard, tree-b, two-sat, identity) or a file of `[[..], [..]]` lines.
        #[arg(long, default_value = "hadamard")]
        basis: String,
        #[arg(long, value_enum, default_value_t = TensorKind::Gate)]
        kind: TensorKind,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check that a certified fragment decomposes a certified target.
    Decompose {
        #[arg(long)]
        target: String,
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        fragment: PathBuf,
        #[arg(long)]
        order_file: PathBuf,
        #[arg(long, value_enum, default_value_t = Rule::Checkerboard)]
        rule: Rule,
    },
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true))]
struct IdealArgs {
    #[arg(long, group = "source")]
    gate: Option<String>,
    #[arg(long, group = "source")]
    cogate: Option<String>,
    #[arg(long, group = "source")]
    net: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = IdealMode::Het)]
    mode: IdealMode,
    /// Fixed basis `k=[[a, b], [c, d]]`; repeatable.
    #[arg(long = "fix", value_parser = parse_fix)]
    fix: Vec<(usize, BasisMatrix)>,
    /// Drop removable inverse-scale factors.
    #[arg(long)]
    reduce: bool,
    #[arg(long, value_enum, default_value_t = Format::Neutral)]
    format: Format,
    /// Output path; `-` for stdout.
    #[arg(short, long, default_value = "-")]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Brute,
    Pfaffian,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Degrevlex,
    Lex,
    Deglex,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum TensorKind {
    Gate,
    Cogate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Checkerboard,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum IdealMode {
    Hom,
    Het,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Singular,
    Neutral,
}

/// Exit status plus message.
struct Failure {
    code: u8,
    msg: String,
}

const VERIFY: u8 = 1;
const USAGE: u8 = 2;
const BUDGET: u8 = 3;

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure { code, msg: msg.into() }
}

fn usage(msg: impl ToString) -> Failure {
    fail(USAGE, msg.to_string())
}

fn net_failure(path: &Path, e: NetError) -> Failure {
    match e {
        NetError::BudgetExceeded(_) => fail(BUDGET, e.to_string()),
        NetError::Parse { .. } => fail(USAGE, format!("{}: {e}", path.display())),
        other => fail(VERIFY, other.to_string()),
    }
}

fn cert_failure(e: CertError) -> Failure {
    match e {
        CertError::SizeLimit { .. } => fail(BUDGET, e.to_string()),
        CertError::Network(n) => net_failure(Path::new("-"), n),
        other => usage(other),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_net(path: &Path) -> Result<Network, Failure> {
    Network::parse(&read(path)?).map_err(|e| net_failure(path, e))
}

fn read_order(path: &Path) -> Result<Vec<EdgeId>, Failure> {
    let text = read(path)?;
    text.lines()
        .flat_map(|l| l.split('#').next().unwrap_or("").split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()))
        .map(|t| t.parse().map_err(|_| usage(format!("{}: bad edge `{t}`", path.display()))))
        .collect()
}

fn parse_fix(src: &str) -> Result<(usize, BasisMatrix), String> {
    let (k, m) = src.split_once('=').ok_or("expected k=[[a, b], [c, d]]")?;
    let k = k.trim().parse().map_err(|_| format!("bad basis index `{k}`"))?;
    let m = named_basis(m.trim()).map_or_else(|| BasisMatrix::parse(m).map_err(|e| e.to_string()), Ok)?;
    Ok((k, m))
}

fn parse_expr(src: &str, kind: Kind) -> Result<Tensor, Failure> {
    let t = parse_tensor(src).map_err(|e| usage(format!("`{src}`: {e}")))?;
    if t.kind() != kind {
        return Err(usage(format!("`{src}` must use {}", if kind == Kind::Gate { "kets" } else { "bras" })));
    }
    Ok(t)
}

fn eval(method: Method, order_file: Option<&Path>, path: &Path) -> Result<(), Failure> {
    let net = read_net(path)?;
    let brute = match method {
        Method::Brute | Method::Both => Some(brute_force_value(&net).map_err(|e| net_failure(path, e))?),
        Method::Pfaffian => None,
    };
    if let Some(v) = &brute {
        println!("brute {v}");
    }
    if let Method::Brute = method {
        return Ok(());
    }
    let cn = net.certified().map_err(|e| net_failure(path, e))?;
    let sigma = match order_file {
        Some(f) => read_order(f)?,
        None => match &net.order {
            Some(s) => s.clone(),
            None => planar_spanning_tree_edge_order(&net).map_err(|e| net_failure(path, e))?,
        },
    };
    validate_order(&net, &sigma).map_err(|e| net_failure(path, e))?;
    let pf = pfaffian_value(&cn, &sigma).map_err(|e| net_failure(path, e))?;
    println!("pfaffian {pf}");
    if let Some(b) = brute {
        let diff = pf.dist(&b);
        println!("diff {diff:.3e}");
        if diff > eps() * b.abs().max(1.0) {
            return Err(fail(VERIFY, "brute-force and Pfaffian values differ"));
        }
    }
    Ok(())
}

fn ideal(args: &IdealArgs) -> Result<(), Failure> {
    let opts = IdealOptions { fixed: args.fix.iter().cloned().collect(), reduce_scalars: args.reduce };
    let mode = match args.mode {
        IdealMode::Hom => Mode::Homogeneous,
        IdealMode::Het => Mode::Heterogeneous,
    };
    let sys = if let Some(src) = &args.gate {
        gate_ideal(&parse_expr(src, Kind::Gate)?, mode, &opts)
    } else if let Some(src) = &args.cogate {
        cogate_ideal(&parse_expr(src, Kind::Cogate)?, mode, &opts)
    } else {
        let path = args.net.as_deref().expect("clap requires a source");
        let net = read_net(path)?;
        let parts: Vec<(Tensor, Vec<usize>)> = net
            .nodes()
            .map(|n| {
                let idx = n.tensor.wires().iter().map(|&e| if matches!(mode, Mode::Homogeneous) { 1 } else { e as usize }).collect();
                (n.tensor.clone(), idx)
            })
            .collect();
        circuit_ideal(&parts, &opts)
    }
    .map_err(usage)?;
    let text = match args.format {
        Format::Singular => sys.to_singular(),
        Format::Neutral => sys.to_neutral(),
    };
    if args.output.as_os_str() == "-" {
        print!("{text}");
    } else {
        fs::write(&args.output, text).map_err(|e| usage(format!("{}: {e}", args.output.display())))?;
        eprintln!("{} variables, {} generators -> {}", sys.nvars(), sys.gens.len(), args.output.display());
    }
    Ok(())
}

fn gb(order: Order, max_pairs: Option<usize>, timeout: Option<f64>, print: bool, path: &Path) -> Result<(), Failure> {
    let sys = PolySystem::from_neutral(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let order = match order {
        Order::Degrevlex => MonomialOrder::Degrevlex,
        Order::Lex => MonomialOrder::Lex,
        Order::Deglex => MonomialOrder::Deglex,
    };
    let cfg = GbConfig { order, max_pairs, timeout: timeout.map(Duration::from_secs_f64) };
    match sys.groebner(&cfg) {
        Ok((basis, stats)) => {
            println!("{}", if basis.is_trivial() { "TRIVIAL" } else { "NONTRIVIAL" });
            println!("basis size {}", basis.polys.len());
            println!("pairs {}", stats.pairs_processed);
            if print {
                print!("{}", basis_to_text(&sys.vars, &basis));
            }
            Ok(())
        }
        Err(e @ GbError::BudgetExceeded { .. }) => {
            println!("BUDGET");
            Err(fail(BUDGET, e.to_string()))
        }
    }
}

fn certify(suite: Option<Suite>, net: Option<&Path>) -> Result<(), Failure> {
    let pass = if suite.is_some() {
        let results = run_reference_suite();
        for r in &results {
            println!("{r}");
        }
        results.iter().all(|r| r.pass)
    } else {
        let path = net.expect("clap requires a source");
        let cn = read_net(path)?.certified().map_err(|e| net_failure(path, e))?;
        let residual = cn.max_residual().unwrap_or(f64::INFINITY);
        let ok = cn.verify();
        println!("{} {} {residual:.3e}", if ok { "PASS" } else { "FAIL" }, path.display());
        ok
    };
    if pass {
        Ok(())
    } else {
        Err(fail(VERIFY, "certificate check failed"))
    }
}

fn census_bases(spec: &str, arity: usize) -> Result<Vec<BasisMatrix>, Failure> {
    if let Some(b) = named_basis(spec) {
        return Ok(vec![b; arity]);
    }
    let path = Path::new(spec);
    let text = read(path)?;
    let bases: Vec<BasisMatrix> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| BasisMatrix::parse(l).map_err(|e| usage(format!("{}: {e}", path.display()))))
        .collect::<Result<_, _>>()?;
    match bases.len() {
        1 => Ok(vec![bases[0].clone(); arity]),
        n if n == arity => Ok(bases),
        n => Err(usage(format!("{}: {n} bases for arity {arity}", path.display()))),
    }
}

fn census(arity: usize, basis: &str, kind: TensorKind, jobs: Option<usize>) -> Result<(), Failure> {
    let bases = census_bases(basis, arity)?;
    let kind = match kind {
        TensorKind::Gate => Kind::Gate,
        TensorKind::Cogate => Kind::Cogate,
    };
    let exec = Exec::default();
    let found = exec.install(jobs, || census_under_fixed_bases(arity, kind, &bases, exec)).map_err(cert_failure)?;
    for e in &found {
        println!("{}", e.tensor);
    }
    println!("{} {}", found.len(), if kind == Kind::Gate { "gates" } else { "cogates" });
    Ok(())
}

fn decompose(target: &str, cert: &Path, fragment: &Path, order_file: &Path, rule: Rule) -> Result<(), Failure> {
    let target = parse_tensor(target).map_err(|e| usage(format!("`{target}`: {e}")))?;
    let cert = Certificate::parse(&read(cert)?).map_err(|e| usage(format!("{}: {e}", cert.display())))?;
    let frag = read_net(fragment)?.certified().map_err(|e| net_failure(fragment, e))?;
    let sigma = read_order(order_file)?;
    let rule = match rule {
        Rule::Checkerboard => FlipRule::Checkerboard,
        Rule::Exact => FlipRule::Exact,
    };
    let rep = check_decomposition(&target, &cert, &frag, &sigma, rule).map_err(cert_failure)?;
    println!("intermediate {}", rep.intermediate);
    println!("contraction {}", rep.contraction);
    println!("expected {}", rep.expected);
    println!("{} residual {:.3e}", if rep.holds { "HOLDS" } else { "FAILS" }, rep.residual);
    if rep.holds {
        Ok(())
    } else {
        Err(fail(VERIFY, "decomposition does not hold"))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Eval { method, order_file, net } => eval(method, order_file.as_deref(), &net),
        Command::Order { net } => {
            let n = read_net(&net)?;
            let sigma = planar_spanning_tree_edge_order(&n).map_err(|e| net_failure(&net, e))?;
            println!("{}", sigma.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
            Ok(())
        }
        Command::Ideal(args) => ideal(&args),
        Command::Gb { order, max_pairs, timeout, print, ideal } => gb(order, max_pairs, timeout, print, &ideal),
        Command::Certify { suite, net } => certify(suite, net.as_deref()),
        Command::Census { arity, basis, kind, jobs } => census(arity, &basis, kind, jobs),
        Command::Decompose { target, cert, fragment, order_file, rule } => decompose(&target, &cert, &fragment, &order_file, rule),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pfk: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
