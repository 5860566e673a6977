use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use amplify_core::acceptance::{format_reports, run_all};
use amplify_core::decode::{
    cascade_unique_decode, fixed_poly_decode, is_zeta_cover, zeta_cover_prune, BruteForceBackend, CascadeDecode,
    DecodeList, DecoderConfig,
};
use amplify_core::f2::{code_bias, format_code, format_words, parse_words, LinearCode, Word};
use amplify_core::graphs::{format_graph, normalized_adjacency_capped};
use amplify_core::lifting::{
    format_walks, parity_sampling_measure, parse_tree, parse_walks, product_splittability_certificate,
    splittability_certificate, Cascade, SplitCertificate, SplittingTree, WalkCollection, EXHAUSTIVE_GROUND_CAP,
};
use amplify_core::params::{
    bias_certificate, gamma, rate_certificate, round_four_radius, round_three, round_two, round_two_rate_holds,
    round_two_sandwich, thresholds, Mode, ParamSet,
};
use amplify_core::rpp::{zigzag_spectral_checks_capped, ProductError, WideReplacementProduct, ZigzagReport};
use amplify_core::spectra::second_singular_value_capped;
use amplify_core::Rational;
use serde_json::{json, Value};

use crate::config::{parse_rational, read_graph_arg, BaseSpec, BuildConfig, GraphSpec};
use crate::error::{from, io, CliError, CliResult};
use crate::manifest::{ArtifactWriter, RunManifest};
use crate::{
    BuildArgs, Cli, Command, CoverArgs, DecodeArgs, DecoderKind, EncodeArgs, ModeArg, ParamsArgs, ParityArgs, Round,
    SelftestArgs, SpectraArgs, SplitArgs,
};

pub const CONFIG_FILE: &str = "config.toml";
pub const CODEWORD_FILE: &str = "codeword.txt";
pub const TRACE_FILE: &str = "decode-trace.jsonl";

pub fn run(cli: &Cli) -> CliResult<()> {
    let mut out = String::new();
    let artifacts = match &cli.command {
        Command::Params(a) => params(a, &mut out)?,
        Command::Build(a) => return build(cli, a, &mut out).map(|()| print!("{out}")),
        Command::Encode(a) => encode(cli, a, &mut out)?,
        Command::Decode(a) => decode(cli, a, &mut out)?,
        Command::Spectra(a) => spectra(cli, a, &mut out)?,
        Command::CertifySplittability(a) => certify_splittability(cli, a, &mut out)?,
        Command::ParitySampler(a) => parity_sampler(a, &mut out)?,
        Command::CoverPrune(a) => cover_prune(a, &mut out)?,
        Command::Selftest(a) => selftest(a, &mut out)?,
    };
    print!("{out}");
    if let Some(dir) = &cli.global.out {
        let mut writer = ArtifactWriter::new(dir, manifest_for(cli))?;
        writer.write("output.txt", &out)?;
        for (name, contents) in artifacts.files {
            writer.write(&name, &contents)?;
        }
        writer.finish()?;
    }
    artifacts.verdict
}

/// Files a command wants in --out besides its standard output, and its final verdict.
struct Artifacts {
    files: Vec<(String, String)>,
    verdict: CliResult<()>,
}

impl Artifacts {
    fn ok() -> Self {
        Artifacts { files: Vec::new(), verdict: Ok(()) }
    }

    fn check(mut self, holds: bool, what: impl Into<String>) -> Self {
        if !holds && self.verdict.is_ok() {
            self.verdict = Err(CliError::Certification(what.into()));
        }
        self
    }

    fn file(mut self, name: &str, contents: String) -> Self {
        self.files.push((name.into(), contents));
        self
    }
}

/// Every flag of the invocation, keyed by its long name. The output directory is left out so
/// that runs into different directories write identical manifests.
pub fn manifest_for(cli: &Cli) -> RunManifest {
    let name = serde_json::to_value(&cli.command).expect("serializes");
    let (command, args) = match name {
        Value::Object(map) => map.into_iter().next().expect("one subcommand"),
        other => (other.to_string(), Value::Null),
    };
    let mut flags = BTreeMap::new();
    flatten("", &args, &mut flags);
    flags.insert("cap-walks".into(), cli.global.cap_walks.to_string());
    flags.insert("cap-dim".into(), cli.global.cap_dim.to_string());
    let mut m = RunManifest::new(&command, cli.global.seed);
    m.flags = flags;
    m
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) {
    match v {
        Value::Null => {}
        Value::Object(map) => {
            for (k, v) in map {
                let key = k.replace('_', "-");
                flatten(&if prefix.is_empty() { key } else { format!("{prefix}.{key}") }, v, out);
            }
        }
        Value::String(s) => {
            out.insert(prefix.into(), s.clone());
        }
        other => {
            out.insert(prefix.into(), other.to_string());
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(io(path))
}

fn rf(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Spectral bound violations are certification failures; everything else is a precondition.
fn rpp_err(e: ProductError) -> CliError {
    match e {
        ProductError::BoundViolated(m) => CliError::Certification(format!("rpp: {m}")),
        other => from("rpp")(other),
    }
}

fn cascade_dir(dir: &Path, cap_walks: usize) -> CliResult<(BuildConfig, Cascade)> {
    let (config, _) = BuildConfig::load(&dir.join(CONFIG_FILE))?;
    let p = config.product(dir)?;
    let base = config.base_code(p.outer().n(), dir, 0)?;
    let cascade = config.cascade(&base, &p, cap_walks)?;
    Ok((config, cascade))
}

// ---------------------------------------------------------------------------------------------
// params

fn mode(m: ModeArg) -> Mode {
    match m {
        ModeArg::Paper => Mode::Paper,
        ModeArg::Desk => Mode::Desk,
    }
}

fn write_param_set(out: &mut String, p: &ParamSet) {
    let g = &p.graphs;
    let _ = writeln!(out, "s = {}\nalpha = {}\nq = {}\nbeta = {}", p.s, p.alpha, p.q, p.beta);
    let _ = writeln!(out, "log2_dim = {}\nlog2_inv_eps = {}\nlog2_n = {}", p.log2_dim, p.log2_inv_eps, p.log2_n);
    let _ = writeln!(
        out,
        "log2_d1 = {}\nlog2_d2 = {}\nlog2_lambda2 = {}\nlog2_eps0 = {}",
        g.log2_d1, g.log2_d2, g.log2_lambda2, g.log2_eps0
    );
    match &p.walk {
        Some(w) => {
            let _ =
                writeln!(out, "t = {}\nlog2_block_length = {}\nrate_exponent = {}", w.t, w.log2_big_n, w.rate_exponent);
            if let Some(tp) = w.t_prime {
                let _ = writeln!(out, "t_prime = {tp}");
            }
            if let Some(l) = w.ell {
                let _ = writeln!(out, "levels = {l}");
            }
            if let Some(k) = w.top_arity {
                let _ = writeln!(out, "top_arity = {k}");
            }
        }
        None => {
            let _ = writeln!(out, "walk = infeasible at this width");
        }
    }
}

fn params(a: &ParamsArgs, out: &mut String) -> CliResult<Artifacts> {
    let alpha = Rational::new(1, a.alpha_inv.max(1) as i128);
    let md = mode(a.mode);
    let perr = from("params");
    match a.round {
        Round::One => {
            let p = gamma(a.log2_dim, a.log2_inv_eps, alpha, a.q, md).map_err(perr)?;
            write_param_set(out, &p);
            let (lower, upper) = bias_certificate(&p).unwrap_or((false, false));
            let rate = rate_certificate(&p).ok_or_else(|| CliError::Precondition("params: no walk schedule".into()))?;
            let _ = writeln!(out, "bias_reaches_eps = {lower}\nbias_not_overshot = {upper}");
            let _ = writeln!(
                out,
                "walk_cost = {}\ninner_expansion = {}\nrate = {} ({} <= {})",
                rate.walk_cost, rate.inner_expansion, rate.rate, rate.rate_exponent, rate.rate_exponent_bound
            );
            Ok(Artifacts::ok().check(lower && upper, "params: bias sandwich").check(rate.holds(), "params: rate chain"))
        }
        Round::Two => {
            let p = round_two(a.log2_dim, a.log2_inv_eps, alpha, md).map_err(perr)?;
            write_param_set(out, &p);
            let sandwich = round_two_sandwich(&p).unwrap_or(false);
            let rate = round_two_rate_holds(&p).unwrap_or(false);
            let _ = writeln!(out, "sandwich = {sandwich}\nrate = {rate}");
            Ok(Artifacts::ok().check(sandwich, "params: round two sandwich").check(rate, "params: round two rate"))
        }
        Round::Three => {
            let p = round_three(a.log2_dim, a.log2_inv_eps, a.c3).map_err(perr)?;
            write_param_set(out, &p);
            Ok(Artifacts::ok())
        }
        Round::Four => {
            let log2_eta = round_four_radius(a.alpha_inv, a.c, a.kappa).map_err(perr)?;
            let _ = writeln!(out, "s = {}\nlog2_eta = {log2_eta}", a.alpha_inv);
            Ok(Artifacts::ok())
        }
        Round::Thresholds => {
            let t = thresholds(a.log2_eta, a.k);
            let _ = writeln!(
                out,
                "k0 = {}\nk0_prime = {}\nlog2_tau0 = {}\nlog2_l = {}",
                t.k0, t.k0_prime, t.log2_tau0, t.log2_l
            );
            let _ = writeln!(out, "splittability_gate = {}", t.splittability_gate);
            Ok(Artifacts::ok())
        }
    }
}

// ---------------------------------------------------------------------------------------------
// build

fn build(cli: &Cli, a: &BuildArgs, out: &mut String) -> CliResult<()> {
    let dir = cli.global.out.as_deref().ok_or_else(|| CliError::Precondition("build: --out is required".into()))?;
    let (config, config_dir) = BuildConfig::load(&a.config)?;
    let p = config.product(&config_dir)?;
    let base = config.base_code(p.outer().n(), &config_dir, cli.global.seed)?;
    let cascade = config.cascade(&base, &p, cli.global.cap_walks)?;
    let report = zigzag_spectral_checks_capped(&p, cli.global.cap_dim);

    let normalized = BuildConfig {
        outer: GraphSpec::file("outer.graph"),
        inner: GraphSpec::file("inner.graph"),
        base: BaseSpec { code: Some("base.code".into()), dim: None, eps0: None },
        ..config
    };
    let mut writer = ArtifactWriter::new(dir, manifest_for(cli))?;
    writer.write(CONFIG_FILE, &normalized.to_toml())?;
    writer.write("base.code", &format_code(&base))?;
    writer.write("outer.graph", &format_graph(p.outer()))?;
    writer.write("inner.graph", &format_graph(p.inner()))?;
    for (i, level) in cascade.levels().iter().enumerate() {
        writer.write(&format!("level-{}.walks", i + 1), &format_walks(&level.walks))?;
        let positions = level.base_collection(base.len()).map_err(from("lifting"))?;
        writer.write(&format!("level-{}.positions", i + 1), &format_walks(&positions))?;
    }
    let (certificates, verdict) = certificates(&cascade, &p, report, cli.global.cap_dim);
    writer.write("certificates.txt", &certificates)?;
    writer.finish()?;
    let _ = writeln!(
        out,
        "built {} level(s): base [{}, {}], top length {}, into {}",
        cascade.depth(),
        base.len(),
        base.dim(),
        cascade.code(cascade.depth()).len(),
        dir.display()
    );
    out.push_str(&certificates);
    verdict
}

fn certificates(
    cascade: &Cascade,
    p: &WideReplacementProduct,
    report: Result<ZigzagReport, ProductError>,
    cap_dim: usize,
) -> (String, CliResult<()>) {
    let mut s = String::new();
    let mut verdict = Ok(());
    match report {
        Ok(r) => write_zigzag(&mut s, &r),
        Err(ProductError::BoundViolated(m)) => {
            let _ = writeln!(s, "zigzag = violated: {m}");
            verdict = Err(CliError::Certification(format!("rpp: {m}")));
        }
        Err(e) => {
            let _ = writeln!(s, "zigzag = skipped: {e}");
        }
    }
    for i in 1..=cascade.depth() {
        let level = cascade.level(i);
        let block = if i == 1 { 1 } else { cascade.level(i - 1).base_arity() };
        let tau = SplittingTree::balanced(level.walks.arity())
            .and_then(|tree| product_splittability_certificate(p, block, &tree, cap_dim));
        match tau {
            Ok(c) => {
                let _ = writeln!(s, "level {i} tau = {}", c.tau);
            }
            Err(e) => {
                let _ = writeln!(s, "level {i} tau = skipped: {e}");
            }
        }
    }
    let base = cascade.base();
    let first = &cascade.level(1).walks;
    if base.len() <= EXHAUSTIVE_GROUND_CAP {
        match code_bias(base)
            .map_err(|e| e.to_string())
            .and_then(|eps0| parity_sampling_measure(first, eps0).map(|m| (eps0, m)).map_err(|e| e.to_string()))
        {
            Ok((eps0, m)) => {
                let _ = writeln!(s, "level 1 parity sampling at eps0 = {eps0}: {m} ({})", rf(m));
            }
            Err(e) => {
                let _ = writeln!(s, "level 1 parity sampling = skipped: {e}");
            }
        }
    } else {
        let _ = writeln!(s, "level 1 parity sampling = skipped: ground set {} > {EXHAUSTIVE_GROUND_CAP}", base.len());
    }
    let top = cascade.code(cascade.depth());
    match (code_bias(top), top.min_distance()) {
        (Ok(b), Ok(d)) => {
            let _ = writeln!(s, "top bias = {b} ({})\ntop min distance = {d}", rf(b));
        }
        (Err(e), _) | (_, Err(e)) => {
            let _ = writeln!(s, "top bias = skipped: {e}");
        }
    }
    (s, verdict)
}

fn write_zigzag(s: &mut String, r: &ZigzagReport) {
    let _ = writeln!(s, "sigma2 outer = {}\nsigma2 inner = {}", r.sigma_outer, r.sigma_inner);
    for (i, x) in r.step_sigmas.iter().enumerate() {
        let _ = writeln!(s, "sigma2 step {i} = {x}");
    }
    let _ = writeln!(s, "zigzag bound = {}", r.zigzag_bound);
    if let Some(b) = r.refined_bound {
        let _ = writeln!(s, "refined bound = {b}");
    }
}

// ---------------------------------------------------------------------------------------------
// encode, decode

fn parse_word(text: &str) -> CliResult<Word> {
    text.trim().parse::<Word>().map_err(from("f2"))
}

fn encode(cli: &Cli, a: &EncodeArgs, out: &mut String) -> CliResult<Artifacts> {
    let (_, cascade) = cascade_dir(&a.cascade, cli.global.cap_walks)?;
    let message = parse_word(&a.message)?;
    let codeword = cascade.encode(&message).map_err(from("lifting"))?;
    let text = format_words(std::slice::from_ref(&codeword));
    out.push_str(&text);
    Ok(Artifacts::ok().file(CODEWORD_FILE, text))
}

/// The message of a base codeword, as bits.
fn message_of(base: &LinearCode, cw: &Word) -> CliResult<String> {
    match base.message_of(cw).map_err(from("f2"))? {
        Some(m) => Ok(m.to_string()),
        None => Err(CliError::Precondition("f2: decoded word is not a codeword".into())),
    }
}

fn trace_lines(d: &CascadeDecode, result: &str) -> String {
    let mut s = String::new();
    for t in &d.trace {
        let line = json!({ "level": t.level, "list_size": t.list_size, "pruned_size": t.pruned_size });
        let _ = writeln!(s, "{line}");
    }
    let _ = writeln!(s, "{}", json!({ "result": result, "nodes": d.nodes }));
    s
}

fn decode(cli: &Cli, a: &DecodeArgs, out: &mut String) -> CliResult<Artifacts> {
    let (_, cascade) = cascade_dir(&a.cascade, cli.global.cap_walks)?;
    let words = parse_words(&read(&a.word)?).map_err(from("f2"))?;
    let y = words.first().ok_or_else(|| CliError::Precondition("f2: empty word file".into()))?;
    let top = cascade.code(cascade.depth());
    let eta = match &a.eta {
        Some(e) => parse_rational(e)?,
        None => code_bias(top).map_err(from("f2"))?,
    };
    let derr = from("decode");
    let decoded = match a.decoder {
        DecoderKind::Unique => cascade_unique_decode(&cascade, &BruteForceBackend, y, eta).map_err(derr)?,
        DecoderKind::FixedPoly => {
            let eta0 = match &a.eta0 {
                Some(e) => parse_rational(e)?,
                None => (eta + Rational::new(1, 4)) / 2,
            };
            let config = DecoderConfig::new(eta0, eta, cascade.top_arity()).map_err(&derr)?;
            fixed_poly_decode(&cascade, &BruteForceBackend, y, &config).map_err(derr)?
        }
    };
    let result = match &decoded.codeword {
        Some(cw) => message_of(cascade.base(), cw)?,
        None => "failure".into(),
    };
    let _ = writeln!(out, "{result}");
    Ok(Artifacts::ok().file(TRACE_FILE, trace_lines(&decoded, &result)))
}

// ---------------------------------------------------------------------------------------------
// spectra, certify-splittability, parity-sampler

fn spectra(cli: &Cli, a: &SpectraArgs, out: &mut String) -> CliResult<Artifacts> {
    let cap = cli.global.cap_dim;
    if let Some(g) = &a.graph {
        let g = read_graph_arg(g)?;
        let op = normalized_adjacency_capped(&g, cap).map_err(from("graphs"))?;
        let sigma = second_singular_value_capped(&op, cap).map_err(from("spectra"))?;
        let _ = writeln!(out, "n = {}\ndegree = {}\nsigma2 = {sigma}", g.n(), g.degree());
        return Ok(Artifacts::ok());
    }
    let path = a.config.as_deref().expect("clap requires one source");
    let (config, dir) = BuildConfig::load(path)?;
    let p = config.product(&dir)?;
    let report = zigzag_spectral_checks_capped(&p, cap).map_err(rpp_err)?;
    write_zigzag(out, &report);
    Ok(Artifacts::ok())
}

fn write_certificate(out: &mut String, c: &SplitCertificate) {
    for n in &c.nodes {
        let _ = writeln!(out, "node ({}, {}, {}) sigma2 = {}", n.k1, n.k2, n.k3, n.sigma2);
    }
    let _ = writeln!(out, "tau = {}", c.tau);
}

fn certify_splittability(cli: &Cli, a: &SplitArgs, out: &mut String) -> CliResult<Artifacts> {
    let cap = cli.global.cap_dim;
    let tree = |arity: usize| -> CliResult<SplittingTree> {
        match &a.tree {
            Some(path) => parse_tree(&read(path)?).map_err(from("lifting")),
            None => SplittingTree::balanced(arity).map_err(from("lifting")),
        }
    };
    let cert = if let Some(path) = &a.walks {
        let w = parse_walks(&read(path)?).map_err(from("lifting"))?;
        splittability_certificate(&w, &tree(w.arity())?, cap).map_err(from("lifting"))?
    } else {
        let path = a.config.as_deref().expect("clap requires one source");
        let (config, dir) = BuildConfig::load(path)?;
        let p = config.product(&dir)?;
        product_splittability_certificate(&p, a.block, &tree(a.arity)?, cap).map_err(from("lifting"))?
    };
    write_certificate(out, &cert);
    let holds = a.tau_max.is_none_or(|m| cert.tau <= m);
    Ok(Artifacts::ok().check(holds, format!("lifting: tau = {} exceeds {}", cert.tau, a.tau_max.unwrap_or(0.0))))
}

fn parity_sampler(a: &ParityArgs, out: &mut String) -> CliResult<Artifacts> {
    let w = parse_walks(&read(&a.walks)?).map_err(from("lifting"))?;
    let eps0 = parse_rational(&a.eps0)?;
    let m = parity_sampling_measure(&w, eps0).map_err(from("lifting"))?;
    let _ = writeln!(out, "eps0 = {eps0}\nmeasure = {m} ({})", rf(m));
    let verdict = match &a.eta {
        Some(e) => {
            let eta = parse_rational(e)?;
            let _ = writeln!(out, "eta = {eta}\nsamples = {}", m <= eta);
            Artifacts::ok().check(m <= eta, format!("lifting: measure {m} exceeds {eta}"))
        }
        None => Artifacts::ok(),
    };
    Ok(verdict)
}

// ---------------------------------------------------------------------------------------------
// cover-prune, selftest

fn cover_prune(a: &CoverArgs, out: &mut String) -> CliResult<Artifacts> {
    let words = parse_words(&read(&a.list)?).map_err(from("f2"))?;
    let zeta = match (&a.zeta, &a.eta0) {
        (Some(z), _) => parse_rational(z)?,
        (None, Some(e)) => Rational::new(1, 8) - parse_rational(e)? / 8,
        (None, None) => unreachable!("clap requires one of them"),
    };
    let walks = match &a.walks {
        Some(path) => parse_walks(&read(path)?).map_err(from("lifting"))?,
        None => {
            let n = words.first().map_or(0, Word::len);
            WalkCollection::explicit(1, n, (0..n as u32).collect()).map_err(from("lifting"))?
        }
    };
    let list = DecodeList::from_words(&words, &walks).map_err(from("decode"))?;
    let pruned = zeta_cover_prune(&list, zeta).map_err(from("decode"))?;
    let kept = pruned.words();
    let text = format_words(&kept);
    out.push_str(&text);
    let mut artifacts = Artifacts::ok().file("pruned.words", text);
    if let Some(path) = &a.truth {
        let truth = parse_words(&read(path)?).map_err(from("f2"))?;
        let covers = is_zeta_cover(&kept, &truth, zeta).map_err(from("decode"))?;
        eprintln!("zeta = {zeta}, kept {} of {}, covers reference: {covers}", kept.len(), words.len());
        artifacts = artifacts.check(covers, "decode: pruned list is not a zeta-cover of the reference");
    }
    Ok(artifacts)
}

fn selftest(a: &SelftestArgs, out: &mut String) -> CliResult<Artifacts> {
    let reports = run_all(a.filter.as_deref());
    if reports.is_empty() {
        return Err(CliError::Precondition(format!("selftest: no criterion matches {:?}", a.filter)));
    }
    out.push_str(&format_reports(&reports));
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.name.to_string()).collect();
    Ok(Artifacts::ok().check(failed.is_empty(), format!("selftest: {}", failed.join(", "))))
}
