//! One function per subcommand; each returns the text printed on stdout.

use std::path::Path;

use serde_json::{json, Value};

use quantarrow::boolfn::influence;
use quantarrow::constitution::{is_transitive, Constitution};
use quantarrow::distribution::VoteDistribution;
use quantarrow::family::{self, Membership};
use quantarrow::gaussian::{check_gaussian_arrow_bound, gaussian_paradox_mc, gaussian_paradox_probability, GaussianTripleSpec, ThresholdFunction};
use quantarrow::hyper::{check_reverse_hc, SetFamily};
use quantarrow::io::{parse_constitution, parse_distribution, TruthTableFile};
use quantarrow::montecarlo::{block_rng, estimate_distance, estimate_paradox, MajorityRule, PairwiseRule};
use quantarrow::pivotal::{barbera_construct, find_pivot_pair};
use quantarrow::ranking::{canonical_pairs, Profile};
use quantarrow::suite::{run_bounds_suite, BoundsConfig};
use quantarrow::Error;

use crate::report::{read_input, to_value, CliError, CliResult, Envelope, Input};
use crate::{AnalyzeArgs, BoundsArgs, ConstitutionArg, EnumerateArgs, Format, GaussArgs, Globals, HyperArgs, McArgs, ProjectArgs};

fn load_constitution(path: &Path, inputs: &mut Vec<Input>) -> CliResult<Constitution> {
    let input = read_input(path)?;
    let f = parse_constitution(&input.text)?;
    inputs.push(input);
    Ok(f)
}

fn load_distribution(path: Option<&Path>, k: usize, inputs: &mut Vec<Input>) -> CliResult<VoteDistribution> {
    let Some(path) = path else { return Ok(VoteDistribution::uniform(k)) };
    let input = read_input(path)?;
    let mu = parse_distribution(&input.text)?;
    inputs.push(input);
    if mu.k() != k {
        return Err(Error::ShapeMismatch(format!("distribution has k = {}, constitution has k = {k}", mu.k())).into());
    }
    Ok(mu)
}

fn json_only(g: &Globals, command: &str) -> CliResult<()> {
    match g.format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Validation(format!("{command} has no CSV output"))),
    }
}

fn emit(g: &Globals, command: &str, inputs: &[Input], report: Value) -> CliResult<String> {
    let env = Envelope { command, seed: g.seed, inputs };
    let text = serde_json::to_string_pretty(&env.wrap(report, g.float_only)).map_err(Error::Json)?;
    Ok(text + "\n")
}

fn profile_json(profile: &Profile) -> Value {
    json!(profile.voters().iter().map(|r| r.order()).collect::<Vec<_>>())
}

fn outcome_json(f: &Constitution, profile: &Profile) -> CliResult<Value> {
    let t = f.evaluate(profile)?;
    let wins: Vec<[usize; 2]> = canonical_pairs(f.k())
        .into_iter()
        .map(|(a, b)| if t.prefers(a, b) { [a, b] } else { [b, a] })
        .collect();
    Ok(json!({
        "wins": wins,
        "ranking": t.ranking().map(|r| r.order()),
        "cyclic": !is_transitive(&t),
    }))
}

fn membership_json(f: &Constitution, m: &Membership) -> CliResult<Value> {
    Ok(match m {
        Membership::Member(s) => json!({ "member": true, "structure": to_value(s)? }),
        Membership::NotInFamily(p) => json!({
            "member": false,
            "paradox_profile": profile_json(p),
            "outcome": outcome_json(f, p)?,
        }),
    })
}

pub fn analyze(g: &Globals, a: &AnalyzeArgs) -> CliResult<String> {
    json_only(g, "analyze")?;
    let mut inputs = Vec::new();
    let f = load_constitution(&a.constitution, &mut inputs)?;
    let mu = load_distribution(a.distribution.as_deref(), f.k(), &mut inputs)?;
    let paradox = f.paradox_probability_exact(&mu, g.budget)?;
    let transitive = f.transitive_probability(&mu, g.budget)?;
    let (kalai, terms, kalai_note) = if f.k() != 3 {
        (Value::Null, Value::Null, Some("Kalai decomposition needs k = 3".to_string()))
    } else {
        match (f.paradox_probability_kalai(&mu), f.kalai_terms(&mu)) {
            (Ok(p), Ok(t)) => (to_value(&p)?, to_value(&t)?, None),
            (Err(e @ Error::AsymmetricDistribution), _) | (_, Err(e @ Error::AsymmetricDistribution)) => {
                (Value::Null, Value::Null, Some(e.to_string()))
            }
            (Err(e), _) | (_, Err(e)) => return Err(e.into()),
        }
    };
    let influences = canonical_pairs(f.k())
        .into_iter()
        .zip(f.pair_functions())
        .map(|((x, y), h)| {
            let per_voter = (0..f.n()).map(|i| influence(h, i)).collect::<quantarrow::Result<Vec<_>>>()?;
            Ok(json!({ "pair": [x, y], "influences": per_voter }))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let report = json!({
        "k": f.k(),
        "n": f.n(),
        "paradox_exact": to_value(&paradox)?,
        "transitive_exact": to_value(&transitive)?,
        "paradox_kalai": kalai,
        "kalai_terms": terms,
        "kalai_note": kalai_note,
        "influences": influences,
    });
    emit(g, "analyze", &inputs, report)
}

pub fn structure(g: &Globals, a: &ConstitutionArg) -> CliResult<String> {
    json_only(g, "structure")?;
    let mut inputs = Vec::new();
    let f = load_constitution(&a.constitution, &mut inputs)?;
    let m = family::structure_of(&f, g.budget)?;
    let mut report = membership_json(&f, &m)?;
    if f.k() == 3 && f.n() == 1 && m.structure().is_some() {
        report["single_voter_class"] = json!(format!("{:?}", family::classify_single_voter(&f)?));
    }
    emit(g, "structure", &inputs, report)
}

pub fn project(g: &Globals, a: &ProjectArgs) -> CliResult<String> {
    json_only(g, "project")?;
    let mut inputs = Vec::new();
    let f = load_constitution(&a.constitution, &mut inputs)?;
    let mu = load_distribution(a.distribution.as_deref(), f.k(), &mut inputs)?;
    let p = family::project_to_family(&f, a.epsilon, &mu, g.budget)?;
    let pairs = p
        .projected
        .pair_functions()
        .iter()
        .zip(canonical_pairs(f.k()))
        .map(|(h, (x, y))| json!({ "pair": [x, y], "table": TruthTableFile::boolean(h) }))
        .collect::<Vec<_>>();
    let report = json!({
        "epsilon": a.epsilon,
        "radius": p.radius,
        "distance": to_value(&p.distance)?,
        "pairs": to_value(&p.pairs)?,
        "projected": { "k": f.k(), "n": f.n(), "pairs": pairs },
        "membership": membership_json(&p.projected, &p.membership)?,
    });
    emit(g, "project", &inputs, report)
}

pub fn barbera(g: &Globals, a: &ConstitutionArg) -> CliResult<String> {
    json_only(g, "barbera")?;
    let mut inputs = Vec::new();
    let f = load_constitution(&a.constitution, &mut inputs)?;
    let report = match find_pivot_pair(&f)? {
        None => json!({ "pivots": Value::Null, "reason": "no distinct pivotal voters for the (0,1) and (1,2) pair functions" }),
        Some((w1, w2)) => {
            let profile = barbera_construct(&f, &w1, &w2)?;
            json!({
                "pivots": [
                    { "pair": [0, 1], "voter": w1.voter, "others": w1.others() },
                    { "pair": [1, 2], "voter": w2.voter, "others": w2.others() },
                ],
                "profile": profile_json(&profile),
                "outcome": outcome_json(&f, &profile)?,
            })
        }
    };
    emit(g, "barbera", &inputs, report)
}

pub fn enumerate_family(g: &Globals, a: &EnumerateArgs) -> CliResult<String> {
    json_only(g, "enumerate-family")?;
    let e = family::enumerate_family(a.n, g.budget)?;
    emit(g, "enumerate-family", &[], to_value(&e)?)
}

pub fn mc(g: &Globals, a: &McArgs) -> CliResult<String> {
    let mut inputs = Vec::new();
    let rule: Box<dyn PairwiseRule> = match (&a.constitution, a.majority) {
        (Some(path), _) => Box::new(load_constitution(path, &mut inputs)?),
        (None, Some(n)) => Box::new(MajorityRule::new(a.k, n)?),
        (None, None) => return Err(CliError::Validation("mc needs --constitution or --majority".into())),
    };
    let mu = load_distribution(a.distribution.as_deref(), rule.k(), &mut inputs)?;
    let (quantity, estimate) = match &a.distance_to {
        Some(path) => {
            let other = load_constitution(path, &mut inputs)?;
            ("distance", estimate_distance(rule.as_ref(), &other, &mu, a.samples, g.seed)?)
        }
        None => ("paradox_probability", estimate_paradox(rule.as_ref(), &mu, a.samples, g.seed)?),
    };
    match g.format {
        Format::Json => {
            let report = json!({ "k": rule.k(), "n": rule.n(), "quantity": quantity, "estimate": to_value(&estimate)? });
            emit(g, "mc", &inputs, report)
        }
        Format::Csv => {
            let env = Envelope { command: "mc", seed: g.seed, inputs: &inputs };
            Ok(format!(
                "{}quantity,k,n,mean,stderr,confidence,samples\n{quantity},{},{},{},{},{},{}\n",
                env.csv_header(),
                rule.k(),
                rule.n(),
                estimate.mean,
                estimate.stderr,
                estimate.confidence,
                estimate.samples
            ))
        }
    }
}

pub fn gauss(g: &Globals, a: &GaussArgs) -> CliResult<String> {
    json_only(g, "gauss")?;
    let [t1, t2, t3] = a.thresholds[..] else {
        return Err(CliError::Validation("--thresholds takes exactly three values".into()));
    };
    let fs = [ThresholdFunction::scalar(t1)?, ThresholdFunction::scalar(t2)?, ThresholdFunction::scalar(t3)?];
    let refs = [&fs[0], &fs[1], &fs[2]];
    let spec = GaussianTripleSpec::new(1, a.rho)?;
    let closed = gaussian_paradox_probability(refs, &spec)?;
    let mc = if a.samples == 0 { None } else { Some(gaussian_paradox_mc(refs, &spec, a.samples, g.seed)?) };
    let arrow = match a.epsilon {
        None => Value::Null,
        Some(eps) => match check_gaussian_arrow_bound(refs, &spec, eps) {
            Ok(r) => json!({ "hypothesis_ok": true, "check": to_value(&r)? }),
            Err(e @ Error::HypothesisFailed { .. }) => json!({ "hypothesis_ok": false, "reason": e.to_string() }),
            Err(e) => return Err(e.into()),
        },
    };
    let thresholds: Vec<Value> = [t1, t2, t3].iter().map(|t| if t.is_finite() { json!(t) } else { json!(t.to_string()) }).collect();
    let report = json!({
        "rho": a.rho,
        "thresholds": thresholds,
        "closed_form": closed.probability,
        "correlations": closed.correlations,
        "mc_estimate": mc.as_ref().map(|e| e.mean),
        "mc_stderr": mc.as_ref().map(|e| e.stderr),
        "mc_samples": mc.as_ref().map(|e| e.samples),
        "arrow": arrow,
    });
    emit(g, "gauss", &[], report)
}

pub fn hyper(g: &Globals, a: &HyperArgs) -> CliResult<String> {
    let families: Vec<SetFamily> = match &a.family {
        None => SetFamily::ALL.to_vec(),
        Some(name) => vec![SetFamily::parse(name).ok_or_else(|| CliError::Validation(format!("unknown set family '{name}'")))?],
    };
    let bound = a.rho.abs();
    let rho = vec![a.rho; a.n];
    let mut rows = Vec::with_capacity(a.pairs);
    for t in 0..a.pairs {
        let mut rng = block_rng(g.seed, t as u64);
        let family = families[t % families.len()];
        let (b1, b2) = (family.sample(a.n, &mut rng)?, family.sample(a.n, &mut rng)?);
        rows.push((family, check_reverse_hc(&b1, &b2, &rho, bound)?));
    }
    let violations = rows.iter().filter(|(_, r)| r.violated).count();
    let env = Envelope { command: "hyper", seed: g.seed, inputs: &[] };
    match g.format {
        Format::Csv => {
            let mut out = env.csv_header();
            out.push_str(&format!("# n={} rho={} pairs={} violations={violations}\n", a.n, a.rho, a.pairs));
            out.push_str("family,measure1,measure2,intersection,bound,general_bound,slack,violated\n");
            for (family, r) in &rows {
                out.push_str(&format!(
                    "{family:?},{},{},{},{},{},{},{}\n",
                    r.measures[0], r.measures[1], r.intersection, r.bound, r.general_bound, r.slack, r.violated
                ));
            }
            Ok(out)
        }
        Format::Json => {
            let pairs = rows
                .iter()
                .map(|(family, r)| Ok(json!({ "family": family, "check": to_value(r)? })))
                .collect::<CliResult<Vec<_>>>()?;
            let report = json!({ "n": a.n, "rho": a.rho, "violations": violations, "pairs": pairs });
            emit(g, "hyper", &[], report)
        }
    }
}

pub fn bounds(g: &Globals, a: &BoundsArgs) -> CliResult<String> {
    let config = BoundsConfig {
        seed: g.seed,
        pivot_instances: a.pivot_instances,
        pivot_max_n: a.pivot_max_n,
        hc_pairs: a.hc_pairs,
        hc_max_n: a.hc_max_n,
        projection_instances: a.projection_instances,
        ..BoundsConfig::default()
    };
    let r = run_bounds_suite(&config, g.budget)?;
    match g.format {
        Format::Json => emit(g, "bounds", &[], json!({ "config": to_value(&config)?, "results": to_value(&r)? })),
        Format::Csv => {
            let env = Envelope { command: "bounds", seed: g.seed, inputs: &[] };
            let mut out = env.csv_header();
            out.push_str(&format!("# instances={} violations={}\n", r.instances, r.violations));
            out.push_str("suite,instances,violations,vacuous,tightest_ratio\n");
            for s in [&r.joint_pivotal, &r.two_influential, &r.reverse_hc] {
                let ratio = s.tightest_ratio.map(|x| x.to_string()).unwrap_or_default();
                out.push_str(&format!("{},{},{},{},{ratio}\n", s.name, s.instances, s.violations, s.vacuous));
            }
            for p in &r.projection {
                let name = format!("projection eps={} n={}", p.epsilon.to_f64(), p.n);
                out.push_str(&format!("{name},{},{},0,\n", p.accepted, p.failures));
            }
            Ok(out)
        }
    }
}
