use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde_json::json;

use semimod::dot::hasse_dot;
use semimod::explorer::corner_witness_with;
use semimod::families::{construct_dn, construct_en, rigidity_check, Family};
use semimod::hom::{enumerate_homs, find_left_inverse, find_right_inverse, HomConstraints};
use semimod::io::{self, MorphismDoc};
use semimod::module::Distributivity;
use semimod::linear::{distinct_row_factorization, dual_factorization, dualize_hom, matrix_of_hom};
use semimod::{free_module, projectivity, Error, FinModule, Flavor, Hom, MorphismClass, Result, SearchOptions, WitnessVerdict};

use crate::{Cli, Command, Format, Outcome};

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Outcome> {
    let opts = SearchOptions::with_budget(cli.budget);
    let fmt = |default: Format, allowed: &[Format]| -> Result<Format> {
        let f = cli.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(Error::InvalidParameter(format!("format {f:?} is not available for this command")))
        }
    };
    let text_or_json = [Format::Text, Format::Json];
    match &cli.command {
        Command::Construct { what, n, rank, flavor, canonical } => {
            let f = fmt(Format::Json, &[Format::Json, Format::Dot, Format::Text])?;
            let (name, m) = construct(what, *n, *rank, *flavor)?;
            emit_module(out, f, &name, &m, *canonical)?;
            Ok(Outcome::Verified)
        }
        Command::Validate { module } => {
            let f = fmt(Format::Text, &text_or_json)?;
            let m = read_module_arg(module)?;
            validate(out, f, &m)
        }
        Command::Homs { source, target, pins, injective, count } => {
            let f = fmt(Format::Json, &text_or_json)?;
            let m = load_valid(source)?;
            let n = load_valid(target)?;
            let mut c = match pins {
                Some(p) => io::read_constraints(p)?.to_constraints(&m, &n)?,
                None => HomConstraints::new(),
            };
            if *injective {
                c = c.injective();
            }
            let homs = enumerate_homs(&m, &n, &c, opts)?;
            if *count {
                match f {
                    Format::Json => writeln!(out, "{}", json!({ "count": homs.len() })),
                    _ => writeln!(out, "{}", homs.len()),
                }
                .map_err(io_err)?;
            } else {
                for h in &homs {
                    match f {
                        Format::Json => writeln!(out, "{}", json!({ "map": h.map() })),
                        _ => writeln!(out, "{}", describe(h)),
                    }
                    .map_err(io_err)?;
                }
            }
            Ok(Outcome::Verified)
        }
        Command::Rigidity { flavor, n, m } => {
            let f = fmt(Format::Text, &text_or_json)?;
            let homs = rigidity_check(*n, *m, *flavor, opts)?;
            let identity = homs.len() == 1 && homs[0].is_identity();
            let expected = if n == m { identity } else { homs.is_empty() };
            match f {
                Format::Json => writeln!(
                    out,
                    "{}",
                    json!({ "flavor": flavor, "n": n, "m": m, "count": homs.len(), "identity": identity })
                ),
                _ => {
                    let noun = if homs.len() == 1 { "morphism" } else { "morphisms" };
                    let note = if identity { " (identity)" } else { "" };
                    writeln!(out, "{} {noun}{note}", homs.len())
                }
            }
            .map_err(io_err)?;
            Ok(if expected { Outcome::Verified } else { Outcome::Negative })
        }
        Command::SplitCheck { morphism } => {
            let f = fmt(Format::Text, &text_or_json)?;
            let h = read_morphism_arg(morphism)?;
            split_check(out, f, &h, opts)
        }
        Command::Projective { module } => {
            let f = fmt(Format::Text, &text_or_json)?;
            let m = load_valid(module)?;
            let r = projectivity(&m, opts)?;
            let distributive = r.distributivity.map(|d| d.holds());
            match f {
                Format::Json => writeln!(
                    out,
                    "{}",
                    json!({
                        "projective": r.is_projective(),
                        "free_rank": r.free.rank,
                        "surjection": r.surjection.map(),
                        "section": r.section.as_ref().map(|s| s.map().to_vec()),
                        "distributive": distributive,
                        "criteria_agree": r.criteria_agree(),
                    })
                ),
                _ => {
                    let verdict = if r.is_projective() {
                        "projective (section of the free cover found)"
                    } else {
                        "not projective (no section of the free cover exists)"
                    };
                    writeln!(out, "{verdict}\nfree cover rank: {}", r.free.rank).map_err(io_err)?;
                    if let Some(s) = &r.section {
                        writeln!(out, "section: {}", describe(s)).map_err(io_err)?;
                    }
                    if let Some(d) = r.distributivity {
                        let name = |a: usize| m.name(a).to_string();
                        let text = match d {
                            Distributivity::Distributive => "yes".to_string(),
                            Distributivity::MissingMeet(a, b) => format!("no, {} and {} have no meet", name(a), name(b)),
                            Distributivity::Fails(a, b, c) => {
                                format!("no, fails at ({}, {}, {})", name(a), name(b), name(c))
                            }
                        };
                        writeln!(out, "distributive lattice: {text}").map_err(io_err)?;
                    }
                    Ok(())
                }
            }
            .map_err(io_err)?;
            if !r.criteria_agree() {
                eprintln!("warning: splitting and distributivity verdicts disagree");
            }
            Ok(if r.is_projective() { Outcome::Verified } else { Outcome::Negative })
        }
        Command::FactorMatrix { matrix, flavor } => {
            let f = fmt(Format::Text, &text_or_json)?;
            let a = io::matrix_from_json(&read_arg(matrix)?, *flavor)?;
            let fact = distinct_row_factorization(&a)?;
            let verified = fact.verify(&a)?;
            // Certifies the duplicator as a hom with its left inverse.
            fact.duplicator_hom()?;
            match f {
                Format::Json => writeln!(
                    out,
                    "{}",
                    json!({
                        "reduced": io::matrix_to_json(&fact.reduced),
                        "duplicator": io::matrix_to_json(&fact.duplicator),
                        "certificate": io::matrix_to_json(&fact.certificate),
                        "row_class": fact.class_of,
                        "verified": verified,
                    })
                ),
                _ => write!(
                    out,
                    "reduced ({} distinct rows):\n{}duplicator:\n{}certificate (left inverse of duplicator):\n{}verified: {verified}\n",
                    fact.reduced.rows(),
                    fact.reduced,
                    fact.duplicator,
                    fact.certificate
                ),
            }
            .map_err(io_err)?;
            Ok(if verified { Outcome::Verified } else { Outcome::Negative })
        }
        Command::Dualize { morphism, factor } => {
            let f = fmt(Format::Text, &text_or_json)?;
            let h = read_morphism_arg(morphism)?;
            if !h.is_hom() {
                return Err(Error::NotAHom("input map".into()));
            }
            let a = matrix_of_hom(&h)?;
            let (_, _, star) = dualize_hom(&h, opts)?;
            let a_star = matrix_of_hom(&star)?;
            let mut doc = json!({
                "matrix": io::matrix_to_json(&a),
                "dual_matrix": io::matrix_to_json(&a_star),
                "dual": MorphismDoc::inline(&star),
            });
            let mut outcome = Outcome::Verified;
            let mut factor_text = String::new();
            if *factor {
                match dual_factorization(&h, opts) {
                    Ok(df) => {
                        doc["factorization"] = json!({
                            "surjection": df.surjection,
                            "t_size": df.t_size,
                            "residual": df.residual.map(),
                        });
                        factor_text = format!(
                            "dual factorization: |S| = {} -> |T| = {}, surjection {:?}\n",
                            df.surjection.len(),
                            df.t_size,
                            df.surjection
                        );
                    }
                    Err(Error::NotSplittable(why)) => {
                        doc["factorization"] = json!({ "error": why });
                        factor_text = format!("not a splittable injection: {why}\n");
                        outcome = Outcome::Negative;
                    }
                    Err(e) => return Err(e),
                }
            }
            match f {
                Format::Json => writeln!(out, "{doc}"),
                _ => write!(out, "matrix:\n{a}dual (transpose):\n{a_star}{factor_text}"),
            }
            .map_err(io_err)?;
            Ok(outcome)
        }
        Command::Witness { flavor, max_n, class, spec } => {
            let f = fmt(Format::Text, &text_or_json)?;
            let (flavor, max_n, class, extra) = match spec {
                Some(p) => read_witness_spec(p)?,
                None => (*flavor, *max_n, *class, Vec::new()),
            };
            if max_n == 0 {
                return Err(Error::InvalidParameter("--max-n must be at least 1".into()));
            }
            let w = corner_witness_with(flavor, max_n, class, opts, &extra)?;
            let report = w.spec.witness_verify(&w.ys, &w.fs)?;
            match f {
                Format::Json => {
                    let mut doc = report.to_json();
                    doc["flavor"] = json!(flavor);
                    doc["class"] = json!(class);
                    doc["x0"] = json!(w.spec.name(w.x0));
                    writeln!(out, "{doc}")
                }
                _ => write!(out, "X0 = {}, class = {class}\n{report}", w.spec.name(w.x0)),
            }
            .map_err(io_err)?;
            Ok(match report.verdict() {
                WitnessVerdict::Holds => Outcome::Verified,
                WitnessVerdict::Fails => Outcome::Negative,
                WitnessVerdict::Inconclusive => Outcome::Inconclusive,
            })
        }
        Command::ExportDot { module } => {
            fmt(Format::Dot, &[Format::Dot])?;
            let m = load_valid(module)?;
            write!(out, "{}", hasse_dot(&m, &graph_name(module))?).map_err(io_err)?;
            Ok(Outcome::Verified)
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Format(format!("write failed: {e}"))
}

fn read_arg(arg: &str) -> Result<String> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Format(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(arg).map_err(|e| Error::Format(format!("{arg}: {e}")))
    }
}

/// A module from a name, a file, or stdin ("-"). Axioms are not checked.
fn read_module_arg(arg: &str) -> Result<Arc<FinModule>> {
    if arg != "-" {
        if let Some(m) = io::named_module(arg)? {
            return Ok(Arc::new(m));
        }
    }
    Ok(Arc::new(io::module_from_json(&read_arg(arg)?)?))
}

/// As [`read_module_arg`], rejecting modules that violate an axiom.
fn load_valid(arg: &str) -> Result<Arc<FinModule>> {
    let m = read_module_arg(arg)?;
    let report = m.validate();
    if let Some(v) = report.violations.first() {
        return Err(Error::Structural(format!("{arg}: {} fails at {:?}", v.axiom, v.witness)));
    }
    Ok(m)
}

fn read_morphism_arg(arg: &str) -> Result<Hom> {
    let doc: MorphismDoc = serde_json::from_str(&read_arg(arg)?)?;
    let base = if arg == "-" { Path::new(".") } else { Path::new(arg).parent().unwrap_or(Path::new(".")) };
    let h = doc.to_hom(base)?;
    for m in [h.source(), h.target()] {
        if let Some(v) = m.validate().violations.first() {
            return Err(Error::Structural(format!("endpoint fails {} at {:?}", v.axiom, v.witness)));
        }
    }
    Ok(h)
}

fn construct(what: &str, n: Option<usize>, rank: Option<usize>, flavor: Option<Flavor>) -> Result<(String, Arc<FinModule>)> {
    let need_n = || n.ok_or_else(|| Error::InvalidParameter(format!("{what} needs --n")));
    let m = match what {
        "D" | "Dn" => return Ok((format!("D_{}", need_n()?), construct_dn(need_n()?)?.module)),
        "E" | "En" => return Ok((format!("E_{}", need_n()?), construct_en(need_n()?)?.module)),
        "free" => {
            let flavor = flavor.ok_or_else(|| Error::InvalidParameter("free needs --flavor".into()))?;
            let rank = rank.ok_or_else(|| Error::InvalidParameter("free needs --rank".into()))?;
            return Ok((format!("free_{flavor}_{rank}"), free_module(flavor, rank)?.module));
        }
        other => io::named_module(other)?,
    };
    match m {
        Some(m) => Ok((graph_name(what), Arc::new(m))),
        None => Err(Error::InvalidParameter(format!("unknown construction {what:?}"))),
    }
}

fn graph_name(arg: &str) -> String {
    let stem = Path::new(arg).file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
    if arg == "-" {
        "module".into()
    } else {
        stem.to_string()
    }
}

fn emit_module(out: &mut dyn Write, f: Format, name: &str, m: &FinModule, canonical: bool) -> Result<()> {
    match f {
        Format::Json => writeln!(out, "{}", io::module_to_json(m, canonical)),
        Format::Dot => write!(out, "{}", hasse_dot(m, name)?),
        Format::Text => {
            let order = m.induced_order()?;
            writeln!(out, "{name}: {} elements over {}", m.len(), m.flavor()).map_err(io_err)?;
            writeln!(out, "elements: {}", m.names().join(", ")).map_err(io_err)?;
            let gens: Vec<&str> = m.generators().into_iter().map(|g| m.name(g)).collect();
            writeln!(out, "generators: {}", gens.join(", ")).map_err(io_err)?;
            let covers: Vec<String> =
                order.covers().into_iter().map(|(a, b)| format!("{} < {}", m.name(a), m.name(b))).collect();
            writeln!(out, "covers: {}", covers.join(", "))
        }
    }
    .map_err(io_err)
}

fn validate(out: &mut dyn Write, f: Format, m: &FinModule) -> Result<Outcome> {
    let report = m.validate();
    match f {
        Format::Json => {
            let violations: Vec<_> = report
                .violations
                .iter()
                .map(|v| json!({ "axiom": v.axiom.to_string(), "witness": v.witness }))
                .collect();
            writeln!(out, "{}", json!({ "valid": report.is_valid(), "violations": violations }))
        }
        _ if report.is_valid() => writeln!(out, "valid {} module with {} elements", m.flavor(), m.len()),
        _ => {
            for v in &report.violations {
                let names: Vec<&str> = v.witness.iter().map(|&a| m.name(a)).collect();
                writeln!(out, "violated: {} at ({})", v.axiom, names.join(", ")).map_err(io_err)?;
            }
            Ok(())
        }
    }
    .map_err(io_err)?;
    Ok(if report.is_valid() { Outcome::Verified } else { Outcome::Negative })
}

fn split_check(out: &mut dyn Write, f: Format, h: &Hom, opts: SearchOptions) -> Result<Outcome> {
    if let Err(v) = h.check() {
        return Err(Error::NotAHom(v.to_string()));
    }
    let (inj, surj) = (h.is_injective(), h.is_surjective());
    let (kind, found) = if inj {
        ("left inverse", find_left_inverse(h, opts)?)
    } else if surj {
        ("right inverse", find_right_inverse(h, opts)?)
    } else {
        ("none", None)
    };
    match f {
        Format::Json => writeln!(
            out,
            "{}",
            json!({
                "injective": inj,
                "surjective": surj,
                "splits": found.is_some(),
                "certificate_kind": kind,
                "certificate": found.as_ref().map(|w| w.map().to_vec()),
            })
        ),
        _ => match (&found, inj || surj) {
            (Some(w), _) => writeln!(out, "splittable: {kind} {}", describe(w)),
            (None, true) => writeln!(out, "not splittable: no {kind} exists (search exhausted)"),
            (None, false) => writeln!(out, "not splittable: neither injective nor surjective"),
        },
    }
    .map_err(io_err)?;
    Ok(if found.is_some() { Outcome::Verified } else { Outcome::Negative })
}

fn describe(h: &Hom) -> String {
    h.describe().into_iter().map(|(a, b)| format!("{a}->{b}")).collect::<Vec<_>>().join(" ")
}

fn read_witness_spec(path: &Path) -> Result<(Flavor, usize, MorphismClass, Vec<Family>)> {
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Spec {
        flavor: Flavor,
        class: MorphismClass,
        max_n: usize,
        #[serde(default)]
        extra: Vec<String>,
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let s: Spec = serde_json::from_str(&text)?;
    let extra = s.extra.iter().map(|e| e.parse()).collect::<Result<Vec<Family>>>()?;
    if let Some(bad) = extra.iter().find(|fam| fam.flavor() != s.flavor) {
        return Err(Error::FlavorMismatch(s.flavor, bad.flavor()));
    }
    Ok((s.flavor, s.max_n, s.class, extra))
}
