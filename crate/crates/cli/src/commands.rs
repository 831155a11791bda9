use std::fs;
use std::io::Write;
use std::path::Path;

use darkstate::angular::{Chain, Polarization, Transition};
use darkstate::filtersim::{run_ensemble, time_series_rows, FilterConfig};
use darkstate::gds::{
    build_lambda_gds, build_n_gds, build_polariton, build_v_gds, equalize_couplings, psi_terms,
    ExtraPhotons, GdsRecipe, GdsState, PhiSpec, PolaritonSpec,
};
use darkstate::model::chain_coupling;
use darkstate::oracle::{is_dark, residual_under};
use darkstate::{decompose_chains, Algebra, Execution, ModelConfig, Statistics, SCHEMA_VERSION};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::{Failure, Format, GdsArgs, GdsType, StatisticsArg};

/// Darkness tolerance every emitted state must meet.
pub const VERIFY_TOL: f64 = 1e-10;

pub fn emit(dest: Option<&Path>, text: &str) -> Result<(), Failure> {
    match dest {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_to(dest: &str, text: &str) -> Result<(), Failure> {
    emit(
        if dest == "-" {
            None
        } else {
            Some(Path::new(dest))
        },
        text,
    )
}

pub fn chain_label(index: usize, c: &Chain) -> String {
    format!("#{index} {} L={}", c.kind, c.links)
}

fn coupling_json(c: &Chain) -> serde_json::Value {
    json!(c
        .couplings
        .iter()
        .map(|k| json!({
            "excited": k.excited,
            "ground": k.ground,
            "polarization": k.polarization,
            "surd": k.g.to_string(),
            "value": k.g.to_f64(),
        }))
        .collect::<Vec<_>>())
}

#[derive(Serialize)]
struct ClassifyRow {
    index: usize,
    kind: String,
    links: u32,
    sites: String,
    couplings: String,
    values: String,
}

pub fn classify(transition: Transition, format: Format) -> Result<(), Failure> {
    let chains = decompose_chains(transition)?;
    let text = match format {
        Format::Json => {
            let rows: Vec<_> = chains
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    json!({
                        "index": i,
                        "kind": c.kind.to_string(),
                        "links": c.links,
                        "sites": c.site_list(),
                        "couplings": coupling_json(c),
                    })
                })
                .collect();
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "transition": transition.to_string(),
                "chains": rows,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc)?)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for (i, c) in chains.iter().enumerate() {
                let name =
                    |k: &darkstate::angular::Coupling| format!("G{}_{}", k.excited, k.ground);
                w.serialize(ClassifyRow {
                    index: i,
                    kind: c.kind.to_string(),
                    links: c.links,
                    sites: c.site_list(),
                    couplings: c
                        .couplings
                        .iter()
                        .map(|k| format!("{}={}", name(k), k.g))
                        .collect::<Vec<_>>()
                        .join(" "),
                    values: c
                        .couplings
                        .iter()
                        .map(|k| format!("{}={:.12}", name(k), k.g.to_f64()))
                        .collect::<Vec<_>>()
                        .join(" "),
                })?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Failure::new(1, e.to_string()))?)
                .map_err(|e| Failure::new(1, e.to_string()))?
        }
    };
    emit(None, &text)
}

fn parse_number<T: std::str::FromStr>(what: &str, s: &str) -> Result<T, Failure> {
    s.trim()
        .parse()
        .map_err(|_| Failure::new(4, format!("--phi: `{s}` is not a valid {what}")))
}

pub fn parse_polarization(s: &str) -> Result<Polarization, Failure> {
    s.trim()
        .parse::<Polarization>()
        .map_err(|e| Failure::new(4, e.to_string()))
}

/// Parses `fock:P,M`, `coherent:Z,M,WEAK,T` or `two-mode:ZP,ZM,T`.
pub fn parse_phi(text: &str) -> Result<PhiSpec, Failure> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| Failure::new(4, format!("--phi `{text}` must look like kind:args")))?;
    let args: Vec<&str> = rest.split(',').collect();
    let want = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(Failure::new(
                4,
                format!(
                    "--phi {kind} takes {n} comma-separated values, got {}",
                    args.len()
                ),
            ))
        }
    };
    match kind {
        "fock" => {
            want(2)?;
            Ok(PhiSpec::Fock {
                plus: parse_number("count", args[0])?,
                minus: parse_number("count", args[1])?,
            })
        }
        "coherent" => {
            want(4)?;
            Ok(PhiSpec::CoherentTimesFock {
                z: Complex64::new(parse_number("amplitude", args[0])?, 0.0),
                m: parse_number("count", args[1])?,
                weak: parse_polarization(args[2])?,
                truncation: parse_number("truncation", args[3])?,
            })
        }
        "two-mode" => {
            want(3)?;
            Ok(PhiSpec::TwoModeCoherent {
                z_plus: Complex64::new(parse_number("amplitude", args[0])?, 0.0),
                z_minus: Complex64::new(parse_number("amplitude", args[1])?, 0.0),
                truncation: parse_number("truncation", args[2])?,
            })
        }
        other => Err(Failure::new(
            4,
            format!("--phi kind `{other}` is not one of fock, coherent, two-mode"),
        )),
    }
}

pub fn gds(args: &GdsArgs) -> Result<(), Failure> {
    let chains = decompose_chains(args.transition)?;
    let chain = chains.get(args.chain_index).ok_or_else(|| {
        Failure::new(
            4,
            format!(
                "--chain-index {} out of range: {} has {} chains",
                args.chain_index,
                args.transition,
                chains.len()
            ),
        )
    })?;
    let statistics = match args.statistics {
        Some(StatisticsArg::Bose) => Statistics::Bose,
        Some(StatisticsArg::Fermi) => Statistics::Fermi,
        None => Statistics::default_for(args.transition.fg),
    };
    let algebra = Algebra::new(statistics);
    let exec = Execution::default();
    let n_first = *args.n.first().unwrap_or(&1);
    let built: GdsState = match args.kind {
        GdsType::Lambda => build_lambda_gds(
            &GdsRecipe::new(
                chain.clone(),
                algebra,
                args.n.clone(),
                parse_phi(&args.phi)?,
            ),
            exec,
        )?,
        GdsType::N => build_n_gds(
            &GdsRecipe::new(
                chain.clone(),
                algebra,
                args.n.clone(),
                parse_phi(&args.phi)?,
            )
            .with_extra(ExtraPhotons::Constrained { m: args.m }),
            exec,
        )?,
        GdsType::V => build_v_gds(chain, algebra, args.m, args.mprime, exec)?,
        GdsType::Polariton => {
            let spec = PolaritonSpec {
                n: n_first,
                m: args.m,
                z: Complex64::new(args.z, 0.0),
                weak: parse_polarization(&args.weak)?,
                truncation: args.truncation,
                force_equal_g: args.force_equal_g,
            };
            build_polariton(chain, algebra, &spec, exec)?
        }
    };

    let fock = built.fock();
    let classes = fock.space().classes().max(1);
    let cfg = ModelConfig::new(args.transition)
        .with_algebra(algebra)
        .with_classes(classes);
    let physical = is_dark(&cfg, &fock, VERIFY_TOL)?;
    let equalized = args.kind == GdsType::Polariton && args.force_equal_g;
    let (coupling, residual) = if equalized {
        (
            "equalized",
            residual_under(
                &chain_coupling(&equalize_couplings(chain), cfg.rabi, classes),
                &fock,
            )?,
        )
    } else {
        ("physical", physical.residual)
    };
    let dark = residual <= VERIFY_TOL && physical.excited_occupancy <= VERIFY_TOL;

    let terms = if chain.has_lambda_part() {
        psi_terms(chain)?
    } else {
        Vec::new()
    };
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "transition": args.transition.to_string(),
        "chain": {
            "index": args.chain_index,
            "kind": chain.kind.to_string(),
            "links": chain.links,
            "sites": chain.site_list(),
            "couplings": coupling_json(chain),
        },
        "type": format!("{:?}", args.kind).to_lowercase(),
        "psi_terms": terms,
        "raw_norm": built.raw_norm,
        "tail_mass": built.tail_mass,
        "state": built.record(),
        "darkness": {
            "coupling": coupling,
            "residual": residual,
            "physical_residual": physical.residual,
            "excited_occupancy": physical.excited_occupancy,
            "tolerance": VERIFY_TOL,
            "dark": dark,
        },
    });
    emit(
        args.output.as_deref(),
        &format!("{}\n", serde_json::to_string_pretty(&doc)?),
    )?;
    if dark {
        Ok(())
    } else {
        Err(Failure::new(
            1,
            format!("verification failed: residual {residual:.3e} > {VERIFY_TOL:.0e}"),
        ))
    }
}

#[derive(Serialize)]
struct SeriesRow {
    trajectory: u32,
    t: f64,
    residual: f64,
    mean_weak: f64,
    mean_excited: f64,
}

pub fn filter(config: &Path, summary_dest: &str, series_dest: &str) -> Result<(), Failure> {
    let text = fs::read_to_string(config)?;
    let cfg = FilterConfig::from_kv_str(&text)?;
    let ens = run_ensemble(&cfg, Execution::default())?;
    let s = &ens.summary;

    let mut w = csv::Writer::from_writer(Vec::new());
    for (trajectory, sample) in time_series_rows(&ens.records) {
        w.serialize(SeriesRow {
            trajectory,
            t: sample.t,
            residual: sample.residual,
            mean_weak: sample.mean_weak,
            mean_excited: sample.mean_excited,
        })?;
    }
    let csv_text = String::from_utf8(w.into_inner().map_err(|e| Failure::new(1, e.to_string()))?)
        .map_err(|e| Failure::new(1, e.to_string()))?;
    emit_to(series_dest, &csv_text)?;
    emit_to(
        summary_dest,
        &format!("{}\n", serde_json::to_string_pretty(s)?),
    )?;

    if s.converged_dark != s.converged {
        return Err(Failure::new(
            1,
            format!(
                "verification failed: {} of {} converged endpoints are dark",
                s.converged_dark, s.converged
            ),
        ));
    }
    Ok(())
}
