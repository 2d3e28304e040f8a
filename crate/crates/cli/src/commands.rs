use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use dapt_core::approx::approx_arrangement;
use dapt_core::bounds::{approximation_ratio, lower_bound_table, ratio_certificate, SumsTable, MAX_BOUND_HEIGHT};
use dapt_core::gadgets::{build_reduction, witness_arrangement};
use dapt_core::io::{arrangement_from_json, arrangement_to_json, nmts_from_json, partition_to_json, reduction_to_json};
use dapt_core::oracle::{exact_dapt, exact_kbpp, OracleConfig, DEFAULT_BUDGET};
use dapt_core::partition::construct_optimal;
use dapt_core::table::aligned_rows;
use dapt_core::{Arrangement, GuestGraph};
use serde_json::json;

use crate::render::{joined, json, profile_csv, profile_text, significant};
use crate::{BadInput, Format, Mode, Usage};

pub const BUDGET_ENV: &str = "DAPT_BUDGET";

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| BadInput(format!("cannot read {}: {e}", path.display())).into())
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn scored(arr: &Arrangement, head: Vec<(String, serde_json::Value)>, f: Format) -> String {
    let profile = arr.distance_profile();
    let ov = arr.objective_value();
    match f {
        Format::Text => {
            let mut out = String::new();
            for (k, v) in &head {
                out.push_str(&format!("{k}: {v}\n"));
            }
            let seq = arr.occupants().into_iter().map(|o| o.map_or("-".to_string(), |v| v.to_string()));
            out.push_str(&format!("leaves: {}\n", joined(seq)));
            out.push_str(&format!("OV: {ov}\n"));
            out.push_str(&profile_text(&profile));
            out
        }
        Format::Csv => {
            let keys: Vec<&str> = head.iter().map(|(k, _)| k.as_str()).collect();
            let vals: String = head.iter().map(|(_, v)| format!("{v},")).collect();
            let mut out = String::new();
            for k in &keys {
                out.push_str(&format!("{},", k.replace(' ', "_")));
            }
            out.push_str("objective,i,a_i,s_i\n");
            out.push_str(&profile_csv(&format!("{vals}{ov},"), &profile));
            out
        }
        Format::Json => {
            let mut obj = serde_json::Map::new();
            for (k, v) in head {
                obj.insert(k.replace(' ', "_"), v);
            }
            obj.insert("objective".into(), json!(ov));
            obj.insert("leaves".into(), json!(arr.occupants()));
            obj.insert("a".into(), json!(profile.counts()));
            obj.insert("s".into(), json!(profile.tails()));
            json(&serde_json::Value::Object(obj))
        }
    }
}

pub fn arrange(height: u32, emit: Option<&Path>, f: Format) -> Result<String> {
    let arr = approx_arrangement(height)?;
    if let Some(path) = emit {
        write(path, &arrangement_to_json(&arr))?;
    }
    Ok(scored(&arr, vec![("guest height".into(), json!(height))], f))
}

pub fn evaluate(path: &Path, f: Format) -> Result<String> {
    let arr = arrangement_from_json(&read(path)?)?;
    let head = vec![
        ("vertices".into(), json!(arr.guest().vertex_count())),
        ("host height".into(), json!(arr.host().height())),
    ];
    Ok(scored(&arr, head, f))
}

pub fn kbpp(height: u32, kprime: u32, emit: Option<&Path>, f: Format) -> Result<String> {
    let built = construct_optimal(height, kprime)?;
    let part = &built.partition;
    if let Some(path) = emit {
        write(path, &partition_to_json(part)?)?;
    }
    let cut = part.cut_count();
    let sizes = part.block_sizes();
    let comps = part.components_per_block();
    let profile = part.component_count_profile();
    let p = built.params;
    Ok(match f {
        Format::Text => {
            let profile_line = joined(profile.iter().map(|(i, n)| format!("n_{i}={n}")));
            format!(
                "height: {height}\nk_prime: {kprime}\nblocks: {}\ncut: {cut}\nparams: t={} e={} p={} q={}\ncomponents: {profile_line}\nblock sizes: {}\n",
                part.k(),
                p.t,
                p.e,
                p.p,
                p.q,
                joined(&sizes)
            )
        }
        Format::Csv => {
            let mut out = String::from("height,k_prime,cut,block,size,components\n");
            for (b, (s, c)) in sizes.iter().zip(&comps).enumerate() {
                out.push_str(&format!("{height},{kprime},{cut},{},{s},{c}\n", b + 1));
            }
            out
        }
        Format::Json => json(&json!({
            "height": height,
            "k_prime": kprime,
            "blocks": part.k(),
            "cut": cut,
            "params": {"t": p.t, "e": p.e, "p": p.p, "q": p.q},
            "components": profile.iter().map(|(i, n)| (i.to_string(), json!(n))).collect::<serde_json::Map<_, _>>(),
            "block_sizes": sizes,
        })),
    })
}

pub fn bound(height: u32, f: Format) -> Result<String> {
    let table = lower_bound_table(height)?;
    let total = table.total();
    let levels: Vec<usize> = (1..=table.s_lower.len()).rev().collect();
    Ok(match f {
        Format::Text => {
            let rows = aligned_rows(&[
                ("i", levels.iter().map(ToString::to_string).collect()),
                ("s_i^L", levels.iter().map(|&i| table.s_lower[i - 1].to_string()).collect()),
            ]);
            format!("guest height: {height}\n{rows}lower bound: {total}\n")
        }
        Format::Csv => {
            let mut out = String::from("guest_height,lower_bound,i,s_i_L\n");
            for &i in &levels {
                out.push_str(&format!("{height},{total},{i},{}\n", table.s_lower[i - 1]));
            }
            out
        }
        Format::Json => json(&json!({"guest_height": height, "s_lower": table.s_lower, "lower_bound": total})),
    })
}

pub fn ratio(height: u32, f: Format) -> Result<String> {
    if height == 0 || height > MAX_BOUND_HEIGHT {
        return Err(usage(format!("--height must be in 1..={MAX_BOUND_HEIGHT}")));
    }
    let rho = significant(approximation_ratio(height), 9);
    let cert = ratio_certificate(height)?;
    let emp = cert.empirical_ratio();
    let emp_frac = format!("{}/{}", emp.numer(), emp.denom());
    let emp_dec = significant(cert.upper as f64 / cert.lower as f64, 9);
    let within = cert.within_guarantee();
    Ok(match f {
        Format::Text => format!(
            "guest height: {height}\nrho: {rho}\nobjective: {}\nlower bound: {}\nempirical ratio: {emp_frac} ({emp_dec})\nwithin 203/200: {}\n",
            cert.upper,
            cert.lower,
            if within { "yes" } else { "no" }
        ),
        Format::Csv => format!(
            "guest_height,rho,objective,lower_bound,empirical_ratio,within_guarantee\n{height},{rho},{},{},{emp_frac},{within}\n",
            cert.upper, cert.lower
        ),
        Format::Json => json(&json!({
            "guest_height": height,
            "rho": rho,
            "objective": cert.upper,
            "lower_bound": cert.lower,
            "empirical_ratio": emp_frac,
            "within_guarantee": within,
        })),
    })
}

pub fn tables(max_height: u32, f: Format) -> Result<String> {
    if max_height == 0 {
        return Err(usage("--max-height must be at least 1"));
    }
    let heights = 1..=max_height.min(5);
    let mut out = String::new();
    let mut docs = Vec::new();
    if f == Format::Csv {
        out.push_str("h_G,i,a_i,s_i,s_i_L\n");
    }
    for h in heights {
        let table = SumsTable::new(h)?;
        let objective = 2 * table.s.iter().sum::<u64>();
        let lower = 2 * table.s_lower.iter().sum::<u64>();
        match f {
            Format::Text => {
                if h > 1 {
                    out.push('\n');
                }
                out.push_str(&format!("h_G = {h}\n{}objective: {objective}\nlower bound: {lower}\n", table.to_text()));
            }
            Format::Csv => out.push_str(&table.to_csv_rows()),
            Format::Json => docs.push(json!({
                "guest_height": h,
                "a": table.a,
                "s": table.s,
                "s_lower": table.s_lower,
                "objective": objective,
                "lower_bound": lower,
            })),
        }
    }
    if f == Format::Json {
        out = json(&serde_json::Value::Array(docs));
    }
    Ok(out)
}

pub struct ExactOpts {
    pub mode: Mode,
    pub height: Option<u32>,
    pub star: Option<usize>,
    pub kprime: Option<u32>,
    pub degree: u64,
    pub threads: usize,
    pub budget: Option<u64>,
}

fn budget(flag: Option<u64>) -> Result<u64> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("{BUDGET_ENV} must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

pub fn exact(o: &ExactOpts, f: Format) -> Result<String> {
    let config = OracleConfig { budget: budget(o.budget)?, threads: o.threads };
    let (guest_desc, value, visits, witness_key, witness) = match o.mode {
        Mode::Dapt => {
            if o.kprime.is_some() {
                return Err(usage("--kprime applies to --mode kbpp only"));
            }
            let (guest, desc) = match (o.height, o.star) {
                (Some(h), None) => (GuestGraph::complete_binary(h)?, format!("complete binary tree of height {h}")),
                (None, Some(n)) => (GuestGraph::star(n)?, format!("star with {n} vertices")),
                _ => return Err(usage("give one of --height and --star")),
            };
            let res = exact_dapt(Arc::new(guest), o.degree, &config)?;
            (desc, res.value, res.visits, "leaves", res.witness.leaves().to_vec())
        }
        Mode::Kbpp => {
            let (Some(h), Some(kp)) = (o.height, o.kprime) else {
                return Err(usage("--mode kbpp needs --height and --kprime"));
            };
            if o.star.is_some() || o.degree != 2 {
                return Err(usage("--star and --degree apply to --mode dapt only"));
            }
            if kp == 0 || kp > h {
                return Err(usage(format!("--kprime must be in 1..={h}")));
            }
            let guest = GuestGraph::complete_binary(h)?;
            let res = exact_kbpp(Arc::new(guest), 1usize << kp, &config)?;
            let blocks = res.witness.assignments().iter().map(|&b| b as u64).collect();
            (format!("complete binary tree of height {h}, k = {}", 1u64 << kp), res.value, res.visits, "blocks", blocks)
        }
    };
    let mode = match o.mode {
        Mode::Dapt => "dapt",
        Mode::Kbpp => "kbpp",
    };
    Ok(match f {
        Format::Text => format!(
            "mode: {mode}\nguest: {guest_desc}\noptimum: {value}\nvisits: {visits}\n{witness_key}: {}\n",
            joined(&witness)
        ),
        Format::Csv => format!("mode,optimum,visits,{witness_key}\n{mode},{value},{visits},{}\n", joined(&witness)),
        Format::Json => json(&json!({
            "mode": mode,
            "guest": guest_desc,
            "optimum": value,
            "visits": visits,
            witness_key: witness,
        })),
    })
}

pub fn reduce_nmts(
    input: &Path,
    degree: u64,
    perms: Option<(Vec<usize>, Vec<usize>)>,
    emit: Option<&Path>,
    f: Format,
) -> Result<String> {
    let instance = nmts_from_json(&read(input)?)?;
    let red = build_reduction(&instance, degree)?;
    if let Some(path) = emit {
        write(path, &reduction_to_json(&red))?;
    }
    let witness = match &perms {
        Some((pj, pk)) => Some(witness_arrangement(&red, pj, pk)?.objective_value()),
        None => None,
    };
    let p = red.params;
    let vertices = red.guest.vertex_count();
    Ok(match f {
        Format::Text => {
            let mut out = format!(
                "degree: {degree}\nn: {}\nl_x: {}\nl_y: {}\nl_z: {}\nl: {}\nL: {}\nu_hat: {}\nn_prime: {}\nhub star vertices: {}\nvertices: {vertices}\ntarget: {}\n",
                instance.len(),
                p.l_x,
                p.l_y,
                p.l_z,
                p.l,
                p.big_l,
                p.u_hat,
                p.n_prime,
                p.hub_star_vertices,
                red.target
            );
            if let Some(w) = witness {
                out.push_str(&format!("witness objective: {w}\nwitness meets target: {}\n", if w == red.target { "yes" } else { "no" }));
            }
            out
        }
        Format::Csv => {
            let w = witness.map_or(String::new(), |w| w.to_string());
            format!(
                "degree,n,l_x,l_y,l_z,l,L,u_hat,n_prime,hub_star_vertices,vertices,target,witness_objective\n{degree},{},{},{},{},{},{},{},{},{},{vertices},{},{w}\n",
                instance.len(),
                p.l_x,
                p.l_y,
                p.l_z,
                p.l,
                p.big_l,
                p.u_hat,
                p.n_prime,
                p.hub_star_vertices,
                red.target
            )
        }
        Format::Json => json(&json!({
            "degree": degree,
            "n": instance.len(),
            "params": p,
            "vertices": vertices,
            "target": red.target,
            "witness_objective": witness,
        })),
    })
}
