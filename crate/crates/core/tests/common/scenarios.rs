//! End-to-end scenarios driven through the command line entry point.

use std::collections::BTreeSet;
use std::path::Path;

use causal_calc::cli;
use causal_calc::counterfactual::{apply_intervention, apply_structure_intervention, InterventionSpec};
use causal_calc::counterfactual::{StructureAtom, StructureInterventionSpec};
use causal_calc::io::parse_atoms;
use causal_calc::machines::{machine_step, run_machine, Verdict};
use causal_calc::tsem::{Configuration, TimedAtom, Value, VarId};
use rayon::prelude::*;
use serde_json::Value as Json;

use super::{machine, machine_path, model, state_after, tm_config};

pub fn cli_json(args: &[&str]) -> Result<Json, String> {
    let out = cli::run(std::iter::once("causal-calc").chain(args.iter().copied()));
    if out.code != 0 {
        return Err(format!("{args:?} exited {}: {}", out.code, out.stderr));
    }
    serde_json::from_str(&out.stdout).map_err(|e| format!("{args:?}: {e}"))
}

#[derive(Debug)]
pub struct FlipReport {
    pub accept_step: usize,
    pub is_cause: bool,
    pub witness: Json,
    /// (cell, critical) for every swept cell.
    pub cells: Vec<(i64, bool)>,
    /// Cells the unmodified run ever scans before accepting.
    pub scanned: BTreeSet<i64>,
    pub rows: usize,
    /// Rows whose classification differs from direct simulation.
    pub disagreements: Vec<String>,
}

/// Compile the alternation TM, ask whether the second input bit causes
/// acceptance of `input`, and sweep single step-0 flips of cells `lo..=hi`.
/// Every sweep row is replayed on the machine itself.
pub fn alternation_flips(dir: &Path, input: &str, lo: i64, hi: i64) -> Result<FlipReport, String> {
    let m = machine("alt_tm");
    let toks = m.parse_input(input).map_err(|e| e.to_string())?;
    let run = run_machine(&m, &toks, None, 100, 1_000_000).map_err(|e| e.to_string())?;
    let Verdict::Accept { step } = run.verdict else {
        return Err(format!("{input} is not accepted: {}", run.verdict));
    };

    let mut scanned = BTreeSet::new();
    let mut c = tm_config(
        &m,
        &toks
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, t)| (i as i64, t))
            .collect::<Vec<_>>(),
    );
    let mut pos = 0i64;
    for _ in 0..step {
        scanned.insert(pos);
        let s = machine_step(&m, &c).map_err(|e| e.to_string())?.remove(0);
        pos += s.mv.d as i64;
        c = s.config;
    }

    let calc_path = dir.join("alt_calc.json");
    let (mp, cp) = (machine_path("alt_tm"), calc_path.display().to_string());
    let out = cli::run([
        "causal-calc",
        "compile",
        "--machine",
        &mp.display().to_string(),
        "-o",
        &cp,
    ]);
    if out.code != 0 {
        return Err(out.stderr);
    }
    let outcome = format!("accept@{step}");
    let bit = toks.get(1).ok_or("input too short")?;
    let cause = cli_json(&[
        "cause",
        "--model",
        &cp,
        "--input",
        input,
        "--candidate",
        &format!("X[1]@0={bit}"),
        "--outcome",
        &outcome,
    ])?;
    let sweep = cli_json(&[
        "sweep",
        "--model",
        &cp,
        "--input",
        input,
        "--steps",
        "0",
        "--vars",
        &format!("X[{lo}..{hi}]"),
        "--outcome",
        &outcome,
    ])?;

    let mut disagreements = Vec::new();
    let rows = sweep["rows"].as_array().ok_or("sweep without rows")?;
    for row in rows {
        let fault = row["faults"][0].as_str().ok_or("row without fault")?;
        let atom = &parse_atoms(fault).map_err(|e| e.to_string())?[0];
        let k = atom.var.index.ok_or("fault on a non-cell")?;
        let mut cells: Vec<(i64, _)> = toks.iter().cloned().enumerate().map(|(i, t)| (i as i64, t)).collect();
        cells.retain(|(i, _)| *i != k);
        cells.push((k, atom.value.as_atom().unwrap().clone()));
        let accepts = state_after(&m, tm_config(&m, &cells), step).is_some_and(|q| m.is_final(&q));
        let critical = row["classification"] == "critical";
        if row["original"] != true || critical == accepts {
            disagreements.push(format!(
                "{fault}: sweep says {}, machine accepts={accepts}",
                row["classification"]
            ));
        }
    }
    let cells = sweep["cells"]
        .as_array()
        .ok_or("sweep without cells")?
        .iter()
        .map(|c| {
            let var = c["var"].as_str().unwrap_or_default();
            let k = var
                .trim_start_matches("X[")
                .trim_end_matches(']')
                .parse::<i64>()
                .unwrap_or(i64::MIN);
            (k, c["critical"] == true)
        })
        .collect();
    Ok(FlipReport {
        accept_step: step,
        is_cause: cause["is_cause"] == true,
        witness: cause["witness"].clone(),
        cells,
        scanned,
        rows: rows.len(),
        disagreements,
    })
}

/// Constant-1 model: the structure intervention rewriting both rows to 0
/// from step 0 gives X=0 at steps 1..=`horizon`; every standard
/// intervention on X with last step k <= `max_k` leaves X=1 at k+1.
/// Returns the number of standard interventions checked.
pub fn constant_one_witness(horizon: usize, max_k: usize) -> Result<usize, String> {
    let loaded = model("constant1");
    let m = &loaded.model;
    let x = VarId::single("X");
    let cfg = |v: &str| Configuration::new(&m.signature, [(x.clone(), Value::atom(v))]).unwrap();
    let zero = || Value::atom("0");

    let spec = StructureInterventionSpec::new(
        ["0", "1"]
            .iter()
            .map(|r| StructureAtom {
                var: x.clone(),
                step: 0,
                row: [(x.clone(), Value::atom(r))].into(),
                value: zero(),
            })
            .collect(),
    )
    .map_err(|e| e.to_string())?;
    for root in ["0", "1"] {
        let tree = apply_structure_intervention(m, &cfg(root), &spec, horizon, 1_000_000).map_err(|e| e.to_string())?;
        if tree.len() != horizon + 1 {
            return Err(format!("structure tree has {} nodes", tree.len()));
        }
        for (t, node) in tree.nodes.iter().enumerate().skip(1) {
            if node.config.explicit(&x) != Some(&zero()) {
                return Err(format!(
                    "structure intervention from X={root}: X at step {t} is {}",
                    node.config
                ));
            }
        }
    }

    let mut checked = 0;
    for k in 0..=max_k {
        // step k is pinned to 0 or 1; each earlier step is free, 0 or 1
        let codes = 2 * 3usize.pow(k as u32);
        (0..codes).into_par_iter().try_for_each(|code| -> Result<(), String> {
            let mut rest = code / 2;
            let mut atoms = Vec::new();
            for s in 0..k {
                if rest % 3 > 0 {
                    atoms.push(TimedAtom::new(x.clone(), s, Value::atom(&(rest % 3 - 1).to_string())));
                }
                rest /= 3;
            }
            atoms.push(TimedAtom::new(x.clone(), k, Value::atom(&(code % 2).to_string())));
            let spec = InterventionSpec::new(atoms).map_err(|e| e.to_string())?;
            for root in ["0", "1"] {
                let tree = apply_intervention(m, &cfg(root), &spec, k + 1, 1_000_000).map_err(|e| e.to_string())?;
                let last: Vec<&Configuration> = tree.configs_at(k + 1).into_iter().collect();
                if last != [&cfg("1")] {
                    return Err(format!("{:?} from X={root}: step {} is {last:?}", spec.atoms(), k + 1));
                }
            }
            Ok(())
        })?;
        checked += codes;
    }
    Ok(checked)
}
