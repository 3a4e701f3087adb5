//! Model JSON: variables, explicit domains, equations (tables or built-in
//! calculator rules), row patches and metadata.
//!
//! Values are strings (atoms) or arrays of strings (tuples). A range is an
//! array of values or `{"product": [[..], [..], ..]}`.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value as Json};

use super::syntax::parse_assignments;
use super::IoError;
use crate::compile::CalculatorModel;
use crate::tsem::{tok, validate_model, Equation, IndexRange, Model, Range, Signature, Table, Token, Value, VarId};

fn format_err(msg: impl Into<String>) -> IoError {
    IoError::Format(msg.into())
}

pub fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Atom(t) => Json::String(t.to_string()),
        Value::Tuple(parts) => Json::Array(parts.iter().map(|p| Json::String(p.to_string())).collect()),
    }
}

pub fn value_from_json(j: &Json) -> Result<Value, IoError> {
    match j {
        Json::String(s) => Ok(Value::atom(s)),
        Json::Array(parts) if !parts.is_empty() => parts
            .iter()
            .map(|p| {
                p.as_str()
                    .map(tok)
                    .ok_or_else(|| format_err(format!("tuple component {p} is not a string")))
            })
            .collect::<Result<Vec<Token>, _>>()
            .map(Value::from_tokens),
        other => Err(format_err(format!("{other} is not a value"))),
    }
}

fn range_to_json(r: &Range) -> Json {
    match r {
        Range::Set(s) => Json::Array(s.iter().map(value_to_json).collect()),
        Range::Product(parts) => json!({
            "product": parts
                .iter()
                .map(|p| p.iter().map(|t| t.to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        }),
    }
}

fn range_from_json(j: &Json) -> Result<Range, IoError> {
    match j {
        Json::Array(items) => Ok(Range::Set(
            items.iter().map(value_from_json).collect::<Result<BTreeSet<_>, _>>()?,
        )),
        Json::Object(o) if o.len() == 1 && o.contains_key("product") => {
            let parts = o["product"]
                .as_array()
                .ok_or_else(|| format_err("product must be an array of arrays"))?;
            let parts = parts
                .iter()
                .map(|p| {
                    p.as_array()
                        .ok_or_else(|| format_err("product component must be an array"))?
                        .iter()
                        .map(|t| {
                            t.as_str()
                                .map(tok)
                                .ok_or_else(|| format_err("product symbol must be a string"))
                        })
                        .collect::<Result<BTreeSet<Token>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Range::Product(parts))
        }
        other => Err(format_err(format!("{other} is not a range"))),
    }
}

pub fn parse_var(s: &str) -> Result<VarId, IoError> {
    // reuse the assignment grammar on `VAR=x`
    let parsed = parse_assignments(&format!("{s}=x")).map_err(|_| format_err(format!("`{s}` is not a variable")))?;
    match parsed.as_slice() {
        [(v, _)] => Ok(v.clone()),
        _ => Err(format_err(format!("`{s}` is not a variable"))),
    }
}

fn row_to_json(domain: &[VarId], row: &[Value]) -> Json {
    Json::Object(
        domain
            .iter()
            .zip(row)
            .map(|(d, v)| (d.to_string(), value_to_json(v)))
            .collect(),
    )
}

fn row_from_json(var: &VarId, domain: &[VarId], j: &Json) -> Result<Vec<Value>, IoError> {
    let obj = j
        .as_object()
        .ok_or_else(|| format_err(format!("row of {var} must be an object")))?;
    let mut by_var = BTreeMap::new();
    for (k, v) in obj {
        by_var.insert(parse_var(k)?, value_from_json(v)?);
    }
    if by_var.len() != domain.len() {
        return Err(format_err(format!("row of {var} does not assign exactly its domain")));
    }
    domain
        .iter()
        .map(|d| {
            by_var
                .remove(d)
                .ok_or_else(|| format_err(format!("row of {var} lacks domain variable {d}")))
        })
        .collect()
}

fn outputs_to_json(out: &BTreeSet<Value>) -> Json {
    Json::Array(out.iter().map(value_to_json).collect())
}

fn outputs_from_json(j: &Json) -> Result<BTreeSet<Value>, IoError> {
    j.as_array()
        .ok_or_else(|| format_err("`out` must be an array"))?
        .iter()
        .map(value_from_json)
        .collect()
}

/// Domain used to key the table rows of `name`: any member with an
/// explicit domain. Tables on families are shared by all members.
fn table_domain(model: &Model, name: &Token) -> Option<Vec<VarId>> {
    model
        .signature
        .explicit_domains()
        .iter()
        .find(|(v, _)| v.name == *name)
        .map(|(_, d)| d.clone())
}

/// Serialize `model`. The output is canonical: maps are key-sorted and all
/// collections are emitted in canonical order.
pub fn model_to_json(model: &Model) -> Json {
    let sig = &model.signature;
    let variables: Vec<Json> = sig
        .decls()
        .map(|d| match &d.family {
            None => json!({"name": d.name.to_string(), "range": range_to_json(&d.range)}),
            Some(f) => {
                let mut o = Map::new();
                o.insert("family".into(), json!(d.name.to_string()));
                o.insert(
                    "index_range".into(),
                    match f.indices {
                        IndexRange::Bounded { lo, hi } => json!([lo, hi]),
                        IndexRange::Unbounded => json!("unbounded"),
                    },
                );
                o.insert("range".into(), range_to_json(&d.range));
                o.insert("default".into(), value_to_json(&f.default));
                if !f.index_ranges.is_empty() {
                    o.insert(
                        "index_ranges".into(),
                        Json::Object(
                            f.index_ranges
                                .iter()
                                .map(|(i, r)| (i.to_string(), range_to_json(r)))
                                .collect(),
                        ),
                    );
                }
                Json::Object(o)
            }
        })
        .collect();
    let domains: Map<String, Json> = sig
        .explicit_domains()
        .iter()
        .map(|(v, d)| {
            (
                v.to_string(),
                json!(d.iter().map(ToString::to_string).collect::<Vec<_>>()),
            )
        })
        .collect();
    let equations: Map<String, Json> = model
        .equations()
        .iter()
        .map(|(name, eq)| {
            let body = match eq {
                Equation::Rule(r) => json!({"builtin": r.describe()}),
                Equation::Table(t) => {
                    let domain = table_domain(model, name).unwrap_or_default();
                    json!({"table": t.rows.iter().map(|(row, out)| json!({
                        "row": row_to_json(&domain, row),
                        "out": outputs_to_json(out),
                    })).collect::<Vec<_>>()})
                }
            };
            (name.to_string(), body)
        })
        .collect();
    let patches: Vec<Json> = model
        .patches()
        .iter()
        .flat_map(|(var, rows)| {
            let domain = model.domain(var).unwrap_or_default();
            rows.iter()
                .map(|(row, out)| {
                    json!({
                        "var": var.to_string(),
                        "row": row_to_json(&domain, row),
                        "out": outputs_to_json(out),
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut doc = Map::new();
    doc.insert("variables".into(), Json::Array(variables));
    doc.insert("domains".into(), Json::Object(domains));
    doc.insert("equations".into(), Json::Object(equations));
    if !patches.is_empty() {
        doc.insert("patches".into(), Json::Array(patches));
    }
    doc.insert("meta".into(), model.meta.clone());
    Json::Object(doc)
}

pub fn model_to_string(model: &Model) -> String {
    let mut s = serde_json::to_string_pretty(&model_to_json(model)).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// A parsed model file. `calculator` is present when the model was compiled
/// from a machine; its model then equals `model`.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    pub model: Model,
    pub calculator: Option<CalculatorModel>,
}

fn parse_signature(doc: &Map<String, Json>) -> Result<Signature, IoError> {
    let mut sig = Signature::new();
    let vars = doc
        .get("variables")
        .and_then(Json::as_array)
        .ok_or_else(|| format_err("`variables` must be an array"))?;
    let mut seen = BTreeSet::new();
    for v in vars {
        let o = v
            .as_object()
            .ok_or_else(|| format_err("variable entries must be objects"))?;
        let range = range_from_json(o.get("range").ok_or_else(|| format_err("variable without `range`"))?)?;
        let known = ["name", "family", "index_range", "range", "default", "index_ranges"];
        if let Some(k) = o.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(format_err(format!("unknown variable key `{k}`")));
        }
        let name = match (o.get("name"), o.get("family")) {
            (Some(Json::String(n)), None) => {
                sig.add_single(n, range);
                n
            }
            (None, Some(Json::String(f))) => {
                let indices = match o.get("index_range") {
                    Some(Json::String(s)) if s == "unbounded" => IndexRange::Unbounded,
                    Some(Json::Array(b)) if b.len() == 2 => match (b[0].as_i64(), b[1].as_i64()) {
                        (Some(lo), Some(hi)) if lo <= hi => IndexRange::Bounded { lo, hi },
                        _ => return Err(format_err(format!("bad index_range for {f}"))),
                    },
                    _ => return Err(format_err(format!("family {f} needs `index_range`"))),
                };
                let default = value_from_json(
                    o.get("default")
                        .ok_or_else(|| format_err(format!("family {f} needs `default`")))?,
                )?;
                sig.add_family(f, indices, range, default);
                if let Some(ir) = o.get("index_ranges") {
                    let ir = ir
                        .as_object()
                        .ok_or_else(|| format_err("`index_ranges` must be an object"))?;
                    for (k, r) in ir {
                        let i: i64 = k
                            .parse()
                            .map_err(|_| format_err(format!("index_ranges key `{k}` is not an integer")))?;
                        sig.set_index_range(f, i, range_from_json(r)?);
                    }
                }
                f
            }
            _ => return Err(format_err("each variable needs exactly one of `name` or `family`")),
        };
        if !seen.insert(name.clone()) {
            return Err(format_err(format!("variable {name} declared twice")));
        }
    }
    if let Some(domains) = doc.get("domains") {
        let domains = domains
            .as_object()
            .ok_or_else(|| format_err("`domains` must be an object"))?;
        for (k, d) in domains {
            let var = parse_var(k)?;
            let d = d
                .as_array()
                .ok_or_else(|| format_err(format!("domain of {k} must be an array")))?
                .iter()
                .map(|x| {
                    x.as_str()
                        .ok_or_else(|| format_err(format!("domain of {k} must list variable names")))
                        .and_then(parse_var)
                })
                .collect::<Result<BTreeSet<VarId>, _>>()?;
            sig.set_domain(var, d.into_iter().collect());
        }
    }
    Ok(sig)
}

/// Parse and validate a model document. Calculator models are rebuilt from
/// their metadata and checked against the stored signature and rules.
pub fn model_from_json(j: &Json) -> Result<LoadedModel, IoError> {
    let doc = j.as_object().ok_or_else(|| format_err("model must be a JSON object"))?;
    let known = ["variables", "domains", "equations", "patches", "meta"];
    if let Some(k) = doc.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(format_err(format!("unknown model key `{k}`")));
    }
    let sig = parse_signature(doc)?;
    let meta = doc.get("meta").cloned().unwrap_or(Json::Null);
    let equations = doc
        .get("equations")
        .and_then(Json::as_object)
        .ok_or_else(|| format_err("`equations` must be an object"))?;

    let builtins: Vec<(&String, &Json)> = equations
        .iter()
        .filter_map(|(k, e)| e.get("builtin").map(|b| (k, b)))
        .collect();
    let mut model;
    let mut calculator = None;
    if !builtins.is_empty() {
        if builtins.len() != equations.len() {
            return Err(format_err("built-in and table equations cannot be mixed"));
        }
        let mut shell = Model::new(sig);
        shell.meta = meta;
        let calc = CalculatorModel::from_model(&shell)?;
        for (name, desc) in builtins {
            match calc.model.equation(name) {
                Some(Equation::Rule(r)) if &r.describe() == desc => {}
                _ => {
                    return Err(format_err(format!(
                        "built-in equation for {name} does not match the metadata"
                    )))
                }
            }
        }
        model = calc.model.clone();
        calculator = Some(calc);
    } else {
        model = Model::new(sig);
        model.meta = meta;
        for (name, e) in equations {
            let rows = e
                .get("table")
                .and_then(Json::as_array)
                .ok_or_else(|| format_err(format!("equation for {name} needs `table` or `builtin`")))?;
            let domain = table_domain(&model, &tok(name))
                .ok_or_else(|| format_err(format!("table equation for {name} has no domain")))?;
            let mut table = Table::default();
            for r in rows {
                let row = row_from_json(
                    &VarId::single(name),
                    &domain,
                    r.get("row").ok_or_else(|| format_err("table entry without `row`"))?,
                )?;
                let out = outputs_from_json(r.get("out").ok_or_else(|| format_err("table entry without `out`"))?)?;
                if table.rows.insert(row, out).is_some() {
                    return Err(format_err(format!("duplicate row in the table of {name}")));
                }
            }
            model.set_equation(name, Equation::Table(table));
        }
    }

    if let Some(patches) = doc.get("patches") {
        let patches = patches
            .as_array()
            .ok_or_else(|| format_err("`patches` must be an array"))?;
        for p in patches {
            let var = parse_var(
                p.get("var")
                    .and_then(Json::as_str)
                    .ok_or_else(|| format_err("patch without `var`"))?,
            )?;
            let domain = model.domain(&var)?;
            let row = row_from_json(
                &var,
                &domain,
                p.get("row").ok_or_else(|| format_err("patch without `row`"))?,
            )?;
            let out = outputs_from_json(p.get("out").ok_or_else(|| format_err("patch without `out`"))?)?;
            model = model.with_row_override(var, row, out);
        }
    }
    if let Some(calc) = calculator.as_mut() {
        calc.model = model.clone();
    }
    let report = validate_model(&model);
    if !report.is_ok() {
        return Err(IoError::Invalid(report.defects));
    }
    Ok(LoadedModel { model, calculator })
}

pub fn parse_model(text: &str) -> Result<LoadedModel, IoError> {
    let j: Json = serde_json::from_str(text).map_err(|e| IoError::Json {
        context: "model".into(),
        source: e,
    })?;
    model_from_json(&j)
}
