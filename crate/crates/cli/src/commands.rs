use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use scdkit::bounds::{layer_pairs, ln_biguint, theorem2_layer_count};
use scdkit::construct::hypergrid_to_boolean;
use scdkit::counting::{
    count_scd_oracle, count_scd_threelevel, sample_many, CountOptions, LayeredCounter,
};
use scdkit::gadget::{
    build_gadget_regular, build_gadget_snmf, matrix_from_json, SumCheck, ThreeLevelPoset,
};
use scdkit::permanent::{
    bregman_upper, falikman_lower_ln, permanent_ryser, Arithmetic, MatchingCount,
};
use scdkit::scd::{scd_from_json, scd_to_json, validate_scd};
use scdkit::snmf::{compute_snmf_range, minimize_max_weight, to_f64, FLOAT_TOLERANCE};
use scdkit::{
    btk_decomposition, build_poset, gk_decomposition, lemma3_bounds, lemma8_lower, level_sizes,
    theorem1_bounds, theorem2_lower, trivial_upper, Formula, GradedPoset, LogBound, PosetKind,
};
use serde_json::{json, Value};

use crate::output::{cell, float_cell, int_json, write_csv, write_json, Format};
use crate::{
    BoundsArgs, CacheArgs, Command, ConstructArgs, ConstructMethod, CountArgs, CountMethod, Ctx,
    Failure, GadgetArgs, PermArgs, PermMode, PosetSel, SampleArgs, Shape, SnmfArgs, Status,
    ValidateArgs,
};

type CmdResult = Result<Status, Failure>;

pub(crate) fn dispatch(cmd: &Command, ctx: &mut Ctx<'_>) -> CmdResult {
    match cmd {
        Command::Levels(a) => levels(a, ctx),
        Command::Construct(a) => construct(a, ctx),
        Command::Validate(a) => validate(a, ctx),
        Command::Count(a) => count(a, ctx),
        Command::Gadget(a) => gadget(a, ctx),
        Command::Perm(a) => perm(a, ctx),
        Command::Bounds(a) => bounds(a, ctx),
        Command::Snmf(a) => snmf(a, ctx),
        Command::Sample(a) => sample(a, ctx),
    }
}

fn poset_of(sel: &PosetSel, ctx: &Ctx<'_>) -> Result<GradedPoset, Failure> {
    Ok(build_poset(sel.kind(), sel.t, sel.n, &ctx.limits)?)
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{} is not JSON: {e}", path.display())))
}

fn write_file(path: &Path, v: &Value) -> Result<(), Failure> {
    fs::write(path, format!("{v}\n"))
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn cache_dir(args: &CacheArgs) -> Option<PathBuf> {
    if args.no_cache {
        return None;
    }
    args.cache_dir
        .clone()
        .or_else(|| std::env::var_os("SCDKIT_CACHE").map(PathBuf::from))
        .or_else(|| dirs::cache_dir().map(|d| d.join("scdkit")))
}

fn levels(a: &Shape, ctx: &mut Ctx<'_>) -> CmdResult {
    let sizes = level_sizes(a.t, a.n)?;
    match ctx.format {
        Format::Json => write_json(
            ctx.out,
            &Value::from(sizes.iter().map(int_json).collect::<Vec<_>>()),
        )?,
        Format::Csv => write_csv(
            ctx.out,
            &["level", "size"],
            sizes
                .iter()
                .enumerate()
                .map(|(i, s)| vec![i.to_string(), s.to_string()]),
        )?,
    }
    Ok(Status::Ok)
}

fn construct(a: &ConstructArgs, ctx: &mut Ctx<'_>) -> CmdResult {
    let kind = a.sel.kind();
    if kind == PosetKind::Boolean && a.sel.t != 2 {
        return Err(Failure::Usage(format!(
            "the Boolean lattice has t = 2, got --t {}",
            a.sel.t
        )));
    }
    let (poset, scd) = match (a.method, kind) {
        (ConstructMethod::Gk, PosetKind::Boolean) => gk_decomposition(a.sel.n, &ctx.limits)?,
        (ConstructMethod::Gk, PosetKind::Hypergrid) => {
            return Err(Failure::Usage(
                "gk builds 2^[n] only; use --method btk or --poset boolean".into(),
            ))
        }
        (ConstructMethod::Btk, PosetKind::Hypergrid) => {
            btk_decomposition(a.sel.t, a.sel.n, &ctx.limits)?
        }
        (ConstructMethod::Btk, PosetKind::Boolean) => {
            let (grid, scd) = btk_decomposition(2, a.sel.n, &ctx.limits)?;
            hypergrid_to_boolean(&grid, &scd, &ctx.limits)?
        }
    };
    let doc = scd_to_json(&poset, &scd);
    if let Some(path) = &a.out {
        write_file(path, &doc)?;
        ctx.log(&format!("wrote {} chains to {}", scd.len(), path.display()));
        let summary = json!({ "chains": scd.len(), "out": path.display().to_string() });
        match ctx.format {
            Format::Json => write_json(ctx.out, &summary)?,
            Format::Csv => write_csv(
                ctx.out,
                &["chains", "out"],
                [vec![scd.len().to_string(), path.display().to_string()]],
            )?,
        }
        return Ok(Status::Ok);
    }
    match ctx.format {
        Format::Json => write_json(ctx.out, &doc)?,
        Format::Csv => write_csv(
            ctx.out,
            &["chain", "position", "element"],
            chain_rows(&poset, &doc["chains"]),
        )?,
    }
    Ok(Status::Ok)
}

fn chain_rows(_poset: &GradedPoset, chains: &Value) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (c, chain) in chains.as_array().into_iter().flatten().enumerate() {
        for (p, e) in chain.as_array().into_iter().flatten().enumerate() {
            rows.push(vec![c.to_string(), p.to_string(), cell(e)]);
        }
    }
    rows
}

fn validate(a: &ValidateArgs, ctx: &mut Ctx<'_>) -> CmdResult {
    let doc = read_json(&a.input)?;
    let (poset, chains) = scd_from_json(&doc, &ctx.limits)?;
    let report = validate_scd(&poset, &chains)?;
    match ctx.format {
        Format::Json => write_json(
            ctx.out,
            &serde_json::to_value(&report).map_err(scdkit::Error::from)?,
        )?,
        Format::Csv => {
            let base = vec![report.ok.to_string(), report.chain_count.to_string()];
            let rows: Vec<Vec<String>> = if report.violations.is_empty() {
                vec![[base.clone(), vec![String::new(), String::new()]].concat()]
            } else {
                report
                    .violations
                    .iter()
                    .map(|v| {
                        let kind = serde_json::to_value(v)
                            .ok()
                            .and_then(|j| j["kind"].as_str().map(str::to_owned));
                        [base.clone(), vec![kind.unwrap_or_default(), v.to_string()]].concat()
                    })
                    .collect()
            };
            write_csv(ctx.out, &["ok", "chain_count", "violation", "detail"], rows)?
        }
    }
    if report.ok {
        Ok(Status::Ok)
    } else {
        ctx.log(&format!("{} violation(s)", report.violations.len()));
        Ok(Status::Invalid)
    }
}

fn layered<'p>(
    poset: &'p GradedPoset,
    cache: &CacheArgs,
    ctx: &Ctx<'_>,
) -> Result<LayeredCounter<'p>, Failure> {
    let opts = CountOptions {
        cache_dir: cache_dir(cache),
        shuffle_seed: None,
    };
    Ok(LayeredCounter::build(poset, &ctx.limits, &opts)?)
}

fn count(a: &CountArgs, ctx: &mut Ctx<'_>) -> CmdResult {
    let poset = poset_of(&a.sel, ctx)?;
    let oracle = match a.method {
        CountMethod::Oracle | CountMethod::Both => Some(count_scd_oracle(&poset, &ctx.limits)?),
        CountMethod::Layered => None,
    };
    let layered = match a.method {
        CountMethod::Layered | CountMethod::Both => {
            Some(layered(&poset, &a.cache, ctx)?.total().clone())
        }
        CountMethod::Oracle => None,
    };
    let agree = match (&oracle, &layered) {
        (Some(o), Some(l)) => Some(o == l),
        _ => None,
    };
    match ctx.format {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            if let Some(o) = &oracle {
                obj.insert("oracle".into(), int_json(o));
            }
            if let Some(l) = &layered {
                obj.insert("layered".into(), int_json(l));
            }
            if let Some(ok) = agree {
                obj.insert("agree".into(), Value::from(ok));
            }
            write_json(ctx.out, &Value::Object(obj))?
        }
        Format::Csv => {
            let mut rows = Vec::new();
            if let Some(o) = &oracle {
                rows.push(vec!["oracle".to_string(), o.to_string()]);
            }
            if let Some(l) = &layered {
                rows.push(vec!["layered".to_string(), l.to_string()]);
            }
            write_csv(ctx.out, &["method", "count"], rows)?
        }
    }
    if agree == Some(false) {
        ctx.log("oracle and layered counts disagree");
        return Ok(Status::Invalid);
    }
    Ok(Status::Ok)
}

fn gadget(a: &GadgetArgs, ctx: &mut Ctx<'_>) -> CmdResult {
    let poset = poset_of(&a.sel, ctx)?;
    let total_rank = poset.total_rank();
    let middle = match a.slice {
        Some(i) => i,
        None if total_rank % 2 == 0 => total_rank / 2,
        None => {
            return Err(Failure::Usage(format!(
                "total rank {total_rank} is odd; pass --slice"
            )))
        }
    };
    let p3 = ThreeLevelPoset::slice(&poset, middle)?;
    let regular = p3.regular_degree().ok();
    let g = if a.snmf {
        let flow = compute_snmf_range(&poset, Some(middle - 1..=middle), &ctx.limits)?;
        let sf = flow.slice_flow(&poset, &p3)?;
        build_gadget_snmf(&p3, &sf, SumCheck::Exact)?
    } else {
        build_gadget_regular(&p3)?
    };
    let matchings = count_scd_threelevel(&p3, &ctx.limits)?;
    if let Some(path) = &a.dump {
        write_file(path, &g.to_json(Some(&poset)))?;
        ctx.log(&format!(
            "wrote {}x{} matrix to {}",
            g.size(),
            g.size(),
            path.display()
        ));
    }
    let fields: Vec<(&str, Value)> = vec![
        ("slice", Value::from(middle)),
        ("a", Value::from(p3.a())),
        ("b", Value::from(p3.b())),
        ("size", Value::from(g.size())),
        (
            "weighting",
            Value::from(if a.snmf { "snmf" } else { "regular" }),
        ),
        ("regular_degree", regular.map_or(Value::Null, Value::from)),
        ("doubly_stochastic", Value::from(g.is_doubly_stochastic())),
        ("matchings", int_json(&matchings)),
        (
            "dump",
            a.dump
                .as_ref()
                .map_or(Value::Null, |p| Value::from(p.display().to_string())),
        ),
    ];
    key_values(ctx, fields)?;
    Ok(Status::Ok)
}

fn key_values(ctx: &mut Ctx<'_>, fields: Vec<(&str, Value)>) -> Result<(), Failure> {
    match ctx.format {
        Format::Json => {
            let obj: serde_json::Map<String, Value> = fields
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect();
            write_json(ctx.out, &Value::Object(obj))?
        }
        Format::Csv => {
            let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let row: Vec<String> = fields
                .iter()
                .map(|(_, v)| if v.is_null() { String::new() } else { cell(v) })
                .collect();
            write_csv(ctx.out, &header, [row])?
        }
    }
    Ok(())
}

fn perm(a: &PermArgs, ctx: &mut Ctx<'_>) -> CmdResult {
    let doc = read_json(&a.input)?;
    let m = matrix_from_json(&doc)?;
    let k = m.size();
    let mode = match a.mode {
        PermMode::Rational => Arithmetic::Rational,
        PermMode::Float => Arithmetic::Float,
    };
    let value = permanent_ryser(&m, mode, &ctx.limits)?;
    let approx = value.to_f64();
    let exact = match &value {
        MatchingCount::Exact(r) => Value::from(r.to_string()),
        MatchingCount::Approx(f) => Value::from(*f),
    };
    let stochastic = m.is_doubly_stochastic();
    let falikman = falikman_lower_ln(k).exp();
    let bregman = bregman_upper(&m.row_support()).ok().map(f64::exp);
    let fields = vec![
        ("size", Value::from(k)),
        (
            "mode",
            Value::from(if mode == Arithmetic::Rational {
                "rational"
            } else {
                "float"
            }),
        ),
        ("permanent", exact),
        ("approx", Value::from(approx)),
        ("doubly_stochastic", Value::from(stochastic)),
        ("falikman_lower", Value::from(falikman)),
        ("bregman_upper", bregman.map_or(Value::Null, Value::from)),
    ];
    key_values(ctx, fields)?;
    Ok(Status::Ok)
}

/// Parses `k=v,k=v`.
fn parse_params(s: &str) -> Result<BTreeMap<String, String>, Failure> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("parameter `{part}` is not key=value")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn param<T: std::str::FromStr>(p: &BTreeMap<String, String>, key: &str) -> Result<T, Failure> {
    let raw = p
        .get(key)
        .ok_or_else(|| Failure::Usage(format!("missing parameter `{key}`")))?;
    raw.parse()
        .map_err(|_| Failure::Usage(format!("parameter `{key}` has invalid value `{raw}`")))
}

/// Exact count of a whole poset when it is small enough to count quickly.
fn small_count(t: u32, n: u32, ctx: &Ctx<'_>) -> Result<Option<BigUint>, Failure> {
    let size = (t as u64).checked_pow(n);
    if size.is_none_or(|s| s > ctx.limits.oracle_max_elements) {
        return Ok(None);
    }
    let kind = if t == 2 {
        PosetKind::Boolean
    } else {
        PosetKind::Hypergrid
    };
    let poset = build_poset(kind, t, n, &ctx.limits)?;
    let counter = LayeredCounter::build(&poset, &ctx.limits, &CountOptions::default())?;
    Ok(Some(counter.total().clone()))
}

/// Per-layer `W_s`, each the larger optimum of the two level pairs it uses.
fn computed_weights(t: u32, n: u32, ctx: &Ctx<'_>) -> Result<Vec<f64>, Failure> {
    let kind = if t == 2 {
        PosetKind::Boolean
    } else {
        PosetKind::Hypergrid
    };
    let poset = build_poset(kind, t, n, &ctx.limits)?;
    let layers = theorem2_layer_count(t, n);
    if layers == 0 {
        return Ok(vec![1.0]);
    }
    let m = poset.total_rank();
    let (lowest, _) = layer_pairs(m, layers);
    let (_, highest) = layer_pairs(m, layers);
    let flow = minimize_max_weight(&poset, Some(lowest..=highest), &ctx.limits)?;
    (1..=layers)
        .map(|s| {
            let (p, q) = layer_pairs(m, s);
            let w = |i| {
                flow.pair_weight(i)
                    .map(to_f64)
                    .ok_or_else(|| Failure::Usage("missing pair".into()))
            };
            Ok(w(p)?.max(w(q)?))
        })
        .collect()
}

struct BoundRow {
    params: Vec<(String, String)>,
    bound: LogBound,
    ln_count: Option<f64>,
    weights: Option<Vec<f64>>,
}

fn bound_row(
    formula: Formula,
    p: &BTreeMap<String, String>,
    ctx: &Ctx<'_>,
) -> Result<BoundRow, Failure> {
    let keys: &[&str] = match formula {
        Formula::Lemma3 => &["a", "b", "r"],
        Formula::Lemma8 => &["a", "b", "W"],
        Formula::Thm1 => &["n"],
        Formula::Thm2 => &["t", "n", "W"],
        Formula::Trivial => &["t", "n"],
    };
    if let Some(extra) = p
        .keys()
        .find(|k| !keys.contains(&k.as_str()) && k.as_str() != "count")
    {
        return Err(Failure::Usage(format!(
            "parameter `{extra}` does not apply to {formula}"
        )));
    }
    let mut weights = None;
    let mut small = None;
    let bound = match formula {
        Formula::Lemma3 => lemma3_bounds(param(p, "a")?, param(p, "b")?, param(p, "r")?)?,
        Formula::Lemma8 => lemma8_lower(param(p, "a")?, param(p, "b")?, param(p, "W")?)?,
        Formula::Thm1 => {
            let n: u32 = param(p, "n")?;
            small = Some((2, n));
            theorem1_bounds(n)?
        }
        Formula::Thm2 => {
            let (t, n): (u32, u32) = (param(p, "t")?, param(p, "n")?);
            small = Some((t, n));
            let ws = match p.get("W") {
                Some(raw) => raw
                    .split(':')
                    .map(|w| w.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| Failure::Usage(format!("invalid W list `{raw}`")))?,
                None => computed_weights(t, n, ctx)?,
            };
            let b = theorem2_lower(t, n, &ws)?;
            weights = Some(ws);
            b
        }
        Formula::Trivial => {
            let (t, n): (u32, u32) = (param(p, "t")?, param(p, "n")?);
            small = Some((t, n));
            trivial_upper(t, n)?
        }
    };
    let ln_count = match p.get("count") {
        Some(raw) => {
            let c: BigUint = raw
                .parse()
                .map_err(|_| Failure::Usage(format!("invalid count `{raw}`")))?;
            Some(ln_biguint(&c))
        }
        None => match small {
            Some((t, n)) => small_count(t, n, ctx)?.map(|c| ln_biguint(&c)),
            None => None,
        },
    };
    let params = keys
        .iter()
        .map(|&k| {
            let v = match (k, &weights) {
                ("W", Some(ws)) => ws.iter().map(f64::to_string).collect::<Vec<_>>().join(":"),
                _ => p.get(k).cloned().unwrap_or_default(),
            };
            (k.to_string(), v)
        })
        .collect();
    Ok(BoundRow {
        params,
        bound,
        ln_count,
        weights,
    })
}

fn bounds(a: &BoundsArgs, ctx: &mut Ctx<'_>) -> CmdResult {
    let rows = a
        .params
        .iter()
        .map(|raw| bound_row(a.formula, &parse_params(raw)?, ctx))
        .collect::<Result<Vec<_>, _>>()?;
    let inside = |r: &BoundRow| r.ln_count.map(|c| r.bound.contains(c, 1e-12));
    match ctx.format {
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut v = serde_json::to_value(&r.bound).unwrap_or(Value::Null);
                    v["exact_log_count"] = r.ln_count.map_or(Value::Null, Value::from);
                    v["inside_sandwich"] = inside(r).map_or(Value::Null, Value::from);
                    if let Some(ws) = &r.weights {
                        v["W"] = Value::from(ws.clone());
                    }
                    v
                })
                .collect();
            write_json(ctx.out, &Value::from(items))?
        }
        Format::Csv => {
            let mut header = vec!["formula".to_string()];
            if let Some(first) = rows.first() {
                header.extend(first.params.iter().map(|(k, _)| k.clone()));
            }
            header.extend(
                [
                    "log_lower",
                    "log_upper",
                    "normalized_lower",
                    "normalized_upper",
                    "exact_log_count_if_available",
                    "inside_sandwich",
                ]
                .map(String::from),
            );
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            let body = rows.iter().map(|r| {
                let mut row = vec![a.formula.to_string()];
                row.extend(r.params.iter().map(|(_, v)| v.clone()));
                row.push(float_cell(r.bound.log_lower));
                row.push(float_cell(r.bound.log_upper));
                row.push(float_cell(r.bound.normalized_lower));
                row.push(float_cell(r.bound.normalized_upper));
                row.push(float_cell(r.ln_count));
                row.push(inside(r).map(|b| b.to_string()).unwrap_or_default());
                row
            });
            write_csv(ctx.out, &header_refs, body)?
        }
    }
    if rows.iter().any(|r| inside(r) == Some(false)) {
        ctx.log("a known count falls outside its bounds");
        return Ok(Status::Invalid);
    }
    Ok(Status::Ok)
}

fn parse_pairs(s: &str) -> Result<std::ops::RangeInclusive<usize>, Failure> {
    let bad = || Failure::Usage(format!("--pairs expects a..b, got `{s}`"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    Ok(lo.trim().parse().map_err(|_| bad())?..=hi.trim().parse().map_err(|_| bad())?)
}

fn snmf(a: &SnmfArgs, ctx: &mut Ctx<'_>) -> CmdResult {
    let poset = poset_of(&a.sel, ctx)?;
    let range = a.pairs.as_deref().map(parse_pairs).transpose()?;
    let (flow, minmax) = if a.minimize_max {
        let mm = minimize_max_weight(&poset, range, &ctx.limits)?;
        (mm.snmf.clone(), Some(mm))
    } else {
        (compute_snmf_range(&poset, range, &ctx.limits)?, None)
    };
    let checks = flow.check();
    let valid = checks.iter().all(|c| c.within(FLOAT_TOLERANCE));
    match ctx.format {
        Format::Json => {
            let mut doc = json!({
                "poset": poset.descriptor(),
                "pairs": flow.to_json(&poset),
                "checks": checks.iter().map(|c| json!({
                    "i": c.lower,
                    "exact": c.exact,
                    "max_up_error": c.max_up_error,
                    "max_down_error": c.max_down_error,
                })).collect::<Vec<_>>(),
                "valid": valid,
            });
            if let Some(mm) = &minmax {
                doc["max_weight"] = json!({
                    "per_pair": mm.per_pair.iter().map(|(i, w)| json!({
                        "i": i,
                        "w": to_f64(w),
                        "exact": w.to_string(),
                    })).collect::<Vec<_>>(),
                    "global": to_f64(&mm.global),
                });
            }
            write_json(ctx.out, &doc)?
        }
        Format::Csv => {
            let dump = flow.to_json(&poset);
            let mut rows = Vec::new();
            for pair in dump.as_array().into_iter().flatten() {
                for e in pair["edges"].as_array().into_iter().flatten() {
                    rows.push(vec![
                        pair["i"].to_string(),
                        cell(&e["from"]),
                        cell(&e["to"]),
                        cell(&e["weight"]),
                    ]);
                }
            }
            write_csv(ctx.out, &["i", "from", "to", "weight"], rows)?
        }
    }
    if valid {
        Ok(Status::Ok)
    } else {
        ctx.log("flow violates a vertex sum");
        Ok(Status::Invalid)
    }
}

fn sample(a: &SampleArgs, ctx: &mut Ctx<'_>) -> CmdResult {
    let poset = poset_of(&a.sel, ctx)?;
    let counter = layered(&poset, &a.cache, ctx)?;
    let samples = sample_many(&counter, a.seed, a.count)?;
    let mut all_valid = true;
    for s in &samples {
        all_valid &= validate_scd(&poset, s.chains())?.ok;
    }
    let encoded: Vec<Value> = samples
        .iter()
        .map(|s| scd_to_json(&poset, s)["chains"].clone())
        .collect();
    match ctx.format {
        Format::Json => write_json(
            ctx.out,
            &json!({
                "poset": { "kind": poset.kind().as_str(), "t": poset.t(), "n": poset.n() },
                "seed": a.seed,
                "total": int_json(counter.total()),
                "samples": encoded,
            }),
        )?,
        Format::Csv => {
            let mut rows = Vec::new();
            for (i, chains) in encoded.iter().enumerate() {
                for mut r in chain_rows(&poset, chains) {
                    r.insert(0, i.to_string());
                    rows.push(r);
                }
            }
            write_csv(ctx.out, &["sample", "chain", "position", "element"], rows)?
        }
    }
    if all_valid {
        Ok(Status::Ok)
    } else {
        Ok(Status::Invalid)
    }
}
