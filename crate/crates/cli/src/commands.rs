use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use caperc_core::census::{DEFAULT_MAX_CYCLE_LEN, MAX_CYCLE_LEN_CAP};
use caperc_core::graph::{deserialize, figure1_gadget};
use caperc_core::montecarlo::{
    self, quantile, ExperimentConfig, DEFAULT_WORK_LIMIT, ExperimentOutput, Measurement, SummaryStats,
    SUMMARY_CSV_HEADER,
};
use caperc_core::seed::{split, SEED_POLICY};
use caperc_core::theory::{self, Regime, TheoryConstants};
use caperc_core::{ca_partition, census, enumerate_cycles, ColorParams, ColoredMultigraph};

use crate::output::{cell, document, emit, pretty};
use crate::{verify, Cli, Command, Failure, Format, Shared};

pub fn dispatch(cli: Cli) -> Result<(), Failure> {
    let shared = cli.shared;
    match cli.command {
        Command::Constants { q, lambda } => constants(&shared, q.zip(lambda)),
        Command::Simulate {
            measure,
            q_black,
            lambda_single,
            work_limit,
        } => {
            let mut cfg = base_config(&shared)?;
            if let Some(m) = measure {
                cfg.measurements = parse_measurements(&m)?;
            }
            if q_black.is_some() {
                cfg.q_black = q_black;
            }
            if lambda_single.is_some() {
                cfg.lambda_single = lambda_single;
            }
            if let Some(w) = work_limit {
                cfg.work_limit = w;
            }
            default_measurement(&mut cfg);
            simulate(&shared, cfg)
        }
        Command::Census { fixture, graph } => census_cmd(&shared, fixture.as_deref(), graph.as_deref()),
        Command::Convergence {
            ns,
            lambda_single,
            work_limit,
        } => {
            let mut cfg = base_config(&shared)?;
            if lambda_single.is_some() {
                cfg.lambda_single = lambda_single;
            }
            if let Some(w) = work_limit {
                cfg.work_limit = w;
            }
            convergence(&shared, cfg, &ns)
        }
        Command::Verify {
            suites,
            self_test_negative,
        } => verify::run(&shared, suites, self_test_negative),
    }
}

/// Parses `--lambdas`: syntax errors are usage errors, invalid values are
/// domain errors.
fn parse_lambdas(text: &str) -> Result<ColorParams, Failure> {
    let values = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("--lambdas: cannot parse {:?} as a number", t.trim())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    ColorParams::new(&values).map_err(|e| Failure::flag("lambdas", e))
}

fn params_flag(shared: &Shared) -> Result<Option<ColorParams>, Failure> {
    shared.lambdas.as_deref().map(parse_lambdas).transpose()
}

fn require_params(shared: &Shared) -> Result<ColorParams, Failure> {
    params_flag(shared)?.ok_or_else(|| Failure::Usage("--lambdas is required".into()))
}

fn parse_measurements(text: &str) -> Result<BTreeSet<Measurement>, Failure> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse().map_err(|_| Failure::Usage(format!("--measure: unknown measurement {s:?}"))))
        .collect()
}

fn max_cycle_len(shared: &Shared) -> Result<usize, Failure> {
    let m = shared.max_cycle_len.unwrap_or(DEFAULT_MAX_CYCLE_LEN);
    if (3..=MAX_CYCLE_LEN_CAP).contains(&m) {
        Ok(m)
    } else {
        Err(Failure::Domain(format!(
            "--max-cycle-len: {m} outside [3, {MAX_CYCLE_LEN_CAP}]"
        )))
    }
}

/// Config file (if any) with flags applied on top.
fn base_config(shared: &Shared) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &shared.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_kv_text(&text).map_err(|e| Failure::flag("config", e))?
        }
        None => ExperimentConfig {
            params: None,
            n: 0,
            trials: 1,
            master_seed: 0,
            max_cycle_len: DEFAULT_MAX_CYCLE_LEN,
            measurements: BTreeSet::new(),
            q_black: None,
            lambda_single: None,
            work_limit: DEFAULT_WORK_LIMIT,
        },
    };
    if let Some(p) = params_flag(shared)? {
        cfg.params = Some(p);
    }
    if let Some(n) = shared.n {
        cfg.n = n;
    }
    if let Some(t) = shared.trials {
        cfg.trials = t;
    }
    if let Some(s) = shared.seed {
        cfg.master_seed = s;
    }
    if shared.max_cycle_len.is_some() {
        cfg.max_cycle_len = max_cycle_len(shared)?;
    }
    Ok(cfg)
}

fn require_n(cfg: &ExperimentConfig) -> Result<(), Failure> {
    if cfg.n == 0 {
        return Err(Failure::Usage("--n is required".into()));
    }
    Ok(())
}

fn default_measurement(cfg: &mut ExperimentConfig) {
    if cfg.measurements.is_empty() {
        if cfg.params.is_some() {
            cfg.measurements.insert(Measurement::Ca);
        }
        if cfg.lambda_single.is_some() {
            cfg.measurements.insert(if cfg.q_black.is_some() {
                Measurement::BlackClusters
            } else {
                Measurement::Components
            });
        }
    }
}

fn execute(shared: &Shared, cfg: &ExperimentConfig) -> Result<ExperimentOutput, Failure> {
    require_n(cfg)?;
    let colored = cfg.measures(Measurement::Ca) || cfg.measures(Measurement::Census);
    if cfg.params.is_none() && (colored || cfg.lambda_single.is_none()) {
        return Err(Failure::Usage("--lambdas is required".into()));
    }
    let out = match shared.threads {
        Some(t) => montecarlo::run_with_threads(cfg, t)?,
        None => montecarlo::run(cfg)?,
    };
    Ok(out)
}

fn config_echo(cfg: &ExperimentConfig) -> Value {
    let mut v = json!({
        "n": cfg.n,
        "trials": cfg.trials,
        "seed": cfg.master_seed,
        "seed_policy": SEED_POLICY,
        "max_cycle_len": cfg.max_cycle_len,
        "measurements": cfg.measurements.iter().map(|m| m.as_str()).collect::<Vec<_>>(),
        "work_limit": cfg.work_limit.to_string(),
    });
    if let Some(p) = &cfg.params {
        v["lambdas_input"] = json!(p.input_order());
        v["lambdas_sorted"] = json!(p.lambdas());
        v["regime"] = json!(theory::classify_regime(p).as_str());
    }
    if let Some(l) = cfg.lambda_single {
        v["lambda_single"] = json!(l);
    }
    if let Some(q) = cfg.q_black {
        v["q_black"] = json!(q);
    }
    v
}

fn summary_csv(rows: &[SummaryStats]) -> String {
    let mut s = String::from(SUMMARY_CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

fn constants(shared: &Shared, rho_query: Option<(f64, f64)>) -> Result<(), Failure> {
    let params = require_params(shared)?;
    let m = max_cycle_len(shared)?;
    let c = TheoryConstants::compute(&params, m, rho_query).map_err(|e| {
        if rho_query.is_some() {
            Failure::flag("q/--lambda", e)
        } else {
            Failure::from(e)
        }
    })?;
    let mut body = serde_json::to_value(&c).expect("plain data");
    body["lambdas_input"] = json!(params.input_order());
    body["max_cycle_len"] = json!(m);
    let doc = document(body);
    let text = match shared.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&doc),
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", &doc, &mut rows);
            let mut s = String::from("key,value\n");
            for (k, v) in rows {
                s.push_str(&format!("{k},{v}\n"));
            }
            s
        }
    };
    emit(shared.out.as_deref(), &text)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(o) => o.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&(i + 1).to_string()), v, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn simulate(shared: &Shared, cfg: ExperimentConfig) -> Result<(), Failure> {
    let out = execute(shared, &cfg)?;
    let format = shared.format.unwrap_or(Format::Json);
    let lines: String = out.records.iter().map(|r| r.to_json_line() + "\n").collect();
    let summary = document(json!({
        "kind": "summary",
        "regime": out.regime.map(Regime::as_str),
        "conjectural": out.conjectural,
        "summary": out.summary,
    }));
    let config = document(json!({ "kind": "config", "config": config_echo(&cfg) }));
    match &shared.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
            emit(Some(&dir.join("config.json")), &pretty(&config))?;
            emit(Some(&dir.join("trials.jsonl")), &lines)?;
            match format {
                Format::Json => emit(Some(&dir.join("summary.json")), &pretty(&summary)),
                Format::Csv => emit(Some(&dir.join("summary.csv")), &summary_csv(&out.summary)),
            }
        }
        None => match format {
            Format::Json => {
                let text = format!("{}\n{lines}{}\n", config, summary);
                emit(None, &text)
            }
            Format::Csv => emit(None, &summary_csv(&out.summary)),
        },
    }
}

/// `fig1:<ell>` or `fig1:<ell>+close`.
fn parse_fixture(text: &str) -> Result<ColoredMultigraph, Failure> {
    let bad = || Failure::Usage(format!("--fixture: expected fig1:<ell>[+close], got {text:?}"));
    let rest = text.strip_prefix("fig1:").ok_or_else(bad)?;
    let (ell, closing) = match rest.strip_suffix("+close") {
        Some(e) => (e, true),
        None => (rest, false),
    };
    let ell: usize = ell.parse().map_err(|_| bad())?;
    if ell == 0 {
        return Err(Failure::Domain("--fixture: ell must be at least 1".into()));
    }
    Ok(figure1_gadget(ell, closing))
}

fn census_cmd(shared: &Shared, fixture: Option<&str>, graph: Option<&Path>) -> Result<(), Failure> {
    let m = max_cycle_len(shared)?;
    let source = match (fixture, graph) {
        (Some(f), _) => Some((f.to_string(), parse_fixture(f)?)),
        (None, Some(p)) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            Some((p.display().to_string(), deserialize(&text).map_err(|e| Failure::flag("graph", e))?))
        }
        (None, None) => None,
    };
    let doc = match source {
        Some((name, g)) => single_census(&name, &g, m)?,
        None => {
            let mut cfg = base_config(shared)?;
            cfg.max_cycle_len = m;
            if cfg.params.is_none() {
                return Err(Failure::Usage("--lambdas is required without --fixture".into()));
            }
            cfg.measurements = [Measurement::Ca, Measurement::Census].into();
            let out = execute(shared, &cfg)?;
            if matches!(shared.format, Some(Format::Csv)) {
                return emit(shared.out.as_deref(), &census_csv(&cfg, &out));
            }
            census_summary(&cfg, &out)
        }
    };
    emit(shared.out.as_deref(), &pretty(&doc))
}

fn single_census(name: &str, g: &ColoredMultigraph, m: usize) -> Result<Value, Failure> {
    let c = census(g, m)?;
    let report = ca_partition(g);
    let cycles: Vec<Value> = enumerate_cycles(g, m)?
        .iter()
        .map(|cy| {
            json!({
                "vertices": cy.vertices,
                "colors": cy.edge_colors.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                "max_parts": cy.max_parts,
            })
        })
        .collect();
    let blocks: Vec<Vec<usize>> = report.partition.blocks().into_iter().filter(|b| b.len() > 1).collect();
    Ok(document(json!({
        "source": name,
        "n": g.n(),
        "k": g.k(),
        "max_cycle_len": m,
        "census": c.to_json(),
        "cycles": cycles,
        "ca": {
            "histogram": report.histogram,
            "max_size": report.max_size,
            "nontrivial_blocks": blocks,
        },
    })))
}

fn stat_entry(s: &SummaryStats, predicted: Option<f64>) -> Value {
    let mut v = json!({ "mean": s.mean, "se": s.se });
    if let Some(p) = predicted {
        v["predicted"] = json!(p);
    }
    if let Some(g) = &s.gof {
        v["gof_p_value"] = json!(g.p_value);
    }
    v
}

fn predictions(p: &ColorParams, max_len: usize) -> BTreeMap<String, f64> {
    let mut pred = BTreeMap::new();
    for m in 2..=max_len {
        if let Ok(g) = theory::gamma_m(p, m) {
            pred.insert(format!("C_{m}"), g);
        }
    }
    if let Ok(b) = theory::beta_top(p) {
        pred.insert(format!("N_{}", p.k()), b);
    }
    pred
}

fn census_summary(cfg: &ExperimentConfig, out: &ExperimentOutput) -> Value {
    let p = cfg.params.as_ref().expect("checked");
    let pred = predictions(p, cfg.max_cycle_len);
    let with_pred = cfg.trials > 1;
    let stats: BTreeMap<String, Value> = out
        .summary
        .iter()
        .map(|s| {
            let predicted = if with_pred { pred.get(&s.name).copied() } else { None };
            (s.name.clone(), stat_entry(s, predicted))
        })
        .collect();
    let consistent = out
        .records
        .iter()
        .filter(|r| r.census_consistent(p.k()) == Some(true))
        .count();
    let mut body = json!({
        "config": config_echo(cfg),
        "stats": stats,
        "consistent_fraction": consistent as f64 / out.records.len() as f64,
    });
    if cfg.trials == 1 {
        body["census"] = out.records[0].census.as_ref().expect("measured").to_json();
    }
    document(body)
}

fn census_csv(cfg: &ExperimentConfig, out: &ExperimentOutput) -> String {
    let pred = predictions(cfg.params.as_ref().expect("checked"), cfg.max_cycle_len);
    let mut s = String::from("name,mean,se,predicted\n");
    for r in &out.summary {
        s.push_str(&format!("{},{:.6},{:.6},{}\n", r.name, r.mean, r.se, cell(pred.get(&r.name).copied())));
    }
    s
}

/// Limit constant and normalization the largest cluster is compared with.
fn target(cfg: &ExperimentConfig) -> (Option<f64>, &'static str) {
    match (&cfg.params, cfg.lambda_single) {
        (Some(p), _) => match theory::classify_regime(p) {
            Regime::Supercritical => (Some(theory::a1(p)), "n"),
            Regime::IntermediateStrict => (theory::a2(p).ok(), "log_n"),
            Regime::Subcritical => (Some(p.k() as f64), "1"),
            _ => (None, "log_n"),
        },
        (None, Some(l)) if l < 1.0 => (theory::rate_i(l).ok().map(|i| 1.0 / i), "log_n"),
        (None, Some(l)) if l > 1.0 => (theory::mu(l).ok(), "n"),
        _ => (None, "log_n"),
    }
}

fn convergence(shared: &Shared, mut base: ExperimentConfig, ns: &[usize]) -> Result<(), Failure> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::Domain("--ns: values must be strictly ascending".into()));
    }
    base.measurements.clear();
    if base.params.is_some() {
        base.measurements.insert(Measurement::Ca);
    } else {
        base.measurements.insert(Measurement::Components);
    }
    let (goal, norm) = target(&base);
    let mut rows = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.n = n;
        cfg.master_seed = split(base.master_seed, i as u64);
        let out = execute(shared, &cfg)?;
        let mut sizes: Vec<f64> = out
            .records
            .iter()
            .map(|r| r.max_ca_size.or(r.largest_component).unwrap_or(0) as f64)
            .collect();
        let s = SummaryStats::from_values("max", &sizes)?;
        sizes.sort_by(f64::total_cmp);
        let log_n = (n as f64).ln();
        rows.push(json!({
            "n": n,
            "trials": cfg.trials,
            "mean": s.mean,
            "se": s.se,
            "over_log_n": s.mean / log_n,
            "over_log_n_se": s.se / log_n,
            "over_n": s.mean / n as f64,
            "over_n_se": s.se / n as f64,
            "q50": quantile(&sizes, 0.5),
            "q90": quantile(&sizes, 0.9),
            "q99": quantile(&sizes, 0.99),
            "max": sizes.last().copied().unwrap_or(0.0),
        }));
    }
    let mut echo = config_echo(&base);
    echo.as_object_mut().expect("object").remove("n");
    echo["ns"] = json!(ns);
    let text = match shared.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let cols = [
                "n", "trials", "mean", "se", "over_log_n", "over_log_n_se", "over_n", "over_n_se", "q50",
                "q90", "q99", "max",
            ];
            let mut s = cols.join(",") + ",target,target_scale\n";
            for r in &rows {
                let cells: Vec<String> = cols.iter().map(|c| r[c].to_string()).collect();
                s.push_str(&format!("{},{},{norm}\n", cells.join(","), cell(goal)));
            }
            s
        }
        Format::Json => pretty(&document(json!({
            "config": echo,
            "rows": rows,
            "target": goal,
            "target_scale": norm,
        }))),
    };
    emit(shared.out.as_deref(), &text)
}
