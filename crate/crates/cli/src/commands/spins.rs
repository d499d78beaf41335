use enlab_core::hopfield_ising::Couplings;
use enlab_core::rng::substream;
use enlab_core::{
    energy_floor, hebbian_weights, metropolis_run, recall, HopfieldNet, IsingModel, SpinState,
    UpdateOrder,
};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

use super::{num, read, units, Ctx};
use crate::config::parse_reals;
use crate::error::{CliError, CliResult};
use crate::output::{Report, Table};

fn states(key: &str, text: &str) -> CliResult<Vec<SpinState>> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<SpinState>()
                .map_err(|e| CliError::Validation(format!("config key `{key}`: {e}")))
        })
        .collect()
}

/// Whitespace- or comma-separated matrix rows; `#` starts a comment.
fn weight_matrix(text: &str) -> CliResult<Vec<Vec<f64>>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            parse_reals("weights", &l.replace(char::is_whitespace, ","))
                .map_err(|e| CliError::Validation(format!("weight file line {}: {e}", i + 1)))
        })
        .collect()
}

fn network(ctx: &Ctx) -> CliResult<(HopfieldNet, Vec<SpinState>)> {
    let cfg = &ctx.config;
    let patterns = cfg
        .str("patterns")
        .map(|t| states("patterns", t))
        .transpose()?
        .unwrap_or_default();
    if let Some(path) = cfg.path("weights") {
        let w = Couplings::from_rows(weight_matrix(&read(&path)?)?)?;
        let n = w.size();
        let theta = cfg.reals("thresholds")?.unwrap_or_else(|| vec![0.0; n]);
        return Ok((HopfieldNet::new(w, theta)?, patterns));
    }
    let n = patterns
        .first()
        .map(SpinState::len)
        .ok_or_else(|| CliError::Validation("set `patterns` or a `weights` file".into()))?;
    Ok((hebbian_weights(&patterns, n)?, patterns))
}

/// Asynchronous recall traces, one per trial.
pub fn hopfield(ctx: &Ctx) -> CliResult<Report> {
    let cfg = &ctx.config;
    cfg.allow(&[
        "patterns",
        "weights",
        "thresholds",
        "initial",
        "corrupt_bits",
        "trials",
        "order",
        "max_sweeps",
    ])?;
    let (net, patterns) = network(ctx)?;
    let n = net.size();
    let order = match cfg.str("order").unwrap_or("sequential") {
        "sequential" => UpdateOrder::Sequential,
        "random" => UpdateOrder::Random,
        other => {
            return Err(CliError::Validation(format!(
                "config key `order`: expected sequential or random, got `{other}`"
            )))
        }
    };
    let trials: usize = cfg.or("trials", 1)?;
    let max_sweeps: usize = cfg.or("max_sweeps", 100)?;
    let initial = cfg
        .str("initial")
        .map(|t| states("initial", t))
        .transpose()?;
    let corrupt: Option<usize> = cfg.parsed("corrupt_bits")?;
    if corrupt.is_some() && patterns.is_empty() {
        return Err(CliError::Validation(
            "`corrupt_bits` needs `patterns`".into(),
        ));
    }
    if corrupt.is_some_and(|k| k > n) {
        return Err(CliError::Validation(format!(
            "cannot corrupt more than {n} bits"
        )));
    }

    let mut rng = substream(ctx.seed, "cli.hopfield");
    let mut table = Table::new(&["trial", "step", "flipped", "energy", "state", "converged"]);
    let mut runs = Vec::new();
    for t in 0..trials {
        let init = match (&initial, corrupt) {
            (Some(list), _) if !list.is_empty() => list[t % list.len()].clone(),
            (_, Some(k)) => {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.shuffle(&mut rng);
                idx[..k]
                    .iter()
                    .fold(patterns[t % patterns.len()].clone(), |s, &i| s.flipped(i))
            }
            _ => SpinState::random(n, &mut rng),
        };
        let tr = recall(&net, &init, order, max_sweeps, rng.random())?;
        for (step, (s, e)) in tr.states.iter().zip(&tr.energies).enumerate() {
            let flipped = if step == 0 {
                Value::Null
            } else {
                json!(tr.flips[step - 1])
            };
            table.push(vec![
                json!(t),
                json!(step),
                flipped,
                num(*e),
                json!(s.to_string()),
                json!(tr.converged),
            ]);
        }
        let fin = tr.final_state();
        runs.push(json!({
            "trial": t,
            "initial_state": init.to_string(),
            "final_state": fin.to_string(),
            "converged": tr.converged,
            "flips": tr.steps,
            "sweeps": tr.sweeps,
            "recalled_pattern": patterns.iter().position(|p| p == fin),
        }));
    }
    let mut report = Report {
        table,
        ..Report::default()
    };
    report.summary.insert("neurons".into(), json!(n));
    report
        .summary
        .insert("energy_floor".into(), num(energy_floor(&net)));
    report.summary.insert("trials".into(), Value::Array(runs));
    Ok(report)
}

/// Metropolis runs on a uniform all-to-all Ising model.
pub fn ising(ctx: &Ctx) -> CliResult<Report> {
    let cfg = &ctx.config;
    cfg.allow(&[
        "spins",
        "coupling",
        "field",
        "temperature",
        "sweeps",
        "initial",
        "runs",
        "units",
    ])?;
    let n: usize = cfg.required("spins")?;
    let j: f64 = cfg.or("coupling", 1.0)?;
    let h: f64 = cfg.or("field", 0.0)?;
    let t: f64 = cfg.required("temperature")?;
    let sweeps: usize = cfg.required("sweeps")?;
    let runs: usize = cfg.or("runs", 1)?;
    let model = IsingModel::new(Couplings::uniform(n, j), vec![h; n], t, units(cfg)?)?;

    let mut rng = substream(ctx.seed, "cli.ising");
    let mut table = Table::new(&["run", "sweep", "energy", "magnetization"]);
    let mut summary = Vec::new();
    for r in 0..runs {
        let init = match cfg.str("initial").unwrap_or("random") {
            "random" => SpinState::random(n, &mut rng),
            "up" => SpinState::uniform(n, 1),
            "down" => SpinState::uniform(n, -1),
            s => {
                let st = s
                    .parse::<SpinState>()
                    .map_err(|e| CliError::Validation(format!("config key `initial`: {e}")))?;
                if st.len() != n {
                    return Err(CliError::Validation(format!(
                        "config key `initial`: {} spins given, model has {n}",
                        st.len()
                    )));
                }
                st
            }
        };
        let run = metropolis_run(&model, &init, sweeps, rng.random())?;
        for (k, (e, m)) in run.energies.iter().zip(&run.magnetizations).enumerate() {
            table.push(vec![json!(r), json!(k), num(*e), num(*m)]);
        }
        summary.push(json!({
            "run": r,
            "initial_state": init.to_string(),
            "final_state": run.final_state.to_string(),
            "mean_abs_magnetization": num(run.mean_abs_magnetization),
            "accepted": run.accepted,
        }));
    }
    let mut report = Report {
        table,
        ..Report::default()
    };
    report.summary.insert("runs".into(), Value::Array(summary));
    Ok(report)
}
