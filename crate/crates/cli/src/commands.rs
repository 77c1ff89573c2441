use std::error::Error as StdError;
use std::fmt::Write as _;
use std::io::Write as _;

use pgsim::bridges::{build_bridge, flow_bridge};
use pgsim::chains::{bdgm_chain, run_q_chain, run_v_chain, run_w_chain, transition_density, ChainKind, ChainState, CHAIN_CSV_HEADER};
use pgsim::densities::{
    delta_density, density_e_mass, density_e_raw, density_exp_over_tau, omega_density, q1_density, rho, stable_density, tilted_stable_density, EForm,
};
use pgsim::partitions::sample_partition;
use pgsim::quad::QuadratureConfig;
use pgsim::sticks::{StickKind, StickStream};
use pgsim::verify::{failure_budget, run_suite, IdentityId, IdentityParams, SuiteEntry, TestReport};
use pgsim::{fmt_num, RngStream, ZetaSpec};
use serde::Serialize;

use crate::{
    BridgeArgs, BridgeKind, ChainArgs, ChainChoice, Command, Common, DensityArgs, EFormArg, Format, Kind, PartitionArgs, SticksArgs,
    VerifyArgs, Which,
};

type CmdResult<T> = Result<T, Box<dyn StdError>>;

pub struct Outcome {
    pub code: u8,
    pub summary: String,
}

fn usage(msg: impl Into<String>) -> Box<dyn StdError> {
    pgsim::Error::Parameter(msg.into()).into()
}

pub fn run(command: Command) -> CmdResult<Outcome> {
    match command {
        Command::SampleSticks(a) => sample_sticks(&a),
        Command::SampleBridge(a) => sample_bridge(&a),
        Command::SamplePartition(a) => sample_partitions(&a),
        Command::RunChain(a) => run_chain(&a),
        Command::DensityTable(a) => density_table(&a),
        Command::Verify(a) => verify(&a),
    }
}

fn emit(common: &Common, body: &str) -> CmdResult<()> {
    match &common.output {
        Some(path) => std::fs::write(path, body)?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn done(common: &Common, body: String, summary: String) -> CmdResult<Outcome> {
    emit(common, &body)?;
    Ok(Outcome { code: 0, summary })
}

fn zeta(common: &Common) -> CmdResult<ZetaSpec> {
    Ok(ZetaSpec::parse(&common.zeta)?)
}

fn stick_kind(kind: Kind, common: &Common) -> CmdResult<StickKind> {
    Ok(match kind {
        Kind::Pd => StickKind::pd(common.alpha, common.theta.ok_or_else(|| usage("--theta is required for kind pd"))?)?,
        Kind::Pg => StickKind::pg(common.alpha, zeta(common)?)?,
        Kind::Epg => StickKind::epg(common.alpha, zeta(common)?)?,
    })
}

// Replicate r of any command draws from stream (seed, r).
fn stream(common: &Common, rep: usize) -> RngStream {
    RngStream::task_stream(common.seed, rep as u64)
}

fn json_list(items: &[String]) -> String {
    format!("[{}]\n", items.join(",\n"))
}

fn sample_sticks(a: &SticksArgs) -> CmdResult<Outcome> {
    let kind = stick_kind(a.kind, &a.common)?;
    let mut csv = String::from("rep,k,weight,residual\n");
    let mut json = Vec::new();
    for rep in 0..a.reps {
        let mut rng = stream(&a.common, rep);
        let mut s = StickStream::new(kind.clone(), &mut rng)?;
        let mut weights = Vec::with_capacity(a.n);
        for k in 1..=a.n {
            let w = s.next_weight(&mut rng);
            weights.push(fmt_num(w));
            writeln!(csv, "{rep},{k},{},{}", fmt_num(w), fmt_num(s.residual()))?;
        }
        json.push(format!("{{\"rep\":{rep},\"weights\":[{}],\"residual\":{}}}", weights.join(","), fmt_num(s.residual())));
    }
    let body = if a.format == Format::Csv { csv } else { json_list(&json) };
    done(&a.common, body, format!("sample-sticks: {} stream(s) of {} sticks", a.reps, a.n))
}

fn sample_bridge(a: &BridgeArgs) -> CmdResult<Outcome> {
    let mut csv = String::from("rep,part,u,mass\n");
    let mut json = Vec::new();
    for rep in 0..a.reps {
        let mut rng = stream(&a.common, rep);
        let bridge = match a.kind {
            BridgeKind::Flow => flow_bridge(a.common.alpha, &zeta(&a.common)?, a.steps, &mut rng)?,
            BridgeKind::Pd => build_bridge(&stick_kind(Kind::Pd, &a.common)?, a.trunc, &mut rng)?,
            BridgeKind::Pg => build_bridge(&stick_kind(Kind::Pg, &a.common)?, a.trunc, &mut rng)?,
            BridgeKind::Epg => build_bridge(&stick_kind(Kind::Epg, &a.common)?, a.trunc, &mut rng)?,
        };
        for &(u, p) in bridge.atoms() {
            writeln!(csv, "{rep},atom,{},{}", fmt_num(u), fmt_num(p))?;
        }
        writeln!(csv, "{rep},dust,,{}", fmt_num(bridge.dust()))?;
        json.push(format!("{{\"rep\":{rep},\"bridge\":{}}}", bridge.to_json()));
    }
    let body = if a.format == Format::Csv { csv } else { json_list(&json) };
    done(&a.common, body, format!("sample-bridge: {} bridge(s)", a.reps))
}

fn sample_partitions(a: &PartitionArgs) -> CmdResult<Outcome> {
    let kind = stick_kind(a.kind, &a.common)?;
    let mut csv = String::from("rep,n,K,sizes\n");
    let mut json = Vec::new();
    for rep in 0..a.reps {
        let mut rng = stream(&a.common, rep);
        let p = sample_partition(&kind, a.n, &mut rng)?;
        let sizes: Vec<String> = p.block_sizes().iter().map(|s| s.to_string()).collect();
        writeln!(csv, "{rep},{},{},{}", p.n(), p.block_count(), sizes.join(";"))?;
        json.push(format!("{{\"rep\":{rep},\"blocks\":{}}}", p.to_json()));
    }
    let body = if a.format == Format::Csv { csv } else { json_list(&json) };
    done(&a.common, body, format!("sample-partition: {} partition(s) of [{}]", a.reps, a.n))
}

fn state_json(s: &ChainState) -> String {
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_else(|| "null".into());
    format!(
        "{{\"k\":{},\"T_hat\":{},\"diversity\":{},\"aux\":{},\"factor\":{},\"waiting_time\":{}}}",
        s.k,
        fmt_num(s.t_hat),
        fmt_num(s.diversity),
        fmt_num(s.aux),
        opt(s.factor),
        opt(s.waiting_time)
    )
}

fn run_chain(a: &ChainArgs) -> CmdResult<Outcome> {
    let z = zeta(&a.common)?;
    let alpha = a.common.alpha;
    let mut csv = String::new();
    let mut json = Vec::new();
    if a.chain == ChainChoice::Bdgm {
        csv.push_str("rep,k,atoms,dust,largest_atom,waiting_time\n");
    } else {
        writeln!(csv, "rep,{CHAIN_CSV_HEADER}")?;
    }
    for rep in 0..a.reps {
        let mut rng = stream(&a.common, rep);
        if a.chain == ChainChoice::Bdgm {
            let steps = bdgm_chain(alpha, &z, a.steps, a.trunc, &mut rng)?;
            for s in &steps {
                let b = &s.bridge;
                let wait = s.waiting_time.map(fmt_num).unwrap_or_default();
                writeln!(csv, "{rep},{},{},{},{},{wait}", s.k, b.atoms().len(), fmt_num(b.dust()), fmt_num(b.largest_atom()))?;
                let wait = s.waiting_time.map(fmt_num).unwrap_or_else(|| "null".into());
                json.push(format!("{{\"rep\":{rep},\"k\":{},\"waiting_time\":{wait},\"bridge\":{}}}", s.k, b.to_json()));
            }
            continue;
        }
        let states = match a.chain {
            ChainChoice::V => run_v_chain(alpha, &z, a.steps, &mut rng)?,
            ChainChoice::W => run_w_chain(alpha, &z, a.steps, &mut rng)?,
            _ => run_q_chain(alpha, &z, a.steps, &mut rng)?,
        };
        for s in &states {
            writeln!(csv, "{rep},{}", s.csv_row())?;
            json.push(format!("{{\"rep\":{rep},\"state\":{}}}", state_json(s)));
        }
    }
    let body = if a.format == Format::Csv { csv } else { json_list(&json) };
    done(&a.common, body, format!("run-chain: {} run(s) of {} steps", a.reps, a.steps))
}

pub fn parse_grid(spec: &str) -> CmdResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || usage(format!("grid must be start:stop:step, got '{spec}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(usage("grid has more than 10^7 points"));
    }
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn fixed_zeta(common: &Common) -> CmdResult<f64> {
    match zeta(common)? {
        ZetaSpec::Zero => Ok(0.0),
        ZetaSpec::Const(v) => Ok(v),
        _ => Err(usage("this density needs a fixed zeta (zero or const:<v>)")),
    }
}

fn density_table(a: &DensityArgs) -> CmdResult<Outcome> {
    let alpha = a.common.alpha;
    let cfg = QuadratureConfig::default();
    let grid = parse_grid(&a.grid)?;
    let need_theta = || a.common.theta.ok_or_else(|| usage("--theta is required for this density"));
    let form = match a.form {
        EFormArg::I => EForm::I,
        EFormArg::Ii => EForm::II,
        EFormArg::Iii => EForm::III,
    };
    let eval: Box<dyn Fn(f64) -> pgsim::Result<f64>> = match a.which {
        Which::Delta => Box::new(move |x| delta_density(alpha, x)),
        Which::Stable => Box::new(move |x| stable_density(alpha, x, &cfg)),
        Which::Tilted => {
            let z = fixed_zeta(&a.common)?;
            Box::new(move |x| tilted_stable_density(alpha, z, x, &cfg))
        }
        Which::Omega => {
            let q = a.q.ok_or_else(|| usage("--q is required for omega"))?;
            Box::new(move |x| omega_density(alpha, q, x))
        }
        Which::Rho => {
            let theta = need_theta()?;
            Box::new(move |x| rho(alpha, theta, x))
        }
        Which::E => {
            let theta = need_theta()?;
            // one normalizer for the whole table
            let mass = density_e_mass(alpha, theta, &cfg, form)?;
            Box::new(move |x| density_e_raw(alpha, theta, x, &cfg, form).map(|v| v / mass))
        }
        Which::ExpOverTau => {
            let z = fixed_zeta(&a.common)?;
            Box::new(move |x| density_exp_over_tau(alpha, z, x))
        }
        Which::Q1 => {
            let z = fixed_zeta(&a.common)?;
            Box::new(move |x| q1_density(alpha, z, x))
        }
        Which::TransitionV | Which::TransitionW => {
            let t = a.t.ok_or_else(|| usage("--t is required for transition densities"))?;
            let kind = if a.which == Which::TransitionV { ChainKind::V } else { ChainKind::W };
            Box::new(move |s| transition_density(kind, alpha, t, s, &cfg))
        }
    };
    let mut rows = Vec::with_capacity(grid.len());
    for &x in &grid {
        // points outside the support are left blank
        match eval(x) {
            Ok(v) => rows.push((x, Some(v))),
            Err(pgsim::Error::Domain(_)) => rows.push((x, None)),
            Err(e) => return Err(e.into()),
        }
    }
    let body = if a.format == Format::Csv {
        let mut csv = String::from("x,density\n");
        for (x, v) in &rows {
            writeln!(csv, "{},{}", fmt_num(*x), v.map(fmt_num).unwrap_or_default())?;
        }
        csv
    } else {
        let pts: Vec<String> = rows
            .iter()
            .map(|(x, v)| format!("[{},{}]", fmt_num(*x), v.map(fmt_num).unwrap_or_else(|| "null".into())))
            .collect();
        format!("{{\"which\":\"{:?}\",\"points\":[{}]}}\n", a.which, pts.join(","))
    };
    done(&a.common, body, format!("density-table: {} point(s)", rows.len()))
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    alpha: f64,
    theta: f64,
    zeta: String,
    n_samples: usize,
    seed: u64,
    significance: f64,
    entries: &'a [SuiteEntry],
    failures: usize,
    budget: usize,
    within_budget: bool,
}

fn threads() -> usize {
    let cap = std::env::var("PGSIM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&t| t > 0);
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    cap.map_or(avail, |c| c.min(avail))
}

fn verify(a: &VerifyArgs) -> CmdResult<Outcome> {
    let theta = a.common.theta.unwrap_or(1.0);
    let mut params = IdentityParams::new(a.common.alpha, theta, zeta(&a.common)?);
    params.significance = a.significance;
    let entries = match &a.identity {
        None => run_suite(&params, a.n, a.common.seed, threads())?,
        Some(name) => {
            let id: IdentityId = name.parse()?;
            let mut rng = RngStream::task_stream(a.common.seed, id.index());
            let report = pgsim::verify::run_identity_id(id, &params, a.n, &mut rng)?;
            vec![SuiteEntry { identity_id: id.name().into(), report: Some(report), skipped: None }]
        }
    };
    let reports: Vec<&TestReport> = entries.iter().filter_map(|e| e.report.as_ref()).collect();
    let failures = reports.iter().filter(|r| !r.passed()).count();
    let budget = failure_budget(reports.len());
    let out = VerifyOutput {
        alpha: a.common.alpha,
        theta,
        zeta: a.common.zeta.clone(),
        n_samples: a.n,
        seed: a.common.seed,
        significance: a.significance,
        entries: &entries,
        failures,
        budget,
        within_budget: failures <= budget,
    };
    let mut body = serde_json::to_string_pretty(&out)?;
    body.push('\n');
    emit(&a.common, &body)?;
    let skipped = entries.len() - reports.len();
    Ok(Outcome {
        code: if failures <= budget { 0 } else { 1 },
        summary: format!("verify: {} run, {failures} failed (budget {budget}), {skipped} skipped", reports.len()),
    })
}
