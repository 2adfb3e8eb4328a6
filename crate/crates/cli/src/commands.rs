use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use heatbound::bounds::{bound_sweep, write_bound_csv, BoundConfig, ConstantChoice, Formula};
use heatbound::graph::{load_graph_file, WeightedGraph};
use heatbound::grid::{Spacing, TimeGrid};
use heatbound::imp::{
    check_condition_2_2, check_j_monotone, make_rho, write_j_curve_csv, RadialFamily, RhoVariant, TestFunction,
};
use heatbound::kernel::{heat_kernel_path, simulate, Evolution};
use heatbound::metric::{default_edge_lengths, parse_length_overrides, shortest_path_metric, AdaptedMetric};
use heatbound::regularity::{
    regularity_report, BetaConvention, Envelope, Interval, OnDiagonalProfile, RegularityOptions,
    ReportRequest, TableProfile,
};
use heatbound::report::{fmt_num, write_kernel_csv, write_simulation_csv};
use heatbound::Result;

use super::{
    BoundsArgs, Command, Common, Convention, EnvelopeKind, EvolutionKind, FamilyKind, GridArgs, ImpArgs, Outcome,
    RegularityArgs, RhoKind,
};

pub fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Kernel { common, grid, source } => kernel(&common, &grid, source.as_deref()),
        Command::Metric { common } => metric(&common),
        Command::Regularity(args) => regularity(&args),
        Command::Bounds(args) => bounds(&args),
        Command::Imp(args) => imp(&args),
        Command::Simulate {
            common,
            source,
            tmax,
            paths,
            seed,
            jump_cap,
        } => {
            let g = load_graph_file(&common.graph)?;
            let src = vertex_or(&g, source.as_deref(), 0)?;
            let r = simulate(&g, src, tmax, paths, seed, jump_cap)?;
            write_csv(&common, |w| write_simulation_csv(&g, &r, w))?;
            let summary = json!({
                "command": "simulate",
                "source": g.id(src),
                "t": r.t_max,
                "paths": r.n_paths,
                "seed": r.seed,
                "jump_cap": r.jump_cap,
                "exploded": r.exploded,
                "exploded_fraction": r.exploded_fraction,
            });
            write_summary(&common, &summary)?;
            Ok(Outcome::Pass)
        }
    }
}

fn vertex_or(g: &WeightedGraph, id: Option<&str>, default: usize) -> Result<usize> {
    match id {
        Some(id) => g.index_of(id),
        None => Ok(default),
    }
}

fn load_metric(g: &WeightedGraph, common: &Common) -> Result<AdaptedMetric> {
    let lengths = default_edge_lengths(g);
    let lengths = match &common.metric {
        Some(path) => parse_length_overrides(g, lengths, &std::fs::read_to_string(path)?)?,
        None => lengths,
    };
    shortest_path_metric(g, lengths)
}

fn time_grid(grid: &GridArgs) -> Result<Vec<f64>> {
    let spacing: Spacing = grid.tscale.parse()?;
    Ok(TimeGrid::new(grid.tmin, grid.tmax, grid.tcount, spacing)?.points())
}

fn convention(c: Convention) -> BetaConvention {
    match c {
        Convention::LogTwoOverLogGamma => BetaConvention::LogTwoOverLogGamma,
        Convention::LogGammaOverLogTwo => BetaConvention::LogGammaOverLogTwo,
    }
}

fn open(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_csv(common: &Common, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &common.out {
        Some(path) => {
            let mut w = open(path)?;
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// JSON to `--summary`, else to stdout when the CSV went to a file.
fn write_summary<T: Serialize>(common: &Common, summary: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(summary)?;
    match (&common.summary, &common.out) {
        (Some(path), _) => {
            let mut w = open(path)?;
            writeln!(w, "{text}")?;
            w.flush()?;
        }
        (None, Some(_)) => {
            let mut w = io::stdout().lock();
            writeln!(w, "{text}")?;
            w.flush()?;
        }
        (None, None) => {}
    }
    Ok(())
}

fn outcome(pass: bool) -> Outcome {
    if pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn kernel(common: &Common, grid: &GridArgs, source: Option<&str>) -> Result<Outcome> {
    let g = load_graph_file(&common.graph)?;
    let src = vertex_or(&g, source, 0)?;
    let times = time_grid(grid)?;
    let rows = heat_kernel_path(&g, src, &times, common.tol)?;
    write_csv(common, |w| write_kernel_csv(&g, &rows, w))?;
    let mass = rows.iter().map(|r| r.mass());
    let summary = json!({
        "command": "kernel",
        "source": g.id(src),
        "times": times.len(),
        "tol": common.tol,
        "max_err_bound": rows.iter().map(|r| r.err_bound).fold(0.0, f64::max),
        "min_mass": mass.clone().fold(f64::INFINITY, f64::min),
        "max_mass": mass.fold(f64::NEG_INFINITY, f64::max),
    });
    write_summary(common, &summary)?;
    Ok(Outcome::Pass)
}

fn metric(common: &Common) -> Result<Outcome> {
    let g = load_graph_file(&common.graph)?;
    let m = load_metric(&g, common)?;
    write_csv(common, |w| {
        let mut csv = csvw(w);
        csv.write_record(["x", "y", "d_nu"])?;
        for x in 0..g.len() {
            for y in 0..g.len() {
                csv.write_record([g.id(x), g.id(y), &fmt_num(m.dist(x, y))])?;
            }
        }
        csv.flush()?;
        Ok(())
    })?;
    let cert = m.certificate();
    let worst = cert.worst_vertex();
    let summary = json!({
        "command": "metric",
        "adapted": m.is_adapted(),
        "vertices": g.len(),
        "edges": g.edge_count(),
        "max_edge_dist": cert.max_edge_dist,
        "worst_vertex": g.id(worst),
        "worst_vertex_value": cert.vertex_values[worst],
        "edge_lengths": m.edge_lengths(),
        "certificate": cert,
    });
    write_summary(common, &summary)?;
    Ok(outcome(m.is_adapted()))
}

fn csvw(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::Writer::from_writer(w)
}

fn regularity(args: &RegularityArgs) -> Result<Outcome> {
    let common = &args.common;
    let interval = Interval::new(args.grid.tmin, args.grid.tmax)?;
    let envelope = match args.envelope {
        None => None,
        Some(EnvelopeKind::Exp) => Some(Envelope::Exp { delta: args.delta }),
        Some(EnvelopeKind::Stretched) => Some(Envelope::Stretched {
            delta: args.delta,
            epsilon: args.epsilon,
        }),
        Some(EnvelopeKind::Poly) => Some(Envelope::Poly { epsilon: args.epsilon }),
    };
    let req = ReportRequest {
        gamma: args.gamma,
        interval,
        envelope,
        envelope_a: args.envelope_a,
        convention: convention(args.beta_convention),
    };
    let opts = RegularityOptions {
        per_decade: args.per_decade,
        ..Default::default()
    };
    let times = time_grid(&args.grid)?;
    let (report, table) = match &args.profile {
        Some(path) => {
            let table = TableProfile::from_csv_path(path)?;
            (regularity_report(&table, &req, &opts)?, table)
        }
        None => {
            let g = load_graph_file(&common.graph)?;
            let x = vertex_or(&g, args.vertex.as_deref(), 0)?;
            let f = OnDiagonalProfile::new(&g, x, common.tol)?;
            (regularity_report(&f, &req, &opts)?, f.to_table(&times)?)
        }
    };
    write_csv(common, |w| {
        let mut csv = csvw(w);
        csv.write_record(["t", "f"])?;
        for (t, f) in table.times().iter().zip(table.values()) {
            csv.write_record([fmt_num(*t), fmt_num(*f)])?;
        }
        csv.flush()?;
        Ok(())
    })?;
    let mut summary = serde_json::to_value(&report)?;
    summary["command"] = json!("regularity");
    summary["pass"] = json!(report.pass());
    write_summary(common, &summary)?;
    Ok(outcome(report.pass()))
}

fn bounds(args: &BoundsArgs) -> Result<Outcome> {
    let common = &args.common;
    let g = load_graph_file(&common.graph)?;
    let m = load_metric(&g, common)?;
    let x1 = vertex_or(&g, args.x1.as_deref(), 0)?;
    let x2 = vertex_or(&g, args.x2.as_deref(), g.len() - 1)?;
    let constants: ConstantChoice = args.constants.parse()?;
    let mut cfg = BoundConfig::new(x1, x2, time_grid(&args.grid)?)
        .with_formulas(Formula::parse_selection(&args.formula)?)
        .with_constants(constants)
        .with_window(args.t1, args.t2);
    cfg.gamma = args.gamma;
    cfg.delta = args.delta;
    cfg.epsilon = args.epsilon;
    cfg.tol = common.tol;
    cfg.convention = convention(args.beta_convention);
    cfg.per_decade = args.per_decade;
    let report = bound_sweep(&g, &m, &cfg)?;
    write_csv(common, |w| write_bound_csv(&report.rows, w))?;
    let mut summary = serde_json::to_value(&report.summary)?;
    summary["command"] = json!("bounds");
    write_summary(common, &summary)?;
    Ok(outcome(report.pass()))
}

fn imp(args: &ImpArgs) -> Result<Outcome> {
    let common = &args.common;
    let g = load_graph_file(&common.graph)?;
    let m = load_metric(&g, common)?;
    let o = vertex_or(&g, args.origin.as_deref(), 0)?;
    let times = time_grid(&args.grid)?;
    let radius = args.radius.unwrap_or_else(|| m.eccentricity(o));
    let variant = match args.rho {
        RhoKind::CappedDist => RhoVariant::CappedDist,
        RhoKind::Reflected => RhoVariant::Reflected,
    };
    let rho = make_rho(&m, &g, o, radius, variant)?;
    let family = match args.family {
        FamilyKind::Lemma23 => RadialFamily::Lemma23 { tau: args.tau },
        FamilyKind::Drift => RadialFamily::Drift { a: args.a },
        FamilyKind::Gaussian => RadialFamily::Gaussian {
            d: args.gauss_d,
            r_cap: radius,
            delta: args.gauss_delta.unwrap_or(24.0 * radius / args.gauss_d),
            s: args.gauss_s.unwrap_or(args.grid.tmax),
        },
    };
    let h = TestFunction::radial(family, rho)?;
    let evolution = match args.evolution {
        EvolutionKind::Full => Evolution::Full,
        EvolutionKind::Killed => Evolution::Killed(m.ball(o, args.domain_radius.unwrap_or(radius))),
    };
    let j = check_j_monotone(&g, &m, o, &evolution, &h, &times, common.tol)?;
    let condition = check_condition_2_2(&g, &h, &times)?;
    write_csv(common, |w| write_j_curve_csv(&g, &j, w))?;

    let pass = j.pass && j.membership.pass && condition.pass;
    let mut j_value = serde_json::to_value(&j)?;
    if let Value::Object(map) = &mut j_value {
        map.remove("curve");
    }
    let summary = json!({
        "command": "imp",
        "origin": g.id(o),
        "family": h.label(),
        "rho": variant,
        "radius": radius,
        "evolution": evolution.label(),
        "times": times.len(),
        "membership": j.membership,
        "condition": condition,
        "j": j_value,
        "pass": pass,
    });
    write_summary(common, &summary)?;
    Ok(outcome(pass))
}
