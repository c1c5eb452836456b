use momentlab::counting::{lemma_ratio_sweep, min_gap_scan, CountReport, DyadicBox, Lemma, Sign};
use momentlab::moments::{moment_report, moment_series, MomentReport};
use momentlab::resonance::{constant_ck, s_trunc, tail_fit, Shape};
use momentlab::voronoi::{decompose_s, truncation_error_profile};
use momentlab::{cuspform::CoefficientTable, moments::oscillatory_check};
use serde_json::{json, Value};

use crate::output::{opt_f64, Sink};
use crate::range::ListArg;
use crate::tables::{self, Outcome};
use crate::{Failure, RunConfig};

type Res = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn table(cfg: &RunConfig, need: u64, require_cache: bool) -> Result<CoefficientTable, Failure> {
    tables::load(&cfg.cache_dir, cfg.weight, cfg.nmax, need, require_cache)
}

pub fn coeffs(cfg: &RunConfig, sink: &Sink, pairs: usize, squares: usize) -> Res {
    let n_max = cfg.nmax.ok_or_else(|| usage("coeffs needs --nmax"))?;
    let (table, outcome) = tables::build_cached(&cfg.cache_dir, cfg.weight, n_max, (pairs, squares, cfg.seed))?;
    let (path, rebuilt) = match outcome {
        Outcome::Reused(p) => (p, false),
        Outcome::Written(p) => (p, true),
    };
    let file = path.display().to_string();
    sink.emit(
        || format!("weight,n_max,file,rebuilt\n{},{},{file},{rebuilt}\n", table.weight(), table.n_max()),
        || json!({ "weight": table.weight(), "n_max": table.n_max(), "file": file, "rebuilt": rebuilt }),
    )?;
    Ok(())
}

fn moment_json(sink: &Sink, r: &MomentReport) -> Value {
    let rows: Vec<Value> = r
        .rows
        .iter()
        .map(|row| {
            json!({
                "T": row.t,
                "exact_moment": row.exact.to_string(),
                "main_term": sink.real(&row.main),
                "error": sink.real(&row.error),
                "ratio": sink.real(&row.ratio),
            })
        })
        .collect();
    let windows: Vec<Value> = r
        .windows
        .iter()
        .map(|w| json!({ "T": w.t, "exact": w.exact.to_string(), "main": sink.real(&w.main), "ratio": sink.real(&w.ratio) }))
        .collect();
    json!({
        "weight": r.weight,
        "k": r.k,
        "y": r.y,
        "precision_bits": r.precision_bits,
        "exponent": r.exponent.to_string(),
        "rows": rows,
        "windows": windows,
        "zero_errors": r.zero_errors,
        "slope": opt_f64(r.slope()),
        "delta_hat": opt_f64(r.delta_hat),
        "local_delta": r.local_delta.iter().map(|&(t, d)| json!([t, d])).collect::<Vec<_>>(),
    })
}

pub fn moments(cfg: &RunConfig, sink: &Sink, k: u32, t: &ListArg<u64>, y: Option<u64>) -> Res {
    if !(momentlab::moments::MIN_ORDER..=momentlab::moments::MAX_ORDER).contains(&k) {
        return Err(usage(format!("unsupported moment order {k}; expected 2 through 8")));
    }
    let ts = t.expand(cfg.dyadic, "--t")?;
    let need = ts.iter().copied().max().ok_or_else(|| usage("--t is empty"))?;
    let table = table(cfg, need, true)?;
    if (2..=4).contains(&k) {
        let constant = constant_ck(&table, k, y.unwrap_or(table.n_max()), cfg.precision)?;
        let report = moment_report(&table, &constant, &ts, cfg.precision)?;
        sink.emit(|| report.csv(), || moment_json(sink, &report))?;
    } else {
        // no main term is known beyond k = 4
        let values = moment_series(&table, k, &ts)?;
        sink.emit(
            || {
                let mut out = format!("{}\n", MomentReport::CSV_HEADER);
                for (t, v) in ts.iter().zip(&values) {
                    out.push_str(&format!("{k},{t},{v},,,\n"));
                }
                out
            },
            || {
                let rows: Vec<Value> =
                    ts.iter().zip(&values).map(|(t, v)| json!({ "T": t, "exact_moment": v.to_string() })).collect();
                json!({ "weight": table.weight(), "k": k, "precision_bits": cfg.precision, "rows": rows })
            },
        )?;
    }
    Ok(())
}

pub fn constant(cfg: &RunConfig, sink: &Sink, k: u32, l: u32, y: &ListArg<u64>) -> Res {
    let shape = Shape::new(k, l)?;
    let ys = y.expand(cfg.dyadic, "--y")?;
    let need = ys.iter().copied().max().ok_or_else(|| usage("--y is empty"))?;
    let table = table(cfg, need, false)?;
    let fitted = if ys.len() >= 4 && ys.windows(2).all(|w| w[1] == 2 * w[0]) {
        Some(tail_fit(&table, shape, &ys, cfg.precision)?)
    } else {
        None
    };
    let values = match &fitted {
        Some(f) => f.values.clone(),
        None => ys.iter().map(|&y| s_trunc(&table, shape, y, cfg.precision)).collect::<Result<Vec<_>, _>>()?,
    };
    let last = values.last().expect("nonempty");
    sink.emit(
        || {
            let mut out = String::from("k,l,y,value,error_bound\n");
            for v in &values {
                out.push_str(&format!("{k},{l},{},{},{:e}\n", v.y, sink.real(&v.value), v.error_bound));
            }
            out
        },
        || {
            let list: Vec<Value> = values
                .iter()
                .map(|v| json!({ "y": v.y, "value": sink.real(&v.value), "error_bound": v.error_bound }))
                .collect();
            json!({
                "k": k,
                "l": l,
                "y": last.y,
                "weight": table.weight(),
                "precision_bits": cfg.precision,
                "value": sink.real(&last.value),
                "tail_slope": opt_f64(fitted.as_ref().and_then(|f| f.slope())),
                "extrapolated": fitted.as_ref().and_then(|f| f.extrapolated.as_ref()).map(|x| sink.real(x)),
                "heuristic_error": opt_f64(fitted.as_ref().and_then(|f| f.heuristic_error)),
                "values": list,
            })
        },
    )?;
    Ok(())
}

fn parse_box(s: &str) -> Result<DyadicBox, Failure> {
    let sides = s
        .split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|e| usage(format!("--box {s:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    match sides[..] {
        [n, m, k, l] => Ok(DyadicBox::new(n, m, k, l)?),
        _ => Err(usage(format!("--box {s:?}: expected four sides N,M,K,L"))),
    }
}

pub fn count(sink: &Sink, lemma: &str, sign: Option<&str>, boxes: &[String], delta: &ListArg<f64>, alarm: f64) -> Res {
    let lemma = match (lemma, sign) {
        ("A1", None | Some("-")) => Lemma::A1,
        ("A1", Some(_)) => return Err(usage("A1 has the minus sign only")),
        ("Apm", Some("+")) => Lemma::Apm(Sign::Plus),
        ("Apm", Some("-")) => Lemma::Apm(Sign::Minus),
        ("Apm", _) => return Err(usage("Apm needs --sign + or --sign -")),
        (other, _) => return Err(usage(format!("unknown lemma {other}"))),
    };
    let boxes = boxes.iter().map(|b| parse_box(b)).collect::<Result<Vec<_>, _>>()?;
    let deltas = delta.values("--delta")?;
    let report = lemma_ratio_sweep(lemma, &boxes, &deltas, alarm)?;
    sink.emit(
        || report.csv(),
        || {
            json!({
                "alarm_threshold": report.alarm_threshold,
                "rows": report.rows.iter().map(count_json).collect::<Vec<_>>(),
                "alarms": report.alarms,
            })
        },
    )?;
    if !report.alarms.is_empty() {
        let first = &report.rows[report.alarms[0]];
        return Err(Failure::Validation(format!(
            "{} of {} ratios exceed {alarm}, first at box {} with delta {}",
            report.alarms.len(),
            report.rows.len(),
            first.boxes,
            first.delta
        )));
    }
    Ok(())
}

fn count_json(r: &CountReport) -> Value {
    let b = &r.boxes;
    json!({
        "N": b.n, "M": b.m, "K": b.k, "L": b.l,
        "delta": r.delta,
        "sign": r.sign().symbol(),
        "count": r.count,
        "bound": r.bound,
        "ratio": r.ratio,
        "hypotheses": serde_json::to_value(r.hypotheses).unwrap_or(Value::Null),
    })
}

pub fn voronoi(cfg: &RunConfig, sink: &Sink, x: &ListArg<f64>, n: &ListArg<u64>, grid: usize) -> Res {
    let (lo, hi) = x.interval("--x")?;
    let ns = n.expand(cfg.dyadic, "--n")?;
    let need = if hi >= 0.0 { hi.floor() as u64 } else { 0 };
    let table = table(cfg, need.max(ns.iter().copied().max().unwrap_or(1)), false)?;
    let profile = truncation_error_profile(&table, (lo, hi), &ns, grid, cfg.seed, cfg.precision)?;
    let summary = json!({ "weight": profile.weight, "slope": opt_f64(profile.slope()), "x_lo": lo, "x_hi": hi });
    sink.emit(
        || {
            eprintln!("{summary}");
            profile.csv()
        },
        || {
            let mut doc = summary.clone();
            doc["grid_size"] = json!(profile.grid.len());
            doc["rows"] = serde_json::to_value(&profile.rows).unwrap_or(Value::Null);
            doc
        },
    )?;
    Ok(())
}

pub fn decompose(cfg: &RunConfig, sink: &Sink, x: f64, y: u64, tolerance: f64) -> Res {
    let table = table(cfg, y, false)?;
    let d = decompose_s(&table, x, y, cfg.precision)?;
    let s: Vec<String> = d.s.iter().map(|v| sink.real(v)).collect();
    let residual = sink.real(&d.residual);
    sink.emit(
        || format!("x,y,S1,S2,S3,S4,R,R4,residual\n{x},{y},{},{},{},{},{},{},{residual}\n", s[0], s[1], s[2], s[3], sink.real(&d.r), sink.real(&d.r4)),
        || {
            json!({
                "x": x, "y": y, "weight": table.weight(), "precision_bits": cfg.precision,
                "S1": s[0], "S2": s[1], "S3": s[2], "S4": s[3],
                "R": sink.real(&d.r), "R4": sink.real(&d.r4),
                "residual": residual,
            })
        },
    )?;
    if !(d.residual.to_f64() <= tolerance) {
        return Err(Failure::Validation(format!("decomposition residual {residual} exceeds {tolerance:e}")));
    }
    Ok(())
}

pub fn gap(sink: &Sink, max_value: u64) -> Res {
    let r = min_gap_scan(max_value)?;
    let quad = |q: [u64; 4]| q.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
    sink.emit(
        || {
            format!(
                "max_value,normalized_min,n,m,k,l,sign,raw_min,raw_n,raw_m,raw_k,raw_l,raw_sign\n{},{:e},{},{},{:e},{},{}\n",
                r.max_value,
                r.normalized_min,
                quad(r.normalized_witness),
                r.normalized_sign.symbol(),
                r.raw_min,
                quad(r.raw_witness),
                r.raw_sign.symbol()
            )
        },
        || serde_json::to_value(&r).unwrap_or(Value::Null),
    )?;
    Ok(())
}

pub fn oscillatory(cfg: &RunConfig, sink: &Sink, alpha: f64, a: f64, b: f64, t: f64) -> Res {
    let r = oscillatory_check(alpha, a, b, t, cfg.precision)?;
    let value = sink.real(&r.value);
    let closed = r.closed_form.as_ref().map(|c| sink.real(c));
    sink.emit(
        || {
            format!(
                "alpha,A,B,T,value,closed_form,agreement,ratio\n{alpha},{a},{b},{t},{value},{},{},{:e}\n",
                closed.clone().unwrap_or_default(),
                r.agreement().map(|x| format!("{x:e}")).unwrap_or_default(),
                r.ratio
            )
        },
        || {
            json!({
                "alpha": alpha, "A": a, "B": b, "T": t, "precision_bits": cfg.precision,
                "value": value, "closed_form": closed, "agreement": opt_f64(r.agreement()), "ratio": r.ratio,
            })
        },
    )?;
    Ok(())
}
