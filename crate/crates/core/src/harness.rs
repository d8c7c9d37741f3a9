//! Benchmark orchestration: trained forward pass vs. per-instance oracle.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::nn::Mlp;
use crate::oracle::{solve, OracleConfig, OracleSolution};
use crate::penalty::violation_report;
use crate::problems::{ParamSet, ProblemSpec};
use crate::trainer::{time_forward, FORWARD_TIMING_REPS};

/// Loose feasibility tolerance used for reporting.
pub const LOOSE_TOL: f64 = 0.1;
/// Strict feasibility tolerance.
pub const STRICT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub params: Vec<f64>,
    pub x_dnn: Vec<f64>,
    /// `None` when the oracle failed on this instance.
    pub x_oracle: Option<Vec<f64>>,
    pub f0_dnn: f64,
    pub f0_oracle: Option<f64>,
    pub gap: Option<f64>,
    pub viol_dnn: f64,
    pub t_fwd_ns: f64,
    pub t_oracle_ns: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchAggregates {
    pub rows: usize,
    pub oracle_failures: usize,
    /// `None` when no row has a gap (e.g. an empty report).
    pub median_gap: Option<f64>,
    pub p95_gap: Option<f64>,
    pub feasible_frac_loose: Option<f64>,
    pub feasible_frac_strict: Option<f64>,
    pub speedup: Option<f64>,
    pub mac_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub param_dim: usize,
    pub decision_dim: usize,
    pub rows: Vec<BenchRow>,
    pub aggregates: BenchAggregates,
}

/// Linear-interpolation quantile of an unsorted sample.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

impl BenchAggregates {
    pub fn from_rows(rows: &[BenchRow], mac_count: u64) -> Self {
        let gaps: Vec<f64> = rows.iter().filter_map(|r| r.gap).collect();
        let frac = |tol: f64| {
            (!rows.is_empty())
                .then(|| rows.iter().filter(|r| r.viol_dnn <= tol).count() as f64 / rows.len() as f64)
        };
        let t_fwd: Vec<f64> = rows.iter().map(|r| r.t_fwd_ns).collect();
        let t_oracle: Vec<f64> = rows.iter().map(|r| r.t_oracle_ns).collect();
        let speedup = match (quantile(&t_oracle, 0.5), quantile(&t_fwd, 0.5)) {
            (Some(o), Some(f)) => Some(o / f),
            _ => None,
        };
        Self {
            rows: rows.len(),
            oracle_failures: rows.iter().filter(|r| r.x_oracle.is_none()).count(),
            median_gap: quantile(&gaps, 0.5),
            p95_gap: quantile(&gaps, 0.95),
            feasible_frac_loose: frac(LOOSE_TOL),
            feasible_frac_strict: frac(STRICT_TOL),
            speedup,
            mac_count,
        }
    }
}

/// One row per parameter vector. Rows run sequentially so that timings
/// are taken on a quiet thread.
pub fn run_benchmark(spec: &ProblemSpec, net: &Mlp, oracle_cfg: &OracleConfig, params: &ParamSet) -> Result<BenchReport> {
    if net.input_dim() != spec.param_dim || net.output_dim() != spec.decision_dim {
        return Err(Error::Dimension(format!(
            "network {:?} does not fit {}",
            net.layer_sizes(),
            spec.name
        )));
    }
    let mut rows = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let p = params.row(i);
        let x_dnn = net.predict(p)?;
        let (f0_dnn, _) = spec.eval_objective(&x_dnn, p)?;
        let viol_dnn = violation_report(&x_dnn, p, spec, 0.0)?.max_violation();
        let t_fwd_ns = time_forward(net, p, FORWARD_TIMING_REPS)?;
        let started = std::time::Instant::now();
        let oracle = solve(spec, p, oracle_cfg);
        let (x_oracle, f0_oracle, t_oracle_ns) = match oracle {
            Ok(sol) => (Some(sol.x), Some(sol.objective), sol.solve_ns),
            Err(Error::OracleFailed(_)) => (None, None, (started.elapsed().as_nanos() as f64).max(1.0)),
            Err(e) => return Err(e),
        };
        rows.push(BenchRow {
            params: p.to_vec(),
            x_dnn,
            x_oracle,
            f0_dnn,
            gap: f0_oracle.map(|o| f0_dnn - o),
            f0_oracle,
            viol_dnn,
            t_fwd_ns,
            t_oracle_ns,
        });
    }
    let aggregates = BenchAggregates::from_rows(&rows, net.mac_count());
    Ok(BenchReport {
        param_dim: spec.param_dim,
        decision_dim: spec.decision_dim,
        rows,
        aggregates,
    })
}

fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), fmt_num)
}

fn parse_opt(s: &str, line: usize) -> Result<Option<f64>> {
    if s == "nan" {
        return Ok(None);
    }
    s.parse::<f64>().map(Some).map_err(|e| Error::Parse {
        line,
        msg: format!("bad number '{s}': {e}"),
    })
}

fn parse_num(s: &str, line: usize) -> Result<f64> {
    parse_opt(s, line)?.ok_or_else(|| Error::Parse {
        line,
        msg: "unexpected nan".into(),
    })
}

impl BenchReport {
    pub fn header(param_dim: usize, decision_dim: usize) -> String {
        let mut cols: Vec<String> = (1..=param_dim).map(|i| format!("c{i}")).collect();
        cols.extend((1..=decision_dim).map(|i| format!("x_dnn{i}")));
        cols.extend((1..=decision_dim).map(|i| format!("x_oracle{i}")));
        cols.extend(
            ["f0_dnn", "f0_oracle", "gap", "viol_dnn", "t_fwd_ns", "t_oracle_ns"].map(String::from),
        );
        cols.join(",")
    }

    /// CSV rows followed by the aggregates as `# key=value` comments. With
    /// `with_time = false` both timing columns and the speedup are zeroed.
    pub fn to_csv(&self, with_time: bool) -> String {
        let mut out = String::new();
        out.push_str(&Self::header(self.param_dim, self.decision_dim));
        out.push('\n');
        for r in &self.rows {
            let mut cols: Vec<String> = r.params.iter().chain(&r.x_dnn).copied().map(fmt_num).collect();
            match &r.x_oracle {
                Some(x) => cols.extend(x.iter().copied().map(fmt_num)),
                None => cols.extend(std::iter::repeat_n("nan".to_string(), self.decision_dim)),
            }
            cols.push(fmt_num(r.f0_dnn));
            cols.push(fmt_opt(r.f0_oracle));
            cols.push(fmt_opt(r.gap));
            cols.push(fmt_num(r.viol_dnn));
            let (tf, to) = if with_time { (r.t_fwd_ns, r.t_oracle_ns) } else { (0.0, 0.0) };
            cols.push(fmt_num(tf));
            cols.push(fmt_num(to));
            out.push_str(&cols.join(","));
            out.push('\n');
        }
        let a = &self.aggregates;
        let speedup = if with_time { a.speedup } else { a.speedup.map(|_| 0.0) };
        let _ = writeln!(out, "# rows={}", a.rows);
        let _ = writeln!(out, "# oracle_failures={}", a.oracle_failures);
        let _ = writeln!(out, "# median_gap={}", fmt_opt(a.median_gap));
        let _ = writeln!(out, "# p95_gap={}", fmt_opt(a.p95_gap));
        let _ = writeln!(out, "# feasible_frac_0.1={}", fmt_opt(a.feasible_frac_loose));
        let _ = writeln!(out, "# feasible_frac_0.001={}", fmt_opt(a.feasible_frac_strict));
        let _ = writeln!(out, "# speedup={}", fmt_opt(speedup));
        let _ = writeln!(out, "# mac_count={}", a.mac_count);
        out
    }

    pub fn write_csv<W: Write>(&self, mut out: W, with_time: bool) -> Result<()> {
        out.write_all(self.to_csv(with_time).as_bytes())?;
        Ok(())
    }

    /// Parses [`BenchReport::to_csv`] output.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            msg: "empty report".into(),
        })?;
        let cols: Vec<&str> = header.split(',').collect();
        let param_dim = cols.iter().filter(|c| c.starts_with('c')).count();
        let decision_dim = cols.iter().filter(|c| c.starts_with("x_dnn")).count();
        if header != Self::header(param_dim, decision_dim) {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unexpected header '{header}'"),
            });
        }
        let mut rows = Vec::new();
        let mut agg = std::collections::HashMap::new();
        for (ln, line) in lines {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((k, v)) = comment.trim().split_once('=') {
                    agg.insert(k.to_string(), (ln, v.to_string()));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != cols.len() {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("{} fields, expected {}", f.len(), cols.len()),
                });
            }
            let nums = |range: std::ops::Range<usize>| -> Result<Vec<f64>> {
                f[range].iter().map(|s| parse_num(s, ln)).collect()
            };
            let k = decision_dim;
            let params = nums(0..param_dim)?;
            let x_dnn = nums(param_dim..param_dim + k)?;
            let oracle_fields = &f[param_dim + k..param_dim + 2 * k];
            let x_oracle = if oracle_fields.iter().all(|s| *s == "nan") {
                None
            } else {
                Some(nums(param_dim + k..param_dim + 2 * k)?)
            };
            let base = param_dim + 2 * k;
            rows.push(BenchRow {
                params,
                x_dnn,
                x_oracle,
                f0_dnn: parse_num(f[base], ln)?,
                f0_oracle: parse_opt(f[base + 1], ln)?,
                gap: parse_opt(f[base + 2], ln)?,
                viol_dnn: parse_num(f[base + 3], ln)?,
                t_fwd_ns: parse_num(f[base + 4], ln)?,
                t_oracle_ns: parse_num(f[base + 5], ln)?,
            });
        }
        let get = |key: &str| -> Result<(usize, String)> {
            agg.get(key).cloned().ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("missing aggregate '{key}'"),
            })
        };
        let opt = |key: &str| -> Result<Option<f64>> {
            let (ln, v) = get(key)?;
            parse_opt(&v, ln)
        };
        let int = |key: &str| -> Result<u64> {
            let (ln, v) = get(key)?;
            v.parse().map_err(|e| Error::Parse {
                line: ln,
                msg: format!("bad integer for {key}: {e}"),
            })
        };
        let aggregates = BenchAggregates {
            rows: int("rows")? as usize,
            oracle_failures: int("oracle_failures")? as usize,
            median_gap: opt("median_gap")?,
            p95_gap: opt("p95_gap")?,
            feasible_frac_loose: opt("feasible_frac_0.1")?,
            feasible_frac_strict: opt("feasible_frac_0.001")?,
            speedup: opt("speedup")?,
            mac_count: int("mac_count")?,
        };
        Ok(Self {
            param_dim,
            decision_dim,
            rows,
            aggregates,
        })
    }
}

/// Fixed parameter sets of the published results tables, with the reported
/// interior-point and network solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRow {
    pub params: Vec<f64>,
    pub ipm: Option<Vec<f64>>,
    pub dnn: Option<Vec<f64>>,
}

pub fn reference_rows(spec_name: &str) -> Result<Vec<ReferenceRow>> {
    let rosen = [
        ([1.0, 1.0], [0.8082, 0.5889], [0.8394, 0.6040]),
        ([5.0, 0.1], [0.1000, 0.0100], [0.1014, 0.0174]),
        ([25.0, 0.3], [0.3000, 0.0900], [0.3109, 0.0957]),
    ];
    let ackley = [
        ([20.0, 0.2, 0.05, 0.05, 20.0], [5.8e-12, 12e-13], [-5.6177e-6, 7.2256e-5]),
        ([20.0, 0.2, 0.5, 0.5, 20.0], [1.7e-11, 3.5e-11], [-6.8992e-6, 7.7887e-5]),
        ([20.0, 0.05, 0.5, 0.5, 20.0], [1e-11, 1.2e-11], [-7.0035e-6, 7.8982e-5]),
    ];
    let rows = match spec_name {
        "rosenbrock-1c" | "rosenbrock-3c" => {
            let published = spec_name == "rosenbrock-1c";
            rosen
                .iter()
                .map(|(p, ipm, dnn)| ReferenceRow {
                    params: p.to_vec(),
                    ipm: published.then(|| ipm.to_vec()),
                    dnn: published.then(|| dnn.to_vec()),
                })
                .collect()
        }
        "ackley-1c" | "ackley-3c" => {
            let published = spec_name == "ackley-1c";
            ackley
                .iter()
                .map(|(p, ipm, dnn)| ReferenceRow {
                    params: p.to_vec(),
                    ipm: published.then(|| ipm.to_vec()),
                    dnn: published.then(|| dnn.to_vec()),
                })
                .collect()
        }
        other => {
            return Err(Error::Registry {
                name: other.to_string(),
                known: crate::problems::PROBLEM_NAMES.join(", "),
            })
        }
    };
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub reference: ReferenceRow,
    pub oracle: OracleSolution,
    pub x_dnn: Vec<f64>,
    pub viol_dnn: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRepro {
    pub problem: String,
    pub warning: Option<String>,
    pub rows: Vec<TableRow>,
}

/// Side-by-side comparison on the fixed parameter sets of `spec`.
pub fn table_repro(spec: &ProblemSpec, net: &Mlp, oracle_cfg: &OracleConfig) -> Result<TableRepro> {
    let refs = reference_rows(&spec.name)?;
    let mut rows = Vec::with_capacity(refs.len());
    for reference in refs {
        let p = &reference.params;
        let oracle = solve(spec, p, oracle_cfg)?;
        let x_dnn = net.predict(p)?;
        let viol_dnn = violation_report(&x_dnn, p, spec, 0.0)?.max_violation();
        rows.push(TableRow {
            reference,
            oracle,
            x_dnn,
            viol_dnn,
        });
    }
    let warning = rows.iter().any(|r| !r.oracle.is_feasible()).then(|| {
        format!(
            "WARNING: {} has an empty feasible set; every solution violates a constraint",
            spec.name
        )
    });
    Ok(TableRepro {
        problem: spec.name.clone(),
        warning,
        rows,
    })
}

fn fmt_point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:.4e}")).collect();
    format!("({})", parts.join(", "))
}

fn fmt_params(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().enumerate().map(|(i, v)| format!("c{}={v}", i + 1)).collect();
    parts.join(" ")
}

impl TableRepro {
    pub fn to_text(&self) -> String {
        let headers = [
            "parameters",
            "published IPM",
            "published DNN",
            "oracle",
            "oracle viol",
            "DNN",
            "DNN viol",
        ];
        let body: Vec<[String; 7]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    fmt_params(&r.reference.params),
                    r.reference.ipm.as_deref().map_or("-".into(), fmt_point),
                    r.reference.dnn.as_deref().map_or("-".into(), fmt_point),
                    fmt_point(&r.oracle.x),
                    format!("{:.3e}", r.oracle.max_violation),
                    fmt_point(&r.x_dnn),
                    format!("{:.3e}", r.viol_dnn),
                ]
            })
            .collect();
        let widths: Vec<usize> = (0..headers.len())
            .map(|c| body.iter().map(|r| r[c].len()).chain([headers[c].len()]).max().unwrap())
            .collect();
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.problem);
        if let Some(w) = &self.warning {
            let _ = writeln!(out, "{w}");
        }
        let line = |cells: Vec<&str>| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join(" | ")
                .trim_end()
                .to_string()
        };
        let _ = writeln!(out, "{}", line(headers.to_vec()));
        let _ = writeln!(
            out,
            "{}",
            widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-")
        );
        for r in &body {
            let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let Some(first) = self.rows.first() else {
            return String::new();
        };
        let (pd, k) = (first.reference.params.len(), first.x_dnn.len());
        let mut cols: Vec<String> = (1..=pd).map(|i| format!("c{i}")).collect();
        for prefix in ["x_pub_ipm", "x_pub_dnn", "x_oracle", "x_dnn"] {
            cols.extend((1..=k).map(|i| format!("{prefix}{i}")));
        }
        cols.extend(["viol_oracle", "viol_dnn"].map(String::from));
        let mut out = cols.join(",");
        out.push('\n');
        let nan = || vec!["nan".to_string(); k];
        for r in &self.rows {
            let mut f: Vec<String> = r.reference.params.iter().copied().map(fmt_num).collect();
            f.extend(r.reference.ipm.as_ref().map_or_else(nan, |x| x.iter().copied().map(fmt_num).collect()));
            f.extend(r.reference.dnn.as_ref().map_or_else(nan, |x| x.iter().copied().map(fmt_num).collect()));
            f.extend(r.oracle.x.iter().copied().map(fmt_num));
            f.extend(r.x_dnn.iter().copied().map(fmt_num));
            f.push(fmt_num(r.oracle.max_violation));
            f.push(fmt_num(r.viol_dnn));
            out.push_str(&f.join(","));
            out.push('\n');
        }
        if let Some(w) = &self.warning {
            let _ = writeln!(out, "# {w}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_problem;

    fn row(gap: Option<f64>, viol: f64, tf: f64, to: f64) -> BenchRow {
        BenchRow {
            params: vec![1.0, 2.0],
            x_dnn: vec![0.1, 0.2],
            x_oracle: gap.map(|_| vec![0.3, 0.4]),
            f0_dnn: 1.0,
            f0_oracle: gap.map(|g| 1.0 - g),
            gap,
            viol_dnn: viol,
            t_fwd_ns: tf,
            t_oracle_ns: to,
        }
    }

    #[test]
    fn quantiles() {
        assert_eq!(quantile(&[], 0.5), None);
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), Some(2.0));
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), Some(2.5));
        assert_eq!(quantile(&[5.0], 0.95), Some(5.0));
    }

    #[test]
    fn aggregates_from_rows() {
        let rows = vec![
            row(Some(0.0), 0.0, 10.0, 1000.0),
            row(Some(0.2), 0.05, 20.0, 3000.0),
            row(None, 0.5, 30.0, 2000.0),
        ];
        let a = BenchAggregates::from_rows(&rows, 480);
        assert_eq!(a.rows, 3);
        assert_eq!(a.oracle_failures, 1);
        assert_eq!(a.median_gap, Some(0.1));
        assert_eq!(a.feasible_frac_loose, Some(2.0 / 3.0));
        assert_eq!(a.feasible_frac_strict, Some(1.0 / 3.0));
        assert_eq!(a.speedup, Some(100.0));
    }

    #[test]
    fn empty_report_has_undefined_aggregates() {
        let spec = make_problem("rosenbrock-1c").unwrap();
        let net = Mlp::zeros(&spec.default_net_shape).unwrap();
        let empty = ParamSet::from_rows::<Vec<f64>>(&[], 2).unwrap();
        let report = run_benchmark(&spec, &net, &OracleConfig::default(), &empty).unwrap();
        assert!(report.rows.is_empty());
        let a = &report.aggregates;
        assert_eq!((a.median_gap, a.speedup, a.feasible_frac_loose), (None, None, None));
        assert_eq!(a.mac_count, 480);
        assert_eq!(BenchReport::from_csv(&report.to_csv(true)).unwrap(), report);
    }

    #[test]
    fn csv_round_trip_with_failures() {
        let rows = vec![row(Some(0.25), 0.0, 12.5, 1e6), row(None, 0.3, 11.0, 2e6)];
        let report = BenchReport {
            param_dim: 2,
            decision_dim: 2,
            aggregates: BenchAggregates::from_rows(&rows, 480),
            rows,
        };
        let csv = report.to_csv(true);
        assert!(csv.starts_with("c1,c2,x_dnn1,x_dnn2,x_oracle1,x_oracle2,f0_dnn,f0_oracle,gap,viol_dnn,t_fwd_ns,t_oracle_ns\n"));
        assert!(csv.contains("# speedup="));
        assert_eq!(BenchReport::from_csv(&csv).unwrap(), report);
    }

    #[test]
    fn benchmark_rows_on_table_one() {
        let spec = make_problem("rosenbrock-1c").unwrap();
        let net = Mlp::seeded(&spec.default_net_shape, 1).unwrap();
        let refs = reference_rows("rosenbrock-1c").unwrap();
        let params = ParamSet::from_rows(&refs.iter().map(|r| r.params.clone()).collect::<Vec<_>>(), 2).unwrap();
        let report = run_benchmark(&spec, &net, &OracleConfig::default(), &params).unwrap();
        assert_eq!(report.rows.len(), 3);
        for (r, reference) in report.rows.iter().zip(&refs) {
            let x = r.x_oracle.as_ref().unwrap();
            let ipm = reference.ipm.as_ref().unwrap();
            let d = ((x[0] - ipm[0]).powi(2) + (x[1] - ipm[1]).powi(2)).sqrt();
            assert!(d <= 1e-2);
            assert!(r.t_fwd_ns > 0.0 && r.t_oracle_ns > 0.0);
        }
    }

    #[test]
    fn infeasible_problem_table_has_banner() {
        let spec = make_problem("rosenbrock-3c").unwrap();
        let net = Mlp::seeded(&spec.default_net_shape, 1).unwrap();
        let table = table_repro(&spec, &net, &OracleConfig::default()).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert!(table.warning.is_some());
        assert!(table.rows.iter().all(|r| r.viol_dnn > 0.0 && r.oracle.max_violation > 0.0));
        assert!(table.to_text().contains("WARNING"));
        assert!(table.rows.iter().all(|r| r.reference.ipm.is_none()));
    }

    #[test]
    fn reference_table_keys() {
        let r = reference_rows("rosenbrock-1c").unwrap();
        let keys: Vec<Vec<f64>> = r.iter().map(|r| r.params.clone()).collect();
        assert_eq!(keys, vec![vec![1.0, 1.0], vec![5.0, 0.1], vec![25.0, 0.3]]);
        let a = reference_rows("ackley-1c").unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a[0].params, vec![20.0, 0.2, 0.05, 0.05, 20.0]);
        assert!(reference_rows("nosuch").is_err());
    }

    #[test]
    fn table_text_and_csv() {
        let spec = make_problem("ackley-1c").unwrap();
        let net = Mlp::zeros(&spec.default_net_shape).unwrap();
        let table = table_repro(&spec, &net, &OracleConfig::default()).unwrap();
        assert!(table.warning.is_none());
        let text = table.to_text();
        assert_eq!(text.lines().count(), 1 + 2 + 3);
        let csv = table.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().next().unwrap().starts_with("c1,c2,c3,c4,c5,x_pub_ipm1"));
    }
}
