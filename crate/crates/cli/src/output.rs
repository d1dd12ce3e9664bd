//! CSV, JSON and gnuplot writers.

use std::collections::BTreeMap;
use std::io::Write;

use anisolab::lab::ResultRecord;

pub const HEADER: [&str; 13] =
    ["experiment", "p", "s", "t", "r", "N", "cone_theta", "u_lambda", "quantity", "value", "slope", "verdict", "seed"];

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn row(r: &ResultRecord) -> [String; 13] {
    [
        r.experiment.clone(),
        opt(r.p),
        opt(r.s),
        opt(r.t),
        opt(r.r),
        r.n.map(|n| n.to_string()).unwrap_or_default(),
        opt(r.cone_theta),
        r.u_lambda.as_ref().map(|u| u.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";")).unwrap_or_default(),
        r.quantity.clone(),
        fmt_f64(r.value),
        opt(r.slope),
        r.verdict.as_str().to_string(),
        r.seed.to_string(),
    ]
}

pub fn write_csv(records: &[ResultRecord], w: impl Write) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER)?;
    for r in records {
        out.write_record(row(r))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json(records: &[ResultRecord], mut w: impl Write) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(&mut w, records)?;
    writeln!(w).map_err(serde_json::Error::io)
}

fn gp_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Gnuplot script drawing every per-`N` series of `csv_name` on log-log axes, one PNG per
/// experiment.
pub fn gnuplot_script(records: &[ResultRecord], csv_name: &str, stem: &str) -> String {
    let mut series: BTreeMap<&str, Vec<[String; 13]>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.n.is_some() && r.value > 0.0 && r.value.is_finite()) {
        let cols = row(r);
        let list = series.entry(r.experiment.as_str()).or_default();
        if !list.iter().any(|c| same_series(c, &cols)) {
            list.push(cols);
        }
    }
    let mut s = String::new();
    s.push_str("set datafile separator \",\"\n");
    s.push_str("set terminal pngcairo size 1000,700\n");
    s.push_str("set logscale xy 2\n");
    s.push_str("set xlabel \"N\"\n");
    s.push_str("set key outside right\n");
    for (i, (experiment, keys)) in series.iter().enumerate() {
        s.push_str(&format!("set output {}\n", gp_quote(&format!("{stem}_{i}.png"))));
        s.push_str(&format!("set title {}\n", gp_quote(experiment)));
        s.push_str("plot \\\n");
        let lines: Vec<String> = keys
            .iter()
            .map(|c| {
                let cond = format!(
                    "strcol(1) eq {} && strcol(2) eq {} && strcol(3) eq {} && strcol(4) eq {} && strcol(9) eq {}",
                    gp_quote(&c[0]),
                    gp_quote(&c[1]),
                    gp_quote(&c[2]),
                    gp_quote(&c[3]),
                    gp_quote(&c[8])
                );
                let title = format!("{} p={} s={} t={}", c[8], short(&c[1]), short(&c[2]), short(&c[3]));
                format!(
                    "  {} every ::1 using 6:(({cond}) ? $10 : NaN) with linespoints title {}",
                    gp_quote(csv_name),
                    gp_quote(&title)
                )
            })
            .collect();
        s.push_str(&lines.join(", \\\n"));
        s.push('\n');
    }
    s
}

fn same_series(a: &[String; 13], b: &[String; 13]) -> bool {
    a[0] == b[0] && a[1] == b[1] && a[2] == b[2] && a[3] == b[3] && a[8] == b[8]
}

fn short(field: &str) -> String {
    field.parse::<f64>().map(|x| format!("{x}")).unwrap_or_else(|_| "-".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use anisolab::lab::Verdict;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(2.0), "2.0000000000000000e0");
    }

    #[test]
    fn csv_row_layout() {
        let r = ResultRecord::new("x", "ratio", 1.5, Verdict::Measured, 7)
            .with_pst(Some(2.0), None, Some(0.25), None)
            .with_n(128)
            .with_geometry(Some(30.0), Some(vec![1.0, 0.0]));
        let mut buf = Vec::new();
        write_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), HEADER.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "x,2.0000000000000000e0,,2.5000000000000000e-1,,128,3.0000000000000000e1,\
             1.0000000000000000e0;0.0000000000000000e0,ratio,1.5000000000000000e0,,measured,7"
        );
    }

    #[test]
    fn gnuplot_references_csv() {
        let recs: Vec<_> = [64, 128]
            .iter()
            .map(|&n| ResultRecord::new("e", "ratio", 1.0, Verdict::Measured, 1).with_n(n))
            .collect();
        let gp = gnuplot_script(&recs, "e.csv", "e");
        assert!(gp.contains("\"e.csv\""));
        assert_eq!(gp.matches("linespoints").count(), 1);
    }
}
