//! Parameter sweeps and their CSV, JSON and gnuplot renderings.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{optimize_all, SearchBox};
use crate::channel::{gains_from_geometry, ChannelGains, LineGeometry, NodePlacement};
use crate::error::{Error, Result};
use crate::schemes::{remark_conditions_gaussian, SchemeId, SnncRsParams};

/// Node layout of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometrySpec {
    Line(LineGeometry),
    /// Planar positions of nodes 1..4.
    Coordinates([[f64; 2]; 4]),
}

/// The swept quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    /// Common power `P1 = P2 = P3`.
    Power,
    Gamma,
    D12,
    D34,
    D14,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Power => "power",
            SweepParam::Gamma => "gamma",
            SweepParam::D12 => "d12",
            SweepParam::D34 => "d34",
            SweepParam::D14 => "d14",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub geometry: GeometrySpec,
    pub gamma: f64,
    pub powers: [f64; 3],
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub schemes: Vec<SchemeId>,
    /// Box overrides; schemes without an entry use their default box.
    #[serde(default)]
    pub boxes: BTreeMap<SchemeId, SearchBox>,
    #[serde(default)]
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidParams("sweep needs at least one value".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidParams("sweep needs at least one scheme".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("sweep values must be finite".into()));
        }
        Ok(())
    }

    /// Channel at one sweep value.
    pub fn channel_at(&self, value: f64) -> Result<ChannelGains> {
        let mut gamma = self.gamma;
        let mut powers = self.powers;
        let mut geometry = self.geometry;
        match (self.param, &mut geometry) {
            (SweepParam::Power, _) => powers = [value; 3],
            (SweepParam::Gamma, _) => gamma = value,
            (SweepParam::D12, GeometrySpec::Line(l)) => l.d12 = value,
            (SweepParam::D34, GeometrySpec::Line(l)) => l.d34 = value,
            (SweepParam::D14, GeometrySpec::Line(l)) => l.d14 = value,
            (p, GeometrySpec::Coordinates(_)) => {
                return Err(Error::InvalidGeometry(format!(
                    "cannot sweep {} on a coordinate layout",
                    p.name()
                )))
            }
        }
        let placement = match geometry {
            GeometrySpec::Line(l) => l.placement(gamma)?,
            GeometrySpec::Coordinates(c) => NodePlacement::new(c, gamma)?,
        };
        gains_from_geometry(&placement, powers)
    }
}

/// One `(sweep value, scheme)` row. `rate` is `None` for invalid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_param: String,
    pub sweep_value: f64,
    pub scheme: SchemeId,
    pub rate: Option<f64>,
    pub binding: String,
    pub params: Value,
    pub flags: Value,
}

/// `x` with 12 significant digits, in plain or exponent notation.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..12).contains(&e) {
        let s = format!("{:.*}", (11 - e).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

fn round12(x: f64) -> f64 {
    fmt_sig(x).parse().expect("formatted float")
}

/// JSON value of a parameter; infinities become the string `"inf"`.
fn param_value(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(fmt_sig(x))
    }
}

/// Runs the sweep. Points whose geometry is invalid produce one row per
/// scheme with `rate = None`, binding `"invalid"` and the reason in `flags`.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = vec![];
    let boxes = |s: SchemeId| {
        spec.boxes.get(&s).cloned().map(|mut b| {
            b.seed = spec.seed;
            b
        })
    };
    for &value in &spec.values {
        let invalid = |reason: String| -> Vec<SweepRow> {
            spec.schemes
                .iter()
                .map(|&s| SweepRow {
                    sweep_param: spec.param.name().into(),
                    sweep_value: value,
                    scheme: s,
                    rate: None,
                    binding: "invalid".into(),
                    params: json!({}),
                    flags: json!({ "error": reason }),
                })
                .collect()
        };
        let ch = match spec.channel_at(value) {
            Ok(ch) => ch,
            Err(e) => {
                rows.extend(invalid(e.to_string()));
                continue;
            }
        };
        let results = match optimize_all(&ch, &spec.schemes, &boxes) {
            Ok(r) => r,
            Err(e) => {
                rows.extend(invalid(e.to_string()));
                continue;
            }
        };
        for (s, r) in results {
            let params: serde_json::Map<String, Value> = r
                .names
                .iter()
                .cloned()
                .zip(r.params.iter().map(|&x| param_value(x)))
                .collect();
            let split = match s {
                SchemeId::SnncRsJoint | SchemeId::SnncRsSuccessive => {
                    Some(SnncRsParams::new(r.params[0], r.params[1], r.params[2])?)
                }
                SchemeId::DfSnnc => Some(SnncRsParams::new(0.0, r.params[0], r.params[1])?),
                _ => None,
            };
            let flags = match split {
                Some(p) => serde_json::to_value(remark_conditions_gaussian(&ch, &p)?)?,
                None => json!({ "gaussian_full": ch.h32 > ch.h34 }),
            };
            rows.push(SweepRow {
                sweep_param: spec.param.name().into(),
                sweep_value: value,
                scheme: s,
                rate: Some(round12(r.rate)),
                binding: r.binding.unwrap_or_default(),
                params: Value::Object(params),
                flags,
            });
        }
    }
    Ok(rows)
}

const HEADER: [&str; 7] = [
    "sweep_param",
    "sweep_value",
    "scheme",
    "rate_bits",
    "binding_bound",
    "params_json",
    "flags_json",
];

/// Writes the rows as CSV; invalid rows have an empty `rate_bits`.
pub fn write_csv(rows: &[SweepRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.sweep_param.clone(),
            fmt_sig(r.sweep_value),
            r.scheme.name().to_string(),
            r.rate.map(fmt_sig).unwrap_or_default(),
            r.binding.clone(),
            r.params.to_string(),
            r.flags.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses CSV written by [`write_csv`].
pub fn read_csv_rows(input: impl Read) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let bad = |m: String| Error::Parse { line: 0, message: m };
    let mut rows = vec![];
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != HEADER.len() {
            return Err(Error::Parse {
                line: i + 2,
                message: format!("expected {} fields, got {}", HEADER.len(), rec.len()),
            });
        }
        let num = |s: &str| {
            s.parse::<f64>().map_err(|e| Error::Parse {
                line: i + 2,
                message: e.to_string(),
            })
        };
        rows.push(SweepRow {
            sweep_param: rec[0].to_string(),
            sweep_value: num(&rec[1])?,
            scheme: rec[2].parse()?,
            rate: if rec[3].is_empty() { None } else { Some(num(&rec[3])?) },
            binding: rec[4].to_string(),
            params: serde_json::from_str(&rec[5])?,
            flags: serde_json::from_str(&rec[6])?,
        });
    }
    Ok(rows)
}

/// JSON report of a sweep: the spec plus every row.
pub fn sweep_json(spec: &SweepSpec, rows: &[SweepRow]) -> Result<Value> {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            let mut v = serde_json::to_value(r)?;
            v["sweep_value"] = json!(round12(r.sweep_value));
            Ok(v)
        })
        .collect::<Result<_>>()?;
    Ok(json!({ "spec": spec, "rows": rows }))
}

/// Wide table for gnuplot: the sweep value, then one rate column per scheme
/// (`NaN` marks invalid points).
pub fn gnuplot_data(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let mut s = format!("# {}", spec.param.name());
    for sc in &spec.schemes {
        s.push(' ');
        s.push_str(sc.name());
    }
    s.push('\n');
    for &v in &spec.values {
        s.push_str(&fmt_sig(v));
        for sc in &spec.schemes {
            let rate = rows
                .iter()
                .find(|r| r.sweep_value == v && r.scheme == *sc)
                .and_then(|r| r.rate);
            s.push(' ');
            s.push_str(&rate.map_or_else(|| "NaN".to_string(), fmt_sig));
        }
        s.push('\n');
    }
    s
}

/// Gnuplot script plotting the file written from [`gnuplot_data`].
pub fn gnuplot_script(spec: &SweepSpec, data_file: &str, image_file: &str) -> String {
    let mut s = String::new();
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output '{image_file}'\n"));
    s.push_str(&format!("set xlabel '{}'\n", spec.param.name()));
    s.push_str("set ylabel 'rate [bits/use]'\n");
    s.push_str("set key left top\nset grid\n");
    if spec.param == SweepParam::Power {
        s.push_str("set logscale x\n");
    }
    let lines: Vec<String> = spec
        .schemes
        .iter()
        .enumerate()
        .map(|(i, sc)| format!("'{data_file}' using 1:{} with linespoints title '{}'", i + 2, sc.name()))
        .collect();
    s.push_str(&format!("plot {}\n", lines.join(", \\\n     ")));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::Param;
    use crate::schemes::cap;

    fn fig4_spec(values: Vec<f64>, schemes: Vec<SchemeId>) -> SweepSpec {
        SweepSpec {
            geometry: GeometrySpec::Line(LineGeometry {
                d12: 0.1,
                d34: 0.05,
                d14: 1.0,
            }),
            gamma: 2.0,
            powers: [1.0; 3],
            param: SweepParam::Power,
            values,
            schemes,
            boxes: BTreeMap::new(),
            seed: 3,
        }
    }

    #[test]
    fn sig_digits() {
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(123456.7890123456), "123456.789012");
        assert_eq!(fmt_sig(1e-9), "1.00000000000e-9");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        for x in [0.1, 2.0 / 7.0, 9.9999999999999, 12345.678] {
            let y: f64 = fmt_sig(x).parse().unwrap();
            assert!(((x - y) / x).abs() < 1e-11);
        }
    }

    #[test]
    fn trivial_cutset_sweep() {
        let spec = SweepSpec {
            geometry: GeometrySpec::Coordinates([[0.0, 0.0], [0.3, 5.0], [0.6, -5.0], [1.0, 0.0]]),
            gamma: 2.0,
            powers: [1.0; 3],
            param: SweepParam::Power,
            values: vec![1.0],
            schemes: vec![SchemeId::Cutset],
            boxes: BTreeMap::new(),
            seed: 0,
        };
        let rows = sweep(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        let ch = spec.channel_at(1.0).unwrap();
        // Far relays: cut-set is close to, and at least, the direct link.
        let direct = cap(ch.h14 * ch.h14).unwrap();
        assert!(rows[0].rate.unwrap() >= direct - 1e-9);
    }

    #[test]
    fn invalid_points_are_marked() {
        let mut spec = fig4_spec(vec![0.5, 2.0], vec![SchemeId::Nnc, SchemeId::DfSnnc]);
        spec.param = SweepParam::D12;
        let rows = sweep(&spec).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[..2].iter().all(|r| r.rate.is_some()));
        assert!(rows[2..].iter().all(|r| r.rate.is_none() && r.binding == "invalid"));
        assert!(rows[2].flags["error"].as_str().unwrap().contains("d12"));
    }

    #[test]
    fn csv_json_round_trip_and_determinism() {
        let mut spec = fig4_spec(vec![0.1, 10.0], vec![SchemeId::DfSnnc, SchemeId::Nnc]);
        spec.boxes.insert(
            SchemeId::Nnc,
            SearchBox::new(vec![
                Param::log("nhat2", 1e-2, 1e2, true),
                Param::log("nhat3", 1e-2, 1e2, true),
            ])
            .with_resolution(7),
        );
        let rows = sweep(&spec).unwrap();
        let mut a = vec![];
        write_csv(&rows, &mut a).unwrap();
        let mut b = vec![];
        write_csv(&sweep(&spec).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let back = read_csv_rows(a.as_slice()).unwrap();
        let report = sweep_json(&spec, &rows).unwrap();
        let from_json: Vec<SweepRow> = serde_json::from_value(report["rows"].clone()).unwrap();
        assert_eq!(back, from_json);
        let data = gnuplot_data(&spec, &rows);
        assert_eq!(data.lines().count(), 3);
        assert!(gnuplot_script(&spec, "sweep.dat", "sweep.png").contains("using 1:3"));
    }
}
