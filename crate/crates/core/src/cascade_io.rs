//! CSV ingestion and emission.
//!
//! Cascade files carry a `time,magnitude` header (names remappable), one
//! event per row, times in seconds since the initial event. An optional
//! `parent` column holds the 0-based index of the triggering row, empty for
//! immigrants. Numbers are written in shortest round-trip form, so
//! `parse_cascade(write_events(s))` reproduces `s`.

use std::io::{Read, Write};

use crate::error::{HawkesError, Result};
use crate::process::{counting_process, Event, EventSequence, HawkesModel};

/// Shift applied to the later of two equal timestamps under [`TiePolicy::Perturb`].
pub const TIE_SHIFT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    #[default]
    Reject,
    Perturb,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub time: String,
    pub magnitude: String,
    pub parent: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            time: "time".into(),
            magnitude: "magnitude".into(),
            parent: "parent".into(),
        }
    }
}

impl ColumnMap {
    /// Parses `field=column` pairs separated by commas, e.g.
    /// `time=ts,magnitude=followers`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut map = Self::default();
        for pair in spec.split(',').filter(|p| !p.trim().is_empty()) {
            let (field, column) = pair.split_once('=').ok_or_else(|| {
                HawkesError::Argument(format!("column map entry `{pair}` is not field=column"))
            })?;
            let column = column.trim().to_string();
            match field.trim() {
                "time" => map.time = column,
                "magnitude" => map.magnitude = column,
                "parent" => map.parent = column,
                other => {
                    return Err(HawkesError::Argument(format!(
                        "unknown column map field `{other}`"
                    )))
                }
            }
        }
        Ok(map)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseOptions {
    /// Observation end; events after it are dropped. Defaults to the last event time.
    pub observation_end: Option<f64>,
    pub tie_policy: TiePolicy,
    pub columns: ColumnMap,
    /// Require the first event at time 0.
    pub require_origin: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            observation_end: None,
            tie_policy: TiePolicy::Reject,
            columns: ColumnMap::default(),
            require_origin: true,
        }
    }
}

fn parse_number(field: &str, name: &str, row: u64, line: u64) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| HawkesError::Validation {
        row,
        line,
        message: format!("{name} `{field}` is not a number"),
    })
}

pub fn parse_cascade<R: Read>(input: R, opts: &ParseOptions) -> Result<EventSequence> {
    if let Some(end) = opts.observation_end {
        if !(end.is_finite() && end >= 0.0) {
            return Err(HawkesError::domain("observation_end", end, "must be finite and >= 0"));
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers().map_err(|e| csv_error(e, 1))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let columns = &opts.columns;
    let (Some(time_col), Some(mark_col)) = (find(&columns.time), find(&columns.magnitude)) else {
        return Err(HawkesError::Format {
            line: 1,
            message: format!(
                "expected a header with `{}` and `{}` columns, found `{}`",
                columns.time,
                columns.magnitude,
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    };
    let parent_col = find(&columns.parent);

    let mut events: Vec<Event> = Vec::new();
    let mut last_raw = f64::NEG_INFINITY;
    let mut record = csv::StringRecord::new();
    let mut row = 0u64;
    loop {
        let more = reader
            .read_record(&mut record)
            .map_err(|e| csv_error(e, row + 2))?;
        if !more {
            break;
        }
        row += 1;
        let line = record.position().map_or(row + 1, |p| p.line());
        let invalid = |message: String| HawkesError::Validation { row, line, message };

        let raw = parse_number(&record[time_col], "time", row, line)?;
        let mark = parse_number(&record[mark_col], "magnitude", row, line)?;
        if !(raw.is_finite() && raw >= 0.0) {
            return Err(invalid(format!("time {raw} must be finite and >= 0")));
        }
        if !(mark.is_finite() && mark >= 1.0) {
            return Err(invalid(format!("magnitude {mark} must be finite and >= 1")));
        }
        if row == 1 && opts.require_origin && raw != 0.0 {
            return Err(invalid(format!("first event must be at time 0, found {raw}")));
        }
        let parent = match parent_col.map(|c| record[c].trim()) {
            None | Some("") => None,
            Some(text) => {
                let p: usize = text
                    .parse()
                    .map_err(|_| invalid(format!("parent `{text}` is not a row index")))?;
                if p as u64 >= row - 1 {
                    return Err(invalid(format!("parent {p} must refer to an earlier row")));
                }
                Some(p)
            }
        };
        if raw < last_raw {
            return Err(invalid(format!("time {raw} precedes previous time {last_raw}")));
        }
        let previous = events.last().map_or(f64::NEG_INFINITY, |e| e.time);
        let time = if raw > previous {
            raw
        } else {
            match opts.tie_policy {
                TiePolicy::Reject => {
                    return Err(invalid(format!("duplicate timestamp {raw}")));
                }
                TiePolicy::Perturb => previous + TIE_SHIFT,
            }
        };
        last_raw = raw;
        if let Some(end) = opts.observation_end {
            if time > end {
                break;
            }
        }
        events.push(Event { time, mark, parent });
    }
    if row == 0 {
        return Err(HawkesError::EmptyCascade);
    }
    let end = opts
        .observation_end
        .unwrap_or_else(|| events.last().map_or(0.0, |e| e.time));
    EventSequence::new(events, end)
}

fn csv_error(e: csv::Error, fallback_line: u64) -> HawkesError {
    let line = e.position().map_or(fallback_line, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => HawkesError::Io(io),
        kind => HawkesError::Format {
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// Writes the cascade CSV, with a `parent` column when any parent link exists.
pub fn write_events<W: Write>(seq: &EventSequence, mut out: W) -> Result<()> {
    let with_parent = seq.has_parents();
    if with_parent {
        writeln!(out, "time,magnitude,parent")?;
    } else {
        writeln!(out, "time,magnitude")?;
    }
    for e in seq.events() {
        if with_parent {
            match e.parent {
                Some(p) => writeln!(out, "{},{},{}", e.time, e.mark, p)?,
                None => writeln!(out, "{},{},", e.time, e.mark)?,
            }
        } else {
            writeln!(out, "{},{}", e.time, e.mark)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Samples `lambda` on `t0, t0 + step, ...` up to `t1`, adding the left and
/// right limits at every event inside `[t0, t1]`.
pub fn write_intensity_trace<W: Write>(
    model: &HawkesModel,
    seq: &EventSequence,
    t0: f64,
    t1: f64,
    step: f64,
    mut out: W,
) -> Result<()> {
    model.validate()?;
    if !(step.is_finite() && step > 0.0) {
        return Err(HawkesError::domain("step", step, "must be finite and > 0"));
    }
    if !(t0.is_finite() && t1.is_finite() && t0 >= 0.0 && t1 >= t0) {
        return Err(HawkesError::Argument(format!("invalid trace range [{t0}, {t1}]")));
    }
    let events = seq.events();
    let left = |t: f64| {
        let k = events.partition_point(|e| e.time < t);
        model.background.value(t) + model.excitation(&events[..k], t)
    };
    let right = |t: f64| {
        let k = counting_process(seq, t);
        model.background.value(t) + model.excitation(&events[..k], t)
    };
    writeln!(out, "t,lambda")?;
    let mut next_event = events.partition_point(|e| e.time < t0);
    let steps = ((t1 - t0) / step).floor() as u64;
    for i in 0..=steps {
        let t = t0 + i as f64 * step;
        while next_event < events.len() && events[next_event].time <= t {
            let te = events[next_event].time;
            writeln!(out, "{},{}", te, left(te))?;
            writeln!(out, "{},{}", te, right(te))?;
            next_event += 1;
        }
        if events.get(next_event.wrapping_sub(1)).is_some_and(|e| e.time == t) {
            continue;
        }
        writeln!(out, "{},{}", t, left(t))?;
    }
    while next_event < events.len() && events[next_event].time <= t1 {
        let te = events[next_event].time;
        writeln!(out, "{},{}", te, left(te))?;
        writeln!(out, "{},{}", te, right(te))?;
        next_event += 1;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::ExponentialParams;
    use crate::process::BackgroundSpec;

    fn parse(text: &str) -> Result<EventSequence> {
        parse_cascade(text.as_bytes(), &ParseOptions::default())
    }

    #[test]
    fn follower_counts() {
        let seq = parse("time,magnitude\n0,12122\n3.2,193081\n").unwrap();
        assert_eq!(seq.len(), 2);
        let marks: Vec<f64> = seq.events().iter().map(|e| e.mark).collect();
        assert_eq!(marks, vec![12122.0, 193081.0]);
        assert_eq!(seq.observation_end(), 3.2);
    }

    #[test]
    fn crlf_and_column_map() {
        let opts = ParseOptions {
            columns: ColumnMap::parse("time=ts,magnitude=followers").unwrap(),
            ..ParseOptions::default()
        };
        let seq = parse_cascade("followers,ts\r\n5,0\r\n2,1.5\r\n".as_bytes(), &opts).unwrap();
        assert_eq!(seq.events()[1].time, 1.5);
        assert_eq!(seq.events()[0].mark, 5.0);
    }

    #[test]
    fn rejections_name_the_row() {
        assert!(matches!(parse("time,magnitude\n"), Err(HawkesError::EmptyCascade)));
        assert!(matches!(parse(""), Err(HawkesError::Format { line: 1, .. })));
        assert!(matches!(parse("0,1\n1,2\n"), Err(HawkesError::Format { line: 1, .. })));
        let e = parse("time,magnitude\n0,1\n-1,3\n").unwrap_err();
        assert!(matches!(e, HawkesError::Validation { row: 2, line: 3, .. }), "{e}");
        let e = parse("time,magnitude\n0,1\n1,0.5\n").unwrap_err();
        assert!(matches!(e, HawkesError::Validation { row: 2, .. }));
        let e = parse("time,magnitude\n0,1\n2,1\n1,1\n").unwrap_err();
        assert!(matches!(e, HawkesError::Validation { row: 3, line: 4, .. }));
        let e = parse("time,magnitude\n0,1\n1,1\n1,1\n").unwrap_err();
        assert!(matches!(e, HawkesError::Validation { row: 3, .. }));
        let e = parse("time,magnitude\n0.5,1\n").unwrap_err();
        assert!(matches!(e, HawkesError::Validation { row: 1, .. }));
        let e = parse("time,magnitude\n0,1\n1,x\n").unwrap_err();
        assert!(matches!(e, HawkesError::Validation { row: 2, .. }));
    }

    #[test]
    fn tie_perturbation() {
        let opts = ParseOptions {
            tie_policy: TiePolicy::Perturb,
            ..ParseOptions::default()
        };
        let seq = parse_cascade("time,magnitude\n0,1\n1,1\n1,1\n1,1\n".as_bytes(), &opts).unwrap();
        let t: Vec<f64> = seq.times().collect();
        assert_eq!(t, vec![0.0, 1.0, 1.0 + TIE_SHIFT, 1.0 + TIE_SHIFT + TIE_SHIFT]);
    }

    #[test]
    fn window_truncates() {
        let opts = ParseOptions {
            observation_end: Some(2.0),
            ..ParseOptions::default()
        };
        let seq = parse_cascade("time,magnitude\n0,1\n1,1\n2,1\n3,1\n".as_bytes(), &opts).unwrap();
        assert_eq!(seq.len(), 3);
        assert_eq!(seq.observation_end(), 2.0);
    }

    #[test]
    fn round_trip_with_parents() {
        let events = vec![
            Event::new(0.0, 1000.0),
            Event { time: 0.1 + 0.2, mark: 1.5, parent: Some(0) },
            Event { time: 1.0 / 3.0 + 7.0, mark: 3.25, parent: Some(1) },
        ];
        let seq = EventSequence::new(events, 1.0 / 3.0 + 7.0).unwrap();
        let mut buf = Vec::new();
        write_events(&seq, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time,magnitude,parent\n0,1000,\n"));
        assert_eq!(parse(&text).unwrap(), seq);

        let single = EventSequence::new(vec![Event::new(0.0, 4.0)], 0.0).unwrap();
        let mut buf = Vec::new();
        write_events(&single, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "time,magnitude\n0,4\n");
    }

    fn trace(model: &HawkesModel, seq: &EventSequence, t0: f64, t1: f64, step: f64) -> Vec<(f64, f64)> {
        let mut buf = Vec::new();
        write_intensity_trace(model, seq, t0, t1, step, &mut buf).unwrap();
        String::from_utf8(buf)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let (a, b) = l.split_once(',').unwrap();
                (a.parse().unwrap(), b.parse().unwrap())
            })
            .collect()
    }

    #[test]
    fn trace_jump_is_alpha() {
        let model = HawkesModel::new(
            BackgroundSpec::Constant { rate: 0.5 },
            ExponentialParams::new(0.8, 2.0).unwrap().into(),
        )
        .unwrap();
        let seq = EventSequence::new(vec![Event::unmarked(0.0), Event::unmarked(1.25)], 3.0).unwrap();
        let rows = trace(&model, &seq, 0.0, 3.0, 0.5);
        let at: Vec<&(f64, f64)> = rows.iter().filter(|r| r.0 == 1.25).collect();
        assert_eq!(at.len(), 2);
        assert!((at[1].1 - at[0].1 - 0.8).abs() < 1e-15);
        assert!(rows.windows(2).all(|w| w[0].0 <= w[1].0));
        // grid point at t = 0 coincides with the first event and is not repeated
        assert_eq!(rows.iter().filter(|r| r.0 == 0.0).count(), 2);
    }

    #[test]
    fn constant_trace() {
        let model = HawkesModel::new(
            BackgroundSpec::Constant { rate: 2.0 },
            ExponentialParams::new(0.0, 1.0).unwrap().into(),
        )
        .unwrap();
        let seq = EventSequence::new(vec![Event::unmarked(0.0), Event::unmarked(0.7)], 2.0).unwrap();
        assert!(trace(&model, &seq, 0.0, 2.0, 0.1).iter().all(|r| r.1 == 2.0));
        let empty_grid = trace(&model, &seq, 1.0, 2.0, 0.25);
        assert_eq!(empty_grid.len(), 5);
    }
}
