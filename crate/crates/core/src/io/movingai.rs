//! Moving-AI `.map` and `.scen` (version 1) formats.
//!
//! Coordinates follow the benchmark convention: `x` is the column, `y` the
//! row, both zero-based from the top-left corner. The octile distance column
//! of scenario rows is kept for reference only; movement is 4-connected.

use std::fs;
use std::path::Path as FsPath;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Cell, GridMap};
use crate::instance::Instance;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn header_value(line: Option<(usize, &str)>, key: &str, eof_line: usize) -> Result<(usize, usize)> {
    let (no, text) = line.ok_or_else(|| parse_err(eof_line, format!("missing `{key}` line")))?;
    let mut words = text.split_whitespace();
    if words.next() != Some(key) {
        return Err(parse_err(no, format!("expected `{key} <n>`, found {text:?}")));
    }
    let value = words
        .next()
        .and_then(|v| v.parse::<usize>().ok())
        .ok_or_else(|| parse_err(no, format!("`{key}` needs a nonnegative integer")))?;
    if words.next().is_some() {
        return Err(parse_err(no, format!("trailing text after `{key}`")));
    }
    Ok((no, value))
}

/// Parses a Moving-AI map: `type`, `height`, `width` and `map` header lines
/// followed by `height` rows of `width` glyphs. `.` and `G` are passable,
/// `@`, `O` and `T` are obstacles.
pub fn parse_map(text: &str) -> Result<GridMap> {
    let mut lines = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .map(|(i, l)| (i + 1, l));
    let eof = text.lines().count() + 1;

    let (no, first) = lines.next().ok_or_else(|| parse_err(1, "empty map file"))?;
    if first.split_whitespace().next() != Some("type") {
        return Err(parse_err(no, format!("expected `type <name>`, found {first:?}")));
    }
    let (_, height) = header_value(lines.next(), "height", eof)?;
    let (_, width) = header_value(lines.next(), "width", eof)?;
    let (no, map_kw) = lines.next().ok_or_else(|| parse_err(eof, "missing `map` line"))?;
    if map_kw.trim() != "map" {
        return Err(parse_err(no, format!("expected `map`, found {map_kw:?}")));
    }
    if width == 0 || height == 0 {
        return Err(parse_err(no, "map dimensions must be positive"));
    }

    let mut passable = Vec::with_capacity(width * height);
    for row in 0..height {
        let (no, text) = lines
            .next()
            .ok_or_else(|| parse_err(eof, format!("truncated map: {row} of {height} rows")))?;
        let glyphs = text.as_bytes();
        if glyphs.len() != width {
            return Err(parse_err(
                no,
                format!("row has {} characters, expected {width}", glyphs.len()),
            ));
        }
        for (col, &g) in glyphs.iter().enumerate() {
            passable.push(match g {
                b'.' | b'G' => true,
                b'@' | b'O' | b'T' => false,
                _ => return Err(parse_err(no, format!("unknown glyph {:?} at column {col}", g as char))),
            });
        }
    }
    for (no, text) in lines {
        if !text.trim().is_empty() {
            return Err(parse_err(no, "unexpected content after the last map row"));
        }
    }
    GridMap::new(width, height, passable)
}

/// One row of a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEntry {
    pub bucket: u32,
    pub map_name: String,
    pub map_width: usize,
    pub map_height: usize,
    pub start: (usize, usize),
    pub goal: (usize, usize),
    pub reference_distance: f64,
}

/// Parses every row of a version-1 scenario file without looking at a map.
pub fn parse_scenario_entries(text: &str) -> Result<Vec<ScenarioEntry>> {
    let mut lines = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .map(|(i, l)| (i + 1, l));
    let (no, header) = lines.next().ok_or_else(|| parse_err(1, "empty scenario file"))?;
    let mut words = header.split_whitespace();
    let version_ok = words.next() == Some("version")
        && words
            .next()
            .and_then(|v| v.parse::<f64>().ok())
            .is_some_and(|v| v == 1.0)
        && words.next().is_none();
    if !version_ok {
        return Err(parse_err(no, format!("expected `version 1`, found {header:?}")));
    }

    let mut entries = Vec::new();
    for (no, text) in lines {
        if text.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 9 {
            return Err(parse_err(
                no,
                format!("expected 9 tab-separated fields, found {}", fields.len()),
            ));
        }
        let int = |i: usize, name: &str| -> Result<usize> {
            fields[i].trim().parse::<usize>().map_err(|_| {
                parse_err(
                    no,
                    format!("field `{name}` is not a nonnegative integer: {:?}", fields[i]),
                )
            })
        };
        let reference_distance = fields[8]
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|d| d.is_finite() && *d >= 0.0)
            .ok_or_else(|| parse_err(no, format!("bad distance field {:?}", fields[8])))?;
        let entry = ScenarioEntry {
            bucket: u32::try_from(int(0, "bucket")?).map_err(|_| parse_err(no, "bucket out of range"))?,
            map_name: fields[1].to_string(),
            map_width: int(2, "width")?,
            map_height: int(3, "height")?,
            start: (int(4, "start x")?, int(5, "start y")?),
            goal: (int(6, "goal x")?, int(7, "goal y")?),
            reference_distance,
        };
        for (what, (x, y)) in [("start", entry.start), ("goal", entry.goal)] {
            if x >= entry.map_width || y >= entry.map_height {
                return Err(parse_err(
                    no,
                    format!(
                        "{what} ({x}, {y}) outside declared {}x{} map",
                        entry.map_width, entry.map_height
                    ),
                ));
            }
        }
        entries.push(entry);
    }
    Ok(entries)
}

/// Builds an instance from the first `m` rows of a scenario, or from `m`
/// rows chosen by a seeded shuffle when `shuffle_seed` is given.
pub fn select_agents(
    entries: &[ScenarioEntry],
    map: &GridMap,
    m: usize,
    shuffle_seed: Option<u64>,
) -> Result<Instance> {
    if m == 0 {
        return Err(Error::InvalidInput("at least one agent is required".into()));
    }
    if m > entries.len() {
        return Err(Error::InvalidInput(format!(
            "requested {m} agents but the scenario has {} rows",
            entries.len()
        )));
    }
    let mut order: Vec<usize> = (0..entries.len()).collect();
    if let Some(seed) = shuffle_seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut endpoints = Vec::with_capacity(m);
    for &row in &order[..m] {
        let e = &entries[row];
        if e.map_width != map.width() || e.map_height != map.height() {
            return Err(Error::InvalidInput(format!(
                "scenario row {row} declares a {}x{} map, loaded map is {}x{}",
                e.map_width,
                e.map_height,
                map.width(),
                map.height()
            )));
        }
        let cell = |(x, y): (usize, usize), what: &str| -> Result<Cell> {
            map.cell(x, y)
                .filter(|&c| map.is_passable(c))
                .ok_or_else(|| Error::InvalidInput(format!("scenario row {row}: {what} ({x}, {y}) is blocked")))
        };
        endpoints.push((cell(e.start, "start")?, cell(e.goal, "goal")?));
    }
    Instance::new(map.clone(), endpoints)
}

/// Parses a scenario and keeps its first `m` rows as agents, in file order.
pub fn parse_scenario(text: &str, map: &GridMap, m: usize) -> Result<Instance> {
    select_agents(&parse_scenario_entries(text)?, map, m, None)
}

/// Renders a map in Moving-AI format (`.` passable, `@` blocked).
pub fn map_to_text(map: &GridMap) -> String {
    let mut s = format!("type octile\nheight {}\nwidth {}\nmap\n", map.height(), map.width());
    for row in map.passable_mask().chunks(map.width()) {
        s.extend(row.iter().map(|&p| if p { '.' } else { '@' }));
        s.push('\n');
    }
    s
}

/// Renders scenario rows in version-1 format. Distances are written with
/// eight decimals, as the published benchmark files do.
pub fn scenario_to_text(entries: &[ScenarioEntry]) -> String {
    let mut s = String::from("version 1\n");
    for e in entries {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.8}\n",
            e.bucket,
            e.map_name,
            e.map_width,
            e.map_height,
            e.start.0,
            e.start.1,
            e.goal.0,
            e.goal.1,
            e.reference_distance
        ));
    }
    s
}

fn read_text(path: &FsPath) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn with_path(path: &FsPath, e: Error) -> Error {
    match e {
        Error::Parse { line, message } => Error::format(path, format!("line {line}: {message}")),
        other => other,
    }
}

pub fn read_map(path: impl AsRef<FsPath>) -> Result<GridMap> {
    let path = path.as_ref();
    parse_map(&read_text(path)?).map_err(|e| with_path(path, e))
}

pub fn read_scenario(path: impl AsRef<FsPath>) -> Result<Vec<ScenarioEntry>> {
    let path = path.as_ref();
    parse_scenario_entries(&read_text(path)?).map_err(|e| with_path(path, e))
}

/// Reads a map and scenario pair into an `m`-agent instance.
pub fn load_instance(
    map_path: impl AsRef<FsPath>,
    scen_path: impl AsRef<FsPath>,
    m: usize,
    shuffle_seed: Option<u64>,
) -> Result<Instance> {
    let map = read_map(map_path)?;
    let entries = read_scenario(scen_path)?;
    select_agents(&entries, &map, m, shuffle_seed)
}
