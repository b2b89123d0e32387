//! Persistent Betti tables over a scale grid and the diagrams read off them.
//!
//! Entry `(i, j)` of a table for dimension `k` is the number of `k`-classes
//! alive at `eps_i` that survive to `eps_j`. The diagram multiplicity of
//! `(eps_i, eps_j)` is the inclusion-exclusion
//! `beta(i, j-1) - beta(i, j) - beta(i-1, j-1) + beta(i-1, j)`
//! with `beta(-1, .) = 0`, and classes alive at the last grid scale are
//! reported with an infinite death.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::classical;
use crate::complex::{build_vr, VRComplex};
use crate::dirac::{
    assemble_dirac, betti_by_multiplicity, betti_by_qpe, persistent_boundary, ConstructionMode,
    PhaseRegister, QpeReadout, Warning, DEFAULT_TOLERANCE,
};
use crate::embedding::EmbeddingParams;
use crate::error::{Error, Result};
use crate::ingest::TimeSeries;
use crate::oracles::{ComparatorNoise, QramModel, ResourceReport, DEFAULT_ACCURACY};

const GRID_DECIMALS: i32 = 12;
const MAX_GRID_LEN: usize = 10_000;

fn round_scale(v: f64) -> f64 {
    let f = 10f64.powi(GRID_DECIMALS);
    let r = (v * f).round() / f;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// A strictly increasing list of non-negative scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScaleGrid {
    values: Vec<f64>,
}

impl ScaleGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidGrid(format!(
                "scale {bad} is not a finite non-negative number"
            )));
        }
        if let Some(w) = values.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "scales must increase strictly, got {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Self { values })
    }

    /// Parses `start:stop:step` (both ends inclusive) or a comma list.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let number = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidGrid(format!("{t:?} is not a number")))
        };
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [start, stop, step] = parts[..] else {
                return Err(Error::InvalidGrid(format!(
                    "expected start:stop:step, got {s:?}"
                )));
            };
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if !(step > 0.0) || !step.is_finite() {
                return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
            }
            if stop < start {
                return Err(Error::InvalidGrid(format!("stop {stop} is below start {start}")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > MAX_GRID_LEN {
                return Err(Error::InvalidGrid(format!("{count} scales exceed {MAX_GRID_LEN}")));
            }
            Self::new(
                (0..count)
                    .map(|i| round_scale(start + i as f64 * step))
                    .collect(),
            )
        } else {
            let values = s.split(',').map(number).collect::<Result<Vec<_>>>()?;
            Self::new(values.into_iter().map(round_scale).collect())
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }
}

impl FromStr for ScaleGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl TryFrom<Vec<f64>> for ScaleGrid {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<ScaleGrid> for Vec<f64> {
    fn from(g: ScaleGrid) -> Self {
        g.values
    }
}

/// Upper-triangular table of persistent Betti numbers for one dimension.
/// Row `i`, column `j` holds `beta(eps_i, eps_j)` for `j >= i` and `null`
/// below the diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiTable {
    k: usize,
    grid: Vec<OrderedScale>,
    rows: Vec<Vec<Option<usize>>>,
}

/// Grid value wrapper so tables can derive `Eq`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
struct OrderedScale(f64);

impl Eq for OrderedScale {}

impl BettiTable {
    pub fn from_fn<F>(k: usize, grid: &ScaleGrid, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<usize>,
    {
        let n = grid.len();
        let mut rows = vec![vec![None; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate().skip(i) {
                *cell = Some(f(i, j)?);
            }
        }
        Ok(Self {
            k,
            grid: grid.values().iter().map(|&v| OrderedScale(v)).collect(),
            rows,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn grid(&self) -> Vec<f64> {
        self.grid.iter().map(|s| s.0).collect()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `beta(eps_i, eps_j)`, or `None` when `j < i` or out of range.
    pub fn get(&self, i: usize, j: usize) -> Option<usize> {
        self.rows.get(i).and_then(|r| r.get(j)).copied().flatten()
    }

    /// Cells that break `beta(i, j) >= beta(i, j+1)` or
    /// `beta(i, j) >= beta(i-1, j)`.
    pub fn monotonicity_violations(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut bad = Vec::new();
        for i in 0..n {
            for j in i..n {
                let here = self.get(i, j).unwrap_or(0);
                let later = j + 1 < n && self.get(i, j + 1).unwrap_or(0) > here;
                let earlier = i > 0 && self.get(i - 1, j).unwrap_or(0) > here;
                if later || earlier {
                    bad.push((i, j));
                }
            }
        }
        bad
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("tables serialize")
    }
}

impl fmt::Display for BettiTable {
    /// Plain-text grid with `eps` down the side and `eps'` across the top.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "k = {}", self.k)?;
        write!(f, "{:>8}", "")?;
        for s in &self.grid {
            write!(f, " {:>6}", format!("{}", s.0))?;
        }
        writeln!(f)?;
        for (i, row) in self.rows.iter().enumerate() {
            write!(f, "{:>8}", format!("{}", self.grid[i].0))?;
            for cell in row {
                match cell {
                    Some(v) => write!(f, " {v:>6}")?,
                    None => write!(f, " {:>6}", ".")?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Which number fills the table in the simulated quantum pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Readout {
    /// Exact multiplicity of the eigenvalue `xi`.
    #[default]
    Multiplicity,
    /// Rounded phase-estimation readout `N * P(l xi)`.
    Qpe,
}

impl FromStr for Readout {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "multiplicity" => Ok(Self::Multiplicity),
            "qpe" => Ok(Self::Qpe),
            other => Err(format!("unknown readout {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumConfig {
    pub xi: i64,
    pub tolerance: f64,
    pub mode: ConstructionMode,
    pub readout: Readout,
    pub register: PhaseRegister,
    pub noise: Option<ComparatorNoise>,
    pub accuracy: f64,
}

impl Default for QuantumConfig {
    fn default() -> Self {
        Self {
            xi: 1,
            tolerance: DEFAULT_TOLERANCE,
            mode: ConstructionMode::default(),
            readout: Readout::default(),
            register: PhaseRegister::default(),
            noise: None,
            accuracy: DEFAULT_ACCURACY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    QuantumSim(QuantumConfig),
    Classical,
}

/// Per-cell diagnostics from the simulated pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub k: usize,
    pub i: usize,
    pub j: usize,
    pub eps: f64,
    pub eps_prime: f64,
    pub betti: usize,
    pub multiplicity: usize,
    pub operator_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qpe: Option<QpeReadout>,
    pub warnings: Vec<Warning>,
}

/// Tables for every requested dimension with the diagnostics that produced them.
#[derive(Debug, Clone, Serialize)]
pub struct TableSet {
    pub tables: Vec<BettiTable>,
    pub cells: Vec<CellReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resources: Option<ResourceReport>,
}

impl TableSet {
    pub fn table(&self, k: usize) -> Option<&BettiTable> {
        self.tables.iter().find(|t| t.k == k)
    }

    pub fn warnings(&self) -> impl Iterator<Item = (&CellReport, &Warning)> {
        self.cells
            .iter()
            .flat_map(|c| c.warnings.iter().map(move |w| (c, w)))
    }
}

fn sorted_dims(dims: &[usize]) -> Result<Vec<usize>> {
    let dims: Vec<usize> = dims.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if dims.is_empty() {
        return Err(Error::InvalidParams("no homology dimensions requested".into()));
    }
    Ok(dims)
}

/// Computes one table per dimension in `dims`.
pub fn compute_tables(
    ts: &TimeSeries,
    params: EmbeddingParams,
    grid: &ScaleGrid,
    dims: &[usize],
    method: &Method,
) -> Result<TableSet> {
    let dims = sorted_dims(dims)?;
    match method {
        Method::Classical => {
            let tables = classical::classical_tables(ts, params, grid, &dims)?;
            Ok(TableSet {
                tables,
                cells: Vec::new(),
                resources: None,
            })
        }
        Method::QuantumSim(config) => quantum_tables(ts, params, grid, &dims, config),
    }
}

/// Convenience wrapper for a single dimension.
pub fn betti_table(
    ts: &TimeSeries,
    params: EmbeddingParams,
    grid: &ScaleGrid,
    k: usize,
    method: &Method,
) -> Result<BettiTable> {
    let mut set = compute_tables(ts, params, grid, &[k], method)?;
    Ok(set.tables.remove(0))
}

struct CellOutcome {
    betti: usize,
    multiplicity: usize,
    size: usize,
    qpe: Option<QpeReadout>,
    warnings: Vec<Warning>,
}

fn quantum_cell(
    lo: &VRComplex,
    hi: &VRComplex,
    k: usize,
    config: &QuantumConfig,
) -> Result<CellOutcome> {
    let pb = persistent_boundary(lo, hi, k)?;
    let op = assemble_dirac(&pb, config.xi, config.mode)?;
    let spectrum = op.spectrum();
    let mult = betti_by_multiplicity(&spectrum, config.xi, config.tolerance)?;
    let mut warnings: Vec<Warning> = mult.warning.into_iter().collect();
    let qpe = match config.readout {
        Readout::Multiplicity => None,
        Readout::Qpe => {
            let r = betti_by_qpe(&spectrum, config.xi, config.tolerance, config.register);
            warnings.extend(r.warning.clone());
            Some(r)
        }
    };
    Ok(CellOutcome {
        betti: qpe.as_ref().map_or(mult.betti, |r| r.betti),
        multiplicity: mult.betti,
        size: op.size(),
        qpe,
        warnings,
    })
}

fn quantum_tables(
    ts: &TimeSeries,
    params: EmbeddingParams,
    grid: &ScaleGrid,
    dims: &[usize],
    config: &QuantumConfig,
) -> Result<TableSet> {
    let kmax = dims[dims.len() - 1] + 1;
    let mut q = QramModel::new(ts).with_accuracy(config.accuracy)?;
    if let Some(noise) = config.noise {
        q = q.with_noise(noise);
    }

    // Scales whose complexes coincide share one representative.
    let mut reps: Vec<VRComplex> = Vec::new();
    let mut class = Vec::with_capacity(grid.len());
    for &eps in grid.values() {
        let c = build_vr(&mut q, params, eps, kmax)?;
        match reps.last() {
            Some(last) if last.same_simplices(&c) => {}
            _ => reps.push(c),
        }
        class.push(reps.len() - 1);
    }

    let n = grid.len();
    let keys: BTreeSet<(usize, usize, usize)> = dims
        .iter()
        .flat_map(|&k| {
            let class = &class;
            (0..n).flat_map(move |i| (i..n).map(move |j| (k, class[i], class[j])))
        })
        .collect();
    let first_index = |c: usize| class.iter().position(|&x| x == c).unwrap_or(0);
    let outcomes: BTreeMap<(usize, usize, usize), CellOutcome> = keys
        .into_par_iter()
        .map(|(k, a, b)| {
            quantum_cell(&reps[a], &reps[b], k, config)
                .map(|o| ((k, a, b), o))
                .map_err(|e| Error::Cell {
                    i: first_index(a),
                    j: first_index(b),
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;

    let mut tables = Vec::with_capacity(dims.len());
    let mut cells = Vec::new();
    for &k in dims {
        let table = BettiTable::from_fn(k, grid, |i, j| {
            let o = &outcomes[&(k, class[i], class[j])];
            cells.push(CellReport {
                k,
                i,
                j,
                eps: grid.get(i),
                eps_prime: grid.get(j),
                betti: o.betti,
                multiplicity: o.multiplicity,
                operator_size: o.size,
                qpe: o.qpe.clone(),
                warnings: o.warnings.clone(),
            });
            Ok(o.betti)
        })?;
        tables.push(table);
    }
    Ok(TableSet {
        tables,
        cells,
        resources: Some(q.call_report()),
    })
}

/// Death coordinate of a diagram point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Death {
    Finite(f64),
    Infinite,
}

impl Death {
    pub fn value(self) -> f64 {
        match self {
            Death::Finite(v) => v,
            Death::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for Death {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Death::Finite(v) => s.serialize_f64(*v),
            Death::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Death {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Label(String),
        }
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(Death::Finite(v)),
            Repr::Label(s) if s == "inf" => Ok(Death::Infinite),
            Repr::Label(s) => Err(serde::de::Error::custom(format!(
                "death must be a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub dimension: usize,
    pub birth: f64,
    pub death: Death,
    pub multiplicity: usize,
}

/// Off-diagonal points sorted by dimension, birth, then death.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PersistenceDiagram {
    points: Vec<DiagramPoint>,
}

/// Multiplicities of one table via inclusion-exclusion.
pub fn diagram_from_table(table: &BettiTable) -> Result<Vec<DiagramPoint>> {
    let n = table.len();
    let grid = table.grid();
    let beta = |i: isize, j: usize| -> i64 {
        if i < 0 {
            0
        } else {
            table.get(i as usize, j).unwrap_or(0) as i64
        }
    };
    let mut points = Vec::new();
    let mut push = |i: usize, j: isize, value: i64, death: Death| -> Result<()> {
        if value < 0 {
            return Err(Error::NegativeMultiplicity { i, j, value });
        }
        if value > 0 {
            points.push(DiagramPoint {
                dimension: table.k(),
                birth: grid[i],
                death,
                multiplicity: value as usize,
            });
        }
        Ok(())
    };
    for i in 0..n {
        let ii = i as isize;
        for j in i + 1..n {
            let mu = beta(ii, j - 1) - beta(ii, j) - (beta(ii - 1, j - 1) - beta(ii - 1, j));
            push(i, j as isize, mu, Death::Finite(grid[j]))?;
        }
        if n > 0 {
            let mu = beta(ii, n - 1) - beta(ii - 1, n - 1);
            push(i, -1, mu, Death::Infinite)?;
        }
    }
    Ok(points)
}

pub fn diagram_from_tables(tables: &[BettiTable]) -> Result<PersistenceDiagram> {
    let mut points = Vec::new();
    for t in tables {
        points.extend(diagram_from_table(t)?);
    }
    Ok(PersistenceDiagram::new(points))
}

const PALETTE: [&str; 4] = ["#ff7f0e", "#1f77b4", "#2ca02c", "#9467bd"];

impl PersistenceDiagram {
    pub fn new(mut points: Vec<DiagramPoint>) -> Self {
        points.sort_by(|a, b| {
            a.dimension
                .cmp(&b.dimension)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.value().total_cmp(&b.death.value()))
        });
        Self { points }
    }

    pub fn points(&self) -> &[DiagramPoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points of one dimension.
    pub fn dimension(&self, k: usize) -> impl Iterator<Item = &DiagramPoint> {
        self.points.iter().filter(move |p| p.dimension == k)
    }

    /// Classes of dimension `k` born by `eps` and still alive after `eps_prime`.
    pub fn betti(&self, k: usize, eps: f64, eps_prime: f64) -> usize {
        self.dimension(k)
            .filter(|p| p.birth <= eps && p.death.value() > eps_prime)
            .map(|p| p.multiplicity)
            .sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("diagrams serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        let points: Vec<DiagramPoint> = serde_json::from_str(text)?;
        Ok(Self::new(points))
    }

    /// 600x600 scatter plot. Marker area grows with multiplicity; points
    /// with infinite death sit on a dashed line above the plot area.
    pub fn to_svg(&self, grid: &ScaleGrid) -> String {
        const SIZE: f64 = 600.0;
        const LEFT: f64 = 70.0;
        const RIGHT: f64 = 30.0;
        const TOP: f64 = 60.0;
        const BOTTOM: f64 = 60.0;
        const INF_Y: f64 = 32.0;

        let finite = self
            .points
            .iter()
            .flat_map(|p| [p.birth, p.death.value()])
            .filter(|v| v.is_finite());
        let lo = finite.clone().chain([grid.get(0)]).fold(f64::INFINITY, f64::min);
        let mut hi = finite
            .chain([grid.get(grid.len() - 1)])
            .fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            hi = lo + 1.0;
        }
        let sx = |v: f64| LEFT + (v - lo) / (hi - lo) * (SIZE - LEFT - RIGHT);
        let sy = |v: f64| SIZE - BOTTOM - (v - lo) / (hi - lo) * (SIZE - TOP - BOTTOM);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="600" height="600" viewBox="0 0 600 600" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="600" height="600" fill="white"/>"#);
        let (x0, x1, y0, y1) = (sx(lo), sx(hi), sy(lo), sy(hi));
        let _ = writeln!(
            out,
            r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="black"/>"#
        );
        let _ = writeln!(
            out,
            r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}" stroke="black"/>"#
        );
        let _ = writeln!(
            out,
            r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="gray" stroke-dasharray="4 3"/>"#
        );
        let _ = writeln!(
            out,
            r#"<line x1="{x0:.2}" y1="{INF_Y}" x2="{x1:.2}" y2="{INF_Y}" stroke="lightgray" stroke-dasharray="2 3"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">inf</text>"#,
            x0 - 8.0,
            INF_Y + 4.0
        );
        for v in [lo, hi] {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{v}</text>"#,
                sx(v),
                y0 + 18.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v}</text>"#,
                x0 - 8.0,
                sy(v) + 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">birth</text>"#,
            (x0 + x1) / 2.0,
            SIZE - 18.0
        );
        let _ = writeln!(
            out,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">death</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0
        );

        for p in &self.points {
            let color = PALETTE[p.dimension.min(PALETTE.len() - 1)];
            let cx = sx(p.birth);
            let cy = match p.death {
                Death::Finite(d) => sy(d),
                Death::Infinite => INF_Y,
            };
            let r = 4.0 * (p.multiplicity as f64).sqrt();
            let death = match p.death {
                Death::Finite(d) => d.to_string(),
                Death::Infinite => "inf".to_string(),
            };
            let _ = writeln!(
                out,
                r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="{color}" fill-opacity="0.75"><title>H{} ({}, {death}) x{}</title></circle>"#,
                p.dimension, p.birth, p.multiplicity
            );
        }

        let dims: BTreeSet<usize> = self.points.iter().map(|p| p.dimension).collect();
        for (row, k) in dims.iter().enumerate() {
            let y = TOP + 10.0 + 18.0 * row as f64;
            let color = PALETTE[(*k).min(PALETTE.len() - 1)];
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{y:.2}" r="5" fill="{color}"/><text x="{:.2}" y="{:.2}">H{k}</text>"#,
                SIZE - RIGHT - 60.0,
                SIZE - RIGHT - 50.0,
                y + 4.0
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(k: usize, grid: &ScaleGrid, rows: &[&[usize]]) -> BettiTable {
        BettiTable::from_fn(k, grid, |i, j| Ok(rows[i][j - i])).unwrap()
    }

    #[test]
    fn grid_parsing() {
        let g = ScaleGrid::parse("0:15:1").unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.get(15), 15.0);
        let g = ScaleGrid::parse("0:1:0.1").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g.get(3), 0.3);
        assert_eq!(g.get(10), 1.0);
        let g = ScaleGrid::parse("0, 1.0, 2").unwrap();
        assert_eq!(g.values(), &[0.0, 1.0, 2.0]);
        assert_eq!("0.5".parse::<ScaleGrid>().unwrap().values(), &[0.5]);
        for bad in ["", "1,0", "1,1", "0:1", "0:1:0", "2:1:1", "a,b", "-1,0", "0:1:-1"] {
            assert!(ScaleGrid::parse(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn grid_rounds_to_twelve_decimals() {
        let g = ScaleGrid::parse("0:1:0.142857142857142857").unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g.get(1), 0.142857142857);
    }

    #[test]
    fn periodic_table_diagram() {
        let grid = ScaleGrid::parse("0,1,2").unwrap();
        let b0 = table(0, &grid, &[&[4, 1, 1], &[1, 1], &[1]]);
        let b1 = table(1, &grid, &[&[0, 0, 0], &[1, 0], &[0]]);
        let d = diagram_from_tables(&[b0, b1]).unwrap();
        let pts: Vec<(usize, f64, f64, usize)> = d
            .points()
            .iter()
            .map(|p| (p.dimension, p.birth, p.death.value(), p.multiplicity))
            .collect();
        assert_eq!(
            pts,
            vec![
                (0, 0.0, 1.0, 3),
                (0, 0.0, f64::INFINITY, 1),
                (1, 1.0, 2.0, 1),
            ]
        );
        assert_eq!(d.betti(0, 0.0, 0.0), 4);
        assert_eq!(d.betti(1, 1.0, 1.0), 1);
        assert_eq!(d.betti(1, 1.0, 2.0), 0);
    }

    #[test]
    fn essential_and_empty_tables() {
        let grid = ScaleGrid::parse("0,1").unwrap();
        let zero = table(1, &grid, &[&[0, 0], &[0]]);
        assert!(diagram_from_table(&zero).unwrap().is_empty());
        let late = table(1, &grid, &[&[0, 0], &[2]]);
        let pts = diagram_from_table(&late).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].death, Death::Infinite);
        assert_eq!(pts[0].multiplicity, 2);
    }

    #[test]
    fn negative_multiplicity_is_an_error() {
        let grid = ScaleGrid::parse("0,1").unwrap();
        let bad = table(0, &grid, &[&[1, 2], &[2]]);
        assert!(matches!(
            diagram_from_table(&bad),
            Err(Error::NegativeMultiplicity { .. })
        ));
        assert!(!bad.monotonicity_violations().is_empty());
    }

    #[test]
    fn json_shapes() {
        let grid = ScaleGrid::parse("0,1,2").unwrap();
        let b1 = table(1, &grid, &[&[0, 0, 0], &[1, 0], &[0]]);
        let v = b1.to_json();
        assert_eq!(v["k"], 1);
        assert_eq!(v["grid"], serde_json::json!([0.0, 1.0, 2.0]));
        assert_eq!(v["rows"][1], serde_json::json!([null, 1, 0]));
        let back: BettiTable = serde_json::from_value(v).unwrap();
        assert_eq!(back, b1);

        let d = diagram_from_tables(&[b1]).unwrap();
        let json = d.to_json();
        assert_eq!(
            json,
            serde_json::json!([{"dimension": 1, "birth": 1.0, "death": 2.0, "multiplicity": 1}])
        );
        let inf = PersistenceDiagram::new(vec![DiagramPoint {
            dimension: 0,
            birth: 0.0,
            death: Death::Infinite,
            multiplicity: 1,
        }]);
        let text = inf.to_json().to_string();
        assert!(text.contains("\"inf\""));
        assert_eq!(PersistenceDiagram::from_json(&text).unwrap(), inf);
        assert!(PersistenceDiagram::from_json(r#"[{"dimension":0,"birth":0,"death":"never","multiplicity":1}]"#).is_err());
    }

    #[test]
    fn svg_has_axes_and_markers() {
        let grid = ScaleGrid::parse("0,1,2").unwrap();
        let d = PersistenceDiagram::new(vec![
            DiagramPoint {
                dimension: 0,
                birth: 0.0,
                death: Death::Infinite,
                multiplicity: 1,
            },
            DiagramPoint {
                dimension: 1,
                birth: 1.0,
                death: Death::Finite(2.0),
                multiplicity: 4,
            },
        ]);
        let svg = d.to_svg(&grid);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"width="600""#));
        assert!(svg.contains(">birth<") && svg.contains(">death<"));
        assert!(svg.contains("#ff7f0e") && svg.contains("#1f77b4"));
        assert!(svg.contains(r#"r="8.00""#));
        assert!(svg.contains(r#"cy="32.00""#));
        assert!(PersistenceDiagram::default().to_svg(&grid).ends_with("</svg>\n"));
    }

    #[test]
    fn periodic_tables_from_series() {
        let ts = TimeSeries::new(vec![0.0, 1.0, 0.0, -1.0, 0.0]);
        let params = EmbeddingParams::new(2, 1).unwrap();
        let grid = ScaleGrid::parse("0,1,2").unwrap();
        let q = compute_tables(&ts, params, &grid, &[0, 1], &Method::QuantumSim(QuantumConfig::default())).unwrap();
        let c = compute_tables(&ts, params, &grid, &[1, 0], &Method::Classical).unwrap();
        assert_eq!(q.tables, c.tables);
        assert_eq!(q.table(0).unwrap().get(0, 0), Some(4));
        assert_eq!(q.table(0).unwrap().get(1, 1), Some(1));
        assert_eq!(q.table(1).unwrap().get(1, 1), Some(1));
        assert_eq!(q.cells.len(), 12);
        assert!(q.resources.as_ref().unwrap().stats.comparator_calls > 0);
        assert!(q.warnings().next().is_none());

        let qpe = QuantumConfig {
            readout: Readout::Qpe,
            ..QuantumConfig::default()
        };
        let r = compute_tables(&ts, params, &grid, &[0, 1], &Method::QuantumSim(qpe)).unwrap();
        assert_eq!(r.tables, c.tables);
        assert!(r.cells.iter().all(|c| c.qpe.is_some()));
    }
}
