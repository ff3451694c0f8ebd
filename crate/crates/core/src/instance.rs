//! Partner Unit Problem instances: construction, the room-grid families and
//! the fact-file format.
//!
//! A fact file holds one fact per line, each terminated by a period:
//!
//! ```text
//! % instance double-6
//! comUnit(1).
//! iucap(2).
//! ucap(2).
//! zone2sensor(1,1).
//! ```
//!
//! `%` starts a comment. The writer emits facts sorted by predicate name and
//! then numerically by argument, so `parse(write(i)) == i` and
//! `write(parse(s)) == s` for any writer output `s`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::solver::{self, SearchConfig};

/// The instance collections of the benchmark suite.
///
/// All three are grids of rooms (zones) with sensors on the walls between
/// neighbouring rooms, numbered row-major. For each room the sensor on its
/// right wall comes first, then the sensor(s) on its lower wall.
///
/// * `Double`: two rows, one sensor per wall. `double-6` is the Fig. 1
///   building (7 sensors, 14 edges).
/// * `DoubleV`: two rows, two sensors on every wall between the rows.
/// * `Triple`: three rows, one sensor per wall.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Double,
    DoubleV,
    Triple,
}

impl Family {
    pub const MIN_ZONES: u32 = 6;

    pub fn name(self) -> &'static str {
        match self {
            Family::Double => "double",
            Family::DoubleV => "doublev",
            Family::Triple => "triple",
        }
    }

    fn rows(self) -> u32 {
        match self {
            Family::Double | Family::DoubleV => 2,
            Family::Triple => 3,
        }
    }

    fn vertical_sensors(self) -> u32 {
        match self {
            Family::DoubleV => 2,
            _ => 1,
        }
    }

    pub fn min_zones(self) -> u32 {
        Self::MIN_ZONES
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double" => Ok(Family::Double),
            "doublev" => Ok(Family::DoubleV),
            "triple" => Ok(Family::Triple),
            other => Err(Error::Domain(format!("unknown instance family `{other}`"))),
        }
    }
}

/// A PUP instance: bipartite sensor/zone graph, unit pool and capacities.
///
/// Ids are 1-based and contiguous, so the zone with id `z` sits at index
/// `z - 1` everywhere in the crate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PupInstance {
    name: String,
    num_zones: u32,
    num_sensors: u32,
    num_units: u32,
    ucap: u32,
    iucap: u32,
    edges: BTreeSet<(u32, u32)>,
    zone_sensors: Vec<Vec<u32>>,
    sensor_zones: Vec<Vec<u32>>,
    close_sensors: Vec<bool>,
    close_zones: Vec<bool>,
}

impl PupInstance {
    /// Builds an instance from `(zone, sensor)` edges. Every id in
    /// `1..=num_zones` / `1..=num_sensors` must be covered by an edge.
    pub fn new(
        name: impl Into<String>,
        edges: impl IntoIterator<Item = (u32, u32)>,
        num_units: u32,
        ucap: u32,
        iucap: u32,
    ) -> Result<Self> {
        let edges: BTreeSet<(u32, u32)> = edges.into_iter().collect();
        if ucap == 0 || iucap == 0 {
            return Err(Error::Domain("ucap and iucap must be at least 1".into()));
        }
        if edges.iter().any(|&(z, s)| z == 0 || s == 0) {
            return Err(Error::Domain("ids are 1-based".into()));
        }
        let num_zones = edges.iter().map(|e| e.0).max().unwrap_or(0);
        let num_sensors = edges.iter().map(|e| e.1).max().unwrap_or(0);
        let zone_ids: BTreeSet<u32> = edges.iter().map(|e| e.0).collect();
        let sensor_ids: BTreeSet<u32> = edges.iter().map(|e| e.1).collect();
        if zone_ids.len() as u32 != num_zones || sensor_ids.len() as u32 != num_sensors {
            return Err(Error::Domain(
                "zone and sensor ids must be contiguous from 1".into(),
            ));
        }

        let nz = num_zones as usize;
        let ns = num_sensors as usize;
        let mut zone_sensors = vec![Vec::new(); nz];
        let mut sensor_zones = vec![Vec::new(); ns];
        for &(z, s) in &edges {
            zone_sensors[z as usize - 1].push(s);
            sensor_zones[s as usize - 1].push(z);
        }
        let mut close_sensors = vec![false; ns * ns];
        for sensors in &zone_sensors {
            for &a in sensors {
                for &b in sensors {
                    if a != b {
                        close_sensors[(a as usize - 1) * ns + (b as usize - 1)] = true;
                    }
                }
            }
        }
        let mut close_zones = vec![false; nz * nz];
        for zones in &sensor_zones {
            for &a in zones {
                for &b in zones {
                    if a != b {
                        close_zones[(a as usize - 1) * nz + (b as usize - 1)] = true;
                    }
                }
            }
        }

        Ok(PupInstance {
            name: name.into(),
            num_zones,
            num_sensors,
            num_units,
            ucap,
            iucap,
            edges,
            zone_sensors,
            sensor_zones,
            close_sensors,
            close_zones,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_zones(&self) -> u32 {
        self.num_zones
    }

    pub fn num_sensors(&self) -> u32 {
        self.num_sensors
    }

    pub fn num_units(&self) -> u32 {
        self.num_units
    }

    pub fn zones(&self) -> impl Iterator<Item = u32> {
        1..=self.num_zones
    }

    pub fn sensors(&self) -> impl Iterator<Item = u32> {
        1..=self.num_sensors
    }

    pub fn units(&self) -> impl Iterator<Item = u32> {
        1..=self.num_units
    }

    pub fn ucap(&self) -> u32 {
        self.ucap
    }

    pub fn iucap(&self) -> u32 {
        self.iucap
    }

    pub fn edges(&self) -> &BTreeSet<(u32, u32)> {
        &self.edges
    }

    pub fn has_edge(&self, zone: u32, sensor: u32) -> bool {
        self.edges.contains(&(zone, sensor))
    }

    pub fn sensors_of(&self, zone: u32) -> &[u32] {
        &self.zone_sensors[zone as usize - 1]
    }

    pub fn zones_of(&self, sensor: u32) -> &[u32] {
        &self.sensor_zones[sensor as usize - 1]
    }

    /// Two distinct sensors sharing a zone.
    pub fn close_sensors(&self, a: u32, b: u32) -> bool {
        let n = self.num_sensors;
        (1..=n).contains(&a)
            && (1..=n).contains(&b)
            && self.close_sensors[(a as usize - 1) * n as usize + (b as usize - 1)]
    }

    /// Two distinct zones sharing a sensor.
    pub fn close_zones(&self, a: u32, b: u32) -> bool {
        let n = self.num_zones;
        (1..=n).contains(&a)
            && (1..=n).contains(&b)
            && self.close_zones[(a as usize - 1) * n as usize + (b as usize - 1)]
    }

    /// Same graph and capacities with a different unit pool.
    pub fn with_units(&self, num_units: u32, name: impl Into<String>) -> Self {
        let mut inst = self.clone();
        inst.num_units = num_units;
        inst.name = name.into();
        inst
    }

    /// Connectivity of the sensor/zone graph.
    pub fn is_connected(&self) -> bool {
        let n = (self.num_zones + self.num_sensors) as usize;
        if n == 0 {
            return true;
        }
        // zones 0..nz, sensors nz..
        let nz = self.num_zones as usize;
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            let next: Vec<usize> = if v < nz {
                self.zone_sensors[v].iter().map(|&s| nz + s as usize - 1).collect()
            } else {
                self.sensor_zones[v - nz].iter().map(|&z| z as usize - 1).collect()
            };
            for w in next {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    /// Serializes to the sorted fact-file format.
    pub fn to_facts(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("% instance {}\n", self.name));
        for u in self.units() {
            out.push_str(&format!("comUnit({u}).\n"));
        }
        out.push_str(&format!("iucap({}).\n", self.iucap));
        out.push_str(&format!("ucap({}).\n", self.ucap));
        for (z, s) in &self.edges {
            out.push_str(&format!("zone2sensor({z},{s}).\n"));
        }
        out
    }

    /// Parses the fact-file format. The instance name is read from a leading
    /// `% instance NAME` comment when present, otherwise `default_name`.
    pub fn parse_facts(text: &str, default_name: &str) -> Result<Self> {
        let mut name = None;
        let mut edges = Vec::new();
        let mut units = BTreeSet::new();
        let mut ucap = None;
        let mut iucap = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let (code, comment) = match raw.find('%') {
                Some(p) => (&raw[..p], Some(&raw[p + 1..])),
                None => (raw, None),
            };
            if let Some(c) = comment {
                if let Some(n) = c.trim().strip_prefix("instance ") {
                    name.get_or_insert_with(|| n.trim().to_string());
                }
            }
            let code: String = code.chars().filter(|c| !c.is_whitespace()).collect();
            for fact in code.split('.').filter(|f| !f.is_empty()) {
                let (pred, args) = parse_fact(fact).ok_or_else(|| {
                    Error::parse(line_no, format!("malformed fact `{fact}`"))
                })?;
                match (pred, args.as_slice()) {
                    ("zone2sensor", &[z, s]) => edges.push((z, s)),
                    ("comUnit", &[u]) => {
                        units.insert(u);
                    }
                    ("ucap", &[k]) => ucap = Some(k),
                    ("iucap", &[k]) => iucap = Some(k),
                    _ => {
                        return Err(Error::parse(line_no, format!("unexpected fact `{fact}`")))
                    }
                }
            }
        }
        let num_units = units.len() as u32;
        if units.iter().copied().ne(1..=num_units) {
            return Err(Error::parse(0, "comUnit ids must be contiguous from 1"));
        }
        let ucap = ucap.ok_or_else(|| Error::parse(0, "missing ucap fact"))?;
        let iucap = iucap.ok_or_else(|| Error::parse(0, "missing iucap fact"))?;
        PupInstance::new(
            name.unwrap_or_else(|| default_name.to_string()),
            edges,
            num_units,
            ucap,
            iucap,
        )
    }
}

/// Splits `pred(a,b,...)` into its name and numeric arguments.
pub(crate) fn parse_fact(fact: &str) -> Option<(&str, Vec<u32>)> {
    let open = fact.find('(')?;
    let inner = fact[open + 1..].strip_suffix(')')?;
    let args = inner
        .split(',')
        .map(|a| a.trim().parse::<u32>().ok())
        .collect::<Option<Vec<_>>>()?;
    Some((fact[..open].trim(), args))
}

/// The building of Fig. 1: 7 sensors, 6 zones, 4 units, UCAP = IUCAP = 2.
pub fn make_fig1_instance() -> PupInstance {
    const EDGES: [(u32, u32); 14] = [
        (1, 1),
        (1, 2),
        (2, 1),
        (2, 3),
        (2, 4),
        (3, 3),
        (3, 5),
        (4, 2),
        (4, 6),
        (5, 4),
        (5, 6),
        (5, 7),
        (6, 5),
        (6, 7),
    ];
    PupInstance::new("double-6", EDGES, 4, 2, 2).expect("fig. 1 instance is well formed")
}

/// Edges of a `rows x cols` room grid; see [`Family`] for the numbering.
fn grid_edges(rows: u32, cols: u32, vertical_sensors: u32) -> Vec<(u32, u32)> {
    let zone = |r: u32, c: u32| r * cols + c + 1;
    let mut edges = Vec::new();
    let mut sensor = 0;
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                sensor += 1;
                edges.push((zone(r, c), sensor));
                edges.push((zone(r, c + 1), sensor));
            }
            if r + 1 < rows {
                for _ in 0..vertical_sensors {
                    sensor += 1;
                    edges.push((zone(r, c), sensor));
                    edges.push((zone(r + 1, c), sensor));
                }
            }
        }
    }
    edges
}

const UCAP: u32 = 2;
const IUCAP: u32 = 2;

fn unit_cache() -> &'static Mutex<HashMap<(Family, u32), u32>> {
    static CACHE: OnceLock<Mutex<HashMap<(Family, u32), u32>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Smallest unit count for which the solver finds a solution, starting from
/// the counting bound `ceil(max(|Z|, |S|) / ucap)`.
fn satisfiable_unit_count(family: Family, graph: &PupInstance) -> u32 {
    if let Some(&n) = unit_cache().lock().unwrap().get(&(family, graph.num_zones())) {
        return n;
    }
    let items = graph.num_zones().max(graph.num_sensors());
    let mut units = items.div_ceil(graph.ucap());
    loop {
        let probe = graph.with_units(units, graph.name());
        let found = solver::solve(&probe, &[], &SearchConfig::default());
        if found.solution.is_some() {
            break;
        }
        units += 1;
    }
    unit_cache()
        .lock()
        .unwrap()
        .insert((family, graph.num_zones()), units);
    units
}

/// Builds a member of one of the instance collections.
///
/// The grid families are fixed topologies, so `seed` does not change the
/// result; it is accepted so callers can treat generators uniformly.
pub fn generate_instance(family: Family, zones: u32, unsat: bool, _seed: u64) -> Result<PupInstance> {
    if zones < family.min_zones() {
        return Err(Error::Domain(format!(
            "{family} needs at least {} zones, got {zones}",
            family.min_zones()
        )));
    }
    let rows = family.rows();
    if zones % rows != 0 {
        return Err(Error::Domain(format!(
            "{family} needs a multiple of {rows} zones, got {zones}"
        )));
    }
    let edges = grid_edges(rows, zones / rows, family.vertical_sensors());
    let base = format!("{family}-{zones}");
    let graph = PupInstance::new(base.clone(), edges, 1, UCAP, IUCAP)?;
    let units = satisfiable_unit_count(family, &graph);
    Ok(if unsat {
        graph.with_units(units - 1, format!("un-{base}"))
    } else {
        graph.with_units(units, base)
    })
}

/// Parses an instance spec such as `double-8` or `un-triple-9`.
pub fn instance_from_spec(spec: &str) -> Result<PupInstance> {
    let (unsat, rest) = match spec.strip_prefix("un-") {
        Some(r) => (true, r),
        None => (false, spec),
    };
    let (fam, zones) = rest
        .rsplit_once('-')
        .ok_or_else(|| Error::Domain(format!("instance spec `{spec}` is not [un-]type-zones")))?;
    let zones: u32 = zones
        .parse()
        .map_err(|_| Error::Domain(format!("bad zone count in `{spec}`")))?;
    generate_instance(fam.parse()?, zones, unsat, 0)
}
