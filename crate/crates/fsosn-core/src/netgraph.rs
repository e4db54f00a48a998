//! Snapshot routing graphs: nodes, feasible laser links, and their costs.
//!
//! A [`Snapshot`] freezes the network at one instant: every satellite and
//! ground station becomes a node, and every physically feasible laser link
//! becomes a pair of directed arcs carrying a latency cost (propagation time)
//! and a power cost (the transmit power that closes the link at that length).
//! Feasibility is three filters applied in sequence:
//!
//! 1. satellite pairs within the configured LISL range (which is validated
//!    against the line-of-sight maximum for the shell, so an in-range pair
//!    never grazes the atmosphere),
//! 2. ground-satellite pairs within the site's slant-range bound and above
//!    its horizon,
//! 3. optionally, links whose power cost exceeds a transmit-power limit are
//!    removed entirely.
//!
//! Ground stations never link to each other; traffic crosses the satellite
//! shell or not at all. Node and edge orderings are total and deterministic
//! so that downstream solvers and reports are reproducible byte-for-byte.
//!
//! [`SnapshotUniverse`] exists for sweeps: it computes the feasible link
//! candidates once per time slot at the widest range of interest, then stamps
//! out filtered snapshots for each (range, power limit) cell without
//! re-evaluating geometry or power chains.

use std::io::{self, Write};

use crate::constants::SPEED_OF_LIGHT_KM_S;
use crate::linkbudget::{
    isl_transmit_power_w, updown_transmit_power_w, AtmosphereParams, LinkBudgetError,
    OpticalParams,
};
use crate::orbital::{
    elevation_angle_from_ecef_deg, ground_to_ecef, max_feasible_lisl_range_km, slant_range_km,
    EcefPosition, GroundSite, OrbitalError, SatelliteId,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetGraphError {
    #[error("LISL range {range_km} km exceeds the {max_km:.1} km line-of-sight maximum for this shell")]
    RangeBeyondLineOfSight { range_km: f64, max_km: f64 },
    #[error("LISL range {0} must be a finite non-negative number of km")]
    InvalidRange(f64),
    #[error("requested range {range_km} km exceeds this universe's candidate range {max_km} km")]
    RangeBeyondUniverse { range_km: f64, max_km: f64 },
    #[error("power limit {0} W must be positive and finite")]
    InvalidPowerLimit(f64),
    #[error("duplicate satellite id {0}")]
    DuplicateSatellite(SatelliteId),
    #[error("duplicate ground site name {0:?}")]
    DuplicateSite(String),
    #[error("satellite {id} sits at radius {radius_km:.1} km, inside the planet")]
    SatelliteUnderground { id: SatelliteId, radius_km: f64 },
    #[error(transparent)]
    Orbital(#[from] OrbitalError),
    #[error(transparent)]
    LinkBudget(#[from] LinkBudgetError),
}

/// A node of the snapshot graph.
///
/// Ground stations are referenced by their index into the snapshot's
/// name-sorted site table, so the derived ordering (satellites first, then
/// ground stations by name) is total and cheap to compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRef {
    Sat(SatelliteId),
    Ground(u32),
}

impl std::fmt::Display for NodeRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NodeRef::Sat(id) => write!(f, "{id}"),
            NodeRef::Ground(i) => write!(f, "G{i}"),
        }
    }
}

/// One directed arc of the snapshot graph. Every feasible link contributes
/// two of these, one per direction, with equal distance and latency.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: NodeRef,
    pub to: NodeRef,
    pub distance_km: f64,
    /// Propagation delay over the link, ms.
    pub latency_cost_ms: f64,
    /// Transmit power that closes the link at this length, W.
    pub power_cost_w: f64,
}

/// Everything needed to price a link: terminal optics, the atmosphere
/// profile, and the altitude below which satellite-to-satellite rays are
/// considered blocked.
///
/// The atmosphere's `site_altitude_km` acts as a default profile; each
/// ground station's own altitude overrides it for that station's links.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkModel {
    pub optical: OpticalParams,
    pub atmosphere: AtmosphereParams,
    pub grazing_altitude_km: f64,
}

impl Default for LinkModel {
    fn default() -> Self {
        Self {
            optical: OpticalParams::default(),
            atmosphere: AtmosphereParams::default(),
            grazing_altitude_km: crate::constants::GRAZING_ALTITUDE_KM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutArc {
    pub to: u32,
    pub latency_ms: f64,
    pub distance_km: f64,
    pub edge_index: u32,
}

/// The static routing graph at one time slot.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time_s: f64,
    pub lisl_range_km: f64,
    pub power_limit_w: Option<f64>,
    nodes: Vec<NodeRef>,
    positions: Vec<EcefPosition>,
    ground_names: Vec<String>,
    satellite_count: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<OutArc>>,
}

impl Snapshot {
    pub fn nodes(&self) -> &[NodeRef] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn satellite_count(&self) -> usize {
        self.satellite_count
    }

    pub fn ground_count(&self) -> usize {
        self.ground_names.len()
    }

    /// True when the node index refers to a satellite. Nodes are laid out
    /// satellites-first, so this is an index comparison.
    pub fn is_satellite(&self, node: usize) -> bool {
        node < self.satellite_count
    }

    pub fn position(&self, node: usize) -> EcefPosition {
        self.positions[node]
    }

    /// Outgoing arcs of a node, sorted by destination index.
    pub fn neighbors(&self, node: usize) -> &[OutArc] {
        &self.adjacency[node]
    }

    /// Index of a node in the snapshot ordering, if present.
    pub fn node_index(&self, node: NodeRef) -> Option<usize> {
        self.nodes.binary_search(&node).ok()
    }

    /// Ground node for a site name, if the snapshot knows it.
    pub fn ground_node(&self, name: &str) -> Option<NodeRef> {
        self.ground_names
            .binary_search_by(|n| n.as_str().cmp(name))
            .ok()
            .map(|i| NodeRef::Ground(i as u32))
    }

    /// Human-readable node label: `S<plane>.<slot>` or the site name.
    pub fn node_label(&self, node: NodeRef) -> String {
        match node {
            NodeRef::Sat(id) => id.to_string(),
            NodeRef::Ground(i) => self.ground_names[i as usize].clone(),
        }
    }

    /// Debug export, one directed arc per row: `t,from,to,km,ms,W`.
    pub fn write_edges_csv(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "t,from,to,km,ms,W")?;
        for e in &self.edges {
            writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6e}",
                self.time_s,
                self.node_label(e.from),
                self.node_label(e.to),
                e.distance_km,
                e.latency_cost_ms,
                e.power_cost_w
            )?;
        }
        Ok(())
    }
}

/// Aggregate facts about a snapshot, for quick sanity checks and logs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotStats {
    pub node_count: usize,
    /// Directed arc count (two per feasible link).
    pub edge_count: usize,
    pub mean_degree: f64,
    pub max_edge_km: f64,
}

pub fn snapshot_stats(snapshot: &Snapshot) -> SnapshotStats {
    let node_count = snapshot.node_count();
    let edge_count = snapshot.edges.len();
    let mean_degree = if node_count == 0 {
        0.0
    } else {
        edge_count as f64 / node_count as f64
    };
    let max_edge_km = snapshot
        .edges
        .iter()
        .map(|e| e.distance_km)
        .fold(0.0, f64::max);
    SnapshotStats {
        node_count,
        edge_count,
        mean_degree,
        max_edge_km,
    }
}

struct IslCandidate {
    a: u32,
    b: u32,
    distance_km: f64,
    power_w: f64,
}

struct GroundCandidate {
    site: u32,
    sat: u32,
    distance_km: f64,
    power_w: f64,
}

/// Per-slot link candidates at the widest range of interest, reusable across
/// the (range, power limit) cells of a sweep.
pub struct SnapshotUniverse {
    time_s: f64,
    max_range_km: f64,
    satellites: Vec<(SatelliteId, EcefPosition)>,
    sites: Vec<GroundSite>,
    site_positions: Vec<EcefPosition>,
    isl: Vec<IslCandidate>,
    ground: Vec<GroundCandidate>,
}

impl SnapshotUniverse {
    /// Evaluate geometry and power chains for every link that could exist at
    /// `max_range_km` or below.
    ///
    /// `positions` holds one ECEF fix per satellite (any order; re-sorted
    /// internally). Site names must be unique: they name graph nodes.
    pub fn build(
        positions: &[(SatelliteId, EcefPosition)],
        sites: &[GroundSite],
        model: &LinkModel,
        max_range_km: f64,
        time_s: f64,
    ) -> Result<Self, NetGraphError> {
        if !(max_range_km.is_finite() && max_range_km >= 0.0) {
            return Err(NetGraphError::InvalidRange(max_range_km));
        }
        model.optical.validate()?;
        model.atmosphere.validate()?;

        let mut satellites: Vec<(SatelliteId, EcefPosition)> = positions.to_vec();
        satellites.sort_by_key(|(id, _)| *id);
        for pair in satellites.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(NetGraphError::DuplicateSatellite(pair[0].0));
            }
        }
        for (id, pos) in &satellites {
            let radius = pos.norm_km();
            if radius <= crate::constants::EARTH_RADIUS_KM {
                return Err(NetGraphError::SatelliteUnderground {
                    id: *id,
                    radius_km: radius,
                });
            }
        }

        // The range cap must respect line of sight for the lowest shell
        // member; past that cap a link would cut through the atmosphere.
        if let Some(min_radius) = satellites
            .iter()
            .map(|(_, p)| p.norm_km())
            .min_by(|a, b| a.total_cmp(b))
        {
            let min_altitude = min_radius - crate::constants::EARTH_RADIUS_KM;
            let max_feasible =
                max_feasible_lisl_range_km(min_altitude, model.grazing_altitude_km)?;
            if max_range_km > max_feasible {
                return Err(NetGraphError::RangeBeyondLineOfSight {
                    range_km: max_range_km,
                    max_km: max_feasible,
                });
            }
        }

        let mut sites: Vec<GroundSite> = sites.to_vec();
        sites.sort_by(|a, b| a.name.cmp(&b.name));
        for pair in sites.windows(2) {
            if pair[0].name == pair[1].name {
                return Err(NetGraphError::DuplicateSite(pair[0].name.clone()));
            }
        }
        for site in &sites {
            site.validate()?;
        }
        let site_positions: Vec<EcefPosition> = sites.iter().map(ground_to_ecef).collect();

        let mut isl = Vec::new();
        for a in 0..satellites.len() {
            for b in (a + 1)..satellites.len() {
                let d = slant_range_km(&satellites[a].1, &satellites[b].1);
                if d > 0.0 && d <= max_range_km {
                    isl.push(IslCandidate {
                        a: a as u32,
                        b: b as u32,
                        distance_km: d,
                        power_w: isl_transmit_power_w(&model.optical, d)?,
                    });
                }
            }
        }

        let mut ground = Vec::new();
        for (si, site) in sites.iter().enumerate() {
            // Each station prices its links through its own atmosphere column.
            let atm = AtmosphereParams {
                site_altitude_km: site.altitude_km,
                ..model.atmosphere.clone()
            };
            for (gi, (_, sat_pos)) in satellites.iter().enumerate() {
                let d = slant_range_km(&site_positions[si], sat_pos);
                if d > site.max_slant_range_km {
                    continue;
                }
                let elevation = elevation_angle_from_ecef_deg(&site_positions[si], sat_pos)?;
                if elevation <= 0.0 {
                    continue; // below the station's horizon
                }
                ground.push(GroundCandidate {
                    site: si as u32,
                    sat: gi as u32,
                    distance_km: d,
                    power_w: updown_transmit_power_w(&model.optical, &atm, d, elevation)?,
                });
            }
        }

        Ok(Self {
            time_s,
            max_range_km,
            satellites,
            sites,
            site_positions,
            isl,
            ground,
        })
    }

    /// Stamp out the snapshot for one (range, power limit) cell.
    pub fn snapshot(
        &self,
        lisl_range_km: f64,
        power_limit_w: Option<f64>,
    ) -> Result<Snapshot, NetGraphError> {
        if !(lisl_range_km.is_finite() && lisl_range_km >= 0.0) {
            return Err(NetGraphError::InvalidRange(lisl_range_km));
        }
        if lisl_range_km > self.max_range_km {
            return Err(NetGraphError::RangeBeyondUniverse {
                range_km: lisl_range_km,
                max_km: self.max_range_km,
            });
        }
        if let Some(p) = power_limit_w {
            if !(p.is_finite() && p > 0.0) {
                return Err(NetGraphError::InvalidPowerLimit(p));
            }
        }
        let admits = |power_w: f64| power_limit_w.map_or(true, |limit| power_w <= limit);

        let satellite_count = self.satellites.len();
        let mut nodes: Vec<NodeRef> = Vec::with_capacity(satellite_count + self.sites.len());
        let mut positions: Vec<EcefPosition> = Vec::with_capacity(nodes.capacity());
        for (id, pos) in &self.satellites {
            nodes.push(NodeRef::Sat(*id));
            positions.push(*pos);
        }
        for (i, pos) in self.site_positions.iter().enumerate() {
            nodes.push(NodeRef::Ground(i as u32));
            positions.push(*pos);
        }

        let sat_node = |i: u32| i as usize;
        let ground_node = |i: u32| satellite_count + i as usize;

        // Undirected survivors of the cell's filters, as index pairs.
        let mut links: Vec<(usize, usize, f64, f64)> = Vec::new();
        for c in &self.isl {
            if c.distance_km <= lisl_range_km && admits(c.power_w) {
                links.push((sat_node(c.a), sat_node(c.b), c.distance_km, c.power_w));
            }
        }
        for c in &self.ground {
            if admits(c.power_w) {
                links.push((sat_node(c.sat), ground_node(c.site), c.distance_km, c.power_w));
            }
        }

        Ok(assemble_snapshot(
            self.time_s,
            lisl_range_km,
            power_limit_w,
            nodes,
            positions,
            self.sites.iter().map(|s| s.name.clone()).collect(),
            satellite_count,
            &links,
        ))
    }
}

/// Final assembly: directed arcs in sorted order plus adjacency lists.
/// `links` holds undirected survivors as (node index, node index, km, W).
#[allow(clippy::too_many_arguments)]
fn assemble_snapshot(
    time_s: f64,
    lisl_range_km: f64,
    power_limit_w: Option<f64>,
    nodes: Vec<NodeRef>,
    positions: Vec<EcefPosition>,
    ground_names: Vec<String>,
    satellite_count: usize,
    links: &[(usize, usize, f64, f64)],
) -> Snapshot {
    let mut edges: Vec<Edge> = Vec::with_capacity(links.len() * 2);
    for &(u, v, d, w) in links {
        let latency = d / SPEED_OF_LIGHT_KM_S * 1e3;
        edges.push(Edge {
            from: nodes[u],
            to: nodes[v],
            distance_km: d,
            latency_cost_ms: latency,
            power_cost_w: w,
        });
        edges.push(Edge {
            from: nodes[v],
            to: nodes[u],
            distance_km: d,
            latency_cost_ms: latency,
            power_cost_w: w,
        });
    }
    edges.sort_by(|x, y| (x.from, x.to).cmp(&(y.from, y.to)));

    let mut adjacency: Vec<Vec<OutArc>> = vec![Vec::new(); nodes.len()];
    for (idx, e) in edges.iter().enumerate() {
        // Node lists are sorted, so binary search recovers indices.
        let from = nodes.binary_search(&e.from).expect("edge endpoint in nodes");
        let to = nodes.binary_search(&e.to).expect("edge endpoint in nodes");
        adjacency[from].push(OutArc {
            to: to as u32,
            latency_ms: e.latency_cost_ms,
            distance_km: e.distance_km,
            edge_index: idx as u32,
        });
    }
    // Edges are sorted by (from, to), so each adjacency list is already
    // sorted by destination.

    Snapshot {
        time_s,
        lisl_range_km,
        power_limit_w,
        ground_names,
        satellite_count,
        nodes,
        positions,
        edges,
        adjacency,
    }
}

/// Build the routing graph for one time slot directly.
pub fn build_snapshot(
    positions: &[(SatelliteId, EcefPosition)],
    sites: &[GroundSite],
    model: &LinkModel,
    lisl_range_km: f64,
    power_limit_w: Option<f64>,
    time_s: f64,
) -> Result<Snapshot, NetGraphError> {
    SnapshotUniverse::build(positions, sites, model, lisl_range_km, time_s)?
        .snapshot(lisl_range_km, power_limit_w)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::EARTH_RADIUS_KM;
    use crate::orbital::{propagate_constellation, ConstellationSpec};

    fn sat(plane: u32, slot: u32) -> SatelliteId {
        SatelliteId { plane, slot }
    }

    /// Two satellites exactly `d` km apart on the 550 km shell, plus one
    /// ground site far away in the southern hemisphere.
    fn two_sat_positions(d: f64) -> Vec<(SatelliteId, EcefPosition)> {
        let r = EARTH_RADIUS_KM + 550.0;
        let y = d / 2.0;
        let x = (r * r - y * y).sqrt();
        vec![
            (sat(0, 0), EcefPosition { x_km: x, y_km: y, z_km: 0.0 }),
            (sat(0, 1), EcefPosition { x_km: x, y_km: -y, z_km: 0.0 }),
        ]
    }

    fn equator_site(name: &str, lon_deg: f64) -> GroundSite {
        GroundSite::new(name, 0.0, lon_deg, 0.1, 1123.0).unwrap()
    }

    #[test]
    fn two_sats_one_site_build_expected_edges() {
        let mut positions = two_sat_positions(1000.0);
        // A third satellite straight above the site at longitude 0.
        positions.push((
            sat(1, 0),
            EcefPosition { x_km: EARTH_RADIUS_KM + 550.0, y_km: 0.0, z_km: 0.0 },
        ));
        let site = equator_site("Quito", 0.0);
        let snap = build_snapshot(
            &positions,
            &[site],
            &LinkModel::default(),
            1200.0,
            None,
            0.0,
        )
        .unwrap();

        assert_eq!(snap.node_count(), 4);
        assert_eq!(snap.satellite_count(), 3);
        // Links: the 1000 km pair, sat(1,0)-ground, and whatever the shell
        // geometry admits between sat(1,0) and the pair (posts checked, not
        // assumed). Every link appears as two arcs.
        assert!(snap.edges().len() % 2 == 0);
        let ground = snap.ground_node("Quito").unwrap();
        let gi = snap.node_index(ground).unwrap();
        assert!(!snap.neighbors(gi).is_empty(), "site should see its zenith satellite");
        for e in snap.edges() {
            assert_ne!(e.from, e.to);
            assert!(e.power_cost_w > 0.0);
            // Propagation cost is distance over the speed of light, exactly.
            let expected = e.distance_km / SPEED_OF_LIGHT_KM_S * 1e3;
            assert!((e.latency_cost_ms - expected).abs() <= expected * 1e-12);
        }
    }

    #[test]
    fn edge_latency_anchor_1575_km() {
        // 1575 km of vacuum: 5.2536 ms of propagation.
        let snap = build_snapshot(
            &two_sat_positions(1575.0),
            &[],
            &LinkModel::default(),
            1575.0,
            None,
            0.0,
        )
        .unwrap();
        assert_eq!(snap.edges().len(), 2);
        let e = &snap.edges()[0];
        assert!((e.distance_km - 1575.0).abs() < 1e-9);
        assert!((e.latency_cost_ms - 5.2536).abs() < 1e-4, "latency {}", e.latency_cost_ms);
    }

    #[test]
    fn arcs_come_in_symmetric_pairs() {
        let spec = ConstellationSpec { plane_count: 4, sats_per_plane: 8, ..Default::default() };
        let positions = propagate_constellation(&spec, 120.0);
        let sites = [equator_site("A", 10.0), equator_site("B", 132.0)];
        let snap = build_snapshot(&positions, &sites, &LinkModel::default(), 4800.0, None, 120.0)
            .unwrap();
        assert!(!snap.edges().is_empty());
        for e in snap.edges() {
            let mirror = snap
                .edges()
                .iter()
                .find(|m| m.from == e.to && m.to == e.from)
                .expect("every arc has a reverse arc");
            assert_eq!(mirror.distance_km, e.distance_km);
            assert_eq!(mirror.latency_cost_ms, e.latency_cost_ms);
            assert_eq!(mirror.power_cost_w, e.power_cost_w);
        }
    }

    #[test]
    fn range_and_power_filters_are_monotone() {
        let spec = ConstellationSpec { plane_count: 5, sats_per_plane: 10, ..Default::default() };
        let positions = propagate_constellation(&spec, 777.0);
        let sites = [equator_site("A", -40.0)];
        let universe =
            SnapshotUniverse::build(&positions, &sites, &LinkModel::default(), 5016.0, 777.0)
                .unwrap();

        let key = |e: &Edge| (e.from, e.to);
        // Wider range admits a superset of links.
        let narrow = universe.snapshot(2000.0, None).unwrap();
        let wide = universe.snapshot(4500.0, None).unwrap();
        assert!(narrow.edges().len() < wide.edges().len());
        for e in narrow.edges() {
            assert!(wide.edges().iter().any(|w| key(w) == key(e)));
        }
        // Looser power limit likewise.
        let tight = universe.snapshot(4500.0, Some(1.0)).unwrap();
        let loose = universe.snapshot(4500.0, Some(4.0)).unwrap();
        assert!(tight.edges().len() <= loose.edges().len());
        for e in tight.edges() {
            assert!(loose.edges().iter().any(|l| key(l) == key(e)));
            assert!(e.power_cost_w <= 1.0);
        }
    }

    #[test]
    fn power_limit_equals_power_at_3000_km_caps_isl_length() {
        let spec = ConstellationSpec::default();
        let positions = propagate_constellation(&spec, 0.0);
        let limit = isl_transmit_power_w(&OpticalParams::default(), 3000.0).unwrap();
        let snap = build_snapshot(&positions, &[], &LinkModel::default(), 5016.0, Some(limit), 0.0)
            .unwrap();
        assert!(!snap.edges().is_empty());
        for e in snap.edges() {
            // Power grows with distance, so the cap bites exactly at 3000 km.
            assert!(e.distance_km <= 3000.0 + 1e-6, "edge of {} km survived", e.distance_km);
        }
    }

    #[test]
    fn zero_range_leaves_only_ground_links() {
        let spec = ConstellationSpec { plane_count: 3, sats_per_plane: 6, ..Default::default() };
        let positions = propagate_constellation(&spec, 50.0);
        let sites = [equator_site("A", 0.0), equator_site("B", 90.0)];
        let snap =
            build_snapshot(&positions, &sites, &LinkModel::default(), 0.0, None, 50.0).unwrap();
        for e in snap.edges() {
            let sats = matches!(e.from, NodeRef::Sat(_)) as u8 + matches!(e.to, NodeRef::Sat(_)) as u8;
            assert_eq!(sats, 1, "only ground-satellite links may remain: {e:?}");
        }
    }

    #[test]
    fn no_ground_to_ground_edges_ever() {
        let sites = [equator_site("A", 0.0), equator_site("B", 0.5)];
        let positions = two_sat_positions(800.0);
        let snap =
            build_snapshot(&positions, &sites, &LinkModel::default(), 1000.0, None, 0.0).unwrap();
        for e in snap.edges() {
            assert!(
                matches!(e.from, NodeRef::Sat(_)) || matches!(e.to, NodeRef::Sat(_)),
                "ground-to-ground edge built: {e:?}"
            );
        }
    }

    #[test]
    fn range_beyond_line_of_sight_is_rejected() {
        let positions = two_sat_positions(1000.0);
        let err = build_snapshot(&positions, &[], &LinkModel::default(), 5600.0, None, 0.0);
        assert!(matches!(err, Err(NetGraphError::RangeBeyondLineOfSight { .. })));
        // 5016 km sits just inside the 550 km shell's 5016.6 km maximum.
        build_snapshot(&positions, &[], &LinkModel::default(), 5016.0, None, 0.0).unwrap();
    }

    #[test]
    fn universe_rejects_ranges_beyond_its_candidates() {
        let positions = two_sat_positions(1000.0);
        let universe =
            SnapshotUniverse::build(&positions, &[], &LinkModel::default(), 2000.0, 0.0).unwrap();
        assert!(matches!(
            universe.snapshot(3000.0, None),
            Err(NetGraphError::RangeBeyondUniverse { .. })
        ));
        assert!(matches!(
            universe.snapshot(1500.0, Some(-0.5)),
            Err(NetGraphError::InvalidPowerLimit(_))
        ));
    }

    #[test]
    fn duplicate_names_and_ids_are_rejected() {
        let mut positions = two_sat_positions(1000.0);
        positions[1].0 = positions[0].0;
        assert!(matches!(
            build_snapshot(&positions, &[], &LinkModel::default(), 1200.0, None, 0.0),
            Err(NetGraphError::DuplicateSatellite(_))
        ));
        let sites = [equator_site("A", 0.0), equator_site("A", 10.0)];
        assert!(matches!(
            build_snapshot(&two_sat_positions(1000.0), &sites, &LinkModel::default(), 1200.0, None, 0.0),
            Err(NetGraphError::DuplicateSite(_))
        ));
    }

    #[test]
    fn stats_of_empty_snapshot_are_zero() {
        let snap = build_snapshot(&[], &[], &LinkModel::default(), 1000.0, None, 0.0).unwrap();
        let stats = snapshot_stats(&snap);
        assert_eq!(stats.node_count, 0);
        assert_eq!(stats.edge_count, 0);
        assert_eq!(stats.mean_degree, 0.0);
        assert_eq!(stats.max_edge_km, 0.0);
    }

    #[test]
    fn stats_count_nodes_arcs_and_longest_edge() {
        let snap = build_snapshot(
            &two_sat_positions(1575.0),
            &[],
            &LinkModel::default(),
            1575.0,
            None,
            0.0,
        )
        .unwrap();
        let stats = snapshot_stats(&snap);
        assert_eq!(stats.node_count, 2);
        assert_eq!(stats.edge_count, 2);
        assert_eq!(stats.mean_degree, 1.0);
        assert!((stats.max_edge_km - 1575.0).abs() < 1e-9);
        assert!(stats.max_edge_km <= snap.lisl_range_km);
    }

    #[test]
    fn full_shell_has_six_close_neighbors_per_satellite() {
        // At 1575 km every satellite should reach at least 6 others in its
        // own or an adjacent plane (4 along-track + one per neighbor plane).
        let spec = ConstellationSpec::default();
        let positions = propagate_constellation(&spec, 0.0);
        let snap =
            build_snapshot(&positions, &[], &LinkModel::default(), 1575.0, None, 0.0).unwrap();
        let planes = spec.plane_count;
        let adjacent = |a: u32, b: u32| {
            a == b || (a + 1) % planes == b || (b + 1) % planes == a
        };
        for node in 0..snap.satellite_count() {
            let NodeRef::Sat(me) = snap.nodes()[node] else { unreachable!() };
            let close = snap
                .neighbors(node)
                .iter()
                .filter(|arc| {
                    let NodeRef::Sat(other) = snap.nodes()[arc.to as usize] else {
                        return false;
                    };
                    adjacent(me.plane, other.plane)
                })
                .count();
            assert!(close >= 6, "{me} has only {close} close neighbors");
        }
    }

    #[test]
    fn universe_and_direct_build_agree() {
        let spec = ConstellationSpec { plane_count: 4, sats_per_plane: 9, ..Default::default() };
        let positions = propagate_constellation(&spec, 3600.0);
        let sites = [equator_site("A", 77.0)];
        let universe =
            SnapshotUniverse::build(&positions, &sites, &LinkModel::default(), 5016.0, 3600.0)
                .unwrap();
        let from_universe = universe.snapshot(2500.0, Some(2.0)).unwrap();
        let direct =
            build_snapshot(&positions, &sites, &LinkModel::default(), 2500.0, Some(2.0), 3600.0)
                .unwrap();
        assert_eq!(from_universe.edges(), direct.edges());
        assert_eq!(from_universe.nodes(), direct.nodes());
    }

    #[test]
    fn higher_sites_pay_less_for_the_same_zenith_link() {
        // Same 600 km zenith slant from a sea-level site and a 2 km one: the
        // high site looks through less atmosphere.
        let make = |alt: f64| {
            let site = GroundSite::new("X", 0.0, 0.0, alt, 1123.0).unwrap();
            let shell = EARTH_RADIUS_KM + alt + 600.0;
            let positions = vec![(
                sat(0, 0),
                EcefPosition { x_km: shell, y_km: 0.0, z_km: 0.0 },
            )];
            let snap = build_snapshot(&positions, &[site], &LinkModel::default(), 0.0, None, 0.0)
                .unwrap();
            assert_eq!(snap.edges().len(), 2);
            snap.edges()[0].power_cost_w
        };
        let low = make(0.1);
        let high = make(2.0);
        assert!(high < low, "high-site power {high} should undercut {low}");
    }

    #[test]
    fn snapshot_ordering_is_deterministic() {
        let spec = ConstellationSpec { plane_count: 3, sats_per_plane: 5, ..Default::default() };
        // Feed positions in reversed order; the snapshot re-sorts.
        let mut positions = propagate_constellation(&spec, 10.0);
        positions.reverse();
        let sites = [equator_site("B", 20.0), equator_site("A", 10.0)];
        let snap =
            build_snapshot(&positions, &sites, &LinkModel::default(), 3000.0, None, 10.0).unwrap();
        let mut sorted_nodes = snap.nodes().to_vec();
        sorted_nodes.sort();
        assert_eq!(snap.nodes(), sorted_nodes.as_slice());
        assert_eq!(snap.node_label(NodeRef::Ground(0)), "A");
        let mut sorted_edges = snap.edges().to_vec();
        sorted_edges.sort_by(|x, y| (x.from, x.to).cmp(&(y.from, y.to)));
        assert_eq!(snap.edges(), sorted_edges.as_slice());
    }

    #[test]
    fn edges_csv_is_one_row_per_arc() {
        let snap = build_snapshot(
            &two_sat_positions(1575.0),
            &[],
            &LinkModel::default(),
            1575.0,
            None,
            42.0,
        )
        .unwrap();
        let mut buf = Vec::new();
        snap.write_edges_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,from,to,km,ms,W");
        assert_eq!(lines.len(), 1 + snap.edges().len());
        assert!(lines[1].starts_with("42,S0.0,S0.1,1575.000000,5.253634,"), "{}", lines[1]);
    }
}
